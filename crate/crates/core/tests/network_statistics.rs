//! Cross-module statistics of the composed network: binned correlation
//! surfaces from trajectory ensembles against the analytic shapes.

use pnr_core::pulses::{gaussian_h, PulseSpec};
use pnr_core::slh::full_network;
use pnr_core::trajectory::{estimate_g2, McwfEngine};
use pnr_core::Error;

/// Pearson correlation between two flattened surfaces.
fn correlation(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let mut cov = 0.0;
    let mut va = 0.0;
    let mut vb = 0.0;
    for (x, y) in a.iter().zip(b) {
        cov += (x - ma) * (y - mb);
        va += (x - ma) * (x - ma);
        vb += (y - mb) * (y - mb);
    }
    cov / (va * vb).sqrt()
}

#[test]
fn pass_through_histogram_recovers_the_input_product() {
    // an emitter with zero coupling leaves the released pair untouched, so
    // the forward-channel pair histogram must follow 2 |h(t1) h(t2)|^2
    let spec = PulseSpec::gaussian_fock(2, 1.0).unwrap();
    let network = full_network(&spec, 1, 0.0).unwrap();
    let engine = McwfEngine::new(&network).unwrap();
    let records = engine.run_ensemble(20_000, 31_415).unwrap();
    let window = (-1.8, 1.8);
    let bin = 0.36;
    let hist = estimate_g2(&records, 1, |_| true, bin, window).unwrap();
    assert_eq!(hist.n_selected, 20_000);

    let mut sampled = Vec::new();
    let mut analytic = Vec::new();
    for i in 0..hist.n_bins {
        let t1 = window.0 + (i as f64 + 0.5) * bin;
        for j in 0..hist.n_bins {
            let t2 = window.0 + (j as f64 + 0.5) * bin;
            // symmetry of the estimator
            assert_eq!(hist.bins[i][j], hist.bins[j][i]);
            sampled.push(hist.bins[i][j]);
            analytic.push(
                2.0 * gaussian_h(1.0, 0.0, t1).norm_sqr() * gaussian_h(1.0, 0.0, t2).norm_sqr(),
            );
        }
    }
    let corr = correlation(&sampled, &analytic);
    assert!(corr >= 0.99, "shape correlation {corr}");
}

#[test]
fn strong_coupling_surface_is_diagonal_enhanced() {
    // post-selected on no subtraction at strong coupling, surviving pairs
    // bunch: the diagonal outweighs the uncorrelated product prediction
    let spec = PulseSpec::gaussian_fock(2, 5.0).unwrap();
    let network = full_network(&spec, 1, 1.0).unwrap();
    let engine = McwfEngine::new(&network).unwrap();
    let records = engine.run_ensemble(12_000, 2_718).unwrap();
    let window = (-7.5, 7.5);
    let bin = 1.5;
    let hist = estimate_g2(
        &records,
        1,
        |r| r.jumps.iter().all(|j| j.channel != 1),
        bin,
        window,
    )
    .unwrap();
    assert!(hist.n_selected >= 100);
    let n = hist.n_bins;
    let diag: f64 = (0..n).map(|i| hist.bins[i][i]).sum();
    let total: f64 = hist
        .bins
        .iter()
        .flat_map(|row| row.iter())
        .sum();
    // an uncorrelated pair of identical single-photon profiles puts roughly
    // 1/sqrt(2 pi sigma_bins^2)-of-mass on the diagonal; bunching well exceeds
    // the product-state diagonal fraction measured at zero coupling
    let product = {
        let network = full_network(&spec, 1, 0.0).unwrap();
        let engine = McwfEngine::new(&network).unwrap();
        let records = engine.run_ensemble(12_000, 9_001).unwrap();
        let hist = estimate_g2(&records, 1, |_| true, bin, window).unwrap();
        let diag: f64 = (0..n).map(|i| hist.bins[i][i]).sum();
        let total: f64 = hist.bins.iter().flat_map(|r| r.iter()).sum();
        diag / total
    };
    assert!(
        diag / total > 1.5 * product,
        "diagonal fraction {} vs product-state {product}",
        diag / total
    );
}

#[test]
fn too_few_surviving_trajectories_is_an_error() {
    let spec = PulseSpec::gaussian_fock(2, 1.0).unwrap();
    let network = full_network(&spec, 1, 1.0).unwrap();
    let engine = McwfEngine::new(&network).unwrap();
    let records = engine.run_ensemble(150, 5).unwrap();
    let r = estimate_g2(&records, 1, |_| false, 0.5, (-3.0, 3.0));
    assert!(matches!(r, Err(Error::InsufficientStatistics(_))));
}
