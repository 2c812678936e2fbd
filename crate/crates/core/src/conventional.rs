//! Baseline photon-number resolution by spatial demultiplexing: a cascade of
//! beamsplitters routing photons onto n+1 single-photon detectors, modeled as
//! a multinomial distribution over the detectors.

use crate::error::{Error, Result};

/// Beamsplitter reflectivities R_1..R_n, each in [0, 1].
#[derive(Debug, Clone, PartialEq)]
pub struct SplitterConfig {
    pub reflectivities: Vec<f64>,
}

impl SplitterConfig {
    pub fn new(reflectivities: Vec<f64>) -> Result<Self> {
        for (i, r) in reflectivities.iter().enumerate() {
            if !(0.0..=1.0).contains(r) {
                return Err(Error::Config(format!(
                    "reflectivity R_{} = {r} outside [0, 1]",
                    i + 1
                )));
            }
        }
        Ok(Self { reflectivities })
    }

    /// Balanced tree over n splitters: R_i = 1/(n + 2 - i) routes photons
    /// uniformly onto all n+1 detectors.
    pub fn balanced(n: usize) -> Self {
        Self {
            reflectivities: (1..=n).map(|i| 1.0 / (n + 2 - i) as f64).collect(),
        }
    }

    /// All splitters share one reflectivity.
    pub fn equal(n: usize, r: f64) -> Result<Self> {
        Self::new(vec![r; n])
    }
}

/// Probability that an incoming photon reaches detector i (1-based, the
/// (n+1)-th collects the fully transmitted light):
/// `P_i = R_i prod_{j<i} (1 - R_j)`, `P_{n+1} = prod_j (1 - R_j)`.
/// The probabilities telescope to exactly 1.
pub fn routing_probs(cfg: &SplitterConfig) -> Vec<f64> {
    let n = cfg.reflectivities.len();
    let mut probs = Vec::with_capacity(n + 1);
    let mut transmitted = 1.0;
    for &r in &cfg.reflectivities {
        probs.push(r * transmitted);
        transmitted *= 1.0 - r;
    }
    probs.push(transmitted);
    probs
}

/// Ordered compositions of `total` photons over `slots` detectors with
/// exactly `nonzero` occupied slots, visited in lexicographic order.
fn visit_compositions<F: FnMut(&[usize])>(
    slots: usize,
    total: usize,
    nonzero: usize,
    current: &mut Vec<usize>,
    visit: &mut F,
) {
    let remaining_slots = slots - current.len();
    if remaining_slots == 0 {
        if total == 0 && nonzero == 0 {
            visit(current);
        }
        return;
    }
    for occ in 0..=total {
        let used = usize::from(occ > 0);
        if used > nonzero {
            break;
        }
        let nz_left = nonzero - used;
        let photons_left = total - occ;
        // every remaining occupied slot takes at least one photon, and
        // photons can only land in occupied slots
        if nz_left > remaining_slots - 1 || photons_left < nz_left {
            continue;
        }
        if photons_left > 0 && nz_left == 0 {
            continue;
        }
        current.push(occ);
        visit_compositions(slots, photons_left, nz_left, current, visit);
        current.pop();
    }
}

/// Average number of detectors registering a click when `n_photons` photons
/// enter a tree with routing probabilities `probs`: the multinomial occupancy
/// expectation, summed over ordered occupation patterns grouped by their
/// click count.
pub fn avg_clicks(probs: &[f64], n_photons: usize) -> Result<f64> {
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 {
        return Err(Error::Domain(format!(
            "routing probabilities sum to {total}, not 1"
        )));
    }
    if n_photons > 12 {
        return Err(Error::Unsupported(format!(
            "occupancy enumeration is limited to 12 photons, got {n_photons}"
        )));
    }
    if n_photons == 0 {
        return Ok(0.0);
    }
    let slots = probs.len();
    let n_fact: f64 = (1..=n_photons).map(|k| k as f64).product();
    let factorials: Vec<f64> = (0..=n_photons)
        .map(|k| (1..=k).map(|x| x as f64).product())
        .collect();
    let mut expectation = 0.0;
    for k in 1..=slots.min(n_photons) {
        let mut prob_k = 0.0;
        let mut current = Vec::with_capacity(slots);
        visit_compositions(slots, n_photons, k, &mut current, &mut |occ| {
            let mut term = 1.0;
            for (p, &a) in probs.iter().zip(occ) {
                if a > 0 {
                    term *= p.powi(a as i32) / factorials[a];
                }
            }
            prob_k += term;
        });
        expectation += k as f64 * n_fact * prob_k;
    }
    Ok(expectation)
}

/// Exact occupancy expectation by enumerating every assignment of
/// distinguishable photons to detectors; the brute-force oracle for
/// [`avg_clicks`].
pub fn avg_clicks_bruteforce(probs: &[f64], n_photons: usize) -> Result<f64> {
    let slots = probs.len();
    let assignments = (slots as f64).powi(n_photons as i32);
    if assignments > 1e7 {
        return Err(Error::Unsupported(format!(
            "{assignments:.0} assignments exceed the enumeration bound"
        )));
    }
    if n_photons == 0 {
        return Ok(0.0);
    }
    let mut expectation = 0.0;
    let mut assignment = vec![0usize; n_photons];
    loop {
        let mut prob = 1.0;
        let mut hit = vec![false; slots];
        for &slot in &assignment {
            prob *= probs[slot];
            hit[slot] = true;
        }
        expectation += prob * hit.iter().filter(|&&h| h).count() as f64;
        // odometer increment
        let mut pos = 0;
        loop {
            if pos == n_photons {
                return Ok(expectation);
            }
            assignment[pos] += 1;
            if assignment[pos] < slots {
                break;
            }
            assignment[pos] = 0;
            pos += 1;
        }
    }
}

/// Find the shared reflectivity maximizing the click count for `n` splitters
/// and `n_photons` input photons, by golden-section search on (0, 1).
pub fn optimize_equal_reflectivity(n: usize, n_photons: usize) -> Result<(f64, f64)> {
    if n == 0 {
        return Err(Error::Config("need at least one splitter".into()));
    }
    let objective = |r: f64| -> Result<f64> {
        avg_clicks(&routing_probs(&SplitterConfig::equal(n, r)?), n_photons)
    };
    let phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = (1e-9, 1.0 - 1e-9);
    let mut c = b - phi * (b - a);
    let mut d = a + phi * (b - a);
    let mut fc = objective(c)?;
    let mut fd = objective(d)?;
    while (b - a).abs() > 1e-6 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - phi * (b - a);
            fc = objective(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + phi * (b - a);
            fd = objective(d)?;
        }
    }
    let r = 0.5 * (a + b);
    Ok((r, objective(r)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::RngStream;

    #[test]
    fn single_splitter_routing() {
        let probs = routing_probs(&SplitterConfig::new(vec![0.5]).unwrap());
        assert_eq!(probs, vec![0.5, 0.5]);
    }

    #[test]
    fn balanced_tree_is_uniform() {
        let cfg = SplitterConfig::balanced(4);
        assert_eq!(cfg.reflectivities, vec![0.2, 0.25, 1.0 / 3.0, 0.5]);
        let probs = routing_probs(&cfg);
        for p in &probs {
            assert!((p - 0.2).abs() < 1e-14, "probs {probs:?}");
        }
    }

    #[test]
    fn transparent_tree_routes_to_last_detector() {
        let probs = routing_probs(&SplitterConfig::new(vec![0.0; 3]).unwrap());
        assert_eq!(probs, vec![0.0, 0.0, 0.0, 1.0]);
    }

    #[test]
    fn routing_sums_to_one_exactly() {
        let mut rng = RngStream::new(31, 0);
        for _ in 0..50 {
            let n = 1 + (rng.next_u64() % 5) as usize;
            let refl: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
            let probs = routing_probs(&SplitterConfig::new(refl).unwrap());
            let total: f64 = probs.iter().sum();
            assert!((total - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn one_photon_always_one_click() {
        let probs = routing_probs(&SplitterConfig::new(vec![0.3, 0.7]).unwrap());
        assert!((avg_clicks(&probs, 1).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn two_photons_two_uniform_detectors() {
        // outcomes (2,0), (0,2) give one click at 1/4 each; (1,1) gives two
        let clicks = avg_clicks(&[0.5, 0.5], 2).unwrap();
        assert!((clicks - 1.5).abs() < 1e-14, "clicks {clicks}");
    }

    #[test]
    fn five_uniform_detectors_five_photons() {
        let probs = vec![0.2; 5];
        let clicks = avg_clicks(&probs, 5).unwrap();
        let closed_form = 5.0 * (1.0 - 0.8f64.powi(5));
        assert!((clicks - closed_form).abs() < 1e-12);
        assert!((clicks - 3.3616).abs() < 1e-10);
    }

    #[test]
    fn occupancy_closed_form_and_bruteforce_agree() {
        let mut rng = RngStream::new(77, 2);
        for _ in 0..50 {
            let n = 1 + (rng.next_u64() % 3) as usize; // up to 4 detectors
            let n_photons = 1 + (rng.next_u64() % 5) as usize;
            let mut weights: Vec<f64> = (0..=n).map(|_| rng.uniform() + 1e-3).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let a = avg_clicks(&weights, n_photons).unwrap();
            let b = avg_clicks_bruteforce(&weights, n_photons).unwrap();
            let closed: f64 = weights
                .iter()
                .map(|p| 1.0 - (1.0 - p).powi(n_photons as i32))
                .sum();
            assert!((a - b).abs() < 1e-12, "{a} vs {b}");
            assert!((a - closed).abs() < 1e-12, "{a} vs closed {closed}");
        }
    }

    #[test]
    fn bruteforce_edge_cases() {
        assert_eq!(avg_clicks_bruteforce(&[0.4, 0.6], 0).unwrap(), 0.0);
        let single = avg_clicks_bruteforce(&[1.0], 4).unwrap();
        assert!((single - 1.0).abs() < 1e-14);
        assert!(avg_clicks_bruteforce(&vec![0.1; 10], 12).is_err());
    }

    #[test]
    fn clicks_bounded_by_photons_and_detectors() {
        let mut rng = RngStream::new(9, 9);
        for _ in 0..30 {
            let n = 1 + (rng.next_u64() % 4) as usize;
            let n_photons = 1 + (rng.next_u64() % 6) as usize;
            let mut weights: Vec<f64> = (0..=n).map(|_| rng.uniform() + 1e-3).collect();
            let total: f64 = weights.iter().sum();
            weights.iter_mut().for_each(|w| *w /= total);
            let clicks = avg_clicks(&weights, n_photons).unwrap();
            assert!(clicks <= n_photons.min(n + 1) as f64 + 1e-12);
            assert!(clicks >= 1.0 - 1e-12);
        }
    }

    #[test]
    fn uniform_routing_beats_random_configurations() {
        let mut rng = RngStream::new(123, 5);
        for n in 1..=3usize {
            for n_photons in 1..=4usize {
                let uniform = avg_clicks(&vec![1.0 / (n as f64 + 1.0); n + 1], n_photons).unwrap();
                for _ in 0..17 {
                    let refl: Vec<f64> = (0..n).map(|_| rng.uniform()).collect();
                    let probs = routing_probs(&SplitterConfig::new(refl).unwrap());
                    let clicks = avg_clicks(&probs, n_photons).unwrap();
                    assert!(
                        clicks <= uniform + 1e-12,
                        "n={n} N={n_photons}: {clicks} beats uniform {uniform}"
                    );
                }
            }
        }
    }

    #[test]
    fn equal_reflectivity_optimum() {
        // flat objective for one photon: any maximizer gives one click
        let (_, clicks) = optimize_equal_reflectivity(1, 1).unwrap();
        assert!((clicks - 1.0).abs() < 1e-9);

        // the uniform (balanced-tree) routing upper-bounds the equal-R tree
        let (r, clicks) = optimize_equal_reflectivity(4, 5).unwrap();
        assert!(clicks <= 3.3616 + 1e-9, "clicks {clicks}");
        assert!(clicks > 3.0, "clicks {clicks}");
        // unimodality of the objective on a grid before trusting the search
        let mut best_grid = 0.0f64;
        let mut increases_after_peak = false;
        let mut prev = 0.0;
        let mut falling = false;
        for k in 1..200 {
            let rr = k as f64 / 200.0;
            let v = avg_clicks(&routing_probs(&SplitterConfig::equal(4, rr).unwrap()), 5).unwrap();
            if v > best_grid {
                best_grid = v;
            }
            if k > 1 {
                if v < prev - 1e-12 {
                    falling = true;
                } else if falling && v > prev + 1e-9 {
                    increases_after_peak = true;
                }
            }
            prev = v;
        }
        assert!(!increases_after_peak, "objective is not unimodal");
        assert!(clicks >= best_grid - 1e-6, "golden section missed the grid optimum");
        assert!((0.0..=1.0).contains(&r));
    }
}
