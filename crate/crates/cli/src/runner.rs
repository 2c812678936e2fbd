//! Experiment dispatch: each experiment renders one deterministic table.

use pnr_core::conventional::{avg_clicks, optimize_equal_reflectivity, routing_probs, SplitterConfig};
use pnr_core::linear::{avg_error, LinearConfig};
use pnr_core::nonlinear::NonlinearModel;
use pnr_core::numerics::TimeGrid;
use pnr_core::slh::full_network;
use pnr_core::trajectory::{estimate_outcomes, response_curve, McwfEngine};
use pnr_core::{Error, Result, GAMMA_G};

use crate::config::{validate, Experiment, ExperimentConfig};
use crate::table::{fnv1a, num, ResultTable};

/// Run the configured experiment and return its table. The configuration is
/// validated first; any diagnostic aborts the run.
pub fn run(config: &ExperimentConfig) -> Result<ResultTable> {
    let diags = validate(config);
    if !diags.is_empty() {
        return Err(Error::Config(diags.join("; ")));
    }
    let mut table = match config.experiment {
        Experiment::Linear => run_linear(config)?,
        Experiment::Outcomes => run_outcomes(config)?,
        Experiment::Correlate => run_correlate(config)?,
        Experiment::Trajectory => run_trajectory(config)?,
        Experiment::Response => run_response(config)?,
        Experiment::Compare => run_compare(config)?,
    };
    let echo = config.echo();
    let hash = fnv1a(echo.iter().map(|(k, v)| format!("{k}={v}")));
    table.metadata = echo;
    table
        .metadata
        .push(("config_fnv1a".into(), format!("{hash:016x}")));
    table
        .metadata
        .push(("tool".into(), format!("pnr {}", env!("CARGO_PKG_VERSION"))));
    Ok(table)
}

fn run_linear(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&["delta_gamma", "n_photons", "avg_error"]);
    for &dg in &config.delta_gamma {
        let cfg = LinearConfig::new(dg, config.n_emitters)?.with_detuning(config.detuning);
        for n in config.photons_min..=config.photons_max {
            let err = avg_error(n, &cfg)?;
            table.push_row(vec![num(dg), n.to_string(), num(err)]);
        }
    }
    Ok(table)
}

fn run_outcomes(config: &ExperimentConfig) -> Result<ResultTable> {
    let mut table = ResultTable::new(&["delta_gamma", "n_photons", "outcome", "probability"]);
    for &dg in &config.delta_gamma {
        let model = NonlinearModel::new(&config.pulse_spec(dg)?)?;
        for j in 0..=config.n_photons {
            let p = model.p_outcome(j)?;
            table.push_row(vec![num(dg), config.n_photons.to_string(), j.to_string(), num(p)]);
        }
    }
    Ok(table)
}

fn run_correlate(config: &ExperimentConfig) -> Result<ResultTable> {
    let dg = config.delta_gamma[0];
    let model = NonlinearModel::new(&config.pulse_spec(dg)?)?;
    let (t0, t1, points) = config
        .grid
        .unwrap_or((-1.5 * dg - 1.0, 1.5 * dg + 1.0, 41));
    let grid = TimeGrid::new(t0, t1, points)?;
    let surface = model.correlator_grid(config.outcome, &grid)?;
    let mut table = ResultTable::new(&["t1", "t2", "g2"]);
    for (i, row) in surface.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            table.push_row(vec![num(grid.time(i)), num(grid.time(j)), num(*v)]);
        }
    }
    Ok(table)
}

fn run_trajectory(config: &ExperimentConfig) -> Result<ResultTable> {
    let seed = config.seed.expect("validated");
    let mut table = ResultTable::new(&[
        "delta_gamma",
        "outcome",
        "estimate",
        "stderr",
        "trajectories",
    ]);
    for (sweep_idx, &dg) in config.delta_gamma.iter().enumerate() {
        let network = full_network(&config.pulse_spec(dg)?, config.n_emitters, GAMMA_G)?;
        let engine = McwfEngine::new(&network)?;
        let records =
            engine.run_ensemble(config.trajectories, seed.wrapping_add((sweep_idx as u64) << 40))?;
        let est = estimate_outcomes(&records, config.n_emitters, config.n_photons)?;
        for j in 0..=config.n_photons {
            table.push_row(vec![
                num(dg),
                j.to_string(),
                num(est.probabilities[j]),
                num(est.stderr[j]),
                config.trajectories.to_string(),
            ]);
        }
    }
    Ok(table)
}

fn run_response(config: &ExperimentConfig) -> Result<ResultTable> {
    let seed = config.seed.expect("validated");
    let photons: Vec<usize> = (config.photons_min..=config.photons_max).collect();
    let mut table =
        ResultTable::new(&["delta_gamma", "n_photons", "mean_clicks", "stderr"]);
    for (sweep_idx, &dg) in config.delta_gamma.iter().enumerate() {
        let curve = response_curve(
            config.n_emitters,
            dg,
            &photons,
            config.trajectories,
            seed.wrapping_add((sweep_idx as u64) << 40),
        )?;
        for point in curve.points {
            table.push_row(vec![
                num(dg),
                point.n_photons.to_string(),
                num(point.mean_clicks),
                num(point.stderr),
            ]);
        }
    }
    Ok(table)
}

fn run_compare(config: &ExperimentConfig) -> Result<ResultTable> {
    let seed = config.seed.expect("validated");
    let n = config.n_emitters;
    let photons: Vec<usize> = (config.photons_min..=config.photons_max).collect();
    let mut table = ResultTable::new(&["n_photons", "scheme", "mean_clicks", "stderr"]);
    // balanced beamsplitter tree: uniform routing over n+1 detectors
    let balanced = routing_probs(&SplitterConfig::balanced(n));
    for &n_photons in &photons {
        let clicks = avg_clicks(&balanced, n_photons)?;
        table.push_row(vec![
            n_photons.to_string(),
            "balanced-tree".into(),
            num(clicks),
            num(0.0),
        ]);
    }
    for &n_photons in &photons {
        let (_, clicks) = optimize_equal_reflectivity(n, n_photons)?;
        table.push_row(vec![
            n_photons.to_string(),
            "equal-reflectivity".into(),
            num(clicks),
            num(0.0),
        ]);
    }
    for (sweep_idx, &dg) in config.delta_gamma.iter().enumerate() {
        let curve = response_curve(
            n,
            dg,
            &photons,
            config.trajectories,
            seed.wrapping_add((sweep_idx as u64) << 40),
        )?;
        for point in curve.points {
            table.push_row(vec![
                point.n_photons.to_string(),
                format!("subtractors-dg{dg}"),
                num(point.mean_clicks),
                num(point.stderr),
            ]);
        }
    }
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::parse_config;

    #[test]
    fn linear_table_reproduces_model() {
        let cfg = parse_config(
            "experiment = linear\ndelta_gamma = 0.5, 1\nemitters = 4\n\
             photons.min = 2\nphotons.max = 3\n",
        )
        .unwrap();
        let table = run(&cfg).unwrap();
        assert_eq!(table.columns, vec!["delta_gamma", "n_photons", "avg_error"]);
        assert_eq!(table.rows.len(), 4);
        let want = avg_error(2, &LinearConfig::new(0.5, 4).unwrap()).unwrap();
        assert_eq!(table.rows[0][2], num(want));
    }

    #[test]
    fn invalid_config_is_rejected() {
        let cfg = parse_config("experiment = trajectory\ndelta_gamma = 1\n").unwrap();
        assert!(matches!(run(&cfg), Err(Error::Config(_))));
    }

    #[test]
    fn trajectory_table_is_deterministic() {
        let cfg = parse_config(
            "experiment = trajectory\ndelta_gamma = 1\npulse.photons = 2\n\
             trajectories = 60\nseed = 9\n",
        )
        .unwrap();
        let a = run(&cfg).unwrap().to_csv_string();
        let b = run(&cfg).unwrap().to_csv_string();
        assert_eq!(a, b);
        assert!(a.contains("# config_fnv1a"));
    }

    #[test]
    fn compare_lists_all_schemes() {
        let cfg = parse_config(
            "experiment = compare\ndelta_gamma = 1\nemitters = 1\n\
             photons.min = 1\nphotons.max = 2\ntrajectories = 40\nseed = 3\n",
        )
        .unwrap();
        let table = run(&cfg).unwrap();
        let schemes: std::collections::BTreeSet<&str> =
            table.rows.iter().map(|r| r[1].as_str()).collect();
        assert!(schemes.contains("balanced-tree"));
        assert!(schemes.contains("equal-reflectivity"));
        assert!(schemes.contains("subtractors-dg1"));
    }
}
