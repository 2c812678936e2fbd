use std::io::Write;
use std::process::ExitCode;

use pnr_cli::config::{parse_config, validate, Experiment};
use pnr_cli::runner::run;

const USAGE: &str = "\
pnr - photon-number-resolving detector simulator

Usage: pnr <experiment> --config <path> [options]
       pnr validate --config <path>

Experiments: linear, outcomes, correlate, trajectory, response, compare

Options:
  --config <path>        configuration file (required)
  --out <path>           output CSV (default from config, else <experiment>.csv)
  --seed <u64>           override the configured random seed
  --trajectories <M>     override the configured ensemble size
  --threads <k>          worker threads for trajectory ensembles
                         (PNR_THREADS overrides the config; --threads wins)
  -h, --help             show this message
";

struct CliArgs {
    command: String,
    config_path: Option<String>,
    out: Option<String>,
    seed: Option<u64>,
    trajectories: Option<usize>,
    threads: Option<usize>,
}

fn parse_args(args: &[String]) -> Result<CliArgs, String> {
    if args.is_empty() {
        return Err("missing experiment".into());
    }
    let command = args[0].clone();
    let mut out = CliArgs {
        command,
        config_path: None,
        out: None,
        seed: None,
        trajectories: None,
        threads: None,
    };
    let mut i = 1;
    while i < args.len() {
        let flag = args[i].as_str();
        let mut value = || -> Result<String, String> {
            i += 1;
            args.get(i)
                .cloned()
                .ok_or_else(|| format!("flag {flag} needs a value"))
        };
        match flag {
            "--config" => out.config_path = Some(value()?),
            "--out" => out.out = Some(value()?),
            "--seed" => {
                out.seed =
                    Some(value()?.parse().map_err(|_| "--seed expects an unsigned integer")?)
            }
            "--trajectories" => {
                out.trajectories =
                    Some(value()?.parse().map_err(|_| "--trajectories expects an integer")?)
            }
            "--threads" => {
                out.threads = Some(value()?.parse().map_err(|_| "--threads expects an integer")?)
            }
            other => return Err(format!("unknown flag {other}")),
        }
        i += 1;
    }
    Ok(out)
}

fn main() -> ExitCode {
    let raw: Vec<String> = std::env::args().skip(1).collect();
    if raw.is_empty() || raw.iter().any(|a| a == "-h" || a == "--help") {
        print!("{USAGE}");
        return ExitCode::SUCCESS;
    }
    let args = match parse_args(&raw) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            eprint!("{USAGE}");
            return ExitCode::from(2);
        }
    };
    let config_path = match &args.config_path {
        Some(p) => p.clone(),
        None => {
            eprintln!("error: --config is required");
            return ExitCode::from(2);
        }
    };
    let text = match std::fs::read_to_string(&config_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {config_path}: {e}");
            return ExitCode::from(2);
        }
    };
    let mut config = match parse_config(&text) {
        Ok(c) => c,
        Err(diags) => {
            for d in &diags {
                eprintln!("{config_path}: {d}");
            }
            return ExitCode::from(2);
        }
    };

    // subcommand must agree with the configured experiment, if both given
    if args.command != "validate" {
        match Experiment::parse(&args.command) {
            Some(e) => {
                if e != config.experiment {
                    eprintln!(
                        "error: subcommand {} conflicts with configured experiment {}",
                        args.command,
                        config.experiment.name()
                    );
                    return ExitCode::from(2);
                }
            }
            None => {
                eprintln!("error: unknown experiment {}", args.command);
                eprint!("{USAGE}");
                return ExitCode::from(2);
            }
        }
    }

    if let Some(seed) = args.seed {
        config.seed = Some(seed);
    }
    if let Some(m) = args.trajectories {
        config.trajectories = m;
    }

    if args.command == "validate" {
        let diags = validate(&config);
        if diags.is_empty() {
            println!("ok");
            return ExitCode::SUCCESS;
        }
        for d in &diags {
            println!("{d}");
        }
        return ExitCode::from(1);
    }

    // thread pool: --threads beats PNR_THREADS beats the config key
    let threads = args
        .threads
        .or_else(|| std::env::var("PNR_THREADS").ok().and_then(|v| v.parse().ok()))
        .or(config.threads);
    if let Some(k) = threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(k).build_global() {
            eprintln!("warning: thread pool already initialized: {e}");
        }
    }

    let table = match run(&config) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let out_path = args
        .out
        .or_else(|| config.output.clone())
        .unwrap_or_else(|| format!("{}.csv", config.experiment.name()));
    let file = match std::fs::File::create(&out_path) {
        Ok(f) => f,
        Err(e) => {
            eprintln!("error: cannot write {out_path}: {e}");
            return ExitCode::FAILURE;
        }
    };
    let mut writer = std::io::BufWriter::new(file);
    if let Err(e) = table.write(&mut writer).and_then(|_| writer.flush()) {
        eprintln!("error: writing {out_path}: {e}");
        return ExitCode::FAILURE;
    }
    println!("{out_path}: {} rows", table.rows.len());
    ExitCode::SUCCESS
}
