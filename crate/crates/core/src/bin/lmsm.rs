use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use lmsm::estimator::{estimate_h_function, estimate_hmin, theta_schedule, EstimatorConfig, Schedule};
use lmsm::harness::{run_config_file, verify, Suite};
use lmsm::io::{read_path_csv, write_hestimate, write_path};
use lmsm::{Error, HurstFamily, HurstSpec, IntervalSpec, SimConfig};

#[derive(Parser)]
#[command(name = "lmsm", version, about = "Simulate linear multifractional stable motion and estimate its Hurst function")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum ScheduleArg {
    Power,
    Log,
}

#[derive(Subcommand)]
enum Command {
    /// Simulate a path and write it as `t,y` CSV with a JSON sidecar.
    Simulate {
        #[arg(long, default_value_t = 1.5)]
        alpha: f64,
        /// A constant Hurst value, or a JSON object such as
        /// '{"family":"sinusoidal","mean":0.75,"amplitude":0.05,"frequency":1}'.
        #[arg(long)]
        hurst: String,
        /// Path resolution: samples at k/n, k = 0..=n.
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 16)]
        substeps: usize,
        #[arg(long)]
        trunc: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate min H on an interval, or the whole Hurst function, from a path CSV.
    Estimate {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0.25)]
        beta: f64,
        #[arg(long, default_value_t = 2)]
        filter_order: usize,
        /// Local estimate on `lo:hi` instead of the global estimator.
        #[arg(long, value_parser = parse_interval)]
        interval: Option<IntervalSpec>,
        #[arg(long, conflicts_with = "schedule")]
        theta: Option<f64>,
        #[arg(long, value_enum)]
        schedule: Option<ScheduleArg>,
        /// Exponent ζ of the power schedule.
        #[arg(long)]
        zeta: Option<f64>,
        /// Moment order p of the power schedule.
        #[arg(long, default_value_t = 1.0)]
        p: f64,
        /// Hölder order of H, if known (sets the default ζ).
        #[arg(long)]
        rho_h: Option<f64>,
        /// Only require N ≥ (L+1)/λ(I) instead of the full interval-length condition.
        #[arg(long)]
        relaxed: bool,
        /// Output CSV for the global estimate (`t,h`); a JSON record is written beside it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run an experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        jobs: Option<usize>,
        /// Override the config's output directory.
        #[arg(long)]
        outputs: Option<PathBuf>,
    },
    /// Run a verification suite (algebra, kernel, oracle, simulation, or all).
    Verify {
        #[arg(long, default_value = "all")]
        suite: String,
    },
}

fn parse_interval(s: &str) -> Result<IntervalSpec, String> {
    let (lo, hi) = s.split_once(':').ok_or("expected lo:hi")?;
    let lo: f64 = lo.trim().parse().map_err(|e| format!("{e}"))?;
    let hi: f64 = hi.trim().parse().map_err(|e| format!("{e}"))?;
    IntervalSpec::new(lo, hi).map_err(|e| e.to_string())
}

fn parse_hurst(s: &str) -> lmsm::Result<HurstSpec> {
    if let Ok(h) = s.trim().parse::<f64>() {
        return HurstSpec::constant(h);
    }
    let family: HurstFamily = serde_json::from_str(s).map_err(|e| Error::Config { field: "hurst".into(), detail: e.to_string() })?;
    HurstSpec::new(family)
}

fn run(cli: Cli) -> lmsm::Result<ExitCode> {
    match cli.command {
        Command::Simulate { alpha, hurst, n, substeps, trunc, seed, out } => {
            let h = parse_hurst(&hurst)?;
            let mut cfg = SimConfig::new(alpha, n, substeps)?;
            if let Some(t) = trunc {
                cfg = cfg.with_trunc(t)?;
            }
            let path = lmsm::simulate_path(&h, &cfg, seed)?;
            write_path(&out, &path)?;
            eprintln!("wrote {} samples to {}", path.values.len(), out.display());
        }
        Command::Estimate { input, beta, filter_order, interval, theta, schedule, zeta, p, rho_h, relaxed, out } => {
            let path = read_path_csv(&input)?;
            let mut cfg = EstimatorConfig::new(beta, filter_order)?;
            if relaxed {
                cfg = cfg.relaxed();
            }
            if let Some(s) = schedule {
                cfg = cfg.with_schedule(match s {
                    ScheduleArg::Power => Schedule::Power { zeta, p },
                    ScheduleArg::Log => Schedule::Log,
                })?;
            }
            if let Some(iv) = interval {
                println!("{}", estimate_hmin(&path, &iv, &cfg)?);
                return Ok(ExitCode::SUCCESS);
            }
            let theta = match theta {
                Some(t) => t,
                None => theta_schedule(path.n / 2, &cfg, rho_h)?,
            };
            let est = estimate_h_function(&path, &cfg, theta)?;
            match out {
                Some(file) => write_hestimate(&file, &est)?,
                None => print!("{}", String::from_utf8_lossy(&lmsm::io::hestimate_csv(&est)?)),
            }
        }
        Command::Experiment { config, jobs, outputs } => {
            let (cfg, report) = run_config_file(&config, jobs, outputs.as_deref())?;
            for a in &report.aggregates {
                println!("N={} mean_error={} bound={} excluded={}", a.n, a.mean_error, a.bound, a.excluded);
            }
            eprintln!("outputs in {}", cfg.outputs.display());
        }
        Command::Verify { suite } => {
            let suites = if suite == "all" { Suite::ALL.to_vec() } else { vec![Suite::parse(&suite)?] };
            let mut ok = true;
            for s in suites {
                let report = verify(s);
                print!("{}", report.render());
                ok &= report.passed();
            }
            return Ok(if ok { ExitCode::SUCCESS } else { ExitCode::from(1) });
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config { .. } | Error::Domain { .. } | Error::Parse(_) => ExitCode::from(2),
                _ => ExitCode::from(3),
            }
        }
    }
}
