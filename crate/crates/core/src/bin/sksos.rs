use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand as ClapSub};
use sksos::harness::{
    run_with_threads, threads_from_env, write_outputs, ExperimentConfig, Format, Subcommand, TensorFrame, EXIT_ERROR,
};
use sksos::linalg::EigMethod;
use sksos::tensor::ColumnScaling;

#[derive(Parser)]
#[command(
    name = "sksos",
    version,
    about = "Degree-4 SOS pseudomoment experiments for the SK problem"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args)]
struct Common {
    #[arg(long, default_value_t = 100)]
    n: usize,
    #[arg(long, default_value_t = 0.5)]
    delta: f64,
    #[arg(long, default_value_t = 0.2)]
    alpha: f64,
    #[arg(long, default_value_t = 1)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    tol_psd: f64,
    #[arg(long, default_value_t = 1e-10)]
    tol_constraints: f64,
    /// dense | iterative | auto
    #[arg(long, default_value = "auto")]
    method: EigMethod,
    /// Directory for <subcommand>.json / .csv; JSON goes to stdout otherwise.
    #[arg(long)]
    output: Option<PathBuf>,
    /// json | csv (csv only for sweep)
    #[arg(long, default_value = "json")]
    format: Format,
}

#[derive(ClapSub)]
enum Cmd {
    /// Build witnesses, assemble Z, verify constraints, certify PSD.
    Certify(Common),
    /// Diagnostics over a grid of (N, delta, alpha).
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_delimiter = ',', default_value = "40,80,120")]
        ns: Vec<usize>,
        #[arg(long, value_delimiter = ',', default_value = "0.5")]
        deltas: Vec<f64>,
        #[arg(long, value_delimiter = ',', default_value = "0.2")]
        alphas: Vec<f64>,
    },
    /// Monte Carlo check of the Haar degree-2 and degree-4 moments.
    HaarTest {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 100_000)]
        samples: usize,
    },
    /// Closed-form degree-4 extension of a simplex ETF.
    Etf {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 3)]
        simplex_r: usize,
    },
    /// Conditioned gaussian tensor pseudomoments.
    Tensor {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 2)]
        k: usize,
        #[arg(long)]
        r: Option<usize>,
        /// haar | untf | simplex
        #[arg(long, default_value = "haar")]
        frame: TensorFrame,
        /// raw | unit
        #[arg(long, default_value = "unit")]
        scaling: ColumnScaling,
    },
    /// Normalized Haar frame versus iid unit vectors.
    CompareIid(Common),
}

fn base(sub: Subcommand, c: Common) -> ExperimentConfig {
    ExperimentConfig {
        n: c.n,
        delta: c.delta,
        alpha: c.alpha,
        trials: c.trials,
        master_seed: c.seed,
        tol_psd: c.tol_psd,
        tol_constraints: c.tol_constraints,
        method: c.method,
        output_path: c.output,
        format: c.format,
        ..ExperimentConfig::new(sub)
    }
}

fn config_from(cmd: Cmd) -> ExperimentConfig {
    match cmd {
        Cmd::Certify(c) => base(Subcommand::Certify, c),
        Cmd::Sweep {
            common,
            ns,
            deltas,
            alphas,
        } => ExperimentConfig {
            ns,
            deltas,
            alphas,
            ..base(Subcommand::Sweep, common)
        },
        Cmd::HaarTest { common, samples } => ExperimentConfig {
            samples,
            ..base(Subcommand::HaarTest, common)
        },
        Cmd::Etf { common, simplex_r } => ExperimentConfig {
            simplex_r,
            ..base(Subcommand::Etf, common)
        },
        Cmd::Tensor {
            common,
            k,
            r,
            frame,
            scaling,
        } => ExperimentConfig {
            k,
            r,
            frame,
            scaling,
            ..base(Subcommand::Tensor, common)
        },
        Cmd::CompareIid(c) => base(Subcommand::CompareIid, c),
    }
}

fn main() -> ExitCode {
    let config = config_from(Cli::parse().cmd);
    let result = threads_from_env()
        .and_then(|t| run_with_threads(&config, t))
        .and_then(|out| {
            match &config.output_path {
                Some(dir) => {
                    for p in write_outputs(&out, dir)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => println!("{}", out.report.to_json()?),
            }
            Ok(out.exit_code)
        });
    match result {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_ERROR as u8)
        }
    }
}
