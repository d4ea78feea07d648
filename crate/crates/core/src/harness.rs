//! Experiment configuration, the six experiment drivers behind the command
//! line, and report emission.
//!
//! A report is `{config, version, timestamp, trials, summary}`. Everything
//! except `timestamp` is a pure function of the config, whatever the number
//! of worker threads.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::deg4::{assemble_z, certify_psd, verify_constraints, CertifyMethod, ConstraintReport, Verdict};
use crate::diagnostics::{iid_comparison, scaling_sweep, write_sweep_csv, DiagnosticsOptions, SweepGrid};
use crate::ensembles::{haar_moment_suite, sample_goe, sample_haar_stiefel, RngStream};
use crate::error::{Error, Result};
use crate::etf::{check_etf, etf_deg4_extension, etf_extension_spectral, harmonic_untf, simplex_etf};
use crate::linalg::{sym_eigenvalues, EigMethod};
use crate::tensor::{build_deg2k_model, default_sigmas, summarize, ColumnScaling, TensorSummary};
use crate::witness::{montanari_sen_witness, nudged_witness, objective_value, rank_for, spectral_certificate};

pub const VERSION: &str = concat!("sksos ", env!("CARGO_PKG_VERSION"));
/// Environment variable capping the worker pool.
pub const THREADS_ENV: &str = "SKSOS_THREADS";

/// Exit status for a run whose asserted checks failed.
pub const EXIT_CHECK_FAILED: i32 = 2;
/// Exit status for configuration or runtime errors.
pub const EXIT_ERROR: i32 = 1;

const HAAR_Z_LIMIT: f64 = 4.0;
const TENSOR_TOL: f64 = 1e-9;
const ETF_PSD_TOL: f64 = 1e-9;
const ETF_AGREE_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Subcommand {
    Certify,
    Sweep,
    HaarTest,
    Etf,
    Tensor,
    CompareIid,
}

impl Subcommand {
    pub fn name(self) -> &'static str {
        match self {
            Subcommand::Certify => "certify",
            Subcommand::Sweep => "sweep",
            Subcommand::HaarTest => "haar-test",
            Subcommand::Etf => "etf",
            Subcommand::Tensor => "tensor",
            Subcommand::CompareIid => "compare-iid",
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Json,
    Csv,
}

impl std::str::FromStr for Format {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            _ => Err(Error::Parse(format!("unknown format '{s}' (json|csv)"))),
        }
    }
}

/// Frame family for the tensor experiment.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TensorFrame {
    /// Witness frame: `r = round(delta N)` rows of a Haar Stiefel matrix.
    #[default]
    Haar,
    /// Harmonic unit norm tight frame of `N` vectors in `R^r`.
    Untf,
    /// Regular simplex, `N = r + 1`.
    Simplex,
}

impl std::str::FromStr for TensorFrame {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "haar" => Ok(TensorFrame::Haar),
            "untf" => Ok(TensorFrame::Untf),
            "simplex" => Ok(TensorFrame::Simplex),
            _ => Err(Error::Parse(format!("unknown frame '{s}' (haar|untf|simplex)"))),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub subcommand: Subcommand,
    #[serde(rename = "N")]
    pub n: usize,
    pub delta: f64,
    pub alpha: f64,
    pub trials: usize,
    pub master_seed: u64,
    pub tol_psd: f64,
    pub tol_constraints: f64,
    pub method: EigMethod,
    pub output_path: Option<PathBuf>,
    pub format: Format,
    /// Sweep grid.
    pub ns: Vec<usize>,
    pub deltas: Vec<f64>,
    pub alphas: Vec<f64>,
    /// Haar moment samples.
    pub samples: usize,
    /// Simplex dimension for the ETF experiment.
    pub simplex_r: usize,
    /// Tensor order.
    pub k: usize,
    /// Tensor frame dimension; resolved from `N` and `delta` when absent.
    pub r: Option<usize>,
    pub frame: TensorFrame,
    pub scaling: ColumnScaling,
}

impl ExperimentConfig {
    pub fn new(subcommand: Subcommand) -> Self {
        Self {
            subcommand,
            n: 100,
            delta: 0.5,
            alpha: 0.2,
            trials: 1,
            master_seed: 0,
            tol_psd: 1e-8,
            tol_constraints: 1e-10,
            method: EigMethod::Auto,
            output_path: None,
            format: Format::Json,
            ns: vec![40, 80, 120],
            deltas: vec![0.5],
            alphas: vec![0.2],
            samples: 100_000,
            simplex_r: 3,
            k: 2,
            r: None,
            frame: TensorFrame::Haar,
            scaling: ColumnScaling::Unit,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidParameter(msg));
        let open_unit = |x: f64| x > 0.0 && x < 1.0;
        if self.n < 2 {
            return bad(format!("--n must be at least 2, got {}", self.n));
        }
        if !open_unit(self.delta) {
            return bad(format!("--delta must lie in (0, 1), got {}", self.delta));
        }
        if !open_unit(self.alpha) {
            return bad(format!("--alpha must lie in (0, 1), got {}", self.alpha));
        }
        if self.trials == 0 {
            return bad("--trials must be at least 1".into());
        }
        if !(self.tol_psd >= 0.0 && self.tol_constraints >= 0.0) {
            return bad("tolerances must be non-negative".into());
        }
        if self.format == Format::Csv && self.subcommand != Subcommand::Sweep {
            return bad("--format csv is only available for sweep".into());
        }
        match self.subcommand {
            Subcommand::Sweep => {
                if self.ns.is_empty() || self.deltas.is_empty() || self.alphas.is_empty() {
                    return bad("sweep grid lists must be non-empty".into());
                }
                if let Some(n) = self.ns.iter().find(|&&n| n < 2) {
                    return bad(format!("sweep N values must be at least 2, got {n}"));
                }
                if let Some(d) = self.deltas.iter().find(|&&d| !open_unit(d)) {
                    return bad(format!("sweep delta values must lie in (0, 1), got {d}"));
                }
                if let Some(a) = self.alphas.iter().find(|&&a| !open_unit(a)) {
                    return bad(format!("sweep alpha values must lie in (0, 1), got {a}"));
                }
            }
            Subcommand::HaarTest if self.samples < 10_000 => {
                return bad(format!("--samples must be at least 10000, got {}", self.samples));
            }
            Subcommand::Etf if self.simplex_r < 1 => {
                return bad("--simplex-r must be at least 1".into());
            }
            Subcommand::Tensor => {
                if !(1..=3).contains(&self.k) {
                    return bad(format!("--k must be 1, 2 or 3, got {}", self.k));
                }
                if self.r == Some(0) {
                    return bad("--r must be at least 1".into());
                }
            }
            _ => {}
        }
        Ok(())
    }

    /// Fills derived fields so the embedded config fully determines the run.
    pub fn resolved(&self) -> Result<Self> {
        let mut c = self.clone();
        if c.subcommand == Subcommand::Tensor {
            let r = match c.r {
                Some(r) => r,
                None => rank_for(c.n, c.delta)?,
            };
            c.r = Some(r);
            match c.frame {
                TensorFrame::Simplex => c.n = r + 1,
                _ if r >= c.n => {
                    return Err(Error::InvalidParameter(format!(
                        "tensor frame needs r < N, got r={r}, N={}",
                        c.n
                    )))
                }
                _ => {}
            }
        }
        Ok(c)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub config: ExperimentConfig,
    pub version: String,
    /// Seconds since the unix epoch; not part of the deterministic content.
    pub timestamp: u64,
    pub trials: Vec<Value>,
    pub summary: Value,
}

impl Report {
    pub fn to_json(&self) -> Result<String> {
        serde_json::to_string_pretty(self).map_err(|e| Error::Io(e.to_string()))
    }

    /// JSON with the timestamp zeroed, for determinism comparisons.
    pub fn canonical_json(&self) -> Result<String> {
        Report {
            timestamp: 0,
            ..self.clone()
        }
        .to_json()
    }
}

/// A finished run: the report, the sweep table in CSV form when requested,
/// and the exit status (0 or [`EXIT_CHECK_FAILED`]).
#[derive(Clone, Debug)]
pub struct Outcome {
    pub report: Report,
    pub csv: Option<String>,
    pub exit_code: i32,
}

fn now() -> u64 {
    std::time::SystemTime::now()
        .duration_since(std::time::UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

fn to_value<T: Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("report records serialize")
}

/// Worker count from [`THREADS_ENV`], if set.
pub fn threads_from_env() -> Result<Option<usize>> {
    match std::env::var(THREADS_ENV) {
        Ok(s) => match s.trim().parse::<usize>() {
            Ok(0) | Err(_) => Err(Error::InvalidParameter(format!(
                "{THREADS_ENV} must be a positive integer, got '{s}'"
            ))),
            Ok(n) => Ok(Some(n)),
        },
        Err(_) => Ok(None),
    }
}

/// Runs the experiment on a dedicated pool of `threads` workers, or on the
/// global pool when `None`.
pub fn run_with_threads(config: &ExperimentConfig, threads: Option<usize>) -> Result<Outcome> {
    match threads {
        Some(t) => rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?
            .install(|| run(config)),
        None => run(config),
    }
}

pub fn run(config: &ExperimentConfig) -> Result<Outcome> {
    config.validate()?;
    let config = config.resolved()?;
    let (trials, summary, csv, ok) = match config.subcommand {
        Subcommand::Certify => run_certify(&config)?,
        Subcommand::Sweep => run_sweep(&config)?,
        Subcommand::HaarTest => run_haar(&config)?,
        Subcommand::Etf => run_etf(&config)?,
        Subcommand::Tensor => run_tensor(&config)?,
        Subcommand::CompareIid => run_iid(&config)?,
    };
    Ok(Outcome {
        report: Report {
            config,
            version: VERSION.to_string(),
            timestamp: now(),
            trials,
            summary,
        },
        csv,
        exit_code: if ok { 0 } else { EXIT_CHECK_FAILED },
    })
}

/// Writes `<subcommand>.json` (and `<subcommand>.csv` for a CSV sweep)
/// under `dir`; returns the paths written.
pub fn write_outputs(outcome: &Outcome, dir: &Path) -> Result<Vec<PathBuf>> {
    std::fs::create_dir_all(dir)?;
    let stem = outcome.report.config.subcommand.name();
    let json_path = dir.join(format!("{stem}.json"));
    std::fs::write(&json_path, outcome.report.to_json()?)?;
    let mut out = vec![json_path];
    if let Some(csv) = &outcome.csv {
        let p = dir.join(format!("{stem}.csv"));
        std::fs::write(&p, csv)?;
        out.push(p);
    }
    Ok(out)
}

type Parts = (Vec<Value>, Value, Option<String>, bool);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CertifyTrial {
    pub trial: usize,
    pub master_seed: u64,
    pub verdict: Option<Verdict>,
    pub lambda_min: f64,
    pub norm_estimate: f64,
    pub threshold: f64,
    pub constraints: Option<ConstraintReport>,
    /// `<W, M>/N` for the un-nudged witness.
    pub objective: f64,
    /// `<W, (1 - alpha) M + alpha I>/N`.
    pub nudged_objective: f64,
    pub spectral_certificate: f64,
    pub error: String,
}

/// One `certify` trial: witness from GOE stream `trial`, assemble `Z`,
/// verify constraints and certify PSD on the full matrix.
pub fn certify_trial(config: &ExperimentConfig, trial: usize) -> CertifyTrial {
    let mut rec = CertifyTrial {
        trial,
        master_seed: config.master_seed,
        verdict: None,
        lambda_min: f64::NAN,
        norm_estimate: f64::NAN,
        threshold: f64::NAN,
        constraints: None,
        objective: f64::NAN,
        nudged_objective: f64::NAN,
        spectral_certificate: f64::NAN,
        error: String::new(),
    };
    let res = (|| -> Result<()> {
        let w = sample_goe(config.n, &mut RngStream::new(config.master_seed, trial as u64).rng());
        rec.spectral_certificate = spectral_certificate(&w)?;
        let bundle = montanari_sen_witness(&w, config.delta)?;
        rec.objective = objective_value(&bundle.m, &w)?;
        rec.nudged_objective = objective_value(&nudged_witness(&bundle.m, config.alpha)?, &w)?;
        let z = assemble_z(&bundle.m, config.alpha)?;
        rec.constraints = Some(verify_constraints(&z, config.tol_constraints));
        let cert = certify_psd(&z, config.tol_psd, CertifyMethod::Full, config.method)?;
        rec.verdict = Some(cert.verdict);
        rec.lambda_min = cert.lambda_min;
        rec.norm_estimate = cert.norm_estimate;
        rec.threshold = cert.threshold;
        Ok(())
    })();
    if let Err(e) = res {
        rec.error = e.to_string();
    }
    rec
}

fn mean(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 {
        f64::NAN
    } else {
        s / c as f64
    }
}

fn run_certify(config: &ExperimentConfig) -> Result<Parts> {
    let recs: Vec<CertifyTrial> = (0..config.trials)
        .into_par_iter()
        .map(|t| certify_trial(config, t))
        .collect();
    let count = |v: Verdict| recs.iter().filter(|r| r.verdict == Some(v)).count();
    let passed = count(Verdict::Pass);
    let constraint_failures = recs
        .iter()
        .filter(|r| r.constraints.as_ref().is_some_and(|c| !c.pass))
        .count();
    let errors = recs.iter().filter(|r| !r.error.is_empty()).count();
    let summary = json!({
        "passed": passed,
        "failed": count(Verdict::Fail),
        "inconclusive": count(Verdict::Inconclusive),
        "errors": errors,
        "constraint_failures": constraint_failures,
        "min_lambda_min": recs.iter().map(|r| r.lambda_min).filter(|x| x.is_finite()).fold(f64::INFINITY, f64::min),
        "mean_objective": mean(recs.iter().map(|r| r.objective)),
        "mean_nudged_objective": mean(recs.iter().map(|r| r.nudged_objective)),
        "mean_spectral_certificate": mean(recs.iter().map(|r| r.spectral_certificate)),
    });
    let ok = passed == recs.len() && constraint_failures == 0;
    Ok((recs.iter().map(to_value).collect(), summary, None, ok))
}

fn run_sweep(config: &ExperimentConfig) -> Result<Parts> {
    let grid = SweepGrid {
        ns: config.ns.clone(),
        deltas: config.deltas.clone(),
        alphas: config.alphas.clone(),
        trials: config.trials,
    };
    let opts = DiagnosticsOptions {
        z1a_method: Some(config.method),
    };
    let table = scaling_sweep(&grid, config.master_seed, &opts)?;
    let csv = if config.format == Format::Csv {
        let mut buf = Vec::new();
        write_sweep_csv(&table.rows, &mut buf)?;
        Some(String::from_utf8(buf).map_err(|e| Error::Io(e.to_string()))?)
    } else {
        None
    };
    let errors = table.rows.iter().filter(|r| !r.report.error.is_empty()).count();
    let ok = errors == 0 && table.monotone.iter().all(|m| m.delta_op_norm && m.z1a_negativity);
    let summary = json!({
        "errors": errors,
        "cells": table.cells,
        "monotone": table.monotone,
    });
    Ok((table.rows.iter().map(to_value).collect(), summary, csv, ok))
}

fn run_haar(config: &ExperimentConfig) -> Result<Parts> {
    let mut rng = RngStream::new(config.master_seed, 0).rng();
    let rep = haar_moment_suite(config.n, config.samples, &mut rng)?;
    let max_z = rep.max_abs_z();
    let summary = json!({
        "n": rep.n,
        "samples": rep.samples,
        "max_abs_z": max_z,
        "z_limit": HAAR_Z_LIMIT,
    });
    Ok((
        rep.moments.iter().map(to_value).collect(),
        summary,
        None,
        max_z <= HAAR_Z_LIMIT,
    ))
}

fn run_etf(config: &ExperimentConfig) -> Result<Parts> {
    let r = config.simplex_r;
    let f = simplex_etf(r)?;
    let verdict = check_etf(&f, 1e-9);
    let mut main = json!({ "r": r, "N": f.n(), "frame": verdict });
    let mut ok = true;
    match etf_deg4_extension(&f) {
        Ok(z) => {
            let spectral = etf_extension_spectral(&f)?;
            let agree = z.to_full().max_abs_diff(&spectral.to_full());
            let cons = verify_constraints(&z, config.tol_constraints);
            let lam = *sym_eigenvalues(&z.to_full())?.last().unwrap();
            ok &= agree <= ETF_AGREE_TOL && cons.pass && lam >= -ETF_PSD_TOL;
            main["spectral_agreement"] = json!(agree);
            main["constraints"] = to_value(&cons);
            main["lambda_min"] = json!(lam);
        }
        Err(e) => {
            ok = false;
            main["error"] = json!(e.to_string());
        }
    }
    // r = 2 has N = 3 > r(r-1)/2 = 1 and must be refused.
    let demo = match etf_deg4_extension(&simplex_etf(2)?) {
        Err(e @ Error::InfeasibleDimension { .. }) => {
            json!({ "r": 2, "expected_error": true, "error": e.to_string() })
        }
        Err(e) => {
            ok = false;
            json!({ "r": 2, "expected_error": false, "error": e.to_string() })
        }
        Ok(_) => {
            ok = false;
            json!({ "r": 2, "expected_error": false, "error": "" })
        }
    };
    let summary = json!({ "pass": ok });
    Ok((vec![main, demo], summary, None, ok))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TensorTrial {
    pub trial: usize,
    pub sigmas: Vec<f64>,
    pub summary: Option<TensorSummary>,
    pub error: String,
}

fn tensor_trial(config: &ExperimentConfig, trial: usize) -> TensorTrial {
    let r = config.r.expect("resolved config");
    let mut rec = TensorTrial {
        trial,
        sigmas: Vec::new(),
        summary: None,
        error: String::new(),
    };
    let res = (|| -> Result<()> {
        let v = match config.frame {
            TensorFrame::Haar => {
                let mut rng = RngStream::new(config.master_seed, trial as u64).rng();
                sample_haar_stiefel(config.n, r, &mut rng)?
            }
            TensorFrame::Untf => harmonic_untf(r, config.n)?.vectors,
            TensorFrame::Simplex => simplex_etf(r)?.vectors,
        };
        let v = if config.frame == TensorFrame::Haar {
            v
        } else {
            let s = (r as f64 / v.ncols() as f64).sqrt();
            faer::Mat::from_fn(r, v.ncols(), |i, j| s * v[(i, j)])
        };
        rec.sigmas = default_sigmas(v.as_ref(), config.k, config.scaling)?;
        let dm = build_deg2k_model(v.as_ref(), config.k, &rec.sigmas, config.scaling)?;
        rec.summary = Some(summarize(&dm)?);
        Ok(())
    })();
    if let Err(e) = res {
        rec.error = e.to_string();
    }
    rec
}

fn run_tensor(config: &ExperimentConfig) -> Result<Parts> {
    let recs: Vec<TensorTrial> = (0..config.trials)
        .into_par_iter()
        .map(|t| tensor_trial(config, t))
        .collect();
    let sums: Vec<&TensorSummary> = recs.iter().filter_map(|r| r.summary.as_ref()).collect();
    let errors = recs.len() - sums.len();
    let ok = errors == 0
        && sums.iter().all(|s| {
            s.constraint_residual <= TENSOR_TOL && s.cov_lambda_min >= -TENSOR_TOL && s.z_lambda_min >= -TENSOR_TOL
        });
    let summary = json!({
        "errors": errors,
        "max_constraint_residual": sums.iter().map(|s| s.constraint_residual).fold(0.0, f64::max),
        "min_z_lambda_min": sums.iter().map(|s| s.z_lambda_min).fold(f64::INFINITY, f64::min),
        "mean_diag_max_dev": mean(sums.iter().map(|s| s.diag_max_dev)),
        "mean_step1_max": mean(sums.iter().filter_map(|s| s.step1_gap.map(|g| g.max))),
        "mean_step1_rms": mean(sums.iter().filter_map(|s| s.step1_gap.map(|g| g.rms))),
    });
    Ok((recs.iter().map(to_value).collect(), summary, None, ok))
}

fn run_iid(config: &ExperimentConfig) -> Result<Parts> {
    let r = rank_for(config.n, config.delta)?;
    let cmp = iid_comparison(r, config.n, config.trials, RngStream::new(config.master_seed, 0))?;
    let ok = cmp.ratio > 1.0;
    Ok((vec![to_value(&cmp)], to_value(&cmp), None, ok))
}
