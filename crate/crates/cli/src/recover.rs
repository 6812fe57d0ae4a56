use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use schatten_core::linalg::write_matrix;
use schatten_core::recovery::{
    failure_witness, gaussian_operator, irls_solve_detailed, nullspace_condition_sample, phase_transition,
    property_e_sample, recovery_threshold_check, rip_estimate, rip_p_estimate, weakly_dominates, write_phase_csv,
    IrlsConfig, PhaseConfig, RecoveryInstance,
};
use schatten_core::{Result, SCHEMA_HEADER};
use serde::Serialize;

use crate::{open_output, write_json_line, Outcome, SEED_ENV};

#[derive(Debug, Args)]
pub struct RecoverArgs {
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Rank of the random ground truth.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Number of Gaussian measurements.
    #[arg(long, default_value_t = 25)]
    pub l: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Load a saved instance directory instead of drawing one.
    #[arg(long, conflicts_with_all = ["m", "n", "k", "l", "p"])]
    pub instance: Option<PathBuf>,
    /// Save the instance to this directory.
    #[arg(long)]
    pub save: Option<PathBuf>,
    #[arg(long, default_value_t = 1000)]
    pub max_iters: usize,
    /// Matrix file for the estimate.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Serialize)]
struct RecoverSummary {
    m: usize,
    n: usize,
    l: usize,
    p: f64,
    seed: u64,
    iterations: usize,
    residual: f64,
    relative_error: Option<f64>,
}

pub(crate) fn run_recover(args: RecoverArgs) -> Result<Outcome> {
    let instance = match &args.instance {
        Some(dir) => RecoveryInstance::load(dir)?,
        None => RecoveryInstance::gaussian(args.m, args.n, args.k, args.l, args.p, args.seed)?,
    };
    if let Some(dir) = &args.save {
        instance.save(dir)?;
    }
    let config = IrlsConfig {
        max_iters: args.max_iters,
        ..IrlsConfig::default()
    };
    let solution = irls_solve_detailed(&instance, &config)?;
    if let Some(path) = &args.out {
        write_matrix(path, &solution.x)?;
    }
    let (m, n) = instance.operator.input_shape();
    let summary = RecoverSummary {
        m,
        n,
        l: instance.operator.len(),
        p: instance.p,
        seed: instance.seed,
        iterations: solution.iterations,
        residual: solution.residual,
        relative_error: instance
            .ground_truth
            .as_ref()
            .map(|t| (&solution.x - t).frobenius_norm() / t.frobenius_norm()),
    };
    let mut out = open_output(None)?;
    writeln!(out, "{SCHEMA_HEADER}")?;
    write_json_line(&mut out, &summary)?;
    out.flush()?;
    Ok(Outcome::Completed)
}

#[derive(Debug, Args)]
pub struct NullspaceArgs {
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Number of Gaussian measurements.
    #[arg(long, default_value_t = 8)]
    pub l: usize,
    /// Order of the condition.
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    #[arg(long, default_value_t = 0.5)]
    pub p: f64,
    /// Sampled nullspace elements.
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Also sample the induced vector condition over this many (U, V) pairs.
    #[arg(long, default_value_t = 0)]
    pub property_e_pairs: usize,
    /// Nullspace vectors sampled per (U, V) pair.
    #[arg(long, default_value_t = 20)]
    pub vectors: usize,
    /// Directory for the violating element and its failure witness.
    #[arg(long)]
    pub witness_dir: Option<PathBuf>,
}

#[derive(Serialize)]
struct NullspaceSummary {
    m: usize,
    n: usize,
    l: usize,
    k: usize,
    p: f64,
    seed: u64,
    samples: usize,
    min_margin: Option<f64>,
    violated: bool,
    property_e_min_margin: Option<f64>,
}

pub(crate) fn run_nullspace(args: NullspaceArgs) -> Result<Outcome> {
    let op = gaussian_operator(args.m, args.n, args.l, args.seed)?;
    let sample = match nullspace_condition_sample(&op, args.p, args.k, args.trials, args.seed.wrapping_add(1)) {
        Ok(s) => Some(s),
        Err(schatten_core::LabError::EmptyNullspace) => None,
        Err(e) => return Err(e),
    };
    if let (Some(dir), Some(z)) = (&args.witness_dir, sample.as_ref().and_then(|s| s.witness.as_ref())) {
        let w = failure_witness(z, args.k, args.p)?;
        std::fs::create_dir_all(dir)?;
        write_matrix(dir.join("z.txt"), z)?;
        write_matrix(dir.join("xbar.txt"), &w.xbar)?;
        write_matrix(dir.join("xbar_prime.txt"), &w.xbar_prime)?;
    }
    let property_e_min_margin = if args.property_e_pairs > 0 {
        Some(
            property_e_sample(
                &op,
                args.p,
                args.k,
                args.property_e_pairs,
                args.vectors,
                args.seed.wrapping_add(2),
            )?
            .min_margin,
        )
    } else {
        None
    };
    let summary = NullspaceSummary {
        m: args.m,
        n: args.n,
        l: args.l,
        k: args.k,
        p: args.p,
        seed: args.seed,
        samples: sample.as_ref().map_or(0, |s| s.samples),
        min_margin: sample.as_ref().map(|s| s.min_margin),
        violated: sample.as_ref().is_some_and(|s| s.witness.is_some()),
        property_e_min_margin,
    };
    let mut out = open_output(None)?;
    writeln!(out, "{SCHEMA_HEADER}")?;
    write_json_line(&mut out, &summary)?;
    out.flush()?;
    Ok(Outcome::Completed)
}

#[derive(Debug, Args)]
pub struct PhaseArgs {
    #[arg(long, default_value_t = 8)]
    pub m: usize,
    #[arg(long, default_value_t = 8)]
    pub n: usize,
    #[arg(long, default_value_t = 1)]
    pub k: usize,
    /// Exponents, comma separated.
    #[arg(long = "p", value_delimiter = ',', default_value = "0.5,1.0")]
    pub p_list: Vec<f64>,
    /// Measurement counts, comma separated.
    #[arg(long = "l", value_delimiter = ',', default_value = "16,24,32,40,48")]
    pub l_list: Vec<usize>,
    #[arg(long, default_value_t = 25)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Relative Frobenius error counted as a success.
    #[arg(long, default_value_t = 1e-3)]
    pub success_tol: f64,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(crate) fn run_phase(args: PhaseArgs) -> Result<Outcome> {
    let mut config = PhaseConfig::new(args.m, args.n, args.k, args.p_list, args.l_list, args.trials, args.seed);
    config.success_tol = args.success_tol;
    config.jobs = args.jobs;
    let rows = phase_transition(&config)?;
    let mut out = open_output(args.out.as_deref())?;
    write_phase_csv(&mut out, &rows)?;
    out.flush()?;
    let ps = &config.p_list;
    for (i, &lo) in ps.iter().enumerate() {
        for &hi in &ps[i + 1..] {
            let (lo, hi) = if lo < hi { (lo, hi) } else { (hi, lo) };
            eprintln!("p={lo} weakly dominates p={hi}: {}", weakly_dominates(&rows, lo, hi));
        }
    }
    Ok(Outcome::Completed)
}

#[derive(Debug, Args)]
pub struct RipArgs {
    #[arg(long, default_value_t = 4)]
    pub m: usize,
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Number of Gaussian measurements.
    #[arg(long, default_value_t = 12)]
    pub l: usize,
    /// Rank of the sampled test matrices.
    #[arg(long, default_value_t = 2)]
    pub r: usize,
    /// Also estimate the p-quasi-norm constant and the sufficient condition
    /// for recovering rank r/2.
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    pub trials: usize,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Serialize)]
struct RipSummary {
    m: usize,
    n: usize,
    l: usize,
    r: usize,
    seed: u64,
    trials: usize,
    alpha_lower_bound: f64,
    p: Option<f64>,
    beta_p_lower_bound: Option<f64>,
    sufficient_condition: Option<bool>,
}

pub(crate) fn run_rip(args: RipArgs) -> Result<Outcome> {
    let op = gaussian_operator(args.m, args.n, args.l, args.seed)?;
    let alpha = rip_estimate(&op, args.r, args.trials, args.seed.wrapping_add(1))?;
    let (beta, sufficient) = match args.p {
        Some(p) => {
            let beta = rip_p_estimate(&op, p, args.r, args.trials, args.seed.wrapping_add(2))?;
            let sufficient = if args.r.is_multiple_of(2) && alpha > 0.0 && alpha < 1.0 {
                Some(recovery_threshold_check(alpha, p)?)
            } else {
                None
            };
            (Some(beta), sufficient)
        }
        None => (None, None),
    };
    let summary = RipSummary {
        m: args.m,
        n: args.n,
        l: args.l,
        r: args.r,
        seed: args.seed,
        trials: args.trials,
        alpha_lower_bound: alpha,
        p: args.p,
        beta_p_lower_bound: beta,
        sufficient_condition: sufficient,
    };
    let mut out = open_output(None)?;
    writeln!(out, "{SCHEMA_HEADER}")?;
    write_json_line(&mut out, &summary)?;
    out.flush()?;
    Ok(Outcome::Completed)
}
