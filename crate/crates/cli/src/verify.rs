use std::path::PathBuf;

use clap::Args;
use schatten_core::linalg::read_matrix;
use schatten_core::verify::{
    fuzz_campaign_with, run_named_check, write_reports_csv, CampaignConfig, CheckKind, Ensemble, EnsembleKind,
};
use schatten_core::{ConcaveGauge, Result};

use crate::{open_output, usage, Outcome, SEED_ENV};

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// gaussian, lowrank:R, psd, symmetric or repeated.
    #[arg(long, default_value = "gaussian")]
    pub ensemble: EnsembleKind,
    #[arg(long, default_value_t = 5)]
    pub m: usize,
    #[arg(long, default_value_t = 5)]
    pub n: usize,
    /// Gauge spec such as `power:0.5`, `capped:power:0.5:delta=0.01` or
    /// `pwl:1,2:3,2,1`. Repeat for several gauges; defaults to `power:0.5`.
    #[arg(long = "gauge")]
    pub gauges: Vec<ConcaveGauge>,
    /// Check to run. Ensemble mode accepts main, conjecture_partial,
    /// symmetric_reduction, f_lw and mirsky (repeatable). With --a/--b any
    /// name printed in a reproduction command is accepted.
    #[arg(long = "check")]
    pub checks: Vec<String>,
    #[arg(long, default_value_t = 1000)]
    pub trials: u64,
    /// Relative slack tolerance.
    #[arg(long, default_value_t = 1e-9)]
    pub tol: f64,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Random piecewise-linear gauges drawn per trial.
    #[arg(long, default_value_t = 0)]
    pub random_pwl: usize,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    /// CSV report path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Directory for matrices and reproduction commands of violations.
    #[arg(long, default_value = "schatten-lab-failures")]
    pub failure_dir: PathBuf,
    /// Matrix file for a single-pair check.
    #[arg(long, requires = "b")]
    pub a: Option<PathBuf>,
    #[arg(long, requires = "a")]
    pub b: Option<PathBuf>,
}

pub(crate) fn run(args: VerifyArgs) -> Result<Outcome> {
    if args.a.is_some() {
        return run_pair(args);
    }
    let gauges = if args.gauges.is_empty() {
        vec!["power:0.5".parse()?]
    } else {
        args.gauges
    };
    let checks = if args.checks.is_empty() {
        vec![CheckKind::Main]
    } else {
        args.checks.iter().map(|c| c.parse()).collect::<Result<_>>()?
    };
    let ensemble = Ensemble::new(args.ensemble, args.m, args.n, args.seed)?;
    let config = CampaignConfig {
        trials: args.trials,
        tolerance: args.tol,
        checks,
        failure_dir: Some(args.failure_dir.clone()),
        jobs: args.jobs,
        random_pwl: args.random_pwl,
    };
    let result = fuzz_campaign_with(&ensemble, &gauges, &config)?;
    write_reports_csv(open_output(args.out.as_deref())?, &result.reports)?;
    for s in &result.summary {
        eprintln!(
            "{}: {} passed, {} failed, min slack {:e}",
            s.check, s.passed, s.failed, s.min_slack
        );
    }
    if result.all_hold() {
        Ok(Outcome::Completed)
    } else {
        eprintln!(
            "violations found; reproduction commands in {}",
            args.failure_dir.join("failures.txt").display()
        );
        Ok(Outcome::VerificationFailed)
    }
}

fn run_pair(args: VerifyArgs) -> Result<Outcome> {
    let (Some(a_path), Some(b_path)) = (&args.a, &args.b) else {
        return Err(usage("--a and --b must be given together"));
    };
    if args.gauges.len() > 1 || args.checks.len() > 1 {
        return Err(usage("a single-pair check takes at most one --gauge and one --check"));
    }
    let a = read_matrix(a_path)?;
    let b = read_matrix(b_path)?;
    let name = args.checks.first().map_or("main", String::as_str);
    let reports = run_named_check(&a, &b, args.gauges.first(), name, args.tol)?;
    write_reports_csv(open_output(args.out.as_deref())?, &reports)?;
    if reports.iter().all(|r| r.holds) {
        Ok(Outcome::Completed)
    } else {
        Ok(Outcome::VerificationFailed)
    }
}
