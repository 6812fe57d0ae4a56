use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{invalid, LabError, Result};
use crate::SCHEMA_HEADER;

use super::irls::{irls_solve, IrlsConfig};
use super::operator::RecoveryInstance;

#[derive(Clone, Debug)]
pub struct PhaseConfig {
    pub m: usize,
    pub n: usize,
    /// Rank of the ground truth.
    pub k: usize,
    pub p_list: Vec<f64>,
    pub l_list: Vec<usize>,
    pub trials: usize,
    pub seed: u64,
    /// Relative Frobenius error counted as a success.
    pub success_tol: f64,
    pub jobs: usize,
    pub irls: IrlsConfig,
}

impl PhaseConfig {
    pub fn new(m: usize, n: usize, k: usize, p_list: Vec<f64>, l_list: Vec<usize>, trials: usize, seed: u64) -> Self {
        Self {
            m,
            n,
            k,
            p_list,
            l_list,
            trials,
            seed,
            success_tol: 1e-3,
            jobs: 1,
            irls: IrlsConfig::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PhaseRow {
    pub p: f64,
    pub l: usize,
    pub success_rate: f64,
    pub mean_err: f64,
    pub trials: usize,
}

/// Success rate of IRLS over a `(p, l)` grid. Trial `t` of every cell uses
/// the instance seeded with `seed + t`, so all cells share ground truths and
/// each `l` column shares operators across `p`.
pub fn phase_transition(config: &PhaseConfig) -> Result<Vec<PhaseRow>> {
    if config.p_list.is_empty() || config.l_list.is_empty() {
        return invalid("p and l grids must be nonempty");
    }
    if config.trials == 0 {
        return invalid("trials must be at least 1");
    }
    if config.l_list.contains(&0) {
        return invalid("measurement counts must be positive");
    }
    if !(config.success_tol > 0.0) {
        return invalid("success_tol must be positive");
    }
    let cells: Vec<(f64, usize, usize)> = config
        .p_list
        .iter()
        .flat_map(|&p| {
            config
                .l_list
                .iter()
                .flat_map(move |&l| (0..config.trials).map(move |t| (p, l, t)))
        })
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| LabError::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let errors: Vec<f64> = pool.install(|| {
        cells
            .par_iter()
            .map(|&(p, l, t)| {
                let inst =
                    RecoveryInstance::gaussian(config.m, config.n, config.k, l, p, config.seed.wrapping_add(t as u64))?;
                let truth = inst.ground_truth.as_ref().expect("seeded instance has a ground truth");
                let x = irls_solve(&inst, &config.irls)?;
                Ok((&x - truth).frobenius_norm() / truth.frobenius_norm())
            })
            .collect::<Result<_>>()
    })?;

    Ok(errors
        .chunks(config.trials)
        .zip(cells.iter().step_by(config.trials))
        .map(|(errs, &(p, l, _))| PhaseRow {
            p,
            l,
            success_rate: errs.iter().filter(|&&e| e <= config.success_tol).count() as f64 / errs.len() as f64,
            mean_err: errs.iter().sum::<f64>() / errs.len() as f64,
            trials: errs.len(),
        })
        .collect())
}

/// Writes `p,l,success_rate,mean_err,trials` after the schema line. The error
/// column is rounded to seven significant digits.
pub fn write_phase_csv<W: Write>(mut out: W, rows: &[PhaseRow]) -> Result<()> {
    writeln!(out, "{SCHEMA_HEADER}")?;
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "l", "success_rate", "mean_err", "trials"])?;
    for r in rows {
        w.write_record([
            r.p.to_string(),
            r.l.to_string(),
            format!("{:.4}", r.success_rate),
            format!("{:.6e}", r.mean_err),
            r.trials.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Whether the success curve for `p_low` is at least the curve for `p_high`
/// at every `l` present for both.
pub fn weakly_dominates(rows: &[PhaseRow], p_low: f64, p_high: f64) -> bool {
    rows.iter().filter(|r| r.p == p_low).all(|lo| {
        rows.iter()
            .filter(|hi| hi.p == p_high && hi.l == lo.l)
            .all(|hi| lo.success_rate >= hi.success_rate)
    })
}
