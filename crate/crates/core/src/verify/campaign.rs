//! Seeded fuzz campaigns over an [`Ensemble`].

use std::fmt;
use std::fs::{self, OpenOptions};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use rayon::prelude::*;

use crate::error::{invalid, LabError, Result};
use crate::gauge::ConcaveGauge;
use crate::linalg::{write_matrix, DenseMatrix};
use crate::rng::SeededRng;

use super::checks::{check_lidskii_wielandt, check_schatten_p, check_symmetric_reduction, PairSpectra};
use super::ensemble::{random_piecewise_linear, Ensemble};
use super::report::{VerificationReport, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CheckKind {
    /// Full main inequality.
    Main,
    /// Top-`k` partial sums for every `k`.
    ConjecturePartial,
    /// Factor-2 dilation identities.
    SymmetricReduction,
    /// One-sided inequality on a random index set of each size.
    FLw,
    /// Gauge-free Mirsky inequality on the full index set.
    Mirsky,
}

impl CheckKind {
    pub const ALL: [CheckKind; 5] = [
        CheckKind::Main,
        CheckKind::ConjecturePartial,
        CheckKind::SymmetricReduction,
        CheckKind::FLw,
        CheckKind::Mirsky,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CheckKind::Main => "main",
            CheckKind::ConjecturePartial => "conjecture_partial",
            CheckKind::SymmetricReduction => "symmetric_reduction",
            CheckKind::FLw => "f_lw",
            CheckKind::Mirsky => "mirsky",
        }
    }
}

impl fmt::Display for CheckKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CheckKind {
    type Err = LabError;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| LabError::Parse(format!("unknown check `{s}`")))
    }
}

#[derive(Clone, Debug)]
pub struct CampaignConfig {
    pub trials: u64,
    pub tolerance: f64,
    pub checks: Vec<CheckKind>,
    /// Where reproduction files for violations go; nothing is written if unset.
    pub failure_dir: Option<PathBuf>,
    /// Worker threads; results are identical for any value.
    pub jobs: usize,
    /// Random piecewise-linear gauges drawn per trial on top of the fixed list.
    pub random_pwl: usize,
}

impl Default for CampaignConfig {
    fn default() -> Self {
        Self {
            trials: 1000,
            tolerance: DEFAULT_TOLERANCE,
            checks: vec![CheckKind::Main],
            failure_dir: None,
            jobs: 1,
            random_pwl: 0,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckSummary {
    pub check: String,
    pub passed: u64,
    pub failed: u64,
    pub min_slack: f64,
}

#[derive(Clone, Debug)]
pub struct CampaignResult {
    /// Reports in trial order, then gauge order, then check order.
    pub reports: Vec<VerificationReport>,
    /// One entry per check family, in first-seen order.
    pub summary: Vec<CheckSummary>,
}

impl CampaignResult {
    pub fn all_hold(&self) -> bool {
        self.summary.iter().all(|s| s.failed == 0)
    }

    pub fn failures(&self) -> impl Iterator<Item = &VerificationReport> {
        self.reports.iter().filter(|r| !r.holds)
    }
}

/// Main-inequality campaign with default settings otherwise.
pub fn fuzz_campaign(ensemble: &Ensemble, gauges: &[ConcaveGauge], trials: u64, tol: f64) -> Result<CampaignResult> {
    let config = CampaignConfig {
        trials,
        tolerance: tol,
        ..CampaignConfig::default()
    };
    fuzz_campaign_with(ensemble, gauges, &config)
}

struct TrialOutcome {
    seed: u64,
    a: DenseMatrix,
    b: DenseMatrix,
    reports: Vec<VerificationReport>,
}

pub fn fuzz_campaign_with(
    ensemble: &Ensemble,
    gauges: &[ConcaveGauge],
    config: &CampaignConfig,
) -> Result<CampaignResult> {
    if config.trials == 0 {
        return invalid("trials must be at least 1");
    }
    if config.checks.is_empty() {
        return invalid("no checks selected");
    }
    if gauges.is_empty() && config.random_pwl == 0 && config.checks.iter().any(|&c| c != CheckKind::Mirsky) {
        return invalid("no gauges given");
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| LabError::InvalidInput(format!("cannot start worker pool: {e}")))?;
    let outcomes: Vec<TrialOutcome> = pool.install(|| {
        (0..config.trials)
            .into_par_iter()
            .map(|i| run_trial(ensemble, gauges, config, i))
            .collect::<Result<_>>()
    })?;

    if let Some(dir) = &config.failure_dir {
        write_failures(dir, &outcomes)?;
    }
    let reports: Vec<VerificationReport> = outcomes.into_iter().flat_map(|o| o.reports).collect();
    Ok(CampaignResult {
        summary: summarize(&reports),
        reports,
    })
}

fn run_trial(
    ensemble: &Ensemble,
    gauges: &[ConcaveGauge],
    config: &CampaignConfig,
    index: u64,
) -> Result<TrialOutcome> {
    let seed = ensemble.trial_seed(index);
    let (a, b, mut rng) = ensemble.trial(index);
    let mut all_gauges = gauges.to_vec();
    all_gauges.extend((0..config.random_pwl).map(|_| random_piecewise_linear(&mut rng)));
    let spectra = PairSpectra::new(&a, &b)?;
    let tol = config.tolerance;
    let mut reports = Vec::new();
    if config.checks.contains(&CheckKind::Mirsky) {
        let full: Vec<usize> = (0..spectra.a.len()).collect();
        reports.push(spectra.mirsky_report(&full, tol)?);
    }
    for f in &all_gauges {
        for &check in &config.checks {
            match check {
                CheckKind::Main => reports.push(spectra.main_report(f, tol)),
                CheckKind::ConjecturePartial => {
                    for k in 1..=spectra.a.len() {
                        reports.push(spectra.conjecture_report(f, k, tol)?);
                    }
                }
                CheckKind::SymmetricReduction => reports.push(check_symmetric_reduction(&a, &b, f, tol)?),
                CheckKind::FLw => {
                    for k in 1..=spectra.a.len() {
                        let subset = random_subset(spectra.a.len(), k, &mut rng);
                        reports.push(spectra.f_lw_report(f, &subset, tol)?);
                    }
                }
                CheckKind::Mirsky => {}
            }
        }
    }
    let reports = reports.into_iter().map(|r| r.with_seed(seed)).collect();
    Ok(TrialOutcome { seed, a, b, reports })
}

/// Sorted uniform `k`-subset of `0..n` by partial Fisher–Yates.
pub fn random_subset(n: usize, k: usize, rng: &mut SeededRng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = i + rng.below(n - i);
        pool.swap(i, j);
    }
    let mut subset = pool[..k].to_vec();
    subset.sort_unstable();
    subset
}

/// Aggregates reports by check family.
pub fn summarize(reports: &[VerificationReport]) -> Vec<CheckSummary> {
    let mut summary: Vec<CheckSummary> = Vec::new();
    for r in reports {
        let name = r.base_name();
        let entry = match summary.iter_mut().position(|s| s.check == name) {
            Some(i) => &mut summary[i],
            None => {
                summary.push(CheckSummary {
                    check: name.to_string(),
                    passed: 0,
                    failed: 0,
                    min_slack: f64::INFINITY,
                });
                summary.last_mut().expect("just pushed")
            }
        };
        if r.holds {
            entry.passed += 1;
        } else {
            entry.failed += 1;
        }
        entry.min_slack = entry.min_slack.min(r.slack);
    }
    summary
}

fn write_failures(dir: &Path, outcomes: &[TrialOutcome]) -> Result<()> {
    let failing: Vec<&TrialOutcome> = outcomes.iter().filter(|o| o.reports.iter().any(|r| !r.holds)).collect();
    if failing.is_empty() {
        return Ok(());
    }
    fs::create_dir_all(dir)?;
    let mut log = OpenOptions::new()
        .create(true)
        .append(true)
        .open(dir.join("failures.txt"))?;
    for o in failing {
        let a_path = dir.join(format!("trial_{}_A.txt", o.seed));
        let b_path = dir.join(format!("trial_{}_B.txt", o.seed));
        write_matrix(&a_path, &o.a)?;
        write_matrix(&b_path, &o.b)?;
        for r in o.reports.iter().filter(|r| !r.holds) {
            writeln!(
                log,
                "# {} seed={} gauge={} lhs={:e} rhs={:e} slack={:e}",
                r.check_name, r.input_seed, r.gauge_spec, r.lhs, r.rhs, r.slack
            )?;
            writeln!(log, "{}", reproduction_command(&a_path, &b_path, r))?;
        }
    }
    Ok(())
}

/// Single command that re-runs the failing check on the dumped matrices.
pub fn reproduction_command(a_path: &Path, b_path: &Path, report: &VerificationReport) -> String {
    let mut cmd = format!(
        "schatten-lab verify --a {} --b {} --check '{}' --tol={:e}",
        a_path.display(),
        b_path.display(),
        report.check_name,
        report.tolerance
    );
    if report.gauge_spec != "-" {
        cmd.push_str(&format!(" --gauge '{}'", report.gauge_spec));
    }
    cmd
}

/// Runs one named check on an explicit pair, as printed in reproduction
/// commands. Accepted names: `main`, `schatten_p`, `symmetric_reduction`,
/// `conjecture_partial[@k=K]`, `f_lw[@i,j,..]`, `mirsky[@i,j,..]` and
/// `lidskii_wielandt[@i,j,..]` (1-based indices). Without a suffix, the
/// partial check runs every `k` and index-set checks use the full set.
pub fn run_named_check(
    a: &DenseMatrix,
    b: &DenseMatrix,
    gauge: Option<&ConcaveGauge>,
    name: &str,
    tol: f64,
) -> Result<Vec<VerificationReport>> {
    let (base, detail) = match name.split_once('@') {
        Some((base, detail)) => (base, Some(detail)),
        None => (name, None),
    };
    let len = a.rows().min(a.cols());
    let indices = || -> Result<Vec<usize>> {
        match detail {
            None => Ok((0..len).collect()),
            Some(d) => d
                .split(',')
                .map(|s| match s.trim().parse::<usize>() {
                    Ok(i) if i >= 1 => Ok(i - 1),
                    _ => Err(LabError::Parse(format!("bad index `{s}` in `{name}`"))),
                })
                .collect(),
        }
    };
    let need_gauge = || gauge.ok_or_else(|| LabError::InvalidInput(format!("check `{base}` needs a gauge")));
    match base {
        "mirsky" => Ok(vec![PairSpectra::new(a, b)?.mirsky_report(&indices()?, tol)?]),
        "lidskii_wielandt" => Ok(vec![check_lidskii_wielandt(a, b, &indices()?, tol)?]),
        "main" => Ok(vec![PairSpectra::new(a, b)?.main_report(need_gauge()?, tol)]),
        "schatten_p" => {
            let f = need_gauge()?;
            match f.kind() {
                crate::gauge::GaugeKind::Power { p } => Ok(vec![check_schatten_p(a, b, *p, tol)?]),
                _ => invalid("schatten_p needs a power gauge"),
            }
        }
        "symmetric_reduction" => Ok(vec![check_symmetric_reduction(a, b, need_gauge()?, tol)?]),
        "f_lw" => Ok(vec![PairSpectra::new(a, b)?.f_lw_report(
            need_gauge()?,
            &indices()?,
            tol,
        )?]),
        "conjecture_partial" => {
            let f = need_gauge()?;
            let spectra = PairSpectra::new(a, b)?;
            let ks: Vec<usize> = match detail {
                None => (1..=len).collect(),
                Some(d) => vec![d
                    .strip_prefix("k=")
                    .and_then(|k| k.parse().ok())
                    .ok_or_else(|| LabError::Parse(format!("bad partial-sum suffix in `{name}`")))?],
            };
            ks.into_iter().map(|k| spectra.conjecture_report(f, k, tol)).collect()
        }
        _ => Err(LabError::Parse(format!("unknown check `{name}`"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::verify::EnsembleKind;

    #[test]
    fn zero_trials_rejected() {
        let e = Ensemble::new(EnsembleKind::GaussianIid, 3, 3, 0).unwrap();
        let f = ConcaveGauge::power(0.5).unwrap();
        assert!(matches!(
            fuzz_campaign(&e, &[f], 0, 1e-9),
            Err(LabError::InvalidInput(_))
        ));
    }

    #[test]
    fn jobs_do_not_change_results() {
        let e = Ensemble::new(EnsembleKind::GaussianIid, 4, 3, 11).unwrap();
        let f = ConcaveGauge::power(0.3).unwrap();
        let mut config = CampaignConfig {
            trials: 40,
            checks: CheckKind::ALL.to_vec(),
            random_pwl: 1,
            ..CampaignConfig::default()
        };
        let one = fuzz_campaign_with(&e, std::slice::from_ref(&f), &config).unwrap();
        config.jobs = 4;
        let four = fuzz_campaign_with(&e, &[f], &config).unwrap();
        assert_eq!(one.reports, four.reports);
        assert!(one.all_hold());
        let names: Vec<&str> = one.summary.iter().map(|s| s.check.as_str()).collect();
        assert_eq!(
            names,
            ["mirsky", "main", "conjecture_partial", "symmetric_reduction", "f_lw"]
        );
    }

    #[test]
    fn subsets_are_sorted_and_distinct() {
        let mut rng = SeededRng::new(1);
        for k in 1..=6 {
            let s = random_subset(6, k, &mut rng);
            assert_eq!(s.len(), k);
            assert!(s.windows(2).all(|w| w[0] < w[1]));
        }
    }

    #[test]
    fn named_checks_parse() {
        let a = DenseMatrix::diag(&[3.0, 1.0, 0.5]);
        let b = DenseMatrix::diag(&[1.0, 1.0, 1.0]);
        let f = ConcaveGauge::power(0.5).unwrap();
        assert_eq!(
            run_named_check(&a, &b, Some(&f), "conjecture_partial", 1e-9)
                .unwrap()
                .len(),
            3
        );
        let r = run_named_check(&a, &b, Some(&f), "conjecture_partial@k=2", 1e-9).unwrap();
        assert_eq!(r[0].check_name, "conjecture_partial@k=2");
        let r = run_named_check(&a, &b, None, "mirsky@1,3", 1e-9).unwrap();
        assert_eq!(r[0].check_name, "mirsky@1,3");
        assert!(run_named_check(&a, &b, None, "main", 1e-9).is_err());
        assert!(run_named_check(&a, &b, None, "mirsky@0", 1e-9).is_err());
        assert!(run_named_check(&a, &b, Some(&f), "bogus", 1e-9).is_err());
    }

    #[test]
    fn failure_files_written() {
        // A negative tolerance turns every equality case into a failure.
        let e = Ensemble::new(EnsembleKind::GaussianIid, 2, 2, 5).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let config = CampaignConfig {
            trials: 2,
            tolerance: -1.0,
            checks: vec![CheckKind::Main],
            failure_dir: Some(dir.path().to_path_buf()),
            ..CampaignConfig::default()
        };
        let out = fuzz_campaign_with(&e, &[ConcaveGauge::power(1.0).unwrap()], &config).unwrap();
        assert!(!out.all_hold());
        assert!(dir.path().join("trial_5_A.txt").exists());
        assert!(dir.path().join("trial_6_B.txt").exists());
        let log = fs::read_to_string(dir.path().join("failures.txt")).unwrap();
        assert!(log.contains("schatten-lab verify --a"));
        assert!(log.contains("--gauge 'power:1'"));
    }
}
