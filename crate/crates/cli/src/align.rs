use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use schatten_core::align::{align_multistart, best_run, verify_commutation, AlignConfig};
use schatten_core::rng::SeededRng;
use schatten_core::verify::haar_orthogonal;
use schatten_core::{ConcaveGauge, Result, SCHEMA_HEADER};

use crate::{open_output, usage, write_json_line, Outcome, SEED_ENV};

#[derive(Debug, Args)]
pub struct AlignArgs {
    /// Dimension of a random instance; ignored when spectra are given.
    #[arg(long, default_value_t = 4)]
    pub n: usize,
    /// Well-behaved gauge spec.
    #[arg(long, default_value = "capped:power:0.5:delta=0.001")]
    pub gauge: ConcaveGauge,
    #[arg(long, env = SEED_ENV, default_value_t = 0)]
    pub seed: u64,
    /// Number of random orthogonal starting points.
    #[arg(long, default_value_t = 1)]
    pub starts: usize,
    #[arg(long, default_value_t = 5000)]
    pub max_iters: usize,
    /// Stop once ‖D‖_F falls to this value.
    #[arg(long, default_value_t = 1e-6)]
    pub tol: f64,
    /// Eigenvalues of A, comma separated; sorted descending.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "sigma_b")]
    pub sigma_a: Vec<f64>,
    /// Eigenvalues of B, comma separated; sorted by descending magnitude.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true, requires = "sigma_a")]
    pub sigma_b: Vec<f64>,
    /// JSON-lines trace path; standard output when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(crate) fn run(args: AlignArgs) -> Result<Outcome> {
    if args.starts == 0 {
        return Err(usage("--starts must be at least 1"));
    }
    let mut rng = SeededRng::new(args.seed);
    let (mut sigma_a, mut sigma_b) = if args.sigma_a.is_empty() {
        if args.n == 0 {
            return Err(usage("--n must be at least 1"));
        }
        let a: Vec<f64> = (0..args.n).map(|_| rng.normal()).collect();
        let b: Vec<f64> = (0..args.n).map(|_| rng.normal()).collect();
        (a, b)
    } else {
        (args.sigma_a, args.sigma_b)
    };
    sigma_a.sort_by(|x, y| y.total_cmp(x));
    sigma_b.sort_by(|x, y| y.abs().total_cmp(&x.abs()));
    let n = sigma_a.len();
    let starts: Vec<_> = (0..args.starts).map(|_| haar_orthogonal(n, &mut rng)).collect();
    let config = AlignConfig {
        max_iters: args.max_iters,
        tol_commutator: args.tol,
        ..AlignConfig::default()
    };
    let runs = align_multistart(&sigma_a, &sigma_b, &args.gauge, &starts, &config)?;
    let best = &runs[best_run(&runs).expect("at least one start")];

    let mut out = open_output(args.out.as_deref())?;
    writeln!(out, "{SCHEMA_HEADER}")?;
    for step in &best.trace {
        write_json_line(&mut out, step)?;
    }
    out.flush()?;
    let converged = runs.iter().filter(|r| r.converged).count();
    eprintln!(
        "objective {:.12e}, ||D||_F {:e}, {} iterations, {converged}/{} starts converged, commutes: {}",
        best.objective,
        best.commutator_norm,
        best.iterations,
        runs.len(),
        verify_commutation(best, 1e-5)
    );
    Ok(Outcome::Completed)
}
