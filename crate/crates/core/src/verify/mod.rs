//! Numerical checks of singular-value and eigenvalue perturbation
//! inequalities, plus seeded fuzz campaigns driving them.

mod campaign;
mod checks;
mod ensemble;
mod report;

pub use campaign::{
    fuzz_campaign, fuzz_campaign_with, random_subset, reproduction_command, run_named_check, summarize, CampaignConfig,
    CampaignResult, CheckKind, CheckSummary,
};
pub use checks::{
    check_conjecture_partial, check_f_lw, check_lidskii_wielandt, check_lidskii_wielandt_subsets,
    check_local_expansion, check_main_inequality, check_mirsky, check_mirsky_subsets, check_schatten_p,
    check_symmetric_reduction, local_expansion_residuals, symmetric_reduction_terms, validate_indices, PairSpectra,
    ReductionTerms, LOCAL_EXPANSION_SAFETY,
};
pub use ensemble::{haar_orthogonal, random_piecewise_linear, Ensemble, EnsembleKind};
pub use report::{write_reports_csv, VerificationReport, DEFAULT_TOLERANCE};
