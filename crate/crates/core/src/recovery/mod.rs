//! Low-rank matrix recovery: measurement operators, the Schatten-p IRLS
//! solver, nullspace-condition sampling, failure witnesses, RIP estimates and
//! phase-transition experiments.

mod irls;
mod nullspace;
mod operator;
mod phase;
mod rip;

pub use irls::{irls_solve, irls_solve_detailed, smoothed_objective, IrlsConfig, IrlsSolution};
pub use nullspace::{
    failure_witness, nullspace_condition_sample, nullspace_margin, property_e_sample, vector_nullspace_margin,
    FailureWitness, NullspaceSample, PropertyESample,
};
pub use operator::{
    gaussian_operator, induced_matrix, low_rank_truth, nullspace_basis, InstanceHeader, MeasurementOperator,
    RecoveryInstance,
};
pub use phase::{phase_transition, weakly_dominates, write_phase_csv, PhaseConfig, PhaseRow};
pub use rip::{
    csrip_expansion_factor, csrip_threshold_check, recovery_threshold_check, rip_estimate, rip_p_estimate,
    RIP_THRESHOLD_CONSTANT,
};
