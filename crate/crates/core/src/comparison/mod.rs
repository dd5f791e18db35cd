//! Analytic certificates: threshold predicates, explicit super-solutions and
//! the kernel-averaged blow-up functional.

pub mod phi;
pub mod supersolution;
pub mod thresholds;

pub use phi::{beta_scaling_defect, fit_lower_constant, phi_functional, upsilon_audit, upsilon_terms, LowerConstantFit, PhiReport, UpsilonAudit};
pub use supersolution::{
    best_delta, build_type_one_supersolution, max_certified_theta, ode_supersolution, type_one_feasible,
    ScalarSupersolution, SupersolutionCert,
};
pub use thresholds::{
    delta_objective, optimal_delta, threshold_type_one, threshold_type_two, threshold_type_two_bounds, ThresholdKind,
    ThresholdVerdict,
};
