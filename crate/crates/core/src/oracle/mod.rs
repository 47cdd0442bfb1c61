//! Brute-force verifiers that share no numerical path with the production
//! code: dense Liouvillian matrices, exact unitary evolution of the oscillator
//! with a few bath spins, and multi-route coefficient checks.

mod compare;
mod crosscheck;
mod exact;
mod expm;
mod liouvillian;

pub use compare::{coherence_comparison, trend_bath, trend_spec, CoherenceComparison, ComparisonOptions};
pub use crosscheck::{
    ohmic_crosscheck, quadrature_crosscheck, CrosscheckReport, Deviation, PathValues, CROSSCHECK_TOL,
};
pub use exact::{
    exact_joint_evolution, ExactJointSpec, ExactModel, ExactTrajectory, MAX_EXACT_DIM, MAX_EXACT_SPINS,
};
pub use expm::expm;
pub use liouvillian::{
    equivalence_defect, liouvillian_from_rhs, liouvillian_of, LiouvillianMatrix, MAX_LIOUVILLIAN_DIM,
};
