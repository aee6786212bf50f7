//! Distortion-weighted norms `‖·‖_{σ,p}` of random vectors on finite
//! probability spaces, their dual norms with optimality certificates,
//! σ-dominance and maximal correlation risk measures.
//!
//! All computations are exact finite sums over quantile steps, except
//! for the smooth distortion families where the envelope is additionally
//! probed and an explicit approximation bound is reported.

pub mod assignment;
pub mod distortion;
pub mod dual;
pub mod envelope;
pub mod error;
pub mod norm;
pub mod oracle;
pub mod risk;
pub mod space;
pub mod tol;
pub mod vecnorm;

pub use distortion::{Distortion, SampleDistortion, StepDistortion};
pub use dual::{
    avar, avar_superset, dual_contraction_under_coarsening, dual_norm, dual_norm_inf, dual_norm_q, pairing,
    sigma_dominates, vector_dual_norm, AvarSuperset, Contraction, Dominance, DualityCertificate,
};
pub use envelope::{build_g, concave_majorant, extract_h, DensityH, HullPoints, TailTransform};
pub use error::{Error, Result};
pub use norm::{compare_p, holder_bound, norm, norm_via_coupling, parallelogram_residual, HolderBound, PComparison};
pub use risk::{bound_chain, lipschitz_check, rho_assignment, rho_scalar, BoundChain, LipschitzCheck, RiskReport};
pub use space::{
    coarsen, comonotone_slots, expectation, p_norm, quantile, FiniteSpace, Partition, RandomVector, SlotCoupling,
    StepQuantile,
};
pub use vecnorm::VecNorm;
