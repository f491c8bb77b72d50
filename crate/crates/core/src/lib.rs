pub mod bayes;
pub mod dist;
pub mod error;
pub mod kernels;
pub mod mc;
pub mod ordering;
pub mod poly;
pub mod theorems;
pub mod quad;
pub mod scenario;

pub use bayes::{posterior_point, posterior_threshold, posterior_threshold_additive, Conditioning, Posterior};
pub use dist::{make_distribution, make_named_prior, Atom, Distribution, Factor, Piece, TailDescriptor, TailKind, TailSide};
pub use error::{Error, Result};
pub use kernels::{
    additive_kernel, evasion_kernel, three_piece_kernel, threshold_transform, triangle_rectangle_kernel, KernelKind,
    PFunction, SignalKernel, ThresholdSignal,
};
pub use ordering::{
    detect_reversals, fosd_compare, fosd_compare_grid, screening_curve, FosdVerdict, Relation, ScreeningCurve,
    ScreeningSignal,
};
pub use theorems::{
    check_h_monotone, independent_noise_threshold, loglik_slope, posterior_z_derivative, ruleout_corollary, ruleout_lemma,
    Monotonicity, RuleoutVerdict, SlopeReport, Trigger,
};
pub use mc::{dkw_band, oracle_check, sample_conditional, EmpiricalCdf, McCondition, OracleCheck};
