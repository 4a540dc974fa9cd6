//! Default tolerances, pinned in one place.
//!
//! Upper-bound checks compare a max-abs residual over sampled points against
//! these; lower-bound thresholds are for negative controls that must deviate
//! visibly. Values are chosen a comfortable margin above accumulated rounding
//! for dimension <= 7 at a few hundred sample points, and far below any
//! genuine structure failure, which shows up at order 0.1 or larger.

/// Almost-contact axioms (pure algebra at a point).
pub const AXIOMS: f64 = 1e-9;
/// Defining covariant-derivative identities of the fiber structure.
pub const KENMOTSU: f64 = 1e-8;
/// Winning pairing-scale candidate must fit this closely.
pub const KAPPA_WIN: f64 = 1e-8;
/// Losing pairing-scale candidate must deviate at least this much.
pub const KAPPA_LOSE_MIN: f64 = 0.1;
/// Combined almost-Kenmotsu residual (d eta and d Omega conditions).
pub const ALMOST_KENMOTSU: f64 = 1e-8;
/// Trans-Sasakian covariant-derivative identity.
pub const TRANS_SASAKIAN: f64 = 1e-8;
/// J^2 = -Id on the warped product (exact algebra, tiny rounding only).
pub const J_SQUARED: f64 = 1e-12;
/// Metric compatibility of J with the product metric.
pub const HERMITIAN: f64 = 1e-10;
/// Positive-definiteness margin: smallest leading principal minor.
pub const SPD_MIN: f64 = 1e-12;
/// Covariant derivative of J against its assembled closed form.
pub const NABLA_J: f64 = 1e-8;
/// Agreement of the two independent torsion-tensor routes.
pub const NIJENHUIS_AGREE: f64 = 1e-9;
/// Vanishing of the torsion tensor (integrability).
pub const NIJENHUIS_VANISH: f64 = 1e-8;
/// Negative controls (broken structures) must deviate at least this much.
pub const CONTROL_MIN: f64 = 0.1;
/// Fundamental two-form decomposition into fiber and mixed parts.
pub const DECOMPOSITION: f64 = 1e-10;
/// d Omega = (lee form) ^ Omega on the warped product.
pub const LEE_FORM: f64 = 1e-8;
/// Closedness of the rescaled fundamental form (goes through a quadrature).
pub const CONFORMAL_CLOSED: f64 = 1e-7;
/// Compatibility of J with the rescaled metric.
pub const CONFORMAL_HERMITIAN: f64 = 1e-9;
/// Gradient of the line-integral potential against the target one-form.
pub const POTENTIAL_GRADIENT: f64 = 1e-8;
/// Potential value against a closed-form antiderivative where one exists.
pub const POTENTIAL_CLOSED_FORM: f64 = 1e-10;
/// Closedness pre-check before constructing a potential.
pub const CLOSEDNESS_PRECHECK: f64 = 1e-8;
/// Master identity of the converse checkers, d(f Omega) = 0.
pub const MASTER_IDENTITY: f64 = 1e-7;
/// Conclusion identities of the converse checkers.
pub const CONVERSE_CONCLUSION: f64 = 1e-8;
/// Hypothesis residuals of the converse checkers.
pub const CONVERSE_HYPOTHESIS: f64 = 1e-9;
/// Scalar warp/conformal-factor equation in the contact converse.
pub const WARP_ODE: f64 = 1e-9;
/// Finite-difference cross-check of exact derivatives (relative).
pub const FD_ORACLE_REL: f64 = 1e-6;
/// d(d(anything)) = 0.
pub const D_SQUARED: f64 = 1e-10;
pub const CONTACT_SCALE: f64 = 1e-10;
