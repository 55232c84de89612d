//! Numeric tolerances and defaults shared across modules.

/// Below this height theta-family and level-one forms are evaluated after
/// reduction by the modular group instead of directly.
pub const REDUCE_BELOW: f64 = 0.5;

/// Largest number of q-series terms a single evaluation may use.
pub const MAX_TERMS: usize = 2_000_000;

/// Default absolute tolerance of the vertical-ray integral.
pub const INTEGRAL_TOL: f64 = 1e-12;

/// Split point between the near-cusp segment and the exponential tail.
pub const TAIL_SPLIT: f64 = 2.0;

/// Smallest height reached by the dyadic pieces of the ray integral; the
/// rest is bounded by the growth estimate.
pub const RAY_FLOOR: f64 = 1e-30;

/// Agreement required when a theta conjugate constant is identified.
pub const CONJUGATE_TOL: f64 = 1e-10;

/// Allowed gap between a Hoelder estimate and the closed form.
pub const HOLDER_TOL: f64 = 0.15;

/// Slack below `2 alpha - r + 1` allowed for the AFE error slope.
pub const AFE_SLOPE_SLACK: f64 = 0.2;

/// Relative AFE residual treated as exact closure (slope reported as infinite).
pub const AFE_CLOSURE_TOL: f64 = 1e-9;

/// Relative residual allowed in the wavelet identity.
pub const WAVELET_REL_TOL: f64 = 1e-3;
