//! Integer rounding of time ratios.
//!
//! Task parameters normally live on a decimal grid (multiples of 10^-3),
//! which binary floating point cannot represent exactly: `0.3 / 0.1`
//! evaluates to `2.9999999999999996`. Every ceiling and floor of a time
//! ratio in this crate goes through these helpers, which snap quotients
//! lying within [`SNAP_EPS`] of an integer onto that integer before
//! rounding.

/// Distance from an integer under which a quotient is treated as integral.
pub const SNAP_EPS: f64 = 1e-9;

/// Absolute slack granted to the time-demand oracle in favour of
/// acceptance. The polynomial tests get none.
pub const ORACLE_TOLERANCE: f64 = 1e-9;

/// Returns the nearest integer if `x` is within [`SNAP_EPS`] of it.
pub fn snap_integer(x: f64) -> Option<f64> {
    let r = x.round();
    ((x - r).abs() <= SNAP_EPS).then_some(r)
}

pub fn is_integral(x: f64) -> bool {
    snap_integer(x).is_some()
}

/// `ceil(num / den)` with near-integer snapping.
pub fn ceil_ratio(num: f64, den: f64) -> f64 {
    let q = num / den;
    snap_integer(q).unwrap_or_else(|| q.ceil())
}

/// `floor(num / den)` with near-integer snapping.
pub fn floor_ratio(num: f64, den: f64) -> f64 {
    let q = num / den;
    snap_integer(q).unwrap_or_else(|| q.floor())
}

/// Ceiling of a bare value, snapped.
pub fn ceil_snapped(x: f64) -> f64 {
    snap_integer(x).unwrap_or_else(|| x.ceil())
}

/// Floor of a bare value, snapped.
pub fn floor_snapped(x: f64) -> f64 {
    snap_integer(x).unwrap_or_else(|| x.floor())
}
