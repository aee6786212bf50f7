//! Comparison helpers. Tolerances are absolute for values up to 1 and
//! relative beyond that.

pub const NORM_TOL: f64 = 1e-12;
pub const CERT_TOL: f64 = 1e-9;

#[inline]
pub fn scale(a: f64, b: f64) -> f64 {
    1f64.max(a.abs()).max(b.abs())
}

/// `a <= b` up to `tol`, scaled by the magnitude of the operands.
#[inline]
pub fn le(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * scale(a, b)
}

#[inline]
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * scale(a, b)
}
