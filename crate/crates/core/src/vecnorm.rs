use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The `ℓ_r` norm on `ℝ^d`, `r ∈ [1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VecNorm {
    r: f64,
}

impl VecNorm {
    pub const L1: VecNorm = VecNorm { r: 1.0 };
    pub const L2: VecNorm = VecNorm { r: 2.0 };
    pub const LINF: VecNorm = VecNorm { r: f64::INFINITY };

    pub fn new(r: f64) -> Result<Self> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidExponent(r));
        }
        Ok(VecNorm { r })
    }

    pub fn exponent(&self) -> f64 {
        self.r
    }

    /// The norm on the dual space, `ℓ_{r*}` with `1/r + 1/r* = 1`.
    pub fn dual(&self) -> VecNorm {
        let r = if self.r == 1.0 {
            f64::INFINITY
        } else if self.r.is_infinite() {
            1.0
        } else {
            self.r / (self.r - 1.0)
        };
        VecNorm { r }
    }

    pub fn norm(&self, x: &[f64]) -> f64 {
        if x.len() == 1 {
            return x[0].abs();
        }
        if self.r.is_infinite() {
            x.iter().fold(0.0, |m, v| m.max(v.abs()))
        } else if self.r == 1.0 {
            x.iter().map(|v| v.abs()).sum()
        } else if self.r == 2.0 {
            x.iter().map(|v| v * v).sum::<f64>().sqrt()
        } else {
            let m = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if m == 0.0 {
                return 0.0;
            }
            m * x.iter().map(|v| (v.abs() / m).powf(self.r)).sum::<f64>().powf(1.0 / self.r)
        }
    }

    /// Smallest `K` with `‖x‖ ≤ K‖x‖_1` on `ℝ^d`. The extreme points of the
    /// `ℓ_1` ball are the signed basis vectors, so `K = ‖e_1‖`.
    pub fn l1_constant(&self, dim: usize) -> f64 {
        let mut e = vec![0.0; dim.max(1)];
        e[0] = 1.0;
        self.norm(&e)
    }

    /// A vector `u` with `‖u‖ = 1` (in this norm) and `⟨z, u⟩ = ‖z‖_*`, the
    /// dual norm of `z`. Returns zeros for `z = 0`.
    pub fn aligned_unit(&self, z: &[f64]) -> Vec<f64> {
        let dual = self.dual();
        let zn = dual.norm(z);
        let mut u = vec![0.0; z.len()];
        if zn == 0.0 {
            return u;
        }
        if self.r.is_infinite() {
            for (ui, zi) in u.iter_mut().zip(z) {
                *ui = if *zi > 0.0 {
                    1.0
                } else if *zi < 0.0 {
                    -1.0
                } else {
                    0.0
                };
            }
        } else if self.r == 1.0 {
            let (j, zj) = z
                .iter()
                .enumerate()
                .fold((0, 0.0f64), |(bj, bv), (j, v)| if v.abs() > bv.abs() { (j, *v) } else { (bj, bv) });
            u[j] = zj.signum();
        } else {
            let s = dual.r;
            for (ui, zi) in u.iter_mut().zip(z) {
                *ui = zi.signum() * (zi.abs() / zn).powf(s - 1.0);
            }
        }
        u
    }
}

impl fmt::Display for VecNorm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.r.is_infinite() {
            write!(f, "inf")
        } else {
            write!(f, "{}", self.r)
        }
    }
}

impl FromStr for VecNorm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let r = match t {
            "inf" | "infinity" | "Inf" | "∞" => f64::INFINITY,
            _ => t
                .parse::<f64>()
                .map_err(|_| Error::InvalidExponent(f64::NAN))?,
        };
        VecNorm::new(r)
    }
}
