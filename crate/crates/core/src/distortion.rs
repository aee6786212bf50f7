//! Distortion functions `σ` and their tail integrals `S(α) = ∫_α^1 σ(u) du`.
//!
//! Norm and duality code touches `σ` only through [`Distortion::integral`]
//! and [`Distortion::tail`], which are closed-form for every family.
//! Pointwise values ([`Distortion::sigma_at`]) are for diagnostics.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::space::{expectation, quantile, RandomVector};
use crate::vecnorm::VecNorm;

const INVERSE_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub enum Distortion {
    /// `σ ≡ 1`; the norm reduces to `L^p`.
    Constant,
    /// `σ = 1_{(β,1]} / (1-β)`, the average value-at-risk spectrum.
    AvarSpectrum { beta: f64 },
    /// `σ(u) = s u^{s-1}`, `s ≥ 1`.
    Power { s: f64 },
    /// `σ(u) = -log(1-u)`, unbounded.
    Log,
    Step(StepDistortion),
}

/// Left-continuous step distortion: level `levels[k]` on
/// `(breakpoints[k], breakpoints[k+1]]`.
#[derive(Debug, Clone)]
pub struct StepDistortion {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
    normalization: f64,
}

/// Equality of the normalized functions; the recorded normalization is
/// not compared.
impl PartialEq for StepDistortion {
    fn eq(&self, other: &Self) -> bool {
        self.breakpoints == other.breakpoints && self.levels == other.levels
    }
}

impl StepDistortion {
    /// Levels are divided by their integral so that `∫σ = 1`; the divisor
    /// is kept in [`StepDistortion::normalization`].
    pub fn new(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        if levels.is_empty() || breakpoints.len() != levels.len() + 1 {
            return Err(Error::InvalidDistortion(format!(
                "{} breakpoints for {} levels",
                breakpoints.len(),
                levels.len()
            )));
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidDistortion("step breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|b| !(b[0] < b[1])) {
            return Err(Error::InvalidDistortion("step breakpoints must increase strictly".into()));
        }
        if levels.iter().any(|l| !l.is_finite() || *l < 0.0) {
            return Err(Error::InvalidDistortion("step levels must be finite and nonnegative".into()));
        }
        if levels.windows(2).any(|l| l[0] > l[1]) {
            return Err(Error::InvalidDistortion("step levels must be nondecreasing".into()));
        }
        let total: f64 = breakpoints.windows(2).zip(&levels).map(|(b, l)| l * (b[1] - b[0])).sum();
        if total <= 0.0 {
            return Err(Error::InvalidDistortion("step distortion integrates to zero".into()));
        }
        let levels = levels.into_iter().map(|l| l / total).collect();
        Ok(StepDistortion { breakpoints, levels, normalization: total })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    /// Integral of the levels as given, before normalization.
    pub fn normalization(&self) -> f64 {
        self.normalization
    }

    fn pieces(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.levels).map(|(b, l)| (b[0], b[1], *l))
    }

    fn u0(&self) -> f64 {
        self.pieces().find(|(_, _, l)| *l > 0.0).map_or(1.0, |(lo, _, _)| lo)
    }
}

/// A step distortion built from a sample, with the scale it was divided by.
#[derive(Debug, Clone)]
pub struct SampleDistortion {
    pub distortion: Distortion,
    /// `E‖Z‖` before normalization.
    pub scale: f64,
}

impl Distortion {
    pub fn avar(beta: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&beta) {
            return Err(Error::InvalidDistortion(format!("avar level {beta} not in [0, 1)")));
        }
        Ok(Distortion::AvarSpectrum { beta })
    }

    pub fn power(s: f64) -> Result<Self> {
        if !s.is_finite() || s < 1.0 {
            return Err(Error::InvalidDistortion(format!("power exponent {s} must be finite and >= 1")));
        }
        Ok(Distortion::Power { s })
    }

    pub fn step(breakpoints: Vec<f64>, levels: Vec<f64>) -> Result<Self> {
        StepDistortion::new(breakpoints, levels).map(Distortion::Step)
    }

    /// `σ_Z := F^{-1}_{‖Z‖} / E‖Z‖` as a step distortion.
    pub fn from_sample(z: &RandomVector, norm: &VecNorm) -> Result<SampleDistortion> {
        let mags = z.magnitudes(norm);
        let scale = expectation(&mags, z.space())?;
        if scale <= 0.0 {
            return Err(Error::ZeroVariable);
        }
        let q = quantile(&mags, z.space())?;
        let levels = q.values().iter().map(|v| v / scale).collect();
        let distortion = Distortion::step(q.breakpoints().to_vec(), levels)?;
        Ok(SampleDistortion { distortion, scale })
    }

    /// Families whose envelope hull needs no probing: `σ` piecewise constant.
    pub fn is_piecewise_constant(&self) -> bool {
        matches!(self, Distortion::Constant | Distortion::AvarSpectrum { .. } | Distortion::Step(_))
    }

    /// `σ(u)` on `[0, 1]` (left-continuous; `σ(1)` is the left limit).
    pub fn sigma_at(&self, u: f64) -> Result<f64> {
        check_unit("u", u)?;
        Ok(self.sigma(u))
    }

    pub(crate) fn sigma(&self, u: f64) -> f64 {
        match self {
            Distortion::Constant => 1.0,
            Distortion::AvarSpectrum { beta } => {
                if u > *beta {
                    1.0 / (1.0 - beta)
                } else {
                    0.0
                }
            }
            Distortion::Power { s } => {
                if *s == 1.0 {
                    1.0
                } else {
                    s * u.powf(s - 1.0)
                }
            }
            Distortion::Log => -(1.0 - u).ln(),
            Distortion::Step(st) => {
                let k = st.breakpoints[1..].partition_point(|b| *b < u);
                st.levels[k.min(st.levels.len() - 1)]
            }
        }
    }

    /// `S(α) = ∫_α^1 σ(u) du`, checked.
    pub fn tail_at(&self, alpha: f64) -> Result<f64> {
        check_unit("alpha", alpha)?;
        Ok(self.tail(alpha))
    }

    /// `S(α)`. Exactly 1 on `[0, u₀]` and exactly 0 at 1.
    pub fn tail(&self, alpha: f64) -> f64 {
        if alpha >= 1.0 {
            return 0.0;
        }
        if alpha <= self.u0() {
            return 1.0;
        }
        self.integral(alpha, 1.0).clamp(0.0, 1.0)
    }

    /// `∫_a^b σ(u) du`, checked.
    pub fn integral_sigma(&self, a: f64, b: f64) -> Result<f64> {
        check_unit("a", a)?;
        check_unit("b", b)?;
        if a > b {
            return Err(Error::OutOfRange { name: "a - b", value: a - b });
        }
        Ok(self.integral(a, b))
    }

    /// `∫_a^b σ(u) du` for `0 ≤ a ≤ b ≤ 1`, closed form.
    pub fn integral(&self, a: f64, b: f64) -> f64 {
        if b <= a {
            return 0.0;
        }
        match self {
            Distortion::Constant => b - a,
            Distortion::AvarSpectrum { beta } => (b.min(1.0) - a.max(*beta)).max(0.0) / (1.0 - beta),
            Distortion::Power { s } => {
                if *s == 1.0 {
                    b - a
                } else {
                    b.powf(*s) - a.powf(*s)
                }
            }
            Distortion::Log => (log_antiderivative(a) - log_antiderivative(b)).max(0.0),
            Distortion::Step(st) => st
                .pieces()
                .filter(|(lo, hi, _)| *hi > a && *lo < b)
                .map(|(lo, hi, l)| l * (hi.min(b) - lo.max(a)))
                .sum(),
        }
    }

    /// `∫_0^1 σ(u)^r du` for `r ≥ 1`; `+∞` is never produced by the
    /// supported families but is representable.
    pub fn power_integral(&self, r: f64) -> Result<f64> {
        if r.is_nan() || r < 1.0 {
            return Err(Error::InvalidExponent(r));
        }
        Ok(match self {
            Distortion::Constant => 1.0,
            Distortion::AvarSpectrum { beta } => (1.0 - beta).powf(1.0 - r),
            Distortion::Power { s } => s.powf(r) / (r * (s - 1.0) + 1.0),
            Distortion::Log => statrs::function::gamma::gamma(r + 1.0),
            Distortion::Step(st) => st.pieces().map(|(lo, hi, l)| l.powf(r) * (hi - lo)).sum(),
        })
    }

    pub fn is_bounded(&self) -> bool {
        !matches!(self, Distortion::Log)
    }

    /// `sup σ`, if finite.
    pub fn sup(&self) -> Option<f64> {
        match self {
            Distortion::Constant => Some(1.0),
            Distortion::AvarSpectrum { beta } => Some(1.0 / (1.0 - beta)),
            Distortion::Power { s } => Some(*s),
            Distortion::Log => None,
            Distortion::Step(st) => st.levels.last().copied(),
        }
    }

    /// `u₀ = inf{u > 0 : σ(u) > 0}`.
    pub fn u0(&self) -> f64 {
        match self {
            Distortion::AvarSpectrum { beta } => *beta,
            Distortion::Step(st) => st.u0(),
            _ => 0.0,
        }
    }

    /// Inverse of `S` restricted to `[u₀, 1]`: the `α ∈ [u₀, 1]` with
    /// `S(α) = t`.
    pub fn inverse_tail(&self, t: f64) -> Result<f64> {
        check_unit("t", t)?;
        Ok(match self {
            Distortion::Constant => 1.0 - t,
            Distortion::AvarSpectrum { beta } => 1.0 - t * (1.0 - beta),
            Distortion::Power { s } => (1.0 - t).powf(1.0 / s),
            Distortion::Log => {
                // S is strictly decreasing on [0, 1]
                let (mut lo, mut hi) = (0.0f64, 1.0f64);
                while hi - lo > INVERSE_TOL {
                    let mid = 0.5 * (lo + hi);
                    if self.tail(mid) > t {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                0.5 * (lo + hi)
            }
            Distortion::Step(st) => {
                if t >= 1.0 {
                    return Ok(st.u0());
                }
                let mut upper = 0.0;
                let mut alpha = 1.0;
                for (lo, hi, l) in st.pieces().collect::<Vec<_>>().into_iter().rev() {
                    let mass = l * (hi - lo);
                    if upper + mass >= t && l > 0.0 {
                        alpha = hi - (t - upper) / l;
                        break;
                    }
                    upper += mass;
                    alpha = lo;
                }
                alpha.max(st.u0())
            }
        })
    }
}

/// `∫_a^1 -log(1-u) du = (1-a)(1 - log(1-a))`.
fn log_antiderivative(a: f64) -> f64 {
    let v = 1.0 - a;
    if v <= 0.0 {
        0.0
    } else {
        v * (1.0 - v.ln())
    }
}

fn check_unit(name: &'static str, value: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&value) {
        return Err(Error::OutOfRange { name, value });
    }
    Ok(())
}

impl fmt::Display for Distortion {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distortion::Constant => write!(f, "constant"),
            Distortion::AvarSpectrum { beta } => write!(f, "avar:{beta}"),
            Distortion::Power { s } => write!(f, "power:{s}"),
            Distortion::Log => write!(f, "log"),
            Distortion::Step(st) => {
                write!(f, "step:")?;
                for (k, (_, hi, l)) in st.pieces().enumerate() {
                    if k > 0 {
                        write!(f, ";")?;
                    }
                    write!(f, "{hi},{l}")?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Distortion {
    type Err = Error;

    /// `constant`, `avar:<beta>`, `power:<s>`, `log`, or
    /// `step:<b1,l1;b2,l2;...>` where level `l_k` holds on `(b_{k-1}, b_k]`
    /// and the last breakpoint is 1.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (head, arg) = match s.split_once(':') {
            Some((h, a)) => (h.trim(), Some(a.trim())),
            None => (s, None),
        };
        let number = |a: Option<&str>| -> Result<f64> {
            a.ok_or_else(|| Error::InvalidDistortion(format!("`{head}` needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidDistortion(format!("`{s}`: {e}")))
        };
        match head.to_ascii_lowercase().as_str() {
            "constant" if arg.is_none() => Ok(Distortion::Constant),
            "log" if arg.is_none() => Ok(Distortion::Log),
            "avar" => Distortion::avar(number(arg)?),
            "power" => Distortion::power(number(arg)?),
            "step" => {
                let body = arg.ok_or_else(|| Error::InvalidDistortion("`step` needs pieces".into()))?;
                let mut breakpoints = vec![0.0];
                let mut levels = Vec::new();
                for piece in body.split(';').map(str::trim).filter(|p| !p.is_empty()) {
                    let (b, l) = piece
                        .split_once(',')
                        .ok_or_else(|| Error::InvalidDistortion(format!("step piece `{piece}` is not `b,l`")))?;
                    let parse = |x: &str| {
                        x.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::InvalidDistortion(format!("step piece `{piece}`: {e}")))
                    };
                    breakpoints.push(parse(b)?);
                    levels.push(parse(l)?);
                }
                Distortion::step(breakpoints, levels)
            }
            _ => Err(Error::InvalidDistortion(format!("unknown distortion `{s}`"))),
        }
    }
}
