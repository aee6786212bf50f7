//! Maximal correlation risk `ρ_Z(Y) = sup_{Y′ ~ Y} E⟨Z, Y′⟩`, its Lipschitz
//! bound in `‖·‖_{σ_Z,p}` and the chain of upper bounds for it.

use serde::Serialize;

use crate::assignment::max_gain_assignment;
use crate::distortion::Distortion;
use crate::dual::pairing;
use crate::error::{Error, Result};
use crate::norm::norm;
use crate::space::{ascending_order, expectation, quantile, RandomVector, StepQuantile};
use crate::tol;
use crate::vecnorm::VecNorm;

/// Sum in a canonical order (ascending terms), so equal multisets of
/// terms give bit-identical totals.
fn canonical_sum(mut terms: Vec<f64>) -> f64 {
    terms.sort_by(f64::total_cmp);
    terms.iter().sum()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `(1/n) Σ_i ⟨z_i, y_{perm[i]}⟩` over equal weights.
pub(crate) fn assignment_value(z: &RandomVector, y: &RandomVector, perm: &[usize]) -> f64 {
    let terms = perm.iter().enumerate().map(|(i, &j)| dot(z.row(i), y.row(j))).collect();
    canonical_sum(terms) / z.len() as f64
}

/// `∫_0^1 F_a^{-1} F_b^{-1}` over the merged breakpoints.
fn quantile_product(a: &StepQuantile, b: &StepQuantile) -> f64 {
    let mut points: Vec<f64> = a.breakpoints().iter().chain(b.breakpoints()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    points
        .windows(2)
        .map(|w| {
            let mid = 0.5 * (w[0] + w[1]);
            a.eval(mid) * b.eval(mid) * (w[1] - w[0])
        })
        .sum()
}

/// `ρ_Z(Y) = ∫ F^{-1}_Z F^{-1}_Y` for scalar, possibly signed `Z` and `Y`.
/// The two variables may live on different spaces.
pub fn rho_scalar(z: &RandomVector, y: &RandomVector) -> Result<f64> {
    let zv = z.scalar_values()?;
    let yv = y.scalar_values()?;
    if z.space().is_uniform() && y.space().is_uniform() && z.len() == y.len() {
        let (oz, oy) = (ascending_order(zv), ascending_order(yv));
        let terms = oz.iter().zip(&oy).map(|(&i, &j)| zv[i] * yv[j]).collect();
        return Ok(canonical_sum(terms) / z.len() as f64);
    }
    Ok(quantile_product(&quantile(zv, z.space())?, &quantile(yv, y.space())?))
}

fn check_equal_weights(z: &RandomVector, y: &RandomVector) -> Result<()> {
    if !z.space().is_uniform() || !y.space().is_uniform() {
        return Err(Error::UnequalWeights);
    }
    if z.len() != y.len() {
        return Err(Error::LengthMismatch { expected: z.len(), found: y.len() });
    }
    if z.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), found: y.dim() });
    }
    Ok(())
}

/// `ρ_Z(Y)` for equal-weight laws of any dimension, with the optimal
/// permutation: atom `i` of `Z` is paired with atom `perm[i]` of `Y`.
pub fn rho_assignment(z: &RandomVector, y: &RandomVector) -> Result<(f64, Vec<usize>)> {
    check_equal_weights(z, y)?;
    let n = z.len();
    let perm = if z.dim() == 1 {
        let (oz, oy) = (ascending_order(z.flat()), ascending_order(y.flat()));
        let mut perm = vec![0; n];
        for (&i, &j) in oz.iter().zip(&oy) {
            perm[i] = j;
        }
        perm
    } else {
        let mut gain = Vec::with_capacity(n * n);
        for i in 0..n {
            gain.extend((0..n).map(|j| dot(z.row(i), y.row(j))));
        }
        max_gain_assignment(&gain, n)
    };
    Ok((assignment_value(z, y, &perm), perm))
}

fn rho(z: &RandomVector, y: &RandomVector) -> Result<f64> {
    if z.dim() == 1 && y.dim() == 1 && !(z.space().is_uniform() && y.space().is_uniform()) {
        return rho_scalar(z, y);
    }
    rho_assignment(z, y).map(|(r, _)| r)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LipschitzCheck {
    /// `|ρ(Y₁) - ρ(Y₂)|` with `Z` normalized to `E‖Z‖_* = 1`.
    pub lhs: f64,
    /// `‖Y₁ - Y₂‖_{σ_Z,p}`.
    pub rhs: f64,
    /// `E‖Z‖_*` before normalization.
    pub scale: f64,
    pub holds: bool,
}

/// `|ρ_Z(Y₁) - ρ_Z(Y₂)| ≤ ‖Y₁ - Y₂‖_{σ_Z,p}` with
/// `σ_Z = F^{-1}_{‖Z‖_*} / E‖Z‖_*` and `‖·‖_*` dual to `vecnorm`.
pub fn lipschitz_check(
    z: &RandomVector,
    y1: &RandomVector,
    y2: &RandomVector,
    p: f64,
    vecnorm: &VecNorm,
) -> Result<LipschitzCheck> {
    let sample = Distortion::from_sample(z, &vecnorm.dual())?;
    let zn = z.scaled(1.0 / sample.scale);
    let lhs = (rho(&zn, y1)? - rho(&zn, y2)?).abs();
    let rhs = norm(&y1.sub(y2)?, &sample.distortion, p, vecnorm)?;
    Ok(LipschitzCheck { lhs, rhs, scale: sample.scale, holds: tol::le(lhs, rhs, tol::CERT_TOL) })
}

/// The upper bounds for `E⟨Z, Y⟩` in increasing order.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundChain {
    /// `|E⟨Z, Y⟩|`
    pub pairing: f64,
    /// `E(‖Z‖_{r*} ‖Y‖_r)`
    pub dual_product: f64,
    /// `K E(‖Z‖_1 ‖Y‖_r)`
    pub l1_product: f64,
    /// `K ∫ F^{-1}_{‖Z‖_1} F^{-1}_{‖Y‖_r}`; also bounds `ρ_Z(Y)`.
    pub quantile_product: f64,
    /// Smallest `K` with `‖x‖_{r*} ≤ K ‖x‖_1`.
    pub k: f64,
    pub holds: bool,
}

impl BoundChain {
    pub fn terms(&self) -> [f64; 4] {
        [self.pairing, self.dual_product, self.l1_product, self.quantile_product]
    }
}

pub fn bound_chain(z: &RandomVector, y: &RandomVector, vecnorm: &VecNorm) -> Result<BoundChain> {
    let pair = pairing(z, y)?.abs();
    let space = z.space();
    let dual = vecnorm.dual();
    let k = dual.l1_constant(z.dim());
    let zd = z.magnitudes(&dual);
    let z1 = z.magnitudes(&VecNorm::L1);
    let yr = y.magnitudes(vecnorm);
    let prod = |a: &[f64]| -> Result<f64> {
        expectation(&a.iter().zip(&yr).map(|(x, y)| x * y).collect::<Vec<_>>(), space)
    };
    let dual_product = prod(&zd)?;
    let l1_product = k * prod(&z1)?;
    let quantile_product = k * quantile_product(&quantile(&z1, space)?, &quantile(&yr, space)?);
    let holds = tol::le(pair, dual_product, tol::CERT_TOL)
        && tol::le(dual_product, l1_product, tol::CERT_TOL)
        && tol::le(l1_product, quantile_product, tol::CERT_TOL);
    Ok(BoundChain { pairing: pair, dual_product, l1_product, quantile_product, k, holds })
}

/// `ρ_Z(Y)` with the bound chain and, given `p`, the Lipschitz radius
/// `E‖Z‖_* · ‖Y‖_{σ_Z,p}` bounding `|ρ_Z(Y)|`.
#[derive(Debug, Clone, Serialize)]
pub struct RiskReport {
    pub rho: f64,
    pub permutation: Option<Vec<usize>>,
    pub bound_chain: BoundChain,
    pub lipschitz_rhs: Option<f64>,
    #[serde(rename = "K")]
    pub k: f64,
    /// `ρ_Z(Y) ≤ K ∫ F^{-1}_{‖Z‖_1} F^{-1}_{‖Y‖_r}` and, when present,
    /// `|ρ_Z(Y)| ≤ lipschitz_rhs`.
    pub holds: bool,
}

impl RiskReport {
    pub fn new(z: &RandomVector, y: &RandomVector, vecnorm: &VecNorm, p: Option<f64>) -> Result<Self> {
        let (rho, permutation) = if z.space().is_uniform() && y.space().is_uniform() {
            let (r, perm) = rho_assignment(z, y)?;
            (r, Some(perm))
        } else if z.dim() == 1 && y.dim() == 1 {
            (rho_scalar(z, y)?, None)
        } else {
            return Err(Error::UnequalWeights);
        };
        let chain = bound_chain(z, y, vecnorm)?;
        let lipschitz_rhs = match p {
            Some(p) => {
                let sample = Distortion::from_sample(z, &vecnorm.dual())?;
                Some(sample.scale * norm(y, &sample.distortion, p, vecnorm)?)
            }
            None => None,
        };
        let holds = tol::le(rho, chain.quantile_product, tol::CERT_TOL)
            && lipschitz_rhs.is_none_or(|r| tol::le(rho.abs(), r, tol::CERT_TOL));
        Ok(RiskReport { rho, permutation, bound_chain: chain, lipschitz_rhs, k: chain.k, holds })
    }
}
