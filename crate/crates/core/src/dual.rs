//! Dual norms `|Z|*_{σ,∞}` (pairing with `p = 1`) and `|Z|*_{σ,q}`
//! (`p > 1`), σ-dominance, average value-at-risk and the certificates
//! that justify each dual value.
//!
//! Vector-valued `Z` is handled through its magnitudes `‖z_i‖_{r*}` in the
//! dual vector norm; witnesses are turned back into vectors by aligning
//! each row with `z_i`.

use serde::{Serialize, Serializer};

use crate::distortion::Distortion;
use crate::envelope::{concave_majorant, extract_h, TailTransform};
use crate::error::{Error, Result};
use crate::norm::norm;
use crate::space::{coarsen, comonotone_slots, quantile, quantile_with_segments, FiniteSpace, Partition, RandomVector};
use crate::tol;
use crate::vecnorm::VecNorm;

fn check_alpha(alpha: f64) -> Result<()> {
    if !(0.0..1.0).contains(&alpha) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha });
    }
    Ok(())
}

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

fn abs_values(z: &RandomVector) -> Result<Vec<f64>> {
    Ok(z.scalar_values()?.iter().map(|v| v.abs()).collect())
}

/// `AV@R_α(|Z|) = (1-α)^{-1} ∫_α^1 F^{-1}_{|Z|}`.
pub fn avar(z: &RandomVector, alpha: f64) -> Result<f64> {
    check_alpha(alpha)?;
    let q = quantile(&abs_values(z)?, z.space())?;
    Ok(q.tail_integral(alpha) / (1.0 - alpha))
}

/// An event of probability `1-α` on which `|Z|` averages to `AV@R_α`.
#[derive(Debug, Clone)]
pub struct AvarSuperset {
    /// The space after splitting at most one atom in two.
    pub space: FiniteSpace,
    /// `Z` carried over to `space`.
    pub z: RandomVector,
    /// Membership in the event, per atom of `space`.
    pub members: Vec<bool>,
    /// Atom of the input space each new atom came from.
    pub origin: Vec<usize>,
    pub value: f64,
}

/// Builds the event from the upper `1-α` slots of the coupling comonotone
/// with `|Z|`; the atom whose slot straddles `α` is split.
pub fn avar_superset(z: &RandomVector, alpha: f64) -> Result<AvarSuperset> {
    check_alpha(alpha)?;
    let mags = abs_values(z)?;
    let slots = comonotone_slots(&mags, z.space())?;
    let vals = z.scalar_values()?;
    let mut weights = Vec::with_capacity(z.len() + 1);
    let mut members = Vec::with_capacity(z.len() + 1);
    let mut origin = Vec::with_capacity(z.len() + 1);
    for (i, &(a, b)) in slots.slots().iter().enumerate() {
        if b <= alpha {
            weights.push(b - a);
            members.push(false);
            origin.push(i);
        } else if a >= alpha {
            weights.push(b - a);
            members.push(true);
            origin.push(i);
        } else {
            weights.extend([alpha - a, b - alpha]);
            members.extend([false, true]);
            origin.extend([i, i]);
        }
    }
    let space = FiniteSpace::new(weights)?;
    let lifted = RandomVector::scalar(space.clone(), origin.iter().map(|&i| vals[i]).collect())?;
    let mass: f64 = origin
        .iter()
        .zip(&members)
        .zip(space.weights())
        .filter(|((_, m), _)| **m)
        .map(|((&i, _), w)| w * mags[i])
        .sum();
    Ok(AvarSuperset { space, z: lifted, members, origin, value: mass / (1.0 - alpha) })
}

/// Output of a dual-norm computation together with the objects proving it.
///
/// `pairing / ‖witness‖_{σ,p}` bounds the dual norm from below and
/// `upper` (the norm of the dominating envelope) from above.
#[derive(Debug, Clone)]
pub struct DualityCertificate {
    pub dual_value: f64,
    pub pairing: f64,
    pub upper: f64,
    pub gap: f64,
    pub approximation_bound: f64,
    /// `Z′`, σ-dominating `‖Z‖`, scalar, same space as `Z`.
    pub envelope: RandomVector,
    /// `Y` attaining the pairing, same shape as `Z`.
    pub witness: RandomVector,
    pub witness_norm: f64,
    pub p: f64,
}

impl DualityCertificate {
    /// Allowed gap: `1e-9` (relative above 1) plus the approximation bound.
    pub fn allowed_gap(&self) -> f64 {
        tol::CERT_TOL * tol::scale(self.upper, self.dual_value) + self.approximation_bound
    }

    pub fn is_tight(&self) -> bool {
        self.gap <= self.allowed_gap()
            && tol::le(self.pairing, self.dual_value * self.witness_norm, tol::CERT_TOL)
            && self.dual_value <= self.upper + self.allowed_gap()
    }

    fn checked(self) -> Result<Self> {
        if self.is_tight() {
            Ok(self)
        } else {
            Err(Error::CertificateGap { gap: self.gap, allowed: self.allowed_gap(), certificate: Box::new(self) })
        }
    }
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    dual_value: f64,
    pairing: f64,
    upper: f64,
    gap: f64,
    approximation_bound: f64,
    envelope: &'a [f64],
    witness: Vec<&'a [f64]>,
}

impl Serialize for DualityCertificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        CertificateJson {
            dual_value: self.dual_value,
            pairing: self.pairing,
            upper: self.upper,
            gap: self.gap,
            approximation_bound: self.approximation_bound,
            envelope: self.envelope.flat(),
            witness: self.witness.rows().collect(),
        }
        .serialize(serializer)
    }
}

/// `η = max_{c_k < 1} G(c_k)/S(c_k)` and the maximizing step index.
fn inf_dual_parts(g: &TailTransform, sigma: &Distortion) -> (f64, usize) {
    let b = g.quantile().breakpoints();
    let mut best = (0.0, 0);
    for k in 0..b.len() - 1 {
        let ratio = g.values()[k] / sigma.tail(b[k]);
        if ratio > best.0 {
            best = (ratio, k);
        }
    }
    best
}

/// `|Z|*_{σ,∞} = sup_α G(α)/S(α)`, the dual norm for `p = 1`.
pub fn dual_norm_inf(z: &RandomVector, sigma: &Distortion) -> Result<f64> {
    let g = TailTransform::from_magnitudes(&abs_values(z)?, z.space())?;
    Ok(inf_dual_parts(&g, sigma).0)
}

/// Dual norm with certificate for scalar `Z` and `p > 1`.
pub fn dual_norm_q(z: &RandomVector, sigma: &Distortion, p: f64) -> Result<DualityCertificate> {
    z.scalar_values()?;
    if p <= 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    vector_dual_norm(z, sigma, p, &VecNorm::L2)
}

/// The dual norm of `Z` against `(L^p_σ, ‖·‖_r)` with certificate, for
/// any `p ≥ 1` and dimension.
pub fn vector_dual_norm(z: &RandomVector, sigma: &Distortion, p: f64, vecnorm: &VecNorm) -> Result<DualityCertificate> {
    check_p(p)?;
    let space = z.space();
    let mags = z.magnitudes(&vecnorm.dual());
    let (_, segment) = quantile_with_segments(&mags, space)?;
    let g = TailTransform::from_magnitudes(&mags, space)?;

    let (dual_value, envelope, witness_mag, upper, approximation_bound) = if p == 1.0 {
        let (eta, k_star) = inf_dual_parts(&g, sigma);
        let witness: Vec<f64> = segment.iter().map(|&k| if k >= k_star { 1.0 } else { 0.0 }).collect();
        (eta, vec![eta; mags.len()], witness, eta, 0.0)
    } else {
        let q = p / (p - 1.0);
        let hull = concave_majorant(&g, sigma)?;
        let h = extract_h(&hull, &g, sigma);
        let dual_value = h.q_norm(sigma, q);
        let envelope: Vec<f64> = segment.iter().map(|&k| h.levels()[k]).collect();
        // H^{q-1}; any positive multiple also attains, so rescale by max H
        // when the plain power overflows
        let top = envelope.iter().fold(0.0f64, |m, e| m.max(*e));
        let witness = if top.powf(q - 1.0).is_finite() {
            envelope.iter().map(|e| e.powf(q - 1.0)).collect()
        } else {
            envelope.iter().map(|e| (e / top).powf(q - 1.0)).collect()
        };
        let zp = RandomVector::scalar(space.clone(), envelope.clone())?;
        let upper = norm(&zp, sigma, q, &VecNorm::L2)?;
        (dual_value, envelope, witness, upper, hull.approximation_bound())
    };

    let mut rows = Vec::with_capacity(z.len() * z.dim());
    for (row, m) in z.rows().zip(&witness_mag) {
        let mut u = vecnorm.aligned_unit(row);
        if u.iter().all(|x| *x == 0.0) {
            u[0] = 1.0;
        }
        rows.extend(u.iter().map(|x| m * x));
    }
    let witness = RandomVector::from_flat(space.clone(), z.dim(), rows)?;
    let witness_norm = norm(&witness, sigma, p, vecnorm)?;
    let pairing = pairing(z, &witness)?;
    let lower = if witness_norm > 0.0 { pairing / witness_norm } else { 0.0 };
    DualityCertificate {
        dual_value,
        pairing,
        upper,
        gap: upper - lower,
        approximation_bound,
        envelope: RandomVector::scalar(space.clone(), envelope)?,
        witness,
        witness_norm,
        p,
    }
    .checked()
}

/// Dual norm value only; `vecnorm` is the primal vector norm.
pub fn dual_norm(z: &RandomVector, sigma: &Distortion, p: f64, vecnorm: &VecNorm) -> Result<f64> {
    check_p(p)?;
    if p == 1.0 {
        let g = TailTransform::from_magnitudes(&z.magnitudes(&vecnorm.dual()), z.space())?;
        return Ok(inf_dual_parts(&g, sigma).0);
    }
    vector_dual_norm(z, sigma, p, vecnorm).map(|c| c.dual_value)
}

/// Outcome of a σ-dominance check; `margin` is `min_α D(α)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Dominance {
    pub holds: bool,
    pub margin: f64,
}

/// Whether `Z′` σ-dominates `Z`, i.e.
/// `D(α) = ∫_α^1 σ F^{-1}_{|Z′|} - ∫_α^1 F^{-1}_{|Z|} ≥ 0` for all `α`.
///
/// Between merged breakpoints `D′ = v - v′σ` is nonincreasing, so `D` is
/// concave there and its minimum sits at a breakpoint.
pub fn sigma_dominates(zp: &RandomVector, z: &RandomVector, sigma: &Distortion) -> Result<Dominance> {
    let qp = quantile(&abs_values(zp)?, zp.space())?;
    let qz = quantile(&abs_values(z)?, z.space())?;
    let mut points: Vec<f64> = qp.breakpoints().iter().chain(qz.breakpoints()).copied().collect();
    points.sort_by(f64::total_cmp);
    points.dedup();
    let d = |a: f64| qp.weighted_tail(sigma, a, 1.0) - qz.tail_integral(a);
    let margin = points.iter().map(|&a| d(a)).fold(f64::INFINITY, f64::min);
    let scale = tol::scale(qp.weighted_tail(sigma, 0.0, 1.0), qz.tail_integral(0.0));
    Ok(Dominance { holds: margin >= -tol::NORM_TOL * scale, margin })
}

/// `E⟨Z, Y⟩ = Σ w_i ⟨z_i, y_i⟩`.
pub fn pairing(z: &RandomVector, y: &RandomVector) -> Result<f64> {
    if !z.space().same_as(y.space()) {
        return Err(Error::SpaceMismatch);
    }
    if z.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), found: y.dim() });
    }
    Ok(z.rows()
        .zip(y.rows())
        .zip(z.space().weights())
        .map(|((a, b), w)| w * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>())
        .sum())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Contraction {
    pub before: f64,
    pub after: f64,
    pub holds: bool,
}

/// Dual norm of `Z` and of `E(Z | 𝔉)` for the partition's σ-algebra.
pub fn dual_contraction_under_coarsening(
    z: &RandomVector,
    sigma: &Distortion,
    p: f64,
    vecnorm: &VecNorm,
    part: &Partition,
) -> Result<Contraction> {
    let before = dual_norm(z, sigma, p, vecnorm)?;
    let after = dual_norm(&coarsen(z, part)?, sigma, p, vecnorm)?;
    Ok(Contraction { before, after, holds: tol::le(after, before, tol::CERT_TOL) })
}
