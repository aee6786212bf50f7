//! The primal norm `‖Y‖_{σ,p}` and the comparison inequalities around it.
//!
//! For a finite space the supremum over uniforms `U` of `E σ(U)‖Y‖^p` is
//! attained by the coupling comonotone with `‖Y‖`, which turns the norm
//! into a finite sum over the steps of the quantile of `‖Y‖`:
//! `‖Y‖^p_{σ,p} = Σ_k v_k^p (S(c_{k-1}) - S(c_k))`.

use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::space::{p_norm, quantile, FiniteSpace, RandomVector, SlotCoupling};
use crate::tol;
use crate::vecnorm::VecNorm;

fn check_p(p: f64) -> Result<()> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    Ok(())
}

/// `‖Y‖_{σ,p}` from per-atom magnitudes. Terms are divided by the largest
/// magnitude first so that large `p` cannot overflow.
pub(crate) fn norm_of_magnitudes(mags: &[f64], space: &FiniteSpace, sigma: &Distortion, p: f64) -> Result<f64> {
    let q = quantile(mags, space)?;
    let top = q.values()[q.num_segments() - 1];
    if top == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = q.segments().map(|(lo, hi, v)| (v / top).powf(p) * sigma.integral(lo, hi)).sum();
    Ok(top * total.powf(1.0 / p))
}

/// `‖Y‖_{σ,p}` for `p ∈ [1, ∞)`, exact for every distortion family.
pub fn norm(y: &RandomVector, sigma: &Distortion, p: f64, vecnorm: &VecNorm) -> Result<f64> {
    check_p(p)?;
    norm_of_magnitudes(&y.magnitudes(vecnorm), y.space(), sigma, p)
}

/// `(E σ(U)‖Y‖^p)^{1/p}` for the uniform `U` described by `slots`.
pub fn norm_via_coupling(
    y: &RandomVector,
    sigma: &Distortion,
    p: f64,
    vecnorm: &VecNorm,
    slots: &SlotCoupling,
) -> Result<f64> {
    check_p(p)?;
    if slots.len() != y.len() {
        return Err(Error::InvalidCoupling(format!("{} slots for {} atoms", slots.len(), y.len())));
    }
    for (i, ((a, b), w)) in slots.slots().iter().zip(y.space().weights()).enumerate() {
        if (b - a - w).abs() > 1e-12 {
            return Err(Error::InvalidCoupling(format!("slot {i} has length {} but atom weight {w}", b - a)));
        }
    }
    let mags = y.magnitudes(vecnorm);
    let top = mags.iter().fold(0.0f64, |m, v| m.max(*v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let total: f64 = mags.iter().zip(slots.sigma_masses(sigma)).map(|(m, s)| (m / top).powf(p) * s).sum();
    Ok(top * total.powf(1.0 / p))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PComparison {
    pub lower: f64,
    pub upper: f64,
    pub holds: bool,
}

/// `‖Y‖_{σ,p} ≤ ‖Y‖_{σ,p'}` for `p < p'`.
pub fn compare_p(y: &RandomVector, sigma: &Distortion, p: f64, p_prime: f64, vecnorm: &VecNorm) -> Result<PComparison> {
    check_p(p)?;
    check_p(p_prime)?;
    if p >= p_prime {
        return Err(Error::InvalidExponent(p_prime));
    }
    let lower = norm(y, sigma, p, vecnorm)?;
    let upper = norm(y, sigma, p_prime, vecnorm)?;
    Ok(PComparison { lower, upper, holds: tol::le(lower, upper, tol::NORM_TOL) })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HolderBound {
    /// `‖Y‖^p_{σ,p}`
    pub lhs: f64,
    /// `(∫σ^r)^{1/r} ‖Y‖_{p'}^p` with `r = p'/(p'-p)`
    pub rhs: f64,
    pub holds: bool,
}

/// Hölder bound `‖Y‖^p_{σ,p} ≤ (∫σ^r)^{1/r} (E‖Y‖^{p'})^{p/p'}`.
///
/// The constant `(∫σ^r)^{1/r}` is at least one, so this does not give
/// `‖Y‖_{σ,p} ≤ ‖Y‖_{p'}` without it.
pub fn holder_bound(y: &RandomVector, sigma: &Distortion, p: f64, p_prime: f64, vecnorm: &VecNorm) -> Result<HolderBound> {
    check_p(p)?;
    check_p(p_prime)?;
    if p >= p_prime {
        return Err(Error::InvalidExponent(p_prime));
    }
    let r = p_prime / (p_prime - p);
    let lhs = norm(y, sigma, p, vecnorm)?.powf(p);
    let rhs = sigma.power_integral(r)?.powf(1.0 / r) * p_norm(y, p_prime, vecnorm)?.powf(p);
    Ok(HolderBound { lhs, rhs, holds: tol::le(lhs, rhs, tol::NORM_TOL) })
}

/// Parallelogram-law defect for the disjoint indicators
/// `Y₁ = 1_E x₁`, `Y₂ = 1_{E^c} x₂` with `P(E) = α` and unit `x₁, x₂`:
/// `|½‖Y₁-Y₂‖² + ½‖Y₁+Y₂‖² - ‖Y₁‖² - ‖Y₂‖²|`, which equals
/// `|S(1-α)^{2/p} + S(α)^{2/p} - 1|`. Zero for every `α` only in the
/// Hilbert case `σ ≡ 1`, `p = 2`.
pub fn parallelogram_residual(sigma: &Distortion, p: f64, alpha: f64) -> Result<f64> {
    check_p(p)?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::OutOfRange { name: "alpha", value: alpha });
    }
    let space = FiniteSpace::new(vec![alpha, 1.0 - alpha])?;
    let y1 = RandomVector::scalar(space.clone(), vec![1.0, 0.0])?;
    let y2 = RandomVector::scalar(space, vec![0.0, 1.0])?;
    let n = |y: &RandomVector| norm(y, sigma, p, &VecNorm::L2).map(|v| v * v);
    let lhs = 0.5 * n(&y1.sub(&y2)?)? + 0.5 * n(&y1.add(&y2)?)?;
    Ok((lhs - n(&y1)? - n(&y2)?).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::comonotone_slots;

    #[test]
    fn constant_sigma_is_lp() {
        let s = FiniteSpace::new(vec![0.1, 0.2, 0.3, 0.4]).unwrap();
        let y = RandomVector::new(s, vec![vec![1.0, -2.0], vec![0.5, 0.0], vec![-3.0, 1.0], vec![2.0, 2.0]]).unwrap();
        for p in [1.0, 1.5, 2.0, 5.0] {
            let a = norm(&y, &Distortion::Constant, p, &VecNorm::L2).unwrap();
            let b = p_norm(&y, p, &VecNorm::L2).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn indicator_power_two() {
        let s = FiniteSpace::new(vec![0.7, 0.3]).unwrap();
        let y = RandomVector::new(s, vec![vec![0.0, 0.0], vec![2.0, 0.0]]).unwrap();
        let v = norm(&y, &Distortion::power(2.0).unwrap(), 1.0, &VecNorm::L2).unwrap();
        assert!((v - 1.02).abs() < 1e-14);
    }

    #[test]
    fn avar_half_picks_upper_half() {
        let y = RandomVector::scalar(FiniteSpace::uniform(4), vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let v = norm(&y, &Distortion::avar(0.5).unwrap(), 1.0, &VecNorm::L2).unwrap();
        assert!((v - 3.5).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_exponent() {
        let y = RandomVector::scalar(FiniteSpace::uniform(1), vec![1.0]).unwrap();
        assert!(matches!(norm(&y, &Distortion::Constant, 0.9, &VecNorm::L2), Err(Error::InvalidExponent(_))));
        assert!(norm(&y, &Distortion::Constant, f64::INFINITY, &VecNorm::L2).is_err());
    }

    #[test]
    fn coupling_examples() {
        let sp = FiniteSpace::uniform(4);
        let vals = vec![1.0, 4.0, 2.0, 3.0];
        let y = RandomVector::scalar(sp.clone(), vals.clone()).unwrap();
        let sigma = Distortion::power(2.0).unwrap();
        let co = comonotone_slots(&vals, &sp).unwrap();
        let exact = norm(&y, &sigma, 1.0, &VecNorm::L2).unwrap();
        assert!((norm_via_coupling(&y, &sigma, 1.0, &VecNorm::L2, &co).unwrap() - exact).abs() < 1e-14);

        let anti = SlotCoupling::from_order(&sp, &[1, 3, 2, 0]).unwrap();
        assert!(norm_via_coupling(&y, &sigma, 1.0, &VecNorm::L2, &anti).unwrap() < exact - 1e-3);

        let c1 = norm_via_coupling(&y, &Distortion::Constant, 2.0, &VecNorm::L2, &anti).unwrap();
        let c2 = norm_via_coupling(&y, &Distortion::Constant, 2.0, &VecNorm::L2, &co).unwrap();
        assert!((c1 - c2).abs() < 1e-14);

        let short = SlotCoupling::from_order(&FiniteSpace::uniform(3), &[0, 1, 2]).unwrap();
        assert!(norm_via_coupling(&y, &sigma, 1.0, &VecNorm::L2, &short).is_err());
    }

    #[test]
    fn compare_p_examples() {
        let y = RandomVector::scalar(FiniteSpace::uniform(2), vec![1.0, 3.0]).unwrap();
        let c = compare_p(&y, &Distortion::avar(0.5).unwrap(), 1.0, 2.0, &VecNorm::L2).unwrap();
        assert!((c.lower - 3.0).abs() < 1e-14 && (c.upper - 3.0).abs() < 1e-14 && c.holds);
        let k = RandomVector::scalar(FiniteSpace::uniform(3), vec![2.5; 3]).unwrap();
        let c = compare_p(&k, &Distortion::Log, 1.0, 3.0, &VecNorm::L2).unwrap();
        assert!((c.lower - 2.5).abs() < 1e-12 && (c.upper - 2.5).abs() < 1e-12);
        assert!(compare_p(&y, &Distortion::Log, 2.0, 2.0, &VecNorm::L2).is_err());
    }

    #[test]
    fn holder_examples() {
        let y = RandomVector::scalar(FiniteSpace::uniform(3), vec![1.0, -2.0, 5.0]).unwrap();
        let h = holder_bound(&y, &Distortion::Constant, 1.0, 2.0, &VecNorm::L2).unwrap();
        assert!((h.rhs - p_norm(&y, 2.0, &VecNorm::L2).unwrap()).abs() < 1e-14 && h.holds);
        let c = RandomVector::scalar(FiniteSpace::uniform(2), vec![3.0, 3.0]).unwrap();
        let h = holder_bound(&c, &Distortion::power(2.0).unwrap(), 1.0, 2.0, &VecNorm::L2).unwrap();
        assert!((h.lhs - 3.0).abs() < 1e-14);
        assert!((h.rhs - (4.0f64 / 3.0).sqrt() * 3.0).abs() < 1e-14 && h.holds);
    }

    #[test]
    fn parallelogram_examples() {
        for a in [0.1, 0.3, 0.5, 0.9] {
            assert!(parallelogram_residual(&Distortion::Constant, 2.0, a).unwrap() < 1e-15);
        }
        let p2 = Distortion::power(2.0).unwrap();
        // S(α) = 1 - α², so the defect is 2α(1-α)
        assert!((parallelogram_residual(&p2, 2.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!((parallelogram_residual(&p2, 2.0, 0.3).unwrap() - 0.42).abs() < 1e-14);
        assert!((parallelogram_residual(&Distortion::Constant, 1.0, 0.5).unwrap() - 0.5).abs() < 1e-14);
        assert!(parallelogram_residual(&p2, 2.0, 1.0).is_err());
    }

    #[test]
    fn log_sigma_is_not_bounded_by_l1() {
        let n = 10_000usize;
        let a = 1.0 / n as f64;
        let s = FiniteSpace::new(vec![1.0 - a, a]).unwrap();
        let y = RandomVector::scalar(s, vec![0.0, 1.0]).unwrap();
        let ratio = norm(&y, &Distortion::Log, 1.0, &VecNorm::L2).unwrap() / p_norm(&y, 1.0, &VecNorm::L2).unwrap();
        // S(1 - 1/n) n = 1 + log n
        assert!((ratio - (1.0 + (n as f64).ln())).abs() < 1e-6);
        assert!(ratio > 10.0);
    }
}
