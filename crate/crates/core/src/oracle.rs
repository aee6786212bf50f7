//! Brute-force cross-checks for the exact routines. Sizes are capped; the
//! point is to falsify the fast paths, not to scale.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::distortion::Distortion;
use crate::envelope::TailTransform;
use crate::error::{Error, Result};
use crate::risk::assignment_value;
use crate::space::{quantile, RandomVector};

pub const MAX_ENUMERATE: usize = 8;
pub const MAX_SEARCH: usize = 8;
pub const MAX_BICONJUGATE: usize = 6;
pub const DEFAULT_RESTARTS: usize = 10_000;

const GOLDEN: f64 = 0.618_033_988_749_894_9;

fn check_size(n: usize, max: usize) -> Result<()> {
    if n > max {
        return Err(Error::TooLarge { n, max });
    }
    Ok(())
}

/// Maximum of `(1/n) Σ ⟨z_i, y_{π(i)}⟩` over all `n!` permutations.
pub fn enumerate_rho(z: &RandomVector, y: &RandomVector) -> Result<f64> {
    if !z.space().is_uniform() || !y.space().is_uniform() {
        return Err(Error::UnequalWeights);
    }
    if z.len() != y.len() {
        return Err(Error::LengthMismatch { expected: z.len(), found: y.len() });
    }
    if z.dim() != y.dim() {
        return Err(Error::DimensionMismatch { expected: z.dim(), found: y.dim() });
    }
    let n = z.len();
    check_size(n, MAX_ENUMERATE)?;
    // Heap's algorithm
    let mut perm: Vec<usize> = (0..n).collect();
    let mut c = vec![0; n];
    let mut best = assignment_value(z, y, &perm);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                perm.swap(0, i);
            } else {
                perm.swap(c[i], i);
            }
            best = best.max(assignment_value(z, y, &perm));
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
    Ok(best)
}

/// Maximizes `f` on `[lo, hi]`, assuming `f` is unimodal there.
fn golden_max(mut f: impl FnMut(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let mut a = hi - GOLDEN * (hi - lo);
    let mut b = lo + GOLDEN * (hi - lo);
    let (mut fa, mut fb) = (f(a), f(b));
    while hi - lo > tol {
        if fa < fb {
            lo = a;
            a = b;
            fa = fb;
            b = lo + GOLDEN * (hi - lo);
            fb = f(b);
        } else {
            hi = b;
            b = a;
            fb = fa;
            a = hi - GOLDEN * (hi - lo);
            fa = f(a);
        }
    }
    // the endpoints are candidates too
    [(lo, f(lo)), (hi, f(hi)), (a, fa), (b, fb)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, c| if c.1 > best.1 { c } else { best })
}

/// Lower bound for the dual norm of scalar `Z` against `L^p_σ`, found by
/// searching witnesses `Y = sign(Z)·h(U)` with `U` comonotone with `|Z|`
/// and `h` nondecreasing and constant on the quantile steps of `|Z|`.
///
/// `h` is parametrized by nonnegative increments `t_j`, and each restart
/// runs coordinate ascent with a golden-section line search per increment.
pub fn search_dual_pairing(z: &RandomVector, sigma: &Distortion, p: f64, restarts: usize, seed: u64) -> Result<f64> {
    if !p.is_finite() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let mags: Vec<f64> = z.scalar_values()?.iter().map(|v| v.abs()).collect();
    check_size(mags.len(), MAX_SEARCH)?;
    let q = quantile(&mags, z.space())?;
    let m = q.num_segments();
    let b = q.breakpoints();
    let mass: Vec<f64> = q.segments().map(|(lo, hi, v)| v * (hi - lo)).collect();
    let ds: Vec<f64> = b.windows(2).map(|w| sigma.tail(w[0]) - sigma.tail(w[1])).collect();

    let objective = |t: &[f64]| -> f64 {
        let (mut num, mut den, mut h) = (0.0, 0.0, 0.0);
        for k in 0..m {
            h += t[k];
            num += mass[k] * h;
            den += ds[k] * h.powf(p);
        }
        if den <= 0.0 {
            return 0.0;
        }
        num / den.powf(1.0 / p)
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best = 0.0f64;
    for _ in 0..restarts.max(1) {
        let mut t: Vec<f64> = (0..m).map(|_| rng.random::<f64>()).collect();
        let mut value = objective(&t);
        for _sweep in 0..200 {
            let before = value;
            for j in 0..m {
                let top = 2.0 * t.iter().sum::<f64>() + 1.0;
                let mut trial = t.clone();
                let (x, fx) = golden_max(
                    |x| {
                        trial[j] = x;
                        objective(&trial)
                    },
                    0.0,
                    top,
                    1e-12 * top,
                );
                if fx >= value {
                    t[j] = x;
                    value = fx;
                }
            }
            // homogeneous of degree zero: rescale to keep the box meaningful
            let total: f64 = t.iter().sum();
            if total > 0.0 {
                t.iter_mut().for_each(|x| *x /= total);
            }
            if value - before <= 1e-15 * value.max(1.0) {
                break;
            }
        }
        best = best.max(value);
    }
    Ok(best)
}

/// `G_σ(α) = inf_{y ≥ 0} [y S(α) - G*_σ(y)]` with
/// `G*_σ(y) = inf_β [y S(β) - G(β)]`, both infima taken on grids.
///
/// The β grid is `beta_points` uniform points plus every quantile and
/// distortion breakpoint; the y grid has `y_points` points on
/// `[0, 4 max_β G(β)/S(β)]` and is refined by golden section.
pub fn grid_biconjugate(
    z: &RandomVector,
    sigma: &Distortion,
    alphas: &[f64],
    y_points: usize,
    beta_points: usize,
) -> Result<Vec<f64>> {
    let mags: Vec<f64> = z.scalar_values()?.iter().map(|v| v.abs()).collect();
    check_size(mags.len(), MAX_BICONJUGATE)?;
    let g = TailTransform::from_magnitudes(&mags, z.space())?;

    let mut betas: Vec<f64> = (0..beta_points.max(2)).map(|i| i as f64 / (beta_points.max(2) - 1) as f64).collect();
    betas.extend_from_slice(g.quantile().breakpoints());
    if let Distortion::Step(st) = sigma {
        betas.extend_from_slice(st.breakpoints());
    }
    betas.push(sigma.u0());
    betas.sort_by(f64::total_cmp);
    betas.dedup();
    let pts: Vec<(f64, f64)> = betas.iter().map(|&b| (sigma.tail(b), g.eval(b))).collect();

    let max_ratio = pts.iter().filter(|(s, _)| *s > 0.0).map(|(s, gv)| gv / s).fold(0.0, f64::max);
    if max_ratio == 0.0 {
        return Ok(vec![0.0; alphas.len()]);
    }
    let y_max = 4.0 * max_ratio;
    let conj = |y: f64| pts.iter().map(|(s, gv)| y * s - gv).fold(f64::INFINITY, f64::min);
    let ys: Vec<f64> = (0..y_points.max(2)).map(|i| y_max * i as f64 / (y_points.max(2) - 1) as f64).collect();
    let conj_grid: Vec<f64> = ys.iter().map(|&y| conj(y)).collect();

    Ok(alphas
        .iter()
        .map(|&a| {
            let s = sigma.tail(a);
            let (k, grid_min) = conj_grid
                .iter()
                .zip(&ys)
                .map(|(c, y)| y * s - c)
                .enumerate()
                .fold((0, f64::INFINITY), |best, (k, v)| if v < best.1 { (k, v) } else { best });
            let lo = ys[k.saturating_sub(1)];
            let hi = ys[(k + 1).min(ys.len() - 1)];
            let (_, neg) = golden_max(|y| -(y * s - conj(y)), lo, hi, 1e-13 * y_max);
            grid_min.min(-neg)
        })
        .collect())
}
