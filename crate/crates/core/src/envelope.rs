//! The `S_σ`-concave envelope of the tail transform `G(α) = ∫_α^1 F^{-1}_{|Z|}`.
//!
//! Reparametrizing by `t = S(α)` turns `S_σ`-concavity into ordinary
//! concavity: the envelope is `G_σ = Ĝ ∘ S` with `Ĝ` the least concave
//! majorant of the points `(S(α), G(α))`. Its slopes give the density `H`
//! with `G_σ(α) = ∫_α^1 H σ`.
//!
//! On a quantile step `G` is affine in `α` while `S^{-1}` is concave, so
//! `t ↦ G(S^{-1}(t))` is convex there. The majorant can therefore only
//! touch the curve at step endpoints and the hull over the breakpoints is
//! exact for every family. For non-piecewise-constant `σ` the hull is
//! additionally probed on a doubling interior grid and the largest excess
//! found is reported as the approximation bound.

use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::space::{quantile, FiniteSpace, RandomVector, StepQuantile};

const PROBES_START: usize = 64;
const PROBE_LIMIT: usize = 1 << 20;
const PROBE_TOL: f64 = 1e-9;

/// `G(α) = ∫_α^1 F^{-1}_{|Z|}(u) du`, piecewise linear between quantile
/// breakpoints.
#[derive(Debug, Clone)]
pub struct TailTransform {
    quantile: StepQuantile,
    values: Vec<f64>,
}

impl TailTransform {
    /// From nonnegative per-atom magnitudes.
    pub fn from_magnitudes(mags: &[f64], space: &FiniteSpace) -> Result<Self> {
        if let Some(i) = mags.iter().position(|m| *m < 0.0) {
            return Err(Error::OutOfRange { name: "magnitude", value: mags[i] });
        }
        let quantile = quantile(mags, space)?;
        let b = quantile.breakpoints();
        let v = quantile.values();
        let mut values = vec![0.0; b.len()];
        for k in (0..v.len()).rev() {
            values[k] = values[k + 1] + v[k] * (b[k + 1] - b[k]);
        }
        Ok(TailTransform { quantile, values })
    }

    pub fn quantile(&self) -> &StepQuantile {
        &self.quantile
    }

    /// `G(c_k)` at the quantile breakpoints.
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn eval(&self, alpha: f64) -> f64 {
        let b = self.quantile.breakpoints();
        if alpha <= 0.0 {
            return self.values[0];
        }
        if alpha >= 1.0 {
            return 0.0;
        }
        let k = b.partition_point(|c| *c <= alpha) - 1;
        self.values[k + 1] + self.quantile.values()[k] * (b[k + 1] - alpha)
    }
}

/// Tail transform of `|Z|` for a scalar variable.
pub fn build_g(z: &RandomVector) -> Result<TailTransform> {
    let mags: Vec<f64> = z.scalar_values()?.iter().map(|v| v.abs()).collect();
    TailTransform::from_magnitudes(&mags, z.space())
}

/// Points `(S(c_k), G(c_k))` and their upper concave hull.
#[derive(Debug, Clone)]
pub struct HullPoints {
    points: Vec<(f64, f64)>,
    vertices: Vec<(f64, f64)>,
    slopes: Vec<f64>,
    approximation_bound: f64,
    probes: usize,
}

impl HullPoints {
    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn vertices(&self) -> &[(f64, f64)] {
        &self.vertices
    }

    /// Slope of the hull segment `[t_j, t_{j+1}]`; nonincreasing in `j`.
    pub fn slopes(&self) -> &[f64] {
        &self.slopes
    }

    /// Largest excess of `G ∘ S^{-1}` over the hull seen at probe points
    /// (0 when no probing was needed).
    pub fn approximation_bound(&self) -> f64 {
        self.approximation_bound
    }

    pub fn probes(&self) -> usize {
        self.probes
    }

    /// Hull value `Ĝ(t)`.
    pub fn value(&self, t: f64) -> f64 {
        let v = &self.vertices;
        if t <= v[0].0 {
            return v[0].1;
        }
        if t >= v[v.len() - 1].0 {
            return v[v.len() - 1].1;
        }
        let j = self.segment_at(t);
        v[j].1 + self.slopes[j] * (t - v[j].0)
    }

    /// `G_σ(α) = Ĝ(S(α))`.
    pub fn envelope_at(&self, sigma: &Distortion, alpha: f64) -> f64 {
        self.value(sigma.tail(alpha))
    }

    fn segment_at(&self, t: f64) -> usize {
        let j = self.vertices.partition_point(|(vt, _)| *vt <= t);
        j.saturating_sub(1).min(self.slopes.len() - 1)
    }
}

fn upper_hull(points: &[(f64, f64)]) -> Vec<(f64, f64)> {
    let mut hull: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for &p in points {
        while hull.len() >= 2 {
            let o = hull[hull.len() - 2];
            let a = hull[hull.len() - 1];
            let cross = (a.0 - o.0) * (p.1 - o.1) - (a.1 - o.1) * (p.0 - o.0);
            if cross >= 0.0 {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(p);
    }
    hull
}

/// Least concave majorant of `t ↦ G(S^{-1}(t))` on `[0, 1]`.
pub fn concave_majorant(g: &TailTransform, sigma: &Distortion) -> Result<HullPoints> {
    let b = g.quantile().breakpoints();
    let mut points: Vec<(f64, f64)> = b.iter().zip(g.values()).map(|(c, gv)| (sigma.tail(*c), *gv)).collect();
    if sigma.u0() > 0.0 {
        // S ≡ 1 on [0, u₀]; the majorant there must clear max G = G(0)
        points.push((1.0, g.values()[0]));
    }
    points.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1)));
    // equal t: keep the highest point
    let mut dedup: Vec<(f64, f64)> = Vec::with_capacity(points.len());
    for p in points {
        match dedup.last_mut() {
            Some(last) if last.0 == p.0 => last.1 = last.1.max(p.1),
            _ => dedup.push(p),
        }
    }
    let points = dedup;
    let vertices = upper_hull(&points);
    let slopes = vertices
        .windows(2)
        .map(|w| ((w[1].1 - w[0].1) / (w[1].0 - w[0].0)).max(0.0))
        .collect();
    let mut hull = HullPoints { points, vertices, slopes, approximation_bound: 0.0, probes: 0 };
    if !sigma.is_piecewise_constant() {
        probe(&mut hull, g, sigma)?;
    }
    Ok(hull)
}

fn probe(hull: &mut HullPoints, g: &TailTransform, sigma: &Distortion) -> Result<()> {
    let scale = g.values()[0].max(1.0);
    let b = g.quantile().breakpoints();
    let mut per_segment = PROBES_START;
    let mut previous: Option<f64> = None;
    let mut total = 0usize;
    loop {
        let mut excess = 0.0f64;
        for w in b.windows(2) {
            for j in 1..per_segment {
                let alpha = w[0] + (w[1] - w[0]) * j as f64 / per_segment as f64;
                let t = sigma.tail(alpha);
                excess = excess.max(g.eval(alpha) - hull.value(t));
            }
        }
        total += (per_segment - 1) * (b.len() - 1);
        if let Some(prev) = previous {
            if (excess - prev).abs() <= PROBE_TOL * scale {
                hull.approximation_bound = excess.max(prev).max(0.0);
                hull.probes = total;
                return Ok(());
            }
        }
        if total >= PROBE_LIMIT {
            return Err(Error::RefinementDiverged { points: total });
        }
        previous = Some(excess);
        per_segment *= 2;
    }
}

/// Step density `H` on `(0, 1]`, constant on each quantile step of `|Z|`
/// and extended constantly over `[0, u₀]`.
#[derive(Debug, Clone)]
pub struct DensityH {
    breakpoints: Vec<f64>,
    levels: Vec<f64>,
}

impl DensityH {
    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    /// `H` on each quantile step; nondecreasing, nonnegative.
    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn eval(&self, u: f64) -> f64 {
        let k = self.breakpoints[1..].partition_point(|c| *c < u);
        self.levels[k.min(self.levels.len() - 1)]
    }

    /// `∫_α^1 H(u) σ(u) du`.
    pub fn majorant(&self, sigma: &Distortion, alpha: f64) -> f64 {
        self.breakpoints
            .windows(2)
            .zip(&self.levels)
            .filter(|(w, _)| w[1] > alpha)
            .map(|(w, h)| h * sigma.integral(w[0].max(alpha), w[1]))
            .sum()
    }

    /// `(∫_0^1 H^q σ)^{1/q}`, scaled by `max H` against overflow.
    pub fn q_norm(&self, sigma: &Distortion, q: f64) -> f64 {
        let top = self.levels[self.levels.len() - 1];
        if top == 0.0 {
            return 0.0;
        }
        let total: f64 = self
            .breakpoints
            .windows(2)
            .zip(&self.levels)
            .map(|(w, h)| (h / top).powf(q) * sigma.integral(w[0], w[1]))
            .sum();
        top * total.powf(1.0 / q)
    }
}

/// Reads `H(u)` off the hull: the slope of the hull segment containing
/// `t = S(u)`.
pub fn extract_h(hull: &HullPoints, g: &TailTransform, sigma: &Distortion) -> DensityH {
    let b = g.quantile().breakpoints();
    let last = hull.slopes.len() - 1;
    let mut levels: Vec<f64> = b
        .windows(2)
        .map(|w| {
            let (t_lo, t_hi) = (sigma.tail(w[1]), sigma.tail(w[0]));
            if t_hi > t_lo {
                hull.slopes[hull.segment_at(0.5 * (t_lo + t_hi))]
            } else {
                hull.slopes[last]
            }
        })
        .collect();
    // monotone in exact arithmetic; remove rounding wobble
    for k in 1..levels.len() {
        levels[k] = levels[k].max(levels[k - 1]);
    }
    DensityH { breakpoints: b.to_vec(), levels }
}
