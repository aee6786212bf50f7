//! Finite probability spaces, random vectors on them, quantile functions,
//! comonotone couplings and coarsenings.
//!
//! A uniform random variable `U` on the (extended) space is represented by
//! a [`SlotCoupling`]: each atom owns a half-open interval `(a_i, b_i]` of
//! `(0, 1]` of length `w_i`, and `U` is uniform on that slot conditional on
//! the atom. Expectations of the form `E σ(U) g` are then exact interval
//! integrals of `σ`.

use std::cmp::Ordering;
use std::sync::Arc;

use crate::distortion::Distortion;
use crate::error::{Error, Result};
use crate::vecnorm::VecNorm;

const WEIGHT_SUM_TOL: f64 = 1e-12;

/// Atom weights of a finite probability space.
#[derive(Debug, Clone)]
pub struct FiniteSpace {
    weights: Arc<[f64]>,
}

impl FiniteSpace {
    /// Weights must be positive and sum to one within `1e-12`. They are
    /// stored as given, so emitting and re-reading a space is exact.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.is_empty() {
            return Err(Error::InvalidWeights("no atoms".into()));
        }
        for (i, w) in weights.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidWeights(format!("weight {w} at atom {i} is not positive")));
            }
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > WEIGHT_SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {total}, not 1")));
        }
        Ok(FiniteSpace { weights: weights.into() })
    }

    /// Positive weights of any total mass, rescaled to a probability.
    pub fn from_masses(masses: Vec<f64>) -> Result<Self> {
        if masses.is_empty() {
            return Err(Error::InvalidWeights("no atoms".into()));
        }
        for (i, w) in masses.iter().enumerate() {
            if !w.is_finite() || *w <= 0.0 {
                return Err(Error::InvalidWeights(format!("weight {w} at atom {i} is not positive")));
            }
        }
        Ok(Self::from_unnormalized(masses))
    }

    fn from_unnormalized(mut weights: Vec<f64>) -> Self {
        let total: f64 = weights.iter().sum();
        if total != 1.0 {
            weights.iter_mut().for_each(|w| *w /= total);
        }
        FiniteSpace { weights: weights.into() }
    }

    pub fn uniform(n: usize) -> Self {
        assert!(n > 0, "a probability space needs at least one atom");
        FiniteSpace { weights: vec![1.0 / n as f64; n].into() }
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// All atoms carry weight `1/n` (to within `1e-12`).
    pub fn is_uniform(&self) -> bool {
        let target = 1.0 / self.len() as f64;
        self.weights.iter().all(|w| (w - target).abs() <= WEIGHT_SUM_TOL)
    }

    pub fn same_as(&self, other: &FiniteSpace) -> bool {
        Arc::ptr_eq(&self.weights, &other.weights) || self.weights == other.weights
    }

    /// The space with atoms reordered: atom `j` of the result is atom
    /// `perm[j]` of `self`.
    pub fn permuted(&self, perm: &[usize]) -> Result<FiniteSpace> {
        check_permutation(perm, self.len())?;
        Ok(FiniteSpace { weights: perm.iter().map(|&i| self.weights[i]).collect::<Vec<_>>().into() })
    }
}

pub(crate) fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    if perm.len() != n {
        return Err(Error::LengthMismatch { expected: n, found: perm.len() });
    }
    let mut seen = vec![false; n];
    for &i in perm {
        if i >= n || seen[i] {
            return Err(Error::InvalidPartition(format!("{perm:?} is not a permutation")));
        }
        seen[i] = true;
    }
    Ok(())
}

/// Per-atom values in `ℝ^d` on a [`FiniteSpace`], stored row-major.
#[derive(Debug, Clone)]
pub struct RandomVector {
    space: FiniteSpace,
    dim: usize,
    values: Vec<f64>,
}

impl RandomVector {
    pub fn new(space: FiniteSpace, rows: Vec<Vec<f64>>) -> Result<Self> {
        if rows.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), found: rows.len() });
        }
        let dim = rows.first().map_or(0, Vec::len);
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        let mut values = Vec::with_capacity(dim * rows.len());
        for row in &rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch { expected: dim, found: row.len() });
            }
            values.extend_from_slice(row);
        }
        Self::from_flat(space, dim, values)
    }

    pub fn scalar(space: FiniteSpace, values: Vec<f64>) -> Result<Self> {
        if values.len() != space.len() {
            return Err(Error::LengthMismatch { expected: space.len(), found: values.len() });
        }
        Self::from_flat(space, 1, values)
    }

    pub fn from_flat(space: FiniteSpace, dim: usize, values: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::DimensionMismatch { expected: 1, found: 0 });
        }
        if values.len() != dim * space.len() {
            return Err(Error::LengthMismatch { expected: dim * space.len(), found: values.len() });
        }
        if let Some(k) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { row: k / dim, col: k % dim });
        }
        Ok(RandomVector { space, dim, values })
    }

    pub fn zeros(space: FiniteSpace, dim: usize) -> Self {
        let values = vec![0.0; dim * space.len()];
        RandomVector { space, dim, values }
    }

    pub fn space(&self) -> &FiniteSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.space.len()
    }

    pub fn is_empty(&self) -> bool {
        self.space.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.dim..(i + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim)
    }

    pub fn to_rows(&self) -> Vec<Vec<f64>> {
        self.rows().map(<[f64]>::to_vec).collect()
    }

    pub fn flat(&self) -> &[f64] {
        &self.values
    }

    /// Values of a scalar variable; fails unless `d = 1`.
    pub fn scalar_values(&self) -> Result<&[f64]> {
        if self.dim != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: self.dim });
        }
        Ok(&self.values)
    }

    /// `‖y_i‖` per atom.
    pub fn magnitudes(&self, norm: &VecNorm) -> Vec<f64> {
        self.rows().map(|r| norm.norm(r)).collect()
    }

    pub fn scaled(&self, c: f64) -> RandomVector {
        RandomVector {
            space: self.space.clone(),
            dim: self.dim,
            values: self.values.iter().map(|v| c * v).collect(),
        }
    }

    /// Per-atom scalar multiple `α_i y_i`.
    pub fn modulated(&self, alpha: &[f64]) -> Result<RandomVector> {
        if alpha.len() != self.len() {
            return Err(Error::LengthMismatch { expected: self.len(), found: alpha.len() });
        }
        let values = self
            .rows()
            .zip(alpha)
            .flat_map(|(r, a)| r.iter().map(move |v| a * v))
            .collect();
        RandomVector::from_flat(self.space.clone(), self.dim, values)
    }

    fn zip_with(&self, other: &RandomVector, f: impl Fn(f64, f64) -> f64) -> Result<RandomVector> {
        if !self.space.same_as(&other.space) {
            return Err(Error::SpaceMismatch);
        }
        if self.dim != other.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, found: other.dim });
        }
        let values = self.values.iter().zip(&other.values).map(|(a, b)| f(*a, *b)).collect();
        Ok(RandomVector { space: self.space.clone(), dim: self.dim, values })
    }

    pub fn add(&self, other: &RandomVector) -> Result<RandomVector> {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &RandomVector) -> Result<RandomVector> {
        self.zip_with(other, |a, b| a - b)
    }

    /// Reorders atoms (values and weights together): atom `j` of the
    /// result is atom `perm[j]` of `self`. The law is unchanged.
    pub fn permuted(&self, perm: &[usize]) -> Result<RandomVector> {
        let space = self.space.permuted(perm)?;
        let values = perm.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Ok(RandomVector { space, dim: self.dim, values })
    }

    /// Reassigns values among atoms of the same space: atom `i` receives the
    /// value of atom `perm[i]`. Only law-preserving for equal weights.
    pub fn rearranged(&self, perm: &[usize]) -> Result<RandomVector> {
        check_permutation(perm, self.len())?;
        let values = perm.iter().flat_map(|&i| self.row(i).iter().copied()).collect();
        Ok(RandomVector { space: self.space.clone(), dim: self.dim, values })
    }
}

/// Left-continuous nondecreasing step function on `(0, 1]`:
/// `F^{-1}(u) = values[k-1]` for `u ∈ (breakpoints[k-1], breakpoints[k]]`.
#[derive(Debug, Clone, PartialEq)]
pub struct StepQuantile {
    breakpoints: Vec<f64>,
    values: Vec<f64>,
}

impl StepQuantile {
    pub fn new(breakpoints: Vec<f64>, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() || breakpoints.len() != values.len() + 1 {
            return Err(Error::LengthMismatch { expected: values.len() + 1, found: breakpoints.len() });
        }
        if breakpoints[0] != 0.0 || *breakpoints.last().unwrap() != 1.0 {
            return Err(Error::InvalidWeights("quantile breakpoints must run from 0 to 1".into()));
        }
        if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidWeights("quantile breakpoints must increase strictly".into()));
        }
        if values.iter().any(|v| !v.is_finite()) || values.windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidWeights("quantile values must be finite and nondecreasing".into()));
        }
        Ok(StepQuantile { breakpoints, values })
    }

    pub fn breakpoints(&self) -> &[f64] {
        &self.breakpoints
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn num_segments(&self) -> usize {
        self.values.len()
    }

    /// `(lo, hi, value)` for every step.
    pub fn segments(&self) -> impl Iterator<Item = (f64, f64, f64)> + '_ {
        self.breakpoints.windows(2).zip(&self.values).map(|(b, v)| (b[0], b[1], *v))
    }

    pub fn eval(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return self.values[0];
        }
        // first breakpoint >= u, excluding c_0
        let k = self.breakpoints[1..].partition_point(|c| *c < u);
        self.values[k.min(self.values.len() - 1)]
    }

    /// `∫_α^1 F^{-1}(u) du`.
    pub fn tail_integral(&self, alpha: f64) -> f64 {
        self.segments()
            .filter(|(_, hi, _)| *hi > alpha)
            .map(|(lo, hi, v)| v * (hi - lo.max(alpha)))
            .sum()
    }

    /// `∫_α^1 σ(u) F^{-1}(u)^p du`, exact.
    pub fn weighted_tail(&self, sigma: &Distortion, alpha: f64, p: f64) -> f64 {
        self.segments()
            .filter(|(_, hi, _)| *hi > alpha)
            .map(|(lo, hi, v)| v.powf(p) * sigma.integral(lo.max(alpha), hi))
            .sum()
    }
}

/// Atom indices sorted by ascending value, ties broken by index.
pub(crate) fn ascending_order(values: &[f64]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].partial_cmp(&values[b]).unwrap_or(Ordering::Equal).then(a.cmp(&b)));
    order
}

/// Quantile of the weighted empirical law of `values` together with the
/// step index each atom falls into.
pub(crate) fn quantile_with_segments(values: &[f64], space: &FiniteSpace) -> Result<(StepQuantile, Vec<usize>)> {
    if values.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), found: values.len() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let w = space.weights();
    let order = ascending_order(values);
    let mut breakpoints = vec![0.0];
    let mut steps: Vec<f64> = Vec::new();
    let mut segment = vec![0; values.len()];
    let mut cum = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        cum += w[i];
        let v = values[i];
        if steps.last() == Some(&v) {
            *breakpoints.last_mut().unwrap() = cum;
        } else {
            steps.push(v);
            breakpoints.push(cum);
        }
        segment[i] = steps.len() - 1;
        if pos + 1 == order.len() {
            *breakpoints.last_mut().unwrap() = 1.0;
        }
    }
    Ok((StepQuantile { breakpoints, values: steps }, segment))
}

/// `F_V^{-1}` of the weighted empirical law of `values`; tied values share
/// one step.
pub fn quantile(values: &[f64], space: &FiniteSpace) -> Result<StepQuantile> {
    quantile_with_segments(values, space).map(|(q, _)| q)
}

/// Per-atom disjoint slots `(a_i, b_i]` tiling `(0, 1]`, with `b_i - a_i = w_i`.
#[derive(Debug, Clone)]
pub struct SlotCoupling {
    slots: Vec<(f64, f64)>,
}

impl SlotCoupling {
    /// Lays out atoms left to right in the order given.
    pub fn from_order(space: &FiniteSpace, order: &[usize]) -> Result<Self> {
        check_permutation(order, space.len()).map_err(|_| Error::InvalidCoupling("order is not a permutation".into()))?;
        let w = space.weights();
        let mut slots = vec![(0.0, 0.0); space.len()];
        let mut cum = 0.0;
        for (pos, &i) in order.iter().enumerate() {
            let lo = cum;
            cum = if pos + 1 == order.len() { 1.0 } else { cum + w[i] };
            slots[i] = (lo, cum);
        }
        Ok(SlotCoupling { slots })
    }

    pub fn slots(&self) -> &[(f64, f64)] {
        &self.slots
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    /// `∫_{slot_i} σ(u) du` per atom.
    pub fn sigma_masses(&self, sigma: &Distortion) -> Vec<f64> {
        self.slots.iter().map(|&(a, b)| sigma.integral(a, b)).collect()
    }

    /// Whether `v_i < v_j` forces slot `i` to lie left of slot `j`.
    pub fn is_comonotone_with(&self, values: &[f64]) -> bool {
        values.len() == self.slots.len()
            && (0..values.len()).all(|i| {
                (0..values.len()).all(|j| values[i] >= values[j] || self.slots[i].1 <= self.slots[j].0)
            })
    }
}

/// Slots in ascending order of `values`, ties broken by atom index: the
/// induced uniform `U` is comonotone with `values`.
pub fn comonotone_slots(values: &[f64], space: &FiniteSpace) -> Result<SlotCoupling> {
    if values.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), found: values.len() });
    }
    if let Some(i) = values.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    SlotCoupling::from_order(space, &ascending_order(values))
}

pub fn expectation(values: &[f64], space: &FiniteSpace) -> Result<f64> {
    if values.len() != space.len() {
        return Err(Error::LengthMismatch { expected: space.len(), found: values.len() });
    }
    Ok(values.iter().zip(space.weights()).map(|(v, w)| v * w).sum())
}

/// `‖Y‖_p = (Σ w_i ‖y_i‖^p)^{1/p}`, or `max_i ‖y_i‖` for `p = ∞`.
pub fn p_norm(y: &RandomVector, p: f64, norm: &VecNorm) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    let mags = y.magnitudes(norm);
    if p.is_infinite() {
        return Ok(mags.iter().fold(0.0, |m, v| m.max(*v)));
    }
    let top = mags.iter().fold(0.0f64, |m, v| m.max(*v));
    if top == 0.0 {
        return Ok(0.0);
    }
    let s: f64 = mags.iter().zip(y.space().weights()).map(|(m, w)| w * (m / top).powf(p)).sum();
    Ok(top * s.powf(1.0 / p))
}

/// Assignment of atoms to `k` non-empty blocks (a finite sub-σ-algebra).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    blocks: Vec<usize>,
    count: usize,
}

impl Partition {
    pub fn new(blocks: Vec<usize>) -> Result<Self> {
        if blocks.is_empty() {
            return Err(Error::InvalidPartition("no atoms".into()));
        }
        let count = blocks.iter().max().unwrap() + 1;
        let mut used = vec![false; count];
        blocks.iter().for_each(|&b| used[b] = true);
        if let Some(b) = used.iter().position(|u| !u) {
            return Err(Error::InvalidPartition(format!("block {b} is empty")));
        }
        Ok(Partition { blocks, count })
    }

    pub fn single(n: usize) -> Self {
        Partition { blocks: vec![0; n], count: 1 }
    }

    pub fn identity(n: usize) -> Self {
        Partition { blocks: (0..n).collect(), count: n }
    }

    pub fn block_of(&self, atom: usize) -> usize {
        self.blocks[atom]
    }

    pub fn num_blocks(&self) -> usize {
        self.count
    }

    pub fn len(&self) -> usize {
        self.blocks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.is_empty()
    }
}

/// Conditional expectation `E(Z | 𝔉)` on the coarsened space: one atom per
/// block, carrying the block weight and the weighted block mean.
pub fn coarsen(z: &RandomVector, part: &Partition) -> Result<RandomVector> {
    if part.len() != z.len() {
        return Err(Error::LengthMismatch { expected: z.len(), found: part.len() });
    }
    let d = z.dim();
    let mut mass = vec![0.0; part.num_blocks()];
    let mut sums = vec![0.0; part.num_blocks() * d];
    for (i, (row, w)) in z.rows().zip(z.space().weights()).enumerate() {
        let b = part.block_of(i);
        mass[b] += w;
        for (s, v) in sums[b * d..(b + 1) * d].iter_mut().zip(row) {
            *s += w * v;
        }
    }
    for (b, m) in mass.iter().enumerate() {
        sums[b * d..(b + 1) * d].iter_mut().for_each(|s| *s /= m);
    }
    RandomVector::from_flat(FiniteSpace::from_masses(mass)?, d, sums)
}
