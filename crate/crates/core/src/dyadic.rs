//! Dyadic intervals, step functions and the (weighted) Haar systems.
//!
//! Tree quantities are stored in heap layout: interval `(level, index)` sits
//! at position `2^level + index`, so the root is at 1, the children of node
//! `k` are `2k` and `2k + 1`, and the leaves of a depth-`D` grid occupy
//! `2^D .. 2^(D+1)`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Deepest grid we are willing to allocate.
pub const MAX_DEPTH: u32 = 26;

/// The dyadic interval `[index 2^-level, (index + 1) 2^-level)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct IntervalId {
    pub level: u32,
    pub index: usize,
}

impl IntervalId {
    pub fn new(level: u32, index: usize) -> Result<Self> {
        if level > MAX_DEPTH || index >= 1usize << level {
            return Err(Error::InvalidParameter(format!(
                "no dyadic interval at level {level}, index {index}"
            )));
        }
        Ok(IntervalId { level, index })
    }

    pub const fn root() -> Self {
        IntervalId { level: 0, index: 0 }
    }

    /// Position in heap layout.
    #[inline]
    pub fn heap(self) -> usize {
        (1usize << self.level) + self.index
    }

    #[inline]
    pub fn from_heap(pos: usize) -> Self {
        debug_assert!(pos >= 1);
        let level = usize::BITS - 1 - pos.leading_zeros();
        IntervalId {
            level,
            index: pos - (1usize << level),
        }
    }

    /// `|I| = 2^-level`.
    #[inline]
    pub fn length(self) -> f64 {
        (-(self.level as f64)).exp2()
    }

    pub fn start(self) -> f64 {
        self.index as f64 * self.length()
    }

    pub fn end(self) -> f64 {
        (self.index + 1) as f64 * self.length()
    }

    pub fn parent(self) -> Option<Self> {
        (self.level > 0).then(|| IntervalId {
            level: self.level - 1,
            index: self.index / 2,
        })
    }

    /// The ancestor `k` generations up, `None` if above the root.
    pub fn ancestor(self, k: u32) -> Option<Self> {
        (k <= self.level).then(|| IntervalId {
            level: self.level - k,
            index: self.index >> k,
        })
    }

    /// Left half `I_-`.
    #[inline]
    pub fn left(self) -> Self {
        IntervalId {
            level: self.level + 1,
            index: 2 * self.index,
        }
    }

    /// Right half `I_+`.
    #[inline]
    pub fn right(self) -> Self {
        IntervalId {
            level: self.level + 1,
            index: 2 * self.index + 1,
        }
    }

    /// Whether `other` is a (not necessarily proper) dyadic subinterval.
    pub fn contains(self, other: IntervalId) -> bool {
        other.level >= self.level && (other.index >> (other.level - self.level)) == self.index
    }

    /// The `k`-th generation `D_k(I)`, left to right.
    pub fn generation(self, k: u32) -> impl Iterator<Item = IntervalId> + Clone {
        let level = self.level + k;
        let first = self.index << k;
        (first..first + (1usize << k)).map(move |index| IntervalId { level, index })
    }

    /// Leaf positions (0-based, left to right) covered on a grid of `depth`.
    #[inline]
    pub fn leaf_range(self, depth: u32) -> std::ops::Range<usize> {
        let shift = depth - self.level;
        (self.index << shift)..((self.index + 1) << shift)
    }
}

impl fmt::Display for IntervalId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.level, self.index)
    }
}

/// Finite dyadic tree of depth `D` on `[0, 1)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DyadicGrid {
    depth: u32,
}

impl DyadicGrid {
    pub fn new(depth: u32) -> Result<Self> {
        if depth == 0 || depth > MAX_DEPTH {
            return Err(Error::InvalidDepth {
                got: depth,
                max: MAX_DEPTH,
            });
        }
        Ok(DyadicGrid { depth })
    }

    #[inline]
    pub fn depth(self) -> u32 {
        self.depth
    }

    #[inline]
    pub fn leaf_count(self) -> usize {
        1usize << self.depth
    }

    /// Length of the heap arrays holding one value per interval (slot 0 unused).
    #[inline]
    pub fn node_slots(self) -> usize {
        2usize << self.depth
    }

    pub fn contains(self, id: IntervalId) -> bool {
        id.level <= self.depth && id.index < (1usize << id.level)
    }

    pub fn check(self, id: IntervalId) -> Result<()> {
        if self.contains(id) {
            Ok(())
        } else {
            Err(Error::OffGrid(id, self.depth))
        }
    }

    pub fn is_leaf(self, id: IntervalId) -> bool {
        id.level == self.depth
    }

    pub fn leaf(self, index: usize) -> IntervalId {
        IntervalId {
            level: self.depth,
            index,
        }
    }

    /// All `2^(D+1) - 1` intervals in heap order.
    pub fn intervals(self) -> impl Iterator<Item = IntervalId> {
        (1..self.node_slots()).map(IntervalId::from_heap)
    }

    /// Intervals on levels `0 .. D - 1` (those with two children).
    pub fn internal(self) -> impl Iterator<Item = IntervalId> {
        (1..self.leaf_count()).map(IntervalId::from_heap)
    }

    /// Intervals on levels `0 ..= max_level`.
    pub fn up_to_level(self, max_level: u32) -> impl Iterator<Item = IntervalId> {
        let end = 2usize << max_level.min(self.depth);
        (1..end).map(IntervalId::from_heap)
    }
}

/// Real function constant on each leaf of a dyadic grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "StepFunctionRepr", into = "StepFunctionRepr")]
pub struct StepFunction {
    grid: DyadicGrid,
    leaves: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct StepFunctionRepr {
    depth: u32,
    leaves: Vec<f64>,
}

impl TryFrom<StepFunctionRepr> for StepFunction {
    type Error = Error;
    fn try_from(r: StepFunctionRepr) -> Result<Self> {
        StepFunction::new(r.depth, r.leaves)
    }
}

impl From<StepFunction> for StepFunctionRepr {
    fn from(f: StepFunction) -> Self {
        StepFunctionRepr {
            depth: f.grid.depth,
            leaves: f.leaves,
        }
    }
}

impl StepFunction {
    pub fn new(depth: u32, leaves: Vec<f64>) -> Result<Self> {
        let grid = DyadicGrid::new(depth)?;
        if leaves.len() != grid.leaf_count() {
            return Err(Error::LeafCount {
                depth,
                expected: grid.leaf_count(),
                got: leaves.len(),
            });
        }
        Ok(StepFunction { grid, leaves })
    }

    pub fn on_grid(grid: DyadicGrid, leaves: Vec<f64>) -> Result<Self> {
        StepFunction::new(grid.depth, leaves)
    }

    pub fn constant(grid: DyadicGrid, c: f64) -> Self {
        StepFunction {
            grid,
            leaves: vec![c; grid.leaf_count()],
        }
    }

    pub fn zero(grid: DyadicGrid) -> Self {
        Self::constant(grid, 0.0)
    }

    /// Indicator of a dyadic interval.
    pub fn indicator(grid: DyadicGrid, id: IntervalId) -> Result<Self> {
        grid.check(id)?;
        let mut f = Self::zero(grid);
        f.leaves[id.leaf_range(grid.depth)].fill(1.0);
        Ok(f)
    }

    /// The Haar function `h_I = |I|^{-1/2} (chi_{I+} - chi_{I-})`.
    pub fn haar(grid: DyadicGrid, id: IntervalId) -> Result<Self> {
        grid.check(id)?;
        if grid.is_leaf(id) {
            return Err(Error::NoChildren(id));
        }
        let mut f = Self::zero(grid);
        let h = id.length().sqrt().recip();
        f.leaves[id.left().leaf_range(grid.depth)].fill(-h);
        f.leaves[id.right().leaf_range(grid.depth)].fill(h);
        Ok(f)
    }

    #[inline]
    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    #[inline]
    pub fn depth(&self) -> u32 {
        self.grid.depth
    }

    #[inline]
    pub fn leaves(&self) -> &[f64] {
        &self.leaves
    }

    pub fn into_leaves(self) -> Vec<f64> {
        self.leaves
    }

    /// Value on the leaf containing `x`, `None` outside `[0, 1)`.
    pub fn eval(&self, x: f64) -> Option<f64> {
        if !(0.0..1.0).contains(&x) {
            return None;
        }
        let k = (x * self.leaves.len() as f64) as usize;
        self.leaves.get(k).copied()
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        StepFunction {
            grid: self.grid,
            leaves: self.leaves.iter().map(|&x| f(x)).collect(),
        }
    }

    pub fn abs(&self) -> Self {
        self.map(f64::abs)
    }

    pub fn scale(&self, c: f64) -> Self {
        self.map(|x| c * x)
    }

    /// Pointwise combination `f(self, other)`.
    pub fn zip_with(&self, other: &StepFunction, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.same_grid(other)?;
        Ok(StepFunction {
            grid: self.grid,
            leaves: self.leaves.iter().zip(&other.leaves).map(|(&a, &b)| f(a, b)).collect(),
        })
    }

    pub fn mul(&self, other: &StepFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a * b)
    }

    pub fn add(&self, other: &StepFunction) -> Result<Self> {
        self.zip_with(other, |a, b| a + b)
    }

    pub(crate) fn same_grid(&self, other: &StepFunction) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::DepthMismatch(self.grid.depth, other.grid.depth))
        }
    }

    /// `int_0^1 f` (mean of the leaves).
    pub fn integral(&self) -> f64 {
        self.leaves.iter().sum::<f64>() / self.leaves.len() as f64
    }

    /// `<f, g> = int f g`.
    pub fn inner(&self, other: &StepFunction) -> Result<f64> {
        self.same_grid(other)?;
        let s: f64 = self.leaves.iter().zip(&other.leaves).map(|(a, b)| a * b).sum();
        Ok(s / self.leaves.len() as f64)
    }

    /// `||f||_{L^p(dx)}^p`.
    pub fn lp_norm_pow(&self, p: f64) -> f64 {
        self.leaves.iter().map(|x| x.abs().powf(p)).sum::<f64>() / self.leaves.len() as f64
    }

    /// Leaf sums over every interval, heap indexed (slot 0 unused).
    ///
    /// `sums[I.heap()]` is the sum of leaf values under `I`; multiply by
    /// `2^-D` for the integral or divide by the leaf count of `I` for the
    /// average.
    pub fn subtree_sums(&self) -> Vec<f64> {
        let n = self.leaves.len();
        let mut sums = vec![0.0; 2 * n];
        sums[n..].copy_from_slice(&self.leaves);
        for k in (1..n).rev() {
            sums[k] = sums[2 * k] + sums[2 * k + 1];
        }
        sums
    }

    /// Average `m_I f` on every interval, heap indexed.
    pub fn averages(&self) -> Vec<f64> {
        let mut sums = self.subtree_sums();
        for (k, s) in sums.iter_mut().enumerate().skip(1) {
            let id = IntervalId::from_heap(k);
            *s /= (1usize << (self.grid.depth - id.level)) as f64;
        }
        sums
    }

    /// `m_I f`.
    pub fn average(&self, id: IntervalId) -> Result<f64> {
        self.grid.check(id)?;
        let r = id.leaf_range(self.grid.depth);
        let count = r.len() as f64;
        Ok(self.leaves[r].iter().sum::<f64>() / count)
    }

    /// `m_I^v f = (int_I f v) / v(I)`.
    pub fn weighted_average(&self, v: &StepFunction, id: IntervalId) -> Result<f64> {
        self.same_grid(v)?;
        self.grid.check(id)?;
        let r = id.leaf_range(self.grid.depth);
        let num: f64 = self.leaves[r.clone()]
            .iter()
            .zip(&v.leaves[r.clone()])
            .map(|(a, b)| a * b)
            .sum();
        let den: f64 = v.leaves[r].iter().sum();
        Ok(num / den)
    }

    /// Haar coefficients of `f`.
    pub fn haar_transform(&self) -> HaarSpectrum {
        haar_transform(self)
    }
}

/// Global mean plus `<f, h_I>` for every interval on levels `0 .. D - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct HaarSpectrum {
    grid: DyadicGrid,
    pub mean: f64,
    /// Heap indexed, length `2^D`; slot 0 unused.
    coeffs: Vec<f64>,
}

impl HaarSpectrum {
    pub fn zero(grid: DyadicGrid) -> Self {
        HaarSpectrum {
            grid,
            mean: 0.0,
            coeffs: vec![0.0; grid.leaf_count()],
        }
    }

    /// Build from a heap-indexed coefficient vector of length `2^D`.
    pub fn from_heap(grid: DyadicGrid, mean: f64, mut coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != grid.leaf_count() {
            return Err(Error::LeafCount {
                depth: grid.depth(),
                expected: grid.leaf_count(),
                got: coeffs.len(),
            });
        }
        coeffs[0] = 0.0;
        Ok(HaarSpectrum { grid, mean, coeffs })
    }

    #[inline]
    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    #[inline]
    pub fn coeff(&self, id: IntervalId) -> f64 {
        self.coeffs[id.heap()]
    }

    pub fn set_coeff(&mut self, id: IntervalId, value: f64) -> Result<()> {
        if !self.grid.contains(id) || self.grid.is_leaf(id) {
            return Err(Error::OffGrid(id, self.grid.depth()));
        }
        self.coeffs[id.heap()] = value;
        Ok(())
    }

    /// Heap-indexed coefficients (slot 0 unused).
    #[inline]
    pub fn heap_coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn into_heap_coeffs(self) -> Vec<f64> {
        self.coeffs
    }

    /// `mean^2 + sum_I coeff(I)^2`, which equals `||f||_2^2`.
    pub fn energy(&self) -> f64 {
        self.mean * self.mean + self.coeffs[1..].iter().map(|c| c * c).sum::<f64>()
    }

    pub fn inverse(&self) -> StepFunction {
        inverse_haar_transform(self)
    }
}

/// Haar coefficients by bottom-up reduction of leaf sums, `O(2^D)`.
pub fn haar_transform(f: &StepFunction) -> HaarSpectrum {
    let grid = f.grid;
    let n = grid.leaf_count();
    let sums = f.subtree_sums();
    let leaf_len = (-(grid.depth as f64)).exp2();
    let mut coeffs = vec![0.0; n];
    for (k, c) in coeffs.iter_mut().enumerate().skip(1) {
        let len = IntervalId::from_heap(k).length();
        // |I|^{-1/2} (int_{I+} f - int_{I-} f)
        *c = (sums[2 * k + 1] - sums[2 * k]) * leaf_len / len.sqrt();
    }
    HaarSpectrum {
        grid,
        mean: sums[1] / n as f64,
        coeffs,
    }
}

/// Top-down reconstruction of leaf values from a spectrum.
pub fn inverse_haar_transform(s: &HaarSpectrum) -> StepFunction {
    let n = s.grid.leaf_count();
    let mut avg = vec![0.0; 2 * n];
    avg[1] = s.mean;
    for k in 1..n {
        // m_{I+-} = m_I +- <f, h_I> |I|^{-1/2}
        let d = s.coeffs[k] / IntervalId::from_heap(k).length().sqrt();
        avg[2 * k] = avg[k] - d;
        avg[2 * k + 1] = avg[k] + d;
    }
    avg.drain(..n);
    StepFunction {
        grid: s.grid,
        leaves: avg,
    }
}

/// Values of `h_I^v` on `(I_+, I_-)`.
///
/// `h_I^v = v(I)^{-1/2} (sqrt(v(I-)/v(I+)) chi_{I+} - sqrt(v(I+)/v(I-)) chi_{I-})`,
/// normalized in `L^2(v)` and `v`-mean zero.
pub fn weighted_haar_values(v_plus: f64, v_minus: f64) -> (f64, f64) {
    let total = (v_plus + v_minus).sqrt();
    ((v_minus / v_plus).sqrt() / total, -(v_plus / v_minus).sqrt() / total)
}

/// The weighted Haar function `h_I^v` as a step function.
pub fn weighted_haar(v: &StepFunction, id: IntervalId) -> Result<StepFunction> {
    let grid = v.grid;
    grid.check(id)?;
    if grid.is_leaf(id) {
        return Err(Error::NoChildren(id));
    }
    check_positive(v)?;
    let leaf_len = (-(grid.depth as f64)).exp2();
    let mass = |i: IntervalId| v.leaves[i.leaf_range(grid.depth)].iter().sum::<f64>() * leaf_len;
    let (hp, hm) = weighted_haar_values(mass(id.right()), mass(id.left()));
    let mut out = StepFunction::zero(grid);
    out.leaves[id.right().leaf_range(grid.depth)].fill(hp);
    out.leaves[id.left().leaf_range(grid.depth)].fill(hm);
    Ok(out)
}

/// Coefficients of `h_I = alpha h_I^v + beta chi_I / sqrt|I|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct WeightedHaarDecomposition {
    pub alpha: f64,
    pub beta: f64,
}

impl WeightedHaarDecomposition {
    /// Solve the 2x2 system from the values of `h_I^v` on the two halves.
    pub fn solve(len: f64, h_plus: f64, h_minus: f64) -> Self {
        let r = len.sqrt().recip();
        // r = a h+ + b r,  -r = a h- + b r
        let alpha = 2.0 * r / (h_plus - h_minus);
        let beta = 1.0 - alpha * h_plus / r;
        WeightedHaarDecomposition { alpha, beta }
    }
}

pub fn decompose_haar(v: &StepFunction, id: IntervalId) -> Result<WeightedHaarDecomposition> {
    let grid = v.grid;
    grid.check(id)?;
    if grid.is_leaf(id) {
        return Err(Error::NoChildren(id));
    }
    check_positive(v)?;
    let leaf_len = (-(grid.depth as f64)).exp2();
    let mass = |i: IntervalId| v.leaves[i.leaf_range(grid.depth)].iter().sum::<f64>() * leaf_len;
    let (hp, hm) = weighted_haar_values(mass(id.right()), mass(id.left()));
    Ok(WeightedHaarDecomposition::solve(id.length(), hp, hm))
}

/// `Delta_I f = m_{I+} f - m_{I-} f` for every internal interval, heap indexed.
pub fn deltas(averages: &[f64]) -> Vec<f64> {
    let n = averages.len() / 2;
    let mut d = vec![0.0; n];
    for (k, x) in d.iter_mut().enumerate().skip(1) {
        *x = averages[2 * k + 1] - averages[2 * k];
    }
    d
}

pub(crate) fn check_positive(v: &StepFunction) -> Result<()> {
    match v.leaves.iter().enumerate().find(|(_, &x)| !(x > 0.0 && x.is_finite())) {
        Some((index, &value)) => Err(Error::NonPositiveWeight { index, value }),
        None => Ok(()),
    }
}
