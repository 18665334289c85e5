//! Carleson sequences indexed by dyadic intervals.
//!
//! A nonnegative sequence `{lambda_I}` is `v`-Carleson with intensity `B`
//! when `sum_{I in D(J)} lambda_I <= B v(J)` for every `J`. Sequences are
//! stored on internal intervals only; every sequence built here comes from
//! Haar coefficients or differences `Delta_I`, which do not exist on leaves.

use serde::{Deserialize, Serialize};

use crate::dyadic::{deltas, haar_transform, DyadicGrid, IntervalId, StepFunction};
use crate::error::{Error, Result};
use crate::weights::{sup_over, Weight};

/// Nonnegative values on the internal intervals of a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct IndexedSequence {
    grid: DyadicGrid,
    /// Heap indexed, length `2^D`, slot 0 unused.
    values: Vec<f64>,
}

impl IndexedSequence {
    pub fn zero(grid: DyadicGrid) -> Self {
        IndexedSequence {
            grid,
            values: vec![0.0; grid.leaf_count()],
        }
    }

    pub fn from_fn(grid: DyadicGrid, mut f: impl FnMut(IntervalId) -> f64) -> Result<Self> {
        let mut s = Self::zero(grid);
        for id in grid.internal() {
            s.set(id, f(id))?;
        }
        Ok(s)
    }

    /// Build from heap-indexed values (length `2^D`).
    pub fn from_heap(grid: DyadicGrid, mut values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.leaf_count() {
            return Err(Error::LeafCount {
                depth: grid.depth(),
                expected: grid.leaf_count(),
                got: values.len(),
            });
        }
        values[0] = 0.0;
        if let Some((k, &x)) = values.iter().enumerate().find(|(_, &x)| !(x >= 0.0 && x.is_finite())) {
            return Err(Error::InvalidParameter(format!(
                "sequence entry at {} is {x}, must be finite and nonnegative",
                IntervalId::from_heap(k)
            )));
        }
        Ok(IndexedSequence { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    /// `lambda_I`; zero on leaves.
    #[inline]
    pub fn get(&self, id: IntervalId) -> f64 {
        if id.level < self.grid.depth() {
            self.values[id.heap()]
        } else {
            0.0
        }
    }

    pub fn set(&mut self, id: IntervalId, value: f64) -> Result<()> {
        if !self.grid.contains(id) || self.grid.is_leaf(id) {
            return Err(Error::OffGrid(id, self.grid.depth()));
        }
        if !(value >= 0.0 && value.is_finite()) {
            return Err(Error::InvalidParameter(format!(
                "sequence entry at {id} is {value}, must be finite and nonnegative"
            )));
        }
        self.values[id.heap()] = value;
        Ok(())
    }

    #[inline]
    pub fn heap_values(&self) -> &[f64] {
        &self.values
    }

    pub fn scale(&self, c: f64) -> Result<Self> {
        Self::from_heap(self.grid, self.values.iter().map(|x| c * x).collect())
    }

    pub fn total(&self) -> f64 {
        self.values[1..].iter().sum()
    }

    /// `sum_{I in D(J)} lambda_I` for every internal `J`, heap indexed.
    pub fn subtree_sums(&self) -> Vec<f64> {
        let n = self.values.len();
        let mut acc = self.values.clone();
        for k in (1..n / 2).rev() {
            acc[k] += acc[2 * k] + acc[2 * k + 1];
        }
        acc
    }

    fn same_grid(&self, other: &IndexedSequence) -> Result<()> {
        if self.grid == other.grid {
            Ok(())
        } else {
            Err(Error::DepthMismatch(self.grid.depth(), other.grid.depth()))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SequenceEntry {
    level: u32,
    index: usize,
    value: f64,
}

#[derive(Serialize, Deserialize)]
struct SequenceRepr {
    depth: u32,
    entries: Vec<SequenceEntry>,
}

impl Serialize for IndexedSequence {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let entries = self
            .grid
            .internal()
            .filter(|&id| self.values[id.heap()] != 0.0)
            .map(|id| SequenceEntry {
                level: id.level,
                index: id.index,
                value: self.values[id.heap()],
            })
            .collect();
        SequenceRepr {
            depth: self.grid.depth(),
            entries,
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for IndexedSequence {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        let r = SequenceRepr::deserialize(d)?;
        let grid = DyadicGrid::new(r.depth).map_err(D::Error::custom)?;
        let mut s = IndexedSequence::zero(grid);
        for e in r.entries {
            let id = IntervalId::new(e.level, e.index).map_err(D::Error::custom)?;
            s.set(id, e.value).map_err(D::Error::custom)?;
        }
        Ok(s)
    }
}

/// Carleson intensity and an interval `J` attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct IntensityReport {
    pub intensity: f64,
    pub witness: IntervalId,
}

/// `sup_J (sum_{I in D(J)} lambda_I) / v(J)`, one bottom-up pass.
pub fn intensity(seq: &IndexedSequence, v: &Weight) -> Result<IntensityReport> {
    if seq.grid != v.grid() {
        return Err(Error::DepthMismatch(seq.grid.depth(), v.grid().depth()));
    }
    let sums = seq.subtree_sums();
    let mass = v.masses();
    let r = sup_over(seq.grid.internal(), |j| sums[j.heap()] / mass[j.heap()]);
    Ok(IntensityReport {
        intensity: r.value,
        witness: r.witness,
    })
}

/// Intensity with respect to Lebesgue measure.
pub fn unweighted_intensity(seq: &IndexedSequence) -> IntensityReport {
    intensity(seq, &Weight::lebesgue(seq.grid)).expect("same grid")
}

/// Combination rules whose intensities are controlled by the inputs'.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CombineMode {
    /// `c lambda + d gamma`, intensity `<= cA + dB`.
    Linear { c: f64, d: f64 },
    /// `sqrt(lambda gamma)`, intensity `<= sqrt(AB)`.
    GeometricMean,
    /// `(c sqrt(lambda) + d sqrt(gamma))^2`, intensity `<= 2c^2 A + 2d^2 B`.
    SquareSum { c: f64, d: f64 },
}

impl CombineMode {
    /// The intensity bound for inputs of intensities `a` and `b`.
    pub fn bound(self, a: f64, b: f64) -> f64 {
        match self {
            CombineMode::Linear { c, d } => c * a + d * b,
            CombineMode::GeometricMean => (a * b).sqrt(),
            CombineMode::SquareSum { c, d } => 2.0 * c * c * a + 2.0 * d * d * b,
        }
    }
}

pub fn combine(a: &IndexedSequence, b: &IndexedSequence, mode: CombineMode) -> Result<IndexedSequence> {
    a.same_grid(b)?;
    if let CombineMode::Linear { c, d } | CombineMode::SquareSum { c, d } = mode {
        if !(c >= 0.0 && d >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "combination weights must be nonnegative, got ({c}, {d})"
            )));
        }
    }
    let values = a
        .values
        .iter()
        .zip(&b.values)
        .map(|(&x, &y)| match mode {
            CombineMode::Linear { c, d } => c * x + d * y,
            CombineMode::GeometricMean => (x * y).sqrt(),
            CombineMode::SquareSum { c, d } => {
                let s = c * x.sqrt() + d * y.sqrt();
                s * s
            }
        })
        .collect();
    IndexedSequence::from_heap(a.grid, values)
}

/// `{b_I^2}`, a Carleson sequence of intensity `||b||_{BMO}^2`.
pub fn haar_squares(b: &StepFunction) -> IndexedSequence {
    let spec = haar_transform(b);
    let values = spec.heap_coeffs().iter().map(|c| c * c).collect();
    IndexedSequence::from_heap(b.grid(), values).expect("squares are nonnegative")
}

/// Per-interval quantities of a weight shared by the sequence families.
struct WeightProfile {
    grid: DyadicGrid,
    avg: Vec<f64>,
    avg_inv: Vec<f64>,
    delta: Vec<f64>,
    delta_inv: Vec<f64>,
}

impl WeightProfile {
    fn new(w: &Weight) -> Self {
        let avg = w.averages();
        let avg_inv = w.inverse().averages();
        WeightProfile {
            grid: w.grid(),
            delta: deltas(&avg),
            delta_inv: deltas(&avg_inv),
            avg,
            avg_inv,
        }
    }

    /// `|I| (m_I w m_I w^{-1})^s (Delta_I w^2 / (m_I w)^2 + Delta_I w^{-1}^2 / (m_I w^{-1})^2)`
    fn oscillation_sequence(&self, s: f64) -> IndexedSequence {
        let n = self.grid.leaf_count();
        let mut values = vec![0.0; n];
        for (k, x) in values.iter_mut().enumerate().skip(1) {
            let len = IntervalId::from_heap(k).length();
            let (a, b) = (self.avg[k], self.avg_inv[k]);
            let osc = (self.delta[k] / a).powi(2) + (self.delta_inv[k] / b).powi(2);
            *x = (a * b).powf(s) * len * osc;
        }
        IndexedSequence::from_heap(self.grid, values).expect("nonnegative")
    }
}

/// `mu_I^alpha = (m_I w)^alpha (m_I w^{-1})^alpha |I| (...)`, `0 < alpha < 1/2`.
///
/// Carleson with intensity at most `72 / (alpha - 2 alpha^2) [w]_{A_2}^alpha`.
pub fn alpha_sequence(w: &Weight, alpha: f64) -> Result<IndexedSequence> {
    if !(alpha > 0.0 && alpha < 0.5) {
        return Err(Error::InvalidParameter(format!(
            "alpha must lie in (0, 1/2), got {alpha}"
        )));
    }
    Ok(WeightProfile::new(w).oscillation_sequence(alpha))
}

/// The constant `72 / (alpha - 2 alpha^2)`.
pub fn alpha_constant(alpha: f64) -> f64 {
    72.0 / (alpha - 2.0 * alpha * alpha)
}

/// `tau_I^s`: same shape as `mu^alpha` for any exponent `s > 0`.
pub fn tau_sequence(w: &Weight, s: f64) -> Result<IndexedSequence> {
    if !(s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidParameter(format!("s must be positive, got {s}")));
    }
    Ok(WeightProfile::new(w).oscillation_sequence(s))
}

/// `nu_I = |I| (m_I w)^2 (Delta_I w^{-1})^2`.
pub fn nu_sequence(w: &Weight) -> IndexedSequence {
    let p = WeightProfile::new(w);
    let n = p.grid.leaf_count();
    let mut values = vec![0.0; n];
    for (k, x) in values.iter_mut().enumerate().skip(1) {
        let len = IntervalId::from_heap(k).length();
        *x = len * (p.avg[k] * p.delta_inv[k]).powi(2);
    }
    IndexedSequence::from_heap(p.grid, values).expect("nonnegative")
}

/// `mu_K^{b,s} = |b_K|^2 (m_K w m_K w^{-1})^s`.
pub fn b_weight_sequence(b: &StepFunction, w: &Weight, s: f64) -> Result<IndexedSequence> {
    b.same_grid(w.as_function())?;
    let p = WeightProfile::new(w);
    let sq = haar_squares(b);
    let values = sq
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| {
            if k == 0 {
                0.0
            } else {
                x * (p.avg[k] * p.avg_inv[k]).powf(s)
            }
        })
        .collect();
    IndexedSequence::from_heap(p.grid, values)
}

/// `{lambda_I / m_I v^{-1}}`; `v`-Carleson with intensity at most four times
/// the unweighted intensity of `seq`.
pub fn little_lemma_transfer(seq: &IndexedSequence, v: &Weight) -> Result<IndexedSequence> {
    if seq.grid != v.grid() {
        return Err(Error::DepthMismatch(seq.grid.depth(), v.grid().depth()));
    }
    let inv = v.inverse().averages();
    let values = seq
        .values
        .iter()
        .enumerate()
        .map(|(k, &x)| if k == 0 { 0.0 } else { x / inv[k] })
        .collect();
    IndexedSequence::from_heap(seq.grid, values)
}

/// `sum_L alpha_L inf_{x in L} F(x)` for nonnegative `F`.
pub fn weighted_carleson_pairing(seq: &IndexedSequence, f: &StepFunction, v: &Weight) -> Result<f64> {
    if seq.grid != f.grid() || f.grid() != v.grid() {
        return Err(Error::DepthMismatch(seq.grid.depth(), f.depth()));
    }
    if let Some((index, &value)) = f.leaves().iter().enumerate().find(|(_, &x)| !(x >= 0.0)) {
        return Err(Error::NegativeFunction { index, value });
    }
    let n = seq.grid.leaf_count();
    let mut mins = vec![0.0; 2 * n];
    mins[n..].copy_from_slice(f.leaves());
    for k in (1..n).rev() {
        mins[k] = mins[2 * k].min(mins[2 * k + 1]);
    }
    Ok((1..n).map(|k| seq.values[k] * mins[k]).sum())
}

/// `int F v`.
pub fn weighted_integral(f: &StepFunction, v: &Weight) -> Result<f64> {
    Ok(f.mul(v.as_function())?.integral())
}
