//! Stopping-time families `ST^m_L` and lifted Carleson sequences.
//!
//! Starting at `L`, an interval `K` stops when either
//! (i) `|Delta_K u| / m_K u + |Delta_K v| / m_K v >= 1 / order`, or
//! (ii) `|K| = 2^-m |L|`.
//! Otherwise both halves are examined. The members partition `L`, and the
//! averages of `u` and `v` on every member stay within a factor `e` of
//! those on `L` whenever `order >= m / 2`.

use serde::{Deserialize, Serialize};

use crate::carleson::IndexedSequence;
use crate::dyadic::{deltas, DyadicGrid, IntervalId};
use crate::error::{Error, Result};
use crate::weights::Weight;

/// Which stopping rule fired; when both hold the member is tagged `Oscillation`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Criterion {
    /// Rule (i): the weights oscillate by at least `1 / order` on `K`.
    Oscillation,
    /// Rule (ii): `K` reached generation `m` below `L`.
    Depth,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingMember {
    pub interval: IntervalId,
    pub criterion: Criterion,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StoppingFamily {
    pub root: IntervalId,
    pub m: u32,
    pub threshold_order: u32,
    /// Left to right.
    pub members: Vec<StoppingMember>,
}

impl StoppingFamily {
    pub fn intervals(&self) -> impl Iterator<Item = IntervalId> + '_ {
        self.members.iter().map(|k| k.interval)
    }

    pub fn contains(&self, id: IntervalId) -> bool {
        self.members.iter().any(|k| k.interval == id)
    }
}

/// Relative oscillations `|Delta_K u| / m_K u + |Delta_K v| / m_K v` of a
/// pair of weights, heap indexed over internal intervals.
#[derive(Clone, Debug)]
pub struct OscillationProfile {
    grid: DyadicGrid,
    osc: Vec<f64>,
    avg_u: Vec<f64>,
    avg_v: Vec<f64>,
}

impl OscillationProfile {
    pub fn new(u: &Weight, v: &Weight) -> Result<Self> {
        if u.grid() != v.grid() {
            return Err(Error::DepthMismatch(u.grid().depth(), v.grid().depth()));
        }
        let avg_u = u.averages();
        let avg_v = v.averages();
        let (du, dv) = (deltas(&avg_u), deltas(&avg_v));
        let osc = (0..du.len())
            .map(|k| {
                if k == 0 {
                    0.0
                } else {
                    du[k].abs() / avg_u[k] + dv[k].abs() / avg_v[k]
                }
            })
            .collect();
        Ok(OscillationProfile {
            grid: u.grid(),
            osc,
            avg_u,
            avg_v,
        })
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    /// Criterion (i) at `K`; never holds on a leaf.
    pub fn oscillates(&self, k: IntervalId, order: u32) -> bool {
        k.level < self.grid.depth() && self.osc[k.heap()] >= 1.0 / order as f64
    }

    pub fn average_u(&self, k: IntervalId) -> f64 {
        self.avg_u[k.heap()]
    }

    pub fn average_v(&self, k: IntervalId) -> f64 {
        self.avg_v[k.heap()]
    }

    /// Top-down construction of `ST^m_L`.
    pub fn build(&self, root: IntervalId, m: u32, order: u32) -> Result<StoppingFamily> {
        self.grid.check(root)?;
        if root.level + m > self.grid.depth() {
            return Err(Error::InvalidParameter(format!(
                "stopping depth m={m} below {root} exceeds grid depth {}",
                self.grid.depth()
            )));
        }
        if order == 0 {
            return Err(Error::InvalidParameter("threshold order must be >= 1".into()));
        }
        let mut members = Vec::new();
        let mut stack = vec![root];
        while let Some(k) = stack.pop() {
            if self.oscillates(k, order) {
                members.push(StoppingMember {
                    interval: k,
                    criterion: Criterion::Oscillation,
                });
            } else if k.level == root.level + m {
                members.push(StoppingMember {
                    interval: k,
                    criterion: Criterion::Depth,
                });
            } else {
                // right first so the left half is popped first
                stack.push(k.right());
                stack.push(k.left());
            }
        }
        Ok(StoppingFamily {
            root,
            m,
            threshold_order: order,
            members,
        })
    }
}

/// `ST^m_L` for weights `u`, `v` with criterion (i) threshold `1 / order`.
pub fn build_stopping(u: &Weight, v: &Weight, root: IntervalId, m: u32, order: u32) -> Result<StoppingFamily> {
    OscillationProfile::new(u, v)?.build(root, m, order)
}

/// `nu^m_L = sum_{K in ST^m_L} nu_K` for every `L` with `level(L) + m <= D`.
///
/// `family` supplies `ST^m_L` for each `L`; any partition of `L` into
/// intervals of length at least `2^-m |L|` keeps the intensity in the
/// weight `w` within a factor `m + 1` of that of `seq`.
pub fn lift_sequence(
    seq: &IndexedSequence,
    m: u32,
    mut family: impl FnMut(IntervalId) -> Result<StoppingFamily>,
) -> Result<IndexedSequence> {
    let grid = seq.grid();
    let mut out = IndexedSequence::zero(grid);
    for l in grid.internal() {
        if l.level + m > grid.depth() {
            continue;
        }
        let st = family(l)?;
        let value: f64 = st.intervals().map(|k| seq.get(k)).sum();
        out.set(l, value)?;
    }
    Ok(out)
}

/// Lift along the stopping families of `(u, v)` built with `order`.
pub fn lift_with_weights(seq: &IndexedSequence, u: &Weight, v: &Weight, m: u32, order: u32) -> Result<IndexedSequence> {
    let profile = OscillationProfile::new(u, v)?;
    lift_sequence(seq, m, |l| profile.build(l, m, order))
}
