//! Per-interval quantities from the duality estimates for paraproducts and
//! multipliers, and the right-hand sides they are compared against.
//!
//! ```text
//! S^{v,m}_L phi  = sum_{J in D_m(L)} |<phi, h_J^v>_v| sqrt(m_J v) sqrt(|J| / |L|)
//! R^{v,m}_L phi  = sum_{J in D_m(L)} |Delta_J v| / m_J v  m_J(|phi| v) |J| / sqrt|L|
//! Pb^{v,n}_L phi = sum_{I in D_n(L)} |b_I| m_I(|phi| v) sqrt(|I| / |L|)
//! ```

use serde::{Deserialize, Serialize};

use crate::carleson::{b_weight_sequence, tau_sequence, IndexedSequence};
use crate::dyadic::{haar_transform, weighted_haar_values, DyadicGrid, IntervalId, StepFunction};
use crate::error::{Error, Result};
use crate::stopping::OscillationProfile;
use crate::weights::{bmo_norm, weighted_maximal, Weight};

fn check_generation(grid: DyadicGrid, l: IntervalId, k: u32) -> Result<()> {
    grid.check(l)?;
    if l.level + k >= grid.depth() {
        return Err(Error::InvalidParameter(format!(
            "generation {k} below {l} has no Haar functions on depth {}",
            grid.depth()
        )));
    }
    Ok(())
}

/// `<phi, h_J^v>_v` for every `J` in `D_m(L)` from subtree sums of `v` and `phi v`.
fn weighted_haar_coefficients(mass: &[f64], phiv: &[f64], leaf_len: f64, l: IntervalId, m: u32) -> Vec<f64> {
    l.generation(m)
        .map(|j| {
            let (p, q) = (j.right().heap(), j.left().heap());
            let (hp, hm) = weighted_haar_values(mass[p] * leaf_len, mass[q] * leaf_len);
            (hp * phiv[p] + hm * phiv[q]) * leaf_len
        })
        .collect()
}

struct WeightedInput {
    avg: Vec<f64>,
    mass: Vec<f64>,
    phiv: Vec<f64>,
    leaf_len: f64,
}

impl WeightedInput {
    fn new(v: &Weight, phi: &StepFunction) -> Result<Self> {
        Ok(WeightedInput {
            avg: v.averages(),
            mass: v.as_function().subtree_sums(),
            phiv: phi.mul(v.as_function())?.subtree_sums(),
            leaf_len: (-(v.grid().depth() as f64)).exp2(),
        })
    }

    fn coefficients(&self, l: IntervalId, m: u32) -> Vec<f64> {
        weighted_haar_coefficients(&self.mass, &self.phiv, self.leaf_len, l, m)
    }

    fn s(&self, l: IntervalId, m: u32) -> f64 {
        l.generation(m)
            .zip(self.coefficients(l, m))
            .map(|(j, c)| c.abs() * self.avg[j.heap()].sqrt() * (j.length() / l.length()).sqrt())
            .sum()
    }

    fn s_bound(&self, l: IntervalId, m: u32) -> f64 {
        let a = self.coefficients(l, m);
        a.iter().map(|c| c * c).sum::<f64>().sqrt() * self.avg[l.heap()].sqrt()
    }
}

/// `R` from averages of `v` and of `|phi| v`.
fn r_sum(avg: &[f64], absv: &[f64], l: IntervalId, m: u32) -> f64 {
    l.generation(m)
        .map(|j| {
            let k = j.heap();
            let delta = avg[2 * k + 1] - avg[2 * k];
            delta.abs() / avg[k] * absv[k] * j.length() / l.length().sqrt()
        })
        .sum()
}

/// `Pb` from heap-indexed `b_I` and averages of `|phi| w`.
fn pb_sum(bc: &[f64], absw: &[f64], l: IntervalId, n: u32) -> f64 {
    l.generation(n)
        .map(|i| bc[i.heap()].abs() * absw[i.heap()] * (i.length() / l.length()).sqrt())
        .sum()
}

pub fn diagnostic_s(v: &Weight, phi: &StepFunction, l: IntervalId, m: u32) -> Result<f64> {
    check_generation(v.grid(), l, m)?;
    Ok(WeightedInput::new(v, phi)?.s(l, m))
}

/// `(sum_J <phi, h_J^v>_v^2)^{1/2} (m_L v)^{1/2}`, the Cauchy-Schwarz bound on `S`.
pub fn s_bound(v: &Weight, phi: &StepFunction, l: IntervalId, m: u32) -> Result<f64> {
    check_generation(v.grid(), l, m)?;
    Ok(WeightedInput::new(v, phi)?.s_bound(l, m))
}

pub fn diagnostic_r(v: &Weight, phi: &StepFunction, l: IntervalId, m: u32) -> Result<f64> {
    check_generation(v.grid(), l, m)?;
    let absv = phi.abs().mul(v.as_function())?.averages();
    Ok(r_sum(&v.averages(), &absv, l, m))
}

pub fn diagnostic_pb(b: &StepFunction, w: &Weight, phi: &StepFunction, l: IntervalId, n: u32) -> Result<f64> {
    b.same_grid(w.as_function())?;
    check_generation(w.grid(), l, n)?;
    let bc = haar_transform(b);
    let absw = phi.abs().mul(w.as_function())?.averages();
    Ok(pb_sum(bc.heap_coeffs(), &absw, l, n))
}

/// Largest measured ratio over a scan, with the interval attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct RatioReport {
    pub max_ratio: f64,
    pub witness: IntervalId,
    pub lhs: f64,
    pub rhs: f64,
    /// Intervals where the left side was nonzero.
    pub evaluated: usize,
}

impl RatioReport {
    fn empty() -> Self {
        RatioReport {
            max_ratio: 0.0,
            witness: IntervalId::root(),
            lhs: 0.0,
            rhs: 0.0,
            evaluated: 0,
        }
    }

    fn record(&mut self, l: IntervalId, lhs: f64, rhs: f64) {
        if lhs == 0.0 {
            return;
        }
        self.evaluated += 1;
        let r = lhs / rhs;
        if r > self.max_ratio || r.is_nan() {
            *self = RatioReport {
                max_ratio: r,
                witness: l,
                lhs,
                rhs,
                evaluated: self.evaluated,
            };
        }
    }
}

/// Right-hand sides of the `R` and `Pb` estimates with the unknown constant
/// set to one, for a fixed weight `w`, symbol `b` and complexity `(m, n)`.
///
/// With `C = m + n + 2` and `p = 2 - 1/C`:
///
/// ```text
/// R^{w^-1,m}_L g <= C (m_L w)^{-s/2} (m_L w^-1)^{1-s/2} inf_L (M_{w^-1}|g|^p)^{1/p} sqrt(mu^{m,s}_L)
/// Pb^{w,n}_L f   <= C (m_L w)^{1-s/2} (m_L w^-1)^{-s/2} inf_L (M_w|f|^p)^{1/p} nu^{n,s}_L
/// ```
///
/// where `mu^{k,s}_L` sums `tau^s` over `ST^k_L` and
/// `nu^{n,s}_L = ||b||_BMO sqrt(mu^{n,s}_L) + sqrt(mu^{b,n,s}_L)`.
pub struct BoundShapes {
    w: Weight,
    w_inv: Weight,
    b: StepFunction,
    b_coeffs: Vec<f64>,
    bmo: f64,
    m: u32,
    n: u32,
    profile: OscillationProfile,
    avg: Vec<f64>,
    avg_inv: Vec<f64>,
}

impl BoundShapes {
    pub fn new(w: &Weight, b: &StepFunction, m: u32, n: u32) -> Result<Self> {
        b.same_grid(w.as_function())?;
        let w_inv = w.inverse();
        Ok(BoundShapes {
            profile: OscillationProfile::new(w, &w_inv)?,
            avg: w.averages(),
            avg_inv: w_inv.averages(),
            b_coeffs: haar_transform(b).into_heap_coeffs(),
            bmo: bmo_norm(b),
            w: w.clone(),
            w_inv,
            b: b.clone(),
            m,
            n,
        })
    }

    pub fn order(&self) -> u32 {
        self.m + self.n + 2
    }

    /// `p = 2 - 1/(m + n + 2)`.
    pub fn exponent(&self) -> f64 {
        2.0 - 1.0 / self.order() as f64
    }

    fn lifted(&self, seq: &IndexedSequence, l: IntervalId, k: u32) -> Result<f64> {
        let st = self.profile.build(l, k, self.order())?;
        Ok(st.intervals().map(|i| seq.get(i)).sum())
    }

    /// `inf_{x in L} (M_v |phi|^p)(x)^{1/p}` for every interval, heap indexed.
    fn maximal_floor(&self, phi: &StepFunction, v: &Weight) -> Result<Vec<f64>> {
        let p = self.exponent();
        let mv = weighted_maximal(&phi.map(|x| x.abs().powf(p)), v)?;
        let n = mv.leaves().len();
        let mut mins = vec![0.0; 2 * n];
        mins[n..].copy_from_slice(mv.leaves());
        for k in (1..n).rev() {
            mins[k] = mins[2 * k].min(mins[2 * k + 1]);
        }
        Ok(mins.into_iter().map(|x| x.powf(p.recip())).collect())
    }

    /// Max over admissible `L` of `R^{w^-1,m}_L g` divided by its bound shape.
    pub fn r_ratio(&self, g: &StepFunction, s: f64) -> Result<RatioReport> {
        let grid = self.w.grid();
        let tau = tau_sequence(&self.w, s)?;
        let floor = self.maximal_floor(g, &self.w_inv)?;
        let c = self.order() as f64;
        let absv = g.abs().mul(self.w_inv.as_function())?.averages();
        let mut report = RatioReport::empty();
        for l in grid.internal().filter(|l| l.level + self.m < grid.depth()) {
            let lhs = r_sum(&self.avg_inv, &absv, l, self.m);
            let k = l.heap();
            let mu = self.lifted(&tau, l, self.m)?;
            let rhs = c * self.avg[k].powf(-s / 2.0) * self.avg_inv[k].powf(1.0 - s / 2.0) * floor[k] * mu.sqrt();
            report.record(l, lhs, rhs);
        }
        Ok(report)
    }

    /// Max over admissible `L` of `Pb^{w,n}_L f` divided by its bound shape.
    pub fn pb_ratio(&self, f: &StepFunction, s: f64) -> Result<RatioReport> {
        let grid = self.w.grid();
        let tau = tau_sequence(&self.w, s)?;
        let mub = b_weight_sequence(&self.b, &self.w, s)?;
        let floor = self.maximal_floor(f, &self.w)?;
        let c = self.order() as f64;
        let absw = f.abs().mul(self.w.as_function())?.averages();
        let mut report = RatioReport::empty();
        for l in grid.internal().filter(|l| l.level + self.n < grid.depth()) {
            let lhs = pb_sum(&self.b_coeffs, &absw, l, self.n);
            let k = l.heap();
            let nu = self.bmo * self.lifted(&tau, l, self.n)?.sqrt() + self.lifted(&mub, l, self.n)?.sqrt();
            let rhs = c * self.avg[k].powf(1.0 - s / 2.0) * self.avg_inv[k].powf(-s / 2.0) * floor[k] * nu;
            report.record(l, lhs, rhs);
        }
        Ok(report)
    }

    /// Max over admissible `L` of `S^{w^-1,m}_L g` over its Cauchy-Schwarz bound (at most one).
    pub fn s_ratio(&self, g: &StepFunction) -> Result<RatioReport> {
        let grid = self.w.grid();
        let input = WeightedInput::new(&self.w_inv, g)?;
        let mut report = RatioReport::empty();
        for l in grid.internal().filter(|l| l.level + self.m < grid.depth()) {
            let lhs = input.s(l, self.m);
            let rhs = input.s_bound(l, self.m);
            report.record(l, lhs, rhs);
        }
        Ok(report)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dyadic::weighted_haar;
    use crate::weights::WeightFamilySpec;

    fn cascade(d: u32, delta: f64, seed: u64) -> Weight {
        WeightFamilySpec::Cascade { depth: d, delta, seed }.generate().unwrap()
    }

    fn wavy(g: DyadicGrid) -> StepFunction {
        StepFunction::on_grid(g, (0..g.leaf_count()).map(|i| (i as f64 * 0.37).cos() - 0.2).collect()).unwrap()
    }

    #[test]
    fn s_single_term() {
        let v = cascade(5, 0.6, 2);
        let phi = wavy(v.grid());
        let l = IntervalId::new(2, 3).unwrap();
        let h = weighted_haar(v.as_function(), l).unwrap();
        let coeff = phi.mul(&h).unwrap().mul(v.as_function()).unwrap().integral();
        let expect = coeff.abs() * v.as_function().average(l).unwrap().sqrt();
        assert!((diagnostic_s(&v, &phi, l, 0).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn s_vanishes_on_orthogonal_input() {
        let v = cascade(5, 0.6, 2);
        let l = IntervalId::new(1, 0).unwrap();
        // a function constant on each J in D_2(L) is v-orthogonal to every h_J^v, J in D_2(L)
        let phi = StepFunction::on_grid(v.grid(), (0..32).map(|i| (i / 4) as f64).collect()).unwrap();
        assert!(diagnostic_s(&v, &phi, l, 2).unwrap().abs() < 1e-14);
    }

    #[test]
    fn flat_weight_and_constant_symbol_vanish() {
        let g = DyadicGrid::new(5).unwrap();
        let one = Weight::lebesgue(g);
        let phi = wavy(g);
        assert_eq!(diagnostic_r(&one, &phi, IntervalId::root(), 2).unwrap(), 0.0);
        let b = StepFunction::constant(g, 3.0);
        assert_eq!(diagnostic_pb(&b, &one, &phi, IntervalId::root(), 2).unwrap(), 0.0);
        assert!(diagnostic_r(&one, &phi, IntervalId::root(), 5).is_err());
    }

    #[test]
    fn s_ratio_never_exceeds_one() {
        let w = cascade(7, 0.8, 9);
        let b = wavy(w.grid());
        for m in 0..3 {
            let shapes = BoundShapes::new(&w, &b, m, 1).unwrap();
            let r = shapes.s_ratio(&wavy(w.grid())).unwrap();
            assert!(r.max_ratio <= 1.0 + 1e-12, "m={m}: {r:?}");
            assert!(r.evaluated > 0);
        }
    }

    #[test]
    fn r_and_pb_ratios_finite() {
        let w = cascade(7, 0.7, 4);
        let b = wavy(w.grid());
        let shapes = BoundShapes::new(&w, &b, 1, 2).unwrap();
        assert_eq!(shapes.exponent(), 2.0 - 0.2);
        for s in [1.0, 2.0] {
            let r = shapes.r_ratio(&b, s).unwrap();
            let pb = shapes.pb_ratio(&b, s).unwrap();
            assert!(r.max_ratio.is_finite() && r.max_ratio > 0.0);
            assert!(pb.max_ratio.is_finite() && pb.max_ratio > 0.0);
        }
    }
}
