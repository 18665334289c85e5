//! The exact image of a single Haar function under a maximal t-Haar multiplier.
//!
//! With `c^L_{I,J} = sqrt(|I||J|)/|L|` and `L0` the `n`-th ancestor of `I0`,
//!
//! ```text
//! ||T h_{I0}||_p^p = |I0|^{p/2} / |L0|^{p-1} * m_{L0} w^{tp} / (m_{L0} w)^{tp}
//! ```
//!
//! so `2^{n(p-1)} (||T h_{I0}||_p / ||h_{I0}||_p)^p` is exactly the `C_{tp}`
//! quotient at `L0`.

use dyadlab_core::dyadic::{IntervalId, StepFunction};
use dyadlab_core::operators::{CoefficientFamily, OperatorSpec};
use dyadlab_core::weights::{cs_scan, Weight};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// Relative discrepancy tolerated between the two evaluations.
pub const IDENTITY_TOL: f64 = 1e-11;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum I0Choice {
    All,
    One(IntervalId),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct IdentityRow {
    pub i0_level: u32,
    pub i0_index: usize,
    pub l0_level: u32,
    pub l0_index: usize,
    pub direct: f64,
    pub closed_form: f64,
    pub discrepancy: f64,
    /// `2^{n(p-1)} (||T h_{I0}||_p / ||h_{I0}||_p)^p` from the direct evaluation.
    pub scaled_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NecessaryReport {
    pub weight: String,
    pub t: f64,
    pub p: f64,
    pub m: u32,
    pub n: u32,
    pub rows: Vec<IdentityRow>,
    pub max_discrepancy: f64,
    pub max_scaled_ratio: f64,
    /// `C_{tp}` supremum over the outer levels the truncated operator reaches.
    pub c_tp_admissible: f64,
    /// `C_{tp}` over the whole grid.
    pub c_tp_full: f64,
    /// Identity within tolerance and `c_tp_admissible <= max_scaled_ratio`.
    pub passed: bool,
}

fn leaf_mean(x: &[f64], depth: u32, i: IntervalId) -> f64 {
    let r = i.leaf_range(depth);
    let c = r.len() as f64;
    x[r].iter().sum::<f64>() / c
}

/// `||T h_{I0}||_p^p` computed twice for each admissible `I0`.
pub fn cmd_necessary(
    w: &Weight,
    weight_id: &str,
    t: f64,
    p: f64,
    m: u32,
    n: u32,
    i0: I0Choice,
) -> LabResult<NecessaryReport> {
    let mut reps = necessary_reports(w, weight_id, t, &[p], m, n, i0)?;
    Ok(reps.remove(0))
}

/// [`cmd_necessary`] for several exponents, applying the operator once per `I0`.
pub fn necessary_reports(
    w: &Weight,
    weight_id: &str,
    t: f64,
    ps: &[f64],
    m: u32,
    n: u32,
    i0: I0Choice,
) -> LabResult<Vec<NecessaryReport>> {
    if let Some(p) = ps.iter().find(|p| !(**p >= 1.0 && p.is_finite())) {
        return Err(LabError::Config(format!("p must be >= 1, got {p}")));
    }
    let grid = w.grid();
    let d = grid.depth();
    let op = OperatorSpec::haar_multiplier(t, w.clone(), m, n, CoefficientFamily::Maximal)?;
    let top = op.max_outer_level(d)?;
    let prepared = op.prepare(grid)?;

    let targets: Vec<IntervalId> = match i0 {
        I0Choice::All => (n..=top + n)
            .flat_map(|level| (0..1usize << level).map(move |k| IntervalId::new(level, k).expect("level <= depth")))
            .collect(),
        I0Choice::One(id) => {
            grid.check(id)?;
            if id.level < n {
                return Err(LabError::Config(format!("I0 = {id} is shallower than n = {n}")));
            }
            if id.level > top + n {
                return Err(LabError::Config(format!(
                    "I0 = {id} lies below the deepest admissible level {}",
                    top + n
                )));
            }
            vec![id]
        }
    };

    let leaf_len = (-(d as f64)).exp2();
    let wtp: Vec<Vec<f64>> = ps
        .iter()
        .map(|p| w.leaves().iter().map(|x| x.powf(t * p)).collect())
        .collect();
    let mut rows: Vec<Vec<IdentityRow>> = vec![Vec::with_capacity(targets.len()); ps.len()];
    for &i in &targets {
        let l0 = i.ancestor(n).expect("level >= n");
        let image = prepared.apply(&StepFunction::haar(grid, i)?)?;
        let mw = leaf_mean(w.leaves(), d, l0);
        for (k, &p) in ps.iter().enumerate() {
            let direct = image.leaves().iter().map(|x| x.abs().powf(p)).sum::<f64>() * leaf_len;
            let q = leaf_mean(&wtp[k], d, l0) / mw.powf(t * p);
            let closed_form = i.length().powf(p / 2.0) / l0.length().powf(p - 1.0) * q;
            let discrepancy = (direct - closed_form).abs() / closed_form.abs();
            let h_norm = i.length().powf(1.0 - p / 2.0);
            rows[k].push(IdentityRow {
                i0_level: i.level,
                i0_index: i.index,
                l0_level: l0.level,
                l0_index: l0.index,
                direct,
                closed_form,
                discrepancy,
                scaled_ratio: ((n as f64) * (p - 1.0)).exp2() * direct / h_norm,
            });
        }
    }

    let a = w.averages();
    Ok(ps
        .iter()
        .zip(rows)
        .map(|(&p, rows)| {
            let s = t * p;
            let b = w.pow(s).averages();
            let c_tp_admissible = grid
                .up_to_level(top)
                .map(|l| b[l.heap()] * a[l.heap()].powf(-s))
                .fold(f64::NEG_INFINITY, f64::max);
            let max_discrepancy = rows.iter().map(|r| r.discrepancy).fold(0.0, f64::max);
            let max_scaled_ratio = rows.iter().map(|r| r.scaled_ratio).fold(0.0, f64::max);
            let passed = max_discrepancy < IDENTITY_TOL
                && (i0 != I0Choice::All || c_tp_admissible <= max_scaled_ratio * (1.0 + IDENTITY_TOL));
            NecessaryReport {
                weight: weight_id.to_string(),
                t,
                p,
                m,
                n,
                rows,
                max_discrepancy,
                max_scaled_ratio,
                c_tp_admissible,
                c_tp_full: cs_scan(w, s).value,
                passed,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyadlab_core::weights::WeightFamilySpec;
    use dyadlab_core::DyadicGrid;

    #[test]
    fn flat_weight_gives_bare_lengths() {
        let w = Weight::lebesgue(DyadicGrid::new(6).unwrap());
        let rep = cmd_necessary(&w, "flat", 0.5, 2.0, 1, 1, I0Choice::All).unwrap();
        for r in &rep.rows {
            let i = IntervalId::new(r.i0_level, r.i0_index).unwrap();
            let l = IntervalId::new(r.l0_level, r.l0_index).unwrap();
            assert!((r.closed_form - i.length() / l.length()).abs() < 1e-15);
            assert!(r.discrepancy < 1e-14);
        }
        assert!(rep.passed);
        assert_eq!(rep.c_tp_full, 1.0);
    }

    #[test]
    fn identity_on_cascade_depth_8() {
        let w = WeightFamilySpec::Cascade {
            depth: 8,
            delta: 0.8,
            seed: 4,
        }
        .generate()
        .unwrap();
        let rep = cmd_necessary(&w, "c", 1.0, 2.0, 1, 1, I0Choice::All).unwrap();
        assert!(rep.max_discrepancy < 1e-12, "{}", rep.max_discrepancy);
        assert!(rep.passed);
        assert!(rep.c_tp_admissible <= rep.c_tp_full);
        // the scaled ratios realize the admissible supremum exactly
        assert!((rep.c_tp_admissible - rep.max_scaled_ratio).abs() <= 1e-11 * rep.c_tp_admissible);
    }

    #[test]
    fn shallow_i0_rejected() {
        let w = Weight::lebesgue(DyadicGrid::new(6).unwrap());
        let err = cmd_necessary(
            &w,
            "flat",
            1.0,
            2.0,
            0,
            2,
            I0Choice::One(IntervalId::new(1, 0).unwrap()),
        );
        assert!(matches!(err, Err(LabError::Config(_))));
    }
}
