//! Norm/bound tables for paraproducts and t-Haar multipliers.

use std::collections::BTreeMap;

use dyadlab_core::dyadic::StepFunction;
use dyadlab_core::operators::{weighted_norm_seeded, OperatorDescriptor, OperatorKind};
use dyadlab_core::weights::{ap_characteristic, bmo_norm, cs_characteristic, Weight, WeightFamilySpec};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{load_weight, weight_family_name, ExperimentConfig, SymbolSpec};
use crate::error::{LabError, LabResult};

/// One measured norm against its bound denominator.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BoundRow {
    pub weight: String,
    pub family: String,
    pub symbol: Option<String>,
    pub operator: String,
    pub m: u32,
    pub n: u32,
    pub t: Option<f64>,
    pub measured_norm: f64,
    pub converged: bool,
    pub iterations: usize,
    pub a2: f64,
    pub c_2t: Option<f64>,
    pub a2_w2t: Option<f64>,
    pub bmo: Option<f64>,
    pub denominator: f64,
    pub ratio: f64,
}

/// Column order of [`BoundRow`] in CSV output.
pub const BOUND_COLUMNS: &[&str] = &[
    "weight",
    "family",
    "symbol",
    "operator",
    "m",
    "n",
    "t",
    "measured_norm",
    "converged",
    "iterations",
    "a2",
    "c_2t",
    "a2_w2t",
    "bmo",
    "denominator",
    "ratio",
];

/// Statistics of the rows sharing weight family, operator kind, `(m, n)` and `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FamilySummary {
    pub family: String,
    pub kind: String,
    pub m: u32,
    pub n: u32,
    pub t: Option<f64>,
    pub rows: usize,
    pub median_ratio: f64,
    pub max_ratio: f64,
    /// `max_ratio / median_ratio`, zero when the median vanishes.
    pub spread: f64,
    /// Least-squares slope of `ln measured_norm` against `ln [w]_{A_2}`.
    pub slope: Option<f64>,
    pub unconverged: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub rows: Vec<BoundRow>,
    pub families: Vec<FamilySummary>,
}

struct WeightEntry {
    spec: WeightFamilySpec,
    w: Weight,
    a2: f64,
}

fn load_weights(cfg: &ExperimentConfig) -> LabResult<Vec<WeightEntry>> {
    if cfg.weights.is_empty() {
        return Err(LabError::Config("no weights given".into()));
    }
    cfg.weight_specs()?
        .into_iter()
        .map(|spec| {
            let w = load_weight(&spec, cfg.depth)?;
            let a2 = ap_characteristic(&w, 2.0)?.value;
            Ok(WeightEntry { spec, w, a2 })
        })
        .collect()
}

fn ratio(norm: f64, denominator: f64) -> f64 {
    if norm == 0.0 {
        0.0
    } else {
        norm / denominator
    }
}

/// `||pi_b^{m,n}||_{L^2(w)}` against `(m+n+2)^5 [w]_{A_2} ||b||_BMO`.
pub fn cmd_sweep_paraproduct(cfg: &ExperimentConfig) -> LabResult<SweepReport> {
    cfg.validate()?;
    let weights = load_weights(cfg)?;
    let symbols: Vec<(SymbolSpec, StepFunction, f64)> = cfg
        .symbol_specs()?
        .into_iter()
        .map(|s| {
            let b = s.generate(cfg.depth)?;
            let bmo = bmo_norm(&b);
            Ok((s, b, bmo))
        })
        .collect::<LabResult<_>>()?;
    let ops = cfg.operator_descriptors("para")?;
    let n_ops = ops.len();
    let jobs: Vec<(usize, usize, usize)> = (0..weights.len())
        .flat_map(|i| (0..symbols.len()).flat_map(move |j| (0..n_ops).map(move |k| (i, j, k))))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, j, k)| {
            let we = &weights[i];
            let (sym, b, bmo) = &symbols[j];
            let op = ops[k].bind(Some(b), None)?;
            let est = weighted_norm_seeded(&op, &we.w, cfg.tol, cfg.max_iter, cfg.seed)?;
            let c = (op.m + op.n + 2) as f64;
            let denominator = c.powi(5) * we.a2 * bmo;
            Ok(BoundRow {
                weight: we.spec.to_string(),
                family: weight_family_name(&we.spec).into(),
                symbol: Some(sym.to_string()),
                operator: op.to_string(),
                m: op.m,
                n: op.n,
                t: None,
                measured_norm: est.value,
                converged: est.converged,
                iterations: est.iterations,
                a2: we.a2,
                c_2t: None,
                a2_w2t: None,
                bmo: Some(*bmo),
                denominator,
                ratio: ratio(est.value, denominator),
            })
        })
        .collect::<LabResult<Vec<_>>>()?;
    Ok(SweepReport {
        families: summarize(&rows, "para"),
        rows,
    })
}

/// `||T^{m,n}_{t,w}||_{L^2}` against `(m+n+2)^3 [w]_{C_{2t}}^{1/2} [w^{2t}]_{A_2}^{1/2}`.
pub fn cmd_sweep_multiplier(cfg: &ExperimentConfig) -> LabResult<SweepReport> {
    cfg.validate()?;
    let weights = load_weights(cfg)?;
    let ops = cfg.operator_descriptors("tmult")?;
    let mut ts: Vec<f64> = ops
        .iter()
        .filter_map(|d| match d.kind {
            OperatorKind::HaarMultiplier { t } => Some(t),
            _ => None,
        })
        .collect();
    ts.sort_by(f64::total_cmp);
    ts.dedup();
    // characteristics per (weight, t)
    let mut chars: BTreeMap<(usize, u64), (f64, f64)> = BTreeMap::new();
    for (i, we) in weights.iter().enumerate() {
        for &t in &ts {
            let c2t = cs_characteristic(&we.w, 2.0 * t)?.value;
            let a2t = ap_characteristic(&we.w.pow(2.0 * t), 2.0)?.value;
            chars.insert((i, t.to_bits()), (c2t, a2t));
        }
    }
    let one = Weight::lebesgue(dyadlab_core::DyadicGrid::new(cfg.depth)?);
    let jobs: Vec<(usize, usize)> = (0..weights.len())
        .flat_map(|i| (0..ops.len()).map(move |k| (i, k)))
        .collect();
    let rows = jobs
        .par_iter()
        .map(|&(i, k)| {
            let we = &weights[i];
            let d: &OperatorDescriptor = &ops[k];
            let t = match d.kind {
                OperatorKind::HaarMultiplier { t } => t,
                _ => unreachable!("filtered to multipliers"),
            };
            let op = d.bind(None, Some(&we.w))?;
            let est = weighted_norm_seeded(&op, &one, cfg.tol, cfg.max_iter, cfg.seed)?;
            let (c2t, a2t) = chars[&(i, t.to_bits())];
            let c = (op.m + op.n + 2) as f64;
            let denominator = c.powi(3) * c2t.sqrt() * a2t.sqrt();
            Ok(BoundRow {
                weight: we.spec.to_string(),
                family: weight_family_name(&we.spec).into(),
                symbol: None,
                operator: op.to_string(),
                m: op.m,
                n: op.n,
                t: Some(t),
                measured_norm: est.value,
                converged: est.converged,
                iterations: est.iterations,
                a2: we.a2,
                c_2t: Some(c2t),
                a2_w2t: Some(a2t),
                bmo: None,
                denominator,
                ratio: ratio(est.value, denominator),
            })
        })
        .collect::<LabResult<Vec<_>>>()?;
    Ok(SweepReport {
        families: summarize(&rows, "tmult"),
        rows,
    })
}

/// A single norm estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormRow {
    pub operator: String,
    pub weight: String,
    pub symbol: Option<String>,
    pub value: f64,
    pub iterations: usize,
    pub residual: f64,
    pub converged: bool,
}

/// `||op||_{L^2(w)}`; `w` defaults to Lebesgue measure and also supplies the
/// multiplier weight.
pub fn cmd_norm(
    op: &OperatorDescriptor,
    weight: Option<&WeightFamilySpec>,
    symbol: Option<&SymbolSpec>,
    cfg: &ExperimentConfig,
) -> LabResult<NormRow> {
    let w = match weight {
        Some(spec) => load_weight(spec, cfg.depth)?,
        None => Weight::lebesgue(dyadlab_core::DyadicGrid::new(cfg.depth)?),
    };
    let b = symbol.map(|s| s.generate(cfg.depth)).transpose()?;
    let spec = op.bind(b.as_ref(), Some(&w))?;
    let plain = Weight::lebesgue(w.grid());
    // multipliers are measured on L^2(dx), everything else on L^2(w)
    let measure = if matches!(op.kind, OperatorKind::HaarMultiplier { .. }) {
        &plain
    } else {
        &w
    };
    let est = weighted_norm_seeded(&spec, measure, cfg.tol, cfg.max_iter, cfg.seed)?;
    Ok(NormRow {
        operator: spec.to_string(),
        weight: weight.map_or_else(|| "lebesgue".to_string(), |s| s.to_string()),
        symbol: symbol.map(|s| s.to_string()),
        value: est.value,
        iterations: est.iterations,
        residual: est.residual,
        converged: est.converged,
    })
}

pub fn median(values: &mut [f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() / 2;
    if values.len() % 2 == 1 {
        values[k]
    } else {
        0.5 * (values[k - 1] + values[k])
    }
}

/// Least-squares slope of `y` on `x`; `None` without spread in `x`.
pub fn regression_slope(points: &[(f64, f64)]) -> Option<f64> {
    if points.len() < 3 {
        return None;
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx <= 1e-12 {
        None
    } else {
        Some(sxy / sxx)
    }
}

fn summarize(rows: &[BoundRow], kind: &str) -> Vec<FamilySummary> {
    let mut groups: BTreeMap<(String, u32, u32, Option<u64>), Vec<&BoundRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.family.clone(), r.m, r.n, r.t.map(f64::to_bits)))
            .or_default()
            .push(r);
    }
    let mut out: Vec<FamilySummary> = groups
        .into_iter()
        .map(|((family, m, n, _), rs)| {
            let mut ratios: Vec<f64> = rs.iter().map(|r| r.ratio).collect();
            let max_ratio = ratios.iter().copied().fold(0.0, f64::max);
            let median_ratio = median(&mut ratios);
            let points: Vec<(f64, f64)> = rs
                .iter()
                .filter(|r| r.measured_norm > 0.0)
                .map(|r| (r.a2.ln(), r.measured_norm.ln()))
                .collect();
            FamilySummary {
                family,
                kind: kind.into(),
                m,
                n,
                t: rs[0].t,
                rows: rs.len(),
                median_ratio,
                max_ratio,
                spread: if median_ratio > 0.0 {
                    max_ratio / median_ratio
                } else {
                    0.0
                },
                slope: if kind == "para" {
                    regression_slope(&points)
                } else {
                    None
                },
                unconverged: rs.iter().filter(|r| !r.converged).count(),
            }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.family.as_str(), a.t.unwrap_or(0.0), a.m, a.n)
            .partial_cmp(&(b.family.as_str(), b.t.unwrap_or(0.0), b.m, b.n))
            .expect("finite t")
    });
    out
}
