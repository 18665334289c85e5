//! Weights and their dyadic characteristics.
//!
//! Every supremum here is exact: all `2^(D+1) - 1` intervals of the grid are
//! scanned using heap-indexed averages, which costs `O(2^D)`.

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::dyadic::{check_positive, haar_transform, DyadicGrid, IntervalId, StepFunction};
use crate::error::{Error, Result};

/// Strictly positive step function.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(transparent)]
pub struct Weight(StepFunction);

impl<'de> Deserialize<'de> for Weight {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let f = StepFunction::deserialize(d)?;
        Weight::new(f).map_err(serde::de::Error::custom)
    }
}

impl Weight {
    pub fn new(f: StepFunction) -> Result<Self> {
        check_positive(&f)?;
        Ok(Weight(f))
    }

    pub fn from_leaves(depth: u32, leaves: Vec<f64>) -> Result<Self> {
        Weight::new(StepFunction::new(depth, leaves)?)
    }

    /// Lebesgue measure on the grid.
    pub fn lebesgue(grid: DyadicGrid) -> Self {
        Weight(StepFunction::constant(grid, 1.0))
    }

    #[inline]
    pub fn as_function(&self) -> &StepFunction {
        &self.0
    }

    pub fn into_function(self) -> StepFunction {
        self.0
    }

    #[inline]
    pub fn grid(&self) -> DyadicGrid {
        self.0.grid()
    }

    #[inline]
    pub fn leaves(&self) -> &[f64] {
        self.0.leaves()
    }

    /// Leafwise power `w^s`.
    pub fn pow(&self, s: f64) -> Weight {
        let f = if s == 1.0 {
            self.0.clone()
        } else if s == -1.0 {
            self.0.map(f64::recip)
        } else if s == 0.0 {
            self.0.map(|_| 1.0)
        } else {
            self.0.map(|x| x.powf(s))
        };
        // Powers of finite positive numbers may overflow; fall back to the checked path.
        match check_positive(&f) {
            Ok(()) => Weight(f),
            Err(_) => Weight(f.map(|x| x.clamp(f64::MIN_POSITIVE, f64::MAX))),
        }
    }

    pub fn inverse(&self) -> Weight {
        self.pow(-1.0)
    }

    /// `w(I) = int_I w`, heap indexed.
    pub fn masses(&self) -> Vec<f64> {
        let leaf_len = (-(self.grid().depth() as f64)).exp2();
        let mut s = self.0.subtree_sums();
        s.iter_mut().for_each(|x| *x *= leaf_len);
        s
    }

    /// `m_I w`, heap indexed.
    pub fn averages(&self) -> Vec<f64> {
        self.0.averages()
    }
}

impl AsRef<StepFunction> for Weight {
    fn as_ref(&self) -> &StepFunction {
        &self.0
    }
}

/// Value of a supremum over intervals together with an interval attaining it.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicReport {
    pub value: f64,
    pub witness: IntervalId,
}

/// Supremum of `quotient(I)` over intervals yielded by `ids`; first maximizer wins.
pub(crate) fn sup_over(
    ids: impl Iterator<Item = IntervalId>,
    quotient: impl Fn(IntervalId) -> f64,
) -> CharacteristicReport {
    let mut best = CharacteristicReport {
        value: f64::NEG_INFINITY,
        witness: IntervalId::root(),
    };
    for id in ids {
        let q = quotient(id);
        if q > best.value {
            best = CharacteristicReport { value: q, witness: id };
        }
    }
    best
}

fn require_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("exponent p must be > 1, got {p}")))
    }
}

/// `[w]_{A_p} = sup_I (m_I w)(m_I w^{-1/(p-1)})^{p-1}`.
pub fn ap_characteristic(w: &Weight, p: f64) -> Result<CharacteristicReport> {
    require_p(p)?;
    let a = w.averages();
    let b = w.pow(-1.0 / (p - 1.0)).averages();
    Ok(sup_over(w.grid().intervals(), |i| {
        let k = i.heap();
        a[k] * b[k].powf(p - 1.0)
    }))
}

/// `[w]_{RH_p} = sup_I (m_I w^p)^{1/p} / m_I w`.
pub fn rh_characteristic(w: &Weight, p: f64) -> Result<CharacteristicReport> {
    require_p(p)?;
    let a = w.averages();
    let b = w.pow(p).averages();
    Ok(sup_over(w.grid().intervals(), |i| {
        let k = i.heap();
        b[k].powf(p.recip()) / a[k]
    }))
}

/// `sup_I (m_I w^s)(m_I w)^{-s}` scanned without shortcuts.
pub fn cs_scan(w: &Weight, s: f64) -> CharacteristicReport {
    let a = w.averages();
    let b = w.pow(s).averages();
    sup_over(w.grid().intervals(), |i| {
        let k = i.heap();
        b[k] * a[k].powf(-s)
    })
}

/// `[w]_{C_s} = sup_I (m_I w^s)(m_I w)^{-s}`.
///
/// For `s` in `[0, 1]` Jensen gives a value of at most one, attained on
/// every leaf, so the result is exactly `1` with the first leaf as witness.
pub fn cs_characteristic(w: &Weight, s: f64) -> Result<CharacteristicReport> {
    if !s.is_finite() {
        return Err(Error::InvalidParameter(format!("exponent s must be finite, got {s}")));
    }
    if (0.0..=1.0).contains(&s) {
        return Ok(CharacteristicReport {
            value: 1.0,
            witness: w.grid().leaf(0),
        });
    }
    Ok(cs_scan(w, s))
}

/// `D(w) = sup_{I != root} w(parent(I)) / w(I)`.
pub fn doubling_constant(w: &Weight) -> CharacteristicReport {
    let mass = w.masses();
    sup_over(w.grid().intervals().skip(1), |i| mass[i.heap() / 2] / mass[i.heap()])
}

/// `||b||_{BMO}` with the interval `J` attaining the supremum.
pub fn bmo_report(b: &StepFunction) -> CharacteristicReport {
    let grid = b.grid();
    let spec = haar_transform(b);
    let c = spec.heap_coeffs();
    let n = grid.leaf_count();
    // subtree sums of b_I^2 over internal intervals
    let mut acc = vec![0.0; n];
    for k in (1..n).rev() {
        let below = if 2 * k < n { acc[2 * k] + acc[2 * k + 1] } else { 0.0 };
        acc[k] = c[k] * c[k] + below;
    }
    let r = sup_over(grid.internal(), |i| acc[i.heap()] / i.length());
    CharacteristicReport {
        value: r.value.max(0.0).sqrt(),
        witness: r.witness,
    }
}

/// `||b||_{BMO^d} = (sup_J |J|^{-1} sum_{I in D(J)} b_I^2)^{1/2}`.
pub fn bmo_norm(b: &StepFunction) -> f64 {
    bmo_report(b).value
}

/// `(M_v f)(x) = max_{I containing x} m_I^v |f|`, top-down in `O(2^D)`.
pub fn weighted_maximal(f: &StepFunction, v: &Weight) -> Result<StepFunction> {
    f.same_grid(v.as_function())?;
    let grid = f.grid();
    let n = grid.leaf_count();
    let num = f.abs().mul(v.as_function())?.subtree_sums();
    let den = v.as_function().subtree_sums();
    let mut best = vec![0.0; 2 * n];
    best[1] = num[1] / den[1];
    for k in 2..2 * n {
        best[k] = best[k / 2].max(num[k] / den[k]);
    }
    best.drain(..n);
    StepFunction::on_grid(grid, best)
}

/// `||f||_{L^q(v)}`.
pub fn weighted_lq_norm(f: &StepFunction, v: &Weight, q: f64) -> Result<f64> {
    f.same_grid(v.as_function())?;
    let n = f.leaves().len() as f64;
    let s: f64 = f
        .leaves()
        .iter()
        .zip(v.leaves())
        .map(|(x, w)| x.abs().powf(q) * w)
        .sum();
    Ok((s / n).powf(q.recip()))
}

/// Test-weight generators.
#[derive(Clone, Debug, PartialEq)]
pub enum WeightFamilySpec {
    /// Multiplicative cascade: `m_{I+-} w = m_I w (1 +- x_I)`, `x_I ~ U[-delta, delta]`.
    Cascade { depth: u32, delta: f64, seed: u64 },
    /// Exact cell averages of `|x - x0|^a`.
    Power { depth: u32, exponent: f64, center: f64 },
    /// Weight read from a step-function JSON file.
    File { path: PathBuf },
}

impl WeightFamilySpec {
    /// Parse `cascade:depth=10,delta=0.6,seed=7`, `power:depth=10,a=0.8,x0=0.5`
    /// or `file:PATH`. A missing `depth` falls back to `default_depth`.
    pub fn parse(s: &str, default_depth: Option<u32>) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            spec: s.to_string(),
            reason,
        };
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if kind == "file" {
            if rest.is_empty() {
                return Err(err("missing path".into()));
            }
            return Ok(WeightFamilySpec::File { path: rest.into() });
        }
        let kv = parse_kv(s, rest)?;
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let num = |k: &str, default: Option<f64>| -> Result<f64> {
            match get(k) {
                Some(v) => v.parse().map_err(|_| err(format!("bad number for {k}: {v:?}"))),
                None => default.ok_or_else(|| err(format!("missing {k}"))),
            }
        };
        let depth = match get("depth") {
            Some(v) => v.parse().map_err(|_| err(format!("bad depth {v:?}")))?,
            None => default_depth.ok_or_else(|| err("missing depth".into()))?,
        };
        let allowed: &[&str] = match kind {
            "cascade" => &["depth", "delta", "seed"],
            "power" => &["depth", "a", "x0"],
            _ => return Err(err(format!("unknown weight family {kind:?}"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(err(format!("unknown key {k:?}")));
        }
        let spec = match kind {
            "cascade" => {
                let seed = match get("seed") {
                    Some(v) => v.parse().map_err(|_| err(format!("bad seed {v:?}")))?,
                    None => 0,
                };
                WeightFamilySpec::Cascade {
                    depth,
                    delta: num("delta", None)?,
                    seed,
                }
            }
            _ => WeightFamilySpec::Power {
                depth,
                exponent: num("a", None)?,
                center: num("x0", Some(0.5))?,
            },
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            WeightFamilySpec::Cascade { depth, delta, .. } => {
                DyadicGrid::new(depth)?;
                if !(0.0..1.0).contains(&delta) {
                    return Err(Error::InvalidParameter(format!(
                        "cascade delta must lie in [0, 1), got {delta}"
                    )));
                }
            }
            WeightFamilySpec::Power {
                depth,
                exponent,
                center,
            } => {
                DyadicGrid::new(depth)?;
                if !(exponent > -1.0 && exponent.is_finite()) {
                    return Err(Error::InvalidParameter(format!(
                        "power exponent must be > -1, got {exponent}"
                    )));
                }
                if !(0.0..=1.0).contains(&center) {
                    return Err(Error::InvalidParameter(format!(
                        "power center must lie in [0, 1], got {center}"
                    )));
                }
            }
            WeightFamilySpec::File { .. } => {}
        }
        Ok(())
    }

    pub fn generate(&self) -> Result<Weight> {
        generate(self)
    }
}

impl FromStr for WeightFamilySpec {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        WeightFamilySpec::parse(s, None)
    }
}

impl fmt::Display for WeightFamilySpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            WeightFamilySpec::Cascade { depth, delta, seed } => {
                write!(f, "cascade:depth={depth},delta={delta},seed={seed}")
            }
            WeightFamilySpec::Power {
                depth,
                exponent,
                center,
            } => write!(f, "power:depth={depth},a={exponent},x0={center}"),
            WeightFamilySpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}

/// Split `k=v,k=v` into pairs.
pub(crate) fn parse_kv(spec: &str, body: &str) -> Result<Vec<(String, String)>> {
    if body.trim().is_empty() {
        return Ok(Vec::new());
    }
    body.split(',')
        .map(|item| {
            item.split_once('=')
                .map(|(k, v)| (k.trim().to_string(), v.trim().to_string()))
                .ok_or_else(|| Error::Parse {
                    spec: spec.to_string(),
                    reason: format!("expected key=value, got {item:?}"),
                })
        })
        .collect()
}

pub fn generate(spec: &WeightFamilySpec) -> Result<Weight> {
    spec.validate()?;
    match *spec {
        WeightFamilySpec::Cascade { depth, delta, seed } => Ok(cascade(depth, delta, seed)),
        WeightFamilySpec::Power {
            depth,
            exponent,
            center,
        } => power_weight(depth, exponent, center),
        WeightFamilySpec::File { ref path } => {
            let text = std::fs::read_to_string(path).map_err(|e| Error::Io {
                path: path.display().to_string(),
                reason: e.to_string(),
            })?;
            let f: StepFunction = serde_json::from_str(&text).map_err(|e| Error::Parse {
                spec: path.display().to_string(),
                reason: e.to_string(),
            })?;
            Weight::new(f)
        }
    }
}

fn cascade(depth: u32, delta: f64, seed: u64) -> Weight {
    let n = 1usize << depth;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut avg = vec![0.0; 2 * n];
    avg[1] = 1.0;
    for k in 1..n {
        let x = delta * (2.0 * rng.gen::<f64>() - 1.0);
        avg[2 * k] = avg[k] * (1.0 - x);
        avg[2 * k + 1] = avg[k] * (1.0 + x);
    }
    avg.drain(..n);
    Weight(StepFunction::new(depth, avg).expect("cascade leaf count"))
}

fn power_weight(depth: u32, a: f64, x0: f64) -> Result<Weight> {
    let n = 1usize << depth;
    // antiderivative of |x - x0|^a
    let prim = |x: f64| {
        let d = x - x0;
        d.signum() * d.abs().powf(a + 1.0) / (a + 1.0)
    };
    let h = (n as f64).recip();
    let leaves = (0..n)
        .map(|k| {
            let (lo, hi) = (k as f64 * h, (k + 1) as f64 * h);
            (prim(hi) - prim(lo)) / h
        })
        .collect();
    Weight::from_leaves(depth, leaves)
}
