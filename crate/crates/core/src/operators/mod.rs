//! Dyadic operators of complexity `(m, n)`, applied matrix-free.
//!
//! All three families share the same skeleton: for each `L` the input
//! coefficients on the generation `D_n(L)` are mixed by `c^L_{I,J}` into
//! output Haar coefficients on `D_m(L)`.
//!
//! * paraproduct: input `m_I f <b, h_I>`, output `sum c m_I f b_I h_J`;
//! * Haar shift: input `<f, h_I>`;
//! * t-Haar multiplier: input `<f, h_I>`, each `L` scaled by `(m_L w)^-t`
//!   and the result multiplied pointwise by `w^t`.
//!
//! On a grid of depth `D` the `L`-sum runs over levels `0 ..= D - max(m, n) - 1`.

mod diagnostics;
mod norm;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

pub use diagnostics::{diagnostic_pb, diagnostic_r, diagnostic_s, s_bound, BoundShapes, RatioReport};
pub use norm::{weighted_norm, weighted_norm_seeded, NormEstimate};

use crate::dyadic::{haar_transform, inverse_haar_transform, DyadicGrid, HaarSpectrum, IntervalId, StepFunction};
use crate::error::{Error, Result};
use crate::weights::{parse_kv, Weight};

/// Key `(L, I, J)` of a custom coefficient.
pub type CoefficientKey = (IntervalId, IntervalId, IntervalId);

/// The coefficients `c^L_{I,J}`, always bounded by `sqrt(|I| |J|) / |L|`.
#[derive(Clone, Debug, PartialEq)]
pub enum CoefficientFamily {
    /// `c^L_{I,J} = sqrt(|I| |J|) / |L|`.
    Maximal,
    /// Maximal magnitude with a sign drawn per `(L, I, J)` from the seed.
    RandomSigns { seed: u64 },
    /// Explicit values; absent triples are zero.
    Custom(Arc<BTreeMap<CoefficientKey, f64>>),
}

impl CoefficientFamily {
    #[inline]
    fn value(&self, bound: f64, l: IntervalId, i: IntervalId, j: IntervalId) -> f64 {
        match self {
            CoefficientFamily::Maximal => bound,
            CoefficientFamily::RandomSigns { seed } => {
                let h = splitmix64(
                    seed ^ splitmix64(l.heap() as u64 ^ splitmix64(i.heap() as u64 ^ splitmix64(j.heap() as u64))),
                );
                if h & 1 == 0 {
                    bound
                } else {
                    -bound
                }
            }
            CoefficientFamily::Custom(map) => map.get(&(l, i, j)).copied().unwrap_or(0.0),
        }
    }

    fn parse(spec: &str, value: &str) -> Result<Self> {
        if value == "maximal" {
            return Ok(CoefficientFamily::Maximal);
        }
        if let Some(rest) = value.strip_prefix("signs") {
            let seed = match rest.strip_prefix(":seed=") {
                Some(s) => s.parse().map_err(|_| Error::Parse {
                    spec: spec.to_string(),
                    reason: format!("bad seed {s:?}"),
                })?,
                None if rest.is_empty() => 0,
                None => {
                    return Err(Error::Parse {
                        spec: spec.to_string(),
                        reason: format!("bad coefficient family {value:?}"),
                    })
                }
            };
            return Ok(CoefficientFamily::RandomSigns { seed });
        }
        Err(Error::Parse {
            spec: spec.to_string(),
            reason: format!("unknown coefficient family {value:?}"),
        })
    }
}

impl fmt::Display for CoefficientFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CoefficientFamily::Maximal => f.write_str("maximal"),
            CoefficientFamily::RandomSigns { seed } => write!(f, "signs:seed={seed}"),
            CoefficientFamily::Custom(map) => write!(f, "custom[{}]", map.len()),
        }
    }
}

#[inline]
fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

#[derive(Clone, Debug, PartialEq)]
pub enum OperatorFamily {
    /// `pi_b^{m,n}`.
    Paraproduct { b: StepFunction },
    /// `S^{m,n}`.
    HaarShift,
    /// `T^{m,n}_{t,w}`.
    HaarMultiplier { t: f64, w: Weight },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OperatorSpec {
    pub family: OperatorFamily,
    pub m: u32,
    pub n: u32,
    pub coeffs: CoefficientFamily,
}

impl OperatorSpec {
    pub fn paraproduct(b: StepFunction, m: u32, n: u32, coeffs: CoefficientFamily) -> Result<Self> {
        Self::new(OperatorFamily::Paraproduct { b }, m, n, coeffs)
    }

    pub fn haar_shift(m: u32, n: u32, coeffs: CoefficientFamily) -> Result<Self> {
        Self::new(OperatorFamily::HaarShift, m, n, coeffs)
    }

    pub fn haar_multiplier(t: f64, w: Weight, m: u32, n: u32, coeffs: CoefficientFamily) -> Result<Self> {
        if !t.is_finite() {
            return Err(Error::InvalidParameter(format!("t must be finite, got {t}")));
        }
        Self::new(OperatorFamily::HaarMultiplier { t, w }, m, n, coeffs)
    }

    pub fn new(family: OperatorFamily, m: u32, n: u32, coeffs: CoefficientFamily) -> Result<Self> {
        let spec = OperatorSpec { family, m, n, coeffs };
        if let Some(g) = spec.bound_grid() {
            spec.check_depth(g)?;
        }
        if let CoefficientFamily::Custom(map) = &spec.coeffs {
            let bound = spec.coefficient_bound();
            for (&(l, i, j), &value) in map.iter() {
                let fits = l.level + n == i.level && l.level + m == j.level && l.contains(i) && l.contains(j);
                if !fits {
                    return Err(Error::InvalidParameter(format!(
                        "custom coefficient ({l}, {i}, {j}) is not in D_{n}(L) x D_{m}(L)"
                    )));
                }
                if !(value.abs() <= bound * (1.0 + 1e-12)) {
                    return Err(Error::CoefficientBound { l, i, j, value, bound });
                }
            }
        }
        Ok(spec)
    }

    /// `sqrt(|I| |J|) / |L| = 2^{-(m+n)/2}`.
    pub fn coefficient_bound(&self) -> f64 {
        (-((self.m + self.n) as f64) / 2.0).exp2()
    }

    /// `c^L_{I,J}`.
    pub fn coefficient(&self, l: IntervalId, i: IntervalId, j: IntervalId) -> f64 {
        self.coeffs.value(self.coefficient_bound(), l, i, j)
    }

    /// Grid fixed by the operator's own data (`b` or `w`), if any.
    pub fn bound_grid(&self) -> Option<DyadicGrid> {
        match &self.family {
            OperatorFamily::Paraproduct { b } => Some(b.grid()),
            OperatorFamily::HaarShift => None,
            OperatorFamily::HaarMultiplier { w, .. } => Some(w.grid()),
        }
    }

    /// Deepest level of `L` on a grid of `depth`.
    pub fn max_outer_level(&self, depth: u32) -> Result<u32> {
        let k = self.m.max(self.n);
        if k >= depth {
            return Err(Error::ComplexityTooLarge {
                m: self.m,
                n: self.n,
                depth,
            });
        }
        Ok(depth - k - 1)
    }

    fn check_depth(&self, grid: DyadicGrid) -> Result<()> {
        self.max_outer_level(grid.depth()).map(|_| ())
    }

    pub fn kind_name(&self) -> &'static str {
        match self.family {
            OperatorFamily::Paraproduct { .. } => "para",
            OperatorFamily::HaarShift => "shift",
            OperatorFamily::HaarMultiplier { .. } => "tmult",
        }
    }

    /// Precompute everything that does not depend on the input function.
    pub fn prepare(&self, grid: DyadicGrid) -> Result<PreparedOperator<'_>> {
        PreparedOperator::new(self, grid)
    }
}

impl fmt::Display for OperatorSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.family {
            OperatorFamily::HaarMultiplier { t, .. } => write!(f, "tmult:t={t},")?,
            _ => write!(f, "{}:", self.kind_name())?,
        }
        write!(f, "m={},n={},coeffs={}", self.m, self.n, self.coeffs)
    }
}

/// Parsed operator string before `b` or `w` are attached.
///
/// Grammar: `para:m=1,n=2,coeffs=maximal`, `shift:m=0,n=1,coeffs=signs:seed=3`,
/// `tmult:t=0.5,m=1,n=1,coeffs=maximal`.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorDescriptor {
    pub kind: OperatorKind,
    pub m: u32,
    pub n: u32,
    pub coeffs: CoefficientFamily,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum OperatorKind {
    Paraproduct,
    HaarShift,
    HaarMultiplier { t: f64 },
}

impl OperatorDescriptor {
    pub fn parse(s: &str) -> Result<Self> {
        let err = |reason: String| Error::Parse {
            spec: s.to_string(),
            reason,
        };
        let (kind, body) = s.split_once(':').unwrap_or((s, ""));
        let kv = parse_kv(s, body)?;
        let get = |k: &str| kv.iter().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
        let int = |k: &str| -> Result<u32> {
            match get(k) {
                Some(v) => v.parse().map_err(|_| err(format!("bad {k} {v:?}"))),
                None => Ok(0),
            }
        };
        let allowed: &[&str] = match kind {
            "para" | "shift" => &["m", "n", "coeffs"],
            "tmult" => &["t", "m", "n", "coeffs"],
            _ => return Err(err(format!("unknown operator family {kind:?}"))),
        };
        if let Some((k, _)) = kv.iter().find(|(k, _)| !allowed.contains(&k.as_str())) {
            return Err(err(format!("unknown key {k:?}")));
        }
        let kind = match kind {
            "para" => OperatorKind::Paraproduct,
            "shift" => OperatorKind::HaarShift,
            _ => {
                let t = get("t").ok_or_else(|| err("missing t".into()))?;
                let t: f64 = t.parse().map_err(|_| err(format!("bad t {t:?}")))?;
                if !t.is_finite() {
                    return Err(err(format!("t must be finite, got {t}")));
                }
                OperatorKind::HaarMultiplier { t }
            }
        };
        let coeffs = match get("coeffs") {
            Some(v) => CoefficientFamily::parse(s, v)?,
            None => CoefficientFamily::Maximal,
        };
        Ok(OperatorDescriptor {
            kind,
            m: int("m")?,
            n: int("n")?,
            coeffs,
        })
    }

    /// Attach the symbol data. `b` is required for paraproducts and `w` for
    /// multipliers; both are ignored otherwise.
    pub fn bind(&self, b: Option<&StepFunction>, w: Option<&Weight>) -> Result<OperatorSpec> {
        let family = match self.kind {
            OperatorKind::Paraproduct => OperatorFamily::Paraproduct {
                b: b.cloned()
                    .ok_or_else(|| Error::InvalidParameter("paraproduct needs a symbol b".into()))?,
            },
            OperatorKind::HaarShift => OperatorFamily::HaarShift,
            OperatorKind::HaarMultiplier { t } => OperatorFamily::HaarMultiplier {
                t,
                w: w.cloned()
                    .ok_or_else(|| Error::InvalidParameter("t-Haar multiplier needs a weight".into()))?,
            },
        };
        OperatorSpec::new(family, self.m, self.n, self.coeffs.clone())
    }
}

impl std::str::FromStr for OperatorDescriptor {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        OperatorDescriptor::parse(s)
    }
}

enum Symbol {
    Shift,
    Para { b: Vec<f64> },
    Mult { scale: Vec<f64>, wt: Vec<f64> },
}

/// An operator specialized to a grid, with `b_I`, `(m_L w)^-t` and `w^t`
/// precomputed.
pub struct PreparedOperator<'a> {
    spec: &'a OperatorSpec,
    grid: DyadicGrid,
    max_level: u32,
    symbol: Symbol,
}

impl<'a> PreparedOperator<'a> {
    fn new(spec: &'a OperatorSpec, grid: DyadicGrid) -> Result<Self> {
        if let Some(g) = spec.bound_grid() {
            if g != grid {
                return Err(Error::DepthMismatch(g.depth(), grid.depth()));
            }
        }
        let max_level = spec.max_outer_level(grid.depth())?;
        let symbol = match &spec.family {
            OperatorFamily::HaarShift => Symbol::Shift,
            OperatorFamily::Paraproduct { b } => Symbol::Para {
                b: haar_transform(b).into_heap_coeffs(),
            },
            OperatorFamily::HaarMultiplier { t, w } => {
                let avg = w.averages();
                Symbol::Mult {
                    scale: avg.iter().map(|a| a.powf(-t)).collect(),
                    wt: w.leaves().iter().map(|x| x.powf(*t)).collect(),
                }
            }
        };
        Ok(PreparedOperator {
            spec,
            grid,
            max_level,
            symbol,
        })
    }

    pub fn grid(&self) -> DyadicGrid {
        self.grid
    }

    fn outer_scale(&self, l: IntervalId) -> f64 {
        match &self.symbol {
            Symbol::Mult { scale, .. } => scale[l.heap()],
            _ => 1.0,
        }
    }

    /// `out[J] = sum_L scale_L sum_{I in D_n(L)} c^L_{I,J} input[I]`, heap indexed.
    fn transfer(&self, input: &[f64]) -> Vec<f64> {
        let (m, n) = (self.spec.m, self.spec.n);
        let bound = self.spec.coefficient_bound();
        let mut out = vec![0.0; self.grid.leaf_count()];
        for l in self.grid.up_to_level(self.max_level) {
            let scale = self.outer_scale(l);
            match self.spec.coeffs {
                CoefficientFamily::Maximal => {
                    let s: f64 = l.generation(n).map(|i| input[i.heap()]).sum();
                    let v = scale * bound * s;
                    for j in l.generation(m) {
                        out[j.heap()] += v;
                    }
                }
                _ => {
                    for j in l.generation(m) {
                        let s: f64 = l
                            .generation(n)
                            .map(|i| self.spec.coefficient(l, i, j) * input[i.heap()])
                            .sum();
                        out[j.heap()] += scale * s;
                    }
                }
            }
        }
        out
    }

    /// Transpose of [`Self::transfer`].
    fn transfer_adjoint(&self, output: &[f64]) -> Vec<f64> {
        let (m, n) = (self.spec.m, self.spec.n);
        let bound = self.spec.coefficient_bound();
        let mut back = vec![0.0; self.grid.leaf_count()];
        for l in self.grid.up_to_level(self.max_level) {
            let scale = self.outer_scale(l);
            match self.spec.coeffs {
                CoefficientFamily::Maximal => {
                    let s: f64 = l.generation(m).map(|j| output[j.heap()]).sum();
                    let v = scale * bound * s;
                    for i in l.generation(n) {
                        back[i.heap()] += v;
                    }
                }
                _ => {
                    for i in l.generation(n) {
                        let s: f64 = l
                            .generation(m)
                            .map(|j| self.spec.coefficient(l, i, j) * output[j.heap()])
                            .sum();
                        back[i.heap()] += scale * s;
                    }
                }
            }
        }
        back
    }

    fn synthesize(&self, coeffs: Vec<f64>) -> StepFunction {
        let spec = HaarSpectrum::from_heap(self.grid, 0.0, coeffs).expect("heap length");
        inverse_haar_transform(&spec)
    }

    fn check(&self, f: &StepFunction) -> Result<()> {
        if f.grid() == self.grid {
            Ok(())
        } else {
            Err(Error::DepthMismatch(self.grid.depth(), f.depth()))
        }
    }

    pub fn apply(&self, f: &StepFunction) -> Result<StepFunction> {
        self.check(f)?;
        Ok(match &self.symbol {
            Symbol::Shift => {
                let fc = haar_transform(f).into_heap_coeffs();
                self.synthesize(self.transfer(&fc))
            }
            Symbol::Para { b } => {
                let avg = f.averages();
                let input: Vec<f64> = (0..b.len()).map(|k| if k == 0 { 0.0 } else { avg[k] * b[k] }).collect();
                self.synthesize(self.transfer(&input))
            }
            Symbol::Mult { wt, .. } => {
                let fc = haar_transform(f).into_heap_coeffs();
                let g = self.synthesize(self.transfer(&fc));
                let leaves = g.leaves().iter().zip(wt).map(|(x, s)| x * s).collect();
                StepFunction::on_grid(self.grid, leaves)?
            }
        })
    }

    pub fn apply_adjoint(&self, g: &StepFunction) -> Result<StepFunction> {
        self.check(g)?;
        Ok(match &self.symbol {
            Symbol::Shift => {
                let gc = haar_transform(g).into_heap_coeffs();
                self.synthesize(self.transfer_adjoint(&gc))
            }
            Symbol::Para { b } => {
                // sum_I d_I b_I chi_I / |I|, accumulated top-down
                let gc = haar_transform(g).into_heap_coeffs();
                let d = self.transfer_adjoint(&gc);
                let n = self.grid.leaf_count();
                let mut acc = vec![0.0; 2 * n];
                for k in 1..2 * n {
                    let own = if k < n {
                        d[k] * b[k] / IntervalId::from_heap(k).length()
                    } else {
                        0.0
                    };
                    acc[k] = acc[k / 2] + own;
                }
                acc.drain(..n);
                StepFunction::on_grid(self.grid, acc)?
            }
            Symbol::Mult { wt, .. } => {
                let leaves = g.leaves().iter().zip(wt).map(|(x, s)| x * s).collect();
                let gw = StepFunction::on_grid(self.grid, leaves)?;
                let gc = haar_transform(&gw).into_heap_coeffs();
                self.synthesize(self.transfer_adjoint(&gc))
            }
        })
    }
}

fn grid_for(op: &OperatorSpec, f: &StepFunction) -> Result<DyadicGrid> {
    match op.bound_grid() {
        Some(g) if g != f.grid() => Err(Error::DepthMismatch(g.depth(), f.depth())),
        _ => Ok(f.grid()),
    }
}

/// Evaluate the truncated operator on `f`.
pub fn apply(op: &OperatorSpec, f: &StepFunction) -> Result<StepFunction> {
    op.prepare(grid_for(op, f)?)?.apply(f)
}

/// Transpose with respect to `<f, g> = int f g`.
pub fn apply_adjoint(op: &OperatorSpec, g: &StepFunction) -> Result<StepFunction> {
    op.prepare(grid_for(op, g)?)?.apply_adjoint(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::WeightFamilySpec;

    fn grid(d: u32) -> DyadicGrid {
        DyadicGrid::new(d).unwrap()
    }

    fn wavy(g: DyadicGrid, k: f64) -> StepFunction {
        let n = g.leaf_count();
        StepFunction::on_grid(
            g,
            (0..n).map(|i| ((i as f64 + 0.3) * k).sin() + 0.1 * i as f64).collect(),
        )
        .unwrap()
    }

    #[test]
    fn constant_symbol_paraproduct_is_zero() {
        let g = grid(6);
        let op = OperatorSpec::paraproduct(StepFunction::constant(g, 4.0), 1, 2, CoefficientFamily::Maximal).unwrap();
        let out = apply(&op, &wavy(g, 0.7)).unwrap();
        assert!(out.leaves().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn paraproduct_single_term() {
        // b = -h_{[0,1)}, f = 1 at D = 1
        let g = grid(1);
        let b = StepFunction::new(1, vec![1.0, -1.0]).unwrap();
        let op = OperatorSpec::paraproduct(b, 0, 0, CoefficientFamily::Maximal).unwrap();
        let out = apply(&op, &StepFunction::constant(g, 1.0)).unwrap();
        assert_eq!(out.leaves(), &[1.0, -1.0]);
    }

    #[test]
    fn multiplier_with_flat_weight_is_shift() {
        let g = grid(7);
        let f = wavy(g, 1.3);
        for (m, n) in [(0, 0), (1, 2), (3, 1)] {
            let coeffs = CoefficientFamily::RandomSigns { seed: 5 };
            let shift = OperatorSpec::haar_shift(m, n, coeffs.clone()).unwrap();
            let mult = OperatorSpec::haar_multiplier(0.7, Weight::lebesgue(g), m, n, coeffs).unwrap();
            let a = apply(&shift, &f).unwrap();
            let b = apply(&mult, &f).unwrap();
            for (x, y) in a.leaves().iter().zip(b.leaves()) {
                assert!((x - y).abs() < 1e-14);
            }
        }
    }

    #[test]
    fn zero_t_multiplier_is_shift() {
        let g = grid(6);
        let w = WeightFamilySpec::Cascade {
            depth: 6,
            delta: 0.9,
            seed: 1,
        }
        .generate()
        .unwrap();
        let f = wavy(g, 0.4);
        let shift = OperatorSpec::haar_shift(2, 1, CoefficientFamily::Maximal).unwrap();
        let mult = OperatorSpec::haar_multiplier(0.0, w, 2, 1, CoefficientFamily::Maximal).unwrap();
        assert_eq!(apply(&shift, &f).unwrap(), apply(&mult, &f).unwrap());
    }

    #[test]
    fn diagonal_shift_is_self_adjoint() {
        let g = grid(6);
        let op = OperatorSpec::haar_shift(0, 0, CoefficientFamily::Maximal).unwrap();
        assert_eq!(
            op.coefficient(IntervalId::root(), IntervalId::root(), IntervalId::root()),
            1.0
        );
        let f = wavy(g, 2.1);
        let a = apply(&op, &f).unwrap();
        let b = apply_adjoint(&op, &f).unwrap();
        for (x, y) in a.leaves().iter().zip(b.leaves()) {
            assert!((x - y).abs() < 1e-14);
        }
    }

    #[test]
    fn complexity_limits() {
        let g = grid(3);
        let op = OperatorSpec::haar_shift(3, 0, CoefficientFamily::Maximal).unwrap();
        assert_eq!(
            apply(&op, &StepFunction::zero(g)),
            Err(Error::ComplexityTooLarge { m: 3, n: 0, depth: 3 })
        );
        let b = StepFunction::zero(g);
        assert!(OperatorSpec::paraproduct(b, 0, 3, CoefficientFamily::Maximal).is_err());
    }

    #[test]
    fn custom_coefficients_are_checked() {
        let l = IntervalId::root();
        let i = IntervalId::new(1, 0).unwrap();
        let j = IntervalId::new(1, 1).unwrap();
        let ok = BTreeMap::from([((l, i, j), -0.5)]);
        assert!(OperatorSpec::haar_shift(1, 1, CoefficientFamily::Custom(Arc::new(ok))).is_ok());
        let big = BTreeMap::from([((l, i, j), 0.6)]);
        assert!(matches!(
            OperatorSpec::haar_shift(1, 1, CoefficientFamily::Custom(Arc::new(big))),
            Err(Error::CoefficientBound { .. })
        ));
        let misplaced = BTreeMap::from([((l, l, j), 0.1)]);
        assert!(OperatorSpec::haar_shift(1, 1, CoefficientFamily::Custom(Arc::new(misplaced))).is_err());
    }

    #[test]
    fn random_signs_are_bounded_and_mixed() {
        let op = OperatorSpec::haar_shift(2, 2, CoefficientFamily::RandomSigns { seed: 9 }).unwrap();
        let l = IntervalId::new(1, 1).unwrap();
        let mut signs = Vec::new();
        for i in l.generation(2) {
            for j in l.generation(2) {
                let c = op.coefficient(l, i, j);
                assert_eq!(c.abs(), 0.25);
                signs.push(c > 0.0);
            }
        }
        assert!(signs.iter().any(|&s| s) && signs.iter().any(|&s| !s));
    }

    #[test]
    fn descriptor_grammar() {
        let d = OperatorDescriptor::parse("para:m=1,n=2,coeffs=maximal").unwrap();
        assert_eq!(d.kind, OperatorKind::Paraproduct);
        assert_eq!((d.m, d.n), (1, 2));
        let d = OperatorDescriptor::parse("shift:m=0,n=1,coeffs=signs:seed=3").unwrap();
        assert_eq!(d.coeffs, CoefficientFamily::RandomSigns { seed: 3 });
        let d = OperatorDescriptor::parse("tmult:t=0.5,m=1,n=1,coeffs=maximal").unwrap();
        assert_eq!(d.kind, OperatorKind::HaarMultiplier { t: 0.5 });
        let op = d.bind(None, Some(&Weight::lebesgue(grid(4)))).unwrap();
        assert_eq!(op.to_string(), "tmult:t=0.5,m=1,n=1,coeffs=maximal");
        assert!(d.bind(None, None).is_err());
        for bad in [
            "tmult:m=1",
            "para:m=x",
            "rot:m=1",
            "shift:coeffs=gauss",
            "para:k=1",
            "shift:coeffs=signs:sed=1",
        ] {
            assert!(OperatorDescriptor::parse(bad).is_err(), "{bad}");
        }
    }
}
