use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use dyadlab_core::dyadic::{DyadicGrid, IntervalId, StepFunction};
use dyadlab_core::operators::{OperatorDescriptor, OperatorKind};
use dyadlab_core::weights::{Weight, WeightFamilySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

/// Everything a sweep needs. Specs are kept as strings and parsed on use so
/// the config itself round-trips through JSON unchanged.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub depth: u32,
    pub weights: Vec<String>,
    /// Paraproduct symbols `b`, see [`SymbolSpec`].
    pub symbols: Vec<String>,
    /// Explicit operators; when empty they are generated from the ranges below.
    pub operators: Vec<String>,
    pub m_values: Vec<u32>,
    pub n_values: Vec<u32>,
    pub t_values: Vec<f64>,
    /// Coefficient family used for generated operators.
    pub coeffs: String,
    pub tol: f64,
    pub max_iter: usize,
    pub seed: u64,
    pub out: Option<PathBuf>,
    pub format: Format,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            depth: 10,
            weights: Vec::new(),
            symbols: vec!["random:seed=0".into()],
            operators: Vec::new(),
            m_values: vec![0, 1, 2],
            n_values: vec![0, 1, 2],
            t_values: vec![-0.5, 0.5, 1.0],
            coeffs: "maximal".into(),
            tol: 1e-6,
            max_iter: 500,
            seed: 0,
            out: None,
            format: Format::Csv,
        }
    }
}

impl ExperimentConfig {
    /// Cascade weights for `deltas` evenly spaced values in `[0, max_delta]`
    /// crossed with seeds `0..seeds`.
    pub fn cascade_family(depth: u32, deltas: usize, max_delta: f64, seeds: u64) -> Vec<String> {
        let mut out = Vec::with_capacity(deltas * seeds as usize);
        for k in 0..deltas {
            let delta = if deltas > 1 {
                max_delta * k as f64 / (deltas - 1) as f64
            } else {
                max_delta
            };
            for seed in 0..seeds {
                out.push(WeightFamilySpec::Cascade { depth, delta, seed }.to_string());
            }
        }
        out
    }

    pub fn weight_specs(&self) -> LabResult<Vec<WeightFamilySpec>> {
        self.weights
            .iter()
            .map(|s| Ok(WeightFamilySpec::parse(s, Some(self.depth))?))
            .collect()
    }

    pub fn symbol_specs(&self) -> LabResult<Vec<SymbolSpec>> {
        self.symbols.iter().map(|s| s.parse()).collect()
    }

    /// Operators of the given family: the explicit list filtered by kind, or
    /// one per `(m, n)` (and `t` for multipliers) from the ranges.
    pub fn operator_descriptors(&self, kind: &str) -> LabResult<Vec<OperatorDescriptor>> {
        if !self.operators.is_empty() {
            let mut out = Vec::new();
            for s in &self.operators {
                let d = OperatorDescriptor::parse(s)?;
                let k = match d.kind {
                    OperatorKind::Paraproduct => "para",
                    OperatorKind::HaarShift => "shift",
                    OperatorKind::HaarMultiplier { .. } => "tmult",
                };
                if k == kind {
                    out.push(d);
                }
            }
            return Ok(out);
        }
        let mut out = Vec::new();
        let ts: Vec<Option<f64>> = if kind == "tmult" {
            self.t_values.iter().map(|&t| Some(t)).collect()
        } else {
            vec![None]
        };
        for t in ts {
            for &m in &self.m_values {
                for &n in &self.n_values {
                    let s = match t {
                        Some(t) => format!("tmult:t={t},m={m},n={n},coeffs={}", self.coeffs),
                        None => format!("{kind}:m={m},n={n},coeffs={}", self.coeffs),
                    };
                    out.push(OperatorDescriptor::parse(&s)?);
                }
            }
        }
        Ok(out)
    }

    /// Checks that every spec parses and the grid is deep enough.
    pub fn validate(&self) -> LabResult<()> {
        DyadicGrid::new(self.depth)?;
        for w in self.weight_specs()? {
            if let Some(d) = spec_depth(&w) {
                if d != self.depth {
                    return Err(LabError::Config(format!(
                        "weight {w} has depth {d}, expected {}",
                        self.depth
                    )));
                }
            }
        }
        self.symbol_specs()?;
        let mut max_m = self.m_values.iter().copied().max().unwrap_or(0);
        let mut max_n = self.n_values.iter().copied().max().unwrap_or(0);
        for kind in ["para", "shift", "tmult"] {
            for d in self.operator_descriptors(kind)? {
                max_m = max_m.max(d.m);
                max_n = max_n.max(d.n);
            }
        }
        if self.depth < max_m + max_n + 2 {
            return Err(LabError::Config(format!(
                "depth {} too shallow for m up to {max_m} and n up to {max_n}",
                self.depth
            )));
        }
        if !(self.tol > 0.0) || self.max_iter == 0 {
            return Err(LabError::Config("tol and max-iter must be positive".into()));
        }
        Ok(())
    }
}

fn spec_depth(w: &WeightFamilySpec) -> Option<u32> {
    match *w {
        WeightFamilySpec::Cascade { depth, .. } | WeightFamilySpec::Power { depth, .. } => Some(depth),
        WeightFamilySpec::File { .. } => None,
    }
}

/// Family label used to group rows, e.g. `cascade`.
pub fn weight_family_name(w: &WeightFamilySpec) -> &'static str {
    match w {
        WeightFamilySpec::Cascade { .. } => "cascade",
        WeightFamilySpec::Power { .. } => "power",
        WeightFamilySpec::File { .. } => "file",
    }
}

pub fn load_weight(spec: &WeightFamilySpec, depth: u32) -> LabResult<Weight> {
    let w = spec.generate()?;
    if w.grid().depth() != depth {
        return Err(LabError::Config(format!(
            "weight {spec} has depth {}, expected {depth}",
            w.grid().depth()
        )));
    }
    Ok(w)
}

/// Paraproduct symbol `b`.
///
/// Grammar: `random:seed=3` (leaves uniform in `[-1, 1]`), `const:c=1.5`,
/// `haar:level=0,index=0` (a single Haar function), `file:PATH`.
#[derive(Clone, Debug, PartialEq)]
pub enum SymbolSpec {
    Random { seed: u64 },
    Constant { c: f64 },
    Haar { level: u32, index: usize },
    File { path: PathBuf },
}

impl SymbolSpec {
    pub fn generate(&self, depth: u32) -> LabResult<StepFunction> {
        let grid = DyadicGrid::new(depth)?;
        Ok(match self {
            SymbolSpec::Random { seed } => {
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let leaves = (0..grid.leaf_count()).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                StepFunction::on_grid(grid, leaves)?
            }
            SymbolSpec::Constant { c } => StepFunction::constant(grid, *c),
            SymbolSpec::Haar { level, index } => StepFunction::haar(grid, IntervalId::new(*level, *index)?)?,
            SymbolSpec::File { path } => {
                let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
                    path: path.clone(),
                    source,
                })?;
                let f: StepFunction = serde_json::from_str(&text)?;
                if f.depth() != depth {
                    return Err(LabError::Config(format!(
                        "symbol {} has depth {}, expected {depth}",
                        path.display(),
                        f.depth()
                    )));
                }
                f
            }
        })
    }
}

impl FromStr for SymbolSpec {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        let bad = |why: &str| LabError::Config(format!("symbol {s:?}: {why}"));
        let (kind, rest) = s.split_once(':').unwrap_or((s, ""));
        if kind == "file" {
            return if rest.is_empty() {
                Err(bad("missing path"))
            } else {
                Ok(SymbolSpec::File { path: rest.into() })
            };
        }
        let mut pairs = Vec::new();
        for item in rest.split(',').filter(|x| !x.is_empty()) {
            let (k, v) = item.split_once('=').ok_or_else(|| bad("expected key=value"))?;
            pairs.push((k.trim(), v.trim()));
        }
        let get = |k: &str| pairs.iter().find(|(key, _)| *key == k).map(|(_, v)| *v);
        let allowed: &[&str] = match kind {
            "random" => &["seed"],
            "const" => &["c"],
            "haar" => &["level", "index"],
            _ => return Err(bad("unknown kind")),
        };
        if pairs.iter().any(|(k, _)| !allowed.contains(k)) {
            return Err(bad("unknown key"));
        }
        Ok(match kind {
            "random" => SymbolSpec::Random {
                seed: get("seed").unwrap_or("0").parse().map_err(|_| bad("bad seed"))?,
            },
            "const" => SymbolSpec::Constant {
                c: get("c").unwrap_or("1").parse().map_err(|_| bad("bad c"))?,
            },
            _ => SymbolSpec::Haar {
                level: get("level").unwrap_or("0").parse().map_err(|_| bad("bad level"))?,
                index: get("index").unwrap_or("0").parse().map_err(|_| bad("bad index"))?,
            },
        })
    }
}

impl fmt::Display for SymbolSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolSpec::Random { seed } => write!(f, "random:seed={seed}"),
            SymbolSpec::Constant { c } => write!(f, "const:c={c}"),
            SymbolSpec::Haar { level, index } => write!(f, "haar:level={level},index={index}"),
            SymbolSpec::File { path } => write!(f, "file:{}", path.display()),
        }
    }
}
