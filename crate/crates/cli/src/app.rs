//! Command-line front end. [`run`] does all the work and returns the text to
//! emit, so the binary is a thin wrapper and tests can drive it in-process.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use dyadlab_core::dyadic::IntervalId;
use dyadlab_core::operators::OperatorDescriptor;
use dyadlab_core::weights::WeightFamilySpec;

use crate::characteristics::{cmd_char, parse_list, DEFAULT_CHARACTERISTICS};
use crate::config::{load_weight, ExperimentConfig, Format, SymbolSpec};
use crate::error::{LabError, LabResult};
use crate::lemmas::cmd_verify_lemmas;
use crate::necessary::{cmd_necessary, I0Choice};
use crate::output::{gnuplot_script, render, script_path};
use crate::sweep::{cmd_norm, cmd_sweep_multiplier, cmd_sweep_paraproduct, SweepReport, BOUND_COLUMNS};

#[derive(Debug, Parser)]
#[command(name = "dyadlab", version, about = "Dyadic weighted harmonic analysis laboratory")]
pub struct Cli {
    /// Grid depth D (2^D leaves).
    #[arg(long, global = true, default_value_t = 10)]
    pub depth: u32,
    /// Seed for power iteration starts and random symbols.
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    /// Relative-change tolerance for power iteration.
    #[arg(long, global = true, default_value_t = 1e-6)]
    pub tol: f64,
    #[arg(long = "max-iter", global = true, default_value_t = 500)]
    pub max_iter: usize,
    /// Output file; stdout when omitted.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Weight characteristics with witnesses.
    Char {
        #[arg(long)]
        weight: String,
        /// Comma separated: ap:P, rh:P, cs:S, doubling, rel:S.
        #[arg(long, default_value = DEFAULT_CHARACTERISTICS)]
        chars: String,
    },
    /// Exact L^p norm of T h_I0 for the maximal t-Haar multiplier, computed two ways.
    Necessary {
        #[arg(long)]
        weight: String,
        #[arg(long, allow_hyphen_values = true)]
        t: f64,
        #[arg(long, default_value_t = 2.0)]
        p: f64,
        #[arg(long, default_value_t = 0)]
        m: u32,
        #[arg(long, default_value_t = 0)]
        n: u32,
        /// `all` or LEVEL:INDEX.
        #[arg(long, default_value = "all")]
        i0: String,
    },
    /// Paraproduct norms in L^2(w) against (m+n+2)^5 [w]_A2 ||b||_BMO.
    SweepPara(SweepArgs),
    /// t-Haar multiplier norms in L^2 against (m+n+2)^3 [w]_C2t^1/2 [w^2t]_A2^1/2.
    SweepMult(SweepArgs),
    /// Lemma suite; exits 1 if a check with an explicit constant fails.
    VerifyLemmas(SweepArgs),
    /// One operator norm.
    Norm {
        #[arg(long)]
        op: String,
        #[arg(long)]
        weight: Option<String>,
        #[arg(long)]
        symbol: Option<String>,
    },
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    /// JSON experiment config; replaces the list flags below.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long = "weight")]
    pub weights: Vec<String>,
    /// Cascade family DELTAS:MAX_DELTA:SEEDS, e.g. 20:0.95:10.
    #[arg(long)]
    pub cascade: Option<String>,
    #[arg(long = "symbol")]
    pub symbols: Vec<String>,
    #[arg(long = "op")]
    pub operators: Vec<String>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub m: Vec<u32>,
    #[arg(long, value_delimiter = ',', default_value = "0,1,2")]
    pub n: Vec<u32>,
    #[arg(
        long,
        value_delimiter = ',',
        allow_hyphen_values = true,
        default_value = "-0.5,0.5,1"
    )]
    pub t: Vec<f64>,
    #[arg(long, default_value = "maximal")]
    pub coeffs: String,
}

/// What a command produced.
#[derive(Debug)]
pub struct Outcome {
    pub text: String,
    /// Companion files to write next to `--out`.
    pub extra: Vec<(PathBuf, String)>,
    /// Human-readable summary for stderr.
    pub summary: String,
    /// False when an assertion failed (exit code 1).
    pub passed: bool,
}

impl Cli {
    fn base_config(&self) -> ExperimentConfig {
        ExperimentConfig {
            depth: self.depth,
            tol: self.tol,
            max_iter: self.max_iter,
            seed: self.seed,
            out: self.out.clone(),
            format: self.format,
            ..ExperimentConfig::default()
        }
    }

    fn sweep_config(&self, a: &SweepArgs) -> LabResult<ExperimentConfig> {
        if let Some(path) = &a.config {
            let text = std::fs::read_to_string(path).map_err(|source| LabError::Io {
                path: path.clone(),
                source,
            })?;
            return Ok(serde_json::from_str(&text)?);
        }
        let mut cfg = self.base_config();
        cfg.weights = a.weights.clone();
        if let Some(c) = &a.cascade {
            cfg.weights.extend(parse_cascade(c, self.depth)?);
        }
        if !a.symbols.is_empty() {
            cfg.symbols = a.symbols.clone();
        } else {
            cfg.symbols = vec![SymbolSpec::Random { seed: self.seed }.to_string()];
        }
        cfg.operators = a.operators.clone();
        cfg.m_values = a.m.clone();
        cfg.n_values = a.n.clone();
        cfg.t_values = a.t.clone();
        cfg.coeffs = a.coeffs.clone();
        Ok(cfg)
    }
}

fn parse_cascade(s: &str, depth: u32) -> LabResult<Vec<String>> {
    let bad = || LabError::Config(format!("cascade family {s:?}: expected DELTAS:MAX_DELTA:SEEDS"));
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(bad());
    }
    let deltas: usize = parts[0].parse().map_err(|_| bad())?;
    let max: f64 = parts[1].parse().map_err(|_| bad())?;
    let seeds: u64 = parts[2].parse().map_err(|_| bad())?;
    Ok(ExperimentConfig::cascade_family(depth, deltas, max, seeds))
}

fn parse_i0(s: &str) -> LabResult<I0Choice> {
    if s == "all" {
        return Ok(I0Choice::All);
    }
    let bad = || LabError::Config(format!("I0 {s:?}: expected `all` or LEVEL:INDEX"));
    let (l, k) = s.split_once(':').ok_or_else(bad)?;
    Ok(I0Choice::One(IntervalId::new(
        l.parse().map_err(|_| bad())?,
        k.parse().map_err(|_| bad())?,
    )?))
}

fn sweep_outcome(cli: &Cli, rep: SweepReport) -> LabResult<Outcome> {
    let text = render(&rep.rows, &rep, cli.format)?;
    let mut summary = String::new();
    for f in &rep.families {
        summary.push_str(&format!(
            "{} {} m={} n={}{}: rows={} median={:.4e} max={:.4e} spread={:.3}{} unconverged={}\n",
            f.family,
            f.kind,
            f.m,
            f.n,
            f.t.map_or(String::new(), |t| format!(" t={t}")),
            f.rows,
            f.median_ratio,
            f.max_ratio,
            f.spread,
            f.slope.map_or(String::new(), |s| format!(" slope={s:.3}")),
            f.unconverged,
        ));
    }
    let mut extra = Vec::new();
    if let (Some(out), Format::Csv) = (&cli.out, cli.format) {
        extra.push((
            script_path(out),
            gnuplot_script(out, "a2", "ratio", "operator", BOUND_COLUMNS),
        ));
    }
    let passed = rep.rows.iter().all(|r| r.ratio.is_finite() && r.ratio >= 0.0);
    Ok(Outcome {
        text,
        extra,
        summary,
        passed,
    })
}

pub fn run(cli: &Cli) -> LabResult<Outcome> {
    match &cli.command {
        Command::Char { weight, chars } => {
            let spec = WeightFamilySpec::parse(weight, Some(cli.depth))?;
            let w = spec.generate()?;
            let rows = cmd_char(&w, &spec.to_string(), &parse_list(chars)?)?;
            Ok(Outcome {
                text: render(&rows, &rows, cli.format)?,
                extra: Vec::new(),
                summary: String::new(),
                passed: true,
            })
        }
        Command::Necessary { weight, t, p, m, n, i0 } => {
            let spec = WeightFamilySpec::parse(weight, Some(cli.depth))?;
            let w = load_weight(&spec, cli.depth)?;
            let rep = cmd_necessary(&w, &spec.to_string(), *t, *p, *m, *n, parse_i0(i0)?)?;
            let summary = format!(
                "max discrepancy {:.3e}; C_tp admissible {:.12e}, full {:.12e}; max scaled ratio {:.12e}; {}\n",
                rep.max_discrepancy,
                rep.c_tp_admissible,
                rep.c_tp_full,
                rep.max_scaled_ratio,
                if rep.passed { "ok" } else { "FAILED" }
            );
            Ok(Outcome {
                text: render(&rep.rows, &rep, cli.format)?,
                extra: Vec::new(),
                summary,
                passed: rep.passed,
            })
        }
        Command::SweepPara(a) => sweep_outcome(cli, cmd_sweep_paraproduct(&cli.sweep_config(a)?)?),
        Command::SweepMult(a) => sweep_outcome(cli, cmd_sweep_multiplier(&cli.sweep_config(a)?)?),
        Command::VerifyLemmas(a) => {
            let rep = cmd_verify_lemmas(&cli.sweep_config(a)?)?;
            let mut summary = format!("{} weights, {} checks\n", rep.weights, rep.checks.len());
            for c in rep.failures() {
                summary.push_str(&format!(
                    "FAILED {}: ratio {:.6e} > {} on {} at ({}, {}): lhs {:.6e} rhs {:.6e}\n",
                    c.check,
                    c.max_ratio,
                    c.constant.unwrap_or(f64::NAN),
                    c.weight,
                    c.witness_level,
                    c.witness_index,
                    c.lhs,
                    c.rhs
                ));
            }
            Ok(Outcome {
                text: render(&rep.checks, &rep, cli.format)?,
                extra: Vec::new(),
                summary,
                passed: rep.passed,
            })
        }
        Command::Norm { op, weight, symbol } => {
            let cfg = cli.base_config();
            let desc = OperatorDescriptor::parse(op)?;
            let weight = weight
                .as_deref()
                .map(|s| WeightFamilySpec::parse(s, Some(cli.depth)))
                .transpose()?;
            let symbol = symbol.as_deref().map(str::parse::<SymbolSpec>).transpose()?;
            let row = cmd_norm(&desc, weight.as_ref(), symbol.as_ref(), &cfg)?;
            let rows = [row];
            Ok(Outcome {
                text: render(&rows, &rows[0], cli.format)?,
                extra: Vec::new(),
                summary: String::new(),
                passed: true,
            })
        }
    }
}
