use std::str::FromStr;

use dyadlab_core::weights::{
    ap_characteristic, cs_characteristic, doubling_constant, rh_characteristic, CharacteristicReport, Weight,
};
use serde::{Deserialize, Serialize};

use crate::error::{LabError, LabResult};

/// A requested characteristic: `ap:P`, `rh:P`, `cs:S`, `doubling`, or
/// `rel:S`, the relative gap between `[w]_{C_S}^{1/S}` and `[w]_{RH_S}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Characteristic {
    Ap(f64),
    Rh(f64),
    Cs(f64),
    Doubling,
    Relation(f64),
}

impl FromStr for Characteristic {
    type Err = LabError;

    fn from_str(s: &str) -> LabResult<Self> {
        let bad = || LabError::Config(format!("unknown characteristic {s:?}"));
        if s == "doubling" {
            return Ok(Characteristic::Doubling);
        }
        let (name, x) = s.split_once(':').ok_or_else(bad)?;
        let x: f64 = x.parse().map_err(|_| bad())?;
        Ok(match name {
            "ap" => Characteristic::Ap(x),
            "rh" => Characteristic::Rh(x),
            "cs" => Characteristic::Cs(x),
            "rel" => Characteristic::Relation(x),
            _ => return Err(bad()),
        })
    }
}

impl std::fmt::Display for Characteristic {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Characteristic::Ap(p) => write!(f, "ap:{p}"),
            Characteristic::Rh(p) => write!(f, "rh:{p}"),
            Characteristic::Cs(s) => write!(f, "cs:{s}"),
            Characteristic::Doubling => f.write_str("doubling"),
            Characteristic::Relation(s) => write!(f, "rel:{s}"),
        }
    }
}

pub const DEFAULT_CHARACTERISTICS: &str = "ap:2,rh:2,cs:2,cs:-1,doubling,rel:2";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CharRow {
    pub weight: String,
    pub depth: u32,
    pub characteristic: String,
    pub value: f64,
    pub witness_level: Option<u32>,
    pub witness_index: Option<usize>,
}

fn row(weight: &str, w: &Weight, name: String, r: Option<CharacteristicReport>, value: f64) -> CharRow {
    CharRow {
        weight: weight.to_string(),
        depth: w.grid().depth(),
        characteristic: name,
        value,
        witness_level: r.map(|r| r.witness.level),
        witness_index: r.map(|r| r.witness.index),
    }
}

pub fn cmd_char(w: &Weight, weight_id: &str, which: &[Characteristic]) -> LabResult<Vec<CharRow>> {
    which
        .iter()
        .map(|&c| {
            let name = c.to_string();
            Ok(match c {
                Characteristic::Ap(p) => {
                    let r = ap_characteristic(w, p)?;
                    row(weight_id, w, name, Some(r), r.value)
                }
                Characteristic::Rh(p) => {
                    let r = rh_characteristic(w, p)?;
                    row(weight_id, w, name, Some(r), r.value)
                }
                Characteristic::Cs(s) => {
                    let r = cs_characteristic(w, s)?;
                    row(weight_id, w, name, Some(r), r.value)
                }
                Characteristic::Doubling => {
                    let r = doubling_constant(w);
                    row(weight_id, w, name, Some(r), r.value)
                }
                Characteristic::Relation(s) => {
                    let cs = cs_characteristic(w, s)?.value.powf(s.recip());
                    let rh = rh_characteristic(w, s)?.value;
                    row(weight_id, w, name, None, (cs - rh).abs() / rh)
                }
            })
        })
        .collect()
}

pub fn parse_list(s: &str) -> LabResult<Vec<Characteristic>> {
    s.split(',').filter(|x| !x.is_empty()).map(str::parse).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use dyadlab_core::weights::WeightFamilySpec;

    #[test]
    fn flat_cascade_is_trivial() {
        let w = WeightFamilySpec::Cascade {
            depth: 6,
            delta: 0.0,
            seed: 1,
        }
        .generate()
        .unwrap();
        let rows = cmd_char(&w, "flat", &parse_list(DEFAULT_CHARACTERISTICS).unwrap()).unwrap();
        let get = |n: &str| rows.iter().find(|r| r.characteristic == n).unwrap().value;
        assert_eq!(get("ap:2"), 1.0);
        assert_eq!(get("cs:2"), 1.0);
        assert_eq!(get("doubling"), 2.0);
        assert_eq!(get("rel:2"), 0.0);
    }

    #[test]
    fn list_parsing() {
        assert_eq!(
            parse_list("ap:3,doubling").unwrap(),
            vec![Characteristic::Ap(3.0), Characteristic::Doubling]
        );
        assert!(parse_list("ap").is_err());
        assert!(parse_list("xx:2").is_err());
    }
}
