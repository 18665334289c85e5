use std::path::PathBuf;
use std::process::{Command, Output};

use clap::Parser;
use dyadlab_cli::app::{run, Cli};
use dyadlab_cli::{BoundRow, ExperimentConfig, LemmaReport, NecessaryReport};

fn bin(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dyadlab")).args(args).output().unwrap()
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("dyadlab-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn in_process(args: &[&str]) -> dyadlab_cli::app::Outcome {
    let mut full = vec!["dyadlab"];
    full.extend_from_slice(args);
    run(&Cli::try_parse_from(full).unwrap()).unwrap()
}

#[test]
fn flat_cascade_characteristics() {
    let out = bin(&[
        "char",
        "--depth",
        "6",
        "--weight",
        "cascade:delta=0,seed=4",
        "--chars",
        "ap:2,cs:3,doubling",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let values: Vec<&str> = text.lines().skip(1).map(|l| l.rsplit(',').nth(2).unwrap()).collect();
    assert_eq!(values, ["1.0", "1.0", "2.0"]);
}

#[test]
fn power_weight_a2_grows_with_depth() {
    let a2 = |d: &str| -> f64 {
        let o = in_process(&[
            "--depth",
            d,
            "--format",
            "json",
            "char",
            "--weight",
            "power:a=0.8",
            "--chars",
            "ap:2",
        ]);
        let v: serde_json::Value = serde_json::from_str(&o.text).unwrap();
        v[0]["value"].as_f64().unwrap()
    };
    let vals: Vec<f64> = ["4", "6", "8", "10"].iter().map(|d| a2(d)).collect();
    assert!(vals.windows(2).all(|p| p[0] <= p[1]), "{vals:?}");
}

#[test]
fn relation_column_vanishes() {
    let o = in_process(&[
        "--depth",
        "8",
        "--format",
        "json",
        "char",
        "--weight",
        "cascade:delta=0.9,seed=2",
        "--chars",
        "rel:2,rel:3",
    ]);
    let v: serde_json::Value = serde_json::from_str(&o.text).unwrap();
    for row in v.as_array().unwrap() {
        assert!(row["value"].as_f64().unwrap() < 1e-12);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["char", "--weight", "nonsense"]).status.code(), Some(2));
    assert_eq!(
        bin(&["sweep-para", "--depth", "3", "--weight", "cascade:delta=0.5,seed=1"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(
        bin(&[
            "necessary",
            "--depth",
            "6",
            "--weight",
            "cascade:delta=0.5,seed=1",
            "--t",
            "1",
            "--n",
            "2",
            "--i0",
            "1:0"
        ])
        .status
        .code(),
        Some(2)
    );
    assert_eq!(
        bin(&["verify-lemmas", "--depth", "6", "--cascade", "2:0.99:2"])
            .status
            .code(),
        Some(0)
    );
    // clap rejects unknown flags with its own exit code 2 as well
    assert_eq!(bin(&["char", "--bogus"]).status.code(), Some(2));
}

#[test]
fn necessary_single_interval() {
    let o = in_process(&[
        "--depth",
        "8",
        "--format",
        "json",
        "necessary",
        "--weight",
        "cascade:delta=0.8,seed=9",
        "--t",
        "-0.5",
        "--p",
        "1.5",
        "--m",
        "2",
        "--n",
        "1",
        "--i0",
        "4:3",
    ]);
    let rep: NecessaryReport = serde_json::from_str(&o.text).unwrap();
    assert_eq!(rep.rows.len(), 1);
    assert_eq!((rep.rows[0].l0_level, rep.rows[0].l0_index), (3, 1));
    assert!(rep.max_discrepancy < 1e-12);
    assert!(o.passed);
}

#[test]
fn out_file_gets_gnuplot_companion() {
    let path = scratch("para.csv");
    let p = path.to_str().unwrap();
    let out = bin(&[
        "sweep-para",
        "--depth",
        "6",
        "--cascade",
        "2:0.8:1",
        "--m",
        "0,1",
        "--n",
        "0",
        "--out",
        p,
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let mut rdr = csv::Reader::from_path(&path).unwrap();
    let rows: Vec<BoundRow> = rdr.deserialize().collect::<Result<_, _>>().unwrap();
    assert_eq!(rows.len(), 4);
    assert!(rows
        .iter()
        .all(|r| (r.ratio - r.measured_norm / r.denominator).abs() <= 1e-15 * r.ratio.max(1.0)));
    let script = std::fs::read_to_string(path.with_extension("gp")).unwrap();
    assert!(script.contains("para.csv"));
    let summary = String::from_utf8(out.stderr).unwrap();
    assert!(summary.contains("para m=1 n=0"));
}

#[test]
fn config_file_drives_sweep() {
    let cfg = ExperimentConfig {
        depth: 6,
        weights: vec!["cascade:depth=6,delta=0.5,seed=1".into()],
        symbols: vec!["const:c=2".into(), "haar:level=1,index=0".into()],
        m_values: vec![0],
        n_values: vec![1],
        ..ExperimentConfig::default()
    };
    let path = scratch("cfg.json");
    std::fs::write(&path, serde_json::to_string(&cfg).unwrap()).unwrap();
    let o = in_process(&["--format", "json", "sweep-para", "--config", path.to_str().unwrap()]);
    let v: serde_json::Value = serde_json::from_str(&o.text).unwrap();
    let rows: Vec<BoundRow> = serde_json::from_value(v["rows"].clone()).unwrap();
    assert_eq!(rows.len(), 2);
    assert_eq!(rows[0].measured_norm, 0.0);
    assert_eq!(rows[0].ratio, 0.0);
    assert!(rows[1].measured_norm > 0.0);
}

#[test]
fn multiplier_at_t_zero_is_a_shift() {
    let o = in_process(&[
        "--depth",
        "7",
        "--format",
        "json",
        "sweep-mult",
        "--cascade",
        "3:0.9:1",
        "--t",
        "0",
        "--m",
        "0,2",
        "--n",
        "1",
    ]);
    let v: serde_json::Value = serde_json::from_str(&o.text).unwrap();
    let rows: Vec<BoundRow> = serde_json::from_value(v["rows"].clone()).unwrap();
    assert_eq!(rows.len(), 6);
    for r in rows {
        assert!(r.measured_norm <= 1.0 + 1e-8);
        assert!(r.denominator >= ((r.m + r.n + 2) as f64).powi(3));
        assert!(r.ratio <= 1.0);
    }
}

#[test]
fn lemma_report_json_lists_witnesses() {
    let o = in_process(&[
        "--depth",
        "7",
        "--format",
        "json",
        "verify-lemmas",
        "--weight",
        "cascade:delta=0.99,seed=3",
    ]);
    let rep: LemmaReport = serde_json::from_str(&o.text).unwrap();
    assert!(rep.passed);
    let little = rep.checks.iter().find(|c| c.check == "little-lemma").unwrap();
    assert_eq!(little.constant, Some(4.0));
    assert!(little.max_ratio <= 4.0);
    assert!(little.lhs <= little.rhs * 4.0);
}

#[test]
fn norm_of_paraproduct_needs_symbol() {
    let out = bin(&["norm", "--depth", "6", "--op", "para:m=0,n=0"]);
    assert_eq!(out.status.code(), Some(2));
    let out = bin(&[
        "norm",
        "--depth",
        "6",
        "--op",
        "para:m=0,n=0",
        "--symbol",
        "random:seed=1",
        "--weight",
        "power:a=0.5",
    ]);
    assert_eq!(out.status.code(), Some(0));
}

#[test]
fn in_process_and_binary_agree() {
    let args = [
        "--depth",
        "7",
        "sweep-para",
        "--cascade",
        "2:0.9:2",
        "--m",
        "1",
        "--n",
        "1",
    ];
    let o = in_process(&args);
    let b = bin(&args);
    assert_eq!(o.text.as_bytes(), b.stdout.as_slice());
}
