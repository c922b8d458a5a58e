//! End-to-end runs of the `udn` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use udn_cli::io::{read_document, AllocationRow, BlockageRow, Document, SeRow};

fn udn(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_udn")).args(args).output().expect("spawn udn")
}

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data").join(name)
}

fn ok(out: &Output) {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
}

fn header_value<'a, R>(doc: &'a Document<R>, key: &str) -> Option<&'a str> {
    doc.header.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
}

#[test]
fn simulate_is_byte_identical_for_fixed_seed() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    for path in [&a, &b] {
        let out = udn(&[
            "simulate", "--tier", "muw", "--lambda-hat", "100", "--seed", "7",
            "--output", path.to_str().unwrap(), "replications=20", "max_replications=20",
        ]);
        ok(&out);
    }
    let (ba, bb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_eq!(ba, bb);
    let doc: Document<SeRow> = read_document(&a).unwrap();
    assert_eq!(doc.rows.len(), 1);
    assert_eq!(header_value(&doc, "seed"), Some("7"));
    assert!(doc.rows[0].se_mean.unwrap() > 0.0);
}

#[test]
fn different_seed_changes_output() {
    let run = |seed: &str| {
        let out = udn(&["simulate", "--lambda-hat", "50", "--seed", seed, "replications=10", "max_replications=10"]);
        ok(&out);
        out.stdout
    };
    assert_ne!(run("1"), run("2"));
}

#[test]
fn blockage_table_round_trips_and_leaves_input_alone() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("buildings_seoul.csv");
    std::fs::copy(data("buildings_seoul.csv"), &input).unwrap();
    let before = std::fs::read(&input).unwrap();
    let out_path = dir.path().join("out.csv");
    ok(&udn(&["blockage", "--input", input.to_str().unwrap(), "--output", out_path.to_str().unwrap()]));
    assert_eq!(std::fs::read(&input).unwrap(), before);

    let doc: Document<BlockageRow> = read_document(&out_path).unwrap();
    let names: Vec<&str> = doc.rows.iter().map(|r| r.region.as_str()).collect();
    assert_eq!(names, ["Gangnam", "Jongro", "Yonsei"]);
    let gangnam = &doc.rows[0];
    assert!((gangnam.r_los_2d_m - 17.77).abs() / 17.77 < 0.01);
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\nregion,beta,eta,r_los_2d_m,r_los_3d_m\n"));

    // Refuses to overwrite its own input.
    let clash = udn(&["blockage", "--input", input.to_str().unwrap(), "--output", input.to_str().unwrap()]);
    assert_eq!(clash.status.code(), Some(2));
    assert_eq!(std::fs::read(&input).unwrap(), before);
}

#[test]
fn allocate_recipe_round_trips_in_both_formats() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["csv", "json"] {
        let path = dir.path().join(format!("alloc.{format}"));
        ok(&udn(&[
            "allocate", "--config", data("alloc_jongro_500mhz.cfg").to_str().unwrap(),
            "--format", format, "--output", path.to_str().unwrap(),
        ]));
        let doc: Document<AllocationRow> = read_document(&path).unwrap();
        assert_eq!(doc.rows.len(), 200);
        assert_eq!(header_value(&doc, "w_mu_hz"), Some("20e6"));
        assert_eq!(header_value(&doc, "lambda_u_per_m2"), Some("1e-4"));
        assert!(header_value(&doc, "note.a1_violations").is_some());
        for r in &doc.rows {
            assert!(r.gain >= 1.0 - 1e-12);
            assert!((r.r_d_bps * std::f64::consts::LN_2 - r.r_d).abs() <= 1e-6 * r.r_d);
        }
    }
    let csv = std::fs::read_to_string(dir.path().join("alloc.csv")).unwrap();
    assert!(csv.contains("\nlambda_hat_m,region,beta_m,beta_mu,r_d,r_u,r_d_decoupled,gain,"));
}

#[test]
fn se_rows_cover_grid_and_targets() {
    let out = udn(&["se", "lambda_hat_points=4", "--format", "json"]);
    ok(&out);
    let doc: Document<SeRow> = udn_cli::io::parse(std::str::from_utf8(&out.stdout).unwrap()).unwrap();
    assert_eq!(doc.rows.len(), 4 * 4);
    assert!(doc.rows.iter().all(|r| r.lower_bound <= r.upper_bound && r.se_mean.is_none()));
}

#[test]
fn unknown_key_exits_2_naming_it() {
    let out = udn(&["allocate", "bogus_key=1"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("bogus_key"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "zeta = 0.3\nmystery_hz = 5\n").unwrap();
    let out = udn(&["allocate", "--config", cfg.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("mystery_hz") && err.contains(":2:"), "{err}");
}

#[test]
fn numeric_failure_exits_3() {
    // A1 enforced at a density where it fails.
    let out = udn(&["allocate", "a1_policy=enforce", "lambda_hat_m_list=1.05"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bad_value_and_missing_input_exit_2() {
    assert_eq!(udn(&["se", "alpha_mu=abc"]).status.code(), Some(2));
    assert_eq!(udn(&["blockage"]).status.code(), Some(2));
    assert_eq!(udn(&["blockage", "--input", "/nonexistent.csv"]).status.code(), Some(2));
    assert_eq!(udn(&["simulate", "--tier", "thz"]).status.code(), Some(2));
}
