//! End-to-end checks of the binary: exit codes per error category, seeded
//! determinism of corpus generation, and a full file pipeline from corpus
//! to extension to trace check.

use std::path::Path;
use std::process::{Command, Output};

fn w11ext(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_w11ext"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn w11ext")
}

#[test]
fn exit_codes_match_error_categories() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();

    // usage error -> 1
    let out = w11ext(&["no-such-command"], dir);
    assert_eq!(out.status.code(), Some(1));

    // malformed input -> 2 (schema)
    std::fs::write(dir.join("bad.json"), "{ not json").unwrap();
    let out = w11ext(&["energy", "--in", "bad.json"], dir);
    assert_eq!(out.status.code(), Some(2), "{}", String::from_utf8_lossy(&out.stderr));

    // generate a valid fixture for the remaining probes
    let out = w11ext(
        &["gen-corpus", "--family", "single-bump", "--manifold", "circle", "--counts", "16",
          "--seed", "3", "--out", "u.json"],
        dir,
    );
    assert!(out.status.success());

    // domain error -> 3 (decreasing radius schedule)
    let out = w11ext(&["bbm", "--in", "u.json", "--schedule", "10,5"], dir);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));

    // resolution error -> 4 (sweep radius below 2h)
    let out = w11ext(&["theta", "--in", "u.json", "--R", "1.0", "--sweep"], dir);
    assert_eq!(out.status.code(), Some(4), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn corpus_generation_is_deterministic_per_seed() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    for name in ["a.json", "b.json"] {
        let out = w11ext(
            &["gen-corpus", "--family", "multi-bump:3", "--manifold", "sphere:3", "--counts",
              "24", "--seed", "9", "--out", name],
            dir,
        );
        assert!(out.status.success());
    }
    let a = std::fs::read(dir.join("a.json")).unwrap();
    let b = std::fs::read(dir.join("b.json")).unwrap();
    assert_eq!(a, b);
    let out = w11ext(
        &["gen-corpus", "--family", "multi-bump:3", "--manifold", "sphere:3", "--counts", "24",
          "--seed", "10", "--out", "c.json"],
        dir,
    );
    assert!(out.status.success());
    let c = std::fs::read(dir.join("c.json")).unwrap();
    assert_ne!(a, c);
}

#[test]
fn pipeline_corpus_to_extension_to_trace_check() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    assert!(w11ext(
        &["gen-corpus", "--family", "single-bump", "--manifold", "circle", "--counts", "32",
          "--seed", "5", "--out", "u0.json"],
        dir
    )
    .status
    .success());
    assert!(w11ext(
        &["gen-corpus", "--family", "constant", "--manifold", "circle", "--counts", "32",
          "--seed", "5", "--out", "u1.json"],
        dir
    )
    .status
    .success());

    let out = w11ext(
        &["extend-strip", "--u0", "u0.json", "--u1", "u1.json", "--L", "8", "--n-max", "2",
          "--h-fine", "0.125", "--slab", "slab.json", "--report", "strip.json"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.starts_with("name,value"));
    assert!(stdout.contains("gradient_energy,"));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("strip.json")).unwrap()).unwrap();
    assert!(report["gamma"].as_f64().unwrap() > 0.0);
    assert_eq!(report["levels"][0].as_i64(), Some(0));

    let out = w11ext(
        &["trace-check", "--in", "slab.json", "--u", "u0.json", "--r", "1,2",
          "--report", "trace.json", "--csv", "trace.csv"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(dir.join("trace.csv")).unwrap();
    assert!(csv.lines().count() >= 3);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir.join("trace.json")).unwrap()).unwrap();
    assert_eq!(report["r"].as_array().unwrap().len(), 2);

    // half-space and cube paths through files as well
    let out = w11ext(
        &["extend-halfspace", "--in", "u0.json", "--L", "8", "--n-max", "2", "--h-fine", "0.125",
          "--report", "half.json"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));

    assert!(w11ext(
        &["gen-corpus", "--family", "single-bump", "--manifold", "circle", "--counts", "8",
          "--h", "0.25", "--seed", "6", "--out", "face.json"],
        dir
    )
    .status
    .success());
    let out = w11ext(
        &["extend-cube", "--top", "face.json", "--point", "1,0", "--n-max", "2",
          "--h-fine", "0.03125", "--report", "cube.json"],
        dir,
    );
    assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
}
