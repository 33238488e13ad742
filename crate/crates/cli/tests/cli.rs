//! End-to-end tests of the command-line surface: subcommands, file
//! outputs, and the exit-code contract.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_rtlsec"))
}

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/fixtures")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn parse_reports_design_shape() {
    let out = bin()
        .arg("parse")
        .arg(fixtures().join("aes/golden.v"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("module S4"));
    assert!(text.contains("top S4 with 5 instances"));
}

#[test]
fn parse_error_exits_2() {
    let dir = tempdir("parse2");
    let bad = dir.join("bad.v");
    fs::write(&bad, "module m; generate endgenerate endmodule").unwrap();
    let out = bin().arg("parse").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn usage_error_exits_1() {
    let out = bin().arg("experiment").arg("nonesuch").output().unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn simulation_error_exits_3() {
    let dir = tempdir("sim3");
    let vec_path = dir.join("bad.vec");
    // Drives a 2-wide value into a 1-bit input.
    fs::write(&vec_path, "signals: rst,req1,req2\n0,2,0\n").unwrap();
    let out = bin()
        .arg("simulate")
        .arg(fixtures().join("arbiter/golden.v"))
        .arg("--vectors")
        .arg(&vec_path)
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn analyze_writes_sidecar_and_instrumented_source() {
    let dir = tempdir("analyze");
    let out = bin()
        .arg("analyze")
        .arg(fixtures().join("mem/golden.v"))
        .arg("--config")
        .arg(fixtures().join("mem/config.cfg"))
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    let sidecar = fs::read_to_string(dir.join("golden.candidates.tsv")).unwrap();
    assert_eq!(sidecar.lines().count(), 6, "header plus five candidates");
    let instrumented = fs::read_to_string(dir.join("golden.instrumented.v")).unwrap();
    assert!(instrumented.contains("assert((address >= 1024) || sc);"));
}

#[test]
fn analyze_gng_emits_the_sign_check() {
    let out = bin()
        .arg("analyze")
        .arg(fixtures().join("gng/golden.v"))
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(stdout(&out).contains("assert(mul1[32] != 1);"));
}

#[test]
fn simulate_runs_directed_vectors_with_verdicts() {
    let out = bin()
        .arg("simulate")
        .arg(fixtures().join("mem/golden.v"))
        .arg("--config")
        .arg(fixtures().join("mem/config.cfg"))
        .arg("--vectors")
        .arg(fixtures().join("mem/vectors/privilege.vec"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("priv-0\tok"));
    assert!(text.contains("leak-0\tok"));
}

#[test]
fn trace_dump_is_tab_separated_hex() {
    let out = bin()
        .arg("simulate")
        .arg(fixtures().join("arbiter/golden.v"))
        .arg("--vectors")
        .arg(fixtures().join("arbiter/vectors/directed.vec"))
        .arg("--dump-trace")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    let header = text.lines().next().unwrap();
    assert!(header.split('\t').any(|c| c == "gnt1"));
}

#[test]
fn mutate_writes_instance_bundles() {
    let dir = tempdir("mutate");
    let out = bin()
        .arg("mutate")
        .arg(fixtures().join("arbiter/golden.v"))
        .arg("--operators")
        .arg("invert")
        .arg("--n")
        .arg("3")
        .arg("--seed")
        .arg("5")
        .arg("--out")
        .arg(&dir)
        .output()
        .unwrap();
    assert!(out.status.success());
    for i in 1..=3 {
        let idir = dir.join(format!("arb2-{i:02}"));
        assert!(idir.join("design.v").exists());
        let manifest = fs::read_to_string(idir.join("manifest.txt")).unwrap();
        assert!(manifest.contains("operator: InvertSignal"));
        assert!(manifest.contains("seed: 5"));
        let diff = fs::read_to_string(idir.join("diff.patch")).unwrap();
        assert!(diff.lines().any(|l| l.starts_with('-')));
        assert!(diff.lines().any(|l| l.starts_with('+')));
    }
}

#[test]
fn mine_prints_listing_style_rules() {
    let out = bin()
        .arg("mine")
        .arg(fixtures().join("arbiter/golden.v"))
        .arg("--outputs")
        .arg("gnt1,gnt2")
        .arg("--cycles")
        .arg("10000")
        .arg("--seed")
        .arg("1")
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    assert!(text.contains("(req1 == 0) |-> (gnt1 == 0)"));
    assert!(text.contains("(req1 == 1 & state == 0) |-> (gnt1 == 1)"));
}

#[test]
fn experiment_and_report_round_trip() {
    let dir = tempdir("experiment");
    for fixture in ["arbiter", "mem"] {
        let out = bin()
            .arg("experiment")
            .arg(fixture)
            .arg("--seed")
            .arg("1")
            .arg("--out")
            .arg(&dir)
            .output()
            .unwrap();
        assert!(out.status.success(), "{fixture}");
    }
    let arb_tsv = fs::read_to_string(dir.join("arbiter.report.tsv")).unwrap();
    assert!(arb_tsv.contains("summary\t10\t10\t"));
    assert!(dir.join("arbiter.report.md").exists());
    assert!(dir.join("mem-01/design.v").exists());

    let out = bin()
        .arg("report")
        .arg(dir.join("arbiter.report.tsv"))
        .arg(dir.join("mem.report.tsv"))
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = stdout(&out);
    // The memory row checks exactly permissions, buffer, and leakage.
    assert!(text.contains("| Permissions and Privileges |   | x |"));
    assert!(text.contains("| Illegal States & Transitions | x |   |"));
    assert!(text.contains("| Buffer Issues |   | x |"));
    assert!(text.contains("| Information Leakage |   | x |"));
    assert!(text.contains("| mem | 10 | 10 | 0 |"));
}

#[test]
fn experiment_reports_are_deterministic_across_runs() {
    let a = bin()
        .arg("experiment")
        .arg("usb_lite")
        .arg("--seed")
        .arg("7")
        .output()
        .unwrap();
    let b = bin()
        .arg("experiment")
        .arg("usb_lite")
        .arg("--seed")
        .arg("7")
        .output()
        .unwrap();
    assert!(a.status.success() && b.status.success());
    assert_eq!(stdout(&a), stdout(&b));
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("rtlsec-cli-{tag}-{}", std::process::id()));
    let _ = fs::remove_dir_all(&dir);
    fs::create_dir_all(&dir).unwrap();
    dir
}
