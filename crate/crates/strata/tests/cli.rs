//! End-to-end checks of the command-line front end: exit codes, the
//! one-line diagnostic format, seed reproducibility, and report
//! formats.

use std::path::Path;
use std::process::{Command, Output};

fn exe() -> &'static str {
    env!("CARGO_BIN_EXE_strata")
}

fn sample_config() -> &'static str {
    concat!(env!("CARGO_MANIFEST_DIR"), "/../../configs/point_segment.toml")
}

fn run(args: &[&str]) -> Output {
    Command::new(exe()).args(args).output().unwrap()
}

fn stderr_line(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).trim_end().to_string()
}

#[test]
fn entropy_succeeds_on_the_sample_config() {
    let out = run(&["entropy", sample_config()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_line(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("total"), "missing total line: {text}");
    assert!(text.contains("E(D)"), "missing expected-dimension line: {text}");
}

#[test]
fn config_errors_exit_2_with_one_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.toml");
    std::fs::write(
        &path,
        "[[component]]\nkind = \"segment\"\na = [0.0]\nb = [2.0]\nweight = 1.0\nwobble = 3\n",
    )
    .unwrap();
    let out = run(&["entropy", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let line = stderr_line(&out);
    assert!(line.starts_with("error[config]:"), "diagnostic: {line}");
    assert!(!line.contains('\n'), "diagnostic spans lines: {line}");
    assert!(line.contains("line"), "missing location: {line}");
}

#[test]
fn missing_config_exits_5() {
    let out = run(&["entropy", "/no/such/file.toml"]);
    assert_eq!(out.status.code(), Some(5));
    let line = stderr_line(&out);
    assert!(line.starts_with("error[io]:"), "diagnostic: {line}");
    assert!(line.contains("file.toml"), "missing path: {line}");
}

#[test]
fn unwritable_output_exits_5() {
    let out = run(&["aep", sample_config(), "--out", "/no/such/dir/report.jsonl"]);
    assert_eq!(out.status.code(), Some(5), "stderr: {}", stderr_line(&out));
    assert!(stderr_line(&out).starts_with("error[io]:"));
}

#[test]
fn failed_bounds_exit_4_and_still_write_the_report() {
    // skewed weights put the entropy strictly between letter-count
    // rates, so a near-zero margin admits no typical words at all
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("skewed.toml");
    std::fs::write(
        &config,
        "[[component]]\nkind = \"point\"\nat = [-1.0]\nweight = 0.3\n\n\
         [[component]]\nkind = \"segment\"\na = [0.0]\nb = [2.0]\nweight = 0.7\n\n\
         [experiment]\nn = [12]\ndelta = 1e-9\nxi = 0.2\ntrials = 2048\nseed = 7\n",
    )
    .unwrap();
    let out_path = dir.path().join("report.jsonl");
    let out = run(&[
        "aep",
        config.to_str().unwrap(),
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(4), "stderr: {}", stderr_line(&out));
    let text = std::fs::read_to_string(&out_path).unwrap();
    assert!(text.contains("\"pass\":false"), "report: {text}");
}

#[test]
fn sampling_is_seed_reproducible() {
    let args = ["sample", sample_config(), "--seed", "9", "--trials", "50"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let c = run(&["sample", sample_config(), "--seed", "10", "--trials", "50"]);
    assert_ne!(a.stdout, c.stdout, "different seeds produced identical draws");
}

#[test]
fn chain_rule_passes_on_the_sample_config() {
    let out = run(&["chain-rule", sample_config()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_line(&out));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("residual"), "missing residual: {text}");
}

#[test]
fn charts_lists_the_gallery() {
    let out = run(&["charts"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.contains("helix"), "gallery output: {text}");
    assert!(text.contains("sphere patch"), "gallery output: {text}");
}

#[test]
fn formats_share_content_and_end_with_wall_time() {
    let dir = tempfile::tempdir().unwrap();
    for format in ["json-lines", "csv", "human-text"] {
        let path = dir.path().join(format!("r.{format}"));
        let out = run(&[
            "aep",
            sample_config(),
            "--format",
            format,
            "--out",
            path.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "{format} stderr: {}", stderr_line(&out));
        let text = std::fs::read_to_string(&path).unwrap();
        let last = text.lines().last().unwrap();
        assert!(last.contains("wall"), "{format} footer: {last}");
    }
}

#[test]
fn flags_override_the_config_file() {
    // the config pins seed 7; overriding it must change the sampled mass
    let base = run(&["aep", sample_config()]);
    let other = run(&["aep", sample_config(), "--seed", "8"]);
    assert_eq!(base.status.code(), Some(0));
    assert_eq!(other.status.code(), Some(0));
    let strip = |o: &Output| {
        String::from_utf8_lossy(&o.stdout)
            .lines()
            .filter(|l| !l.contains("wall") && !l.contains("seed"))
            .collect::<Vec<_>>()
            .join("\n")
    };
    assert_ne!(strip(&base), strip(&other), "seed override had no effect");
}

#[test]
fn infeasible_enumeration_is_rejected_up_front() {
    // 2^25 words blow past the exhaustive-enumeration cap; the run must
    // refuse before sampling and point at the sampling mode instead
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("wide.toml");
    std::fs::write(
        &path,
        "[[component]]\nkind = \"point\"\nat = [-1.0]\nweight = 0.5\n\n\
         [[component]]\nkind = \"segment\"\na = [0.0]\nb = [2.0]\nweight = 0.5\n\n\
         [experiment]\nn = [25]\ndelta = 0.15\nxi = 0.2\ntrials = 128\nseed = 1\n",
    )
    .unwrap();
    let out = run(&["aep", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_line(&out));
    let line = stderr_line(&out);
    assert!(line.starts_with("error[config]:"), "diagnostic: {line}");
    assert!(line.contains("monte-carlo"), "no remedy suggested: {line}");
}

fn assert_file_exists(p: &Path) {
    assert!(p.exists(), "missing {}", p.display());
}

#[test]
fn committed_configs_parse_and_build() {
    for name in ["point_segment.toml", "circle_patch.toml", "helix.toml"] {
        let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name);
        assert_file_exists(&path);
        let out = run(&["entropy", path.to_str().unwrap()]);
        assert_eq!(
            out.status.code(),
            Some(0),
            "{name} failed: {}",
            stderr_line(&out)
        );
    }
}
