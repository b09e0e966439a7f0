use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ngn-motion"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

fn text(o: &Output) -> (String, String) {
    (String::from_utf8_lossy(&o.stdout).into_owned(), String::from_utf8_lossy(&o.stderr).into_owned())
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn inspect_reports_every_file_and_fails_on_bad_ones() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let o = run(&["toy", "--out", path(&data), "--clips-per-class", "2", "--frames", "40"]);
    assert!(o.status.success(), "{:?}", text(&o));

    let o = run(&["inspect", path(&data)]);
    let (out, _) = text(&o);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(out.lines().count(), 8);
    assert!(out.contains("frames=40") && out.contains("channels=2"));

    fs::write(data.join("angry/broken.bvh"), "HIERARCHY\nROOT Hips\n{\n  OFFSET 0 zero 0\n").unwrap();
    let o = run(&["inspect", path(&data)]);
    let (out, err) = text(&o);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(out.lines().count(), 8);
    assert!(err.contains("broken.bvh") && err.contains("line 4"), "{err}");
}

#[test]
fn usage_errors_exit_one() {
    assert_eq!(run(&["train", "--bogus"]).status.code(), Some(1));
    assert_eq!(run(&["pipeline", "--train-fraction", "1.5"]).status.code(), Some(1));
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "seeds = 3\n").unwrap();
    assert_eq!(run(&["config", "--config", path(&cfg)]).status.code(), Some(1));
}

#[test]
fn missing_data_exits_two_with_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let o = run(&["pipeline", "--input", path(&tmp.path().join("nope")), "--out", path(&tmp.path().join("out"))]);
    let (_, err) = text(&o);
    assert_eq!(o.status.code(), Some(2));
    assert!(err.contains("train:"), "{err}");
}

#[test]
fn config_file_and_flags_merge() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("c.toml");
    fs::write(&cfg, "seed = 4\n[ngn]\nneuron_count = 7\n").unwrap();
    let o = run(&["config", "--config", path(&cfg), "--iterations", "9"]);
    let (out, _) = text(&o);
    assert!(o.status.success());
    assert!(out.contains("seed = 4") && out.contains("neuron_count = 7") && out.contains("iterations = 9"), "{out}");
}

#[test]
fn stages_run_separately_and_write_the_layout() {
    let tmp = tempfile::tempdir().unwrap();
    let data = tmp.path().join("data");
    let out = tmp.path().join("out");
    assert!(run(&["toy", "--out", path(&data), "--clips-per-class", "5", "--frames", "80"]).status.success());
    let common = ["--input", path(&data), "--out", path(&out), "--iterations", "5", "--runs", "3", "--trees", "20"];
    for stage in ["train", "generate", "evaluate"] {
        let mut args = vec![stage];
        args.extend(common);
        let o = run(&args);
        assert!(o.status.success(), "{stage}: {:?}", text(&o));
    }
    for f in [
        "fields/angry.json",
        "fields/proud_error.csv",
        "synthetic/manifest.csv",
        "synthetic/neutral/neutral_syn_000.bvh",
        "eval/population.txt",
        "eval/report_base.txt",
        "eval/report_syn.txt",
        "eval/report_syn_base.txt",
        "eval/runs.csv",
        "eval/importance.csv",
        "eval/pairs.csv",
        "eval/trajectory.csv",
        "eval/features.csv",
        "eval/correlation.csv",
    ] {
        assert!(out.join(f).is_file(), "missing {f}");
    }
    let manifest = fs::read_to_string(out.join("synthetic/manifest.csv")).unwrap();
    assert_eq!(manifest.lines().count(), 41);
    assert!(manifest.lines().nth(1).unwrap().contains("angry/angry_00"));
    assert!(!walk(&out).iter().any(|p| p.ends_with(".partial")));
}

fn walk(dir: &Path) -> Vec<String> {
    let mut out = Vec::new();
    for e in fs::read_dir(dir).unwrap() {
        let p = e.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p.to_string_lossy().into_owned());
        }
    }
    out
}
