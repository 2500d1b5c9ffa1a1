use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn lab(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_warmup-lab"))
        .args(args)
        .env("WARMUP_LAB_OUT", out)
        .output()
        .expect("spawn warmup-lab")
}

fn text(b: &[u8]) -> String {
    String::from_utf8_lossy(b).into_owned()
}

fn example(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("examples/configs").join(name).display().to_string()
}

fn run_ids(stdout: &str) -> Vec<String> {
    stdout.lines().filter_map(|l| l.split_whitespace().next()).map(String::from).collect()
}

#[test]
fn run_writes_three_files_under_the_env_root() {
    let out = tempfile::tempdir().unwrap();
    let o = lab(out.path(), &["run", &example("adaptive_exp_quadratic.toml")]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let ids = run_ids(&text(&o.stdout));
    assert_eq!(ids.len(), 1);
    let mut files: Vec<String> = fs::read_dir(out.path().join(&ids[0]))
        .unwrap()
        .map(|e| e.unwrap().file_name().to_string_lossy().into_owned())
        .collect();
    files.sort();
    assert_eq!(files, ["smoothness_trace.csv", "summary.json", "trajectory.csv"]);

    let rep = lab(out.path(), &["report", &ids[0], "no-such-run"]);
    assert!(rep.status.success());
    assert!(text(&rep.stdout).contains(&ids[0]));
    assert!(text(&rep.stderr).contains("no-such-run"));
}

#[test]
fn sweep_over_clip_level_gives_three_runs() {
    let out = tempfile::tempdir().unwrap();
    let o = lab(out.path(), &["run", "--jobs", "2", &example("clipped_sweep.toml")]);
    assert!(o.status.success(), "{}", text(&o.stderr));
    let mut ids = run_ids(&text(&o.stdout));
    assert_eq!(ids.len(), 3);
    ids.dedup();
    assert_eq!(ids.len(), 3);
}

#[test]
fn problem_commands() {
    let out = tempfile::tempdir().unwrap();
    let p = out.path().join("p.toml");
    fs::write(&p, "[problem]\nname = \"exp_quadratic\"\nparams = { h1 = 2.0 }\n").unwrap();
    let p = p.to_str().unwrap();

    let o = lab(out.path(), &["constants", p]);
    assert!(o.status.success());
    let cert: serde_json::Value = serde_json::from_str(&text(&o.stdout)).unwrap();
    assert_eq!(cert["h1"], 2.0);

    assert_eq!(lab(out.path(), &["verify", p, "--points", "50"]).status.code(), Some(0));
    let bad = lab(out.path(), &["verify", p, "--points", "50", "--cert", "0.1,0.1"]);
    assert_eq!(bad.status.code(), Some(2));

    let o = lab(out.path(), &["lemmas", p, "--points", "50", "--steps", "100"]);
    assert!(o.status.success());
    assert_eq!(text(&o.stdout).lines().next(), Some("lemma,index,lhs,rhs,status"));
}

#[test]
fn errors_exit_nonzero_with_context() {
    let out = tempfile::tempdir().unwrap();
    let o = lab(out.path(), &["experiment", "nope"]);
    assert!(!o.status.success());
    let err = text(&o.stderr);
    assert!(err.contains("warmup-vs-constant"), "{err}");

    let bad = out.path().join("bad.toml");
    fs::write(&bad, "seed = 0\n[problem]\nname = \"quadratic\"\n[policy\nkind = \"constant\"\n").unwrap();
    let o = lab(out.path(), &["run", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    let err = text(&o.stderr);
    assert!(err.contains("bad.toml") && err.contains("line 4"), "{err}");
}
