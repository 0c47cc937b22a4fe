//! Drives the `reread` binary through every stage.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn reread(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_reread")).args(args).output().expect("binary runs")
}

/// Runs `args` and panics with stderr unless it exits 0.
pub fn ok(args: &[&str]) {
    let out = reread(args);
    assert!(out.status.success(), "reread {}: {}", args.join(" "), String::from_utf8_lossy(&out.stderr));
}

pub const STAGES: [&str; 9] = ["corpus", "ingest", "sim", "feat", "split", "train", "eval", "cmp", "report"];

/// Runs the whole pipeline under `root` with the given config and seed.
pub fn run_pipeline(root: &Path, config: &Path, seed: u64, jobs: Option<usize>) {
    let d = |s: &str| root.join(s).display().to_string();
    let c = config.display().to_string();
    let seed = seed.to_string();
    let jobs = jobs.map(|j| j.to_string());
    let run = |cmd: &str, extra: &[(&str, String)], out: &str| {
        let mut args: Vec<String> = vec![cmd.into(), "--config".into(), c.clone(), "--seed".into(), seed.clone(), "--out".into(), d(out)];
        if let Some(j) = &jobs {
            args.extend(["--jobs".into(), j.clone()]);
        }
        for (k, v) in extra {
            args.push(format!("--{k}"));
            args.push(v.clone());
        }
        ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
    };
    run("synth-corpus", &[], "corpus");
    run("ingest", &[("input", d("corpus"))], "ingest");
    run("simulate", &[("input", d("ingest"))], "sim");
    run("featurize", &[("input", d("ingest"))], "feat");
    run("split", &[("input", d("ingest"))], "split");
    run("train", &[("features", d("feat")), ("plan", d("split")), ("references", d("sim"))], "train");
    run("evaluate", &[("input", d("train"))], "eval");
    run("compare-ez", &[("input", d("ingest")), ("references", d("sim"))], "cmp");
    run("report", &[("evaluation", d("eval")), ("comparison", d("cmp"))], "report");
}

/// Every file under `dir`, keyed by its path relative to `dir`.
pub fn snapshot(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    let mut stack = vec![dir.to_path_buf()];
    while let Some(d) = stack.pop() {
        for e in std::fs::read_dir(&d).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                stack.push(p);
            } else {
                out.insert(p.strip_prefix(dir).unwrap().to_path_buf(), std::fs::read(&p).unwrap());
            }
        }
    }
    out
}

/// A configuration small enough for a quick end-to-end run.
pub const SMALL_CONFIG: &str = r#"
[corpus]
paragraphs_per_article = { min = 1, max = 2 }
words_per_paragraph = { min = 15, max = 25 }

[simulate]
subjects = 60
prototype_pool = 20

[train.grid]
learning_rates = [0.3]
n_estimators = [20]
max_depths = [3]
l1_alphas = [0.0, 1.0]
pca_explained_variance = [1.0]

[evaluate]
bootstrap_resamples = 200
"#;
