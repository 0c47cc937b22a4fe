mod pipeline;

use std::collections::BTreeMap;
use std::path::Path;

use pipeline::{ok, reread, run_pipeline, snapshot, SMALL_CONFIG, STAGES};
use reread_core::ingest::{generate_synthetic_corpus, Range, SyntheticCorpusSpec, Trial};
use serde_json::Value;
use sha2::{Digest, Sha256};

const FIXTURE: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/tests/fixtures/five_trials");

fn code(args: &[&str]) -> i32 {
    reread(args).status.code().expect("exit code")
}

fn read_csv(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn usage_errors_exit_1() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    assert_eq!(code(&["featurize", "--input", FIXTURE, "--out", &out, "--bogus"]), 1);
    assert_eq!(code(&["no-such-command"]), 1);
    assert_eq!(code(&[]), 1);
    assert_eq!(code(&["featurize", "--input", FIXTURE]), 1, "missing --out");
    assert_eq!(code(&["synth-corpus", "--out", &out, "--jobs", "0"]), 1);
    assert_eq!(code(&["synth-corpus", "--out", &out, "--seed", "x"]), 1);

    let bad = dir.path().join("bad.toml");
    std::fs::write(&bad, "sede = 3\n").unwrap();
    assert_eq!(code(&["synth-corpus", "--config", bad.to_str().unwrap(), "--out", &out]), 1);
    std::fs::write(&bad, "[train]\nmodels = [\"forest\"]\n").unwrap();
    assert_eq!(code(&["synth-corpus", "--config", bad.to_str().unwrap(), "--out", &out]), 1);
    assert_eq!(code(&["--help"]), 0);
}

#[test]
fn data_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out").display().to_string();
    let empty = dir.path().join("empty");
    std::fs::create_dir(&empty).unwrap();
    assert_eq!(code(&["featurize", "--input", empty.to_str().unwrap(), "--out", &out]), 2);

    let broken = dir.path().join("broken");
    std::fs::create_dir(&broken).unwrap();
    std::fs::copy(Path::new(FIXTURE).join("ia_report.csv"), broken.join("ia_report.csv")).unwrap();
    let fix = std::fs::read_to_string(Path::new(FIXTURE).join("fixation_report.csv")).unwrap();
    let mut lines: Vec<String> = fix.lines().map(str::to_string).collect();
    lines[5] = lines[5].replacen(",180,", ",abc,", 1);
    std::fs::write(broken.join("fixation_report.csv"), lines.join("\n")).unwrap();
    let res = reread(&["featurize", "--input", broken.to_str().unwrap(), "--out", &out]);
    assert_eq!(res.status.code(), Some(2));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("line 6") && err.contains("abc"), "{err}");
}

/// Moves four of one article's consecutive rereaders to another article, so
/// only two remain and no group of three can be formed.
#[test]
fn infeasible_schedule_exits_3() {
    let mut trials = generate_synthetic_corpus(&SyntheticCorpusSpec {
        paragraphs_per_article: Range { min: 1, max: 1 },
        words_per_paragraph: Range { min: 5, max: 6 },
        ..SyntheticCorpusSpec::default()
    })
    .unwrap();
    let at = |trials: &[Trial], p: &str, pos: u8| trials.iter().find(|t| t.participant_id == p && t.article_position == pos).unwrap().article_id;
    let target = trials[0].participant_id.clone();
    let article = at(&trials, &target, 11);
    let movers: Vec<String> = trials
        .iter()
        .filter(|t| t.article_position == 11 && t.article_id == article)
        .map(|t| t.participant_id.clone())
        .take(4)
        .collect();
    assert_eq!(movers.len(), 4);
    for p in &movers {
        let other = at(&trials, p, 1);
        for t in trials.iter_mut().filter(|t| &t.participant_id == p) {
            if t.article_id == article {
                t.article_id = other;
            } else if t.article_id == other {
                t.article_id = article;
            }
        }
    }
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(dir.path().join("trials.json"), serde_json::to_vec(&trials).unwrap()).unwrap();
    let out = dir.path().join("split").display().to_string();
    let res = reread(&["split", "--input", dir.path().to_str().unwrap(), "--out", &out]);
    assert_eq!(res.status.code(), Some(3), "{}", String::from_utf8_lossy(&res.stderr));
}

#[test]
fn featurize_bundled_fixture() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().display().to_string();
    ok(&["featurize", "--input", FIXTURE, "--out", &out]);
    let rows = read_csv(&dir.path().join("features.csv"));
    assert_eq!(rows.len(), 6);
    assert!(rows.iter().all(|r| r.len() == 35));

    // Trial 1 reads words [1:200, 2:150, 1:100, 3:250] of five words.
    let named: BTreeMap<&str, f64> = rows[0].iter().map(String::as_str).zip(rows[1].iter().map(|v| v.parse().unwrap())).collect();
    let expect = [
        ("mean_tfd", 700.0 / 3.0),
        ("mean_ffd", 200.0),
        ("mean_gd", 200.0),
        ("mean_fixation_count", 0.8),
        ("skip_rate", 0.4),
        ("regression_rate", 0.2),
        ("num_words_tfd_gt_gd_frac", 1.0 / 3.0),
        ("mean_without_first_run_dwell_time", 100.0),
        // Edges 1→2, 2→1, 1→3 among five words.
        ("density", 0.2),
        ("avg_betweenness", 1.0 / 60.0),
        ("avg_closeness", 1.0 / 6.0),
        ("num_bridges", 2.0),
        // Fewer words than regression terms need.
        ("coef_tfd_surprisal", 0.0),
    ];
    for (name, want) in expect {
        assert!((named[name] - want).abs() < 1e-8, "{name}: {} vs {want}", named[name]);
    }

    let index = read_csv(&dir.path().join("trial_index.csv"));
    assert_eq!(index.len(), 6);
    assert_eq!(index[1][1..5], ["p001", "1", "1", "1"]);
}

fn sha(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

/// Reruns `stage` from nothing but its manifest and the inputs it names.
fn rerun_from_manifest(root: &Path, stage: &str, into: &Path) {
    let dir = root.join(stage);
    let manifest: Value = serde_json::from_slice(&std::fs::read(dir.join("run_manifest.json")).unwrap()).unwrap();
    let command = manifest["command"].as_str().unwrap();
    let seed = manifest["seed"].as_u64().unwrap().to_string();
    let config = dir.join("config.toml").display().to_string();
    let out = into.join(stage).display().to_string();
    let d = |s: &str| root.join(s).display().to_string();
    let mut args = vec![command.to_string(), "--config".into(), config, "--seed".into(), seed, "--out".into(), out];
    let inputs: Vec<(&str, String)> = match command {
        "synth-corpus" => vec![],
        "ingest" => vec![("input", d("corpus"))],
        "simulate" | "featurize" | "split" => vec![("input", d("ingest"))],
        "train" => vec![("features", d("feat")), ("plan", d("split")), ("references", d("sim"))],
        "evaluate" => vec![("input", d("train"))],
        "compare-ez" => vec![("input", d("ingest")), ("references", d("sim"))],
        "report" => vec![("evaluation", d("eval")), ("comparison", d("cmp"))],
        other => panic!("unexpected command {other}"),
    };
    for (k, v) in inputs {
        args.push(format!("--{k}"));
        args.push(v);
    }
    ok(&args.iter().map(String::as_str).collect::<Vec<_>>());
}

#[test]
fn pipeline_is_deterministic_and_reproducible_from_manifests() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("small.toml");
    std::fs::write(&config, SMALL_CONFIG).unwrap();
    let (a, b, c) = (dir.path().join("a"), dir.path().join("b"), dir.path().join("c"));
    run_pipeline(&a, &config, 11, None);
    run_pipeline(&b, &config, 11, Some(1));
    let (sa, sb) = (snapshot(&a), snapshot(&b));
    assert_eq!(sa.keys().collect::<Vec<_>>(), sb.keys().collect::<Vec<_>>());
    for (path, bytes) in &sa {
        assert!(sb[path] == *bytes, "{} differs between runs", path.display());
    }
    for file in ["accuracy.csv", "accuracy.md", "accuracy_by_article_position.csv", "accuracy_by_first_reading_position.csv", "simulation_gap.csv", "simulation_gap.md"] {
        assert!(sa.contains_key(&Path::new("report").join(file)), "missing report/{file}");
    }

    for stage in STAGES {
        let dir_stage = a.join(stage);
        let manifest: Value = serde_json::from_slice(&std::fs::read(dir_stage.join("run_manifest.json")).unwrap()).unwrap();
        let artifacts = manifest["artifacts"].as_object().unwrap();
        assert!(!artifacts.is_empty());
        for (name, hash) in artifacts {
            assert_eq!(sha(&std::fs::read(dir_stage.join(name)).unwrap()), hash.as_str().unwrap(), "{stage}/{name}");
        }
        rerun_from_manifest(&a, stage, &c);
        let again: Value = serde_json::from_slice(&std::fs::read(c.join(stage).join("run_manifest.json")).unwrap()).unwrap();
        assert_eq!(again, manifest, "{stage} not reproduced from its manifest");
    }

    // A different seed changes the corpus.
    let d = dir.path().join("d");
    ok(&["synth-corpus", "--config", config.to_str().unwrap(), "--seed", "12", "--out", d.to_str().unwrap()]);
    assert_ne!(std::fs::read(d.join("fixation_report.csv")).unwrap(), sa[&Path::new("corpus").join("fixation_report.csv")]);
}

#[test]
fn gbt_ez_without_references_is_a_usage_error() {
    let dir = tempfile::tempdir().unwrap();
    let root = dir.path();
    let config = root.join("small.toml");
    std::fs::write(&config, SMALL_CONFIG).unwrap();
    let c = config.to_str().unwrap();
    let p = |s: &str| root.join(s).display().to_string();
    ok(&["synth-corpus", "--config", c, "--out", &p("corpus")]);
    ok(&["featurize", "--config", c, "--input", &p("corpus"), "--out", &p("feat")]);
    ok(&["split", "--config", c, "--input", &p("corpus"), "--out", &p("split")]);
    let args = ["train", "--config", c, "--features", &p("feat"), "--plan", &p("split"), "--out", &p("train")];
    let mut with_model = args.to_vec();
    with_model.extend(["--model", "gbt_ez"]);
    assert_eq!(code(&with_model), 1);
    let mut single = args.to_vec();
    single.extend(["--model", "majority,gbt", "--task", "single"]);
    ok(&single);
    let names: Vec<String> = std::fs::read_dir(root.join("train")).unwrap().map(|e| e.unwrap().file_name().to_string_lossy().into_owned()).collect();
    assert!(names.contains(&"cv_single_gbt.json".to_string()));
    assert!(!names.iter().any(|n| n.contains("paired") || n.contains("gbt_ez")));
}
