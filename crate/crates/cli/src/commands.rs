//! One function per subcommand. Each reads its inputs, computes every
//! artifact in memory and hands them back for writing.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;
use std::time::Duration;

use rayon::prelude::*;
use reread_core::experiment::{
    self, compare_synthetic_to_human, featurize_trials, paragraph_texts, run_cross_validation, CvOptions, CvOutcome, FeaturizedTrial, MetricsTable,
    ModelKind, PositionSummary, SyntheticReference, SyntheticReferences, Task,
};
use reread_core::ezreader::{aggregate_statistical_subjects, prototype_scanpath};
use reread_core::features::feature_names;
use reread_core::ingest::{generate_synthetic_corpus, read_trials, reading_pairs, write_trials, Trial, FIXATION_REPORT_FILE, IA_REPORT_FILE};
use reread_core::split::{build_folds, solve_assignment, verify_split, write_plan_csv, Design, Regime, SolveOptions, SplitPlan};
use reread_core::seed;
use serde::{Deserialize, Serialize};

use crate::config::{parse_list, Config};
use crate::manifest::{InputReader, Outputs};
use crate::Failure;

pub const TRIALS_FILE: &str = "trials.json";
pub const FEATURIZED_FILE: &str = "featurized.json";
pub const REFERENCES_FILE: &str = "references.json";
pub const PLAN_FILE: &str = "plan.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const COMPARISON_FILE: &str = "comparison.json";

fn stage_seed(out: &mut Outputs, master: u64, stage: &str) -> u64 {
    let s = seed::derive(master, stage);
    out.seed(stage, s);
    s
}

/// Trials from an `ingest` output or straight from a pair of reports.
fn load_trials(reader: &mut InputReader, role: &str, dir: &Path, config: &Config) -> Result<Vec<Trial>, Failure> {
    let trials = if dir.join(TRIALS_FILE).is_file() {
        reader.read_json(role, dir, TRIALS_FILE)?
    } else if dir.join(FIXATION_REPORT_FILE).is_file() {
        let ia = reader.read(role, dir, IA_REPORT_FILE)?;
        let fix = reader.read(role, dir, FIXATION_REPORT_FILE)?;
        read_trials(ia.as_slice(), fix.as_slice(), &config.schema)?
    } else {
        return Err(Failure::Data(format!(
            "{}: expected {TRIALS_FILE} or {FIXATION_REPORT_FILE} and {IA_REPORT_FILE}",
            dir.display()
        )));
    };
    let trials: Vec<Trial> = trials;
    for t in &trials {
        t.validate()?;
    }
    if trials.is_empty() {
        return Err(Failure::Data(format!("{}: no trials", dir.display())));
    }
    Ok(trials)
}

fn load_references(reader: &mut InputReader, dir: &Path) -> Result<SyntheticReferences, Failure> {
    let list: Vec<SyntheticReference> = reader.read_json("references", dir, REFERENCES_FILE)?;
    Ok(list.into_iter().map(|r| ((r.article_id, r.paragraph_id), r)).collect())
}

pub fn synth_corpus(config: &Config, master: u64) -> Result<Outputs, Failure> {
    let mut out = Outputs::default();
    let mut spec = config.corpus.clone();
    spec.rng_seed = stage_seed(&mut out, master, "corpus");
    let trials = generate_synthetic_corpus(&spec)?;
    let (mut ia, mut fix) = (Vec::new(), Vec::new());
    write_trials(&trials, &mut ia, &mut fix, &config.schema)?;
    out.add(IA_REPORT_FILE, ia);
    out.add(FIXATION_REPORT_FILE, fix);
    Ok(out)
}

pub fn ingest(config: &Config, input: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let trials = load_trials(&mut reader, "input", input, config)?;
    let mut out = Outputs::default();
    let mut summary = String::from("participant,article,paragraph,reading,article_position,repeat_kind,n_words,n_fixations,total_rt_ms\n");
    for t in &trials {
        writeln!(
            summary,
            "{},{},{},{},{},{},{},{},{}",
            t.participant_id,
            t.article_id,
            t.paragraph_id,
            t.reading_index,
            t.article_position,
            t.repeat_kind.as_str(),
            t.n_words(),
            t.scanpath.len(),
            t.total_rt_ms
        )
        .expect("writing to a string");
    }
    out.json(TRIALS_FILE, &trials);
    out.add("trials.csv", summary);
    out.inputs = reader.inputs;
    Ok(out)
}

pub fn simulate(config: &Config, master: u64, input: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let trials = load_trials(&mut reader, "input", input, config)?;
    let mut out = Outputs::default();
    let sim_seed = stage_seed(&mut out, master, "simulate");
    let subjects = config.simulate.subjects;
    let pool = config.simulate.prototype_pool.min(subjects);
    out.option("subjects", subjects);
    out.option("prototype_pool", pool);

    let texts: Vec<_> = paragraph_texts(&trials).into_iter().collect();
    let per_paragraph = texts
        .iter()
        .map(|&((article, paragraph), words)| {
            let mut paths = experiment::simulate_paragraph(article, paragraph, words, &config.ez, subjects, sim_seed)?;
            let reference = experiment::synthetic_reference(article, paragraph, words, &paths)?;
            let aggregate = aggregate_statistical_subjects(words.len(), &paths)?;
            let candidates: Vec<_> = paths[..pool].iter().map(|p| p.fixations.clone()).collect();
            let prototype = prototype_scanpath(&candidates, &config.scasim)?;
            Ok((reference, aggregate, prototype, paths.swap_remove(prototype)))
        })
        .collect::<Result<Vec<_>, Failure>>()?;

    let mut words_csv = String::from(
        "article,paragraph,word,tfd_ms,ffd_ms,gd_ms,fixation_count,regression_in_count,regression_out_full_count,total_skip,expected_dwell_ms,dwell_time_pct\n",
    );
    let mut proto_csv = String::from("article,paragraph,subject,fixation,duration_ms,x_px,y_px,word\n");
    let mut references = Vec::new();
    for (reference, aggregate, subject, path) in per_paragraph {
        let (a, p) = (reference.article_id, reference.paragraph_id);
        for (i, w) in aggregate.words.iter().enumerate() {
            writeln!(
                words_csv,
                "{a},{p},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                i + 1,
                w.tfd_ms,
                w.ffd_ms,
                w.gd_ms,
                w.fixation_count,
                w.regression_in_count,
                w.regression_out_full_count,
                w.total_skip,
                w.expected_dwell_ms,
                w.dwell_time_pct
            )
            .expect("writing to a string");
        }
        for f in &path.fixations {
            let word = f.word_index.map(|w| w.to_string()).unwrap_or_default();
            writeln!(proto_csv, "{a},{p},{},{},{:.3},{:.3},{:.3},{word}", subject + 1, f.index, f.duration_ms, f.x_px, f.y_px)
                .expect("writing to a string");
        }
        references.push(reference);
    }
    out.json(REFERENCES_FILE, &references);
    out.add("synthetic_words.csv", words_csv);
    out.add("prototype_scanpaths.csv", proto_csv);
    out.inputs = reader.inputs;
    Ok(out)
}

pub fn featurize(config: &Config, input: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let trials = load_trials(&mut reader, "input", input, config)?;
    let feats = featurize_trials(&trials)?;
    let mut out = Outputs::default();
    let mut matrix = feature_names().join(",");
    matrix.push('\n');
    let mut index = String::from("row,participant,article,paragraph,reading,article_position,repeat_kind,reading_speed\n");
    for (row, f) in feats.iter().enumerate() {
        let cells: Vec<String> = f.features.as_slice().iter().map(|v| format!("{v:.9}")).collect();
        matrix.push_str(&cells.join(","));
        matrix.push('\n');
        writeln!(
            index,
            "{},{},{},{},{},{},{},{:.9}",
            row + 1,
            f.key.participant_id,
            f.key.article_id,
            f.key.paragraph_id,
            f.key.reading_index,
            f.article_position,
            f.repeat_kind.as_str(),
            f.reading_speed
        )
        .expect("writing to a string");
    }
    out.add("features.csv", matrix);
    out.add("trial_index.csv", index);
    out.json(FEATURIZED_FILE, &feats);
    out.inputs = reader.inputs;
    Ok(out)
}

pub fn split(config: &Config, master: u64, input: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let trials = load_trials(&mut reader, "input", input, config)?;
    let mut out = Outputs::default();
    let design = Design::from_trials(&trials)?;
    let options = SolveOptions {
        seed: stage_seed(&mut out, master, "split"),
        timeout: Some(Duration::from_secs_f64(config.split.timeout_secs)),
        require_fold_cycle: config.split.require_fold_cycle,
    };
    let assignment = solve_assignment(&design.problem, &options)?;
    let plan = build_folds(&design, &assignment, config.split.folds)?;
    let report = verify_split(&plan);
    if !report.all() {
        return Err(Failure::Data(format!("split plan failed verification: {report:?}")));
    }
    let mut groups = String::from("article,participant,repeat_kind\n");
    for (i, &article) in design.articles.iter().enumerate() {
        for j in assignment.group(i) {
            let kind = design.problem.repeat_kind(i, j).map(|k| k.as_str()).unwrap_or("none");
            writeln!(groups, "{article},{},{kind}", design.participants[j]).expect("writing to a string");
        }
    }
    let mut plan_csv = Vec::new();
    write_plan_csv(&plan, &mut plan_csv)?;
    out.json(PLAN_FILE, &plan);
    out.add("plan.csv", plan_csv);
    out.add("assignment.csv", groups);
    out.json("verification.json", &report);
    out.inputs = reader.inputs;
    Ok(out)
}

pub struct TrainArgs<'a> {
    pub features: &'a Path,
    pub plan: &'a Path,
    pub references: Option<&'a Path>,
    pub tasks: Option<Vec<String>>,
    pub models: Option<Vec<String>>,
}

pub fn train(config: &Config, master: u64, args: &TrainArgs<'_>) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let feats: Vec<FeaturizedTrial> = reader.read_json("features", args.features, FEATURIZED_FILE)?;
    let plan: SplitPlan = reader.read_json("plan", args.plan, PLAN_FILE)?;
    let references = args.references.map(|d| load_references(&mut reader, d)).transpose()?;
    let tasks = match &args.tasks {
        Some(t) => parse_list(t, Task::parse, "task")?,
        None => config.tasks()?,
    };
    let mut models = match &args.models {
        Some(m) => parse_list(m, ModelKind::parse, "model")?,
        None => config.models()?,
    };
    if references.is_none() {
        if args.models.as_ref().is_some_and(|_| models.contains(&ModelKind::GbtEz)) {
            return Err(Failure::Usage("model gbt_ez needs --references".into()));
        }
        models.retain(|&m| m != ModelKind::GbtEz);
    }

    let mut out = Outputs::default();
    let options = CvOptions {
        grid: config.train.grid.points(),
        pair_seed: stage_seed(&mut out, master, "pairs"),
    };
    out.option("tasks", tasks.iter().map(|t| t.as_str()).collect::<Vec<_>>().join(" "));
    out.option("models", models.iter().map(|m| m.as_str()).collect::<Vec<_>>().join(" "));

    let runs: Vec<(Task, ModelKind)> = tasks.iter().flat_map(|&t| models.iter().map(move |&m| (t, m))).collect();
    let outcomes = runs
        .par_iter()
        .map(|&(task, model)| run_cross_validation(&feats, &plan, task, model, &options, references.as_ref()))
        .collect::<Result<Vec<_>, _>>()?;

    let mut folds = String::from(
        "task,model,fold,learning_rate,n_estimators,max_depth,l1_alpha,pca_explained_variance,validation_accuracy,n_train,n_validation,n_test,test_reads_before_selection\n",
    );
    for o in &outcomes {
        for f in &o.folds {
            let hp = f
                .selected
                .map(|h| format!("{},{},{},{},{}", h.learning_rate, h.n_estimators, h.max_depth, h.l1_alpha, h.pca_explained_variance))
                .unwrap_or_else(|| ",,,,".into());
            writeln!(
                folds,
                "{},{},{},{hp},{:.6},{},{},{},{}",
                o.task, o.model, f.fold, f.validation_accuracy, f.n_train, f.n_validation, f.n_test, f.test_reads_before_selection
            )
            .expect("writing to a string");
        }
        out.json(&format!("cv_{}_{}.json", o.task, o.model), o);
        out.add(format!("predictions_{}_{}.csv", o.task, o.model), o.predictions_csv());
    }
    out.add("folds.csv", folds);
    out.inputs = reader.inputs;
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub task: Task,
    pub model: ModelKind,
    pub metrics: MetricsTable,
    pub positions: PositionSummary,
}

pub fn evaluate(config: &Config, master: u64, input: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let mut names: Vec<String> = std::fs::read_dir(input)
        .map_err(|e| Failure::Data(format!("{}: {e}", input.display())))?
        .filter_map(|e| e.ok())
        .map(|e| e.file_name().to_string_lossy().into_owned())
        .filter(|n| n.starts_with("cv_") && n.ends_with(".json"))
        .collect();
    names.sort();
    if names.is_empty() {
        return Err(Failure::Data(format!("{}: no cross-validation outcomes (cv_*.json)", input.display())));
    }
    let mut outcomes: Vec<CvOutcome> = names.iter().map(|n| reader.read_json("input", input, n)).collect::<Result<_, _>>()?;
    outcomes.sort_by_key(|o| (o.task, o.model));

    let mut out = Outputs::default();
    let resamples = config.evaluate.bootstrap_resamples;
    out.option("bootstrap_resamples", resamples);
    let mut evaluations = Vec::new();
    for o in &outcomes {
        let s = stage_seed(&mut out, master, &format!("evaluate/{}/{}", o.task, o.model));
        let metrics = o.metrics(resamples, s)?;
        let positions = o.positions(resamples, s);
        out.add(format!("metrics_{}_{}.csv", o.task, o.model), metrics.to_csv());
        out.add(format!("positions_{}_{}.csv", o.task, o.model), positions.to_csv());
        evaluations.push(Evaluation {
            task: o.task,
            model: o.model,
            metrics,
            positions,
        });
    }
    out.json(EVALUATION_FILE, &evaluations);
    out.inputs = reader.inputs;
    Ok(out)
}

pub fn compare_ez(config: &Config, master: u64, input: &Path, references: &Path) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let trials = load_trials(&mut reader, "input", input, config)?;
    let refs = load_references(&mut reader, references)?;
    let mut out = Outputs::default();
    let s = stage_seed(&mut out, master, "compare");
    let pairs = reading_pairs(&trials);
    let report = compare_synthetic_to_human(&pairs, &refs, config.evaluate.bootstrap_resamples, s)?;
    out.add("comparison.csv", report.to_csv());
    out.json(COMPARISON_FILE, &report);
    out.inputs = reader.inputs;
    Ok(out)
}

const REGIME_COLUMNS: [&str; 4] = ["new_item", "new_participant", "new_item_participant", "all"];

pub fn report(evaluation: &Path, comparison: Option<&Path>) -> Result<Outputs, Failure> {
    let mut reader = InputReader::new();
    let evaluations: Vec<Evaluation> = reader.read_json("evaluation", evaluation, EVALUATION_FILE)?;
    debug_assert_eq!(Regime::ALL.len() + 1, REGIME_COLUMNS.len());
    let mut out = Outputs::default();

    let mut csv = String::from("task,model,regime,n,accuracy,ci_low,ci_high\n");
    let mut md = String::from("| Task | Model | New item | New participant | New item & participant | All |\n|---|---|---|---|---|---|\n");
    let by_key: BTreeMap<(Task, ModelKind), &Evaluation> = evaluations.iter().map(|e| ((e.task, e.model), e)).collect();
    for task in [Task::Single, Task::Paired] {
        for model in ModelKind::ALL {
            let Some(e) = by_key.get(&(task, model)) else { continue };
            let mut cells = Vec::new();
            for regime in REGIME_COLUMNS {
                let row = e.metrics.row(regime);
                let acc = row.and_then(|r| r.get(reread_core::experiment::Metric::Accuracy));
                let n = row.map_or(0, |r| r.n);
                match acc {
                    Some(a) => {
                        writeln!(csv, "{task},{model},{regime},{n},{:.6},{:.6},{:.6}", a.value, a.ci_low, a.ci_high).expect("writing to a string");
                        cells.push(format!("{:.1} [{:.1}, {:.1}]", 100.0 * a.value, 100.0 * a.ci_low, 100.0 * a.ci_high));
                    }
                    None => {
                        writeln!(csv, "{task},{model},{regime},{n},,,").expect("writing to a string");
                        cells.push("n/a".into());
                    }
                }
            }
            writeln!(md, "| {task} | {model} | {} |", cells.join(" | ")).expect("writing to a string");
        }
    }
    out.add("accuracy.csv", csv);
    out.add("accuracy.md", md);

    for (grouping, pick) in [
        ("article_position", (|p: &PositionSummary| &p.by_position) as fn(&PositionSummary) -> &Vec<_>),
        ("first_reading_position", |p: &PositionSummary| &p.by_first_reading_position),
    ] {
        let mut csv = String::from("task,model,position,n,mean_proba,proba_ci_low,proba_ci_high,accuracy,accuracy_ci_low,accuracy_ci_high\n");
        for e in &evaluations {
            for r in pick(&e.positions) {
                writeln!(
                    csv,
                    "{},{},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    e.task, e.model, r.position, r.n, r.mean_proba.value, r.mean_proba.ci_low, r.mean_proba.ci_high, r.accuracy.value, r.accuracy.ci_low, r.accuracy.ci_high
                )
                .expect("writing to a string");
            }
        }
        out.add(format!("accuracy_by_{grouping}.csv"), csv);
    }

    if let Some(dir) = comparison {
        let report: experiment::ComparisonReport = reader.read_json("comparison", dir, COMPARISON_FILE)?;
        let mut md = String::from("| Measure | First − E-Z | Repeated − E-Z | d | p |\n|---|---|---|---|---|\n");
        for m in &report.measures {
            writeln!(
                md,
                "| {} | {:.3} [{:.3}, {:.3}] | {:.3} [{:.3}, {:.3}] | {:.3} | {:.4} |",
                m.measure, m.first.value, m.first.ci_low, m.first.ci_high, m.repeated.value, m.repeated.ci_low, m.repeated.ci_high, m.d, m.p_value
            )
            .expect("writing to a string");
        }
        out.add("simulation_gap.csv", report.to_csv());
        out.add("simulation_gap.md", md);
    }
    out.inputs = reader.inputs;
    Ok(out)
}
