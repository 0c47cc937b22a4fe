//! Property suites for every module, as plain functions so that both the
//! per-crate tests and the acceptance run can drive them. Each panics on the
//! first failing case.

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use reread_core::experiment::{build_paired_dataset, FeaturizedTrial};
use reread_core::ezreader::{self, EzParams};
use reread_core::features::{FeatureVector, DIM};
use reread_core::ingest::{
    generate_synthetic_corpus, normalized_word_index, parse_fixation_report, write_corpus, ColumnSchema, Fixation, Range, RepeatKind,
    SyntheticCorpusSpec, TrialKey, WordToken, FIXATION_REPORT_FILE, IA_REPORT_FILE,
};
use reread_core::learn::{train_gbt, Dataset, GbtHyperParams, Pca, Pipeline};
use reread_core::measures::{trial_global_measures, word_measures_for};
use reread_core::network::{network_features, SaccadeGraph};
use reread_core::scasim::{scasim_distance, substitution_cost, ScasimConfig};
use reread_core::split::{build_folds, solve_assignment, verify_split, SolveOptions};
use reread_core::wordprop::{fit_measure, ols};
use reread_core::seed;

use super::checks::{schedule_design, split_violation};
use super::oracles::graph_features;

/// Runs the named suite.
pub fn run(name: &str) {
    let (_, _, f) = SUITES.iter().find(|s| s.1 == name).unwrap_or_else(|| panic!("no suite {name}"));
    f();
}

/// `(module, property, runner)` for every suite below.
pub const SUITES: &[(&str, &str, fn())] = &[
    ("core_ingest", "written_corpus_reads_back_identically", written_corpus_reads_back_identically),
    ("core_ingest", "schedules_reread_the_right_articles", schedules_reread_the_right_articles),
    ("measures", "word_measure_invariants", word_measure_invariants),
    ("measures", "permuting_fixations_preserves_tfd", permuting_fixations_preserves_tfd),
    ("wordprop_regression", "residuals_orthogonal_to_design", residuals_orthogonal_to_design),
    ("wordprop_regression", "slopes_invariant_to_affine_rescaling", slopes_invariant_to_affine_rescaling),
    ("saccade_network", "relabeling_invariance", relabeling_invariance),
    ("saccade_network", "adding_edge_never_lowers_density", adding_edge_never_lowers_density),
    ("saccade_network", "bridges_match_removal_definition", bridges_match_removal_definition),
    ("ezreader", "same_seed_same_scanpath", same_seed_same_scanpath),
    ("ezreader", "aggregate_invariants", aggregate_invariants),
    ("scasim", "metric_properties", metric_properties),
    ("scasim", "far_substitution_approaches_gap_pair", far_substitution_approaches_gap_pair),
    ("split_solver", "solved_schedules_pass_recheck", solved_schedules_pass_recheck),
    ("learn", "probabilities_and_loss", probabilities_and_loss),
    ("learn", "pca_components_orthonormal", pca_components_orthonormal),
    ("learn", "pipeline_invariant_to_affine_rescaling", pipeline_invariant_to_affine_rescaling),
    ("experiment", "paired_order_keeps_correctness", paired_order_keeps_correctness),
];

fn tiny_spec(participants: usize, seed_value: u64) -> SyntheticCorpusSpec {
    SyntheticCorpusSpec {
        n_participants: participants,
        rng_seed: seed_value,
        paragraphs_per_article: Range { min: 1, max: 2 },
        words_per_paragraph: Range { min: 3, max: 12 },
        ..SyntheticCorpusSpec::default()
    }
}

fn random_words(n: usize, seed_value: u64) -> Vec<WordToken> {
    let mut rng = seed::rng(seed_value);
    (1..=n)
        .map(|i| WordToken {
            index_in_paragraph: i,
            text: "x".into(),
            length: rng.random_range(2..=12),
            log2_frequency: rng.random_range(8.0..22.0),
            surprisal: rng.random_range(1.0..20.0),
            ia_left: 0.0,
            ia_top: 0.0,
            ia_right: 1.0,
            ia_bottom: 1.0,
            start_of_line: false,
            end_of_line: false,
            normalized_word_index: normalized_word_index(i, n),
        })
        .collect()
}

fn fixation(index: u32, word: Option<usize>, duration: f64, x: f64, y: f64) -> Fixation {
    Fixation {
        index,
        duration_ms: duration,
        x_px: x,
        y_px: y,
        word_index: word,
        next_word_index: None,
    }
}

fn arb_scanpath() -> impl Strategy<Value = (usize, Vec<Fixation>)> {
    (1usize..12).prop_flat_map(|n| {
        let fix = (prop::option::weighted(0.9, 1..=n), 20.0f64..600.0);
        (Just(n), prop::collection::vec(fix, 0..40)).prop_map(|(n, spec)| {
            let path = spec.iter().enumerate().map(|(i, &(w, d))| fixation(i as u32 + 1, w, d, 0.0, 0.0)).collect();
            (n, path)
        })
    })
}

fn arb_graph() -> impl Strategy<Value = SaccadeGraph> {
    (1usize..=8).prop_flat_map(|n| prop::collection::vec((0..n, 0..n), 0..(n * n)).prop_map(move |e| SaccadeGraph::from_edges(n, e)))
}

fn arb_path() -> impl Strategy<Value = Vec<Fixation>> {
    prop::collection::vec((0.0f64..2560.0, 0.0f64..1440.0, 50.0f64..500.0), 0..6)
        .prop_map(|v| v.into_iter().map(|(x, y, d)| fixation(1, None, d, x, y)).collect())
}

fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

fn arb_dataset() -> impl Strategy<Value = Dataset> {
    (10usize..40, 1usize..4, any::<u64>()).prop_map(|(n, d, s)| {
        let mut rng = seed::rng(s);
        let x: Vec<Vec<f64>> = (0..n).map(|_| (0..d).map(|_| normal(&mut rng)).collect()).collect();
        let mut y: Vec<u8> = x.iter().map(|r| u8::from(r[0] + 0.5 * normal(&mut rng) > 0.0)).collect();
        y[0] = 0;
        y[1] = 1;
        Dataset::new(x, y).unwrap()
    })
}

fn draw(rng: &mut impl Rng) -> Vec<f64> {
    (0..DIM).map(|_| normal(rng)).collect()
}

fn featurized(participant: usize, paragraph: u32, reading: u8, features: Vec<f64>) -> FeaturizedTrial {
    FeaturizedTrial {
        key: TrialKey {
            participant_id: format!("p{participant:03}"),
            article_id: 1,
            paragraph_id: paragraph,
            reading_index: reading,
        },
        article_position: if reading == 1 { 1 } else { 11 },
        repeat_kind: if reading == 1 { RepeatKind::None } else { RepeatKind::Consecutive },
        features: FeatureVector(features),
        reading_speed: 3.0,
    }
}

proptest! {
    #![proptest_config(ProptestConfig {
        cases: 100,
        // The suites also run from another crate's test target, where the
        // source-relative regression files cannot be located.
        failure_persistence: None,
        ..ProptestConfig::default()
    })]

    fn written_corpus_reads_back_identically(participants in 1usize..3, seed_value in any::<u64>()) {
        let trials = generate_synthetic_corpus(&tiny_spec(participants, seed_value)).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let schema = ColumnSchema::default();
        write_corpus(&trials, dir.path(), &schema).unwrap();
        let back = parse_fixation_report(&dir.path().join(FIXATION_REPORT_FILE), &dir.path().join(IA_REPORT_FILE), &schema).unwrap();
        prop_assert_eq!(back, trials);
    }

    fn schedules_reread_the_right_articles(seed_value in any::<u64>()) {
        let trials = generate_synthetic_corpus(&tiny_spec(2, seed_value)).unwrap();
        let mut by_position: BTreeMap<(&str, u8), u32> = BTreeMap::new();
        for t in &trials {
            by_position.insert((t.participant_id.as_str(), t.article_position), t.article_id);
        }
        for p in ["p001", "p002"] {
            prop_assert_eq!(by_position[&(p, 11)], by_position[&(p, 10)]);
            let delayed = by_position[&(p, 12)];
            prop_assert!((1..=9).any(|k| by_position[&(p, k)] == delayed));
        }
    }

    fn word_measure_invariants((n, sp) in arb_scanpath()) {
        let total: f64 = sp.iter().map(|f| f.duration_ms).sum::<f64>() + 25.0 * sp.len() as f64;
        let m = word_measures_for(n, &sp, total);
        let mut pct = 0.0;
        for w in &m {
            prop_assert!(w.gd_ms <= w.tfd_ms + 1e-9);
            prop_assert!(w.ffd_ms <= w.gd_ms + 1e-9);
            prop_assert!(w.total_skip <= 1);
            prop_assert_eq!(w.total_skip == 1, w.fixation_count == 0);
            if w.total_skip == 1 {
                prop_assert!(w.tfd_ms == 0.0 && w.ffd_ms == 0.0 && w.gd_ms == 0.0);
            }
            prop_assert!((0.0..=1.0).contains(&w.dwell_time_pct));
            pct += w.dwell_time_pct;
        }
        prop_assert!(pct <= 1.0001);
        let g = trial_global_measures(&m, total).unwrap();
        prop_assert!((0.0..=1.0).contains(&g.skip_rate));
        prop_assert!(g.regression_rate >= 0.0);
        prop_assert!((0.0..=1.0).contains(&g.num_words_tfd_gt_gd_frac));
    }

    fn permuting_fixations_preserves_tfd((n, sp) in arb_scanpath(), seed_value in any::<u64>()) {
        let mut shuffled = sp.clone();
        shuffled.shuffle(&mut seed::rng(seed_value));
        let a = word_measures_for(n, &sp, 1e6);
        let b = word_measures_for(n, &shuffled, 1e6);
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.tfd_ms - y.tfd_ms).abs() < 1e-9);
            prop_assert_eq!(x.fixation_count, y.fixation_count);
        }
    }

    fn residuals_orthogonal_to_design(seed_value in any::<u64>(), rows in 8usize..60, cols in 1usize..6) {
        let mut rng = seed::rng(seed_value);
        let design = DMatrix::from_fn(rows, cols, |_, _| rng.random_range(-3.0..3.0));
        let y = DVector::from_fn(rows, |_, _| rng.random_range(-10.0..10.0));
        let fit = ols(&design, &y).unwrap();
        let rnorm = fit.residuals.norm().max(1e-300);
        for c in 0..cols {
            let col = design.column(c);
            let dot = col.dot(&fit.residuals) / (col.norm() * rnorm);
            prop_assert!(dot.abs() < 1e-8, "column {c}: {dot}");
        }
    }

    fn slopes_invariant_to_affine_rescaling(seed_value in any::<u64>(), scale in 0.1f64..50.0, shift in -100.0f64..100.0) {
        let words = random_words(40, seed_value);
        let mut rng = seed::rng(seed_value ^ 0xabc);
        let y: Vec<f64> = words
            .iter()
            .map(|w| 5.0 * w.surprisal + 3.0 * w.log2_frequency + rng.random_range(0.0..20.0))
            .collect();
        let mut rescaled = words.clone();
        for w in &mut rescaled {
            w.surprisal = w.surprisal * scale + shift;
            w.log2_frequency = w.log2_frequency * scale - shift;
        }
        let a = fit_measure(&words, &y, true).unwrap();
        let b = fit_measure(&rescaled, &y, true).unwrap();
        for (x, z) in a.iter().zip(&b) {
            prop_assert!((x - z).abs() < 1e-6, "{x} vs {z}");
        }
    }

    fn relabeling_invariance(g in arb_graph(), seed_value in any::<u64>()) {
        let n = g.n_nodes();
        let mut perm: Vec<usize> = (0..n).collect();
        perm.shuffle(&mut seed::rng(seed_value));
        let h = SaccadeGraph::from_edges(n, g.directed_edges().iter().map(|&(u, v)| (perm[u], perm[v])));
        for (x, y) in network_features(&g).iter().zip(&network_features(&h)) {
            prop_assert!((x - y).abs() < 1e-9);
        }
    }

    fn adding_edge_never_lowers_density(g in arb_graph(), u in 0usize..8, v in 0usize..8) {
        let n = g.n_nodes();
        let mut edges: Vec<_> = g.directed_edges().iter().copied().collect();
        edges.push((u % n, v % n));
        let a = network_features(&g);
        let b = network_features(&SaccadeGraph::from_edges(n, edges));
        prop_assert!(b[0] >= a[0]);
        prop_assert!(b[1] >= a[1]);
    }

    fn bridges_match_removal_definition(g in arb_graph()) {
        let edges: Vec<_> = g.directed_edges().iter().copied().collect();
        let want = graph_features(g.n_nodes(), &edges)[6];
        prop_assert_eq!(network_features(&g)[6], want);
    }

    fn same_seed_same_scanpath(n in 1usize..15, words_seed in any::<u64>(), run_seed in any::<u64>()) {
        let words = random_words(n, words_seed);
        let params = EzParams::default();
        let a = ezreader::simulate_scanpath(&words, &params, run_seed).unwrap();
        let b = ezreader::simulate_scanpath(&words, &params, run_seed).unwrap();
        prop_assert_eq!(&a, &b);
        for f in &a.fixations {
            prop_assert!(f.duration_ms > 0.0);
            prop_assert!(f.word_index.is_none_or(|w| (1..=n).contains(&w)));
        }
    }

    fn aggregate_invariants(n in 1usize..15, words_seed in any::<u64>(), run_seed in any::<u64>()) {
        let words = random_words(n, words_seed);
        let runs = ezreader::simulate_statistical_subjects(&words, &EzParams::default(), 20, run_seed).unwrap();
        let agg = ezreader::aggregate_statistical_subjects(n, &runs).unwrap();
        let mut sum = 0.0;
        for w in &agg.words {
            prop_assert!((0.0..=1.0).contains(&w.total_skip));
            prop_assert!(w.expected_dwell_ms <= w.tfd_ms);
            sum += w.expected_dwell_ms;
        }
        prop_assert_eq!(agg.paragraph_rt_ms, sum);
    }

    fn metric_properties(a in arb_path(), b in arb_path()) {
        let c = ScasimConfig::default();
        let dab = scasim_distance(&a, &b, &c);
        prop_assert!(dab >= 0.0);
        prop_assert!((dab - scasim_distance(&b, &a, &c)).abs() < 1e-9);
        prop_assert!(scasim_distance(&a, &a, &c).abs() < 1e-12);
        let bound: f64 = a.iter().chain(&b).map(|f| f.duration_ms).sum();
        prop_assert!(dab <= bound + 1e-9);
    }

    fn far_substitution_approaches_gap_pair(d1 in 50.0f64..500.0, d2 in 50.0f64..500.0) {
        let far = substitution_cost(d1, d2, (0.0, 0.0), (1e4, 0.0), 0.83);
        prop_assert!((far - (d1 + d2)).abs() < 1e-6);
    }

    fn solved_schedules_pass_recheck(schedule_seed in any::<u64>(), solver_seed in any::<u64>()) {
        let design = schedule_design(60, schedule_seed);
        let options = SolveOptions { seed: solver_seed, ..SolveOptions::default() };
        let assignment = solve_assignment(&design.problem, &options).unwrap();
        let plan = build_folds(&design, &assignment, 10).unwrap();
        let violation = split_violation(&design, &assignment, &plan);
        prop_assert!(violation.is_none(), "{violation:?}");
        prop_assert!(verify_split(&plan).all());
    }

    fn probabilities_and_loss(data in arb_dataset(), lr in prop::sample::select(vec![0.3, 0.1, 0.01])) {
        let m = train_gbt(&data, &GbtHyperParams::new(lr, 20, 3, 0.0)).unwrap();
        for p in m.predict_proba(&data.x) {
            prop_assert!(p > 0.0 && p < 1.0);
        }
        let mut prev = f64::INFINITY;
        for &l in &m.train_loss {
            prop_assert!(l <= prev + 1e-12, "loss rose from {prev} to {l}");
            prev = l;
        }
    }

    fn pca_components_orthonormal(data in arb_dataset(), keep in prop::sample::select(vec![0.8, 0.9, 1.0])) {
        let p = Pca::fit(&data.x, keep).unwrap();
        for (i, a) in p.components.iter().enumerate() {
            for (j, b) in p.components.iter().enumerate() {
                let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!((dot - want).abs() < 1e-8);
            }
        }
    }

    fn pipeline_invariant_to_affine_rescaling(
        data in arb_dataset(),
        scale in prop::sample::select(vec![0.5, 2.0, 10.0, 1000.0]),
        shift in -50.0f64..50.0,
        column in 0usize..3,
    ) {
        let column = column % data.n_features();
        let hp = GbtHyperParams::new(0.3, 10, 3, 0.1);
        let base = Pipeline::fit(&data, &hp).unwrap().predict_proba(&data.x);
        let mut moved = data.clone();
        for r in &mut moved.x {
            r[column] = r[column] * scale + shift;
        }
        let other = Pipeline::fit(&moved, &hp).unwrap().predict_proba(&moved.x);
        for (a, b) in base.iter().zip(&other) {
            prop_assert!((a - b).abs() < 1e-6, "{a} vs {b}");
        }
    }

    fn paired_order_keeps_correctness(n_pairs in 1usize..30, data_seed in any::<u64>(), s1 in any::<u64>(), s2 in any::<u64>()) {
        let mut rng = seed::rng(data_seed);
        let trials: Vec<(FeaturizedTrial, FeaturizedTrial)> = (0..n_pairs)
            .map(|i| (featurized(i, 1, 1, draw(&mut rng)), featurized(i, 1, 2, draw(&mut rng))))
            .collect();
        let pairs: Vec<_> = trials.iter().map(|(a, b)| (a, b)).collect();
        let w = draw(&mut rng);
        let a = build_paired_dataset(&pairs, s1).unwrap();
        let b = build_paired_dataset(&pairs, s2).unwrap();
        // Any model odd in the difference block.
        let correct = |x: &[f64], y: u8| {
            let score: f64 = x[DIM..].iter().zip(&w).map(|(d, w)| d * w).sum();
            u8::from(score > 0.0) == y
        };
        for i in 0..n_pairs {
            prop_assert_eq!(correct(&a.x[i], a.y[i]), correct(&b.x[i], b.y[i]));
            if a.y[i] != b.y[i] {
                let neg: Vec<f64> = a.x[i][DIM..].iter().map(|v| -v).collect();
                prop_assert_eq!(&b.x[i][DIM..], &neg[..]);
            } else {
                prop_assert_eq!(&a.x[i], &b.x[i]);
            }
        }
    }
}
