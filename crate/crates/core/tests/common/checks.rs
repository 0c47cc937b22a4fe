//! Library results compared against the oracles on random inputs. Each
//! check returns the largest deviation seen, or a description of the first
//! mismatch.

use std::collections::BTreeSet;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use reread_core::ingest::{onestop_schedule, Fixation, RepeatKind};
use reread_core::learn::gbt::{Node, LAMBDA, MIN_CHILD_WEIGHT};
use reread_core::learn::{train_gbt, Dataset, GbtHyperParams};
use reread_core::network::{network_features, SaccadeGraph};
use reread_core::scasim::{scasim_distance, ScasimConfig};
use reread_core::split::{Assignment, AssignmentProblem, Design, Partition, Regime, SplitPlan};
use reread_core::{seed, wordprop};

use super::oracles::{brute_force_stump, gauss_solve, graph_features, scasim_exhaustive, Fix};

/// Random digraphs with 1 to 8 nodes and varying density.
pub fn network_max_error(cases: usize, seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let n = rng.random_range(1..=8usize);
        let p: f64 = rng.random_range(0.05..0.7);
        let edges: Vec<(usize, usize)> = (0..n)
            .flat_map(|a| (0..n).map(move |b| (a, b)))
            .filter(|&(a, b)| a != b)
            .filter(|_| rng.random::<f64>() < p)
            .collect();
        let got = network_features(&SaccadeGraph::from_edges(n, edges.iter().copied()));
        let want = graph_features(n, &edges);
        for (g, w) in got.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
    }
    worst
}

fn random_path(rng: &mut impl Rng, max_len: usize) -> Vec<Fix> {
    let len = rng.random_range(0..=max_len);
    (0..len)
        .map(|_| Fix {
            duration: rng.random_range(50.0..600.0),
            x: rng.random_range(100.0..2460.0),
            y: rng.random_range(100.0..1340.0),
        })
        .collect()
}

fn to_fixations(path: &[Fix]) -> Vec<Fixation> {
    path.iter()
        .enumerate()
        .map(|(i, f)| Fixation {
            index: i as u32 + 1,
            duration_ms: f.duration,
            x_px: f.x,
            y_px: f.y,
            word_index: None,
            next_word_index: None,
        })
        .collect()
}

/// Random scanpath pairs of at most four fixations each.
pub fn scasim_max_error(cases: usize, seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let config = ScasimConfig::default();
    let mut worst: f64 = 0.0;
    for _ in 0..cases {
        let a = random_path(&mut rng, 4);
        let b = random_path(&mut rng, 4);
        let got = scasim_distance(&to_fixations(&a), &to_fixations(&b), &config);
        let want = scasim_exhaustive(&a, &b, config.modulator);
        worst = worst.max((got - want).abs());
    }
    worst
}

/// Square full-rank systems of size 2 to 8, solved exactly by elimination.
pub fn ols_max_error(cases: usize, seed_value: u64) -> f64 {
    let mut rng = seed::rng(seed_value);
    let mut worst: f64 = 0.0;
    let mut done = 0;
    while done < cases {
        let n = rng.random_range(2..=8usize);
        let a: Vec<Vec<f64>> = (0..n).map(|_| (0..n).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
        let b: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        let design = DMatrix::from_fn(n, n, |r, c| a[r][c]);
        let Ok(fit) = wordprop::ols(&design, &DVector::from_vec(b.clone())) else {
            continue;
        };
        // Near-singular draws say nothing about the solver; 1e8 on XᵀX
        // keeps the elimination oracle itself accurate to ~1e-12.
        if fit.condition_number > 1e8 {
            continue;
        }
        let want = gauss_solve(&a, &b);
        for (g, w) in fit.coefficients.iter().zip(&want) {
            worst = worst.max((g - w).abs());
        }
        done += 1;
    }
    worst
}

/// One-feature data, single depth-1 tree; the root split must be the
/// exhaustive best.
pub fn stump_mismatch(cases: usize, seed_value: u64) -> Option<String> {
    let mut rng = seed::rng(seed_value);
    for case in 0..cases {
        let n = rng.random_range(8..40);
        let x: Vec<f64> = (0..n).map(|_| (rng.random_range(0..25) as f64) / 4.0).collect();
        let mut y: Vec<u8> = x.iter().map(|&v| u8::from(v + rng.random_range(-1.5..1.5) > 3.0)).collect();
        y[0] = 0;
        y[1] = 1;
        let alpha = [0.0, 0.1, 1.0][case % 3];
        let data = Dataset::new(x.iter().map(|&v| vec![v]).collect(), y.clone()).unwrap();
        let model = train_gbt(&data, &GbtHyperParams::new(0.3, 1, 1, alpha)).unwrap();
        match (brute_force_stump(&x, &y, alpha, LAMBDA, MIN_CHILD_WEIGHT), &model.trees[0].nodes[0]) {
            (Some((t, _)), Node::Split { threshold, .. }) if (t - threshold).abs() < 1e-12 => {}
            (None, Node::Leaf { .. }) => {}
            (oracle, root) => return Some(format!("case {case}: oracle {oracle:?}, model root {root:?}")),
        }
    }
    None
}

/// A OneStop-shaped rereading design: 10 articles, `n` participants.
pub fn schedule_design(n: usize, seed_value: u64) -> Design {
    let mut rng = seed::rng(seed_value);
    let schedules = onestop_schedule(n, &mut rng);
    let mut p = vec![vec![false; n]; 10];
    let mut q = vec![vec![false; n]; 10];
    for (j, s) in schedules.iter().enumerate() {
        p[s.consecutive_article() as usize - 1][j] = true;
        q[s.nonconsecutive_article() as usize - 1][j] = true;
    }
    Design {
        articles: (1..=10).collect(),
        participants: (0..n).map(|j| format!("p{j:03}")).collect(),
        problem: AssignmentProblem::new(p, q).unwrap(),
    }
}

/// Recomputes the four assignment constraints and the fold properties from
/// scratch; returns the first violation found.
pub fn split_violation(design: &Design, assignment: &Assignment, plan: &SplitPlan) -> Option<String> {
    let pr = &design.problem;
    let (m, n) = (pr.m(), pr.n());
    let b = assignment.matrix(m);
    for (j, row) in b.iter().enumerate() {
        if row.iter().map(|&v| v as usize).sum::<usize>() != 1 {
            return Some(format!("participant {j} is not assigned to exactly one article"));
        }
    }
    for i in 0..m {
        let cons: usize = (0..n).filter(|&j| pr.consecutive(i, j) && b[j][i] == 1).count();
        let non: usize = (0..n).filter(|&j| pr.nonconsecutive(i, j) && b[j][i] == 1).count();
        if cons != 3 || non != 3 {
            return Some(format!("article {i}: {cons} consecutive and {non} nonconsecutive rereaders"));
        }
        for k in (0..m).filter(|&k| k != i) {
            let shared = (0..n).filter(|&j| b[j][i] == 1 && (pr.consecutive(k, j) || pr.nonconsecutive(k, j))).count();
            if shared > 1 {
                return Some(format!("group of article {i} holds {shared} rereaders of article {k}"));
            }
        }
    }

    let all_pairs: BTreeSet<(u32, &str)> = (0..m)
        .flat_map(|i| (0..n).filter(move |&j| pr.rereads(i, j)).map(move |j| (design.articles[i], design.participants[j].as_str())))
        .collect();
    let group = |article: u32| -> BTreeSet<&str> {
        let i = design.articles.iter().position(|&a| a == article).unwrap();
        assignment.group(i).into_iter().map(|j| design.participants[j].as_str()).collect()
    };
    for fold in &plan.folds {
        let seen: Vec<(u32, &str)> = fold.pairs.iter().map(|p| (p.article, p.participant.as_str())).collect();
        let unique: BTreeSet<(u32, &str)> = seen.iter().copied().collect();
        if unique.len() != seen.len() || unique != all_pairs {
            return Some(format!("fold {}: pairs do not partition the design", fold.index));
        }
        for (partition, article, want) in [(Partition::Test, fold.test_article, [6, 6, 6]), (Partition::Validation, fold.validation_article, [5, 5, 6])] {
            let held = group(article);
            let mut counts = [[0usize; 2]; 3];
            for p in fold.pairs_in(partition) {
                let expected = match (p.article == article, held.contains(p.participant.as_str())) {
                    (true, false) => Regime::NewItem,
                    (false, true) => Regime::NewParticipant,
                    (true, true) => Regime::NewItemParticipant,
                    (false, false) => return Some(format!("fold {}: {partition:?} pair shares nothing with the held-out set", fold.index)),
                };
                if p.regime != Some(expected) {
                    return Some(format!("fold {}: {partition:?} pair labelled {:?}, expected {expected:?}", fold.index, p.regime));
                }
                let r = Regime::ALL.iter().position(|&x| x == expected).unwrap();
                counts[r][usize::from(p.repeat_kind == RepeatKind::Nonconsecutive)] += 1;
            }
            let totals = counts.map(|c| c[0] + c[1]);
            if totals != want {
                return Some(format!("fold {}: {partition:?} regime counts {totals:?}, expected {want:?}", fold.index));
            }
            if partition == Partition::Test && counts.iter().any(|c| c != &[3, 3]) {
                return Some(format!("fold {}: test consecutive/nonconsecutive split {counts:?}", fold.index));
            }
            for p in fold.pairs_in(Partition::Train) {
                if p.article == article || held.contains(p.participant.as_str()) {
                    return Some(format!("fold {}: training pair ({}, {}) leaks {partition:?}", fold.index, p.article, p.participant));
                }
            }
        }
    }
    None
}
