//! Dataset assembly, cross-validated training and evaluation.

pub mod compare;
pub mod cv;
pub mod eval;

pub use compare::{compare_synthetic_to_human, ComparisonReport, MeasureComparison};
pub use cv::{run_cross_validation, CvOptions, CvOutcome, ModelKind, Task};
pub use eval::{evaluate, group_predictions_by_position, unaggregate_paired, Metric, MetricsTable, PositionSummary};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::ezreader::{self, ComparisonMeasures, EzParams};
use crate::features::{self, FeatureVector};
use crate::ingest::{RepeatKind, Trial, TrialKey, WordToken};
use crate::learn::Dataset;
use crate::{measures, seed, Error, Result};

/// A trial reduced to what the classifiers and reports need.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeaturizedTrial {
    pub key: TrialKey,
    pub article_position: u8,
    pub repeat_kind: RepeatKind,
    pub features: FeatureVector,
    /// Words per second.
    pub reading_speed: f64,
}

impl FeaturizedTrial {
    pub fn label(&self) -> u8 {
        u8::from(self.key.reading_index == 2)
    }

    pub fn paragraph(&self) -> (u32, u32) {
        (self.key.article_id, self.key.paragraph_id)
    }
}

pub fn featurize_trials(trials: &[Trial]) -> Result<Vec<FeaturizedTrial>> {
    trials
        .par_iter()
        .map(|t| {
            Ok(FeaturizedTrial {
                key: t.key(),
                article_position: t.article_position,
                repeat_kind: t.repeat_kind,
                features: features::featurize(t)?.vector,
                reading_speed: measures::reading_speed(t)?,
            })
        })
        .collect()
}

/// Simulated first-reading reference for one paragraph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticReference {
    pub article_id: u32,
    pub paragraph_id: u32,
    /// Mean feature vector over the simulated readers.
    pub features: FeatureVector,
    pub comparison: ComparisonMeasures,
}

pub type SyntheticReferences = BTreeMap<(u32, u32), SyntheticReference>;

/// One distinct text per `(article, paragraph)`, taken from the first trial
/// that shows it.
pub fn paragraph_texts(trials: &[Trial]) -> BTreeMap<(u32, u32), &[WordToken]> {
    let mut out = BTreeMap::new();
    for t in trials {
        out.entry((t.article_id, t.paragraph_id)).or_insert(t.words.as_slice());
    }
    out
}

/// Simulates `n_subjects` readers of one paragraph. The seed depends only
/// on the paragraph, so the result does not depend on which other
/// paragraphs are present.
pub fn simulate_paragraph(
    article: u32,
    paragraph: u32,
    words: &[WordToken],
    params: &EzParams,
    n_subjects: usize,
    master_seed: u64,
) -> Result<Vec<ezreader::SimulatedScanpath>> {
    let s = seed::derive(master_seed, &format!("ezreader/{article}/{paragraph}"));
    ezreader::simulate_statistical_subjects(words, params, n_subjects, s)
}

pub fn synthetic_reference(article: u32, paragraph: u32, words: &[WordToken], paths: &[ezreader::SimulatedScanpath]) -> Result<SyntheticReference> {
    Ok(SyntheticReference {
        article_id: article,
        paragraph_id: paragraph,
        features: ezreader::synthetic_global_features(paths, words)?,
        comparison: ezreader::aggregate_statistical_subjects(words.len(), paths)?.comparison_measures()?,
    })
}

/// Simulated references for every paragraph in `trials`.
pub fn build_synthetic_references(
    trials: &[Trial],
    params: &EzParams,
    n_subjects: usize,
    master_seed: u64,
) -> Result<SyntheticReferences> {
    let mut out = BTreeMap::new();
    for ((article, paragraph), words) in paragraph_texts(trials) {
        let paths = simulate_paragraph(article, paragraph, words, params, n_subjects, master_seed)?;
        out.insert((article, paragraph), synthetic_reference(article, paragraph, words, &paths)?);
    }
    Ok(out)
}

/// Human features, or with a reference `e_S ⊕ (e_M − e_S)` where `e_S` are
/// the human and `e_M` the simulated features.
fn trial_row(trial: &FeaturizedTrial, augment: Option<&SyntheticReferences>) -> Result<Vec<f64>> {
    let human = trial.features.as_slice();
    let Some(refs) = augment else {
        return Ok(human.to_vec());
    };
    let (article, paragraph) = trial.paragraph();
    let synthetic = refs
        .get(&(article, paragraph))
        .ok_or_else(|| Error::Data(format!("no synthetic reference for article {article} paragraph {paragraph}")))?;
    let mut row = human.to_vec();
    row.extend(synthetic.features.as_slice().iter().zip(human).map(|(m, s)| m - s));
    Ok(row)
}

/// One row per trial; label 1 for a repeated reading.
pub fn build_single_dataset(trials: &[&FeaturizedTrial], augment: Option<&SyntheticReferences>) -> Result<Dataset> {
    let x = trials.iter().map(|t| trial_row(t, augment)).collect::<Result<_>>()?;
    let y = trials.iter().map(|t| t.label()).collect();
    Dataset::new(x, y)
}

/// A first and a repeated reading of one paragraph by one participant.
pub type TrialPair<'a> = (&'a FeaturizedTrial, &'a FeaturizedTrial);

/// Pairs of trials from the same participant and paragraph.
pub fn pair_trials<'a>(trials: &[&'a FeaturizedTrial]) -> Vec<TrialPair<'a>> {
    let mut slots: BTreeMap<(&str, u32, u32), [Option<&FeaturizedTrial>; 2]> = BTreeMap::new();
    for t in trials {
        let slot = slots.entry((t.key.participant_id.as_str(), t.key.article_id, t.key.paragraph_id)).or_default();
        match t.key.reading_index {
            1 => slot[0] = Some(t),
            2 => slot[1] = Some(t),
            _ => {}
        }
    }
    slots.into_values().filter_map(|[a, b]| Some((a?, b?))).collect()
}

/// Whether the repeated reading is shown second. Fixed per pair by the seed,
/// so a pair keeps its order whichever partition it lands in.
pub fn repeated_second(pair: TrialPair<'_>, rng_seed: u64) -> bool {
    let k = &pair.0.key;
    let s = seed::derive(rng_seed, &format!("pair/{}/{}/{}", k.participant_id, k.article_id, k.paragraph_id));
    s & 1 == 1
}

/// Orders a pair as `(A, B)`; label 1 when `B` is the repeated reading.
pub fn order_pair<'a>(pair: TrialPair<'a>, rng_seed: u64) -> (&'a FeaturizedTrial, &'a FeaturizedTrial, u8) {
    if repeated_second(pair, rng_seed) {
        (pair.0, pair.1, 1)
    } else {
        (pair.1, pair.0, 0)
    }
}

fn check_pair(pair: TrialPair<'_>) -> Result<()> {
    let (a, b) = (&pair.0.key, &pair.1.key);
    if a.participant_id != b.participant_id || a.article_id != b.article_id || a.paragraph_id != b.paragraph_id {
        return Err(Error::Data(format!(
            "pair mixes ({}, {}, {}) with ({}, {}, {})",
            a.participant_id, a.article_id, a.paragraph_id, b.participant_id, b.article_id, b.paragraph_id
        )));
    }
    if a.reading_index != 1 || b.reading_index != 2 {
        return Err(Error::Data(format!(
            "pair for ({}, {}, {}) must hold a first and a repeated reading",
            a.participant_id, a.article_id, a.paragraph_id
        )));
    }
    Ok(())
}

/// Rows `e_A ⊕ (e_B − e_A)` with a seeded order per pair.
pub fn build_paired_dataset(pairs: &[TrialPair<'_>], rng_seed: u64) -> Result<Dataset> {
    build_paired_dataset_with(pairs, None, rng_seed)
}

/// As [`build_paired_dataset`], with each trial optionally augmented by its
/// paragraph's simulated reference first.
pub fn build_paired_dataset_with(pairs: &[TrialPair<'_>], augment: Option<&SyntheticReferences>, rng_seed: u64) -> Result<Dataset> {
    let mut x = Vec::with_capacity(pairs.len());
    let mut y = Vec::with_capacity(pairs.len());
    for &pair in pairs {
        check_pair(pair)?;
        let (a, b, label) = order_pair(pair, rng_seed);
        x.push(paired_row(&trial_row(a, augment)?, &trial_row(b, augment)?));
        y.push(label);
    }
    Dataset::new(x, y)
}

pub fn paired_row(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut row = a.to_vec();
    row.extend(b.iter().zip(a).map(|(b, a)| b - a));
    row
}
