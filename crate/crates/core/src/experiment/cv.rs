//! Cross-validated training and testing over a split plan.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

use super::eval::{self, MetricsTable, PositionSummary, PositionedPrediction};
use super::{build_paired_dataset_with, build_single_dataset, order_pair, pair_trials, FeaturizedTrial, SyntheticReferences, TrialPair};
use crate::ingest::TrialKey;
use crate::learn::{accuracy, grid_search, Dataset, GbtHyperParams, MajorityClassifier, ReadingSpeedClassifier};
use crate::split::{Partition, Regime, SplitPlan};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Task {
    /// Is this reading a first or a repeated one?
    Single,
    /// Which of two readings of the same paragraph came second?
    Paired,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Majority,
    ReadingSpeed,
    Gbt,
    /// Boosted trees on features augmented with a simulated reference.
    GbtEz,
}

impl ModelKind {
    pub const ALL: [ModelKind; 4] = [ModelKind::Majority, ModelKind::ReadingSpeed, ModelKind::Gbt, ModelKind::GbtEz];

    pub fn as_str(self) -> &'static str {
        match self {
            ModelKind::Majority => "majority",
            ModelKind::ReadingSpeed => "reading_speed",
            ModelKind::Gbt => "gbt",
            ModelKind::GbtEz => "gbt_ez",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Single => "single",
            Task::Paired => "paired",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        [Task::Single, Task::Paired].into_iter().find(|t| t.as_str() == s)
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl fmt::Display for Task {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOptions {
    pub grid: Vec<GbtHyperParams>,
    /// Fixes the presentation order of paired inputs.
    pub pair_seed: u64,
}

/// Test data that counts how often it was opened, so a run can prove
/// model selection never looked at it.
pub struct Sealed<T> {
    inner: T,
    reads: AtomicUsize,
}

impl<T> Sealed<T> {
    pub fn new(inner: T) -> Self {
        Sealed {
            inner,
            reads: AtomicUsize::new(0),
        }
    }

    pub fn open(&self) -> &T {
        self.reads.fetch_add(1, Ordering::SeqCst);
        &self.inner
    }

    pub fn reads(&self) -> usize {
        self.reads.load(Ordering::SeqCst)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldOutcome {
    pub fold: usize,
    pub selected: Option<GbtHyperParams>,
    pub validation_accuracy: f64,
    pub n_train: usize,
    pub n_validation: usize,
    pub n_test: usize,
    /// Times the test partition was read before the model was fixed.
    pub test_reads_before_selection: usize,
}

/// One test trial's prediction. Paired predictions are expanded to both
/// trials of the pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialPrediction {
    pub fold: usize,
    pub key: TrialKey,
    pub regime: Regime,
    pub article_position: u8,
    pub first_reading_position: Option<u8>,
    pub label: u8,
    pub predicted: u8,
    /// Probability that this trial is the repeated reading.
    pub proba: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CvOutcome {
    pub task: Task,
    pub model: ModelKind,
    pub folds: Vec<FoldOutcome>,
    pub predictions: Vec<TrialPrediction>,
}

impl CvOutcome {
    pub fn metrics(&self, resamples: usize, rng_seed: u64) -> Result<MetricsTable> {
        let p: Vec<u8> = self.predictions.iter().map(|t| t.predicted).collect();
        let y: Vec<u8> = self.predictions.iter().map(|t| t.label).collect();
        let r: Vec<Regime> = self.predictions.iter().map(|t| t.regime).collect();
        eval::evaluate(&p, &y, &r, resamples, rng_seed)
    }

    pub fn positions(&self, resamples: usize, rng_seed: u64) -> PositionSummary {
        let items: Vec<PositionedPrediction> = self
            .predictions
            .iter()
            .map(|t| PositionedPrediction {
                article_position: t.article_position,
                first_reading_position: t.first_reading_position,
                label: t.label,
                predicted: t.predicted,
                proba: t.proba,
            })
            .collect();
        eval::group_predictions_by_position(&items, resamples, rng_seed)
    }

    pub fn predictions_csv(&self) -> String {
        let mut out = String::from("fold,participant,article,paragraph,reading,regime,article_position,label,predicted,proba\n");
        for t in &self.predictions {
            out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{:.6}\n",
                t.fold, t.key.participant_id, t.key.article_id, t.key.paragraph_id, t.key.reading_index, t.regime, t.article_position, t.label, t.predicted, t.proba
            ));
        }
        out
    }
}

struct Partitioned<'a> {
    train: Vec<&'a FeaturizedTrial>,
    validation: Vec<&'a FeaturizedTrial>,
    test: Vec<(&'a FeaturizedTrial, Regime)>,
}

/// A fitted model reduced to what prediction needs.
enum Fitted {
    Constant(f64),
    Speed(ReadingSpeedClassifier),
    Trees(Box<crate::learn::Pipeline>),
}

pub fn run_cross_validation(
    trials: &[FeaturizedTrial],
    plan: &SplitPlan,
    task: Task,
    model: ModelKind,
    options: &CvOptions,
    references: Option<&SyntheticReferences>,
) -> Result<CvOutcome> {
    if model == ModelKind::GbtEz && references.is_none() {
        return Err(Error::domain("the augmented model needs simulated references"));
    }
    let augment = if model == ModelKind::GbtEz { references } else { None };
    let first_position: BTreeMap<(&str, u32), u8> = trials
        .iter()
        .filter(|t| t.key.reading_index == 1)
        .map(|t| ((t.key.participant_id.as_str(), t.key.article_id), t.article_position))
        .collect();

    let mut folds = Vec::with_capacity(plan.folds.len());
    let mut predictions = Vec::new();
    for fold in &plan.folds {
        let slots: BTreeMap<(u32, &str), (Partition, Option<Regime>)> = fold
            .pairs
            .iter()
            .map(|p| ((p.article, p.participant.as_str()), (p.partition, p.regime)))
            .collect();
        let mut parts = Partitioned {
            train: Vec::new(),
            validation: Vec::new(),
            test: Vec::new(),
        };
        for t in trials {
            match slots.get(&(t.key.article_id, t.key.participant_id.as_str())) {
                Some((Partition::Train, _)) => parts.train.push(t),
                Some((Partition::Validation, _)) => parts.validation.push(t),
                Some((Partition::Test, Some(regime))) => parts.test.push((t, *regime)),
                _ => {}
            }
        }

        let test_regime: BTreeMap<&TrialKey, Regime> = parts.test.iter().map(|(t, r)| (&t.key, *r)).collect();
        let test_trials: Vec<&FeaturizedTrial> = parts.test.iter().map(|(t, _)| *t).collect();

        let (train, validation, test_rows, train_speed, val_speed, test_speed, test_items) = match task {
            Task::Single => {
                let train = build_single_dataset(&parts.train, augment)?;
                let validation = build_single_dataset(&parts.validation, augment)?;
                let test = build_single_dataset(&test_trials, augment)?;
                let speed = |ts: &[&FeaturizedTrial]| ts.iter().map(|t| t.reading_speed).collect::<Vec<_>>();
                let items: Vec<TestItem> = test_trials.iter().map(|t| TestItem::Single(t)).collect();
                (train, validation, test, speed(&parts.train), speed(&parts.validation), speed(&test_trials), items)
            }
            Task::Paired => {
                let train_pairs = pair_trials(&parts.train);
                let val_pairs = pair_trials(&parts.validation);
                let test_pairs = pair_trials(&test_trials);
                let seed = options.pair_seed;
                let speed = |ps: &[TrialPair<'_>]| {
                    ps.iter()
                        .map(|&p| {
                            let (a, b, _) = order_pair(p, seed);
                            b.reading_speed - a.reading_speed
                        })
                        .collect::<Vec<_>>()
                };
                let items: Vec<TestItem> = test_pairs.iter().map(|&p| TestItem::Pair(p)).collect();
                (
                    build_paired_dataset_with(&train_pairs, augment, seed)?,
                    build_paired_dataset_with(&val_pairs, augment, seed)?,
                    build_paired_dataset_with(&test_pairs, augment, seed)?,
                    speed(&train_pairs),
                    speed(&val_pairs),
                    speed(&test_pairs),
                    items,
                )
            }
        };
        if train.is_empty() || validation.is_empty() {
            return Err(Error::Data(format!("fold {} has an empty training or validation partition", fold.index)));
        }

        let sealed = Sealed::new((test_rows, test_speed));
        let (fitted, selected, validation_accuracy) = fit_model(model, &train, &validation, &train_speed, &val_speed, &options.grid)?;
        let test_reads_before_selection = sealed.reads();
        let (test_data, test_speed) = sealed.open();
        let proba: Vec<f64> = match &fitted {
            Fitted::Constant(p) => vec![*p; test_data.len()],
            Fitted::Speed(m) => m.predict_proba(test_speed),
            Fitted::Trees(p) => p.predict_proba(&test_data.x),
        };

        for ((item, &p), &label) in test_items.iter().zip(&proba).zip(&test_data.y) {
            let predicted = u8::from(p > 0.5);
            let first_of = |t: &FeaturizedTrial| {
                (t.key.reading_index == 2)
                    .then(|| first_position.get(&(t.key.participant_id.as_str(), t.key.article_id)).copied())
                    .flatten()
            };
            let record = |t: &FeaturizedTrial, label: u8, predicted: u8, proba: f64| TrialPrediction {
                fold: fold.index,
                key: t.key.clone(),
                regime: test_regime[&t.key],
                article_position: t.article_position,
                first_reading_position: first_of(t),
                label,
                predicted,
                proba,
            };
            match *item {
                TestItem::Single(t) => predictions.push(record(t, label, predicted, p)),
                TestItem::Pair(pair) => {
                    let (a, b, _) = order_pair(pair, options.pair_seed);
                    predictions.push(record(b, label, predicted, p));
                    predictions.push(record(a, 1 - label, 1 - predicted, 1.0 - p));
                }
            }
        }
        folds.push(FoldOutcome {
            fold: fold.index,
            selected,
            validation_accuracy,
            n_train: train.len(),
            n_validation: validation.len(),
            n_test: test_data.len(),
            test_reads_before_selection,
        });
    }
    Ok(CvOutcome {
        task,
        model,
        folds,
        predictions,
    })
}

enum TestItem<'a> {
    Single(&'a FeaturizedTrial),
    Pair(TrialPair<'a>),
}

fn fit_model(
    model: ModelKind,
    train: &Dataset,
    validation: &Dataset,
    train_speed: &[f64],
    val_speed: &[f64],
    grid: &[GbtHyperParams],
) -> Result<(Fitted, Option<GbtHyperParams>, f64)> {
    Ok(match model {
        ModelKind::Majority => {
            let m = MajorityClassifier::fit(&train.y)?;
            let acc = accuracy(&m.predict_proba(validation.len()), &validation.y);
            (Fitted::Constant(f64::from(m.class)), None, acc)
        }
        ModelKind::ReadingSpeed => {
            let m = ReadingSpeedClassifier::fit(train_speed, &train.y)?;
            let acc = accuracy(&m.predict_proba(val_speed), &validation.y);
            (Fitted::Speed(m), None, acc)
        }
        ModelKind::Gbt | ModelKind::GbtEz => {
            let r = grid_search(train, validation, grid)?;
            let hp = r.best.hp;
            (Fitted::Trees(Box::new(r.best)), Some(hp), r.validation_accuracy)
        }
    })
}
