//! Classification metrics with bootstrap intervals, and summaries by
//! article position.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::split::Regime;
use crate::{seed, Error, Result};

/// Normal quantile for a two-sided 95% interval.
pub const Z95: f64 = 1.959963984540054;
pub const DEFAULT_RESAMPLES: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Accuracy,
    Precision,
    Recall,
    F1,
}

impl Metric {
    pub const ALL: [Metric; 4] = [Metric::Accuracy, Metric::Precision, Metric::Recall, Metric::F1];

    pub fn as_str(self) -> &'static str {
        match self {
            Metric::Accuracy => "accuracy",
            Metric::Precision => "precision",
            Metric::Recall => "recall",
            Metric::F1 => "f1",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl Estimate {
    /// `value ± 1.96·sd` of the bootstrap replicates.
    pub fn normal(value: f64, replicates: &[f64]) -> Self {
        let sd = sample_sd(replicates);
        Estimate {
            value,
            ci_low: value - Z95 * sd,
            ci_high: value + Z95 * sd,
        }
    }
}

pub(crate) fn sample_sd(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

/// Accuracy, precision, recall and F1 with the repeated reading as the
/// positive class. Precision with no positive predictions, recall with no
/// positive labels and F1 when either is undefined or both are zero are
/// reported as 0.
pub fn point_metrics(predicted: &[u8], labels: &[u8]) -> [f64; 4] {
    raw_metrics(predicted, labels).map(|v| if v.is_nan() { 0.0 } else { v })
}

/// As [`point_metrics`] but with NaN where a ratio is undefined.
fn raw_metrics(predicted: &[u8], labels: &[u8]) -> [f64; 4] {
    let (mut tp, mut fp, mut fn_, mut tn) = (0usize, 0usize, 0usize, 0usize);
    for (&p, &t) in predicted.iter().zip(labels) {
        match (p, t) {
            (1, 1) => tp += 1,
            (1, _) => fp += 1,
            (_, 1) => fn_ += 1,
            _ => tn += 1,
        }
    }
    let ratio = |a: usize, b: usize| if b == 0 { f64::NAN } else { a as f64 / b as f64 };
    let precision = ratio(tp, tp + fp);
    let recall = ratio(tp, tp + fn_);
    let f1 = if precision + recall > 0.0 { 2.0 * precision * recall / (precision + recall) } else if precision.is_nan() || recall.is_nan() { f64::NAN } else { 0.0 };
    [ratio(tp + tn, tp + fp + fn_ + tn), precision, recall, f1]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    /// `all` or a regime name.
    pub group: String,
    pub n: usize,
    /// Absent when the group is empty.
    pub metrics: Option<[Estimate; 4]>,
}

impl MetricsRow {
    pub fn get(&self, metric: Metric) -> Option<Estimate> {
        let i = Metric::ALL.iter().position(|&m| m == metric).expect("metric listed");
        self.metrics.map(|m| m[i])
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsTable {
    pub rows: Vec<MetricsRow>,
}

impl MetricsTable {
    pub fn row(&self, group: &str) -> Option<&MetricsRow> {
        self.rows.iter().find(|r| r.group == group)
    }

    pub fn accuracy(&self, group: &str) -> Option<f64> {
        self.row(group)?.get(Metric::Accuracy).map(|e| e.value)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("group,n,metric,value,ci_low,ci_high\n");
        for r in &self.rows {
            for m in Metric::ALL {
                match r.get(m) {
                    Some(e) => writeln!(out, "{},{},{},{:.6},{:.6},{:.6}", r.group, r.n, m.as_str(), e.value, e.ci_low, e.ci_high),
                    None => writeln!(out, "{},{},{},,,", r.group, r.n, m.as_str()),
                }
                .expect("writing to a string");
            }
        }
        out
    }
}

fn bootstrap_metrics(predicted: &[u8], labels: &[u8], resamples: usize, stream: u64) -> [Estimate; 4] {
    let point = point_metrics(predicted, labels);
    let n = labels.len();
    let replicates: Vec<[f64; 4]> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed::derive_indexed(stream, "bootstrap", b as u64));
            let mut p = Vec::with_capacity(n);
            let mut t = Vec::with_capacity(n);
            for _ in 0..n {
                let i = rng.random_range(0..n);
                p.push(predicted[i]);
                t.push(labels[i]);
            }
            raw_metrics(&p, &t)
        })
        .collect();
    // Replicates where a ratio is undefined carry no information about its
    // spread.
    std::array::from_fn(|k| {
        let column: Vec<f64> = replicates.iter().map(|r| r[k]).filter(|v| !v.is_nan()).collect();
        Estimate::normal(point[k], &column)
    })
}

/// Metrics overall and per evaluation regime.
pub fn evaluate(predicted: &[u8], labels: &[u8], regimes: &[Regime], resamples: usize, rng_seed: u64) -> Result<MetricsTable> {
    if predicted.len() != labels.len() || regimes.len() != labels.len() {
        return Err(Error::domain("predictions, labels and regimes must have equal length"));
    }
    let mut groups: Vec<(String, Vec<usize>)> = vec![("all".into(), (0..labels.len()).collect())];
    for r in Regime::ALL {
        groups.push((r.as_str().into(), (0..labels.len()).filter(|&i| regimes[i] == r).collect()));
    }
    let rows = groups
        .into_iter()
        .map(|(group, idx)| {
            let p: Vec<u8> = idx.iter().map(|&i| predicted[i]).collect();
            let t: Vec<u8> = idx.iter().map(|&i| labels[i]).collect();
            let metrics = (!idx.is_empty()).then(|| bootstrap_metrics(&p, &t, resamples, seed::derive(rng_seed, &group)));
            MetricsRow { group, n: idx.len(), metrics }
        })
        .collect();
    Ok(MetricsTable { rows })
}

/// Expands paired predictions into per-trial outcomes: a correctly ordered
/// pair classifies both of its trials correctly, a wrong one neither.
/// Returns `(predicted, labels, regimes)` with two entries per pair, the
/// second-shown trial first.
pub fn unaggregate_paired(proba: &[f64], labels: &[u8], regimes: &[Regime]) -> (Vec<u8>, Vec<u8>, Vec<Regime>) {
    let mut p = Vec::with_capacity(2 * labels.len());
    let mut t = Vec::with_capacity(2 * labels.len());
    let mut r = Vec::with_capacity(2 * labels.len());
    for ((&prob, &y), &regime) in proba.iter().zip(labels).zip(regimes) {
        let b_repeated = u8::from(prob > 0.5);
        p.extend([b_repeated, 1 - b_repeated]);
        t.extend([y, 1 - y]);
        r.extend([regime, regime]);
    }
    (p, t, r)
}

/// One test prediction with the schedule information needed for position
/// summaries.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositionedPrediction {
    pub article_position: u8,
    /// For repeated readings, where the first reading of the article sat.
    pub first_reading_position: Option<u8>,
    pub label: u8,
    pub predicted: u8,
    pub proba: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionRow {
    pub position: u8,
    pub n: usize,
    pub mean_proba: Estimate,
    pub accuracy: Estimate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PositionSummary {
    /// By article position 1 through 12, all trials.
    pub by_position: Vec<PositionRow>,
    /// Repeated readings only, by the position of their first reading.
    pub by_first_reading_position: Vec<PositionRow>,
}

impl PositionSummary {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("grouping,position,n,mean_proba,proba_ci_low,proba_ci_high,accuracy,accuracy_ci_low,accuracy_ci_high\n");
        for (name, rows) in [("article_position", &self.by_position), ("first_reading_position", &self.by_first_reading_position)] {
            for r in rows {
                writeln!(
                    out,
                    "{name},{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                    r.position, r.n, r.mean_proba.value, r.mean_proba.ci_low, r.mean_proba.ci_high, r.accuracy.value, r.accuracy.ci_low, r.accuracy.ci_high
                )
                .expect("writing to a string");
            }
        }
        out
    }
}

fn position_rows(items: &[(u8, f64, f64)], resamples: usize, stream: u64) -> Vec<PositionRow> {
    let mut groups: BTreeMap<u8, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &(pos, proba, correct) in items {
        let g = groups.entry(pos).or_default();
        g.0.push(proba);
        g.1.push(correct);
    }
    groups
        .into_iter()
        .map(|(position, (proba, correct))| {
            let n = proba.len();
            let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
            let replicates: Vec<(f64, f64)> = (0..resamples)
                .into_par_iter()
                .map(|b| {
                    let mut rng = seed::rng(seed::derive_indexed(stream, &format!("position/{position}"), b as u64));
                    let (mut sp, mut sc) = (0.0, 0.0);
                    for _ in 0..n {
                        let i = rng.random_range(0..n);
                        sp += proba[i];
                        sc += correct[i];
                    }
                    (sp / n as f64, sc / n as f64)
                })
                .collect();
            let rp: Vec<f64> = replicates.iter().map(|r| r.0).collect();
            let rc: Vec<f64> = replicates.iter().map(|r| r.1).collect();
            PositionRow {
                position,
                n,
                mean_proba: Estimate::normal(mean(&proba), &rp),
                accuracy: Estimate::normal(mean(&correct), &rc),
            }
        })
        .collect()
}

pub fn group_predictions_by_position(predictions: &[PositionedPrediction], resamples: usize, rng_seed: u64) -> PositionSummary {
    let correct = |p: &PositionedPrediction| f64::from(p.predicted == p.label);
    let all: Vec<(u8, f64, f64)> = predictions.iter().map(|p| (p.article_position, p.proba, correct(p))).collect();
    let rereads: Vec<(u8, f64, f64)> = predictions
        .iter()
        .filter(|p| p.label == 1)
        .filter_map(|p| Some((p.first_reading_position?, p.proba, correct(p))))
        .collect();
    PositionSummary {
        by_position: position_rows(&all, resamples, seed::derive(rng_seed, "by_position")),
        by_first_reading_position: position_rows(&rereads, resamples, seed::derive(rng_seed, "by_first_reading")),
    }
}
