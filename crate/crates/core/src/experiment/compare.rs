//! How far simulated first readings sit from human first and repeated
//! readings, on four trial-level measures.
//!
//! For every human trial the difference human − simulated is taken against
//! the reference of its paragraph. Group means and their intervals come from
//! a bootstrap over paragraphs, and `d = |mean_first| − |mean_repeated|`
//! is negative when the simulation is closer to first reading.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::eval::Estimate;
use super::SyntheticReferences;
use crate::ezreader::ComparisonMeasures;
use crate::ingest::Trial;
use crate::{measures, seed, Error, Result};

/// Mean total fixation duration is tested two-sided, the rest one-sided.
const TWO_SIDED: [bool; 4] = [false, true, false, false];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasureComparison {
    pub measure: String,
    /// Mean of human first reading − simulated.
    pub first: Estimate,
    /// Mean of human repeated reading − simulated.
    pub repeated: Estimate,
    pub d: f64,
    pub p_value: f64,
    pub two_sided: bool,
}

impl MeasureComparison {
    /// Simulation closer to first than to repeated reading.
    pub fn closer_to_first(&self) -> bool {
        self.d < 0.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub n_pairs: usize,
    pub n_paragraphs: usize,
    pub measures: Vec<MeasureComparison>,
}

impl ComparisonReport {
    pub fn measure(&self, name: &str) -> Option<&MeasureComparison> {
        self.measures.iter().find(|m| m.measure == name)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("measure,first_mean,first_ci_low,first_ci_high,repeated_mean,repeated_ci_low,repeated_ci_high,d,p_value,test\n");
        for m in &self.measures {
            writeln!(
                out,
                "{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6},{}",
                m.measure,
                m.first.value,
                m.first.ci_low,
                m.first.ci_high,
                m.repeated.value,
                m.repeated.ci_low,
                m.repeated.ci_high,
                m.d,
                m.p_value,
                if m.two_sided { "two_sided" } else { "one_sided" }
            )
            .expect("writing to a string");
        }
        out
    }
}

#[derive(Default)]
struct ParagraphDiffs {
    first: Vec<[f64; 4]>,
    repeated: Vec<[f64; 4]>,
}

fn means(paragraphs: &[&ParagraphDiffs]) -> ([f64; 4], [f64; 4]) {
    let mut f = [0.0; 4];
    let mut r = [0.0; 4];
    let (mut nf, mut nr) = (0usize, 0usize);
    for p in paragraphs {
        for d in &p.first {
            f.iter_mut().zip(d).for_each(|(a, x)| *a += x);
            nf += 1;
        }
        for d in &p.repeated {
            r.iter_mut().zip(d).for_each(|(a, x)| *a += x);
            nr += 1;
        }
    }
    f.iter_mut().for_each(|a| *a /= nf.max(1) as f64);
    r.iter_mut().for_each(|a| *a /= nr.max(1) as f64);
    (f, r)
}

fn human_measures(trial: &Trial) -> Result<[f64; 4]> {
    Ok(ComparisonMeasures::from_word_measures(&measures::word_measures(trial))?.to_array())
}

pub fn compare_synthetic_to_human(
    pairs: &[(&Trial, &Trial)],
    synthetic: &SyntheticReferences,
    resamples: usize,
    rng_seed: u64,
) -> Result<ComparisonReport> {
    if pairs.is_empty() {
        return Err(Error::domain("no paired first and repeated readings"));
    }
    if resamples == 0 {
        return Err(Error::domain("at least one bootstrap resample is needed"));
    }
    let mut by_paragraph: BTreeMap<(u32, u32), ParagraphDiffs> = BTreeMap::new();
    for (first, repeated) in pairs {
        let key = (first.article_id, first.paragraph_id);
        let reference = synthetic
            .get(&key)
            .ok_or_else(|| Error::Data(format!("no synthetic reference for article {} paragraph {}", key.0, key.1)))?
            .comparison
            .to_array();
        let diff = |t: &Trial| -> Result<[f64; 4]> {
            let h = human_measures(t)?;
            Ok(std::array::from_fn(|k| h[k] - reference[k]))
        };
        let slot = by_paragraph.entry(key).or_default();
        slot.first.push(diff(first)?);
        slot.repeated.push(diff(repeated)?);
    }
    let paragraphs: Vec<&ParagraphDiffs> = by_paragraph.values().collect();
    let (first, repeated) = means(&paragraphs);

    let replicates: Vec<([f64; 4], [f64; 4])> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let mut rng = seed::rng(seed::derive_indexed(rng_seed, "compare/bootstrap", b as u64));
            let sample: Vec<&ParagraphDiffs> = (0..paragraphs.len()).map(|_| paragraphs[rng.random_range(0..paragraphs.len())]).collect();
            means(&sample)
        })
        .collect();

    let measures = (0..4)
        .map(|k| {
            let rf: Vec<f64> = replicates.iter().map(|r| r.0[k]).collect();
            let rr: Vec<f64> = replicates.iter().map(|r| r.1[k]).collect();
            let d = first[k].abs() - repeated[k].abs();
            let ds: Vec<f64> = replicates.iter().map(|r| r.0[k].abs() - r.1[k].abs()).collect();
            let tail = |pred: &dyn Fn(f64) -> bool| (ds.iter().filter(|&&x| pred(x)).count() + 1) as f64 / (resamples + 1) as f64;
            let at_or_above = tail(&|x| x >= 0.0);
            let at_or_below = tail(&|x| x <= 0.0);
            let p_value = if TWO_SIDED[k] {
                (2.0 * at_or_above.min(at_or_below)).min(1.0)
            } else if d <= 0.0 {
                at_or_above
            } else {
                at_or_below
            };
            MeasureComparison {
                measure: ComparisonMeasures::NAMES[k].to_string(),
                first: Estimate::normal(first[k], &rf),
                repeated: Estimate::normal(repeated[k], &rr),
                d,
                p_value,
                two_sided: TWO_SIDED[k],
            }
        })
        .collect();
    Ok(ComparisonReport {
        n_pairs: pairs.len(),
        n_paragraphs: paragraphs.len(),
        measures,
    })
}
