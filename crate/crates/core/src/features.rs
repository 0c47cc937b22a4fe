//! The 35-dimensional trial feature vector: 8 standard measures, 20 word
//! property coefficients and 7 saccade network measures.

use serde::{Deserialize, Serialize};

use crate::ingest::{Fixation, Trial, WordToken};
use crate::measures::{self, TrialGlobalMeasures};
use crate::network;
use crate::wordprop::{self, WordPropertyFit};
use crate::Result;

pub const DIM: usize = 35;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureVector(pub Vec<f64>);

impl FeatureVector {
    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    /// Element-wise mean of equally sized vectors.
    pub fn mean<'a>(vectors: impl IntoIterator<Item = &'a FeatureVector>) -> Option<FeatureVector> {
        let mut count = 0usize;
        let mut acc: Vec<f64> = Vec::new();
        for v in vectors {
            if acc.is_empty() {
                acc = vec![0.0; v.0.len()];
            }
            for (a, x) in acc.iter_mut().zip(&v.0) {
                *a += x;
            }
            count += 1;
        }
        if count == 0 {
            return None;
        }
        Some(FeatureVector(acc.into_iter().map(|a| a / count as f64).collect()))
    }
}

pub fn feature_names() -> Vec<String> {
    TrialGlobalMeasures::NAMES
        .iter()
        .map(|s| s.to_string())
        .chain(wordprop::feature_names())
        .chain(network::FEATURE_NAMES.iter().map(|s| s.to_string()))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialFeatures {
    pub vector: FeatureVector,
    pub measures: TrialGlobalMeasures,
    pub coefficients: WordPropertyFit,
}

/// Features from raw parts, so simulated scanpaths can be featurised without
/// building a full trial.
pub fn featurize_parts(words: &[WordToken], scanpath: &[Fixation], total_rt_ms: f64) -> Result<TrialFeatures> {
    let word_measures = measures::word_measures_for(words.len(), scanpath, total_rt_ms);
    let global = measures::trial_global_measures(&word_measures, total_rt_ms)?;
    let coefficients = wordprop::fit_coefficients(words, &word_measures);
    let graph = network::build_from_scanpath(words.len(), scanpath);
    let net = network::network_features(&graph);

    let mut v = Vec::with_capacity(DIM);
    v.extend_from_slice(&global.to_array());
    v.extend_from_slice(&coefficients.coefficients);
    v.extend_from_slice(&net);
    Ok(TrialFeatures {
        vector: FeatureVector(v),
        measures: global,
        coefficients,
    })
}

pub fn featurize(trial: &Trial) -> Result<TrialFeatures> {
    featurize_parts(&trial.words, &trial.scanpath, trial.total_rt_ms)
}
