//! Responsiveness of reading measures to word properties.
//!
//! For every trial, four reading measures (TFD, FFD, GD and fixation count)
//! are regressed on surprisal, frequency, length, the frequency-by-length
//! interaction and the normalised word position. The response and the three
//! continuous predictors are z-scored within the trial. Zero durations
//! (skipped words) are excluded for the three duration measures; fixation
//! count keeps every word. The five slopes of each fit form 20 features.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::ingest::{Trial, WordToken};
use crate::measures::WordMeasures;
use crate::{Error, Result};

pub const MIN_ROWS: usize = 8;
pub const RIDGE_JITTER: f64 = 1e-10;
pub const MAX_CONDITION: f64 = 1e10;

pub const MEASURES: [&str; 4] = ["tfd", "ffd", "gd", "fixation_count"];
pub const TERMS: [&str; 5] = ["surprisal", "frequency", "length", "frequency_x_length", "word_position"];

/// Coefficient feature names, measure-major.
pub fn feature_names() -> Vec<String> {
    MEASURES
        .iter()
        .flat_map(|m| TERMS.iter().map(move |t| format!("coef_{m}_{t}")))
        .collect()
}

#[derive(Debug, Clone)]
pub struct OlsFit {
    pub coefficients: DVector<f64>,
    pub residuals: DVector<f64>,
    /// Condition number of `XᵀX`.
    pub condition_number: f64,
}

/// Ordinary least squares through the normal equations with a small ridge
/// jitter. The design matrix must already contain an intercept column if
/// one is wanted. Fails when `XᵀX` is numerically singular.
pub fn ols(design: &DMatrix<f64>, response: &DVector<f64>) -> Result<OlsFit> {
    if design.nrows() != response.len() {
        return Err(Error::domain("design and response lengths differ"));
    }
    if design.nrows() < design.ncols() {
        return Err(Error::domain("fewer rows than coefficients"));
    }
    let xtx = design.transpose() * design;
    let eig = SymmetricEigen::new(xtx.clone());
    let max = eig.eigenvalues.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let min = eig.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min);
    let condition_number = if min > 0.0 { max / min } else { f64::INFINITY };
    if !(condition_number <= MAX_CONDITION) {
        return Err(Error::domain(format!(
            "singular design (condition number {condition_number:e})"
        )));
    }
    let jittered = &xtx + DMatrix::identity(design.ncols(), design.ncols()) * RIDGE_JITTER;
    let xty = design.transpose() * response;
    let chol = jittered
        .cholesky()
        .ok_or_else(|| Error::domain("normal matrix is not positive definite"))?;
    let mut coefficients = chol.solve(&xty);
    // Refinement with residuals taken from the design itself removes the
    // ridge bias and most of the error that forming XᵀX introduces.
    for _ in 0..4 {
        let residuals = response - design * &coefficients;
        let correction = chol.solve(&(design.transpose() * residuals));
        coefficients += correction;
    }
    let residuals = response - design * &coefficients;
    Ok(OlsFit {
        coefficients,
        residuals,
        condition_number,
    })
}

/// Population z-scores; a constant column maps to zeros.
fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    if sd == 0.0 || !sd.is_finite() {
        return vec![0.0; values.len()];
    }
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Fits one measure. `None` signals a degenerate fit (too few rows or a
/// singular design); a constant response yields all-zero slopes.
pub fn fit_measure(words: &[WordToken], response: &[f64], exclude_zero: bool) -> Option<[f64; 5]> {
    let rows: Vec<usize> = (0..words.len())
        .filter(|&i| !exclude_zero || response[i] != 0.0)
        .collect();
    if rows.len() < MIN_ROWS {
        return None;
    }
    let y: Vec<f64> = rows.iter().map(|&i| response[i]).collect();
    let y = zscore(&y);
    if y.iter().all(|&v| v == 0.0) {
        return Some([0.0; 5]);
    }
    let surp = zscore(&rows.iter().map(|&i| words[i].surprisal).collect::<Vec<_>>());
    let freq = zscore(&rows.iter().map(|&i| words[i].log2_frequency).collect::<Vec<_>>());
    let len = zscore(&rows.iter().map(|&i| f64::from(words[i].length)).collect::<Vec<_>>());

    let design = DMatrix::from_fn(rows.len(), 6, |r, c| match c {
        0 => 1.0,
        1 => surp[r],
        2 => freq[r],
        3 => len[r],
        4 => freq[r] * len[r],
        _ => words[rows[r]].normalized_word_index,
    });
    let fit = ols(&design, &DVector::from_vec(y)).ok()?;
    let mut out = [0.0; 5];
    out.copy_from_slice(&fit.coefficients.as_slice()[1..6]);
    Some(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordPropertyFit {
    /// 4 measures × 5 terms, measure-major.
    pub coefficients: [f64; 20],
    /// Per measure: the fit was degenerate and its slopes were zeroed.
    pub degenerate: [bool; 4],
}

/// Fits the four per-trial regressions. Never fails; degenerate fits are
/// zeroed and flagged.
pub fn fit_trial_coefficients(trial: &Trial, measures: &[WordMeasures]) -> WordPropertyFit {
    fit_coefficients(&trial.words, measures)
}

pub fn fit_coefficients(words: &[WordToken], measures: &[WordMeasures]) -> WordPropertyFit {
    let responses: [(Vec<f64>, bool); 4] = [
        (measures.iter().map(|m| m.tfd_ms).collect(), true),
        (measures.iter().map(|m| m.ffd_ms).collect(), true),
        (measures.iter().map(|m| m.gd_ms).collect(), true),
        (measures.iter().map(|m| f64::from(m.fixation_count)).collect(), false),
    ];
    let mut coefficients = [0.0; 20];
    let mut degenerate = [false; 4];
    for (k, (y, exclude_zero)) in responses.iter().enumerate() {
        match fit_measure(words, y, *exclude_zero) {
            Some(c) => coefficients[5 * k..5 * k + 5].copy_from_slice(&c),
            None => degenerate[k] = true,
        }
    }
    WordPropertyFit {
        coefficients,
        degenerate,
    }
}
