//! Preprocessing, boosted trees, baselines and model selection.

pub mod baseline;
pub mod gbt;
pub mod grid;
pub mod pca;
pub mod standardize;

pub use baseline::{MajorityClassifier, ReadingSpeedClassifier};
pub use gbt::{train_gbt, GbtHyperParams, GbtModel};
pub use grid::{grid_search, GridResult, Pipeline};
pub use pca::Pca;
pub use standardize::Standardizer;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Row-major feature matrix with binary labels (1 = repeated reading).
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Dataset {
    pub x: Vec<Vec<f64>>,
    pub y: Vec<u8>,
}

impl Dataset {
    pub fn new(x: Vec<Vec<f64>>, y: Vec<u8>) -> Result<Self> {
        let data = Dataset { x, y };
        data.check()?;
        Ok(data)
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    pub fn check(&self) -> Result<()> {
        if self.x.len() != self.y.len() {
            return Err(Error::domain(format!("{} rows but {} labels", self.x.len(), self.y.len())));
        }
        let d = self.n_features();
        if self.x.iter().any(|r| r.len() != d) {
            return Err(Error::domain("rows have different lengths"));
        }
        if self.y.iter().any(|&v| v > 1) {
            return Err(Error::domain("labels must be 0 or 1"));
        }
        if self.x.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::domain("features must be finite"));
        }
        Ok(())
    }
}

/// Fraction of predictions on the correct side of 0.5 (exactly 0.5 counts
/// as class 0).
pub fn accuracy(proba: &[f64], y: &[u8]) -> f64 {
    if y.is_empty() {
        return f64::NAN;
    }
    let hits = proba.iter().zip(y).filter(|(&p, &t)| u8::from(p > 0.5) == t).count();
    hits as f64 / y.len() as f64
}

pub(crate) fn require_both_classes(y: &[u8]) -> Result<()> {
    let pos = y.iter().filter(|&&v| v == 1).count();
    if pos == 0 || pos == y.len() {
        return Err(Error::domain("labels must contain both classes"));
    }
    Ok(())
}

pub(crate) fn sigmoid(z: f64) -> f64 {
    if z >= 0.0 {
        1.0 / (1.0 + (-z).exp())
    } else {
        let e = z.exp();
        e / (1.0 + e)
    }
}

/// Mean binary cross-entropy.
pub fn log_loss(proba: &[f64], y: &[u8]) -> f64 {
    let eps = 1e-15;
    let total: f64 = proba
        .iter()
        .zip(y)
        .map(|(&p, &t)| {
            let p = p.clamp(eps, 1.0 - eps);
            if t == 1 {
                -p.ln()
            } else {
                -(1.0 - p).ln()
            }
        })
        .sum();
    total / y.len() as f64
}
