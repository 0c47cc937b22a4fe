use serde::{Deserialize, Serialize};

use super::{require_both_classes, sigmoid};
use crate::{Error, Result};

/// Predicts the most frequent training class; ties go to class 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityClassifier {
    pub class: u8,
}

impl MajorityClassifier {
    pub fn fit(labels: &[u8]) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::domain("majority baseline needs labels"));
        }
        let pos = labels.iter().filter(|&&v| v == 1).count();
        Ok(MajorityClassifier {
            class: u8::from(2 * pos > labels.len()),
        })
    }

    pub fn predict_proba(&self, n: usize) -> Vec<f64> {
        vec![f64::from(self.class); n]
    }
}

pub const SPEED_ITERATIONS: usize = 500;
pub const SPEED_STEP: f64 = 0.1;

/// Logistic regression on one standardized feature (words per second, or
/// its difference for paired inputs), fitted by full-batch gradient
/// descent.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ReadingSpeedClassifier {
    pub mean: f64,
    pub sd: f64,
    pub intercept: f64,
    pub slope: f64,
}

impl ReadingSpeedClassifier {
    pub fn fit(feature: &[f64], labels: &[u8]) -> Result<Self> {
        if feature.len() != labels.len() || feature.is_empty() {
            return Err(Error::domain("speed baseline needs one feature value per label"));
        }
        if feature.iter().any(|v| !v.is_finite()) {
            return Err(Error::domain("speed feature must be finite"));
        }
        require_both_classes(labels)?;
        let n = feature.len() as f64;
        let mean = feature.iter().sum::<f64>() / n;
        let sd = (feature.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n).sqrt();
        let z: Vec<f64> = feature.iter().map(|v| if sd > 0.0 { (v - mean) / sd } else { 0.0 }).collect();
        let (mut b0, mut b1) = (0.0, 0.0);
        for _ in 0..SPEED_ITERATIONS {
            let (mut g0, mut g1) = (0.0, 0.0);
            for (zi, &yi) in z.iter().zip(labels) {
                let r = sigmoid(b0 + b1 * zi) - f64::from(yi);
                g0 += r;
                g1 += r * zi;
            }
            b0 -= SPEED_STEP * g0 / n;
            b1 -= SPEED_STEP * g1 / n;
        }
        Ok(ReadingSpeedClassifier {
            mean,
            sd,
            intercept: b0,
            slope: b1,
        })
    }

    pub fn predict_proba_one(&self, value: f64) -> f64 {
        let z = if self.sd > 0.0 { (value - self.mean) / self.sd } else { 0.0 };
        sigmoid(self.intercept + self.slope * z)
    }

    pub fn predict_proba(&self, feature: &[f64]) -> Vec<f64> {
        feature.iter().map(|&v| self.predict_proba_one(v)).collect()
    }
}
