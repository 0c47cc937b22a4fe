use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Principal components of the training covariance, truncated to the
/// smallest number that keeps the requested share of variance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pca {
    pub mean: Vec<f64>,
    /// `k` unit-length rows of length `d`.
    pub components: Vec<Vec<f64>>,
    /// Eigenvalues of the retained components, descending.
    pub variances: Vec<f64>,
    pub total_variance: f64,
}

impl Pca {
    pub fn fit(rows: &[Vec<f64>], min_explained: f64) -> Result<Self> {
        if !(min_explained > 0.0 && min_explained <= 1.0) {
            return Err(Error::domain(format!("explained variance must lie in (0, 1], got {min_explained}")));
        }
        if rows.is_empty() || rows[0].is_empty() || rows.iter().any(|r| r.len() != rows[0].len()) {
            return Err(Error::domain("PCA needs a nonempty rectangular matrix"));
        }
        let (n, d) = (rows.len(), rows[0].len());
        let mut mean = vec![0.0; d];
        for r in rows {
            for (m, v) in mean.iter_mut().zip(r) {
                *m += v / n as f64;
            }
        }
        let centered = DMatrix::from_fn(n, d, |i, j| rows[i][j] - mean[j]);
        let cov = centered.transpose() * &centered / n as f64;
        let eig = SymmetricEigen::new(cov);

        let mut order: Vec<usize> = (0..d).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
        let values: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i].max(0.0)).collect();
        let total: f64 = values.iter().sum();

        let k = if total > 0.0 {
            let mut acc = 0.0;
            let mut k = d;
            for (i, v) in values.iter().enumerate() {
                acc += v;
                // Relative slack absorbs rounding in the eigenvalues.
                if acc >= (min_explained - 1e-10) * total {
                    k = i + 1;
                    break;
                }
            }
            k
        } else {
            1
        };

        let components = order[..k]
            .iter()
            .map(|&i| {
                let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().copied().collect();
                // Loadings equal up to rounding count as tied; the lowest
                // index wins so the sign survives rescaled inputs.
                let top = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
                let lead = v.iter().copied().find(|x| x.abs() >= top - 1e-9).unwrap_or(1.0);
                if lead < 0.0 {
                    v.iter_mut().for_each(|x| *x = -*x);
                }
                v
            })
            .collect();
        Ok(Pca {
            mean,
            components,
            variances: values[..k].to_vec(),
            total_variance: total,
        })
    }

    pub fn n_components(&self) -> usize {
        self.components.len()
    }

    pub fn apply_row(&self, row: &[f64]) -> Vec<f64> {
        self.components
            .iter()
            .map(|c| c.iter().zip(row.iter().zip(&self.mean)).map(|(w, (v, m))| w * (v - m)).sum())
            .collect()
    }

    pub fn apply(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        rows.iter().map(|r| self.apply_row(r)).collect()
    }

    /// Maps projected coordinates back to the input space.
    pub fn reconstruct_row(&self, z: &[f64]) -> Vec<f64> {
        let mut out = self.mean.clone();
        for (c, &w) in self.components.iter().zip(z) {
            for (o, v) in out.iter_mut().zip(c) {
                *o += w * v;
            }
        }
        out
    }
}
