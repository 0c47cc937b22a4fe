use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{accuracy, train_gbt, Dataset, GbtHyperParams, GbtModel, Pca, Standardizer};
use crate::{Error, Result};

/// Standardize, project onto principal components, then boost. Every stage
/// is fitted on the training rows only.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Pipeline {
    pub hp: GbtHyperParams,
    pub standardizer: Standardizer,
    pub pca: Pca,
    pub model: GbtModel,
}

impl Pipeline {
    pub fn fit(train: &Dataset, hp: &GbtHyperParams) -> Result<Self> {
        train.check()?;
        let standardizer = Standardizer::fit(&train.x)?;
        let z = standardizer.apply(&train.x);
        let pca = Pca::fit(&z, hp.pca_explained_variance)?;
        let projected = Dataset {
            x: pca.apply(&z),
            y: train.y.clone(),
        };
        let model = train_gbt(&projected, hp)?;
        Ok(Pipeline {
            hp: *hp,
            standardizer,
            pca,
            model,
        })
    }

    pub fn transform(&self, rows: &[Vec<f64>]) -> Vec<Vec<f64>> {
        self.pca.apply(&self.standardizer.apply(rows))
    }

    pub fn predict_proba(&self, rows: &[Vec<f64>]) -> Vec<f64> {
        self.model.predict_proba(&self.transform(rows))
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GridResult {
    pub best: Pipeline,
    pub validation_accuracy: f64,
    /// Validation accuracy of every grid point, in grid order.
    pub scores: Vec<(GbtHyperParams, f64)>,
}

/// Fits every grid point on `train` and keeps the one with the highest
/// accuracy on `validation`. Ties prefer fewer estimators, then shallower
/// trees, then the earlier grid point.
pub fn grid_search(train: &Dataset, validation: &Dataset, grid: &[GbtHyperParams]) -> Result<GridResult> {
    if grid.is_empty() {
        return Err(Error::domain("hyperparameter grid is empty"));
    }
    if validation.is_empty() {
        return Err(Error::domain("validation set is empty"));
    }
    validation.check()?;
    let fitted: Vec<(Pipeline, f64)> = grid
        .par_iter()
        .map(|hp| {
            let p = Pipeline::fit(train, hp)?;
            let acc = accuracy(&p.predict_proba(&validation.x), &validation.y);
            Ok((p, acc))
        })
        .collect::<Result<_>>()?;
    let scores = fitted.iter().map(|(p, a)| (p.hp, *a)).collect();
    let best_index = (0..fitted.len())
        .min_by(|&a, &b| {
            let (pa, aa) = &fitted[a];
            let (pb, ab) = &fitted[b];
            ab.total_cmp(aa)
                .then(pa.hp.n_estimators.cmp(&pb.hp.n_estimators))
                .then(pa.hp.max_depth.cmp(&pb.hp.max_depth))
                .then(a.cmp(&b))
        })
        .expect("nonempty grid");
    let (best, validation_accuracy) = fitted.into_iter().nth(best_index).expect("index in range");
    Ok(GridResult {
        best,
        validation_accuracy,
        scores,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn data(n: usize, offset: usize) -> Dataset {
        let x = (0..n).map(|i| vec![((i + offset) % 17) as f64, (i % 2) as f64 * 3.0 + ((i * 5) % 7) as f64 * 0.1]).collect();
        let y = (0..n).map(|i| (i % 2) as u8).collect();
        Dataset::new(x, y).unwrap()
    }

    #[test]
    fn single_point_grid() {
        let hp = GbtHyperParams::new(0.3, 5, 2, 0.0);
        let r = grid_search(&data(40, 0), &data(20, 3), &[hp]).unwrap();
        assert_eq!(r.best.hp, hp);
        assert_eq!(r.scores.len(), 1);
        assert_eq!(r.validation_accuracy, 1.0);
    }

    #[test]
    fn ties_prefer_fewer_trees() {
        let grid = [GbtHyperParams::new(0.3, 20, 2, 0.0), GbtHyperParams::new(0.3, 5, 2, 0.0)];
        let r = grid_search(&data(40, 0), &data(20, 3), &grid).unwrap();
        assert_eq!(r.best.hp.n_estimators, 5);
    }

    #[test]
    fn empty_grid_rejected() {
        assert!(grid_search(&data(10, 0), &data(10, 0), &[]).is_err());
    }
}
