//! Scanpath distance by duration-weighted alignment in visual-angle space.
//!
//! Fixations are mapped to angular coordinates relative to the screen
//! centre. Two scanpaths are aligned globally: leaving a fixation unmatched
//! costs its duration, matching fixations `f` and `g` at angular distance
//! `θ` costs `|d_f − d_g|·m + (d_f + d_g)·(1 − m)` with `m = modulator^θ`.

use serde::{Deserialize, Serialize};

use crate::ingest::Fixation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScasimConfig {
    pub center_x: f64,
    pub center_y: f64,
    /// Eye-to-screen distance, in the same physical unit as `unit_size`.
    pub viewing_distance: f64,
    /// Physical size of one pixel.
    pub unit_size: f64,
    /// Similarity decay per degree of visual angle, in (0, 1].
    pub modulator: f64,
    /// Divide the cost by the summed duration of both scanpaths.
    pub normalize: bool,
}

impl Default for ScasimConfig {
    fn default() -> Self {
        ScasimConfig {
            center_x: 1280.0,
            center_y: 720.0,
            viewing_distance: 77.0,
            unit_size: 1.0 / 60.0,
            modulator: 0.83,
            normalize: false,
        }
    }
}

impl ScasimConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if !(self.viewing_distance > 0.0) {
            return Err(crate::Error::domain("viewing_distance must be positive"));
        }
        if !(self.modulator > 0.0 && self.modulator <= 1.0) {
            return Err(crate::Error::domain("modulator must lie in (0, 1]"));
        }
        Ok(())
    }
}

/// `(longitude, latitude)` in degrees.
pub fn to_visual_angle(fixation: &Fixation, config: &ScasimConfig) -> (f64, f64) {
    let dx = (fixation.x_px - config.center_x) * config.unit_size;
    let dy = (fixation.y_px - config.center_y) * config.unit_size;
    (
        dx.atan2(config.viewing_distance).to_degrees(),
        dy.atan2(config.viewing_distance).to_degrees(),
    )
}

/// Cost of aligning two fixations given their angular coordinates.
pub fn substitution_cost(dur_a: f64, dur_b: f64, angle_a: (f64, f64), angle_b: (f64, f64), modulator: f64) -> f64 {
    let theta = (angle_a.0 - angle_b.0).hypot(angle_a.1 - angle_b.1);
    let m = modulator.powf(theta);
    (dur_a - dur_b).abs() * m + (dur_a + dur_b) * (1.0 - m)
}

/// Minimal alignment cost between two scanpaths.
pub fn scasim_distance(a: &[Fixation], b: &[Fixation], config: &ScasimConfig) -> f64 {
    let angles_a: Vec<_> = a.iter().map(|f| to_visual_angle(f, config)).collect();
    let angles_b: Vec<_> = b.iter().map(|f| to_visual_angle(f, config)).collect();

    // Rolling single-row DP over b.
    let mut prev: Vec<f64> = std::iter::once(0.0)
        .chain(b.iter().scan(0.0, |acc, g| {
            *acc += g.duration_ms;
            Some(*acc)
        }))
        .collect();
    let mut cur = vec![0.0; b.len() + 1];
    for (i, f) in a.iter().enumerate() {
        cur[0] = prev[0] + f.duration_ms;
        for (j, g) in b.iter().enumerate() {
            let sub = prev[j]
                + substitution_cost(f.duration_ms, g.duration_ms, angles_a[i], angles_b[j], config.modulator);
            let del = prev[j + 1] + f.duration_ms;
            let ins = cur[j] + g.duration_ms;
            cur[j + 1] = sub.min(del).min(ins);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    let cost = prev[b.len()];
    if config.normalize {
        let total: f64 = a.iter().chain(b).map(|f| f.duration_ms).sum();
        if total > 0.0 {
            cost / total
        } else {
            0.0
        }
    } else {
        cost
    }
}

/// Symmetric pairwise distance matrix with a zero diagonal.
pub fn distance_matrix(scanpaths: &[Vec<Fixation>], config: &ScasimConfig) -> Vec<Vec<f64>> {
    use rayon::prelude::*;
    let n = scanpaths.len();
    let upper: Vec<Vec<f64>> = (0..n)
        .into_par_iter()
        .map(|i| {
            (i + 1..n)
                .map(|j| scasim_distance(&scanpaths[i], &scanpaths[j], config))
                .collect()
        })
        .collect();
    let mut m = vec![vec![0.0; n]; n];
    for i in 0..n {
        for (k, &d) in upper[i].iter().enumerate() {
            let j = i + 1 + k;
            m[i][j] = d;
            m[j][i] = d;
        }
    }
    m
}
