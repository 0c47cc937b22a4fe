//! Word-level eye-movement measures and the trial-level standard measures.
//!
//! Off-text fixations (no interest area) contribute to no word and break
//! adjacency: a run ends at them and no regression is counted across them.

use serde::{Deserialize, Serialize};

use crate::ingest::{Fixation, Trial};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct WordMeasures {
    /// Total fixation duration (IA_DWELL_TIME).
    pub tfd_ms: f64,
    /// First fixation duration.
    pub ffd_ms: f64,
    /// Gaze duration: dwell time of the first run (IA_FIRST_RUN_DWELL_TIME).
    pub gd_ms: f64,
    pub fixation_count: u32,
    /// Number of fixations in the first run.
    pub first_run_count: u32,
    /// Entries from a higher word index.
    pub regression_in_count: u32,
    /// Exits to a lower word index.
    pub regression_out_full_count: u32,
    /// 1 if the word was never fixated.
    pub total_skip: u8,
    /// Whether the first fixation on the word preceded any fixation on a
    /// later word.
    pub first_pass_fixated: bool,
    pub dwell_time_pct: f64,
}

impl WordMeasures {
    pub fn is_fixated(&self) -> bool {
        self.fixation_count > 0
    }
}

/// Word measures for a validated trial.
pub fn word_measures(trial: &Trial) -> Vec<WordMeasures> {
    word_measures_for(trial.n_words(), &trial.scanpath, trial.total_rt_ms)
}

/// Word measures for `n_words` interest areas given a scanpath. Fixations on
/// indices outside `1..=n_words` are treated as off-text.
pub fn word_measures_for(n_words: usize, scanpath: &[Fixation], total_rt_ms: f64) -> Vec<WordMeasures> {
    let mut out = vec![WordMeasures::default(); n_words];
    let on_text = |f: &Fixation| f.word_index.filter(|&w| w >= 1 && w <= n_words).map(|w| w - 1);

    let mut prev: Option<usize> = None;
    let mut open_first_run: Option<usize> = None;
    let mut furthest: Option<usize> = None;

    for f in scanpath {
        let Some(w) = on_text(f) else {
            prev = None;
            open_first_run = None;
            continue;
        };
        let m = &mut out[w];
        let first_visit = m.fixation_count == 0;
        m.tfd_ms += f.duration_ms;
        m.fixation_count += 1;

        if first_visit {
            m.ffd_ms = f.duration_ms;
            m.gd_ms = f.duration_ms;
            m.first_run_count = 1;
            m.first_pass_fixated = furthest.map_or(true, |u| u <= w);
            open_first_run = Some(w);
        } else if prev == Some(w) && open_first_run == Some(w) {
            m.gd_ms += f.duration_ms;
            m.first_run_count += 1;
        } else {
            open_first_run = None;
        }

        if let Some(u) = prev {
            if u > w {
                out[w].regression_in_count += 1;
                out[u].regression_out_full_count += 1;
            }
        }
        prev = Some(w);
        furthest = Some(furthest.map_or(w, |u| u.max(w)));
    }

    for m in &mut out {
        m.total_skip = u8::from(m.fixation_count == 0);
        m.dwell_time_pct = if total_rt_ms > 0.0 {
            m.tfd_ms / total_rt_ms
        } else {
            0.0
        };
    }
    out
}

/// The eight trial-level standard measures.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct TrialGlobalMeasures {
    pub mean_tfd: f64,
    pub mean_ffd: f64,
    pub mean_gd: f64,
    /// Mean fixations per word, skipped words included.
    pub mean_fixation_count: f64,
    pub skip_rate: f64,
    /// Regression-in events per word.
    pub regression_rate: f64,
    /// Fraction of fixated words with TFD > GD.
    pub num_words_tfd_gt_gd_frac: f64,
    /// Mean over refixated words of `(TFD - GD) / extra fixations`.
    pub mean_without_first_run_dwell_time: f64,
}

impl TrialGlobalMeasures {
    pub const NAMES: [&'static str; 8] = [
        "mean_tfd",
        "mean_ffd",
        "mean_gd",
        "mean_fixation_count",
        "skip_rate",
        "regression_rate",
        "num_words_tfd_gt_gd_frac",
        "mean_without_first_run_dwell_time",
    ];

    pub fn to_array(&self) -> [f64; 8] {
        [
            self.mean_tfd,
            self.mean_ffd,
            self.mean_gd,
            self.mean_fixation_count,
            self.skip_rate,
            self.regression_rate,
            self.num_words_tfd_gt_gd_frac,
            self.mean_without_first_run_dwell_time,
        ]
    }
}

/// Aggregates word measures into trial-level measures. Duration means are
/// taken over fixated words only and are 0 when every word was skipped.
pub fn trial_global_measures(words: &[WordMeasures], _total_rt_ms: f64) -> Result<TrialGlobalMeasures> {
    if words.is_empty() {
        return Err(Error::domain("trial-level measures need at least one word"));
    }
    let n = words.len() as f64;
    let fixated: Vec<&WordMeasures> = words.iter().filter(|w| w.is_fixated()).collect();
    let mean_over = |f: &dyn Fn(&WordMeasures) -> f64| {
        if fixated.is_empty() {
            0.0
        } else {
            fixated.iter().map(|w| f(w)).sum::<f64>() / fixated.len() as f64
        }
    };
    let refixated: Vec<f64> = words
        .iter()
        .filter(|w| w.fixation_count > w.first_run_count)
        .map(|w| (w.tfd_ms - w.gd_ms) / f64::from(w.fixation_count - w.first_run_count))
        .collect();

    Ok(TrialGlobalMeasures {
        mean_tfd: mean_over(&|w| w.tfd_ms),
        mean_ffd: mean_over(&|w| w.ffd_ms),
        mean_gd: mean_over(&|w| w.gd_ms),
        mean_fixation_count: words.iter().map(|w| f64::from(w.fixation_count)).sum::<f64>() / n,
        skip_rate: words.iter().map(|w| f64::from(w.total_skip)).sum::<f64>() / n,
        regression_rate: words.iter().map(|w| f64::from(w.regression_in_count)).sum::<f64>() / n,
        num_words_tfd_gt_gd_frac: if fixated.is_empty() {
            0.0
        } else {
            fixated.iter().filter(|w| w.tfd_ms > w.gd_ms).count() as f64 / fixated.len() as f64
        },
        mean_without_first_run_dwell_time: if refixated.is_empty() {
            0.0
        } else {
            refixated.iter().sum::<f64>() / refixated.len() as f64
        },
    })
}

/// Words read per second.
pub fn reading_speed(trial: &Trial) -> Result<f64> {
    reading_speed_for(trial.n_words(), trial.total_rt_ms)
}

pub fn reading_speed_for(n_words: usize, total_rt_ms: f64) -> Result<f64> {
    if !(total_rt_ms > 0.0) {
        return Err(Error::domain(format!(
            "reading speed needs positive reading time, got {total_rt_ms}"
        )));
    }
    Ok(n_words as f64 / (total_rt_ms / 1000.0))
}
