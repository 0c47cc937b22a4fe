//! A serial-attention reading simulator in the E-Z Reader family, plus the
//! "statistical subject" aggregation of many simulated readers.
//!
//! Positions are measured in character spaces along a single virtual line:
//! word `i` occupies `[start_i, start_i + len_i)` and the blank before a word
//! belongs to that word. Screen coordinates of emitted fixations are the
//! centres of the interest areas.

use std::collections::VecDeque;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma, Normal};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::features::{self, FeatureVector};
use crate::ingest::{Fixation, WordToken};
use crate::measures;
use crate::scasim::{self, ScasimConfig};
use crate::seed;
use crate::{Error, Result};

/// Simulator parameters. Field names follow their role; the conventional
/// symbols are accepted as aliases when deserialising.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EzParams {
    #[serde(alias = "A")]
    pub attention_shift_ms: f64,
    #[serde(alias = "alpha1")]
    pub familiarity_intercept_ms: f64,
    #[serde(alias = "alpha2")]
    pub familiarity_frequency_slope_ms: f64,
    #[serde(alias = "alpha3")]
    pub familiarity_predictability_slope_ms: f64,
    /// Ratio of lexical access to the familiarity check.
    #[serde(alias = "delta")]
    pub lexical_access_ratio: f64,
    /// Carried for completeness; not used by the process.
    pub epsilon1: f64,
    pub epsilon2: f64,
    pub epsilon3: f64,
    #[serde(alias = "eta1")]
    pub landing_sd_intercept: f64,
    #[serde(alias = "eta2")]
    pub landing_sd_slope: f64,
    #[serde(alias = "I")]
    pub integration_ms: f64,
    #[serde(alias = "lambda")]
    pub refixation_slope: f64,
    #[serde(alias = "M1")]
    pub labile_program_ms: f64,
    #[serde(alias = "M2")]
    pub nonlabile_program_ms: f64,
    #[serde(alias = "omega1")]
    pub range_error_intercept: f64,
    #[serde(alias = "omega2")]
    pub range_error_divisor: f64,
    #[serde(alias = "pF")]
    pub integration_failure_prob: f64,
    /// Optimal saccade length in character spaces.
    #[serde(alias = "psi")]
    pub optimal_saccade_length: f64,
    #[serde(alias = "S")]
    pub saccade_ms: f64,
    /// Stage-duration standard deviation as a percentage of the mean.
    #[serde(alias = "sigma_gamma")]
    pub gamma_sd_percent: f64,
    #[serde(alias = "V")]
    pub eye_mind_lag_ms: f64,
    /// Carried for completeness; not used by the process.
    pub xi: f64,
    pub include_regression_trials: bool,
    /// Familiarity check time is multiplied by
    /// `eccentricity_base ^ (mean letter eccentricity in degrees * eccentricity_scale)`.
    pub eccentricity_base: f64,
    pub eccentricity_scale: f64,
    pub degrees_per_char: f64,
}

impl Default for EzParams {
    fn default() -> Self {
        EzParams {
            attention_shift_ms: 25.0,
            familiarity_intercept_ms: 124.0,
            familiarity_frequency_slope_ms: 11.1,
            familiarity_predictability_slope_ms: 76.0,
            lexical_access_ratio: 1.68,
            epsilon1: 0.1,
            epsilon2: 0.5,
            epsilon3: 1.0,
            landing_sd_intercept: 0.5,
            landing_sd_slope: 0.1,
            integration_ms: 50.0,
            refixation_slope: 0.25,
            labile_program_ms: 150.0,
            nonlabile_program_ms: 25.0,
            range_error_intercept: 6.0,
            range_error_divisor: 3.0,
            integration_failure_prob: 0.01,
            optimal_saccade_length: 7.0,
            saccade_ms: 25.0,
            gamma_sd_percent: 20.0,
            eye_mind_lag_ms: 60.0,
            xi: 0.5,
            include_regression_trials: true,
            eccentricity_base: 1.15,
            eccentricity_scale: 1.0,
            degrees_per_char: 0.5,
        }
    }
}

impl EzParams {
    pub fn validate(&self) -> Result<()> {
        let durations = [
            ("attention_shift_ms", self.attention_shift_ms),
            ("familiarity_intercept_ms", self.familiarity_intercept_ms),
            ("integration_ms", self.integration_ms),
            ("labile_program_ms", self.labile_program_ms),
            ("nonlabile_program_ms", self.nonlabile_program_ms),
            ("saccade_ms", self.saccade_ms),
            ("eye_mind_lag_ms", self.eye_mind_lag_ms),
        ];
        for (name, v) in durations {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::domain(format!("{name} must be a finite non-negative duration, got {v}")));
            }
        }
        let finite = [
            ("familiarity_frequency_slope_ms", self.familiarity_frequency_slope_ms),
            ("familiarity_predictability_slope_ms", self.familiarity_predictability_slope_ms),
            ("lexical_access_ratio", self.lexical_access_ratio),
            ("landing_sd_intercept", self.landing_sd_intercept),
            ("landing_sd_slope", self.landing_sd_slope),
            ("refixation_slope", self.refixation_slope),
            ("range_error_intercept", self.range_error_intercept),
            ("optimal_saccade_length", self.optimal_saccade_length),
            ("eccentricity_scale", self.eccentricity_scale),
            ("degrees_per_char", self.degrees_per_char),
        ];
        for (name, v) in finite {
            if !v.is_finite() {
                return Err(Error::domain(format!("{name} must be finite")));
            }
        }
        if self.lexical_access_ratio < 0.0 || self.landing_sd_intercept < 0.0 || self.landing_sd_slope < 0.0 || self.refixation_slope < 0.0 {
            return Err(Error::domain("lexical access ratio, landing SDs and refixation slope must be non-negative"));
        }
        if !(self.range_error_divisor.is_finite() && self.range_error_divisor != 0.0) {
            return Err(Error::domain("range_error_divisor must be finite and nonzero"));
        }
        if !(0.0..=1.0).contains(&self.integration_failure_prob) {
            return Err(Error::domain("integration_failure_prob must lie in [0, 1]"));
        }
        if !(self.gamma_sd_percent.is_finite() && self.gamma_sd_percent > 0.0) {
            return Err(Error::domain("gamma_sd_percent must be positive"));
        }
        if !(self.eccentricity_base.is_finite() && self.eccentricity_base > 0.0) {
            return Err(Error::domain("eccentricity_base must be positive"));
        }
        Ok(())
    }

    /// Mean familiarity check time for a word before eccentricity.
    pub fn familiarity_mean_ms(&self, word: &WordToken) -> f64 {
        let per_million = 1e6 * (-word.log2_frequency).exp2();
        let pred = predictability(word.surprisal);
        (self.familiarity_intercept_ms - self.familiarity_frequency_slope_ms * per_million.ln() - self.familiarity_predictability_slope_ms * pred).max(0.0)
    }
}

/// Cloze-style predictability derived from surprisal, capped at 0.95.
pub fn predictability(surprisal: f64) -> f64 {
    (-surprisal).exp2().min(0.95)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulatedScanpath {
    pub fixations: Vec<Fixation>,
    pub total_time_ms: f64,
    /// Number of post-lexical integration failures that triggered a
    /// regression.
    pub integration_failures: u32,
}

fn check_paragraph(words: &[WordToken]) -> Result<()> {
    if words.is_empty() {
        return Err(Error::domain("cannot simulate an empty paragraph"));
    }
    for w in words {
        if !(w.log2_frequency.is_finite() && w.log2_frequency >= 0.0) {
            return Err(Error::domain(format!(
                "word {} has no valid positive frequency (log2 frequency {})",
                w.index_in_paragraph, w.log2_frequency
            )));
        }
        if !(w.surprisal.is_finite() && w.surprisal >= 0.0) {
            return Err(Error::domain(format!("word {} has invalid surprisal", w.index_in_paragraph)));
        }
        if w.length == 0 {
            return Err(Error::domain(format!("word {} has zero length", w.index_in_paragraph)));
        }
    }
    Ok(())
}

pub fn simulate_scanpath(words: &[WordToken], params: &EzParams, rng_seed: u64) -> Result<SimulatedScanpath> {
    check_paragraph(words)?;
    params.validate()?;
    let mut rng = seed::rng(rng_seed);
    Ok(Simulation::new(words, params, &mut rng).run())
}

/// `n` independent readers with seeds derived from `(seed, index)`.
pub fn simulate_statistical_subjects(words: &[WordToken], params: &EzParams, n: usize, seed: u64) -> Result<Vec<SimulatedScanpath>> {
    if n == 0 {
        return Err(Error::domain("number of statistical subjects must be positive"));
    }
    check_paragraph(words)?;
    params.validate()?;
    Ok((0..n)
        .into_par_iter()
        .map(|i| {
            let mut rng = seed::rng(seed::derive_indexed(seed, "ezreader", i as u64));
            Simulation::new(words, params, &mut rng).run()
        })
        .collect())
}

const MAX_EVENTS: usize = 1_000_000;

#[derive(Debug, Clone, Copy)]
enum Lexical {
    Familiarity {
        word: usize,
        /// Remaining work in eccentricity-free milliseconds.
        work_left: f64,
        factor: f64,
        seg_start: f64,
    },
    Access {
        word: usize,
        end: f64,
    },
    Shift {
        to: usize,
        end: f64,
    },
    Done,
}

#[derive(Debug, Clone, Copy)]
enum Event {
    Lexical,
    Integration(usize),
    Labile,
    Nonlabile(usize),
    Saccade,
    Visual,
}

struct Simulation<'a, 'r> {
    p: &'a EzParams,
    words: &'a [WordToken],
    starts: Vec<f64>,
    line_end: f64,
    rng: &'r mut ChaCha8Rng,
    cv: f64,

    t: f64,
    eye: f64,
    visual_eye: f64,
    fix_start: f64,
    fixating: bool,
    raw: Vec<(f64, f64)>,

    lexical: Lexical,
    integrations: Vec<(usize, f64)>,
    labile: Option<(usize, f64)>,
    nonlabile: Vec<(usize, f64)>,
    ready: VecDeque<usize>,
    saccade: Option<(f64, f64)>,
    visual: Option<f64>,
    failures: u32,
}

impl<'a, 'r> Simulation<'a, 'r> {
    fn new(words: &'a [WordToken], p: &'a EzParams, rng: &'r mut ChaCha8Rng) -> Self {
        let mut starts = Vec::with_capacity(words.len());
        let mut pos = 0.0;
        for w in words {
            starts.push(pos);
            pos += w.length as f64 + 1.0;
        }
        let line_end = pos - 1.0;
        let eye = starts[0] + words[0].length as f64 / 2.0;
        let mut sim = Simulation {
            p,
            words,
            starts,
            line_end,
            rng,
            cv: p.gamma_sd_percent / 100.0,
            t: 0.0,
            eye,
            visual_eye: eye,
            fix_start: 0.0,
            fixating: true,
            raw: Vec::new(),
            lexical: Lexical::Done,
            integrations: Vec::new(),
            labile: None,
            nonlabile: Vec::new(),
            ready: VecDeque::new(),
            saccade: None,
            visual: None,
            failures: 0,
        };
        sim.begin_familiarity(0);
        sim
    }

    fn gamma(&mut self, mean: f64) -> f64 {
        if mean <= 0.0 {
            return 0.0;
        }
        let shape = 1.0 / (self.cv * self.cv);
        match Gamma::new(shape, mean / shape) {
            Ok(g) => g.sample(self.rng),
            Err(_) => mean,
        }
    }

    fn center(&self, w: usize) -> f64 {
        self.starts[w] + self.words[w].length as f64 / 2.0
    }

    fn word_at(&self, pos: f64) -> usize {
        // The blank before a word belongs to that word.
        let k = self.starts.partition_point(|&s| s - 1.0 <= pos);
        k.saturating_sub(1)
    }

    fn eccentricity_factor(&self, w: usize) -> f64 {
        let len = self.words[w].length as usize;
        let start = self.starts[w];
        let mean_chars = (0..len).map(|k| (start + k as f64 + 0.5 - self.visual_eye).abs()).sum::<f64>() / len as f64;
        let degrees = mean_chars * self.p.degrees_per_char;
        self.p.eccentricity_base.powf(degrees * self.p.eccentricity_scale)
    }

    fn begin_familiarity(&mut self, w: usize) {
        let base = self.p.familiarity_mean_ms(&self.words[w]);
        let work_left = self.gamma(base);
        let factor = self.eccentricity_factor(w);
        self.lexical = Lexical::Familiarity {
            word: w,
            work_left,
            factor,
            seg_start: self.t,
        };
    }

    fn begin_access(&mut self, w: usize) {
        let mean = self.p.lexical_access_ratio * self.p.familiarity_mean_ms(&self.words[w]);
        let end = self.t + self.gamma(mean);
        self.lexical = Lexical::Access { word: w, end };
    }

    fn program(&mut self, target: usize) {
        let end = self.t + self.gamma(self.p.labile_program_ms);
        self.labile = Some((target, end));
    }

    fn next_event(&self) -> Option<(f64, Event)> {
        let mut best: Option<(f64, Event)> = None;
        let mut consider = |time: f64, ev: Event| {
            if best.is_none_or(|(b, _)| time < b) {
                best = Some((time, ev));
            }
        };
        match self.lexical {
            Lexical::Familiarity { work_left, factor, seg_start, .. } => consider(seg_start + work_left * factor, Event::Lexical),
            Lexical::Access { end, .. } | Lexical::Shift { end, .. } => consider(end, Event::Lexical),
            Lexical::Done => {}
        }
        for (i, &(_, end)) in self.integrations.iter().enumerate() {
            consider(end, Event::Integration(i));
        }
        if let Some((_, end)) = self.labile {
            consider(end, Event::Labile);
        }
        for (i, &(_, end)) in self.nonlabile.iter().enumerate() {
            consider(end, Event::Nonlabile(i));
        }
        if let Some((_, end)) = self.saccade {
            consider(end, Event::Saccade);
        }
        if let Some(end) = self.visual {
            consider(end, Event::Visual);
        }
        best
    }

    fn run(mut self) -> SimulatedScanpath {
        let n = self.words.len();
        let mut finished = false;
        for _ in 0..MAX_EVENTS {
            let Some((time, event)) = self.next_event() else { break };
            self.t = time.max(self.t);
            match event {
                Event::Lexical => self.on_lexical(n),
                Event::Integration(i) => {
                    let (w, _) = self.integrations.remove(i);
                    let fails = self.p.include_regression_trials && self.rng.random::<f64>() < self.p.integration_failure_prob;
                    if fails {
                        self.on_integration_failure(w);
                    } else if w + 1 == n && matches!(self.lexical, Lexical::Done) && self.integrations.is_empty() {
                        finished = true;
                    }
                }
                Event::Labile => {
                    let (target, _) = self.labile.take().expect("labile program present");
                    let end = self.t + self.gamma(self.p.nonlabile_program_ms);
                    self.nonlabile.push((target, end));
                }
                Event::Nonlabile(i) => {
                    let (target, _) = self.nonlabile.remove(i);
                    if self.saccade.is_some() {
                        self.ready.push_back(target);
                    } else {
                        self.launch(target);
                    }
                }
                Event::Saccade => self.on_landing(),
                Event::Visual => {
                    self.visual = None;
                    self.visual_eye = self.eye;
                    if let Lexical::Familiarity { word, work_left, factor, seg_start } = self.lexical {
                        let done = (self.t - seg_start) / factor;
                        self.lexical = Lexical::Familiarity {
                            word,
                            work_left: (work_left - done).max(0.0),
                            factor: self.eccentricity_factor(word),
                            seg_start: self.t,
                        };
                    }
                }
            }
            if finished {
                break;
            }
        }
        if self.fixating {
            self.raw.push((self.eye, self.t - self.fix_start));
        }
        self.emit()
    }

    fn on_lexical(&mut self, n: usize) {
        match self.lexical {
            Lexical::Familiarity { word, .. } => {
                if word + 1 < n {
                    self.program(word + 1);
                }
                self.begin_access(word);
            }
            Lexical::Access { word, .. } => {
                let end = self.t + self.gamma(self.p.integration_ms);
                self.integrations.push((word, end));
                if word + 1 < n {
                    let end = self.t + self.gamma(self.p.attention_shift_ms);
                    self.lexical = Lexical::Shift { to: word + 1, end };
                } else {
                    self.lexical = Lexical::Done;
                }
            }
            Lexical::Shift { to, .. } => self.begin_familiarity(to),
            Lexical::Done => {}
        }
    }

    /// Attention returns to the failed word and the eyes are sent back to it,
    /// or to the word before it when the eyes have not yet left it.
    fn on_integration_failure(&mut self, w: usize) {
        self.failures += 1;
        self.integrations.retain(|&(x, _)| x < w);
        let eye_word = self.word_at(self.eye);
        let target = if eye_word > w { w } else { w.saturating_sub(1) };
        self.begin_access(w);
        self.program(target);
    }

    fn launch(&mut self, target: usize) {
        let launch_duration = self.t - self.fix_start;

        if self.fixating {
            self.raw.push((self.eye, launch_duration));
            self.fixating = false;
        }
        let intended = self.center(target) - self.eye;
        let amplitude = intended.abs();
        let dir = if intended < 0.0 { -1.0 } else { 1.0 };
        let systematic = (self.p.optimal_saccade_length - amplitude) * (self.p.range_error_intercept - launch_duration.max(1.0).ln()) / self.p.range_error_divisor;
        let sd = self.p.landing_sd_intercept + self.p.landing_sd_slope * amplitude;
        let noise = if sd > 0.0 {
            Normal::new(0.0, sd).map(|d| d.sample(self.rng)).unwrap_or(0.0)
        } else {
            0.0
        };
        let landing = (self.eye + dir * (amplitude + systematic) + noise).clamp(0.0, self.line_end);
        let end = self.t + self.gamma(self.p.saccade_ms);
        self.saccade = Some((landing, end));
    }

    fn on_landing(&mut self) {
        let (landing, _) = self.saccade.take().expect("saccade in flight");
        self.eye = landing;
        self.fix_start = self.t;
        self.fixating = true;
        let lag = self.gamma(self.p.eye_mind_lag_ms);
        self.visual = Some(self.t + lag);

        // Only when no other program is pending: a refixation must not
        // cancel a program already heading elsewhere.
        if self.labile.is_none() {
            let w = self.word_at(landing);
            let deviation = (landing - self.center(w)).abs();
            let p = (self.p.refixation_slope * deviation).min(1.0);
            if self.rng.random::<f64>() < p {
                self.program(w);
            }
        }
        if let Some(target) = self.ready.pop_front() {
            self.launch(target);
        }
    }

    fn emit(self) -> SimulatedScanpath {
        let kept: Vec<(usize, f64)> = self
            .raw
            .iter()
            .filter(|&&(_, d)| d > 0.0)
            .map(|&(pos, d)| (self.word_at(pos), d))
            .collect();
        let fixations = kept
            .iter()
            .enumerate()
            .map(|(i, &(w, d))| {
                let (x, y) = self.words[w].center();
                Fixation {
                    index: i as u32 + 1,
                    duration_ms: d,
                    x_px: x,
                    y_px: y,
                    word_index: Some(w + 1),
                    next_word_index: kept.get(i + 1).map(|&(nw, _)| nw + 1),
                }
            })
            .collect();
        SimulatedScanpath {
            fixations,
            total_time_ms: self.t,
            integration_failures: self.failures,
        }
    }
}

/// Word measures averaged over statistical subjects.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SyntheticWord {
    pub tfd_ms: f64,
    pub ffd_ms: f64,
    pub gd_ms: f64,
    pub fixation_count: f64,
    pub regression_in_count: f64,
    pub regression_out_full_count: f64,
    /// Fraction of subjects who never fixated the word.
    pub total_skip: f64,
    pub expected_dwell_ms: f64,
    pub dwell_time_pct: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticWordMeasures {
    pub words: Vec<SyntheticWord>,
    pub paragraph_rt_ms: f64,
}

/// Trial-level measures comparable across human and synthetic readers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComparisonMeasures {
    pub fixation_count: f64,
    pub mean_tfd_ms: f64,
    pub regression_rate: f64,
    pub skip_rate: f64,
}

impl ComparisonMeasures {
    pub const NAMES: [&'static str; 4] = ["fixation_count", "mean_tfd", "regression_rate", "skip_rate"];

    pub fn to_array(&self) -> [f64; 4] {
        [self.fixation_count, self.mean_tfd_ms, self.regression_rate, self.skip_rate]
    }

    /// The same measures for a single human reading.
    pub fn from_word_measures(words: &[measures::WordMeasures]) -> Result<Self> {
        if words.is_empty() {
            return Err(Error::domain("no words"));
        }
        let n = words.len() as f64;
        let fixated: Vec<_> = words.iter().filter(|w| w.is_fixated()).collect();
        Ok(ComparisonMeasures {
            fixation_count: words.iter().map(|w| w.fixation_count as f64).sum::<f64>() / n,
            mean_tfd_ms: mean_or_zero(fixated.iter().map(|w| w.tfd_ms)),
            regression_rate: words.iter().map(|w| w.regression_in_count as f64).sum::<f64>() / n,
            skip_rate: words.iter().map(|w| w.total_skip as f64).sum::<f64>() / n,
        })
    }
}

fn mean_or_zero(xs: impl Iterator<Item = f64>) -> f64 {
    let (s, c) = xs.fold((0.0, 0usize), |(s, c), x| (s + x, c + 1));
    if c == 0 { 0.0 } else { s / c as f64 }
}

impl SyntheticWordMeasures {
    /// Expected-value analogues of the per-reading comparison measures: counts
    /// are weighted by the probability of fixating the word.
    pub fn comparison_measures(&self) -> Result<ComparisonMeasures> {
        if self.words.is_empty() {
            return Err(Error::domain("no words"));
        }
        let n = self.words.len() as f64;
        Ok(ComparisonMeasures {
            fixation_count: self.words.iter().map(|w| w.fixation_count * (1.0 - w.total_skip)).sum::<f64>() / n,
            mean_tfd_ms: mean_or_zero(self.words.iter().filter(|w| w.total_skip < 1.0).map(|w| w.tfd_ms)),
            regression_rate: self.words.iter().map(|w| w.regression_in_count * (1.0 - w.total_skip)).sum::<f64>() / n,
            skip_rate: self.words.iter().map(|w| w.total_skip).sum::<f64>() / n,
        })
    }
}

pub fn aggregate_statistical_subjects(n_words: usize, scanpaths: &[SimulatedScanpath]) -> Result<SyntheticWordMeasures> {
    if scanpaths.is_empty() {
        return Err(Error::domain("at least one scanpath is required"));
    }
    let per_subject: Vec<Vec<measures::WordMeasures>> = scanpaths
        .iter()
        .map(|s| measures::word_measures_for(n_words, &s.fixations, s.total_time_ms))
        .collect();
    let total = scanpaths.len() as f64;
    let mut words = Vec::with_capacity(n_words);
    for w in 0..n_words {
        let mut out = SyntheticWord::default();
        let mut fixators = 0usize;
        for subject in &per_subject {
            let m = &subject[w];
            if !m.is_fixated() {
                continue;
            }
            fixators += 1;
            out.tfd_ms += m.tfd_ms;
            out.ffd_ms += m.ffd_ms;
            if m.first_pass_fixated {
                out.gd_ms += m.gd_ms;
            }
            out.fixation_count += m.fixation_count as f64;
            out.regression_in_count += m.regression_in_count as f64;
            out.regression_out_full_count += m.regression_out_full_count as f64;
        }
        if fixators > 0 {
            let s = fixators as f64;
            out.tfd_ms /= s;
            out.ffd_ms /= s;
            out.gd_ms /= s;
            out.fixation_count /= s;
            out.regression_in_count /= s;
            out.regression_out_full_count /= s;
        }
        out.total_skip = 1.0 - fixators as f64 / total;
        out.expected_dwell_ms = out.tfd_ms * (1.0 - out.total_skip);
        words.push(out);
    }
    let paragraph_rt_ms: f64 = words.iter().map(|w| w.expected_dwell_ms).sum();
    for w in &mut words {
        w.dwell_time_pct = if paragraph_rt_ms > 0.0 { w.expected_dwell_ms / paragraph_rt_ms } else { 0.0 };
    }
    Ok(SyntheticWordMeasures { words, paragraph_rt_ms })
}

/// Element-wise mean of the per-scanpath global feature vectors.
pub fn synthetic_global_features(scanpaths: &[SimulatedScanpath], words: &[WordToken]) -> Result<FeatureVector> {
    let vectors: Vec<FeatureVector> = scanpaths
        .par_iter()
        .map(|s| features::featurize_parts(words, &s.fixations, s.total_time_ms).map(|f| f.vector))
        .collect::<Result<_>>()?;
    FeatureVector::mean(&vectors).ok_or_else(|| Error::domain("at least one scanpath is required"))
}

/// Index of the scanpath with the smallest mean distance to all others;
/// ties go to the lowest index.
pub fn prototype_scanpath(scanpaths: &[Vec<Fixation>], config: &ScasimConfig) -> Result<usize> {
    if scanpaths.is_empty() {
        return Err(Error::domain("at least one scanpath is required"));
    }
    config.validate()?;
    let n = scanpaths.len();
    if n == 1 {
        return Ok(0);
    }
    let matrix = scasim::distance_matrix(scanpaths, config);
    let mut best = 0;
    let mut best_mean = f64::INFINITY;
    for (i, row) in matrix.iter().enumerate() {
        let mean = row.iter().sum::<f64>() / (n - 1) as f64;
        if mean < best_mean {
            best_mean = mean;
            best = i;
        }
    }
    Ok(best)
}
