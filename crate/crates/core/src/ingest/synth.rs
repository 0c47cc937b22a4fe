//! Synthetic corpus with the OneStop reading schedule: ten first readings in
//! random order, a consecutive reread of the tenth article and a delayed
//! reread of one earlier article.

use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal};
use serde::{Deserialize, Serialize};

use super::{normalized_word_index, RepeatKind, Trial, WordToken};
use crate::ezreader::{self, EzParams};
use crate::seed;
use crate::{Error, Result};

/// Articles in one reading batch.
pub const BATCH_SIZE: usize = 10;
pub const CONSECUTIVE_POSITION: u8 = 11;
pub const NONCONSECUTIVE_POSITION: u8 = 12;

const CHAR_WIDTH_PX: f64 = 14.0;
const TEXT_LEFT_PX: f64 = 160.0;
const TEXT_TOP_PX: f64 = 200.0;
const LINE_HEIGHT_PX: f64 = 64.0;
const MAX_LINE_WIDTH_PX: f64 = 2240.0;

/// Inclusive range.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Range<T> {
    pub min: T,
    pub max: T,
}

impl<T: PartialOrd + Copy + std::fmt::Debug> Range<T> {
    fn check(&self, name: &str) -> Result<()> {
        if self.min <= self.max {
            Ok(())
        } else {
            Err(Error::domain(format!("{name}: min {:?} exceeds max {:?}", self.min, self.max)))
        }
    }
}

/// Multiplicative changes applied when simulating a repeated reading.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct Facilitation {
    /// Scales familiarity, lexical access and integration times.
    pub duration_scale: f64,
    /// Divides the eccentricity penalty, making parafoveal words cheaper.
    pub skip_boost: f64,
    /// Scales the integration failure probability.
    pub regression_scale: f64,
    /// Further scales the frequency and predictability slopes of the
    /// familiarity check, so rereading responds less to word properties.
    /// The intercept is moved so that a word of average frequency and
    /// predictability keeps its time.
    pub lexical_sensitivity: f64,
}

impl Default for Facilitation {
    fn default() -> Self {
        Facilitation {
            duration_scale: 0.8,
            skip_boost: 1.3,
            regression_scale: 0.7,
            lexical_sensitivity: 0.6,
        }
    }
}

impl Facilitation {
    /// Repeated-reading parameters. `words` gives the property ranges the
    /// lexical sensitivity is centred on.
    pub fn apply(&self, p: &EzParams, words: &WordPropertyRanges) -> EzParams {
        let flattened = (1.0 - self.lexical_sensitivity)
            * (p.familiarity_frequency_slope_ms * words.mean_ln_per_million() + p.familiarity_predictability_slope_ms * words.mean_predictability());
        EzParams {
            familiarity_intercept_ms: (p.familiarity_intercept_ms - flattened) * self.duration_scale,
            familiarity_frequency_slope_ms: p.familiarity_frequency_slope_ms * self.duration_scale * self.lexical_sensitivity,
            familiarity_predictability_slope_ms: p.familiarity_predictability_slope_ms * self.duration_scale * self.lexical_sensitivity,
            integration_ms: p.integration_ms * self.duration_scale,
            eccentricity_scale: p.eccentricity_scale / self.skip_boost,
            integration_failure_prob: (p.integration_failure_prob * self.regression_scale).min(1.0),
            ..p.clone()
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct WordPropertyRanges {
    pub length: Range<u32>,
    pub log2_frequency: Range<f64>,
    pub surprisal: Range<f64>,
    /// Probability that a word's length sits at the same quantile as its
    /// rarity, so rarer words tend to be longer. Marginals stay uniform.
    pub length_frequency_coupling: f64,
}

impl WordPropertyRanges {
    /// Mean of `ln(per-million frequency)` for uniform log2 frequencies.
    pub fn mean_ln_per_million(&self) -> f64 {
        let mid = (self.log2_frequency.min + self.log2_frequency.max) / 2.0;
        1e6f64.ln() - mid * std::f64::consts::LN_2
    }

    /// Mean predictability for uniform surprisals.
    pub fn mean_predictability(&self) -> f64 {
        let (a, b) = (self.surprisal.min, self.surprisal.max);
        if b - a < 1e-9 {
            return ezreader::predictability(a);
        }
        // Simpson's rule; the cap makes the integrand non-smooth near zero.
        let n = 2000;
        let h = (b - a) / n as f64;
        let f = |k: usize| ezreader::predictability(a + h * k as f64);
        let inner: f64 = (1..n).map(|k| if k % 2 == 1 { 4.0 * f(k) } else { 2.0 * f(k) }).sum();
        (f(0) + inner + f(n)) * h / 3.0 / (b - a)
    }
}

impl Default for WordPropertyRanges {
    fn default() -> Self {
        WordPropertyRanges {
            length: Range { min: 2, max: 12 },
            log2_frequency: Range { min: 8.0, max: 22.0 },
            surprisal: Range { min: 1.0, max: 20.0 },
            length_frequency_coupling: 0.6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SyntheticCorpusSpec {
    pub n_articles: usize,
    pub paragraphs_per_article: Range<u32>,
    pub words_per_paragraph: Range<u32>,
    pub n_participants: usize,
    pub rng_seed: u64,
    pub facilitation: Facilitation,
    pub word_properties: WordPropertyRanges,
    /// Log-scale SD of the per-participant multiplier on processing times.
    pub participant_speed_sd: f64,
    pub ez_params: EzParams,
}

impl Default for SyntheticCorpusSpec {
    fn default() -> Self {
        SyntheticCorpusSpec {
            n_articles: BATCH_SIZE,
            paragraphs_per_article: Range { min: 4, max: 7 },
            words_per_paragraph: Range { min: 40, max: 70 },
            n_participants: 60,
            rng_seed: 7,
            facilitation: Facilitation::default(),
            word_properties: WordPropertyRanges::default(),
            participant_speed_sd: 0.15,
            ez_params: EzParams::default(),
        }
    }
}

impl SyntheticCorpusSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_articles != BATCH_SIZE {
            return Err(Error::domain(format!("n_articles must be {BATCH_SIZE} (one reading batch)")));
        }
        if self.n_participants == 0 {
            return Err(Error::domain("n_participants must be positive"));
        }
        self.paragraphs_per_article.check("paragraphs_per_article")?;
        self.words_per_paragraph.check("words_per_paragraph")?;
        if self.paragraphs_per_article.min == 0 || self.words_per_paragraph.min == 0 {
            return Err(Error::domain("paragraph and word counts must be at least 1"));
        }
        let wp = &self.word_properties;
        wp.length.check("word_properties.length")?;
        wp.log2_frequency.check("word_properties.log2_frequency")?;
        wp.surprisal.check("word_properties.surprisal")?;
        if wp.length.min == 0 || wp.log2_frequency.min < 0.0 || wp.surprisal.min < 0.0 || !wp.log2_frequency.max.is_finite() || !wp.surprisal.max.is_finite() {
            return Err(Error::domain("word properties must be finite, lengths positive and frequencies/surprisals non-negative"));
        }
        if !(0.0..=1.0).contains(&wp.length_frequency_coupling) {
            return Err(Error::domain("length_frequency_coupling must lie in [0, 1]"));
        }
        let f = &self.facilitation;
        for (name, v) in [
            ("duration_scale", f.duration_scale),
            ("skip_boost", f.skip_boost),
            ("regression_scale", f.regression_scale),
            ("lexical_sensitivity", f.lexical_sensitivity),
        ] {
            if !(v > 0.0 && v < 2.0) {
                return Err(Error::domain(format!("facilitation {name} must lie in (0, 2), got {v}")));
            }
        }
        if !(self.participant_speed_sd.is_finite() && self.participant_speed_sd >= 0.0) {
            return Err(Error::domain("participant_speed_sd must be non-negative"));
        }
        self.ez_params.validate()
    }
}

/// Article ids (1-based) in session order; entries 11 and 12 are the rereads.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParticipantSchedule {
    pub order: Vec<u32>,
}

impl ParticipantSchedule {
    pub fn consecutive_article(&self) -> u32 {
        self.order[CONSECUTIVE_POSITION as usize - 1]
    }

    pub fn nonconsecutive_article(&self) -> u32 {
        self.order[NONCONSECUTIVE_POSITION as usize - 1]
    }
}

/// Reading schedules for `n_participants`.
///
/// Participants come in blocks of 60. Within a block each article has six
/// consecutive and six nonconsecutive rereaders, and the rereaders of one
/// article are paired with distinct partner articles. The partner offsets
/// always include 1 and 9 so that neighbouring articles share rereaders.
/// Participants beyond the last full block get unconstrained schedules.
pub fn onestop_schedule(n_participants: usize, rng: &mut ChaCha8Rng) -> Vec<ParticipantSchedule> {
    let m = BATCH_SIZE as u32;
    let block = 6 * BATCH_SIZE;
    let mut pairs: Vec<(u32, u32)> = Vec::with_capacity(n_participants);
    for _ in 0..n_participants / block {
        let mut middle: Vec<u32> = (2..=8).collect();
        middle.shuffle(rng);
        let mut offsets = vec![1, 9];
        offsets.extend_from_slice(&middle[..4]);
        offsets.shuffle(rng);
        let mut labels: Vec<u32> = (0..m).collect();
        labels.shuffle(rng);
        let mut block_pairs = Vec::with_capacity(block);
        for i in 0..m {
            for &a in &offsets[..3] {
                block_pairs.push((labels[i as usize], labels[((i + a) % m) as usize]));
            }
            for &b in &offsets[3..] {
                block_pairs.push((labels[((i + b) % m) as usize], labels[i as usize]));
            }
        }
        block_pairs.shuffle(rng);
        pairs.extend(block_pairs);
    }
    while pairs.len() < n_participants {
        let c = rng.random_range(0..m);
        let k = (c + rng.random_range(1..m)) % m;
        pairs.push((c, k));
    }

    pairs
        .into_iter()
        .map(|(consecutive, nonconsecutive)| {
            let mut rest: Vec<u32> = (0..m).filter(|&a| a != consecutive && a != nonconsecutive).collect();
            rest.shuffle(rng);
            let slot = rng.random_range(0..BATCH_SIZE - 1);
            rest.insert(slot, nonconsecutive);
            rest.push(consecutive);
            rest.push(consecutive);
            rest.push(nonconsecutive);
            ParticipantSchedule {
                order: rest.into_iter().map(|a| a + 1).collect(),
            }
        })
        .collect()
}

fn random_word(rng: &mut ChaCha8Rng, len: u32) -> String {
    (0..len).map(|_| rng.random_range(b'a'..=b'z') as char).collect()
}

fn generate_paragraph(rng: &mut ChaCha8Rng, spec: &SyntheticCorpusSpec) -> Vec<WordToken> {
    let wp = &spec.word_properties;
    let n = rng.random_range(spec.words_per_paragraph.min..=spec.words_per_paragraph.max) as usize;
    let mut words = Vec::with_capacity(n);
    let mut x = TEXT_LEFT_PX;
    let mut line = 0u32;
    for i in 0..n {
        let rarity: f64 = rng.random();
        let log2_frequency = wp.log2_frequency.min + rarity * (wp.log2_frequency.max - wp.log2_frequency.min);
        let length = if rng.random::<f64>() < wp.length_frequency_coupling {
            let span = (wp.length.max - wp.length.min + 1) as f64;
            (wp.length.min + (rarity * span).floor() as u32).min(wp.length.max)
        } else {
            rng.random_range(wp.length.min..=wp.length.max)
        };
        let surprisal = rng.random_range(wp.surprisal.min..=wp.surprisal.max);
        let width = CHAR_WIDTH_PX * (length as f64 + 1.0);
        let mut start_of_line = i == 0;
        if x + width > TEXT_LEFT_PX + MAX_LINE_WIDTH_PX && x > TEXT_LEFT_PX {
            line += 1;
            x = TEXT_LEFT_PX;
            start_of_line = true;
            if let Some(prev) = words.last_mut() {
                let prev: &mut WordToken = prev;
                prev.end_of_line = true;
            }
        }
        let top = TEXT_TOP_PX + LINE_HEIGHT_PX * line as f64;
        words.push(WordToken {
            index_in_paragraph: i + 1,
            text: random_word(rng, length),
            length,
            log2_frequency,
            surprisal,
            ia_left: x,
            ia_top: top,
            ia_right: x + width,
            ia_bottom: top + LINE_HEIGHT_PX,
            start_of_line,
            end_of_line: i + 1 == n,
            normalized_word_index: normalized_word_index(i + 1, n),
        });
        x += width;
    }
    words
}

/// First and repeated readings for every participant, in participant then
/// session order.
pub fn generate_synthetic_corpus(spec: &SyntheticCorpusSpec) -> Result<Vec<Trial>> {
    spec.validate()?;
    let master = spec.rng_seed;

    let mut text_rng = seed::stage_rng(master, "corpus/text");
    let articles: Vec<Vec<Vec<WordToken>>> = (0..spec.n_articles)
        .map(|_| {
            let k = text_rng.random_range(spec.paragraphs_per_article.min..=spec.paragraphs_per_article.max);
            (0..k).map(|_| generate_paragraph(&mut text_rng, spec)).collect()
        })
        .collect();

    let mut schedule_rng = seed::stage_rng(master, "corpus/schedule");
    let schedules = onestop_schedule(spec.n_participants, &mut schedule_rng);

    let mut speed_rng = seed::stage_rng(master, "corpus/speed");
    let speed = LogNormal::new(0.0, spec.participant_speed_sd).map_err(|e| Error::domain(e.to_string()))?;

    let mut trials = Vec::new();
    for (p, schedule) in schedules.iter().enumerate() {
        let participant_id = format!("p{:03}", p + 1);
        let factor = speed.sample(&mut speed_rng);
        let base = &spec.ez_params;
        let first = EzParams {
            familiarity_intercept_ms: base.familiarity_intercept_ms * factor,
            familiarity_frequency_slope_ms: base.familiarity_frequency_slope_ms * factor,
            familiarity_predictability_slope_ms: base.familiarity_predictability_slope_ms * factor,
            integration_ms: base.integration_ms * factor,
            ..base.clone()
        };
        let repeated = spec.facilitation.apply(&first, &spec.word_properties);

        for (slot, &article_id) in schedule.order.iter().enumerate() {
            let position = slot as u8 + 1;
            let reading_index = if position as usize <= BATCH_SIZE { 1 } else { 2 };
            let repeat_kind = RepeatKind::from_schedule(reading_index, position)?;
            let params = if reading_index == 1 { &first } else { &repeated };
            for (k, words) in articles[article_id as usize - 1].iter().enumerate() {
                let paragraph_id = k as u32 + 1;
                let stream = format!("corpus/read/{participant_id}/{article_id}/{paragraph_id}/{reading_index}");
                let sim = ezreader::simulate_scanpath(words, params, seed::derive(master, &stream))?;
                let trial = Trial {
                    participant_id: participant_id.clone(),
                    article_id,
                    paragraph_id,
                    reading_index,
                    article_position: position,
                    repeat_kind,
                    words: words.clone(),
                    scanpath: sim.fixations,
                    total_rt_ms: sim.total_time_ms,
                };
                trial.validate()?;
                trials.push(trial);
            }
        }
    }
    Ok(trials)
}
