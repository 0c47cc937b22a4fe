//! Domain types for reading trials and their ingestion.
//!
//! A [`Trial`] is one participant reading one paragraph once. Word-level
//! linguistic properties travel with the trial so that every downstream
//! feature can be computed from a trial alone.

mod report;
mod synth;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use report::{
    parse_fixation_report, read_trials, write_corpus, write_trials, ColumnSchema,
    FIXATION_REPORT_FILE, IA_REPORT_FILE,
};
pub use synth::{
    generate_synthetic_corpus, onestop_schedule, Facilitation, ParticipantSchedule, Range,
    SyntheticCorpusSpec, WordPropertyRanges, BATCH_SIZE, CONSECUTIVE_POSITION,
    NONCONSECUTIVE_POSITION,
};

/// One word interest area.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WordToken {
    /// 1-based position in the paragraph.
    pub index_in_paragraph: usize,
    pub text: String,
    /// Characters, punctuation excluded.
    pub length: u32,
    /// `-log2 p(word)`; larger values are rarer words.
    pub log2_frequency: f64,
    /// `-log2 p(word | context)` in bits.
    pub surprisal: f64,
    pub ia_left: f64,
    pub ia_top: f64,
    pub ia_right: f64,
    pub ia_bottom: f64,
    pub start_of_line: bool,
    pub end_of_line: bool,
    pub normalized_word_index: f64,
}

impl WordToken {
    /// Screen centre of the interest area.
    pub fn center(&self) -> (f64, f64) {
        (
            0.5 * (self.ia_left + self.ia_right),
            0.5 * (self.ia_top + self.ia_bottom),
        )
    }
}

/// `(index - 1) / (n - 1)`, or 0 for a one-word paragraph.
pub fn normalized_word_index(index: usize, n_words: usize) -> f64 {
    if n_words <= 1 {
        0.0
    } else {
        (index as f64 - 1.0) / (n_words as f64 - 1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fixation {
    /// 1-based order within the trial.
    pub index: u32,
    pub duration_ms: f64,
    pub x_px: f64,
    pub y_px: f64,
    /// 1-based word index; `None` for off-text fixations.
    pub word_index: Option<usize>,
    pub next_word_index: Option<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RepeatKind {
    None,
    Consecutive,
    Nonconsecutive,
}

impl RepeatKind {
    /// Repeat kind implied by the reading schedule: repeated readings sit at
    /// position 11 (consecutive) or 12 (nonconsecutive), first readings at
    /// positions 1 through 10.
    pub fn from_schedule(reading_index: u8, article_position: u8) -> Result<Self> {
        match (reading_index, article_position) {
            (1, 1..=BATCH_SIZE_U8) => Ok(RepeatKind::None),
            (2, CONSECUTIVE_POSITION) => Ok(RepeatKind::Consecutive),
            (2, NONCONSECUTIVE_POSITION) => Ok(RepeatKind::Nonconsecutive),
            _ => Err(Error::Integrity(format!(
                "reading {reading_index} at article position {article_position} does not fit the schedule"
            ))),
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            RepeatKind::None => "none",
            RepeatKind::Consecutive => "consecutive",
            RepeatKind::Nonconsecutive => "nonconsecutive",
        }
    }
}

const BATCH_SIZE_U8: u8 = BATCH_SIZE as u8;

/// Identifies one trial: a participant reading a paragraph for the first or
/// second time.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TrialKey {
    pub participant_id: String,
    pub article_id: u32,
    pub paragraph_id: u32,
    pub reading_index: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trial {
    pub participant_id: String,
    pub article_id: u32,
    pub paragraph_id: u32,
    /// 1 for a first reading, 2 for a repeated reading.
    pub reading_index: u8,
    /// Position of the article in the session, 1 through 12.
    pub article_position: u8,
    pub repeat_kind: RepeatKind,
    pub words: Vec<WordToken>,
    pub scanpath: Vec<Fixation>,
    /// Paragraph reading time including saccades.
    pub total_rt_ms: f64,
}

impl Trial {
    pub fn key(&self) -> TrialKey {
        TrialKey {
            participant_id: self.participant_id.clone(),
            article_id: self.article_id,
            paragraph_id: self.paragraph_id,
            reading_index: self.reading_index,
        }
    }

    pub fn is_repeated(&self) -> bool {
        self.reading_index == 2
    }

    pub fn n_words(&self) -> usize {
        self.words.len()
    }

    /// Checks every structural invariant of the trial.
    pub fn validate(&self) -> Result<()> {
        let who = || {
            format!(
                "trial ({}, article {}, paragraph {}, reading {})",
                self.participant_id, self.article_id, self.paragraph_id, self.reading_index
            )
        };
        if self.words.is_empty() {
            return Err(Error::Integrity(format!("{}: no words", who())));
        }
        let expected_kind = RepeatKind::from_schedule(self.reading_index, self.article_position)
            .map_err(|e| Error::Integrity(format!("{}: {e}", who())))?;
        if expected_kind != self.repeat_kind {
            return Err(Error::Integrity(format!(
                "{}: repeat kind {:?} inconsistent with position {}",
                who(),
                self.repeat_kind,
                self.article_position
            )));
        }
        let n = self.words.len();
        for (i, w) in self.words.iter().enumerate() {
            if w.index_in_paragraph != i + 1 {
                return Err(Error::Integrity(format!(
                    "{}: word indices are not contiguous from 1 (found {} at slot {})",
                    who(),
                    w.index_in_paragraph,
                    i + 1
                )));
            }
            if w.length < 1 {
                return Err(Error::Integrity(format!("{}: word {} has zero length", who(), i + 1)));
            }
            if !(w.surprisal >= 0.0) {
                return Err(Error::Integrity(format!(
                    "{}: word {} has negative surprisal",
                    who(),
                    i + 1
                )));
            }
            let expected = normalized_word_index(i + 1, n);
            if (w.normalized_word_index - expected).abs() > 1e-9 {
                return Err(Error::Integrity(format!(
                    "{}: word {} normalized index {} != {}",
                    who(),
                    i + 1,
                    w.normalized_word_index,
                    expected
                )));
            }
        }
        let mut max_duration: f64 = 0.0;
        for f in &self.scanpath {
            if !(f.duration_ms > 0.0) {
                return Err(Error::Integrity(format!(
                    "{}: fixation {} has nonpositive duration",
                    who(),
                    f.index
                )));
            }
            if let Some(w) = f.word_index {
                if w == 0 || w > n {
                    return Err(Error::Integrity(format!(
                        "{}: fixation {} on word {} outside 1..={n}",
                        who(),
                        f.index,
                        w
                    )));
                }
            }
            max_duration = max_duration.max(f.duration_ms);
        }
        if self.total_rt_ms < max_duration {
            return Err(Error::Integrity(format!(
                "{}: total reading time {} below longest fixation {}",
                who(),
                self.total_rt_ms,
                max_duration
            )));
        }
        Ok(())
    }
}

/// Groups trials into `(first, repeated)` pairs of the same participant and
/// paragraph. Only paragraphs read twice produce a pair; output is sorted by
/// participant, article and paragraph.
pub fn reading_pairs(trials: &[Trial]) -> Vec<(&Trial, &Trial)> {
    use std::collections::BTreeMap;
    let mut slots: BTreeMap<(&str, u32, u32), [Option<&Trial>; 2]> = BTreeMap::new();
    for t in trials {
        let slot = slots
            .entry((t.participant_id.as_str(), t.article_id, t.paragraph_id))
            .or_default();
        match t.reading_index {
            1 => slot[0] = Some(t),
            2 => slot[1] = Some(t),
            _ => {}
        }
    }
    slots
        .into_values()
        .filter_map(|[a, b]| Some((a?, b?)))
        .collect()
}
