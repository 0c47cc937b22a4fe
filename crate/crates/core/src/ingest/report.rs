//! CSV interest-area and fixation reports.
//!
//! A corpus is stored as two files in the column layout of SR Data Viewer
//! exports: an interest-area report with one row per (trial, word) and a
//! fixation report with one row per fixation. Trials are keyed by
//! participant, article, paragraph and reading index.

use std::collections::HashMap;
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{normalized_word_index, Fixation, RepeatKind, Trial, TrialKey, WordToken};
use crate::{Error, Result};

pub const IA_REPORT_FILE: &str = "ia_report.csv";
pub const FIXATION_REPORT_FILE: &str = "fixation_report.csv";

/// Column names for both reports. Defaults follow the OneStop export.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ColumnSchema {
    pub participant: String,
    pub article: String,
    pub paragraph: String,
    /// 0 for a first reading, 1 for a repeated reading.
    pub reread: String,
    pub article_position: String,
    pub paragraph_rt: String,

    pub ia_id: String,
    pub ia_label: String,
    pub word_length: String,
    pub frequency: String,
    pub surprisal: String,
    pub ia_left: String,
    pub ia_top: String,
    pub ia_right: String,
    pub ia_bottom: String,
    pub start_of_line: String,
    pub end_of_line: String,
    pub normalized_word_id: String,

    pub fix_index: String,
    pub fix_duration: String,
    pub fix_x: String,
    pub fix_y: String,
    pub fix_ia: String,
    pub next_fix_ia: String,
}

impl Default for ColumnSchema {
    fn default() -> Self {
        let s = |v: &str| v.to_string();
        ColumnSchema {
            participant: s("participant_id"),
            article: s("article_id"),
            paragraph: s("paragraph_id"),
            reread: s("reread"),
            article_position: s("article_index"),
            paragraph_rt: s("PARAGRAPH_RT"),
            ia_id: s("IA_ID"),
            ia_label: s("IA_LABEL"),
            word_length: s("Length"),
            frequency: s("Wordfreq_Frequency"),
            surprisal: s("Surprisal"),
            ia_left: s("IA_LEFT"),
            ia_top: s("IA_TOP"),
            ia_right: s("IA_RIGHT"),
            ia_bottom: s("IA_BOTTOM"),
            start_of_line: s("start_of_line"),
            end_of_line: s("end_of_line"),
            normalized_word_id: s("normalized_Word_ID"),
            fix_index: s("CURRENT_FIX_INDEX"),
            fix_duration: s("CURRENT_FIX_DURATION"),
            fix_x: s("CURRENT_FIX_X"),
            fix_y: s("CURRENT_FIX_Y"),
            fix_ia: s("CURRENT_FIX_INTEREST_AREA_INDEX"),
            next_fix_ia: s("NEXT_FIX_INTEREST_AREA_INDEX"),
        }
    }
}

impl ColumnSchema {
    fn key_columns(&self) -> [&str; 4] {
        [&self.participant, &self.article, &self.paragraph, &self.reread]
    }

    fn ia_columns(&self) -> Vec<&str> {
        let mut cols = self.key_columns().to_vec();
        cols.extend([
            self.article_position.as_str(),
            &self.paragraph_rt,
            &self.ia_id,
            &self.ia_label,
            &self.word_length,
            &self.frequency,
            &self.surprisal,
            &self.ia_left,
            &self.ia_top,
            &self.ia_right,
            &self.ia_bottom,
            &self.start_of_line,
            &self.end_of_line,
        ]);
        cols
    }

    fn fixation_columns(&self) -> Vec<&str> {
        let mut cols = self.key_columns().to_vec();
        cols.extend([
            self.fix_index.as_str(),
            &self.fix_duration,
            &self.fix_x,
            &self.fix_y,
            &self.fix_ia,
            &self.next_fix_ia,
        ]);
        cols
    }
}

/// Header lookup plus typed cell access with line-numbered errors.
struct Table<'a> {
    file: &'a str,
    columns: HashMap<String, usize>,
}

impl<'a> Table<'a> {
    fn new(file: &'a str, headers: &csv::StringRecord, required: &[&str]) -> Result<Self> {
        let columns: HashMap<String, usize> = headers
            .iter()
            .enumerate()
            .map(|(i, h)| (h.trim().to_string(), i))
            .collect();
        for col in required {
            if !columns.contains_key(*col) {
                return Err(Error::MissingColumn {
                    file: file.to_string(),
                    column: col.to_string(),
                });
            }
        }
        Ok(Table { file, columns })
    }

    fn raw<'r>(&self, rec: &'r csv::StringRecord, col: &str) -> &'r str {
        rec.get(self.columns[col]).unwrap_or("").trim()
    }

    fn parse_err(&self, rec: &csv::StringRecord, col: &str, value: &str) -> Error {
        Error::Parse {
            file: self.file.to_string(),
            line: rec.position().map(|p| p.line()).unwrap_or(0),
            column: col.to_string(),
            value: value.to_string(),
        }
    }

    fn num<T: FromStr>(&self, rec: &csv::StringRecord, col: &str) -> Result<T> {
        let v = self.raw(rec, col);
        v.parse().map_err(|_| self.parse_err(rec, col, v))
    }

    fn finite(&self, rec: &csv::StringRecord, col: &str) -> Result<f64> {
        let v: f64 = self.num(rec, col)?;
        if v.is_finite() {
            Ok(v)
        } else {
            Err(self.parse_err(rec, col, self.raw(rec, col)))
        }
    }

    fn flag(&self, rec: &csv::StringRecord, col: &str) -> Result<bool> {
        match self.raw(rec, col) {
            "1" | "true" | "True" | "TRUE" => Ok(true),
            "0" | "false" | "False" | "FALSE" => Ok(false),
            other => Err(self.parse_err(rec, col, other)),
        }
    }

    /// Interest-area index; `.` or an empty cell means no interest area.
    fn optional_index(&self, rec: &csv::StringRecord, col: &str) -> Result<Option<usize>> {
        match self.raw(rec, col) {
            "" | "." | "NA" => Ok(None),
            v => v.parse().map(Some).map_err(|_| self.parse_err(rec, col, v)),
        }
    }

    fn key(&self, rec: &csv::StringRecord, schema: &ColumnSchema) -> Result<TrialKey> {
        let reread: u8 = self.num(rec, &schema.reread)?;
        if reread > 1 {
            return Err(self.parse_err(rec, &schema.reread, self.raw(rec, &schema.reread)));
        }
        Ok(TrialKey {
            participant_id: self.raw(rec, &schema.participant).to_string(),
            article_id: self.num(rec, &schema.article)?,
            paragraph_id: self.num(rec, &schema.paragraph)?,
            reading_index: reread + 1,
        })
    }
}

/// Reads trials from in-memory report streams. Trials are returned in order of
/// first appearance in the interest-area report.
pub fn read_trials<R1: Read, R2: Read>(
    ia_report: R1,
    fixation_report: R2,
    schema: &ColumnSchema,
) -> Result<Vec<Trial>> {
    read_named(ia_report, IA_REPORT_FILE, fixation_report, FIXATION_REPORT_FILE, schema)
}

fn read_named<R1: Read, R2: Read>(
    ia_report: R1,
    ia_name: &str,
    fixation_report: R2,
    fix_name: &str,
    schema: &ColumnSchema,
) -> Result<Vec<Trial>> {
    let mut trials: Vec<Trial> = Vec::new();
    let mut by_key: HashMap<TrialKey, usize> = HashMap::new();

    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(ia_report);
    let table = Table::new(ia_name, reader.headers()?, &schema.ia_columns())?;
    for rec in reader.records() {
        let rec = rec?;
        let key = table.key(&rec, schema)?;
        let position: u8 = table.num(&rec, &schema.article_position)?;
        let rt = table.finite(&rec, &schema.paragraph_rt)?;
        let word = WordToken {
            index_in_paragraph: table.num(&rec, &schema.ia_id)?,
            text: table.raw(&rec, &schema.ia_label).to_string(),
            length: table.num(&rec, &schema.word_length)?,
            log2_frequency: table.finite(&rec, &schema.frequency)?,
            surprisal: table.finite(&rec, &schema.surprisal)?,
            ia_left: table.finite(&rec, &schema.ia_left)?,
            ia_top: table.finite(&rec, &schema.ia_top)?,
            ia_right: table.finite(&rec, &schema.ia_right)?,
            ia_bottom: table.finite(&rec, &schema.ia_bottom)?,
            start_of_line: table.flag(&rec, &schema.start_of_line)?,
            end_of_line: table.flag(&rec, &schema.end_of_line)?,
            normalized_word_index: 0.0,
        };
        let slot = match by_key.get(&key) {
            Some(&i) => {
                let t = &trials[i];
                if t.article_position != position || t.total_rt_ms != rt {
                    return Err(Error::Integrity(format!(
                        "{ia_name}: inconsistent trial-level values for {key:?}"
                    )));
                }
                i
            }
            None => {
                let repeat_kind = RepeatKind::from_schedule(key.reading_index, position)?;
                trials.push(Trial {
                    participant_id: key.participant_id.clone(),
                    article_id: key.article_id,
                    paragraph_id: key.paragraph_id,
                    reading_index: key.reading_index,
                    article_position: position,
                    repeat_kind,
                    words: Vec::new(),
                    scanpath: Vec::new(),
                    total_rt_ms: rt,
                });
                by_key.insert(key, trials.len() - 1);
                trials.len() - 1
            }
        };
        trials[slot].words.push(word);
    }
    for t in &mut trials {
        t.words.sort_by_key(|w| w.index_in_paragraph);
        let n = t.words.len();
        for w in &mut t.words {
            w.normalized_word_index = normalized_word_index(w.index_in_paragraph, n);
        }
    }

    let mut reader = csv::ReaderBuilder::new().flexible(false).from_reader(fixation_report);
    let table = Table::new(fix_name, reader.headers()?, &schema.fixation_columns())?;
    for rec in reader.records() {
        let rec = rec?;
        let key = table.key(&rec, schema)?;
        let fixation = Fixation {
            index: table.num(&rec, &schema.fix_index)?,
            duration_ms: table.finite(&rec, &schema.fix_duration)?,
            x_px: table.finite(&rec, &schema.fix_x)?,
            y_px: table.finite(&rec, &schema.fix_y)?,
            word_index: table.optional_index(&rec, &schema.fix_ia)?,
            next_word_index: table.optional_index(&rec, &schema.next_fix_ia)?,
        };
        let Some(&slot) = by_key.get(&key) else {
            return Err(Error::Integrity(format!(
                "{fix_name}: fixations for {key:?} have no interest-area rows"
            )));
        };
        trials[slot].scanpath.push(fixation);
    }
    for t in &mut trials {
        t.scanpath.sort_by_key(|f| f.index);
        if let Some(w) = t.scanpath.windows(2).find(|w| w[0].index == w[1].index) {
            return Err(Error::Integrity(format!(
                "duplicate fixation index {} in trial {:?}",
                w[0].index,
                t.key()
            )));
        }
        t.validate()?;
    }
    Ok(trials)
}

/// Parses a fixation report together with its interest-area report.
///
/// Produces one trial per (participant, paragraph, reading) group with
/// fixations sorted by index.
pub fn parse_fixation_report(
    fixation_report: &Path,
    ia_report: &Path,
    schema: &ColumnSchema,
) -> Result<Vec<Trial>> {
    let fix = File::open(fixation_report).map_err(|e| Error::io(fixation_report, e))?;
    let ia = File::open(ia_report).map_err(|e| Error::io(ia_report, e))?;
    read_named(
        ia,
        &ia_report.display().to_string(),
        fix,
        &fixation_report.display().to_string(),
        schema,
    )
}

fn fmt_index(i: Option<usize>) -> String {
    i.map_or_else(|| ".".to_string(), |v| v.to_string())
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

/// Writes both reports for `trials` in the given schema.
pub fn write_trials<W1: Write, W2: Write>(
    trials: &[Trial],
    ia_report: W1,
    fixation_report: W2,
    schema: &ColumnSchema,
) -> Result<()> {
    let mut ia = csv::Writer::from_writer(ia_report);
    let mut header = schema.ia_columns();
    header.push(&schema.normalized_word_id);
    ia.write_record(&header)?;
    for t in trials {
        for w in &t.words {
            ia.write_record([
                t.participant_id.clone(),
                t.article_id.to_string(),
                t.paragraph_id.to_string(),
                (t.reading_index - 1).to_string(),
                t.article_position.to_string(),
                t.total_rt_ms.to_string(),
                w.index_in_paragraph.to_string(),
                w.text.clone(),
                w.length.to_string(),
                w.log2_frequency.to_string(),
                w.surprisal.to_string(),
                w.ia_left.to_string(),
                w.ia_top.to_string(),
                w.ia_right.to_string(),
                w.ia_bottom.to_string(),
                flag(w.start_of_line).to_string(),
                flag(w.end_of_line).to_string(),
                w.normalized_word_index.to_string(),
            ])?;
        }
    }
    ia.flush().map_err(|e| Error::io(IA_REPORT_FILE, e))?;

    let mut fx = csv::Writer::from_writer(fixation_report);
    fx.write_record(schema.fixation_columns())?;
    for t in trials {
        for f in &t.scanpath {
            fx.write_record([
                t.participant_id.clone(),
                t.article_id.to_string(),
                t.paragraph_id.to_string(),
                (t.reading_index - 1).to_string(),
                f.index.to_string(),
                f.duration_ms.to_string(),
                f.x_px.to_string(),
                f.y_px.to_string(),
                fmt_index(f.word_index),
                fmt_index(f.next_word_index),
            ])?;
        }
    }
    fx.flush().map_err(|e| Error::io(FIXATION_REPORT_FILE, e))?;
    Ok(())
}

/// Writes `ia_report.csv` and `fixation_report.csv` into `dir`.
pub fn write_corpus(trials: &[Trial], dir: &Path, schema: &ColumnSchema) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let ia_path = dir.join(IA_REPORT_FILE);
    let fix_path = dir.join(FIXATION_REPORT_FILE);
    let ia = File::create(&ia_path).map_err(|e| Error::io(&ia_path, e))?;
    let fx = File::create(&fix_path).map_err(|e| Error::io(&fix_path, e))?;
    write_trials(
        trials,
        std::io::BufWriter::new(ia),
        std::io::BufWriter::new(fx),
        schema,
    )
}
