//! Assignment file parsing.
//!
//! Assignment file: comma-separated with a header row
//! `hit_id,annotator_id,word_choice,positive,negative,anger,...,trust,is_emotion_word`.
//! An empty field is an unanswered question and is kept as `None`; any other
//! unrecognised token makes the whole row malformed.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{Emotion, EmotionMap, Facet, IntensityLevel, PolarityAxis};
use crate::error::{Error, Result};
use crate::hits::{HitIndex, OPTION_COUNT};

/// One annotator's answer sheet for one HIT. `None` marks a blank answer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Assignment {
    pub hit_id: String,
    pub annotator_id: String,
    pub word_choice: Option<u8>,
    pub positive: Option<IntensityLevel>,
    pub negative: Option<IntensityLevel>,
    pub emotions: EmotionMap<Option<IntensityLevel>>,
    pub is_emotion_word: Option<bool>,
}

impl Assignment {
    pub fn polarity(&self, axis: PolarityAxis) -> Option<IntensityLevel> {
        match axis {
            PolarityAxis::Negative => self.negative,
            PolarityAxis::Positive => self.positive,
        }
    }

    pub fn answer(&self, facet: Facet) -> Option<IntensityLevel> {
        match facet {
            Facet::Emotion(e) => self.emotions[e],
            Facet::Polarity(p) => self.polarity(p),
        }
    }

    /// True when all twelve questions were answered.
    pub fn is_complete(&self) -> bool {
        self.word_choice.is_some()
            && self.positive.is_some()
            && self.negative.is_some()
            && self.emotions.0.iter().all(Option::is_some)
            && self.is_emotion_word.is_some()
    }
}

pub const ASSIGNMENT_HEADER: [&str; 14] = [
    "hit_id",
    "annotator_id",
    "word_choice",
    "positive",
    "negative",
    "anger",
    "anticipation",
    "disgust",
    "fear",
    "joy",
    "sadness",
    "surprise",
    "trust",
    "is_emotion_word",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rejection {
    pub line: u64,
    pub reason: String,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct IngestDiagnostics {
    pub rows_read: usize,
    pub rows_rejected: usize,
    pub duplicate_pairs: usize,
    pub unknown_hits: usize,
    pub rejections: Vec<Rejection>,
}

impl IngestDiagnostics {
    pub fn accepted(&self) -> usize {
        self.rows_read - self.rows_rejected - self.duplicate_pairs - self.unknown_hits
    }
}

fn opt_intensity(s: &str) -> std::result::Result<Option<IntensityLevel>, String> {
    if s.is_empty() {
        return Ok(None);
    }
    s.parse().map(Some).map_err(|_| format!("bad intensity token `{s}`"))
}

fn decode_row(rec: &csv::StringRecord) -> std::result::Result<Assignment, String> {
    if rec.len() != ASSIGNMENT_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            ASSIGNMENT_HEADER.len(),
            rec.len()
        ));
    }
    let hit_id = &rec[0];
    let annotator_id = &rec[1];
    if hit_id.is_empty() || annotator_id.is_empty() {
        return Err("missing hit or annotator id".into());
    }
    let word_choice = match &rec[2] {
        "" => None,
        s => Some(
            s.parse::<u8>()
                .ok()
                .filter(|&i| (i as usize) < OPTION_COUNT)
                .ok_or_else(|| format!("bad word-choice answer `{s}`"))?,
        ),
    };
    let mut emotions = EmotionMap([None; 8]);
    for (i, e) in Emotion::ALL.into_iter().enumerate() {
        emotions[e] = opt_intensity(&rec[5 + i])?;
    }
    let is_emotion_word = match &rec[13] {
        "" => None,
        "yes" => Some(true),
        "no" => Some(false),
        s => return Err(format!("bad emotion-word answer `{s}`")),
    };
    Ok(Assignment {
        hit_id: hit_id.to_string(),
        annotator_id: annotator_id.to_string(),
        word_choice,
        positive: opt_intensity(&rec[3])?,
        negative: opt_intensity(&rec[4])?,
        emotions,
        is_emotion_word,
    })
}

/// Parse an assignment stream against the known HITs.
///
/// Malformed rows, rows naming unknown HITs and repeated (hit, annotator)
/// pairs are counted and skipped; the first occurrence of a pair wins.
/// A header mismatch or an I/O failure is a hard error. An empty stream
/// yields no assignments.
pub fn parse_assignments<R: Read>(source: R, hits: &HitIndex) -> Result<(Vec<Assignment>, IngestDiagnostics)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .from_reader(source);
    let mut diag = IngestDiagnostics::default();
    let mut out = Vec::new();
    let mut pairs: HashSet<(String, String)> = HashSet::new();
    let mut rec = csv::StringRecord::new();
    let mut first = true;
    loop {
        let line = rdr.position().line();
        match rdr.read_record(&mut rec) {
            Ok(false) => break,
            Ok(true) => {}
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                if first {
                    return Err(Error::Format(format!("unreadable assignment header: {e}")));
                }
                diag.rows_read += 1;
                diag.rows_rejected += 1;
                diag.rejections.push(Rejection {
                    line,
                    reason: e.to_string(),
                });
                continue;
            }
        }
        if first {
            first = false;
            if rec.iter().ne(ASSIGNMENT_HEADER.iter().copied()) {
                return Err(Error::Format("assignment file header mismatch".into()));
            }
            continue;
        }
        diag.rows_read += 1;
        let a = match decode_row(&rec) {
            Ok(a) => a,
            Err(reason) => {
                diag.rows_rejected += 1;
                diag.rejections.push(Rejection { line, reason });
                continue;
            }
        };
        if hits.get(&a.hit_id).is_none() {
            diag.unknown_hits += 1;
            continue;
        }
        if !pairs.insert((a.hit_id.clone(), a.annotator_id.clone())) {
            diag.duplicate_pairs += 1;
            continue;
        }
        out.push(a);
    }
    Ok((out, diag))
}

pub fn write_assignments<W: Write>(out: W, assignments: &[Assignment]) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(out);
    w.write_record(ASSIGNMENT_HEADER)?;
    let level = |l: Option<IntensityLevel>| l.map_or("", IntensityLevel::as_str);
    for a in assignments {
        let wc = a.word_choice.map(|i| i.to_string()).unwrap_or_default();
        let mut row: Vec<&str> = vec![&a.hit_id, &a.annotator_id, &wc, level(a.positive), level(a.negative)];
        row.extend(Emotion::ALL.iter().map(|&e| level(a.emotions[e])));
        row.push(match a.is_emotion_word {
            None => "",
            Some(true) => "yes",
            Some(false) => "no",
        });
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}
