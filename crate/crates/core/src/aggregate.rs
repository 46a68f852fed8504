//! Majority-class aggregation of master-set assignments into lexicon entries.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{
    intensity_rank, to_binary_bin, AxisMap, Bin, Emotion, EmotionMap, Facet, IntensityLevel, PolarityAxis, Pos,
    SenseKey, SourceTag,
};
use crate::error::{Error, Result};
use crate::ingest::Assignment;
use crate::qc::{MasterGroup, MasterSet};
use crate::targets::TargetTerm;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajorityResult<T> {
    pub winner: T,
    pub majority_size: usize,
    pub total: usize,
    pub tied: bool,
}

/// Most frequent level; ties go to the stronger level.
pub fn majority_intensity(votes: &[IntensityLevel]) -> Result<MajorityResult<IntensityLevel>> {
    if votes.is_empty() {
        return Err(Error::domain("majority of an empty vote set"));
    }
    let mut counts = [0usize; 4];
    for &v in votes {
        counts[intensity_rank(v)] += 1;
    }
    let max = *counts.iter().max().expect("four levels");
    let rank = counts.iter().rposition(|&c| c == max).expect("max present");
    Ok(MajorityResult {
        winner: IntensityLevel::ALL[rank],
        majority_size: max,
        total: votes.len(),
        tied: counts.iter().filter(|&&c| c == max).count() > 1,
    })
}

/// Majority after collapsing to two bins; an exact tie resolves to `tie`.
pub fn majority_binary_with(votes: &[IntensityLevel], tie: Bin) -> Result<MajorityResult<Bin>> {
    if votes.is_empty() {
        return Err(Error::domain("majority of an empty vote set"));
    }
    let assoc = votes.iter().filter(|&&v| to_binary_bin(v) == Bin::Associated).count();
    let non = votes.len() - assoc;
    let (winner, majority_size) = match assoc.cmp(&non) {
        std::cmp::Ordering::Greater => (Bin::Associated, assoc),
        std::cmp::Ordering::Less => (Bin::NonAssociated, non),
        std::cmp::Ordering::Equal => (tie, assoc),
    };
    Ok(MajorityResult {
        winner,
        majority_size,
        total: votes.len(),
        tied: assoc == non,
    })
}

pub fn majority_binary(votes: &[IntensityLevel]) -> Result<MajorityResult<Bin>> {
    majority_binary_with(votes, TieRules::default().binary_tie)
}

/// How exact ties are resolved where no stronger level exists to prefer.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TieRules {
    pub binary_tie: Bin,
    pub emotion_word_tie: bool,
}

impl Default for TieRules {
    fn default() -> Self {
        TieRules {
            binary_tie: Bin::Associated,
            emotion_word_tie: false,
        }
    }
}

pub fn majority_flag(votes: &[bool], tie: bool) -> Result<MajorityResult<bool>> {
    if votes.is_empty() {
        return Err(Error::domain("majority of an empty vote set"));
    }
    let yes = votes.iter().filter(|&&v| v).count();
    let no = votes.len() - yes;
    let (winner, majority_size) = match yes.cmp(&no) {
        std::cmp::Ordering::Greater => (true, yes),
        std::cmp::Ordering::Less => (false, no),
        std::cmp::Ordering::Equal => (tie, yes),
    };
    Ok(MajorityResult {
        winner,
        majority_size,
        total: votes.len(),
        tied: yes == no,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Association {
    pub four_level: MajorityResult<IntensityLevel>,
    pub binary: MajorityResult<Bin>,
    pub associated: bool,
}

impl Association {
    pub fn from_votes(votes: &[IntensityLevel], rules: &TieRules) -> Result<Self> {
        let binary = majority_binary_with(votes, rules.binary_tie)?;
        Ok(Association {
            four_level: majority_intensity(votes)?,
            associated: binary.winner == Bin::Associated,
            binary,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LexiconEntry {
    pub term: String,
    pub category_id: String,
    pub pos: Pos,
    pub emotions: EmotionMap<Association>,
    pub polarity: AxisMap<Association>,
    pub is_emotion_word: MajorityResult<bool>,
    #[serde(default)]
    pub sources: BTreeSet<SourceTag>,
}

impl LexiconEntry {
    pub fn key(&self) -> SenseKey {
        SenseKey::new(self.term.clone(), self.category_id.clone())
    }

    pub fn facet(&self, facet: Facet) -> &Association {
        match facet {
            Facet::Emotion(e) => &self.emotions[e],
            Facet::Polarity(p) => &self.polarity[p],
        }
    }
}

/// Votes for one facet across a group; errors on a blank answer.
pub(crate) fn facet_votes(assignments: &[Assignment], facet: Facet) -> Result<Vec<IntensityLevel>> {
    assignments
        .iter()
        .map(|a| {
            a.answer(facet).ok_or_else(|| {
                Error::domain(format!(
                    "assignment {}/{} has no answer for {}",
                    a.hit_id,
                    a.annotator_id,
                    facet.label()
                ))
            })
        })
        .collect()
}

pub fn aggregate_term(group: &MasterGroup, rules: &TieRules) -> Result<LexiconEntry> {
    if group.assignments.is_empty() {
        return Err(Error::domain(format!("empty group for {}", group.key)));
    }
    if let Some(stray) = group.assignments.iter().find(|a| !group.hit_ids.contains(&a.hit_id)) {
        return Err(Error::domain(format!(
            "group {} contains assignment for hit `{}` of another term",
            group.key, stray.hit_id
        )));
    }
    let mut emotions = Vec::with_capacity(8);
    for e in Emotion::ALL {
        emotions.push(Association::from_votes(
            &facet_votes(&group.assignments, Facet::Emotion(e))?,
            rules,
        )?);
    }
    let mut polarity = Vec::with_capacity(2);
    for p in PolarityAxis::ALL {
        polarity.push(Association::from_votes(
            &facet_votes(&group.assignments, Facet::Polarity(p))?,
            rules,
        )?);
    }
    let flags: Vec<bool> = group
        .assignments
        .iter()
        .map(|a| {
            a.is_emotion_word
                .ok_or_else(|| Error::domain("blank emotion-word answer in master set"))
        })
        .collect::<Result<_>>()?;
    Ok(LexiconEntry {
        term: group.key.term.clone(),
        category_id: group.key.category_id.clone(),
        pos: group.pos,
        emotions: EmotionMap(emotions.try_into().expect("eight emotions")),
        polarity: AxisMap(polarity.try_into().expect("two axes")),
        is_emotion_word: majority_flag(&flags, rules.emotion_word_tie)?,
        sources: BTreeSet::new(),
    })
}

/// One entry per master-set term, ordered by (term, category id).
pub fn build_lexicon(master: &MasterSet, rules: &TieRules) -> Result<Vec<LexiconEntry>> {
    let mut out: Vec<LexiconEntry> = master
        .groups()
        .iter()
        .map(|g| aggregate_term(g, rules))
        .collect::<Result<_>>()?;
    out.sort_by(|a, b| (&a.term, &a.category_id).cmp(&(&b.term, &b.category_id)));
    Ok(out)
}

/// Copy source tags from the target list onto matching entries.
pub fn attach_sources(lexicon: &mut [LexiconEntry], targets: &[TargetTerm]) {
    let by_key: BTreeMap<SenseKey, &TargetTerm> = targets.iter().map(|t| (t.key(), t)).collect();
    for entry in lexicon {
        if let Some(t) = by_key.get(&entry.key()) {
            entry.sources = t.sources.clone();
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum LexiconFormat {
    /// Tab-separated flags and binary majority sizes.
    #[default]
    Tabular,
    /// One JSON object per line with four-level winners and tie flags.
    Structured,
}

/// The flat per-sense record of the tabular lexicon.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LexiconRow {
    pub term: String,
    pub category_id: String,
    pub pos: Pos,
    pub emotion_flags: EmotionMap<bool>,
    pub polarity_flags: AxisMap<bool>,
    pub is_emotion_word: bool,
    pub emotion_sizes: EmotionMap<usize>,
    pub polarity_sizes: AxisMap<usize>,
    pub emotion_word_size: usize,
}

impl From<&LexiconEntry> for LexiconRow {
    fn from(e: &LexiconEntry) -> Self {
        LexiconRow {
            term: e.term.clone(),
            category_id: e.category_id.clone(),
            pos: e.pos,
            emotion_flags: e.emotions.map(|a| a.associated),
            polarity_flags: e.polarity.map(|a| a.associated),
            is_emotion_word: e.is_emotion_word.winner,
            emotion_sizes: e.emotions.map(|a| a.binary.majority_size),
            polarity_sizes: e.polarity.map(|a| a.binary.majority_size),
            emotion_word_size: e.is_emotion_word.majority_size,
        }
    }
}

pub fn lexicon_header() -> Vec<String> {
    let mut cols: Vec<String> = vec!["term".into(), "category_id".into(), "pos".into()];
    cols.extend(Emotion::ALL.iter().map(|e| e.as_str().to_string()));
    cols.extend(PolarityAxis::ALL.iter().map(|p| p.as_str().to_string()));
    cols.push("emotion_word".into());
    cols.extend(Emotion::ALL.iter().map(|e| format!("size_{e}")));
    cols.extend(PolarityAxis::ALL.iter().map(|p| format!("size_{p}")));
    cols.push("size_emotion_word".into());
    cols
}

fn flag(b: bool) -> &'static str {
    if b {
        "1"
    } else {
        "0"
    }
}

pub fn emit_lexicon_rows<W: Write>(rows: &[LexiconRow], out: &mut W) -> Result<()> {
    writeln!(out, "{}", lexicon_header().join("\t"))?;
    for r in rows {
        let mut cols: Vec<String> = vec![r.term.clone(), r.category_id.clone(), r.pos.to_string()];
        cols.extend(r.emotion_flags.0.iter().map(|&b| flag(b).to_string()));
        cols.extend(r.polarity_flags.0.iter().map(|&b| flag(b).to_string()));
        cols.push(flag(r.is_emotion_word).to_string());
        cols.extend(r.emotion_sizes.0.iter().map(usize::to_string));
        cols.extend(r.polarity_sizes.0.iter().map(usize::to_string));
        cols.push(r.emotion_word_size.to_string());
        writeln!(out, "{}", cols.join("\t"))?;
    }
    Ok(())
}

pub fn emit_lexicon<W: Write>(lexicon: &[LexiconEntry], format: LexiconFormat, out: &mut W) -> Result<()> {
    match format {
        LexiconFormat::Tabular => {
            let rows: Vec<LexiconRow> = lexicon.iter().map(LexiconRow::from).collect();
            emit_lexicon_rows(&rows, out)
        }
        LexiconFormat::Structured => {
            for e in lexicon {
                serde_json::to_writer(&mut *out, e)?;
                writeln!(out)?;
            }
            Ok(())
        }
    }
}

pub fn parse_lexicon_tabular<R: BufRead>(source: R) -> Result<Vec<LexiconRow>> {
    let header = lexicon_header();
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        let f: Vec<&str> = line.split('\t').collect();
        if lineno == 1 {
            if f != header {
                return Err(Error::Format("lexicon header mismatch".into()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        if f.len() != header.len() {
            return Err(Error::parse(
                lineno,
                format!("expected {} fields, found {}", header.len(), f.len()),
            ));
        }
        let b = |s: &str| match s {
            "0" => Ok(false),
            "1" => Ok(true),
            _ => Err(Error::parse(lineno, format!("bad flag `{s}`"))),
        };
        let n = |s: &str| {
            s.parse::<usize>()
                .map_err(|_| Error::parse(lineno, format!("bad size `{s}`")))
        };
        let mut emotion_flags = EmotionMap([false; 8]);
        let mut emotion_sizes = EmotionMap([0; 8]);
        for i in 0..8 {
            emotion_flags.0[i] = b(f[3 + i])?;
            emotion_sizes.0[i] = n(f[14 + i])?;
        }
        out.push(LexiconRow {
            term: f[0].to_string(),
            category_id: f[1].to_string(),
            pos: f[2].parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?,
            emotion_flags,
            polarity_flags: AxisMap([b(f[11])?, b(f[12])?]),
            is_emotion_word: b(f[13])?,
            emotion_sizes,
            polarity_sizes: AxisMap([n(f[22])?, n(f[23])?]),
            emotion_word_size: n(f[24])?,
        });
    }
    Ok(out)
}

pub fn parse_lexicon_structured<R: BufRead>(source: R) -> Result<Vec<LexiconEntry>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(serde_json::from_str(&line).map_err(|e| Error::parse(i + 1, e.to_string()))?);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use IntensityLevel as L;

    #[test]
    fn unanimous_none() {
        let r = majority_intensity(&[L::None; 5]).unwrap();
        assert_eq!((r.winner, r.majority_size, r.tied), (L::None, 5, false));
    }

    #[test]
    fn tie_goes_to_stronger_level() {
        let r = majority_intensity(&[L::Weak, L::Weak, L::Moderate, L::Moderate, L::None]).unwrap();
        assert_eq!((r.winner, r.majority_size, r.tied), (L::Moderate, 2, true));
    }

    #[test]
    fn plain_plurality() {
        let r = majority_intensity(&[L::None, L::Weak, L::Weak, L::Moderate, L::Strong]).unwrap();
        assert_eq!((r.winner, r.majority_size, r.tied), (L::Weak, 2, false));
    }

    #[test]
    fn empty_votes_rejected() {
        assert!(majority_intensity(&[]).is_err());
        assert!(majority_binary(&[]).is_err());
    }

    #[test]
    fn binary_majorities() {
        let r = majority_binary(&[L::None, L::None, L::Weak, L::Moderate, L::Strong]).unwrap();
        assert_eq!((r.winner, r.majority_size, r.tied), (Bin::NonAssociated, 3, false));
        let r = majority_binary(&[L::Moderate, L::Strong, L::Strong]).unwrap();
        assert_eq!((r.winner, r.majority_size), (Bin::Associated, 3));
        let r = majority_binary(&[L::None, L::Weak, L::Moderate, L::Strong]).unwrap();
        assert_eq!((r.winner, r.majority_size, r.tied), (Bin::Associated, 2, true));
        let r = majority_binary_with(&[L::None, L::Strong], Bin::NonAssociated).unwrap();
        assert_eq!(r.winner, Bin::NonAssociated);
    }

    #[test]
    fn emotion_word_tie_is_no() {
        let r = majority_flag(&[true, true, false, false], TieRules::default().emotion_word_tie).unwrap();
        assert!(!r.winner && r.tied);
        assert_eq!(r.majority_size, 2);
    }
}
