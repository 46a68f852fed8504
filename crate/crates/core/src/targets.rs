//! Target term-sense selection.
//!
//! Four subsets feed the target union: frequent unigrams and bigrams from the
//! thesaurus (monosemous only), and tagged term lists such as an affect
//! lexicon (at most two senses) or a polarity lexicon (at most three senses).

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::domain::{Pos, SenseKey, SourceTag};
use crate::error::{Error, Result};
use crate::thesaurus::{FrequencyList, Thesaurus};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TargetTerm {
    pub term: String,
    pub category_id: String,
    pub pos: Pos,
    pub sources: BTreeSet<SourceTag>,
    /// Class labels from tagged term files (polarity class, emotion class).
    pub aux_labels: BTreeSet<String>,
}

impl TargetTerm {
    pub fn key(&self) -> SenseKey {
        SenseKey::new(self.term.clone(), self.category_id.clone())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NGram {
    Unigram,
    Bigram,
}

impl NGram {
    pub fn of(term: &str) -> Option<NGram> {
        match term.split_whitespace().count() {
            1 => Some(NGram::Unigram),
            2 => Some(NGram::Bigram),
            _ => None,
        }
    }

    fn tag(self) -> SourceTag {
        match self {
            NGram::Unigram => SourceTag::Unigram,
            NGram::Bigram => SourceTag::Bigram,
        }
    }
}

/// The `k` most frequent monosemous thesaurus terms of one part of speech and
/// n-gram order. Ties in count go to the lexicographically smaller term.
pub fn select_frequent(pos: Pos, order: NGram, freq: &FrequencyList, th: &Thesaurus, k: usize) -> Vec<TargetTerm> {
    let mut candidates: Vec<(&str, u64, usize)> = freq
        .entries()
        .iter()
        .filter(|(term, p, _)| *p == pos && NGram::of(term) == Some(order))
        .filter_map(|(term, _, count)| {
            if th.sense_count(term) != 1 {
                return None;
            }
            let cat = th.categories_of(term).next()?;
            (th.categories()[cat].member_pos(term) == Some(pos)).then_some((term.as_str(), *count, cat))
        })
        .collect();
    candidates.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
    candidates
        .into_iter()
        .take(k)
        .map(|(term, _, cat)| TargetTerm {
            term: term.to_string(),
            category_id: th.categories()[cat].category_id.clone(),
            pos,
            sources: BTreeSet::from([order.tag()]),
            aux_labels: BTreeSet::new(),
        })
        .collect()
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct TaggedDiagnostics {
    pub lines_read: usize,
    pub absent: usize,
    pub too_ambiguous: usize,
}

/// Load a `term<TAB>label` file, emitting one target per sense for terms
/// with between 1 and `max_senses` thesaurus senses.
pub fn load_tagged_terms<R: BufRead>(
    source: R,
    tag: SourceTag,
    max_senses: usize,
    th: &Thesaurus,
) -> Result<(Vec<TargetTerm>, TaggedDiagnostics)> {
    let mut diag = TaggedDiagnostics::default();
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            continue;
        }
        let (term, label) = line
            .split_once('\t')
            .ok_or_else(|| Error::parse(lineno, "expected `term<TAB>label`"))?;
        let (term, label) = (term.trim(), label.trim());
        if term.is_empty() || label.is_empty() || label.contains('\t') {
            return Err(Error::parse(lineno, "expected `term<TAB>label`"));
        }
        diag.lines_read += 1;
        let senses = th.sense_count(term);
        if senses == 0 {
            diag.absent += 1;
            continue;
        }
        if senses > max_senses {
            diag.too_ambiguous += 1;
            continue;
        }
        for cat in th.categories_of(term) {
            let category = &th.categories()[cat];
            out.push(TargetTerm {
                term: term.to_string(),
                category_id: category.category_id.clone(),
                pos: category.member_pos(term).unwrap_or(Pos::Unknown),
                sources: BTreeSet::from([tag]),
                aux_labels: BTreeSet::from([label.to_string()]),
            });
        }
    }
    Ok((build_target_union(&[out]), diag))
}

/// Deduplicate on (term, category), merging source tags and labels.
/// Output is ordered by term, then category id.
pub fn build_target_union(parts: &[Vec<TargetTerm>]) -> Vec<TargetTerm> {
    let mut merged: BTreeMap<SenseKey, TargetTerm> = BTreeMap::new();
    for t in parts.iter().flatten() {
        match merged.get_mut(&t.key()) {
            Some(existing) => {
                existing.sources.extend(t.sources.iter().copied());
                existing.aux_labels.extend(t.aux_labels.iter().cloned());
                if existing.pos == Pos::Unknown {
                    existing.pos = t.pos;
                }
            }
            None => {
                merged.insert(t.key(), t.clone());
            }
        }
    }
    merged.into_values().collect()
}

pub const TARGETS_HEADER: &str = "term\tcategory_id\tpos\tsources\tlabels";

/// Targets file: header, then `term<TAB>category_id<TAB>pos<TAB>sources<TAB>labels`
/// with comma-joined sources and labels.
pub fn write_targets<W: Write>(out: &mut W, targets: &[TargetTerm]) -> Result<()> {
    writeln!(out, "{TARGETS_HEADER}")?;
    for t in targets {
        if t.aux_labels.iter().any(|l| l.contains(',')) {
            return Err(Error::Format(format!("label of `{}` contains a comma", t.term)));
        }
        let sources: Vec<&str> = t.sources.iter().map(|s| s.as_str()).collect();
        let labels: Vec<&str> = t.aux_labels.iter().map(String::as_str).collect();
        writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}",
            t.term,
            t.category_id,
            t.pos,
            sources.join(","),
            labels.join(",")
        )?;
    }
    Ok(())
}

pub fn read_targets<R: BufRead>(source: R) -> Result<Vec<TargetTerm>> {
    let mut out = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if lineno == 1 {
            if line != TARGETS_HEADER {
                return Err(Error::Format("targets file header mismatch".into()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 5 {
            return Err(Error::parse(lineno, format!("expected 5 fields, found {}", f.len())));
        }
        let pos = f[2].parse().map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
        let sources = f[3]
            .split(',')
            .filter(|s| !s.is_empty())
            .map(|s| s.parse())
            .collect::<Result<BTreeSet<SourceTag>>>()
            .map_err(|e| Error::parse(lineno, e.to_string()))?;
        if sources.is_empty() {
            return Err(Error::parse(lineno, "target without source tags"));
        }
        out.push(TargetTerm {
            term: f[0].to_string(),
            category_id: f[1].to_string(),
            pos,
            sources,
            aux_labels: f[4].split(',').filter(|s| !s.is_empty()).map(str::to_string).collect(),
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::thesaurus::{load_frequency_list, load_thesaurus};

    fn thesaurus() -> Thesaurus {
        let src = "c1\tmotion\tverb:run;verb:walk;noun:race\n\
                   c2\tcontest\tnoun:race;noun:match;noun:game\n\
                   c3\tspeech\tverb:talk;verb:say;verb:run\n\
                   c4\tjoy\tnoun:delight;noun:bliss;verb:rejoice\n\
                   c5\tquickly\tadverb:fast;adverb:quickly;adverb:at once\n\
                   c6\tfear\tnoun:dread;noun:terror;noun:panic\n";
        load_thesaurus(src.as_bytes()).unwrap()
    }

    #[test]
    fn top_k_by_count() {
        let th = thesaurus();
        let freq = load_frequency_list(
            "walk\tverb\t50\ntalk\tverb\t40\nsay\tverb\t90\nrejoice\tverb\t10\nrun\tverb\t500\n".as_bytes(),
        )
        .unwrap();
        let got = select_frequent(Pos::Verb, NGram::Unigram, &freq, &th, 3);
        let terms: Vec<&str> = got.iter().map(|t| t.term.as_str()).collect();
        // run is the most frequent but has two senses
        assert_eq!(terms, vec!["say", "walk", "talk"]);
        assert!(got.iter().all(|t| t.sources.contains(&SourceTag::Unigram)));
        assert!(select_frequent(Pos::Verb, NGram::Unigram, &freq, &th, 0).is_empty());
    }

    #[test]
    fn count_ties_broken_lexicographically() {
        let th = thesaurus();
        let freq = load_frequency_list("walk\tverb\t5\ntalk\tverb\t5\nsay\tverb\t5\n".as_bytes()).unwrap();
        let got = select_frequent(Pos::Verb, NGram::Unigram, &freq, &th, 2);
        assert_eq!(got[0].term, "say");
        assert_eq!(got[1].term, "talk");
    }

    #[test]
    fn bigrams_tagged_separately() {
        let th = thesaurus();
        let freq = load_frequency_list("at once\tadverb\t7\nfast\tadverb\t9\n".as_bytes()).unwrap();
        let bi = select_frequent(Pos::Adverb, NGram::Bigram, &freq, &th, 10);
        assert_eq!(bi.len(), 1);
        assert_eq!(bi[0].term, "at once");
        assert_eq!(bi[0].sources, BTreeSet::from([SourceTag::Bigram]));
    }

    #[test]
    fn tagged_terms_expand_senses() {
        let th = thesaurus();
        let src = "race\tanger\ndread\tfear\nabsent\tjoy\n";
        let (terms, diag) = load_tagged_terms(src.as_bytes(), SourceTag::WordNetAffect, 2, &th).unwrap();
        assert_eq!(terms.len(), 3);
        assert_eq!(diag.absent, 1);
        let race: Vec<&str> = terms
            .iter()
            .filter(|t| t.term == "race")
            .map(|t| t.category_id.as_str())
            .collect();
        assert_eq!(race, vec!["c1", "c2"]);
        assert!(terms.iter().all(|t| t.aux_labels.len() == 1));
    }

    #[test]
    fn tagged_terms_respect_max_senses() {
        let th = thesaurus();
        let (terms, diag) =
            load_tagged_terms("race\tnegative\n".as_bytes(), SourceTag::GeneralInquirer, 1, &th).unwrap();
        assert!(terms.is_empty());
        assert_eq!(diag.too_ambiguous, 1);
        let (terms, _) = load_tagged_terms("".as_bytes(), SourceTag::GeneralInquirer, 3, &th).unwrap();
        assert!(terms.is_empty());
        assert!(load_tagged_terms("race\n".as_bytes(), SourceTag::GeneralInquirer, 3, &th).is_err());
    }

    #[test]
    fn four_sense_term_excluded_at_three() {
        let src = "a\th1\tnoun:x\nb\th2\tnoun:x\nc\th3\tnoun:x\nd\th4\tnoun:x\n";
        let th = load_thesaurus(src.as_bytes()).unwrap();
        let (terms, diag) = load_tagged_terms("x\tpositive\n".as_bytes(), SourceTag::GeneralInquirer, 3, &th).unwrap();
        assert!(terms.is_empty());
        assert_eq!(diag.too_ambiguous, 1);
    }

    fn target(term: &str, cat: &str, tag: SourceTag, label: Option<&str>) -> TargetTerm {
        TargetTerm {
            term: term.into(),
            category_id: cat.into(),
            pos: Pos::Noun,
            sources: BTreeSet::from([tag]),
            aux_labels: label.into_iter().map(str::to_string).collect(),
        }
    }

    #[test]
    fn union_merges_overlap() {
        let gi = vec![target("dread", "c6", SourceTag::GeneralInquirer, Some("negative"))];
        let wal = vec![target("dread", "c6", SourceTag::WordNetAffect, Some("fear"))];
        let u = build_target_union(&[gi, wal]);
        assert_eq!(u.len(), 1);
        assert_eq!(u[0].sources.len(), 2);
        assert_eq!(
            u[0].aux_labels,
            BTreeSet::from(["fear".to_string(), "negative".to_string()])
        );
    }

    #[test]
    fn union_of_disjoint_and_empty() {
        let a: Vec<_> = ["a", "b", "c"]
            .iter()
            .map(|t| target(t, "c1", SourceTag::Unigram, None))
            .collect();
        let b: Vec<_> = ["d", "e", "f", "g"]
            .iter()
            .map(|t| target(t, "c1", SourceTag::Bigram, None))
            .collect();
        assert_eq!(build_target_union(&[a, b]).len(), 7);
        assert!(build_target_union(&[]).is_empty());
    }

    #[test]
    fn targets_file_round_trip() {
        let u = build_target_union(&[vec![
            target("dread", "c6", SourceTag::GeneralInquirer, Some("negative")),
            target("at once", "c5", SourceTag::Bigram, None),
        ]]);
        let mut buf = Vec::new();
        write_targets(&mut buf, &u).unwrap();
        assert_eq!(read_targets(buf.as_slice()).unwrap(), u);
    }
}
