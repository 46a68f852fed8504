//! Thesaurus and frequency-list loading.
//!
//! Thesaurus file: one category per line,
//! `category_id<TAB>head_word<TAB>pos:term;pos:term;...`.
//! Frequency file: `term<TAB>pos<TAB>count`.
//! Blank lines are ignored in both.

use std::collections::{BTreeSet, HashMap};
use std::io::{BufRead, Write};

use crate::domain::Pos;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ThesaurusCategory {
    pub category_id: String,
    pub head_word: String,
    /// Member terms in file order, deduplicated.
    pub members: Vec<(String, Pos)>,
}

impl ThesaurusCategory {
    pub fn contains(&self, term: &str) -> bool {
        self.members.iter().any(|(t, _)| t == term)
    }

    pub fn member_pos(&self, term: &str) -> Option<Pos> {
        self.members.iter().find(|(t, _)| t == term).map(|(_, p)| *p)
    }
}

/// Categories act as coarse senses: a term listed in n categories has n senses.
#[derive(Debug, Clone, Default)]
pub struct Thesaurus {
    categories: Vec<ThesaurusCategory>,
    by_id: HashMap<String, usize>,
    index: HashMap<String, BTreeSet<usize>>,
}

impl Thesaurus {
    pub fn from_categories(categories: Vec<ThesaurusCategory>) -> Result<Self> {
        let mut th = Thesaurus::default();
        for cat in categories {
            th.push(cat)?;
        }
        Ok(th)
    }

    fn push(&mut self, cat: ThesaurusCategory) -> Result<()> {
        if cat.head_word.is_empty() {
            return Err(Error::Format(format!(
                "category `{}` has no head word",
                cat.category_id
            )));
        }
        if cat.members.is_empty() {
            return Err(Error::Format(format!("category `{}` has no members", cat.category_id)));
        }
        let idx = self.categories.len();
        if self.by_id.insert(cat.category_id.clone(), idx).is_some() {
            return Err(Error::Format(format!("duplicate category id `{}`", cat.category_id)));
        }
        for (term, _) in &cat.members {
            self.index.entry(term.clone()).or_default().insert(idx);
        }
        self.categories.push(cat);
        Ok(())
    }

    pub fn categories(&self) -> &[ThesaurusCategory] {
        &self.categories
    }

    pub fn len(&self) -> usize {
        self.categories.len()
    }

    pub fn is_empty(&self) -> bool {
        self.categories.is_empty()
    }

    pub fn category(&self, category_id: &str) -> Option<&ThesaurusCategory> {
        self.by_id.get(category_id).map(|&i| &self.categories[i])
    }

    pub fn category_index(&self, category_id: &str) -> Option<usize> {
        self.by_id.get(category_id).copied()
    }

    /// Indices of the categories listing `term`, ascending.
    pub fn categories_of(&self, term: &str) -> impl Iterator<Item = usize> + '_ {
        self.index.get(term).into_iter().flatten().copied()
    }

    pub fn sense_count(&self, term: &str) -> usize {
        self.index.get(term).map_or(0, BTreeSet::len)
    }

    /// Number of distinct indexed terms.
    pub fn term_count(&self) -> usize {
        self.index.len()
    }
}

pub fn sense_count(term: &str, th: &Thesaurus) -> usize {
    th.sense_count(term)
}

fn strip_eol(line: &str) -> &str {
    line.strip_suffix('\r').unwrap_or(line)
}

pub fn load_thesaurus<R: BufRead>(source: R) -> Result<Thesaurus> {
    let mut th = Thesaurus::default();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = strip_eol(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let category_id = fields[0].trim();
        let head_word = fields[1].trim();
        if category_id.is_empty() {
            return Err(Error::parse(lineno, "missing category id"));
        }
        if head_word.is_empty() {
            return Err(Error::parse(lineno, "missing head word"));
        }
        let mut members: Vec<(String, Pos)> = Vec::new();
        for item in fields[2].split(';').map(str::trim).filter(|s| !s.is_empty()) {
            let (pos, term) = item
                .split_once(':')
                .ok_or_else(|| Error::parse(lineno, format!("member `{item}` lacks a `pos:` prefix")))?;
            let pos: Pos = pos
                .trim()
                .parse()
                .map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
            let term = term.trim();
            if term.is_empty() {
                return Err(Error::parse(lineno, "empty member term"));
            }
            if !members.iter().any(|(t, p)| t == term && *p == pos) {
                members.push((term.to_string(), pos));
            }
        }
        if members.is_empty() {
            return Err(Error::parse(lineno, "category has no members"));
        }
        th.push(ThesaurusCategory {
            category_id: category_id.to_string(),
            head_word: head_word.to_string(),
            members,
        })
        .map_err(|e| match e {
            Error::Format(msg) => Error::Format(format!("line {lineno}: {msg}")),
            other => other,
        })?;
    }
    Ok(th)
}

pub fn write_thesaurus<W: Write>(out: &mut W, th: &Thesaurus) -> Result<()> {
    for c in th.categories() {
        let members: Vec<String> = c.members.iter().map(|(t, p)| format!("{p}:{t}")).collect();
        writeln!(out, "{}\t{}\t{}", c.category_id, c.head_word, members.join(";"))?;
    }
    Ok(())
}

/// Corpus counts per (term, part of speech).
#[derive(Debug, Clone, Default)]
pub struct FrequencyList {
    entries: Vec<(String, Pos, u64)>,
}

impl FrequencyList {
    pub fn new(entries: Vec<(String, Pos, u64)>) -> Self {
        FrequencyList { entries }
    }

    pub fn entries(&self) -> &[(String, Pos, u64)] {
        &self.entries
    }

    pub fn count(&self, term: &str, pos: Pos) -> Option<u64> {
        self.entries
            .iter()
            .find(|(t, p, _)| t == term && *p == pos)
            .map(|(_, _, c)| *c)
    }
}

pub fn load_frequency_list<R: BufRead>(source: R) -> Result<FrequencyList> {
    let mut seen: HashMap<(String, Pos), usize> = HashMap::new();
    let mut entries = Vec::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = strip_eol(&line);
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::parse(
                lineno,
                format!("expected 3 tab-separated fields, found {}", fields.len()),
            ));
        }
        let term = fields[0].trim();
        if term.is_empty() {
            return Err(Error::parse(lineno, "empty term"));
        }
        let pos: Pos = fields[1]
            .trim()
            .parse()
            .map_err(|e: Error| Error::parse(lineno, e.to_string()))?;
        let count: u64 = fields[2]
            .trim()
            .parse()
            .map_err(|_| Error::parse(lineno, format!("bad count `{}`", fields[2])))?;
        if seen.insert((term.to_string(), pos), lineno).is_some() {
            return Err(Error::Format(format!(
                "line {lineno}: duplicate entry for `{term}` ({pos})"
            )));
        }
        entries.push((term.to_string(), pos, count));
    }
    Ok(FrequencyList { entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    const FIXTURE: &str = "c1\tshake\tverb:startle;verb:jolt;noun:shock\n\
                           c2\thonesty\tnoun:candour;noun:frankness;noun:shock\n";

    #[test]
    fn loads_two_categories() {
        let th = load_thesaurus(FIXTURE.as_bytes()).unwrap();
        assert_eq!(th.len(), 2);
        assert_eq!(th.term_count(), 5);
        assert_eq!(th.category("c2").unwrap().head_word, "honesty");
        assert_eq!(th.category("c1").unwrap().member_pos("jolt"), Some(Pos::Verb));
    }

    #[test]
    fn index_consistent_with_members() {
        let th = load_thesaurus(FIXTURE.as_bytes()).unwrap();
        let slots: usize = th.categories().iter().map(|c| c.members.len()).sum();
        assert_eq!(slots, 6);
        let indexed: usize = ["startle", "jolt", "shock", "candour", "frankness"]
            .iter()
            .map(|t| th.sense_count(t))
            .sum();
        assert_eq!(indexed, slots);
    }

    #[test]
    fn sense_counts() {
        let th = load_thesaurus(FIXTURE.as_bytes()).unwrap();
        assert_eq!(sense_count("startle", &th), 1);
        assert_eq!(sense_count("shock", &th), 2);
        assert_eq!(sense_count("zebra", &th), 0);
    }

    #[test]
    fn empty_file() {
        let th = load_thesaurus("".as_bytes()).unwrap();
        assert!(th.is_empty());
    }

    #[test]
    fn missing_head_word_reports_line() {
        let src = "c1\tshake\tverb:startle\nc2\tnoun:candour\n";
        match load_thesaurus(src.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
        let src = "c1\t\tverb:startle\n";
        match load_thesaurus(src.as_bytes()) {
            Err(Error::Parse { line, message }) => {
                assert_eq!(line, 1);
                assert!(message.contains("head word"));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn duplicate_category_rejected() {
        let src = "c1\tshake\tverb:startle\nc1\tother\tnoun:x\n";
        assert!(matches!(load_thesaurus(src.as_bytes()), Err(Error::Format(_))));
    }

    #[test]
    fn bad_pos_rejected() {
        let src = "c1\tshake\tpreposition:startle\n";
        assert!(matches!(
            load_thesaurus(src.as_bytes()),
            Err(Error::Parse { line: 1, .. })
        ));
    }

    #[test]
    fn frequency_list() {
        let src = "startle\tverb\t120\nshock\tnoun\t90\n";
        let fl = load_frequency_list(src.as_bytes()).unwrap();
        assert_eq!(fl.count("startle", Pos::Verb), Some(120));
        assert!(load_frequency_list("x\tnoun\t-3\n".as_bytes()).is_err());
        assert!(load_frequency_list("x\tnoun\t3\nx\tnoun\t4\n".as_bytes()).is_err());
    }
}
