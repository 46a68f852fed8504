//! Word-choice gate questions and HIT assembly.
//!
//! Every HIT opens with a four-way word-choice question whose correct option
//! is the head word of the target's thesaurus category; the remaining three
//! options are head words of categories that do not list the target. The
//! question conveys the intended sense and screens out annotators who do not
//! know the word.

use std::collections::HashMap;
use std::io::{BufRead, Write};

use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::domain::{Emotion, Framing, IntensityLevel, PolarityAxis, Pos, SenseKey};
use crate::error::{Error, Result};
use crate::seed::{derived_rng, hex_tag};
use crate::targets::TargetTerm;
use crate::thesaurus::Thesaurus;

pub const OPTION_COUNT: usize = 4;

/// One question slot of a HIT.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Question {
    WordChoice,
    Polarity(PolarityAxis),
    Emotion(Emotion),
    IsEmotion,
}

/// Emotion order used in the questionnaire (differs from the canonical order).
pub const HIT_EMOTION_ORDER: [Emotion; 8] = [
    Emotion::Joy,
    Emotion::Sadness,
    Emotion::Fear,
    Emotion::Anger,
    Emotion::Trust,
    Emotion::Disgust,
    Emotion::Surprise,
    Emotion::Anticipation,
];

/// Q1 through Q12.
pub const QUESTION_ORDER: [Question; 12] = [
    Question::WordChoice,
    Question::Polarity(PolarityAxis::Positive),
    Question::Polarity(PolarityAxis::Negative),
    Question::Emotion(HIT_EMOTION_ORDER[0]),
    Question::Emotion(HIT_EMOTION_ORDER[1]),
    Question::Emotion(HIT_EMOTION_ORDER[2]),
    Question::Emotion(HIT_EMOTION_ORDER[3]),
    Question::Emotion(HIT_EMOTION_ORDER[4]),
    Question::Emotion(HIT_EMOTION_ORDER[5]),
    Question::Emotion(HIT_EMOTION_ORDER[6]),
    Question::Emotion(HIT_EMOTION_ORDER[7]),
    Question::IsEmotion,
];

/// Two words strongly associated with each emotion, quoted in its prompt.
pub fn exemplars(emotion: Emotion) -> (&'static str, &'static str) {
    match emotion {
        Emotion::Joy => ("happy", "fun"),
        Emotion::Sadness => ("failure", "heart-break"),
        Emotion::Fear => ("horror", "scary"),
        Emotion::Anger => ("rage", "shouting"),
        Emotion::Trust => ("faith", "integrity"),
        Emotion::Disgust => ("gross", "cruelty"),
        Emotion::Surprise => ("startle", "sudden"),
        Emotion::Anticipation => ("expect", "eager"),
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WordChoiceQuestion {
    pub term: String,
    pub category_id: String,
    pub options: [String; OPTION_COUNT],
    pub correct_index: u8,
}

impl WordChoiceQuestion {
    pub fn correct_option(&self) -> &str {
        &self.options[self.correct_index as usize]
    }
}

/// Build the gate question for `target`.
///
/// Distractors are drawn uniformly without replacement from categories that
/// do not list the target term, skipping any whose head word repeats an
/// option already chosen; the four options are then shuffled. The result
/// depends only on the target, the thesaurus and `seed`.
pub fn make_word_choice(target: &TargetTerm, th: &Thesaurus, seed: u64) -> Result<WordChoiceQuestion> {
    let gen_err = |reason: String| Error::Generation {
        term: target.term.clone(),
        reason,
    };
    let own = th
        .category(&target.category_id)
        .ok_or_else(|| gen_err(format!("category `{}` is not in the thesaurus", target.category_id)))?;
    if !own.contains(&target.term) {
        return Err(gen_err(format!(
            "category `{}` does not list the term",
            target.category_id
        )));
    }

    let mut eligible: Vec<usize> = (0..th.len())
        .filter(|&i| !th.categories()[i].contains(&target.term))
        .collect();
    let mut rng = derived_rng(seed, &["word-choice", &target.term, &target.category_id]);
    eligible.shuffle(&mut rng);

    let mut options: Vec<String> = vec![own.head_word.clone()];
    for idx in eligible {
        let head = &th.categories()[idx].head_word;
        if !options.contains(head) {
            options.push(head.clone());
            if options.len() == OPTION_COUNT {
                break;
            }
        }
    }
    if options.len() < OPTION_COUNT {
        return Err(gen_err(format!(
            "only {} distinct distractor categories available, need {}",
            options.len() - 1,
            OPTION_COUNT - 1
        )));
    }
    options.shuffle(&mut rng);
    let correct_index = options
        .iter()
        .position(|o| *o == own.head_word)
        .expect("correct option present") as u8;
    Ok(WordChoiceQuestion {
        term: target.term.clone(),
        category_id: target.category_id.clone(),
        options: options.try_into().expect("four options"),
        correct_index,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Hit {
    pub hit_id: String,
    pub term: String,
    pub category_id: String,
    pub pos: Pos,
    pub framing: Framing,
    pub word_choice: WordChoiceQuestion,
}

pub fn hit_id_for(term: &str, category_id: &str, framing: Framing) -> String {
    format!("hit-{}", hex_tag(&[framing.as_str(), category_id, term]))
}

pub fn assemble_hit(target: &TargetTerm, wc: WordChoiceQuestion, framing: Framing) -> Result<Hit> {
    if wc.term != target.term || wc.category_id != target.category_id {
        return Err(Error::domain(format!(
            "word-choice question for `{}` does not match target `{}`",
            SenseKey::new(wc.term.clone(), wc.category_id.clone()),
            target.key()
        )));
    }
    Ok(Hit {
        hit_id: hit_id_for(&target.term, &target.category_id, framing),
        term: target.term.clone(),
        category_id: target.category_id.clone(),
        pos: target.pos,
        framing,
        word_choice: wc,
    })
}

impl Hit {
    pub fn key(&self) -> SenseKey {
        SenseKey::new(self.term.clone(), self.category_id.clone())
    }

    pub fn correct_index(&self) -> u8 {
        self.word_choice.correct_index
    }

    /// Question text for one slot.
    pub fn prompt(&self, q: Question) -> String {
        let w = &self.term;
        match q {
            Question::WordChoice => format!("Which word is closest in meaning (most related) to {w}?"),
            Question::Polarity(PolarityAxis::Positive) => format!("How positive (good, praising) is the word {w}?"),
            Question::Polarity(PolarityAxis::Negative) => format!("How negative (bad, criticizing) is the word {w}?"),
            Question::Emotion(e) => {
                let (a, b) = exemplars(e);
                match self.framing {
                    Framing::Associated => format!(
                        "How much is {w} associated with the emotion {e}? \
                         (For example, {a} and {b} are strongly associated with {e}.)"
                    ),
                    Framing::Evokes => format!(
                        "How much does {w} evoke the emotion {e}? \
                         (For example, {a} and {b} strongly evoke {e}.)"
                    ),
                }
            }
            Question::IsEmotion => format!(
                "Is {w} an emotion? (For example: love is an emotion; shark is associated \
                 with fear (an emotion), but shark is not an emotion.)"
            ),
        }
    }

    /// Answer options for one slot, in answer-index order.
    pub fn choices(&self, q: Question) -> Vec<String> {
        let w = &self.term;
        let adverb = |l: IntensityLevel| match l {
            IntensityLevel::None => "not",
            IntensityLevel::Weak => "weakly",
            IntensityLevel::Moderate => "moderately",
            IntensityLevel::Strong => "strongly",
        };
        match q {
            Question::WordChoice => self.word_choice.options.to_vec(),
            Question::Polarity(axis) => IntensityLevel::ALL
                .iter()
                .map(|&l| format!("{w} is {} {axis}", adverb(l)))
                .collect(),
            Question::Emotion(e) => IntensityLevel::ALL
                .iter()
                .map(|&l| match (self.framing, l) {
                    (Framing::Associated, _) => format!("{w} is {} associated with {e}", adverb(l)),
                    (Framing::Evokes, IntensityLevel::None) => format!("{w} does not evoke {e}"),
                    (Framing::Evokes, _) => format!("{w} {} evokes {e}", adverb(l)),
                })
                .collect(),
            Question::IsEmotion => vec![format!("No, {w} is not an emotion"), format!("Yes, {w} is an emotion")],
        }
    }
}

/// Id lookup over a HIT list.
#[derive(Debug, Clone)]
pub struct HitIndex<'a> {
    by_id: HashMap<&'a str, &'a Hit>,
}

impl<'a> HitIndex<'a> {
    pub fn new(hits: &'a [Hit]) -> Self {
        HitIndex {
            by_id: hits.iter().map(|h| (h.hit_id.as_str(), h)).collect(),
        }
    }

    pub fn get(&self, hit_id: &str) -> Option<&'a Hit> {
        self.by_id.get(hit_id).copied()
    }

    pub fn require(&self, hit_id: &str) -> Result<&'a Hit> {
        self.get(hit_id)
            .ok_or_else(|| Error::domain(format!("assignment references unknown hit `{hit_id}`")))
    }

    pub fn len(&self) -> usize {
        self.by_id.len()
    }

    pub fn is_empty(&self) -> bool {
        self.by_id.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum HitLayout {
    /// Tab-separated records, one HIT per line.
    #[default]
    Records,
    /// Human-readable questionnaire.
    Text,
}

pub const HIT_HEADER: &str = "hit_id\tterm\tcategory_id\tpos\tframing\toptions\tcorrect_index";

pub fn render_hits<W: Write>(hits: &[Hit], out: &mut W, layout: HitLayout) -> Result<usize> {
    match layout {
        HitLayout::Records => {
            writeln!(out, "{HIT_HEADER}")?;
            for h in hits {
                for o in &h.word_choice.options {
                    if o.contains('|') || o.contains('\t') {
                        return Err(Error::Format(format!("option `{o}` cannot be encoded")));
                    }
                }
                writeln!(
                    out,
                    "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                    h.hit_id,
                    h.term,
                    h.category_id,
                    h.pos,
                    h.framing,
                    h.word_choice.options.join("|"),
                    h.word_choice.correct_index
                )?;
            }
        }
        HitLayout::Text => {
            for (i, h) in hits.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                write_questionnaire(h, out)?;
            }
        }
    }
    Ok(hits.len())
}

fn write_questionnaire<W: Write>(h: &Hit, out: &mut W) -> Result<()> {
    writeln!(out, "HIT {} ({} / {})", h.hit_id, h.category_id, h.framing)?;
    writeln!(out, "Prompt word: {}", h.term)?;
    for (n, q) in QUESTION_ORDER.iter().enumerate() {
        writeln!(out)?;
        writeln!(out, "Q{}. {}", n + 1, h.prompt(*q))?;
        for c in h.choices(*q) {
            writeln!(out, "  - {c}")?;
        }
    }
    Ok(())
}

pub fn parse_hits<R: BufRead>(source: R) -> Result<Vec<Hit>> {
    let mut hits: Vec<Hit> = Vec::new();
    let mut seen: HashMap<String, usize> = HashMap::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if lineno == 1 {
            if line != HIT_HEADER {
                return Err(Error::Format("HIT file header mismatch".into()));
            }
            continue;
        }
        if line.is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != 7 {
            return Err(Error::parse(lineno, format!("expected 7 fields, found {}", f.len())));
        }
        let err = |e: Error| Error::parse(lineno, e.to_string());
        let options: Vec<String> = f[5].split('|').map(str::to_string).collect();
        let options: [String; OPTION_COUNT] = options
            .try_into()
            .map_err(|_| Error::parse(lineno, "expected 4 options"))?;
        let correct_index: u8 = f[6]
            .parse()
            .ok()
            .filter(|&i: &u8| (i as usize) < OPTION_COUNT)
            .ok_or_else(|| Error::parse(lineno, format!("bad correct index `{}`", f[6])))?;
        if let Some(prev) = seen.insert(f[0].to_string(), lineno) {
            return Err(Error::Format(format!(
                "line {lineno}: hit id `{}` repeats line {prev}",
                f[0]
            )));
        }
        hits.push(Hit {
            hit_id: f[0].to_string(),
            term: f[1].to_string(),
            category_id: f[2].to_string(),
            pos: f[3].parse().map_err(err)?,
            framing: f[4].parse().map_err(err)?,
            word_choice: WordChoiceQuestion {
                term: f[1].to_string(),
                category_id: f[2].to_string(),
                options,
                correct_index,
            },
        });
    }
    Ok(hits)
}
