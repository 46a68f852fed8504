//! Synthetic annotators with planted ground truth.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{BufRead, Write};

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{One, Zero};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::domain::{
    intensity_rank, AxisMap, Emotion, EmotionMap, Framing, IntensityLevel, PolarityAxis, Pos, SenseKey, SourceTag,
};
use crate::error::{Error, Result};
use crate::hits::{assemble_hit, make_word_choice, Hit, OPTION_COUNT};
use crate::ingest::Assignment;
use crate::seed::{derive_seed, derived_rng};
use crate::targets::TargetTerm;
use crate::thesaurus::{Thesaurus, ThesaurusCategory};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum AnnotatorKind {
    /// Truthful, with a one-step intensity slip at rate `noise` per question.
    Diligent { noise: f64 },
    /// Uniform choice on every question.
    RandomClicker,
    /// Passes the gate with probability `gate_accuracy`, inverts intensities.
    Malicious { gate_accuracy: f64 },
    /// Leaves each field blank with probability `blank_prob`, clicks randomly otherwise.
    Spammer { blank_prob: f64 },
}

impl AnnotatorKind {
    pub fn label(&self) -> &'static str {
        match self {
            AnnotatorKind::Diligent { .. } => "diligent",
            AnnotatorKind::RandomClicker => "random-clicker",
            AnnotatorKind::Malicious { .. } => "malicious",
            AnnotatorKind::Spammer { .. } => "spammer",
        }
    }

    fn probability(&self) -> Option<f64> {
        match *self {
            AnnotatorKind::Diligent { noise } => Some(noise),
            AnnotatorKind::Malicious { gate_accuracy } => Some(gate_accuracy),
            AnnotatorKind::Spammer { blank_prob } => Some(blank_prob),
            AnnotatorKind::RandomClicker => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorProfile {
    #[serde(flatten)]
    pub kind: AnnotatorKind,
    pub count: usize,
    pub hits_per_annotator: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimConfig {
    pub seed: u64,
    pub targets: usize,
    #[serde(default = "default_raters")]
    pub raters_per_hit: usize,
    pub population: Vec<AnnotatorProfile>,
}

fn default_raters() -> usize {
    5
}

impl SimConfig {
    pub fn supply(&self) -> usize {
        self.population.iter().map(|p| p.count * p.hits_per_annotator).sum()
    }

    pub fn validate(&self, hit_count: usize) -> Result<()> {
        if self.raters_per_hit == 0 {
            return Err(Error::Config("raters_per_hit must be positive".into()));
        }
        for p in &self.population {
            if p.count == 0 || p.hits_per_annotator == 0 {
                return Err(Error::Config(format!("{} profile has a zero count", p.kind.label())));
            }
            if let Some(x) = p.kind.probability() {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Config(format!(
                        "{} probability {x} outside [0, 1]",
                        p.kind.label()
                    )));
                }
            }
            if p.hits_per_annotator > hit_count {
                return Err(Error::Config(format!(
                    "{} annotators take {} hits but only {hit_count} exist",
                    p.kind.label(),
                    p.hits_per_annotator
                )));
            }
        }
        let demand = self.raters_per_hit * hit_count;
        if self.supply() < demand {
            return Err(Error::Config(format!(
                "population supplies {} assignments, {demand} needed",
                self.supply()
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruthEntry {
    pub emotions: EmotionMap<IntensityLevel>,
    pub polarity: AxisMap<IntensityLevel>,
    pub is_emotion_word: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GroundTruthLexicon {
    pub entries: BTreeMap<SenseKey, TruthEntry>,
}

/// Level prior: mostly unassociated, the rest spread over the three emotive levels.
const LEVEL_WEIGHTS: [u32; 4] = [55, 15, 15, 15];

fn draw_level(rng: &mut ChaCha8Rng) -> IntensityLevel {
    let total: u32 = LEVEL_WEIGHTS.iter().sum();
    let mut x = rng.random_range(0..total);
    for (i, &w) in LEVEL_WEIGHTS.iter().enumerate() {
        if x < w {
            return IntensityLevel::ALL[i];
        }
        x -= w;
    }
    unreachable!("weights sum to total")
}

impl GroundTruthLexicon {
    /// Independent random truth per key.
    pub fn random<'a>(keys: impl IntoIterator<Item = &'a SenseKey>, seed: u64) -> Self {
        let entries = keys
            .into_iter()
            .map(|k| {
                let mut rng = derived_rng(seed, &["truth", &k.term, &k.category_id]);
                let emotions = EmotionMap::from_fn(|_| draw_level(&mut rng));
                let polarity = AxisMap::from_fn(|_| draw_level(&mut rng));
                let is_emotion_word = rng.random_bool(0.1);
                (
                    k.clone(),
                    TruthEntry {
                        emotions,
                        polarity,
                        is_emotion_word,
                    },
                )
            })
            .collect();
        GroundTruthLexicon { entries }
    }

    pub fn get(&self, key: &SenseKey) -> Option<&TruthEntry> {
        self.entries.get(key)
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

fn truth_header() -> String {
    let mut cols = vec!["term".to_string(), "category_id".to_string()];
    cols.extend(Emotion::ALL.iter().map(|e| e.as_str().to_string()));
    cols.extend(PolarityAxis::ALL.iter().map(|p| p.as_str().to_string()));
    cols.push("emotion_word".into());
    cols.join("\t")
}

pub fn write_truth<W: Write>(out: &mut W, truth: &GroundTruthLexicon) -> Result<()> {
    writeln!(out, "{}", truth_header())?;
    for (k, t) in &truth.entries {
        let mut cols: Vec<&str> = vec![&k.term, &k.category_id];
        cols.extend(t.emotions.0.iter().map(|l| l.as_str()));
        cols.extend(t.polarity.0.iter().map(|l| l.as_str()));
        cols.push(if t.is_emotion_word { "yes" } else { "no" });
        writeln!(out, "{}", cols.join("\t"))?;
    }
    Ok(())
}

pub fn read_truth<R: BufRead>(source: R) -> Result<GroundTruthLexicon> {
    let mut entries = BTreeMap::new();
    for (i, line) in source.lines().enumerate() {
        let lineno = i + 1;
        let line = line?;
        if lineno == 1 {
            if line.trim_end_matches('\r') != truth_header() {
                return Err(Error::Format("truth file header mismatch".into()));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.trim_end_matches('\r').split('\t').collect();
        if f.len() != 13 {
            return Err(Error::parse(lineno, format!("expected 13 fields, found {}", f.len())));
        }
        let lvl =
            |s: &str| -> Result<IntensityLevel> { s.parse().map_err(|e: Error| Error::parse(lineno, e.to_string())) };
        let mut emotions = EmotionMap([IntensityLevel::None; 8]);
        for i in 0..8 {
            emotions.0[i] = lvl(f[2 + i])?;
        }
        let is_emotion_word = match f[12] {
            "yes" => true,
            "no" => false,
            s => return Err(Error::parse(lineno, format!("bad emotion-word flag `{s}`"))),
        };
        let key = SenseKey::new(f[0], f[1]);
        let entry = TruthEntry {
            emotions,
            polarity: AxisMap([lvl(f[10])?, lvl(f[11])?]),
            is_emotion_word,
        };
        if entries.insert(key.clone(), entry).is_some() {
            return Err(Error::Format(format!("duplicate truth entry {key}")));
        }
    }
    Ok(GroundTruthLexicon { entries })
}

/// Simulator output: the assignment stream and who produced what.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub assignments: Vec<Assignment>,
    pub roster: BTreeMap<String, AnnotatorKind>,
}

impl Simulation {
    pub fn kind_of(&self, annotator_id: &str) -> Option<&AnnotatorKind> {
        self.roster.get(annotator_id)
    }

    pub fn ids_of(&self, label: &str) -> BTreeSet<String> {
        self.roster
            .iter()
            .filter(|(_, k)| k.label() == label)
            .map(|(id, _)| id.clone())
            .collect()
    }
}

/// Diligent slip: one step up or down, forced inward at the ends.
fn slip(level: IntensityLevel, rng: &mut ChaCha8Rng) -> IntensityLevel {
    let r = intensity_rank(level);
    let next = match r {
        0 => 1,
        3 => 2,
        _ if rng.random_bool(0.5) => r + 1,
        _ => r - 1,
    };
    IntensityLevel::ALL[next]
}

fn invert(level: IntensityLevel) -> IntensityLevel {
    IntensityLevel::ALL[3 - intensity_rank(level)]
}

fn uniform_level(rng: &mut ChaCha8Rng) -> IntensityLevel {
    IntensityLevel::ALL[rng.random_range(0..4)]
}

fn answer_sheet(
    kind: AnnotatorKind,
    hit: &Hit,
    truth: &TruthEntry,
    annotator_id: &str,
    rng: &mut ChaCha8Rng,
) -> Assignment {
    let correct = hit.correct_index();
    let n_opts = OPTION_COUNT as u8;
    let mut a = Assignment {
        hit_id: hit.hit_id.clone(),
        annotator_id: annotator_id.to_string(),
        word_choice: None,
        positive: None,
        negative: None,
        emotions: EmotionMap([None; 8]),
        is_emotion_word: None,
    };
    let fill = |a: &mut Assignment,
                rng: &mut ChaCha8Rng,
                f: &mut dyn FnMut(IntensityLevel, &mut ChaCha8Rng) -> IntensityLevel| {
        a.negative = Some(f(truth.polarity[PolarityAxis::Negative], rng));
        a.positive = Some(f(truth.polarity[PolarityAxis::Positive], rng));
        for e in Emotion::ALL {
            a.emotions[e] = Some(f(truth.emotions[e], rng));
        }
    };
    match kind {
        AnnotatorKind::Diligent { noise } => {
            a.word_choice = Some(correct);
            fill(&mut a, rng, &mut |t, rng| {
                if rng.random_bool(noise) {
                    slip(t, rng)
                } else {
                    t
                }
            });
            a.is_emotion_word = Some(truth.is_emotion_word ^ rng.random_bool(noise));
        }
        AnnotatorKind::RandomClicker => {
            a.word_choice = Some(rng.random_range(0..n_opts));
            fill(&mut a, rng, &mut |_, rng| uniform_level(rng));
            a.is_emotion_word = Some(rng.random_bool(0.5));
        }
        AnnotatorKind::Malicious { gate_accuracy } => {
            a.word_choice = Some(if rng.random_bool(gate_accuracy) {
                correct
            } else {
                (correct + rng.random_range(1..n_opts)) % n_opts
            });
            fill(&mut a, rng, &mut |t, _| invert(t));
            a.is_emotion_word = Some(!truth.is_emotion_word);
        }
        AnnotatorKind::Spammer { blank_prob } => {
            let keep = |rng: &mut ChaCha8Rng| !rng.random_bool(blank_prob);
            a.word_choice = keep(rng).then(|| rng.random_range(0..n_opts));
            a.negative = keep(rng).then(|| uniform_level(rng));
            a.positive = keep(rng).then(|| uniform_level(rng));
            for e in Emotion::ALL {
                a.emotions[e] = keep(rng).then(|| uniform_level(rng));
            }
            a.is_emotion_word = keep(rng).then(|| rng.random_bool(0.5));
        }
    }
    a
}

/// Annotator ids with their kind and workload, in profile order.
pub fn roster(cfg: &SimConfig) -> Vec<(String, AnnotatorKind, usize)> {
    let mut next: BTreeMap<&str, usize> = BTreeMap::new();
    let mut out = Vec::new();
    for p in &cfg.population {
        for _ in 0..p.count {
            let n = next.entry(p.kind.label()).or_insert(0);
            *n += 1;
            out.push((format!("{}-{:04}", p.kind.label(), n), p.kind, p.hits_per_annotator));
        }
    }
    out
}

/// Seat annotators on hits: each annotator gets a run of consecutive slots
/// in a shuffled hit cycle, so no annotator sees a hit twice and every hit
/// receives exactly `raters_per_hit` annotators.
pub fn schedule(cfg: &SimConfig, hit_count: usize) -> Result<Vec<Vec<usize>>> {
    cfg.validate(hit_count)?;
    let people = roster(cfg);
    let mut rng = derived_rng(cfg.seed, &["schedule"]);
    let mut order: Vec<usize> = (0..people.len()).collect();
    order.shuffle(&mut rng);
    let mut cycle: Vec<usize> = (0..hit_count).collect();
    cycle.shuffle(&mut rng);
    let demand = cfg.raters_per_hit * hit_count;
    let mut seats: Vec<Vec<usize>> = vec![Vec::with_capacity(cfg.raters_per_hit); hit_count];
    let mut slot = 0usize;
    'outer: for &p in &order {
        for _ in 0..people[p].2 {
            if slot == demand {
                break 'outer;
            }
            seats[cycle[slot % hit_count]].push(p);
            slot += 1;
        }
    }
    for s in &mut seats {
        s.sort_unstable();
    }
    Ok(seats)
}

/// Generate one assignment per seat. Output follows hit order, then roster order.
pub fn simulate_population(cfg: &SimConfig, truth: &GroundTruthLexicon, hits: &[Hit]) -> Result<Simulation> {
    let seats = schedule(cfg, hits.len())?;
    let people = roster(cfg);
    let mut assignments = Vec::with_capacity(cfg.raters_per_hit * hits.len());
    for (hit, seated) in hits.iter().zip(&seats) {
        let t = truth
            .get(&hit.key())
            .ok_or_else(|| Error::Config(format!("no ground truth for {}", hit.key())))?;
        for &p in seated {
            let (id, kind, _) = &people[p];
            let mut rng = derived_rng(cfg.seed, &["answer", &hit.hit_id, id]);
            assignments.push(answer_sheet(*kind, hit, t, id, &mut rng));
        }
    }
    let used: BTreeSet<&str> = assignments.iter().map(|a| a.annotator_id.as_str()).collect();
    let roster = people
        .into_iter()
        .filter(|(id, _, _)| used.contains(id.as_str()))
        .map(|(id, k, _)| (id, k))
        .collect();
    Ok(Simulation { assignments, roster })
}

/// A self-contained synthetic study: thesaurus, targets, HITs and truth.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub thesaurus: Thesaurus,
    pub targets: Vec<TargetTerm>,
    pub hits: Vec<Hit>,
    pub truth: GroundTruthLexicon,
}

/// `n_terms` monosemous targets, one per category, with generated head words.
pub fn synthetic_corpus(n_terms: usize, seed: u64, framing: Framing) -> Result<SyntheticCorpus> {
    let n_categories = n_terms.max(OPTION_COUNT + 2);
    let width = n_categories.to_string().len().max(4);
    let categories: Vec<ThesaurusCategory> = (0..n_categories)
        .map(|i| ThesaurusCategory {
            category_id: format!("c{i:0width$}"),
            head_word: format!("head{i:0width$}"),
            members: vec![(format!("term{i:0width$}"), Pos::Noun)],
        })
        .collect();
    let thesaurus = Thesaurus::from_categories(categories)?;
    let targets: Vec<TargetTerm> = thesaurus.categories()[..n_terms]
        .iter()
        .map(|c| TargetTerm {
            term: c.members[0].0.clone(),
            category_id: c.category_id.clone(),
            pos: Pos::Noun,
            sources: BTreeSet::from([SourceTag::Unigram]),
            aux_labels: BTreeSet::new(),
        })
        .collect();
    let hit_seed = derive_seed(seed, &["hits"]);
    let hits = targets
        .iter()
        .map(|t| assemble_hit(t, make_word_choice(t, &thesaurus, hit_seed)?, framing))
        .collect::<Result<Vec<_>>>()?;
    let keys: Vec<SenseKey> = targets.iter().map(TargetTerm::key).collect();
    let truth = GroundTruthLexicon::random(&keys, derive_seed(seed, &["truth"]));
    Ok(SyntheticCorpus {
        thesaurus,
        targets,
        hits,
        truth,
    })
}

/// Exact probability that a uniform guesser over four options reaches
/// `threshold` accuracy on `m_hits` gate questions.
pub fn expected_random_pass_rate(m_hits: u32, threshold: Ratio<u32>) -> Result<BigRational> {
    if m_hits == 0 {
        return Err(Error::domain("expected_random_pass_rate needs at least one hit"));
    }
    let (num, den) = (*threshold.numer() as u64, *threshold.denom() as u64);
    let need = (num * m_hits as u64).div_ceil(den);
    let m = m_hits as u64;
    let mut total = BigInt::zero();
    let mut binom = BigInt::one();
    for k in 0..=m {
        if k > 0 {
            binom = binom * BigInt::from(m - k + 1) / BigInt::from(k);
        }
        if k >= need {
            total += &binom * BigInt::from(3u32).pow((m - k) as u32);
        }
    }
    Ok(BigRational::new(total, BigInt::from(4u32).pow(m_hits)))
}
