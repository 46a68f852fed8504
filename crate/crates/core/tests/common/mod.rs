#![allow(dead_code)]

use std::collections::BTreeSet;

use emolex::hits::{assemble_hit, make_word_choice};
use emolex::sim::{simulate_population, AnnotatorKind, AnnotatorProfile, GroundTruthLexicon, SimConfig, Simulation};
use emolex::targets::TargetTerm;
use emolex::thesaurus::{Thesaurus, ThesaurusCategory};
use emolex::{Framing, Hit, Pos, SenseKey, SourceTag};

pub fn diligent(noise: f64, count: usize, each: usize) -> AnnotatorProfile {
    AnnotatorProfile {
        kind: AnnotatorKind::Diligent { noise },
        count,
        hits_per_annotator: each,
    }
}

pub fn clickers(count: usize, each: usize) -> AnnotatorProfile {
    AnnotatorProfile {
        kind: AnnotatorKind::RandomClicker,
        count,
        hits_per_annotator: each,
    }
}

/// 2,000 HITs at five raters: fifty random clickers on ten HITs each, and a
/// long-tailed diligent crowd where a few people do most of the work.
pub fn long_tail_population(noise: f64) -> Vec<AnnotatorProfile> {
    vec![
        clickers(50, 10),
        diligent(noise, 5, 800),
        diligent(noise, 15, 200),
        diligent(noise, 50, 30),
        diligent(noise, 150, 5),
        diligent(noise, 250, 1),
    ]
}

pub fn simulate(seed: u64, hits: &[Hit], truth: &GroundTruthLexicon, population: Vec<AnnotatorProfile>) -> Simulation {
    let cfg = SimConfig {
        seed,
        targets: hits.len(),
        raters_per_hit: 5,
        population,
    };
    simulate_population(&cfg, truth, hits).expect("simulation")
}

/// A small study whose targets fill every breakdown row: unigrams and
/// bigrams for each part of speech, polarity-lexicon terms of each class
/// and affect-lexicon terms for six emotions.
pub struct Study {
    pub thesaurus: Thesaurus,
    pub targets: Vec<TargetTerm>,
}

const PER_ROW: usize = 6;

impl Study {
    pub fn new() -> Self {
        let mut specs: Vec<(String, Pos, SourceTag, Option<&str>)> = Vec::new();
        for pos in [Pos::Adjective, Pos::Adverb, Pos::Noun, Pos::Verb] {
            for i in 0..PER_ROW {
                specs.push((format!("{pos}{i}"), pos, SourceTag::Unigram, None));
                specs.push((format!("{pos} pair{i}"), pos, SourceTag::Bigram, None));
            }
        }
        for class in ["negative", "neutral", "positive"] {
            for i in 0..PER_ROW {
                specs.push((
                    format!("gi-{class}{i}"),
                    Pos::Noun,
                    SourceTag::GeneralInquirer,
                    Some(class),
                ));
            }
        }
        for emo in ["anger", "disgust", "fear", "joy", "sadness", "surprise"] {
            for i in 0..PER_ROW {
                specs.push((
                    format!("wal-{emo}{i}"),
                    Pos::Adjective,
                    SourceTag::WordNetAffect,
                    Some(emo),
                ));
            }
        }
        let mut categories = Vec::new();
        let mut targets = Vec::new();
        for (i, (term, pos, tag, label)) in specs.into_iter().enumerate() {
            let id = format!("k{i:03}");
            categories.push(ThesaurusCategory {
                category_id: id.clone(),
                head_word: format!("head{i}"),
                members: vec![(term.clone(), pos)],
            });
            targets.push(TargetTerm {
                term,
                category_id: id,
                pos,
                sources: BTreeSet::from([tag]),
                aux_labels: label.map(|l| BTreeSet::from([l.to_string()])).unwrap_or_default(),
            });
        }
        Study {
            thesaurus: Thesaurus::from_categories(categories).expect("thesaurus"),
            targets,
        }
    }

    pub fn hits(&self, framing: Framing, seed: u64) -> Vec<Hit> {
        self.targets
            .iter()
            .map(|t| assemble_hit(t, make_word_choice(t, &self.thesaurus, seed).unwrap(), framing).unwrap())
            .collect()
    }

    pub fn keys(&self) -> Vec<SenseKey> {
        self.targets.iter().map(TargetTerm::key).collect()
    }
}

/// A complete answer sheet giving `level` to every emotion and polarity
/// question.
pub fn sheet(hit: &Hit, annotator: &str, gate_ok: bool, level: emolex::IntensityLevel) -> emolex::Assignment {
    let c = hit.correct_index();
    emolex::Assignment {
        hit_id: hit.hit_id.clone(),
        annotator_id: annotator.to_string(),
        word_choice: Some(if gate_ok { c } else { (c + 1) % 4 }),
        positive: Some(level),
        negative: Some(level),
        emotions: emolex::domain::EmotionMap([Some(level); 8]),
        is_emotion_word: Some(false),
    }
}
