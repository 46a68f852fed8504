mod common;

use emolex::hits::HitIndex;
use emolex::qc::{
    build_master_set, detect_bad_questions, disqualify_low_accuracy, drop_incomplete, drop_wrong_wordchoice,
    remove_outliers, OutlierMode, Stage,
};
use emolex::sim::{synthetic_corpus, AnnotatorKind, AnnotatorProfile};
use emolex::{run_pipeline, Emotion, Framing, Hit, IntensityLevel, PipelineConfig};
use num_rational::Ratio;

use common::{diligent, sheet, simulate, Study};

fn hits() -> Vec<Hit> {
    Study::new().hits(Framing::Associated, 3)
}

const NO: IntensityLevel = IntensityLevel::None;
const STRONG: IntensityLevel = IntensityLevel::Strong;

#[test]
fn incomplete_sheets_dropped() {
    let hits = hits();
    let full = sheet(&hits[0], "a", true, NO);
    let mut gap = sheet(&hits[0], "b", true, NO);
    gap.emotions[Emotion::Fear] = None;
    let mut no_gate = sheet(&hits[0], "c", true, NO);
    no_gate.word_choice = None;
    let (kept, dropped) = drop_incomplete(vec![full.clone(), gap, no_gate]);
    assert_eq!(kept, vec![full]);
    assert_eq!(dropped, 2);
    assert_eq!(drop_incomplete(Vec::new()), (Vec::new(), 0));
}

#[test]
fn three_wrong_gates_mark_the_question_bad() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let mut rows: Vec<_> = (0..5).map(|i| sheet(&hits[0], &format!("a{i}"), i >= 3, NO)).collect();
    rows.extend((0..5).map(|i| sheet(&hits[1], &format!("a{i}"), i >= 2, NO)));
    let (bad, kept, dropped) = detect_bad_questions(rows, &index, 3).unwrap();
    assert_eq!(bad.into_iter().collect::<Vec<_>>(), vec![hits[0].hit_id.clone()]);
    assert_eq!(dropped, 5);
    assert_eq!(kept.len(), 5);
    assert!(kept.iter().all(|a| a.hit_id == hits[1].hit_id));
}

#[test]
fn wrong_gate_answers_dropped() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let rows: Vec<_> = (0..5).map(|i| sheet(&hits[0], &format!("a{i}"), i != 2, NO)).collect();
    let (kept, dropped) = drop_wrong_wordchoice(rows, &index).unwrap();
    assert_eq!((kept.len(), dropped), (4, 1));
    assert!(kept.iter().all(|a| a.annotator_id != "a2"));
}

#[test]
fn accuracy_threshold_is_inclusive_at_two_thirds() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let mut pool = Vec::new();
    // edge: 2 of 3 right; low: 1 of 3 right; clean: 10 of 10.
    for (i, ok) in [true, true, false].into_iter().enumerate() {
        pool.push(sheet(&hits[i], "edge", ok, NO));
    }
    for (i, ok) in [true, false, false].into_iter().enumerate() {
        pool.push(sheet(&hits[i], "low", ok, NO));
    }
    for h in &hits[..10] {
        pool.push(sheet(h, "clean", true, NO));
    }
    let (survivors, _) = drop_wrong_wordchoice(pool.clone(), &index).unwrap();
    let (kept, out, stats) = disqualify_low_accuracy(survivors, &pool, &index, Ratio::new(2, 3)).unwrap();
    assert_eq!(out.into_iter().collect::<Vec<_>>(), vec!["low".to_string()]);
    assert!(kept.iter().all(|a| a.annotator_id != "low"));
    assert_eq!(kept.iter().filter(|a| a.annotator_id == "edge").count(), 2);
    let edge = stats.iter().find(|s| s.annotator_id == "edge").unwrap();
    assert_eq!((edge.wc_attempted, edge.wc_correct), (3, 2));
}

#[test]
fn identical_annotators_have_zero_spread() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let rows: Vec<_> = hits[..4]
        .iter()
        .flat_map(|h| (0..5).map(move |i| sheet(h, &format!("a{i}"), true, STRONG)))
        .collect();
    let scan = remove_outliers(rows.clone(), &index, 2.0).unwrap();
    assert_eq!(scan.stdev, Some(0.0));
    assert!(scan.removed.is_empty());
    assert_eq!(scan.kept, rows);
}

#[test]
fn planted_adversary_removed() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let mut rows = Vec::new();
    for (i, h) in hits[..10].iter().enumerate() {
        for j in 0..4 {
            rows.push(sheet(h, &format!("a{}", (i + j) % 10), true, NO));
        }
        rows.push(sheet(h, "x", true, STRONG));
    }
    let scan = remove_outliers::<f64>(rows, &index, 2.0).unwrap();
    // Ten annotators score 1, the adversary 0: mean 10/11, sd sqrt(10)/11.
    let mean = 10.0 / 11.0;
    let sd = 10f64.sqrt() / 11.0;
    assert!((scan.mean.unwrap() - mean).abs() < 1e-12);
    assert!((scan.stdev.unwrap() - sd).abs() < 1e-12);
    assert!(mean > 2.0 * sd && 1.0 - mean < 2.0 * sd);
    assert_eq!(scan.removed.into_iter().collect::<Vec<_>>(), vec!["x".to_string()]);
    assert_eq!(scan.kept.len(), 40);
}

#[test]
fn lone_annotator_skips_outlier_scan() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let rows = vec![sheet(&hits[0], "solo", true, NO)];
    let scan = remove_outliers::<f64>(rows.clone(), &index, 2.0).unwrap();
    assert!(scan.warning.is_some());
    assert_eq!(scan.kept, rows);
}

#[test]
fn master_set_needs_three_assignments() {
    let hits = hits();
    let index = HitIndex::new(&hits);
    let mut rows: Vec<_> = (0..2).map(|i| sheet(&hits[0], &format!("a{i}"), true, NO)).collect();
    rows.extend((0..5).map(|i| sheet(&hits[1], &format!("a{i}"), true, NO)));
    let (master, dropped) = build_master_set(rows, &index, 3).unwrap();
    assert_eq!(dropped, 2);
    assert_eq!(master.term_count(), 1);
    assert_eq!(master.groups()[0].len(), 5);
    assert_eq!(master.groups()[0].key, hits[1].key());
    let (empty, dropped) = build_master_set(Vec::new(), &index, 3).unwrap();
    assert!(empty.is_empty());
    assert_eq!(dropped, 0);
}

#[test]
fn clean_input_passes_untouched() {
    let hits = hits();
    let rows: Vec<_> = hits[..6]
        .iter()
        .flat_map(|h| (0..5).map(move |i| sheet(h, &format!("a{i}"), true, IntensityLevel::Moderate)))
        .collect();
    let (master, audit) = run_pipeline(rows.clone(), &hits, &PipelineConfig::default()).unwrap();
    assert_eq!(audit.total_dropped(), 0);
    assert_eq!(master.assignment_count(), rows.len());
    assert_eq!(master.term_count(), 6);
    assert_eq!(
        audit.stages.iter().map(|s| s.stage).collect::<Vec<_>>(),
        Stage::ALL.to_vec()
    );
}

#[test]
fn audit_counts_match_planted_population() {
    let corpus = synthetic_corpus(200, 11, Framing::Associated).unwrap();
    let population = vec![
        diligent(0.0, 20, 45),
        AnnotatorProfile {
            kind: AnnotatorKind::Spammer { blank_prob: 1.0 },
            count: 10,
            hits_per_annotator: 10,
        },
    ];
    let sim = simulate(11, &corpus.hits, &corpus.truth, population);
    let (master, audit) = run_pipeline(sim.assignments.clone(), &corpus.hits, &PipelineConfig::default()).unwrap();
    let spam = sim.ids_of("spammer");
    let planted = sim
        .assignments
        .iter()
        .filter(|a| spam.contains(&a.annotator_id))
        .count();
    assert_eq!(planted, 100);
    assert_eq!(audit.stage(Stage::Incomplete).unwrap().assignments_dropped, planted);
    // Hits left with fewer than three honest sheets lose the rest at the end.
    let mut honest: std::collections::BTreeMap<&str, usize> = Default::default();
    for a in sim.assignments.iter().filter(|a| !spam.contains(&a.annotator_id)) {
        *honest.entry(a.hit_id.as_str()).or_default() += 1;
    }
    let thin: usize = honest.values().filter(|&&n| n < 3).sum();
    assert_eq!(audit.stage(Stage::MinAssignments).unwrap().assignments_dropped, thin);
    assert_eq!(audit.stage(Stage::Outliers).unwrap().assignments_dropped, 0);
    assert_eq!(master.assignment_count(), sim.assignments.len() - planted - thin);
    assert!(audit.reconciles());
}

#[test]
fn second_pass_is_clean_in_both_modes() {
    let corpus = synthetic_corpus(120, 12, Framing::Associated).unwrap();
    let population = vec![diligent(0.1, 12, 45), common::clickers(6, 10)];
    let sim = simulate(12, &corpus.hits, &corpus.truth, population);
    let stable = PipelineConfig::default();
    let (master, first) = run_pipeline(sim.assignments, &corpus.hits, &stable).unwrap();
    assert!(first.outlier_rounds >= 1);
    let (again, second) = run_pipeline(master.clone().into_assignments(), &corpus.hits, &stable).unwrap();
    assert_eq!(second.total_dropped(), 0);
    assert_eq!(again, master);

    let single = PipelineConfig {
        outlier_mode: OutlierMode::SinglePass,
        ..PipelineConfig::default()
    };
    let (_, audit) = run_pipeline(master.into_assignments(), &corpus.hits, &single).unwrap();
    assert_eq!(audit.outlier_rounds, 1);
    assert!(audit.reconciles());
}

#[test]
fn unknown_hit_is_a_domain_error() {
    let hits = hits();
    let mut stray = sheet(&hits[0], "a", true, NO);
    stray.hit_id = "hit-unknown".into();
    let err = run_pipeline(vec![stray], &hits, &PipelineConfig::default()).unwrap_err();
    assert!(matches!(err, emolex::Error::Domain(_)), "{err}");
}

#[test]
fn invalid_config_rejected() {
    let cfg = PipelineConfig {
        outlier_sigma: -1.0,
        ..PipelineConfig::default()
    };
    assert!(run_pipeline(Vec::new(), &hits(), &cfg).is_err());
}

#[test]
fn mixed_framings_rejected() {
    let study = Study::new();
    let assoc = study.hits(Framing::Associated, 3);
    let evokes = study.hits(Framing::Evokes, 3);
    let rows = vec![sheet(&assoc[0], "a", true, NO), sheet(&evokes[0], "b", true, NO)];
    let all: Vec<Hit> = assoc.iter().chain(&evokes).cloned().collect();
    let err = run_pipeline(rows, &all, &PipelineConfig::default()).unwrap_err();
    assert!(matches!(err, emolex::Error::Domain(_)), "{err}");
}
