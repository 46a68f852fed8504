mod common;

use std::collections::BTreeSet;

use emolex::aggregate::{
    aggregate_term, attach_sources, build_lexicon, emit_lexicon, lexicon_header, LexiconFormat, TieRules,
};
use emolex::agreement::{compare_framings, kappa_table, majority_size_histogram, Granularity, QuestionSet};
use emolex::hits::HitIndex;
use emolex::qc::{MasterGroup, MasterSet};
use emolex::report::{
    build_report, emotion_cooccurrence, emotive_breakdown, evaluative_breakdown, intensity_distribution,
    polarity_distribution, polarity_emotion_crosstab, render_report, standard_subsets, ReportFormat, ReportOptions,
    Table,
};
use emolex::sim::synthetic_corpus;
use emolex::{Assignment, Emotion, Framing, Hit, IntensityLevel, LexiconEntry, PipelineConfig, PolarityAxis};

use common::{diligent, sheet, simulate, Study};

use IntensityLevel::{Moderate, None as No, Strong, Weak};

fn group(hits: &[Hit], rows: Vec<Assignment>) -> MasterSet {
    MasterSet::group(rows, &HitIndex::new(hits)).unwrap()
}

/// Five sheets on `hit`, all `base`, then `edit` applied to sheet `i`.
fn five(hit: &Hit, base: IntensityLevel, edit: impl Fn(usize, &mut Assignment)) -> Vec<Assignment> {
    (0..5)
        .map(|i| {
            let mut a = sheet(hit, &format!("r{i}"), true, base);
            edit(i, &mut a);
            a
        })
        .collect()
}

fn lexicon_of(hits: &[Hit], rows: Vec<Assignment>) -> (MasterSet, Vec<LexiconEntry>) {
    let master = group(hits, rows);
    let lexicon = build_lexicon(&master, &TieRules::default()).unwrap();
    (master, lexicon)
}

fn cells(t: &Table, label: &str) -> Vec<String> {
    t.row(label)
        .unwrap_or_else(|| panic!("{} has no row {label}", t.name))
        .cells
        .iter()
        .map(|c| c.render())
        .collect()
}

#[test]
fn unanimous_strong_joy() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let rows = five(&hits[0], No, |_, a| a.emotions[Emotion::Joy] = Some(Strong));
    let master = group(&hits, rows);
    let entry = aggregate_term(&master.groups()[0], &TieRules::default()).unwrap();
    let joy = &entry.emotions[Emotion::Joy];
    assert!(joy.associated);
    assert_eq!((joy.four_level.winner, joy.four_level.majority_size), (Strong, 5));
    assert!(!entry.emotions[Emotion::Fear].associated);
}

#[test]
fn emotion_word_tie_resolves_to_no() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let mut rows = five(&hits[0], No, |i, a| a.is_emotion_word = Some(i < 2));
    rows.truncate(4);
    let master = group(&hits, rows);
    let entry = aggregate_term(&master.groups()[0], &TieRules::default()).unwrap();
    assert!(!entry.is_emotion_word.winner);
    assert!(entry.is_emotion_word.tied);
    let yes = TieRules {
        emotion_word_tie: true,
        ..TieRules::default()
    };
    assert!(
        aggregate_term(&master.groups()[0], &yes)
            .unwrap()
            .is_emotion_word
            .winner
    );
}

#[test]
fn mixed_group_rejected() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let master = group(&hits, five(&hits[0], No, |_, _| {}));
    let mut g: MasterGroup = master.groups()[0].clone();
    g.assignments.push(sheet(&hits[1], "stray", true, No));
    let err = aggregate_term(&g, &TieRules::default()).unwrap_err();
    assert!(matches!(err, emolex::Error::Domain(_)));
}

#[test]
fn lexicon_is_sorted_and_complete() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let mut rows = Vec::new();
    for h in [&hits[7], &hits[2], &hits[40]] {
        rows.extend(five(h, Weak, |_, _| {}));
    }
    let (master, lexicon) = lexicon_of(&hits, rows);
    assert_eq!(lexicon.len(), master.term_count());
    let keys: Vec<_> = lexicon.iter().map(LexiconEntry::key).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    assert_eq!(keys, sorted);
    assert_eq!(keys.len(), 3);

    let empty = build_lexicon(&MasterSet::from_groups(Vec::new()), &TieRules::default()).unwrap();
    assert!(empty.is_empty());
}

#[test]
fn tabular_lexicon_columns() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let (_, lexicon) = lexicon_of(&hits, five(&hits[3], Moderate, |_, _| {}));
    let mut out = Vec::new();
    emit_lexicon(&lexicon, LexiconFormat::Tabular, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 2);
    assert_eq!(lines[0].split('\t').collect::<Vec<_>>(), lexicon_header());
    // Keyed on term and category; pos plus 22 flags and sizes follow.
    assert_eq!(lines[1].split('\t').count() - 2, 23);

    let mut out = Vec::new();
    emit_lexicon(&[], LexiconFormat::Tabular, &mut out).unwrap();
    assert_eq!(String::from_utf8(out).unwrap().lines().count(), 1);
}

#[test]
fn noiseless_crowd_recovers_truth() {
    let corpus = synthetic_corpus(150, 21, Framing::Associated).unwrap();
    let sim = simulate(21, &corpus.hits, &corpus.truth, vec![diligent(0.0, 15, 50)]);
    let (master, audit) = emolex::run_pipeline(sim.assignments, &corpus.hits, &PipelineConfig::default()).unwrap();
    assert_eq!(audit.total_dropped(), 0);
    let lexicon = build_lexicon(&master, &TieRules::default()).unwrap();
    assert_eq!(lexicon.len(), 150);
    for x in &lexicon {
        let t = corpus.truth.get(&x.key()).unwrap();
        for e in Emotion::ALL {
            assert_eq!(x.emotions[e].four_level.winner, t.emotions[e]);
        }
        for p in PolarityAxis::ALL {
            assert_eq!(x.polarity[p].four_level.winner, t.polarity[p]);
        }
        assert_eq!(x.is_emotion_word.winner, t.is_emotion_word);
    }
}

#[test]
fn histogram_counts_by_hand() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let mut rows = Vec::new();
    // Anger majority sizes over four levels: 5, 4, 3, 2.
    rows.extend(five(&hits[0], No, |_, _| {}));
    rows.extend(five(&hits[1], No, |i, a| {
        if i == 0 {
            a.emotions[Emotion::Anger] = Some(Strong)
        }
    }));
    rows.extend(five(&hits[2], No, |i, a| {
        if i < 2 {
            a.emotions[Emotion::Anger] = Some(Weak)
        }
    }));
    rows.extend(five(&hits[3], No, |i, a| {
        a.emotions[Emotion::Anger] = Some([No, No, Weak, Weak, Strong][i]);
    }));
    // A four-rater term is left out.
    rows.extend(five(&hits[4], No, |_, _| {}).into_iter().take(4));
    let master = group(&hits, rows);

    let h = majority_size_histogram(&master, Granularity::FourLevel, QuestionSet::Emotions, 5).unwrap();
    assert_eq!(h.sizes, vec![2, 3, 4, 5]);
    assert_eq!((h.terms, h.excluded_terms), (4, 1));
    assert_eq!(h.rows[Emotion::Anger.index()].counts, vec![1, 1, 1, 1]);
    assert_eq!(h.rows[Emotion::Joy.index()].counts, vec![0, 0, 0, 4]);

    let b = majority_size_histogram(&master, Granularity::Binary, QuestionSet::Emotions, 5).unwrap();
    assert_eq!(b.sizes, vec![3, 4, 5]);
    // Binary: hit1 4-1, hit3 4-1 (one strong), others unanimous.
    assert_eq!(b.rows[Emotion::Anger.index()].counts, vec![0, 2, 2]);
    assert!(b.micro.counts.iter().sum::<usize>() == 4 * 8);

    let empty = MasterSet::from_groups(Vec::new());
    assert!(majority_size_histogram(&empty, Granularity::Binary, QuestionSet::Polarity, 5).is_err());
}

#[test]
fn kappa_micro_average_is_mean_of_classes() {
    let corpus = synthetic_corpus(80, 22, Framing::Associated).unwrap();
    let sim = simulate(22, &corpus.hits, &corpus.truth, vec![diligent(0.2, 10, 40)]);
    let master = group(&corpus.hits, sim.assignments);
    let k = kappa_table::<f64>(&master, QuestionSet::Emotions, Granularity::Binary).unwrap();
    let mean = k.rows.iter().map(|r| r.kappa.value).sum::<f64>() / k.rows.len() as f64;
    assert!((k.micro_average - mean).abs() < 1e-12);
    assert_eq!(k.rows.len(), 8);
}

#[test]
fn framing_delta_counts_one_term_in_ten() {
    let study = Study::new();
    let a_hits = study.hits(Framing::Evokes, 1);
    let b_hits = study.hits(Framing::Associated, 1);
    let build = |hits: &[Hit], split_first: bool| {
        let mut rows = Vec::new();
        for (t, h) in hits[..10].iter().enumerate() {
            rows.extend(five(h, No, |i, a| {
                if split_first && t == 0 && i == 0 {
                    a.emotions[Emotion::Joy] = Some(Strong);
                }
            }));
        }
        group(hits, rows)
    };
    let a = build(&a_hits, true);
    let b = build(&b_hits, false);
    let c = compare_framings(&a, &b, 5).unwrap();
    assert_eq!(c.terms, 10);
    for (e, d) in c.deltas::<f64>() {
        let want = if e == Emotion::Joy { 10.0 } else { 0.0 };
        assert!((d - want).abs() < 1e-12, "{e}: {d}");
    }
    let same = compare_framings(&b, &b, 5).unwrap();
    assert!(same.deltas::<f64>().iter().all(|&(_, d)| d == 0.0));
    let (ua, ub) = c.micro();
    assert_eq!((ua, ub), (79, 80));
}

#[test]
fn intensity_table_rows() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let mut rows = Vec::new();
    for h in &hits[..4] {
        rows.extend(five(h, No, |_, a| a.emotions[Emotion::Joy] = Some(Strong)));
    }
    rows.extend(five(&hits[4], No, |_, a| a.emotions[Emotion::Fear] = Some(Weak)));
    let (_, lexicon) = lexicon_of(&hits, rows);
    let t = intensity_distribution(&lexicon).unwrap();
    assert_eq!(cells(&t, "joy"), ["20.0", "0.0", "0.0", "80.0"]);
    assert_eq!(cells(&t, "fear"), ["80.0", "20.0", "0.0", "0.0"]);
    assert_eq!(cells(&t, "any emotion"), ["0.0", "20.0", "0.0", "80.0"]);
    let strong = |label: &str| t.row(label).unwrap().cells[3].tenths().unwrap();
    for e in Emotion::ALL {
        assert!(strong("any emotion") >= strong(e.as_str()));
    }

    let all_strong_neg: Vec<_> = hits[..3]
        .iter()
        .flat_map(|h| five(h, No, |_, a| a.negative = Some(Strong)))
        .collect();
    let (_, lexicon) = lexicon_of(&hits, all_strong_neg);
    let p = polarity_distribution(&lexicon).unwrap();
    assert_eq!(cells(&p, "negative"), ["0.0", "0.0", "0.0", "100.0"]);
    assert_eq!(cells(&p, "either polarity"), ["0.0", "0.0", "0.0", "100.0"]);
}

#[test]
fn breakdowns_follow_planted_labels() {
    let study = Study::new();
    let hits = study.hits(Framing::Associated, 1);
    let mut rows = Vec::new();
    for (t, h) in study.targets.iter().zip(&hits) {
        let wal_anger = t.aux_labels.contains("anger");
        let gi_neg = t.aux_labels.contains("negative");
        rows.extend(five(h, No, |_, a| {
            if wal_anger {
                a.emotions[Emotion::Anger] = Some(Strong);
            }
            if gi_neg || wal_anger {
                a.negative = Some(Moderate);
            }
        }));
    }
    let (_, mut lexicon) = lexicon_of(&hits, rows);
    attach_sources(&mut lexicon, &study.targets);
    let subsets = standard_subsets(&lexicon, &study.targets);
    let emo = emotive_breakdown(&lexicon, &subsets).unwrap();
    let anger_terms = emo.rows.iter().find(|r| r.label == "anger terms").unwrap();
    assert_eq!(anger_terms.cells[0].render(), "100.0");
    assert!(emo.notes.iter().any(|n| n.contains("trust terms")));
    for r in &emo.rows {
        let any = r.cells[8].tenths().unwrap();
        assert!(r.cells[..8].iter().all(|c| c.tenths().unwrap() <= any));
    }
    let ev = evaluative_breakdown(&lexicon, &subsets).unwrap();
    let neg = ev.rows.iter().find(|r| r.label == "negative terms").unwrap();
    assert_eq!(
        neg.cells.iter().map(|c| c.render()).collect::<Vec<_>>(),
        ["100.0", "0.0", "100.0"]
    );
    let pos = ev.rows.iter().find(|r| r.label == "positive terms").unwrap();
    assert_eq!(pos.cells[0].render(), "0.0");
}

#[test]
fn cooccurrence_of_nested_sets() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let mut rows = Vec::new();
    // Terms 0-1: joy and trust; 2-4: trust only; 5: anger only.
    for (i, h) in hits[..6].iter().enumerate() {
        rows.extend(five(h, No, |_, a| {
            if i < 2 {
                a.emotions[Emotion::Joy] = Some(Strong);
            }
            if i < 5 {
                a.emotions[Emotion::Trust] = Some(Moderate);
            } else {
                a.emotions[Emotion::Anger] = Some(Strong);
            }
        }));
    }
    let (_, lexicon) = lexicon_of(&hits, rows);
    let c = emotion_cooccurrence(&lexicon);
    let (j, t, a) = (Emotion::Joy.index(), Emotion::Trust.index(), Emotion::Anger.index());
    assert_eq!(c.counts[j][t], 2);
    assert!((c.jaccard[j][t] - 2.0 / 5.0).abs() < 1e-12);
    assert_eq!(c.counts[a][t], 0);
    for x in 0..8 {
        for y in 0..8 {
            assert_eq!(c.counts[x][y], c.counts[y][x]);
        }
    }
}

#[test]
fn crosstab_of_planted_polarity() {
    let hits = Study::new().hits(Framing::Associated, 1);
    let rows: Vec<_> = hits[..4]
        .iter()
        .flat_map(|h| {
            five(h, No, |_, a| {
                a.emotions[Emotion::Anger] = Some(Strong);
                a.negative = Some(Strong);
            })
        })
        .chain(five(&hits[4], No, |_, a| a.emotions[Emotion::Joy] = Some(Strong)))
        .collect();
    let (_, lexicon) = lexicon_of(&hits, rows);
    let t = polarity_emotion_crosstab(&lexicon);
    assert_eq!(cells(&t, "anger"), ["100.0", "0.0", "0.0", "0.0", "4"]);
    assert_eq!(cells(&t, "joy"), ["0.0", "0.0", "100.0", "0.0", "1"]);
    assert!(t.row("fear").is_none());
}

#[test]
fn report_is_deterministic_and_sections_optional() {
    let corpus = synthetic_corpus(60, 23, Framing::Associated).unwrap();
    let sim = simulate(23, &corpus.hits, &corpus.truth, vec![diligent(0.1, 10, 30)]);
    let (master, audit) = emolex::run_pipeline(sim.assignments, &corpus.hits, &PipelineConfig::default()).unwrap();
    let lexicon = build_lexicon(&master, &TieRules::default()).unwrap();
    let opts = ReportOptions {
        targets: &corpus.targets,
        audit: Some(&audit),
        framing: None,
        raters: 5,
    };
    let bundle = build_report(&master, &lexicon, opts).unwrap();
    assert!(bundle.table("framing-comparison").is_none());
    assert!(bundle.table("audit-summary").is_some());
    let render = |format| {
        let mut out = Vec::new();
        render_report(&bundle, format, &mut out).unwrap();
        out
    };
    assert_eq!(render(ReportFormat::Plain), render(ReportFormat::Plain));
    let json: serde_json::Value = serde_json::from_slice(&render(ReportFormat::Structured)).unwrap();
    let names: BTreeSet<&str> = json.as_object().unwrap().keys().map(String::as_str).collect();
    assert!(names.contains("emotion-kappa") && names.contains("polarity-agreement-two"));

    let c = compare_framings(&master, &master, 5).unwrap();
    let with = build_report(
        &master,
        &lexicon,
        ReportOptions {
            framing: Some((&c, Framing::Associated, Framing::Associated)),
            audit: None,
            ..opts
        },
    )
    .unwrap();
    assert_eq!(with.table("framing-comparison").unwrap().rows.len(), 9);
    assert!(with.table("audit-summary").is_none());
}
