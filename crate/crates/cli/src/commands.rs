use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::Path;

use anyhow::{anyhow, bail, Context, Result};
use emolex::aggregate::{attach_sources, build_lexicon, emit_lexicon, LexiconFormat, TieRules};
use emolex::agreement::{compare_framings, kappa_table, majority_size_histogram, Granularity, QuestionSet};
use emolex::hits::{assemble_hit, make_word_choice, parse_hits, render_hits, HitIndex, HitLayout};
use emolex::ingest::{parse_assignments, write_assignments, IngestDiagnostics};
use emolex::qc::{AuditReport, MasterSet};
use emolex::report::{
    build_report, framing_delta_table, framing_table, histogram_table, kappa_table_view, render_report, ReportBundle,
    ReportFormat, ReportOptions,
};
use emolex::sim::{read_truth, simulate_population, synthetic_corpus, write_truth, GroundTruthLexicon};
use emolex::targets::{build_target_union, load_tagged_terms, read_targets, select_frequent, write_targets, NGram};
use emolex::thesaurus::{load_frequency_list, load_thesaurus, write_thesaurus};
use emolex::{run_pipeline, Framing, Hit, Pos, SourceTag};

use crate::config::{sim_config, FileConfig};
use crate::{
    AggregateArgs, Cli, Command, CompareArgs, GenHitsArgs, Global, LevelArg, OutputFormat, QuestionsArg, ReportArgs,
    SimulateArgs, StatsArgs, ValidateArgs,
};

pub fn exit_code(e: &anyhow::Error) -> u8 {
    match e.chain().find_map(|c| c.downcast_ref::<emolex::Error>()) {
        Some(emolex::Error::Domain(_) | emolex::Error::Generation { .. } | emolex::Error::DegenerateDistribution) => 2,
        _ => 1,
    }
}

pub fn run(cli: &Cli) -> Result<u8> {
    let file = FileConfig::load(cli.global.config.as_deref())?;
    match &cli.command {
        Command::GenHits(a) => gen_hits(&cli.global, &file, a),
        Command::Validate(a) => validate(&cli.global, &file, a),
        Command::Aggregate(a) => aggregate(&cli.global, a),
        Command::Stats(a) => stats(&cli.global, a),
        Command::Report(a) => report(&cli.global, a),
        Command::Simulate(a) => simulate(&cli.global, &file, a),
        Command::CompareFramings(a) => compare(&cli.global, a),
    }
}

fn open(path: &Path) -> Result<BufReader<File>> {
    let f = File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(BufReader::new(f))
}

fn create(path: &Path) -> Result<BufWriter<File>> {
    let f = File::create(path).with_context(|| format!("creating {}", path.display()))?;
    Ok(BufWriter::new(f))
}

fn output(global: &Global) -> Result<Box<dyn Write>> {
    Ok(match &global.out {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_hits(paths: &[&Path]) -> Result<Vec<Hit>> {
    let mut hits = Vec::new();
    for p in paths {
        hits.extend(parse_hits(open(p)?).with_context(|| format!("reading HITs from {}", p.display()))?);
    }
    Ok(hits)
}

fn report_ingest(path: &Path, diag: &IngestDiagnostics) -> Vec<String> {
    let mut notes = Vec::new();
    if diag.rows_rejected > 0 {
        notes.push(format!(
            "{}: {} malformed rows skipped",
            path.display(),
            diag.rows_rejected
        ));
    }
    if diag.unknown_hits > 0 {
        notes.push(format!(
            "{}: {} rows name unknown HITs",
            path.display(),
            diag.unknown_hits
        ));
    }
    if diag.duplicate_pairs > 0 {
        notes.push(format!(
            "{}: {} repeated (HIT, annotator) rows",
            path.display(),
            diag.duplicate_pairs
        ));
    }
    for n in &notes {
        eprintln!("warning: {n}");
    }
    notes
}

fn load_master(path: &Path, index: &HitIndex) -> Result<MasterSet> {
    let (assignments, diag) =
        parse_assignments(open(path)?, index).with_context(|| format!("reading {}", path.display()))?;
    report_ingest(path, &diag);
    Ok(MasterSet::group(assignments, index)?)
}

fn master_framing(master: &MasterSet, index: &HitIndex) -> Option<Framing> {
    let a = master.assignments().next()?;
    index.get(&a.hit_id).map(|h| h.framing)
}

fn report_format(global: &Global) -> ReportFormat {
    match global.format {
        OutputFormat::Tabular => ReportFormat::Plain,
        OutputFormat::Structured => ReportFormat::Structured,
    }
}

fn gen_hits(global: &Global, file: &FileConfig, a: &GenHitsArgs) -> Result<u8> {
    let seed = file
        .seed(global.seed)
        .ok_or_else(|| anyhow!("gen-hits needs a seed (--seed or the config file)"))?;
    let th = load_thesaurus(open(&a.thesaurus)?).with_context(|| format!("reading {}", a.thesaurus.display()))?;

    let mut parts = Vec::new();
    if let Some(p) = &a.targets {
        parts.push(read_targets(open(p)?).with_context(|| format!("reading {}", p.display()))?);
    }
    if let Some(p) = &a.frequency {
        let freq = load_frequency_list(open(p)?).with_context(|| format!("reading {}", p.display()))?;
        for order in [NGram::Unigram, NGram::Bigram] {
            for pos in [Pos::Noun, Pos::Verb, Pos::Adjective, Pos::Adverb] {
                parts.push(select_frequent(pos, order, &freq, &th, a.top_k));
            }
        }
    }
    for (path, tag, max) in [
        (&a.gi, SourceTag::GeneralInquirer, a.gi_max_senses),
        (&a.wal, SourceTag::WordNetAffect, a.wal_max_senses),
    ] {
        if let Some(p) = path {
            let (t, d) =
                load_tagged_terms(open(p)?, tag, max, &th).with_context(|| format!("reading {}", p.display()))?;
            eprintln!(
                "{}: {} lines, {} not in thesaurus, {} too ambiguous, {} senses kept",
                p.display(),
                d.lines_read,
                d.absent,
                d.too_ambiguous,
                t.len()
            );
            parts.push(t);
        }
    }
    if parts.is_empty() {
        bail!("no target source given; pass --targets, --frequency, --gi or --wal");
    }
    let targets = build_target_union(&parts);
    if let Some(p) = &a.targets_out {
        let mut w = create(p)?;
        write_targets(&mut w, &targets)?;
        w.flush()?;
    }

    let mut hits = Vec::new();
    let mut failed = 0usize;
    let mut framings: Vec<Framing> = a.framing.iter().map(|&f| f.into()).collect();
    framings.dedup();
    for framing in framings {
        for t in &targets {
            match make_word_choice(t, &th, seed) {
                Ok(wc) => hits.push(assemble_hit(t, wc, framing)?),
                Err(e @ emolex::Error::Generation { .. }) => {
                    eprintln!("warning: {e}");
                    failed += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
    }
    let layout = if a.text { HitLayout::Text } else { HitLayout::Records };
    let mut out = output(global)?;
    render_hits(&hits, &mut out, layout)?;
    out.flush()?;
    eprintln!(
        "{} targets, {} HITs written, {} failed",
        targets.len(),
        hits.len(),
        failed
    );
    Ok(if failed > 0 { 2 } else { 0 })
}

fn validate(global: &Global, file: &FileConfig, a: &ValidateArgs) -> Result<u8> {
    let hits = load_hits(&[&a.hits])?;
    let index = HitIndex::new(&hits);
    let cfg = a.pipeline.resolve(file);
    cfg.validate()?;
    let (assignments, diag) = parse_assignments(open(&a.assignments)?, &index)
        .with_context(|| format!("reading {}", a.assignments.display()))?;
    let notes = report_ingest(&a.assignments, &diag);
    let (master, mut audit) = run_pipeline(assignments, &hits, &cfg)?;
    audit.warnings.extend(notes);

    let mut out = output(global)?;
    let survivors: Vec<_> = master.assignments().cloned().collect();
    write_assignments(&mut out, &survivors)?;
    out.flush()?;
    if let Some(p) = &a.audit {
        let mut w = create(p)?;
        serde_json::to_writer_pretty(&mut w, &audit)?;
        writeln!(w)?;
        w.flush()?;
    }
    print_audit(&audit);
    Ok(0)
}

fn print_audit(audit: &AuditReport) {
    eprintln!("{:<18} {:>8} {:>8}", "stage", "in", "dropped");
    for s in &audit.stages {
        eprintln!(
            "{:<18} {:>8} {:>8}",
            s.stage.as_str(),
            s.assignments_in,
            s.assignments_dropped
        );
    }
    eprintln!(
        "{} assignments in, {} kept, {} terms in the master set",
        audit.input_total, audit.output_total, audit.master_terms
    );
    for w in &audit.warnings {
        eprintln!("warning: {w}");
    }
}

fn aggregate(global: &Global, a: &AggregateArgs) -> Result<u8> {
    let hits = load_hits(&[&a.hits])?;
    let index = HitIndex::new(&hits);
    let master = load_master(&a.master, &index)?;
    let mut lexicon = build_lexicon(&master, &TieRules::default())?;
    if let Some(p) = &a.targets {
        attach_sources(&mut lexicon, &read_targets(open(p)?)?);
    }
    let format = match global.format {
        OutputFormat::Tabular => LexiconFormat::Tabular,
        OutputFormat::Structured => LexiconFormat::Structured,
    };
    let mut out = output(global)?;
    emit_lexicon(&lexicon, format, &mut out)?;
    out.flush()?;
    Ok(0)
}

fn stats(global: &Global, a: &StatsArgs) -> Result<u8> {
    let hits = load_hits(&[&a.hits])?;
    let index = HitIndex::new(&hits);
    let master = load_master(&a.master, &index)?;
    let level = match a.level {
        LevelArg::Four => Granularity::FourLevel,
        LevelArg::Binary => Granularity::Binary,
    };
    let questions = match a.questions {
        QuestionsArg::Emotions => QuestionSet::Emotions,
        QuestionsArg::Polarity => QuestionSet::Polarity,
    };
    let hist = majority_size_histogram(&master, level, questions, a.raters)?;
    let kappa = kappa_table::<f64>(&master, questions, level)?;
    let bundle = ReportBundle {
        tables: vec![histogram_table(&hist), kappa_table_view(&kappa, questions)],
    };
    let mut out = output(global)?;
    render_report(&bundle, report_format(global), &mut out)?;
    out.flush()?;
    Ok(0)
}

fn report(global: &Global, a: &ReportArgs) -> Result<u8> {
    let paths: Vec<&Path> = a.hits.iter().map(|p| p.as_path()).collect();
    let hits = load_hits(&paths)?;
    let index = HitIndex::new(&hits);
    let master = load_master(&a.master, &index)?;
    let targets = match &a.targets {
        Some(p) => read_targets(open(p)?)?,
        None => Vec::new(),
    };
    let audit: Option<AuditReport> = match &a.audit {
        Some(p) => Some(serde_json::from_reader(open(p)?).with_context(|| format!("reading {}", p.display()))?),
        None => None,
    };
    let mut lexicon = build_lexicon(&master, &TieRules::default())?;
    attach_sources(&mut lexicon, &targets);

    let comparison = match &a.compare_master {
        Some(p) => {
            let other = load_master(p, &index)?;
            let fa = master_framing(&master, &index).unwrap_or(Framing::Associated);
            let fb = master_framing(&other, &index).unwrap_or(Framing::Evokes);
            Some((compare_framings(&master, &other, a.raters)?, fa, fb))
        }
        None => None,
    };
    let opts = ReportOptions {
        targets: &targets,
        audit: audit.as_ref(),
        framing: comparison.as_ref().map(|(c, fa, fb)| (c, *fa, *fb)),
        raters: a.raters,
    };
    let bundle = build_report(&master, &lexicon, opts)?;
    let mut out = output(global)?;
    render_report(&bundle, report_format(global), &mut out)?;
    out.flush()?;
    Ok(0)
}

fn simulate(global: &Global, file: &FileConfig, a: &SimulateArgs) -> Result<u8> {
    let section = file
        .simulation
        .as_ref()
        .ok_or_else(|| anyhow!("simulate needs a config file with a [simulation] section"))?;
    let seed = file
        .seed(global.seed)
        .ok_or_else(|| anyhow!("simulate needs a seed (--seed or the config file)"))?;
    let dir = global
        .out
        .as_deref()
        .ok_or_else(|| anyhow!("simulate needs --out naming an output directory"))?;
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;

    let (hits, truth) = match &a.hits {
        Some(p) => {
            let hits = load_hits(&[p])?;
            let truth = match &a.truth {
                Some(t) => read_truth(open(t)?).with_context(|| format!("reading {}", t.display()))?,
                None => GroundTruthLexicon::random(hits.iter().map(Hit::key).collect::<Vec<_>>().iter(), seed),
            };
            (hits, truth)
        }
        None => {
            let n = a
                .targets
                .or(section.targets)
                .ok_or_else(|| anyhow!("simulate needs a corpus size (--targets or simulation.targets)"))?;
            let corpus = synthetic_corpus(n, seed, section.framing.unwrap_or(Framing::Associated))?;
            let mut w = create(&dir.join("thesaurus.tsv"))?;
            write_thesaurus(&mut w, &corpus.thesaurus)?;
            w.flush()?;
            let mut w = create(&dir.join("targets.tsv"))?;
            write_targets(&mut w, &corpus.targets)?;
            w.flush()?;
            (corpus.hits, corpus.truth)
        }
    };
    let cfg = sim_config(section, seed, hits.len());
    let sim = simulate_population(&cfg, &truth, &hits)?;

    let mut w = create(&dir.join("hits.tsv"))?;
    render_hits(&hits, &mut w, HitLayout::Records)?;
    w.flush()?;
    let mut w = create(&dir.join("truth.tsv"))?;
    write_truth(&mut w, &truth)?;
    w.flush()?;
    let mut w = create(&dir.join("assignments.csv"))?;
    write_assignments(&mut w, &sim.assignments)?;
    w.flush()?;
    let mut w = create(&dir.join("roster.tsv"))?;
    writeln!(w, "annotator_id\tkind")?;
    for (id, kind) in &sim.roster {
        writeln!(w, "{id}\t{}", kind.label())?;
    }
    w.flush()?;
    eprintln!(
        "{} HITs, {} annotators, {} assignments written to {}",
        hits.len(),
        sim.roster.len(),
        sim.assignments.len(),
        dir.display()
    );
    Ok(0)
}

fn compare(global: &Global, a: &CompareArgs) -> Result<u8> {
    let paths: Vec<&Path> = a.hits.iter().map(|p| p.as_path()).collect();
    let hits = load_hits(&paths)?;
    let index = HitIndex::new(&hits);
    let ma = load_master(&a.master_a, &index)?;
    let mb = load_master(&a.master_b, &index)?;
    let fa = master_framing(&ma, &index).unwrap_or(Framing::Associated);
    let fb = master_framing(&mb, &index).unwrap_or(Framing::Evokes);
    let c = compare_framings(&ma, &mb, a.raters)?;
    let bundle = ReportBundle {
        tables: vec![framing_table(&c, fa, fb), framing_delta_table(&c, fa, fb)],
    };
    let mut out = output(global)?;
    render_report(&bundle, report_format(global), &mut out)?;
    out.flush()?;
    Ok(0)
}
