//! Report tables and their plain and structured renderings.
//!
//! Percentages are kept as integer tenths. Rows that partition a whole are
//! rounded by largest remainder so that they add up to exactly 100.0;
//! other percentages round half up.

use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::ser::{SerializeMap, SerializeStruct};
use serde::{Serialize, Serializer};

use crate::aggregate::LexiconEntry;
use crate::agreement::{
    kappa_table, majority_size_histogram, AgreementBand, FramingComparison, Granularity, KappaTable,
    MajoritySizeHistogram, QuestionSet,
};
use crate::domain::{intensity_rank, Emotion, Framing, IntensityLevel, PolarityAxis, Pos, SenseKey, SourceTag};
use crate::error::{Error, Result};
use crate::qc::{AuditReport, MasterSet};
use crate::targets::TargetTerm;

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    /// A percentage in tenths of a point.
    Tenths(i64),
    Real {
        value: f64,
        decimals: usize,
    },
    Count(usize),
    Text(String),
}

impl Cell {
    pub fn render(&self) -> String {
        match self {
            Cell::Tenths(t) => {
                let sign = if *t < 0 { "-" } else { "" };
                format!("{sign}{}.{}", t.abs() / 10, t.abs() % 10)
            }
            Cell::Real { value, decimals } => format!("{value:.decimals$}"),
            Cell::Count(n) => n.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    pub fn tenths(&self) -> Option<i64> {
        match self {
            Cell::Tenths(t) => Some(*t),
            _ => None,
        }
    }
}

impl Serialize for Cell {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Cell::Tenths(t) => s.serialize_f64(*t as f64 / 10.0),
            Cell::Real { value, decimals } => {
                let scale = 10f64.powi(*decimals as i32);
                s.serialize_f64((value * scale).round() / scale)
            }
            Cell::Count(n) => s.serialize_u64(*n as u64),
            Cell::Text(t) => s.serialize_str(t),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Row {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub group: Option<String>,
    pub label: String,
    pub cells: Vec<Cell>,
}

impl Row {
    fn new(group: Option<&str>, label: impl Into<String>, cells: Vec<Cell>) -> Self {
        Row {
            group: group.map(str::to_string),
            label: label.into(),
            cells,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub name: String,
    pub title: String,
    /// Header of the label column.
    pub stub: String,
    pub columns: Vec<String>,
    pub rows: Vec<Row>,
    /// The first this-many value columns of every row partition 100%.
    pub partition_columns: usize,
    pub notes: Vec<String>,
}

impl Serialize for Table {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("Table", 5)?;
        st.serialize_field("title", &self.title)?;
        st.serialize_field("stub", &self.stub)?;
        st.serialize_field("columns", &self.columns)?;
        st.serialize_field("rows", &self.rows)?;
        st.serialize_field("notes", &self.notes)?;
        st.end()
    }
}

impl Table {
    fn new(name: &str, title: &str, stub: &str, columns: Vec<String>) -> Self {
        Table {
            name: name.into(),
            title: title.into(),
            stub: stub.into(),
            columns,
            rows: Vec::new(),
            partition_columns: 0,
            notes: Vec::new(),
        }
    }

    pub fn row(&self, label: &str) -> Option<&Row> {
        self.rows.iter().find(|r| r.label == label)
    }

    /// Sum of the partition columns of each row, in tenths.
    pub fn partition_sums(&self) -> Vec<i64> {
        self.rows
            .iter()
            .map(|r| r.cells[..self.partition_columns].iter().filter_map(Cell::tenths).sum())
            .collect()
    }
}

/// Split 100.0 over `counts` in tenths, largest remainder first; ties go
/// to the earlier column. All zeros when the total is zero.
pub fn largest_remainder_tenths(counts: &[usize]) -> Vec<i64> {
    let total: u128 = counts.iter().map(|&c| c as u128).sum();
    if total == 0 {
        return vec![0; counts.len()];
    }
    let mut out: Vec<i64> = counts.iter().map(|&c| (c as u128 * 1000 / total) as i64).collect();
    let mut rema: Vec<(u128, usize)> = counts
        .iter()
        .enumerate()
        .map(|(i, &c)| (c as u128 * 1000 % total, i))
        .collect();
    rema.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));
    let short = 1000 - out.iter().sum::<i64>();
    for &(_, i) in rema.iter().take(short as usize) {
        out[i] += 1;
    }
    out
}

/// `count / total` as tenths of a percent, half up. Zero total gives zero.
pub fn percent_tenths(count: usize, total: usize) -> i64 {
    if total == 0 {
        return 0;
    }
    ((count as u128 * 2000 + total as u128) / (2 * total as u128)) as i64
}

fn tenths_cells(v: &[i64]) -> Vec<Cell> {
    v.iter().map(|&t| Cell::Tenths(t)).collect()
}

fn level_columns() -> Vec<String> {
    IntensityLevel::ALL.iter().map(|l| l.as_str().to_string()).collect()
}

fn strongest(levels: impl Iterator<Item = IntensityLevel>) -> IntensityLevel {
    levels
        .max_by_key(|&l| intensity_rank(l))
        .unwrap_or(IntensityLevel::None)
}

fn nonempty(lexicon: &[LexiconEntry]) -> Result<()> {
    if lexicon.is_empty() {
        return Err(Error::domain("report tables need a nonempty lexicon"));
    }
    Ok(())
}

/// Four-level majority class per emotion, with a micro-average row and a
/// row for each term's strongest emotion.
pub fn intensity_distribution(lexicon: &[LexiconEntry]) -> Result<Table> {
    nonempty(lexicon)?;
    let mut t = Table::new(
        "intensity-distribution",
        "Terms by majority emotion intensity (%)",
        "Emotion",
        level_columns(),
    );
    t.partition_columns = 4;
    let mut pooled = [0usize; 4];
    for e in Emotion::ALL {
        let mut c = [0usize; 4];
        for x in lexicon {
            c[intensity_rank(x.emotions[e].four_level.winner)] += 1;
        }
        for i in 0..4 {
            pooled[i] += c[i];
        }
        t.rows
            .push(Row::new(None, e.as_str(), tenths_cells(&largest_remainder_tenths(&c))));
    }
    t.rows.push(Row::new(
        None,
        "micro-average",
        tenths_cells(&largest_remainder_tenths(&pooled)),
    ));
    let mut any = [0usize; 4];
    for x in lexicon {
        any[intensity_rank(strongest(x.emotions.0.iter().map(|a| a.four_level.winner)))] += 1;
    }
    t.rows.push(Row::new(
        None,
        "any emotion",
        tenths_cells(&largest_remainder_tenths(&any)),
    ));
    Ok(t)
}

/// Four-level majority class per polarity axis.
pub fn polarity_distribution(lexicon: &[LexiconEntry]) -> Result<Table> {
    nonempty(lexicon)?;
    let mut t = Table::new(
        "polarity-distribution",
        "Terms by majority polarity intensity (%)",
        "Polarity",
        level_columns(),
    );
    t.partition_columns = 4;
    let mut pooled = [0usize; 4];
    for p in PolarityAxis::ALL {
        let mut c = [0usize; 4];
        for x in lexicon {
            c[intensity_rank(x.polarity[p].four_level.winner)] += 1;
        }
        for i in 0..4 {
            pooled[i] += c[i];
        }
        t.rows
            .push(Row::new(None, p.as_str(), tenths_cells(&largest_remainder_tenths(&c))));
    }
    t.rows.push(Row::new(
        None,
        "polarity average",
        tenths_cells(&largest_remainder_tenths(&pooled)),
    ));
    let mut either = [0usize; 4];
    for x in lexicon {
        either[intensity_rank(strongest(x.polarity.0.iter().map(|a| a.four_level.winner)))] += 1;
    }
    t.rows.push(Row::new(
        None,
        "either polarity",
        tenths_cells(&largest_remainder_tenths(&either)),
    ));
    Ok(t)
}

/// A slice of the lexicon named in breakdown tables.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Subset {
    pub group: Option<String>,
    pub label: String,
    pub keys: BTreeSet<SenseKey>,
}

const GI_CLASSES: [&str; 3] = ["negative", "neutral", "positive"];

fn pos_row_label(p: Pos) -> &'static str {
    match p {
        Pos::Adjective => "adjectives",
        Pos::Adverb => "adverbs",
        Pos::Noun => "nouns",
        Pos::Verb => "verbs",
        Pos::Unknown => "other",
    }
}

/// The standard row set: whole lexicon, n-gram subsets by part of speech,
/// polarity-lexicon terms by class and affect-lexicon terms by emotion.
/// Labels come from `targets`; without them the labelled groups are empty.
pub fn standard_subsets(lexicon: &[LexiconEntry], targets: &[TargetTerm]) -> Vec<Subset> {
    let labels: BTreeMap<SenseKey, &BTreeSet<String>> = targets.iter().map(|t| (t.key(), &t.aux_labels)).collect();
    let mut out = vec![Subset {
        group: None,
        label: "EmoLex".into(),
        keys: lexicon.iter().map(LexiconEntry::key).collect(),
    }];
    let with = |pred: &dyn Fn(&LexiconEntry) -> bool| -> BTreeSet<SenseKey> {
        lexicon.iter().filter(|x| pred(x)).map(LexiconEntry::key).collect()
    };
    for tag in [SourceTag::Unigram, SourceTag::Bigram] {
        for pos in [Pos::Adjective, Pos::Adverb, Pos::Noun, Pos::Verb] {
            out.push(Subset {
                group: Some(tag.as_str().into()),
                label: pos_row_label(pos).into(),
                keys: with(&|x| x.sources.contains(&tag) && x.pos == pos),
            });
        }
    }
    let has_label = |x: &LexiconEntry, l: &str| labels.get(&x.key()).is_some_and(|s| s.contains(l));
    for class in GI_CLASSES {
        out.push(Subset {
            group: Some(SourceTag::GeneralInquirer.as_str().into()),
            label: format!("{class} terms"),
            keys: with(&|x| x.sources.contains(&SourceTag::GeneralInquirer) && has_label(x, class)),
        });
    }
    for e in Emotion::ALL {
        out.push(Subset {
            group: Some(SourceTag::WordNetAffect.as_str().into()),
            label: format!("{e} terms"),
            keys: with(&|x| x.sources.contains(&SourceTag::WordNetAffect) && has_label(x, e.as_str())),
        });
    }
    out
}

/// Look up subsets by name: `all`, or a source tag such as `EmoLex-GI`.
pub fn select_subsets(all: Vec<Subset>, names: &[&str]) -> Result<Vec<Subset>> {
    for n in names {
        if *n != "all" && *n != "EmoLex" && n.parse::<SourceTag>().is_err() {
            return Err(Error::domain(format!("unknown subset `{n}`")));
        }
    }
    Ok(all
        .into_iter()
        .filter(|s| {
            names.iter().any(|n| match s.group.as_deref() {
                None => *n == "all" || *n == "EmoLex",
                Some(g) => *n == "all" || *n == g,
            })
        })
        .collect())
}

fn breakdown(
    name: &str,
    title: &str,
    columns: Vec<String>,
    lexicon: &[LexiconEntry],
    subsets: &[Subset],
    flags: impl Fn(&LexiconEntry) -> Vec<bool>,
) -> Result<Table> {
    nonempty(lexicon)?;
    let by_key: BTreeMap<SenseKey, &LexiconEntry> = lexicon.iter().map(|x| (x.key(), x)).collect();
    let mut t = Table::new(name, title, "", columns);
    for s in subsets {
        let members: Vec<&LexiconEntry> = s.keys.iter().filter_map(|k| by_key.get(k).copied()).collect();
        if members.is_empty() {
            let at = s.group.as_deref().map_or(String::new(), |g| format!("{g} "));
            t.notes.push(format!("{at}{}: no terms, row omitted", s.label));
            continue;
        }
        let n_cols = t.columns.len();
        let mut hits = vec![0usize; n_cols];
        for x in &members {
            for (h, f) in hits.iter_mut().zip(flags(x)) {
                *h += f as usize;
            }
        }
        let cells = hits
            .iter()
            .map(|&h| Cell::Tenths(percent_tenths(h, members.len())))
            .collect();
        t.rows.push(Row::new(s.group.as_deref(), s.label.clone(), cells));
    }
    Ok(t)
}

/// Share of each subset associated with each emotion, and with any.
pub fn emotive_breakdown(lexicon: &[LexiconEntry], subsets: &[Subset]) -> Result<Table> {
    let mut columns: Vec<String> = Emotion::ALL.iter().map(|e| e.as_str().to_string()).collect();
    columns.push("any".into());
    breakdown(
        "emotive-breakdown",
        "Terms in each target set associated with each emotion (%)",
        columns,
        lexicon,
        subsets,
        |x| {
            let mut f: Vec<bool> = x.emotions.0.iter().map(|a| a.associated).collect();
            f.push(f.iter().any(|&b| b));
            f
        },
    )
}

/// Share of each subset that is negatively, positively, or either way evaluative.
pub fn evaluative_breakdown(lexicon: &[LexiconEntry], subsets: &[Subset]) -> Result<Table> {
    breakdown(
        "evaluative-breakdown",
        "Terms in each target set with each polarity (%)",
        vec!["negative".into(), "positive".into(), "either".into()],
        lexicon,
        subsets,
        |x| {
            let n = x.polarity[PolarityAxis::Negative].associated;
            let p = x.polarity[PolarityAxis::Positive].associated;
            vec![n, p, n || p]
        },
    )
}

fn number_word(n: usize) -> String {
    const W: [&str; 11] = [
        "zero", "one", "two", "three", "four", "five", "six", "seven", "eight", "nine", "ten",
    ];
    W.get(n).map_or_else(|| n.to_string(), |w| w.to_string())
}

/// Majority-size histogram as a table: exact-size columns, then the
/// cumulative `≥` columns built from the rounded exact columns.
pub fn histogram_table(h: &MajoritySizeHistogram) -> Table {
    let (name, what) = match (h.questions, h.level) {
        (QuestionSet::Emotions, Granularity::FourLevel) => ("emotion-agreement-four", "emotion, four levels"),
        (QuestionSet::Emotions, Granularity::Binary) => ("emotion-agreement-two", "emotion, two levels"),
        (QuestionSet::Polarity, Granularity::FourLevel) => ("polarity-agreement-four", "polarity, four levels"),
        (QuestionSet::Polarity, Granularity::Binary) => ("polarity-agreement-two", "polarity, two levels"),
    };
    let cumulative: Vec<usize> = if h.sizes.len() > 2 {
        h.sizes[1..h.sizes.len() - 1].to_vec()
    } else {
        Vec::new()
    };
    let mut columns: Vec<String> = h.sizes.iter().map(|&s| format!("= {}", number_word(s))).collect();
    columns.extend(cumulative.iter().map(|&s| format!("≥ {}", number_word(s))));
    let stub = match h.questions {
        QuestionSet::Emotions => "Emotion",
        QuestionSet::Polarity => "Polarity",
    };
    let mut t = Table::new(
        name,
        &format!("Majority class size over {} raters, {what} (% of terms)", h.raters),
        stub,
        columns,
    );
    t.partition_columns = h.sizes.len();
    for r in h.rows.iter().chain(std::iter::once(&h.micro)) {
        let exact = largest_remainder_tenths(&r.counts);
        let mut cells = tenths_cells(&exact);
        for &s in &cumulative {
            let from = s - h.sizes[0];
            cells.push(Cell::Tenths(exact[from..].iter().sum()));
        }
        t.rows.push(Row::new(None, r.label.clone(), cells));
    }
    if h.excluded_terms > 0 {
        t.notes.push(format!(
            "{} term(s) with a rater count other than {} not counted",
            h.excluded_terms, h.raters
        ));
    }
    t
}

pub fn kappa_table_view(k: &KappaTable<f64>, questions: QuestionSet) -> Table {
    let (name, stub) = match questions {
        QuestionSet::Emotions => ("emotion-kappa", "Emotion"),
        QuestionSet::Polarity => ("polarity-kappa", "Polarity"),
    };
    let level = match k.level {
        Granularity::Binary => "two levels",
        Granularity::FourLevel => "four levels",
    };
    let mut t = Table::new(
        name,
        &format!("Fleiss's κ at {level} with its interpretation"),
        stub,
        vec!["Fleiss's κ".into(), "Interpretation".into()],
    );
    let cells = |v: f64, b: AgreementBand| vec![Cell::Real { value: v, decimals: 2 }, Cell::Text(b.as_str().into())];
    for r in &k.rows {
        t.rows
            .push(Row::new(None, r.label.clone(), cells(r.kappa.value, r.kappa.band)));
    }
    t.rows
        .push(Row::new(None, "micro-average", cells(k.micro_average, k.micro_band)));
    t
}

pub fn kappa_bands_table() -> Table {
    let mut t = Table::new(
        "kappa-bands",
        "Interpretation of Fleiss's κ",
        "Fleiss's κ",
        vec!["Interpretation".into()],
    );
    for b in AgreementBand::ALL {
        t.rows
            .push(Row::new(None, b.range_label(), vec![Cell::Text(b.as_str().into())]));
    }
    t
}

/// Unanimous binary majorities under two framings.
pub fn framing_table(c: &FramingComparison, a: Framing, b: Framing) -> Table {
    let mut t = Table::new(
        "framing-comparison",
        &format!("Terms with a unanimous two-level majority, {a} versus {b} (%)"),
        "Emotion",
        vec![a.as_str().into(), b.as_str().into()],
    );
    for r in &c.rows {
        t.rows.push(Row::new(
            None,
            r.emotion.as_str(),
            vec![
                Cell::Tenths(percent_tenths(r.unanimous_a, c.terms)),
                Cell::Tenths(percent_tenths(r.unanimous_b, c.terms)),
            ],
        ));
    }
    let (ma, mb) = c.micro();
    let denom = c.terms * c.rows.len();
    t.rows.push(Row::new(
        None,
        "micro-average",
        vec![
            Cell::Tenths(percent_tenths(ma, denom)),
            Cell::Tenths(percent_tenths(mb, denom)),
        ],
    ));
    t.notes
        .push(format!("{} shared terms; {} excluded", c.terms, c.excluded_terms));
    t
}

/// Per-emotion change from the first framing to the second, in points.
pub fn framing_delta_table(c: &FramingComparison, a: Framing, b: Framing) -> Table {
    let mut t = Table::new(
        "framing-delta",
        &format!("Change in unanimity from {a} to {b} (percentage points)"),
        "Emotion",
        vec!["delta".into()],
    );
    for (e, d) in c.deltas::<f64>() {
        t.rows
            .push(Row::new(None, e.as_str(), vec![Cell::Real { value: d, decimals: 1 }]));
    }
    let (ma, mb) = c.micro();
    let denom = (c.terms * c.rows.len()) as f64;
    t.rows.push(Row::new(
        None,
        "micro-average",
        vec![Cell::Real {
            value: 100.0 * (mb as f64 - ma as f64) / denom,
            decimals: 1,
        }],
    ));
    t
}

/// Co-occurrence counts and Jaccard coefficients of binary emotion associations.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Cooccurrence {
    pub counts: [[usize; 8]; 8],
    pub jaccard: [[f64; 8]; 8],
}

pub fn emotion_cooccurrence(lexicon: &[LexiconEntry]) -> Cooccurrence {
    let mut counts = [[0usize; 8]; 8];
    for x in lexicon {
        let on: Vec<usize> = Emotion::ALL
            .iter()
            .filter(|&&e| x.emotions[e].associated)
            .map(|e| e.index())
            .collect();
        for &i in &on {
            for &j in &on {
                counts[i][j] += 1;
            }
        }
    }
    let mut jaccard = [[0f64; 8]; 8];
    for i in 0..8 {
        for j in 0..8 {
            let union = counts[i][i] + counts[j][j] - counts[i][j];
            jaccard[i][j] = if union == 0 {
                0.0
            } else {
                counts[i][j] as f64 / union as f64
            };
        }
    }
    Cooccurrence { counts, jaccard }
}

pub fn cooccurrence_tables(c: &Cooccurrence) -> [Table; 2] {
    let cols: Vec<String> = Emotion::ALL.iter().map(|e| e.as_str().to_string()).collect();
    let mut counts = Table::new(
        "cooccurrence-counts",
        "Terms associated with both emotions",
        "Emotion",
        cols.clone(),
    );
    let mut jac = Table::new(
        "cooccurrence-jaccard",
        "Jaccard overlap of emotion term sets",
        "Emotion",
        cols,
    );
    for e in Emotion::ALL {
        let i = e.index();
        counts.rows.push(Row::new(
            None,
            e.as_str(),
            c.counts[i].iter().map(|&n| Cell::Count(n)).collect(),
        ));
        jac.rows.push(Row::new(
            None,
            e.as_str(),
            c.jaccard[i]
                .iter()
                .map(|&v| Cell::Real { value: v, decimals: 3 })
                .collect(),
        ));
    }
    [counts, jac]
}

/// Polarity of the terms associated with each emotion.
pub fn polarity_emotion_crosstab(lexicon: &[LexiconEntry]) -> Table {
    let mut t = Table::new(
        "polarity-emotion-crosstab",
        "Polarity of terms associated with each emotion (%)",
        "Emotion",
        vec![
            "negative".into(),
            "positive".into(),
            "neither".into(),
            "both".into(),
            "terms".into(),
        ],
    );
    t.partition_columns = 4;
    for e in Emotion::ALL {
        let mut c = [0usize; 4];
        for x in lexicon.iter().filter(|x| x.emotions[e].associated) {
            let n = x.polarity[PolarityAxis::Negative].associated;
            let p = x.polarity[PolarityAxis::Positive].associated;
            c[match (n, p) {
                (true, false) => 0,
                (false, true) => 1,
                (false, false) => 2,
                (true, true) => 3,
            }] += 1;
        }
        let total: usize = c.iter().sum();
        if total == 0 {
            t.notes.push(format!("{e}: no associated terms, row omitted"));
            continue;
        }
        let mut cells = tenths_cells(&largest_remainder_tenths(&c));
        cells.push(Cell::Count(total));
        t.rows.push(Row::new(None, e.as_str(), cells));
    }
    t
}

pub fn audit_table(a: &AuditReport) -> Table {
    let mut t = Table::new(
        "audit-summary",
        "Validation stages",
        "Stage",
        vec![
            "assignments in".into(),
            "dropped".into(),
            "annotators removed".into(),
            "bad questions".into(),
            "terms dropped".into(),
        ],
    );
    for s in &a.stages {
        t.rows.push(Row::new(
            None,
            s.stage.as_str(),
            vec![
                Cell::Count(s.assignments_in),
                Cell::Count(s.assignments_dropped),
                Cell::Count(s.annotators_disqualified),
                Cell::Count(s.questions_marked_bad),
                Cell::Count(s.terms_dropped),
            ],
        ));
    }
    t.notes.push(format!(
        "input {} assignments, master set {} assignments over {} terms",
        a.input_total, a.output_total, a.master_terms
    ));
    t.notes.extend(a.warnings.iter().cloned());
    t
}

/// Everything the report needs beyond the master set and lexicon.
#[derive(Debug, Clone, Copy, Default)]
pub struct ReportOptions<'a> {
    pub targets: &'a [TargetTerm],
    pub audit: Option<&'a AuditReport>,
    pub framing: Option<(&'a FramingComparison, Framing, Framing)>,
    /// Rater count used for the majority-size histograms.
    pub raters: usize,
}

/// Tables in presentation order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReportBundle {
    pub tables: Vec<Table>,
}

impl ReportBundle {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }
}

impl Serialize for ReportBundle {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m = s.serialize_map(Some(self.tables.len()))?;
        for t in &self.tables {
            m.serialize_entry(&t.name, t)?;
        }
        m.end()
    }
}

pub fn build_report(master: &MasterSet, lexicon: &[LexiconEntry], opts: ReportOptions) -> Result<ReportBundle> {
    nonempty(lexicon)?;
    let raters = if opts.raters == 0 { 5 } else { opts.raters };
    let subsets = standard_subsets(lexicon, opts.targets);
    let mut tables = vec![intensity_distribution(lexicon)?, emotive_breakdown(lexicon, &subsets)?];
    for level in [Granularity::FourLevel, Granularity::Binary] {
        tables.push(histogram_table(&majority_size_histogram(
            master,
            level,
            QuestionSet::Emotions,
            raters,
        )?));
    }
    tables.push(kappa_bands_table());
    tables.push(kappa_table_view(
        &kappa_table(master, QuestionSet::Emotions, Granularity::Binary)?,
        QuestionSet::Emotions,
    ));
    if let Some((c, a, b)) = opts.framing {
        tables.push(framing_table(c, a, b));
        tables.push(framing_delta_table(c, a, b));
    }
    tables.push(polarity_distribution(lexicon)?);
    tables.push(evaluative_breakdown(lexicon, &subsets)?);
    for level in [Granularity::FourLevel, Granularity::Binary] {
        tables.push(histogram_table(&majority_size_histogram(
            master,
            level,
            QuestionSet::Polarity,
            raters,
        )?));
    }
    tables.push(kappa_table_view(
        &kappa_table(master, QuestionSet::Polarity, Granularity::Binary)?,
        QuestionSet::Polarity,
    ));
    tables.extend(cooccurrence_tables(&emotion_cooccurrence(lexicon)));
    tables.push(polarity_emotion_crosstab(lexicon));
    if let Some(a) = opts.audit {
        tables.push(audit_table(a));
    }
    Ok(ReportBundle { tables })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReportFormat {
    #[default]
    Plain,
    Structured,
}

fn render_plain<W: Write>(t: &Table, out: &mut W) -> Result<()> {
    writeln!(out, "== {} ==", t.name)?;
    writeln!(out, "{}", t.title)?;
    let indent = if t.rows.iter().any(|r| r.group.is_some()) {
        "  "
    } else {
        ""
    };
    let label_w = t
        .rows
        .iter()
        .map(|r| r.label.chars().count() + if r.group.is_some() { indent.len() } else { 0 })
        .chain([t.stub.chars().count()])
        .max()
        .unwrap_or(0);
    let rendered: Vec<Vec<String>> = t
        .rows
        .iter()
        .map(|r| r.cells.iter().map(Cell::render).collect())
        .collect();
    let widths: Vec<usize> = (0..t.columns.len())
        .map(|j| {
            rendered
                .iter()
                .filter_map(|r| r.get(j))
                .map(|s| s.chars().count())
                .chain([t.columns[j].chars().count()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let pad = |s: &str, w: usize, right: bool| {
        let n = w.saturating_sub(s.chars().count());
        if right {
            format!("{}{s}", " ".repeat(n))
        } else {
            format!("{s}{}", " ".repeat(n))
        }
    };
    let mut header = pad(&t.stub, label_w, false);
    for (c, &w) in t.columns.iter().zip(&widths) {
        header.push_str("  ");
        header.push_str(&pad(c, w, true));
    }
    writeln!(out, "{}", header.trim_end())?;
    let mut group: Option<&str> = None;
    for (r, cells) in t.rows.iter().zip(&rendered) {
        if r.group.as_deref() != group {
            group = r.group.as_deref();
            if let Some(g) = group {
                writeln!(out, "{g}:")?;
            }
        }
        let label = if r.group.is_some() {
            format!("{indent}{}", r.label)
        } else {
            r.label.clone()
        };
        let mut line = pad(&label, label_w, false);
        for (c, &w) in cells.iter().zip(&widths) {
            line.push_str("  ");
            line.push_str(&pad(c, w, true));
        }
        writeln!(out, "{}", line.trim_end())?;
    }
    for n in &t.notes {
        writeln!(out, "note: {n}")?;
    }
    Ok(())
}

pub fn render_report<W: Write>(bundle: &ReportBundle, format: ReportFormat, out: &mut W) -> Result<()> {
    match format {
        ReportFormat::Plain => {
            for (i, t) in bundle.tables.iter().enumerate() {
                if i > 0 {
                    writeln!(out)?;
                }
                render_plain(t, out)?;
            }
        }
        ReportFormat::Structured => {
            serde_json::to_writer_pretty(&mut *out, bundle)?;
            writeln!(out)?;
        }
    }
    Ok(())
}
