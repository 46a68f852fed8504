//! Agreement statistics: majority-size histograms, Fleiss's κ with a
//! variable number of raters per item, Scott's Π, Cohen's κ and the
//! Landis–Koch bands.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::hash::Hash;

use serde::{Deserialize, Serialize};

use crate::aggregate::{facet_votes, majority_binary, majority_intensity};
use crate::domain::{to_binary_bin, Bin, Emotion, Facet, IntensityLevel, PolarityAxis, SenseKey};
use crate::error::{Error, Result};
use crate::qc::MasterSet;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AgreementBand {
    Poor,
    Slight,
    Fair,
    Moderate,
    Substantial,
    AlmostPerfect,
}

impl AgreementBand {
    pub const ALL: [AgreementBand; 6] = [
        AgreementBand::Poor,
        AgreementBand::Slight,
        AgreementBand::Fair,
        AgreementBand::Moderate,
        AgreementBand::Substantial,
        AgreementBand::AlmostPerfect,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            AgreementBand::Poor => "poor agreement",
            AgreementBand::Slight => "slight agreement",
            AgreementBand::Fair => "fair agreement",
            AgreementBand::Moderate => "moderate agreement",
            AgreementBand::Substantial => "substantial agreement",
            AgreementBand::AlmostPerfect => "almost perfect agreement",
        }
    }

    /// Printed κ range of the band.
    pub fn range_label(self) -> &'static str {
        match self {
            AgreementBand::Poor => "< 0",
            AgreementBand::Slight => "0.00 - 0.20",
            AgreementBand::Fair => "0.21 - 0.40",
            AgreementBand::Moderate => "0.41 - 0.60",
            AgreementBand::Substantial => "0.61 - 0.80",
            AgreementBand::AlmostPerfect => "0.81 - 1.00",
        }
    }
}

impl fmt::Display for AgreementBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Landis–Koch band. Upper edges are inclusive, so 0.20 is slight and
/// 0.205 is fair.
pub fn interpret_kappa<F: Scalar>(value: F) -> AgreementBand {
    if value < F::zero() {
        AgreementBand::Poor
    } else if value <= F::lit(0.20) {
        AgreementBand::Slight
    } else if value <= F::lit(0.40) {
        AgreementBand::Fair
    } else if value <= F::lit(0.60) {
        AgreementBand::Moderate
    } else if value <= F::lit(0.80) {
        AgreementBand::Substantial
    } else {
        AgreementBand::AlmostPerfect
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Kappa<F> {
    pub value: F,
    pub observed_agreement: F,
    pub expected_agreement: F,
    pub band: AgreementBand,
}

impl<F: Scalar> Kappa<F> {
    fn from_parts(observed: F, expected: F) -> Self {
        let value = (observed - expected) / (F::one() - expected);
        Kappa {
            value,
            observed_agreement: observed,
            expected_agreement: expected,
            band: interpret_kappa(value),
        }
    }
}

/// Per-item category counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RatingMatrix {
    categories: usize,
    counts: Vec<Vec<u32>>,
}

impl RatingMatrix {
    pub fn new(categories: usize, counts: Vec<Vec<u32>>) -> Result<Self> {
        if categories < 2 {
            return Err(Error::domain("a rating matrix needs at least two categories"));
        }
        for (i, row) in counts.iter().enumerate() {
            if row.len() != categories {
                return Err(Error::domain(format!(
                    "item {i} has {} columns, expected {categories}",
                    row.len()
                )));
            }
            if row.iter().sum::<u32>() < 2 {
                return Err(Error::domain(format!("item {i} has fewer than two ratings")));
            }
        }
        Ok(RatingMatrix { categories, counts })
    }

    /// Build from per-item label lists; `category` maps a label to its column.
    pub fn from_labels<L>(categories: usize, items: &[Vec<L>], category: impl Fn(&L) -> usize) -> Result<Self> {
        let mut counts = Vec::with_capacity(items.len());
        for item in items {
            let mut row = vec![0u32; categories];
            for l in item {
                let c = category(l);
                if c >= categories {
                    return Err(Error::domain(format!("category {c} out of range")));
                }
                row[c] += 1;
            }
            counts.push(row);
        }
        RatingMatrix::new(categories, counts)
    }

    pub fn categories(&self) -> usize {
        self.categories
    }

    pub fn items(&self) -> &[Vec<u32>] {
        &self.counts
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }
}

pub fn fleiss_kappa<F: Scalar>(m: &RatingMatrix) -> Result<Kappa<F>> {
    if m.is_empty() {
        return Err(Error::domain("fleiss kappa of an empty matrix"));
    }
    let mut totals = vec![0u64; m.categories];
    let mut grand = 0u64;
    let mut p_sum = F::zero();
    for row in &m.counts {
        let n: u64 = row.iter().map(|&c| c as u64).sum();
        let agree: u64 = row.iter().map(|&c| c as u64 * (c as u64).saturating_sub(1)).sum();
        p_sum = p_sum + F::from_u64(agree).expect("count") / F::from_u64(n * (n - 1)).expect("count");
        for (t, &c) in totals.iter_mut().zip(row) {
            *t += c as u64;
        }
        grand += n;
    }
    if totals.contains(&grand) {
        return Err(Error::DegenerateDistribution);
    }
    let grand_f = F::from_u64(grand).expect("count");
    let expected = totals
        .iter()
        .map(|&t| {
            let p = F::from_u64(t).expect("count") / grand_f;
            p * p
        })
        .sum::<F>();
    let observed = p_sum / F::from_count(m.len());
    Ok(Kappa::from_parts(observed, expected))
}

/// Item count and per-label (first rater, second rater) totals.
type PairTallies<L> = (usize, BTreeMap<L, (usize, usize)>);

fn pair_tallies<L: Eq + Hash + Ord + Clone>(a: &[L], b: &[L]) -> Result<PairTallies<L>> {
    if a.len() != b.len() {
        return Err(Error::domain(format!(
            "label lists differ in length ({} vs {})",
            a.len(),
            b.len()
        )));
    }
    if a.is_empty() {
        return Err(Error::domain("empty label lists"));
    }
    let mut marg: BTreeMap<L, (usize, usize)> = BTreeMap::new();
    let mut agree = 0;
    for (x, y) in a.iter().zip(b) {
        marg.entry(x.clone()).or_default().0 += 1;
        marg.entry(y.clone()).or_default().1 += 1;
        if x == y {
            agree += 1;
        }
    }
    Ok((agree, marg))
}

/// Two raters, chance agreement from the pooled category distribution.
pub fn scott_pi<F: Scalar, L: Eq + Hash + Ord + Clone>(a: &[L], b: &[L]) -> Result<Kappa<F>> {
    let (agree, marg) = pair_tallies(a, b)?;
    if marg.len() == 1 {
        return Err(Error::DegenerateDistribution);
    }
    let n = F::from_count(a.len());
    let two_n = n + n;
    let expected = marg
        .values()
        .map(|&(x, y)| {
            let q = F::from_count(x + y) / two_n;
            q * q
        })
        .sum::<F>();
    Ok(Kappa::from_parts(F::from_count(agree) / n, expected))
}

/// Two raters, chance agreement from each rater's own distribution.
pub fn cohen_kappa<F: Scalar, L: Eq + Hash + Ord + Clone>(a: &[L], b: &[L]) -> Result<Kappa<F>> {
    let (agree, marg) = pair_tallies(a, b)?;
    let n = F::from_count(a.len());
    let expected = marg
        .values()
        .map(|&(x, y)| F::from_count(x) / n * (F::from_count(y) / n))
        .sum::<F>();
    if marg.values().any(|&(x, y)| x == a.len() && y == a.len()) {
        return Err(Error::DegenerateDistribution);
    }
    Ok(Kappa::from_parts(F::from_count(agree) / n, expected))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Granularity {
    FourLevel,
    Binary,
}

impl Granularity {
    pub fn levels(self) -> usize {
        match self {
            Granularity::FourLevel => 4,
            Granularity::Binary => 2,
        }
    }

    /// Smallest possible majority with `raters` votes.
    pub fn min_majority(self, raters: usize) -> usize {
        raters.div_ceil(self.levels()).max(1)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum QuestionSet {
    Emotions,
    Polarity,
}

impl QuestionSet {
    pub fn facets(self) -> Vec<Facet> {
        match self {
            QuestionSet::Emotions => Emotion::ALL.into_iter().map(Facet::Emotion).collect(),
            QuestionSet::Polarity => PolarityAxis::ALL.into_iter().map(Facet::Polarity).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HistogramRow {
    pub label: String,
    /// Terms per majority size, aligned with `MajoritySizeHistogram::sizes`.
    pub counts: Vec<usize>,
}

impl HistogramRow {
    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }
}

/// Majority-size counts over the groups with exactly `raters` assignments.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MajoritySizeHistogram {
    pub level: Granularity,
    pub questions: QuestionSet,
    pub raters: usize,
    pub sizes: Vec<usize>,
    pub rows: Vec<HistogramRow>,
    pub micro: HistogramRow,
    pub terms: usize,
    pub excluded_terms: usize,
}

pub(crate) fn majority_size(votes: &[IntensityLevel], level: Granularity) -> Result<usize> {
    Ok(match level {
        Granularity::FourLevel => majority_intensity(votes)?.majority_size,
        Granularity::Binary => majority_binary(votes)?.majority_size,
    })
}

pub fn majority_size_histogram(
    master: &MasterSet,
    level: Granularity,
    questions: QuestionSet,
    raters: usize,
) -> Result<MajoritySizeHistogram> {
    if master.is_empty() {
        return Err(Error::domain("majority-size histogram of an empty master set"));
    }
    if raters == 0 {
        return Err(Error::domain("rater count must be positive"));
    }
    let sizes: Vec<usize> = (level.min_majority(raters)..=raters).collect();
    let lo = sizes[0];
    let facets = questions.facets();
    let mut rows: Vec<HistogramRow> = facets
        .iter()
        .map(|f| HistogramRow {
            label: f.label().to_string(),
            counts: vec![0; sizes.len()],
        })
        .collect();
    let mut terms = 0;
    for g in master.groups().iter().filter(|g| g.len() == raters) {
        terms += 1;
        for (row, &facet) in rows.iter_mut().zip(&facets) {
            let size = majority_size(&facet_votes(&g.assignments, facet)?, level)?;
            row.counts[size - lo] += 1;
        }
    }
    if terms == 0 {
        return Err(Error::domain(format!(
            "no master-set term has exactly {raters} assignments"
        )));
    }
    let micro = HistogramRow {
        label: "micro-average".into(),
        counts: (0..sizes.len())
            .map(|j| rows.iter().map(|r| r.counts[j]).sum())
            .collect(),
    };
    Ok(MajoritySizeHistogram {
        level,
        questions,
        raters,
        sizes,
        rows,
        micro,
        terms,
        excluded_terms: master.term_count() - terms,
    })
}

/// Rating matrix of one facet over the master set.
pub fn facet_matrix(master: &MasterSet, facet: Facet, level: Granularity) -> Result<RatingMatrix> {
    let mut counts = Vec::with_capacity(master.term_count());
    for g in master.groups() {
        let votes = facet_votes(&g.assignments, facet)?;
        let mut row = vec![0u32; level.levels()];
        for v in votes {
            let c = match level {
                Granularity::FourLevel => crate::domain::intensity_rank(v),
                Granularity::Binary => (to_binary_bin(v) == Bin::Associated) as usize,
            };
            row[c] += 1;
        }
        counts.push(row);
    }
    RatingMatrix::new(level.levels(), counts)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaRow<F> {
    pub label: String,
    pub kappa: Kappa<F>,
}

/// κ per facet and their unweighted mean.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaTable<F> {
    pub level: Granularity,
    pub rows: Vec<KappaRow<F>>,
    pub micro_average: F,
    pub micro_band: AgreementBand,
}

pub fn kappa_table<F: Scalar>(master: &MasterSet, questions: QuestionSet, level: Granularity) -> Result<KappaTable<F>> {
    let mut rows = Vec::new();
    for facet in questions.facets() {
        let kappa = fleiss_kappa(&facet_matrix(master, facet, level)?)?;
        rows.push(KappaRow {
            label: facet.label().to_string(),
            kappa,
        });
    }
    let micro_average = rows.iter().map(|r| r.kappa.value).sum::<F>() / F::from_count(rows.len());
    Ok(KappaTable {
        level,
        rows,
        micro_average,
        micro_band: interpret_kappa(micro_average),
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramingRow {
    pub emotion: Emotion,
    pub unanimous_a: usize,
    pub unanimous_b: usize,
}

/// Unanimity counts under two framings over their shared five-rater terms.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FramingComparison {
    pub raters: usize,
    pub terms: usize,
    pub excluded_terms: usize,
    pub rows: Vec<FramingRow>,
}

impl FramingComparison {
    pub fn micro(&self) -> (usize, usize) {
        (
            self.rows.iter().map(|r| r.unanimous_a).sum(),
            self.rows.iter().map(|r| r.unanimous_b).sum(),
        )
    }

    /// Percentage-point deltas `b − a` per emotion.
    pub fn deltas<F: Scalar>(&self) -> Vec<(Emotion, F)> {
        let n = F::from_count(self.terms);
        self.rows
            .iter()
            .map(|r| {
                let pa = F::hundred() * F::from_count(r.unanimous_a) / n;
                let pb = F::hundred() * F::from_count(r.unanimous_b) / n;
                (r.emotion, pb - pa)
            })
            .collect()
    }
}

pub fn compare_framings(master_a: &MasterSet, master_b: &MasterSet, raters: usize) -> Result<FramingComparison> {
    let full = |m: &MasterSet| -> BTreeSet<SenseKey> {
        m.groups()
            .iter()
            .filter(|g| g.len() == raters)
            .map(|g| g.key.clone())
            .collect()
    };
    let (ka, kb) = (full(master_a), full(master_b));
    let shared: Vec<&SenseKey> = ka.intersection(&kb).collect();
    if shared.is_empty() {
        return Err(Error::domain("framings share no term with a full rater complement"));
    }
    let all: BTreeSet<&SenseKey> = master_a
        .groups()
        .iter()
        .chain(master_b.groups())
        .map(|g| &g.key)
        .collect();
    let mut rows: Vec<FramingRow> = Emotion::ALL
        .iter()
        .map(|&emotion| FramingRow {
            emotion,
            unanimous_a: 0,
            unanimous_b: 0,
        })
        .collect();
    for key in &shared {
        let ga = master_a.get(key).expect("shared key");
        let gb = master_b.get(key).expect("shared key");
        for row in &mut rows {
            let f = Facet::Emotion(row.emotion);
            if majority_binary(&facet_votes(&ga.assignments, f)?)?.majority_size == raters {
                row.unanimous_a += 1;
            }
            if majority_binary(&facet_votes(&gb.assignments, f)?)?.majority_size == raters {
                row.unanimous_b += 1;
            }
        }
    }
    Ok(FramingComparison {
        raters,
        terms: shared.len(),
        excluded_terms: all.len() - shared.len(),
        rows,
    })
}
