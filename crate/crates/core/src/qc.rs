//! Validation cascade turning raw assignments into the master set.
//!
//! Stages run once each, in this order: incomplete sheets, bad gate
//! questions, wrong gate answers, low-accuracy annotators, outlier
//! annotators, and finally terms left with too few assignments.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::aggregate::majority_intensity;
use crate::domain::{Emotion, IntensityLevel, Pos, SenseKey};
use crate::error::{Error, Result};
use crate::hits::{Hit, HitIndex};
use crate::ingest::Assignment;
use crate::scalar::{mean_and_population_stdev, Scalar};

/// Serializes a ratio as `"num/den"`.
pub mod ratio_str {
    use num_rational::Ratio;
    use serde::{de::Error as _, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Ratio<u32>, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(r)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Ratio<u32>, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).map_err(D::Error::custom)
    }

    pub fn parse(s: &str) -> Result<Ratio<u32>, String> {
        let s = s.trim();
        let (n, d) = s.split_once('/').unwrap_or((s, "1"));
        let n: u32 = n.trim().parse().map_err(|_| format!("bad ratio `{s}`"))?;
        let d: u32 = d.trim().parse().map_err(|_| format!("bad ratio `{s}`"))?;
        if d == 0 {
            return Err(format!("zero denominator in `{s}`"));
        }
        Ok(Ratio::new(n, d))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum OutlierMode {
    /// Score and remove once.
    SinglePass,
    /// Repeat scoring and the group-size filter until nothing changes.
    #[default]
    UntilStable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub raters_per_hit: usize,
    pub bad_question_min_wrong: usize,
    #[serde(with = "ratio_str")]
    pub wordchoice_accuracy_threshold: Ratio<u32>,
    pub outlier_sigma: f64,
    pub min_valid_assignments: usize,
    pub outlier_mode: OutlierMode,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            raters_per_hit: 5,
            bad_question_min_wrong: 3,
            wordchoice_accuracy_threshold: Ratio::new(2, 3),
            outlier_sigma: 2.0,
            min_valid_assignments: 3,
            outlier_mode: OutlierMode::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        let t = self.wordchoice_accuracy_threshold;
        if self.raters_per_hit == 0 || self.bad_question_min_wrong == 0 || self.min_valid_assignments == 0 {
            return Err(Error::Config("counts must be positive".into()));
        }
        if *t.numer() == 0 || t > Ratio::from_integer(1) {
            return Err(Error::Config(format!("accuracy threshold {t} outside (0, 1]")));
        }
        if !(self.outlier_sigma.is_finite() && self.outlier_sigma > 0.0) {
            return Err(Error::Config(format!(
                "outlier sigma {} must be positive",
                self.outlier_sigma
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stage {
    Incomplete,
    BadQuestions,
    WrongWordChoice,
    LowAccuracy,
    Outliers,
    MinAssignments,
}

impl Stage {
    pub const ALL: [Stage; 6] = [
        Stage::Incomplete,
        Stage::BadQuestions,
        Stage::WrongWordChoice,
        Stage::LowAccuracy,
        Stage::Outliers,
        Stage::MinAssignments,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Incomplete => "incomplete",
            Stage::BadQuestions => "bad-questions",
            Stage::WrongWordChoice => "wrong-word-choice",
            Stage::LowAccuracy => "low-accuracy",
            Stage::Outliers => "outliers",
            Stage::MinAssignments => "min-assignments",
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageRecord {
    pub stage: Stage,
    pub assignments_in: usize,
    pub assignments_dropped: usize,
    pub annotators_disqualified: usize,
    pub questions_marked_bad: usize,
    pub terms_dropped: usize,
}

impl StageRecord {
    fn new(stage: Stage, before: &[Assignment], after: &[Assignment], hits: &HitIndex) -> Self {
        let terms = |xs: &[Assignment]| -> BTreeSet<SenseKey> {
            xs.iter().filter_map(|a| hits.get(&a.hit_id)).map(Hit::key).collect()
        };
        StageRecord {
            stage,
            assignments_in: before.len(),
            assignments_dropped: before.len() - after.len(),
            annotators_disqualified: 0,
            questions_marked_bad: 0,
            terms_dropped: terms(before).difference(&terms(after)).count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatorStats {
    pub annotator_id: String,
    pub wc_attempted: usize,
    pub wc_correct: usize,
    /// `None` when the annotator has no scored answers.
    pub majority_agreement_prob: Option<f64>,
}

impl AnnotatorStats {
    fn new(annotator_id: &str) -> Self {
        AnnotatorStats {
            annotator_id: annotator_id.to_string(),
            wc_attempted: 0,
            wc_correct: 0,
            majority_agreement_prob: None,
        }
    }

    /// Exact test of `correct / attempted < threshold`.
    pub fn below(&self, threshold: Ratio<u32>) -> bool {
        let (n, d) = (*threshold.numer() as u128, *threshold.denom() as u128);
        self.wc_attempted > 0 && (self.wc_correct as u128) * d < n * (self.wc_attempted as u128)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AuditReport {
    pub input_total: usize,
    pub output_total: usize,
    pub stages: Vec<StageRecord>,
    pub bad_hits: Vec<String>,
    pub disqualified_annotators: Vec<String>,
    pub outlier_annotators: Vec<String>,
    pub outlier_mean: Option<f64>,
    pub outlier_stdev: Option<f64>,
    pub outlier_rounds: usize,
    pub master_terms: usize,
    pub annotators: Vec<AnnotatorStats>,
    pub warnings: Vec<String>,
    pub config: PipelineConfig,
}

impl AuditReport {
    pub fn total_dropped(&self) -> usize {
        self.stages.iter().map(|s| s.assignments_dropped).sum()
    }

    pub fn stage(&self, stage: Stage) -> Option<&StageRecord> {
        self.stages.iter().find(|s| s.stage == stage)
    }

    /// `input − Σ drops = output`.
    pub fn reconciles(&self) -> bool {
        self.input_total.checked_sub(self.total_dropped()) == Some(self.output_total)
    }
}

/// Surviving assignments of one (term, category) pair.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterGroup {
    pub key: SenseKey,
    pub pos: Pos,
    pub hit_ids: BTreeSet<String>,
    pub assignments: Vec<Assignment>,
}

impl MasterGroup {
    pub fn len(&self) -> usize {
        self.assignments.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assignments.is_empty()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MasterSet {
    groups: Vec<MasterGroup>,
}

impl MasterSet {
    /// Group assignments by sense without filtering. Groups come out in key
    /// order; assignments keep their input order.
    pub fn group(assignments: Vec<Assignment>, hits: &HitIndex) -> Result<Self> {
        single_framing(&assignments, hits)?;
        let mut map: BTreeMap<SenseKey, MasterGroup> = BTreeMap::new();
        for a in assignments {
            let hit = hits.require(&a.hit_id)?;
            let g = map.entry(hit.key()).or_insert_with(|| MasterGroup {
                key: hit.key(),
                pos: hit.pos,
                hit_ids: BTreeSet::new(),
                assignments: Vec::new(),
            });
            g.hit_ids.insert(hit.hit_id.clone());
            g.assignments.push(a);
        }
        Ok(MasterSet {
            groups: map.into_values().collect(),
        })
    }

    pub fn from_groups(mut groups: Vec<MasterGroup>) -> Self {
        groups.sort_by(|a, b| a.key.cmp(&b.key));
        MasterSet { groups }
    }

    pub fn groups(&self) -> &[MasterGroup] {
        &self.groups
    }

    pub fn get(&self, key: &SenseKey) -> Option<&MasterGroup> {
        self.groups
            .binary_search_by(|g| g.key.cmp(key))
            .ok()
            .map(|i| &self.groups[i])
    }

    pub fn term_count(&self) -> usize {
        self.groups.len()
    }

    pub fn is_empty(&self) -> bool {
        self.groups.is_empty()
    }

    pub fn assignment_count(&self) -> usize {
        self.groups.iter().map(MasterGroup::len).sum()
    }

    pub fn assignments(&self) -> impl Iterator<Item = &Assignment> {
        self.groups.iter().flat_map(|g| g.assignments.iter())
    }

    pub fn counts(&self) -> BTreeMap<SenseKey, usize> {
        self.groups.iter().map(|g| (g.key.clone(), g.len())).collect()
    }

    pub fn mean_group_size(&self) -> Option<f64> {
        (!self.groups.is_empty()).then(|| self.assignment_count() as f64 / self.groups.len() as f64)
    }

    pub fn into_assignments(self) -> Vec<Assignment> {
        self.groups.into_iter().flat_map(|g| g.assignments).collect()
    }
}

pub fn drop_incomplete(assignments: Vec<Assignment>) -> (Vec<Assignment>, usize) {
    let before = assignments.len();
    let kept: Vec<Assignment> = assignments.into_iter().filter(Assignment::is_complete).collect();
    let dropped = before - kept.len();
    (kept, dropped)
}

fn gate_correct(a: &Assignment, hits: &HitIndex) -> Result<bool> {
    Ok(a.word_choice == Some(hits.require(&a.hit_id)?.correct_index()))
}

/// Hits with at least `min_wrong` wrong gate answers, and the assignments
/// of all other hits.
pub fn detect_bad_questions(
    assignments: Vec<Assignment>,
    hits: &HitIndex,
    min_wrong: usize,
) -> Result<(BTreeSet<String>, Vec<Assignment>, usize)> {
    let mut wrong: HashMap<&str, usize> = HashMap::new();
    for a in &assignments {
        if !gate_correct(a, hits)? {
            *wrong.entry(a.hit_id.as_str()).or_default() += 1;
        }
    }
    let bad: BTreeSet<String> = wrong
        .into_iter()
        .filter(|&(_, n)| n >= min_wrong)
        .map(|(id, _)| id.to_string())
        .collect();
    let before = assignments.len();
    let kept: Vec<Assignment> = assignments.into_iter().filter(|a| !bad.contains(&a.hit_id)).collect();
    let dropped = before - kept.len();
    Ok((bad, kept, dropped))
}

pub fn drop_wrong_wordchoice(assignments: Vec<Assignment>, hits: &HitIndex) -> Result<(Vec<Assignment>, usize)> {
    let before = assignments.len();
    let mut kept = Vec::with_capacity(before);
    for a in assignments {
        if gate_correct(&a, hits)? {
            kept.push(a);
        }
    }
    let dropped = before - kept.len();
    Ok((kept, dropped))
}

/// Gate tallies per annotator, sorted by annotator id.
pub fn gate_accuracy(pool: &[Assignment], hits: &HitIndex) -> Result<Vec<AnnotatorStats>> {
    let mut by_id: BTreeMap<&str, AnnotatorStats> = BTreeMap::new();
    for a in pool {
        let s = by_id
            .entry(a.annotator_id.as_str())
            .or_insert_with(|| AnnotatorStats::new(&a.annotator_id));
        s.wc_attempted += 1;
        if gate_correct(a, hits)? {
            s.wc_correct += 1;
        }
    }
    Ok(by_id.into_values().collect())
}

/// Drop every assignment of annotators whose gate accuracy over `pool` is
/// below the threshold. `pool` should still contain wrong-gate assignments.
pub fn disqualify_low_accuracy(
    survivors: Vec<Assignment>,
    pool: &[Assignment],
    hits: &HitIndex,
    threshold: Ratio<u32>,
) -> Result<(Vec<Assignment>, BTreeSet<String>, Vec<AnnotatorStats>)> {
    let stats = gate_accuracy(pool, hits)?;
    let out: BTreeSet<String> = stats
        .iter()
        .filter(|s| s.below(threshold))
        .map(|s| s.annotator_id.clone())
        .collect();
    let kept = survivors
        .into_iter()
        .filter(|a| !out.contains(&a.annotator_id))
        .collect();
    Ok((kept, out, stats))
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutlierScan<F> {
    pub kept: Vec<Assignment>,
    pub removed: BTreeSet<String>,
    pub mean: Option<F>,
    pub stdev: Option<F>,
    /// Agreement probability per annotator id.
    pub agreement: BTreeMap<String, F>,
    pub warning: Option<String>,
}

/// Per-annotator probability of matching the four-level majority on the
/// eight emotion questions, majorities taken over `assignments`.
pub fn majority_agreement<F: Scalar>(assignments: &[Assignment], hits: &HitIndex) -> Result<BTreeMap<String, F>> {
    let mut groups: BTreeMap<SenseKey, Vec<usize>> = BTreeMap::new();
    for (i, a) in assignments.iter().enumerate() {
        groups.entry(hits.require(&a.hit_id)?.key()).or_default().push(i);
    }
    let mut tally: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for members in groups.values() {
        for e in Emotion::ALL {
            let votes: Vec<(usize, IntensityLevel)> = members
                .iter()
                .filter_map(|&i| assignments[i].emotions[e].map(|v| (i, v)))
                .collect();
            if votes.is_empty() {
                continue;
            }
            let levels: Vec<IntensityLevel> = votes.iter().map(|&(_, v)| v).collect();
            let winner = majority_intensity(&levels)?.winner;
            for (i, v) in votes {
                let t = tally.entry(assignments[i].annotator_id.as_str()).or_default();
                t.1 += 1;
                if v == winner {
                    t.0 += 1;
                }
            }
        }
    }
    Ok(tally
        .into_iter()
        .filter(|&(_, (_, n))| n > 0)
        .map(|(id, (agree, n))| (id.to_string(), F::from_count(agree) / F::from_count(n)))
        .collect())
}

/// One scoring pass: remove annotators whose agreement probability lies
/// more than `sigma` population standard deviations from the mean.
pub fn remove_outliers<F: Scalar>(assignments: Vec<Assignment>, hits: &HitIndex, sigma: F) -> Result<OutlierScan<F>> {
    let agreement = majority_agreement::<F>(&assignments, hits)?;
    if agreement.len() < 2 {
        return Ok(OutlierScan {
            kept: assignments,
            removed: BTreeSet::new(),
            mean: None,
            stdev: None,
            agreement,
            warning: Some("outlier stage skipped: fewer than two scored annotators".into()),
        });
    }
    let probs: Vec<F> = agreement.values().copied().collect();
    let (mean, sd) = mean_and_population_stdev(&probs).expect("nonempty");
    // Absorb rounding noise so that identical scores never straddle the cut.
    let cut = sigma * sd + F::lit(1e-12);
    let removed: BTreeSet<String> = agreement
        .iter()
        .filter(|&(_, &p)| (p - mean).abs() > cut)
        .map(|(id, _)| id.clone())
        .collect();
    let kept = assignments
        .into_iter()
        .filter(|a| !removed.contains(&a.annotator_id))
        .collect();
    Ok(OutlierScan {
        kept,
        removed,
        mean: Some(mean),
        stdev: Some(sd),
        agreement,
        warning: None,
    })
}

/// Keep only senses with at least `min_valid` assignments.
pub fn build_master_set(assignments: Vec<Assignment>, hits: &HitIndex, min_valid: usize) -> Result<(MasterSet, usize)> {
    let all = MasterSet::group(assignments, hits)?;
    let before = all.assignment_count();
    let groups: Vec<MasterGroup> = all.groups.into_iter().filter(|g| g.len() >= min_valid).collect();
    let master = MasterSet { groups };
    let dropped = before - master.assignment_count();
    Ok((master, dropped))
}

/// Every assignment must resolve to a HIT, and all of them to one framing.
fn single_framing(assignments: &[Assignment], hits: &HitIndex) -> Result<()> {
    let mut seen = None;
    for a in assignments {
        let f = hits.require(&a.hit_id)?.framing;
        match seen {
            None => seen = Some(f),
            Some(g) if g != f => {
                return Err(Error::domain(format!(
                    "assignments mix the {g} and {f} framings; process each framing separately"
                )))
            }
            _ => {}
        }
    }
    Ok(())
}

fn retain_groups_of_size(assignments: Vec<Assignment>, hits: &HitIndex, min_valid: usize) -> Result<Vec<Assignment>> {
    let mut sizes: HashMap<SenseKey, usize> = HashMap::new();
    for a in &assignments {
        *sizes.entry(hits.require(&a.hit_id)?.key()).or_default() += 1;
    }
    let mut kept = Vec::with_capacity(assignments.len());
    for a in assignments {
        if sizes[&hits.require(&a.hit_id)?.key()] >= min_valid {
            kept.push(a);
        }
    }
    Ok(kept)
}

/// Run the whole cascade. Survivors keep their input order.
pub fn run_pipeline(
    assignments: Vec<Assignment>,
    hits: &[Hit],
    cfg: &PipelineConfig,
) -> Result<(MasterSet, AuditReport)> {
    cfg.validate()?;
    let index = HitIndex::new(hits);
    let hits = &index;
    single_framing(&assignments, hits)?;
    let input_total = assignments.len();
    let mut stages = Vec::with_capacity(Stage::ALL.len());
    let mut warnings = Vec::new();

    let before = assignments.clone();
    let (s1, _) = drop_incomplete(assignments);
    stages.push(StageRecord::new(Stage::Incomplete, &before, &s1, hits));

    let (bad, s2, _) = detect_bad_questions(s1.clone(), hits, cfg.bad_question_min_wrong)?;
    let mut rec = StageRecord::new(Stage::BadQuestions, &s1, &s2, hits);
    rec.questions_marked_bad = bad.len();
    stages.push(rec);

    let (s3, _) = drop_wrong_wordchoice(s2.clone(), hits)?;
    stages.push(StageRecord::new(Stage::WrongWordChoice, &s2, &s3, hits));

    let (s4, disqualified, mut annotators) =
        disqualify_low_accuracy(s3.clone(), &s2, hits, cfg.wordchoice_accuracy_threshold)?;
    let mut rec = StageRecord::new(Stage::LowAccuracy, &s3, &s4, hits);
    rec.annotators_disqualified = disqualified.len();
    stages.push(rec);
    let thin = annotators
        .iter()
        .filter(|s| disqualified.contains(&s.annotator_id) && s.wc_attempted < 3)
        .count();
    if thin > 0 {
        warnings.push(format!(
            "{thin} annotator(s) disqualified on fewer than three gate answers; no minimum attempt count is applied"
        ));
    }

    let sigma = cfg.outlier_sigma;
    let mut current = s4.clone();
    let mut outliers: BTreeSet<String> = BTreeSet::new();
    let mut first_scan: Option<OutlierScan<f64>> = None;
    let mut thinned = 0usize;
    let mut rounds = 0usize;
    let mut outlier_drop = 0usize;
    loop {
        let n_in = current.len();
        let scan = remove_outliers(current, hits, sigma)?;
        rounds += 1;
        if let Some(w) = &scan.warning {
            warnings.push(w.clone());
        }
        outlier_drop += n_in - scan.kept.len();
        let removed_now = scan.removed.len();
        outliers.extend(scan.removed.iter().cloned());
        let kept = scan.kept.clone();
        if first_scan.is_none() {
            first_scan = Some(scan);
        }
        if cfg.outlier_mode == OutlierMode::SinglePass {
            current = kept;
            break;
        }
        let size_before = kept.len();
        current = retain_groups_of_size(kept, hits, cfg.min_valid_assignments)?;
        let thinned_now = size_before - current.len();
        thinned += thinned_now;
        if removed_now == 0 && thinned_now == 0 {
            break;
        }
    }
    let s5 = current;
    let mut rec = StageRecord::new(Stage::Outliers, &s4, &s5, hits);
    rec.assignments_dropped = outlier_drop;
    rec.annotators_disqualified = outliers.len();
    stages.push(rec);

    let (master, _) = build_master_set(s5.clone(), hits, cfg.min_valid_assignments)?;
    let survivors: Vec<Assignment> = master.assignments().cloned().collect();
    // Groups thinned inside the outlier loop are charged to this stage.
    let mut rec = StageRecord::new(Stage::MinAssignments, &s5, &survivors, hits);
    rec.assignments_dropped += thinned;
    rec.assignments_in += thinned;
    stages.push(rec);

    let first = first_scan.expect("at least one outlier round");
    for s in &mut annotators {
        s.majority_agreement_prob = first.agreement.get(&s.annotator_id).copied();
    }
    let report = AuditReport {
        input_total,
        output_total: master.assignment_count(),
        stages,
        bad_hits: bad.into_iter().collect(),
        disqualified_annotators: disqualified.into_iter().collect(),
        outlier_annotators: outliers.into_iter().collect(),
        outlier_mean: first.mean,
        outlier_stdev: first.stdev,
        outlier_rounds: rounds,
        master_terms: master.term_count(),
        annotators,
        warnings,
        config: cfg.clone(),
    };
    debug_assert!(report.reconciles());
    Ok((master, report))
}
