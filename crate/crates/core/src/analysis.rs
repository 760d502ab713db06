//! Aggregate statistics over judgements: conflict rates, position win rates,
//! gap-stratified conflict tables, and agreement with human annotations.
//!
//! Every rate is kept as an exact integer fraction and only rendered to a
//! percentage string at the edge; Cohen's kappa is computed in integer
//! arithmetic and exposed as an exact rational alongside the float view.

use std::collections::BTreeMap;

use num_rational::Ratio;
use num_traits::ToPrimitive;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::backend::Judge;
use crate::calibrate::{evaluate_dataset, AuditOutcome, CalibrateError, EvalSettings};
use crate::data::{Question, ResponsePair};
use crate::score::{format_hundredths, MeanScore};
use crate::verdict::{ModelVerdict, OrderedVerdict};

#[derive(Debug, Error)]
pub enum AnalysisError {
    #[error("verdict slices differ in length ({left} vs {right})")]
    LengthMismatch { left: usize, right: usize },
    #[error("no paired verdicts to compare")]
    Empty,
}

/// One human judgement of a question, in model space.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HumanAnnotation {
    pub question_id: String,
    pub annotator_id: String,
    pub verdict: ModelVerdict,
}

/// Majority verdict; anything short of a strict majority is a tie.
pub fn majority_vote(verdicts: &[ModelVerdict]) -> ModelVerdict {
    let mut counts = [0usize; 3];
    for v in verdicts {
        counts[verdict_index(*v)] += 1;
    }
    let best = *counts.iter().max().unwrap_or(&0);
    if best * 2 > verdicts.len() {
        let class = counts.iter().position(|c| *c == best).expect("max exists");
        VERDICTS[class]
    } else {
        ModelVerdict::Tie
    }
}

/// Collapses annotations to one gold verdict per question by majority vote.
pub fn collapse_annotations(annotations: &[HumanAnnotation]) -> BTreeMap<String, ModelVerdict> {
    let mut grouped: BTreeMap<String, Vec<ModelVerdict>> = BTreeMap::new();
    for a in annotations {
        grouped.entry(a.question_id.clone()).or_default().push(a.verdict);
    }
    grouped.into_iter().map(|(id, vs)| (id, majority_vote(&vs))).collect()
}

/// Renders `num / total` as a percentage: integral percentages as integers,
/// exact tenths with one decimal, anything else rounded to the nearest
/// integer percent.
pub fn format_fraction_percent(num: usize, total: usize) -> String {
    if total == 0 {
        return "n/a".to_string();
    }
    let (num, total) = (num as u64, total as u64);
    if (num * 100) % total == 0 {
        return format!("{}%", num * 100 / total);
    }
    if (num * 1000) % total == 0 {
        let tenths = num * 1000 / total;
        return format!("{}.{}%", tenths / 10, tenths % 10);
    }
    format!("{}%", (num * 100 + total / 2) / total)
}

/// Slot-space outcome counts for one presentation order.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct WinningCounts {
    pub slot1: usize,
    pub slot2: usize,
    pub same: usize,
}

impl WinningCounts {
    pub fn add(&mut self, verdict: OrderedVerdict) {
        match verdict {
            OrderedVerdict::Assistant1 => self.slot1 += 1,
            OrderedVerdict::Assistant2 => self.slot2 += 1,
            OrderedVerdict::Same => self.same += 1,
        }
    }

    pub fn total(&self) -> usize {
        self.slot1 + self.slot2 + self.same
    }

    /// How often the first-shown answer won, as a display percentage.
    pub fn slot1_win_percent(&self) -> String {
        format_fraction_percent(self.slot1, self.total())
    }
}

/// One question's cross-order comparison, flattened for tables.
#[derive(Debug, Clone, Serialize)]
pub struct ConflictRow {
    pub question_id: String,
    pub category: String,
    pub verdict_ab: ModelVerdict,
    pub verdict_ba: ModelVerdict,
    pub conflict: bool,
    pub gap: Option<MeanScore>,
}

/// Cross-order consistency of a judge over a dataset.
#[derive(Debug, Clone, Serialize)]
pub struct ConflictReport {
    pub rows: Vec<ConflictRow>,
    /// Questions with verdicts in both orders.
    pub n: usize,
    pub conflicts: usize,
    /// Questions that produced no verdict and were left out.
    pub excluded: usize,
    /// Slot-verdict counts when model A is shown first.
    pub ab_counts: WinningCounts,
    /// Slot-verdict counts when model B is shown first.
    pub ba_counts: WinningCounts,
}

impl ConflictReport {
    pub fn conflict_rate_exact(&self) -> Option<Ratio<i64>> {
        if self.n == 0 {
            None
        } else {
            Some(Ratio::new(self.conflicts as i64, self.n as i64))
        }
    }

    /// E.g. `37 / 80 (46%)`.
    pub fn conflict_summary(&self) -> String {
        format!("{} / {} ({})", self.conflicts, self.n, format_fraction_percent(self.conflicts, self.n))
    }

    /// How many questions model A won when it was shown first.
    ///
    /// Model A occupies slot 1 in the AB order, so this is that order's
    /// slot-1 count; together with [`Self::model_a_wins_shown_second`] it
    /// fills the winning-rate-per-position table.
    pub fn model_a_wins_shown_first(&self) -> usize {
        self.ab_counts.slot1
    }

    /// How many questions model A won when it was shown second (slot 2 of
    /// the BA order).
    pub fn model_a_wins_shown_second(&self) -> usize {
        self.ba_counts.slot2
    }

    pub fn model_a_first_percent(&self) -> String {
        format_fraction_percent(self.model_a_wins_shown_first(), self.n)
    }

    pub fn model_a_second_percent(&self) -> String {
        format_fraction_percent(self.model_a_wins_shown_second(), self.n)
    }
}

/// Builds the conflict report from per-question audit outcomes.
pub fn conflict_report(outcomes: &[AuditOutcome]) -> ConflictReport {
    let mut report = ConflictReport {
        rows: Vec::new(),
        n: 0,
        conflicts: 0,
        excluded: 0,
        ab_counts: WinningCounts::default(),
        ba_counts: WinningCounts::default(),
    };
    for outcome in outcomes {
        match outcome.record() {
            Some(record) => {
                report.n += 1;
                if record.conflict {
                    report.conflicts += 1;
                }
                report.ab_counts.add(record.ab.slot_verdict);
                report.ba_counts.add(record.ba.slot_verdict);
                report.rows.push(ConflictRow {
                    question_id: record.question_id.clone(),
                    category: record.category.clone(),
                    verdict_ab: record.ab.model_verdict,
                    verdict_ba: record.ba.model_verdict,
                    conflict: record.conflict,
                    gap: record.gap,
                });
            }
            None => report.excluded += 1,
        }
    }
    report
}

/// One bucket of the gap-stratified conflict table.
#[derive(Debug, Clone, Serialize)]
pub struct GapBin {
    pub label: String,
    pub total: usize,
    pub conflicts: usize,
}

impl GapBin {
    pub fn conflict_rate_exact(&self) -> Option<Ratio<i64>> {
        if self.total == 0 {
            None
        } else {
            Some(Ratio::new(self.conflicts as i64, self.total as i64))
        }
    }

    /// Display rate; `None` for an empty bucket.
    pub fn conflict_rate_percent(&self) -> Option<String> {
        if self.total == 0 {
            None
        } else {
            Some(format_fraction_percent(self.conflicts, self.total))
        }
    }
}

/// Gap-stratified conflict table.
#[derive(Debug, Clone, Serialize)]
pub struct GapBinTable {
    pub bins: Vec<GapBin>,
}

impl GapBinTable {
    /// True when every adjacent pair of non-empty bins has a strictly
    /// decreasing conflict rate (compared exactly).
    pub fn rates_strictly_decreasing(&self) -> bool {
        let rates: Vec<Ratio<i64>> = self.bins.iter().filter_map(|b| b.conflict_rate_exact()).collect();
        rates.windows(2).all(|w| w[0] > w[1])
    }
}

/// Buckets (gap, conflict) pairs by gap with inclusive upper edges.
///
/// `edges_hundredths` must be strictly increasing; edges `[100, 200]` give
/// buckets `gap <= 1`, `1 < gap <= 2`, and `gap > 2`. Comparisons are exact.
pub fn gap_bins(pairs: &[(MeanScore, bool)], edges_hundredths: &[i64]) -> GapBinTable {
    assert!(
        edges_hundredths.windows(2).all(|w| w[0] < w[1]),
        "bin edges must be strictly increasing"
    );
    let mut bins: Vec<GapBin> = Vec::with_capacity(edges_hundredths.len() + 1);
    for (i, edge) in edges_hundredths.iter().enumerate() {
        let label = if i == 0 {
            format!("gap <= {}", format_hundredths(*edge))
        } else {
            format!(
                "{} < gap <= {}",
                format_hundredths(edges_hundredths[i - 1]),
                format_hundredths(*edge)
            )
        };
        bins.push(GapBin { label, total: 0, conflicts: 0 });
    }
    let last_label = match edges_hundredths.last() {
        Some(edge) => format!("gap > {}", format_hundredths(*edge)),
        None => "all".to_string(),
    };
    bins.push(GapBin { label: last_label, total: 0, conflicts: 0 });

    for (gap, conflict) in pairs {
        let slot = edges_hundredths
            .iter()
            .position(|edge| gap.ratio() <= Ratio::new(*edge, 100))
            .unwrap_or(edges_hundredths.len());
        bins[slot].total += 1;
        if *conflict {
            bins[slot].conflicts += 1;
        }
    }
    GapBinTable { bins }
}

const VERDICTS: [ModelVerdict; 3] = [ModelVerdict::ModelAWins, ModelVerdict::ModelBWins, ModelVerdict::Tie];

fn verdict_index(v: ModelVerdict) -> usize {
    match v {
        ModelVerdict::ModelAWins => 0,
        ModelVerdict::ModelBWins => 1,
        ModelVerdict::Tie => 2,
    }
}

/// Agreement between a judging method and gold verdicts.
#[derive(Debug, Clone, Serialize)]
pub struct AgreementStats {
    pub n: usize,
    pub matches: usize,
    /// `confusion[m][g]`: method said `m`, gold said `g` (A-wins, B-wins, tie).
    pub confusion: [[usize; 3]; 3],
    pub accuracy: f64,
    pub kappa: f64,
    /// Chance agreement is 1; kappa is pinned rather than divided by zero.
    pub degenerate_marginals: bool,
}

impl AgreementStats {
    pub fn accuracy_exact(&self) -> Ratio<i64> {
        Ratio::new(self.matches as i64, self.n as i64)
    }

    /// Cohen's kappa as the exact fraction
    /// `(n * matches - sum_c m_c * g_c) / (n^2 - sum_c m_c * g_c)`.
    pub fn kappa_exact(&self) -> Ratio<i64> {
        let n = self.n as i64;
        let chance: i64 = (0..3)
            .map(|c| {
                let m: usize = self.confusion[c].iter().sum();
                let g: usize = (0..3).map(|r| self.confusion[r][c]).sum();
                m as i64 * g as i64
            })
            .sum();
        let denom = n * n - chance;
        if denom == 0 {
            // Both marginals sit on one class: agreement is total or absent.
            return if self.matches == self.n { Ratio::from_integer(1) } else { Ratio::from_integer(0) };
        }
        Ratio::new(n * self.matches as i64 - chance, denom)
    }
}

/// Compares method verdicts against gold, pairwise by position.
pub fn agreement(method: &[ModelVerdict], gold: &[ModelVerdict]) -> Result<AgreementStats, AnalysisError> {
    if method.len() != gold.len() {
        return Err(AnalysisError::LengthMismatch { left: method.len(), right: gold.len() });
    }
    if method.is_empty() {
        return Err(AnalysisError::Empty);
    }
    let mut confusion = [[0usize; 3]; 3];
    let mut matches = 0usize;
    for (m, g) in method.iter().zip(gold) {
        confusion[verdict_index(*m)][verdict_index(*g)] += 1;
        if m == g {
            matches += 1;
        }
    }
    let n = method.len();
    let chance: i64 = (0..3)
        .map(|c| {
            let m: usize = confusion[c].iter().sum();
            let g: usize = (0..3).map(|r| confusion[r][c]).sum();
            m as i64 * g as i64
        })
        .sum();
    let degenerate = (n as i64) * (n as i64) == chance;
    let mut stats = AgreementStats {
        n,
        matches,
        confusion,
        accuracy: 0.0,
        kappa: 0.0,
        degenerate_marginals: degenerate,
    };
    stats.accuracy = stats.accuracy_exact().to_f64().unwrap_or(0.0);
    stats.kappa = stats.kappa_exact().to_f64().unwrap_or(0.0);
    Ok(stats)
}

/// Agreement per question category, with categories sorted.
pub fn category_breakdown(
    rows: &[(String, ModelVerdict, ModelVerdict)],
) -> BTreeMap<String, AgreementStats> {
    let mut grouped: BTreeMap<String, (Vec<ModelVerdict>, Vec<ModelVerdict>)> = BTreeMap::new();
    for (category, method, gold) in rows {
        let entry = grouped.entry(category.clone()).or_default();
        entry.0.push(*method);
        entry.1.push(*gold);
    }
    grouped
        .into_iter()
        .map(|(category, (m, g))| {
            let stats = agreement(&m, &g).expect("groups are non-empty and aligned");
            (category, stats)
        })
        .collect()
}

/// Agreement of one evaluation run at one chain count.
#[derive(Debug, Clone, Serialize)]
pub struct KSweepRow {
    pub k: u32,
    pub stats: AgreementStats,
    /// Questions that produced no verdict at this k.
    pub dropped_questions: usize,
    /// Completed questions with no gold verdict to compare against.
    pub unmatched: usize,
}

/// Re-evaluates the dataset at each chain count and scores it against gold.
///
/// Chain sampling is deterministic per (question, order, sample index), so
/// larger k reuse the smaller k's chains as a prefix; the sweep isolates the
/// effect of averaging more evidence.
pub fn k_sweep(
    judge: &dyn Judge,
    base: &EvalSettings,
    items: &[(Question, ResponsePair)],
    gold: &BTreeMap<String, ModelVerdict>,
    ks: &[u32],
) -> Result<Vec<KSweepRow>, CalibrateError> {
    let mut rows = Vec::with_capacity(ks.len());
    for &k in ks {
        let settings = base.clone().with_k(k);
        settings.validate()?;
        let records = evaluate_dataset(judge, &settings, items)?;
        let mut method = Vec::new();
        let mut truth = Vec::new();
        let mut dropped = 0usize;
        let mut unmatched = 0usize;
        for record in &records {
            match record.result() {
                Some(result) => match gold.get(&record.question_id) {
                    Some(g) => {
                        method.push(result.verdict);
                        truth.push(*g);
                    }
                    None => unmatched += 1,
                },
                None => dropped += 1,
            }
        }
        let stats = agreement(&method, &truth).map_err(|e| {
            CalibrateError::InvalidSettings(format!("k = {k}: {e}"))
        })?;
        rows.push(KSweepRow { k, stats, dropped_questions: dropped, unmatched });
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::calibrate::{BiasAuditRecord, OrderOutcome};
    use crate::verdict::PresentationOrder;

    fn outcome(ab: ModelVerdict, ba: ModelVerdict, gap_hundredths: Option<i64>) -> AuditOutcome {
        let slot = |v: ModelVerdict, order: PresentationOrder| match (v, order) {
            (ModelVerdict::Tie, _) => OrderedVerdict::Same,
            (ModelVerdict::ModelAWins, PresentationOrder::Ab) => OrderedVerdict::Assistant1,
            (ModelVerdict::ModelBWins, PresentationOrder::Ab) => OrderedVerdict::Assistant2,
            (ModelVerdict::ModelAWins, PresentationOrder::Ba) => OrderedVerdict::Assistant2,
            (ModelVerdict::ModelBWins, PresentationOrder::Ba) => OrderedVerdict::Assistant1,
        };
        AuditOutcome::Completed {
            record: BiasAuditRecord {
                question_id: "q".to_string(),
                category: "generic".to_string(),
                model_a: "model-a".to_string(),
                model_b: "model-b".to_string(),
                ab: OrderOutcome {
                    order: PresentationOrder::Ab,
                    slot_verdict: slot(ab, PresentationOrder::Ab),
                    model_verdict: ab,
                    mean_slot1: None,
                    mean_slot2: None,
                },
                ba: OrderOutcome {
                    order: PresentationOrder::Ba,
                    slot_verdict: slot(ba, PresentationOrder::Ba),
                    model_verdict: ba,
                    mean_slot1: None,
                    mean_slot2: None,
                },
                conflict: ab != ba,
                gap: gap_hundredths.map(|h| MeanScore::from_ratio(Ratio::new(h, 100))),
            },
        }
    }

    #[test]
    fn conflict_report_counts_all_nine_verdict_pairs() {
        // Enumerating every (ab, ba) pair: exactly the six off-diagonal
        // combinations are conflicts.
        let outcomes: Vec<AuditOutcome> = VERDICTS
            .iter()
            .flat_map(|a| VERDICTS.iter().map(move |b| outcome(*a, *b, None)))
            .collect();
        let report = conflict_report(&outcomes);
        assert_eq!(report.n, 9);
        assert_eq!(report.conflicts, 6);
        assert_eq!(report.excluded, 0);
        assert_eq!(report.conflict_summary(), "6 / 9 (67%)");
        // Each order saw three slot-1 wins, three slot-2 wins, three sames.
        assert_eq!(report.ab_counts, WinningCounts { slot1: 3, slot2: 3, same: 3 });
        assert_eq!(report.ba_counts, WinningCounts { slot1: 3, slot2: 3, same: 3 });
        // Model A won three of nine in either position.
        assert_eq!(report.model_a_wins_shown_first(), 3);
        assert_eq!(report.model_a_wins_shown_second(), 3);
        assert_eq!(report.model_a_first_percent(), "33%");
    }

    #[test]
    fn percent_formatting_keeps_exact_tenths_and_rounds_the_rest() {
        assert_eq!(format_fraction_percent(37, 80), "46%");
        assert_eq!(format_fraction_percent(66, 80), "82.5%");
        assert_eq!(format_fraction_percent(4, 80), "5%");
        assert_eq!(format_fraction_percent(2, 80), "2.5%");
        assert_eq!(format_fraction_percent(1, 3), "33%");
        assert_eq!(format_fraction_percent(2, 3), "67%");
        assert_eq!(format_fraction_percent(0, 7), "0%");
        assert_eq!(format_fraction_percent(7, 7), "100%");
        // An exact half percent always has one decimal, so the rounding
        // branch never faces a .5 boundary.
        assert_eq!(format_fraction_percent(1, 8), "12.5%");
        assert_eq!(format_fraction_percent(1, 7), "14%");
        assert_eq!(format_fraction_percent(5, 7), "71%");
        assert_eq!(format_fraction_percent(0, 0), "n/a");
    }

    #[test]
    fn conflict_summary_matches_the_pinned_shape() {
        let mut outcomes = Vec::new();
        for i in 0..80 {
            let (ab, ba) = if i < 37 {
                (ModelVerdict::ModelAWins, ModelVerdict::ModelBWins)
            } else {
                (ModelVerdict::ModelAWins, ModelVerdict::ModelAWins)
            };
            outcomes.push(outcome(ab, ba, None));
        }
        assert_eq!(conflict_report(&outcomes).conflict_summary(), "37 / 80 (46%)");
    }

    #[test]
    fn gap_bins_use_inclusive_upper_edges() {
        let gap = |h: i64| MeanScore::from_ratio(Ratio::new(h, 100));
        let pairs = vec![
            (gap(50), true),
            (gap(100), true),  // on the first edge: belongs to the first bin
            (gap(150), true),
            (gap(200), false), // on the second edge: second bin
            (gap(300), false),
        ];
        let table = gap_bins(&pairs, &[100, 200]);
        assert_eq!(table.bins[0].label, "gap <= 1");
        assert_eq!(table.bins[1].label, "1 < gap <= 2");
        assert_eq!(table.bins[2].label, "gap > 2");
        assert_eq!(table.bins[0].total, 2);
        assert_eq!(table.bins[1].total, 2);
        assert_eq!(table.bins[2].total, 1);
        assert_eq!(table.bins[0].conflict_rate_percent().unwrap(), "100%");
        assert_eq!(table.bins[1].conflict_rate_percent().unwrap(), "50%");
        assert_eq!(table.bins[2].conflict_rate_percent().unwrap(), "0%");
        assert!(table.rates_strictly_decreasing());

        let empty = gap_bins(&[], &[100]);
        assert_eq!(empty.bins[0].conflict_rate_percent(), None);
    }

    #[test]
    fn majority_vote_needs_a_strict_majority() {
        use ModelVerdict::*;
        assert_eq!(majority_vote(&[ModelAWins, ModelAWins, ModelBWins]), ModelAWins);
        assert_eq!(majority_vote(&[ModelAWins, ModelBWins, Tie]), Tie);
        assert_eq!(majority_vote(&[ModelAWins, ModelAWins, ModelBWins, ModelBWins]), Tie);
        assert_eq!(majority_vote(&[Tie, Tie, ModelBWins]), Tie);
        assert_eq!(majority_vote(&[ModelBWins]), ModelBWins);
        assert_eq!(majority_vote(&[]), Tie);
    }

    #[test]
    fn kappa_matches_the_hand_computed_fixture() {
        use ModelVerdict::*;
        // n = 4, 3 matches, chance mass 5: kappa = (12 - 5) / (16 - 5).
        let method = [ModelAWins, ModelAWins, ModelBWins, Tie];
        let gold = [ModelAWins, ModelBWins, ModelBWins, Tie];
        let stats = agreement(&method, &gold).unwrap();
        assert_eq!(stats.kappa_exact(), Ratio::new(7, 11));
        assert_eq!(stats.accuracy_exact(), Ratio::new(3, 4));
        assert!(!stats.degenerate_marginals);
        assert!((stats.kappa - 7.0 / 11.0).abs() < 1e-12);
    }

    #[test]
    fn kappa_agrees_with_the_float_definition() {
        use ModelVerdict::*;
        let cases: &[(&[ModelVerdict], &[ModelVerdict])] = &[
            (&[ModelAWins, ModelBWins, Tie, Tie, ModelAWins], &[ModelAWins, ModelAWins, Tie, ModelBWins, ModelAWins]),
            (&[Tie, Tie, Tie, ModelAWins], &[Tie, ModelAWins, Tie, ModelAWins]),
            (&[ModelAWins, ModelBWins], &[ModelBWins, ModelAWins]),
        ];
        for (method, gold) in cases {
            let stats = agreement(method, gold).unwrap();
            let n = stats.n as f64;
            let po = stats.matches as f64 / n;
            let mut pe = 0.0;
            for c in 0..3 {
                let m: usize = stats.confusion[c].iter().sum();
                let g: usize = (0..3).map(|r| stats.confusion[r][c]).sum();
                pe += (m as f64 / n) * (g as f64 / n);
            }
            let expected = (po - pe) / (1.0 - pe);
            assert!((stats.kappa - expected).abs() < 1e-12, "kappa mismatch: {} vs {expected}", stats.kappa);
        }
    }

    #[test]
    fn degenerate_marginals_pin_kappa_instead_of_dividing_by_zero() {
        use ModelVerdict::*;
        let stats = agreement(&[ModelAWins, ModelAWins], &[ModelAWins, ModelAWins]).unwrap();
        assert!(stats.degenerate_marginals);
        assert_eq!(stats.kappa_exact(), Ratio::from_integer(1));
        // Point marginals on different classes are not degenerate.
        let stats = agreement(&[ModelAWins, ModelAWins], &[ModelBWins, ModelBWins]).unwrap();
        assert!(!stats.degenerate_marginals);
        assert_eq!(stats.kappa_exact(), Ratio::from_integer(0));
    }

    #[test]
    fn kappa_never_exceeds_one() {
        use ModelVerdict::*;
        let vocab = [ModelAWins, ModelBWins, Tie];
        // Exhaust all verdict pairs of length 3 (729 combinations).
        for idx in 0..729usize {
            let mut m = Vec::new();
            let mut g = Vec::new();
            let mut rest = idx;
            for _ in 0..3 {
                m.push(vocab[rest % 3]);
                rest /= 3;
                g.push(vocab[rest % 3]);
                rest /= 3;
            }
            let stats = agreement(&m, &g).unwrap();
            assert!(stats.kappa <= 1.0 + 1e-12);
            let exact = stats.kappa_exact();
            assert!(exact <= Ratio::from_integer(1));
        }
    }

    #[test]
    fn category_breakdown_groups_and_sorts() {
        use ModelVerdict::*;
        let rows = vec![
            ("writing".to_string(), ModelAWins, ModelAWins),
            ("coding".to_string(), ModelBWins, ModelAWins),
            ("writing".to_string(), Tie, Tie),
            ("coding".to_string(), ModelAWins, ModelAWins),
        ];
        let breakdown = category_breakdown(&rows);
        let keys: Vec<&String> = breakdown.keys().collect();
        assert_eq!(keys, ["coding", "writing"]);
        assert_eq!(breakdown["coding"].matches, 1);
        assert_eq!(breakdown["writing"].matches, 2);
    }

    #[test]
    fn annotations_collapse_by_majority() {
        use ModelVerdict::*;
        let ann = |q: &str, a: &str, v: ModelVerdict| HumanAnnotation {
            question_id: q.to_string(),
            annotator_id: a.to_string(),
            verdict: v,
        };
        let gold = collapse_annotations(&[
            ann("q1", "h1", ModelAWins),
            ann("q1", "h2", ModelAWins),
            ann("q1", "h3", ModelBWins),
            ann("q2", "h1", ModelAWins),
            ann("q2", "h2", ModelBWins),
            ann("q2", "h3", Tie),
        ]);
        assert_eq!(gold["q1"], ModelAWins);
        assert_eq!(gold["q2"], Tie);
    }
}
