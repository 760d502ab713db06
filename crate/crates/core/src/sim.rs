//! Synthetic datasets with known latent quality, for exercising the judging
//! pipeline end to end and for measuring calibration against ground truth.
//!
//! Each generated question gets its own pair of model names, so one run can
//! stratify quality gaps freely without forcing a global quality per model.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;

use crate::backend::SyntheticJudgeSpec;
use crate::data::{Question, ResponsePair};
use crate::score::Score;
use crate::verdict::ModelVerdict;

/// Question categories cycled across generated datasets.
pub const CATEGORIES: [&str; 9] = [
    "generic",
    "knowledge",
    "roleplay",
    "common-sense",
    "fermi",
    "counterfactual",
    "coding",
    "math",
    "writing",
];

/// A generated dataset plus the latent qualities behind it.
#[derive(Debug, Clone)]
pub struct SimDataset {
    pub items: Vec<(Question, ResponsePair)>,
    /// Latent quality per model name, in score hundredths.
    pub qualities: BTreeMap<String, Score>,
}

impl SimDataset {
    /// A judge spec seeded with this dataset's latent qualities.
    pub fn judge_spec(&self, bias_hundredths: i64, noise_stddev_hundredths: i64, seed: u64) -> SyntheticJudgeSpec {
        SyntheticJudgeSpec {
            base_quality: self.qualities.clone(),
            position_bias_hundredths: bias_hundredths,
            noise_stddev_hundredths,
            seed,
        }
    }

    /// Ground-truth verdict per question from the latent qualities.
    pub fn latent_verdicts(&self, tie_epsilon_hundredths: i64) -> BTreeMap<String, ModelVerdict> {
        self.items
            .iter()
            .map(|(q, p)| {
                let qa = self.qualities[&p.model_a].hundredths();
                let qb = self.qualities[&p.model_b].hundredths();
                let verdict = if (qa - qb).abs() <= tie_epsilon_hundredths {
                    ModelVerdict::Tie
                } else if qa > qb {
                    ModelVerdict::ModelAWins
                } else {
                    ModelVerdict::ModelBWins
                };
                (q.id.clone(), verdict)
            })
            .collect()
    }

    /// Signed latent gap (model A minus model B) per question, in hundredths.
    pub fn latent_gaps(&self) -> BTreeMap<String, i64> {
        self.items
            .iter()
            .map(|(q, p)| {
                let qa = self.qualities[&p.model_a].hundredths();
                let qb = self.qualities[&p.model_b].hundredths();
                (q.id.clone(), qa - qb)
            })
            .collect()
    }
}

fn build_item(index: usize, qa: Score, qb: Score, qualities: &mut BTreeMap<String, Score>) -> (Question, ResponsePair) {
    let id = format!("sim-{index:05}");
    let category = CATEGORIES[index % CATEGORIES.len()];
    let model_a = format!("{id}-left");
    let model_b = format!("{id}-right");
    let question = Question::new(
        &id,
        category,
        format!("Synthetic prompt {index}: weigh the two {category} answers below."),
    )
    .expect("generated question is well-formed");
    let pair = ResponsePair::new(
        &id,
        &model_a,
        format!("Answer one for prompt {index}."),
        &model_b,
        format!("Answer two for prompt {index}."),
    )
    .expect("generated pair is well-formed");
    qualities.insert(model_a, qa);
    qualities.insert(model_b, qb);
    (question, pair)
}

/// `n` questions with both qualities drawn uniformly from
/// `[range.0, range.1]` hundredths, independently.
pub fn uniform_pairs(seed: u64, n: usize, range: (i64, i64)) -> SimDataset {
    assert!(range.0 <= range.1, "empty quality range");
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut qualities = BTreeMap::new();
    let items = (0..n)
        .map(|i| {
            let qa = Score::clamping_hundredths(rng.gen_range(range.0..=range.1));
            let qb = Score::clamping_hundredths(rng.gen_range(range.0..=range.1));
            build_item(i, qa, qb, &mut qualities)
        })
        .collect();
    SimDataset { items, qualities }
}

/// `n` questions whose signed quality gaps (A minus B) cycle through
/// `gaps_hundredths`; the weaker-side quality is drawn uniformly so both
/// qualities stay inside `[range.0, range.1]`.
pub fn gap_stratified_pairs(seed: u64, n: usize, gaps_hundredths: &[i64], range: (i64, i64)) -> SimDataset {
    assert!(!gaps_hundredths.is_empty(), "need at least one gap");
    assert!(range.0 <= range.1, "empty quality range");
    let span = range.1 - range.0;
    assert!(
        gaps_hundredths.iter().all(|g| g.abs() <= span),
        "a gap exceeds the quality range"
    );
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    let mut qualities = BTreeMap::new();
    let items = (0..n)
        .map(|i| {
            let gap = gaps_hundredths[i % gaps_hundredths.len()];
            let qb = rng.gen_range(range.0 + (-gap).max(0)..=range.1 - gap.max(0));
            let qa = qb + gap;
            build_item(
                i,
                Score::clamping_hundredths(qa),
                Score::clamping_hundredths(qb),
                &mut qualities,
            )
        })
        .collect();
    SimDataset { items, qualities }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generation_is_deterministic_per_seed() {
        let a = uniform_pairs(9, 20, (100, 1000));
        let b = uniform_pairs(9, 20, (100, 1000));
        assert_eq!(a.qualities, b.qualities);
        assert_eq!(a.items.len(), 20);
        let c = uniform_pairs(10, 20, (100, 1000));
        assert_ne!(a.qualities, c.qualities);
    }

    #[test]
    fn qualities_stay_inside_the_requested_range() {
        let ds = uniform_pairs(3, 50, (250, 750));
        for q in ds.qualities.values() {
            assert!((250..=750).contains(&q.hundredths()));
        }
    }

    #[test]
    fn gaps_cycle_and_are_exact() {
        let gaps = [-150, 0, 40];
        let ds = gap_stratified_pairs(7, 9, &gaps, (200, 900));
        let latent = ds.latent_gaps();
        for (i, (q, _)) in ds.items.iter().enumerate() {
            assert_eq!(latent[&q.id], gaps[i % gaps.len()]);
        }
        for q in ds.qualities.values() {
            assert!((200..=900).contains(&q.hundredths()));
        }
    }

    #[test]
    fn latent_verdicts_respect_the_tie_band() {
        let ds = gap_stratified_pairs(1, 3, &[50, 0, -50], (300, 800));
        let strict = ds.latent_verdicts(0);
        let loose = ds.latent_verdicts(50);
        let ids: Vec<&String> = ds.items.iter().map(|(q, _)| &q.id).collect();
        assert_eq!(strict[ids[0]], ModelVerdict::ModelAWins);
        assert_eq!(strict[ids[1]], ModelVerdict::Tie);
        assert_eq!(strict[ids[2]], ModelVerdict::ModelBWins);
        assert_eq!(loose[ids[0]], ModelVerdict::Tie);
        assert_eq!(loose[ids[2]], ModelVerdict::Tie);
    }

    #[test]
    fn model_names_are_unique_per_question() {
        let ds = uniform_pairs(5, 30, (100, 1000));
        assert_eq!(ds.qualities.len(), 60);
        for (q, p) in &ds.items {
            assert_ne!(p.model_a, p.model_b);
            assert_eq!(p.question_id, q.id);
        }
    }

    #[test]
    fn categories_cycle_through_the_full_list() {
        let ds = uniform_pairs(2, CATEGORIES.len() * 2, (100, 1000));
        for (i, (q, _)) in ds.items.iter().enumerate() {
            assert_eq!(q.category, CATEGORIES[i % CATEGORIES.len()]);
        }
    }
}
