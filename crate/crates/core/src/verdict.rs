//! Verdict algebra: slot-space outcomes, model-space outcomes, and the
//! order-aware mapping between them.
//!
//! A judge sees two anonymous slots ("Assistant 1" / "Assistant 2"); which
//! model occupies which slot is the presentation order. Keeping the two
//! spaces as distinct types makes it impossible to compare verdicts from
//! different orders without going through the mapping.

use serde::{Deserialize, Serialize};

use crate::score::{MeanScore, ScorePair};

/// Which model occupies slot 1: `Ab` puts model A first, `Ba` model B first.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PresentationOrder {
    Ab,
    Ba,
}

impl PresentationOrder {
    pub fn flipped(self) -> Self {
        match self {
            PresentationOrder::Ab => PresentationOrder::Ba,
            PresentationOrder::Ba => PresentationOrder::Ab,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            PresentationOrder::Ab => "ab",
            PresentationOrder::Ba => "ba",
        }
    }
}

impl std::fmt::Display for PresentationOrder {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// A verdict in slot space, as the judge emits it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OrderedVerdict {
    Assistant1,
    Assistant2,
    Same,
}

/// A verdict in model space, comparable across presentation orders.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ModelVerdict {
    #[serde(rename = "model_a")]
    ModelAWins,
    #[serde(rename = "model_b")]
    ModelBWins,
    #[serde(rename = "tie")]
    Tie,
}

impl ModelVerdict {
    /// Swaps the model labels; `Tie` is a fixed point.
    pub fn relabeled(self) -> Self {
        match self {
            ModelVerdict::ModelAWins => ModelVerdict::ModelBWins,
            ModelVerdict::ModelBWins => ModelVerdict::ModelAWins,
            ModelVerdict::Tie => ModelVerdict::Tie,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelVerdict::ModelAWins => "model_a",
            ModelVerdict::ModelBWins => "model_b",
            ModelVerdict::Tie => "tie",
        }
    }
}

impl std::fmt::Display for ModelVerdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Maps a slot-space verdict into model space given the presentation order.
pub fn to_model_verdict(verdict: OrderedVerdict, order: PresentationOrder) -> ModelVerdict {
    match (verdict, order) {
        (OrderedVerdict::Same, _) => ModelVerdict::Tie,
        (OrderedVerdict::Assistant1, PresentationOrder::Ab) => ModelVerdict::ModelAWins,
        (OrderedVerdict::Assistant2, PresentationOrder::Ab) => ModelVerdict::ModelBWins,
        (OrderedVerdict::Assistant1, PresentationOrder::Ba) => ModelVerdict::ModelBWins,
        (OrderedVerdict::Assistant2, PresentationOrder::Ba) => ModelVerdict::ModelAWins,
    }
}

/// Derives the model-space verdict from one judgement's slot scores.
///
/// Scores within `tie_epsilon_hundredths` of each other count as a tie;
/// the comparison is exact integer arithmetic on hundredths.
pub fn verdict_from_scores(
    scores: &ScorePair,
    order: PresentationOrder,
    tie_epsilon_hundredths: i64,
) -> ModelVerdict {
    let s1 = scores.assistant1.hundredths();
    let s2 = scores.assistant2.hundredths();
    let slot = if (s1 - s2).abs() <= tie_epsilon_hundredths {
        OrderedVerdict::Same
    } else if s1 > s2 {
        OrderedVerdict::Assistant1
    } else {
        OrderedVerdict::Assistant2
    };
    to_model_verdict(slot, order)
}

/// Compares two model-space mean scores with an exact epsilon tie band.
pub fn verdict_from_mean_scores(
    score_a: MeanScore,
    score_b: MeanScore,
    tie_epsilon_hundredths: i64,
) -> ModelVerdict {
    if score_a.within_epsilon(score_b, tie_epsilon_hundredths) {
        ModelVerdict::Tie
    } else if score_a > score_b {
        ModelVerdict::ModelAWins
    } else {
        ModelVerdict::ModelBWins
    }
}
