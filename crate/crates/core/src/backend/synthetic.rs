//! Synthetic judge with controllable position bias and noise.
//!
//! Each model has a latent quality score. The judge rates the answer shown
//! first at `quality + bias + noise` and the answer shown second at
//! `quality + noise`, clamps both to the score range, and formats the result
//! in the canonical output shape of the requested template. A positive bias
//! therefore favors whichever model is presented first, which is exactly the
//! failure mode the calibration strategies exist to cancel.
//!
//! All randomness derives from a per-draw seed hashed from (judge seed,
//! question, presentation order, sample index, slot), so completions are a
//! pure function of the request and runs replay bit-for-bit.

use std::collections::BTreeMap;

use chrono::Utc;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};
use sha2::{Digest, Sha256};

use super::{BackendError, CompletionSource, Judge, JudgeCompletion, JudgeRequest};
use crate::parse::{format_direct_compare, format_evidence_first, format_score_first};
use crate::score::{Score, ScorePair};
use crate::templates::TemplateKind;
use crate::verdict::{OrderedVerdict, PresentationOrder};

/// Parameters of the synthetic judge.
#[derive(Debug, Clone)]
pub struct SyntheticJudgeSpec {
    /// Latent quality per model name; every model under evaluation must appear.
    pub base_quality: BTreeMap<String, Score>,
    /// Added to the first-presented answer's score, in hundredths of a point.
    /// Positive favors slot 1, negative favors slot 2.
    pub position_bias_hundredths: i64,
    /// Standard deviation of per-slot Gaussian noise, in hundredths.
    pub noise_stddev_hundredths: i64,
    pub seed: u64,
}

impl SyntheticJudgeSpec {
    pub fn new(seed: u64) -> Self {
        SyntheticJudgeSpec {
            base_quality: BTreeMap::new(),
            position_bias_hundredths: 0,
            noise_stddev_hundredths: 0,
            seed,
        }
    }

    pub fn with_quality(mut self, model: &str, score: Score) -> Self {
        self.base_quality.insert(model.to_string(), score);
        self
    }
}

/// A deterministic judge for experiments and tests.
pub struct SyntheticJudge {
    spec: SyntheticJudgeSpec,
}

impl SyntheticJudge {
    pub fn new(spec: SyntheticJudgeSpec) -> Self {
        SyntheticJudge { spec }
    }

    pub fn spec(&self) -> &SyntheticJudgeSpec {
        &self.spec
    }

    fn quality(&self, model: &str) -> Result<Score, BackendError> {
        self.spec.base_quality.get(model).copied().ok_or_else(|| {
            BackendError::InvalidRequest(format!("synthetic judge has no quality for model {model:?}"))
        })
    }

    /// Noise for one slot of one request, quantized to hundredths.
    fn noise_hundredths(&self, request: &JudgeRequest, slot: u8) -> i64 {
        if self.spec.noise_stddev_hundredths == 0 {
            return 0;
        }
        let mut h = Sha256::new();
        h.update(b"pairjudge.synthetic.v1\0");
        h.update(self.spec.seed.to_le_bytes());
        let qid = request.prompt.question_id.as_bytes();
        h.update((qid.len() as u64).to_le_bytes());
        h.update(qid);
        h.update([match request.prompt.order {
            PresentationOrder::Ab => 0u8,
            PresentationOrder::Ba => 1u8,
        }]);
        h.update(request.sample_index.to_le_bytes());
        h.update([slot]);
        let mut rng = ChaCha12Rng::from_seed(h.finalize().into());
        let normal = Normal::new(0.0, self.spec.noise_stddev_hundredths as f64)
            .expect("stddev is non-negative");
        normal.sample(&mut rng).round() as i64
    }

    fn slot_scores(&self, request: &JudgeRequest) -> Result<ScorePair, BackendError> {
        let q1 = self.quality(&request.prompt.slot_models[0])?;
        let q2 = self.quality(&request.prompt.slot_models[1])?;
        let s1 = Score::clamping_hundredths(
            q1.hundredths() + self.spec.position_bias_hundredths + self.noise_hundredths(request, 1),
        );
        let s2 = Score::clamping_hundredths(q2.hundredths() + self.noise_hundredths(request, 2));
        Ok(ScorePair::new(s1, s2))
    }
}

impl Judge for SyntheticJudge {
    fn complete(&self, request: &JudgeRequest) -> Result<JudgeCompletion, BackendError> {
        let scores = self.slot_scores(request)?;
        let evidence = format!(
            "Assistant 1's answer merits {} and Assistant 2's answer merits {} \
             after weighing helpfulness, relevance, accuracy, and level of detail.",
            scores.assistant1, scores.assistant2
        );
        let raw = match request.prompt.kind {
            TemplateKind::ScoreFirst => format_score_first(&scores, &evidence),
            TemplateKind::EvidenceFirst => format_evidence_first(&scores, &evidence),
            TemplateKind::DirectCompare => {
                let verdict = match scores.assistant1.cmp(&scores.assistant2) {
                    std::cmp::Ordering::Greater => OrderedVerdict::Assistant1,
                    std::cmp::Ordering::Less => OrderedVerdict::Assistant2,
                    std::cmp::Ordering::Equal => OrderedVerdict::Same,
                };
                format_direct_compare(verdict, &evidence)
            }
        };
        Ok(JudgeCompletion {
            raw,
            request_fingerprint: request.fingerprint(),
            judge_model: request.judge_model.clone(),
            created_at: Utc::now(),
            source: CompletionSource::Synthetic,
        })
    }

    fn backend_name(&self) -> &'static str {
        "synthetic"
    }
}
