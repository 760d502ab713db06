//! Questions and candidate response pairs.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DataError {
    #[error("question id must be non-empty")]
    EmptyQuestionId,
    #[error("question {0} has empty text")]
    EmptyQuestionText(String),
    #[error("response pair for question {0} has empty response text")]
    EmptyResponse(String),
    #[error("response pair for question {question_id} uses the same model name twice: {model}")]
    DuplicateModel { question_id: String, model: String },
}

/// One benchmark question.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Question {
    pub id: String,
    pub category: String,
    pub text: String,
}

impl Question {
    pub fn new(id: impl Into<String>, category: impl Into<String>, text: impl Into<String>) -> Result<Self, DataError> {
        let q = Question { id: id.into(), category: category.into(), text: text.into() };
        q.validate()?;
        Ok(q)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.id.is_empty() {
            return Err(DataError::EmptyQuestionId);
        }
        if self.text.is_empty() {
            return Err(DataError::EmptyQuestionText(self.id.clone()));
        }
        Ok(())
    }
}

/// The two model responses being compared for one question.
///
/// Model A / model B is a fixed identity assignment; presentation order is a
/// separate concern handled at render time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResponsePair {
    pub question_id: String,
    pub model_a: String,
    pub response_a: String,
    pub model_b: String,
    pub response_b: String,
}

impl ResponsePair {
    pub fn new(
        question_id: impl Into<String>,
        model_a: impl Into<String>,
        response_a: impl Into<String>,
        model_b: impl Into<String>,
        response_b: impl Into<String>,
    ) -> Result<Self, DataError> {
        let p = ResponsePair {
            question_id: question_id.into(),
            model_a: model_a.into(),
            response_a: response_a.into(),
            model_b: model_b.into(),
            response_b: response_b.into(),
        };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<(), DataError> {
        if self.question_id.is_empty() {
            return Err(DataError::EmptyQuestionId);
        }
        if self.model_a == self.model_b {
            return Err(DataError::DuplicateModel {
                question_id: self.question_id.clone(),
                model: self.model_a.clone(),
            });
        }
        if self.response_a.is_empty() || self.response_b.is_empty() {
            return Err(DataError::EmptyResponse(self.question_id.clone()));
        }
        Ok(())
    }

    /// Swaps the A/B identity assignment (used by relabeling-equivariance tests).
    pub fn relabeled(&self) -> Self {
        ResponsePair {
            question_id: self.question_id.clone(),
            model_a: self.model_b.clone(),
            response_a: self.response_b.clone(),
            model_b: self.model_a.clone(),
            response_b: self.response_a.clone(),
        }
    }
}
