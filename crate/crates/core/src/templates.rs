//! Prompt templates and order-aware rendering.
//!
//! Three built-in templates ship as resource files with literal `{Q}`,
//! `{R1}`, `{R2}` placeholders: a score-first rubric, an explanation-first
//! rubric, and a direct three-way comparison. Rendering fills slot 1 and
//! slot 2 according to the presentation order; everything else is byte
//! identical between the two orders, which is what makes position-bias
//! measurements meaningful.

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::data::{Question, ResponsePair};
use crate::verdict::PresentationOrder;

pub const MARKER_QUESTION: &str = "[Question]";
pub const MARKER_SYSTEM: &str = "[System]";
pub const MARKER_A1_START: &str = "[The Start of Assistant 1's Answer]";
pub const MARKER_A1_END: &str = "[The End of Assistant 1's Answer]";
pub const MARKER_A2_START: &str = "[The Start of Assistant 2's Answer]";
pub const MARKER_A2_END: &str = "[The End of Assistant 2's Answer]";

/// The four lines bracketing the two response slots.
pub const ASSISTANT_DELIMITERS: [&str; 4] =
    [MARKER_A1_START, MARKER_A1_END, MARKER_A2_START, MARKER_A2_END];

/// Every structural marker line a slot value must not smuggle in.
pub const STRUCTURAL_MARKERS: [&str; 6] = [
    MARKER_QUESTION,
    MARKER_SYSTEM,
    MARKER_A1_START,
    MARKER_A1_END,
    MARKER_A2_START,
    MARKER_A2_END,
];

const SCORE_FIRST_BODY: &str = include_str!("../resources/templates/score_first.txt");
const EVIDENCE_FIRST_BODY: &str = include_str!("../resources/templates/evidence_first.txt");
const DIRECT_COMPARE_BODY: &str = include_str!("../resources/templates/direct_compare.txt");

const PLACEHOLDER_Q: &str = "{Q}";
const PLACEHOLDER_R1: &str = "{R1}";
const PLACEHOLDER_R2: &str = "{R2}";

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TemplateError {
    #[error("template is missing placeholder {0}")]
    MissingPlaceholder(&'static str),
    #[error("template contains placeholder {0} more than once")]
    DuplicatePlaceholder(&'static str),
    #[error("{slot} contains the structural marker line {marker:?}")]
    DelimiterCollision { slot: &'static str, marker: String },
    #[error("failed to read template {path}: {message}")]
    Io { path: String, message: String },
}

/// Which prompt template, and therefore which output parser, applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TemplateKind {
    ScoreFirst,
    EvidenceFirst,
    DirectCompare,
}

impl TemplateKind {
    pub fn label(self) -> &'static str {
        match self {
            TemplateKind::ScoreFirst => "score_first",
            TemplateKind::EvidenceFirst => "evidence_first",
            TemplateKind::DirectCompare => "direct_compare",
        }
    }

    /// True when the template's output carries a pair of slot scores.
    pub fn is_scored(self) -> bool {
        !matches!(self, TemplateKind::DirectCompare)
    }
}

impl fmt::Display for TemplateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TemplateSource {
    Builtin,
    File(PathBuf),
}

/// A validated prompt template: body text plus the parser contract it serves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Template {
    kind: TemplateKind,
    body: String,
    sha256: String,
    source: TemplateSource,
}

impl Template {
    /// The built-in template for a kind.
    pub fn builtin(kind: TemplateKind) -> Self {
        let raw = match kind {
            TemplateKind::ScoreFirst => SCORE_FIRST_BODY,
            TemplateKind::EvidenceFirst => EVIDENCE_FIRST_BODY,
            TemplateKind::DirectCompare => DIRECT_COMPARE_BODY,
        };
        let body = normalize_newlines(raw);
        validate_body(&body).expect("built-in template body is well-formed");
        let sha256 = sha256_hex(body.as_bytes());
        Template { kind, body, sha256, source: TemplateSource::Builtin }
    }

    /// Loads a custom template file; the caller declares which parser applies.
    pub fn from_file(path: &Path, kind: TemplateKind) -> Result<Self, TemplateError> {
        let raw = std::fs::read_to_string(path).map_err(|e| TemplateError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let body = normalize_newlines(&raw);
        validate_body(&body)?;
        let sha256 = sha256_hex(body.as_bytes());
        Ok(Template { kind, body, sha256, source: TemplateSource::File(path.to_path_buf()) })
    }

    pub fn kind(&self) -> TemplateKind {
        self.kind
    }

    pub fn body(&self) -> &str {
        &self.body
    }

    /// Checksum of the normalized body; recorded in run metadata and reports.
    pub fn sha256(&self) -> &str {
        &self.sha256
    }

    pub fn source(&self) -> &TemplateSource {
        &self.source
    }

    /// Renders the prompt for one question under the given presentation order.
    ///
    /// Under `Ab` slot 1 is `response_a`; under `Ba` slot 1 is `response_b`.
    /// Slot values are LF-normalized; values containing a structural marker
    /// line are rejected so they cannot spoof the prompt's delimiters.
    pub fn render(
        &self,
        question: &Question,
        pair: &ResponsePair,
        order: PresentationOrder,
    ) -> Result<RenderedPrompt, TemplateError> {
        let q = normalize_newlines(&question.text);
        let a = normalize_newlines(&pair.response_a);
        let b = normalize_newlines(&pair.response_b);
        let (r1, r2, slot_models) = match order {
            PresentationOrder::Ab => (&a, &b, [pair.model_a.clone(), pair.model_b.clone()]),
            PresentationOrder::Ba => (&b, &a, [pair.model_b.clone(), pair.model_a.clone()]),
        };
        check_slot("question text", &q)?;
        check_slot("slot-1 response", r1)?;
        check_slot("slot-2 response", r2)?;

        let mut text = String::with_capacity(self.body.len() + q.len() + r1.len() + r2.len());
        // Placeholders occur exactly once each (validated), so scan in
        // position order and splice; slot values are never re-scanned.
        let mut slots: Vec<(usize, &str, &str)> = [
            (PLACEHOLDER_Q, q.as_str()),
            (PLACEHOLDER_R1, r1.as_str()),
            (PLACEHOLDER_R2, r2.as_str()),
        ]
        .into_iter()
        .map(|(ph, value)| (self.body.find(ph).expect("validated placeholder"), ph, value))
        .collect();
        slots.sort_by_key(|(pos, _, _)| *pos);
        let mut consumed = 0usize;
        for (pos, ph, value) in slots {
            text.push_str(&self.body[consumed..pos]);
            text.push_str(value);
            consumed = pos + ph.len();
        }
        text.push_str(&self.body[consumed..]);

        Ok(RenderedPrompt {
            kind: self.kind,
            text,
            order,
            question_id: question.id.clone(),
            slot_models,
        })
    }
}

/// Renders the built-in template of `kind`; the common entry point.
pub fn render(
    kind: TemplateKind,
    question: &Question,
    pair: &ResponsePair,
    order: PresentationOrder,
) -> Result<RenderedPrompt, TemplateError> {
    Template::builtin(kind).render(question, pair, order)
}

/// A fully rendered prompt, ready to become a judge request.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RenderedPrompt {
    pub kind: TemplateKind,
    pub text: String,
    pub order: PresentationOrder,
    pub question_id: String,
    /// Model names occupying slot 1 and slot 2 under `order`.
    pub slot_models: [String; 2],
}

/// Normalizes CRLF and lone CR line endings to LF.
pub fn normalize_newlines(s: &str) -> String {
    if !s.contains('\r') {
        return s.to_string();
    }
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars().peekable();
    while let Some(c) = chars.next() {
        if c == '\r' {
            if chars.peek() == Some(&'\n') {
                chars.next();
            }
            out.push('\n');
        } else {
            out.push(c);
        }
    }
    out
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

fn validate_body(body: &str) -> Result<(), TemplateError> {
    for ph in [PLACEHOLDER_Q, PLACEHOLDER_R1, PLACEHOLDER_R2] {
        match body.matches(ph).count() {
            0 => return Err(TemplateError::MissingPlaceholder(placeholder_name(ph))),
            1 => {}
            _ => return Err(TemplateError::DuplicatePlaceholder(placeholder_name(ph))),
        }
    }
    Ok(())
}

fn placeholder_name(ph: &str) -> &'static str {
    match ph {
        PLACEHOLDER_Q => "{Q}",
        PLACEHOLDER_R1 => "{R1}",
        _ => "{R2}",
    }
}

fn check_slot(slot: &'static str, value: &str) -> Result<(), TemplateError> {
    for marker in STRUCTURAL_MARKERS {
        if value.contains(marker) {
            return Err(TemplateError::DelimiterCollision { slot, marker: marker.to_string() });
        }
    }
    Ok(())
}
