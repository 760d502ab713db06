//! Parsers for judge completions, one per template kind.
//!
//! Parsers are total: any input string yields either a parsed value or a
//! classified `ParseFailure`; they never panic. The raw completion is
//! preserved byte-exact on both paths so failures can be audited and retried.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::score::{Score, ScoreError, ScorePair};
use crate::verdict::OrderedVerdict;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParseFailureKind {
    /// No line carrying the expected scores was found.
    MissingScores,
    /// A score token was outside `[1, 10]` or off the hundredths grid.
    ScoreOutOfRange,
    /// The verdict line of a direct comparison was not one of the literals.
    MalformedVerdictLine,
    /// The first candidate score line carried three or more numeric tokens.
    AmbiguousScores,
}

impl fmt::Display for ParseFailureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            ParseFailureKind::MissingScores => "missing_scores",
            ParseFailureKind::ScoreOutOfRange => "score_out_of_range",
            ParseFailureKind::MalformedVerdictLine => "malformed_verdict_line",
            ParseFailureKind::AmbiguousScores => "ambiguous_scores",
        };
        f.write_str(s)
    }
}

/// A classified parse failure carrying the untouched raw completion.
#[derive(Debug, Clone, PartialEq, Eq, Error, Serialize, Deserialize)]
#[error("{kind}: {detail}")]
pub struct ParseFailure {
    pub kind: ParseFailureKind,
    pub detail: String,
    pub raw: String,
}

impl ParseFailure {
    fn new(kind: ParseFailureKind, detail: impl Into<String>, raw: &str) -> Self {
        ParseFailure { kind, detail: detail.into(), raw: raw.to_string() }
    }
}

/// One parsed scored judgement: the explanation text plus both slot scores.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EvidenceSample {
    pub evidence: String,
    pub scores: ScorePair,
    pub raw: String,
    pub chain_index: u32,
}

impl EvidenceSample {
    pub fn with_chain_index(mut self, chain_index: u32) -> Self {
        self.chain_index = chain_index;
        self
    }
}

/// Scans a line for maximal unsigned decimal tokens (`8`, `7.5`, `10.00`).
fn numeric_tokens(line: &str) -> Vec<&str> {
    let bytes = line.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if bytes[i].is_ascii_digit() {
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            if i + 1 < bytes.len() && bytes[i] == b'.' && bytes[i + 1].is_ascii_digit() {
                i += 1;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
            }
            tokens.push(&line[start..i]);
        } else {
            i += 1;
        }
    }
    tokens
}

fn score_from_token(token: &str, raw: &str) -> Result<Score, ParseFailure> {
    token.parse::<Score>().map_err(|e| {
        let kind = match e {
            ScoreError::OutOfRange(_) | ScoreError::TooPrecise(_) | ScoreError::Invalid(_) => {
                ParseFailureKind::ScoreOutOfRange
            }
        };
        ParseFailure::new(kind, e.to_string(), raw)
    })
}

/// Parses a score-first completion: the first line containing at least two
/// numeric tokens must contain exactly two, which become the slot scores;
/// everything after that line is the evidence.
pub fn parse_score_first(raw: &str) -> Result<EvidenceSample, ParseFailure> {
    let mut offset = 0usize;
    for line in raw.split('\n') {
        let tokens = numeric_tokens(line);
        if tokens.len() >= 2 {
            if tokens.len() > 2 {
                return Err(ParseFailure::new(
                    ParseFailureKind::AmbiguousScores,
                    format!("first candidate line has {} numeric tokens: {:?}", tokens.len(), line.trim()),
                    raw,
                ));
            }
            let scores = ScorePair::new(
                score_from_token(tokens[0], raw)?,
                score_from_token(tokens[1], raw)?,
            );
            let evidence_start = (offset + line.len()).min(raw.len());
            let evidence = raw[evidence_start..].trim().to_string();
            return Ok(EvidenceSample { evidence, scores, raw: raw.to_string(), chain_index: 0 });
        }
        offset += line.len() + 1;
    }
    Err(ParseFailure::new(
        ParseFailureKind::MissingScores,
        "no line with two numeric tokens",
        raw,
    ))
}

const SCORE_LINE_MARKERS: [&str; 2] = ["the score of assistant 1:", "the score of assistant 2:"];
const EVIDENCE_PREFIX: &str = "evaluation evidence:";

/// Parses an evidence-first completion: the last lines matching
/// "The score of Assistant 1:" / "The score of Assistant 2:" (case
/// insensitive, each followed by a numeric token) carry the scores;
/// everything before the earlier of those two lines is the evidence,
/// minus an optional "Evaluation evidence:" prefix.
pub fn parse_evidence_first(raw: &str) -> Result<EvidenceSample, ParseFailure> {
    let lines: Vec<&str> = raw.split('\n').collect();
    let mut located: [Option<(usize, &str)>; 2] = [None, None];
    for (idx, line) in lines.iter().enumerate() {
        let lower = line.to_ascii_lowercase();
        for (slot, marker) in SCORE_LINE_MARKERS.iter().enumerate() {
            if let Some(pos) = lower.rfind(marker) {
                let rest = &line[pos + marker.len()..];
                if let Some(token) = numeric_tokens(rest).first() {
                    located[slot] = Some((idx, *token));
                }
            }
        }
    }
    let (line1, tok1) = located[0].ok_or_else(|| {
        ParseFailure::new(
            ParseFailureKind::MissingScores,
            "no \"The score of Assistant 1:\" line with a numeric token",
            raw,
        )
    })?;
    let (line2, tok2) = located[1].ok_or_else(|| {
        ParseFailure::new(
            ParseFailureKind::MissingScores,
            "no \"The score of Assistant 2:\" line with a numeric token",
            raw,
        )
    })?;
    let scores = ScorePair::new(score_from_token(tok1, raw)?, score_from_token(tok2, raw)?);

    let first_score_line = line1.min(line2);
    let mut evidence = lines[..first_score_line].join("\n").trim().to_string();
    if evidence.len() >= EVIDENCE_PREFIX.len()
        && evidence[..EVIDENCE_PREFIX.len()].eq_ignore_ascii_case(EVIDENCE_PREFIX)
    {
        evidence = evidence[EVIDENCE_PREFIX.len()..].trim_start().to_string();
    }
    Ok(EvidenceSample { evidence, scores, raw: raw.to_string(), chain_index: 0 })
}

/// Parses a direct-comparison completion: the first non-empty line, stripped
/// and case-folded, must equal "assistant 1", "assistant 2", or "same".
pub fn parse_direct_compare(raw: &str) -> Result<OrderedVerdict, ParseFailure> {
    let line = raw.split('\n').map(str::trim).find(|l| !l.is_empty());
    let line = match line {
        Some(l) => l,
        None => {
            return Err(ParseFailure::new(
                ParseFailureKind::MalformedVerdictLine,
                "completion has no non-empty line",
                raw,
            ))
        }
    };
    match line.to_lowercase().as_str() {
        "assistant 1" => Ok(OrderedVerdict::Assistant1),
        "assistant 2" => Ok(OrderedVerdict::Assistant2),
        "same" => Ok(OrderedVerdict::Same),
        other => Err(ParseFailure::new(
            ParseFailureKind::MalformedVerdictLine,
            format!("first non-empty line is {other:?}"),
            raw,
        )),
    }
}

/// Canonical score-first output shape: "s1 s2" then the evidence.
pub fn format_score_first(scores: &ScorePair, evidence: &str) -> String {
    format!("{} {}\n{}", scores.assistant1, scores.assistant2, evidence)
}

/// Canonical evidence-first output shape matching the template's format block.
pub fn format_evidence_first(scores: &ScorePair, evidence: &str) -> String {
    format!(
        "Evaluation evidence: {}\nThe score of Assistant 1: {}\nThe score of Assistant 2: {}",
        evidence, scores.assistant1, scores.assistant2
    )
}

/// Canonical direct-comparison output shape: the verdict literal then the explanation.
pub fn format_direct_compare(verdict: OrderedVerdict, explanation: &str) -> String {
    let literal = match verdict {
        OrderedVerdict::Assistant1 => "Assistant 1",
        OrderedVerdict::Assistant2 => "Assistant 2",
        OrderedVerdict::Same => "Same",
    };
    format!("{literal}\n{explanation}")
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Independent token oracle: a regex instead of the hand scanner.
    fn oracle_tokens(line: &str) -> Vec<String> {
        let re = regex::Regex::new(r"\d+(?:\.\d+)?").unwrap();
        re.find_iter(line).map(|m| m.as_str().to_string()).collect()
    }

    #[test]
    fn scanner_matches_regex_oracle() {
        let lines = [
            "8 9",
            "Scores: 7.5 7.5",
            "Rating: 9/10 overall",
            "7.5.5 odd",
            "v2.0 answer 1 and 2",
            "no numbers here",
            "8.",
            ".5 trailing",
            "x86 and 10.00",
            "唯一的分数是 8 和 9",
        ];
        for line in lines {
            let got: Vec<String> = numeric_tokens(line).iter().map(|t| t.to_string()).collect();
            assert_eq!(got, oracle_tokens(line), "line {line:?}");
        }
    }

    #[test]
    fn score_first_happy_path() {
        let s = parse_score_first("8 9\nAssistant 2 gave more detail and better structure.").unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 800);
        assert_eq!(s.scores.assistant2.hundredths(), 900);
        assert_eq!(s.evidence, "Assistant 2 gave more detail and better structure.");
        assert!(s.raw.starts_with("8 9"));
    }

    #[test]
    fn score_first_accepts_wrapped_decimals() {
        // Frozen against the regex oracle: tokens of "Scores: 7.5 7.5" are
        // exactly ["7.5", "7.5"], so the pair is (7.50, 7.50).
        let s = parse_score_first("Scores: 7.5 7.5").unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 750);
        assert_eq!(s.scores.assistant2.hundredths(), 750);
        assert_eq!(s.evidence, "");
    }

    #[test]
    fn score_first_failure_taxonomy() {
        assert_eq!(parse_score_first("").unwrap_err().kind, ParseFailureKind::MissingScores);
        assert_eq!(
            parse_score_first("I cannot decide.").unwrap_err().kind,
            ParseFailureKind::MissingScores
        );
        assert_eq!(parse_score_first("0 5").unwrap_err().kind, ParseFailureKind::ScoreOutOfRange);
        assert_eq!(parse_score_first("8 11").unwrap_err().kind, ParseFailureKind::ScoreOutOfRange);
        assert_eq!(parse_score_first("8 9 7").unwrap_err().kind, ParseFailureKind::AmbiguousScores);
        assert_eq!(
            parse_score_first("7.125 8").unwrap_err().kind,
            ParseFailureKind::ScoreOutOfRange
        );
    }

    #[test]
    fn score_first_takes_the_first_candidate_line() {
        let s = parse_score_first("9 8\n7 6").unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 900);
        assert_eq!(s.evidence, "7 6");
    }

    #[test]
    fn score_first_raw_is_preserved_on_failure() {
        let raw = "verdict:\tnone \u{1F914}";
        let err = parse_score_first(raw).unwrap_err();
        assert_eq!(err.raw, raw);
    }

    #[test]
    fn evidence_first_happy_path() {
        let raw = "Evaluation evidence: Assistant 1 is accurate and concise.\nThe score of Assistant 1: 9\nThe score of Assistant 2: 6";
        let s = parse_evidence_first(raw).unwrap();
        assert_eq!(s.evidence, "Assistant 1 is accurate and concise.");
        assert_eq!(s.scores.assistant1.hundredths(), 900);
        assert_eq!(s.scores.assistant2.hundredths(), 600);
    }

    #[test]
    fn evidence_first_is_case_insensitive() {
        // Frozen against the oracle: markers located case-insensitively, so
        // "THE SCORE OF ASSISTANT 2: 8.5" yields 8.50 for slot 2.
        let raw = "the score of assistant 1: 7\nTHE SCORE OF ASSISTANT 2: 8.5";
        let s = parse_evidence_first(raw).unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 700);
        assert_eq!(s.scores.assistant2.hundredths(), 850);
        assert_eq!(s.evidence, "");
    }

    #[test]
    fn evidence_first_takes_last_occurrences() {
        let raw = "Evaluation evidence: The format is The score of Assistant 1: 1 as shown.\nMore analysis.\nThe score of Assistant 1: 9\nThe score of Assistant 2: 6";
        let s = parse_evidence_first(raw).unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 900);
        assert_eq!(s.scores.assistant2.hundredths(), 600);
        // The evidence keeps the quoted format line: the boundary is the
        // earlier of the two located (last-occurrence) score lines.
        assert!(s.evidence.contains("as shown."));
        assert!(s.evidence.contains("More analysis."));
    }

    #[test]
    fn evidence_first_ignores_tokenless_format_quotes() {
        let raw = "The score of Assistant 1: <score>\nThe score of Assistant 2: <score>\nThe score of Assistant 1: 8\nThe score of Assistant 2: 7";
        let s = parse_evidence_first(raw).unwrap();
        assert_eq!(s.scores.assistant1.hundredths(), 800);
        assert_eq!(s.scores.assistant2.hundredths(), 700);
    }

    #[test]
    fn evidence_first_failure_taxonomy() {
        assert_eq!(parse_evidence_first("").unwrap_err().kind, ParseFailureKind::MissingScores);
        assert_eq!(
            parse_evidence_first("The score of Assistant 1: 9").unwrap_err().kind,
            ParseFailureKind::MissingScores
        );
        assert_eq!(
            parse_evidence_first("The score of Assistant 1: 11\nThe score of Assistant 2: 9")
                .unwrap_err()
                .kind,
            ParseFailureKind::ScoreOutOfRange
        );
    }

    #[test]
    fn direct_compare_literals() {
        assert_eq!(parse_direct_compare("Assistant 1\nBecause it is more detailed.").unwrap(), OrderedVerdict::Assistant1);
        assert_eq!(parse_direct_compare("assistant 2").unwrap(), OrderedVerdict::Assistant2);
        assert_eq!(parse_direct_compare("\n\n SAME \nBoth equal.").unwrap(), OrderedVerdict::Same);
    }

    #[test]
    fn direct_compare_rejects_everything_else() {
        for raw in ["Both are fine.", "Assistant 3", "Assistant1", "Same.", "", "   \n  "] {
            assert_eq!(
                parse_direct_compare(raw).unwrap_err().kind,
                ParseFailureKind::MalformedVerdictLine,
                "raw {raw:?}"
            );
        }
    }

    #[test]
    fn canonical_forms_round_trip() {
        let scores = ScorePair::new(
            Score::from_hundredths(725).unwrap(),
            Score::from_hundredths(1000).unwrap(),
        );
        let sf = parse_score_first(&format_score_first(&scores, "solid reasoning")).unwrap();
        assert_eq!(sf.scores, scores);
        assert_eq!(sf.evidence, "solid reasoning");

        let ef = parse_evidence_first(&format_evidence_first(&scores, "solid reasoning")).unwrap();
        assert_eq!(ef.scores, scores);
        assert_eq!(ef.evidence, "solid reasoning");

        for v in [OrderedVerdict::Assistant1, OrderedVerdict::Assistant2, OrderedVerdict::Same] {
            assert_eq!(parse_direct_compare(&format_direct_compare(v, "why")).unwrap(), v);
        }
    }

    #[test]
    fn multi_line_evidence_round_trips() {
        let scores = ScorePair::new(
            Score::from_hundredths(800).unwrap(),
            Score::from_hundredths(600).unwrap(),
        );
        let evidence = "First paragraph.\n\nSecond paragraph with detail.";
        let ef = parse_evidence_first(&format_evidence_first(&scores, evidence)).unwrap();
        assert_eq!(ef.evidence, evidence);
        assert_eq!(ef.scores, scores);
    }
}
