//! Judge scores on an exact hundredths grid, plus exact rational score means.
//!
//! Scores live on the 1.00..=10.00 grid and are stored as integer hundredths
//! so tie comparisons and averaged scores never depend on binary float
//! rounding. Means of grid scores are exact rationals.

use std::fmt;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Signed, ToPrimitive};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Smallest representable score (1.00), in hundredths.
pub const SCORE_MIN_HUNDREDTHS: i64 = 100;
/// Largest representable score (10.00), in hundredths.
pub const SCORE_MAX_HUNDREDTHS: i64 = 1000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScoreError {
    #[error("score {0} is outside the 1..=10 range")]
    OutOfRange(String),
    #[error("score {0} has more than two fractional digits")]
    TooPrecise(String),
    #[error("not a decimal score: {0:?}")]
    Invalid(String),
}

/// A single judge score in `[1, 10]` with at most two fractional digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Score(i64);

impl Score {
    pub fn from_hundredths(hundredths: i64) -> Result<Self, ScoreError> {
        if !(SCORE_MIN_HUNDREDTHS..=SCORE_MAX_HUNDREDTHS).contains(&hundredths) {
            return Err(ScoreError::OutOfRange(format_hundredths(hundredths)));
        }
        Ok(Score(hundredths))
    }

    /// Clamps an arbitrary hundredths value into the valid score range.
    pub fn clamping_hundredths(hundredths: i64) -> Self {
        Score(hundredths.clamp(SCORE_MIN_HUNDREDTHS, SCORE_MAX_HUNDREDTHS))
    }

    pub fn hundredths(self) -> i64 {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0 as f64 / 100.0
    }
}

impl fmt::Display for Score {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_hundredths(self.0))
    }
}

/// Renders a hundredths value as a minimal decimal: 800 -> "8", 750 -> "7.5".
pub(crate) fn format_hundredths(h: i64) -> String {
    let sign = if h < 0 { "-" } else { "" };
    let a = h.abs();
    let (int, frac) = (a / 100, a % 100);
    if frac == 0 {
        format!("{sign}{int}")
    } else if frac % 10 == 0 {
        format!("{sign}{int}.{}", frac / 10)
    } else {
        format!("{sign}{int}.{frac:02}")
    }
}

impl FromStr for Score {
    type Err = ScoreError;

    /// Parses an unsigned decimal token such as "8", "7.5", or "10.00".
    fn from_str(s: &str) -> Result<Self, ScoreError> {
        let (int_part, frac_part) = match s.split_once('.') {
            Some((i, f)) => (i, f),
            None => (s, ""),
        };
        if int_part.is_empty()
            || !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err(ScoreError::Invalid(s.to_string()));
        }
        if frac_part.len() > 2 {
            // Reject rather than silently round: exactness is the contract.
            let tail = &frac_part[2..];
            if tail.bytes().any(|b| b != b'0') {
                return Err(ScoreError::TooPrecise(s.to_string()));
            }
        }
        let int: i64 = int_part
            .parse()
            .map_err(|_| ScoreError::OutOfRange(s.to_string()))?;
        let frac = &frac_part[..frac_part.len().min(2)];
        let frac_h: i64 = match frac.len() {
            0 => 0,
            1 => frac.parse::<i64>().unwrap() * 10,
            _ => frac.parse::<i64>().unwrap(),
        };
        let hundredths = int
            .checked_mul(100)
            .and_then(|v| v.checked_add(frac_h))
            .ok_or_else(|| ScoreError::OutOfRange(s.to_string()))?;
        Score::from_hundredths(hundredths)
    }
}

impl Serialize for Score {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Score {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

/// The two scores of one judgement, in presentation-slot order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScorePair {
    pub assistant1: Score,
    pub assistant2: Score,
}

impl ScorePair {
    pub fn new(assistant1: Score, assistant2: Score) -> Self {
        ScorePair { assistant1, assistant2 }
    }

    /// Absolute slot-score gap in hundredths.
    pub fn gap_hundredths(&self) -> i64 {
        (self.assistant1.hundredths() - self.assistant2.hundredths()).abs()
    }

    pub fn swapped(&self) -> Self {
        ScorePair { assistant1: self.assistant2, assistant2: self.assistant1 }
    }
}

/// An exact rational score value: means of grid scores and averages of means.
///
/// All arithmetic is on `Ratio<i64>`; denominators stay bounded because every
/// mean divides 100 * chain count * 2 and reduction happens on each operation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MeanScore(Ratio<i64>);

impl MeanScore {
    pub fn from_score(s: Score) -> Self {
        MeanScore(Ratio::new(s.hundredths(), 100))
    }

    pub fn from_ratio(r: Ratio<i64>) -> Self {
        MeanScore(r)
    }

    pub fn from_integer(v: i64) -> Self {
        MeanScore(Ratio::from_integer(v))
    }

    /// Exact mean of grid scores; `None` for an empty slice.
    pub fn mean(scores: &[Score]) -> Option<Self> {
        if scores.is_empty() {
            return None;
        }
        let sum: i64 = scores.iter().map(|s| s.hundredths()).sum();
        Some(MeanScore(Ratio::new(sum, 100 * scores.len() as i64)))
    }

    /// Exact midpoint of two values: the cross-order average.
    pub fn midpoint(a: Self, b: Self) -> Self {
        MeanScore((a.0 + b.0) / 2)
    }

    /// Exact mean of a slice of means; `None` for an empty slice.
    pub fn mean_of(values: &[MeanScore]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let sum = values.iter().fold(Ratio::from_integer(0), |acc, v| acc + v.0);
        Some(MeanScore(sum / values.len() as i64))
    }

    pub fn abs_diff(a: Self, b: Self) -> Self {
        MeanScore((a.0 - b.0).abs())
    }

    /// True when |self - other| <= epsilon, with epsilon given in hundredths.
    pub fn within_epsilon(self, other: Self, epsilon_hundredths: i64) -> bool {
        (self.0 - other.0).abs() <= Ratio::new(epsilon_hundredths, 100)
    }

    pub fn ratio(self) -> Ratio<i64> {
        self.0
    }

    pub fn to_f64(self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for MeanScore {
    /// Decimal form when it terminates within six digits, else "p/q".
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = self.0;
        let (num, den) = (*r.numer(), *r.denom());
        if den == 1 {
            return write!(f, "{num}");
        }
        let mut d = den;
        let mut twos = 0u32;
        let mut fives = 0u32;
        while d % 2 == 0 {
            d /= 2;
            twos += 1;
        }
        while d % 5 == 0 {
            d /= 5;
            fives += 1;
        }
        let digits = twos.max(fives);
        if d != 1 || digits > 6 {
            return write!(f, "{num}/{den}");
        }
        let scale = 10i64.pow(digits);
        let scaled = num * (scale / den);
        let sign = if scaled < 0 { "-" } else { "" };
        let a = scaled.abs();
        let (int, frac) = (a / scale, a % scale);
        let frac_str = format!("{frac:0width$}", width = digits as usize);
        let trimmed = frac_str.trim_end_matches('0');
        write!(f, "{sign}{int}.{trimmed}")
    }
}

impl FromStr for MeanScore {
    type Err = ScoreError;

    /// Accepts "8", "8.5", "-0.25", or "p/q".
    fn from_str(s: &str) -> Result<Self, ScoreError> {
        if let Some((n, d)) = s.split_once('/') {
            let num: i64 = n.trim().parse().map_err(|_| ScoreError::Invalid(s.to_string()))?;
            let den: i64 = d.trim().parse().map_err(|_| ScoreError::Invalid(s.to_string()))?;
            if den == 0 {
                return Err(ScoreError::Invalid(s.to_string()));
            }
            return Ok(MeanScore(Ratio::new(num, den)));
        }
        let (sign, body) = match s.strip_prefix('-') {
            Some(rest) => (-1i64, rest),
            None => (1i64, s),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(ScoreError::Invalid(s.to_string()));
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
            || frac_part.len() > 9
        {
            return Err(ScoreError::Invalid(s.to_string()));
        }
        let int: i64 = if int_part.is_empty() { 0 } else { int_part.parse().map_err(|_| ScoreError::Invalid(s.to_string()))? };
        let scale = 10i64.pow(frac_part.len() as u32);
        let frac: i64 = if frac_part.is_empty() { 0 } else { frac_part.parse().map_err(|_| ScoreError::Invalid(s.to_string()))? };
        Ok(MeanScore(Ratio::new(sign * (int * scale + frac), scale)))
    }
}

impl Serialize for MeanScore {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for MeanScore {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_bounds() {
        assert!(Score::from_hundredths(100).is_ok());
        assert!(Score::from_hundredths(1000).is_ok());
        assert!(Score::from_hundredths(99).is_err());
        assert!(Score::from_hundredths(1001).is_err());
    }

    #[test]
    fn display_is_minimal_decimal() {
        let cases = [(800, "8"), (750, "7.5"), (725, "7.25"), (1000, "10"), (101, "1.01")];
        for (h, s) in cases {
            assert_eq!(Score::from_hundredths(h).unwrap().to_string(), s);
        }
    }

    #[test]
    fn parse_round_trips_the_grid() {
        for h in SCORE_MIN_HUNDREDTHS..=SCORE_MAX_HUNDREDTHS {
            let s = Score::from_hundredths(h).unwrap();
            let back: Score = s.to_string().parse().unwrap();
            assert_eq!(back, s);
        }
    }

    #[test]
    fn parse_rejects_excess_precision() {
        assert_eq!("7.125".parse::<Score>(), Err(ScoreError::TooPrecise("7.125".into())));
        // Trailing zeros beyond two digits carry no extra precision.
        assert_eq!("7.500".parse::<Score>().unwrap().hundredths(), 750);
    }

    #[test]
    fn parse_rejects_out_of_range() {
        assert!(matches!("0.5".parse::<Score>(), Err(ScoreError::OutOfRange(_))));
        assert!(matches!("10.01".parse::<Score>(), Err(ScoreError::OutOfRange(_))));
        assert!(matches!("999999999999999999999".parse::<Score>(), Err(ScoreError::OutOfRange(_))));
    }

    #[test]
    fn mean_is_exact() {
        let scores: Vec<Score> = [700, 800, 900]
            .iter()
            .map(|&h| Score::from_hundredths(h).unwrap())
            .collect();
        let m = MeanScore::mean(&scores).unwrap();
        assert_eq!(m, MeanScore::from_integer(8));
        assert_eq!(m.to_string(), "8");

        let uneven: Vec<Score> = [700, 800]
            .iter()
            .map(|&h| Score::from_hundredths(h).unwrap())
            .collect();
        assert_eq!(MeanScore::mean(&uneven).unwrap().to_string(), "7.5");
    }

    #[test]
    fn mean_of_means_is_exact() {
        let values = [
            MeanScore::from_ratio(Ratio::new(25, 3)),
            MeanScore::from_ratio(Ratio::new(15, 2)),
            MeanScore::from_integer(7),
        ];
        // (25/3 + 15/2 + 7) / 3 = (50/6 + 45/6 + 42/6) / 3 = 137/18.
        assert_eq!(MeanScore::mean_of(&values).unwrap(), MeanScore::from_ratio(Ratio::new(137, 18)));
        assert_eq!(MeanScore::mean_of(&[]), None);
    }

    #[test]
    fn nonterminating_means_render_as_fractions() {
        let scores: Vec<Score> = [800, 800, 900]
            .iter()
            .map(|&h| Score::from_hundredths(h).unwrap())
            .collect();
        let m = MeanScore::mean(&scores).unwrap();
        assert_eq!(m.to_string(), "25/3");
        let back: MeanScore = "25/3".parse().unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn epsilon_comparison_is_exact() {
        let a = MeanScore::from_score(Score::from_hundredths(750).unwrap());
        let b = MeanScore::from_score(Score::from_hundredths(725).unwrap());
        assert!(a.within_epsilon(b, 25));
        assert!(!a.within_epsilon(b, 24));
    }

    #[test]
    fn mean_score_string_round_trip() {
        for s in ["8", "7.5", "0.25", "-1.75", "49/6", "-3/7"] {
            let m: MeanScore = s.parse().unwrap();
            let again: MeanScore = m.to_string().parse().unwrap();
            assert_eq!(again, m);
        }
    }
}
