//! Betting slates: M matches with three mutually exclusive 1X2 outcomes each.

use chrono::NaiveDate;

use crate::error::{Error, Result};

/// Final result of a match, indexing the winning outcome within its triple.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum MatchResult {
    Home,
    Draw,
    Away,
}

impl MatchResult {
    /// Position of the winning outcome within a match's (home, draw, away) triple.
    pub fn outcome_index(self) -> usize {
        match self {
            MatchResult::Home => 0,
            MatchResult::Draw => 1,
            MatchResult::Away => 2,
        }
    }

    pub fn from_code(code: &str) -> Option<MatchResult> {
        match code.trim() {
            "H" => Some(MatchResult::Home),
            "D" => Some(MatchResult::Draw),
            "A" => Some(MatchResult::Away),
            _ => None,
        }
    }
}

/// One priced outcome: consensus decimal odds and de-vigged probability.
#[derive(Debug, Clone, Copy)]
pub struct SlateOutcome {
    pub odds: f64,
    pub prob: f64,
}

/// One match on a slate.
#[derive(Debug, Clone)]
pub struct SlateMatch {
    pub date: NaiveDate,
    pub home: String,
    pub away: String,
    /// (home, draw, away) in that order.
    pub outcomes: [SlateOutcome; 3],
    /// Known final result, when the slate is settled.
    pub result: Option<MatchResult>,
}

/// A slate of M matches, flattened to N = 3M selectable outcomes.
/// Outcome index i belongs to match i / 3.
#[derive(Debug, Clone)]
pub struct BettingSlate {
    matches: Vec<SlateMatch>,
}

const PROB_SUM_TOL: f64 = 1e-9;

impl BettingSlate {
    /// Validate per-outcome odds and probabilities and the per-match
    /// probability sum (must be 1 within 1e-9).
    pub fn new(matches: Vec<SlateMatch>) -> Result<Self> {
        if matches.is_empty() {
            return Err(Error::InvalidData("slate has no matches".into()));
        }
        for (m, mat) in matches.iter().enumerate() {
            let mut sum = 0.0;
            for (o, out) in mat.outcomes.iter().enumerate() {
                if !(out.odds > 1.0) {
                    return Err(Error::InvalidData(format!(
                        "match {m} outcome {o}: odds {} not > 1",
                        out.odds
                    )));
                }
                if !(out.prob > 0.0 && out.prob < 1.0) {
                    return Err(Error::InvalidData(format!(
                        "match {m} outcome {o}: probability {} outside (0,1)",
                        out.prob
                    )));
                }
                sum += out.prob;
            }
            if (sum - 1.0).abs() > PROB_SUM_TOL {
                return Err(Error::InvalidData(format!(
                    "match {m}: probabilities sum to {sum}, not 1"
                )));
            }
        }
        Ok(Self { matches })
    }

    pub fn matches(&self) -> &[SlateMatch] {
        &self.matches
    }

    pub fn match_count(&self) -> usize {
        self.matches.len()
    }

    /// Number of selectable outcomes, N = 3M.
    pub fn n(&self) -> usize {
        3 * self.matches.len()
    }

    /// Match owning flat outcome index `i`.
    pub fn match_of(&self, i: usize) -> usize {
        i / 3
    }

    /// Decimal odds of flat outcome `i`.
    pub fn odds(&self, i: usize) -> f64 {
        self.matches[i / 3].outcomes[i % 3].odds
    }

    /// De-vigged probability of flat outcome `i`.
    pub fn prob(&self, i: usize) -> f64 {
        self.matches[i / 3].outcomes[i % 3].prob
    }

    /// True when flat outcome `i` won, or None when the match is unsettled.
    pub fn outcome_won(&self, i: usize) -> Option<bool> {
        self.matches[i / 3]
            .result
            .map(|r| r.outcome_index() == i % 3)
    }
}
