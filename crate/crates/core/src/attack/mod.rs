//! Eve's attacks.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::BitSituation;

pub mod deterministic;
pub mod nonlinearity;
pub mod statistical;
pub mod zero_crossing;

/// Result of one attack on one bit exchange.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttackOutcome {
    /// `None` while Eve is still waiting for distinguishing samples.
    pub guess: Option<BitSituation>,
    /// One-based sample index at which the guess became unique.
    pub decision_step: Option<usize>,
    /// Set once the outcome is scored against the ground truth.
    pub correct: Option<bool>,
    pub aux: BTreeMap<String, f64>,
}

impl AttackOutcome {
    pub fn decided(guess: BitSituation, decision_step: usize) -> Self {
        Self {
            guess: Some(guess),
            decision_step: Some(decision_step),
            correct: None,
            aux: BTreeMap::new(),
        }
    }

    pub fn undecided() -> Self {
        Self {
            guess: None,
            decision_step: None,
            correct: None,
            aux: BTreeMap::new(),
        }
    }

    pub fn is_undecided(&self) -> bool {
        self.guess.is_none()
    }

    pub fn score(mut self, truth: BitSituation) -> Self {
        self.correct = Some(self.guess == Some(truth));
        self
    }

    pub fn with_aux(mut self, key: &str, value: f64) -> Self {
        self.aux.insert(key.to_string(), value);
        self
    }
}
