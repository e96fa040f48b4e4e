//! Reward decomposition.
//!
//! The environment reward for a player is a weighted sum of component
//! rewards, `R(s, a) = Σ wᵢ · Rᵢ(s, a)`. Each component is a sensor that reads
//! the tick's events (and the terminal result) and reports one number:
//!
//! | name | value |
//! |---|---|
//! | `terminal` | +1 on a win, −1 on a loss, 0 otherwise |
//! | `leak_damage` | +1 per own unit that leaked into the enemy base |
//! | `health_loss` | −1 per enemy unit that leaked into our base |
//! | `income_delta` | own income gained this tick / initial income |
//! | `kill_refund` | bounty gold earned this tick / 100 |

use std::collections::HashSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::game::{opponent, Event, EventKind, GameState, Outcome, PlayerId};

#[derive(Debug, Error, PartialEq)]
pub enum RewardError {
    #[error("unknown reward component `{0}`")]
    UnknownComponent(String),
    #[error("duplicate reward component `{0}`")]
    Duplicate(String),
    #[error("weight of `{0}` is not finite")]
    NonFiniteWeight(String),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Component {
    Terminal,
    LeakDamage,
    HealthLoss,
    IncomeDelta,
    KillRefund,
}

impl Component {
    pub const ALL: [Component; 5] = [
        Component::Terminal,
        Component::LeakDamage,
        Component::HealthLoss,
        Component::IncomeDelta,
        Component::KillRefund,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Component::Terminal => "terminal",
            Component::LeakDamage => "leak_damage",
            Component::HealthLoss => "health_loss",
            Component::IncomeDelta => "income_delta",
            Component::KillRefund => "kill_refund",
        }
    }

    /// `events` must be the events of the step that produced `next`.
    pub fn evaluate(
        self,
        events: &[Event],
        _state: &GameState,
        next: &GameState,
        player: PlayerId,
    ) -> f64 {
        let leaks_by = |owner| {
            events
                .iter()
                .filter(|e| matches!(e.kind, EventKind::UnitLeaked { owner: o, .. } if o == owner))
                .count() as f64
        };
        match self {
            Component::Terminal => match next.outcome {
                Some(Outcome::Winner(p)) if p == player => 1.0,
                Some(Outcome::Winner(_)) => -1.0,
                _ => 0.0,
            },
            Component::LeakDamage => leaks_by(player),
            Component::HealthLoss => -leaks_by(opponent(player)),
            Component::IncomeDelta => {
                let gained: i64 = events
                    .iter()
                    .map(|e| match e.kind {
                        EventKind::UnitSpawned { player: p, income_gain, .. } if p == player => {
                            income_gain
                        }
                        _ => 0,
                    })
                    .sum();
                if gained == 0 {
                    0.0
                } else {
                    gained as f64 / next.config.initial_income as f64
                }
            }
            Component::KillRefund => {
                let bounty: i64 = events
                    .iter()
                    .map(|e| match e.kind {
                        EventKind::UnitDied { killer, bounty, .. } if killer == player => bounty,
                        _ => 0,
                    })
                    .sum();
                bounty as f64 / 100.0
            }
        }
    }
}

impl FromStr for Component {
    type Err = RewardError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Component::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| RewardError::UnknownComponent(s.to_string()))
    }
}

impl fmt::Display for Component {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Evaluates one component by name.
pub fn component_reward(
    name: &str,
    events: &[Event],
    state: &GameState,
    next: &GameState,
    player: PlayerId,
) -> Result<f64, RewardError> {
    Ok(name.parse::<Component>()?.evaluate(events, state, next, player))
}

/// One `[[reward]]` entry of an experiment config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RewardTerm {
    pub name: String,
    pub weight: f64,
}

/// Ordered, validated list of weighted components.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<RewardTerm>", into = "Vec<RewardTerm>")]
pub struct RewardSpec {
    terms: Vec<(Component, f64)>,
}

/// A composed reward with the per-component values that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct Composed {
    pub total: f64,
    /// `(component, weight, unweighted value)` in spec order.
    pub breakdown: Vec<(Component, f64, f64)>,
}

impl RewardSpec {
    pub fn new(terms: &[RewardTerm]) -> Result<Self, RewardError> {
        let mut seen = HashSet::new();
        let mut out = Vec::with_capacity(terms.len());
        for t in terms {
            let c: Component = t.name.parse()?;
            if !seen.insert(c) {
                return Err(RewardError::Duplicate(t.name.clone()));
            }
            if !t.weight.is_finite() {
                return Err(RewardError::NonFiniteWeight(t.name.clone()));
            }
            out.push((c, t.weight));
        }
        Ok(Self { terms: out })
    }

    pub fn from_pairs(pairs: &[(&str, f64)]) -> Result<Self, RewardError> {
        let terms: Vec<RewardTerm> = pairs
            .iter()
            .map(|&(name, weight)| RewardTerm { name: name.to_string(), weight })
            .collect();
        Self::new(&terms)
    }

    /// The sparse win/loss signal only.
    pub fn terminal_only() -> Self {
        Self { terms: vec![(Component::Terminal, 1.0)] }
    }

    /// The shaped composite used by the reward-decomposed learner.
    pub fn composite() -> Self {
        Self {
            terms: vec![
                (Component::Terminal, 1.0),
                (Component::LeakDamage, 0.05),
                (Component::HealthLoss, 0.05),
                (Component::IncomeDelta, 0.01),
                (Component::KillRefund, 0.01),
            ],
        }
    }

    pub fn terms(&self) -> &[(Component, f64)] {
        &self.terms
    }

    /// Same components with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        Self { terms: self.terms.iter().map(|&(c, w)| (c, w * factor)).collect() }
    }

    pub fn compose(
        &self,
        events: &[Event],
        state: &GameState,
        next: &GameState,
        player: PlayerId,
    ) -> Composed {
        let mut total = 0.0;
        let mut breakdown = Vec::with_capacity(self.terms.len());
        for &(c, w) in &self.terms {
            let r = c.evaluate(events, state, next, player);
            total += w * r;
            breakdown.push((c, w, r));
        }
        Composed { total, breakdown }
    }
}

impl TryFrom<Vec<RewardTerm>> for RewardSpec {
    type Error = RewardError;

    fn try_from(terms: Vec<RewardTerm>) -> Result<Self, Self::Error> {
        Self::new(&terms)
    }
}

impl From<RewardSpec> for Vec<RewardTerm> {
    fn from(spec: RewardSpec) -> Self {
        spec.terms
            .into_iter()
            .map(|(c, weight)| RewardTerm { name: c.name().to_string(), weight })
            .collect()
    }
}
