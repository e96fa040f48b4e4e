//! Policies and the episode loop.
//!
//! An [`Agent`] picks one action per tick and may learn from the resulting
//! transition. Agents own their random streams, so a match is reproducible
//! from its seeds alone and separate matches can run on separate threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::action::Action;
use crate::config::SimConfig;
use crate::encoders::FeatureEncoding;
use crate::game::{opponent, Cell, Event, GameError, GameState, Outcome, PlayerId};
use crate::qlearning::{select_action, LearnerConfig, QError, QNetwork, ReplayBuffer, Transition};
use crate::rewards::RewardSpec;

#[derive(Debug, thiserror::Error)]
pub enum AgentError {
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] QError),
}

pub trait Agent {
    fn name(&self) -> &str;

    fn act(&mut self, state: &GameState, player: PlayerId) -> Action;

    /// Sees the outcome of the last action. Learning agents store the
    /// transition and train; returns the training loss when a step was taken.
    fn observe(
        &mut self,
        _action: Action,
        _reward: f64,
        _next: &GameState,
        _player: PlayerId,
    ) -> Result<Option<f64>, QError> {
        Ok(None)
    }

    /// Spec used to score this agent's transitions.
    fn reward_spec(&self) -> &RewardSpec;
}

/// Uniform over all action codes.
pub struct RandomAgent {
    rng: ChaCha8Rng,
    spec: RewardSpec,
}

impl RandomAgent {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed), spec: RewardSpec::composite() }
    }
}

impl Agent for RandomAgent {
    fn name(&self) -> &str {
        "random"
    }

    fn act(&mut self, state: &GameState, _player: PlayerId) -> Action {
        let code = self.rng.gen_range(0..state.config.action_count());
        Action::from_code(code, &state.config).expect("code in range")
    }

    fn reward_spec(&self) -> &RewardSpec {
        &self.spec
    }
}

/// Columns from our base within which an enemy unit counts as a threat.
pub const THREAT_COLUMNS: i64 = 8;
/// Preferred distance of a defensive tower from our base.
pub const DEFENSE_OFFSET: u32 = 3;

/// A fixed three-rule policy:
///
/// 1. if an enemy unit is within [`THREAT_COLUMNS`] of our base and a Basic
///    tower is affordable, walk the cursor (rows first, one step per tick) to
///    a free cell on the threatened row and build there;
/// 2. otherwise, with gold for at least two of the cheapest unit, send the
///    most expensive affordable unit;
/// 3. otherwise do nothing.
pub struct RuleBasedAgent {
    spec: RewardSpec,
}

impl Default for RuleBasedAgent {
    fn default() -> Self {
        Self { spec: RewardSpec::composite() }
    }
}

impl RuleBasedAgent {
    /// Cell the defence rule is heading for, if rule 1 applies.
    pub fn defense_target(state: &GameState, player: PlayerId) -> Option<Cell> {
        let config = &state.config;
        let basic = &config.tower_roster[0];
        if state.players[player].gold < basic.gold_cost {
            return None;
        }
        let threat = state
            .units
            .iter()
            .filter(|u| u.owner == opponent(player))
            .map(|u| (u.distance_to_goal(config), u.uid, u.row))
            .filter(|&(d, _, _)| d <= THREAT_COLUMNS * crate::config::MILLI)
            .min()?;
        let row = threat.2;
        let zone = config.buildable_columns[player];
        // Columns ordered by distance from the preferred defensive column.
        let base = if player == 0 { 0 } else { config.grid_width - 1 };
        let preferred = if player == 0 { base + DEFENSE_OFFSET } else { base - DEFENSE_OFFSET };
        let mut cols: Vec<u32> = zone.as_range().collect();
        cols.sort_by_key(|&c| (c.abs_diff(preferred), c.abs_diff(base)));
        cols.into_iter()
            .map(|c| Cell::new(c, row))
            .find(|&cell| state.tower_at(cell).is_none())
    }

    pub fn decide(state: &GameState, player: PlayerId) -> Action {
        let config = &state.config;
        if let Some(target) = Self::defense_target(state, player) {
            let cursor = state.players[player].cursor;
            return if cursor.row > target.row {
                Action::CursorUp
            } else if cursor.row < target.row {
                Action::CursorDown
            } else if cursor.col != target.col {
                let toward_higher = target.col > cursor.col;
                // Right means "towards the enemy", i.e. increasing columns for player 0.
                if toward_higher == (player == 0) {
                    Action::CursorRight
                } else {
                    Action::CursorLeft
                }
            } else {
                Action::BuildTower(0)
            };
        }
        let gold = state.players[player].gold;
        let cheapest = config.unit_roster.iter().map(|u| u.gold_cost).min().unwrap_or(i64::MAX);
        if gold >= 2 * cheapest {
            let best = config
                .unit_roster
                .iter()
                .filter(|u| u.gold_cost <= gold)
                .max_by_key(|u| (u.gold_cost, std::cmp::Reverse(u.id)));
            if let Some(u) = best {
                return Action::SendUnit(u.id);
            }
        }
        Action::NoOp
    }
}

impl Agent for RuleBasedAgent {
    fn name(&self) -> &str {
        "rule_based"
    }

    fn act(&mut self, state: &GameState, player: PlayerId) -> Action {
        Self::decide(state, player)
    }

    fn reward_spec(&self) -> &RewardSpec {
        &self.spec
    }
}

/// Epsilon-greedy Q-network agent with its own replay buffer.
pub struct LearningAgent {
    name: String,
    pub net: QNetwork,
    pub buffer: ReplayBuffer,
    pub config: LearnerConfig,
    spec: RewardSpec,
    pub epsilon: f64,
    pub train: bool,
    rng: ChaCha8Rng,
    pending: Option<(Vec<f64>, usize)>,
}

impl LearningAgent {
    /// `seed` drives weight init, exploration and replay sampling through
    /// independent streams.
    pub fn new(
        name: impl Into<String>,
        sim: &SimConfig,
        config: LearnerConfig,
        spec: RewardSpec,
        seed: u64,
    ) -> Self {
        let mut init = ChaCha8Rng::seed_from_u64(seed);
        init.set_stream(1);
        let input = config.encoding.len(sim);
        let net = QNetwork::from_config(input, sim.action_count(), &config, &mut init);
        Self {
            name: name.into(),
            net,
            buffer: ReplayBuffer::new(config.replay_capacity, seed ^ 0x9e37_79b9_7f4a_7c15),
            config,
            spec,
            epsilon: 1.0,
            train: true,
            rng: ChaCha8Rng::seed_from_u64(seed),
            pending: None,
        }
    }

    pub fn encoding(&self) -> FeatureEncoding {
        self.config.encoding
    }
}

impl Agent for LearningAgent {
    fn name(&self) -> &str {
        &self.name
    }

    fn act(&mut self, state: &GameState, player: PlayerId) -> Action {
        let features = self.config.encoding.features(state, player);
        let n = state.config.action_count();
        let code = if self.epsilon >= 1.0 {
            select_action(&vec![0.0; n], 1.0, &mut self.rng)
        } else {
            let q = self.net.q_forward(&features).expect("feature length matches network");
            select_action(&q, self.epsilon, &mut self.rng)
        };
        self.pending = Some((features, code));
        Action::from_code(code, &state.config).expect("code in range")
    }

    fn observe(
        &mut self,
        _action: Action,
        reward: f64,
        next: &GameState,
        player: PlayerId,
    ) -> Result<Option<f64>, QError> {
        let Some((state, action)) = self.pending.take() else {
            return Ok(None);
        };
        let reward = match self.config.reward_clip {
            Some(c) => reward.clamp(-c, c),
            None => reward,
        };
        self.buffer.push(Transition {
            state,
            action,
            reward,
            next_state: self.config.encoding.features(next, player),
            done: next.is_over(),
        });
        if self.train && self.buffer.len() >= self.config.batch_size {
            return self.net.train_step(&mut self.buffer, self.config.batch_size).map(Some);
        }
        Ok(None)
    }

    fn reward_spec(&self) -> &RewardSpec {
        &self.spec
    }
}

/// Summary of one finished match.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpisodeStats {
    pub outcome: Outcome,
    pub ticks: u64,
    pub final_income: [i64; 2],
    pub cumulative_reward: [f64; 2],
    /// Mean training loss per player; `None` when the agent did not train.
    pub mean_loss: [Option<f64>; 2],
}

impl EpisodeStats {
    pub fn winner(&self) -> Option<PlayerId> {
        self.outcome.winner()
    }
}

/// Per-tick record handed to [`run_episode_with`] observers.
pub struct TickRecord<'a> {
    pub actions: [Action; 2],
    pub events: &'a [Event],
    pub rewards: [f64; 2],
    pub state: &'a GameState,
}

/// Plays one match to the end.
pub fn run_episode(
    config: &SimConfig,
    seed: u64,
    agents: [&mut dyn Agent; 2],
) -> Result<EpisodeStats, AgentError> {
    run_episode_with(config, seed, agents, |_| {})
}

/// [`run_episode`] with a callback after every tick.
pub fn run_episode_with(
    config: &SimConfig,
    seed: u64,
    agents: [&mut dyn Agent; 2],
    mut on_tick: impl FnMut(&TickRecord<'_>),
) -> Result<EpisodeStats, AgentError> {
    let mut state = GameState::new(config.clone(), seed)?;
    let mut cumulative = [0.0; 2];
    let mut losses = [(0.0, 0u64); 2];
    while !state.is_over() {
        let actions = [agents[0].act(&state, 0), agents[1].act(&state, 1)];
        let prev = state.clone();
        let events = state.step(actions)?;
        let mut rewards = [0.0; 2];
        for p in 0..2 {
            rewards[p] = agents[p].reward_spec().compose(&events, &prev, &state, p).total;
            cumulative[p] += rewards[p];
            if let Some(loss) = agents[p].observe(actions[p], rewards[p], &state, p)? {
                losses[p].0 += loss;
                losses[p].1 += 1;
            }
        }
        on_tick(&TickRecord { actions, events: &events, rewards, state: &state });
    }
    let mean = |(sum, n): (f64, u64)| (n > 0).then(|| sum / n as f64);
    Ok(EpisodeStats {
        outcome: state.outcome.expect("finished"),
        ticks: state.tick,
        final_income: [state.players[0].income, state.players[1].income],
        cumulative_reward: cumulative,
        mean_loss: [mean(losses[0]), mean(losses[1])],
    })
}

/// Runs one episode with `learner` in seat 0 at exploration rate `epsilon`.
pub fn learning_agent_episode(
    config: &SimConfig,
    seed: u64,
    learner: &mut LearningAgent,
    opponent: &mut dyn Agent,
    epsilon: f64,
    train: bool,
) -> Result<EpisodeStats, AgentError> {
    learner.epsilon = epsilon;
    learner.train = train;
    run_episode(config, seed, [learner, opponent])
}
