//! Seeded multi-episode runs, CSV logging, checkpoints and action-log replay.

use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;
use std::thread;

use serde::{Deserialize, Serialize};

use crate::action::Action;
use crate::agents::{
    run_episode, run_episode_with, Agent, AgentError, EpisodeStats, LearningAgent, RandomAgent,
    RuleBasedAgent,
};
use crate::config::{ConfigError, SimConfig};
use crate::frame::export_frame;
use crate::game::{GameError, GameState, Outcome};
use crate::qlearning::{epsilon_at, LearnerConfig, QError};
use crate::rewards::RewardSpec;

pub const CSV_HEADER: &str =
    "episode,winner,ticks,p1_income,p2_income,p1_cum_reward,p2_cum_reward,p1_mean_loss,p2_mean_loss";

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("unknown agent {0:?}; expected random, rule_based, dqn or dqn_reward")]
    UnknownAgent(String),
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Agent(#[from] AgentError),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Learner(#[from] QError),
    #[error("{path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("action log: {0}")]
    ActionLog(String),
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> ExperimentError + '_ {
    move |source| ExperimentError::Io { path: path.to_path_buf(), source }
}

/// SplitMix64 output for `index` in the sequence started at `seed`.
pub fn splitmix(seed: u64, index: u64) -> u64 {
    let mut z = seed.wrapping_add(index.wrapping_add(1).wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum AgentKind {
    Random,
    RuleBased,
    /// Q-learner trained on the terminal reward only.
    Dqn,
    /// Q-learner trained on the composite reward.
    DqnReward,
}

impl AgentKind {
    pub const ALL: [AgentKind; 4] =
        [AgentKind::Random, AgentKind::RuleBased, AgentKind::Dqn, AgentKind::DqnReward];

    pub fn name(self) -> &'static str {
        match self {
            AgentKind::Random => "random",
            AgentKind::RuleBased => "rule_based",
            AgentKind::Dqn => "dqn",
            AgentKind::DqnReward => "dqn_reward",
        }
    }

    pub fn is_learner(self) -> bool {
        matches!(self, AgentKind::Dqn | AgentKind::DqnReward)
    }
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AgentKind {
    type Err = ExperimentError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| ExperimentError::UnknownAgent(s.to_owned()))
    }
}

/// Everything a run reads from its config file. All sections are optional.
///
/// ```json
/// {
///   "game": { "max_episode_seconds": 60 },
///   "learner": { "hidden": 0, "learning_rate": 0.001 },
///   "reward": [ { "name": "terminal", "weight": 1.0 }, { "name": "leak_damage", "weight": 0.05 } ]
/// }
/// ```
///
/// `reward` replaces the composite spec used by `dqn_reward`; `dqn` always
/// trains on the terminal reward alone.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub game: SimConfig,
    pub learner: LearnerConfig,
    pub reward: Option<RewardSpec>,
}

impl ExperimentConfig {
    pub fn from_json_str(text: &str) -> Result<Self, ConfigError> {
        let config: Self =
            serde_json::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.game.validate()?;
        Ok(config)
    }

    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        Self::from_json_str(&text)
    }

    pub fn composite_spec(&self) -> RewardSpec {
        self.reward.clone().unwrap_or_else(RewardSpec::composite)
    }
}

/// One CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeRecord {
    pub episode: u64,
    pub seed: u64,
    pub stats: EpisodeStats,
}

impl EpisodeRecord {
    pub fn winner_label(&self) -> &'static str {
        match self.stats.outcome {
            Outcome::Winner(0) => "p1",
            Outcome::Winner(_) => "p2",
            Outcome::Draw => "draw",
        }
    }

    pub fn csv_fields(&self) -> [String; 9] {
        let s = &self.stats;
        let loss = |l: Option<f64>| l.map(|v| v.to_string()).unwrap_or_default();
        [
            self.episode.to_string(),
            self.winner_label().to_owned(),
            s.ticks.to_string(),
            s.final_income[0].to_string(),
            s.final_income[1].to_string(),
            s.cumulative_reward[0].to_string(),
            s.cumulative_reward[1].to_string(),
            loss(s.mean_loss[0]),
            loss(s.mean_loss[1]),
        ]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Summary {
    pub episodes: u64,
    /// Wins for seat 1, seat 2, then draws.
    pub wins: [u64; 3],
    /// Mean final income per seat over the last (up to) 100 episodes.
    pub mean_income_last_100: [f64; 2],
}

impl Summary {
    pub fn from_records(records: &[EpisodeRecord]) -> Self {
        let mut wins = [0; 3];
        for r in records {
            match r.stats.outcome {
                Outcome::Winner(p) => wins[p] += 1,
                Outcome::Draw => wins[2] += 1,
            }
        }
        let tail = &records[records.len().saturating_sub(100)..];
        let mean = |p: usize| {
            if tail.is_empty() {
                0.0
            } else {
                tail.iter().map(|r| r.stats.final_income[p] as f64).sum::<f64>() / tail.len() as f64
            }
        };
        Self { episodes: records.len() as u64, wins, mean_income_last_100: [mean(0), mean(1)] }
    }
}

impl fmt::Display for Summary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "episodes: {}", self.episodes)?;
        writeln!(
            f,
            "wins: p1 {} / p2 {} / draw {}",
            self.wins[0], self.wins[1], self.wins[2]
        )?;
        write!(
            f,
            "mean income (last 100): p1 {:.2} / p2 {:.2}",
            self.mean_income_last_100[0], self.mean_income_last_100[1]
        )
    }
}

#[derive(Clone, Debug)]
pub struct RunSpec {
    pub config: ExperimentConfig,
    pub agents: [AgentKind; 2],
    pub episodes: u64,
    pub seed: u64,
}

pub struct RunResult {
    pub records: Vec<EpisodeRecord>,
    pub summary: Summary,
    /// Trained learners by seat, for checkpointing.
    pub learners: [Option<LearningAgent>; 2],
}

/// Seed for the agent in `seat` during episode `seed`'s match. Non-learners
/// are rebuilt per episode so any single episode can be replayed alone.
fn agent_seed(episode_seed: u64, seat: usize) -> u64 {
    splitmix(episode_seed, 1 + seat as u64)
}

fn learner_seed(run_seed: u64, seat: usize) -> u64 {
    splitmix(run_seed, u64::MAX - seat as u64)
}

fn fixed_agent(kind: AgentKind, seed: u64) -> Box<dyn Agent + Send> {
    match kind {
        AgentKind::Random => Box::new(RandomAgent::new(seed)),
        AgentKind::RuleBased => Box::new(RuleBasedAgent::default()),
        AgentKind::Dqn | AgentKind::DqnReward => unreachable!("learners persist across episodes"),
    }
}

pub fn new_learner(kind: AgentKind, config: &ExperimentConfig, seed: u64) -> LearningAgent {
    let spec = match kind {
        AgentKind::Dqn => RewardSpec::terminal_only(),
        _ => config.composite_spec(),
    };
    LearningAgent::new(kind.name(), &config.game, config.learner.clone(), spec, seed)
}

/// Runs every episode. Learners keep their weights and replay buffer for the
/// whole run and explore on the linear schedule; runs without learners are
/// spread over worker threads, which changes nothing in the output.
pub fn run(spec: &RunSpec) -> Result<RunResult, ExperimentError> {
    spec.config.game.validate()?;
    let mut learners: [Option<LearningAgent>; 2] = [0, 1].map(|seat| {
        let kind = spec.agents[seat];
        kind.is_learner().then(|| new_learner(kind, &spec.config, learner_seed(spec.seed, seat)))
    });
    let records = if learners.iter().all(Option::is_none) {
        run_parallel(spec)?
    } else {
        let mut records = Vec::with_capacity(spec.episodes as usize);
        for e in 0..spec.episodes {
            let seed = splitmix(spec.seed, e);
            let epsilon = epsilon_at(e, spec.episodes);
            let mut fixed: [Option<Box<dyn Agent + Send>>; 2] = [0, 1].map(|seat| {
                let kind = spec.agents[seat];
                (!kind.is_learner()).then(|| fixed_agent(kind, agent_seed(seed, seat)))
            });
            let [l0, l1] = &mut learners;
            let [f0, f1] = &mut fixed;
            let a0: &mut dyn Agent = pick(l0, f0, epsilon);
            let a1: &mut dyn Agent = pick(l1, f1, epsilon);
            let stats = run_episode(&spec.config.game, seed, [a0, a1])?;
            records.push(EpisodeRecord { episode: e, seed, stats });
        }
        records
    };
    let summary = Summary::from_records(&records);
    Ok(RunResult { records, summary, learners })
}

fn pick<'a>(
    learner: &'a mut Option<LearningAgent>,
    fixed: &'a mut Option<Box<dyn Agent + Send>>,
    epsilon: f64,
) -> &'a mut dyn Agent {
    match learner {
        Some(l) => {
            l.epsilon = epsilon;
            l.train = true;
            l
        }
        None => fixed.as_deref_mut().expect("one of the two is set"),
    }
}

fn run_parallel(spec: &RunSpec) -> Result<Vec<EpisodeRecord>, ExperimentError> {
    let workers = thread::available_parallelism().map_or(1, |n| n.get()).min(16) as u64;
    let chunk = spec.episodes.div_ceil(workers.max(1)).max(1);
    let results: Vec<Result<Vec<EpisodeRecord>, ExperimentError>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..spec.episodes)
            .step_by(chunk as usize)
            .map(|start| {
                let end = (start + chunk).min(spec.episodes);
                scope.spawn(move || {
                    (start..end)
                        .map(|e| {
                            let seed = splitmix(spec.seed, e);
                            let mut a = fixed_agent(spec.agents[0], agent_seed(seed, 0));
                            let mut b = fixed_agent(spec.agents[1], agent_seed(seed, 1));
                            let stats =
                                run_episode(&spec.config.game, seed, [a.as_mut(), b.as_mut()])?;
                            Ok(EpisodeRecord { episode: e, seed, stats })
                        })
                        .collect()
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut records = Vec::with_capacity(spec.episodes as usize);
    for r in results {
        records.extend(r?);
    }
    Ok(records)
}

pub fn write_csv(records: &[EpisodeRecord], out: impl Write) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CSV_HEADER.split(','))?;
    for r in records {
        w.write_record(r.csv_fields())?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `episodes.csv`, one checkpoint per learner (`p1_dqn.json`, ...)
/// and `summary.json` into `dir`. Returns the written paths.
pub fn write_outputs(result: &RunResult, dir: &Path) -> Result<Vec<PathBuf>, ExperimentError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let csv_path = dir.join("episodes.csv");
    let file = fs::File::create(&csv_path).map_err(io_err(&csv_path))?;
    write_csv(&result.records, io::BufWriter::new(file)).map_err(|e| ExperimentError::Io {
        path: csv_path.clone(),
        source: e.into(),
    })?;
    written.push(csv_path);
    for (seat, learner) in result.learners.iter().enumerate() {
        if let Some(l) = learner {
            let path = dir.join(format!("p{}_{}.json", seat + 1, l.name()));
            l.net.save(&path).map_err(io_err(&path))?;
            written.push(path);
        }
    }
    let summary_path = dir.join("summary.json");
    let text = serde_json::to_string_pretty(&result.summary).expect("summary serializes");
    fs::write(&summary_path, text + "\n").map_err(io_err(&summary_path))?;
    written.push(summary_path);
    Ok(written)
}

/// Both players' action codes for every tick of one game, enough to replay
/// it exactly.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ActionLog {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    pub config: SimConfig,
    pub actions: Vec<[usize; 2]>,
}

impl ActionLog {
    pub const FORMAT: &'static str = "linewars-actions";
    pub const VERSION: u32 = 1;

    pub fn new(config: SimConfig, seed: u64) -> Self {
        Self {
            format: Self::FORMAT.to_owned(),
            version: Self::VERSION,
            seed,
            config,
            actions: Vec::new(),
        }
    }

    pub fn push(&mut self, actions: [Action; 2]) {
        self.actions.push(actions.map(|a| a.code(&self.config)));
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("action log serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, ExperimentError> {
        let log: Self =
            serde_json::from_str(text).map_err(|e| ExperimentError::ActionLog(e.to_string()))?;
        if log.format != Self::FORMAT || log.version != Self::VERSION {
            return Err(ExperimentError::ActionLog(format!(
                "expected {} v{}, found {} v{}",
                Self::FORMAT,
                Self::VERSION,
                log.format,
                log.version
            )));
        }
        log.config.validate()?;
        Ok(log)
    }

    /// Replays the log, calling `visit` on the initial state and after every tick.
    pub fn replay(&self, mut visit: impl FnMut(&GameState)) -> Result<GameState, ExperimentError> {
        let mut state = GameState::new(self.config.clone(), self.seed)?;
        visit(&state);
        for (i, codes) in self.actions.iter().enumerate() {
            let decode = |c: usize| {
                Action::from_code(c, &self.config).ok_or_else(|| {
                    ExperimentError::ActionLog(format!("tick {}: invalid action code {c}", i + 1))
                })
            };
            state.step([decode(codes[0])?, decode(codes[1])?])?;
            visit(&state);
        }
        Ok(state)
    }
}

/// Plays one match and records its action log.
pub fn play_logged(
    config: &SimConfig,
    seed: u64,
    agents: [&mut dyn Agent; 2],
    mut on_tick: impl FnMut(&crate::agents::TickRecord<'_>),
) -> Result<(EpisodeStats, ActionLog), ExperimentError> {
    let mut log = ActionLog::new(config.clone(), seed);
    let stats = run_episode_with(config, seed, agents, |rec| {
        log.push(rec.actions);
        on_tick(rec);
    })?;
    Ok((stats, log))
}

/// Writes frames for tick 0 and every `every`-th tick of the replay.
pub fn export_frames(
    log: &ActionLog,
    dir: &Path,
    every: u64,
    episode: u64,
    perspective: usize,
) -> Result<Vec<PathBuf>, ExperimentError> {
    assert!(every > 0, "frame interval must be positive");
    fs::create_dir_all(dir).map_err(io_err(dir))?;
    let mut written = Vec::new();
    let mut failure = None;
    log.replay(|state| {
        if failure.is_none() && state.tick % every == 0 {
            match export_frame(dir, episode, state, perspective) {
                Ok(paths) => written.extend(paths),
                Err(e) => failure = Some(e),
            }
        }
    })?;
    match failure {
        Some(e) => Err(ExperimentError::Io { path: dir.to_path_buf(), source: e }),
        None => Ok(written),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn splitmix_reference_values() {
        // First outputs of the reference SplitMix64 generator seeded with 0.
        assert_eq!(splitmix(0, 0), 0xe220_a839_7b1d_cdaf);
        assert_eq!(splitmix(0, 1), 0x6e78_9e6a_a1b9_65f4);
        assert_ne!(splitmix(1, 0), splitmix(0, 0));
    }

    #[test]
    fn agent_names_round_trip() {
        for k in AgentKind::ALL {
            assert_eq!(k.name().parse::<AgentKind>().unwrap(), k);
        }
        assert!(matches!("dqn2".parse::<AgentKind>(), Err(ExperimentError::UnknownAgent(_))));
    }

    #[test]
    fn config_sections_are_optional() {
        let c = ExperimentConfig::from_json_str("{}").unwrap();
        assert_eq!(c, ExperimentConfig::default());
        let c = ExperimentConfig::from_json_str(
            r#"{"game":{"max_episode_seconds":60},"reward":[{"name":"terminal","weight":2.0}]}"#,
        )
        .unwrap();
        assert_eq!(c.game.max_episode_seconds, 60);
        assert_eq!(c.composite_spec(), RewardSpec::terminal_only().scaled(2.0));
        assert!(ExperimentConfig::from_json_str(r#"{"gmae":{}}"#).is_err());
        assert!(ExperimentConfig::from_json_str(r#"{"game":{"grid_width":0}}"#).is_err());
    }

    #[test]
    fn summary_tallies() {
        let rec = |e, outcome, inc| EpisodeRecord {
            episode: e,
            seed: 0,
            stats: EpisodeStats {
                outcome,
                ticks: 1,
                final_income: [inc, 0],
                cumulative_reward: [0.0; 2],
                mean_loss: [None; 2],
            },
        };
        let records: Vec<_> = (0..150)
            .map(|e| {
                let o = match e % 3 {
                    0 => Outcome::Winner(0),
                    1 => Outcome::Winner(1),
                    _ => Outcome::Draw,
                };
                rec(e, o, if e < 50 { 0 } else { 30 })
            })
            .collect();
        let s = Summary::from_records(&records);
        assert_eq!(s.wins, [50, 50, 50]);
        assert_eq!(s.mean_income_last_100, [30.0, 0.0]);
    }

    #[test]
    fn csv_row_format() {
        let r = EpisodeRecord {
            episode: 3,
            seed: 0,
            stats: EpisodeStats {
                outcome: Outcome::Winner(1),
                ticks: 42,
                final_income: [20, 25],
                cumulative_reward: [-0.5, 1.25],
                mean_loss: [Some(0.125), None],
            },
        };
        let mut out = Vec::new();
        write_csv(&[r], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(text, format!("{CSV_HEADER}\n3,p2,42,20,25,-0.5,1.25,0.125,\n"));
    }

    #[test]
    fn frames_every_k_ticks_include_tick_zero() {
        let mut log = ActionLog::new(SimConfig::default(), 5);
        log.actions = vec![[0, 0]; 100];
        let dir = tempfile::tempdir().unwrap();
        let paths = export_frames(&log, dir.path(), 10, 0, 0).unwrap();
        assert_eq!(paths.len(), 22);
        assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 22);
        assert!(dir.path().join("0_0.ppm").exists());
        assert!(dir.path().join("0_100.pgm").exists());
    }

    #[test]
    fn action_log_replay_matches_play() {
        let config = SimConfig { max_episode_seconds: 20, ..SimConfig::default() };
        let mut a = RandomAgent::new(1);
        let mut b = RuleBasedAgent::default();
        let mut hashes = vec![];
        let (_, log) = play_logged(&config, 9, [&mut a, &mut b], |r| hashes.push(r.state.state_hash()))
            .unwrap();
        let text = log.to_json();
        let back = ActionLog::from_json(&text).unwrap();
        let mut replayed = vec![];
        back.replay(|s| replayed.push(s.state_hash())).unwrap();
        assert_eq!(replayed[1..], hashes[..]);
        let bad = text.replace("linewars-actions", "other");
        assert!(ActionLog::from_json(&bad).is_err());
    }
}
