use std::fs;
use std::io::{self, Write};
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use linewars::agents::{Agent, RandomAgent, RuleBasedAgent};
use linewars::experiment::{
    self, export_frames, new_learner, play_logged, write_outputs, ActionLog, AgentKind,
    ExperimentConfig, RunSpec,
};
use linewars::qlearning::QNetwork;
use linewars::server::{self, Server, ServerConfig};

#[derive(Parser)]
#[command(name = "linewars", version, about = "Line-wars environment, agents and experiment driver")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run many seeded episodes and write episodes.csv, checkpoints and a summary.
    Run(RunArgs),
    /// Play one match, printing every event.
    Play(PlayArgs),
    /// Start the JSON-lines environment server.
    Serve(ServeArgs),
    /// Replay an action log and write PPM/PGM frames.
    ExportFrames(ExportArgs),
}

#[derive(Args)]
struct ConfigArg {
    /// Experiment config (JSON). Defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
}

impl ConfigArg {
    fn load(&self) -> Result<ExperimentConfig> {
        match &self.config {
            Some(p) => ExperimentConfig::from_json_file(p)
                .with_context(|| format!("loading {}", p.display())),
            None => Ok(ExperimentConfig::default()),
        }
    }
}

#[derive(Args)]
struct RunArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long)]
    agent1: AgentKind,
    #[arg(long)]
    agent2: AgentKind,
    #[arg(long)]
    episodes: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlayArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "rule_based")]
    agent1: AgentKind,
    #[arg(long, default_value = "random")]
    agent2: AgentKind,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Checkpoint for a dqn agent in seat 1; untrained weights otherwise.
    #[arg(long)]
    load1: Option<PathBuf>,
    #[arg(long)]
    load2: Option<PathBuf>,
    /// Write the action log here for export-frames.
    #[arg(long)]
    log: Option<PathBuf>,
    /// Print only the final result.
    #[arg(long)]
    quiet: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    config: ConfigArg,
    #[arg(long, default_value = "127.0.0.1")]
    host: String,
    #[arg(long, default_value_t = server::DEFAULT_PORT)]
    port: u16,
    /// Serve one session on stdin/stdout instead of TCP.
    #[arg(long)]
    stdio: bool,
}

#[derive(Args)]
struct ExportArgs {
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Frame interval in ticks.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    every: u64,
    #[arg(long, default_value_t = 0, value_parser = clap::value_parser!(u64).range(0..2))]
    perspective: u64,
    /// Episode number used in file names.
    #[arg(long, default_value_t = 0)]
    episode: u64,
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::Run(args) => run(args),
        Command::Play(args) => play(args),
        Command::Serve(args) => serve(args),
        Command::ExportFrames(args) => export(args),
    }
}

fn run(args: RunArgs) -> Result<()> {
    let spec = RunSpec {
        config: args.config.load()?,
        agents: [args.agent1, args.agent2],
        episodes: args.episodes,
        seed: args.seed,
    };
    fs::create_dir_all(&args.out)
        .with_context(|| format!("creating output dir {}", args.out.display()))?;
    let result = experiment::run(&spec)?;
    let written = write_outputs(&result, &args.out)?;
    println!("{}", result.summary);
    for p in written {
        println!("wrote {}", p.display());
    }
    Ok(())
}

fn seat_agent(
    kind: AgentKind,
    config: &ExperimentConfig,
    seed: u64,
    seat: u64,
    checkpoint: Option<&PathBuf>,
) -> Result<Box<dyn Agent>> {
    let agent_seed = experiment::splitmix(seed, 1 + seat);
    Ok(match kind {
        AgentKind::Random => Box::new(RandomAgent::new(agent_seed)),
        AgentKind::RuleBased => Box::new(RuleBasedAgent::default()),
        AgentKind::Dqn | AgentKind::DqnReward => {
            let mut learner = new_learner(kind, config, agent_seed);
            if let Some(path) = checkpoint {
                let net = QNetwork::load(path)
                    .with_context(|| format!("loading checkpoint {}", path.display()))?;
                if net.params().len() != learner.net.params().len()
                    || net.input_len() != learner.net.input_len()
                {
                    bail!("checkpoint {} does not match the configured network", path.display());
                }
                learner.net = net;
            }
            learner.epsilon = 0.0;
            learner.train = false;
            Box::new(learner)
        }
    })
}

fn play(args: PlayArgs) -> Result<()> {
    let config = args.config.load()?;
    if (args.load1.is_some() && !args.agent1.is_learner())
        || (args.load2.is_some() && !args.agent2.is_learner())
    {
        bail!("checkpoints apply only to dqn and dqn_reward seats");
    }
    let mut a = seat_agent(args.agent1, &config, args.seed, 0, args.load1.as_ref())?;
    let mut b = seat_agent(args.agent2, &config, args.seed, 1, args.load2.as_ref())?;
    let stdout = io::stdout();
    let mut out = io::BufWriter::new(stdout.lock());
    let quiet = args.quiet;
    let mut write_err = None;
    let (stats, log) = play_logged(&config.game, args.seed, [a.as_mut(), b.as_mut()], |rec| {
        if quiet || write_err.is_some() {
            return;
        }
        for e in rec.events {
            if let Err(e) = writeln!(out, "{}", e.to_json_line()) {
                write_err = Some(e);
                return;
            }
        }
    })?;
    if let Some(e) = write_err {
        return Err(e.into());
    }
    writeln!(out, "{}", serde_json::to_string(&stats)?)?;
    let winner = match stats.winner() {
        Some(p) => format!("p{} ({})", p + 1, [args.agent1, args.agent2][p]),
        None => "draw".to_owned(),
    };
    writeln!(out, "winner: {winner} after {} ticks", stats.ticks)?;
    out.flush()?;
    if let Some(path) = args.log {
        fs::write(&path, log.to_json())
            .with_context(|| format!("writing action log {}", path.display()))?;
    }
    Ok(())
}

fn serve(args: ServeArgs) -> Result<()> {
    let config = args.config.load()?;
    let server_config = ServerConfig { reward: config.composite_spec(), sim: config.game };
    if args.stdio {
        return Ok(server::serve_stdio(server_config)?);
    }
    let server = Server::bind((args.host.as_str(), args.port), server_config)?;
    eprintln!("listening on {}", server.local_addr()?);
    Ok(server.run()?)
}

fn export(args: ExportArgs) -> Result<()> {
    let text = fs::read_to_string(&args.log)
        .with_context(|| format!("reading action log {}", args.log.display()))?;
    let log = ActionLog::from_json(&text)?;
    let paths = export_frames(&log, &args.out, args.every, args.episode, args.perspective as usize)?;
    println!("wrote {} frames to {}", paths.len() / 2, args.out.display());
    Ok(())
}
