//! Newline-delimited JSON environment server.
//!
//! Every request line gets exactly one response line. Each connection owns
//! one game; the client plays seat 0 and the server can run a built-in
//! opponent in seat 1.
//!
//! Requests:
//!
//! ```text
//! {"op":"reset","seed":7,"opponent":"random"}    opponent: random | rule_based | none
//! {"op":"step","action":8}                        with a built-in opponent
//! {"op":"step","actions":[8,0]}                   with opponent "none"
//! {"op":"config","tensor":true}                   also send the 5-channel tensor
//! {"op":"close"}
//! ```
//!
//! Responses carry `ok`, and for `reset`/`step` the observation (`gray` as a
//! flat array indexed `column * height + row`, `aux`, optionally `tensor`
//! indexed `(channel * width + column) * height + row`), the composed reward
//! for seat 0, `done` and `info`. Failures set `ok` to false and `error` to a
//! short code; the session stays usable.

use std::io::{self, BufRead, BufReader, Write};
use std::net::{SocketAddr, TcpListener, TcpStream, ToSocketAddrs};
use std::thread;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::action::Action;
use crate::agents::{Agent, RandomAgent, RuleBasedAgent};
use crate::config::SimConfig;
use crate::encoders::{encode_aux, encode_gray_heatmap, encode_tensor};
use crate::experiment::splitmix;
use crate::game::GameState;
use crate::rewards::RewardSpec;

pub const DEFAULT_PORT: u16 = 5533;

#[derive(Clone, Debug)]
pub struct ServerConfig {
    pub sim: SimConfig,
    pub reward: RewardSpec,
}

impl Default for ServerConfig {
    fn default() -> Self {
        Self { sim: SimConfig::default(), reward: RewardSpec::composite() }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
enum Request {
    Reset {
        #[serde(default)]
        seed: u64,
        #[serde(default)]
        opponent: Option<String>,
    },
    Step {
        action: Option<i64>,
        actions: Option<[i64; 2]>,
    },
    Config {
        tensor: Option<bool>,
    },
    Close,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct WireObservation {
    pub gray: Vec<f64>,
    pub aux: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tensor: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct WireInfo {
    pub tick: u64,
    pub healths: [i64; 2],
    pub golds: [i64; 2],
    pub incomes: [i64; 2],
}

#[derive(Debug, Default, Serialize, Deserialize, PartialEq)]
pub struct Response {
    pub ok: bool,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub observation: Option<WireObservation>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub reward: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub done: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub info: Option<WireInfo>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub error: Option<String>,
}

impl Response {
    fn error(code: impl Into<String>) -> Self {
        Self { ok: false, error: Some(code.into()), ..Self::default() }
    }

    fn ok() -> Self {
        Self { ok: true, ..Self::default() }
    }

    pub fn to_line(&self) -> String {
        let mut s = serde_json::to_string(self).expect("response serializes");
        s.push('\n');
        s
    }
}

/// One client's game and settings.
pub struct Session {
    config: ServerConfig,
    game: Option<GameState>,
    opponent: Option<Box<dyn Agent + Send>>,
    send_tensor: bool,
}

impl Session {
    pub fn new(config: ServerConfig) -> Self {
        Self { config, game: None, opponent: None, send_tensor: false }
    }

    /// Handles one request line. The flag is true when the client asked to close.
    pub fn handle_line(&mut self, line: &str) -> (Response, bool) {
        let value: Value = match serde_json::from_str(line) {
            Ok(v) => v,
            Err(_) => return (Response::error("malformed-json"), false),
        };
        let op = value.get("op").and_then(Value::as_str).map(str::to_owned);
        let request: Request = match serde_json::from_value(value) {
            Ok(r) => r,
            Err(_) => {
                return match op.as_deref() {
                    Some("reset" | "step" | "config" | "close") => {
                        (Response::error("bad-request"), false)
                    }
                    Some(other) => (Response::error(format!("unknown-op: {other}")), false),
                    None => (Response::error("missing-op"), false),
                };
            }
        };
        match request {
            Request::Reset { seed, opponent } => (self.reset(seed, opponent.as_deref()), false),
            Request::Step { action, actions } => (self.step(action, actions), false),
            Request::Config { tensor } => {
                if let Some(t) = tensor {
                    self.send_tensor = t;
                }
                (Response::ok(), false)
            }
            Request::Close => (Response::ok(), true),
        }
    }

    fn reset(&mut self, seed: u64, opponent: Option<&str>) -> Response {
        let opponent: Option<Box<dyn Agent + Send>> = match opponent.unwrap_or("none") {
            "none" => None,
            "random" => Some(Box::new(RandomAgent::new(splitmix(seed, 1)))),
            "rule_based" => Some(Box::new(RuleBasedAgent::default())),
            other => return Response::error(format!("unknown-opponent: {other}")),
        };
        let game = match GameState::new(self.config.sim.clone(), seed) {
            Ok(g) => g,
            Err(e) => return Response::error(format!("invalid-config: {e}")),
        };
        self.opponent = opponent;
        let response = self.observe(&game, 0.0);
        self.game = Some(game);
        response
    }

    fn step(&mut self, action: Option<i64>, actions: Option<[i64; 2]>) -> Response {
        let Some(game) = self.game.as_mut() else {
            return Response::error("no-session");
        };
        if game.is_over() {
            return Response::error("episode-over");
        }
        let decode = |code: i64| {
            usize::try_from(code).ok().and_then(|c| Action::from_code(c, &game.config))
        };
        let pair = match (&mut self.opponent, action, actions) {
            (Some(opp), Some(a), None) => decode(a).map(|a| [a, opp.act(game, 1)]),
            (None, None, Some([a, b])) => decode(a).zip(decode(b)).map(|(a, b)| [a, b]),
            (Some(_), _, _) => return Response::error("expected-action"),
            (None, _, _) => return Response::error("expected-actions"),
        };
        let Some(pair) = pair else {
            return Response::error("invalid-action");
        };
        let prev = game.clone();
        let events = game.step(pair).expect("game is running");
        let reward = self.config.reward.compose(&events, &prev, game, 0).total;
        let game = self.game.as_ref().expect("session");
        self.observe(game, reward)
    }

    fn observe(&self, game: &GameState, reward: f64) -> Response {
        let tensor = self.send_tensor.then(|| encode_tensor(game, 0).iter().copied().collect());
        let p = &game.players;
        Response {
            ok: true,
            observation: Some(WireObservation {
                gray: encode_gray_heatmap(game, 0).iter().copied().collect(),
                aux: encode_aux(game, 0).to_vec(),
                tensor,
            }),
            reward: Some(reward),
            done: Some(game.is_over()),
            info: Some(WireInfo {
                tick: game.tick,
                healths: [p[0].health, p[1].health],
                golds: [p[0].gold, p[1].gold],
                incomes: [p[0].income, p[1].income],
            }),
            error: None,
        }
    }
}

/// Serves one session over any line-oriented stream until EOF or `close`.
pub fn serve_stream(config: ServerConfig, input: impl BufRead, mut output: impl Write) -> io::Result<()> {
    let mut session = Session::new(config);
    let mut input = input;
    let mut buf = Vec::new();
    loop {
        buf.clear();
        if input.read_until(b'\n', &mut buf)? == 0 {
            return Ok(());
        }
        let line = String::from_utf8_lossy(&buf);
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let (response, close) = session.handle_line(line);
        output.write_all(response.to_line().as_bytes())?;
        output.flush()?;
        if close {
            return Ok(());
        }
    }
}

/// Serves a single session on stdin/stdout, for embedding as a subprocess.
pub fn serve_stdio(config: ServerConfig) -> io::Result<()> {
    let stdin = io::stdin();
    serve_stream(config, stdin.lock(), io::stdout().lock())
}

pub struct Server {
    listener: TcpListener,
    config: ServerConfig,
}

impl Server {
    pub fn bind(addr: impl ToSocketAddrs, config: ServerConfig) -> io::Result<Self> {
        config.sim.validate().map_err(|e| io::Error::new(io::ErrorKind::InvalidInput, e))?;
        Ok(Self { listener: TcpListener::bind(addr)?, config })
    }

    pub fn local_addr(&self) -> io::Result<SocketAddr> {
        self.listener.local_addr()
    }

    /// Accepts connections forever, one thread and one game per connection.
    pub fn run(self) -> io::Result<()> {
        for stream in self.listener.incoming() {
            let stream = match stream {
                Ok(s) => s,
                Err(e) => {
                    eprintln!("accept failed: {e}");
                    continue;
                }
            };
            let config = self.config.clone();
            thread::spawn(move || {
                if let Err(e) = handle_connection(stream, config) {
                    eprintln!("session ended with error: {e}");
                }
            });
        }
        Ok(())
    }
}

fn handle_connection(stream: TcpStream, config: ServerConfig) -> io::Result<()> {
    let reader = BufReader::new(stream.try_clone()?);
    serve_stream(config, reader, stream)
}
