//! The match simulation.
//!
//! A [`GameState`] advances one fixed tick at a time through [`GameState::step`].
//! All positions are integer milli-cells and all randomness comes from
//! per-player ChaCha streams seeded at [`GameState::new`], so a given config,
//! seed and action sequence always produce the same sequence of
//! [`state_hash`](GameState::state_hash) values.
//!
//! Phase order inside a tick:
//!
//! 1. both players' actions (each only touches its own cursor, gold and entities)
//! 2. units walk towards the enemy edge
//! 3. units on the enemy goal column leak and cost the enemy one health each
//! 4. towers pick the nearest enemy in range (lowest uid on ties) and fire
//! 5. projectiles fly at their target; within half a cell they hit
//! 6. dead units are removed and their killer is paid a bounty
//! 7. income is paid every `income_interval_seconds`
//! 8. terminal check

mod entities;
mod event;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::action::Action;
use crate::config::{ConfigError, SimConfig, MILLI};

pub use entities::{opponent, Cell, Outcome, PlayerId, PlayerState, Projectile, Tower, Unit};
pub use event::{Event, EventKind, RejectReason};

/// Version tag of the JSON state document.
pub const STATE_FORMAT_VERSION: u32 = 1;

const HIT_RADIUS: i64 = MILLI / 2;

#[derive(Debug, Error, PartialEq)]
pub enum GameError {
    #[error(transparent)]
    InvalidConfig(#[from] ConfigError),
    #[error("step called on a finished game")]
    StepAfterTerminal,
    #[error("state document: {0}")]
    Document(String),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub config: SimConfig,
    pub tick: u64,
    pub players: [PlayerState; 2],
    pub units: Vec<Unit>,
    pub towers: Vec<Tower>,
    pub projectiles: Vec<Projectile>,
    /// Per-player spawn counters. Unit ids are `2 * n + owner`, tower ids likewise.
    unit_seq: [u64; 2],
    tower_seq: [u64; 2],
    next_pid: u64,
    rngs: [ChaCha8Rng; 2],
    pub outcome: Option<Outcome>,
    /// Events of the most recent tick.
    pub events: Vec<Event>,
}

#[derive(Serialize, Deserialize)]
struct StateDocument<S> {
    format: String,
    version: u32,
    state: S,
}

impl GameState {
    pub fn new(config: SimConfig, seed: u64) -> Result<Self, GameError> {
        config.validate()?;
        let w = config.grid_width;
        let mid_row = config.grid_height / 2;
        let player = |col| PlayerState {
            health: config.initial_health,
            gold: config.initial_gold,
            income: config.initial_income,
            cursor: Cell::new(col, mid_row),
            units_sent: 0,
            units_lost: 0,
            damage_dealt: 0,
        };
        let players = [player(w / 4), player(w - 1 - w / 4)];
        let rng = |stream| {
            let mut r = ChaCha8Rng::seed_from_u64(seed);
            r.set_stream(stream);
            r
        };
        Ok(Self {
            config,
            tick: 0,
            players,
            units: Vec::new(),
            towers: Vec::new(),
            projectiles: Vec::new(),
            unit_seq: [0; 2],
            tower_seq: [0; 2],
            next_pid: 0,
            rngs: [rng(0), rng(1)],
            outcome: None,
            events: Vec::new(),
        })
    }

    pub fn is_over(&self) -> bool {
        self.outcome.is_some()
    }

    /// Advances one tick. Returns the tick's events, which are also kept in
    /// [`GameState::events`].
    pub fn step(&mut self, actions: [Action; 2]) -> Result<Vec<Event>, GameError> {
        if self.outcome.is_some() {
            return Err(GameError::StepAfterTerminal);
        }
        self.tick += 1;
        let mut events = Vec::new();
        for (player, action) in actions.into_iter().enumerate() {
            events.extend(self.apply_action(player, action));
        }
        self.move_units(&mut events);
        self.fire_towers();
        let kills = self.advance_projectiles(&mut events);
        self.remove_dead(&kills, &mut events);
        self.pay_income(&mut events);
        self.outcome = self.is_terminal();
        self.events.clone_from(&events);
        Ok(events)
    }

    /// Applies one player's action to its own cursor, gold and entities.
    ///
    /// Actions that cannot be carried out become a `Rejected` event and leave
    /// the state untouched.
    pub fn apply_action(&mut self, player: PlayerId, action: Action) -> Vec<Event> {
        let tick = self.tick;
        let reject = |reason| {
            vec![Event {
                tick,
                kind: EventKind::Rejected { player, action: action.to_string(), reason },
            }]
        };
        let (w, h) = (self.config.grid_width, self.config.grid_height);
        let forward: i64 = if player == 0 { 1 } else { -1 };
        match action {
            Action::NoOp => Vec::new(),
            Action::CursorUp | Action::CursorDown | Action::CursorLeft | Action::CursorRight => {
                let cursor = self.players[player].cursor;
                let (dc, dr) = match action {
                    Action::CursorUp => (0, -1),
                    Action::CursorDown => (0, 1),
                    Action::CursorLeft => (-forward, 0),
                    _ => (forward, 0),
                };
                let col = i64::from(cursor.col) + dc;
                let row = i64::from(cursor.row) + dr;
                if col < 0 || col >= i64::from(w) || row < 0 || row >= i64::from(h) {
                    return reject(RejectReason::Clamped);
                }
                self.players[player].cursor = Cell::new(col as u32, row as u32);
                Vec::new()
            }
            Action::BuildTower(kind) => {
                let Some(spec) = self.config.tower_roster.get(usize::from(kind)) else {
                    return reject(RejectReason::UnknownKind);
                };
                let cost = spec.gold_cost;
                let cell = self.players[player].cursor;
                if !self.config.buildable_columns[player].contains(cell.col) {
                    return reject(RejectReason::NotBuildable);
                }
                if self.tower_at(cell).is_some() {
                    return reject(RejectReason::Occupied);
                }
                if self.players[player].gold < cost {
                    return reject(RejectReason::InsufficientGold);
                }
                self.players[player].gold -= cost;
                let tid = 2 * self.tower_seq[player] + player as u64;
                self.tower_seq[player] += 1;
                let at = self.towers.partition_point(|t| t.tid < tid);
                self.towers.insert(
                    at,
                    Tower { tid, owner: player, kind, cell, cooldown_remaining: 0 },
                );
                vec![Event {
                    tick,
                    kind: EventKind::TowerBuilt { player, tid, kind, cell, cost },
                }]
            }
            Action::SendUnit(kind) => {
                let Some(spec) = self.config.unit_roster.get(usize::from(kind)) else {
                    return reject(RejectReason::UnknownKind);
                };
                let (cost, max_health) = (spec.gold_cost, spec.max_health);
                if self.players[player].gold < cost {
                    return reject(RejectReason::InsufficientGold);
                }
                let income_gain = self.config.income_gain(cost);
                let row = self.rngs[player].gen_range(0..h);
                let x = if player == 0 { 0 } else { self.config.last_column_milli() };
                let uid = 2 * self.unit_seq[player] + player as u64;
                self.unit_seq[player] += 1;
                let p = &mut self.players[player];
                p.gold -= cost;
                p.income += income_gain;
                p.units_sent += 1;
                let at = self.units.partition_point(|u| u.uid < uid);
                self.units.insert(
                    at,
                    Unit { uid, owner: player, kind, x, row, health: max_health },
                );
                vec![Event {
                    tick,
                    kind: EventKind::UnitSpawned { player, uid, kind, row, cost, income_gain },
                }]
            }
        }
    }

    fn move_units(&mut self, events: &mut Vec<Event>) {
        let goal = self.config.last_column_milli();
        let tps = self.config.ticks_per_second;
        for unit in &mut self.units {
            let speed = self.config.unit_roster[usize::from(unit.kind)].speed_per_tick(tps);
            unit.x = if unit.owner == 0 {
                (unit.x + speed).min(goal)
            } else {
                (unit.x - speed).max(0)
            };
        }
        let tick = self.tick;
        let players = &mut self.players;
        self.units.retain(|unit| {
            let leaked = if unit.owner == 0 { unit.x >= goal } else { unit.x <= 0 };
            if leaked {
                players[opponent(unit.owner)].health -= 1;
                players[unit.owner].damage_dealt += 1;
                events.push(Event {
                    tick,
                    kind: EventKind::UnitLeaked { uid: unit.uid, owner: unit.owner, damage: 1 },
                });
            }
            !leaked
        });
    }

    fn fire_towers(&mut self) {
        let tps = self.config.ticks_per_second;
        for tower in &mut self.towers {
            if tower.cooldown_remaining > 0 {
                tower.cooldown_remaining -= 1;
            }
            if tower.cooldown_remaining > 0 {
                continue;
            }
            let spec = &self.config.tower_roster[usize::from(tower.kind)];
            let range = spec.range_milli();
            let (tx, ty) = tower.center();
            let target = self
                .units
                .iter()
                .filter(|u| u.owner != tower.owner && u.health > 0)
                .map(|u| {
                    let (dx, dy) = (u.x - tx, u.y() - ty);
                    (dx * dx + dy * dy, u.uid)
                })
                .filter(|&(d2, _)| d2 <= range * range)
                .min();
            if let Some((_, uid)) = target {
                self.projectiles.push(Projectile {
                    pid: self.next_pid,
                    owner: tower.owner,
                    target_uid: uid,
                    x: tx,
                    y: ty,
                    damage: spec.damage,
                    speed: spec.projectile_speed_per_tick(tps),
                });
                self.next_pid += 1;
                tower.cooldown_remaining = spec.cooldown_ticks;
            }
        }
    }

    /// Returns `(uid, killer)` for every unit killed this tick.
    fn advance_projectiles(&mut self, events: &mut Vec<Event>) -> Vec<(u64, PlayerId)> {
        let tick = self.tick;
        let mut kills = Vec::new();
        let units = &mut self.units;
        self.projectiles.retain_mut(|proj| {
            let Ok(idx) = units.binary_search_by_key(&proj.target_uid, |u| u.uid) else {
                return false;
            };
            let target = &mut units[idx];
            if target.health <= 0 {
                return false;
            }
            let (tx, ty) = (target.x, target.y());
            let (dx, dy) = (tx - proj.x, ty - proj.y);
            let dist = (dx * dx + dy * dy).isqrt();
            if dist <= proj.speed {
                proj.x = tx;
                proj.y = ty;
            } else {
                proj.x += dx * proj.speed / dist;
                proj.y += dy * proj.speed / dist;
            }
            let (dx, dy) = (tx - proj.x, ty - proj.y);
            if dx * dx + dy * dy > HIT_RADIUS * HIT_RADIUS {
                return true;
            }
            target.health -= proj.damage;
            events.push(Event {
                tick,
                kind: EventKind::ProjectileHit {
                    pid: proj.pid,
                    owner: proj.owner,
                    target_uid: proj.target_uid,
                    damage: proj.damage,
                },
            });
            if target.health <= 0 {
                kills.push((target.uid, proj.owner));
            }
            false
        });
        kills
    }

    fn remove_dead(&mut self, kills: &[(u64, PlayerId)], events: &mut Vec<Event>) {
        for &(uid, killer) in kills {
            let idx = self
                .units
                .binary_search_by_key(&uid, |u| u.uid)
                .expect("killed unit is present");
            let unit = self.units.remove(idx);
            let cost = self.config.unit_roster[usize::from(unit.kind)].gold_cost;
            let bounty = self.config.kill_bounty(cost);
            self.players[killer].gold += bounty;
            self.players[unit.owner].units_lost += 1;
            events.push(Event {
                tick: self.tick,
                kind: EventKind::UnitDied { uid, owner: unit.owner, killer, bounty },
            });
        }
    }

    fn pay_income(&mut self, events: &mut Vec<Event>) {
        if self.tick == 0 || self.tick % self.config.income_interval_ticks() != 0 {
            return;
        }
        for (player, p) in self.players.iter_mut().enumerate() {
            p.gold += p.income;
            events.push(Event {
                tick: self.tick,
                kind: EventKind::IncomePaid { player, amount: p.income },
            });
        }
    }

    /// Result of the match if it is over: a player wins once the opponent's
    /// health is gone; at the time limit the healthier player wins and equal
    /// health is a draw.
    pub fn is_terminal(&self) -> Option<Outcome> {
        let (h0, h1) = (self.players[0].health, self.players[1].health);
        if h0 > 0 && h1 > 0 && self.tick < self.config.max_ticks() {
            return None;
        }
        Some(match h0.cmp(&h1) {
            std::cmp::Ordering::Greater => Outcome::Winner(0),
            std::cmp::Ordering::Less => Outcome::Winner(1),
            std::cmp::Ordering::Equal => Outcome::Draw,
        })
    }

    pub fn tower_at(&self, cell: Cell) -> Option<&Tower> {
        self.towers.iter().find(|t| t.cell == cell)
    }

    pub fn unit(&self, uid: u64) -> Option<&Unit> {
        self.units.binary_search_by_key(&uid, |u| u.uid).ok().map(|i| &self.units[i])
    }

    /// Places a unit directly. Intended for scripted scenarios and tests; the
    /// unit gets the next id of its owner and no gold changes hands.
    pub fn spawn_unit_at(&mut self, owner: PlayerId, kind: u8, x: i64, row: u32) -> u64 {
        let uid = 2 * self.unit_seq[owner] + owner as u64;
        self.unit_seq[owner] += 1;
        let health = self.config.unit_roster[usize::from(kind)].max_health;
        let at = self.units.partition_point(|u| u.uid < uid);
        self.units.insert(at, Unit { uid, owner, kind, x, row, health });
        uid
    }

    /// Places a tower directly, free of charge. Intended for scripted scenarios.
    pub fn place_tower(&mut self, owner: PlayerId, kind: u8, cell: Cell) -> u64 {
        let tid = 2 * self.tower_seq[owner] + owner as u64;
        self.tower_seq[owner] += 1;
        let at = self.towers.partition_point(|t| t.tid < tid);
        self.towers.insert(at, Tower { tid, owner, kind, cell, cooldown_remaining: 0 });
        tid
    }

    /// 64-bit digest of the canonical serialization. The event list of the
    /// last tick is derived output and does not take part.
    pub fn state_hash(&self) -> u64 {
        let view = HashView {
            config: &self.config,
            tick: self.tick,
            players: &self.players,
            units: &self.units,
            towers: &self.towers,
            projectiles: &self.projectiles,
            unit_seq: self.unit_seq,
            tower_seq: self.tower_seq,
            next_pid: self.next_pid,
            rngs: &self.rngs,
            outcome: self.outcome,
        };
        let bytes = serde_json::to_vec(&view).expect("state serializes");
        let digest = Sha256::digest(&bytes);
        u64::from_be_bytes(digest[..8].try_into().expect("8 bytes"))
    }

    /// Versioned JSON document.
    pub fn to_json(&self) -> String {
        let doc = StateDocument {
            format: "linewars-state".to_string(),
            version: STATE_FORMAT_VERSION,
            state: self,
        };
        serde_json::to_string(&doc).expect("state serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, GameError> {
        let doc: StateDocument<GameState> =
            serde_json::from_str(text).map_err(|e| GameError::Document(e.to_string()))?;
        if doc.format != "linewars-state" || doc.version != STATE_FORMAT_VERSION {
            return Err(GameError::Document(format!(
                "unsupported document {} v{}",
                doc.format, doc.version
            )));
        }
        doc.state.config.validate()?;
        Ok(doc.state)
    }

    /// The same position seen with the seats swapped: columns reflected,
    /// players exchanged.
    pub fn mirrored(&self) -> Self {
        let w = self.config.grid_width;
        let last = self.config.last_column_milli();
        let mut out = self.clone();
        out.config = self.config.mirrored();
        out.players = [self.players[1].clone(), self.players[0].clone()];
        for p in &mut out.players {
            p.cursor.col = w - 1 - p.cursor.col;
        }
        // Ids carry the owner in their lowest bit, so flipping it keeps them unique.
        for u in &mut out.units {
            u.owner = opponent(u.owner);
            u.uid ^= 1;
            u.x = last - u.x;
        }
        out.units.sort_by_key(|u| u.uid);
        for t in &mut out.towers {
            t.owner = opponent(t.owner);
            t.tid ^= 1;
            t.cell.col = w - 1 - t.cell.col;
        }
        out.towers.sort_by_key(|t| t.tid);
        for p in &mut out.projectiles {
            p.owner = opponent(p.owner);
            p.target_uid ^= 1;
            p.x = last - p.x;
        }
        out.unit_seq = [self.unit_seq[1], self.unit_seq[0]];
        out.tower_seq = [self.tower_seq[1], self.tower_seq[0]];
        out.rngs = [self.rngs[1].clone(), self.rngs[0].clone()];
        out.outcome = self.outcome.map(|o| match o {
            Outcome::Winner(p) => Outcome::Winner(opponent(p)),
            Outcome::Draw => Outcome::Draw,
        });
        out
    }
}

#[derive(Serialize)]
struct HashView<'a> {
    config: &'a SimConfig,
    tick: u64,
    players: &'a [PlayerState; 2],
    units: &'a [Unit],
    towers: &'a [Tower],
    projectiles: &'a [Projectile],
    unit_seq: [u64; 2],
    tower_seq: [u64; 2],
    next_pid: u64,
    rngs: &'a [ChaCha8Rng; 2],
    outcome: Option<Outcome>,
}

#[cfg(test)]
mod tests;
