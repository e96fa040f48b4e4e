use serde::{Deserialize, Serialize};

use crate::config::{SimConfig, MILLI};

/// Player seat, `0` or `1`.
pub type PlayerId = usize;

pub fn opponent(player: PlayerId) -> PlayerId {
    1 - player
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Cell {
    pub col: u32,
    pub row: u32,
}

impl Cell {
    pub fn new(col: u32, row: u32) -> Self {
        Self { col, row }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PlayerState {
    pub health: i64,
    pub gold: i64,
    pub income: i64,
    pub cursor: Cell,
    pub units_sent: u64,
    pub units_lost: u64,
    pub damage_dealt: u64,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Unit {
    pub uid: u64,
    pub owner: PlayerId,
    pub kind: u8,
    /// Column position in milli-cells.
    pub x: i64,
    pub row: u32,
    pub health: i64,
}

impl Unit {
    /// Milli-cells walked since spawning.
    pub fn progress(&self, config: &SimConfig) -> i64 {
        if self.owner == 0 {
            self.x
        } else {
            config.last_column_milli() - self.x
        }
    }

    /// Milli-cells left before the unit leaks.
    pub fn distance_to_goal(&self, config: &SimConfig) -> i64 {
        config.last_column_milli() - self.progress(config)
    }

    /// The cell the unit occupies: its progress rounded to whole cells,
    /// halves rounding towards the goal. Measuring from the spawn side keeps
    /// the assignment symmetric under board mirroring.
    pub fn cell(&self, config: &SimConfig) -> Cell {
        let steps = ((self.progress(config) + MILLI / 2) / MILLI) as u32;
        let col = if self.owner == 0 { steps } else { config.grid_width - 1 - steps };
        Cell::new(col, self.row)
    }

    pub fn y(&self) -> i64 {
        i64::from(self.row) * MILLI
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tower {
    pub tid: u64,
    pub owner: PlayerId,
    pub kind: u8,
    pub cell: Cell,
    pub cooldown_remaining: u32,
}

impl Tower {
    pub fn center(&self) -> (i64, i64) {
        (i64::from(self.cell.col) * MILLI, i64::from(self.cell.row) * MILLI)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Projectile {
    pub pid: u64,
    pub owner: PlayerId,
    pub target_uid: u64,
    /// Position in milli-cells.
    pub x: i64,
    pub y: i64,
    pub damage: i64,
    /// Milli-cells per tick.
    pub speed: i64,
}

/// Final result of a match.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Winner(PlayerId),
    Draw,
}

impl Outcome {
    pub fn winner(self) -> Option<PlayerId> {
        match self {
            Outcome::Winner(p) => Some(p),
            Outcome::Draw => None,
        }
    }
}
