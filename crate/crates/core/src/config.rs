//! Game constants.
//!
//! Everything that shapes a match lives in [`SimConfig`]. Together with the
//! seed passed to [`GameState::new`](crate::GameState::new) it fully
//! determines a game, so configs are plain data and serialize to JSON.

use std::ops::Range;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Fixed-point scale for positions: one cell is 1000 milli-cells.
pub const MILLI: i64 = 1000;

#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("invalid config: {0}")]
    Invalid(String),
    #[error("failed to read config {path}: {message}")]
    Io { path: String, message: String },
    #[error("failed to parse config: {0}")]
    Parse(String),
}

fn invalid(msg: impl Into<String>) -> ConfigError {
    ConfigError::Invalid(msg.into())
}

/// A unit that can be sent down a lane.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitKind {
    pub id: u8,
    pub name: String,
    pub gold_cost: i64,
    pub max_health: i64,
    /// Cells per second.
    pub speed: f64,
}

impl UnitKind {
    /// Distance covered per tick, in milli-cells.
    pub fn speed_per_tick(&self, ticks_per_second: u32) -> i64 {
        (self.speed * MILLI as f64 / f64::from(ticks_per_second)).round() as i64
    }
}

/// A tower that can be placed on a buildable cell.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TowerKind {
    pub id: u8,
    pub name: String,
    pub gold_cost: i64,
    pub damage: i64,
    /// Euclidean reach in cells.
    pub range: f64,
    pub cooldown_ticks: u32,
    /// Cells per second.
    pub projectile_speed: f64,
}

impl TowerKind {
    pub fn range_milli(&self) -> i64 {
        (self.range * MILLI as f64).round() as i64
    }

    pub fn projectile_speed_per_tick(&self, ticks_per_second: u32) -> i64 {
        (self.projectile_speed * MILLI as f64 / f64::from(ticks_per_second)).round() as i64
    }
}

/// Half-open column range `[start, end)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnRange {
    pub start: u32,
    pub end: u32,
}

impl ColumnRange {
    pub fn new(start: u32, end: u32) -> Self {
        Self { start, end }
    }

    pub fn contains(&self, column: u32) -> bool {
        (self.start..self.end).contains(&column)
    }

    pub fn as_range(&self) -> Range<u32> {
        self.start..self.end
    }

    fn overlaps(&self, other: &ColumnRange) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimConfig {
    pub grid_width: u32,
    pub grid_height: u32,
    pub ticks_per_second: u32,
    pub max_episode_seconds: u32,
    pub initial_health: i64,
    pub initial_gold: i64,
    pub initial_income: i64,
    pub income_interval_seconds: u32,
    /// Fraction of a sent unit's cost added to the sender's income.
    pub income_ratio: f64,
    /// Fraction of a killed unit's cost paid to the killer.
    pub kill_gold_ratio: f64,
    pub unit_roster: Vec<UnitKind>,
    pub tower_roster: Vec<TowerKind>,
    pub buildable_columns: [ColumnRange; 2],
}

impl Default for SimConfig {
    fn default() -> Self {
        let unit = |id, name: &str, gold_cost, max_health, speed| UnitKind {
            id,
            name: name.to_string(),
            gold_cost,
            max_health,
            speed,
        };
        let tower = |id, name: &str, gold_cost, damage, range, cooldown_ticks, projectile_speed| {
            TowerKind {
                id,
                name: name.to_string(),
                gold_cost,
                damage,
                range,
                cooldown_ticks,
                projectile_speed,
            }
        };
        Self {
            grid_width: 30,
            grid_height: 11,
            ticks_per_second: 10,
            max_episode_seconds: 600,
            initial_health: 50,
            initial_gold: 100,
            initial_income: 20,
            income_interval_seconds: 10,
            income_ratio: 0.20,
            kill_gold_ratio: 0.50,
            unit_roster: vec![
                unit(0, "Militia", 10, 20, 1.0),
                unit(1, "Footman", 25, 50, 1.0),
                unit(2, "Grunt", 50, 110, 1.0),
                unit(3, "Armored", 100, 250, 0.5),
            ],
            tower_roster: vec![
                tower(0, "Basic", 50, 5, 3.0, 10, 4.0),
                tower(1, "Rapid", 75, 3, 2.0, 3, 4.0),
                tower(2, "Heavy", 120, 20, 4.0, 20, 4.0),
            ],
            buildable_columns: [ColumnRange::new(1, 15), ColumnRange::new(15, 29)],
        }
    }
}

impl SimConfig {
    /// Reads a JSON config file. Missing fields take their default values.
    pub fn from_json_file(path: impl AsRef<Path>) -> Result<Self, ConfigError> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let config: SimConfig =
            serde_json::from_str(&text).map_err(|e| ConfigError::Parse(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        if self.grid_width < 4 {
            return Err(invalid(format!("grid_width {} < 4", self.grid_width)));
        }
        if self.grid_height < 1 {
            return Err(invalid("grid_height < 1"));
        }
        if self.ticks_per_second < 1 {
            return Err(invalid("ticks_per_second < 1"));
        }
        if self.max_episode_seconds < 1 {
            return Err(invalid("max_episode_seconds < 1"));
        }
        if self.income_interval_seconds < 1 {
            return Err(invalid("income_interval_seconds < 1"));
        }
        if self.initial_health <= 0 || self.initial_gold < 0 || self.initial_income < 0 {
            return Err(invalid("initial health must be positive, gold and income non-negative"));
        }
        if !(0.0..=1.0).contains(&self.income_ratio) {
            return Err(invalid(format!("income_ratio {} outside [0,1]", self.income_ratio)));
        }
        if !(0.0..=1.0).contains(&self.kill_gold_ratio) {
            return Err(invalid(format!(
                "kill_gold_ratio {} outside [0,1]",
                self.kill_gold_ratio
            )));
        }
        if self.unit_roster.is_empty() || self.tower_roster.is_empty() {
            return Err(invalid("rosters must be non-empty"));
        }
        if self.unit_roster.len() > 64 || self.tower_roster.len() > 64 {
            return Err(invalid("rosters are limited to 64 kinds"));
        }
        for (i, u) in self.unit_roster.iter().enumerate() {
            if usize::from(u.id) != i {
                return Err(invalid(format!("unit kind {} has id {}", i, u.id)));
            }
            if u.gold_cost <= 0 || u.max_health <= 0 || !(u.speed > 0.0) {
                return Err(invalid(format!("unit kind {} needs positive cost, health and speed", u.name)));
            }
            if u.speed_per_tick(self.ticks_per_second) <= 0 {
                return Err(invalid(format!("unit kind {} moves less than a milli-cell per tick", u.name)));
            }
        }
        for (i, t) in self.tower_roster.iter().enumerate() {
            if usize::from(t.id) != i {
                return Err(invalid(format!("tower kind {} has id {}", i, t.id)));
            }
            if t.gold_cost <= 0
                || t.damage <= 0
                || !(t.range > 0.0)
                || t.cooldown_ticks == 0
                || !(t.projectile_speed > 0.0)
            {
                return Err(invalid(format!("tower kind {} needs positive fields", t.name)));
            }
            if t.range > f64::from(self.grid_width) {
                return Err(invalid(format!("tower kind {} range exceeds grid width", t.name)));
            }
            if t.projectile_speed_per_tick(self.ticks_per_second) <= 0 {
                return Err(invalid(format!("tower kind {} projectile too slow", t.name)));
            }
        }
        let goal = self.grid_width - 1;
        for (p, r) in self.buildable_columns.iter().enumerate() {
            if r.start >= r.end {
                return Err(invalid(format!("buildable_columns[{p}] is empty")));
            }
            if r.start == 0 || r.end > goal {
                return Err(invalid(format!(
                    "buildable_columns[{p}] must stay inside columns 1..{goal}"
                )));
            }
        }
        if self.buildable_columns[0].overlaps(&self.buildable_columns[1]) {
            return Err(invalid("buildable_columns overlap"));
        }
        Ok(())
    }

    pub fn max_ticks(&self) -> u64 {
        u64::from(self.max_episode_seconds) * u64::from(self.ticks_per_second)
    }

    pub fn income_interval_ticks(&self) -> u64 {
        u64::from(self.income_interval_seconds) * u64::from(self.ticks_per_second)
    }

    /// `1 + 4 + |towers| + |units|`.
    pub fn action_count(&self) -> usize {
        5 + self.tower_roster.len() + self.unit_roster.len()
    }

    /// Goal column in milli-cells for units walking rightwards.
    pub fn last_column_milli(&self) -> i64 {
        i64::from(self.grid_width - 1) * MILLI
    }

    pub(crate) fn income_gain(&self, cost: i64) -> i64 {
        cost * ratio_permille(self.income_ratio) / 1000
    }

    pub(crate) fn kill_bounty(&self, cost: i64) -> i64 {
        cost * ratio_permille(self.kill_gold_ratio) / 1000
    }

    /// Reflects columns and swaps player-owned data. Used for perspective symmetry.
    pub fn mirrored(&self) -> Self {
        let w = self.grid_width;
        let flip = |r: ColumnRange| ColumnRange::new(w - r.end, w - r.start);
        let mut out = self.clone();
        out.buildable_columns = [flip(self.buildable_columns[1]), flip(self.buildable_columns[0])];
        out
    }
}

// Ratios are applied as integer permille so payouts never depend on float rounding.
fn ratio_permille(ratio: f64) -> i64 {
    (ratio * 1000.0).round() as i64
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        let c = SimConfig::default();
        c.validate().unwrap();
        assert_eq!(c.action_count(), 12);
        assert_eq!(c.max_ticks(), 6000);
        assert_eq!(c.income_interval_ticks(), 100);
    }

    #[test]
    fn rejects_narrow_grid() {
        let c = SimConfig {
            grid_width: 3,
            buildable_columns: [ColumnRange::new(1, 2), ColumnRange::new(2, 2)],
            ..SimConfig::default()
        };
        assert!(matches!(c.validate(), Err(ConfigError::Invalid(m)) if m.contains("grid_width")));
    }

    #[test]
    fn rejects_bad_ratios_and_overlaps() {
        let c = SimConfig { income_ratio: 1.5, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig { kill_gold_ratio: -0.1, ..SimConfig::default() };
        assert!(c.validate().is_err());
        let c = SimConfig {
            buildable_columns: [ColumnRange::new(1, 16), ColumnRange::new(15, 29)],
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
        let c = SimConfig {
            buildable_columns: [ColumnRange::new(0, 15), ColumnRange::new(15, 29)],
            ..SimConfig::default()
        };
        assert!(c.validate().is_err());
    }

    #[test]
    fn fixed_point_conversions() {
        let c = SimConfig::default();
        assert_eq!(c.unit_roster[0].speed_per_tick(10), 100);
        assert_eq!(c.unit_roster[3].speed_per_tick(10), 50);
        assert_eq!(c.tower_roster[0].range_milli(), 3000);
        assert_eq!(c.tower_roster[0].projectile_speed_per_tick(10), 400);
        assert_eq!(c.income_gain(50), 10);
        assert_eq!(c.kill_bounty(25), 12);
    }

    #[test]
    fn default_mirror_is_symmetric() {
        let c = SimConfig::default();
        assert_eq!(c.mirrored(), c);
    }

    #[test]
    fn partial_json_fills_defaults() {
        let c: SimConfig = serde_json::from_str(r#"{"max_episode_seconds": 60}"#).unwrap();
        assert_eq!(c.max_ticks(), 600);
        assert_eq!(c.unit_roster.len(), 4);
    }
}
