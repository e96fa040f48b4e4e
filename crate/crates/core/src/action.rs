use std::fmt;

use serde::{Deserialize, Serialize};

use crate::config::SimConfig;

/// A player's command for one tick.
///
/// Discrete codes are laid out as `0` no-op, `1..=4` cursor moves, then one
/// code per tower kind, then one code per unit kind. With the default rosters
/// that gives codes `0..12`.
///
/// `Left` and `Right` are relative to the acting player: `Left` moves towards
/// the player's own base, `Right` towards the enemy.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    NoOp,
    CursorUp,
    CursorDown,
    CursorLeft,
    CursorRight,
    BuildTower(u8),
    SendUnit(u8),
}

impl Action {
    pub fn from_code(code: usize, config: &SimConfig) -> Option<Action> {
        let towers = config.tower_roster.len();
        let units = config.unit_roster.len();
        Some(match code {
            0 => Action::NoOp,
            1 => Action::CursorUp,
            2 => Action::CursorDown,
            3 => Action::CursorLeft,
            4 => Action::CursorRight,
            c if c < 5 + towers => Action::BuildTower((c - 5) as u8),
            c if c < 5 + towers + units => Action::SendUnit((c - 5 - towers) as u8),
            _ => return None,
        })
    }

    pub fn code(self, config: &SimConfig) -> usize {
        match self {
            Action::NoOp => 0,
            Action::CursorUp => 1,
            Action::CursorDown => 2,
            Action::CursorLeft => 3,
            Action::CursorRight => 4,
            Action::BuildTower(k) => 5 + usize::from(k),
            Action::SendUnit(k) => 5 + config.tower_roster.len() + usize::from(k),
        }
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::NoOp => write!(f, "noop"),
            Action::CursorUp => write!(f, "up"),
            Action::CursorDown => write!(f, "down"),
            Action::CursorLeft => write!(f, "left"),
            Action::CursorRight => write!(f, "right"),
            Action::BuildTower(k) => write!(f, "build({k})"),
            Action::SendUnit(k) => write!(f, "send({k})"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn codes_round_trip_for_default_rosters() {
        let c = SimConfig::default();
        for code in 0..12 {
            let a = Action::from_code(code, &c).unwrap();
            assert_eq!(a.code(&c), code);
        }
        assert_eq!(Action::from_code(12, &c), None);
        assert_eq!(Action::from_code(5, &c), Some(Action::BuildTower(0)));
        assert_eq!(Action::from_code(7, &c), Some(Action::BuildTower(2)));
        assert_eq!(Action::from_code(8, &c), Some(Action::SendUnit(0)));
        assert_eq!(Action::from_code(11, &c), Some(Action::SendUnit(3)));
    }
}
