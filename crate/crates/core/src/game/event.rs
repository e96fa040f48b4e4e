use serde::{Deserialize, Serialize};

use super::entities::{Cell, PlayerId};

/// Something that happened during a tick. Rewards and ledgers are computed
/// from these rather than by diffing states.
///
/// Serializes as one JSON object `{"tick": .., "type": .., "payload": {..}}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub tick: u64,
    #[serde(flatten)]
    pub kind: EventKind,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "payload")]
pub enum EventKind {
    UnitSpawned {
        player: PlayerId,
        uid: u64,
        kind: u8,
        row: u32,
        cost: i64,
        income_gain: i64,
    },
    UnitDied {
        uid: u64,
        owner: PlayerId,
        killer: PlayerId,
        bounty: i64,
    },
    /// A unit of `owner` reached the enemy goal column.
    UnitLeaked {
        uid: u64,
        owner: PlayerId,
        damage: i64,
    },
    TowerBuilt {
        player: PlayerId,
        tid: u64,
        kind: u8,
        cell: Cell,
        cost: i64,
    },
    IncomePaid {
        player: PlayerId,
        amount: i64,
    },
    ProjectileHit {
        pid: u64,
        owner: PlayerId,
        target_uid: u64,
        damage: i64,
    },
    Rejected {
        player: PlayerId,
        action: String,
        reason: RejectReason,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RejectReason {
    Clamped,
    Occupied,
    NotBuildable,
    InsufficientGold,
    UnknownKind,
}

impl Event {
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("event serializes")
    }

    /// Net gold change for `player` caused by this event.
    pub fn gold_delta(&self, player: PlayerId) -> i64 {
        match self.kind {
            EventKind::UnitSpawned { player: p, cost, .. } if p == player => -cost,
            EventKind::TowerBuilt { player: p, cost, .. } if p == player => -cost,
            EventKind::IncomePaid { player: p, amount } if p == player => amount,
            EventKind::UnitDied { killer, bounty, .. } if killer == player => bounty,
            _ => 0,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn json_line_shape() {
        let e = Event {
            tick: 3,
            kind: EventKind::IncomePaid { player: 1, amount: 20 },
        };
        assert_eq!(
            e.to_json_line(),
            r#"{"tick":3,"type":"IncomePaid","payload":{"player":1,"amount":20}}"#
        );
        let back: Event = serde_json::from_str(&e.to_json_line()).unwrap();
        assert_eq!(back, e);
    }
}
