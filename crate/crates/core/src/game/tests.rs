use proptest::prelude::*;

use super::*;
use crate::config::UnitKind;

const NOOPS: [Action; 2] = [Action::NoOp, Action::NoOp];

fn fresh() -> GameState {
    GameState::new(SimConfig::default(), 42).unwrap()
}

#[test]
fn new_game_uses_config_defaults() {
    let g = fresh();
    for p in &g.players {
        assert_eq!((p.health, p.gold, p.income), (50, 100, 20));
    }
    assert_eq!(g.tick, 0);
    assert_eq!(g.players[0].cursor, Cell::new(7, 5));
    assert_eq!(g.players[1].cursor, Cell::new(22, 5));
    assert!(g.units.is_empty() && g.towers.is_empty() && g.projectiles.is_empty());
    assert_eq!(g.state_hash(), fresh().state_hash());
}

#[test]
fn new_game_rejects_invalid_config() {
    let config = SimConfig { grid_width: 3, ..SimConfig::default() };
    assert!(matches!(GameState::new(config, 1), Err(GameError::InvalidConfig(_))));
}

#[test]
fn unit_leaks_after_walking_half_a_cell() {
    let mut g = fresh();
    let uid = g.spawn_unit_at(0, 0, 28_500, 4);
    for _ in 0..4 {
        let events = g.step(NOOPS).unwrap();
        assert!(events.is_empty());
    }
    assert_eq!(g.unit(uid).unwrap().x, 28_900);
    let events = g.step(NOOPS).unwrap();
    assert_eq!(
        events,
        vec![Event { tick: 5, kind: EventKind::UnitLeaked { uid, owner: 0, damage: 1 } }]
    );
    assert!(g.units.is_empty());
    assert_eq!(g.players[1].health, 49);
    assert_eq!(g.players[0].damage_dealt, 1);
}

#[test]
fn two_hits_kill_a_ten_health_unit() {
    let mut config = SimConfig::default();
    config.unit_roster[0] = UnitKind {
        id: 0,
        name: "Weak".into(),
        gold_cost: 10,
        max_health: 10,
        speed: 1.0,
    };
    let mut g = GameState::new(config, 3).unwrap();
    g.place_tower(0, 0, Cell::new(5, 3));
    let uid = g.spawn_unit_at(1, 0, 8_000, 3);
    let gold_before = g.players[0].gold;

    let mut hits = Vec::new();
    let mut deaths = Vec::new();
    while g.unit(uid).is_some() {
        for e in g.step(NOOPS).unwrap() {
            match e.kind {
                EventKind::ProjectileHit { .. } => hits.push(e.tick),
                EventKind::UnitDied { .. } => deaths.push(e),
                _ => {}
            }
        }
        assert!(g.tick < 100);
    }
    // Fired at tick 1 from column 5 while the unit sits at 7.9; closing
    // speed is 0.3 cells per tick, so the first hit lands at tick 5.
    assert_eq!(hits.len(), 2);
    assert_eq!(hits[0], 5);
    assert_eq!(
        deaths[0].kind,
        EventKind::UnitDied { uid, owner: 1, killer: 0, bounty: 5 }
    );
    assert_eq!(g.players[0].gold, gold_before + 5);
    assert_eq!(g.players[1].units_lost, 1);
    assert!(g.projectiles.is_empty());
}

#[test]
fn income_is_paid_on_interval_ticks() {
    let mut g = fresh();
    for _ in 0..99 {
        g.step(NOOPS).unwrap();
    }
    assert_eq!(g.players[0].gold, 100);
    let events = g.step(NOOPS).unwrap();
    assert_eq!(g.tick, 100);
    assert_eq!(g.players[0].gold, 120);
    assert_eq!(g.players[1].gold, 120);
    assert_eq!(events.len(), 2);
    assert!(matches!(events[0].kind, EventKind::IncomePaid { player: 0, amount: 20 }));
}

#[test]
fn sending_a_unit_raises_income() {
    let mut g = fresh();
    let events = g.apply_action(0, Action::SendUnit(2));
    assert_eq!(g.players[0].gold, 50);
    assert_eq!(g.players[0].income, 30);
    assert_eq!(g.units.len(), 1);
    assert_eq!(g.units[0].x, 0);
    assert_eq!(g.units[0].health, 110);
    assert!(matches!(
        events[0].kind,
        EventKind::UnitSpawned { player: 0, cost: 50, income_gain: 10, .. }
    ));

    let events = g.apply_action(1, Action::SendUnit(0));
    assert_eq!(g.unit(events_uid(&events)).unwrap().x, 29_000);
}

fn events_uid(events: &[Event]) -> u64 {
    match events[0].kind {
        EventKind::UnitSpawned { uid, .. } => uid,
        ref other => panic!("unexpected {other:?}"),
    }
}

#[test]
fn rejected_actions_leave_state_alone() {
    let mut g = fresh();
    g.players[0].cursor = Cell::new(3, 0);
    let before = g.state_hash();
    let events = g.apply_action(0, Action::CursorUp);
    assert!(matches!(
        events[0].kind,
        EventKind::Rejected { player: 0, reason: RejectReason::Clamped, .. }
    ));
    assert_eq!(g.state_hash(), before);

    g.place_tower(0, 0, Cell::new(3, 0));
    let gold = g.players[0].gold;
    let events = g.apply_action(0, Action::BuildTower(1));
    assert!(matches!(events[0].kind, EventKind::Rejected { reason: RejectReason::Occupied, .. }));
    assert_eq!(g.players[0].gold, gold);

    g.players[0].cursor = Cell::new(20, 0);
    let events = g.apply_action(0, Action::BuildTower(0));
    assert!(matches!(
        events[0].kind,
        EventKind::Rejected { reason: RejectReason::NotBuildable, .. }
    ));

    g.players[0].gold = 5;
    let events = g.apply_action(0, Action::SendUnit(0));
    assert!(matches!(
        events[0].kind,
        EventKind::Rejected { reason: RejectReason::InsufficientGold, .. }
    ));
}

#[test]
fn cursor_directions_are_relative_to_the_player() {
    let mut g = fresh();
    g.apply_action(0, Action::CursorRight);
    g.apply_action(1, Action::CursorRight);
    assert_eq!(g.players[0].cursor.col, 8);
    assert_eq!(g.players[1].cursor.col, 21);
    g.apply_action(1, Action::CursorDown);
    assert_eq!(g.players[1].cursor.row, 6);
}

#[test]
fn building_a_tower() {
    let mut g = fresh();
    let events = g.apply_action(0, Action::BuildTower(0));
    assert_eq!(g.players[0].gold, 50);
    assert_eq!(g.towers.len(), 1);
    assert_eq!(g.towers[0].cell, Cell::new(7, 5));
    assert!(matches!(events[0].kind, EventKind::TowerBuilt { player: 0, cost: 50, .. }));
}

#[test]
fn terminal_rules() {
    let mut g = fresh();
    assert_eq!(g.is_terminal(), None);
    g.players[1].health = 0;
    assert_eq!(g.is_terminal(), Some(Outcome::Winner(0)));

    let mut g = fresh();
    g.tick = 6000;
    g.players[0].health = 30;
    g.players[1].health = 29;
    assert_eq!(g.is_terminal(), Some(Outcome::Winner(0)));
    g.players[1].health = 30;
    assert_eq!(g.is_terminal(), Some(Outcome::Draw));
}

#[test]
fn time_limit_ends_the_game() {
    let config = SimConfig { max_episode_seconds: 2, ..SimConfig::default() };
    let mut g = GameState::new(config, 9).unwrap();
    for _ in 0..19 {
        g.step(NOOPS).unwrap();
    }
    assert!(!g.is_over());
    g.step(NOOPS).unwrap();
    assert_eq!(g.outcome, Some(Outcome::Draw));
    assert_eq!(g.step(NOOPS), Err(GameError::StepAfterTerminal));
}

#[test]
fn hash_changes_after_send() {
    let mut g = fresh();
    let before = g.state_hash();
    g.step([Action::SendUnit(0), Action::NoOp]).unwrap();
    assert_ne!(g.state_hash(), before);
}

#[test]
fn json_round_trip_keeps_hash() {
    let mut g = fresh();
    g.step([Action::SendUnit(0), Action::BuildTower(0)]).unwrap();
    let text = g.to_json();
    assert!(text.starts_with(r#"{"format":"linewars-state","version":1"#));
    let back = GameState::from_json(&text).unwrap();
    assert_eq!(back, g);
    assert_eq!(back.state_hash(), g.state_hash());
}

#[test]
fn from_json_rejects_other_versions() {
    let text = fresh().to_json().replacen("\"version\":1", "\"version\":7", 1);
    assert!(matches!(GameState::from_json(&text), Err(GameError::Document(_))));
}

#[test]
fn mirror_is_an_involution() {
    let mut g = fresh();
    g.step([Action::SendUnit(1), Action::SendUnit(3)]).unwrap();
    g.step([Action::BuildTower(0), Action::CursorUp]).unwrap();
    assert_eq!(g.mirrored().mirrored(), g);
}

fn action_strategy() -> impl Strategy<Value = Action> {
    let config = SimConfig::default();
    (0usize..12).prop_map(move |c| Action::from_code(c, &config).unwrap())
}

proptest! {
    #[test]
    fn action_order_is_irrelevant(
        seed in any::<u64>(),
        script in prop::collection::vec((action_strategy(), action_strategy()), 1..80),
    ) {
        let mut g = GameState::new(SimConfig::default(), seed).unwrap();
        for (a0, a1) in script {
            let mut forward = g.clone();
            forward.apply_action(0, a0);
            forward.apply_action(1, a1);
            let mut backward = g.clone();
            backward.apply_action(1, a1);
            backward.apply_action(0, a0);
            prop_assert_eq!(forward.state_hash(), backward.state_hash());
            g.step([a0, a1]).unwrap();
            if g.is_over() {
                break;
            }
        }
    }

    #[test]
    fn units_always_progress_and_stay_on_the_board(
        seed in any::<u64>(),
        script in prop::collection::vec((action_strategy(), action_strategy()), 1..300),
    ) {
        let mut g = GameState::new(SimConfig::default(), seed).unwrap();
        for (a0, a1) in script {
            let before: Vec<(u64, i64)> = g
                .units
                .iter()
                .map(|u| (u.uid, u.distance_to_goal(&g.config)))
                .collect();
            g.step([a0, a1]).unwrap();
            for (uid, dist) in before {
                if let Some(u) = g.unit(uid) {
                    prop_assert!(u.distance_to_goal(&g.config) < dist);
                }
            }
            let last = g.config.last_column_milli();
            let bottom = i64::from(g.config.grid_height - 1) * MILLI;
            for u in &g.units {
                prop_assert!((0..=last).contains(&u.x));
                prop_assert!(u.row < g.config.grid_height);
                prop_assert!(u.health > 0);
            }
            for p in &g.projectiles {
                prop_assert!((0..=last).contains(&p.x) && (0..=bottom).contains(&p.y));
            }
            if g.is_over() {
                break;
            }
        }
    }
}
