//! Observation encodings.
//!
//! Every encoder looks at the board from one player's seat. For player 1 the
//! columns are reflected (`c -> W - 1 - c`) so the observer's base is always
//! on the left and its units always walk rightwards. That lets one network
//! play either seat.
//!
//! | encoder | shape | content |
//! |---|---|---|
//! | [`encode_tensor`] | `5 × W × H` | friendly towers, enemy towers, friendly units, enemy units, own cursor |
//! | [`encode_rgb_heatmap`] | `W × H × 3` | red friendly towers, green enemy units, teal cursor |
//! | [`encode_gray_heatmap`] | `W × H` | 1/3 friendly tower, 2/3 enemy unit, 1 cursor, max-composed |
//! | [`encode_aux`] | `6` | own and enemy health, gold, income, normalised |
//!
//! Unit intensity in a cell is the sum of `health / max_health` over the units
//! in it, clamped to 1. Towers have intensity 1.

use ndarray::{Array1, Array2, Array3};

use crate::game::{Cell, GameState, PlayerId};

pub const CHANNEL_FRIENDLY_TOWERS: usize = 0;
pub const CHANNEL_ENEMY_TOWERS: usize = 1;
pub const CHANNEL_FRIENDLY_UNITS: usize = 2;
pub const CHANNEL_ENEMY_UNITS: usize = 3;
pub const CHANNEL_CURSOR: usize = 4;
pub const TENSOR_CHANNELS: usize = 5;

pub const GRAY_TOWER: f64 = 1.0 / 3.0;
pub const GRAY_ENEMY_UNIT: f64 = 2.0 / 3.0;
pub const GRAY_CURSOR: f64 = 1.0;

/// Normalisation caps for the economy vector.
pub const GOLD_CAP: f64 = 1000.0;
pub const INCOME_CAP: f64 = 500.0;

pub const AUX_LEN: usize = 6;

/// All encodings of one state from one seat.
#[derive(Clone, Debug, PartialEq)]
pub struct Observation {
    pub tensor: Array3<f64>,
    pub rgb: Array3<f64>,
    pub gray: Array2<f64>,
    pub aux: Array1<f64>,
}

impl Observation {
    pub fn new(state: &GameState, perspective: PlayerId) -> Self {
        Self {
            tensor: encode_tensor(state, perspective),
            rgb: encode_rgb_heatmap(state, perspective),
            gray: encode_gray_heatmap(state, perspective),
            aux: encode_aux(state, perspective),
        }
    }
}

/// Column as seen from `perspective`.
fn view_col(state: &GameState, perspective: PlayerId, col: u32) -> usize {
    let col = if perspective == 0 { col } else { state.config.grid_width - 1 - col };
    col as usize
}

fn view_cell(state: &GameState, perspective: PlayerId, cell: Cell) -> (usize, usize) {
    (view_col(state, perspective, cell.col), cell.row as usize)
}

/// Summed, clamped unit intensity per cell for units owned by `owner`.
fn unit_intensity(state: &GameState, perspective: PlayerId, owner: PlayerId) -> Array2<f64> {
    let (w, h) = dims(state);
    let mut grid = Array2::zeros((w, h));
    for unit in state.units.iter().filter(|u| u.owner == owner) {
        let max = state.config.unit_roster[usize::from(unit.kind)].max_health as f64;
        let at = view_cell(state, perspective, unit.cell(&state.config));
        grid[at] += unit.health as f64 / max;
    }
    grid.mapv_inplace(|v: f64| v.min(1.0));
    grid
}

fn dims(state: &GameState) -> (usize, usize) {
    (state.config.grid_width as usize, state.config.grid_height as usize)
}

pub fn encode_tensor(state: &GameState, perspective: PlayerId) -> Array3<f64> {
    let (w, h) = dims(state);
    let mut t = Array3::zeros((TENSOR_CHANNELS, w, h));
    for tower in &state.towers {
        let channel = if tower.owner == perspective {
            CHANNEL_FRIENDLY_TOWERS
        } else {
            CHANNEL_ENEMY_TOWERS
        };
        let (c, r) = view_cell(state, perspective, tower.cell);
        t[(channel, c, r)] = 1.0;
    }
    let enemy = 1 - perspective;
    t.index_axis_mut(ndarray::Axis(0), CHANNEL_FRIENDLY_UNITS)
        .assign(&unit_intensity(state, perspective, perspective));
    t.index_axis_mut(ndarray::Axis(0), CHANNEL_ENEMY_UNITS)
        .assign(&unit_intensity(state, perspective, enemy));
    let (c, r) = view_cell(state, perspective, state.players[perspective].cursor);
    t[(CHANNEL_CURSOR, c, r)] = 1.0;
    t
}

pub fn encode_rgb_heatmap(state: &GameState, perspective: PlayerId) -> Array3<f64> {
    let (w, h) = dims(state);
    let mut img = Array3::zeros((w, h, 3));
    for tower in state.towers.iter().filter(|t| t.owner == perspective) {
        let (c, r) = view_cell(state, perspective, tower.cell);
        img[(c, r, 0)] = 1.0;
    }
    let enemies = unit_intensity(state, perspective, 1 - perspective);
    img.index_axis_mut(ndarray::Axis(2), 1).assign(&enemies);
    let (c, r) = view_cell(state, perspective, state.players[perspective].cursor);
    img[(c, r, 1)] = 1.0;
    img[(c, r, 2)] = 1.0;
    img
}

pub fn encode_gray_heatmap(state: &GameState, perspective: PlayerId) -> Array2<f64> {
    let mut gray = unit_intensity(state, perspective, 1 - perspective) * GRAY_ENEMY_UNIT;
    for tower in state.towers.iter().filter(|t| t.owner == perspective) {
        let at = view_cell(state, perspective, tower.cell);
        gray[at] = f64::max(gray[at], GRAY_TOWER);
    }
    let at = view_cell(state, perspective, state.players[perspective].cursor);
    gray[at] = GRAY_CURSOR;
    gray
}

/// `[own_health, own_gold, own_income, enemy_health, enemy_gold, enemy_income]`,
/// each divided by its cap and clamped to `[0, 1]`.
pub fn encode_aux(state: &GameState, perspective: PlayerId) -> Array1<f64> {
    let health_cap = state.config.initial_health as f64;
    let norm = |v: i64, cap: f64| (v as f64 / cap).clamp(0.0, 1.0);
    let mut out = Vec::with_capacity(AUX_LEN);
    for p in [perspective, 1 - perspective] {
        let s = &state.players[p];
        out.push(norm(s.health, health_cap));
        out.push(norm(s.gold, GOLD_CAP));
        out.push(norm(s.income, INCOME_CAP));
    }
    Array1::from(out)
}

/// Flat network input: the gray heat-map in row-major `(column, row)` order
/// followed by the economy vector. 336 values with the default board.
pub fn gray_features(state: &GameState, perspective: PlayerId) -> Vec<f64> {
    let gray = encode_gray_heatmap(state, perspective);
    let mut out: Vec<f64> = gray.iter().copied().collect();
    out.extend(encode_aux(state, perspective));
    out
}

/// Flat tensor plus economy vector, the alternative network input.
pub fn tensor_features(state: &GameState, perspective: PlayerId) -> Vec<f64> {
    let t = encode_tensor(state, perspective);
    let mut out: Vec<f64> = t.iter().copied().collect();
    out.extend(encode_aux(state, perspective));
    out
}

/// Which encoding feeds the learner.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureEncoding {
    #[default]
    Gray,
    Tensor,
}

impl FeatureEncoding {
    pub fn features(self, state: &GameState, perspective: PlayerId) -> Vec<f64> {
        match self {
            FeatureEncoding::Gray => gray_features(state, perspective),
            FeatureEncoding::Tensor => tensor_features(state, perspective),
        }
    }

    pub fn len(self, config: &crate::SimConfig) -> usize {
        let cells = (config.grid_width * config.grid_height) as usize;
        match self {
            FeatureEncoding::Gray => cells + AUX_LEN,
            FeatureEncoding::Tensor => TENSOR_CHANNELS * cells + AUX_LEN,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::{Action, SimConfig};

    fn fresh() -> GameState {
        GameState::new(SimConfig::default(), 42).unwrap()
    }

    #[test]
    fn empty_board() {
        let g = fresh();
        let t = encode_tensor(&g, 0);
        assert_eq!(t.shape(), &[5, 30, 11]);
        for ch in 0..4 {
            assert!(t.index_axis(ndarray::Axis(0), ch).iter().all(|&v| v == 0.0));
        }
        assert_eq!(t.index_axis(ndarray::Axis(0), CHANNEL_CURSOR).sum(), 1.0);
        assert_eq!(t[(CHANNEL_CURSOR, 7, 5)], 1.0);
        assert_eq!(encode_rgb_heatmap(&g, 0).shape(), &[30, 11, 3]);
        assert_eq!(encode_gray_heatmap(&g, 0).shape(), &[30, 11]);
        assert_eq!(gray_features(&g, 0).len(), 336);
        assert_eq!(FeatureEncoding::Gray.len(&g.config), 336);
        assert_eq!(FeatureEncoding::Tensor.len(&g.config), 5 * 330 + 6);
    }

    #[test]
    fn friendly_unit_cell() {
        let mut g = fresh();
        g.spawn_unit_at(0, 1, 5_000, 3);
        assert_eq!(encode_tensor(&g, 0)[(CHANNEL_FRIENDLY_UNITS, 5, 3)], 1.0);
        assert_eq!(encode_tensor(&g, 1)[(CHANNEL_ENEMY_UNITS, 24, 3)], 1.0);
    }

    #[test]
    fn damaged_units_stack_and_clamp() {
        let mut g = fresh();
        let a = g.spawn_unit_at(1, 0, 10_000, 2);
        g.spawn_unit_at(1, 0, 10_000, 2);
        g.units.iter_mut().find(|u| u.uid == a).unwrap().health = 5;
        let t = encode_tensor(&g, 0);
        assert_eq!(t[(CHANNEL_ENEMY_UNITS, 10, 2)], 1.0);
        g.units.iter_mut().for_each(|u| u.health = 5);
        let t = encode_tensor(&g, 0);
        assert_eq!(t[(CHANNEL_ENEMY_UNITS, 10, 2)], 0.5);
        assert_eq!(encode_gray_heatmap(&g, 0)[(10, 2)], 0.5 * GRAY_ENEMY_UNIT);
    }

    #[test]
    fn player_one_towers_are_mirrored() {
        let mut g = fresh();
        g.place_tower(1, 0, Cell::new(27, 4));
        let t = encode_tensor(&g, 1);
        assert_eq!(t[(CHANNEL_FRIENDLY_TOWERS, 30 - 1 - 27, 4)], 1.0);
        assert_eq!(encode_tensor(&g, 0)[(CHANNEL_ENEMY_TOWERS, 27, 4)], 1.0);
    }

    #[test]
    fn rgb_pixels() {
        let mut g = fresh();
        g.place_tower(0, 0, Cell::new(2, 2));
        let img = encode_rgb_heatmap(&g, 0);
        let px = |c, r| [img[(c, r, 0)], img[(c, r, 1)], img[(c, r, 2)]];
        assert_eq!(px(2, 2), [1.0, 0.0, 0.0]);
        assert_eq!(px(7, 5), [0.0, 1.0, 1.0]);
        assert_eq!(px(0, 0), [0.0, 0.0, 0.0]);

        g.spawn_unit_at(1, 0, 7_000, 5);
        g.units[0].health = 4;
        let img = encode_rgb_heatmap(&g, 0);
        assert_eq!([img[(7, 5, 0)], img[(7, 5, 1)], img[(7, 5, 2)]], [0.0, 1.0, 1.0]);
    }

    #[test]
    fn gray_levels() {
        let mut g = fresh();
        g.place_tower(0, 0, Cell::new(2, 2));
        g.spawn_unit_at(1, 0, 12_000, 8);
        let gray = encode_gray_heatmap(&g, 0);
        assert_eq!(gray[(2, 2)], 1.0 / 3.0);
        assert_eq!(gray[(12, 8)], 2.0 / 3.0);
        assert_eq!(gray[(7, 5)], 1.0);
        assert_eq!(gray[(0, 0)], 0.0);
        assert_eq!(gray.iter().filter(|&&v| v > 0.0).count(), 3);
    }

    #[test]
    fn aux_vector() {
        let mut g = fresh();
        assert_eq!(encode_aux(&g, 0).to_vec(), vec![1.0, 0.1, 0.04, 1.0, 0.1, 0.04]);
        g.players[0].health = 0;
        g.players[0].gold = 2000;
        g.players[1].income = 250;
        let aux = encode_aux(&g, 0);
        assert_eq!(aux[0], 0.0);
        assert_eq!(aux[1], 1.0);
        assert_eq!(aux[5], 0.5);
        let aux1 = encode_aux(&g, 1);
        assert_eq!(aux1[2], 0.5);
        assert_eq!(aux1[3], 0.0);
    }

    #[test]
    fn encodings_agree_with_mirrored_state() {
        let mut g = fresh();
        for step in 0..200u64 {
            let a0 = Action::from_code((step * 7 % 12) as usize, &g.config).unwrap();
            let a1 = Action::from_code((step * 5 % 12) as usize, &g.config).unwrap();
            g.step([a0, a1]).unwrap();
        }
        let m = g.mirrored();
        assert_eq!(Observation::new(&g, 1), Observation::new(&m, 0));
        assert_eq!(Observation::new(&g, 0), Observation::new(&m, 1));
    }
}
