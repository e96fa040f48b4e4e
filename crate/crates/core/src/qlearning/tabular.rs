use std::collections::HashMap;

/// Action values for discrete states. Missing entries read as 0.
#[derive(Clone, Debug, Default)]
pub struct QTable {
    actions: usize,
    values: HashMap<(usize, usize), f64>,
}

impl QTable {
    pub fn new(actions: usize) -> Self {
        Self { actions, values: HashMap::new() }
    }

    pub fn get(&self, state: usize, action: usize) -> f64 {
        self.values.get(&(state, action)).copied().unwrap_or(0.0)
    }

    pub fn set(&mut self, state: usize, action: usize, value: f64) {
        self.values.insert((state, action), value);
    }

    pub fn max_value(&self, state: usize) -> f64 {
        (0..self.actions).map(|a| self.get(state, a)).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn greedy(&self, state: usize) -> usize {
        let row: Vec<f64> = (0..self.actions).map(|a| self.get(state, a)).collect();
        super::argmax(&row)
    }

    /// `Q(s,a) += α · (r + γ · maxₐ' Q(s',a') · [not done] − Q(s,a))`
    #[allow(clippy::too_many_arguments)]
    pub fn update(
        &mut self,
        state: usize,
        action: usize,
        reward: f64,
        next_state: usize,
        alpha: f64,
        gamma: f64,
        done: bool,
    ) {
        debug_assert!(alpha > 0.0 && alpha <= 1.0);
        let bootstrap = if done { 0.0 } else { gamma * self.max_value(next_state) };
        let old = self.get(state, action);
        self.set(state, action, old + alpha * (reward + bootstrap - old));
    }

    pub fn actions(&self) -> usize {
        self.actions
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn full_step_copies_reward() {
        let mut q = QTable::new(3);
        q.update(0, 1, 5.0, 1, 1.0, 0.0, false);
        assert_eq!(q.get(0, 1), 5.0);
    }

    #[test]
    fn zero_td_error_is_a_fixed_point() {
        let mut q = QTable::new(2);
        q.set(0, 0, 2.0);
        q.set(1, 1, 2.0);
        q.update(0, 0, 0.0, 1, 0.5, 1.0, false);
        assert_eq!(q.get(0, 0), 2.0);
    }

    #[test]
    fn done_ignores_next_state() {
        let mut q = QTable::new(1);
        q.set(1, 0, 100.0);
        q.update(0, 0, 1.0, 1, 1.0, 0.9, true);
        assert_eq!(q.get(0, 0), 1.0);
    }

    /// Five states in a row, action 0 steps left and 1 steps right; reaching
    /// state 4 pays 1 and ends the episode.
    #[test]
    fn chain_converges_to_value_iteration() {
        const N: usize = 5;
        let gamma = 0.9;
        let next = |s: usize, a: usize| if a == 0 { s.saturating_sub(1) } else { s + 1 };
        let reward = |s2: usize| if s2 == N - 1 { 1.0 } else { 0.0 };

        // Value-iteration oracle over the non-terminal states 0..4.
        let mut v = [0.0_f64; N];
        for _ in 0..1000 {
            let mut nv = [0.0; N];
            for s in 0..N - 1 {
                nv[s] = (0..2)
                    .map(|a| {
                        let s2 = next(s, a);
                        reward(s2) + if s2 == N - 1 { 0.0 } else { gamma * v[s2] }
                    })
                    .fold(f64::NEG_INFINITY, f64::max);
            }
            v = nv;
        }
        let oracle_q = |s: usize, a: usize| {
            let s2 = next(s, a);
            reward(s2) + if s2 == N - 1 { 0.0 } else { gamma * v[s2] }
        };

        let mut q = QTable::new(2);
        for _ in 0..2000 {
            for s in 0..N - 1 {
                for a in 0..2 {
                    let s2 = next(s, a);
                    q.update(s, a, reward(s2), s2, 0.5, gamma, s2 == N - 1);
                }
            }
        }
        for s in 0..N - 1 {
            for a in 0..2 {
                assert!((q.get(s, a) - oracle_q(s, a)).abs() < 1e-3);
            }
        }
        assert!((oracle_q(3, 1) - 1.0).abs() < 1e-12);
        assert!((oracle_q(0, 1) - 0.729).abs() < 1e-12);
    }
}
