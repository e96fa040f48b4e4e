use std::collections::VecDeque;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::QError;

#[derive(Clone, Debug, PartialEq)]
pub struct Transition {
    pub state: Vec<f64>,
    pub action: usize,
    pub reward: f64,
    pub next_state: Vec<f64>,
    pub done: bool,
}

/// Ring buffer of transitions. Pushing at capacity evicts the oldest entry.
#[derive(Clone, Debug)]
pub struct ReplayBuffer {
    items: VecDeque<Transition>,
    capacity: usize,
    rng: ChaCha8Rng,
}

impl ReplayBuffer {
    pub fn new(capacity: usize, seed: u64) -> Self {
        assert!(capacity > 0, "replay capacity must be positive");
        Self {
            items: VecDeque::with_capacity(capacity.min(1 << 16)),
            capacity,
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn push(&mut self, t: Transition) {
        if self.items.len() == self.capacity {
            self.items.pop_front();
        }
        self.items.push_back(t);
    }

    /// Draws `batch` transitions i.i.d. uniformly, with replacement.
    pub fn sample(&mut self, batch: usize) -> Result<Vec<&Transition>, QError> {
        if batch == 0 {
            return Err(QError::EmptyBatch);
        }
        if self.items.len() < batch {
            return Err(QError::UnderfilledBuffer { have: self.items.len(), need: batch });
        }
        let n = self.items.len();
        let picks: Vec<usize> = (0..batch).map(|_| self.rng.gen_range(0..n)).collect();
        Ok(picks.into_iter().map(|i| &self.items[i]).collect())
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }

    pub fn iter(&self) -> impl Iterator<Item = &Transition> {
        self.items.iter()
    }
}
