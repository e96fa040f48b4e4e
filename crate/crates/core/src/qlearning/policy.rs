use rand::Rng;

/// Index of the largest value; ties go to the lowest index.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate().skip(1) {
        if v > values[best] {
            best = i;
        }
    }
    best
}

/// Epsilon-greedy: a uniform random action with probability `epsilon`,
/// otherwise the greedy one.
///
/// At `epsilon >= 1` no coin is flipped, so the draw sequence is exactly that
/// of a uniform random policy on the same generator.
pub fn select_action(q_values: &[f64], epsilon: f64, rng: &mut impl Rng) -> usize {
    debug_assert!((0.0..=1.0).contains(&epsilon));
    let explore = epsilon >= 1.0 || (epsilon > 0.0 && rng.gen::<f64>() < epsilon);
    if explore {
        rng.gen_range(0..q_values.len())
    } else {
        argmax(q_values)
    }
}

/// Exploration schedule: linear from 1.0 down to 0.1 over the first half of
/// the run, then flat at 0.1.
pub fn epsilon_at(episode: u64, total_episodes: u64) -> f64 {
    const START: f64 = 1.0;
    const END: f64 = 0.1;
    let half = total_episodes as f64 / 2.0;
    if episode as f64 >= half {
        END
    } else {
        START - (START - END) * episode as f64 / half
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn greedy_choice_and_ties() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut q = vec![0.0; 12];
        q[1] = 3.0;
        q[2] = 1.0;
        assert_eq!(select_action(&q, 0.0, &mut rng), 1);
        let mut q = vec![0.0; 12];
        q[2] = 5.0;
        q[7] = 5.0;
        assert_eq!(select_action(&q, 0.0, &mut rng), 2);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let q = vec![0.0; 12];
        let mut counts = [0usize; 12];
        for _ in 0..12_000 {
            counts[select_action(&q, 1.0, &mut rng)] += 1;
        }
        // Binomial(12 000, 1/12): sigma = sqrt(12 000 · 1/12 · 11/12) ≈ 30.28.
        let sigma = (12_000.0_f64 * (1.0 / 12.0) * (11.0 / 12.0)).sqrt();
        for c in counts {
            assert!((c as f64 - 1000.0).abs() <= 3.0 * sigma, "{counts:?}");
        }
    }

    #[test]
    fn schedule() {
        assert_eq!(epsilon_at(0, 1500), 1.0);
        assert_eq!(epsilon_at(750, 1500), 0.1);
        assert!((epsilon_at(375, 1500) - 0.55).abs() < 1e-12);
        assert_eq!(epsilon_at(1499, 1500), 0.1);
    }

    #[test]
    fn scaling_keeps_greedy_choice() {
        let q = [0.3, -1.0, 2.5, 2.4];
        for k in [0.01, 1.0, 7.5, 1e6] {
            let scaled: Vec<f64> = q.iter().map(|v| v * k).collect();
            assert_eq!(argmax(&scaled), argmax(&q));
        }
    }
}
