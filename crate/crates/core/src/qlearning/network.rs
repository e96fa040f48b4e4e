use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::{QError, ReplayBuffer, Transition};
use crate::encoders::FeatureEncoding;

/// Learner hyperparameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LearnerConfig {
    pub learning_rate: f64,
    pub discount: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Hidden width; `0` gives a purely linear model.
    pub hidden: usize,
    pub activation: Activation,
    pub encoding: FeatureEncoding,
    /// Copy the online weights into a frozen target network every this many
    /// train steps. `None` bootstraps from the online weights.
    pub target_sync_steps: Option<u64>,
    /// Clip rewards to `[-c, c]` before storing them.
    pub reward_clip: Option<f64>,
}

impl Default for LearnerConfig {
    fn default() -> Self {
        Self {
            learning_rate: 0.001,
            discount: 0.99,
            batch_size: 32,
            replay_capacity: 10_000,
            hidden: 64,
            activation: Activation::Tanh,
            encoding: FeatureEncoding::Gray,
            target_sync_steps: None,
            reward_clip: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Activation {
    #[default]
    Tanh,
    Identity,
}

impl Activation {
    fn apply(self, x: f64) -> f64 {
        match self {
            Activation::Tanh => x.tanh(),
            Activation::Identity => x,
        }
    }

    /// Derivative expressed through the activation's output.
    fn slope(self, y: f64) -> f64 {
        match self {
            Activation::Tanh => 1.0 - y * y,
            Activation::Identity => 1.0,
        }
    }
}

/// `input → dense(hidden, activation) → dense(actions, linear)`, or a single
/// linear layer when `hidden == 0`.
///
/// Parameters live in one flat vector. With a hidden layer the layout is
/// `[W1 (input × hidden), b1, W2 (actions × hidden), b2]`; the linear model is
/// `[W (input × actions), b]`. Input-major first layers let the forward pass
/// skip zero features, which dominate the heat-map encodings.
#[derive(Clone, Debug, PartialEq)]
pub struct QNetwork {
    input: usize,
    hidden: usize,
    actions: usize,
    activation: Activation,
    theta: Vec<f64>,
    pub learning_rate: f64,
    pub discount: f64,
    target_theta: Option<Vec<f64>>,
    target_sync_steps: Option<u64>,
    train_steps: u64,
}

struct Forward {
    hidden: Vec<f64>,
    q: Vec<f64>,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    input_len: usize,
    hidden: usize,
    actions: usize,
    activation: Activation,
    learning_rate: f64,
    discount: f64,
    train_steps: u64,
    theta: Vec<f64>,
}

const CHECKPOINT_FORMAT: &str = "linewars-qnet";
const CHECKPOINT_VERSION: u32 = 1;

impl QNetwork {
    pub fn param_count(input: usize, hidden: usize, actions: usize) -> usize {
        if hidden == 0 {
            input * actions + actions
        } else {
            input * hidden + hidden + actions * hidden + actions
        }
    }

    pub fn zeros(input: usize, hidden: usize, actions: usize, activation: Activation) -> Self {
        Self {
            input,
            hidden,
            actions,
            activation,
            theta: vec![0.0; Self::param_count(input, hidden, actions)],
            learning_rate: 0.001,
            discount: 0.99,
            target_theta: None,
            target_sync_steps: None,
            train_steps: 0,
        }
    }

    /// Hidden weights uniform in `±1/sqrt(fan_in)`; output weights and all
    /// biases zero, so an untrained network rates every action equally.
    pub fn random(
        input: usize,
        hidden: usize,
        actions: usize,
        activation: Activation,
        rng: &mut impl Rng,
    ) -> Self {
        let mut net = Self::zeros(input, hidden, actions, activation);
        let mut fill = |range: std::ops::Range<usize>, fan_in: usize| {
            let bound = 1.0 / (fan_in as f64).sqrt();
            for v in &mut net.theta[range] {
                *v = rng.gen_range(-bound..bound);
            }
        };
        if hidden > 0 {
            fill(0..input * hidden, input);
        }
        net
    }

    pub fn from_config(input: usize, actions: usize, config: &LearnerConfig, rng: &mut impl Rng) -> Self {
        let mut net = Self::random(input, config.hidden, actions, config.activation, rng);
        net.learning_rate = config.learning_rate;
        net.discount = config.discount;
        net.target_sync_steps = config.target_sync_steps;
        if config.target_sync_steps.is_some() {
            net.target_theta = Some(net.theta.clone());
        }
        net
    }

    pub fn input_len(&self) -> usize {
        self.input
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn params(&self) -> &[f64] {
        &self.theta
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.theta
    }

    pub fn train_steps(&self) -> u64 {
        self.train_steps
    }

    fn check_input(&self, s: &[f64]) -> Result<(), QError> {
        if s.len() == self.input {
            Ok(())
        } else {
            Err(QError::ShapeMismatch { expected: self.input, got: s.len() })
        }
    }

    fn forward_with(&self, theta: &[f64], x: &[f64]) -> Forward {
        let (n_in, n_h, n_a) = (self.input, self.hidden, self.actions);
        if n_h == 0 {
            let mut q = theta[n_in * n_a..].to_vec();
            for (j, &xj) in x.iter().enumerate().filter(|(_, &v)| v != 0.0) {
                let row = &theta[j * n_a..(j + 1) * n_a];
                for (qa, w) in q.iter_mut().zip(row) {
                    *qa += xj * w;
                }
            }
            return Forward { hidden: Vec::new(), q };
        }
        let b1 = n_in * n_h;
        let w2 = b1 + n_h;
        let b2 = w2 + n_a * n_h;
        let mut pre = theta[b1..w2].to_vec();
        for (j, &xj) in x.iter().enumerate().filter(|(_, &v)| v != 0.0) {
            let row = &theta[j * n_h..(j + 1) * n_h];
            for (p, w) in pre.iter_mut().zip(row) {
                *p += xj * w;
            }
        }
        let hidden: Vec<f64> = pre.into_iter().map(|v| self.activation.apply(v)).collect();
        let q = (0..n_a)
            .map(|a| {
                let row = &theta[w2 + a * n_h..w2 + (a + 1) * n_h];
                theta[b2 + a] + row.iter().zip(&hidden).map(|(w, h)| w * h).sum::<f64>()
            })
            .collect();
        Forward { hidden, q }
    }

    /// Action values for one feature vector.
    pub fn q_forward(&self, s: &[f64]) -> Result<Vec<f64>, QError> {
        self.check_input(s)?;
        Ok(self.forward_with(&self.theta, s).q)
    }

    /// Bootstrap targets `r` (terminal) or `r + γ·maxₐ' Q(s', a')`, using the
    /// frozen target weights when enabled.
    pub fn td_targets(&self, batch: &[&Transition]) -> Result<Vec<f64>, QError> {
        let theta = self.target_theta.as_deref().unwrap_or(&self.theta);
        batch
            .iter()
            .map(|t| {
                if t.done {
                    return Ok(t.reward);
                }
                self.check_input(&t.next_state)?;
                let next = self.forward_with(theta, &t.next_state).q;
                Ok(t.reward + self.discount * next.into_iter().fold(f64::NEG_INFINITY, f64::max))
            })
            .collect()
    }

    /// Mean squared TD error over the batch and its exact gradient with the
    /// targets held constant.
    pub fn q_gradient(&self, batch: &[&Transition]) -> Result<(f64, Vec<f64>), QError> {
        if batch.is_empty() {
            return Err(QError::EmptyBatch);
        }
        let targets = self.td_targets(batch)?;
        self.gradient_for_targets(batch, &targets)
    }

    /// Loss and gradient against caller-supplied targets.
    pub fn gradient_for_targets(
        &self,
        batch: &[&Transition],
        targets: &[f64],
    ) -> Result<(f64, Vec<f64>), QError> {
        if batch.is_empty() {
            return Err(QError::EmptyBatch);
        }
        let (n_in, n_h, n_a) = (self.input, self.hidden, self.actions);
        let scale = 1.0 / batch.len() as f64;
        let mut grad = vec![0.0; self.theta.len()];
        let mut loss = 0.0;
        for (t, &y) in batch.iter().zip(targets) {
            self.check_input(&t.state)?;
            if t.action >= n_a {
                return Err(QError::ActionOutOfRange { action: t.action, count: n_a });
            }
            let f = self.forward_with(&self.theta, &t.state);
            let td = f.q[t.action] - y;
            loss += td * td * scale;
            let g = 2.0 * td * scale;
            let a = t.action;
            if n_h == 0 {
                grad[n_in * n_a + a] += g;
                for (j, &xj) in t.state.iter().enumerate().filter(|(_, &v)| v != 0.0) {
                    grad[j * n_a + a] += xj * g;
                }
                continue;
            }
            let b1 = n_in * n_h;
            let w2 = b1 + n_h;
            let b2 = w2 + n_a * n_h;
            grad[b2 + a] += g;
            let mut dh = vec![0.0; n_h];
            for h in 0..n_h {
                grad[w2 + a * n_h + h] += g * f.hidden[h];
                dh[h] = g * self.theta[w2 + a * n_h + h] * self.activation.slope(f.hidden[h]);
                grad[b1 + h] += dh[h];
            }
            for (j, &xj) in t.state.iter().enumerate().filter(|(_, &v)| v != 0.0) {
                for (gw, d) in grad[j * n_h..(j + 1) * n_h].iter_mut().zip(&dh) {
                    *gw += xj * d;
                }
            }
        }
        Ok((loss, grad))
    }

    /// One plain gradient-descent step on the given batch. Returns the loss
    /// before the update.
    pub fn train_on_batch(&mut self, batch: &[&Transition]) -> Result<f64, QError> {
        let (loss, grad) = self.q_gradient(batch)?;
        for (p, g) in self.theta.iter_mut().zip(&grad) {
            *p -= self.learning_rate * g;
        }
        self.train_steps += 1;
        if let Some(every) = self.target_sync_steps {
            if every > 0 && self.train_steps % every == 0 {
                self.target_theta = Some(self.theta.clone());
            }
        }
        Ok(loss)
    }

    /// Samples a batch from `buffer` and takes one descent step.
    pub fn train_step(&mut self, buffer: &mut ReplayBuffer, batch_size: usize) -> Result<f64, QError> {
        let batch = buffer.sample(batch_size)?;
        self.train_on_batch(&batch)
    }

    pub fn to_checkpoint_json(&self) -> String {
        let c = Checkpoint {
            format: CHECKPOINT_FORMAT.to_string(),
            version: CHECKPOINT_VERSION,
            input_len: self.input,
            hidden: self.hidden,
            actions: self.actions,
            activation: self.activation,
            learning_rate: self.learning_rate,
            discount: self.discount,
            train_steps: self.train_steps,
            theta: self.theta.clone(),
        };
        serde_json::to_string(&c).expect("checkpoint serializes")
    }

    pub fn from_checkpoint_json(text: &str) -> Result<Self, QError> {
        let c: Checkpoint =
            serde_json::from_str(text).map_err(|e| QError::Checkpoint(e.to_string()))?;
        if c.format != CHECKPOINT_FORMAT || c.version != CHECKPOINT_VERSION {
            return Err(QError::Checkpoint(format!("unsupported {} v{}", c.format, c.version)));
        }
        let expected = Self::param_count(c.input_len, c.hidden, c.actions);
        if c.theta.len() != expected {
            return Err(QError::Checkpoint(format!(
                "expected {expected} parameters, found {}",
                c.theta.len()
            )));
        }
        if c.theta.iter().any(|v| !v.is_finite()) {
            return Err(QError::Checkpoint("non-finite parameter".into()));
        }
        let mut net = Self::zeros(c.input_len, c.hidden, c.actions, c.activation);
        net.theta = c.theta;
        net.learning_rate = c.learning_rate;
        net.discount = c.discount;
        net.train_steps = c.train_steps;
        Ok(net)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        std::fs::write(path, self.to_checkpoint_json())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, QError> {
        let text = std::fs::read_to_string(path).map_err(|e| QError::Checkpoint(e.to_string()))?;
        Self::from_checkpoint_json(&text)
    }
}
