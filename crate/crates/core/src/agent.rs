//! Masked PPO over flattened observations.
//!
//! The network is a shared tanh trunk with a logit head and a value head,
//! all parameters kept in one flat vector so the optimizer and gradient
//! clipping work on a single slice.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::grounding::{State, StateKey};

#[derive(Debug, Error)]
pub enum AgentError {
    #[error("every action is masked")]
    AllMasked,
    #[error("loss or gradient is not finite")]
    NonFiniteLoss,
    #[error("observation has length {got}, network expects {expected}")]
    ShapeMismatch { expected: usize, got: usize },
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct PpoConfig {
    pub gamma: f64,
    pub lambda: f64,
    pub clip: f64,
    pub vf_coef: f64,
    pub entropy_coef: f64,
    pub lr: f64,
    pub grad_clip: f64,
    pub epochs: usize,
    pub batch: usize,
    pub minibatch: usize,
    pub hidden: Vec<usize>,
}

impl Default for PpoConfig {
    fn default() -> Self {
        PpoConfig {
            gamma: 0.999,
            lambda: 0.95,
            clip: 0.2,
            vf_coef: 0.65,
            entropy_coef: 0.01,
            lr: 1e-3,
            grad_clip: 1.0,
            epochs: 3,
            batch: 1500,
            minibatch: 128,
            hidden: vec![64, 64],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Layer {
    inputs: usize,
    outputs: usize,
    /// offset of the row-major weight block; biases follow it
    offset: usize,
}

impl Layer {
    fn bias(&self) -> usize {
        self.offset + self.inputs * self.outputs
    }

    fn end(&self) -> usize {
        self.bias() + self.outputs
    }

    fn forward(&self, params: &[f64], x: &[f64], out: &mut Vec<f64>) {
        out.clear();
        let w = &params[self.offset..self.bias()];
        let b = &params[self.bias()..self.end()];
        for o in 0..self.outputs {
            let row = &w[o * self.inputs..(o + 1) * self.inputs];
            out.push(b[o] + row.iter().zip(x).map(|(a, b)| a * b).sum::<f64>());
        }
    }

    /// Accumulates parameter gradients and returns the gradient wrt the input.
    fn backward(&self, params: &[f64], x: &[f64], dout: &[f64], grad: &mut [f64]) -> Vec<f64> {
        let mut dx = vec![0.0; self.inputs];
        for (o, &d) in dout.iter().enumerate() {
            if d == 0.0 {
                continue;
            }
            let base = self.offset + o * self.inputs;
            for i in 0..self.inputs {
                grad[base + i] += d * x[i];
                dx[i] += d * params[base + i];
            }
            grad[self.bias() + o] += d;
        }
        dx
    }
}

/// Feedforward policy/value network.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyNetwork {
    pub params: Vec<f64>,
    trunk: Vec<Layer>,
    policy: Layer,
    value: Layer,
}

/// Activations kept for the backward pass.
#[derive(Debug, Clone)]
pub struct Forward {
    activations: Vec<Vec<f64>>,
    pub logits: Vec<f64>,
    pub value: f64,
}

impl PolicyNetwork {
    pub fn new(obs_len: usize, hidden: &[usize], actions: usize, rng: &mut impl Rng) -> Self {
        let mut offset = 0;
        let mut trunk = Vec::new();
        let mut prev = obs_len;
        for &h in hidden {
            let l = Layer {
                inputs: prev,
                outputs: h,
                offset,
            };
            offset = l.end();
            trunk.push(l);
            prev = h;
        }
        let policy = Layer {
            inputs: prev,
            outputs: actions,
            offset,
        };
        let value = Layer {
            inputs: prev,
            outputs: 1,
            offset: policy.end(),
        };
        let mut params = vec![0.0; value.end()];
        let mut init = |l: &Layer, gain: f64| {
            let bound = gain * (6.0 / (l.inputs + l.outputs) as f64).sqrt();
            for w in &mut params[l.offset..l.bias()] {
                *w = rng.gen_range(-bound..=bound);
            }
        };
        for l in &trunk {
            init(l, 1.0);
        }
        // near-uniform initial policy
        init(&policy, 0.01);
        init(&value, 1.0);
        PolicyNetwork {
            params,
            trunk,
            policy,
            value,
        }
    }

    pub fn obs_len(&self) -> usize {
        self.trunk.first().unwrap_or(&self.policy).inputs
    }

    pub fn num_actions(&self) -> usize {
        self.policy.outputs
    }

    /// (inputs, outputs) per layer, trunk first, then logit head, then value head.
    pub fn shapes(&self) -> Vec<(usize, usize)> {
        self.trunk
            .iter()
            .chain([&self.policy, &self.value])
            .map(|l| (l.inputs, l.outputs))
            .collect()
    }

    pub fn forward(&self, obs: &[f64]) -> Forward {
        let mut activations = vec![obs.to_vec()];
        let mut buf = Vec::new();
        for l in &self.trunk {
            l.forward(&self.params, activations.last().unwrap(), &mut buf);
            activations.push(buf.iter().map(|x| x.tanh()).collect());
        }
        let last = activations.last().unwrap();
        let mut logits = Vec::new();
        self.policy.forward(&self.params, last, &mut logits);
        self.value.forward(&self.params, last, &mut buf);
        Forward {
            value: buf[0],
            logits,
            activations,
        }
    }

    fn backward(&self, fw: &Forward, dlogits: &[f64], dvalue: f64, grad: &mut [f64]) {
        let last = fw.activations.last().unwrap();
        let mut dh = self.policy.backward(&self.params, last, dlogits, grad);
        let dv = self.value.backward(&self.params, last, &[dvalue], grad);
        for (a, b) in dh.iter_mut().zip(dv) {
            *a += b;
        }
        for (k, l) in self.trunk.iter().enumerate().rev() {
            let out = &fw.activations[k + 1];
            let dpre: Vec<f64> = dh.iter().zip(out).map(|(d, y)| d * (1.0 - y * y)).collect();
            dh = l.backward(&self.params, &fw.activations[k], &dpre, grad);
        }
    }
}

/// Masked log-softmax; masked entries are `-inf`.
pub fn masked_log_softmax(logits: &[f64], mask: &[bool]) -> Result<Vec<f64>, AgentError> {
    let max = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(l, _)| *l)
        .fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return Err(AgentError::AllMasked);
    }
    let sum: f64 = logits
        .iter()
        .zip(mask)
        .filter(|(_, &m)| m)
        .map(|(l, _)| (l - max).exp())
        .sum();
    let lse = max + sum.ln();
    Ok(logits
        .iter()
        .zip(mask)
        .map(|(l, &m)| if m { l - lse } else { f64::NEG_INFINITY })
        .collect())
}

/// Samples from the masked softmax. Returns (action, log-prob, value).
pub fn select_action(
    net: &PolicyNetwork,
    obs: &[f64],
    mask: &[bool],
    rng: &mut impl Rng,
) -> Result<(usize, f64, f64), AgentError> {
    if obs.len() != net.obs_len() {
        return Err(AgentError::ShapeMismatch {
            expected: net.obs_len(),
            got: obs.len(),
        });
    }
    let fw = net.forward(obs);
    let logp = masked_log_softmax(&fw.logits, mask)?;
    let u: f64 = rng.gen();
    let mut acc = 0.0;
    let mut chosen = None;
    for (i, lp) in logp.iter().enumerate() {
        if !mask[i] {
            continue;
        }
        chosen = Some(i);
        acc += lp.exp();
        if u < acc {
            break;
        }
    }
    let a = chosen.ok_or(AgentError::AllMasked)?;
    Ok((a, logp[a], fw.value))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Step {
    pub obs: Vec<f64>,
    pub action: usize,
    pub mask: Vec<bool>,
    pub logp: f64,
    pub reward: f64,
    pub value: f64,
    /// Episode ended after this step (goal or truncation).
    pub done: bool,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RolloutBatch {
    pub steps: Vec<Step>,
    /// Value estimate of the state following the last step, used when it is not `done`.
    pub last_value: f64,
    pub advantages: Vec<f64>,
    pub returns: Vec<f64>,
}

/// Raw GAE advantages (before normalization).
pub fn gae(steps: &[Step], last_value: f64, gamma: f64, lambda: f64) -> Vec<f64> {
    let mut adv = vec![0.0; steps.len()];
    let mut next_adv = 0.0;
    let mut next_value = last_value;
    for (t, s) in steps.iter().enumerate().rev() {
        let keep = if s.done { 0.0 } else { 1.0 };
        let delta = s.reward + gamma * next_value * keep - s.value;
        next_adv = delta + gamma * lambda * keep * next_adv;
        adv[t] = next_adv;
        next_value = s.value;
    }
    adv
}

/// Fills in returns (raw advantage plus value) and batch-normalized advantages.
/// Batches without a single nonzero reward keep their raw advantages.
pub fn compute_advantages(batch: &mut RolloutBatch, gamma: f64, lambda: f64) {
    let raw = gae(&batch.steps, batch.last_value, gamma, lambda);
    batch.returns = raw.iter().zip(&batch.steps).map(|(a, s)| a + s.value).collect();
    let n = raw.len().max(1) as f64;
    let mean = raw.iter().sum::<f64>() / n;
    let var = raw.iter().map(|a| (a - mean).powi(2)).sum::<f64>() / n;
    let std = var.sqrt();
    // without any reward the advantages are pure value-head noise; scaling
    // them to unit variance would turn that noise into full-size updates
    if batch.steps.iter().all(|s| s.reward == 0.0) {
        batch.advantages = raw;
        return;
    }
    batch.advantages = raw.iter().map(|a| (a - mean) / (std + 1e-8)).collect();
}

/// PPO's clipped surrogate for one sample.
pub fn clipped_surrogate(ratio: f64, advantage: f64, clip: f64) -> f64 {
    (ratio * advantage).min(ratio.clamp(1.0 - clip, 1.0 + clip) * advantage)
}

/// Mean loss over `idx` and its gradient wrt every parameter.
pub fn loss_and_grad(net: &PolicyNetwork, batch: &RolloutBatch, idx: &[usize], cfg: &PpoConfig) -> (f64, Vec<f64>) {
    let mut grad = vec![0.0; net.params.len()];
    let mut loss = 0.0;
    let n = idx.len().max(1) as f64;
    for &i in idx {
        let s = &batch.steps[i];
        let adv = batch.advantages[i];
        let ret = batch.returns[i];
        let fw = net.forward(&s.obs);
        let Ok(logp) = masked_log_softmax(&fw.logits, &s.mask) else {
            return (f64::NAN, grad);
        };
        let ratio = (logp[s.action] - s.logp).exp();
        let unclipped = ratio * adv;
        let surrogate = clipped_surrogate(ratio, adv, cfg.clip);
        let probs: Vec<f64> = logp.iter().map(|l| l.exp()).collect();
        let entropy: f64 = -probs
            .iter()
            .zip(&logp)
            .filter(|(p, _)| **p > 0.0)
            .map(|(p, l)| p * l)
            .sum::<f64>();
        let verr = fw.value - ret;
        loss += -surrogate + cfg.vf_coef * verr * verr - cfg.entropy_coef * entropy;

        // d(-surrogate)/dlogp, zero once the clipped branch is the minimum
        let dlogp = if unclipped <= surrogate { -adv * ratio } else { 0.0 };
        let mut dlogits = vec![0.0; probs.len()];
        for j in 0..probs.len() {
            if !s.mask[j] {
                continue;
            }
            let onehot = if j == s.action { 1.0 } else { 0.0 };
            let mut d = dlogp * (onehot - probs[j]);
            if probs[j] > 0.0 {
                d += cfg.entropy_coef * probs[j] * (logp[j] + entropy);
            }
            dlogits[j] = d / n;
        }
        net.backward(&fw, &dlogits, 2.0 * cfg.vf_coef * verr / n, &mut grad);
    }
    (loss / n, grad)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Adam {
    pub m: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl Adam {
    const B1: f64 = 0.9;
    const B2: f64 = 0.999;
    const EPS: f64 = 1e-8;

    pub fn new(n: usize) -> Self {
        Adam {
            m: vec![0.0; n],
            v: vec![0.0; n],
            t: 0,
        }
    }

    pub fn step(&mut self, params: &mut [f64], grad: &[f64], lr: f64) {
        self.t += 1;
        let c1 = 1.0 - Self::B1.powi(self.t as i32);
        let c2 = 1.0 - Self::B2.powi(self.t as i32);
        for i in 0..params.len() {
            self.m[i] = Self::B1 * self.m[i] + (1.0 - Self::B1) * grad[i];
            self.v[i] = Self::B2 * self.v[i] + (1.0 - Self::B2) * grad[i] * grad[i];
            params[i] -= lr * (self.m[i] / c1) / ((self.v[i] / c2).sqrt() + Self::EPS);
        }
    }
}

/// Rescales `grad` in place so its global norm is at most `max_norm`.
pub fn clip_grad_norm(grad: &mut [f64], max_norm: f64) -> f64 {
    let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
    if norm > max_norm {
        let k = max_norm / norm;
        grad.iter_mut().for_each(|g| *g *= k);
    }
    norm
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct UpdateStats {
    pub mean_loss: f64,
    pub minibatches: usize,
}

/// Runs the PPO epochs on `batch`. On a non-finite loss the network and
/// optimizer are left exactly as they were.
pub fn ppo_update(
    net: &mut PolicyNetwork,
    opt: &mut Adam,
    batch: &RolloutBatch,
    cfg: &PpoConfig,
    rng: &mut impl Rng,
) -> Result<UpdateStats, AgentError> {
    let saved = (net.params.clone(), opt.clone());
    let mut order: Vec<usize> = (0..batch.steps.len()).collect();
    let mut stats = UpdateStats::default();
    let mb = cfg.minibatch.max(1);
    for _ in 0..cfg.epochs {
        order.shuffle(rng);
        for chunk in order.chunks(mb) {
            let (loss, mut grad) = loss_and_grad(net, batch, chunk, cfg);
            if !loss.is_finite() || grad.iter().any(|g| !g.is_finite()) {
                net.params = saved.0;
                *opt = saved.1;
                return Err(AgentError::NonFiniteLoss);
            }
            clip_grad_norm(&mut grad, cfg.grad_clip);
            opt.step(&mut net.params, &grad, cfg.lr);
            stats.mean_loss += loss;
            stats.minibatches += 1;
        }
    }
    if stats.minibatches > 0 {
        stats.mean_loss /= stats.minibatches as f64;
    }
    Ok(stats)
}

/// Running per-dimension mean and variance (Welford).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ObsNormalizer {
    pub count: f64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl ObsNormalizer {
    const CLIP: f64 = 10.0;

    pub fn new(n: usize) -> Self {
        ObsNormalizer {
            count: 0.0,
            mean: vec![0.0; n],
            m2: vec![0.0; n],
        }
    }

    pub fn update(&mut self, x: &[f64]) {
        self.count += 1.0;
        for (i, &v) in x.iter().enumerate() {
            let d = v - self.mean[i];
            self.mean[i] += d / self.count;
            self.m2[i] += d * (v - self.mean[i]);
        }
    }

    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        if self.count < 2.0 {
            return x.iter().map(|v| v.clamp(-Self::CLIP, Self::CLIP)).collect();
        }
        x.iter()
            .enumerate()
            .map(|(i, v)| {
                let var = self.m2[i] / self.count;
                ((v - self.mean[i]) / (var + 1e-8).sqrt()).clamp(-Self::CLIP, Self::CLIP)
            })
            .collect()
    }
}

/// Actions seen to be inapplicable, per exact state.
#[derive(Debug, Clone, Default)]
pub struct InapplicableMemory {
    seen: HashMap<StateKey, HashSet<usize>>,
}

impl InapplicableMemory {
    pub fn record(&mut self, state: &State, action: usize) {
        self.seen.entry(state.key()).or_default().insert(action);
    }

    pub fn len(&self) -> usize {
        self.seen.values().map(HashSet::len).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.seen.is_empty()
    }

    /// All-true minus the recorded actions; all-true again if nothing would remain.
    pub fn mask(&self, state: &State, actions: usize) -> Vec<bool> {
        let mut mask = vec![true; actions];
        if let Some(bad) = self.seen.get(&state.key()) {
            for &a in bad {
                if a < actions {
                    mask[a] = false;
                }
            }
        }
        if !mask.iter().any(|&m| m) {
            mask.fill(true);
        }
        mask
    }
}

pub fn singleton_mask(actions: usize, a: usize) -> Vec<bool> {
    let mut m = vec![false; actions];
    m[a] = true;
    m
}

/// Policy, optimizer, normalizer and the pending rollout of one learner.
#[derive(Debug, Clone)]
pub struct Agent {
    pub cfg: PpoConfig,
    pub net: PolicyNetwork,
    pub opt: Adam,
    pub normalizer: ObsNormalizer,
    pub memory: InapplicableMemory,
    pub rng: ChaCha8Rng,
    pub rollout: Vec<Step>,
    pub updates: usize,
}

impl Agent {
    pub fn new(obs_len: usize, actions: usize, cfg: PpoConfig, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let net = PolicyNetwork::new(obs_len, &cfg.hidden, actions, &mut rng);
        Agent {
            opt: Adam::new(net.params.len()),
            normalizer: ObsNormalizer::new(obs_len),
            net,
            cfg,
            memory: InapplicableMemory::default(),
            rng,
            rollout: Vec::new(),
            updates: 0,
        }
    }

    /// Picks an action for the raw observation. With `expert` set the mask is
    /// a singleton on that action and the normalizer is left untouched.
    pub fn act(&mut self, raw_obs: &[f64], state: &State, expert: Option<usize>) -> Result<Step, AgentError> {
        let actions = self.net.num_actions();
        let mask = match expert {
            Some(a) => singleton_mask(actions, a),
            None => {
                self.normalizer.update(raw_obs);
                self.memory.mask(state, actions)
            }
        };
        let obs = self.normalizer.normalize(raw_obs);
        let (action, logp, value) = select_action(&self.net, &obs, &mask, &mut self.rng)?;
        Ok(Step {
            obs,
            action,
            mask,
            logp,
            reward: 0.0,
            value,
            done: false,
        })
    }

    pub fn value(&self, raw_obs: &[f64]) -> f64 {
        self.net.forward(&self.normalizer.normalize(raw_obs)).value
    }

    /// Stores a finished step; runs an update once the rollout reaches the batch size.
    /// `next_obs` is the observation after the step, used to bootstrap a cut fragment.
    pub fn push(&mut self, step: Step, next_obs: &[f64]) -> Option<Result<UpdateStats, AgentError>> {
        let done = step.done;
        self.rollout.push(step);
        if self.rollout.len() < self.cfg.batch {
            return None;
        }
        let last_value = if done { 0.0 } else { self.value(next_obs) };
        let mut batch = RolloutBatch {
            steps: std::mem::take(&mut self.rollout),
            last_value,
            ..RolloutBatch::default()
        };
        compute_advantages(&mut batch, self.cfg.gamma, self.cfg.lambda);
        let r = ppo_update(&mut self.net, &mut self.opt, &batch, &self.cfg, &mut self.rng);
        if r.is_ok() {
            self.updates += 1;
        }
        Some(r)
    }

    /// Marks the most recent step as the end of an episode.
    pub fn end_episode(&mut self) {
        if let Some(s) = self.rollout.last_mut() {
            s.done = true;
        }
    }
}

const MAGIC: &[u8; 8] = b"RAMPCKPT";
const CHECKPOINT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
struct CheckpointHeader {
    version: u32,
    dtype: String,
    shapes: Vec<(usize, usize)>,
    adam_step: u64,
    config: PpoConfig,
    normalizer: ObsNormalizer,
}

/// Writes magic, a length-prefixed JSON header, then parameters and both
/// Adam moment vectors as little-endian f64.
pub fn save_checkpoint(agent: &Agent, out: &mut impl Write) -> Result<(), AgentError> {
    let header = CheckpointHeader {
        version: CHECKPOINT_VERSION,
        dtype: "f64".into(),
        shapes: agent.net.shapes(),
        adam_step: agent.opt.t,
        config: agent.cfg.clone(),
        normalizer: agent.normalizer.clone(),
    };
    let json = serde_json::to_vec(&header).map_err(|e| AgentError::Checkpoint(e.to_string()))?;
    out.write_all(MAGIC)?;
    out.write_all(&(json.len() as u32).to_le_bytes())?;
    out.write_all(&json)?;
    for v in [&agent.net.params, &agent.opt.m, &agent.opt.v] {
        for x in v.iter() {
            out.write_all(&x.to_le_bytes())?;
        }
    }
    Ok(())
}

/// Restores network, optimizer and normalizer. The inapplicability memory
/// and rng are not part of a checkpoint.
pub fn load_checkpoint(input: &mut impl Read, seed: u64) -> Result<Agent, AgentError> {
    let mut magic = [0u8; 8];
    input.read_exact(&mut magic)?;
    if &magic != MAGIC {
        return Err(AgentError::Checkpoint("wrong magic".into()));
    }
    let mut len = [0u8; 4];
    input.read_exact(&mut len)?;
    let mut json = vec![0u8; u32::from_le_bytes(len) as usize];
    input.read_exact(&mut json)?;
    let h: CheckpointHeader = serde_json::from_slice(&json).map_err(|e| AgentError::Checkpoint(e.to_string()))?;
    if h.version != CHECKPOINT_VERSION || h.dtype != "f64" {
        return Err(AgentError::Checkpoint(format!("unsupported version {} / dtype {}", h.version, h.dtype)));
    }
    let (obs, actions) = match (h.shapes.first(), h.shapes.len().checked_sub(2).map(|i| h.shapes[i])) {
        (Some(&(i, _)), Some((_, a))) => (i, a),
        _ => return Err(AgentError::Checkpoint("missing layer shapes".into())),
    };
    let mut cfg = h.config;
    cfg.hidden = h.shapes[..h.shapes.len() - 2].iter().map(|s| s.1).collect();
    let mut agent = Agent::new(obs, actions, cfg, seed);
    if agent.net.shapes() != h.shapes {
        return Err(AgentError::Checkpoint("layer shapes are inconsistent".into()));
    }
    let mut read_vec = |v: &mut Vec<f64>| -> Result<(), AgentError> {
        let mut b = [0u8; 8];
        for x in v.iter_mut() {
            input.read_exact(&mut b)?;
            *x = f64::from_le_bytes(b);
        }
        Ok(())
    };
    read_vec(&mut agent.net.params)?;
    read_vec(&mut agent.opt.m)?;
    read_vec(&mut agent.opt.v)?;
    agent.opt.t = h.adam_step;
    agent.normalizer = h.normalizer;
    Ok(agent)
}
