//! Decentralized training round engines: DSGD, DeepSqueeze, CHOCO-SGD and
//! AdaG-SGD, composing a local SGD step (Nesterov momentum, weight decay)
//! with the consensus mechanisms.
//!
//! Every engine follows the same synchronous two-phase contract as the
//! consensus module: gradients and outgoing messages are computed from the
//! round-start snapshot, then all updates are applied. Only parameters (or
//! parameter-derived messages) ever flow between agents; momentum stays
//! local.

use crate::compression::{compress, decompress, payload_bytes, CompressorSpec};
use crate::consensus::{
    apply_adaptive_step, consensus_distance_of, gossip_exchange, GossipAgentState,
    GossipHyperParams,
};
use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::models::{self, ModelSpec};
use crate::topology::MixingMatrix;

/// Local optimizer settings shared by every engine.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerConfig {
    pub lr0: f64,
    pub momentum: f64,
    pub nesterov: bool,
    pub weight_decay: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            lr0: 0.1,
            momentum: 0.9,
            nesterov: true,
            weight_decay: 1e-4,
            batch_size: 32,
            epochs: 50,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.lr0 > 0.0 && self.lr0.is_finite()) {
            return Err(Error::InvalidHyperParam(format!("lr must be positive, got {}", self.lr0)));
        }
        if !(0.0..1.0).contains(&self.momentum) {
            return Err(Error::InvalidHyperParam(format!(
                "momentum must be in [0,1), got {}",
                self.momentum
            )));
        }
        if self.weight_decay < 0.0 {
            return Err(Error::InvalidHyperParam(format!(
                "weight decay must be nonnegative, got {}",
                self.weight_decay
            )));
        }
        if self.batch_size == 0 {
            return Err(Error::InvalidHyperParam("batch size must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidHyperParam("epochs must be positive".into()));
        }
        Ok(())
    }
}

/// Step decay: lr0 until half the epochs, lr0/10 until three quarters,
/// lr0/100 after.
pub fn lr_schedule(cfg: &OptimizerConfig, epoch: usize) -> Result<f64> {
    if epoch >= cfg.epochs {
        return Err(Error::InvalidHyperParam(format!(
            "epoch {epoch} out of range for {} epochs",
            cfg.epochs
        )));
    }
    // Integer comparisons keep the 50%/75% boundaries exact.
    if 2 * epoch < cfg.epochs {
        Ok(cfg.lr0)
    } else if 4 * epoch < 3 * cfg.epochs {
        Ok(cfg.lr0 / 10.0)
    } else {
        Ok(cfg.lr0 / 100.0)
    }
}

/// One agent's training state. `gossip.x` holds the model parameters; the
/// gossip state is unused (but carried) by DSGD and DeepSqueeze.
#[derive(Debug, Clone)]
pub struct LearnerState {
    pub gossip: GossipAgentState,
    pub momentum_buf: Vec<f64>,
    pub deepsqueeze_residual: Vec<f64>,
}

impl LearnerState {
    pub fn new(id: usize, w: &MixingMatrix, params: Vec<f64>) -> Self {
        let dim = params.len();
        Self {
            gossip: GossipAgentState::new(id, w, params),
            momentum_buf: vec![0.0; dim],
            deepsqueeze_residual: vec![0.0; dim],
        }
    }

    pub fn params(&self) -> &[f64] {
        &self.gossip.x
    }

    pub fn params_mut(&mut self) -> &mut [f64] {
        &mut self.gossip.x
    }
}

/// One learner per agent, all starting from the same parameter vector.
pub fn init_learners(w: &MixingMatrix, params: &[f64]) -> Vec<LearnerState> {
    (0..w.n()).map(|i| LearnerState::new(i, w, params.to_vec())).collect()
}

/// SGD with coupled weight decay and optional Nesterov lookahead:
/// `g += wd * params; buf = m * buf + g; step = g + m * buf (nesterov) or buf`.
pub fn local_sgd_step(
    state: &mut LearnerState,
    grad: &[f64],
    lr: f64,
    cfg: &OptimizerConfig,
) -> Result<()> {
    if grad.len() != state.params().len() {
        return Err(Error::DimensionMismatch(format!(
            "gradient dim {} vs parameter dim {}",
            grad.len(),
            state.params().len()
        )));
    }
    if let Some(pos) = grad.iter().position(|g| !g.is_finite()) {
        return Err(Error::NonFinite(format!("gradient entry {} at index {pos}", grad[pos])));
    }
    let m = cfg.momentum;
    for ((p, buf), &g) in
        state.gossip.x.iter_mut().zip(state.momentum_buf.iter_mut()).zip(grad)
    {
        let g = g + cfg.weight_decay * *p;
        *buf = m * *buf + g;
        let step = if cfg.nesterov { g + m * *buf } else { *buf };
        *p -= lr * step;
    }
    Ok(())
}

/// Computes losses and gradients for a round.
///
/// Implementations receive the agent index and its round-start parameters
/// and return the batch loss with its gradient.
pub trait GradientSource {
    fn loss_grad(&mut self, agent: usize, params: &[f64]) -> Result<(f64, Vec<f64>)>;
}

impl<F> GradientSource for F
where
    F: FnMut(usize, &[f64]) -> Result<(f64, Vec<f64>)>,
{
    fn loss_grad(&mut self, agent: usize, params: &[f64]) -> Result<(f64, Vec<f64>)> {
        self(agent, params)
    }
}

/// What one training round produced.
#[derive(Debug, Clone)]
pub struct TrainRoundReport {
    pub bytes_per_agent: Vec<u64>,
    /// Batch losses averaged over agents (evaluated at round-start params).
    pub mean_loss: f64,
    /// max_i ||e_i||_inf of the gossip phase, 0 for engines without one.
    pub max_gossip_error_inf: f64,
}

fn local_steps(
    states: &mut [LearnerState],
    grads: &mut dyn GradientSource,
    lr: f64,
    cfg: &OptimizerConfig,
) -> Result<f64> {
    let mut total_loss = 0.0;
    for (i, state) in states.iter_mut().enumerate() {
        let (loss, grad) = grads.loss_grad(i, state.params())?;
        total_loss += loss;
        local_sgd_step(state, &grad, lr, cfg).map_err(|e| match e {
            Error::NonFinite(msg) => Error::NonFinite(format!(
                "agent {i}, round {}: {msg}",
                state.gossip.round
            )),
            other => other,
        })?;
    }
    Ok(total_loss / states.len() as f64)
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidHyperParam(format!("gamma must be in (0,1], got {gamma}")));
    }
    Ok(())
}

/// `sum_j w_ij (v_j - v_i)` accumulated in ascending neighbor order, shared
/// by the engines that mix raw vectors so reduction identities hold exactly.
fn mixing_term(w: &MixingMatrix, i: usize, vectors: &[Vec<f64>]) -> Vec<f64> {
    let own = &vectors[i];
    let mut acc = vec![0.0; own.len()];
    for &j in w.neighbors(i) {
        let wij = w.weight(i, j);
        for ((a, vj), vi) in acc.iter_mut().zip(&vectors[j]).zip(own) {
            *a += wij * (vj - vi);
        }
    }
    acc
}

/// DSGD round: local step, full-parameter exchange, gossip averaging
/// `x_i += gamma * sum_j w_ij (x_j - x_i)` over the half-step iterates.
pub fn dsgd_round(
    states: &mut [LearnerState],
    w: &MixingMatrix,
    gamma: f64,
    lr: f64,
    cfg: &OptimizerConfig,
    grads: &mut dyn GradientSource,
) -> Result<TrainRoundReport> {
    check_gamma(gamma)?;
    let mean_loss = local_steps(states, grads, lr, cfg)?;
    let snapshot: Vec<Vec<f64>> = states.iter().map(|s| s.params().to_vec()).collect();
    let dim = snapshot[0].len();
    let dense = CompressorSpec::Identity.payload_bytes_for_dim(dim);
    let mut bytes = Vec::with_capacity(states.len());
    for (i, state) in states.iter_mut().enumerate() {
        let term = mixing_term(w, i, &snapshot);
        for (p, t) in state.gossip.x.iter_mut().zip(&term) {
            *p += gamma * t;
        }
        state.gossip.round += 1;
        bytes.push(dense * w.out_degree(i) as u64);
    }
    Ok(TrainRoundReport { bytes_per_agent: bytes, mean_loss, max_gossip_error_inf: 0.0 })
}

/// DeepSqueeze round: compress the error-compensated half-step parameters
/// `v_i = x_i + residual_i`, carry the compression error forward, and mix
/// the published values.
pub fn deepsqueeze_round(
    states: &mut [LearnerState],
    w: &MixingMatrix,
    c: &CompressorSpec,
    gamma: f64,
    lr: f64,
    cfg: &OptimizerConfig,
    grads: &mut dyn GradientSource,
) -> Result<TrainRoundReport> {
    check_gamma(gamma)?;
    let mean_loss = local_steps(states, grads, lr, cfg)?;
    let mut published = Vec::with_capacity(states.len());
    let mut bytes = Vec::with_capacity(states.len());
    for (i, state) in states.iter_mut().enumerate() {
        let v: Vec<f64> = state
            .params()
            .iter()
            .zip(&state.deepsqueeze_residual)
            .map(|(x, r)| x + r)
            .collect();
        let payload = compress(c, &v)?;
        bytes.push(payload_bytes(&payload) * w.out_degree(i) as u64);
        let p = decompress(&payload)?;
        for ((r, vk), pk) in state.deepsqueeze_residual.iter_mut().zip(&v).zip(&p) {
            *r = vk - pk;
        }
        published.push(p);
    }
    for (i, state) in states.iter_mut().enumerate() {
        let term = mixing_term(w, i, &published);
        for (x, t) in state.gossip.x.iter_mut().zip(&term) {
            *x += gamma * t;
        }
        state.gossip.round += 1;
    }
    Ok(TrainRoundReport { bytes_per_agent: bytes, mean_loss, max_gossip_error_inf: 0.0 })
}

fn max_inf(vecs: &[Vec<f64>]) -> f64 {
    vecs.iter().flat_map(|v| v.iter()).fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// CHOCO-SGD round: local step, compressed difference exchange through the
/// public copies, constant-step gossip `x_i += gamma * e_i`.
pub fn choco_sgd_round(
    states: &mut [LearnerState],
    w: &MixingMatrix,
    c: &CompressorSpec,
    gamma: f64,
    lr: f64,
    cfg: &OptimizerConfig,
    grads: &mut dyn GradientSource,
) -> Result<TrainRoundReport> {
    check_gamma(gamma)?;
    let mean_loss = local_steps(states, grads, lr, cfg)?;
    let mut gossip: Vec<&mut GossipAgentState> =
        states.iter_mut().map(|s| &mut s.gossip).collect();
    let (errors, bytes) = gossip_exchange(&mut gossip, w, c)?;
    for (state, e) in states.iter_mut().zip(&errors) {
        for (x, e) in state.gossip.x.iter_mut().zip(e) {
            *x += gamma * e;
        }
        state.gossip.round += 1;
    }
    Ok(TrainRoundReport {
        bytes_per_agent: bytes,
        mean_loss,
        max_gossip_error_inf: max_inf(&errors),
    })
}

/// AdaG-SGD round: CHOCO's exchange followed by the second raw moment update
/// and the elementwise adaptive consensus step.
pub fn adag_sgd_round(
    states: &mut [LearnerState],
    w: &MixingMatrix,
    c: &CompressorSpec,
    hp: &GossipHyperParams,
    lr: f64,
    cfg: &OptimizerConfig,
    grads: &mut dyn GradientSource,
) -> Result<TrainRoundReport> {
    hp.validate()?;
    let mean_loss = local_steps(states, grads, lr, cfg)?;
    let mut gossip: Vec<&mut GossipAgentState> =
        states.iter_mut().map(|s| &mut s.gossip).collect();
    let (errors, bytes) = gossip_exchange(&mut gossip, w, c)?;
    for (state, e) in states.iter_mut().zip(&errors) {
        let g = &mut state.gossip;
        apply_adaptive_step(&mut g.x, &mut g.u, e, hp);
        g.round += 1;
    }
    Ok(TrainRoundReport {
        bytes_per_agent: bytes,
        mean_loss,
        max_gossip_error_inf: max_inf(&errors),
    })
}

/// (1/n) sum_i ||params_i - mean||^2.
pub fn consensus_distance(states: &[LearnerState]) -> f64 {
    consensus_distance_of(states.iter().map(LearnerState::params))
}

/// Coordinate-wise average of all agents' parameters.
pub fn consensus_model(states: &[LearnerState]) -> Vec<f64> {
    let n = states.len() as f64;
    let mut mean = vec![0.0; states[0].params().len()];
    for s in states {
        for (m, p) in mean.iter_mut().zip(s.params()) {
            *m += p / n;
        }
    }
    mean
}

/// Accuracy and loss of the averaged model on `indices` of `data` (whole set
/// when `None`).
pub fn evaluate_consensus_model(
    states: &[LearnerState],
    spec: &ModelSpec,
    data: &Dataset,
    indices: Option<&[usize]>,
) -> Result<(f64, f64)> {
    models::evaluate(spec, &consensus_model(states), data, indices)
}
