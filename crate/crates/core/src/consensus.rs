//! Distributed average consensus engines: CHOCO-Gossip with a constant
//! consensus step-size and AdaGossip with an elementwise-adaptive one.
//!
//! Rounds are synchronous and two-phase: every compressed difference is
//! computed from the round-start snapshot, then all public-copy updates and
//! local updates are applied. Agents exchange nothing but the compressed
//! payloads, so the sequential schedule below is bit-identical to any
//! per-agent parallelization of a phase.

use std::collections::BTreeMap;

use crate::compression::{compress, decompress, payload_bytes, CompressorSpec};
use crate::error::{Error, Result};
use crate::topology::MixingMatrix;

/// Per-agent gossip state: private value, public copies of the
/// neighborhood, and the second raw moment estimate of the gossip-error.
#[derive(Debug, Clone)]
pub struct GossipAgentState {
    id: usize,
    /// Private value x_i.
    pub x: Vec<f64>,
    /// Public copies, one per neighbor including self.
    x_hat: BTreeMap<usize, Vec<f64>>,
    /// Second raw moment estimate of the gossip-error, elementwise >= 0.
    pub u: Vec<f64>,
    /// Completed synchronous rounds.
    pub round: u64,
}

impl GossipAgentState {
    /// Fresh state with zeroed public copies and moment estimate.
    pub fn new(id: usize, w: &MixingMatrix, x: Vec<f64>) -> Self {
        let dim = x.len();
        let x_hat = w.neighbors(id).iter().map(|&j| (j, vec![0.0; dim])).collect();
        Self { id, x, x_hat, u: vec![0.0; dim], round: 0 }
    }

    pub fn id(&self) -> usize {
        self.id
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// This agent's reconstruction of neighbor `j`, if `j` is in its neighborhood.
    pub fn public_copy(&self, j: usize) -> Option<&[f64]> {
        self.x_hat.get(&j).map(Vec::as_slice)
    }
}

/// Hyper-parameters of the adaptive gossip step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GossipHyperParams {
    pub gamma: f64,
    pub beta: f64,
    pub epsilon: f64,
}

impl GossipHyperParams {
    pub const DEFAULT_BETA: f64 = 0.999;
    pub const DEFAULT_EPSILON: f64 = 1e-8;

    pub fn new(gamma: f64, beta: f64, epsilon: f64) -> Result<Self> {
        let hp = Self { gamma, beta, epsilon };
        hp.validate()?;
        Ok(hp)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::InvalidHyperParam(format!(
                "gamma must be in (0,1], got {}",
                self.gamma
            )));
        }
        if !(0.0..1.0).contains(&self.beta) {
            return Err(Error::InvalidHyperParam(format!(
                "beta must be in [0,1), got {}",
                self.beta
            )));
        }
        if self.epsilon <= 0.0 || self.epsilon.is_nan() {
            return Err(Error::InvalidHyperParam(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        Ok(())
    }
}

/// What one synchronous round transmitted and how large its gossip-errors were.
#[derive(Debug, Clone)]
pub struct RoundReport {
    /// Wire bytes each agent sent (one payload per outgoing edge).
    pub bytes_per_agent: Vec<u64>,
    /// max_i ||e_i||_inf for this round.
    pub max_gossip_error_inf: f64,
}

impl RoundReport {
    pub fn total_bytes(&self) -> u64 {
        self.bytes_per_agent.iter().sum()
    }
}

/// Initializes one state per agent with zeroed public copies.
pub fn init_states(w: &MixingMatrix, initial: &[Vec<f64>]) -> Result<Vec<GossipAgentState>> {
    check_agents(w, initial.iter().map(Vec::len))?;
    Ok(initial
        .iter()
        .enumerate()
        .map(|(i, x)| GossipAgentState::new(i, w, x.clone()))
        .collect())
}

/// Initializes states whose public copies already equal the true neighbor
/// values, as if a lossless warm-up round had run.
pub fn init_states_synced(w: &MixingMatrix, initial: &[Vec<f64>]) -> Result<Vec<GossipAgentState>> {
    let mut states = init_states(w, initial)?;
    for state in &mut states {
        for (j, copy) in state.x_hat.iter_mut() {
            copy.copy_from_slice(&initial[*j]);
        }
    }
    Ok(states)
}

fn check_agents(w: &MixingMatrix, dims: impl ExactSizeIterator<Item = usize>) -> Result<()> {
    if dims.len() != w.n() {
        return Err(Error::DimensionMismatch(format!(
            "{} agents for a {}-node mixing matrix",
            dims.len(),
            w.n()
        )));
    }
    let mut first = 0usize;
    for (i, d) in dims.enumerate() {
        if d == 0 {
            return Err(Error::DimensionMismatch("agent vectors must be nonempty".into()));
        }
        if i == 0 {
            first = d;
        } else if d != first {
            return Err(Error::DimensionMismatch(format!(
                "agent {i} has dim {d} but agent 0 has dim {first}"
            )));
        }
    }
    Ok(())
}

/// The shared SEND/RECEIVE phase of CHOCO-style rounds.
///
/// Compresses `x_i - x_hat_i` for every agent from the round-start snapshot,
/// applies the received updates to every public copy, and returns the
/// gossip-errors `e_i = sum_j w_ij (x_hat_j - x_hat_i)` along with the bytes
/// each agent sent.
pub(crate) fn gossip_exchange(
    agents: &mut [&mut GossipAgentState],
    w: &MixingMatrix,
    c: &CompressorSpec,
) -> Result<(Vec<Vec<f64>>, Vec<u64>)> {
    check_agents(w, agents.iter().map(|s| s.dim()))?;
    let dim = agents[0].dim();

    // Phase 1: every delta comes from the snapshot before any update.
    let mut deltas = Vec::with_capacity(agents.len());
    let mut bytes = Vec::with_capacity(agents.len());
    for (i, state) in agents.iter().enumerate() {
        let own_copy = &state.x_hat[&state.id];
        let diff: Vec<f64> = state.x.iter().zip(own_copy).map(|(a, b)| a - b).collect();
        let payload = compress(c, &diff).map_err(|e| tag_agent(e, i, state.round))?;
        bytes.push(payload_bytes(&payload) * w.out_degree(i) as u64);
        deltas.push(decompress(&payload)?);
    }

    // Phase 2: apply received deltas, then read off the gossip-errors.
    let mut errors = Vec::with_capacity(agents.len());
    for state in agents.iter_mut() {
        for (j, copy) in state.x_hat.iter_mut() {
            let delta = &deltas[*j];
            for (c, d) in copy.iter_mut().zip(delta) {
                *c += d;
            }
        }
        let own = &state.x_hat[&state.id];
        let mut e = vec![0.0; dim];
        for (j, copy) in &state.x_hat {
            let wij = w.weight(state.id, *j);
            for ((e, c), o) in e.iter_mut().zip(copy).zip(own) {
                *e += wij * (c - o);
            }
        }
        errors.push(e);
    }
    Ok((errors, bytes))
}

fn tag_agent(e: Error, agent: usize, round: u64) -> Error {
    match e {
        Error::NonFinite(msg) => {
            Error::NonFinite(format!("agent {agent}, round {round}: {msg}"))
        }
        other => other,
    }
}

fn max_inf_norm(vecs: &[Vec<f64>]) -> f64 {
    vecs.iter()
        .flat_map(|v| v.iter())
        .fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// One CHOCO-Gossip round: `x_i += gamma * e_i` with constant step-size.
pub fn choco_gossip_round(
    states: &mut [GossipAgentState],
    w: &MixingMatrix,
    c: &CompressorSpec,
    gamma: f64,
) -> Result<RoundReport> {
    if !(gamma > 0.0 && gamma <= 1.0) {
        return Err(Error::InvalidHyperParam(format!(
            "gamma must be in (0,1], got {gamma}"
        )));
    }
    let mut agents: Vec<&mut GossipAgentState> = states.iter_mut().collect();
    let (errors, bytes) = gossip_exchange(&mut agents, w, c)?;
    for (state, e) in states.iter_mut().zip(&errors) {
        for (x, e) in state.x.iter_mut().zip(e) {
            *x += gamma * e;
        }
        state.round += 1;
    }
    Ok(RoundReport { bytes_per_agent: bytes, max_gossip_error_inf: max_inf_norm(&errors) })
}

/// One AdaGossip round: the CHOCO exchange followed by the second raw moment
/// update `u = beta u + (1-beta) e^2` and the adaptive step
/// `x += gamma / (sqrt(u) + epsilon) * e`, all elementwise.
pub fn adagossip_round(
    states: &mut [GossipAgentState],
    w: &MixingMatrix,
    c: &CompressorSpec,
    hp: &GossipHyperParams,
) -> Result<RoundReport> {
    hp.validate()?;
    let mut agents: Vec<&mut GossipAgentState> = states.iter_mut().collect();
    let (errors, bytes) = gossip_exchange(&mut agents, w, c)?;
    for (state, e) in states.iter_mut().zip(&errors) {
        apply_adaptive_step(&mut state.x, &mut state.u, e, hp);
        state.round += 1;
    }
    Ok(RoundReport { bytes_per_agent: bytes, max_gossip_error_inf: max_inf_norm(&errors) })
}

/// Shared by AdaGossip and AdaG-SGD.
pub(crate) fn apply_adaptive_step(
    x: &mut [f64],
    u: &mut [f64],
    e: &[f64],
    hp: &GossipHyperParams,
) {
    for ((x, u), e) in x.iter_mut().zip(u.iter_mut()).zip(e) {
        *u = hp.beta * *u + (1.0 - hp.beta) * e * e;
        *x += hp.gamma / (u.sqrt() + hp.epsilon) * e;
    }
}

/// (1/n) sum_i ||x_i - mean||^2 over the private values.
pub fn consensus_distance(states: &[GossipAgentState]) -> f64 {
    consensus_distance_of(states.iter().map(|s| s.x.as_slice()))
}

pub(crate) fn consensus_distance_of<'a>(
    xs: impl ExactSizeIterator<Item = &'a [f64]> + Clone,
) -> f64 {
    let n = xs.len();
    if n == 0 {
        return 0.0;
    }
    let dim = xs.clone().next().map_or(0, <[f64]>::len);
    let mut mean = vec![0.0; dim];
    for x in xs.clone() {
        for (m, v) in mean.iter_mut().zip(x) {
            *m += v;
        }
    }
    for m in &mut mean {
        *m /= n as f64;
    }
    let total: f64 = xs
        .map(|x| x.iter().zip(&mean).map(|(v, m)| (v - m) * (v - m)).sum::<f64>())
        .sum();
    total / n as f64
}

/// Which consensus engine drives a pure averaging run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GossipEngine {
    Choco,
    Adagossip,
}

/// One sampled point of a consensus run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConsensusSample {
    pub round: u64,
    pub distance: f64,
    /// Bytes sent so far, summed over all agents.
    pub cumulative_bytes: u64,
}

/// Runs `rounds` rounds of the selected engine from zeroed public copies,
/// sampling consensus distance and cumulative transmitted bytes every round.
pub fn run_consensus(
    initial: &[Vec<f64>],
    w: &MixingMatrix,
    c: &CompressorSpec,
    engine: GossipEngine,
    hp: &GossipHyperParams,
    rounds: u64,
) -> Result<Vec<ConsensusSample>> {
    if rounds == 0 {
        return Err(Error::InvalidHyperParam("need at least one round".into()));
    }
    let mut states = init_states(w, initial)?;
    let mut series = Vec::with_capacity(rounds as usize);
    let mut cumulative = 0u64;
    for round in 1..=rounds {
        let report = match engine {
            GossipEngine::Choco => choco_gossip_round(&mut states, w, c, hp.gamma)?,
            GossipEngine::Adagossip => adagossip_round(&mut states, w, c, hp)?,
        };
        cumulative += report.total_bytes();
        series.push(ConsensusSample {
            round,
            distance: consensus_distance(&states),
            cumulative_bytes: cumulative,
        });
    }
    Ok(series)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    fn two_agents_full() -> (MixingMatrix, Vec<Vec<f64>>) {
        let w = MixingMatrix::fully_connected(2).unwrap();
        (w, vec![vec![0.0], vec![2.0]])
    }

    fn mean_per_coord(states: &[GossipAgentState]) -> Vec<f64> {
        let n = states.len() as f64;
        let dim = states[0].dim();
        let mut mean = vec![0.0; dim];
        for s in states {
            for (m, v) in mean.iter_mut().zip(&s.x) {
                *m += v / n;
            }
        }
        mean
    }

    #[test]
    fn synced_consensus_is_a_fixed_point() {
        let w = MixingMatrix::ring(4).unwrap();
        let xs = vec![vec![1.5, -2.0]; 4];
        let mut states = init_states_synced(&w, &xs).unwrap();
        let report =
            choco_gossip_round(&mut states, &w, &CompressorSpec::Identity, 0.7).unwrap();
        assert_eq!(report.max_gossip_error_inf, 0.0);
        for s in &states {
            assert_eq!(s.x, vec![1.5, -2.0]);
        }
    }

    #[test]
    fn choco_two_agents_average_in_one_round() {
        let (w, xs) = two_agents_full();
        let mut states = init_states(&w, &xs).unwrap();
        choco_gossip_round(&mut states, &w, &CompressorSpec::Identity, 1.0).unwrap();
        // delta transmits x exactly from zeroed copies, so e = (1, -1).
        assert_eq!(states[0].x, vec![1.0]);
        assert_eq!(states[1].x, vec![1.0]);
        assert_eq!(states[0].public_copy(1).unwrap(), &[2.0]);
        assert_eq!(states[1].public_copy(0).unwrap(), &[0.0]);
    }

    #[test]
    fn adagossip_two_agent_hand_example() {
        let (w, xs) = two_agents_full();
        let mut states = init_states(&w, &xs).unwrap();
        let hp = GossipHyperParams::new(0.5, 0.0, 1e-8).unwrap();
        adagossip_round(&mut states, &w, &CompressorSpec::Identity, &hp).unwrap();
        // e = (1,-1), u = (1,1), step = 0.5/(1+1e-8).
        assert_eq!(states[0].u, vec![1.0]);
        assert_eq!(states[1].u, vec![1.0]);
        assert!((states[0].x[0] - 0.5).abs() < 1e-7, "x0 = {}", states[0].x[0]);
        assert!((states[1].x[0] - 1.5).abs() < 1e-7, "x1 = {}", states[1].x[0]);
    }

    #[test]
    fn adaptive_multiplier_bounded_by_gamma_over_epsilon() {
        // With beta = 0 and |e| far from 0 the step is about gamma/|e| * e,
        // i.e. a sign step of size gamma.
        let (w, xs) = two_agents_full();
        let mut states = init_states(&w, &xs).unwrap();
        let hp = GossipHyperParams::new(0.25, 0.0, 1e-8).unwrap();
        adagossip_round(&mut states, &w, &CompressorSpec::Identity, &hp).unwrap();
        let step = states[0].x[0];
        assert!((step - hp.gamma).abs() < 1e-6, "step = {step}");
        assert!(step <= hp.gamma / hp.epsilon);
    }

    #[test]
    fn zero_gossip_error_decays_u_geometrically() {
        let w = MixingMatrix::fully_connected(3).unwrap();
        let xs = vec![vec![4.0]; 3];
        let mut states = init_states_synced(&w, &xs).unwrap();
        for s in &mut states {
            s.u = vec![1.0];
        }
        let hp = GossipHyperParams::new(0.5, 0.5, 1e-8).unwrap();
        for round in 1..=10 {
            adagossip_round(&mut states, &w, &CompressorSpec::Identity, &hp).unwrap();
            for s in &states {
                assert_eq!(s.x, vec![4.0], "x drifted with zero error");
                let expect = 0.5f64.powi(round);
                assert!((s.u[0] - expect).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn choco_preserves_mean_under_top_k() {
        let w = MixingMatrix::ring(8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(7);
        let xs: Vec<Vec<f64>> =
            (0..8).map(|_| (0..20).map(|_| rng.gen_range(-5.0..5.0)).collect()).collect();
        let mut states = init_states(&w, &xs).unwrap();
        let initial_mean = mean_per_coord(&states);
        let c = CompressorSpec::top_k(0.9).unwrap();
        for _ in 0..100 {
            choco_gossip_round(&mut states, &w, &c, 0.4).unwrap();
        }
        let final_mean = mean_per_coord(&states);
        let scale = initial_mean.iter().fold(1e-30, |m: f64, v| m.max(v.abs()));
        for (a, b) in initial_mean.iter().zip(&final_mean) {
            assert!((a - b).abs() / scale < 1e-9, "mean moved: {a} -> {b}");
        }
        // And the agents actually contracted toward that mean.
        assert!(consensus_distance(&states) < consensus_distance_of(xs.iter().map(Vec::as_slice)));
    }

    #[test]
    fn adagossip_mean_drift_within_loose_bound() {
        let w = MixingMatrix::ring(8).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(11);
        let xs: Vec<Vec<f64>> =
            (0..8).map(|_| (0..10).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let mut states = init_states(&w, &xs).unwrap();
        let hp = GossipHyperParams::new(0.05, 0.999, 1e-8).unwrap();
        let c = CompressorSpec::top_k(0.5).unwrap();
        for _ in 0..50 {
            let before = mean_per_coord(&states);
            let report = adagossip_round(&mut states, &w, &c, &hp).unwrap();
            let after = mean_per_coord(&states);
            let drift = before
                .iter()
                .zip(&after)
                .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()));
            let bound = hp.gamma / hp.epsilon * report.max_gossip_error_inf;
            assert!(drift <= bound, "drift {drift} exceeds loose bound {bound}");
        }
    }

    /// Independent transcription of the adaptive gossip recurrence using
    /// plain index arithmetic, recording every gossip-error. Used to check
    /// both the state trajectory and the closed-form EMA identity.
    #[allow(clippy::needless_range_loop, clippy::type_complexity)]
    fn adagossip_oracle(
        xs: &[Vec<f64>],
        w: &MixingMatrix,
        c: &CompressorSpec,
        hp: &GossipHyperParams,
        rounds: usize,
    ) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, Vec<Vec<Vec<f64>>>) {
        let n = xs.len();
        let dim = xs[0].len();
        let mut x: Vec<Vec<f64>> = xs.to_vec();
        let mut xh = vec![vec![vec![0.0; dim]; n]; n]; // xh[i][j] = agent i's copy of j
        let mut u = vec![vec![0.0; dim]; n];
        let mut error_log = Vec::new();
        for _ in 0..rounds {
            let mut deltas = Vec::new();
            for i in 0..n {
                let diff: Vec<f64> =
                    (0..dim).map(|k| x[i][k] - xh[i][i][k]).collect();
                deltas.push(decompress(&compress(c, &diff).unwrap()).unwrap());
            }
            for i in 0..n {
                for j in 0..n {
                    if w.weight(i, j) > 0.0 {
                        for k in 0..dim {
                            xh[i][j][k] += deltas[j][k];
                        }
                    }
                }
            }
            let mut errors = vec![vec![0.0; dim]; n];
            for i in 0..n {
                for j in 0..n {
                    let wij = w.weight(i, j);
                    if wij > 0.0 {
                        for k in 0..dim {
                            errors[i][k] += wij * (xh[i][j][k] - xh[i][i][k]);
                        }
                    }
                }
            }
            for i in 0..n {
                for k in 0..dim {
                    u[i][k] = hp.beta * u[i][k] + (1.0 - hp.beta) * errors[i][k] * errors[i][k];
                    x[i][k] += hp.gamma / (u[i][k].sqrt() + hp.epsilon) * errors[i][k];
                }
            }
            error_log.push(errors);
        }
        (x, u, error_log)
    }

    #[test]
    fn u_matches_brute_force_ema_over_ten_rounds() {
        let w = MixingMatrix::ring(5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(3);
        let xs: Vec<Vec<f64>> =
            (0..5).map(|_| (0..6).map(|_| rng.gen_range(-2.0..2.0)).collect()).collect();
        let hp = GossipHyperParams::new(0.3, 0.8, 1e-8).unwrap();
        let c = CompressorSpec::top_k(0.5).unwrap();
        let rounds = 10;

        let mut states = init_states(&w, &xs).unwrap();
        for _ in 0..rounds {
            adagossip_round(&mut states, &w, &c, &hp).unwrap();
        }
        let (ox, ou, errors) = adagossip_oracle(&xs, &w, &c, &hp, rounds);

        for (i, s) in states.iter().enumerate() {
            for k in 0..s.dim() {
                assert!((s.x[k] - ox[i][k]).abs() < 1e-12, "x[{i}][{k}]");
                assert!((s.u[k] - ou[i][k]).abs() < 1e-12, "u[{i}][{k}]");
                // Closed form: u^t = (1-beta) sum_s beta^(t-s) e_s^2.
                let closed: f64 = (0..rounds)
                    .map(|s_| {
                        (1.0 - hp.beta)
                            * hp.beta.powi((rounds - 1 - s_) as i32)
                            * errors[s_][i][k]
                            * errors[s_][i][k]
                    })
                    .sum();
                assert!((s.u[k] - closed).abs() < 1e-12, "closed form u[{i}][{k}]");
                assert!(s.u[k] >= 0.0);
            }
        }
    }

    #[test]
    fn consensus_distance_examples() {
        let w = MixingMatrix::fully_connected(2).unwrap();
        let equal = init_states(&w, &vec![vec![3.0, 3.0]; 2]).unwrap();
        assert_eq!(consensus_distance(&equal), 0.0);

        let spread = init_states(&w, &[vec![0.0], vec![2.0]]).unwrap();
        assert_eq!(consensus_distance(&spread), 1.0);

        let shifted = init_states(&w, &[vec![10.0], vec![12.0]]).unwrap();
        assert!((consensus_distance(&shifted) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn run_consensus_rejects_zero_rounds() {
        let (w, xs) = two_agents_full();
        let hp = GossipHyperParams::new(1.0, 0.999, 1e-8).unwrap();
        assert!(run_consensus(&xs, &w, &CompressorSpec::Identity, GossipEngine::Choco, &hp, 0)
            .is_err());
    }

    #[test]
    fn run_consensus_choco_full_identity_converges_in_one_round() {
        let w = MixingMatrix::fully_connected(4).unwrap();
        let xs: Vec<Vec<f64>> = (0..4).map(|i| vec![i as f64, -(i as f64)]).collect();
        let hp = GossipHyperParams::new(1.0, 0.999, 1e-8).unwrap();
        let series =
            run_consensus(&xs, &w, &CompressorSpec::Identity, GossipEngine::Choco, &hp, 3)
                .unwrap();
        assert_eq!(series[0].round, 1);
        assert!(series[0].distance < 1e-28, "distance = {}", series[0].distance);
        // bytes: 4 agents x 3 outgoing edges x 8 bytes per dense 2-vector.
        assert_eq!(series[0].cumulative_bytes, 4 * 3 * 8);
        assert_eq!(series[2].cumulative_bytes, 3 * 4 * 3 * 8);
    }

    #[test]
    fn trajectories_are_bit_identical_across_reruns() {
        let w = MixingMatrix::ring(6).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(99);
        let xs: Vec<Vec<f64>> =
            (0..6).map(|_| (0..12).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let hp = GossipHyperParams::new(0.02, 0.999, 1e-8).unwrap();
        let c = CompressorSpec::uniform_quant(4).unwrap();
        let a = run_consensus(&xs, &w, &c, GossipEngine::Adagossip, &hp, 50).unwrap();
        let b = run_consensus(&xs, &w, &c, GossipEngine::Adagossip, &hp, 50).unwrap();
        for (sa, sb) in a.iter().zip(&b) {
            assert_eq!(sa.distance.to_bits(), sb.distance.to_bits());
            assert_eq!(sa.cumulative_bytes, sb.cumulative_bytes);
        }
    }

    #[test]
    fn dimension_and_gamma_validation() {
        let (w, _) = two_agents_full();
        let bad_dims = vec![vec![1.0, 2.0], vec![3.0]];
        assert!(init_states(&w, &bad_dims).is_err());

        let xs = vec![vec![1.0], vec![2.0]];
        let mut states = init_states(&w, &xs).unwrap();
        assert!(matches!(
            choco_gossip_round(&mut states, &w, &CompressorSpec::Identity, 0.0),
            Err(Error::InvalidHyperParam(_))
        ));
        assert!(matches!(
            choco_gossip_round(&mut states, &w, &CompressorSpec::Identity, 1.5),
            Err(Error::InvalidHyperParam(_))
        ));
    }

    #[test]
    fn public_copies_stay_consistent_across_agents() {
        let w = MixingMatrix::ring(5).unwrap();
        let mut rng = ChaCha12Rng::seed_from_u64(21);
        let xs: Vec<Vec<f64>> =
            (0..5).map(|_| (0..4).map(|_| rng.gen_range(-1.0..1.0)).collect()).collect();
        let mut states = init_states(&w, &xs).unwrap();
        let c = CompressorSpec::top_k(0.5).unwrap();
        for _ in 0..5 {
            choco_gossip_round(&mut states, &w, &c, 0.5).unwrap();
            for i in 0..5 {
                for &j in w.neighbors(i) {
                    let at_i = states[i].public_copy(j).unwrap();
                    let at_j = states[j].public_copy(j).unwrap();
                    assert_eq!(at_i, at_j, "copy of {j} differs at agent {i}");
                }
            }
        }
    }
}
