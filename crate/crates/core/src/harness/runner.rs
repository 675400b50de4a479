//! Experiment driver: seeded runs of the training and gossip-only engines,
//! per-epoch metrics, CSV emission, and hyper-parameter sweeps.

use std::path::Path;
use std::time::Instant;

use rand::seq::SliceRandom;
use rand::Rng;

use crate::consensus::{
    adagossip_round, choco_gossip_round, consensus_distance as gossip_consensus_distance,
    GossipAgentState, RoundReport,
};
use crate::data::{partition_iid, Dataset};
use crate::error::{Error, Result};
use crate::harness::config::{Algorithm, ExperimentConfig, TaskKind};
use crate::harness::ledger::{iterations_per_epoch, BytesLedger};
use crate::harness::rng;
use crate::learning::{
    adag_sgd_round, choco_sgd_round, consensus_distance, consensus_model, deepsqueeze_round,
    dsgd_round, evaluate_consensus_model, init_learners, lr_schedule, LearnerState,
    TrainRoundReport,
};
use crate::models::{self, ModelSpec};
use crate::topology::parse_topology;

/// One CSV row: per-seed, per-epoch metrics.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricsRecord {
    pub run_id: String,
    pub seed: u64,
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub test_accuracy: f64,
    pub consensus_distance: f64,
    /// Cumulative MB transmitted per agent (uniform across agents for the
    /// regular topologies this crate builds).
    pub mb_transmitted_cumulative: f64,
    pub wall_seconds: f64,
}

pub const CSV_SCHEMA: &str = "run_id,seed,epoch,lr,train_loss,test_accuracy,\
consensus_distance,mb_transmitted_cumulative,wall_seconds";

/// A seed whose run aborted, with the error that stopped it.
#[derive(Debug, Clone)]
pub struct SeedFailure {
    pub seed: u64,
    pub message: String,
}

/// Final-epoch aggregation over seeds.
#[derive(Debug, Clone)]
pub struct RunSummary {
    pub final_accuracy_per_seed: Vec<(u64, f64)>,
    pub mean_accuracy: f64,
    /// Sample standard deviation (n-1); 0 for a single seed.
    pub std_accuracy: f64,
    pub failures: Vec<SeedFailure>,
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub records: Vec<MetricsRecord>,
    pub summary: RunSummary,
}

/// Train/test data plus the model architecture sized for it.
#[derive(Debug, Clone)]
pub struct TaskData {
    pub train: Dataset,
    pub test: Dataset,
    pub model: ModelSpec,
}

/// Builds the dataset pair and model for a config. Deterministic in the
/// task's own data seed, independent of the run seeds.
pub fn materialize_task(cfg: &ExperimentConfig) -> Result<TaskData> {
    let (train, test) = match &cfg.task {
        TaskKind::Blobs { samples, test_samples, input_dim, classes, separation, data_seed } => {
            let train = crate::data::generate_synthetic_classification(
                *data_seed,
                *samples,
                *input_dim,
                *classes,
                *separation,
            )?;
            let test_seed = data_seed.wrapping_mul(0x9e37_79b9_7f4a_7c15).wrapping_add(1);
            let test = crate::data::generate_synthetic_classification(
                test_seed,
                *test_samples,
                *input_dim,
                *classes,
                *separation,
            )?;
            (train, test)
        }
        TaskKind::Csv { path, has_header, test_path } => {
            let format = crate::data::DataFormat::Csv { has_header: *has_header };
            let train = crate::data::load_dataset(path, format)?;
            match test_path {
                Some(tp) => (train, crate::data::load_dataset(tp, format)?),
                None => split_holdout(train, 0.2),
            }
        }
        TaskKind::Idx { path, test_path } => {
            let train = crate::data::load_dataset(path, crate::data::DataFormat::Idx)?;
            match test_path {
                Some(tp) => (train, crate::data::load_dataset(tp, crate::data::DataFormat::Idx)?),
                None => split_holdout(train, 0.2),
            }
        }
    };
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidData("empty train or test split".into()));
    }
    let model = ModelSpec::parse(&cfg.model, train.input_dim, train.num_classes)?;
    Ok(TaskData { train, test, model })
}

/// Seeded 80/20-style holdout for file datasets without an explicit test set.
fn split_holdout(data: Dataset, test_fraction: f64) -> (Dataset, Dataset) {
    let mut perm: Vec<usize> = (0..data.len()).collect();
    let mut split_rng = rng::stream(0, rng::GLOBAL, "holdout-split");
    perm.shuffle(&mut split_rng);
    let test_len = ((data.len() as f64 * test_fraction) as usize).max(1).min(data.len() - 1);
    let (test_idx, train_idx) = perm.split_at(test_len);
    (subset(&data, train_idx), subset(&data, test_idx))
}

fn subset(data: &Dataset, indices: &[usize]) -> Dataset {
    let mut features = Vec::with_capacity(indices.len() * data.input_dim);
    let mut labels = Vec::with_capacity(indices.len());
    for &i in indices {
        features.extend_from_slice(data.feature_row(i));
        labels.push(data.labels[i]);
    }
    Dataset { features, input_dim: data.input_dim, labels, num_classes: data.num_classes }
}

/// Runs every seed of the experiment and aggregates the final accuracies.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentOutput> {
    cfg.validate()?;
    let task = materialize_task(cfg)?;
    let mut records = Vec::new();
    let mut finals = Vec::new();
    let mut failures = Vec::new();
    for &seed in &cfg.seeds {
        match run_seed(cfg, &task, seed) {
            Ok(seed_records) => {
                if let Some(last) = seed_records.last() {
                    finals.push((seed, last.test_accuracy));
                }
                records.extend(seed_records);
            }
            Err(e) => failures.push(SeedFailure { seed, message: e.to_string() }),
        }
    }
    let mean = if finals.is_empty() {
        f64::NAN
    } else {
        finals.iter().map(|(_, a)| a).sum::<f64>() / finals.len() as f64
    };
    let std = if finals.len() < 2 {
        0.0
    } else {
        let var = finals.iter().map(|(_, a)| (a - mean) * (a - mean)).sum::<f64>()
            / (finals.len() - 1) as f64;
        var.sqrt()
    };
    Ok(ExperimentOutput {
        records,
        summary: RunSummary {
            final_accuracy_per_seed: finals,
            mean_accuracy: mean,
            std_accuracy: std,
            failures,
        },
    })
}

/// A completed seed run: its per-epoch records and the final consensus
/// (coordinate-wise average) parameter vector.
#[derive(Debug, Clone)]
pub struct SeedRun {
    pub records: Vec<MetricsRecord>,
    pub final_consensus: Vec<f64>,
}

/// Runs one seed end to end, emitting one record per epoch.
pub fn run_seed(cfg: &ExperimentConfig, task: &TaskData, seed: u64) -> Result<Vec<MetricsRecord>> {
    run_seed_detailed(cfg, task, seed).map(|run| run.records)
}

/// [`run_seed`], also returning the final consensus model.
pub fn run_seed_detailed(cfg: &ExperimentConfig, task: &TaskData, seed: u64) -> Result<SeedRun> {
    let w = parse_topology(&cfg.topology, cfg.agents)?;
    let n = cfg.agents;
    let batch = cfg.optimizer.batch_size;
    let iterations = iterations_per_epoch(task.train.len(), batch, n);
    if iterations == 0 {
        return Err(Error::InvalidConfig(format!(
            "no full batch fits: {} samples across {n} agents at batch {batch}",
            task.train.len()
        )));
    }
    let partition_seed = rng::stream(seed, rng::GLOBAL, "partition").gen::<u64>();
    let partition = partition_iid(&task.train, n, partition_seed)?;

    let start = Instant::now();
    let run_id = cfg.run_id();
    let hp = cfg.hyper_params();
    let mut ledger = BytesLedger::new(n);
    let mut records = Vec::with_capacity(cfg.optimizer.epochs);

    if cfg.algorithm.is_gossip_only() {
        // Agents average their independently initialized parameter vectors;
        // no gradients flow.
        let mut states: Vec<GossipAgentState> = (0..n)
            .map(|i| {
                let mut agent_rng = rng::stream(seed, i as u64, "gossip-init");
                GossipAgentState::new(i, &w, task.model.init_params(&mut agent_rng))
            })
            .collect();
        for epoch in 0..cfg.optimizer.epochs {
            for _ in 0..iterations {
                let report: RoundReport = match cfg.algorithm {
                    Algorithm::GossipOnlyChoco => {
                        choco_gossip_round(&mut states, &w, &cfg.compressor, hp.gamma)?
                    }
                    Algorithm::GossipOnlyAdag => {
                        adagossip_round(&mut states, &w, &cfg.compressor, &hp)?
                    }
                    _ => unreachable!(),
                };
                ledger.record_round(&report.bytes_per_agent);
            }
            ledger.end_epoch();
            let mean: Vec<f64> = {
                let mut m = vec![0.0; states[0].dim()];
                for s in &states {
                    for (mi, xi) in m.iter_mut().zip(&s.x) {
                        *mi += xi / n as f64;
                    }
                }
                m
            };
            let (_, train_loss) = models::evaluate(&task.model, &mean, &task.train, None)?;
            let (accuracy, _) = models::evaluate(&task.model, &mean, &task.test, None)?;
            records.push(MetricsRecord {
                run_id: run_id.clone(),
                seed,
                epoch,
                lr: 0.0,
                train_loss,
                test_accuracy: accuracy,
                consensus_distance: gossip_consensus_distance(&states),
                mb_transmitted_cumulative: ledger.agent_total(0) as f64 / 1e6,
                wall_seconds: start.elapsed().as_secs_f64(),
            });
        }
        let mut final_consensus = vec![0.0; states[0].dim()];
        for s in &states {
            for (m, x) in final_consensus.iter_mut().zip(&s.x) {
                *m += x / n as f64;
            }
        }
        return Ok(SeedRun { records, final_consensus });
    }

    // Training path: synchronized initial model, per-agent batch order
    // streams, one engine round per iteration.
    let init = {
        let mut model_rng = rng::stream(seed, rng::GLOBAL, "model-init");
        task.model.init_params(&mut model_rng)
    };
    let mut learners: Vec<LearnerState> = init_learners(&w, &init);
    let mut order_rngs: Vec<_> =
        (0..n).map(|i| rng::stream(seed, i as u64, "batch-order")).collect();

    for epoch in 0..cfg.optimizer.epochs {
        let lr = lr_schedule(&cfg.optimizer, epoch)?;
        let orders: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut order = partition.shard(i).to_vec();
                order.shuffle(&mut order_rngs[i]);
                order
            })
            .collect();
        let mut loss_sum = 0.0;
        for it in 0..iterations {
            let batches: Vec<&[usize]> =
                (0..n).map(|i| &orders[i][it * batch..(it + 1) * batch]).collect();
            let mut grads = |agent: usize, params: &[f64]| {
                models::forward_backward(&task.model, params, &task.train, batches[agent])
            };
            let report: TrainRoundReport = match cfg.algorithm {
                Algorithm::Dsgd => {
                    dsgd_round(&mut learners, &w, cfg.gamma, lr, &cfg.optimizer, &mut grads)?
                }
                Algorithm::Deepsqueeze => deepsqueeze_round(
                    &mut learners,
                    &w,
                    &cfg.compressor,
                    cfg.gamma,
                    lr,
                    &cfg.optimizer,
                    &mut grads,
                )?,
                Algorithm::Choco => choco_sgd_round(
                    &mut learners,
                    &w,
                    &cfg.compressor,
                    cfg.gamma,
                    lr,
                    &cfg.optimizer,
                    &mut grads,
                )?,
                Algorithm::Adag => adag_sgd_round(
                    &mut learners,
                    &w,
                    &cfg.compressor,
                    &hp,
                    lr,
                    &cfg.optimizer,
                    &mut grads,
                )?,
                Algorithm::GossipOnlyChoco | Algorithm::GossipOnlyAdag => unreachable!(),
            };
            ledger.record_round(&report.bytes_per_agent);
            loss_sum += report.mean_loss;
        }
        ledger.end_epoch();
        let (accuracy, _) = evaluate_consensus_model(&learners, &task.model, &task.test, None)?;
        records.push(MetricsRecord {
            run_id: run_id.clone(),
            seed,
            epoch,
            lr,
            train_loss: loss_sum / iterations as f64,
            test_accuracy: accuracy,
            consensus_distance: consensus_distance(&learners),
            mb_transmitted_cumulative: ledger.agent_total(0) as f64 / 1e6,
            wall_seconds: start.elapsed().as_secs_f64(),
        });
    }
    Ok(SeedRun { records, final_consensus: consensus_model(&learners) })
}

/// Renders records as the versioned CSV document, config echoed in a header
/// comment so a run can be replayed from its output.
pub fn csv_string(cfg: &ExperimentConfig, records: &[MetricsRecord]) -> String {
    let mut out = String::new();
    out.push_str("# adagossip-metrics v1\n");
    out.push_str(&format!("# config: {}\n", cfg.summary_line()));
    out.push_str(CSV_SCHEMA);
    out.push('\n');
    for r in records {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            r.run_id,
            r.seed,
            r.epoch,
            r.lr,
            r.train_loss,
            r.test_accuracy,
            r.consensus_distance,
            r.mb_transmitted_cumulative,
            r.wall_seconds
        ));
    }
    out
}

pub fn write_csv(path: &Path, cfg: &ExperimentConfig, records: &[MetricsRecord]) -> Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    std::fs::write(path, csv_string(cfg, records))?;
    Ok(())
}

/// Sweepable hyper-parameter axes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepAxis {
    Beta,
    Agents,
    Gamma,
}

impl SweepAxis {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "beta" => Ok(Self::Beta),
            "agents" => Ok(Self::Agents),
            "gamma" => Ok(Self::Gamma),
            other => Err(Error::InvalidConfig(format!(
                "unknown sweep axis {other:?} (expected beta, agents or gamma)"
            ))),
        }
    }
}

impl std::fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Beta => write!(f, "beta"),
            Self::Agents => write!(f, "agents"),
            Self::Gamma => write!(f, "gamma"),
        }
    }
}

/// One row of a sweep summary.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub value: f64,
    pub mean_accuracy: f64,
    pub std_accuracy: f64,
}

/// Runs the experiment once per axis value and summarizes final accuracies.
pub fn sweep(cfg: &ExperimentConfig, axis: SweepAxis, values: &[f64]) -> Result<Vec<SweepRow>> {
    if values.is_empty() {
        return Err(Error::InvalidConfig("sweep needs at least one value".into()));
    }
    let mut rows = Vec::with_capacity(values.len());
    for &value in values {
        let mut varied = cfg.clone();
        match axis {
            SweepAxis::Beta => varied.beta = value,
            SweepAxis::Gamma => varied.gamma = value,
            SweepAxis::Agents => {
                if value.fract() != 0.0 || value < 1.0 {
                    return Err(Error::InvalidConfig(format!(
                        "agents sweep values must be positive integers, got {value}"
                    )));
                }
                varied.agents = value as usize;
            }
        }
        let output = run_experiment(&varied)?;
        rows.push(SweepRow {
            value,
            mean_accuracy: output.summary.mean_accuracy,
            std_accuracy: output.summary.std_accuracy,
        });
    }
    Ok(rows)
}

pub fn sweep_csv(axis: SweepAxis, rows: &[SweepRow]) -> String {
    let mut out = format!("{axis},mean_accuracy,std_accuracy\n");
    for r in rows {
        out.push_str(&format!("{},{},{}\n", r.value, r.mean_accuracy, r.std_accuracy));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::config::parse_config;
    use crate::harness::ledger::predicted_bytes_per_epoch;

    fn small_config(extra: &[(&str, &str)]) -> ExperimentConfig {
        let mut pairs: Vec<(String, String)> = [
            ("algorithm", "choco"),
            ("topology", "ring"),
            ("agents", "4"),
            ("compressor", "topk:0.9"),
            ("gamma", "0.3"),
            ("epochs", "3"),
            ("batch", "8"),
            ("samples", "256"),
            ("test_samples", "64"),
            ("input_dim", "6"),
            ("classes", "3"),
            ("separation", "2.0"),
            ("model", "logreg"),
            ("seeds", "1"),
        ]
        .iter()
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect();
        for (k, v) in extra {
            pairs.push((k.to_string(), v.to_string()));
        }
        parse_config(None, &pairs).unwrap()
    }

    #[test]
    fn identical_seeds_give_identical_series() {
        let cfg = small_config(&[("seeds", "1,1")]);
        let out = run_experiment(&cfg).unwrap();
        assert_eq!(out.records.len(), 6);
        let (a, b) = out.records.split_at(3);
        for (ra, rb) in a.iter().zip(b) {
            assert_eq!(ra.train_loss.to_bits(), rb.train_loss.to_bits());
            assert_eq!(ra.test_accuracy.to_bits(), rb.test_accuracy.to_bits());
            assert_eq!(ra.consensus_distance.to_bits(), rb.consensus_distance.to_bits());
            assert_eq!(
                ra.mb_transmitted_cumulative.to_bits(),
                rb.mb_transmitted_cumulative.to_bits()
            );
        }
        assert_eq!(out.summary.std_accuracy, 0.0);
    }

    #[test]
    fn seed_isolation_changing_one_seed_keeps_others() {
        let base = run_experiment(&small_config(&[("seeds", "1,2")])).unwrap();
        let varied = run_experiment(&small_config(&[("seeds", "1,3")])).unwrap();
        // Everything but the measured wall clock must replay exactly.
        let rows_for = |out: &ExperimentOutput, seed: u64| -> Vec<(u64, u64, u64, u64)> {
            out.records
                .iter()
                .filter(|r| r.seed == seed)
                .map(|r| {
                    (
                        r.train_loss.to_bits(),
                        r.test_accuracy.to_bits(),
                        r.consensus_distance.to_bits(),
                        r.mb_transmitted_cumulative.to_bits(),
                    )
                })
                .collect()
        };
        assert_eq!(rows_for(&base, 1), rows_for(&varied, 1));
        assert_ne!(rows_for(&base, 2), rows_for(&varied, 3));
    }

    #[test]
    fn ledger_column_matches_predicted_bytes_every_epoch() {
        let cfg = small_config(&[]);
        let task = materialize_task(&cfg).unwrap();
        let w = parse_topology(&cfg.topology, cfg.agents).unwrap();
        let predicted = predicted_bytes_per_epoch(
            task.model.param_count(),
            task.train.len(),
            cfg.agents,
            cfg.optimizer.batch_size,
            &w,
            &cfg.compressor,
        );
        let out = run_experiment(&cfg).unwrap();
        for r in &out.records {
            let expect = predicted * (r.epoch + 1) as f64;
            assert!(
                (r.mb_transmitted_cumulative - expect).abs() < 1e-12,
                "epoch {}: {} vs {expect}",
                r.epoch,
                r.mb_transmitted_cumulative
            );
        }
    }

    #[test]
    fn single_agent_adag_matches_plain_sgd_records() {
        let cfg = small_config(&[
            ("algorithm", "adag"),
            ("topology", "full"),
            ("agents", "1"),
            ("compressor", "none"),
            ("gamma", "0.5"),
            ("seeds", "9"),
        ]);
        let task = materialize_task(&cfg).unwrap();
        let records = run_seed(&cfg, &task, 9).unwrap();

        // Oracle: a single-process SGD loop over the same shard and order.
        let w = parse_topology("full", 1).unwrap();
        let partition_seed = rng::stream(9, rng::GLOBAL, "partition").gen::<u64>();
        let partition = partition_iid(&task.train, 1, partition_seed).unwrap();
        let mut model_rng = rng::stream(9, rng::GLOBAL, "model-init");
        let init = task.model.init_params(&mut model_rng);
        let mut state = LearnerState::new(0, &w, init);
        let mut order_rng = rng::stream(9, 0, "batch-order");
        let iterations = iterations_per_epoch(task.train.len(), cfg.optimizer.batch_size, 1);
        for (epoch, record) in records.iter().enumerate() {
            let lr = lr_schedule(&cfg.optimizer, epoch).unwrap();
            let mut order = partition.shard(0).to_vec();
            order.shuffle(&mut order_rng);
            let mut loss_sum = 0.0;
            for it in 0..iterations {
                let b = cfg.optimizer.batch_size;
                let batch = &order[it * b..(it + 1) * b];
                let (loss, grad) =
                    models::forward_backward(&task.model, state.params(), &task.train, batch)
                        .unwrap();
                loss_sum += loss;
                crate::learning::local_sgd_step(&mut state, &grad, lr, &cfg.optimizer).unwrap();
            }
            let (acc, _) =
                models::evaluate(&task.model, state.params(), &task.test, None).unwrap();
            assert_eq!(record.train_loss.to_bits(), (loss_sum / iterations as f64).to_bits());
            assert_eq!(record.test_accuracy.to_bits(), acc.to_bits());
            assert_eq!(record.consensus_distance, 0.0);
        }
    }

    #[test]
    fn gossip_only_distance_shrinks() {
        let cfg = small_config(&[
            ("algorithm", "gossip_only_choco"),
            ("gamma", "0.1"),
            ("epochs", "4"),
            ("seeds", "2"),
        ]);
        let out = run_experiment(&cfg).unwrap();
        assert!(out.summary.failures.is_empty());
        let first = out.records.first().unwrap();
        let last = out.records.last().unwrap();
        assert!(last.consensus_distance < first.consensus_distance);
        assert_eq!(first.lr, 0.0);
    }

    #[test]
    fn csv_round_trips_and_carries_schema() {
        let cfg = small_config(&[]);
        let out = run_experiment(&cfg).unwrap();
        let text = csv_string(&cfg, &out.records);
        assert!(text.starts_with("# adagossip-metrics v1\n# config: algorithm=choco"));
        assert!(text.contains(CSV_SCHEMA));
        assert_eq!(text.lines().count(), 3 + out.records.len());
    }

    #[test]
    fn sweep_emits_one_row_per_value() {
        let cfg = small_config(&[("epochs", "1")]);
        let rows = sweep(&cfg, SweepAxis::Agents, &[8.0, 16.0, 32.0]).unwrap();
        assert_eq!(rows.len(), 3);
        let text = sweep_csv(SweepAxis::Agents, &rows);
        assert!(text.starts_with("agents,mean_accuracy,std_accuracy\n"));
        assert_eq!(text.lines().count(), 4);

        assert!(sweep(&cfg, SweepAxis::Agents, &[2.5]).is_err());
        assert!(sweep(&cfg, SweepAxis::Beta, &[]).is_err());
    }

    #[test]
    fn batch_larger_than_shard_is_rejected() {
        let cfg = small_config(&[("batch", "128"), ("samples", "256")]);
        let task = materialize_task(&cfg).unwrap();
        assert!(run_seed(&cfg, &task, 1).is_err());
    }
}
