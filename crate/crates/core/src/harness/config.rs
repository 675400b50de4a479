//! Experiment configuration: flat key=value files, CLI overrides, named
//! presets carrying the published tuned consensus step-sizes, and
//! cross-field validation.

use std::path::{Path, PathBuf};

use crate::compression::CompressorSpec;
use crate::consensus::GossipHyperParams;
use crate::error::{Error, Result};
use crate::learning::OptimizerConfig;
use crate::models::ModelSpec;
use crate::topology::parse_topology;

/// Training / averaging algorithm selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Dsgd,
    Deepsqueeze,
    Choco,
    Adag,
    GossipOnlyChoco,
    GossipOnlyAdag,
}

impl Algorithm {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "dsgd" => Ok(Self::Dsgd),
            "deepsqueeze" => Ok(Self::Deepsqueeze),
            "choco" => Ok(Self::Choco),
            "adag" => Ok(Self::Adag),
            "gossip_only_choco" => Ok(Self::GossipOnlyChoco),
            "gossip_only_adag" => Ok(Self::GossipOnlyAdag),
            other => Err(Error::InvalidConfig(format!(
                "unknown algorithm {other:?} (expected dsgd, deepsqueeze, choco, adag, \
                 gossip_only_choco or gossip_only_adag)"
            ))),
        }
    }

    pub fn is_gossip_only(self) -> bool {
        matches!(self, Self::GossipOnlyChoco | Self::GossipOnlyAdag)
    }
}

impl std::fmt::Display for Algorithm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::Dsgd => "dsgd",
            Self::Deepsqueeze => "deepsqueeze",
            Self::Choco => "choco",
            Self::Adag => "adag",
            Self::GossipOnlyChoco => "gossip_only_choco",
            Self::GossipOnlyAdag => "gossip_only_adag",
        };
        write!(f, "{name}")
    }
}

/// Where training and test data come from.
#[derive(Debug, Clone, PartialEq)]
pub enum TaskKind {
    Blobs {
        samples: usize,
        test_samples: usize,
        input_dim: usize,
        classes: usize,
        separation: f64,
        data_seed: u64,
    },
    Csv { path: PathBuf, has_header: bool, test_path: Option<PathBuf> },
    Idx { path: PathBuf, test_path: Option<PathBuf> },
}

impl TaskKind {
    pub fn default_blobs() -> Self {
        TaskKind::Blobs {
            samples: 8000,
            test_samples: 2000,
            input_dim: 16,
            classes: 4,
            separation: 2.0,
            data_seed: 7,
        }
    }
}

impl std::fmt::Display for TaskKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            TaskKind::Blobs { samples, test_samples, input_dim, classes, separation, data_seed } => {
                write!(
                    f,
                    "blobs(samples={samples},test={test_samples},dim={input_dim},\
                     classes={classes},sep={separation},data_seed={data_seed})"
                )
            }
            TaskKind::Csv { path, .. } => write!(f, "csv:{}", path.display()),
            TaskKind::Idx { path, .. } => write!(f, "idx:{}", path.display()),
        }
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub algorithm: Algorithm,
    pub topology: String,
    pub agents: usize,
    pub compressor: CompressorSpec,
    pub gamma: f64,
    pub beta: f64,
    pub epsilon: f64,
    pub optimizer: OptimizerConfig,
    pub model: String,
    pub task: TaskKind,
    pub seeds: Vec<u64>,
    pub out: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn hyper_params(&self) -> GossipHyperParams {
        GossipHyperParams { gamma: self.gamma, beta: self.beta, epsilon: self.epsilon }
    }

    /// Stable identifier shared by all of a run's CSV rows.
    pub fn run_id(&self) -> String {
        format!(
            "{}-{}-n{}-{}-g{}",
            self.algorithm, self.topology, self.agents, self.compressor, self.gamma
        )
    }

    /// One-line key=value rendering of every resolved field.
    pub fn summary_line(&self) -> String {
        let seeds: Vec<String> = self.seeds.iter().map(u64::to_string).collect();
        format!(
            "algorithm={} topology={} agents={} compressor={} gamma={} beta={} epsilon={} \
             lr={} epochs={} batch={} momentum={} weight_decay={} nesterov={} model={} \
             task={} seeds={}",
            self.algorithm,
            self.topology,
            self.agents,
            self.compressor,
            self.gamma,
            self.beta,
            self.epsilon,
            self.optimizer.lr0,
            self.optimizer.epochs,
            self.optimizer.batch_size,
            self.optimizer.momentum,
            self.optimizer.weight_decay,
            self.optimizer.nesterov,
            self.model,
            self.task,
            seeds.join(",")
        )
    }

    pub fn validate(&self) -> Result<()> {
        if self.algorithm == Algorithm::Dsgd && self.compressor != CompressorSpec::Identity {
            return Err(Error::InvalidConfig(format!(
                "dsgd is the full-communication baseline and always transmits dense \
                 parameters; drop `compressor={}` or switch to deepsqueeze, choco or adag",
                self.compressor
            )));
        }
        GossipHyperParams::new(self.gamma, self.beta, self.epsilon)?;
        self.optimizer.validate()?;
        parse_topology(&self.topology, self.agents)?;
        ModelSpec::parse(&self.model, 1, 2)?;
        if self.seeds.is_empty() {
            return Err(Error::InvalidConfig("need at least one seed".into()));
        }
        if let TaskKind::Blobs { samples, test_samples, input_dim, classes, separation, .. } =
            &self.task
        {
            if *samples == 0 || *test_samples == 0 || *input_dim == 0 || *classes < 2 {
                return Err(Error::InvalidConfig("blobs task sizes must be positive".into()));
            }
            if !separation.is_finite() || *separation < 0.0 {
                return Err(Error::InvalidConfig(format!("bad separation {separation}")));
            }
        }
        Ok(())
    }
}

/// Accumulates key=value assignments until `finish`.
#[derive(Debug, Default, Clone)]
struct RawConfig {
    algorithm: Option<Algorithm>,
    topology: Option<String>,
    agents: Option<usize>,
    compressor: Option<CompressorSpec>,
    gamma: Option<f64>,
    beta: Option<f64>,
    epsilon: Option<f64>,
    lr: Option<f64>,
    epochs: Option<usize>,
    batch: Option<usize>,
    momentum: Option<f64>,
    weight_decay: Option<f64>,
    nesterov: Option<bool>,
    model: Option<String>,
    task: Option<String>,
    samples: Option<usize>,
    test_samples: Option<usize>,
    input_dim: Option<usize>,
    classes: Option<usize>,
    separation: Option<f64>,
    data_seed: Option<u64>,
    csv_header: Option<bool>,
    test_path: Option<PathBuf>,
    seeds: Option<Vec<u64>>,
    out: Option<PathBuf>,
}

fn parse_as<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::InvalidConfig(format!("{key}: cannot parse {value:?}")))
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value {
        "true" | "on" | "1" | "yes" => Ok(true),
        "false" | "off" | "0" | "no" => Ok(false),
        _ => Err(Error::InvalidConfig(format!("{key}: expected a boolean, got {value:?}"))),
    }
}

impl RawConfig {
    fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        let key = key.replace('-', "_");
        match key.as_str() {
            "algorithm" => self.algorithm = Some(Algorithm::parse(value)?),
            "topology" => self.topology = Some(value.to_string()),
            "agents" => self.agents = Some(parse_as(&key, value)?),
            "compressor" => self.compressor = Some(CompressorSpec::parse(value)?),
            "gamma" => self.gamma = Some(parse_as(&key, value)?),
            "beta" => self.beta = Some(parse_as(&key, value)?),
            "epsilon" => self.epsilon = Some(parse_as(&key, value)?),
            "lr" => self.lr = Some(parse_as(&key, value)?),
            "epochs" => self.epochs = Some(parse_as(&key, value)?),
            "batch" => self.batch = Some(parse_as(&key, value)?),
            "momentum" => self.momentum = Some(parse_as(&key, value)?),
            "weight_decay" => self.weight_decay = Some(parse_as(&key, value)?),
            "nesterov" => self.nesterov = Some(parse_bool(&key, value)?),
            "model" => self.model = Some(value.to_string()),
            "task" => self.task = Some(value.to_string()),
            "samples" => self.samples = Some(parse_as(&key, value)?),
            "test_samples" => self.test_samples = Some(parse_as(&key, value)?),
            "input_dim" => self.input_dim = Some(parse_as(&key, value)?),
            "classes" => self.classes = Some(parse_as(&key, value)?),
            "separation" => self.separation = Some(parse_as(&key, value)?),
            "data_seed" => self.data_seed = Some(parse_as(&key, value)?),
            "csv_header" => self.csv_header = Some(parse_bool(&key, value)?),
            "test_path" => self.test_path = Some(PathBuf::from(value)),
            "seeds" => {
                let seeds: Vec<u64> = value
                    .split(',')
                    .map(|s| parse_as("seeds", s.trim()))
                    .collect::<Result<_>>()?;
                self.seeds = Some(seeds);
            }
            "out" => self.out = Some(PathBuf::from(value)),
            other => {
                return Err(Error::InvalidConfig(format!("unknown config key {other:?}")));
            }
        }
        Ok(())
    }

    fn finish(self) -> Result<ExperimentConfig> {
        let algorithm = self.algorithm.ok_or_else(|| {
            Error::InvalidConfig("algorithm is required (e.g. --algorithm adag)".into())
        })?;
        let compressor = self.compressor.unwrap_or(CompressorSpec::Identity);
        let gamma = match self.gamma {
            Some(g) => g,
            None if algorithm == Algorithm::Dsgd => 1.0,
            None => {
                return Err(Error::InvalidConfig(format!(
                    "{algorithm} requires --gamma, the consensus step-size tuned per \
                     compressor (see the paper/ presets for published values)"
                )));
            }
        };
        let task = match self.task.as_deref().unwrap_or("blobs") {
            "blobs" => {
                let TaskKind::Blobs {
                    samples,
                    test_samples,
                    input_dim,
                    classes,
                    separation,
                    data_seed,
                } = TaskKind::default_blobs()
                else {
                    unreachable!()
                };
                TaskKind::Blobs {
                    samples: self.samples.unwrap_or(samples),
                    test_samples: self.test_samples.unwrap_or(test_samples),
                    input_dim: self.input_dim.unwrap_or(input_dim),
                    classes: self.classes.unwrap_or(classes),
                    separation: self.separation.unwrap_or(separation),
                    data_seed: self.data_seed.unwrap_or(data_seed),
                }
            }
            spec => {
                if let Some(path) = spec.strip_prefix("csv:") {
                    TaskKind::Csv {
                        path: PathBuf::from(path),
                        has_header: self.csv_header.unwrap_or(false),
                        test_path: self.test_path,
                    }
                } else if let Some(path) = spec.strip_prefix("idx:") {
                    TaskKind::Idx { path: PathBuf::from(path), test_path: self.test_path }
                } else {
                    return Err(Error::InvalidConfig(format!(
                        "unknown task {spec:?} (expected blobs, csv:PATH or idx:PATH)"
                    )));
                }
            }
        };
        let defaults = OptimizerConfig::default();
        let cfg = ExperimentConfig {
            algorithm,
            topology: self.topology.unwrap_or_else(|| "ring".into()),
            agents: self.agents.unwrap_or(16),
            compressor,
            gamma,
            beta: self.beta.unwrap_or(GossipHyperParams::DEFAULT_BETA),
            epsilon: self.epsilon.unwrap_or(GossipHyperParams::DEFAULT_EPSILON),
            optimizer: OptimizerConfig {
                lr0: self.lr.unwrap_or(defaults.lr0),
                momentum: self.momentum.unwrap_or(defaults.momentum),
                nesterov: self.nesterov.unwrap_or(defaults.nesterov),
                weight_decay: self.weight_decay.unwrap_or(defaults.weight_decay),
                batch_size: self.batch.unwrap_or(defaults.batch_size),
                epochs: self.epochs.unwrap_or(defaults.epochs),
            },
            model: self.model.unwrap_or_else(|| "mlp:32".into()),
            task,
            seeds: self.seeds.unwrap_or_else(|| vec![1, 2, 3]),
            out: self.out,
        };
        cfg.validate()?;
        Ok(cfg)
    }
}

/// Reads `key=value` lines; `#` starts a comment, blank lines are skipped.
pub fn read_config_file(path: &Path) -> Result<Vec<(String, String)>> {
    let text = std::fs::read_to_string(path)?;
    let mut pairs = Vec::new();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| {
            Error::Parse(format!(
                "{}:{}: expected key=value, got {raw:?}",
                path.display(),
                lineno + 1
            ))
        })?;
        pairs.push((key.trim().to_string(), value.trim().to_string()));
    }
    Ok(pairs)
}

/// Resolves a config from an optional file plus CLI override pairs.
///
/// Precedence, lowest to highest: preset, file assignments, CLI assignments.
/// The preset may itself be named in either source; unknown keys are
/// rejected.
pub fn parse_config(
    file: Option<&Path>,
    overrides: &[(String, String)],
) -> Result<ExperimentConfig> {
    let file_pairs = match file {
        Some(path) => read_config_file(path)?,
        None => Vec::new(),
    };
    let preset_name = file_pairs
        .iter()
        .chain(overrides)
        .filter(|(k, _)| k == "preset")
        .map(|(_, v)| v.clone())
        .next_back();

    let mut raw = RawConfig::default();
    if let Some(name) = preset_name {
        for (key, value) in preset_pairs(&name)? {
            raw.apply(&key, &value)?;
        }
    }
    for (key, value) in file_pairs.iter().chain(overrides) {
        if key == "preset" {
            continue;
        }
        raw.apply(key, value)?;
    }
    raw.finish()
}

/// The published per-cell consensus step-sizes, keyed by
/// `paper/<dataset>-<topology>-<compressor>-<algorithm>`.
///
/// Datasets: cifar10, cifar100, fmnist, imagenette, imagenet. Topologies:
/// ring16, ring32, dyck32, torus32. Compressors: full, topk90, topk99,
/// quant8, quant4, quant2. The preset supplies the tuned gamma plus the
/// matching optimizer settings; the task itself stays whatever the config
/// selects (desk-scale by default).
pub fn preset_pairs(name: &str) -> Result<Vec<(String, String)>> {
    let body = name.strip_prefix("paper/").ok_or_else(|| {
        Error::InvalidConfig(format!("unknown preset {name:?} (expected paper/<...>)"))
    })?;
    let parts: Vec<&str> = body.split('-').collect();
    let [dataset, topo, comp, alg] = parts.as_slice() else {
        return Err(Error::InvalidConfig(format!(
            "preset {name:?} must look like paper/<dataset>-<topology>-<compressor>-<algorithm>"
        )));
    };

    let (lr, epochs) = match *dataset {
        "cifar10" => (0.1, 200),
        "cifar100" => (0.1, 100),
        "fmnist" => (0.01, 100),
        "imagenette" => (0.01, 100),
        "imagenet" => (0.1, 50),
        other => {
            return Err(Error::InvalidConfig(format!("preset dataset {other:?} not shipped")));
        }
    };
    let (topology, agents) = match *topo {
        "ring16" => ("ring", 16),
        "ring32" => ("ring", 32),
        "dyck32" => ("dyck32", 32),
        "torus32" => ("torus:4x8", 32),
        other => {
            return Err(Error::InvalidConfig(format!("preset topology {other:?} not shipped")));
        }
    };
    let compressor = match *comp {
        "full" => "none",
        "topk90" => "topk:0.9",
        "topk99" => "topk:0.99",
        "quant8" => "quant:8",
        "quant4" => "quant:4",
        "quant2" => "quant:2",
        other => {
            return Err(Error::InvalidConfig(format!("preset compressor {other:?} not shipped")));
        }
    };
    let gamma = preset_gamma(dataset, topo, comp, alg).ok_or_else(|| {
        Error::InvalidConfig(format!(
            "preset {name:?}: no published gamma for this dataset/topology/compressor/algorithm \
             cell"
        ))
    })?;

    Ok(vec![
        ("algorithm".into(), alg.to_string()),
        ("topology".into(), topology.into()),
        ("agents".into(), agents.to_string()),
        ("compressor".into(), compressor.into()),
        ("gamma".into(), gamma.to_string()),
        ("beta".into(), "0.999".into()),
        ("epsilon".into(), "1e-8".into()),
        ("lr".into(), lr.to_string()),
        ("epochs".into(), epochs.to_string()),
        ("batch".into(), "32".into()),
        ("momentum".into(), "0.9".into()),
        ("nesterov".into(), "true".into()),
        ("weight_decay".into(), "1e-4".into()),
    ])
}

fn preset_gamma(dataset: &str, topo: &str, comp: &str, alg: &str) -> Option<f64> {
    if comp == "full" {
        // Full communication always runs at gamma = 1.
        return (alg == "dsgd").then_some(1.0);
    }
    let cell = |ds: f64, choco: f64, adag: f64| -> Option<f64> {
        match alg {
            "deepsqueeze" if ds > 0.0 => Some(ds),
            "choco" => Some(choco),
            "adag" => Some(adag),
            _ => None,
        }
    };
    // A zero DeepSqueeze entry marks cells the tables do not cover.
    match (dataset, topo, comp) {
        ("cifar10", "ring16", "topk90") => cell(0.05, 0.2, 0.01),
        ("cifar10", "ring16", "topk99") => cell(0.01, 0.0375, 0.001),
        ("cifar10", "ring16", "quant8") => cell(0.1, 0.7, 0.008),
        ("cifar10", "ring16", "quant4") => cell(0.02, 0.1, 0.002),
        ("cifar10", "ring16", "quant2") => cell(0.01, 0.025, 0.0008),
        ("cifar10", "ring32", "topk90") => cell(0.1, 0.2, 0.004),
        ("cifar10", "ring32", "topk99") => cell(0.02, 0.05, 0.0008),
        ("cifar10", "ring32", "quant8") => cell(0.1, 0.8, 0.02),
        ("cifar10", "ring32", "quant4") => cell(0.08, 0.1, 0.002),
        ("cifar10", "ring32", "quant2") => cell(0.03, 0.025, 0.0008),
        ("cifar10", "dyck32", "topk90") => cell(0.0, 0.15, 0.004),
        ("cifar10", "dyck32", "topk99") => cell(0.0, 0.03, 0.0008),
        ("cifar10", "torus32", "topk90") => cell(0.0, 0.15, 0.004),
        ("cifar10", "torus32", "topk99") => cell(0.0, 0.03, 0.001),
        ("fmnist", "ring16", "topk90") => cell(0.0, 0.1, 0.002),
        ("fmnist", "ring16", "topk99") => cell(0.0, 0.01, 0.001),
        ("cifar100", "ring16", "topk90") => cell(0.0, 0.2, 0.01),
        ("cifar100", "ring16", "topk99") => cell(0.0, 0.04, 0.001),
        ("imagenette", "ring16", "topk90") => cell(0.0, 0.1, 0.005),
        ("imagenette", "ring16", "topk99") => cell(0.0, 0.06, 0.0003),
        ("imagenet", "ring16", "topk90") => cell(0.0, 0.3, 0.001),
        ("imagenet", "ring16", "topk99") => cell(0.0, 0.03, 0.0001),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pairs(kv: &[(&str, &str)]) -> Vec<(String, String)> {
        kv.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn minimal_adag_config_fills_defaults() {
        let cfg = parse_config(
            None,
            &pairs(&[
                ("algorithm", "adag"),
                ("topology", "ring"),
                ("agents", "16"),
                ("compressor", "topk:0.9"),
                ("gamma", "0.01"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Adag);
        assert_eq!(cfg.beta, 0.999);
        assert_eq!(cfg.epsilon, 1e-8);
        assert_eq!(cfg.optimizer.momentum, 0.9);
        assert!(cfg.optimizer.nesterov);
        assert_eq!(cfg.optimizer.weight_decay, 1e-4);
        assert_eq!(cfg.optimizer.batch_size, 32);
        assert_eq!(cfg.seeds, vec![1, 2, 3]);
    }

    #[test]
    fn missing_gamma_for_choco_is_an_error() {
        let err = parse_config(None, &pairs(&[("algorithm", "choco")])).unwrap_err();
        assert!(err.to_string().contains("gamma"), "got {err}");
        // dsgd defaults to gamma = 1 instead.
        let cfg = parse_config(None, &pairs(&[("algorithm", "dsgd")])).unwrap();
        assert_eq!(cfg.gamma, 1.0);
    }

    #[test]
    fn dsgd_with_compressor_is_rejected() {
        let err = parse_config(
            None,
            &pairs(&[("algorithm", "dsgd"), ("compressor", "topk:0.9"), ("gamma", "1.0")]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("full-communication"), "got {err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = parse_config(
            None,
            &pairs(&[("algorithm", "adag"), ("gamma", "0.01"), ("warp_speed", "9")]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("warp_speed"), "got {err}");
    }

    #[test]
    fn preset_expands_published_hyperparameters() {
        let cfg = parse_config(
            None,
            &pairs(&[("preset", "paper/cifar10-ring16-topk90-adag")]),
        )
        .unwrap();
        assert_eq!(cfg.algorithm, Algorithm::Adag);
        assert_eq!(cfg.topology, "ring");
        assert_eq!(cfg.agents, 16);
        assert_eq!(cfg.compressor, CompressorSpec::TopK { sparsity: 0.9 });
        assert_eq!(cfg.gamma, 0.01);
        assert_eq!(cfg.beta, 0.999);
        assert_eq!(cfg.optimizer.lr0, 0.1);
        assert_eq!(cfg.optimizer.epochs, 200);

        let torus = parse_config(
            None,
            &pairs(&[("preset", "paper/cifar10-torus32-topk99-adag")]),
        )
        .unwrap();
        assert_eq!(torus.topology, "torus:4x8");
        assert_eq!(torus.agents, 32);
        assert_eq!(torus.gamma, 0.001);

        assert!(parse_config(None, &pairs(&[("preset", "paper/mnist-ring16-topk90-adag")]))
            .is_err());
        assert!(parse_config(
            None,
            &pairs(&[("preset", "paper/fmnist-ring16-quant8-adag")])
        )
        .is_err());
    }

    #[test]
    fn cli_overrides_beat_presets() {
        let cfg = parse_config(
            None,
            &pairs(&[
                ("preset", "paper/cifar10-ring16-topk90-choco"),
                ("gamma", "0.5"),
                ("epochs", "10"),
            ]),
        )
        .unwrap();
        assert_eq!(cfg.gamma, 0.5);
        assert_eq!(cfg.optimizer.epochs, 10);
        assert_eq!(cfg.algorithm, Algorithm::Choco);
    }

    #[test]
    fn config_file_layering() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("exp.conf");
        std::fs::write(
            &path,
            "# desk run\nalgorithm = choco\ntopology = ring\nagents = 8\n\
             compressor = topk:0.9\ngamma = 0.2\nseeds = 4,5\n",
        )
        .unwrap();
        let cfg = parse_config(Some(&path), &pairs(&[("gamma", "0.3")])).unwrap();
        assert_eq!(cfg.agents, 8);
        assert_eq!(cfg.gamma, 0.3);
        assert_eq!(cfg.seeds, vec![4, 5]);
    }

    #[test]
    fn topology_agent_mismatch_is_rejected() {
        let err = parse_config(
            None,
            &pairs(&[
                ("algorithm", "choco"),
                ("gamma", "0.2"),
                ("topology", "dyck32"),
                ("agents", "16"),
            ]),
        )
        .unwrap_err();
        assert!(err.to_string().contains("dyck32"), "got {err}");
    }
}
