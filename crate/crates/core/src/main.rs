//! Command-line driver for the decentralized-learning simulator.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use adagossip::compression::CompressorSpec;
use adagossip::harness::{
    self, parse_config, predicted_bytes_per_epoch, run_experiment, sweep, sweep_csv, SweepAxis,
};
use adagossip::topology::parse_topology;

#[derive(Parser)]
#[command(
    name = "adagossip",
    about = "Deterministic simulator for decentralized optimization with compressed gossip",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a training or gossip-only experiment and emit per-epoch CSV metrics.
    Run {
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Run the experiment once per axis value and summarize final accuracies.
    Sweep {
        /// Hyper-parameter to vary: beta, agents or gamma.
        #[arg(long)]
        axis: String,
        /// Comma-separated axis values.
        #[arg(long)]
        values: String,
        #[command(flatten)]
        overrides: OverrideArgs,
    },
    /// Predict transmitted MB per agent per epoch without running anything.
    PredictBytes {
        /// Model parameter count d.
        #[arg(long)]
        params: usize,
        /// Training samples across all agents.
        #[arg(long)]
        samples: usize,
        #[arg(long)]
        agents: usize,
        /// Per-agent mini-batch size.
        #[arg(long)]
        batch: usize,
        /// ring | dyck32 | torus:RxC | full
        #[arg(long)]
        topology: String,
        /// none | topk:F | quant:B
        #[arg(long)]
        compressor: String,
    },
}

/// Every experiment knob, all optional; resolution and validation happen in
/// one place so the file, preset and flag paths agree.
#[derive(Args)]
struct OverrideArgs {
    /// Flat key=value config file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Named preset, e.g. paper/cifar10-ring16-topk90-adag.
    #[arg(long)]
    preset: Option<String>,
    /// dsgd | deepsqueeze | choco | adag | gossip_only_choco | gossip_only_adag
    #[arg(long)]
    algorithm: Option<String>,
    /// ring | dyck32 | torus:RxC | full
    #[arg(long)]
    topology: Option<String>,
    #[arg(long)]
    agents: Option<String>,
    /// none | topk:F | quant:B
    #[arg(long)]
    compressor: Option<String>,
    /// Consensus step-size.
    #[arg(long)]
    gamma: Option<String>,
    /// Moving-average coefficient of the squared gossip-error.
    #[arg(long)]
    beta: Option<String>,
    #[arg(long)]
    epsilon: Option<String>,
    /// Initial learning rate (decays 10x at 50% and 75% of training).
    #[arg(long)]
    lr: Option<String>,
    #[arg(long)]
    epochs: Option<String>,
    #[arg(long)]
    batch: Option<String>,
    #[arg(long)]
    momentum: Option<String>,
    #[arg(long)]
    weight_decay: Option<String>,
    /// true/false: Nesterov momentum lookahead.
    #[arg(long)]
    nesterov: Option<String>,
    /// logreg | mlp:H1[,H2,...]
    #[arg(long)]
    model: Option<String>,
    /// blobs | csv:PATH | idx:PATH
    #[arg(long)]
    task: Option<String>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    test_samples: Option<String>,
    #[arg(long)]
    input_dim: Option<String>,
    #[arg(long)]
    classes: Option<String>,
    /// Class-mean separation of the synthetic blobs task.
    #[arg(long)]
    separation: Option<String>,
    #[arg(long)]
    data_seed: Option<String>,
    /// CSV task: first row is a header.
    #[arg(long)]
    csv_header: Option<String>,
    /// Explicit test-set file for csv/idx tasks.
    #[arg(long)]
    test_path: Option<String>,
    /// Comma-separated run seeds, e.g. 1,2,3.
    #[arg(long)]
    seeds: Option<String>,
    /// Metrics CSV output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

impl OverrideArgs {
    fn pairs(&self) -> Vec<(String, String)> {
        let mut pairs = Vec::new();
        let mut push = |key: &str, value: &Option<String>| {
            if let Some(v) = value {
                pairs.push((key.to_string(), v.clone()));
            }
        };
        push("preset", &self.preset);
        push("algorithm", &self.algorithm);
        push("topology", &self.topology);
        push("agents", &self.agents);
        push("compressor", &self.compressor);
        push("gamma", &self.gamma);
        push("beta", &self.beta);
        push("epsilon", &self.epsilon);
        push("lr", &self.lr);
        push("epochs", &self.epochs);
        push("batch", &self.batch);
        push("momentum", &self.momentum);
        push("weight_decay", &self.weight_decay);
        push("nesterov", &self.nesterov);
        push("model", &self.model);
        push("task", &self.task);
        push("samples", &self.samples);
        push("test_samples", &self.test_samples);
        push("input_dim", &self.input_dim);
        push("classes", &self.classes);
        push("separation", &self.separation);
        push("data_seed", &self.data_seed);
        push("csv_header", &self.csv_header);
        push("test_path", &self.test_path);
        push("seeds", &self.seeds);
        if let Some(out) = &self.out {
            pairs.push(("out".into(), out.display().to_string()));
        }
        pairs
    }
}

fn main() {
    let cli = Cli::parse();
    if let Err(e) = dispatch(cli) {
        eprintln!("error: {e}");
        std::process::exit(1);
    }
}

fn dispatch(cli: Cli) -> adagossip::Result<()> {
    match cli.command {
        Command::Run { overrides } => {
            let cfg = parse_config(overrides.config.as_deref(), &overrides.pairs())?;
            eprintln!("run {}", cfg.run_id());
            let output = run_experiment(&cfg)?;
            for (seed, acc) in &output.summary.final_accuracy_per_seed {
                println!("seed {seed}: final test accuracy {acc:.4}");
            }
            for failure in &output.summary.failures {
                eprintln!("seed {} failed: {}", failure.seed, failure.message);
            }
            if !output.summary.final_accuracy_per_seed.is_empty() {
                println!(
                    "final test accuracy: {:.4} +/- {:.4} over {} seed(s)",
                    output.summary.mean_accuracy,
                    output.summary.std_accuracy,
                    output.summary.final_accuracy_per_seed.len()
                );
            }
            if let Some(path) = &cfg.out {
                harness::write_csv(path, &cfg, &output.records)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::Sweep { axis, values, overrides } => {
            let axis = SweepAxis::parse(&axis)?;
            let values: Vec<f64> = values
                .split(',')
                .map(|v| {
                    v.trim().parse::<f64>().map_err(|_| {
                        adagossip::Error::InvalidConfig(format!("bad sweep value {v:?}"))
                    })
                })
                .collect::<adagossip::Result<_>>()?;
            let cfg = parse_config(overrides.config.as_deref(), &overrides.pairs())?;
            let rows = sweep(&cfg, axis, &values)?;
            let text = sweep_csv(axis, &rows);
            print!("{text}");
            if let Some(path) = &cfg.out {
                std::fs::write(path, &text)?;
                eprintln!("wrote {}", path.display());
            }
            Ok(())
        }
        Command::PredictBytes { params, samples, agents, batch, topology, compressor } => {
            let w = parse_topology(&topology, agents)?;
            let c = CompressorSpec::parse(&compressor)?;
            let iterations = harness::iterations_per_epoch(samples, batch, agents);
            let mb = predicted_bytes_per_epoch(params, samples, agents, batch, &w, &c);
            println!(
                "iterations_per_epoch={iterations} out_degree={} payload_bytes={} \
                 mb_per_epoch_per_agent={mb}",
                w.out_degree(0),
                c.payload_bytes_for_dim(params)
            );
            Ok(())
        }
    }
}
