//! Exact transmitted-bytes accounting, measured per round and predictable in
//! closed form.

use crate::compression::CompressorSpec;
use crate::topology::MixingMatrix;

/// Accumulates the bytes each agent sends, epoch by epoch.
#[derive(Debug, Clone)]
pub struct BytesLedger {
    cumulative: Vec<u64>,
    epoch_increments: Vec<Vec<u64>>,
    current: Vec<u64>,
}

impl BytesLedger {
    pub fn new(agents: usize) -> Self {
        Self {
            cumulative: vec![0; agents],
            epoch_increments: Vec::new(),
            current: vec![0; agents],
        }
    }

    pub fn record_round(&mut self, bytes_per_agent: &[u64]) {
        for ((cum, cur), &b) in
            self.cumulative.iter_mut().zip(self.current.iter_mut()).zip(bytes_per_agent)
        {
            *cum += b;
            *cur += b;
        }
    }

    /// Closes the epoch and returns its per-agent increment.
    pub fn end_epoch(&mut self) -> Vec<u64> {
        let increment = std::mem::replace(&mut self.current, vec![0; self.cumulative.len()]);
        self.epoch_increments.push(increment.clone());
        increment
    }

    pub fn cumulative(&self) -> &[u64] {
        &self.cumulative
    }

    pub fn epoch_increments(&self) -> &[Vec<u64>] {
        &self.epoch_increments
    }

    /// Cumulative bytes for one agent.
    pub fn agent_total(&self, agent: usize) -> u64 {
        self.cumulative[agent]
    }
}

/// Iterations per epoch: floor(samples / (batch * n)), ragged tail dropped.
pub fn iterations_per_epoch(samples: usize, batch: usize, n: usize) -> usize {
    samples / (batch * n)
}

/// Predicted MB transmitted per agent per epoch:
/// iterations x out-degree x payload bytes / 1e6.
pub fn predicted_bytes_per_epoch(
    params: usize,
    samples: usize,
    n: usize,
    batch: usize,
    topology: &MixingMatrix,
    compressor: &CompressorSpec,
) -> f64 {
    let iterations = iterations_per_epoch(samples, batch, n);
    let payload = compressor.payload_bytes_for_dim(params);
    iterations as f64 * topology.out_degree(0) as f64 * payload as f64 / 1e6
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::MixingMatrix;

    #[test]
    fn table_one_dense_cell_within_five_percent() {
        let ring = MixingMatrix::ring(16).unwrap();
        let mb = predicted_bytes_per_epoch(
            270_000,
            50_000,
            16,
            32,
            &ring,
            &CompressorSpec::Identity,
        );
        // 97 iterations x 2 edges x 1.08 MB.
        assert!((mb - 209.52).abs() < 1e-9, "mb = {mb}");
        assert!((mb - 205.0).abs() / 205.0 < 0.05);
    }

    #[test]
    fn quantized_prediction_is_exact_fraction_of_dense() {
        let ring = MixingMatrix::ring(32).unwrap();
        let dense =
            predicted_bytes_per_epoch(270_000, 50_000, 32, 32, &ring, &CompressorSpec::Identity);
        for bits in [2u8, 4, 8] {
            let q = predicted_bytes_per_epoch(
                270_000,
                50_000,
                32,
                32,
                &ring,
                &CompressorSpec::uniform_quant(bits).unwrap(),
            );
            assert_eq!(q, dense * bits as f64 / 32.0);
        }
    }

    #[test]
    fn ledger_tracks_epoch_increments() {
        let mut ledger = BytesLedger::new(2);
        ledger.record_round(&[10, 10]);
        ledger.record_round(&[10, 10]);
        let inc = ledger.end_epoch();
        assert_eq!(inc, vec![20, 20]);
        ledger.record_round(&[5, 5]);
        ledger.end_epoch();
        assert_eq!(ledger.cumulative(), &[25, 25]);
        assert_eq!(ledger.epoch_increments().len(), 2);
    }
}
