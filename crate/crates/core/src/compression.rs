//! Compression operators applied to communicated vectors, their wire
//! payloads, and exact byte accounting.
//!
//! Byte accounting assumes a 32-bit wire encoding per value and a 16-bit
//! index per kept sparse entry; simulation state itself stays in `f64` so
//! round-trips through the identity compressor are exact. The accounting is
//! a convention, not a serialization format.

use crate::error::{Error, Result};

/// Compression operator parameterization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CompressorSpec {
    /// Dense passthrough.
    Identity,
    /// Keep the `(1 - sparsity)` fraction of entries with largest magnitude.
    TopK { sparsity: f64 },
    /// Deterministic round-to-nearest uniform quantization over [-s, s].
    UniformQuant { bits: u8 },
}

impl CompressorSpec {
    pub fn top_k(sparsity: f64) -> Result<Self> {
        if !(0.0..1.0).contains(&sparsity) {
            return Err(Error::InvalidCompressor(format!(
                "top-k sparsity must be in [0,1), got {sparsity}"
            )));
        }
        Ok(Self::TopK { sparsity })
    }

    pub fn uniform_quant(bits: u8) -> Result<Self> {
        if !(1..=16).contains(&bits) {
            return Err(Error::InvalidCompressor(format!(
                "quantization bits must be in 1..=16, got {bits}"
            )));
        }
        Ok(Self::UniformQuant { bits })
    }

    /// Entries kept by top-k on a d-dimensional input: max(1, round((1-sparsity)*d)).
    pub fn kept_entries(&self, dim: usize) -> usize {
        match self {
            CompressorSpec::TopK { sparsity } => {
                (((1.0 - sparsity) * dim as f64).round() as usize).max(1).min(dim)
            }
            _ => dim,
        }
    }

    /// Wire bytes of one payload of dimension `dim`, without materializing it.
    ///
    /// Payload size depends only on the spec and the dimension, so this is
    /// exact for every round.
    pub fn payload_bytes_for_dim(&self, dim: usize) -> u64 {
        match self {
            CompressorSpec::Identity => 4 * dim as u64,
            CompressorSpec::TopK { .. } => 6 * self.kept_entries(dim) as u64,
            CompressorSpec::UniformQuant { bits } => {
                ((*bits as u64) * dim as u64).div_ceil(8)
            }
        }
    }

    /// Parses a CLI compressor string: `none`, `topk:F` or `quant:B`.
    pub fn parse(s: &str) -> Result<Self> {
        if s == "none" {
            return Ok(Self::Identity);
        }
        if let Some(f) = s.strip_prefix("topk:") {
            let sparsity: f64 = f
                .parse()
                .map_err(|_| Error::InvalidCompressor(format!("bad top-k fraction {f:?}")))?;
            return Self::top_k(sparsity);
        }
        if let Some(b) = s.strip_prefix("quant:") {
            let bits: u8 = b
                .parse()
                .map_err(|_| Error::InvalidCompressor(format!("bad quantization bits {b:?}")))?;
            return Self::uniform_quant(bits);
        }
        Err(Error::InvalidCompressor(format!(
            "unknown compressor {s:?} (expected none, topk:F or quant:B)"
        )))
    }
}

impl std::fmt::Display for CompressorSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CompressorSpec::Identity => write!(f, "none"),
            CompressorSpec::TopK { sparsity } => write!(f, "topk:{sparsity}"),
            CompressorSpec::UniformQuant { bits } => write!(f, "quant:{bits}"),
        }
    }
}

/// Wire body of a compressed vector.
#[derive(Debug, Clone, PartialEq)]
pub enum PayloadBody {
    Dense { values: Vec<f64> },
    Sparse { indices: Vec<u32>, values: Vec<f64> },
    Quantized { codes: Vec<u16>, scale: f64, bits: u8 },
}

/// A compressed vector together with its original dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct CompressedPayload {
    pub dim: usize,
    pub body: PayloadBody,
}

/// Applies the compression operator to `v`.
pub fn compress(spec: &CompressorSpec, v: &[f64]) -> Result<CompressedPayload> {
    if v.is_empty() {
        return Err(Error::InvalidData("cannot compress an empty vector".into()));
    }
    if let Some(pos) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite(format!(
            "compress input has non-finite entry {} at index {pos}",
            v[pos]
        )));
    }
    let dim = v.len();
    let body = match spec {
        CompressorSpec::Identity => PayloadBody::Dense { values: v.to_vec() },
        CompressorSpec::TopK { .. } => {
            let k = spec.kept_entries(dim);
            // Largest magnitude first, ties broken by lower index.
            let mut order: Vec<usize> = (0..dim).collect();
            order.select_nth_unstable_by(k - 1, |&a, &b| {
                v[b].abs()
                    .partial_cmp(&v[a].abs())
                    .unwrap()
                    .then(a.cmp(&b))
            });
            let mut kept: Vec<usize> = order[..k].to_vec();
            kept.sort_unstable();
            PayloadBody::Sparse {
                indices: kept.iter().map(|&i| i as u32).collect(),
                values: kept.iter().map(|&i| v[i]).collect(),
            }
        }
        CompressorSpec::UniformQuant { bits } => {
            let scale = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
            let levels = (1u32 << bits) - 1;
            let codes = if scale == 0.0 {
                vec![0u16; dim]
            } else {
                v.iter()
                    .map(|&x| {
                        let code = ((x + scale) / (2.0 * scale) * levels as f64).round();
                        code.clamp(0.0, levels as f64) as u16
                    })
                    .collect()
            };
            PayloadBody::Quantized { codes, scale, bits: *bits }
        }
    };
    Ok(CompressedPayload { dim, body })
}

/// Reconstructs the dense vector a payload encodes.
pub fn decompress(p: &CompressedPayload) -> Result<Vec<f64>> {
    match &p.body {
        PayloadBody::Dense { values } => {
            if values.len() != p.dim {
                return Err(Error::CorruptPayload(format!(
                    "dense body has {} values for dim {}",
                    values.len(),
                    p.dim
                )));
            }
            Ok(values.clone())
        }
        PayloadBody::Sparse { indices, values } => {
            if indices.len() != values.len() {
                return Err(Error::CorruptPayload(format!(
                    "sparse body has {} indices but {} values",
                    indices.len(),
                    values.len()
                )));
            }
            let mut out = vec![0.0; p.dim];
            let mut prev: Option<u32> = None;
            for (&i, &x) in indices.iter().zip(values) {
                if i as usize >= p.dim {
                    return Err(Error::CorruptPayload(format!(
                        "sparse index {i} out of range for dim {}",
                        p.dim
                    )));
                }
                if prev.is_some_and(|p| i <= p) {
                    return Err(Error::CorruptPayload(
                        "sparse indices not strictly increasing".into(),
                    ));
                }
                prev = Some(i);
                out[i as usize] = x;
            }
            Ok(out)
        }
        PayloadBody::Quantized { codes, scale, bits } => {
            if codes.len() != p.dim {
                return Err(Error::CorruptPayload(format!(
                    "quantized body has {} codes for dim {}",
                    codes.len(),
                    p.dim
                )));
            }
            let levels = (1u32 << bits) - 1;
            if let Some(&bad) = codes.iter().find(|&&c| c as u32 > levels) {
                return Err(Error::CorruptPayload(format!(
                    "code {bad} exceeds {levels} for {bits}-bit quantization"
                )));
            }
            Ok(codes
                .iter()
                .map(|&c| c as f64 / levels as f64 * 2.0 * scale - scale)
                .collect())
        }
    }
}

/// Wire bytes charged for a payload: 4 bytes per dense value, 6 bytes per
/// kept sparse entry (32-bit value + 16-bit index), ceil(bits*d/8) for
/// quantized codes. Scale overhead is excluded.
pub fn payload_bytes(p: &CompressedPayload) -> u64 {
    match &p.body {
        PayloadBody::Dense { values } => 4 * values.len() as u64,
        PayloadBody::Sparse { values, .. } => 6 * values.len() as u64,
        PayloadBody::Quantized { codes, bits, .. } => {
            ((*bits as u64) * codes.len() as u64).div_ceil(8)
        }
    }
}
