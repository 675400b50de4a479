//! Desk-scale differentiable models: multiclass logistic regression and a
//! tanh MLP, both with softmax cross-entropy loss and exact analytic
//! gradients over a flat parameter vector.
//!
//! Parameter layout per layer: `fan_in * fan_out` weights (row-major by
//! input), then `fan_out` biases.

use rand::Rng;

use crate::data::Dataset;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    LogReg,
    Mlp,
}

/// Architecture of a model: layer widths from input to class logits.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModelSpec {
    pub kind: ModelKind,
    pub layer_dims: Vec<usize>,
}

impl ModelSpec {
    pub fn logreg(input_dim: usize, classes: usize) -> Self {
        Self { kind: ModelKind::LogReg, layer_dims: vec![input_dim, classes] }
    }

    pub fn mlp(input_dim: usize, hidden: &[usize], classes: usize) -> Self {
        let mut dims = Vec::with_capacity(hidden.len() + 2);
        dims.push(input_dim);
        dims.extend_from_slice(hidden);
        dims.push(classes);
        Self { kind: ModelKind::Mlp, layer_dims: dims }
    }

    /// Parses a CLI model string: `logreg` or `mlp:H1[,H2,...]`.
    pub fn parse(s: &str, input_dim: usize, classes: usize) -> Result<Self> {
        if s == "logreg" {
            return Ok(Self::logreg(input_dim, classes));
        }
        if let Some(spec) = s.strip_prefix("mlp:") {
            let hidden: Vec<usize> = spec
                .split(',')
                .map(|h| {
                    h.parse::<usize>()
                        .map_err(|_| Error::InvalidConfig(format!("bad hidden width {h:?}")))
                })
                .collect::<Result<_>>()?;
            if hidden.is_empty() || hidden.contains(&0) {
                return Err(Error::InvalidConfig(format!("bad mlp widths {spec:?}")));
            }
            return Ok(Self::mlp(input_dim, &hidden, classes));
        }
        Err(Error::InvalidConfig(format!(
            "unknown model {s:?} (expected logreg or mlp:H1[,H2,...])"
        )))
    }

    /// Sum over layers of (fan_in + 1) * fan_out.
    pub fn param_count(&self) -> usize {
        self.layer_dims.windows(2).map(|w| (w[0] + 1) * w[1]).sum()
    }

    pub fn input_dim(&self) -> usize {
        self.layer_dims[0]
    }

    pub fn classes(&self) -> usize {
        *self.layer_dims.last().unwrap()
    }

    /// Glorot-uniform weights, zero biases, from the supplied stream.
    pub fn init_params(&self, rng: &mut impl Rng) -> Vec<f64> {
        let mut params = vec![0.0; self.param_count()];
        let mut offset = 0;
        for w in self.layer_dims.windows(2) {
            let (fan_in, fan_out) = (w[0], w[1]);
            let bound = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for p in &mut params[offset..offset + fan_in * fan_out] {
                *p = rng.gen_range(-bound..bound);
            }
            offset += (fan_in + 1) * fan_out;
        }
        params
    }
}

impl std::fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self.kind {
            ModelKind::LogReg => write!(f, "logreg"),
            ModelKind::Mlp => {
                let hidden: Vec<String> = self.layer_dims[1..self.layer_dims.len() - 1]
                    .iter()
                    .map(usize::to_string)
                    .collect();
                write!(f, "mlp:{}", hidden.join(","))
            }
        }
    }
}

/// Mean softmax cross-entropy over the batch and its exact gradient.
pub fn forward_backward(
    spec: &ModelSpec,
    params: &[f64],
    data: &Dataset,
    batch: &[usize],
) -> Result<(f64, Vec<f64>)> {
    check_shapes(spec, params, data)?;
    if batch.is_empty() {
        return Err(Error::InvalidData("empty batch".into()));
    }
    let mut grad = vec![0.0; params.len()];
    let mut loss = 0.0;
    let inv_batch = 1.0 / batch.len() as f64;
    let layers = spec.layer_dims.len() - 1;

    for &sample in batch {
        let x = data.feature_row(sample);
        let label = data.labels[sample];

        // Forward pass, keeping every activation for the backward sweep.
        let mut acts: Vec<Vec<f64>> = Vec::with_capacity(layers + 1);
        acts.push(x.to_vec());
        let mut offset = 0;
        for (l, dims) in spec.layer_dims.windows(2).enumerate() {
            let (fan_in, fan_out) = (dims[0], dims[1]);
            let weights = &params[offset..offset + fan_in * fan_out];
            let biases = &params[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
            let input = &acts[l];
            let mut z = biases.to_vec();
            for (i, &a) in input.iter().enumerate() {
                let row = &weights[i * fan_out..(i + 1) * fan_out];
                for (zo, &wv) in z.iter_mut().zip(row) {
                    *zo += a * wv;
                }
            }
            if l + 1 < layers {
                for zo in &mut z {
                    *zo = zo.tanh();
                }
            }
            if z.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFinite(format!(
                    "layer {l} produced a non-finite activation on sample {sample}"
                )));
            }
            acts.push(z);
            offset += (fan_in + 1) * fan_out;
        }

        // Stable log-softmax.
        let logits = acts.last().unwrap();
        let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        loss += (lse - logits[label]) * inv_batch;

        // Backward sweep: delta starts as softmax(logits) - onehot(label).
        let mut delta: Vec<f64> = logits.iter().map(|&v| (v - lse).exp()).collect();
        delta[label] -= 1.0;
        for d in &mut delta {
            *d *= inv_batch;
        }
        let mut offset_end = params.len();
        for l in (0..layers).rev() {
            let (fan_in, fan_out) = (spec.layer_dims[l], spec.layer_dims[l + 1]);
            let offset = offset_end - (fan_in + 1) * fan_out;
            let weights = &params[offset..offset + fan_in * fan_out];
            let input = &acts[l];

            let gw = &mut grad[offset..offset + fan_in * fan_out];
            for (i, &a) in input.iter().enumerate() {
                let row = &mut gw[i * fan_out..(i + 1) * fan_out];
                for (g, &d) in row.iter_mut().zip(&delta) {
                    *g += a * d;
                }
            }
            let gb = &mut grad[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
            for (g, &d) in gb.iter_mut().zip(&delta) {
                *g += d;
            }

            if l > 0 {
                let mut prev = vec![0.0; fan_in];
                for (i, p) in prev.iter_mut().enumerate() {
                    let row = &weights[i * fan_out..(i + 1) * fan_out];
                    *p = row.iter().zip(&delta).map(|(&w, &d)| w * d).sum();
                    // tanh'(z) expressed through the stored activation.
                    *p *= 1.0 - input[i] * input[i];
                }
                delta = prev;
            }
            offset_end = offset;
        }
    }
    Ok((loss, grad))
}

/// Accuracy and mean cross-entropy of one model over `indices` (or the whole
/// dataset when `indices` is `None`).
pub fn evaluate(
    spec: &ModelSpec,
    params: &[f64],
    data: &Dataset,
    indices: Option<&[usize]>,
) -> Result<(f64, f64)> {
    check_shapes(spec, params, data)?;
    let count = indices.map_or(data.len(), <[usize]>::len);
    if count == 0 {
        return Err(Error::InvalidData("empty evaluation set".into()));
    }
    let mut correct = 0usize;
    let mut loss = 0.0;
    for k in 0..count {
        let sample = indices.map_or(k, |idx| idx[k]);
        let logits = forward_logits(spec, params, data.feature_row(sample));
        let max = logits.iter().fold(f64::NEG_INFINITY, |m, &v| m.max(v));
        let lse = max + logits.iter().map(|&v| (v - max).exp()).sum::<f64>().ln();
        loss += lse - logits[data.labels[sample]];
        let argmax = logits
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.partial_cmp(b.1).unwrap().then(b.0.cmp(&a.0)))
            .map(|(i, _)| i)
            .unwrap();
        if argmax == data.labels[sample] {
            correct += 1;
        }
    }
    Ok((correct as f64 / count as f64, loss / count as f64))
}

fn forward_logits(spec: &ModelSpec, params: &[f64], x: &[f64]) -> Vec<f64> {
    let layers = spec.layer_dims.len() - 1;
    let mut a = x.to_vec();
    let mut offset = 0;
    for (l, dims) in spec.layer_dims.windows(2).enumerate() {
        let (fan_in, fan_out) = (dims[0], dims[1]);
        let weights = &params[offset..offset + fan_in * fan_out];
        let biases = &params[offset + fan_in * fan_out..offset + (fan_in + 1) * fan_out];
        let mut z = biases.to_vec();
        for (i, &ai) in a.iter().enumerate() {
            let row = &weights[i * fan_out..(i + 1) * fan_out];
            for (zo, &wv) in z.iter_mut().zip(row) {
                *zo += ai * wv;
            }
        }
        if l + 1 < layers {
            for zo in &mut z {
                *zo = zo.tanh();
            }
        }
        a = z;
        offset += (fan_in + 1) * fan_out;
    }
    a
}

fn check_shapes(spec: &ModelSpec, params: &[f64], data: &Dataset) -> Result<()> {
    if params.len() != spec.param_count() {
        return Err(Error::DimensionMismatch(format!(
            "model {} expects {} parameters, got {}",
            spec,
            spec.param_count(),
            params.len()
        )));
    }
    if data.input_dim != spec.input_dim() {
        return Err(Error::DimensionMismatch(format!(
            "model input dim {} vs dataset dim {}",
            spec.input_dim(),
            data.input_dim
        )));
    }
    if data.num_classes > spec.classes() {
        return Err(Error::DimensionMismatch(format!(
            "dataset has {} classes but model emits {}",
            data.num_classes,
            spec.classes()
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::generate_synthetic_classification;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha12Rng;

    #[test]
    fn param_count_matches_layer_arithmetic() {
        assert_eq!(ModelSpec::logreg(16, 4).param_count(), 17 * 4);
        assert_eq!(ModelSpec::mlp(16, &[32], 4).param_count(), 17 * 32 + 33 * 4);
        assert_eq!(ModelSpec::mlp(16, &[32], 4).param_count(), 676);
    }

    #[test]
    fn parse_model_strings() {
        assert_eq!(ModelSpec::parse("logreg", 8, 3).unwrap(), ModelSpec::logreg(8, 3));
        assert_eq!(
            ModelSpec::parse("mlp:32", 16, 4).unwrap(),
            ModelSpec::mlp(16, &[32], 4)
        );
        assert_eq!(
            ModelSpec::parse("mlp:64,32", 16, 4).unwrap().layer_dims,
            vec![16, 64, 32, 4]
        );
        assert!(ModelSpec::parse("mlp:", 16, 4).is_err());
        assert!(ModelSpec::parse("cnn", 16, 4).is_err());
    }

    #[test]
    fn zero_params_two_class_loss_is_ln2() {
        let data = generate_synthetic_classification(5, 64, 4, 2, 1.0).unwrap();
        let spec = ModelSpec::logreg(4, 2);
        let params = vec![0.0; spec.param_count()];
        let batch: Vec<usize> = (0..data.len()).collect();
        let (loss, _) = forward_backward(&spec, &params, &data, &batch).unwrap();
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15, "loss = {loss}");
    }

    /// Central finite differences, the independent gradient oracle.
    fn finite_difference_grad(
        spec: &ModelSpec,
        params: &[f64],
        data: &Dataset,
        batch: &[usize],
        step: f64,
    ) -> Vec<f64> {
        let mut fd = vec![0.0; params.len()];
        let mut probe = params.to_vec();
        for i in 0..params.len() {
            probe[i] = params[i] + step;
            let (up, _) = forward_backward(spec, &probe, data, batch).unwrap();
            probe[i] = params[i] - step;
            let (down, _) = forward_backward(spec, &probe, data, batch).unwrap();
            probe[i] = params[i];
            fd[i] = (up - down) / (2.0 * step);
        }
        fd
    }

    #[test]
    fn gradients_match_central_finite_differences() {
        let mut rng = ChaCha12Rng::seed_from_u64(42);
        for trial in 0..20 {
            let classes = 2 + trial % 3;
            let input_dim = 4 + trial % 4;
            let spec = if trial % 2 == 0 {
                ModelSpec::logreg(input_dim, classes)
            } else {
                ModelSpec::mlp(input_dim, &[5], classes)
            };
            let data = generate_synthetic_classification(
                trial as u64,
                24,
                input_dim,
                classes,
                1.5,
            )
            .unwrap();
            let mut params = spec.init_params(&mut rng);
            for p in &mut params {
                *p += rng.gen_range(-0.2..0.2);
            }
            let batch: Vec<usize> = (0..12).collect();
            let (_, grad) = forward_backward(&spec, &params, &data, &batch).unwrap();
            let fd = finite_difference_grad(&spec, &params, &data, &batch, 1e-5);
            for (i, (a, f)) in grad.iter().zip(&fd).enumerate() {
                let tol = 1e-6 * a.abs().max(1.0);
                assert!(
                    (a - f).abs() <= tol,
                    "trial {trial} param {i}: analytic {a} vs fd {f}"
                );
            }
        }
    }

    #[test]
    fn duplicated_batch_leaves_loss_and_grad_unchanged() {
        let data = generate_synthetic_classification(9, 40, 6, 3, 2.0).unwrap();
        let spec = ModelSpec::mlp(6, &[4], 3);
        let mut rng = ChaCha12Rng::seed_from_u64(1);
        let params = spec.init_params(&mut rng);
        let batch = vec![0, 5, 9];
        let doubled = vec![0, 5, 9, 0, 5, 9];
        let (l1, g1) = forward_backward(&spec, &params, &data, &batch).unwrap();
        let (l2, g2) = forward_backward(&spec, &params, &data, &doubled).unwrap();
        assert!((l1 - l2).abs() < 1e-12);
        for (a, b) in g1.iter().zip(&g2) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn evaluate_ranges_on_random_models() {
        let data = generate_synthetic_classification(3, 60, 5, 4, 1.0).unwrap();
        let spec = ModelSpec::mlp(5, &[6], 4);
        let mut rng = ChaCha12Rng::seed_from_u64(8);
        for _ in 0..5 {
            let params = spec.init_params(&mut rng);
            let (acc, loss) = evaluate(&spec, &params, &data, None).unwrap();
            assert!((0.0..=1.0).contains(&acc));
            assert!(loss >= 0.0);
        }
    }

    #[test]
    fn shape_errors_are_reported() {
        let data = generate_synthetic_classification(3, 10, 5, 2, 1.0).unwrap();
        let spec = ModelSpec::logreg(5, 2);
        let short = vec![0.0; spec.param_count() - 1];
        assert!(forward_backward(&spec, &short, &data, &[0]).is_err());
        let params = vec![0.0; spec.param_count()];
        assert!(forward_backward(&spec, &params, &data, &[]).is_err());
    }
}
