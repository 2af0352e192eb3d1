//! Small dense feed-forward networks: tanh hidden layers, identity output,
//! trained by full-batch gradient descent on mean squared error.

mod codec;
mod quant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode_net, encode_net};
pub use quant::{dequantize, quantize, QuantizedLayer, QuantizedNetwork};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NetError {
    #[error("invalid network: {0}")]
    Shape(String),
    #[error("expected input of length {expected}, got {got}")]
    InputDimension { expected: usize, got: usize },
    #[error("expected target of length {expected}, got {got}")]
    TargetDimension { expected: usize, got: usize },
    #[error("learning rate must be positive and finite, got {0}")]
    Rate(f64),
    #[error("training diverged at epoch {epoch}: loss {loss}")]
    Diverged { epoch: usize, loss: f64 },
    #[error("network decode failed at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },
    #[error("quantization width must be in 2..=16, got {0}")]
    Bits(u32),
}

/// One `(input, target)` training pair.
pub type Example = (Vec<f64>, Vec<f64>);

/// Weights are stored per layer as row-major `out × in` matrices.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseNetwork {
    layer_sizes: Vec<usize>,
    weights: Vec<Vec<f64>>,
    biases: Vec<Vec<f64>>,
}

impl DenseNetwork {
    pub fn new(
        layer_sizes: Vec<usize>,
        weights: Vec<Vec<f64>>,
        biases: Vec<Vec<f64>>,
    ) -> Result<Self, NetError> {
        if layer_sizes.len() < 2 || layer_sizes.contains(&0) {
            return Err(NetError::Shape(format!(
                "need at least two positive layer sizes, got {layer_sizes:?}"
            )));
        }
        let layers = layer_sizes.len() - 1;
        if weights.len() != layers || biases.len() != layers {
            return Err(NetError::Shape(format!(
                "expected {layers} weight and bias layers"
            )));
        }
        for l in 0..layers {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            if weights[l].len() != fan_in * fan_out || biases[l].len() != fan_out {
                return Err(NetError::Shape(format!(
                    "layer {l} does not match {fan_in}→{fan_out}"
                )));
            }
        }
        if weights
            .iter()
            .chain(&biases)
            .flatten()
            .any(|v| !v.is_finite())
        {
            return Err(NetError::Shape("non-finite parameter".into()));
        }
        Ok(Self {
            layer_sizes,
            weights,
            biases,
        })
    }

    pub fn zeros(layer_sizes: &[usize]) -> Result<Self, NetError> {
        let w = layer_sizes
            .windows(2)
            .map(|p| vec![0.0; p[0] * p[1]])
            .collect();
        let b = layer_sizes.iter().skip(1).map(|&n| vec![0.0; n]).collect();
        Self::new(layer_sizes.to_vec(), w, b)
    }

    /// Uniform Glorot initialization for weights and `±0.5` for biases,
    /// drawn from a ChaCha8 stream seeded with `seed`.
    pub fn seeded(layer_sizes: &[usize], seed: u64) -> Result<Self, NetError> {
        let mut net = Self::zeros(layer_sizes)?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for l in 0..net.weights.len() {
            let (fan_in, fan_out) = (layer_sizes[l], layer_sizes[l + 1]);
            let limit = (6.0 / (fan_in + fan_out) as f64).sqrt();
            for w in &mut net.weights[l] {
                *w = rng.random_range(-limit..limit);
            }
            for b in &mut net.biases[l] {
                *b = rng.random_range(-0.5..0.5);
            }
        }
        Ok(net)
    }

    pub fn layer_sizes(&self) -> &[usize] {
        &self.layer_sizes
    }

    pub fn weights(&self) -> &[Vec<f64>] {
        &self.weights
    }

    pub fn biases(&self) -> &[Vec<f64>] {
        &self.biases
    }

    pub fn layer_count(&self) -> usize {
        self.weights.len()
    }

    pub fn forward(&self, input: &[f64]) -> Result<Vec<f64>, NetError> {
        self.check_input(input)?;
        Ok(self.activations(input).pop().expect("at least one layer"))
    }

    fn check_input(&self, input: &[f64]) -> Result<(), NetError> {
        if input.len() != self.layer_sizes[0] {
            return Err(NetError::InputDimension {
                expected: self.layer_sizes[0],
                got: input.len(),
            });
        }
        Ok(())
    }

    /// Activations of every layer, input included.
    fn activations(&self, input: &[f64]) -> Vec<Vec<f64>> {
        let mut acts = vec![input.to_vec()];
        let last = self.layer_count() - 1;
        for l in 0..self.layer_count() {
            let a = &acts[l];
            let fan_in = a.len();
            let z = self.biases[l]
                .iter()
                .enumerate()
                .map(|(o, &b)| {
                    let row = &self.weights[l][o * fan_in..(o + 1) * fan_in];
                    b + row.iter().zip(a).map(|(w, x)| w * x).sum::<f64>()
                })
                .map(|z| if l == last { z } else { libm::tanh(z) })
                .collect();
            acts.push(z);
        }
        acts
    }

    fn check_data(&self, data: &[Example]) -> Result<(), NetError> {
        let out = *self.layer_sizes.last().expect("non-empty");
        for (x, t) in data {
            self.check_input(x)?;
            if t.len() != out {
                return Err(NetError::TargetDimension {
                    expected: out,
                    got: t.len(),
                });
            }
        }
        Ok(())
    }

    /// Mean over examples and outputs of the squared error.
    pub fn mse(&self, data: &[Example]) -> Result<f64, NetError> {
        self.check_data(data)?;
        Ok(self.loss_and_gradient(data, false).0)
    }

    /// Loss and its gradient with respect to every weight and bias.
    pub fn gradient(&self, data: &[Example]) -> Result<(f64, DenseNetwork), NetError> {
        self.check_data(data)?;
        let (loss, grad) = self.loss_and_gradient(data, true);
        Ok((loss, grad.expect("requested")))
    }

    fn loss_and_gradient(&self, data: &[Example], want_grad: bool) -> (f64, Option<DenseNetwork>) {
        if data.is_empty() {
            return (
                0.0,
                want_grad.then(|| Self::zeros(&self.layer_sizes).expect("valid shape")),
            );
        }
        let out = *self.layer_sizes.last().expect("non-empty");
        let scale = 1.0 / (data.len() * out) as f64;
        let mut loss = 0.0;
        let mut grad = want_grad.then(|| Self::zeros(&self.layer_sizes).expect("valid shape"));
        for (x, t) in data {
            let acts = self.activations(x);
            let y = acts.last().expect("non-empty");
            loss += y.iter().zip(t).map(|(y, t)| (y - t) * (y - t)).sum::<f64>() * scale;
            let Some(g) = grad.as_mut() else { continue };
            // delta holds ∂L/∂z for the current layer
            let mut delta: Vec<f64> = y
                .iter()
                .zip(t)
                .map(|(y, t)| 2.0 * (y - t) * scale)
                .collect();
            for l in (0..self.layer_count()).rev() {
                let a = &acts[l];
                let fan_in = a.len();
                for (o, d) in delta.iter().enumerate() {
                    g.biases[l][o] += d;
                    for (i, ai) in a.iter().enumerate() {
                        g.weights[l][o * fan_in + i] += d * ai;
                    }
                }
                if l > 0 {
                    delta = (0..fan_in)
                        .map(|i| {
                            let back: f64 = delta
                                .iter()
                                .enumerate()
                                .map(|(o, d)| d * self.weights[l][o * fan_in + i])
                                .sum();
                            back * (1.0 - a[i] * a[i])
                        })
                        .collect();
                }
            }
        }
        (loss, grad)
    }
}

/// Gradient descent returning the trained copy and the loss before each
/// epoch followed by the final loss.
pub fn train_with_losses(
    n: &DenseNetwork,
    data: &[Example],
    epochs: usize,
    rate: f64,
) -> Result<(DenseNetwork, Vec<f64>), NetError> {
    if !(rate.is_finite() && rate > 0.0) {
        return Err(NetError::Rate(rate));
    }
    n.check_data(data)?;
    let mut net = n.clone();
    let mut losses = Vec::with_capacity(epochs + 1);
    for epoch in 0..epochs {
        let (loss, g) = net.loss_and_gradient(data, true);
        if !loss.is_finite() {
            return Err(NetError::Diverged { epoch, loss });
        }
        losses.push(loss);
        let g = g.expect("requested");
        for (p, dp) in net
            .weights
            .iter_mut()
            .chain(&mut net.biases)
            .zip(g.weights.iter().chain(&g.biases))
        {
            for (v, dv) in p.iter_mut().zip(dp) {
                *v -= rate * dv;
            }
        }
    }
    let last = net.loss_and_gradient(data, false).0;
    if !last.is_finite()
        || net
            .weights
            .iter()
            .chain(&net.biases)
            .flatten()
            .any(|v| !v.is_finite())
    {
        return Err(NetError::Diverged {
            epoch: epochs,
            loss: last,
        });
    }
    losses.push(last);
    Ok((net, losses))
}

pub fn train(
    n: &DenseNetwork,
    data: &[Example],
    epochs: usize,
    rate: f64,
) -> Result<DenseNetwork, NetError> {
    train_with_losses(n, data, epochs, rate).map(|(net, _)| net)
}

/// Built-in training tasks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NetTask {
    /// Two-input exclusive or.
    Xor,
    /// Three-input parity.
    Parity3,
}

impl NetTask {
    pub fn inputs(self) -> usize {
        match self {
            NetTask::Xor => 2,
            NetTask::Parity3 => 3,
        }
    }

    /// Every input in `{0,1}^n` with its parity as the target.
    pub fn examples(self) -> Vec<Example> {
        let n = self.inputs();
        (0..1u32 << n)
            .map(|m| {
                let x = (0..n).map(|i| ((m >> (n - 1 - i)) & 1) as f64).collect();
                (x, vec![(m.count_ones() % 2) as f64])
            })
            .collect()
    }
}

/// A network description for the harness: its shape, init seed and task.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NetSpec {
    pub layer_sizes: Vec<usize>,
    pub seed: u64,
    pub task: NetTask,
}

impl NetSpec {
    pub fn init(&self) -> Result<DenseNetwork, NetError> {
        if self.layer_sizes.first() != Some(&self.task.inputs())
            || self.layer_sizes.last() != Some(&1)
        {
            return Err(NetError::Shape(format!(
                "{:?} needs {} inputs and 1 output, got {:?}",
                self.task,
                self.task.inputs(),
                self.layer_sizes
            )));
        }
        DenseNetwork::seeded(&self.layer_sizes, self.seed)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn random_data(rng: &mut ChaCha8Rng, n: usize, inputs: usize, outputs: usize) -> Vec<Example> {
        (0..n)
            .map(|_| {
                let x = (0..inputs).map(|_| rng.random_range(-1.0..1.0)).collect();
                let t = (0..outputs).map(|_| rng.random_range(-1.0..1.0)).collect();
                (x, t)
            })
            .collect()
    }

    #[test]
    fn zero_network_outputs_zero() {
        let n = DenseNetwork::zeros(&[3, 5, 2]).unwrap();
        assert_eq!(n.forward(&[1.0, -2.0, 0.5]).unwrap(), vec![0.0, 0.0]);
    }

    #[test]
    fn affine_single_layer() {
        let n = DenseNetwork::new(vec![1, 1], vec![vec![2.0]], vec![vec![1.0]]).unwrap();
        assert_eq!(n.forward(&[3.0]).unwrap(), vec![7.0]);
        assert_eq!(
            n.forward(&[1.0, 2.0]),
            Err(NetError::InputDimension {
                expected: 1,
                got: 2
            })
        );
    }

    #[test]
    fn hidden_layer_uses_tanh() {
        let n = DenseNetwork::new(
            vec![1, 1, 1],
            vec![vec![1.0], vec![1.0]],
            vec![vec![0.0], vec![0.0]],
        )
        .unwrap();
        assert!((n.forward(&[0.5]).unwrap()[0] - 0.5f64.tanh()).abs() < 1e-15);
    }

    #[test]
    fn shape_errors() {
        assert!(DenseNetwork::zeros(&[3]).is_err());
        assert!(DenseNetwork::zeros(&[3, 0]).is_err());
        assert!(DenseNetwork::new(vec![2, 1], vec![vec![1.0]], vec![vec![0.0]]).is_err());
        assert!(DenseNetwork::new(vec![1, 1], vec![vec![f64::NAN]], vec![vec![0.0]]).is_err());
    }

    #[test]
    fn gradient_matches_central_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = 1e-4;
        for trial in 0..10 {
            let sizes = [
                rng.random_range(1..4),
                rng.random_range(1..5),
                rng.random_range(1..4),
                rng.random_range(1..3),
            ];
            let net = DenseNetwork::seeded(&sizes, trial).unwrap();
            let data = random_data(&mut rng, 5, sizes[0], sizes[3]);
            let (_, g) = net.gradient(&data).unwrap();
            let mut worst: f64 = 0.0;
            for l in 0..net.layer_count() {
                for which in 0..2 {
                    let len = if which == 0 {
                        net.weights[l].len()
                    } else {
                        net.biases[l].len()
                    };
                    for i in 0..len {
                        let bump = |delta: f64| {
                            let mut m = net.clone();
                            let p = if which == 0 {
                                &mut m.weights[l][i]
                            } else {
                                &mut m.biases[l][i]
                            };
                            *p += delta;
                            m.mse(&data).unwrap()
                        };
                        let numeric = (bump(h) - bump(-h)) / (2.0 * h);
                        let analytic = if which == 0 {
                            g.weights[l][i]
                        } else {
                            g.biases[l][i]
                        };
                        let denom = analytic.abs().max(numeric.abs()).max(1e-6);
                        worst = worst.max((analytic - numeric).abs() / denom);
                    }
                }
            }
            assert!(worst < 1e-4, "net {sizes:?}: relative error {worst}");
        }
    }

    #[test]
    fn xor_trains() {
        let net = DenseNetwork::seeded(&[2, 4, 1], 42).unwrap();
        let data = NetTask::Xor.examples();
        let trained = train(&net, &data, 5000, 0.5).unwrap();
        let mse = trained.mse(&data).unwrap();
        assert!(mse < 0.05, "{mse}");
    }

    #[test]
    fn zero_epochs_is_identity() {
        let net = DenseNetwork::seeded(&[2, 3, 1], 1).unwrap();
        assert_eq!(train(&net, &NetTask::Xor.examples(), 0, 0.1).unwrap(), net);
    }

    #[test]
    fn small_rate_loss_non_increasing() {
        for (task, sizes) in [(NetTask::Xor, [2, 4, 1]), (NetTask::Parity3, [3, 4, 1])] {
            let net = DenseNetwork::seeded(&sizes, 7).unwrap();
            let (_, losses) = train_with_losses(&net, &task.examples(), 500, 1e-3).unwrap();
            assert!(losses.windows(2).all(|w| w[1] <= w[0]));
        }
    }

    #[test]
    fn divergence_reported() {
        let net = DenseNetwork::seeded(&[1, 1], 0).unwrap();
        let data = vec![(vec![1000.0], vec![1.0])];
        assert!(matches!(
            train(&net, &data, 200, 10.0),
            Err(NetError::Diverged { .. })
        ));
        assert_eq!(train(&net, &data, 1, 0.0), Err(NetError::Rate(0.0)));
    }

    #[test]
    fn parity_examples() {
        let ex = NetTask::Parity3.examples();
        assert_eq!(ex.len(), 8);
        assert_eq!(ex[3], (vec![0.0, 1.0, 1.0], vec![0.0]));
        assert_eq!(ex[7], (vec![1.0, 1.0, 1.0], vec![1.0]));
    }

    #[test]
    fn spec_json() {
        let spec: NetSpec =
            serde_json::from_str(r#"{"layer_sizes":[3,4,1],"seed":5,"task":"parity3"}"#).unwrap();
        assert_eq!(spec.init().unwrap().layer_sizes(), &[3, 4, 1]);
        let bad = NetSpec {
            layer_sizes: vec![2, 4, 1],
            ..spec
        };
        assert!(bad.init().is_err());
    }
}
