//! Symmetric per-layer uniform quantization.
//!
//! A layer's weights share one scale `Δ = max|w| / (2^(b−1) − 1)` and are
//! stored as integer codes `round(w/Δ)` (ties to even); biases get their own
//! scale. Scales are kept in binary32, the precision of the wire format.

use serde::{Deserialize, Serialize};

use super::{DenseNetwork, NetError};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedLayer {
    pub weight_scale: f32,
    pub weight_codes: Vec<i32>,
    pub bias_scale: f32,
    pub bias_codes: Vec<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantizedNetwork {
    pub layer_sizes: Vec<usize>,
    pub bits: u32,
    pub layers: Vec<QuantizedLayer>,
}

impl QuantizedNetwork {
    /// Largest code magnitude, `2^(b−1) − 1`.
    pub fn max_code(&self) -> i32 {
        max_code(self.bits)
    }
}

pub(crate) fn max_code(bits: u32) -> i32 {
    (1 << (bits - 1)) - 1
}

fn quantize_block(values: &[f64], bits: u32) -> (f32, Vec<i32>) {
    let qmax = max_code(bits);
    let peak = values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if peak == 0.0 {
        return (0.0, vec![0; values.len()]);
    }
    let scale = (peak / qmax as f64) as f32;
    let codes = values
        .iter()
        .map(|v| {
            (v / scale as f64)
                .round_ties_even()
                .clamp(-qmax as f64, qmax as f64) as i32
        })
        .collect();
    (scale, codes)
}

pub fn quantize(n: &DenseNetwork, bits: u32) -> Result<QuantizedNetwork, NetError> {
    if !(2..=16).contains(&bits) {
        return Err(NetError::Bits(bits));
    }
    let layers = n
        .weights()
        .iter()
        .zip(n.biases())
        .map(|(w, b)| {
            let (weight_scale, weight_codes) = quantize_block(w, bits);
            let (bias_scale, bias_codes) = quantize_block(b, bits);
            QuantizedLayer {
                weight_scale,
                weight_codes,
                bias_scale,
                bias_codes,
            }
        })
        .collect();
    Ok(QuantizedNetwork {
        layer_sizes: n.layer_sizes().to_vec(),
        bits,
        layers,
    })
}

pub fn dequantize(q: &QuantizedNetwork) -> DenseNetwork {
    let expand =
        |scale: f32, codes: &[i32]| codes.iter().map(|&c| c as f64 * scale as f64).collect();
    let weights = q
        .layers
        .iter()
        .map(|l| expand(l.weight_scale, &l.weight_codes))
        .collect();
    let biases = q
        .layers
        .iter()
        .map(|l| expand(l.bias_scale, &l.bias_codes))
        .collect();
    DenseNetwork::new(q.layer_sizes.clone(), weights, biases)
        .expect("quantized network has consistent shapes")
}
