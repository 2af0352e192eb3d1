//! Quantized network wire format:
//!
//! ```text
//! 0x4E 0x51 0x01
//! varint L, then L varint layer sizes
//! byte b
//! per layer: weight Δ (binary32, big endian), bias Δ (binary32, big endian),
//!            weight codes row-major, then bias codes, b-bit two's complement
//!            packed MSB first, zero padded to a byte boundary
//! ```

use crate::bits::{read_varint, write_varint, BitReader, BitWriter};
use crate::compressor::ByteSequence;

use super::quant::max_code;
use super::{NetError, QuantizedLayer, QuantizedNetwork};

pub const MAGIC: [u8; 2] = [0x4E, 0x51];
pub const VERSION: u8 = 0x01;

pub fn encode_net(q: &QuantizedNetwork) -> ByteSequence {
    let mut out = Vec::new();
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    write_varint(&mut out, q.layer_sizes.len() as u64);
    for &s in &q.layer_sizes {
        write_varint(&mut out, s as u64);
    }
    out.push(q.bits as u8);
    let mask = (1u64 << q.bits) - 1;
    for layer in &q.layers {
        out.extend_from_slice(&layer.weight_scale.to_be_bytes());
        out.extend_from_slice(&layer.bias_scale.to_be_bytes());
        let mut w = BitWriter::new();
        for &c in layer.weight_codes.iter().chain(&layer.bias_codes) {
            w.write(c as i64 as u64 & mask, q.bits);
        }
        w.align();
        out.extend_from_slice(&w.into_bytes());
    }
    ByteSequence::new(out)
}

fn fail<T>(offset: usize, reason: impl Into<String>) -> Result<T, NetError> {
    Err(NetError::Decode {
        offset,
        reason: reason.into(),
    })
}

fn take<'a>(bytes: &'a [u8], pos: &mut usize, n: usize, what: &str) -> Result<&'a [u8], NetError> {
    if bytes.len() - *pos < n {
        return fail(*pos, format!("truncated {what}"));
    }
    let s = &bytes[*pos..*pos + n];
    *pos += n;
    Ok(s)
}

fn scale(bytes: &[u8], pos: &mut usize) -> Result<f32, NetError> {
    let at = *pos;
    let raw = take(bytes, pos, 4, "scale")?;
    let v = f32::from_be_bytes(raw.try_into().expect("four bytes"));
    if !(v.is_finite() && v.is_sign_positive()) {
        return fail(at, format!("invalid scale {v}"));
    }
    Ok(v)
}

/// Inverse of [`encode_net`]. Accepts only encodings it could have produced.
pub fn decode_net(bytes: &[u8]) -> Result<QuantizedNetwork, NetError> {
    if bytes.len() < 2 || bytes[..2] != MAGIC {
        return fail(0, "bad magic");
    }
    match bytes.get(2) {
        Some(&VERSION) => {}
        Some(v) => return fail(2, format!("unsupported version {v}")),
        None => return fail(2, "missing version"),
    }
    let mut pos = 3;
    let varint = |pos: &mut usize, what: &str| {
        let at = *pos;
        read_varint(bytes, pos).or_else(|e| fail(at, format!("{what}: {e:?}")))
    };
    let count = varint(&mut pos, "layer count")?;
    if count < 2 || count > (bytes.len() - pos) as u64 {
        return fail(3, format!("invalid layer count {count}"));
    }
    let mut layer_sizes = Vec::with_capacity(count as usize);
    for _ in 0..count {
        let at = pos;
        let s = varint(&mut pos, "layer size")?;
        if s == 0 || s > u32::MAX as u64 {
            return fail(at, format!("invalid layer size {s}"));
        }
        layer_sizes.push(s as usize);
    }
    let bits_at = pos;
    let bits = take(bytes, &mut pos, 1, "bit width")?[0] as u32;
    if !(2..=16).contains(&bits) {
        return fail(bits_at, format!("bit width {bits} outside 2..=16"));
    }
    let qmax = max_code(bits);

    let mut layers = Vec::with_capacity(layer_sizes.len() - 1);
    for pair in layer_sizes.windows(2) {
        let (fan_in, fan_out) = (pair[0], pair[1]);
        let weight_scale = scale(bytes, &mut pos)?;
        let bias_scale = scale(bytes, &mut pos)?;
        let n_codes = fan_in
            .checked_mul(fan_out)
            .and_then(|n| n.checked_add(fan_out));
        let Some(n_bytes) = n_codes
            .and_then(|n| n.checked_mul(bits as usize))
            .map(|b| b.div_ceil(8))
        else {
            return fail(pos, "layer too large");
        };
        let start = pos;
        let block = take(bytes, &mut pos, n_bytes, "codes")?;
        let mut r = BitReader::new(block);
        let mut codes = Vec::with_capacity(n_codes.expect("checked"));
        for i in 0..n_codes.expect("checked") {
            let raw = r.read(bits).expect("block sized for all codes");
            let c = ((raw << (64 - bits)) as i64 >> (64 - bits)) as i32;
            if c.abs() > qmax {
                return fail(
                    start + i * bits as usize / 8,
                    format!("code {c} outside ±{qmax}"),
                );
            }
            codes.push(c);
        }
        if r.read(r.remaining() as u32).is_some_and(|pad| pad != 0) {
            return fail(pos - 1, "non-zero padding");
        }
        let bias_codes = codes.split_off(fan_in * fan_out);
        for (s, cs, what) in [
            (weight_scale, &codes, "weight"),
            (bias_scale, &bias_codes, "bias"),
        ] {
            let peak = cs.iter().map(|c| c.abs()).max().unwrap_or(0);
            if (s == 0.0) != (peak == 0) {
                return fail(start, format!("{what} scale inconsistent with codes"));
            }
        }
        layers.push(QuantizedLayer {
            weight_scale,
            weight_codes: codes,
            bias_scale,
            bias_codes,
        });
    }
    if pos != bytes.len() {
        return fail(pos, "trailing bytes");
    }
    Ok(QuantizedNetwork {
        layer_sizes,
        bits,
        layers,
    })
}
