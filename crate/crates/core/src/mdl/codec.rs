//! Hypothesis bit layout, MSB first:
//!
//! ```text
//! 8   family tag (0 polynomial, 1 fourier)
//! 8   term count k
//! 26k coefficients, sign-magnitude (1 sign bit, 25 magnitude bits)
//! 26  σ, same layout, sign always 0
//! ```
//!
//! padded with zero bits to a whole byte.

use crate::bits::{BitReader, BitWriter};
use crate::compressor::ByteSequence;

use super::{Family, MdlError, PointHypothesis, WORD_BITS};

const MAG_BITS: u32 = WORD_BITS - 1;

fn put_word(w: &mut BitWriter, code: i64) {
    w.write_bit(code < 0);
    w.write(code.unsigned_abs(), MAG_BITS);
}

pub fn encode_hypothesis(h: &PointHypothesis) -> ByteSequence {
    let mut w = BitWriter::new();
    w.write(h.family().tag() as u64, 8);
    w.write(h.term_count() as u64, 8);
    for &c in h.coefficient_codes() {
        put_word(&mut w, c);
    }
    put_word(&mut w, h.sigma_code());
    ByteSequence::new(w.into_bytes())
}

/// Inverse of [`encode_hypothesis`]; rejects any byte string it could not
/// have produced.
pub fn decode_hypothesis(bytes: &[u8]) -> Result<PointHypothesis, MdlError> {
    let fail = |m: &str| MdlError::Decode(m.to_string());
    let mut r = BitReader::new(bytes);
    let tag = r.read(8).ok_or_else(|| fail("missing family tag"))?;
    let family = Family::from_tag(tag as u8).ok_or_else(|| fail("unknown family tag"))?;
    let k = r.read(8).ok_or_else(|| fail("missing term count"))? as usize;
    let mut word = || -> Result<i64, MdlError> {
        let neg = r.read_bit().ok_or_else(|| fail("truncated"))?;
        let mag = r.read(MAG_BITS).ok_or_else(|| fail("truncated"))? as i64;
        if neg && mag == 0 {
            return Err(fail("negative zero"));
        }
        Ok(if neg { -mag } else { mag })
    };
    let coefficients = (0..k).map(|_| word()).collect::<Result<Vec<_>, _>>()?;
    let sigma = word()?;
    let used = 16 + WORD_BITS as usize * (k + 1);
    if bytes.len() != used.div_ceil(8) {
        return Err(fail("length does not match term count"));
    }
    if r.read(r.remaining() as u32).is_some_and(|pad| pad != 0) {
        return Err(fail("non-zero padding"));
    }
    PointHypothesis::from_codes(family, coefficients, sigma)
}
