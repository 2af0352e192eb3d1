//! Compression-approximated information distances.
//!
//! With `C` a compressor and `C(x,y) = min(C(x‖y), C(y‖x))`:
//!
//! ```text
//! AID(x,y) ≈ C(x,y) − min(C(x), C(y))
//! NCD(x,y) = AID(x,y) / max(C(x), C(y))
//! C(x|y)   ≈ C(y‖x) − C(y)
//! ```
//!
//! All quantities are clamped at zero; real compressors occasionally report
//! a concatenation shorter than one of its parts.

mod matrix;
mod nwd;

use crate::compressor::{
    compress_len, concat_len, ByteSequence, CodeLength, CompressError, CompressorId,
};

pub use matrix::{distance_matrix, DistanceMatrix, Metric, Schedule};
pub use nwd::{nwd, CorpusCounts, FrequencyProvider, NwdError, TOY_CORPUS};

/// `min(C(x‖y), C(y‖x))`.
fn sym_concat(
    x: &ByteSequence,
    y: &ByteSequence,
    c: &CompressorId,
) -> Result<CodeLength, CompressError> {
    let xy = concat_len(x, y, c)?;
    if x == y {
        return Ok(xy);
    }
    let yx = concat_len(y, x, c)?;
    Ok(if yx < xy { yx } else { xy })
}

struct Parts {
    joint: CodeLength,
    cx: CodeLength,
    cy: CodeLength,
}

fn parts(x: &ByteSequence, y: &ByteSequence, c: &CompressorId) -> Result<Parts, CompressError> {
    let cx = compress_len(x, c)?;
    let cy = if x == y { cx } else { compress_len(y, c)? };
    Ok(Parts {
        joint: sym_concat(x, y, c)?,
        cx,
        cy,
    })
}

impl Parts {
    fn aid(&self) -> CodeLength {
        self.joint
            .saturating_sub(CodeLength::from_bits(self.cx.bits().min(self.cy.bits())))
    }

    fn normalized(&self) -> f64 {
        self.aid().bits() / self.cx.bits().max(self.cy.bits())
    }
}

/// Approximate algorithmic information distance.
pub fn aid_approx(
    x: &ByteSequence,
    y: &ByteSequence,
    c: &CompressorId,
) -> Result<CodeLength, CompressError> {
    Ok(parts(x, y, c)?.aid())
}

/// Normalized information distance, approximated by `c`.
///
/// The denominator is never zero since every in-repo backend charges a header.
pub fn nid_approx(
    x: &ByteSequence,
    y: &ByteSequence,
    c: &CompressorId,
) -> Result<f64, CompressError> {
    Ok(parts(x, y, c)?.normalized())
}

/// Normalized compression distance. Numerically identical to [`nid_approx`].
pub fn ncd(x: &ByteSequence, y: &ByteSequence, c: &CompressorId) -> Result<f64, CompressError> {
    Ok(parts(x, y, c)?.normalized())
}

/// Conditional code length `C(x | y) ≈ C(y‖x) − C(y)`.
pub fn cond_len(
    x: &ByteSequence,
    given: &ByteSequence,
    c: &CompressorId,
) -> Result<CodeLength, CompressError> {
    Ok(concat_len(given, x, c)?.saturating_sub(compress_len(given, c)?))
}
