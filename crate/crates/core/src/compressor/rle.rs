//! Byte run-length coding: a 16-bit header followed by `(count, byte)` pairs,
//! each run at most 255 bytes long.

use super::HEADER_BITS;

const VERSION: u16 = 1;
const MAX_RUN: usize = 255;

/// Maximal runs of equal bytes, split at [`MAX_RUN`].
pub fn runs(data: &[u8]) -> impl Iterator<Item = (u8, u8)> + '_ {
    let mut i = 0;
    std::iter::from_fn(move || {
        let &byte = data.get(i)?;
        let mut len = 1;
        while len < MAX_RUN && data.get(i + len) == Some(&byte) {
            len += 1;
        }
        i += len;
        Some((len as u8, byte))
    })
}

pub fn encoded_bits(data: &[u8]) -> u64 {
    HEADER_BITS + 16 * runs(data).count() as u64
}

pub fn encode(data: &[u8]) -> Vec<u8> {
    let mut out = VERSION.to_be_bytes().to_vec();
    for (len, byte) in runs(data) {
        out.push(len);
        out.push(byte);
    }
    out
}

pub fn decode(stream: &[u8]) -> Option<Vec<u8>> {
    let (header, body) = stream.split_at_checked(2)?;
    if u16::from_be_bytes([header[0], header[1]]) != VERSION || body.len() % 2 != 0 {
        return None;
    }
    let mut out = Vec::new();
    for pair in body.chunks_exact(2) {
        if pair[0] == 0 {
            return None;
        }
        out.extend(std::iter::repeat_n(pair[1], pair[0] as usize));
    }
    Some(out)
}
