//! LZ77 with a 4096-byte window and 3..=18 byte matches.
//!
//! Stream layout, most significant bit first:
//!
//! ```text
//! header  : 16 bits, version = 1
//! literal : 0 | byte (8 bits)                                  =  9 bits
//! match   : 1 | offset − 1 (12 bits) | length − 3 (4 bits)     = 17 bits
//! ```
//!
//! The stream ends when the input is exhausted; trailing pad bits are not
//! counted. The parse is greedy: at each position the longest match in the
//! window is taken, preferring the nearest offset among equally long ones.

use crate::bits::{BitReader, BitWriter};

use super::HEADER_BITS;

pub const WINDOW: usize = 4096;
pub const MIN_MATCH: usize = 3;
pub const MAX_MATCH: usize = 18;

pub const LITERAL_BITS: u64 = 9;
pub const MATCH_BITS: u64 = 17;

const VERSION: u64 = 1;
const HASH_BITS: u32 = 14;
const NIL: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Literal(u8),
    /// `offset` in 1..=4096 bytes back, `len` in 3..=18.
    Match {
        offset: u16,
        len: u8,
    },
}

impl Token {
    pub fn bits(self) -> u64 {
        match self {
            Token::Literal(_) => LITERAL_BITS,
            Token::Match { .. } => MATCH_BITS,
        }
    }
}

fn hash3(data: &[u8], i: usize) -> usize {
    let v = (data[i] as u32) << 16 | (data[i + 1] as u32) << 8 | data[i + 2] as u32;
    (v.wrapping_mul(0x9E37_79B1) >> (32 - HASH_BITS)) as usize
}

/// Greedy tokenization of `data`.
pub fn tokenize(data: &[u8]) -> Vec<Token> {
    let n = data.len();
    let mut tokens = Vec::with_capacity(n / 2 + 1);
    // Hash chains: head[h] is the latest position with hash h, prev[i] the
    // previous position sharing position i's hash.
    let mut head = vec![NIL; 1 << HASH_BITS];
    let mut prev = vec![NIL; n];
    let mut inserted = 0usize;

    let insert_until =
        |head: &mut Vec<u32>, prev: &mut Vec<u32>, upto: usize, inserted: &mut usize| {
            while *inserted < upto {
                let i = *inserted;
                if i + MIN_MATCH <= n {
                    let h = hash3(data, i);
                    prev[i] = head[h];
                    head[h] = i as u32;
                }
                *inserted += 1;
            }
        };

    let mut pos = 0;
    while pos < n {
        insert_until(&mut head, &mut prev, pos, &mut inserted);
        let mut best_len = 0;
        let mut best_off = 0;
        if pos + MIN_MATCH <= n {
            let max_len = MAX_MATCH.min(n - pos);
            let mut cand = head[hash3(data, pos)];
            while cand != NIL {
                let c = cand as usize;
                let offset = pos - c;
                if offset > WINDOW {
                    break;
                }
                let len = data[c..]
                    .iter()
                    .zip(&data[pos..pos + max_len])
                    .take_while(|(a, b)| a == b)
                    .count();
                if len > best_len {
                    best_len = len;
                    best_off = offset;
                    if len == max_len {
                        break;
                    }
                }
                cand = prev[c];
            }
        }
        if best_len >= MIN_MATCH {
            tokens.push(Token::Match {
                offset: best_off as u16,
                len: best_len as u8,
            });
            pos += best_len;
        } else {
            tokens.push(Token::Literal(data[pos]));
            pos += 1;
        }
    }
    tokens
}

/// Exact size of the compressed stream in bits, header included.
pub fn encoded_bits(data: &[u8]) -> u64 {
    HEADER_BITS + tokenize(data).iter().map(|t| t.bits()).sum::<u64>()
}

/// A packed stream plus its exact bit length (the final byte may be padded).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Stream {
    pub bytes: Vec<u8>,
    pub bit_len: usize,
}

pub fn encode(data: &[u8]) -> Stream {
    let mut w = BitWriter::new();
    w.write(VERSION, HEADER_BITS as u32);
    for token in tokenize(data) {
        match token {
            Token::Literal(b) => {
                w.write_bit(false);
                w.write(b as u64, 8);
            }
            Token::Match { offset, len } => {
                w.write_bit(true);
                w.write(offset as u64 - 1, 12);
                w.write((len as usize - MIN_MATCH) as u64, 4);
            }
        }
    }
    let bit_len = w.bit_len();
    Stream {
        bytes: w.into_bytes(),
        bit_len,
    }
}

/// Inverse of [`encode`]; `None` on a malformed stream.
pub fn decode(stream: &Stream) -> Option<Vec<u8>> {
    let mut r = BitReader::with_limit(&stream.bytes, stream.bit_len);
    if r.read(HEADER_BITS as u32)? != VERSION {
        return None;
    }
    let mut out: Vec<u8> = Vec::new();
    while r.remaining() > 0 {
        if r.read_bit()? {
            let offset = r.read(12)? as usize + 1;
            let len = r.read(4)? as usize + MIN_MATCH;
            if offset > out.len() {
                return None;
            }
            let start = out.len() - offset;
            for k in 0..len {
                let b = out[start + k];
                out.push(b);
            }
        } else {
            out.push(r.read(8)? as u8);
        }
    }
    Some(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn small_hand_counted() {
        // "abcabcabc": 3 literals then one match (offset 3, len 6)
        let t = tokenize(b"abcabcabc");
        assert_eq!(
            t,
            vec![
                Token::Literal(b'a'),
                Token::Literal(b'b'),
                Token::Literal(b'c'),
                Token::Match { offset: 3, len: 6 }
            ]
        );
        assert_eq!(encoded_bits(b"abcabcabc"), 16 + 3 * 9 + 17);
        assert_eq!(encoded_bits(b""), 16);
    }

    #[test]
    fn overlapping_run() {
        let data = vec![b'z'; 40];
        let t = tokenize(&data);
        assert_eq!(t[0], Token::Literal(b'z'));
        assert_eq!(t[1], Token::Match { offset: 1, len: 18 });
        assert_eq!(decode(&encode(&data)).unwrap(), data);
    }

    #[test]
    fn window_edge() {
        // A motif exactly WINDOW bytes back is reachable, one byte further is not.
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        let base: Vec<u8> = (0..WINDOW + 1).map(|_| rng.random()).collect();

        let mut reach = base[..WINDOW].to_vec();
        reach.extend_from_slice(&base[0..18]);
        let t = tokenize(&reach);
        assert_eq!(
            t.last(),
            Some(&Token::Match {
                offset: WINDOW as u16,
                len: 18
            })
        );
        assert_eq!(decode(&encode(&reach)).unwrap(), reach);

        let mut beyond = base.clone();
        beyond.extend_from_slice(&base[0..18]);
        let t = tokenize(&beyond);
        assert!(!t.iter().any(|t| matches!(t, Token::Match { len: 18, .. })));
        assert_eq!(decode(&encode(&beyond)).unwrap(), beyond);
    }

    #[test]
    fn stream_bit_length_matches_count() {
        let data = b"the quick brown fox jumps over the lazy dog the quick brown fox";
        let s = encode(data);
        assert_eq!(s.bit_len as u64, encoded_bits(data));
        assert_eq!(s.bytes.len(), s.bit_len.div_ceil(8));
    }

    #[test]
    fn regular_input_compresses_below_half_of_store() {
        for period in [1usize, 2, 7, 33, 64] {
            let data: Vec<u8> = (0..1024).map(|i| (i % period) as u8 ^ 0x5c).collect();
            let store = 8 * data.len() as u64 + 16;
            assert!(2 * encoded_bits(&data) < store, "period {period}");
        }
    }

    proptest! {
        #[test]
        fn lossless(data in proptest::collection::vec(0u8..4, 0..3000)) {
            prop_assert_eq!(decode(&encode(&data)).unwrap(), data);
        }
    }
}
