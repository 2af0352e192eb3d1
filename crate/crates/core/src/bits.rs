//! MSB-first bit packing and unsigned LEB128 varints shared by the binary formats.

/// Appends bits most-significant first into a byte buffer.
#[derive(Debug, Default, Clone)]
pub(crate) struct BitWriter {
    bytes: Vec<u8>,
    bit_len: usize,
}

impl BitWriter {
    pub(crate) fn new() -> Self {
        Self::default()
    }

    /// Writes the low `width` bits of `value`, high bit first.
    pub(crate) fn write(&mut self, value: u64, width: u32) {
        debug_assert!(width <= 64);
        for i in (0..width).rev() {
            let bit = (value >> i) & 1;
            if self.bit_len.is_multiple_of(8) {
                self.bytes.push(0);
            }
            if bit == 1 {
                let last = self.bytes.len() - 1;
                self.bytes[last] |= 0x80 >> (self.bit_len % 8);
            }
            self.bit_len += 1;
        }
    }

    pub(crate) fn write_bit(&mut self, bit: bool) {
        self.write(bit as u64, 1);
    }

    /// Zero-pads to the next byte boundary.
    pub(crate) fn align(&mut self) {
        self.bit_len = self.bytes.len() * 8;
    }

    pub(crate) fn bit_len(&self) -> usize {
        self.bit_len
    }

    pub(crate) fn into_bytes(self) -> Vec<u8> {
        self.bytes
    }
}

/// Reads bits most-significant first; returns `None` past the end.
#[derive(Debug, Clone)]
pub(crate) struct BitReader<'a> {
    bytes: &'a [u8],
    pos: usize,
    limit: usize,
}

impl<'a> BitReader<'a> {
    pub(crate) fn new(bytes: &'a [u8]) -> Self {
        Self::with_limit(bytes, bytes.len() * 8)
    }

    /// A reader that stops after `limit` bits even if the buffer has padding.
    pub(crate) fn with_limit(bytes: &'a [u8], limit: usize) -> Self {
        Self {
            bytes,
            pos: 0,
            limit: limit.min(bytes.len() * 8),
        }
    }

    pub(crate) fn read(&mut self, width: u32) -> Option<u64> {
        if self.pos + width as usize > self.limit {
            return None;
        }
        let mut value = 0u64;
        for _ in 0..width {
            let byte = self.bytes[self.pos / 8];
            let bit = (byte >> (7 - self.pos % 8)) & 1;
            value = (value << 1) | bit as u64;
            self.pos += 1;
        }
        Some(value)
    }

    pub(crate) fn read_bit(&mut self) -> Option<bool> {
        self.read(1).map(|b| b == 1)
    }

    pub(crate) fn remaining(&self) -> usize {
        self.limit - self.pos
    }
}

pub(crate) fn write_varint(out: &mut Vec<u8>, mut value: u64) {
    loop {
        let byte = (value & 0x7f) as u8;
        value >>= 7;
        if value == 0 {
            out.push(byte);
            return;
        }
        out.push(byte | 0x80);
    }
}

#[cfg(test)]
pub(crate) fn varint_len(value: u64) -> usize {
    let mut buf = Vec::with_capacity(10);
    write_varint(&mut buf, value);
    buf.len()
}

/// Why a varint failed to parse.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum VarintError {
    Truncated,
    Overflow,
    /// A non-minimal encoding (trailing zero continuation group).
    Overlong,
}

/// Reads one varint at `*pos`, advancing it. Only minimal encodings are accepted.
pub(crate) fn read_varint(bytes: &[u8], pos: &mut usize) -> Result<u64, VarintError> {
    let mut value = 0u64;
    let mut shift = 0u32;
    let start = *pos;
    loop {
        let Some(&byte) = bytes.get(*pos) else {
            return Err(VarintError::Truncated);
        };
        *pos += 1;
        let group = (byte & 0x7f) as u64;
        if shift >= 64 || (shift == 63 && group > 1) {
            return Err(VarintError::Overflow);
        }
        value |= group << shift;
        if byte & 0x80 == 0 {
            if group == 0 && *pos - start > 1 {
                return Err(VarintError::Overlong);
            }
            return Ok(value);
        }
        shift += 7;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bit_roundtrip() {
        let mut w = BitWriter::new();
        w.write(0b101, 3);
        w.write(0xabc, 12);
        w.write_bit(true);
        assert_eq!(w.bit_len(), 16);
        let bytes = w.into_bytes();
        assert_eq!(bytes, vec![0b1011_0101, 0b0111_1001]);
        let mut r = BitReader::new(&bytes);
        assert_eq!(r.read(3), Some(0b101));
        assert_eq!(r.read(12), Some(0xabc));
        assert_eq!(r.read_bit(), Some(true));
        assert_eq!(r.read(1), None);
    }

    #[test]
    fn varints() {
        for v in [0u64, 1, 127, 128, 300, 16_383, 16_384, u64::MAX] {
            let mut buf = Vec::new();
            write_varint(&mut buf, v);
            assert_eq!(buf.len(), varint_len(v));
            let mut pos = 0;
            assert_eq!(read_varint(&buf, &mut pos), Ok(v));
            assert_eq!(pos, buf.len());
        }
        let mut pos = 0;
        assert_eq!(
            read_varint(&[0x80, 0x00], &mut pos),
            Err(VarintError::Overlong)
        );
        let mut pos = 0;
        assert_eq!(read_varint(&[0x80], &mut pos), Err(VarintError::Truncated));
    }
}
