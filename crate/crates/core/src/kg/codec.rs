//! Binary graph format:
//!
//! ```text
//! 0x4B 0x47 0x01
//! varint E, then E × (varint len, utf-8 label)      entities, sorted
//! varint R, then R × (varint len, utf-8 label)      relations, sorted
//! varint P, then P × varint entity index            pinned entities, ascending
//! varint T, then T × (varint head delta, varint relation, varint tail)
//! ```
//!
//! Varints are unsigned LEB128. The head of each triple is stored as the
//! difference to the previous triple's head (the first against 0). The
//! decoder accepts exactly the canonical encodings, so decoding followed by
//! encoding is byte-identical.

use crate::bits::{read_varint, write_varint, VarintError};
use crate::compressor::ByteSequence;

use super::{KgError, KnowledgeGraph, Triple};

pub const MAGIC: [u8; 2] = [0x4B, 0x47];
pub const VERSION: u8 = 0x01;

fn put_label(out: &mut Vec<u8>, label: &str) {
    write_varint(out, label.len() as u64);
    out.extend_from_slice(label.as_bytes());
}

/// Encodes a canonical graph.
pub fn encode(g: &KnowledgeGraph) -> Result<ByteSequence, KgError> {
    if !g.is_canonical() {
        return Err(KgError::NotCanonical);
    }
    let mut out = Vec::with_capacity(64);
    out.extend_from_slice(&MAGIC);
    out.push(VERSION);
    for table in [g.entities(), g.relations()] {
        write_varint(&mut out, table.len() as u64);
        for label in table {
            put_label(&mut out, label);
        }
    }
    write_varint(&mut out, g.pinned().len() as u64);
    for p in g.pinned() {
        write_varint(
            &mut out,
            g.entity_index(p).expect("pinned entity is declared") as u64,
        );
    }
    write_varint(&mut out, g.triples().len() as u64);
    let mut prev_head = 0u64;
    for t in g.triples() {
        let head = g.entity_index(&t.head).expect("canonical") as u64;
        write_varint(&mut out, head - prev_head);
        write_varint(
            &mut out,
            g.relation_index(&t.relation).expect("canonical") as u64,
        );
        write_varint(&mut out, g.entity_index(&t.tail).expect("canonical") as u64);
        prev_head = head;
    }
    Ok(ByteSequence::new(out))
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn fail<T>(&self, offset: usize, reason: impl Into<String>) -> Result<T, KgError> {
        Err(KgError::Decode {
            offset,
            reason: reason.into(),
        })
    }

    fn varint(&mut self, what: &str) -> Result<u64, KgError> {
        let start = self.pos;
        read_varint(self.bytes, &mut self.pos).or_else(|e| {
            let reason = match e {
                VarintError::Truncated => format!("truncated {what}"),
                VarintError::Overflow => format!("{what} overflows 64 bits"),
                VarintError::Overlong => format!("non-minimal varint for {what}"),
            };
            self.fail(start, reason)
        })
    }

    fn index(&mut self, what: &str, bound: usize) -> Result<usize, KgError> {
        let start = self.pos;
        let v = self.varint(what)?;
        if v >= bound as u64 {
            return self.fail(
                start,
                format!("{what} {v} out of range (table has {bound})"),
            );
        }
        Ok(v as usize)
    }

    fn count(&mut self, what: &str) -> Result<usize, KgError> {
        let start = self.pos;
        let v = self.varint(what)?;
        // every element occupies at least one byte
        if v > (self.bytes.len() - self.pos) as u64 {
            return self.fail(start, format!("{what} {v} exceeds remaining input"));
        }
        Ok(v as usize)
    }

    fn labels(&mut self, what: &str) -> Result<Vec<String>, KgError> {
        let n = self.count(what)?;
        let mut out: Vec<String> = Vec::with_capacity(n);
        for _ in 0..n {
            let start = self.pos;
            let len = self.count("label length")?;
            if len == 0 {
                return self.fail(start, format!("empty {what} label"));
            }
            let raw = &self.bytes[self.pos..self.pos + len];
            let label = match std::str::from_utf8(raw) {
                Ok(s) => s.to_string(),
                Err(_) => return self.fail(self.pos, format!("{what} label is not utf-8")),
            };
            if out
                .last()
                .is_some_and(|prev| prev.as_str() >= label.as_str())
            {
                return self.fail(start, format!("{what} labels not strictly sorted"));
            }
            self.pos += len;
            out.push(label);
        }
        Ok(out)
    }
}

/// Parses a canonical encoding. Errors carry the byte offset of the fault.
pub fn decode(bytes: &[u8]) -> Result<KnowledgeGraph, KgError> {
    let mut r = Reader { bytes, pos: 0 };
    if bytes.len() < 2 || bytes[..2] != MAGIC {
        return r.fail(0, "bad magic");
    }
    match bytes.get(2) {
        Some(&VERSION) => {}
        Some(v) => return r.fail(2, format!("unsupported version {v}")),
        None => return r.fail(2, "missing version"),
    }
    r.pos = 3;

    let entities = r.labels("entity")?;
    let relations = r.labels("relation")?;

    let pin_start = r.pos;
    let n_pins = r.count("pin count")?;
    let mut pin_idx: Vec<usize> = Vec::with_capacity(n_pins);
    for _ in 0..n_pins {
        let start = r.pos;
        let i = r.index("pinned entity index", entities.len())?;
        if pin_idx.last().is_some_and(|&p| p >= i) {
            return r.fail(start, "pinned indices not strictly ascending");
        }
        pin_idx.push(i);
    }

    let n_triples = r.count("triple count")?;
    let mut idx_triples: Vec<(usize, usize, usize)> = Vec::with_capacity(n_triples);
    let mut prev_head = 0u64;
    for _ in 0..n_triples {
        let start = r.pos;
        let delta = r.varint("head delta")?;
        let head = prev_head
            .checked_add(delta)
            .filter(|&h| h < entities.len() as u64);
        let Some(head) = head else {
            return r.fail(start, "head index out of range");
        };
        let rel = r.index("relation index", relations.len())?;
        let tail = r.index("tail index", entities.len())?;
        let t = (head as usize, rel, tail);
        if idx_triples.last().is_some_and(|&p| p >= t) {
            return r.fail(start, "triples not strictly sorted");
        }
        idx_triples.push(t);
        prev_head = head;
    }
    if r.pos != bytes.len() {
        return r.fail(r.pos, "trailing bytes");
    }

    let mut used_e = vec![false; entities.len()];
    let mut used_r = vec![false; relations.len()];
    for &(h, rel, t) in &idx_triples {
        used_e[h] = true;
        used_e[t] = true;
        used_r[rel] = true;
    }
    if let Some(i) = used_r.iter().position(|u| !u) {
        return r.fail(pin_start, format!("relation {:?} is unused", relations[i]));
    }
    let isolated: Vec<usize> = (0..entities.len()).filter(|&i| !used_e[i]).collect();
    if isolated != pin_idx {
        return r.fail(
            pin_start,
            "pin list differs from the set of isolated entities",
        );
    }

    let triples = idx_triples
        .into_iter()
        .map(|(h, rel, t)| {
            Triple::new(
                entities[h].clone(),
                relations[rel].clone(),
                entities[t].clone(),
            )
        })
        .collect();
    let pinned = pin_idx.into_iter().map(|i| entities[i].clone()).collect();
    Ok(KnowledgeGraph::new(entities, relations, triples, pinned))
}
