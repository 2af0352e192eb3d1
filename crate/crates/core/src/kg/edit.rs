//! Set-difference edit scripts between canonical graphs.
//!
//! Serialized form (all fields byte aligned):
//!
//! ```text
//! varint op count
//! per op: tag byte (3-bit tag 0..=5, zero padded), then operands
//!   0 add_entity   varint len + utf-8 label
//!   1 del_entity   varint entity index
//!   2 add_relation varint len + utf-8 label
//!   3 del_relation varint relation index
//!   4 add_triple   varint head, varint relation, varint tail
//!   5 del_triple   varint triple index
//! ```
//!
//! Indices refer to the source graph's canonical tables. A label (or triple)
//! that is not in the source table is referenced as `table length + k`,
//! where `k` counts the preceding additions of that kind in the script.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::bits::write_varint;
use crate::compressor::CodeLength;

use super::{KgError, KnowledgeGraph, Triple};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "snake_case")]
pub enum EditOp {
    AddEntity { label: String },
    DelEntity { label: String },
    AddRelation { label: String },
    DelRelation { label: String },
    AddTriple { triple: Triple },
    DelTriple { triple: Triple },
}

impl EditOp {
    pub fn tag(&self) -> u8 {
        match self {
            EditOp::AddEntity { .. } => 0,
            EditOp::DelEntity { .. } => 1,
            EditOp::AddRelation { .. } => 2,
            EditOp::DelRelation { .. } => 3,
            EditOp::AddTriple { .. } => 4,
            EditOp::DelTriple { .. } => 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct EditScript {
    pub ops: Vec<EditOp>,
}

impl EditScript {
    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Serializes against the tables of `source`.
    pub fn encode(&self, source: &KnowledgeGraph) -> Result<Vec<u8>, KgError> {
        let mut out = Vec::new();
        write_varint(&mut out, self.ops.len() as u64);

        let mut added_e: BTreeMap<&str, usize> = BTreeMap::new();
        let mut added_r: BTreeMap<&str, usize> = BTreeMap::new();
        let mut added_t: BTreeMap<&Triple, usize> = BTreeMap::new();
        let entity = |label: &str, added: &BTreeMap<&str, usize>| {
            source
                .entity_index(label)
                .or_else(|| added.get(label).map(|k| source.entities().len() + k))
        };
        let relation = |label: &str, added: &BTreeMap<&str, usize>| {
            source
                .relation_index(label)
                .or_else(|| added.get(label).map(|k| source.relations().len() + k))
        };

        for (index, op) in self.ops.iter().enumerate() {
            let unresolved = |what: &str| KgError::ScriptEncoding {
                index,
                reason: format!("{what} is neither in the source graph nor added earlier"),
            };
            out.push(op.tag());
            match op {
                EditOp::AddEntity { label } | EditOp::AddRelation { label } => {
                    write_varint(&mut out, label.len() as u64);
                    out.extend_from_slice(label.as_bytes());
                    let added = if op.tag() == 0 {
                        &mut added_e
                    } else {
                        &mut added_r
                    };
                    let next = added.len();
                    added.entry(label).or_insert(next);
                }
                EditOp::DelEntity { label } => {
                    let i = entity(label, &added_e).ok_or_else(|| unresolved(label))?;
                    write_varint(&mut out, i as u64);
                }
                EditOp::DelRelation { label } => {
                    let i = relation(label, &added_r).ok_or_else(|| unresolved(label))?;
                    write_varint(&mut out, i as u64);
                }
                EditOp::AddTriple { triple } => {
                    let h =
                        entity(&triple.head, &added_e).ok_or_else(|| unresolved(&triple.head))?;
                    let r = relation(&triple.relation, &added_r)
                        .ok_or_else(|| unresolved(&triple.relation))?;
                    let t =
                        entity(&triple.tail, &added_e).ok_or_else(|| unresolved(&triple.tail))?;
                    for v in [h, r, t] {
                        write_varint(&mut out, v as u64);
                    }
                    let next = added_t.len();
                    added_t.entry(triple).or_insert(next);
                }
                EditOp::DelTriple { triple } => {
                    let i = source
                        .triple_index(triple)
                        .or_else(|| added_t.get(triple).map(|k| source.triples().len() + k))
                        .ok_or_else(|| unresolved("triple"))?;
                    write_varint(&mut out, i as u64);
                }
            }
        }
        Ok(out)
    }
}

/// Exact serialized size of `script` in bits, relative to `source`.
pub fn script_codelength(
    script: &EditScript,
    source: &KnowledgeGraph,
) -> Result<CodeLength, KgError> {
    Ok(CodeLength::from(8 * script.encode(source)?.len() as u64))
}

/// The canonical set-difference script turning `a` into `b`: triple
/// deletions, then entity and relation deletions, then entity and relation
/// additions, then triple additions, each group in canonical order.
pub fn edit_script(a: &KnowledgeGraph, b: &KnowledgeGraph) -> EditScript {
    debug_assert!(a.is_canonical() && b.is_canonical());
    let minus = |x: &[String], y: &[String]| -> Vec<String> {
        x.iter()
            .filter(|l| y.binary_search(l).is_err())
            .cloned()
            .collect()
    };
    let minus_t = |x: &[Triple], y: &[Triple]| -> Vec<Triple> {
        x.iter()
            .filter(|t| y.binary_search(t).is_err())
            .cloned()
            .collect()
    };

    let mut ops = Vec::new();
    ops.extend(
        minus_t(a.triples(), b.triples())
            .into_iter()
            .map(|triple| EditOp::DelTriple { triple }),
    );
    ops.extend(
        minus(a.entities(), b.entities())
            .into_iter()
            .map(|label| EditOp::DelEntity { label }),
    );
    ops.extend(
        minus(a.relations(), b.relations())
            .into_iter()
            .map(|label| EditOp::DelRelation { label }),
    );
    ops.extend(
        minus(b.entities(), a.entities())
            .into_iter()
            .map(|label| EditOp::AddEntity { label }),
    );
    ops.extend(
        minus(b.relations(), a.relations())
            .into_iter()
            .map(|label| EditOp::AddRelation { label }),
    );
    ops.extend(
        minus_t(b.triples(), a.triples())
            .into_iter()
            .map(|triple| EditOp::AddTriple { triple }),
    );
    EditScript { ops }
}

/// Applies `script` to `a`. Entities left without triples become pinned;
/// a relation left unused is an error since no canonical graph can hold it.
pub fn apply(script: &EditScript, a: &KnowledgeGraph) -> Result<KnowledgeGraph, KgError> {
    let mut entities: BTreeSet<String> = a.entities().iter().cloned().collect();
    let mut relations: BTreeSet<String> = a.relations().iter().cloned().collect();
    let mut triples: BTreeSet<Triple> = a.triples().iter().cloned().collect();

    for (index, op) in script.ops.iter().enumerate() {
        let fail = |reason: String| Err(KgError::Apply { index, reason });
        match op {
            EditOp::AddEntity { label } => {
                if label.is_empty() {
                    return fail("empty entity label".into());
                }
                if !entities.insert(label.clone()) {
                    return fail(format!("entity {label:?} already exists"));
                }
            }
            EditOp::DelEntity { label } => {
                if triples.iter().any(|t| &t.head == label || &t.tail == label) {
                    return fail(format!("entity {label:?} is still referenced"));
                }
                if !entities.remove(label) {
                    return fail(format!("entity {label:?} does not exist"));
                }
            }
            EditOp::AddRelation { label } => {
                if label.is_empty() {
                    return fail("empty relation label".into());
                }
                if !relations.insert(label.clone()) {
                    return fail(format!("relation {label:?} already exists"));
                }
            }
            EditOp::DelRelation { label } => {
                if triples.iter().any(|t| &t.relation == label) {
                    return fail(format!("relation {label:?} is still referenced"));
                }
                if !relations.remove(label) {
                    return fail(format!("relation {label:?} does not exist"));
                }
            }
            EditOp::AddTriple { triple } => {
                if !entities.contains(&triple.head) || !entities.contains(&triple.tail) {
                    return fail(format!("triple {triple:?} references a missing entity"));
                }
                if !relations.contains(&triple.relation) {
                    return fail(format!("triple {triple:?} references a missing relation"));
                }
                if !triples.insert(triple.clone()) {
                    return fail(format!("triple {triple:?} already exists"));
                }
            }
            EditOp::DelTriple { triple } => {
                if !triples.remove(triple) {
                    return fail(format!("triple {triple:?} does not exist"));
                }
            }
        }
    }

    if let Some(r) = relations
        .iter()
        .find(|r| !triples.iter().any(|t| &t.relation == *r))
    {
        return Err(KgError::Apply {
            index: script.ops.len(),
            reason: format!("relation {r:?} is left unused"),
        });
    }
    let entities: Vec<String> = entities.into_iter().collect();
    KnowledgeGraph::new(
        entities.clone(),
        relations.into_iter().collect(),
        triples.into_iter().collect(),
        entities,
    )
    .canonicalize()
}

/// Elements learned after the novelty: entities and triples of the post graph.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct NovelMarks {
    pub entities: Vec<String>,
    pub triples: Vec<Triple>,
}

/// The post graph without the marked triples, the marked entities and every
/// triple touching a marked entity, re-canonicalized.
pub fn strip_novel(post: &KnowledgeGraph, marks: &NovelMarks) -> Result<KnowledgeGraph, KgError> {
    for e in &marks.entities {
        if post.entity_index(e).is_none() {
            return Err(KgError::MarkNotFound(format!("entity {e:?}")));
        }
    }
    for t in &marks.triples {
        if post.triple_index(t).is_none() {
            return Err(KgError::MarkNotFound(format!("triple {t:?}")));
        }
    }
    let gone: BTreeSet<&str> = marks.entities.iter().map(String::as_str).collect();
    let marked: BTreeSet<&Triple> = marks.triples.iter().collect();
    let keep = |label: &String| !gone.contains(label.as_str());
    let triples = post
        .triples()
        .iter()
        .filter(|t| !marked.contains(t))
        .filter(|t| keep(&t.head) && keep(&t.tail))
        .cloned()
        .collect();
    KnowledgeGraph::new(
        post.entities()
            .iter()
            .filter(|e| keep(e))
            .cloned()
            .collect(),
        post.relations().to_vec(),
        triples,
        post.pinned().iter().filter(|e| keep(e)).cloned().collect(),
    )
    .canonicalize()
}
