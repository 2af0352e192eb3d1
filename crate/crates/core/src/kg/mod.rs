//! Knowledge graphs of labeled triples, their canonical binary encoding and
//! set-difference edit scripts.
//!
//! A graph is *canonical* when
//!
//! * entity and relation labels are non-empty, unique and sorted bytewise,
//! * every triple references declared labels and triples are unique and sorted,
//! * every relation is used by some triple,
//! * the pin list is exactly the set of entities no triple references.
//!
//! Pins are how a graph keeps an isolated concept; a pin on an entity that
//! a triple already references carries no information and is dropped.

mod codec;
mod edit;
mod text;

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use codec::{decode, encode};
pub use edit::{
    apply, edit_script, script_codelength, strip_novel, EditOp, EditScript, NovelMarks,
};
pub use text::{parse_tsv, to_tsv};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub head: String,
    pub relation: String,
    pub tail: String,
}

impl Triple {
    pub fn new(
        head: impl Into<String>,
        relation: impl Into<String>,
        tail: impl Into<String>,
    ) -> Self {
        Self {
            head: head.into(),
            relation: relation.into(),
            tail: tail.into(),
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum KgError {
    #[error("empty {0} label")]
    EmptyLabel(&'static str),
    #[error("triple {0:?} references undeclared entity {1:?}")]
    UndeclaredEntity(Triple, String),
    #[error("triple {0:?} references undeclared relation {1:?}")]
    UndeclaredRelation(Triple, String),
    #[error("pin references undeclared entity {0:?}")]
    UndeclaredPin(String),
    #[error("graph is not canonical; canonicalize it first")]
    NotCanonical,
    #[error("parse error at byte {offset}: {reason}")]
    Decode { offset: usize, reason: String },
    #[error("line {line}: {reason}")]
    Text { line: usize, reason: String },
    #[error("edit operation {index}: {reason}")]
    Apply { index: usize, reason: String },
    #[error("cannot serialize edit operation {index}: {reason}")]
    ScriptEncoding { index: usize, reason: String },
    #[error("novelty mark references {0} which is not in the graph")]
    MarkNotFound(String),
}

/// Entities, relations, pins and triples. Possibly non-canonical; see
/// [`KnowledgeGraph::canonicalize`].
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct KnowledgeGraph {
    entities: Vec<String>,
    relations: Vec<String>,
    pinned: Vec<String>,
    triples: Vec<Triple>,
}

impl KnowledgeGraph {
    /// Raw, unvalidated graph.
    pub fn new(
        entities: Vec<String>,
        relations: Vec<String>,
        triples: Vec<Triple>,
        pinned: Vec<String>,
    ) -> Self {
        Self {
            entities,
            relations,
            pinned,
            triples,
        }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    /// Canonical graph declaring exactly the labels its triples use.
    pub fn from_triples(triples: impl IntoIterator<Item = Triple>) -> Result<Self, KgError> {
        let triples: Vec<Triple> = triples.into_iter().collect();
        let entities = triples
            .iter()
            .flat_map(|t| [t.head.clone(), t.tail.clone()])
            .collect();
        let relations = triples.iter().map(|t| t.relation.clone()).collect();
        Self::new(entities, relations, triples, Vec::new()).canonicalize()
    }

    pub fn entities(&self) -> &[String] {
        &self.entities
    }

    pub fn relations(&self) -> &[String] {
        &self.relations
    }

    pub fn pinned(&self) -> &[String] {
        &self.pinned
    }

    pub fn triples(&self) -> &[Triple] {
        &self.triples
    }

    pub fn is_empty(&self) -> bool {
        self.entities.is_empty() && self.relations.is_empty() && self.triples.is_empty()
    }

    pub fn entity_index(&self, label: &str) -> Option<usize> {
        self.entities
            .binary_search_by(|e| e.as_str().cmp(label))
            .ok()
    }

    pub fn relation_index(&self, label: &str) -> Option<usize> {
        self.relations
            .binary_search_by(|r| r.as_str().cmp(label))
            .ok()
    }

    pub fn triple_index(&self, t: &Triple) -> Option<usize> {
        self.triples.binary_search(t).ok()
    }

    /// Removes duplicates, unused relations and unpinned isolated entities,
    /// then sorts everything. Idempotent.
    pub fn canonicalize(&self) -> Result<KnowledgeGraph, KgError> {
        if self.entities.iter().any(String::is_empty) {
            return Err(KgError::EmptyLabel("entity"));
        }
        if self.relations.iter().any(String::is_empty) {
            return Err(KgError::EmptyLabel("relation"));
        }
        let declared_e: BTreeSet<&str> = self.entities.iter().map(String::as_str).collect();
        let declared_r: BTreeSet<&str> = self.relations.iter().map(String::as_str).collect();
        for t in &self.triples {
            for e in [&t.head, &t.tail] {
                if !declared_e.contains(e.as_str()) {
                    return Err(KgError::UndeclaredEntity(t.clone(), e.clone()));
                }
            }
            if !declared_r.contains(t.relation.as_str()) {
                return Err(KgError::UndeclaredRelation(t.clone(), t.relation.clone()));
            }
        }
        for p in &self.pinned {
            if !declared_e.contains(p.as_str()) {
                return Err(KgError::UndeclaredPin(p.clone()));
            }
        }

        let triples: BTreeSet<Triple> = self.triples.iter().cloned().collect();
        let used_e: BTreeSet<&str> = triples
            .iter()
            .flat_map(|t| [t.head.as_str(), t.tail.as_str()])
            .collect();
        let used_r: BTreeSet<&str> = triples.iter().map(|t| t.relation.as_str()).collect();
        let pinned: BTreeSet<&str> = self
            .pinned
            .iter()
            .map(String::as_str)
            .filter(|p| !used_e.contains(p))
            .collect();
        let entities: BTreeSet<&str> = used_e.union(&pinned).copied().collect();

        Ok(KnowledgeGraph {
            entities: entities.into_iter().map(str::to_string).collect(),
            relations: used_r.into_iter().map(str::to_string).collect(),
            pinned: pinned.into_iter().map(str::to_string).collect(),
            triples: triples.into_iter().collect(),
        })
    }

    pub fn is_canonical(&self) -> bool {
        self.canonicalize().is_ok_and(|c| &c == self)
    }

    /// Canonical union of two graphs; pins of either side survive only while
    /// the entity stays isolated.
    pub fn union(&self, other: &KnowledgeGraph) -> Result<KnowledgeGraph, KgError> {
        let cat = |a: &[String], b: &[String]| a.iter().chain(b).cloned().collect::<Vec<_>>();
        KnowledgeGraph::new(
            cat(&self.entities, &other.entities),
            cat(&self.relations, &other.relations),
            self.triples.iter().chain(&other.triples).cloned().collect(),
            cat(&self.pinned, &other.pinned),
        )
        .canonicalize()
    }
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;
    use rand::{seq::IndexedRandom, Rng};

    /// Random canonical graph over a small label pool, with occasional pins.
    pub fn random_graph(
        rng: &mut impl Rng,
        max_triples: usize,
        entity_pool: usize,
        relation_pool: usize,
    ) -> KnowledgeGraph {
        let n = rng.random_range(0..=max_triples);
        let ents: Vec<String> = (0..entity_pool).map(|i| format!("e{i}")).collect();
        let rels: Vec<String> = (0..relation_pool).map(|i| format!("r{i}")).collect();
        let triples: Vec<Triple> = (0..n)
            .map(|_| {
                Triple::new(
                    ents.choose(rng).unwrap().clone(),
                    rels.choose(rng).unwrap().clone(),
                    ents.choose(rng).unwrap().clone(),
                )
            })
            .collect();
        let pins: Vec<String> = ents
            .iter()
            .filter(|_| rng.random_bool(0.15))
            .cloned()
            .collect();
        KnowledgeGraph::new(ents.clone(), rels, triples, pins)
            .canonicalize()
            .unwrap()
    }
}
