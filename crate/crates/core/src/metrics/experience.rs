use crate::compressor::{compress_len, ByteSequence, CompressorId};
use crate::infodist::cond_len;
use crate::kg::{self, KnowledgeGraph};

use super::{Curriculum, MetricError};

/// How an agent's state absorbs one curriculum step.
pub trait StateFold {
    type State: Clone;

    /// The state's representation as seen by the compressor.
    fn encode(&self, state: &Self::State) -> Result<ByteSequence, MetricError>;

    fn fold(&self, state: &Self::State, step: &ByteSequence) -> Result<Self::State, MetricError>;
}

/// State is raw bytes; each step is appended after a 0x00 separator.
#[derive(Debug, Clone, Copy, Default)]
pub struct ByteAppend;

impl StateFold for ByteAppend {
    type State = ByteSequence;

    fn encode(&self, state: &ByteSequence) -> Result<ByteSequence, MetricError> {
        Ok(state.clone())
    }

    fn fold(&self, state: &ByteSequence, step: &ByteSequence) -> Result<ByteSequence, MetricError> {
        Ok(if state.is_empty() {
            step.clone()
        } else {
            state.framed_concat(step)
        })
    }
}

/// State is a graph; each step is a graph encoding merged by union.
#[derive(Debug, Clone, Copy, Default)]
pub struct KgUnion;

impl StateFold for KgUnion {
    type State = KnowledgeGraph;

    fn encode(&self, state: &KnowledgeGraph) -> Result<ByteSequence, MetricError> {
        Ok(kg::encode(state)?)
    }

    fn fold(
        &self,
        state: &KnowledgeGraph,
        step: &ByteSequence,
    ) -> Result<KnowledgeGraph, MetricError> {
        Ok(state.union(&kg::decode(step.as_bytes())?)?)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Experience {
    pub eeff: f64,
    /// Per-step gains, normalized by `C(post)`; they sum to `eeff`.
    pub steps: Vec<f64>,
}

/// Accumulated drop in `C(post | state)` as the state absorbs the
/// curriculum, starting from `initial`.
pub fn experience_eff<F: StateFold>(
    post: &ByteSequence,
    curriculum: &Curriculum,
    fold: &F,
    initial: &F::State,
    c: &CompressorId,
) -> Result<Experience, MetricError> {
    if curriculum.steps.is_empty() {
        return Err(MetricError::EmptyCurriculum);
    }
    if post.is_empty() {
        return Err(MetricError::EmptyPost);
    }
    let whole = compress_len(post, c)?.bits();
    let mut state = initial.clone();
    let mut before = cond_len(post, &fold.encode(&state)?, c)?.bits();
    let mut steps = Vec::with_capacity(curriculum.steps.len());
    for step in &curriculum.steps {
        state = fold.fold(&state, step)?;
        let after = cond_len(post, &fold.encode(&state)?, c)?.bits();
        steps.push((before - after).max(0.0) / whole);
        before = after;
    }
    Ok(Experience {
        eeff: steps.iter().sum(),
        steps,
    })
}
