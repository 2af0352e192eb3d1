//! Adaptation metrics over compressed representations.
//!
//! All quantities are ratios of code lengths to `C(post)`, the compressed
//! size of the post-novelty solution:
//!
//! ```text
//! red  = C(post | pretr) / C(post)                 (min with the edit-script ratio for graphs)
//! pd   = 1 − C(post | pre) / C(post)
//! eeff = Σ_t max(0, C(post | s_{t−1}) − C(post | s_t)) / C(post)
//! aeff = red / (pd + eeff)
//! ```
//!
//! `red` and `pd` are clamped to `[0, 1]`. They are compression-based
//! approximations of generalization difficulty and priors, not the exact
//! algorithmic quantities.

mod aggregate;
mod experience;
mod report;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compressor::{compress_len, ByteSequence, CompressError, CompressorId};
use crate::infodist::cond_len;
use crate::kg::{edit_script, script_codelength, KgError, KnowledgeGraph};

pub use aggregate::{aggregate, Curriculum, TaskSpec, PROBABILITY_SLACK};
pub use experience::{experience_eff, ByteAppend, Experience, KgUnion, StateFold};
pub use report::{Aeff, AeffFlag, MetricReport, RedEstimators, TaskReport};

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("post-novelty encoding is empty")]
    EmptyPost,
    #[error("curriculum has no steps")]
    EmptyCurriculum,
    #[error("validation: {0}")]
    Validation(String),
    #[error(transparent)]
    Compress(#[from] CompressError),
    #[error(transparent)]
    Kg(#[from] KgError),
    #[error("state fold: {0}")]
    Fold(String),
}

/// Encodings of the agent before novelty, at training time, and of the
/// post-novelty solution.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AgentSnapshots {
    pub pre: ByteSequence,
    pub pretr: ByteSequence,
    pub post: ByteSequence,
}

impl AgentSnapshots {
    fn post_len(&self, c: &CompressorId) -> Result<f64, MetricError> {
        if self.post.is_empty() {
            return Err(MetricError::EmptyPost);
        }
        Ok(compress_len(&self.post, c)?.bits())
    }
}

fn unit(v: f64) -> f64 {
    v.clamp(0.0, 1.0)
}

/// Conditional estimator `C(post | pretr) / C(post)`, clamped.
pub fn red(s: &AgentSnapshots, c: &CompressorId) -> Result<f64, MetricError> {
    let whole = s.post_len(c)?;
    Ok(unit(cond_len(&s.post, &s.pretr, c)?.bits() / whole))
}

/// Both estimators for graph snapshots; `red` is their minimum.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RedEstimate {
    pub red: f64,
    pub conditional: f64,
    pub edit_script: Option<f64>,
}

/// [`red`] plus, when the graphs behind `pretr` and `post` are given, the
/// edit-script estimator `|script(pretr → post)| / C(post)`.
pub fn red_estimate(
    s: &AgentSnapshots,
    graphs: Option<(&KnowledgeGraph, &KnowledgeGraph)>,
    c: &CompressorId,
) -> Result<RedEstimate, MetricError> {
    let conditional = red(s, c)?;
    let edit = match graphs {
        Some((pretr, post)) => {
            let bits = script_codelength(&edit_script(pretr, post), pretr)?.bits();
            Some(unit(bits / s.post_len(c)?))
        }
        None => None,
    };
    Ok(RedEstimate {
        red: edit.map_or(conditional, |e| e.min(conditional)),
        conditional,
        edit_script: edit,
    })
}

/// `1 − C(post | pre) / C(post)`, clamped.
pub fn priors_pd(s: &AgentSnapshots, c: &CompressorId) -> Result<f64, MetricError> {
    let whole = s.post_len(c)?;
    Ok(unit(1.0 - cond_len(&s.post, &s.pre, c)?.bits() / whole))
}

/// Denominators below this count as zero.
pub const AEFF_EPSILON: f64 = 1e-9;

/// `red / (pd + eeff)` with degenerate denominators flagged.
pub fn adaptability_aeff(red: f64, pd: f64, eeff: f64) -> Aeff {
    let exposure = pd + eeff;
    if exposure < AEFF_EPSILON {
        if red > AEFF_EPSILON {
            Aeff::infinite()
        } else {
            Aeff::degenerate()
        }
    } else {
        Aeff::finite(red / exposure)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kg::{encode, Triple};

    /// Seeded random words from a small vocabulary.
    fn structured(n: usize) -> ByteSequence {
        use rand::{seq::IndexedRandom, SeedableRng};
        let words = [
            "alpha", "beta", "gamma", "delta", "omega", "sigma", "kappa", "theta",
        ];
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(1);
        let mut out = Vec::new();
        while out.len() < n {
            out.extend_from_slice(words.choose(&mut rng).unwrap().as_bytes());
            out.push(b' ');
        }
        ByteSequence::new(out)
    }

    #[test]
    fn endpoints_on_bytes() {
        let x = structured(2048);
        let c = CompressorId::Lz;
        let empty = AgentSnapshots {
            pre: ByteSequence::empty(),
            pretr: ByteSequence::empty(),
            post: x.clone(),
        };
        assert!(red(&empty, &c).unwrap() >= 0.9);
        assert!(priors_pd(&empty, &c).unwrap() <= 0.1);
        let same = AgentSnapshots {
            pre: x.clone(),
            pretr: x.clone(),
            post: x.clone(),
        };
        let r = red(&same, &c).unwrap();
        let p = priors_pd(&same, &c).unwrap();
        assert_eq!(r, 1.0 - p);
        // a second copy costs at least 17 bits per 18 bytes, so the ratio
        // cannot drop below (17/18)·|x| / C(x)
        let floor = 17.0 / 18.0 * x.len() as f64 / compress_len(&x, &c).unwrap().bits();
        assert!(r >= 0.95 * floor && r <= floor + 0.05, "{r} vs {floor}");
    }

    #[test]
    fn empty_post_rejected() {
        let s = AgentSnapshots::default();
        assert!(matches!(
            red(&s, &CompressorId::Lz),
            Err(MetricError::EmptyPost)
        ));
        assert!(matches!(
            priors_pd(&s, &CompressorId::Lz),
            Err(MetricError::EmptyPost)
        ));
    }

    #[test]
    fn identical_graphs_via_edit_script() {
        let g =
            KnowledgeGraph::from_triples((0..60).map(|i| {
                Triple::new(format!("node{i}"), "links", format!("node{}", (i * 7) % 60))
            }))
            .unwrap();
        let bytes = encode(&g).unwrap();
        let s = AgentSnapshots {
            pre: bytes.clone(),
            pretr: bytes.clone(),
            post: bytes,
        };
        let est = red_estimate(&s, Some((&g, &g)), &CompressorId::Lz).unwrap();
        assert!(est.red <= 0.1);
        assert!(est.red <= est.conditional);
        assert_eq!(Some(est.red), est.edit_script);
    }

    #[test]
    fn aeff_cases() {
        assert_eq!(adaptability_aeff(0.5, 0.5, 0.5), Aeff::finite(0.5));
        assert_eq!(adaptability_aeff(0.0, 0.3, 0.0), Aeff::finite(0.0));
        let inf = adaptability_aeff(0.8, 0.0, 0.0);
        assert!(inf.value.is_infinite());
        assert_eq!(inf.flag, Some(AeffFlag::Infinite));
        let deg = adaptability_aeff(0.0, 0.0, 0.0);
        assert_eq!(deg.value, 0.0);
        assert_eq!(deg.flag, Some(AeffFlag::Degenerate));
    }
}
