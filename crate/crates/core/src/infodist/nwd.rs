//! Normalized web distance over document-frequency counts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

/// The bundled 64-document toy corpus.
pub const TOY_CORPUS: &str = include_str!("../../data/toy_corpus.txt");

/// Document frequencies for terms and term pairs.
pub trait FrequencyProvider {
    /// Number of documents `N`.
    fn total_docs(&self) -> u64;
    /// Documents containing `term`.
    fn count(&self, term: &str) -> u64;
    /// Documents containing both terms. Symmetric.
    fn cocount(&self, a: &str, b: &str) -> u64;
}

#[derive(Debug, Error, PartialEq)]
pub enum NwdError {
    #[error("distance undefined: {0:?} occurs in no document")]
    UnseenTerm(String),
    #[error("distance undefined: {0:?} and {1:?} never co-occur")]
    NoCooccurrence(String, String),
    #[error("corpus has no documents")]
    EmptyCorpus,
}

/// Counts from an offline corpus: one document per non-blank line,
/// whitespace-separated terms, compared case-insensitively.
#[derive(Debug, Clone, Default)]
pub struct CorpusCounts {
    docs: u64,
    postings: BTreeMap<String, Vec<u32>>,
}

impl CorpusCounts {
    pub fn from_text(text: &str) -> Self {
        let mut postings: BTreeMap<String, Vec<u32>> = BTreeMap::new();
        let mut docs = 0u32;
        for line in text.lines().filter(|l| !l.trim().is_empty()) {
            let terms: BTreeSet<String> = line.split_whitespace().map(str::to_lowercase).collect();
            for term in terms {
                postings.entry(term).or_default().push(docs);
            }
            docs += 1;
        }
        Self {
            docs: docs as u64,
            postings,
        }
    }

    pub fn toy() -> Self {
        Self::from_text(TOY_CORPUS)
    }

    fn docs_with(&self, term: &str) -> &[u32] {
        self.postings
            .get(&term.to_lowercase())
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }
}

impl FrequencyProvider for CorpusCounts {
    fn total_docs(&self) -> u64 {
        self.docs
    }

    fn count(&self, term: &str) -> u64 {
        self.docs_with(term).len() as u64
    }

    fn cocount(&self, a: &str, b: &str) -> u64 {
        // both posting lists are sorted
        let (xs, ys) = (self.docs_with(a), self.docs_with(b));
        let (mut i, mut j, mut n) = (0, 0, 0);
        while i < xs.len() && j < ys.len() {
            match xs[i].cmp(&ys[j]) {
                std::cmp::Ordering::Less => i += 1,
                std::cmp::Ordering::Greater => j += 1,
                std::cmp::Ordering::Equal => {
                    n += 1;
                    i += 1;
                    j += 1;
                }
            }
        }
        n
    }
}

/// Shannon–Fano code length `−log2(count / N)`.
fn code_len(count: u64, total: u64) -> f64 {
    -libm::log2(count as f64 / total as f64)
}

/// `(G(x,y) − min(G(x), G(y))) / max(G(x), G(y))`.
///
/// Returns 0 when both terms occur in every document, since then all code
/// lengths vanish.
pub fn nwd(x: &str, y: &str, p: &impl FrequencyProvider) -> Result<f64, NwdError> {
    let n = p.total_docs();
    if n == 0 {
        return Err(NwdError::EmptyCorpus);
    }
    let (fx, fy) = (p.count(x), p.count(y));
    if fx == 0 {
        return Err(NwdError::UnseenTerm(x.to_string()));
    }
    if fy == 0 {
        return Err(NwdError::UnseenTerm(y.to_string()));
    }
    let fxy = p.cocount(x, y);
    if fxy == 0 {
        return Err(NwdError::NoCooccurrence(x.to_string(), y.to_string()));
    }
    let (gx, gy, gxy) = (code_len(fx, n), code_len(fy, n), code_len(fxy, n));
    let hi = gx.max(gy);
    if hi == 0.0 {
        return Ok(0.0);
    }
    Ok(((gxy - gx.min(gy)) / hi).max(0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn toy_corpus_counts() {
        let p = CorpusCounts::toy();
        assert_eq!(p.total_docs(), 64);
        assert_eq!(p.count("fried"), 8);
        assert_eq!(p.count("Chicken"), 8);
        assert_eq!(p.cocount("fried", "chicken"), 4);
        assert_eq!(p.cocount("chicken", "fried"), 4);
    }

    #[test]
    fn fried_chicken() {
        // G = 3, 3 and G(xy) = 4
        let d = nwd("fried", "chicken", &CorpusCounts::toy()).unwrap();
        assert!((d - 1.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn self_distance_is_zero() {
        assert_eq!(
            nwd("feather", "feather", &CorpusCounts::toy()).unwrap(),
            0.0
        );
    }

    #[test]
    fn triangle_inequality_fails() {
        let p = CorpusCounts::toy();
        let ab = nwd("fried", "chicken", &p).unwrap();
        let bc = nwd("chicken", "feather", &p).unwrap();
        let ac = nwd("fried", "feather", &p).unwrap();
        assert!(ab + bc < ac, "{ab} + {bc} vs {ac}");
    }

    #[test]
    fn undefined_cases() {
        let p = CorpusCounts::toy();
        assert_eq!(
            nwd("fried", "zeppelin", &p),
            Err(NwdError::UnseenTerm("zeppelin".into()))
        );
        assert!(matches!(
            nwd("fried", "galaxies", &p),
            Err(NwdError::NoCooccurrence(..))
        ));
        assert_eq!(
            nwd("a", "b", &CorpusCounts::from_text("\n\n")),
            Err(NwdError::EmptyCorpus)
        );
    }
}
