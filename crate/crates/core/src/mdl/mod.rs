//! Two-part MDL regression.
//!
//! A hypothesis is a function family, a list of fixed-point coefficients and
//! a noise level; the data are residuals coded under a discretized Gaussian.
//! [`fit_family`] picks the term count minimizing `L(H) + L(D|H)`.
//!
//! Fixed point: values live on the grid `δ = 2⁻¹⁰` and are stored as 26-bit
//! sign-magnitude words (1 sign, 15 integer, 10 fraction bits), so
//! `L(H) = 8 + 8 + 26·k + 26` bits.

mod codec;
mod dataset;
mod gauss;

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compressor::CodeLength;

pub use codec::{decode_hypothesis, encode_hypothesis};
pub use dataset::{Dataset, DEFAULT_EPSILON};
pub use gauss::{residual_bits, POINT_CAP_BITS};

/// Quantization step shared by coefficients and σ.
pub const GRID: f64 = 1.0 / 1024.0;
/// Bits per fixed-point word.
pub const WORD_BITS: u32 = 26;
/// Largest representable magnitude in grid units.
pub const MAX_CODE: i64 = (1 << (WORD_BITS - 1)) - 1;
/// Term counts are stored in one byte.
pub const MAX_TERMS: usize = 255;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MdlError {
    #[error("invalid dataset: {0}")]
    Dataset(String),
    #[error("need at least {need} points for {max_terms} terms, got {got}")]
    TooFewPoints {
        need: usize,
        got: usize,
        max_terms: usize,
    },
    #[error("term count must be in 1..={MAX_TERMS}, got {0}")]
    TermCount(usize),
    #[error("degenerate design matrix for k={k}: only {distinct} distinct x values")]
    Degenerate { k: usize, distinct: usize },
    #[error("invalid hypothesis: {0}")]
    Hypothesis(String),
    #[error("hypothesis decode failed: {0}")]
    Decode(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Family {
    /// `1, x, x², …`
    Polynomial,
    /// `1, sin x, cos x, sin 2x, cos 2x, …`
    Fourier,
}

impl Family {
    pub fn tag(self) -> u8 {
        match self {
            Family::Polynomial => 0,
            Family::Fourier => 1,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Family::Polynomial),
            1 => Some(Family::Fourier),
            _ => None,
        }
    }

    /// The `j`-th basis function (0-based) at `x`.
    pub fn basis(self, j: usize, x: f64) -> f64 {
        match self {
            Family::Polynomial => libm::pow(x, j as f64),
            Family::Fourier if j == 0 => 1.0,
            Family::Fourier => {
                let freq = j.div_ceil(2) as f64;
                if j % 2 == 1 {
                    libm::sin(freq * x)
                } else {
                    libm::cos(freq * x)
                }
            }
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Polynomial => "polynomial",
            Family::Fourier => "fourier",
        })
    }
}

impl FromStr for Family {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "polynomial" | "poly" => Ok(Family::Polynomial),
            "fourier" | "sine" => Ok(Family::Fourier),
            _ => Err(format!(
                "unknown family {s:?} (expected polynomial or fourier)"
            )),
        }
    }
}

/// Nearest grid code to `v`, ties to even, saturating at the word range.
pub fn quantize(v: f64) -> i64 {
    (v / GRID)
        .round_ties_even()
        .clamp(-MAX_CODE as f64, MAX_CODE as f64) as i64
}

/// A fitted model with its parameters on the fixed-point grid.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "HypothesisRecord", into = "HypothesisRecord")]
pub struct PointHypothesis {
    family: Family,
    coefficients: Vec<i64>,
    sigma: i64,
}

impl PointHypothesis {
    /// Quantizes `coefficients` and `sigma` onto the grid; σ is floored at δ.
    pub fn new(family: Family, coefficients: &[f64], sigma: f64) -> Result<Self, MdlError> {
        if coefficients.iter().chain([&sigma]).any(|v| !v.is_finite()) {
            return Err(MdlError::Hypothesis("non-finite parameter".into()));
        }
        if sigma < 0.0 {
            return Err(MdlError::Hypothesis(format!("negative sigma {sigma}")));
        }
        let codes = coefficients.iter().map(|&c| quantize(c)).collect();
        Self::from_codes(family, codes, quantize(sigma).max(1))
    }

    /// Builds a hypothesis from raw grid codes.
    pub fn from_codes(
        family: Family,
        coefficients: Vec<i64>,
        sigma: i64,
    ) -> Result<Self, MdlError> {
        let k = coefficients.len();
        if !(1..=MAX_TERMS).contains(&k) {
            return Err(MdlError::TermCount(k));
        }
        if let Some(c) = coefficients.iter().find(|c| c.abs() > MAX_CODE) {
            return Err(MdlError::Hypothesis(format!(
                "coefficient code {c} out of range"
            )));
        }
        if !(1..=MAX_CODE).contains(&sigma) {
            return Err(MdlError::Hypothesis(format!(
                "sigma code {sigma} out of range"
            )));
        }
        Ok(Self {
            family,
            coefficients,
            sigma,
        })
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn term_count(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficient_codes(&self) -> &[i64] {
        &self.coefficients
    }

    pub fn sigma_code(&self) -> i64 {
        self.sigma
    }

    pub fn coefficients(&self) -> Vec<f64> {
        self.coefficients.iter().map(|&c| c as f64 * GRID).collect()
    }

    pub fn sigma(&self) -> f64 {
        self.sigma as f64 * GRID
    }
}

#[derive(Serialize, Deserialize)]
struct HypothesisRecord {
    family: Family,
    k: usize,
    coefficients: Vec<f64>,
    sigma: f64,
}

impl From<PointHypothesis> for HypothesisRecord {
    fn from(h: PointHypothesis) -> Self {
        Self {
            family: h.family,
            k: h.term_count(),
            coefficients: h.coefficients(),
            sigma: h.sigma(),
        }
    }
}

impl TryFrom<HypothesisRecord> for PointHypothesis {
    type Error = MdlError;
    fn try_from(r: HypothesisRecord) -> Result<Self, MdlError> {
        if r.k != r.coefficients.len() {
            return Err(MdlError::Hypothesis(format!(
                "k = {} but {} coefficients given",
                r.k,
                r.coefficients.len()
            )));
        }
        let h = PointHypothesis::new(r.family, &r.coefficients, r.sigma)?;
        if h.coefficients() != r.coefficients || h.sigma() != r.sigma {
            return Err(MdlError::Hypothesis(
                "parameters are not on the 2^-10 grid".into(),
            ));
        }
        Ok(h)
    }
}

/// Basis expansion dotted with the dequantized coefficients.
pub fn predict(h: &PointHypothesis, x: f64) -> f64 {
    let c = h.coefficients();
    match h.family {
        Family::Polynomial => c.iter().rev().fold(0.0, |acc, &cj| acc * x + cj),
        Family::Fourier => c
            .iter()
            .enumerate()
            .map(|(j, &cj)| cj * Family::Fourier.basis(j, x))
            .sum(),
    }
}

/// `L(H)`: family tag, term count, k coefficients and σ.
pub fn hypothesis_codelength(h: &PointHypothesis) -> CodeLength {
    CodeLength::from(8 + 8 + WORD_BITS as u64 * (h.term_count() as u64 + 1))
}

/// Cost of one observation under `h`.
pub fn point_codelength(h: &PointHypothesis, x: f64, y: f64, epsilon: f64) -> f64 {
    residual_bits(y - predict(h, x), h.sigma(), epsilon)
}

/// `L(D|H)`: summed residual costs at the dataset's precision.
pub fn data_codelength(h: &PointHypothesis, d: &Dataset) -> CodeLength {
    let bits = d
        .points()
        .iter()
        .map(|&(x, y)| point_codelength(h, x, y, d.epsilon()))
        .sum::<f64>();
    CodeLength::from_bits(bits)
}

/// One fitted term count with its two-part code length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub hypothesis: PointHypothesis,
    #[serde(rename = "L_H")]
    pub l_h: CodeLength,
    #[serde(rename = "L_D")]
    pub l_d: CodeLength,
}

impl Candidate {
    pub fn total(&self) -> CodeLength {
        self.l_h + self.l_d
    }
}

/// Least-squares fit of the first `k` basis functions, quantized, with σ
/// set to the RMS residual of the quantized model.
pub fn fit_candidate(d: &Dataset, family: Family, k: usize) -> Result<Candidate, MdlError> {
    if !(1..=MAX_TERMS).contains(&k) {
        return Err(MdlError::TermCount(k));
    }
    let distinct = d.distinct_x();
    if distinct < k {
        return Err(MdlError::Degenerate { k, distinct });
    }
    let pts = d.points();
    let design = DMatrix::from_fn(pts.len(), k, |i, j| family.basis(j, pts[i].0));
    let target = DVector::from_iterator(pts.len(), pts.iter().map(|p| p.1));
    let svd = design.svd(true, true);
    let cutoff = svd.singular_values.max() * pts.len().max(k) as f64 * f64::EPSILON;
    let beta = svd
        .solve(&target, cutoff)
        .map_err(|e| MdlError::Hypothesis(format!("least squares for k={k}: {e}")))?;

    let coarse = PointHypothesis::new(family, beta.as_slice(), 0.0)?;
    let sse: f64 = pts
        .iter()
        .map(|&(x, y)| (y - predict(&coarse, x)).powi(2))
        .sum();
    let sigma = (sse / pts.len() as f64).sqrt();
    let hypothesis =
        PointHypothesis::from_codes(family, coarse.coefficients, quantize(sigma).max(1))?;
    Ok(Candidate {
        l_h: hypothesis_codelength(&hypothesis),
        l_d: data_codelength(&hypothesis, d),
        hypothesis,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermTotal {
    pub k: usize,
    pub total: CodeLength,
}

/// The selected hypothesis and the totals of every candidate searched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    #[serde(flatten)]
    pub hypothesis: PointHypothesis,
    #[serde(rename = "L_H")]
    pub l_h: CodeLength,
    #[serde(rename = "L_D")]
    pub l_d: CodeLength,
    pub total: CodeLength,
    pub per_k_totals: Vec<TermTotal>,
}

/// Fits `k = 1..=max_terms` and keeps the smallest total; ties go to the
/// smaller `k`.
pub fn fit_family(d: &Dataset, family: Family, max_terms: usize) -> Result<FitReport, MdlError> {
    if !(1..=MAX_TERMS).contains(&max_terms) {
        return Err(MdlError::TermCount(max_terms));
    }
    if d.len() < max_terms + 1 {
        return Err(MdlError::TooFewPoints {
            need: max_terms + 1,
            got: d.len(),
            max_terms,
        });
    }
    let candidates = (1..=max_terms)
        .map(|k| fit_candidate(d, family, k))
        .collect::<Result<Vec<_>, _>>()?;
    let best = candidates
        .iter()
        .reduce(|best, c| if c.total() < best.total() { c } else { best })
        .expect("max_terms >= 1");
    Ok(FitReport {
        hypothesis: best.hypothesis.clone(),
        l_h: best.l_h,
        l_d: best.l_d,
        total: best.total(),
        per_k_totals: candidates
            .iter()
            .map(|c| TermTotal {
                k: c.hypothesis.term_count(),
                total: c.total(),
            })
            .collect(),
    })
}


#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;
    use proptest::prelude::*;

    fn poly(c: &[f64]) -> PointHypothesis {
        PointHypothesis::new(Family::Polynomial, c, 0.1).unwrap()
    }

    #[test]
    fn hypothesis_lengths() {
        assert_eq!(hypothesis_codelength(&poly(&[1.0])).bits(), 68.0);
        assert_eq!(hypothesis_codelength(&poly(&[1.0, 2.0, 3.0])).bits(), 120.0);
        let mut prev = 0.0;
        for k in 1..=20 {
            let b = hypothesis_codelength(&poly(&vec![0.5; k])).bits();
            assert_eq!(b - prev, if k == 1 { 68.0 } else { 26.0 });
            prev = b;
        }
    }

    #[test]
    fn predict_examples() {
        let h = poly(&[2.0, 7.0, 3.0]);
        assert_eq!(predict(&h, 0.0), 2.0);
        assert_eq!(predict(&h, 1.0), 12.0);
        let f = PointHypothesis::new(
            Family::Fourier,
            &[1.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 2.0],
            0.1,
        )
        .unwrap();
        let x = 0.3;
        assert!((predict(&f, x) - (1.0 + 2.0 * (4.0 * x).sin())).abs() < 1e-12);
    }

    #[test]
    fn fourier_basis_order() {
        let x = 0.7f64;
        let want = [
            1.0,
            x.sin(),
            x.cos(),
            (2.0 * x).sin(),
            (2.0 * x).cos(),
            (3.0 * x).sin(),
        ];
        for (j, w) in want.iter().enumerate() {
            assert!((Family::Fourier.basis(j, x) - w).abs() < 1e-15);
        }
    }

    #[test]
    fn quantization_error_bound() {
        let mut rng = <rand_chacha::ChaCha8Rng as rand::SeedableRng>::seed_from_u64(8);
        for _ in 0..200 {
            let k = rand::Rng::random_range(&mut rng, 1..=8);
            let exact: Vec<f64> = (0..k)
                .map(|_| rand::Rng::random_range(&mut rng, -50.0..50.0))
                .collect();
            let h = poly(&exact);
            for i in 0..=100 {
                let x = -1.0 + i as f64 * 0.02;
                let want: f64 = exact
                    .iter()
                    .enumerate()
                    .map(|(j, c)| c * x.powi(j as i32))
                    .sum();
                let bound = GRID * k as f64 * 1f64.max(x.abs().powi(k - 1));
                assert!((predict(&h, x) - want).abs() <= bound);
            }
        }
    }

    #[test]
    fn constant_data() {
        let d = Dataset::new(
            (0..30).map(|i| (i as f64 / 10.0, 5.0)).collect(),
            DEFAULT_EPSILON,
        )
        .unwrap();
        let r = fit_family(&d, Family::Polynomial, 4).unwrap();
        assert_eq!(r.hypothesis.term_count(), 1);
        assert_eq!(r.hypothesis.coefficients(), vec![5.0]);
        assert_eq!(r.hypothesis.sigma(), GRID);
    }

    #[test]
    fn zero_residual_cost_constant() {
        let h = PointHypothesis::new(Family::Polynomial, &[0.0], 0.0).unwrap();
        assert_eq!(h.sigma(), GRID);
        let d = Dataset::new(vec![(0.0, 0.0), (1.0, 0.0)], DEFAULT_EPSILON).unwrap();
        let per_point = data_codelength(&h, &d).bits() / 2.0;
        assert!((per_point - 0.067_183_296_128_783_49).abs() < 1e-6);
    }

    #[test]
    fn outlier_is_capped() {
        let h = poly(&[0.0]);
        let d = Dataset::new(vec![(0.0, 100.0 * h.sigma())], DEFAULT_EPSILON).unwrap();
        assert_eq!(data_codelength(&h, &d).bits(), POINT_CAP_BITS);
    }

    #[test]
    fn quadratic_recovery() {
        let d = sample(1, 200, -1.0, 1.0, 0.1, quadratic);
        let r = fit_family(&d, Family::Polynomial, 8).unwrap();
        assert_eq!(r.hypothesis.term_count(), 3);
        for (got, want) in r.hypothesis.coefficients().iter().zip([2.0, 7.0, 3.0]) {
            assert!((got - want).abs() < 0.1, "{got} vs {want}");
        }
        assert_eq!(r.total, r.l_h + r.l_d);
        assert_eq!(r.per_k_totals.len(), 8);
        assert!(r.per_k_totals.iter().all(|t| r.total <= t.total));
    }

    #[test]
    fn perfect_fit_candidate_costs_more() {
        let d = sample(2, 200, -1.0, 1.0, 0.1, quadratic);
        let selected = fit_family(&d, Family::Polynomial, 8).unwrap();
        let full = fit_candidate(&d, Family::Polynomial, d.len() - 1).unwrap();
        assert!(
            full.total() > selected.total,
            "{:?} vs {:?}",
            full.total(),
            selected.total
        );
    }

    #[test]
    fn degenerate_design_names_k() {
        let d = Dataset::new(
            vec![(1.0, 1.0), (1.0, 2.0), (2.0, 0.0), (2.0, 1.0), (2.0, 3.0)],
            DEFAULT_EPSILON,
        )
        .unwrap();
        assert!(fit_candidate(&d, Family::Polynomial, 2).is_ok());
        assert_eq!(
            fit_family(&d, Family::Polynomial, 3),
            Err(MdlError::Degenerate { k: 3, distinct: 2 })
        );
        assert!(matches!(
            fit_family(&d, Family::Polynomial, 5),
            Err(MdlError::TooFewPoints {
                need: 6,
                got: 5,
                ..
            })
        ));
    }

    #[test]
    fn refitting_sigma_after_well_explained_point() {
        for seed in 0..10 {
            let d = sample(100 + seed, 20, -1.0, 1.0, 0.1, quadratic);
            let h = fit_candidate(&d, Family::Polynomial, 3).unwrap().hypothesis;
            let mut pts = d.points().to_vec();
            pts.push((0.25, predict(&h, 0.25)));
            let grown = Dataset::new(pts, d.epsilon()).unwrap();
            let sse: f64 = grown
                .points()
                .iter()
                .map(|&(x, y)| (y - predict(&h, x)).powi(2))
                .sum();
            let refit = PointHypothesis::from_codes(
                h.family(),
                h.coefficient_codes().to_vec(),
                quantize((sse / grown.len() as f64).sqrt()).max(1),
            )
            .unwrap();
            assert!(data_codelength(&refit, &grown) <= data_codelength(&h, &grown));
        }
    }

    #[test]
    fn outlier_raises_total_by_at_least_100_bits() {
        let d = sample(5, 200, -1.0, 1.0, 0.1, quadratic);
        let before = fit_candidate(&d, Family::Polynomial, 3).unwrap();
        let mut pts = d.points().to_vec();
        pts.push((0.0, 2.0 + 100.0 * 0.1));
        let grown = Dataset::new(pts, d.epsilon()).unwrap();
        let fixed = data_codelength(&before.hypothesis, &grown).bits() - before.l_d.bits();
        assert!(fixed >= 100.0, "{fixed}");
        let refit = fit_candidate(&grown, Family::Polynomial, 3).unwrap();
        assert!(refit.total().bits() - before.total().bits() >= 100.0);
    }

    #[test]
    fn report_json_fields() {
        let d = sample(4, 50, -1.0, 1.0, 0.1, quadratic);
        let r = fit_family(&d, Family::Polynomial, 4).unwrap();
        let v = serde_json::to_value(&r).unwrap();
        for key in [
            "family",
            "k",
            "coefficients",
            "sigma",
            "L_H",
            "L_D",
            "total",
            "per_k_totals",
        ] {
            assert!(v.get(key).is_some(), "missing {key}");
        }
        let back: FitReport = serde_json::from_value(v).unwrap();
        assert_eq!(back, r);
    }

    #[test]
    fn off_grid_json_rejected() {
        let v = serde_json::json!({"family": "polynomial", "k": 1, "coefficients": [0.1], "sigma": 0.5});
        assert!(serde_json::from_value::<PointHypothesis>(v).is_err());
    }

    proptest! {
        #[test]
        fn per_k_independent_of_search_order(seed in 0u64..1000) {
            let d = sample(seed, 40, -1.0, 1.0, 0.2, |x| x.sin() * 3.0);
            let report = fit_family(&d, Family::Fourier, 5).unwrap();
            for t in report.per_k_totals.iter().rev() {
                prop_assert_eq!(fit_candidate(&d, Family::Fourier, t.k).unwrap().total(), t.total);
            }
        }
    }
}
