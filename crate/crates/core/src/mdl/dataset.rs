use std::io::Read;

use serde::Deserialize;

use super::MdlError;

/// Default observation precision `ε = 2⁻⁸`.
pub const DEFAULT_EPSILON: f64 = 1.0 / 256.0;

/// Observed `(x, y)` pairs and the precision they were recorded at.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    points: Vec<(f64, f64)>,
    epsilon: f64,
}

#[derive(Deserialize)]
struct Row {
    x: f64,
    y: f64,
}

impl Dataset {
    pub fn new(points: Vec<(f64, f64)>, epsilon: f64) -> Result<Self, MdlError> {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(MdlError::Dataset(format!(
                "precision must be positive, got {epsilon}"
            )));
        }
        if let Some(i) = points
            .iter()
            .position(|(x, y)| !x.is_finite() || !y.is_finite())
        {
            return Err(MdlError::Dataset(format!("point {i} is not finite")));
        }
        Ok(Self { points, epsilon })
    }

    /// Reads CSV with an `x,y` header.
    pub fn from_csv(reader: impl Read, epsilon: f64) -> Result<Self, MdlError> {
        let mut r = csv::Reader::from_reader(reader);
        let headers = r.headers().map_err(|e| MdlError::Dataset(e.to_string()))?;
        if headers.iter().map(str::trim).collect::<Vec<_>>() != ["x", "y"] {
            return Err(MdlError::Dataset(format!(
                "expected header x,y, got {:?}",
                headers.as_slice()
            )));
        }
        let points = r
            .deserialize::<Row>()
            .map(|row| row.map(|Row { x, y }| (x, y)))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| MdlError::Dataset(e.to_string()))?;
        Self::new(points, epsilon)
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::from("x,y\n");
        for (x, y) in &self.points {
            out.push_str(&format!("{x},{y}\n"));
        }
        out
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn x_range(&self) -> Option<(f64, f64)> {
        let mut xs = self.points.iter().map(|p| p.0);
        let first = xs.next()?;
        Some(xs.fold((first, first), |(lo, hi), x| (lo.min(x), hi.max(x))))
    }

    pub fn distinct_x(&self) -> usize {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p.0).collect();
        xs.sort_by(f64::total_cmp);
        xs.dedup();
        xs.len()
    }
}
