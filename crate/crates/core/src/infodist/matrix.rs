use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::compressor::{compress_len, ByteSequence, CodeLength, CompressError, CompressorId};

use super::sym_concat;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Metric {
    Ncd,
    Nid,
}

impl std::str::FromStr for Metric {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ncd" => Ok(Metric::Ncd),
            "nid" => Ok(Metric::Nid),
            _ => Err(format!("unknown metric {s:?} (expected ncd or nid)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Schedule {
    Serial,
    #[default]
    Parallel,
}

/// Square matrix of pairwise distances. The diagonal is computed like any
/// other entry.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    pub items: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl DistanceMatrix {
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i][j]
    }

    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    /// CSV with a header of item identifiers; each row starts with its
    /// identifier followed by values printed with six decimals.
    pub fn to_csv(&self) -> String {
        let mut w = csv::Writer::from_writer(Vec::new());
        let header = std::iter::once("id").chain(self.items.iter().map(String::as_str));
        w.write_record(header).expect("in-memory csv write");
        for (id, row) in self.items.iter().zip(&self.values) {
            let cells = std::iter::once(id.clone()).chain(row.iter().map(|v| format!("{v:.6}")));
            w.write_record(cells).expect("in-memory csv write");
        }
        String::from_utf8(w.into_inner().expect("in-memory csv flush"))
            .expect("csv output is utf-8")
    }
}

/// Pairwise NCD/NID over `items`, evaluated once per unordered pair.
///
/// The result does not depend on `schedule`; any backend error aborts the
/// whole matrix.
pub fn distance_matrix(
    items: &[(String, ByteSequence)],
    c: &CompressorId,
    // NID and NCD share one formula under a compressor approximation.
    _metric: Metric,
    schedule: Schedule,
) -> Result<DistanceMatrix, CompressError> {
    assert!(!items.is_empty(), "distance matrix needs at least one item");
    let n = items.len();
    let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();

    let single = |i: usize| compress_len(&items[i].1, c);
    let pair = |&(i, j): &(usize, usize), singles: &[CodeLength]| -> Result<f64, CompressError> {
        let joint = sym_concat(&items[i].1, &items[j].1, c)?;
        let (cx, cy) = (singles[i].bits(), singles[j].bits());
        Ok((joint.bits() - cx.min(cy)).max(0.0) / cx.max(cy))
    };

    let entries: Vec<f64> = match schedule {
        Schedule::Serial => {
            let singles = (0..n).map(single).collect::<Result<Vec<_>, _>>()?;
            pairs
                .iter()
                .map(|p| pair(p, &singles))
                .collect::<Result<_, _>>()?
        }
        Schedule::Parallel => {
            let singles = (0..n)
                .into_par_iter()
                .map(single)
                .collect::<Result<Vec<_>, _>>()?;
            pairs
                .par_iter()
                .map(|p| pair(p, &singles))
                .collect::<Result<_, _>>()?
        }
    };

    let mut values = vec![vec![0.0; n]; n];
    for (&(i, j), v) in pairs.iter().zip(entries) {
        values[i][j] = v;
        values[j][i] = v;
    }
    Ok(DistanceMatrix {
        items: items.iter().map(|(id, _)| id.clone()).collect(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::infodist::ncd;

    fn item(id: &str, bytes: Vec<u8>) -> (String, ByteSequence) {
        (id.to_string(), ByteSequence::new(bytes))
    }

    #[test]
    fn single_item() {
        let x = item("x", b"hello world hello world".to_vec());
        let m = distance_matrix(
            std::slice::from_ref(&x),
            &CompressorId::Lz,
            Metric::Ncd,
            Schedule::Serial,
        )
        .unwrap();
        assert_eq!(m.len(), 1);
        assert_eq!(m.get(0, 0), ncd(&x.1, &x.1, &CompressorId::Lz).unwrap());
    }

    #[test]
    fn duplicate_items() {
        let x = item("a", b"some structured text, some structured text".to_vec());
        let y = item("b", x.1.as_bytes().to_vec());
        let m =
            distance_matrix(&[x, y], &CompressorId::Lz, Metric::Ncd, Schedule::Parallel).unwrap();
        assert_eq!(m.get(0, 1), m.get(0, 0));
        assert_eq!(m.get(1, 0), m.get(1, 1));
    }

    #[test]
    fn parallel_equals_serial() {
        let items: Vec<_> = (0..10u8)
            .map(|i| {
                item(
                    &format!("f{i}"),
                    (0..400u32)
                        .map(|k| (k * (i as u32 + 1) % 17) as u8)
                        .collect(),
                )
            })
            .collect();
        let a = distance_matrix(&items, &CompressorId::Lz, Metric::Nid, Schedule::Serial).unwrap();
        let b =
            distance_matrix(&items, &CompressorId::Lz, Metric::Nid, Schedule::Parallel).unwrap();
        assert_eq!(a, b);
        for i in 0..10 {
            for j in 0..10 {
                assert_eq!(a.get(i, j), a.get(j, i));
            }
        }
    }

    #[test]
    fn csv_layout() {
        let m = DistanceMatrix {
            items: vec!["a".into(), "b,c".into()],
            values: vec![vec![0.0, 0.5], vec![0.5, 1.0 / 3.0]],
        };
        assert_eq!(
            m.to_csv(),
            "id,a,\"b,c\"\na,0.000000,0.500000\n\"b,c\",0.500000,0.333333\n"
        );
    }
}
