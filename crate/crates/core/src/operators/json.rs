//! JSON form of operators: `{dim, layout, entries, hermitian}` with `entries`
//! a flat row-major list of `[re, im]` pairs.

use faer::Mat;
use serde::{Deserialize, Serialize};

use super::dense::DenseOperator;
use super::layout::SystemLayout;
use super::linalg;
use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct OperatorJson {
    pub dim: usize,
    pub layout: SystemLayout,
    pub entries: Vec<[f64; 2]>,
    #[serde(default)]
    pub hermitian: bool,
}

impl OperatorJson {
    pub fn into_operator(self) -> Result<DenseOperator> {
        let n = self.layout.total_dim();
        if self.dim != n {
            return Err(Error::DimensionMismatch(format!(
                "dim is {} but the layout has dimension {n}",
                self.dim
            )));
        }
        if self.entries.len() != n * n {
            return Err(Error::DimensionMismatch(format!(
                "{} entries for a {n}x{n} matrix",
                self.entries.len()
            )));
        }
        let m = Mat::from_fn(n, n, |i, j| {
            let [re, im] = self.entries[i * n + j];
            linalg::c(re, im)
        });
        if self.hermitian {
            DenseOperator::hermitian(self.layout, m)
        } else {
            DenseOperator::new(self.layout, m)
        }
    }
}

impl From<&DenseOperator> for OperatorJson {
    fn from(op: &DenseOperator) -> Self {
        let n = op.dim();
        let m = op.entries();
        let mut entries = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                let z = m[(i, j)];
                entries.push([z.re, z.im]);
            }
        }
        OperatorJson { dim: n, layout: op.layout().clone(), entries, hermitian: op.is_hermitian() }
    }
}

/// Rows of `[re, im]` pairs, the form used for small matrices in reports.
pub fn matrix_rows(m: faer::MatRef<'_, faer::c64>) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}

/// Inverse of [`matrix_rows`]; rows must have equal length.
pub fn matrix_from_rows(rows: &[Vec<[f64; 2]>]) -> Result<linalg::CMat> {
    let cols = rows.first().map_or(0, Vec::len);
    if let Some(i) = rows.iter().position(|r| r.len() != cols) {
        return Err(Error::DimensionMismatch(format!("row {i} has {} entries, row 0 has {cols}", rows[i].len())));
    }
    Ok(Mat::from_fn(rows.len(), cols, |i, j| linalg::c(rows[i][j][0], rows[i][j][1])))
}

impl Serialize for DenseOperator {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        OperatorJson::from(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for DenseOperator {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        OperatorJson::deserialize(d)?.into_operator().map_err(serde::de::Error::custom)
    }
}
