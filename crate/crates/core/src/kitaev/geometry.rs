use serde::Serialize;

use crate::error::{Error, Result};
use crate::operators::{eigh, principal_cosines, DenseOperator, EigenSystem, Subspace};

/// Span of the eigenvectors of `h` with eigenvalue `<= threshold`.
pub fn ground_space(h: &DenseOperator, threshold: f64) -> Result<Subspace> {
    eigh(h)?.subspace_below(threshold)
}

/// `lambda_{k+1} - lambda_k` with `k = dim ground_space(h, threshold)`.
pub fn spectral_gap_above(h: &DenseOperator, threshold: f64) -> Result<f64> {
    eigh(h)?.gap_above(threshold)
}

#[derive(Clone, Debug, Serialize)]
pub struct GeometricalBound {
    pub a1: f64,
    pub a2: f64,
    /// `min(Lambda_1, Lambda_2)`, the smaller gap above a ground cluster.
    pub lambda: f64,
    /// Smallest principal angle between the two ground spaces.
    pub theta: f64,
    /// `a1 + a2 + 2 Lambda sin^2(theta / 2)`
    pub bound: f64,
    /// `lambda_min(H1 + H2)`
    pub actual: f64,
    pub holds: bool,
}

fn ground_cluster(e: &EigenSystem) -> Result<(f64, Subspace, f64)> {
    let clusters = e.clusters();
    if clusters.len() < 2 {
        return Err(Error::NoGap("operator has a single eigenvalue cluster".into()));
    }
    let k = clusters[0].end;
    Ok((e.min(), e.lowest(k), e.values()[k] - e.values()[k - 1]))
}

/// Lower bound on the ground energy of `H1 + H2` from the ground energies,
/// gaps, and the angle between the two ground spaces.
pub fn geometrical_bound(h1: &DenseOperator, h2: &DenseOperator) -> Result<GeometricalBound> {
    if h1.dim() != h2.dim() {
        return Err(Error::DimensionMismatch(format!("{} vs {}", h1.dim(), h2.dim())));
    }
    let (a1, g1, l1) = ground_cluster(&eigh(h1)?)?;
    let (a2, g2, l2) = ground_cluster(&eigh(h2)?)?;
    let cos = principal_cosines(&g1, &g2).first().copied().unwrap_or(0.0).min(1.0);
    let theta = cos.acos();
    let lambda = l1.min(l2);
    let bound = a1 + a2 + 2.0 * lambda * (theta / 2.0).sin().powi(2);
    let actual = eigh(&(h1 + h2))?.min();
    Ok(GeometricalBound { a1, a2, lambda, theta, bound, actual, holds: actual >= bound - 1e-9 })
}
