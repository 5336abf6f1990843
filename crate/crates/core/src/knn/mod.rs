//! Nearest-neighbor information estimators.
//!
//! Mutual information uses the first Kraskov–Stögbauer–Grassberger estimator
//! and conditional mutual information the Frenzel–Pompe estimator. Both take
//! the distance to the `k`-th neighbor in the joint space under the max-norm
//! and count strictly closer points in the marginal spaces.

mod tree;

pub use tree::NeighborIndex;
use tree::KBest;

use crate::error::{Error, Result};
use crate::special::digamma_unchecked as psi;

/// `m` joint samples of dimension `d`, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct SamplePointCloud {
    dim: usize,
    data: Vec<f64>,
}

impl SamplePointCloud {
    pub fn new(dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::ShapeMismatch("point cloud of dimension 0".into()));
        }
        if data.len() % dim != 0 {
            return Err(Error::ShapeMismatch(format!(
                "{} values do not split into rows of {dim}",
                data.len()
            )));
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::Domain("point cloud contains non-finite values".into()));
        }
        Ok(Self { dim, data })
    }

    /// One coordinate per slice; all slices must have equal length.
    pub fn from_columns(columns: &[&[f64]]) -> Result<Self> {
        let dim = columns.len();
        if dim == 0 {
            return Err(Error::ShapeMismatch("no columns".into()));
        }
        let m = columns[0].len();
        if columns.iter().any(|c| c.len() != m) {
            return Err(Error::ShapeMismatch("columns of unequal length".into()));
        }
        let mut data = Vec::with_capacity(m * dim);
        for t in 0..m {
            data.extend(columns.iter().map(|c| c[t]));
        }
        Self::new(dim, data)
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::ShapeMismatch("rows of unequal length".into()));
        }
        Self::new(dim, rows.concat())
    }

    /// Column-wise concatenation of clouds with equal point counts.
    pub fn concat(parts: &[&SamplePointCloud]) -> Result<Self> {
        let m = parts.first().map_or(0, |p| p.len());
        if parts.iter().any(|p| p.len() != m) {
            return Err(Error::ShapeMismatch("clouds have different sample counts".into()));
        }
        let dim: usize = parts.iter().map(|p| p.dim).sum();
        let mut data = Vec::with_capacity(m * dim);
        for t in 0..m {
            for p in parts {
                data.extend_from_slice(p.point(t));
            }
        }
        Self::new(dim, data)
    }

    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn point(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }
}

/// Max-norm distance from point `index` to its `k`-th nearest other point.
pub fn knn_radius(cloud: &SamplePointCloud, index: usize, k: usize) -> Result<f64> {
    check_k(k, cloud.len())?;
    let tree = NeighborIndex::build(cloud);
    Ok(tree.kth_distance(index, k, &mut KBest::default()))
}

/// Number of other points within `radius` of point `index` (strictly closer
/// when `strict`).
pub fn count_within(cloud: &SamplePointCloud, index: usize, radius: f64, strict: bool) -> usize {
    NeighborIndex::build(cloud).count_within(index, radius, strict)
}

impl NeighborIndex {
    pub fn knn_radius(&self, index: usize, k: usize) -> Result<f64> {
        check_k(k, self.len())?;
        Ok(self.kth_distance(index, k, &mut KBest::default()))
    }

    /// Radii of every point, in id order.
    pub fn all_knn_radii(&self, k: usize) -> Result<Vec<f64>> {
        check_k(k, self.len())?;
        let mut best = KBest::default();
        Ok((0..self.len()).map(|i| self.kth_distance(i, k, &mut best)).collect())
    }
}

fn check_k(k: usize, m: usize) -> Result<()> {
    if k == 0 || k >= m {
        return Err(Error::KTooLarge { k, m });
    }
    Ok(())
}

/// Estimate of `I(X; Y | Z)` in nats, or `I(X; Y)` when `z` is `None`.
/// Not clamped: small negative values are estimator noise.
pub fn estimate_cmi(
    x: &SamplePointCloud,
    y: &SamplePointCloud,
    z: Option<&SamplePointCloud>,
    k: usize,
) -> Result<f64> {
    let m = x.len();
    if y.len() != m || z.is_some_and(|z| z.len() != m) {
        return Err(Error::ShapeMismatch(format!(
            "sample counts differ: x={}, y={}, z={:?}",
            x.len(),
            y.len(),
            z.map(SamplePointCloud::len)
        )));
    }
    check_k(k, m)?;
    match z {
        None => Ok(ksg_mi(x, y, k)),
        Some(z) => Ok(frenzel_pompe_cmi(x, y, z, k)),
    }
}

/// Convenience form over coordinate slices; `z` may be empty.
pub fn estimate_cmi_columns(x: &[&[f64]], y: &[&[f64]], z: &[&[f64]], k: usize) -> Result<f64> {
    let xc = SamplePointCloud::from_columns(x)?;
    let yc = SamplePointCloud::from_columns(y)?;
    if z.is_empty() {
        estimate_cmi(&xc, &yc, None, k)
    } else {
        let zc = SamplePointCloud::from_columns(z)?;
        estimate_cmi(&xc, &yc, Some(&zc), k)
    }
}

fn ksg_mi(x: &SamplePointCloud, y: &SamplePointCloud, k: usize) -> f64 {
    let m = x.len();
    let joint = NeighborIndex::build(&SamplePointCloud::concat(&[x, y]).expect("equal lengths"));
    let tx = NeighborIndex::build(x);
    let ty = NeighborIndex::build(y);
    let mut best = KBest::default();
    let mut acc = 0.0;
    for i in 0..m {
        let eps = joint.kth_distance(i, k, &mut best);
        let nx = tx.count_within(i, eps, true);
        let ny = ty.count_within(i, eps, true);
        acc += psi(nx as f64 + 1.0) + psi(ny as f64 + 1.0);
    }
    psi(k as f64) + psi(m as f64) - acc / m as f64
}

fn frenzel_pompe_cmi(x: &SamplePointCloud, y: &SamplePointCloud, z: &SamplePointCloud, k: usize) -> f64 {
    let m = x.len();
    let joint = NeighborIndex::build(&SamplePointCloud::concat(&[x, y, z]).expect("equal lengths"));
    let txz = NeighborIndex::build(&SamplePointCloud::concat(&[x, z]).expect("equal lengths"));
    let tyz = NeighborIndex::build(&SamplePointCloud::concat(&[y, z]).expect("equal lengths"));
    let tz = NeighborIndex::build(z);
    let mut best = KBest::default();
    let mut acc = 0.0;
    for i in 0..m {
        let eps = joint.kth_distance(i, k, &mut best);
        let nxz = txz.count_within(i, eps, true);
        let nyz = tyz.count_within(i, eps, true);
        let nz = tz.count_within(i, eps, true);
        acc += (psi(nxz as f64 + 1.0) + psi(nyz as f64 + 1.0)) - psi(nz as f64 + 1.0);
    }
    psi(k as f64) - acc / m as f64
}
