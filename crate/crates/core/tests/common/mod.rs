//! Brute-force references shared by the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use statrs::function::gamma::digamma;

/// Max-norm distance between rows `i` and `j` of a row-major cloud.
pub fn dist(rows: &[Vec<f64>], i: usize, j: usize) -> f64 {
    rows[i]
        .iter()
        .zip(&rows[j])
        .fold(0.0f64, |d, (a, b)| d.max((a - b).abs()))
}

/// k-th smallest distance from `i` to any other row, by full sort.
pub fn brute_radius(rows: &[Vec<f64>], i: usize, k: usize) -> f64 {
    let mut d: Vec<f64> = (0..rows.len()).filter(|&j| j != i).map(|j| dist(rows, i, j)).collect();
    d.sort_by(f64::total_cmp);
    d[k - 1]
}

pub fn brute_count(rows: &[Vec<f64>], i: usize, r: f64, strict: bool) -> usize {
    (0..rows.len())
        .filter(|&j| j != i)
        .filter(|&j| {
            let d = dist(rows, i, j);
            if strict {
                d < r
            } else {
                d <= r
            }
        })
        .count()
}

fn stack(parts: &[&[Vec<f64>]]) -> Vec<Vec<f64>> {
    (0..parts[0].len())
        .map(|t| parts.iter().flat_map(|p| p[t].iter().copied()).collect())
        .collect()
}

/// Quadratic-time nearest-neighbor estimate of I(X;Y|Z) (Z may be empty),
/// using the same counting rules as the library.
pub fn brute_cmi(x: &[Vec<f64>], y: &[Vec<f64>], z: &[Vec<f64>], k: usize) -> f64 {
    let m = x.len();
    let mf = m as f64;
    if z.is_empty() || z[0].is_empty() {
        let joint = stack(&[x, y]);
        let mut acc = 0.0;
        for i in 0..m {
            let eps = brute_radius(&joint, i, k);
            acc += digamma(brute_count(x, i, eps, true) as f64 + 1.0) + digamma(brute_count(y, i, eps, true) as f64 + 1.0);
        }
        return digamma(k as f64) + digamma(mf) - acc / mf;
    }
    let joint = stack(&[x, y, z]);
    let xz = stack(&[x, z]);
    let yz = stack(&[y, z]);
    let mut acc = 0.0;
    for i in 0..m {
        let eps = brute_radius(&joint, i, k);
        acc += digamma(brute_count(&xz, i, eps, true) as f64 + 1.0)
            + digamma(brute_count(&yz, i, eps, true) as f64 + 1.0)
            - digamma(brute_count(z, i, eps, true) as f64 + 1.0);
    }
    digamma(k as f64) - acc / mf
}

pub fn normals(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// AR(1) series with unit innovations.
pub fn ar1(n: usize, phi: f64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let e = normals(n, rng);
    let mut x = vec![0.0; n];
    x[0] = e[0];
    for t in 1..n {
        x[t] = phi * x[t - 1] + e[t];
    }
    x
}

/// Rows of a random cloud; with `grid` set, coordinates are rounded so
/// that distance ties are common.
pub fn random_cloud(m: usize, d: usize, grid: bool, rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    (0..m)
        .map(|_| {
            (0..d)
                .map(|_| {
                    let v: f64 = rng.sample(StandardNormal);
                    if grid {
                        (v * 4.0).round() / 4.0
                    } else {
                        v
                    }
                })
                .collect()
        })
        .collect()
}

/// Pearson correlation between `x[t]` and `x[t + 1]`.
pub fn lag1_autocorrelation(x: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mean = x.iter().sum::<f64>() / n;
    let var: f64 = x.iter().map(|v| (v - mean).powi(2)).sum();
    let cov: f64 = x.windows(2).map(|w| (w[0] - mean) * (w[1] - mean)).sum();
    cov / var
}
