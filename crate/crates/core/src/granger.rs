//! Pairwise Granger causality: nested linear autoregressions compared with
//! an F-test.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LaggedComponent, SummaryCausalGraph, TimeSeriesPanel};
pub use crate::special::f_cdf_complement;

/// Relative size below which a diagonal entry of R marks a dependent column.
const RANK_TOL: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GrangerTest {
    pub driver: usize,
    pub target: usize,
    pub tau_max: usize,
    pub rss_full: f64,
    pub rss_reduced: f64,
    pub f_stat: f64,
    pub p_value: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OlsFit {
    /// Intercept first, then one coefficient per regressor in the order given.
    pub coefficients: Vec<f64>,
    pub rss: f64,
    /// Rows used in the fit.
    pub m: usize,
}

/// Least-squares fit of `target[t]` on an intercept and the lagged
/// regressors, over `t = tau_max..n` so fits with different regressor sets
/// share their rows.
pub fn ols_autoregression(
    panel: &TimeSeriesPanel,
    target: usize,
    regressors: &[LaggedComponent],
    tau_max: usize,
) -> Result<OlsFit> {
    if target >= panel.g() {
        return Err(Error::InvalidParam(format!("target {target} out of range")));
    }
    if let Some(c) = regressors
        .iter()
        .find(|c| c.lag == 0 || c.lag > tau_max || c.var >= panel.g())
    {
        return Err(Error::InvalidParam(format!(
            "regressor (var {}, lag {}) outside the panel or lag range 1..={tau_max}",
            c.var, c.lag
        )));
    }
    let n = panel.n();
    let p = regressors.len() + 1;
    if n <= tau_max || n - tau_max <= p {
        return Err(Error::TooShort(format!(
            "{n} samples cannot fit {p} coefficients after dropping {tau_max} rows"
        )));
    }
    let m = n - tau_max;
    let x = DMatrix::from_fn(m, p, |row, col| {
        if col == 0 {
            1.0
        } else {
            let c = regressors[col - 1];
            panel.value(tau_max + row - c.lag, c.var)
        }
    });
    let y = DVector::from_column_slice(&panel.column(target)[tau_max..]);

    let qr = x.clone().qr();
    let r = qr.r();
    let scale = r.diagonal().iter().fold(0.0f64, |a, v| a.max(v.abs()));
    if let Some(col) = (0..p).find(|&i| r[(i, i)].abs() <= RANK_TOL * scale) {
        return Err(Error::RankDeficient(col));
    }
    let qty = qr.q().transpose() * &y;
    let beta = r
        .solve_upper_triangular(&qty)
        .ok_or(Error::RankDeficient(0))?;
    let rss = (&y - &x * &beta).norm_squared();
    Ok(OlsFit {
        coefficients: beta.iter().copied().collect(),
        rss,
        m,
    })
}

fn lags_of(var: usize, tau_max: usize) -> impl Iterator<Item = LaggedComponent> {
    (1..=tau_max).map(move |lag| LaggedComponent::new(var, lag))
}

/// F-test of `driver` Granger-causing `target` with lags `1..=tau_max`.
pub fn granger_test(
    panel: &TimeSeriesPanel,
    driver: usize,
    target: usize,
    tau_max: usize,
) -> Result<GrangerTest> {
    if driver == target {
        return Err(Error::SelfTest(driver));
    }
    if tau_max == 0 {
        return Err(Error::InvalidParam("tau_max must be >= 1".into()));
    }
    let own: Vec<LaggedComponent> = lags_of(target, tau_max).collect();
    let full_regs: Vec<LaggedComponent> = own.iter().copied().chain(lags_of(driver, tau_max)).collect();
    let reduced = ols_autoregression(panel, target, &own, tau_max)?;
    let full = ols_autoregression(panel, target, &full_regs, tau_max)?;
    let d2 = full.m - 2 * tau_max - 1;
    if d2 == 0 {
        return Err(Error::TooShort("no residual degrees of freedom".into()));
    }
    // Nested fits: the full model can only lower the residual, up to rounding.
    debug_assert!(reduced.rss >= full.rss * (1.0 - 1e-9));
    let gain = (reduced.rss - full.rss).max(0.0);
    let f_stat = if full.rss > 0.0 {
        (gain / tau_max as f64) / (full.rss / d2 as f64)
    } else if gain > 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    let p_value = if f_stat.is_infinite() {
        0.0
    } else {
        f_cdf_complement(f_stat, tau_max as f64, d2 as f64)?
    };
    Ok(GrangerTest {
        driver,
        target,
        tau_max,
        rss_full: full.rss,
        rss_reduced: reduced.rss,
        f_stat,
        p_value,
    })
}

/// Tests every ordered pair, in (driver, target) order.
pub fn pwgc_tests(panel: &TimeSeriesPanel, tau_max: usize) -> Result<Vec<GrangerTest>> {
    let g = panel.g();
    let pairs: Vec<(usize, usize)> = (0..g)
        .flat_map(|j| (0..g).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    pairs
        .par_iter()
        .map(|&(j, i)| granger_test(panel, j, i, tau_max))
        .collect()
}

/// Graph with `X -> Y` wherever `p < alpha`; detections in both directions
/// become bidirected.
pub fn pwgc(panel: &TimeSeriesPanel, tau_max: usize, alpha: f64) -> Result<SummaryCausalGraph> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParam(format!("alpha must be in (0,1), got {alpha}")));
    }
    let tests = pwgc_tests(panel, tau_max)?;
    let mut graph = SummaryCausalGraph::empty(panel.names().to_vec());
    for t in tests.iter().filter(|t| t.p_value < alpha) {
        graph.add_directed(t.driver, t.target)?;
    }
    Ok(graph)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mark;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn exact_linear_relation() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = noise(300, &mut rng);
        let mut y = vec![0.0; 300];
        for t in 1..300 {
            y[t] = 2.0 * x[t - 1];
        }
        let p = TimeSeriesPanel::from_unnamed(vec![x, y]).unwrap();
        let fit = ols_autoregression(&p, 1, &[LaggedComponent::new(0, 1)], 1).unwrap();
        assert!((fit.coefficients[1] - 2.0).abs() < 1e-8, "{:?}", fit.coefficients);
        assert!(fit.coefficients[0].abs() < 1e-8);
        assert!(fit.rss < 1e-16);
    }

    #[test]
    fn white_noise_rss_matches_variance() {
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let p = TimeSeriesPanel::from_unnamed(vec![noise(1000, &mut rng), noise(1000, &mut rng)]).unwrap();
            let fit = ols_autoregression(&p, 1, &[LaggedComponent::new(0, 1)], 1).unwrap();
            let y = &p.column(1)[1..];
            let mean = y.iter().sum::<f64>() / y.len() as f64;
            let ss: f64 = y.iter().map(|v| (v - mean).powi(2)).sum();
            // Two fitted parameters cannot remove much more than a few units.
            assert!(fit.rss <= ss && ss - fit.rss < 20.0, "seed {seed}");
            assert!(fit.coefficients[1].abs() < 0.15);
        }
    }

    #[test]
    fn duplicated_regressor_is_rank_deficient() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let x = noise(100, &mut rng);
        let p = TimeSeriesPanel::from_unnamed(vec![x.clone(), x, noise(100, &mut rng)]).unwrap();
        let regs = [LaggedComponent::new(0, 1), LaggedComponent::new(1, 1)];
        assert!(matches!(
            ols_autoregression(&p, 2, &regs, 1),
            Err(Error::RankDeficient(2))
        ));
    }

    #[test]
    fn linear_driver_detected() {
        let mut hits = 0;
        for seed in 0..10 {
            let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
            let x = noise(4000, &mut rng);
            let e = noise(4000, &mut rng);
            let mut y = vec![0.0; 4000];
            for t in 1..4000 {
                y[t] = 0.5 * y[t - 1] + 0.8 * x[t - 1] + e[t];
            }
            let p = TimeSeriesPanel::from_unnamed(vec![x, y]).unwrap();
            let g = pwgc(&p, 3, 0.03).unwrap();
            hits += usize::from(g.mark(0, 1) == Mark::Directed);
        }
        assert!(hits >= 9, "{hits}/10");
    }

    #[test]
    fn nesting_and_bounds() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let p = TimeSeriesPanel::from_unnamed(vec![noise(500, &mut rng), noise(500, &mut rng), noise(500, &mut rng)])
            .unwrap();
        let tests = pwgc_tests(&p, 3).unwrap();
        assert_eq!(tests.len(), 6);
        for t in &tests {
            assert!(t.rss_reduced >= t.rss_full);
            assert!((0.0..=1.0).contains(&t.p_value));
            assert_ne!(t.driver, t.target);
        }
        assert!(matches!(granger_test(&p, 1, 1, 3), Err(Error::SelfTest(1))));
    }

    #[test]
    fn mutual_detection_is_bidirected() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let (e1, e2) = (noise(2000, &mut rng), noise(2000, &mut rng));
        let (mut a, mut b) = (vec![0.0; 2000], vec![0.0; 2000]);
        for t in 1..2000 {
            a[t] = 0.3 * a[t - 1] + 0.6 * b[t - 1] + e1[t];
            b[t] = 0.3 * b[t - 1] + 0.6 * a[t - 1] + e2[t];
        }
        let g = pwgc(&TimeSeriesPanel::from_unnamed(vec![a, b]).unwrap(), 2, 0.03).unwrap();
        assert_eq!(g.mark(0, 1), Mark::Bidirected);
    }
}
