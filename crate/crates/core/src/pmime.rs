//! Partial mutual information from mixed embedding.
//!
//! The future of the target is explained by an embedding vector grown one
//! lagged component at a time (an embedding cycle). Each cycle picks the
//! candidate with the largest conditional mutual information with the
//! target's future given the components already selected, and keeps it only
//! if its normalized gain exceeds `A`. The causal strength of a driver is the
//! share of the embedding's information that the driver's components carry
//! exclusively.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::knn::estimate_cmi_columns;
use crate::model::{DiscoveryParams, EmbeddingVector, LaggedComponent, Role, TimeSeriesPanel};

/// Upper bound on the number of embedding components.
pub const MAX_COMPONENTS: usize = 20;

/// Amplitude of the tie-breaking jitter, relative to each column's sd.
pub const JITTER_SCALE: f64 = 1e-10;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PmimeResult {
    /// Causal strength in `[0, 1]`.
    pub r: f64,
    pub embedding: EmbeddingVector,
    /// `I(Y^T; w^x | w^y, w^Z)`, unclamped.
    pub numerator: f64,
    /// `I(Y^T; w)`, unclamped.
    pub denominator: f64,
    pub cycles: usize,
}

impl PmimeResult {
    pub fn driver_selected(&self) -> bool {
        self.embedding.components.iter().any(|(_, r)| *r == Role::X)
    }
}

/// Every `(var, lag)` with `lag` in `1..=tau_max` for the series in `scope`,
/// ordered by `(var, lag)`.
pub fn build_candidates(scope: &[usize], tau_max: usize) -> Result<Vec<LaggedComponent>> {
    if tau_max == 0 {
        return Err(Error::InvalidParam("tau_max must be >= 1".into()));
    }
    if scope.is_empty() {
        return Err(Error::InvalidParam("empty candidate scope".into()));
    }
    let mut vars = scope.to_vec();
    vars.sort_unstable();
    vars.dedup();
    Ok(vars
        .into_iter()
        .flat_map(|var| (1..=tau_max).map(move |lag| LaggedComponent::new(var, lag)))
        .collect())
}

/// Outcome of the greedy embedding search.
#[derive(Clone, Debug, PartialEq)]
pub struct Selection {
    pub components: Vec<LaggedComponent>,
    /// `I(Y^T; w)` of the final embedding (0 when empty).
    pub information: f64,
    pub cycles: usize,
}

/// A panel prepared for repeated PMIME queries: jittered once, with the lag
/// alignment fixed by `params`.
#[derive(Clone, Debug)]
pub struct PmimeContext {
    panel: TimeSeriesPanel,
    params: DiscoveryParams,
    m: usize,
    k: usize,
}

impl PmimeContext {
    /// `panel` is expected to be standardized already.
    pub fn new(panel: &TimeSeriesPanel, params: &DiscoveryParams) -> Result<Self> {
        params.validate()?;
        params.check_length(panel.n())?;
        let m = params.effective_samples(panel.n());
        let k = params.k_for(m);
        if m < 5 * k || k >= m {
            return Err(Error::TooShort(format!(
                "{m} aligned samples is too few for k = {k} (need at least {})",
                5 * k
            )));
        }
        Ok(Self {
            panel: panel.jittered(params.seed, JITTER_SCALE),
            params: params.clone(),
            m,
            k,
        })
    }

    pub fn params(&self) -> &DiscoveryParams {
        &self.params
    }

    pub fn g(&self) -> usize {
        self.panel.g()
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn effective_samples(&self) -> usize {
        self.m
    }

    // Target future Y_{t+h}, h = 1..=T, for anchors t = tau_max-1 ..= n-1-T.
    fn future(&self, target: usize) -> Vec<&[f64]> {
        let start = self.params.tau_max - 1;
        (1..=self.params.horizon_t)
            .map(|h| &self.panel.column(target)[start + h..start + h + self.m])
            .collect()
    }

    // X^var_{t+1-lag} over the same anchors.
    fn component(&self, c: LaggedComponent) -> &[f64] {
        let start = self.params.tau_max - c.lag;
        &self.panel.column(c.var)[start..start + self.m]
    }

    fn check_series(&self, ids: &[usize]) -> Result<()> {
        match ids.iter().find(|&&i| i >= self.g()) {
            Some(i) => Err(Error::InvalidParam(format!(
                "series {i} out of range for a panel of {} series",
                self.g()
            ))),
            None => Ok(()),
        }
    }

    /// Greedy mixed-embedding search for the future of `target` over lags of
    /// the series in `scope`.
    pub fn select(&self, target: usize, scope: &[usize]) -> Result<Selection> {
        self.check_series(scope)?;
        self.check_series(&[target])?;
        let future = self.future(target);
        let mut remaining = build_candidates(scope, self.params.tau_max)?;
        let mut chosen: Vec<LaggedComponent> = Vec::new();
        let mut information = 0.0;
        let mut cycles = 0;

        while chosen.len() < MAX_COMPONENTS && !remaining.is_empty() {
            cycles += 1;
            let w: Vec<&[f64]> = chosen.iter().map(|&c| self.component(c)).collect();
            let mut best: Option<(usize, f64)> = None;
            for (idx, &c) in remaining.iter().enumerate() {
                let score = estimate_cmi_columns(&future, &[self.component(c)], &w, self.k)?;
                if best.is_none_or(|(_, s)| score > s) {
                    best = Some((idx, score));
                }
            }
            let (idx, score) = best.expect("nonempty candidate list");
            let gain = score.max(0.0);
            let (ratio, total) = if chosen.is_empty() {
                (if gain > 0.0 { 1.0 } else { 0.0 }, score)
            } else {
                let mut with_c = w.clone();
                with_c.push(self.component(remaining[idx]));
                let total = estimate_cmi_columns(&future, &with_c, &[], self.k)?;
                let ratio = if total > 0.0 { gain / total } else { 0.0 };
                (ratio, total)
            };
            log::trace!(
                "target {target} cycle {cycles}: best {:?} score {score:.3e} ratio {ratio:.4}",
                remaining[idx]
            );
            if ratio > self.params.stop_a {
                chosen.push(remaining.remove(idx));
                information = total;
            } else {
                break;
            }
        }
        Ok(Selection {
            components: chosen,
            information,
            cycles,
        })
    }

    /// `R(driver -> target | cond)`.
    pub fn r(&self, driver: usize, target: usize, cond: &[usize]) -> Result<PmimeResult> {
        if driver == target {
            return Err(Error::SelfTest(driver));
        }
        if cond.contains(&driver) || cond.contains(&target) {
            return Err(Error::InvalidParam(format!(
                "conditioning set {cond:?} contains driver {driver} or target {target}"
            )));
        }
        let mut scope = vec![driver, target];
        scope.extend_from_slice(cond);
        let sel = self.select(target, &scope)?;
        let embedding = EmbeddingVector::partition(&sel.components, driver, target);
        let wx = embedding.with_role(Role::X);
        if wx.is_empty() {
            return Ok(PmimeResult {
                r: 0.0,
                embedding,
                numerator: 0.0,
                denominator: sel.information,
                cycles: sel.cycles,
            });
        }
        let rest: Vec<LaggedComponent> = embedding
            .components
            .iter()
            .filter(|(_, role)| *role != Role::X)
            .map(|(c, _)| *c)
            .collect();
        let future = self.future(target);
        let wx_cols: Vec<&[f64]> = wx.iter().map(|&c| self.component(c)).collect();
        let rest_cols: Vec<&[f64]> = rest.iter().map(|&c| self.component(c)).collect();
        let denominator = sel.information;
        let numerator = if rest.is_empty() {
            denominator
        } else {
            estimate_cmi_columns(&future, &wx_cols, &rest_cols, self.k)?
        };
        let r = if denominator > 0.0 {
            (numerator.max(0.0) / denominator).clamp(0.0, 1.0)
        } else {
            0.0
        };
        Ok(PmimeResult {
            r,
            embedding,
            numerator,
            denominator,
            cycles: sel.cycles,
        })
    }
}

/// Mixed embedding of `target`'s future over the lags of `scope`. Components
/// of the target are labelled `y`, all others `Z`.
pub fn build_mixed_embedding(
    panel: &TimeSeriesPanel,
    target: usize,
    scope: &[usize],
    params: &DiscoveryParams,
) -> Result<EmbeddingVector> {
    let sel = PmimeContext::new(panel, params)?.select(target, scope)?;
    let components = sel
        .components
        .into_iter()
        .map(|c| (c, if c.var == target { Role::Y } else { Role::Z }))
        .collect();
    Ok(EmbeddingVector { components })
}

/// `R(driver -> target | cond)` on a standardized panel.
pub fn pmime_r(
    panel: &TimeSeriesPanel,
    driver: usize,
    target: usize,
    cond: &[usize],
    params: &DiscoveryParams,
) -> Result<PmimeResult> {
    if driver == target {
        return Err(Error::SelfTest(driver));
    }
    PmimeContext::new(panel, params)?.r(driver, target, cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    fn noise(n: usize, rng: &mut ChaCha8Rng) -> Vec<f64> {
        (0..n).map(|_| rng.sample(StandardNormal)).collect()
    }

    #[test]
    fn candidate_enumeration() {
        assert_eq!(build_candidates(&[0, 1, 2], 3).unwrap().len(), 9);
        assert_eq!(
            build_candidates(&[1, 0], 1).unwrap(),
            vec![LaggedComponent::new(0, 1), LaggedComponent::new(1, 1)]
        );
        assert!(build_candidates(&[0, 1], 0).is_err());
    }

    #[test]
    fn self_test_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let p = TimeSeriesPanel::from_unnamed(vec![noise(200, &mut rng), noise(200, &mut rng)]).unwrap();
        let err = pmime_r(&p, 1, 1, &[], &DiscoveryParams::default()).unwrap_err();
        assert!(matches!(err, Error::SelfTest(1)));
        let err = pmime_r(&p, 0, 1, &[1], &DiscoveryParams::default()).unwrap_err();
        assert!(matches!(err, Error::InvalidParam(_)));
    }

    #[test]
    fn too_short_panel() {
        let p = TimeSeriesPanel::from_unnamed(vec![vec![0.0, 1.0, 0.5, 2.0, 1.0, 0.0, 3.0], vec![1.0; 7]]).unwrap();
        assert!(matches!(
            pmime_r(&p, 0, 1, &[], &DiscoveryParams::default()),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn noiseless_driver_gives_full_strength() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let n = 1000;
        let x = noise(n, &mut rng);
        let mut y = vec![0.0; n];
        for t in 1..n {
            y[t] = x[t - 1].powi(3) + 0.5 * x[t - 1];
        }
        let p = TimeSeriesPanel::from_unnamed(vec![x, y]).unwrap().standardize().unwrap();
        let res = pmime_r(&p, 0, 1, &[], &DiscoveryParams::default()).unwrap();
        assert!(res.r >= 0.8, "{res:?}");
        assert_eq!(res.embedding.components[0].0, LaggedComponent::new(0, 1));
    }

    #[test]
    fn lag_beyond_tau_max_is_invisible() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 1000;
        let x = noise(n, &mut rng);
        let e = noise(n, &mut rng);
        let mut y = vec![0.0; n];
        // A self-driven target, so the first cycle has a genuine component
        // to pick instead of a noise lag.
        for t in 2..n {
            y[t] = 0.9 * y[t - 1] + 0.9 * x[t - 2] + 0.3 * e[t];
        }
        let p = TimeSeriesPanel::from_unnamed(vec![x, y]).unwrap().standardize().unwrap();
        let params = DiscoveryParams {
            tau_max: 1,
            ..DiscoveryParams::default()
        };
        let res = pmime_r(&p, 0, 1, &[], &params).unwrap();
        assert!(!res.driver_selected());
        assert_eq!(res.r, 0.0);
        let params = DiscoveryParams {
            tau_max: 2,
            ..DiscoveryParams::default()
        };
        assert!(pmime_r(&p, 0, 1, &[], &params).unwrap().r > 0.3);
    }
}
