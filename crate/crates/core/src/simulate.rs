//! Benchmark generators with known summary graphs.
//!
//! Every series follows
//! `X_t = self_coef * X_{t-1} + cross_coef * sum_p f(P_{t-lag}) + noise_sd * e_t`
//! with `f(u) = u^2` by default. Cross-edge lags per structure:
//!
//! | structure          | edges (from -> to @ lag)                                   |
//! |--------------------|------------------------------------------------------------|
//! | `fork`             | 0->1@1, 0->2@1                                             |
//! | `v_structure`      | 0->1@1, 2->1@2                                             |
//! | `mediator`         | 0->1@1, 0->2@2, 1->2@1                                     |
//! | `diamond`          | 0->1@1, 0->2@1, 1->3@1, 2->3@2                             |
//! | `seven_two_hidden` | 0->1@1, 1->2@2, 3->4@1, 5->6@1, H7->{1@1, 4@2}, H8->{2@1, 6@1} |
//!
//! Children of a common parent share the parent's lag, so that no child's
//! past stands in for the parent's driving value of a sibling.
//!
//! `H7` and `H8` are latent: they are simulated and then dropped, and the pairs
//! they confound (1,4) and (2,6) are bidirected in the ground truth.

use std::fmt;
use std::str::FromStr;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{mean_sd, SummaryCausalGraph, TimeSeriesPanel};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureKind {
    Fork,
    VStructure,
    Mediator,
    Diamond,
    SevenTwoHidden,
}

impl StructureKind {
    pub const ALL: [StructureKind; 5] = [
        StructureKind::Fork,
        StructureKind::VStructure,
        StructureKind::Mediator,
        StructureKind::Diamond,
        StructureKind::SevenTwoHidden,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            StructureKind::Fork => "fork",
            StructureKind::VStructure => "v_structure",
            StructureKind::Mediator => "mediator",
            StructureKind::Diamond => "diamond",
            StructureKind::SevenTwoHidden => "seven_two_hidden",
        }
    }

    /// `(observed, latent, edges)`; latent nodes are numbered after the observed ones.
    fn layout(self) -> (usize, usize, Vec<(usize, usize, usize)>) {
        match self {
            StructureKind::Fork => (3, 0, vec![(0, 1, 1), (0, 2, 1)]),
            StructureKind::VStructure => (3, 0, vec![(0, 1, 1), (2, 1, 2)]),
            StructureKind::Mediator => (3, 0, vec![(0, 1, 1), (0, 2, 2), (1, 2, 1)]),
            StructureKind::Diamond => (4, 0, vec![(0, 1, 1), (0, 2, 1), (1, 3, 1), (2, 3, 2)]),
            StructureKind::SevenTwoHidden => (
                7,
                2,
                vec![
                    (0, 1, 1),
                    (1, 2, 2),
                    (3, 4, 1),
                    (5, 6, 1),
                    (7, 1, 1),
                    (7, 4, 2),
                    (8, 2, 1),
                    (8, 6, 1),
                ],
            ),
        }
    }

    /// Cross edges as `(from, to, lag)` with their default lags.
    pub fn edges(self) -> Vec<(usize, usize, usize)> {
        self.layout().2
    }

    pub fn observed(self) -> usize {
        self.layout().0
    }
}

impl fmt::Display for StructureKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for StructureKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        StructureKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidSpec(format!("unknown structure '{s}'")))
    }
}

/// Nonlinearity applied to a parent before it enters a child.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    #[default]
    Quadratic,
    Linear,
}

impl Coupling {
    fn apply(self, u: f64) -> f64 {
        match self {
            Coupling::Quadratic => u * u,
            Coupling::Linear => u,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StructureSpec {
    pub kind: StructureKind,
    pub n: usize,
    pub seed: u64,
    pub self_coef: f64,
    pub cross_coef: f64,
    pub noise_sd: f64,
    /// Per-edge lags in the order of [`StructureKind::edges`]; `None` keeps the defaults.
    #[serde(default)]
    pub lags: Option<Vec<usize>>,
    pub burn_in: usize,
    #[serde(default)]
    pub coupling: Coupling,
}

impl StructureSpec {
    pub fn new(kind: StructureKind, n: usize, seed: u64) -> Self {
        Self {
            kind,
            n,
            seed,
            self_coef: 0.5,
            cross_coef: 0.8,
            noise_sd: 0.4,
            lags: None,
            burn_in: 1000,
            coupling: Coupling::Quadratic,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.self_coef.abs() < 1.0) {
            return Err(Error::InvalidSpec(format!(
                "|self_coef| must be < 1 for stationarity, got {}",
                self.self_coef
            )));
        }
        if !(self.noise_sd > 0.0) {
            return Err(Error::InvalidSpec("noise_sd must be > 0".into()));
        }
        if !self.cross_coef.is_finite() {
            return Err(Error::InvalidSpec("cross_coef must be finite".into()));
        }
        if self.n < 2 {
            return Err(Error::InvalidSpec("n must be >= 2".into()));
        }
        if let Some(lags) = &self.lags {
            let edges = self.kind.edges().len();
            if lags.len() != edges {
                return Err(Error::InvalidSpec(format!(
                    "{} lags given for {edges} edges of {}",
                    lags.len(),
                    self.kind
                )));
            }
            if let Some(bad) = lags.iter().find(|l| !(1..=3).contains(*l)) {
                return Err(Error::InvalidSpec(format!("lag {bad} outside 1..=3")));
            }
        }
        Ok(())
    }

    /// File stem `{kind}_n{n}_s{seed}`.
    pub fn file_stem(&self) -> String {
        format!("{}_n{}_s{}", self.kind, self.n, self.seed)
    }
}

/// Simulates the structure and returns the observed panel with its ground truth.
pub fn generate(spec: &StructureSpec) -> Result<(TimeSeriesPanel, SummaryCausalGraph)> {
    spec.validate()?;
    let (observed, latent, mut edges) = spec.kind.layout();
    if let Some(lags) = &spec.lags {
        for (e, &lag) in edges.iter_mut().zip(lags) {
            e.2 = lag;
        }
    }
    let nodes = observed + latent;
    let total = spec.burn_in + spec.n;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut series = vec![vec![0.0f64; total]; nodes];
    for t in 0..total {
        for i in 0..nodes {
            let eps: f64 = StandardNormal.sample(&mut rng);
            let mut v = spec.noise_sd * eps;
            if t >= 1 {
                v += spec.self_coef * series[i][t - 1];
            }
            for &(from, to, lag) in &edges {
                if to == i && t >= lag {
                    v += spec.cross_coef * spec.coupling.apply(series[from][t - lag]);
                }
            }
            series[i][t] = v;
        }
    }
    let columns: Vec<Vec<f64>> = series
        .into_iter()
        .take(observed)
        .map(|s| s[spec.burn_in..].to_vec())
        .collect();
    let panel = TimeSeriesPanel::from_unnamed(columns)
        .map_err(|e| Error::InvalidSpec(format!("simulation diverged: {e}")))?;
    Ok((panel, ground_truth(spec.kind)))
}

/// Summary graph of the observed series. Pairs sharing a latent parent are bidirected.
pub fn ground_truth(kind: StructureKind) -> SummaryCausalGraph {
    let (observed, _, edges) = kind.layout();
    let mut g = SummaryCausalGraph::with_nodes(observed);
    for &(from, to, _) in &edges {
        if from < observed {
            g.add_directed(from, to).expect("valid structure edge");
        }
    }
    for h in observed..observed + kind.layout().1 {
        let children: Vec<usize> = edges.iter().filter(|e| e.0 == h).map(|e| e.1).collect();
        for (a, &x) in children.iter().enumerate() {
            for &y in &children[a + 1..] {
                g.add_bidirected(x, y).expect("valid latent pair");
            }
        }
    }
    g
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesDrift {
    pub name: String,
    pub mean_first: f64,
    pub mean_second: f64,
    pub var_first: f64,
    pub var_second: f64,
    /// `|mean_second - mean_first|` in units of the pooled half-sample sd.
    pub shift_in_sd: f64,
    pub flagged: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StationarityReport {
    pub series: Vec<SeriesDrift>,
}

impl StationarityReport {
    pub fn flagged(&self) -> Vec<&str> {
        self.series
            .iter()
            .filter(|s| s.flagged)
            .map(|s| s.name.as_str())
            .collect()
    }
}

/// Threshold on the half-to-half mean shift, in pooled sd units.
pub const DRIFT_THRESHOLD: f64 = 0.5;

/// Compares the first and second half of every series. A series is flagged
/// when its mean moves by more than half a pooled sd, or when a half has no
/// variance at all.
pub fn empirical_stationarity_check(panel: &TimeSeriesPanel) -> Result<StationarityReport> {
    if panel.n() < 400 {
        return Err(Error::TooShort(format!(
            "stationarity check needs n >= 400, got {}",
            panel.n()
        )));
    }
    let half = panel.n() / 2;
    let series = (0..panel.g())
        .map(|i| {
            let col = panel.column(i);
            let (m1, s1) = mean_sd(&col[..half]);
            let (m2, s2) = mean_sd(&col[half..]);
            let (v1, v2) = (s1 * s1, s2 * s2);
            let pooled = (0.5 * (v1 + v2)).sqrt();
            let shift = (m2 - m1).abs();
            let (shift_in_sd, flagged) = if pooled > 0.0 {
                (shift / pooled, shift > DRIFT_THRESHOLD * pooled)
            } else {
                (f64::INFINITY, true)
            };
            SeriesDrift {
                name: panel.names()[i].clone(),
                mean_first: m1,
                mean_second: m2,
                var_first: v1,
                var_second: v2,
                shift_in_sd,
                flagged,
            }
        })
        .collect();
    Ok(StationarityReport { series })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mark;

    #[test]
    fn fork_shape_and_truth() {
        let (p, truth) = generate(&StructureSpec::new(StructureKind::Fork, 4000, 7)).unwrap();
        assert_eq!((p.n(), p.g()), (4000, 3));
        assert_eq!(truth.edge_count(), 2);
        assert_eq!(truth.mark(0, 1), Mark::Directed);
        assert_eq!(truth.mark(0, 2), Mark::Directed);
    }

    #[test]
    fn truth_edge_sets() {
        let directed = |k: StructureKind| -> Vec<(usize, usize)> {
            ground_truth(k)
                .edges()
                .into_iter()
                .filter(|e| e.mark == Mark::Directed)
                .map(|e| (e.from, e.to))
                .collect()
        };
        assert_eq!(directed(StructureKind::Fork), [(0, 1), (0, 2)]);
        assert_eq!(directed(StructureKind::VStructure), [(0, 1), (2, 1)]);
        assert_eq!(directed(StructureKind::Mediator), [(0, 1), (0, 2), (1, 2)]);
        assert_eq!(directed(StructureKind::Diamond), [(0, 1), (0, 2), (1, 3), (2, 3)]);
        let seven = ground_truth(StructureKind::SevenTwoHidden);
        assert_eq!(seven.g(), 7);
        assert_eq!(seven.mark(1, 4), Mark::Bidirected);
        assert_eq!(seven.mark(6, 2), Mark::Bidirected);
        assert_eq!(seven.edge_count(), 6);
    }

    #[test]
    fn deterministic_per_seed() {
        let spec = StructureSpec::new(StructureKind::Diamond, 500, 3);
        assert_eq!(generate(&spec).unwrap(), generate(&spec).unwrap());
    }

    #[test]
    fn invalid_specs() {
        let mut spec = StructureSpec::new(StructureKind::Fork, 100, 0);
        spec.self_coef = 1.0;
        assert!(matches!(generate(&spec), Err(Error::InvalidSpec(_))));
        let mut spec = StructureSpec::new(StructureKind::Fork, 100, 0);
        spec.noise_sd = 0.0;
        assert!(generate(&spec).is_err());
        let mut spec = StructureSpec::new(StructureKind::Fork, 100, 0);
        spec.lags = Some(vec![1, 4]);
        assert!(generate(&spec).is_err());
        spec.lags = Some(vec![1]);
        assert!(generate(&spec).is_err());
        assert!("pentagon".parse::<StructureKind>().is_err());
        assert_eq!("v_structure".parse::<StructureKind>().unwrap(), StructureKind::VStructure);
    }

    #[test]
    fn custom_lags_apply() {
        let mut spec = StructureSpec::new(StructureKind::Fork, 2000, 1);
        spec.coupling = Coupling::Linear;
        spec.lags = Some(vec![3, 3]);
        let (p, _) = generate(&spec).unwrap();
        let corr_at = |lag: usize| {
            let a = &p.column(0)[..p.n() - lag];
            let b = &p.column(1)[lag..];
            let (ma, sa) = mean_sd(a);
            let (mb, sb) = mean_sd(b);
            a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum::<f64>() / ((a.len() - 1) as f64 * sa * sb)
        };
        assert!(corr_at(3) > corr_at(1));
    }

    #[test]
    fn trend_is_flagged_and_constant_is_flagged() {
        let n = 4000;
        let (p, _) = generate(&StructureSpec::new(StructureKind::Fork, n, 2)).unwrap();
        let trended: Vec<f64> = p.column(0).iter().enumerate().map(|(t, v)| v + 0.01 * t as f64).collect();
        let panel = TimeSeriesPanel::from_unnamed(vec![p.column(1).to_vec(), trended, vec![3.0; n]]).unwrap();
        let report = empirical_stationarity_check(&panel).unwrap();
        assert_eq!(report.flagged(), ["X1", "X2"]);
        assert!(report.series[2].shift_in_sd.is_infinite());
    }

    #[test]
    fn stationarity_needs_length() {
        let p = TimeSeriesPanel::from_unnamed(vec![vec![0.0; 399]]).unwrap();
        assert!(matches!(empirical_stationarity_check(&p), Err(Error::TooShort(_))));
    }
}
