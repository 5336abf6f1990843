//! Shared domain types: the observation panel, the summary causal graph,
//! discovery parameters and the lagged-component vocabulary used by PMIME.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `n` observations of `g` time series. Row `t` is time step `t`, column `i`
/// is series `X^i`. Stored column-major since every consumer slices by series.
#[derive(Clone, Debug, PartialEq)]
pub struct TimeSeriesPanel {
    names: Vec<String>,
    columns: Vec<Vec<f64>>,
}

impl TimeSeriesPanel {
    pub fn from_columns(names: Vec<String>, columns: Vec<Vec<f64>>) -> Result<Self> {
        if names.len() != columns.len() {
            return Err(Error::Shape(format!(
                "{} names for {} columns",
                names.len(),
                columns.len()
            )));
        }
        if columns.is_empty() {
            return Err(Error::Shape("panel has no series".into()));
        }
        let n = columns[0].len();
        if n == 0 {
            return Err(Error::Shape("panel has no observations".into()));
        }
        for (name, col) in names.iter().zip(&columns) {
            if col.len() != n {
                return Err(Error::Shape(format!(
                    "series '{name}' has {} rows, expected {n}",
                    col.len()
                )));
            }
            if let Some(row) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::MissingValue {
                    row,
                    column: name.clone(),
                    value: col[row].to_string(),
                });
            }
        }
        Ok(Self { names, columns })
    }

    /// Builds a panel with default names `X0..X{g-1}`.
    pub fn from_unnamed(columns: Vec<Vec<f64>>) -> Result<Self> {
        let names = (0..columns.len()).map(|i| format!("X{i}")).collect();
        Self::from_columns(names, columns)
    }

    pub fn n(&self) -> usize {
        self.columns[0].len()
    }

    pub fn g(&self) -> usize {
        self.columns.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn value(&self, t: usize, i: usize) -> f64 {
        self.columns[i][t]
    }

    /// Panel whose column `perm[i]` is this panel's column `i`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.g())?;
        let mut names = vec![String::new(); self.g()];
        let mut columns = vec![Vec::new(); self.g()];
        for (old, &new) in perm.iter().enumerate() {
            names[new] = self.names[old].clone();
            columns[new] = self.columns[old].clone();
        }
        Ok(Self { names, columns })
    }

    /// Keeps the listed series, in the listed order.
    pub fn select(&self, series: &[usize]) -> Result<Self> {
        let names = series.iter().map(|&i| self.names[i].clone()).collect();
        let columns = series.iter().map(|&i| self.columns[i].clone()).collect();
        Self::from_columns(names, columns)
    }

    /// Z-scores every column (sample mean 0, sample sd 1).
    pub fn standardize(&self) -> Result<Self> {
        if self.n() < 2 {
            return Err(Error::TooShort("standardization needs n >= 2".into()));
        }
        let mut columns = Vec::with_capacity(self.g());
        for (name, col) in self.names.iter().zip(&self.columns) {
            let (mean, sd) = mean_sd(col);
            if !(sd > 0.0) || !sd.is_finite() {
                return Err(Error::ConstantSeries(name.clone()));
            }
            columns.push(col.iter().map(|v| (v - mean) / sd).collect());
        }
        Ok(Self {
            names: self.names.clone(),
            columns,
        })
    }

    /// Adds uniform tie-breaking noise of amplitude `scale * sd` to every
    /// column. The noise stream of a column depends only on `seed` and the
    /// column's name, so reordering columns does not change any value.
    pub fn jittered(&self, seed: u64, scale: f64) -> Self {
        let columns = self
            .names
            .iter()
            .zip(&self.columns)
            .map(|(name, col)| {
                let (_, sd) = mean_sd(col);
                let amp = scale * if sd > 0.0 { sd } else { 1.0 };
                let mut rng = ChaCha8Rng::seed_from_u64(mix_seed(seed, name));
                col.iter()
                    .map(|v| v + amp * rng.random_range(-1.0..1.0))
                    .collect()
            })
            .collect();
        Self {
            names: self.names.clone(),
            columns,
        }
    }

    /// Reads a CSV with one header row of names and one numeric row per time step.
    pub fn load_csv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = File::open(path).map_err(|e| Error::io(path, e))?;
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .flexible(true)
            .from_reader(file);
        let names: Vec<String> = reader
            .headers()?
            .iter()
            .map(|s| s.trim().to_string())
            .collect();
        if names.is_empty() || names.iter().all(|s| s.is_empty()) {
            return Err(Error::Shape(format!("{}: missing header row", path.display())));
        }
        let g = names.len();
        let mut columns = vec![Vec::new(); g];
        for (row, record) in reader.records().enumerate() {
            let record = record?;
            if record.len() != g {
                return Err(Error::Shape(format!(
                    "{}: row {row} has {} fields, header has {g}",
                    path.display(),
                    record.len()
                )));
            }
            for (j, field) in record.iter().enumerate() {
                let field = field.trim();
                match field.parse::<f64>() {
                    Ok(v) if v.is_finite() => columns[j].push(v),
                    _ => {
                        return Err(Error::MissingValue {
                            row,
                            column: names[j].clone(),
                            value: field.to_string(),
                        })
                    }
                }
            }
        }
        if columns[0].is_empty() {
            return Err(Error::Shape(format!("{}: no data rows", path.display())));
        }
        Self::from_columns(names, columns)
    }

    /// Writes the panel as CSV with 17 significant digits per value.
    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = File::create(path).map_err(|e| Error::io(path, e))?;
        let mut out = BufWriter::new(file);
        let mut line = self.names.join(",");
        line.push('\n');
        for t in 0..self.n() {
            for (j, col) in self.columns.iter().enumerate() {
                if j > 0 {
                    line.push(',');
                }
                write!(line, "{:.16e}", col[t]).expect("write to String");
            }
            line.push('\n');
            if line.len() > 1 << 16 {
                out.write_all(line.as_bytes()).map_err(|e| Error::io(path, e))?;
                line.clear();
            }
        }
        out.write_all(line.as_bytes())
            .and_then(|_| out.flush())
            .map_err(|e| Error::io(path, e))
    }
}

pub(crate) fn mean_sd(col: &[f64]) -> (f64, f64) {
    let n = col.len() as f64;
    let mean = col.iter().sum::<f64>() / n;
    if col.len() < 2 {
        return (mean, 0.0);
    }
    let ss: f64 = col.iter().map(|v| (v - mean) * (v - mean)).sum();
    (mean, (ss / (n - 1.0)).sqrt())
}

/// Stable seed derivation from a global seed and a label (FNV-1a + splitmix64).
pub(crate) fn mix_seed(seed: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.as_bytes() {
        h ^= u64::from(*b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    splitmix64(seed ^ splitmix64(h))
}

pub(crate) fn splitmix64(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn check_permutation(perm: &[usize], g: usize) -> Result<()> {
    let mut seen = vec![false; g];
    if perm.len() != g {
        return Err(Error::Shape(format!("permutation of length {} for {g} nodes", perm.len())));
    }
    for &p in perm {
        if p >= g || std::mem::replace(&mut seen[p], true) {
            return Err(Error::Shape(format!("invalid permutation {perm:?}")));
        }
    }
    Ok(())
}

/// Edge mark of an ordered pair in a summary causal graph.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mark {
    Absent,
    Directed,
    Bidirected,
}

/// One edge as listed by [`SummaryCausalGraph::edges`]. Bidirected edges are
/// listed once with `from < to`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub from: usize,
    pub to: usize,
    pub mark: Mark,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub r: Option<f64>,
}

/// One node per series; lags are not represented and self-loops never appear.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct SummaryCausalGraph {
    names: Vec<String>,
    // Directed edges keyed (from, to); bidirected keyed (min, max).
    marks: BTreeMap<(usize, usize), Mark>,
    weights: BTreeMap<(usize, usize), f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct GraphJson {
    nodes: Vec<String>,
    edges: Vec<Edge>,
}

impl SummaryCausalGraph {
    pub fn empty(names: Vec<String>) -> Self {
        Self {
            names,
            ..Self::default()
        }
    }

    pub fn with_nodes(g: usize) -> Self {
        Self::empty((0..g).map(|i| format!("X{i}")).collect())
    }

    pub fn g(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    fn check_pair(&self, from: usize, to: usize) -> Result<()> {
        if from == to {
            return Err(Error::Domain(format!("self-loop on node {from}")));
        }
        if from >= self.g() || to >= self.g() {
            return Err(Error::Domain(format!(
                "edge ({from},{to}) outside a {}-node graph",
                self.g()
            )));
        }
        Ok(())
    }

    /// Adds `from -> to`. If `to -> from` is already present the pair becomes
    /// bidirected.
    pub fn add_directed(&mut self, from: usize, to: usize) -> Result<()> {
        self.check_pair(from, to)?;
        let key = (from.min(to), from.max(to));
        if self.marks.get(&key) == Some(&Mark::Bidirected) {
            return Ok(());
        }
        if self.marks.remove(&(to, from)).is_some() {
            self.marks.insert(key, Mark::Bidirected);
        } else {
            self.marks.insert((from, to), Mark::Directed);
        }
        Ok(())
    }

    pub fn add_bidirected(&mut self, a: usize, b: usize) -> Result<()> {
        self.check_pair(a, b)?;
        self.marks.remove(&(a, b));
        self.marks.remove(&(b, a));
        self.marks.insert((a.min(b), a.max(b)), Mark::Bidirected);
        Ok(())
    }

    /// Removes any edge between `a` and `b`.
    pub fn remove(&mut self, a: usize, b: usize) {
        self.marks.remove(&(a, b));
        self.marks.remove(&(b, a));
        self.weights.remove(&(a, b));
        self.weights.remove(&(b, a));
    }

    /// Mark of the ordered pair: `Directed` only for `from -> to`.
    pub fn mark(&self, from: usize, to: usize) -> Mark {
        if let Some(&m) = self.marks.get(&(from.min(to), from.max(to))) {
            if m == Mark::Bidirected {
                return m;
            }
        }
        if self.marks.contains_key(&(from, to)) {
            Mark::Directed
        } else {
            Mark::Absent
        }
    }

    pub fn adjacent(&self, a: usize, b: usize) -> bool {
        self.mark(a, b) != Mark::Absent || self.mark(b, a) != Mark::Absent
    }

    pub fn set_weight(&mut self, from: usize, to: usize, r: f64) {
        self.weights.insert((from, to), r);
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        self.weights.get(&(from, to)).copied()
    }

    pub fn edge_count(&self) -> usize {
        self.marks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marks.is_empty()
    }

    pub fn edges(&self) -> Vec<Edge> {
        self.marks
            .iter()
            .map(|(&(from, to), &mark)| Edge {
                from,
                to,
                mark,
                r: self.weight(from, to),
            })
            .collect()
    }

    /// Graph on the same nodes with node `i` renamed to `perm[i]`.
    pub fn relabeled(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.g())?;
        let mut names = vec![String::new(); self.g()];
        for (old, &new) in perm.iter().enumerate() {
            names[new] = self.names[old].clone();
        }
        let mut out = Self::empty(names);
        for e in self.edges() {
            let (a, b) = (perm[e.from], perm[e.to]);
            match e.mark {
                Mark::Directed => out.add_directed(a, b)?,
                Mark::Bidirected => out.add_bidirected(a, b)?,
                Mark::Absent => {}
            }
        }
        for (&(from, to), &r) in &self.weights {
            out.set_weight(perm[from], perm[to], r);
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = GraphJson {
            nodes: self.names.clone(),
            edges: self.edges(),
        };
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: GraphJson = serde_json::from_str(text)?;
        let mut graph = Self::empty(doc.nodes);
        for e in doc.edges {
            match e.mark {
                Mark::Directed => graph.add_directed(e.from, e.to)?,
                Mark::Bidirected => graph.add_bidirected(e.from, e.to)?,
                Mark::Absent => continue,
            }
            if let Some(r) = e.r {
                graph.set_weight(e.from, e.to, r);
            }
        }
        Ok(graph)
    }

    pub fn to_dot(&self) -> String {
        let mut s = String::from("digraph summary {\n");
        for name in &self.names {
            writeln!(s, "  \"{}\";", escape_dot(name)).unwrap();
        }
        for e in self.edges() {
            let mut attrs = Vec::new();
            if e.mark == Mark::Bidirected {
                attrs.push("dir=both".to_string());
            }
            if let Some(r) = e.r {
                attrs.push(format!("label=\"{r:.4}\""));
            }
            let attrs = if attrs.is_empty() {
                String::new()
            } else {
                format!(" [{}]", attrs.join(", "))
            };
            writeln!(
                s,
                "  \"{}\" -> \"{}\"{attrs};",
                escape_dot(&self.names[e.from]),
                escape_dot(&self.names[e.to])
            )
            .unwrap();
        }
        s.push_str("}\n");
        s
    }
}

fn escape_dot(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

/// Parameters of PC-PMIME. Defaults are `tau_max = 3`, `k = 0.01 n`,
/// `A = 0.03` and an independence threshold of `1e-10`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiscoveryParams {
    pub tau_max: usize,
    pub k_fraction: f64,
    #[serde(rename = "A")]
    pub stop_a: f64,
    pub indep_threshold: f64,
    pub horizon_t: usize,
    pub seed: u64,
}

impl Default for DiscoveryParams {
    fn default() -> Self {
        Self {
            tau_max: 3,
            k_fraction: 0.01,
            stop_a: 0.03,
            indep_threshold: 1e-10,
            horizon_t: 1,
            seed: 0,
        }
    }
}

impl DiscoveryParams {
    pub fn validate(&self) -> Result<()> {
        if self.tau_max < 1 {
            return Err(Error::InvalidParam("tau_max must be >= 1".into()));
        }
        if !(self.k_fraction > 0.0 && self.k_fraction < 1.0) {
            return Err(Error::InvalidParam(format!(
                "k_fraction must lie in (0,1), got {}",
                self.k_fraction
            )));
        }
        if !(self.stop_a > 0.0 && self.stop_a < 1.0) {
            return Err(Error::InvalidParam(format!("A must lie in (0,1), got {}", self.stop_a)));
        }
        if !(self.indep_threshold > 0.0) {
            return Err(Error::InvalidParam("indep_threshold must be > 0".into()));
        }
        if self.horizon_t < 1 {
            return Err(Error::InvalidParam("horizon_t must be >= 1".into()));
        }
        Ok(())
    }

    /// Neighbor count for `m` effective samples: `max(1, round(k_fraction * m))`.
    pub fn k_for(&self, m: usize) -> usize {
        ((self.k_fraction * m as f64).round() as usize).max(1)
    }

    /// Number of aligned samples available to the estimator.
    pub fn effective_samples(&self, n: usize) -> usize {
        (n + 1).saturating_sub(self.tau_max + self.horizon_t)
    }

    /// Rejects panels shorter than `2 (tau_max + 1)`.
    pub fn check_length(&self, n: usize) -> Result<()> {
        let need = 2 * (self.tau_max + 1);
        if n < need {
            return Err(Error::TooShort(format!(
                "n = {n} but tau_max = {} needs at least {need} observations",
                self.tau_max
            )));
        }
        Ok(())
    }
}

/// The value of series `var` taken `lag` steps before the target time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct LaggedComponent {
    pub var: usize,
    pub lag: usize,
}

impl LaggedComponent {
    pub fn new(var: usize, lag: usize) -> Self {
        debug_assert!(lag >= 1, "contemporaneous components are not allowed");
        Self { var, lag }
    }
}

/// Which part of the embedding a component belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    /// `w^x`, a lag of the driver.
    X,
    /// `w^y`, a lag of the target.
    Y,
    /// `w^Z`, a lag of a conditioning series.
    Z,
}

/// Mixed embedding in selection order.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingVector {
    pub components: Vec<(LaggedComponent, Role)>,
}

impl EmbeddingVector {
    /// Labels each selected component relative to `(driver, target)`; any
    /// other series is conditioning.
    pub fn partition(selected: &[LaggedComponent], driver: usize, target: usize) -> Self {
        let components = selected
            .iter()
            .map(|&c| {
                let role = if c.var == driver {
                    Role::X
                } else if c.var == target {
                    Role::Y
                } else {
                    Role::Z
                };
                (c, role)
            })
            .collect();
        Self { components }
    }

    pub fn len(&self) -> usize {
        self.components.len()
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    pub fn with_role(&self, role: Role) -> Vec<LaggedComponent> {
        self.components
            .iter()
            .filter(|(_, r)| *r == role)
            .map(|(c, _)| *c)
            .collect()
    }

    pub fn lagged(&self) -> Vec<LaggedComponent> {
        self.components.iter().map(|(c, _)| *c).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_tmp(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    #[test]
    fn loads_panel_shape() {
        let mut s = String::from("a,b,c\n");
        for t in 0..4000 {
            writeln!(s, "{t},{}.5,-{t}", t * 2).unwrap();
        }
        let f = write_tmp(&s);
        let p = TimeSeriesPanel::load_csv(f.path()).unwrap();
        assert_eq!((p.n(), p.g()), (4000, 3));
        assert_eq!(p.names(), ["a", "b", "c"]);
        assert_eq!(p.value(3, 1), 6.5);
    }

    #[test]
    fn header_only_is_shape_error() {
        let f = write_tmp("a,b\n");
        assert!(matches!(TimeSeriesPanel::load_csv(f.path()), Err(Error::Shape(_))));
    }

    #[test]
    fn nan_and_empty_cells_are_missing() {
        let f = write_tmp("a,b\n1,2\nNaN,3\n");
        assert!(matches!(
            TimeSeriesPanel::load_csv(f.path()),
            Err(Error::MissingValue { row: 1, .. })
        ));
        let f = write_tmp("a,b\n1,\n");
        assert!(matches!(
            TimeSeriesPanel::load_csv(f.path()),
            Err(Error::MissingValue { .. })
        ));
    }

    #[test]
    fn ragged_rows_are_shape_error() {
        let f = write_tmp("a,b\n1,2\n3\n");
        assert!(matches!(TimeSeriesPanel::load_csv(f.path()), Err(Error::Shape(_))));
    }

    #[test]
    fn missing_file_is_io_error() {
        let err = TimeSeriesPanel::load_csv("/nonexistent/panel.csv").unwrap_err();
        assert!(err.to_string().contains("/nonexistent/panel.csv"));
    }

    #[test]
    fn csv_round_trip_is_bit_exact() {
        let cols = vec![
            vec![0.1, 1.0 / 3.0, -2.5e-300, 1e300],
            vec![std::f64::consts::PI, -0.0, 7.0, 123456789.123456789],
        ];
        let p = TimeSeriesPanel::from_unnamed(cols).unwrap();
        let f = tempfile::NamedTempFile::new().unwrap();
        p.write_csv(f.path()).unwrap();
        let q = TimeSeriesPanel::load_csv(f.path()).unwrap();
        for i in 0..p.g() {
            for t in 0..p.n() {
                assert_eq!(p.value(t, i).to_bits(), q.value(t, i).to_bits());
            }
        }
    }

    #[test]
    fn standardize_moments_and_idempotence() {
        let p = TimeSeriesPanel::from_unnamed(vec![vec![1.0, 2.0, 3.0], vec![4.0, -1.0, 9.5]]).unwrap();
        let s = p.standardize().unwrap();
        for i in 0..2 {
            let (m, sd) = mean_sd(s.column(i));
            assert!(m.abs() < 1e-12 && (sd - 1.0).abs() < 1e-12);
        }
        assert_eq!(s.column(0), &[-1.0, 0.0, 1.0]);
        let ss = s.standardize().unwrap();
        for i in 0..2 {
            for t in 0..3 {
                assert!((ss.value(t, i) - s.value(t, i)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn constant_column_rejected() {
        let p = TimeSeriesPanel::from_unnamed(vec![vec![5.0, 5.0, 5.0]]).unwrap();
        assert!(matches!(p.standardize(), Err(Error::ConstantSeries(_))));
    }

    #[test]
    fn opposing_directed_edges_become_bidirected() {
        let mut g = SummaryCausalGraph::with_nodes(3);
        g.add_directed(0, 1).unwrap();
        assert_eq!(g.mark(0, 1), Mark::Directed);
        assert_eq!(g.mark(1, 0), Mark::Absent);
        g.add_directed(1, 0).unwrap();
        assert_eq!(g.mark(0, 1), Mark::Bidirected);
        assert_eq!(g.mark(1, 0), Mark::Bidirected);
        assert_eq!(g.edge_count(), 1);
        assert!(g.add_directed(2, 2).is_err());
    }

    #[test]
    fn graph_json_and_dot() {
        let mut g = SummaryCausalGraph::with_nodes(3);
        g.add_directed(0, 1).unwrap();
        g.set_weight(0, 1, 0.4);
        g.add_bidirected(2, 1).unwrap();
        let json = g.to_json().unwrap();
        let v: serde_json::Value = serde_json::from_str(&json).unwrap();
        assert_eq!(v["nodes"][2], "X2");
        assert_eq!(v["edges"][0]["mark"], "directed");
        assert_eq!(v["edges"][0]["r"], 0.4);
        assert_eq!(v["edges"][1]["mark"], "bidirected");
        assert_eq!(SummaryCausalGraph::from_json(&json).unwrap(), g);
        let dot = g.to_dot();
        assert!(dot.contains("\"X0\" -> \"X1\" [label=\"0.4000\"]"));
        assert!(dot.contains("\"X1\" -> \"X2\" [dir=both]"));
    }

    #[test]
    fn relabel_moves_edges() {
        let mut g = SummaryCausalGraph::with_nodes(3);
        g.add_directed(0, 2).unwrap();
        let h = g.relabeled(&[2, 0, 1]).unwrap();
        assert_eq!(h.mark(2, 1), Mark::Directed);
        assert_eq!(h.names()[2], "X0");
    }

    #[test]
    fn jitter_depends_on_name_not_position() {
        let p = TimeSeriesPanel::from_columns(
            vec!["a".into(), "b".into()],
            vec![vec![0.0; 5], vec![1.0; 5]],
        )
        .unwrap();
        let q = p.permuted(&[1, 0]).unwrap();
        let (pj, qj) = (p.jittered(3, 1e-10), q.jittered(3, 1e-10));
        assert_eq!(pj.column(0), qj.column(1));
        assert_ne!(pj.column(0), p.column(0));
        assert!(pj.column(0).iter().all(|v| v.abs() <= 1e-10));
    }

    #[test]
    fn params_defaults_and_k() {
        let p = DiscoveryParams::default();
        assert_eq!((p.tau_max, p.k_fraction, p.stop_a, p.indep_threshold), (3, 0.01, 0.03, 1e-10));
        assert_eq!(p.k_for(3997), 40);
        assert_eq!(p.k_for(40), 1);
        assert_eq!(p.effective_samples(4000), 3997);
        assert!(p.check_length(7).is_err());
        assert!(p.check_length(8).is_ok());
    }
}
