//! PC-stable skeleton search with PMIME as the independence oracle, followed
//! by orientation from the asymmetry of the measure.
//!
//! The search starts from the complete directed graph. An edge `j -> i` is
//! removed once some conditioning set drawn from the other current parents of
//! `i` drives `R(j -> i | Z)` below the independence threshold. Removals found
//! at one conditioning-set size are applied together after the whole level has
//! been tested, so the result does not depend on the order of the tests.

use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{DiscoveryParams, SummaryCausalGraph, TimeSeriesPanel};
use crate::pmime::PmimeContext;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeTestRecord {
    pub from: usize,
    pub to: usize,
    pub cond_set: Vec<usize>,
    pub r: f64,
    pub removed: bool,
    pub level: usize,
}

/// Directed adjacency left after the skeleton search; both directions of a
/// pair may survive.
#[derive(Clone, Debug, PartialEq)]
pub struct Skeleton {
    names: Vec<String>,
    // present[from][to]
    present: Vec<Vec<bool>>,
    // R from the last test of each ordered pair.
    weight: Vec<Vec<f64>>,
}

impl Skeleton {
    fn complete(names: Vec<String>) -> Self {
        let g = names.len();
        let present = (0..g).map(|j| (0..g).map(|i| i != j).collect()).collect();
        Self {
            names,
            present,
            weight: vec![vec![f64::NAN; g]; g],
        }
    }

    pub fn g(&self) -> usize {
        self.names.len()
    }

    pub fn has(&self, from: usize, to: usize) -> bool {
        self.present[from][to]
    }

    pub fn weight(&self, from: usize, to: usize) -> Option<f64> {
        let w = self.weight[from][to];
        (!w.is_nan()).then_some(w)
    }

    /// Current parents of `to`, ascending.
    pub fn parents(&self, to: usize) -> Vec<usize> {
        (0..self.g()).filter(|&j| self.present[j][to]).collect()
    }

    pub fn edge_count(&self) -> usize {
        self.present.iter().flatten().filter(|&&p| p).count()
    }
}

/// All size-`l` subsets of `items`, in lexicographic order of positions.
pub fn combinations(items: &[usize], l: usize) -> Vec<Vec<usize>> {
    let n = items.len();
    if l > n {
        return Vec::new();
    }
    let mut out = Vec::new();
    let mut idx: Vec<usize> = (0..l).collect();
    loop {
        out.push(idx.iter().map(|&i| items[i]).collect());
        let Some(pos) = (0..l).rev().find(|&p| idx[p] != p + n - l) else {
            return out;
        };
        idx[pos] += 1;
        for q in pos + 1..l {
            idx[q] = idx[q - 1] + 1;
        }
    }
}

/// Skeleton phase on a standardized panel.
pub fn skeleton_phase(
    panel: &TimeSeriesPanel,
    params: &DiscoveryParams,
) -> Result<(Skeleton, Vec<EdgeTestRecord>)> {
    let ctx = PmimeContext::new(panel, params)?;
    let threshold = params.indep_threshold;
    let g = panel.g();
    let mut skel = Skeleton::complete(panel.names().to_vec());
    let mut records = Vec::new();

    // Level 0: every ordered pair, unconditionally.
    let pairs: Vec<(usize, usize)> = (0..g)
        .flat_map(|j| (0..g).filter(move |&i| i != j).map(move |i| (j, i)))
        .collect();
    let level0: Vec<EdgeTestRecord> = pairs
        .par_iter()
        .map(|&(j, i)| {
            let r = ctx.r(j, i, &[])?.r;
            Ok(EdgeTestRecord {
                from: j,
                to: i,
                cond_set: Vec::new(),
                r,
                removed: r < threshold,
                level: 0,
            })
        })
        .collect::<Result<_>>()?;
    apply_level(&mut skel, &level0);
    log::debug!("level 0: {} edges remain", skel.edge_count());
    records.extend(level0);

    let mut level = 1;
    loop {
        let frozen = skel.clone();
        let tasks: Vec<(usize, usize, Vec<usize>)> = pairs
            .iter()
            .filter(|&&(j, i)| frozen.has(j, i))
            .filter_map(|&(j, i)| {
                let adj: Vec<usize> = frozen.parents(i).into_iter().filter(|&p| p != j).collect();
                (adj.len() >= level).then_some((j, i, adj))
            })
            .collect();
        if tasks.is_empty() {
            break;
        }
        let results: Vec<Vec<EdgeTestRecord>> = tasks
            .par_iter()
            .map(|(j, i, adj)| {
                let mut recs = Vec::new();
                for cond in combinations(adj, level) {
                    let r = ctx.r(*j, *i, &cond)?.r;
                    let removed = r < threshold;
                    recs.push(EdgeTestRecord {
                        from: *j,
                        to: *i,
                        cond_set: cond,
                        r,
                        removed,
                        level,
                    });
                    if removed {
                        break;
                    }
                }
                Ok(recs)
            })
            .collect::<Result<_>>()?;
        let flat: Vec<EdgeTestRecord> = results.into_iter().flatten().collect();
        apply_level(&mut skel, &flat);
        log::debug!("level {level}: {} edges remain", skel.edge_count());
        records.extend(flat);
        level += 1;
    }
    Ok((skel, records))
}

fn apply_level(skel: &mut Skeleton, recs: &[EdgeTestRecord]) {
    for rec in recs {
        skel.weight[rec.from][rec.to] = rec.r;
    }
    for rec in recs.iter().filter(|r| r.removed) {
        skel.present[rec.from][rec.to] = false;
    }
}

/// Turns surviving directed edges into a summary graph: a pair surviving in
/// one direction is directed, in both directions bidirected.
pub fn orient_edges(skel: &Skeleton, _records: &[EdgeTestRecord]) -> SummaryCausalGraph {
    let mut graph = SummaryCausalGraph::empty(skel.names.clone());
    for a in 0..skel.g() {
        for b in a + 1..skel.g() {
            let (ab, ba) = (skel.has(a, b), skel.has(b, a));
            match (ab, ba) {
                (true, true) => graph.add_bidirected(a, b).expect("distinct nodes"),
                (true, false) => graph.add_directed(a, b).expect("distinct nodes"),
                (false, true) => graph.add_directed(b, a).expect("distinct nodes"),
                (false, false) => continue,
            }
            for (from, to, kept) in [(a, b, ab), (b, a, ba)] {
                if let (true, Some(r)) = (kept, skel.weight(from, to)) {
                    graph.set_weight(from, to, r);
                }
            }
        }
    }
    graph
}

/// Output of [`discover`]: the oriented graph and every edge test performed.
#[derive(Clone, Debug, PartialEq)]
pub struct Discovery {
    pub graph: SummaryCausalGraph,
    pub records: Vec<EdgeTestRecord>,
}

/// Standardize, search the skeleton, orient.
pub fn discover(panel: &TimeSeriesPanel, params: &DiscoveryParams) -> Result<Discovery> {
    params.validate()?;
    params.check_length(panel.n())?;
    let z = panel.standardize()?;
    let (skel, records) = skeleton_phase(&z, params)?;
    let graph = orient_edges(&skel, &records);
    Ok(Discovery { graph, records })
}

/// Audit log as CSV: `from,to,level,cond_set,r,removed`, with the
/// conditioning set written as `;`-separated indices.
pub fn write_audit_csv(records: &[EdgeTestRecord], path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["from", "to", "level", "cond_set", "r", "removed"])?;
    for rec in records {
        let cond: Vec<String> = rec.cond_set.iter().map(usize::to_string).collect();
        w.write_record([
            rec.from.to_string(),
            rec.to.to_string(),
            rec.level.to_string(),
            cond.join(";"),
            format!("{:e}", rec.r),
            rec.removed.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::Mark;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use rand_distr::StandardNormal;

    #[test]
    fn combination_order() {
        assert_eq!(
            combinations(&[1, 3, 4], 2),
            vec![vec![1, 3], vec![1, 4], vec![3, 4]]
        );
        assert_eq!(combinations(&[0, 2], 1), vec![vec![0], vec![2]]);
        assert_eq!(combinations(&[5], 0), vec![Vec::<usize>::new()]);
        assert!(combinations(&[5], 2).is_empty());
        assert_eq!(combinations(&[0, 1, 2, 3, 4], 3).len(), 10);
    }

    fn skeleton_from(g: usize, edges: &[(usize, usize)]) -> Skeleton {
        let mut s = Skeleton::complete((0..g).map(|i| format!("X{i}")).collect());
        for row in &mut s.present {
            row.iter_mut().for_each(|p| *p = false);
        }
        for &(a, b) in edges {
            s.present[a][b] = true;
            s.weight[a][b] = 0.4;
        }
        s
    }

    #[test]
    fn orientation_rules() {
        let g = orient_edges(&skeleton_from(3, &[(0, 1)]), &[]);
        assert_eq!(g.mark(0, 1), Mark::Directed);
        assert_eq!(g.weight(0, 1), Some(0.4));
        let g = orient_edges(&skeleton_from(3, &[(0, 2), (2, 0)]), &[]);
        assert_eq!(g.mark(2, 0), Mark::Bidirected);
        assert!(orient_edges(&skeleton_from(3, &[]), &[]).is_empty());
    }

    #[test]
    fn independent_noise_gives_empty_graph() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let cols: Vec<Vec<f64>> = (0..2)
            .map(|_| {
                // Strongly self-driven series keep the normalized-gain test
                // well above the estimator's noise floor.
                let mut x = vec![0.0; 2000];
                for t in 1..2000 {
                    x[t] = 0.9 * x[t - 1] + rng.sample::<f64, _>(StandardNormal);
                }
                x
            })
            .collect();
        let p = TimeSeriesPanel::from_unnamed(cols).unwrap();
        let d = discover(&p, &DiscoveryParams::default()).unwrap();
        assert!(d.graph.is_empty(), "{:?}", d.graph.edges());
        assert_eq!(d.records.iter().filter(|r| r.level == 0).count(), 2);
        assert!(d.records.iter().all(|r| r.removed));
    }

    #[test]
    fn audit_csv_layout() {
        let recs = vec![EdgeTestRecord {
            from: 2,
            to: 1,
            cond_set: vec![0, 3],
            r: 0.0,
            removed: true,
            level: 2,
        }];
        let f = tempfile::NamedTempFile::new().unwrap();
        write_audit_csv(&recs, f.path()).unwrap();
        let text = std::fs::read_to_string(f.path()).unwrap();
        assert_eq!(text, "from,to,level,cond_set,r,removed\n2,1,2,0;3,0e0,true\n");
    }
}
