//! Max-norm kd-tree over a point cloud.
//!
//! Every distance the tree reports is `max_d |p_d - q_d|` computed exactly as a
//! linear scan would compute it, and box pruning relies only on the
//! monotonicity of rounded subtraction, so radii and counts agree bit-for-bit
//! with brute force.

use super::SamplePointCloud;

const LEAF_SIZE: usize = 32;
const NO_CHILD: u32 = u32::MAX;

#[derive(Clone, Copy, Debug)]
struct Node {
    start: u32,
    end: u32,
    left: u32,
    right: u32,
}

/// Read-only neighbor index. Built once, then queried by original point id.
#[derive(Clone, Debug)]
pub struct NeighborIndex {
    dim: usize,
    // Points in tree order, row-major.
    pts: Vec<f64>,
    // Original id -> row in `pts`.
    slot: Vec<u32>,
    nodes: Vec<Node>,
    // Per node: `dim` lower bounds followed by `dim` upper bounds.
    bounds: Vec<f64>,
}

impl NeighborIndex {
    pub fn build(cloud: &SamplePointCloud) -> Self {
        let dim = cloud.dim();
        let m = cloud.len();
        let mut order: Vec<u32> = (0..m as u32).collect();
        let mut nodes = Vec::with_capacity(2 * m / LEAF_SIZE + 1);
        let mut bounds = Vec::with_capacity((2 * m / LEAF_SIZE + 1) * 2 * dim);
        if m > 0 {
            build_node(cloud, &mut order, 0, m, &mut nodes, &mut bounds);
        }
        let mut pts = Vec::with_capacity(m * dim);
        let mut slot = vec![0u32; m];
        for (row, &id) in order.iter().enumerate() {
            pts.extend_from_slice(cloud.point(id as usize));
            slot[id as usize] = row as u32;
        }
        Self {
            dim,
            pts,
            slot,
            nodes,
            bounds,
        }
    }

    pub fn len(&self) -> usize {
        self.slot.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slot.is_empty()
    }

    /// Distance from point `id` to its `k`-th nearest other point.
    /// Caller guarantees `1 <= k < len`.
    pub(crate) fn kth_distance(&self, id: usize, k: usize, best: &mut KBest) -> f64 {
        best.reset(k);
        let q_row = self.slot[id] as usize;
        dispatch!(self.dim, D => Fixed::<D>(self).knn_visit(0, q_row, best));
        best.worst()
    }

    /// Number of points other than `id` within `radius`: `< radius` when
    /// `strict`, `<= radius` otherwise.
    pub fn count_within(&self, id: usize, radius: f64, strict: bool) -> usize {
        if self.is_empty() || (strict && radius <= 0.0) || radius < 0.0 {
            return 0;
        }
        let q_row = self.slot[id] as usize;
        // The query itself is at distance 0 and always lands in the count.
        let hits = if strict {
            dispatch!(self.dim, D => Fixed::<D>(self).count_visit::<true>(0, q_row, radius))
        } else {
            dispatch!(self.dim, D => Fixed::<D>(self).count_visit::<false>(0, q_row, radius))
        };
        hits - 1
    }
}

// Runs `$body` with `$d` bound to the dimension as a constant for small
// dimensions, or to 0 (read at run time) otherwise.
macro_rules! dispatch {
    ($dim:expr, $d:ident => $body:expr) => {
        match $dim {
            1 => { const $d: usize = 1; $body }
            2 => { const $d: usize = 2; $body }
            3 => { const $d: usize = 3; $body }
            4 => { const $d: usize = 4; $body }
            5 => { const $d: usize = 5; $body }
            6 => { const $d: usize = 6; $body }
            7 => { const $d: usize = 7; $body }
            8 => { const $d: usize = 8; $body }
            _ => { const $d: usize = 0; $body }
        }
    };
}
use dispatch;

/// Query routines with the dimension known at compile time (`D > 0`).
struct Fixed<'a, const D: usize>(&'a NeighborIndex);

impl<const D: usize> Fixed<'_, D> {
    #[inline(always)]
    fn dim(&self) -> usize {
        if D > 0 {
            D
        } else {
            self.0.dim
        }
    }

    #[inline(always)]
    fn row(&self, r: usize) -> &[f64] {
        let d = self.dim();
        &self.0.pts[r * d..(r + 1) * d]
    }

    #[inline(always)]
    fn bounds(&self, node: usize) -> (&[f64], &[f64]) {
        let d = self.dim();
        let b = &self.0.bounds[node * 2 * d..(node + 1) * 2 * d];
        b.split_at(d)
    }

    fn knn_visit(&self, node: usize, q_row: usize, best: &mut KBest) {
        let nd = self.0.nodes[node];
        let q = self.row(q_row);
        if nd.left == NO_CHILD {
            for r in nd.start as usize..nd.end as usize {
                if r == q_row {
                    continue;
                }
                let bound = best.bound();
                let p = self.row(r);
                let mut d = 0.0f64;
                for i in 0..self.dim() {
                    d = d.max((p[i] - q[i]).abs());
                }
                if d < bound {
                    best.insert(d);
                }
            }
            return;
        }
        let (l, r) = (nd.left as usize, nd.right as usize);
        let dl = self.box_min_dist(l, q);
        let dr = self.box_min_dist(r, q);
        let (first, d_first, second, d_second) = if dl <= dr { (l, dl, r, dr) } else { (r, dr, l, dl) };
        if d_first < best.bound() {
            self.knn_visit(first, q_row, best);
        }
        if d_second < best.bound() {
            self.knn_visit(second, q_row, best);
        }
    }

    fn count_visit<const STRICT: bool>(&self, node: usize, q_row: usize, radius: f64) -> usize {
        let inside = |d: f64| if STRICT { d < radius } else { d <= radius };
        let nd = self.0.nodes[node];
        let q = self.row(q_row);
        if !inside(self.box_min_dist(node, q)) {
            return 0;
        }
        if inside(self.box_max_dist(node, q)) {
            return (nd.end - nd.start) as usize;
        }
        if nd.left == NO_CHILD {
            let mut c = 0;
            for r in nd.start as usize..nd.end as usize {
                let p = self.row(r);
                let mut d = 0.0f64;
                for i in 0..self.dim() {
                    d = d.max((p[i] - q[i]).abs());
                }
                c += usize::from(inside(d));
            }
            return c;
        }
        self.count_visit::<STRICT>(nd.left as usize, q_row, radius)
            + self.count_visit::<STRICT>(nd.right as usize, q_row, radius)
    }

    #[inline(always)]
    fn box_min_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.bounds(node);
        let mut d = 0.0f64;
        for i in 0..self.dim() {
            let x = q[i];
            let gap = if x < lo[i] {
                lo[i] - x
            } else if x > hi[i] {
                x - hi[i]
            } else {
                0.0
            };
            d = d.max(gap);
        }
        d
    }

    #[inline(always)]
    fn box_max_dist(&self, node: usize, q: &[f64]) -> f64 {
        let (lo, hi) = self.bounds(node);
        let mut d = 0.0f64;
        for i in 0..self.dim() {
            let x = q[i];
            d = d.max((x - lo[i]).abs()).max((hi[i] - x).abs());
        }
        d
    }
}

fn build_node(
    cloud: &SamplePointCloud,
    order: &mut [u32],
    start: usize,
    end: usize,
    nodes: &mut Vec<Node>,
    bounds: &mut Vec<f64>,
) -> u32 {
    let dim = cloud.dim();
    let idx = nodes.len();
    nodes.push(Node {
        start: start as u32,
        end: end as u32,
        left: NO_CHILD,
        right: NO_CHILD,
    });
    let mut lo = vec![f64::INFINITY; dim];
    let mut hi = vec![f64::NEG_INFINITY; dim];
    for &id in &order[start..end] {
        for (d, &v) in cloud.point(id as usize).iter().enumerate() {
            lo[d] = lo[d].min(v);
            hi[d] = hi[d].max(v);
        }
    }
    bounds.extend_from_slice(&lo);
    bounds.extend_from_slice(&hi);

    if end - start <= LEAF_SIZE {
        return idx as u32;
    }
    let (split, spread) = (0..dim)
        .map(|d| (d, hi[d] - lo[d]))
        .fold((0, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
    if !(spread > 0.0) {
        return idx as u32;
    }
    let mid = (start + end) / 2;
    order[start..end].select_nth_unstable_by(mid - start, |&a, &b| {
        let va = cloud.point(a as usize)[split];
        let vb = cloud.point(b as usize)[split];
        va.total_cmp(&vb)
    });
    let left = build_node(cloud, order, start, mid, nodes, bounds);
    let right = build_node(cloud, order, mid, end, nodes, bounds);
    nodes[idx].left = left;
    nodes[idx].right = right;
    idx as u32
}

/// The `k` smallest distances seen so far, kept as a binary max-heap.
#[derive(Debug, Default)]
pub(crate) struct KBest {
    k: usize,
    heap: Vec<f64>,
}

impl KBest {
    fn reset(&mut self, k: usize) {
        self.k = k;
        self.heap.clear();
    }

    fn bound(&self) -> f64 {
        if self.heap.len() < self.k {
            f64::INFINITY
        } else {
            self.heap[0]
        }
    }

    fn worst(&self) -> f64 {
        self.heap[0]
    }

    // Only called with `v < bound()`.
    fn insert(&mut self, v: f64) {
        let h = &mut self.heap;
        if h.len() < self.k {
            h.push(v);
            let mut i = h.len() - 1;
            while i > 0 {
                let parent = (i - 1) / 2;
                if h[parent] >= v {
                    break;
                }
                h[i] = h[parent];
                i = parent;
            }
            h[i] = v;
        } else {
            let n = h.len();
            let mut i = 0;
            loop {
                let l = 2 * i + 1;
                if l >= n {
                    break;
                }
                let r = l + 1;
                let c = if r < n && h[r] > h[l] { r } else { l };
                if h[c] <= v {
                    break;
                }
                h[i] = h[c];
                i = c;
            }
            h[i] = v;
        }
    }
}
