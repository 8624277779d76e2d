//! Spatial indexes over point sets in the plane.

use std::collections::HashMap;

use num_complex::Complex64;

const LEAF: usize = 16;

#[derive(Debug, Clone)]
struct Node {
    lo: [f64; 2],
    hi: [f64; 2],
    start: usize,
    end: usize,
    children: Option<(usize, usize)>,
}

/// Static 2-d tree for closed-disk range queries.
///
/// Membership is decided by the same `(p − z).norm() ≤ r` test used by the
/// brute-force paths, so indexed and unindexed counts agree exactly.
#[derive(Debug, Clone)]
pub struct DiskIndex {
    perm: Vec<usize>,
    pts: Vec<Complex64>,
    nodes: Vec<Node>,
}

impl DiskIndex {
    pub fn new(points: &[Complex64]) -> Self {
        let mut idx = Self {
            perm: (0..points.len()).collect(),
            pts: points.to_vec(),
            nodes: Vec::new(),
        };
        if !points.is_empty() {
            idx.build(0, points.len(), 0);
        }
        idx
    }

    fn build(&mut self, start: usize, end: usize, depth: usize) -> usize {
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for &i in &self.perm[start..end] {
            let p = self.pts[i];
            lo[0] = lo[0].min(p.re);
            lo[1] = lo[1].min(p.im);
            hi[0] = hi[0].max(p.re);
            hi[1] = hi[1].max(p.im);
        }
        let id = self.nodes.len();
        self.nodes.push(Node { lo, hi, start, end, children: None });
        if end - start > LEAF {
            let axis = if hi[0] - lo[0] >= hi[1] - lo[1] { 0 } else { 1 };
            let mid = start + (end - start) / 2;
            let pts = &self.pts;
            let key = |i: &usize| if axis == 0 { pts[*i].re } else { pts[*i].im };
            self.perm[start..end].select_nth_unstable_by(mid - start, |a, b| {
                key(a).total_cmp(&key(b)).then(a.cmp(b))
            });
            let l = self.build(start, mid, depth + 1);
            let r = self.build(mid, end, depth + 1);
            self.nodes[id].children = Some((l, r));
        }
        id
    }

    pub fn len(&self) -> usize {
        self.pts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pts.is_empty()
    }

    /// Calls `visit(i, |p_i − z|)` for every point with `|p_i − z| ≤ r`.
    ///
    /// Visiting order is fixed by the tree layout, which depends only on the
    /// input points.
    pub fn for_each_within<F: FnMut(usize, f64)>(&self, z: Complex64, r: f64, mut visit: F) {
        if self.nodes.is_empty() || !(r >= 0.0) {
            return;
        }
        // Boxes are pruned with a little slack; the exact test below decides.
        let slack = r * (1.0 + 1e-12) + 1e-300;
        let mut stack = vec![0usize];
        while let Some(n) = stack.pop() {
            let node = &self.nodes[n];
            let dx = (node.lo[0] - z.re).max(z.re - node.hi[0]).max(0.0);
            let dy = (node.lo[1] - z.im).max(z.im - node.hi[1]).max(0.0);
            if dx.hypot(dy) > slack {
                continue;
            }
            match node.children {
                Some((l, rgt)) => {
                    stack.push(rgt);
                    stack.push(l);
                }
                None => {
                    for &i in &self.perm[node.start..node.end] {
                        let d = (self.pts[i] - z).norm();
                        if d <= r {
                            visit(i, d);
                        }
                    }
                }
            }
        }
    }

    pub fn within(&self, z: Complex64, r: f64) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        self.for_each_within(z, r, |i, d| out.push((i, d)));
        out.sort_by_key(|e| e.0);
        out
    }
}

/// Uniform grid hash with unit cells, used for the short-range pair scan.
#[derive(Debug, Clone)]
pub struct GridHash {
    cell: f64,
    buckets: HashMap<(i64, i64), Vec<usize>>,
}

impl GridHash {
    pub fn new(points: &[Complex64], cell: f64) -> Self {
        let mut buckets: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            buckets.entry(Self::key(*p, cell)).or_default().push(i);
        }
        Self { cell, buckets }
    }

    fn key(p: Complex64, cell: f64) -> (i64, i64) {
        ((p.re / cell).floor() as i64, (p.im / cell).floor() as i64)
    }

    /// Unordered pairs `(i, j)`, `i < j`, with `|p_i − p_j| < cell`, sorted.
    pub fn close_pairs(&self, points: &[Complex64]) -> Vec<(usize, usize, f64)> {
        let mut out = Vec::new();
        for (i, p) in points.iter().enumerate() {
            let (kx, ky) = Self::key(*p, self.cell);
            for dx in -1..=1 {
                for dy in -1..=1 {
                    if let Some(b) = self.buckets.get(&(kx + dx, ky + dy)) {
                        for &j in b {
                            if j > i {
                                let d = (points[j] - p).norm();
                                if d < self.cell {
                                    out.push((i, j, d));
                                }
                            }
                        }
                    }
                }
            }
        }
        out.sort_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        out
    }
}
