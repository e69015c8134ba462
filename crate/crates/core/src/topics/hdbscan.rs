//! HDBSCAN over Euclidean distance.
//!
//! Core distance is the distance to the `min_samples`-th nearest neighbour,
//! counting the point itself, so `min_samples = 1` gives zero core distances.
//! The mutual-reachability MST is built with a dense Prim pass (O(n²)
//! distance evaluations, no n×n storage), then turned into a single-linkage
//! hierarchy, condensed at `min_cluster_size` and cut by excess of mass.

use std::collections::VecDeque;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{EmbeddingMatrix, TopicError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HdbscanParams {
    pub min_cluster_size: usize,
    pub min_samples: usize,
}

impl Default for HdbscanParams {
    fn default() -> Self {
        HdbscanParams { min_cluster_size: 15, min_samples: 15 }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ClusterLabels {
    /// −1 marks noise (and rows excluded as empty).
    pub labels: Vec<i64>,
    pub k: usize,
}

impl ClusterLabels {
    pub fn noise_fraction(&self) -> f64 {
        if self.labels.is_empty() {
            return 0.0;
        }
        self.labels.iter().filter(|&&l| l < 0).count() as f64 / self.labels.len() as f64
    }

    pub fn sizes(&self) -> Vec<usize> {
        let mut s = vec![0; self.k];
        for &l in &self.labels {
            if l >= 0 {
                s[l as usize] += 1;
            }
        }
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Edge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

struct Points<'a> {
    data: &'a [f64],
    dim: usize,
}

impl Points<'_> {
    fn len(&self) -> usize {
        if self.dim == 0 {
            0
        } else {
            self.data.len() / self.dim
        }
    }

    fn dist(&self, i: usize, j: usize) -> f64 {
        let a = &self.data[i * self.dim..(i + 1) * self.dim];
        let b = &self.data[j * self.dim..(j + 1) * self.dim];
        let mut s = 0.0;
        for k in 0..self.dim {
            let d = a[k] - b[k];
            s += d * d;
        }
        s.sqrt()
    }
}

fn flatten(rows: &[Vec<f64>]) -> (Vec<f64>, usize) {
    let dim = rows.first().map_or(0, Vec::len);
    (rows.iter().flatten().copied().collect(), dim)
}

fn core_distances(pts: &Points, min_samples: usize) -> Vec<f64> {
    let n = pts.len();
    let k = min_samples.clamp(1, n);
    (0..n)
        .into_par_iter()
        .map(|i| {
            let mut d: Vec<f64> = (0..n).map(|j| pts.dist(i, j)).collect();
            let (_, kth, _) = d.select_nth_unstable_by(k - 1, f64::total_cmp);
            *kth
        })
        .collect()
}

/// Prim over mutual reachability. The next vertex is the cheapest one
/// outside the tree, ties to the smallest index; edges come back sorted by
/// (weight, min endpoint, max endpoint).
fn prim(pts: &Points, core: &[f64]) -> Vec<Edge> {
    let n = pts.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut from = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut cur = 0;
    in_tree[0] = true;
    for _ in 1..n {
        best.par_iter_mut()
            .zip(from.par_iter_mut())
            .enumerate()
            .for_each(|(j, (b, f))| {
                if in_tree[j] {
                    return;
                }
                let d = pts.dist(cur, j).max(core[cur]).max(core[j]);
                if d < *b {
                    *b = d;
                    *f = cur;
                }
            });
        let mut next = usize::MAX;
        for j in 0..n {
            if !in_tree[j] && (next == usize::MAX || best[j] < best[next]) {
                next = j;
            }
        }
        in_tree[next] = true;
        edges.push(Edge { a: from[next].min(next), b: from[next].max(next), weight: best[next] });
        cur = next;
    }
    edges.sort_by(|x, y| x.weight.total_cmp(&y.weight).then(x.a.cmp(&y.a)).then(x.b.cmp(&y.b)));
    edges
}

/// Mutual-reachability minimum spanning tree of `rows`.
pub fn mutual_reachability_mst(rows: &[Vec<f64>], min_samples: usize) -> Vec<Edge> {
    let (data, dim) = flatten(rows);
    let pts = Points { data: &data, dim };
    let core = core_distances(&pts, min_samples);
    prim(&pts, &core)
}

struct Merge {
    left: usize,
    right: usize,
    dist: f64,
    size: usize,
}

/// Single-linkage merges; node `n + i` is created by merge `i`.
fn single_linkage(n: usize, edges: &[Edge]) -> Vec<Merge> {
    let mut parent: Vec<usize> = (0..2 * n).collect();
    let mut size = vec![1usize; 2 * n];
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for (i, e) in edges.iter().enumerate() {
        let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
        let node = n + i;
        parent[ra] = node;
        parent[rb] = node;
        size[node] = size[ra] + size[rb];
        merges.push(Merge { left: ra.min(rb), right: ra.max(rb), dist: e.weight, size: size[node] });
    }
    merges
}

/// Condensed-tree entry: a point (or child cluster) leaving `parent` at `lambda`.
struct CondEntry {
    parent: usize,
    child: Child,
    lambda: f64,
    size: usize,
}

enum Child {
    Point(usize),
    Cluster(usize),
}

fn lambda_of(dist: f64) -> f64 {
    if dist > 0.0 {
        1.0 / dist
    } else {
        f64::INFINITY
    }
}

/// λ − birth without producing NaN when both are infinite.
fn persistence(lambda: f64, birth: f64) -> f64 {
    if lambda == birth {
        0.0
    } else {
        lambda - birth
    }
}

fn leaves(n: usize, merges: &[Merge], node: usize, out: &mut Vec<usize>) {
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let m = &merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
}

/// Condenses the hierarchy. Cluster 0 is the root; a merge at distance zero
/// is not treated as a split, its points all leave at λ = ∞.
fn condense(n: usize, merges: &[Merge], mcs: usize) -> (Vec<CondEntry>, usize) {
    let node_size = |x: usize| if x < n { 1 } else { merges[x - n].size };
    let mut entries = Vec::new();
    let mut label = vec![usize::MAX; 2 * n];
    let root = 2 * n - 2;
    label[root] = 0;
    let mut next_label = 1;
    let mut queue = VecDeque::from([root]);
    let mut buf = Vec::new();
    while let Some(node) = queue.pop_front() {
        let m = &merges[node - n];
        let cl = label[node];
        let lambda = lambda_of(m.dist);
        let (l, r) = (m.left, m.right);
        let (ls, rs) = (node_size(l), node_size(r));
        let mut fall_out = |x: usize, entries: &mut Vec<CondEntry>| {
            buf.clear();
            leaves(n, merges, x, &mut buf);
            for &p in &buf {
                entries.push(CondEntry { parent: cl, child: Child::Point(p), lambda, size: 1 });
            }
        };
        if m.dist == 0.0 {
            fall_out(l, &mut entries);
            fall_out(r, &mut entries);
        } else if ls >= mcs && rs >= mcs {
            for (x, s) in [(l, ls), (r, rs)] {
                label[x] = next_label;
                entries.push(CondEntry { parent: cl, child: Child::Cluster(next_label), lambda, size: s });
                next_label += 1;
                queue.push_back(x);
            }
        } else if ls < mcs && rs < mcs {
            fall_out(l, &mut entries);
            fall_out(r, &mut entries);
        } else {
            let (small, big) = if ls < mcs { (l, r) } else { (r, l) };
            fall_out(small, &mut entries);
            label[big] = cl;
            queue.push_back(big);
        }
    }
    (entries, next_label)
}

/// Excess-of-mass selection. Returns (selected flags, parent of each cluster).
fn select_eom(entries: &[CondEntry], n_clusters: usize) -> (Vec<bool>, Vec<usize>) {
    let mut birth = vec![0.0; n_clusters];
    let mut parent = vec![usize::MAX; n_clusters];
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for e in entries {
        if let Child::Cluster(c) = e.child {
            birth[c] = e.lambda;
            parent[c] = e.parent;
            children[e.parent].push(c);
        }
    }
    let mut stability = vec![0.0; n_clusters];
    for e in entries {
        stability[e.parent] += persistence(e.lambda, birth[e.parent]) * e.size as f64;
    }
    let mut selected = vec![false; n_clusters];
    let mut subtree = stability.clone();
    // children always carry larger labels than their parent
    for c in (1..n_clusters).rev() {
        let child_sum: f64 = children[c].iter().map(|&k| subtree[k]).sum();
        if children[c].is_empty() {
            selected[c] = true;
        } else if child_sum >= stability[c] {
            // ties prefer the finer clusters
            subtree[c] = child_sum;
        } else {
            selected[c] = true;
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(&children[k]);
            }
        }
    }
    if n_clusters > 0 && children[0].is_empty() {
        selected[0] = true;
    }
    (selected, parent)
}

fn cluster_points(n: usize, data: &[f64], dim: usize, params: HdbscanParams) -> Vec<i64> {
    let pts = Points { data, dim };
    let core = core_distances(&pts, params.min_samples);
    let edges = prim(&pts, &core);
    let merges = single_linkage(n, &edges);
    let (entries, n_clusters) = condense(n, &merges, params.min_cluster_size);
    let (selected, parent) = select_eom(&entries, n_clusters);

    // the root is only ever selected alone; it keeps just its densest points
    let root_max_lambda = entries
        .iter()
        .filter(|e| e.parent == 0 && matches!(e.child, Child::Point(_)))
        .map(|e| e.lambda)
        .fold(f64::NEG_INFINITY, f64::max);
    let mut raw = vec![-1i64; n];
    for e in entries.iter() {
        let Child::Point(p) = e.child else { continue };
        let mut c = e.parent;
        loop {
            if selected[c] {
                if c != 0 || e.lambda >= root_max_lambda {
                    raw[p] = c as i64;
                }
                break;
            }
            if c == 0 {
                break;
            }
            c = parent[c];
        }
    }
    renumber(&raw)
}

/// Relabels clusters 0..k by size (descending), ties by smallest member index.
fn renumber(raw: &[i64]) -> Vec<i64> {
    let mut stats: std::collections::BTreeMap<i64, (usize, usize)> = Default::default();
    for (i, &l) in raw.iter().enumerate() {
        if l >= 0 {
            let e = stats.entry(l).or_insert((0, i));
            e.0 += 1;
        }
    }
    let mut order: Vec<(i64, usize, usize)> = stats.into_iter().map(|(l, (s, first))| (l, s, first)).collect();
    order.sort_by(|a, b| b.1.cmp(&a.1).then(a.2.cmp(&b.2)));
    let map: std::collections::HashMap<i64, i64> =
        order.iter().enumerate().map(|(new, (old, _, _))| (*old, new as i64)).collect();
    raw.iter().map(|l| if *l >= 0 { map[l] } else { -1 }).collect()
}

fn check(n: usize, params: HdbscanParams) -> Result<(), TopicError> {
    if params.min_cluster_size < 2 {
        return Err(TopicError::Parameter(format!("min_cluster_size {} < 2", params.min_cluster_size)));
    }
    if params.min_samples < 1 {
        return Err(TopicError::Parameter("min_samples must be at least 1".into()));
    }
    if n < params.min_cluster_size {
        return Err(TopicError::TooFewPoints { n, min_cluster_size: params.min_cluster_size });
    }
    Ok(())
}

/// Clusters the non-empty rows of `m`; empty rows are labelled −1.
pub fn hdbscan(m: &EmbeddingMatrix, params: HdbscanParams) -> Result<ClusterLabels, TopicError> {
    let active = m.active_rows();
    check(active.len(), params)?;
    let sub = m.select(&active);
    let data: Vec<f64> = (0..sub.len()).flat_map(|i| sub.row(i).to_vec()).collect();
    let inner = cluster_points(active.len(), &data, m.dim, params);
    let mut labels = vec![-1; m.len()];
    for (&i, &l) in active.iter().zip(&inner) {
        labels[i] = l;
    }
    let k = labels.iter().copied().max().map_or(0, |mx| (mx + 1).max(0) as usize);
    Ok(ClusterLabels { labels, k })
}

pub fn hdbscan_rows(rows: &[Vec<f64>], params: HdbscanParams) -> Result<ClusterLabels, TopicError> {
    check(rows.len(), params)?;
    let (data, dim) = flatten(rows);
    let labels = cluster_points(rows.len(), &data, dim, params);
    let k = labels.iter().copied().max().map_or(0, |mx| (mx + 1).max(0) as usize);
    Ok(ClusterLabels { labels, k })
}
