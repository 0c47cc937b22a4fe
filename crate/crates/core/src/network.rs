//! Saccade networks: words as nodes, a directed edge for every transition
//! between two different words in consecutive fixations.
//!
//! Measure conventions: degree, density, clustering, transitivity and
//! bridges use the undirected simple projection; betweenness and closeness
//! use directed unweighted shortest paths. Every word of the paragraph is a
//! node, fixated or not.

use std::collections::{BTreeSet, VecDeque};

use crate::ingest::{Fixation, Trial};

pub const FEATURE_NAMES: [&str; 7] = [
    "avg_degree",
    "density",
    "avg_clustering",
    "avg_betweenness",
    "avg_closeness",
    "transitivity",
    "num_bridges",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SaccadeGraph {
    n_nodes: usize,
    /// 0-based directed edges, no self loops.
    edges: BTreeSet<(usize, usize)>,
}

impl SaccadeGraph {
    /// Builds a simple digraph; self loops and out-of-range endpoints are
    /// dropped, duplicates collapse.
    pub fn from_edges(n_nodes: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let edges = edges
            .into_iter()
            .filter(|&(u, v)| u != v && u < n_nodes && v < n_nodes)
            .collect();
        SaccadeGraph { n_nodes, edges }
    }

    pub fn n_nodes(&self) -> usize {
        self.n_nodes
    }

    pub fn directed_edges(&self) -> &BTreeSet<(usize, usize)> {
        &self.edges
    }

    pub fn undirected_edges(&self) -> BTreeSet<(usize, usize)> {
        self.edges.iter().map(|&(u, v)| (u.min(v), u.max(v))).collect()
    }

    fn undirected_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for (u, v) in self.undirected_edges() {
            adj[u].push(v);
            adj[v].push(u);
        }
        for a in &mut adj {
            a.sort_unstable();
        }
        adj
    }

    fn out_adjacency(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.n_nodes];
        for &(u, v) in &self.edges {
            adj[u].push(v);
        }
        adj
    }

    /// Edge list with 1-based word indices, one `u v` pair per line,
    /// preceded by a `# nodes N` header.
    pub fn to_edge_list(&self) -> String {
        let mut s = format!("# nodes {}\n", self.n_nodes);
        for &(u, v) in &self.edges {
            s.push_str(&format!("{} {}\n", u + 1, v + 1));
        }
        s
    }
}

pub fn build_saccade_graph(trial: &Trial) -> SaccadeGraph {
    build_from_scanpath(trial.n_words(), &trial.scanpath)
}

/// Consecutive fixations on two distinct words add an edge; an off-text
/// fixation breaks the chain.
pub fn build_from_scanpath(n_words: usize, scanpath: &[Fixation]) -> SaccadeGraph {
    let on_text = |f: &Fixation| f.word_index.filter(|&w| w >= 1 && w <= n_words).map(|w| w - 1);
    let edges = scanpath
        .windows(2)
        .filter_map(|pair| Some((on_text(&pair[0])?, on_text(&pair[1])?)));
    SaccadeGraph::from_edges(n_words, edges)
}

/// The seven network features in [`FEATURE_NAMES`] order.
pub fn network_features(graph: &SaccadeGraph) -> [f64; 7] {
    let n = graph.n_nodes;
    if n == 0 {
        return [0.0; 7];
    }
    let nf = n as f64;
    let adj = graph.undirected_adjacency();
    let m = graph.undirected_edges().len() as f64;

    let avg_degree = 2.0 * m / nf;
    let density = if n < 2 { 0.0 } else { 2.0 * m / (nf * (nf - 1.0)) };

    let mut clustering_sum = 0.0;
    let mut closed = 0.0;
    let mut triplets = 0.0;
    for nbrs in &adj {
        let k = nbrs.len();
        if k < 2 {
            continue;
        }
        let mut links = 0usize;
        for (i, &a) in nbrs.iter().enumerate() {
            for &b in &nbrs[i + 1..] {
                if adj[a].binary_search(&b).is_ok() {
                    links += 1;
                }
            }
        }
        let pairs = (k * (k - 1) / 2) as f64;
        clustering_sum += links as f64 / pairs;
        closed += links as f64;
        triplets += pairs;
    }
    let avg_clustering = clustering_sum / nf;
    let transitivity = if triplets > 0.0 { closed / triplets } else { 0.0 };

    let out = graph.out_adjacency();
    let avg_betweenness = if n < 3 {
        0.0
    } else {
        betweenness(&out).iter().sum::<f64>() / ((nf - 1.0) * (nf - 2.0)) / nf
    };
    let avg_closeness = if n < 2 {
        0.0
    } else {
        (0..n).map(|v| closeness(&out, v)).sum::<f64>() / nf
    };

    [
        avg_degree,
        density,
        avg_clustering,
        avg_betweenness,
        avg_closeness,
        transitivity,
        bridges(&adj) as f64,
    ]
}

/// Unnormalised directed betweenness (Brandes).
fn betweenness(out: &[Vec<usize>]) -> Vec<f64> {
    let n = out.len();
    let mut cb = vec![0.0; n];
    let mut order = Vec::with_capacity(n);
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0f64; n];
    let mut dist = vec![-1i64; n];
    let mut delta = vec![0.0f64; n];
    let mut queue = VecDeque::new();
    for s in 0..n {
        order.clear();
        for p in &mut preds {
            p.clear();
        }
        sigma.fill(0.0);
        dist.fill(-1);
        delta.fill(0.0);
        sigma[s] = 1.0;
        dist[s] = 0;
        queue.push_back(s);
        while let Some(v) = queue.pop_front() {
            order.push(v);
            for &w in &out[v] {
                if dist[w] < 0 {
                    dist[w] = dist[v] + 1;
                    queue.push_back(w);
                }
                if dist[w] == dist[v] + 1 {
                    sigma[w] += sigma[v];
                    preds[w].push(v);
                }
            }
        }
        for &w in order.iter().rev() {
            for &v in &preds[w] {
                delta[v] += sigma[v] / sigma[w] * (1.0 + delta[w]);
            }
            if w != s {
                cb[w] += delta[w];
            }
        }
    }
    cb
}

/// Outward closeness with the Wasserman–Faust correction for unreachable
/// nodes.
fn closeness(out: &[Vec<usize>], v: usize) -> f64 {
    let n = out.len();
    let mut dist = vec![usize::MAX; n];
    dist[v] = 0;
    let mut queue = VecDeque::from([v]);
    let (mut reached, mut total) = (0usize, 0usize);
    while let Some(u) = queue.pop_front() {
        for &w in &out[u] {
            if dist[w] == usize::MAX {
                dist[w] = dist[u] + 1;
                reached += 1;
                total += dist[w];
                queue.push_back(w);
            }
        }
    }
    if reached == 0 {
        return 0.0;
    }
    let r = reached as f64;
    (r / (n as f64 - 1.0)) * (r / total as f64)
}

/// Number of bridges in a simple undirected graph (Tarjan low-link).
fn bridges(adj: &[Vec<usize>]) -> usize {
    let n = adj.len();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut timer = 0;
    let mut count = 0;
    for root in 0..n {
        if disc[root] != usize::MAX {
            continue;
        }
        // (node, parent, next neighbour slot)
        let mut stack: Vec<(usize, usize, usize)> = vec![(root, usize::MAX, 0)];
        disc[root] = timer;
        low[root] = timer;
        timer += 1;
        while let Some(&mut (v, parent, ref mut slot)) = stack.last_mut() {
            if *slot < adj[v].len() {
                let w = adj[v][*slot];
                *slot += 1;
                if w == parent {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, v, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[v]);
                    if low[v] > disc[p] {
                        count += 1;
                    }
                }
            }
        }
    }
    count
}
