//! Straightforward, slow reference computations used to check the library.

/// Average ranks (1-based), ties share the mean rank.
pub fn ranks(xs: &[f64]) -> Vec<f64> {
    let mut idx: Vec<usize> = (0..xs.len()).collect();
    idx.sort_by(|&a, &b| xs[a].partial_cmp(&xs[b]).unwrap());
    let mut out = vec![0.0; xs.len()];
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && xs[idx[j + 1]] == xs[idx[i]] {
            j += 1;
        }
        let r = (i + j) as f64 / 2.0 + 1.0;
        for k in i..=j {
            out[idx[k]] = r;
        }
        i = j + 1;
    }
    out
}

pub fn pearson(a: &[f64], b: &[f64]) -> f64 {
    let n = a.len() as f64;
    let ma = a.iter().sum::<f64>() / n;
    let mb = b.iter().sum::<f64>() / n;
    let cov: f64 = a.iter().zip(b).map(|(x, y)| (x - ma) * (y - mb)).sum();
    let va: f64 = a.iter().map(|x| (x - ma).powi(2)).sum();
    let vb: f64 = b.iter().map(|y| (y - mb).powi(2)).sum();
    cov / (va * vb).sqrt()
}

pub fn spearman(a: &[f64], b: &[f64]) -> f64 {
    pearson(&ranks(a), &ranks(b))
}

/// The seven saccade-network features computed by brute force from an
/// adjacency matrix: all-pairs distances by Floyd–Warshall, shortest paths
/// enumerated as simple paths, triangles by triple enumeration and bridges
/// by removing each edge and recounting components.
pub fn graph_features(n: usize, directed: &[(usize, usize)]) -> [f64; 7] {
    let mut d = vec![vec![false; n]; n];
    let mut u = vec![vec![false; n]; n];
    for &(a, b) in directed {
        if a != b {
            d[a][b] = true;
            u[a][b] = true;
            u[b][a] = true;
        }
    }
    let nf = n as f64;
    let deg: Vec<usize> = (0..n).map(|v| (0..n).filter(|&w| u[v][w]).count()).collect();
    let edges: Vec<(usize, usize)> = (0..n).flat_map(|a| (a + 1..n).map(move |b| (a, b))).filter(|&(a, b)| u[a][b]).collect();
    let m = edges.len() as f64;
    let avg_degree = if n == 0 { 0.0 } else { deg.iter().sum::<usize>() as f64 / nf };
    let density = if n < 2 { 0.0 } else { 2.0 * m / (nf * (nf - 1.0)) };

    let mut clustering = 0.0;
    let mut triangles = 0usize;
    let mut triples = 0usize;
    for v in 0..n {
        let nb: Vec<usize> = (0..n).filter(|&w| u[v][w]).collect();
        let k = nb.len();
        if k < 2 {
            continue;
        }
        let mut links = 0;
        for i in 0..k {
            for j in i + 1..k {
                if u[nb[i]][nb[j]] {
                    links += 1;
                }
            }
        }
        clustering += links as f64 / (k * (k - 1) / 2) as f64;
        triples += k * (k - 1) / 2;
    }
    for a in 0..n {
        for b in a + 1..n {
            for c in b + 1..n {
                if u[a][b] && u[b][c] && u[a][c] {
                    triangles += 1;
                }
            }
        }
    }
    let avg_clustering = if n == 0 { 0.0 } else { clustering / nf };
    let transitivity = if triples == 0 { 0.0 } else { 3.0 * triangles as f64 / triples as f64 };

    const INF: usize = usize::MAX / 4;
    let mut dist = vec![vec![INF; n]; n];
    for a in 0..n {
        dist[a][a] = 0;
        for b in 0..n {
            if d[a][b] {
                dist[a][b] = 1;
            }
        }
    }
    for k in 0..n {
        for a in 0..n {
            for b in 0..n {
                if dist[a][k] + dist[k][b] < dist[a][b] {
                    dist[a][b] = dist[a][k] + dist[k][b];
                }
            }
        }
    }

    let mut betweenness = vec![0.0; n];
    if n >= 3 {
        for s in 0..n {
            for t in 0..n {
                if s == t || dist[s][t] >= INF {
                    continue;
                }
                let mut paths = Vec::new();
                let mut path = vec![s];
                simple_paths(&d, t, dist[s][t], &mut path, &mut paths);
                let total = paths.len() as f64;
                for p in &paths {
                    for &v in &p[1..p.len() - 1] {
                        betweenness[v] += 1.0 / total;
                    }
                }
            }
        }
    }
    let avg_betweenness = if n < 3 { 0.0 } else { betweenness.iter().sum::<f64>() / ((nf - 1.0) * (nf - 2.0)) / nf };

    let avg_closeness = if n < 2 {
        0.0
    } else {
        let mut sum = 0.0;
        for v in 0..n {
            let reach: Vec<usize> = (0..n).filter(|&w| w != v && dist[v][w] < INF).map(|w| dist[v][w]).collect();
            if !reach.is_empty() {
                let r = reach.len() as f64;
                sum += r / (nf - 1.0) * (r / reach.iter().sum::<usize>() as f64);
            }
        }
        sum / nf
    };

    let components = |skip: Option<(usize, usize)>| {
        let mut seen = vec![false; n];
        let mut count = 0;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(x) = stack.pop() {
                for y in 0..n {
                    let removed = skip == Some((x.min(y), x.max(y)));
                    if u[x][y] && !removed && !seen[y] {
                        seen[y] = true;
                        stack.push(y);
                    }
                }
            }
        }
        count
    };
    let base = components(None);
    let bridges = edges.iter().filter(|&&e| components(Some(e)) > base).count();

    [avg_degree, density, avg_clustering, avg_betweenness, avg_closeness, transitivity, bridges as f64]
}

/// Every simple path from the last node of `path` to `t` with exactly `len`
/// further edges.
fn simple_paths(d: &[Vec<bool>], t: usize, len: usize, path: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
    let v = *path.last().unwrap();
    if len == 0 {
        if v == t {
            out.push(path.clone());
        }
        return;
    }
    for w in 0..d.len() {
        if d[v][w] && !path.contains(&w) {
            path.push(w);
            simple_paths(d, t, len - 1, path, out);
            path.pop();
        }
    }
}

/// A fixation reduced to what the scanpath distance needs.
#[derive(Debug, Clone, Copy)]
pub struct Fix {
    pub duration: f64,
    pub x: f64,
    pub y: f64,
}

/// Scanpath distance by enumerating every alignment of `a` and `b`. Uses
/// the default screen geometry (centre 1280×720, distance 77, 1/60 per px).
pub fn scasim_exhaustive(a: &[Fix], b: &[Fix], modulator: f64) -> f64 {
    let angle = |f: &Fix| {
        let dx = (f.x - 1280.0) / 60.0;
        let dy = (f.y - 720.0) / 60.0;
        ((dx / 77.0).atan().to_degrees(), (dy / 77.0).atan().to_degrees())
    };
    fn go(a: &[Fix], b: &[Fix], sub: &dyn Fn(&Fix, &Fix) -> f64) -> f64 {
        match (a.split_first(), b.split_first()) {
            (None, None) => 0.0,
            (Some((f, ra)), None) => f.duration + go(ra, b, sub),
            (None, Some((g, rb))) => g.duration + go(a, rb, sub),
            (Some((f, ra)), Some((g, rb))) => {
                let matched = sub(f, g) + go(ra, rb, sub);
                let left = f.duration + go(ra, b, sub);
                let right = g.duration + go(a, rb, sub);
                matched.min(left).min(right)
            }
        }
    }
    let sub = |f: &Fix, g: &Fix| {
        let (p, q) = (angle(f), angle(g));
        let theta = ((p.0 - q.0).powi(2) + (p.1 - q.1).powi(2)).sqrt();
        let m = modulator.powf(theta);
        (f.duration - g.duration).abs() * m + (f.duration + g.duration) * (1.0 - m)
    };
    go(a, b, &sub)
}

/// Solves a square system by Gaussian elimination with partial pivoting.
pub fn gauss_solve(a: &[Vec<f64>], b: &[f64]) -> Vec<f64> {
    let n = b.len();
    let mut m: Vec<Vec<f64>> = a.iter().zip(b).map(|(r, &v)| r.iter().copied().chain([v]).collect()).collect();
    for col in 0..n {
        let pivot = (col..n).max_by(|&i, &j| m[i][col].abs().total_cmp(&m[j][col].abs())).unwrap();
        m.swap(col, pivot);
        for r in col + 1..n {
            let f = m[r][col] / m[col][col];
            for c in col..=n {
                m[r][c] -= f * m[col][c];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| m[r][c] * x[c]).sum();
        x[r] = (m[r][n] - s) / m[r][r];
    }
    x
}

/// Threshold and gain of the best depth-1 split for the first boosting
/// round, by exhaustive search over midpoints, written from the
/// second-order logistic loss directly.
pub fn brute_force_stump(x: &[f64], y: &[u8], alpha: f64, lambda: f64, min_child_weight: f64) -> Option<(f64, f64)> {
    let n = y.len();
    let prior = y.iter().map(|&v| f64::from(v)).sum::<f64>() / n as f64;
    let g: Vec<f64> = y.iter().map(|&v| prior - f64::from(v)).collect();
    let h = vec![prior * (1.0 - prior); n];
    let shrink = |s: f64| s.signum() * (s.abs() - alpha).max(0.0);
    let score = |idx: &[usize]| {
        let gs: f64 = idx.iter().map(|&i| g[i]).sum();
        let hs: f64 = idx.iter().map(|&i| h[i]).sum();
        shrink(gs).powi(2) / (hs + lambda)
    };
    let all: Vec<usize> = (0..n).collect();
    let mut values: Vec<f64> = x.to_vec();
    values.sort_by(f64::total_cmp);
    values.dedup();
    let mut best: Option<(f64, f64)> = None;
    for w in values.windows(2) {
        let t = (w[0] + w[1]) / 2.0;
        let left: Vec<usize> = (0..n).filter(|&i| x[i] < t).collect();
        let right: Vec<usize> = (0..n).filter(|&i| x[i] >= t).collect();
        let hl: f64 = left.iter().map(|&i| h[i]).sum();
        let hr: f64 = right.iter().map(|&i| h[i]).sum();
        if hl < min_child_weight || hr < min_child_weight {
            continue;
        }
        let gain = 0.5 * (score(&left) + score(&right) - score(&all));
        if gain > 1e-12 && best.is_none_or(|(_, b)| gain > b + 1e-12) {
            best = Some((t, gain));
        }
    }
    best
}
