//! Reference solvers and instance generators shared by the integration tests.
//! The oracles work from raw instance data and never call library evaluators.

#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// TSPLIB EUC_2D distance.
pub fn euc2d(a: (f64, f64), b: (f64, f64)) -> f64 {
    let d = ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt();
    (d + 0.5).floor()
}

/// Held-Karp dynamic program over subsets; exact optimum tour length.
pub fn held_karp(coords: &[(f64, f64)]) -> f64 {
    let n = coords.len();
    let full = 1usize << n;
    let mut dp = vec![vec![f64::INFINITY; n]; full];
    dp[1][0] = 0.0;
    for mask in 1..full {
        if mask & 1 == 0 {
            continue;
        }
        for last in 0..n {
            let cur = dp[mask][last];
            if !cur.is_finite() {
                continue;
            }
            for next in 1..n {
                if mask & (1 << next) != 0 {
                    continue;
                }
                let m = mask | (1 << next);
                let c = cur + euc2d(coords[last], coords[next]);
                if c < dp[m][next] {
                    dp[m][next] = c;
                }
            }
        }
    }
    (1..n)
        .map(|last| dp[full - 1][last] + euc2d(coords[last], coords[0]))
        .fold(f64::INFINITY, f64::min)
}

/// Calls `f` on every permutation of `0..n` (Heap's algorithm).
pub fn for_each_permutation(n: usize, mut f: impl FnMut(&[usize])) {
    let mut p: Vec<usize> = (0..n).collect();
    let mut c = vec![0usize; n];
    f(&p);
    let mut i = 0;
    while i < n {
        if c[i] < i {
            if i % 2 == 0 {
                p.swap(0, i);
            } else {
                p.swap(c[i], i);
            }
            f(&p);
            c[i] += 1;
            i = 0;
        } else {
            c[i] = 0;
            i += 1;
        }
    }
}

/// Brute-force TSP optimum; cross-checks Held-Karp on tiny instances.
pub fn brute_force_tsp(coords: &[(f64, f64)]) -> f64 {
    let n = coords.len();
    let mut best = f64::INFINITY;
    for_each_permutation(n - 1, |p| {
        let mut len = euc2d(coords[0], coords[p[0] + 1]);
        for w in p.windows(2) {
            len += euc2d(coords[w[0] + 1], coords[w[1] + 1]);
        }
        len += euc2d(coords[p[n - 2] + 1], coords[0]);
        best = best.min(len);
    });
    best
}

/// Minimum bandwidth over all labelings of the undirected `edges`.
pub fn exhaustive_bandwidth(n: usize, edges: &[(usize, usize)]) -> usize {
    let mut best = usize::MAX;
    for_each_permutation(n, |label| {
        let bw = edges
            .iter()
            .map(|&(a, b)| label[a].abs_diff(label[b]))
            .max()
            .unwrap_or(0);
        best = best.min(bw);
    });
    best
}

/// Maximum over orderings of the sum of entries above the induced diagonal.
pub fn exhaustive_lop(n: usize, m: &[f64]) -> f64 {
    let mut best = f64::NEG_INFINITY;
    for_each_permutation(n, |order| {
        let mut v = 0.0;
        for i in 0..n {
            for j in i + 1..n {
                v += m[order[i] * n + order[j]];
            }
        }
        best = best.max(v);
    });
    best
}

/// Shortest-path tree toward `dest`: next hop per node, or `None` when a
/// node has two equally short next hops.
pub fn dijkstra_next_hops(n: usize, links: &[(usize, usize, f64)], dest: usize) -> Option<Vec<usize>> {
    let mut adj = vec![Vec::new(); n];
    for &(a, b, c) in links {
        adj[a].push((b, c));
        adj[b].push((a, c));
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut done = vec![false; n];
    dist[dest] = 0.0;
    for _ in 0..n {
        let u = (0..n)
            .filter(|&v| !done[v])
            .min_by(|&a, &b| dist[a].total_cmp(&dist[b]))?;
        done[u] = true;
        for &(v, c) in &adj[u] {
            dist[v] = dist[v].min(dist[u] + c);
        }
    }
    let mut next = vec![usize::MAX; n];
    for u in (0..n).filter(|&u| u != dest) {
        let tight: Vec<usize> = adj[u]
            .iter()
            .filter(|&&(v, c)| (dist[v] + c - dist[u]).abs() < 1e-9)
            .map(|&(v, _)| v)
            .collect();
        if tight.len() != 1 {
            return None;
        }
        next[u] = tight[0];
    }
    Some(next)
}

pub fn random_coords(rng: &mut ChaCha8Rng, n: usize) -> Vec<(f64, f64)> {
    loop {
        let c: Vec<(f64, f64)> = (0..n)
            .map(|_| (rng.gen_range(0..100) as f64, rng.gen_range(0..100) as f64))
            .collect();
        let distinct = (0..n).all(|i| (i + 1..n).all(|j| euc2d(c[i], c[j]) > 0.0));
        if distinct {
            return c;
        }
    }
}

pub fn tsplib_text(name: &str, coords: &[(f64, f64)]) -> String {
    let mut s = format!(
        "NAME: {name}\nTYPE: TSP\nDIMENSION: {}\nEDGE_WEIGHT_TYPE: EUC_2D\nNODE_COORD_SECTION\n",
        coords.len()
    );
    for (i, (x, y)) in coords.iter().enumerate() {
        s += &format!("{} {x} {y}\n", i + 1);
    }
    s + "EOF\n"
}

/// `count` distinct undirected off-diagonal pairs on `n` vertices.
pub fn random_pattern(rng: &mut ChaCha8Rng, n: usize, count: usize) -> Vec<(usize, usize)> {
    let mut pairs = BTreeSet::new();
    while pairs.len() < count {
        let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if a != b {
            pairs.insert((a.min(b), a.max(b)));
        }
    }
    pairs.into_iter().collect()
}

pub fn matrix_market_text(n: usize, pairs: &[(usize, usize)]) -> String {
    let mut s = format!(
        "%%MatrixMarket matrix coordinate pattern symmetric\n{n} {n} {}\n",
        pairs.len()
    );
    for &(a, b) in pairs {
        s += &format!("{} {}\n", b + 1, a + 1);
    }
    s
}

/// Row-major matrix with zero diagonal and integer entries in `0..100`.
pub fn random_lop(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n * n)
        .map(|k| if k / n == k % n { 0.0 } else { rng.gen_range(0..100) as f64 })
        .collect()
}

/// Connected network with integer costs whose shortest paths are all unique.
pub fn random_network(rng: &mut ChaCha8Rng, n: usize) -> Vec<(usize, usize, f64)> {
    loop {
        let mut links: Vec<(usize, usize, f64)> = (1..n)
            .map(|v| (rng.gen_range(0..v), v, rng.gen_range(1..=9) as f64))
            .collect();
        for _ in 0..n {
            let (a, b) = (rng.gen_range(0..n), rng.gen_range(0..n));
            if a != b && !links.iter().any(|&(x, y, _)| (x, y) == (a.min(b), a.max(b)) || (x, y) == (a, b)) {
                links.push((a.min(b), a.max(b), rng.gen_range(1..=9) as f64));
            }
        }
        if (0..n).all(|d| dijkstra_next_hops(n, &links, d).is_some()) {
            return links;
        }
    }
}

pub fn edge_list_text(n: usize, links: &[(usize, usize, f64)]) -> String {
    let mut s = format!("{n}\n");
    for &(a, b, c) in links {
        s += &format!("{} {} {c}\n", a + 1, b + 1);
    }
    s
}
