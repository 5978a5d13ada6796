//! Distributed Pharaoh System: stigmergic routing on a weighted network.
//!
//! Forward ants walk from a source to a destination following per-node
//! routing tables mixed with uniform exploration. Their walks are
//! loop-erased and retraced by backward ants, which reinforce the used hops.
//! The colony layout mirrors the Pharaoh Ant System: two explorer colonies,
//! one of which marks links of bad paths with negative pheromone, and a
//! low-exploration exploiter colony.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::acs::{roulette, IterationRecord};
use crate::instances::{edge, Edge, MAX_DENSE_DIMENSION};
use crate::pheromone::{PheromoneField, SpeciesProfile, TrailView};
use crate::stream::{self, AntRng};
use crate::{Error, Result};

/// Undirected network with positive link costs.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkTopology {
    n: usize,
    links: Vec<(usize, usize, f64)>,
    adjacency: Vec<Vec<(usize, f64)>>,
}

impl NetworkTopology {
    /// Validates and builds a connected topology from 0-based links.
    pub fn new(n: usize, links: Vec<(usize, usize, f64)>) -> Result<Self> {
        if n < 2 {
            return Err(Error::invalid(format!("network needs at least 2 nodes, got {n}")));
        }
        if n > MAX_DENSE_DIMENSION {
            return Err(Error::invalid(format!(
                "network size {n} exceeds the limit of {MAX_DENSE_DIMENSION}"
            )));
        }
        let mut seen = BTreeSet::new();
        let mut adjacency = vec![Vec::new(); n];
        let mut normalized = Vec::with_capacity(links.len());
        for &(u, v, c) in &links {
            if u >= n || v >= n {
                return Err(Error::invalid(format!("link ({u},{v}) out of range")));
            }
            if u == v {
                return Err(Error::invalid(format!("self-loop at node {}", u + 1)));
            }
            if !(c > 0.0 && c.is_finite()) {
                return Err(Error::invalid(format!("link ({},{}) has cost {c}", u + 1, v + 1)));
            }
            if !seen.insert(edge(u, v)) {
                return Err(Error::invalid(format!("duplicate link ({},{})", u + 1, v + 1)));
            }
            adjacency[u].push((v, c));
            adjacency[v].push((u, c));
            let (a, b) = edge(u, v);
            normalized.push((a, b, c));
        }
        for list in &mut adjacency {
            list.sort_by_key(|&(v, _)| v);
        }
        normalized.sort_by_key(|&(a, b, _)| (a, b));

        let mut reached = vec![false; n];
        let mut queue = VecDeque::from([0]);
        reached[0] = true;
        while let Some(u) = queue.pop_front() {
            for &(v, _) in &adjacency[u] {
                if !reached[v] {
                    reached[v] = true;
                    queue.push_back(v);
                }
            }
        }
        if let Some(lost) = reached.iter().position(|r| !r) {
            return Err(Error::invalid(format!("network is disconnected (node {} unreachable)", lost + 1)));
        }
        Ok(Self {
            n,
            links: normalized,
            adjacency,
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Links as `(a, b, cost)` with `a < b`, sorted.
    pub fn links(&self) -> &[(usize, usize, f64)] {
        &self.links
    }

    /// Neighbors of `u` with link costs, ascending by neighbor.
    pub fn neighbors(&self, u: usize) -> &[(usize, f64)] {
        &self.adjacency[u]
    }

    pub fn cost(&self, u: usize, v: usize) -> Option<f64> {
        self.adjacency[u]
            .binary_search_by_key(&v, |&(w, _)| w)
            .ok()
            .map(|k| self.adjacency[u][k].1)
    }

    pub fn path_cost(&self, path: &[usize]) -> Result<f64> {
        path.windows(2).try_fold(0.0, |acc, w| {
            self.cost(w[0], w[1])
                .map(|c| acc + c)
                .ok_or_else(|| Error::invalid(format!("no link ({},{})", w[0] + 1, w[1] + 1)))
        })
    }

    pub fn to_edge_list(&self) -> String {
        let mut out = format!("{}\n", self.n);
        for &(a, b, c) in &self.links {
            let _ = writeln!(out, "{} {} {}", a + 1, b + 1, c);
        }
        out
    }
}

fn parse_index(tok: &str, line: usize, n: usize) -> Result<usize> {
    let v: usize = tok
        .parse()
        .map_err(|_| Error::parse(line, format!("invalid node `{tok}`")))?;
    if v == 0 || v > n {
        return Err(Error::parse(line, format!("node {v} out of range 1..={n}")));
    }
    Ok(v - 1)
}

fn content_lines(text: &str) -> impl Iterator<Item = (usize, &str)> {
    text.lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'))
}

/// Parses `<n>` followed by `<u> <v> <cost>` lines (1-based).
pub fn parse_network(text: &str) -> Result<NetworkTopology> {
    let mut lines = content_lines(text);
    let (no, first) = lines.next().ok_or_else(|| Error::parse(1, "empty input"))?;
    let n: usize = first
        .parse()
        .map_err(|_| Error::parse(no, format!("invalid node count `{first}`")))?;
    if n > MAX_DENSE_DIMENSION {
        return Err(Error::parse(no, format!("node count {n} exceeds {MAX_DENSE_DIMENSION}")));
    }
    let mut links = Vec::new();
    for (no, line) in lines {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 3 {
            return Err(Error::parse(no, "link line must be `<u> <v> <cost>`"));
        }
        let u = parse_index(toks[0], no, n)?;
        let v = parse_index(toks[1], no, n)?;
        let c: f64 = toks[2]
            .parse()
            .map_err(|_| Error::parse(no, format!("invalid cost `{}`", toks[2])))?;
        links.push((u, v, c));
    }
    NetworkTopology::new(n, links)
}

/// Parses `<src> <dst>` lines (1-based) for a network of `n` nodes.
pub fn parse_demands(text: &str, n: usize) -> Result<Vec<(usize, usize)>> {
    let mut out = Vec::new();
    for (no, line) in content_lines(text) {
        let toks: Vec<&str> = line.split_whitespace().collect();
        if toks.len() != 2 {
            return Err(Error::parse(no, "demand line must be `<src> <dst>`"));
        }
        let s = parse_index(toks[0], no, n)?;
        let d = parse_index(toks[1], no, n)?;
        if s == d {
            return Err(Error::parse(no, "source equals destination"));
        }
        out.push((s, d));
    }
    if out.is_empty() {
        return Err(Error::parse(0, "no demands"));
    }
    Ok(out)
}

/// Every ordered pair of distinct nodes.
pub fn all_pairs(n: usize) -> Vec<(usize, usize)> {
    (0..n)
        .flat_map(|s| (0..n).filter(move |&d| d != s).map(move |d| (s, d)))
        .collect()
}

/// Per node, per destination: a distribution over the node's neighbors.
#[derive(Debug, Clone, PartialEq)]
pub struct RoutingTable {
    neighbors: Vec<Vec<usize>>,
    probs: Vec<Vec<Vec<f64>>>,
}

impl RoutingTable {
    /// Uniform distributions.
    pub fn uniform(net: &NetworkTopology) -> Self {
        let n = net.n();
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|u| net.neighbors(u).iter().map(|&(v, _)| v).collect())
            .collect();
        let probs = (0..n)
            .map(|u| {
                let k = neighbors[u].len();
                (0..n)
                    .map(|d| if d == u { Vec::new() } else { vec![1.0 / k as f64; k] })
                    .collect()
            })
            .collect();
        Self { neighbors, probs }
    }

    pub fn neighbors(&self, u: usize) -> &[usize] {
        &self.neighbors[u]
    }

    /// Distribution at `u` toward `dest`, aligned with [`Self::neighbors`].
    pub fn distribution(&self, u: usize, dest: usize) -> &[f64] {
        &self.probs[u][dest]
    }

    pub fn probability(&self, u: usize, dest: usize, next: usize) -> f64 {
        self.neighbors[u]
            .iter()
            .position(|&v| v == next)
            .map_or(0.0, |k| self.probs[u][dest][k])
    }

    /// Most probable next hop, ties to the lowest neighbor index.
    pub fn best_next(&self, u: usize, dest: usize) -> Option<usize> {
        let p = &self.probs[u][dest];
        let mut best: Option<usize> = None;
        for k in 0..p.len() {
            if best.is_none_or(|b| p[k] > p[b]) {
                best = Some(k);
            }
        }
        best.map(|k| self.neighbors[u][k])
    }

    /// Greedy path from `src` to `dest` along most probable hops; `None` on a loop.
    pub fn most_probable_path(&self, src: usize, dest: usize) -> Option<Vec<usize>> {
        let mut path = vec![src];
        let mut seen = vec![false; self.neighbors.len()];
        seen[src] = true;
        let mut u = src;
        while u != dest {
            u = self.best_next(u, dest)?;
            if seen[u] {
                return None;
            }
            seen[u] = true;
            path.push(u);
        }
        Some(path)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PacketKind {
    Forward,
    Backward,
}

/// A routing ant in flight.
#[derive(Debug, Clone, PartialEq)]
pub struct AntPacket {
    pub kind: PacketKind,
    pub source: usize,
    pub destination: usize,
    pub path: Vec<usize>,
    pub cost_so_far: f64,
}

impl AntPacket {
    pub fn forward(source: usize, destination: usize) -> Self {
        Self {
            kind: PacketKind::Forward,
            source,
            destination,
            path: vec![source],
            cost_so_far: 0.0,
        }
    }

    pub fn current(&self) -> usize {
        *self.path.last().expect("path starts at the source")
    }

    pub fn arrived(&self) -> bool {
        self.current() == self.destination
    }

    /// Backward packet retracing a cycle-free forward path.
    pub fn backward(&self) -> Self {
        Self {
            kind: PacketKind::Backward,
            source: self.source,
            destination: self.destination,
            path: self.path.iter().rev().copied().collect(),
            cost_so_far: self.cost_so_far,
        }
    }
}

/// Moves a forward ant one hop. Blocked links are never taken.
pub fn forward_step<V: TrailView, R: Rng + ?Sized>(
    pkt: &mut AntPacket,
    net: &NetworkTopology,
    tables: &RoutingTable,
    field: &V,
    exploration: f64,
    rng: &mut R,
) -> Result<usize> {
    if pkt.kind != PacketKind::Forward || pkt.arrived() {
        return Err(Error::invalid("packet is not an en-route forward ant"));
    }
    if !(0.0..=1.0).contains(&exploration) {
        return Err(Error::invalid(format!("exploration {exploration} not in [0,1]")));
    }
    let u = pkt.current();
    let hops = tables.neighbors(u);
    let dist = tables.distribution(u, pkt.destination);
    let uniform = 1.0 / hops.len() as f64;
    let mut weights: Vec<f64> = hops
        .iter()
        .zip(dist)
        .map(|(&v, &p)| {
            if field.blocked(u, v) {
                0.0
            } else {
                (1.0 - exploration) * p + exploration * uniform
            }
        })
        .collect();
    if hops.iter().all(|&v| field.blocked(u, v)) {
        return Err(Error::ConstructionFailed(format!("every link out of node {} is blocked", u + 1)));
    }
    if weights.iter().sum::<f64>() <= 0.0 {
        for (w, &v) in weights.iter_mut().zip(hops) {
            *w = if field.blocked(u, v) { 0.0 } else { 1.0 };
        }
    }
    let next = hops[roulette(&weights, rng)];
    pkt.cost_so_far += net.cost(u, next).expect("neighbor link");
    pkt.path.push(next);
    Ok(next)
}

/// Loop erasure: whenever a node reappears, the loop since its earlier visit is cut.
pub fn prune_cycles(path: &[usize]) -> Vec<usize> {
    let mut out: Vec<usize> = Vec::with_capacity(path.len());
    let mut pos: HashMap<usize, usize> = HashMap::new();
    for &v in path {
        if let Some(&p) = pos.get(&v) {
            for dropped in out.drain(p + 1..) {
                pos.remove(&dropped);
            }
        } else {
            pos.insert(v, out.len());
            out.push(v);
        }
    }
    out
}

/// Reinforcement `gain · min(1, kappa/cost)^sharpness`.
pub fn reinforcement(cost: f64, kappa: f64, gain: f64, sharpness: f64) -> f64 {
    gain * (kappa / cost).min(1.0).powf(sharpness)
}

/// Backward-ant update along a cycle-free `path` toward its last node, with
/// reinforcement `r = min(1, kappa/cost)`.
pub fn backward_update(
    tables: &mut RoutingTable,
    field: &mut PheromoneField,
    path: &[usize],
    cost: f64,
    kappa: f64,
    rho_global: f64,
) -> Result<()> {
    if !(kappa > 0.0 && kappa.is_finite()) {
        return Err(Error::invalid(format!("kappa must be positive, got {kappa}")));
    }
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::invalid(format!("path cost must be positive, got {cost}")));
    }
    retrace(tables, field, path, cost, reinforcement(cost, kappa, 1.0, 1.0), rho_global)
}

/// Backward-ant update with an explicit reinforcement `r` in `[0, 1]`.
pub fn retrace(
    tables: &mut RoutingTable,
    field: &mut PheromoneField,
    path: &[usize],
    cost: f64,
    r: f64,
    rho_global: f64,
) -> Result<()> {
    if !(cost > 0.0 && cost.is_finite()) {
        return Err(Error::invalid(format!("path cost must be positive, got {cost}")));
    }
    if !(0.0..=1.0).contains(&r) {
        return Err(Error::invalid(format!("reinforcement {r} not in [0,1]")));
    }
    if path.len() < 2 {
        return Err(Error::invalid("path needs at least one hop"));
    }
    if prune_cycles(path).len() != path.len() {
        return Err(Error::invalid("path contains a cycle"));
    }
    let dest = *path.last().expect("len >= 2");
    let hops: Vec<(usize, usize)> = path
        .windows(2)
        .map(|w| {
            tables.neighbors[w[0]]
                .iter()
                .position(|&v| v == w[1])
                .map(|k| (w[0], k))
                .ok_or_else(|| Error::invalid(format!("no link ({},{})", w[0] + 1, w[1] + 1)))
        })
        .collect::<Result<_>>()?;
    for &(u, k) in hops.iter().rev() {
        let dist = &mut tables.probs[u][dest];
        for (idx, p) in dist.iter_mut().enumerate() {
            *p = if idx == k { (*p + r) / (1.0 + r) } else { *p / (1.0 + r) };
        }
        let v = tables.neighbors[u][k];
        field.global_update(&[edge(u, v)], cost, rho_global)?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpsParams {
    /// Uniform-mixing rate of the explorer colonies.
    pub explore_rate: f64,
    /// Uniform-mixing rate of the exploiter colony.
    pub exploit_rate: f64,
    pub bad_factor: f64,
    /// Negative pheromone per bad link; 0 disables marking.
    pub neg_amount: f64,
    pub block_threshold: f64,
    /// Fixed reinforcement scale; `None` uses the best-known cost of each demand.
    pub kappa: Option<f64>,
    /// Scale of the reinforcement.
    pub gain: f64,
    /// Exponent on `kappa/cost`; larger values favor near-best paths.
    pub sharpness: f64,
    pub rho_global: f64,
    pub species: SpeciesProfile,
    /// Forward ants are dropped after `max_hops_per_node · n` hops.
    pub max_hops_per_node: usize,
    pub parallel: bool,
}

impl Default for DpsParams {
    fn default() -> Self {
        Self {
            explore_rate: 0.3,
            exploit_rate: 0.05,
            bad_factor: 1.2,
            neg_amount: 1.0,
            block_threshold: 1.0,
            kappa: None,
            gain: 0.1,
            sharpness: 16.0,
            rho_global: 0.1,
            species: SpeciesProfile::pharaoh(),
            max_hops_per_node: 4,
            parallel: false,
        }
    }
}

impl DpsParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64| (0.0..=1.0).contains(&v);
        if !unit(self.explore_rate) || !unit(self.exploit_rate) {
            return Err(Error::invalid("exploration rates must be in [0,1]"));
        }
        if !(self.bad_factor > 1.0 && self.bad_factor.is_finite()) {
            return Err(Error::invalid("bad_factor must be > 1"));
        }
        if !(self.neg_amount >= 0.0 && self.neg_amount.is_finite()) {
            return Err(Error::invalid("neg_amount must be >= 0"));
        }
        if !(self.block_threshold > 0.0) {
            return Err(Error::invalid("block_threshold must be > 0"));
        }
        if let Some(k) = self.kappa {
            if !(k > 0.0 && k.is_finite()) {
                return Err(Error::invalid("kappa must be positive"));
            }
        }
        if !(self.gain > 0.0 && self.gain <= 1.0) {
            return Err(Error::invalid("gain must be in (0,1]"));
        }
        if !(self.sharpness > 0.0 && self.sharpness.is_finite()) {
            return Err(Error::invalid("sharpness must be positive"));
        }
        if !(self.rho_global > 0.0 && self.rho_global <= 1.0) {
            return Err(Error::invalid("rho_global must be in (0,1]"));
        }
        if self.max_hops_per_node == 0 {
            return Err(Error::invalid("max_hops_per_node must be positive"));
        }
        self.species.validate()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoutingOutcome {
    pub tables: RoutingTable,
    /// Union of the most probable paths of all demands.
    pub overlay: Vec<Edge>,
    /// Sum of the distinct overlay link costs.
    pub overlay_cost: f64,
    /// Whether every demand has a loop-free most probable path.
    pub overlay_complete: bool,
    pub trace: Vec<IterationRecord>,
    pub dropped: u64,
}

/// Overlay of the current tables: union of most probable paths.
pub fn overlay(net: &NetworkTopology, tables: &RoutingTable, demands: &[(usize, usize)]) -> (Vec<Edge>, f64, bool) {
    let mut links = BTreeSet::new();
    let mut complete = true;
    for &(s, d) in demands {
        match tables.most_probable_path(s, d) {
            Some(p) => links.extend(p.windows(2).map(|w| edge(w[0], w[1]))),
            None => complete = false,
        }
    }
    let cost = links
        .iter()
        .map(|&(a, b)| net.cost(a, b).expect("overlay uses network links"))
        .sum();
    (links.into_iter().collect(), cost, complete)
}

/// A forward ant's result: the loop-erased path, its cost, and whether loops were cut.
struct Walk {
    demand: usize,
    path: Vec<usize>,
    cost: f64,
    looped: bool,
}

fn walk(
    net: &NetworkTopology,
    tables: &RoutingTable,
    field: &PheromoneField,
    demand: (usize, usize),
    index: usize,
    exploration: f64,
    max_hops: usize,
    rng: &mut AntRng,
) -> Option<Walk> {
    let mut pkt = AntPacket::forward(demand.0, demand.1);
    while !pkt.arrived() {
        if pkt.path.len() > max_hops {
            return None;
        }
        forward_step(&mut pkt, net, tables, field, exploration, rng).ok()?;
    }
    let path = prune_cycles(&pkt.path);
    let looped = path.len() != pkt.path.len();
    let cost = net.path_cost(&path).expect("walk follows links");
    Some(Walk {
        demand: index,
        path,
        cost,
        looped,
    })
}

fn launch(
    net: &NetworkTopology,
    tables: &RoutingTable,
    field: &PheromoneField,
    demands: &[(usize, usize)],
    streams: &mut [AntRng],
    exploration: f64,
    params: &DpsParams,
) -> Vec<Option<Walk>> {
    let max_hops = params.max_hops_per_node * net.n();
    let go = |(k, rng): (usize, &mut AntRng)| walk(net, tables, field, demands[k], k, exploration, max_hops, rng);
    if params.parallel {
        streams.par_iter_mut().enumerate().map(go).collect()
    } else {
        streams.iter_mut().enumerate().map(go).collect()
    }
}

/// Runs `budget` iterations of the three-colony routing system.
pub fn run_routing(
    net: &NetworkTopology,
    demands: &[(usize, usize)],
    params: &DpsParams,
    seed: u64,
    budget: usize,
) -> Result<RoutingOutcome> {
    params.validate()?;
    if demands.is_empty() {
        return Err(Error::invalid("no demands"));
    }
    for &(s, d) in demands {
        if s >= net.n() || d >= net.n() || s == d {
            return Err(Error::invalid(format!("invalid demand ({},{})", s + 1, d + 1)));
        }
    }
    let n = net.n();
    let mean_link = net.links().iter().map(|l| l.2).sum::<f64>() / net.links().len() as f64;
    let mut field =
        PheromoneField::new(n, 1.0 / (n as f64 * mean_link))?.with_block_threshold(params.block_threshold)?;
    let mut tables = RoutingTable::uniform(net);
    let mut best_known = vec![f64::INFINITY; demands.len()];
    let mut colonies: Vec<Vec<AntRng>> = (0..3u64)
        .map(|c| (0..demands.len() as u64).map(|k| stream::stream(seed, c, k)).collect())
        .collect();
    let mut trace = Vec::with_capacity(budget);
    let mut dropped = 0u64;

    for iteration in 1..=budget {
        let mut walks = launch(net, &tables, &field, demands, &mut colonies[0], params.explore_rate, params);
        walks.extend(launch(net, &tables, &field, demands, &mut colonies[1], params.explore_rate, params));
        for w in walks.iter().flatten() {
            if w.cost < best_known[w.demand] {
                best_known[w.demand] = w.cost;
            }
        }

        if params.neg_amount > 0.0 {
            let mut good = BTreeSet::new();
            let mut bad = BTreeSet::new();
            for w in walks.iter().flatten() {
                let links = w.path.windows(2).map(|p| edge(p[0], p[1]));
                if w.cost > params.bad_factor * best_known[w.demand] {
                    bad.extend(links);
                } else {
                    good.extend(links);
                }
            }
            let marked: Vec<Edge> = bad.difference(&good).copied().collect();
            if !marked.is_empty() {
                field.mark_negative(&marked, params.neg_amount)?;
            }
        }
        let blocked = net
            .links()
            .iter()
            .filter(|&&(a, b, _)| field.blocked(a, b))
            .count();

        walks.extend(launch(net, &tables, &field, demands, &mut colonies[2], params.exploit_rate, params));

        let mut completed = 0usize;
        let mut total = 0.0;
        let mut loops = 0u64;
        for w in &walks {
            match w {
                None => dropped += 1,
                Some(w) => {
                    completed += 1;
                    total += w.cost;
                    loops += u64::from(w.looped);
                    if w.cost < best_known[w.demand] {
                        best_known[w.demand] = w.cost;
                    }
                    let kappa = params.kappa.unwrap_or(best_known[w.demand]);
                    let r = reinforcement(w.cost, kappa, params.gain, params.sharpness);
                    retrace(&mut tables, &mut field, &w.path, w.cost, r, params.rho_global)?;
                }
            }
        }
        field.decay_step(&params.species);

        let (_, cost, complete) = overlay(net, &tables, demands);
        trace.push(IterationRecord {
            iteration,
            best_cost: if complete { cost } else { f64::INFINITY },
            mean_cost: if completed > 0 { total / completed as f64 } else { f64::NAN },
            uturns: loops,
            blocked_edges: blocked,
        });
    }

    let (links, overlay_cost, overlay_complete) = overlay(net, &tables, demands);
    Ok(RoutingOutcome {
        tables,
        overlay: links,
        overlay_cost,
        overlay_complete,
        trace,
        dropped,
    })
}
