//! Ant Colony System: pseudo-random proportional state transitions, local
//! updates while walking, an inner reinforcement of the iteration best and an
//! elitist global update of the best-so-far solution.
//!
//! The iteration loop lives in [`Engine`] and is shared by every solver that
//! builds permutations, so the species modules only supply their own
//! construction step.

use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;

use crate::instances::{self, edge, Edge, Solution, WeightedGraph};
use crate::pheromone::{
    AntView, FieldOp, PheromoneField, SpeciesProfile, TrailView, TrailWrite,
};
use crate::stream::{self, AntRng};
use crate::{Error, Result};

/// Parameters of one ACS colony.
#[derive(Debug, Clone, PartialEq)]
pub struct AcsParams {
    pub n_ants: usize,
    /// Probability of the greedy branch of the transition rule.
    pub q0: f64,
    pub alpha: f64,
    pub beta: f64,
    pub rho_local: f64,
    pub rho_global: f64,
    pub max_iterations: usize,
    /// Multiplicative reinforcement of the iteration-best edges.
    pub inner_rate: f64,
    /// Species whose half-life drives evaporation.
    pub species: SpeciesProfile,
    /// Build the ants of a colony on the rayon pool.
    pub parallel: bool,
}

impl Default for AcsParams {
    fn default() -> Self {
        Self {
            n_ants: 20,
            q0: 0.9,
            alpha: 1.0,
            beta: 2.0,
            rho_local: 0.1,
            rho_global: 0.1,
            max_iterations: 200,
            inner_rate: 0.05,
            species: SpeciesProfile::generic(),
            parallel: false,
        }
    }
}

impl AcsParams {
    pub fn validate(&self) -> Result<()> {
        let in_unit = |v: f64| (0.0..=1.0).contains(&v);
        let rate = |v: f64| v > 0.0 && v <= 1.0;
        if self.n_ants == 0 {
            return Err(Error::invalid("n_ants must be positive"));
        }
        if self.max_iterations == 0 {
            return Err(Error::invalid("max_iterations must be positive"));
        }
        if !in_unit(self.q0) {
            return Err(Error::invalid(format!("q0 {} not in [0,1]", self.q0)));
        }
        if !(self.alpha >= 0.0 && self.alpha.is_finite() && self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::invalid("alpha and beta must be finite and >= 0"));
        }
        if !rate(self.rho_local) || !rate(self.rho_global) {
            return Err(Error::invalid("rho_local and rho_global must be in (0,1]"));
        }
        if !(0.0..1.0).contains(&self.inner_rate) {
            return Err(Error::invalid(format!("inner_rate {} not in [0,1)", self.inner_rate)));
        }
        self.species.validate()
    }
}

/// A walking ant.
#[derive(Debug, Clone, PartialEq)]
pub struct Ant {
    pub current: usize,
    pub path: Vec<usize>,
    pub visited: Vec<bool>,
    /// Index of the ant's random stream within its colony.
    pub stream: u64,
}

impl Ant {
    pub fn new(n: usize, start: usize, stream: u64) -> Self {
        let mut visited = vec![false; n];
        visited[start] = true;
        Self {
            current: start,
            path: vec![start],
            visited,
            stream,
        }
    }

    pub fn start(&self) -> usize {
        self.path[0]
    }

    pub fn advance(&mut self, next: usize) {
        debug_assert!(!self.visited[next]);
        self.visited[next] = true;
        self.path.push(next);
        self.current = next;
    }

    /// Drops the last node of the path. Returns it, or `None` at the start node.
    pub fn retreat(&mut self) -> Option<usize> {
        if self.path.len() < 2 {
            return None;
        }
        let last = self.path.pop().expect("len >= 2");
        self.visited[last] = false;
        self.current = *self.path.last().expect("len >= 1");
        Some(last)
    }

    /// Node before the current one, if any.
    pub fn prev(&self) -> Option<usize> {
        self.path.len().checked_sub(2).map(|k| self.path[k])
    }

    pub fn is_complete(&self) -> bool {
        self.path.len() == self.visited.len()
    }

    /// Unvisited nodes in ascending order.
    pub fn unvisited(&self) -> Vec<usize> {
        (0..self.visited.len()).filter(|&j| !self.visited[j]).collect()
    }
}

/// A problem solved by building a permutation one element at a time.
pub trait PermutationProblem: Sync {
    fn size(&self) -> usize;
    /// Whether the permutation closes into a cycle (adds a last → first edge).
    fn cyclic(&self) -> bool;
    fn maximize(&self) -> bool;
    /// Raw, positive heuristic desirability of each candidate as the next element.
    fn heuristics(&self, current: usize, candidates: &[usize], visited: &[bool]) -> Vec<f64>;
    fn evaluate(&self, perm: &[usize]) -> Result<f64>;
    /// Initial trail value `tau0`.
    fn initial_trail(&self) -> f64;
    /// Trail target of the elitist update for a solution of the given cost.
    fn deposit(&self, cost: f64) -> f64;
}

impl PermutationProblem for WeightedGraph {
    fn size(&self) -> usize {
        self.n()
    }

    fn cyclic(&self) -> bool {
        true
    }

    fn maximize(&self) -> bool {
        false
    }

    fn heuristics(&self, current: usize, candidates: &[usize], _visited: &[bool]) -> Vec<f64> {
        candidates.iter().map(|&j| 1.0 / self.weight(current, j)).collect()
    }

    fn evaluate(&self, perm: &[usize]) -> Result<f64> {
        instances::tour_length(self, perm)
    }

    fn initial_trail(&self) -> f64 {
        let nn = self.nearest_neighbor_tour(0);
        let len = instances::tour_length(self, &nn).expect("nearest-neighbor tour is a permutation");
        1.0 / (self.n() as f64 * len)
    }

    fn deposit(&self, cost: f64) -> f64 {
        1.0 / cost
    }
}

/// Edges traversed by a permutation.
pub fn solution_edges(perm: &[usize], cyclic: bool) -> Vec<Edge> {
    let mut edges: Vec<Edge> = perm.windows(2).map(|w| edge(w[0], w[1])).collect();
    if cyclic && perm.len() > 2 {
        edges.push(edge(perm[perm.len() - 1], perm[0]));
    }
    edges
}

/// `true` when `a` is strictly better than `b`.
pub(crate) fn improves(maximize: bool, a: f64, b: f64) -> bool {
    if maximize {
        a > b
    } else {
        a < b
    }
}

/// Candidate weights `tau^alpha · eta^beta`, with heuristics scaled so the
/// largest candidate heuristic is 1. Scaling leaves the rule's choices
/// unchanged and puts weights on the pheromone scale.
pub(crate) fn candidate_weights<P: PermutationProblem + ?Sized, V: TrailView>(
    problem: &P,
    view: &V,
    ant: &Ant,
    candidates: &[usize],
    alpha: f64,
    beta: f64,
) -> Vec<f64> {
    let mut eta = problem.heuristics(ant.current, candidates, &ant.visited);
    let max = eta.iter().cloned().fold(0.0_f64, f64::max);
    if max > 0.0 && max.is_finite() {
        for e in &mut eta {
            *e /= max;
        }
    }
    candidates
        .iter()
        .zip(&eta)
        .map(|(&j, &h)| view.tau(ant.current, j).powf(alpha) * h.powf(beta))
        .collect()
}

/// Pseudo-random proportional rule over precomputed weights. With `q ≤ q0`
/// returns the first maximal weight (lowest candidate index), otherwise
/// samples proportionally, uniformly when every weight is zero.
pub fn choose_by_rule<R: Rng + ?Sized>(weights: &[f64], q: f64, q0: f64, rng: &mut R) -> usize {
    debug_assert!(!weights.is_empty());
    if q0 > 0.0 && q <= q0 {
        let mut best = 0;
        for (k, &w) in weights.iter().enumerate() {
            if w > weights[best] {
                best = k;
            }
        }
        return best;
    }
    roulette(weights, rng)
}

/// Proportional sampling; uniform fallback when the total is not positive.
pub fn roulette<R: Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    if !(total > 0.0 && total.is_finite()) {
        return rng.gen_range(0..weights.len());
    }
    let target = rng.gen::<f64>() * total;
    let mut acc = 0.0;
    let mut last_positive = 0;
    for (k, &w) in weights.iter().enumerate() {
        if w > 0.0 {
            acc += w;
            last_positive = k;
            if acc > target {
                return k;
            }
        }
    }
    last_positive
}

/// One ACS decision for an arbitrary permutation problem.
pub(crate) fn acs_decision<P, V, R>(
    problem: &P,
    ant: &Ant,
    view: &V,
    params: &AcsParams,
    q0: f64,
    q: f64,
    rng: &mut R,
) -> Result<usize>
where
    P: PermutationProblem + ?Sized,
    V: TrailView,
    R: Rng + ?Sized,
{
    let candidates = ant.unvisited();
    if candidates.is_empty() {
        return Err(Error::ConstructionFailed("no unvisited node".into()));
    }
    let weights = candidate_weights(problem, view, ant, &candidates, params.alpha, params.beta);
    Ok(candidates[choose_by_rule(&weights, q, q0, rng)])
}

/// State transition rule on a TSP graph. `q` is the caller's uniform draw
/// from the ant's stream; `rng` is used only for roulette sampling.
pub fn choose_next<V: TrailView, R: Rng + ?Sized>(
    ant: &Ant,
    view: &V,
    graph: &WeightedGraph,
    params: &AcsParams,
    q: f64,
    rng: &mut R,
) -> Result<usize> {
    acs_decision(graph, ant, view, params, params.q0, q, rng)
}

/// Completes the ant's permutation with the ACS rule, applying the local
/// update to each traversed edge (including the closing edge of a cycle).
pub(crate) fn construct_permutation<P, V, R>(
    problem: &P,
    ant: &mut Ant,
    view: &mut V,
    params: &AcsParams,
    rng: &mut R,
) -> Result<Vec<usize>>
where
    P: PermutationProblem + ?Sized,
    V: TrailWrite,
    R: Rng + ?Sized,
{
    while !ant.is_complete() {
        let q: f64 = rng.gen();
        let next = acs_decision(problem, ant, view, params, params.q0, q, rng)?;
        view.local_update(ant.current, next, params.rho_local);
        ant.advance(next);
    }
    if problem.cyclic() {
        view.local_update(ant.current, ant.start(), params.rho_local);
    }
    Ok(ant.path.clone())
}

/// Builds a Hamiltonian cycle for `ant`.
pub fn construct_tour<V: TrailWrite, R: Rng + ?Sized>(
    ant: &mut Ant,
    graph: &WeightedGraph,
    view: &mut V,
    params: &AcsParams,
    rng: &mut R,
) -> Result<Solution> {
    if graph.n() < 3 {
        return Err(Error::invalid("tour construction needs at least 3 nodes"));
    }
    let perm = construct_permutation(graph, ant, view, params, rng)?;
    let cost = instances::tour_length(graph, &perm)?;
    Ok(Solution { perm, cost })
}

/// Multiplies the trails of the iteration-best edges by `1 + inner_rate`.
pub fn inner_update(field: &mut PheromoneField, best_edges: &[Edge], inner_rate: f64) {
    if inner_rate != 0.0 {
        field.scale(best_edges, 1.0 + inner_rate);
    }
}

/// Initial positions: distinct nodes while there are enough, every node once
/// and then uniform repeats otherwise.
pub fn place_ants<R: Rng + ?Sized>(n_ants: usize, n: usize, rng: &mut R) -> Vec<usize> {
    if n_ants <= n {
        rand::seq::index::sample(rng, n, n_ants).into_vec()
    } else {
        let mut starts: Vec<usize> = (0..n).collect();
        starts.shuffle(rng);
        starts.extend((n..n_ants).map(|_| rng.gen_range(0..n)));
        starts
    }
}

/// One row of a solver trace.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub iteration: usize,
    /// Best-so-far objective.
    pub best_cost: f64,
    /// Mean objective of the solutions completed this iteration (NaN if none).
    pub mean_cost: f64,
    pub uturns: u64,
    pub blocked_edges: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunResult {
    pub best: Solution,
    pub trace: Vec<IterationRecord>,
}

/// Outcome of one ant's construction.
#[derive(Debug, Clone, Default)]
pub(crate) struct Built {
    pub perm: Option<Vec<usize>>,
    pub log: Vec<FieldOp>,
    pub uturns: u64,
}

/// The ants of one colony and their private random streams.
pub(crate) struct Colony {
    placement: AntRng,
    streams: Vec<AntRng>,
}

impl Colony {
    pub fn new(seed: u64, id: u64, n_ants: usize) -> Self {
        Self {
            placement: stream::stream(seed, id, stream::PLACEMENT),
            streams: (0..n_ants as u64).map(|k| stream::stream(seed, id, k)).collect(),
        }
    }

    /// Places the ants on `n` nodes and runs `build(ant_index, start, rng)`
    /// for each. Results are in ant order regardless of `parallel`.
    pub fn build<F>(&mut self, n: usize, parallel: bool, build: F) -> Vec<Built>
    where
        F: Fn(usize, usize, &mut AntRng) -> Built + Sync + Send,
    {
        let starts = place_ants(self.streams.len(), n, &mut self.placement);
        if parallel {
            self.streams
                .par_iter_mut()
                .enumerate()
                .map(|(k, rng)| build(k, starts[k], rng))
                .collect()
        } else {
            self.streams
                .iter_mut()
                .enumerate()
                .map(|(k, rng)| build(k, starts[k], rng))
                .collect()
        }
    }
}

/// Standard explorer construction against a private view of `field`.
pub(crate) fn explorer<P: PermutationProblem + ?Sized>(
    problem: &P,
    field: &PheromoneField,
    params: &AcsParams,
    index: usize,
    start: usize,
    rng: &mut AntRng,
) -> Built {
    let mut ant = Ant::new(problem.size(), start, index as u64);
    let mut view = AntView::new(field);
    let perm = construct_permutation(problem, &mut ant, &mut view, params, rng).ok();
    Built {
        perm,
        log: view.into_log(),
        uturns: 0,
    }
}

/// Shared iteration bookkeeping: replay, inner update, decay, elitist update, trace.
pub(crate) struct Engine<'p, P: PermutationProblem + ?Sized> {
    pub problem: &'p P,
    pub params: AcsParams,
    pub field: PheromoneField,
    pub best: Option<Solution>,
    pub trace: Vec<IterationRecord>,
}

impl<'p, P: PermutationProblem + ?Sized> Engine<'p, P> {
    pub fn new(problem: &'p P, params: &AcsParams) -> Result<Self> {
        params.validate()?;
        let field = PheromoneField::new(problem.size(), problem.initial_trail())?;
        Ok(Self {
            problem,
            params: params.clone(),
            field,
            best: None,
            trace: Vec::new(),
        })
    }

    /// Closes an iteration. `built` must be in colony-then-ant order.
    pub fn finish_iteration(&mut self, built: Vec<Built>, uturns: u64, blocked_edges: usize) -> Result<()> {
        let maximize = self.problem.maximize();
        let cyclic = self.problem.cyclic();

        let mut solutions = Vec::new();
        for b in built {
            for op in &b.log {
                self.field.apply(op);
            }
            if let Some(perm) = b.perm {
                let cost = self.problem.evaluate(&perm)?;
                solutions.push(Solution { perm, cost });
            }
        }

        let mut iteration_best: Option<&Solution> = None;
        for s in &solutions {
            if iteration_best.is_none_or(|b| improves(maximize, s.cost, b.cost)) {
                iteration_best = Some(s);
            }
        }
        if let Some(ib) = iteration_best {
            inner_update(&mut self.field, &solution_edges(&ib.perm, cyclic), self.params.inner_rate);
            if self.best.as_ref().is_none_or(|b| improves(maximize, ib.cost, b.cost)) {
                self.best = Some(ib.clone());
            }
        }

        self.field.decay_step(&self.params.species);

        if let Some(best) = &self.best {
            let deposit = self.problem.deposit(best.cost);
            if !(deposit.is_finite()) {
                return Err(Error::invalid(format!("degenerate deposit for cost {}", best.cost)));
            }
            self.field
                .reinforce(&solution_edges(&best.perm, cyclic), deposit, self.params.rho_global)?;
        }

        let mean_cost = if solutions.is_empty() {
            f64::NAN
        } else {
            solutions.iter().map(|s| s.cost).sum::<f64>() / solutions.len() as f64
        };
        self.trace.push(IterationRecord {
            iteration: self.trace.len() + 1,
            best_cost: self.best.as_ref().map_or(f64::NAN, |b| b.cost),
            mean_cost,
            uturns,
            blocked_edges,
        });
        Ok(())
    }

    pub fn into_result(self) -> Result<RunResult> {
        let best = self
            .best
            .ok_or_else(|| Error::ConstructionFailed("no ant completed a solution".into()))?;
        Ok(RunResult {
            best,
            trace: self.trace,
        })
    }
}

/// Runs `colonies` identical ACS colonies side by side on one field.
pub fn solve_acs_colonies<P: PermutationProblem + ?Sized>(
    problem: &P,
    params: &AcsParams,
    colonies: usize,
    seed: u64,
) -> Result<RunResult> {
    if problem.size() < 2 {
        return Err(Error::invalid("problem needs at least 2 elements"));
    }
    if colonies == 0 {
        return Err(Error::invalid("at least one colony is required"));
    }
    let mut engine = Engine::new(problem, params)?;
    let mut ants: Vec<Colony> = (0..colonies as u64)
        .map(|id| Colony::new(seed, id, params.n_ants))
        .collect();
    let n = problem.size();
    for _ in 0..params.max_iterations {
        let mut built = Vec::new();
        for colony in &mut ants {
            let field = &engine.field;
            built.extend(colony.build(n, params.parallel, |k, start, rng| {
                explorer(problem, field, params, k, start, rng)
            }));
        }
        engine.finish_iteration(built, 0, 0)?;
    }
    engine.into_result()
}

/// Ant Colony System on a TSP instance.
pub fn solve_acs(graph: &WeightedGraph, params: &AcsParams, seed: u64) -> Result<RunResult> {
    if graph.n() < 3 {
        return Err(Error::invalid("tour construction needs at least 3 nodes"));
    }
    solve_acs_colonies(graph, params, 1, seed)
}
