//! Pharaoh Ant System: two explorer colonies (one of which spreads negative
//! pheromone on bad trails) and an exploiter colony that honors the
//! resulting "no-entry" signal and makes u-turns.

use std::collections::BTreeSet;

use rand::Rng;

use crate::acs::{
    self, candidate_weights, choose_by_rule, solution_edges, AcsParams, Ant, Built,
    Colony, Engine, PermutationProblem, RunResult,
};
use crate::instances::{Edge, Solution, WeightedGraph};
use crate::pheromone::{AntView, PheromoneField, SpeciesProfile, TrailView, TrailWrite};
use crate::stream::AntRng;
use crate::{Error, Result};

const EXPLORER_A: u64 = 0;
const EXPLORER_B: u64 = 1;
const EXPLOITER: u64 = 2;

/// Exploiter decisions allowed per node before a construction is abandoned.
pub const EXPLOIT_BUDGET_PER_NODE: usize = 20;

#[derive(Debug, Clone, PartialEq)]
pub struct PasParams {
    /// Per-colony parameters; `acs.species` drives evaporation.
    pub acs: AcsParams,
    /// Tours costing more than `bad_factor` times the best are bad.
    pub bad_factor: f64,
    pub uturn_prob: f64,
    /// Negative pheromone added to each bad edge; 0 disables marking.
    pub neg_amount: f64,
    /// Greedy probability of the exploiter colony.
    pub exploit_q0: f64,
    pub block_threshold: f64,
}

impl Default for PasParams {
    fn default() -> Self {
        let species = SpeciesProfile::pharaoh();
        Self {
            uturn_prob: species.uturn_prob,
            acs: AcsParams {
                species,
                ..AcsParams::default()
            },
            bad_factor: 1.2,
            neg_amount: 1.0,
            exploit_q0: 0.98,
            block_threshold: 1.0,
        }
    }
}

impl PasParams {
    pub fn validate(&self) -> Result<()> {
        self.acs.validate()?;
        if !(self.bad_factor > 1.0 && self.bad_factor.is_finite()) {
            return Err(Error::invalid(format!("bad_factor must be > 1, got {}", self.bad_factor)));
        }
        if !(0.0..=1.0).contains(&self.uturn_prob) || !(0.0..=1.0).contains(&self.exploit_q0) {
            return Err(Error::invalid("uturn_prob and exploit_q0 must be in [0,1]"));
        }
        if !(self.neg_amount >= 0.0 && self.neg_amount.is_finite()) {
            return Err(Error::invalid(format!("neg_amount must be >= 0, got {}", self.neg_amount)));
        }
        if !(self.block_threshold > 0.0) {
            return Err(Error::invalid("block_threshold must be > 0"));
        }
        Ok(())
    }
}

/// Edges that occur only in tours costing more than `bad_factor · best`.
pub fn classify_bad_edges(tours: &[Solution], bad_factor: f64) -> Result<BTreeSet<Edge>> {
    classify_bad_edges_with(tours, bad_factor, true)
}

pub(crate) fn classify_bad_edges_with(
    tours: &[Solution],
    bad_factor: f64,
    cyclic: bool,
) -> Result<BTreeSet<Edge>> {
    let best = tours
        .iter()
        .map(|t| t.cost)
        .min_by(f64::total_cmp)
        .ok_or_else(|| Error::invalid("no tours to classify"))?;
    let threshold = bad_factor * best;
    let mut good = BTreeSet::new();
    let mut bad = BTreeSet::new();
    for t in tours {
        let target = if t.cost > threshold { &mut bad } else { &mut good };
        target.extend(solution_edges(&t.perm, cyclic));
    }
    Ok(bad.difference(&good).copied().collect())
}

/// Result of one exploiter decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExploitMove {
    /// Next node to walk to (the caller moves and applies the local update).
    Advance(usize),
    /// The ant turned around; its last node (if any beyond the start) was dropped.
    UTurn,
}

/// Candidates reachable without crossing a blocked edge. On a cycle, the last
/// node must also be able to close the tour.
fn open_candidates<V: TrailView>(ant: &Ant, view: &V, cyclic: bool) -> Vec<usize> {
    let unvisited = ant.unvisited();
    let closing = cyclic && unvisited.len() == 1;
    unvisited
        .into_iter()
        .filter(|&j| !view.blocked(ant.current, j) && !(closing && view.blocked(j, ant.start())))
        .collect()
}

pub(crate) fn exploit_decision<P, V, R>(
    problem: &P,
    ant: &mut Ant,
    view: &V,
    params: &PasParams,
    rng: &mut R,
) -> Result<ExploitMove>
where
    P: PermutationProblem + ?Sized,
    V: TrailView,
    R: Rng + ?Sized,
{
    if ant.is_complete() {
        return Err(Error::ConstructionFailed("no unvisited node".into()));
    }
    if params.uturn_prob > 0.0 && rng.gen::<f64>() < params.uturn_prob {
        ant.retreat();
        return Ok(ExploitMove::UTurn);
    }
    let candidates = open_candidates(ant, view, problem.cyclic());
    if candidates.is_empty() {
        return match ant.retreat() {
            Some(_) => Ok(ExploitMove::UTurn),
            None => Err(Error::ConstructionFailed(format!(
                "every edge out of start node {} is blocked",
                ant.current
            ))),
        };
    }
    let q: f64 = rng.gen();
    let weights = candidate_weights(problem, view, ant, &candidates, params.acs.alpha, params.acs.beta);
    Ok(ExploitMove::Advance(
        candidates[choose_by_rule(&weights, q, params.exploit_q0, rng)],
    ))
}

/// One exploiter decision on a TSP graph.
pub fn exploit_step<V: TrailView, R: Rng + ?Sized>(
    ant: &mut Ant,
    view: &V,
    graph: &WeightedGraph,
    params: &PasParams,
    rng: &mut R,
) -> Result<ExploitMove> {
    exploit_decision(graph, ant, view, params, rng)
}

/// Full exploiter construction. Returns the permutation (or `None` when the
/// ant got stuck or ran out of budget), the u-turn count and the decision count.
pub(crate) fn exploit_construct<P, V, R>(
    problem: &P,
    ant: &mut Ant,
    view: &mut V,
    params: &PasParams,
    rng: &mut R,
) -> (Option<Vec<usize>>, u64, u64)
where
    P: PermutationProblem + ?Sized,
    V: TrailWrite,
    R: Rng + ?Sized,
{
    let budget = EXPLOIT_BUDGET_PER_NODE * problem.size();
    let (mut uturns, mut decisions) = (0u64, 0u64);
    while !ant.is_complete() {
        if decisions as usize >= budget {
            return (None, uturns, decisions);
        }
        decisions += 1;
        match exploit_decision(problem, ant, view, params, rng) {
            Ok(ExploitMove::Advance(next)) => {
                view.local_update(ant.current, next, params.acs.rho_local);
                ant.advance(next);
            }
            Ok(ExploitMove::UTurn) => uturns += 1,
            Err(_) => return (None, uturns, decisions),
        }
    }
    if problem.cyclic() {
        view.local_update(ant.current, ant.start(), params.acs.rho_local);
    }
    (Some(ant.path.clone()), uturns, decisions)
}

fn exploiter<P: PermutationProblem + ?Sized>(
    problem: &P,
    field: &PheromoneField,
    params: &PasParams,
    index: usize,
    start: usize,
    rng: &mut AntRng,
) -> Built {
    let mut ant = Ant::new(problem.size(), start, index as u64);
    let mut view = AntView::new(field);
    let (perm, uturns, _) = exploit_construct(problem, &mut ant, &mut view, params, rng);
    Built {
        perm,
        log: view.into_log(),
        uturns,
    }
}

/// Pharaoh Ant System over any permutation problem.
pub(crate) fn solve_pas_problem<P: PermutationProblem + ?Sized>(
    problem: &P,
    params: &PasParams,
    seed: u64,
) -> Result<RunResult> {
    params.validate()?;
    if problem.size() < 2 {
        return Err(Error::invalid("problem needs at least 2 elements"));
    }
    let mut engine = Engine::new(problem, &params.acs)?;
    engine.field = engine.field.clone().with_block_threshold(params.block_threshold)?;
    let n = problem.size();
    let acs = &params.acs;
    let mut a = Colony::new(seed, EXPLORER_A, acs.n_ants);
    let mut b = Colony::new(seed, EXPLORER_B, acs.n_ants);
    let mut c = Colony::new(seed, EXPLOITER, acs.n_ants);

    for _ in 0..acs.max_iterations {
        let mut built = {
            let field = &engine.field;
            let explore = |k: usize, start: usize, rng: &mut AntRng| {
                acs::explorer(problem, field, acs, k, start, rng)
            };
            let mut v = a.build(n, acs.parallel, explore);
            v.extend(b.build(n, acs.parallel, explore));
            v
        };

        if params.neg_amount > 0.0 {
            let mut tours = Vec::new();
            for bt in &built {
                if let Some(perm) = &bt.perm {
                    tours.push(Solution {
                        cost: problem.evaluate(perm)?,
                        perm: perm.clone(),
                    });
                }
            }
            if !tours.is_empty() {
                let bad = classify_bad_edges_with(&tours, params.bad_factor, problem.cyclic())?;
                let bad: Vec<Edge> = if problem.maximize() {
                    // cost ratios only make sense for minimization
                    Vec::new()
                } else {
                    bad.into_iter().collect()
                };
                if !bad.is_empty() {
                    engine.field.mark_negative(&bad, params.neg_amount)?;
                }
            }
        }
        let blocked = engine.field.blocked_count();

        let exploiters = {
            let field = &engine.field;
            c.build(n, acs.parallel, |k, start, rng| {
                exploiter(problem, field, params, k, start, rng)
            })
        };
        let uturns = exploiters.iter().map(|e| e.uturns).sum();
        built.extend(exploiters);
        engine.finish_iteration(built, uturns, blocked)?;
    }
    engine.into_result()
}

/// Pharaoh Ant System on a TSP instance.
pub fn solve_pas(graph: &WeightedGraph, params: &PasParams, seed: u64) -> Result<RunResult> {
    if graph.n() < 3 {
        return Err(Error::invalid("tour construction needs at least 3 nodes"));
    }
    solve_pas_problem(graph, params, seed)
}
