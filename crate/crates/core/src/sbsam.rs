//! Step-Back Sensitive Ant Model.
//!
//! Each ant has a pheromone sensitivity level (psl): with probability psl it
//! follows the ACS rule, otherwise it picks uniformly. Besides the unvisited
//! nodes, the rule may select a virtual "step back" candidate that returns
//! the ant to its previous node and erodes the trail on the abandoned edge.

use rand::Rng;

use crate::acs::{
    candidate_weights, choose_by_rule, AcsParams, Ant, Built, Colony, Engine, PermutationProblem,
    RunResult,
};
use crate::instances::{self, LopMatrix, WeightedGraph};
use crate::pheromone::{AntView, PheromoneField, SpeciesProfile, TrailWrite};
use crate::stream::{self, AntRng};
use crate::{Error, Result};

/// Decisions allowed per element before a construction is abandoned.
pub const STEP_BUDGET_PER_NODE: usize = 3;

/// How sensitivity levels are spread over the population.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PslDistribution {
    Uniform,
    TwoPoint(f64, f64),
    Constant(f64),
}

impl PslDistribution {
    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        let valid = match *self {
            PslDistribution::Uniform => true,
            PslDistribution::TwoPoint(a, b) => ok(a) && ok(b),
            PslDistribution::Constant(c) => ok(c),
        };
        if valid {
            Ok(())
        } else {
            Err(Error::invalid(format!("sensitivity levels must lie in [0,1]: {self:?}")))
        }
    }
}

impl std::str::FromStr for PslDistribution {
    type Err = Error;

    /// `uniform`, `constant:<c>` or `two-point:<a>,<b>`.
    fn from_str(s: &str) -> Result<Self> {
        let bad = || Error::invalid(format!("bad psl distribution `{s}`"));
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| bad());
        let d = match s.split_once(':') {
            None if s == "uniform" => PslDistribution::Uniform,
            Some(("constant", c)) => PslDistribution::Constant(num(c)?),
            Some(("two-point", ab)) => {
                let (a, b) = ab.split_once(',').ok_or_else(bad)?;
                PslDistribution::TwoPoint(num(a)?, num(b)?)
            }
            _ => return Err(bad()),
        };
        d.validate()?;
        Ok(d)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SbsamParams {
    pub acs: AcsParams,
    /// Fraction of trail removed from an edge the ant steps back over.
    pub xi: f64,
    /// Weight of the step-back candidate relative to a fresh trail.
    pub virtual_weight: f64,
    pub psl: PslDistribution,
}

impl Default for SbsamParams {
    fn default() -> Self {
        Self {
            acs: AcsParams {
                species: SpeciesProfile::lasius(),
                ..AcsParams::default()
            },
            xi: 0.1,
            virtual_weight: 0.3,
            psl: PslDistribution::Uniform,
        }
    }
}

impl SbsamParams {
    pub fn validate(&self) -> Result<()> {
        self.acs.validate()?;
        if !(0.0..1.0).contains(&self.xi) {
            return Err(Error::invalid(format!("xi {} not in [0,1)", self.xi)));
        }
        if !(self.virtual_weight >= 0.0 && self.virtual_weight.is_finite()) {
            return Err(Error::invalid("virtual_weight must be finite and >= 0"));
        }
        self.psl.validate()
    }
}

/// Draws one sensitivity level per ant.
pub fn assign_sensitivities<R: Rng + ?Sized>(
    n_ants: usize,
    dist: PslDistribution,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if n_ants == 0 {
        return Err(Error::invalid("n_ants must be positive"));
    }
    dist.validate()?;
    Ok((0..n_ants)
        .map(|_| match dist {
            PslDistribution::Uniform => rng.gen::<f64>(),
            PslDistribution::TwoPoint(a, b) => {
                if rng.gen::<bool>() {
                    a
                } else {
                    b
                }
            }
            PslDistribution::Constant(c) => c,
        })
        .collect())
}

/// An ant with a pheromone sensitivity level.
#[derive(Debug, Clone, PartialEq)]
pub struct SensitiveAnt {
    pub base: Ant,
    pub psl: f64,
    pub prev: Option<usize>,
}

impl SensitiveAnt {
    pub fn new(n: usize, start: usize, stream: u64, psl: f64) -> Self {
        Self {
            base: Ant::new(n, start, stream),
            psl,
            prev: None,
        }
    }

    pub fn advance(&mut self, next: usize) {
        self.prev = Some(self.base.current);
        self.base.advance(next);
    }

    fn step_back(&mut self) -> Option<usize> {
        let dropped = self.base.retreat();
        self.prev = self.base.prev();
        dropped
    }
}

/// Result of one sensitive decision.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensitiveMove {
    Advance(usize),
    /// The ant returned to its previous node; the trail on that edge was eroded.
    StepBack,
}

pub(crate) fn sensitive_decision<P, V, R>(
    problem: &P,
    ant: &mut SensitiveAnt,
    view: &mut V,
    params: &SbsamParams,
    rng: &mut R,
) -> Result<SensitiveMove>
where
    P: PermutationProblem + ?Sized,
    V: TrailWrite,
    R: Rng + ?Sized,
{
    let candidates = ant.base.unvisited();
    let with_virtual = params.virtual_weight > 0.0 && ant.base.path.len() >= 2;
    let total = candidates.len() + usize::from(with_virtual);
    if total == 0 {
        return Err(Error::ConstructionFailed("no candidate and no previous node".into()));
    }

    let acs = &params.acs;
    let follow_trail = if ant.psl >= 1.0 {
        true
    } else if ant.psl <= 0.0 {
        false
    } else {
        rng.gen::<f64>() < ant.psl
    };
    let pick = if follow_trail {
        let q: f64 = rng.gen();
        let mut weights = if candidates.is_empty() {
            Vec::new()
        } else {
            candidate_weights(problem, view, &ant.base, &candidates, acs.alpha, acs.beta)
        };
        if with_virtual {
            weights.push(params.virtual_weight * view.tau0().powf(acs.alpha));
        }
        choose_by_rule(&weights, q, acs.q0, rng)
    } else {
        rng.gen_range(0..total)
    };

    if pick < candidates.len() {
        return Ok(SensitiveMove::Advance(candidates[pick]));
    }
    let from = ant.base.current;
    ant.step_back();
    let to = ant.base.current;
    view.erode(from, to, params.xi);
    Ok(SensitiveMove::StepBack)
}

/// One sensitive decision on a TSP graph. A step back is applied to the ant
/// and the view before returning.
pub fn sensitive_step<V: TrailWrite, R: Rng + ?Sized>(
    ant: &mut SensitiveAnt,
    graph: &WeightedGraph,
    view: &mut V,
    params: &SbsamParams,
    rng: &mut R,
) -> Result<SensitiveMove> {
    sensitive_decision(graph, ant, view, params, rng)
}

/// Full construction; `None` when the step budget runs out.
pub(crate) fn sensitive_construct<P, V, R>(
    problem: &P,
    ant: &mut SensitiveAnt,
    view: &mut V,
    params: &SbsamParams,
    rng: &mut R,
) -> (Option<Vec<usize>>, u64)
where
    P: PermutationProblem + ?Sized,
    V: TrailWrite,
    R: Rng + ?Sized,
{
    let budget = STEP_BUDGET_PER_NODE * problem.size();
    let mut step_backs = 0u64;
    let mut decisions = 0;
    while !ant.base.is_complete() {
        if decisions >= budget {
            return (None, step_backs);
        }
        decisions += 1;
        match sensitive_decision(problem, ant, view, params, rng) {
            Ok(SensitiveMove::Advance(next)) => {
                view.local_update(ant.base.current, next, params.acs.rho_local);
                ant.advance(next);
            }
            Ok(SensitiveMove::StepBack) => step_backs += 1,
            Err(_) => return (None, step_backs),
        }
    }
    if problem.cyclic() {
        view.local_update(ant.base.current, ant.base.start(), params.acs.rho_local);
    }
    (Some(ant.base.path.clone()), step_backs)
}

/// Heuristic: items that dominate many remaining items are placed early.
impl PermutationProblem for LopMatrix {
    fn size(&self) -> usize {
        self.n()
    }

    fn cyclic(&self) -> bool {
        false
    }

    fn maximize(&self) -> bool {
        true
    }

    fn heuristics(&self, _current: usize, candidates: &[usize], visited: &[bool]) -> Vec<f64> {
        candidates
            .iter()
            .map(|&j| {
                let dominance: f64 = (0..self.n())
                    .filter(|&k| k != j && !visited[k])
                    .map(|k| (self.get(j, k) - self.get(k, j)).max(0.0))
                    .sum();
                1.0 + dominance
            })
            .collect()
    }

    fn evaluate(&self, perm: &[usize]) -> Result<f64> {
        instances::lop_value(self, perm)
    }

    fn initial_trail(&self) -> f64 {
        1.0 / self.n() as f64
    }

    /// Value relative to the trivial upper bound `Σ_{i<j} max(m_ij, m_ji)`.
    fn deposit(&self, value: f64) -> f64 {
        let mut bound = 0.0;
        for i in 0..self.n() {
            for j in i + 1..self.n() {
                bound += self.get(i, j).max(self.get(j, i));
            }
        }
        if bound > 0.0 {
            (value / bound).max(0.0)
        } else {
            self.initial_trail()
        }
    }
}

/// Problem instances SB-SAM can solve.
#[derive(Debug, Clone, Copy)]
pub enum SbsamProblem<'a> {
    Tsp(&'a WeightedGraph),
    Lop(&'a LopMatrix),
}

fn sensitive_ant<P: PermutationProblem + ?Sized>(
    problem: &P,
    field: &PheromoneField,
    params: &SbsamParams,
    psl: f64,
    index: usize,
    start: usize,
    rng: &mut AntRng,
) -> Built {
    let mut ant = SensitiveAnt::new(problem.size(), start, index as u64, psl);
    let mut view = AntView::new(field);
    let (perm, step_backs) = sensitive_construct(problem, &mut ant, &mut view, params, rng);
    Built {
        perm,
        log: view.into_log(),
        uturns: step_backs,
    }
}

fn solve_generic<P: PermutationProblem + ?Sized>(
    problem: &P,
    params: &SbsamParams,
    seed: u64,
) -> Result<RunResult> {
    params.validate()?;
    let acs = &params.acs;
    let mut engine = Engine::new(problem, acs)?;
    let psl = assign_sensitivities(
        acs.n_ants,
        params.psl,
        &mut stream::stream(seed, 0, stream::SENSITIVITY),
    )?;
    let mut colony = Colony::new(seed, 0, acs.n_ants);
    let n = problem.size();
    for _ in 0..acs.max_iterations {
        let built = {
            let field = &engine.field;
            colony.build(n, acs.parallel, |k, start, rng| {
                sensitive_ant(problem, field, params, psl[k], k, start, rng)
            })
        };
        let step_backs = built.iter().map(|b| b.uturns).sum();
        engine.finish_iteration(built, step_backs, 0)?;
    }
    engine.into_result()
}

/// Step-Back Sensitive Ant Model on a TSP (minimize length) or LOP (maximize value) instance.
pub fn solve_sbsam(problem: SbsamProblem<'_>, params: &SbsamParams, seed: u64) -> Result<RunResult> {
    match problem {
        SbsamProblem::Tsp(g) => {
            if g.n() < 3 {
                return Err(Error::invalid("tour construction needs at least 3 nodes"));
            }
            solve_generic(g, params, seed)
        }
        SbsamProblem::Lop(m) => {
            if m.n() < 2 {
                return Err(Error::invalid("ordering needs at least 2 items"));
            }
            solve_generic(m, params, seed)
        }
    }
}
