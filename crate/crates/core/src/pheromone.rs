//! Pheromone trails: a clamped positive field plus a separate negative
//! ("no-entry") field, both decaying at a species-dependent half-life.

use std::collections::HashMap;

use crate::instances::{Edge, WeightedGraph};
use crate::{Error, Result};

/// Behavior constants of an ant species. Time is measured in ticks, one tick
/// per iteration.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeciesProfile {
    pub name: String,
    /// Ticks for a trail to lose half its strength.
    pub half_life: f64,
    pub uturn_prob: f64,
    pub uses_negative: bool,
    /// Weight of pheromone against private memory and heuristic information.
    pub trail_reliance: f64,
}

impl SpeciesProfile {
    pub fn new(
        name: impl Into<String>,
        half_life: f64,
        uturn_prob: f64,
        uses_negative: bool,
        trail_reliance: f64,
    ) -> Result<Self> {
        let p = Self {
            name: name.into(),
            half_life,
            uturn_prob,
            uses_negative,
            trail_reliance,
        };
        p.validate()?;
        Ok(p)
    }

    /// Plain ACS ants.
    pub fn generic() -> Self {
        Self {
            name: "generic".into(),
            half_life: 60.0,
            uturn_prob: 0.0,
            uses_negative: false,
            trail_reliance: 1.0,
        }
    }

    /// Pharaoh ants: 30-tick trails, 37% u-turns, negative pheromone.
    pub fn pharaoh() -> Self {
        Self {
            name: "pharaoh".into(),
            half_life: 30.0,
            uturn_prob: 0.37,
            uses_negative: true,
            trail_reliance: 1.0,
        }
    }

    /// Lasius niger: trails last three times longer than Pharaoh trails.
    pub fn lasius() -> Self {
        Self {
            name: "lasius".into(),
            half_life: 90.0,
            uturn_prob: 0.0,
            uses_negative: false,
            trail_reliance: 0.5,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.half_life > 0.0) {
            return Err(Error::invalid(format!("half_life must be > 0, got {}", self.half_life)));
        }
        if !(0.0..=1.0).contains(&self.uturn_prob) {
            return Err(Error::invalid(format!("uturn_prob {} not in [0,1]", self.uturn_prob)));
        }
        if !(0.0..=1.0).contains(&self.trail_reliance) {
            return Err(Error::invalid(format!(
                "trail_reliance {} not in [0,1]",
                self.trail_reliance
            )));
        }
        Ok(())
    }

    /// Per-tick multiplicative decay factor `2^(-1/half_life)`.
    pub fn decay_factor(&self) -> f64 {
        (-1.0 / self.half_life).exp2()
    }
}

/// Read access to trail values. Implemented by the shared field and by the
/// per-ant overlay used during construction.
pub trait TrailView {
    fn tau(&self, i: usize, j: usize) -> f64;
    fn blocked(&self, i: usize, j: usize) -> bool;
    fn tau0(&self) -> f64;
}

/// Trail writes an ant may perform while it walks.
pub trait TrailWrite: TrailView {
    fn local_update(&mut self, i: usize, j: usize, rho_local: f64);
    fn erode(&mut self, i: usize, j: usize, xi: f64);
}

/// Symmetric positive trail field with a separate negative field.
#[derive(Debug, Clone, PartialEq)]
pub struct PheromoneField {
    n: usize,
    tau: Vec<f64>,
    neg: Vec<f64>,
    tau0: f64,
    tau_min: f64,
    tau_max: f64,
    block_threshold: f64,
}

fn check_rate(name: &str, rho: f64) -> Result<()> {
    if rho > 0.0 && rho <= 1.0 {
        Ok(())
    } else {
        Err(Error::invalid(format!("{name} must be in (0,1], got {rho}")))
    }
}

impl PheromoneField {
    /// Uniform field at `tau0`, clamped to `[tau0/1000, 1000·tau0]`.
    pub fn new(n: usize, tau0: f64) -> Result<Self> {
        if !(tau0 > 0.0 && tau0.is_finite()) {
            return Err(Error::invalid(format!("tau0 must be positive and finite, got {tau0}")));
        }
        Ok(Self {
            n,
            tau: vec![tau0; n * n],
            neg: vec![0.0; n * n],
            tau0,
            tau_min: tau0 / 1000.0,
            tau_max: tau0 * 1000.0,
            block_threshold: 1.0,
        })
    }

    pub fn with_block_threshold(mut self, threshold: f64) -> Result<Self> {
        if !(threshold > 0.0) {
            return Err(Error::invalid(format!("block_threshold must be > 0, got {threshold}")));
        }
        self.block_threshold = threshold;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn tau_min(&self) -> f64 {
        self.tau_min
    }

    pub fn tau_max(&self) -> f64 {
        self.tau_max
    }

    pub fn block_threshold(&self) -> f64 {
        self.block_threshold
    }

    pub fn neg(&self, i: usize, j: usize) -> f64 {
        self.neg[i * self.n + j]
    }

    #[inline]
    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.tau_min, self.tau_max)
    }

    fn set(&mut self, i: usize, j: usize, v: f64) {
        self.tau[i * self.n + j] = v;
        self.tau[j * self.n + i] = v;
    }

    /// Overwrites a trail value, clamped. Mostly useful for tests and tooling.
    pub fn set_tau(&mut self, i: usize, j: usize, v: f64) {
        let v = self.clamp(v);
        self.set(i, j, v);
    }

    /// One tick of evaporation for both fields.
    pub fn decay_step(&mut self, species: &SpeciesProfile) {
        let f = species.decay_factor();
        let lo = self.tau_min;
        for t in &mut self.tau {
            *t = (*t * f).max(lo);
        }
        for v in &mut self.neg {
            *v *= f;
        }
    }

    /// Pulls the edge toward `tau0`.
    pub fn local_update(&mut self, i: usize, j: usize, rho_local: f64) -> Result<()> {
        check_rate("rho_local", rho_local)?;
        let v = self.clamp((1.0 - rho_local) * self.tau(i, j) + rho_local * self.tau0);
        self.set(i, j, v);
        Ok(())
    }

    /// `tau ← (1-rho)·tau + rho·deposit` on each listed edge.
    pub fn reinforce(&mut self, edges: &[Edge], deposit: f64, rho: f64) -> Result<()> {
        check_rate("rho_global", rho)?;
        for &(i, j) in edges {
            let v = self.clamp((1.0 - rho) * self.tau(i, j) + rho * deposit);
            self.set(i, j, v);
        }
        Ok(())
    }

    /// Elitist update with deposit `1/cost` on the edges of the best solution.
    pub fn global_update(&mut self, edges: &[Edge], cost: f64, rho_global: f64) -> Result<()> {
        if !(cost > 0.0 && cost.is_finite()) {
            return Err(Error::invalid(format!("best cost must be positive, got {cost}")));
        }
        self.reinforce(edges, 1.0 / cost, rho_global)
    }

    /// `tau ← tau·(1+rate)` on each listed edge.
    pub fn scale(&mut self, edges: &[Edge], factor: f64) {
        for &(i, j) in edges {
            let v = self.clamp(self.tau(i, j) * factor);
            self.set(i, j, v);
        }
    }

    /// Step-back erosion `tau ← max(tau_min, (1-xi)·tau)`.
    pub fn erode_edge(&mut self, i: usize, j: usize, xi: f64) {
        let v = self.clamp((1.0 - xi) * self.tau(i, j));
        self.set(i, j, v);
    }

    /// Adds negative pheromone to each listed edge.
    pub fn mark_negative(&mut self, edges: &[Edge], amount: f64) -> Result<()> {
        if !(amount > 0.0 && amount.is_finite()) {
            return Err(Error::invalid(format!("negative amount must be > 0, got {amount}")));
        }
        for &(i, j) in edges {
            self.neg[i * self.n + j] += amount;
            self.neg[j * self.n + i] += amount;
        }
        Ok(())
    }

    /// Number of blocked unordered edges.
    pub fn blocked_count(&self) -> usize {
        let mut count = 0;
        for i in 0..self.n {
            for j in i + 1..self.n {
                if self.neg(i, j) >= self.block_threshold {
                    count += 1;
                }
            }
        }
        count
    }

    /// Applies a construction-time write recorded by an [`AntView`].
    pub fn apply(&mut self, op: &FieldOp) {
        match *op {
            FieldOp::Local { i, j, rho } => {
                let v = self.clamp((1.0 - rho) * self.tau(i, j) + rho * self.tau0);
                self.set(i, j, v);
            }
            FieldOp::Erode { i, j, xi } => self.erode_edge(i, j, xi),
        }
    }
}

impl TrailView for PheromoneField {
    #[inline]
    fn tau(&self, i: usize, j: usize) -> f64 {
        self.tau[i * self.n + j]
    }

    #[inline]
    fn blocked(&self, i: usize, j: usize) -> bool {
        self.neg[i * self.n + j] >= self.block_threshold
    }

    fn tau0(&self) -> f64 {
        self.tau0
    }
}

impl TrailWrite for PheromoneField {
    fn local_update(&mut self, i: usize, j: usize, rho_local: f64) {
        self.apply(&FieldOp::Local { i, j, rho: rho_local });
    }

    fn erode(&mut self, i: usize, j: usize, xi: f64) {
        self.erode_edge(i, j, xi);
    }
}

/// A trail write made during construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum FieldOp {
    Local { i: usize, j: usize, rho: f64 },
    Erode { i: usize, j: usize, xi: f64 },
}

/// An ant's private view of the shared field: reads fall through to the
/// iteration snapshot, the ant's own writes are visible to itself and logged
/// for replay at the iteration barrier.
#[derive(Debug)]
pub struct AntView<'f> {
    field: &'f PheromoneField,
    overlay: HashMap<Edge, f64>,
    log: Vec<FieldOp>,
}

impl<'f> AntView<'f> {
    pub fn new(field: &'f PheromoneField) -> Self {
        Self {
            field,
            overlay: HashMap::new(),
            log: Vec::new(),
        }
    }

    pub fn into_log(self) -> Vec<FieldOp> {
        self.log
    }

    fn write(&mut self, i: usize, j: usize, v: f64) {
        self.overlay.insert(crate::instances::edge(i, j), v);
    }
}

impl TrailView for AntView<'_> {
    #[inline]
    fn tau(&self, i: usize, j: usize) -> f64 {
        if self.overlay.is_empty() {
            return self.field.tau(i, j);
        }
        match self.overlay.get(&crate::instances::edge(i, j)) {
            Some(&v) => v,
            None => self.field.tau(i, j),
        }
    }

    #[inline]
    fn blocked(&self, i: usize, j: usize) -> bool {
        self.field.blocked(i, j)
    }

    fn tau0(&self) -> f64 {
        self.field.tau0
    }
}

impl TrailWrite for AntView<'_> {
    fn local_update(&mut self, i: usize, j: usize, rho: f64) {
        let v = self
            .field
            .clamp((1.0 - rho) * self.tau(i, j) + rho * self.field.tau0);
        self.write(i, j, v);
        self.log.push(FieldOp::Local { i, j, rho });
    }

    fn erode(&mut self, i: usize, j: usize, xi: f64) {
        let v = self.field.clamp((1.0 - xi) * self.tau(i, j));
        self.write(i, j, v);
        self.log.push(FieldOp::Erode { i, j, xi });
    }
}

/// Unnormalized state-transition weights `tau^alpha · eta^beta` for each
/// candidate; blocked edges get weight zero when `respect_no_entry` is set.
pub fn transition_weights<V: TrailView>(
    view: &V,
    current: usize,
    candidates: &[usize],
    heuristic: impl Fn(usize) -> f64,
    alpha: f64,
    beta: f64,
    respect_no_entry: bool,
) -> Vec<f64> {
    candidates
        .iter()
        .map(|&j| {
            if respect_no_entry && view.blocked(current, j) {
                0.0
            } else {
                view.tau(current, j).powf(alpha) * heuristic(j).powf(beta)
            }
        })
        .collect()
}

/// Normalizes weights into a distribution; all-zero (or degenerate) weights
/// fall back to uniform.
pub fn normalize(weights: &[f64]) -> Vec<f64> {
    let total: f64 = weights.iter().sum();
    if total > 0.0 && total.is_finite() {
        weights.iter().map(|w| w / total).collect()
    } else {
        vec![1.0 / weights.len() as f64; weights.len()]
    }
}

/// Probability of moving from `current` to each node of `allowed` on a TSP
/// graph, with heuristic `1/w(current, j)`.
pub fn transition_probabilities<V: TrailView>(
    view: &V,
    graph: &WeightedGraph,
    current: usize,
    allowed: &[usize],
    alpha: f64,
    beta: f64,
    respect_no_entry: bool,
) -> Result<Vec<f64>> {
    if allowed.is_empty() {
        return Err(Error::invalid("allowed set is empty"));
    }
    let w = transition_weights(
        view,
        current,
        allowed,
        |j| 1.0 / graph.weight(current, j),
        alpha,
        beta,
        respect_no_entry,
    );
    Ok(normalize(&w))
}
