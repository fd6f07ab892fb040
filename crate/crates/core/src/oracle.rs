//! Reference estimator that fits `(n2, I_sat, alpha)` to a single observation
//! by re-simulating candidates, with no learned model involved.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::dataset::{ParameterRanges, Triplet};
use crate::error::{Error, Result};
use crate::imaging::{wrap_phase, Observation};
use crate::scenario::{Scenario, Simulator};

/// Objective of a candidate: normalized density MSE plus wrapped-phase MSE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    pub value: f64,
    /// The simulation at this candidate failed; `value` is +inf.
    pub failed: bool,
}

/// Pixels dimmer than this fraction of the target peak carry no usable phase.
pub const PHASE_MASK_FRACTION: f64 = 1e-4;

/// `mean((d_c - d_t)²) / peak_t² + mean(wrap(p_c - p_t)²)`, the phase mean taken
/// over pixels at or above `PHASE_MASK_FRACTION` of the target peak.
pub fn observation_distance(candidate: &Observation, target: &Observation) -> f64 {
    let peak = target.peak_density() as f64;
    let norm = if peak > 0.0 { 1.0 / (peak * peak) } else { 1.0 };
    let n = target.density.len() as f64;
    let density: f64 = candidate
        .density
        .iter()
        .zip(&target.density)
        .map(|(&a, &b)| (a as f64 - b as f64).powi(2))
        .sum::<f64>()
        * norm
        / n;
    let floor = PHASE_MASK_FRACTION * peak;
    let (sum, lit) = candidate
        .phase
        .iter()
        .zip(&target.phase)
        .zip(&target.density)
        .filter(|(_, &d)| d as f64 >= floor)
        .fold((0.0f64, 0usize), |(s, c), ((&a, &b), _)| {
            (s + wrap_phase(a as f64 - b as f64).powi(2), c + 1)
        });
    let phase = if lit > 0 { sum / lit as f64 } else { 0.0 };
    density + phase
}

fn check_candidate(candidate: &Triplet) -> Result<()> {
    if candidate.iter().all(|c| (0.0..=1.0).contains(c)) {
        Ok(())
    } else {
        Err(Error::invalid(
            "candidate",
            format!("{candidate:?} is outside [0, 1]^3"),
        ))
    }
}

fn evaluate_with(
    simulator: &mut Simulator,
    ranges: &ParameterRanges,
    candidate: &Triplet,
    target: &Observation,
) -> Evaluation {
    match simulator.observe(&ranges.denormalize(candidate)) {
        Ok(obs) => Evaluation {
            value: observation_distance(&obs, target),
            failed: false,
        },
        Err(_) => Evaluation {
            value: f64::INFINITY,
            failed: true,
        },
    }
}

/// Objective at a normalized `candidate` against `target`, simulated noiselessly.
pub fn objective(
    candidate: &Triplet,
    target: &Observation,
    scenario: &Scenario,
    ranges: &ParameterRanges,
) -> Result<Evaluation> {
    check_candidate(candidate)?;
    target.validate()?;
    let mut sim = Simulator::new(*scenario)?;
    Ok(evaluate_with(&mut sim, ranges, candidate, target))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    Grid,
    NelderMead,
}

impl std::str::FromStr for FitMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "grid" => Ok(Self::Grid),
            "nelder-mead" | "nm" => Ok(Self::NelderMead),
            other => Err(Error::invalid(
                "method",
                format!("expected grid or nelder-mead, got {other}"),
            )),
        }
    }
}

/// Smallest accepted evaluation budget (one 3x3x3 lattice).
pub const MIN_BUDGET: usize = 27;

/// Grid refinement stops once the lattice spacing drops below this.
const GRID_TOLERANCE: f64 = 1e-3;
/// Simplex stops once every vertex lies within this of the best one.
const SIMPLEX_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEntry {
    pub candidate: Triplet,
    pub objective: f64,
    /// Lowest objective seen up to and including this evaluation.
    pub best_objective: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Best normalized triplet.
    pub best: Triplet,
    /// Best triplet in physical units.
    pub best_physical: Triplet,
    pub objective: f64,
    pub evaluations: usize,
    pub converged: bool,
    /// Every simulated candidate in evaluation order.
    pub trace: Vec<TraceEntry>,
}

/// Memoizing, budget-limited objective shared by both fit methods.
struct Search<'a> {
    scenario: Scenario,
    simulator: Simulator,
    ranges: &'a ParameterRanges,
    target: &'a Observation,
    budget: usize,
    cache: HashMap<[u64; 3], f64>,
    trace: Vec<TraceEntry>,
    best: Option<(Triplet, f64)>,
}

fn key(c: &Triplet) -> [u64; 3] {
    c.map(|v| (v + 0.0).to_bits())
}

impl<'a> Search<'a> {
    fn remaining(&self) -> usize {
        self.budget - self.trace.len()
    }

    fn record(&mut self, candidate: Triplet, value: f64) {
        self.cache.insert(key(&candidate), value);
        if self.best.is_none_or(|(_, b)| value < b) {
            self.best = Some((candidate, value));
        }
        let best_objective = self.best.map_or(value, |(_, b)| b);
        self.trace.push(TraceEntry {
            candidate,
            objective: value,
            best_objective,
        });
    }

    /// Evaluates a candidate; `None` once the budget is spent.
    fn eval(&mut self, candidate: Triplet) -> Option<f64> {
        let candidate = candidate.map(|v| v.clamp(0.0, 1.0));
        if let Some(&v) = self.cache.get(&key(&candidate)) {
            return Some(v);
        }
        if self.remaining() == 0 {
            return None;
        }
        let v = evaluate_with(&mut self.simulator, self.ranges, &candidate, self.target).value;
        self.record(candidate, v);
        Some(v)
    }

    /// Evaluates uncached candidates concurrently, recording them in order.
    /// Returns false if the budget could not cover all of them.
    fn eval_batch(&mut self, candidates: &[Triplet]) -> bool {
        let mut fresh: Vec<Triplet> = Vec::new();
        for c in candidates {
            let c = c.map(|v| v.clamp(0.0, 1.0));
            if !self.cache.contains_key(&key(&c)) && !fresh.iter().any(|f| key(f) == key(&c)) {
                fresh.push(c);
            }
        }
        let complete = fresh.len() <= self.remaining();
        fresh.truncate(self.remaining());
        let (scenario, ranges, target) = (self.scenario, self.ranges, self.target);
        let values: Vec<f64> = fresh
            .par_iter()
            .map_init(
                || Simulator::new(scenario),
                |sim, c| match sim {
                    Ok(sim) => evaluate_with(sim, ranges, c, target).value,
                    Err(_) => f64::INFINITY,
                },
            )
            .collect();
        for (c, v) in fresh.into_iter().zip(values) {
            self.record(c, v);
        }
        complete
    }

    fn best(&self) -> (Triplet, f64) {
        self.best.expect("at least one evaluation")
    }

    fn finish(self, converged: bool) -> FitResult {
        let (best, objective) = self.best();
        FitResult {
            best,
            best_physical: self.ranges.denormalize(&best),
            objective,
            evaluations: self.trace.len(),
            converged,
            trace: self.trace,
        }
    }
}

fn lattice(center: Triplet, spacing: f64, points: usize) -> Vec<Triplet> {
    let half = (points - 1) as f64 / 2.0;
    let offsets: Vec<f64> = (0..points).map(|i| (i as f64 - half) * spacing).collect();
    let mut out = Vec::with_capacity(points.pow(3));
    for &a in &offsets {
        for &b in &offsets {
            for &c in &offsets {
                out.push([center[0] + a, center[1] + b, center[2] + c]);
            }
        }
    }
    out
}

/// Number of nodes per axis of the coarse lattice for a budget.
fn coarse_points(budget: usize) -> usize {
    if budget >= 125 {
        5
    } else if budget >= 64 {
        4
    } else {
        3
    }
}

/// Fits a normalized triplet to `target`.
///
/// Both methods start with a coarse lattice over `[0, 1]³` (5 nodes per axis
/// when the budget allows, down to 3). `Grid` then evaluates 3x3x3 lattices
/// around the incumbent with halving spacing; `NelderMead` runs a simplex,
/// confined to the unit cube, from the coarse winner.
pub fn fit(
    target: &Observation,
    scenario: &Scenario,
    ranges: &ParameterRanges,
    method: FitMethod,
    budget: usize,
) -> Result<FitResult> {
    Oracle::new(*scenario, *ranges)?.fit(target, method, budget)
}

/// Fits many observations of one scenario. The coarse lattice is simulated
/// once and shared; results equal those of [`fit`].
pub struct Oracle {
    scenario: Scenario,
    ranges: ParameterRanges,
    /// Coarse lattice observations by nodes per axis; `None` marks a failed simulation.
    coarse: Mutex<HashMap<usize, Arc<Vec<Option<Observation>>>>>,
}

impl Oracle {
    pub fn new(scenario: Scenario, ranges: ParameterRanges) -> Result<Self> {
        ranges.validate()?;
        Simulator::new(scenario)?;
        Ok(Self {
            scenario,
            ranges,
            coarse: Mutex::new(HashMap::new()),
        })
    }

    fn coarse_observations(&self, m: usize, nodes: &[Triplet]) -> Arc<Vec<Option<Observation>>> {
        let mut coarse = self.coarse.lock().unwrap_or_else(|e| e.into_inner());
        let scenario = self.scenario;
        let ranges = &self.ranges;
        coarse
            .entry(m)
            .or_insert_with(|| {
                Arc::new(
                    nodes
                        .par_iter()
                        .map_init(
                            || Simulator::new(scenario),
                            |sim, c| sim.as_mut().ok()?.observe(&ranges.denormalize(c)).ok(),
                        )
                        .collect(),
                )
            })
            .clone()
    }

    pub fn fit(&self, target: &Observation, method: FitMethod, budget: usize) -> Result<FitResult> {
        if budget < MIN_BUDGET {
            return Err(Error::invalid(
                "budget",
                format!("must be at least {MIN_BUDGET}, got {budget}"),
            ));
        }
        target.validate()?;
        let mut search = Search {
            scenario: self.scenario,
            simulator: Simulator::new(self.scenario)?,
            ranges: &self.ranges,
            target,
            budget,
            cache: HashMap::new(),
            trace: Vec::new(),
            best: None,
        };
        let m = coarse_points(budget);
        let spacing = 1.0 / (m - 1) as f64;
        let nodes = lattice([0.5; 3], spacing, m);
        let observations = self.coarse_observations(m, &nodes);
        for (node, obs) in nodes.iter().zip(observations.iter()) {
            let value = obs.as_ref().map_or(f64::INFINITY, |o| observation_distance(o, target));
            search.record(node.map(|v| v.clamp(0.0, 1.0)), value);
        }
        let converged = match method {
            FitMethod::Grid => refine_grid(&mut search, spacing),
            FitMethod::NelderMead => nelder_mead(&mut search, spacing / 2.0),
        };
        Ok(search.finish(converged))
    }
}

fn refine_grid(search: &mut Search<'_>, mut spacing: f64) -> bool {
    while spacing >= GRID_TOLERANCE {
        spacing /= 2.0;
        let (center, _) = search.best();
        if !search.eval_batch(&lattice(center, spacing, 3)) {
            return false;
        }
    }
    true
}

fn nelder_mead(search: &mut Search<'_>, step: f64) -> bool {
    const REFLECT: f64 = 1.0;
    const EXPAND: f64 = 2.0;
    const CONTRACT: f64 = 0.5;
    const SHRINK: f64 = 0.5;

    let (start, start_value) = search.best();
    let mut simplex: Vec<(Triplet, f64)> = vec![(start, start_value)];
    for k in 0..3 {
        let mut p = start;
        p[k] = if p[k] + step <= 1.0 { p[k] + step } else { p[k] - step };
        let Some(v) = search.eval(p) else { return false };
        simplex.push((p, v));
    }

    let along = |from: &Triplet, to: &Triplet, t: f64| -> Triplet {
        std::array::from_fn(|k| from[k] + t * (to[k] - from[k]))
    };
    // Points outside the cube rank below every inside point and cost nothing.
    let score = |search: &mut Search<'_>, p: Triplet| -> Option<f64> {
        if p.iter().all(|v| (0.0..=1.0).contains(v)) {
            search.eval(p)
        } else {
            Some(f64::INFINITY)
        }
    };

    loop {
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let best = simplex[0];
        let size = simplex[1..]
            .iter()
            .map(|(p, _)| (0..3).map(|k| (p[k] - best.0[k]).abs()).fold(0.0, f64::max))
            .fold(0.0, f64::max);
        if size < SIMPLEX_TOLERANCE {
            return true;
        }
        let worst = simplex[3];
        let centroid: Triplet =
            std::array::from_fn(|k| simplex[..3].iter().map(|(p, _)| p[k]).sum::<f64>() / 3.0);

        let reflected = along(&centroid, &worst.0, -REFLECT);
        let Some(fr) = score(search, reflected) else { return false };
        if fr < best.1 {
            let expanded = along(&centroid, &worst.0, -EXPAND);
            let Some(fe) = score(search, expanded) else { return false };
            simplex[3] = if fe < fr { (expanded, fe) } else { (reflected, fr) };
            continue;
        }
        if fr < simplex[2].1 {
            simplex[3] = (reflected, fr);
            continue;
        }
        let (contracted, fc) = if fr < worst.1 {
            let c = along(&centroid, &reflected, CONTRACT);
            let Some(v) = score(search, c) else { return false };
            (c, v)
        } else {
            let c = along(&centroid, &worst.0, CONTRACT);
            let Some(v) = score(search, c) else { return false };
            (c, v)
        };
        if fc < worst.1.min(fr) {
            simplex[3] = (contracted, fc);
            continue;
        }
        for vertex in simplex.iter_mut().skip(1) {
            let p = along(&best.0, &vertex.0, SHRINK);
            let Some(v) = score(search, p) else { return false };
            *vertex = (p, v);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::imaging::IMAGE_PIXELS;

    #[test]
    fn wrapped_phase_distance_uses_principal_value() {
        let d = 0.1f32;
        let pi = std::f32::consts::PI;
        let a = Observation::new(vec![1.0; IMAGE_PIXELS], vec![pi - d; IMAGE_PIXELS]).unwrap();
        let b = Observation::new(vec![1.0; IMAGE_PIXELS], vec![-pi + d; IMAGE_PIXELS]).unwrap();
        let dist = observation_distance(&a, &b);
        let expected = (2.0 * d as f64).powi(2);
        assert!((dist - expected).abs() < 1e-6, "{dist} vs {expected}");
    }

    #[test]
    fn dark_pixels_do_not_count_toward_phase() {
        let mut density = vec![0.0f32; IMAGE_PIXELS];
        density[..10].fill(1.0);
        let target = Observation::new(density.clone(), vec![0.0; IMAGE_PIXELS]).unwrap();
        let mut phase = vec![2.0f32; IMAGE_PIXELS];
        phase[..10].fill(0.0);
        let candidate = Observation::new(density, phase).unwrap();
        assert_eq!(observation_distance(&candidate, &target), 0.0);
    }

    #[test]
    fn lattice_shapes() {
        let l = lattice([0.5; 3], 0.25, 5);
        assert_eq!(l.len(), 125);
        assert_eq!(l[0], [0.0, 0.0, 0.0]);
        assert_eq!(l[124], [1.0, 1.0, 1.0]);
        assert_eq!(coarse_points(27), 3);
        assert_eq!(coarse_points(500), 5);
    }

    #[test]
    fn method_names() {
        assert_eq!("grid".parse::<FitMethod>().unwrap(), FitMethod::Grid);
        assert_eq!("nelder-mead".parse::<FitMethod>().unwrap(), FitMethod::NelderMead);
        assert!("bfgs".parse::<FitMethod>().is_err());
    }
}
