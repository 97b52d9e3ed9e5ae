//! Constrained stochastic optimization over a box.
//!
//! Two optimizers share the same augmented-Lagrangian outer loop:
//! a particle swarm (ALPSO) and a harmony search (ALHSO). Inequality
//! constraints `g(x) <= 0` are folded into
//! `L = f + sum lambda_i theta_i + sum r_i theta_i^2` with
//! `theta_i = max(g_i, -lambda_i / (2 r_i))`; multipliers are updated
//! after every inner loop and penalties grow where the violation stalls.
//!
//! Runs are deterministic per seed: each particle draws from its own
//! counter-based RNG stream and all reductions happen in fixed particle
//! order, so results do not depend on evaluation parallelism.

use alloc::boxed::Box;
use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::Cell;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::Error;
use crate::Result;

/// Objective and constraint values at one design.
#[derive(Debug, Clone, PartialEq)]
pub struct ProblemEval {
    pub objective: f64,
    /// Inequality constraints, feasible when `g <= 0`.
    pub constraints: Vec<f64>,
}

impl ProblemEval {
    pub fn max_violation(&self) -> f64 {
        self.constraints.iter().fold(0.0f64, |m, &g| m.max(g))
    }
}

type EvalFn<'a> = dyn FnMut(&[f64]) -> ProblemEval + 'a;

/// A minimization problem over a finite box.
pub struct OptimizationProblem<'a> {
    pub label: String,
    /// Per-variable inclusive `[lo, hi]` bounds.
    pub bounds: Vec<(f64, f64)>,
    pub n_constraints: usize,
    /// Optional starting designs (e.g. warm starts from a related problem).
    pub hints: Vec<Vec<f64>>,
    eval: Box<EvalFn<'a>>,
    counter: Rc<Cell<u64>>,
}

impl<'a> OptimizationProblem<'a> {
    /// Wraps an objective/constraint closure. The closure returns both in
    /// one call so implementations can share common work; the attached
    /// counter is bumped on every call.
    pub fn new(
        label: &str,
        bounds: Vec<(f64, f64)>,
        n_constraints: usize,
        mut eval: impl FnMut(&[f64]) -> ProblemEval + 'a,
    ) -> Result<Self> {
        let counter = Rc::new(Cell::new(0u64));
        let c = counter.clone();
        Self::with_counter(label, bounds, n_constraints, counter, move |x| {
            c.set(c.get() + 1);
            eval(x)
        })
    }

    /// Like [`OptimizationProblem::new`] but with an external evaluation
    /// counter that the closure maintains itself (e.g. the homogenization
    /// memo layer, which only counts designs that actually required a
    /// finite element solve).
    pub fn with_counter(
        label: &str,
        bounds: Vec<(f64, f64)>,
        n_constraints: usize,
        counter: Rc<Cell<u64>>,
        eval: impl FnMut(&[f64]) -> ProblemEval + 'a,
    ) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::InvalidConfig("empty bounds"));
        }
        for &(lo, hi) in &bounds {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidConfig("bounds must be finite with lo < hi"));
            }
        }
        Ok(OptimizationProblem {
            label: String::from(label),
            bounds,
            n_constraints,
            hints: Vec::new(),
            eval: Box::new(eval),
            counter,
        })
    }

    pub fn evaluate(&mut self, x: &[f64]) -> ProblemEval {
        (self.eval)(x)
    }

    /// Evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.counter.get()
    }
}

/// Shared configuration of both optimizers.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
#[cfg_attr(feature = "serde", serde(default, deny_unknown_fields))]
pub struct OptConfig {
    pub swarm_size: usize,
    pub outer_iterations: usize,
    pub inner_iterations: usize,
    /// Linear inertia schedule over all inner steps.
    pub inertia_start: f64,
    pub inertia_end: f64,
    pub cognitive: f64,
    pub social: f64,
    /// Velocity clamp as a fraction of each variable's range.
    pub velocity_clamp: f64,
    pub initial_penalty: f64,
    pub penalty_growth: f64,
    pub penalty_max: f64,
    pub multiplier_max: f64,
    /// A point is feasible when every `g <= constraint_tolerance`.
    pub constraint_tolerance: f64,
    /// Outer-loop stall tolerance on the augmented objective.
    pub stall_tolerance: f64,
    /// Consecutive feasible stalled outers before termination.
    pub stall_outers: usize,
    /// Hard cap on design evaluations.
    pub max_evaluations: u64,
    // harmony search
    pub harmony_memory: usize,
    /// Memory consideration rate.
    pub harmony_rate: f64,
    pub pitch_rate: f64,
    /// Pitch bandwidth as a fraction of each variable's range.
    pub bandwidth: f64,
    /// Fraction of the initial swarm/memory seeded from hints.
    pub warm_fraction: f64,
}

impl Default for OptConfig {
    fn default() -> Self {
        OptConfig {
            swarm_size: 40,
            outer_iterations: 50,
            inner_iterations: 10,
            inertia_start: 0.9,
            inertia_end: 0.4,
            cognitive: 1.5,
            social: 1.5,
            velocity_clamp: 0.25,
            initial_penalty: 1.0,
            penalty_growth: 2.0,
            penalty_max: 1e8,
            multiplier_max: 1e6,
            constraint_tolerance: 1e-4,
            stall_tolerance: 1e-4,
            stall_outers: 3,
            max_evaluations: 3000,
            harmony_memory: 20,
            harmony_rate: 0.9,
            pitch_rate: 0.35,
            bandwidth: 0.05,
            warm_fraction: 0.2,
        }
    }
}

impl OptConfig {
    pub fn validate(&self) -> Result<()> {
        if self.swarm_size == 0 || self.outer_iterations == 0 || self.inner_iterations == 0 {
            return Err(Error::InvalidConfig("iteration counts must be positive"));
        }
        if self.harmony_memory == 0 {
            return Err(Error::InvalidConfig("harmony memory must be positive"));
        }
        for (name, v) in [
            ("velocity_clamp", self.velocity_clamp),
            ("initial_penalty", self.initial_penalty),
            ("penalty_growth", self.penalty_growth),
            ("constraint_tolerance", self.constraint_tolerance),
            ("stall_tolerance", self.stall_tolerance),
            ("bandwidth", self.bandwidth),
        ] {
            if !(v > 0.0) || !v.is_finite() {
                let _ = name;
                return Err(Error::InvalidConfig("tolerances and rates must be positive"));
            }
        }
        if self.max_evaluations == 0 {
            return Err(Error::InvalidConfig("max_evaluations must be positive"));
        }
        Ok(())
    }
}

/// One outer-iteration record.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OuterRecord {
    pub outer: usize,
    /// Best feasible raw objective so far (NaN until a feasible point exists).
    pub best_objective: f64,
    /// Augmented objective of the current swarm best.
    pub augmented: f64,
    pub max_violation: f64,
    pub evaluations: u64,
}

/// Optimization outcome.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct OptResult {
    pub best: Vec<f64>,
    pub best_objective: f64,
    pub constraint_values: Vec<f64>,
    pub evaluations: u64,
    pub history: Vec<OuterRecord>,
    pub feasible: bool,
}

/// Augmented Lagrangian for inequality constraints:
/// `L = f + sum lambda_i theta_i + sum r_i theta_i^2`,
/// `theta_i = max(g_i, -lambda_i / (2 r_i))`.
pub fn augmented_lagrangian(f: f64, g: &[f64], lambda: &[f64], r: &[f64]) -> f64 {
    debug_assert_eq!(g.len(), lambda.len());
    debug_assert_eq!(g.len(), r.len());
    let mut l = f;
    for i in 0..g.len() {
        let theta = g[i].max(-lambda[i] / (2.0 * r[i]));
        l += lambda[i] * theta + r[i] * theta * theta;
    }
    l
}

fn stream_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

fn clip(x: &mut [f64], bounds: &[(f64, f64)]) {
    for (v, &(lo, hi)) in x.iter_mut().zip(bounds) {
        *v = v.clamp(lo, hi);
    }
}

/// Tracks the best feasible point and the least-violating fallback.
struct BestTracker {
    tol: f64,
    feasible: Option<(f64, Vec<f64>, Vec<f64>)>,
    fallback: Option<(f64, f64, Vec<f64>, Vec<f64>)>,
}

impl BestTracker {
    fn new(tol: f64) -> Self {
        BestTracker {
            tol,
            feasible: None,
            fallback: None,
        }
    }

    fn observe(&mut self, x: &[f64], e: &ProblemEval) {
        let viol = e.max_violation();
        if viol <= self.tol {
            let better = self
                .feasible
                .as_ref()
                .map(|(f, _, _)| e.objective < *f)
                .unwrap_or(true);
            if better {
                self.feasible = Some((e.objective, x.to_vec(), e.constraints.clone()));
            }
        } else {
            let better = self
                .fallback
                .as_ref()
                .map(|(v, f, _, _)| viol < *v || (viol == *v && e.objective < *f))
                .unwrap_or(true);
            if better {
                self.fallback = Some((viol, e.objective, x.to_vec(), e.constraints.clone()));
            }
        }
    }

    fn best_feasible_objective(&self) -> f64 {
        self.feasible
            .as_ref()
            .map(|(f, _, _)| *f)
            .unwrap_or(f64::NAN)
    }

    fn into_result(
        self,
        problem: &mut OptimizationProblem<'_>,
        history: Vec<OuterRecord>,
        tol: f64,
    ) -> OptResult {
        let (x, _) = match (&self.feasible, &self.fallback) {
            (Some((f, x, _)), _) => (x.clone(), *f),
            (None, Some((_, f, x, _))) => (x.clone(), *f),
            (None, None) => (Vec::new(), f64::NAN),
        };
        if x.is_empty() {
            return OptResult {
                best: x,
                best_objective: f64::NAN,
                constraint_values: Vec::new(),
                evaluations: problem.evaluations(),
                history,
                feasible: false,
            };
        }
        // certify feasibility by direct re-evaluation at the best point
        let check = problem.evaluate(&x);
        let feasible = check.max_violation() <= tol;
        OptResult {
            best: x,
            best_objective: check.objective,
            constraint_values: check.constraints,
            evaluations: problem.evaluations(),
            history,
            feasible,
        }
    }
}

/// Outer-loop multiplier and penalty state shared by both optimizers.
struct OuterState {
    lambda: Vec<f64>,
    penalty: Vec<f64>,
    prev_violation: Vec<f64>,
    prev_augmented: f64,
    stall: usize,
}

impl OuterState {
    fn new(nc: usize, cfg: &OptConfig) -> Self {
        OuterState {
            lambda: vec![0.0; nc],
            penalty: vec![cfg.initial_penalty; nc],
            prev_violation: vec![f64::INFINITY; nc],
            prev_augmented: f64::INFINITY,
            stall: 0,
        }
    }

    fn augmented(&self, e: &ProblemEval) -> f64 {
        augmented_lagrangian(e.objective, &e.constraints, &self.lambda, &self.penalty)
    }

    /// Multiplier/penalty update at the loop best; returns true when the
    /// run has stalled feasibly for `stall_outers` consecutive outers.
    fn update(&mut self, best: &ProblemEval, cfg: &OptConfig) -> bool {
        let l_best = self.augmented(best);
        for i in 0..self.lambda.len() {
            let theta = best.constraints[i].max(-self.lambda[i] / (2.0 * self.penalty[i]));
            self.lambda[i] =
                (self.lambda[i] + 2.0 * self.penalty[i] * theta).clamp(0.0, cfg.multiplier_max);
            let viol = best.constraints[i].max(0.0);
            if viol > cfg.constraint_tolerance && viol >= self.prev_violation[i] {
                self.penalty[i] = (self.penalty[i] * cfg.penalty_growth).min(cfg.penalty_max);
            }
            self.prev_violation[i] = viol;
        }
        let feasible = best.max_violation() <= cfg.constraint_tolerance;
        if feasible && libm::fabs(l_best - self.prev_augmented) < cfg.stall_tolerance {
            self.stall += 1;
        } else {
            self.stall = 0;
        }
        self.prev_augmented = l_best;
        self.stall >= cfg.stall_outers
    }
}

/// Augmented Lagrangian Particle Swarm Optimizer.
pub fn alpso_minimize(
    problem: &mut OptimizationProblem<'_>,
    config: &OptConfig,
    seed: u64,
) -> Result<OptResult> {
    config.validate()?;
    let dim = problem.bounds.len();
    let bounds = problem.bounds.clone();
    let n = config.swarm_size;
    let eval_base = problem.evaluations();

    let vmax: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| config.velocity_clamp * (hi - lo))
        .collect();
    let mut rngs: Vec<ChaCha8Rng> = (0..n).map(|i| stream_rng(seed, i as u64 + 1)).collect();

    // initial positions; a warm fraction comes from the problem hints
    let n_hints = ((config.warm_fraction * n as f64) as usize)
        .min(problem.hints.len())
        .min(n);
    let mut x: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            if i < n_hints {
                let mut h = problem.hints[i].clone();
                h.resize(dim, 0.0);
                clip(&mut h, &bounds);
                h
            } else {
                bounds
                    .iter()
                    .map(|&(lo, hi)| rngs[i].gen_range(lo..=hi))
                    .collect()
            }
        })
        .collect();
    let mut vel = vec![vec![0.0; dim]; n];

    let mut state = OuterState::new(problem.n_constraints, config);
    let mut tracker = BestTracker::new(config.constraint_tolerance);
    let mut history = Vec::new();

    // evaluate the initial swarm
    let mut current: Vec<ProblemEval> = x
        .iter()
        .map(|xi| {
            let e = problem.evaluate(xi);
            tracker.observe(xi, &e);
            e
        })
        .collect();
    let mut pbest: Vec<(Vec<f64>, ProblemEval)> = x
        .iter()
        .cloned()
        .zip(current.iter().cloned())
        .collect();

    // anneal inertia over the steps the evaluation budget actually allows,
    // not the nominal iteration cap, so truncated runs still converge
    let budget_steps = (config.max_evaluations as usize / n.max(1)).max(2);
    let total_steps = (config.outer_iterations * config.inner_iterations)
        .max(2)
        .min(budget_steps);
    let mut step = 0usize;

    'outer: for outer in 0..config.outer_iterations {
        for _ in 0..config.inner_iterations {
            // a sweep costs up to one evaluation per particle, and the
            // final certification one more; stop early rather than
            // overshoot the budget
            if problem.evaluations() - eval_base + n as u64 + 1 > config.max_evaluations {
                break 'outer;
            }
            // personal and global bests under the current multipliers
            for i in 0..n {
                if state.augmented(&current[i]) < state.augmented(&pbest[i].1) {
                    pbest[i] = (x[i].clone(), current[i].clone());
                }
            }
            let gbest = (0..n)
                .min_by(|&a, &b| {
                    state
                        .augmented(&pbest[a].1)
                        .partial_cmp(&state.augmented(&pbest[b].1))
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap();
            let gx = pbest[gbest].0.clone();

            let w = config.inertia_start
                + (config.inertia_end - config.inertia_start) * step as f64
                    / (total_steps - 1) as f64;
            step += 1;

            for i in 0..n {
                for d in 0..dim {
                    let r1: f64 = rngs[i].gen();
                    let r2: f64 = rngs[i].gen();
                    let v = w * vel[i][d]
                        + config.cognitive * r1 * (pbest[i].0[d] - x[i][d])
                        + config.social * r2 * (gx[d] - x[i][d]);
                    vel[i][d] = v.clamp(-vmax[d], vmax[d]);
                    x[i][d] += vel[i][d];
                }
                clip(&mut x[i], &bounds);
                let e = problem.evaluate(&x[i]);
                tracker.observe(&x[i], &e);
                current[i] = e;
            }
        }

        // outer update at the swarm best
        for i in 0..n {
            if state.augmented(&current[i]) < state.augmented(&pbest[i].1) {
                pbest[i] = (x[i].clone(), current[i].clone());
            }
        }
        let gbest = (0..n)
            .min_by(|&a, &b| {
                state
                    .augmented(&pbest[a].1)
                    .partial_cmp(&state.augmented(&pbest[b].1))
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap();
        let best_eval = pbest[gbest].1.clone();
        history.push(OuterRecord {
            outer,
            best_objective: tracker.best_feasible_objective(),
            augmented: state.augmented(&best_eval),
            max_violation: best_eval.max_violation(),
            evaluations: problem.evaluations() - eval_base,
        });
        if state.update(&best_eval, config) {
            break;
        }
    }

    Ok(tracker.into_result(problem, history, config.constraint_tolerance))
}

/// Augmented Lagrangian Harmony Search Optimizer.
pub fn alhso_minimize(
    problem: &mut OptimizationProblem<'_>,
    config: &OptConfig,
    seed: u64,
) -> Result<OptResult> {
    config.validate()?;
    let dim = problem.bounds.len();
    let bounds = problem.bounds.clone();
    let m = config.harmony_memory;
    let eval_base = problem.evaluations();

    let bw: Vec<f64> = bounds
        .iter()
        .map(|&(lo, hi)| config.bandwidth * (hi - lo))
        .collect();
    let mut rng = stream_rng(seed, 0);

    let n_hints = ((config.warm_fraction * m as f64) as usize)
        .min(problem.hints.len())
        .min(m);
    let mut memory: Vec<(Vec<f64>, ProblemEval)> = Vec::with_capacity(m);
    let mut state = OuterState::new(problem.n_constraints, config);
    let mut tracker = BestTracker::new(config.constraint_tolerance);
    for i in 0..m {
        let xi: Vec<f64> = if i < n_hints {
            let mut h = problem.hints[i].clone();
            h.resize(dim, 0.0);
            clip(&mut h, &bounds);
            h
        } else {
            bounds
                .iter()
                .map(|&(lo, hi)| rng.gen_range(lo..=hi))
                .collect()
        };
        let e = problem.evaluate(&xi);
        tracker.observe(&xi, &e);
        memory.push((xi, e));
    }

    let improvisations = config.swarm_size * config.inner_iterations;
    let mut history = Vec::new();

    'outer: for outer in 0..config.outer_iterations {
        for _ in 0..improvisations {
            let mut xi = vec![0.0; dim];
            for d in 0..dim {
                if rng.gen::<f64>() < config.harmony_rate {
                    let j = rng.gen_range(0..m);
                    xi[d] = memory[j].0[d];
                    if rng.gen::<f64>() < config.pitch_rate {
                        xi[d] += bw[d] * (2.0 * rng.gen::<f64>() - 1.0);
                    }
                } else {
                    let (lo, hi) = bounds[d];
                    xi[d] = rng.gen_range(lo..=hi);
                }
            }
            clip(&mut xi, &bounds);
            let e = problem.evaluate(&xi);
            tracker.observe(&xi, &e);
            // replace the worst memory row when the new harmony improves it
            let worst = (0..m)
                .max_by(|&a, &b| {
                    state
                        .augmented(&memory[a].1)
                        .partial_cmp(&state.augmented(&memory[b].1))
                        .unwrap_or(core::cmp::Ordering::Equal)
                })
                .unwrap();
            if state.augmented(&e) < state.augmented(&memory[worst].1) {
                memory[worst] = (xi, e);
            }
            // leave room for the final certification evaluation
            if problem.evaluations() - eval_base + 1 >= config.max_evaluations {
                break 'outer;
            }
        }

        let best = (0..m)
            .min_by(|&a, &b| {
                state
                    .augmented(&memory[a].1)
                    .partial_cmp(&state.augmented(&memory[b].1))
                    .unwrap_or(core::cmp::Ordering::Equal)
            })
            .unwrap();
        let best_eval = memory[best].1.clone();
        history.push(OuterRecord {
            outer,
            best_objective: tracker.best_feasible_objective(),
            augmented: state.augmented(&best_eval),
            max_violation: best_eval.max_violation(),
            evaluations: problem.evaluations() - eval_base,
        });
        if state.update(&best_eval, config) {
            break;
        }
    }

    Ok(tracker.into_result(problem, history, config.constraint_tolerance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn sphere_constrained<'a>() -> OptimizationProblem<'a> {
        // minimize x1^2 + x2^2  s.t.  x1 + x2 >= 1, box [-5, 5]^2
        OptimizationProblem::new(
            "constrained sphere",
            vec![(-5.0, 5.0), (-5.0, 5.0)],
            1,
            |x| ProblemEval {
                objective: x[0] * x[0] + x[1] * x[1],
                constraints: vec![1.0 - x[0] - x[1]],
            },
        )
        .unwrap()
    }

    #[test]
    fn augmented_lagrangian_formula() {
        assert_eq!(augmented_lagrangian(1.0, &[], &[], &[]), 1.0);
        assert_eq!(augmented_lagrangian(0.0, &[1.0], &[0.0], &[1.0]), 1.0);
        // inactive constraint with positive multiplier: theta = -1, L = -1
        assert_eq!(augmented_lagrangian(0.0, &[-1.0], &[2.0], &[1.0]), -1.0);
    }

    #[test]
    fn augmented_equals_objective_without_constraints() {
        for f in [-3.0, 0.0, 17.5] {
            assert_eq!(augmented_lagrangian(f, &[], &[], &[]), f);
        }
    }

    #[test]
    fn alpso_solves_constrained_sphere() {
        let mut p = sphere_constrained();
        let r = alpso_minimize(&mut p, &OptConfig::default(), 42).unwrap();
        assert!(r.feasible);
        assert_relative_eq!(r.best_objective, 0.5, epsilon = 1e-3);
        assert_relative_eq!(r.best[0], 0.5, epsilon = 1e-2);
        assert_relative_eq!(r.best[1], 0.5, epsilon = 1e-2);
        assert!(r.evaluations <= 5000);
    }

    #[test]
    fn alhso_solves_constrained_sphere() {
        let mut p = sphere_constrained();
        let r = alhso_minimize(&mut p, &OptConfig::default(), 7).unwrap();
        assert!(r.feasible);
        assert_relative_eq!(r.best_objective, 0.5, epsilon = 1e-2);
        assert_relative_eq!(r.best[0], 0.5, epsilon = 1e-2);
        assert_relative_eq!(r.best[1], 0.5, epsilon = 1e-2);
    }

    #[test]
    fn alpso_solves_rosenbrock() {
        let mut p = OptimizationProblem::new(
            "rosenbrock",
            vec![(-2.0, 2.0), (-2.0, 2.0)],
            0,
            |x| {
                let a = 1.0 - x[0];
                let b = x[1] - x[0] * x[0];
                ProblemEval {
                    objective: a * a + 100.0 * b * b,
                    constraints: vec![],
                }
            },
        )
        .unwrap();
        let cfg = OptConfig {
            max_evaluations: 5000,
            ..OptConfig::default()
        };
        let r = alpso_minimize(&mut p, &cfg, 3).unwrap();
        assert!(r.feasible);
        assert!(r.best_objective <= 1e-4, "f = {}", r.best_objective);
        assert!(r.evaluations <= 5000);
    }

    #[test]
    fn evaluation_budget_is_a_hard_cap() {
        for max in [200u64, 500, 777] {
            let cfg = OptConfig {
                max_evaluations: max,
                stall_tolerance: 1e-15, // keep it from stopping early
                ..OptConfig::default()
            };
            let mut p = sphere_constrained();
            let r = alpso_minimize(&mut p, &cfg, 5).unwrap();
            assert!(r.evaluations <= max, "ALPSO used {} of {max}", r.evaluations);
            let mut p = sphere_constrained();
            let r = alhso_minimize(&mut p, &cfg, 5).unwrap();
            assert!(r.evaluations <= max, "ALHSO used {} of {max}", r.evaluations);
        }
    }

    #[test]
    fn deterministic_per_seed() {
        let mut p1 = sphere_constrained();
        let mut p2 = sphere_constrained();
        let r1 = alpso_minimize(&mut p1, &OptConfig::default(), 99).unwrap();
        let r2 = alpso_minimize(&mut p2, &OptConfig::default(), 99).unwrap();
        assert_eq!(r1, r2);
        let mut p3 = sphere_constrained();
        let mut p4 = sphere_constrained();
        let h1 = alhso_minimize(&mut p3, &OptConfig::default(), 99).unwrap();
        let h2 = alhso_minimize(&mut p4, &OptConfig::default(), 99).unwrap();
        assert_eq!(h1, h2);
    }

    #[test]
    fn monotone_best_history() {
        let mut p = sphere_constrained();
        let r = alpso_minimize(&mut p, &OptConfig::default(), 5).unwrap();
        let mut last = f64::INFINITY;
        for rec in &r.history {
            if !rec.best_objective.is_nan() {
                assert!(rec.best_objective <= last + 1e-12);
                last = rec.best_objective;
            }
        }
    }

    #[test]
    fn infeasible_problem_flagged() {
        // x >= 10 is impossible inside the box
        let mut p = OptimizationProblem::new("impossible", vec![(-1.0, 1.0)], 1, |x| {
            ProblemEval {
                objective: x[0],
                constraints: vec![10.0 - x[0]],
            }
        })
        .unwrap();
        let cfg = OptConfig {
            outer_iterations: 5,
            ..OptConfig::default()
        };
        let r = alpso_minimize(&mut p, &cfg, 1).unwrap();
        assert!(!r.feasible);
        assert!(!r.best.is_empty());
    }

    #[test]
    fn evaluation_counter_matches() {
        let mut p = sphere_constrained();
        let r = alpso_minimize(&mut p, &OptConfig::default(), 11).unwrap();
        assert_eq!(r.evaluations, p.evaluations());
        assert!(r.evaluations > 0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(8))]

            #[test]
            fn box_respected(seed in 0u64..500) {
                let mut visited: Vec<Vec<f64>> = Vec::new();
                {
                    let mut p = OptimizationProblem::new(
                        "record",
                        vec![(-1.0, 2.0), (0.5, 3.0)],
                        0,
                        |x| {
                            visited.push(x.to_vec());
                            ProblemEval { objective: x[0] + x[1], constraints: vec![] }
                        },
                    )
                    .unwrap();
                    let cfg = OptConfig { outer_iterations: 3, ..OptConfig::default() };
                    alpso_minimize(&mut p, &cfg, seed).unwrap();
                }
                for x in &visited {
                    prop_assert!((-1.0..=2.0).contains(&x[0]));
                    prop_assert!((0.5..=3.0).contains(&x[1]));
                }
            }
        }
    }
}
