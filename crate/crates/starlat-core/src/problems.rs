//! Glue between the homogenization pipeline and the optimizers: named
//! objectives and constraints over (nu, NCTE), and the optimizer
//! comparison experiment.

use alloc::rc::Rc;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::{Cell, RefCell};
use core::fmt;

use crate::geometry::{Bounds, RveParams};
use crate::homog::{EvalConfig, Evaluator, HomogenizedProps};
use crate::optim::{
    alhso_minimize, alpso_minimize, OptConfig, OptimizationProblem, ProblemEval,
};
use crate::Result;

/// Named scalar objectives over the homogenized properties (minimized;
/// maximization negates).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum Objective {
    MinNu,
    MaxNu,
    MinNcte,
    MaxNcte,
    /// Minimizes `NCTE^2`.
    NearZeroNcte,
}

impl Objective {
    pub fn value(&self, props: &HomogenizedProps) -> f64 {
        match self {
            Objective::MinNu => props.nu,
            Objective::MaxNu => -props.nu,
            Objective::MinNcte => props.ncte,
            Objective::MaxNcte => -props.ncte,
            Objective::NearZeroNcte => props.ncte * props.ncte,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Objective::MinNu => "min-pr",
            Objective::MaxNu => "max-pr",
            Objective::MinNcte => "min-ncte",
            Objective::MaxNcte => "max-ncte",
            Objective::NearZeroNcte => "near-zero-ncte",
        }
    }
}

/// Inequality constraints on the homogenized properties (`g <= 0` feasible).
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum ConstraintSpec {
    NcteAtLeast(f64),
    NcteAtMost(f64),
    NuAtLeast(f64),
    NuAtMost(f64),
}

impl ConstraintSpec {
    pub fn value(&self, props: &HomogenizedProps) -> f64 {
        match *self {
            ConstraintSpec::NcteAtLeast(c) => c - props.ncte,
            ConstraintSpec::NcteAtMost(c) => props.ncte - c,
            ConstraintSpec::NuAtLeast(c) => c - props.nu,
            ConstraintSpec::NuAtMost(c) => props.nu - c,
        }
    }

    /// Discriminant used to group envelope problems into families.
    pub fn kind(&self) -> u8 {
        match self {
            ConstraintSpec::NcteAtLeast(_) => 0,
            ConstraintSpec::NcteAtMost(_) => 1,
            ConstraintSpec::NuAtLeast(_) => 2,
            ConstraintSpec::NuAtMost(_) => 3,
        }
    }

    pub fn threshold(&self) -> f64 {
        match *self {
            ConstraintSpec::NcteAtLeast(c)
            | ConstraintSpec::NcteAtMost(c)
            | ConstraintSpec::NuAtLeast(c)
            | ConstraintSpec::NuAtMost(c) => c,
        }
    }
}

impl fmt::Display for ConstraintSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            ConstraintSpec::NcteAtLeast(c) => write!(f, "ncte>={c}"),
            ConstraintSpec::NcteAtMost(c) => write!(f, "ncte<={c}"),
            ConstraintSpec::NuAtLeast(c) => write!(f, "pr>={c}"),
            ConstraintSpec::NuAtMost(c) => write!(f, "pr<={c}"),
        }
    }
}

/// Wraps the memoizing evaluator as an optimization problem over the
/// design box. Errored (degenerate) designs are mapped to a smoothly bad
/// objective with violated constraints instead of aborting the run, and
/// the problem's evaluation counter mirrors the memo layer, counting only
/// designs that needed a finite element solve.
pub fn design_problem<'a>(
    evaluator: &'a RefCell<Evaluator>,
    label: &str,
    objective: Objective,
    constraints: Vec<ConstraintSpec>,
    bounds: &Bounds,
) -> Result<OptimizationProblem<'a>> {
    let n_constraints = constraints.len();
    let counter = Rc::new(Cell::new(evaluator.borrow().evaluations()));
    let c = counter.clone();
    let base = evaluator.borrow().evaluations();
    let best_seen = Cell::new(f64::INFINITY);
    let worst_seen = Cell::new(f64::NEG_INFINITY);
    let eval = move |x: &[f64]| -> ProblemEval {
        let params = RveParams::from_array([x[0], x[1], x[2], x[3]]);
        let mut ev = evaluator.borrow_mut();
        let res = ev.evaluate(&params);
        c.set(ev.evaluations() - base);
        match res {
            Ok(props) => {
                let f = objective.value(&props);
                best_seen.set(best_seen.get().min(f));
                worst_seen.set(worst_seen.get().max(f));
                ProblemEval {
                    objective: f,
                    constraints: constraints.iter().map(|g| g.value(&props)).collect(),
                }
            }
            Err(_) => {
                // infeasible placeholder: worst objective seen plus ten
                // times the observed range, every constraint violated
                let (b, w) = (best_seen.get(), worst_seen.get());
                let f = if w.is_finite() {
                    w + 10.0 * (w - b).max(1.0)
                } else {
                    1e9
                };
                ProblemEval {
                    objective: f,
                    constraints: vec![1.0; n_constraints],
                }
            }
        }
    };
    OptimizationProblem::with_counter(
        label,
        bounds.as_array().to_vec(),
        n_constraints,
        counter,
        eval,
    )
}

/// Which optimizer to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum OptimizerKind {
    Alpso,
    Alhso,
}

impl OptimizerKind {
    pub fn name(&self) -> &'static str {
        match self {
            OptimizerKind::Alpso => "ALPSO",
            OptimizerKind::Alhso => "ALHSO",
        }
    }

    pub fn minimize(
        &self,
        problem: &mut OptimizationProblem<'_>,
        config: &OptConfig,
        seed: u64,
    ) -> Result<crate::optim::OptResult> {
        match self {
            OptimizerKind::Alpso => alpso_minimize(problem, config, seed),
            OptimizerKind::Alhso => alhso_minimize(problem, config, seed),
        }
    }
}

/// One row of the optimizer comparison report.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct ComparisonRow {
    pub objective: String,
    pub optimizer: String,
    pub design: RveParams,
    pub evaluations: u64,
    pub nu: f64,
    pub ncte: f64,
    pub cte: f64,
    pub feasible: bool,
}

/// Runs the three reference objectives (min nu, min NCTE, near-zero NCTE)
/// with both optimizers and reports one row per (objective, optimizer).
pub fn compare_optimizers(
    eval_cfg: &EvalConfig,
    opt_cfg: &OptConfig,
    bounds: &Bounds,
    seed: u64,
) -> Result<Vec<ComparisonRow>> {
    let objectives = [Objective::MinNu, Objective::MinNcte, Objective::NearZeroNcte];
    let optimizers = [OptimizerKind::Alhso, OptimizerKind::Alpso];
    let mut rows = Vec::new();
    for objective in objectives {
        for optimizer in optimizers {
            let evaluator = RefCell::new(Evaluator::new(eval_cfg.clone()));
            let mut problem =
                design_problem(&evaluator, objective.name(), objective, vec![], bounds)?;
            let result = optimizer.minimize(&mut problem, opt_cfg, seed)?;
            drop(problem);
            let design = RveParams::from_array([
                result.best[0],
                result.best[1],
                result.best[2],
                result.best[3],
            ]);
            let props = evaluator.borrow_mut().evaluate(&design)?;
            rows.push(ComparisonRow {
                objective: String::from(objective.name()),
                optimizer: String::from(optimizer.name()),
                design,
                evaluations: result.evaluations,
                nu: props.nu,
                ncte: props.ncte,
                cte: props.alpha,
                feasible: result.feasible,
            });
        }
    }
    Ok(rows)
}
