//! Design-envelope construction: a schedule of constrained optimizations
//! tracing the attainable (nu, NCTE) region.

use alloc::format;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::cell::RefCell;
use core::ops::Range;

use crate::geometry::{Bounds, RveParams};
use crate::homog::{EvalConfig, Evaluator};
use crate::optim::OptConfig;
use crate::problems::{design_problem, ConstraintSpec, Objective, OptimizerKind};
use crate::Result;

/// One scheduled problem.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeProblem {
    pub label: String,
    pub objective: Objective,
    pub constraints: Vec<ConstraintSpec>,
}

/// Ordered schedule of envelope problems.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopeSchedule {
    pub problems: Vec<EnvelopeProblem>,
}

impl EnvelopeSchedule {
    /// Labels must be unique (they key the per-problem RNG seed).
    pub fn validate(&self) -> Result<()> {
        for (i, p) in self.problems.iter().enumerate() {
            if self.problems[..i].iter().any(|q| q.label == p.label) {
                return Err(crate::Error::InvalidConfig("duplicate schedule label"));
            }
        }
        Ok(())
    }

    /// Maximal runs of problems sharing objective and constraint kinds.
    /// Problems inside one chain are warm-started from their predecessor;
    /// distinct chains are independent.
    pub fn chains(&self) -> Vec<Range<usize>> {
        let key = |p: &EnvelopeProblem| {
            (
                p.objective,
                p.constraints.iter().map(|c| c.kind()).collect::<Vec<_>>(),
            )
        };
        let mut out = Vec::new();
        let mut start = 0;
        for i in 1..=self.problems.len() {
            if i == self.problems.len() || key(&self.problems[i]) != key(&self.problems[i - 1]) {
                out.push(start..i);
                start = i;
            }
        }
        out
    }
}

/// The default schedule: extreme points first, then the min-nu family
/// under decreasing NCTE floors, the unconstrained extremes, and the
/// min-NCTE family under rising Poisson's-ratio floors.
pub fn default_problem_schedule() -> EnvelopeSchedule {
    let mut problems = Vec::new();
    let mut push = |label: String, objective: Objective, constraints: Vec<ConstraintSpec>| {
        problems.push(EnvelopeProblem {
            label,
            objective,
            constraints,
        });
    };

    push(String::from("PR MAX"), Objective::MaxNu, vec![]);
    push(String::from("NCTE MAX"), Objective::MaxNcte, vec![]);
    for c in [0.25, 0.2, 0.1, -0.01, -0.025, -0.05, -0.1, -0.2] {
        push(
            format!("PR MIN (NCTE >= {c})"),
            Objective::MinNu,
            vec![ConstraintSpec::NcteAtLeast(c)],
        );
    }
    push(String::from("PR MIN"), Objective::MinNu, vec![]);
    for c in [-0.3, -0.4, -0.5, -0.6] {
        push(
            format!("PR MIN (NCTE >= {c})"),
            Objective::MinNu,
            vec![ConstraintSpec::NcteAtLeast(c)],
        );
    }
    push(String::from("NCTE MIN"), Objective::MinNcte, vec![]);
    for c in [-0.25, -0.2, -0.15, -0.1, -0.05] {
        push(
            format!("NCTE MIN (PR >= {c})"),
            Objective::MinNcte,
            vec![ConstraintSpec::NuAtLeast(c)],
        );
    }
    push(
        String::from("PR MAX (negative NCTE)"),
        Objective::MaxNu,
        vec![ConstraintSpec::NcteAtMost(0.0)],
    );

    EnvelopeSchedule { problems }
}

/// One row of the envelope dataset.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct EnvelopePoint {
    pub label: String,
    pub h1: f64,
    pub h2: f64,
    pub theta_deg: f64,
    pub t: f64,
    pub nu: f64,
    pub ncte: f64,
    pub evaluations: u64,
    pub feasible: bool,
    pub seed: u64,
}

impl EnvelopePoint {
    pub fn params(&self) -> RveParams {
        RveParams::new(self.h1, self.h2, self.theta_deg, self.t)
    }
}

/// Per-problem seed: FNV-1a over the master seed and the label, so the
/// sweep is reproducible and independent of execution order.
pub fn problem_seed(master: u64, label: &str) -> u64 {
    let mut h: u64 = 0xcbf29ce484222325;
    let mut mix = |b: u8| {
        h ^= b as u64;
        h = h.wrapping_mul(0x100000001b3);
    };
    for b in master.to_le_bytes() {
        mix(b);
    }
    for &b in label.as_bytes() {
        mix(b);
    }
    h
}

/// Solves one scheduled problem.
pub fn solve_envelope_problem(
    problem: &EnvelopeProblem,
    eval_cfg: &EvalConfig,
    opt_cfg: &OptConfig,
    bounds: &Bounds,
    master_seed: u64,
    hint: Option<RveParams>,
) -> Result<EnvelopePoint> {
    let seed = problem_seed(master_seed, &problem.label);
    let evaluator = RefCell::new(Evaluator::new(eval_cfg.clone()));
    let mut opt_problem = design_problem(
        &evaluator,
        &problem.label,
        problem.objective,
        problem.constraints.clone(),
        bounds,
    )?;
    if let Some(h) = hint {
        opt_problem.hints.push(h.as_array().to_vec());
    }
    let result = OptimizerKind::Alpso.minimize(&mut opt_problem, opt_cfg, seed)?;
    drop(opt_problem);

    let design = RveParams::from_array([
        result.best[0],
        result.best[1],
        result.best[2],
        result.best[3],
    ]);
    // self-consistency: store the direct re-evaluation of the design
    let (nu, ncte, feasible) = match evaluator.borrow_mut().evaluate(&design) {
        Ok(props) => (props.nu, props.ncte, result.feasible),
        Err(_) => (f64::NAN, f64::NAN, false),
    };
    Ok(EnvelopePoint {
        label: problem.label.clone(),
        h1: design.h1,
        h2: design.h2,
        theta_deg: design.theta,
        t: design.t,
        nu,
        ncte,
        evaluations: result.evaluations,
        feasible,
        seed: master_seed,
    })
}

/// Runs the whole schedule in order. With `warm_start`, each problem
/// seeds part of its initial swarm from the previous problem's best
/// design when both belong to the same chain.
pub fn build_envelope(
    schedule: &EnvelopeSchedule,
    eval_cfg: &EvalConfig,
    opt_cfg: &OptConfig,
    bounds: &Bounds,
    master_seed: u64,
    warm_start: bool,
) -> Result<Vec<EnvelopePoint>> {
    schedule.validate()?;
    let mut points = Vec::with_capacity(schedule.problems.len());
    for chain in schedule.chains() {
        let mut prev: Option<RveParams> = None;
        for i in chain {
            let hint = if warm_start { prev } else { None };
            let point = solve_envelope_problem(
                &schedule.problems[i],
                eval_cfg,
                opt_cfg,
                bounds,
                master_seed,
                hint,
            )?;
            if point.feasible {
                prev = Some(point.params());
            }
            points.push((i, point));
        }
    }
    points.sort_by_key(|(i, _)| *i);
    Ok(points.into_iter().map(|(_, p)| p).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_schedule_shape() {
        let s = default_problem_schedule();
        // one problem per row of the reference envelope dataset
        assert_eq!(s.problems.len(), 22);
        assert_eq!(s.problems[0].label, "PR MAX");
        assert_eq!(
            s.problems.last().unwrap().label,
            "PR MAX (negative NCTE)"
        );
        s.validate().unwrap();
    }

    #[test]
    fn min_nu_family_thresholds_strictly_decrease() {
        let s = default_problem_schedule();
        let thresholds: Vec<f64> = s
            .problems
            .iter()
            .filter(|p| p.objective == Objective::MinNu && !p.constraints.is_empty())
            .map(|p| p.constraints[0].threshold())
            .collect();
        assert!(thresholds.windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn chains_partition_schedule() {
        let s = default_problem_schedule();
        let chains = s.chains();
        let total: usize = chains.iter().map(|c| c.len()).sum();
        assert_eq!(total, s.problems.len());
        // PR MIN splits the NCTE-floor family into two chains
        assert!(chains.len() >= 6);
        for w in chains.windows(2) {
            assert_eq!(w[0].end, w[1].start);
        }
    }

    #[test]
    fn empty_schedule_gives_empty_list() {
        let s = EnvelopeSchedule { problems: vec![] };
        let pts = build_envelope(
            &s,
            &EvalConfig::default(),
            &OptConfig::default(),
            &Bounds::default(),
            1,
            true,
        )
        .unwrap();
        assert!(pts.is_empty());
    }

    #[test]
    fn problem_seed_is_stable_and_label_sensitive() {
        let a = problem_seed(7, "PR MAX");
        assert_eq!(a, problem_seed(7, "PR MAX"));
        assert_ne!(a, problem_seed(7, "PR MIN"));
        assert_ne!(a, problem_seed(8, "PR MAX"));
    }

    #[test]
    fn duplicate_labels_rejected() {
        let p = EnvelopeProblem {
            label: String::from("dup"),
            objective: Objective::MinNu,
            constraints: vec![],
        };
        let s = EnvelopeSchedule {
            problems: vec![p.clone(), p],
        };
        assert!(s.validate().is_err());
    }
}
