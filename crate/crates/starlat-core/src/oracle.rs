//! Analytic validation oracles.
//!
//! Small problems with closed-form answers that exercise the element
//! formulation, the thermal load path, the homogenization pipeline and
//! the optimizers end to end. The `validate` battery bundles them with
//! pass/fail verdicts; the checks are deliberately cheap so a fresh
//! build can be smoke-tested in seconds.

use alloc::vec;
use alloc::vec::Vec;

use crate::fem::{element_stiffness, element_thermal_load, ElementState};
use crate::geometry::RveParams;
use crate::homog::{evaluate_design, EvalConfig};
use crate::linalg::{lu_solve, Mat};
use crate::material::{aluminium, invar, MaterialSet};
use crate::mesh::SHEAR_CORRECTION;
use crate::optim::{alhso_minimize, alpso_minimize, OptConfig, OptimizationProblem, ProblemEval};
use crate::Result;

/// One oracle verdict. `deviation` is relative where the reference is
/// nonzero and absolute otherwise, and is what `tolerance` bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct OracleOutcome {
    pub name: &'static str,
    pub computed: f64,
    pub reference: f64,
    pub deviation: f64,
    pub tolerance: f64,
    pub pass: bool,
}

impl OracleOutcome {
    fn judge(name: &'static str, computed: f64, reference: f64, tolerance: f64) -> Self {
        let scale = libm::fabs(reference);
        let deviation = if scale > 0.0 {
            libm::fabs(computed - reference) / scale
        } else {
            libm::fabs(computed)
        };
        OracleOutcome {
            name,
            computed,
            reference,
            deviation,
            tolerance,
            pass: deviation.is_finite() && deviation <= tolerance,
        }
    }

    /// A check that could not even be evaluated (e.g. an invalid section).
    fn broken(name: &'static str, tolerance: f64) -> Self {
        OracleOutcome {
            name,
            computed: f64::NAN,
            reference: f64::NAN,
            deviation: f64::NAN,
            tolerance,
            pass: false,
        }
    }
}

/// Cantilever geometry of the tip-deflection oracle. Stocky on purpose:
/// shear carries a few percent of the deflection, so a wrong shear
/// correction is visible above the tolerance.
const CANTILEVER_LENGTH: f64 = 10.0;
const CANTILEVER_THICKNESS: f64 = 2.0;
const CANTILEVER_YOUNGS: f64 = 70e9;
const CANTILEVER_POISSON: f64 = 0.3;
const CANTILEVER_LOAD: f64 = 1e3;

/// Tip deflection of an end-loaded cantilever, `(finite element,
/// analytic)`. The analytic value always uses the standard rectangular
/// shear correction; passing a different `shear_correction` to the
/// element is how a deliberately broken configuration is detected.
pub fn cantilever_tip_deflection(elements: usize, shear_correction: f64) -> Result<(f64, f64)> {
    let (l, t, e_mod, p) = (
        CANTILEVER_LENGTH,
        CANTILEVER_THICKNESS,
        CANTILEVER_YOUNGS,
        CANTILEVER_LOAD,
    );
    let g = e_mod / (2.0 * (1.0 + CANTILEVER_POISSON));
    let (area, inertia) = (t, t * t * t / 12.0);
    let analytic = p * l * l * l / (3.0 * e_mod * inertia) + p * l / (SHEAR_CORRECTION * g * area);

    let state = ElementState {
        length: l / elements as f64,
        cos: 1.0,
        sin: 0.0,
        youngs: e_mod,
        shear: g,
        cte: 1e-9, // unused by the mechanical case
        area,
        inertia,
        shear_correction,
    };
    state.validate()?;
    let ke = element_stiffness(&state)?;

    // clamp node 0: reduced system over nodes 1..=elements
    let n_free = 3 * elements;
    let mut k = Mat::zeros(n_free, n_free);
    let mut f = vec![0.0; n_free];
    for el in 0..elements {
        // global DOF -> reduced index (node 0 eliminated)
        let dofs: Vec<Option<usize>> = (0..6)
            .map(|i| {
                let gd = 3 * el + i;
                gd.checked_sub(3)
            })
            .collect();
        for (r, dr) in dofs.iter().enumerate() {
            let Some(rr) = dr else { continue };
            for (c, dc) in dofs.iter().enumerate() {
                if let Some(cc) = dc {
                    k.add(*rr, *cc, ke[r][c]);
                }
            }
        }
    }
    f[n_free - 2] = -p; // transverse load at the tip
    let u = lu_solve(k, &f)?;
    Ok((-u[n_free - 2], analytic))
}

/// Free thermal expansion of a single bar, `(finite element, analytic)`.
/// Aluminium heated by 180 K; the analytic elongation is
/// `alpha dT L` with the secant CTE at the final temperature.
pub fn thermal_bar_elongation(elements: usize) -> Result<(f64, f64)> {
    let (l, t, delta_t) = (100.0, 1.0, 180.0);
    let mat = aluminium();
    let temperature = crate::material::REFERENCE_TEMPERATURE + delta_t;
    let analytic = mat.secant_cte(temperature) * delta_t * l;

    let state = ElementState {
        length: l / elements as f64,
        cos: 1.0,
        sin: 0.0,
        youngs: mat.youngs_modulus(temperature),
        shear: mat.shear_modulus(temperature),
        cte: mat.secant_cte(temperature),
        area: t,
        inertia: t * t * t / 12.0,
        shear_correction: SHEAR_CORRECTION,
    };
    state.validate()?;
    let ke = element_stiffness(&state)?;
    let fe = element_thermal_load(&state, delta_t);

    // only the axial DOFs of nodes 1..=elements are free: node 0 is
    // clamped and the transverse/rotation DOFs carry no thermal load
    let mut k = Mat::zeros(elements, elements);
    let mut f = vec![0.0; elements];
    for el in 0..elements {
        let (a, b) = (el.checked_sub(1), Some(el));
        for (r, dr) in [(0usize, a), (3, b)] {
            let Some(rr) = dr else { continue };
            f[rr] += fe[r];
            for (c, dc) in [(0usize, a), (3, b)] {
                if let Some(cc) = dc {
                    k.add(rr, cc, ke[r][c]);
                }
            }
        }
    }
    let u = lu_solve(k, &f)?;
    Ok((u[elements - 1], analytic))
}

/// Constrained sphere benchmark: minimize `x1^2 + x2^2` subject to
/// `x1 + x2 >= 1` on `[-5, 5]^2`; optimum `f = 0.5` at `(0.5, 0.5)`.
pub fn constrained_sphere<'a>() -> OptimizationProblem<'a> {
    OptimizationProblem::new(
        "constrained sphere",
        vec![(-5.0, 5.0), (-5.0, 5.0)],
        1,
        |x| ProblemEval {
            objective: x[0] * x[0] + x[1] * x[1],
            constraints: vec![1.0 - x[0] - x[1]],
        },
    )
    .expect("static bounds")
}

/// Unconstrained 2D Rosenbrock on `[-2, 2]^2`; optimum `f = 0` at `(1, 1)`.
pub fn rosenbrock<'a>() -> OptimizationProblem<'a> {
    OptimizationProblem::new("rosenbrock", vec![(-2.0, 2.0), (-2.0, 2.0)], 0, |x| {
        let a = 1.0 - x[0];
        let b = x[1] - x[0] * x[0];
        ProblemEval {
            objective: a * a + 100.0 * b * b,
            constraints: vec![],
        }
    })
    .expect("static bounds")
}

fn benchmark_config() -> OptConfig {
    OptConfig {
        max_evaluations: 5000,
        ..OptConfig::default()
    }
}

/// Runs the full oracle battery. `shear_correction` feeds the cantilever
/// check (pass the default to validate a stock build, something else to
/// prove the check notices); `weak_factor` scales the weak material's
/// stiffness in the drift check.
pub fn standard_battery(shear_correction: f64, weak_factor: f64) -> Vec<OracleOutcome> {
    let mut out = Vec::new();

    out.push(match cantilever_tip_deflection(16, shear_correction) {
        Ok((fem, exact)) => {
            OracleOutcome::judge("cantilever tip deflection", fem, exact, 5e-3)
        }
        Err(_) => OracleOutcome::broken("cantilever tip deflection", 5e-3),
    });

    out.push(match thermal_bar_elongation(4) {
        Ok((fem, exact)) => OracleOutcome::judge("free thermal bar", fem, exact, 1e-10),
        Err(_) => OracleOutcome::broken("free thermal bar", 1e-10),
    });

    // single-material cell: effective CTE must equal the constituent's
    let uniform_cfg = EvalConfig {
        materials: MaterialSet::uniform(invar()),
        ..EvalConfig::default()
    };
    let p = RveParams::new(50.0, 30.0, 25.0, 1.0);
    out.push(match evaluate_design(&p, &uniform_cfg) {
        Ok(props) => OracleOutcome::judge(
            "single-material cell CTE",
            props.alpha,
            invar().secant_cte(uniform_cfg.thermal_temperature()),
            1e-6,
        ),
        Err(_) => OracleOutcome::broken("single-material cell CTE", 1e-6),
    });

    // geometric scale invariance of the dimensionless properties
    let cfg = EvalConfig::default();
    let base = RveParams::new(60.0, 20.0, 30.0, 2.0);
    let scaled = RveParams::new(60.0 * 3.5, 20.0 * 3.5, 30.0, 2.0 * 3.5);
    out.push(
        match (evaluate_design(&base, &cfg), evaluate_design(&scaled, &cfg)) {
            (Ok(a), Ok(b)) => {
                let drift = libm::fabs(a.nu - b.nu) / libm::fabs(a.nu)
                    + libm::fabs(a.alpha - b.alpha) / libm::fabs(a.alpha);
                OracleOutcome::judge("geometric scale invariance", drift, 0.0, 1e-9)
            }
            _ => OracleOutcome::broken("geometric scale invariance", 1e-9),
        },
    );

    // weak-material drift: scaling the fictitious stiffness must not move
    // the effective properties
    let reference_design = RveParams::new(100.0, 13.34, 23.85, 0.5);
    let mut perturbed = MaterialSet::aluminium_invar();
    for e in perturbed.weak.e_points.iter_mut() {
        e.1 *= weak_factor;
    }
    let perturbed_cfg = EvalConfig {
        materials: perturbed,
        ..EvalConfig::default()
    };
    out.push(
        match (
            evaluate_design(&reference_design, &cfg),
            evaluate_design(&reference_design, &perturbed_cfg),
        ) {
            (Ok(a), Ok(b)) => {
                let drift = libm::fabs(a.nu - b.nu) / libm::fabs(a.nu)
                    + libm::fabs(a.alpha - b.alpha) / libm::fabs(a.alpha);
                OracleOutcome::judge("weak-material drift", drift, 0.0, 1e-3)
            }
            _ => OracleOutcome::broken("weak-material drift", 1e-3),
        },
    );

    // optimizer benchmarks
    let cfg = benchmark_config();
    out.push(match alpso_minimize(&mut constrained_sphere(), &cfg, 42) {
        Ok(r) if r.feasible => {
            OracleOutcome::judge("ALPSO constrained sphere", r.best_objective, 0.5, 1e-3 / 0.5)
        }
        _ => OracleOutcome::broken("ALPSO constrained sphere", 1e-3 / 0.5),
    });
    out.push(match alhso_minimize(&mut constrained_sphere(), &cfg, 7) {
        Ok(r) if r.feasible => {
            OracleOutcome::judge("ALHSO constrained sphere", r.best_objective, 0.5, 1e-3 / 0.5)
        }
        _ => OracleOutcome::broken("ALHSO constrained sphere", 1e-3 / 0.5),
    });
    out.push(match alpso_minimize(&mut rosenbrock(), &cfg, 3) {
        Ok(r) => OracleOutcome::judge("ALPSO Rosenbrock", r.best_objective, 0.0, 1e-4),
        Err(_) => OracleOutcome::broken("ALPSO Rosenbrock", 1e-4),
    });

    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cantilever_matches_closed_form() {
        let (fem, exact) = cantilever_tip_deflection(16, SHEAR_CORRECTION).unwrap();
        // the element stiffness is the exact Timoshenko solution, so the
        // nodal tip deflection agrees to roundoff, far inside 0.5%
        assert!(
            (fem - exact).abs() <= 5e-3 * exact,
            "fem {fem} vs analytic {exact}"
        );
        assert!((fem - exact).abs() <= 1e-10 * exact);
    }

    #[test]
    fn cantilever_shear_share_is_resolvable() {
        // the stocky proportions put a few percent of the deflection into
        // shear; that is what makes the negative control below meaningful
        let (_, exact) = cantilever_tip_deflection(16, SHEAR_CORRECTION).unwrap();
        let bending = CANTILEVER_LOAD * CANTILEVER_LENGTH.powi(3)
            / (3.0 * CANTILEVER_YOUNGS * CANTILEVER_THICKNESS.powi(3) / 12.0);
        assert!((exact - bending) / exact > 0.01);
    }

    #[test]
    fn broken_shear_correction_is_detected() {
        // kappa = 0 cannot form a valid element
        assert!(cantilever_tip_deflection(16, 0.0).is_err());
        // a wrong but positive kappa misses the analytic value
        let (fem, exact) = cantilever_tip_deflection(16, 0.05).unwrap();
        assert!((fem - exact).abs() > 5e-3 * exact);
    }

    #[test]
    fn thermal_bar_matches_closed_form() {
        let (fem, exact) = thermal_bar_elongation(4).unwrap();
        assert!(
            (fem - exact).abs() <= 1e-10 * exact,
            "fem {fem} vs analytic {exact}"
        );
    }

    #[test]
    fn battery_passes_on_stock_configuration() {
        for check in standard_battery(SHEAR_CORRECTION, 10.0) {
            assert!(
                check.pass,
                "{}: {} vs {} (deviation {})",
                check.name, check.computed, check.reference, check.deviation
            );
        }
    }

    #[test]
    fn battery_flags_broken_shear_correction() {
        let outcomes = standard_battery(0.0, 10.0);
        let cant = outcomes
            .iter()
            .find(|o| o.name == "cantilever tip deflection")
            .unwrap();
        assert!(!cant.pass);
        assert!(outcomes.iter().any(|o| o.pass)); // others unaffected
    }
}
