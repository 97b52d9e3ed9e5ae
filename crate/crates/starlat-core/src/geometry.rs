//! Parametric bi-material star-shaped RVE.
//!
//! The unit cell is a 4-pointed re-entrant star whose tips point towards
//! the cell corners. The eight star legs are the high-CTE constituent; a
//! low-CTE square frame connects the four tips, low-CTE axial rods run
//! from the star's concave inner vertices (on the x/y axes) out to the
//! cell mid-edge nodes, and four weak beams extend from the frame tips to
//! the cell corners. Four design variables control it:
//!
//! * `h1` — rod length budget (the rods span `L/2` minus the inner-vertex
//!   offset, which reduces to `h1` as `theta` grows small),
//! * `h2` — length of the star legs,
//! * `theta` — inclination (degrees) of a star leg to the cell diagonal
//!   through its tip (half the tip opening angle),
//! * `t`  — in-plane member thickness.
//!
//! The cell is centred at the origin with edge length
//! `L = 2 (h1 + h2 (sin theta + cos theta))`. The tips sit at
//! `(+-g, +-g)` with `g = h2 (sin theta + cos theta) / sqrt(2)` and the
//! inner vertices at distance `f = sqrt(2) h2 sin theta` from the centre
//! on the axes. Lengths are relative units: homogenized properties are
//! scale invariant.
//!
//! The mechanisms mirror the lattice this reconstructs: stretching in x
//! drags the inner vertices outwards and the legs rotate towards the
//! diagonals (`theta` decreases), folding the star open so the cell also
//! widens in y (negative Poisson's ratio). Heating expands the high-CTE
//! legs against the stiff low-CTE frame, which pins the tips, so the legs
//! rotate away from the diagonals (`theta` increases) and push the inner
//! vertices — and the rods attached to them — in towards the central
//! void, contracting the cell.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::material::MaterialId;
use crate::Result;

/// Relative threshold below which a member counts as degenerate.
pub const DEGENERATE_LENGTH_FACTOR: f64 = 1e-9;

/// The four design variables of one lattice design.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RveParams {
    /// Axial rod length (relative units).
    pub h1: f64,
    /// Star leg length (relative units).
    pub h2: f64,
    /// Star leg inclination in degrees.
    pub theta: f64,
    /// In-plane member thickness (relative units).
    pub t: f64,
}

impl RveParams {
    pub fn new(h1: f64, h2: f64, theta: f64, t: f64) -> Self {
        RveParams { h1, h2, theta, t }
    }

    pub fn as_array(&self) -> [f64; 4] {
        [self.h1, self.h2, self.theta, self.t]
    }

    pub fn from_array(x: [f64; 4]) -> Self {
        RveParams::new(x[0], x[1], x[2], x[3])
    }

    /// Bit-exact memoization key.
    pub fn key(&self) -> [u64; 4] {
        [
            self.h1.to_bits(),
            self.h2.to_bits(),
            self.theta.to_bits(),
            self.t.to_bits(),
        ]
    }

    fn check_finite_positive(&self) -> Result<()> {
        for (name, v) in [
            ("h1", self.h1),
            ("h2", self.h2),
            ("theta", self.theta),
            ("t", self.t),
        ] {
            if !v.is_finite() {
                return Err(Error::NonFinite(name));
            }
            if v <= 0.0 {
                return Err(Error::NonPositive(name, v));
            }
        }
        Ok(())
    }
}

/// Per-variable inclusive box bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Bounds {
    pub h1: (f64, f64),
    pub h2: (f64, f64),
    pub theta: (f64, f64),
    pub t: (f64, f64),
}

impl Default for Bounds {
    /// The design box used throughout: h1, h2 in [5, 100], theta in [5, 40]
    /// degrees, t in [0.5, 5].
    fn default() -> Self {
        Bounds {
            h1: (5.0, 100.0),
            h2: (5.0, 100.0),
            theta: (5.0, 40.0),
            t: (0.5, 5.0),
        }
    }
}

impl Bounds {
    pub fn as_array(&self) -> [(f64, f64); 4] {
        [self.h1, self.h2, self.theta, self.t]
    }
}

/// One out-of-range design variable.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Violation {
    pub variable: &'static str,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
}

/// Checks `params` against inclusive bounds; empty result means ok.
pub fn validate_params(params: &RveParams, bounds: &Bounds) -> Vec<Violation> {
    let names = ["h1", "h2", "theta", "t"];
    let values = params.as_array();
    let boxes = bounds.as_array();
    let mut out = Vec::new();
    for i in 0..4 {
        let (lo, hi) = boxes[i];
        if !(values[i] >= lo && values[i] <= hi) {
            out.push(Violation {
                variable: names[i],
                value: values[i],
                lo,
                hi,
            });
        }
    }
    out
}

/// RVE edge length `L = 2 (h1 + h2 (sin theta + cos theta))`.
pub fn rve_edge_length(params: &RveParams) -> Result<f64> {
    for (name, v) in [("h1", params.h1), ("h2", params.h2), ("theta", params.theta)] {
        if !v.is_finite() {
            return Err(Error::NonFinite(name));
        }
    }
    let th = params.theta.to_radians();
    Ok(2.0 * (params.h1 + params.h2 * (libm::sin(th) + libm::cos(th))))
}

/// One straight lattice member before meshing.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Member {
    pub node_a: usize,
    pub node_b: usize,
    pub material: MaterialId,
    pub thickness: f64,
}

/// Node ids of the cell boundary, grouped by side.
///
/// `left`/`right`/`top`/`bottom` hold the non-corner boundary nodes of each
/// side; `corners` is ordered (bottom-left, bottom-right, top-left,
/// top-right).
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct BoundarySets {
    pub left: Vec<usize>,
    pub right: Vec<usize>,
    pub top: Vec<usize>,
    pub bottom: Vec<usize>,
    pub corners: [usize; 4],
}

/// The unmeshed lattice model.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct RveModel {
    pub nodes: Vec<(f64, f64)>,
    pub members: Vec<Member>,
    pub edge_length: f64,
    pub boundary_sets: BoundarySets,
    /// Origin of the 4-fold symmetry.
    pub center: (f64, f64),
    pub params: RveParams,
}

impl RveModel {
    pub fn member_length(&self, m: &Member) -> f64 {
        let (xa, ya) = self.nodes[m.node_a];
        let (xb, yb) = self.nodes[m.node_b];
        libm::hypot(xb - xa, yb - ya)
    }
}

// Fixed node layout of the star template.
const INNER_PX: usize = 0; // (+f, 0)
const INNER_MX: usize = 1; // (-f, 0)
const INNER_PY: usize = 2; // (0, +f)
const INNER_MY: usize = 3; // (0, -f)
const TIP_PP: usize = 4; // (+g, +g)
const TIP_MP: usize = 5; // (-g, +g)
const TIP_MM: usize = 6; // (-g, -g)
const TIP_PM: usize = 7; // (+g, -g)
const MID_PX: usize = 8; // (+L/2, 0)
const MID_MX: usize = 9; // (-L/2, 0)
const MID_PY: usize = 10; // (0, +L/2)
const MID_MY: usize = 11; // (0, -L/2)
const CORNER_MM: usize = 12; // (-L/2, -L/2)
const CORNER_PM: usize = 13; // (+L/2, -L/2)
const CORNER_MP: usize = 14; // (-L/2, +L/2)
const CORNER_PP: usize = 15; // (+L/2, +L/2)

/// Builds the star template for `params`.
///
/// 16 nodes and 20 members: 8 high-CTE star legs, 4 low-CTE frame sides
/// between the tips, 4 low-CTE axial rods, 4 weak corner beams. Errors on
/// non-finite or non-positive inputs and on any member shorter than
/// `1e-9 L` (e.g. the `h2 -> 0` limit collapses the legs).
pub fn build_rve(params: &RveParams) -> Result<RveModel> {
    params.check_finite_positive()?;
    let th = params.theta.to_radians();
    let (s, c) = (libm::sin(th), libm::cos(th));
    let edge = 2.0 * (params.h1 + params.h2 * (s + c));
    let half = edge / 2.0;
    let g = params.h2 * (s + c) / core::f64::consts::SQRT_2; // tip coordinate
    let f = core::f64::consts::SQRT_2 * params.h2 * s; // inner vertex offset

    let nodes = vec![
        (f, 0.0),
        (-f, 0.0),
        (0.0, f),
        (0.0, -f),
        (g, g),
        (-g, g),
        (-g, -g),
        (g, -g),
        (half, 0.0),
        (-half, 0.0),
        (0.0, half),
        (0.0, -half),
        (-half, -half),
        (half, -half),
        (-half, half),
        (half, half),
    ];

    let t = params.t;
    let leg = |a, b| Member {
        node_a: a,
        node_b: b,
        material: MaterialId::Aluminium,
        thickness: t,
    };
    let frame = |a, b| Member {
        node_a: a,
        node_b: b,
        material: MaterialId::Invar,
        thickness: t,
    };
    let weak = |a, b| Member {
        node_a: a,
        node_b: b,
        material: MaterialId::Weak,
        thickness: t,
    };

    let members = vec![
        // star legs, inner vertices to the two adjacent tips
        leg(INNER_PX, TIP_PP),
        leg(INNER_PX, TIP_PM),
        leg(INNER_MX, TIP_MP),
        leg(INNER_MX, TIP_MM),
        leg(INNER_PY, TIP_PP),
        leg(INNER_PY, TIP_MP),
        leg(INNER_MY, TIP_MM),
        leg(INNER_MY, TIP_PM),
        // axial rods, inner vertices to mid-edge boundary nodes
        frame(INNER_PX, MID_PX),
        frame(INNER_MX, MID_MX),
        frame(INNER_PY, MID_PY),
        frame(INNER_MY, MID_MY),
        // square frame between adjacent tips
        frame(TIP_PP, TIP_MP),
        frame(TIP_MP, TIP_MM),
        frame(TIP_MM, TIP_PM),
        frame(TIP_PM, TIP_PP),
        // weak corner beams, tips to the nearest corner
        weak(TIP_PP, CORNER_PP),
        weak(TIP_MP, CORNER_MP),
        weak(TIP_MM, CORNER_MM),
        weak(TIP_PM, CORNER_PM),
    ];

    let model = RveModel {
        nodes,
        members,
        edge_length: edge,
        boundary_sets: BoundarySets {
            left: vec![MID_MX],
            right: vec![MID_PX],
            top: vec![MID_PY],
            bottom: vec![MID_MY],
            corners: [CORNER_MM, CORNER_PM, CORNER_MP, CORNER_PP],
        },
        center: (0.0, 0.0),
        params: *params,
    };

    let threshold = DEGENERATE_LENGTH_FACTOR * edge;
    for (i, m) in model.members.iter().enumerate() {
        let len = model.member_length(m);
        if !(len >= threshold) {
            return Err(Error::DegenerateMember {
                member: i,
                length: len,
            });
        }
    }
    Ok(model)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn edge_length_examples() {
        // hand evaluations of L = 2 (h1 + h2 (sin + cos))
        let l = rve_edge_length(&RveParams::new(100.0, 13.34, 23.85, 0.5)).unwrap();
        assert_relative_eq!(l, 235.19, epsilon = 0.01);
        let l = rve_edge_length(&RveParams::new(5.0, 100.0, 40.0, 5.0)).unwrap();
        assert_relative_eq!(l, 291.77, epsilon = 0.01);
        let l = rve_edge_length(&RveParams::new(10.0, 10.0, 45.0, 1.0)).unwrap();
        assert_relative_eq!(l, 48.284, epsilon = 1e-3);
        // h2 = 0 limit: L -> 2 h1
        let l = rve_edge_length(&RveParams::new(7.0, 0.0, 17.0, 1.0)).unwrap();
        assert_relative_eq!(l, 14.0);
    }

    #[test]
    fn edge_length_rejects_non_finite() {
        assert!(rve_edge_length(&RveParams::new(f64::NAN, 1.0, 1.0, 1.0)).is_err());
        assert!(rve_edge_length(&RveParams::new(1.0, f64::INFINITY, 1.0, 1.0)).is_err());
    }

    #[test]
    fn build_rve_reference_design() {
        let model = build_rve(&RveParams::new(100.0, 13.34, 23.85, 0.5)).unwrap();
        assert_relative_eq!(model.edge_length, 235.19, epsilon = 0.01);
        assert_eq!(model.members.len(), 20);
        let legs = model
            .members
            .iter()
            .filter(|m| m.material == MaterialId::Aluminium)
            .count();
        let low_cte = model
            .members
            .iter()
            .filter(|m| m.material == MaterialId::Invar)
            .count();
        let weaks = model
            .members
            .iter()
            .filter(|m| m.material == MaterialId::Weak)
            .count();
        // 8 legs, 4 rods + 4 frame sides, 4 weak corner beams
        assert_eq!((legs, low_cte, weaks), (8, 8, 4));
    }

    #[test]
    fn star_is_re_entrant() {
        // the inner vertices lie strictly inside the square of the tips,
        // and the tips stay inside the cell
        for p in [
            RveParams::new(100.0, 13.34, 23.85, 0.5),
            RveParams::new(5.0, 100.0, 40.0, 5.0),
            RveParams::new(50.0, 50.0, 5.0, 1.0),
        ] {
            let model = build_rve(&p).unwrap();
            let (f, _) = model.nodes[INNER_PX];
            let (g, _) = model.nodes[TIP_PP];
            assert!(0.0 < f && f < g);
            assert!(g < model.edge_length / 2.0);
        }
    }

    #[test]
    fn degenerate_legs_rejected() {
        // h2 -> 0 collapses the star legs
        let err = build_rve(&RveParams::new(10.0, 1e-12, 20.0, 1.0)).unwrap_err();
        assert!(matches!(err, Error::DegenerateMember { .. }));
    }

    #[test]
    fn rejects_nonpositive_inputs() {
        assert!(build_rve(&RveParams::new(-1.0, 10.0, 20.0, 1.0)).is_err());
        assert!(build_rve(&RveParams::new(10.0, 10.0, 20.0, 0.0)).is_err());
        assert!(build_rve(&RveParams::new(10.0, f64::NAN, 20.0, 1.0)).is_err());
    }

    fn reflect_contains(model: &RveModel, fx: f64, fy: f64) -> bool {
        let tol = 1e-9 * model.edge_length;
        model.nodes.iter().all(|&(x, y)| {
            let (rx, ry) = (fx * x, fy * y);
            model
                .nodes
                .iter()
                .any(|&(nx, ny)| libm::hypot(nx - rx, ny - ry) <= tol)
        })
    }

    #[test]
    fn four_fold_symmetry() {
        for p in [
            RveParams::new(100.0, 13.34, 23.85, 0.5),
            RveParams::new(42.34, 89.46, 14.20, 4.95),
            RveParams::new(5.0, 5.0, 5.0, 0.5),
        ] {
            let model = build_rve(&p).unwrap();
            assert!(reflect_contains(&model, -1.0, 1.0));
            assert!(reflect_contains(&model, 1.0, -1.0));
            // 90 degree rotation (x, y) -> (-y, x)
            let tol = 1e-9 * model.edge_length;
            assert!(model.nodes.iter().all(|&(x, y)| model
                .nodes
                .iter()
                .any(|&(nx, ny)| libm::hypot(nx + y, ny - x) <= tol)));
        }
    }

    #[test]
    fn weak_beam_topology() {
        let model = build_rve(&RveParams::new(50.0, 50.0, 20.0, 1.0)).unwrap();
        let weak: Vec<_> = model
            .members
            .iter()
            .filter(|m| m.material == MaterialId::Weak)
            .collect();
        assert_eq!(weak.len(), 4);
        for m in &weak {
            let corner_ends = [m.node_a, m.node_b]
                .iter()
                .filter(|n| model.boundary_sets.corners.contains(n))
                .count();
            assert_eq!(corner_ends, 1);
        }
        // each corner touched by exactly one weak beam
        for c in model.boundary_sets.corners {
            let incident = weak
                .iter()
                .filter(|m| m.node_a == c || m.node_b == c)
                .count();
            assert_eq!(incident, 1);
        }
    }

    #[test]
    fn member_graph_connected() {
        let model = build_rve(&RveParams::new(30.0, 70.0, 35.0, 2.0)).unwrap();
        let n = model.nodes.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        while let Some(u) = stack.pop() {
            for m in &model.members {
                for (a, b) in [(m.node_a, m.node_b), (m.node_b, m.node_a)] {
                    if a == u && !seen[b] {
                        seen[b] = true;
                        stack.push(b);
                    }
                }
            }
        }
        assert!(seen.iter().all(|&s| s));
    }

    #[test]
    fn validate_params_against_box() {
        let bounds = Bounds::default();
        assert!(validate_params(&RveParams::new(100.0, 13.34, 23.85, 0.5), &bounds).is_empty());
        let v = validate_params(&RveParams::new(4.9, 50.0, 20.0, 1.0), &bounds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, "h1");
        assert_eq!(v[0].lo, 5.0);
        let v = validate_params(&RveParams::new(50.0, 50.0, 41.0, 1.0), &bounds);
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].variable, "theta");
        assert_eq!(v[0].hi, 40.0);
    }

    #[test]
    fn boundary_pairing_mirrors() {
        let model = build_rve(&RveParams::new(60.0, 40.0, 25.0, 1.5)).unwrap();
        let tol = 1e-9 * model.edge_length;
        let b = &model.boundary_sets;
        assert_eq!(b.left.len(), b.right.len());
        assert_eq!(b.top.len(), b.bottom.len());
        for (&l, &r) in b.left.iter().zip(&b.right) {
            let (xl, yl) = model.nodes[l];
            let (xr, yr) = model.nodes[r];
            assert!((xl + xr).abs() <= tol && (yl - yr).abs() <= tol);
        }
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        fn box_params() -> impl Strategy<Value = RveParams> {
            (5.0..100.0f64, 5.0..100.0f64, 5.0..40.0f64, 0.5..5.0f64)
                .prop_map(|(h1, h2, th, t)| RveParams::new(h1, h2, th, t))
        }

        proptest! {
            #[test]
            fn edge_length_monotone(p in box_params(), dh in 0.1..20.0f64) {
                let l0 = rve_edge_length(&p).unwrap();
                let mut p1 = p; p1.h1 += dh;
                let mut p2 = p; p2.h2 += dh;
                let mut pt = p; pt.t += 1.0;
                prop_assert!(rve_edge_length(&p1).unwrap() > l0);
                prop_assert!(rve_edge_length(&p2).unwrap() > l0);
                prop_assert_eq!(rve_edge_length(&pt).unwrap(), l0);
            }

            #[test]
            fn symmetry_holds_everywhere(p in box_params()) {
                let model = build_rve(&p).unwrap();
                prop_assert!(reflect_contains(&model, -1.0, 1.0));
                prop_assert!(reflect_contains(&model, 1.0, -1.0));
            }
        }
    }
}
