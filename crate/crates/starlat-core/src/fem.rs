//! Linear-elastic 2D Timoshenko frame solver with thermal loads and
//! periodic multi-point constraints.
//!
//! Each node carries (ux, uy, theta_z). Opposite boundary displacements
//! are tied to two macro DOFs: the cell extensions `dx` and `dy`. The
//! constrained system is solved with Lagrange multipliers on a dense LU.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::linalg::{lu_solve, vec_norm, Mat};
use crate::material::MaterialSet;
use crate::mesh::{BeamElement, Mesh, DOF_PER_NODE};
use crate::Result;

/// Relative residual demanded of the constrained solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Everything needed to form one element's stiffness and thermal load.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ElementState {
    pub length: f64,
    /// Direction cosines of the element axis.
    pub cos: f64,
    pub sin: f64,
    pub youngs: f64,
    pub shear: f64,
    pub cte: f64,
    pub area: f64,
    pub inertia: f64,
    pub shear_correction: f64,
}

impl ElementState {
    /// Evaluates material properties at `temperature` for one mesh element.
    pub fn from_element(
        mesh: &Mesh,
        element: &BeamElement,
        materials: &MaterialSet,
        temperature: f64,
    ) -> Result<Self> {
        let (xa, ya) = mesh.nodes[element.node_a];
        let (xb, yb) = mesh.nodes[element.node_b];
        let (dx, dy) = (xb - xa, yb - ya);
        let length = libm::hypot(dx, dy);
        if !(length > 0.0) {
            return Err(Error::DegenerateElement(element.node_a));
        }
        let mat = materials.get(element.material);
        let state = ElementState {
            length,
            cos: dx / length,
            sin: dy / length,
            youngs: mat.youngs_modulus(temperature),
            shear: mat.shear_modulus(temperature),
            cte: mat.secant_cte(temperature),
            area: element.section.area,
            inertia: element.section.inertia,
            shear_correction: element.section.shear_correction,
        };
        state.validate()?;
        Ok(state)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("element length", self.length),
            ("Young's modulus", self.youngs),
            ("shear modulus", self.shear),
            ("area", self.area),
            ("second moment", self.inertia),
            ("shear correction", self.shear_correction),
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

    /// Shear parameter `Phi = 12 E I / (kappa G A L^2)`.
    pub fn shear_parameter(&self) -> f64 {
        12.0 * self.youngs * self.inertia
            / (self.shear_correction * self.shear * self.area * self.length * self.length)
    }
}

/// 6x6 element stiffness in global axes, DOF order
/// (ux1, uy1, th1, ux2, uy2, th2).
pub fn element_stiffness(e: &ElementState) -> Result<[[f64; 6]; 6]> {
    let l = e.length;
    let phi = e.shear_parameter();
    let ea = e.youngs * e.area / l;
    let f = e.youngs * e.inertia / ((1.0 + phi) * l * l * l);

    // local matrix: axial at (0,3), Timoshenko bending block on (1,2,4,5)
    let mut k = [[0.0f64; 6]; 6];
    k[0][0] = ea;
    k[0][3] = -ea;
    k[3][3] = ea;
    k[1][1] = 12.0 * f;
    k[1][2] = 6.0 * f * l;
    k[1][4] = -12.0 * f;
    k[1][5] = 6.0 * f * l;
    k[2][2] = (4.0 + phi) * f * l * l;
    k[2][4] = -6.0 * f * l;
    k[2][5] = (2.0 - phi) * f * l * l;
    k[4][4] = 12.0 * f;
    k[4][5] = -6.0 * f * l;
    k[5][5] = (4.0 + phi) * f * l * l;
    for r in 0..6 {
        for c in 0..r {
            k[r][c] = k[c][r];
        }
    }

    // rotate to global axes: K_g = R^T K_l R with R block-diagonal
    let (c, s) = (e.cos, e.sin);
    let rot = |v: [f64; 6]| -> [f64; 6] {
        // applies R to a column vector of global DOFs
        [
            c * v[0] + s * v[1],
            -s * v[0] + c * v[1],
            v[2],
            c * v[3] + s * v[4],
            -s * v[3] + c * v[4],
            v[5],
        ]
    };
    let mut out = [[0.0f64; 6]; 6];
    for col in 0..6 {
        let mut unit = [0.0; 6];
        unit[col] = 1.0;
        let rcol = rot(unit);
        // tmp = K_l * R * e_col
        let mut tmp = [0.0; 6];
        for r in 0..6 {
            tmp[r] = (0..6).map(|j| k[r][j] * rcol[j]).sum();
        }
        // out_col = R^T * tmp
        let g = [
            c * tmp[0] - s * tmp[1],
            s * tmp[0] + c * tmp[1],
            tmp[2],
            c * tmp[3] - s * tmp[4],
            s * tmp[3] + c * tmp[4],
            tmp[5],
        ];
        for r in 0..6 {
            out[r][col] = g[r];
        }
    }
    for r in 0..6 {
        for cc in 0..6 {
            if !out[r][cc].is_finite() {
                return Err(Error::NonFinite("element stiffness entry"));
            }
        }
    }
    Ok(out)
}

/// Equivalent nodal forces of restrained uniform thermal strain:
/// an axial pair `+-E A alpha dT` along the element axis.
pub fn element_thermal_load(e: &ElementState, delta_t: f64) -> [f64; 6] {
    let n = e.youngs * e.area * e.cte * delta_t;
    [-n * e.cos, -n * e.sin, 0.0, n * e.cos, n * e.sin, 0.0]
}

/// Assembled global stiffness and load vector (3 DOF per node).
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub stiffness: Mat,
    pub load: Vec<f64>,
    pub n_nodes: usize,
}

/// Assembles `K` and the thermal load vector at the given evaluation
/// temperature (`delta_t = 0` gives a zero load vector).
pub fn assemble(
    mesh: &Mesh,
    materials: &MaterialSet,
    temperature: f64,
    delta_t: f64,
) -> Result<GlobalSystem> {
    if mesh.elements.is_empty() {
        return Err(Error::EmptyMesh);
    }
    let n_dofs = mesh.dof_count();
    let mut k = Mat::zeros(n_dofs, n_dofs);
    let mut f = vec![0.0; n_dofs];

    for (ei, el) in mesh.elements.iter().enumerate() {
        if el.node_a == el.node_b {
            return Err(Error::DegenerateElement(ei));
        }
        let state = ElementState::from_element(mesh, el, materials, temperature)?;
        let ke = element_stiffness(&state)?;
        let dofs = [
            DOF_PER_NODE * el.node_a,
            DOF_PER_NODE * el.node_a + 1,
            DOF_PER_NODE * el.node_a + 2,
            DOF_PER_NODE * el.node_b,
            DOF_PER_NODE * el.node_b + 1,
            DOF_PER_NODE * el.node_b + 2,
        ];
        for r in 0..6 {
            for c in 0..6 {
                k.add(dofs[r], dofs[c], ke[r][c]);
            }
        }
        if delta_t != 0.0 {
            let fe = element_thermal_load(&state, delta_t);
            for r in 0..6 {
                f[dofs[r]] += fe[r];
            }
        }
    }
    Ok(GlobalSystem {
        stiffness: k,
        load: f,
        n_nodes: mesh.nodes.len(),
    })
}

/// One DOF referenced by a constraint relation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dof {
    /// `(node id, component)` with component 0 = ux, 1 = uy, 2 = theta_z.
    Node(usize, usize),
    /// Macro extension of the cell in x.
    MacroX,
    /// Macro extension of the cell in y.
    MacroY,
}

/// A linear relation `sum coeff * dof = rhs`.
#[derive(Debug, Clone, PartialEq)]
pub struct Relation {
    pub terms: Vec<(Dof, f64)>,
    pub rhs: f64,
}

impl Relation {
    /// `dof_b - dof_a - macro = 0` style periodic tie.
    fn tie(a: Dof, b: Dof, macro_dof: Option<Dof>) -> Self {
        let mut terms = vec![(b, 1.0), (a, -1.0)];
        if let Some(m) = macro_dof {
            terms.push((m, -1.0));
        }
        Relation { terms, rhs: 0.0 }
    }

    /// Fixes a single DOF to a value.
    pub fn fix(dof: Dof, value: f64) -> Self {
        Relation {
            terms: vec![(dof, 1.0)],
            rhs: value,
        }
    }
}

/// The periodic constraint set plus rigid-body anchoring.
#[derive(Debug, Clone, PartialEq)]
pub struct PbcConstraintSet {
    pub relations: Vec<Relation>,
    /// Node whose translations are pinned.
    pub anchor: usize,
}

/// Builds the periodic relations for a meshed cell:
///
/// * left/right pairs: `ux_R - ux_L = dx`, `uy_R - uy_L = 0`, equal rotations;
/// * bottom/top pairs: `ux_T - ux_B = 0`, `uy_T - uy_B = dy`, equal rotations;
/// * corner nodes chained through both directions;
/// * the bottom mid-edge node anchored (`ux = uy = 0`).
pub fn build_pbc_constraints(mesh: &Mesh) -> Result<PbcConstraintSet> {
    let bs = &mesh.boundary_sets;
    let n = mesh.nodes.len();
    for &c in &bs.corners {
        if c >= n {
            return Err(Error::MissingBoundaryNode("corners"));
        }
    }
    for (side, set) in [
        ("left", &bs.left),
        ("right", &bs.right),
        ("top", &bs.top),
        ("bottom", &bs.bottom),
    ] {
        if set.is_empty() {
            return Err(Error::MissingBoundaryNode(side));
        }
        for &i in set.iter() {
            if i >= n {
                return Err(Error::UnpairedBoundaryNode { node: i, side });
            }
        }
    }

    let tol = 1e-9 * mesh.edge_length;
    let mut relations = Vec::new();

    // left/right pairs, matched by y coordinate
    let pairs_lr = pair_mirrored(mesh, &bs.left, &bs.right, tol, true)?;
    for (l, r) in pairs_lr {
        relations.push(Relation::tie(
            Dof::Node(l, 0),
            Dof::Node(r, 0),
            Some(Dof::MacroX),
        ));
        relations.push(Relation::tie(Dof::Node(l, 1), Dof::Node(r, 1), None));
        relations.push(Relation::tie(Dof::Node(l, 2), Dof::Node(r, 2), None));
    }
    // bottom/top pairs, matched by x coordinate
    let pairs_bt = pair_mirrored(mesh, &bs.bottom, &bs.top, tol, false)?;
    for (b, t) in pairs_bt {
        relations.push(Relation::tie(Dof::Node(b, 0), Dof::Node(t, 0), None));
        relations.push(Relation::tie(
            Dof::Node(b, 1),
            Dof::Node(t, 1),
            Some(Dof::MacroY),
        ));
        relations.push(Relation::tie(Dof::Node(b, 2), Dof::Node(t, 2), None));
    }

    // corners (bl, br, tl, tr) chained to bottom-left through both directions
    let [bl, br, tl, tr] = bs.corners;
    relations.push(Relation::tie(
        Dof::Node(bl, 0),
        Dof::Node(br, 0),
        Some(Dof::MacroX),
    ));
    relations.push(Relation::tie(Dof::Node(bl, 1), Dof::Node(br, 1), None));
    relations.push(Relation::tie(Dof::Node(bl, 2), Dof::Node(br, 2), None));
    relations.push(Relation::tie(Dof::Node(bl, 0), Dof::Node(tl, 0), None));
    relations.push(Relation::tie(
        Dof::Node(bl, 1),
        Dof::Node(tl, 1),
        Some(Dof::MacroY),
    ));
    relations.push(Relation::tie(Dof::Node(bl, 2), Dof::Node(tl, 2), None));
    relations.push(Relation::tie(
        Dof::Node(bl, 0),
        Dof::Node(tr, 0),
        Some(Dof::MacroX),
    ));
    relations.push(Relation::tie(
        Dof::Node(bl, 1),
        Dof::Node(tr, 1),
        Some(Dof::MacroY),
    ));
    relations.push(Relation::tie(Dof::Node(bl, 2), Dof::Node(tr, 2), None));

    // anchor: bottom mid-edge node closest to x = 0
    let anchor = *bs
        .bottom
        .iter()
        .min_by(|&&a, &&b| {
            let xa = libm::fabs(mesh.nodes[a].0);
            let xb = libm::fabs(mesh.nodes[b].0);
            xa.partial_cmp(&xb).unwrap_or(core::cmp::Ordering::Equal)
        })
        .ok_or(Error::MissingBoundaryNode("bottom"))?;
    relations.push(Relation::fix(Dof::Node(anchor, 0), 0.0));
    relations.push(Relation::fix(Dof::Node(anchor, 1), 0.0));

    Ok(PbcConstraintSet { relations, anchor })
}

/// Matches boundary nodes of two opposite sides into mirror pairs.
fn pair_mirrored(
    mesh: &Mesh,
    low: &[usize],
    high: &[usize],
    tol: f64,
    horizontal: bool,
) -> Result<Vec<(usize, usize)>> {
    let side = if horizontal { "left" } else { "bottom" };
    let mut out = Vec::with_capacity(low.len());
    for &a in low {
        let (xa, ya) = mesh.nodes[a];
        // the partner shares the along-edge coordinate and mirrors the other
        let partner = high.iter().copied().find(|&b| {
            let (xb, yb) = mesh.nodes[b];
            if horizontal {
                libm::fabs(ya - yb) <= tol && libm::fabs(xa + xb) <= tol
            } else {
                libm::fabs(xa - xb) <= tol && libm::fabs(ya + yb) <= tol
            }
        });
        match partner {
            Some(b) => out.push((a, b)),
            None => return Err(Error::UnpairedBoundaryNode { node: a, side }),
        }
    }
    if out.len() != high.len() {
        // some high-side node was left unmatched
        let unmatched = high
            .iter()
            .copied()
            .find(|b| !out.iter().any(|&(_, x)| x == *b))
            .unwrap_or(0);
        return Err(Error::UnpairedBoundaryNode {
            node: unmatched,
            side: if horizontal { "right" } else { "top" },
        });
    }
    Ok(out)
}

/// Solution of a constrained solve.
#[derive(Debug, Clone)]
pub struct SolutionField {
    /// Nodal displacements/rotations, 3 per node.
    pub u: Vec<f64>,
    /// Macro extension in x.
    pub dx: f64,
    /// Macro extension in y.
    pub dy: f64,
    /// Relative residual of the constrained solve.
    pub residual: f64,
}

/// Solves the linearly constrained system via Lagrange multipliers.
///
/// With `prescribed_dx` set, an extra relation pins the macro x-extension
/// (the mechanical load case); the thermal load must then be zero.
pub fn solve_constrained(
    sys: &GlobalSystem,
    constraints: &PbcConstraintSet,
    prescribed_dx: Option<f64>,
) -> Result<SolutionField> {
    let n_dofs = DOF_PER_NODE * sys.n_nodes;
    if prescribed_dx.is_some() && vec_norm(&sys.load) != 0.0 {
        return Err(Error::InvalidConfig(
            "prescribed extension combined with a thermal load",
        ));
    }

    let mut relations: Vec<Relation> = constraints.relations.clone();
    if let Some(dx) = prescribed_dx {
        if !dx.is_finite() {
            return Err(Error::NonFinite("prescribed extension"));
        }
        relations.push(Relation::fix(Dof::MacroX, dx));
    }

    // macro DOFs participate only if referenced by a relation
    let uses_x = relations
        .iter()
        .any(|r| r.terms.iter().any(|(d, _)| *d == Dof::MacroX));
    let uses_y = relations
        .iter()
        .any(|r| r.terms.iter().any(|(d, _)| *d == Dof::MacroY));
    let idx_x = uses_x.then_some(n_dofs);
    let idx_y = uses_y.then_some(n_dofs + usize::from(uses_x));
    let n_primal = n_dofs + usize::from(uses_x) + usize::from(uses_y);
    let nc = relations.len();
    let size = n_primal + nc;

    let dof_index = |d: Dof| -> Result<usize> {
        match d {
            Dof::Node(node, comp) => {
                if node >= sys.n_nodes || comp >= DOF_PER_NODE {
                    return Err(Error::MissingBoundaryNode("constraint DOF"));
                }
                Ok(DOF_PER_NODE * node + comp)
            }
            Dof::MacroX => idx_x.ok_or(Error::InvalidConfig("unused macro DOF x")),
            Dof::MacroY => idx_y.ok_or(Error::InvalidConfig("unused macro DOF y")),
        }
    };

    // scale constraint rows to the stiffness magnitude for conditioning
    let mut diag_scale = 0.0f64;
    for i in 0..n_dofs {
        diag_scale += libm::fabs(sys.stiffness.get(i, i));
    }
    let scale = (diag_scale / n_dofs as f64).max(1.0);

    let mut a = Mat::zeros(size, size);
    let mut rhs = vec![0.0; size];
    for r in 0..n_dofs {
        for c in 0..n_dofs {
            let v = sys.stiffness.get(r, c);
            if v != 0.0 {
                a.set(r, c, v);
            }
        }
        rhs[r] = sys.load[r];
    }
    for (j, rel) in relations.iter().enumerate() {
        let row = n_primal + j;
        for &(d, coeff) in &rel.terms {
            let i = dof_index(d)?;
            a.add(row, i, coeff * scale);
            a.add(i, row, coeff * scale);
        }
        rhs[row] = rel.rhs * scale;
    }

    let x = lu_solve(a.clone(), &rhs)?;
    let ax = a.matvec(&x);
    let res: Vec<f64> = ax.iter().zip(&rhs).map(|(p, q)| p - q).collect();
    let rhs_norm = vec_norm(&rhs);
    let rel_res = if rhs_norm > 0.0 {
        vec_norm(&res) / rhs_norm
    } else {
        vec_norm(&res)
    };
    if !rel_res.is_finite() || rel_res > 1e-8 {
        return Err(Error::SingularSystem);
    }

    Ok(SolutionField {
        u: x[..n_dofs].to_vec(),
        dx: idx_x.map(|i| x[i]).unwrap_or(0.0),
        dy: idx_y.map(|i| x[i]).unwrap_or(0.0),
        residual: rel_res,
    })
}
