//! Error type shared by all modules.

use alloc::string::String;
use core::fmt;

/// Errors raised by geometry construction, assembly and solving.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input value was NaN or infinite.
    NonFinite(&'static str),
    /// An input that must be strictly positive was not.
    NonPositive(&'static str, f64),
    /// A lattice member collapsed below the degeneracy threshold.
    DegenerateMember { member: usize, length: f64 },
    /// Invalid material table (empty or non-increasing temperatures, bad moduli).
    InvalidMaterial(String),
    /// Mesh has no elements.
    EmptyMesh,
    /// An element references the same node twice.
    DegenerateElement(usize),
    /// A boundary node could not be paired with its opposite-side partner.
    UnpairedBoundaryNode { node: usize, side: &'static str },
    /// A required boundary node set (e.g. a corner) is missing.
    MissingBoundaryNode(&'static str),
    /// The constrained linear system is singular or the solve did not reach
    /// the required residual.
    SingularSystem,
    /// Thermal case violated the square-symmetry identity `dx == dy`.
    SymmetryBroken { dx: f64, dy: f64 },
    /// Division guard in Poisson's-ratio extraction.
    VanishingAxialExtension(f64),
    /// Seed factor outside (0, 1].
    InvalidSeedFactor(f64),
    /// Optimization configuration value out of range.
    InvalidConfig(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite(what) => write!(f, "{what} must be finite"),
            Error::NonPositive(what, v) => {
                write!(f, "{what} must be strictly positive, got {v}")
            }
            Error::DegenerateMember { member, length } => write!(
                f,
                "member {member} has degenerate length {length:e} (below threshold)"
            ),
            Error::InvalidMaterial(msg) => write!(f, "invalid material: {msg}"),
            Error::EmptyMesh => write!(f, "mesh contains no elements"),
            Error::DegenerateElement(e) => {
                write!(f, "element {e} connects a node to itself")
            }
            Error::UnpairedBoundaryNode { node, side } => write!(
                f,
                "boundary node {node} on the {side} side has no mirror partner"
            ),
            Error::MissingBoundaryNode(which) => {
                write!(f, "required boundary node set `{which}` is missing or empty")
            }
            Error::SingularSystem => write!(f, "constrained system is singular"),
            Error::SymmetryBroken { dx, dy } => write!(
                f,
                "square symmetry violated in thermal case: dx = {dx:e}, dy = {dy:e}"
            ),
            Error::VanishingAxialExtension(dx) => {
                write!(f, "axial extension {dx:e} too small to form a strain ratio")
            }
            Error::InvalidSeedFactor(s) => {
                write!(f, "mesh seed factor must lie in (0, 1], got {s}")
            }
            Error::InvalidConfig(what) => write!(f, "invalid configuration: {what}"),
        }
    }
}

impl core::error::Error for Error {}
