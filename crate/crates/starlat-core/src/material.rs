//! Temperature-dependent constituent materials.
//!
//! Each material carries tabulated Young's modulus and secant CTE values.
//! Lookups interpolate linearly between tabulated temperatures and clamp
//! outside the tabulated range. The secant convention means thermal strain
//! at temperature `T` is `alpha(T) * (T - T_ref)` with `T_ref = 20 C`.

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use crate::error::Error;
use crate::Result;

/// Reference temperature (deg C) for the secant CTE convention.
pub const REFERENCE_TEMPERATURE: f64 = 20.0;

/// One constituent material with temperature-dependent properties.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Material {
    pub name: String,
    /// (temperature deg C, Young's modulus Pa), strictly increasing temperatures.
    pub e_points: Vec<(f64, f64)>,
    /// (temperature deg C, secant CTE 1/K), strictly increasing temperatures.
    pub alpha_points: Vec<(f64, f64)>,
    /// Poisson's ratio of the constituent, temperature independent.
    pub nu: f64,
}

impl Material {
    pub fn new(
        name: &str,
        e_points: Vec<(f64, f64)>,
        alpha_points: Vec<(f64, f64)>,
        nu: f64,
    ) -> Result<Self> {
        let m = Material {
            name: String::from(name),
            e_points,
            alpha_points,
            nu,
        };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        for (label, table) in [("E", &self.e_points), ("alpha", &self.alpha_points)] {
            if table.is_empty() {
                return Err(Error::InvalidMaterial(alloc::format!(
                    "{}: empty {label} table",
                    self.name
                )));
            }
            for w in table.windows(2) {
                if !(w[1].0 > w[0].0) {
                    return Err(Error::InvalidMaterial(alloc::format!(
                        "{}: {label} temperatures must strictly increase",
                        self.name
                    )));
                }
            }
            for &(t, v) in table {
                if !t.is_finite() || !v.is_finite() {
                    return Err(Error::InvalidMaterial(alloc::format!(
                        "{}: non-finite {label} entry",
                        self.name
                    )));
                }
            }
        }
        if self.e_points.iter().any(|&(_, e)| e <= 0.0) {
            return Err(Error::InvalidMaterial(alloc::format!(
                "{}: Young's modulus must be positive",
                self.name
            )));
        }
        if !(self.nu > -1.0 && self.nu < 0.5) {
            return Err(Error::InvalidMaterial(alloc::format!(
                "{}: Poisson's ratio {} outside (-1, 0.5)",
                self.name, self.nu
            )));
        }
        Ok(())
    }

    /// Young's modulus at temperature `t` (linear interpolation, clamped).
    pub fn youngs_modulus(&self, t: f64) -> f64 {
        interp(&self.e_points, t)
    }

    /// Secant CTE at temperature `t` (linear interpolation, clamped).
    pub fn secant_cte(&self, t: f64) -> f64 {
        interp(&self.alpha_points, t)
    }

    /// Shear modulus `G = E / (2 (1 + nu))` at temperature `t`.
    pub fn shear_modulus(&self, t: f64) -> f64 {
        self.youngs_modulus(t) / (2.0 * (1.0 + self.nu))
    }
}

fn interp(table: &[(f64, f64)], t: f64) -> f64 {
    let first = table[0];
    let last = table[table.len() - 1];
    if t <= first.0 {
        return first.1;
    }
    if t >= last.0 {
        return last.1;
    }
    for w in table.windows(2) {
        let (t0, v0) = w[0];
        let (t1, v1) = w[1];
        if t <= t1 {
            let s = (t - t0) / (t1 - t0);
            return v0 + s * (v1 - v0);
        }
    }
    last.1
}

/// Which constituent a member is made of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub enum MaterialId {
    /// Low-CTE constituent (boundary rods and the tip frame).
    Invar,
    /// High-CTE constituent (the star legs driving both mechanisms).
    Aluminium,
    /// Fictitious weak material for the corner beams.
    Weak,
}

/// The three materials of one lattice configuration.
#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct MaterialSet {
    pub invar: Material,
    pub aluminium: Material,
    pub weak: Material,
}

impl MaterialSet {
    pub fn get(&self, id: MaterialId) -> &Material {
        match id {
            MaterialId::Invar => &self.invar,
            MaterialId::Aluminium => &self.aluminium,
            MaterialId::Weak => &self.weak,
        }
    }

    /// Default Aluminium/Invar pairing with the fictitious weak material.
    pub fn aluminium_invar() -> Self {
        MaterialSet {
            invar: invar(),
            aluminium: aluminium(),
            weak: weak_material(),
        }
    }

    /// All structural members replaced by a single material (weak beams keep
    /// the same material too). Useful for free-expansion oracles.
    pub fn uniform(material: Material) -> Self {
        MaterialSet {
            invar: material.clone(),
            aluminium: material.clone(),
            weak: material,
        }
    }
}

/// Al 7075: E = 71 GPa at 20 C falling to 66 GPa at 200 C, CTE 23.0e-6
/// rising to 24.3e-6 1/K, nu = 0.33.
pub fn aluminium() -> Material {
    Material::new(
        "Al 7075",
        vec![(20.0, 71.0e9), (200.0, 66.0e9)],
        vec![(20.0, 23.0e-6), (200.0, 24.3e-6)],
        0.33,
    )
    .expect("built-in material is valid")
}

/// Invar: E = 144 GPa at 20 C falling to 135 GPa at 200 C, CTE 1.1e-6
/// rising to 2.5e-6 1/K, nu = 0.29.
pub fn invar() -> Material {
    Material::new(
        "Invar",
        vec![(20.0, 144.0e9), (200.0, 135.0e9)],
        vec![(20.0, 1.1e-6), (200.0, 2.5e-6)],
        0.29,
    )
    .expect("built-in material is valid")
}

/// Fictitious weak material for the corner beams: E = 1 kPa, alpha = 1e-6 1/K.
pub fn weak_material() -> Material {
    Material::new(
        "Weak",
        vec![(20.0, 1.0e3)],
        vec![(20.0, 1.0e-6)],
        0.3,
    )
    .expect("built-in material is valid")
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn interpolates_and_clamps() {
        let al = aluminium();
        assert_relative_eq!(al.youngs_modulus(20.0), 71.0e9);
        assert_relative_eq!(al.youngs_modulus(200.0), 66.0e9);
        assert_relative_eq!(al.youngs_modulus(110.0), 68.5e9);
        // clamped outside the table
        assert_relative_eq!(al.youngs_modulus(-40.0), 71.0e9);
        assert_relative_eq!(al.youngs_modulus(500.0), 66.0e9);
        assert_relative_eq!(al.secant_cte(200.0), 24.3e-6);
    }

    #[test]
    fn single_point_table_is_constant() {
        let w = weak_material();
        assert_relative_eq!(w.youngs_modulus(20.0), 1.0e3);
        assert_relative_eq!(w.youngs_modulus(200.0), 1.0e3);
        assert_relative_eq!(w.secant_cte(150.0), 1.0e-6);
    }

    #[test]
    fn rejects_bad_tables() {
        assert!(Material::new("x", vec![], vec![(20.0, 1e-6)], 0.3).is_err());
        assert!(
            Material::new("x", vec![(20.0, 1e9), (20.0, 2e9)], vec![(20.0, 1e-6)], 0.3).is_err()
        );
        assert!(Material::new("x", vec![(20.0, -1.0)], vec![(20.0, 1e-6)], 0.3).is_err());
        assert!(Material::new("x", vec![(20.0, 1e9)], vec![(20.0, 1e-6)], 0.6).is_err());
    }
}
