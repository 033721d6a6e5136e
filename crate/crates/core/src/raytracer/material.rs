use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Angle, Frequency, VACUUM_PERMITTIVITY};

/// Surface material. Facets are opaque; only reflection is modelled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Material {
    /// Lossy dielectric with conductivity `c · f_GHz^d` S/m.
    Dielectric {
        name: String,
        relative_permittivity: f64,
        conductivity_coefficient: f64,
        conductivity_exponent: f64,
    },
    PerfectConductor { name: String },
    /// Perfect absorber: blocks rays and reflects nothing.
    Absorber { name: String },
}

impl Material {
    /// Concrete as used for the whole auditorium.
    pub fn concrete() -> Self {
        Material::Dielectric {
            name: "concrete".into(),
            relative_permittivity: 5.31,
            conductivity_coefficient: 0.0326,
            conductivity_exponent: 0.8095,
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Material::Dielectric { name, .. }
            | Material::PerfectConductor { name }
            | Material::Absorber { name } => name,
        }
    }

    pub fn is_absorber(&self) -> bool {
        matches!(self, Material::Absorber { .. })
    }

    pub fn validate(&self) -> Result<()> {
        if let Material::Dielectric {
            name,
            relative_permittivity,
            conductivity_coefficient,
            conductivity_exponent,
        } = self
        {
            if !(*relative_permittivity >= 1.0) || !relative_permittivity.is_finite() {
                return Err(Error::Geometry(format!(
                    "material {name}: relative permittivity must be >= 1, got {relative_permittivity}"
                )));
            }
            if !(*conductivity_coefficient >= 0.0)
                || !conductivity_coefficient.is_finite()
                || !conductivity_exponent.is_finite()
            {
                return Err(Error::Geometry(format!(
                    "material {name}: conductivity model must be finite and non-negative"
                )));
            }
        }
        Ok(())
    }

    /// Complex relative permittivity `ε_r − jσ/(2πf ε₀)`; `None` for the
    /// ideal materials.
    pub fn complex_permittivity(&self, f: Frequency) -> Option<Complex64> {
        match self {
            Material::Dielectric {
                relative_permittivity,
                conductivity_coefficient,
                conductivity_exponent,
                ..
            } => {
                let sigma = conductivity_coefficient * f.ghz().powf(*conductivity_exponent);
                let omega = 2.0 * std::f64::consts::PI * f.hz();
                Some(Complex64::new(
                    *relative_permittivity,
                    -sigma / (omega * VACUUM_PERMITTIVITY),
                ))
            }
            _ => None,
        }
    }
}

/// Field orientation relative to the plane of incidence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Polarization {
    /// E perpendicular to the plane of incidence.
    Te,
    /// E in the plane of incidence.
    Tm,
}

/// Fresnel reflection coefficient for incidence angle `angle` from the
/// facet normal.
///
/// Sign convention: `Γ_TE = (cos θ − √(ε − sin²θ)) / (cos θ + √(ε − sin²θ))`
/// and `Γ_TM = (ε cos θ − √(ε − sin²θ)) / (ε cos θ + √(ε − sin²θ))`.
pub fn fresnel_coefficient(
    material: &Material,
    angle: Angle,
    f: Frequency,
    polarization: Polarization,
) -> Complex64 {
    let eps = match material {
        Material::Absorber { .. } => return Complex64::new(0.0, 0.0),
        Material::PerfectConductor { .. } => {
            return match polarization {
                Polarization::Te => Complex64::new(-1.0, 0.0),
                Polarization::Tm => Complex64::new(1.0, 0.0),
            }
        }
        Material::Dielectric { .. } => material
            .complex_permittivity(f)
            .expect("dielectric has a permittivity"),
    };
    let (s, c) = angle.radians().sin_cos();
    let c = c.max(0.0);
    let root = (eps - s * s).sqrt();
    match polarization {
        Polarization::Te => (c - root) / (c + root),
        Polarization::Tm => (eps * c - root) / (eps * c + root),
    }
}
