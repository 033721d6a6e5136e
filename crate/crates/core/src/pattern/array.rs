//! Phase profiles, array factors and finite-panel scattering.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use rayon::prelude::*;

use super::metrics::total_power;
use super::panel::PanelSpec;
use super::sampled::{direction_from_angles, FarField, Normalization, PatternGrid, RadiationPattern};
use crate::error::{Error, Result};
use crate::units::{Angle, Frequency};

/// Reflection phase of each cell column along x, radians in [0, 2π).
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseProfile {
    phases: Vec<f64>,
    bits: Option<u32>,
}

/// Rounds `phase` to the nearest of `2^bits` levels, ties away from zero,
/// and wraps the result into [0, 2π).
pub fn quantize_phase(phase: f64, bits: u32) -> f64 {
    let levels = 1u64 << bits;
    let step = TAU / levels as f64;
    let level = (phase.rem_euclid(TAU) / step).round() as u64 % levels;
    level as f64 * step
}

impl PhaseProfile {
    /// Wraps and optionally quantizes arbitrary per-column phases.
    pub fn from_phases(phases: Vec<f64>, bits: Option<u32>) -> Self {
        let phases = phases
            .into_iter()
            .map(|p| match bits {
                Some(b) => quantize_phase(p, b),
                None => p.rem_euclid(TAU),
            })
            .collect();
        PhaseProfile { phases, bits }
    }

    pub fn uniform(n: usize) -> Self {
        PhaseProfile {
            phases: vec![0.0; n],
            bits: None,
        }
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn bits(&self) -> Option<u32> {
        self.bits
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Same phases re-quantized with a different resolution.
    pub fn requantized(&self, bits: Option<u32>) -> Self {
        PhaseProfile::from_phases(self.phases.clone(), bits)
    }
}

/// Linear phase gradient steering `theta_i` into `theta_r` at `f0`,
/// quantized with the panel's bit depth. The gradient is laid over one tile
/// and repeated, since tiles are physical copies.
pub fn phase_profile(
    panel: &PanelSpec,
    theta_i: Angle,
    theta_r: Angle,
    f0: Frequency,
) -> Result<PhaseProfile> {
    theta_i.require_propagating("incidence angle")?;
    theta_r.require_propagating("reflection angle")?;
    Ok(gradient_profile(panel, theta_i, theta_r, f0, panel.supercell.quantization_bits))
}

fn gradient_profile(
    panel: &PanelSpec,
    theta_i: Angle,
    theta_r: Angle,
    f0: Frequency,
    bits: Option<u32>,
) -> PhaseProfile {
    let slope = -f0.wavenumber() * (theta_r.sin() - theta_i.sin());
    let dx = panel.dx();
    let phases = (0..panel.nx)
        .map(|m| slope * (m % panel.tile_nx) as f64 * dx)
        .collect();
    PhaseProfile::from_phases(phases, bits)
}

/// Unquantized version of [`phase_profile`], the b → ∞ reference.
pub fn continuous_phase_profile(
    panel: &PanelSpec,
    theta_i: Angle,
    theta_r: Angle,
    f0: Frequency,
) -> Result<PhaseProfile> {
    theta_i.require_propagating("incidence angle")?;
    theta_r.require_propagating("reflection angle")?;
    Ok(gradient_profile(panel, theta_i, theta_r, f0, None))
}

/// Precomputed column weights for fast evaluation of the separable array
/// factor `AF(u, v) = Σ_m e^{j(k u x_m + φ_m)} · Σ_n e^{j k v y_n}` with
/// cell centres symmetric about the panel centre.
#[derive(Debug, Clone)]
pub struct ArrayFactor {
    weights: Vec<Complex64>,
    ny: usize,
    dx: f64,
    dy: f64,
}

/// Σ_m w_m z^m by Horner's rule.
fn horner(weights: &[Complex64], z: Complex64) -> Complex64 {
    weights
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &w| acc * z + w)
}

impl ArrayFactor {
    pub fn new(panel: &PanelSpec, profile: &PhaseProfile) -> Result<Self> {
        if profile.len() != panel.nx {
            return Err(Error::domain(format!(
                "profile has {} columns, panel has {}",
                profile.len(),
                panel.nx
            )));
        }
        Ok(ArrayFactor {
            weights: profile.phases.iter().map(|&p| Complex64::from_polar(1.0, p)).collect(),
            ny: panel.ny,
            dx: panel.dx(),
            dy: panel.dy(),
        })
    }

    /// Column sum at transverse wavenumber `k·u` along x.
    pub fn along_x(&self, k: f64, u: f64) -> Complex64 {
        let nx = self.weights.len();
        let psi = k * u * self.dx;
        let x0 = -0.5 * (nx as f64 - 1.0);
        Complex64::from_polar(1.0, psi * x0) * horner(&self.weights, Complex64::from_polar(1.0, psi))
    }

    /// Uniform row sum along y; real because cells are centred.
    pub fn along_y(&self, k: f64, v: f64) -> f64 {
        let n = self.ny as f64;
        let half = 0.5 * k * v * self.dy;
        let den = half.sin();
        if den.abs() < 1e-9 {
            // Limit at the grating maxima; sign follows the Dirichlet kernel.
            let m = (half / std::f64::consts::PI).round();
            let sign = if (m as i64 * (self.ny as i64 - 1)) % 2 == 0 { 1.0 } else { -1.0 };
            return sign * n;
        }
        (n * half).sin() / den
    }

    pub fn evaluate(&self, k: f64, u: f64, v: f64) -> Complex64 {
        self.along_x(k, u) * self.along_y(k, v)
    }
}

/// In-plane array factor at observation angle `theta_obs` for normal
/// incidence: `Σ_m e^{j(k sinθ x_m + φ_m)} · ny`.
pub fn array_factor(
    panel: &PanelSpec,
    profile: &PhaseProfile,
    theta_obs: Angle,
    f: Frequency,
) -> Result<Complex64> {
    let af = ArrayFactor::new(panel, profile)?;
    Ok(af.along_x(f.wavenumber(), theta_obs.sin()) * panel.ny as f64)
}

/// Radiation pattern of a single cell.
#[derive(Debug, Clone)]
pub enum ElementPattern {
    Isotropic,
    /// Aperture-element obliquity factor cos θ.
    Cosine,
    /// Electric surface current polarized along local y:
    /// `√(1 − (r̂·ŷ)²)`, flat across the plane of incidence.
    SurfaceCurrent,
    /// Imported embedded-element pattern.
    Sampled(Arc<RadiationPattern>),
}

impl ElementPattern {
    fn amplitude(&self, dir: [f64; 3]) -> Complex64 {
        match self {
            ElementPattern::Isotropic => Complex64::new(1.0, 0.0),
            ElementPattern::Cosine => Complex64::new(dir[2].max(0.0), 0.0),
            ElementPattern::SurfaceCurrent => {
                Complex64::new((1.0 - dir[1] * dir[1]).max(0.0).sqrt(), 0.0)
            }
            ElementPattern::Sampled(p) => p.field(dir),
        }
    }

    fn validate(&self) -> Result<()> {
        if let ElementPattern::Sampled(p) = self {
            if !p.covers_half_space() {
                return Err(Error::Geometry(
                    "element pattern must cover theta from -90 to 90 degrees".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Finite reflector lit by a plane wave: element pattern times array factor.
///
/// The incident wave carries transverse wavenumber `k sin θ_i` along x, so
/// with a zero profile the beam leaves at `θ = θ_i`.
#[derive(Debug, Clone)]
pub struct PanelScatterer {
    panel: PanelSpec,
    array: ArrayFactor,
    element: ElementPattern,
    incidence: Angle,
    frequency: Frequency,
    scale: f64,
}

impl PanelScatterer {
    pub fn new(
        panel: &PanelSpec,
        profile: &PhaseProfile,
        element: ElementPattern,
        incidence: Angle,
        frequency: Frequency,
    ) -> Result<Self> {
        incidence.require_propagating("incidence angle")?;
        element.validate()?;
        Ok(PanelScatterer {
            panel: *panel,
            array: ArrayFactor::new(panel, profile)?,
            element,
            incidence,
            frequency,
            scale: 1.0,
        })
    }

    /// The reflector as built: its own design gradient, normal incidence.
    pub fn design(panel: &PanelSpec, element: ElementPattern, frequency: Frequency) -> Result<Self> {
        let cell = panel.supercell;
        let profile = phase_profile(
            panel,
            Angle::from_degrees(0.0),
            cell.design_angle,
            cell.design_frequency,
        )?;
        Self::new(panel, &profile, element, Angle::from_degrees(0.0), frequency)
    }

    /// The design gradient lit from the reciprocal direction, so that the
    /// main beam leaves along the normal at the design frequency.
    pub fn design_reciprocal(
        panel: &PanelSpec,
        element: ElementPattern,
        frequency: Frequency,
    ) -> Result<Self> {
        let cell = panel.supercell;
        let profile = phase_profile(
            panel,
            Angle::from_degrees(0.0),
            cell.design_angle,
            cell.design_frequency,
        )?;
        let incidence = Angle::from_degrees(-cell.design_angle.degrees());
        Self::new(panel, &profile, element, incidence, frequency)
    }

    pub fn panel(&self) -> &PanelSpec {
        &self.panel
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn incidence(&self) -> Angle {
        self.incidence
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    /// Unscaled field toward a local direction; zero behind the panel.
    pub fn raw_field(&self, dir: [f64; 3]) -> Complex64 {
        if dir[2] < 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let k = self.frequency.wavenumber();
        let u = dir[0] - self.incidence.sin();
        self.element.amplitude(dir) * self.array.evaluate(k, u, dir[1])
    }

    /// Samples the unscaled field on `grid`.
    pub fn sample(&self, grid: &PatternGrid) -> Result<RadiationPattern> {
        let theta = grid.theta_deg();
        let phi = grid.phi_deg();
        let rows: Vec<Vec<Complex64>> = theta
            .par_iter()
            .map(|&t| {
                phi.iter()
                    .map(|&p| self.raw_field(direction_from_angles(t, p)))
                    .collect()
            })
            .collect();
        RadiationPattern::new(
            self.frequency,
            theta,
            phi,
            rows.into_iter().flatten().collect(),
            Normalization::Raw,
        )
    }

    /// Scales the field so `|field|²` is directivity, using the quadrature
    /// of a full-hemisphere sample on `grid`.
    pub fn directivity_scaled(mut self, grid: &PatternGrid) -> Result<Self> {
        if grid.phi_step_deg.is_none() {
            return Err(Error::domain("directivity scaling needs a full (theta, phi) grid"));
        }
        let power = total_power(&self.sample(grid)?)?;
        self.scale = (4.0 * std::f64::consts::PI / power).sqrt();
        Ok(self)
    }

    /// Gain in dBi toward in-plane angle `theta` (signed).
    pub fn gain_dbi(&self, theta: Angle) -> f64 {
        10.0 * self.gain_linear(direction_from_angles(theta.degrees(), 0.0)).log10()
    }
}

impl FarField for PanelScatterer {
    fn field(&self, local_dir: [f64; 3]) -> Complex64 {
        self.raw_field(local_dir) * self.scale
    }
}

/// Element pattern times array factor for the panel's design profile under
/// normal incidence, sampled on `grid`. Values are left unscaled.
pub fn synthesize_pattern(
    panel: &PanelSpec,
    element: ElementPattern,
    f: Frequency,
    grid: &PatternGrid,
) -> Result<RadiationPattern> {
    PanelScatterer::design(panel, element, f)?.sample(grid)
}

/// Peak of `|AF|` along the plane-of-incidence cut, searched on a 0.01° grid.
pub fn peak_array_factor(panel: &PanelSpec, profile: &PhaseProfile, f: Frequency) -> Result<f64> {
    let af = ArrayFactor::new(panel, profile)?;
    let k = f.wavenumber();
    Ok((0..=18_000)
        .map(|i| {
            let t = (-90.0 + i as f64 * 0.01f64).to_radians();
            af.along_x(k, t.sin()).norm()
        })
        .fold(0.0, f64::max)
        * panel.ny as f64)
}

/// Convenience for callers holding a direction in (θ, φ) form.
pub fn field_at(pattern: &dyn FarField, theta_deg: f64, phi_deg: f64) -> Complex64 {
    pattern.field(direction_from_angles(theta_deg, phi_deg))
}
