//! Directivity, gain, peak direction and half-power beam width.

use std::f64::consts::PI;

use super::sampled::{Normalization, RadiationPattern};
use crate::error::{Error, Result};
use crate::units::{Angle, GainDb};

/// Trapezoid weights for an arbitrary increasing abscissa.
fn trapezoid_weights(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let mut w = vec![0.0; n];
    for i in 0..n.saturating_sub(1) {
        let h = x[i + 1] - x[i];
        w[i] += 0.5 * h;
        w[i + 1] += 0.5 * h;
    }
    w
}

/// `∮|F|² dΩ` over the front hemisphere: trapezoid in θ with the `|sin θ|`
/// Jacobian, periodic trapezoid in φ. Needs a full (θ, φ) grid with θ on
/// [−90°, 90°] and uniform φ steps spanning [0°, 180°).
pub fn total_power(pattern: &RadiationPattern) -> Result<f64> {
    let phi = pattern.phi_deg();
    if phi.len() < 2 {
        return Err(Error::domain("total power needs a full (theta, phi) grid"));
    }
    let step = 180.0 / phi.len() as f64;
    let uniform = phi
        .iter()
        .enumerate()
        .all(|(i, p)| (p - phi[0] - i as f64 * step).abs() < 1e-9);
    if !uniform {
        return Err(Error::domain("phi samples must be uniform over [0, 180)"));
    }
    if !pattern.covers_half_space() {
        return Err(Error::domain("theta samples must span [-90, 90]"));
    }
    let theta_rad: Vec<f64> = pattern.theta_deg().iter().map(|t| t.to_radians()).collect();
    let wt = trapezoid_weights(&theta_rad);
    let dphi = step.to_radians();
    let nphi = phi.len();
    // Fixed summation order keeps results reproducible.
    let mut total = 0.0;
    for (it, (&t, &w)) in theta_rad.iter().zip(&wt).enumerate() {
        let row: f64 = (0..nphi).map(|ip| pattern.value(it, ip).norm_sqr()).sum();
        total += row * w * t.sin().abs();
    }
    Ok(total * dphi)
}

/// Peak directivity and where it occurs.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Directivity {
    pub linear: f64,
    pub theta_deg: f64,
    pub phi_deg: f64,
}

impl Directivity {
    pub fn dbi(&self) -> f64 {
        10.0 * self.linear.log10()
    }
}

/// `D = 4π |F|²_max / ∮|F|² dΩ`, with nothing radiated behind the panel.
pub fn directivity(pattern: &RadiationPattern) -> Result<Directivity> {
    let power = total_power(pattern)?;
    if !(power > 0.0) {
        return Err(Error::domain("pattern radiates no power"));
    }
    let nphi = pattern.phi_deg().len();
    let (imax, pmax) = pattern
        .values()
        .iter()
        .map(|v| v.norm_sqr())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    Ok(Directivity {
        linear: 4.0 * PI * pmax / power,
        theta_deg: pattern.theta_deg()[imax / nphi],
        phi_deg: pattern.phi_deg()[imax % nphi],
    })
}

/// `G = e_cd · D`.
pub fn gain_from_directivity(directivity_linear: f64, efficiency: f64) -> Result<GainDb> {
    if !(efficiency > 0.0 && efficiency <= 1.0) {
        return Err(Error::domain(format!("efficiency {efficiency} outside (0, 1]")));
    }
    GainDb::from_linear(efficiency * directivity_linear)
}

impl RadiationPattern {
    /// Rescales so that `|value|²` is directivity.
    pub fn directivity_scaled(&self) -> Result<RadiationPattern> {
        let power = total_power(self)?;
        if !(power > 0.0) {
            return Err(Error::domain("pattern radiates no power"));
        }
        Ok(self.scaled((4.0 * PI / power).sqrt(), Normalization::DirectivityScaled))
    }

    /// Rescales so the largest sample has unit magnitude.
    pub fn peak_normalized(&self) -> Result<RadiationPattern> {
        let peak = self.values().iter().map(|v| v.norm()).fold(0.0, f64::max);
        if !(peak > 0.0) {
            return Err(Error::domain("pattern is identically zero"));
        }
        Ok(self.scaled(1.0 / peak, Normalization::PeakNormalized))
    }
}

/// Direction of the largest sample along the φ cut closest to `cut_phi_deg`.
pub fn peak_angle(pattern: &RadiationPattern, cut_phi_deg: f64) -> Result<Angle> {
    let (theta, vals) = pattern.cut(cut_phi_deg);
    let (i, p) = vals
        .iter()
        .map(|v| v.norm_sqr())
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    if !(p > 0.0) {
        return Err(Error::domain("cut is identically zero"));
    }
    Ok(Angle::from_degrees(theta[i]))
}

/// Width between the −3 dB crossings bracketing the peak of sampled power
/// `power` on increasing abscissa `x`, interpolating linearly in dB.
pub fn half_power_width(x: &[f64], power: &[f64]) -> Result<f64> {
    let (ipk, pk) = power
        .iter()
        .copied()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |best, (i, p)| if p > best.1 { (i, p) } else { best });
    if !(pk > 0.0) {
        return Err(Error::domain("no positive peak"));
    }
    let rel = |i: usize| 10.0 * (power[i] / pk).max(1e-300).log10();
    let crossing = |from: usize, to: usize| -> f64 {
        let (a, b) = (rel(from), rel(to));
        x[from] + (x[to] - x[from]) * (-3.0103 - a) / (b - a)
    };
    let half = -3.0103;
    let mut right = None;
    for i in ipk + 1..x.len() {
        if rel(i) < half {
            right = Some(crossing(i - 1, i));
            break;
        }
    }
    let mut left = None;
    for i in (0..ipk).rev() {
        if rel(i) < half {
            left = Some(crossing(i + 1, i));
            break;
        }
    }
    match (left, right) {
        (Some(l), Some(r)) => Ok(r - l),
        _ => Err(Error::domain("half-power level is not crossed on both sides of the peak")),
    }
}

/// Half-power beam width in degrees along a φ cut.
pub fn hpbw(pattern: &RadiationPattern, cut_phi_deg: f64) -> Result<f64> {
    let (theta, vals) = pattern.cut(cut_phi_deg);
    let power: Vec<f64> = vals.iter().map(|v| v.norm_sqr()).collect();
    half_power_width(&theta, &power)
}
