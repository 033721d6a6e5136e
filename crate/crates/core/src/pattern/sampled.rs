//! Far-field patterns sampled on a regular angular grid.
//!
//! Directions in a pattern's local frame use a signed polar angle θ ∈
//! [−90°, 90°] from the normal (local +z) and an azimuth φ ∈ [0°, 180°)
//! measured from the plane of incidence (local xz plane). The pair covers
//! the front hemisphere exactly once; φ = 0 is the plane-of-incidence cut
//! and the point (θ, φ + 180°) folds onto (−θ, φ).

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::Frequency;

/// How the complex values of a pattern are scaled.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Normalization {
    Raw,
    PeakNormalized,
    /// `|value|²` is the linear directivity (gain with unit efficiency).
    DirectivityScaled,
}

/// Something that radiates: complex far-field amplitude toward a direction
/// given as a unit vector in the radiator's local frame, scaled so that
/// `|field|²` is the linear gain. Zero behind the radiator where relevant.
pub trait FarField: Send + Sync {
    fn field(&self, local_dir: [f64; 3]) -> Complex64;

    fn gain_linear(&self, local_dir: [f64; 3]) -> f64 {
        self.field(local_dir).norm_sqr()
    }
}

/// Unit vector for signed polar angle `theta` and azimuth `phi`, degrees.
pub fn direction_from_angles(theta_deg: f64, phi_deg: f64) -> [f64; 3] {
    let (st, ct) = theta_deg.to_radians().sin_cos();
    let (sp, cp) = phi_deg.to_radians().sin_cos();
    [st * cp, st * sp, ct]
}

/// Inverse of [`direction_from_angles`]; `None` for the rear hemisphere.
pub fn angles_from_direction(v: [f64; 3]) -> Option<(f64, f64)> {
    let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
    if !(norm > 0.0) {
        return None;
    }
    let uz = v[2] / norm;
    if uz < -1e-12 {
        return None;
    }
    let theta = uz.clamp(-1.0, 1.0).acos().to_degrees();
    if v[0] == 0.0 && v[1] == 0.0 {
        return Some((0.0, 0.0));
    }
    let phi = v[1].atan2(v[0]).to_degrees();
    if phi < 0.0 {
        Some((-theta, phi + 180.0))
    } else if phi >= 180.0 {
        Some((-theta, 0.0))
    } else {
        Some((theta, phi))
    }
}

/// Angular sampling used for synthesis.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PatternGrid {
    pub theta_step_deg: f64,
    /// `None` samples only the plane-of-incidence cut.
    pub phi_step_deg: Option<f64>,
}

impl PatternGrid {
    /// 0.1° in θ and 1° in φ.
    pub const FULL: PatternGrid = PatternGrid {
        theta_step_deg: 0.1,
        phi_step_deg: Some(1.0),
    };

    /// 0.1° plane-of-incidence cut.
    pub const CUT: PatternGrid = PatternGrid {
        theta_step_deg: 0.1,
        phi_step_deg: None,
    };

    pub fn theta_deg(&self) -> Vec<f64> {
        let n = (180.0 / self.theta_step_deg).round() as i64;
        (0..=n)
            .map(|i| -90.0 + 180.0 * i as f64 / n as f64)
            .collect()
    }

    pub fn phi_deg(&self) -> Vec<f64> {
        match self.phi_step_deg {
            None => vec![0.0],
            Some(step) => {
                let n = (180.0 / step).round() as usize;
                (0..n).map(|i| 180.0 * i as f64 / n as f64).collect()
            }
        }
    }
}

/// Complex far-field amplitude on a (θ, φ) grid, θ-major.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiationPattern {
    frequency: Frequency,
    theta_deg: Vec<f64>,
    phi_deg: Vec<f64>,
    values: Vec<Complex64>,
    normalization: Normalization,
}

fn strictly_increasing(xs: &[f64]) -> bool {
    xs.iter().all(|x| x.is_finite()) && xs.windows(2).all(|w| w[0] < w[1])
}

impl RadiationPattern {
    pub fn new(
        frequency: Frequency,
        theta_deg: Vec<f64>,
        phi_deg: Vec<f64>,
        values: Vec<Complex64>,
        normalization: Normalization,
    ) -> Result<Self> {
        if theta_deg.is_empty() || phi_deg.is_empty() {
            return Err(Error::Geometry("pattern grid is empty".into()));
        }
        if !strictly_increasing(&theta_deg) || !strictly_increasing(&phi_deg) {
            return Err(Error::Geometry("pattern grid must be strictly increasing".into()));
        }
        if theta_deg[0] < -90.0 - 1e-9 || *theta_deg.last().unwrap() > 90.0 + 1e-9 {
            return Err(Error::Geometry("theta must lie within [-90, 90] degrees".into()));
        }
        if phi_deg[0] < -1e-9 || *phi_deg.last().unwrap() >= 180.0 - 1e-9 {
            return Err(Error::Geometry("phi must lie within [0, 180) degrees".into()));
        }
        if values.len() != theta_deg.len() * phi_deg.len() {
            return Err(Error::Geometry(format!(
                "expected {} samples, got {}",
                theta_deg.len() * phi_deg.len(),
                values.len()
            )));
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::Numerical("pattern contains non-finite samples".into()));
        }
        Ok(RadiationPattern {
            frequency,
            theta_deg,
            phi_deg,
            values,
            normalization,
        })
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    pub fn theta_deg(&self) -> &[f64] {
        &self.theta_deg
    }

    pub fn phi_deg(&self) -> &[f64] {
        &self.phi_deg
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn normalization(&self) -> Normalization {
        self.normalization
    }

    pub fn value(&self, it: usize, ip: usize) -> Complex64 {
        self.values[it * self.phi_deg.len() + ip]
    }

    pub fn is_cut(&self) -> bool {
        self.phi_deg.len() == 1
    }

    /// True when θ spans the whole front half plane.
    pub fn covers_half_space(&self) -> bool {
        self.theta_deg[0] <= -90.0 + 1e-9 && *self.theta_deg.last().unwrap() >= 90.0 - 1e-9
    }

    /// Index of the φ row closest to `phi_deg`.
    pub fn phi_index(&self, phi_deg: f64) -> usize {
        let mut best = 0;
        for (i, p) in self.phi_deg.iter().enumerate() {
            if (p - phi_deg).abs() < (self.phi_deg[best] - phi_deg).abs() {
                best = i;
            }
        }
        best
    }

    /// θ samples and values of one φ row.
    pub fn cut(&self, phi_deg: f64) -> (Vec<f64>, Vec<Complex64>) {
        let ip = self.phi_index(phi_deg);
        let vals = (0..self.theta_deg.len()).map(|it| self.value(it, ip)).collect();
        (self.theta_deg.clone(), vals)
    }

    /// Same grid, values multiplied by `factor`.
    pub fn scaled(&self, factor: f64, normalization: Normalization) -> RadiationPattern {
        RadiationPattern {
            values: self.values.iter().map(|v| v * factor).collect(),
            normalization,
            ..self.clone()
        }
    }

    /// Linear interpolation along θ within row `ip`.
    fn interp_theta(&self, ip: usize, theta: f64) -> Complex64 {
        let th = &self.theta_deg;
        if theta <= th[0] {
            return if theta < th[0] - 1e-9 {
                Complex64::new(0.0, 0.0)
            } else {
                self.value(0, ip)
            };
        }
        let last = th.len() - 1;
        if theta >= th[last] {
            return if theta > th[last] + 1e-9 {
                Complex64::new(0.0, 0.0)
            } else {
                self.value(last, ip)
            };
        }
        let hi = th.partition_point(|&t| t <= theta);
        let lo = hi - 1;
        let w = (theta - th[lo]) / (th[hi] - th[lo]);
        self.value(lo, ip) * (1.0 - w) + self.value(hi, ip) * w
    }

    /// Bilinear interpolation at (θ, φ) in degrees. Cut patterns ignore φ.
    /// Directions outside the sampled θ range evaluate to zero.
    pub fn interpolate(&self, theta_deg: f64, phi_deg: f64) -> Complex64 {
        if self.is_cut() {
            return self.interp_theta(0, theta_deg);
        }
        let mut theta = theta_deg;
        let mut phi = phi_deg.rem_euclid(360.0);
        if phi >= 180.0 {
            phi -= 180.0;
            theta = -theta;
        }
        let ph = &self.phi_deg;
        let n = ph.len();
        let hi = ph.partition_point(|&p| p <= phi);
        if hi == 0 {
            // Below the first row: wrap from the folded last row.
            let span = ph[0] + 180.0 - ph[n - 1];
            let w = (phi + 180.0 - ph[n - 1]) / span;
            let a = self.interp_theta(n - 1, -theta);
            let b = self.interp_theta(0, theta);
            return a * (1.0 - w) + b * w;
        }
        let lo = hi - 1;
        if hi == n {
            let span = ph[0] + 180.0 - ph[lo];
            let w = (phi - ph[lo]) / span;
            let a = self.interp_theta(lo, theta);
            let b = self.interp_theta(0, -theta);
            return a * (1.0 - w) + b * w;
        }
        let w = (phi - ph[lo]) / (ph[hi] - ph[lo]);
        self.interp_theta(lo, theta) * (1.0 - w) + self.interp_theta(hi, theta) * w
    }
}

impl FarField for RadiationPattern {
    fn field(&self, local_dir: [f64; 3]) -> Complex64 {
        match angles_from_direction(local_dir) {
            Some((t, p)) => self.interpolate(t, p),
            None => Complex64::new(0.0, 0.0),
        }
    }
}
