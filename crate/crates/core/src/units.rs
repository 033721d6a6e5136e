//! Scalar quantities shared by every module.
//!
//! Powers live in dBm and gains in dB; conversion to linear units happens
//! only inside formulas. Angles are degrees from the reflector normal in the
//! plane of incidence, with the design reflection at +65°.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Speed of light in vacuum, m/s.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

/// Vacuum permittivity, F/m.
pub const VACUUM_PERMITTIVITY: f64 = 8.854_187_812_8e-12;

/// A carrier frequency in hertz. Always strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Frequency(f64);

impl Frequency {
    pub fn from_hz(hz: f64) -> Result<Self> {
        if hz.is_finite() && hz > 0.0 {
            Ok(Frequency(hz))
        } else {
            Err(Error::domain(format!("frequency must be positive, got {hz} Hz")))
        }
    }

    pub fn from_ghz(ghz: f64) -> Result<Self> {
        Self::from_hz(ghz * 1e9)
    }

    pub fn hz(self) -> f64 {
        self.0
    }

    pub fn ghz(self) -> f64 {
        self.0 / 1e9
    }

    /// Free-space wavelength in metres.
    pub fn wavelength(self) -> f64 {
        SPEED_OF_LIGHT / self.0
    }

    /// Free-space wavenumber 2π/λ in rad/m.
    pub fn wavenumber(self) -> f64 {
        std::f64::consts::TAU / self.wavelength()
    }
}

impl TryFrom<f64> for Frequency {
    type Error = Error;
    fn try_from(hz: f64) -> Result<Self> {
        Frequency::from_hz(hz)
    }
}

impl From<Frequency> for f64 {
    fn from(f: Frequency) -> f64 {
        f.0
    }
}

impl fmt::Display for Frequency {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} GHz", self.ghz())
    }
}

/// Wavelength c/f in metres; rejects non-positive frequencies.
pub fn wavelength_of(hz: f64) -> Result<f64> {
    Frequency::from_hz(hz).map(Frequency::wavelength)
}

/// Power ratio in dB to linear.
pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

/// Linear power ratio to dB. The input must be strictly positive.
pub fn linear_to_db(linear: f64) -> Result<f64> {
    if linear > 0.0 && linear.is_finite() {
        Ok(10.0 * linear.log10())
    } else {
        Err(Error::domain(format!(
            "linear power ratio must be positive, got {linear}"
        )))
    }
}

/// Absolute power level in dBm.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct PowerLevel(pub f64);

impl PowerLevel {
    pub fn dbm(self) -> f64 {
        self.0
    }

    pub fn from_watts(w: f64) -> Result<Self> {
        Ok(PowerLevel(linear_to_db(w)? + 30.0))
    }

    pub fn from_milliwatts(mw: f64) -> Result<Self> {
        Ok(PowerLevel(linear_to_db(mw)?))
    }

    pub fn watts(self) -> f64 {
        db_to_linear(self.0 - 30.0)
    }

    pub fn milliwatts(self) -> f64 {
        db_to_linear(self.0)
    }
}

impl std::ops::Add<GainDb> for PowerLevel {
    type Output = PowerLevel;
    fn add(self, g: GainDb) -> PowerLevel {
        PowerLevel(self.0 + g.0)
    }
}

impl std::ops::Sub<GainDb> for PowerLevel {
    type Output = PowerLevel;
    fn sub(self, g: GainDb) -> PowerLevel {
        PowerLevel(self.0 - g.0)
    }
}

/// A gain or loss in dB. Negative values are legal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct GainDb(pub f64);

impl GainDb {
    pub fn db(self) -> f64 {
        self.0
    }

    pub fn linear(self) -> f64 {
        db_to_linear(self.0)
    }

    pub fn from_linear(x: f64) -> Result<Self> {
        linear_to_db(x).map(GainDb)
    }
}

/// Angle in degrees from the reflector normal.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Angle(f64);

impl Angle {
    pub fn from_degrees(deg: f64) -> Self {
        Angle(deg)
    }

    pub fn from_radians(rad: f64) -> Self {
        Angle(rad.to_degrees())
    }

    pub fn degrees(self) -> f64 {
        self.0
    }

    pub fn radians(self) -> f64 {
        self.0.to_radians()
    }

    pub fn sin(self) -> f64 {
        self.radians().sin()
    }

    pub fn cos(self) -> f64 {
        self.radians().cos()
    }

    /// True for directions strictly inside (−90°, 90°).
    pub fn is_propagating(self) -> bool {
        self.0.is_finite() && self.0 > -90.0 && self.0 < 90.0
    }

    pub(crate) fn require_propagating(self, what: &str) -> Result<Self> {
        if self.is_propagating() {
            Ok(self)
        } else {
            Err(Error::domain(format!(
                "{what} must lie in (-90, 90) degrees, got {}",
                self.0
            )))
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}°", self.0)
    }
}
