//! Received power through Tx → reflector → Rx links.
//!
//! Two closed forms are provided: a radar-equation form driven by the
//! bistatic cross-section σ (method 1) and a cascaded Friis form driven by
//! the reflector's gains toward Tx and Rx (method 2). They coincide when
//! `G_rx G_tx = 4πσ/λ²`. A line-of-sight Friis reference and the per-position
//! correction `P_correct = P_r − P_diff` complete the measurement pipeline.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db, Angle, Frequency, GainDb, PowerLevel};

/// Link parameters: powers and gains in dB, distances in metres.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkParams {
    /// Transmit power `P_t`.
    pub tx_power: PowerLevel,
    /// Tx antenna gain `G_t`.
    pub tx_gain: GainDb,
    /// Rx antenna gain `G_r`.
    pub rx_gain: GainDb,
    /// Tx-side cable loss `L_t`, stored positive and subtracted.
    pub tx_cable_loss: GainDb,
    /// LNA gain plus Rx-side cable loss `G_a`.
    pub rx_chain_gain: GainDb,
    /// Tx → reflector distance `R_1`.
    pub r1: f64,
    /// Reflector → Rx distance `R_2`.
    pub r2: f64,
    pub frequency: Frequency,
}

impl LinkParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r1 > 0.0 && self.r2 > 0.0) || !self.r1.is_finite() || !self.r2.is_finite() {
            return Err(Error::domain(format!(
                "hop distances must be positive, got R1 = {}, R2 = {}",
                self.r1, self.r2
            )));
        }
        Ok(())
    }

    /// The measured campaign: 6 dBm, 18 dB horns, 2.5 dB cable loss,
    /// 19.9 dB receive chain, 5.5 m and 7 m hops.
    pub fn campaign(frequency: Frequency) -> Self {
        LinkParams {
            tx_power: PowerLevel(6.0),
            tx_gain: GainDb(18.0),
            rx_gain: GainDb(18.0),
            tx_cable_loss: GainDb(2.5),
            rx_chain_gain: GainDb(19.9),
            r1: 5.5,
            r2: 7.0,
            frequency,
        }
    }

    pub fn wavelength(&self) -> f64 {
        self.frequency.wavelength()
    }
}

/// Illumination and observation angles and the physical panel area.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BistaticGeometry {
    pub theta_i: Angle,
    pub theta_r: Angle,
    pub area: f64,
}

impl BistaticGeometry {
    pub fn new(theta_i: Angle, theta_r: Angle, area: f64) -> Result<Self> {
        theta_i.require_propagating("incidence angle")?;
        theta_r.require_propagating("observation angle")?;
        if !(area > 0.0) || !area.is_finite() {
            return Err(Error::domain(format!("panel area must be positive, got {area}")));
        }
        Ok(BistaticGeometry {
            theta_i,
            theta_r,
            area,
        })
    }
}

/// Cross-section of an ideal lossless anomalous reflector:
/// `σ = 4π A² cos θ_i cos θ_r / λ²`.
pub fn bistatic_sigma_ideal(geom: &BistaticGeometry, f: Frequency) -> f64 {
    let lambda = f.wavelength();
    4.0 * PI * geom.area * geom.area * geom.theta_i.cos() * geom.theta_r.cos() / (lambda * lambda)
}

/// Radar-equation estimate
/// `P_1 = P_t G_t G_r σ λ² / ((4π)³ R_1² R_2²)`.
pub fn received_power_method1(p: &LinkParams, sigma: f64) -> Result<PowerLevel> {
    p.validate()?;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("cross-section must be non-negative, got {sigma}")));
    }
    let lambda = p.wavelength();
    let mw = p.tx_power.milliwatts() * p.tx_gain.linear() * p.rx_gain.linear() * sigma * lambda * lambda
        / ((4.0 * PI).powi(3) * p.r1 * p.r1 * p.r2 * p.r2);
    Ok(milliwatts_to_level(mw))
}

/// Cascaded Friis estimate
/// `P_2 = P_t G_t G_rx G_tx G_r λ⁴ / ((4π)⁴ (R_1 R_2)²)`, where `g_rx` is
/// the reflector gain toward the Tx and `g_tx` toward the Rx.
pub fn received_power_method2(p: &LinkParams, g_rx: GainDb, g_tx: GainDb) -> Result<PowerLevel> {
    p.validate()?;
    if !g_rx.db().is_finite() || !g_tx.db().is_finite() {
        return Err(Error::domain("reflector gains must be finite"));
    }
    let lambda = p.wavelength();
    let mw = p.tx_power.milliwatts()
        * p.tx_gain.linear()
        * g_rx.linear()
        * g_tx.linear()
        * p.rx_gain.linear()
        * lambda.powi(4)
        / ((4.0 * PI).powi(4) * (p.r1 * p.r2).powi(2));
    Ok(milliwatts_to_level(mw))
}

pub(crate) fn milliwatts_to_level(mw: f64) -> PowerLevel {
    if mw > 0.0 {
        PowerLevel(10.0 * mw.log10())
    } else {
        PowerLevel(f64::NEG_INFINITY)
    }
}

/// `G_rx G_tx = 4πσ/λ²`, linear.
pub fn gain_product_from_sigma(sigma: f64, f: Frequency) -> Result<f64> {
    if !(sigma > 0.0) || !sigma.is_finite() {
        return Err(Error::domain(format!("cross-section must be positive, got {sigma}")));
    }
    let lambda = f.wavelength();
    Ok(4.0 * PI * sigma / (lambda * lambda))
}

/// Inverse of [`gain_product_from_sigma`].
pub fn sigma_from_gain_product(product: f64, f: Frequency) -> Result<f64> {
    if !(product > 0.0) || !product.is_finite() {
        return Err(Error::domain(format!("gain product must be positive, got {product}")));
    }
    let lambda = f.wavelength();
    Ok(product * lambda * lambda / (4.0 * PI))
}

/// Applies the measurement chain: `P_r = P − L_t + G_a`.
pub fn chain_terminal(power: PowerLevel, p: &LinkParams) -> PowerLevel {
    power - p.tx_cable_loss + p.rx_chain_gain
}

/// Direct Tx → Rx Friis reference over distance `r3`:
/// `P_t + G_t + G_r + 20 log10(λ / 4πR_3) − L_t + G_a`.
pub fn los_reference(p: &LinkParams, r3: f64) -> Result<PowerLevel> {
    if !(r3 > 0.0) || !r3.is_finite() {
        return Err(Error::domain(format!("Tx-Rx distance must be positive, got {r3}")));
    }
    let fspl = 20.0 * (p.wavelength() / (4.0 * PI * r3)).log10();
    Ok(PowerLevel(
        p.tx_power.dbm() + p.tx_gain.db() + p.rx_gain.db() + fspl - p.tx_cable_loss.db()
            + p.rx_chain_gain.db(),
    ))
}

/// `P_diff = P_theory − P_m`.
pub fn power_difference(theory: PowerLevel, measured: PowerLevel) -> GainDb {
    GainDb(theory.dbm() - measured.dbm())
}

/// One calibration offset.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectionEntry {
    pub freq_ghz: f64,
    pub angle_deg: f64,
    pub p_diff_db: f64,
}

/// Calibration offsets keyed exactly by measured (frequency, angle).
///
/// Keys are held at 1 kHz / 1 µdeg resolution so that values parsed from
/// text and values computed in code address the same entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorrectionTable {
    entries: BTreeMap<(i64, i64), CorrectionEntry>,
}

fn table_key(freq_ghz: f64, angle_deg: f64) -> (i64, i64) {
    ((freq_ghz * 1e6).round() as i64, (angle_deg * 1e6).round() as i64)
}

impl CorrectionTable {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds an entry; a second entry for the same key is an error.
    pub fn insert(&mut self, entry: CorrectionEntry) -> Result<()> {
        if ![entry.freq_ghz, entry.angle_deg, entry.p_diff_db]
            .iter()
            .all(|v| v.is_finite())
        {
            return Err(Error::Numerical("correction entries must be finite".into()));
        }
        let key = table_key(entry.freq_ghz, entry.angle_deg);
        if self.entries.contains_key(&key) {
            return Err(Error::Lookup(format!(
                "duplicate correction for {} GHz, {} deg",
                entry.freq_ghz, entry.angle_deg
            )));
        }
        self.entries.insert(key, entry);
        Ok(())
    }

    pub fn get(&self, f: Frequency, angle: Angle) -> Option<GainDb> {
        self.entries
            .get(&table_key(f.ghz(), angle.degrees()))
            .map(|e| GainDb(e.p_diff_db))
    }

    /// Entries ordered by frequency, then angle.
    pub fn entries(&self) -> impl Iterator<Item = &CorrectionEntry> {
        self.entries.values()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
}

/// `P_correct = P_r − P_diff(f, angle)`; no interpolation between entries.
pub fn apply_correction(
    p_r: PowerLevel,
    table: &CorrectionTable,
    f: Frequency,
    angle: Angle,
) -> Result<PowerLevel> {
    let diff = table.get(f, angle).ok_or_else(|| {
        Error::Lookup(format!("no correction for {} GHz at {} deg", f.ghz(), angle.degrees()))
    })?;
    Ok(p_r - diff)
}

/// Thermal noise density at 290 K, dBm/Hz.
pub const THERMAL_NOISE_DBM_PER_HZ: f64 = -174.0;

/// Frame-averaged EVM limit for 16QAM, percent.
pub const EVM_LIMIT_16QAM_PERCENT: f64 = 12.5;

/// SNR-only EVM estimate; no distortion terms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvmEstimate {
    pub noise_floor_dbm: f64,
    pub snr_db: f64,
    pub evm_percent: f64,
    pub passes_16qam: bool,
}

/// Receiver noise floor `−174 + 10 log10(BW) + NF`, dBm.
pub fn noise_floor(bandwidth_hz: f64, noise_figure_db: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) || !bandwidth_hz.is_finite() {
        return Err(Error::domain(format!("bandwidth must be positive, got {bandwidth_hz}")));
    }
    Ok(THERMAL_NOISE_DBM_PER_HZ + linear_to_db(bandwidth_hz)? + noise_figure_db)
}

/// EVM from SNR alone.
pub fn evm_from_snr(snr_db: f64) -> f64 {
    100.0 / db_to_linear(snr_db).sqrt()
}

pub fn evm_estimate(p_r: PowerLevel, bandwidth_hz: f64, noise_figure_db: f64) -> Result<EvmEstimate> {
    let n = noise_floor(bandwidth_hz, noise_figure_db)?;
    let snr = p_r.dbm() - n;
    let evm = evm_from_snr(snr);
    Ok(EvmEstimate {
        noise_floor_dbm: n,
        snr_db: snr,
        evm_percent: evm,
        passes_16qam: evm <= EVM_LIMIT_16QAM_PERCENT,
    })
}
