use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linkbudget::{CorrectionEntry, CorrectionTable, LinkParams};
use crate::pattern::{Normalization, RadiationPattern};
use crate::units::{Frequency, GainDb, PowerLevel};

/// Gains below this are written as this value, dBi.
pub const GAIN_FLOOR_DBI: f64 = -300.0;

/// Parsed CSV body: (1-based line, fields) per record.
fn read_rows(text: &str, header: &[&str]) -> Result<Vec<(u64, csv::StringRecord)>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let got = rdr.headers().map_err(|e| Error::parse(1, e.to_string()))?.clone();
    if got.iter().collect::<Vec<_>>() != header {
        return Err(Error::parse(
            1,
            format!("expected header `{}`, found `{}`", header.join(","), got.iter().collect::<Vec<_>>().join(",")),
        ));
    }
    let mut rows = Vec::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            Error::parse(line, e.to_string())
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        rows.push((line, rec));
    }
    Ok(rows)
}

fn number(line: u64, rec: &csv::StringRecord, i: usize, what: &str) -> Result<f64> {
    let raw = rec.get(i).unwrap_or("");
    let v: f64 = raw
        .parse()
        .map_err(|_| Error::parse(line, format!("{what}: `{raw}` is not a number")))?;
    if !v.is_finite() {
        return Err(Error::parse(line, format!("{what}: non-finite value `{raw}`")));
    }
    Ok(v)
}

/// Rounds to 4 decimals for the diff-friendly tables.
fn round4(x: f64) -> f64 {
    (x * 1e4).round() / 1e4
}

const PATTERN_HEADER: [&str; 4] = ["theta_deg", "phi_deg", "gain_dBi", "phase_deg"];

/// Writes one row per sample, θ-major. `|F|²` is taken as gain.
pub fn write_pattern(p: &RadiationPattern) -> String {
    let mut s = PATTERN_HEADER.join(",");
    s.push('\n');
    for (it, &t) in p.theta_deg().iter().enumerate() {
        for (ip, &ph) in p.phi_deg().iter().enumerate() {
            let v = p.value(it, ip);
            let g = v.norm_sqr();
            let db = if g > 0.0 { (10.0 * g.log10()).max(GAIN_FLOOR_DBI) } else { GAIN_FLOOR_DBI };
            let _ = writeln!(s, "{},{},{},{}", t, ph, db, v.arg().to_degrees());
        }
    }
    s
}

/// Reads a pattern file for frequency `f`; gains are taken as dBi.
pub fn read_pattern(text: &str, f: Frequency) -> Result<RadiationPattern> {
    let rows = read_rows(text, &PATTERN_HEADER)?;
    let mut theta: Vec<f64> = Vec::new();
    let mut phi: Vec<f64> = Vec::new();
    let mut values = Vec::with_capacity(rows.len());
    let mut samples = Vec::with_capacity(rows.len());
    for (line, rec) in &rows {
        let t = number(*line, rec, 0, "theta_deg")?;
        let p = number(*line, rec, 1, "phi_deg")?;
        let g = number(*line, rec, 2, "gain_dBi")?;
        let ph = number(*line, rec, 3, "phase_deg")?;
        if theta.last() != Some(&t) {
            theta.push(t);
        }
        if theta.len() == 1 {
            phi.push(p);
        }
        samples.push((*line, t, p));
        values.push(Complex64::from_polar(10f64.powf(g / 20.0), ph.to_radians()));
    }
    if theta.is_empty() {
        return Err(Error::parse(1, "pattern file has no samples"));
    }
    // Every θ row must repeat the first row's φ list.
    for (i, (line, t, p)) in samples.iter().enumerate() {
        let (it, ip) = (i / phi.len(), i % phi.len());
        if theta.get(it) != Some(t) || phi[ip] != *p {
            return Err(Error::parse(*line, "samples are not on a theta-major (theta, phi) grid"));
        }
    }
    if samples.len() != theta.len() * phi.len() {
        return Err(Error::parse(samples.last().map_or(1, |s| s.0), "incomplete pattern grid"));
    }
    RadiationPattern::new(f, theta, phi, values, Normalization::DirectivityScaled)
}

const CORRECTION_HEADER: [&str; 3] = ["freq_ghz", "angle_deg", "p_diff_db"];

pub fn read_corrections(text: &str) -> Result<CorrectionTable> {
    let mut table = CorrectionTable::new();
    for (line, rec) in read_rows(text, &CORRECTION_HEADER)? {
        let entry = CorrectionEntry {
            freq_ghz: number(line, &rec, 0, "freq_ghz")?,
            angle_deg: number(line, &rec, 1, "angle_deg")?,
            p_diff_db: number(line, &rec, 2, "p_diff_db")?,
        };
        table.insert(entry).map_err(|e| Error::parse(line, e.to_string()))?;
    }
    Ok(table)
}

/// Offsets are rounded to 4 decimals.
pub fn write_corrections(table: &CorrectionTable) -> String {
    let mut s = CORRECTION_HEADER.join(",");
    s.push('\n');
    for e in table.entries() {
        let _ = writeln!(s, "{},{},{}", e.freq_ghz, e.angle_deg, round4(e.p_diff_db));
    }
    s
}

/// Signal used for a measurement.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Waveform {
    Qam16_400MHz,
    Qam64_100MHz,
    ContinuousWave,
}

impl Waveform {
    pub fn tag(self) -> &'static str {
        match self {
            Waveform::Qam16_400MHz => "modulated-16QAM-400MHz",
            Waveform::Qam64_100MHz => "modulated-64QAM-100MHz",
            Waveform::ContinuousWave => "continuous-wave",
        }
    }

    pub fn from_tag(tag: &str) -> Option<Self> {
        [Waveform::Qam16_400MHz, Waveform::Qam64_100MHz, Waveform::ContinuousWave]
            .into_iter()
            .find(|w| w.tag() == tag)
    }

    /// Occupied bandwidth for modulated signals, Hz.
    pub fn bandwidth_hz(self) -> Option<f64> {
        match self {
            Waveform::Qam16_400MHz => Some(400e6),
            Waveform::Qam64_100MHz => Some(100e6),
            Waveform::ContinuousWave => None,
        }
    }
}

/// One received-power reading.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub freq_ghz: f64,
    pub angle_deg: f64,
    pub waveform: Waveform,
    pub p_m: PowerLevel,
    pub evm_percent: Option<f64>,
}

const MEASUREMENT_HEADER: [&str; 5] = ["freq_ghz", "angle_deg", "waveform", "p_m_dbm", "evm_pct"];

pub fn read_measurements(text: &str) -> Result<Vec<MeasurementRecord>> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    for (line, rec) in read_rows(text, &MEASUREMENT_HEADER)? {
        let freq_ghz = number(line, &rec, 0, "freq_ghz")?;
        let angle_deg = number(line, &rec, 1, "angle_deg")?;
        let tag = rec.get(2).unwrap_or("");
        let waveform =
            Waveform::from_tag(tag).ok_or_else(|| Error::parse(line, format!("unknown waveform `{tag}`")))?;
        let p_m = PowerLevel(number(line, &rec, 3, "p_m_dbm")?);
        let evm_percent = match rec.get(4).unwrap_or("") {
            "" => None,
            _ => {
                let e = number(line, &rec, 4, "evm_pct")?;
                if !(e > 0.0 && e <= 100.0) {
                    return Err(Error::parse(line, format!("evm_pct must be in (0, 100], got {e}")));
                }
                Some(e)
            }
        };
        let key = ((freq_ghz * 1e6).round() as i64, (angle_deg * 1e6).round() as i64, waveform);
        if !seen.insert(key) {
            return Err(Error::parse(
                line,
                format!("duplicate measurement for {freq_ghz} GHz, {angle_deg} deg, {}", waveform.tag()),
            ));
        }
        out.push(MeasurementRecord {
            freq_ghz,
            angle_deg,
            waveform,
            p_m,
            evm_percent,
        });
    }
    Ok(out)
}

/// Powers are written at full precision.
pub fn write_measurements(records: &[MeasurementRecord]) -> String {
    let mut s = MEASUREMENT_HEADER.join(",");
    s.push('\n');
    for r in records {
        let evm = r.evm_percent.map(|e| e.to_string()).unwrap_or_default();
        let _ = writeln!(s, "{},{},{},{},{}", r.freq_ghz, r.angle_deg, r.waveform.tag(), r.p_m.dbm(), evm);
    }
    s
}

const LINK_HEADER: [&str; 3] = ["symbol", "value", "unit"];

/// (symbol, unit) rows of the parameter table, in file order.
const LINK_SYMBOLS: [(&str, &str); 7] = [
    ("P_t", "dBm"),
    ("L_t", "dB"),
    ("G_t", "dBi"),
    ("G_r", "dBi"),
    ("G_a", "dB"),
    ("R_1", "m"),
    ("R_2", "m"),
];

/// Reads the measurement parameter table; every symbol must appear once.
/// `L_t` is stored as a positive loss.
pub fn read_link_params(text: &str, f: Frequency) -> Result<LinkParams> {
    let mut vals = [None; LINK_SYMBOLS.len()];
    for (line, rec) in read_rows(text, &LINK_HEADER)? {
        let sym = rec.get(0).unwrap_or("");
        let unit = rec.get(2).unwrap_or("");
        let i = LINK_SYMBOLS
            .iter()
            .position(|(s, _)| *s == sym)
            .ok_or_else(|| Error::parse(line, format!("unknown symbol `{sym}`")))?;
        if LINK_SYMBOLS[i].1 != unit {
            return Err(Error::parse(line, format!("{sym} must be in {}, got `{unit}`", LINK_SYMBOLS[i].1)));
        }
        if vals[i].is_some() {
            return Err(Error::parse(line, format!("duplicate symbol `{sym}`")));
        }
        vals[i] = Some(number(line, &rec, 1, sym)?);
    }
    let get = |i: usize| {
        vals[i].ok_or_else(|| Error::parse(0, format!("missing symbol `{}`", LINK_SYMBOLS[i].0)))
    };
    let params = LinkParams {
        tx_power: PowerLevel(get(0)?),
        tx_cable_loss: GainDb(get(1)?),
        tx_gain: GainDb(get(2)?),
        rx_gain: GainDb(get(3)?),
        rx_chain_gain: GainDb(get(4)?),
        r1: get(5)?,
        r2: get(6)?,
        frequency: f,
    };
    params.validate()?;
    Ok(params)
}

pub fn write_link_params(p: &LinkParams) -> String {
    let vals = [
        p.tx_power.dbm(),
        p.tx_cable_loss.db(),
        p.tx_gain.db(),
        p.rx_gain.db(),
        p.rx_chain_gain.db(),
        p.r1,
        p.r2,
    ];
    let mut s = LINK_HEADER.join(",");
    s.push('\n');
    for ((sym, unit), v) in LINK_SYMBOLS.iter().zip(vals) {
        let _ = writeln!(s, "{sym},{v},{unit}");
    }
    s
}

/// One evaluated (frequency, angle, method) point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub freq_ghz: f64,
    pub angle_deg: f64,
    pub method: String,
    pub p_dbm: f64,
}

const RESULT_HEADER: [&str; 4] = ["freq_ghz", "angle_deg", "method", "p_dbm"];

/// Powers use fixed 4-decimal formatting.
pub fn write_results(rows: &[ResultRow]) -> String {
    let mut s = RESULT_HEADER.join(",");
    s.push('\n');
    for r in rows {
        let _ = writeln!(s, "{},{},{},{:.4}", r.freq_ghz, r.angle_deg, r.method, r.p_dbm);
    }
    s
}

pub fn read_results(text: &str) -> Result<Vec<ResultRow>> {
    read_rows(text, &RESULT_HEADER)?
        .into_iter()
        .map(|(line, rec)| {
            let method = rec.get(2).unwrap_or("");
            if method.is_empty() {
                return Err(Error::parse(line, "empty method"));
            }
            Ok(ResultRow {
                freq_ghz: number(line, &rec, 0, "freq_ghz")?,
                angle_deg: number(line, &rec, 1, "angle_deg")?,
                method: method.to_string(),
                p_dbm: number(line, &rec, 3, "p_dbm")?,
            })
        })
        .collect()
}
