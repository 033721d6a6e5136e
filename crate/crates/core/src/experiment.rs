//! Angular, frequency and LoS-reference sweeps over the measurement layout.
//!
//! The Tx sits on the reflector normal and the Rx on an arc around it; both
//! horns are aimed at the reflector centre. For every (frequency, angle)
//! the closed-form methods and the ray tracer are evaluated from the same
//! reflector patterns, so their columns are directly comparable.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::io::{self, MeasurementRecord, ResultRow, RunConfig, Waveform};
use crate::linkbudget::{
    bistatic_sigma_ideal, chain_terminal, evm_estimate, los_reference, power_difference, received_power_method1,
    received_power_method2, BistaticGeometry, CorrectionEntry, CorrectionTable, EvmEstimate, LinkParams,
};
use crate::pattern::{ElementPattern, PanelSpec, PatternGrid};
use crate::raytracer::{simulate_ar_link, ARNode, AntennaNode, Frame, Layout, Scene};
use crate::units::{Angle, Frequency, GainDb, PowerLevel};

/// Environment variable capping worker threads.
pub const THREADS_ENV: &str = "ARS_TRACE_THREADS";

/// One method's value at a sweep point.
#[derive(Debug, Clone, PartialEq)]
pub struct MethodValue {
    pub method: String,
    pub p_dbm: f64,
    pub evm: Option<EvmEstimate>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub freq_ghz: f64,
    pub angle_deg: f64,
    pub values: Vec<MethodValue>,
}

impl PointResult {
    pub fn get(&self, method: &str) -> Option<f64> {
        self.values.iter().find(|v| v.method == method).map(|v| v.p_dbm)
    }
}

/// A named set of sweep points in configuration order.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub name: String,
    pub points: Vec<PointResult>,
}

impl ExperimentResult {
    pub fn rows(&self) -> Vec<ResultRow> {
        self.points
            .iter()
            .flat_map(|p| {
                p.values.iter().map(|v| ResultRow {
                    freq_ghz: p.freq_ghz,
                    angle_deg: p.angle_deg,
                    method: v.method.clone(),
                    p_dbm: v.p_dbm,
                })
            })
            .collect()
    }

    /// Method names in first-seen order.
    pub fn methods(&self) -> Vec<String> {
        method_order(self.points.iter().flat_map(|p| p.values.iter().map(|v| v.method.as_str())))
    }
}

fn method_order<'a>(names: impl Iterator<Item = &'a str>) -> Vec<String> {
    let mut out: Vec<String> = Vec::new();
    for n in names {
        if !out.iter().any(|m| m == n) {
            out.push(n.to_string());
        }
    }
    out
}

/// LoS reference outcome: per-point theory and measurement plus the
/// correction table built from them.
#[derive(Debug, Clone, PartialEq)]
pub struct LosReference {
    pub result: ExperimentResult,
    pub table: CorrectionTable,
}

/// Loaded inputs for a run.
#[derive(Debug, Clone)]
pub struct Experiment {
    pub config: RunConfig,
    pub scene: Scene,
    pub layout: Layout,
    pub link: LinkParams,
    pub corrections: Option<CorrectionTable>,
    pub measurements: Vec<MeasurementRecord>,
    pub panel: PanelSpec,
    pattern_files: BTreeMap<i64, (PathBuf, PathBuf)>,
}

fn freq_key(ghz: f64) -> i64 {
    (ghz * 1e6).round() as i64
}

fn read(base: &Path, p: &Path) -> Result<String> {
    Ok(std::fs::read_to_string(base.join(p))?)
}

impl Experiment {
    /// Resolves the configured files relative to `base_dir`, falling back
    /// to shipped data.
    pub fn from_config(config: RunConfig, base_dir: &Path) -> Result<Self> {
        config.validate()?;
        let paths = &config.paths;
        let scene = match &paths.scene {
            Some(p) => Scene::from_json_str(&read(base_dir, p)?)?,
            None => io::shipped::scene()?,
        };
        let layout = *scene
            .layout()
            .ok_or_else(|| Error::Config("scene has no layout section".into()))?;
        let placeholder = Frequency::from_ghz(config.frequencies_ghz[0])?;
        let link = match &paths.link_params {
            Some(p) => io::read_link_params(&read(base_dir, p)?, placeholder)?,
            None => io::shipped::link_params(placeholder)?,
        };
        let corrections = match &paths.corrections {
            Some(p) => Some(io::read_corrections(&read(base_dir, p)?)?),
            None if config.corrected => Some(io::shipped::corrections()?),
            None => None,
        };
        let measurements = match &paths.measurements {
            Some(p) => io::read_measurements(&read(base_dir, p)?)?,
            None => io::shipped::measurements()?,
        };
        let mut pattern_files = BTreeMap::new();
        for src in &paths.patterns {
            if pattern_files
                .insert(freq_key(src.freq_ghz), (base_dir.join(&src.rx), base_dir.join(&src.tx)))
                .is_some()
            {
                return Err(Error::Config(format!("two pattern sources for {} GHz", src.freq_ghz)));
            }
        }
        Ok(Experiment {
            panel: PanelSpec::reference(config.panel)?,
            config,
            scene,
            layout,
            link,
            corrections,
            measurements,
            pattern_files,
        })
    }

    fn params(&self, f: Frequency) -> LinkParams {
        LinkParams { frequency: f, ..self.link }
    }

    fn ar_frame(&self) -> Result<Frame> {
        Frame::new(self.layout.ar_center, self.layout.ar_normal, self.layout.ar_tangent)
    }

    /// Reflector node at `f`, from pattern files when configured, else
    /// synthesized from the panel.
    pub fn ar_node(&self, f: Frequency) -> Result<ARNode> {
        let frame = self.ar_frame()?;
        match self.pattern_files.get(&freq_key(f.ghz())) {
            Some((rx, tx)) => {
                let rx = io::read_pattern(&std::fs::read_to_string(rx)?, f)?;
                let tx = io::read_pattern(&std::fs::read_to_string(tx)?, f)?;
                ARNode::from_sampled(frame, Arc::new(rx), Arc::new(tx))
            }
            None if !self.pattern_files.is_empty() => Err(Error::Lookup(format!(
                "pattern files are configured but none is for {f}"
            ))),
            None => ARNode::synthesized(frame, &self.panel, ElementPattern::SurfaceCurrent, f, &PatternGrid::FULL),
        }
    }

    fn ar_nodes(&self, freqs: &[f64]) -> Result<BTreeMap<i64, ARNode>> {
        let mut unique: Vec<f64> = Vec::new();
        for &f in freqs {
            if !unique.iter().any(|u| freq_key(*u) == freq_key(f)) {
                unique.push(f);
            }
        }
        let nodes: Vec<(i64, ARNode)> = unique
            .par_iter()
            .map(|&f| Ok((freq_key(f), self.ar_node(Frequency::from_ghz(f)?)?)))
            .collect::<Result<_>>()?;
        Ok(nodes.into_iter().collect())
    }

    fn method_names(&self) -> Vec<String> {
        let mut m = vec!["method1".to_string(), "method2".into(), "rt_order0".into()];
        if self.config.max_order > 0 {
            m.push(format!("rt_order{}", self.config.max_order));
        }
        m
    }

    /// Closed-form `P_r` by method 2 with the node's pattern gains.
    pub fn method2(&self, ar: &ARNode, f: Frequency, angle: Angle) -> Result<PowerLevel> {
        let (g_rx, g_tx) = self.ar_gains(ar, angle)?;
        let p = self.params(f);
        Ok(chain_terminal(received_power_method2(&p, g_rx, g_tx)?, &p))
    }

    fn ar_gains(&self, ar: &ARNode, angle: Angle) -> Result<(GainDb, GainDb)> {
        let c = self.layout.ar_center;
        let to_tx = (self.layout.tx_position() - c).normalized().expect("layout distances are positive");
        let to_rx = (self.layout.rx_position(angle) - c).normalized().expect("layout distances are positive");
        let g = |v: f64| {
            GainDb::from_linear(v).map_err(|_| Error::Numerical(format!("reflector has no gain toward {angle}")))
        };
        Ok((g(ar.as_receiver().gain_linear(to_tx))?, g(ar.as_transmitter().gain_linear(to_rx))?))
    }

    fn evaluate_point(&self, ar: &ARNode, f_ghz: f64, angle_deg: f64) -> Result<PointResult> {
        let f = Frequency::from_ghz(f_ghz)?;
        let angle = Angle::from_degrees(angle_deg);
        let p = self.params(f);
        let c = self.layout.ar_center;
        let tx_pos = self.layout.tx_position();
        let rx_pos = self.layout.rx_position(angle);

        let theta_i = Angle::from_radians(
            (tx_pos - c).normalized().expect("positive").dot(self.layout.ar_normal).clamp(-1.0, 1.0).acos(),
        );
        let geom = BistaticGeometry::new(theta_i, angle, self.panel.area())?;
        let m1 = chain_terminal(received_power_method1(&p, bistatic_sigma_ideal(&geom, f))?, &p);
        let m2 = self.method2(ar, f, angle)?;

        let tx = AntennaNode::horn_aimed(tx_pos, c)?;
        let rx = AntennaNode::horn_aimed(rx_pos, c)?;
        let mut powers = vec![m1.dbm(), m2.dbm()];
        let mut orders = vec![0];
        if self.config.max_order > 0 {
            orders.push(self.config.max_order);
        }
        for order in orders {
            let sim = simulate_ar_link(&self.scene, &tx, ar, &rx, &p, order, self.config.summation)?;
            if sim.tx_hop.is_empty() || sim.rx_hop.is_empty() {
                return Err(Error::Numerical(format!(
                    "no propagation path at {angle_deg} deg, {f_ghz} GHz (order {order})"
                )));
            }
            powers.push(sim.received.dbm());
        }
        let mut names = self.method_names();
        if self.config.corrected {
            let table = self.corrections.as_ref().ok_or_else(|| Error::Config("no correction table".into()))?;
            let diff = table.get(f, angle).ok_or_else(|| {
                Error::Lookup(format!("no correction for {f_ghz} GHz at {angle_deg} deg"))
            })?;
            let corrected: Vec<f64> = powers.iter().map(|v| v - diff.db()).collect();
            names.extend(self.method_names().iter().map(|m| format!("{m}_corrected")));
            powers.extend(corrected);
        }
        let values = names
            .into_iter()
            .zip(powers)
            .map(|(method, p_dbm)| {
                let evm = match &self.config.evm {
                    Some(s) => Some(evm_estimate(PowerLevel(p_dbm), s.bandwidth_hz, s.noise_figure_db)?),
                    None => None,
                };
                Ok(MethodValue { method, p_dbm, evm })
            })
            .collect::<Result<_>>()?;
        Ok(PointResult {
            freq_ghz: f_ghz,
            angle_deg,
            values,
        })
    }

    fn evaluate(&self, name: &str, grid: Vec<(f64, f64)>) -> Result<ExperimentResult> {
        let freqs: Vec<f64> = grid.iter().map(|g| g.0).collect();
        let nodes = self.ar_nodes(&freqs)?;
        let points = grid
            .par_iter()
            .map(|&(f, a)| self.evaluate_point(&nodes[&freq_key(f)], f, a))
            .collect::<Result<Vec<_>>>()?;
        Ok(ExperimentResult {
            name: name.to_string(),
            points,
        })
    }

    /// Every configured angle at every configured frequency, frequency-major.
    pub fn run_angular_sweep(&self) -> Result<ExperimentResult> {
        let grid = self
            .config
            .frequencies_ghz
            .iter()
            .flat_map(|&f| self.config.angles_deg.iter().map(move |&a| (f, a)))
            .collect();
        with_thread_cap(|| self.evaluate("angular_sweep", grid))
    }

    /// The continuous-wave sweep at its fixed angles, angle-major.
    pub fn run_frequency_sweep(&self) -> Result<ExperimentResult> {
        let sweep = &self.config.frequency_sweep;
        let freqs = sweep.frequencies_ghz();
        let grid = sweep
            .angles_deg
            .iter()
            .flat_map(|&a| freqs.iter().map(move |&f| (f, a)))
            .collect();
        with_thread_cap(|| self.evaluate("frequency_sweep", grid))
    }

    /// Direct Tx–Rx distance for the Rx at `angle`.
    pub fn los_distance(&self, angle: Angle) -> f64 {
        self.layout.tx_position().distance(self.layout.rx_position(angle))
    }

    /// Friis reference against the measurements of one waveform, and the
    /// correction table `P_theory − P_m` built from it.
    pub fn run_los_reference(&self, waveform: Waveform) -> Result<LosReference> {
        let mut table = CorrectionTable::new();
        let mut points = Vec::new();
        for m in self.measurements.iter().filter(|m| m.waveform == waveform) {
            let f = Frequency::from_ghz(m.freq_ghz)?;
            let r3 = self.los_distance(Angle::from_degrees(m.angle_deg));
            let theory = los_reference(&self.params(f), r3)?;
            let diff = power_difference(theory, m.p_m);
            table.insert(CorrectionEntry {
                freq_ghz: m.freq_ghz,
                angle_deg: m.angle_deg,
                p_diff_db: diff.db(),
            })?;
            let value = |method: &str, p: f64| MethodValue {
                method: method.into(),
                p_dbm: p,
                evm: None,
            };
            points.push(PointResult {
                freq_ghz: m.freq_ghz,
                angle_deg: m.angle_deg,
                values: vec![value("p_theory", theory.dbm()), value("p_m", m.p_m.dbm())],
            });
        }
        if points.is_empty() {
            return Err(Error::Lookup(format!("no {} measurements", waveform.tag())));
        }
        Ok(LosReference {
            result: ExperimentResult {
                name: "los_reference".into(),
                points,
            },
            table,
        })
    }

    /// Method-2 power with the Rx tracking the beam: the best over `angles`
    /// at each frequency in `freqs`.
    pub fn tracked_peak(&self, freqs: &[f64], angles: &[f64]) -> Result<Vec<(f64, f64, f64)>> {
        let nodes = with_thread_cap(|| self.ar_nodes(freqs))?;
        freqs
            .iter()
            .map(|&fg| {
                let f = Frequency::from_ghz(fg)?;
                let ar = &nodes[&freq_key(fg)];
                let mut best = (f64::NAN, f64::NEG_INFINITY);
                for &a in angles {
                    let p = self.method2(ar, f, Angle::from_degrees(a))?.dbm();
                    if p > best.1 {
                        best = (a, p);
                    }
                }
                Ok((fg, best.0, best.1))
            })
            .collect()
    }
}

/// Span of the contiguous run of sweep points around the strongest one
/// whose power stays within `drop_db` of it, GHz.
pub fn usable_band(freq_ghz: &[f64], power_db: &[f64], drop_db: f64) -> Result<f64> {
    if freq_ghz.len() != power_db.len() || freq_ghz.is_empty() {
        return Err(Error::domain("usable band needs matching, non-empty samples"));
    }
    let (imax, &pmax) = power_db
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty");
    let level = pmax - drop_db;
    let mut lo = imax;
    while lo > 0 && power_db[lo - 1] >= level {
        lo -= 1;
    }
    let mut hi = imax;
    while hi + 1 < power_db.len() && power_db[hi + 1] >= level {
        hi += 1;
    }
    Ok(freq_ghz[hi] - freq_ghz[lo])
}

/// Runs `op` on a pool capped by [`THREADS_ENV`] when it is set.
pub fn with_thread_cap<R: Send>(op: impl FnOnce() -> Result<R> + Send) -> Result<R> {
    match std::env::var(THREADS_ENV) {
        Err(_) => op(),
        Ok(v) => {
            let n: usize = v
                .trim()
                .parse()
                .ok()
                .filter(|n| *n > 0)
                .ok_or_else(|| Error::Config(format!("{THREADS_ENV} must be a positive integer, got `{v}`")))?;
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::Config(e.to_string()))?;
            pool.install(op)
        }
    }
}

/// Writes `<name>.csv` in the results schema and `<name>.dat` for gnuplot
/// (one index block per method: freq, angle, power). When EVM estimates
/// are present, `<name>_evm.csv` is written as well.
pub fn emit_report(result: &ExperimentResult, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let mut written = emit_rows(&result.name, &result.rows(), out_dir)?;
    let evm: Vec<String> = result
        .points
        .iter()
        .flat_map(|p| {
            p.values.iter().filter_map(move |v| {
                v.evm.map(|e| {
                    format!("{},{},{},{:.4},{}", p.freq_ghz, p.angle_deg, v.method, e.evm_percent, e.passes_16qam)
                })
            })
        })
        .collect();
    if !evm.is_empty() {
        let path = out_dir.join(format!("{}_evm.csv", result.name));
        let mut s = String::from("freq_ghz,angle_deg,method,evm_pct,pass_16qam\n");
        for line in evm {
            s.push_str(&line);
            s.push('\n');
        }
        std::fs::write(&path, s)?;
        written.push(path);
    }
    Ok(written)
}

/// Writes `<name>.csv` and `<name>.dat` for bare rows; nothing is created
/// when `rows` is empty.
pub fn emit_rows(name: &str, rows: &[ResultRow], out_dir: &Path) -> Result<Vec<PathBuf>> {
    if rows.is_empty() {
        return Err(Error::Lookup(format!("{name}: empty result set")));
    }
    std::fs::create_dir_all(out_dir)?;
    let csv = out_dir.join(format!("{name}.csv"));
    std::fs::write(&csv, io::write_results(rows))?;
    let dat = out_dir.join(format!("{name}.dat"));
    std::fs::write(&dat, gnuplot_blocks(rows))?;
    Ok(vec![csv, dat])
}

/// Gnuplot data with one block per method, separated by two blank lines.
pub fn gnuplot_blocks(rows: &[ResultRow]) -> String {
    let mut s = String::new();
    for (i, m) in method_order(rows.iter().map(|r| r.method.as_str())).iter().enumerate() {
        if i > 0 {
            s.push_str("\n\n");
        }
        let _ = writeln!(s, "# method {m}\n# freq_ghz angle_deg p_dbm");
        for r in rows.iter().filter(|r| &r.method == m) {
            let _ = writeln!(s, "{} {} {:.4}", r.freq_ghz, r.angle_deg, r.p_dbm);
        }
    }
    s
}

/// `p − P_diff` for every row, with `_corrected` appended to the method.
pub fn correct_rows(rows: &[ResultRow], table: &CorrectionTable) -> Result<Vec<ResultRow>> {
    rows.iter()
        .map(|r| {
            let f = Frequency::from_ghz(r.freq_ghz)?;
            let pc = crate::linkbudget::apply_correction(PowerLevel(r.p_dbm), table, f, Angle::from_degrees(r.angle_deg))?;
            Ok(ResultRow {
                method: format!("{}_corrected", r.method),
                p_dbm: pc.dbm(),
                ..r.clone()
            })
        })
        .collect()
}

/// Angle of the strongest row per (method, frequency), in first-seen order.
pub fn peak_angles(rows: &[ResultRow]) -> Vec<(String, f64, f64, f64)> {
    let mut out: Vec<(String, f64, f64, f64)> = Vec::new();
    for r in rows {
        match out.iter_mut().find(|o| o.0 == r.method && o.1 == r.freq_ghz) {
            Some(o) if r.p_dbm > o.3 => {
                o.2 = r.angle_deg;
                o.3 = r.p_dbm;
            }
            Some(_) => {}
            None => out.push((r.method.clone(), r.freq_ghz, r.angle_deg, r.p_dbm)),
        }
    }
    out
}

