use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::antenna::{ARNode, AntennaNode};
use super::paths::{path_reflection, reflect_paths, PropagationPath};
use super::scene::Scene;
use crate::error::Result;
use crate::linkbudget::{chain_terminal, milliwatts_to_level, LinkParams};
use crate::units::{Frequency, PowerLevel};

/// How multipath contributions combine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Summation {
    /// Sum of per-path powers.
    #[default]
    Incoherent,
    /// Power of the summed complex amplitudes, each carrying `exp(−jkL)`.
    Coherent,
}

/// Power transfer `P_r / P_t` of one hop.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HopTransfer {
    pub linear: f64,
    pub path_count: usize,
}

impl HopTransfer {
    /// No path connected the nodes; `linear` is zero.
    pub fn is_empty(&self) -> bool {
        self.path_count == 0
    }
}

/// Per-path transfer: Friis with pattern gains toward the departure and
/// arrival directions and the Fresnel products of the bounces.
fn path_terms(
    scene: &Scene,
    tx: &AntennaNode,
    rx: &AntennaNode,
    path: &PropagationPath,
    f: Frequency,
) -> (Complex64, f64) {
    let lambda = f.wavelength();
    let length = path.length();
    let spread = lambda / (4.0 * PI * length);
    let refl = path_reflection(scene, path, f, tx.polarization);
    let ft = tx.field(path.departure());
    let fr = rx.field(path.arrival());
    let phase = Complex64::from_polar(1.0, -f.wavenumber() * length);
    let amplitude = ft * fr * refl.amplitude * phase * spread;
    let power = ft.norm_sqr() * fr.norm_sqr() * refl.power * spread * spread;
    (amplitude, power)
}

/// Combines `paths` between `tx` and `rx` into a power transfer.
pub fn hop_transfer(
    scene: &Scene,
    tx: &AntennaNode,
    rx: &AntennaNode,
    paths: &[PropagationPath],
    f: Frequency,
    summation: Summation,
) -> HopTransfer {
    let terms = paths.iter().map(|p| path_terms(scene, tx, rx, p, f));
    let linear = match summation {
        Summation::Incoherent => terms.map(|(_, p)| p).sum(),
        Summation::Coherent => terms
            .map(|(a, _)| a)
            .fold(Complex64::new(0.0, 0.0), |acc, a| acc + a)
            .norm_sqr(),
    };
    HopTransfer {
        linear,
        path_count: paths.len(),
    }
}

/// Received power at `rx` for transmit power `tx_power`; `-inf` dBm when
/// `paths` is empty (see [`HopTransfer::is_empty`]).
pub fn hop_power(
    scene: &Scene,
    tx: &AntennaNode,
    rx: &AntennaNode,
    paths: &[PropagationPath],
    f: Frequency,
    summation: Summation,
    tx_power: PowerLevel,
) -> (PowerLevel, HopTransfer) {
    let t = hop_transfer(scene, tx, rx, paths, f, summation);
    (milliwatts_to_level(tx_power.milliwatts() * t.linear), t)
}

/// Outcome of a Tx → reflector → Rx simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ArLinkResult {
    /// Power at the Rx antenna port.
    pub antenna_power: PowerLevel,
    /// After cable loss and receive chain gain.
    pub received: PowerLevel,
    pub tx_hop: HopTransfer,
    pub rx_hop: HopTransfer,
}

/// Cascades Tx → AR and AR → Rx over every path pair.
///
/// Each pair contributes the Tx gain, the AR receive gain toward the arrival
/// of the first path, the AR transmit gain toward the departure of the
/// second, the Rx gain and both spreading factors, so the double sum
/// factorizes into the product of the two hop transfers. Direct Tx → Rx
/// leakage is excluded. Gains and distances in `params` are ignored; only
/// transmit power and the terminal chain are used.
pub fn simulate_ar_link(
    scene: &Scene,
    tx: &AntennaNode,
    ar: &ARNode,
    rx: &AntennaNode,
    params: &LinkParams,
    max_order: usize,
    summation: Summation,
) -> Result<ArLinkResult> {
    let f = params.frequency;
    ar.require_frequency(f)?;
    let first = reflect_paths(scene, tx.position(), ar.position(), max_order)?;
    let second = reflect_paths(scene, ar.position(), rx.position(), max_order)?;
    let tx_hop = hop_transfer(scene, tx, &ar.as_receiver(), &first, f, summation);
    let rx_hop = hop_transfer(scene, &ar.as_transmitter(), rx, &second, f, summation);
    let antenna_power = milliwatts_to_level(params.tx_power.milliwatts() * tx_hop.linear * rx_hop.linear);
    Ok(ArLinkResult {
        antenna_power,
        received: chain_terminal(antenna_power, params),
        tx_hop,
        rx_hop,
    })
}
