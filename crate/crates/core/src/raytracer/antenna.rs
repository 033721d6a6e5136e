use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;

use super::geometry::{Frame, Vec3};
use crate::error::{Error, Result};
use crate::pattern::{ElementPattern, FarField, PanelScatterer, PanelSpec, PatternGrid, RadiationPattern};
use crate::units::{db_to_linear, Frequency};

/// Rotationally symmetric horn: Gaussian main lobe on a flat floor.
///
/// `G(α) = G₀ − min(12 (α/HPBW)², floor)` dBi at angle α from boresight.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HornPattern {
    pub peak_dbi: f64,
    pub hpbw_deg: f64,
    pub floor_db: f64,
}

impl HornPattern {
    /// The 18 dBi, 22° measurement horn.
    pub const MEASUREMENT: HornPattern = HornPattern {
        peak_dbi: 18.0,
        hpbw_deg: 22.0,
        floor_db: 30.0,
    };

    pub fn gain_dbi(&self, off_boresight_deg: f64) -> f64 {
        let x = off_boresight_deg / self.hpbw_deg;
        self.peak_dbi - (12.0 * x * x).min(self.floor_db)
    }
}

impl FarField for HornPattern {
    fn field(&self, local_dir: [f64; 3]) -> Complex64 {
        let norm = (local_dir[0].powi(2) + local_dir[1].powi(2) + local_dir[2].powi(2)).sqrt();
        let alpha = (local_dir[2] / norm).clamp(-1.0, 1.0).acos().to_degrees();
        Complex64::new(db_to_linear(self.gain_dbi(alpha)).sqrt(), 0.0)
    }
}

/// A terminal antenna placed in the scene.
#[derive(Clone)]
pub struct AntennaNode {
    pub frame: Frame,
    pub pattern: Arc<dyn FarField>,
    /// Electric field orientation at launch; vertical for every node here.
    pub polarization: Vec3,
}

impl AntennaNode {
    pub fn new(frame: Frame, pattern: Arc<dyn FarField>) -> Self {
        AntennaNode {
            frame,
            pattern,
            polarization: Vec3::Z,
        }
    }

    /// Measurement horn at `position` with boresight toward `target`.
    pub fn horn_aimed(position: Vec3, target: Vec3) -> Result<Self> {
        Ok(AntennaNode::new(
            Frame::aimed(position, target)?,
            Arc::new(HornPattern::MEASUREMENT),
        ))
    }

    pub fn position(&self) -> Vec3 {
        self.frame.origin
    }

    /// Complex field toward world direction `dir`.
    pub fn field(&self, dir: Vec3) -> Complex64 {
        self.pattern.field(self.frame.to_local(dir))
    }

    pub fn gain_linear(&self, dir: Vec3) -> f64 {
        self.field(dir).norm_sqr()
    }
}

impl fmt::Debug for AntennaNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("AntennaNode")
            .field("frame", &self.frame)
            .field("polarization", &self.polarization)
            .finish_non_exhaustive()
    }
}

/// Anomalous reflector as a re-radiating node.
///
/// It receives through `rx_pattern`, the response toward sources, and
/// re-radiates through `tx_pattern`. The frame has `z` along the surface
/// normal and `x` along the phase gradient.
#[derive(Clone)]
pub struct ARNode {
    pub frame: Frame,
    pub rx_pattern: Arc<dyn FarField>,
    pub tx_pattern: Arc<dyn FarField>,
    frequency: Frequency,
}

impl ARNode {
    /// Both patterns must have been produced for `frequency`.
    pub fn new(
        frame: Frame,
        rx_pattern: Arc<dyn FarField>,
        tx_pattern: Arc<dyn FarField>,
        frequency: Frequency,
    ) -> Self {
        ARNode {
            frame,
            rx_pattern,
            tx_pattern,
            frequency,
        }
    }

    /// Node from two sampled pattern files, which must agree in frequency
    /// and normalization.
    pub fn from_sampled(frame: Frame, rx: Arc<RadiationPattern>, tx: Arc<RadiationPattern>) -> Result<Self> {
        if !same_frequency(rx.frequency(), tx.frequency()) {
            return Err(Error::Lookup(format!(
                "reflector patterns disagree in frequency: {} vs {}",
                rx.frequency(),
                tx.frequency()
            )));
        }
        if rx.normalization() != tx.normalization() {
            return Err(Error::Lookup("reflector patterns disagree in normalization".into()));
        }
        let f = rx.frequency();
        Ok(ARNode::new(frame, rx, tx, f))
    }

    /// Node synthesized from panel geometry, both patterns scaled to
    /// directivity on `grid`.
    pub fn synthesized(
        frame: Frame,
        panel: &PanelSpec,
        element: ElementPattern,
        frequency: Frequency,
        grid: &PatternGrid,
    ) -> Result<Self> {
        let rx = PanelScatterer::design_reciprocal(panel, element.clone(), frequency)?.directivity_scaled(grid)?;
        let tx = PanelScatterer::design(panel, element, frequency)?.directivity_scaled(grid)?;
        Ok(ARNode::new(frame, Arc::new(rx), Arc::new(tx), frequency))
    }

    pub fn position(&self) -> Vec3 {
        self.frame.origin
    }

    pub fn frequency(&self) -> Frequency {
        self.frequency
    }

    /// Fails unless the patterns were produced for `f`.
    pub fn require_frequency(&self, f: Frequency) -> Result<()> {
        if same_frequency(self.frequency, f) {
            Ok(())
        } else {
            Err(Error::Lookup(format!(
                "no reflector pattern at {f}; patterns are for {}",
                self.frequency
            )))
        }
    }

    /// Receiving side as an antenna node.
    pub fn as_receiver(&self) -> AntennaNode {
        AntennaNode::new(self.frame, Arc::clone(&self.rx_pattern))
    }

    /// Re-radiating side as an antenna node.
    pub fn as_transmitter(&self) -> AntennaNode {
        AntennaNode::new(self.frame, Arc::clone(&self.tx_pattern))
    }
}

impl fmt::Debug for ARNode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ARNode")
            .field("frame", &self.frame)
            .field("frequency", &self.frequency)
            .finish_non_exhaustive()
    }
}

/// Frequencies agree to 1 kHz.
fn same_frequency(a: Frequency, b: Frequency) -> bool {
    (a.hz() - b.hz()).abs() <= 1e3
}
