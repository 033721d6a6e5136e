//! Supercell and panel geometry, grating orders and the far-field boundary.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{Angle, Frequency};

/// Degrees of freedom of the periodic supercell that sets the anomalous
/// reflection direction.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SupercellSpec {
    pub n_elements: usize,
    /// Supercell period along x, metres.
    pub period: f64,
    /// Unit-cell pitch along x and y, metres.
    pub element_period: f64,
    pub design_frequency: Frequency,
    pub design_angle: Angle,
    /// Phase quantization; `None` keeps continuous phases.
    pub quantization_bits: Option<u32>,
}

/// Harmonic order that lands on the design angle: `d = 4λ/|sin θ|`.
pub const DESIGN_ORDER: i32 = 4;

/// Sizes the supercell so that the fourth Floquet order of a normally
/// incident wave leaves at `design_angle`.
pub fn design_supercell(
    design_angle: Angle,
    f0: Frequency,
    n_elements: usize,
    bits: Option<u32>,
) -> Result<SupercellSpec> {
    let s = design_angle.sin().abs();
    if !(s > 1e-12) || !design_angle.degrees().is_finite() {
        return Err(Error::domain(format!(
            "design angle {design_angle} gives a degenerate supercell period"
        )));
    }
    if n_elements < 2 {
        return Err(Error::domain("a supercell needs at least two elements"));
    }
    let period = DESIGN_ORDER as f64 * f0.wavelength() / s;
    Ok(SupercellSpec {
        n_elements,
        period,
        element_period: period / n_elements as f64,
        design_frequency: f0,
        design_angle,
        quantization_bits: bits,
    })
}

/// A rectangular grid of unit cells, possibly built from identical tiles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PanelSpec {
    pub supercell: SupercellSpec,
    pub nx: usize,
    pub ny: usize,
    /// Cell counts of the repeated tile; equal to `nx`, `ny` for a single piece.
    pub tile_nx: usize,
    pub tile_ny: usize,
}

impl PanelSpec {
    pub fn new(supercell: SupercellSpec, nx: usize, ny: usize) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::domain("panel needs at least one cell per side"));
        }
        if nx % supercell.n_elements != 0 {
            return Err(Error::domain(format!(
                "nx = {nx} is not a whole number of {}-element supercells",
                supercell.n_elements
            )));
        }
        Ok(PanelSpec {
            supercell,
            nx,
            ny,
            tile_nx: nx,
            tile_ny: ny,
        })
    }

    /// The standard 16-element, 3-bit, 65° / 26 GHz reflector of `n`×`n` cells.
    pub fn reference(n: usize) -> Result<Self> {
        let cell = design_supercell(
            Angle::from_degrees(65.0),
            Frequency::from_ghz(26.0)?,
            16,
            Some(3),
        )?;
        if n % 48 == 0 && n > 48 {
            tile_panel(&PanelSpec::new(cell, 48, 48)?, n / 48, n / 48)
        } else {
            PanelSpec::new(cell, n, n)
        }
    }

    pub fn dx(&self) -> f64 {
        self.supercell.element_period
    }

    pub fn dy(&self) -> f64 {
        self.supercell.element_period
    }

    pub fn side_x(&self) -> f64 {
        self.nx as f64 * self.dx()
    }

    pub fn side_y(&self) -> f64 {
        self.ny as f64 * self.dy()
    }

    pub fn area(&self) -> f64 {
        self.side_x() * self.side_y()
    }

    pub fn is_tiled(&self) -> bool {
        self.tile_nx != self.nx || self.tile_ny != self.ny
    }

    /// Tile counts along x and y.
    pub fn tiles(&self) -> (usize, usize) {
        (self.nx / self.tile_nx, self.ny / self.tile_ny)
    }
}

/// Places `mx` × `my` copies of `panel` edge to edge with no seam.
pub fn tile_panel(panel: &PanelSpec, mx: usize, my: usize) -> Result<PanelSpec> {
    if mx == 0 || my == 0 {
        return Err(Error::domain("tile counts must be at least one"));
    }
    Ok(PanelSpec {
        supercell: panel.supercell,
        nx: panel.nx * mx,
        ny: panel.ny * my,
        tile_nx: panel.tile_nx,
        tile_ny: panel.tile_ny,
    })
}

/// A propagating Floquet order and its direction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GratingOrder {
    pub order: i32,
    pub angle: Angle,
}

/// Every propagating diffraction order of a grating with period `d` lit from
/// `theta_i`: `sin θ_n = sin θ_i + nλ/d`, `|sin θ_n| ≤ 1`.
pub fn grating_angles(theta_i: Angle, d: f64, f: Frequency) -> Result<Vec<GratingOrder>> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::domain(format!("grating period must be positive, got {d}")));
    }
    let s = theta_i.sin();
    let ratio = f.wavelength() / d;
    let lo = ((-1.0 - s) / ratio).ceil() as i32;
    let hi = ((1.0 - s) / ratio).floor() as i32;
    let orders = (lo..=hi)
        .filter_map(|n| {
            let sn = s + n as f64 * ratio;
            (sn.abs() <= 1.0).then(|| GratingOrder {
                order: n,
                angle: Angle::from_radians(sn.asin()),
            })
        })
        .collect();
    Ok(orders)
}

/// Direction of order `n`, if it propagates.
pub fn grating_order(theta_i: Angle, d: f64, f: Frequency, n: i32) -> Result<Option<Angle>> {
    Ok(grating_angles(theta_i, d, f)?
        .into_iter()
        .find(|o| o.order == n)
        .map(|o| o.angle))
}

/// Fraunhofer distance `2D²/λ` for an aperture of extent `d`, taken as the
/// panel side length.
pub fn fraunhofer_distance(aperture_extent: f64, f: Frequency) -> Result<f64> {
    if !(aperture_extent > 0.0) || !aperture_extent.is_finite() {
        return Err(Error::domain(format!(
            "aperture extent must be positive, got {aperture_extent}"
        )));
    }
    Ok(2.0 * aperture_extent * aperture_extent / f.wavelength())
}
