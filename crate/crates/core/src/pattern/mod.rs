//! Finite anomalous-reflector scattering patterns from supercell geometry.
//!
//! A panel is a grid of cells whose reflection phases follow a linear
//! gradient along x. Its far field is an element pattern times the array
//! factor; directivity, peak direction and beam width are extracted from
//! sampled patterns.

mod array;
mod metrics;
mod panel;
mod sampled;

pub use array::{
    array_factor, continuous_phase_profile, field_at, peak_array_factor, phase_profile,
    quantize_phase, synthesize_pattern, ArrayFactor, ElementPattern, PanelScatterer, PhaseProfile,
};
pub use metrics::{
    directivity, gain_from_directivity, half_power_width, hpbw, peak_angle, total_power,
    Directivity,
};
pub use panel::{
    design_supercell, fraunhofer_distance, grating_angles, grating_order, tile_panel,
    GratingOrder, PanelSpec, SupercellSpec, DESIGN_ORDER,
};
pub use sampled::{
    angles_from_direction, direction_from_angles, FarField, Normalization, PatternGrid,
    RadiationPattern,
};
