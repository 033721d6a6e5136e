//! Line-oriented text formats and the data shipped with the crate.
//!
//! Every format is UTF-8 CSV with a fixed header, or TOML/JSON for
//! configuration and scenes. Angles are degrees on disk. Parsers reject
//! NaN and infinite numbers and report the offending line.

mod config;
mod tables;

pub use config::{FrequencySweep, PatternSource, RunConfig, RunPaths, EvmSettings};
pub use tables::{
    read_corrections, read_link_params, read_measurements, read_pattern, read_results, write_corrections,
    write_link_params, write_measurements, write_pattern, write_results, MeasurementRecord, ResultRow, Waveform,
    GAIN_FLOOR_DBI,
};

/// Data files embedded at build time.
pub mod shipped {
    use crate::error::Result;
    use crate::linkbudget::{CorrectionTable, LinkParams};
    use crate::raytracer::Scene;
    use crate::units::Frequency;

    use super::{MeasurementRecord, RunConfig};

    /// Measurement parameters.
    pub const TABLE1: &str = include_str!("../../data/table1.csv");
    /// Theory-minus-measurement offsets, 16QAM, three frequencies × seven angles.
    pub const TABLE2_PDIFF: &str = include_str!("../../data/table2_pdiff.csv");
    /// LoS reference readings consistent with [`TABLE2_PDIFF`].
    pub const TABLE2_MEASUREMENTS: &str = include_str!("../../data/table2_measurements.csv");
    pub const AUDITORIUM_SCENE: &str = include_str!("../../data/auditorium.scene");
    pub const DEFAULT_CONFIG: &str = include_str!("../../data/default.toml");

    pub fn link_params(f: Frequency) -> Result<LinkParams> {
        super::read_link_params(TABLE1, f)
    }

    pub fn corrections() -> Result<CorrectionTable> {
        super::read_corrections(TABLE2_PDIFF)
    }

    pub fn measurements() -> Result<Vec<MeasurementRecord>> {
        super::read_measurements(TABLE2_MEASUREMENTS)
    }

    pub fn scene() -> Result<Scene> {
        Scene::from_json_str(AUDITORIUM_SCENE)
    }

    pub fn config() -> Result<RunConfig> {
        RunConfig::from_toml_str(DEFAULT_CONFIG)
    }
}
