//! Simulation of radio links assisted by passive anomalous reflectors.
//!
//! The crate synthesizes finite reflector patterns from supercell geometry
//! ([`pattern`]), evaluates Tx → reflector → Rx link budgets ([`linkbudget`]),
//! traces specular multipath through planar scenes with the reflector as a
//! two-pattern re-radiating node ([`raytracer`]), reads and writes the text
//! formats used by experiments ([`io`]) and runs the angular, frequency and
//! reference sweeps ([`experiment`]).

pub mod error;
pub mod experiment;
pub mod io;
pub mod linkbudget;
pub mod pattern;
pub mod raytracer;
pub mod units;

pub use error::{Error, ErrorClass, Result};
pub use units::{Angle, Frequency, GainDb, PowerLevel};
