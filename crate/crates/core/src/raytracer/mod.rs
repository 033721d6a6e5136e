//! Image-method ray tracing over planar-facet scenes.
//!
//! Scenes are convex polygons with a material each. Paths of up to three
//! specular bounces are enumerated exactly by mirroring the source across
//! facet planes. The reflector is embedded as a node with two patterns: it
//! receives from the Tx through one and re-radiates toward the Rx through
//! the other, so a Tx → AR → Rx link is the cascade of two hops.

mod antenna;
mod geometry;
mod link;
mod material;
mod paths;
mod scene;

pub use antenna::{ARNode, AntennaNode, HornPattern};
pub use geometry::{Frame, Vec3};
pub use link::{hop_power, hop_transfer, simulate_ar_link, ArLinkResult, HopTransfer, Summation};
pub use material::{fresnel_coefficient, Material, Polarization};
pub use paths::{
    path_reflection, reflect_paths, validate_path, Bounce, PathReflection, PropagationPath, MAX_ORDER,
};
pub use scene::{
    load_scene, los_clear, Facet, FacetSpec, Layout, Scene, SceneSpec, ENDPOINT_TOLERANCE, PLANE_TOLERANCE,
};

#[cfg(test)]
mod tests;
