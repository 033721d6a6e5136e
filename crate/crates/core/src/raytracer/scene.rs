use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::Vec3;
use super::material::Material;
use crate::error::{Error, Result};
use crate::units::Angle;

/// Tolerance for coplanarity and for facet plane membership, metres.
pub const PLANE_TOLERANCE: f64 = 1e-6;
/// Intersections closer than this to a segment endpoint are ignored, metres.
pub const ENDPOINT_TOLERANCE: f64 = 1e-6;
/// Slack for point-in-polygon tests, metres.
const EDGE_TOLERANCE: f64 = 1e-9;

/// Facet as written in a scene file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FacetSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub material: String,
    pub vertices: Vec<Vec3>,
}

/// Placement of the measurement nodes in a scene.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Layout {
    pub ar_center: Vec3,
    pub ar_normal: Vec3,
    /// In-plane axis of the reflector along its phase gradient.
    pub ar_tangent: Vec3,
    /// Tx distance along the reflector normal, metres.
    pub tx_distance: f64,
    /// Radius of the Rx arc around the reflector, metres.
    pub rx_radius: f64,
}

impl Layout {
    pub fn tx_position(&self) -> Vec3 {
        self.ar_center + self.ar_normal * self.tx_distance
    }

    /// Rx position at angle `theta` from the normal toward the tangent.
    pub fn rx_position(&self, theta: Angle) -> Vec3 {
        self.ar_center + (self.ar_normal * theta.cos() + self.ar_tangent * theta.sin()) * self.rx_radius
    }

    fn validate(&self) -> Result<()> {
        let unit = |v: Vec3| (v.norm() - 1.0).abs() < 1e-9;
        if !unit(self.ar_normal) || !unit(self.ar_tangent) || self.ar_normal.dot(self.ar_tangent).abs() > 1e-9 {
            return Err(Error::Geometry("layout normal and tangent must be orthonormal".into()));
        }
        if !(self.tx_distance > 0.0 && self.rx_radius > 0.0) {
            return Err(Error::Geometry("layout distances must be positive".into()));
        }
        Ok(())
    }
}

/// On-disk scene description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SceneSpec {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default)]
    pub materials: Vec<Material>,
    #[serde(default)]
    pub facets: Vec<FacetSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layout: Option<Layout>,
}

/// Validated planar convex polygon.
#[derive(Debug, Clone, PartialEq)]
pub struct Facet {
    pub id: usize,
    pub material: usize,
    pub vertices: Vec<Vec3>,
    /// Unit normal following the vertex winding.
    pub normal: Vec3,
    pub centroid: Vec3,
}

impl Facet {
    fn from_spec(id: usize, spec: &FacetSpec, materials: &[Material]) -> Result<Self> {
        let label = spec.name.clone().unwrap_or_else(|| format!("#{id}"));
        let material = materials
            .iter()
            .position(|m| m.name() == spec.material)
            .ok_or_else(|| Error::Geometry(format!("facet {label}: unknown material {}", spec.material)))?;
        let v = &spec.vertices;
        if v.len() < 3 {
            return Err(Error::Geometry(format!("facet {label}: needs at least 3 vertices")));
        }
        if v.iter().any(|p| !p.is_finite()) {
            return Err(Error::Geometry(format!("facet {label}: non-finite vertex")));
        }
        // Newell's method is robust to collinear leading vertices.
        let mut n = Vec3::default();
        for (i, a) in v.iter().enumerate() {
            let b = v[(i + 1) % v.len()];
            n = n + Vec3::new(
                (a.y - b.y) * (a.z + b.z),
                (a.z - b.z) * (a.x + b.x),
                (a.x - b.x) * (a.y + b.y),
            );
        }
        let normal = n
            .normalized()
            .ok_or_else(|| Error::Geometry(format!("facet {label}: degenerate polygon")))?;
        let centroid = v.iter().fold(Vec3::default(), |acc, &p| acc + p) * (1.0 / v.len() as f64);
        if let Some(off) = v.iter().map(|p| (*p - centroid).dot(normal).abs()).find(|d| *d > PLANE_TOLERANCE) {
            return Err(Error::Geometry(format!(
                "facet {label}: vertices not coplanar (deviation {off:.3e} m)"
            )));
        }
        for i in 0..v.len() {
            let a = v[i];
            let b = v[(i + 1) % v.len()];
            let c = v[(i + 2) % v.len()];
            if (b - a).cross(c - b).dot(normal) < -1e-12 {
                return Err(Error::Geometry(format!("facet {label}: polygon is not convex")));
            }
        }
        Ok(Facet {
            id,
            material,
            vertices: v.clone(),
            normal,
            centroid,
        })
    }

    /// Signed distance of `p` from the facet plane.
    pub fn plane_distance(&self, p: Vec3) -> f64 {
        (p - self.centroid).dot(self.normal)
    }

    /// Whether a point on (or near) the plane lies inside the polygon,
    /// boundary included.
    pub fn contains(&self, p: Vec3) -> bool {
        let n = self.vertices.len();
        (0..n).all(|i| {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let edge = b - a;
            let len = edge.norm();
            edge.cross(p - a).dot(self.normal) >= -EDGE_TOLERANCE * len
        })
    }

    /// Crossing point of segment `p → q` with the facet, ignoring hits
    /// within [`ENDPOINT_TOLERANCE`] of either end.
    pub fn segment_hit(&self, p: Vec3, q: Vec3) -> Option<Vec3> {
        let d = q - p;
        let denom = d.dot(self.normal);
        if denom.abs() < 1e-15 * d.norm() {
            return None;
        }
        let t = (self.centroid - p).dot(self.normal) / denom;
        if !(0.0..=1.0).contains(&t) {
            return None;
        }
        let x = p + d * t;
        if x.distance(p) < ENDPOINT_TOLERANCE || x.distance(q) < ENDPOINT_TOLERANCE {
            return None;
        }
        self.contains(x).then_some(x)
    }
}

/// Immutable planar-facet scene.
#[derive(Debug, Clone, PartialEq)]
pub struct Scene {
    spec: SceneSpec,
    facets: Vec<Facet>,
}

impl Scene {
    pub fn new(spec: SceneSpec) -> Result<Self> {
        for (i, m) in spec.materials.iter().enumerate() {
            m.validate()?;
            if spec.materials[..i].iter().any(|o| o.name() == m.name()) {
                return Err(Error::Geometry(format!("duplicate material {}", m.name())));
            }
        }
        let facets = spec
            .facets
            .iter()
            .enumerate()
            .map(|(i, f)| Facet::from_spec(i, f, &spec.materials))
            .collect::<Result<Vec<_>>>()?;
        if let Some(layout) = &spec.layout {
            layout.validate()?;
        }
        Ok(Scene { spec, facets })
    }

    /// Scene with no facets.
    pub fn free_space() -> Self {
        Scene {
            spec: SceneSpec {
                name: None,
                materials: Vec::new(),
                facets: Vec::new(),
                layout: None,
            },
            facets: Vec::new(),
        }
    }

    pub fn from_json_str(text: &str) -> Result<Self> {
        let spec: SceneSpec =
            serde_json::from_str(text).map_err(|e| Error::parse(e.line() as u64, e.to_string()))?;
        Scene::new(spec)
    }

    pub fn to_json_string(&self) -> String {
        let mut s = serde_json::to_string_pretty(&self.spec).expect("scene serializes");
        s.push('\n');
        s
    }

    pub fn spec(&self) -> &SceneSpec {
        &self.spec
    }

    pub fn facets(&self) -> &[Facet] {
        &self.facets
    }

    pub fn material(&self, facet: &Facet) -> &Material {
        &self.spec.materials[facet.material]
    }

    pub fn layout(&self) -> Option<&Layout> {
        self.spec.layout.as_ref()
    }

    /// Returns a copy with one more facet.
    pub fn with_facet(&self, facet: FacetSpec) -> Result<Scene> {
        let mut spec = self.spec.clone();
        spec.facets.push(facet);
        Scene::new(spec)
    }

    /// Returns a copy with one more material, replacing any of the same name.
    pub fn with_material(&self, material: Material) -> Result<Scene> {
        let mut spec = self.spec.clone();
        spec.materials.retain(|m| m.name() != material.name());
        spec.materials.push(material);
        Scene::new(spec)
    }
}

/// Reads and validates a scene file.
pub fn load_scene(path: &Path) -> Result<Scene> {
    Scene::from_json_str(&std::fs::read_to_string(path)?)
}

/// True iff segment `a → b` crosses no facet.
pub fn los_clear(scene: &Scene, a: Vec3, b: Vec3) -> bool {
    scene.facets.iter().all(|f| f.segment_hit(a, b).is_none())
}
