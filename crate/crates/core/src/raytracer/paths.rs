use num_complex::Complex64;

use super::geometry::Vec3;
use super::material::{fresnel_coefficient, Polarization};
use super::scene::{Scene, ENDPOINT_TOLERANCE, PLANE_TOLERANCE};
use crate::error::{Error, Result};
use crate::units::{Angle, Frequency};

/// Highest supported reflection order.
pub const MAX_ORDER: usize = 3;

/// One specular interaction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bounce {
    pub facet: usize,
    pub point: Vec3,
    /// Angle between the incoming ray and the facet normal.
    pub incidence: Angle,
}

/// Specular ray path from a source to a receiver.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagationPath {
    /// Source, bounce points, receiver.
    pub points: Vec<Vec3>,
    pub bounces: Vec<Bounce>,
}

impl PropagationPath {
    pub fn order(&self) -> usize {
        self.bounces.len()
    }

    pub fn segment_lengths(&self) -> Vec<f64> {
        self.points.windows(2).map(|w| w[0].distance(w[1])).collect()
    }

    pub fn length(&self) -> f64 {
        self.segment_lengths().iter().sum()
    }

    /// Unit direction leaving the source.
    pub fn departure(&self) -> Vec3 {
        (self.points[1] - self.points[0]).normalized().expect("segments have length")
    }

    /// Unit direction from the receiver back toward the last interaction.
    pub fn arrival(&self) -> Vec3 {
        let n = self.points.len();
        (self.points[n - 2] - self.points[n - 1])
            .normalized()
            .expect("segments have length")
    }

    pub fn facet_ids(&self) -> Vec<usize> {
        self.bounces.iter().map(|b| b.facet).collect()
    }

    /// Same path traversed from receiver to source.
    pub fn reversed(&self) -> PropagationPath {
        let points: Vec<Vec3> = self.points.iter().rev().copied().collect();
        let bounces = self.bounces.iter().rev().copied().collect();
        PropagationPath { points, bounces }
    }
}

/// Enumerates every specular path from `a` to `b` with at most `max_order`
/// bounces by the image method.
///
/// Absorbing facets never reflect, and a facet whose plane contains an
/// endpoint is skipped as a reflector. Paths are ordered by bounce count,
/// then lexicographically by facet id.
pub fn reflect_paths(scene: &Scene, a: Vec3, b: Vec3, max_order: usize) -> Result<Vec<PropagationPath>> {
    if max_order > MAX_ORDER {
        return Err(Error::domain(format!(
            "reflection order {max_order} exceeds the supported maximum {MAX_ORDER}"
        )));
    }
    if a.distance(b) < ENDPOINT_TOLERANCE {
        return Err(Error::Geometry("path endpoints coincide".into()));
    }
    let mut out = Vec::new();
    if super::scene::los_clear(scene, a, b) {
        out.push(PropagationPath {
            points: vec![a, b],
            bounces: Vec::new(),
        });
    }
    let reflectors: Vec<usize> = scene
        .facets()
        .iter()
        .filter(|f| {
            !scene.material(f).is_absorber()
                && f.plane_distance(a).abs() > PLANE_TOLERANCE
                && f.plane_distance(b).abs() > PLANE_TOLERANCE
        })
        .map(|f| f.id)
        .collect();
    let mut seq = Vec::with_capacity(max_order);
    for order in 1..=max_order {
        enumerate(scene, a, b, &reflectors, order, &mut seq, &mut out);
    }
    Ok(out)
}

fn enumerate(
    scene: &Scene,
    a: Vec3,
    b: Vec3,
    reflectors: &[usize],
    order: usize,
    seq: &mut Vec<usize>,
    out: &mut Vec<PropagationPath>,
) {
    if seq.len() == order {
        if let Some(p) = trace_sequence(scene, a, b, seq) {
            out.push(p);
        }
        return;
    }
    for &id in reflectors {
        if seq.last() == Some(&id) {
            continue;
        }
        seq.push(id);
        enumerate(scene, a, b, reflectors, order, seq, out);
        seq.pop();
    }
}

fn trace_sequence(scene: &Scene, a: Vec3, b: Vec3, seq: &[usize]) -> Option<PropagationPath> {
    let facets = scene.facets();
    let mut images = Vec::with_capacity(seq.len() + 1);
    images.push(a);
    for &id in seq {
        let f = &facets[id];
        let prev = *images.last().expect("non-empty");
        images.push(prev.mirrored(f.centroid, f.normal));
    }
    // Walk back from the receiver toward successive images.
    let mut hits = Vec::with_capacity(seq.len());
    let mut cur = b;
    for k in (1..=seq.len()).rev() {
        let f = &facets[seq[k - 1]];
        let d = images[k] - cur;
        let denom = d.dot(f.normal);
        if denom.abs() < 1e-15 {
            return None;
        }
        let t = (f.centroid - cur).dot(f.normal) / denom;
        if !(t > 0.0 && t < 1.0) {
            return None;
        }
        let x = cur + d * t;
        if !f.contains(x) {
            return None;
        }
        hits.push(x);
        cur = x;
    }
    hits.reverse();
    let mut points = Vec::with_capacity(seq.len() + 2);
    points.push(a);
    points.extend_from_slice(&hits);
    points.push(b);
    if points
        .windows(2)
        .any(|w| w[0].distance(w[1]) < ENDPOINT_TOLERANCE || !super::scene::los_clear(scene, w[0], w[1]))
    {
        return None;
    }
    let bounces = seq
        .iter()
        .enumerate()
        .map(|(i, &id)| {
            let incoming = (points[i + 1] - points[i]).normalized().expect("checked length");
            let cos = incoming.dot(facets[id].normal).abs().min(1.0);
            Bounce {
                facet: id,
                point: points[i + 1],
                incidence: Angle::from_radians(cos.acos()),
            }
        })
        .collect();
    Some(PropagationPath { points, bounces })
}

/// Checks the specular law, facet containment and visibility of a path.
pub fn validate_path(scene: &Scene, path: &PropagationPath) -> Result<()> {
    if path.points.len() != path.bounces.len() + 2 {
        return Err(Error::Geometry("path point count does not match bounces".into()));
    }
    for (i, bounce) in path.bounces.iter().enumerate() {
        let facet = scene
            .facets()
            .get(bounce.facet)
            .ok_or_else(|| Error::Geometry(format!("unknown facet {}", bounce.facet)))?;
        let p = path.points[i + 1];
        if facet.plane_distance(p).abs() > PLANE_TOLERANCE || !facet.contains(p) {
            return Err(Error::Geometry(format!("bounce {i} lies outside facet {}", facet.id)));
        }
        let d_in = (p - path.points[i]).normalized();
        let d_out = (path.points[i + 2] - p).normalized();
        let (Some(d_in), Some(d_out)) = (d_in, d_out) else {
            return Err(Error::Geometry(format!("bounce {i} has a zero-length segment")));
        };
        let mirror = d_in - facet.normal * (2.0 * d_in.dot(facet.normal));
        let err = mirror.cross(d_out).norm().atan2(mirror.dot(d_out));
        if err > 1e-9 {
            return Err(Error::Geometry(format!("bounce {i} violates the specular law by {err:.3e} rad")));
        }
    }
    for w in path.points.windows(2) {
        if !super::scene::los_clear(scene, w[0], w[1]) {
            return Err(Error::Geometry("path segment is obstructed".into()));
        }
    }
    Ok(())
}

/// Product of bounce coefficients for a wave polarized along `e_field`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathReflection {
    /// Co-polar amplitude factor, for coherent sums.
    pub amplitude: Complex64,
    /// Power factor, for incoherent sums.
    pub power: f64,
}

/// Fresnel factors along `path`.
///
/// At each bounce the launch polarization, projected transverse to the ray,
/// is split into TE and TM parts. The power factor weights `|Γ_TE|²` and
/// `|Γ_TM|²` by those parts; the amplitude uses `Γ_TE` and `−Γ_TM`, which
/// agree at normal incidence. Depolarization across bounces is ignored.
pub fn path_reflection(scene: &Scene, path: &PropagationPath, f: Frequency, e_field: Vec3) -> PathReflection {
    let mut amplitude = Complex64::new(1.0, 0.0);
    let mut power = 1.0;
    for (i, bounce) in path.bounces.iter().enumerate() {
        let facet = &scene.facets()[bounce.facet];
        let material = scene.material(facet);
        let d_in = (bounce.point - path.points[i]).normalized().expect("validated path");
        let te_weight = match (d_in.cross(facet.normal).normalized(), (e_field - d_in * e_field.dot(d_in)).normalized()) {
            (Some(s), Some(e)) => e.dot(s).powi(2),
            (None, _) => 1.0,
            (_, None) => 0.5,
        };
        let te = fresnel_coefficient(material, bounce.incidence, f, Polarization::Te);
        let tm = fresnel_coefficient(material, bounce.incidence, f, Polarization::Tm);
        amplitude *= te * te_weight - tm * (1.0 - te_weight);
        power *= te.norm_sqr() * te_weight + tm.norm_sqr() * (1.0 - te_weight);
    }
    PathReflection { amplitude, power }
}
