use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Point or direction in scene coordinates, metres; +z up.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 3]", into = "[f64; 3]")]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const X: Vec3 = Vec3::new(1.0, 0.0, 0.0);
    pub const Y: Vec3 = Vec3::new(0.0, 1.0, 0.0);
    pub const Z: Vec3 = Vec3::new(0.0, 0.0, 1.0);

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Vec3 { x, y, z }
    }

    pub fn dot(self, o: Vec3) -> f64 {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn cross(self, o: Vec3) -> Vec3 {
        Vec3::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn distance(self, o: Vec3) -> f64 {
        (self - o).norm()
    }

    /// Unit vector, or `None` for a (near-)zero vector.
    pub fn normalized(self) -> Option<Vec3> {
        let n = self.norm();
        (n > 1e-15 && n.is_finite()).then(|| self * (1.0 / n))
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    /// Mirror image across the plane through `point` with unit `normal`.
    pub fn mirrored(self, point: Vec3, normal: Vec3) -> Vec3 {
        self - normal * (2.0 * (self - point).dot(normal))
    }

    pub fn to_array(self) -> [f64; 3] {
        [self.x, self.y, self.z]
    }
}

impl From<[f64; 3]> for Vec3 {
    fn from(a: [f64; 3]) -> Self {
        Vec3::new(a[0], a[1], a[2])
    }
}

impl From<Vec3> for [f64; 3] {
    fn from(v: Vec3) -> Self {
        v.to_array()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, o: Vec3) -> Vec3 {
        Vec3::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, s: f64) -> Vec3 {
        Vec3::new(self.x * s, self.y * s, self.z * s)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

/// Right-handed local frame: `z` is boresight (or surface normal), `x` the
/// in-plane reference axis, `y = z × x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Frame {
    pub origin: Vec3,
    pub x: Vec3,
    pub y: Vec3,
    pub z: Vec3,
}

impl Frame {
    /// Builds a frame from boresight `z` and a reference `x`, which is
    /// orthogonalized against `z`.
    pub fn new(origin: Vec3, z: Vec3, x_hint: Vec3) -> Result<Self> {
        let z = z
            .normalized()
            .ok_or_else(|| Error::Geometry("frame axis has zero length".into()))?;
        let x = (x_hint - z * x_hint.dot(z))
            .normalized()
            .ok_or_else(|| Error::Geometry("frame reference axis is parallel to boresight".into()))?;
        Ok(Frame {
            origin,
            x,
            y: z.cross(x),
            z,
        })
    }

    /// Frame aimed at `target`, keeping local x horizontal where possible.
    pub fn aimed(origin: Vec3, target: Vec3) -> Result<Self> {
        let z = (target - origin)
            .normalized()
            .ok_or_else(|| Error::Geometry("antenna aimed at its own position".into()))?;
        let hint = if z.cross(Vec3::Z).norm() > 1e-9 {
            Vec3::Z.cross(z)
        } else {
            Vec3::X
        };
        Frame::new(origin, z, hint)
    }

    /// Expresses a world direction in local coordinates.
    pub fn to_local(&self, dir: Vec3) -> [f64; 3] {
        [dir.dot(self.x), dir.dot(self.y), dir.dot(self.z)]
    }
}
