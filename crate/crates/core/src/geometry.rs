//! Rigid-body poses, rotations and point transforms.
//!
//! Orientation convention: extrinsic rotations about the fixed X (roll), then Y (pitch),
//! then Z (yaw) axes, i.e. `R = Rz(yaw) * Ry(pitch) * Rx(roll)`. All angles are kept in
//! `(-pi, pi]`.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Vec3<T> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub const fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    #[inline]
    pub fn zeros() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    #[inline]
    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    #[inline]
    pub fn scale(self, s: T) -> Self {
        Self::new(self.x * s, self.y * s, self.z * s)
    }

    #[inline]
    pub fn map(self, f: impl Fn(T) -> T) -> Self {
        Self::new(f(self.x), f(self.y), f(self.z))
    }

    #[inline]
    pub fn zip(self, o: Self, f: impl Fn(T, T) -> T) -> Self {
        Self::new(f(self.x, o.x), f(self.y, o.y), f(self.z, o.z))
    }

    #[inline]
    pub fn to_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }

    #[inline]
    pub fn from_array(a: [T; 3]) -> Self {
        Self::new(a[0], a[1], a[2])
    }

    pub fn max_component(self) -> T {
        self.x.max(self.y).max(self.z)
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Mul<T> for Vec3<T> {
    type Output = Self;
    #[inline]
    fn mul(self, s: T) -> Self {
        self.scale(s)
    }
}

/// Row-major 3x3 rotation matrix.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Rotation<T> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Rotation<T> {
    pub fn identity() -> Self {
        let (o, l) = (T::zero(), T::one());
        Self {
            m: [[l, o, o], [o, l, o], [o, o, l]],
        }
    }

    /// `Rz(yaw) * Ry(pitch) * Rx(roll)`.
    pub fn from_euler(roll: T, pitch: T, yaw: T) -> Self {
        let (sr, cr) = roll.sin_cos();
        let (sp, cp) = pitch.sin_cos();
        let (sy, cy) = yaw.sin_cos();
        Self {
            m: [
                [cy * cp, cy * sp * sr - sy * cr, cy * sp * cr + sy * sr],
                [sy * cp, sy * sp * sr + cy * cr, sy * sp * cr - cy * sr],
                [-sp, cp * sr, cp * cr],
            ],
        }
    }

    /// Inverse of [`Rotation::from_euler`]. Near pitch = ±pi/2 roll is fixed to zero.
    pub fn to_euler(&self) -> (T, T, T) {
        let m = &self.m;
        let s = (-m[2][0]).max(-T::one()).min(T::one());
        let pitch = s.asin();
        let cp = (m[0][0] * m[0][0] + m[1][0] * m[1][0]).sqrt();
        if cp > T::lit(1e-12) {
            let roll = m[2][1].atan2(m[2][2]);
            let yaw = m[1][0].atan2(m[0][0]);
            (
                normalize_angle(roll),
                normalize_angle(pitch),
                normalize_angle(yaw),
            )
        } else {
            let yaw = (-m[0][1]).atan2(m[1][1]);
            (T::zero(), normalize_angle(pitch), normalize_angle(yaw))
        }
    }

    #[inline]
    pub fn apply(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn transpose(&self) -> Self {
        let m = &self.m;
        Self {
            m: [
                [m[0][0], m[1][0], m[2][0]],
                [m[0][1], m[1][1], m[2][1]],
                [m[0][2], m[1][2], m[2][2]],
            ],
        }
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell =
                    self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Self { m: out }
    }
}

/// Wraps an angle into `(-pi, pi]`.
#[inline]
pub fn normalize_angle<T: Real>(a: T) -> T {
    let two_pi = T::PI() + T::PI();
    let r = a - two_pi * ((a - T::PI()) / two_pi).ceil();
    // rounding in the line above can land a hair outside the interval
    if r <= -T::PI() {
        r + two_pi
    } else if r > T::PI() {
        r - two_pi
    } else {
        r
    }
}

/// Smallest signed difference `a - b` between two angles, in `(-pi, pi]`.
#[inline]
pub fn angle_diff<T: Real>(a: T, b: T) -> T {
    normalize_angle(a - b)
}

/// Position plus roll/pitch/yaw orientation.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Pose6D<T> {
    pub x: T,
    pub y: T,
    pub z: T,
    pub roll: T,
    pub pitch: T,
    pub yaw: T,
}

impl<T: Real> Pose6D<T> {
    pub fn new(x: T, y: T, z: T, roll: T, pitch: T, yaw: T) -> Self {
        Self {
            x,
            y,
            z,
            roll: normalize_angle(roll),
            pitch: normalize_angle(pitch),
            yaw: normalize_angle(yaw),
        }
    }

    pub fn identity() -> Self {
        let o = T::zero();
        Self::new(o, o, o, o, o, o)
    }

    pub fn from_translation(t: Vec3<T>) -> Self {
        Self::new(t.x, t.y, t.z, T::zero(), T::zero(), T::zero())
    }

    pub fn from_parts(t: Vec3<T>, r: &Rotation<T>) -> Self {
        let (roll, pitch, yaw) = r.to_euler();
        Self::new(t.x, t.y, t.z, roll, pitch, yaw)
    }

    #[inline]
    pub fn translation(&self) -> Vec3<T> {
        Vec3::new(self.x, self.y, self.z)
    }

    #[inline]
    pub fn rotation(&self) -> Rotation<T> {
        Rotation::from_euler(self.roll, self.pitch, self.yaw)
    }

    pub fn quaternion(&self) -> Quaternion<T> {
        Quaternion::from_euler(self.roll, self.pitch, self.yaw)
    }

    pub fn to_array(&self) -> [T; 6] {
        [self.x, self.y, self.z, self.roll, self.pitch, self.yaw]
    }

    pub fn from_array(a: [T; 6]) -> Self {
        Self::new(a[0], a[1], a[2], a[3], a[4], a[5])
    }

    /// `self * other` as homogeneous transforms.
    pub fn compose(&self, other: &Self) -> Self {
        let ra = self.rotation();
        let t = ra.apply(other.translation()) + self.translation();
        Self::from_parts(t, &ra.mul(&other.rotation()))
    }

    pub fn inverse(&self) -> Self {
        let rt = self.rotation().transpose();
        Self::from_parts(-rt.apply(self.translation()), &rt)
    }

    #[inline]
    pub fn transform_point(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation().apply(p) + self.translation()
    }

    /// Pose with angles outside `(-pi, pi]` wrapped back into range.
    pub fn normalized(&self) -> Self {
        Self::new(self.x, self.y, self.z, self.roll, self.pitch, self.yaw)
    }

    pub fn is_finite(&self) -> bool {
        self.to_array().iter().all(|v| v.is_finite())
    }
}

/// Precomputed rigid transform for repeated point mapping.
#[derive(Clone, Copy, Debug)]
pub struct Isometry<T> {
    pub rotation: Rotation<T>,
    pub translation: Vec3<T>,
}

impl<T: Real> Isometry<T> {
    #[inline]
    pub fn from_pose(p: &Pose6D<T>) -> Self {
        Self {
            rotation: p.rotation(),
            translation: p.translation(),
        }
    }

    #[inline]
    pub fn apply(&self, p: Vec3<T>) -> Vec3<T> {
        self.rotation.apply(p) + self.translation
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Quaternion<T> {
    pub w: T,
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Quaternion<T> {
    pub fn new(w: T, x: T, y: T, z: T) -> Self {
        Self { w, x, y, z }
    }

    pub fn identity() -> Self {
        Self::new(T::one(), T::zero(), T::zero(), T::zero())
    }

    /// Same convention as [`Rotation::from_euler`]: `qz(yaw) * qy(pitch) * qx(roll)`.
    pub fn from_euler(roll: T, pitch: T, yaw: T) -> Self {
        let half = T::lit(0.5);
        let (sr, cr) = (roll * half).sin_cos();
        let (sp, cp) = (pitch * half).sin_cos();
        let (sy, cy) = (yaw * half).sin_cos();
        Self::new(
            cr * cp * cy + sr * sp * sy,
            sr * cp * cy - cr * sp * sy,
            cr * sp * cy + sr * cp * sy,
            cr * cp * sy - sr * sp * cy,
        )
    }

    pub fn to_euler(&self) -> (T, T, T) {
        let (w, x, y, z) = (self.w, self.x, self.y, self.z);
        let two = T::lit(2.0);
        let one = T::one();
        let roll = (two * (w * x + y * z)).atan2(one - two * (x * x + y * y));
        let s = (two * (w * y - z * x)).max(-one).min(one);
        let pitch = s.asin();
        let yaw = (two * (w * z + x * y)).atan2(one - two * (y * y + z * z));
        (
            normalize_angle(roll),
            normalize_angle(pitch),
            normalize_angle(yaw),
        )
    }

    #[inline]
    pub fn dot(&self, o: &Self) -> T {
        self.w * o.w + self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(&self) -> T {
        self.dot(self).sqrt()
    }

    pub fn scale(&self, s: T) -> Self {
        Self::new(self.w * s, self.x * s, self.y * s, self.z * s)
    }

    pub fn normalized(&self) -> Self {
        self.scale(T::one() / self.norm())
    }

    /// Flips the sign if needed so that `self . reference >= 0`.
    pub fn aligned_to(&self, reference: &Self) -> Self {
        if self.dot(reference) < T::zero() {
            self.scale(-T::one())
        } else {
            *self
        }
    }

    /// Rotation angle between two unit quaternions, in `[0, pi]`.
    pub fn angle_to(&self, o: &Self) -> T {
        let d = self.dot(o).abs().min(T::one());
        T::lit(2.0) * d.acos()
    }
}

impl<T: Real> fmt::Display for Pose6D<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} {} {} {} {}",
            self.x, self.y, self.z, self.roll, self.pitch, self.yaw
        )
    }
}

/// One entry of a trajectory file: `t x y z roll pitch yaw`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StampedPose<T> {
    pub stamp: T,
    pub pose: Pose6D<T>,
}

pub fn parse_trajectory<T: Real>(text: &str) -> Result<Vec<StampedPose<T>>> {
    let mut out = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let vals = parse_fields::<T>(line, 7, lineno + 1)?;
        out.push(StampedPose {
            stamp: vals[0],
            pose: Pose6D::new(vals[1], vals[2], vals[3], vals[4], vals[5], vals[6]),
        });
    }
    Ok(out)
}

pub fn format_trajectory<T: Real>(poses: &[StampedPose<T>]) -> String {
    let mut s = String::new();
    for p in poses {
        s.push_str(&format!("{} {}\n", p.stamp, p.pose));
    }
    s
}

pub(crate) fn parse_fields<T: Real>(line: &str, expected: usize, lineno: usize) -> Result<Vec<T>> {
    let vals = line
        .split_whitespace()
        .map(|tok| {
            tok.parse::<T>().map_err(|_| Error::Parse {
                line: lineno,
                msg: format!("invalid number `{tok}`"),
            })
        })
        .collect::<Result<Vec<T>>>()?;
    if vals.len() != expected {
        return Err(Error::Parse {
            line: lineno,
            msg: format!("expected {expected} fields, found {}", vals.len()),
        });
    }
    Ok(vals)
}
