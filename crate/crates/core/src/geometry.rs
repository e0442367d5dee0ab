//! Scene layout in the surface-local frame.
//!
//! The surface lies on the z = 0 plane and is centered on the origin. The
//! half-space z > 0 is the reflection side and z < 0 the refraction side.
//! Elevation angles are measured from the surface normal on whichever side
//! the point lies; azimuth is the angle of the x-y projection, counted from
//! +x toward +y.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A point or displacement in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Vec3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Vec3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub fn dot(self, other: Vec3) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    pub fn cross(self, other: Vec3) -> Vec3 {
        Vec3::new(
            self.y * other.z - self.z * other.y,
            self.z * other.x - self.x * other.z,
            self.x * other.y - self.y * other.x,
        )
    }

    pub fn norm(self) -> f64 {
        self.dot(self).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Vec3 {
    type Output = Vec3;
    fn add(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x + rhs.x, self.y + rhs.y, self.z + rhs.z)
    }
}

impl Sub for Vec3 {
    type Output = Vec3;
    fn sub(self, rhs: Vec3) -> Vec3 {
        Vec3::new(self.x - rhs.x, self.y - rhs.y, self.z - rhs.z)
    }
}

impl Mul<f64> for Vec3 {
    type Output = Vec3;
    fn mul(self, rhs: f64) -> Vec3 {
        Vec3::new(self.x * rhs, self.y * rhs, self.z * rhs)
    }
}

impl Neg for Vec3 {
    type Output = Vec3;
    fn neg(self) -> Vec3 {
        Vec3::new(-self.x, -self.y, -self.z)
    }
}

impl fmt::Display for Vec3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {}, {})", self.x, self.y, self.z)
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Vec3, b: Vec3) -> f64 {
    (a - b).norm()
}

/// Which half-space a point occupies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// z > 0
    Reflection,
    /// z < 0
    Refraction,
}

impl Side {
    pub fn of(z: f64) -> Option<Side> {
        if z > 0.0 {
            Some(Side::Reflection)
        } else if z < 0.0 {
            Some(Side::Refraction)
        } else {
            None
        }
    }

    pub fn opposite(self) -> Side {
        match self {
            Side::Reflection => Side::Refraction,
            Side::Refraction => Side::Reflection,
        }
    }

    /// Sign of the outward normal on this side.
    pub fn normal_sign(self) -> f64 {
        match self {
            Side::Reflection => 1.0,
            Side::Refraction => -1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Side::Reflection => "reflection",
            Side::Refraction => "refraction",
        }
    }
}

impl fmt::Display for Side {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Side {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "reflection" | "reflect" | "front" => Ok(Side::Reflection),
            "refraction" | "refract" | "back" => Ok(Side::Refraction),
            other => Err(Error::Config(format!("unknown side '{other}'"))),
        }
    }
}

/// Elevation/azimuth pair in degrees.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SphericalAngle {
    pub elevation_deg: f64,
    pub azimuth_deg: f64,
}

impl SphericalAngle {
    /// Validates elevation in [0, 90) and wraps azimuth into [0, 360).
    pub fn new(elevation_deg: f64, azimuth_deg: f64) -> Result<Self> {
        if !(elevation_deg.is_finite() && azimuth_deg.is_finite()) {
            return Err(Error::Domain("angles must be finite".into()));
        }
        if !(0.0..90.0).contains(&elevation_deg) {
            return Err(Error::Domain(format!(
                "elevation {elevation_deg} deg outside [0, 90)"
            )));
        }
        Ok(Self {
            elevation_deg,
            azimuth_deg: wrap_azimuth(azimuth_deg),
        })
    }
}

pub(crate) fn wrap_azimuth(deg: f64) -> f64 {
    let w = deg.rem_euclid(360.0);
    if w >= 360.0 {
        0.0
    } else {
        w
    }
}

/// A direction away from the surface: an angle plus the half-space it
/// points into.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SidedAngle {
    pub angle: SphericalAngle,
    pub side: Side,
}

impl SidedAngle {
    pub fn new(elevation_deg: f64, azimuth_deg: f64, side: Side) -> Result<Self> {
        Ok(Self {
            angle: SphericalAngle::new(elevation_deg, azimuth_deg)?,
            side,
        })
    }

    pub fn elevation_deg(&self) -> f64 {
        self.angle.elevation_deg
    }

    pub fn azimuth_deg(&self) -> f64 {
        self.angle.azimuth_deg
    }

    /// Unit vector from the surface toward this direction.
    pub fn unit_vector(&self) -> Vec3 {
        let (st, ct) = self.angle.elevation_deg.to_radians().sin_cos();
        let (sp, cp) = self.angle.azimuth_deg.to_radians().sin_cos();
        Vec3::new(st * cp, st * sp, self.side.normal_sign() * ct)
    }

    /// The mirror direction on the same side (specular reflection).
    pub fn specular(&self) -> SidedAngle {
        SidedAngle {
            angle: SphericalAngle {
                elevation_deg: self.angle.elevation_deg,
                azimuth_deg: wrap_azimuth(self.angle.azimuth_deg + 180.0),
            },
            side: self.side,
        }
    }

    /// The undeflected direction through the surface.
    pub fn straight_through(&self) -> SidedAngle {
        SidedAngle {
            side: self.side.opposite(),
            ..self.specular()
        }
    }
}

impl fmt::Display for SidedAngle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(theta={}, phi={}, {})",
            self.angle.elevation_deg, self.angle.azimuth_deg, self.side
        )
    }
}

/// Great-circle angle between two directions, in degrees.
pub fn angular_distance_deg(a: &SidedAngle, b: &SidedAngle) -> f64 {
    let (ua, ub) = (a.unit_vector(), b.unit_vector());
    ua.cross(ub).norm().atan2(ua.dot(ub)).to_degrees()
}

/// Rectangular lattice of surface elements centered on the origin.
///
/// Elements are numbered row-major starting at the (-x, +y) corner: index
/// `m` sits in row `m / cols` (rows advance toward -y) and column `m % cols`
/// (columns advance toward +x).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IosGrid {
    rows: usize,
    cols: usize,
    dx: f64,
    dy: f64,
}

impl IosGrid {
    pub fn new(rows: usize, cols: usize, dx: f64, dy: f64) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Config("grid needs at least one element".into()));
        }
        if !(dx > 0.0 && dx.is_finite() && dy > 0.0 && dy.is_finite()) {
            return Err(Error::Config(format!(
                "element pitch must be positive, got dx={dx} dy={dy}"
            )));
        }
        Ok(Self { rows, cols, dx, dy })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn dx(&self) -> f64 {
        self.dx
    }

    pub fn dy(&self) -> f64 {
        self.dy
    }

    /// Number of elements M.
    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Physical area of one element.
    pub fn element_area(&self) -> f64 {
        self.dx * self.dy
    }

    pub fn element_position(&self, m: usize) -> Result<Vec3> {
        if m >= self.len() {
            return Err(Error::IndexOutOfRange {
                what: "element",
                index: m,
                limit: self.len(),
            });
        }
        Ok(self.position_unchecked(m))
    }

    pub(crate) fn position_unchecked(&self, m: usize) -> Vec3 {
        let (row, col) = (m / self.cols, m % self.cols);
        let x = (col as f64 - (self.cols as f64 - 1.0) / 2.0) * self.dx;
        let y = ((self.rows as f64 - 1.0) / 2.0 - row as f64) * self.dy;
        Vec3::new(x, y, 0.0)
    }

    pub fn positions(&self) -> Vec<Vec3> {
        (0..self.len()).map(|m| self.position_unchecked(m)).collect()
    }

    /// Direction from element `m` toward point `p`.
    pub fn angles_to(&self, m: usize, p: Vec3) -> Result<SidedAngle> {
        let origin = self.element_position(m)?;
        direction_between(origin, p)
    }
}

/// Direction of `p` as seen from a point `origin` lying on the surface plane.
pub fn direction_between(origin: Vec3, p: Vec3) -> Result<SidedAngle> {
    if !p.is_finite() {
        return Err(Error::DegenerateGeometry(format!("non-finite point {p}")));
    }
    let v = p - origin;
    let side = Side::of(v.z).ok_or_else(|| {
        Error::DegenerateGeometry(format!("point {p} lies on the surface plane"))
    })?;
    let planar = v.x.hypot(v.y);
    let elevation = planar.atan2(v.z.abs()).to_degrees();
    if elevation >= 90.0 {
        return Err(Error::DegenerateGeometry(format!(
            "point {p} is at grazing incidence"
        )));
    }
    let azimuth = wrap_azimuth(v.y.atan2(v.x).to_degrees());
    Ok(SidedAngle {
        angle: SphericalAngle {
            elevation_deg: elevation,
            azimuth_deg: azimuth,
        },
        side,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn single_element_sits_at_origin() {
        let g = IosGrid::new(1, 1, 0.04, 0.04).unwrap();
        assert_eq!(g.element_position(0).unwrap(), Vec3::new(0.0, 0.0, 0.0));
    }

    #[test]
    fn two_elements_are_centered() {
        let g = IosGrid::new(1, 2, 0.04, 0.04).unwrap();
        let p0 = g.element_position(0).unwrap();
        let p1 = g.element_position(1).unwrap();
        assert_abs_diff_eq!(p0.x, -0.02, epsilon = 1e-15);
        assert_abs_diff_eq!(p1.x, 0.02, epsilon = 1e-15);
        assert_eq!((p0.y, p0.z, p1.y, p1.z), (0.0, 0.0, 0.0, 0.0));
    }

    #[test]
    fn three_by_three_row_major_from_top_left() {
        let g = IosGrid::new(3, 3, 0.04, 0.04).unwrap();
        let expected = [
            (-0.04, 0.04),
            (0.0, 0.04),
            (0.04, 0.04),
            (-0.04, 0.0),
            (0.0, 0.0),
            (0.04, 0.0),
            (-0.04, -0.04),
            (0.0, -0.04),
            (0.04, -0.04),
        ];
        for (m, (x, y)) in expected.iter().enumerate() {
            let p = g.element_position(m).unwrap();
            assert_abs_diff_eq!(p.x, *x, epsilon = 1e-15);
            assert_abs_diff_eq!(p.y, *y, epsilon = 1e-15);
        }
        assert!(matches!(
            g.element_position(9),
            Err(Error::IndexOutOfRange { index: 9, .. })
        ));
    }

    #[test]
    fn angles_on_axis_and_diagonals() {
        let g = IosGrid::new(1, 1, 0.04, 0.04).unwrap();
        let a = g.angles_to(0, Vec3::new(0.0, 0.0, 1.0)).unwrap();
        assert_eq!((a.elevation_deg(), a.azimuth_deg()), (0.0, 0.0));
        assert_eq!(a.side, Side::Reflection);

        let a = g.angles_to(0, Vec3::new(1.0, 0.0, 1.0)).unwrap();
        assert_abs_diff_eq!(a.elevation_deg(), 45.0, epsilon = 1e-12);
        assert_eq!(a.azimuth_deg(), 0.0);

        let a = g.angles_to(0, Vec3::new(0.0, 1.0, -1.0)).unwrap();
        assert_abs_diff_eq!(a.elevation_deg(), 45.0, epsilon = 1e-12);
        assert_abs_diff_eq!(a.azimuth_deg(), 90.0, epsilon = 1e-12);
        assert_eq!(a.side, Side::Refraction);
    }

    #[test]
    fn point_on_plane_is_degenerate() {
        let g = IosGrid::new(2, 2, 0.04, 0.04).unwrap();
        assert!(matches!(
            g.angles_to(0, Vec3::new(1.0, 1.0, 0.0)),
            Err(Error::DegenerateGeometry(_))
        ));
        let p = g.element_position(3).unwrap();
        assert!(g.angles_to(3, p).is_err());
    }

    #[test]
    fn distances() {
        assert_eq!(distance(Vec3::default(), Vec3::new(0.0, 0.0, 2.0)), 2.0);
        assert_abs_diff_eq!(
            distance(Vec3::new(1.0, 1.0, 1.0), Vec3::default()),
            3f64.sqrt(),
            epsilon = 1e-15
        );
        assert_abs_diff_eq!(
            distance(Vec3::new(0.3, 0.4, 0.0), Vec3::default()),
            0.5,
            epsilon = 1e-15
        );
    }

    #[test]
    fn sided_angle_round_trips_through_unit_vector() {
        let d = SidedAngle::new(35.0, 200.0, Side::Refraction).unwrap();
        let back = direction_between(Vec3::default(), d.unit_vector() * 3.0).unwrap();
        assert_eq!(back.side, Side::Refraction);
        assert_abs_diff_eq!(back.elevation_deg(), 35.0, epsilon = 1e-12);
        assert_abs_diff_eq!(back.azimuth_deg(), 200.0, epsilon = 1e-12);
    }

    #[test]
    fn invalid_angles_rejected() {
        assert!(SphericalAngle::new(90.0, 0.0).is_err());
        assert!(SphericalAngle::new(-1.0, 0.0).is_err());
        assert_eq!(SphericalAngle::new(10.0, -90.0).unwrap().azimuth_deg, 270.0);
        assert!(IosGrid::new(0, 3, 0.1, 0.1).is_err());
        assert!(IosGrid::new(3, 3, 0.0, 0.1).is_err());
    }
}
