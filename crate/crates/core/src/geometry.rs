use core::f64::consts::PI;
use core::ops::{Add, Mul, Sub};

#[allow(unused_imports)] // inherent methods take over when std is linked
use num_traits::Float;

/// A point in meters. Planar setups keep `z = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Position {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position {
    pub const ORIGIN: Position = Position { x: 0.0, y: 0.0, z: 0.0 };

    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Position { x, y, z }
    }

    pub const fn planar(x: f64, y: f64) -> Self {
        Position { x, y, z: 0.0 }
    }

    /// Point at `radius` from `center` along the horizontal angle `angle` (radians).
    pub fn polar(center: Position, radius: f64, angle: f64) -> Self {
        Position::new(center.x + radius * angle.cos(), center.y + radius * angle.sin(), center.z)
    }

    pub fn norm(self) -> f64 {
        (self.x * self.x + self.y * self.y + self.z * self.z).sqrt()
    }

    pub fn distance(self, other: Position) -> f64 {
        (self - other).norm()
    }

    pub fn dot(self, other: Position) -> f64 {
        self.x * other.x + self.y * other.y + self.z * other.z
    }

    /// Horizontal angle of the vector, in radians.
    pub fn azimuth(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

impl Add for Position {
    type Output = Position;
    fn add(self, o: Position) -> Position {
        Position::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl Sub for Position {
    type Output = Position;
    fn sub(self, o: Position) -> Position {
        Position::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl Mul<f64> for Position {
    type Output = Position;
    fn mul(self, s: f64) -> Position {
        Position::new(self.x * s, self.y * s, self.z * s)
    }
}

/// Wraps an angle to the principal branch (-π, π].
pub fn wrap_angle(mut a: f64) -> f64 {
    if !a.is_finite() {
        return a;
    }
    a %= 2.0 * PI;
    if a <= -PI {
        a += 2.0 * PI;
    } else if a > PI {
        a -= 2.0 * PI;
    }
    a
}

/// A listener at `position` looking along the horizontal angle `facing`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ListenerPose {
    pub position: Position,
    facing: f64,
}

impl ListenerPose {
    pub fn new(position: Position, facing: f64) -> Self {
        ListenerPose { position, facing: wrap_angle(facing) }
    }

    /// Pose at `position` looking towards `target`.
    pub fn facing_point(position: Position, target: Position) -> Self {
        Self::new(position, (target - position).azimuth())
    }

    pub fn facing(&self) -> f64 {
        self.facing
    }

    /// Unit vector pointing out of the left ear.
    pub fn left_axis(&self) -> Position {
        Position::planar(-self.facing.sin(), self.facing.cos())
    }

    /// Azimuth of `p` relative to the facing direction, counter-clockwise
    /// (positive to the left), in (-π, π].
    pub fn relative_azimuth(&self, p: Position) -> f64 {
        wrap_angle((p - self.position).azimuth() - self.facing)
    }
}
