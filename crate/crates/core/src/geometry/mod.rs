//! Planar point processes, 3D obstacle fields and line-of-sight machinery,
//! together with the analytic LOS-probability and nearest-transmitter
//! distance laws built on top of them.

mod footprint;
mod los;
mod obstacles;
mod ppp;

pub use footprint::{parse_footprints, read_footprints};
pub use los::{
    cdf_nearest_los, cdf_nearest_nlos, expected_los_count, expected_nlos_count, los_probability,
    los_radial_mass, los_void_probability, pdf_nearest_los, pdf_nearest_nlos, thinning_factor,
    LosModel,
};
pub use obstacles::{
    is_los, sample_obstacles, Footprint, Obstacle, ObstacleField, ObstacleLaw, ObstacleShape,
};
pub use ppp::{sample_ppp, PointSet, Window};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const ORIGIN: Point = Point { x: 0.0, y: 0.0 };

    pub fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn polar(r: f64, theta: f64) -> Self {
        Self {
            x: r * theta.cos(),
            y: r * theta.sin(),
        }
    }

    pub fn norm(self) -> f64 {
        self.x.hypot(self.y)
    }

    pub fn distance(self, other: Point) -> f64 {
        (self - other).norm()
    }

    pub fn angle(self) -> f64 {
        self.y.atan2(self.x)
    }

    pub fn dot(self, other: Point) -> f64 {
        self.x * other.x + self.y * other.y
    }

    pub fn cross(self, other: Point) -> f64 {
        self.x * other.y - self.y * other.x
    }
}

impl std::ops::Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl std::ops::Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl std::ops::Mul<f64> for Point {
    type Output = Point;
    fn mul(self, rhs: f64) -> Point {
        Point::new(self.x * rhs, self.y * rhs)
    }
}

/// Uniform law on `[min, max]`; `min == max` is a point mass.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    pub fn new(min: f64, max: f64) -> Self {
        Self { min, max }
    }

    pub fn validate(&self, name: &'static str) -> Result<()> {
        if !(self.min.is_finite() && self.max.is_finite()) || self.min < 0.0 || self.min > self.max {
            return Err(Error::invalid(
                name,
                format!("need 0 <= min <= max, got [{}, {}]", self.min, self.max),
            ));
        }
        Ok(())
    }

    pub fn mean(&self) -> f64 {
        0.5 * (self.min + self.max)
    }

    /// E[X²] = (a² + ab + b²) / 3.
    pub fn second_moment(&self) -> f64 {
        (self.min * self.min + self.min * self.max + self.max * self.max) / 3.0
    }

    /// P(X <= x), with thresholds outside the support clamped to {0, 1}.
    pub fn cdf(&self, x: f64) -> f64 {
        if x < self.min {
            0.0
        } else if x >= self.max {
            1.0
        } else {
            (x - self.min) / (self.max - self.min)
        }
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.max > self.min {
            rng.random_range(self.min..self.max)
        } else {
            self.min
        }
    }
}
