use rand::Rng;
use rand_distr::{Distribution, Poisson};

use super::Point;
use crate::error::{Error, Result};

/// Sampling region for a point process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Window {
    Disc { center: Point, radius: f64 },
    Rect { min: Point, max: Point },
}

impl Window {
    pub fn disc(radius: f64) -> Self {
        Window::Disc {
            center: Point::ORIGIN,
            radius,
        }
    }

    /// Axis-aligned rectangle of the given size with its lower-left corner at the origin.
    pub fn rect(width: f64, height: f64) -> Self {
        Window::Rect {
            min: Point::ORIGIN,
            max: Point::new(width, height),
        }
    }

    pub fn area(&self) -> f64 {
        match *self {
            Window::Disc { radius, .. } => std::f64::consts::PI * radius * radius,
            Window::Rect { min, max } => (max.x - min.x) * (max.y - min.y),
        }
    }

    fn validate(&self) -> Result<()> {
        let area = self.area();
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::invalid("window", format!("degenerate window {self:?}")));
        }
        if let Window::Rect { min, max } = self {
            if max.x <= min.x || max.y <= min.y {
                return Err(Error::invalid("window", "rectangle corners out of order"));
            }
        }
        Ok(())
    }

    pub fn contains(&self, p: Point) -> bool {
        match *self {
            Window::Disc { center, radius } => p.distance(center) <= radius,
            Window::Rect { min, max } => p.x >= min.x && p.x <= max.x && p.y >= min.y && p.y <= max.y,
        }
    }

    pub fn sample_uniform<R: Rng + ?Sized>(&self, rng: &mut R) -> Point {
        match *self {
            Window::Disc { center, radius } => {
                let r = radius * rng.random::<f64>().sqrt();
                let theta = rng.random::<f64>() * std::f64::consts::TAU;
                center + Point::polar(r, theta)
            }
            Window::Rect { min, max } => Point::new(
                min.x + (max.x - min.x) * rng.random::<f64>(),
                min.y + (max.y - min.y) * rng.random::<f64>(),
            ),
        }
    }
}

/// One realization of a homogeneous PPP restricted to a window.
#[derive(Debug, Clone, PartialEq)]
pub struct PointSet {
    pub points: Vec<Point>,
    pub intensity: f64,
    pub window: Window,
}

impl PointSet {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

pub(crate) fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> u64 {
    if mean <= 0.0 {
        return 0;
    }
    // Poisson::new only fails for non-positive or non-finite means.
    Poisson::new(mean).expect("finite positive mean").sample(rng) as u64
}

pub fn sample_ppp<R: Rng + ?Sized>(intensity: f64, window: &Window, rng: &mut R) -> Result<PointSet> {
    if !(intensity >= 0.0 && intensity.is_finite()) {
        return Err(Error::invalid("intensity", format!("must be finite and >= 0, got {intensity}")));
    }
    window.validate()?;
    let n = poisson_count(intensity * window.area(), rng);
    let points = (0..n).map(|_| window.sample_uniform(rng)).collect();
    Ok(PointSet {
        points,
        intensity,
        window: *window,
    })
}
