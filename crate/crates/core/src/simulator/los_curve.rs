use std::f64::consts::TAU;
use std::sync::Arc;

use rand::Rng;
use rayon::prelude::*;

use super::drop_rng;
use crate::error::{Error, Result};
use crate::geometry::{
    is_los, los_probability, sample_obstacles, sample_ppp, Footprint, LosModel, ObstacleField, ObstacleLaw,
    ObstacleShape, Point, Window,
};

/// Pairs evaluated against one obstacle realization.
const BATCH: usize = 1000;

#[derive(Debug, Clone, PartialEq)]
pub enum FieldSource {
    /// A fresh field is sampled for every batch of pairs.
    Law(ObstacleLaw),
    Field(Arc<ObstacleField>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LosCurve {
    pub distances: Vec<f64>,
    pub estimate: Vec<f64>,
    /// Binomial standard error of each estimate.
    pub standard_error: Vec<f64>,
    pub n_pairs: usize,
}

fn law_extent(law: &ObstacleLaw) -> f64 {
    match law.shape {
        ObstacleShape::Cylinder => law.radius.max,
        ObstacleShape::Rectangle { length, width } => 0.5 * length.max.hypot(width.max),
    }
}

fn field_bounds(field: &ObstacleField) -> (Point, Point) {
    let mut lo = Point::new(f64::INFINITY, f64::INFINITY);
    let mut hi = Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY);
    let mut grow = |p: Point| {
        lo = Point::new(lo.x.min(p.x), lo.y.min(p.y));
        hi = Point::new(hi.x.max(p.x), hi.y.max(p.y));
    };
    for o in field.obstacles() {
        match &o.footprint {
            Footprint::Disc { radius } => {
                grow(o.center - Point::new(*radius, *radius));
                grow(o.center + Point::new(*radius, *radius));
            }
            Footprint::Polygon { vertices } => vertices.iter().copied().for_each(&mut grow),
        }
    }
    (lo, hi)
}

/// Fraction of node pairs at each separation with an unobstructed 3D line of sight.
///
/// Pair midpoints are uniform in a disc (or in the footprint bounding box for
/// imported fields) with uniform orientation.
pub fn empirical_los_curve(
    source: &FieldSource,
    distances: &[f64],
    h_tx: f64,
    h_rx: f64,
    n_pairs: usize,
    seed: u64,
) -> Result<LosCurve> {
    if n_pairs == 0 {
        return Err(Error::invalid("n_pairs", "need at least one pair"));
    }
    if distances.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
        return Err(Error::invalid("distances", "must be finite and >= 0"));
    }
    let d_max = distances.iter().copied().fold(0.0, f64::max);
    let n_batches = n_pairs.div_ceil(BATCH);

    let counts: Vec<Vec<usize>> = (0..n_batches as u64)
        .into_par_iter()
        .map(|b| -> Result<Vec<usize>> {
            let mut rng = drop_rng(seed, b);
            let size = BATCH.min(n_pairs - b as usize * BATCH);
            let (field, midpoint): (Arc<ObstacleField>, Window) = match source {
                FieldSource::Law(law) => {
                    let spread = (0.5 * d_max).max(1.0);
                    let window = Window::disc(spread + 0.5 * d_max + law_extent(law));
                    let field = Arc::new(sample_obstacles(law, &window, &mut rng)?);
                    (field, Window::disc(spread))
                }
                FieldSource::Field(f) => {
                    let (lo, hi) = field_bounds(f);
                    if !(hi.x > lo.x && hi.y > lo.y) {
                        return Err(Error::invalid("footprints", "field has no extent"));
                    }
                    (f.clone(), Window::Rect { min: lo, max: hi })
                }
            };
            Ok(distances
                .iter()
                .map(|&d| {
                    (0..size)
                        .filter(|_| {
                            let m = midpoint.sample_uniform(&mut rng);
                            let half = Point::polar(0.5 * d, rng.random::<f64>() * TAU);
                            is_los(m - half, h_tx, m + half, h_rx, &field)
                        })
                        .count()
                })
                .collect())
        })
        .collect::<Result<_>>()?;

    let n = n_pairs as f64;
    let estimate: Vec<f64> = (0..distances.len())
        .map(|k| counts.iter().map(|c| c[k]).sum::<usize>() as f64 / n)
        .collect();
    let standard_error = estimate.iter().map(|p| (p * (1.0 - p) / n).sqrt()).collect();
    Ok(LosCurve {
        distances: distances.to_vec(),
        estimate,
        standard_error,
        n_pairs,
    })
}

/// Nearest LOS and nearest NLOS transmitter distances over independent drops.
#[derive(Debug, Clone, PartialEq)]
pub struct NearestDistances {
    /// Only drops where a LOS transmitter exists.
    pub los: Vec<f64>,
    pub nlos: Vec<f64>,
    pub n_drops: usize,
}

/// Draws a PPP of `lambda` on a disc with independent LOS marks from `model`.
pub fn sample_nearest_distances(
    lambda: f64,
    model: &LosModel,
    radius: f64,
    n_drops: usize,
    seed: u64,
) -> Result<NearestDistances> {
    if n_drops == 0 {
        return Err(Error::invalid("n_drops", "need at least one drop"));
    }
    let window = Window::disc(radius);
    let pairs: Vec<(Option<f64>, Option<f64>)> = (0..n_drops as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = drop_rng(seed, i);
            let pts = sample_ppp(lambda, &window, &mut rng)?;
            let (mut los, mut nlos) = (None::<f64>, None::<f64>);
            for p in pts.points {
                let d = p.norm();
                let slot = if rng.random::<f64>() < los_probability(d, model) { &mut los } else { &mut nlos };
                *slot = Some(slot.map_or(d, |x| x.min(d)));
            }
            Ok((los, nlos))
        })
        .collect::<Result<_>>()?;
    Ok(NearestDistances {
        los: pairs.iter().filter_map(|p| p.0).collect(),
        nlos: pairs.iter().filter_map(|p| p.1).collect(),
        n_drops,
    })
}

/// Kolmogorov–Smirnov distance between a sample and a continuous CDF.
pub fn ks_distance(samples: &[f64], cdf: impl Fn(f64) -> f64) -> f64 {
    let mut xs = samples.to_vec();
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max(((i + 1) as f64 / n - f).abs())
        })
        .fold(0.0, f64::max)
}
