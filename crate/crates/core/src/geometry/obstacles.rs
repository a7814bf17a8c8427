use rand::Rng;

use super::ppp::{sample_ppp, Window};
use super::{Point, UniformRange};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ObstacleShape {
    Cylinder,
    /// Rectangles with independent length and width laws and uniform orientation.
    Rectangle {
        length: UniformRange,
        width: UniformRange,
    },
}

/// Marked Poisson law of 3D obstacles.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ObstacleLaw {
    /// Obstacle centers per m².
    pub intensity: f64,
    /// Cylinder radius law (unused for rectangles).
    pub radius: UniformRange,
    pub height: UniformRange,
    pub shape: ObstacleShape,
}

impl ObstacleLaw {
    pub fn cylinders(intensity: f64, radius: UniformRange, height: UniformRange) -> Result<Self> {
        let law = Self {
            intensity,
            radius,
            height,
            shape: ObstacleShape::Cylinder,
        };
        law.validate()?;
        Ok(law)
    }

    /// Cylinders whose mean covered-area density equals `xi`: λ_o = ξ / (π E[R²]).
    pub fn cylinders_with_coverage(xi: f64, radius: UniformRange, height: UniformRange) -> Result<Self> {
        if !(0.0..1.0).contains(&xi) {
            return Err(Error::invalid("coverage_ratio", format!("must lie in [0, 1), got {xi}")));
        }
        radius.validate("radius")?;
        let area = std::f64::consts::PI * radius.second_moment();
        let intensity = if xi == 0.0 { 0.0 } else { xi / area };
        Self::cylinders(intensity, radius, height)
    }

    pub fn rectangles(
        intensity: f64,
        length: UniformRange,
        width: UniformRange,
        height: UniformRange,
    ) -> Result<Self> {
        let law = Self {
            intensity,
            radius: UniformRange::new(0.0, 0.0),
            height,
            shape: ObstacleShape::Rectangle { length, width },
        };
        law.validate()?;
        Ok(law)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.intensity >= 0.0 && self.intensity.is_finite()) {
            return Err(Error::invalid("obstacle intensity", format!("must be >= 0, got {}", self.intensity)));
        }
        self.height.validate("obstacle height")?;
        match self.shape {
            ObstacleShape::Cylinder => self.radius.validate("obstacle radius"),
            ObstacleShape::Rectangle { length, width } => {
                length.validate("obstacle length")?;
                width.validate("obstacle width")?;
                if length.min <= 0.0 || width.min <= 0.0 {
                    return Err(Error::invalid("rectangle size", "length and width laws must be positive"));
                }
                Ok(())
            }
        }
    }

    pub fn mean_area(&self) -> f64 {
        match self.shape {
            ObstacleShape::Cylinder => std::f64::consts::PI * self.radius.second_moment(),
            ObstacleShape::Rectangle { length, width } => length.mean() * width.mean(),
        }
    }

    /// Mean footprint area per unit area, λ_o · E[area].
    pub fn coverage_ratio(&self) -> f64 {
        self.intensity * self.mean_area()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Footprint {
    Disc { radius: f64 },
    /// Closed polygon in absolute coordinates; the last vertex connects to the first.
    Polygon { vertices: Vec<Point> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Obstacle {
    pub center: Point,
    pub footprint: Footprint,
    pub height: f64,
}

impl Obstacle {
    pub fn cylinder(center: Point, radius: f64, height: f64) -> Self {
        Self {
            center,
            footprint: Footprint::Disc { radius },
            height,
        }
    }

    /// Rectangle of `length × width` rotated by `orientation` radians about its center.
    pub fn rectangle(center: Point, length: f64, width: f64, orientation: f64, height: f64) -> Self {
        let (s, c) = orientation.sin_cos();
        let (hl, hw) = (0.5 * length, 0.5 * width);
        let vertices = [(hl, hw), (-hl, hw), (-hl, -hw), (hl, -hw)]
            .iter()
            .map(|&(u, v)| center + Point::new(u * c - v * s, u * s + v * c))
            .collect();
        Self {
            center,
            footprint: Footprint::Polygon { vertices },
            height,
        }
    }

    pub fn polygon(vertices: Vec<Point>, height: f64) -> Self {
        let n = vertices.len().max(1) as f64;
        let center = vertices.iter().fold(Point::ORIGIN, |acc, &p| acc + p) * (1.0 / n);
        Self {
            center,
            footprint: Footprint::Polygon { vertices },
            height,
        }
    }

    pub fn area(&self) -> f64 {
        match &self.footprint {
            Footprint::Disc { radius } => std::f64::consts::PI * radius * radius,
            Footprint::Polygon { vertices } => {
                let n = vertices.len();
                let twice: f64 = (0..n).map(|i| vertices[i].cross(vertices[(i + 1) % n])).sum();
                0.5 * twice.abs()
            }
        }
    }

    fn bounding_box(&self) -> (Point, Point) {
        match &self.footprint {
            Footprint::Disc { radius } => (
                self.center - Point::new(*radius, *radius),
                self.center + Point::new(*radius, *radius),
            ),
            Footprint::Polygon { vertices } => vertices.iter().fold(
                (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
                |(lo, hi), p| (Point::new(lo.x.min(p.x), lo.y.min(p.y)), Point::new(hi.x.max(p.x), hi.y.max(p.y))),
            ),
        }
    }

    pub fn contains(&self, p: Point) -> bool {
        match &self.footprint {
            Footprint::Disc { radius } => p.distance(self.center) < *radius,
            Footprint::Polygon { vertices } => point_in_polygon(p, vertices),
        }
    }

    /// Parameter intervals `[s0, s1] ⊂ [0, 1]` along `a + s(b − a)` lying inside the footprint.
    fn segment_overlap(&self, a: Point, b: Point, out: &mut Vec<(f64, f64)>) {
        out.clear();
        match &self.footprint {
            Footprint::Disc { radius } => {
                let d = b - a;
                let f = a - self.center;
                let qa = d.dot(d);
                if qa == 0.0 {
                    return;
                }
                let qb = 2.0 * f.dot(d);
                let qc = f.dot(f) - radius * radius;
                let disc = qb * qb - 4.0 * qa * qc;
                if disc <= 0.0 {
                    return;
                }
                let sq = disc.sqrt();
                let s0 = ((-qb - sq) / (2.0 * qa)).max(0.0);
                let s1 = ((-qb + sq) / (2.0 * qa)).min(1.0);
                if s0 < s1 {
                    out.push((s0, s1));
                }
            }
            Footprint::Polygon { vertices } => {
                let mut ts = vec![0.0, 1.0];
                let n = vertices.len();
                let d = b - a;
                for i in 0..n {
                    let p = vertices[i];
                    let e = vertices[(i + 1) % n] - p;
                    let denom = d.cross(e);
                    if denom == 0.0 {
                        continue;
                    }
                    let w = p - a;
                    let t = w.cross(e) / denom;
                    let u = w.cross(d) / denom;
                    if (0.0..=1.0).contains(&t) && (0.0..=1.0).contains(&u) {
                        ts.push(t);
                    }
                }
                ts.sort_by(f64::total_cmp);
                for w in ts.windows(2) {
                    let (t0, t1) = (w[0], w[1]);
                    if t1 - t0 <= 0.0 {
                        continue;
                    }
                    let mid = a + d * (0.5 * (t0 + t1));
                    if point_in_polygon(mid, vertices) {
                        match out.last_mut() {
                            Some(last) if last.1 == t0 => last.1 = t1,
                            _ => out.push((t0, t1)),
                        }
                    }
                }
            }
        }
    }
}

fn point_in_polygon(p: Point, vertices: &[Point]) -> bool {
    let n = vertices.len();
    let mut inside = false;
    let mut j = n.wrapping_sub(1);
    for i in 0..n {
        let (vi, vj) = (vertices[i], vertices[j]);
        if (vi.y > p.y) != (vj.y > p.y) {
            let x = vj.x + (p.y - vj.y) * (vi.x - vj.x) / (vi.y - vj.y);
            if p.x < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

/// Uniform bucket grid over obstacle bounding boxes.
#[derive(Debug, Clone, PartialEq)]
struct GridIndex {
    origin: Point,
    cell: f64,
    nx: usize,
    ny: usize,
    buckets: Vec<Vec<u32>>,
}

impl GridIndex {
    fn build(obstacles: &[Obstacle]) -> Option<Self> {
        if obstacles.is_empty() {
            return None;
        }
        let boxes: Vec<(Point, Point)> = obstacles.iter().map(Obstacle::bounding_box).collect();
        let (lo, hi) = boxes.iter().fold(
            (Point::new(f64::INFINITY, f64::INFINITY), Point::new(f64::NEG_INFINITY, f64::NEG_INFINITY)),
            |(lo, hi), (a, b)| (Point::new(lo.x.min(a.x), lo.y.min(a.y)), Point::new(hi.x.max(b.x), hi.y.max(b.y))),
        );
        let mean_extent = boxes.iter().map(|(a, b)| (b.x - a.x).max(b.y - a.y)).sum::<f64>() / boxes.len() as f64;
        let span = (hi.x - lo.x).max(hi.y - lo.y).max(1e-9);
        // Cells around twice the typical footprint, capped at 512 per side.
        let cell = (2.0 * mean_extent).max(span / 512.0).max(1e-9);
        let nx = (((hi.x - lo.x) / cell).ceil() as usize).max(1);
        let ny = (((hi.y - lo.y) / cell).ceil() as usize).max(1);
        let mut buckets = vec![Vec::new(); nx * ny];
        for (k, (a, b)) in boxes.iter().enumerate() {
            let (i0, j0) = Self::cell_of(lo, cell, nx, ny, *a);
            let (i1, j1) = Self::cell_of(lo, cell, nx, ny, *b);
            for j in j0..=j1 {
                for i in i0..=i1 {
                    buckets[j * nx + i].push(k as u32);
                }
            }
        }
        Some(Self {
            origin: lo,
            cell,
            nx,
            ny,
            buckets,
        })
    }

    fn cell_of(origin: Point, cell: f64, nx: usize, ny: usize, p: Point) -> (usize, usize) {
        let i = ((p.x - origin.x) / cell).floor().clamp(0.0, (nx - 1) as f64) as usize;
        let j = ((p.y - origin.y) / cell).floor().clamp(0.0, (ny - 1) as f64) as usize;
        (i, j)
    }

    /// Candidate obstacle indices for a segment (sorted, deduplicated).
    fn candidates(&self, a: Point, b: Point, out: &mut Vec<u32>) {
        out.clear();
        // Clip to the grid box in cell coordinates (Liang–Barsky).
        let ua = (a - self.origin) * (1.0 / self.cell);
        let ub = (b - self.origin) * (1.0 / self.cell);
        let d = ub - ua;
        let (mut t0, mut t1) = (0.0f64, 1.0f64);
        for (p, q) in [
            (-d.x, ua.x),
            (d.x, self.nx as f64 - ua.x),
            (-d.y, ua.y),
            (d.y, self.ny as f64 - ua.y),
        ] {
            if p == 0.0 {
                if q < 0.0 {
                    return;
                }
            } else {
                let r = q / p;
                if p < 0.0 {
                    t0 = t0.max(r);
                } else {
                    t1 = t1.min(r);
                }
            }
        }
        if t0 > t1 {
            return;
        }
        let start = ua + d * t0;
        let end = ua + d * t1;
        let clampi = |v: f64, n: usize| v.floor().clamp(0.0, (n - 1) as f64) as i64;
        let (mut i, mut j) = (clampi(start.x, self.nx), clampi(start.y, self.ny));
        let (ie, je) = (clampi(end.x, self.nx), clampi(end.y, self.ny));
        let dd = end - start;
        let step_i: i64 = if dd.x > 0.0 { 1 } else { -1 };
        let step_j: i64 = if dd.y > 0.0 { 1 } else { -1 };
        let next_boundary = |pos: f64, idx: i64, step: i64| if step > 0 { (idx + 1) as f64 - pos } else { pos - idx as f64 };
        let mut t_max_x = if dd.x != 0.0 { next_boundary(start.x, i, step_i) / dd.x.abs() } else { f64::INFINITY };
        let mut t_max_y = if dd.y != 0.0 { next_boundary(start.y, j, step_j) / dd.y.abs() } else { f64::INFINITY };
        let t_dx = if dd.x != 0.0 { 1.0 / dd.x.abs() } else { f64::INFINITY };
        let t_dy = if dd.y != 0.0 { 1.0 / dd.y.abs() } else { f64::INFINITY };
        let in_grid = |i: i64, j: i64| i >= 0 && j >= 0 && (i as usize) < self.nx && (j as usize) < self.ny;
        let limit = self.nx + self.ny + 4;
        for _ in 0..limit {
            if in_grid(i, j) {
                out.extend_from_slice(&self.buckets[j as usize * self.nx + i as usize]);
            }
            if i == ie && j == je {
                break;
            }
            if (t_max_x - t_max_y).abs() < 1e-12 {
                // Passing through a corner: include both side neighbours.
                if in_grid(i + step_i, j) {
                    out.extend_from_slice(&self.buckets[j as usize * self.nx + (i + step_i) as usize]);
                }
                if in_grid(i, j + step_j) {
                    out.extend_from_slice(&self.buckets[(j + step_j) as usize * self.nx + i as usize]);
                }
            }
            if t_max_x < t_max_y {
                i += step_i;
                t_max_x += t_dx;
            } else {
                j += step_j;
                t_max_y += t_dy;
            }
        }
        out.sort_unstable();
        out.dedup();
    }
}

/// A realized obstacle set with a spatial index for segment queries.
#[derive(Debug, Clone, PartialEq)]
pub struct ObstacleField {
    obstacles: Vec<Obstacle>,
    index: Option<GridIndex>,
}

impl ObstacleField {
    pub fn new(obstacles: Vec<Obstacle>) -> Result<Self> {
        for o in &obstacles {
            let ok = match &o.footprint {
                Footprint::Disc { radius } => *radius > 0.0,
                Footprint::Polygon { vertices } => vertices.len() >= 3,
            };
            if !ok || !(o.height > 0.0) {
                return Err(Error::invalid("obstacle", "radii, polygons and heights must be positive"));
            }
        }
        let index = GridIndex::build(&obstacles);
        Ok(Self { obstacles, index })
    }

    pub fn empty() -> Self {
        Self {
            obstacles: Vec::new(),
            index: None,
        }
    }

    pub fn obstacles(&self) -> &[Obstacle] {
        &self.obstacles
    }

    pub fn len(&self) -> usize {
        self.obstacles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.obstacles.is_empty()
    }

    /// Whether `p` lies inside any footprint.
    pub fn covers(&self, p: Point) -> bool {
        let mut scratch = Vec::new();
        match &self.index {
            None => false,
            Some(index) => {
                index.candidates(p, p, &mut scratch);
                scratch.iter().any(|&k| self.obstacles[k as usize].contains(p))
            }
        }
    }
}

/// Samples obstacle centers from a PPP on `window`, with i.i.d. marks from `law`.
pub fn sample_obstacles<R: Rng + ?Sized>(law: &ObstacleLaw, window: &Window, rng: &mut R) -> Result<ObstacleField> {
    law.validate()?;
    let centers = sample_ppp(law.intensity, window, rng)?;
    let obstacles = centers
        .points
        .into_iter()
        .map(|center| match law.shape {
            ObstacleShape::Cylinder => {
                let radius = law.radius.sample(rng);
                let height = law.height.sample(rng);
                Obstacle::cylinder(center, radius, height)
            }
            ObstacleShape::Rectangle { length, width } => {
                let l = length.sample(rng);
                let w = width.sample(rng);
                let orientation = rng.random::<f64>() * std::f64::consts::PI;
                let height = law.height.sample(rng);
                Obstacle::rectangle(center, l, w, orientation, height)
            }
        })
        // Degenerate marks (zero radius or height) cannot block anything.
        .filter(|o| {
            o.height > 0.0
                && match &o.footprint {
                    Footprint::Disc { radius } => *radius > 0.0,
                    Footprint::Polygon { .. } => true,
                }
        })
        .collect();
    ObstacleField::new(obstacles)
}

/// Line-of-sight test between two antennas over an obstacle field.
///
/// The link is blocked if either endpoint lies inside a footprint, or if an
/// obstacle whose footprint meets the ground segment is at least as tall as
/// the lowest point of the Tx–Rx line over the intersected stretch.
pub fn is_los(tx: Point, h_tx: f64, rx: Point, h_rx: f64, field: &ObstacleField) -> bool {
    let Some(index) = &field.index else {
        return true;
    };
    let mut candidates = Vec::new();
    index.candidates(tx, rx, &mut candidates);
    let mut overlap = Vec::with_capacity(4);
    for &k in &candidates {
        let o = &field.obstacles[k as usize];
        if o.contains(tx) || o.contains(rx) {
            return false;
        }
        o.segment_overlap(tx, rx, &mut overlap);
        for &(s0, s1) in &overlap {
            let line = |s: f64| h_tx + s * (h_rx - h_tx);
            if o.height >= line(s0).min(line(s1)) {
                return false;
            }
        }
    }
    true
}
