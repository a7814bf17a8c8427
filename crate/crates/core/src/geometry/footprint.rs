//! Plain-text building footprint import.
//!
//! One polygon per line: a vertex count `n` followed by `n` x,y pairs in
//! meters, optionally followed by a building height. Tokens may be separated
//! by whitespace or commas. Blank lines and lines starting with `#` are
//! ignored. Footprints without a height are treated as infinitely tall.

use std::path::Path;

use super::{Obstacle, ObstacleField, Point};
use crate::error::{Error, Result};

pub fn parse_footprints(text: &str) -> Result<Vec<Obstacle>> {
    let mut out = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let err = |message: String| Error::InputFormat { line, message };
        let tokens: Vec<&str> = trimmed
            .split(|c: char| c.is_whitespace() || c == ',')
            .filter(|t| !t.is_empty())
            .collect();
        let n: usize = tokens[0]
            .parse()
            .map_err(|_| err(format!("expected a vertex count, found `{}`", tokens[0])))?;
        if n < 3 {
            return Err(err(format!("a polygon needs at least 3 vertices, got {n}")));
        }
        let values = tokens[1..]
            .iter()
            .map(|t| {
                t.parse::<f64>()
                    .ok()
                    .filter(|v| v.is_finite())
                    .ok_or_else(|| err(format!("`{t}` is not a finite number")))
            })
            .collect::<Result<Vec<f64>>>()?;
        let height = match values.len() {
            k if k == 2 * n => f64::INFINITY,
            k if k == 2 * n + 1 => values[2 * n],
            k => {
                return Err(err(format!(
                    "expected {} coordinates (plus optional height) for {n} vertices, found {k} values",
                    2 * n
                )))
            }
        };
        if !(height > 0.0) {
            return Err(err(format!("building height must be positive, got {height}")));
        }
        let vertices: Vec<Point> = values[..2 * n].chunks(2).map(|p| Point::new(p[0], p[1])).collect();
        let polygon = Obstacle::polygon(vertices, height);
        if polygon.area() <= 0.0 {
            return Err(err("polygon has zero area".to_string()));
        }
        out.push(polygon);
    }
    Ok(out)
}

pub fn read_footprints(path: impl AsRef<Path>) -> Result<ObstacleField> {
    let text = std::fs::read_to_string(path)?;
    ObstacleField::new(parse_footprints(&text)?)
}
