use std::fmt;
use std::str::FromStr;

/// Sweep values given as `start:stop:step`, a comma list, or a single number.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub spec: String,
    pub values: Vec<f64>,
}

const MAX_POINTS: usize = 100_000;

impl FromStr for Grid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let num = |t: &str| t.trim().parse::<f64>().map_err(|_| format!("`{t}` is not a number"));
        let values = if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let [start, stop, step] = parts[..] else {
                return Err(format!("range `{s}` must be start:stop:step"));
            };
            let (start, stop, step) = (num(start)?, num(stop)?, num(step)?);
            if !(step > 0.0) || !(stop >= start) || !start.is_finite() || !stop.is_finite() {
                return Err(format!("range `{s}` needs start <= stop and a positive step"));
            }
            let n = ((stop - start) / step + 1e-9).floor() as usize;
            if n >= MAX_POINTS {
                return Err(format!("range `{s}` has more than {MAX_POINTS} points"));
            }
            (0..=n).map(|k| start + step * k as f64).collect()
        } else {
            s.split(',').map(num).collect::<Result<Vec<_>, _>>()?
        };
        if values.is_empty() || values.iter().any(|v| !v.is_finite()) {
            return Err(format!("grid `{s}` is empty or not finite"));
        }
        Ok(Grid {
            spec: s.to_string(),
            values,
        })
    }
}

impl fmt::Display for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.spec)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn range_includes_endpoint() {
        let g: Grid = "0:40:0.5".parse().unwrap();
        assert_eq!(g.values.len(), 81);
        assert_eq!(g.values[80], 40.0);
    }

    #[test]
    fn list_and_single() {
        assert_eq!("1, 2,3".parse::<Grid>().unwrap().values, vec![1.0, 2.0, 3.0]);
        assert_eq!("10".parse::<Grid>().unwrap().values, vec![10.0]);
    }

    #[test]
    fn rejects_bad_specs() {
        for bad in ["", "a", "0:1", "0:10:0", "5:1:1", "1,,2", "0:1e9:1e-3"] {
            assert!(bad.parse::<Grid>().is_err(), "{bad}");
        }
    }
}
