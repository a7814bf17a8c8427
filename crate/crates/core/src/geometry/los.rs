use std::f64::consts::PI;

use super::{ObstacleLaw, ObstacleShape, UniformRange};
use crate::error::{Error, Result};

/// Exponential LOS probability law `p_L(d) = c·exp(−βd)` for one Tx/Rx height pair.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LosModel {
    pub c: f64,
    pub beta: f64,
    pub eta: f64,
    pub h_tx: f64,
    pub h_rx: f64,
}

impl LosModel {
    /// Builds the model from a cylinder law, deriving η from the antenna heights.
    pub fn from_obstacles(law: &ObstacleLaw, h_tx: f64, h_rx: f64) -> Result<Self> {
        let eta = thinning_factor(h_tx, h_rx, &law.height)?;
        Self::with_thinning(law, eta, h_tx, h_rx)
    }

    /// Same as [`LosModel::from_obstacles`] but with an externally supplied η.
    pub fn with_thinning(law: &ObstacleLaw, eta: f64, h_tx: f64, h_rx: f64) -> Result<Self> {
        law.validate()?;
        if law.shape != ObstacleShape::Cylinder {
            return Err(Error::invalid("obstacle shape", "the analytic LOS law is defined for cylinders"));
        }
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::invalid("eta", format!("must lie in [0, 1], got {eta}")));
        }
        check_height("h_tx", h_tx)?;
        check_height("h_rx", h_rx)?;
        Ok(Self {
            c: (-eta * law.intensity * PI * law.radius.second_moment()).exp(),
            beta: 2.0 * eta * law.intensity * law.radius.mean(),
            eta,
            h_tx,
            h_rx,
        })
    }

    /// Obstacle-free world: every link is LOS.
    pub fn clear() -> Self {
        Self {
            c: 1.0,
            beta: 0.0,
            eta: 0.0,
            h_tx: 0.0,
            h_rx: 0.0,
        }
    }
}

fn check_height(name: &'static str, h: f64) -> Result<()> {
    if !(h >= 0.0 && h.is_finite()) {
        return Err(Error::invalid(name, format!("antenna height must be finite and >= 0, got {h}")));
    }
    Ok(())
}

/// η = 1 − ∫₀¹ F_H(s·h_rx + (1−s)·h_tx) ds for a uniform height law, evaluated in closed form.
pub fn thinning_factor(h_tx: f64, h_rx: f64, height: &UniformRange) -> Result<f64> {
    check_height("h_tx", h_tx)?;
    check_height("h_rx", h_rx)?;
    height.validate("obstacle height")?;
    let mean_cdf = if (h_rx - h_tx).abs() < 1e-12 * h_rx.abs().max(h_tx.abs()).max(1.0) {
        height.cdf(0.5 * (h_tx + h_rx))
    } else {
        let antiderivative = |h: f64| {
            let (a, b) = (height.min, height.max);
            if h <= a {
                0.0
            } else if h >= b {
                0.5 * (b - a) + (h - b)
            } else {
                (h - a) * (h - a) / (2.0 * (b - a))
            }
        };
        (antiderivative(h_rx) - antiderivative(h_tx)) / (h_rx - h_tx)
    };
    Ok((1.0 - mean_cdf).clamp(0.0, 1.0))
}

pub fn los_probability(d: f64, model: &LosModel) -> f64 {
    model.c * (-model.beta * d).exp()
}

/// (1 − e^{−u}(1 + u)) / u², accurate for small u and equal to 1/2 at u = 0.
fn radial_kernel(u: f64) -> f64 {
    if u < 0.1 {
        // Σ_{k≥2} (−1)^k (k−1) u^{k−2} / k!
        let mut term = 0.5f64;
        let mut sum = 0.0;
        let mut k = 2.0;
        while term.abs() > 1e-18 {
            sum += term;
            term *= -u * k / ((k - 1.0) * (k + 1.0));
            k += 1.0;
        }
        sum
    } else {
        -(-u).exp_m1() / (u * u) - (-u).exp() / u
    }
}

/// ∫_a^b x·e^{−βx} dx for 0 ≤ a ≤ b ≤ ∞, stable as β → 0.
pub fn los_radial_mass(a: f64, b: f64, beta: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let upto = |d: f64| {
        if d.is_infinite() {
            if beta > 0.0 {
                1.0 / (beta * beta)
            } else {
                f64::INFINITY
            }
        } else {
            d * d * radial_kernel(beta * d)
        }
    };
    upto(b) - upto(a)
}

/// Λ(d, λ) = 2πλ ∫₀^d x·p_L(x) dx, the mean number of LOS transmitters within `d`.
pub fn expected_los_count(d: f64, lambda: f64, model: &LosModel) -> f64 {
    if lambda == 0.0 || d <= 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda * model.c * los_radial_mass(0.0, d, model.beta)
}

/// Mean number of NLOS transmitters within `d`, πλd² − Λ(d, λ).
pub fn expected_nlos_count(d: f64, lambda: f64, model: &LosModel) -> f64 {
    if lambda == 0.0 || d <= 0.0 {
        return 0.0;
    }
    // πλd²·((1 − c) + c(1 − 2K(βd))), grouped to avoid cancellation when c → 1, β → 0.
    let k = radial_kernel(model.beta * d);
    let nlos_fraction = (1.0 - model.c) + model.c * (1.0 - 2.0 * k);
    (PI * lambda * d * d * nlos_fraction).max(0.0)
}

/// Probability that no LOS transmitter exists anywhere, e^{−2πλc/β²}.
pub fn los_void_probability(lambda: f64, model: &LosModel) -> f64 {
    if lambda == 0.0 || model.c == 0.0 {
        return 1.0;
    }
    if model.beta == 0.0 {
        return 0.0;
    }
    (-2.0 * PI * lambda * model.c / (model.beta * model.beta)).exp()
}

/// Defective density of the distance to the nearest LOS transmitter.
pub fn pdf_nearest_los(d: f64, lambda: f64, model: &LosModel) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    2.0 * PI * lambda * d * model.c * (-expected_los_count(d, lambda, model) - model.beta * d).exp()
}

pub fn cdf_nearest_los(d: f64, lambda: f64, model: &LosModel) -> f64 {
    -(-expected_los_count(d, lambda, model)).exp_m1()
}

/// Defective density of the distance to the nearest NLOS transmitter.
pub fn pdf_nearest_nlos(d: f64, lambda: f64, model: &LosModel) -> f64 {
    if d <= 0.0 {
        return 0.0;
    }
    let p_nlos = -(model.c.ln() - model.beta * d).exp_m1();
    2.0 * PI * lambda * d * p_nlos * (-expected_nlos_count(d, lambda, model)).exp()
}

pub fn cdf_nearest_nlos(d: f64, lambda: f64, model: &LosModel) -> f64 {
    -(-expected_nlos_count(d, lambda, model)).exp_m1()
}
