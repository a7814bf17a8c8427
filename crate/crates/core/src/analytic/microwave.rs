use std::f64::consts::{PI, TAU};

use super::{initial_panel, los_tail, CoverageInputs};
use crate::error::{Error, Result};
use crate::geometry::{expected_nlos_count, pdf_nearest_los, pdf_nearest_nlos, LosModel};
use crate::quadrature::{integrate_improper, HalfLine, QuadratureOptions};
use crate::radio::PathLossModel;

/// Single-antenna microwave D2D link with Rayleigh fading and LOS/NLOS path loss.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveLink {
    pub relay_intensity: f64,
    /// Intensity of uplink interferers, ρλ_b.
    pub interferer_intensity: f64,
    pub los: LosModel,
    pub los_path_loss: PathLossModel,
    /// Also applied to every interfering link.
    pub nlos_path_loss: PathLossModel,
    pub noise: f64,
    /// Rate μ of the exponential power fading.
    pub fading_rate: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MicrowaveCoverage {
    /// Probability of associating with the nearest LOS relay.
    pub s_los: f64,
    pub s_nlos: f64,
    pub p_los: f64,
    pub p_nlos: f64,
    pub value: f64,
}

/// E[e^{−sI}] for a PPP of Rayleigh-faded interferers with unit intercept.
pub fn laplace_interference(s: f64, intensity: f64, alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::invalid("alpha_nlos", format!("the interference transform needs α > 2, got {alpha}")));
    }
    if !(s >= 0.0) {
        return Err(Error::invalid("s", format!("must be >= 0, got {s}")));
    }
    let delta = TAU / alpha;
    Ok((-PI * intensity * s.powf(2.0 / alpha) * delta / delta.sin()).exp())
}

fn check(link: &MicrowaveLink) -> Result<()> {
    if !(link.relay_intensity >= 0.0 && link.interferer_intensity >= 0.0) {
        return Err(Error::invalid("intensity", "relay and interferer intensities must be >= 0"));
    }
    if !(link.noise >= 0.0) || !(link.fading_rate > 0.0) {
        return Err(Error::invalid("microwave link", "noise must be >= 0 and the fading rate positive"));
    }
    if !(link.nlos_path_loss.exponent() > 2.0) {
        return Err(Error::invalid(
            "alpha_nlos",
            format!("the interference transform needs α > 2, got {}", link.nlos_path_loss.exponent()),
        ));
    }
    Ok(())
}

/// Probabilities (S_L, S_N) of associating with the nearest LOS or the nearest NLOS relay
/// under the smallest-path-loss rule.
pub fn association_probs_microwave(link: &MicrowaveLink, opts: &QuadratureOptions) -> Result<(f64, f64)> {
    check(link)?;
    let lambda = link.relay_intensity;
    if !(lambda > 0.0) {
        return Err(Error::invalid("relay_intensity", "association needs a positive relay intensity"));
    }
    if link.los.c == 0.0 {
        return Ok((0.0, 1.0));
    }
    let (a_l, alpha_l) = (link.los_path_loss.intercept(), link.los_path_loss.exponent());
    let (a_n, alpha_n) = (link.nlos_path_loss.intercept(), link.nlos_path_loss.exponent());
    let a_tilde = (a_l / a_n).powf(1.0 / alpha_n);
    let integrand = |x: f64| {
        // NLOS candidates must all have larger path loss than the LOS one at x.
        let rival = a_tilde * x.powf(alpha_l / alpha_n);
        pdf_nearest_los(x, lambda, &link.los) * (-expected_nlos_count(rival, lambda, &link.los)).exp()
    };
    let tail = los_tail(lambda, &link.los);
    let domain = HalfLine::new(initial_panel(lambda)).with_tail_bound(&tail);
    let s_los = integrate_improper(integrand, domain, opts)?.value.clamp(0.0, 1.0);
    Ok((s_los, 1.0 - s_los))
}

/// Full microwave D2D coverage breakdown at threshold τ.
pub fn coverage_microwave(link: &MicrowaveLink, tau: f64, opts: &QuadratureOptions) -> Result<MicrowaveCoverage> {
    check(link)?;
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("threshold must be positive, got {tau}")));
    }
    let lambda = link.relay_intensity;
    if lambda == 0.0 {
        return Ok(MicrowaveCoverage {
            s_los: 0.0,
            s_nlos: 1.0,
            p_los: 0.0,
            p_nlos: 0.0,
            value: 0.0,
        });
    }
    let (s_los, s_nlos) = association_probs_microwave(link, opts)?;
    let mu = link.fading_rate;
    let a_n = link.nlos_path_loss.intercept();
    let alpha_n = link.nlos_path_loss.exponent();
    // Conditional coverage at serving distance x for a path-loss model.
    let conditional = |x: f64, model: &PathLossModel| -> f64 {
        let s = mu * tau * model.intercept() * x.powf(model.exponent());
        if !s.is_finite() {
            return 0.0;
        }
        let noise_term = (-s * link.noise).exp();
        if noise_term == 0.0 {
            return 0.0;
        }
        // Interfering links carry the NLOS intercept and Exp(μ) fading.
        let interference = laplace_interference(s / (mu * a_n), link.interferer_intensity, alpha_n).unwrap_or(0.0);
        noise_term * interference
    };
    let p_nlos = if link.los.c == 1.0 && link.los.beta == 0.0 {
        0.0
    } else {
        let integrand = |x: f64| pdf_nearest_nlos(x, lambda, &link.los) * conditional(x, &link.nlos_path_loss);
        let nlos_tail = |x: f64| (-expected_nlos_count(x, lambda, &link.los)).exp();
        let domain = HalfLine::new(initial_panel(lambda)).with_tail_bound(&nlos_tail);
        integrate_improper(integrand, domain, opts)?.value
    };
    let p_los = if link.los.c == 0.0 {
        0.0
    } else {
        let integrand = |x: f64| pdf_nearest_los(x, lambda, &link.los) * conditional(x, &link.los_path_loss);
        let tail = los_tail(lambda, &link.los);
        let domain = HalfLine::new(initial_panel(lambda)).with_tail_bound(&tail);
        integrate_improper(integrand, domain, opts)?.value
    };
    let value = (s_nlos * p_nlos + s_los * p_los).clamp(0.0, 1.0);
    Ok(MicrowaveCoverage {
        s_los,
        s_nlos,
        p_los,
        p_nlos,
        value,
    })
}

pub fn coverage_microwave_d2d(inputs: &CoverageInputs, tau: f64) -> Result<f64> {
    Ok(coverage_microwave(&inputs.microwave_d2d, tau, &inputs.quadrature)?.value)
}
