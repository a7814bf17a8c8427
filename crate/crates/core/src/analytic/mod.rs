//! Quadrature evaluation of the closed-form coverage results: dominant
//! interferer bounds for mmWave cellular and D2D links, the noise-limited
//! special case, Rayleigh-faded microwave D2D links, and the two-hop
//! combination used by relay mode selection.

mod microwave;

pub use microwave::{
    association_probs_microwave, coverage_microwave, coverage_microwave_d2d, laplace_interference,
    MicrowaveCoverage, MicrowaveLink,
};

use std::f64::consts::{PI, TAU};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{expected_los_count, los_radial_mass, LosModel};
use crate::quadrature::{integrate_improper, HalfLine, QuadratureOptions};
use crate::radio::{gain_mixture, AntennaPattern, Band, GainMixture, PathLossModel};

/// A mmWave link type: serving transmitters, interferers and the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MmWaveLink {
    /// Intensity of candidate serving transmitters (BSs or relay UEs).
    pub transmitter_intensity: f64,
    /// Intensity of potential interferers (λ_b downlink, ρλ_b uplink).
    pub interferer_intensity: f64,
    pub los: LosModel,
    /// Pattern of serving and interfering transmitters.
    pub tx_pattern: AntennaPattern,
    pub rx_pattern: AntennaPattern,
    pub path_loss: PathLossModel,
    /// Noise power normalized by transmit power.
    pub noise: f64,
    /// Interferers belong to the serving process and lie beyond the serving
    /// distance (downlink), rather than anywhere in the plane (uplink PPP).
    pub interferers_beyond_serving: bool,
}

impl MmWaveLink {
    pub fn validate(&self) -> Result<()> {
        if !(self.transmitter_intensity >= 0.0 && self.interferer_intensity >= 0.0) {
            return Err(Error::invalid("intensity", "transmitter and interferer intensities must be >= 0"));
        }
        if !(self.noise >= 0.0) {
            return Err(Error::invalid("noise", format!("must be >= 0, got {}", self.noise)));
        }
        Ok(())
    }

    pub fn mixture(&self) -> GainMixture {
        gain_mixture(&self.tx_pattern, &self.rx_pattern)
    }

    /// Largest serving distance at which the SNR still exceeds τ.
    pub fn noise_radius(&self, tau: f64) -> f64 {
        let g0 = self.tx_pattern.main_gain * self.rx_pattern.main_gain;
        (g0 / (tau * self.path_loss.intercept() * self.noise)).powf(1.0 / self.path_loss.exponent())
    }
}

/// Everything the analytic coverage results need for one scenario.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CoverageInputs {
    pub cellular: MmWaveLink,
    pub mmwave_d2d: MmWaveLink,
    pub microwave_d2d: MicrowaveLink,
    pub quadrature: QuadratureOptions,
}

/// Dominant-interference radii around a receiver with serving distance `d₀`.
///
/// Labels follow the region bookkeeping of the coverage theorems: `d3`/`d4`
/// bound the near/far regions inside the receiver's main lobe (interferer
/// side lobe / main lobe), `d1`/`d2` do the same outside it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterferenceRadii {
    /// Side-lobe interferer into the receiver's side lobe.
    pub d1: f64,
    /// Main-lobe interferer into the receiver's side lobe.
    pub d2: f64,
    /// Side-lobe interferer into the receiver's main lobe.
    pub d3: f64,
    /// Main-lobe interferer into the receiver's main lobe.
    pub d4: f64,
    /// Even an interference-free link misses τ at this distance.
    pub noise_outage: bool,
}

/// `D = (G τ / (g₀ d₀^{−α} − τ A σ²))^{1/α}` for each gain of the mixture.
pub fn interference_radii(
    tau: f64,
    d0: f64,
    g0: f64,
    mixture: &GainMixture,
    a: f64,
    alpha: f64,
    noise: f64,
) -> InterferenceRadii {
    let margin = g0 * d0.powf(-alpha) - tau * a * noise;
    if !(margin > 0.0) {
        return InterferenceRadii {
            d1: f64::INFINITY,
            d2: f64::INFINITY,
            d3: f64::INFINITY,
            d4: f64::INFINITY,
            noise_outage: true,
        };
    }
    let radius = |g: f64| (g * tau / margin).powf(1.0 / alpha);
    let [mm, ms, sm, ss] = mixture.gains;
    InterferenceRadii {
        d1: radius(ss),
        d2: radius(ms),
        d3: radius(sm),
        d4: radius(mm),
        noise_outage: false,
    }
}

fn radii_for(link: &MmWaveLink, tau: f64, d0: f64) -> InterferenceRadii {
    let mix = link.mixture();
    interference_radii(
        tau,
        d0,
        mix.desired_gain(),
        &mix,
        link.path_loss.intercept(),
        link.path_loss.exponent(),
        link.noise,
    )
}

fn lower_limit(link: &MmWaveLink, d0: f64) -> f64 {
    if link.interferers_beyond_serving {
        d0
    } else {
        0.0
    }
}

/// Mean number of LOS interferers in the near-interference region.
pub fn nir_measure(tau: f64, d0: f64, link: &MmWaveLink) -> f64 {
    let r = radii_for(link, tau, d0);
    if r.noise_outage {
        return f64::INFINITY;
    }
    let lo = lower_limit(link, d0);
    let beta = link.los.beta;
    let phi = link.rx_pattern.beamwidth;
    let mass = phi * los_radial_mass(lo, r.d3.max(lo), beta) + (TAU - phi) * los_radial_mass(lo, r.d1.max(lo), beta);
    link.interferer_intensity * link.los.c * mass
}

/// Mean number of boresight-aligned LOS interferers in the far-interference region.
pub fn fir_measure(tau: f64, d0: f64, link: &MmWaveLink) -> f64 {
    let r = radii_for(link, tau, d0);
    if r.noise_outage {
        return f64::INFINITY;
    }
    let lo = lower_limit(link, d0);
    let beta = link.los.beta;
    let phi = link.rx_pattern.beamwidth;
    let mass = phi * los_radial_mass(r.d3.max(lo), r.d4.max(lo), beta)
        + (TAU - phi) * los_radial_mass(r.d1.max(lo), r.d2.max(lo), beta);
    link.tx_pattern.main_lobe_probability() * link.interferer_intensity * link.los.c * mass
}

/// Tail mass of the nearest-LOS distance law beyond `x`.
fn los_tail(lambda: f64, model: &LosModel) -> impl Fn(f64) -> f64 + '_ {
    let total = if model.beta > 0.0 {
        2.0 * PI * lambda * model.c / (model.beta * model.beta)
    } else {
        f64::INFINITY
    };
    move |x: f64| (-expected_los_count(x, lambda, model)).exp() - (-total).exp()
}

pub(crate) fn initial_panel(lambda: f64) -> f64 {
    0.25 / lambda.sqrt()
}

/// Serving-distance density times the probability of no dominant interferer.
fn mmwave_integrand(link: &MmWaveLink, tau: f64, x: f64) -> f64 {
    if x <= 0.0 {
        return 0.0;
    }
    let n = nir_measure(tau, x, link);
    let f = fir_measure(tau, x, link);
    if !(n + f).is_finite() {
        return 0.0;
    }
    let (lambda, los) = (link.transmitter_intensity, &link.los);
    2.0 * PI * lambda * los.c * x * (-n - f - expected_los_count(x, lambda, los) - los.beta * x).exp()
}

/// Dominant-interferer coverage bound for a mmWave link.
pub fn coverage_mmwave(link: &MmWaveLink, tau: f64, opts: &QuadratureOptions) -> Result<f64> {
    link.validate()?;
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("threshold must be positive, got {tau}")));
    }
    let lambda = link.transmitter_intensity;
    if lambda == 0.0 || link.los.c == 0.0 {
        return Ok(0.0);
    }
    let tail = los_tail(lambda, &link.los);
    let domain = HalfLine::new(initial_panel(lambda))
        .with_cutoff(link.noise_radius(tau))
        .with_tail_bound(&tail);
    let value = integrate_improper(|x| mmwave_integrand(link, tau, x), domain, opts)?.value;
    Ok(value.clamp(0.0, 1.0))
}

pub fn coverage_mmwave_cellular(inputs: &CoverageInputs, tau: f64) -> Result<f64> {
    coverage_mmwave(&inputs.cellular, tau, &inputs.quadrature)
}

pub fn coverage_mmwave_d2d(inputs: &CoverageInputs, tau: f64) -> Result<f64> {
    coverage_mmwave(&inputs.mmwave_d2d, tau, &inputs.quadrature)
}

/// Coverage when interference is ignored: a LOS transmitter within the SNR radius.
pub fn coverage_noise_limited(link: &MmWaveLink, tau: f64) -> Result<f64> {
    link.validate()?;
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("threshold must be positive, got {tau}")));
    }
    let r = link.noise_radius(tau);
    let count = if r.is_infinite() {
        if link.los.beta > 0.0 {
            2.0 * PI * link.transmitter_intensity * link.los.c / (link.los.beta * link.los.beta)
        } else if link.transmitter_intensity * link.los.c > 0.0 {
            f64::INFINITY
        } else {
            0.0
        }
    } else {
        expected_los_count(r, link.transmitter_intensity, &link.los)
    };
    Ok(-(-count).exp_m1())
}

/// Downlink coverage with relay fallback: p_C + (1 − p_C)·p_C·p_D.
pub fn coverage_overall(p_cellular: f64, p_d2d: f64) -> Result<f64> {
    for (name, p) in [("p_cellular", p_cellular), ("p_d2d", p_d2d)] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::invalid(name, format!("probability outside [0, 1]: {p}")));
        }
    }
    Ok(p_cellular * (1.0 + p_d2d) - p_cellular * p_cellular * p_d2d)
}

/// Analytic coverage curves that depend on the threshold only.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CoverageKind {
    Cellular,
    MmwaveD2d,
    MicrowaveD2d,
    NoiseLimited,
    /// Direct cellular link with relay fallback over the given D2D band.
    Overall(Band),
}

pub fn coverage_at(inputs: &CoverageInputs, kind: CoverageKind, tau: f64) -> Result<f64> {
    match kind {
        CoverageKind::Cellular => coverage_mmwave_cellular(inputs, tau),
        CoverageKind::MmwaveD2d => coverage_mmwave_d2d(inputs, tau),
        CoverageKind::MicrowaveD2d => coverage_microwave_d2d(inputs, tau),
        CoverageKind::NoiseLimited => coverage_noise_limited(&inputs.cellular, tau),
        CoverageKind::Overall(band) => {
            let p_c = coverage_mmwave_cellular(inputs, tau)?;
            let p_d = match band {
                Band::MmWave => coverage_mmwave_d2d(inputs, tau)?,
                Band::Microwave => coverage_microwave_d2d(inputs, tau)?,
            };
            coverage_overall(p_c, p_d)
        }
    }
}

/// Evaluates a coverage curve over a threshold grid in parallel.
pub fn coverage_sweep(inputs: &CoverageInputs, kind: CoverageKind, taus: &[f64]) -> Result<Vec<f64>> {
    taus.par_iter().map(|&t| coverage_at(inputs, kind, t)).collect()
}

#[cfg(test)]
mod tests;
