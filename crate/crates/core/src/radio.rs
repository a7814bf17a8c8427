//! Antenna patterns, interferer gain mixtures, path loss and link budgets.

use std::f64::consts::{PI, TAU};

use rand::Rng;
use rand_distr::{Distribution, Exp};

use crate::error::{Error, Result};
use crate::units::{db_to_linear, linear_to_db};

/// Sectored (flat-top) beam: main-lobe gain inside the beamwidth, side-lobe gain elsewhere.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AntennaPattern {
    /// Beamwidth φ in radians.
    pub beamwidth: f64,
    pub main_gain: f64,
    pub side_gain: f64,
    /// Elements per side for patterns derived from a square array.
    pub elements: Option<u32>,
}

impl AntennaPattern {
    pub fn new(beamwidth: f64, main_gain: f64, side_gain: f64) -> Result<Self> {
        if !(beamwidth > 0.0 && beamwidth <= TAU) {
            return Err(Error::invalid("beamwidth", format!("must lie in (0, 2π], got {beamwidth}")));
        }
        if !(side_gain > 0.0 && main_gain >= side_gain && main_gain.is_finite()) {
            return Err(Error::invalid(
                "antenna gains",
                format!("need main >= side > 0, got main {main_gain}, side {side_gain}"),
            ));
        }
        Ok(Self {
            beamwidth,
            main_gain,
            side_gain,
            elements: None,
        })
    }

    pub fn isotropic() -> Self {
        Self {
            beamwidth: TAU,
            main_gain: 1.0,
            side_gain: 1.0,
            elements: None,
        }
    }

    /// Probability that a uniformly random boresight covers a fixed direction.
    pub fn main_lobe_probability(&self) -> f64 {
        self.beamwidth / TAU
    }
}

/// Sectored model of an `n × n` uniform planar array.
pub fn derive_pattern(n: u32) -> Result<AntennaPattern> {
    if n < 2 {
        return Err(Error::invalid("antenna elements", format!("need N >= 2 per side, got {n}")));
    }
    let nf = n as f64;
    Ok(AntennaPattern {
        beamwidth: 1.732 / nf,
        main_gain: nf * nf,
        side_gain: 1.0 / (3.0 * PI / (2.0 * nf)).sin().powi(2),
        elements: Some(n),
    })
}

/// Distribution of the product gain seen from an interferer with uniform boresights.
///
/// Index order: (main, main), (main, side), (side, main), (side, side), with the
/// transmitter listed first.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GainMixture {
    pub gains: [f64; 4],
    pub probabilities: [f64; 4],
}

impl GainMixture {
    /// On-boresight gain of a desired link.
    pub fn desired_gain(&self) -> f64 {
        self.gains[0]
    }

    pub fn mean(&self) -> f64 {
        self.gains.iter().zip(&self.probabilities).map(|(g, p)| g * p).sum()
    }
}

pub fn gain_mixture(tx: &AntennaPattern, rx: &AntennaPattern) -> GainMixture {
    let pt = tx.main_lobe_probability();
    let pr = rx.main_lobe_probability();
    GainMixture {
        gains: [
            tx.main_gain * rx.main_gain,
            tx.main_gain * rx.side_gain,
            tx.side_gain * rx.main_gain,
            tx.side_gain * rx.side_gain,
        ],
        probabilities: [pt * pr, pt * (1.0 - pr), (1.0 - pt) * pr, (1.0 - pt) * (1.0 - pr)],
    }
}

pub fn sample_interferer_gain<R: Rng + ?Sized>(mix: &GainMixture, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for (g, p) in mix.gains.iter().zip(&mix.probabilities) {
        acc += p;
        if u < acc {
            return *g;
        }
    }
    // Rounding left u above the cumulative sum; fall back to the last outcome with mass.
    let last = mix.probabilities.iter().rposition(|&p| p > 0.0).unwrap_or(3);
    mix.gains[last]
}

/// Path loss `PL(d) = A₂ + X + A₁·log₁₀(d/u) + A₃·log₁₀(f_c)` in dB, with `d` in meters and
/// distance unit `u` (1 m unless a formula is stated in kilometers).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLossModel {
    pub a1: f64,
    pub a2: f64,
    pub a3: f64,
    pub x: f64,
    pub carrier_ghz: f64,
    pub distance_unit_m: f64,
}

impl PathLossModel {
    pub fn new(a1: f64, a2: f64, a3: f64, x: f64, carrier_ghz: f64) -> Result<Self> {
        Self::with_distance_unit(a1, a2, a3, x, carrier_ghz, 1.0)
    }

    pub fn with_distance_unit(a1: f64, a2: f64, a3: f64, x: f64, carrier_ghz: f64, unit_m: f64) -> Result<Self> {
        if !(a1 > 0.0 && a1.is_finite()) {
            return Err(Error::invalid("path loss slope", format!("A1 must be positive, got {a1}")));
        }
        if !(carrier_ghz > 0.0 && unit_m > 0.0) || !(a2.is_finite() && a3.is_finite() && x.is_finite()) {
            return Err(Error::invalid("path loss", "carrier, distance unit and coefficients must be finite and positive"));
        }
        Ok(Self {
            a1,
            a2,
            a3,
            x,
            carrier_ghz,
            distance_unit_m: unit_m,
        })
    }

    pub fn exponent(&self) -> f64 {
        self.a1 / 10.0
    }

    /// Linear intercept A such that the attenuation is A·d^α with d in meters.
    pub fn intercept(&self) -> f64 {
        db_to_linear(self.a2 + self.x) * self.carrier_ghz.powf(self.a3 / 10.0) * self.distance_unit_m.powf(-self.exponent())
    }

    pub fn path_loss_db(&self, d: f64) -> f64 {
        self.a2 + self.x + self.a1 * (d / self.distance_unit_m).log10() + self.a3 * self.carrier_ghz.log10()
    }
}

pub fn path_loss_linear(model: &PathLossModel, d: f64) -> Result<f64> {
    if !(d > 0.0) {
        return Err(Error::invalid("distance", format!("must be positive, got {d}")));
    }
    Ok(model.intercept() * d.powf(model.exponent()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Band {
    MmWave,
    Microwave,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkBudget {
    pub tx_power_w: f64,
    /// Noise power divided by transmit power.
    pub noise: f64,
    pub bandwidth_hz: f64,
    pub band: Band,
}

impl LinkBudget {
    pub fn new(tx_power_w: f64, noise: f64, bandwidth_hz: f64, band: Band) -> Result<Self> {
        if !(noise > 0.0 && bandwidth_hz > 0.0 && tx_power_w > 0.0) {
            return Err(Error::invalid("link budget", "power, noise and bandwidth must be positive"));
        }
        Ok(Self {
            tx_power_w,
            noise,
            bandwidth_hz,
            band,
        })
    }
}

pub fn rx_power_mmwave(budget: &LinkBudget, gain: f64, model: &PathLossModel, d: f64, blocked: bool) -> Result<f64> {
    let loss = path_loss_linear(model, d)?;
    if blocked {
        return Ok(0.0);
    }
    Ok(budget.tx_power_w * gain / loss)
}

pub fn rx_power_microwave(budget: &LinkBudget, fading: f64, model: &PathLossModel, d: f64) -> Result<f64> {
    if !(fading >= 0.0) {
        return Err(Error::invalid("fading", format!("must be >= 0, got {fading}")));
    }
    Ok(budget.tx_power_w * fading / path_loss_linear(model, d)?)
}

/// Rayleigh power fading draw, exponential with rate μ.
pub fn sample_fading<R: Rng + ?Sized>(mu: f64, rng: &mut R) -> f64 {
    Exp::new(mu).expect("fading rate must be positive").sample(rng)
}

/// Thermal noise over `bandwidth_hz` plus noise figure, normalized by the transmit power.
pub fn normalized_noise(noise_density_dbm_hz: f64, bandwidth_hz: f64, noise_figure_db: f64, tx_power_dbm: f64) -> Result<f64> {
    if !(bandwidth_hz > 0.0) {
        return Err(Error::invalid("bandwidth", format!("must be positive, got {bandwidth_hz}")));
    }
    Ok(db_to_linear(
        noise_density_dbm_hz + linear_to_db(bandwidth_hz) + noise_figure_db - tx_power_dbm,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_element_pattern() {
        let p = derive_pattern(4).unwrap();
        assert!((linear_to_db(p.main_gain) - 12.04).abs() < 0.005);
        assert!((linear_to_db(p.side_gain) - 0.69).abs() < 0.005);
        assert!((p.beamwidth.to_degrees() - 24.8).abs() < 0.05);
    }

    #[test]
    fn two_and_eight_element_patterns() {
        let p = derive_pattern(2).unwrap();
        assert!((p.beamwidth - 0.866).abs() < 1e-12);
        assert_eq!(p.main_gain, 4.0);
        assert!((p.side_gain - 2.0).abs() < 1e-12);
        let p = derive_pattern(8).unwrap();
        assert_eq!(p.main_gain, 64.0);
        assert!((linear_to_db(p.main_gain) - 18.06).abs() < 0.005);
        assert!(derive_pattern(1).is_err());
        assert!(derive_pattern(0).is_err());
    }

    #[test]
    fn pattern_monotone_in_size() {
        let mut last = derive_pattern(2).unwrap();
        for n in 3..64 {
            let p = derive_pattern(n).unwrap();
            assert!(p.main_gain > last.main_gain && p.beamwidth < last.beamwidth);
            last = p;
        }
    }

    #[test]
    fn mixture_identities() {
        let iso = gain_mixture(&AntennaPattern::isotropic(), &AntennaPattern::isotropic());
        assert!(iso.gains.iter().all(|&g| g == 1.0));
        for (a, b) in [(8, 2), (4, 2), (2, 2), (16, 3)] {
            let (t, r) = (derive_pattern(a).unwrap(), derive_pattern(b).unwrap());
            let m = gain_mixture(&t, &r);
            assert!((m.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            assert_eq!(m.gains[0], t.main_gain * r.main_gain);
            assert_eq!(m.gains[3], t.side_gain * r.side_gain);
            assert!(m.gains[0] >= m.gains[1].max(m.gains[2]));
            assert!(m.gains[3] <= m.gains[1].min(m.gains[2]));
        }
    }

    #[test]
    fn bs_ue_main_main_probability() {
        let m = gain_mixture(&derive_pattern(8).unwrap(), &derive_pattern(2).unwrap());
        let expected = (0.2165 / TAU) * (0.866 / TAU);
        assert!((m.probabilities[0] - expected).abs() < 1e-6);
        assert!((m.probabilities[0] - 4.75e-3).abs() < 0.01e-3);
        // Boresight sampling: the interferer points at the UE and the UE at the interferer.
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 400_000;
        let (t, r) = (derive_pattern(8).unwrap(), derive_pattern(2).unwrap());
        let hits = (0..n)
            .filter(|_| {
                let off_t = (rng.random::<f64>() * TAU - PI).abs();
                let off_r = (rng.random::<f64>() * TAU - PI).abs();
                off_t < t.beamwidth / 2.0 && off_r < r.beamwidth / 2.0
            })
            .count();
        let f = hits as f64 / n as f64;
        let se = (expected * (1.0 - expected) / n as f64).sqrt();
        assert!((f - expected).abs() < 4.0 * se, "{f} vs {expected}");
    }

    #[test]
    fn mixture_sampling_frequencies() {
        let m = gain_mixture(&derive_pattern(8).unwrap(), &derive_pattern(2).unwrap());
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let n = 1_000_000;
        let mut counts = [0usize; 4];
        for _ in 0..n {
            let g = sample_interferer_gain(&m, &mut rng);
            let k = m.gains.iter().position(|&x| x == g).unwrap();
            counts[k] += 1;
        }
        for (k, (&c, &p)) in counts.iter().zip(&m.probabilities).enumerate() {
            let f = c as f64 / n as f64;
            assert!((f - p).abs() < 3.0 * (p * (1.0 - p) / n as f64).sqrt().max(1e-9), "k={k}: {f} vs {p}");
        }
        let certain = GainMixture {
            gains: [7.0, 1.0, 1.0, 1.0],
            probabilities: [1.0, 0.0, 0.0, 0.0],
        };
        assert!((0..1000).all(|_| sample_interferer_gain(&certain, &mut rng) == 7.0));
    }

    #[test]
    fn path_loss_anchors() {
        let uma = PathLossModel::new(20.0, 32.4, 20.0, 0.0, 28.0).unwrap();
        assert!((uma.path_loss_db(1.0) - 61.34).abs() < 0.005);
        assert!((linear_to_db(path_loss_linear(&uma, 1.0).unwrap()) - uma.path_loss_db(1.0)).abs() < 1e-10);
        let ind = PathLossModel::new(17.3, 32.4, 20.0, 0.0, 28.0).unwrap();
        assert!((ind.path_loss_db(10.0) - 78.64).abs() < 0.005);
        assert!((linear_to_db(path_loss_linear(&ind, 10.0).unwrap()) - 78.64).abs() < 0.005);
        assert!(path_loss_linear(&uma, 0.0).is_err());
        assert!(path_loss_linear(&uma, -3.0).is_err());
        assert!(PathLossModel::new(0.0, 1.0, 1.0, 0.0, 2.0).is_err());
    }

    #[test]
    fn kilometer_formula_applied_verbatim() {
        let los = PathLossModel::with_distance_unit(16.9, 89.5, 0.0, 0.0, 2.0, 1000.0).unwrap();
        for d in [0.5, 7.0, 42.0, 1000.0] {
            let db = 89.5 + 16.9 * (d / 1000.0f64).log10();
            assert!((linear_to_db(path_loss_linear(&los, d).unwrap()) - db).abs() < 1e-9);
        }
    }

    #[test]
    fn path_loss_increasing() {
        let m = PathLossModel::new(22.7, 27.0, 20.0, 0.0, 2.0).unwrap();
        let mut last = 0.0;
        for k in 1..500 {
            let v = path_loss_linear(&m, k as f64 * 0.7).unwrap();
            assert!(v > last);
            last = v;
        }
    }

    #[test]
    fn received_power() {
        let budget = LinkBudget::new(2.0, 1e-12, 1e8, Band::MmWave).unwrap();
        let unit = PathLossModel::new(20.0, 0.0, 0.0, 0.0, 1.0).unwrap();
        assert_eq!(rx_power_mmwave(&budget, 1.0, &unit, 1.0, true).unwrap(), 0.0);
        assert!((rx_power_mmwave(&budget, 1.0, &unit, 1.0, false).unwrap() - 2.0).abs() < 1e-15);
        let near = rx_power_mmwave(&budget, 3.0, &unit, 5.0, false).unwrap();
        let far = rx_power_mmwave(&budget, 3.0, &unit, 10.0, false).unwrap();
        assert!((near / far - 4.0).abs() < 1e-12);
        assert_eq!(rx_power_microwave(&budget, 0.0, &unit, 3.0).unwrap(), 0.0);
        assert!((rx_power_microwave(&budget, 0.7, &unit, 1.0).unwrap() - 1.4).abs() < 1e-15);
        assert!(rx_power_mmwave(&budget, 1.0, &unit, 0.0, true).is_err());
    }

    #[test]
    fn fading_mean() {
        let budget = LinkBudget::new(0.2, 1e-12, 2e7, Band::Microwave).unwrap();
        let m = PathLossModel::new(22.7, 27.0, 20.0, 0.0, 2.0).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let n = 1_000_000;
        let mean = (0..n)
            .map(|_| rx_power_microwave(&budget, sample_fading(1.0, &mut rng), &m, 40.0).unwrap())
            .sum::<f64>()
            / n as f64;
        let expected = 0.2 / path_loss_linear(&m, 40.0).unwrap();
        assert!((mean / expected - 1.0).abs() < 0.01);
    }

    #[test]
    fn noise_normalization() {
        let s2 = normalized_noise(-174.0, 100e6, 9.0, 35.0).unwrap();
        assert!((s2 / 1e-12 - 1.0).abs() < 1e-12);
        let s2 = normalized_noise(-174.0, 1.0, 0.0, 0.0).unwrap();
        assert!((s2 / 10f64.powf(-17.4) - 1.0).abs() < 1e-12);
        let a = normalized_noise(-174.0, 20e6, 9.0, 23.0).unwrap();
        let b = normalized_noise(-174.0, 40e6, 9.0, 23.0).unwrap();
        assert!((linear_to_db(b / a) - 3.0103).abs() < 1e-4);
        assert!(normalized_noise(-174.0, 0.0, 9.0, 23.0).is_err());
    }
}
