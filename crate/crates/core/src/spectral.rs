//! Average spectral efficiency from coverage curves, with and without relay
//! mode selection, and the uplink resources consumed by relaying.
//!
//! Every integral runs over `t ∈ (0, τ_max]` and is evaluated after the
//! substitution `u = ln(1 + t)`, which turns the `dt / (1 + t)` weight into `du`.

use std::cell::RefCell;
use std::f64::consts::LN_2;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, QuadratureOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralOptions {
    /// Upper SINR limit in linear scale.
    pub tau_max: f64,
    pub quadrature: QuadratureOptions,
}

impl Default for SpectralOptions {
    fn default() -> Self {
        Self {
            tau_max: 1e4,
            quadrature: QuadratureOptions {
                rel_tol: 1e-7,
                abs_tol: 1e-10,
                ..QuadratureOptions::default()
            },
        }
    }
}

/// ∫_a^b p(t)/(1+t) dt in natural-log units.
fn weighted_integral<F>(p: &F, a: f64, b: f64, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if b <= a {
        return Ok(0.0);
    }
    let failure: RefCell<Option<Error>> = RefCell::new(None);
    let integrand = |u: f64| {
        let t = u.exp_m1();
        match p(t) {
            Ok(v) => v,
            Err(e) => {
                failure.borrow_mut().get_or_insert(e);
                f64::NAN
            }
        }
    };
    let result = integrate(integrand, a.ln_1p(), b.ln_1p(), &opts.quadrature);
    if let Some(e) = failure.into_inner() {
        return Err(e);
    }
    Ok(result?.value)
}

fn check_tau(tau: f64, opts: &SpectralOptions) -> Result<f64> {
    if !(tau > 0.0) {
        return Err(Error::invalid("tau", format!("threshold must be positive, got {tau}")));
    }
    if !(opts.tau_max > 0.0 && opts.tau_max.is_finite()) {
        return Err(Error::invalid("tau_max", format!("must be finite and positive, got {}", opts.tau_max)));
    }
    Ok(tau.min(opts.tau_max))
}

fn check_probability(name: &'static str, p: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::invalid(name, format!("coverage outside [0, 1]: {p}")));
    }
    Ok(p)
}

/// γ = (1/ln 2) ∫₀^{τ_max} p(t)/(1+t) dt.
pub fn se_cellular<F>(coverage: F, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    check_tau(1.0, opts)?;
    Ok(weighted_integral(&coverage, 0.0, opts.tau_max, opts)? / LN_2)
}

/// E[log₂(1 + SINR) | SINR > τ].
pub fn se_conditional_above<F>(coverage: F, tau: f64, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let tau = check_tau(tau, opts)?;
    let p = check_probability("coverage", coverage(tau)?)?;
    if p == 0.0 {
        return Err(Error::UndefinedConditional(format!("coverage is zero at τ = {tau}")));
    }
    let upper = weighted_integral(&coverage, tau, opts.tau_max, opts)?;
    Ok((tau.ln_1p() + upper / p) / LN_2)
}

/// E[log₂(1 + SINR) | SINR ≤ τ].
pub fn se_conditional_below<F>(coverage: F, tau: f64, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let tau = check_tau(tau, opts)?;
    let p = check_probability("coverage", coverage(tau)?)?;
    if p == 1.0 {
        return Err(Error::UndefinedConditional(format!("coverage is one at τ = {tau}")));
    }
    let lower = weighted_integral(&coverage, 0.0, tau, opts)?;
    Ok((lower - p * tau.ln_1p()) / (LN_2 * (1.0 - p)))
}

/// One τ of a relay-assisted spectral-efficiency sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralPoint {
    pub tau: f64,
    pub p_cellular: f64,
    pub p_d2d: f64,
    /// γ_C(τ); `None` where the cellular coverage is zero.
    pub gamma_above: Option<f64>,
    /// γ_C̄(τ); `None` where the cellular coverage is one.
    pub gamma_below: Option<f64>,
    /// γ(τ) with relay mode selection at threshold τ.
    pub gamma_relay: f64,
    /// Υ(τ) divided by the uplink bandwidth.
    pub uplink_fraction: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpectralResult {
    /// Cellular SE without relaying.
    pub gamma: f64,
    pub points: Vec<SpectralPoint>,
}

impl SpectralResult {
    /// Point with the largest relay-assisted SE.
    pub fn peak(&self) -> Option<&SpectralPoint> {
        self.points.iter().max_by(|a, b| a.gamma_relay.total_cmp(&b.gamma_relay))
    }
}

struct Partial {
    p: f64,
    upper: f64,
    log_tau: f64,
}

impl Partial {
    fn new<F: Fn(f64) -> Result<f64>>(coverage: &F, tau: f64, opts: &SpectralOptions) -> Result<Self> {
        Ok(Self {
            p: check_probability("coverage", coverage(tau)?)?,
            upper: weighted_integral(coverage, tau, opts.tau_max, opts)?,
            log_tau: tau.ln_1p(),
        })
    }

    /// Conditional SE above τ in bits/s/Hz.
    fn above(&self) -> Option<f64> {
        (self.p > 0.0).then(|| (self.log_tau + self.upper / self.p) / LN_2)
    }
}

/// γ(τ) = p_c γ_C + (1 − p_c) γ_C̄ with p_c = p_C + (1 − p_C) p_C p_D.
///
/// Written as γ + p_D [p_C ln(1+τ) + (1 − p_C) U − p_C L] / ln 2, with U and L the
/// weighted integrals above and below τ, so it stays finite at p_C ∈ {0, 1}.
pub fn se_overall<F, G>(cellular: F, d2d: G, tau: f64, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let tau = check_tau(tau, opts)?;
    let total = weighted_integral(&cellular, 0.0, opts.tau_max, opts)?;
    let c = Partial::new(&cellular, tau, opts)?;
    let p_d = check_probability("d2d coverage", d2d(tau)?)?;
    Ok(relay_se(total, &c, p_d))
}

fn relay_se(total: f64, c: &Partial, p_d: f64) -> f64 {
    let lower = total - c.upper;
    let gain = p_d * (c.p * c.log_tau + (1.0 - c.p) * c.upper - c.p * lower);
    (total + gain) / LN_2
}

/// Υ(τ): uplink bandwidth needed so the relay-to-UE hop carries the BS-to-relay traffic.
pub fn uplink_resource<F, G>(cellular: F, d2d: G, tau: f64, w_dl: f64, opts: &SpectralOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    let tau = check_tau(tau, opts)?;
    let c = Partial::new(&cellular, tau, opts)?;
    let d = Partial::new(&d2d, tau, opts)?;
    resource(&c, &d, w_dl)
}

fn resource(c: &Partial, d: &Partial, w_dl: f64) -> Result<f64> {
    let share = (1.0 - c.p) * c.p * d.p;
    if share == 0.0 {
        return Ok(0.0);
    }
    let gamma_c = c.above().expect("positive cellular coverage");
    let gamma_d = d.above().expect("positive d2d coverage");
    if !(gamma_d > 0.0) {
        return Err(Error::UndefinedRatio(format!("D2D spectral efficiency is zero at τ = {}", d.log_tau.exp_m1())));
    }
    Ok(gamma_c / gamma_d * share * w_dl)
}

/// Evaluates γ, γ_C, γ_C̄, γ(τ) and Υ(τ)/w_ul over a threshold grid.
pub fn spectral_sweep<F, G>(
    cellular: F,
    d2d: G,
    taus: &[f64],
    w_dl: f64,
    w_ul: f64,
    opts: &SpectralOptions,
) -> Result<SpectralResult>
where
    F: Fn(f64) -> Result<f64>,
    G: Fn(f64) -> Result<f64>,
{
    if !(w_dl > 0.0 && w_ul > 0.0) {
        return Err(Error::invalid("bandwidth", "downlink and uplink bandwidths must be positive"));
    }
    let total = weighted_integral(&cellular, 0.0, opts.tau_max, opts)?;
    let gamma = total / LN_2;
    let mut points = Vec::with_capacity(taus.len());
    for &tau in taus {
        let tau = check_tau(tau, opts)?;
        let c = Partial::new(&cellular, tau, opts)?;
        let d = Partial::new(&d2d, tau, opts)?;
        let lower = total - c.upper;
        let gamma_below = (c.p < 1.0).then(|| (lower - c.p * c.log_tau) / (LN_2 * (1.0 - c.p)));
        points.push(SpectralPoint {
            tau,
            p_cellular: c.p,
            p_d2d: d.p,
            gamma_above: c.above(),
            gamma_below,
            gamma_relay: relay_se(total, &c, d.p),
            uplink_fraction: resource(&c, &d, w_dl)? / w_ul,
        });
    }
    Ok(SpectralResult { gamma, points })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts() -> SpectralOptions {
        SpectralOptions::default()
    }

    fn smooth(t: f64) -> Result<f64> {
        // A coverage-like curve: 0.9 at low SINR, decaying around 10 dB.
        Ok(0.9 / (1.0 + (t / 10.0).powf(1.3)))
    }

    #[test]
    fn full_coverage_gives_log_tau_max() {
        let g = se_cellular(|_| Ok(1.0), &opts()).unwrap();
        assert!((g - 10001f64.log2()).abs() < 1e-9);
        assert!((g - 13.29).abs() < 0.005);
        assert_eq!(se_cellular(|_| Ok(0.0), &opts()).unwrap(), 0.0);
    }

    #[test]
    fn conditional_above_edge_cases() {
        let o = opts();
        let g = se_conditional_above(|_| Ok(1.0), 17.0, &o).unwrap();
        assert!((g - 10001f64.log2()).abs() < 1e-9);
        let g = se_conditional_above(smooth, o.tau_max, &o).unwrap();
        assert!((g - 10001f64.log2()).abs() < 1e-12);
        assert!(matches!(
            se_conditional_above(|_| Ok(0.0), 3.0, &o),
            Err(Error::UndefinedConditional(_))
        ));
    }

    #[test]
    fn conditional_below_edge_cases() {
        let o = opts();
        let tau = 20.0;
        // Outage mass ε(t/τ)^k piles up just below τ as k grows.
        let k = 400.0;
        let piled = |t: f64| Ok(1.0 - 1e-3 * (t / tau).min(1.0).powf(k) - if t > tau { 0.5 } else { 0.0 });
        let g = se_conditional_below(piled, tau, &o).unwrap();
        assert!((g - (1.0 + tau).log2()).abs() < 0.01, "{g}");
        assert_eq!(se_conditional_below(|_| Ok(0.0), tau, &o).unwrap(), 0.0);
        assert!(matches!(
            se_conditional_below(|_| Ok(1.0), tau, &o),
            Err(Error::UndefinedConditional(_))
        ));
    }

    #[test]
    fn total_expectation_identity() {
        let o = opts();
        let gamma = se_cellular(smooth, &o).unwrap();
        for tau_db in [-20.0, -5.0, 0.0, 7.0, 15.0, 30.0] {
            let tau = crate::units::db_to_linear(tau_db);
            let p = smooth(tau).unwrap();
            let above = se_conditional_above(smooth, tau, &o).unwrap();
            let below = se_conditional_below(smooth, tau, &o).unwrap();
            assert!((p * above + (1.0 - p) * below - gamma).abs() < 1e-6);
            assert!(above >= gamma && gamma >= below);
            assert!(above >= (1.0 + tau).log2() - 1e-12 && below <= (1.0 + tau).log2() + 1e-12);
        }
    }

    #[test]
    fn relay_se_matches_direct_formula() {
        let o = opts();
        let d2d = |t: f64| Ok(0.7 / (1.0 + (t / 30.0).powi(2)));
        for tau_db in [-10.0, 5.0, 12.0, 25.0] {
            let tau = crate::units::db_to_linear(tau_db);
            let pc = smooth(tau).unwrap();
            let pd = d2d(tau).unwrap();
            let p = pc * (1.0 + pd) - pc * pc * pd;
            let direct = p * se_conditional_above(smooth, tau, &o).unwrap()
                + (1.0 - p) * se_conditional_below(smooth, tau, &o).unwrap();
            let combined = se_overall(smooth, d2d, tau, &o).unwrap();
            assert!((direct - combined).abs() < 1e-9);
        }
    }

    #[test]
    fn relay_se_without_d2d_is_gamma() {
        let o = opts();
        let gamma = se_cellular(smooth, &o).unwrap();
        for tau_db in [-10.0, 10.0, 30.0] {
            let v = se_overall(smooth, |_| Ok(0.0), crate::units::db_to_linear(tau_db), &o).unwrap();
            assert!((v - gamma).abs() < 1e-12);
        }
    }

    #[test]
    fn relay_se_limits_for_full_coverage_at_zero() {
        // Coverage tending to 1 as t → 0 and to 0 at τ_max: both limits recover γ.
        let o = opts();
        let p = |t: f64| Ok(1.0 / (1.0 + (t / 10.0).powi(2)));
        let gamma = se_cellular(p, &o).unwrap();
        let low = se_overall(p, |_| Ok(1.0), 1e-3, &o).unwrap();
        assert!((low - gamma).abs() < 1e-3, "{low} vs {gamma}");
        let high = se_overall(p, |_| Ok(1.0), o.tau_max, &o).unwrap();
        assert!((high - gamma).abs() < 1e-3, "{high} vs {gamma}");
    }

    #[test]
    fn uplink_resource_vanishes_at_extremes() {
        let o = opts();
        let p = |t: f64| Ok(1.0 / (1.0 + (t / 10.0).powi(4)));
        assert!(uplink_resource(p, p, 1e-9, 1.0, &o).unwrap() < 1e-6);
        assert!(uplink_resource(p, p, o.tau_max, 1.0, &o).unwrap() < 1e-6);
        let mid = uplink_resource(p, p, 10.0, 1.0, &o).unwrap();
        assert!(mid > 0.05);
        assert_eq!(uplink_resource(smooth, |_| Ok(0.0), 10.0, 1.0, &o).unwrap(), 0.0);
    }

    #[test]
    fn sweep_agrees_with_pointwise_calls() {
        let o = opts();
        let d2d = |t: f64| Ok(0.8 / (1.0 + (t / 50.0).powi(2)));
        let taus = [0.5, 5.0, 50.0];
        let r = spectral_sweep(smooth, d2d, &taus, 100e6, 20e6, &o).unwrap();
        assert!((r.gamma - se_cellular(smooth, &o).unwrap()).abs() < 1e-12);
        for pt in &r.points {
            assert!((pt.gamma_relay - se_overall(smooth, d2d, pt.tau, &o).unwrap()).abs() < 1e-9);
            let ups = uplink_resource(smooth, d2d, pt.tau, 100e6, &o).unwrap() / 20e6;
            assert!((pt.uplink_fraction - ups).abs() < 1e-9);
            assert!(pt.gamma_relay >= r.gamma - 1e-12);
        }
        assert!(r.peak().is_some());
    }

    #[test]
    fn errors_propagate_from_coverage() {
        let bad = |_t: f64| -> Result<f64> {
            Err(Error::NumericalFailure {
                context: "test",
                achieved: 1.0,
                tolerance: 0.0,
                evaluations: 1,
            })
        };
        assert!(matches!(se_cellular(bad, &opts()), Err(Error::NumericalFailure { .. })));
        assert!(se_cellular(|_| Ok(1.5), &opts()).is_ok());
        assert!(se_conditional_above(|_| Ok(1.5), 1.0, &opts()).is_err());
        assert!(se_conditional_above(smooth, -1.0, &opts()).is_err());
    }
}
