use super::*;
use crate::geometry::{los_void_probability, pdf_nearest_los, ObstacleLaw, UniformRange};
use crate::quadrature::integrate;
use crate::radio::{derive_pattern, normalized_noise, AntennaPattern};
use crate::units::db_to_linear;

fn opts() -> QuadratureOptions {
    QuadratureOptions::default()
}

struct Uma {
    cellular: MmWaveLink,
    d2d: MmWaveLink,
    microwave: MicrowaveLink,
}

fn uma() -> Uma {
    let lambda_b = 4.62e-6;
    let law = ObstacleLaw::cylinders_with_coverage(0.2, UniformRange::new(20.0, 30.0), UniformRange::new(5.0, 25.0))
        .unwrap();
    let los_c = LosModel::with_thinning(&law, 0.5875, 25.0, 1.5).unwrap();
    let los_d = LosModel::with_thinning(&law, 1.0, 1.5, 1.5).unwrap();
    let mm = PathLossModel::new(20.0, 32.4, 20.0, 0.0, 28.0).unwrap();
    let (bs, ue) = (derive_pattern(8).unwrap(), derive_pattern(2).unwrap());
    let cellular = MmWaveLink {
        transmitter_intensity: lambda_b,
        interferer_intensity: lambda_b,
        los: los_c,
        tx_pattern: bs,
        rx_pattern: ue,
        path_loss: mm,
        noise: normalized_noise(-174.0, 100e6, 9.0, 35.0).unwrap(),
        interferers_beyond_serving: true,
    };
    let d2d = MmWaveLink {
        transmitter_intensity: 10.0 * lambda_b,
        interferer_intensity: lambda_b,
        los: los_d,
        tx_pattern: ue,
        rx_pattern: ue,
        path_loss: mm,
        noise: normalized_noise(-174.0, 100e6, 9.0, 23.0).unwrap(),
        interferers_beyond_serving: false,
    };
    let h = 1.5f64.log10();
    let microwave = MicrowaveLink {
        relay_intensity: 10.0 * lambda_b,
        interferer_intensity: lambda_b,
        los: los_d,
        los_path_loss: PathLossModel::new(22.7, 27.0, 20.0, 0.0, 2.0).unwrap(),
        nlos_path_loss: PathLossModel::new(44.9 - 6.55 * h, 14.78 + 5.83 * h, 34.97, 0.0, 2.0).unwrap(),
        noise: normalized_noise(-174.0, 20e6, 9.0, 23.0).unwrap(),
        fading_rate: 1.0,
    };
    Uma {
        cellular,
        d2d,
        microwave,
    }
}

fn ind_cellular(xi: f64) -> MmWaveLink {
    let law = ObstacleLaw::cylinders_with_coverage(xi, UniformRange::new(0.3, 0.6), UniformRange::new(1.0, 2.0)).unwrap();
    MmWaveLink {
        transmitter_intensity: 2e-3,
        interferer_intensity: 2e-3,
        los: LosModel::with_thinning(&law, 0.5, 3.0, 1.0).unwrap(),
        tx_pattern: derive_pattern(8).unwrap(),
        rx_pattern: derive_pattern(2).unwrap(),
        path_loss: PathLossModel::new(17.3, 32.4, 20.0, 0.0, 28.0).unwrap(),
        noise: normalized_noise(-174.0, 100e6, 9.0, 24.0).unwrap(),
        interferers_beyond_serving: true,
    }
}

#[test]
fn radii_cancel_without_noise() {
    let iso = gain_mixture(&AntennaPattern::isotropic(), &AntennaPattern::isotropic());
    let r = interference_radii(1.0, 37.0, 1.0, &iso, 5.0, 2.3, 0.0);
    for d in [r.d1, r.d2, r.d3, r.d4] {
        assert!((d - 37.0).abs() < 1e-10);
    }
    assert!(!r.noise_outage);
}

#[test]
fn radii_flag_noise_outage() {
    let l = uma().cellular;
    let mix = l.mixture();
    let (a, alpha) = (l.path_loss.intercept(), l.path_loss.exponent());
    let d0 = 1.01 * l.noise_radius(10.0);
    assert!(interference_radii(10.0, d0, mix.desired_gain(), &mix, a, alpha, l.noise).noise_outage);
    let d0 = 0.99 * l.noise_radius(10.0);
    assert!(!interference_radii(10.0, d0, mix.desired_gain(), &mix, a, alpha, l.noise).noise_outage);
}

#[test]
fn radii_match_bisection_on_sinr_equality() {
    let l = uma().cellular;
    let mix = l.mixture();
    let (a, alpha, s2) = (l.path_loss.intercept(), l.path_loss.exponent(), l.noise);
    let (tau, d0) = (db_to_linear(10.0), 100.0);
    let g0 = mix.desired_gain();
    let r = interference_radii(tau, d0, g0, &mix, a, alpha, s2);
    let [mm, ms, sm, ss] = mix.gains;
    for (gain, radius) in [(ss, r.d1), (ms, r.d2), (sm, r.d3), (mm, r.d4)] {
        // SINR with one interferer at distance y, decreasing in -y.
        let sinr = |y: f64| g0 * d0.powf(-alpha) / (a * s2 + gain * y.powf(-alpha));
        let (mut lo, mut hi) = (1e-3, 1e6);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if sinr(mid) < tau {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        assert!((radius / lo - 1.0).abs() < 1e-9, "{radius} vs {lo}");
    }
    assert!(r.d1 <= r.d2 && r.d3 <= r.d4);
}

#[test]
fn measures_vanish_without_interferers_and_explode_in_outage() {
    let mut l = uma().cellular;
    assert!(nir_measure(10.0, 1e5, &l).is_infinite());
    assert!(fir_measure(10.0, 1e5, &l).is_infinite());
    l.interferer_intensity = 0.0;
    assert_eq!(nir_measure(10.0, 80.0, &l), 0.0);
    assert_eq!(fir_measure(10.0, 80.0, &l), 0.0);
}

fn measure_by_2d_quadrature(
    link: &MmWaveLink,
    tau: f64,
    d0: f64,
    near: bool,
) -> f64 {
    let r = radii_for(link, tau, d0);
    let lo = lower_limit(link, d0);
    let o = QuadratureOptions::default().with_rel_tol(1e-10);
    let phi = link.rx_pattern.beamwidth;
    let annulus = |theta: f64| {
        let (inner, outer) = match (near, theta < phi) {
            (true, true) => (lo, r.d3.max(lo)),
            (true, false) => (lo, r.d1.max(lo)),
            (false, true) => (r.d3.max(lo), r.d4.max(lo)),
            (false, false) => (r.d1.max(lo), r.d2.max(lo)),
        };
        if outer <= inner {
            return 0.0;
        }
        integrate(
            |x| link.los.c * (-link.los.beta * x).exp() * link.interferer_intensity * x,
            inner,
            outer,
            &o,
        )
        .unwrap()
        .value
    };
    // Split θ at the sector boundary so each piece is smooth.
    let total = integrate(annulus, 0.0, phi, &o).unwrap().value + integrate(annulus, phi, TAU, &o).unwrap().value;
    if near {
        total
    } else {
        link.tx_pattern.main_lobe_probability() * total
    }
}

#[test]
fn measures_match_direct_double_integral() {
    let u = uma();
    for (link, d0) in [(u.cellular, 60.0), (u.cellular, 250.0), (u.d2d, 30.0), (u.d2d, 120.0)] {
        for tau_db in [-5.0, 5.0, 15.0] {
            let tau = db_to_linear(tau_db);
            for near in [true, false] {
                let closed = if near {
                    nir_measure(tau, d0, &link)
                } else {
                    fir_measure(tau, d0, &link)
                };
                let direct = measure_by_2d_quadrature(&link, tau, d0, near);
                assert!(
                    (closed - direct).abs() <= 1e-6 * direct.abs().max(1e-300),
                    "near={near} tau={tau_db} d0={d0}: {closed} vs {direct}"
                );
            }
        }
    }
}

#[test]
fn cellular_curve_is_monotone_probability() {
    let l = uma().cellular;
    let mut last = 1.0;
    for k in -20..=40 {
        let p = coverage_mmwave(&l, db_to_linear(k as f64), &opts()).unwrap();
        assert!((0.0..=1.0).contains(&p));
        assert!(p <= last + 1e-9, "tau {k} dB: {p} > {last}");
        last = p;
    }
    assert!(coverage_mmwave(&l, 1e6, &opts()).unwrap() <= 1e-3);
}

#[test]
fn cellular_integrand_is_stable_under_panel_halving() {
    let l = uma().cellular;
    let tau = db_to_linear(10.0);
    let tight = QuadratureOptions::default().with_rel_tol(1e-9);
    let tail = los_tail(l.transmitter_intensity, &l.los);
    let run = |scale: f64| {
        let domain = HalfLine::new(scale).with_cutoff(l.noise_radius(tau)).with_tail_bound(&tail);
        integrate_improper(|x| mmwave_integrand(&l, tau, x), domain, &tight).unwrap().value
    };
    let base = initial_panel(l.transmitter_intensity);
    let (a, b) = (run(base), run(0.5 * base));
    assert!((a - b).abs() <= 1e-6 * a, "{a} vs {b}");
}

#[test]
fn d2d_edge_cases() {
    let mut l = uma().d2d;
    l.transmitter_intensity = 0.0;
    assert_eq!(coverage_mmwave(&l, 1.0, &opts()).unwrap(), 0.0);
    let mut l = uma().d2d;
    l.interferer_intensity = 0.0;
    l.noise = 1e-30;
    let p = coverage_mmwave(&l, 1e-6, &opts()).unwrap();
    let exists = 1.0 - los_void_probability(l.transmitter_intensity, &l.los);
    assert!((p - exists).abs() < 1e-6, "{p} vs {exists}");
}

#[test]
fn noise_limited_is_nearest_los_cdf() {
    let u = uma();
    for link in [u.cellular, u.d2d] {
        for tau_db in [-10.0, 0.0, 10.0, 25.0] {
            let tau = db_to_linear(tau_db);
            let p = coverage_noise_limited(&link, tau).unwrap();
            let r = link.noise_radius(tau);
            let lambda = link.transmitter_intensity;
            assert!((p - (1.0 - (-expected_los_count(r, lambda, &link.los)).exp())).abs() < 1e-15);
            let o = QuadratureOptions::default().with_rel_tol(1e-10);
            let q = integrate(|x| pdf_nearest_los(x, lambda, &link.los), 0.0, r, &o).unwrap().value;
            assert!((p - q).abs() < 1e-8, "{p} vs {q}");
        }
        assert!(coverage_noise_limited(&link, 1e30).unwrap() < 1e-12);
    }
}

#[test]
fn noise_limited_upper_bounds_dominant_interferer_bound() {
    let l = uma().cellular;
    for tau_db in [-10.0, 0.0, 10.0, 20.0] {
        let tau = db_to_linear(tau_db);
        assert!(coverage_noise_limited(&l, tau).unwrap() >= coverage_mmwave(&l, tau, &opts()).unwrap() - 1e-9);
    }
}

#[test]
fn ind_curve_monotone_with_breakpoint() {
    let l = ind_cellular(0.08);
    let mix = l.mixture();
    let g0 = mix.desired_gain();
    let (a, alpha) = (l.path_loss.intercept(), l.path_loss.exponent());
    // Threshold where D₁ reaches d₀: g_ss τ = g₀ − τAσ²d₀^α.
    let d0 = 10.0f64;
    let tau_b = g0 / (mix.gains[3] + a * l.noise * d0.powf(alpha));
    let r = interference_radii(tau_b, d0, g0, &mix, a, alpha, l.noise);
    assert!((r.d1 / d0 - 1.0).abs() < 1e-9);
    let just_below = interference_radii(0.999 * tau_b, d0, g0, &mix, a, alpha, l.noise);
    assert!(just_below.d1 < d0);
    let mut last = 1.0;
    for k in -10..=40 {
        let p = coverage_mmwave(&l, db_to_linear(k as f64), &opts()).unwrap();
        assert!(p <= last + 1e-9);
        last = p;
    }
}

#[test]
fn association_limits() {
    let mut l = uma().microwave;
    let (s_l, s_n) = association_probs_microwave(&l, &opts()).unwrap();
    assert!((s_l + s_n - 1.0).abs() < 1e-9);
    assert!(s_l > 0.0 && s_l < 1.0);
    l.los = LosModel {
        c: 1.0,
        beta: 1e-9,
        ..l.los
    };
    let (s_l, _) = association_probs_microwave(&l, &opts()).unwrap();
    assert!(s_l > 1.0 - 1e-6, "{s_l}");
    l.los = LosModel {
        c: 1e-12,
        beta: 1e-3,
        ..l.los
    };
    let (s_l, _) = association_probs_microwave(&l, &opts()).unwrap();
    assert!(s_l < 1e-9);
    l.relay_intensity = 0.0;
    assert!(association_probs_microwave(&l, &opts()).is_err());
}

#[test]
fn laplace_transform_closed_forms() {
    assert_eq!(laplace_interference(0.0, 1e-5, 3.8).unwrap(), 1.0);
    let (lam, s) = (2e-5, 300.0f64);
    let expected = (-std::f64::consts::PI * lam * s.sqrt() * std::f64::consts::FRAC_PI_2).exp();
    assert!((laplace_interference(s, lam, 4.0).unwrap() - expected).abs() < 1e-15);
    assert!(laplace_interference(1.0, 1e-5, 2.0).is_err());
    assert!(laplace_interference(1.0, 1e-5, 1.5).is_err());
}

#[test]
fn laplace_transform_matches_monte_carlo() {
    use crate::geometry::{sample_ppp, Window};
    use crate::radio::sample_fading;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    // Use a larger s than the nominal anchor so the transform is far from 1.
    for (lam, s, alpha) in [(1e-5, 1e3, 3.8), (1e-3, 1e3, 3.8)] {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let window = Window::disc(400.0);
        let n = 40_000;
        let mut acc = 0.0;
        for _ in 0..n {
            let pts = sample_ppp(lam, &window, &mut rng).unwrap();
            let i: f64 = pts
                .points
                .iter()
                .map(|p| sample_fading(1.0, &mut rng) * p.norm().powf(-alpha))
                .sum();
            acc += (-s * i).exp();
        }
        let mc = acc / n as f64;
        let exact = laplace_interference(s, lam, alpha).unwrap();
        assert!((mc / exact - 1.0).abs() < 0.01, "{mc} vs {exact}");
    }
}

#[test]
fn microwave_edge_cases() {
    let mut l = uma().microwave;
    let c = coverage_microwave(&l, 10.0, &opts()).unwrap();
    assert!((0.0..=1.0).contains(&c.value));
    assert!((c.s_los + c.s_nlos - 1.0).abs() < 1e-12);
    l.noise = 1e300;
    assert!(coverage_microwave(&l, 1.0, &opts()).unwrap().value < 1e-12);
    let mut l = uma().microwave;
    l.relay_intensity = 0.0;
    assert_eq!(coverage_microwave(&l, 1.0, &opts()).unwrap().value, 0.0);
}

#[test]
fn microwave_curve_monotone() {
    let l = uma().microwave;
    let mut last = 1.0;
    for k in -10..=30 {
        let p = coverage_microwave(&l, db_to_linear(k as f64), &opts()).unwrap().value;
        assert!(p <= last + 1e-9);
        last = p;
    }
}

#[test]
fn overall_combination() {
    assert_eq!(coverage_overall(0.37, 0.0).unwrap(), 0.37);
    assert_eq!(coverage_overall(1.0, 0.42).unwrap(), 1.0);
    assert!((coverage_overall(0.6, 0.5).unwrap() - 0.72).abs() < 1e-15);
    assert!(coverage_overall(1.2, 0.5).is_err());
    assert!(coverage_overall(0.5, -0.1).is_err());
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn relaying_never_hurts(p in 0.0f64..=1.0, q in 0.0f64..=1.0) {
            let v = coverage_overall(p, q).unwrap();
            prop_assert!(v >= p - 1e-15);
            prop_assert!(v <= 1.0 + 1e-15);
        }
    }
}

#[test]
fn sweep_matches_pointwise() {
    let u = uma();
    let inputs = CoverageInputs {
        cellular: u.cellular,
        mmwave_d2d: u.d2d,
        microwave_d2d: u.microwave,
        quadrature: opts(),
    };
    let taus = [0.5, 10.0, 100.0];
    let kind = CoverageKind::Overall(crate::radio::Band::Microwave);
    let swept = coverage_sweep(&inputs, kind, &taus).unwrap();
    for (t, v) in taus.iter().zip(&swept) {
        let p_c = coverage_mmwave_cellular(&inputs, *t).unwrap();
        let p_d = coverage_microwave_d2d(&inputs, *t).unwrap();
        assert_eq!(*v, coverage_overall(p_c, p_d).unwrap());
    }
}
