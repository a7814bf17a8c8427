//! Globally adaptive Gauss–Kronrod (7/15) quadrature on finite intervals and
//! on the half line `[0, ∞)`.
//!
//! Half-line integrals are built from geometrically growing panels. Panels are
//! appended until a caller-supplied tail bound certifies that the mass beyond
//! the last panel is below the relative tolerance; the union of panels is then
//! refined globally by bisecting the interval with the largest error.

use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Upper limit on interval bisections during global refinement.
    pub max_subdivisions: usize,
    /// Upper limit on geometric panels appended for half-line integrals.
    pub max_panels: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-6,
            abs_tol: 1e-15,
            max_subdivisions: 4000,
            max_panels: 96,
        }
    }
}

impl QuadratureOptions {
    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Estimated absolute error, including any certified tail bound.
    pub error: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gk15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    let value = kronrod * half;
    let error = ((kronrod - gauss) * half).abs();
    Segment {
        a,
        b,
        value: if value.is_finite() { value } else { f64::NAN },
        error: if error.is_finite() { error } else { f64::INFINITY },
    }
}

struct Adaptive {
    heap: BinaryHeap<Segment>,
    evaluations: usize,
}

impl Adaptive {
    fn new() -> Self {
        Self {
            heap: BinaryHeap::new(),
            evaluations: 0,
        }
    }

    fn push<F: Fn(f64) -> f64>(&mut self, f: &F, a: f64, b: f64) -> f64 {
        let seg = gk15(f, a, b);
        self.evaluations += 15;
        let v = seg.value;
        self.heap.push(seg);
        v
    }

    fn totals(&self) -> (f64, f64) {
        self.heap
            .iter()
            .fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error))
    }

    fn refine<F: Fn(f64) -> f64>(
        &mut self,
        f: &F,
        opts: &QuadratureOptions,
        extra_error: f64,
        context: &'static str,
    ) -> Result<Integral> {
        let mut subdivisions = 0;
        loop {
            let (value, error) = self.totals();
            if value.is_nan() {
                return Err(Error::NumericalFailure {
                    context,
                    achieved: f64::NAN,
                    tolerance: opts.rel_tol,
                    evaluations: self.evaluations,
                });
            }
            let target = opts.abs_tol.max(opts.rel_tol * value.abs());
            if error + extra_error <= target {
                return Ok(Integral {
                    value,
                    error: error + extra_error,
                    evaluations: self.evaluations,
                });
            }
            let worst = match self.heap.pop() {
                Some(s) => s,
                None => {
                    return Ok(Integral {
                        value,
                        error,
                        evaluations: self.evaluations,
                    })
                }
            };
            let mid = 0.5 * (worst.a + worst.b);
            let too_narrow = !(mid > worst.a && mid < worst.b);
            if subdivisions >= opts.max_subdivisions || too_narrow {
                self.heap.push(worst);
                let (value, error) = self.totals();
                let target = opts.abs_tol.max(opts.rel_tol * value.abs());
                // Accept a result that is within a small factor of the target;
                // rounding noise in deeply nested integrands stalls refinement.
                if error + extra_error <= 10.0 * target {
                    return Ok(Integral {
                        value,
                        error: error + extra_error,
                        evaluations: self.evaluations,
                    });
                }
                return Err(Error::NumericalFailure {
                    context,
                    achieved: (error + extra_error) / value.abs().max(f64::MIN_POSITIVE),
                    tolerance: opts.rel_tol,
                    evaluations: self.evaluations,
                });
            }
            self.push(f, worst.a, mid);
            self.push(f, mid, worst.b);
            subdivisions += 1;
        }
    }
}

/// Integrates `f` over the finite interval `[a, b]`.
pub fn integrate<F: Fn(f64) -> f64>(
    f: F,
    a: f64,
    b: f64,
    opts: &QuadratureOptions,
) -> Result<Integral> {
    if a == b {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::invalid("interval", "finite endpoints required"));
    }
    let (lo, hi, sign) = if a < b { (a, b, 1.0) } else { (b, a, -1.0) };
    let mut adaptive = Adaptive::new();
    // A few initial panels keep narrow features from hiding between nodes.
    let pieces = 4;
    let width = (hi - lo) / pieces as f64;
    for i in 0..pieces {
        let x0 = lo + width * i as f64;
        let x1 = if i + 1 == pieces { hi } else { x0 + width };
        adaptive.push(&f, x0, x1);
    }
    let mut out = adaptive.refine(&f, opts, 0.0, "finite-interval quadrature")?;
    out.value *= sign;
    Ok(out)
}

/// Domain description for [`integrate_improper`].
pub struct HalfLine<'a> {
    /// Width of the first panel; subsequent panels double in width.
    pub scale: f64,
    /// The integrand is known to vanish beyond this point.
    pub cutoff: f64,
    /// Upper bound on `∫_x^∞ |f|`. Without one, truncation falls back to
    /// requiring several consecutive negligible panels.
    pub tail_bound: Option<&'a dyn Fn(f64) -> f64>,
}

impl<'a> HalfLine<'a> {
    pub fn new(scale: f64) -> Self {
        Self {
            scale,
            cutoff: f64::INFINITY,
            tail_bound: None,
        }
    }

    pub fn with_cutoff(mut self, cutoff: f64) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub fn with_tail_bound(mut self, tail: &'a dyn Fn(f64) -> f64) -> Self {
        self.tail_bound = Some(tail);
        self
    }
}

/// Integrates `f` over `[0, cutoff)` (default `[0, ∞)`).
pub fn integrate_improper<F: Fn(f64) -> f64>(
    f: F,
    domain: HalfLine<'_>,
    opts: &QuadratureOptions,
) -> Result<Integral> {
    if !(domain.scale > 0.0 && domain.scale.is_finite()) {
        return Err(Error::invalid("scale", "initial panel width must be positive"));
    }
    if domain.cutoff <= 0.0 {
        return Ok(Integral {
            value: 0.0,
            error: 0.0,
            evaluations: 0,
        });
    }
    let mut adaptive = Adaptive::new();
    let mut running = 0.0;
    let mut x0 = 0.0;
    let mut width = domain.scale;
    let mut negligible_streak = 0;
    let mut tail_error = 0.0;
    let mut panels = 0;
    loop {
        let x1 = (x0 + width).min(domain.cutoff);
        let panel = adaptive.push(&f, x0, x1);
        running += panel;
        panels += 1;
        x0 = x1;
        width *= 2.0;
        if x0 >= domain.cutoff {
            break;
        }
        let budget = 0.1 * opts.rel_tol * running.abs();
        if let Some(tail) = domain.tail_bound {
            let t = tail(x0).max(0.0);
            if t <= budget.max(0.1 * opts.abs_tol) {
                tail_error = t;
                break;
            }
        } else {
            if panel.abs() <= budget && running != 0.0 {
                negligible_streak += 1;
            } else {
                negligible_streak = 0;
            }
            if negligible_streak >= 3 {
                break;
            }
        }
        if panels >= opts.max_panels {
            return Err(Error::NumericalFailure {
                context: "half-line truncation",
                achieved: domain.tail_bound.map_or(f64::INFINITY, |t| t(x0)),
                tolerance: opts.rel_tol,
                evaluations: adaptive.evaluations,
            });
        }
    }
    adaptive.refine(&f, opts, tail_error, "half-line quadrature")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_on_half_line() {
        let opts = QuadratureOptions::default().with_rel_tol(1e-11);
        let tail = |x: f64| (-x).exp();
        let r = integrate_improper(|x| (-x).exp(), HalfLine::new(1.0).with_tail_bound(&tail), &opts)
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn exponential_without_tail_bound() {
        let opts = QuadratureOptions::default().with_rel_tol(1e-10);
        let r = integrate_improper(|x| (-x).exp(), HalfLine::new(1.0), &opts).unwrap();
        assert!((r.value - 1.0).abs() < 1e-9, "{r:?}");
    }

    #[test]
    fn los_weighted_mass_closed_form() {
        let (lambda, c, beta) = (4.62e-6, 0.889, 2.95e-3);
        let f = |x: f64| 2.0 * std::f64::consts::PI * lambda * x * c * (-beta * x).exp();
        let exact = 2.0 * std::f64::consts::PI * lambda * c / (beta * beta);
        let tail = |x: f64| exact * (-beta * x).exp() * (1.0 + beta * x);
        let opts = QuadratureOptions::default().with_rel_tol(1e-9);
        let r = integrate_improper(f, HalfLine::new(50.0).with_tail_bound(&tail), &opts).unwrap();
        assert!(((r.value - exact) / exact).abs() < 1e-9, "{} vs {exact}", r.value);
        assert!(r.error <= 1e-9 * exact);
    }

    #[test]
    fn finite_interval_polynomial_and_reversal() {
        let opts = QuadratureOptions::default();
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &opts).unwrap();
        assert!((r.value - 8.0).abs() < 1e-12);
        let r = integrate(|x| 3.0 * x * x, 2.0, 0.0, &opts).unwrap();
        assert!((r.value + 8.0).abs() < 1e-12);
    }

    #[test]
    fn cutoff_truncates_domain() {
        let opts = QuadratureOptions::default().with_rel_tol(1e-10);
        let r = integrate_improper(|_| 1.0, HalfLine::new(0.3).with_cutoff(5.0), &opts).unwrap();
        assert!((r.value - 5.0).abs() < 1e-10);
    }

    #[test]
    fn kink_is_resolved() {
        let opts = QuadratureOptions::default().with_rel_tol(1e-9);
        let r = integrate(|x: f64| (x - 0.3).abs(), 0.0, 1.0, &opts).unwrap();
        let exact = 0.5 * 0.3 * 0.3 + 0.5 * 0.7 * 0.7;
        assert!((r.value - exact).abs() < 1e-9);
    }

    #[test]
    fn non_finite_integrand_is_reported() {
        let opts = QuadratureOptions::default();
        let err = integrate(|_| f64::NAN, 0.0, 1.0, &opts).unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { .. }));
    }

    #[test]
    fn tail_never_certified_is_reported() {
        let opts = QuadratureOptions {
            max_panels: 10,
            ..Default::default()
        };
        let tail = |_: f64| 1.0;
        let err = integrate_improper(|x| 1.0 / (1.0 + x * x), HalfLine::new(1.0).with_tail_bound(&tail), &opts)
            .unwrap_err();
        assert!(matches!(err, Error::NumericalFailure { .. }));
    }
}
