//! Monte-Carlo system-level simulator used as the independent oracle for the
//! analytic results: PPP, hexagonal and indoor-grid layouts, full-interference
//! SINR with blockage and beamforming, smallest-path-loss association and
//! coverage estimates with Wilson confidence intervals.
//!
//! Every drop draws from its own ChaCha8 stream (`seed`, drop index), so a
//! run is reproducible bit for bit regardless of the rayon thread count.

mod los_curve;
mod network;

pub use los_curve::{
    empirical_los_curve, ks_distance, sample_nearest_distances, FieldSource, LosCurve, NearestDistances,
};
pub use network::{
    associate, drop_network, hex_sites, ind_grid_sites, sinr_d2d, sinr_downlink, Association, LinkSample, LinkType,
    NetworkRealization, IND_HALL,
};

use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{read_footprints, LosModel, ObstacleField};
use crate::scenario::{LayoutKind, RelayBand, Scenario};

/// Two-sided 99% normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Ppp,
    /// Two-ring, 19-site hexagonal grid with the UE uniform in the center cell.
    Hex { isd: f64 },
    /// 12 ceiling BSs in a 120 m × 50 m hall.
    IndGrid,
    /// Fixed imported obstacle footprints with PPP base stations.
    Footprints(Arc<ObstacleField>),
}

impl Layout {
    pub fn from_scenario(scenario: &Scenario) -> Result<Self> {
        let l = &scenario.config.layout;
        Ok(match l.kind {
            LayoutKind::Ppp => Layout::Ppp,
            LayoutKind::Hex => Layout::Hex {
                isd: l.isd_m.ok_or_else(|| Error::config("layout.isd_m", "required for the `hex` layout"))?,
            },
            LayoutKind::IndGrid => Layout::IndGrid,
            LayoutKind::Footprints => {
                let path = l
                    .footprint_file
                    .as_ref()
                    .ok_or_else(|| Error::config("layout.footprint_file", "required for the `footprints` layout"))?;
                Layout::Footprints(Arc::new(read_footprints(path)?))
            }
        })
    }

    pub fn name(&self) -> &'static str {
        match self {
            Layout::Ppp => "ppp",
            Layout::Hex { .. } => "hex",
            Layout::IndGrid => "ind-grid",
            Layout::Footprints(_) => "footprints",
        }
    }
}

/// How links are declared blocked.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Blockage {
    /// Independent per-link LOS draws from the exponential LOS law.
    #[default]
    Bernoulli,
    /// Explicit cylinders sampled per drop and tested with 3D line of sight.
    Geometric,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOptions {
    pub n_drops: usize,
    pub seed: u64,
    pub blockage: Blockage,
    /// Overrides the certified window radius.
    pub window_radius: Option<f64>,
}

impl SimOptions {
    pub fn new(n_drops: usize, seed: u64) -> Self {
        Self {
            n_drops,
            seed,
            blockage: Blockage::Bernoulli,
            window_radius: None,
        }
    }

    pub fn with_blockage(mut self, blockage: Blockage) -> Self {
        self.blockage = blockage;
        self
    }

    pub fn with_window_radius(mut self, radius: f64) -> Self {
        self.window_radius = Some(radius);
        self
    }
}

fn los_radius(lambda: f64, model: &LosModel) -> f64 {
    if lambda <= 0.0 {
        return 0.0;
    }
    let spacing = 2.5 / lambda.sqrt();
    if model.beta > 0.0 {
        spacing.max((model.c * 1e4).max(1.0).ln() / model.beta)
    } else {
        spacing.max(40.0 / lambda.sqrt())
    }
}

/// Window radius beyond which LOS probability drops below 1e-4, at least five
/// mean nearest-neighbor distances, and large enough that the microwave
/// interference from outside is under 1e-3 of that from within.
pub fn certified_radius(scenario: &Scenario) -> f64 {
    let mut r = los_radius(scenario.bs_intensity, &scenario.los_cellular)
        .max(los_radius(scenario.relay_intensity, &scenario.los_d2d))
        .max(los_radius(scenario.uplink_intensity, &scenario.los_d2d));
    if scenario.uplink_intensity > 0.0 {
        let alpha = scenario.path_loss_microwave_nlos.exponent();
        let r1 = 0.5 / scenario.uplink_intensity.sqrt();
        r = r.max(r1 * 1e3f64.powf(1.0 / (alpha - 2.0)));
    }
    r
}

/// Independent RNG for drop `index` of a run.
pub fn drop_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Which links a drop evaluates.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DropPlan {
    pub cellular: bool,
    /// Access band of the relay path; also evaluates the BS-to-relay hop.
    pub relay: Option<RelayBand>,
    /// Evaluate the relay access link without the BS-to-relay hop.
    pub access_only: bool,
}

impl DropPlan {
    pub fn cellular() -> Self {
        Self {
            cellular: true,
            relay: None,
            access_only: false,
        }
    }

    pub fn d2d(band: RelayBand) -> Self {
        Self {
            cellular: false,
            relay: Some(band),
            access_only: true,
        }
    }

    pub fn two_hop(band: RelayBand) -> Self {
        Self {
            cellular: true,
            relay: Some(band),
            access_only: false,
        }
    }
}

/// Link samples of one drop; `None` means no serving transmitter (or not evaluated).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct DropSample {
    pub cellular: Option<LinkSample>,
    /// BS-to-relay hop, drawn from an independent realization.
    pub relay_hop: Option<LinkSample>,
    /// Relay-to-destination link.
    pub access: Option<LinkSample>,
}

fn sinr_of(sample: Option<LinkSample>) -> f64 {
    sample.map_or(0.0, |s| s.sinr())
}

impl DropSample {
    pub fn direct_covered(&self, tau: f64) -> bool {
        sinr_of(self.cellular) > tau
    }

    pub fn access_covered(&self, tau: f64) -> bool {
        sinr_of(self.access) > tau
    }

    /// Direct link, or else both hops through the associated relay.
    pub fn relay_covered(&self, tau: f64) -> bool {
        self.direct_covered(tau) || (sinr_of(self.relay_hop) > tau && self.access_covered(tau))
    }
}

/// Runs `opts.n_drops` independent drops in parallel.
pub fn sample_drops(scenario: &Scenario, layout: &Layout, plan: DropPlan, opts: &SimOptions) -> Result<Vec<DropSample>> {
    if opts.n_drops == 0 {
        return Err(Error::invalid("n_drops", "need at least one drop"));
    }
    let radius = opts.window_radius.unwrap_or_else(|| certified_radius(scenario));
    (0..opts.n_drops as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = drop_rng(opts.seed, i);
            let real = drop_network(scenario, layout, &opts.blockage, radius, &mut rng)?;
            let mut out = DropSample::default();
            if plan.cellular {
                out.cellular = sinr_downlink(&real, scenario);
            }
            if let Some(band) = plan.relay {
                out.access = sinr_d2d(&real, scenario, band);
                if !plan.access_only {
                    let hop = drop_network(scenario, layout, &opts.blockage, radius, &mut rng)?;
                    out.relay_hop = sinr_downlink(&hop, scenario);
                }
            }
            Ok(out)
        })
        .collect()
}

/// Wilson score interval for `successes` out of `n` at normal quantile `z`.
pub fn wilson_interval(successes: usize, n: usize, z: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let n = n as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SimCurve {
    Cellular,
    D2d(RelayBand),
    /// Direct link with relay fallback.
    Overall(RelayBand),
}

impl SimCurve {
    pub fn plan(self) -> DropPlan {
        match self {
            SimCurve::Cellular => DropPlan::cellular(),
            SimCurve::D2d(band) => DropPlan::d2d(band),
            SimCurve::Overall(band) => DropPlan::two_hop(band),
        }
    }

    pub fn covered(self, drop: &DropSample, tau: f64) -> bool {
        match self {
            SimCurve::Cellular => drop.direct_covered(tau),
            SimCurve::D2d(_) => drop.access_covered(tau),
            SimCurve::Overall(_) => drop.relay_covered(tau),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageCurve {
    /// Linear SINR thresholds.
    pub grid: Vec<f64>,
    pub successes: Vec<usize>,
    pub estimate: Vec<f64>,
    /// Half-width of the Wilson 99% interval.
    pub ci_halfwidth: Vec<f64>,
    pub n_drops: usize,
    pub seed: u64,
    pub config_digest: String,
}

impl CoverageCurve {
    pub fn from_counts(grid: Vec<f64>, successes: Vec<usize>, n_drops: usize, seed: u64, digest: &str) -> Self {
        let estimate = successes.iter().map(|&k| k as f64 / n_drops as f64).collect();
        let ci_halfwidth = successes
            .iter()
            .map(|&k| {
                let (lo, hi) = wilson_interval(k, n_drops, Z99);
                0.5 * (hi - lo)
            })
            .collect();
        Self {
            grid,
            successes,
            estimate,
            ci_halfwidth,
            n_drops,
            seed,
            config_digest: digest.to_string(),
        }
    }
}

/// Fraction of drops covered at each threshold of `taus`.
pub fn estimate_coverage(
    scenario: &Scenario,
    layout: &Layout,
    curve: SimCurve,
    taus: &[f64],
    opts: &SimOptions,
) -> Result<CoverageCurve> {
    let drops = sample_drops(scenario, layout, curve.plan(), opts)?;
    let successes = taus
        .iter()
        .map(|&t| drops.iter().filter(|d| curve.covered(d, t)).count())
        .collect();
    Ok(CoverageCurve::from_counts(
        taus.to_vec(),
        successes,
        opts.n_drops,
        opts.seed,
        &scenario.digest,
    ))
}
