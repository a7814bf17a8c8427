use std::f64::consts::{PI, TAU};
use std::sync::Arc;

use rand::Rng;

use super::{Blockage, Layout};
use crate::error::{Error, Result};
use crate::geometry::{is_los, los_probability, sample_obstacles, sample_ppp, LosModel, ObstacleField, Point, Window};
use crate::radio::{sample_fading, AntennaPattern, PathLossModel};
use crate::scenario::{RelayBand, Scenario};

/// One random network as seen from the typical destination UE at the origin.
#[derive(Debug, Clone)]
pub struct NetworkRealization {
    pub window: Window,
    pub bss: Vec<Point>,
    pub relays: Vec<Point>,
    /// Active uplink transmitters, intensity ρλ_b.
    pub uplink: Vec<Point>,
    /// Explicit obstacles, when blockage is geometric.
    pub field: Option<Arc<ObstacleField>>,
    pub bs_los: Vec<bool>,
    pub relay_los: Vec<bool>,
    pub uplink_los: Vec<bool>,
    /// Beam directions of the BSs toward their own users.
    pub bs_boresight: Vec<f64>,
    pub uplink_boresight: Vec<f64>,
    /// Microwave power fading of the desired link and of each uplink interferer.
    pub desired_fading: f64,
    pub uplink_fading: Vec<f64>,
    pub bs_height: f64,
    pub ue_height: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LinkType {
    Cellular,
    MmwaveD2d,
    MicrowaveD2d,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Association {
    pub index: usize,
    pub distance: f64,
    pub los: bool,
}

/// Received powers normalized by the transmit power.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkSample {
    pub signal: f64,
    pub noise: f64,
    /// Sum over all interferers.
    pub interference: f64,
    /// Strongest single interferer.
    pub max_term: f64,
}

impl LinkSample {
    pub fn sinr(&self) -> f64 {
        self.signal / (self.noise + self.interference)
    }

    /// SINR with only the strongest interferer: exceeding τ here means no
    /// interferer is dominant on its own.
    pub fn dominant_sinr(&self) -> f64 {
        self.signal / (self.noise + self.max_term)
    }
}

fn los_flags<R: Rng + ?Sized>(
    points: &[Point],
    h_tx: f64,
    h_rx: f64,
    model: &LosModel,
    field: Option<&ObstacleField>,
    rng: &mut R,
) -> Vec<bool> {
    match field {
        Some(f) => points.iter().map(|&p| is_los(p, h_tx, Point::ORIGIN, h_rx, f)).collect(),
        None => points
            .iter()
            .map(|p| rng.random::<f64>() < los_probability(p.norm(), model))
            .collect(),
    }
}

fn hex_site(isd: f64, q: i32, r: i32) -> Point {
    Point::new(isd * (q as f64 + 0.5 * r as f64), isd * r as f64 * 3f64.sqrt() / 2.0)
}

/// Sites of a two-ring hexagonal layout centered on the origin.
pub fn hex_sites(isd: f64) -> Vec<Point> {
    let mut sites = Vec::with_capacity(19);
    for q in -2i32..=2 {
        for r in -2i32..=2 {
            if (q + r).abs() <= 2 {
                sites.push(hex_site(isd, q, r));
            }
        }
    }
    sites
}

fn in_center_cell(p: Point, isd: f64) -> bool {
    (0..6).all(|k| {
        let n = Point::polar(1.0, k as f64 * PI / 3.0);
        p.dot(n).abs() <= isd / 2.0
    })
}

/// Cell centers of the indoor hall: 6 × 2 cells of 20 m × 25 m in a 120 m × 50 m floor.
pub fn ind_grid_sites() -> Vec<Point> {
    let mut sites = Vec::with_capacity(12);
    for j in 0..2 {
        for i in 0..6 {
            sites.push(Point::new(10.0 + 20.0 * i as f64, 12.5 + 25.0 * j as f64));
        }
    }
    sites
}

pub const IND_HALL: (f64, f64) = (120.0, 50.0);

fn shift_window(window: Window, by: Point) -> Window {
    match window {
        Window::Disc { center, radius } => Window::Disc {
            center: center - by,
            radius,
        },
        Window::Rect { min, max } => Window::Rect {
            min: min - by,
            max: max - by,
        },
    }
}

/// Draws every random element of one network realization.
pub fn drop_network<R: Rng + ?Sized>(
    scenario: &Scenario,
    layout: &Layout,
    blockage: &Blockage,
    radius: f64,
    rng: &mut R,
) -> Result<NetworkRealization> {
    if !(radius > 0.0 && radius.is_finite()) {
        return Err(Error::invalid("window radius", format!("must be positive, got {radius}")));
    }
    let h_bs = scenario.config.heights.bs_antenna_height_m;
    let h_ue = scenario.config.heights.ue_antenna_height_m;

    let (window, bss) = match layout {
        Layout::Ppp | Layout::Footprints(_) => {
            let w = Window::disc(radius);
            (w, sample_ppp(scenario.bs_intensity, &w, rng)?.points)
        }
        Layout::Hex { isd } => {
            let bound = isd / 3f64.sqrt();
            let ue = loop {
                let p = Point::new(rng.random_range(-bound..bound), rng.random_range(-bound..bound));
                if in_center_cell(p, *isd) {
                    break p;
                }
            };
            let sites = hex_sites(*isd).into_iter().map(|s| s - ue).collect();
            (Window::disc(radius), sites)
        }
        Layout::IndGrid => {
            let ue = Point::new(rng.random_range(0.0..IND_HALL.0), rng.random_range(0.0..IND_HALL.1));
            let sites = ind_grid_sites().into_iter().map(|s| s - ue).collect();
            (shift_window(Window::rect(IND_HALL.0, IND_HALL.1), ue), sites)
        }
    };

    let relays = sample_ppp(scenario.relay_intensity, &window, rng)?.points;
    let uplink = sample_ppp(scenario.uplink_intensity, &window, rng)?.points;

    let field = match (layout, blockage) {
        (Layout::Footprints(f), _) => Some(f.clone()),
        (_, Blockage::Geometric) => Some(Arc::new(sample_obstacles(&scenario.obstacles, &window, rng)?)),
        (_, Blockage::Bernoulli) => None,
    };
    let f = field.as_deref();
    let bs_los = los_flags(&bss, h_bs, h_ue, &scenario.los_cellular, f, rng);
    let relay_los = los_flags(&relays, h_ue, h_ue, &scenario.los_d2d, f, rng);
    let uplink_los = los_flags(&uplink, h_ue, h_ue, &scenario.los_d2d, f, rng);
    let bs_boresight = bss.iter().map(|_| rng.random::<f64>() * TAU).collect();
    let uplink_boresight = uplink.iter().map(|_| rng.random::<f64>() * TAU).collect();
    let mu = scenario.config.analysis.fading_rate;
    let desired_fading = sample_fading(mu, rng);
    let uplink_fading = uplink.iter().map(|_| sample_fading(mu, rng)).collect();

    Ok(NetworkRealization {
        window,
        bss,
        relays,
        uplink,
        field,
        bs_los,
        relay_los,
        uplink_los,
        bs_boresight,
        uplink_boresight,
        desired_fading,
        uplink_fading,
        bs_height: h_bs,
        ue_height: h_ue,
    })
}

fn nearest(points: &[Point], mask: &[bool], want: bool) -> Option<Association> {
    points
        .iter()
        .zip(mask)
        .enumerate()
        .filter(|(_, (_, &los))| los == want)
        .map(|(index, (p, &los))| Association {
            index,
            distance: p.norm(),
            los,
        })
        .min_by(|a, b| a.distance.total_cmp(&b.distance))
}

/// Serving transmitter of the typical UE: the nearest LOS one for mmWave links,
/// the smallest-path-loss one among the nearest LOS and nearest NLOS relays
/// for microwave.
pub fn associate(real: &NetworkRealization, scenario: &Scenario, link: LinkType) -> Option<Association> {
    match link {
        LinkType::Cellular => nearest(&real.bss, &real.bs_los, true),
        LinkType::MmwaveD2d => nearest(&real.relays, &real.relay_los, true),
        LinkType::MicrowaveD2d => {
            let los = nearest(&real.relays, &real.relay_los, true);
            let nlos = nearest(&real.relays, &real.relay_los, false);
            let loss = |a: &Association, m: &PathLossModel| m.intercept() * a.distance.powf(m.exponent());
            match (los, nlos) {
                (Some(l), Some(n)) => {
                    if loss(&l, &scenario.path_loss_microwave_los) <= loss(&n, &scenario.path_loss_microwave_nlos) {
                        Some(l)
                    } else {
                        Some(n)
                    }
                }
                (l, n) => l.or(n),
            }
        }
    }
}

fn within_lobe(direction: f64, boresight: f64, pattern: &AntennaPattern) -> bool {
    let diff = (direction - boresight).rem_euclid(TAU);
    diff.min(TAU - diff) <= pattern.beamwidth / 2.0
}

/// Beamformed LOS interference at the origin with the receiver steered toward `serving`.
#[allow(clippy::too_many_arguments)]
fn mmwave_interference(
    points: &[Point],
    los: &[bool],
    boresight: &[f64],
    skip: Option<usize>,
    serving: Point,
    tx: &AntennaPattern,
    rx: &AntennaPattern,
    model: &PathLossModel,
) -> (f64, f64) {
    let rx_dir = serving.angle();
    let (a, alpha) = (model.intercept(), model.exponent());
    let mut total = 0.0;
    let mut max_term = 0.0f64;
    for (k, p) in points.iter().enumerate() {
        if !los[k] || Some(k) == skip {
            continue;
        }
        let d = p.norm();
        if d <= 0.0 {
            continue;
        }
        let toward_ue = (Point::ORIGIN - *p).angle();
        let g_tx = if within_lobe(toward_ue, boresight[k], tx) { tx.main_gain } else { tx.side_gain };
        let g_rx = if within_lobe(p.angle(), rx_dir, rx) { rx.main_gain } else { rx.side_gain };
        let term = g_tx * g_rx / (a * d.powf(alpha));
        total += term;
        max_term = max_term.max(term);
    }
    (total, max_term)
}

/// Downlink mmWave SINR ingredients with every LOS BS other than the server interfering.
pub fn sinr_downlink(real: &NetworkRealization, scenario: &Scenario) -> Option<LinkSample> {
    let serving = associate(real, scenario, LinkType::Cellular)?;
    let (tx, rx, model) = (&scenario.bs_pattern, &scenario.ue_pattern, &scenario.path_loss_cellular);
    let target = real.bss[serving.index];
    let (interference, max_term) = mmwave_interference(
        &real.bss,
        &real.bs_los,
        &real.bs_boresight,
        Some(serving.index),
        target,
        tx,
        rx,
        model,
    );
    Some(LinkSample {
        signal: tx.main_gain * rx.main_gain / (model.intercept() * serving.distance.powf(model.exponent())),
        noise: scenario.noise_cellular,
        interference,
        max_term,
    })
}

/// Relay-to-destination SINR ingredients in the requested band.
pub fn sinr_d2d(real: &NetworkRealization, scenario: &Scenario, band: RelayBand) -> Option<LinkSample> {
    match band {
        RelayBand::Mmwave => {
            let serving = associate(real, scenario, LinkType::MmwaveD2d)?;
            let pattern = &scenario.ue_pattern;
            let model = &scenario.path_loss_mmwave_d2d;
            let (interference, max_term) = mmwave_interference(
                &real.uplink,
                &real.uplink_los,
                &real.uplink_boresight,
                None,
                real.relays[serving.index],
                pattern,
                pattern,
                model,
            );
            Some(LinkSample {
                signal: pattern.main_gain * pattern.main_gain
                    / (model.intercept() * serving.distance.powf(model.exponent())),
                noise: scenario.noise_mmwave_d2d,
                interference,
                max_term,
            })
        }
        RelayBand::Microwave => {
            let serving = associate(real, scenario, LinkType::MicrowaveD2d)?;
            let model = if serving.los {
                &scenario.path_loss_microwave_los
            } else {
                &scenario.path_loss_microwave_nlos
            };
            let nlos = &scenario.path_loss_microwave_nlos;
            let (a, alpha) = (nlos.intercept(), nlos.exponent());
            let mut interference = 0.0;
            let mut max_term = 0.0f64;
            for (p, h) in real.uplink.iter().zip(&real.uplink_fading) {
                let d = p.norm();
                if d > 0.0 {
                    let term = h / (a * d.powf(alpha));
                    interference += term;
                    max_term = max_term.max(term);
                }
            }
            Some(LinkSample {
                signal: real.desired_fading / (model.intercept() * serving.distance.powf(model.exponent())),
                noise: scenario.noise_microwave_d2d,
                interference,
                max_term,
            })
        }
    }
}
