//! Monte Carlo spectral efficiency from the SIR definitions.
//!
//! Each spatial replication samples BSs and users, associates and schedules
//! them, then averages `ln(1 + SIR)` over independent Rayleigh fading draws.
//! mmW interferers must be within the LOS distance of the receiver and point
//! their main lobe at it. Replication `r` draws from stream `r` of the master
//! seed and results are reduced in index order, so output does not depend on
//! the thread count.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use rand_distr::{Distribution, Exp1};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::statistics::Statistics;

use crate::analytic_se::{se_mmw_bounds_integral, se_muw_bounds, NetworkParams, SeBounds};
use crate::error::{invalid, Error, Result};
use crate::pointprocess::{
    active_bs_probability, associate_strongest, sample_ppp, schedule_active, AssociationMap, Point2D,
    PointSet, TierRadio, Window,
};
use crate::rng::{replication_stream, Stream};

/// Expected user count below which a window is considered too small.
pub const MIN_EXPECTED_USERS: f64 = 1e3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Tier {
    Mmw,
    Muw,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Direction {
    Dl,
    Ul,
}

/// Which receivers a replication averages over.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ReceiverMode {
    /// The user nearest the window centre.
    Typical,
    /// Every scheduled link; users without a serving BS contribute zero.
    All,
}

macro_rules! text_enum {
    ($t:ty, $($v:path => $s:literal),+) => {
        impl $t {
            pub fn as_str(self) -> &'static str {
                match self { $($v => $s),+ }
            }
        }
        impl fmt::Display for $t {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str(self.as_str())
            }
        }
        impl FromStr for $t {
            type Err = Error;
            fn from_str(s: &str) -> Result<Self> {
                match s.to_ascii_lowercase().as_str() {
                    $($s => Ok($v),)+
                    other => Err(Error::Domain(format!("unknown {} `{other}`", stringify!($t).to_ascii_lowercase()))),
                }
            }
        }
    };
}

text_enum!(Tier, Tier::Mmw => "mmw", Tier::Muw => "muw");
text_enum!(Direction, Direction::Dl => "dl", Direction::Ul => "ul");
text_enum!(ReceiverMode, ReceiverMode::Typical => "typical", ReceiverMode::All => "all");

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub params: NetworkParams,
    pub window: Window,
    /// Replications per batch; at least this many are always run.
    pub replications: usize,
    /// Keep adding batches until this many replications saw interference.
    pub min_usable: usize,
    /// Hard cap on replications when extending.
    pub max_replications: usize,
    pub fading_draws: usize,
    pub master_seed: u64,
    pub tier: Tier,
    pub direction: Direction,
    /// mmW UL received by mmW and μW BSs alike.
    pub decoupled: bool,
    pub receivers: ReceiverMode,
}

impl SimConfig {
    /// Defaults: window holding 10³ expected users, 200 replications,
    /// 20 fading draws.
    pub fn new(params: NetworkParams, tier: Tier, direction: Direction) -> Result<Self> {
        Ok(Self {
            params,
            window: Window::for_expected_count(params.lambda_u, MIN_EXPECTED_USERS)?,
            replications: 200,
            min_usable: 0,
            max_replications: 200,
            fading_draws: 20,
            master_seed: 1,
            tier,
            direction,
            decoupled: false,
            receivers: ReceiverMode::Typical,
        })
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.replications == 0 {
            return Err(invalid("replications", 0.0, "must be at least 1"));
        }
        if self.fading_draws == 0 {
            return Err(invalid("fading_draws", 0.0, "must be at least 1"));
        }
        if self.decoupled && (self.tier, self.direction) != (Tier::Mmw, Direction::Ul) {
            return Err(Error::Domain("decoupling applies to the mmW uplink only".into()));
        }
        Ok(())
    }

    /// Non-fatal concerns about the configuration.
    pub fn warnings(&self) -> Vec<String> {
        let mut out = Vec::new();
        let users = self.params.lambda_u * self.window.area();
        if users < MIN_EXPECTED_USERS {
            out.push(format!(
                "window holds {users:.0} expected users (< {MIN_EXPECTED_USERS:.0}); edge effects may bias the estimate"
            ));
        }
        if self.bs_density() < self.params.lambda_u {
            out.push("BS-to-user ratio below 1: outside the ultra-dense regime".into());
        }
        out
    }

    pub fn bs_density(&self) -> f64 {
        match self.tier {
            Tier::Mmw => self.params.lambda_m,
            Tier::Muw => self.params.lambda_mu,
        }
    }

    pub fn lambda_hat(&self) -> f64 {
        self.bs_density() / self.params.lambda_u
    }

    /// Copy with the simulated tier's density set from a BS-to-user ratio.
    pub fn with_lambda_hat(mut self, lambda_hat: f64) -> Self {
        match self.tier {
            Tier::Mmw => self.params.lambda_m = lambda_hat * self.params.lambda_u,
            Tier::Muw => self.params.lambda_mu = lambda_hat * self.params.lambda_u,
        }
        self
    }

    fn alpha(&self) -> f64 {
        match self.tier {
            Tier::Mmw => self.params.alpha_m,
            Tier::Muw => self.params.alpha_mu,
        }
    }

    fn tx_power(&self) -> f64 {
        let p = &self.params;
        match (self.tier, self.direction) {
            (Tier::Mmw, Direction::Dl) => p.p_m_dl,
            (Tier::Mmw, Direction::Ul) => p.p_m_ul,
            (Tier::Muw, Direction::Dl) => p.p_mu_dl,
            (Tier::Muw, Direction::Ul) => p.p_mu_ul,
        }
    }

    fn los_radius(&self) -> Option<f64> {
        match self.tier {
            Tier::Mmw if self.params.r_los.is_finite() => Some(self.params.r_los),
            _ => None,
        }
    }

    /// Whether a mmW main lobe can miss a receiver at all.
    fn beam_limited(&self) -> bool {
        self.tier == Tier::Mmw && self.params.theta < 2.0 * PI
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeEstimate {
    /// Mean SE over interference-limited replications (nats/s/Hz).
    pub mean: f64,
    /// 95% normal-approximation half-width over replication means.
    pub ci_half_width: f64,
    /// Replications contributing to the mean.
    pub n: usize,
    pub replications_run: usize,
    /// Replications discarded because no interferer reached the receiver.
    pub interference_free: usize,
    /// Share of evaluated receivers that saw no interferer.
    pub interference_free_fraction: f64,
}

#[derive(Debug, Clone, Copy, Default)]
struct Outcome {
    value: Option<f64>,
    receivers: usize,
    interference_free_receivers: usize,
}

struct Realisation {
    tx_points: PointSet,
    rx_points: PointSet,
    users: PointSet,
    assoc: AssociationMap,
}

// Draw order: tier BSs, μW BSs when decoupled, users, scheduling.
fn realise(cfg: &SimConfig, rng: &mut Stream) -> Result<Realisation> {
    let window = cfg.window;
    let mut bss = sample_ppp(cfg.bs_density(), window, rng)?;
    if cfg.decoupled {
        let extra = sample_ppp(cfg.params.lambda_mu, window, rng)?;
        bss = bss.superpose(&extra)?;
    }
    let users = sample_ppp(cfg.params.lambda_u, window, rng)?;
    let radio = TierRadio {
        tx_power: cfg.tx_power(),
        path_loss_exp: cfg.alpha(),
    };
    let assoc = if bss.is_empty() {
        AssociationMap::unserved(users.len())
    } else {
        schedule_active(associate_strongest(&users, &bss, &radio, cfg.los_radius())?, rng)
    };
    let (tx_points, rx_points) = match cfg.direction {
        Direction::Dl => (bss, users.clone()),
        Direction::Ul => (users.clone(), bss),
    };
    Ok(Realisation {
        tx_points,
        rx_points,
        users,
        assoc,
    })
}

fn nearest_to_centre(users: &PointSet) -> Option<usize> {
    let window = users.window();
    let c = window.centre();
    users
        .points()
        .iter()
        .enumerate()
        .min_by(|a, b| {
            window
                .distance_sq(c, *a.1)
                .total_cmp(&window.distance_sq(c, *b.1))
                .then(a.0.cmp(&b.0))
        })
        .map(|(i, _)| i)
}

/// A scheduled link as (transmitter, receiver) positions.
#[derive(Clone, Copy)]
struct Link {
    tx: Point2D,
    rx: Point2D,
}

fn links_of(cfg: &SimConfig, r: &Realisation, force: Option<(usize, usize)>) -> Vec<Link> {
    r.assoc
        .active_links()
        .map(|(b, u)| match force {
            Some((fb, fu)) if fb == b => (b, fu),
            _ => (b, u),
        })
        .map(|(b, u)| match cfg.direction {
            Direction::Dl => Link {
                tx: r.tx_points.points()[b],
                rx: r.rx_points.points()[u],
            },
            Direction::Ul => Link {
                tx: r.tx_points.points()[u],
                rx: r.rx_points.points()[b],
            },
        })
        .collect()
}

// Path gains of the interferers reaching links[k].rx.
fn interferer_gains(cfg: &SimConfig, links: &[Link], k: usize) -> Vec<f64> {
    let window = cfg.window;
    let rx = links[k].rx;
    let alpha = cfg.alpha();
    let r_los_sq = cfg.los_radius().map(|r| r * r);
    let cos_half = (0.5 * cfg.params.theta).cos();
    let mut gains = Vec::new();
    for (j, l) in links.iter().enumerate() {
        if j == k {
            continue;
        }
        let (bx, by) = window.displacement(l.tx, rx);
        let d2 = bx * bx + by * by;
        if let Some(lim) = r_los_sq {
            if d2 > lim {
                continue;
            }
        }
        if cfg.beam_limited() {
            let (ax, ay) = window.displacement(l.tx, l.rx);
            let dot = ax * bx + ay * by;
            let norms = ((ax * ax + ay * ay) * d2).sqrt();
            if dot < cos_half * norms {
                continue;
            }
        }
        gains.push(d2.powf(-0.5 * alpha));
    }
    gains
}

// Mean of ln(1 + SIR) over the fading draws; None without interferers.
// All transmitters of a tier and direction share one power, so powers are
// normalised to the serving transmitter and drop out of the SIR. Scaling
// them leaves every sample bit-identical.
fn fading_average(
    cfg: &SimConfig,
    signal_gain: f64,
    interferers: &[f64],
    rng: &mut Stream,
    sink: &mut Option<&mut Vec<f64>>,
) -> Option<f64> {
    if interferers.is_empty() {
        return None;
    }
    let mut acc = 0.0;
    for _ in 0..cfg.fading_draws {
        let g0: f64 = Exp1.sample(rng);
        let s = g0 * signal_gain;
        let mut i = 0.0;
        for &l in interferers {
            let g: f64 = Exp1.sample(rng);
            i += g * l;
        }
        let sir = s / i;
        if let Some(v) = sink.as_deref_mut() {
            v.push(sir);
        }
        acc += sir.ln_1p();
    }
    Some(acc / cfg.fading_draws as f64)
}

fn run_replication(cfg: &SimConfig, index: u64, mut sink: Option<&mut Vec<f64>>) -> Result<Outcome> {
    let mut rng = replication_stream(cfg.master_seed, index);
    let r = realise(cfg, &mut rng)?;
    let window = cfg.window;
    let alpha = cfg.alpha();
    match cfg.receivers {
        ReceiverMode::Typical => {
            let Some(u) = nearest_to_centre(&r.users) else {
                return Ok(Outcome::default());
            };
            let Some(b) = r.assoc.serving(u) else {
                // No LOS BS: the desired link is cut and the SE is zero.
                return Ok(Outcome {
                    value: Some(0.0),
                    receivers: 1,
                    interference_free_receivers: 0,
                });
            };
            let links = links_of(cfg, &r, Some((b, u)));
            let k = r
                .assoc
                .active_links()
                .position(|(bb, _)| bb == b)
                .expect("serving BS of a user is active");
            let gains = interferer_gains(cfg, &links, k);
            let signal = window.distance_sq(links[k].tx, links[k].rx).powf(-0.5 * alpha);
            let value = fading_average(cfg, signal, &gains, &mut rng, &mut sink);
            Ok(Outcome {
                value,
                receivers: 1,
                interference_free_receivers: usize::from(value.is_none()),
            })
        }
        ReceiverMode::All => {
            let links = links_of(cfg, &r, None);
            let unserved = (0..r.users.len()).filter(|&u| r.assoc.serving(u).is_none()).count();
            let mut sum = 0.0;
            let mut used = 0usize;
            let mut free = 0usize;
            for k in 0..links.len() {
                let gains = interferer_gains(cfg, &links, k);
                let signal = window.distance_sq(links[k].tx, links[k].rx).powf(-0.5 * alpha);
                match fading_average(cfg, signal, &gains, &mut rng, &mut sink) {
                    Some(v) => {
                        sum += v;
                        used += 1;
                    }
                    None => free += 1,
                }
            }
            let value = if used > 0 {
                let served_share = 1.0 - unserved as f64 / r.users.len() as f64;
                Some(served_share * sum / used as f64)
            } else if links.is_empty() && unserved > 0 {
                Some(0.0)
            } else {
                None
            };
            Ok(Outcome {
                value,
                receivers: links.len(),
                interference_free_receivers: free,
            })
        }
    }
}

fn run_range(cfg: &SimConfig, range: std::ops::Range<usize>) -> Result<Vec<Outcome>> {
    range
        .into_par_iter()
        .map(|i| run_replication(cfg, i as u64, None))
        .collect()
}

/// Monte Carlo SE estimate.
pub fn estimate_se(cfg: &SimConfig) -> Result<SeEstimate> {
    cfg.validate()?;
    let mut outcomes = run_range(cfg, 0..cfg.replications)?;
    let cap = cfg.max_replications.max(cfg.replications);
    while outcomes.iter().filter(|o| o.value.is_some()).count() < cfg.min_usable && outcomes.len() < cap {
        let next = (outcomes.len() + cfg.replications).min(cap);
        outcomes.extend(run_range(cfg, outcomes.len()..next)?);
    }
    let values: Vec<f64> = outcomes.iter().filter_map(|o| o.value).collect();
    let receivers: usize = outcomes.iter().map(|o| o.receivers).sum();
    let free: usize = outcomes.iter().map(|o| o.interference_free_receivers).sum();
    let n = values.len();
    let (mean, ci) = mean_and_ci(&values);
    Ok(SeEstimate {
        mean,
        ci_half_width: ci,
        n,
        replications_run: outcomes.len(),
        interference_free: outcomes.len() - n,
        interference_free_fraction: if receivers > 0 { free as f64 / receivers as f64 } else { 0.0 },
    })
}

/// Sample mean and 95% normal-approximation half-width.
pub fn mean_and_ci(values: &[f64]) -> (f64, f64) {
    match values.len() {
        0 => (0.0, 0.0),
        1 => (values[0], 0.0),
        n => {
            let mean = values.mean();
            (mean, 1.96 * values.std_dev() / (n as f64).sqrt())
        }
    }
}

/// Every SIR sample drawn in replication `index`, in draw order.
pub fn replication_sir_samples(cfg: &SimConfig, index: u64) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut samples = Vec::new();
    run_replication(cfg, index, Some(&mut samples))?;
    Ok(samples)
}

fn scale_powers(mut p: NetworkParams, scale: f64) -> NetworkParams {
    p.p_m_dl *= scale;
    p.p_m_ul *= scale;
    p.p_mu_dl *= scale;
    p.p_mu_ul *= scale;
    p
}

/// Whether multiplying every transmit power by `scale` leaves all SIR
/// samples and the estimate bit-identical.
pub fn power_invariance_check(cfg: &SimConfig, scale: f64) -> Result<bool> {
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(invalid("scale", scale, "must be positive"));
    }
    let scaled = SimConfig {
        params: scale_powers(cfg.params, scale),
        ..*cfg
    };
    for i in 0..cfg.replications as u64 {
        let a = replication_sir_samples(cfg, i)?;
        let b = replication_sir_samples(&scaled, i)?;
        if a.len() != b.len() || a.iter().zip(&b).any(|(x, y)| x.to_bits() != y.to_bits()) {
            return Ok(false);
        }
    }
    let (ea, eb) = (estimate_se(cfg)?, estimate_se(&scaled)?);
    Ok(ea.mean.to_bits() == eb.mean.to_bits() && ea.ci_half_width.to_bits() == eb.ci_half_width.to_bits())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HomogenizationReport {
    pub empirical_active_density: f64,
    pub lambda_u: f64,
    /// Active-BS density over user density.
    pub ratio: f64,
    /// `p_a · λ̂`, the ratio predicted from the active-BS probability.
    pub predicted_ratio: f64,
    pub bs_count: usize,
}

/// Density of active BSs after scheduling, relative to the user density.
pub fn validate_homogenization(cfg: &SimConfig) -> Result<HomogenizationReport> {
    cfg.validate()?;
    if cfg.direction != Direction::Dl || cfg.decoupled {
        return Err(Error::Domain("homogenization is checked on the downlink".into()));
    }
    let counts: Vec<(usize, usize)> = (0..cfg.replications)
        .into_par_iter()
        .map(|i| -> Result<(usize, usize)> {
            let mut rng = replication_stream(cfg.master_seed, i as u64);
            let r = realise(cfg, &mut rng)?;
            Ok((r.assoc.active_count(), r.tx_points.len()))
        })
        .collect::<Result<_>>()?;
    let active: usize = counts.iter().map(|c| c.0).sum();
    let bs_count: usize = counts.iter().map(|c| c.1).sum();
    let area = cfg.window.area() * cfg.replications as f64;
    let density = active as f64 / area;
    let lambda_hat = cfg.lambda_hat();
    Ok(HomogenizationReport {
        empirical_active_density: density,
        lambda_u: cfg.params.lambda_u,
        ratio: density / cfg.params.lambda_u,
        predicted_ratio: active_bs_probability(lambda_hat)? * lambda_hat,
        bs_count,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeRow {
    pub lambda_hat: f64,
    pub tier: Tier,
    pub direction: Direction,
    pub estimate: SeEstimate,
    pub bounds: SeBounds,
}

/// Analytic bounds matching a simulated configuration.
pub fn analytic_bounds(cfg: &SimConfig) -> Result<SeBounds> {
    match cfg.tier {
        Tier::Muw => se_muw_bounds(cfg.lambda_hat(), cfg.params.alpha_mu),
        Tier::Mmw => se_mmw_bounds_integral(&cfg.params),
    }
}

/// One row per grid point and target, in grid-major order.
pub fn sweep_se(grid: &[f64], template: &SimConfig, targets: &[(Tier, Direction)]) -> Result<Vec<SeRow>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty λ̂ grid".into()));
    }
    if targets.is_empty() {
        return Err(Error::Domain("no tier/direction requested".into()));
    }
    let mut rows = Vec::with_capacity(grid.len() * targets.len());
    for &lh in grid {
        for &(tier, direction) in targets {
            let cfg = SimConfig {
                tier,
                direction,
                decoupled: template.decoupled && tier == Tier::Mmw && direction == Direction::Ul,
                ..*template
            }
            .with_lambda_hat(lh);
            rows.push(SeRow {
                lambda_hat: lh,
                tier,
                direction,
                estimate: estimate_se(&cfg)?,
                bounds: analytic_bounds(&cfg)?,
            });
        }
    }
    Ok(rows)
}
