//! Uplink/downlink spectrum split between the mmW and μW tiers.
//!
//! The problem is a two-variable LP: maximise the DL rate
//! `R_d = (1-β_m) W_m γ_m + (1-β_μ) W_μ γ_μ` subject to `R_u ≥ ζ R_d` with
//! `R_u = β_m W_m.u γ_m.u + β_μ W_μ γ_μ` and both fractions in `[0, 1]`.
//! The closed-form optimum fills the UL with whichever tier costs less DL
//! rate per unit of UL rate, then spills over to the other.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analytic_se::NetworkParams;
use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectrumParams {
    /// mmW bandwidth (Hz).
    pub w_m: f64,
    /// μW bandwidth (Hz).
    pub w_mu: f64,
    /// PAPR-limited mmW UL bandwidth (Hz).
    pub w_m_ul: f64,
    /// Subcarrier spacing (Hz).
    pub f_s: f64,
    /// PAPR threshold, linear.
    pub delta: f64,
    /// PAPR outage probability.
    pub epsilon: f64,
    /// Minimum UL/DL rate ratio.
    pub zeta: f64,
}

impl Default for SpectrumParams {
    fn default() -> Self {
        Self {
            w_m: 500e6,
            w_mu: 20e6,
            w_m_ul: 100e6,
            f_s: 244.14e3,
            delta: 10.0,
            epsilon: 0.7,
            zeta: 0.25,
        }
    }
}

impl SpectrumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.w_mu > 0.0 && self.w_mu.is_finite()) {
            return Err(invalid("w_mu", self.w_mu, "must be positive"));
        }
        if !(self.w_m > self.w_mu && self.w_m.is_finite()) {
            return Err(invalid("w_m", self.w_m, "must exceed the μW bandwidth"));
        }
        if !(self.w_m_ul > 0.0) {
            return Err(invalid("w_m_ul", self.w_m_ul, "must be positive"));
        }
        if !(0.0..=1.0).contains(&self.zeta) {
            return Err(invalid("zeta", self.zeta, "UL/DL ratio must lie in [0, 1]"));
        }
        Ok(())
    }

    /// `W_m.u` clamped to `W_m`; the flag reports whether clamping fired.
    pub fn effective_w_m_ul(&self) -> (f64, bool) {
        if self.w_m_ul > self.w_m {
            (self.w_m, true)
        } else {
            (self.w_m_ul, false)
        }
    }
}

/// PAPR outage probability of an OFDM signal spanning `w` Hz.
pub fn papr_outage(w: f64, f_s: f64, delta: f64) -> Result<f64> {
    if !(f_s > 0.0) {
        return Err(invalid("f_s", f_s, "must be positive"));
    }
    if !(delta > 0.0) {
        return Err(invalid("delta", delta, "must be positive"));
    }
    if !(w >= 0.0) {
        return Err(invalid("w", w, "must be nonnegative"));
    }
    let rate = (-delta).exp() / f_s * (PI * delta / 3.0).sqrt();
    Ok(-(-w * rate).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PaprMode {
    /// `√3 f_s e^δ (πδ)^{-1/2} / ln(1/ε)`.
    AsPrinted,
    /// Solves `papr_outage(w) = ε` exactly.
    ExactInversion,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UlBandwidth {
    pub hz: f64,
    pub unclamped_hz: f64,
    pub clamped: bool,
}

/// Largest mmW UL bandwidth meeting the PAPR outage target, capped at `cap`.
pub fn mmw_ul_bandwidth(f_s: f64, delta: f64, epsilon: f64, mode: PaprMode, cap: f64) -> Result<UlBandwidth> {
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(invalid("epsilon", epsilon, "must lie in (0, 1)"));
    }
    papr_outage(0.0, f_s, delta)?;
    if !(cap > 0.0) {
        return Err(invalid("cap", cap, "must be positive"));
    }
    let scale = f_s * delta.exp() * (3.0 / (PI * delta)).sqrt();
    let w = match mode {
        PaprMode::AsPrinted => scale / (1.0 / epsilon).ln(),
        PaprMode::ExactInversion => -scale * (-epsilon).ln_1p(),
    };
    let clamped = !(w <= cap);
    Ok(UlBandwidth {
        hz: if clamped { cap } else { w },
        unclamped_hz: w,
        clamped,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Allocation {
    pub beta_m: f64,
    pub beta_mu: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RatePair {
    /// DL rate (nats/s).
    pub r_d: f64,
    /// UL rate (nats/s).
    pub r_u: f64,
}

/// Per-tier spectral efficiencies (nats/s/Hz) feeding the rate model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Gammas {
    pub m: f64,
    pub mu: f64,
    /// mmW UL efficiency; equals `m` without decoupling.
    pub m_ul: f64,
}

/// DL and UL rates of an allocation. `W_m.u` is clamped to `W_m`.
pub fn rates(alloc: Allocation, spectrum: &SpectrumParams, g: Gammas) -> RatePair {
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    RatePair {
        r_d: (1.0 - alloc.beta_m) * spectrum.w_m * g.m + (1.0 - alloc.beta_mu) * spectrum.w_mu * g.mu,
        r_u: alloc.beta_m * w_m_ul * g.m_ul + alloc.beta_mu * spectrum.w_mu * g.mu,
    }
}

/// How the mmW LOS probability is obtained.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LosModel {
    /// `1 − exp(−λ_m π R_L²)` at the current density.
    FromDensity,
    /// A fixed value, e.g. to reproduce a quoted operating point.
    Fixed(f64),
}

/// Density entering the LOS probability of the decoupled UL.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DecoupledLos {
    MmwDensity,
    MergedDensity,
}

/// What to do when `W_m γ_m > W_μ γ_μ` fails.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum A1Policy {
    Enforce,
    /// Solve anyway and flag the result.
    Report,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub lambda_hat_m: f64,
    pub lambda_hat_mu: f64,
    /// User density (per m²).
    pub lambda_u: f64,
    pub alpha_m: f64,
    pub alpha_mu: f64,
    /// Average LOS distance (m).
    pub r_los: f64,
    pub los: LosModel,
    pub decoupled_los: DecoupledLos,
    pub a1: A1Policy,
}

impl Scenario {
    pub fn from_network(p: &NetworkParams) -> Self {
        Self {
            lambda_hat_m: p.lambda_hat_m(),
            lambda_hat_mu: p.lambda_hat_mu(),
            lambda_u: p.lambda_u,
            alpha_m: p.alpha_m,
            alpha_mu: p.alpha_mu,
            r_los: p.r_los,
            los: LosModel::FromDensity,
            decoupled_los: DecoupledLos::MmwDensity,
            a1: A1Policy::Enforce,
        }
    }

    pub fn at(mut self, lambda_hat_m: f64) -> Self {
        self.lambda_hat_m = lambda_hat_m;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda_hat_m > 1.0 && self.lambda_hat_m.is_finite()) {
            return Err(invalid("lambda_hat_m", self.lambda_hat_m, "must exceed 1"));
        }
        if !(self.lambda_hat_mu > 1.0 && self.lambda_hat_mu.is_finite()) {
            return Err(invalid("lambda_hat_mu", self.lambda_hat_mu, "must exceed 1"));
        }
        if !(self.lambda_u > 0.0) {
            return Err(invalid("lambda_u", self.lambda_u, "must be positive"));
        }
        for (name, v) in [("alpha_m", self.alpha_m), ("alpha_mu", self.alpha_mu)] {
            if !(v > 2.0 && v.is_finite()) {
                return Err(invalid(name, v, "path-loss exponent must exceed 2"));
            }
        }
        if !(self.r_los > 0.0) {
            return Err(invalid("r_los", self.r_los, "must be positive"));
        }
        if let LosModel::Fixed(p) = self.los {
            if !(p > 0.0 && p <= 1.0) {
                return Err(invalid("p_los", p, "must lie in (0, 1]"));
            }
        }
        Ok(())
    }

    fn los_at(&self, lambda_hat: f64) -> f64 {
        match self.los {
            LosModel::Fixed(p) => p,
            LosModel::FromDensity => -(-lambda_hat * self.lambda_u * PI * self.r_los * self.r_los).exp_m1(),
        }
    }

    /// LOS probability of the mmW tier.
    pub fn p_los(&self) -> f64 {
        self.los_at(self.lambda_hat_m)
    }

    /// LOS probability used in the decoupled UL efficiency.
    pub fn p_los_decoupled(&self) -> f64 {
        match self.decoupled_los {
            DecoupledLos::MmwDensity => self.p_los(),
            DecoupledLos::MergedDensity => self.los_at(self.lambda_hat_m + self.lambda_hat_mu),
        }
    }

    pub fn gamma_m(&self) -> f64 {
        0.5 * self.alpha_m * self.p_los() * self.lambda_hat_m.ln()
    }

    pub fn gamma_mu(&self) -> f64 {
        0.5 * self.alpha_mu * self.lambda_hat_mu.ln()
    }

    /// UL efficiency when μW BSs also receive mmW UL.
    pub fn gamma_m_ul_decoupled(&self) -> f64 {
        0.5 * self.alpha_m * self.p_los_decoupled() * (self.lambda_hat_m + self.lambda_hat_mu).ln()
    }

    pub fn gammas(&self, decoupled: bool) -> Gammas {
        let m = self.gamma_m();
        Gammas {
            m,
            mu: self.gamma_mu(),
            m_ul: if decoupled { self.gamma_m_ul_decoupled() } else { m },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    /// μW alone can meet the UL demand.
    Low,
    /// μW is fully UL and mmW carries the rest.
    High,
}

impl Region {
    pub fn as_str(self) -> &'static str {
        match self {
            Region::Low => "C_L",
            Region::High => "C_H",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionLabel {
    pub region: Region,
    /// Membership of the decoupling-dominant region; `None` without decoupling.
    pub in_d: Option<bool>,
}

impl std::fmt::Display for RegionLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.region.as_str())?;
        if self.in_d == Some(true) {
            f.write_str("+D")?;
        }
        Ok(())
    }
}

impl std::str::FromStr for RegionLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (base, in_d) = match s.strip_suffix("+D") {
            Some(b) => (b, Some(true)),
            None => (s, None),
        };
        let region = match base {
            "C_L" => Region::Low,
            "C_H" => Region::High,
            other => return Err(Error::Domain(format!("unknown region label `{other}`"))),
        };
        Ok(RegionLabel { region, in_d })
    }
}

fn is_low(s: &Scenario, spectrum: &SpectrumParams) -> bool {
    if spectrum.zeta == 0.0 {
        return true;
    }
    // λ̂_m ≤ λ̂_μ^{α_μ W_μ / (ζ α_m p_L W_m)}, compared in logs.
    let exponent = s.alpha_mu * spectrum.w_mu / (spectrum.zeta * s.alpha_m * s.p_los() * spectrum.w_m);
    s.lambda_hat_m.ln() <= exponent * s.lambda_hat_mu.ln()
}

/// Density-only membership test for the decoupling-dominant region:
/// `λ̂_μ + λ̂_m ≥ λ̂_m^{W_m / W_m.u}`.
pub fn in_region_d(s: &Scenario, spectrum: &SpectrumParams) -> bool {
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    (s.lambda_hat_m + s.lambda_hat_mu).ln() >= spectrum.w_m / w_m_ul * s.lambda_hat_m.ln()
}

/// Efficiency form of the same test, `W_m.u γ^dec_m.u ≥ W_m γ_m`.
pub fn in_region_d_by_rate(s: &Scenario, spectrum: &SpectrumParams) -> bool {
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    w_m_ul * s.gamma_m_ul_decoupled() >= spectrum.w_m * s.gamma_m()
}

pub fn region_classify(s: &Scenario, spectrum: &SpectrumParams, decoupled: bool) -> Result<RegionLabel> {
    s.validate()?;
    spectrum.validate()?;
    Ok(RegionLabel {
        region: if is_low(s, spectrum) { Region::Low } else { Region::High },
        in_d: decoupled.then(|| in_region_d(s, spectrum)),
    })
}

/// The `λ̂_m` separating the low and high regions, by bisection in `ln λ̂_m`.
/// `None` when `ζ = 0` or the low region never ends.
pub fn low_high_boundary(s: &Scenario, spectrum: &SpectrumParams) -> Result<Option<f64>> {
    spectrum.validate()?;
    if spectrum.zeta == 0.0 {
        return Ok(None);
    }
    let excess = |log_lh: f64| {
        let p = s.at(log_lh.exp());
        spectrum.zeta * spectrum.w_m * p.gamma_m() - spectrum.w_mu * p.gamma_mu()
    };
    let mut lo = 0.0;
    let mut hi = 1.0;
    while excess(hi) <= 0.0 {
        lo = hi;
        hi *= 2.0;
        if hi > 700.0 {
            return Ok(None);
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if excess(mid) <= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-10 {
            break;
        }
    }
    if hi - lo > 1e-9 {
        return Err(Error::Numeric {
            routine: "region boundary bisection",
            detail: format!("bracket [{lo}, {hi}] in ln λ̂_m did not close"),
        });
    }
    Ok(Some((0.5 * (lo + hi)).exp()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub allocation: Allocation,
    pub label: RegionLabel,
    pub rates: RatePair,
    pub gammas: Gammas,
    /// Whether `W_m γ_m > W_μ γ_μ` held.
    pub a1_holds: bool,
    /// Whether `W_m.u` was clamped to `W_m`.
    pub w_m_ul_clamped: bool,
}

fn check_a1(s: &Scenario, spectrum: &SpectrumParams, g: &Gammas) -> Result<bool> {
    let lhs = spectrum.w_m * g.m;
    let rhs = spectrum.w_mu * g.mu;
    let holds = lhs > rhs;
    if !holds && s.a1 == A1Policy::Enforce {
        return Err(Error::Assumption {
            name: "A1",
            detail: format!("W_m·γ_m = {lhs:.6e} does not exceed W_μ·γ_μ = {rhs:.6e}"),
        });
    }
    Ok(holds)
}

// Constraint R_u − ζ R_d ≥ 0 written as a·β_m + b·β_μ ≥ c.
fn constraint(spectrum: &SpectrumParams, g: &Gammas) -> (f64, f64, f64) {
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    let z = spectrum.zeta;
    let dm = spectrum.w_m * g.m;
    let dmu = spectrum.w_mu * g.mu;
    (w_m_ul * g.m_ul + z * dm, (1.0 + z) * dmu, z * (dm + dmu))
}

fn solve(s: &Scenario, spectrum: &SpectrumParams, decoupled: bool) -> Result<Solution> {
    s.validate()?;
    spectrum.validate()?;
    let g = s.gammas(decoupled);
    let a1_holds = check_a1(s, spectrum, &g)?;
    let label = region_classify(s, spectrum, decoupled)?;
    let z = spectrum.zeta;
    let allocation = if z == 0.0 {
        Allocation { beta_m: 0.0, beta_mu: 0.0 }
    } else {
        let (w_m_ul, _) = spectrum.effective_w_m_ul();
        let dm = spectrum.w_m * g.m;
        let dmu = spectrum.w_mu * g.mu;
        let um = w_m_ul * g.m_ul;
        let (a, b, c) = constraint(spectrum, &g);
        if label.in_d == Some(true) {
            // mmW carries the UL first.
            let beta_m = (1.0 + dmu / dm) / (1.0 + um / (z * dm));
            if beta_m <= 1.0 {
                Allocation { beta_m, beta_mu: 0.0 }
            } else {
                Allocation { beta_m: 1.0, beta_mu: ((c - a) / b).clamp(0.0, 1.0) }
            }
        } else {
            match label.region {
                Region::Low => Allocation {
                    beta_m: 0.0,
                    beta_mu: (z / (1.0 + z) * (1.0 + dm / dmu)).min(1.0),
                },
                Region::High => Allocation {
                    beta_m: ((z - dmu / dm) / (z + um / dm)).clamp(0.0, 1.0),
                    beta_mu: 1.0,
                },
            }
        }
    };
    Ok(Solution {
        allocation,
        label,
        rates: rates(allocation, spectrum, g),
        gammas: g,
        a1_holds,
        w_m_ul_clamped: spectrum.effective_w_m_ul().1,
    })
}

/// Optimal allocation without decoupling.
pub fn optimal_allocation(s: &Scenario, spectrum: &SpectrumParams) -> Result<Solution> {
    solve(s, spectrum, false)
}

/// Optimal allocation when μW BSs also receive mmW UL.
pub fn optimal_allocation_decoupled(s: &Scenario, spectrum: &SpectrumParams) -> Result<Solution> {
    solve(s, spectrum, true)
}

/// `(minimum β_μ, maximum β_m)` over all densities.
pub fn allocation_limits(spectrum: &SpectrumParams) -> Result<(f64, f64)> {
    spectrum.validate()?;
    let z = spectrum.zeta;
    if z == 0.0 {
        return Ok((0.0, 0.0));
    }
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    Ok((z / (1.0 + z), 1.0 / (1.0 + w_m_ul / (z * spectrum.w_m))))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MaxDlRate {
    /// Closed-form allocation substituted into the rate model (nats/s).
    pub r_d_star: f64,
    /// The branch's printed closed form (nats/s).
    pub printed: f64,
    /// The decoupled D branch taken literally, with `R_L` in the exponent.
    pub printed_literal: Option<f64>,
    pub label: RegionLabel,
}

/// Maximum DL rate, by substitution and by the printed branch formulas.
pub fn max_dl_rate(s: &Scenario, spectrum: &SpectrumParams, decoupled: bool) -> Result<MaxDlRate> {
    let sol = solve(s, spectrum, decoupled)?;
    let (w_m_ul, _) = spectrum.effective_w_m_ul();
    let z = spectrum.zeta;
    let p_l = s.p_los();
    let am = s.alpha_m;
    let amu = s.alpha_mu;
    let lm = s.lambda_hat_m.ln();
    let lmu = s.lambda_hat_mu.ln();
    let lsum = (s.lambda_hat_m + s.lambda_hat_mu).ln();
    let mu_term = amu * spectrum.w_mu * lmu;
    let mut literal = None;
    let printed = match (sol.label.region, sol.label.in_d) {
        (_, Some(true)) => {
            let pre = 2.0 * (1.0 + z * spectrum.w_m * lm / (w_m_ul * lsum));
            literal = Some((mu_term + am * w_m_ul * s.r_los * lm) / pre);
            (mu_term + am * w_m_ul * p_l * lm) / pre
        }
        (Region::Low, _) => (mu_term + am * spectrum.w_m * p_l * lm) / (2.0 * (1.0 + z)),
        (Region::High, Some(false)) => {
            let pre = 2.0 * (z + w_m_ul * lsum / (spectrum.w_m * lm));
            (mu_term + am * w_m_ul * p_l * lsum) / pre
        }
        (Region::High, None) => (mu_term + am * w_m_ul * p_l * lm) / (2.0 * (z + w_m_ul / spectrum.w_m)),
    };
    Ok(MaxDlRate {
        r_d_star: sol.rates.r_d,
        printed,
        printed_literal: literal,
        label: sol.label,
    })
}

/// Exact LP solution by enumerating the vertices of the feasible polygon.
/// Ties go to the smaller `β_m`, then the smaller `β_μ`.
pub fn lp_oracle(s: &Scenario, spectrum: &SpectrumParams, decoupled: bool) -> Result<(Allocation, f64)> {
    s.validate()?;
    spectrum.validate()?;
    let g = s.gammas(decoupled);
    let (a, b, c) = constraint(spectrum, &g);
    let mut vertices = vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (1.0, 1.0)];
    // Constraint line against each box edge.
    if a != 0.0 {
        vertices.push((c / a, 0.0));
        vertices.push(((c - b) / a, 1.0));
    }
    if b != 0.0 {
        vertices.push((0.0, c / b));
        vertices.push((1.0, (c - a) / b));
    }
    let slack = 1e-12 * (a.abs() + b.abs() + c.abs());
    let mut best: Option<(Allocation, f64)> = None;
    for (bm, bmu) in vertices {
        let in_box = (-1e-15..=1.0 + 1e-15).contains(&bm) && (-1e-15..=1.0 + 1e-15).contains(&bmu);
        if !in_box || a * bm + b * bmu < c - slack {
            continue;
        }
        let alloc = Allocation {
            beta_m: bm.clamp(0.0, 1.0),
            beta_mu: bmu.clamp(0.0, 1.0),
        };
        let r_d = rates(alloc, spectrum, g).r_d;
        let better = match best {
            None => true,
            Some((cur, cur_r)) => {
                let tol = 1e-12 * cur_r.abs().max(r_d.abs());
                if r_d > cur_r + tol {
                    true
                } else if r_d >= cur_r - tol {
                    (alloc.beta_m, alloc.beta_mu) < (cur.beta_m, cur.beta_mu)
                } else {
                    false
                }
            }
        };
        if better {
            best = Some((alloc, r_d));
        }
    }
    best.ok_or_else(|| Error::Infeasible(format!("no feasible vertex for a={a}, b={b}, c={c}")))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub lambda_hat_m: f64,
    pub region: String,
    pub beta_m: f64,
    pub beta_mu: f64,
    pub r_d: f64,
    pub r_u: f64,
    pub beta_m_decoupled: f64,
    pub beta_mu_decoupled: f64,
    pub r_d_decoupled: f64,
    pub gain: f64,
    pub a1_holds: bool,
}

/// Plain and decoupled optima over a grid of `λ̂_m`, in grid order.
pub fn allocation_sweep(template: &Scenario, spectrum: &SpectrumParams, grid: &[f64]) -> Result<Vec<SweepRow>> {
    if grid.is_empty() {
        return Err(Error::Domain("empty λ̂_m grid".into()));
    }
    grid.par_iter()
        .map(|&lh| {
            let s = template.at(lh);
            let plain = optimal_allocation(&s, spectrum)?;
            let dec = optimal_allocation_decoupled(&s, spectrum)?;
            Ok(SweepRow {
                lambda_hat_m: lh,
                region: dec.label.to_string(),
                beta_m: plain.allocation.beta_m,
                beta_mu: plain.allocation.beta_mu,
                r_d: plain.rates.r_d,
                r_u: plain.rates.r_u,
                beta_m_decoupled: dec.allocation.beta_m,
                beta_mu_decoupled: dec.allocation.beta_mu,
                r_d_decoupled: dec.rates.r_d,
                gain: dec.rates.r_d / plain.rates.r_d,
                a1_holds: plain.a1_holds,
            })
        })
        .collect()
}

/// `n` log-spaced points from `lo` to `hi` inclusive.
pub fn log_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![lo],
        _ => {
            let (a, b) = (lo.ln(), hi.ln());
            let mut g: Vec<f64> = (0..n)
                .map(|i| (a + (b - a) * i as f64 / (n - 1) as f64).exp())
                .collect();
            // Endpoints exactly as given, not as exp(ln x) rounds them.
            g[0] = lo;
            g[n - 1] = hi;
            g
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn sweep_scenario(r_los: f64) -> Scenario {
        Scenario {
            lambda_hat_m: 1.2,
            lambda_hat_mu: 2.0,
            lambda_u: 1e-4,
            alpha_m: 2.5,
            alpha_mu: 4.0,
            r_los,
            los: LosModel::FromDensity,
            decoupled_los: DecoupledLos::MmwDensity,
            a1: A1Policy::Report,
        }
    }

    #[test]
    fn papr_outage_edges() {
        assert_eq!(papr_outage(0.0, 244.14e3, 10.0).unwrap(), 0.0);
        assert!(papr_outage(1e30, 244.14e3, 10.0).unwrap() > 1.0 - 1e-12);
        assert!(papr_outage(1.0, 0.0, 10.0).is_err());
    }

    #[test]
    fn papr_bandwidth_modes() {
        let printed = mmw_ul_bandwidth(244.14e3, 10.0, 0.7, PaprMode::AsPrinted, f64::INFINITY).unwrap();
        assert!(rel(printed.unclamped_hz, 4.659e9) < 1e-3, "{printed:?}");
        let exact = mmw_ul_bandwidth(244.14e3, 10.0, 0.7, PaprMode::ExactInversion, f64::INFINITY).unwrap();
        assert!((papr_outage(exact.hz, 244.14e3, 10.0).unwrap() - 0.7).abs() < 1e-9);
        let capped = mmw_ul_bandwidth(244.14e3, 10.0, 0.999_999, PaprMode::ExactInversion, 1e9).unwrap();
        assert!(capped.clamped && capped.hz == 1e9);
        assert!(mmw_ul_bandwidth(244.14e3, 10.0, 1.0, PaprMode::AsPrinted, 1e9).is_err());
    }

    #[test]
    fn rate_corners_and_hand_value() {
        let sp = SpectrumParams::default();
        let g = Gammas { m: 3.9513, mu: 1.3863, m_ul: 3.9513 };
        let full_dl = rates(Allocation { beta_m: 0.0, beta_mu: 0.0 }, &sp, g);
        assert_eq!(full_dl.r_u, 0.0);
        assert!(rel(full_dl.r_d, 500e6 * 3.9513 + 20e6 * 1.3863) < 1e-15);
        assert_eq!(rates(Allocation { beta_m: 1.0, beta_mu: 1.0 }, &sp, g).r_d, 0.0);
        let half = rates(Allocation { beta_m: 0.0, beta_mu: 0.5 }, &sp, g);
        assert!(rel(half.r_d, 1.97565e9 + 1.3863e7) < 1e-12);
    }

    #[test]
    fn d_region_examples() {
        let sp = SpectrumParams { w_m_ul: 100e6, ..SpectrumParams::default() };
        assert!(in_region_d(&sweep_scenario(49.61).at(1.25), &sp));
        assert!(!in_region_d(&sweep_scenario(49.61).at(1.3), &sp));
    }

    #[test]
    fn zeta_zero_is_full_downlink() {
        let sp = SpectrumParams { zeta: 0.0, ..SpectrumParams::default() };
        let s = sweep_scenario(49.61).at(50.0);
        assert_eq!(region_classify(&s, &sp, false).unwrap().region, Region::Low);
        let sol = optimal_allocation(&s, &sp).unwrap();
        assert_eq!(sol.allocation, Allocation { beta_m: 0.0, beta_mu: 0.0 });
        let (lp, _) = lp_oracle(&s, &sp, false).unwrap();
        assert_eq!(lp, sol.allocation);
        assert_eq!(allocation_limits(&sp).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn high_region_worked_point() {
        let sp = SpectrumParams::default();
        let s = Scenario { los: LosModel::Fixed(0.6864), ..sweep_scenario(33.33) }.at(100.0);
        let sol = optimal_allocation(&s, &sp).unwrap();
        assert_eq!(sol.label.region, Region::High);
        assert!((sol.allocation.beta_m - 0.5244).abs() < 1e-4, "{sol:?}");
        assert_eq!(sol.allocation.beta_mu, 1.0);
        let m = max_dl_rate(&s, &sp, false).unwrap();
        assert!(rel(m.r_d_star, 9.3969e8) < 1e-4, "{m:?}");
        assert!(rel(m.printed, m.r_d_star) < 1e-9);
    }

    #[test]
    fn low_region_worked_point() {
        let sp = SpectrumParams::default();
        let s = sweep_scenario(49.61);
        assert!((s.p_los() - 0.6046).abs() < 1e-4);
        let m = max_dl_rate(&s, &sp, false).unwrap();
        assert_eq!(m.label.region, Region::Low);
        assert!(rel(m.r_d_star, 7.729e7) < 1e-3, "{m:?}");
        assert!(rel(m.printed, m.r_d_star) < 1e-9);
    }

    #[test]
    fn decoupled_d_point() {
        let sp = SpectrumParams::default();
        let s = sweep_scenario(49.61).at(1.25);
        assert!((s.p_los() - 0.6196).abs() < 1e-4);
        let sol = optimal_allocation_decoupled(&s, &sp).unwrap();
        assert_eq!(sol.label.in_d, Some(true));
        assert!((sol.allocation.beta_m - 0.2528).abs() < 1e-4, "{sol:?}");
        assert_eq!(sol.allocation.beta_mu, 0.0);
        let m = max_dl_rate(&s, &sp, true).unwrap();
        assert!(rel(m.r_d_star, 9.23e7) < 1e-3, "{m:?}");
        assert!(rel(m.printed, 3.64e7) < 1e-2, "{m:?}");
        assert!(m.printed_literal.is_some());
    }

    #[test]
    fn jongro_boundary_near_one_and_a_half() {
        let sp = SpectrumParams::default();
        let b = low_high_boundary(&sweep_scenario(33.33), &sp).unwrap().unwrap();
        assert!((b - 1.5).abs() < 0.15, "{b}");
        let below = region_classify(&sweep_scenario(33.33).at(b * (1.0 - 1e-6)), &sp, false).unwrap();
        let above = region_classify(&sweep_scenario(33.33).at(b * (1.0 + 1e-6)), &sp, false).unwrap();
        assert_eq!((below.region, above.region), (Region::Low, Region::High));
    }

    #[test]
    fn limits() {
        let sp = SpectrumParams { zeta: 0.25, w_m: 500e6, w_m_ul: 100e6, ..SpectrumParams::default() };
        let (mn, mx) = allocation_limits(&sp).unwrap();
        assert!((mn - 0.2).abs() < 1e-15 && (mx - 1.0 / 1.8).abs() < 1e-15);
        let sym = SpectrumParams { zeta: 1.0, w_m_ul: 500e6, ..sp };
        assert!((allocation_limits(&sym).unwrap().1 - 0.5).abs() < 1e-15);
    }

    #[test]
    fn a1_enforced_by_default() {
        let sp = SpectrumParams::default();
        let s = Scenario { a1: A1Policy::Enforce, ..sweep_scenario(33.33) }.at(1.05);
        assert!(matches!(optimal_allocation(&s, &sp), Err(Error::Assumption { name: "A1", .. })));
        let relaxed = optimal_allocation(&Scenario { a1: A1Policy::Report, ..s }, &sp).unwrap();
        assert!(!relaxed.a1_holds);
    }

    #[test]
    fn zeta_one_near_unity_density() {
        let sp = SpectrumParams { zeta: 1.0, ..SpectrumParams::default() };
        let sol = optimal_allocation(&sweep_scenario(33.33).at(1.0 + 1e-12), &sp).unwrap();
        assert!((sol.allocation.beta_mu - 0.5).abs() < 1e-9);
    }

    #[test]
    fn region_label_round_trips() {
        for s in ["C_L", "C_H", "C_L+D", "C_H+D"] {
            assert_eq!(s.parse::<RegionLabel>().unwrap().to_string(), s);
        }
        assert!("X".parse::<RegionLabel>().is_err());
    }
}
