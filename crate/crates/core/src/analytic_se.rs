//! Closed-form spectral efficiencies for μW and mmW ultra-dense networks.
//!
//! All values are in nats/s/Hz. Downlink and uplink share every expression:
//! transmit powers cancel from the SIR once the active transmitters
//! homogenise, so the powers in [`NetworkParams`] only matter to the simulator.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// `ln 2`: nats in one bit.
pub const NATS_PER_BIT: f64 = std::f64::consts::LN_2;

/// Absolute tolerance of the integral bounds.
pub const INTEGRAL_ABS_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NetworkParams {
    /// mmW BS density (per m²).
    pub lambda_m: f64,
    /// μW BS density (per m²).
    pub lambda_mu: f64,
    /// User density (per m²).
    pub lambda_u: f64,
    pub alpha_m: f64,
    pub alpha_mu: f64,
    /// mmW mainlobe beamwidth (rad).
    pub theta: f64,
    /// Average LOS distance (m). May be infinite.
    pub r_los: f64,
    pub p_m_dl: f64,
    pub p_m_ul: f64,
    pub p_mu_dl: f64,
    pub p_mu_ul: f64,
}

impl Default for NetworkParams {
    fn default() -> Self {
        Self {
            lambda_m: 1.0,
            lambda_mu: 1.0,
            lambda_u: 0.01,
            alpha_m: 2.5,
            alpha_mu: 4.0,
            theta: PI / 12.0,
            r_los: 10.0,
            p_m_dl: 1.0,
            p_m_ul: 0.2,
            p_mu_dl: 1.0,
            p_mu_ul: 0.2,
        }
    }
}

impl NetworkParams {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("lambda_m", self.lambda_m),
            ("lambda_mu", self.lambda_mu),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(invalid(name, v, "must be finite and nonnegative"));
            }
        }
        if !(self.lambda_u > 0.0 && self.lambda_u.is_finite()) {
            return Err(invalid("lambda_u", self.lambda_u, "must be positive"));
        }
        for (name, v) in [("alpha_m", self.alpha_m), ("alpha_mu", self.alpha_mu)] {
            if !(v > 2.0 && v.is_finite()) {
                return Err(invalid(name, v, "path-loss exponent must exceed 2"));
            }
        }
        if !(self.theta > 0.0 && self.theta <= 2.0 * PI) {
            return Err(invalid("theta", self.theta, "beamwidth must lie in (0, 2π]"));
        }
        if !(self.r_los > 0.0) {
            return Err(invalid("r_los", self.r_los, "must be positive"));
        }
        for (name, v) in [
            ("p_m_dl", self.p_m_dl),
            ("p_m_ul", self.p_m_ul),
            ("p_mu_dl", self.p_mu_dl),
            ("p_mu_ul", self.p_mu_ul),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, v, "transmit power must be positive"));
            }
        }
        Ok(())
    }

    pub fn lambda_hat_m(&self) -> f64 {
        self.lambda_m / self.lambda_u
    }

    pub fn lambda_hat_mu(&self) -> f64 {
        self.lambda_mu / self.lambda_u
    }

    pub fn los_probability(&self) -> f64 {
        los_probability(self.lambda_m, self.r_los)
    }

    /// Copy with the mmW density set from a BS-to-user ratio.
    pub fn with_lambda_hat_m(mut self, lambda_hat_m: f64) -> Self {
        self.lambda_m = lambda_hat_m * self.lambda_u;
        self
    }

    pub fn with_lambda_hat_mu(mut self, lambda_hat_mu: f64) -> Self {
        self.lambda_mu = lambda_hat_mu * self.lambda_u;
        self
    }
}

/// Asymptotic SE with a flag for inputs below the ultra-dense regime.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Asymptote {
    pub value: f64,
    pub below_udn: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeBounds {
    pub lower: f64,
    pub upper: f64,
    pub asymptotic: f64,
    /// Set when the BS-to-user ratio is below one.
    pub below_udn: bool,
}

/// `ρ(α) = (2π/α) csc(2π/α)`.
pub fn interference_constant(alpha: f64) -> Result<f64> {
    if !(alpha > 2.0) {
        return Err(Error::Domain(format!(
            "interference integral diverges for path-loss exponent {alpha} ≤ 2"
        )));
    }
    if alpha.is_infinite() {
        return Ok(1.0);
    }
    let x = 2.0 * PI / alpha;
    Ok(x / x.sin())
}

fn check_ratio(name: &'static str, lambda_hat: f64) -> Result<bool> {
    if !(lambda_hat > 0.0 && lambda_hat.is_finite()) {
        return Err(invalid(name, lambda_hat, "density ratio must be positive and finite"));
    }
    Ok(lambda_hat < 1.0)
}

/// `(α/2) ln λ̂`, clamped at zero.
pub fn se_muw_asymptotic(lambda_hat_mu: f64, alpha_mu: f64) -> Result<Asymptote> {
    let below_udn = check_ratio("lambda_hat_mu", lambda_hat_mu)?;
    interference_constant(alpha_mu)?;
    Ok(Asymptote {
        value: (0.5 * alpha_mu * lambda_hat_mu.ln()).max(0.0),
        below_udn,
    })
}

/// μW lower and upper bounds, clamped at zero.
pub fn se_muw_bounds(lambda_hat_mu: f64, alpha_mu: f64) -> Result<SeBounds> {
    let asym = se_muw_asymptotic(lambda_hat_mu, alpha_mu)?;
    let rho = interference_constant(alpha_mu)?;
    let half = 0.5 * alpha_mu;
    let bound = |c: f64| (ln_1p_pow(c * lambda_hat_mu, half) - half).max(0.0);
    Ok(SeBounds {
        lower: bound(1.0 / rho),
        upper: bound(1.0 + 2.0 / alpha_mu),
        asymptotic: asym.value,
        below_udn: asym.below_udn,
    })
}

// ln(1 + k·x^p) without overflow for large x.
fn ln_1p_pow(x: f64, p: f64) -> f64 {
    ln_1p_scaled(1.0, x, p)
}

// ln(1 + k·x^p).
fn ln_1p_scaled(k: f64, x: f64, p: f64) -> f64 {
    let log_term = k.ln() + p * x.ln();
    if log_term > 30.0 {
        log_term + (-log_term).exp().ln_1p()
    } else {
        log_term.exp().ln_1p()
    }
}

/// Probability that the nearest mmW BS lies within the LOS distance.
pub fn los_probability(lambda_m: f64, r_los: f64) -> f64 {
    if lambda_m <= 0.0 {
        return 0.0;
    }
    -(-lambda_m * PI * r_los * r_los).exp_m1()
}

/// `p_L (α_m/2) ln λ̂_m`, clamped at zero.
pub fn se_mmw_asymptotic(lambda_hat_m: f64, lambda_m: f64, alpha_m: f64, r_los: f64) -> Result<Asymptote> {
    if !(r_los > 0.0) {
        return Err(invalid("r_los", r_los, "must be positive"));
    }
    se_mmw_asymptotic_with_pl(lambda_hat_m, alpha_m, los_probability(lambda_m, r_los))
}

/// mmW asymptote for a given LOS probability.
pub fn se_mmw_asymptotic_with_pl(lambda_hat_m: f64, alpha_m: f64, p_los: f64) -> Result<Asymptote> {
    if !(0.0..=1.0).contains(&p_los) {
        return Err(invalid("p_los", p_los, "must lie in [0, 1]"));
    }
    let base = se_muw_asymptotic(lambda_hat_m, alpha_m)?;
    Ok(Asymptote {
        value: p_los * base.value,
        below_udn: base.below_udn,
    })
}

/// Tractable mmW bounds.
pub fn se_mmw_bounds_tractable(params: &NetworkParams) -> Result<SeBounds> {
    params.validate()?;
    let lh = params.lambda_hat_m();
    let asym = se_mmw_asymptotic(lh, params.lambda_m, params.alpha_m, params.r_los)?;
    let a = params.alpha_m;
    let rho = interference_constant(a)?;
    let k = 2.0 * PI / params.theta;
    let p_l = params.los_probability();
    let upper_coef = 1.0 + 2.0 / a;
    let c_l2 = los_probability_scaled(params.lambda_m, params.r_los, 1.0 + rho * upper_coef);
    let lower = p_l * (ln_1p_scaled(k, lh / rho, 0.5 * a) - 0.5 * a);
    let upper = c_l2 * ln_1p_scaled(k, upper_coef * lh, 0.5 * a);
    Ok(SeBounds {
        lower: lower.max(0.0),
        upper: upper.max(0.0),
        asymptotic: asym.value,
        below_udn: asym.below_udn,
    })
}

// 1 − exp(−λ π R² s).
fn los_probability_scaled(lambda_m: f64, r_los: f64, s: f64) -> f64 {
    if lambda_m <= 0.0 {
        return 0.0;
    }
    -(-lambda_m * PI * r_los * r_los * s).exp_m1()
}

/// mmW bounds from numerical integration of the exact integrands.
///
/// Each integrand is `p_L(t) (1 − c [θ(eᵗ − 1)/2π]^{2/α})⁺` and is integrated
/// up to the zero of its bracket, so the quadrature never sees the kink.
pub fn se_mmw_bounds_integral(params: &NetworkParams) -> Result<SeBounds> {
    params.validate()?;
    let lh = params.lambda_hat_m();
    let asym = se_mmw_asymptotic(lh, params.lambda_m, params.alpha_m, params.r_los)?;
    let a = params.alpha_m;
    let rho = interference_constant(a)?;
    let k = 2.0 * PI / params.theta;
    let mass = params.lambda_m * PI * params.r_los * params.r_los;
    let beam = |t: f64| (t.exp_m1() / k).powf(2.0 / a);
    // LOS probability at the interference-limited distance for t.
    let p_l_t = |t: f64| {
        if params.lambda_m <= 0.0 {
            0.0
        } else if mass.is_infinite() {
            1.0
        } else {
            -(-mass * (1.0 + rho / lh * beam(t))).exp_m1()
        }
    };
    let bound = |c: f64| -> Result<f64> {
        let t_max = ln_1p_scaled(k, 1.0 / c, 0.5 * a);
        let q = integrate(
            |t| p_l_t(t) * (1.0 - c * beam(t)).max(0.0),
            0.0,
            t_max,
            Tolerance::absolute(INTEGRAL_ABS_TOL),
        )?;
        Ok(q.value.max(0.0))
    };
    Ok(SeBounds {
        lower: bound(rho / lh)?,
        upper: bound(1.0 / ((1.0 + 2.0 / a) * lh))?,
        asymptotic: asym.value,
        below_udn: asym.below_udn,
    })
}

/// Probability `1 − exp(−ρ_m λ_u π R_L²)` that the LOS interference bound holds.
/// Reported only; the bounds assume it holds.
pub fn los_bound_validity_probability(params: &NetworkParams) -> Result<f64> {
    let rho = interference_constant(params.alpha_m)?;
    Ok(los_probability_scaled(params.lambda_u, params.r_los, rho))
}
