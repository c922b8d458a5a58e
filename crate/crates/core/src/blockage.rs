//! Blockage parameters and average LOS distances from building statistics.
//!
//! Buildings are summarised by their mean perimeter `ρ`, mean footprint `A`
//! and coverage `κ`; heights are `floor_height × N` with the floor count `N`
//! lognormal. The 2D blockage parameter is `β = -2ρ ln(1-κ) / (πA)` and the
//! height fraction `η = ∫₀¹ Pr(H ≤ (1-s)B) ds`, giving an average LOS distance
//! `R_L = 2(1-κ) / (βη)` (`η = 1` for the 2D model).

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};

use crate::error::{invalid, Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Default storey height in metres.
pub const DEFAULT_FLOOR_HEIGHT_M: f64 = 3.0;

/// Absolute tolerance used when integrating the height fraction.
pub const ETA_ABS_TOL: f64 = 1e-8;

/// Lognormal law of the number of floors, `ln N ~ Normal(mu_ln, sigma_ln²)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FloorLognormal {
    pub mu_ln: f64,
    pub sigma_ln: f64,
}

impl FloorLognormal {
    pub fn mean(&self) -> f64 {
        (self.mu_ln + 0.5 * self.sigma_ln * self.sigma_ln).exp()
    }

    pub fn cdf(&self, floors: f64) -> f64 {
        if floors <= 0.0 {
            return 0.0;
        }
        let z = (floors.ln() - self.mu_ln) / self.sigma_ln;
        standard_normal().cdf(z)
    }

    fn pdf(&self, floors: f64) -> f64 {
        if floors <= 0.0 {
            return 0.0;
        }
        let z = (floors.ln() - self.mu_ln) / self.sigma_ln;
        (-0.5 * z * z).exp() / (floors * self.sigma_ln * (2.0 * std::f64::consts::PI).sqrt())
    }
}

fn standard_normal() -> Normal {
    Normal::new(0.0, 1.0).expect("unit normal is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BuildingStats {
    /// Mean building perimeter `ρ` (m).
    pub avg_perimeter_m: f64,
    /// Mean building footprint `A` (m²).
    pub avg_area_m2: f64,
    /// Fraction of ground covered by buildings, `κ ∈ [0, 1)`.
    pub coverage: f64,
    pub floors: FloorLognormal,
    pub floor_height_m: f64,
    /// BS antenna height `B` (m).
    pub bs_height_m: f64,
}

impl BuildingStats {
    /// Statistics with the BS placed at the mean building height.
    pub fn with_mean_bs_height(
        avg_perimeter_m: f64,
        avg_area_m2: f64,
        coverage: f64,
        floors: FloorLognormal,
        floor_height_m: f64,
    ) -> Result<Self> {
        let stats = Self {
            avg_perimeter_m,
            avg_area_m2,
            coverage,
            floors,
            floor_height_m,
            bs_height_m: floor_height_m * floors.mean(),
        };
        stats.validate()?;
        Ok(stats)
    }

    pub fn mean_building_height_m(&self) -> f64 {
        self.floor_height_m * self.floors.mean()
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("avg_perimeter_m", self.avg_perimeter_m),
            ("avg_area_m2", self.avg_area_m2),
            ("sigma_ln", self.floors.sigma_ln),
            ("floor_height_m", self.floor_height_m),
            ("bs_height_m", self.bs_height_m),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(invalid(name, v, "must be positive and finite"));
            }
        }
        if !(0.0..1.0).contains(&self.coverage) {
            return Err(invalid("coverage", self.coverage, "must lie in [0, 1)"));
        }
        if !self.floors.mu_ln.is_finite() {
            return Err(invalid("mu_ln", self.floors.mu_ln, "must be finite"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockageParams {
    pub beta: f64,
    pub eta: f64,
    pub r_los_2d: f64,
    pub r_los_3d: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LosMode {
    TwoD,
    ThreeD,
}

/// 2D blockage parameter `β` (per metre).
pub fn blockage_beta(stats: &BuildingStats) -> Result<f64> {
    if stats.coverage >= 1.0 {
        return Err(Error::Domain(format!(
            "coverage {} leaves no open ground",
            stats.coverage
        )));
    }
    stats.validate()?;
    if stats.coverage <= 0.0 {
        return Err(invalid(
            "coverage",
            stats.coverage,
            "must be positive for a finite LOS distance",
        ));
    }
    Ok(-2.0 * stats.avg_perimeter_m * (-stats.coverage).ln_1p()
        / (std::f64::consts::PI * stats.avg_area_m2))
}

/// Height fraction `η = ∫₀¹ Pr(H ≤ (1-s)B) ds`, by adaptive quadrature.
pub fn height_fraction_eta(stats: &BuildingStats) -> Result<f64> {
    stats.validate()?;
    let floors_at_bs = stats.bs_height_m / stats.floor_height_m;
    let law = stats.floors;
    let integrand = |s: f64| {
        if s >= 1.0 {
            0.0
        } else {
            law.cdf((1.0 - s) * floors_at_bs)
        }
    };
    let q = integrate(integrand, 0.0, 1.0, Tolerance::absolute(ETA_ABS_TOL))?;
    Ok(q.value.clamp(0.0, 1.0))
}

/// Average LOS distance (m). In 3D mode `eta_override` replaces the
/// integrated height fraction when given.
pub fn los_distance(stats: &BuildingStats, mode: LosMode, eta_override: Option<f64>) -> Result<f64> {
    let beta = blockage_beta(stats)?;
    let eta = match mode {
        LosMode::TwoD => 1.0,
        LosMode::ThreeD => match eta_override {
            Some(e) if e > 0.0 && e <= 1.0 => e,
            Some(e) => return Err(invalid("eta_override", e, "must lie in (0, 1]")),
            None => height_fraction_eta(stats)?,
        },
    };
    if eta <= 0.0 {
        return Err(Error::Domain(
            "height fraction is zero: every link is blocked".into(),
        ));
    }
    Ok(2.0 * (1.0 - stats.coverage) / (beta * eta))
}

/// All blockage quantities for one region. `eta_override` feeds `r_los_3d`.
pub fn blockage_params(stats: &BuildingStats, eta_override: Option<f64>) -> Result<BlockageParams> {
    let beta = blockage_beta(stats)?;
    let eta_formula = height_fraction_eta(stats)?;
    let eta = eta_override.unwrap_or(eta_formula);
    Ok(BlockageParams {
        beta,
        eta,
        r_los_2d: los_distance(stats, LosMode::TwoD, None)?,
        r_los_3d: los_distance(stats, LosMode::ThreeD, Some(eta))?,
    })
}

/// Outcome of fitting a lognormal floor-count law to a histogram.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LognormalFit {
    pub mu_ln: f64,
    pub sigma_ln: f64,
    /// Root-mean-square residual over the histogram bins.
    pub rmse: f64,
}

/// Least-squares lognormal fit to a floor-count histogram.
///
/// Frequencies are normalised to unit sum. Each integer floor count `k` is
/// compared with the lognormal mass on `[k - 1/2, k + 1/2)`.
pub fn fit_floor_lognormal(histogram: &[(u32, f64)]) -> Result<LognormalFit> {
    let total: f64 = histogram.iter().map(|&(_, f)| f).sum();
    if histogram.iter().any(|&(_, f)| !(f >= 0.0 && f.is_finite())) {
        return Err(Error::Domain("histogram frequencies must be finite and nonnegative".into()));
    }
    let nonzero = histogram.iter().filter(|&&(_, f)| f > 0.0).count();
    if nonzero < 3 {
        return Err(Error::Numeric {
            routine: "lognormal fit",
            detail: format!("{nonzero} nonzero bins; at least 3 are needed"),
        });
    }
    let bins: Vec<(f64, f64)> = histogram
        .iter()
        .map(|&(k, f)| (f64::from(k), f / total))
        .collect();

    let residuals = |mu: f64, log_sigma: f64| -> Vec<f64> {
        let law = FloorLognormal {
            mu_ln: mu,
            sigma_ln: log_sigma.exp(),
        };
        bins.iter()
            .map(|&(k, f)| law.cdf(k + 0.5) - law.cdf((k - 0.5).max(0.0)) - f)
            .collect()
    };
    let sse = |r: &[f64]| r.iter().map(|x| x * x).sum::<f64>();

    // Start from the moments of ln k.
    let (mut mu, mut log_sigma) = {
        let m = bins
            .iter()
            .map(|&(k, f)| f * k.max(0.5).ln())
            .sum::<f64>();
        let v = bins
            .iter()
            .map(|&(k, f)| f * (k.max(0.5).ln() - m).powi(2))
            .sum::<f64>();
        (m, (v.sqrt().max(0.05)).ln())
    };

    let mut r = residuals(mu, log_sigma);
    let mut cost = sse(&r);
    let mut damping = 1e-3;
    for _ in 0..200 {
        // Central-difference Jacobian.
        let h = 1e-6;
        let jmu: Vec<f64> = residuals(mu + h, log_sigma)
            .iter()
            .zip(residuals(mu - h, log_sigma))
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let jls: Vec<f64> = residuals(mu, log_sigma + h)
            .iter()
            .zip(residuals(mu, log_sigma - h))
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect();
        let a11: f64 = jmu.iter().map(|x| x * x).sum();
        let a22: f64 = jls.iter().map(|x| x * x).sum();
        let a12: f64 = jmu.iter().zip(&jls).map(|(x, y)| x * y).sum();
        let g1: f64 = jmu.iter().zip(&r).map(|(x, y)| x * y).sum();
        let g2: f64 = jls.iter().zip(&r).map(|(x, y)| x * y).sum();

        let mut improved = false;
        for _ in 0..30 {
            let b11 = a11 * (1.0 + damping);
            let b22 = a22 * (1.0 + damping);
            let det = b11 * b22 - a12 * a12;
            if det.abs() < f64::MIN_POSITIVE {
                damping *= 10.0;
                continue;
            }
            let d1 = -(b22 * g1 - a12 * g2) / det;
            let d2 = -(b11 * g2 - a12 * g1) / det;
            let r_new = residuals(mu + d1, log_sigma + d2);
            let c_new = sse(&r_new);
            if c_new.is_finite() && c_new < cost {
                let step = d1.abs().max(d2.abs());
                mu += d1;
                log_sigma += d2;
                r = r_new;
                let rel = (cost - c_new) / cost.max(f64::MIN_POSITIVE);
                cost = c_new;
                damping = (damping / 3.0).max(1e-12);
                improved = step > 1e-12 && rel > 1e-15;
                break;
            }
            damping *= 10.0;
        }
        if !improved {
            break;
        }
    }
    let sigma = log_sigma.exp();
    if !(mu.is_finite() && sigma.is_finite() && sigma > 0.0) {
        return Err(Error::Numeric {
            routine: "lognormal fit",
            detail: format!("diverged to mu={mu}, sigma={sigma}"),
        });
    }
    Ok(LognormalFit {
        mu_ln: mu,
        sigma_ln: sigma,
        rmse: (cost / bins.len() as f64).sqrt(),
    })
}

/// Lognormal floor-count density, exposed for plotting fitted curves.
pub fn floor_lognormal_pdf(law: &FloorLognormal, floors: f64) -> f64 {
    law.pdf(floors)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gangnam() -> BuildingStats {
        BuildingStats {
            avg_perimeter_m: 59.02,
            avg_area_m2: 218.60,
            coverage: 0.3477,
            floors: FloorLognormal {
                mu_ln: 1.62,
                sigma_ln: 0.27,
            },
            floor_height_m: 3.0,
            bs_height_m: 14.23,
        }
    }

    // Closed form of ∫₀¹ Pr(X ≤ (1-s)c) ds = E[(1 - X/c)⁺] for lognormal X.
    fn eta_oracle(mu: f64, sigma: f64, c: f64) -> f64 {
        let n = standard_normal();
        let d = (c.ln() - mu) / sigma;
        n.cdf(d) - (mu + 0.5 * sigma * sigma).exp() / c * n.cdf(d - sigma)
    }

    #[test]
    fn beta_matches_table_for_gangnam() {
        let b = blockage_beta(&gangnam()).unwrap();
        assert!((b / 0.073 - 1.0).abs() < 0.02, "{b}");
    }

    #[test]
    fn beta_vanishes_with_coverage() {
        let mut s = gangnam();
        s.coverage = 1e-9;
        assert!(blockage_beta(&s).unwrap() < 1e-9);
    }

    #[test]
    fn full_coverage_is_domain_error() {
        let mut s = gangnam();
        s.coverage = 1.0;
        assert!(matches!(blockage_beta(&s), Err(Error::Domain(_))));
    }

    #[test]
    fn beta_monotone_in_coverage_and_perimeter() {
        let base = gangnam();
        let mut prev = 0.0;
        for i in 1..100 {
            let mut s = base;
            s.coverage = i as f64 / 100.0;
            let b = blockage_beta(&s).unwrap();
            assert!(b > prev);
            prev = b;
        }
        let mut wider = base;
        wider.avg_perimeter_m *= 1.1;
        assert!(blockage_beta(&wider).unwrap() > blockage_beta(&base).unwrap());
        let mut bigger = base;
        bigger.avg_area_m2 *= 1.1;
        assert!(blockage_beta(&bigger).unwrap() < blockage_beta(&base).unwrap());
    }

    #[test]
    fn eta_quadrature_matches_closed_form() {
        for (mu, sigma, b) in [(1.62, 0.27, 14.23), (0.69, 0.55, 8.12), (1.36, 1.23, 28.95)] {
            let mut s = gangnam();
            s.floors = FloorLognormal {
                mu_ln: mu,
                sigma_ln: sigma,
            };
            s.bs_height_m = b;
            let got = height_fraction_eta(&s).unwrap();
            let want = eta_oracle(mu, sigma, b / 3.0);
            assert!((got - want).abs() < 1e-8, "{got} vs {want}");
        }
    }

    #[test]
    fn eta_degenerate_heights() {
        // Buildings of (numerically) zero height never block.
        let mut s = gangnam();
        s.floors = FloorLognormal {
            mu_ln: -50.0,
            sigma_ln: 1e-3,
        };
        assert!((height_fraction_eta(&s).unwrap() - 1.0).abs() < 1e-8);
        // Buildings exactly as tall as the BS always block.
        s.floors = FloorLognormal {
            mu_ln: (s.bs_height_m / s.floor_height_m).ln(),
            sigma_ln: 1e-9,
        };
        assert!(height_fraction_eta(&s).unwrap() < 1e-7);
    }

    #[test]
    fn three_d_distance_never_shorter_than_two_d() {
        let s = gangnam();
        let d2 = los_distance(&s, LosMode::TwoD, None).unwrap();
        let d3 = los_distance(&s, LosMode::ThreeD, None).unwrap();
        assert!(d3 >= d2);
        let p = blockage_params(&s, None).unwrap();
        assert!((p.r_los_2d - 2.0 * (1.0 - s.coverage) / p.beta).abs() < 1e-12);
        assert!((p.r_los_3d - p.r_los_2d / p.eta).abs() < 1e-9);
    }

    #[test]
    fn mean_bs_height_default() {
        let s = BuildingStats::with_mean_bs_height(59.02, 218.6, 0.3477, gangnam().floors, 3.0).unwrap();
        assert!((s.bs_height_m - 3.0 * (1.62f64 + 0.5 * 0.27 * 0.27).exp()).abs() < 1e-12);
    }

    #[test]
    fn fit_rejects_degenerate_histograms() {
        assert!(fit_floor_lognormal(&[(3, 10.0)]).is_err());
        assert!(fit_floor_lognormal(&[(3, 10.0), (4, 2.0), (5, 0.0)]).is_err());
    }

    #[test]
    fn fit_recovers_exact_bin_masses() {
        let law = FloorLognormal {
            mu_ln: 1.62,
            sigma_ln: 0.27,
        };
        let hist: Vec<(u32, f64)> = (0..40)
            .map(|k| {
                let k = k as f64;
                (k as u32, law.cdf(k + 0.5) - law.cdf((k - 0.5).max(0.0)))
            })
            .collect();
        let fit = fit_floor_lognormal(&hist).unwrap();
        assert!((fit.mu_ln - 1.62).abs() < 1e-6, "{fit:?}");
        assert!((fit.sigma_ln - 0.27).abs() < 1e-6, "{fit:?}");
        assert!(fit.rmse < 1e-8);
    }

    #[test]
    fn fit_on_uniform_histogram() {
        let hist: Vec<(u32, f64)> = (1..=5).map(|k| (k, 1.0)).collect();
        let fit = fit_floor_lognormal(&hist).unwrap();
        assert!(fit.rmse > 0.0);
        assert!(fit.mu_ln.is_finite() && fit.sigma_ln.is_finite());
    }
}
