//! Property tests over the public model API.

use proptest::prelude::*;
use statrs::distribution::{ContinuousCDF, Normal};

use udn_core::allocation::{
    lp_oracle, mmw_ul_bandwidth, optimal_allocation, optimal_allocation_decoupled, papr_outage,
    A1Policy, DecoupledLos, LosModel, PaprMode, Region, Scenario, SpectrumParams,
};
use udn_core::analytic_se::{
    se_mmw_bounds_integral, se_mmw_bounds_tractable, se_muw_asymptotic, se_muw_bounds, NetworkParams,
};
use udn_core::blockage::{
    blockage_beta, height_fraction_eta, los_distance, BuildingStats, FloorLognormal, LosMode,
};
use udn_core::pointprocess::{active_bs_probability, Point2D, VoronoiCellLaw, Window};
use udn_core::quadrature::{integrate, Tolerance};

fn stats() -> impl Strategy<Value = BuildingStats> {
    (10.0..200.0f64, 0.05..0.7f64, 0.0..3.0f64, 0.1..1.5f64, 5.0..120.0f64, 0.5..2.0f64).prop_map(
        |(side, coverage, mu_ln, sigma_ln, bs_height_m, aspect)| BuildingStats {
            avg_perimeter_m: 2.0 * side * (1.0 + aspect),
            avg_area_m2: side * side * aspect,
            coverage,
            floors: FloorLognormal { mu_ln, sigma_ln },
            floor_height_m: 3.0,
            bs_height_m,
        },
    )
}

fn eta_closed_form(s: &BuildingStats) -> f64 {
    let n = Normal::standard();
    let (mu, sigma) = (s.floors.mu_ln, s.floors.sigma_ln);
    let c = s.bs_height_m / s.floor_height_m;
    let d = (c.ln() - mu) / sigma;
    n.cdf(d) - (mu + 0.5 * sigma * sigma).exp() / c * n.cdf(d - sigma)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eta_is_a_fraction_matching_closed_form(s in stats()) {
        let eta = height_fraction_eta(&s).unwrap();
        prop_assert!((0.0..=1.0).contains(&eta));
        prop_assert!((eta - eta_closed_form(&s)).abs() < 1e-7);
    }

    #[test]
    fn los_3d_is_at_least_2d(s in stats()) {
        prop_assume!(height_fraction_eta(&s).unwrap() > 1e-6);
        let r2 = los_distance(&s, LosMode::TwoD, None).unwrap();
        let r3 = los_distance(&s, LosMode::ThreeD, None).unwrap();
        prop_assert!(r2 > 0.0);
        prop_assert!(r3 >= r2 * (1.0 - 1e-12));
    }

    #[test]
    fn beta_grows_with_coverage(s in stats(), bump in 0.01..0.25f64) {
        let denser = BuildingStats { coverage: (s.coverage + bump).min(0.95), ..s };
        prop_assert!(blockage_beta(&denser).unwrap() > blockage_beta(&s).unwrap());
    }

    #[test]
    fn eta_nondecreasing_in_bs_height(s in stats(), extra in 1.0..50.0f64) {
        let taller = BuildingStats { bs_height_m: s.bs_height_m + extra, ..s };
        prop_assert!(height_fraction_eta(&taller).unwrap() >= height_fraction_eta(&s).unwrap() - 1e-9);
    }

    #[test]
    fn active_probability_bounds(lh in 1e-3..1e6f64) {
        let p = active_bs_probability(lh).unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
        // Expected active BSs per user never exceeds one.
        prop_assert!(p * lh <= 1.0 + 1e-12);
        prop_assert!(active_bs_probability(lh * 2.0).unwrap() < p);
    }

    #[test]
    fn muw_bounds_ordered_and_increasing(lh in 1.0..1e8f64, alpha in 2.2..6.0f64) {
        let b = se_muw_bounds(lh, alpha).unwrap();
        let b2 = se_muw_bounds(lh * 10.0, alpha).unwrap();
        prop_assert!(b.lower <= b.upper);
        prop_assert!(b2.lower > b.lower && b2.upper > b.upper);
        prop_assert!((b.asymptotic - se_muw_asymptotic(lh, alpha).unwrap().value).abs() < 1e-12);
    }

    #[test]
    fn mmw_bounds_ordered(lh in 1.0..1e5f64, r_los in 1.0..200.0f64, alpha in 2.1..4.0f64) {
        let p = NetworkParams { r_los, alpha_m: alpha, ..NetworkParams::default() }.with_lambda_hat_m(lh);
        let t = se_mmw_bounds_tractable(&p).unwrap();
        let i = se_mmw_bounds_integral(&p).unwrap();
        prop_assert!(t.lower <= t.upper + 1e-12);
        prop_assert!(i.lower <= i.upper + 1e-9);
        prop_assert!(i.lower >= 0.0);
    }

    #[test]
    fn allocation_is_feasible_and_lp_optimal(
        lh in 1.01..1e5f64,
        r_los in 5.0..200.0f64,
        zeta in 0.01..1.0f64,
        w_m in 1e8..2e9f64,
        decoupled in any::<bool>(),
    ) {
        let sp = SpectrumParams { w_m, zeta, ..SpectrumParams::default() };
        let s = Scenario {
            lambda_hat_m: lh,
            lambda_hat_mu: 2.0,
            lambda_u: 1e-4,
            alpha_m: 2.5,
            alpha_mu: 4.0,
            r_los,
            los: LosModel::FromDensity,
            decoupled_los: DecoupledLos::MmwDensity,
            a1: A1Policy::Report,
        };
        let sol = if decoupled {
            optimal_allocation_decoupled(&s, &sp).unwrap()
        } else {
            optimal_allocation(&s, &sp).unwrap()
        };
        let a = sol.allocation;
        prop_assert!((0.0..=1.0).contains(&a.beta_m) && (0.0..=1.0).contains(&a.beta_mu));
        prop_assert!(sol.rates.r_u >= zeta * sol.rates.r_d * (1.0 - 1e-9));
        let (lp, r_lp) = lp_oracle(&s, &sp, decoupled).unwrap();
        prop_assert!((lp.beta_m - a.beta_m).abs() <= 1e-6);
        prop_assert!((lp.beta_mu - a.beta_mu).abs() <= 1e-6);
        prop_assert!((sol.rates.r_d - r_lp).abs() <= 1e-9 * r_lp);
        if sol.label.in_d != Some(true) {
            // Outside D the μW band is spent on UL first.
            prop_assert!(a.beta_m == 0.0 || a.beta_mu == 1.0);
            if sol.label.region == Region::Low {
                prop_assert_eq!(a.beta_m, 0.0);
            }
        }
        if !decoupled {
            let dec = optimal_allocation_decoupled(&s, &sp).unwrap();
            prop_assert!(dec.rates.r_d >= sol.rates.r_d * (1.0 - 1e-12));
        }
    }

    #[test]
    fn papr_inversion_round_trips(eps in 0.01..0.99f64, delta in 2.0..20.0f64) {
        let f_s = 244.14e3;
        let w = mmw_ul_bandwidth(f_s, delta, eps, PaprMode::ExactInversion, f64::INFINITY).unwrap();
        prop_assert!((papr_outage(w.hz, f_s, delta).unwrap() - eps).abs() < 1e-9);
        let tighter = mmw_ul_bandwidth(f_s, delta, eps * 0.5, PaprMode::ExactInversion, f64::INFINITY).unwrap();
        prop_assert!(tighter.hz <= w.hz);
    }

    #[test]
    fn papr_outage_monotone(w in 1e6..1e10f64, delta in 2.0..20.0f64) {
        let a = papr_outage(w, 244.14e3, delta).unwrap();
        let b = papr_outage(w * 1.5, 244.14e3, delta).unwrap();
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b >= a);
    }

    #[test]
    fn voronoi_cdf_monotone(density in 1e-3..10.0f64, x in 0.0..10.0f64, dx in 0.0..5.0f64) {
        let law = VoronoiCellLaw::new(density).unwrap();
        let x = x / density;
        prop_assert!(law.pdf(x) >= 0.0);
        prop_assert!(law.cdf(x + dx / density) >= law.cdf(x));
    }

    #[test]
    fn torus_distance_symmetric_and_bounded(
        side in 1.0..1e4f64,
        a in (0.0..1.0f64, 0.0..1.0f64),
        b in (0.0..1.0f64, 0.0..1.0f64),
    ) {
        let w = Window::torus(side).unwrap();
        let p = Point2D::new(a.0 * side, a.1 * side);
        let q = Point2D::new(b.0 * side, b.1 * side);
        let d = w.distance(p, q);
        prop_assert!((d - w.distance(q, p)).abs() < 1e-9);
        prop_assert!(d <= side * std::f64::consts::FRAC_1_SQRT_2 + 1e-9);
    }

    #[test]
    fn quadrature_exact_on_cubics(c in prop::array::uniform4(-5.0..5.0f64), lo in -3.0..0.0f64, hi in 0.1..3.0f64) {
        let f = |x: f64| c[0] + c[1] * x + c[2] * x * x + c[3] * x * x * x;
        let anti = |x: f64| c[0] * x + c[1] * x * x / 2.0 + c[2] * x.powi(3) / 3.0 + c[3] * x.powi(4) / 4.0;
        let q = integrate(f, lo, hi, Tolerance::absolute(1e-12)).unwrap();
        prop_assert!((q.value - (anti(hi) - anti(lo))).abs() < 1e-9);
    }
}

/// Bound-to-asymptote ratios approach one as density grows. Several
/// bounds converge only logarithmically, so the trend is checked rather
/// than a fixed band.
#[test]
fn bounds_converge_towards_asymptote() {
    let gap = |lh: f64| {
        let mu = se_muw_bounds(lh, 4.0).unwrap();
        let p = NetworkParams::default().with_lambda_hat_m(lh);
        let mm = se_mmw_bounds_tractable(&p).unwrap();
        [mu.lower / mu.asymptotic, mu.upper / mu.asymptotic, mm.lower / mm.asymptotic, mm.upper / mm.asymptotic]
            .map(|r| (r - 1.0).abs())
    };
    let (near, far) = (gap(1e3), gap(1e6));
    for (n, f) in near.iter().zip(far.iter()) {
        assert!(f < n, "ratio gap did not shrink: {n} -> {f}");
    }
}
