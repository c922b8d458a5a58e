//! Reproducibility of the Monte Carlo engine.

use udn_core::analytic_se::NetworkParams;
use udn_core::simulator::{estimate_se, sweep_se, Direction, SimConfig, Tier};

fn small(tier: Tier, direction: Direction) -> SimConfig {
    let params = NetworkParams { lambda_u: 0.01, ..NetworkParams::default() };
    let mut cfg = SimConfig::new(params, tier, direction).unwrap().with_lambda_hat(20.0);
    cfg.replications = 16;
    cfg.min_usable = 4;
    cfg.max_replications = 64;
    cfg.master_seed = 77;
    cfg
}

fn in_pool<T: Send>(threads: usize, f: impl FnOnce() -> T + Send) -> T {
    rayon::ThreadPoolBuilder::new().num_threads(threads).build().unwrap().install(f)
}

#[test]
fn estimate_independent_of_thread_count() {
    for tier in [Tier::Muw, Tier::Mmw] {
        let cfg = small(tier, Direction::Dl);
        let one = in_pool(1, || estimate_se(&cfg).unwrap());
        let four = in_pool(4, || estimate_se(&cfg).unwrap());
        assert_eq!(one, four);
    }
}

#[test]
fn seed_changes_estimate() {
    let cfg = small(Tier::Muw, Direction::Ul);
    let other = SimConfig { master_seed: 78, ..cfg };
    assert_ne!(estimate_se(&cfg).unwrap().mean, estimate_se(&other).unwrap().mean);
}

#[test]
fn sweep_rows_follow_grid_order() {
    let cfg = small(Tier::Muw, Direction::Dl);
    let grid = [5.0, 20.0, 50.0];
    let rows = sweep_se(&grid, &cfg, &[(Tier::Muw, Direction::Dl), (Tier::Muw, Direction::Ul)]).unwrap();
    assert_eq!(rows.len(), 6);
    for (i, row) in rows.iter().enumerate() {
        assert_eq!(row.lambda_hat, grid[i / 2]);
    }
    assert!(sweep_se(&[], &cfg, &[(Tier::Muw, Direction::Dl)]).is_err());
}
