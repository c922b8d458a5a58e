//! Command dispatch. Each command resolves its settings, runs the model
//! and returns a document; the output is written once at the end.

use std::f64::consts::LN_2;
use std::io::Write;
use std::path::Path;

use udn_core::allocation::{
    allocation_limits, allocation_sweep, log_grid, low_high_boundary, mmw_ul_bandwidth, A1Policy,
    DecoupledLos, LosModel, PaprMode, Scenario, SpectrumParams,
};
use udn_core::analytic_se::{se_mmw_bounds_integral, se_mmw_bounds_tractable, se_muw_bounds, NetworkParams, SeBounds};
use udn_core::blockage::{blockage_params, BuildingStats, FloorLognormal};
use udn_core::pointprocess::Window;
use udn_core::simulator::{sweep_se, Direction, ReceiverMode, SimConfig, Tier};

use crate::config::{Command, ExperimentSpec, Resolved};
use crate::io::{self, AllocationRow, BlockageRow, Document, SeRow};
use crate::CliError;

/// Run one experiment and write its table.
pub fn run(spec: &ExperimentSpec) -> Result<(), CliError> {
    let cfg = Resolved::load(spec)?;
    let threads: usize = cfg.get("threads")?;
    if threads > 0 {
        // A pool may already exist when called twice in one process; the
        // first configuration then stays in effect.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    let mut header = vec![("command".to_string(), cfg.command.to_string())];
    header.extend(cfg.entries().map(|(k, v)| (k.to_string(), v.to_string())));
    let bytes = match cfg.command {
        Command::Blockage => {
            let input = cfg.raw("input_csv");
            if input.is_empty() {
                return Err(CliError::Config("blockage needs an input file (--input or input_csv=)".into()));
            }
            guard_output(spec, Path::new(input))?;
            let rows = blockage(Path::new(input))?;
            io::render(&Document { header, rows }, spec.format)?
        }
        Command::Se => {
            let rows = analytic_se(&cfg)?;
            io::render(&Document { header, rows }, spec.format)?
        }
        Command::Simulate | Command::Sweep => {
            let (rows, notes) = simulate(&cfg)?;
            header.extend(notes);
            io::render(&Document { header, rows }, spec.format)?
        }
        Command::Allocate => {
            let (rows, notes) = allocate(&cfg)?;
            header.extend(notes);
            io::render(&Document { header, rows }, spec.format)?
        }
    };
    match &spec.output_path {
        Some(path) => std::fs::write(path, bytes)
            .map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display()))),
        None => std::io::stdout()
            .write_all(&bytes)
            .map_err(|e| CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}

fn guard_output(spec: &ExperimentSpec, input: &Path) -> Result<(), CliError> {
    if let Some(out) = &spec.output_path {
        let same = match (out.canonicalize(), input.canonicalize()) {
            (Ok(a), Ok(b)) => a == b,
            _ => false,
        };
        if same {
            return Err(CliError::Config(format!("output {} would overwrite the input", out.display())));
        }
    }
    Ok(())
}

fn blockage(input: &Path) -> Result<Vec<BlockageRow>, CliError> {
    io::read_buildings(input)?
        .into_iter()
        .map(|b| {
            let stats = BuildingStats {
                avg_perimeter_m: b.avg_perimeter_m,
                avg_area_m2: b.avg_area_m2,
                coverage: b.coverage_fraction,
                floors: FloorLognormal { mu_ln: b.lognormal_mu, sigma_ln: b.lognormal_sigma },
                floor_height_m: b.floor_height_m,
                bs_height_m: b.bs_height_m,
            };
            let p = blockage_params(&stats, None).map_err(|e| with_context(e.into(), &b.region))?;
            Ok(BlockageRow {
                region: b.region,
                beta: p.beta,
                eta: p.eta,
                r_los_2d_m: p.r_los_2d,
                r_los_3d_m: p.r_los_3d,
            })
        })
        .collect()
}

fn with_context(e: CliError, what: &str) -> CliError {
    match e {
        CliError::Config(m) => CliError::Config(format!("{what}: {m}")),
        CliError::Numeric(m) => CliError::Numeric(format!("{what}: {m}")),
    }
}

fn network(cfg: &Resolved) -> Result<NetworkParams, CliError> {
    let p = NetworkParams {
        lambda_m: cfg.get("lambda_m_per_m2")?,
        lambda_mu: cfg.get("lambda_mu_per_m2")?,
        lambda_u: cfg.get("lambda_u_per_m2")?,
        alpha_m: cfg.get("alpha_m")?,
        alpha_mu: cfg.get("alpha_mu")?,
        theta: cfg.get("theta_rad")?,
        r_los: cfg.get("r_los_m")?,
        p_m_dl: cfg.get("p_m_dl_w")?,
        p_m_ul: cfg.get("p_m_ul_w")?,
        p_mu_dl: cfg.get("p_mu_dl_w")?,
        p_mu_ul: cfg.get("p_mu_ul_w")?,
    };
    p.validate()?;
    Ok(p)
}

fn grid(cfg: &Resolved, prefix: &str) -> Result<Vec<f64>, CliError> {
    let g = match cfg.list(&format!("{prefix}_list"))? {
        Some(list) => list,
        None => {
            let lo: f64 = cfg.get(&format!("{prefix}_min"))?;
            let hi: f64 = cfg.get(&format!("{prefix}_max"))?;
            let n: usize = cfg.get(&format!("{prefix}_points"))?;
            if !(lo > 0.0 && hi >= lo) || n == 0 {
                return Err(CliError::Config(format!(
                    "{prefix} grid needs 0 < min <= max and at least one point"
                )));
            }
            log_grid(lo, hi, n)
        }
    };
    if g.iter().any(|&x| !(x > 0.0 && x.is_finite())) {
        return Err(CliError::Config(format!("{prefix} values must be positive and finite")));
    }
    Ok(g)
}

fn targets(cfg: &Resolved) -> Result<Vec<(Tier, Direction)>, CliError> {
    let tiers: Vec<Tier> = match cfg.raw("tier") {
        "both" => vec![Tier::Muw, Tier::Mmw],
        t => vec![t.parse()?],
    };
    let dirs: Vec<Direction> = match cfg.raw("direction") {
        "both" => vec![Direction::Dl, Direction::Ul],
        d => vec![d.parse()?],
    };
    Ok(tiers
        .iter()
        .flat_map(|&t| dirs.iter().map(move |&d| (t, d)))
        .collect())
}

fn bounds_for(p: &NetworkParams, tier: Tier, lambda_hat: f64, mode: &str) -> Result<SeBounds, CliError> {
    Ok(match (tier, mode) {
        (Tier::Muw, _) => se_muw_bounds(lambda_hat, p.alpha_mu)?,
        (Tier::Mmw, "integral") => se_mmw_bounds_integral(&p.with_lambda_hat_m(lambda_hat))?,
        (Tier::Mmw, "tractable") => se_mmw_bounds_tractable(&p.with_lambda_hat_m(lambda_hat))?,
        (Tier::Mmw, other) => {
            return Err(CliError::Config(format!("mmw_bounds must be `integral` or `tractable`, got `{other}`")))
        }
    })
}

fn analytic_se(cfg: &Resolved) -> Result<Vec<SeRow>, CliError> {
    let p = network(cfg)?;
    let mode = cfg.raw("mmw_bounds");
    let targets = targets(cfg)?;
    let mut rows = Vec::new();
    for lh in grid(cfg, "lambda_hat")? {
        for &(tier, direction) in &targets {
            let b = bounds_for(&p, tier, lh, mode)?;
            rows.push(SeRow {
                lambda_hat: lh,
                tier: tier.to_string(),
                direction: direction.to_string(),
                se_mean: None,
                se_ci: None,
                lower_bound: b.lower,
                upper_bound: b.upper,
                asymptotic: b.asymptotic,
                interference_free_fraction: None,
                usable_replications: None,
                replications_run: None,
            });
        }
    }
    Ok(rows)
}

type Notes = Vec<(String, String)>;

fn simulate(cfg: &Resolved) -> Result<(Vec<SeRow>, Notes), CliError> {
    let p = network(cfg)?;
    let targets = targets(cfg)?;
    let expected_users: f64 = cfg.get("expected_users")?;
    let decoupled: bool = cfg.get("decoupled")?;
    if decoupled && !targets.contains(&(Tier::Mmw, Direction::Ul)) {
        return Err(CliError::Config("decoupled=true applies to tier=mmw, direction=ul only".into()));
    }
    let (tier0, dir0) = targets[0];
    let mut template = SimConfig::new(p, tier0, dir0)?;
    template.window = Window::for_expected_count(p.lambda_u, expected_users)?;
    template.replications = cfg.get("replications")?;
    template.min_usable = cfg.get("min_usable")?;
    template.max_replications = cfg.get("max_replications")?;
    template.fading_draws = cfg.get("fading_draws")?;
    template.master_seed = cfg.get("seed")?;
    template.receivers = cfg.raw("receivers").parse::<ReceiverMode>()?;
    template.decoupled = decoupled;
    let grid = grid(cfg, "lambda_hat")?;

    let mut warnings: Vec<String> = Vec::new();
    for &lh in &grid {
        for &(tier, direction) in &targets {
            let c = SimConfig { tier, direction, decoupled: decoupled && tier == Tier::Mmw && direction == Direction::Ul, ..template }
                .with_lambda_hat(lh);
            c.validate()?;
            for w in c.warnings() {
                if !warnings.contains(&w) {
                    warnings.push(w);
                }
            }
        }
    }

    let mut rows = Vec::new();
    for r in sweep_se(&grid, &template, &targets)? {
        let n = r.estimate.n;
        if n < 2 {
            warnings.push(format!(
                "{}/{} λ̂={}: {n} usable replications; raise max_replications or use receivers=all",
                r.tier, r.direction, r.lambda_hat
            ));
        }
        rows.push(SeRow {
            lambda_hat: r.lambda_hat,
            tier: r.tier.to_string(),
            direction: r.direction.to_string(),
            // No mean without a usable replication, no interval without two.
            se_mean: (n > 0).then_some(r.estimate.mean),
            se_ci: (n > 1).then_some(r.estimate.ci_half_width),
            lower_bound: r.bounds.lower,
            upper_bound: r.bounds.upper,
            asymptotic: r.bounds.asymptotic,
            interference_free_fraction: Some(r.estimate.interference_free_fraction),
            usable_replications: Some(n),
            replications_run: Some(r.estimate.replications_run),
        });
    }
    let notes = warnings
        .into_iter()
        .enumerate()
        .map(|(i, w)| (format!("warning.{}", i + 1), w))
        .collect();
    Ok((rows, notes))
}

fn allocate(cfg: &Resolved) -> Result<(Vec<AllocationRow>, Notes), CliError> {
    let grid = grid(cfg, "lambda_hat_m")?;
    let los = match cfg.raw("p_los") {
        "density" => LosModel::FromDensity,
        v => LosModel::Fixed(cfg.get("p_los").map_err(|_| {
            CliError::Config(format!("p_los must be `density` or a probability, got `{v}`"))
        })?),
    };
    let decoupled_los = match cfg.raw("decoupled_los") {
        "mmw" => DecoupledLos::MmwDensity,
        "merged" => DecoupledLos::MergedDensity,
        v => return Err(CliError::Config(format!("decoupled_los must be `mmw` or `merged`, got `{v}`"))),
    };
    let a1 = match cfg.raw("a1_policy") {
        "report" => A1Policy::Report,
        "enforce" => A1Policy::Enforce,
        v => return Err(CliError::Config(format!("a1_policy must be `report` or `enforce`, got `{v}`"))),
    };
    let template = Scenario {
        lambda_hat_m: grid[0],
        lambda_hat_mu: cfg.get("lambda_hat_mu")?,
        lambda_u: cfg.get("lambda_u_per_m2")?,
        alpha_m: cfg.get("alpha_m")?,
        alpha_mu: cfg.get("alpha_mu")?,
        r_los: cfg.get("r_los_m")?,
        los,
        decoupled_los,
        a1,
    };
    let mut spectrum = SpectrumParams {
        w_m: cfg.get("w_m_hz")?,
        w_mu: cfg.get("w_mu_hz")?,
        w_m_ul: cfg.get("w_m_ul_hz")?,
        f_s: cfg.get("f_s_hz")?,
        delta: cfg.get("papr_threshold")?,
        epsilon: cfg.get("papr_outage")?,
        zeta: cfg.get("zeta")?,
    };
    let mut notes: Notes = Vec::new();
    let mode = match cfg.raw("w_m_ul_source") {
        "fixed" => None,
        "papr_printed" => Some(PaprMode::AsPrinted),
        "papr_exact" => Some(PaprMode::ExactInversion),
        v => {
            return Err(CliError::Config(format!(
                "w_m_ul_source must be `fixed`, `papr_printed` or `papr_exact`, got `{v}`"
            )))
        }
    };
    if let Some(mode) = mode {
        let bw = mmw_ul_bandwidth(spectrum.f_s, spectrum.delta, spectrum.epsilon, mode, spectrum.w_m)?;
        spectrum.w_m_ul = bw.hz;
        notes.push(("note.w_m_ul_papr_hz".into(), bw.unclamped_hz.to_string()));
    }
    spectrum.validate()?;
    let (w_eff, clamped) = spectrum.effective_w_m_ul();
    notes.push(("note.w_m_ul_effective_hz".into(), w_eff.to_string()));
    if clamped {
        notes.push(("warning.w_m_ul".into(), "UL mmW bandwidth exceeds W_m and was clamped to it".into()));
    }

    let sweep = allocation_sweep(&template, &spectrum, &grid)?;
    let violations = sweep.iter().filter(|r| !r.a1_holds).count();
    let (min_mu, max_m) = allocation_limits(&spectrum)?;
    notes.push(("note.a1_violations".into(), violations.to_string()));
    notes.push((
        "note.low_high_boundary_lambda_hat_m".into(),
        low_high_boundary(&template, &spectrum)?.map_or("none".into(), |b| b.to_string()),
    ));
    notes.push(("note.min_beta_mu".into(), min_mu.to_string()));
    notes.push(("note.max_beta_m".into(), max_m.to_string()));

    let rows = sweep
        .into_iter()
        .map(|r| AllocationRow {
            lambda_hat_m: r.lambda_hat_m,
            region: r.region,
            beta_m: r.beta_m,
            beta_mu: r.beta_mu,
            r_d: r.r_d,
            r_u: r.r_u,
            r_d_decoupled: r.r_d_decoupled,
            gain: r.gain,
            r_d_bps: r.r_d / LN_2,
            r_u_bps: r.r_u / LN_2,
            r_d_decoupled_bps: r.r_d_decoupled / LN_2,
            beta_m_decoupled: r.beta_m_decoupled,
            beta_mu_decoupled: r.beta_mu_decoupled,
            a1_holds: r.a1_holds,
        })
        .collect();
    Ok((rows, notes))
}
