//! Spatial model: homogeneous Poisson point processes on a square window,
//! strongest-power association, uniformly random scheduling, and the
//! activity and cell-size statistics that go with them.

use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma_lr, ln_gamma};

use crate::error::{invalid, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2D {
    pub x: f64,
    pub y: f64,
}

impl Point2D {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }
}

/// Square observation window `[0, side)²`, optionally with a torus metric.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Window {
    side: f64,
    wrap: bool,
}

impl Window {
    pub fn new(side: f64, wrap: bool) -> Result<Self> {
        if !(side.is_finite() && side > 0.0) {
            return Err(invalid("side", side, "window side must be positive and finite"));
        }
        Ok(Self { side, wrap })
    }

    pub fn torus(side: f64) -> Result<Self> {
        Self::new(side, true)
    }

    /// Smallest torus window whose expected point count at `density` is `count`.
    pub fn for_expected_count(density: f64, count: f64) -> Result<Self> {
        if !(density > 0.0) {
            return Err(invalid("density", density, "must be positive"));
        }
        Self::torus((count / density).sqrt())
    }

    pub fn side(&self) -> f64 {
        self.side
    }

    pub fn wraps(&self) -> bool {
        self.wrap
    }

    pub fn area(&self) -> f64 {
        self.side * self.side
    }

    pub fn centre(&self) -> Point2D {
        Point2D::new(0.5 * self.side, 0.5 * self.side)
    }

    pub fn contains(&self, p: Point2D) -> bool {
        (0.0..self.side).contains(&p.x) && (0.0..self.side).contains(&p.y)
    }

    fn fold(&self, d: f64) -> f64 {
        if self.wrap {
            d - self.side * (d / self.side).round()
        } else {
            d
        }
    }

    /// Vector from `from` to `to` under the window metric.
    pub fn displacement(&self, from: Point2D, to: Point2D) -> (f64, f64) {
        (self.fold(to.x - from.x), self.fold(to.y - from.y))
    }

    pub fn distance_sq(&self, a: Point2D, b: Point2D) -> f64 {
        let (dx, dy) = self.displacement(a, b);
        dx * dx + dy * dy
    }

    pub fn distance(&self, a: Point2D, b: Point2D) -> f64 {
        self.distance_sq(a, b).sqrt()
    }
}

/// A realisation of a point process together with its intensity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointSet {
    points: Vec<Point2D>,
    density: f64,
    window: Window,
}

impl PointSet {
    pub fn new(points: Vec<Point2D>, density: f64, window: Window) -> Result<Self> {
        if !(density >= 0.0 && density.is_finite()) {
            return Err(invalid("density", density, "must be finite and nonnegative"));
        }
        if let Some(p) = points
            .iter()
            .find(|p| !(p.x.is_finite() && p.y.is_finite() && window.contains(**p)))
        {
            return Err(Error::Domain(format!(
                "point ({}, {}) lies outside the {}-m window",
                p.x,
                p.y,
                window.side()
            )));
        }
        Ok(Self {
            points,
            density,
            window,
        })
    }

    pub fn points(&self) -> &[Point2D] {
        &self.points
    }

    pub fn density(&self) -> f64 {
        self.density
    }

    pub fn window(&self) -> Window {
        self.window
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Superposition of two independent processes on the same window.
    /// Points of `self` keep their indices; those of `other` follow.
    pub fn superpose(&self, other: &PointSet) -> Result<PointSet> {
        if self.window != other.window {
            return Err(Error::Domain(
                "cannot superpose point sets on different windows".into(),
            ));
        }
        let mut points = self.points.clone();
        points.extend_from_slice(&other.points);
        Ok(PointSet {
            points,
            density: self.density + other.density,
            window: self.window,
        })
    }
}

/// Homogeneous PPP of the given intensity on `window`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, window: Window, rng: &mut R) -> Result<PointSet> {
    if !(density >= 0.0 && density.is_finite()) {
        return Err(invalid("density", density, "must be finite and nonnegative"));
    }
    let mean = density * window.area();
    let count = if mean > 0.0 {
        Poisson::new(mean)
            .map_err(|_| invalid("density", density, "Poisson mean out of range"))?
            .sample(rng) as usize
    } else {
        0
    };
    let side = window.side();
    let points = (0..count)
        .map(|_| Point2D::new(rng.random::<f64>() * side, rng.random::<f64>() * side))
        .collect();
    Ok(PointSet {
        points,
        density,
        window,
    })
}

/// Transmit power and path-loss exponent shared by every BS of a tier.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TierRadio {
    pub tx_power: f64,
    pub path_loss_exp: f64,
}

impl TierRadio {
    fn validate(&self) -> Result<()> {
        if !(self.tx_power > 0.0 && self.tx_power.is_finite()) {
            return Err(invalid("tx_power", self.tx_power, "must be positive"));
        }
        if !(self.path_loss_exp > 0.0) {
            return Err(invalid(
                "path_loss_exp",
                self.path_loss_exp,
                "must be positive",
            ));
        }
        Ok(())
    }

    fn received(&self, distance_sq: f64) -> f64 {
        self.tx_power * distance_sq.powf(-0.5 * self.path_loss_exp)
    }
}

/// Uniform bucket grid for nearest/strongest queries under the window metric.
#[derive(Debug, Clone)]
pub struct SpatialIndex<'a> {
    set: &'a PointSet,
    cells_per_side: usize,
    cell: f64,
    starts: Vec<usize>,
    order: Vec<usize>,
}

impl<'a> SpatialIndex<'a> {
    pub fn new(set: &'a PointSet) -> Self {
        let window = set.window();
        // About two points per cell.
        let target = ((set.len() as f64) / 2.0).sqrt().floor() as usize;
        let cells_per_side = target.clamp(1, 4096);
        let cell = window.side() / cells_per_side as f64;
        let n_cells = cells_per_side * cells_per_side;
        let cell_of = |p: &Point2D| {
            let cx = ((p.x / cell) as usize).min(cells_per_side - 1);
            let cy = ((p.y / cell) as usize).min(cells_per_side - 1);
            cy * cells_per_side + cx
        };
        let mut starts = vec![0usize; n_cells + 1];
        for p in set.points() {
            starts[cell_of(p) + 1] += 1;
        }
        for i in 0..n_cells {
            starts[i + 1] += starts[i];
        }
        let mut fill = starts.clone();
        let mut order = vec![0usize; set.len()];
        for (i, p) in set.points().iter().enumerate() {
            let c = cell_of(p);
            order[fill[c]] = i;
            fill[c] += 1;
        }
        Self {
            set,
            cells_per_side,
            cell,
            starts,
            order,
        }
    }

    fn cell_members(&self, cx: usize, cy: usize) -> &[usize] {
        let c = cy * self.cells_per_side + cx;
        &self.order[self.starts[c]..self.starts[c + 1]]
    }

    /// Index and distance of the point receiving the strongest signal at `q`
    /// (nearest point, ties to lowest index), restricted to `max_radius`.
    pub fn strongest(
        &self,
        q: Point2D,
        radio: &TierRadio,
        max_radius: Option<f64>,
    ) -> Option<(usize, f64)> {
        let window = self.set.window();
        let pts = self.set.points();
        let mut best: Option<(f64, usize, f64)> = None; // (power, index, dist²)
        let consider = |i: usize, best: &mut Option<(f64, usize, f64)>| {
            let d2 = window.distance_sq(q, pts[i]);
            let power = radio.received(d2);
            let better = match *best {
                None => true,
                Some((bp, bi, _)) => power > bp || (power == bp && i < bi),
            };
            if better {
                *best = Some((power, i, d2));
            }
        };
        let n = self.cells_per_side;
        let qx = ((q.x / self.cell).floor() as isize).clamp(0, n as isize - 1);
        let qy = ((q.y / self.cell).floor() as isize).clamp(0, n as isize - 1);
        let mut k = 0usize;
        loop {
            if window.wraps() && 2 * k + 1 > n {
                // Ring would overlap itself on the torus: scan everything.
                best = None;
                for i in 0..pts.len() {
                    consider(i, &mut best);
                }
                break;
            }
            if !window.wraps() && k > n {
                break;
            }
            let ki = k as isize;
            for dy in -ki..=ki {
                for dx in -ki..=ki {
                    if dx.abs().max(dy.abs()) != ki {
                        continue;
                    }
                    let (mut cx, mut cy) = (qx + dx, qy + dy);
                    if window.wraps() {
                        cx = cx.rem_euclid(n as isize);
                        cy = cy.rem_euclid(n as isize);
                    } else if cx < 0 || cy < 0 || cx >= n as isize || cy >= n as isize {
                        continue;
                    }
                    for &i in self.cell_members(cx as usize, cy as usize) {
                        consider(i, &mut best);
                    }
                }
            }
            // Every unvisited point is at least k·cell away.
            let reach = k as f64 * self.cell;
            if let Some((_, _, d2)) = best {
                if d2 <= reach * reach {
                    break;
                }
            }
            if let Some(r) = max_radius {
                if reach >= r {
                    break;
                }
            }
            k += 1;
        }
        let (_, i, d2) = best?;
        let d = d2.sqrt();
        match max_radius {
            Some(r) if d > r => None,
            _ => Some((i, d)),
        }
    }
}

/// User-to-BS association and the per-BS scheduling outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    serving: Vec<Option<usize>>,
    offsets: Vec<usize>,
    members: Vec<usize>,
    scheduled: Vec<Option<usize>>,
}

impl AssociationMap {
    fn from_serving(serving: Vec<Option<usize>>, n_bs: usize) -> Self {
        let mut offsets = vec![0usize; n_bs + 1];
        for b in serving.iter().flatten() {
            offsets[b + 1] += 1;
        }
        for i in 0..n_bs {
            offsets[i + 1] += offsets[i];
        }
        let mut fill = offsets.clone();
        let mut members = vec![0usize; offsets[n_bs]];
        for (u, b) in serving.iter().enumerate() {
            if let Some(b) = *b {
                members[fill[b]] = u;
                fill[b] += 1;
            }
        }
        Self {
            serving,
            offsets,
            members,
            scheduled: vec![None; n_bs],
        }
    }

    /// Map in which no user has a serving BS.
    pub fn unserved(users: usize) -> Self {
        Self::from_serving(vec![None; users], 0)
    }

    pub fn user_count(&self) -> usize {
        self.serving.len()
    }

    pub fn bs_count(&self) -> usize {
        self.scheduled.len()
    }

    /// Serving BS of `user`, if any BS qualified.
    pub fn serving(&self, user: usize) -> Option<usize> {
        self.serving[user]
    }

    /// Users associated with `bs`, in increasing index order.
    pub fn members(&self, bs: usize) -> &[usize] {
        &self.members[self.offsets[bs]..self.offsets[bs + 1]]
    }

    pub fn scheduled(&self, bs: usize) -> Option<usize> {
        self.scheduled[bs]
    }

    pub fn is_active(&self, bs: usize) -> bool {
        self.scheduled[bs].is_some()
    }

    /// `(bs, scheduled user)` for every active BS, in BS index order.
    pub fn active_links(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.scheduled
            .iter()
            .enumerate()
            .filter_map(|(b, u)| u.map(|u| (b, u)))
    }

    pub fn active_count(&self) -> usize {
        self.scheduled.iter().filter(|s| s.is_some()).count()
    }
}

/// Associate every user with the BS delivering the strongest received power,
/// optionally restricted to BSs within `los_radius`.
pub fn associate_strongest(
    users: &PointSet,
    bss: &PointSet,
    radio: &TierRadio,
    los_radius: Option<f64>,
) -> Result<AssociationMap> {
    if bss.is_empty() {
        return Err(Error::Domain("association needs at least one BS".into()));
    }
    radio.validate()?;
    if let Some(r) = los_radius {
        if !(r > 0.0) {
            return Err(invalid("los_radius", r, "must be positive"));
        }
    }
    if users.window() != bss.window() {
        return Err(Error::Domain(
            "users and BSs must share one window".into(),
        ));
    }
    let index = SpatialIndex::new(bss);
    let serving = users
        .points()
        .iter()
        .map(|&u| index.strongest(u, radio, los_radius).map(|(b, _)| b))
        .collect();
    Ok(AssociationMap::from_serving(serving, bss.len()))
}

/// Each BS with `k ≥ 1` associated users schedules one of them with
/// probability `1/k`; BSs without users stay inactive.
pub fn schedule_active<R: Rng + ?Sized>(mut assoc: AssociationMap, rng: &mut R) -> AssociationMap {
    for b in 0..assoc.bs_count() {
        let members = assoc.members(b);
        assoc.scheduled[b] = match members.len() {
            0 => None,
            k => Some(members[rng.random_range(0..k)]),
        };
    }
    assoc
}

/// Probability that a BS has at least one associated user when the
/// BS-to-user density ratio is `lambda_hat`.
pub fn active_bs_probability(lambda_hat: f64) -> Result<f64> {
    if !(lambda_hat > 0.0 && lambda_hat.is_finite()) {
        return Err(invalid("lambda_hat", lambda_hat, "must be positive"));
    }
    let x = 1.0 / (3.5 * lambda_hat);
    // 1 - (1 + x)^-3.5, written to keep precision when x is small.
    Ok(-(-3.5 * x.ln_1p()).exp_m1())
}

/// Probability that a given user is scheduled, `p_a · λ̂`.
pub fn user_selection_probability(lambda_hat: f64) -> Result<f64> {
    Ok(active_bs_probability(lambda_hat)? * lambda_hat)
}

/// Cell-size law `f(x) = 3.5^3.5/Γ(3.5) · λ^4.5 x^3.5 e^{-3.5 λ x}`, a Gamma
/// law with shape 4.5 and rate 3.5λ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VoronoiCellLaw {
    bs_density: f64,
}

impl VoronoiCellLaw {
    pub const SHAPE: f64 = 4.5;
    pub const RATE_PER_DENSITY: f64 = 3.5;

    pub fn new(bs_density: f64) -> Result<Self> {
        if !(bs_density > 0.0 && bs_density.is_finite()) {
            return Err(invalid("bs_density", bs_density, "must be positive"));
        }
        Ok(Self { bs_density })
    }

    fn rate(&self) -> f64 {
        Self::RATE_PER_DENSITY * self.bs_density
    }

    pub fn pdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        let l = self.bs_density;
        let ln = 3.5 * 3.5f64.ln() - ln_gamma(3.5) + 4.5 * l.ln() + 3.5 * x.ln() - 3.5 * l * x;
        ln.exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        if x <= 0.0 {
            0.0
        } else {
            gamma_lr(Self::SHAPE, self.rate() * x)
        }
    }

    pub fn mean(&self) -> f64 {
        Self::SHAPE / self.rate()
    }

    pub fn variance(&self) -> f64 {
        Self::SHAPE / (self.rate() * self.rate())
    }
}

/// Density of the cell-size law at `x` for BS density `bs_density`.
pub fn voronoi_cell_pdf(x: f64, bs_density: f64) -> Result<f64> {
    if x < 0.0 {
        return Err(invalid("x", x, "cell size must be nonnegative"));
    }
    Ok(VoronoiCellLaw::new(bs_density)?.pdf(x))
}

/// Nearest-BS cell areas estimated by uniform sampling of the window.
/// Returns one area per BS (m²).
pub fn estimate_cell_areas<R: Rng + ?Sized>(
    bss: &PointSet,
    samples: usize,
    rng: &mut R,
) -> Result<Vec<f64>> {
    if bss.is_empty() {
        return Err(Error::Domain("cell areas need at least one BS".into()));
    }
    let window = bss.window();
    let radio = TierRadio {
        tx_power: 1.0,
        path_loss_exp: 2.0,
    };
    let index = SpatialIndex::new(bss);
    let mut counts = vec![0usize; bss.len()];
    for _ in 0..samples {
        let q = Point2D::new(
            rng.random::<f64>() * window.side(),
            rng.random::<f64>() * window.side(),
        );
        if let Some((b, _)) = index.strongest(q, &radio, None) {
            counts[b] += 1;
        }
    }
    let per_sample = window.area() / samples as f64;
    Ok(counts.into_iter().map(|c| c as f64 * per_sample).collect())
}
