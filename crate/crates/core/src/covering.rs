//! Coverings by disjoint Borel cells with bounded-overlap enlargements.
//!
//! Ball coverings use Bergman-metric annuli of width `r/2` split into
//! angular sectors sized so each cell's metric diameter stays at or below
//! `2r`; plane coverings use axis-aligned cubes of side `2r / sqrt(2n)`
//! (diameter exactly `2r`). Enlargements `G_j` are the exact
//! `r`-neighborhoods: for cubes through box distance, for annulus sectors
//! through the closed-form hyperbolic distance to a polar rectangle (the
//! distance is convex in the radial coordinate and monotone in the angular
//! gap, so clamping both is exact). The overlap bound `N` is empirical,
//! probed at corners and random points, and recorded in the covering.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::space::{Family, Space};
use crate::{Error, Result};

/// Which metric the covering lives in.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    BergmanBall,
    EuclideanPlane,
}

/// Bounded region to cover, centered at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "shape", rename_all = "kebab-case")]
pub enum Region {
    /// Metric ball of the covering's metric (Bergman for the ball,
    /// Euclidean for the plane).
    MetricBall { radius: f64 },
    /// Axis-aligned square (plane only), `[-half_width, half_width]^(2n)`.
    Square { half_width: f64 },
}

/// One covering cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "type", content = "params", rename_all = "kebab-case")]
pub enum Cell {
    /// Bergman-metric annulus `beta in [beta_lo, beta_hi)` intersected with
    /// the angular sector `theta in [theta_lo, theta_hi)`.
    AnnulusSector {
        beta_lo: f64,
        beta_hi: f64,
        theta_lo: f64,
        theta_hi: f64,
    },
    /// Half-open cube `prod [lo_i, lo_i + side)` in real coordinates.
    Cube { lo: Vec<f64>, side: f64 },
}

/// Serialized covering: metric, radius, recorded overlap bound, cells.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoveringRecord {
    pub metric: Metric,
    pub n: usize,
    pub r: f64,
    pub region: Region,
    /// Empirical upper bound on how many enlargements share a point.
    pub overlap_bound: usize,
    pub cells: Vec<Cell>,
}

/// Ring of sectors of a ball covering, for O(1) cell lookup.
#[derive(Debug, Clone)]
struct AnnulusMeta {
    beta_lo: f64,
    beta_hi: f64,
    sectors: usize,
    first_cell: usize,
}

/// Grid structure of a plane covering.
#[derive(Debug, Clone)]
struct GridMeta {
    anchor: f64,
    side: f64,
    per_axis: usize,
    dims: usize,
    /// Grid slot -> cell index (slots outside a disk region are absent).
    slots: Vec<Option<usize>>,
}

/// A covering together with its runtime membership index.
#[derive(Debug, Clone)]
pub struct Covering {
    pub metric: Metric,
    pub n: usize,
    pub r: f64,
    pub region: Region,
    pub overlap_bound: usize,
    pub cells: Vec<Cell>,
    annuli: Vec<AnnulusMeta>,
    grid: Option<GridMeta>,
}

/// Hyperbolic distance between `(beta1, theta1)` and `(beta2, theta2)` in
/// geodesic polar coordinates of the Bergman metric (`beta = arctanh |z|`),
/// by the curvature -4 law of cosines.
fn polar_distance(beta1: f64, beta2: f64, dtheta: f64) -> f64 {
    let c = (2.0 * beta1).cosh() * (2.0 * beta2).cosh()
        - (2.0 * beta1).sinh() * (2.0 * beta2).sinh() * dtheta.cos();
    0.5 * c.max(1.0).acosh()
}

/// Exact distance from a point to a closed polar rectangle.
fn distance_to_sector(
    beta_w: f64,
    theta_w: f64,
    beta_lo: f64,
    beta_hi: f64,
    theta_lo: f64,
    theta_hi: f64,
) -> f64 {
    let tau = 2.0 * std::f64::consts::PI;
    let dtheta = if theta_w >= theta_lo && theta_w <= theta_hi {
        0.0
    } else {
        (theta_w - theta_hi)
            .rem_euclid(tau)
            .min((theta_lo - theta_w).rem_euclid(tau))
    };
    // cosh(2d) is strictly convex in the radial coordinate with the
    // stationary point tanh(2 beta) = tanh(2 beta_w) cos(dtheta)
    let stationary = 0.5 * ((2.0 * beta_w).tanh() * dtheta.cos()).atanh();
    let beta_c = stationary.clamp(beta_lo, beta_hi);
    polar_distance(beta_w, beta_c, dtheta)
}

fn polar_of(z: &Complex64) -> (f64, f64) {
    let rho = z.norm().min(1.0 - 1e-16);
    let mut th = z.im.atan2(z.re);
    if th < 0.0 {
        th += 2.0 * std::f64::consts::PI;
    }
    (rho.atanh(), th)
}

impl Covering {
    pub fn record(&self) -> CoveringRecord {
        CoveringRecord {
            metric: self.metric,
            n: self.n,
            r: self.r,
            region: self.region,
            overlap_bound: self.overlap_bound,
            cells: self.cells.clone(),
        }
    }

    /// Rebuilds a covering from its record. Cell lists that no longer form
    /// the canonical grid (for example with deleted cells) fall back to
    /// linear membership scans, which keeps verification honest.
    pub fn from_record(rec: CoveringRecord) -> Result<Self> {
        let mut c = Covering {
            metric: rec.metric,
            n: rec.n,
            r: rec.r,
            region: rec.region,
            overlap_bound: rec.overlap_bound,
            cells: rec.cells,
            annuli: Vec::new(),
            grid: None,
        };
        c.rebuild_index();
        Ok(c)
    }

    fn rebuild_index(&mut self) {
        self.annuli.clear();
        self.grid = None;
        match self.metric {
            Metric::BergmanBall => {
                let mut i = 0;
                while i < self.cells.len() {
                    let (lo, hi) = match &self.cells[i] {
                        Cell::AnnulusSector {
                            beta_lo, beta_hi, ..
                        } => (*beta_lo, *beta_hi),
                        Cell::Cube { .. } => return,
                    };
                    let mut count = 0;
                    while i + count < self.cells.len() {
                        match &self.cells[i + count] {
                            Cell::AnnulusSector { beta_lo, .. } if *beta_lo == lo => count += 1,
                            _ => break,
                        }
                    }
                    self.annuli.push(AnnulusMeta {
                        beta_lo: lo,
                        beta_hi: hi,
                        sectors: count,
                        first_cell: i,
                    });
                    i += count;
                }
                // only canonical rings (uniform, gapless sectors) keep the
                // fast index; edited records fall back to linear scans
                let canonical = self.annuli.iter().all(|meta| {
                    let step = 2.0 * std::f64::consts::PI / meta.sectors as f64;
                    (0..meta.sectors).all(|s| {
                        matches!(
                            &self.cells[meta.first_cell + s],
                            Cell::AnnulusSector { theta_lo, theta_hi, .. }
                                if (theta_lo - step * s as f64).abs() < 1e-12
                                    && (theta_hi - step * (s + 1) as f64).abs() < 1e-12
                        )
                    })
                });
                if !canonical {
                    self.annuli.clear();
                }
            }
            Metric::EuclideanPlane => {
                let side = match self.cells.first() {
                    Some(Cell::Cube { side, .. }) => *side,
                    _ => return,
                };
                let half = match self.region {
                    Region::MetricBall { radius } => radius,
                    Region::Square { half_width } => half_width,
                };
                let dims = 2 * self.n;
                let per_axis = ((2.0 * half) / side).ceil().max(1.0) as usize;
                let mut slots = vec![None; per_axis.pow(dims as u32)];
                let mut canonical = true;
                for (idx, cell) in self.cells.iter().enumerate() {
                    if let Cell::Cube { lo, .. } = cell {
                        let mut slot = 0usize;
                        let mut ok = lo.len() == dims;
                        for (axis, &l) in lo.iter().enumerate() {
                            let i = ((l + half) / side).round() as isize;
                            if i < 0 || (ok && i as usize >= per_axis) {
                                ok = false;
                                break;
                            }
                            slot += (i as usize) * per_axis.pow(axis as u32);
                        }
                        if ok {
                            slots[slot] = Some(idx);
                        } else {
                            canonical = false;
                        }
                    } else {
                        canonical = false;
                    }
                }
                if canonical {
                    self.grid = Some(GridMeta {
                        anchor: -half,
                        side,
                        per_axis,
                        dims,
                        slots,
                    });
                }
            }
        }
    }

    /// Exact membership in the (half-open) cell `F_j`.
    pub fn cell_contains(&self, j: usize, z: &[Complex64]) -> bool {
        match &self.cells[j] {
            Cell::AnnulusSector {
                beta_lo,
                beta_hi,
                theta_lo,
                theta_hi,
            } => {
                let (beta, th) = polar_of(&z[0]);
                beta >= *beta_lo && beta < *beta_hi && th >= *theta_lo && th < *theta_hi
            }
            Cell::Cube { lo, side } => {
                let coords = flatten(z);
                lo.iter()
                    .zip(&coords)
                    .all(|(&l, &x)| x >= l && x < l + side)
            }
        }
    }

    /// Index of the unique cell containing `z`, if any.
    pub fn locate(&self, z: &[Complex64]) -> Option<usize> {
        match self.metric {
            Metric::BergmanBall if !self.annuli.is_empty() => {
                let (beta, th) = polar_of(&z[0]);
                for meta in &self.annuli {
                    if beta >= meta.beta_lo && beta < meta.beta_hi {
                        let step = 2.0 * std::f64::consts::PI / meta.sectors as f64;
                        let sct = ((th / step) as usize).min(meta.sectors - 1);
                        let j = meta.first_cell + sct;
                        if self.cell_contains(j, z) {
                            return Some(j);
                        }
                    }
                }
                None
            }
            Metric::EuclideanPlane if self.grid.is_some() => {
                let g = self.grid.as_ref().unwrap();
                let coords = flatten(z);
                let mut slot = 0usize;
                for (axis, &x) in coords.iter().enumerate() {
                    let i = ((x - g.anchor) / g.side).floor();
                    if i < 0.0 || i as usize >= g.per_axis {
                        return None;
                    }
                    slot += (i as usize) * g.per_axis.pow(axis as u32);
                }
                g.slots[slot].filter(|&j| self.cell_contains(j, z))
            }
            _ => (0..self.cells.len()).find(|&j| self.cell_contains(j, z)),
        }
    }

    /// Exact distance from `z` to the cell in the covering's metric.
    pub fn distance_to_cell(&self, j: usize, z: &[Complex64]) -> f64 {
        match &self.cells[j] {
            Cell::AnnulusSector {
                beta_lo,
                beta_hi,
                theta_lo,
                theta_hi,
            } => {
                let (beta, th) = polar_of(&z[0]);
                distance_to_sector(beta, th, *beta_lo, *beta_hi, *theta_lo, *theta_hi)
            }
            Cell::Cube { lo, side } => {
                let coords = flatten(z);
                let mut d_sq = 0.0;
                for (&l, &x) in lo.iter().zip(&coords) {
                    let gap = if x < l {
                        l - x
                    } else if x > l + side {
                        x - (l + side)
                    } else {
                        0.0
                    };
                    d_sq += gap * gap;
                }
                d_sq.sqrt()
            }
        }
    }

    /// Membership in the enlargement `G_j = { d(z, F_j) <= r }`.
    pub fn enlarged_contains(&self, j: usize, z: &[Complex64]) -> bool {
        self.distance_to_cell(j, z) <= self.r
    }

    /// Indices of every enlargement containing `z`.
    pub fn neighbors_of(&self, z: &[Complex64]) -> Vec<usize> {
        match self.metric {
            Metric::BergmanBall if !self.annuli.is_empty() => {
                let (beta, th) = polar_of(&z[0]);
                let mut out = Vec::new();
                for meta in &self.annuli {
                    if beta < meta.beta_lo - self.r || beta > meta.beta_hi + self.r {
                        continue;
                    }
                    let step = 2.0 * std::f64::consts::PI / meta.sectors as f64;
                    // angular reach: a path of length r from radius beta to
                    // the annulus stays above max(beta, lo) - r
                    let rho_min = beta.max(meta.beta_lo) - self.r;
                    let idx_window = if rho_min > 0.1 {
                        let spread = self.r / (0.5 * (2.0 * rho_min).sinh());
                        ((spread / step).ceil() as usize + 1).min(meta.sectors)
                    } else {
                        meta.sectors
                    };
                    if 2 * idx_window + 1 >= meta.sectors {
                        for s in 0..meta.sectors {
                            let j = meta.first_cell + s;
                            if self.enlarged_contains(j, z) {
                                out.push(j);
                            }
                        }
                    } else {
                        let center = (th / step) as isize;
                        for off in -(idx_window as isize)..=(idx_window as isize) {
                            let s = (center + off).rem_euclid(meta.sectors as isize) as usize;
                            let j = meta.first_cell + s;
                            if self.enlarged_contains(j, z) {
                                out.push(j);
                            }
                        }
                        out.sort_unstable();
                        out.dedup();
                    }
                }
                out
            }
            _ => (0..self.cells.len())
                .filter(|&j| self.enlarged_contains(j, z))
                .collect(),
        }
    }

    /// Count of enlargements containing `z`.
    pub fn overlap_count(&self, z: &[Complex64]) -> usize {
        self.neighbors_of(z).len()
    }

    fn region_contains(&self, z: &[Complex64]) -> bool {
        match (self.metric, self.region) {
            (Metric::BergmanBall, Region::MetricBall { radius }) => {
                let rho = z[0].norm();
                rho < 1.0 && rho.atanh() <= radius
            }
            (Metric::EuclideanPlane, Region::MetricBall { radius }) => {
                crate::space::norm_sq(z).sqrt() <= radius
            }
            (Metric::EuclideanPlane, Region::Square { half_width }) => {
                flatten(z).iter().all(|&x| x.abs() <= half_width)
            }
            (Metric::BergmanBall, Region::Square { .. }) => false,
        }
    }

    /// Deterministic sample points of the region (grid plus seeded
    /// Monte-Carlo), used by construction probing and verification.
    fn region_samples(&self, count: usize, seed: u64) -> Vec<Vec<Complex64>> {
        let mut out = Vec::with_capacity(2 * count);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        match (self.metric, self.region) {
            (Metric::BergmanBall, Region::MetricBall { radius }) => {
                let g = (count as f64).sqrt().ceil() as usize;
                for i in 0..g {
                    let beta = radius * (i as f64 + 0.5) / g as f64;
                    for j in 0..g {
                        let th = 2.0 * std::f64::consts::PI * j as f64 / g as f64;
                        out.push(vec![Complex64::from_polar(beta.tanh(), th)]);
                    }
                }
                for _ in 0..count {
                    let beta = radius * rng.gen::<f64>();
                    let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
                    out.push(vec![Complex64::from_polar(beta.tanh(), th)]);
                }
            }
            (Metric::EuclideanPlane, _) => {
                let half = match self.region {
                    Region::MetricBall { radius } => radius,
                    Region::Square { half_width } => half_width,
                };
                let dims = 2 * self.n;
                let g = ((count as f64).powf(1.0 / dims as f64).ceil() as usize).max(2);
                let mut idx = vec![0usize; dims];
                'grid: loop {
                    let coords: Vec<f64> = idx
                        .iter()
                        .map(|&i| -half + 2.0 * half * (i as f64 + 0.5) / g as f64)
                        .collect();
                    let z = unflatten(&coords);
                    if self.region_contains(&z) {
                        out.push(z);
                    }
                    let mut k = 0;
                    loop {
                        idx[k] += 1;
                        if idx[k] < g {
                            break;
                        }
                        idx[k] = 0;
                        k += 1;
                        if k == dims {
                            break 'grid;
                        }
                    }
                }
                for _ in 0..count {
                    let coords: Vec<f64> = (0..dims)
                        .map(|_| half * (2.0 * rng.gen::<f64>() - 1.0))
                        .collect();
                    let z = unflatten(&coords);
                    if self.region_contains(&z) {
                        out.push(z);
                    }
                }
            }
            (Metric::BergmanBall, Region::Square { .. }) => {}
        }
        out
    }

    /// Corner points of every cell; overlap maxima concentrate here.
    fn corner_probes(&self) -> Vec<Vec<Complex64>> {
        let mut out = Vec::new();
        for cell in &self.cells {
            match cell {
                Cell::AnnulusSector {
                    beta_lo,
                    beta_hi,
                    theta_lo,
                    theta_hi,
                } => {
                    for &b in &[*beta_lo, *beta_hi] {
                        for &th in &[*theta_lo, *theta_hi] {
                            out.push(vec![Complex64::from_polar(b.tanh(), th)]);
                        }
                    }
                }
                Cell::Cube { lo, side } => {
                    let dims = lo.len();
                    for mask in 0..(1usize << dims) {
                        let coords: Vec<f64> = lo
                            .iter()
                            .enumerate()
                            .map(|(i, &l)| if mask >> i & 1 == 1 { l + side } else { l })
                            .collect();
                        out.push(unflatten(&coords));
                    }
                }
            }
        }
        out
    }

    /// Exact diameter of a cell in the covering's metric. For a polar
    /// rectangle the distance is convex in each radius and monotone in the
    /// angular gap, so the diameter is attained on corner pairs.
    pub fn cell_diameter(&self, j: usize) -> f64 {
        match &self.cells[j] {
            Cell::AnnulusSector {
                beta_lo,
                beta_hi,
                theta_lo,
                theta_hi,
            } => {
                let width = theta_hi - theta_lo;
                let mut best: f64 = 0.0;
                for &b1 in &[*beta_lo, *beta_hi] {
                    for &b2 in &[*beta_lo, *beta_hi] {
                        best = best.max(polar_distance(b1, b2, width));
                    }
                }
                best
            }
            Cell::Cube { side, lo } => side * (lo.len() as f64).sqrt(),
        }
    }
}

fn flatten(z: &[Complex64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(2 * z.len());
    for c in z {
        out.push(c.re);
        out.push(c.im);
    }
    out
}

fn unflatten(x: &[f64]) -> Vec<Complex64> {
    x.chunks(2).map(|c| Complex64::new(c[0], c[1])).collect()
}

/// Builds a covering of the given region by disjoint cells of metric
/// diameter at most `2r`, with a recorded empirical overlap bound.
pub fn build_covering(space: &Space, r: f64, region: Region) -> Result<Covering> {
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "covering radius must be positive, got {r}"
        )));
    }
    match region {
        Region::MetricBall { radius } if !(radius > 0.0 && radius.is_finite()) => {
            return Err(Error::InvalidParameter("region must be bounded".into()));
        }
        Region::Square { half_width } if !(half_width > 0.0 && half_width.is_finite()) => {
            return Err(Error::InvalidParameter("region must be bounded".into()));
        }
        _ => {}
    }
    let mut covering = match space.family {
        Family::Bergman => {
            if space.n != 1 {
                // nothing downstream consumes two-dimensional hyperbolic
                // coverings; the sphere-sector construction is left out
                return Err(Error::Unsupported(
                    "ball coverings are implemented for n = 1 only".into(),
                ));
            }
            let radius = match region {
                Region::MetricBall { radius } => radius,
                Region::Square { .. } => {
                    return Err(Error::InvalidParameter(
                        "ball coverings take a metric-ball region".into(),
                    ))
                }
            };
            build_ball_covering(r, radius)
        }
        Family::Fock => build_plane_covering(space.n, r, region),
    };
    covering.rebuild_index();
    // probe the overlap bound at corners and region samples; the recorded N
    // carries headroom because it is an empirical bound, not a theorem
    let mut n_max = 0usize;
    for z in covering
        .corner_probes()
        .into_iter()
        .chain(covering.region_samples(3000, 0x5eed))
    {
        n_max = n_max.max(covering.overlap_count(&z));
    }
    covering.overlap_bound = if n_max <= 1 {
        n_max
    } else {
        n_max + (n_max / 4).max(2)
    };
    Ok(covering)
}

fn build_ball_covering(r: f64, region_radius: f64) -> Covering {
    let width = r / 2.0;
    let annuli = (region_radius / width).ceil().max(1.0) as usize;
    let mut cells = Vec::new();
    for i in 0..annuli {
        let beta_lo = width * i as f64;
        // the outermost annulus is clipped to the region, with a hair of
        // slack so points exactly on the region boundary stay covered;
        // interior annuli share exact half-open boundaries
        let outer = width * (i + 1) as f64;
        let beta_hi = if outer >= region_radius {
            region_radius + 1e-9
        } else {
            outer
        };
        // outer-edge circumference pi sinh(2 beta_hi); arc per sector <= 1.5 r
        let circumference = std::f64::consts::PI * (2.0 * beta_hi).sinh();
        let sectors = (circumference / (1.5 * r)).ceil().max(1.0) as usize;
        let step = 2.0 * std::f64::consts::PI / sectors as f64;
        for sct in 0..sectors {
            cells.push(Cell::AnnulusSector {
                beta_lo,
                beta_hi,
                theta_lo: step * sct as f64,
                theta_hi: step * (sct + 1) as f64,
            });
        }
    }
    Covering {
        metric: Metric::BergmanBall,
        n: 1,
        r,
        region: Region::MetricBall {
            radius: region_radius,
        },
        overlap_bound: 0,
        cells,
        annuli: Vec::new(),
        grid: None,
    }
}

fn build_plane_covering(n: usize, r: f64, region: Region) -> Covering {
    let dims = 2 * n;
    let side = 2.0 * r / (dims as f64).sqrt(); // diameter exactly 2r
    let half = match region {
        Region::MetricBall { radius } => radius,
        Region::Square { half_width } => half_width,
    };
    let per_axis = ((2.0 * half) / side).ceil().max(1.0) as usize;
    let mut cells = Vec::new();
    let mut idx = vec![0usize; dims];
    'grid: loop {
        let lo: Vec<f64> = idx.iter().map(|&i| -half + side * i as f64).collect();
        let keep = match region {
            Region::Square { .. } => true,
            Region::MetricBall { radius } => {
                // nearest point of the cube to the origin
                let d_sq: f64 = lo
                    .iter()
                    .map(|&l| {
                        let nearest = 0.0_f64.max(l).min(l + side);
                        nearest * nearest
                    })
                    .sum();
                d_sq.sqrt() <= radius
            }
        };
        if keep {
            cells.push(Cell::Cube { lo, side });
        }
        let mut k = 0;
        loop {
            idx[k] += 1;
            if idx[k] < per_axis {
                break;
            }
            idx[k] = 0;
            k += 1;
            if k == dims {
                break 'grid;
            }
        }
    }
    Covering {
        metric: Metric::EuclideanPlane,
        n,
        r,
        region,
        overlap_bound: 0,
        cells,
        annuli: Vec::new(),
        grid: None,
    }
}

/// Verification report for a covering.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CoverReport {
    pub max_overlap: usize,
    pub max_diameter: f64,
    pub gaps_found: bool,
    /// Any sampled point claimed by more than one cell.
    pub disjointness_violated: bool,
    pub samples_used: usize,
}

/// Monte-Carlo plus deterministic-grid check of disjointness, coverage,
/// diameter and enlargement overlap.
pub fn verify_covering(covering: &Covering, samples: usize, seed: u64) -> CoverReport {
    let pts = covering.region_samples(samples.max(16), seed);
    let mut gaps = false;
    let mut disjoint_violated = false;
    let mut max_overlap = 0usize;
    for z in pts.iter().chain(covering.corner_probes().iter()) {
        max_overlap = max_overlap.max(covering.overlap_count(z));
    }
    for z in &pts {
        let owners = (0..covering.cells.len())
            .filter(|&j| covering.cell_contains(j, z))
            .count();
        if owners == 0 {
            gaps = true;
        }
        if owners > 1 {
            disjoint_violated = true;
        }
    }
    let mut max_diameter: f64 = 0.0;
    for j in 0..covering.cells.len() {
        max_diameter = max_diameter.max(covering.cell_diameter(j));
    }
    CoverReport {
        max_overlap,
        max_diameter,
        gaps_found: gaps,
        disjointness_violated: disjoint_violated,
        samples_used: pts.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn polar_distance_sanity() {
        // coincident points, radial separation, and antipodal composition
        assert_abs_diff_eq!(polar_distance(0.7, 0.7, 0.0), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(polar_distance(0.3, 1.1, 0.0), 0.8, epsilon = 1e-12);
        assert_abs_diff_eq!(
            polar_distance(0.5, 0.7, std::f64::consts::PI),
            1.2,
            epsilon = 1e-12
        );
        // cross-check against the coordinate formula
        let a = Complex64::from_polar(0.6_f64.tanh(), 0.3);
        let b = Complex64::from_polar(1.4_f64.tanh(), 2.1);
        let direct = crate::geometry::bergman_metric(&[a], &[b]).unwrap();
        assert_abs_diff_eq!(polar_distance(0.6, 1.4, 1.8), direct, epsilon = 1e-10);
    }

    #[test]
    fn sector_distance_matches_dense_minimum() {
        let (lo, hi, t1, t2) = (1.0, 1.5, 0.4, 0.9);
        for &(bw, tw) in &[(0.3, 0.1), (2.0, 1.5), (1.2, 2.5), (1.25, 0.6), (0.2, 4.0)] {
            let exact = distance_to_sector(bw, tw, lo, hi, t1, t2);
            let mut dense = f64::INFINITY;
            for i in 0..=200 {
                let b = lo + (hi - lo) * i as f64 / 200.0;
                for j in 0..=200 {
                    let th = t1 + (t2 - t1) * j as f64 / 200.0;
                    dense = dense.min(polar_distance(bw, b, tw - th));
                }
            }
            assert!(
                (exact - dense).abs() < 1e-4,
                "point ({bw},{tw}): exact {exact} vs dense {dense}"
            );
            assert!(exact <= dense + 1e-12);
        }
    }

    #[test]
    fn plane_grid_matches_hand_count() {
        // r = 1 over [-2, 2]^2: side sqrt(2), 3x3 grid
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let c = build_covering(&s, 1.0, Region::Square { half_width: 2.0 }).unwrap();
        assert_eq!(c.cells.len(), 9);
        if let Cell::Cube { side, .. } = &c.cells[0] {
            assert!((side - 2.0_f64.sqrt()).abs() < 1e-14);
        } else {
            panic!("expected cubes");
        }
        // overlap at the origin stays within the hand-enumeration bound
        let origin = vec![Complex64::new(0.0, 0.0)];
        assert!(c.overlap_count(&origin) <= 16);
    }

    #[test]
    fn plane_covering_verifies() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let c = build_covering(&s, 1.0, Region::Square { half_width: 2.0 }).unwrap();
        let rep = verify_covering(&c, 4000, 7);
        assert!(!rep.gaps_found);
        assert!(!rep.disjointness_violated);
        assert!(rep.max_diameter <= 2.0 + 1e-12);
        assert!(rep.max_overlap <= c.overlap_bound);
    }

    #[test]
    fn ball_single_cell_degenerate() {
        let s = Space::bergman(1, 2.0).unwrap();
        // region far smaller than one annulus: a single full-disk cell
        let c = build_covering(&s, 3.0, Region::MetricBall { radius: 0.4 }).unwrap();
        assert_eq!(c.cells.len(), 1);
        assert_eq!(c.overlap_bound, 1);
        let rep = verify_covering(&c, 500, 3);
        assert!(!rep.gaps_found);
        assert_eq!(rep.max_overlap, 1);
    }

    #[test]
    fn ball_covering_invariants_hold() {
        let s = Space::bergman(1, 2.0).unwrap();
        for &r in &[0.5, 1.0, 2.0] {
            let c = build_covering(&s, r, Region::MetricBall { radius: 3.0 }).unwrap();
            let rep = verify_covering(&c, 3000, 11);
            assert!(!rep.gaps_found, "gaps at r={r}");
            assert!(!rep.disjointness_violated, "overlap of F cells at r={r}");
            assert!(
                rep.max_diameter <= 2.0 * r + 1e-9,
                "diameter {} > 2r at r={r}",
                rep.max_diameter
            );
            assert!(rep.max_overlap <= c.overlap_bound);
            assert!(c.overlap_bound >= 1);
        }
    }

    #[test]
    fn neighbors_agree_with_linear_scan() {
        let s = Space::bergman(1, 2.0).unwrap();
        let c = build_covering(&s, 1.0, Region::MetricBall { radius: 3.0 }).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..200 {
            let beta = 3.0 * rng.gen::<f64>();
            let th = 2.0 * std::f64::consts::PI * rng.gen::<f64>();
            let z = vec![Complex64::from_polar(beta.tanh(), th)];
            let fast = c.neighbors_of(&z);
            let slow: Vec<usize> = (0..c.cells.len())
                .filter(|&j| c.enlarged_contains(j, &z))
                .collect();
            assert_eq!(fast, slow);
            assert_eq!(c.locate(&z), (0..c.cells.len()).find(|&j| c.cell_contains(j, &z)));
        }
    }

    #[test]
    fn deleted_cell_leaves_gap() {
        let s = Space::fock(1, 2.0, 1.0).unwrap();
        let c = build_covering(&s, 1.0, Region::Square { half_width: 2.0 }).unwrap();
        let mut rec = c.record();
        rec.cells.remove(4);
        let broken = Covering::from_record(rec).unwrap();
        let rep = verify_covering(&broken, 4000, 7);
        assert!(rep.gaps_found);
    }

    #[test]
    fn record_roundtrip() {
        let s = Space::bergman(1, 2.0).unwrap();
        let c = build_covering(&s, 1.0, Region::MetricBall { radius: 2.0 }).unwrap();
        let json = serde_json::to_string(&c.record()).unwrap();
        let back: CoveringRecord = serde_json::from_str(&json).unwrap();
        let c2 = Covering::from_record(back).unwrap();
        assert_eq!(c.cells.len(), c2.cells.len());
        assert_eq!(c.overlap_bound, c2.overlap_bound);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = Space::bergman(1, 2.0).unwrap();
        assert!(build_covering(&s, 0.0, Region::MetricBall { radius: 1.0 }).is_err());
        assert!(build_covering(
            &s,
            1.0,
            Region::MetricBall {
                radius: f64::INFINITY
            }
        )
        .is_err());
        let s2 = Space::bergman(2, 2.0).unwrap();
        assert!(build_covering(&s2, 1.0, Region::MetricBall { radius: 1.0 }).is_err());
    }
}
