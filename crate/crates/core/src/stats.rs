//! Weighted point measures on the transversal torus, histograms, relative
//! standard deviation and grid Kolmogorov–Smirnov statistics.

use std::fmt;
use std::str::FromStr;

use crate::manifold::ManifoldSample;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum StatsError {
    #[error("empty-input: no points to weight")]
    EmptyInput,
    #[error("total weight must be positive and finite")]
    ZeroWeight,
    #[error("grid-mismatch: {0} vs {1} bins per side")]
    GridMismatch(usize, usize),
    #[error("bins per side must be at least 2, got {0}")]
    TooFewBins(usize),
    #[error("insufficient-depths: asked for {wanted}, have {have}")]
    InsufficientDepths { wanted: usize, have: usize },
    #[error("unknown weight mode {0:?} (expected plain, rho, angle or rho_angle)")]
    UnknownMode(String),
}

/// Which per-sample weight builds the measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WeightMode {
    Plain,
    Rho,
    Angle,
    RhoAngle,
}

impl WeightMode {
    pub const ALL: [WeightMode; 4] = [WeightMode::Plain, WeightMode::Rho, WeightMode::Angle, WeightMode::RhoAngle];

    #[inline]
    pub fn weight(self, rho: Scalar, angle: Scalar) -> Scalar {
        match self {
            WeightMode::Plain => Scalar::ONE,
            WeightMode::Rho => rho,
            WeightMode::Angle => angle,
            WeightMode::RhoAngle => rho * angle,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            WeightMode::Plain => "plain",
            WeightMode::Rho => "rho",
            WeightMode::Angle => "angle",
            WeightMode::RhoAngle => "rho_angle",
        }
    }
}

impl fmt::Display for WeightMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for WeightMode {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "plain" | "u" => Ok(WeightMode::Plain),
            "rho" => Ok(WeightMode::Rho),
            "angle" | "a" => Ok(WeightMode::Angle),
            "rho_angle" | "rhoa" | "rho-angle" => Ok(WeightMode::RhoAngle),
            _ => Err(StatsError::UnknownMode(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WeightedPoint {
    pub x: Scalar,
    pub z: Scalar,
    pub weight: Scalar,
}

/// Normalized weighted Dirac measure on `[0,1)²`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedPoints2D {
    pub points: Vec<WeightedPoint>,
    /// Sum of the raw weights, `W(N)`.
    pub total_weight: Scalar,
}

impl WeightedPoints2D {
    /// Normalizes raw `(x, z, weight)` triples.
    pub fn from_raw(raw: impl IntoIterator<Item = (Scalar, Scalar, Scalar)>) -> Result<Self, StatsError> {
        let mut points: Vec<WeightedPoint> = raw
            .into_iter()
            .map(|(x, z, weight)| WeightedPoint { x, z, weight })
            .collect();
        if points.is_empty() {
            return Err(StatsError::EmptyInput);
        }
        let total: Scalar = points.iter().map(|p| p.weight).sum();
        if !(total > Scalar::ZERO) || !total.is_finite() {
            return Err(StatsError::ZeroWeight);
        }
        for p in &mut points {
            p.weight /= total;
        }
        Ok(Self {
            points,
            total_weight: total,
        })
    }

    /// Equal weights, as for slice samples of the noisy chain.
    pub fn uniform(points: impl IntoIterator<Item = (Scalar, Scalar)>) -> Result<Self, StatsError> {
        Self::from_raw(points.into_iter().map(|(x, z)| (x, z, Scalar::ONE)))
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// `Σᵘ`, `Σᵘ_ρ`, `Σᵘ_a` or `Σᵘ_{ρa}` from manifold samples.
pub fn build_weighted(samples: &[ManifoldSample], mode: WeightMode) -> Result<WeightedPoints2D, StatsError> {
    WeightedPoints2D::from_raw(
        samples
            .iter()
            .map(|s| (s.x, s.z, mode.weight(s.rho, s.angle_weight))),
    )
}

/// `B×B` histogram with `floor(x·B)` indexing.
#[derive(Debug, Clone, PartialEq)]
pub struct BinGrid {
    b: usize,
    weights: Vec<Scalar>,
    total: Scalar,
}

#[inline]
fn cell(v: Scalar, b: usize) -> usize {
    let t = (v * b as f64).floor().to_f64();
    if t <= 0.0 {
        0
    } else {
        (t as usize).min(b - 1)
    }
}

impl BinGrid {
    pub fn new(b: usize) -> Result<Self, StatsError> {
        if b < 2 {
            return Err(StatsError::TooFewBins(b));
        }
        Ok(Self {
            b,
            weights: vec![Scalar::ZERO; b * b],
            total: Scalar::ZERO,
        })
    }

    pub fn bins(&self) -> usize {
        self.b
    }

    #[inline]
    pub fn add(&mut self, x: Scalar, z: Scalar, w: Scalar) {
        let i = cell(x, self.b);
        let j = cell(z, self.b);
        self.weights[i * self.b + j] += w;
        self.total += w;
    }

    /// Weight of cell `(i, j)`, `i` indexing `x`.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.weights[i * self.b + j]
    }

    pub fn total(&self) -> Scalar {
        self.total
    }

    pub fn cells(&self) -> &[Scalar] {
        &self.weights
    }

    pub fn merge(&mut self, other: &BinGrid) -> Result<(), StatsError> {
        if other.b != self.b {
            return Err(StatsError::GridMismatch(self.b, other.b));
        }
        for (a, b) in self.weights.iter_mut().zip(&other.weights) {
            *a += *b;
        }
        self.total += other.total;
        Ok(())
    }
}

/// Histogram of a weighted measure. Summation runs in point order.
pub fn bin(points: &WeightedPoints2D, b: usize) -> Result<BinGrid, StatsError> {
    let mut grid = BinGrid::new(b)?;
    for p in &points.points {
        grid.add(p.x, p.z, p.weight);
    }
    Ok(grid)
}

/// `sqrt(mean((w − w̄)²)) / w̄` over all cells.
pub fn rsd(grid: &BinGrid) -> Result<Scalar, StatsError> {
    rsd_of(&grid.weights)
}

/// Relative standard deviation of any list of cell weights.
pub fn rsd_of(cells: &[Scalar]) -> Result<Scalar, StatsError> {
    let n = cells.len() as f64;
    let total: Scalar = cells.iter().sum();
    if !(total > Scalar::ZERO) {
        return Err(StatsError::ZeroWeight);
    }
    let mean = total / n;
    let var: Scalar = cells.iter().map(|w| (*w - mean).sqr()).sum::<Scalar>() / n;
    Ok(var.sqrt() / mean)
}

/// `F(i/B, j/B)` for `0 ≤ i, j ≤ B`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistFunction {
    b: usize,
    values: Vec<Scalar>,
}

impl DistFunction {
    pub fn from_grid(grid: &BinGrid) -> Result<Self, StatsError> {
        let b = grid.b;
        let total = grid.total;
        if !(total > Scalar::ZERO) {
            return Err(StatsError::ZeroWeight);
        }
        let n = b + 1;
        let mut values = vec![Scalar::ZERO; n * n];
        for i in 1..=b {
            let mut row = Scalar::ZERO;
            for j in 1..=b {
                row += grid.get(i - 1, j - 1);
                values[i * n + j] = values[(i - 1) * n + j] + row;
            }
        }
        for v in &mut values {
            *v /= total;
        }
        Ok(Self { b, values })
    }

    pub fn bins(&self) -> usize {
        self.b
    }

    /// `F(i/B, j/B)`.
    pub fn get(&self, i: usize, j: usize) -> Scalar {
        self.values[i * (self.b + 1) + j]
    }
}

pub fn dist_function(points: &WeightedPoints2D, b: usize) -> Result<DistFunction, StatsError> {
    DistFunction::from_grid(&bin(points, b)?)
}

/// `max |F(c,d) − c·d|` over grid nodes.
pub fn ks_uniform(f: &DistFunction) -> Scalar {
    let b = f.b as f64;
    let mut best = Scalar::ZERO;
    for i in 0..=f.b {
        for j in 0..=f.b {
            let cd = Scalar::from_f64(i as f64) * Scalar::from_f64(j as f64) / (b * b);
            best = best.max((f.get(i, j) - cd).abs());
        }
    }
    best
}

/// `max |F₁ − F₂|` over grid nodes.
pub fn ks_two_sample(f1: &DistFunction, f2: &DistFunction) -> Result<Scalar, StatsError> {
    if f1.b != f2.b {
        return Err(StatsError::GridMismatch(f1.b, f2.b));
    }
    Ok(f1
        .values
        .iter()
        .zip(&f2.values)
        .fold(Scalar::ZERO, |m, (a, b)| m.max((*a - *b).abs())))
}

/// Uniform mixture of the first `k` measures.
pub fn cesaro_average(per_depth: &[WeightedPoints2D], k: usize) -> Result<WeightedPoints2D, StatsError> {
    if k == 0 || per_depth.len() < k {
        return Err(StatsError::InsufficientDepths {
            wanted: k,
            have: per_depth.len(),
        });
    }
    let scale = Scalar::ONE / Scalar::from_f64(k as f64);
    let mut points = Vec::with_capacity(per_depth[..k].iter().map(|m| m.len()).sum());
    for m in &per_depth[..k] {
        points.extend(m.points.iter().map(|p| WeightedPoint {
            weight: p.weight * scale,
            ..*p
        }));
    }
    let total_weight = per_depth[..k].iter().map(|m| m.total_weight).sum::<Scalar>() * scale;
    Ok(WeightedPoints2D { points, total_weight })
}

/// Counts over a `g×g×g` partition of the 3-torus.
#[derive(Debug, Clone, PartialEq)]
pub struct Occupancy3 {
    g: usize,
    counts: Vec<u64>,
}

impl Occupancy3 {
    pub fn new(g: usize) -> Result<Self, StatsError> {
        if g < 2 {
            return Err(StatsError::TooFewBins(g));
        }
        Ok(Self {
            g,
            counts: vec![0; g * g * g],
        })
    }

    pub fn add(&mut self, p: crate::linalg::Vec3) {
        let [x, y, z] = p.as_array().map(|c| cell(c, self.g));
        self.counts[(x * self.g + y) * self.g + z] += 1;
    }

    pub fn rsd(&self) -> Result<Scalar, StatsError> {
        let cells: Vec<Scalar> = self.counts.iter().map(|&c| Scalar::from_u64(c)).collect();
        rsd_of(&cells)
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}
