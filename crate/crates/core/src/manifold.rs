//! Intersections of the strong unstable manifold of the fixed point with the
//! transversal torus `{y = 0}`.
//!
//! A point at integer height `y0` on the lifted leaf is found by shooting: a
//! seed `C λ⁻ⁿ v_p` on the eigenline is pushed forward `n` times and `C` is
//! adjusted until the image has `y = y0`. The derivative of the image with
//! respect to `C` is carried along; it is tangent to the leaf and gives the
//! Jacobian density and the angle weight.

use std::ops::RangeInclusive;

use rayon::prelude::*;

use crate::linalg::Vec3;
use crate::maps::{MapError, MapSpec};
use crate::scalar::{Real, Scalar};
use crate::torus::reduce1;

/// How the eigendirection coefficient is corrected between passes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UpdateRule {
    /// `C ← C + (y0 − q_y) / (∂q_y/∂C)`.
    Newton,
    /// `C ← C·(1 + mix·(y0 − q_y)/y0)`.
    Mixing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootConfig {
    pub depth: u32,
    pub mix: Scalar,
    pub update: UpdateRule,
    pub tol_y: Scalar,
    pub max_iter: u32,
    pub delta_q: Scalar,
}

impl Default for ShootConfig {
    fn default() -> Self {
        Self {
            depth: 50,
            mix: Scalar::from_f64(0.1),
            update: UpdateRule::Newton,
            tol_y: Scalar::from_f64(1e-24),
            max_iter: 2000,
            delta_q: Scalar::from_f64(1e-10),
        }
    }
}

impl ShootConfig {
    pub fn validate(&self) -> Result<(), ShootError> {
        let bad = |what: &str| Err(ShootError::InvalidConfig(what.to_owned()));
        if self.depth < 1 {
            return bad("depth must be at least 1");
        }
        if !(self.mix > Scalar::ZERO && self.mix <= Scalar::ONE) {
            return bad("mix must lie in (0, 1]");
        }
        if !(self.tol_y > Scalar::ZERO) || !self.tol_y.is_finite() {
            return bad("tol_y must be positive");
        }
        if !(self.delta_q > Scalar::ZERO) || !self.delta_q.is_finite() {
            return bad("delta_q must be positive");
        }
        if self.max_iter < 1 {
            return bad("max_iter must be at least 1");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ShootError {
    #[error("invalid shoot configuration: {0}")]
    InvalidConfig(String),
    #[error("y0 must be nonzero")]
    ZeroLevel,
    #[error("no-convergence at y0 = {y0}: residual {residual:e} after {iterations} passes")]
    NoConvergence { y0: f64, residual: f64, iterations: u32 },
    #[error("degenerate-difference: finite-difference displacement vanished at y0 = {0}")]
    DegenerateDifference(f64),
    #[error("tangent-parallel-to-transversal: |t_y| = {0:e}")]
    TangentParallel(f64),
    #[error("dominant eigenvalue at the fixed point must exceed 1, got {0}")]
    NotExpanding(f64),
    #[error(transparent)]
    Map(#[from] MapError),
}

/// One intersection point with its weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ManifoldSample {
    pub y0: i64,
    pub x: Scalar,
    pub z: Scalar,
    pub tangent: Vec3,
    pub rho: Scalar,
    pub angle_weight: Scalar,
    pub seed_scale: Scalar,
}

/// Converged point at a given height on the lifted leaf.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LevelSolution {
    /// Eigendirection coefficient `C`.
    pub c: Scalar,
    /// Lifted point `f̃ⁿ(C λ⁻ⁿ v_p)`.
    pub point: Vec3,
    /// `∂point/∂C`.
    pub derivative: Vec3,
    pub iterations: u32,
}

/// `1/|t_y|` for a unit tangent.
pub fn angle_weight(tangent: Vec3) -> Result<Scalar, ShootError> {
    let ty = tangent.y.abs();
    if ty.to_f64() < 1e-6 {
        return Err(ShootError::TangentParallel(ty.to_f64()));
    }
    Ok(Scalar::ONE / ty)
}

/// Shooting state for one map and configuration.
#[derive(Debug, Clone)]
pub struct Shooter {
    spec: MapSpec,
    cfg: ShootConfig,
    lambda: Scalar,
    vector: Vec3,
    /// `v_p λ⁻ⁿ`.
    seed_dir: Vec3,
    seed_dir_f64: Vec3<f64>,
}

impl Shooter {
    pub fn new(spec: MapSpec, cfg: ShootConfig) -> Result<Self, ShootError> {
        cfg.validate()?;
        let fp = spec.fixed_point_data()?;
        let lambda = fp.lambda();
        if !(lambda > Scalar::ONE) {
            return Err(ShootError::NotExpanding(lambda.to_f64()));
        }
        let vector = fp.vector();
        let shrink = lambda.powi(cfg.depth as i32).recip();
        let seed_dir = vector.scale(shrink);
        Ok(Self {
            spec,
            cfg,
            lambda,
            vector,
            seed_dir,
            seed_dir_f64: seed_dir.to_f64(),
        })
    }

    pub fn spec(&self) -> &MapSpec {
        &self.spec
    }

    pub fn config(&self) -> &ShootConfig {
        &self.cfg
    }

    pub fn lambda(&self) -> Scalar {
        self.lambda
    }

    /// Dominant eigenvector at the fixed point, normalized to `v_y = 1`.
    pub fn eigenvector(&self) -> Vec3 {
        self.vector
    }

    /// The seed point for coefficient `c`.
    pub fn seed(&self, c: Scalar) -> Vec3 {
        self.seed_dir.scale(c)
    }

    /// Pushes the seed forward `depth` times, returning the image and `∂image/∂C`.
    pub fn forward<T: Real>(&self, c: T, seed_dir: Vec3<T>) -> (Vec3<T>, Vec3<T>) {
        let mut q = seed_dir.scale(c);
        let mut w = seed_dir;
        for _ in 0..self.cfg.depth {
            let (next, jac) = self.spec.apply_with_jacobian(q);
            w = jac.mul_vec(w);
            q = next;
        }
        (q, w)
    }

    fn forward_scalar(&self, c: Scalar) -> (Vec3, Vec3) {
        self.forward(c, self.seed_dir)
    }

    fn update<T: Real>(&self, c: T, level: T, qy: T, wy: T) -> T {
        match self.cfg.update {
            UpdateRule::Newton => c + (level - qy) / wy,
            UpdateRule::Mixing => {
                let mix = T::from_scalar(self.cfg.mix);
                c * (T::one() + mix * (level - qy) / level)
            }
        }
    }

    /// Solves for the point of the lifted leaf with `y = level`.
    pub fn solve_level(&self, level: Scalar) -> Result<LevelSolution, ShootError> {
        if level.is_zero() {
            return Err(ShootError::ZeroLevel);
        }
        // v_p has unit y-component, so the eigenline reaches `level` at C = level.
        let mut iterations = 0u32;
        let mut c = match self.cfg.update {
            UpdateRule::Newton => self.warm_start(level.to_f64()),
            UpdateRule::Mixing => level,
        };
        let tol = self.tolerance(level);
        let mut last = None;
        while iterations < self.cfg.max_iter {
            iterations += 1;
            let (q, w) = self.forward_scalar(c);
            let resid = (q.y - level).abs();
            if resid < tol {
                return Ok(LevelSolution {
                    c,
                    point: q,
                    derivative: w,
                    iterations,
                });
            }
            let next = self.update(c, level, q.y, w.y);
            if next == c || !next.is_finite() {
                last = Some(resid);
                break;
            }
            c = next;
            last = Some(resid);
        }
        Err(ShootError::NoConvergence {
            y0: level.to_f64(),
            residual: last.map_or(f64::NAN, |r| r.to_f64()),
            iterations,
        })
    }

    /// Residual tolerance at a given height.
    ///
    /// The image coordinates carry an absolute rounding error proportional
    /// to their size, so beyond `|y0| ≈ 10⁶` the bound grows with `|y0|`.
    pub fn tolerance(&self, level: Scalar) -> Scalar {
        let floor = level.abs() * 1e-30;
        self.cfg.tol_y.max(floor)
    }

    fn warm_start(&self, level: f64) -> Scalar {
        let mut c = level;
        for _ in 0..60 {
            let (q, w) = self.forward(c, self.seed_dir_f64);
            let next = c + (level - q.y) / w.y;
            if !next.is_finite() {
                return Scalar::from_f64(level);
            }
            let done = (next - c).abs() <= 4.0 * f64::EPSILON * c.abs();
            c = next;
            if done {
                break;
            }
        }
        Scalar::from_f64(c)
    }

    /// Full sample at integer height `y0`.
    pub fn shoot(&self, y0: i64) -> Result<ManifoldSample, ShootError> {
        let sol = self.solve_level(Scalar::from_i64(y0))?;
        let tangent = sol.derivative.normalized();
        let tangent = if tangent.y.is_sign_negative() { -tangent } else { tangent };
        let angle = angle_weight(tangent)?;
        let rho = self.rho_from(&sol, self.cfg.delta_q, y0)?;
        Ok(ManifoldSample {
            y0,
            x: reduce1(sol.point.x),
            z: reduce1(sol.point.z),
            tangent,
            rho,
            angle_weight: angle,
            seed_scale: sol.c,
        })
    }

    /// Finite-difference Jacobian density of `f⁻ⁿ` along the leaf at a converged point.
    ///
    /// The seeds for `q ± Δq` along the leaf are `C ± Δq/‖∂q/∂C‖`; ρ is the
    /// ratio of seed separation to image separation.
    pub fn rho_from(&self, sol: &LevelSolution, delta_q: Scalar, y0: i64) -> Result<Scalar, ShootError> {
        let dc = delta_q / sol.derivative.norm();
        let (q_plus, _) = self.forward_scalar(sol.c + dc);
        let (q_minus, _) = self.forward_scalar(sol.c - dc);
        let image = (q_plus - q_minus).norm();
        let pre = (self.seed(sol.c + dc) - self.seed(sol.c - dc)).norm();
        if image.is_zero() || pre.is_zero() || !image.is_finite() {
            return Err(ShootError::DegenerateDifference(y0 as f64));
        }
        Ok(pre / image)
    }

    /// `‖v_p‖ λ⁻ⁿ / ‖∂q/∂C‖`, the limit of [`Shooter::rho_from`] as `Δq → 0`.
    pub fn rho_analytic(&self, sol: &LevelSolution) -> Scalar {
        self.seed_dir.norm() / sol.derivative.norm()
    }

    /// ρ at `y0` with an explicit finite-difference step.
    pub fn rho_at(&self, y0: i64, delta_q: Scalar) -> Result<Scalar, ShootError> {
        let sol = self.solve_level(Scalar::from_i64(y0))?;
        self.rho_from(&sol, delta_q, y0)
    }
}

/// Samples for every nonzero `y0` in a range, in ascending order.
#[derive(Debug, Clone, Default)]
pub struct Batch {
    pub samples: Vec<ManifoldSample>,
    pub failures: Vec<(i64, ShootError)>,
}

/// Shoots every nonzero level of `range` in parallel.
///
/// The result is ordered by `y0` and independent of the thread count.
pub fn sample_batch(shooter: &Shooter, range: RangeInclusive<i64>) -> Batch {
    let results: Vec<(i64, Result<ManifoldSample, ShootError>)> = range
        .into_par_iter()
        .filter(|&y0| y0 != 0)
        .map(|y0| (y0, shooter.shoot(y0)))
        .collect();
    let mut batch = Batch::default();
    for (y0, r) in results {
        match r {
            Ok(s) => batch.samples.push(s),
            Err(e) => batch.failures.push((y0, e)),
        }
    }
    batch
}

/// Streams samples for `range` in chunks of `chunk` levels, handing each
/// chunk to `sink` in ascending order. Shooting inside a chunk is parallel.
pub fn for_each_chunk<F>(shooter: &Shooter, range: RangeInclusive<i64>, chunk: usize, mut sink: F)
where
    F: FnMut(Batch),
{
    let (start, end) = range.into_inner();
    let chunk = chunk.max(1) as i64;
    let mut lo = start;
    while lo <= end {
        let hi = end.min(lo.saturating_add(chunk - 1));
        sink(sample_batch(shooter, lo..=hi));
        if hi == i64::MAX {
            break;
        }
        lo = hi + 1;
    }
}
