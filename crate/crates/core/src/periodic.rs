//! Periodic orbits by mesh search, gradient descent and Newton polishing,
//! with the spectrum of the derivative around each orbit.

use rayon::prelude::*;

use crate::linalg::{mat_eigen, EigenError, Eigenvalue, Mat3, Vec3};
use crate::maps::{involution, MapSpec};
use crate::scalar::{Real, Scalar};
use crate::torus::{torus_distance, torus_reduce};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PeriodicSearchConfig {
    pub mesh: usize,
    pub period: u32,
    pub capture_threshold: f64,
    pub refine_target: f64,
    pub fd_step: f64,
    pub descent_step: f64,
    /// Report orbits whose minimal period divides `period` instead of failing.
    pub reduce_period: bool,
}

impl Default for PeriodicSearchConfig {
    fn default() -> Self {
        Self {
            mesh: 120,
            period: 3,
            capture_threshold: 0.3,
            refine_target: 1e-5,
            fd_step: 1e-7,
            descent_step: 1e-2,
            reduce_period: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PeriodicError {
    #[error("invalid search configuration: {0}")]
    InvalidConfig(&'static str),
    #[error("diverged: distance failed to decrease for 50 consecutive steps (D = {0:e})")]
    Diverged(f64),
    #[error("collapsed-to-lower-period: minimal period {0}")]
    CollapsedToLowerPeriod(u32),
    #[error("unpaired-orbit: orbit {0} has no involution partner")]
    UnpairedOrbit(usize),
    #[error("paired orbits {0} and {1} disagree in spectrum by {2:e}")]
    SpectrumMismatch(usize, usize, f64),
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

impl PeriodicSearchConfig {
    pub fn validate(&self) -> Result<(), PeriodicError> {
        if self.mesh < 2 {
            return Err(PeriodicError::InvalidConfig("mesh must be at least 2"));
        }
        if self.period < 1 {
            return Err(PeriodicError::InvalidConfig("period must be at least 1"));
        }
        if !(self.refine_target > 0.0) || !(self.fd_step > 0.0) || !(self.descent_step > 0.0) {
            return Err(PeriodicError::InvalidConfig("thresholds and steps must be positive"));
        }
        if !(self.capture_threshold >= 0.0) {
            return Err(PeriodicError::InvalidConfig("capture threshold must be non-negative"));
        }
        if self.capture_threshold > 0.0 && self.refine_target >= self.capture_threshold {
            return Err(PeriodicError::InvalidConfig("refine target must be below the capture threshold"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PeriodicOrbit {
    pub points: Vec<Vec3>,
    /// Torus distance between `f^len(points[0])` and `points[0]`.
    pub residual: Scalar,
    /// Eigenvalues of the derivative of `f^len` along the orbit, by modulus.
    pub eigenvalues: [Eigenvalue; 3],
    /// `|λ|^{1/len}`, ascending.
    pub moduli_roots: [Scalar; 3],
    pub involution_partner: Option<usize>,
}

impl PeriodicOrbit {
    pub fn period(&self) -> usize {
        self.points.len()
    }
}

/// `f^n` on the torus.
pub fn iterate<T: Real>(spec: &MapSpec, p: Vec3<T>, n: u32) -> Vec3<T> {
    let mut q = p;
    for _ in 0..n {
        q = spec.apply(q, false);
    }
    q
}

/// `D(p) = dist(f^n(p), p)` on the torus.
#[inline]
pub fn return_distance<T: Real>(spec: &MapSpec, p: Vec3<T>, n: u32) -> T {
    torus_distance(iterate(spec, p, n), p)
}

fn mesh_point(mesh: usize, idx: usize) -> Vec3<f64> {
    let h = 1.0 / mesh as f64;
    let i = idx / (mesh * mesh);
    let j = (idx / mesh) % mesh;
    let k = idx % mesh;
    Vec3::new(i as f64 * h, j as f64 * h, k as f64 * h)
}

fn scan(spec: &MapSpec, cfg: &PeriodicSearchConfig) -> Vec<f64> {
    let n = cfg.mesh * cfg.mesh * cfg.mesh;
    (0..n)
        .into_par_iter()
        .map(|idx| return_distance(spec, mesh_point(cfg.mesh, idx), cfg.period))
        .collect()
}

/// Every mesh point whose return distance is below the capture threshold.
pub fn mesh_search(spec: &MapSpec, cfg: &PeriodicSearchConfig) -> Result<Vec<Vec3<f64>>, PeriodicError> {
    cfg.validate()?;
    let d = scan(spec, cfg);
    Ok(d.iter()
        .enumerate()
        .filter(|(_, &v)| v < cfg.capture_threshold)
        .map(|(idx, _)| mesh_point(cfg.mesh, idx))
        .collect())
}

/// Captured mesh points that are local minima of the return distance over
/// their 26 periodic neighbours (ties broken by index).
pub fn mesh_minima(spec: &MapSpec, cfg: &PeriodicSearchConfig) -> Result<Vec<Vec3<f64>>, PeriodicError> {
    cfg.validate()?;
    let m = cfg.mesh;
    let d = scan(spec, cfg);
    let wrap = |a: usize, o: isize| ((a as isize + o).rem_euclid(m as isize)) as usize;
    let minima = (0..d.len())
        .into_par_iter()
        .filter(|&idx| {
            let v = d[idx];
            if !(v < cfg.capture_threshold) {
                return false;
            }
            let (i, j, k) = (idx / (m * m), (idx / m) % m, idx % m);
            for di in -1..=1isize {
                for dj in -1..=1isize {
                    for dk in -1..=1isize {
                        if di == 0 && dj == 0 && dk == 0 {
                            continue;
                        }
                        let n = (wrap(i, di) * m + wrap(j, dj)) * m + wrap(k, dk);
                        if d[n] < v || (d[n] == v && n < idx) {
                            return false;
                        }
                    }
                }
            }
            true
        })
        .map(|idx| mesh_point(m, idx))
        .collect();
    Ok(minima)
}

fn descend(spec: &MapSpec, start: Vec3<f64>, cfg: &PeriodicSearchConfig) -> Result<Vec3<f64>, PeriodicError> {
    let n = cfg.period;
    let dist = |p: Vec3<f64>| return_distance(spec, torus_reduce(p), n);
    let h = cfg.fd_step;
    let mut x = start;
    let mut d = dist(x);
    let mut step = cfg.descent_step;
    let mut fails = 0;
    for _ in 0..100_000 {
        if d < cfg.refine_target {
            return Ok(torus_reduce(x));
        }
        let mut g = [0.0; 3];
        for (axis, gi) in g.iter_mut().enumerate() {
            let mut e = Vec3::<f64>::zero();
            match axis {
                0 => e.x = h,
                1 => e.y = h,
                _ => e.z = h,
            }
            *gi = (dist(x + e) - dist(x - e)) / (2.0 * h);
        }
        let g = Vec3::new(g[0], g[1], g[2]);
        let gn = g.norm();
        if !(gn > 0.0) || !gn.is_finite() {
            return Err(PeriodicError::Diverged(d));
        }
        let trial = x - g.scale(step / gn);
        let dt = dist(trial);
        if dt < d {
            x = trial;
            d = dt;
            step = (step * 2.0).min(0.1);
            fails = 0;
        } else {
            step *= 0.5;
            fails += 1;
            if fails >= 50 {
                return Err(PeriodicError::Diverged(d));
            }
        }
    }
    Err(PeriodicError::Diverged(d))
}

/// Lifted `f^n(p)` together with the derivative product along the way.
fn lifted_with_jacobian(spec: &MapSpec, p: Vec3, n: u32) -> (Vec3, Mat3) {
    let mut q = p;
    let mut jac = Mat3::identity();
    for _ in 0..n {
        let (next, j) = spec.apply_with_jacobian(q);
        jac = j.mul_mat(&jac);
        q = next;
    }
    (q, jac)
}

/// Newton iteration on `f^n(x) − x − k = 0` in extended precision.
fn polish(spec: &MapSpec, start: Vec3, n: u32) -> Vec3 {
    let mut x = start;
    let mut best = (return_distance(spec, x, n), x);
    for _ in 0..12 {
        let (y, jac) = lifted_with_jacobian(spec, x, n);
        let d = y - x;
        let k = Vec3::new(d.x.round(), d.y.round(), d.z.round());
        let resid = d - k;
        let Some(delta) = jac.sub_identity(Scalar::ONE).solve(resid) else {
            break;
        };
        x = torus_reduce(x - delta);
        let r = return_distance(spec, x, n);
        if r < best.0 {
            best = (r, x);
        }
        if r.to_f64() < 1e-29 {
            break;
        }
    }
    best.1
}

fn divisors_below(n: u32) -> impl Iterator<Item = u32> {
    (1..n).filter(move |d| n.is_multiple_of(*d))
}

/// Spectrum of the derivative of `f^len` around an orbit.
pub fn orbit_spectrum(spec: &MapSpec, points: &[Vec3]) -> Result<([Eigenvalue; 3], [Scalar; 3]), PeriodicError> {
    let mut jac = Mat3::identity();
    for p in points {
        jac = spec.jacobian(*p).mul_mat(&jac);
    }
    let eig = mat_eigen(&jac)?;
    let inv = Scalar::ONE / Scalar::from_f64(points.len() as f64);
    let roots = eig.values.map(|v| (v.modulus().ln() * inv).exp());
    Ok((eig.values, roots))
}

/// Refines a captured candidate into an orbit.
pub fn refine(spec: &MapSpec, candidate: Vec3<f64>, cfg: &PeriodicSearchConfig) -> Result<PeriodicOrbit, PeriodicError> {
    cfg.validate()?;
    let coarse = descend(spec, candidate, cfg)?;
    let x = polish(spec, coarse.to_scalar(), cfg.period);
    let tol = Scalar::from_f64(10.0 * cfg.refine_target);
    let mut len = cfg.period;
    for d in divisors_below(cfg.period) {
        if return_distance(spec, x, d) < tol {
            len = d;
            break;
        }
    }
    if len != cfg.period && !cfg.reduce_period {
        return Err(PeriodicError::CollapsedToLowerPeriod(len));
    }
    let mut points = Vec::with_capacity(len as usize);
    let mut q = x;
    for _ in 0..len {
        points.push(q);
        q = spec.apply(q, false);
    }
    let residual = torus_distance(q, x);
    if residual.to_f64() >= cfg.refine_target {
        return Err(PeriodicError::Diverged(residual.to_f64()));
    }
    let (eigenvalues, moduli_roots) = orbit_spectrum(spec, &points)?;
    Ok(PeriodicOrbit {
        points,
        residual,
        eigenvalues,
        moduli_roots,
        involution_partner: None,
    })
}

/// Whether two orbits coincide up to rotation within `tol`.
pub fn same_orbit(a: &[Vec3], b: &[Vec3], tol: Scalar) -> bool {
    if a.len() != b.len() {
        return false;
    }
    let n = a.len();
    (0..n).any(|r| (0..n).all(|i| torus_distance(a[i], b[(i + r) % n]) < tol))
}

#[derive(Debug, Clone, Default)]
pub struct SearchReport {
    pub orbits: Vec<PeriodicOrbit>,
    pub candidates: usize,
    pub failures: Vec<(Vec3<f64>, PeriodicError)>,
    /// Set for dissipative maps past the fold, where the map is not invertible.
    pub non_invertible: bool,
}

impl SearchReport {
    /// Distinct periodic points over all orbits.
    pub fn point_count(&self) -> usize {
        self.orbits.iter().map(|o| o.period()).sum()
    }
}

/// Mesh minima, refinement and deduplication.
///
/// Orbits are ordered by period, then by the lexicographically smallest point.
pub fn find_orbits(spec: &MapSpec, cfg: &PeriodicSearchConfig) -> Result<SearchReport, PeriodicError> {
    let candidates = mesh_minima(spec, cfg)?;
    let refined: Vec<(Vec3<f64>, Result<PeriodicOrbit, PeriodicError>)> = candidates
        .par_iter()
        .map(|&c| (c, refine(spec, c, cfg)))
        .collect();
    let tol = Scalar::from_f64(10.0 * cfg.refine_target);
    let mut report = SearchReport {
        candidates: candidates.len(),
        non_invertible: !spec.is_diffeomorphism(),
        ..SearchReport::default()
    };
    for (c, r) in refined {
        match r {
            Ok(orbit) => {
                if !report.orbits.iter().any(|o| same_orbit(&o.points, &orbit.points, tol)) {
                    report.orbits.push(orbit);
                }
            }
            Err(e) => report.failures.push((c, e)),
        }
    }
    for o in &mut report.orbits {
        let start = (0..o.points.len())
            .min_by(|&a, &b| lex_cmp(&o.points[a], &o.points[b]))
            .unwrap_or(0);
        o.points.rotate_left(start);
    }
    report
        .orbits
        .sort_by(|a, b| a.period().cmp(&b.period()).then_with(|| lex_cmp(&a.points[0], &b.points[0])));
    Ok(report)
}

fn lex_cmp(a: &Vec3, b: &Vec3) -> std::cmp::Ordering {
    a.as_array()
        .iter()
        .zip(b.as_array().iter())
        .map(|(x, y)| x.partial_cmp(y).unwrap_or(std::cmp::Ordering::Equal))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}

#[derive(Debug, Clone, PartialEq)]
pub struct PairingReport {
    /// Partner index of each orbit.
    pub partners: Vec<usize>,
    pub pairs: usize,
    /// Orbits mapped onto themselves by the involution.
    pub self_paired: Vec<usize>,
    pub max_spectrum_mismatch: f64,
}

impl PairingReport {
    /// Spectrum graphs up to the involution: one per pair plus one per self-paired orbit.
    pub fn spectrum_classes(&self) -> usize {
        self.pairs + self.self_paired.len()
    }
}

/// Matches each orbit with the orbit through its involution image.
pub fn pair_by_involution(orbits: &mut [PeriodicOrbit], tol: Scalar) -> Result<PairingReport, PeriodicError> {
    let mut partners = Vec::with_capacity(orbits.len());
    for (i, o) in orbits.iter().enumerate() {
        let image: Vec<Vec3> = o.points.iter().map(|p| involution(*p)).collect();
        let partner = orbits
            .iter()
            .position(|c| same_orbit(&c.points, &image, tol))
            .ok_or(PeriodicError::UnpairedOrbit(i))?;
        partners.push(partner);
    }
    let mut worst = 0.0f64;
    let mut pairs = 0;
    let mut self_paired = Vec::new();
    for (i, &j) in partners.iter().enumerate() {
        if partners[j] != i {
            return Err(PeriodicError::UnpairedOrbit(i));
        }
        let mismatch = orbits[i]
            .moduli_roots
            .iter()
            .zip(&orbits[j].moduli_roots)
            .map(|(a, b)| (*a - *b).abs().to_f64())
            .fold(0.0, f64::max);
        if mismatch > 1e-6 {
            return Err(PeriodicError::SpectrumMismatch(i, j, mismatch));
        }
        worst = worst.max(mismatch);
        if i == j {
            self_paired.push(i);
        } else if i < j {
            pairs += 1;
        }
    }
    for (o, p) in orbits.iter_mut().zip(&partners) {
        o.involution_partner = Some(*p);
    }
    Ok(PairingReport {
        partners,
        pairs,
        self_paired,
        max_spectrum_mismatch: worst,
    })
}

/// Per-band extremes of the moduli roots over a set of orbits.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandSummary {
    pub min: [f64; 3],
    pub max: [f64; 3],
}

impl BandSummary {
    pub fn of(orbits: &[PeriodicOrbit]) -> Option<Self> {
        let first = orbits.first()?;
        let mut s = BandSummary {
            min: first.moduli_roots.map(|r| r.to_f64()),
            max: first.moduli_roots.map(|r| r.to_f64()),
        };
        for o in orbits {
            for k in 0..3 {
                let v = o.moduli_roots[k].to_f64();
                s.min[k] = s.min[k].min(v);
                s.max[k] = s.max[k].max(v);
            }
        }
        Some(s)
    }

    /// Bands are disjoint and none comes within `margin` of 1.
    pub fn separated(&self, margin: f64) -> bool {
        let ordered = self.max[0] < self.min[1] && self.max[1] < self.min[2];
        let clear = (0..3).all(|k| !(self.min[k] - margin <= 1.0 && self.max[k] + margin >= 1.0));
        ordered && clear
    }
}
