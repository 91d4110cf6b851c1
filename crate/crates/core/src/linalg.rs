//! Fixed-size 3-vectors, 3×3 matrices and the closed-form eigen solver.

use std::ops::{Add, Index, Mul, Neg, Sub};

use crate::scalar::{Real, Scalar};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Vec3<T = Scalar> {
    pub x: T,
    pub y: T,
    pub z: T,
}

impl<T: Real> Vec3<T> {
    #[inline]
    pub fn new(x: T, y: T, z: T) -> Self {
        Self { x, y, z }
    }

    pub fn zero() -> Self {
        Self::new(T::zero(), T::zero(), T::zero())
    }

    pub fn from_f64(x: f64, y: f64, z: f64) -> Self {
        Self::new(T::from_f64(x), T::from_f64(y), T::from_f64(z))
    }

    #[inline]
    pub fn dot(self, o: Self) -> T {
        self.x * o.x + self.y * o.y + self.z * o.z
    }

    pub fn norm(self) -> T {
        self.dot(self).sqrt()
    }

    pub fn norm_inf(self) -> T {
        let (a, b, c) = (self.x.abs(), self.y.abs(), self.z.abs());
        let m = if a > b { a } else { b };
        if m > c {
            m
        } else {
            c
        }
    }

    #[inline]
    pub fn scale(self, k: T) -> Self {
        Self::new(self.x * k, self.y * k, self.z * k)
    }

    pub fn normalized(self) -> Self {
        let n = self.norm();
        Self::new(self.x / n, self.y / n, self.z / n)
    }

    pub fn cross(self, o: Self) -> Self {
        Self::new(
            self.y * o.z - self.z * o.y,
            self.z * o.x - self.x * o.z,
            self.x * o.y - self.y * o.x,
        )
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }

    pub fn map<U: Real>(self, f: impl Fn(T) -> U) -> Vec3<U> {
        Vec3::new(f(self.x), f(self.y), f(self.z))
    }

    pub fn to_scalar(self) -> Vec3<Scalar> {
        self.map(Real::to_scalar)
    }

    pub fn to_f64(self) -> Vec3<f64> {
        self.map(Real::to_f64)
    }

    pub fn as_array(self) -> [T; 3] {
        [self.x, self.y, self.z]
    }
}

impl<T: Real> Add for Vec3<T> {
    type Output = Self;
    #[inline]
    fn add(self, o: Self) -> Self {
        Self::new(self.x + o.x, self.y + o.y, self.z + o.z)
    }
}

impl<T: Real> Sub for Vec3<T> {
    type Output = Self;
    #[inline]
    fn sub(self, o: Self) -> Self {
        Self::new(self.x - o.x, self.y - o.y, self.z - o.z)
    }
}

impl<T: Real> Neg for Vec3<T> {
    type Output = Self;
    #[inline]
    fn neg(self) -> Self {
        Self::new(-self.x, -self.y, -self.z)
    }
}

impl<T: Real> Index<usize> for Vec3<T> {
    type Output = T;
    fn index(&self, i: usize) -> &T {
        match i {
            0 => &self.x,
            1 => &self.y,
            2 => &self.z,
            _ => panic!("Vec3 index {i} out of range"),
        }
    }
}

/// Row-major 3×3 matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat3<T = Scalar> {
    pub m: [[T; 3]; 3],
}

impl<T: Real> Mat3<T> {
    pub fn new(m: [[T; 3]; 3]) -> Self {
        Self { m }
    }

    pub fn from_f64(rows: [[f64; 3]; 3]) -> Self {
        Self {
            m: rows.map(|r| r.map(T::from_f64)),
        }
    }

    pub fn identity() -> Self {
        Self::from_f64([[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
    }

    #[inline]
    pub fn mul_vec(&self, v: Vec3<T>) -> Vec3<T> {
        let m = &self.m;
        Vec3::new(
            m[0][0] * v.x + m[0][1] * v.y + m[0][2] * v.z,
            m[1][0] * v.x + m[1][1] * v.y + m[1][2] * v.z,
            m[2][0] * v.x + m[2][1] * v.y + m[2][2] * v.z,
        )
    }

    pub fn mul_mat(&self, o: &Self) -> Self {
        let mut out = [[T::zero(); 3]; 3];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, cell) in row.iter_mut().enumerate() {
                *cell = self.m[i][0] * o.m[0][j] + self.m[i][1] * o.m[1][j] + self.m[i][2] * o.m[2][j];
            }
        }
        Self { m: out }
    }

    pub fn det(&self) -> T {
        let m = &self.m;
        m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1])
            - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
            + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
    }

    pub fn trace(&self) -> T {
        self.m[0][0] + self.m[1][1] + self.m[2][2]
    }

    /// Sum of the principal 2×2 minors.
    pub fn minor_sum(&self) -> T {
        let m = &self.m;
        (m[0][0] * m[1][1] - m[0][1] * m[1][0])
            + (m[0][0] * m[2][2] - m[0][2] * m[2][0])
            + (m[1][1] * m[2][2] - m[1][2] * m[2][1])
    }

    pub fn sub_identity(&self, lambda: T) -> Self {
        let mut out = *self;
        for (i, row) in out.m.iter_mut().enumerate() {
            row[i] -= lambda;
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec3<T> {
        Vec3::new(self.m[0][j], self.m[1][j], self.m[2][j])
    }

    /// Solves `M x = b` by Cramer's rule; `None` when `M` is singular.
    pub fn solve(&self, b: Vec3<T>) -> Option<Vec3<T>> {
        let det = self.det();
        if det == T::zero() || !det.is_finite() {
            return None;
        }
        let mut out = [T::zero(); 3];
        for (j, slot) in out.iter_mut().enumerate() {
            let mut mj = *self;
            for i in 0..3 {
                mj.m[i][j] = b[i];
            }
            *slot = mj.det() / det;
        }
        Some(Vec3::new(out[0], out[1], out[2]))
    }

    pub fn is_finite(&self) -> bool {
        self.m.iter().flatten().all(|v| v.is_finite())
    }

    pub fn to_scalar(&self) -> Mat3<Scalar> {
        Mat3 {
            m: self.m.map(|r| r.map(Real::to_scalar)),
        }
    }
}

impl<T: Real> Mul<Vec3<T>> for Mat3<T> {
    type Output = Vec3<T>;
    fn mul(self, v: Vec3<T>) -> Vec3<T> {
        self.mul_vec(v)
    }
}

impl<T: Real> Mul for Mat3<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        self.mul_mat(&o)
    }
}

/// One eigenvalue, stored as real and imaginary parts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenvalue {
    pub re: Scalar,
    pub im: Scalar,
}

impl Eigenvalue {
    pub fn real(re: Scalar) -> Self {
        Self { re, im: Scalar::ZERO }
    }

    pub fn is_real(&self) -> bool {
        self.im.is_zero()
    }

    pub fn modulus(&self) -> Scalar {
        if self.is_real() {
            self.re.abs()
        } else {
            (self.re.sqr() + self.im.sqr()).sqrt()
        }
    }

    /// Argument in `(-π, π]`, computed in `f64`.
    pub fn argument(&self) -> f64 {
        self.im.to_f64().atan2(self.re.to_f64())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, thiserror::Error)]
pub enum EigenError {
    #[error("no-real-dominant: the largest-modulus eigenvalue is not real and simple")]
    NoRealDominant,
    #[error("non-finite matrix entry")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EigenTriple {
    /// Sorted by modulus, ascending.
    pub values: [Eigenvalue; 3],
    /// Eigenvector of `values[2]` with y-component 1, when that eigenvalue is real and simple.
    pub dominant_vector: Option<Vec3>,
}

impl EigenTriple {
    pub fn dominant(&self) -> Result<(Scalar, Vec3), EigenError> {
        match self.dominant_vector {
            Some(v) => Ok((self.values[2].re, v)),
            None => Err(EigenError::NoRealDominant),
        }
    }

    pub fn moduli(&self) -> [Scalar; 3] {
        self.values.map(|v| v.modulus())
    }
}

/// Characteristic polynomial `λ³ - c2 λ² + c1 λ - c0` evaluated with its derivative.
fn char_poly(c2: Scalar, c1: Scalar, c0: Scalar, l: Scalar) -> (Scalar, Scalar) {
    let p = ((l - c2) * l + c1) * l - c0;
    let dp = (l * 3.0 - c2 * 2.0) * l + c1;
    (p, dp)
}

/// Real roots of a monic cubic in `f64` by the trigonometric / Cardano formulas.
fn cubic_real_roots_f64(c2: f64, c1: f64, c0: f64) -> Vec<f64> {
    // λ = t + c2/3 gives t³ + p t + q = 0.
    let shift = c2 / 3.0;
    let p = c1 - c2 * c2 / 3.0;
    let q = -2.0 * c2 * c2 * c2 / 27.0 + c2 * c1 / 3.0 - c0;
    let disc = (q / 2.0).powi(2) + (p / 3.0).powi(3);
    if p == 0.0 && q == 0.0 {
        return vec![shift];
    }
    if disc <= 0.0 && p < 0.0 {
        let r = 2.0 * (-p / 3.0).sqrt();
        let arg = (3.0 * q / (p * r)).clamp(-1.0, 1.0);
        let phi = arg.acos() / 3.0;
        (0..3)
            .map(|k| r * (phi - 2.0 * std::f64::consts::PI * k as f64 / 3.0).cos() + shift)
            .collect()
    } else {
        let sq = disc.max(0.0).sqrt();
        let u = (-q / 2.0 + sq).cbrt();
        let v = (-q / 2.0 - sq).cbrt();
        vec![u + v + shift]
    }
}

/// Eigenvalues of `m` from its characteristic cubic, plus the dominant eigenvector.
///
/// A real root is found in closed form and polished with Newton steps in
/// double-double; the remaining quadratic factor is solved directly and its
/// real roots get one more Newton step each.
pub fn mat_eigen(m: &Mat3) -> Result<EigenTriple, EigenError> {
    if !m.is_finite() {
        return Err(EigenError::NonFinite);
    }
    let c2 = m.trace();
    let c1 = m.minor_sum();
    let c0 = m.det();

    let roots = cubic_real_roots_f64(c2.to_f64(), c1.to_f64(), c0.to_f64());
    let r0 = roots
        .iter()
        .copied()
        .fold(f64::NAN, |a, b| if a.is_nan() || b.abs() > a.abs() { b } else { a });
    let mut r = Scalar::from_f64(r0);
    for _ in 0..8 {
        let (p, dp) = char_poly(c2, c1, c0, r);
        if dp.is_zero() || p.is_zero() {
            break;
        }
        let step = p / dp;
        r -= step;
        if step.abs().to_f64() <= 1e-34 * r.abs().to_f64().max(1e-300) {
            break;
        }
    }

    // Deflate: λ² + b λ + k.
    let b = r - c2;
    let k = if r.abs().to_f64() > 1e-8 { c0 / r } else { c1 - c2 * r + r.sqr() };
    let disc = b.sqr() - k * 4.0;
    let mut vals = if disc.is_sign_negative() && !disc.is_zero() {
        let re = -b * 0.5;
        let im = (-disc).sqrt() * 0.5;
        [Eigenvalue::real(r), Eigenvalue { re, im }, Eigenvalue { re, im: -im }]
    } else {
        let sq = disc.sqrt();
        // Stable quadratic formula.
        let qq = if b.is_sign_negative() { (-b + sq) * 0.5 } else { -(b + sq) * 0.5 };
        let (x1, x2) = if qq.is_zero() { (Scalar::ZERO, Scalar::ZERO) } else { (qq, k / qq) };
        let polish = |x: Scalar| {
            let (p, dp) = char_poly(c2, c1, c0, x);
            if dp.is_zero() || dp.abs().to_f64() < 1e-12 {
                x
            } else {
                x - p / dp
            }
        };
        [Eigenvalue::real(r), Eigenvalue::real(polish(x1)), Eigenvalue::real(polish(x2))]
    };
    vals.sort_by(|a, b| a.modulus().partial_cmp(&b.modulus()).unwrap_or(std::cmp::Ordering::Equal));

    let top = vals[2];
    let simple = top.is_real() && {
        let gap = (top.modulus() - vals[1].modulus()).to_f64();
        gap > 1e-12 * top.modulus().to_f64().max(1e-300)
    };
    let dominant_vector = if simple { dominant_eigenvector(m, top.re) } else { None };
    Ok(EigenTriple {
        values: vals,
        dominant_vector,
    })
}

/// Solves `(M - λI) v = 0` with `v.y = 1` through the 2×2 system of rows 1 and 3.
fn dominant_eigenvector(m: &Mat3, lambda: Scalar) -> Option<Vec3> {
    let a = m.sub_identity(lambda);
    let (a11, a13, a31, a33) = (a.m[0][0], a.m[0][2], a.m[2][0], a.m[2][2]);
    let (b1, b3) = (-a.m[0][1], -a.m[2][1]);
    let det = a11 * a33 - a13 * a31;
    let scale = a11.abs().max(a13.abs()).max(a31.abs()).max(a33.abs());
    let v = if det.abs().to_f64() > 1e-20 * scale.to_f64().powi(2) {
        let x = (b1 * a33 - a13 * b3) / det;
        let z = (a11 * b3 - b1 * a31) / det;
        Vec3::new(x, Scalar::ONE, z)
    } else {
        // Rows 1 and 3 are dependent; fall back to the largest row cross product.
        let rows = [
            Vec3::new(a.m[0][0], a.m[0][1], a.m[0][2]),
            Vec3::new(a.m[1][0], a.m[1][1], a.m[1][2]),
            Vec3::new(a.m[2][0], a.m[2][1], a.m[2][2]),
        ];
        let candidates = [rows[0].cross(rows[1]), rows[0].cross(rows[2]), rows[1].cross(rows[2])];
        let best = candidates
            .into_iter()
            .max_by(|p, q| p.norm_inf().partial_cmp(&q.norm_inf()).unwrap_or(std::cmp::Ordering::Equal))?;
        if best.y.abs().to_f64() < 1e-20 * best.norm_inf().to_f64() {
            return None;
        }
        best.scale(best.y.recip())
    };
    v.is_finite().then_some(v)
}

/// The automorphism matrix of the unperturbed map.
pub fn automorphism() -> Mat3 {
    Mat3::from_f64([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 1.0]])
}
