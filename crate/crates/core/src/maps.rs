//! The automorphism and its two one-parameter perturbations.
//!
//! Both families add `ε sin 2πx` to the linear map: the dissipative family
//! only in the first coordinate, the conservative family in the first two.
//! Everything here is generic over [`Real`] so the same formulas drive `f64`
//! scans and double-double computations.

use std::fmt;
use std::str::FromStr;

use crate::linalg::{automorphism, mat_eigen, EigenError, EigenTriple, Mat3, Vec3};
use crate::scalar::{Real, Scalar, TWO_PI};
use crate::torus::torus_reduce;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    Linear,
    Dissipative,
    Conservative,
}

impl Family {
    pub fn code(self) -> &'static str {
        match self {
            Family::Linear => "L",
            Family::Dissipative => "D",
            Family::Conservative => "C",
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Family {
    type Err = MapError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "l" | "linear" => Ok(Family::Linear),
            "d" | "dissipative" => Ok(Family::Dissipative),
            "c" | "conservative" => Ok(Family::Conservative),
            _ => Err(MapError::UnknownFamily(s.to_owned())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MapError {
    #[error("unknown map family {0:?} (expected L, D or C)")]
    UnknownFamily(String),
    #[error("epsilon must be finite and non-negative, got {0}")]
    InvalidEpsilon(f64),
    #[error("not-invertible: dissipative map with epsilon >= 1/(2π)")]
    NotInvertible,
    #[error("no-convergence: inverse Newton iteration did not converge")]
    NoConvergence,
    #[error(transparent)]
    Eigen(#[from] EigenError),
}

/// A member of one of the families.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MapSpec {
    family: Family,
    epsilon: Scalar,
}

impl MapSpec {
    pub fn new(family: Family, epsilon: Scalar) -> Result<Self, MapError> {
        if !epsilon.is_finite() || epsilon.is_sign_negative() && !epsilon.is_zero() {
            return Err(MapError::InvalidEpsilon(epsilon.to_f64()));
        }
        let epsilon = if family == Family::Linear { Scalar::ZERO } else { epsilon };
        Ok(Self { family, epsilon })
    }

    pub fn linear() -> Self {
        Self {
            family: Family::Linear,
            epsilon: Scalar::ZERO,
        }
    }

    pub fn dissipative(epsilon: f64) -> Self {
        Self::new(Family::Dissipative, Scalar::from_f64(epsilon)).expect("valid epsilon")
    }

    pub fn conservative(epsilon: f64) -> Self {
        Self::new(Family::Conservative, Scalar::from_f64(epsilon)).expect("valid epsilon")
    }

    pub fn family(&self) -> Family {
        self.family
    }

    pub fn epsilon(&self) -> Scalar {
        self.epsilon
    }

    /// Whether the map is a diffeomorphism; the dissipative family folds at ε = 1/(2π).
    pub fn is_diffeomorphism(&self) -> bool {
        match self.family {
            Family::Dissipative => (self.epsilon * TWO_PI).to_f64() < 1.0 - 1e-24,
            _ => true,
        }
    }

    /// Weight of the perturbation in the second coordinate.
    #[inline]
    fn second_row_weight(&self) -> f64 {
        match self.family {
            Family::Conservative => 1.0,
            _ => 0.0,
        }
    }

    /// The map on the universal cover (lifted) or on the torus.
    #[inline]
    pub fn apply<T: Real>(&self, p: Vec3<T>, lifted: bool) -> Vec3<T> {
        let q = self.apply_lifted(p);
        if lifted {
            q
        } else {
            torus_reduce(q)
        }
    }

    #[inline]
    pub fn apply_lifted<T: Real>(&self, p: Vec3<T>) -> Vec3<T> {
        let lin = Vec3::new(p.x + p.x + p.y, p.x + p.y + p.y + p.z, p.y + p.z);
        if self.family == Family::Linear || self.epsilon.is_zero() {
            return lin;
        }
        let (sin, _) = p.x.sin_cos_2pi();
        let kick = T::from_scalar(self.epsilon) * sin;
        Vec3::new(lin.x + kick, lin.y + kick * self.second_row_weight(), lin.z)
    }

    /// Lifted image together with the Jacobian at `p`.
    #[inline]
    pub fn apply_with_jacobian<T: Real>(&self, p: Vec3<T>) -> (Vec3<T>, Mat3<T>) {
        let lin = Vec3::new(p.x + p.x + p.y, p.x + p.y + p.y + p.z, p.y + p.z);
        let mut jac = Mat3::<T>::from_f64([[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 1.0]]);
        if self.family == Family::Linear || self.epsilon.is_zero() {
            return (lin, jac);
        }
        let (sin, cos) = p.x.sin_cos_2pi();
        let eps = T::from_scalar(self.epsilon);
        let kick = eps * sin;
        let dkick = eps * T::two_pi() * cos;
        let w = self.second_row_weight();
        jac.m[0][0] += dkick;
        jac.m[1][0] += dkick * w;
        (Vec3::new(lin.x + kick, lin.y + kick * w, lin.z), jac)
    }

    pub fn jacobian<T: Real>(&self, p: Vec3<T>) -> Mat3<T> {
        self.apply_with_jacobian(p).1
    }

    /// Preimage of `p`.
    ///
    /// Writing `f = A + ε s(x) d` with `d` the perturbation direction, the
    /// first coordinate of `A⁻¹ f(x)` is `x + ε k s(x)` with `k = (A⁻¹d)_x`
    /// (1 for the dissipative family, 0 for the conservative one). That scalar
    /// equation is monotone for invertible maps and solved by safeguarded
    /// Newton; the rest follows by back-substitution.
    pub fn apply_inverse(&self, p: Vec3, lifted: bool) -> Result<Vec3, MapError> {
        if !self.is_diffeomorphism() {
            return Err(MapError::NotInvertible);
        }
        let a_inv = inverse_automorphism();
        let u = a_inv.mul_vec(p);
        let eps = self.epsilon;
        let k = match self.family {
            Family::Dissipative => 1.0,
            _ => 0.0,
        };
        let x = if eps.is_zero() || k == 0.0 {
            u.x
        } else {
            solve_first_coordinate(u.x, eps * k)?
        };
        // A⁻¹ d: dissipative d = e1 gives (1,-1,1); conservative d = e1+e2 gives (0,1,-1).
        let back = match self.family {
            Family::Linear => Vec3::zero(),
            Family::Dissipative => Vec3::from_f64(1.0, -1.0, 1.0),
            Family::Conservative => Vec3::from_f64(0.0, 1.0, -1.0),
        };
        let (sin, _) = x.sin_cos_2pi();
        let kick = eps * sin;
        let mut pre = u - back.scale(kick);
        pre.x = x;
        Ok(if lifted { pre } else { torus_reduce(pre) })
    }

    /// Eigen data of the Jacobian at the fixed point `p = 0`.
    pub fn fixed_point_data(&self) -> Result<FixedPointData, MapError> {
        let eigen = mat_eigen(&self.jacobian(Vec3::<Scalar>::zero()))?;
        eigen.dominant()?;
        Ok(FixedPointData {
            point: Vec3::zero(),
            eigen,
        })
    }
}

/// `x + c sin 2πx = target` for `0 <= 2πc < 1`.
fn solve_first_coordinate(target: Scalar, c: Scalar) -> Result<Scalar, MapError> {
    // The root lies within |c| of the target.
    let mut lo = target - c.abs();
    let mut hi = target + c.abs();
    let mut x = target;
    for _ in 0..200 {
        let (sin, cos) = x.sin_cos_2pi();
        let g = x + c * sin - target;
        if g.is_zero() {
            return Ok(x);
        }
        if g.is_sign_negative() {
            lo = x;
        } else {
            hi = x;
        }
        let dg = Scalar::ONE + c * TWO_PI * cos;
        let mut next = x - g / dg;
        if !(next > lo && next < hi) {
            next = (lo + hi) * 0.5;
        }
        let step = (next - x).abs();
        x = next;
        if step.to_f64() <= 1e-33 * x.abs().to_f64().max(1.0) {
            return Ok(x);
        }
    }
    Err(MapError::NoConvergence)
}

/// Exact inverse of the automorphism matrix.
pub fn inverse_automorphism() -> Mat3 {
    Mat3::from_f64([[1.0, -1.0, 1.0], [-1.0, 2.0, -2.0], [1.0, -2.0, 3.0]])
}

/// The involution `(x,y,z) ↦ (-x,-y,-z)` on the torus.
pub fn involution<T: Real>(p: Vec3<T>) -> Vec3<T> {
    torus_reduce(-p)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FixedPointData {
    pub point: Vec3,
    pub eigen: EigenTriple,
}

impl FixedPointData {
    /// Dominant eigenvalue λ_p.
    pub fn lambda(&self) -> Scalar {
        self.eigen.values[2].re
    }

    /// Dominant eigenvector with y-component 1.
    pub fn vector(&self) -> Vec3 {
        self.eigen.dominant_vector.expect("checked at construction")
    }
}

/// The unperturbed matrix, re-exported for convenience.
pub fn matrix() -> Mat3 {
    automorphism()
}
