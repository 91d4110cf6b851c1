//! Geometry of the 3-torus R³/Z³.

use crate::linalg::Vec3;
use crate::scalar::Real;

/// Representative of `p` in `[0,1)³`.
#[inline]
pub fn torus_reduce<T: Real>(p: Vec3<T>) -> Vec3<T> {
    Vec3::new(reduce1(p.x), reduce1(p.y), reduce1(p.z))
}

#[inline]
pub fn reduce1<T: Real>(v: T) -> T {
    let r = v - v.floor();
    // `v - floor(v)` can round up to exactly 1 for tiny negative inputs.
    if r >= T::one() {
        r - T::one()
    } else if r < T::zero() {
        T::zero()
    } else {
        r
    }
}

/// Signed offset of `d` from its nearest integer, in `[-1/2, 1/2]`.
#[inline]
pub fn wrap_offset<T: Real>(d: T) -> T {
    d - d.round()
}

/// Euclidean distance on the torus: the shortest lattice translate.
///
/// For reduced inputs each coordinate difference lies in `(-1, 1)`, so the
/// minimum over the 27 neighbouring translates separates per axis.
pub fn torus_distance<T: Real>(p: Vec3<T>, q: Vec3<T>) -> T {
    torus_offset(p, q).norm()
}

/// Shortest displacement `p - q` modulo Z³.
pub fn torus_offset<T: Real>(p: Vec3<T>, q: Vec3<T>) -> Vec3<T> {
    let d = p - q;
    Vec3::new(wrap_offset(d.x), wrap_offset(d.y), wrap_offset(d.z))
}
