//! Numerical toolkit for strong unstable manifolds, u-measures and SRB
//! measures of perturbed hyperbolic automorphisms of the 3-torus.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod io;
pub mod linalg;
pub mod manifold;
pub mod maps;
pub mod periodic;
pub mod scalar;
pub mod srb;
pub mod stats;
pub mod torus;

pub use linalg::{mat_eigen, EigenError, EigenTriple, Eigenvalue, Mat3, Vec3};
pub use manifold::{angle_weight, sample_batch, ManifoldSample, ShootConfig, ShootError, Shooter, UpdateRule};
pub use maps::{involution, Family, FixedPointData, MapError, MapSpec};
pub use periodic::{
    find_orbits, orbit_spectrum, pair_by_involution, refine, PeriodicError, PeriodicOrbit, PeriodicSearchConfig,
};
pub use scalar::{Real, Scalar};
pub use srb::{gaussian_pair, slice_samples, srb_chain, LcgParams, NoiseConfig, SrbChain, SrbError, SrbSample};
pub use stats::{
    bin, build_weighted, cesaro_average, dist_function, ks_two_sample, ks_uniform, rsd, BinGrid, DistFunction,
    StatsError, WeightMode, WeightedPoints2D,
};
pub use torus::{torus_distance, torus_reduce};
