//! Zero-noise sampler: the map followed by a small Gaussian translation.

use rayon::prelude::*;

use crate::linalg::Vec3;
use crate::maps::MapSpec;
use crate::scalar::{Real, Scalar};
use crate::torus::torus_reduce;

/// Parameters of `state ← (a·state + c) mod m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct LcgParams {
    pub multiplier: u64,
    pub increment: u64,
    pub modulus: u64,
}

impl Default for LcgParams {
    /// Multiplicative generator with prime modulus `2⁶⁴ − 59` and a primitive-root multiplier.
    fn default() -> Self {
        Self {
            multiplier: 13_891_176_665_706_064_842,
            increment: 0,
            modulus: 18_446_744_073_709_551_557,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SrbError {
    #[error("invalid generator parameters: {0}")]
    InvalidGenerator(&'static str),
    #[error("sigma must be at least 1e-31, got {0:e}")]
    SigmaTooSmall(f64),
    #[error("slice half-width must lie in (0, 0.5], got {0}")]
    InvalidHalfWidth(f64),
}

impl LcgParams {
    pub fn validate(&self) -> Result<(), SrbError> {
        if self.modulus < 2 {
            return Err(SrbError::InvalidGenerator("modulus must be at least 2"));
        }
        if self.multiplier == 0 || self.multiplier >= self.modulus {
            return Err(SrbError::InvalidGenerator("need modulus > multiplier > 0"));
        }
        if self.increment >= self.modulus {
            return Err(SrbError::InvalidGenerator("increment must be below the modulus"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct Lcg {
    params: LcgParams,
    state: u64,
}

impl Lcg {
    /// Seeds the generator; a zero state of a multiplicative generator is replaced by 1.
    pub fn new(params: LcgParams, seed: u64) -> Self {
        let mut state = seed % params.modulus;
        if state == 0 && params.increment == 0 {
            state = 1;
        }
        Self { params, state }
    }

    pub fn state(&self) -> u64 {
        self.state
    }

    #[inline]
    pub fn next_state(&mut self) -> u64 {
        let p = &self.params;
        let s = (p.multiplier as u128 * self.state as u128 + p.increment as u128) % p.modulus as u128;
        self.state = s as u64;
        self.state
    }

    /// Next uniform in `(0, 1)` as `(state + 1)/(m + 1)`.
    pub fn next_uniform(&mut self) -> Scalar {
        let s = self.next_state();
        (Scalar::from_u64(s) + Scalar::ONE) / (Scalar::from_u64(self.params.modulus) + Scalar::ONE)
    }

    #[inline]
    pub fn next_uniform_f64(&mut self) -> f64 {
        let s = self.next_state();
        (s as f64 + 1.0) / (self.params.modulus as f64 + 1.0)
    }
}

/// Box–Muller: `(√(−2 ln u1) cos 2πu2, √(−2 ln u1) sin 2πu2)`.
#[inline]
pub fn gaussian_pair<T: Real>(u1: T, u2: T) -> (T, T) {
    let r = (u1.ln() * -2.0).sqrt();
    let (sin, cos) = u2.sin_cos_2pi();
    (r * cos, r * sin)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseConfig {
    pub sigma: Scalar,
    pub seed: u64,
    pub lcg: LcgParams,
    pub burn_in: u64,
    /// Redraw standard normals beyond 6 in absolute value.
    pub truncate: bool,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self {
            sigma: Scalar::from_f64(1e-29),
            seed: 1,
            lcg: LcgParams::default(),
            burn_in: 10_000,
            truncate: false,
        }
    }
}

impl NoiseConfig {
    pub fn validate(&self) -> Result<(), SrbError> {
        self.lcg.validate()?;
        if !(self.sigma >= Scalar::from_f64(1e-31)) || !self.sigma.is_finite() {
            return Err(SrbError::SigmaTooSmall(self.sigma.to_f64()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SrbSample {
    pub point: Vec3,
    pub step_index: u64,
}

/// Standard normals from the generator, two per Box–Muller draw.
#[derive(Debug, Clone)]
pub struct GaussianSource {
    lcg: Lcg,
    spare: Option<f64>,
    truncate: bool,
}

impl GaussianSource {
    pub fn new(lcg: Lcg, truncate: bool) -> Self {
        Self {
            lcg,
            spare: None,
            truncate,
        }
    }

    #[inline]
    fn raw(&mut self) -> f64 {
        if let Some(v) = self.spare.take() {
            return v;
        }
        let u1 = self.lcg.next_uniform_f64();
        let u2 = self.lcg.next_uniform_f64();
        let (a, b) = gaussian_pair(u1, u2);
        self.spare = Some(b);
        a
    }

    #[inline]
    pub fn sample(&mut self) -> f64 {
        loop {
            let v = self.raw();
            if !self.truncate || v.abs() <= 6.0 {
                return v;
            }
        }
    }

    pub fn lcg_mut(&mut self) -> &mut Lcg {
        &mut self.lcg
    }
}

/// The noisy chain `q_{i+1} = f(q_i) + σξ` on the torus.
#[derive(Debug, Clone)]
pub struct SrbChain {
    spec: MapSpec,
    sigma: f64,
    sigma_lo: f64,
    noise: GaussianSource,
    point: Vec3,
    step: u64,
}

impl SrbChain {
    pub fn new(spec: MapSpec, cfg: &NoiseConfig) -> Result<Self, SrbError> {
        cfg.validate()?;
        let mut lcg = Lcg::new(cfg.lcg, cfg.seed);
        let point = Vec3::new(lcg.next_uniform(), lcg.next_uniform(), lcg.next_uniform());
        let mut chain = Self {
            spec,
            sigma: cfg.sigma.hi(),
            sigma_lo: cfg.sigma.lo(),
            noise: GaussianSource::new(lcg, cfg.truncate),
            point: torus_reduce(point),
            step: 0,
        };
        for _ in 0..cfg.burn_in {
            chain.advance();
        }
        Ok(chain)
    }

    #[inline]
    fn kick(&mut self) -> Scalar {
        let g = self.noise.sample();
        Scalar::new(g * self.sigma, g * self.sigma_lo)
    }

    #[inline]
    fn advance(&mut self) {
        let q = self.spec.apply_lifted(self.point);
        let kx = self.kick();
        let ky = self.kick();
        let kz = self.kick();
        self.point = torus_reduce(Vec3::new(q.x + kx, q.y + ky, q.z + kz));
        self.step += 1;
    }

    pub fn point(&self) -> Vec3 {
        self.point
    }
}

impl Iterator for SrbChain {
    type Item = SrbSample;

    fn next(&mut self) -> Option<SrbSample> {
        self.advance();
        Some(SrbSample {
            point: self.point,
            step_index: self.step,
        })
    }
}

/// Seed of chain `k` derived from a base seed (SplitMix64 finalizer).
pub fn chain_seed(seed: u64, k: u64) -> u64 {
    let mut z = seed.wrapping_add(k.wrapping_mul(0x9e37_79b9_7f4a_7c15));
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

/// Configuration of chain `k`: chain 0 keeps the base seed.
pub fn chain_config(cfg: &NoiseConfig, k: u64) -> NoiseConfig {
    let mut c = *cfg;
    if k > 0 {
        c.seed = chain_seed(cfg.seed, k);
    }
    c
}

/// `steps` post-burn-in samples of a single chain.
pub fn srb_chain(spec: MapSpec, cfg: &NoiseConfig, steps: usize) -> Result<Vec<SrbSample>, SrbError> {
    Ok(SrbChain::new(spec, cfg)?.take(steps).collect())
}

/// Runs `chains` independent chains of `steps` samples each and feeds each
/// chain's stream to `visit`, concatenating results in chain order.
///
/// Chain seeds come from [`chain_config`].
pub fn run_chains<R, F>(
    spec: MapSpec,
    cfg: &NoiseConfig,
    chains: usize,
    steps: u64,
    visit: F,
) -> Result<Vec<R>, SrbError>
where
    R: Send,
    F: Fn(&mut dyn Iterator<Item = SrbSample>) -> R + Sync,
{
    cfg.validate()?;
    (0..chains as u64)
        .into_par_iter()
        .map(|k| {
            let mut chain = SrbChain::new(spec, &chain_config(cfg, k))?;
            let mut it = (&mut chain).take(steps as usize);
            Ok(visit(&mut it))
        })
        .collect()
}

/// Whether `y` lies in the slice `[0, hw] ∪ [1 − hw, 1)`.
#[inline]
pub fn in_slice(y: Scalar, half_width: Scalar) -> bool {
    y <= half_width || y >= Scalar::ONE - half_width
}

/// `(x, z)` of the samples inside the slice around `{y = 0}`.
pub fn slice_samples<I>(chain: I, half_width: Scalar) -> Result<Vec<(Scalar, Scalar)>, SrbError>
where
    I: IntoIterator<Item = SrbSample>,
{
    if !(half_width > Scalar::ZERO && half_width <= Scalar::from_f64(0.5)) {
        return Err(SrbError::InvalidHalfWidth(half_width.to_f64()));
    }
    Ok(chain
        .into_iter()
        .filter(|s| in_slice(s.point.y, half_width))
        .map(|s| (s.point.x, s.point.z))
        .collect())
}
