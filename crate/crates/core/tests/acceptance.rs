//! End-to-end acceptance checks. Each test prints one `ACCEPTANCE PASS|FAIL` line.

mod common;

use common::{fit_slope, lattice_periodic_points, torus_gap, verdict, SplitMix};
use uulab_core::io;
use uulab_core::manifold::for_each_chunk;
use uulab_core::srb::{chain_config, in_slice, run_chains};
use uulab_core::stats::Occupancy3;
use uulab_core::{
    build_weighted, dist_function, find_orbits, ks_two_sample, mat_eigen, pair_by_involution, rsd, sample_batch,
    BinGrid, DistFunction, Family, MapSpec, NoiseConfig, PeriodicOrbit, PeriodicSearchConfig, Real, Scalar,
    ShootConfig, Shooter, SrbChain, Vec3, WeightMode,
};

fn dd(s: &str) -> Scalar {
    s.parse().unwrap()
}

fn frac(x: Scalar) -> Scalar {
    x - x.floor()
}

/// Circular distance on [0,1).
fn gap(a: Scalar, b: Scalar) -> f64 {
    let d = frac(a - b).to_f64();
    d.min(1.0 - d)
}

#[test]
fn spectrum_of_automorphism() {
    let e = mat_eigen(&uulab_core::maps::matrix()).unwrap();
    let moduli: Vec<f64> = e.values.iter().map(|v| v.modulus().to_f64()).collect();
    let four_places = [0.1981, 1.5550, 3.2470];
    let paper = [0.20, 1.55, 3.25];
    let v = e.dominant_vector.unwrap();
    let vec_paper = [0.80, 1.00, 0.45];
    let dev4 = moduli.iter().zip(four_places).map(|(m, p)| (m - p).abs()).fold(0.0, f64::max);
    let dev_raw = moduli.iter().zip(paper).map(|(m, p)| (m - p).abs()).fold(0.0, f64::max);
    // The paper quotes two decimals; agreement is judged at that precision.
    let dev2 = moduli
        .iter()
        .zip(paper)
        .map(|(m, p)| ((m * 100.0).round() / 100.0 - p).abs())
        .fold(0.0, f64::max);
    let dev_vec = (0..3).map(|i| (v[i].to_f64() - vec_paper[i]).abs()).fold(0.0, f64::max);
    let real = e.values.iter().all(|v| v.im.is_zero());
    let pass = real && dev4 <= 1e-4 && dev2 <= 1e-3 && dev_vec <= 1e-2;
    verdict(
        "spectrum",
        pass,
        &format!(
            "moduli ({:.4}, {:.4}, {:.4}), deviation from (0.1981, 1.5550, 3.2470) {dev4:.1e}; rounded to the quoted two decimals deviation from (0.20, 1.55, 3.25) {dev2:.1e} (unrounded {dev_raw:.1e}); vector ({:.4}, {:.4}, {:.4}) deviation from (0.80, 1.00, 0.45) {dev_vec:.1e}",
            moduli[0], moduli[1], moduli[2], v.x.to_f64(), v.y.to_f64(), v.z.to_f64()
        ),
    );
}

#[test]
fn volume_dichotomy() {
    let mut rng = SplitMix(2024);
    let two_pi = Scalar::two_pi();
    let mut worst_c = 0.0f64;
    let mut worst_d = 0.0f64;
    for _ in 0..10_000 {
        let p: Vec3 = Vec3::from_f64(rng.unit(), rng.unit(), rng.unit());
        for eps in [0.02, 0.1, 0.15] {
            let c = MapSpec::conservative(eps).jacobian(p).det();
            worst_c = worst_c.max((c - Scalar::ONE).abs().to_f64());
            let e = Scalar::from_f64(eps);
            let d = MapSpec::dissipative(eps).jacobian(p).det();
            let (_, cos) = p.x.sin_cos_2pi();
            let want = Scalar::ONE + two_pi * e * cos;
            worst_d = worst_d.max((d - want).abs().to_f64());
        }
    }
    // Bisection in epsilon on the determinant at the point where cos 2πx = −1.
    let at_half: Vec3 = Vec3::from_f64(0.5, 0.3, 0.7);
    let det_at = |eps: f64| MapSpec::dissipative(eps).jacobian(at_half).det().to_f64();
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if det_at(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let zero = 0.5 * (lo + hi);
    let fold = 1.0 / (2.0 * std::f64::consts::PI);
    let pass = worst_c <= 1e-30 && worst_d <= 1e-30 && (zero - fold).abs() <= 1e-10;
    verdict(
        "volume_dichotomy",
        pass,
        &format!(
            "max |det-1| conservative {worst_c:.2e}, max |det-(1+2*pi*eps*cos 2*pi*x)| dissipative {worst_d:.2e} (tol 1e-30); determinant zero at eps {zero:.15} vs 1/(2*pi) {fold:.15}"
        ),
    );
}

#[test]
fn eigenline_oracle() {
    let shooter = Shooter::new(MapSpec::linear(), ShootConfig::default()).unwrap();
    let batch = sample_batch(&shooter, 1..=10_000);
    let vx = dd("0.8019377358048382524722046390148901023318");
    let vz = dd("0.4450418679126288085778051289935895189327");
    let norm = dd("1.356895867892209443894399510021300583399");
    let mut pos = 0.0f64;
    for s in &batch.samples {
        let y = Scalar::from_f64(s.y0 as f64);
        pos = pos.max(gap(s.x, y * vx)).max(gap(s.z, y * vz));
    }
    let n = Scalar::from_f64(batch.samples.len() as f64);
    let avg = batch.samples.iter().fold(Scalar::ZERO, |acc, s| acc + s.rho) / n;
    let rho_dev = batch.samples.iter().map(|s| (s.rho / avg - Scalar::ONE).abs().to_f64()).fold(0.0, f64::max);
    let a_dev = batch.samples.iter().map(|s| (s.angle_weight - norm).abs().to_f64()).fold(0.0, f64::max);
    let pass = batch.failures.is_empty() && batch.samples.len() == 10_000 && pos <= 1e-20 && rho_dev <= 1e-8 && a_dev <= 1e-8;
    verdict(
        "eigenline_oracle",
        pass,
        &format!(
            "{} samples, {} failures; max position error {pos:.2e} (tol 1e-20); max |rho/rho_avg - 1| {rho_dev:.2e}, max |a - |v|| {a_dev:.2e} (tol 1e-8)",
            batch.samples.len(),
            batch.failures.len()
        ),
    );
}

#[test]
fn involution_symmetry() {
    let shooter = Shooter::new(MapSpec::conservative(0.04), ShootConfig::default()).unwrap();
    let pos = sample_batch(&shooter, 1..=1000);
    let neg = sample_batch(&shooter, -1000..=-1);
    let mut worst = 0.0f64;
    let mut pairs = 0;
    for s in &neg.samples {
        if let Some(p) = pos.samples.iter().find(|p| p.y0 == -s.y0) {
            pairs += 1;
            worst = worst.max(gap(s.x, -p.x)).max(gap(s.z, -p.z));
        }
    }
    let pass = pairs == 1000 && worst <= 1e-20;
    verdict(
        "involution_symmetry",
        pass,
        &format!("{pairs} pairs at eps 0.04, max distance between i(q(y0)) and q(-y0) {worst:.2e} (tol 1e-20)"),
    );
}

fn orbit_points(orbits: &[PeriodicOrbit]) -> Vec<[f64; 3]> {
    orbits
        .iter()
        .flat_map(|o| o.points.iter().map(|p| [p.x.to_f64(), p.y.to_f64(), p.z.to_f64()]))
        .collect()
}

#[test]
fn lefschetz_count() {
    let oracle = lattice_periodic_points(3);
    let cfg = PeriodicSearchConfig::default();
    let linear = find_orbits(&MapSpec::linear(), &cfg).unwrap();
    let found = orbit_points(&linear.orbits);
    let worst_found = found
        .iter()
        .map(|p| oracle.iter().map(|q| torus_gap(*p, *q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);
    let worst_oracle = oracle
        .iter()
        .map(|q| found.iter().map(|p| torus_gap(*p, *q)).fold(f64::INFINITY, f64::min))
        .fold(0.0, f64::max);

    let pert = find_orbits(&MapSpec::conservative(0.05), &cfg).unwrap();
    let fixed = pert.orbits.iter().filter(|o| o.period() == 1).count();
    let three = pert.orbits.iter().filter(|o| o.period() == 3).count();

    let pass = oracle.len() == 91
        && found.len() == 91
        && worst_found <= 1e-5
        && worst_oracle <= 1e-5
        && pert.point_count() == 91
        && fixed == 1
        && three == 30;
    verdict(
        "lefschetz_count",
        pass,
        &format!(
            "mesh {}: linear {} points vs {} lattice points, max mismatch {:.2e}/{:.2e} (tol 1e-5); conservative eps 0.05: {} points = {fixed} fixed + 3*{three}",
            cfg.mesh,
            found.len(),
            oracle.len(),
            worst_found,
            worst_oracle,
            pert.point_count()
        ),
    );
}

#[test]
fn band_separation() {
    let cfg = PeriodicSearchConfig::default();
    let grid: Vec<f64> = (0..=7).map(|k| 0.02 * k as f64).collect();
    let mut lines = Vec::new();
    let mut pass = true;
    let base = {
        let mut r = find_orbits(&MapSpec::linear(), &cfg).unwrap();
        let p = pairing_counts(&mut r.orbits);
        (r, p)
    };
    for family in [Family::Conservative, Family::Dissipative] {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        let mut nearest_one = f64::INFINITY;
        let mut pairing = Vec::new();
        for &eps in &grid {
            let (orbits, classes) = if eps == 0.0 {
                (base.0.orbits.clone(), base.1.clone())
            } else {
                let spec = MapSpec::new(family, Scalar::from_f64(eps)).unwrap();
                let mut r = find_orbits(&spec, &cfg).unwrap();
                let p = pairing_counts(&mut r.orbits);
                (r.orbits, p)
            };
            match &classes {
                Ok((pairs, selfp)) => {
                    pairing.push(format!("{eps:.2}:{pairs}+{selfp}"));
                    pass &= *pairs == 15 && *selfp == 1;
                }
                Err(e) => {
                    pairing.push(format!("{eps:.2}:{e}"));
                    pass = false;
                }
            }
            for o in &orbits {
                for (b, r) in o.moduli_roots.iter().enumerate() {
                    let r = r.to_f64();
                    lo[b] = lo[b].min(r);
                    hi[b] = hi[b].max(r);
                    nearest_one = nearest_one.min((r - 1.0).abs());
                }
            }
        }
        let disjoint = hi[0] < lo[1] && hi[1] < lo[2];
        pass &= disjoint && nearest_one > 1e-3;
        lines.push(format!(
            "{family}: bands [{:.4},{:.4}] [{:.4},{:.4}] [{:.4},{:.4}], nearest root to 1 at distance {nearest_one:.4}, pairs+self {}",
            lo[0],
            hi[0],
            lo[1],
            hi[1],
            lo[2],
            hi[2],
            pairing.join(" ")
        ));
    }
    verdict("band_separation", pass, &lines.join("; "));
}

/// Pairs and self-paired counts under the involution.
fn pairing_counts(orbits: &mut [PeriodicOrbit]) -> Result<(usize, usize), String> {
    pair_by_involution(orbits, Scalar::from_f64(1e-4))
        .map(|p| (p.pairs, p.self_paired.len()))
        .map_err(|e| e.to_string())
}

const DECAY_N: [u64; 5] = [100_000, 300_000, 1_000_000, 3_000_000, 10_000_000];

#[test]
fn equidistribution_decay() {
    let shooter = Shooter::new(MapSpec::conservative(0.1), ShootConfig::default()).unwrap();
    let modes = [WeightMode::Plain, WeightMode::Rho, WeightMode::RhoAngle];
    let mut grids: Vec<BinGrid> = modes.iter().map(|_| BinGrid::new(200).unwrap()).collect();
    let mut u_rsd: Vec<[f64; 3]> = Vec::new();
    let mut count = 0u64;
    let mut failures = 0usize;
    let last = *DECAY_N.last().unwrap() as i64;
    for_each_chunk(&shooter, 1..=last, 1 << 14, |batch| {
        failures += batch.failures.len();
        for s in &batch.samples {
            for (g, m) in grids.iter_mut().zip(modes) {
                g.add(s.x, s.z, m.weight(s.rho, s.angle_weight));
            }
            count += 1;
            if DECAY_N.contains(&count) {
                let r = [0, 1, 2].map(|k| rsd(&grids[k]).unwrap().to_f64());
                u_rsd.push(r);
            }
        }
    });

    let cfg = NoiseConfig::default();
    let mut srb_grid = BinGrid::new(200).unwrap();
    let mut srb_rsd = Vec::new();
    let hw = Scalar::from_f64(0.005);
    let mut kept = 0u64;
    let mut steps = 0u64;
    for s in SrbChain::new(MapSpec::conservative(0.1), &cfg).unwrap() {
        steps += 1;
        if in_slice(s.point.y, hw) {
            srb_grid.add(s.point.x, s.point.z, Scalar::ONE);
            kept += 1;
            if DECAY_N.contains(&kept) {
                srb_rsd.push(rsd(&srb_grid).unwrap().to_f64());
                if kept == *DECAY_N.last().unwrap() {
                    break;
                }
            }
        }
    }

    let n: Vec<f64> = DECAY_N.iter().map(|&n| n as f64).collect();
    let col = |k: usize| u_rsd.iter().map(|r| r[k]).collect::<Vec<f64>>();
    let slope_plain = fit_slope(&n, &col(0));
    let slope_rho = fit_slope(&n, &col(1));
    let slope_rhoa = fit_slope(&n, &col(2));
    let slope_srb = fit_slope(&n, &srb_rsd);
    let at_1e6 = u_rsd[2];
    let ratio = at_1e6[0] / at_1e6[1];
    let in_band = |s: f64| (-0.6..=-0.4).contains(&s);
    let pass = failures == 0 && in_band(slope_rhoa) && in_band(slope_srb) && ratio >= 1.1;
    let fmt = |v: &[f64]| v.iter().map(|x| format!("{x:.4}")).collect::<Vec<_>>().join(",");
    verdict(
        "equidistribution_decay",
        pass,
        &format!(
            "N={:?}: RSD_u [{}] slope {slope_plain:.3}; RSD_u_rho [{}] slope {slope_rho:.3}; RSD_u_rhoa [{}] slope {slope_rhoa:.3}; RSD_srb [{}] slope {slope_srb:.3} ({steps} chain steps); RSD_u/RSD_u_rho at 1e6 = {ratio:.3}; {failures} shooting failures",
            DECAY_N,
            fmt(&col(0)),
            fmt(&col(1)),
            fmt(&col(2)),
            fmt(&srb_rsd)
        ),
    );
}

#[test]
fn rho_minimum() {
    let shooter = Shooter::new(MapSpec::conservative(0.1), ShootConfig::default()).unwrap();
    let mut rhos: Vec<(i64, Scalar)> = Vec::with_capacity(1_000_000);
    let mut failures = 0usize;
    for_each_chunk(&shooter, 1..=1_000_000, 1 << 14, |batch| {
        failures += batch.failures.len();
        rhos.extend(batch.samples.iter().map(|s| (s.y0, s.rho)));
    });
    let n = Scalar::from_f64(rhos.len() as f64);
    let avg = rhos.iter().fold(Scalar::ZERO, |acc, (_, r)| acc + *r) / n;
    let (arg, min) = rhos
        .iter()
        .map(|(y, r)| (*y, (*r / avg).to_f64()))
        .fold((0, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best });
    let pass = failures == 0 && arg == 1 && (0.10..=0.16).contains(&min);
    verdict(
        "rho_minimum",
        pass,
        &format!("N=1e6, {failures} failures: min rho/rho_avg = {min:.4} at y0 = {arg} (required in [0.10, 0.16] at y0 = 1)"),
    );
}

fn slice_dist(spec: MapSpec, cfg: &NoiseConfig, points: u64, bins: usize) -> DistFunction {
    let hw = Scalar::from_f64(0.005);
    let mut grid = BinGrid::new(bins).unwrap();
    let mut kept = 0;
    for s in SrbChain::new(spec, cfg).unwrap() {
        if in_slice(s.point.y, hw) {
            grid.add(s.point.x, s.point.z, Scalar::ONE);
            kept += 1;
            if kept == points {
                break;
            }
        }
    }
    DistFunction::from_grid(&grid).unwrap()
}

#[test]
fn srb_sanity() {
    let spec = MapSpec::conservative(0.1);
    let cfg = NoiseConfig::default();
    let mut occ = Occupancy3::new(20).unwrap();
    for s in SrbChain::new(spec, &cfg).unwrap().take(10_000_000) {
        occ.add(s.point);
    }
    let rsd3 = occ.rsd().unwrap().to_f64();

    let sigmas = ["1e-3", "1e-6", "1e-12", "1e-29"];
    let dists: Vec<DistFunction> = sigmas
        .iter()
        .map(|s| {
            let cfg = NoiseConfig {
                sigma: dd(s),
                ..NoiseConfig::default()
            };
            slice_dist(MapSpec::dissipative(0.1), &cfg, 1_000_000, 200)
        })
        .collect();
    let ks: Vec<f64> = dists.windows(2).map(|w| ks_two_sample(&w[0], &w[1]).unwrap().to_f64()).collect();
    let monotone = ks.windows(2).all(|w| w[1] <= w[0]);
    let pass = rsd3 < 0.05 && monotone;
    verdict(
        "srb_sanity",
        pass,
        &format!(
            "conservative 3-D 20^3 RSD after 1e7 steps {rsd3:.4} (< 0.05); dissipative consecutive-sigma KS (1e6 slice points each) {}",
            ks.iter().map(|k| format!("{k:.5}")).collect::<Vec<_>>().join(" >= ")
        ),
    );
}

#[test]
fn u_vs_srb_coincidence() {
    let spec = MapSpec::dissipative(0.06);
    let shooter = Shooter::new(spec, ShootConfig::default()).unwrap();
    let mut grid = BinGrid::new(200).unwrap();
    let mut failures = 0usize;
    for_each_chunk(&shooter, 1..=1_000_000, 1 << 14, |batch| {
        failures += batch.failures.len();
        for s in &batch.samples {
            grid.add(s.x, s.z, s.rho * s.angle_weight);
        }
    });
    let fu = DistFunction::from_grid(&grid).unwrap();
    let base = NoiseConfig::default();
    let fa = slice_dist(spec, &base, 1_000_000, 200);
    let fb = slice_dist(spec, &chain_config(&base, 1), 1_000_000, 200);
    let ks_u = ks_two_sample(&fu, &fa).unwrap().to_f64();
    let ks_self = ks_two_sample(&fa, &fb).unwrap().to_f64();
    let pass = failures == 0 && ks_u <= 2.0 * ks_self;
    verdict(
        "u_vs_srb_coincidence",
        pass,
        &format!("eps 0.06, N=1e6: KS(u_rhoa, SRB) = {ks_u:.5}, KS(SRB, SRB') = {ks_self:.5}, ratio {:.3} (<= 2); {failures} failures", ks_u / ks_self),
    );
}

#[test]
fn determinism_across_threads() {
    let run = || {
        let mut blobs: Vec<Vec<u8>> = Vec::new();
        let shooter = Shooter::new(MapSpec::conservative(0.1), ShootConfig::default()).unwrap();
        let batch = sample_batch(&shooter, -2000..=2000);
        let mut buf = Vec::new();
        io::write_manifold(&mut buf, &batch.samples).unwrap();
        blobs.push(buf);

        let weighted = build_weighted(&batch.samples, WeightMode::RhoAngle).unwrap();
        let mut buf = Vec::new();
        io::write_dist(&mut buf, &dist_function(&weighted, 50).unwrap()).unwrap();
        blobs.push(buf);

        let hw = Scalar::from_f64(0.005);
        let slices = run_chains(MapSpec::dissipative(0.1), &NoiseConfig::default(), 4, 200_000, |it| {
            it.filter(|s| in_slice(s.point.y, hw)).map(|s| (s.point.x, s.point.z)).collect::<Vec<_>>()
        })
        .unwrap();
        let mut buf = Vec::new();
        io::write_slice(&mut buf, &slices.concat()).unwrap();
        blobs.push(buf);

        let spec = MapSpec::conservative(0.05);
        let mut report = find_orbits(&spec, &PeriodicSearchConfig::default()).unwrap();
        pair_by_involution(&mut report.orbits, Scalar::from_f64(1e-4)).unwrap();
        let mut buf = Vec::new();
        io::write_periodic(&mut buf, spec.epsilon(), &report.orbits).unwrap();
        blobs.push(buf);
        blobs
    };
    let outputs: Vec<Vec<Vec<u8>>> = [1, 4, 8]
        .iter()
        .map(|&k| rayon::ThreadPoolBuilder::new().num_threads(k).build().unwrap().install(run))
        .collect();
    let identical = outputs.windows(2).all(|w| w[0] == w[1]);
    let sizes: Vec<usize> = outputs[0].iter().map(Vec::len).collect();
    verdict(
        "determinism",
        identical,
        &format!("manifold, distribution, SRB slice and periodic CSVs ({sizes:?} bytes) identical for 1, 4 and 8 threads: {identical}"),
    );
}
