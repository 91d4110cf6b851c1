//! Closed-form checks on the unperturbed automorphism.

use std::path::Path;

use uulab_core::io;
use uulab_core::maps::matrix;
use uulab_core::{
    find_orbits, mat_eigen, sample_batch, torus_distance, torus_reduce, MapSpec, PeriodicSearchConfig, Scalar,
    ShootConfig, Shooter, Vec3,
};

use crate::args::SelftestArgs;
use crate::commands::Outcome;
use crate::error::{CliError, Context};

const ROOTS: [&str; 3] = [
    "0.1980622641951617475277953609851098976682",
    "1.554958132087371191422194871006410481067",
    "3.246979603717467061050009768008479621265",
];
const EIGENVECTOR: [&str; 3] = [
    "0.8019377358048382524722046390148901023318",
    "1",
    "0.4450418679126288085778051289935895189327",
];

fn c(s: &str) -> Scalar {
    s.parse().expect("constant parses")
}

struct Check {
    name: &'static str,
    ok: bool,
    detail: String,
}

fn check(name: &'static str, worst: f64, tol: f64) -> Check {
    Check {
        name,
        ok: worst <= tol,
        detail: format!("worst {worst:.3e} tol {tol:.0e}"),
    }
}

fn spectrum() -> Check {
    let worst = match mat_eigen(&matrix()) {
        Ok(e) => e
            .values
            .iter()
            .zip(ROOTS)
            .map(|(v, r)| ((v.modulus() - c(r)).abs() + v.im.abs()).to_f64())
            .fold(0.0, f64::max),
        Err(_) => f64::INFINITY,
    };
    check("spectrum", worst, 1e-28)
}

fn unstable_direction() -> Check {
    let worst = match MapSpec::linear().fixed_point_data() {
        Ok(d) => {
            let v = d.vector();
            let dv = (0..3).map(|i| (v[i] - c(EIGENVECTOR[i])).abs().to_f64()).fold(0.0, f64::max);
            dv.max((d.lambda() - c(ROOTS[2])).abs().to_f64())
        }
        Err(_) => f64::INFINITY,
    };
    check("unstable_direction", worst, 1e-28)
}

fn grid_points(n: usize) -> impl Iterator<Item = Vec3> {
    let h = 1.0 / n as f64;
    (0..n * n * n).map(move |k| {
        let (i, j, l) = (k / (n * n), (k / n) % n, k % n);
        Vec3::from_f64((i as f64 + 0.37) * h, (j as f64 + 0.11) * h, (l as f64 + 0.73) * h)
    })
}

fn inverse_round_trip() -> Check {
    let spec = MapSpec::linear();
    let mut worst = 0.0f64;
    for p in grid_points(10) {
        let q = spec.apply(p, false);
        let back = match spec.apply_inverse(q, false) {
            Ok(b) => b,
            Err(_) => return check("inverse_round_trip", f64::INFINITY, 1e-28),
        };
        worst = worst.max(torus_distance(back, p).to_f64());
        let j = spec.jacobian(p);
        let a = matrix();
        for r in 0..3 {
            for s in 0..3 {
                worst = worst.max((j.m[r][s] - a.m[r][s]).abs().to_f64());
            }
        }
    }
    check("inverse_round_trip", worst, 1e-28)
}

struct ManifoldChecks {
    eigenline: f64,
    weights: f64,
    involution: f64,
    failures: usize,
}

fn manifold_checks(n: i64) -> Result<ManifoldChecks, CliError> {
    let shooter = Shooter::new(MapSpec::linear(), ShootConfig::default()).map_err(CliError::compute)?;
    let pos = sample_batch(&shooter, 1..=n);
    let neg = sample_batch(&shooter, -n..=-1);
    let (vx, vz) = (c(EIGENVECTOR[0]), c(EIGENVECTOR[2]));
    let mut eigenline = 0.0f64;
    for s in &pos.samples {
        let y = Scalar::from_f64(s.y0 as f64);
        let expect = torus_reduce(Vec3::new(y * vx, Scalar::ZERO, y * vz));
        let got = Vec3::new(s.x, Scalar::ZERO, s.z);
        eigenline = eigenline.max(torus_distance(got, expect).to_f64());
    }
    let first = pos.samples.first();
    let mut weights = 0.0f64;
    if let Some(f) = first {
        for s in &pos.samples {
            weights = weights
                .max(((s.rho - f.rho) / f.rho).abs().to_f64())
                .max(((s.angle_weight - f.angle_weight) / f.angle_weight).abs().to_f64());
        }
    }
    let mut involution = 0.0f64;
    for s in &neg.samples {
        if let Some(p) = pos.samples.iter().find(|p| p.y0 == -s.y0) {
            let mirrored = torus_reduce(Vec3::new(-p.x, Scalar::ZERO, -p.z));
            involution = involution.max(torus_distance(Vec3::new(s.x, Scalar::ZERO, s.z), mirrored).to_f64());
        }
    }
    Ok(ManifoldChecks {
        eigenline,
        weights,
        involution,
        failures: pos.failures.len() + neg.failures.len(),
    })
}

fn fixed_point_census() -> Check {
    let cfg = PeriodicSearchConfig {
        mesh: 24,
        period: 1,
        ..PeriodicSearchConfig::default()
    };
    match find_orbits(&MapSpec::linear(), &cfg) {
        Ok(r) => {
            let at_origin = r.orbits.first().map_or(f64::INFINITY, |o| {
                torus_distance(o.points[0], Vec3::zero()).to_f64()
            });
            Check {
                name: "fixed_point_census",
                ok: r.point_count() == 1 && at_origin < 1e-20,
                detail: format!("{} fixed points", r.point_count()),
            }
        }
        Err(e) => Check {
            name: "fixed_point_census",
            ok: false,
            detail: e.to_string(),
        },
    }
}

pub fn selftest(a: &SelftestArgs, out: &Path) -> Result<Outcome, CliError> {
    if a.y0_max < 1 {
        return Err(CliError::invalid("--y0-max must be positive"));
    }
    let m = manifold_checks(a.y0_max)?;
    let checks = vec![
        spectrum(),
        unstable_direction(),
        inverse_round_trip(),
        check("eigenline", m.eigenline, 1e-24),
        check("constant_weights", m.weights, 1e-12),
        check("involution", m.involution, 1e-24),
        Check {
            name: "shooting_failures",
            ok: m.failures == 0,
            detail: format!("{} failures", m.failures),
        },
        fixed_point_census(),
    ];

    let mut o = Outcome::default();
    let mut rows = Vec::new();
    for ch in &checks {
        let status = if ch.ok { "PASS" } else { "FAIL" };
        println!("{status} {} ({})", ch.name, ch.detail);
        rows.push((ch.name.to_owned(), format!("{} {}", status.to_ascii_lowercase(), ch.detail)));
    }
    let failed = checks.iter().filter(|c| !c.ok).count();
    let name = "selftest.csv";
    let path = out.join(name);
    let file = std::fs::File::create(&path).context(format!("cannot create {}", path.display()))?;
    io::write_metrics(file, &rows).context(name)?;
    o.outputs.push(name.into());
    o.result("checks", checks.len());
    o.result("failed", failed);
    o.results.extend(rows);
    if failed > 0 {
        o.exit_code = 3;
    }
    Ok(o)
}
