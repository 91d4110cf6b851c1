use std::fs::File;
use std::io::{BufReader, BufWriter};
use std::path::{Path, PathBuf};

use uulab_core::io::{self, ChainWriter, ManifoldWriter, RsdRow};
use uulab_core::manifold::for_each_chunk;
use uulab_core::periodic::BandSummary;
use uulab_core::srb::{chain_config, in_slice, run_chains};
use uulab_core::stats::WeightMode;
use uulab_core::{
    build_weighted, dist_function, find_orbits, ks_two_sample, ks_uniform, pair_by_involution, rsd, BinGrid,
    ManifoldSample, MapSpec, NoiseConfig, PeriodicSearchConfig, Scalar, ShootConfig, Shooter, SrbChain,
    WeightedPoints2D,
};

use crate::args::{CompareArgs, ManifoldArgs, MapArgs, PeriodicArgs, SrbArgs, StatsArgs};
use crate::error::{CliError, Context};

const CHUNK: usize = 4096;
const MAX_LISTED_FAILURES: usize = 20;

/// What a subcommand produced, for the manifest.
#[derive(Debug, Default)]
pub struct Outcome {
    pub outputs: Vec<String>,
    pub results: Vec<(String, String)>,
    /// Nonzero when the run completed but its checks failed.
    pub exit_code: i32,
}

impl Outcome {
    pub fn result(&mut self, key: impl Into<String>, value: impl ToString) {
        self.results.push((key.into(), value.to_string()));
    }
}

fn map_spec(m: &MapArgs) -> Result<MapSpec, CliError> {
    MapSpec::new(m.family, m.epsilon).map_err(CliError::invalid)
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>, CliError> {
    let path = dir.join(name);
    File::create(&path).map(BufWriter::new).context(format!("cannot create {}", path.display()))
}

fn open(path: &Path) -> Result<BufReader<File>, CliError> {
    File::open(path)
        .map(BufReader::new)
        .map_err(|e| CliError::invalid(format!("cannot open {}: {e}", path.display())))
}

fn fmt(x: Scalar) -> String {
    io::fmt_scalar(x)
}

pub fn manifold(a: &ManifoldArgs, out: &Path) -> Result<Outcome, CliError> {
    let spec = map_spec(&a.map)?;
    let cfg = ShootConfig {
        depth: a.depth,
        mix: a.mix,
        update: a.update.into(),
        tol_y: a.tol_y,
        max_iter: a.max_iter,
        delta_q: a.delta_q,
    };
    let shooter = Shooter::new(spec, cfg).map_err(CliError::invalid)?;

    let name = "manifold.csv";
    let mut writer = ManifoldWriter::new(create(out, name)?).context(name)?;
    let mut written = 0u64;
    let mut failures: Vec<(i64, String)> = Vec::new();
    let mut failure_count = 0u64;
    let mut write_err = None;
    for_each_chunk(&shooter, a.y0.start..=a.y0.end, CHUNK, |batch| {
        if write_err.is_some() {
            return;
        }
        if let Err(e) = writer.write(&batch.samples) {
            write_err = Some(e);
        }
        written += batch.samples.len() as u64;
        failure_count += batch.failures.len() as u64;
        for (y0, e) in batch.failures {
            if failures.len() < MAX_LISTED_FAILURES {
                failures.push((y0, e.to_string()));
            }
        }
    });
    if let Some(e) = write_err {
        return Err(e).context(name);
    }
    writer.finish().context(name)?;

    let mut o = Outcome {
        outputs: vec![name.into()],
        ..Outcome::default()
    };
    o.result("samples", written);
    o.result("failures", failure_count);
    for (y0, e) in &failures {
        o.result(format!("failure.{y0}"), e);
    }
    if written == 0 {
        return Err(CliError::compute(format!("no level converged ({failure_count} failures)")));
    }
    Ok(o)
}

pub fn srb(a: &SrbArgs, out: &Path) -> Result<Outcome, CliError> {
    let spec = map_spec(&a.map)?;
    let cfg = NoiseConfig {
        sigma: a.sigma,
        seed: a.seed,
        burn_in: a.burn_in,
        truncate: a.truncate,
        ..NoiseConfig::default()
    };
    cfg.validate().map_err(CliError::invalid)?;
    if a.steps == 0 || a.chains == 0 {
        return Err(CliError::invalid("--steps and --chains must be positive"));
    }
    let hw = a.slice_half_width;
    if !(hw > Scalar::ZERO && hw <= Scalar::from_f64(0.5)) {
        return Err(CliError::invalid(format!("--slice-half-width {} outside (0, 0.5]", hw.to_f64())));
    }

    let mut outputs = Vec::new();
    let slices: Vec<Vec<(Scalar, Scalar)>> = if a.full_chain {
        let name = "chain.csv";
        let mut w = ChainWriter::new(create(out, name)?).context(name)?;
        let mut slices = Vec::with_capacity(a.chains);
        for k in 0..a.chains as u64 {
            let chain = SrbChain::new(spec, &chain_config(&cfg, k)).map_err(CliError::invalid)?;
            let mut slice = Vec::new();
            for s in chain.take(a.steps as usize) {
                w.write(&s).context(name)?;
                if in_slice(s.point.y, hw) {
                    slice.push((s.point.x, s.point.z));
                }
            }
            slices.push(slice);
        }
        w.finish().context(name)?;
        outputs.push(name.to_owned());
        slices
    } else {
        run_chains(spec, &cfg, a.chains, a.steps, |it| {
            it.filter(|s| in_slice(s.point.y, hw)).map(|s| (s.point.x, s.point.z)).collect()
        })
        .map_err(CliError::invalid)?
    };
    let points: Vec<(Scalar, Scalar)> = slices.into_iter().flatten().collect();
    let name = "slice.csv";
    io::write_slice(create(out, name)?, &points).context(name)?;
    outputs.push(name.to_owned());

    let total = a.steps * a.chains as u64;
    let mut o = Outcome {
        outputs,
        ..Outcome::default()
    };
    o.result("steps_total", total);
    o.result("slice_points", points.len());
    o.result("slice_fraction", points.len() as f64 / total as f64);
    Ok(o)
}

pub fn periodic(a: &PeriodicArgs, out: &Path) -> Result<Outcome, CliError> {
    let cfg = PeriodicSearchConfig {
        mesh: a.mesh,
        period: a.period,
        capture_threshold: a.capture_threshold,
        refine_target: a.refine_target,
        fd_step: a.fd_step,
        descent_step: a.descent_step,
        reduce_period: !a.strict_period,
    };
    cfg.validate().map_err(CliError::invalid)?;
    let specs = a
        .epsilon_grid
        .0
        .iter()
        .map(|&e| MapSpec::new(a.family, e).map_err(CliError::invalid))
        .collect::<Result<Vec<_>, _>>()?;

    let mut o = Outcome::default();
    let mut sweep = Vec::with_capacity(specs.len());
    for (k, spec) in specs.iter().enumerate() {
        let mut report = find_orbits(spec, &cfg).map_err(CliError::compute)?;
        let key = |s: &str| format!("e{k}.{s}");
        o.result(key("epsilon"), fmt(spec.epsilon()));
        o.result(key("points"), report.point_count());
        o.result(key("orbits"), report.orbits.len());
        o.result(key("candidates"), report.candidates);
        o.result(key("failures"), report.failures.len());
        o.result(key("non_invertible"), report.non_invertible);
        match pair_by_involution(&mut report.orbits, Scalar::from_f64(10.0 * cfg.refine_target)) {
            Ok(p) => {
                o.result(key("pairs"), p.pairs);
                o.result(key("self_paired"), p.self_paired.len());
            }
            Err(e) => o.result(key("pairing"), e),
        }
        if let Some(b) = BandSummary::of(&report.orbits) {
            for i in 0..3 {
                o.result(key(&format!("band{}", i + 1)), format!("{:.12}..{:.12}", b.min[i], b.max[i]));
            }
        }
        sweep.push((spec.epsilon(), report.orbits));
    }
    let name = "periodic.csv";
    io::write_periodic_sweep(create(out, name)?, &sweep).context(name)?;
    o.outputs.push(name.into());
    Ok(o)
}

fn load_manifold(path: &Path) -> Result<Vec<ManifoldSample>, CliError> {
    let s = io::read_manifold(open(path)?).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    if s.is_empty() {
        return Err(CliError::invalid(format!("{}: no samples", path.display())));
    }
    Ok(s)
}

fn load_slice(path: &Path) -> Result<Vec<(Scalar, Scalar)>, CliError> {
    let s = io::read_slice(open(path)?).map_err(|e| CliError::invalid(format!("{}: {e}", path.display())))?;
    if s.is_empty() {
        return Err(CliError::invalid(format!("{}: no samples", path.display())));
    }
    Ok(s)
}

fn check_bins(bins: usize) -> Result<(), CliError> {
    if bins < 2 {
        return Err(CliError::invalid("--bins must be at least 2"));
    }
    Ok(())
}

fn default_checkpoints(max: u64) -> Vec<u64> {
    let mut v: Vec<u64> = std::iter::successors(Some(10u64), |n| n.checked_mul(10))
        .take_while(|&n| n < max)
        .collect();
    v.push(max);
    v
}

fn grid_rsd(g: &BinGrid) -> Result<Scalar, CliError> {
    rsd(g).map_err(CliError::compute)
}

pub fn stats(a: &StatsArgs, out: &Path) -> Result<Outcome, CliError> {
    check_bins(a.bins)?;
    if a.u.is_none() && a.srb.is_none() {
        return Err(CliError::invalid("stats needs --u, --srb or both"));
    }
    let u = a.u.as_deref().map(load_manifold).transpose()?;
    let srb = a.srb.as_deref().map(load_slice).transpose()?;
    let n_u = u.as_ref().map_or(0, |v| v.len() as u64);
    let n_srb = srb.as_ref().map_or(0, |v| v.len() as u64);

    let mut checkpoints = if a.checkpoints.is_empty() {
        default_checkpoints(n_u.max(n_srb))
    } else {
        a.checkpoints.clone()
    };
    if checkpoints.contains(&0) {
        return Err(CliError::invalid("--checkpoints must be positive"));
    }
    checkpoints.sort_unstable();
    checkpoints.dedup();

    // Running grids per weighting; RSD is invariant under rescaling, so raw weights suffice.
    let mut u_grids: Vec<BinGrid> = (0..WeightMode::ALL.len())
        .map(|_| BinGrid::new(a.bins))
        .collect::<Result<_, _>>()
        .map_err(CliError::invalid)?;
    let mut srb_grid = BinGrid::new(a.bins).map_err(CliError::invalid)?;
    let mut rows = Vec::with_capacity(checkpoints.len());
    let (mut iu, mut is) = (0usize, 0usize);
    for &n in &checkpoints {
        let mut row = RsdRow {
            n,
            ..RsdRow::default()
        };
        if let Some(u) = &u {
            if n <= n_u {
                for s in &u[iu..n as usize] {
                    for (g, mode) in u_grids.iter_mut().zip(WeightMode::ALL) {
                        g.add(s.x, s.z, mode.weight(s.rho, s.angle_weight));
                    }
                }
                iu = n as usize;
                row.rsd_u = Some(grid_rsd(&u_grids[0])?);
                row.rsd_u_rho = Some(grid_rsd(&u_grids[1])?);
                row.rsd_u_a = Some(grid_rsd(&u_grids[2])?);
                row.rsd_u_rhoa = Some(grid_rsd(&u_grids[3])?);
            }
        }
        if let Some(srb) = &srb {
            if n <= n_srb {
                for &(x, z) in &srb[is..n as usize] {
                    srb_grid.add(x, z, Scalar::ONE);
                }
                is = n as usize;
                row.rsd_srb = Some(grid_rsd(&srb_grid)?);
            }
        }
        rows.push(row);
    }

    let mut o = Outcome::default();
    let name = "rsd.csv";
    io::write_rsd(create(out, name)?, &rows).context(name)?;
    o.outputs.push(name.into());
    o.result("n_u", n_u);
    o.result("n_srb", n_srb);

    if a.ks {
        let mode: WeightMode = a.mode.into();
        let mut metrics = vec![
            ("bins".to_owned(), a.bins.to_string()),
            ("mode".to_owned(), mode.name().to_owned()),
        ];
        let fu = match &u {
            Some(u) => {
                let f = dist_function(&build_weighted(u, mode).map_err(CliError::compute)?, a.bins)
                    .map_err(CliError::compute)?;
                let name = "dist_u.csv";
                io::write_dist(create(out, name)?, &f).context(name)?;
                o.outputs.push(name.into());
                metrics.push(("ks_uniform_u".into(), fmt(ks_uniform(&f))));
                Some(f)
            }
            None => None,
        };
        let fs = match &srb {
            Some(s) => {
                let pts = WeightedPoints2D::uniform(s.iter().copied()).map_err(CliError::compute)?;
                let f = dist_function(&pts, a.bins).map_err(CliError::compute)?;
                let name = "dist_srb.csv";
                io::write_dist(create(out, name)?, &f).context(name)?;
                o.outputs.push(name.into());
                metrics.push(("ks_uniform_srb".into(), fmt(ks_uniform(&f))));
                Some(f)
            }
            None => None,
        };
        if let (Some(fu), Some(fs)) = (&fu, &fs) {
            metrics.push(("ks_u_srb".into(), fmt(ks_two_sample(fu, fs).map_err(CliError::compute)?)));
        }
        let name = "ks.csv";
        io::write_metrics(create(out, name)?, &metrics).context(name)?;
        o.outputs.push(name.into());
    }
    Ok(o)
}

pub fn compare(a: &CompareArgs, out: &Path) -> Result<Outcome, CliError> {
    check_bins(a.bins)?;
    let u = load_manifold(&a.u)?;
    let srb = load_slice(&a.srb)?;
    let mode: WeightMode = a.mode.into();
    let pu = build_weighted(&u, mode).map_err(CliError::compute)?;
    let ps = WeightedPoints2D::uniform(srb.iter().copied()).map_err(CliError::compute)?;
    let gu = uulab_core::bin(&pu, a.bins).map_err(CliError::compute)?;
    let gs = uulab_core::bin(&ps, a.bins).map_err(CliError::compute)?;
    let fu = uulab_core::DistFunction::from_grid(&gu).map_err(CliError::compute)?;
    let fs = uulab_core::DistFunction::from_grid(&gs).map_err(CliError::compute)?;

    let metrics = vec![
        ("n_u".to_owned(), u.len().to_string()),
        ("n_srb".to_owned(), srb.len().to_string()),
        ("bins".to_owned(), a.bins.to_string()),
        ("mode".to_owned(), mode.name().to_owned()),
        ("rsd_u".to_owned(), fmt(grid_rsd(&gu)?)),
        ("rsd_srb".to_owned(), fmt(grid_rsd(&gs)?)),
        ("ks_uniform_u".to_owned(), fmt(ks_uniform(&fu))),
        ("ks_uniform_srb".to_owned(), fmt(ks_uniform(&fs))),
        ("ks_two_sample".to_owned(), fmt(ks_two_sample(&fu, &fs).map_err(CliError::compute)?)),
    ];
    let name = "compare.csv";
    io::write_metrics(create(out, name)?, &metrics).context(name)?;
    let mut o = Outcome {
        outputs: vec![name.into()],
        ..Outcome::default()
    };
    o.results = metrics;
    Ok(o)
}

pub fn prepare_out(dir: &Path) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).context(format!("cannot create {}", dir.display()))?;
    Ok(dir.to_path_buf())
}
