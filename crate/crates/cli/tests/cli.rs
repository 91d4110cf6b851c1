use std::path::Path;
use std::process::{Command, Output};

fn uulab(args: &[&str], envs: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_uulab"));
    cmd.args(args);
    for (k, _) in std::env::vars() {
        if k.starts_with("UULAB_") {
            cmd.env_remove(k);
        }
    }
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("binary runs")
}

fn read(p: &Path) -> String {
    std::fs::read_to_string(p).unwrap_or_else(|e| panic!("{}: {e}", p.display()))
}

fn param(manifest: &str, key: &str) -> String {
    let prefix = format!("param.{key}=");
    manifest
        .lines()
        .find_map(|l| l.strip_prefix(&prefix))
        .unwrap_or_else(|| panic!("no {key} in manifest"))
        .to_owned()
}

#[test]
fn selftest_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = uulab(&["selftest", "--y0-max", "200", "--out", dir.path().to_str().unwrap()], &[]);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert_eq!(out.status.code(), Some(0), "{stdout}");
    assert!(!stdout.contains("FAIL"));
    assert!(dir.path().join("selftest.csv").exists());
    assert!(dir.path().join("manifest_selftest.txt").exists());
}

#[test]
fn manifold_csv_and_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = uulab(&["manifold", "--family", "C", "--epsilon", "0.04", "--y0", "-20..20", "--out", d], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("manifold.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "y0,x,z,tx,ty,tz,rho,angle_weight");
    assert_eq!(lines.len(), 41);
    assert!(lines[1].starts_with("-20,"));
    assert!(lines.iter().all(|l| !l.starts_with("0,")));
    let manifest = read(&dir.path().join("manifest_manifold.txt"));
    assert_eq!(param(&manifest, "epsilon"), "0.04");
    assert!(manifest.contains("result.samples=40"));
    assert!(manifest.contains("result.failures=0"));
    assert!(manifest.contains("wall_time_s="));
}

#[test]
fn output_independent_of_thread_count() {
    let mut outputs = Vec::new();
    for threads in ["1", "4", "8"] {
        let dir = tempfile::tempdir().unwrap();
        let d = dir.path().to_str().unwrap();
        let a = uulab(&["--threads", threads, "manifold", "--epsilon", "0.1", "--y0", "1..300", "--out", d], &[]);
        assert_eq!(a.status.code(), Some(0));
        let b = uulab(
            &["--threads", threads, "srb", "--family", "D", "--epsilon", "0.1", "--steps", "3000", "--chains", "3", "--out", d],
            &[],
        );
        assert_eq!(b.status.code(), Some(0));
        outputs.push((read(&dir.path().join("manifold.csv")), read(&dir.path().join("slice.csv"))));
    }
    assert!(outputs.windows(2).all(|w| w[0] == w[1]));
}

#[test]
fn precedence_cli_env_file_default() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.cfg");
    std::fs::write(&cfg, "# defaults\nepsilon = 0.07\ny0 = 1..3\nfamily = D\n").unwrap();
    let run = |extra: &[&str], envs: &[(&str, &str)]| {
        let out_dir = tempfile::tempdir().unwrap();
        let mut args = vec!["--config", cfg.to_str().unwrap(), "manifold", "--out", out_dir.path().to_str().unwrap()];
        args.extend_from_slice(extra);
        let out = uulab(&args, envs);
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        read(&out_dir.path().join("manifest_manifold.txt"))
    };
    let m = run(&[], &[]);
    assert_eq!(param(&m, "epsilon"), "0.07");
    assert_eq!(param(&m, "family"), "D");
    assert_eq!(param(&m, "depth"), "50");
    let m = run(&[], &[("UULAB_EPSILON", "0.02")]);
    assert_eq!(param(&m, "epsilon"), "0.02");
    let m = run(&["--epsilon", "0.01"], &[("UULAB_EPSILON", "0.02")]);
    assert_eq!(param(&m, "epsilon"), "0.01");
    assert_eq!(param(&m, "y0"), "1..3");
}

#[test]
fn validation_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    for args in [
        vec!["manifold", "--epsilon", "-0.5", "--out", d],
        vec!["manifold", "--y0", "5..1", "--out", d],
        vec!["manifold", "--family", "Q", "--out", d],
        vec!["srb", "--sigma", "1e-40", "--out", d],
        vec!["periodic", "--mesh", "1", "--out", d],
        vec!["stats", "--out", d],
        vec!["compare", "--u", "/nonexistent.csv", "--srb", "/nonexistent.csv", "--out", d],
        vec!["frobnicate"],
    ] {
        let out = uulab(&args, &[]);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
    }
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "not_a_flag = 3\n").unwrap();
    let out = uulab(&["--config", cfg.to_str().unwrap(), "manifold", "--out", d], &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn stats_and_compare_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    assert_eq!(uulab(&["manifold", "--epsilon", "0.1", "--y0", "1..500", "--out", d], &[]).status.code(), Some(0));
    assert_eq!(
        uulab(&["srb", "--epsilon", "0.1", "--steps", "20000", "--slice-half-width", "0.05", "--out", d], &[])
            .status
            .code(),
        Some(0)
    );
    let u = dir.path().join("manifold.csv");
    let s = dir.path().join("slice.csv");
    let (u, s) = (u.to_str().unwrap(), s.to_str().unwrap());
    let out = uulab(&["stats", "--u", u, "--srb", s, "--bins", "10", "--ks", "--checkpoints", "100,500", "--out", d], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let rsd = read(&dir.path().join("rsd.csv"));
    let rows: Vec<&str> = rsd.lines().collect();
    assert_eq!(rows[0], "N,rsd_u,rsd_u_rho,rsd_u_a,rsd_u_rhoa,rsd_srb");
    assert_eq!(rows.len(), 3);
    assert!(rows[2].starts_with("500,"));
    let dist = read(&dir.path().join("dist_u.csv"));
    assert_eq!(dist.lines().count(), 1 + 11 * 11);
    assert!(dist.lines().last().unwrap().starts_with("10,10,10,1.0000"));

    let out = uulab(&["compare", "--u", u, "--srb", s, "--bins", "10", "--out", d], &[]);
    assert_eq!(out.status.code(), Some(0));
    let report = read(&dir.path().join("compare.csv"));
    assert!(report.starts_with("metric,value\n"));
    for key in ["ks_two_sample", "rsd_u", "rsd_srb", "ks_uniform_u", "n_u,500"] {
        assert!(report.contains(key), "{key}");
    }
    assert!(dir.path().join("manifest_compare.txt").exists());
}

#[test]
fn periodic_fixed_points() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path().to_str().unwrap();
    let out = uulab(&["periodic", "--family", "L", "--period", "1", "--mesh", "20", "--out", d], &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = read(&dir.path().join("periodic.csv"));
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "epsilon,orbit_id,point_index,x,y,z,root1,root2,root3,partner_id");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].ends_with(",0"));
}
