//! CSV schemas shared by the command-line tool and the plotting scripts.
//!
//! Every number is written in scientific notation with 30 significant digits.

use std::io::{Read, Write};

use crate::linalg::Vec3;
use crate::manifold::ManifoldSample;
use crate::periodic::PeriodicOrbit;
use crate::scalar::{Scalar, CSV_DIGITS};
use crate::srb::SrbSample;
use crate::stats::DistFunction;

pub const MANIFOLD_HEADER: [&str; 8] = ["y0", "x", "z", "tx", "ty", "tz", "rho", "angle_weight"];
pub const CHAIN_HEADER: [&str; 4] = ["step", "x", "y", "z"];
pub const SLICE_HEADER: [&str; 2] = ["x", "z"];
pub const PERIODIC_HEADER: [&str; 10] = [
    "epsilon", "orbit_id", "point_index", "x", "y", "z", "root1", "root2", "root3", "partner_id",
];
pub const RSD_HEADER: [&str; 6] = ["N", "rsd_u", "rsd_u_rho", "rsd_u_a", "rsd_u_rhoa", "rsd_srb"];
pub const DIST_HEADER: [&str; 4] = ["B", "i", "j", "F"];
pub const METRICS_HEADER: [&str; 2] = ["metric", "value"];

#[derive(Debug, thiserror::Error)]
pub enum IoError {
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("expected header {expected:?}, found {found:?}")]
    Header { expected: Vec<String>, found: Vec<String> },
    #[error("line {line}: cannot parse column {column:?} value {value:?}")]
    Field { line: u64, column: String, value: String },
}

#[inline]
pub fn fmt_scalar(x: Scalar) -> String {
    x.to_sci_string(CSV_DIGITS)
}

fn writer<W: Write>(w: W, header: &[&str]) -> Result<csv::Writer<W>, IoError> {
    let mut out = csv::WriterBuilder::new().has_headers(false).from_writer(w);
    out.write_record(header)?;
    Ok(out)
}

fn reader<R: Read>(r: R, header: &[&str]) -> Result<csv::Reader<R>, IoError> {
    let mut rd = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(r);
    let found: Vec<String> = rd.headers()?.iter().map(str::to_owned).collect();
    if found != header {
        return Err(IoError::Header {
            expected: header.iter().map(|s| s.to_string()).collect(),
            found,
        });
    }
    Ok(rd)
}

fn field<T: std::str::FromStr>(rec: &csv::StringRecord, idx: usize, name: &str) -> Result<T, IoError> {
    let raw = rec.get(idx).unwrap_or("");
    raw.parse().map_err(|_| IoError::Field {
        line: rec.position().map_or(0, |p| p.line()),
        column: name.to_owned(),
        value: raw.to_owned(),
    })
}

/// Incremental writer for manifold samples, for runs too large to hold in memory.
pub struct ManifoldWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> ManifoldWriter<W> {
    pub fn new(w: W) -> Result<Self, IoError> {
        Ok(Self { out: writer(w, &MANIFOLD_HEADER)? })
    }

    pub fn write(&mut self, samples: &[ManifoldSample]) -> Result<(), IoError> {
        for s in samples {
            self.out.write_record([
                s.y0.to_string(),
                fmt_scalar(s.x),
                fmt_scalar(s.z),
                fmt_scalar(s.tangent.x),
                fmt_scalar(s.tangent.y),
                fmt_scalar(s.tangent.z),
                fmt_scalar(s.rho),
                fmt_scalar(s.angle_weight),
            ])?;
        }
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_manifold<W: Write>(w: W, samples: &[ManifoldSample]) -> Result<(), IoError> {
    let mut out = ManifoldWriter::new(w)?;
    out.write(samples)?;
    out.finish()
}

/// Reads manifold samples; the eigendirection coefficient is not stored and comes back as zero.
pub fn read_manifold<R: Read>(r: R) -> Result<Vec<ManifoldSample>, IoError> {
    let mut rd = reader(r, &MANIFOLD_HEADER)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        let s = |i: usize| field::<Scalar>(&rec, i, MANIFOLD_HEADER[i]);
        out.push(ManifoldSample {
            y0: field(&rec, 0, "y0")?,
            x: s(1)?,
            z: s(2)?,
            tangent: Vec3::new(s(3)?, s(4)?, s(5)?),
            rho: s(6)?,
            angle_weight: s(7)?,
            seed_scale: Scalar::ZERO,
        });
    }
    Ok(out)
}

pub struct ChainWriter<W: Write> {
    out: csv::Writer<W>,
}

impl<W: Write> ChainWriter<W> {
    pub fn new(w: W) -> Result<Self, IoError> {
        Ok(Self { out: writer(w, &CHAIN_HEADER)? })
    }

    pub fn write(&mut self, s: &SrbSample) -> Result<(), IoError> {
        self.out.write_record([
            s.step_index.to_string(),
            fmt_scalar(s.point.x),
            fmt_scalar(s.point.y),
            fmt_scalar(s.point.z),
        ])?;
        Ok(())
    }

    pub fn finish(mut self) -> Result<(), IoError> {
        self.out.flush()?;
        Ok(())
    }
}

pub fn write_chain<W: Write>(w: W, samples: impl IntoIterator<Item = SrbSample>) -> Result<(), IoError> {
    let mut out = ChainWriter::new(w)?;
    for s in samples {
        out.write(&s)?;
    }
    out.finish()
}

pub fn write_slice<W: Write>(w: W, points: &[(Scalar, Scalar)]) -> Result<(), IoError> {
    let mut out = writer(w, &SLICE_HEADER)?;
    for (x, z) in points {
        out.write_record([fmt_scalar(*x), fmt_scalar(*z)])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_slice<R: Read>(r: R) -> Result<Vec<(Scalar, Scalar)>, IoError> {
    let mut rd = reader(r, &SLICE_HEADER)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        out.push((field(&rec, 0, "x")?, field(&rec, 1, "z")?));
    }
    Ok(out)
}

pub fn write_periodic<W: Write>(w: W, epsilon: Scalar, orbits: &[PeriodicOrbit]) -> Result<(), IoError> {
    let mut out = writer(w, &PERIODIC_HEADER)?;
    write_periodic_rows(&mut out, epsilon, orbits)?;
    out.flush()?;
    Ok(())
}

/// Rows for several parameter values under one header.
pub fn write_periodic_sweep<W: Write>(w: W, sweep: &[(Scalar, Vec<PeriodicOrbit>)]) -> Result<(), IoError> {
    let mut out = writer(w, &PERIODIC_HEADER)?;
    for (eps, orbits) in sweep {
        write_periodic_rows(&mut out, *eps, orbits)?;
    }
    out.flush()?;
    Ok(())
}

fn write_periodic_rows<W: Write>(out: &mut csv::Writer<W>, epsilon: Scalar, orbits: &[PeriodicOrbit]) -> Result<(), IoError> {
    for (id, o) in orbits.iter().enumerate() {
        for (k, p) in o.points.iter().enumerate() {
            out.write_record([
                fmt_scalar(epsilon),
                id.to_string(),
                k.to_string(),
                fmt_scalar(p.x),
                fmt_scalar(p.y),
                fmt_scalar(p.z),
                fmt_scalar(o.moduli_roots[0]),
                fmt_scalar(o.moduli_roots[1]),
                fmt_scalar(o.moduli_roots[2]),
                o.involution_partner.map_or(String::new(), |p| p.to_string()),
            ])?;
        }
    }
    Ok(())
}

/// One row of the decay table; absent columns are left empty.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RsdRow {
    pub n: u64,
    pub rsd_u: Option<Scalar>,
    pub rsd_u_rho: Option<Scalar>,
    pub rsd_u_a: Option<Scalar>,
    pub rsd_u_rhoa: Option<Scalar>,
    pub rsd_srb: Option<Scalar>,
}

pub fn write_rsd<W: Write>(w: W, rows: &[RsdRow]) -> Result<(), IoError> {
    let mut out = writer(w, &RSD_HEADER)?;
    let opt = |v: Option<Scalar>| v.map_or(String::new(), fmt_scalar);
    for r in rows {
        out.write_record([
            r.n.to_string(),
            opt(r.rsd_u),
            opt(r.rsd_u_rho),
            opt(r.rsd_u_a),
            opt(r.rsd_u_rhoa),
            opt(r.rsd_srb),
        ])?;
    }
    out.flush()?;
    Ok(())
}

pub fn write_dist<W: Write>(w: W, f: &DistFunction) -> Result<(), IoError> {
    let mut out = writer(w, &DIST_HEADER)?;
    let b = f.bins();
    for i in 0..=b {
        for j in 0..=b {
            out.write_record([b.to_string(), i.to_string(), j.to_string(), fmt_scalar(f.get(i, j))])?;
        }
    }
    out.flush()?;
    Ok(())
}

/// Two-column `metric,value` report.
pub fn write_metrics<W: Write>(w: W, rows: &[(String, String)]) -> Result<(), IoError> {
    let mut out = writer(w, &METRICS_HEADER)?;
    for (k, v) in rows {
        out.write_record([k, v])?;
    }
    out.flush()?;
    Ok(())
}

pub fn read_metrics<R: Read>(r: R) -> Result<Vec<(String, String)>, IoError> {
    let mut rd = reader(r, &METRICS_HEADER)?;
    let mut out = Vec::new();
    for rec in rd.records() {
        let rec = rec?;
        out.push((field(&rec, 0, "metric")?, field(&rec, 1, "value")?));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::manifold::{ShootConfig, Shooter};
    use crate::maps::MapSpec;

    #[test]
    fn manifold_round_trip() {
        let sh = Shooter::new(MapSpec::conservative(0.04), ShootConfig::default()).unwrap();
        let samples: Vec<_> = (1..=5).map(|y| sh.shoot(y).unwrap()).collect();
        let mut buf = Vec::new();
        write_manifold(&mut buf, &samples).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("y0,x,z,tx,ty,tz,rho,angle_weight\n"));
        let back = read_manifold(&buf[..]).unwrap();
        for (a, b) in samples.iter().zip(&back) {
            assert_eq!(a.y0, b.y0);
            assert!((a.x - b.x).abs().to_f64() < 1e-29);
            assert!(((a.rho - b.rho) / a.rho).abs().to_f64() < 1e-29);
        }
    }

    #[test]
    fn header_mismatch_is_reported() {
        let err = read_slice("a,b\n1,2\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::Header { .. }));
        let err = read_slice("x,z\n0.5,oops\n".as_bytes()).unwrap_err();
        assert!(matches!(err, IoError::Field { line: 2, .. }), "{err}");
    }

    #[test]
    fn slice_round_trip() {
        let pts = vec![(Scalar::from_f64(0.25), Scalar::from_f64(0.75))];
        let mut buf = Vec::new();
        write_slice(&mut buf, &pts).unwrap();
        let back = read_slice(&buf[..]).unwrap();
        assert!((back[0].0 - pts[0].0).abs().to_f64() < 1e-31);
        assert!((back[0].1 - pts[0].1).abs().to_f64() < 1e-31);
    }
}
