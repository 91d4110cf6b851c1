#![allow(dead_code)]

use std::io::Write;

/// Prints a verdict line that bypasses the test harness capture, then asserts it.
pub fn verdict(criterion: &str, pass: bool, detail: &str) {
    let line = format!("ACCEPTANCE {} {criterion}: {detail}\n", if pass { "PASS" } else { "FAIL" });
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    assert!(pass, "{criterion}: {detail}");
}

/// Small deterministic generator for test inputs, unrelated to the library's LCG.
pub struct SplitMix(pub u64);

impl SplitMix {
    pub fn next_u64(&mut self) -> u64 {
        self.0 = self.0.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut z = self.0;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
        z ^ (z >> 31)
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

const A: [[i64; 3]; 3] = [[2, 1, 0], [1, 2, 1], [0, 1, 1]];

fn mul(a: [[i64; 3]; 3], b: [[i64; 3]; 3]) -> [[i64; 3]; 3] {
    let mut c = [[0; 3]; 3];
    for i in 0..3 {
        for j in 0..3 {
            c[i][j] = (0..3).map(|k| a[i][k] * b[k][j]).sum();
        }
    }
    c
}

/// Exact solutions of (Aⁿ − I)x ∈ Z³ in [0,1)³, found by exhaustive search over
/// the lattice (1/d)Z³ with d = |det(Aⁿ − I)|.
pub fn lattice_periodic_points(n: u32) -> Vec<[f64; 3]> {
    let mut m = A;
    for _ in 1..n {
        m = mul(m, A);
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] -= 1;
    }
    let det = m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0]);
    let d = det.abs();
    let mut pts = Vec::new();
    for a in 0..d {
        for b in 0..d {
            for c in 0..d {
                let v = [a, b, c];
                let integral = m.iter().all(|row| (row[0] * v[0] + row[1] * v[1] + row[2] * v[2]).rem_euclid(d) == 0);
                if integral {
                    pts.push([a as f64 / d as f64, b as f64 / d as f64, c as f64 / d as f64]);
                }
            }
        }
    }
    pts
}

pub fn torus_gap(p: [f64; 3], q: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| {
            let d = (p[i] - q[i]).rem_euclid(1.0);
            d.min(1.0 - d)
        })
        .map(|d| d * d)
        .sum::<f64>()
        .sqrt()
}

/// Least-squares slope of ln y against ln x.
pub fn fit_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let (lx, ly): (Vec<f64>, Vec<f64>) = xs.iter().zip(ys).map(|(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let num: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let den: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    num / den
}
