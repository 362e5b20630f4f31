//! Brute-force quadrature of the grounded-plane Green's function, shared by
//! the field oracle tests and the acceptance suite.

use sixwire_core::{FieldPoint, Rect};

/// Gauss–Legendre nodes and weights on [-1, 1].
pub fn gauss_legendre(n: usize) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                break;
            }
        }
        let (mut p0, mut p1) = (1.0, x);
        for k in 2..=n {
            let p2 = ((2 * k - 1) as f64 * x * p1 - (k - 1) as f64 * p0) / k as f64;
            p0 = p1;
            p1 = p2;
        }
        let dp = n as f64 * (x * p1 - p0) / (x * x - 1.0);
        out.push((x, 2.0 / ((1.0 - x * x) * dp * dp)));
    }
    out
}

/// `∫∫ y / (2π r³) dx' dz'` over the rectangle, composite Gauss–Legendre
/// with panels no wider than `y / 2`.
pub fn quadrature(r: &Rect, p: FieldPoint) -> f64 {
    let gl = gauss_legendre(12);
    let panels = |len: f64| ((2.0 * len / p.y).ceil() as usize).clamp(1, 400);
    let (nx, nz) = (panels(r.x2 - r.x1), panels(r.z2 - r.z1));
    let (hx, hz) = ((r.x2 - r.x1) / nx as f64, (r.z2 - r.z1) / nz as f64);
    let mut sum = 0.0;
    for ix in 0..nx {
        let cx = r.x1 + (ix as f64 + 0.5) * hx;
        for iz in 0..nz {
            let cz = r.z1 + (iz as f64 + 0.5) * hz;
            for &(u, wu) in &gl {
                let dx = cx + 0.5 * hx * u - p.x;
                for &(v, wv) in &gl {
                    let dz = cz + 0.5 * hz * v - p.z;
                    let r2 = dx * dx + dz * dz + p.y * p.y;
                    sum += wu * wv * p.y / (r2 * r2.sqrt());
                }
            }
        }
    }
    sum * 0.25 * hx * hz / (2.0 * std::f64::consts::PI)
}
