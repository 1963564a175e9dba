//! Independent test oracle: fixed-step RK4 integration of the Lax pair
//!   Phi_x = (-ik sigma3 + Q) Phi,  Q = [[0, q(x)], [-sigma conj(q(-x)), 0]],
//! segment-split at the potential's discontinuities. Shares nothing with
//! the Volterra solver under test.

use num_complex::Complex64;

type Mat = [[Complex64; 2]; 2];

fn lax_matrix(q: &dyn Fn(f64) -> Complex64, sigma: f64, k: Complex64, x: f64) -> Mat {
    let i = Complex64::new(0.0, 1.0);
    [
        [-i * k, q(x)],
        [-sigma * q(-x).conj(), i * k],
    ]
}

fn mat_mul_vec(m: &Mat, v: [Complex64; 2]) -> [Complex64; 2] {
    [
        m[0][0] * v[0] + m[0][1] * v[1],
        m[1][0] * v[0] + m[1][1] * v[1],
    ]
}

fn rk4_step(
    q: &dyn Fn(f64) -> Complex64,
    sigma: f64,
    k: Complex64,
    x: f64,
    h: f64,
    v: [Complex64; 2],
) -> [Complex64; 2] {
    // evaluate the coefficient matrix inside the smooth piece: nudge the
    // endpoint stages off a potential jump at the segment boundary
    let nudge = 1e-12 * h.signum();
    let m0 = lax_matrix(q, sigma, k, x + nudge);
    let mh = lax_matrix(q, sigma, k, x + h / 2.0);
    let m1 = lax_matrix(q, sigma, k, x + h - nudge);
    let k1 = mat_mul_vec(&m0, v);
    let k2 = mat_mul_vec(&mh, [v[0] + h / 2.0 * k1[0], v[1] + h / 2.0 * k1[1]]);
    let k3 = mat_mul_vec(&mh, [v[0] + h / 2.0 * k2[0], v[1] + h / 2.0 * k2[1]]);
    let k4 = mat_mul_vec(&m1, [v[0] + h * k3[0], v[1] + h * k3[1]]);
    [
        v[0] + h / 6.0 * (k1[0] + 2.0 * k2[0] + 2.0 * k3[0] + k4[0]),
        v[1] + h / 6.0 * (k1[1] + 2.0 * k2[1] + 2.0 * k3[1] + k4[1]),
    ]
}

fn integrate_column(
    q: &dyn Fn(f64) -> Complex64,
    sigma: f64,
    k: Complex64,
    x_start: f64,
    x_end: f64,
    breaks: &[f64],
    h_target: f64,
    mut v: [Complex64; 2],
) -> [Complex64; 2] {
    let forward = x_end > x_start;
    // segment endpoints: start, interior breaks in travel order, end
    let mut pts: Vec<f64> = breaks
        .iter()
        .cloned()
        .filter(|&b| {
            if forward {
                b > x_start && b < x_end
            } else {
                b < x_start && b > x_end
            }
        })
        .collect();
    pts.sort_by(|a, b| {
        if forward {
            a.partial_cmp(b).unwrap()
        } else {
            b.partial_cmp(a).unwrap()
        }
    });
    pts.insert(0, x_start);
    pts.push(x_end);
    for w in pts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let len = (b - a).abs();
        if len == 0.0 {
            continue;
        }
        let steps = (len / h_target).ceil().max(1.0) as usize;
        let h = (b - a) / steps as f64;
        let mut x = a;
        for _ in 0..steps {
            v = rk4_step(q, sigma, k, x, h, v);
            x += h;
        }
    }
    v
}

/// Left Jost matrix Psi_1(x_end, k) integrated from x_start (where the
/// potential and its reflection both vanish), normalized e^{-ikx sigma3}
/// at x_start.
pub fn lax_jost_left(
    q: &dyn Fn(f64) -> Complex64,
    sigma: f64,
    k: Complex64,
    x_start: f64,
    x_end: f64,
    breaks: &[f64],
    h_target: f64,
) -> Mat {
    let i = Complex64::new(0.0, 1.0);
    let c1 = integrate_column(
        q,
        sigma,
        k,
        x_start,
        x_end,
        breaks,
        h_target,
        [(-i * k * x_start).exp(), Complex64::new(0.0, 0.0)],
    );
    let c2 = integrate_column(
        q,
        sigma,
        k,
        x_start,
        x_end,
        breaks,
        h_target,
        [Complex64::new(0.0, 0.0), (i * k * x_start).exp()],
    );
    [[c1[0], c2[0]], [c1[1], c2[1]]]
}

/// Right Jost matrix Psi_2(x_end, k), integrated downward from x_start.
pub fn lax_jost_right(
    q: &dyn Fn(f64) -> Complex64,
    sigma: f64,
    k: Complex64,
    x_start: f64,
    x_end: f64,
    breaks: &[f64],
    h_target: f64,
) -> Mat {
    lax_jost_left(q, sigma, k, x_start, x_end, breaks, h_target)
}

pub fn mat_diff(a: &Mat, b: &[[Complex64; 2]; 2]) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..2 {
        for c in 0..2 {
            worst = worst.max((a[r][c] - b[r][c]).norm());
        }
    }
    worst
}
