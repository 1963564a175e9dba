//! Small numeric helpers shared across modules: local cubic
//! interpolation on uniform grids, adaptive Simpson quadrature and a
//! least-squares line fit.

use num_complex::Complex64;

/// Four-point Lagrange cubic on a uniform grid. Returns None outside
/// [xs[0], xs[last]].
pub fn cubic_interp(xs: &[f64], ys: &[Complex64], x: f64) -> Option<Complex64> {
    let n = xs.len();
    if n < 4 || x < xs[0] || x > xs[n - 1] {
        return None;
    }
    let h = xs[1] - xs[0];
    let j = (((x - xs[0]) / h).floor() as usize).min(n - 2);
    let i0 = j.saturating_sub(1).min(n - 4);
    let mut acc = Complex64::new(0.0, 0.0);
    for a in 0..4 {
        let mut w = 1.0;
        for b in 0..4 {
            if a != b {
                w *= (x - xs[i0 + b]) / (xs[i0 + a] - xs[i0 + b]);
            }
        }
        acc += w * ys[i0 + a];
    }
    Some(acc)
}

/// Adaptive Simpson for a complex-valued integrand on [a, b] with
/// absolute tolerance `tol`. Returns None if the subdivision budget is
/// exhausted before the tolerance is met.
pub fn adaptive_simpson<F>(f: &F, a: f64, b: f64, tol: f64) -> Option<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    let fa = f(a);
    let fb = f(b);
    let m = 0.5 * (a + b);
    let fm = f(m);
    let whole = simpson(a, b, fa, fm, fb);
    let mut budget = 200_000usize;
    simpson_rec(f, a, b, fa, fm, fb, whole, tol, 60, &mut budget)
}

fn simpson(a: f64, b: f64, fa: Complex64, fm: Complex64, fb: Complex64) -> Complex64 {
    (b - a) / 6.0 * (fa + 4.0 * fm + fb)
}

#[allow(clippy::too_many_arguments)]
fn simpson_rec<F>(
    f: &F,
    a: f64,
    b: f64,
    fa: Complex64,
    fm: Complex64,
    fb: Complex64,
    whole: Complex64,
    tol: f64,
    depth: u32,
    budget: &mut usize,
) -> Option<Complex64>
where
    F: Fn(f64) -> Complex64,
{
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let m = 0.5 * (a + b);
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let left = simpson(a, m, fa, flm, fm);
    let right = simpson(m, b, fm, frm, fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol || depth == 0 {
        // at depth exhaustion the interval is ~2^-60 of the span; a point
        // discontinuity stalls the halving-tolerance test there even
        // though its remaining contribution is microscopic, so only a
        // macroscopic discrepancy counts as failure
        if depth == 0 && delta.norm() > 1e-12 {
            return None;
        }
        return Some(left + right + delta / 15.0);
    }
    let l = simpson_rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, budget)?;
    let r = simpson_rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, budget)?;
    Some(l + r)
}

/// Least-squares slope and intercept of y against x.
pub fn line_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    assert_eq!(x.len(), y.len());
    let n = x.len() as f64;
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let intercept = (sy - slope * sx) / n;
    (slope, intercept)
}

/// Format a float with 17 significant digits (byte-reproducible output).
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cubic_interp_reproduces_cubics() {
        let xs: Vec<f64> = (0..50).map(|j| -2.0 + 0.1 * j as f64).collect();
        let f = |x: f64| Complex64::new(x * x * x - 2.0 * x, 0.5 * x * x);
        let ys: Vec<Complex64> = xs.iter().map(|&x| f(x)).collect();
        for &x in &[-1.97, -0.33, 0.0, 1.234, 2.89] {
            let v = cubic_interp(&xs, &ys, x).unwrap();
            assert!((v - f(x)).norm() < 1e-12, "x={x}");
        }
        assert!(cubic_interp(&xs, &ys, 5.0).is_none());
    }

    #[test]
    fn simpson_oscillatory() {
        // int_0^1 e^{i w x} dx = (e^{iw} - 1)/(iw)
        let w = 37.0;
        let f = |x: f64| Complex64::new(0.0, w * x).exp();
        let got = adaptive_simpson(&f, 0.0, 1.0, 1e-12).unwrap();
        let i = Complex64::new(0.0, 1.0);
        let want = ((i * w).exp() - 1.0) / (i * w);
        assert!((got - want).norm() < 1e-11);
    }

    #[test]
    fn line_fit_exact() {
        let x: Vec<f64> = (0..20).map(|j| j as f64).collect();
        let y: Vec<f64> = x.iter().map(|v| -0.75 * v + 3.0).collect();
        let (s, c) = line_fit(&x, &y);
        assert!((s + 0.75).abs() < 1e-12);
        assert!((c - 3.0).abs() < 1e-12);
    }
}
