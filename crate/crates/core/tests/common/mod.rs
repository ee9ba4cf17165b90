//! Finite-difference eigenvalue oracle shared by the test targets.

use catwell::operators::DoubleWellParams;

/// Number of eigenvalues of the symmetric tridiagonal matrix below `x`.
fn sturm_count(diag: &[f64], off: f64, x: f64) -> usize {
    let mut count = 0;
    let mut q = 1.0;
    for (i, &d) in diag.iter().enumerate() {
        let b2 = if i == 0 { 0.0 } else { off * off };
        q = d - x - b2 / q;
        if q == 0.0 {
            q = 1e-300;
        }
        if q < 0.0 {
            count += 1;
        }
    }
    count
}

/// k-th eigenvalue by bisection on the Sturm count.
fn bisect(diag: &[f64], off: f64, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if sturm_count(diag, off, mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// Three-point finite differences on a uniform grid with Dirichlet walls.
fn fd_levels(dw: &DoubleWellParams, half_width: f64, n: usize, levels: usize) -> Vec<f64> {
    let h = 2.0 * half_width / (n + 1) as f64;
    let t = 1.0 / (2.0 * dw.mass * h * h);
    let diag: Vec<f64> = (1..=n).map(|i| 2.0 * t + dw.potential(-half_width + i as f64 * h)).collect();
    let lo = diag.iter().cloned().fold(f64::INFINITY, f64::min) - 4.0 * t;
    let hi = diag.iter().cloned().fold(f64::NEG_INFINITY, f64::max) + 4.0 * t;
    (0..levels).map(|k| bisect(&diag, -t, k, lo, hi)).collect()
}

/// Richardson-extrapolated levels from two grid spacings (error `O(h⁴)`).
pub fn fd_levels_richardson(dw: &DoubleWellParams, half_width: f64, levels: usize) -> Vec<f64> {
    let coarse = fd_levels(dw, half_width, 3999, levels);
    let fine = fd_levels(dw, half_width, 7999, levels);
    coarse.iter().zip(&fine).map(|(c, f)| (4.0 * f - c) / 3.0).collect()
}
