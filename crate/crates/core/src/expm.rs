//! Matrix exponential by scaling and squaring with diagonal Padé approximants
//! of degree 7, 9 or 13 (Higham 2005).

use faer::linalg::solvers::Solve;
use faer::{Mat, MatRef};

use crate::error::{Error, Result};
use crate::linalg::{c64, is_finite, norm1, CMat};

const THETA_7: f64 = 9.504178996162932e-1;
const THETA_9: f64 = 2.097847961257068;
const THETA_13: f64 = 5.371920351148152;

const B7: [f64; 8] = [17297280.0, 8648640.0, 1995840.0, 277200.0, 25200.0, 1512.0, 56.0, 1.0];
const B9: [f64; 10] = [
    17643225600.0,
    8821612800.0,
    2075673600.0,
    302702400.0,
    30270240.0,
    2162160.0,
    110880.0,
    3960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

/// `c0 I + Σ cₖ Mₖ`.
fn combine(n: usize, c0: f64, terms: &[(f64, &CMat)]) -> CMat {
    Mat::from_fn(n, n, |i, j| {
        let mut s = if i == j { c64::new(c0, 0.0) } else { c64::new(0.0, 0.0) };
        for (c, m) in terms {
            s += m[(i, j)] * *c;
        }
        s
    })
}

fn pade_odd(a: &CMat, a2: &CMat, b: &[f64]) -> (CMat, CMat) {
    let n = a.nrows();
    let a4 = a2 * a2;
    let a6 = &a4 * a2;
    let (u_inner, v) = if b.len() == 8 {
        (
            combine(n, b[1], &[(b[3], a2), (b[5], &a4), (b[7], &a6)]),
            combine(n, b[0], &[(b[2], a2), (b[4], &a4), (b[6], &a6)]),
        )
    } else {
        let a8 = &a6 * a2;
        (
            combine(n, b[1], &[(b[3], a2), (b[5], &a4), (b[7], &a6), (b[9], &a8)]),
            combine(n, b[0], &[(b[2], a2), (b[4], &a4), (b[6], &a6), (b[8], &a8)]),
        )
    };
    (a * &u_inner, v)
}

fn pade_13(a: &CMat, a2: &CMat) -> (CMat, CMat) {
    let n = a.nrows();
    let b = &B13;
    let a4 = a2 * a2;
    let a6 = &a4 * a2;
    let u_hi = combine(n, 0.0, &[(b[13], &a6), (b[11], &a4), (b[9], a2)]);
    let u_lo = combine(n, b[1], &[(b[7], &a6), (b[5], &a4), (b[3], a2)]);
    let u = a * (&a6 * &u_hi + &u_lo);
    let v_hi = combine(n, 0.0, &[(b[12], &a6), (b[10], &a4), (b[8], a2)]);
    let v_lo = combine(n, b[0], &[(b[6], &a6), (b[4], &a4), (b[2], a2)]);
    (u, &a6 * &v_hi + &v_lo)
}

/// `exp(A)` for a square complex matrix.
pub fn expm(a: MatRef<'_, c64>) -> Result<CMat> {
    let n = a.nrows();
    if n != a.ncols() {
        return Err(Error::DimensionMismatch(format!("expm of a {}x{} matrix", n, a.ncols())));
    }
    if n == 0 {
        return Ok(Mat::zeros(0, 0));
    }
    if !is_finite(a) {
        return Err(Error::Numerical("expm input has non-finite entries".into()));
    }
    let norm = norm1(a);
    let mut a = a.to_owned();
    let mut squarings = 0u32;
    let a2 = &a * &a;
    let (u, v) = if norm <= THETA_7 {
        pade_odd(&a, &a2, &B7)
    } else if norm <= THETA_9 {
        pade_odd(&a, &a2, &B9)
    } else {
        if norm > THETA_13 {
            squarings = (norm / THETA_13).log2().ceil().max(0.0) as u32;
        }
        let a2 = if squarings > 0 {
            let f = c64::new(0.5f64.powi(squarings as i32), 0.0);
            a = Mat::from_fn(n, n, |i, j| a[(i, j)] * f);
            &a * &a
        } else {
            a2
        };
        pade_13(&a, &a2)
    };
    let p = &v + &u;
    let q = &v - &u;
    let mut r = q.partial_piv_lu().solve(&p);
    for _ in 0..squarings {
        r = &r * &r;
    }
    if !is_finite(r.as_ref()) {
        return Err(Error::Numerical("expm produced non-finite entries".into()));
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs_diff};

    #[test]
    fn zero_gives_identity() {
        let z = Mat::<c64>::zeros(5, 5);
        assert!(max_abs_diff(expm(z.as_ref()).unwrap().as_ref(), identity(5).as_ref()) < 1e-15);
    }

    #[test]
    fn diagonal_all_branches() {
        for &s in &[0.3, 1.5, 4.0, 40.0, 300.0] {
            let d = [-s, 0.5 * s, -0.1 * s];
            let a = Mat::from_fn(3, 3, |i, j| if i == j { c64::new(d[i], s * 0.2) } else { c64::new(0.0, 0.0) });
            let e = expm(a.as_ref()).unwrap();
            for i in 0..3 {
                let exact = c64::new(d[i], s * 0.2).exp();
                assert!((e[(i, i)] - exact).norm() <= 1e-13 * exact.norm().max(1.0), "s={s}");
            }
        }
    }

    #[test]
    fn rotation_generator() {
        let t = 2.7;
        let a = Mat::from_fn(2, 2, |i, j| match (i, j) {
            (0, 1) => c64::new(-t, 0.0),
            (1, 0) => c64::new(t, 0.0),
            _ => c64::new(0.0, 0.0),
        });
        let e = expm(a.as_ref()).unwrap();
        assert!((e[(0, 0)].re - t.cos()).abs() < 1e-14);
        assert!((e[(1, 0)].re - t.sin()).abs() < 1e-14);
    }

    #[test]
    fn nilpotent_is_exact_polynomial() {
        let a = Mat::from_fn(3, 3, |i, j| if j == i + 1 { c64::new(3.0, 0.0) } else { c64::new(0.0, 0.0) });
        let e = expm(a.as_ref()).unwrap();
        assert!((e[(0, 2)].re - 4.5).abs() < 1e-13);
        assert!((e[(0, 1)].re - 3.0).abs() < 1e-13);
    }

    #[test]
    fn rejects_non_finite() {
        let mut a = Mat::<c64>::zeros(2, 2);
        a[(0, 0)] = c64::new(f64::NAN, 0.0);
        assert!(expm(a.as_ref()).is_err());
    }
}
