//! Dense complex matrix helpers on top of `faer`.

use faer::{Mat, MatRef};

pub use faer::c64;

pub type CMat = Mat<c64>;

pub const ZERO: c64 = c64 { re: 0.0, im: 0.0 };
pub const ONE: c64 = c64 { re: 1.0, im: 0.0 };
pub const I: c64 = c64 { re: 0.0, im: 1.0 };

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn from_real_diag(d: &[f64]) -> CMat {
    Mat::from_fn(d.len(), d.len(), |i, j| if i == j { c64::new(d[i], 0.0) } else { ZERO })
}

pub fn dagger(a: MatRef<'_, c64>) -> CMat {
    a.adjoint().to_owned()
}

pub fn transpose(a: MatRef<'_, c64>) -> CMat {
    a.transpose().to_owned()
}

pub fn conj(a: MatRef<'_, c64>) -> CMat {
    a.conjugate().to_owned()
}

pub fn scale(a: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * s)
}

/// Leading `n x n` block.
pub fn truncate(a: MatRef<'_, c64>, n: usize) -> CMat {
    a.submatrix(0, 0, n, n).to_owned()
}

/// Kronecker product `a ⊗ b`.
pub fn kron(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = Mat::zeros(ar * br, ac * bc);
    for j in 0..ac {
        for i in 0..ar {
            let s = a[(i, j)];
            if s == ZERO {
                continue;
            }
            for q in 0..bc {
                for p in 0..br {
                    out[(i * br + p, j * bc + q)] = s * b[(p, q)];
                }
            }
        }
    }
    out
}

pub fn commutator(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> CMat {
    a * b - b * a
}

pub fn max_abs(a: MatRef<'_, c64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].norm());
        }
    }
    m
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    m
}

/// `max |A - A†|`.
pub fn hermiticity_error(a: MatRef<'_, c64>) -> f64 {
    let n = a.nrows();
    let mut m = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            m = m.max((a[(i, j)] - a[(j, i)].conj()).norm());
        }
    }
    m
}

/// Operator 1-norm (maximum absolute column sum).
pub fn norm1(a: MatRef<'_, c64>) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

pub fn trace(a: MatRef<'_, c64>) -> c64 {
    (0..a.nrows().min(a.ncols())).map(|i| a[(i, i)]).sum()
}

/// `Tr(a b)` without forming the product.
pub fn trace_product(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> c64 {
    let mut s = ZERO;
    for i in 0..a.nrows() {
        for k in 0..a.ncols() {
            s += a[(i, k)] * b[(k, i)];
        }
    }
    s
}

pub fn is_finite(a: MatRef<'_, c64>) -> bool {
    (0..a.ncols()).all(|j| (0..a.nrows()).all(|i| a[(i, j)].re.is_finite() && a[(i, j)].im.is_finite()))
}

/// Column-stacking vectorization: `(i, j)` maps to `i + j * n`.
pub fn vectorize(rho: MatRef<'_, c64>) -> Vec<c64> {
    let n = rho.nrows();
    let mut v = Vec::with_capacity(n * rho.ncols());
    for j in 0..rho.ncols() {
        for i in 0..n {
            v.push(rho[(i, j)]);
        }
    }
    v
}

pub fn unvectorize(v: &[c64], n: usize) -> CMat {
    assert_eq!(v.len(), n * n, "vector length is not a square of {n}");
    Mat::from_fn(n, n, |i, j| v[i + j * n])
}

pub fn matvec(a: MatRef<'_, c64>, v: &[c64], out: &mut [c64]) {
    assert_eq!(a.ncols(), v.len());
    assert_eq!(a.nrows(), out.len());
    out.iter_mut().for_each(|o| *o = ZERO);
    for (j, &vj) in v.iter().enumerate() {
        if vj == ZERO {
            continue;
        }
        let col = a.col(j);
        for (i, o) in out.iter_mut().enumerate() {
            *o += col[i] * vj;
        }
    }
}

/// Integer power by repeated squaring.
pub fn matpow(a: MatRef<'_, c64>, mut k: usize) -> CMat {
    let mut result = identity(a.nrows());
    let mut base = a.to_owned();
    let mut first = true;
    while k > 0 {
        if k & 1 == 1 {
            result = if first { base.clone() } else { &result * &base };
            first = false;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> CMat {
        Mat::from_fn(rows.len(), rows[0].len(), |i, j| c64::new(rows[i][j], 0.0))
    }

    #[test]
    fn kron_of_small_blocks() {
        let a = m(&[&[1.0, 2.0], &[3.0, 4.0]]);
        let b = m(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let k = kron(a.as_ref(), b.as_ref());
        assert_eq!(k[(0, 1)], c64::new(1.0, 0.0));
        assert_eq!(k[(2, 3)], c64::new(4.0, 0.0));
        assert_eq!(k[(3, 0)], c64::new(3.0, 0.0));
        assert_eq!(k[(1, 2)], c64::new(2.0, 0.0));
    }

    #[test]
    fn vec_identity_for_products() {
        let a = Mat::from_fn(3, 3, |i, j| c64::new((i + 2 * j) as f64, (i as f64) - (j as f64)));
        let b = Mat::from_fn(3, 3, |i, j| c64::new((i * j) as f64 + 1.0, 0.5));
        let x = Mat::from_fn(3, 3, |i, j| c64::new(i as f64 - 1.0, (j * j) as f64));
        let lhs = vectorize((&a * &x * &b).as_ref());
        let op = kron(transpose(b.as_ref()).as_ref(), a.as_ref());
        let mut rhs = vec![ZERO; 9];
        matvec(op.as_ref(), &vectorize(x.as_ref()), &mut rhs);
        for (l, r) in lhs.iter().zip(&rhs) {
            assert!((l - r).norm() < 1e-12);
        }
    }

    #[test]
    fn norm1_is_column_sum() {
        let a = m(&[&[1.0, -7.0], &[-2.0, 3.0]]);
        assert_eq!(norm1(a.as_ref()), 10.0);
    }

    #[test]
    fn matpow_matches_repeated_product() {
        let a = Mat::from_fn(4, 4, |i, j| c64::new(0.1 * (i + j) as f64, 0.05 * i as f64));
        let mut r = identity(4);
        for _ in 0..7 {
            r = &r * &a;
        }
        assert!(max_abs_diff(r.as_ref(), matpow(a.as_ref(), 7).as_ref()) < 1e-12);
        assert!(max_abs_diff(identity(4).as_ref(), matpow(a.as_ref(), 0).as_ref()) == 0.0);
    }
}
