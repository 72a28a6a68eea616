//! Small dense linear-algebra helpers shared by the solver modules.

use faer::linalg::solvers::Solve;
use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

/// Maximum absolute column sum.
pub fn norm_1<T: Copy>(a: MatRef<'_, T>, abs: impl Fn(T) -> f64) -> f64 {
    (0..a.ncols())
        .map(|j| (0..a.nrows()).map(|i| abs(a[(i, j)])).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Largest absolute entry.
pub fn max_abs(a: MatRef<'_, f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max(a[(i, j)].abs());
        }
    }
    m
}

/// Largest absolute entry of `a - b`.
pub fn max_abs_diff(a: MatRef<'_, f64>, b: MatRef<'_, f64>) -> f64 {
    assert_eq!((a.nrows(), a.ncols()), (b.nrows(), b.ncols()));
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Frobenius norm.
pub fn frobenius(a: MatRef<'_, f64>) -> f64 {
    let mut s = 0.0;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            s += a[(i, j)] * a[(i, j)];
        }
    }
    s.sqrt()
}

pub fn matvec(a: MatRef<'_, f64>, x: &[f64]) -> Vec<f64> {
    assert_eq!(a.ncols(), x.len());
    let mut y = vec![0.0; a.nrows()];
    for (j, &xj) in x.iter().enumerate() {
        if xj == 0.0 {
            continue;
        }
        for (i, yi) in y.iter_mut().enumerate() {
            *yi += a[(i, j)] * xj;
        }
    }
    y
}

pub fn col_to_mat(x: &[f64]) -> Mat<f64> {
    Mat::from_fn(x.len(), 1, |i, _| x[i])
}

const PADE13: [f64; 14] = [
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
const THETA13: f64 = 5.371920351148152;

macro_rules! expm_impl {
    ($name:ident, $t:ty, $abs:expr, $from:expr) => {
        /// Dense matrix exponential by degree-13 Pade approximation with scaling and squaring.
        pub fn $name(a: MatRef<'_, $t>) -> Result<Mat<$t>> {
            let n = a.nrows();
            if a.ncols() != n {
                return Err(Error::Shape(format!(
                    "expm of a {}x{} matrix",
                    n,
                    a.ncols()
                )));
            }
            let from: fn(f64) -> $t = $from;
            let nrm = norm_1(a, $abs);
            if !nrm.is_finite() {
                return Err(Error::Numerical("expm input is not finite".into()));
            }
            let s = if nrm > THETA13 {
                (nrm / THETA13).log2().ceil() as i32
            } else {
                0
            };
            let scale = from(0.5f64.powi(s));
            let a = Mat::<$t>::from_fn(n, n, |i, j| a[(i, j)] * scale);
            let id = Mat::<$t>::identity(n, n);
            let a2 = &a * &a;
            let a4 = &a2 * &a2;
            let a6 = &a2 * &a4;
            let b = |i: usize| from(PADE13[i]);
            let lin = |c6: $t, c4: $t, c2: $t, c0: $t| {
                Mat::<$t>::from_fn(n, n, |i, j| {
                    c6 * a6[(i, j)] + c4 * a4[(i, j)] + c2 * a2[(i, j)] + c0 * id[(i, j)]
                })
            };
            let zero = from(0.0);
            let u_inner = &a6 * &lin(b(13), b(11), b(9), zero);
            let u_tail = lin(b(7), b(5), b(3), b(1));
            let u = &a * &(&u_inner + &u_tail);
            let v_inner = &a6 * &lin(b(12), b(10), b(8), zero);
            let v = &v_inner + &lin(b(6), b(4), b(2), b(0));
            let p = &v + &u;
            let q = &v - &u;
            let mut x = q.partial_piv_lu().solve(&p);
            for _ in 0..s {
                x = &x * &x;
            }
            Ok(x)
        }
    };
}

expm_impl!(expm, f64, |x: f64| x.abs(), |x| x);
expm_impl!(expm_complex, c64, |x: c64| x.norm(), |x| c64::new(x, 0.0));
