//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use expdg::lawson::LawsonModel;
use expdg::models::{FourierVm, VaState, VlasovAmpere, VlasovMaxwell, VmState};
use faer::{c64, Mat};

/// Dense `exp(a)` by Taylor series with scaling and squaring.
pub fn taylor_expm_c(a: &Mat<c64>) -> Mat<c64> {
    let n = a.nrows();
    let norm = (0..n)
        .map(|j| (0..n).map(|i| a[(i, j)].norm()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut s = 0u32;
    while norm / 2f64.powi(s as i32) > 0.25 {
        s += 1;
    }
    let scale = 2f64.powi(-(s as i32));
    let b = Mat::from_fn(n, n, |i, j| a[(i, j)] * scale);
    let mut sum = Mat::<c64>::identity(n, n);
    let mut term = Mat::<c64>::identity(n, n);
    for m in 1..40 {
        term = &term * &b;
        term *= faer::Scale(c64::new(1.0 / m as f64, 0.0));
        sum += &term;
    }
    for _ in 0..s {
        sum = &sum * &sum;
    }
    sum
}

pub fn taylor_expm(a: &Mat<f64>) -> Mat<f64> {
    let ac = Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0));
    let e = taylor_expm_c(&ac);
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| e[(i, j)].re)
}

pub fn max_diff(a: &Mat<f64>, b: &Mat<f64>) -> f64 {
    let mut m = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            m = m.max((a[(i, j)] - b[(i, j)]).abs());
        }
    }
    m
}

/// Plasma dispersion function from the entire series
/// `Z(z) = i sqrt(pi) exp(-z^2) - 2 sum_n (-2 z^2)^n z / (2n+1)!!`,
/// valid in the whole complex plane (Landau continuation included). Cancellation
/// limits it to moderate `|z|`.
pub fn plasma_z(z: c64) -> c64 {
    let sqrt_pi = std::f64::consts::PI.sqrt();
    let z2 = z * z;
    let mut term = z;
    let mut sum = z;
    let mut biggest = term.norm();
    for n in 1..400 {
        term = term * (z2 * -2.0) / (2 * n + 1) as f64;
        sum += term;
        biggest = biggest.max(term.norm());
        if term.norm() < 1e-18 * biggest {
            break;
        }
    }
    c64::new(0.0, sqrt_pi) * (-z2).exp() - sum * 2.0
}

/// Complex root of the unit-temperature Langmuir dispersion relation
/// `k^2 + 1 + zeta Z(zeta) = 0`, `zeta = omega / (k sqrt 2)`, by secant iteration.
pub fn landau_root(k: f64, guess: c64) -> c64 {
    let d = |w: c64| {
        let zeta = w / (k * 2f64.sqrt());
        c64::new(k * k + 1.0, 0.0) + zeta * plasma_z(zeta)
    };
    let (mut w0, mut w1) = (guess, guess * 1.01);
    let (mut d0, mut d1) = (d(w0), d(w1));
    for _ in 0..100 {
        let w2 = w1 - d1 * (w1 - w0) / (d1 - d0);
        w0 = w1;
        d0 = d1;
        w1 = w2;
        d1 = d(w1);
        if (w1 - w0).norm() < 1e-14 {
            break;
        }
    }
    w1
}

/// Growth rate of the purely growing transverse mode for a distribution
/// Maxwellian in `v1` (spread `sigma`) with `v2` second moment `v2sq` and no net drift:
/// `-g^2 - k^2 - 1 + (v2sq / sigma^2)(1 + zeta Z(zeta)) = 0`, `zeta = i g / (k sigma sqrt 2)`.
pub fn transverse_growth(k: f64, sigma: f64, v2sq: f64) -> f64 {
    let a = v2sq / (sigma * sigma);
    let d = |g: f64| {
        let zeta = c64::new(0.0, g / (k * sigma * 2f64.sqrt()));
        -g * g - k * k - 1.0 + a * (c64::new(1.0, 0.0) + zeta * plasma_z(zeta)).re
    };
    // The series loses about |zeta|^2 / ln 10 digits; |zeta| <= 4 keeps ~9.
    let (mut lo, mut hi) = (1e-10, 4.0 * k * sigma * 2f64.sqrt());
    assert!(d(lo) > 0.0 && d(hi) < 0.0, "no growing root bracketed");
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if d(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

pub fn va_flat(u: &VaState) -> Vec<f64> {
    u.f.data.iter().chain(&u.e).copied().collect()
}

pub fn va_unflat(m: &VlasovAmpere, x: &[f64]) -> VaState {
    let mut u = m.zeros();
    let nf = u.f.data.len();
    u.f.data.copy_from_slice(&x[..nf]);
    u.e.copy_from_slice(&x[nf..]);
    u
}

pub fn vm_flat(u: &VmState) -> Vec<f64> {
    u.f.data
        .iter()
        .chain(&u.b)
        .chain(&u.e1)
        .chain(&u.e2)
        .copied()
        .collect()
}

pub fn vm_unflat(m: &VlasovMaxwell, x: &[f64]) -> VmState {
    let mut u = m.zeros();
    let nf = u.f.data.len();
    let n = u.b.len();
    u.f.data.copy_from_slice(&x[..nf]);
    u.b.copy_from_slice(&x[nf..nf + n]);
    u.e1.copy_from_slice(&x[nf + n..nf + 2 * n]);
    u.e2.copy_from_slice(&x[nf + 2 * n..]);
    u
}

/// Matrix of a linear map given by its action on unit vectors.
pub fn matrix_of(dim: usize, apply: impl Fn(&[f64]) -> Vec<f64>) -> Mat<f64> {
    let mut out = Mat::zeros(dim, dim);
    let mut e = vec![0.0; dim];
    for j in 0..dim {
        e[j] = 1.0;
        let y = apply(&e);
        for i in 0..dim {
            out[(i, j)] = y[i];
        }
        e[j] = 0.0;
    }
    out
}

/// Assembled linear operator of the Vlasov-Ampere system on `(f_1..f_Nv, E)`.
pub fn va_dense_l(m: &VlasovAmpere) -> Mat<f64> {
    let a = m.advection_matrix();
    let pi = m.projector();
    let n = a.nrows();
    let nv = m.grid().len();
    let dv = m.grid().dv();
    let mut l = Mat::zeros(n * (nv + 1), n * (nv + 1));
    for j in 0..nv {
        let v = m.grid().node(j);
        for c in 0..n {
            for r in 0..n {
                l[(j * n + r, j * n + c)] = v * a[(r, c)];
                let id = if r == c { 1.0 } else { 0.0 };
                l[(nv * n + r, j * n + c)] = -dv * v * (id - pi[(r, c)]);
            }
        }
    }
    l
}

/// Assembled linear operator of the Vlasov-Maxwell system on `(f, B, E1, E2)`.
pub fn vm_dense_l(m: &VlasovMaxwell) -> Mat<f64> {
    let a = m.advection_matrix();
    let pi = m.projector();
    let n = a.nrows();
    let (g1, g2) = m.grids();
    let (n1, n2) = (g1.len(), g2.len());
    let w = g1.dv() * g2.dv();
    let nf = n * n1 * n2;
    let (ib, ie1, ie2) = (nf, nf + n, nf + 2 * n);
    let mut l = Mat::zeros(nf + 3 * n, nf + 3 * n);
    for j1 in 0..n1 {
        for j2 in 0..n2 {
            let col = (j2 + n2 * j1) * n;
            let (v1, v2) = (g1.node(j1), g2.node(j2));
            for c in 0..n {
                for r in 0..n {
                    let id = if r == c { 1.0 } else { 0.0 };
                    l[(col + r, col + c)] = v1 * a[(r, c)];
                    l[(ie1 + r, col + c)] = -w * v1 * (id - pi[(r, c)]);
                    l[(ie2 + r, col + c)] = -w * v2 * (id - pi[(r, c)]);
                }
            }
        }
    }
    for c in 0..n {
        for r in 0..n {
            l[(ib + r, ie2 + c)] = a[(r, c)];
            l[(ie2 + r, ib + c)] = a[(r, c)];
        }
    }
    l
}

pub fn scaled(l: &Mat<f64>, s: f64) -> Mat<f64> {
    Mat::from_fn(l.nrows(), l.ncols(), |i, j| s * l[(i, j)])
}

/// Per-mode operator on `(f_c for every velocity, B, E1, E2)` with `d/dx -> i k`.
pub fn fourier_mode_l(m: &FourierVm, k: f64) -> Mat<c64> {
    let (g1, g2) = m.grids();
    let (n1, n2) = (g1.len(), g2.len());
    let nvel = n1 * n2;
    let w = g1.dv() * g2.dv();
    let (ib, ie1, ie2) = (nvel, nvel + 1, nvel + 2);
    let mut l = Mat::<c64>::zeros(nvel + 3, nvel + 3);
    let mik = c64::new(0.0, -k);
    for j1 in 0..n1 {
        for j2 in 0..n2 {
            let c = j2 + n2 * j1;
            l[(c, c)] = mik * g1.node(j1);
            l[(ie1, c)] = c64::new(-w * g1.node(j1), 0.0);
            l[(ie2, c)] = c64::new(-w * g2.node(j2), 0.0);
        }
    }
    l[(ib, ie2)] = mik;
    l[(ie2, ib)] = mik;
    l
}

/// Entrywise distance between `exp(frac dt L)` of a per-mode operator and the model's linear step.
pub fn fourier_mode_error(m: &FourierVm, frac: f64) -> f64 {
    let nx = m.modes();
    let (g1, g2) = m.grids();
    let nvel = g1.len() * g2.len();
    let mut worst = 0.0f64;
    for mode in 0..nx {
        let k = m.wavenumber(mode);
        if k == 0.0 {
            continue;
        }
        let l = fourier_mode_l(m, k);
        let ls = Mat::from_fn(l.nrows(), l.ncols(), |i, j| l[(i, j)] * (frac * m.dt()));
        let want = taylor_expm_c(&ls);
        for j in 0..nvel + 3 {
            let mut u = m.zeros();
            let one = c64::new(1.0, 0.0);
            match j {
                j if j < nvel => u.f[j * nx + mode] = one,
                j if j == nvel => u.b[mode] = one,
                j if j == nvel + 1 => u.e1[mode] = one,
                _ => u.e2[mode] = one,
            }
            let y = m.exp_l(frac, &u).unwrap();
            for i in 0..nvel + 3 {
                let got = match i {
                    i if i < nvel => y.f[i * nx + mode],
                    i if i == nvel => y.b[mode],
                    i if i == nvel + 1 => y.e1[mode],
                    _ => y.e2[mode],
                };
                worst = worst.max((got - want[(i, j)]).norm());
            }
        }
    }
    worst
}
