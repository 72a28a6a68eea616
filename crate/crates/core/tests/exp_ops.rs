use expdg::dg_core::*;
use expdg::exp_ops::*;
use expdg::linalg::{expm, max_abs, max_abs_diff};
use faer::{c64, Mat};
use proptest::prelude::*;

fn central(n: usize, k: usize) -> (DgSpace, Mat<f64>) {
    let s = DgSpace::new(n, k, 0.0, 2.0 * std::f64::consts::PI).unwrap();
    let a = assemble_advection_matrix(&s, FluxKind::Central);
    (s, a)
}

#[test]
fn degree_zero_spectrum_matches_circulant_formula() {
    let s = DgSpace::new(4, 0, 0.0, 4.0).unwrap();
    let a = assemble_advection_matrix(&s, FluxKind::Central);
    let mut ev = a.eigenvalues().unwrap();
    ev.sort_by(|x, y| x.im.partial_cmp(&y.im).unwrap());
    let want = [-1.0, 0.0, 0.0, 1.0];
    for (e, w) in ev.iter().zip(want) {
        assert!((e.im - w).abs() < 1e-12 && e.re.abs() < 1e-12, "{e}");
    }
    let up = assemble_advection_matrix(&s, FluxKind::Upwind);
    for e in up.eigenvalues().unwrap() {
        assert!(e.re <= 1e-12);
    }
}

#[test]
fn kernel_dimension_follows_parity() {
    for k in 0..=5 {
        for n in [3usize, 4, 5, 8] {
            let (_, a) = central(n, k);
            let want = if (k + 1) * n % 2 == 0 { 2 } else { 1 };
            assert_eq!(kernel_dimension(a.as_ref()).unwrap(), want, "k={k} n={n}");
            let b = kernel_basis(a.as_ref(), k, n).unwrap();
            assert_eq!(b.vectors.len(), want);
        }
    }
}

#[test]
fn kernel_basis_patterns() {
    let (_, a) = central(4, 0);
    let b = kernel_basis(a.as_ref(), 0, 4).unwrap();
    for x in &b.vectors[0] {
        assert!((x - 0.5).abs() < 1e-15);
    }
    // u2 = [0,1,0,1] orthogonalised against the constant vector
    let u2 = &b.vectors[1];
    assert!((u2[0] + u2[1]).abs() < 1e-15 && (u2[0] - u2[2]).abs() < 1e-15);
    let dot: f64 = b.vectors[0].iter().zip(u2).map(|(p, q)| p * q).sum();
    assert!(dot.abs() < 1e-12);

    let (_, a2) = central(6, 2);
    let b2 = kernel_basis(a2.as_ref(), 2, 6).unwrap();
    let v = &b2.vectors[1];
    let pat = [-1.0 / 6.0, 0.0, 1.0, 0.0, 0.0, -1.0];
    // the k=2 pattern has zero constant part, so it survives orthogonalisation unchanged up to scale
    let raw: Vec<f64> = (0..18).map(|i| pat[i % 6]).collect();
    let c: f64 = raw.iter().zip(&b2.vectors[0]).map(|(p, q)| p * q).sum();
    let mut w: Vec<f64> = raw
        .iter()
        .zip(&b2.vectors[0])
        .map(|(p, q)| p - c * q)
        .collect();
    let nw = w.iter().map(|x| x * x).sum::<f64>().sqrt();
    w.iter_mut().for_each(|x| *x /= nw);
    for (x, y) in v.iter().zip(&w) {
        assert!((x - y).abs() < 1e-13);
    }
}

#[test]
fn unsupported_kernel_degree_is_rejected() {
    let (_, a) = central(4, 6);
    assert!(matches!(
        kernel_basis(a.as_ref(), 6, 4),
        Err(expdg::Error::Unsupported(_))
    ));
    let (_, a) = central(5, 6);
    assert_eq!(kernel_basis(a.as_ref(), 6, 5).unwrap().vectors.len(), 1);
}

#[test]
fn projector_properties() {
    for (n, k) in [
        (4usize, 0usize),
        (5, 0),
        (8, 1),
        (6, 2),
        (5, 2),
        (4, 3),
        (6, 4),
        (4, 5),
    ] {
        let (s, a) = central(n, k);
        let b = kernel_basis(a.as_ref(), k, n).unwrap();
        let p = build_projector(&b, &s).unwrap();
        let pp = &p.pi * &p.pi;
        assert!(max_abs_diff(pp.as_ref(), p.pi.as_ref()) < 1e-11);
        for u in &b.vectors {
            let pu = p.apply(u);
            for (x, y) in pu.iter().zip(u) {
                assert!((x - y).abs() < 1e-12);
            }
        }
        let (ap, pa) = commutation_residuals(a.as_ref(), &p);
        assert!(
            ap <= 1e-10 * max_abs(a.as_ref()) && pa <= 1e-10 * max_abs(a.as_ref()),
            "n={n} k={k}"
        );
        // self-adjoint in the mass inner product
        let gp = &global_mass_matrix(&s) * &p.pi;
        assert!(max_abs_diff(gp.as_ref(), gp.transpose().to_owned().as_ref()) < 1e-12);
        // A(1 - Pi) = (A + Pi)(1 - Pi)
        let id = Mat::<f64>::identity(s.ndof(), s.ndof());
        let c = &id - &p.pi;
        let lhs = &a * &c;
        let rhs = &(&a + &p.pi) * &c;
        assert!(max_abs_diff(lhs.as_ref(), rhs.as_ref()) < 1e-10 * max_abs(a.as_ref()));
    }
}

#[test]
fn euclidean_and_mass_projectors_agree_for_low_degree() {
    let (s, a) = central(4, 0);
    let b = kernel_basis(a.as_ref(), 0, 4).unwrap();
    let p = build_projector(&b, &s).unwrap();
    let mut e = Mat::<f64>::zeros(4, 4);
    for u in &b.vectors {
        for i in 0..4 {
            for j in 0..4 {
                e[(i, j)] += u[i] * u[j];
            }
        }
    }
    assert!(max_abs_diff(e.as_ref(), p.pi.as_ref()) < 1e-14);
}

#[test]
fn regularized_inverse_is_an_inverse() {
    let (s, a) = central(8, 2);
    let b = kernel_basis(a.as_ref(), 2, 8).unwrap();
    let p = build_projector(&b, &s).unwrap();
    let inv = regularized_inverse(a.as_ref(), &p).unwrap();
    let prod = &(&a + &p.pi) * &inv;
    assert!(max_abs_diff(prod.as_ref(), Mat::<f64>::identity(24, 24).as_ref()) < 1e-10);
}

#[test]
fn eigen_factorisations() {
    let (s, a) = central(4, 0);
    let f = eigen_factorize_dg(a.as_ref(), &s).unwrap();
    let mut im: Vec<f64> = f.lambda.iter().map(|l| l.im * s.dx()).collect();
    im.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for (x, w) in im.iter().zip([-1.0, 0.0, 0.0, 1.0]) {
        assert!((x - w).abs() < 1e-12);
    }
    let (s5, a5) = central(5, 2);
    for fact in [
        eigen_factorize(a5.as_ref()).unwrap(),
        eigen_factorize_dg(a5.as_ref(), &s5).unwrap(),
    ] {
        assert_eq!(fact.lambda.len(), 15);
        let top = fact.lambda.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for l in &fact.lambda {
            assert!(l.re.abs() <= 1e-10 * top);
        }
    }
    let sym = Mat::from_fn(3, 3, |i, j| {
        if i == j {
            2.0
        } else if i.abs_diff(j) == 1 {
            -1.0
        } else {
            0.0
        }
    });
    let f = eigen_factorize(sym.as_ref()).unwrap();
    let mut ev: Vec<f64> = f.lambda.iter().map(|l| l.re).collect();
    ev.sort_by(|x, y| x.partial_cmp(y).unwrap());
    let r2 = 2f64.sqrt();
    for (x, w) in ev.iter().zip([2.0 - r2, 2.0, 2.0 + r2]) {
        assert!((x - w).abs() < 1e-12);
    }
}

#[test]
fn exponential_matches_pade_oracle() {
    let (s, a) = central(8, 1);
    let f = eigen_factorize_dg(a.as_ref(), &s).unwrap();
    let dt = 0.37;
    let e = f.exp_matrix(dt).unwrap();
    let scaled = Mat::from_fn(16, 16, |i, j| dt * a[(i, j)]);
    let oracle = expm(scaled.as_ref()).unwrap();
    assert!(max_abs_diff(e.as_ref(), oracle.as_ref()) <= 1e-10 * max_abs(oracle.as_ref()));
    let x: Vec<f64> = (0..16).map(|i| (i as f64 * 0.7).sin()).collect();
    let y = exp_apply(&f, dt, &x).unwrap();
    let yo = expdg::linalg::matvec(oracle.as_ref(), &x);
    for (p, q) in y.iter().zip(&yo) {
        assert!((p - q).abs() < 1e-10);
    }
    assert_eq!(exp_apply(&f, 0.0, &x).unwrap().len(), 16);
    for (p, q) in exp_apply(&f, 0.0, &x).unwrap().iter().zip(&x) {
        assert!((p - q).abs() < 1e-13);
    }
}

#[test]
fn exponential_is_bounded_by_condition_number() {
    let (s, a) = central(8, 3);
    let f = eigen_factorize_dg(a.as_ref(), &s).unwrap();
    for i in 0..20 {
        let t = i as f64 * 5.0 * s.dx();
        let e = f.exp_matrix(t).unwrap();
        let n2 = e.singular_values().unwrap()[0];
        assert!(n2 <= f.cond * (1.0 + 1e-10));
    }
}

fn cache_fixture() -> (DgSpace, Mat<f64>, EigenFactorization, Projector) {
    let (s, a) = central(6, 2);
    let f = eigen_factorize_dg(a.as_ref(), &s).unwrap();
    let b = kernel_basis(a.as_ref(), 2, 6).unwrap();
    let p = build_projector(&b, &s).unwrap();
    (s, a, f, p)
}

#[test]
fn exp_cache_contract() {
    let (_, a, f, p) = cache_fixture();
    let vel = [-1.5, 0.0, 0.8];
    let cache = build_exp_cache(a.as_ref(), &f, &p, &vel, 0.2, &[0.5, 1.0, -0.5], true).unwrap();
    let id = Mat::<f64>::identity(18, 18);
    assert!(max_abs_diff(cache.exp(1, 1.0).unwrap().as_ref(), id.as_ref()) == 0.0);
    let half = cache.exp(2, 0.5).unwrap();
    let full = cache.exp(2, 1.0).unwrap();
    assert!(max_abs_diff((half * half).as_ref(), full.as_ref()) < 1e-12);
    let back = cache.exp(0, -0.5).unwrap() * cache.exp(0, 0.5).unwrap();
    assert!(max_abs_diff(back.as_ref(), id.as_ref()) < 1e-12);
    assert!(cache.exp(0, 0.25).is_err());
    let b = kernel_basis(a.as_ref(), 2, 6).unwrap();
    for fr in [0.5, 1.0, -0.5] {
        for j in 0..3 {
            for u in &b.vectors {
                let eu = expdg::linalg::matvec(cache.exp(j, fr).unwrap().as_ref(), u);
                for (x, y) in eu.iter().zip(u) {
                    assert!((x - y).abs() < 1e-10);
                }
            }
        }
    }
    let inv = cache.regularized_inverse();
    let prod = &(&a + &p.pi) * inv;
    assert!(max_abs_diff(prod.as_ref(), id.as_ref()) < 1e-10);
    let mx = cache.maxwell(cache.fraction_index(1.0).unwrap()).unwrap();
    let ep = f.exp_matrix(0.2).unwrap();
    let em = f.exp_matrix(-0.2).unwrap();
    let cosh = Mat::from_fn(18, 18, |i, j| 0.5 * (ep[(i, j)] + em[(i, j)]));
    let sinh = Mat::from_fn(18, 18, |i, j| 0.5 * (ep[(i, j)] - em[(i, j)]));
    assert!(max_abs_diff(mx.cosh.as_ref(), cosh.as_ref()) < 1e-12);
    assert!(max_abs_diff(mx.sinh.as_ref(), sinh.as_ref()) < 1e-12);
}

/// Adaptive-free high-order composite Gauss-Legendre quadrature on `[0, t]`.
fn quad(f: impl Fn(f64) -> c64, t: f64) -> c64 {
    let (x, w) = gauss_legendre(20);
    let pieces = 200;
    let h = t / pieces as f64;
    let mut s = c64::new(0.0, 0.0);
    for p in 0..pieces {
        for (xi, wi) in x.iter().zip(&w) {
            let u = (p as f64 + 0.5 + 0.5 * xi) * h;
            s += f(u) * (0.5 * wi * h);
        }
    }
    s
}

#[test]
fn alpha_beta_match_defining_integrals() {
    for &(mu, v, t) in &[
        (1.3, 0.3, 0.5),
        (-2.0, -0.7, 0.9),
        (0.4, 0.95, 2.0),
        (5.0, 0.0, 0.3),
    ] {
        let lam = c64::new(0.0, mu);
        let (a, b) = alpha_beta_scalar(lam * t, v);
        let ia = quad(|s| -lam * ((lam * (t - s)).sinh() * (lam * v * s).exp()), t);
        let ib = quad(|s| -lam * ((lam * (t - s)).cosh() * (lam * v * s).exp()), t);
        assert!((a - ia).norm() < 1e-10, "alpha {a} vs {ia}");
        assert!((b - ib).norm() < 1e-10, "beta {b} vs {ib}");
    }
}

#[test]
fn alpha_beta_zero_velocity_closed_form() {
    let (s, a, f, _) = cache_fixture();
    let dt = 0.3;
    let (al, be) = phi_alpha_beta(&f, 0.0, dt).unwrap();
    let ep = f.exp_matrix(dt).unwrap();
    let em = f.exp_matrix(-dt).unwrap();
    let n = s.ndof();
    let id = Mat::<f64>::identity(n, n);
    let wa = Mat::from_fn(n, n, |i, j| id[(i, j)] - 0.5 * (ep[(i, j)] + em[(i, j)]));
    let wb = Mat::from_fn(n, n, |i, j| -0.5 * (ep[(i, j)] - em[(i, j)]));
    assert!(max_abs_diff(al.as_ref(), wa.as_ref()) < 1e-12);
    assert!(max_abs_diff(be.as_ref(), wb.as_ref()) < 1e-12);
    // short windows: alpha = O(dt^2), beta = -dt A + O(dt^2)
    let tiny = 1e-6;
    let (az, bz) = phi_alpha_beta(&f, 0.4, tiny).unwrap();
    assert!(max_abs(az.as_ref()) < 1e-8);
    let lin = Mat::from_fn(n, n, |i, j| bz[(i, j)] + tiny * a[(i, j)]);
    assert!(max_abs(lin.as_ref()) < 1e-8);
}

#[test]
fn alpha_beta_guard_is_continuous() {
    for &z in &[c64::new(0.0, 0.7), c64::new(0.0, -3.0), c64::new(0.0, 12.0)] {
        for e in [0.999e-6, 1e-6, 1.001e-6] {
            let d = alpha_beta_direct(z, 1.0 - e);
            let t = alpha_beta_taylor(z, 1.0 - e);
            assert!(
                (d.0 - t.0).norm() < 1e-8 && (d.1 - t.1).norm() < 1e-8,
                "z={z} e={e}"
            );
            // mirrored branch near v = -1
            let dm = alpha_beta_direct(z, -1.0 + e);
            let tm = alpha_beta_scalar(z, -1.0 + 0.5 * e);
            assert!(tm.0.is_finite() && tm.1.is_finite());
            let sym = alpha_beta_taylor(-z, 1.0 - e);
            assert!((dm.0 - sym.0).norm() < 1e-8 && (dm.1 + sym.1).norm() < 1e-8);
        }
        let exact = alpha_beta_scalar(z, 1.0);
        assert!(exact.0.is_finite() && exact.1.is_finite());
    }
}

#[test]
fn kronecker_vec_trick() {
    let s = DgSpace::new(3, 0, 0.0, 1.0).unwrap();
    let ax = assemble_advection_matrix(&s, FluxKind::Upwind);
    let ay = assemble_advection_matrix(&s, FluxKind::Central);
    let (tx, ty) = (0.3, -0.45);
    let f = Mat::from_fn(3, 3, |i, j| (1 + i + 3 * j) as f64 * 0.1);
    let out = kron_exp_apply(ax.as_ref(), ay.as_ref(), tx, ty, f.as_ref()).unwrap();
    // dense oracle: vec(F) column major, operator I (x) Ay + Ax (x) I
    let mut big = Mat::<f64>::zeros(9, 9);
    for a in 0..3 {
        for b in 0..3 {
            for c in 0..3 {
                big[(a * 3 + b, a * 3 + c)] += ty * ay[(b, c)];
                big[(a * 3 + b, c * 3 + b)] += tx * ax[(a, c)];
            }
        }
    }
    let e = expm(big.as_ref()).unwrap();
    let vecf: Vec<f64> = (0..9).map(|i| f[(i % 3, i / 3)]).collect();
    let y = expdg::linalg::matvec(e.as_ref(), &vecf);
    for i in 0..9 {
        assert!((y[i] - out[(i % 3, i / 3)]).abs() < 1e-10);
    }
    let same = kron_exp_apply(ax.as_ref(), ay.as_ref(), 0.0, 0.0, f.as_ref()).unwrap();
    assert!(max_abs_diff(same.as_ref(), f.as_ref()) < 1e-15);
    let zero = Mat::<f64>::zeros(3, 3);
    let right = kron_exp_apply(ax.as_ref(), zero.as_ref(), tx, 1.0, f.as_ref()).unwrap();
    let want = &f * expm(Mat::from_fn(3, 3, |i, j| tx * ax[(j, i)]).as_ref()).unwrap();
    assert!(max_abs_diff(right.as_ref(), want.as_ref()) < 1e-13);
    assert!(kron_exp_apply(
        ax.as_ref(),
        ay.as_ref(),
        0.1,
        0.1,
        Mat::<f64>::zeros(2, 3).as_ref()
    )
    .is_err());
}

#[test]
fn pade_exponential_of_rotation() {
    let t = 2.5;
    let r = Mat::from_fn(2, 2, |i, j| {
        if i == j {
            0.0
        } else if i == 0 {
            -t
        } else {
            t
        }
    });
    let e = expm(r.as_ref()).unwrap();
    assert!((e[(0, 0)] - t.cos()).abs() < 1e-14 && (e[(1, 0)] - t.sin()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn central_spectrum_is_imaginary(k in 0usize..6, n in 2usize..20) {
        let (_, a) = central(n, k);
        let ev = a.eigenvalues().unwrap();
        let top = ev.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for l in ev { prop_assert!(l.re.abs() <= 1e-10 * top); }
    }

    #[test]
    fn upwind_spectrum_is_dissipative(k in 0usize..6, n in 2usize..20) {
        let s = DgSpace::new(n, k, 0.0, 1.0).unwrap();
        let a = assemble_advection_matrix(&s, FluxKind::Upwind);
        let ev = a.eigenvalues().unwrap();
        let top = ev.iter().map(|l| l.norm()).fold(0.0, f64::max);
        for l in ev { prop_assert!(l.re <= 1e-12 * top, "{} (max |lambda| {})", l, top); }
    }

    #[test]
    fn exp_semigroup(t1 in -1.0f64..1.0, t2 in -1.0f64..1.0) {
        let (s, a) = central(5, 1);
        let f = eigen_factorize_dg(a.as_ref(), &s).unwrap();
        let p = &f.exp_matrix(t1).unwrap() * &f.exp_matrix(t2).unwrap();
        prop_assert!(max_abs_diff(p.as_ref(), f.exp_matrix(t1 + t2).unwrap().as_ref()) < 1e-10);
    }
}
