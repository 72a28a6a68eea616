use approx::assert_abs_diff_eq;
use expdg::dg_core::*;
use proptest::prelude::*;
use std::f64::consts::PI;

fn mat_eq(m: &faer::Mat<f64>, want: &[&[f64]]) {
    for (i, row) in want.iter().enumerate() {
        for (j, &w) in row.iter().enumerate() {
            assert_abs_diff_eq!(m[(i, j)], w, epsilon = 1e-15);
        }
    }
}

#[test]
fn local_matrices_degree_zero() {
    let l = build_local_matrices(0);
    mat_eq(&l.m, &[&[1.0]]);
    mat_eq(&l.d1, &[&[0.0]]);
    mat_eq(&l.d2, &[&[-0.5]]);
    mat_eq(&l.d3, &[&[0.5]]);
}

#[test]
fn local_matrices_degree_one() {
    let l = build_local_matrices(1);
    mat_eq(&l.m, &[&[1.0, 0.0], &[0.0, 1.0 / 12.0]]);
    mat_eq(&l.d1, &[&[0.0, -0.5], &[0.5, 0.0]]);
    mat_eq(&l.d2, &[&[-0.5, 0.25], &[-0.25, 0.125]]);
    mat_eq(&l.d3, &[&[0.5, 0.25], &[-0.25, -0.125]]);
}

/// Independent evaluation of the closed forms with 1-based indices.
fn closed_form(k: usize) -> [Vec<Vec<f64>>; 4] {
    let n = k + 1;
    let mut out = [
        vec![vec![0.0; n]; n],
        vec![vec![0.0; n]; n],
        vec![vec![0.0; n]; n],
        vec![vec![0.0; n]; n],
    ];
    for l in 1..=n {
        for m in 1..=n {
            let p = (m + l - 1) as i32;
            out[0][l - 1][m - 1] = 0.5f64.powi(p) / p as f64 * (1.0 - (-1.0f64).powi(p));
            let q = (m + l - 2) as i32;
            out[1][l - 1][m - 1] = if q == 0 {
                0.0
            } else {
                0.5f64.powi(q) * ((l as f64 - 1.0) / q as f64 - 0.5) * (1.0 - (-1.0f64).powi(q))
            };
            out[2][l - 1][m - 1] = (-1.0f64).powi(m as i32) * 0.5f64.powi(p);
            out[3][l - 1][m - 1] = (-1.0f64).powi(l as i32 - 1) * 0.5f64.powi(p);
        }
    }
    out
}

#[test]
fn local_matrices_match_closed_forms() {
    for k in 0..=6 {
        let l = build_local_matrices(k);
        let cf = closed_form(k);
        for (mat, want) in [&l.m, &l.d1, &l.d2, &l.d3].into_iter().zip(cf.iter()) {
            for i in 0..=k {
                for j in 0..=k {
                    assert_abs_diff_eq!(mat[(i, j)], want[i][j], epsilon = 1e-14);
                }
            }
        }
        assert_eq!(l.d1[(0, 0)], 0.0);
    }
}

#[test]
fn central_degree_zero_is_centered_difference() {
    let s = DgSpace::new(4, 0, 0.0, 4.0).unwrap();
    let a = assemble_advection_matrix(&s, FluxKind::Central);
    let u = [1.0, 2.0, 4.0, 8.0];
    for j in 0..4 {
        let au: f64 = (0..4).map(|c| a[(j, c)] * u[c]).sum();
        let want = (u[(j + 3) % 4] - u[(j + 1) % 4]) / 2.0;
        assert_abs_diff_eq!(au, want, epsilon = 1e-15);
    }
}

#[test]
fn upwind_degree_zero_is_backward_difference() {
    let s = DgSpace::new(4, 0, 0.0, 2.0).unwrap();
    let a = assemble_advection_matrix(&s, FluxKind::Upwind);
    let u = [1.0, -2.0, 4.0, 3.0];
    for j in 0..4 {
        let au: f64 = (0..4).map(|c| a[(j, c)] * u[c]).sum();
        assert_abs_diff_eq!(au, (u[(j + 3) % 4] - u[j]) / 0.5, epsilon = 1e-14);
    }
}

#[test]
fn constants_are_in_the_kernel() {
    for k in 0..=5 {
        for flux in [FluxKind::Central, FluxKind::Upwind] {
            let s = DgSpace::new(7, k, 0.0, 3.0).unwrap();
            let a = assemble_advection_matrix(&s, flux);
            let c: Vec<f64> = (0..s.ndof())
                .map(|i| if i % (k + 1) == 0 { 2.5 } else { 0.0 })
                .collect();
            let anorm = expdg::linalg::max_abs(a.as_ref());
            for i in 0..s.ndof() {
                let r: f64 = (0..s.ndof()).map(|j| a[(i, j)] * c[j]).sum();
                assert!(r.abs() <= 1e-15 * anorm, "row {i}: {r:e}");
            }
        }
    }
}

#[test]
fn matrix_scales_inversely_with_cell_width() {
    let s1 = DgSpace::new(6, 2, 0.0, 1.0).unwrap();
    let s2 = DgSpace::new(6, 2, 0.0, 2.0).unwrap();
    let a1 = assemble_advection_matrix(&s1, FluxKind::Central);
    let a2 = assemble_advection_matrix(&s2, FluxKind::Central);
    for i in 0..s1.ndof() {
        for j in 0..s1.ndof() {
            assert_abs_diff_eq!(a1[(i, j)], 2.0 * a2[(i, j)], epsilon = 1e-13);
        }
    }
}

#[test]
fn projection_of_constant_and_linear_data() {
    let s = DgSpace::new(5, 3, -1.0, 2.0).unwrap();
    let c = project_coeffs(&s, |_| 0.75);
    for j in 0..5 {
        assert_abs_diff_eq!(c[j * 4], 0.75, epsilon = 1e-14);
        for m in 1..4 {
            assert_abs_diff_eq!(c[j * 4 + m], 0.0, epsilon = 1e-14);
        }
    }
    for j in 0..5 {
        let xc = s.center(j);
        let f = project_coeffs(&s, |x| {
            if (x - xc).abs() <= 0.5 * s.dx() {
                x - xc
            } else {
                0.0
            }
        });
        assert_abs_diff_eq!(f[j * 4 + 1], s.dx(), epsilon = 1e-13);
        assert_abs_diff_eq!(f[j * 4], 0.0, epsilon = 1e-14);
    }
}

#[test]
fn projection_error_is_third_order_for_p2() {
    let err = |n: usize| {
        let s = DgSpace::new(n, 2, 0.0, 2.0 * PI).unwrap();
        let c = project_coeffs(&s, f64::sin);
        // fine composite quadrature of the squared error
        let (xq, wq) = gauss_legendre(12);
        let mut e2 = 0.0;
        for j in 0..n {
            for (x, w) in xq.iter().zip(&wq) {
                let sl = 0.5 * x;
                let xx = s.center(j) + sl * s.dx();
                let d = eval_local(&c[j * 3..j * 3 + 3], sl) - xx.sin();
                e2 += d * d * 0.5 * w * s.dx();
            }
        }
        e2.sqrt()
    };
    let e1 = err(20);
    let e2 = err(40);
    assert!(e1 < 2.0 * (2.0 * PI / 20.0f64).powi(3));
    let order = (e1 / e2).log2();
    assert!((order - 3.0).abs() < 0.1, "order {order}");
}

#[test]
fn reconstruct_conventions() {
    let s = DgSpace::new(20, 2, 0.0, 2.0 * PI).unwrap();
    let f = project_initial(&s, f64::sin);
    for j in 0..20 {
        let x = s.center(j);
        assert_abs_diff_eq!(reconstruct(&f, x), x.sin(), epsilon = 1e-3);
    }
    assert_eq!(reconstruct(&f, s.x_hi()), reconstruct(&f, s.x_lo()));
    let c = project_initial(&s, |_| 3.0);
    assert_abs_diff_eq!(reconstruct(&c, 1.234), 3.0, epsilon = 1e-14);
    // left limit at an interior interface
    let x = s.x_lo() + 3.0 * s.dx();
    let left = eval_local(f.cell(2), 0.5);
    assert_eq!(reconstruct(&f, x), left);
}

#[test]
fn l2_norm_examples() {
    let s = DgSpace::new(16, 1, 0.0, 2.0 * PI).unwrap();
    assert_abs_diff_eq!(
        l2_norm(&project_initial(&s, |_| 1.0)),
        (2.0 * PI).sqrt(),
        epsilon = 1e-13
    );
    assert_eq!(l2_norm(&DgField::zeros(s)), 0.0);
    let s3 = DgSpace::new(32, 3, 0.0, 2.0 * PI).unwrap();
    assert_abs_diff_eq!(
        l2_norm(&project_initial(&s3, f64::sin)),
        PI.sqrt(),
        epsilon = 1e-6
    );
}

#[test]
fn gauss_legendre_integrates_polynomials() {
    for n in 1..10 {
        let (x, w) = gauss_legendre(n);
        for p in 0..2 * n {
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(p as i32)).sum();
            let exact = if p % 2 == 1 {
                0.0
            } else {
                2.0 / (p as f64 + 1.0)
            };
            assert_abs_diff_eq!(q, exact, epsilon = 1e-13);
        }
    }
}

#[test]
fn invalid_spaces_are_rejected() {
    assert!(DgSpace::new(1, 0, 0.0, 1.0).is_err());
    assert!(DgSpace::new(4, 0, 1.0, 1.0).is_err());
    assert!(DgField::new(DgSpace::new(4, 1, 0.0, 1.0).unwrap(), vec![0.0; 3]).is_err());
}

proptest! {
    #[test]
    fn mass_matrix_is_positive_definite(k in 0usize..7, x in proptest::collection::vec(-1.0f64..1.0, 7)) {
        let m = mass_matrix(k);
        let q: f64 = (0..=k).flat_map(|i| (0..=k).map(move |j| (i, j))).map(|(i, j)| x[i] * m[(i, j)] * x[j]).sum();
        let nrm: f64 = x[..=k].iter().map(|v| v * v).sum();
        prop_assert!(q >= 0.0);
        if nrm > 1e-6 { prop_assert!(q > 0.0); }
        for i in 0..=k { for j in 0..=k {
            prop_assert_eq!(m[(i, j)], m[(j, i)]);
            if (i + j) % 2 == 1 { prop_assert_eq!(m[(i, j)], 0.0); }
        }}
    }

    #[test]
    fn mass_weighted_central_matrix_is_antisymmetric(k in 0usize..5, n in 2usize..9) {
        let s = DgSpace::new(n, k, 0.0, 1.0).unwrap();
        let a = assemble_advection_matrix(&s, FluxKind::Central);
        let ga = &global_mass_matrix(&s) * &a;
        for i in 0..s.ndof() { for j in 0..s.ndof() {
            prop_assert!((ga[(i, j)] + ga[(j, i)]).abs() < 1e-12);
        }}
    }

    #[test]
    fn locate_round_trips(x in -20.0f64..20.0) {
        let s = DgSpace::new(9, 1, -1.0, 2.0).unwrap();
        let (j, sl) = s.locate(x);
        prop_assert!(j < 9);
        prop_assert!(sl > -0.5 - 1e-9 && sl <= 0.5 + 1e-9);
        let back = s.center(j) + sl * s.dx();
        let d = (back - x).rem_euclid(3.0);
        prop_assert!(d < 1e-9 || (3.0 - d) < 1e-9);
    }
}
