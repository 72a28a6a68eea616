//! Modal discontinuous Galerkin discretisation of periodic 1D advection.
//!
//! On cell `j` with centre `x_j` the basis is `((x - x_j)/dx)^m`, `m = 0..=k`,
//! and coefficient vectors are laid out cell-major, degree-minor.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Uniform periodic mesh together with the polynomial degree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DgSpace {
    n: usize,
    k: usize,
    x_lo: f64,
    x_hi: f64,
    dx: f64,
}

impl DgSpace {
    pub fn new(n: usize, k: usize, x_lo: f64, x_hi: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("need at least 2 cells, got {n}")));
        }
        if !(x_hi > x_lo) || !x_lo.is_finite() || !x_hi.is_finite() {
            return Err(Error::Config(format!("invalid domain [{x_lo}, {x_hi}]")));
        }
        Ok(Self {
            n,
            k,
            x_lo,
            x_hi,
            dx: (x_hi - x_lo) / n as f64,
        })
    }

    pub fn cells(&self) -> usize {
        self.n
    }
    pub fn degree(&self) -> usize {
        self.k
    }
    /// Number of basis functions per cell.
    pub fn nloc(&self) -> usize {
        self.k + 1
    }
    /// Total number of degrees of freedom, `(k+1) N`.
    pub fn ndof(&self) -> usize {
        (self.k + 1) * self.n
    }
    pub fn x_lo(&self) -> f64 {
        self.x_lo
    }
    pub fn x_hi(&self) -> f64 {
        self.x_hi
    }
    pub fn length(&self) -> f64 {
        self.x_hi - self.x_lo
    }
    pub fn dx(&self) -> f64 {
        self.dx
    }
    /// Centre of cell `j` (0-based).
    pub fn center(&self, j: usize) -> f64 {
        self.x_lo + (j as f64 + 0.5) * self.dx
    }

    /// Cell index and local coordinate `s in (-1/2, 1/2]` of `x`, after periodic wrap.
    /// Interface points belong to the cell on their left.
    pub fn locate(&self, x: f64) -> (usize, f64) {
        let len = self.length();
        let mut y = (x - self.x_lo).rem_euclid(len);
        if y == 0.0 {
            y = len;
        }
        let t = y / self.dx;
        let mut j = t.ceil() as usize;
        j = j.clamp(1, self.n);
        let s = t - (j as f64 - 0.5);
        (j - 1, s)
    }
}

/// Coefficients of a scalar field in a [`DgSpace`].
#[derive(Debug, Clone, PartialEq)]
pub struct DgField {
    pub space: DgSpace,
    pub coeffs: Vec<f64>,
}

impl DgField {
    pub fn new(space: DgSpace, coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.len() != space.ndof() {
            return Err(Error::Shape(format!(
                "field has {} coefficients, space needs {}",
                coeffs.len(),
                space.ndof()
            )));
        }
        Ok(Self { space, coeffs })
    }

    pub fn zeros(space: DgSpace) -> Self {
        Self {
            space,
            coeffs: vec![0.0; space.ndof()],
        }
    }

    /// Polynomial coefficients on cell `j`.
    pub fn cell(&self, j: usize) -> &[f64] {
        let m = self.space.nloc();
        &self.coeffs[j * m..(j + 1) * m]
    }
}

/// Numerical flux used at cell interfaces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FluxKind {
    Central,
    Upwind,
}

/// Reference-cell matrices: mass `m`, own-cell `d1`, right neighbour `d2`, left neighbour `d3`.
#[derive(Debug, Clone)]
pub struct LocalMatrices {
    pub m: Mat<f64>,
    pub d1: Mat<f64>,
    pub d2: Mat<f64>,
    pub d3: Mat<f64>,
}

/// `int_{-1/2}^{1/2} s^p ds`.
pub fn monomial_integral(p: usize) -> f64 {
    if p % 2 == 1 {
        0.0
    } else {
        0.5f64.powi(p as i32) / (p as f64 + 1.0)
    }
}

fn half_pow(p: usize, sign: f64) -> f64 {
    (0.5 * sign).powi(p as i32)
}

/// Reference mass matrix `M[l][m] = int s^(l+m) ds`.
pub fn mass_matrix(k: usize) -> Mat<f64> {
    Mat::from_fn(k + 1, k + 1, |l, m| monomial_integral(l + m))
}

/// Local matrices of the central flux.
pub fn build_local_matrices(k: usize) -> LocalMatrices {
    let n = k + 1;
    // Rows index test functions, columns index trial functions.
    let d1 = Mat::from_fn(n, n, |l, m| {
        let stiff = if l == 0 {
            0.0
        } else {
            l as f64 * monomial_integral(l + m - 1)
        };
        stiff - 0.5 * half_pow(m, 1.0) * half_pow(l, 1.0)
            + 0.5 * half_pow(m, -1.0) * half_pow(l, -1.0)
    });
    let d2 = Mat::from_fn(n, n, |l, m| -0.5 * half_pow(m, -1.0) * half_pow(l, 1.0));
    let d3 = Mat::from_fn(n, n, |l, m| 0.5 * half_pow(m, 1.0) * half_pow(l, -1.0));
    LocalMatrices {
        m: mass_matrix(k),
        d1,
        d2,
        d3,
    }
}

/// Local matrices of the upwind flux for unit positive speed (trace taken from the left).
pub fn build_upwind_local_matrices(k: usize) -> LocalMatrices {
    let n = k + 1;
    let d1 = Mat::from_fn(n, n, |l, m| {
        let stiff = if l == 0 {
            0.0
        } else {
            l as f64 * monomial_integral(l + m - 1)
        };
        stiff - half_pow(m, 1.0) * half_pow(l, 1.0)
    });
    let d2 = Mat::zeros(n, n);
    let d3 = Mat::from_fn(n, n, |l, m| half_pow(m, 1.0) * half_pow(l, -1.0));
    LocalMatrices {
        m: mass_matrix(k),
        d1,
        d2,
        d3,
    }
}

/// Global matrix `A` with `du/dt = A u` approximating `u_t + u_x = 0` on the periodic mesh.
pub fn assemble_advection_matrix(space: &DgSpace, flux: FluxKind) -> Mat<f64> {
    let k = space.degree();
    let loc = match flux {
        FluxKind::Central => build_local_matrices(k),
        FluxKind::Upwind => build_upwind_local_matrices(k),
    };
    let minv = loc.m.partial_piv_lu().inverse();
    let scale = 1.0 / space.dx();
    let mut own = &minv * &loc.d1;
    let right = &minv * &loc.d2;
    let left = &minv * &loc.d3;
    // Constants are transported exactly: make the first column sum vanish without rounding noise.
    for l in 0..space.nloc() {
        own[(l, 0)] = -(right[(l, 0)] + left[(l, 0)]);
    }
    let nl = space.nloc();
    let n = space.cells();
    let mut a = Mat::<f64>::zeros(space.ndof(), space.ndof());
    for j in 0..n {
        let jr = (j + 1) % n;
        let jl = (j + n - 1) % n;
        for l in 0..nl {
            for m in 0..nl {
                a[(j * nl + l, j * nl + m)] += scale * own[(l, m)];
                a[(j * nl + l, jr * nl + m)] += scale * right[(l, m)];
                a[(j * nl + l, jl * nl + m)] += scale * left[(l, m)];
            }
        }
    }
    a
}

/// Gauss-Legendre nodes and weights on `[-1, 1]`.
pub fn gauss_legendre(npts: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; npts];
    let mut w = vec![0.0; npts];
    let nf = npts as f64;
    for i in 0..npts.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for l in 2..=npts {
                let lf = l as f64;
                let p2 = ((2.0 * lf - 1.0) * z * p1 - (lf - 1.0) * p0) / lf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (z * p1 - p0) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-16 {
                break;
            }
        }
        x[i] = -z;
        x[npts - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[npts - 1 - i] = wi;
    }
    (x, w)
}

/// L2 projection coefficients of `u0` onto the piecewise polynomials of `space`.
pub fn project_coeffs(space: &DgSpace, u0: impl Fn(f64) -> f64) -> Vec<f64> {
    let nl = space.nloc();
    let (xq, wq) = gauss_legendre(space.degree() + 3);
    let minv = mass_matrix(space.degree()).partial_piv_lu().inverse();
    let mut out = vec![0.0; space.ndof()];
    let mut rhs = vec![0.0; nl];
    for j in 0..space.cells() {
        rhs.iter_mut().for_each(|r| *r = 0.0);
        for (&xi, &wi) in xq.iter().zip(&wq) {
            let s = 0.5 * xi;
            let f = u0(space.center(j) + s * space.dx()) * 0.5 * wi;
            let mut p = 1.0;
            for r in rhs.iter_mut() {
                *r += f * p;
                p *= s;
            }
        }
        for l in 0..nl {
            out[j * nl + l] = (0..nl).map(|m| minv[(l, m)] * rhs[m]).sum();
        }
    }
    out
}

pub fn project_initial(space: &DgSpace, u0: impl Fn(f64) -> f64) -> DgField {
    DgField {
        space: *space,
        coeffs: project_coeffs(space, u0),
    }
}

/// Evaluate a cell polynomial at local coordinate `s`.
pub fn eval_local(coeffs: &[f64], s: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
}

/// Point value of a coefficient vector at `x` (left limit at interfaces).
pub fn reconstruct_coeffs(space: &DgSpace, coeffs: &[f64], x: f64) -> f64 {
    let (j, s) = space.locate(x);
    let nl = space.nloc();
    eval_local(&coeffs[j * nl..(j + 1) * nl], s)
}

pub fn reconstruct(field: &DgField, x: f64) -> f64 {
    reconstruct_coeffs(&field.space, &field.coeffs, x)
}

/// `sum_j dx u_j^T M v_j`, the L2 inner product of two piecewise polynomials.
pub fn inner_product(space: &DgSpace, u: &[f64], v: &[f64]) -> f64 {
    let nl = space.nloc();
    let mut s = 0.0;
    for j in 0..space.cells() {
        for l in 0..nl {
            let ul = u[j * nl + l];
            for m in 0..nl {
                s += ul * monomial_integral(l + m) * v[j * nl + m];
            }
        }
    }
    s * space.dx()
}

pub fn l2_norm_coeffs(space: &DgSpace, u: &[f64]) -> f64 {
    inner_product(space, u, u).max(0.0).sqrt()
}

pub fn l2_norm(field: &DgField) -> f64 {
    l2_norm_coeffs(&field.space, &field.coeffs)
}

/// `int u_h dx` over the whole domain.
pub fn integral(space: &DgSpace, u: &[f64]) -> f64 {
    let nl = space.nloc();
    let mut s = 0.0;
    for j in 0..space.cells() {
        for m in 0..nl {
            s += monomial_integral(m) * u[j * nl + m];
        }
    }
    s * space.dx()
}

/// Global mass matrix `dx * blockdiag(M)`.
pub fn global_mass_matrix(space: &DgSpace) -> Mat<f64> {
    let nl = space.nloc();
    let m = mass_matrix(space.degree());
    let mut g = Mat::<f64>::zeros(space.ndof(), space.ndof());
    for j in 0..space.cells() {
        for l in 0..nl {
            for c in 0..nl {
                g[(j * nl + l, j * nl + c)] = space.dx() * m[(l, c)];
            }
        }
    }
    g
}
