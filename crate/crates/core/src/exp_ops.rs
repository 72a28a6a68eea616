//! Structured linear algebra for the DG advection matrix: kernel, projector,
//! regularised inverse, spectral exponentials and the Kronecker-sum exponential.

use faer::linalg::solvers::{DenseSolveCore, Solve};
use faer::{c64, Mat, MatRef, Side};

use crate::dg_core::{global_mass_matrix, mass_matrix, DgSpace};
use crate::error::{Error, Result};
use crate::linalg::{expm, frobenius, max_abs, max_abs_diff};

/// Relative threshold used to decide that a singular value is zero.
pub const KERNEL_TOL: f64 = 1e-10;

/// Orthonormal basis of `Ker(A)` for the central-flux matrix.
#[derive(Debug, Clone)]
pub struct KernelBasis {
    pub vectors: Vec<Vec<f64>>,
}

fn second_kernel_pattern(k: usize) -> Option<Vec<f64>> {
    let p: Vec<f64> = match k {
        0 => vec![0.0, 1.0],
        1 => vec![0.0, 1.0],
        2 => vec![-1.0 / 6.0, 0.0, 1.0, 0.0, 0.0, -1.0],
        3 => vec![0.0, -3.0 / 20.0, 0.0, 1.0],
        4 => vec![
            -3.0 / 280.0,
            0.0,
            3.0 / 14.0,
            0.0,
            -1.0,
            0.0,
            0.0,
            -3.0 / 14.0,
            0.0,
            1.0,
        ],
        5 => vec![0.0, 5.0 / 336.0, 0.0, -5.0 / 18.0, 0.0, 1.0],
        _ => return None,
    };
    Some(p)
}

fn normalize(v: &mut [f64]) {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter_mut().for_each(|x| *x /= n);
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Number of singular values of `a` below `KERNEL_TOL * ||a||_2`.
pub fn kernel_dimension(a: MatRef<'_, f64>) -> Result<usize> {
    let sv = a
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
    let top = sv.first().copied().unwrap_or(0.0);
    Ok(sv.iter().filter(|&&s| s <= KERNEL_TOL * top).count())
}

/// Kernel basis from the closed-form patterns; the residual `||A u||` is verified.
pub fn kernel_basis(a: MatRef<'_, f64>, k: usize, n: usize) -> Result<KernelBasis> {
    let ndof = (k + 1) * n;
    if a.nrows() != ndof || a.ncols() != ndof {
        return Err(Error::Shape(format!(
            "matrix is {}x{}, expected {ndof}",
            a.nrows(),
            a.ncols()
        )));
    }
    let mut u1 = vec![0.0; ndof];
    for j in 0..n {
        u1[j * (k + 1)] = 1.0;
    }
    normalize(&mut u1);
    let mut vectors = vec![u1];
    if ndof % 2 == 0 {
        let pat = second_kernel_pattern(k).ok_or_else(|| {
            Error::Unsupported(format!(
                "no second kernel vector is tabulated for degree {k} with an even number of unknowns"
            ))
        })?;
        let mut u2: Vec<f64> = (0..ndof).map(|i| pat[i % pat.len()]).collect();
        let c = dot(&u2, &vectors[0]);
        for (x, y) in u2.iter_mut().zip(&vectors[0]) {
            *x -= c * y;
        }
        normalize(&mut u2);
        vectors.push(u2);
    }
    let anorm = frobenius(a);
    for v in &vectors {
        let av = crate::linalg::matvec(a, v);
        let r = av.iter().map(|x| x * x).sum::<f64>().sqrt();
        if r > KERNEL_TOL * anorm {
            return Err(Error::Numerical(format!(
                "kernel vector residual {r:e} too large"
            )));
        }
    }
    Ok(KernelBasis { vectors })
}

/// Projector onto `Ker(A)` that is orthogonal in the DG mass inner product,
/// so that it annihilates `A` from both sides.
#[derive(Debug, Clone)]
pub struct Projector {
    pub pi: Mat<f64>,
    basis: Vec<Vec<f64>>,
    duals: Vec<Vec<f64>>,
}

impl Projector {
    /// `Pi x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; x.len()];
        for (u, w) in self.basis.iter().zip(&self.duals) {
            let c = dot(w, x);
            for (o, ui) in out.iter_mut().zip(u) {
                *o += c * ui;
            }
        }
        out
    }

    /// `(1 - Pi) x`.
    pub fn apply_complement(&self, x: &[f64]) -> Vec<f64> {
        let p = self.apply(x);
        x.iter().zip(p).map(|(a, b)| a - b).collect()
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }
}

/// `Pi = U (U^T G U)^{-1} U^T G` with `G` the global DG mass matrix.
pub fn build_projector(basis: &KernelBasis, space: &DgSpace) -> Result<Projector> {
    let g = global_mass_matrix(space);
    let r = basis.vectors.len();
    let n = space.ndof();
    let gu: Vec<Vec<f64>> = basis
        .vectors
        .iter()
        .map(|u| crate::linalg::matvec(g.as_ref(), u))
        .collect();
    let gram = Mat::<f64>::from_fn(r, r, |i, j| dot(&basis.vectors[i], &gu[j]));
    let ginv = gram.partial_piv_lu().inverse();
    let duals: Vec<Vec<f64>> = (0..r)
        .map(|i| {
            (0..n)
                .map(|p| (0..r).map(|j| ginv[(i, j)] * gu[j][p]).sum())
                .collect()
        })
        .collect();
    let pi = Mat::from_fn(n, n, |p, q| {
        (0..r).map(|i| basis.vectors[i][p] * duals[i][q]).sum()
    });
    Ok(Projector {
        pi,
        basis: basis.vectors.clone(),
        duals,
    })
}

/// Check that `Pi` commutes with `A` (both products vanish). Returns `(||A Pi||, ||Pi A||)`.
pub fn commutation_residuals(a: MatRef<'_, f64>, proj: &Projector) -> (f64, f64) {
    let ap = a * proj.pi.as_ref();
    let pa = proj.pi.as_ref() * a;
    (max_abs(ap.as_ref()), max_abs(pa.as_ref()))
}

/// `(A + Pi)^{-1}` by LU with one step of iterative refinement.
pub fn regularized_inverse(a: MatRef<'_, f64>, proj: &Projector) -> Result<Mat<f64>> {
    let n = a.nrows();
    let (ap, pa) = commutation_residuals(a, proj);
    let scale = max_abs(a).max(1.0);
    if ap > 1e-10 * scale || pa > 1e-10 * scale {
        return Err(Error::Numerical(format!(
            "projector does not commute with A: |A Pi| = {ap:e}, |Pi A| = {pa:e}"
        )));
    }
    let s = Mat::from_fn(n, n, |i, j| a[(i, j)] + proj.pi[(i, j)]);
    let lu = s.partial_piv_lu();
    let mut x = lu.inverse();
    let id = Mat::<f64>::identity(n, n);
    let r = &id - &s * &x;
    x = &x + &lu.solve(&r);
    let res = max_abs_diff((&s * &x).as_ref(), id.as_ref());
    if !res.is_finite() || res > 1e-10 {
        return Err(Error::Numerical(format!(
            "A + Pi is singular or ill conditioned (residual {res:e})"
        )));
    }
    Ok(x)
}

/// `A = P diag(lambda) P^{-1}`.
#[derive(Debug, Clone)]
pub struct EigenFactorization {
    pub p: Mat<c64>,
    pub lambda: Vec<c64>,
    pub pinv: Mat<c64>,
    /// 2-norm condition number of `P`.
    pub cond: f64,
}

const COND_LIMIT: f64 = 1e12;

fn to_complex(a: MatRef<'_, f64>) -> Mat<c64> {
    Mat::from_fn(a.nrows(), a.ncols(), |i, j| c64::new(a[(i, j)], 0.0))
}

fn condition_number(p: MatRef<'_, c64>) -> Result<f64> {
    let sv = p
        .singular_values()
        .map_err(|e| Error::Numerical(format!("singular value decomposition failed: {e:?}")))?;
    let lo = *sv.last().unwrap_or(&0.0);
    Ok(if lo > 0.0 { sv[0] / lo } else { f64::INFINITY })
}

impl EigenFactorization {
    fn checked(a: MatRef<'_, f64>, p: Mat<c64>, lambda: Vec<c64>, pinv: Mat<c64>) -> Result<Self> {
        let cond = condition_number(p.as_ref())?;
        if !(cond <= COND_LIMIT) {
            return Err(Error::Numerical(format!(
                "eigenvector matrix is ill conditioned (cond {cond:e})"
            )));
        }
        let fact = Self {
            p,
            lambda,
            pinv,
            cond,
        };
        let rec = fact.matrix_function(|z| z)?;
        let res = max_abs_diff(rec.as_ref(), a);
        let anorm = max_abs(a).max(f64::MIN_POSITIVE);
        if !(res <= 1e-9 * anorm) {
            return Err(Error::Numerical(format!(
                "eigen-decomposition residual {res:e} too large"
            )));
        }
        Ok(fact)
    }

    pub fn dim(&self) -> usize {
        self.lambda.len()
    }

    /// Complex matrix `P diag(g(lambda)) P^{-1}`.
    pub fn matrix_function_complex(&self, g: impl Fn(c64) -> c64) -> Mat<c64> {
        let n = self.dim();
        let gl: Vec<c64> = self.lambda.iter().map(|&l| g(l)).collect();
        let pd = Mat::from_fn(n, n, |i, j| self.p[(i, j)] * gl[j]);
        &pd * &self.pinv
    }

    /// Real matrix `P diag(g(lambda)) P^{-1}`; `g` must respect complex conjugation.
    pub fn matrix_function(&self, g: impl Fn(c64) -> c64) -> Result<Mat<f64>> {
        let c = self.matrix_function_complex(g);
        let n = self.dim();
        let re = Mat::from_fn(n, n, |i, j| c[(i, j)].re);
        let mut imax = 0.0f64;
        for j in 0..n {
            for i in 0..n {
                imax = imax.max(c[(i, j)].im.abs());
            }
        }
        let rnorm = max_abs(re.as_ref()).max(1.0);
        if !(imax <= 1e-10 * rnorm) {
            return Err(Error::Numerical(format!(
                "imaginary residual {imax:e} in spectral evaluation"
            )));
        }
        Ok(re)
    }

    /// `exp(scale A)` as a real dense matrix.
    pub fn exp_matrix(&self, scale: f64) -> Result<Mat<f64>> {
        self.matrix_function(|l| (l * scale).exp())
    }
}

/// General-purpose eigen-decomposition of a diagonalisable real matrix.
pub fn eigen_factorize(a: MatRef<'_, f64>) -> Result<EigenFactorization> {
    let evd = a
        .eigen()
        .map_err(|e| Error::Numerical(format!("eigen-decomposition failed: {e:?}")))?;
    let p = evd.U().to_owned();
    let lambda: Vec<c64> = evd.S().column_vector().iter().copied().collect();
    let pinv = p.partial_piv_lu().inverse();
    EigenFactorization::checked(a, p, lambda, pinv)
}

/// Eigen-decomposition of a central-flux DG matrix.
///
/// `G A` is antisymmetric for the global mass matrix `G = L L^T`, so
/// `S = L^T A L^{-T}` is real skew-symmetric and `i S` is Hermitian. The
/// Hermitian solver gives exactly imaginary eigenvalues and a unitary basis.
pub fn eigen_factorize_dg(a: MatRef<'_, f64>, space: &DgSpace) -> Result<EigenFactorization> {
    let n = space.ndof();
    if a.nrows() != n || a.ncols() != n {
        return Err(Error::Shape("matrix does not match the DG space".into()));
    }
    let g = global_mass_matrix(space);
    let ga = &g * a;
    let skew = max_abs_diff(ga.as_ref(), (-ga.transpose().to_owned()).as_ref());
    if skew > 1e-12 * max_abs(ga.as_ref()).max(1.0) {
        return eigen_factorize(a);
    }
    let nl = space.nloc();
    let chol = mass_matrix(space.degree())
        .llt(Side::Lower)
        .map_err(|e| Error::Numerical(format!("mass matrix Cholesky failed: {e:?}")))?;
    let lblk = chol.L().to_owned();
    let sq = space.dx().sqrt();
    let mut l = Mat::<f64>::zeros(n, n);
    for c in 0..space.cells() {
        for i in 0..nl {
            for j in 0..nl {
                l[(c * nl + i, c * nl + j)] = sq * lblk[(i, j)];
            }
        }
    }
    let linv = l.partial_piv_lu().inverse();
    let s = l.transpose() * a * linv.transpose();
    let h = Mat::from_fn(n, n, |i, j| c64::new(0.0, 0.5 * (s[(i, j)] - s[(j, i)])));
    let evd = h
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::Numerical(format!("Hermitian eigen-decomposition failed: {e:?}")))?;
    let q = evd.U().to_owned();
    // i S = Q diag(mu) Q^H  =>  S = Q diag(-i mu) Q^H.
    let lambda: Vec<c64> = evd
        .S()
        .column_vector()
        .iter()
        .map(|m| c64::new(0.0, -m.re))
        .collect();
    let linv_t = to_complex(linv.transpose());
    let p = &linv_t * &q;
    let pinv = q.adjoint().to_owned() * to_complex(l.transpose());
    EigenFactorization::checked(a, p, lambda, pinv)
}

/// `Re(P diag(exp(scale lambda)) P^{-1} x)`.
pub fn exp_apply(fact: &EigenFactorization, scale: f64, x: &[f64]) -> Result<Vec<f64>> {
    let n = fact.dim();
    if x.len() != n {
        return Err(Error::Shape(format!(
            "vector of length {} for operator of size {n}",
            x.len()
        )));
    }
    let y: Vec<c64> = (0..n)
        .map(|i| {
            (0..n).map(|j| fact.pinv[(i, j)] * x[j]).sum::<c64>() * (fact.lambda[i] * scale).exp()
        })
        .collect();
    let z: Vec<c64> = (0..n)
        .map(|i| (0..n).map(|j| fact.p[(i, j)] * y[j]).sum())
        .collect();
    let rnorm = z.iter().map(|c| c.re * c.re).sum::<f64>().sqrt();
    let inorm = z.iter().map(|c| c.im * c.im).sum::<f64>().sqrt();
    if inorm > 1e-10 * rnorm.max(f64::MIN_POSITIVE) && inorm > 1e-300 {
        return Err(Error::Numerical(format!(
            "imaginary residual {inorm:e} in exponential action"
        )));
    }
    Ok(z.into_iter().map(|c| c.re).collect())
}

/// Scalar kernels of the Maxwell source integrals for `z = lambda tau` and velocity `v`.
///
/// `alpha = [-(1+v) e^z - (1-v) e^-z + 2 e^{vz}] / (2 (1 - v^2))`,
/// `beta  = [-(1+v) e^z + (1-v) e^-z + 2 v e^{vz}] / (2 (1 - v^2))`.
/// Close to `v = 1` a Taylor expansion in `1 - v` removes the singularity;
/// `v = -1` is handled by the symmetry `(z, v) -> (-z, -v)`.
pub fn alpha_beta_scalar(z: c64, v: f64) -> (c64, c64) {
    if (1.0 + v).abs() < ALPHA_BETA_GUARD {
        let (a, b) = alpha_beta_scalar(-z, -v);
        return (a, -b);
    }
    if (1.0 - v).abs() < ALPHA_BETA_GUARD {
        alpha_beta_taylor(z, v)
    } else {
        alpha_beta_direct(z, v)
    }
}

/// Distance from `v = +-1` below which the Taylor branch is used.
pub const ALPHA_BETA_GUARD: f64 = 1e-6;

/// Direct evaluation of the closed forms (singular at `v = +-1`).
pub fn alpha_beta_direct(z: c64, v: f64) -> (c64, c64) {
    let ez = z.exp();
    let emz = (-z).exp();
    let evz = (z * v).exp();
    let den = 2.0 * (1.0 - v * v);
    let a = (-(1.0 + v) * ez - (1.0 - v) * emz + 2.0 * evz) / den;
    let b = (-(1.0 + v) * ez + (1.0 - v) * emz + 2.0 * v * evz) / den;
    (a, b)
}

/// Expansion around `v = 1` with `e = 1 - v` and `(e^{-e z} - 1)/e` truncated after four terms.
pub fn alpha_beta_taylor(z: c64, v: f64) -> (c64, c64) {
    let ez = z.exp();
    let emz = (-z).exp();
    let e = 1.0 - v;
    let g1 = -z + e * z * z / 2.0 - e * e * z * z * z / 6.0 + e * e * e * z * z * z * z / 24.0;
    let ee = (-z * e).exp();
    let den = 2.0 * (2.0 - e);
    let a = (ez * (1.0 + 2.0 * g1) - emz) / den;
    let b = (ez * (1.0 + 2.0 * g1 - 2.0 * ee) + emz) / den;
    (a, b)
}

/// `(alpha(A tau, v1), beta(A tau, v1))` as real matrices.
pub fn phi_alpha_beta(
    fact: &EigenFactorization,
    v1: f64,
    tau: f64,
) -> Result<(Mat<f64>, Mat<f64>)> {
    let a = fact.matrix_function(|l| alpha_beta_scalar(l * tau, v1).0)?;
    let b = fact.matrix_function(|l| alpha_beta_scalar(l * tau, v1).1)?;
    Ok((a, b))
}

fn same_fraction(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * (1.0 + a.abs())
}

/// Per-fraction data for the Maxwell block.
#[derive(Debug, Clone)]
pub struct MaxwellBlocks {
    pub cosh: Mat<f64>,
    pub sinh: Mat<f64>,
}

/// Immutable table of exponentials `exp(v_j A tau dt)` for every velocity and stage fraction.
#[derive(Debug, Clone)]
pub struct ExpCache {
    dt: f64,
    fractions: Vec<f64>,
    velocities: Vec<f64>,
    exps: Vec<Vec<Mat<f64>>>,
    maxwell: Vec<MaxwellBlocks>,
    ainv: Mat<f64>,
}

impl ExpCache {
    pub fn dt(&self) -> f64 {
        self.dt
    }
    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }
    pub fn velocities(&self) -> &[f64] {
        &self.velocities
    }

    pub fn fraction_index(&self, frac: f64) -> Result<usize> {
        self.fractions
            .iter()
            .position(|&f| same_fraction(f, frac))
            .ok_or_else(|| {
                Error::Config(format!(
                    "stage fraction {frac} is not in the exponential cache"
                ))
            })
    }

    /// `exp(v_j A frac dt)`.
    pub fn exp(&self, j: usize, frac: f64) -> Result<&Mat<f64>> {
        let f = self.fraction_index(frac)?;
        Ok(&self.exps[f][j])
    }

    pub fn exp_at(&self, fidx: usize, j: usize) -> &Mat<f64> {
        &self.exps[fidx][j]
    }

    pub fn maxwell(&self, fidx: usize) -> Option<&MaxwellBlocks> {
        self.maxwell.get(fidx)
    }

    /// `(A + Pi)^{-1}`.
    pub fn regularized_inverse(&self) -> &Mat<f64> {
        &self.ainv
    }
}

/// Build the exponential cache. `fractions` are multiples of `dt`; the Maxwell
/// blocks `cosh(A tau)` and `sinh(A tau)` are included when `maxwell` is set.
pub fn build_exp_cache(
    a: MatRef<'_, f64>,
    fact: &EigenFactorization,
    proj: &Projector,
    velocities: &[f64],
    dt: f64,
    fractions: &[f64],
    maxwell: bool,
) -> Result<ExpCache> {
    let mut fr: Vec<f64> = Vec::new();
    for &f in fractions {
        if !fr.iter().any(|&g| same_fraction(f, g)) {
            fr.push(f);
        }
    }
    let n = fact.dim();
    let mut exps = Vec::with_capacity(fr.len());
    let mut mx = Vec::new();
    for &f in &fr {
        let tau = f * dt;
        let mut row = Vec::with_capacity(velocities.len());
        for &v in velocities {
            if v * tau == 0.0 {
                row.push(Mat::identity(n, n));
            } else {
                row.push(fact.exp_matrix(v * tau)?);
            }
        }
        exps.push(row);
        if maxwell {
            let cosh = fact.matrix_function(|l| (l * tau).cosh())?;
            let sinh = fact.matrix_function(|l| (l * tau).sinh())?;
            mx.push(MaxwellBlocks { cosh, sinh });
        }
    }
    let ainv = regularized_inverse(a, proj)?;
    Ok(ExpCache {
        dt,
        fractions: fr,
        velocities: velocities.to_vec(),
        exps,
        maxwell: mx,
        ainv,
    })
}

/// `exp(ty Ay) F exp(tx Ax)^T`, i.e. the exponential of `tx Ax (+) ty Ay` applied to `vec(F)`,
/// where `F` has `dim(Ay)` rows and `dim(Ax)` columns.
pub fn kron_exp_apply(
    ax: MatRef<'_, f64>,
    ay: MatRef<'_, f64>,
    tx: f64,
    ty: f64,
    f: MatRef<'_, f64>,
) -> Result<Mat<f64>> {
    if ax.nrows() != ax.ncols() || ay.nrows() != ay.ncols() {
        return Err(Error::Shape("operators must be square".into()));
    }
    if f.nrows() != ay.nrows() || f.ncols() != ax.nrows() {
        return Err(Error::Shape(format!(
            "F is {}x{}, expected {}x{}",
            f.nrows(),
            f.ncols(),
            ay.nrows(),
            ax.nrows()
        )));
    }
    let scaled =
        |m: MatRef<'_, f64>, t: f64| Mat::from_fn(m.nrows(), m.ncols(), |i, j| t * m[(i, j)]);
    let ey = expm(scaled(ay, ty).as_ref())?;
    let ex = expm(scaled(ax, tx).as_ref())?;
    Ok(&ey * f * ex.transpose())
}
