//! Concrete semi-linear systems advanced by the Lawson stepper.

use faer::linalg::matmul::matmul;
use faer::{Accum, MatMut, MatRef, Par};

use crate::lawson::{LawsonModel, LinearSpace};

pub mod fourier_vm;
pub mod transport2d;
pub mod vlasov_ampere;
pub mod vlasov_maxwell;

pub use fourier_vm::{FourierParams, FourierState, FourierVm};
pub use transport2d::{Transport2d, Transport2dParams};
pub use vlasov_ampere::{VaParams, VaState, VlasovAmpere};
pub use vlasov_maxwell::{VlasovMaxwell, VmParams, VmState};

/// Dense column-major block of DG coefficient vectors, one column per velocity node.
#[derive(Debug, Clone, PartialEq)]
pub struct Slab {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Slab {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn col(&self, j: usize) -> &[f64] {
        &self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn col_mut(&mut self, j: usize) -> &mut [f64] {
        &mut self.data[j * self.rows..(j + 1) * self.rows]
    }

    pub fn as_mat(&self) -> MatRef<'_, f64> {
        MatRef::from_column_major_slice(&self.data, self.rows, self.cols)
    }

    pub fn as_mat_mut(&mut self) -> MatMut<'_, f64> {
        MatMut::from_column_major_slice_mut(&mut self.data, self.rows, self.cols)
    }

    /// Sum of all columns.
    pub fn column_sum(&self) -> Vec<f64> {
        let mut s = vec![0.0; self.rows];
        for j in 0..self.cols {
            for (a, b) in s.iter_mut().zip(self.col(j)) {
                *a += b;
            }
        }
        s
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, x| m.max(x.abs()))
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }
}

impl LinearSpace for Slab {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.data.axpy(a, &x.data);
    }
    fn scale(&mut self, a: f64) {
        self.data.scale(a);
    }
}

/// `dst = a * src` for column-major slices (`src`, `dst` of `a.ncols() x cols`).
pub(crate) fn gemm_into(dst: &mut [f64], a: MatRef<'_, f64>, src: &[f64], cols: usize) {
    let n = a.nrows();
    let d = MatMut::from_column_major_slice_mut(dst, n, cols);
    let s = MatRef::from_column_major_slice(src, a.ncols(), cols);
    matmul(d, Accum::Replace, a, s, 1.0, Par::Seq);
}

/// `y += a * x`.
pub(crate) fn gemv_add(y: &mut [f64], a: MatRef<'_, f64>, x: &[f64]) {
    let n = a.nrows();
    let d = MatMut::from_column_major_slice_mut(y, n, 1);
    let s = MatRef::from_column_major_slice(x, a.ncols(), 1);
    matmul(d, Accum::Add, a, s, 1.0, Par::Seq);
}

/// Snapshot of the scalar observables of a kinetic state.
#[derive(Debug, Clone, Copy, Default, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct Observables {
    /// `||E||` (all electric components together).
    pub electric_energy: f64,
    /// `||B||`.
    pub magnetic_energy: f64,
    /// `sum int |v|^2 f + int |E|^2 + int B^2`.
    pub total_energy: f64,
    pub kinetic_energy: f64,
    pub mass: f64,
    /// Relative residual of the discrete Gauss law.
    pub poisson_residual: f64,
    pub e1_l2: f64,
    pub e2_l2: f64,
    pub b_l2: f64,
}

/// Interface shared by the Vlasov-type models for diagnostics and energy correction.
pub trait KineticModel: LawsonModel {
    fn observables(&self, u: &Self::State) -> Observables;

    /// `sum_j dv |v_j|^2 int f_j dx`; linear in the distribution.
    fn kinetic_energy(&self, u: &Self::State) -> f64;

    /// `int |E|^2 + B^2 dx`; quadratic in the fields.
    fn field_energy(&self, u: &Self::State) -> f64;

    /// State whose distribution part is `(|v_j|^2 - c) m_j` times the unit
    /// constant in `x` (`m_j` the spatial mean of `f_j`, `c` chosen so that the
    /// direction carries no mass) and whose fields vanish.
    fn mean_profile_direction(&self, u: &Self::State) -> Self::State;

    /// Whether every entry of the state is finite.
    fn is_finite(&self, u: &Self::State) -> bool;
}

/// `(|v|^2 - c) m` weights for the mean-profile correction, with `c = sum |v|^2 m / sum m`.
pub(crate) fn mean_profile_weights(v2: &[f64], m: &[f64]) -> Vec<f64> {
    let sm: f64 = m.iter().sum();
    let svm: f64 = v2.iter().zip(m).map(|(a, b)| a * b).sum();
    let c = if sm != 0.0 { svm / sm } else { 0.0 };
    v2.iter().zip(m).map(|(a, b)| (a - c) * b).collect()
}

/// Central-flux operator data shared by the DG kinetic models.
#[derive(Debug, Clone)]
pub(crate) struct DgOperators {
    pub a: faer::Mat<f64>,
    pub proj: crate::exp_ops::Projector,
    pub fact: crate::exp_ops::EigenFactorization,
}

impl DgOperators {
    pub fn new(space: &crate::dg_core::DgSpace) -> crate::Result<Self> {
        use crate::dg_core::{assemble_advection_matrix, FluxKind};
        use crate::exp_ops::{build_projector, eigen_factorize_dg, kernel_basis};
        let a = assemble_advection_matrix(space, FluxKind::Central);
        let basis = kernel_basis(a.as_ref(), space.degree(), space.cells())?;
        let proj = build_projector(&basis, space)?;
        let fact = eigen_factorize_dg(a.as_ref(), space)?;
        Ok(Self { a, proj, fact })
    }
}

/// Euclidean norm.
pub(crate) fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Coefficients of the unit constant on every cell.
pub(crate) fn unit_constant(space: &crate::dg_core::DgSpace) -> Vec<f64> {
    let mut u = vec![0.0; space.ndof()];
    for c in 0..space.cells() {
        u[c * space.nloc()] = 1.0;
    }
    u
}
