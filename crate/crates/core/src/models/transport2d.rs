//! Linear transport `u_t + u_x + u_v = 0` on the periodic square `[0, 2pi]^2`.
//!
//! The `x` advection is discretised by DG and integrated exactly; the `v`
//! advection is a periodic finite-difference derivative treated explicitly.

use std::f64::consts::PI;

use faer::Mat;

use crate::dg_core::{assemble_advection_matrix, eval_local, project_coeffs, DgSpace, FluxKind};
use crate::error::{Error, Result};
use crate::exp_ops::eigen_factorize_dg;
use crate::lawson::{ButcherTableau, LawsonModel};
use crate::linalg::expm;
use crate::phase_space::{DerivativeScheme, VelocityGrid};

use super::{gemm_into, Slab};

/// Points per cell used by the error norms.
pub const ERROR_SAMPLES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transport2dParams {
    pub cells: usize,
    pub degree: usize,
    pub nv: usize,
    pub flux: FluxKind,
    pub scheme: DerivativeScheme,
    pub dt: f64,
    /// Drop the velocity derivative, leaving the exactly integrated `x` transport.
    pub linear_only: bool,
}

#[derive(Debug, Clone)]
pub struct Transport2d {
    space: DgSpace,
    grid: VelocityGrid,
    scheme: DerivativeScheme,
    dt: f64,
    linear_only: bool,
    a: Mat<f64>,
    exps: Vec<(f64, Mat<f64>)>,
}

impl Transport2d {
    pub fn new(p: Transport2dParams, tableau: &ButcherTableau) -> Result<Self> {
        if !(p.dt > 0.0 && p.dt.is_finite()) {
            return Err(Error::Config(format!(
                "time step must be positive, got {}",
                p.dt
            )));
        }
        let space = DgSpace::new(p.cells, p.degree, 0.0, 2.0 * PI)?;
        let grid = VelocityGrid::periodic(0.0, 2.0 * PI, p.nv)?;
        if p.nv < 5 {
            return Err(Error::Config(
                "the periodic velocity axis needs at least 5 nodes".into(),
            ));
        }
        let a = assemble_advection_matrix(&space, p.flux);
        let fractions = tableau.fractions();
        let exps = match p.flux {
            FluxKind::Central => {
                let fact = eigen_factorize_dg(a.as_ref(), &space)?;
                fractions
                    .iter()
                    .map(|&f| Ok((f, fact.exp_matrix(f * p.dt)?)))
                    .collect::<Result<Vec<_>>>()?
            }
            FluxKind::Upwind => fractions
                .iter()
                .map(|&f| {
                    let s = Mat::from_fn(a.nrows(), a.ncols(), |i, j| f * p.dt * a[(i, j)]);
                    Ok((f, expm(s.as_ref())?))
                })
                .collect::<Result<Vec<_>>>()?,
        };
        Ok(Self {
            space,
            grid,
            scheme: p.scheme,
            dt: p.dt,
            linear_only: p.linear_only,
            a,
            exps,
        })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn advection_matrix(&self) -> &Mat<f64> {
        &self.a
    }

    /// L2 projection in `x` of `u0(x, v_j)` for every velocity node.
    pub fn project(&self, u0: impl Fn(f64, f64) -> f64) -> Slab {
        let mut s = Slab::zeros(self.space.ndof(), self.grid.len());
        for j in 0..self.grid.len() {
            let v = self.grid.node(j);
            let c = project_coeffs(&self.space, |x| u0(x, v));
            s.col_mut(j).copy_from_slice(&c);
        }
        s
    }

    /// `sin(x + v - 2t)`.
    pub fn exact(x: f64, v: f64, t: f64) -> f64 {
        (x + v - 2.0 * t).sin()
    }

    pub fn initial_state(&self) -> Slab {
        self.project(|x, v| Self::exact(x, v, 0.0))
    }

    /// `(L_inf, L2)` norms of `u - g` from `ERROR_SAMPLES` equispaced points per cell
    /// at every velocity node.
    pub fn error_norms(&self, u: &Slab, g: impl Fn(f64, f64) -> f64) -> (f64, f64) {
        let nl = self.space.nloc();
        let dx = self.space.dx();
        let dv = self.grid.dv();
        let m = ERROR_SAMPLES as f64;
        let mut linf = 0.0f64;
        let mut sum = 0.0;
        for j in 0..self.grid.len() {
            let v = self.grid.node(j);
            let col = u.col(j);
            for c in 0..self.space.cells() {
                let xc = self.space.center(c);
                let cc = &col[c * nl..(c + 1) * nl];
                for i in 1..=ERROR_SAMPLES {
                    let s = -0.5 + i as f64 / m;
                    let e = eval_local(cc, s) - g(xc + s * dx, v);
                    linf = linf.max(e.abs());
                    sum += e * e;
                }
            }
        }
        (linf, (sum * dx / m * dv).sqrt())
    }

    /// Euclidean-weighted `||u||` in `L2(dx) x l2(dv)`.
    pub fn l2_norm(&self, u: &Slab) -> f64 {
        let dv = self.grid.dv();
        (0..u.cols)
            .map(|j| {
                let n = crate::dg_core::l2_norm_coeffs(&self.space, u.col(j));
                n * n * dv
            })
            .sum::<f64>()
            .sqrt()
    }

    fn exp_for(&self, frac: f64) -> Result<&Mat<f64>> {
        self.exps
            .iter()
            .find(|(f, _)| (f - frac).abs() <= 1e-12 * (1.0 + frac.abs()))
            .map(|(_, m)| m)
            .ok_or_else(|| Error::Config(format!("stage fraction {frac} was not prepared")))
    }
}

impl LawsonModel for Transport2d {
    type State = Slab;

    fn dt(&self) -> f64 {
        self.dt
    }

    fn exp_l(&self, frac: f64, u: &Slab) -> Result<Slab> {
        let e = self.exp_for(frac)?;
        let mut out = Slab::zeros(u.rows, u.cols);
        gemm_into(&mut out.data, e.as_ref(), &u.data, u.cols);
        Ok(out)
    }

    fn nonlinear(&self, u: &Slab) -> Result<Slab> {
        let mut out = Slab::zeros(u.rows, u.cols);
        if self.linear_only {
            return Ok(out);
        }
        let n = u.cols as isize;
        let inv = -1.0 / self.grid.dv();
        for j in 0..u.cols {
            let dst = &mut out.data[j * u.rows..(j + 1) * u.rows];
            for &(o, w) in self.scheme.stencil() {
                let q = (j as isize + o).rem_euclid(n) as usize;
                let c = w * inv;
                for (d, s) in dst.iter_mut().zip(u.col(q)) {
                    *d += c * s;
                }
            }
        }
        Ok(out)
    }
}
