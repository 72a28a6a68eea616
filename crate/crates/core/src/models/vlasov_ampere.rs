//! Vlasov-Ampere system in one space and one velocity dimension.
//!
//! `f_t + v f_x + E f_v = 0`, `E_t = -int v f dv + Jbar`. DG in `x` with central
//! flux, finite differences in `v`; the transport part and the Ampere current
//! are integrated exactly, the force term `-E f_v` explicitly.

use faer::Mat;

use crate::dg_core::{integral, l2_norm_coeffs, project_coeffs, DgSpace};
use crate::error::{Error, Result};
use crate::exp_ops::{build_exp_cache, ExpCache};
use crate::lawson::{ButcherTableau, LawsonModel, LinearSpace};
use crate::linalg::matvec;
use crate::phase_space::{derivative_blocks, DerivativeScheme, MultiplierTemplate, VelocityGrid};

use super::{
    gemm_into, gemv_add, mean_profile_weights, norm2, unit_constant, DgOperators, KineticModel,
    Observables, Slab,
};

/// `(f_j)_j` as columns of a slab and the electric field.
#[derive(Debug, Clone, PartialEq)]
pub struct VaState {
    pub f: Slab,
    pub e: Vec<f64>,
}

impl LinearSpace for VaState {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.f.axpy(a, &x.f);
        self.e.axpy(a, &x.e);
    }
    fn scale(&mut self, a: f64) {
        self.f.scale(a);
        self.e.scale(a);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaParams {
    pub cells: usize,
    pub degree: usize,
    pub length: f64,
    pub nv: usize,
    pub v_max: f64,
    pub scheme: DerivativeScheme,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct VlasovAmpere {
    space: DgSpace,
    grid: VelocityGrid,
    scheme: DerivativeScheme,
    ops: DgOperators,
    cache: ExpCache,
    template: MultiplierTemplate,
}

pub(crate) fn check_scheme(scheme: DerivativeScheme) -> Result<()> {
    if scheme == DerivativeScheme::Up3 {
        return Err(Error::Config(
            "the upwind velocity stencil needs the sign of the field multiplier; DG kinetic models use CD2 or CD4"
                .into(),
        ));
    }
    Ok(())
}

pub(crate) fn check_dt(dt: f64) -> Result<()> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    Ok(())
}

impl VlasovAmpere {
    pub fn new(p: VaParams, tableau: &ButcherTableau) -> Result<Self> {
        check_scheme(p.scheme)?;
        check_dt(p.dt)?;
        let space = DgSpace::new(p.cells, p.degree, 0.0, p.length)?;
        let grid = VelocityGrid::new(p.v_max, p.nv)?;
        let ops = DgOperators::new(&space)?;
        let cache = build_exp_cache(
            ops.a.as_ref(),
            &ops.fact,
            &ops.proj,
            &grid.nodes(),
            p.dt,
            &tableau.fractions(),
            false,
        )?;
        let template = MultiplierTemplate::new(p.degree);
        Ok(Self {
            space,
            grid,
            scheme: p.scheme,
            ops,
            cache,
            template,
        })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn grid(&self) -> &VelocityGrid {
        &self.grid
    }

    pub fn advection_matrix(&self) -> &Mat<f64> {
        &self.ops.a
    }

    pub fn projector(&self) -> &Mat<f64> {
        &self.ops.proj.pi
    }

    pub fn zeros(&self) -> VaState {
        VaState {
            f: Slab::zeros(self.space.ndof(), self.grid.len()),
            e: vec![0.0; self.space.ndof()],
        }
    }

    /// Projects `f0(x, v_j)` and solves the discrete Poisson equation for `E`.
    pub fn initial_state(&self, f0: impl Fn(f64, f64) -> f64) -> VaState {
        let mut u = self.zeros();
        for j in 0..self.grid.len() {
            let v = self.grid.node(j);
            let c = project_coeffs(&self.space, |x| f0(x, v));
            u.f.col_mut(j).copy_from_slice(&c);
        }
        self.solve_initial_poisson(&mut u);
        u
    }

    /// `E = -(A + Pi)^{-1} (1 - Pi) dv sum_j f_j`.
    pub fn solve_initial_poisson(&self, u: &mut VaState) {
        let rho = self.charge(&u.f);
        let r = self.ops.proj.apply_complement(&rho);
        u.e = matvec(self.cache.regularized_inverse().as_ref(), &r);
        u.e.iter_mut().for_each(|x| *x = -*x);
    }

    /// `dv sum_j f_j`.
    pub fn charge(&self, f: &Slab) -> Vec<f64> {
        let mut s = f.column_sum();
        s.scale(self.grid.dv());
        s
    }

    /// `||(A + Pi) E + (1 - Pi) rho|| / ||rho||` (Euclidean coefficient norms).
    pub fn poisson_residual(&self, u: &VaState) -> f64 {
        let rho = self.charge(&u.f);
        let mut r = matvec(self.ops.a.as_ref(), &u.e);
        r.axpy(1.0, &self.ops.proj.apply(&u.e));
        r.axpy(1.0, &self.ops.proj.apply_complement(&rho));
        let d = norm2(&rho);
        if d > 0.0 {
            norm2(&r) / d
        } else {
            norm2(&r)
        }
    }
}

impl LawsonModel for VlasovAmpere {
    type State = VaState;

    fn dt(&self) -> f64 {
        self.cache.dt()
    }

    fn exp_l(&self, frac: f64, u: &VaState) -> Result<VaState> {
        let fidx = self.cache.fraction_index(frac)?;
        let n = u.f.rows;
        let mut f = Slab::zeros(n, u.f.cols);
        for j in 0..u.f.cols {
            gemm_into(
                f.col_mut(j),
                self.cache.exp_at(fidx, j).as_ref(),
                u.f.col(j),
                1,
            );
        }
        // E' = E + dv (A + Pi)^{-1} (1 - Pi) sum_j (f_j - f_j').
        let mut diff = u.f.column_sum();
        diff.axpy(-1.0, &f.column_sum());
        let d = self.ops.proj.apply_complement(&diff);
        let mut e = u.e.clone();
        let mut tmp = vec![0.0; n];
        gemv_add(&mut tmp, self.cache.regularized_inverse().as_ref(), &d);
        e.axpy(self.grid.dv(), &tmp);
        Ok(VaState { f, e })
    }

    fn nonlinear(&self, u: &VaState) -> Result<VaState> {
        let n = u.f.rows;
        let nv = u.f.cols;
        let mut df = vec![0.0; n * nv];
        let mut buf = Vec::new();
        derivative_blocks(
            self.scheme,
            self.grid.dv(),
            0.0,
            nv,
            n,
            n,
            &u.f.data,
            &mut df,
            &mut buf,
        );
        let mult = self.template.build(&u.e);
        let mut out = self.zeros();
        for j in 0..nv {
            mult.apply_add(-1.0, &df[j * n..(j + 1) * n], out.f.col_mut(j));
        }
        Ok(out)
    }
}

impl KineticModel for VlasovAmpere {
    fn observables(&self, u: &VaState) -> Observables {
        let ee = l2_norm_coeffs(&self.space, &u.e);
        let kin = self.kinetic_energy(u);
        let dv = self.grid.dv();
        let mass = (0..u.f.cols)
            .map(|j| integral(&self.space, u.f.col(j)))
            .sum::<f64>()
            * dv;
        Observables {
            electric_energy: ee,
            magnetic_energy: 0.0,
            total_energy: kin + ee * ee,
            kinetic_energy: kin,
            mass,
            poisson_residual: self.poisson_residual(u),
            e1_l2: ee,
            e2_l2: 0.0,
            b_l2: 0.0,
        }
    }

    fn kinetic_energy(&self, u: &VaState) -> f64 {
        let dv = self.grid.dv();
        (0..u.f.cols)
            .map(|j| {
                let v = self.grid.node(j);
                v * v * integral(&self.space, u.f.col(j))
            })
            .sum::<f64>()
            * dv
    }

    fn field_energy(&self, u: &VaState) -> f64 {
        let e = l2_norm_coeffs(&self.space, &u.e);
        e * e
    }

    fn mean_profile_direction(&self, u: &VaState) -> VaState {
        let len = self.space.length();
        let m: Vec<f64> = (0..u.f.cols)
            .map(|j| integral(&self.space, u.f.col(j)) / len)
            .collect();
        let v2: Vec<f64> = self.grid.nodes().iter().map(|v| v * v).collect();
        let w = mean_profile_weights(&v2, &m);
        let one = unit_constant(&self.space);
        let mut d = self.zeros();
        for (j, wj) in w.iter().enumerate() {
            d.f.col_mut(j)
                .iter_mut()
                .zip(&one)
                .for_each(|(x, o)| *x = wj * o);
        }
        d
    }

    fn is_finite(&self, u: &VaState) -> bool {
        u.f.is_finite() && u.e.iter().all(|x| x.is_finite())
    }
}
