//! Vlasov-Maxwell system in one space and two velocity dimensions, DG in `x`.
//!
//! `f_t + v1 f_x + (E1 + v2 B) f_v1 + (E2 - v1 B) f_v2 = 0`,
//! `B_t = -E2_x`, `E1_t = -J1 + J1bar`, `E2_t = -B_x - J2 + J2bar`.
//! The linear part (transport in `x`, Maxwell curl terms and currents) is
//! integrated exactly; the Lorentz force is explicit.

use faer::Mat;

use crate::dg_core::{integral, l2_norm_coeffs, project_coeffs, DgSpace};
use crate::error::{Error, Result};
use crate::exp_ops::{build_exp_cache, phi_alpha_beta, ExpCache};
use crate::lawson::{ButcherTableau, LawsonModel, LinearSpace};
use crate::linalg::matvec;
use crate::phase_space::{derivative_blocks, DerivativeScheme, MultiplierTemplate, VelocityGrid};

use super::vlasov_ampere::{check_dt, check_scheme};
use super::{
    gemm_into, gemv_add, mean_profile_weights, norm2, unit_constant, DgOperators, KineticModel,
    Observables, Slab,
};

/// Distribution (column `j2 + N2 j1` holds `f_{j1, j2}`) and the three field components.
#[derive(Debug, Clone, PartialEq)]
pub struct VmState {
    pub f: Slab,
    pub b: Vec<f64>,
    pub e1: Vec<f64>,
    pub e2: Vec<f64>,
}

impl LinearSpace for VmState {
    fn axpy(&mut self, a: f64, x: &Self) {
        self.f.axpy(a, &x.f);
        self.b.axpy(a, &x.b);
        self.e1.axpy(a, &x.e1);
        self.e2.axpy(a, &x.e2);
    }
    fn scale(&mut self, a: f64) {
        self.f.scale(a);
        self.b.scale(a);
        self.e1.scale(a);
        self.e2.scale(a);
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VmParams {
    pub cells: usize,
    pub degree: usize,
    pub length: f64,
    pub nv: [usize; 2],
    pub v_max: [f64; 2],
    pub scheme: DerivativeScheme,
    pub dt: f64,
}

#[derive(Debug, Clone)]
pub struct VlasovMaxwell {
    space: DgSpace,
    g1: VelocityGrid,
    g2: VelocityGrid,
    scheme: DerivativeScheme,
    ops: DgOperators,
    cache: ExpCache,
    /// Per fraction and `v1` node: `dv1 dv2 (A + Pi)^{-1} alpha(A tau, v1)` and the `beta` analogue.
    sources: Vec<Vec<(Mat<f64>, Mat<f64>)>>,
    template: MultiplierTemplate,
}

impl VlasovMaxwell {
    pub fn new(p: VmParams, tableau: &ButcherTableau) -> Result<Self> {
        check_scheme(p.scheme)?;
        check_dt(p.dt)?;
        let space = DgSpace::new(p.cells, p.degree, 0.0, p.length)?;
        let g1 = VelocityGrid::new(p.v_max[0], p.nv[0])?;
        let g2 = VelocityGrid::new(p.v_max[1], p.nv[1])?;
        let ops = DgOperators::new(&space)?;
        let cache = build_exp_cache(
            ops.a.as_ref(),
            &ops.fact,
            &ops.proj,
            &g1.nodes(),
            p.dt,
            &tableau.fractions(),
            true,
        )?;
        let w = g1.dv() * g2.dv();
        let ainv = cache.regularized_inverse();
        let mut sources = Vec::with_capacity(cache.fractions().len());
        for &frac in cache.fractions() {
            let tau = frac * p.dt;
            let mut row = Vec::with_capacity(g1.len());
            for v1 in g1.nodes() {
                let (al, be) = phi_alpha_beta(&ops.fact, v1, tau)?;
                let mut at = ainv * &al;
                let mut bt = ainv * &be;
                at *= faer::Scale(w);
                bt *= faer::Scale(w);
                row.push((at, bt));
            }
            sources.push(row);
        }
        let template = MultiplierTemplate::new(p.degree);
        Ok(Self {
            space,
            g1,
            g2,
            scheme: p.scheme,
            ops,
            cache,
            sources,
            template,
        })
    }

    pub fn space(&self) -> &DgSpace {
        &self.space
    }

    pub fn grids(&self) -> (&VelocityGrid, &VelocityGrid) {
        (&self.g1, &self.g2)
    }

    pub fn advection_matrix(&self) -> &Mat<f64> {
        &self.ops.a
    }

    pub fn projector(&self) -> &Mat<f64> {
        &self.ops.proj.pi
    }

    fn cell_weight(&self) -> f64 {
        self.g1.dv() * self.g2.dv()
    }

    pub fn zeros(&self) -> VmState {
        let n = self.space.ndof();
        VmState {
            f: Slab::zeros(n, self.g1.len() * self.g2.len()),
            b: vec![0.0; n],
            e1: vec![0.0; n],
            e2: vec![0.0; n],
        }
    }

    /// Projects `f0(x, v1, v2)` and `b0(x)`, sets `E2 = 0` and solves for `E1`.
    pub fn initial_state(
        &self,
        f0: impl Fn(f64, f64, f64) -> f64,
        b0: impl Fn(f64) -> f64,
    ) -> VmState {
        let mut u = self.zeros();
        let n2 = self.g2.len();
        for j1 in 0..self.g1.len() {
            let v1 = self.g1.node(j1);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                let c = project_coeffs(&self.space, |x| f0(x, v1, v2));
                u.f.col_mut(j2 + n2 * j1).copy_from_slice(&c);
            }
        }
        u.b = project_coeffs(&self.space, b0);
        self.solve_initial_poisson(&mut u);
        u
    }

    /// `E1 = -(A + Pi)^{-1} (1 - Pi) dv1 dv2 sum f`.
    pub fn solve_initial_poisson(&self, u: &mut VmState) {
        let rho = self.charge(&u.f);
        let r = self.ops.proj.apply_complement(&rho);
        u.e1 = matvec(self.cache.regularized_inverse().as_ref(), &r);
        u.e1.iter_mut().for_each(|x| *x = -*x);
    }

    pub fn charge(&self, f: &Slab) -> Vec<f64> {
        let mut s = f.column_sum();
        s.scale(self.cell_weight());
        s
    }

    pub fn poisson_residual(&self, u: &VmState) -> f64 {
        let rho = self.charge(&u.f);
        let mut r = matvec(self.ops.a.as_ref(), &u.e1);
        r.axpy(1.0, &self.ops.proj.apply(&u.e1));
        r.axpy(1.0, &self.ops.proj.apply_complement(&rho));
        let d = norm2(&rho);
        if d > 0.0 {
            norm2(&r) / d
        } else {
            norm2(&r)
        }
    }
}

impl LawsonModel for VlasovMaxwell {
    type State = VmState;

    fn dt(&self) -> f64 {
        self.cache.dt()
    }

    fn exp_l(&self, frac: f64, u: &VmState) -> Result<VmState> {
        let fidx = self.cache.fraction_index(frac)?;
        let n = u.f.rows;
        let n1 = self.g1.len();
        let n2 = self.g2.len();
        let mx = self.cache.maxwell(fidx).ok_or_else(|| {
            Error::Numerical("Maxwell blocks missing from the exponential cache".into())
        })?;
        let mut out = self.zeros();
        out.b = matvec(mx.cosh.as_ref(), &u.b);
        gemv_add(&mut out.b, mx.sinh.as_ref(), &u.e2);
        out.e2 = matvec(mx.sinh.as_ref(), &u.b);
        gemv_add(&mut out.e2, mx.cosh.as_ref(), &u.e2);
        let mut g = vec![0.0; n];
        for j1 in 0..n1 {
            let blk = j1 * n2 * n..(j1 + 1) * n2 * n;
            gemm_into(
                &mut out.f.data[blk.clone()],
                self.cache.exp_at(fidx, j1).as_ref(),
                &u.f.data[blk],
                n2,
            );
            g.iter_mut().for_each(|x| *x = 0.0);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                for (gi, fi) in g.iter_mut().zip(u.f.col(j2 + n2 * j1)) {
                    *gi += v2 * fi;
                }
            }
            let (at, bt) = &self.sources[fidx][j1];
            gemv_add(&mut out.b, at.as_ref(), &g);
            gemv_add(&mut out.e2, bt.as_ref(), &g);
        }
        let mut diff = u.f.column_sum();
        diff.axpy(-1.0, &out.f.column_sum());
        let d = self.ops.proj.apply_complement(&diff);
        out.e1 = u.e1.clone();
        let mut tmp = vec![0.0; n];
        gemv_add(&mut tmp, self.cache.regularized_inverse().as_ref(), &d);
        out.e1.axpy(self.cell_weight(), &tmp);
        Ok(out)
    }

    fn nonlinear(&self, u: &VmState) -> Result<VmState> {
        let n = u.f.rows;
        let n1 = self.g1.len();
        let n2 = self.g2.len();
        let mut out = self.zeros();
        let mut d = vec![0.0; u.f.data.len()];
        let mut buf = Vec::new();
        let mut field = vec![0.0; n];
        // Derivative along v1 for each v2 column, multiplied by E1 + v2 B.
        for j2 in 0..n2 {
            let off = j2 * n;
            derivative_blocks(
                self.scheme,
                self.g1.dv(),
                0.0,
                n1,
                n,
                n2 * n,
                &u.f.data[off..],
                &mut d[off..],
                &mut buf,
            );
        }
        for j2 in 0..n2 {
            let v2 = self.g2.node(j2);
            for ((fi, e), b) in field.iter_mut().zip(&u.e1).zip(&u.b) {
                *fi = e + v2 * b;
            }
            let m = self.template.build(&field);
            for j1 in 0..n1 {
                let c = j2 + n2 * j1;
                m.apply_add(-1.0, &d[c * n..(c + 1) * n], out.f.col_mut(c));
            }
        }
        // Derivative along v2 for each v1 row, multiplied by E2 - v1 B.
        for j1 in 0..n1 {
            let off = j1 * n2 * n;
            derivative_blocks(
                self.scheme,
                self.g2.dv(),
                0.0,
                n2,
                n,
                n,
                &u.f.data[off..],
                &mut d[off..],
                &mut buf,
            );
            let v1 = self.g1.node(j1);
            for ((fi, e), b) in field.iter_mut().zip(&u.e2).zip(&u.b) {
                *fi = e - v1 * b;
            }
            let m = self.template.build(&field);
            for j2 in 0..n2 {
                let c = j2 + n2 * j1;
                m.apply_add(-1.0, &d[c * n..(c + 1) * n], out.f.col_mut(c));
            }
        }
        Ok(out)
    }
}

impl KineticModel for VlasovMaxwell {
    fn observables(&self, u: &VmState) -> Observables {
        let e1 = l2_norm_coeffs(&self.space, &u.e1);
        let e2 = l2_norm_coeffs(&self.space, &u.e2);
        let b = l2_norm_coeffs(&self.space, &u.b);
        let kin = self.kinetic_energy(u);
        let mass = (0..u.f.cols)
            .map(|c| integral(&self.space, u.f.col(c)))
            .sum::<f64>()
            * self.cell_weight();
        Observables {
            electric_energy: (e1 * e1 + e2 * e2).sqrt(),
            magnetic_energy: b,
            total_energy: kin + e1 * e1 + e2 * e2 + b * b,
            kinetic_energy: kin,
            mass,
            poisson_residual: self.poisson_residual(u),
            e1_l2: e1,
            e2_l2: e2,
            b_l2: b,
        }
    }

    fn kinetic_energy(&self, u: &VmState) -> f64 {
        let n2 = self.g2.len();
        let mut s = 0.0;
        for j1 in 0..self.g1.len() {
            let v1 = self.g1.node(j1);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                s += (v1 * v1 + v2 * v2) * integral(&self.space, u.f.col(j2 + n2 * j1));
            }
        }
        s * self.cell_weight()
    }

    fn field_energy(&self, u: &VmState) -> f64 {
        [&u.e1, &u.e2, &u.b]
            .iter()
            .map(|x| {
                let n = l2_norm_coeffs(&self.space, x);
                n * n
            })
            .sum()
    }

    fn mean_profile_direction(&self, u: &VmState) -> VmState {
        let len = self.space.length();
        let n2 = self.g2.len();
        let m: Vec<f64> = (0..u.f.cols)
            .map(|c| integral(&self.space, u.f.col(c)) / len)
            .collect();
        let v2: Vec<f64> = (0..u.f.cols)
            .map(|c| {
                let a = self.g1.node(c / n2);
                let b = self.g2.node(c % n2);
                a * a + b * b
            })
            .collect();
        let w = mean_profile_weights(&v2, &m);
        let one = unit_constant(&self.space);
        let mut d = self.zeros();
        for (c, wc) in w.iter().enumerate() {
            d.f.col_mut(c)
                .iter_mut()
                .zip(&one)
                .for_each(|(x, o)| *x = wc * o);
        }
        d
    }

    fn is_finite(&self, u: &VmState) -> bool {
        u.f.is_finite()
            && [&u.b, &u.e1, &u.e2]
                .iter()
                .all(|x| x.iter().all(|v| v.is_finite()))
    }
}
