//! Vlasov-Maxwell 1dx-2dv with a Fourier pseudo-spectral discretisation in `x`.
//!
//! Every Fourier mode evolves independently under the linear part, which is
//! integrated in closed form. The Lorentz force is evaluated in physical
//! space with a finite-difference velocity derivative.

// Mode loops index several per-mode arrays at once.
#![allow(clippy::needless_range_loop)]

use std::fmt;
use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};
use crate::exp_ops::alpha_beta_scalar;
use crate::lawson::{ButcherTableau, LawsonModel, LinearSpace};
use crate::phase_space::{derivative_blocks, DerivativeScheme, VelocityGrid};
use faer::c64;

use super::{mean_profile_weights, KineticModel, Observables};

/// Spectral state. `f[(j2 + N2 j1) Nx + m]` is mode `m` of `f(., v1_j1, v2_j2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct FourierState {
    pub f: Vec<c64>,
    pub b: Vec<c64>,
    pub e1: Vec<c64>,
    pub e2: Vec<c64>,
}

fn caxpy(y: &mut [c64], a: f64, x: &[c64]) {
    for (s, v) in y.iter_mut().zip(x) {
        *s += v * a;
    }
}

impl LinearSpace for FourierState {
    fn axpy(&mut self, a: f64, x: &Self) {
        caxpy(&mut self.f, a, &x.f);
        caxpy(&mut self.b, a, &x.b);
        caxpy(&mut self.e1, a, &x.e1);
        caxpy(&mut self.e2, a, &x.e2);
    }
    fn scale(&mut self, a: f64) {
        for v in [&mut self.f, &mut self.b, &mut self.e1, &mut self.e2] {
            v.iter_mut().for_each(|s| *s *= a);
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FourierParams {
    pub nx: usize,
    pub length: f64,
    pub nv: [usize; 2],
    pub v_max: [f64; 2],
    pub scheme: DerivativeScheme,
    pub dt: f64,
}

/// Per-fraction scalar factors for one mode and one `v1` node.
#[derive(Debug, Clone, Copy)]
struct ModeFactors {
    shift: c64,
    alpha: c64,
    beta: c64,
}

#[derive(Clone)]
pub struct FourierVm {
    nx: usize,
    length: f64,
    g1: VelocityGrid,
    g2: VelocityGrid,
    scheme: DerivativeScheme,
    dt: f64,
    fractions: Vec<f64>,
    /// `[fraction][m * N1 + j1]`.
    factors: Vec<Vec<ModeFactors>>,
    /// `[fraction][m]`: `(cos k tau, -i sin k tau)`.
    rotations: Vec<Vec<(c64, c64)>>,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for FourierVm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("FourierVm")
            .field("nx", &self.nx)
            .field("length", &self.length)
            .field("g1", &self.g1)
            .field("g2", &self.g2)
            .field("scheme", &self.scheme)
            .field("dt", &self.dt)
            .finish_non_exhaustive()
    }
}

impl FourierVm {
    pub fn new(p: FourierParams, tableau: &ButcherTableau) -> Result<Self> {
        if p.nx < 2 {
            return Err(Error::Config("need at least two Fourier modes".into()));
        }
        if !(p.length > 0.0 && p.length.is_finite()) {
            return Err(Error::Config(format!(
                "domain length must be positive, got {}",
                p.length
            )));
        }
        super::vlasov_ampere::check_dt(p.dt)?;
        let g1 = VelocityGrid::new(p.v_max[0], p.nv[0])?;
        let g2 = VelocityGrid::new(p.v_max[1], p.nv[1])?;
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(p.nx);
        let inverse = planner.plan_fft_inverse(p.nx);
        let mut m = Self {
            nx: p.nx,
            length: p.length,
            g1,
            g2,
            scheme: p.scheme,
            dt: p.dt,
            fractions: Vec::new(),
            factors: Vec::new(),
            rotations: Vec::new(),
            forward,
            inverse,
        };
        for frac in tableau.fractions() {
            let tau = frac * p.dt;
            let mut fac = Vec::with_capacity(p.nx * g1.len());
            let mut rot = Vec::with_capacity(p.nx);
            for mode in 0..p.nx {
                let k = m.wavenumber(mode);
                rot.push((
                    c64::new((k * tau).cos(), 0.0),
                    c64::new(0.0, -(k * tau).sin()),
                ));
                for v1 in g1.nodes() {
                    // The DG construction with A replaced by its symbol -ik.
                    let z = c64::new(0.0, -k * tau);
                    let (alpha, beta) = if k == 0.0 {
                        (c64::ZERO, c64::ZERO)
                    } else {
                        alpha_beta_scalar(z, v1)
                    };
                    fac.push(ModeFactors {
                        shift: (z * v1).exp(),
                        alpha,
                        beta,
                    });
                }
            }
            m.fractions.push(frac);
            m.factors.push(fac);
            m.rotations.push(rot);
        }
        Ok(m)
    }

    pub fn modes(&self) -> usize {
        self.nx
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn grids(&self) -> (&VelocityGrid, &VelocityGrid) {
        (&self.g1, &self.g2)
    }

    /// Signed wavenumber `2 pi m' / L` of storage index `m`; zero for the Nyquist mode.
    pub fn wavenumber(&self, m: usize) -> f64 {
        if self.is_nyquist(m) {
            return 0.0;
        }
        let s = if m <= self.nx / 2 {
            m as f64
        } else {
            m as f64 - self.nx as f64
        };
        2.0 * std::f64::consts::PI * s / self.length
    }

    fn is_nyquist(&self, m: usize) -> bool {
        self.nx % 2 == 0 && m == self.nx / 2
    }

    fn cell_weight(&self) -> f64 {
        self.g1.dv() * self.g2.dv()
    }

    fn nvel(&self) -> usize {
        self.g1.len() * self.g2.len()
    }

    pub fn zeros(&self) -> FourierState {
        let z = vec![c64::ZERO; self.nx];
        FourierState {
            f: vec![c64::ZERO; self.nx * self.nvel()],
            b: z.clone(),
            e1: z.clone(),
            e2: z,
        }
    }

    /// Physical grid `x_i = i L / Nx`.
    pub fn x_nodes(&self) -> Vec<f64> {
        (0..self.nx)
            .map(|i| i as f64 * self.length / self.nx as f64)
            .collect()
    }

    /// Normalised forward transform of point values; the Nyquist coefficient is dropped.
    pub fn to_spectral(&self, values: &[f64]) -> Vec<c64> {
        let mut buf: Vec<c64> = values.iter().map(|&v| c64::new(v, 0.0)).collect();
        self.forward.process(&mut buf);
        let s = 1.0 / self.nx as f64;
        buf.iter_mut().for_each(|c| *c *= s);
        if self.nx % 2 == 0 {
            buf[self.nx / 2] = c64::ZERO;
        }
        buf
    }

    /// Point values on the physical grid.
    pub fn to_physical(&self, modes: &[c64]) -> Vec<f64> {
        let mut buf = modes.to_vec();
        self.inverse.process(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    /// Samples `f0` and `b0` on the grid, sets `E2 = 0` and solves for `E1`.
    pub fn initial_state(
        &self,
        f0: impl Fn(f64, f64, f64) -> f64,
        b0: impl Fn(f64) -> f64,
    ) -> FourierState {
        let mut u = self.zeros();
        let xs = self.x_nodes();
        let n2 = self.g2.len();
        let mut vals = vec![0.0; self.nx];
        for j1 in 0..self.g1.len() {
            let v1 = self.g1.node(j1);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                vals.iter_mut()
                    .zip(&xs)
                    .for_each(|(y, &x)| *y = f0(x, v1, v2));
                let c = j2 + n2 * j1;
                u.f[c * self.nx..(c + 1) * self.nx].copy_from_slice(&self.to_spectral(&vals));
            }
        }
        let bv: Vec<f64> = xs.iter().map(|&x| b0(x)).collect();
        u.b = self.to_spectral(&bv);
        u.b[0] = c64::ZERO;
        self.solve_initial_poisson(&mut u);
        u
    }

    /// `rho_m = dv1 dv2 sum f_m`.
    pub fn charge(&self, u: &FourierState) -> Vec<c64> {
        let mut rho = vec![c64::ZERO; self.nx];
        for c in 0..self.nvel() {
            for (r, v) in rho.iter_mut().zip(&u.f[c * self.nx..(c + 1) * self.nx]) {
                *r += v;
            }
        }
        let w = self.cell_weight();
        rho.iter_mut().for_each(|r| *r *= w);
        rho
    }

    /// `E1_m = rho_m / (i k_m)` for `k_m != 0`, zero otherwise.
    pub fn solve_initial_poisson(&self, u: &mut FourierState) {
        let rho = self.charge(u);
        for m in 0..self.nx {
            let k = self.wavenumber(m);
            u.e1[m] = if k == 0.0 {
                c64::ZERO
            } else {
                rho[m] / c64::new(0.0, k)
            };
        }
    }

    /// `||i k E1 - rho||` over the nonzero modes, relative to `||rho||` over all modes.
    pub fn poisson_residual(&self, u: &FourierState) -> f64 {
        let rho = self.charge(u);
        let mut r = 0.0;
        for m in 0..self.nx {
            let k = self.wavenumber(m);
            if k != 0.0 {
                r += (c64::new(0.0, k) * u.e1[m] - rho[m]).norm_sqr();
            }
        }
        let d: f64 = rho.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
        if d > 0.0 {
            r.sqrt() / d
        } else {
            r.sqrt()
        }
    }

    /// `int g^2 dx` by Parseval.
    fn field_integral(&self, g: &[c64]) -> f64 {
        self.length * g.iter().map(|c| c.norm_sqr()).sum::<f64>()
    }

    fn fraction_index(&self, frac: f64) -> Result<usize> {
        self.fractions
            .iter()
            .position(|&f| (f - frac).abs() <= 1e-12 * (1.0 + frac.abs()))
            .ok_or_else(|| Error::Config(format!("stage fraction {frac} was not prepared")))
    }
}

impl LawsonModel for FourierVm {
    type State = FourierState;

    fn dt(&self) -> f64 {
        self.dt
    }

    fn exp_l(&self, frac: f64, u: &FourierState) -> Result<FourierState> {
        let fi = self.fraction_index(frac)?;
        let fac = &self.factors[fi];
        let rot = &self.rotations[fi];
        let nx = self.nx;
        let n1 = self.g1.len();
        let n2 = self.g2.len();
        let w = self.cell_weight();
        let mut out = self.zeros();
        // Field rotation first, sources accumulated below.
        for m in 0..nx {
            if self.wavenumber(m) == 0.0 {
                continue;
            }
            let (c, s) = rot[m];
            out.b[m] = c * u.b[m] + s * u.e2[m];
            out.e2[m] = s * u.b[m] + c * u.e2[m];
            out.e1[m] = u.e1[m];
        }
        let mut g = vec![c64::ZERO; nx];
        let mut dsum = vec![c64::ZERO; nx];
        for j1 in 0..n1 {
            g.iter_mut().for_each(|x| *x = c64::ZERO);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                let c = j2 + n2 * j1;
                let src = &u.f[c * nx..(c + 1) * nx];
                let dst = &mut out.f[c * nx..(c + 1) * nx];
                for m in 0..nx {
                    let y = fac[m * n1 + j1].shift * src[m];
                    dst[m] = y;
                    g[m] += src[m] * v2;
                    dsum[m] += src[m] - y;
                }
            }
            for m in 0..nx {
                let k = self.wavenumber(m);
                if k == 0.0 {
                    continue;
                }
                let q = c64::new(0.0, w / k) * g[m];
                out.b[m] += fac[m * n1 + j1].alpha * q;
                out.e2[m] += fac[m * n1 + j1].beta * q;
            }
        }
        for m in 0..nx {
            let k = self.wavenumber(m);
            if k != 0.0 {
                out.e1[m] += c64::new(0.0, w / k) * dsum[m];
            }
        }
        Ok(out)
    }

    fn nonlinear(&self, u: &FourierState) -> Result<FourierState> {
        let nx = self.nx;
        let n1 = self.g1.len();
        let n2 = self.g2.len();
        let nvel = self.nvel();
        // Physical values, layout [(j2 + N2 j1) Nx + i].
        let mut f = vec![0.0; nvel * nx];
        let mut buf = vec![c64::ZERO; nx];
        for c in 0..nvel {
            buf.copy_from_slice(&u.f[c * nx..(c + 1) * nx]);
            self.inverse.process(&mut buf);
            for (d, s) in f[c * nx..(c + 1) * nx].iter_mut().zip(&buf) {
                *d = s.re;
            }
        }
        let e1 = self.to_physical(&u.e1);
        let e2 = self.to_physical(&u.e2);
        let b = self.to_physical(&u.b);
        let mut rhs = vec![0.0; nvel * nx];
        let upwind = self.scheme == DerivativeScheme::Up3;
        let mut dpos = vec![0.0; nvel * nx];
        let mut dneg = if upwind {
            vec![0.0; nvel * nx]
        } else {
            Vec::new()
        };
        let mut fbuf = Vec::new();
        let mut speed = vec![0.0; nx];
        // Both upwind directions are formed for whole x-blocks and selected pointwise.
        for axis in 0..2 {
            let (nv, dv, stride, lines, offset): (usize, f64, usize, usize, usize) = if axis == 0 {
                (n1, self.g1.dv(), n2 * nx, n2, nx)
            } else {
                (n2, self.g2.dv(), nx, n1, n2 * nx)
            };
            for l in 0..lines {
                let off = l * offset;
                derivative_blocks(
                    self.scheme,
                    dv,
                    1.0,
                    nv,
                    nx,
                    stride,
                    &f[off..],
                    &mut dpos[off..],
                    &mut fbuf,
                );
                if upwind {
                    derivative_blocks(
                        self.scheme,
                        dv,
                        -1.0,
                        nv,
                        nx,
                        stride,
                        &f[off..],
                        &mut dneg[off..],
                        &mut fbuf,
                    );
                }
                for q in 0..nv {
                    let (j1, j2) = if axis == 0 { (q, l) } else { (l, q) };
                    if axis == 0 {
                        let v2 = self.g2.node(j2);
                        speed
                            .iter_mut()
                            .zip(&e1)
                            .zip(&b)
                            .for_each(|((s, e), b)| *s = e + v2 * b);
                    } else {
                        let v1 = self.g1.node(j1);
                        speed
                            .iter_mut()
                            .zip(&e2)
                            .zip(&b)
                            .for_each(|((s, e), b)| *s = e - v1 * b);
                    }
                    let base = (j2 + n2 * j1) * nx;
                    for i in 0..nx {
                        let sp = speed[i];
                        let d = if upwind && sp < 0.0 {
                            dneg[base + i]
                        } else {
                            dpos[base + i]
                        };
                        rhs[base + i] -= sp * d;
                    }
                }
            }
        }
        let mut out = self.zeros();
        for c in 0..nvel {
            let spec = self.to_spectral(&rhs[c * nx..(c + 1) * nx]);
            out.f[c * nx..(c + 1) * nx].copy_from_slice(&spec);
        }
        Ok(out)
    }
}

impl KineticModel for FourierVm {
    fn observables(&self, u: &FourierState) -> Observables {
        let e1 = self.field_integral(&u.e1);
        let e2 = self.field_integral(&u.e2);
        let b = self.field_integral(&u.b);
        let kin = self.kinetic_energy(u);
        let nx = self.nx;
        let mass = (0..self.nvel()).map(|c| u.f[c * nx].re).sum::<f64>()
            * self.length
            * self.cell_weight();
        Observables {
            electric_energy: (e1 + e2).sqrt(),
            magnetic_energy: b.sqrt(),
            total_energy: kin + e1 + e2 + b,
            kinetic_energy: kin,
            mass,
            poisson_residual: self.poisson_residual(u),
            e1_l2: e1.sqrt(),
            e2_l2: e2.sqrt(),
            b_l2: b.sqrt(),
        }
    }

    fn kinetic_energy(&self, u: &FourierState) -> f64 {
        let n2 = self.g2.len();
        let nx = self.nx;
        let mut s = 0.0;
        for j1 in 0..self.g1.len() {
            let v1 = self.g1.node(j1);
            for j2 in 0..n2 {
                let v2 = self.g2.node(j2);
                s += (v1 * v1 + v2 * v2) * u.f[(j2 + n2 * j1) * nx].re;
            }
        }
        s * self.length * self.cell_weight()
    }

    fn field_energy(&self, u: &FourierState) -> f64 {
        self.field_integral(&u.e1) + self.field_integral(&u.e2) + self.field_integral(&u.b)
    }

    fn mean_profile_direction(&self, u: &FourierState) -> FourierState {
        let n2 = self.g2.len();
        let nx = self.nx;
        let m: Vec<f64> = (0..self.nvel()).map(|c| u.f[c * nx].re).collect();
        let v2: Vec<f64> = (0..self.nvel())
            .map(|c| {
                let a = self.g1.node(c / n2);
                let b = self.g2.node(c % n2);
                a * a + b * b
            })
            .collect();
        let w = mean_profile_weights(&v2, &m);
        let mut d = self.zeros();
        for (c, wc) in w.iter().enumerate() {
            d.f[c * nx] = c64::new(*wc, 0.0);
        }
        d
    }

    fn is_finite(&self, u: &FourierState) -> bool {
        [&u.f, &u.b, &u.e1, &u.e2]
            .iter()
            .all(|v| v.iter().all(|c| c.re.is_finite() && c.im.is_finite()))
    }
}
