//! Velocity grids, conservative finite-difference velocity derivatives and the
//! DG field multipliers used by the nonlinear force terms.

use faer::linalg::solvers::DenseSolveCore;
use faer::Mat;
use serde::{Deserialize, Serialize};

use crate::dg_core::{mass_matrix, monomial_integral, DgSpace};
use crate::error::{Error, Result};

/// Uniform velocity grid `v_j = -v_max + j dv`, `j = 0..n`, `dv = 2 v_max / n`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocityGrid {
    v_max: f64,
    n: usize,
    dv: f64,
}

impl VelocityGrid {
    pub fn new(v_max: f64, n: usize) -> Result<Self> {
        if !(v_max > 0.0) || !v_max.is_finite() {
            return Err(Error::Config(format!(
                "v_max must be positive, got {v_max}"
            )));
        }
        if n < 2 {
            return Err(Error::Config(format!(
                "need at least 2 velocity nodes, got {n}"
            )));
        }
        Ok(Self {
            v_max,
            n,
            dv: 2.0 * v_max / n as f64,
        })
    }

    /// Grid on a periodic interval `[lo, lo + len)` with nodes `lo + j dv`.
    pub fn periodic(lo: f64, len: f64, n: usize) -> Result<Self> {
        let g = Self::new(0.5 * len, n)?;
        Ok(Self { v_max: -lo, ..g })
    }

    pub fn v_max(&self) -> f64 {
        self.v_max
    }
    pub fn len(&self) -> usize {
        self.n
    }
    pub fn is_empty(&self) -> bool {
        self.n == 0
    }
    pub fn dv(&self) -> f64 {
        self.dv
    }
    pub fn node(&self, j: usize) -> f64 {
        -self.v_max + j as f64 * self.dv
    }
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|j| self.node(j)).collect()
    }
}

/// Finite-difference approximation of the velocity derivative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DerivativeScheme {
    /// Second-order central differences.
    Cd2,
    /// Fourth-order central differences.
    Cd4,
    /// Third-order upwind-biased differences.
    Up3,
}

impl DerivativeScheme {
    /// Interior point stencil `(offset, weight)`; multiply by `1/dv`. Upwind stencils assume a positive speed.
    pub fn stencil(&self) -> &'static [(isize, f64)] {
        match self {
            DerivativeScheme::Cd2 => &[(-1, -0.5), (1, 0.5)],
            DerivativeScheme::Cd4 => &[
                (-2, 1.0 / 12.0),
                (-1, -8.0 / 12.0),
                (1, 8.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
            DerivativeScheme::Up3 => &[(-2, 1.0 / 6.0), (-1, -1.0), (0, 0.5), (1, 1.0 / 3.0)],
        }
    }

    /// Interface flux weights for `F_{j+1/2}` relative to node `j`.
    fn flux(&self, positive: bool) -> &'static [(isize, f64)] {
        match (self, positive) {
            (DerivativeScheme::Cd2, _) => &CD2_FLUX,
            (DerivativeScheme::Cd4, _) => &[
                (-1, -1.0 / 12.0),
                (0, 7.0 / 12.0),
                (1, 7.0 / 12.0),
                (2, -1.0 / 12.0),
            ],
            (DerivativeScheme::Up3, true) => &[(-1, -1.0 / 6.0), (0, 5.0 / 6.0), (1, 1.0 / 3.0)],
            (DerivativeScheme::Up3, false) => &[(0, 1.0 / 3.0), (1, 5.0 / 6.0), (2, -1.0 / 6.0)],
        }
    }
}

const CD2_FLUX: [(isize, f64); 2] = [(0, 0.5), (1, 0.5)];

/// Conservative derivative along one velocity axis, written in flux form
/// `(F_{j+1/2} - F_{j-1/2}) / dv` with zero flux through both grid ends.
///
/// Node `j` occupies `src[j*stride .. j*stride + blk]`. Interior fluxes read
/// zero ghost values outside the grid, except the upwind scheme which falls
/// back to the two-point central flux where its stencil would leave the grid.
/// `speed` selects the upwind direction and is ignored by central schemes.
#[allow(clippy::too_many_arguments)]
pub fn derivative_blocks(
    scheme: DerivativeScheme,
    dv: f64,
    speed: f64,
    nv: usize,
    blk: usize,
    stride: usize,
    src: &[f64],
    dst: &mut [f64],
    flux_buf: &mut Vec<f64>,
) {
    let positive = speed >= 0.0;
    let w = scheme.flux(positive);
    let inv = 1.0 / dv;
    for j in 0..nv {
        dst[j * stride..j * stride + blk]
            .iter_mut()
            .for_each(|x| *x = 0.0);
    }
    flux_buf.resize(blk, 0.0);
    for j in 0..nv.saturating_sub(1) {
        let fits = w.iter().all(|&(o, _)| {
            let q = j as isize + o;
            q >= 0 && (q as usize) < nv
        });
        let weights: &[(isize, f64)] = if scheme == DerivativeScheme::Up3 && !fits {
            &CD2_FLUX
        } else {
            w
        };
        flux_buf.iter_mut().for_each(|x| *x = 0.0);
        for &(o, c) in weights {
            let q = j as isize + o;
            if q < 0 || q as usize >= nv {
                continue;
            }
            let s = &src[q as usize * stride..q as usize * stride + blk];
            for (f, &x) in flux_buf.iter_mut().zip(s) {
                *f += c * x;
            }
        }
        let (lo, hi) = dst.split_at_mut((j + 1) * stride);
        let left = &mut lo[j * stride..j * stride + blk];
        let right = &mut hi[..blk];
        for ((l, r), &f) in left.iter_mut().zip(right.iter_mut()).zip(flux_buf.iter()) {
            *l += f * inv;
            *r -= f * inv;
        }
    }
}

/// Derivative of point samples over the grid (positive speed for the upwind scheme).
pub fn apply_derivative(
    grid: &VelocityGrid,
    scheme: DerivativeScheme,
    samples: &[f64],
) -> Vec<f64> {
    apply_derivative_directed(grid, scheme, 1.0, samples)
}

pub fn apply_derivative_directed(
    grid: &VelocityGrid,
    scheme: DerivativeScheme,
    speed: f64,
    samples: &[f64],
) -> Vec<f64> {
    assert_eq!(
        samples.len(),
        grid.len(),
        "sample count must match the grid"
    );
    let mut out = vec![0.0; samples.len()];
    let mut buf = Vec::new();
    derivative_blocks(
        scheme,
        grid.dv(),
        speed,
        grid.len(),
        1,
        1,
        samples,
        &mut out,
        &mut buf,
    );
    out
}

/// Dense matrix of the derivative operator (for tests and diagnostics).
pub fn derivative_matrix(grid: &VelocityGrid, scheme: DerivativeScheme, speed: f64) -> Mat<f64> {
    let n = grid.len();
    let mut m = Mat::<f64>::zeros(n, n);
    let mut e = vec![0.0; n];
    for c in 0..n {
        e.iter_mut().for_each(|x| *x = 0.0);
        e[c] = 1.0;
        let d = apply_derivative_directed(grid, scheme, speed, &e);
        for r in 0..n {
            m[(r, c)] = d[r];
        }
    }
    m
}

/// Periodic fourth-order central derivative (row-wise over a periodic axis).
pub fn periodic_cd4(samples: &[f64], dv: f64, out: &mut [f64]) {
    let n = samples.len();
    let c = 1.0 / (12.0 * dv);
    for j in 0..n {
        let p1 = samples[(j + 1) % n];
        let p2 = samples[(j + 2) % n];
        let m1 = samples[(j + n - 1) % n];
        let m2 = samples[(j + n - 2) % n];
        out[j] = (8.0 * (p1 - m1) - (p2 - m2)) * c;
    }
}

/// Block-diagonal DG multiplication operator `u -> (dx M)^{-1} (E u, xi^l)` on every cell.
#[derive(Debug, Clone)]
pub struct FieldMultiplier {
    nl: usize,
    blocks: Vec<f64>,
}

/// Reference products `M^{-1} T_n` with `(T_n)_{l,m} = int s^(n+m+l) ds`.
#[derive(Debug, Clone)]
pub struct MultiplierTemplate {
    nl: usize,
    mats: Vec<f64>,
}

impl MultiplierTemplate {
    pub fn new(k: usize) -> Self {
        let nl = k + 1;
        let minv = mass_matrix(k).partial_piv_lu().inverse();
        let mut mats = vec![0.0; nl * nl * nl];
        for n in 0..nl {
            for l in 0..nl {
                for m in 0..nl {
                    let v: f64 = (0..nl)
                        .map(|q| minv[(l, q)] * monomial_integral(n + m + q))
                        .sum();
                    mats[(n * nl + l) * nl + m] = v;
                }
            }
        }
        Self { nl, mats }
    }

    /// Multiplier of the field with coefficients `e`.
    pub fn build(&self, e: &[f64]) -> FieldMultiplier {
        let nl = self.nl;
        let cells = e.len() / nl;
        let mut blocks = vec![0.0; cells * nl * nl];
        for c in 0..cells {
            let b = &mut blocks[c * nl * nl..(c + 1) * nl * nl];
            for n in 0..nl {
                let en = e[c * nl + n];
                if en == 0.0 {
                    continue;
                }
                let t = &self.mats[n * nl * nl..(n + 1) * nl * nl];
                for (bi, ti) in b.iter_mut().zip(t) {
                    *bi += en * ti;
                }
            }
        }
        FieldMultiplier { nl, blocks }
    }
}

pub fn build_field_multiplier(space: &DgSpace, e: &[f64]) -> Result<FieldMultiplier> {
    if e.len() != space.ndof() {
        return Err(Error::Shape("field does not match the DG space".into()));
    }
    Ok(MultiplierTemplate::new(space.degree()).build(e))
}

impl FieldMultiplier {
    /// Block `(l, m)` entry on cell `c`.
    pub fn entry(&self, c: usize, l: usize, m: usize) -> f64 {
        self.blocks[(c * self.nl + l) * self.nl + m]
    }

    pub fn cells(&self) -> usize {
        self.blocks.len() / (self.nl * self.nl)
    }

    /// `out += scale * Etilde x`.
    pub fn apply_add(&self, scale: f64, x: &[f64], out: &mut [f64]) {
        let nl = self.nl;
        for c in 0..self.cells() {
            let b = &self.blocks[c * nl * nl..(c + 1) * nl * nl];
            let xc = &x[c * nl..(c + 1) * nl];
            let oc = &mut out[c * nl..(c + 1) * nl];
            for l in 0..nl {
                let row = &b[l * nl..(l + 1) * nl];
                let s: f64 = row.iter().zip(xc).map(|(a, b)| a * b).sum();
                oc[l] += scale * s;
            }
        }
    }
}
