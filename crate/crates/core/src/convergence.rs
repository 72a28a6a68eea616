//! Convergence sweeps for the periodic transport problem.

use std::f64::consts::PI;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dg_core::FluxKind;
use crate::diagnostics::{order_table, OrderRow};
use crate::error::{Error, Result};
use crate::lawson::{lawson_step, ButcherTableau, LawsonModel};
use crate::models::transport2d::{Transport2d, Transport2dParams};
use crate::models::Slab;
use crate::phase_space::DerivativeScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Space,
    Velocity,
    Time,
}

impl FromStr for SweepAxis {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "space" => Ok(SweepAxis::Space),
            "velocity" => Ok(SweepAxis::Velocity),
            "time" => Ok(SweepAxis::Time),
            _ => Err(Error::Config(format!(
                "invalid sweep axis '{s}' (expected space, velocity or time)"
            ))),
        }
    }
}

/// One sweep: the varied values and the fixed companions.
#[derive(Debug, Clone, PartialEq)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub degree: usize,
    pub flux: FluxKind,
    pub scheme: DerivativeScheme,
    pub tableau: ButcherTableau,
    pub t_final: f64,
    /// Cells for velocity and time sweeps.
    pub nx: usize,
    /// Velocity nodes for space and time sweeps.
    pub nv: usize,
    /// Step for space and velocity sweeps.
    pub dt: f64,
    /// Values of the varied parameter (cell counts, node counts or steps).
    pub values: Vec<f64>,
    /// Step of the reference solution for the time sweep.
    pub reference_dt: f64,
}

impl Sweep {
    /// Space sweep: `N_x = 10..160`, `N_v = 320`, `dt = 0.01`.
    pub fn space(degree: usize, flux: FluxKind) -> Self {
        Self {
            axis: SweepAxis::Space,
            degree,
            flux,
            scheme: DerivativeScheme::Cd4,
            tableau: ButcherTableau::ssp_rk33(),
            t_final: 1.0,
            nx: 0,
            nv: 320,
            dt: 0.01,
            values: vec![10.0, 20.0, 40.0, 80.0, 160.0],
            reference_dt: 0.0,
        }
    }

    /// Velocity sweep: `N_v = 8..128`, P5 with `N_x = 32`, `dt = 0.01`.
    pub fn velocity() -> Self {
        Self {
            axis: SweepAxis::Velocity,
            degree: 5,
            flux: FluxKind::Central,
            scheme: DerivativeScheme::Cd4,
            tableau: ButcherTableau::ssp_rk33(),
            t_final: 1.0,
            nx: 32,
            nv: 0,
            dt: 0.01,
            values: vec![8.0, 16.0, 32.0, 64.0, 128.0],
            reference_dt: 0.0,
        }
    }

    /// Time sweep: `dt = 0.1 .. 0.00625`, P5 with `N_x = 16`, `N_v = 32`, reference `dt = 1e-4`.
    pub fn time() -> Self {
        Self {
            axis: SweepAxis::Time,
            degree: 5,
            flux: FluxKind::Central,
            scheme: DerivativeScheme::Cd4,
            tableau: ButcherTableau::ssp_rk33(),
            t_final: 1.0,
            nx: 16,
            nv: 32,
            dt: 0.0,
            values: vec![0.1, 0.05, 0.025, 0.0125, 0.00625],
            reference_dt: 1e-4,
        }
    }

    pub fn for_axis(axis: SweepAxis, degree: usize, flux: FluxKind) -> Self {
        match axis {
            SweepAxis::Space => Self::space(degree, flux),
            SweepAxis::Velocity => Self::velocity(),
            SweepAxis::Time => Self::time(),
        }
    }
}

fn steps_for(t: f64, dt: f64) -> Result<usize> {
    let n = (t / dt).round() as usize;
    if n == 0 || (n as f64 * dt - t).abs() > 1e-9 * t {
        return Err(Error::Config(format!(
            "final time {t} is not a whole number of steps of {dt}"
        )));
    }
    Ok(n)
}

/// Advances the transport model from its projected initial data to `t_final`.
pub fn run_transport(
    p: Transport2dParams,
    tableau: &ButcherTableau,
    t_final: f64,
) -> Result<(Transport2d, Slab)> {
    let m = Transport2d::new(p, tableau)?;
    let mut u = m.initial_state();
    for _ in 0..steps_for(t_final, p.dt)? {
        u = lawson_step(&m, tableau, &u, m.dt())?;
    }
    Ok((m, u))
}

/// Runs the sweep and returns the error/order table.
pub fn run_convergence(s: &Sweep) -> Result<Vec<OrderRow>> {
    let params = |cells: usize, nv: usize, dt: f64| Transport2dParams {
        cells,
        degree: s.degree,
        nv,
        flux: s.flux,
        scheme: s.scheme,
        dt,
        linear_only: false,
    };
    let t = s.t_final;
    let mut runs = Vec::with_capacity(s.values.len());
    match s.axis {
        SweepAxis::Space | SweepAxis::Velocity => {
            for &val in &s.values {
                let n = val as usize;
                let (p, h) = match s.axis {
                    SweepAxis::Space => (params(n, s.nv, s.dt), 2.0 * PI / n as f64),
                    _ => (params(s.nx, n, s.dt), 2.0 * PI / n as f64),
                };
                let (m, u) = run_transport(p, &s.tableau, t)?;
                let (li, l2) = m.error_norms(&u, |x, v| Transport2d::exact(x, v, t));
                runs.push((h, li, l2));
            }
        }
        SweepAxis::Time => {
            let (m, reference) = run_transport(params(s.nx, s.nv, s.reference_dt), &s.tableau, t)?;
            for &dt in &s.values {
                let (_, mut u) = run_transport(params(s.nx, s.nv, dt), &s.tableau, t)?;
                u.data
                    .iter_mut()
                    .zip(&reference.data)
                    .for_each(|(a, b)| *a -= b);
                let (li, l2) = m.error_norms(&u, |_, _| 0.0);
                runs.push((dt, li, l2));
            }
        }
    }
    order_table(&runs)
}
