//! Time series of observables, growth-rate fitting, convergence orders and
//! the energy-correction post-step.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lawson::LinearSpace;
use crate::models::{KineticModel, Observables};

/// Header of the main time-series CSV.
pub const SERIES_HEADER: &str =
    "t,electric_energy,magnetic_energy,total_energy,mass,poisson_residual";
/// Header of the per-component field CSV.
pub const FIELDS_HEADER: &str = "t,e1_l2,e2_l2,b_l2,kinetic_energy";
/// Header of convergence tables.
pub const ORDER_HEADER: &str = "h,error_linf,order_linf,error_l2,order_l2";

/// Named scalar channels recorded over time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Channel {
    ElectricEnergy,
    MagneticEnergy,
    TotalEnergy,
    Mass,
    PoissonResidual,
    E1,
    E2,
    B,
    KineticEnergy,
}

impl Channel {
    pub fn of(&self, o: &Observables) -> f64 {
        match self {
            Channel::ElectricEnergy => o.electric_energy,
            Channel::MagneticEnergy => o.magnetic_energy,
            Channel::TotalEnergy => o.total_energy,
            Channel::Mass => o.mass,
            Channel::PoissonResidual => o.poisson_residual,
            Channel::E1 => o.e1_l2,
            Channel::E2 => o.e2_l2,
            Channel::B => o.b_l2,
            Channel::KineticEnergy => o.kinetic_energy,
        }
    }
}

/// Observables sampled at strictly increasing times.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TimeSeries {
    times: Vec<f64>,
    records: Vec<Observables>,
}

fn g17(x: f64) -> String {
    format!("{x:.16e}")
}

impl TimeSeries {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, t: f64, o: Observables) -> Result<()> {
        if let Some(&last) = self.times.last() {
            if !(t > last) {
                return Err(Error::Shape(format!(
                    "sample time {t} does not follow {last}"
                )));
            }
        }
        self.times.push(t);
        self.records.push(o);
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn records(&self) -> &[Observables] {
        &self.records
    }

    pub fn channel(&self, c: Channel) -> Vec<f64> {
        self.records.iter().map(|o| c.of(o)).collect()
    }

    /// `max_t |c(t) - c(0)| / |c(0)|`.
    pub fn max_relative_drift(&self, c: Channel) -> f64 {
        let v = self.channel(c);
        let Some(&v0) = v.first() else { return 0.0 };
        let d = v.iter().fold(0.0f64, |m, x| m.max((x - v0).abs()));
        if v0 != 0.0 {
            d / v0.abs()
        } else {
            d
        }
    }

    pub fn max_of(&self, c: Channel) -> f64 {
        self.channel(c)
            .into_iter()
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SERIES_HEADER}")?;
        for (t, o) in self.times.iter().zip(&self.records) {
            writeln!(
                w,
                "{},{},{},{},{},{}",
                g17(*t),
                g17(o.electric_energy),
                g17(o.magnetic_energy),
                g17(o.total_energy),
                g17(o.mass),
                g17(o.poisson_residual)
            )?;
        }
        Ok(())
    }

    pub fn write_fields_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{FIELDS_HEADER}")?;
        for (t, o) in self.times.iter().zip(&self.records) {
            writeln!(
                w,
                "{},{},{},{},{}",
                g17(*t),
                g17(o.e1_l2),
                g17(o.e2_l2),
                g17(o.b_l2),
                g17(o.kinetic_energy)
            )?;
        }
        Ok(())
    }
}

/// How the growth rate is extracted from a channel.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitMethod {
    /// Least squares on every sample in the window.
    #[default]
    LeastSquares,
    /// Least squares on the local maxima only (for oscillating channels).
    Peaks,
}

/// Fitted exponential rate of a channel.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub rate: f64,
    pub window: [f64; 2],
    pub r_squared: f64,
    pub points: usize,
}

fn linear_fit(t: &[f64], y: &[f64]) -> (f64, f64) {
    let n = t.len() as f64;
    let tm = t.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxy: f64 = t.iter().zip(y).map(|(a, b)| (a - tm) * (b - ym)).sum();
    let sxx: f64 = t.iter().map(|a| (a - tm) * (a - tm)).sum();
    let syy: f64 = y.iter().map(|b| (b - ym) * (b - ym)).sum();
    let slope = sxy / sxx;
    let r2 = if syy > 0.0 {
        (sxy * sxy / (sxx * syy)).clamp(0.0, 1.0)
    } else {
        1.0
    };
    (slope, r2)
}

/// Slope of `log(channel)` against `t` over `window`.
pub fn fit_rate(
    series: &TimeSeries,
    channel: Channel,
    window: [f64; 2],
    method: FitMethod,
) -> Result<RateFit> {
    fit_rate_samples(series.times(), &series.channel(channel), window, method)
}

pub fn fit_rate_samples(
    times: &[f64],
    values: &[f64],
    window: [f64; 2],
    method: FitMethod,
) -> Result<RateFit> {
    if !(window[0] < window[1]) {
        return Err(Error::Config(format!(
            "empty fit window [{}, {}]",
            window[0], window[1]
        )));
    }
    let idx: Vec<usize> = (0..times.len())
        .filter(|&i| times[i] >= window[0] && times[i] <= window[1])
        .collect();
    if let Some(&i) = idx.iter().find(|&&i| !(values[i] > 0.0)) {
        return Err(Error::Numerical(format!(
            "channel is not positive at t = {}",
            times[i]
        )));
    }
    let sel: Vec<usize> = match method {
        FitMethod::LeastSquares => idx,
        FitMethod::Peaks => idx
            .iter()
            .copied()
            .filter(|&i| {
                i > 0
                    && i + 1 < values.len()
                    && values[i] > values[i - 1]
                    && values[i] >= values[i + 1]
            })
            .collect(),
    };
    if sel.len() < 2 {
        return Err(Error::Numerical(format!(
            "only {} usable samples in the fit window",
            sel.len()
        )));
    }
    let t: Vec<f64> = sel.iter().map(|&i| times[i]).collect();
    let y: Vec<f64> = sel.iter().map(|&i| values[i].ln()).collect();
    let (rate, r_squared) = linear_fit(&t, &y);
    Ok(RateFit {
        rate,
        window,
        r_squared,
        points: sel.len(),
    })
}

/// Observed orders `log(e_i / e_{i+1}) / log(h_i / h_{i+1})` between consecutive runs.
pub fn convergence_orders(runs: &[(f64, f64)]) -> Result<Vec<f64>> {
    if runs.len() < 2 {
        return Err(Error::Config(
            "a convergence study needs at least two runs".into(),
        ));
    }
    runs.windows(2)
        .map(|w| {
            let ((h0, e0), (h1, e1)) = (w[0], w[1]);
            if !(e0 > 0.0 && e1 > 0.0) {
                return Err(Error::Numerical("errors must be positive".into()));
            }
            if h0 == h1 || !(h0 > 0.0 && h1 > 0.0) {
                return Err(Error::Config(format!(
                    "degenerate mesh sizes {h0} and {h1}"
                )));
            }
            Ok((e0 / e1).ln() / (h0 / h1).ln())
        })
        .collect()
}

/// One row of a convergence table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OrderRow {
    pub h: f64,
    pub error_linf: f64,
    pub order_linf: Option<f64>,
    pub error_l2: f64,
    pub order_l2: Option<f64>,
}

/// Builds the table from `(h, linf, l2)` triples.
pub fn order_table(runs: &[(f64, f64, f64)]) -> Result<Vec<OrderRow>> {
    let li: Vec<(f64, f64)> = runs.iter().map(|r| (r.0, r.1)).collect();
    let l2: Vec<(f64, f64)> = runs.iter().map(|r| (r.0, r.2)).collect();
    let oi = convergence_orders(&li)?;
    let o2 = convergence_orders(&l2)?;
    Ok(runs
        .iter()
        .enumerate()
        .map(|(i, r)| OrderRow {
            h: r.0,
            error_linf: r.1,
            order_linf: (i > 0).then(|| oi[i - 1]),
            error_l2: r.2,
            order_l2: (i > 0).then(|| o2[i - 1]),
        })
        .collect())
}

pub fn write_order_table<W: Write>(rows: &[OrderRow], mut w: W) -> std::io::Result<()> {
    writeln!(w, "{ORDER_HEADER}")?;
    let o = |x: Option<f64>| x.map(g17).unwrap_or_default();
    for r in rows {
        writeln!(
            w,
            "{},{},{},{},{}",
            g17(r.h),
            g17(r.error_linf),
            o(r.order_linf),
            g17(r.error_l2),
            o(r.order_l2)
        )?;
    }
    Ok(())
}

/// Strategy that restores the total energy after each step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnergyCorrection {
    /// Adds a multiple of a mass-free, spatially uniform velocity profile. Leaves
    /// the fields, the mass and the Gauss law untouched.
    #[default]
    MeanProfile,
    /// Rescales the whole state by the positive `l` with `l K + l^2 W = H_target`.
    GlobalScale,
}

/// Result of one correction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CorrectionOutcome {
    /// Profile coefficient or `l - 1`, depending on the strategy.
    pub magnitude: f64,
    pub energy_before: f64,
}

/// Moves `u` onto the energy level `h_target`.
pub fn energy_correction<M: KineticModel>(
    model: &M,
    u: &mut M::State,
    h_target: f64,
    method: EnergyCorrection,
) -> Result<CorrectionOutcome> {
    if !(h_target > 0.0) {
        return Err(Error::Numerical(format!(
            "target energy must be positive, got {h_target}"
        )));
    }
    let k = model.kinetic_energy(u);
    let w = model.field_energy(u);
    let h = k + w;
    if !(h > 0.0) {
        return Err(Error::Numerical(format!(
            "current energy must be positive, got {h}"
        )));
    }
    match method {
        EnergyCorrection::MeanProfile => {
            let d = model.mean_profile_direction(u);
            let kd = model.kinetic_energy(&d);
            if !(kd.abs() > 0.0) || !kd.is_finite() {
                return Err(Error::Numerical(
                    "energy correction direction carries no energy".into(),
                ));
            }
            let mu = (h_target - h) / kd;
            u.axpy(mu, &d);
            Ok(CorrectionOutcome {
                magnitude: mu,
                energy_before: h,
            })
        }
        EnergyCorrection::GlobalScale => {
            let lambda = if w > 0.0 {
                let disc = k * k + 4.0 * w * h_target;
                // Stable form of the positive root of w l^2 + k l - h = 0.
                if k >= 0.0 {
                    2.0 * h_target / (k + disc.sqrt())
                } else {
                    (-k + disc.sqrt()) / (2.0 * w)
                }
            } else if k > 0.0 {
                h_target / k
            } else {
                return Err(Error::Numerical(
                    "no positive rescaling reaches the target energy".into(),
                ));
            };
            u.scale(lambda);
            Ok(CorrectionOutcome {
                magnitude: lambda - 1.0,
                energy_before: h,
            })
        }
    }
}
