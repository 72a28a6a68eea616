//! Builds a model from a configuration, advances it and records diagnostics.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{ModelKind, ScenarioConfig, ScenarioKind};
use crate::dg_core::{eval_local, DgSpace};
use crate::diagnostics::{
    energy_correction, fit_rate, Channel, EnergyCorrection, RateFit, TimeSeries,
};
use crate::error::{Error, Result};
use crate::lawson::{lawson_step, ButcherTableau, LawsonModel};
use crate::models::fourier_vm::FourierParams;
use crate::models::transport2d::Transport2dParams;
use crate::models::vlasov_ampere::VaParams;
use crate::models::vlasov_maxwell::VmParams;
use crate::models::{
    FourierVm, KineticModel, Observables, Slab, Transport2d, VlasovAmpere, VlasovMaxwell,
};

/// Initial distribution `f0(x, v1, v2)` of a kinetic scenario.
pub fn initial_distribution(cfg: &ScenarioConfig) -> impl Fn(f64, f64, f64) -> f64 {
    let p = cfg.physics.clone();
    let kind = cfg.scenario;
    move |x, v1, v2| {
        let pert = 1.0 + p.alpha * (p.k_wave * x).cos();
        let tau = 2.0 * std::f64::consts::PI;
        match kind {
            ScenarioKind::Landau => (-0.5 * v1 * v1).exp() / tau.sqrt() * pert,
            ScenarioKind::TwoStream => v1 * v1 * (-0.5 * v1 * v1).exp() / tau.sqrt() * pert,
            ScenarioKind::Weibel => {
                let (s1, s2) = (p.sigma1, p.sigma2);
                (-0.5 * (v1 * v1 / (s1 * s1) + v2 * v2 / (s2 * s2))).exp() / (tau * s1 * s2) * pert
            }
            ScenarioKind::StreamingWeibel => {
                let s2 = p.sigma1 * p.sigma1;
                let g = |c: f64| (-(v2 - c) * (v2 - c) / (2.0 * s2)).exp();
                (-v1 * v1 / (2.0 * s2)).exp() / (tau * s2)
                    * (p.delta * g(p.v01) + (1.0 - p.delta) * g(p.v02))
                    * pert
            }
            ScenarioKind::Custom => (x + v1).sin(),
        }
    }
}

/// Initial magnetic field `beta cos(k x)`.
pub fn initial_magnetic(cfg: &ScenarioConfig) -> impl Fn(f64) -> f64 {
    let (b, k) = (cfg.physics.beta, cfg.physics.k_wave);
    move |x| b * (k * x).cos()
}

/// A model, its state and the step bookkeeping.
#[derive(Debug, Clone)]
pub struct Stepper<M: LawsonModel> {
    pub model: M,
    pub state: M::State,
    pub tableau: ButcherTableau,
    pub time: f64,
    pub steps: usize,
    pub correction: Option<EnergyCorrection>,
    pub energy_target: f64,
    pub last_correction: f64,
}

impl<M: LawsonModel> Stepper<M> {
    fn new(model: M, state: M::State, tableau: ButcherTableau) -> Self {
        Self {
            model,
            state,
            tableau,
            time: 0.0,
            steps: 0,
            correction: None,
            energy_target: 0.0,
            last_correction: 0.0,
        }
    }

    fn advance(&mut self, finite: impl Fn(&M, &M::State) -> bool) -> Result<()> {
        let dt = self.model.dt();
        let next = lawson_step(&self.model, &self.tableau, &self.state, dt)?;
        if !finite(&self.model, &next) {
            return Err(Error::Numerical(format!(
                "non-finite values after step {}; last good time t = {}",
                self.steps + 1,
                self.time
            )));
        }
        self.state = next;
        self.steps += 1;
        self.time = self.steps as f64 * dt;
        Ok(())
    }
}

impl<M: KineticModel> Stepper<M> {
    fn kinetic_step(&mut self) -> Result<()> {
        self.advance(|m, u| m.is_finite(u))?;
        if let Some(method) = self.correction {
            let out = energy_correction(&self.model, &mut self.state, self.energy_target, method)?;
            self.last_correction = out.magnitude;
        }
        Ok(())
    }

    fn enable_correction(&mut self, method: EnergyCorrection) {
        let o = self.model.observables(&self.state);
        self.correction = Some(method);
        self.energy_target = o.total_energy;
    }
}

/// Any of the supported models together with its state.
#[derive(Debug, Clone)]
pub enum Simulation {
    Transport(Stepper<Transport2d>),
    Ampere(Stepper<VlasovAmpere>),
    MaxwellDg(Stepper<VlasovMaxwell>),
    MaxwellFourier(Stepper<FourierVm>),
}

macro_rules! each {
    ($s:expr, $r:ident => $e:expr) => {
        match $s {
            Simulation::Transport($r) => $e,
            Simulation::Ampere($r) => $e,
            Simulation::MaxwellDg($r) => $e,
            Simulation::MaxwellFourier($r) => $e,
        }
    };
}

fn transport_observables(m: &Transport2d, u: &Slab) -> Observables {
    let n = m.l2_norm(u);
    let dv = m.grid().dv();
    let mass = (0..u.cols)
        .map(|j| crate::dg_core::integral(m.space(), u.col(j)))
        .sum::<f64>()
        * dv;
    Observables {
        total_energy: n * n,
        mass,
        ..Default::default()
    }
}

impl Simulation {
    pub fn from_config(cfg: &ScenarioConfig) -> Result<Self> {
        cfg.validate()?;
        let n = &cfg.numerics;
        let tab = cfg.tableau()?;
        let len = cfg.length();
        let f0 = initial_distribution(cfg);
        let mut sim = match cfg.model {
            ModelKind::Transport2d => {
                if n.energy_correction {
                    return Err(Error::Config(
                        "energy correction applies to kinetic models only".into(),
                    ));
                }
                let p = Transport2dParams {
                    cells: n.nx,
                    degree: n.degree,
                    nv: n.nv[0],
                    flux: n.flux,
                    scheme: n.velocity_scheme,
                    dt: n.dt,
                    linear_only: false,
                };
                let m = Transport2d::new(p, &tab)?;
                let u = m.initial_state();
                Simulation::Transport(Stepper::new(m, u, tab))
            }
            ModelKind::VlasovAmpere => {
                let p = VaParams {
                    cells: n.nx,
                    degree: n.degree,
                    length: len,
                    nv: n.nv[0],
                    v_max: n.v_max[0],
                    scheme: n.velocity_scheme,
                    dt: n.dt,
                };
                let m = VlasovAmpere::new(p, &tab)?;
                let u = m.initial_state(|x, v| f0(x, v, 0.0));
                Simulation::Ampere(Stepper::new(m, u, tab))
            }
            ModelKind::VlasovMaxwellDg => {
                let p = VmParams {
                    cells: n.nx,
                    degree: n.degree,
                    length: len,
                    nv: [n.nv[0], n.nv[1]],
                    v_max: [n.v_max[0], n.v_max[1]],
                    scheme: n.velocity_scheme,
                    dt: n.dt,
                };
                let m = VlasovMaxwell::new(p, &tab)?;
                let u = m.initial_state(&f0, initial_magnetic(cfg));
                Simulation::MaxwellDg(Stepper::new(m, u, tab))
            }
            ModelKind::VlasovMaxwellFourier => {
                let p = FourierParams {
                    nx: n.nx,
                    length: len,
                    nv: [n.nv[0], n.nv[1]],
                    v_max: [n.v_max[0], n.v_max[1]],
                    scheme: n.velocity_scheme,
                    dt: n.dt,
                };
                let m = FourierVm::new(p, &tab)?;
                let u = m.initial_state(&f0, initial_magnetic(cfg));
                Simulation::MaxwellFourier(Stepper::new(m, u, tab))
            }
        };
        if n.energy_correction {
            sim.enable_correction(n.correction_method);
        }
        Ok(sim)
    }

    pub fn enable_correction(&mut self, method: EnergyCorrection) {
        match self {
            Simulation::Transport(_) => {}
            Simulation::Ampere(s) => s.enable_correction(method),
            Simulation::MaxwellDg(s) => s.enable_correction(method),
            Simulation::MaxwellFourier(s) => s.enable_correction(method),
        }
    }

    pub fn step(&mut self) -> Result<()> {
        match self {
            Simulation::Transport(s) => s.advance(|_, u| u.is_finite()),
            Simulation::Ampere(s) => s.kinetic_step(),
            Simulation::MaxwellDg(s) => s.kinetic_step(),
            Simulation::MaxwellFourier(s) => s.kinetic_step(),
        }
    }

    pub fn time(&self) -> f64 {
        each!(self, s => s.time)
    }

    pub fn steps(&self) -> usize {
        each!(self, s => s.steps)
    }

    pub fn dt(&self) -> f64 {
        each!(self, s => s.model.dt())
    }

    /// Last correction magnitude (zero when the correction is off).
    pub fn last_correction(&self) -> f64 {
        each!(self, s => s.last_correction)
    }

    pub fn observables(&self) -> Observables {
        match self {
            Simulation::Transport(s) => transport_observables(&s.model, &s.state),
            Simulation::Ampere(s) => s.model.observables(&s.state),
            Simulation::MaxwellDg(s) => s.model.observables(&s.state),
            Simulation::MaxwellFourier(s) => s.model.observables(&s.state),
        }
    }

    /// Point values of `f` (integrated over `v2` for two velocity dimensions) on an
    /// `nx` by `nv` grid. Returns `(x, v, rows)` with one row per velocity node.
    pub fn phase_space_grid(&self) -> (Vec<f64>, Vec<f64>, Vec<Vec<f64>>) {
        fn dg_rows(space: &DgSpace, cols: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
            let per = 4;
            let nx = space.cells() * per;
            let nl = space.nloc();
            let xs: Vec<f64> = (0..nx)
                .map(|i| space.x_lo() + (i as f64 + 0.5) * space.length() / nx as f64)
                .collect();
            let rows = cols
                .iter()
                .map(|c| {
                    (0..nx)
                        .map(|i| {
                            let cell = i / per;
                            let s = ((i % per) as f64 + 0.5) / per as f64 - 0.5;
                            eval_local(&c[cell * nl..(cell + 1) * nl], s)
                        })
                        .collect()
                })
                .collect();
            (xs, rows)
        }
        match self {
            Simulation::Transport(s) => {
                let cols: Vec<Vec<f64>> =
                    (0..s.state.cols).map(|j| s.state.col(j).to_vec()).collect();
                let (xs, rows) = dg_rows(s.model.space(), &cols);
                (xs, s.model.grid().nodes(), rows)
            }
            Simulation::Ampere(s) => {
                let cols: Vec<Vec<f64>> = (0..s.state.f.cols)
                    .map(|j| s.state.f.col(j).to_vec())
                    .collect();
                let (xs, rows) = dg_rows(s.model.space(), &cols);
                (xs, s.model.grid().nodes(), rows)
            }
            Simulation::MaxwellDg(s) => {
                let (g1, g2) = s.model.grids();
                let n2 = g2.len();
                let cols: Vec<Vec<f64>> = (0..g1.len())
                    .map(|j1| {
                        let mut acc = vec![0.0; s.state.f.rows];
                        for j2 in 0..n2 {
                            for (a, v) in acc.iter_mut().zip(s.state.f.col(j2 + n2 * j1)) {
                                *a += v * g2.dv();
                            }
                        }
                        acc
                    })
                    .collect();
                let (xs, rows) = dg_rows(s.model.space(), &cols);
                (xs, g1.nodes(), rows)
            }
            Simulation::MaxwellFourier(s) => {
                let (g1, g2) = s.model.grids();
                let n2 = g2.len();
                let nx = s.model.modes();
                let rows = (0..g1.len())
                    .map(|j1| {
                        let mut acc = vec![faer::c64::ZERO; nx];
                        for j2 in 0..n2 {
                            let c = j2 + n2 * j1;
                            for (a, v) in acc.iter_mut().zip(&s.state.f[c * nx..(c + 1) * nx]) {
                                *a += v * g2.dv();
                            }
                        }
                        s.model.to_physical(&acc)
                    })
                    .collect();
                (s.model.x_nodes(), g1.nodes(), rows)
            }
        }
    }

    /// Writes a snapshot: the header `nx,nv,t`, one line with those values, then one row per velocity node.
    pub fn write_snapshot<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let (xs, vs, rows) = self.phase_space_grid();
        writeln!(w, "nx,nv,t")?;
        writeln!(w, "{},{},{:.16e}", xs.len(), vs.len(), self.time())?;
        for r in rows {
            let line: Vec<String> = r.iter().map(|x| format!("{x:.16e}")).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }
}

/// Summary of a completed run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ScenarioConfig,
    pub wall_time_s: f64,
    pub steps: usize,
    pub final_time: f64,
    pub initial: Observables,
    pub final_observables: Observables,
    pub fit: Option<RateFit>,
    /// Why the configured fit was not produced (for example a window past the final time).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fit_skipped: Option<String>,
    pub max_poisson_residual: f64,
    pub mass_drift: f64,
    pub energy_drift: f64,
    pub max_correction: f64,
    pub files: Vec<String>,
}

fn create(dir: &Path, name: &str, files: &mut Vec<String>) -> Result<BufWriter<File>> {
    let p: PathBuf = dir.join(name);
    files.push(p.display().to_string());
    Ok(BufWriter::new(File::create(p)?))
}

/// Runs a scenario to its final time. When `out_dir` is given, writes
/// `series.csv`, `fields.csv`, `report.json` and optional snapshots there.
pub fn run_scenario(
    cfg: &ScenarioConfig,
    out_dir: Option<&Path>,
) -> Result<(RunReport, TimeSeries)> {
    let start = Instant::now();
    let mut sim = Simulation::from_config(cfg)?;
    let mut files = Vec::new();
    if let Some(d) = out_dir {
        std::fs::create_dir_all(d)?;
        if cfg.output.snapshots {
            sim.write_snapshot(create(d, "snapshot_initial.csv", &mut files)?)?;
        }
    }
    let mut series = TimeSeries::new();
    let initial = sim.observables();
    series.push(0.0, initial)?;
    let total = cfg.steps();
    let mut max_corr = 0.0f64;
    for i in 1..=total {
        sim.step()?;
        max_corr = max_corr.max(sim.last_correction().abs());
        if i % cfg.output.stride == 0 || i == total {
            series.push(sim.time(), sim.observables())?;
        }
    }
    // A failed fit does not invalidate the run; the reason goes into the report.
    let (fit, fit_skipped) = match &cfg.fit {
        Some(f) => match fit_rate(&series, f.channel, f.window, f.method) {
            Ok(r) => (Some(r), None),
            Err(e) => (None, Some(e.to_string())),
        },
        None => (None, None),
    };
    if let Some(d) = out_dir {
        if cfg.output.snapshots {
            sim.write_snapshot(create(d, "snapshot_final.csv", &mut files)?)?;
        }
        series.write_csv(create(d, "series.csv", &mut files)?)?;
        series.write_fields_csv(create(d, "fields.csv", &mut files)?)?;
    }
    let report = RunReport {
        config: cfg.clone(),
        wall_time_s: start.elapsed().as_secs_f64(),
        steps: sim.steps(),
        final_time: sim.time(),
        initial,
        final_observables: sim.observables(),
        fit,
        fit_skipped,
        max_poisson_residual: series.max_of(Channel::PoissonResidual),
        mass_drift: series.max_relative_drift(Channel::Mass),
        energy_drift: series.max_relative_drift(Channel::TotalEnergy),
        max_correction: max_corr,
        files: files.clone(),
    };
    if let Some(d) = out_dir {
        let p = d.join("report.json");
        let mut r = report.clone();
        r.files.push(p.display().to_string());
        let json = serde_json::to_string_pretty(&r).map_err(|e| Error::Config(e.to_string()))?;
        std::fs::write(&p, json)?;
        return Ok((r, series));
    }
    Ok((report, series))
}
