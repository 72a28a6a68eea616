//! Scenario configuration: TOML files and embedded presets.

use serde::{Deserialize, Serialize};

use crate::dg_core::FluxKind;
use crate::diagnostics::{Channel, EnergyCorrection, FitMethod};
use crate::error::{Error, Result};
use crate::lawson::ButcherTableau;
use crate::phase_space::DerivativeScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    Transport2d,
    VlasovAmpere,
    VlasovMaxwellDg,
    VlasovMaxwellFourier,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Landau,
    TwoStream,
    Weibel,
    StreamingWeibel,
    /// The smooth periodic transport problem with solution `sin(x + v - 2t)`.
    Custom,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Numerics {
    /// Polynomial degree (ignored by the Fourier model).
    #[serde(default)]
    pub degree: usize,
    /// DG cells, or Fourier modes.
    pub nx: usize,
    /// Velocity nodes per axis.
    pub nv: Vec<usize>,
    /// Velocity half-width per axis (ignored by the transport model).
    #[serde(default)]
    pub v_max: Vec<f64>,
    pub dt: f64,
    pub t_final: f64,
    #[serde(default = "default_tableau")]
    pub tableau: String,
    #[serde(default = "default_flux")]
    pub flux: FluxKind,
    #[serde(default = "default_scheme")]
    pub velocity_scheme: DerivativeScheme,
    #[serde(default)]
    pub energy_correction: bool,
    #[serde(default)]
    pub correction_method: EnergyCorrection,
}

fn default_tableau() -> String {
    "rk33".into()
}
fn default_flux() -> FluxKind {
    FluxKind::Central
}
fn default_scheme() -> DerivativeScheme {
    DerivativeScheme::Cd4
}

/// Physical parameters; unused entries stay at zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Physics {
    pub alpha: f64,
    pub k_wave: f64,
    pub sigma1: f64,
    pub sigma2: f64,
    pub beta: f64,
    pub v01: f64,
    pub v02: f64,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    /// Steps between recorded samples.
    pub stride: usize,
    /// Write phase-space snapshots at the first and last step.
    pub snapshots: bool,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            stride: 1,
            snapshots: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitConfig {
    pub channel: Channel,
    pub window: [f64; 2],
    #[serde(default)]
    pub method: FitMethod,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub model: ModelKind,
    pub scenario: ScenarioKind,
    pub numerics: Numerics,
    #[serde(default)]
    pub physics: Physics,
    #[serde(default)]
    pub output: OutputConfig,
    #[serde(default)]
    pub fit: Option<FitConfig>,
}

/// Preset name and TOML source.
pub const PRESETS: &[(&str, &str)] = &[
    ("landau", include_str!("../presets/landau.toml")),
    ("two_stream", include_str!("../presets/two_stream.toml")),
    ("weibel", include_str!("../presets/weibel.toml")),
    (
        "weibel_fourier",
        include_str!("../presets/weibel_fourier.toml"),
    ),
    (
        "streaming_weibel",
        include_str!("../presets/streaming_weibel.toml"),
    ),
    (
        "streaming_weibel_fourier",
        include_str!("../presets/streaming_weibel_fourier.toml"),
    ),
    ("transport", include_str!("../presets/transport.toml")),
];

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|p| p.0).collect()
}

pub fn preset_source(name: &str) -> Result<&'static str> {
    PRESETS
        .iter()
        .find(|p| p.0 == name)
        .map(|p| p.1)
        .ok_or_else(|| {
            Error::Config(format!(
                "unknown preset '{name}' (available: {})",
                preset_names().join(", ")
            ))
        })
}

pub fn preset(name: &str) -> Result<ScenarioConfig> {
    ScenarioConfig::from_toml(preset_source(name)?)
}

impl ScenarioConfig {
    pub fn from_toml(src: &str) -> Result<Self> {
        let c: Self = toml::from_str(src).map_err(|e| Error::Config(e.to_string()))?;
        c.validate()?;
        Ok(c)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn tableau(&self) -> Result<ButcherTableau> {
        ButcherTableau::by_name(&self.numerics.tableau)
    }

    /// Number of steps to reach `t_final`.
    pub fn steps(&self) -> usize {
        (self.numerics.t_final / self.numerics.dt).round() as usize
    }

    /// Periodic domain length in `x`.
    pub fn length(&self) -> f64 {
        match self.scenario {
            ScenarioKind::Custom => 2.0 * std::f64::consts::PI,
            _ => 2.0 * std::f64::consts::PI / self.physics.k_wave,
        }
    }

    pub fn velocity_axes(&self) -> usize {
        match self.model {
            ModelKind::Transport2d | ModelKind::VlasovAmpere => 1,
            ModelKind::VlasovMaxwellDg | ModelKind::VlasovMaxwellFourier => 2,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let n = &self.numerics;
        let bad = |m: String| Err(Error::Config(m));
        let dg = self.model != ModelKind::VlasovMaxwellFourier;
        let vlasov = self.model != ModelKind::Transport2d;
        if n.nx < 2 {
            return bad(format!("nx must be at least 2, got {}", n.nx));
        }
        if dg && n.degree > 5 && vlasov {
            return bad(format!(
                "polynomial degree {} is above the supported maximum 5",
                n.degree
            ));
        }
        let axes = self.velocity_axes();
        if n.nv.len() != axes {
            return bad(format!(
                "nv needs {axes} entries for this model, got {}",
                n.nv.len()
            ));
        }
        if n.nv.iter().any(|&v| v < 5) {
            return bad("every velocity axis needs at least 5 nodes".into());
        }
        if vlasov {
            if n.v_max.len() != axes {
                return bad(format!(
                    "v_max needs {axes} entries for this model, got {}",
                    n.v_max.len()
                ));
            }
            if n.v_max.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
                return bad("v_max entries must be positive".into());
            }
        }
        if !(n.dt > 0.0 && n.dt.is_finite()) {
            return bad(format!("dt must be positive, got {}", n.dt));
        }
        if !(n.t_final > 0.0 && n.t_final.is_finite()) {
            return bad(format!("t_final must be positive, got {}", n.t_final));
        }
        let steps = self.steps();
        if steps == 0 || (steps as f64 * n.dt - n.t_final).abs() > 1e-9 * n.t_final {
            return bad(format!(
                "t_final {} is not a whole number of steps of {}",
                n.t_final, n.dt
            ));
        }
        if self.output.stride == 0 {
            return bad("output stride must be at least 1".into());
        }
        ButcherTableau::by_name(&n.tableau)?;
        if vlasov && n.flux == FluxKind::Upwind {
            return bad(
                "upwind flux is not allowed for Vlasov models: it prevents a discrete Poisson equation from being satisfied"
                    .into(),
            );
        }
        if dg && vlasov && n.velocity_scheme == DerivativeScheme::Up3 {
            return bad(
                "the up3 velocity stencil is only available for the Fourier model; use cd2 or cd4"
                    .into(),
            );
        }
        let compatible = matches!(
            (self.model, self.scenario),
            (ModelKind::Transport2d, ScenarioKind::Custom)
                | (
                    ModelKind::VlasovAmpere,
                    ScenarioKind::Landau | ScenarioKind::TwoStream
                )
                | (
                    ModelKind::VlasovMaxwellDg | ModelKind::VlasovMaxwellFourier,
                    ScenarioKind::Weibel | ScenarioKind::StreamingWeibel
                )
        );
        if !compatible {
            return bad(format!(
                "scenario {:?} cannot run on model {:?}",
                self.scenario, self.model
            ));
        }
        if self.scenario != ScenarioKind::Custom && !(self.physics.k_wave > 0.0) {
            return bad("k_wave must be positive".into());
        }
        match self.scenario {
            ScenarioKind::Weibel if !(self.physics.sigma1 > 0.0 && self.physics.sigma2 > 0.0) => {
                return bad("weibel needs positive sigma1 and sigma2".into())
            }
            ScenarioKind::StreamingWeibel if !(self.physics.sigma1 > 0.0) => {
                return bad("streaming_weibel needs a positive sigma1".into())
            }
            _ => {}
        }
        if let Some(f) = &self.fit {
            if !(f.window[0] < f.window[1]) {
                return bad("fit window must be increasing".into());
            }
        }
        Ok(())
    }
}
