//! Run configuration: named presets overlaid with an optional TOML file.

use std::path::PathBuf;

use nematic_core::analysis::Reference;
use nematic_core::grid::GridSpec;
use nematic_core::harmonic::{FarField, PsiInit};
use nematic_core::ldg::StepMode;
use nematic_core::{ExteriorGrid, MaterialParams, StepSchedule};
use serde::{Deserialize, Serialize};

use crate::CliError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub material: Material,
    pub regime: Regime,
    pub grid: GridSpec,
    pub solver: Solver,
    pub ring: RingSection,
    pub study: StudySection,
    pub output: Output,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Material {
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

/// Exactly one of `W` (absolute) and `w` (ratio, `W = w·L`) is set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Regime {
    #[serde(rename = "L")]
    pub l: f64,
    #[serde(rename = "W", default, skip_serializing_if = "Option::is_none")]
    pub big_w: Option<f64>,
    #[serde(rename = "w", default, skip_serializing_if = "Option::is_none")]
    pub w: Option<f64>,
}

impl Regime {
    pub fn anchoring(&self) -> Result<f64, CliError> {
        match (self.big_w, self.w) {
            (Some(big), None) => Ok(big),
            (None, Some(w)) if w.is_infinite() => Ok(f64::INFINITY),
            (None, Some(w)) => Ok(w * self.l),
            _ => Err(CliError::Config("regime needs exactly one of `W` and `w`".into())),
        }
    }

    /// `w = W/L`.
    pub fn ratio(&self) -> Result<f64, CliError> {
        let big = self.anchoring()?;
        Ok(if big.is_infinite() { big } else { big / self.l })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum LdgInit {
    /// `Q0` inside, blended to `Q∞`.
    WarmStart,
    FarField,
    /// Closed-form `Q0` at the config's `w`.
    Quadrupolar,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PsiStart {
    MultiStart,
    BoundaryDecay,
    HedgehogBelow,
    Uniform0,
}

impl PsiStart {
    pub fn menu(self) -> Vec<PsiInit> {
        let all = PsiInit::menu();
        match self {
            PsiStart::MultiStart => all.to_vec(),
            PsiStart::BoundaryDecay => vec![all[0]],
            PsiStart::HedgehogBelow => vec![all[1]],
            PsiStart::Uniform0 => vec![all[2]],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Solver {
    pub tol: f64,
    pub max_iters: usize,
    pub mode: StepMode,
    pub cg_max_iters: usize,
    pub ldg_init: LdgInit,
    /// Field snapshot to restart the tensor solve from; overrides `ldg_init`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub restart: Option<PathBuf>,
    pub psi_init: PsiStart,
    pub far: FarField,
}

impl Solver {
    pub fn schedule(&self) -> StepSchedule {
        StepSchedule {
            tol: self.tol,
            max_iters: self.max_iters,
            mode: self.mode,
            cg_max_iters: self.cg_max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RingSection {
    pub w_values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StudySection {
    /// Elastic constants of the rate study.
    pub l_values: Vec<f64>,
    pub shell_radius: f64,
    pub reference: Reference,
    pub decay_r_min: f64,
    pub decay_r_max: f64,
    pub decay_samples: usize,
    /// `q0` for the closed form, `field` for a tensor solve at the config regime.
    pub exchange_source: ExchangeKind,
    pub exchange_r_max: f64,
    pub exchange_samples: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExchangeKind {
    Q0,
    Field,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Output {
    pub dir: PathBuf,
}

pub const PRESETS: [&str; 7] = [
    "default",
    "small-particle",
    "rate",
    "decay",
    "exchange",
    "harmonic",
    "quick",
];

impl RunConfig {
    pub fn preset(name: &str) -> Result<Self, CliError> {
        let mut c = Self::base();
        match name {
            "default" => {}
            "small-particle" => {
                c.regime = Regime {
                    l: 400.0,
                    big_w: None,
                    w: Some(5.0),
                };
            }
            "rate" => {
                c.regime = Regime {
                    l: 100.0,
                    big_w: None,
                    w: Some(5.0),
                };
            }
            "decay" => {
                c.regime = Regime {
                    l: 100.0,
                    big_w: None,
                    w: Some(5.0),
                };
            }
            "exchange" => {
                c.regime = Regime {
                    l: 100.0,
                    big_w: None,
                    w: Some(f64::INFINITY),
                };
                c.study.exchange_source = ExchangeKind::Q0;
            }
            "harmonic" => {
                c.grid = GridSpec {
                    r_out: 20.0,
                    n_s: 256,
                    n_phi: 192,
                };
            }
            "quick" => {
                c.grid = GridSpec {
                    r_out: 10.0,
                    n_s: 24,
                    n_phi: 16,
                };
                c.study.l_values = vec![5.0, 10.0, 20.0];
                c.study.decay_r_max = 5.0;
                c.solver.max_iters = 200;
            }
            other => {
                return Err(CliError::Config(format!(
                    "unknown preset `{other}` (available: {})",
                    PRESETS.join(", ")
                )))
            }
        }
        Ok(c)
    }

    fn base() -> Self {
        Self {
            material: Material { a: 1.0, b: 2.0, c: 1.0 },
            regime: Regime {
                l: 100.0,
                big_w: None,
                w: Some(5.0),
            },
            grid: GridSpec {
                r_out: 20.0,
                n_s: 128,
                n_phi: 96,
            },
            solver: Solver {
                tol: 1e-8,
                max_iters: 500,
                mode: StepMode::Newton,
                cg_max_iters: 400,
                ldg_init: LdgInit::WarmStart,
                restart: None,
                psi_init: PsiStart::MultiStart,
                far: FarField::Zero,
            },
            ring: RingSection {
                w_values: vec![1.0, 3f64.sqrt(), 3.0, 5.0, 10.0, f64::INFINITY],
            },
            study: StudySection {
                l_values: vec![25.0, 100.0, 400.0],
                shell_radius: 3.0,
                reference: Reference::ClosedForm,
                decay_r_min: 2.0,
                decay_r_max: 10.0,
                decay_samples: 12,
                exchange_source: ExchangeKind::Field,
                exchange_r_max: 3.0,
                exchange_samples: 200,
            },
            output: Output {
                dir: PathBuf::from("out"),
            },
        }
    }

    /// Preset values overlaid key by key with the TOML document `text`.
    pub fn load(preset: &str, text: Option<&str>) -> Result<Self, CliError> {
        let base = Self::preset(preset)?;
        let Some(text) = text else {
            base.validate()?;
            return Ok(base);
        };
        let overlay: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config: {}", e.message())))?;
        let mut merged = toml::Table::try_from(&base).map_err(|e| CliError::Config(e.to_string()))?;
        merge(&mut merged, overlay, "")?;
        // an explicit `W` replaces the preset's `w` and vice versa
        if let Some(toml::Value::Table(reg)) = text.parse::<toml::Table>().ok().and_then(|t| t.get("regime").cloned()) {
            let target = merged
                .get_mut("regime")
                .and_then(|v| v.as_table_mut())
                .expect("regime section");
            if reg.contains_key("W") && !reg.contains_key("w") {
                target.remove("w");
            }
            if reg.contains_key("w") && !reg.contains_key("W") {
                target.remove("W");
            }
        }
        let cfg: RunConfig = toml::Value::Table(merged)
            .try_into()
            .map_err(|e: toml::de::Error| CliError::Config(format!("config: {}", e.message())))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn params(&self) -> Result<MaterialParams, CliError> {
        let m = &self.material;
        MaterialParams::new(m.a, m.b, m.c, self.regime.l, self.regime.anchoring()?)
            .map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn exterior_grid(&self) -> Result<ExteriorGrid, CliError> {
        ExteriorGrid::from_spec(&self.grid).map_err(|e| CliError::Config(e.to_string()))
    }

    /// Checks everything that does not need a grid allocation.
    pub fn validate(&self) -> Result<(), CliError> {
        self.params()?;
        let g = &self.grid;
        if !(g.r_out > 1.0 && g.r_out.is_finite()) || g.n_s < 4 || g.n_phi < 8 {
            return Err(CliError::Config(format!(
                "grid needs R_out > 1, N_s >= 4, N_phi >= 8 (got {}, {}, {})",
                g.r_out, g.n_s, g.n_phi
            )));
        }
        let s = &self.solver;
        if !(s.tol > 0.0) || s.max_iters == 0 || s.cg_max_iters == 0 {
            return Err(CliError::Config(
                "solver needs tol > 0 and positive iteration caps".into(),
            ));
        }
        let st = &self.study;
        if st.l_values.iter().any(|l| !(*l > 0.0 && l.is_finite())) {
            return Err(CliError::Config("study.l_values must be positive and finite".into()));
        }
        if !(st.shell_radius > 1.0) {
            return Err(CliError::Config("study.shell_radius must exceed 1".into()));
        }
        if !(st.decay_r_min >= 1.0 && st.decay_r_max > st.decay_r_min && st.decay_r_max <= g.r_out) {
            return Err(CliError::Config(
                "study decay window must satisfy 1 <= r_min < r_max <= R_out".into(),
            ));
        }
        if st.decay_samples < 2 || st.exchange_samples < 2 {
            return Err(CliError::Config("study sample counts must be at least 2".into()));
        }
        if !(st.exchange_r_max > 1.0 && st.exchange_r_max <= g.r_out) {
            return Err(CliError::Config("study.exchange_r_max must lie in (1, R_out]".into()));
        }
        Ok(())
    }
}

fn merge(base: &mut toml::Table, overlay: toml::Table, path: &str) -> Result<(), CliError> {
    for (k, v) in overlay {
        let here = if path.is_empty() {
            k.clone()
        } else {
            format!("{path}.{k}")
        };
        match (base.get_mut(&k), v) {
            (Some(toml::Value::Table(b)), toml::Value::Table(o)) => merge(b, o, &here)?,
            (Some(toml::Value::Table(_)), _) => {
                return Err(CliError::Config(format!("`{here}` must be a section")));
            }
            (_, v) => {
                base.insert(k, v);
            }
        }
    }
    Ok(())
}

/// Worker cap from `NEMATIC_THREADS`, defaulting to the available parallelism.
pub fn threads() -> Result<usize, CliError> {
    match std::env::var("NEMATIC_THREADS") {
        Ok(v) => match v.trim().parse::<usize>() {
            Ok(n) if n > 0 => Ok(n),
            _ => Err(CliError::Config(format!(
                "NEMATIC_THREADS must be a positive integer, got `{v}`"
            ))),
        },
        Err(_) => Ok(std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)),
    }
}
