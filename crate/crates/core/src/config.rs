//! Run configuration: a plain-text file of `[section]` headers and
//! `key = value` lines, merged over built-in defaults.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::model::DeviceParams;
use crate::pa_circuit::CircuitParams;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct FileConfig {
    #[serde(default)]
    device: DeviceSection,
    #[serde(default)]
    circuit: CircuitSection,
    grids: Option<GridSection>,
    #[serde(default)]
    output: OutputSection,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeviceSection {
    c_p: Option<f64>,
    dh_tr: Option<f64>,
    kappa: Option<f64>,
    rho_met: Option<f64>,
    rho_ins: Option<f64>,
    #[serde(rename = "dT")]
    d_t: Option<f64>,
    r_ch: Option<f64>,
    #[serde(rename = "L_ch")]
    l_ch: Option<f64>,
    #[serde(rename = "T0")]
    t0: Option<f64>,
    #[serde(rename = "Tc")]
    tc: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct CircuitSection {
    rs: Option<f64>,
    cp: Option<f64>,
    vdc: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub x_min: f64,
    pub x_gap_min: f64,
    pub x_points: usize,
    pub i_min: f64,
    pub i_max: f64,
    pub i_points: usize,
    pub f_min: f64,
    pub f_max: f64,
    pub f_points: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        Self {
            x_min: 1e-6,
            x_gap_min: 1e-6,
            x_points: 4000,
            i_min: 1e-6,
            i_max: 2e-3,
            i_points: 400,
            f_min: 1e6,
            f_max: 1e12,
            f_points: 400,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSection {
    pub dir: Option<PathBuf>,
    pub formats: Option<Vec<String>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub device: DeviceParams,
    pub circuit: CircuitParams,
    pub grids: GridSection,
    pub output: OutputSection,
}

impl RunConfig {
    pub fn defaults(preset: &str) -> Result<Self> {
        let device = DeviceParams::preset(preset).ok_or_else(|| Error::InvalidParameter {
            name: "device",
            reason: format!("unknown preset `{preset}` (default, 10x10, 56x100)"),
        })?;
        Ok(Self {
            device,
            circuit: CircuitParams { rs: 3.4e3, cp: 1e-12, vdc: 1.2 },
            grids: GridSection::default(),
            output: OutputSection::default(),
        })
    }

    /// Defaults for `preset`, overridden by `path` if given.
    pub fn load(path: Option<&Path>, preset: &str) -> Result<Self> {
        let mut cfg = Self::defaults(preset)?;
        if let Some(p) = path {
            let text = std::fs::read_to_string(p)?;
            cfg.merge_str(&text)?;
        }
        cfg.device.validate()?;
        CircuitParams::new(cfg.circuit.rs, cfg.circuit.cp, cfg.circuit.vdc)?;
        Ok(cfg)
    }

    pub fn merge_str(&mut self, text: &str) -> Result<()> {
        let file: FileConfig = toml::from_str(text).map_err(|e| {
            let line = e.span().map_or(0, |s| text[..s.start.min(text.len())].matches('\n').count() + 1);
            Error::Config { line, msg: e.message().to_string() }
        })?;
        let d = &mut self.device;
        let set = |slot: &mut f64, v: Option<f64>| {
            if let Some(v) = v {
                *slot = v;
            }
        };
        let s = file.device;
        set(&mut d.c_p, s.c_p);
        set(&mut d.dh_tr, s.dh_tr);
        set(&mut d.kappa, s.kappa);
        set(&mut d.rho_met, s.rho_met);
        set(&mut d.rho_ins, s.rho_ins);
        set(&mut d.d_t, s.d_t);
        set(&mut d.r_ch, s.r_ch);
        set(&mut d.l_ch, s.l_ch);
        set(&mut d.t0, s.t0);
        set(&mut d.tc, s.tc);
        let c = &mut self.circuit;
        set(&mut c.rs, file.circuit.rs);
        set(&mut c.cp, file.circuit.cp);
        set(&mut c.vdc, file.circuit.vdc);
        if let Some(g) = file.grids {
            self.grids = g;
        }
        if file.output.dir.is_some() {
            self.output.dir = file.output.dir;
        }
        if file.output.formats.is_some() {
            self.output.formats = file.output.formats;
        }
        Ok(())
    }
}
