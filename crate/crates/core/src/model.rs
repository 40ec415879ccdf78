//! Device parameters, derived coefficients and the auxiliary and kinetic
//! functions of the one-state-variable thermal model.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Material properties and channel geometry, SI units throughout.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub c_p: f64,
    pub dh_tr: f64,
    pub kappa: f64,
    pub rho_met: f64,
    pub rho_ins: f64,
    #[serde(rename = "dT")]
    pub d_t: f64,
    pub r_ch: f64,
    #[serde(rename = "L_ch")]
    pub l_ch: f64,
    #[serde(rename = "T0")]
    pub t0: f64,
    #[serde(rename = "Tc")]
    pub tc: f64,
}

impl Default for DeviceParams {
    fn default() -> Self {
        Self::table1()
    }
}

impl DeviceParams {
    /// VO2 properties with a 36 nm radius, 50 nm long channel.
    pub fn table1() -> Self {
        Self {
            c_p: 3.30e6,
            dh_tr: 2.35e8,
            kappa: 3.5,
            rho_met: 3e-6,
            rho_ins: 1e-2,
            d_t: 43.0,
            r_ch: 36e-9,
            l_ch: 50e-9,
            t0: 297.0,
            tc: 340.0,
        }
    }

    pub fn with_geometry(self, r_ch: f64, l_ch: f64) -> Self {
        Self { r_ch, l_ch, ..self }
    }

    /// Built-in parameter sets: `default` (36/50 nm), `10x10` and `56x100`.
    pub fn preset(name: &str) -> Option<Self> {
        let base = Self::table1();
        match name {
            "default" | "36x50" => Some(base),
            "10x10" => Some(base.with_geometry(10e-9, 10e-9)),
            "56x100" => Some(base.with_geometry(56e-9, 100e-9)),
            _ => None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("c_p", self.c_p),
            ("dh_tr", self.dh_tr),
            ("kappa", self.kappa),
            ("rho_met", self.rho_met),
            ("rho_ins", self.rho_ins),
            ("dT", self.d_t),
            ("r_ch", self.r_ch),
            ("L_ch", self.l_ch),
            ("T0", self.t0),
            ("Tc", self.tc),
        ];
        for (name, v) in fields {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be finite and positive, got {v}") });
            }
        }
        if self.rho_ins < self.rho_met {
            return Err(Error::InvalidParameter {
                name: "rho_ins",
                reason: "insulating resistivity below metallic resistivity".into(),
            });
        }
        for (name, v) in [("r_ch", self.r_ch), ("L_ch", self.l_ch)] {
            if !(1e-10..1e-5).contains(&v) {
                return Err(Error::InvalidParameter {
                    name,
                    reason: format!("{v} m outside the (1e-10, 1e-5) m sanity band"),
                });
            }
        }
        Ok(())
    }
}

/// The five constants that fully determine the model.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelCoefficients {
    /// Insulating-channel conductance (S).
    pub a: f64,
    pub b: f64,
    /// Thermal power scale (W).
    pub c: f64,
    /// Enthalpy scale (J).
    pub d: f64,
    pub e: f64,
}

impl ModelCoefficients {
    pub fn default_device() -> Self {
        derive_coefficients(&DeviceParams::table1()).expect("built-in parameters are valid")
    }
}

pub fn derive_coefficients(p: &DeviceParams) -> Result<ModelCoefficients> {
    p.validate()?;
    let area = PI * p.r_ch * p.r_ch;
    Ok(ModelCoefficients {
        a: area / (p.rho_ins * p.l_ch),
        b: p.rho_ins / p.rho_met - 1.0,
        c: 2.0 * PI * p.l_ch * p.kappa * p.d_t,
        d: p.l_ch * area * p.c_p * p.d_t,
        e: 2.0 * p.dh_tr / (p.c_p * p.d_t),
    })
}

/// Metallic volume fraction, held by its logarithm so that values far below
/// the smallest positive double remain usable.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct StateFraction {
    ln_x: f64,
}

impl StateFraction {
    /// Bounds used for generic evaluation grids.
    pub const GENERIC_MIN: f64 = 1e-12;
    pub const GENERIC_MAX: f64 = 1.0 - 1e-12;

    pub fn new(x: f64) -> Result<Self> {
        if x > 0.0 && x < 1.0 {
            Ok(Self { ln_x: x.ln() })
        } else {
            Err(Error::Domain(x))
        }
    }

    pub fn from_ln(ln_x: f64) -> Result<Self> {
        if ln_x < 0.0 && ln_x.is_finite() {
            Ok(Self { ln_x })
        } else {
            Err(Error::Domain(ln_x.exp()))
        }
    }

    pub fn x(self) -> f64 {
        self.ln_x.exp()
    }

    pub fn ln(self) -> f64 {
        self.ln_x
    }
}

pub fn memristance(x: StateFraction, c: &ModelCoefficients) -> f64 {
    let x = x.x();
    1.0 / (c.a * (1.0 + c.b * x * x))
}

/// Heat loss through the insulating shell, Γ_th·ΔT.
pub fn thermal_power(x: StateFraction, c: &ModelCoefficients) -> f64 {
    -c.c / x.ln()
}

/// x·H'(x)/D, finite on the whole interval including both ends.
pub(crate) fn scaled_enthalpy(x: StateFraction, c: &ModelCoefficients) -> f64 {
    let l = x.ln();
    let xv = x.x();
    let rational = if l > -1e-6 {
        1.0 + l * (4.0 / 3.0 + l)
    } else {
        let e2 = (2.0 * l).exp();
        (-(2.0 * l).exp_m1() + 2.0 * l * e2) / (2.0 * l * l)
    };
    rational + c.e * xv * xv
}

pub fn enthalpy_derivative(x: StateFraction, c: &ModelCoefficients) -> f64 {
    c.d * scaled_enthalpy(x, c) / x.x()
}

/// d(ln x)/dt for a given dissipated electrical power.
pub fn log_rate(x: StateFraction, power: f64, c: &ModelCoefficients) -> f64 {
    (power + c.c / x.ln()) / (c.d * scaled_enthalpy(x, c))
}

pub fn kinetic_current(x: StateFraction, i: f64, c: &ModelCoefficients) -> f64 {
    x.x() * log_rate(x, i * i * memristance(x, c), c)
}

pub fn kinetic_voltage(x: StateFraction, v: f64, c: &ModelCoefficients) -> f64 {
    x.x() * log_rate(x, v * v / memristance(x, c), c)
}

/// Radial temperature inside the insulating shell x·r_ch ≤ r ≤ r_ch.
pub fn temperature_profile(r: f64, x: StateFraction, p: &DeviceParams) -> Result<f64> {
    let inner = x.x() * p.r_ch;
    let outer = p.r_ch;
    if !(r >= inner * (1.0 - 1e-12) && r <= outer * (1.0 + 1e-12)) {
        return Err(Error::Shell { r, inner, outer });
    }
    let t = p.t0 + p.d_t * (r / p.r_ch).ln() / x.ln();
    Ok(t.clamp(p.t0, p.t0 + p.d_t))
}
