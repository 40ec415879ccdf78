//! Linearization of the isolated memristor about a DC operating point and
//! everything derived from its first-order impedance.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{derive_coefficients, DeviceParams, ModelCoefficients, StateFraction};
use crate::roots::{golden_max, linear_fit, linspace};
use crate::steady_state::{dc_locus, default_locus_grid, FixedPoint1D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearCoeffs {
    pub a11: f64,
    pub a12: f64,
    pub b11: f64,
    pub b12: f64,
}

pub fn linearize(q: &FixedPoint1D, c: &ModelCoefficients) -> LinearCoeffs {
    let l = q.x_q.ln();
    let x = q.x_q.x();
    let i = q.i_q;
    let s = 1.0 + c.b * x * x;
    let xl = x * l;
    let n = 1.0 - x * x + 2.0 * x * xl + 2.0 * c.e * xl * xl;
    let big_x = 2.0 * xl * l / (c.a * s);
    let big_y = 2.0 * c.c * xl;
    let big_z = c.d * n;
    let dx = 2.0 * l * (2.0 * c.b * x * x - c.b * x * x * l + l + 2.0) / (c.a * s * s);
    let dy = 2.0 * c.c * (l + 1.0);
    let dz = 4.0 * c.d * xl * (1.0 + c.e * (l + 1.0));
    let z2 = big_z * big_z;
    LinearCoeffs {
        a11: -2.0 * c.b * i * x / (c.a * s * s),
        a12: 1.0 / (c.a * s),
        b11: i * i * (dx * big_z - big_x * dz) / z2 + (dy * big_z - big_y * dz) / z2,
        b12: 2.0 * i * big_x / big_z,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VirtualElements {
    pub r1: f64,
    pub r2: f64,
    pub c1: f64,
}

pub fn virtual_elements(lc: &LinearCoeffs) -> Result<VirtualElements> {
    let g = lc.a11 * lc.b12;
    if g == 0.0 || lc.b11 == 0.0 || !g.is_finite() {
        return Err(Error::Degenerate("zero current leaves C1 undefined"));
    }
    Ok(VirtualElements { r1: -g / lc.b11, r2: lc.a12, c1: 1.0 / g })
}

/// Numerator and denominator coefficients of Z(s) = (b1 s + b0)/(a1 s + a0).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceCoeffs {
    pub a0: f64,
    pub a1: f64,
    pub b0: f64,
    pub b1: f64,
}

pub fn impedance_coeffs(ve: &VirtualElements) -> ImpedanceCoeffs {
    ImpedanceCoeffs { a0: 1.0, a1: ve.r1 * ve.c1, b0: ve.r1 + ve.r2, b1: ve.r1 * ve.r2 * ve.c1 }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ActivityClass {
    #[serde(rename = "LP")]
    LocallyPassive,
    #[serde(rename = "EOC")]
    EdgeOfChaos,
    #[serde(rename = "LA_not_EOC")]
    ActiveNotEdge,
}

impl ActivityClass {
    pub fn from_pole_zero(p: f64, z: f64) -> Self {
        if p >= 0.0 {
            Self::ActiveNotEdge
        } else if z > 0.0 {
            Self::EdgeOfChaos
        } else {
            Self::LocallyPassive
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Self::LocallyPassive => "LP",
            Self::EdgeOfChaos => "EOC",
            Self::ActiveNotEdge => "LA_not_EOC",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PoleZero {
    pub p: f64,
    pub z: f64,
    pub k: f64,
    pub activity_class: ActivityClass,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ImpedanceSample {
    pub omega: f64,
    pub re: f64,
    pub im: f64,
}

/// Full small-signal description at one operating point.
#[derive(Debug, Clone, Copy)]
pub struct SmallSignalModel {
    pub q: FixedPoint1D,
    pub lc: LinearCoeffs,
    pub ve: VirtualElements,
    pub coeffs: ImpedanceCoeffs,
    pub pz: PoleZero,
}

impl SmallSignalModel {
    pub fn at(q: &FixedPoint1D, c: &ModelCoefficients) -> Result<Self> {
        if q.i_q == 0.0 {
            return Err(Error::Degenerate("zero current leaves C1 undefined"));
        }
        let lc = linearize(q, c);
        // a11·b12 underflows for x below ~1e-160; R1·C1 = −1/b11 does not
        let g = lc.a11 * lc.b12;
        let ve = VirtualElements { r1: -g / lc.b11, r2: lc.a12, c1: 1.0 / g };
        let coeffs = ImpedanceCoeffs { a0: 1.0, a1: -1.0 / lc.b11, b0: ve.r1 + ve.r2, b1: -ve.r2 / lc.b11 };
        let p = lc.b11;
        let z = -coeffs.b0 / coeffs.b1;
        let pz = PoleZero { p, z, k: ve.r2, activity_class: ActivityClass::from_pole_zero(p, z) };
        Ok(Self { q: *q, lc, ve, coeffs, pz })
    }

    pub fn at_current(i: f64, c: &ModelCoefficients) -> Result<Self> {
        Self::at(&FixedPoint1D::at_current(i, c)?, c)
    }

    /// Z(jω), evaluated as R2 + R1/(1 + jωR1C1): the quotient form loses
    /// R1 to cancellation when R1 ≪ R2.
    pub fn z(&self, omega: f64) -> Complex64 {
        self.ve.r2 + self.ve.r1 / Complex64::new(1.0, self.coeffs.a1 * omega)
    }

    pub fn impedance(&self, omega: f64) -> ImpedanceSample {
        let z = self.z(omega);
        ImpedanceSample { omega, re: z.re, im: z.im }
    }

    /// Angular frequency below which Re Z is negative, if any.
    pub fn max_active_frequency(&self) -> Option<f64> {
        let k = &self.coeffs;
        let r = k.a0 * k.b0 / (k.a1 * k.b1);
        (r < 0.0).then(|| (-r).sqrt())
    }

    /// Frequency (Hz) of the |Im Z| maximum, found numerically.
    pub fn imz_peak_frequency(&self) -> f64 {
        let guess = self.lc.b11.abs().ln();
        let lw = golden_max(|lw| self.impedance(lw.exp()).im.abs(), guess - 6.0, guess + 6.0, 1e-12);
        lw.exp() / (2.0 * std::f64::consts::PI)
    }
}

pub fn pole_zero(q: &FixedPoint1D, c: &ModelCoefficients) -> Result<PoleZero> {
    Ok(SmallSignalModel::at(q, c)?.pz)
}

pub fn impedance(q: &FixedPoint1D, omega: f64, c: &ModelCoefficients) -> Result<ImpedanceSample> {
    Ok(SmallSignalModel::at(q, c)?.impedance(omega))
}

pub fn max_active_frequency(q: &FixedPoint1D, c: &ModelCoefficients) -> Result<Option<f64>> {
    Ok(SmallSignalModel::at(q, c)?.max_active_frequency())
}

pub fn imz_peak_frequency(q: &FixedPoint1D, c: &ModelCoefficients) -> Result<f64> {
    Ok(SmallSignalModel::at(q, c)?.imz_peak_frequency())
}

/// Impedance samples at the given frequencies (Hz), negative ones included.
pub fn nyquist(q: &FixedPoint1D, freqs_hz: &[f64], c: &ModelCoefficients) -> Result<Vec<ImpedanceSample>> {
    let m = SmallSignalModel::at(q, c)?;
    Ok(freqs_hz.iter().map(|f| m.impedance(2.0 * std::f64::consts::PI * f)).collect())
}

#[derive(Debug, Clone)]
pub struct RezMap {
    pub i: Vec<f64>,
    pub f: Vec<f64>,
    /// `re[k][j]` is Re Z at `i[k]`, `f[j]`.
    pub re: Vec<Vec<f64>>,
    /// Zero-level contour as line segments of (i, f) pairs.
    pub contour: Vec<[(f64, f64); 2]>,
}

impl RezMap {
    pub fn apex(&self) -> Option<(f64, f64)> {
        self.contour.iter().flat_map(|s| s.iter().copied()).max_by(|a, b| a.1.total_cmp(&b.1))
    }
}

pub fn rez_map(i_grid: &[f64], f_grid: &[f64], c: &ModelCoefficients) -> Result<RezMap> {
    let re: Vec<Vec<f64>> = i_grid
        .par_iter()
        .map(|&i| {
            let m = SmallSignalModel::at_current(i, c)?;
            Ok(f_grid.iter().map(|f| m.impedance(2.0 * std::f64::consts::PI * f).re).collect())
        })
        .collect::<Result<_>>()?;
    let contour = zero_contour(i_grid, f_grid, &re);
    Ok(RezMap { i: i_grid.to_vec(), f: f_grid.to_vec(), re, contour })
}

/// Marching squares on the log-log grid; crossings are placed by linear
/// interpolation of the field along each cell edge.
fn zero_contour(i: &[f64], f: &[f64], v: &[Vec<f64>]) -> Vec<[(f64, f64); 2]> {
    let li: Vec<f64> = i.iter().map(|t| t.ln()).collect();
    let lf: Vec<f64> = f.iter().map(|t| t.ln()).collect();
    let cross = |(a, va): ((f64, f64), f64), (b, vb): ((f64, f64), f64)| {
        let t = va / (va - vb);
        ((a.0 + t * (b.0 - a.0)).exp(), (a.1 + t * (b.1 - a.1)).exp())
    };
    let mut segs = Vec::new();
    for k in 0..i.len().saturating_sub(1) {
        for j in 0..f.len().saturating_sub(1) {
            let corners = [
                ((li[k], lf[j]), v[k][j]),
                ((li[k + 1], lf[j]), v[k + 1][j]),
                ((li[k + 1], lf[j + 1]), v[k + 1][j + 1]),
                ((li[k], lf[j + 1]), v[k][j + 1]),
            ];
            let pts: Vec<(f64, f64)> = (0..4)
                .filter_map(|e| {
                    let (a, b) = (corners[e], corners[(e + 1) % 4]);
                    ((a.1 < 0.0) != (b.1 < 0.0)).then(|| cross(a, b))
                })
                .collect();
            match pts.len() {
                2 => segs.push([pts[0], pts[1]]),
                4 => {
                    let centre: f64 = corners.iter().map(|c| c.1).sum::<f64>() / 4.0;
                    if (centre < 0.0) == (corners[0].1 < 0.0) {
                        segs.push([pts[0], pts[3]]);
                        segs.push([pts[1], pts[2]]);
                    } else {
                        segs.push([pts[0], pts[1]]);
                        segs.push([pts[2], pts[3]]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub r_ch: f64,
    pub x_apex: f64,
    pub i_q_apex: f64,
    pub f_max_hz: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScalingStudy {
    pub rows: Vec<ScalingRow>,
    /// Slope of i_Q at the apex versus r_ch (A/m).
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Highest frequency of the EOC region and the operating point where it
/// occurs, maximised over the NDR branch of the DC locus.
pub fn eoc_apex(c: &ModelCoefficients) -> Result<(FixedPoint1D, f64)> {
    let locus = dc_locus(&default_locus_grid(), c)?;
    let (a, b) = (locus.peak.x_q.ln(), locus.trough.x_q.ln());
    let w = |l: f64| {
        let q = FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c);
        SmallSignalModel::at(&q, c).ok().and_then(|m| m.max_active_frequency()).unwrap_or(0.0)
    };
    let grid = linspace(a, b, 402);
    let k = (1..grid.len() - 1)
        .max_by(|&p, &q| w(grid[p]).total_cmp(&w(grid[q])))
        .ok_or(Error::Resolution("empty NDR branch"))?;
    let l = golden_max(w, grid[k - 1], grid[k + 1], 1e-12);
    let q = FixedPoint1D::at_state(StateFraction::from_ln(l)?, c);
    Ok((q, w(l)))
}

pub fn scaling_study(r_ch_list: &[f64], base: &DeviceParams) -> Result<ScalingStudy> {
    let rows: Vec<ScalingRow> = r_ch_list
        .par_iter()
        .map(|&r| {
            let c = derive_coefficients(&base.with_geometry(r, base.l_ch))?;
            let (q, w) = eoc_apex(&c)?;
            Ok(ScalingRow { r_ch: r, x_apex: q.x_q.x(), i_q_apex: q.i_q, f_max_hz: w / (2.0 * std::f64::consts::PI) })
        })
        .collect::<Result<_>>()?;
    let r: Vec<f64> = rows.iter().map(|s| s.r_ch).collect();
    let i: Vec<f64> = rows.iter().map(|s| s.i_q_apex).collect();
    let (slope, intercept, r2) = linear_fit(&r, &i);
    Ok(ScalingStudy { rows, slope, intercept, r2 })
}
