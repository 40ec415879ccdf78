//! Local analysis of the Pearson–Anson oscillator: the memristor in parallel
//! with Cp, biased through Rs from Vdc.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{ModelCoefficients, StateFraction};
use crate::roots::{bisect, golden_max, grid_roots, linear_fit, logspace};
use crate::small_signal::SmallSignalModel;
use crate::steady_state::{two_sided_grid, FixedPoint1D};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CircuitParams {
    pub rs: f64,
    pub cp: f64,
    pub vdc: f64,
}

impl CircuitParams {
    pub fn new(rs: f64, cp: f64, vdc: f64) -> Result<Self> {
        for (name, v) in [("Rs", rs), ("Cp", cp), ("Vdc", vdc)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParameter { name, reason: format!("must be positive, got {v}") });
            }
        }
        Ok(Self { rs, cp, vdc })
    }

    pub fn get(&self, p: Param) -> f64 {
        match p {
            Param::Rs => self.rs,
            Param::Cp => self.cp,
            Param::Vdc => self.vdc,
        }
    }

    pub fn with(self, p: Param, value: f64) -> Self {
        match p {
            Param::Rs => Self { rs: value, ..self },
            Param::Cp => Self { cp: value, ..self },
            Param::Vdc => Self { vdc: value, ..self },
        }
    }

    pub fn omega0(&self) -> f64 {
        1.0 / (self.rs * self.cp)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Param {
    Rs,
    Cp,
    Vdc,
}

impl Param {
    pub fn name(self) -> &'static str {
        match self {
            Param::Rs => "rs",
            Param::Cp => "cp",
            Param::Vdc => "vdc",
        }
    }
}

impl std::str::FromStr for Param {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "rs" => Ok(Param::Rs),
            "cp" => Ok(Param::Cp),
            "vdc" => Ok(Param::Vdc),
            _ => Err(format!("unknown parameter `{s}` (expected rs, cp or vdc)")),
        }
    }
}

/// Trace–determinant plane classes, numbered as in the classic table.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TrDetClass {
    Saddle = 1,
    StableLine = 2,
    ParallelLines = 3,
    UnstableLine = 4,
    StableNode = 5,
    StableDegenerateNode = 6,
    StableStar = 7,
    StableSpiral = 8,
    Center = 9,
    UnstableSpiral = 10,
    UnstableDegenerateNode = 11,
    UnstableStar = 12,
    UnstableNode = 13,
}

impl TrDetClass {
    pub fn id(self) -> u8 {
        self as u8
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Saddle => "unstable saddle point",
            Self::StableLine => "stable line of fixed points",
            Self::ParallelLines => "parallel lines, or entire plane",
            Self::UnstableLine => "unstable line of fixed points",
            Self::StableNode => "stable node (sink)",
            Self::StableDegenerateNode => "stable degenerate node",
            Self::StableStar => "stable star",
            Self::StableSpiral => "stable spiral sink",
            Self::Center => "stable center",
            Self::UnstableSpiral => "unstable spiral source",
            Self::UnstableDegenerateNode => "unstable degenerate node",
            Self::UnstableStar => "unstable star",
            Self::UnstableNode => "unstable node (source)",
        }
    }

    /// Borderline classes, where the linearization may not carry over to the
    /// nonlinear system.
    pub fn linearization_unreliable(self) -> bool {
        matches!(self.id(), 2 | 3 | 4 | 6 | 7 | 11 | 12)
    }

    pub fn is_stable(self) -> bool {
        matches!(self.id(), 2 | 5 | 6 | 7 | 8 | 9)
    }
}

/// Classifies a point of the trace–determinant plane. `tr_tol` is the
/// absolute trace tolerance for the centre and line cases; repeated
/// eigenvalues are reported as degenerate nodes.
pub fn classify_trdet(tr: f64, det: f64, disc: f64, tr_tol: f64) -> TrDetClass {
    classify(tr, det, disc, tr_tol, false)
}

/// As [`classify_trdet`] but resolves star versus degenerate node from the
/// matrix itself.
pub fn classify_jacobian(j: &[[f64; 2]; 2], tr_tol: f64) -> TrDetClass {
    let tr = j[0][0] + j[1][1];
    let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
    let scale = j.iter().flatten().map(|v| v.abs()).fold(0.0, f64::max);
    let complete =
        j[0][1].abs() <= 1e-12 * scale && j[1][0].abs() <= 1e-12 * scale && (j[0][0] - j[1][1]).abs() <= 1e-12 * scale;
    classify(tr, det, tr * tr - 4.0 * det, tr_tol, complete)
}

fn classify(tr: f64, det: f64, disc: f64, tr_tol: f64, complete: bool) -> TrDetClass {
    use TrDetClass::*;
    let det_tol = tr_tol * tr_tol;
    let tr_zero = tr.abs() <= tr_tol;
    if det < -det_tol {
        return Saddle;
    }
    if det <= det_tol {
        return if tr_zero {
            ParallelLines
        } else if tr < 0.0 {
            StableLine
        } else {
            UnstableLine
        };
    }
    if tr_zero {
        return Center;
    }
    let repeated = disc.abs() <= 1e-12 * (tr * tr + 4.0 * det.abs());
    match (tr < 0.0, repeated, disc > 0.0) {
        (true, true, _) if complete => StableStar,
        (true, true, _) => StableDegenerateNode,
        (false, true, _) if complete => UnstableStar,
        (false, true, _) => UnstableDegenerateNode,
        (true, false, true) => StableNode,
        (true, false, false) => StableSpiral,
        (false, false, false) => UnstableSpiral,
        (false, false, true) => UnstableNode,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitOperatingPoint {
    pub q: FixedPoint1D,
    pub jac: [[f64; 2]; 2],
    pub tr: f64,
    pub det: f64,
    pub eigs: [Complex64; 2],
    pub trdet_class: TrDetClass,
    pub omega0: f64,
    pub omega1: f64,
    pub gamma1: f64,
    pub gammas: f64,
}

impl CircuitOperatingPoint {
    pub fn x_q(&self) -> f64 {
        self.q.x_q.x()
    }

    pub fn v_q(&self) -> f64 {
        self.q.v_q
    }
}

/// Relative trace tolerance for calling a fixed point a centre.
pub const CENTER_TOL: f64 = 1e-6;

pub fn jacobian(q: &FixedPoint1D, cp: &CircuitParams, c: &ModelCoefficients) -> Result<CircuitOperatingPoint> {
    let m = SmallSignalModel::at(q, c)?;
    let lc = m.lc;
    let r = q.r_q;
    let jac = [
        [lc.b11 - lc.b12 * lc.a11 / r, lc.b12 / r],
        [lc.a11 / (r * cp.cp), -(1.0 / (cp.rs * cp.cp) + 1.0 / (r * cp.cp))],
    ];
    let tr = jac[0][0] + jac[1][1];
    let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
    let omega0 = cp.omega0();
    Ok(CircuitOperatingPoint {
        q: *q,
        jac,
        tr,
        det,
        eigs: quadratic_roots(-tr, det),
        trdet_class: classify_jacobian(&jac, CENTER_TOL * omega0),
        omega0,
        omega1: 1.0 / (m.ve.r1 * m.ve.c1),
        gamma1: m.ve.r1 / r,
        gammas: cp.rs / r,
    })
}

/// Roots of s² + d1·s + d0, larger real part (then positive imaginary) first.
fn quadratic_roots(d1: f64, d0: f64) -> [Complex64; 2] {
    let disc = d1 * d1 - 4.0 * d0;
    if disc >= 0.0 {
        let s = disc.sqrt();
        // cancellation-free form
        let big = -0.5 * (d1 + d1.signum() * s);
        let (a, b) = if big != 0.0 { (big, d0 / big) } else { (0.0, 0.0) };
        let (hi, lo) = if a >= b { (a, b) } else { (b, a) };
        [Complex64::new(hi, 0.0), Complex64::new(lo, 0.0)]
    } else {
        let s = (-disc).sqrt() / 2.0;
        [Complex64::new(-d1 / 2.0, s), Complex64::new(-d1 / 2.0, -s)]
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPoles {
    pub p_plus: Complex64,
    pub p_minus: Complex64,
    pub discriminant: f64,
    pub d0: f64,
    pub d1: f64,
    pub d2: f64,
    pub k_prime: f64,
}

pub fn transfer_poles(q: &FixedPoint1D, cp: &CircuitParams, c: &ModelCoefficients) -> Result<TransferPoles> {
    let pz = SmallSignalModel::at(q, c)?.pz;
    let w0 = cp.omega0();
    let gs = cp.rs / q.r_q;
    let d1 = (1.0 + gs) * w0 - pz.z;
    let d0 = -gs * w0 * pz.p - w0 * pz.z;
    let [p_plus, p_minus] = quadratic_roots(d1, d0);
    Ok(TransferPoles { p_plus, p_minus, discriminant: d1 * d1 - 4.0 * d0, d0, d1, d2: 1.0, k_prime: w0 })
}

/// v on the x-nullcline; coincides with the isolated DC locus v_Q(x_Q).
pub fn x_nullcline(x: StateFraction, c: &ModelCoefficients) -> f64 {
    let xv = x.x();
    (-c.a * (1.0 + c.b * xv * xv) * x.ln() / c.c).powf(-0.5)
}

/// v on the v-nullcline: the Rs / R_ch voltage divider.
pub fn v_nullcline(x: StateFraction, cp: &CircuitParams, c: &ModelCoefficients) -> f64 {
    let xv = x.x();
    cp.vdc / (1.0 + cp.rs * c.a * (1.0 + c.b * xv * xv))
}

fn fixed_point_grid() -> Vec<f64> {
    two_sided_grid(1e-145, 1e-9, 3000).into_iter().map(|x| x.ln()).collect()
}

/// DC operating points of the circuit, ordered by increasing x.
pub fn pa_fixed_points(cp: &CircuitParams, c: &ModelCoefficients) -> Vec<FixedPoint1D> {
    let load = |l: f64| {
        let q = FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c);
        q.v_q + cp.rs * q.i_q - cp.vdc
    };
    let mut roots = grid_roots(load, &fixed_point_grid(), 0.0);
    roots.dedup_by(|a, b| (a.exp() - b.exp()).abs() < 1e-12);
    roots.into_iter().map(|l| FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c)).collect()
}

pub fn pa_operating_points(cp: &CircuitParams, c: &ModelCoefficients) -> Result<Vec<CircuitOperatingPoint>> {
    pa_fixed_points(cp, c).iter().map(|q| jacobian(q, cp, c)).collect()
}

/// Bias voltages at which two fixed points merge for a given Rs: the local
/// extrema of the load line v_Q(x) + Rs·i_Q(x). Returns (Vdc, fixed point).
pub fn tangency_points(rs: f64, c: &ModelCoefficients) -> Vec<(f64, FixedPoint1D)> {
    let load = |l: f64| {
        let q = FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c);
        q.v_q + rs * q.i_q
    };
    let grid = fixed_point_grid();
    let vals: Vec<f64> = grid.iter().map(|&l| load(l)).collect();
    let mut out = Vec::new();
    for k in 1..grid.len() - 1 {
        let is_max = vals[k] >= vals[k - 1] && vals[k] > vals[k + 1];
        let is_min = vals[k] <= vals[k - 1] && vals[k] < vals[k + 1];
        if is_max || is_min {
            let s = if is_max { 1.0 } else { -1.0 };
            let l = golden_max(|l| s * load(l), grid[k - 1], grid[k + 1], 1e-14);
            let q = FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c);
            out.push((load(l), q));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub v: f64,
    pub dx: f64,
    pub dv: f64,
}

#[derive(Debug, Clone)]
pub struct NullclineSet {
    pub x_nullcline: Vec<(f64, f64)>,
    pub v_nullcline: Vec<(f64, f64)>,
    pub fixed_points: Vec<CircuitOperatingPoint>,
    /// Distinct (sign dx/dt, sign dv/dt) pairs found on the field grid.
    pub region_signs: Vec<(i8, i8)>,
    pub field: Vec<FieldSample>,
}

/// Right-hand side of the circuit equations in (x, v).
pub fn vector_field(x: StateFraction, v: f64, cp: &CircuitParams, c: &ModelCoefficients) -> (f64, f64) {
    let r = crate::model::memristance(x, c);
    let dx = crate::model::kinetic_voltage(x, v, c);
    let dv = ((cp.vdc - v) / cp.rs - v / r) / cp.cp;
    (dx, dv)
}

pub fn nullclines(
    cp: &CircuitParams,
    c: &ModelCoefficients,
    grid: &[StateFraction],
    field_shape: (usize, usize),
) -> Result<NullclineSet> {
    let x_nullcline = grid.iter().map(|&x| (x.x(), x_nullcline(x, c))).collect();
    let v_nullcline = grid.iter().map(|&x| (x.x(), v_nullcline(x, cp, c))).collect();
    let fixed_points = pa_operating_points(cp, c)?;
    let (nx, nv) = field_shape;
    let mut field = Vec::with_capacity(nx * nv);
    for a in 0..nx {
        for b in 0..nv {
            let x = (a as f64 + 0.5) / nx as f64;
            let v = cp.vdc * (b as f64 + 0.5) / nv as f64;
            let (dx, dv) = vector_field(StateFraction::new(x)?, v, cp, c);
            field.push(FieldSample { x, v, dx, dv });
        }
    }
    let sign = |t: f64| {
        if t > 0.0 {
            1
        } else if t < 0.0 {
            -1
        } else {
            0
        }
    };
    let mut region_signs: Vec<(i8, i8)> = field.iter().map(|s| (sign(s.dx), sign(s.dv))).collect();
    region_signs.sort();
    region_signs.dedup();
    Ok(NullclineSet { x_nullcline, v_nullcline, fixed_points, region_signs, field })
}

/// Operating point followed through a parameter change: the one with the
/// largest x, which carries the oscillatory instability.
fn tracked(cp: &CircuitParams, c: &ModelCoefficients) -> Option<CircuitOperatingPoint> {
    let q = *pa_fixed_points(cp, c).last()?;
    jacobian(&q, cp, c).ok()
}

pub fn default_bracket(which: Param) -> (f64, f64) {
    match which {
        Param::Rs => (1e3, 7e3),
        Param::Cp => (1e-14, 1e-10),
        Param::Vdc => (0.6, 3.0),
    }
}

/// Parameter value at which the trace of the tracked fixed point vanishes.
pub fn critical_parameter(
    which: Param,
    base: &CircuitParams,
    c: &ModelCoefficients,
    bracket: (f64, f64),
) -> Result<f64> {
    let tr = |v: f64| tracked(&base.with(which, v), c).map_or(f64::NAN, |o| o.tr);
    let grid = logspace(bracket.0, bracket.1, 64);
    let vals: Vec<f64> = grid.iter().map(|&v| tr(v)).collect();
    let k = (0..grid.len() - 1)
        .find(|&k| vals[k].is_finite() && vals[k + 1].is_finite() && vals[k] * vals[k + 1] <= 0.0)
        .ok_or(Error::NotFound { what: "trace", lo: bracket.0, hi: bracket.1 })?;
    bisect(tr, grid[k], grid[k + 1], 1e-12 * grid[k])
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerLaw {
    pub a: f64,
    pub b: f64,
    pub r2: f64,
    pub points: Vec<(f64, f64)>,
}

impl PowerLaw {
    pub fn eval(&self, x: f64) -> f64 {
        self.a * x.powf(self.b)
    }
}

/// Fits Cp* = a·Rs^b over the given series resistances.
pub fn cp_star_power_law(rs_list: &[f64], vdc: f64, c: &ModelCoefficients) -> Result<PowerLaw> {
    if rs_list.len() < 3 {
        return Err(Error::Resolution("power-law fit needs at least three Rs values"));
    }
    let points: Vec<(f64, f64)> = rs_list
        .par_iter()
        .map(|&rs| {
            let base = CircuitParams { rs, cp: 1e-12, vdc };
            Ok((rs, critical_parameter(Param::Cp, &base, c, default_bracket(Param::Cp))?))
        })
        .collect::<Result<_>>()?;
    let lx: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ly: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (b, la, r2) = linear_fit(&lx, &ly);
    Ok(PowerLaw { a: la.exp(), b, r2, points })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HopfReport {
    pub nonhyperbolic: bool,
    /// Imaginary part of the eigenvalue pair (rad/s).
    pub beta: f64,
    /// d Re λ / d parameter.
    pub d: f64,
}

pub fn hopf_conditions(which: Param, at: &CircuitParams, c: &ModelCoefficients) -> Result<HopfReport> {
    let op = tracked(at, c).ok_or(Error::Degenerate("no fixed point"))?;
    let p = at.get(which);
    let h = 1e-3 * p;
    let re = |v: f64| tracked(&at.with(which, v), c).map(|o| o.eigs[0].re).ok_or(Error::Degenerate("fixed point lost"));
    let d = (re(p + h)? - re(p - h)?) / (2.0 * h);
    let beta = op.eigs[0].im.abs();
    let nonhyperbolic = op.eigs[0].re.abs() <= CENTER_TOL * op.omega0 && beta > 0.0;
    Ok(HopfReport { nonhyperbolic, beta, d })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepPoint {
    pub param: f64,
    pub branch: usize,
    pub op: CircuitOperatingPoint,
}

/// Fixed points and their classification along a parameter sweep, assembled
/// into branches by nearest-x continuation.
pub fn trdet_sweep(
    which: Param,
    values: &[f64],
    base: &CircuitParams,
    c: &ModelCoefficients,
) -> Result<Vec<SweepPoint>> {
    let per_value: Vec<Vec<CircuitOperatingPoint>> =
        values.par_iter().map(|&v| pa_operating_points(&base.with(which, v), c)).collect::<Result<_>>()?;
    let mut out = Vec::new();
    let mut last: Vec<(usize, f64)> = Vec::new();
    let mut next_branch = 0;
    for (&v, ops) in values.iter().zip(per_value) {
        let mut current = Vec::new();
        for op in ops {
            let x = op.x_q();
            let branch = last
                .iter()
                .filter(|(b, px)| (px - x).abs() < 0.05 && !current.iter().any(|(cb, _)| cb == b))
                .min_by(|a, b| (a.1 - x).abs().total_cmp(&(b.1 - x).abs()))
                .map(|&(b, _)| b)
                .unwrap_or_else(|| {
                    next_branch += 1;
                    next_branch - 1
                });
            current.push((branch, x));
            out.push(SweepPoint { param: v, branch, op });
        }
        last = current;
    }
    Ok(out)
}
