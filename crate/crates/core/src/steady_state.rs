//! DC operating points of the isolated memristor and the constant-voltage
//! saddle-node bifurcation.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_rate, memristance, ModelCoefficients, StateFraction};
use crate::roots::{bisect, golden_max, grid_roots, linspace};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FixedPoint1D {
    pub x_q: StateFraction,
    pub i_q: f64,
    pub v_q: f64,
    pub r_q: f64,
}

impl FixedPoint1D {
    pub fn at_state(x: StateFraction, c: &ModelCoefficients) -> Self {
        let i_q = dc_current_at_state(x, c);
        let r_q = memristance(x, c);
        Self { x_q: x, i_q, v_q: r_q * i_q, r_q }
    }

    /// Operating point carrying a given (positive) current.
    pub fn at_current(i: f64, c: &ModelCoefficients) -> Result<Self> {
        Ok(Self::at_state(state_at_current(i, c)?, c))
    }

    /// Same state driven by the opposite current.
    pub fn reversed(self) -> Self {
        Self { i_q: -self.i_q, v_q: -self.v_q, ..self }
    }
}

pub fn dc_current_at_state(x: StateFraction, c: &ModelCoefficients) -> f64 {
    let xv = x.x();
    (-c.c * c.a * (1.0 + c.b * xv * xv) / x.ln()).sqrt()
}

/// Inverts the monotone DC current law i_Q(x_Q).
pub fn state_at_current(i: f64, c: &ModelCoefficients) -> Result<StateFraction> {
    if !(i.is_finite() && i > 0.0) {
        return Err(Error::Degenerate("steady-state current must be positive"));
    }
    // i²·(−ln x) lies between CA and CA(1+B)
    let ca = c.c * c.a;
    let lo = -ca * (1.0 + c.b) / (i * i) * 1.01 - 1.0;
    let hi = (-ca / (i * i) * (1.0 - 1e-9)).min(-f64::MIN_POSITIVE);
    let f = |l: f64| {
        let x = l.exp();
        (ca * (1.0 + c.b * x * x) / -l).ln() - 2.0 * i.ln()
    };
    let l = bisect(f, lo, hi, 0.0)?;
    StateFraction::from_ln(l)
}

/// Log-spaced grid in x.
pub fn log_grid(x_min: f64, x_max: f64, n: usize) -> Vec<StateFraction> {
    linspace(x_min.ln(), x_max.ln(), n).into_iter().filter_map(|l| StateFraction::from_ln(l).ok()).collect()
}

/// Log-spaced in x from `x_min` to 0.5, then log-spaced in 1 − x from 0.5
/// down to `gap_min`; the shared point 0.5 appears once.
pub fn two_sided_grid(x_min: f64, gap_min: f64, n_each: usize) -> Vec<StateFraction> {
    let mut g = log_grid(x_min, 0.5, n_each);
    let upper = linspace(0.5f64.ln(), gap_min.ln(), n_each);
    g.extend(upper.into_iter().skip(1).filter_map(|lg| StateFraction::from_ln((-lg.exp()).ln_1p()).ok()));
    g
}

pub fn default_locus_grid() -> Vec<StateFraction> {
    two_sided_grid(1e-6, 1e-6, 2000)
}

#[derive(Debug, Clone)]
pub struct DcLocus {
    pub points: Vec<FixedPoint1D>,
    pub i_c1: f64,
    pub i_c2: f64,
    pub peak: FixedPoint1D,
    pub trough: FixedPoint1D,
}

pub fn dc_locus(grid: &[StateFraction], c: &ModelCoefficients) -> Result<DcLocus> {
    if grid.len() < 100 {
        return Err(Error::Resolution("locus grid needs at least 100 points"));
    }
    let points: Vec<FixedPoint1D> = grid.iter().map(|&x| FixedPoint1D::at_state(x, c)).collect();
    let v: Vec<f64> = points.iter().map(|p| p.v_q).collect();
    let peak_k = (1..v.len() - 1)
        .filter(|&k| v[k] >= v[k - 1] && v[k] > v[k + 1])
        .max_by(|&a, &b| v[a].total_cmp(&v[b]))
        .ok_or(Error::Resolution("no local maximum of v_Q"))?;
    let trough_k = (peak_k + 1..v.len() - 1)
        .filter(|&k| v[k] <= v[k - 1] && v[k] < v[k + 1])
        .min_by(|&a, &b| v[a].total_cmp(&v[b]))
        .ok_or(Error::Resolution("no local minimum of v_Q"))?;
    let vq = |l: f64| FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c).v_q;
    let refine = |k: usize, sign: f64| {
        let (a, b) = (points[k - 1].x_q.ln(), points[k + 1].x_q.ln());
        let l = golden_max(|l| sign * vq(l), a, b, 1e-12 * a.abs().max(1e-3));
        FixedPoint1D::at_state(StateFraction::from_ln(l).unwrap(), c)
    };
    let peak = refine(peak_k, 1.0);
    let trough = refine(trough_k, -1.0);
    Ok(DcLocus { points, i_c1: peak.i_q, i_c2: trough.i_q, peak, trough })
}

pub fn critical_currents(locus: &DcLocus) -> (f64, f64) {
    (locus.i_c1, locus.i_c2)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Stability {
    Stable,
    Unstable,
    SemiStable,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VoltageRoot {
    pub x: f64,
    pub stability: Stability,
}

fn route_grid() -> Vec<StateFraction> {
    two_sided_grid(StateFraction::GENERIC_MIN, 1e-12, 1000)
}

/// Local maxima of the log-rate along the dynamic route, refined by
/// golden section. The log-rate has the sign of the dynamic route.
fn route_maxima(v0: f64, c: &ModelCoefficients, grid: &[StateFraction]) -> Vec<(f64, f64)> {
    let g = |l: f64| {
        let x = StateFraction::from_ln(l).unwrap();
        log_rate(x, v0 * v0 / memristance(x, c), c)
    };
    let vals: Vec<f64> = grid.iter().map(|x| g(x.ln())).collect();
    (1..grid.len() - 1)
        .filter(|&k| vals[k] >= vals[k - 1] && vals[k] > vals[k + 1])
        .map(|k| {
            let l = golden_max(g, grid[k - 1].ln(), grid[k + 1].ln(), 1e-14);
            (l, g(l))
        })
        .collect()
}

pub fn fixed_points_const_voltage(v0: f64, c: &ModelCoefficients) -> Vec<VoltageRoot> {
    let grid = route_grid();
    let lgrid: Vec<f64> = grid.iter().map(|x| x.ln()).collect();
    let g = |l: f64| {
        let x = StateFraction::from_ln(l).unwrap();
        log_rate(x, v0 * v0 / memristance(x, c), c)
    };
    let mut roots: Vec<VoltageRoot> = grid_roots(g, &lgrid, 1e-15)
        .into_iter()
        .map(|l| {
            let h = 1e-7 * l.abs().max(1e-9);
            let stability =
                if g(l - h) > g((l + h).min(-f64::MIN_POSITIVE)) { Stability::Stable } else { Stability::Unstable };
            VoltageRoot { x: l.exp(), stability }
        })
        .collect();
    // Tangential contact produces no sign change; detect it from the maxima.
    for (l, m) in route_maxima(v0, c, &grid) {
        let x = StateFraction::from_ln(l).unwrap();
        let scale = (c.c / l).abs() / (c.d * crate::model::scaled_enthalpy(x, c));
        if m <= 0.0 && m >= -1e-9 * scale {
            roots.push(VoltageRoot { x: l.exp(), stability: Stability::SemiStable });
        }
    }
    roots.sort_by(|a, b| a.x.total_cmp(&b.x));
    roots.dedup_by(|a, b| (a.x - b.x).abs() < 1e-9);
    roots
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SaddleNodeResult {
    pub v_star: f64,
    pub roots_below: usize,
    pub roots_at: usize,
    pub roots_above: usize,
    pub root_pairs: Vec<VoltageRoot>,
}

pub fn saddle_node_voltage(c: &ModelCoefficients) -> Result<SaddleNodeResult> {
    let grid = route_grid();
    let best = |v: f64| route_maxima(v, c, &grid).into_iter().map(|(_, m)| m).fold(f64::NEG_INFINITY, f64::max);
    let mut hi = 0.01;
    while best(hi) <= 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err(Error::Solver("dynamic route never crosses zero"));
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid == lo || mid == hi {
            break;
        }
        if best(mid) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let v_star = lo;
    let dv = 1e-3 * v_star;
    let root_pairs = fixed_points_const_voltage(v_star, c);
    Ok(SaddleNodeResult {
        v_star,
        roots_below: fixed_points_const_voltage(v_star - dv, c).len(),
        roots_at: root_pairs.len(),
        roots_above: fixed_points_const_voltage(v_star + dv, c).len(),
        root_pairs,
    })
}
