//! Time-domain integration of the oscillator, limit-cycle detection, phase
//! portraits and numerical bifurcation diagrams.
//!
//! The state is integrated as (ln x, v): on the relaxation cycle the metallic
//! fraction collapses to around 1e-37, far below any useful absolute
//! tolerance on x itself.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{log_rate, ModelCoefficients, StateFraction};
use crate::pa_circuit::{CircuitParams, Param};
use crate::roots::bisect_predicate;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerances {
    pub rtol: f64,
    pub atol_ln_x: f64,
    pub atol_v: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { rtol: 1e-9, atol_ln_x: 1e-9, atol_v: 1e-9 }
    }
}

impl Tolerances {
    pub fn scaled(self, k: f64) -> Self {
        Self { rtol: self.rtol * k, atol_ln_x: self.atol_ln_x * k, atol_v: self.atol_v * k }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TerminalStatus {
    ConvergedFixedPoint,
    Periodic,
    HorizonReached,
    Clamped,
}

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub t: Vec<f64>,
    pub ln_x: Vec<f64>,
    pub v: Vec<f64>,
    pub accepted: usize,
    pub rejected: usize,
    pub status: TerminalStatus,
    pub params: CircuitParams,
}

impl Trajectory {
    pub fn x(&self) -> Vec<f64> {
        self.ln_x.iter().map(|l| l.exp()).collect()
    }

    pub fn last(&self) -> (f64, f64) {
        let n = self.t.len() - 1;
        (self.ln_x[n].exp(), self.v[n])
    }
}

struct Rhs<'a> {
    c: &'a ModelCoefficients,
    cp: &'a CircuitParams,
}

impl Rhs<'_> {
    fn eval(&self, l: f64, v: f64) -> Option<[f64; 2]> {
        let s = StateFraction::from_ln(l).ok()?;
        let c = self.c;
        let x = s.x();
        let g = c.a * (1.0 + c.b * x * x);
        let dl = log_rate(s, v * v * g, c);
        let dv = ((self.cp.vdc - v) / self.cp.rs - v * g) / self.cp.cp;
        Some([dl, dv])
    }
}

// Dormand–Prince 5(4) tableau.
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

type Y = [f64; 2];

fn axpy(y: Y, h: f64, terms: &[(f64, Y)]) -> Y {
    let mut out = y;
    for &(w, k) in terms {
        out[0] += h * w * k[0];
        out[1] += h * w * k[1];
    }
    out
}

/// One Dormand–Prince step. Returns the 5th-order solution, the embedded
/// error estimate and the derivative at the new point, or `None` if a stage
/// leaves the state domain.
fn dp_step(f: &Rhs, y: Y, k1: Y, h: f64) -> Option<(Y, Y, Y)> {
    let k2 = f.eval_y(axpy(y, h, &[(A21, k1)]))?;
    let k3 = f.eval_y(axpy(y, h, &[(A31, k1), (A32, k2)]))?;
    let k4 = f.eval_y(axpy(y, h, &[(A41, k1), (A42, k2), (A43, k3)]))?;
    let k5 = f.eval_y(axpy(y, h, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]))?;
    let k6 = f.eval_y(axpy(y, h, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]))?;
    let yn = axpy(y, h, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
    let k7 = f.eval_y(yn)?;
    let err = axpy([0.0; 2], h, &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)]);
    Some((yn, err, k7))
}

impl Rhs<'_> {
    fn eval_y(&self, y: Y) -> Option<Y> {
        self.eval(y[0], y[1])
    }
}

#[derive(Debug, Clone, Copy)]
pub struct IntegrateOptions {
    pub horizon: f64,
    pub tol: Tolerances,
    /// Largest accepted step; also bounds the output spacing.
    pub max_step: Option<f64>,
    pub max_steps: usize,
}

impl IntegrateOptions {
    pub fn new(horizon: f64) -> Self {
        Self { horizon, tol: Tolerances::default(), max_step: None, max_steps: 50_000_000 }
    }
}

pub fn integrate(
    ic: (f64, f64),
    cp: &CircuitParams,
    c: &ModelCoefficients,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let (x0, v0) = ic;
    if !(x0 > 0.0 && x0 < 1.0) || !v0.is_finite() {
        return Err(Error::Domain(x0));
    }
    if opts.horizon.is_nan() || opts.horizon <= 0.0 {
        return Err(Error::InvalidParameter { name: "horizon", reason: "must be positive".into() });
    }
    let f = Rhs { c, cp };
    let tau = cp.rs * cp.cp;
    let h_max = opts.max_step.unwrap_or(tau / 100.0).min(opts.horizon);
    let h_min = 1e-16 * opts.horizon;
    let tol = opts.tol;
    let mut y = [x0.ln(), v0];
    let mut k1 = f.eval_y(y).ok_or(Error::Domain(x0))?;
    let mut t = 0.0;
    let mut h = (1e-6 * tau).min(h_max);
    let mut traj = Trajectory {
        t: vec![0.0],
        ln_x: vec![y[0]],
        v: vec![y[1]],
        accepted: 0,
        rejected: 0,
        status: TerminalStatus::HorizonReached,
        params: *cp,
    };
    let saturated = (1.0f64 - 1e-9).ln();
    let mut t_saturated = 0.0;
    while t < opts.horizon {
        if traj.accepted + traj.rejected >= opts.max_steps {
            return Err(Error::Solver("step budget exhausted"));
        }
        h = h.min(opts.horizon - t).min(h_max);
        let step = dp_step(&f, y, k1, h);
        let (yn, err, k7) = match step {
            Some(s) => s,
            None => {
                traj.rejected += 1;
                h *= 0.5;
                if h < h_min {
                    return Err(Error::Stiffness { t });
                }
                continue;
            }
        };
        let sl = tol.atol_ln_x;
        let sv = tol.atol_v + tol.rtol * y[1].abs().max(yn[1].abs());
        let e = (0.5 * ((err[0] / sl).powi(2) + (err[1] / sv).powi(2))).sqrt();
        if e <= 1.0 {
            t += h;
            if yn[0] > saturated {
                t_saturated += h;
            }
            y = yn;
            k1 = k7;
            traj.accepted += 1;
            traj.t.push(t);
            traj.ln_x.push(y[0]);
            traj.v.push(y[1]);
            h *= if e > 0.0 { (0.9 * e.powf(-0.2)).min(5.0) } else { 5.0 };
        } else {
            traj.rejected += 1;
            h *= (0.9 * e.powf(-0.2)).max(0.2);
            if h < h_min {
                return Err(Error::Stiffness { t });
            }
        }
    }
    traj.status = if t_saturated > 0.01 * opts.horizon {
        TerminalStatus::Clamped
    } else {
        match detect_limit_cycle(&traj) {
            Verdict::FixedPoint { .. } => TerminalStatus::ConvergedFixedPoint,
            Verdict::Cycle(_) => TerminalStatus::Periodic,
            Verdict::Inconclusive { .. } => TerminalStatus::HorizonReached,
        }
    };
    Ok(traj)
}

/// Classic fixed-step RK5 propagation with the same tableau, used to check
/// the order of the method.
pub fn integrate_fixed(
    ic: (f64, f64),
    cp: &CircuitParams,
    c: &ModelCoefficients,
    t_end: f64,
    steps: usize,
) -> Result<(f64, f64)> {
    let f = Rhs { c, cp };
    let h = t_end / steps as f64;
    let mut y = [ic.0.ln(), ic.1];
    let mut k1 = f.eval_y(y).ok_or(Error::Domain(ic.0))?;
    for _ in 0..steps {
        let (yn, _, k7) = dp_step(&f, y, k1, h).ok_or(Error::Solver("fixed step left the domain"))?;
        y = yn;
        k1 = k7;
    }
    Ok((y[0].exp(), y[1]))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LimitCycle {
    pub period: f64,
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// One period of (t, x, v), time measured from the cycle start.
    pub cycle: Vec<(f64, f64, f64)>,
    pub n_periods_used: usize,
    pub period_rel_std: f64,
}

#[derive(Debug, Clone)]
pub enum Verdict {
    FixedPoint { x: f64, v: f64 },
    Cycle(LimitCycle),
    Inconclusive { swing: f64 },
}

impl Verdict {
    pub fn is_cycle(&self) -> bool {
        matches!(self, Verdict::Cycle(_))
    }

    pub fn tag(&self) -> &'static str {
        match self {
            Verdict::FixedPoint { .. } => "fixed_point",
            Verdict::Cycle(_) => "limit_cycle",
            Verdict::Inconclusive { .. } => "inconclusive",
        }
    }
}

/// Times of upward crossings of `level`, linearly interpolated.
pub fn upward_crossings(t: &[f64], y: &[f64], level: f64) -> Vec<f64> {
    (0..t.len().saturating_sub(1))
        .filter(|&k| y[k] < level && y[k + 1] >= level)
        .map(|k| t[k] + (level - y[k]) / (y[k + 1] - y[k]) * (t[k + 1] - t[k]))
        .collect()
}

fn mean(s: &[f64]) -> f64 {
    s.iter().sum::<f64>() / s.len() as f64
}

/// Mean period and relative spread of the crossing spacings.
pub fn period_from_crossings(cross: &[f64]) -> Option<(f64, f64)> {
    if cross.len() < 3 {
        return None;
    }
    let d: Vec<f64> = cross.windows(2).map(|w| w[1] - w[0]).collect();
    let m = mean(&d);
    let var = d.iter().map(|p| (p - m).powi(2)).sum::<f64>() / d.len() as f64;
    Some((m, var.sqrt() / m))
}

/// Minimum cycles in the analysis window for a periodic verdict.
const MIN_CYCLES: usize = 5;

/// Sample index where the post-transient window starts.
fn transient_end(traj: &Trajectory) -> usize {
    let n = traj.t.len();
    let horizon = traj.t[n - 1];
    let fallback = traj.t.partition_point(|&s| s < 0.6 * horizon);
    let tail = &traj.v[fallback..];
    if tail.is_empty() {
        return fallback;
    }
    let level = mean(tail);
    let cross = upward_crossings(&traj.t, &traj.v, level);
    let amps = cycle_amplitudes(&traj.t, &traj.v, &cross);
    for k in 1..amps.len() {
        if (amps[k] - amps[k - 1]).abs() < 1e-3 * amps[k] {
            let start = traj.t.partition_point(|&s| s < cross[k - 1]);
            return start.min(fallback);
        }
    }
    fallback
}

/// Peak-to-peak v between consecutive crossings.
fn cycle_amplitudes(t: &[f64], v: &[f64], cross: &[f64]) -> Vec<f64> {
    cross
        .windows(2)
        .map(|w| {
            let a = t.partition_point(|&s| s < w[0]);
            let b = t.partition_point(|&s| s < w[1]);
            let seg = &v[a..b.max(a + 1).min(v.len())];
            seg.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - seg.iter().cloned().fold(f64::INFINITY, f64::min)
        })
        .collect()
}

pub fn detect_limit_cycle(traj: &Trajectory) -> Verdict {
    let vdc = traj.params.vdc;
    let s = transient_end(traj);
    let t = &traj.t[s..];
    let v = &traj.v[s..];
    let l = &traj.ln_x[s..];
    let (n, last) = (v.len(), v.len().saturating_sub(1));
    if n < 3 {
        return Verdict::Inconclusive { swing: 0.0 };
    }
    let vmax = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let vmin = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let swing = vmax - vmin;
    let level = mean(v);
    let cross = upward_crossings(t, v, level);
    let amps = cycle_amplitudes(t, v, &cross);
    let sustained = amps.len() >= MIN_CYCLES && {
        let tail = &amps[amps.len() - MIN_CYCLES..];
        tail.iter().all(|&a| a > 0.01 * vdc) && tail[MIN_CYCLES - 1] >= tail[0] * (1.0 - 1e-3)
    };
    if sustained {
        let (period, period_rel_std) = period_from_crossings(&cross).expect("at least six crossings");
        let a = t.partition_point(|&s| s < cross[cross.len() - 2]);
        let b = t.partition_point(|&s| s < cross[cross.len() - 1]);
        let t0 = t[a];
        let cycle = (a..b).map(|k| (t[k] - t0, l[k].exp(), v[k])).collect();
        let lmin = l.iter().cloned().fold(f64::INFINITY, f64::min);
        let lmax = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        return Verdict::Cycle(LimitCycle {
            period,
            x_min: lmin.exp(),
            x_max: lmax.exp(),
            v_min: vmin,
            v_max: vmax,
            cycle,
            n_periods_used: cross.len() - 1,
            period_rel_std,
        });
    }
    let lspan = l.iter().cloned().fold(f64::NEG_INFINITY, f64::max) - l.iter().cloned().fold(f64::INFINITY, f64::min);
    let k = n - n / 10 - 1;
    let tail_swing =
        v[k..].iter().cloned().fold(f64::NEG_INFINITY, f64::max) - v[k..].iter().cloned().fold(f64::INFINITY, f64::min);
    if tail_swing < 1e-4 * vdc && lspan < 1.0 {
        return Verdict::FixedPoint { x: l[last].exp(), v: v[last] };
    }
    Verdict::Inconclusive { swing }
}

#[derive(Debug, Clone)]
pub struct Orbit {
    pub ic: (f64, f64),
    pub verdict: Verdict,
}

pub fn phase_portrait(
    ics: &[(f64, f64)],
    cp: &CircuitParams,
    c: &ModelCoefficients,
    opts: &IntegrateOptions,
) -> Result<Vec<Orbit>> {
    ics.par_iter()
        .map(|&ic| {
            let traj = integrate(ic, cp, c, opts)?;
            Ok(Orbit { ic, verdict: detect_limit_cycle(&traj) })
        })
        .collect()
}

/// Evenly spaced grid of initial conditions, `nx` by `nv`.
pub fn ic_grid(x: (f64, f64), v: (f64, f64), nx: usize, nv: usize) -> Vec<(f64, f64)> {
    let xs = crate::roots::linspace(x.0, x.1, nx);
    let vs = crate::roots::linspace(v.0, v.1, nv);
    xs.iter().flat_map(|&a| vs.iter().map(move |&b| (a, b))).collect()
}

#[derive(Debug, Clone)]
pub struct BifPoint {
    pub value: f64,
    pub verdict: Verdict,
}

#[derive(Debug, Clone)]
pub struct BifurcationDiagram {
    pub param: Param,
    pub points: Vec<BifPoint>,
    /// Refined parameter values where the oscillation predicate flips, each
    /// with the final (no oscillation, oscillation) bracket.
    pub onsets: Vec<Onset>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Onset {
    pub value: f64,
    pub quiet: f64,
    pub oscillating: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SweepOptions {
    pub ic: (f64, f64),
    /// Lower bound on the per-point horizon; at least 200·Rs·Cp is used.
    pub horizon: f64,
    pub tol: Tolerances,
    pub refine: bool,
}

impl Default for SweepOptions {
    fn default() -> Self {
        Self { ic: (0.1, 0.39), horizon: 0.0, tol: Tolerances::default(), refine: true }
    }
}

/// Resolution of the onset bisection per parameter.
pub fn onset_resolution(p: Param) -> f64 {
    match p {
        Param::Rs => 1e-3,
        Param::Cp => 1e-18,
        Param::Vdc => 1e-3,
    }
}

pub fn simulate_point(cp: &CircuitParams, c: &ModelCoefficients, o: &SweepOptions) -> Result<Verdict> {
    let horizon = o.horizon.max(200.0 * cp.rs * cp.cp);
    let opts = IntegrateOptions { tol: o.tol, ..IntegrateOptions::new(horizon) };
    Ok(detect_limit_cycle(&integrate(o.ic, cp, c, &opts)?))
}

pub fn oscillates(cp: &CircuitParams, c: &ModelCoefficients, o: &SweepOptions) -> bool {
    simulate_point(cp, c, o).map(|v| v.is_cycle()).unwrap_or(false)
}

/// Refines an onset between `quiet` and `active` parameter values. The
/// bisection runs on an integer lattice of the target resolution so the
/// reported bracket is exactly one resolution step wide.
pub fn refine_onset(
    which: Param,
    quiet: f64,
    active: f64,
    base: &CircuitParams,
    c: &ModelCoefficients,
    o: &SweepOptions,
) -> Onset {
    let res = onset_resolution(which);
    let (a, b) = ((quiet / res).round(), (active / res).round());
    let dir = if b > a { 1.0 } else { -1.0 };
    let (lo, hi) = bisect_predicate(
        |k: f64| {
            let k = k.round();
            oscillates(&base.with(which, (a + dir * k) * res), c, o)
        },
        0.0,
        (b - a).abs(),
        1.0,
    );
    let quiet = (a + dir * lo.round()) * res;
    let oscillating = (a + dir * hi.round()) * res;
    Onset { value: 0.5 * (quiet + oscillating), quiet, oscillating }
}

pub fn bifurcation_sweep(
    which: Param,
    grid: &[f64],
    base: &CircuitParams,
    c: &ModelCoefficients,
    o: &SweepOptions,
) -> Result<BifurcationDiagram> {
    let points: Vec<BifPoint> = grid
        .par_iter()
        .map(|&value| Ok(BifPoint { value, verdict: simulate_point(&base.with(which, value), c, o)? }))
        .collect::<Result<_>>()?;
    let mut onsets = Vec::new();
    if o.refine {
        let pairs: Vec<(f64, f64)> = points
            .windows(2)
            .filter(|w| w[0].verdict.is_cycle() != w[1].verdict.is_cycle())
            .map(|w| if w[1].verdict.is_cycle() { (w[0].value, w[1].value) } else { (w[1].value, w[0].value) })
            .collect();
        onsets = pairs.par_iter().map(|&(q, a)| refine_onset(which, q, a, base, c, o)).collect();
    }
    Ok(BifurcationDiagram { param: which, points, onsets })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn crossings_of_a_sine() {
        let t: Vec<f64> = (0..10_001).map(|k| k as f64 * 1e-3).collect();
        let y: Vec<f64> = t.iter().map(|s| (2.0 * std::f64::consts::PI * s).sin()).collect();
        let c = upward_crossings(&t, &y, 0.0);
        let (p, spread) = period_from_crossings(&c).unwrap();
        assert!((p - 1.0).abs() < 1e-6 && spread < 1e-6);
    }

    #[test]
    fn bad_initial_state() {
        let c = ModelCoefficients::default_device();
        let cp = CircuitParams { rs: 3.4e3, cp: 1e-12, vdc: 1.2 };
        assert!(integrate((1.5, 0.1), &cp, &c, &IntegrateOptions::new(1e-9)).is_err());
    }
}
