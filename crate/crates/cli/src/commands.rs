use anyhow::Result;
use mott_core::config::RunConfig;
use mott_core::dynamics::SweepOptions;
use mott_core::output::{num, Cell, ResultBundle, Table};
use mott_core::pa_circuit::default_bracket;
use mott_core::roots::{linspace, logspace};
use mott_core::small_signal::{impedance_coeffs, nyquist};
use mott_core::steady_state::two_sided_grid;
use mott_core::svg::{render_figure, render_nullclines, render_rez_map, FigureKind};
use mott_core::*;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::args::{CircuitArgs, Command, FreqArgs, SweepArgs};

pub struct Context {
    pub cfg: RunConfig,
    pub coeffs: ModelCoefficients,
    pub svg: bool,
}

impl Context {
    fn circuit(&self, a: &CircuitArgs) -> Result<CircuitParams> {
        let d = self.cfg.circuit;
        Ok(CircuitParams::new(a.rs.unwrap_or(d.rs), a.cp.unwrap_or(d.cp), a.vdc.unwrap_or(d.vdc))?)
    }

    fn locus_grid(&self) -> Vec<StateFraction> {
        let g = &self.cfg.grids;
        two_sided_grid(g.x_min, g.x_gap_min, g.x_points.div_ceil(2))
    }

    fn freqs(&self, f: &FreqArgs) -> Vec<f64> {
        let g = &self.cfg.grids;
        logspace(f.f_min.unwrap_or(g.f_min), f.f_max.unwrap_or(g.f_max), f.f_points.unwrap_or(g.f_points))
    }

    fn bundle(&self, name: &str, extra: Value) -> ResultBundle {
        let p = &self.cfg.device;
        let device = json!({
            "c_p": p.c_p, "dh_tr": p.dh_tr, "kappa": p.kappa, "rho_met": p.rho_met, "rho_ins": p.rho_ins,
            "dT": p.d_t, "r_ch": p.r_ch, "L_ch": p.l_ch, "T0": p.t0, "Tc": p.tc,
        });
        ResultBundle::new(name, json!({ "device": device, "args": extra }))
    }

    fn figure(&self, b: &mut ResultBundle, name: &str, draw: impl FnOnce() -> mott_core::Result<String>) -> Result<()> {
        if self.svg {
            b.figures.push((name.into(), draw()?));
        }
        Ok(())
    }
}

fn circuit_echo(cp: &CircuitParams) -> Value {
    json!({ "rs_ohm": cp.rs, "cp_F": cp.cp, "vdc_V": cp.vdc })
}

/// Bad flag values that clap cannot catch on its own.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

fn parse_shape(s: &str) -> Result<(usize, usize)> {
    let bad = || UsageError(format!("expected a grid NxM with N, M >= 1, got `{s}`"));
    let (a, b) = s.split_once(['x', 'X']).ok_or_else(bad)?;
    match (a.trim().parse::<usize>(), b.trim().parse::<usize>()) {
        (Ok(a), Ok(b)) if a > 0 && b > 0 => Ok((a, b)),
        _ => Err(bad().into()),
    }
}

fn sweep_values(s: &SweepArgs) -> Result<Vec<f64>> {
    if s.steps < 2 {
        return Err(UsageError("--steps must be at least 2".into()).into());
    }
    Ok(linspace(s.from, s.to, s.steps))
}

fn route_table(xs: &[StateFraction], f: impl Fn(StateFraction) -> f64) -> Table {
    let mut t = Table::new("route", &["x", "dxdt_per_s"]);
    for &x in xs {
        t.push(vec![x.x().into(), f(x).into()]);
    }
    t
}

fn op_row(op: &CircuitOperatingPoint) -> Vec<Cell> {
    vec![
        op.x_q().into(),
        op.v_q().into(),
        op.q.i_q.into(),
        (op.trdet_class.id() as usize).into(),
        op.trdet_class.name().into(),
        op.tr.into(),
        op.det.into(),
        op.eigs[0].re.into(),
        op.eigs[0].im.into(),
        op.eigs[1].re.into(),
        op.eigs[1].im.into(),
    ]
}

const OP_COLUMNS: [&str; 11] =
    ["x_q", "v_q", "i_q_A", "class_id", "class_name", "tr", "det", "eig1_re", "eig1_im", "eig2_re", "eig2_im"];

fn op_json(op: &CircuitOperatingPoint) -> Value {
    json!({
        "x_q": num(op.x_q()),
        "v_q": num(op.v_q()),
        "class_id": op.trdet_class.id(),
        "class_name": op.trdet_class.name(),
        "tr": num(op.tr),
        "det": num(op.det),
        "eig_re": [num(op.eigs[0].re), num(op.eigs[1].re)],
        "eig_im": [num(op.eigs[0].im), num(op.eigs[1].im)],
    })
}

fn verdict_cells(v: &Verdict) -> Vec<Cell> {
    let (x0, x1, v0, v1, period) = match v {
        Verdict::FixedPoint { x, v } => (*x, *x, *v, *v, f64::NAN),
        Verdict::Cycle(lc) => (lc.x_min, lc.x_max, lc.v_min, lc.v_max, lc.period),
        Verdict::Inconclusive { .. } => (f64::NAN, f64::NAN, f64::NAN, f64::NAN, f64::NAN),
    };
    vec![v.tag().into(), x0.into(), x1.into(), v0.into(), v1.into(), period.into()]
}

const VERDICT_COLUMNS: [&str; 6] = ["outcome", "x_min", "x_max", "v_min_V", "v_max_V", "period_s"];

fn with_verdict<'a>(lead: &[&'a str]) -> Vec<&'a str> {
    lead.iter().copied().chain(VERDICT_COLUMNS).collect()
}

pub fn run(cmd: &Command, ctx: &Context) -> Result<ResultBundle> {
    let c = &ctx.coeffs;
    match cmd {
        Command::Pop { x_min, points } => {
            let mut b = ctx.bundle("pop", json!({ "x_min": x_min, "points": points }));
            let xs = two_sided_grid(*x_min, 1e-9, points.div_ceil(2).max(2));
            let mut t = route_table(&xs, |x| kinetic_current(x, 0.0, c));
            t.name = "pop".into();
            ctx.figure(&mut b, "pop", || render_figure(&t, FigureKind::Pop))?;
            b.tables.push(t);
            Ok(b)
        }
        Command::DynamicRoute { current, voltage, x_min, points } => {
            let mut b = ctx.bundle(
                "dynamic-route",
                json!({ "current_A": current, "voltage_V": voltage, "x_min": x_min, "points": points }),
            );
            let xs = two_sided_grid(*x_min, 1e-9, points.div_ceil(2).max(2));
            let t = match (current, voltage) {
                (Some(i), _) => route_table(&xs, |x| kinetic_current(x, *i, c)),
                (None, Some(v)) => route_table(&xs, |x| kinetic_voltage(x, *v, c)),
                (None, None) => unreachable!("clap enforces one drive"),
            };
            ctx.figure(&mut b, "route", || render_figure(&t, FigureKind::DynamicRoute))?;
            b.tables.push(t);
            if let Some(v) = voltage {
                let mut r = Table::new("equilibria", &["x", "stability"]);
                for q in fixed_points_const_voltage(*v, c) {
                    r.push(vec![q.x.into(), stability_name(q.stability).into()]);
                }
                b.tables.push(r);
            }
            Ok(b)
        }
        Command::DcLocus => {
            let mut b = ctx.bundle("dc-locus", json!({}));
            let locus = dc_locus(&ctx.locus_grid(), c)?;
            let mut t = Table::new("dc_locus", &["x_q", "i_q_A", "v_q_V", "r_ch_ohm"]);
            for p in &locus.points {
                t.push(vec![p.x_q.x().into(), p.i_q.into(), p.v_q.into(), p.r_q.into()]);
            }
            let mut k = Table::new("critical", &["point", "x_q", "i_q_A", "v_q_V"]);
            for (name, p) in [("peak", locus.peak), ("trough", locus.trough)] {
                k.push(vec![name.into(), p.x_q.x().into(), p.i_q.into(), p.v_q.into()]);
            }
            ctx.figure(&mut b, "dc_locus", || render_figure(&t, FigureKind::DcLocus))?;
            b.tables.extend([t, k]);
            Ok(b)
        }
        Command::SaddleNode => {
            let mut b = ctx.bundle("saddle-node", json!({}));
            let s = saddle_node_voltage(c)?;
            let mut t = Table::new("saddle_node", &["v_star_V", "x", "stability"]);
            for r in &s.root_pairs {
                t.push(vec![s.v_star.into(), r.x.into(), stability_name(r.stability).into()]);
            }
            let roots: Vec<Value> = s
                .root_pairs
                .iter()
                .map(|r| json!({ "x": num(r.x), "stability": stability_name(r.stability) }))
                .collect();
            b.json = Some(json!({ "v_star_V": num(s.v_star), "roots": roots }));
            b.tables.push(t);
            Ok(b)
        }
        Command::Linearize { iq } => {
            let mut b = ctx.bundle("linearize", json!({ "iq_A": iq }));
            let m = SmallSignalModel::at_current(*iq, c)?;
            let k = impedance_coeffs(&m.ve);
            let fields: [(&str, Cell); 19] = [
                ("i_q_A", m.q.i_q.into()),
                ("x_q", m.q.x_q.x().into()),
                ("v_q_V", m.q.v_q.into()),
                ("a11", m.lc.a11.into()),
                ("a12_ohm", m.lc.a12.into()),
                ("b11_per_s", m.lc.b11.into()),
                ("b12", m.lc.b12.into()),
                ("r1_ohm", m.ve.r1.into()),
                ("r2_ohm", m.ve.r2.into()),
                ("c1_F", m.ve.c1.into()),
                ("a0", m.coeffs.a0.into()),
                ("a1_s", m.coeffs.a1.into()),
                ("b0_ohm", m.coeffs.b0.into()),
                ("b1_ohm_s", m.coeffs.b1.into()),
                ("pole_per_s", m.pz.p.into()),
                ("zero_per_s", m.pz.z.into()),
                ("k_ohm", m.pz.k.into()),
                ("class", m.pz.activity_class.label().into()),
                ("b1_over_a1_ohm", (k.b1 / k.a1).into()),
            ];
            let names: Vec<&str> = fields.iter().map(|f| f.0).collect();
            let mut t = Table::new("linearize", &names);
            t.push(fields.into_iter().map(|f| f.1).collect());
            b.json = Some(t.to_json()[0].clone());
            b.tables.push(t);
            Ok(b)
        }
        Command::PoleZero { iq, sweep } => {
            let mut b = ctx.bundle("pole-zero", json!({ "iq_A": iq, "sweep": sweep }));
            let points = if *sweep {
                dc_locus(&ctx.locus_grid(), c)?.points
            } else {
                vec![FixedPoint1D::at_current(iq.expect("clap enforces --iq or --sweep"), c)?]
            };
            let rows: Vec<(FixedPoint1D, PoleZero)> =
                points.par_iter().map(|q| Ok((*q, pole_zero(q, c)?))).collect::<mott_core::Result<_>>()?;
            let mut t =
                Table::new("pole_zero", &["i_q_A", "x_q", "v_q_V", "pole_per_s", "zero_per_s", "k_ohm", "class"]);
            for (q, pz) in rows {
                t.push(vec![
                    q.i_q.into(),
                    q.x_q.x().into(),
                    q.v_q.into(),
                    pz.p.into(),
                    pz.z.into(),
                    pz.k.into(),
                    pz.activity_class.label().into(),
                ]);
            }
            b.tables.push(t);
            Ok(b)
        }
        Command::Nyquist { iq, freq } => {
            let f = ctx.freqs(freq);
            let mut b = ctx.bundle(
                "nyquist",
                json!({ "iq_A": iq, "f_min_Hz": f[0], "f_max_Hz": f[f.len() - 1], "points": f.len() }),
            );
            let q = FixedPoint1D::at_current(*iq, c)?;
            let mut t = Table::new("nyquist", &["f_Hz", "re_ohm", "im_ohm"]);
            for (fk, s) in f.iter().zip(nyquist(&q, &f, c)?) {
                t.push(vec![(*fk).into(), s.re.into(), s.im.into()]);
            }
            ctx.figure(&mut b, "nyquist", || render_figure(&t, FigureKind::Nyquist))?;
            b.tables.push(t);
            Ok(b)
        }
        Command::RezMap { i_min, i_max, i_points, freq } => {
            let g = &ctx.cfg.grids;
            let i = logspace(i_min.unwrap_or(g.i_min), i_max.unwrap_or(g.i_max), i_points.unwrap_or(g.i_points));
            let f = ctx.freqs(freq);
            let mut b = ctx.bundle(
                "rez-map",
                json!({ "i_min_A": i[0], "i_max_A": i[i.len() - 1], "i_points": i.len(),
                        "f_min_Hz": f[0], "f_max_Hz": f[f.len() - 1], "f_points": f.len() }),
            );
            let m = rez_map(&i, &f, c)?;
            let mut t = Table::new("rez_map", &["i_A", "f_Hz", "re_ohm"]);
            for (k, ik) in m.i.iter().enumerate() {
                for (j, fj) in m.f.iter().enumerate() {
                    t.push(vec![(*ik).into(), (*fj).into(), m.re[k][j].into()]);
                }
            }
            let mut ct = Table::new("rez_contour", &["segment", "i_A", "f_Hz"]);
            for (s, seg) in m.contour.iter().enumerate() {
                for p in seg {
                    ct.push(vec![s.into(), p.0.into(), p.1.into()]);
                }
            }
            ctx.figure(&mut b, "rez_map", || render_rez_map(&t, Some(&ct)))?;
            b.tables.extend([t, ct]);
            Ok(b)
        }
        Command::Scaling { r_ch } => {
            let mut b = ctx.bundle("scaling", json!({ "r_ch_m": r_ch }));
            let st = scaling_study(r_ch, &ctx.cfg.device)?;
            let mut t = Table::new("scaling", &["r_ch_m", "x_apex", "i_q_apex_A", "f_max_Hz"]);
            for r in &st.rows {
                t.push(vec![r.r_ch.into(), r.x_apex.into(), r.i_q_apex.into(), r.f_max_hz.into()]);
            }
            let mut fit = Table::new("scaling_fit", &["slope_A_per_m", "intercept_A", "r2"]);
            fit.push(vec![st.slope.into(), st.intercept.into(), st.r2.into()]);
            b.tables.extend([t, fit]);
            Ok(b)
        }
        Command::PaFixedPoints { circuit } => {
            let cp = ctx.circuit(circuit)?;
            let mut b = ctx.bundle("pa-fixed-points", circuit_echo(&cp));
            let ops = pa_operating_points(&cp, c)?;
            let mut t = Table::new("pa_fixed_points", &OP_COLUMNS);
            for op in &ops {
                t.push(op_row(op));
            }
            b.json = Some(Value::Array(ops.iter().map(op_json).collect()));
            b.tables.push(t);
            Ok(b)
        }
        Command::PaTrdetSweep { sweep, circuit } => {
            let cp = ctx.circuit(circuit)?;
            let values = sweep_values(sweep)?;
            let mut b = ctx.bundle(
                "pa-trdet-sweep",
                json!({ "vary": sweep.vary.name(), "from": sweep.from, "to": sweep.to, "steps": sweep.steps, "circuit": circuit_echo(&cp) }),
            );
            let pts = trdet_sweep(sweep.vary, &values, &cp, c)?;
            let cols: Vec<&str> = ["param", "branch"].into_iter().chain(OP_COLUMNS).collect();
            let mut t = Table::new("trdet_sweep", &cols);
            for p in &pts {
                let mut row = vec![p.param.into(), p.branch.into()];
                row.extend(op_row(&p.op));
                t.push(row);
            }
            ctx.figure(&mut b, "trdet", || render_figure(&t, FigureKind::TrDet))?;
            b.tables.push(t);
            Ok(b)
        }
        Command::PaCritical { vary, from, to, circuit } => {
            let cp = ctx.circuit(circuit)?;
            let (lo, hi) = default_bracket(*vary);
            let bracket = (from.unwrap_or(lo), to.unwrap_or(hi));
            let mut b = ctx.bundle(
                "pa-critical",
                json!({ "vary": vary.name(), "bracket": [bracket.0, bracket.1], "circuit": circuit_echo(&cp) }),
            );
            let value = critical_parameter(*vary, &cp, c, bracket)?;
            let h = hopf_conditions(*vary, &cp.with(*vary, value), c)?;
            let mut t = Table::new(
                "pa_critical",
                &["param", "critical_value", "nonhyperbolic", "beta_rad_per_s", "d_re_lambda"],
            );
            t.push(vec![
                vary.name().into(),
                value.into(),
                h.nonhyperbolic.to_string().into(),
                h.beta.into(),
                h.d.into(),
            ]);
            b.json = Some(json!({
                "param": vary.name(),
                "critical_value": num(value),
                "hopf": { "nonhyperbolic": h.nonhyperbolic, "beta_rad_per_s": num(h.beta), "d_re_lambda": num(h.d) },
            }));
            b.tables.push(t);
            Ok(b)
        }
        Command::Nullclines { circuit, points, field } => {
            let cp = ctx.circuit(circuit)?;
            let shape = parse_shape(field)?;
            let mut b = ctx.bundle(
                "nullclines",
                json!({ "circuit": circuit_echo(&cp), "points": points, "field": [shape.0, shape.1] }),
            );
            let g = &ctx.cfg.grids;
            let grid = two_sided_grid(g.x_min, g.x_gap_min, points.div_ceil(2).max(2));
            let set = mott_core::nullclines(&cp, c, &grid, shape)?;
            let mut t = Table::new("nullclines", &["x", "v0_V", "v1_V"]);
            for (a, v) in set.x_nullcline.iter().zip(&set.v_nullcline) {
                t.push(vec![a.0.into(), a.1.into(), v.1.into()]);
            }
            let mut ft = Table::new("field", &["x", "v_V", "dx", "dv"]);
            for s in &set.field {
                ft.push(vec![s.x.into(), s.v.into(), s.dx.into(), s.dv.into()]);
            }
            let mut qt = Table::new("fixed_points", &OP_COLUMNS);
            for op in &set.fixed_points {
                qt.push(op_row(op));
            }
            ctx.figure(&mut b, "nullclines", || render_nullclines(&t, Some(&ft), Some(&qt)))?;
            b.tables.extend([t, ft, qt]);
            Ok(b)
        }
        Command::Simulate { circuit, x0, v0, horizon } => {
            let cp = ctx.circuit(circuit)?;
            let horizon = horizon.unwrap_or(200.0 * cp.rs * cp.cp);
            let mut b = ctx.bundle(
                "simulate",
                json!({ "circuit": circuit_echo(&cp), "x0": x0, "v0_V": v0, "horizon_s": horizon }),
            );
            let traj = integrate((*x0, *v0), &cp, c, &IntegrateOptions::new(horizon))?;
            let mut t = Table::new("trajectory", &["t_s", "x", "v_V"]);
            for k in 0..traj.t.len() {
                t.push(vec![traj.t[k].into(), traj.ln_x[k].exp().into(), traj.v[k].into()]);
            }
            let verdict = detect_limit_cycle(&traj);
            let mut s = Table::new("summary", &with_verdict(&["status", "accepted", "rejected"]));
            let mut row: Vec<Cell> = vec![status_name(traj.status).into(), traj.accepted.into(), traj.rejected.into()];
            row.extend(verdict_cells(&verdict));
            s.push(row);
            ctx.figure(&mut b, "trajectory", || render_figure(&t, FigureKind::PhasePortrait))?;
            b.tables.extend([t, s]);
            Ok(b)
        }
        Command::Portrait { circuit, grid, x_range, v_range, horizon } => {
            let cp = ctx.circuit(circuit)?;
            let (nx, nv) = parse_shape(grid)?;
            let vr = v_range.clone().unwrap_or_else(|| vec![0.05 * cp.vdc, 0.95 * cp.vdc]);
            let horizon = horizon.unwrap_or(200.0 * cp.rs * cp.cp);
            let mut b = ctx.bundle(
                "portrait",
                json!({ "circuit": circuit_echo(&cp), "grid": [nx, nv], "x_range": x_range, "v_range_V": vr, "horizon_s": horizon }),
            );
            let ics = mott_core::dynamics::ic_grid((x_range[0], x_range[1]), (vr[0], vr[1]), nx, nv);
            let opts = IntegrateOptions::new(horizon);
            let runs: Vec<(Trajectory, Verdict)> = ics
                .par_iter()
                .map(|&ic| {
                    let tr = integrate(ic, &cp, c, &opts)?;
                    let v = detect_limit_cycle(&tr);
                    Ok((tr, v))
                })
                .collect::<mott_core::Result<_>>()?;
            let mut summary = Table::new("portrait", &with_verdict(&["orbit", "x0", "v0_V"]));
            let mut orbits = Table::new("orbits", &["orbit", "t_s", "x", "v_V"]);
            for (k, ((tr, v), ic)) in runs.iter().zip(&ics).enumerate() {
                let mut row: Vec<Cell> = vec![k.into(), ic.0.into(), ic.1.into()];
                row.extend(verdict_cells(v));
                summary.push(row);
                // the approach to the attractor, at full resolution
                let shown = tr.t.iter().take_while(|&&t| t <= 12.0 * cp.rs * cp.cp).count().max(2);
                for j in 0..shown.min(tr.t.len()) {
                    orbits.push(vec![k.into(), tr.t[j].into(), tr.ln_x[j].exp().into(), tr.v[j].into()]);
                }
            }
            ctx.figure(&mut b, "portrait", || render_figure(&orbits, FigureKind::PhasePortrait))?;
            b.tables.extend([summary, orbits]);
            Ok(b)
        }
        Command::BifSweep { sweep, circuit, horizon, no_refine } => {
            let cp = ctx.circuit(circuit)?;
            let values = sweep_values(sweep)?;
            let mut b = ctx.bundle(
                "bif-sweep",
                json!({ "vary": sweep.vary.name(), "from": sweep.from, "to": sweep.to, "steps": sweep.steps,
                        "circuit": circuit_echo(&cp), "horizon_s": horizon, "refine": !no_refine }),
            );
            let o = SweepOptions { horizon: *horizon, refine: !no_refine, ..Default::default() };
            let d = bifurcation_sweep(sweep.vary, &values, &cp, c, &o)?;
            let mut t = Table::new("bifurcation", &with_verdict(&["param"]));
            for p in &d.points {
                let mut row: Vec<Cell> = vec![p.value.into()];
                row.extend(verdict_cells(&p.verdict));
                t.push(row);
            }
            let mut on = Table::new("onsets", &["onset", "quiet", "oscillating"]);
            for o in &d.onsets {
                on.push(vec![o.value.into(), o.quiet.into(), o.oscillating.into()]);
            }
            ctx.figure(&mut b, "bifurcation", || render_figure(&t, FigureKind::Bifurcation))?;
            b.tables.extend([t, on]);
            Ok(b)
        }
    }
}

fn stability_name(s: Stability) -> &'static str {
    match s {
        Stability::Stable => "stable",
        Stability::Unstable => "unstable",
        Stability::SemiStable => "semi-stable",
    }
}

fn status_name(s: TerminalStatus) -> &'static str {
    match s {
        TerminalStatus::ConvergedFixedPoint => "converged_fixed_point",
        TerminalStatus::Periodic => "periodic",
        TerminalStatus::HorizonReached => "horizon_reached",
        TerminalStatus::Clamped => "clamped",
    }
}
