//! One function per subcommand. Each returns a [`Report`]: the primary
//! output (CSV or `key=value` text), the same content as JSON, optional
//! side files, and whether a pass/fail verdict held.

use std::fmt::Write as _;

use riesz_core::estimation::{
    envelope_boundedness, fit_endpoint_exponent, lower_bound_constant, power_method_estimate, sweep, sweep_points,
    write_sweep_csv, Endpoint, SweepRow,
};
use riesz_core::exponents::{conjugate_q, exponent_chart};
use riesz_core::mc::potential_at_point_mc;
use riesz_core::operator::{apply, bilinear, dilation_identity_check, PotentialEvaluator};
use riesz_core::profile::{lp_norm_closed, lp_norm_quad};
use riesz_core::{Result, RieszError};
use serde_json::{json, Value};

use crate::config::RunConfig;

/// Tolerance on the endpoint slope against `-kappa`.
pub const SLOPE_TOL: f64 = 0.1;
/// Largest accepted `|quadrature - MC| / std_err`.
pub const MAX_Z: f64 = 3.0;

pub struct Report {
    pub text: String,
    pub json: Value,
    /// `(suffix, content)` files written next to `--out`.
    pub side_files: Vec<(String, String)>,
    /// Lines for stderr.
    pub notes: Vec<String>,
    pub passed: bool,
}

impl Report {
    fn new(text: String, json: Value) -> Report {
        Report { text, json, side_files: Vec::new(), notes: Vec::new(), passed: true }
    }
}

/// JSON has no infinities; write them as strings, like the text output.
fn num(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::String(format!("{x}"))
    }
}

fn rows_json(rows: &[SweepRow]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| {
                json!({
                    "p": num(r.p), "q": num(r.q), "norm_f": num(r.norm_f),
                    "norm_u": num(r.norm_u), "ratio": num(r.ratio), "compensated": num(r.compensated),
                })
            })
            .collect(),
    )
}

fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = Vec::new();
    write_sweep_csv(rows, &mut out).expect("writing to memory");
    String::from_utf8(out).expect("csv is utf-8")
}

pub fn info(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let chart = exponent_chart(&params);
    let ps = cfg
        .p
        .clone()
        .unwrap_or_else(|| (1..=5).map(|k| chart.p_minus + k as f64 * chart.width() / 6.0).collect());
    let mut text = String::new();
    let fields = [
        ("d", params.dim()),
        ("alpha", params.alpha()),
        ("beta", params.beta()),
        ("lambda", params.lambda()),
        ("kappa", chart.kappa),
        ("p_minus", chart.p_minus),
        ("p_plus", chart.p_plus),
        ("q_minus", chart.q_minus),
        ("q_plus", chart.q_plus),
    ];
    let mut obj = serde_json::Map::new();
    for (k, v) in fields {
        writeln!(text, "{k}={v}").unwrap();
        obj.insert(k.to_string(), num(v));
    }
    writeln!(text, "p,q,q_dual").unwrap();
    let mut table = Vec::new();
    for p in ps {
        let g = conjugate_q(&chart, p)?;
        writeln!(text, "{},{},{}", g.p, g.q, g.q_dual).unwrap();
        table.push(json!({"p": num(g.p), "q": num(g.q), "q_dual": num(g.q_dual)}));
    }
    obj.insert("line".into(), Value::Array(table));
    Ok(Report::new(text, Value::Object(obj)))
}

pub fn norm(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let chart = exponent_chart(&params);
    let ps = cfg.p.clone().unwrap_or_else(|| vec![0.5 * (chart.p_minus + chart.p_plus)]);
    let mut text = String::from("p,norm_quad,norm_closed\n");
    let mut rows = Vec::new();
    for p in ps {
        let nq = lp_norm_quad(&f, p, &params, &quad)?;
        let closed = match lp_norm_closed(&f, p, &params) {
            Ok(c) => c,
            Err(RieszError::UnsupportedForm(_)) => None,
            Err(e) => return Err(e),
        };
        let closed_txt = closed.map(|c| c.to_string()).unwrap_or_default();
        writeln!(text, "{p},{nq},{closed_txt}").unwrap();
        rows.push(json!({"p": num(p), "norm_quad": num(nq), "norm_closed": closed.map(num)}));
    }
    Ok(Report::new(text, json!({"profile": f.label(), "rows": rows})))
}

pub fn potential(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let mut report = if let Some(radii) = &cfg.radii {
        let chart = exponent_chart(&params);
        if !riesz_core::profile::in_l_interval(&f, chart.p_minus, chart.p_plus, &params) {
            return Err(RieszError::NotInL(f.label().to_string()));
        }
        let eval = PotentialEvaluator::new(&params, &f, &quad)?;
        let mut text = String::from("r,u\n");
        let mut vals = Vec::new();
        for &r in radii {
            if !(r > 0.0 && r.is_finite()) {
                return Err(RieszError::Config(format!("radii must be positive, got {r}")));
            }
            let u = eval.at(r);
            writeln!(text, "{r},{u}").unwrap();
            vals.push(json!({"r": num(r), "u": num(u)}));
        }
        Report::new(text, json!({"profile": f.label(), "values": vals}))
    } else {
        let u = apply(&params, &f, &quad)?;
        let mut csv = Vec::new();
        u.write_csv(&mut csv).expect("writing to memory");
        let sidecar = u.sidecar_json();
        let vals: Vec<Value> = u.radii.iter().zip(&u.values).map(|(r, v)| json!({"r": num(*r), "u": num(*v)})).collect();
        let side: Value = serde_json::from_str(&sidecar).expect("sidecar is valid json");
        let mut rep = Report::new(
            String::from_utf8(csv).expect("csv is utf-8"),
            json!({"profile": f.label(), "values": vals, "extrapolation": side}),
        );
        rep.side_files.push((".sidecar.json".into(), sidecar + "\n"));
        rep
    };
    if let Some(t) = cfg.t {
        if !(t > 0.0 && t.is_finite()) {
            return Err(RieszError::Config(format!("dilation factor must be positive, got {t}")));
        }
        let dev = dilation_identity_check(&params, &f, t, &quad)?;
        report.notes.push(format!("dilation t={t}: max relative deviation={dev:.3e}"));
        if let Value::Object(m) = &mut report.json {
            m.insert("dilation".into(), json!({"t": num(t), "max_rel_deviation": num(dev)}));
        }
    }
    Ok(report)
}

pub fn bilinear_cmd(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let g = cfg.g_profile(&params)?;
    let b = bilinear(&params, &f, &g, &quad)?;
    let swapped = bilinear(&params.adjoint(), &g, &f, &quad)?;
    let rel = if b == swapped { 0.0 } else { (b - swapped).abs() / b.abs().max(swapped.abs()) };
    let text = format!("B={b}\nB_adjoint_swapped={swapped}\nrelative_difference={rel:.3e}\n");
    Ok(Report::new(
        text,
        json!({"f": f.label(), "g": g.label(), "B": num(b), "B_adjoint_swapped": num(swapped), "relative_difference": num(rel)}),
    ))
}

pub fn sweep_cmd(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let rows = sweep(&params, &f, &cfg.eps_grid(), &quad)?;
    let mut rep = Report::new(sweep_csv(&rows), json!({"profile": f.label(), "rows": rows_json(&rows)}));
    if let Ok(c) = lower_bound_constant(&rows) {
        rep.notes.push(format!("min compensated ratio={c}"));
        if let Value::Object(m) = &mut rep.json {
            m.insert("lower_bound_constant".into(), num(c));
        }
    }
    Ok(rep)
}

pub fn fit(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let chart = exponent_chart(&params);
    let rows = sweep(&params, &f, &cfg.eps_grid(), &quad)?;
    let endpoints = match cfg.endpoint {
        Some(e) => vec![e],
        None => vec![Endpoint::Lower, Endpoint::Upper],
    };
    let mut text = String::new();
    let mut fits = Vec::new();
    let mut passed = true;
    for e in endpoints {
        let fr = fit_endpoint_exponent(&rows, e, &chart)?;
        let ok = fr.matches_kappa(chart.kappa, SLOPE_TOL);
        passed &= ok;
        let name = match e {
            Endpoint::Lower => "lower",
            Endpoint::Upper => "upper",
        };
        let verdict = if ok { "PASS" } else { "FAIL" };
        writeln!(
            text,
            "{name}: slope={} target={}±{SLOPE_TOL} intercept={} residual={} points={} {verdict}",
            fr.slope, -chart.kappa, fr.intercept, fr.residual, fr.points_used
        )
        .unwrap();
        fits.push(json!({
            "endpoint": name, "slope": num(fr.slope), "target": num(-chart.kappa), "tolerance": SLOPE_TOL,
            "intercept": num(fr.intercept), "residual": num(fr.residual), "points_used": fr.points_used, "pass": ok,
        }));
    }
    let mut rep = Report::new(text, json!({"profile": f.label(), "fits": fits, "rows": rows_json(&rows)}));
    rep.passed = passed;
    Ok(rep)
}

pub fn estimate(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let chart = exponent_chart(&params);
    let ps: Vec<f64> = match &cfg.p {
        Some(ps) => ps.clone(),
        None => sweep_points(&chart, &cfg.eps_grid())?.into_iter().map(|x| x.0).collect(),
    };
    let u = apply(&params, &f, &quad)?;
    let mut text = String::from("p,q,ratio_init,v_lower,compensated,iterations,max_decrease,converged\n");
    let mut rows = Vec::new();
    let mut pm_rows = Vec::new();
    let mut init_rows = Vec::new();
    for p in ps {
        let init = riesz_core::operator::ratio_from_potential(&u, &f, &params, p, &quad)?;
        let res = power_method_estimate(&params, p, &f, &quad, &cfg.power_method)?;
        let comp = res.v_lower * chart.compensator(p);
        writeln!(
            text,
            "{p},{},{},{},{comp},{},{},{}",
            res.q,
            init.ratio,
            res.v_lower,
            res.iterate_ratios.len(),
            res.max_decrease(),
            res.converged
        )
        .unwrap();
        pm_rows.push(SweepRow { p, q: res.q, norm_f: 1.0, norm_u: res.v_lower, ratio: res.v_lower, compensated: comp });
        init_rows.push(SweepRow {
            p,
            q: init.q,
            norm_f: init.norm_f,
            norm_u: init.norm_u,
            ratio: init.ratio,
            compensated: init.ratio * chart.compensator(p),
        });
        rows.push(json!({
            "p": num(p), "q": num(res.q), "ratio_init": num(init.ratio), "v_lower": num(res.v_lower),
            "compensated": num(comp), "iterate_ratios": res.iterate_ratios.iter().map(|x| num(*x)).collect::<Vec<_>>(),
            "max_decrease": num(res.max_decrease()), "converged": res.converged,
            "cells": res.cells, "cell_width": num(res.cell_width),
        }));
    }
    let mut rep = Report::new(text, json!({"profile": f.label(), "rows": rows}));
    if !pm_rows.is_empty() {
        let c6 = lower_bound_constant(&init_rows)?;
        let env = envelope_boundedness(&pm_rows)?;
        rep.notes.push(format!("min compensated ratio of the initial profile={c6}"));
        rep.notes.push(format!(
            "compensated power-method envelope max/min={} (consistency check of the upper bound, not a proof)",
            env.max_over_min
        ));
        if let Value::Object(m) = &mut rep.json {
            m.insert("lower_bound_constant".into(), num(c6));
            m.insert(
                "envelope".into(),
                json!({"max_over_min": num(env.max_over_min), "min": num(env.min), "max": num(env.max),
                       "note": "consistency check of the upper bound, not a proof"}),
            );
        }
    }
    Ok(rep)
}

pub fn oracle_check(cfg: &RunConfig) -> Result<Report> {
    let params = cfg.params()?;
    let quad = cfg.quadrature()?;
    let f = cfg.profile(&params)?;
    let radii = cfg.radii.clone().unwrap_or_else(|| vec![0.1, 0.5, 2.0, 5.0, 20.0]);
    let chart = exponent_chart(&params);
    if !riesz_core::profile::in_l_interval(&f, chart.p_minus, chart.p_plus, &params) {
        return Err(RieszError::NotInL(f.label().to_string()));
    }
    let eval = PotentialEvaluator::new(&params, &f, &quad)?;
    let n = cfg.n_samples();
    let seed = cfg.seed();
    let mut text = String::new();
    let mut probes = Vec::new();
    let mut max_z: f64 = 0.0;
    for (i, &r) in radii.iter().enumerate() {
        let exact = eval.at(r);
        let mc = potential_at_point_mc(&params, &f, r, n, seed.wrapping_add(i as u64))?;
        let z = mc.z_score(exact);
        max_z = max_z.max(z);
        writeln!(text, "r={r} quadrature={exact} mc={} std_err={} z={z}", mc.value, mc.std_err).unwrap();
        probes.push(json!({"r": num(r), "quadrature": num(exact), "mc": num(mc.value), "std_err": num(mc.std_err),
                           "z": num(z), "seed": mc.seed, "n_samples": mc.n_samples}));
    }
    let passed = max_z <= MAX_Z;
    writeln!(text, "max z-score={max_z} (limit {MAX_Z}) {}", if passed { "PASS" } else { "FAIL" }).unwrap();
    let mut rep = Report::new(text, json!({"profile": f.label(), "probes": probes, "max_z": num(max_z), "pass": passed}));
    rep.passed = passed;
    Ok(rep)
}
