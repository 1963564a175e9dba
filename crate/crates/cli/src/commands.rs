//! One function per subcommand. Every command writes its CSV outputs plus a
//! JSON manifest capturing the config echo and every tolerance in effect.

use std::path::Path;

use nnls_core::{
    a1_quadrant_zeros, a2_quadrant_zeros, asymptotic_q, norming_constants, q_sol,
    DiscreteSpectrum, EvolutionState, PhaseContext, ReflectionlessData,
};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{CompareMode, RunConfig, Tolerances};
use crate::output::{write_json, CsvWriter, Manifest};
use crate::CliError;

fn manifest(
    dir: &Path,
    command: &str,
    echo: &serde_json::Value,
    tols: &Tolerances,
    outputs: Vec<String>,
    report: serde_json::Value,
) -> Result<(), CliError> {
    let m = Manifest {
        command: command.to_string(),
        config: echo.clone(),
        tolerances: tols.0.clone(),
        outputs,
        report,
    };
    write_json(dir, "manifest.json", &m)?;
    Ok(())
}

fn c_pair(z: Complex64) -> serde_json::Value {
    json!([z.re, z.im])
}

/// Least-squares slope and intercept of y against x.
fn line_fit(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

pub fn cmd_scatter(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let q0 = cfg.potential(config_dir)?;
    let sc = cfg
        .scatter
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `scatter`".into()))?;
    if !(sc.kmin < sc.kmax) || sc.count < 2 {
        return Err(CliError::Config(
            "scatter grid needs kmin < kmax and count >= 2".into(),
        ));
    }
    let grid = nnls_core::reflection_grid(&q0, sc.kmin, sc.kmax, sc.count)
        .map_err(|e| CliError::Pipeline(format!("scattering failed: {e}")))?;

    let mut csv = CsvWriter::new(
        out,
        "scatter.csv",
        &[
            "k", "re_a1", "im_a1", "re_a2", "im_a2", "re_b", "im_b", "re_btilde", "im_btilde",
            "re_r1", "im_r1", "re_r2", "im_r2",
        ],
    );
    for s in &grid.samples {
        csv.row(&[
            s.k.re, s.a1.re, s.a1.im, s.a2.re, s.a2.im, s.b.re, s.b.im, s.btilde.re, s.btilde.im,
            s.r1.re, s.r1.im, s.r2.re, s.r2.im,
        ]);
    }
    let mut outputs = vec![csv.finish()?];

    let d = &grid.diagnostics;
    let checks = [
        ("det_s", d.det_s_residual),
        ("btilde_symmetry", d.btilde_symmetry_residual),
        ("a1_symmetry", d.a1_symmetry_residual),
        ("a2_symmetry", d.a2_symmetry_residual),
        ("jump_identity", d.jump_identity_residual),
    ];
    let mut rows = Vec::new();
    let mut all_pass = d.jost_bound_ok;
    for (name, residual) in checks {
        let tol = tols.get(name);
        let pass = residual <= tol;
        all_pass &= pass;
        rows.push(json!({
            "invariant": name,
            "residual": residual,
            "tolerance": tol,
            "pass": pass,
        }));
    }
    rows.push(json!({
        "invariant": "jost_neumann_bound",
        "pass": d.jost_bound_ok,
    }));
    let report = json!({
        "diagnostics": rows,
        "r1_h1_estimate": d.r1_h1_estimate,
        "pass": all_pass,
    });
    outputs.push(write_json(out, "diagnostics.json", &report)?);
    manifest(out, "scatter", echo, tols, outputs, report.clone())?;
    if !all_pass {
        return Err(CliError::Diagnostic(
            "scattering invariant diagnostics exceeded tolerance (see diagnostics.json)".into(),
        ));
    }
    Ok(())
}

pub fn cmd_spectrum(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let q0 = cfg.potential(config_dir)?;
    let ss = cfg
        .spectrum_search
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `spectrum_search`".into()))?;
    if !(ss.kmax > 0.01) {
        return Err(CliError::Config("spectrum_search.kmax must exceed 0.01".into()));
    }
    let omegas = a1_quadrant_zeros(&q0, ss.kmax)
        .map_err(|e| CliError::Pipeline(format!("a1 zero search failed: {e}")))?;
    let gammas = a2_quadrant_zeros(&q0, ss.kmax)
        .map_err(|e| CliError::Pipeline(format!("a2 zero search failed: {e}")))?;
    let spec = norming_constants(&q0, &omegas, &gammas)
        .map_err(|e| CliError::Pipeline(format!("norming constants failed: {e}")))?;
    let outputs = vec![write_json(out, "spectrum.json", &spec)?];
    let report = json!({
        "n_omegas": spec.omegas.len(),
        "n_gammas": spec.gammas.len(),
        "kmax": ss.kmax,
    });
    manifest(out, "spectrum", echo, tols, outputs, report)
}

pub fn cmd_soliton(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let spec = cfg
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required key `spectrum`".into()))?;
    let sol = cfg
        .soliton
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `soliton`".into()))?;
    if !(sol.xmin < sol.xmax) || sol.nx < 2 || sol.ts.is_empty() {
        return Err(CliError::Config(
            "soliton grid needs xmin < xmax, nx >= 2, nonempty ts".into(),
        ));
    }
    let data = ReflectionlessData::from_spectrum(spec);
    let mut csv = CsvWriter::new(out, "soliton.csv", &["x", "t", "re_q", "im_q"]);
    let h = (sol.xmax - sol.xmin) / (sol.nx - 1) as f64;
    for &t in &sol.ts {
        for j in 0..sol.nx {
            let x = sol.xmin + h * j as f64;
            let q = q_sol(&data, x, t)
                .map_err(|e| CliError::Pipeline(format!("soliton evaluation failed: {e}")))?;
            csv.row(&[x, t, q.re, q.im]);
        }
    }
    let outputs = vec![csv.finish()?];
    let report = json!({
        "poles": spec.omegas.len(),
        "ts": sol.ts,
    });
    manifest(out, "soliton", echo, tols, outputs, report)
}

pub fn cmd_evolve(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let q0 = cfg.potential(config_dir)?;
    let ev = cfg
        .evolve
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `evolve`".into()))?;
    if !(ev.dt > 0.0) || !(ev.t_end > 0.0) || ev.snapshot_stride == 0 {
        return Err(CliError::Config(
            "evolve needs dt > 0, t_end > 0 and snapshot_stride >= 1".into(),
        ));
    }
    let mut state = EvolutionState::from_potential(&q0, ev.l, ev.n)
        .map_err(|e| CliError::Pipeline(format!("evolution setup failed: {e}")))?;

    let mut outputs = Vec::new();
    let mut snapshot_times = Vec::new();
    let mut power_log: Vec<serde_json::Value> = Vec::new();
    let snapshot = |state: &EvolutionState, idx: usize| -> Result<String, CliError> {
        let mut csv = CsvWriter::new(
            out,
            &format!("snapshot_{idx:04}.csv"),
            &["x", "re_q", "im_q"],
        );
        for (j, q) in state.field().iter().enumerate() {
            csv.row(&[state.x(j), q.re, q.im]);
        }
        csv.finish()
    };
    let log_power = |state: &EvolutionState, power_log: &mut Vec<serde_json::Value>| {
        let p = state.quasi_power();
        power_log.push(json!([state.t(), p.re, p.im]));
    };

    outputs.push(snapshot(&state, 0)?);
    snapshot_times.push(state.t());
    log_power(&state, &mut power_log);
    let steps = (ev.t_end / ev.dt).round() as usize;
    let mut idx = 1usize;
    for step in 1..=steps {
        if let Err(e) = state.step(ev.dt) {
            // keep the partial snapshots; the failure manifest is written
            // by the top-level handler
            let _ = manifest(
                out,
                "evolve",
                echo,
                tols,
                outputs.clone(),
                json!({
                    "n": ev.n, "l": ev.l, "dt": ev.dt, "sigma": q0.sigma(),
                    "quasi_power_log": power_log,
                    "snapshot_times": snapshot_times,
                    "completed": false,
                }),
            );
            return Err(CliError::Pipeline(format!("evolution aborted: {e}")));
        }
        if step % ev.snapshot_stride == 0 || step == steps {
            outputs.push(snapshot(&state, idx)?);
            snapshot_times.push(state.t());
            log_power(&state, &mut power_log);
            idx += 1;
        }
    }
    let p0 = Complex64::new(
        power_log[0][1].as_f64().unwrap(),
        power_log[0][2].as_f64().unwrap(),
    );
    let drift = power_log
        .iter()
        .map(|v| {
            (Complex64::new(v[1].as_f64().unwrap(), v[2].as_f64().unwrap()) - p0).norm()
                / p0.norm().max(1e-300)
        })
        .fold(0.0f64, f64::max);
    let report = json!({
        "n": ev.n, "l": ev.l, "dt": ev.dt, "sigma": q0.sigma(),
        "quasi_power_log": power_log,
        "snapshot_times": snapshot_times,
        "quasi_power_drift": drift,
        "completed": true,
    });
    manifest(out, "evolve", echo, tols, outputs, report)?;
    if drift > tols.get("quasi_power_drift") {
        return Err(CliError::Diagnostic(format!(
            "quasi-power drift {drift:.3e} exceeds tolerance {}",
            tols.get("quasi_power_drift")
        )));
    }
    Ok(())
}

pub fn cmd_asymptote(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let q0 = cfg.potential(config_dir)?;
    let asy = cfg
        .asymptote
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `asymptote`".into()))?;
    if asy.rays.is_empty() || asy.ts.is_empty() {
        return Err(CliError::Config("asymptote needs nonempty rays and ts".into()));
    }
    if asy.ts.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Config("asymptote times must be positive".into()));
    }
    let spec = cfg
        .spectrum
        .clone()
        .unwrap_or_else(|| DiscreteSpectrum::empty(q0.sigma()));
    let mut outputs = Vec::new();
    let mut ray_reports = Vec::new();
    for (i, &xi) in asy.rays.iter().enumerate() {
        let ctx = PhaseContext::build(&q0, xi)
            .map_err(|e| CliError::Pipeline(format!("phase context at xi={xi}: {e}")))?;
        let mut csv = CsvWriter::new(
            out,
            &format!("ray_{i:02}.csv"),
            &[
                "x", "t", "xi", "re_q_sol", "im_q_sol", "re_dispersive", "im_dispersive",
                "declared_order",
            ],
        );
        for &t in &asy.ts {
            let x = 4.0 * xi * t;
            let f = asymptotic_q(&spec, &ctx, x, t)
                .map_err(|e| CliError::Pipeline(format!("asymptotics at xi={xi}, t={t}: {e}")))?;
            csv.row(&[
                x,
                t,
                xi,
                f.q_sol.re,
                f.q_sol.im,
                f.dispersive.re,
                f.dispersive.im,
                f.declared_order,
            ]);
        }
        outputs.push(csv.finish()?);
        ray_reports.push(json!({
            "xi": xi,
            "nu_at_neg_xi": c_pair(ctx.nu_at_xi),
            "delta0": c_pair(ctx.delta0),
            "r1_at_neg_xi": c_pair(ctx.r1_at_neg_xi),
            "r2_at_neg_xi": c_pair(ctx.r2_at_neg_xi),
        }));
    }
    manifest(out, "asymptote", echo, tols, outputs, json!({ "rays": ray_reports }))
}

pub fn cmd_compare(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
) -> Result<(), CliError> {
    let cmp = cfg
        .compare
        .as_ref()
        .ok_or_else(|| CliError::Config("missing required section `compare`".into()))?;
    let ts = cmp.t_window.sample_times()?;
    if !(cmp.pde.dt > 0.0) {
        return Err(CliError::Config("compare.pde.dt must be positive".into()));
    }
    match cmp.mode {
        CompareMode::Dispersive => compare_dispersive(cfg, echo, config_dir, out, tols, &ts),
        CompareMode::Soliton => compare_soliton(cfg, echo, out, tols, &ts),
    }
}

/// PDE field along rays xi versus the full asymptotic formula, with a
/// log-log fit of the amplitude decay at the origin ray.
fn compare_dispersive(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    config_dir: &Path,
    out: &Path,
    tols: &Tolerances,
    ts: &[f64],
) -> Result<(), CliError> {
    let cmp = cfg.compare.as_ref().unwrap();
    if cmp.rays.is_empty() {
        return Err(CliError::Config("compare (dispersive) needs nonempty rays".into()));
    }
    let q0 = cfg.potential(config_dir)?;
    let spec = cfg
        .spectrum
        .clone()
        .unwrap_or_else(|| DiscreteSpectrum::empty(q0.sigma()));

    let mut state = EvolutionState::from_potential(&q0, cmp.pde.l, cmp.pde.n)
        .map_err(|e| CliError::Pipeline(format!("evolution setup failed: {e}")))?;
    // march once through the window, recording the field on every ray at
    // each sample time (the actual reached time is a multiple of dt)
    let mut recorded: Vec<(f64, Vec<Complex64>)> = Vec::new();
    for &target in ts {
        let remaining = target - state.t();
        let steps = (remaining / cmp.pde.dt).round() as i64;
        for _ in 0..steps.max(0) {
            state
                .step(cmp.pde.dt)
                .map_err(|e| CliError::Pipeline(format!("evolution aborted: {e}")))?;
        }
        let t = state.t();
        let vals = cmp.rays.iter().map(|&xi| state.eval(4.0 * xi * t)).collect();
        recorded.push((t, vals));
    }

    let mut outputs = Vec::new();
    let mut ray_reports = Vec::new();
    let mut worst_dev = 0.0f64;
    for (i, &xi) in cmp.rays.iter().enumerate() {
        let ctx = PhaseContext::build(&q0, xi)
            .map_err(|e| CliError::Pipeline(format!("phase context at xi={xi}: {e}")))?;
        let mut csv = CsvWriter::new(
            out,
            &format!("compare_ray_{i:02}.csv"),
            &[
                "t", "x", "re_q_pde", "im_q_pde", "re_q_asym", "im_q_asym", "abs_diff",
            ],
        );
        let mut ln_t = Vec::new();
        let mut ln_amp = Vec::new();
        let mut ln_diff = Vec::new();
        let mut declared = 0.0;
        for (t, vals) in &recorded {
            let x = 4.0 * xi * t;
            let qp = vals[i];
            let f = asymptotic_q(&spec, &ctx, x, *t)
                .map_err(|e| CliError::Pipeline(format!("asymptotics at xi={xi}, t={t}: {e}")))?;
            declared = f.declared_order;
            let diff = (qp - f.value).norm();
            csv.row(&[*t, x, qp.re, qp.im, f.value.re, f.value.im, diff]);
            ln_t.push(t.ln());
            ln_amp.push(qp.norm().max(1e-300).ln());
            ln_diff.push(diff.max(1e-300).ln());
        }
        outputs.push(csv.finish()?);
        let (amp_slope, _) = line_fit(&ln_t, &ln_amp);
        let (diff_slope, _) = line_fit(&ln_t, &ln_diff);
        let expected = -0.5 + ctx.nu_at_xi.im;
        let deviation = (amp_slope - expected).abs();
        worst_dev = worst_dev.max(deviation);
        ray_reports.push(json!({
            "xi": xi,
            "nu_at_neg_xi": c_pair(ctx.nu_at_xi),
            "amplitude_decay_exponent": amp_slope,
            "expected_exponent": expected,
            "deviation": deviation,
            "error_decay_exponent": diff_slope,
            "declared_order": declared,
        }));
    }
    let pass = worst_dev <= tols.get("decay_fit");
    let report = json!({
        "mode": "dispersive",
        "rays": ray_reports,
        "worst_deviation": worst_dev,
        "pass": pass,
    });
    outputs.push(write_json(out, "fit_report.json", &report)?);
    manifest(out, "compare", echo, tols, outputs, report.clone())?;
    if !pass {
        return Err(CliError::Diagnostic(format!(
            "decay-exponent deviation {worst_dev:.3e} exceeds tolerance {}",
            tols.get("decay_fit")
        )));
    }
    Ok(())
}

/// PDE evolution started from the reflectionless field at t = 0 versus
/// the exact q_sol (no dispersive term in the reflectionless case).
fn compare_soliton(
    cfg: &RunConfig,
    echo: &serde_json::Value,
    out: &Path,
    tols: &Tolerances,
    ts: &[f64],
) -> Result<(), CliError> {
    let cmp = cfg.compare.as_ref().unwrap();
    let spec = cfg
        .spectrum
        .as_ref()
        .ok_or_else(|| CliError::Config("compare (soliton) needs key `spectrum`".into()))?;
    let data = ReflectionlessData::from_spectrum(spec);
    let probe = |x: f64, t: f64| -> Result<Complex64, CliError> {
        q_sol(&data, x, t).map_err(|e| CliError::Pipeline(format!("soliton at x={x}, t={t}: {e}")))
    };
    // initial field; q_sol is smooth here so the closure can panic-free
    // unwrap only after the probe above validated the t = 0 slice
    for j in 0..16 {
        let x = -cmp.pde.l + cmp.pde.l / 8.0 * j as f64;
        probe(x, 0.0)?;
    }
    let mut state = EvolutionState::from_fn(
        |x| q_sol(&data, x, 0.0).unwrap_or(Complex64::new(0.0, 0.0)),
        spec.sigma,
        cmp.pde.l,
        cmp.pde.n,
    )
    .map_err(|e| CliError::Pipeline(format!("evolution setup failed: {e}")))?;

    let xmax = cmp.xmax.unwrap_or((cmp.pde.l / 4.0).min(10.0));
    let mut csv = CsvWriter::new(out, "soliton_compare.csv", &["t", "max_abs_diff"]);
    let mut worst = 0.0f64;
    for &target in ts {
        let steps = ((target - state.t()) / cmp.pde.dt).round() as i64;
        for _ in 0..steps.max(0) {
            state
                .step(cmp.pde.dt)
                .map_err(|e| CliError::Pipeline(format!("evolution aborted: {e}")))?;
        }
        let t = state.t();
        let mut max_diff = 0.0f64;
        for j in 0..state.n() {
            let x = state.x(j);
            if x.abs() > xmax {
                continue;
            }
            max_diff = max_diff.max((state.field()[j] - probe(x, t)?).norm());
        }
        worst = worst.max(max_diff);
        csv.row(&[t, max_diff]);
    }
    let mut outputs = vec![csv.finish()?];
    let pass = worst <= tols.get("soliton_agreement");
    let report = json!({
        "mode": "soliton",
        "worst_abs_diff": worst,
        "pass": pass,
    });
    outputs.push(write_json(out, "fit_report.json", &report)?);
    manifest(out, "compare", echo, tols, outputs, report.clone())?;
    if !pass {
        return Err(CliError::Diagnostic(format!(
            "|q_pde - q_sol| = {worst:.3e} exceeds tolerance {}",
            tols.get("soliton_agreement")
        )));
    }
    Ok(())
}
