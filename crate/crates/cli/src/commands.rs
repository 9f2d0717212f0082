use fracavg_core::{
    averaged_controlled, averaged_free, biharmonic_free, class_c_alpha_check, class_check_grids,
    exactness_failure_scan, fcf, forward_modes, hum_null_control, ml_eval_with, run_suite, simultaneous_zero_scan,
    spectral_constant_fit, ConstantSearch, ControlOptions, ControlSignal, FracParams, MlConfig, RandomDiffusivity,
    Trajectory, VerifyOptions,
};
use num_complex::Complex64;
use serde_json::{json, Value};

use crate::config::ExperimentConfig;
use crate::output::{num, Output, Table};
use crate::{CliError, Command};

pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Output, CliError> {
    match cmd {
        Command::MlEval => ml_eval_cmd(cfg),
        Command::FcfScan => fcf_scan(cfg),
        Command::ClassCheck => class_check(cfg),
        Command::Forward => forward(cfg, false),
        Command::Average => forward(cfg, true),
        Command::BiharmonicCheck => biharmonic(cfg),
        Command::SpectralConstant => spectral(cfg),
        Command::ExactnessScan => exactness(cfg),
        Command::ZeroScan => zero_scan(cfg),
        Command::HumControl => hum(cfg),
        Command::Verify => verify(cfg),
    }
}

fn summary(out: &mut Output, key: &str, v: Value) {
    out.summary.insert(key.into(), v);
}

fn s_grid(cfg: &ExperimentConfig) -> Result<Vec<f64>, CliError> {
    let m = &cfg.ml_eval;
    if !m.s.is_empty() {
        return Ok(m.s.clone());
    }
    if !(m.s_min > 0.0 && m.s_max > m.s_min && m.s_max.is_finite()) {
        return Err(CliError::Validation("`ml_eval.s_min`: need 0 < s_min < s_max".into()));
    }
    if m.points < 2 {
        return Err(CliError::Validation("`ml_eval.points`: need at least 2".into()));
    }
    let half = m.points / 2;
    let (lo, hi) = (m.s_min.log10(), m.s_max.log10());
    let pos: Vec<f64> = (0..half.max(1))
        .map(|k| {
            let f = if half > 1 { k as f64 / (half - 1) as f64 } else { 0.0 };
            10f64.powf(lo + (hi - lo) * f)
        })
        .collect();
    let mut out: Vec<f64> = pos.iter().rev().map(|s| -s).collect();
    out.extend(pos);
    Ok(out)
}

fn ml_eval_cmd(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let mut out = Output::default();
    let mut t = Table::new("ml_eval", &["alpha", "beta", "s", "re", "im", "regime", "est_error"]);
    let grid = s_grid(cfg)?;
    let mlc = MlConfig::default();
    let mut worst: f64 = 0.0;
    for &a in &cfg.ml_eval.alphas {
        let mut betas = Vec::new();
        if cfg.ml_eval.beta_alpha {
            betas.push(a);
        }
        betas.extend(
            cfg.ml_eval
                .betas
                .iter()
                .copied()
                .filter(|b| !(cfg.ml_eval.beta_alpha && *b == a)),
        );
        for b in betas {
            let p = FracParams::new(a, b)?;
            for &s in &grid {
                match ml_eval_with(p, Complex64::new(0.0, s), &mlc) {
                    Ok(r) => {
                        worst = worst.max(r.est_error);
                        t.push(vec![
                            num(a),
                            num(b),
                            num(s),
                            num(r.value.re),
                            num(r.value.im),
                            r.regime.as_str().into(),
                            num(r.est_error),
                        ]);
                    }
                    Err(e) => out.failures.push(CliError::from(e)),
                }
            }
        }
    }
    summary(&mut out, "points", json!(t.rows.len()));
    summary(&mut out, "max_est_error", json!(worst));
    out.tables.push(t);
    Ok(out)
}

fn fcf_scan(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let f = &cfg.fcf_scan;
    if f.points < 2 || !(f.s_max > f.s_min) {
        return Err(CliError::Validation(
            "`fcf_scan`: need points ≥ 2 and s_min < s_max".into(),
        ));
    }
    let law = cfg.law()?;
    let p = FracParams::new(cfg.alpha, f.beta.unwrap_or(cfg.alpha))?;
    let mut out = Output::default();
    let mut t = Table::new("fcf_scan", &["s", "re", "im", "abs"]);
    for k in 0..f.points {
        let s = f.s_min + (f.s_max - f.s_min) * k as f64 / (f.points - 1) as f64;
        match fcf(&law, p, s) {
            Ok(v) => t.push(vec![num(s), num(v.re), num(v.im), num(v.norm())]),
            Err(e) => out.failures.push(e.into()),
        }
    }
    summary(&mut out, "law", json!(law.name()));
    out.tables.push(t);
    Ok(out)
}

fn class_check(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let c = &cfg.class_check;
    let law = cfg.law()?;
    let domain = cfg.domain()?;
    let lambda_star = match c.lambda_star {
        Some(l) => l,
        None => fracavg_core::build_basis(&domain, 1)?[0].lambda,
    };
    let lambda_max = c.lambda_max.unwrap_or(100.0 * lambda_star);
    if !(lambda_star > 0.0 && lambda_max > lambda_star) {
        return Err(CliError::Validation(
            "`class_check.lambda_max`: must exceed lambda_star > 0".into(),
        ));
    }
    let r = c.r.unwrap_or(1.0 / cfg.alpha);
    let (lg, tg) = class_check_grids(lambda_star, lambda_max, c.n_lambda, c.delta, cfg.t_final, c.n_time);
    let rep = class_c_alpha_check(&law, cfg.alpha, c.delta, cfg.t_final, c.theta, r, &lg, &tg)?;
    let mut out = Output::default();
    let mut t = Table::new(
        "class_check",
        &[
            "alpha",
            "delta",
            "t_final",
            "lambda_star",
            "theta",
            "r",
            "c",
            "c1",
            "c2",
            "pass_decay",
            "pass_ratio",
            "worst_violation",
            "ratio_growth",
            "spread",
            "spread_refined",
        ],
    );
    t.push(vec![
        num(rep.alpha),
        num(rep.delta),
        num(rep.t_final),
        num(rep.lambda_star),
        num(rep.theta),
        num(rep.r),
        num(rep.c),
        num(rep.c1),
        num(rep.c2),
        rep.pass_decay.to_string(),
        rep.pass_ratio.to_string(),
        num(rep.worst_violation),
        num(rep.ratio_growth),
        num(rep.spread),
        num(rep.spread_refined),
    ]);
    if let Some(f) = &rep.failure {
        out.failures.push(CliError::Numerical(f.clone()));
    }
    summary(&mut out, "pass_decay", json!(rep.pass_decay));
    summary(&mut out, "pass_ratio", json!(rep.pass_ratio));
    out.tables.push(t);
    Ok(out)
}

fn trajectory_table(name: &str, prefix: &str, tr: &Trajectory) -> Table {
    let modes = tr.final_state().basis_size();
    let mut header = vec!["t".to_string()];
    for n in 0..modes {
        header.push(format!("{prefix}{n}_re"));
        header.push(format!("{prefix}{n}_im"));
    }
    let mut t = Table::with_header(name, header);
    for (time, s) in tr.grid().nodes().iter().zip(tr.states()) {
        let mut row = vec![num(*time)];
        for c in s.coeffs() {
            row.push(num(c.re));
            row.push(num(c.im));
        }
        t.push(row);
    }
    t
}

fn forward(cfg: &ExperimentConfig, averaged: bool) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let y0 = cfg.y0()?;
    let grid = cfg.grid()?;
    let vals = cfg.control_values()?;
    let u = ControlSignal::from_fn(grid, basis.len(), |n, _| vals[n]);
    let mut out = Output::default();
    let tr = if averaged {
        let law = cfg.law()?;
        summary(&mut out, "law", json!(law.name()));
        averaged_controlled(cfg.alpha, &law, &basis, &y0, &u)?
    } else {
        forward_modes(cfg.alpha, cfg.forward.xi, &basis, &y0, &u)?
    };
    summary(&mut out, "final_norm", json!(tr.final_state().norm()));
    out.tables
        .push(trajectory_table(if averaged { "average" } else { "forward" }, "y", &tr));
    Ok(out)
}

fn biharmonic(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let y0 = cfg.y0()?;
    let rad = RandomDiffusivity::rademacher();
    let points = cfg.biharmonic.points;
    if points == 0 {
        return Err(CliError::Validation("`biharmonic.points`: must be positive".into()));
    }
    let mut out = Output::default();
    let mut t = Table::new("biharmonic_check", &["alpha", "t", "max_abs_diff"]);
    let mut worst: f64 = 0.0;
    for &a in &cfg.biharmonic.alphas {
        for k in 0..points {
            let time = cfg.t_final * (k + 1) as f64 / points as f64;
            let avg = averaged_free(a, &rad, &basis, &y0, time)?;
            let bi = biharmonic_free(a, &basis, &y0, time)?;
            let d = avg.sub(&bi)?.coeffs().iter().map(|c| c.norm()).fold(0.0, f64::max);
            worst = worst.max(d);
            t.push(vec![num(a), num(time), num(d)]);
        }
    }
    summary(&mut out, "max_abs_diff", json!(worst));
    out.tables.push(t);
    Ok(out)
}

fn spectral(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let sensor = cfg.sensor(&domain)?;
    let counts: Vec<usize> = if cfg.spectral.cuts.is_empty() {
        (1..=basis.len()).collect()
    } else {
        cfg.spectral.cuts.clone()
    };
    if let Some(&bad) = counts.iter().find(|&&k| k == 0 || k > basis.len()) {
        return Err(CliError::Validation(format!(
            "`spectral.cuts`: {bad} is outside 1..={}",
            basis.len()
        )));
    }
    let cuts: Vec<f64> = counts.iter().map(|&k| basis[k - 1].lambda).collect();
    let opts = ConstantSearch {
        seed: cfg.seed,
        restarts: cfg.spectral.restarts,
        quad_points: cfg.spectral.quad_points,
        ..ConstantSearch::default()
    };
    let fit = spectral_constant_fit(&basis, &domain, &sensor, &cuts, &opts)?;
    let mut out = Output::default();
    let mut t = Table::new("spectral_constant", &["lambda_cut", "dimension", "constant", "min_l1"]);
    for p in &fit.points {
        t.push(vec![
            num(p.lambda_cut),
            p.dimension.to_string(),
            num(p.constant),
            num(p.min_l1),
        ]);
    }
    summary(&mut out, "slope", json!(fit.slope));
    summary(&mut out, "intercept", json!(fit.intercept));
    summary(&mut out, "rms_residual", json!(fit.rms_residual));
    summary(
        &mut out,
        "monotone",
        json!(fit.points.windows(2).all(|w| w[1].constant >= w[0].constant)),
    );
    out.tables.push(t);
    Ok(out)
}

fn exactness(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let law = cfg.law()?;
    let rows = exactness_failure_scan(cfg.alpha, &law, &basis, cfg.t_final, cfg.exactness.force)?;
    let mut out = Output::default();
    let mut t = Table::new("exactness_scan", &["mode", "lambda", "integral"]);
    for &(n, v) in &rows {
        t.push(vec![n.to_string(), num(basis[n].lambda), num(v)]);
    }
    if let (Some(first), Some(last)) = (rows.first(), rows.last()) {
        summary(&mut out, "last_over_first", json!(last.1 / first.1));
    }
    out.tables.push(t);
    Ok(out)
}

fn zero_scan(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let y0 = cfg.y0()?;
    let grid = cfg.grid()?;
    let vals = cfg.control_values()?;
    let u = ControlSignal::from_fn(grid, basis.len(), |n, _| vals[n]);
    let z = &cfg.zero_scan;
    let found = simultaneous_zero_scan(
        cfg.alpha,
        &basis,
        &y0,
        &u,
        (z.xi_min, z.xi_max),
        z.resolution,
        z.tol_rel,
    )?;
    let mut out = Output::default();
    let mut t = Table::new("zero_scan", &["xi", "residual"]);
    for c in &found {
        t.push(vec![num(c.xi), num(c.residual)]);
    }
    summary(&mut out, "candidates", json!(found.len()));
    out.tables.push(t);
    Ok(out)
}

fn hum(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let domain = cfg.domain()?;
    let basis = cfg.basis(&domain)?;
    let sensor = cfg.sensor(&domain)?;
    let law = cfg.law()?;
    let y0 = cfg.y0()?;
    let grid = cfg.grid()?;
    let opts = ControlOptions {
        regularization: cfg.hum.regularization,
        condition_cap: cfg.hum.condition_cap,
        force: cfg.hum.force,
        linf_density: cfg.hum.linf_density,
    };
    let (u, rep) = hum_null_control(cfg.alpha, &law, &basis, &y0, &sensor, grid, opts)?;
    let mut header = vec!["t".to_string()];
    for n in 0..basis.len() {
        header.push(format!("u{n}_re"));
        header.push(format!("u{n}_im"));
    }
    let mut t = Table::with_header("hum_control", header);
    let nodal = u.nodal();
    for (k, time) in grid.nodes().iter().enumerate() {
        let mut row = vec![num(*time)];
        for m in &nodal {
            row.push(num(m[k].re));
            row.push(num(m[k].im));
        }
        t.push(row);
    }
    let report = json!({
        "terminal_residual": rep.terminal_residual,
        "l2_cost": rep.l2_cost,
        "linf_cost": rep.linf_cost,
        "gramian_condition": rep.gramian_condition,
        "gramian_min_eigenvalue": rep.gramian_min_eigenvalue,
        "gramian_max_eigenvalue": rep.gramian_max_eigenvalue,
        "hermitian_defect": rep.hermitian_defect,
        "regularization": rep.regularization,
        "tail_factor": rep.tail_factor,
        "class_check_passed": rep.class_check_passed,
    });
    let mut out = Output::default();
    summary(&mut out, "terminal_residual", json!(rep.terminal_residual));
    out.tables.push(t);
    out.documents.push(("report.json".into(), report));
    Ok(out)
}

fn verify(cfg: &ExperimentConfig) -> Result<Output, CliError> {
    let checks = run_suite(&VerifyOptions {
        seed: cfg.seed,
        steps: cfg.steps,
        modes: cfg.modes,
    })?;
    let mut out = Output::default();
    let mut t = Table::new("verify", &["name", "measured", "threshold", "bound", "pass"]);
    let mut failed = Vec::new();
    for c in &checks {
        t.push(vec![
            c.name.clone(),
            num(c.measured),
            num(c.threshold),
            if c.upper { "upper" } else { "lower" }.into(),
            c.pass.to_string(),
        ]);
        if !c.pass {
            failed.push(c.name.clone());
        }
    }
    summary(&mut out, "checks", json!(checks.len()));
    summary(&mut out, "failed", json!(failed));
    if !failed.is_empty() {
        out.failures.push(CliError::ChecksFailed(failed));
    }
    out.tables.push(t);
    Ok(out)
}
