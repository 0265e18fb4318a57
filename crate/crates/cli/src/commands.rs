//! One function per subcommand. Each writes its files and a `summary.json`, and reports
//! whether every configured check passed.

use anyhow::{anyhow, Result};
use nlqw_core::evolution::{evolve, Series};
use nlqw_core::experiments::{sup_norm_decay, table1 as run_table1, weak_limit_comparison};
use nlqw_core::scattering::{recover_derivatives, scattering_series_with, SeriesOptions};
use nlqw_core::spectral::velocity_grid;
use serde_json::json;

use crate::config::ExperimentConfig;
use crate::output::{check, finish, gnuplot, OutDir};

pub enum Outcome {
    Done(bool),
    BadInput(anyhow::Error),
    Failed(anyhow::Error),
}

fn classify(r: Result<bool>) -> Outcome {
    match r {
        Ok(pass) => Outcome::Done(pass),
        Err(e) => match e.downcast_ref::<nlqw_core::Error>() {
            Some(nlqw_core::Error::NotConverged { .. } | nlqw_core::Error::NonPositive { .. }) | None => Outcome::Failed(e),
            Some(_) => Outcome::BadInput(e),
        },
    }
}

pub fn simulate(cfg: &ExperimentConfig) -> Outcome {
    classify(run_simulate(cfg))
}

fn run_simulate(cfg: &ExperimentConfig) -> Result<bool> {
    let u0 = cfg.initial.build()?;
    let tr = evolve(&u0, &cfg.coin, cfg.steps, &cfg.recorder)?;
    let mut out = OutDir::create(&cfg.out)?;
    for (name, series) in &tr.series {
        out.write(&format!("{name}.csv"), |w| series.write_csv(w))?;
    }
    for (t, s) in &tr.snapshots {
        out.write(&format!("snapshot_t{t}.csv"), |w| s.write_csv(w))?;
    }
    out.write("final_state.csv", |w| tr.final_state.write_csv(w))?;
    if cfg.plot {
        let mut body = String::from("set xlabel 't'\n");
        let plots: Vec<String> = tr
            .series
            .iter()
            .filter(|(_, s)| matches!(s, Series::Values(_)))
            .map(|(n, _)| format!("'{n}.csv' using 1:2 with lines title '{n}'"))
            .collect();
        if plots.is_empty() {
            body.push_str("set ylabel 'x'\n");
            let sites: Vec<String> =
                tr.series.keys().map(|n| format!("'{n}.csv' using 1:2 with dots title '{n}'")).collect();
            body.push_str(&format!("plot {}\n", sites.join(", ")));
        } else {
            body.push_str(&format!("plot {}\n", plots.join(", ")));
        }
        gnuplot(&mut out, &body)?;
    }
    let results = json!({
        "family": cfg.coin.family(),
        "steps": tr.steps,
        "final_l2_norm": tr.final_state.l2_norm(),
        "final_sup_norm": tr.final_state.sup_norm(),
        "series": tr.series.keys().collect::<Vec<_>>(),
    });
    finish(out, "simulate", vec![], results)
}

pub fn table1(cfg: &ExperimentConfig) -> Outcome {
    classify(run_table1_cmd(cfg))
}

fn run_table1_cmd(cfg: &ExperimentConfig) -> Result<bool> {
    let cells = run_table1(cfg.steps)?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("table1.csv", |w| {
        writeln!(w, "p,g,theory,reference,measured,tolerance,decaying,pass")?;
        for c in &cells {
            writeln!(
                w,
                "{},{},{:.16e},{},{:.16e},{},{},{}",
                c.p, c.g, c.theory, c.reference, c.measured, c.tolerance, c.decaying, c.pass
            )?;
        }
        Ok(())
    })?;
    println!("  p     g   (pi/4|g|)^(1/2p)   measured   reference");
    for c in &cells {
        let note = if c.decaying { "  decaying" } else { "" };
        println!("  {} {:+5.1}   {:.10}   {:.6}   {:.6}{note}", c.p, c.g, c.theory, c.measured, c.reference);
    }
    let checks = cells
        .iter()
        .map(|c| {
            check(&format!("p={} g={}", c.p, c.g), c.measured, format!("|x - {}| <= {}", c.reference, c.tolerance), c.pass)
        })
        .collect();
    finish(out, "table1", checks, json!({ "steps": cfg.steps, "cells": cells }))
}

pub fn decay(cfg: &ExperimentConfig) -> Outcome {
    classify(run_decay(cfg))
}

fn run_decay(cfg: &ExperimentConfig) -> Result<bool> {
    let d = &cfg.decay;
    let u0 = cfg.initial.build()?;
    let r = sup_norm_decay(&u0, &cfg.coin, cfg.steps, d.t_min, d.t_max)?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("decay.csv", |w| {
        writeln!(w, "t,sup_norm,log10_t,log10_sup_norm")?;
        for (t, v) in &r.series {
            writeln!(w, "{t},{v:.16e},{:.16e},{:.16e}", t.log10(), v.log10())?;
        }
        Ok(())
    })?;
    out.write_json("fit.json", &r)?;
    if cfg.plot {
        let body = format!(
            "set xlabel 'log10 t'\nset ylabel 'log10 sup norm'\nf(x) = {} * x + {}\n\
             plot 'decay.csv' using 3:4 with lines title 'sup norm', f(x) title 'fit'\n",
            r.fit.slope, r.fit.intercept
        );
        gnuplot(&mut out, &body)?;
    }
    let mut checks = vec![];
    if let Some(s) = d.expected_slope {
        let pass = (r.fit.slope - s).abs() <= d.slope_tol;
        checks.push(check("slope", r.fit.slope, format!("|x - {s}| <= {}", d.slope_tol), pass));
    }
    if let Some(c) = d.expected_intercept {
        let pass = (r.intercept_at_cube_root - c).abs() <= d.intercept_tol;
        checks.push(check("intercept at slope -1/3", r.intercept_at_cube_root, format!("|x - {c}| <= {}", d.intercept_tol), pass));
    }
    finish(out, "decay", checks, serde_json::to_value(&r)?)
}

pub fn weak_limit(cfg: &ExperimentConfig) -> Outcome {
    if !cfg.coin.is_linear() {
        return Outcome::BadInput(anyhow!(
            "weak-limit needs a linear coin; pass a precomputed asymptotic profile as the initial state"
        ));
    }
    classify(run_weak_limit(cfg))
}

fn run_weak_limit(cfg: &ExperimentConfig) -> Result<bool> {
    let wl = &cfg.weak_limit;
    let u0 = cfg.initial.build()?;
    let grid = velocity_grid(wl.grid_points);
    let r = weak_limit_comparison(&u0, &cfg.coin.linear_part(), wl.t, &grid)?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("density.csv", |w| {
        writeln!(w, "v,density")?;
        for (v, d) in r.grid.iter().zip(&r.density) {
            writeln!(w, "{v:.16e},{d:.16e}")?;
        }
        Ok(())
    })?;
    out.write("cdf.csv", |w| {
        writeln!(w, "v,empirical,limit")?;
        for ((v, e), l) in r.grid.iter().zip(&r.empirical_cdf).zip(&r.limit_cdf) {
            writeln!(w, "{v:.16e},{e:.16e},{l:.16e}")?;
        }
        Ok(())
    })?;
    if cfg.plot {
        let body = "set xlabel 'v'\nset multiplot layout 1,2\nplot 'density.csv' using 1:2 with lines\n\
                    plot 'cdf.csv' using 1:2 with lines, '' using 1:3 with lines\nunset multiplot\n";
        gnuplot(&mut out, body)?;
    }
    let target = u0.l2_norm().powi(2);
    let checks = vec![
        check("kolmogorov distance", r.kolmogorov, format!("<= {}", wl.max_kolmogorov), r.kolmogorov <= wl.max_kolmogorov),
        check(
            "density mass",
            r.mass,
            format!("|x - {target}| <= {} * {target}", wl.mass_tol),
            (r.mass - target).abs() <= wl.mass_tol * target,
        ),
    ];
    finish(out, "weak-limit", checks, serde_json::to_value(&r)?)
}

pub fn scatter(cfg: &ExperimentConfig) -> Outcome {
    classify(run_scatter(cfg))
}

fn run_scatter(cfg: &ExperimentConfig) -> Result<bool> {
    let sc = &cfg.scatter;
    let u0 = cfg.initial.build()?;
    let opts = SeriesOptions { tol: sc.rel_tol * u0.l2_norm(), convention: sc.convention, ..Default::default() };
    let r = scattering_series_with(&u0, &cfg.coin, &cfg.coin.linear_part(), sc.horizon, &opts)?;
    let mut out = OutDir::create(&cfg.out)?;
    out.write("scattering.csv", |w| r.write_csv(w))?;
    out.write("u_plus.csv", |w| r.u_plus.write_csv(w))?;
    if cfg.plot {
        let body = "set logscale xy\nset xlabel 't'\n\
                    plot 'scattering.csv' using 1:2 with lines, '' using 1:3 with linespoints\n";
        gnuplot(&mut out, body)?;
    }
    let trailing: f64 = r.tail_norms[r.tail_norms.len().saturating_sub(32)..].iter().sum();
    let checks = vec![check("converged", trailing, format!("trailing 32 terms < {:e}", opts.tol), r.converged)];
    let results = json!({
        "horizon": r.horizon,
        "converged": r.converged,
        "u_plus_l2_norm": r.u_plus.l2_norm(),
        "defect_series": r.defect_series,
        "convention": sc.convention,
    });
    finish(out, "scatter", checks, results)
}

pub fn recover(cfg: &ExperimentConfig) -> Outcome {
    classify(run_recover(cfg))
}

fn run_recover(cfg: &ExperimentConfig) -> Result<bool> {
    let rc = &cfg.recover;
    let mut out = OutDir::create(&cfg.out)?;
    let r = match recover_derivatives(&cfg.coin, &cfg.coin.linear_part(), &rc.lambdas, &rc.probe) {
        Ok(r) => r,
        Err(e @ nlqw_core::Error::NotConverged { .. }) => {
            let checks = vec![check("probe series converged", e.to_string(), "tail test", false)];
            return finish(out, "recover", checks, serde_json::Value::Null);
        }
        Err(e) => return Err(e.into()),
    };
    out.write_json("recovery.json", &r)?;
    let mut checks = vec![];
    if r.points.iter().all(|p| p.error == 0.0) {
        checks.push(check("exact recovery", 0.0, "== 0", true));
    } else if r.points.len() >= 2 {
        let order = r.fitted_order.unwrap_or(f64::NAN);
        checks.push(check("fitted order", order, format!(">= {}", rc.min_order), order >= rc.min_order));
        let ratio = r.ratio.unwrap_or(f64::NAN);
        let [lo, hi] = rc.ratio_range;
        checks.push(check("error ratio", ratio, format!("in [{lo}, {hi}]"), (lo..=hi).contains(&ratio)));
    }
    finish(out, "recover", checks, serde_json::to_value(&r)?)
}
