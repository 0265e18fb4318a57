//! Scattering of small data: the asymptotic profile `u+`, the wave operator `W*`
//! and recovery of `d C_N(0,0)` from small-amplitude probes of `W*`.
//!
//! The series `N(u0) = sum_t U0^{-t} (C_N - I) U(t) u0` is never summed term by term in
//! the interaction picture. Instead `A(t) = U0^t N_t` obeys `A(t+1) = U0 (A(t) + f(t))`
//! with `f(t) = (C_N - I) u(t)`, which runs alongside `u(t+1) = U0 (u(t) + f(t))`, and
//! `N_T = U0^{-T} A(T)` costs one backward sweep at the end.

use std::io::Write;
use std::ops::{Div, Sub};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::coins::{CoinSpec, NonlinearFactor};
use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::kahan::accumulate;
use crate::linalg::{Mat2, U2Matrix, C64, ZERO};
use crate::state::{spinor_norm_sqr, LatticeState, Spinor};

/// Terms that must be summed before the tail test may stop a series.
pub const MIN_TERMS: usize = 64;
/// Length of the trailing block in the tail test.
pub const TAIL_WINDOW: usize = 32;

/// Power of `U0^{-1}` in front of the `t`-th term.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IndexConvention {
    /// `U0^{-t}`, the form in the definition of `W*`.
    #[default]
    Statement,
    /// `U0^{-t-1}`, as written in the convergence display of the existence proof.
    ShiftedByOne,
}

impl IndexConvention {
    fn extra_inverse_steps(self) -> usize {
        match self {
            IndexConvention::Statement => 0,
            IndexConvention::ShiftedByOne => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SeriesOptions {
    /// Absolute bound on the sum of the trailing block of term norms.
    pub tol: f64,
    pub t_max: usize,
    pub convention: IndexConvention,
    /// Upper bound on `||u0||_{l^1}`.
    pub smallness: f64,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { tol: 1e-14, t_max: 100_000, convention: IndexConvention::Statement, smallness: 0.3 }
    }
}

fn check_linear_part(spec: &CoinSpec, c0: &U2Matrix) -> Result<Option<NonlinearFactor>> {
    let (lin, factor) = spec.decompose();
    if (*lin.matrix() - *c0.matrix()).max_abs() > 1e-12 {
        return Err(Error::LinearPartMismatch);
    }
    Ok(factor.filter(|f| !f.is_trivial()))
}

enum Stop {
    Fixed(usize),
    Tail { tol: f64, t_max: usize },
}

/// Forward accumulator `A(T)` together with the term norms and sampled `u(t)`.
struct Forward {
    /// `A(T)` on its window; zero outside.
    acc: LatticeState,
    tail_norms: Vec<f64>,
    converged: bool,
    samples: Vec<(usize, LatticeState)>,
}

impl Forward {
    fn terms(&self) -> usize {
        self.tail_norms.len()
    }
}

fn trailing_sum(norms: &[f64]) -> f64 {
    norms[norms.len().saturating_sub(TAIL_WINDOW)..].iter().sum()
}

/// Shifts component 1 one place left and component 2 one place right inside `buf[lo-1..=hi]`.
fn shift_in_place(buf: &mut [Spinor], lo: usize, hi: usize) {
    for i in lo..hi {
        buf[i - 1][0] = buf[i][0];
    }
    buf[hi - 1][0] = ZERO;
    for i in (lo..hi).rev() {
        buf[i + 1][1] = buf[i][1];
    }
    buf[lo][1] = ZERO;
}

fn forward(u0: &LatticeState, c0: &U2Matrix, factor: &NonlinearFactor, stop: Stop, sample_at: &[usize]) -> Forward {
    let cap = match stop {
        Stop::Fixed(n) => n,
        Stop::Tail { t_max, .. } => t_max,
    };
    let m = *c0.matrix();
    let len = u0.len();
    // grows by doubling, so memory follows the terms actually used
    let mut margin = cap.min(1024) + 1;
    let mut u = vec![[ZERO; 2]; len + 2 * margin];
    let mut hi_acc = u.clone();
    let mut lo_acc = u.clone();
    u[margin..margin + len].copy_from_slice(u0.amplitudes());
    let mut base = u0.origin() - margin as i64;
    let (mut lo, mut hi) = (margin, margin + len);

    let mut tail_norms = Vec::new();
    let mut samples = Vec::new();
    let mut converged = false;
    let mut t = 0usize;
    loop {
        if sample_at.contains(&t) {
            let amps = u[lo..hi].to_vec();
            samples.push((t, LatticeState::from_raw(base + lo as i64, amps)));
        }
        match stop {
            Stop::Fixed(n) if t == n => break,
            Stop::Tail { tol, t_max } => {
                if t >= MIN_TERMS && trailing_sum(&tail_norms) < tol {
                    converged = true;
                    break;
                }
                if t == t_max {
                    break;
                }
            }
            _ => {}
        }
        if lo == 0 || hi + 1 >= u.len() {
            let extra = margin;
            margin *= 2;
            for buf in [&mut u, &mut hi_acc, &mut lo_acc] {
                let mut v = vec![[ZERO; 2]; buf.len() + 2 * extra];
                v[extra..extra + buf.len()].copy_from_slice(buf);
                *buf = v;
            }
            lo += extra;
            hi += extra;
            base -= extra as i64;
        }
        let mut norm_sqr = 0.0;
        for i in lo..hi {
            let f = factor.deviation_apply(u[i]);
            norm_sqr += spinor_norm_sqr(&f);
            let (h, l) = (&mut hi_acc[i], &mut lo_acc[i]);
            for c in 0..2 {
                accumulate(&mut h[c], &mut l[c], f[c]);
            }
            u[i] = m.apply([u[i][0] + f[0], u[i][1] + f[1]]);
            hi_acc[i] = m.apply(hi_acc[i]);
            lo_acc[i] = m.apply(lo_acc[i]);
        }
        tail_norms.push(norm_sqr.sqrt());
        for buf in [&mut u, &mut hi_acc, &mut lo_acc] {
            shift_in_place(buf, lo, hi);
        }
        lo -= 1;
        hi += 1;
        t += 1;
        if !norm_sqr.is_finite() {
            break;
        }
    }
    if let Stop::Fixed(_) = stop {
        converged = tail_norms.iter().all(|x| x.is_finite());
    }
    let amps = (lo..hi).map(|i| [hi_acc[i][0] + lo_acc[i][0], hi_acc[i][1] + lo_acc[i][1]]).collect();
    Forward { acc: LatticeState::from_raw(base + lo as i64, amps), tail_norms, converged, samples }
}

/// `U0^{-steps} v`, computed in place on a buffer wide enough for the whole sweep.
fn backward(v: &LatticeState, c0: &U2Matrix, steps: usize) -> LatticeState {
    let m = *c0.adjoint().matrix();
    let len = v.len();
    let mut buf = vec![[ZERO; 2]; len + 2 * steps + 2];
    let (mut lo, mut hi) = (steps + 1, steps + 1 + len);
    buf[lo..hi].copy_from_slice(v.amplitudes());
    for _ in 0..steps {
        // S^{-1}: component 1 moves right, component 2 moves left
        for i in (lo..hi).rev() {
            buf[i + 1][0] = buf[i][0];
        }
        buf[lo][0] = ZERO;
        for i in lo..hi {
            buf[i - 1][1] = buf[i][1];
        }
        buf[hi - 1][1] = ZERO;
        lo -= 1;
        hi += 1;
        for x in &mut buf[lo..hi] {
            *x = m.apply(*x);
        }
    }
    LatticeState::from_raw(v.origin() - steps as i64, buf[lo..hi].to_vec())
}

/// `||U(t) u0 - U0^t u+||_{l^2}` at the sampled times and the series data behind `u+`.
#[derive(Debug, Clone, PartialEq)]
pub struct ScatteringReport {
    pub u_plus: LatticeState,
    /// `||(C_N - I) u(t)||_{l^2}` for `t = 0..T`.
    pub tail_norms: Vec<f64>,
    pub defect_series: Vec<(usize, f64)>,
    pub horizon: usize,
    /// The trailing block of terms sums below the tolerance.
    pub converged: bool,
}

impl ScatteringReport {
    /// Rows `t,tail_norm,defect`; `defect` is empty where it was not sampled.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,tail_norm,defect")?;
        let mut d = self.defect_series.iter().peekable();
        for t in 0..=self.horizon {
            let tail = self.tail_norms.get(t).map(|x| format!("{x:.16e}")).unwrap_or_default();
            let defect = match d.peek() {
                Some((s, v)) if *s == t => {
                    d.next();
                    format!("{v:.16e}")
                }
                _ => String::new(),
            };
            writeln!(w, "{t},{tail},{defect}")?;
        }
        Ok(())
    }
}

/// `1, 2, 5, 10, 20, 50, ...` below `horizon`, then `horizon` itself.
pub fn log_sample_times(horizon: usize) -> Vec<usize> {
    let mut out = vec![0];
    let mut decade = 1usize;
    'outer: loop {
        for k in [1, 2, 5] {
            let t = k * decade;
            if t >= horizon {
                break 'outer;
            }
            out.push(t);
        }
        decade *= 10;
    }
    out.push(horizon);
    out
}

/// [`scattering_series_with`] with the default convention and a tolerance of
/// `1e-6 ||u0||_{l^2}` for the convergence flag.
pub fn scattering_series(u0: &LatticeState, spec: &CoinSpec, c0: &U2Matrix, horizon: usize) -> Result<ScatteringReport> {
    let opts = SeriesOptions { tol: 1e-6 * u0.l2_norm(), ..Default::default() };
    scattering_series_with(u0, spec, c0, horizon, &opts)
}

/// Sums `horizon` terms of the series for `u+` and samples the defect at [`log_sample_times`].
/// Only `tol` and `convention` are read from `opts`.
pub fn scattering_series_with(
    u0: &LatticeState,
    spec: &CoinSpec,
    c0: &U2Matrix,
    horizon: usize,
    opts: &SeriesOptions,
) -> Result<ScatteringReport> {
    if horizon < 1 {
        return Err(Error::InvalidParameter("horizon must be at least 1".into()));
    }
    let Some(factor) = check_linear_part(spec, c0)? else {
        return Ok(ScatteringReport {
            u_plus: u0.clone(),
            tail_norms: vec![0.0; horizon],
            defect_series: log_sample_times(horizon).into_iter().map(|t| (t, 0.0)).collect(),
            horizon,
            converged: true,
        });
    };
    let times = log_sample_times(horizon);
    let fw = forward(u0, c0, &factor, Stop::Fixed(horizon), &times);
    let n = backward(&fw.acc, c0, horizon + opts.convention.extra_inverse_steps());
    let u_plus = u0.linear_combination(C64::new(1.0, 0.0), &n, C64::new(1.0, 0.0));

    let free = CoinSpec::Constant { c0: *c0 };
    let mut ev = Evolver::new(&u_plus, &free, horizon);
    let mut defect_series = Vec::with_capacity(times.len());
    for (t, ut) in &fw.samples {
        while ev.time() < *t {
            ev.step();
        }
        defect_series.push((*t, ev.state().sub(ut).l2_norm()));
    }
    let finite = fw.tail_norms.iter().all(|x| x.is_finite());
    let converged = finite && trailing_sum(&fw.tail_norms) < opts.tol;
    Ok(ScatteringReport { u_plus, tail_norms: fw.tail_norms, defect_series, horizon, converged })
}

/// `<t>^{4/15} ||U(t) u0||_{l^5}` for `t = 0..=horizon`.
pub fn l5_decay_check(u0: &LatticeState, spec: &CoinSpec, horizon: usize) -> Vec<f64> {
    let mut ev = Evolver::new(u0, spec, horizon);
    let mut out = Vec::with_capacity(horizon + 1);
    for t in 0..=horizon {
        if t > 0 {
            ev.step();
        }
        let bracket = (1.0 + (t as f64).powi(2)).sqrt();
        out.push(bracket.powf(4.0 / 15.0) * ev.lp_norm(5.0));
    }
    out
}

fn check_small(u0: &LatticeState, smallness: f64) -> Result<()> {
    let l1 = u0.lp_norm(1.0)?;
    if !(l1 < smallness) {
        return Err(Error::InvalidParameter(format!("||u0||_l1 = {l1} is not below the smallness bound {smallness}")));
    }
    Ok(())
}

/// `N(u0) = W* u0 - u0` as the bare series, truncated by the tail test.
pub fn nonlinear_residual_with(u0: &LatticeState, spec: &CoinSpec, c0: &U2Matrix, opts: &SeriesOptions) -> Result<LatticeState> {
    let Some(factor) = check_linear_part(spec, c0)? else {
        return Ok(LatticeState::zeros(u0.origin(), u0.len()));
    };
    check_small(u0, opts.smallness)?;
    let fw = forward(u0, c0, &factor, Stop::Tail { tol: opts.tol, t_max: opts.t_max }, &[]);
    if !fw.converged {
        return Err(Error::NotConverged { max_terms: opts.t_max, trailing: trailing_sum(&fw.tail_norms) });
    }
    Ok(backward(&fw.acc, c0, fw.terms() + opts.convention.extra_inverse_steps()))
}

pub fn nonlinear_residual(u0: &LatticeState, spec: &CoinSpec, c0: &U2Matrix, tol: f64, t_max: usize) -> Result<LatticeState> {
    nonlinear_residual_with(u0, spec, c0, &SeriesOptions { tol, t_max, ..Default::default() })
}

/// `W* u0 = u0 + N(u0)`.
pub fn wave_operator_with(u0: &LatticeState, spec: &CoinSpec, c0: &U2Matrix, opts: &SeriesOptions) -> Result<LatticeState> {
    let n = nonlinear_residual_with(u0, spec, c0, opts)?;
    Ok(u0.linear_combination(C64::new(1.0, 0.0), &n, C64::new(1.0, 0.0)))
}

pub fn wave_operator(u0: &LatticeState, spec: &CoinSpec, c0: &U2Matrix, tol: f64, t_max: usize) -> Result<LatticeState> {
    wave_operator_with(u0, spec, c0, &SeriesOptions { tol, t_max, ..Default::default() })
}

/// `D_lambda g = (g(2 lambda) - g(lambda)) / lambda`.
pub fn dlambda<T, F>(g: F, lambda: f64) -> Result<T>
where
    F: Fn(f64) -> T,
    T: Sub<Output = T> + Div<f64, Output = T>,
{
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok((g(2.0 * lambda) - g(lambda)) / lambda)
}

/// Probe input for row 1 (`l^2 d_{1,0} + l^3 d_{2,0}`) or row 2 (`l^3 d_{1,0} + l^2 d_{2,0}`).
pub fn probe_state(lambda: f64, row: usize) -> Result<LatticeState> {
    let (p, q) = (C64::from(lambda * lambda), C64::from(lambda.powi(3)));
    let v = match row {
        1 => [p, q],
        2 => [q, p],
        _ => return Err(Error::InvalidParameter(format!("row must be 1 or 2, got {row}"))),
    };
    LatticeState::new(0, vec![v])
}

/// Options of the recovery probes. `tol` is relative to `lambda^10`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ProbeOptions {
    pub tol: f64,
    pub t_max: usize,
    pub convention: IndexConvention,
    pub smallness: f64,
}

impl Default for ProbeOptions {
    fn default() -> Self {
        ProbeOptions { tol: 1e-3, t_max: 200_000, convention: IndexConvention::Statement, smallness: 0.3 }
    }
}

fn quintic_factor(spec: &CoinSpec, c0: &U2Matrix) -> Result<Option<NonlinearFactor>> {
    match spec.decompose().1 {
        Some(NonlinearFactor::QuinticExponential { .. }) => check_linear_part(spec, c0),
        _ => Err(Error::UnsupportedFamily(spec.family())),
    }
}

/// `(L_{row,1}, L_{row,2})` together with the number of series terms used.
///
/// `(W* - U0^{-1} W* U0) w` is evaluated as `U0^{-T-1} (A_{T+1}(w) - A_T(U0 w))`, where the
/// horizon `T` comes from the tail test on the `U0 w` series; truncating both series at
/// matching horizons keeps the slowly decaying common tail out of the difference.
pub fn probe_row(spec: &CoinSpec, c0: &U2Matrix, lambda: f64, row: usize, opts: &ProbeOptions) -> Result<([C64; 2], usize)> {
    let w = probe_state(lambda, row)?;
    let Some(factor) = quintic_factor(spec, c0)? else {
        return Ok(([ZERO; 2], 0));
    };
    check_small(&w, opts.smallness)?;
    let scale = lambda.powi(10);
    let uw = crate::evolution::linear_step(&w, c0);
    let stop = Stop::Tail { tol: opts.tol * scale, t_max: opts.t_max };
    let shifted = forward(&uw, c0, &factor, stop, &[]);
    if !shifted.converged {
        return Err(Error::NotConverged { max_terms: opts.t_max, trailing: trailing_sum(&shifted.tail_norms) / scale });
    }
    let t = shifted.terms();
    let direct = forward(&w, c0, &factor, Stop::Fixed(t + 1), &[]);
    let diff = direct.acc.sub(&shifted.acc);
    let d = backward(&diff, c0, t + 1 + opts.convention.extra_inverse_steps());
    let v = d.at(0);
    Ok(([v[0] / scale, v[1] / scale], t))
}

/// `L_{row,j}(lambda) = lambda^{-10} <(W* - U0^{-1} W* U0) w, delta_{j,0}>`.
pub fn recovery_probe(spec: &CoinSpec, c0: &U2Matrix, lambda: f64, row: usize, j: usize, opts: &ProbeOptions) -> Result<C64> {
    if !(1..=2).contains(&j) {
        return Err(Error::InvalidComponent(j));
    }
    if !(lambda > 0.0) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {lambda}")));
    }
    Ok(probe_row(spec, c0, lambda, row, opts)?.0[j - 1])
}

/// Probe matrices and recovery errors at one `lambda`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryPoint {
    pub lambda: f64,
    /// `[L_11, L_12]` at `lambda` and at `2 lambda`.
    pub l1: [C64; 2],
    pub l1_double: [C64; 2],
    pub l2: [C64; 2],
    pub l2_double: [C64; 2],
    pub m1: Mat2,
    pub m2: Mat2,
    /// Operator norms `||M_k - d_k C_N(0,0)||`.
    pub error1: f64,
    pub error2: f64,
    pub error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RecoveryReport {
    pub lambdas: Vec<f64>,
    pub points: Vec<RecoveryPoint>,
    pub truth1: Mat2,
    pub truth2: Mat2,
    /// Least-squares slope of `log error` against `log lambda`; `None` unless every error is positive.
    pub fitted_order: Option<f64>,
    /// RMS residual of that fit.
    pub fit_residual: Option<f64>,
    /// `error(lambdas[0]) / error(lambdas[1])`.
    pub ratio: Option<f64>,
    /// Largest number of series terms used by any probe.
    pub max_terms: usize,
    pub convention: IndexConvention,
}

fn assemble(lambda: f64, l: [C64; 2], l2x: [C64; 2], row: usize) -> Mat2 {
    let d = |k: usize| (l2x[k] - l[k]) / lambda;
    let e = |k: usize| (l[k] - d(k) * lambda, d(k));
    let ((a, b), (c, dd)) = (e(0), e(1));
    if row == 1 {
        Mat2::new(a, b, c, dd)
    } else {
        Mat2::new(b, a, dd, c)
    }
}

fn log_fit(points: &[(f64, f64)]) -> (f64, f64) {
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let slope = sxy / sxx;
    let rss: f64 = points.iter().map(|p| (p.1 - my - slope * (p.0 - mx)).powi(2)).sum();
    (slope, (rss / n).sqrt())
}

/// Assembles `M1(lambda)`, `M2(lambda)` for each `lambda` of the ladder from probes at
/// `lambda` and `2 lambda`, and compares them with `(i A1, i A2)`.
pub fn recover_derivatives(spec: &CoinSpec, c0: &U2Matrix, lambdas: &[f64], opts: &ProbeOptions) -> Result<RecoveryReport> {
    if lambdas.is_empty() {
        return Err(Error::InvalidParameter("empty lambda ladder".into()));
    }
    if let Some(l) = lambdas.iter().find(|l| !(**l > 0.0)) {
        return Err(Error::InvalidParameter(format!("lambda must be positive, got {l}")));
    }
    let (truth1, truth2) = spec.cn_partial_derivatives()?;
    let mut needed: Vec<f64> = lambdas.iter().flat_map(|l| [*l, 2.0 * l]).collect();
    needed.sort_by(f64::total_cmp);
    needed.dedup();
    let jobs: Vec<(f64, usize)> = needed.iter().flat_map(|l| [(*l, 1), (*l, 2)]).collect();
    let results: Vec<([C64; 2], usize)> =
        jobs.par_iter().map(|(l, row)| probe_row(spec, c0, *l, *row, opts)).collect::<Result<_>>()?;
    let lookup = |l: f64, row: usize| {
        let k = jobs.iter().position(|job| job.0 == l && job.1 == row).expect("probe scheduled");
        results[k].0
    };
    let points: Vec<RecoveryPoint> = lambdas
        .iter()
        .map(|&lambda| {
            let (l1, l1_double) = (lookup(lambda, 1), lookup(2.0 * lambda, 1));
            let (l2, l2_double) = (lookup(lambda, 2), lookup(2.0 * lambda, 2));
            let m1 = assemble(lambda, l1, l1_double, 1);
            let m2 = assemble(lambda, l2, l2_double, 2);
            let error1 = (m1 - truth1).op_norm();
            let error2 = (m2 - truth2).op_norm();
            RecoveryPoint { lambda, l1, l1_double, l2, l2_double, m1, m2, error1, error2, error: error1.max(error2) }
        })
        .collect();
    let fit = (points.len() >= 2 && points.iter().all(|p| p.error > 0.0))
        .then(|| log_fit(&points.iter().map(|p| (p.lambda.ln(), p.error.ln())).collect::<Vec<_>>()));
    let ratio = (points.len() >= 2 && points[1].error > 0.0).then(|| points[0].error / points[1].error);
    Ok(RecoveryReport {
        lambdas: lambdas.to_vec(),
        truth1,
        truth2,
        fitted_order: fit.map(|f| f.0),
        fit_residual: fit.map(|f| f.1),
        ratio,
        max_terms: results.iter().map(|r| r.1).max().unwrap_or(0),
        convention: opts.convention,
        points,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::{linear_step, linear_step_inverse};

    #[test]
    fn backward_inverts_linear_steps() {
        let c0 = crate::coins::hadamard_c0();
        let u = LatticeState::new(-1, vec![[C64::new(0.3, 0.1), C64::new(-0.2, 0.0)], [ZERO, C64::new(0.0, 0.5)]]).unwrap();
        let mut v = u.clone();
        for _ in 0..7 {
            v = linear_step(&v, &c0);
        }
        assert!(backward(&v, &c0, 7).max_abs_diff(&u) < 1e-15);
        let mut w = u.clone();
        for _ in 0..3 {
            w = linear_step_inverse(&w, &c0);
        }
        assert!(backward(&u, &c0, 3).max_abs_diff(&w) < 1e-15);
    }

    #[test]
    fn sample_times_are_log_spaced() {
        assert_eq!(log_sample_times(100), vec![0, 1, 2, 5, 10, 20, 50, 100]);
        assert_eq!(log_sample_times(1), vec![0, 1]);
    }

    #[test]
    fn dlambda_on_polynomials() {
        assert_eq!(dlambda(|_| 3.0, 0.1).unwrap(), 0.0);
        assert_eq!(dlambda(|l| l, 0.25).unwrap(), 1.0);
        assert!((dlambda(|l| l * l, 0.1).unwrap() - 0.3).abs() < 1e-15);
        assert!(dlambda(|l| l, 0.0).is_err());
    }
}
