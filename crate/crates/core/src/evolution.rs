//! Shift, walk step and trajectory evolution.
//!
//! Component 1 moves one site left per step, component 2 one site right. The
//! [`Evolver`] keeps both components in separate buffers covering the final light
//! cone, so a step is an in-place coin pass followed by two `copy_within` shifts.

use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::coins::{CoinKernel, CoinSpec};
use crate::error::{Error, Result};
use crate::linalg::{U2Matrix, C64, ZERO};
use crate::state::{argmax_of, check_component, lp_norm_of, LatticeState, Spinor};

/// `S u`: component 1 taken from `x + 1`, component 2 from `x - 1`.
pub fn shift(u: &LatticeState) -> LatticeState {
    let (lo, hi) = (u.origin() - 1, u.end() + 1);
    let amps = (lo..hi).map(|x| [u.at(x + 1)[0], u.at(x - 1)[1]]).collect();
    LatticeState::from_raw(lo, amps)
}

/// `S^{-1} u`.
pub fn inverse_shift(u: &LatticeState) -> LatticeState {
    let (lo, hi) = (u.origin() - 1, u.end() + 1);
    let amps = (lo..hi).map(|x| [u.at(x - 1)[0], u.at(x + 1)[1]]).collect();
    LatticeState::from_raw(lo, amps)
}

/// One step `U u = S C u`.
pub fn step(u: &LatticeState, spec: &CoinSpec) -> LatticeState {
    shift(&spec.apply(u))
}

/// `U0 u = S C0 u`.
pub fn linear_step(u: &LatticeState, c0: &U2Matrix) -> LatticeState {
    step(u, &CoinSpec::Constant { c0: *c0 })
}

/// `U0^{-1} u = C0^* S^{-1} u`.
pub fn linear_step_inverse(u: &LatticeState, c0: &U2Matrix) -> LatticeState {
    CoinSpec::Constant { c0: c0.adjoint() }.apply(&inverse_shift(u))
}

/// In-place stepper for one trajectory.
#[derive(Debug, Clone)]
pub struct Evolver {
    kernel: CoinKernel,
    /// Lattice site of buffer index 0.
    base: i64,
    u1: Vec<C64>,
    u2: Vec<C64>,
    /// Active window `[lo, hi)` in buffer indices; zero outside.
    lo: usize,
    hi: usize,
    t: usize,
}

impl Evolver {
    /// Prepares buffers that fit `steps` steps without reallocation.
    pub fn new(u0: &LatticeState, spec: &CoinSpec, steps: usize) -> Self {
        let len = u0.len();
        let mut u1 = vec![ZERO; len + 2 * steps + 2];
        let mut u2 = u1.clone();
        let lo = steps + 1;
        for (k, v) in u0.amplitudes().iter().enumerate() {
            u1[lo + k] = v[0];
            u2[lo + k] = v[1];
        }
        Evolver {
            kernel: CoinKernel::new(spec),
            base: u0.origin() - lo as i64,
            u1,
            u2,
            lo,
            hi: lo + len,
            t: 0,
        }
    }

    pub fn time(&self) -> usize {
        self.t
    }

    fn grow(&mut self) {
        let extra = (self.u1.len() / 2).max(16);
        for buf in [&mut self.u1, &mut self.u2] {
            let mut v = vec![ZERO; buf.len() + 2 * extra];
            v[extra..extra + buf.len()].copy_from_slice(buf);
            *buf = v;
        }
        self.lo += extra;
        self.hi += extra;
        self.base -= extra as i64;
    }

    pub fn step(&mut self) {
        if self.lo == 0 || self.hi >= self.u1.len() {
            self.grow();
        }
        let (lo, hi) = (self.lo, self.hi);
        for i in lo..hi {
            let v = [self.u1[i], self.u2[i]];
            if v[0] == ZERO && v[1] == ZERO {
                continue;
            }
            let w = self.kernel.apply(v);
            self.u1[i] = w[0];
            self.u2[i] = w[1];
        }
        if hi > lo {
            self.u1.copy_within(lo..hi, lo - 1);
            self.u1[hi - 1] = ZERO;
            self.u2.copy_within(lo..hi, lo + 1);
            self.u2[lo] = ZERO;
        }
        self.lo -= 1;
        self.hi += 1;
        self.t += 1;
    }

    /// First lattice site of the active window.
    pub fn window_origin(&self) -> i64 {
        self.base + self.lo as i64
    }

    /// Active window of each component.
    pub fn components(&self) -> (&[C64], &[C64]) {
        (&self.u1[self.lo..self.hi], &self.u2[self.lo..self.hi])
    }

    pub fn at(&self, x: i64) -> Spinor {
        let k = x - self.base;
        if k < self.lo as i64 || k >= self.hi as i64 {
            [ZERO, ZERO]
        } else {
            [self.u1[k as usize], self.u2[k as usize]]
        }
    }

    pub fn state(&self) -> LatticeState {
        let (c1, c2) = self.components();
        let amps = c1.iter().zip(c2).map(|(a, b)| [*a, *b]).collect();
        LatticeState::from_raw(self.window_origin(), amps)
    }

    fn site_norm_sqrs(&self) -> impl Iterator<Item = f64> + '_ {
        let (c1, c2) = self.components();
        c1.iter().zip(c2).map(|(a, b)| a.norm_sqr() + b.norm_sqr())
    }

    pub fn sup_norm(&self) -> f64 {
        self.site_norm_sqrs().fold(0.0, f64::max).sqrt()
    }

    pub fn lp_norm(&self, p: f64) -> f64 {
        lp_norm_of(self.site_norm_sqrs().map(f64::sqrt), p)
    }

    pub fn l2_norm(&self) -> f64 {
        self.lp_norm(2.0)
    }

    /// Site of the largest `|u(x)|`, smallest on ties; `None` for the zero state.
    pub fn argmax(&self) -> Option<i64> {
        argmax_of(self.site_norm_sqrs()).map(|k| self.window_origin() + k as i64)
    }

    /// Sites with `|u_component(x)| > gamma`; `component` must already be 0 or 1.
    fn threshold_sites(&self, component: usize, gamma: f64) -> Vec<i64> {
        let c = if component == 0 { self.components().0 } else { self.components().1 };
        let g2 = gamma * gamma;
        let o = self.window_origin();
        c.iter()
            .enumerate()
            .filter(|(_, z)| z.norm_sqr() > g2)
            .map(|(k, _)| o + k as i64)
            .collect()
    }
}

/// `|u_component(x)| > gamma` trace.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Threshold {
    /// 1 or 2.
    pub component: usize,
    pub gamma: f64,
}

/// Observables to record at every step `t = 0..=steps`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Recorder {
    pub sup_norm: bool,
    /// Exponents `p` of `l^p` norm series; `inf` is not accepted here, use `sup_norm`.
    pub lp_norms: Vec<f64>,
    pub argmax: bool,
    pub thresholds: Vec<Threshold>,
    pub snapshot_times: Vec<usize>,
}

/// A recorded observable.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum Series {
    Values(Vec<f64>),
    Sites(Vec<Option<i64>>),
    SiteSets(Vec<Vec<i64>>),
}

impl Series {
    pub fn len(&self) -> usize {
        match self {
            Series::Values(v) => v.len(),
            Series::Sites(v) => v.len(),
            Series::SiteSets(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Rows `t,value` (`t,x` for sites, `t,x` per site for site sets).
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        match self {
            Series::Values(v) => {
                writeln!(w, "t,value")?;
                for (t, y) in v.iter().enumerate() {
                    writeln!(w, "{t},{y:.16e}")?;
                }
            }
            Series::Sites(v) => {
                writeln!(w, "t,x")?;
                for (t, x) in v.iter().enumerate() {
                    match x {
                        Some(x) => writeln!(w, "{t},{x}")?,
                        None => writeln!(w, "{t},")?,
                    }
                }
            }
            Series::SiteSets(v) => {
                writeln!(w, "t,x")?;
                for (t, xs) in v.iter().enumerate() {
                    for x in xs {
                        writeln!(w, "{t},{x}")?;
                    }
                }
            }
        }
        Ok(())
    }
}

impl Recorder {
    pub fn sup_norm() -> Self {
        Recorder { sup_norm: true, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        for p in &self.lp_norms {
            if !(*p >= 1.0 && p.is_finite()) {
                return Err(Error::InvalidExponent(*p));
            }
        }
        for th in &self.thresholds {
            check_component(th.component)?;
            if !(th.gamma > 0.0) {
                return Err(Error::InvalidParameter(format!("threshold must be positive, got {}", th.gamma)));
            }
        }
        Ok(())
    }

    fn names(&self) -> Vec<String> {
        let mut names = vec![];
        if self.sup_norm {
            names.push("sup_norm".to_string());
        }
        names.extend(self.lp_norms.iter().map(|p| lp_series_name(*p)));
        if self.argmax {
            names.push("argmax".to_string());
        }
        names.extend(self.thresholds.iter().map(threshold_series_name));
        names
    }
}

pub fn lp_series_name(p: f64) -> String {
    format!("l{p}_norm")
}

pub fn threshold_series_name(th: &Threshold) -> String {
    format!("threshold_u{}_{}", th.component, th.gamma)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub initial: LatticeState,
    pub final_state: LatticeState,
    pub series: BTreeMap<String, Series>,
    pub snapshots: Vec<(usize, LatticeState)>,
    pub steps: usize,
}

impl Trajectory {
    /// Real-valued series by name.
    pub fn values(&self, name: &str) -> Option<&[f64]> {
        match self.series.get(name)? {
            Series::Values(v) => Some(v),
            _ => None,
        }
    }

    pub fn sup_norms(&self) -> Option<&[f64]> {
        self.values("sup_norm")
    }
}

/// Iterates `u(t) = U u(t-1)` for `steps` steps, recording at every `t` including 0.
pub fn evolve(u0: &LatticeState, spec: &CoinSpec, steps: usize, rec: &Recorder) -> Result<Trajectory> {
    rec.validate()?;
    let mut ev = Evolver::new(u0, spec, steps);
    let mut series: Vec<Series> = vec![];
    if rec.sup_norm {
        series.push(Series::Values(Vec::with_capacity(steps + 1)));
    }
    for _ in &rec.lp_norms {
        series.push(Series::Values(Vec::with_capacity(steps + 1)));
    }
    if rec.argmax {
        series.push(Series::Sites(Vec::with_capacity(steps + 1)));
    }
    for _ in &rec.thresholds {
        series.push(Series::SiteSets(Vec::with_capacity(steps + 1)));
    }
    let mut snapshots = vec![];

    let mut record = |ev: &Evolver, series: &mut Vec<Series>| {
        let mut slot = series.iter_mut();
        if rec.sup_norm {
            if let Some(Series::Values(v)) = slot.next() {
                v.push(ev.sup_norm());
            }
        }
        for p in &rec.lp_norms {
            if let Some(Series::Values(v)) = slot.next() {
                v.push(ev.lp_norm(*p));
            }
        }
        if rec.argmax {
            if let Some(Series::Sites(v)) = slot.next() {
                v.push(ev.argmax());
            }
        }
        for th in &rec.thresholds {
            if let Some(Series::SiteSets(v)) = slot.next() {
                v.push(ev.threshold_sites(th.component - 1, th.gamma));
            }
        }
        if rec.snapshot_times.contains(&ev.time()) {
            snapshots.push((ev.time(), ev.state()));
        }
    };

    record(&ev, &mut series);
    for _ in 0..steps {
        ev.step();
        record(&ev, &mut series);
    }
    Ok(Trajectory {
        initial: u0.clone(),
        final_state: ev.state(),
        series: rec.names().into_iter().zip(series).collect(),
        snapshots,
        steps,
    })
}

/// Largest `l^2` distance over `t = 0..=steps` between `U(t) u0` and the rescaled
/// unit-strength evolution `kappa^{-1/2} U_unit(t) (kappa^{1/2} u0)`.
pub fn g_scaling_check(u0: &LatticeState, spec: &CoinSpec, steps: usize) -> Result<f64> {
    let (kappa, unit) = spec.intensity_scaling()?;
    let root = kappa.sqrt();
    let mut a = Evolver::new(u0, spec, steps);
    let mut b = Evolver::new(&u0.scaled(root.into()), &unit, steps);
    let inv = 1.0 / root;
    let deviation = |a: &Evolver, b: &Evolver| {
        let (a1, a2) = a.components();
        let (b1, b2) = b.components();
        let mut acc = 0.0;
        for k in 0..a1.len() {
            acc += (a1[k] - b1[k] * inv).norm_sqr() + (a2[k] - b2[k] * inv).norm_sqr();
        }
        acc.sqrt()
    };
    let mut worst = deviation(&a, &b);
    for _ in 0..steps {
        a.step();
        b.step();
        worst = worst.max(deviation(&a, &b));
    }
    Ok(worst)
}

/// Site values `u(t, -t)` along the left edge of the light cone.
#[derive(Debug, Clone, PartialEq)]
pub struct EdgeTrace {
    pub edge: Vec<Spinor>,
}

impl EdgeTrace {
    pub fn norms(&self) -> Vec<f64> {
        self.edge.iter().map(|v| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt()).collect()
    }

    /// `|u(t, -t) - target|` per step.
    pub fn distances_to(&self, target: Spinor) -> Vec<f64> {
        self.edge
            .iter()
            .map(|v| ((v[0] - target[0]).norm_sqr() + (v[1] - target[1]).norm_sqr()).sqrt())
            .collect()
    }

    /// Largest `|u2(t, -t)|`; zero when the edge keeps the form `(*, 0)`.
    pub fn max_lower_component(&self) -> f64 {
        self.edge.iter().map(|v| v[1].norm()).fold(0.0, f64::max)
    }

    /// Largest one-step contraction ratio of the edge norm (`1 - eps'`).
    pub fn max_ratio(&self) -> f64 {
        self.norms().windows(2).map(|w| w[1] / w[0]).fold(0.0, f64::max)
    }
}

/// Checks that `a` is a soliton amplitude of `spec`: `theta0 + g a^{2p} = 0` with `g < 0`.
fn check_soliton(a: f64, spec: &CoinSpec) -> Result<()> {
    let CoinSpec::RotationPower { theta0, g, p } = spec else {
        return Err(Error::UnsupportedFamily(spec.family()));
    };
    let residual = theta0 + g * (a * a).powi(*p as i32);
    if !(*g < 0.0 && a > 0.0 && residual.abs() <= 1e-12 * theta0.abs().max(1.0)) {
        return Err(Error::InvalidParameter(format!(
            "a = {a} is not on the soliton branch (theta0 + g a^(2p) = {residual:e}, g = {g})"
        )));
    }
    Ok(())
}

/// Soliton amplitude `(theta0 / |g|)^{1/(2p)}` for `rotation_power` with `g < 0`.
pub fn soliton_amplitude(spec: &CoinSpec) -> Result<f64> {
    match spec {
        CoinSpec::RotationPower { theta0, g, p } if *g < 0.0 && *theta0 > 0.0 => {
            Ok((theta0 / g.abs()).powf(1.0 / (2.0 * *p as f64)))
        }
        _ => Err(Error::InvalidParameter("no soliton for these coin parameters".into())),
    }
}

fn edge_trace(u0: &LatticeState, spec: &CoinSpec, steps: usize) -> EdgeTrace {
    let mut ev = Evolver::new(u0, spec, steps);
    let mut edge = Vec::with_capacity(steps + 1);
    edge.push(ev.at(0));
    for t in 1..=steps {
        ev.step();
        edge.push(ev.at(-(t as i64)));
    }
    EdgeTrace { edge }
}

/// Evolves the perturbed soliton `a (1 - eps) delta_{1,0}` and returns the edge values.
pub fn instability_trace(a: f64, eps: f64, spec: &CoinSpec, steps: usize) -> Result<EdgeTrace> {
    check_soliton(a, spec)?;
    if !(0.0..1.0).contains(&eps) {
        return Err(Error::InvalidParameter(format!("eps must lie in [0, 1), got {eps}")));
    }
    let u0 = LatticeState::delta(1, 0)?.scaled((a * (1.0 - eps)).into());
    Ok(edge_trace(&u0, spec, steps))
}

/// Evolves `(1 + eps) a delta_{1,0}` plus a tail supported on `x > 0` and returns the
/// edge values, which approach `(a, 0)`.
pub fn edge_recovery_trace(
    eps: f64,
    a: f64,
    spec: &CoinSpec,
    steps: usize,
    tail: &LatticeState,
) -> Result<EdgeTrace> {
    check_soliton(a, spec)?;
    if !(eps >= 0.0 && eps.is_finite()) {
        return Err(Error::InvalidParameter(format!("eps must be nonnegative, got {eps}")));
    }
    if let Some((lo, _)) = tail.support() {
        if lo <= 0 {
            return Err(Error::InvalidParameter("tail must vanish on x <= 0".into()));
        }
    }
    let head = LatticeState::delta(1, 0)?.scaled((a * (1.0 + eps)).into());
    let u0 = head.linear_combination(1.0.into(), tail, 1.0.into());
    Ok(edge_trace(&u0, spec, steps))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coins::hadamard_c0;
    use std::f64::consts::FRAC_PI_4;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn shift_moves_components_apart() {
        let d1 = LatticeState::delta(1, 0).unwrap();
        let d2 = LatticeState::delta(2, 0).unwrap();
        assert_eq!(shift(&d1).trimmed(), LatticeState::delta(1, -1).unwrap());
        assert_eq!(shift(&d2).trimmed(), LatticeState::delta(2, 1).unwrap());
        assert_eq!(inverse_shift(&LatticeState::delta(1, -1).unwrap()).trimmed(), d1);
        assert_eq!(inverse_shift(&LatticeState::delta(2, 1).unwrap()).trimmed(), d2);
    }

    #[test]
    fn first_step_of_constant_coin() {
        let a = C64::from_polar(0.6, 0.4);
        let b = C64::from_polar(0.8, 2.0);
        let c0 = U2Matrix::from_ab(a, b).unwrap();
        let out = linear_step(&LatticeState::delta(1, 0).unwrap(), &c0);
        assert_eq!(out.at(-1), [a, ZERO]);
        assert_eq!(out.at(1), [ZERO, -b.conj()]);
        let back = linear_step_inverse(&out, &c0);
        assert!(back.max_abs_diff(&LatticeState::delta(1, 0).unwrap()) < 1e-15);
    }

    #[test]
    fn evolver_matches_functional_step() {
        let spec = CoinSpec::RotationPower { theta0: FRAC_PI_4, g: 0.9, p: 1 };
        let u0 = LatticeState::from_sites([
            (-2, [c(0.3, 0.1), c(-0.2, 0.4)]),
            (0, [c(0.0, 0.5), c(0.1, 0.0)]),
            (1, [c(0.2, -0.3), c(0.0, 0.0)]),
        ])
        .unwrap();
        let mut ev = Evolver::new(&u0, &spec, 3);
        let mut u = u0.clone();
        for _ in 0..6 {
            ev.step();
            u = step(&u, &spec);
            assert_eq!(ev.state(), u);
        }
    }

    #[test]
    fn zero_steps_returns_initial_state() {
        let u0 = LatticeState::delta(1, 3).unwrap();
        let spec = CoinSpec::Constant { c0: hadamard_c0() };
        let tr = evolve(&u0, &spec, 0, &Recorder::sup_norm()).unwrap();
        assert_eq!(tr.final_state, u0);
        assert_eq!(tr.sup_norms().unwrap(), &[1.0]);
    }

    #[test]
    fn recorder_series_lengths() {
        let rec = Recorder {
            sup_norm: true,
            lp_norms: vec![2.0, 4.0],
            argmax: true,
            thresholds: vec![Threshold { component: 1, gamma: 0.1 }],
            snapshot_times: vec![0, 5, 7],
        };
        let spec = CoinSpec::Galton { g: 1.0 };
        let tr = evolve(&LatticeState::delta(1, 0).unwrap(), &spec, 7, &rec).unwrap();
        assert_eq!(tr.series.len(), 5);
        assert!(tr.series.values().all(|s| s.len() == 8));
        assert_eq!(tr.snapshots.iter().map(|s| s.0).collect::<Vec<_>>(), vec![0, 5, 7]);
        assert!(tr.values("l4_norm").is_some() && tr.values("l2_norm").is_some());
        let bad = Recorder { lp_norms: vec![0.5], ..Default::default() };
        assert!(evolve(&tr.initial, &spec, 1, &bad).is_err());
    }

    #[test]
    fn soliton_edge_rejects_off_branch_parameters() {
        let spec = CoinSpec::RotationPower { theta0: FRAC_PI_4, g: -0.8, p: 2 };
        assert!(instability_trace(0.5, 0.1, &spec, 5).is_err());
        let a = soliton_amplitude(&spec).unwrap();
        assert!(instability_trace(a, 0.1, &spec, 5).is_ok());
        assert!(instability_trace(a, 1.0, &spec, 5).is_err());
        let galton = CoinSpec::Galton { g: -1.0 };
        assert!(instability_trace(a, 0.1, &galton, 5).is_err());
    }

    #[test]
    fn series_csv() {
        let mut buf = vec![];
        Series::Sites(vec![Some(0), None, Some(-2)]).write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,x\n0,0\n1,\n2,-2\n");
    }
}
