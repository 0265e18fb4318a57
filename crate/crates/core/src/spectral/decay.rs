//! Decay-rate fits and dispersive/Strichartz diagnostics of the linear walk.

use serde::{Deserialize, Serialize};

use crate::coins::CoinSpec;
use crate::error::{Error, Result};
use crate::evolution::Evolver;
use crate::linalg::{U2Matrix, C64};
use crate::state::{weak_lp_of_magnitudes, LatticeState};

/// Base-10 log-log least-squares line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    pub slope: f64,
    pub intercept: f64,
    pub t_min: f64,
    pub t_max: f64,
}

fn log_points(series: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<Vec<(f64, f64)>> {
    let mut pts = vec![];
    for (k, &(t, y)) in series.iter().enumerate() {
        if t < t_min || t > t_max {
            continue;
        }
        if !(y > 0.0) || !(t > 0.0) {
            return Err(Error::NonPositive { t: k, value: if t > 0.0 { y } else { t } });
        }
        pts.push((t.log10(), y.log10()));
    }
    if pts.len() < 2 {
        return Err(Error::InvalidParameter(format!("fewer than two points in [{t_min}, {t_max}]")));
    }
    Ok(pts)
}

pub fn decay_fit(series: &[(f64, f64)], t_min: f64, t_max: f64) -> Result<DecayFit> {
    let pts = log_points(series, t_min, t_max)?;
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InvalidParameter("all fit points share one t".into()));
    }
    let slope = sxy / sxx;
    Ok(DecayFit { slope, intercept: my - slope * mx, t_min, t_max })
}

/// Least-squares intercept of `log10 value = slope log10 t + c` with the slope held fixed.
pub fn fixed_slope_intercept(series: &[(f64, f64)], slope: f64, t_min: f64, t_max: f64) -> Result<f64> {
    let pts = log_points(series, t_min, t_max)?;
    Ok(pts.iter().map(|p| p.1 - slope * p.0).sum::<f64>() / pts.len() as f64)
}

fn japanese_bracket(t: usize) -> f64 {
    (1.0 + (t as f64).powi(2)).sqrt()
}

/// `<t>^{1/4} ||U0^t delta_{1,0}||_{weak l^4}` for `t = 0..=T`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WeakL4Report {
    pub normalized: Vec<f64>,
    pub max: f64,
    pub argmax_t: usize,
}

impl WeakL4Report {
    /// Maximum over `t <= horizon`.
    pub fn max_up_to(&self, horizon: usize) -> f64 {
        self.normalized[..=horizon.min(self.normalized.len() - 1)].iter().copied().fold(0.0, f64::max)
    }
}

pub fn weak_l4_decay_check(a: C64, b: C64, horizon: usize) -> Result<WeakL4Report> {
    if horizon < 10 {
        return Err(Error::InvalidParameter(format!("horizon must be at least 10, got {horizon}")));
    }
    let spec = CoinSpec::Constant { c0: U2Matrix::from_ab(a, b)? };
    let mut ev = Evolver::new(&LatticeState::delta(1, 0)?, &spec, horizon);
    let mut normalized = Vec::with_capacity(horizon + 1);
    let mut mags = vec![];
    for t in 0..=horizon {
        if t > 0 {
            ev.step();
        }
        let (c1, c2) = ev.components();
        mags.clear();
        mags.extend(c1.iter().zip(c2).map(|(x, y)| (x.norm_sqr() + y.norm_sqr()).sqrt()).filter(|m| *m > 0.0));
        normalized.push(japanese_bracket(t).powf(0.25) * weak_lp_of_magnitudes(&mut mags, 4.0));
    }
    let (argmax_t, max) = normalized
        .iter()
        .enumerate()
        .fold((0, 0.0), |best, (t, v)| if *v > best.1 { (t, *v) } else { best });
    Ok(WeakL4Report { normalized, max, argmax_t })
}

/// Truncated Strichartz norm of `U0^t u0` relative to `||u0||_{l^2}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StrichartzReport {
    /// `sup_t ||U0^t u0||_{l^2} / ||u0||_{l^2}`.
    pub linf_l2: f64,
    /// `(sum_{t <= T} ||U0^t u0||_{l^inf}^6)^{1/6} / ||u0||_{l^2}`.
    pub l6_linf: f64,
    pub ratio: f64,
    pub horizon: usize,
}

pub fn strichartz_ratio(u0: &LatticeState, a: C64, b: C64, horizon: usize) -> Result<StrichartzReport> {
    let n0 = u0.l2_norm();
    if n0 == 0.0 {
        return Err(Error::ZeroState);
    }
    let spec = CoinSpec::Constant { c0: U2Matrix::from_ab(a, b)? };
    let mut ev = Evolver::new(u0, &spec, horizon);
    let mut l2max = ev.l2_norm();
    let mut six = crate::kahan::KahanSum::new();
    six.add(ev.sup_norm().powi(6));
    for _ in 0..horizon {
        ev.step();
        l2max = l2max.max(ev.l2_norm());
        six.add(ev.sup_norm().powi(6));
    }
    let linf_l2 = l2max / n0;
    let l6_linf = six.value().powf(1.0 / 6.0) / n0;
    Ok(StrichartzReport { linf_l2, l6_linf, ratio: linf_l2.max(l6_linf), horizon })
}
