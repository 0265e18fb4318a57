//! Oscillatory integrals `I_+-(t, s)` and Fourier propagation of the linear walk.

use std::f64::consts::PI;

use rustfft::FftPlanner;

use super::SymbolData;
use crate::error::{Error, Result};
use crate::linalg::{Mat2, U2Matrix, C64, ZERO};
use crate::state::LatticeState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Branch {
    Plus,
    Minus,
}

impl Branch {
    fn sign(self) -> f64 {
        match self {
            Branch::Plus => 1.0,
            Branch::Minus => -1.0,
        }
    }
}

/// `max(4096, 8t)` rounded up to a power of two.
pub fn default_quadrature_points(t: u64) -> usize {
    (8 * t as usize).max(4096).next_power_of_two()
}

/// Trapezoid data for
/// `I_+-(t, s) = (1/2pi) int e^{i t (+-p(xi) + s (xi - theta_a))} Q_+-(xi) dxi`,
/// written in `eta = xi - theta_a` over `[-pi, pi]`, where `Q_+-(xi) = Pi_+-(xi - theta_a)`.
///
/// For `t s` an integer the integrand is periodic and the rule is spectrally accurate.
#[derive(Debug, Clone)]
pub struct OscillatoryKernel {
    t: u64,
    branch: Branch,
    /// Nodes `eta_k = -pi + 2 pi k / n`, `k = 0..=n`.
    nodes: Vec<f64>,
    /// Weighted matrices `w_k e^{+- i t p(eta_k + theta_a)} Pi_+-(eta_k)` (global phase included).
    weighted: Vec<Mat2>,
}

impl OscillatoryKernel {
    pub fn new(sym: &SymbolData, t: u64, branch: Branch, n: usize) -> Result<Self> {
        if t == 0 {
            return Err(Error::InvalidParameter("t must be positive".into()));
        }
        if n < 64 || !n.is_power_of_two() {
            return Err(Error::InvalidParameter(format!("quadrature points must be a power of two >= 64, got {n}")));
        }
        if (n as u64) < 8 * t {
            return Err(Error::InvalidParameter(format!("{n} quadrature points are too few for t = {t} (need >= 8t)")));
        }
        let phase_t = sym.phase().powi(t as i32);
        let sign = branch.sign();
        let mut nodes = Vec::with_capacity(n + 1);
        let mut weighted = Vec::with_capacity(n + 1);
        for k in 0..=n {
            let eta = -PI + 2.0 * PI * k as f64 / n as f64;
            let w = if k == 0 || k == n { 0.5 / n as f64 } else { 1.0 / n as f64 };
            let (pp, pm) = sym.eigenprojections(eta);
            let proj = if branch == Branch::Plus { pp } else { pm };
            // p~(eta) = p(eta + theta_a)
            let ph = C64::from_polar(w, sign * t as f64 * sym.p_tilde(eta)) * phase_t;
            nodes.push(eta);
            weighted.push(proj.scale(ph));
        }
        Ok(OscillatoryKernel { t, branch, nodes, weighted })
    }

    pub fn t(&self) -> u64 {
        self.t
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn points(&self) -> usize {
        self.nodes.len() - 1
    }

    /// `I_+-(t, s)` for any real `s`.
    pub fn evaluate(&self, s: f64) -> Mat2 {
        let ts = self.t as f64 * s;
        let mut acc = Mat2::ZERO;
        for (eta, m) in self.nodes.iter().zip(&self.weighted) {
            acc = acc + m.scale(C64::from_polar(1.0, ts * eta));
        }
        acc
    }

    /// `I_+-(t, x / t)` for every `x` in `[-n/2, n/2)`, via one inverse FFT per entry.
    pub fn lattice_values(&self) -> (i64, Vec<Mat2>) {
        let n = self.points();
        let mut planner = FftPlanner::new();
        let fft = planner.plan_fft_inverse(n);
        let mut out = vec![Mat2::ZERO; n];
        for (i, j) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
            // the end nodes coincide on the torus for integer x
            let mut buf: Vec<C64> = (0..n).map(|k| self.weighted[k].get(i, j)).collect();
            buf[0] += self.weighted[n].get(i, j);
            fft.process(&mut buf);
            for (k, m) in out.iter_mut().enumerate() {
                m.0[i][j] = buf[k];
            }
        }
        // e^{i x eta_k} = (-1)^x e^{2 pi i k x / n}
        let half = (n / 2) as i64;
        let values = (-half..half)
            .map(|x| {
                let m = out[x.rem_euclid(n as i64) as usize];
                if x % 2 == 0 { m } else { m.scale((-1.0).into()) }
            })
            .collect();
        (-half, values)
    }
}

/// `I_+-(t, s)` with `n` trapezoid nodes.
pub fn oscillatory_integral(t: u64, s: f64, branch: Branch, a: C64, b: C64, n: usize) -> Result<Mat2> {
    let sym = SymbolData::new(a, b)?;
    Ok(OscillatoryKernel::new(&sym, t, branch, n)?.evaluate(s))
}

/// `U0^t u0` by diagonalizing the symbol on a circle of `m` sites.
pub fn spectral_propagate_on(u0: &LatticeState, c0: &U2Matrix, t: u64, m: usize) -> Result<LatticeState> {
    let sym = SymbolData::from_coin(c0)?;
    let need = u0.len() + 2 * t as usize + 1;
    if m < need {
        return Err(Error::InvalidParameter(format!("grid of {m} sites cannot hold support {need} without wrap-around")));
    }
    let start = u0.origin() - t as i64;
    let mut c1 = vec![ZERO; m];
    let mut c2 = vec![ZERO; m];
    for (x, v) in u0.sites() {
        let k = (x - start) as usize;
        c1[k] = v[0];
        c2[k] = v[1];
    }
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(m).process(&mut c1);
    planner.plan_fft_forward(m).process(&mut c2);
    for k in 0..m {
        let xi = 2.0 * PI * k as f64 / m as f64;
        let w = sym.symbol_power(xi, t as i64).apply([c1[k], c2[k]]);
        c1[k] = w[0];
        c2[k] = w[1];
    }
    let inv = planner.plan_fft_inverse(m);
    inv.process(&mut c1);
    inv.process(&mut c2);
    let scale = 1.0 / m as f64;
    let amps = (0..need).map(|k| [c1[k] * scale, c2[k] * scale]).collect();
    Ok(LatticeState::from_raw(start, amps))
}

/// [`spectral_propagate_on`] with a power-of-two circle and a margin of 16 sites.
pub fn spectral_propagate(u0: &LatticeState, c0: &U2Matrix, t: u64) -> Result<LatticeState> {
    let m = (u0.len() + 2 * t as usize + 33).next_power_of_two();
    spectral_propagate_on(u0, c0, t, m)
}
