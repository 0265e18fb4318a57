//! Limit law of `X_t / t`: the density `w(v) f_K(v; |a|)` built from the asymptotic state.

use std::f64::consts::{FRAC_PI_2, PI};
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use super::SymbolData;
use crate::error::{Error, Result};
use crate::kahan::KahanSum;
use crate::linalg::{U2Matrix, C64};
use crate::quadrature::gauss_legendre;
use crate::state::LatticeState;

fn check_r(r: f64) -> Result<()> {
    if r > 0.0 && r < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("Konno parameter must lie in (0, 1), got {r}")))
    }
}

/// `f_K(v; r) = sqrt(1 - r^2) / (pi (1 - v^2) sqrt(r^2 - v^2))` for `|v| < r`, zero otherwise.
pub fn konno_density(v: f64, r: f64) -> Result<f64> {
    check_r(r)?;
    if v.abs() >= r {
        return Ok(0.0);
    }
    Ok((1.0 - r * r).sqrt() / (PI * (1.0 - v * v) * (r * r - v * v).sqrt()))
}

/// `int f_K(v; r) dv` over `(-r, r)`, computed after `v = r sin(phi)`.
pub fn konno_mass(r: f64) -> Result<f64> {
    check_r(r)?;
    let c = (1.0 - r * r).sqrt() / PI;
    let (x, w) = gauss_legendre(16);
    let panels = 64;
    let h = PI / panels as f64;
    let mut acc = KahanSum::new();
    for k in 0..panels {
        let mid = -FRAC_PI_2 + (k as f64 + 0.5) * h;
        for (xi, wi) in x.iter().zip(&w) {
            let s = (mid + 0.5 * h * xi).sin();
            acc.add(wi * 0.5 * h * c / (1.0 - r * r * s * s));
        }
    }
    Ok(acc.value())
}

/// `n` equally spaced points on `[-1, 1]`.
pub fn velocity_grid(n: usize) -> Vec<f64> {
    assert!(n >= 2);
    (0..n).map(|k| -1.0 + 2.0 * k as f64 / (n - 1) as f64).collect()
}

/// Density values on a velocity grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DensityCurve {
    pub v: Vec<f64>,
    pub density: Vec<f64>,
    /// Integral of the density over `(-|a|, |a|)`, computed by quadrature rather than from the grid.
    pub total: f64,
    /// `||u_+||^2`, the mass the density must carry.
    pub target_mass: f64,
}

impl DensityCurve {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "v,density")?;
        for (v, d) in self.v.iter().zip(&self.density) {
            writeln!(w, "{v:.16e},{d:.16e}")?;
        }
        Ok(())
    }
}

/// The limit law determined by an asymptotic state `u_+` of the walk with linear coin `C0`.
#[derive(Debug, Clone)]
pub struct WeakLimit {
    sym: SymbolData,
    origin: i64,
    /// Amplitudes in window order; `u^(eta)` is their trigonometric polynomial.
    amps: Vec<[C64; 2]>,
    norm_sqr: f64,
}

impl WeakLimit {
    pub fn new(u_plus: &LatticeState, c0: &U2Matrix) -> Result<Self> {
        let sym = SymbolData::from_coin(c0)?;
        let u = u_plus.trimmed();
        let norm = u.l2_norm();
        if norm == 0.0 {
            return Err(Error::ZeroState);
        }
        Ok(WeakLimit { sym, origin: u.origin(), amps: u.amplitudes().to_vec(), norm_sqr: norm * norm })
    }

    pub fn symbol(&self) -> &SymbolData {
        &self.sym
    }

    /// `||u_+||^2`.
    pub fn target_mass(&self) -> f64 {
        self.norm_sqr
    }

    /// `u^(eta) = sum_x e^{-i x eta} u(x)` by Horner evaluation in `z = e^{-i eta}`.
    fn fourier(&self, eta: f64) -> [C64; 2] {
        let z = C64::from_polar(1.0, -eta);
        let mut acc = [C64::new(0.0, 0.0); 2];
        for v in self.amps.iter().rev() {
            acc = [acc[0] * z + v[0], acc[1] * z + v[1]];
        }
        let shift = C64::from_polar(1.0, -(self.origin as f64) * eta);
        [acc[0] * shift, acc[1] * shift]
    }

    /// `<u^(eta), Pi_+-(eta) u^(eta)>` for `eta = xi - theta_a`.
    fn branch_weight(&self, eta: f64) -> (f64, f64) {
        let u = self.fourier(eta);
        let (vp, vm) = self.sym.eigenvectors(eta);
        let proj = |v: [C64; 2]| (v[0].conj() * u[0] + v[1].conj() * u[1]).norm_sqr();
        (proj(vp), proj(vm))
    }

    /// `w(v)`: half the sum over `m = 0, 1` of `P_-(xi_{-,m}(v)) + P_+(xi_{+,m}(v))`, where
    /// `xi_{+-,m}(v) = m pi + arcsin(-+(-1)^m |b| v / (|a| sqrt(1 - v^2)))`.
    /// The `+` branch moves with velocity `-p'(xi)`, the `-` branch with `+p'(xi)`.
    pub fn velocity_weight(&self, v: f64) -> f64 {
        let r = self.sym.abs_a();
        let q = ((1.0 - r * r).sqrt() * v / (r * (1.0 - v * v).sqrt())).clamp(-1.0, 1.0);
        let th = self.sym.theta_a();
        let mut total = 0.0;
        for m in 0..2 {
            let sgn = if m == 0 { 1.0 } else { -1.0 };
            let xi_plus = m as f64 * PI + (-sgn * q).asin();
            let xi_minus = m as f64 * PI + (sgn * q).asin();
            total += self.branch_weight(xi_plus - th).0 + self.branch_weight(xi_minus - th).1;
        }
        0.5 * total
    }

    fn check_v(v: f64) -> Result<()> {
        if v.is_finite() && v.abs() <= 1.0 {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!("velocity must lie in [-1, 1], got {v}")))
        }
    }

    /// `w(v) f_K(v; |a|)`; zero for `|a| <= |v| <= 1`.
    pub fn density(&self, v: f64) -> Result<f64> {
        Self::check_v(v)?;
        let f = konno_density(v, self.sym.abs_a())?;
        Ok(if f == 0.0 { 0.0 } else { self.velocity_weight(v) * f })
    }

    /// The density after `v = |a| sin(phi)`, bounded on `[-pi/2, pi/2]`.
    fn phi_integrand(&self, phi: f64) -> f64 {
        let r = self.sym.abs_a();
        let v = r * phi.sin();
        self.velocity_weight(v) * (1.0 - r * r).sqrt() / (PI * (1.0 - v * v))
    }

    /// Panel count in `phi`; the integrand oscillates on the scale of the state's width.
    fn panels(&self) -> usize {
        (4 * self.amps.len()).max(64)
    }

    fn integrate_phi(&self, lo: f64, hi: f64, nodes: &(Vec<f64>, Vec<f64>)) -> f64 {
        let h = hi - lo;
        nodes
            .0
            .iter()
            .zip(&nodes.1)
            .map(|(x, w)| w * 0.5 * h * self.phi_integrand(lo + 0.5 * h * (x + 1.0)))
            .sum()
    }

    /// Total mass of the density; equals `||u_+||^2` up to quadrature error.
    pub fn mass(&self) -> f64 {
        let n = self.panels();
        let nodes = gauss_legendre(10);
        let h = PI / n as f64;
        let parts: Vec<f64> = (0..n)
            .into_par_iter()
            .map(|k| {
                let lo = -FRAC_PI_2 + k as f64 * h;
                self.integrate_phi(lo, lo + h, &nodes)
            })
            .collect();
        parts.into_iter().collect::<KahanSum>().value()
    }

    /// `int_{-|a|}^{v} density` at each grid point; the grid must be nondecreasing.
    pub fn cdf(&self, grid: &[f64]) -> Result<Vec<f64>> {
        if grid.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::InvalidParameter("velocity grid must be sorted".into()));
        }
        for v in grid {
            if !(v.is_finite() && v.abs() <= 1.0) {
                return Err(Error::InvalidParameter(format!("velocity must lie in [-1, 1], got {v}")));
            }
        }
        let r = self.sym.abs_a();
        // breakpoints: uniform panels in phi plus every grid point inside (-r, r)
        let n = self.panels();
        let mut cuts: Vec<f64> = (0..=n).map(|k| -FRAC_PI_2 + PI * k as f64 / n as f64).collect();
        cuts.extend(grid.iter().filter(|v| v.abs() < r).map(|v| (v / r).asin()));
        cuts.sort_by(|a, b| a.total_cmp(b));
        cuts.dedup();
        let nodes = gauss_legendre(10);
        let pieces: Vec<f64> = cuts.par_windows(2).map(|w| self.integrate_phi(w[0], w[1], &nodes)).collect();
        let mut cumulative = Vec::with_capacity(cuts.len());
        let mut acc = KahanSum::new();
        cumulative.push(0.0);
        for p in pieces {
            acc.add(p);
            cumulative.push(acc.value());
        }
        let total = *cumulative.last().unwrap();
        Ok(grid
            .iter()
            .map(|v| {
                if *v <= -r {
                    0.0
                } else if *v >= r {
                    total
                } else {
                    let phi = (v / r).asin();
                    let k = cuts.partition_point(|c| *c < phi);
                    cumulative[k]
                }
            })
            .collect())
    }

    pub fn curve(&self, grid: &[f64]) -> Result<DensityCurve> {
        let density = grid.par_iter().map(|v| self.density(*v)).collect::<Result<Vec<_>>>()?;
        Ok(DensityCurve { v: grid.to_vec(), density, total: self.mass(), target_mass: self.norm_sqr })
    }
}

/// Density curve of the limit law for `u_plus` under the linear coin `(a, b)`.
pub fn weak_limit_density(u_plus: &LatticeState, a: C64, b: C64, grid: &[f64]) -> Result<DensityCurve> {
    WeakLimit::new(u_plus, &U2Matrix::from_ab(a, b)?)?.curve(grid)
}

/// `P(X_t / t <= v)` from the finding probability of `u_t`.
pub fn empirical_scaled_cdf(u_t: &LatticeState, t: u64, grid: &[f64]) -> Result<Vec<f64>> {
    if t == 0 {
        return Err(Error::InvalidParameter("t must be positive".into()));
    }
    let p = u_t.finding_probability();
    let mut sites: Vec<(i64, f64)> = p.sites().filter(|(_, w)| *w > 0.0).collect();
    sites.sort_by_key(|s| s.0);
    let mut cumulative = Vec::with_capacity(sites.len());
    let mut acc = KahanSum::new();
    for (_, w) in &sites {
        acc.add(*w);
        cumulative.push(acc.value());
    }
    let tf = t as f64;
    Ok(grid
        .iter()
        .map(|v| {
            // x / t <= v, with a little slack for grid points that land on lattice sites
            let xmax = (v * tf + 1e-9 * tf.max(1.0)).floor() as i64;
            let k = sites.partition_point(|s| s.0 <= xmax);
            if k == 0 { 0.0 } else { cumulative[k - 1] }
        })
        .collect())
}

/// `max |F(v) - G(v)|` over matching grid values.
pub fn kolmogorov_distance(f: &[f64], g: &[f64]) -> f64 {
    f.iter().zip(g).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
}
