//! Fourier-side analysis of the linear walk `U0 = S C0`.
//!
//! With `u^(xi) = sum_x e^{-i x xi} u(x)`, the walk acts as multiplication by the symbol
//! `U0^(xi) = e^{i xi} P0 + e^{-i xi} Q0`, whose eigenvalues are `e^{+-i p(xi + theta_a)}`
//! with `p(xi) = arccos(|a| cos xi)`.

mod decay;
mod oscillatory;
mod weak_limit;

pub use decay::{
    decay_fit, fixed_slope_intercept, strichartz_ratio, weak_l4_decay_check, DecayFit, StrichartzReport,
    WeakL4Report,
};
pub use oscillatory::{
    default_quadrature_points, oscillatory_integral, spectral_propagate, spectral_propagate_on, Branch,
    OscillatoryKernel,
};
pub use weak_limit::{
    empirical_scaled_cdf, kolmogorov_distance, konno_density, konno_mass, velocity_grid, weak_limit_density,
    DensityCurve, WeakLimit,
};

use crate::error::{Error, Result};
use crate::linalg::{Mat2, U2Matrix, C64};

/// `p(xi) = arccos(|a| cos xi)` and its first three derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Dispersion {
    pub p: f64,
    pub dp: f64,
    pub d2p: f64,
    pub d3p: f64,
}

fn check_abs_a(abs_a: f64) -> Result<()> {
    if abs_a > 0.0 && abs_a < 1.0 {
        Ok(())
    } else {
        Err(Error::DegenerateCoin(abs_a))
    }
}

#[inline]
fn dispersion_unchecked(xi: f64, r: f64) -> Dispersion {
    let (s, c) = xi.sin_cos();
    let d = 1.0 - r * r * c * c;
    let sd = d.sqrt();
    let k = r * (1.0 - r * r);
    Dispersion {
        p: (r * c).acos(),
        dp: r * s / sd,
        d2p: k * c / (d * sd),
        d3p: -k * (1.0 + 2.0 * r * r * c * c) * s / (d * d * sd),
    }
}

pub fn dispersion(xi: f64, abs_a: f64) -> Result<Dispersion> {
    check_abs_a(abs_a)?;
    Ok(dispersion_unchecked(xi, abs_a))
}

/// Grid minimum of `((1 + 2|a|^2) / (1 - |a|^2) p'')^2 + (p''')^2` against `|a|^2 (1 - |a|^2)^2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CurvatureBound {
    pub min_value: f64,
    pub argmin_xi: f64,
    pub bound: f64,
}

pub fn curvature_lower_bound(abs_a: f64) -> Result<CurvatureBound> {
    curvature_lower_bound_on(abs_a, 100_000)
}

pub fn curvature_lower_bound_on(abs_a: f64, points: usize) -> Result<CurvatureBound> {
    check_abs_a(abs_a)?;
    let r2 = abs_a * abs_a;
    let k = (1.0 + 2.0 * r2) / (1.0 - r2);
    let mut best = (f64::INFINITY, 0.0);
    for j in 0..points {
        let xi = -std::f64::consts::PI + 2.0 * std::f64::consts::PI * j as f64 / points as f64;
        let d = dispersion_unchecked(xi, abs_a);
        let q = (k * d.d2p).powi(2) + d.d3p * d.d3p;
        if q < best.0 {
            best = (q, xi);
        }
    }
    Ok(CurvatureBound { min_value: best.0, argmin_xi: best.1, bound: r2 * (1.0 - r2).powi(2) })
}

/// Coin parameters of `C0 = e^{i phase} ((a, b), (-conj b, conj a))` and the derived symbol data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SymbolData {
    a: C64,
    b: C64,
    abs_a: f64,
    theta_a: f64,
    phase: C64,
}

impl SymbolData {
    pub fn new(a: C64, b: C64) -> Result<Self> {
        let c0 = U2Matrix::from_ab(a, b)?;
        Self::from_coin(&c0)
    }

    /// Any unitary with `0 < |C0_11| < 1`; a global phase is split off.
    pub fn from_coin(c0: &U2Matrix) -> Result<Self> {
        let det = c0.matrix().det();
        let phase = C64::from_polar(1.0, 0.5 * det.arg());
        let su = U2Matrix::new(c0.matrix().scale(phase.conj()))?;
        let (a, b) = su.ab().ok_or(Error::InvalidParameter("coin is not of the form e^{i phi} SU(2)".into()))?;
        let abs_a = a.norm();
        check_abs_a(abs_a)?;
        Ok(SymbolData { a, b, abs_a, theta_a: a.arg(), phase })
    }

    pub fn a(&self) -> C64 {
        self.a
    }

    pub fn b(&self) -> C64 {
        self.b
    }

    pub fn abs_a(&self) -> f64 {
        self.abs_a
    }

    pub fn theta_a(&self) -> f64 {
        self.theta_a
    }

    /// Global phase `e^{i phi}` of the coin; 1 for coins given by `(a, b)`.
    pub fn phase(&self) -> C64 {
        self.phase
    }

    /// `e^{i xi} P0 + e^{-i xi} Q0` without the global phase.
    pub fn symbol(&self, xi: f64) -> Mat2 {
        let e = C64::from_polar(1.0, xi);
        let (ea, eb) = (e * self.a, e * self.b);
        Mat2::new(ea, eb, -eb.conj(), ea.conj())
    }

    pub fn dispersion(&self, xi: f64) -> Dispersion {
        dispersion_unchecked(xi, self.abs_a)
    }

    /// `p~(xi) = p(xi + theta_a)`.
    pub fn p_tilde(&self, xi: f64) -> f64 {
        (self.abs_a * (xi + self.theta_a).cos()).acos()
    }

    /// `(lambda_+, lambda_-) = (e^{i p~}, e^{-i p~})`.
    pub fn eigenvalues(&self, xi: f64) -> (C64, C64) {
        let lp = C64::from_polar(1.0, self.p_tilde(xi));
        (lp, lp.conj())
    }

    /// Unit eigenvectors `(v_+, v_-)` of the symbol, orthonormal by construction.
    pub fn eigenvectors(&self, xi: f64) -> ([C64; 2], [C64; 2]) {
        let e = C64::from_polar(1.0, xi);
        let (ea, eb) = (e * self.a, e * self.b);
        let (lp, lm) = self.eigenvalues(xi);
        // (e^{i xi} b, lambda - e^{i xi} a) solves the first row; take the better conditioned one
        let vp = [eb, lp - ea];
        let vm = [eb, lm - ea];
        let norm = |v: &[C64; 2]| (v[0].norm_sqr() + v[1].norm_sqr()).sqrt();
        let unit = |v: [C64; 2]| {
            let n = norm(&v);
            [v[0] / n, v[1] / n]
        };
        let perp = |v: [C64; 2]| [-v[1].conj(), v[0].conj()];
        if norm(&vp) >= norm(&vm) {
            let vp = unit(vp);
            (vp, perp(vp))
        } else {
            let vm = unit(vm);
            (perp(vm).map(|z| -z), vm)
        }
    }

    /// Spectral projections `(Pi_+, Pi_-)` of the symbol at `xi`.
    pub fn eigenprojections(&self, xi: f64) -> (Mat2, Mat2) {
        let (vp, vm) = self.eigenvectors(xi);
        (outer(vp), outer(vm))
    }

    /// Unitary diagonalizer `P` with `P U0^(xi) P^* = diag(lambda_+, lambda_-)`: rows are the
    /// conjugated eigenvectors `(-e^{-i xi} conj b, lambda_+ - e^{i xi} a)` and
    /// `(lambda_+ - e^{i xi} a, -e^{i xi} b)`, each scaled by `(|b|^2 + |e^{i xi} a - lambda_+|^2)^{-1/2}`.
    pub fn diagonalizer(&self, xi: f64) -> Mat2 {
        let e = C64::from_polar(1.0, xi);
        let (ea, eb) = (e * self.a, e * self.b);
        let (lp, _) = self.eigenvalues(xi);
        let d = lp - ea;
        let n = (self.b.norm_sqr() + d.norm_sqr()).sqrt();
        Mat2::new(-eb.conj(), d, d, -eb).scale((1.0 / n).into())
    }

    /// `U0^(xi)^t` including the global phase, via the spectral decomposition.
    pub fn symbol_power(&self, xi: f64, t: i64) -> Mat2 {
        let (pp, pm) = self.eigenprojections(xi);
        let pt = self.p_tilde(xi) * t as f64;
        let ph = self.phase.powi(t as i32);
        (pp.scale(C64::from_polar(1.0, pt)) + pm.scale(C64::from_polar(1.0, -pt))).scale(ph)
    }

    pub fn coin(&self) -> U2Matrix {
        U2Matrix::from_unitary(Mat2::new(self.a, self.b, -self.b.conj(), self.a.conj()).scale(self.phase))
    }
}

fn outer(v: [C64; 2]) -> Mat2 {
    Mat2::new(
        v[0] * v[0].conj(),
        v[0] * v[1].conj(),
        v[1] * v[0].conj(),
        v[1] * v[1].conj(),
    )
}

/// The symbol `((e^{i xi} a, e^{i xi} b), (-conj(e^{i xi} b), conj(e^{i xi} a)))`.
pub fn symbol(xi: f64, a: C64, b: C64) -> Result<U2Matrix> {
    Ok(U2Matrix::from_unitary(SymbolData::new(a, b)?.symbol(xi)))
}

pub fn eigenprojections(xi: f64, a: C64, b: C64) -> Result<(Mat2, Mat2)> {
    Ok(SymbolData::new(a, b)?.eigenprojections(xi))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2, PI};

    fn params() -> Vec<(C64, C64)> {
        vec![
            (FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into()),
            (C64::from_polar(0.3, 1.1), C64::from_polar((1.0f64 - 0.09).sqrt(), -0.4)),
            (C64::from_polar(0.9, -2.5), C64::from_polar((1.0f64 - 0.81).sqrt(), 0.3)),
        ]
    }

    #[test]
    fn symbol_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for (a, b) in params() {
            let s = SymbolData::new(a, b).unwrap();
            assert_eq!(s.symbol(0.0), *U2Matrix::from_ab(a, b).unwrap().matrix());
            for _ in 0..100 {
                let xi = rng.gen_range(-PI..PI);
                let m = s.symbol(xi);
                assert!(m.unitarity_defect() < 1e-14);
                let (lp, lm) = s.eigenvalues(xi);
                assert!((lp * lm - 1.0).norm() < 1e-12);
                assert!((m.det() - 1.0).norm() < 1e-12);
                assert!((m.trace() - 2.0 * (C64::from_polar(1.0, xi) * a).re).norm() < 1e-14);
                assert!((lp + lm - m.trace()).norm() < 1e-14);
                let d = s.dispersion(xi);
                assert!((d.p.cos() - s.abs_a() * xi.cos()).abs() < 1e-13);
                assert!(d.p > 0.0 && d.p < PI);
            }
        }
    }

    #[test]
    fn dispersion_special_values() {
        let r = 0.6;
        let d0 = dispersion(0.0, r).unwrap();
        assert_eq!((d0.p, d0.dp), (r.acos(), 0.0));
        let d1 = dispersion(FRAC_PI_2, r).unwrap();
        assert!((d1.p - FRAC_PI_2).abs() < 1e-15 && (d1.dp - r).abs() < 1e-15);
        assert!(dispersion(0.1, 1.0).is_err() && dispersion(0.1, 0.0).is_err());
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = 1e-5;
        for r in [0.3, FRAC_1_SQRT_2, 0.9] {
            for _ in 0..1000 {
                let xi = rng.gen_range(-PI..PI);
                let f = |x: f64| dispersion(x, r).unwrap();
                let d = f(xi);
                let fd1 = (f(xi + h).p - f(xi - h).p) / (2.0 * h);
                let fd2 = (f(xi + h).dp - f(xi - h).dp) / (2.0 * h);
                let fd3 = (f(xi + h).d2p - f(xi - h).d2p) / (2.0 * h);
                assert!((fd1 - d.dp).abs() <= 1e-6, "p' at {xi}");
                assert!((fd2 - d.d2p).abs() <= 1e-6, "p'' at {xi}");
                assert!((fd3 - d.d3p).abs() <= 1e-6, "p''' at {xi}");
            }
        }
    }

    #[test]
    fn curvature_bound_holds_and_is_attained_at_quarter_turn() {
        for r in [0.3, FRAC_1_SQRT_2, 0.9] {
            let c = curvature_lower_bound(r).unwrap();
            assert!(c.min_value >= c.bound - 1e-10, "|a| = {r}");
            assert!((c.min_value - c.bound).abs() < 1e-9 * c.bound.max(1.0));
            assert!((c.argmin_xi.abs() - FRAC_PI_2).abs() < 1e-3, "{}", c.argmin_xi);
        }
        let half = curvature_lower_bound(FRAC_1_SQRT_2).unwrap();
        assert!(half.min_value >= 0.125 - 1e-10);
    }

    #[test]
    fn projections_are_spectral() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for (a, b) in params() {
            let s = SymbolData::new(a, b).unwrap();
            for _ in 0..100 {
                let xi = rng.gen_range(-PI..PI);
                let (pp, pm) = s.eigenprojections(xi);
                let (lp, lm) = s.eigenvalues(xi);
                let m = s.symbol(xi);
                assert!((pp + pm - Mat2::IDENTITY).max_abs() < 1e-13);
                assert!((pp * pp - pp).max_abs() < 1e-12 && (pm * pm - pm).max_abs() < 1e-12);
                assert!((m * pp - pp.scale(lp)).max_abs() < 1e-12);
                assert!((m * pm - pm.scale(lm)).max_abs() < 1e-12);
                // Sylvester form of the same projection
                let syl = (m - Mat2::IDENTITY.scale(lm)).scale(1.0 / (lp - lm));
                assert!((syl - pp).max_abs() < 1e-10);
            }
        }
    }

    #[test]
    fn closed_form_diagonalizer_agrees_with_projections() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for (a, b) in params() {
            let s = SymbolData::new(a, b).unwrap();
            for _ in 0..100 {
                let xi = rng.gen_range(-PI..PI);
                let p = s.diagonalizer(xi);
                assert!(p.unitarity_defect() < 1e-12);
                let (lp, lm) = s.eigenvalues(xi);
                let d = p * s.symbol(xi) * p.adjoint();
                assert!((d - Mat2::diag(lp, lm)).max_abs() < 1e-12);
                let (pp, _) = s.eigenprojections(xi);
                let from_p = p.adjoint() * Mat2::diag(1.0.into(), 0.0.into()) * p;
                assert!((from_p - pp).max_abs() < 1e-12);
            }
        }
    }

    #[test]
    fn printed_first_row_is_not_a_left_eigenvector() {
        // (-e^{-i xi} conj b, -e^{-i xi} a + lambda_-) fails r M = lambda r for both eigenvalues,
        // while (lambda_+ - e^{i xi} a, -e^{i xi} b) is a left eigenvector for lambda_-.
        let (a, b) = params()[1];
        let s = SymbolData::new(a, b).unwrap();
        let xi = 0.7;
        let e = C64::from_polar(1.0, xi);
        let (lp, lm) = s.eigenvalues(xi);
        let m = s.symbol(xi);
        let left = |r: [C64; 2], lam: C64| {
            let rm = [r[0] * m.get(0, 0) + r[1] * m.get(1, 0), r[0] * m.get(0, 1) + r[1] * m.get(1, 1)];
            ((rm[0] - lam * r[0]).norm_sqr() + (rm[1] - lam * r[1]).norm_sqr()).sqrt()
        };
        let printed = [-(e * b).conj(), -e.conj() * a + lm];
        assert!(left(printed, lp) > 1e-3 && left(printed, lm) > 1e-3);
        assert!(left([lp - e * a, -e * b], lm) < 1e-14);
        assert!(left([-(e * b).conj(), lp - e * a], lp) < 1e-14);
    }

    #[test]
    fn general_unitary_coin_splits_phase() {
        let s = FRAC_1_SQRT_2;
        let h = U2Matrix::new(Mat2::real(s, s, s, -s)).unwrap();
        let sym = SymbolData::from_coin(&h).unwrap();
        assert!((*sym.coin().matrix() - *h.matrix()).max_abs() < 1e-15);
        assert!((sym.abs_a() - s).abs() < 1e-15);
        let p1 = sym.symbol_power(0.3, 1);
        let direct = Mat2::diag(C64::from_polar(1.0, 0.3), C64::from_polar(1.0, -0.3)) * *h.matrix();
        assert!((p1 - direct).max_abs() < 1e-14);
    }
}
