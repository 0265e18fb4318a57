//! Coin families: the constant coin and the intensity-dependent nonlinear coins.
//!
//! Every nonlinear family factors as `C(s1, s2) = C0 * C_N(s1, s2)` with `C_N(0, 0) = I`.
//! [`CoinSpec::decompose`] exposes that factorization; the scattering code works with
//! `C_N - I` directly through [`NonlinearFactor::deviation`], which is evaluated without
//! forming `C_N` first so that tiny intensities keep their relative accuracy.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{cosm1, expi_hermitian_minus_identity, expm1_i, Hermitian, Mat2, U2Matrix, C64};
use crate::state::{spinor_norm_sqr, LatticeState, Spinor};

/// A (non)linear coin family with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum CoinSpec {
    /// `C = C0`.
    Constant { c0: U2Matrix },
    /// Optical Galton board: `H diag(e^{i g s1}, e^{i g s2})`, `H = ((1, 1), (1, -1)) / sqrt 2`.
    Galton { g: f64 },
    /// Scalar-type interaction: `diag(e^{-i g (s1 - s2)}, e^{i g (s1 - s2)}) R(theta)`.
    GrossNeveu { g: f64, theta: f64 },
    /// Vector-type interaction: `e^{i g (s1 + s2)} R(theta)`.
    Thirring { g: f64, theta: f64 },
    /// `R(theta0) R(g (s1 + s2)^p)`; `g` may have either sign.
    RotationPower { theta0: f64, g: f64, p: u32 },
    /// `C0 exp(i (s1^2 A1 + s2^2 A2))`.
    QuinticExponential {
        #[serde(default = "default_c0")]
        c0: U2Matrix,
        a1: Hermitian,
        a2: Hermitian,
    },
    /// `C0 C_N(s1, s2)` for an arbitrary nonlinear factor.
    Composed { c0: U2Matrix, nonlinear: NonlinearFactor },
}

/// The intensity-dependent factor `C_N` of a coin, normalized so that `C_N(0, 0) = I`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum NonlinearFactor {
    /// `diag(e^{i g s1}, e^{i g s2})`
    Galton { g: f64 },
    /// `R(-theta) diag(e^{-i g (s1 - s2)}, e^{i g (s1 - s2)}) R(theta)`
    GrossNeveu { g: f64, #[serde(default)] theta: f64 },
    /// `e^{i g (s1 + s2)} I`
    Thirring { g: f64 },
    /// `R(g (s1 + s2)^p)`
    RotationPower { g: f64, p: u32 },
    /// `exp(i (s1^2 A1 + s2^2 A2))`
    QuinticExponential { a1: Hermitian, a2: Hermitian },
}

/// The `a = b = 1/sqrt 2` coin.
pub fn hadamard_c0() -> U2Matrix {
    U2Matrix::from_ab(FRAC_1_SQRT_2.into(), FRAC_1_SQRT_2.into()).expect("valid parameters")
}

fn default_c0() -> U2Matrix {
    hadamard_c0()
}

fn galton_linear() -> U2Matrix {
    let s = FRAC_1_SQRT_2;
    U2Matrix::from_unitary(Mat2::real(s, s, s, -s))
}

fn phase(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

impl NonlinearFactor {
    pub fn family(&self) -> &'static str {
        match self {
            NonlinearFactor::Galton { .. } => "galton",
            NonlinearFactor::GrossNeveu { .. } => "gross_neveu",
            NonlinearFactor::Thirring { .. } => "thirring",
            NonlinearFactor::RotationPower { .. } => "rotation_power",
            NonlinearFactor::QuinticExponential { .. } => "quintic_exponential",
        }
    }

    /// True when the factor is identically `I` (zero coupling).
    pub fn is_trivial(&self) -> bool {
        match self {
            NonlinearFactor::Galton { g }
            | NonlinearFactor::GrossNeveu { g, .. }
            | NonlinearFactor::Thirring { g }
            | NonlinearFactor::RotationPower { g, .. } => *g == 0.0,
            NonlinearFactor::QuinticExponential { a1, a2 } => a1.is_zero() && a2.is_zero(),
        }
    }

    pub fn evaluate(&self, s1: f64, s2: f64) -> U2Matrix {
        let m = match self {
            NonlinearFactor::Galton { g } => Mat2::diag(phase(g * s1), phase(g * s2)),
            NonlinearFactor::GrossNeveu { g, theta } => {
                let d = g * (s1 - s2);
                let r = U2Matrix::rotation(*theta);
                *r.adjoint().matrix() * Mat2::diag(phase(-d), phase(d)) * *r.matrix()
            }
            NonlinearFactor::Thirring { g } => Mat2::IDENTITY.scale(phase(g * (s1 + s2))),
            NonlinearFactor::RotationPower { g, p } => {
                *U2Matrix::rotation(g * (s1 + s2).powi(*p as i32)).matrix()
            }
            NonlinearFactor::QuinticExponential { .. } => {
                self.deviation(s1, s2) + Mat2::IDENTITY
            }
        };
        U2Matrix::from_unitary(m)
    }

    /// `C_N(s1, s2) - I`, free of cancellation for small intensities.
    pub fn deviation(&self, s1: f64, s2: f64) -> Mat2 {
        match self {
            NonlinearFactor::Galton { g } => Mat2::diag(expm1_i(g * s1), expm1_i(g * s2)),
            NonlinearFactor::GrossNeveu { g, theta } => {
                let d = g * (s1 - s2);
                let r = U2Matrix::rotation(*theta);
                *r.adjoint().matrix() * Mat2::diag(expm1_i(-d), expm1_i(d)) * *r.matrix()
            }
            NonlinearFactor::Thirring { g } => Mat2::IDENTITY.scale(expm1_i(g * (s1 + s2))),
            NonlinearFactor::RotationPower { g, p } => {
                let phi = g * (s1 + s2).powi(*p as i32);
                let (s, c) = (phi.sin(), cosm1(phi));
                Mat2::real(c, -s, s, c)
            }
            NonlinearFactor::QuinticExponential { a1, a2 } => {
                let h = a1.matrix().scale((s1 * s1).into()) + a2.matrix().scale((s2 * s2).into());
                expi_hermitian_minus_identity(&h)
            }
        }
    }

    /// `(C_N(|v1|^2, |v2|^2) - I) v`.
    #[inline]
    pub fn deviation_apply(&self, v: Spinor) -> Spinor {
        let (s1, s2) = (v[0].norm_sqr(), v[1].norm_sqr());
        if s1 == 0.0 && s2 == 0.0 {
            return v.map(|_| C64::new(0.0, 0.0));
        }
        self.deviation(s1, s2).apply(v)
    }

    /// `(kappa, unit)` with `C_N(s1, s2) = unit(kappa s1, kappa s2)` and `kappa > 0`.
    fn intensity_scaling(&self) -> Option<(f64, NonlinearFactor)> {
        let split = |g: f64| (g != 0.0).then(|| (g.abs(), g.signum()));
        match self {
            NonlinearFactor::Galton { g } => split(*g).map(|(k, s)| (k, NonlinearFactor::Galton { g: s })),
            NonlinearFactor::GrossNeveu { g, theta } => {
                split(*g).map(|(k, s)| (k, NonlinearFactor::GrossNeveu { g: s, theta: *theta }))
            }
            NonlinearFactor::Thirring { g } => split(*g).map(|(k, s)| (k, NonlinearFactor::Thirring { g: s })),
            NonlinearFactor::RotationPower { g, p } => split(*g)
                .map(|(k, s)| (k.powf(1.0 / *p as f64), NonlinearFactor::RotationPower { g: s, p: *p })),
            NonlinearFactor::QuinticExponential { .. } => None,
        }
    }
}

impl CoinSpec {
    pub fn family(&self) -> &'static str {
        match self {
            CoinSpec::Constant { .. } => "constant",
            CoinSpec::Galton { .. } => "galton",
            CoinSpec::GrossNeveu { .. } => "gross_neveu",
            CoinSpec::Thirring { .. } => "thirring",
            CoinSpec::RotationPower { .. } => "rotation_power",
            CoinSpec::QuinticExponential { .. } => "quintic_exponential",
            CoinSpec::Composed { .. } => "composed",
        }
    }

    /// Splits the coin as `C0 * C_N`; `None` for the constant coin.
    pub fn decompose(&self) -> (U2Matrix, Option<NonlinearFactor>) {
        match self {
            CoinSpec::Constant { c0 } => (*c0, None),
            CoinSpec::Galton { g } => (galton_linear(), Some(NonlinearFactor::Galton { g: *g })),
            CoinSpec::GrossNeveu { g, theta } => (
                U2Matrix::rotation(*theta),
                Some(NonlinearFactor::GrossNeveu { g: *g, theta: *theta }),
            ),
            CoinSpec::Thirring { g, theta } => {
                (U2Matrix::rotation(*theta), Some(NonlinearFactor::Thirring { g: *g }))
            }
            CoinSpec::RotationPower { theta0, g, p } => (
                U2Matrix::rotation(*theta0),
                Some(NonlinearFactor::RotationPower { g: *g, p: *p }),
            ),
            CoinSpec::QuinticExponential { c0, a1, a2 } => {
                (*c0, Some(NonlinearFactor::QuinticExponential { a1: *a1, a2: *a2 }))
            }
            CoinSpec::Composed { c0, nonlinear } => (*c0, Some(nonlinear.clone())),
        }
    }

    pub fn linear_part(&self) -> U2Matrix {
        self.decompose().0
    }

    /// True when the coin does not depend on the state.
    pub fn is_linear(&self) -> bool {
        self.decompose().1.is_none_or(|f| f.is_trivial())
    }

    /// The coin matrix at local intensities `(s1, s2)`.
    pub fn evaluate(&self, s1: f64, s2: f64) -> U2Matrix {
        match self {
            CoinSpec::Constant { c0 } => *c0,
            CoinSpec::Galton { g } => {
                let h = galton_linear();
                U2Matrix::from_unitary(*h.matrix() * Mat2::diag(phase(g * s1), phase(g * s2)))
            }
            CoinSpec::GrossNeveu { g, theta } => {
                let d = g * (s1 - s2);
                let r = U2Matrix::rotation(*theta);
                U2Matrix::from_unitary(Mat2::diag(phase(-d), phase(d)) * *r.matrix())
            }
            CoinSpec::Thirring { g, theta } => {
                U2Matrix::from_unitary(U2Matrix::rotation(*theta).matrix().scale(phase(g * (s1 + s2))))
            }
            CoinSpec::RotationPower { theta0, g, p } => {
                U2Matrix::rotation(theta0 + g * (s1 + s2).powi(*p as i32))
            }
            CoinSpec::QuinticExponential { .. } | CoinSpec::Composed { .. } => {
                let (c0, factor) = self.decompose();
                let f = factor.expect("nonlinear family");
                c0.compose(&f.evaluate(s1, s2))
            }
        }
    }

    /// Pointwise coin operator `(C u)(x) = C(|u1(x)|^2, |u2(x)|^2) u(x)`.
    pub fn apply(&self, u: &LatticeState) -> LatticeState {
        let kernel = CoinKernel::new(self);
        let amps = u.amplitudes().iter().map(|v| kernel.apply(*v)).collect();
        LatticeState::from_raw(u.origin(), amps)
    }

    /// Operator norm of `C_N(s1, s2) - I`.
    pub fn nonlinear_deviation(&self, s1: f64, s2: f64) -> Result<f64> {
        match self.decompose().1 {
            None => Err(Error::NoNonlinearFactor(self.family())),
            Some(f) => Ok(f.deviation(s1, s2).op_norm()),
        }
    }

    /// `(d/dr1, d/dr2)` of `exp(i (r1 A1 + r2 A2))` at the origin, i.e. `(i A1, i A2)`.
    pub fn cn_partial_derivatives(&self) -> Result<(Mat2, Mat2)> {
        match self.decompose().1 {
            Some(NonlinearFactor::QuinticExponential { a1, a2 }) => {
                let i = C64::new(0.0, 1.0);
                Ok((a1.matrix().scale(i), a2.matrix().scale(i)))
            }
            _ => Err(Error::UnsupportedFamily(self.family())),
        }
    }

    /// `(kappa, unit)` such that this coin at `(s1, s2)` equals `unit` at `(kappa s1, kappa s2)`.
    pub fn intensity_scaling(&self) -> Result<(f64, CoinSpec)> {
        if self.is_linear() {
            // Linear coins commute with scalings; 4 keeps the comparison exact in binary.
            return Ok((4.0, self.clone()));
        }
        let unit = |g: f64| (g.abs(), g.signum());
        Ok(match self {
            CoinSpec::Galton { g } => {
                let (k, g) = unit(*g);
                (k, CoinSpec::Galton { g })
            }
            CoinSpec::GrossNeveu { g, theta } => {
                let (k, g) = unit(*g);
                (k, CoinSpec::GrossNeveu { g, theta: *theta })
            }
            CoinSpec::Thirring { g, theta } => {
                let (k, g) = unit(*g);
                (k, CoinSpec::Thirring { g, theta: *theta })
            }
            CoinSpec::RotationPower { theta0, g, p } => {
                let (k, g) = unit(*g);
                (k.powf(1.0 / *p as f64), CoinSpec::RotationPower { theta0: *theta0, g, p: *p })
            }
            CoinSpec::Composed { c0, nonlinear } => {
                let (k, f) = nonlinear
                    .intensity_scaling()
                    .ok_or(Error::UnsupportedFamily(nonlinear.family()))?;
                (k, CoinSpec::Composed { c0: *c0, nonlinear: f })
            }
            CoinSpec::Constant { .. } | CoinSpec::QuinticExponential { .. } => {
                return Err(Error::UnsupportedFamily(self.family()))
            }
        })
    }
}

/// Hot-loop form of a coin: maps a site value to the coined site value.
#[derive(Debug, Clone)]
pub(crate) enum CoinKernel {
    Constant(Mat2),
    Rotation { theta0: f64, g: f64, p: i32 },
    General(CoinSpec),
}

impl CoinKernel {
    pub(crate) fn new(spec: &CoinSpec) -> Self {
        match spec {
            CoinSpec::Constant { c0 } => CoinKernel::Constant(*c0.matrix()),
            CoinSpec::RotationPower { theta0, g, p } => {
                CoinKernel::Rotation { theta0: *theta0, g: *g, p: *p as i32 }
            }
            other => CoinKernel::General(other.clone()),
        }
    }

    #[inline]
    pub(crate) fn apply(&self, v: Spinor) -> Spinor {
        match self {
            CoinKernel::Constant(m) => m.apply(v),
            CoinKernel::Rotation { theta0, g, p } => {
                let s = spinor_norm_sqr(&v);
                let (sn, cs) = (theta0 + g * s.powi(*p)).sin_cos();
                [v[0] * cs - v[1] * sn, v[0] * sn + v[1] * cs]
            }
            CoinKernel::General(spec) => spec.evaluate(v[0].norm_sqr(), v[1].norm_sqr()).apply(v),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_PI_4, PI};

    fn all_families() -> Vec<CoinSpec> {
        let a1 = Hermitian::from_parts(0.0, 0.0, C64::new(0.3, 0.0));
        let a2 = Hermitian::from_parts(0.2, -0.2, C64::new(0.0, 0.0));
        vec![
            CoinSpec::Constant { c0: hadamard_c0() },
            CoinSpec::Galton { g: 0.7 },
            CoinSpec::GrossNeveu { g: 0.5, theta: 0.3 },
            CoinSpec::Thirring { g: -0.4, theta: 1.1 },
            CoinSpec::RotationPower { theta0: FRAC_PI_4, g: -0.8, p: 2 },
            CoinSpec::QuinticExponential { c0: hadamard_c0(), a1, a2 },
            CoinSpec::Composed {
                c0: U2Matrix::rotation(0.4),
                nonlinear: NonlinearFactor::Galton { g: 1.3 },
            },
        ]
    }

    #[test]
    fn nonlinear_factor_is_identity_at_origin() {
        for spec in all_families() {
            if let (c0, Some(f)) = spec.decompose() {
                assert_eq!(*f.evaluate(0.0, 0.0).matrix(), Mat2::IDENTITY, "{}", spec.family());
                assert_eq!(f.deviation(0.0, 0.0), Mat2::ZERO);
                let full = spec.evaluate(0.0, 0.0);
                assert!((*full.matrix() - *c0.matrix()).max_abs() < 1e-15);
            }
        }
    }

    #[test]
    fn decomposition_reproduces_family_formula() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for spec in all_families() {
            let (c0, f) = spec.decompose();
            for _ in 0..20 {
                let (s1, s2) = (rng.gen_range(0.0..2.0), rng.gen_range(0.0..2.0));
                let direct = spec.evaluate(s1, s2);
                let via = match &f {
                    Some(f) => c0.compose(&f.evaluate(s1, s2)),
                    None => c0,
                };
                assert!((*direct.matrix() - *via.matrix()).max_abs() < 1e-14, "{}", spec.family());
            }
        }
    }

    #[test]
    fn soliton_intensity_gives_identity_rotation() {
        let (g, p) = (-0.8f64, 2u32);
        let a = (PI / (4.0 * g.abs())).powf(1.0 / (2.0 * p as f64));
        let spec = CoinSpec::RotationPower { theta0: FRAC_PI_4, g, p };
        let m = spec.evaluate(a * a, 0.0);
        assert!((*m.matrix() - Mat2::IDENTITY).max_abs() < 1e-15);
    }

    #[test]
    fn thirring_determinant() {
        let (g, theta) = (0.37, 0.9);
        let spec = CoinSpec::Thirring { g, theta };
        for (s1, s2) in [(0.1, 0.2), (1.5, 0.0), (0.3, 2.2)] {
            let det = spec.evaluate(s1, s2).matrix().det();
            let expected = phase(2.0 * g * (s1 + s2)) * U2Matrix::rotation(theta).matrix().det();
            assert!((det - expected).norm() < 1e-15);
        }
    }

    #[test]
    fn apply_constant_coin_to_delta() {
        let a = C64::from_polar(0.6, 0.3);
        let b = C64::from_polar(0.8, -1.2);
        let c0 = U2Matrix::from_ab(a, b).unwrap();
        let spec = CoinSpec::Constant { c0 };
        let out = spec.apply(&LatticeState::delta(1, 0).unwrap());
        assert!((out.at(0)[0] - a).norm() < 1e-16);
        assert!((out.at(0)[1] + b.conj()).norm() < 1e-16);
    }

    #[test]
    fn galton_with_zero_coupling_is_constant_coin() {
        let u = LatticeState::from_sites([
            (0, [C64::new(0.3, 0.1), C64::new(-0.2, 0.5)]),
            (3, [C64::new(0.0, 0.7), C64::new(0.1, 0.0)]),
        ])
        .unwrap();
        let a = CoinSpec::Galton { g: 0.0 }.apply(&u);
        let b = CoinSpec::Constant { c0: galton_linear() }.apply(&u);
        assert_eq!(a, b);
    }

    #[test]
    fn thirring_deviation_closed_form() {
        let g = 0.9;
        let spec = CoinSpec::Thirring { g, theta: 0.0 };
        for s in [1e-9, 0.01, 0.5, 3.0] {
            let dev = spec.nonlinear_deviation(s, 0.0).unwrap();
            let expected = 2.0 * (g * s / 2.0).sin().abs();
            assert!((dev - expected).abs() <= 1e-14 * expected);
        }
        assert_eq!(spec.nonlinear_deviation(0.0, 0.0).unwrap(), 0.0);
        let constant = CoinSpec::Constant { c0: hadamard_c0() };
        assert_eq!(constant.nonlinear_deviation(0.1, 0.1), Err(Error::NoNonlinearFactor("constant")));
    }

    #[test]
    fn quintic_deviation_bounded_by_generator_norm() {
        let a1 = Hermitian::from_parts(0.1, -0.4, C64::new(0.3, 0.2));
        let a2 = Hermitian::from_parts(0.5, 0.0, C64::new(0.0, -0.1));
        let spec = CoinSpec::QuinticExponential { c0: hadamard_c0(), a1, a2 };
        for (s1, s2) in [(0.01, 0.02), (0.1, 0.05), (0.3, 0.4), (1.0, 0.2)] {
            let dev = spec.nonlinear_deviation(s1, s2).unwrap();
            let gen = (a1.matrix().scale((s1 * s1).into()) + a2.matrix().scale((s2 * s2).into())).op_norm();
            assert!(dev <= gen * (1.0 + 1e-12));
            // m = 2 behaviour: deviation / (s1 + s2)^2 stays bounded by the generator constants
            let bound = (a1.matrix().op_norm() + a2.matrix().op_norm()) * (s1 + s2).powi(2);
            assert!(dev <= bound);
        }
    }

    #[test]
    fn partial_derivatives_and_finite_differences() {
        let zero = CoinSpec::QuinticExponential { c0: hadamard_c0(), a1: Hermitian::ZERO, a2: Hermitian::ZERO };
        let (d1, d2) = zero.cn_partial_derivatives().unwrap();
        assert_eq!((d1, d2), (Mat2::ZERO, Mat2::ZERO));

        let a1 = Hermitian::from_parts(0.0, 0.0, C64::new(0.3, 0.0));
        let a2 = Hermitian::from_parts(0.2, -0.2, C64::new(0.0, 0.0));
        let spec = CoinSpec::QuinticExponential { c0: hadamard_c0(), a1, a2 };
        let (d1, _) = spec.cn_partial_derivatives().unwrap();
        assert_eq!(d1, a1.matrix().scale(C64::i()));
        // C~_N(r1, r2) = C_N(sqrt r1, sqrt r2); forward difference in r1 has O(h) error.
        let f = match spec.decompose().1.unwrap() {
            f @ NonlinearFactor::QuinticExponential { .. } => f,
            _ => unreachable!(),
        };
        let mut errs = vec![];
        for h in [1e-3f64, 1e-4] {
            let fd = (*f.evaluate(h.sqrt(), 0.0).matrix() - Mat2::IDENTITY).scale((1.0 / h).into());
            errs.push((fd - d1).max_abs());
        }
        assert!(errs[0] < 1e-3 && errs[1] < 1e-4);
        assert!((errs[0] / errs[1] - 10.0).abs() < 0.5, "first-order convergence {errs:?}");
        assert!(CoinSpec::Galton { g: 1.0 }.cn_partial_derivatives().is_err());
    }

    #[test]
    fn deviation_matches_difference_for_moderate_inputs() {
        for spec in all_families() {
            if let (_, Some(f)) = spec.decompose() {
                let d = f.deviation(0.4, 0.7);
                let diff = *f.evaluate(0.4, 0.7).matrix() - Mat2::IDENTITY;
                assert!((d - diff).max_abs() < 1e-15, "{}", spec.family());
            }
        }
    }

    #[test]
    fn json_config_forms() {
        let spec: CoinSpec = serde_json::from_str(
            r#"{"family":"rotation_power","theta0":0.7853981633974483,"g":-0.8,"p":2}"#,
        )
        .unwrap();
        assert_eq!(spec, CoinSpec::RotationPower { theta0: FRAC_PI_4, g: -0.8, p: 2 });
        let q: CoinSpec = serde_json::from_str(
            r#"{"family":"quintic_exponential","a1":[[0,0],[0.3,0],[0.3,0],[0,0]],"a2":[[0.2,0],[0,0],[0,0],[-0.2,0]]}"#,
        )
        .unwrap();
        assert_eq!(q.linear_part(), hadamard_c0());
        assert!(serde_json::from_str::<CoinSpec>(r#"{"family":"galton","g":1,"extra":2}"#).is_err());
        assert!(serde_json::from_str::<CoinSpec>(r#"{"family":"nope"}"#).is_err());
        let back: CoinSpec = serde_json::from_str(&serde_json::to_string(&q).unwrap()).unwrap();
        assert_eq!(back, q);
    }
}
