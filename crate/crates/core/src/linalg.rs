//! 2x2 complex matrices, the unitary and Hermitian newtypes built on them.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance used by the checked unitary constructors.
pub const UNITARY_TOL: f64 = 1e-12;

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);

/// A plain 2x2 complex matrix, row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[C64; 2]; 2]);

impl Mat2 {
    pub const ZERO: Mat2 = Mat2([[ZERO, ZERO], [ZERO, ZERO]]);
    pub const IDENTITY: Mat2 = Mat2([[ONE, ZERO], [ZERO, ONE]]);

    pub fn new(m00: C64, m01: C64, m10: C64, m11: C64) -> Self {
        Mat2([[m00, m01], [m10, m11]])
    }

    pub fn real(m00: f64, m01: f64, m10: f64, m11: f64) -> Self {
        Mat2::new(m00.into(), m01.into(), m10.into(), m11.into())
    }

    pub fn diag(d0: C64, d1: C64) -> Self {
        Mat2::new(d0, ZERO, ZERO, d1)
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.0[row][col]
    }

    pub fn adjoint(&self) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0].conj(), m[1][0].conj(), m[0][1].conj(), m[1][1].conj())
    }

    pub fn scale(&self, c: C64) -> Self {
        let m = &self.0;
        Mat2::new(m[0][0] * c, m[0][1] * c, m[1][0] * c, m[1][1] * c)
    }

    pub fn trace(&self) -> C64 {
        self.0[0][0] + self.0[1][1]
    }

    pub fn det(&self) -> C64 {
        self.0[0][0] * self.0[1][1] - self.0[0][1] * self.0[1][0]
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        let m = &self.0;
        [m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]]
    }

    /// Largest entry modulus.
    pub fn max_abs(&self) -> f64 {
        self.0
            .iter()
            .flatten()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Operator 2-norm (largest singular value), closed form for 2x2.
    pub fn op_norm(&self) -> f64 {
        // largest eigenvalue of the Hermitian Gram matrix, written without cancellation
        let g = self.adjoint() * *self;
        let mean = 0.5 * (g.0[0][0].re + g.0[1][1].re);
        let half_diff = 0.5 * (g.0[0][0].re - g.0[1][1].re);
        (mean + half_diff.hypot(g.0[0][1].norm())).sqrt()
    }

    /// `max |M^*M - I|`.
    pub fn unitarity_defect(&self) -> f64 {
        (self.adjoint() * *self - Mat2::IDENTITY).max_abs()
    }

    pub fn inverse(&self) -> Option<Self> {
        let d = self.det();
        if d.norm() == 0.0 {
            return None;
        }
        let m = &self.0;
        Some(Mat2::new(m[1][1] / d, -m[0][1] / d, -m[1][0] / d, m[0][0] / d))
    }

    pub fn is_finite(&self) -> bool {
        self.0.iter().flatten().all(|z| z.re.is_finite() && z.im.is_finite())
    }
}

impl Add for Mat2 {
    type Output = Mat2;
    fn add(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] + b[0][0], a[0][1] + b[0][1], a[1][0] + b[1][0], a[1][1] + b[1][1])
    }
}

impl Sub for Mat2 {
    type Output = Mat2;
    fn sub(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(a[0][0] - b[0][0], a[0][1] - b[0][1], a[1][0] - b[1][0], a[1][1] - b[1][1])
    }
}

impl Mul for Mat2 {
    type Output = Mat2;
    fn mul(self, rhs: Mat2) -> Mat2 {
        let (a, b) = (&self.0, &rhs.0);
        Mat2::new(
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        )
    }
}

/// Row-major list of four `[re, im]` pairs, the JSON form of every matrix.
fn to_pairs(m: &Mat2) -> [[f64; 2]; 4] {
    let e = |z: C64| [z.re, z.im];
    [e(m.0[0][0]), e(m.0[0][1]), e(m.0[1][0]), e(m.0[1][1])]
}

fn from_pairs(p: &[[f64; 2]]) -> std::result::Result<Mat2, String> {
    if p.len() != 4 {
        return Err(format!("expected 4 [re, im] entries, got {}", p.len()));
    }
    let z = |k: usize| C64::new(p[k][0], p[k][1]);
    let m = Mat2::new(z(0), z(1), z(2), z(3));
    if !m.is_finite() {
        return Err("matrix entries must be finite".into());
    }
    Ok(m)
}

impl Serialize for Mat2 {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        to_pairs(self).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Mat2 {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let pairs = Vec::<[f64; 2]>::deserialize(d)?;
        from_pairs(&pairs).map_err(serde::de::Error::custom)
    }
}

/// A 2x2 matrix known to be unitary to within [`UNITARY_TOL`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "Mat2")]
pub struct U2Matrix(Mat2);

impl U2Matrix {
    pub const IDENTITY: U2Matrix = U2Matrix(Mat2::IDENTITY);

    /// Checked constructor.
    pub fn new(m: Mat2) -> Result<Self> {
        let defect = m.unitarity_defect();
        if !(defect <= UNITARY_TOL) {
            return Err(Error::NotUnitary { defect });
        }
        Ok(U2Matrix(m))
    }

    /// Wraps a matrix that is unitary by construction (closed-form rotations, phases, exponentials
    /// of anti-Hermitian matrices).
    pub(crate) fn from_unitary(m: Mat2) -> Self {
        debug_assert!(m.unitarity_defect() < 1e-10, "defect {}", m.unitarity_defect());
        U2Matrix(m)
    }

    /// `((a, b), (-conj b, conj a))` with `|a|^2 + |b|^2 = 1` and `0 < |a| < 1`.
    pub fn from_ab(a: C64, b: C64) -> Result<Self> {
        let norm_sq = a.norm_sqr() + b.norm_sqr();
        if !((norm_sq - 1.0).abs() <= 1e-12) {
            return Err(Error::NotNormalized { norm_sq });
        }
        let abs_a = a.norm();
        if !(abs_a > 0.0 && abs_a < 1.0) {
            return Err(Error::DegenerateCoin(abs_a));
        }
        Ok(U2Matrix(Mat2::new(a, b, -b.conj(), a.conj())))
    }

    /// The real rotation `((cos t, -sin t), (sin t, cos t))`.
    pub fn rotation(theta: f64) -> Self {
        let (s, c) = theta.sin_cos();
        U2Matrix(Mat2::real(c, -s, s, c))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn adjoint(&self) -> Self {
        U2Matrix(self.0.adjoint())
    }

    pub fn compose(&self, rhs: &U2Matrix) -> U2Matrix {
        U2Matrix(self.0 * rhs.0)
    }

    #[inline]
    pub fn apply(&self, v: [C64; 2]) -> [C64; 2] {
        self.0.apply(v)
    }

    /// Reads off `(a, b)` if the matrix has the form `((a, b), (-conj b, conj a))`.
    pub fn ab(&self) -> Option<(C64, C64)> {
        let m = &self.0 .0;
        let (a, b) = (m[0][0], m[0][1]);
        let ok = (m[1][0] + b.conj()).norm() <= 1e-12 && (m[1][1] - a.conj()).norm() <= 1e-12;
        ok.then_some((a, b))
    }
}

impl From<U2Matrix> for Mat2 {
    fn from(u: U2Matrix) -> Mat2 {
        u.0
    }
}

/// JSON form of a unitary: either the four entries or the `(a, b)` parametrization.
#[derive(Deserialize)]
#[serde(untagged)]
enum UnitaryRepr {
    Entries(Mat2),
    Ab { a: [f64; 2], b: [f64; 2] },
}

impl<'de> Deserialize<'de> for U2Matrix {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let built = match UnitaryRepr::deserialize(d)? {
            UnitaryRepr::Entries(m) => U2Matrix::new(m),
            UnitaryRepr::Ab { a, b } => {
                U2Matrix::from_ab(C64::new(a[0], a[1]), C64::new(b[0], b[1]))
            }
        };
        built.map_err(serde::de::Error::custom)
    }
}

/// A 2x2 Hermitian matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(into = "Mat2")]
pub struct Hermitian(Mat2);

impl Hermitian {
    pub const ZERO: Hermitian = Hermitian(Mat2::ZERO);

    pub fn new(m: Mat2) -> Result<Self> {
        let defect = (m - m.adjoint()).max_abs();
        if !(defect <= 1e-14 * (1.0 + m.max_abs())) {
            return Err(Error::NotHermitian { defect });
        }
        // Symmetrize so downstream closed forms see exact Hermitian structure.
        let h = &m.0;
        let off = (h[0][1] + h[1][0].conj()) * 0.5;
        Ok(Hermitian(Mat2::new(h[0][0].re.into(), off, off.conj(), h[1][1].re.into())))
    }

    /// `((d0, off), (conj off, d1))`.
    pub fn from_parts(d0: f64, d1: f64, off: C64) -> Self {
        Hermitian(Mat2::new(d0.into(), off, off.conj(), d1.into()))
    }

    pub fn matrix(&self) -> &Mat2 {
        &self.0
    }

    pub fn d0(&self) -> f64 {
        self.0 .0[0][0].re
    }

    pub fn d1(&self) -> f64 {
        self.0 .0[1][1].re
    }

    pub fn off(&self) -> C64 {
        self.0 .0[0][1]
    }

    pub fn is_zero(&self) -> bool {
        self.0 == Mat2::ZERO
    }
}

impl From<Hermitian> for Mat2 {
    fn from(h: Hermitian) -> Mat2 {
        h.0
    }
}

impl<'de> Deserialize<'de> for Hermitian {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Hermitian::new(Mat2::deserialize(d)?).map_err(serde::de::Error::custom)
    }
}

/// `e^{i x} - 1` without cancellation for small `x`.
#[inline]
pub(crate) fn expm1_i(x: f64) -> C64 {
    let h = 0.5 * x;
    let s = h.sin();
    // e^{ix} - 1 = 2i sin(x/2) e^{ix/2}
    C64::new(-2.0 * s * s, 2.0 * s * h.cos())
}

/// `cos x - 1` without cancellation.
#[inline]
pub(crate) fn cosm1(x: f64) -> f64 {
    let s = (0.5 * x).sin();
    -2.0 * s * s
}

/// `exp(iH) - I` for Hermitian `H`, accurate when `H` is small.
///
/// With `H = m I + K`, `K` traceless with eigenvalues `±r`:
/// `exp(iH) = e^{im} (cos r I + i sin(r)/r K)`.
pub(crate) fn expi_hermitian_minus_identity(h: &Mat2) -> Mat2 {
    let d0 = h.0[0][0].re;
    let d1 = h.0[1][1].re;
    let off = h.0[0][1];
    let m = 0.5 * (d0 + d1);
    let half_diff = 0.5 * (d0 - d1);
    let r = (half_diff * half_diff + off.norm_sqr()).sqrt();
    let sinc = if r < 1e-4 {
        1.0 - r * r / 6.0 + r.powi(4) / 120.0
    } else {
        r.sin() / r
    };
    let phase_m1 = expm1_i(m);
    let phase = phase_m1 + ONE;
    // e^{im} cos r - 1 = (e^{im} - 1) cos r + (cos r - 1)
    let diag_common = phase_m1 * r.cos() + cosm1(r);
    let i_sinc = C64::new(0.0, sinc) * phase;
    Mat2::new(
        diag_common + i_sinc * half_diff,
        i_sinc * off,
        i_sinc * off.conj(),
        diag_common - i_sinc * half_diff,
    )
}
