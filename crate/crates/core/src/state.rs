//! Finitely supported two-component states on the integer lattice.

use std::fmt::Write as _;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::kahan::{ComplexKahanSum, KahanSum};
use crate::linalg::C64;

/// One site value `(u1(x), u2(x))`.
pub type Spinor = [C64; 2];

pub(crate) const ZERO_SPINOR: Spinor = [C64::new(0.0, 0.0), C64::new(0.0, 0.0)];

#[inline]
pub(crate) fn spinor_norm_sqr(v: &Spinor) -> f64 {
    v[0].norm_sqr() + v[1].norm_sqr()
}

/// A state stored on the window `[origin, origin + len)`; zero outside.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeState {
    origin: i64,
    amps: Vec<Spinor>,
}

/// The finding probability `p(x) = |u(x)|^2` on the window of a state.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityDistribution {
    pub origin: i64,
    pub weights: Vec<f64>,
}

impl ProbabilityDistribution {
    pub fn total(&self) -> f64 {
        self.weights.iter().copied().collect::<KahanSum>().value()
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        self.weights.iter().enumerate().map(move |(k, w)| (self.origin + k as i64, *w))
    }

    pub fn at(&self, x: i64) -> f64 {
        let k = x - self.origin;
        if k < 0 || k >= self.weights.len() as i64 {
            0.0
        } else {
            self.weights[k as usize]
        }
    }
}

pub(crate) fn check_component(j: usize) -> Result<usize> {
    match j {
        1 | 2 => Ok(j - 1),
        _ => Err(Error::InvalidComponent(j)),
    }
}

fn check_exponent(p: f64) -> Result<()> {
    if p >= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidExponent(p))
    }
}

impl LatticeState {
    /// Builds a state from its window; every amplitude must be finite.
    pub fn new(origin: i64, amps: Vec<Spinor>) -> Result<Self> {
        if amps.iter().flatten().any(|z| !(z.re.is_finite() && z.im.is_finite())) {
            return Err(Error::InvalidParameter("state amplitudes must be finite".into()));
        }
        Ok(LatticeState { origin, amps })
    }

    pub(crate) fn from_raw(origin: i64, amps: Vec<Spinor>) -> Self {
        LatticeState { origin, amps }
    }

    pub fn zeros(origin: i64, len: usize) -> Self {
        LatticeState { origin, amps: vec![ZERO_SPINOR; len] }
    }

    /// `e_j` at site `x`.
    pub fn delta(j: usize, x: i64) -> Result<Self> {
        let c = check_component(j)?;
        let mut v = ZERO_SPINOR;
        v[c] = C64::new(1.0, 0.0);
        Ok(LatticeState { origin: x, amps: vec![v] })
    }

    /// Builds a state from `(site, value)` pairs; repeated sites are summed.
    pub fn from_sites<I: IntoIterator<Item = (i64, Spinor)>>(sites: I) -> Result<Self> {
        let sites: Vec<_> = sites.into_iter().collect();
        if sites.is_empty() {
            return Ok(LatticeState::zeros(0, 0));
        }
        let lo = sites.iter().map(|s| s.0).min().unwrap();
        let hi = sites.iter().map(|s| s.0).max().unwrap();
        let mut amps = vec![ZERO_SPINOR; (hi - lo + 1) as usize];
        for (x, v) in sites {
            let a = &mut amps[(x - lo) as usize];
            a[0] += v[0];
            a[1] += v[1];
        }
        LatticeState::new(lo, amps)
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    /// Last stored site plus one.
    pub fn end(&self) -> i64 {
        self.origin + self.amps.len() as i64
    }

    pub fn amplitudes(&self) -> &[Spinor] {
        &self.amps
    }

    pub fn into_parts(self) -> (i64, Vec<Spinor>) {
        (self.origin, self.amps)
    }

    pub fn at(&self, x: i64) -> Spinor {
        let k = x - self.origin;
        if k < 0 || k >= self.amps.len() as i64 {
            ZERO_SPINOR
        } else {
            self.amps[k as usize]
        }
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, &Spinor)> + '_ {
        self.amps.iter().enumerate().map(move |(k, v)| (self.origin + k as i64, v))
    }

    /// Smallest and largest site carrying a nonzero amplitude.
    pub fn support(&self) -> Option<(i64, i64)> {
        let nz = |v: &Spinor| v[0] != C64::new(0.0, 0.0) || v[1] != C64::new(0.0, 0.0);
        let first = self.amps.iter().position(nz)?;
        let last = self.amps.iter().rposition(nz)?;
        Some((self.origin + first as i64, self.origin + last as i64))
    }

    /// Copy with the window shrunk to the support.
    pub fn trimmed(&self) -> LatticeState {
        match self.support() {
            None => LatticeState::zeros(self.origin, 0),
            Some((lo, hi)) => self.window(lo, hi + 1),
        }
    }

    /// Copy restricted or zero-padded to `[lo, hi)`.
    pub fn window(&self, lo: i64, hi: i64) -> LatticeState {
        let amps = (lo..hi).map(|x| self.at(x)).collect();
        LatticeState { origin: lo, amps }
    }

    pub fn scaled(&self, c: C64) -> LatticeState {
        let amps = self.amps.iter().map(|v| [v[0] * c, v[1] * c]).collect();
        LatticeState { origin: self.origin, amps }
    }

    /// `alpha * self + beta * other` on the union of the windows.
    pub fn linear_combination(&self, alpha: C64, other: &LatticeState, beta: C64) -> LatticeState {
        let (lo, hi) = union_window(self, other);
        let amps = (lo..hi)
            .map(|x| {
                let (u, v) = (self.at(x), other.at(x));
                [alpha * u[0] + beta * v[0], alpha * u[1] + beta * v[1]]
            })
            .collect();
        LatticeState { origin: lo, amps }
    }

    pub fn sub(&self, other: &LatticeState) -> LatticeState {
        self.linear_combination(C64::new(1.0, 0.0), other, C64::new(-1.0, 0.0))
    }

    /// Largest componentwise modulus of `self - other`.
    pub fn max_abs_diff(&self, other: &LatticeState) -> f64 {
        let (lo, hi) = union_window(self, other);
        (lo..hi)
            .map(|x| {
                let (u, v) = (self.at(x), other.at(x));
                (u[0] - v[0]).norm().max((u[1] - v[1]).norm())
            })
            .fold(0.0, f64::max)
    }

    /// Site magnitudes `|u(x)|` in window order.
    pub fn site_norms(&self) -> impl Iterator<Item = f64> + '_ {
        self.amps.iter().map(|v| spinor_norm_sqr(v).sqrt())
    }

    /// `(sum_x |u(x)|^p)^{1/p}`, or the largest site norm for `p = inf`.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        Ok(lp_norm_of(self.site_norms(), p))
    }

    pub fn l2_norm(&self) -> f64 {
        self.amps.iter().map(spinor_norm_sqr).collect::<KahanSum>().value().sqrt()
    }

    pub fn sup_norm(&self) -> f64 {
        self.amps.iter().map(spinor_norm_sqr).fold(0.0, f64::max).sqrt()
    }

    /// Weak `l^p` quasi-norm `sup_g g * #{x : |u(x)| > g}^{1/p}`, evaluated exactly
    /// on the attained magnitudes.
    pub fn weak_lp_norm(&self, p: f64) -> Result<f64> {
        check_exponent(p)?;
        let mut mags: Vec<f64> = self.site_norms().filter(|m| *m > 0.0).collect();
        Ok(weak_lp_of_magnitudes(&mut mags, p))
    }

    pub fn finding_probability(&self) -> ProbabilityDistribution {
        ProbabilityDistribution {
            origin: self.origin,
            weights: self.amps.iter().map(spinor_norm_sqr).collect(),
        }
    }

    /// Site of the largest `|u(x)|`, smallest such site on ties.
    pub fn argmax_position(&self) -> Result<i64> {
        argmax_of(self.amps.iter().map(spinor_norm_sqr))
            .map(|k| self.origin + k as i64)
            .ok_or(Error::ZeroState)
    }

    /// Sorted sites where `|u_component(x)| > gamma`.
    pub fn threshold_positions(&self, component: usize, gamma: f64) -> Result<Vec<i64>> {
        let c = check_component(component)?;
        if !(gamma > 0.0) {
            return Err(Error::InvalidParameter(format!("threshold must be positive, got {gamma}")));
        }
        Ok(self
            .sites()
            .filter(|(_, v)| v[c].norm() > gamma)
            .map(|(x, _)| x)
            .collect())
    }

    /// Writes `x,re_u1,im_u1,re_u2,im_u2` rows (with header) in window order.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "x,re_u1,im_u1,re_u2,im_u2")?;
        let mut line = String::new();
        for (x, v) in self.sites() {
            line.clear();
            let _ = write!(
                line,
                "{},{:.16e},{:.16e},{:.16e},{:.16e}",
                x, v[0].re, v[0].im, v[1].re, v[1].im
            );
            writeln!(w, "{line}")?;
        }
        Ok(())
    }

    /// Parses the format written by [`LatticeState::write_csv`]; rows must be consecutive sites.
    pub fn read_csv<R: BufRead>(r: R) -> Result<Self> {
        let mut origin = None;
        let mut amps = Vec::new();
        for (k, line) in r.lines().enumerate() {
            let line_no = k + 1;
            let line = line.map_err(|e| Error::Csv { line: line_no, reason: e.to_string() })?;
            let line = line.trim();
            if line.is_empty() || (k == 0 && line.starts_with('x')) {
                continue;
            }
            let fields: Vec<&str> = line.split(',').map(str::trim).collect();
            if fields.len() != 5 {
                return Err(Error::Csv { line: line_no, reason: format!("expected 5 fields, got {}", fields.len()) });
            }
            let bad = |reason: String| Error::Csv { line: line_no, reason };
            let x: i64 = fields[0].parse().map_err(|e| bad(format!("site: {e}")))?;
            let mut nums = [0.0; 4];
            for (n, f) in nums.iter_mut().zip(&fields[1..]) {
                *n = f.parse().map_err(|e| bad(format!("amplitude: {e}")))?;
            }
            let expected = origin.map(|o: i64| o + amps.len() as i64).unwrap_or(x);
            if x != expected {
                return Err(bad(format!("expected site {expected}, got {x}")));
            }
            origin.get_or_insert(x);
            amps.push([C64::new(nums[0], nums[1]), C64::new(nums[2], nums[3])]);
        }
        LatticeState::new(origin.unwrap_or(0), amps)
    }
}

/// `sum_x <u(x), v(x)>`, conjugating the second argument.
pub fn inner_product(u: &LatticeState, v: &LatticeState) -> C64 {
    let lo = u.origin().max(v.origin());
    let hi = u.end().min(v.end());
    let mut acc = ComplexKahanSum::new();
    for x in lo..hi {
        let (a, b) = (u.at(x), v.at(x));
        acc.add(a[0] * b[0].conj() + a[1] * b[1].conj());
    }
    acc.value()
}

fn union_window(u: &LatticeState, v: &LatticeState) -> (i64, i64) {
    match (u.is_empty(), v.is_empty()) {
        (true, true) => (u.origin(), u.origin()),
        (true, false) => (v.origin(), v.end()),
        (false, true) => (u.origin(), u.end()),
        (false, false) => (u.origin().min(v.origin()), u.end().max(v.end())),
    }
}

pub(crate) fn lp_norm_of<I: Iterator<Item = f64>>(norms: I, p: f64) -> f64 {
    if p.is_infinite() {
        return norms.fold(0.0, f64::max);
    }
    if p == 2.0 {
        return norms.map(|m| m * m).collect::<KahanSum>().value().sqrt();
    }
    // Scale by the maximum to keep m^p in range for large p.
    let norms: Vec<f64> = norms.collect();
    let max = norms.iter().copied().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    let s = norms.iter().map(|m| (m / max).powf(p)).collect::<KahanSum>().value();
    max * s.powf(1.0 / p)
}

/// Sorts `mags` in place (descending) and evaluates the weak-l^p supremum.
pub(crate) fn weak_lp_of_magnitudes(mags: &mut [f64], p: f64) -> f64 {
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut best = 0.0f64;
    for i in 0..mags.len() {
        let last_of_level = i + 1 == mags.len() || mags[i + 1] < mags[i];
        if last_of_level {
            best = best.max(mags[i] * ((i + 1) as f64).powf(1.0 / p));
        }
    }
    best
}

pub(crate) fn argmax_of<I: Iterator<Item = f64>>(values: I) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (k, v) in values.enumerate() {
        if v > best.map_or(0.0, |b| b.1) {
            best = Some((k, v));
        }
    }
    best.map(|b| b.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_1_SQRT_2;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    fn two_site() -> LatticeState {
        LatticeState::from_sites([(0, [c(1.0), c(0.0)]), (1, [c(0.0), c(1.0)])]).unwrap()
    }

    #[test]
    fn delta_states() {
        let d = LatticeState::delta(1, 0).unwrap();
        assert_eq!(d.at(0), [c(1.0), c(0.0)]);
        assert_eq!(d.lp_norm(2.0).unwrap(), 1.0);
        assert_eq!(d.lp_norm(1.0).unwrap(), 1.0);
        let far = LatticeState::delta(2, 10_000).unwrap();
        assert_eq!(far.at(10_000), [c(0.0), c(1.0)]);
        assert_eq!(far.support(), Some((10_000, 10_000)));
        assert_eq!(LatticeState::delta(3, 0), Err(Error::InvalidComponent(3)));
    }

    #[test]
    fn lp_norms() {
        let u = two_site();
        assert_eq!(u.lp_norm(1.0).unwrap(), 2.0);
        assert_eq!(u.lp_norm(f64::INFINITY).unwrap(), 1.0);
        assert!((u.lp_norm(2.0).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(u.lp_norm(0.5), Err(Error::InvalidExponent(0.5)));
    }

    #[test]
    fn weak_norms() {
        let d = LatticeState::delta(1, 0).unwrap();
        assert_eq!(d.weak_lp_norm(4.0).unwrap(), 1.0);
        // Magnitudes {1, 1}: count is 2 for every g < 1, so the sup is 2^{1/4}.
        let u = two_site();
        assert!((u.weak_lp_norm(4.0).unwrap() - 2f64.powf(0.25)).abs() < 1e-15);
        // Magnitudes {1, 0.9, 0.9}: max(1 * 1, 0.9 * 3^{1/2}) under p = 2
        let w = LatticeState::from_sites([
            (0, [c(1.0), c(0.0)]),
            (1, [c(0.9), c(0.0)]),
            (2, [c(0.0), c(0.9)]),
        ])
        .unwrap();
        assert!((w.weak_lp_norm(2.0).unwrap() - 0.9 * 3f64.sqrt()).abs() < 1e-15);
        assert!(w.weak_lp_norm(0.9).is_err());
    }

    #[test]
    fn finding_probability_masses() {
        let d = LatticeState::delta(1, 0).unwrap().finding_probability();
        assert_eq!(d.at(0), 1.0);
        let s = FRAC_1_SQRT_2;
        let u = LatticeState::from_sites([(0, [c(s), c(0.0)]), (5, [c(0.0), c(s)])]).unwrap();
        let p = u.finding_probability();
        assert!((p.at(0) - 0.5).abs() < 1e-15 && (p.at(5) - 0.5).abs() < 1e-15);
        assert!((p.total() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn inner_products() {
        let d1 = LatticeState::delta(1, 0).unwrap();
        let d2 = LatticeState::delta(2, 0).unwrap();
        assert_eq!(inner_product(&d1, &d1), c(1.0));
        assert_eq!(inner_product(&d1, &d2), c(0.0));
        // conjugate-linear in the second slot
        let i = C64::new(0.0, 1.0);
        assert_eq!(inner_product(&d1, &d1.scaled(i)), -i);
        assert_eq!(inner_product(&d1.scaled(i), &d1), i);
    }

    #[test]
    fn argmax_and_ties() {
        assert_eq!(LatticeState::delta(1, 7).unwrap().argmax_position().unwrap(), 7);
        let u = LatticeState::from_sites([(3, [c(0.5), c(0.0)]), (9, [c(0.0), c(-0.5)])]).unwrap();
        assert_eq!(u.argmax_position().unwrap(), 3);
        let t = 40;
        let soliton = LatticeState::from_sites([(-t, [c(0.9), c(0.0)])]).unwrap();
        assert_eq!(soliton.argmax_position().unwrap(), -t);
        assert_eq!(LatticeState::zeros(0, 4).argmax_position(), Err(Error::ZeroState));
    }

    #[test]
    fn thresholds() {
        let d = LatticeState::delta(1, 0).unwrap();
        assert_eq!(d.threshold_positions(1, 0.5).unwrap(), vec![0]);
        assert!(d.threshold_positions(2, 0.5).unwrap().is_empty());
        let three = LatticeState::from_sites([
            (-50, [c(0.3), c(0.0)]),
            (-49, [c(0.2), c(0.0)]),
            (0, [c(0.4), c(0.0)]),
            (30, [c(0.3), c(0.05)]),
            (60, [c(0.05), c(0.5)]),
        ])
        .unwrap();
        assert_eq!(three.threshold_positions(1, 0.1).unwrap(), vec![-50, -49, 0, 30]);
        assert!(d.threshold_positions(1, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let u = LatticeState::from_sites([
            (-2, [C64::new(0.1, -0.3), C64::new(1.0 / 3.0, 0.0)]),
            (0, [c(0.0), C64::new(0.0, std::f64::consts::PI)]),
        ])
        .unwrap();
        let mut buf = Vec::new();
        u.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x,re_u1,im_u1,re_u2,im_u2\n-2,"));
        let back = LatticeState::read_csv(&buf[..]).unwrap();
        assert_eq!(back, u);
    }

    #[test]
    fn csv_rejects_gaps() {
        let text = "x,re_u1,im_u1,re_u2,im_u2\n0,1,0,0,0\n2,1,0,0,0\n";
        assert!(matches!(LatticeState::read_csv(text.as_bytes()), Err(Error::Csv { line: 3, .. })));
    }

    #[test]
    fn rejects_non_finite() {
        assert!(LatticeState::new(0, vec![[C64::new(f64::NAN, 0.0), c(0.0)]]).is_err());
    }
}
