//! Compensated (Kahan–Babuška–Neumaier) summation.

use crate::linalg::C64;

/// Error-free transformation: `a + b = s + e` exactly.
#[inline]
pub fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    let e = (a - (s - bb)) + (b - bb);
    (s, e)
}

/// Running compensated sum of `f64` values.
#[derive(Debug, Clone, Copy, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: f64) {
        let (s, e) = two_sum(self.sum, value);
        self.sum = s;
        self.comp += e;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl std::iter::FromIterator<f64> for KahanSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut k = KahanSum::new();
        iter.into_iter().for_each(|v| k.add(v));
        k
    }
}

/// Compensated sum of complex values (componentwise).
#[derive(Debug, Clone, Copy, Default)]
pub struct ComplexKahanSum {
    re: KahanSum,
    im: KahanSum,
}

impl ComplexKahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, z: C64) {
        self.re.add(z.re);
        self.im.add(z.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Adds `z` into the pair `(hi, lo)` so that `hi + lo` tracks the exact running sum.
#[inline]
pub(crate) fn accumulate(hi: &mut C64, lo: &mut C64, z: C64) {
    let (sr, er) = two_sum(hi.re, z.re);
    let (si, ei) = two_sum(hi.im, z.im);
    *hi = C64::new(sr, si);
    *lo += C64::new(er, ei);
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn recovers_small_terms_lost_by_naive_summation() {
        let mut naive = 1.0f64;
        let mut k = KahanSum::new();
        k.add(1.0);
        for _ in 0..1_000_000 {
            naive += 1e-16;
            k.add(1e-16);
        }
        assert_eq!(naive, 1.0);
        assert!((k.value() - (1.0 + 1e-10)).abs() < 1e-22);
    }

    #[test]
    fn handles_large_cancelling_terms() {
        let k: KahanSum = [1.0, 1e100, 1.0, -1e100].into_iter().collect();
        assert_eq!(k.value(), 2.0);
    }

    #[test]
    fn two_sum_is_error_free() {
        let (s, e) = two_sum(0.1, 0.2);
        assert_eq!(s, 0.1 + 0.2);
        // exact rounding error of 0.1 + 0.2
        assert_eq!(e, -2.7755575615628914e-17);
        assert_eq!(two_sum(1.0, 1e-17), (1.0, 1e-17));
    }

    #[test]
    fn complex_pair_accumulation() {
        let mut hi = C64::new(1.0, -1.0);
        let mut lo = C64::new(0.0, 0.0);
        for _ in 0..1000 {
            accumulate(&mut hi, &mut lo, C64::new(1e-17, -1e-17));
        }
        let total = hi + lo;
        assert!((total.re - (1.0 + 1e-14)).abs() < 1e-24);
        assert!((total.im + (1.0 + 1e-14)).abs() < 1e-24);
    }
}
