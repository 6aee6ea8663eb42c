//! Truncated power series arithmetic and coefficient extraction.
//!
//! Two extraction routes coexist on purpose: dense [`TruncatedSeries`]
//! arithmetic for moderate orders, and [`rational_coefficient`]'s linear
//! recurrence with O(deg D) memory for the `n ~ 10^4..10^5` extractions the
//! asymptotics checks need.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::{Error, Result};

/// A formal power series modulo `t^{N+1}`: coefficients `c_0..c_N`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl TruncatedSeries {
    /// Wraps a coefficient vector; `coeffs[i]` is the coefficient of `t^i`.
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        assert!(!coeffs.is_empty(), "a series carries at least c_0");
        Self { coeffs }
    }

    pub fn constant(c: Complex64, order: usize) -> Self {
        let mut coeffs = vec![Complex64::zero(); order + 1];
        coeffs[0] = c;
        Self { coeffs }
    }

    pub fn one(order: usize) -> Self {
        Self::constant(Complex64::one(), order)
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    /// Coefficient of `t^i`; zero beyond the truncation order.
    pub fn coeff(&self, i: usize) -> Complex64 {
        self.coeffs.get(i).copied().unwrap_or_else(Complex64::zero)
    }

    /// Cauchy product, truncated at the smaller operand order.
    pub fn mul(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let mut out = vec![Complex64::zero(); order + 1];
        for (i, &a) in self.coeffs.iter().take(order + 1).enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(order + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    pub fn add(&self, other: &Self) -> Self {
        let order = self.order().min(other.order());
        let coeffs = (0..=order).map(|i| self.coeffs[i] + other.coeffs[i]).collect();
        Self { coeffs }
    }

    pub fn scale(&self, c: Complex64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&a| c * a).collect() }
    }

    /// `exp(f)` for `f` with vanishing constant term, by the recurrence
    /// `n g_n = sum_{j=1..n} j f_j g_{n-j}`.
    ///
    /// ```
    /// use num_complex::Complex64;
    /// use permchar::series::TruncatedSeries;
    ///
    /// // exp(t) to order 4: coefficients 1/k!
    /// let mut t = vec![Complex64::new(0.0, 0.0); 5];
    /// t[1] = Complex64::new(1.0, 0.0);
    /// let e = TruncatedSeries::new(t).exp().unwrap();
    /// assert!((e.coeff(4).re - 1.0 / 24.0).abs() < 1e-15);
    /// ```
    pub fn exp(&self) -> Result<Self> {
        if !self.coeffs[0].is_zero() {
            return Err(Error::NonzeroConstantTerm);
        }
        let order = self.order();
        let mut g = vec![Complex64::zero(); order + 1];
        g[0] = Complex64::one();
        for n in 1..=order {
            let mut acc = Complex64::zero();
            for j in 1..=n {
                acc += (j as f64) * self.coeffs[j] * g[n - j];
            }
            g[n] = acc / n as f64;
        }
        Ok(Self { coeffs: g })
    }

    /// `log(f)` for `f` with constant term 1; inverse of [`Self::exp`].
    pub fn log(&self) -> Result<Self> {
        if self.coeffs[0] != Complex64::one() {
            return Err(Error::ConstantTermNotOne);
        }
        let order = self.order();
        let mut f = vec![Complex64::zero(); order + 1];
        for n in 1..=order {
            let mut acc = Complex64::zero();
            for j in 1..n {
                acc += (j as f64) * f[j] * self.coeffs[n - j];
            }
            f[n] = self.coeffs[n] - acc / n as f64;
        }
        Ok(Self { coeffs: f })
    }
}

/// The generalized binomial coefficient `binom(s, k)` as the running product
/// `prod_{m=1..k} (s - m + 1)/m`. For integer `s >= 0` this vanishes exactly
/// for `k > s` because the product hits a zero factor.
pub fn generalized_binomial(s: Complex64, k: u32) -> Complex64 {
    let mut b = Complex64::one();
    for m in 1..=k {
        b *= (s - Complex64::new((m - 1) as f64, 0.0)) / m as f64;
    }
    b
}

/// The expansion of `(1 - a t)^e`: coefficient `c_k = binom(e, k) (-a)^k`.
pub fn binomial_power_series(a: Complex64, e: Complex64, order: usize) -> TruncatedSeries {
    let mut coeffs = vec![Complex64::zero(); order + 1];
    let mut binom = Complex64::one();
    let mut pow = Complex64::one();
    for (k, c) in coeffs.iter_mut().enumerate() {
        *c = binom * pow;
        binom *= (e - Complex64::new(k as f64, 0.0)) / (k + 1) as f64;
        pow *= -a;
    }
    TruncatedSeries::new(coeffs)
}

/// The `n`-th Taylor coefficient of `N(t)/D(t)` by the recurrence
/// `d_0 c_n = numer_n - sum_{j=1..deg D} d_j c_{n-j}`.
///
/// Runs in O(n deg D) time and O(deg D) memory, which is what makes
/// extractions at `n ~ 10^4` cheap.
pub fn rational_coefficient(numer: &[Complex64], denom: &[Complex64], n: usize) -> Result<Complex64> {
    let d0 = *denom.first().ok_or(Error::ZeroLeadingDenominator)?;
    if d0.is_zero() {
        return Err(Error::ZeroLeadingDenominator);
    }
    let depth = denom.len() - 1;
    // ring buffer of the last `depth` coefficients; window[k % depth.max(1)]
    let mut window = vec![Complex64::zero(); depth.max(1)];
    let mut latest = Complex64::zero();
    for k in 0..=n {
        let mut acc = numer.get(k).copied().unwrap_or_else(Complex64::zero);
        for j in 1..=depth.min(k) {
            acc -= denom[j] * window[(k - j) % depth];
        }
        latest = acc / d0;
        if depth > 0 {
            window[k % depth] = latest;
        }
    }
    Ok(latest)
}

/// Exact polynomial product (full degree, no truncation).
pub fn polynomial_mul(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::zero(); a.len() + b.len() - 1];
    for (i, &ai) in a.iter().enumerate() {
        if ai.is_zero() {
            continue;
        }
        for (j, &bj) in b.iter().enumerate() {
            out[i + j] += ai * bj;
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn geometric(order: usize) -> TruncatedSeries {
        TruncatedSeries::new(vec![Complex64::one(); order + 1])
    }

    #[test]
    fn mul_basic() {
        let a = TruncatedSeries::new(vec![c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let b = TruncatedSeries::new(vec![c(1.0, 0.0), c(-1.0, 0.0), c(0.0, 0.0)]);
        let p = a.mul(&b);
        assert_eq!(p.coeffs(), &[c(1.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
    }

    #[test]
    fn mul_inverse_pair() {
        let one_minus_t =
            TruncatedSeries::new(vec![c(1.0, 0.0), c(-1.0, 0.0), Complex64::zero(), Complex64::zero(), Complex64::zero(), Complex64::zero()]);
        let p = geometric(5).mul(&one_minus_t);
        for i in 0..=5 {
            let want = if i == 0 { 1.0 } else { 0.0 };
            assert!((p.coeff(i) - c(want, 0.0)).norm() < 1e-15);
        }
    }

    #[test]
    fn squared_geometric_coefficients() {
        // (1-t)^{-2} has coefficients n+1; check the dense product against
        // the differentiated-geometric-series formula.
        let p = geometric(4).mul(&geometric(4));
        for n in 0..=4 {
            assert!((p.coeff(n) - c((n + 1) as f64, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_examples() {
        let zero = TruncatedSeries::constant(Complex64::zero(), 4);
        assert_eq!(zero.exp().unwrap(), TruncatedSeries::one(4));

        // exp(-log(1-t)) = geometric series
        let minus_log: Vec<Complex64> =
            (0..=6).map(|k| if k == 0 { Complex64::zero() } else { c(1.0 / k as f64, 0.0) }).collect();
        let g = TruncatedSeries::new(minus_log).exp().unwrap();
        for i in 0..=6 {
            assert!((g.coeff(i) - c(1.0, 0.0)).norm() < 1e-14);
        }

        // exp(t)
        let mut t = vec![Complex64::zero(); 6];
        t[1] = Complex64::one();
        let e = TruncatedSeries::new(t).exp().unwrap();
        let mut fact = 1.0;
        for i in 0..=5 {
            if i > 0 {
                fact *= i as f64;
            }
            assert!((e.coeff(i) - c(1.0 / fact, 0.0)).norm() < 1e-14);
        }
    }

    #[test]
    fn exp_rejects_constant_term() {
        assert!(TruncatedSeries::one(3).exp().is_err());
    }

    #[test]
    fn binomial_series_examples() {
        // a=1, e=-1: geometric
        let g = binomial_power_series(c(1.0, 0.0), c(-1.0, 0.0), 3);
        for i in 0..=3 {
            assert!((g.coeff(i) - c(1.0, 0.0)).norm() < 1e-15);
        }

        // integer l: (1 - x t)^{-l} has c_n = x^n prod_{k=1..l-1}(n+k)/(l-1)!
        let x = c(0.4, 0.3);
        let l = 3u32;
        let s = binomial_power_series(x, c(-(l as f64), 0.0), 8);
        let fact = 2.0; // (l-1)!
        for n in 0..=8u32 {
            let prod: f64 = (1..l).map(|k| (n + k) as f64).product();
            let want = x.powu(n) * (prod / fact);
            assert!((s.coeff(n as usize) - want).norm() < 1e-12, "n={n}");
        }

        // non-integer exponent against the product definition of binom
        let a = c(0.5, 0.0);
        let e = c(0.5, 1.0);
        let s = binomial_power_series(a, e, 2);
        let b1 = generalized_binomial(e, 1);
        let b2 = generalized_binomial(e, 2);
        assert!((s.coeff(1) - b1 * (-a)).norm() < 1e-15);
        assert!((s.coeff(2) - b2 * a * a).norm() < 1e-15);
    }

    #[test]
    fn binomial_series_terminates_for_integer_exponent() {
        let s = binomial_power_series(c(0.7, -0.2), c(3.0, 0.0), 10);
        for k in 4..=10 {
            assert_eq!(s.coeff(k), Complex64::zero());
        }
    }

    #[test]
    fn rational_coefficient_examples() {
        let x = c(0.25, 0.65);
        // (1 - x t)/(1 - t): coefficient 1-x for n >= 1
        let numer = [Complex64::one(), -x];
        let denom = [Complex64::one(), -Complex64::one()];
        for n in 1..=200 {
            let got = rational_coefficient(&numer, &denom, n).unwrap();
            assert!((got - (Complex64::one() - x)).norm() < 1e-13, "n={n}");
        }
        // 1/(1-t)^2: n+1
        let denom2 = [Complex64::one(), c(-2.0, 0.0), Complex64::one()];
        for n in [0usize, 1, 5, 100] {
            let got = rational_coefficient(&[Complex64::one()], &denom2, n).unwrap();
            assert!((got - c((n + 1) as f64, 0.0)).norm() < 1e-10);
        }
    }

    #[test]
    fn rational_coefficient_rejects_zero_leading_denominator() {
        let r = rational_coefficient(&[Complex64::one()], &[Complex64::zero(), Complex64::one()], 3);
        assert!(matches!(r, Err(Error::ZeroLeadingDenominator)));
    }

    proptest! {
        #[test]
        fn exp_log_roundtrip(res in proptest::collection::vec((-0.5f64..0.5, -0.5f64..0.5), 1..10)) {
            let mut coeffs = vec![Complex64::one()];
            coeffs.extend(res.iter().map(|&(re, im)| Complex64::new(re, im)));
            let f = TruncatedSeries::new(coeffs);
            let back = f.log().unwrap().exp().unwrap();
            for i in 0..=f.order() {
                prop_assert!((f.coeff(i) - back.coeff(i)).norm() < 1e-12);
            }
        }

        #[test]
        fn rational_matches_dense_expansion(
            roots in proptest::collection::vec((-0.9f64..0.9, -0.6f64..0.6), 1..4),
            zeros in proptest::collection::vec((-0.9f64..0.9, -0.6f64..0.6), 0..3),
        ) {
            let order = 60usize;
            let mut denom = vec![Complex64::one()];
            for &(re, im) in &roots {
                denom = polynomial_mul(&denom, &[Complex64::one(), -Complex64::new(re, im)]);
            }
            let mut numer = vec![Complex64::one()];
            for &(re, im) in &zeros {
                numer = polynomial_mul(&numer, &[Complex64::one(), -Complex64::new(re, im)]);
            }
            // dense route: numerator series times product of geometric expansions
            let mut dense = {
                let mut coeffs = vec![Complex64::zero(); order + 1];
                for (i, &v) in numer.iter().enumerate() {
                    if i <= order { coeffs[i] = v; }
                }
                TruncatedSeries::new(coeffs)
            };
            for &(re, im) in &roots {
                dense = dense.mul(&binomial_power_series(Complex64::new(re, im), Complex64::new(-1.0, 0.0), order));
            }
            for n in [0usize, 1, 7, 33, 60] {
                let got = rational_coefficient(&numer, &denom, n).unwrap();
                let want = dense.coeff(n);
                prop_assert!((got - want).norm() < 1e-10 * (1.0 + want.norm()), "n={} {} vs {}", n, got, want);
            }
        }
    }
}
