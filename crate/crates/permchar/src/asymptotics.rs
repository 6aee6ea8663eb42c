//! Growth rates of `E[Z_n^{s1}(x) Z_n^{s2}(conj x)]` for `|x| = 1`, `x` not
//! a root of unity.
//!
//! After collecting equal factors, the generating function collapses to
//! `prod_{k=-s2..s1} (1 - x^k t)^{S(k)}` with
//! `S(k) = (-1)^{k+1} binom(s1+s2, s2+k)`. Its partial fraction
//! decomposition is dominated by the even `k` maximizing the pole order
//! `M = binom(s1+s2, s2+k)`, giving
//! `E[..] ~ n^{M-1} sum_{k0} C(k0) x^{k0 n}` with one or two dominant
//! indices depending on `s1 - s2 mod 4`.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::moments::gf_moment_integer;
use crate::partitions::MomentQuery;
use crate::{Error, Result};

const UNIT_CIRCLE_EPS: f64 = 1e-12;

/// Default separation from roots of unity; closer than this the partial
/// fractions are ill-conditioned and construction is refused.
pub const ROOT_OF_UNITY_EPS: f64 = 1e-9;

/// True iff `|x^j - 1| > eps` for all `1 <= j <= max_order`.
/// Rejects inputs whose modulus is not 1 within 1e-12.
pub fn check_not_root_of_unity(x: Complex64, max_order: u32, eps: f64) -> Result<bool> {
    if (x.norm() - 1.0).abs() > UNIT_CIRCLE_EPS {
        return Err(Error::NotOnUnitCircle { modulus: x.norm() });
    }
    let phi = x.arg();
    for j in 1..=max_order {
        let w = Complex64::from_polar(1.0, phi * j as f64);
        if (w - Complex64::one()).norm() <= eps {
            return Ok(false);
        }
    }
    Ok(true)
}

fn binomial_i64(n: i64, k: i64) -> i64 {
    if k < 0 || k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut b = 1i64;
    for i in 0..k {
        b = b * (n - i) / (i + 1);
    }
    b
}

/// The collapsed factor exponent `S(k) = (-1)^{k+1} binom(s1+s2, s2+k)` for
/// `-s2 <= k <= s1`.
pub fn collapsed_exponent(s1: u32, s2: u32, k: i64) -> Result<i64> {
    let (lo, hi) = (-(s2 as i64), s1 as i64);
    if k < lo || k > hi {
        return Err(Error::IndexOutOfRange { k, lo, hi });
    }
    let sign = if (k.rem_euclid(2)) == 0 { -1 } else { 1 };
    Ok(sign * binomial_i64((s1 + s2) as i64, s2 as i64 + k))
}

/// Maximal even-index pole order `M` and the even `k` attaining it.
pub fn dominant_indices(s1: u32, s2: u32) -> (i64, Vec<i64>) {
    let n = (s1 + s2) as i64;
    let mut best = 0i64;
    let mut ks = Vec::new();
    let mut k = -(s2 as i64);
    if k.rem_euclid(2) == 1 {
        k += 1;
    }
    while k <= s1 as i64 {
        let order = binomial_i64(n, s2 as i64 + k);
        if order > best {
            best = order;
            ks = vec![k];
        } else if order == best {
            ks.push(k);
        }
        k += 2;
    }
    (best, ks)
}

/// The dominant index set of the piecewise case analysis: a single
/// `k0 ~ (s1-s2)/2` rounded to the even side, or the two flanking even
/// indices when `s1 - s2 = 4m + 2`.
pub fn case_table_indices(s1: u32, s2: u32) -> Vec<i64> {
    let d = s1 as i64 - s2 as i64;
    match d.rem_euclid(4) {
        0 => vec![d / 2],
        1 => vec![(d - 1) / 2],
        3 => vec![(d + 1) / 2],
        _ => vec![d / 2 - 1, d / 2 + 1],
    }
}

/// The leading asymptotic term(s) of `E[Z_n^{s1}(x) Z_n^{s2}(conj x)]`:
/// exponent `M - 1` and dominant pairs `(k0, C(k0))`.
#[derive(Debug, Clone)]
pub struct AsymptoticPrediction {
    pub s1: u32,
    pub s2: u32,
    /// Renormalized onto the unit circle.
    pub x: Complex64,
    /// The maximal pole order; the moment grows like `n^{M-1}`.
    pub m: i64,
    pub terms: Vec<(i64, Complex64)>,
}

impl AsymptoticPrediction {
    /// `n^{M-1} sum_{terms} C(k0) x^{k0 n}`.
    pub fn predict(&self, n: u64) -> Complex64 {
        let phi = self.x.arg();
        let scale = (n as f64).powi(self.m as i32 - 1);
        let mut sum = Complex64::zero();
        for &(k0, c) in &self.terms {
            sum += c * Complex64::from_polar(1.0, phi * k0 as f64 * n as f64);
        }
        scale * sum
    }

    /// True when the oscillating sum nearly cancels at this `n`; a two-term
    /// prediction vanishes for at most one `n`, and ratios there are
    /// meaningless.
    pub fn near_zero(&self, n: u64) -> bool {
        let scale: f64 = self.terms.iter().map(|&(_, c)| c.norm()).sum();
        self.predict(n).norm() < 1e-6 * (n as f64).powi(self.m as i32 - 1) * scale.max(1.0)
    }
}

/// Computes the dominant indices by arg-max over the collapsed exponents and
/// each constant `C(k0)` by the residue product
/// `prod_{k != k0} (1 - x^{k - k0})^{S(k)} / (M-1)!`.
///
/// ```
/// use num_complex::Complex64;
/// use permchar::asymptotics::leading_terms;
///
/// let x = Complex64::from_polar(1.0, 1.0);
/// // E|Z_n(x)|^2 grows like n |1 - x|^2
/// let p = leading_terms(1, 1, x).unwrap();
/// let want = 1000.0 * (Complex64::new(1.0, 0.0) - x).norm_sqr();
/// assert!((p.predict(1000) - Complex64::new(want, 0.0)).norm() < 1e-9);
/// ```
pub fn leading_terms(s1: u32, s2: u32, x: Complex64) -> Result<AsymptoticPrediction> {
    if s1 + s2 == 0 {
        return Err(Error::EmptyQuery);
    }
    if (x.norm() - 1.0).abs() > UNIT_CIRCLE_EPS {
        return Err(Error::NotOnUnitCircle { modulus: x.norm() });
    }
    let x = Complex64::from_polar(1.0, x.arg());
    if !check_not_root_of_unity(x, s1 + s2, ROOT_OF_UNITY_EPS)? {
        return Err(Error::RootOfUnity { max_order: s1 + s2, eps: ROOT_OF_UNITY_EPS });
    }

    let (m, k0s) = dominant_indices(s1, s2);
    // the piecewise table is a paper-shaped assertion, not the source of truth
    assert_eq!(k0s, case_table_indices(s1, s2), "dominant index case table");

    if m - 1 > 170 {
        return Err(Error::FactorialOverflow { m: (m - 1) as u64 });
    }
    let mut factorial = 1.0f64;
    for i in 2..m {
        factorial *= i as f64;
    }

    let phi = x.arg();
    let mut terms = Vec::new();
    for &k0 in &k0s {
        let mut c = Complex64::one();
        for k in -(s2 as i64)..=(s1 as i64) {
            if k == k0 {
                continue;
            }
            let e = collapsed_exponent(s1, s2, k)?;
            if e == 0 {
                continue;
            }
            let base = Complex64::one() - Complex64::from_polar(1.0, phi * (k - k0) as f64);
            c *= base.powi(e as i32);
        }
        terms.push((k0, c / factorial));
    }
    Ok(AsymptoticPrediction { s1, s2, x, m, terms })
}

/// The closed-form absolute-moment growth
/// `E|Z_n(x)|^{2s} ~ n^{binom(2s,s)-1} prod_{k=1..s} |1-x^k|^{2 S(k)} / (binom(2s,s)-1)!`
/// with the signed exponents `S(k) = (-1)^{k+1} binom(2s, s+k)`.
pub fn predict_abs_moment(s: u32, x: Complex64, n: u64) -> Result<f64> {
    if s == 0 {
        return Ok(1.0);
    }
    if (x.norm() - 1.0).abs() > UNIT_CIRCLE_EPS {
        return Err(Error::NotOnUnitCircle { modulus: x.norm() });
    }
    let x = Complex64::from_polar(1.0, x.arg());
    if !check_not_root_of_unity(x, 2 * s, ROOT_OF_UNITY_EPS)? {
        return Err(Error::RootOfUnity { max_order: 2 * s, eps: ROOT_OF_UNITY_EPS });
    }
    let m = binomial_i64(2 * s as i64, s as i64);
    if m - 1 > 170 {
        return Err(Error::FactorialOverflow { m: (m - 1) as u64 });
    }
    let mut factorial = 1.0f64;
    for i in 2..m {
        factorial *= i as f64;
    }
    let mut prod = 1.0f64;
    for k in 1..=s {
        // pairing k with -k doubles the collapsed exponent S(k)
        let e = collapsed_exponent(s, s, k as i64)? as i32;
        prod *= (Complex64::one() - x.powu(k)).norm().powi(2 * e);
    }
    Ok((n as f64).powi(m as i32 - 1) * prod / factorial)
}

/// `(E[Re Z_n(x)], E[Im Z_n(x)]) = (1 - cos phi, -sin phi)` for
/// `x = e^{i phi}`; exact for every `n >= 1` since `E[Z_n] = 1 - x`.
pub fn real_imag_expectations(x: Complex64) -> (f64, f64) {
    let phi = x.arg();
    (1.0 - phi.cos(), -phi.sin())
}

/// Leading growth of `E[(Re Z_n)^s]` and `E[(Im Z_n)^s]`: both behave like
/// `n^{exponent}` times a trigonometric polynomial in `n phi` with even
/// frequencies.
#[derive(Debug, Clone)]
pub struct RealImagGrowth {
    pub s: u32,
    pub phi: f64,
    /// Power of `n` in the leading term: `binom(s, floor(s/2)) - 1`.
    pub exponent: i64,
    /// `re_cos[k]` multiplies `cos(2k n phi)` in the real-part moment, etc.
    pub re_cos: Vec<f64>,
    pub re_sin: Vec<f64>,
    pub im_cos: Vec<f64>,
    pub im_sin: Vec<f64>,
}

impl RealImagGrowth {
    pub fn predict_re(&self, n: u64) -> f64 {
        self.eval(&self.re_cos, &self.re_sin, n)
    }

    pub fn predict_im(&self, n: u64) -> f64 {
        self.eval(&self.im_cos, &self.im_sin, n)
    }

    fn eval(&self, cos: &[f64], sin: &[f64], n: u64) -> f64 {
        let scale = (n as f64).powi(self.exponent as i32);
        let mut sum = 0.0;
        for (k, (&a, &b)) in cos.iter().zip(sin).enumerate() {
            let theta = 2.0 * k as f64 * self.phi * n as f64;
            sum += a * theta.cos() + b * theta.sin();
        }
        scale * sum
    }
}

/// Expands `E[R_n^s] = 2^{-s} sum_k binom(s,k) E[Z_n^k(x) Z_n^{s-k}(conj x)]`
/// (and the `(2i)^{-s}` analogue for the imaginary part), keeps the pairs
/// attaining the overall maximal pole order, and folds their
/// `C(k0) x^{k0 n}` terms into real trigonometric coefficients.
pub fn real_imag_moment_growth(s: u32, x: Complex64) -> Result<RealImagGrowth> {
    assert!(s >= 1, "s >= 1 required");
    if (x.norm() - 1.0).abs() > UNIT_CIRCLE_EPS {
        return Err(Error::NotOnUnitCircle { modulus: x.norm() });
    }
    let x = Complex64::from_polar(1.0, x.arg());
    if !check_not_root_of_unity(x, s, ROOT_OF_UNITY_EPS)? {
        return Err(Error::RootOfUnity { max_order: s, eps: ROOT_OF_UNITY_EPS });
    }

    let overall_m = (0..=s).map(|k| dominant_indices(k, s - k).0).max().unwrap();

    // complex weight of e^{i k0 n phi} in each expansion
    let half_pow = 0.5f64.powi(s as i32); // 2^{-s}
    let two_i_pow = Complex64::new(0.0, 2.0).powu(s).inv(); // (2i)^{-s}
    let mut re_weights: Vec<(i64, Complex64)> = Vec::new();
    let mut im_weights: Vec<(i64, Complex64)> = Vec::new();
    for k in 0..=s {
        let (m_k, _) = dominant_indices(k, s - k);
        if m_k != overall_m {
            continue;
        }
        let pred = leading_terms(k, s - k, x)?;
        let binom = binomial_i64(s as i64, k as i64) as f64;
        let im_sign = if (s + k) % 2 == 0 { 1.0 } else { -1.0 };
        for &(k0, c) in &pred.terms {
            re_weights.push((k0, c * binom * half_pow));
            im_weights.push((k0, c * binom * im_sign * two_i_pow));
        }
    }

    let fold = |weights: &[(i64, Complex64)]| -> Result<(Vec<f64>, Vec<f64>)> {
        let max_k0 = weights.iter().map(|&(k0, _)| k0.unsigned_abs()).max().unwrap_or(0);
        debug_assert!(max_k0 % 2 == 0);
        let len = (max_k0 / 2 + 1) as usize;
        let mut cos = vec![Complex64::zero(); len];
        let mut sin = vec![Complex64::zero(); len];
        for &(k0, w) in weights {
            let idx = (k0.unsigned_abs() / 2) as usize;
            if k0 >= 0 {
                cos[idx] += w;
                sin[idx] += Complex64::i() * w;
            }
            if k0 <= 0 && k0 != 0 {
                cos[idx] += w;
                sin[idx] -= Complex64::i() * w;
            }
            if k0 == 0 {
                // e^{i0} contributes to the constant only; undo the sin part
                sin[idx] -= Complex64::i() * w;
            }
        }
        let mut cos_r = Vec::with_capacity(len);
        let mut sin_r = Vec::with_capacity(len);
        for v in cos.iter().chain(sin.iter()) {
            if v.im.abs() > 1e-10 {
                return Err(Error::NonRealCoefficient { residue: v.im.abs() });
            }
        }
        for v in &cos {
            cos_r.push(v.re);
        }
        for v in &sin {
            sin_r.push(v.re);
        }
        Ok((cos_r, sin_r))
    };

    let (re_cos, re_sin) = fold(&re_weights)?;
    let (im_cos, im_sin) = fold(&im_weights)?;
    Ok(RealImagGrowth {
        s,
        phi: x.arg(),
        exponent: overall_m - 1,
        re_cos,
        re_sin,
        im_cos,
        im_sin,
    })
}

/// Exact-vs-predicted comparison at one `n`: exact by rational-recurrence
/// extraction, predicted by [`leading_terms`].
#[derive(Debug, Clone)]
pub struct RatioCheck {
    pub exact: Complex64,
    pub predicted: Complex64,
    pub ratio_abs: f64,
    /// Set when the prediction nearly vanishes at this `n` (possible for
    /// two-term predictions at no more than one `n`); the ratio is then
    /// meaningless.
    pub near_zero: bool,
}

pub fn verify_ratio(s1: u32, s2: u32, x: Complex64, n: u64) -> Result<RatioCheck> {
    let pred = leading_terms(s1, s2, x)?;
    let q = MomentQuery::with_integer_exponents(n as usize, vec![pred.x, pred.x.conj()], &[s1, s2])?;
    let exact = gf_moment_integer(&q)?;
    let predicted = pred.predict(n);
    let near_zero = pred.near_zero(n);
    let ratio_abs = if near_zero { f64::NAN } else { exact.norm() / predicted.norm() };
    Ok(RatioCheck { exact, predicted, ratio_abs, near_zero })
}
