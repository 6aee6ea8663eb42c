//! Generating-function moment extraction and the closed-form limits on the
//! open unit polydisk.
//!
//! For nonnegative integer exponents the generating function of
//! `E[prod_k Z_n^{s_k}(x_k)]` in `t` is the finite product
//! `prod_{k in N^p} (1 - x^k t)^{-binom(s,k)(-1)^{|k|}}` over the multi-index
//! box `k <= s`; its `n`-th coefficient is extracted by the rational
//! recurrence. For general complex exponents the exp-log cycle-index route
//! is used instead. The `n -> infinity` limits drop `t` and evaluate the
//! same products at `t = 1`.

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::partitions::MomentQuery;
use crate::dd::Cdd;
use crate::series::{polynomial_mul, TruncatedSeries};
use crate::{Error, Result};

/// Hard cap on the multi-index lattice radius in [`limit_complex`].
pub const LATTICE_RADIUS_CAP: usize = 512;

/// Numerator and denominator polynomials of the integer-exponent generating
/// function; negative factor exponents land in the denominator.
#[derive(Debug, Clone)]
pub struct IntegerProductGf {
    pub numer: Vec<Complex64>,
    pub denom: Vec<Complex64>,
}

/// Odometer over the box `0 <= k_j <= s_j`.
fn multi_indices(ss: &[u32]) -> Vec<Vec<u32>> {
    let mut out = vec![vec![]];
    for &s in ss {
        let mut next = Vec::with_capacity(out.len() * (s as usize + 1));
        for prefix in &out {
            for k in 0..=s {
                let mut v = prefix.clone();
                v.push(k);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

fn binomial_u64(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut b = 1u64;
    for i in 0..k {
        b = b * (n - i) / (i + 1);
    }
    b
}

/// Signed factor exponent `-binom(s,k)(-1)^{|k|}` of the multi-index `k`.
fn factor_exponent(ss: &[u32], ks: &[u32]) -> i64 {
    let mut prod = 1i64;
    for (&s, &k) in ss.iter().zip(ks) {
        prod *= binomial_u64(s as u64, k as u64) as i64;
    }
    let sign = if ks.iter().map(|&k| k as u64).sum::<u64>() % 2 == 0 { -1 } else { 1 };
    sign * prod
}

fn lattice_point(xs: &[Complex64], ks: &[u32]) -> Complex64 {
    xs.iter().zip(ks).map(|(x, &k)| x.powu(k)).product()
}

/// Builds the numerator/denominator polynomials of the integer-exponent
/// generating function for a given `(xs, ss)`.
pub fn integer_product_gf(xs: &[Complex64], ss: &[u32]) -> IntegerProductGf {
    let mut numer = vec![Complex64::one()];
    let mut denom = vec![Complex64::one()];
    for ks in multi_indices(ss) {
        let e = factor_exponent(ss, &ks);
        if e == 0 {
            continue;
        }
        let factor = [Complex64::one(), -lattice_point(xs, &ks)];
        let target = if e > 0 { &mut numer } else { &mut denom };
        for _ in 0..e.unsigned_abs() {
            *target = polynomial_mul(target, &factor);
        }
    }
    IntegerProductGf { numer, denom }
}

fn lattice_point_dd(xs: &[Complex64], ks: &[u32]) -> Cdd {
    let mut p = Cdd::ONE;
    for (x, &k) in xs.iter().zip(ks) {
        let b = Cdd::from_complex(*x);
        for _ in 0..k {
            p = p.mul(b);
        }
    }
    p
}

/// In-place multiplication by the linear factor `(1 - a t)`.
fn mul_linear_dd(poly: &mut Vec<Cdd>, a: Cdd) {
    poly.push(Cdd::ZERO);
    for i in (1..poly.len()).rev() {
        let shifted = a.mul(poly[i - 1]);
        poly[i] = poly[i].sub(shifted);
    }
}

/// `E[prod_k Z_n^{s_k}(x_k)]` as the `n`-th coefficient of the integer
/// product generating function. Exponents must be nonnegative integers; any
/// `x` works since coefficient extraction is a polynomial identity, though
/// the theorems behind it speak about `max|x_k| <= 1`.
///
/// Runs in compensated (double-double) arithmetic throughout: with `x` on
/// the unit circle the denominator acquires unit-modulus roots of
/// multiplicity M, and the recurrence then amplifies rounding error
/// polynomially in `n` — badly enough to wipe out f64 at `n ~ 5000`, M = 6.
pub fn gf_moment_integer(q: &MomentQuery) -> Result<Complex64> {
    let ss = q.integer_exponents().ok_or(Error::NonIntegerExponent)?;
    let mut numer = vec![Cdd::ONE];
    let mut denom = vec![Cdd::ONE];
    for ks in multi_indices(&ss) {
        let e = factor_exponent(&ss, &ks);
        if e == 0 {
            continue;
        }
        let a = lattice_point_dd(&q.xs, &ks);
        let target = if e > 0 { &mut numer } else { &mut denom };
        for _ in 0..e.unsigned_abs() {
            mul_linear_dd(target, a);
        }
    }
    // c_n = numer_n - sum_{j>=1} d_j c_{n-j}; d_0 = 1 by construction, so no
    // division ever happens. Ring buffer over the last deg(D) coefficients.
    let deg = denom.len() - 1; // >= 1: the k = 0 factor is 1/(1-t)
    let mut ring = vec![Cdd::ZERO; deg];
    let mut c = Cdd::ZERO;
    for i in 0..=q.n {
        let mut acc = if i < numer.len() { numer[i] } else { Cdd::ZERO };
        for j in 1..=deg.min(i) {
            let term = denom[j].mul(ring[(i - j) % deg]);
            acc = acc.sub(term);
        }
        c = acc;
        ring[i % deg] = acc;
    }
    Ok(c.to_complex())
}

/// `E[prod_k Z_n^{s_k}(x_k)]` for arbitrary complex exponents, through the
/// cycle index: `[exp(sum_{m>=1} a_m t^m / m)]_n` with
/// `a_m = prod_j (1 - x_j^m)^{s_j}`. Needs `max|x_k| < 1`.
///
/// ```
/// use num_complex::Complex64;
/// use permchar::moments::gf_moment_complex;
/// use permchar::partitions::{exact_moment_partition_sum, MomentQuery};
///
/// let q = MomentQuery::new(
///     12,
///     vec![Complex64::new(0.2, 0.3)],
///     vec![Complex64::new(0.5, 0.5)],
/// ).unwrap();
/// let a = gf_moment_complex(&q).unwrap();
/// let b = exact_moment_partition_sum(&q).unwrap();
/// assert!((a - b).norm() < 1e-10);
/// ```
pub fn gf_moment_complex(q: &MomentQuery) -> Result<Complex64> {
    let norm = q.norm_x();
    if norm >= 1.0 {
        return Err(Error::NormTooLarge { norm, requirement: "< 1" });
    }
    if q.n == 0 {
        return Ok(Complex64::one());
    }
    let mut inner = vec![Complex64::zero(); q.n + 1];
    let mut pows: Vec<Complex64> = vec![Complex64::one(); q.arity()];
    for m in 1..=q.n {
        let mut a_m = Complex64::one();
        for (j, (x, s)) in q.xs.iter().zip(&q.ss).enumerate() {
            pows[j] *= x;
            a_m *= (Complex64::one() - pows[j]).powc(*s);
        }
        inner[m] = a_m / m as f64;
    }
    Ok(TruncatedSeries::new(inner).exp()?.coeff(q.n))
}

/// `lim_n E[prod_k Z_n^{s_k}(x_k)]` for nonnegative integer exponents and
/// `max|x_k| < 1`: the finite product over nonzero multi-indices `k <= s`.
///
/// ```
/// use num_complex::Complex64;
/// use permchar::moments::{gf_moment_integer, limit_integer};
/// use permchar::partitions::MomentQuery;
///
/// let x = Complex64::new(0.4, 0.0);
/// let lim = limit_integer(&[x], &[2]).unwrap();
/// let q = MomentQuery::with_integer_exponents(80, vec![x], &[2]).unwrap();
/// assert!((gf_moment_integer(&q).unwrap() - lim).norm() < 1e-8);
/// ```
pub fn limit_integer(xs: &[Complex64], ss: &[u32]) -> Result<Complex64> {
    check_arity(xs.len(), ss.len())?;
    let norm = norm_of(xs);
    if norm >= 1.0 {
        return Err(Error::NormTooLarge { norm, requirement: "< 1" });
    }
    let mut value = Complex64::one();
    for ks in multi_indices(ss) {
        if ks.iter().all(|&k| k == 0) {
            continue;
        }
        let e = factor_exponent(ss, &ks);
        if e == 0 {
            continue;
        }
        let base = Complex64::one() - lattice_point(xs, &ks);
        value *= base.powi(e as i32);
    }
    Ok(value)
}

/// `lim_n E[prod_k Z_n^{s_k}(x_k)]` for arbitrary complex exponents:
/// `prod_{k != 0} (1 - x^k)^{-binom(s,k)(-1)^{|k|}}`, truncating the
/// multi-index lattice once a whole shell `|k| = K` contributes less than
/// `tol/2` in log magnitude and the geometric tail bound is below `tol/2`.
pub fn limit_complex(xs: &[Complex64], ss: &[Complex64], tol: f64) -> Result<Complex64> {
    check_arity(xs.len(), ss.len())?;
    let norm = norm_of(xs);
    if norm >= 1.0 {
        return Err(Error::NormTooLarge { norm, requirement: "< 1" });
    }
    assert!(tol > 0.0, "tolerance must be positive");

    let p = xs.len();
    // per-dimension tables, extended shell by shell:
    // binom_tab[j][k] = binom(s_j, k), pow_tab[j][k] = x_j^k
    let mut binom_tab: Vec<Vec<Complex64>> = vec![vec![Complex64::one()]; p];
    let mut pow_tab: Vec<Vec<Complex64>> = vec![vec![Complex64::one()]; p];
    // |binom(s,k+1)/binom(s,k)| <= (k + |s|)/(k + 1); past the shell where
    // q = norm * (K + smax)/(K + 1) < 1 the terms decay geometrically
    let smax = ss.iter().map(|s| s.norm()).fold(0.0, f64::max) + 1.0;

    let mut log_sum = Complex64::zero();
    for radius in 1..=LATTICE_RADIUS_CAP {
        for j in 0..p {
            let k = radius as u32;
            let prev_b = binom_tab[j][radius - 1];
            binom_tab[j].push(prev_b * (ss[j] - Complex64::new((k - 1) as f64, 0.0)) / k as f64);
            let prev_p = pow_tab[j][radius - 1];
            pow_tab[j].push(prev_p * xs[j]);
        }
        let mut shell_mag = 0.0;
        for ks in compositions(radius, p) {
            let mut coeff = Complex64::one();
            let mut point = Complex64::one();
            for (j, &k) in ks.iter().enumerate() {
                coeff *= binom_tab[j][k];
                point *= pow_tab[j][k];
            }
            if coeff.is_zero() {
                continue;
            }
            let sign = if radius % 2 == 0 { -1.0 } else { 1.0 };
            let term = sign * coeff * (Complex64::one() - point).ln();
            log_sum += term;
            shell_mag += term.norm();
        }
        let q = norm * (radius as f64 + smax) / (radius as f64 + 1.0);
        if q < 1.0 {
            // shell cardinality grows by at most ((K+p)/K)^{p-1} <= 2^{p-1}
            let tail = shell_mag * 2f64.powi(p as i32 - 1) * q / (1.0 - q);
            if shell_mag < tol / 2.0 && tail < tol / 2.0 {
                return Ok(log_sum.exp());
            }
        }
    }
    Err(Error::TruncationFailed { cap: LATTICE_RADIUS_CAP })
}

/// All `k in N^p` with `sum k_j = total`.
fn compositions(total: usize, p: usize) -> Vec<Vec<usize>> {
    fn rec(total: usize, p: usize, prefix: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if p == 1 {
            prefix.push(total);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for k in 0..=total {
            prefix.push(k);
            rec(total - k, p - 1, prefix, out);
            prefix.pop();
        }
    }
    let mut out = Vec::new();
    rec(total, p, &mut Vec::new(), &mut out);
    out
}

/// `lim_n E[prod Z_n^{s1_k}(x1_k) / prod Z_n^{s2_k}(x2_k)]`, evaluated by
/// stacking the two queries into one `2p`-variable limit with the second
/// exponent vector negated.
pub fn ratio_limit(
    x1s: &[Complex64],
    x2s: &[Complex64],
    s1s: &[Complex64],
    s2s: &[Complex64],
    tol: f64,
) -> Result<Complex64> {
    check_arity(x1s.len(), s1s.len())?;
    check_arity(x2s.len(), s2s.len())?;
    let xs: Vec<Complex64> = x1s.iter().chain(x2s).copied().collect();
    let ss: Vec<Complex64> = s1s.iter().copied().chain(s2s.iter().map(|s| -s)).collect();
    limit_complex(&xs, &ss, tol)
}

/// `lim_n E[|Z_n(x)|^{s1} e^{i s2 arg Z_n(x)}]`, reduced to the two-variable
/// limit at `(x, conj x)` with exponents `((s1+s2)/2, (s1-s2)/2)` through
/// `|z|^{s1} e^{i s2 arg z} = z^{(s1+s2)/2} conj(z)^{(s1-s2)/2}` and
/// `conj(Z_n(x)) = Z_n(conj x)`.
pub fn mellin_fourier_limit(x: Complex64, s1: f64, s2: f64, tol: f64) -> Result<Complex64> {
    let xs = [x, x.conj()];
    let ss = [
        Complex64::new((s1 + s2) / 2.0, 0.0),
        Complex64::new((s1 - s2) / 2.0, 0.0),
    ];
    limit_complex(&xs, &ss, tol)
}

fn check_arity(xs: usize, ss: usize) -> Result<()> {
    if xs == 0 {
        return Err(Error::EmptyQuery);
    }
    if xs != ss {
        return Err(Error::ArityMismatch { xs, ss });
    }
    Ok(())
}

fn norm_of(xs: &[Complex64]) -> f64 {
    xs.iter().map(|x| x.norm()).fold(0.0, f64::max)
}
