//! The Feller coupling: one Bernoulli sequence `xi` with `P(xi_t = 1) = 1/t`
//! drives both the exact cycle counts `C_m^{(n)}` of a uniform permutation
//! (m-spacings of `1 xi_2 .. xi_n 1`) and approximating independent
//! Poisson(1/m) variables `Y_m` (m-spacings of the whole sequence).
//! Everything here is seeded and reproducible.

use num_complex::Complex64;
use num_traits::{One, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;

use crate::partitions::MomentQuery;
use crate::{Error, Result};

/// The crate-wide RNG: seedable, with independent streams for parallel
/// chains.
pub fn rng_from_seed(seed: u64) -> ChaCha12Rng {
    ChaCha12Rng::seed_from_u64(seed)
}

pub fn rng_stream(seed: u64, stream: u64) -> ChaCha12Rng {
    let mut rng = ChaCha12Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// One draw of the coupling: `c[m-1] = C_m^{(n)}` and `y[m-1] = Y_m` for
/// `m = 1..=m_max`, from the same `xi` sequence.
#[derive(Debug, Clone)]
pub struct CoupledCounts {
    pub n: usize,
    pub m_max: usize,
    pub c: Vec<u32>,
    /// Counted on `xi_1..xi_horizon` only; the true `Y_m` counts the
    /// infinite sequence, so these are truncated.
    pub y: Vec<u32>,
    /// The unique `m >= 1` with `xi_{n-m}..xi_{n+1} = 10..0`, if any;
    /// the only index where `C_m = Y_m + 1` can occur.
    pub boundary: Option<usize>,
    pub horizon: usize,
    pub y_truncated: bool,
}

impl CoupledCounts {
    pub fn c_of(&self, m: usize) -> u32 {
        self.c[m - 1]
    }

    pub fn y_of(&self, m: usize) -> u32 {
        self.y[m - 1]
    }
}

/// Draws one `xi` sequence of length `horizon` and reads off both count
/// families for `m <= m_max`. Requires `m_max <= n` and `horizon > n`
/// (the boundary event looks at `xi_{n+1}`).
/// ```
/// use permchar::feller::{rng_from_seed, simulate_coupling};
///
/// let mut rng = rng_from_seed(1);
/// let draw = simulate_coupling(30, 30, 240, &mut rng).unwrap();
/// // the cycle counts of a uniform permutation of size 30
/// let total: usize = (1..=30).map(|m| m * draw.c_of(m) as usize).sum();
/// assert_eq!(total, 30);
/// ```
pub fn simulate_coupling<R: Rng>(
    n: usize,
    m_max: usize,
    horizon: usize,
    rng: &mut R,
) -> Result<CoupledCounts> {
    if m_max > n {
        return Err(Error::TrackedLengthTooLarge { m: m_max, n });
    }
    if horizon <= n {
        return Err(Error::HorizonTooShort { horizon, n });
    }

    // xi[t-1] = xi_t; xi_1 = 1 with probability 1
    let xi: Vec<bool> = (1..=horizon)
        .map(|t| rng.gen::<f64>() * (t as f64) < 1.0)
        .collect();

    // C_m: spacings of 1 xi_2 .. xi_n 1, i.e. gaps between ones in
    // positions 1..=n with a sentinel one at n+1
    let mut c = vec![0u32; m_max];
    let mut prev = 1usize;
    for t in 2..=n {
        if xi[t - 1] {
            let gap = t - prev;
            if gap <= m_max {
                c[gap - 1] += 1;
            }
            prev = t;
        }
    }
    let last_gap = (n + 1) - prev;
    if last_gap <= m_max {
        c[last_gap - 1] += 1;
    }

    // Y_m: spacings of the raw sequence up to the horizon
    let mut y = vec![0u32; m_max];
    let mut prev = 1usize;
    for t in 2..=horizon {
        if xi[t - 1] {
            let gap = t - prev;
            if gap <= m_max {
                y[gap - 1] += 1;
            }
            prev = t;
        }
    }

    // boundary event: m = n + 1 - (last one at position <= n+1)
    let last_one = (1..=n + 1).rev().find(|&t| xi[t - 1]).unwrap_or(1);
    let boundary = match n + 1 - last_one {
        0 => None,
        m => Some(m),
    };

    Ok(CoupledCounts { n, m_max, c, y, boundary, horizon, y_truncated: true })
}

/// Cycle counts `C_1..C_n` of a uniform random permutation of `n`, via the
/// spacing construction (which is exact in distribution).
pub fn sample_cycle_counts<R: Rng>(n: usize, rng: &mut R) -> Vec<u32> {
    let mut c = vec![0u32; n];
    if n == 0 {
        return c;
    }
    let mut prev = 1usize;
    for t in 2..=n {
        if rng.gen::<f64>() * (t as f64) < 1.0 {
            c[t - prev - 1] += 1;
            prev = t;
        }
    }
    c[n - prev] += 1;
    c
}

/// A seeded Monte Carlo estimate; `stderr` is the larger of the per-component
/// standard errors.
#[derive(Debug, Clone, Copy)]
pub struct MonteCarloEstimate {
    pub mean: Complex64,
    pub stderr: f64,
    pub samples: u64,
    pub seed: u64,
}

/// Monte Carlo estimate of `E[prod_k Z_n^{s_k}(x_k)]` over independent
/// uniform cycle-type draws.
/// ```
/// use num_complex::Complex64;
/// use permchar::feller::mc_moment;
/// use permchar::partitions::MomentQuery;
///
/// let q = MomentQuery::with_integer_exponents(25, vec![Complex64::new(0.5, 0.0)], &[1]).unwrap();
/// let est = mc_moment(&q, 4000, 42).unwrap();
/// // E[Z_25(0.5)] = 0.5 exactly
/// assert!((est.mean - Complex64::new(0.5, 0.0)).norm() < 5.0 * est.stderr);
/// ```
pub fn mc_moment(q: &MomentQuery, samples: u64, seed: u64) -> Result<MonteCarloEstimate> {
    if samples == 0 {
        return Err(Error::NoSamples);
    }
    let ints = q.integer_exponents();
    let norm = q.norm_x();
    match &ints {
        Some(_) => {
            if norm > 1.0 + 1e-12 {
                return Err(Error::NormTooLarge { norm, requirement: "<= 1" });
            }
        }
        None => {
            if norm >= 1.0 {
                return Err(Error::NormTooLarge { norm, requirement: "< 1" });
            }
        }
    }

    // base_pow[k][m-1] = 1 - x_k^m
    let base_pow: Vec<Vec<Complex64>> = q
        .xs
        .iter()
        .map(|&x| {
            let mut pw = Complex64::one();
            (1..=q.n)
                .map(|_| {
                    pw *= x;
                    Complex64::one() - pw
                })
                .collect()
        })
        .collect();

    let mut rng = rng_from_seed(seed);
    let mut sum = Complex64::zero();
    let mut sum_sq = Complex64::zero(); // componentwise squares
    for _ in 0..samples {
        let counts = sample_cycle_counts(q.n, &mut rng);
        let mut z = Complex64::one();
        for (m, &cm) in counts.iter().enumerate() {
            if cm == 0 {
                continue;
            }
            for (k, s) in q.ss.iter().enumerate() {
                let base = base_pow[k][m];
                z *= match &ints {
                    Some(si) => base.powu(si[k] * cm),
                    None => base.powc(s * cm as f64),
                };
            }
        }
        sum += z;
        sum_sq += Complex64::new(z.re * z.re, z.im * z.im);
    }
    let nf = samples as f64;
    let mean = sum / nf;
    let var_re = ((sum_sq.re / nf) - mean.re * mean.re).max(0.0);
    let var_im = ((sum_sq.im / nf) - mean.im * mean.im).max(0.0);
    let stderr = (var_re.max(var_im) / nf).sqrt();
    Ok(MonteCarloEstimate { mean, stderr, samples, seed })
}

/// Inverse-transform Poisson sampler; fine for the small means `1/m` used
/// here.
pub fn poisson<R: Rng>(mean: f64, rng: &mut R) -> u32 {
    let mut u: f64 = rng.gen();
    let mut p = (-mean).exp();
    let mut k = 0u32;
    while u > p {
        u -= p;
        k += 1;
        p *= mean / k as f64;
        if k > 10_000 {
            break; // unreachable for the means used here
        }
    }
    k
}

/// Truncation index for [`sample_z_infty`]: smallest `M` with
/// `|s| c_branch sum_{m>M} |x|^m / m < tol`, bounding the tail by
/// `|x|^{M+1} / ((M+1)(1-|x|))` and `|Log(1-w)| <= c_branch |w|` with
/// `c_branch = 4/(1-|x|)`.
pub fn z_infty_truncation(x: Complex64, s: Complex64, tol: f64) -> usize {
    let r = x.norm();
    if r == 0.0 {
        return 1;
    }
    let c_branch = 4.0 / (1.0 - r);
    let scale = s.norm().max(1.0) * c_branch / (1.0 - r);
    let mut m = 1usize;
    while scale * r.powi(m as i32 + 1) / (m as f64 + 1.0) >= tol {
        m += 1;
    }
    m
}

/// One draw of the truncated infinite product
/// `Z_infty^s(x) = prod_m (1 - x^m)^{s Y_m}` with independent
/// `Y_m ~ Poisson(1/m)`.
pub fn sample_z_infty<R: Rng>(x: Complex64, s: Complex64, tol: f64, rng: &mut R) -> Result<Complex64> {
    if x.norm() >= 1.0 {
        return Err(Error::NormTooLarge { norm: x.norm(), requirement: "< 1" });
    }
    let m_max = z_infty_truncation(x, s, tol);
    let mut z = Complex64::one();
    let mut pw = Complex64::one();
    for m in 1..=m_max {
        pw *= x;
        let y = poisson(1.0 / m as f64, rng);
        if y > 0 {
            z *= (Complex64::one() - pw).powc(s * y as f64);
        }
    }
    Ok(z)
}

/// Empirical summary of the coupling quality across a grid of `n`.
#[derive(Debug, Clone)]
pub struct CouplingReport {
    pub b: usize,
    pub samples: u64,
    pub seed: u64,
    /// `(n, empirical P((C_1..C_b) != (Y_1..Y_b)))`, one entry per requested n.
    pub mismatch: Vec<(usize, f64)>,
    /// Per-m sample mean and variance of `Y_m`, `m = 1..=b`, from the
    /// largest-n run (both should be near `1/m`).
    pub y_mean: Vec<f64>,
    pub y_var: Vec<f64>,
    /// Draws violating a structural invariant (must be 0):
    /// `sum m C_m = n`, at most one `C_m > Y_m`, and any excess is +1 at the
    /// boundary index.
    pub violations: u64,
}

/// Runs `samples` coupling draws for each `n` in `ns` and reports mismatch
/// probabilities, Poisson goodness of the `Y_m`, and structural-invariant
/// violations.
pub fn coupling_distribution_check(
    ns: &[usize],
    b: usize,
    samples: u64,
    seed: u64,
) -> Result<CouplingReport> {
    let mut mismatch = Vec::new();
    let mut y_mean = vec![0.0; b];
    let mut y_var = vec![0.0; b];
    let mut violations = 0u64;
    for (idx, &n) in ns.iter().enumerate() {
        if b > n {
            return Err(Error::TrackedLengthTooLarge { m: b, n });
        }
        let mut rng = rng_stream(seed, idx as u64);
        let horizon = 8 * n;
        let mut mismatches = 0u64;
        let mut y_sum = vec![0.0; b];
        let mut y_sum_sq = vec![0.0; b];
        for _ in 0..samples {
            let draw = simulate_coupling(n, n, horizon, &mut rng)?;
            if (0..b).any(|i| draw.c[i] != draw.y[i]) {
                mismatches += 1;
            }
            for i in 0..b {
                y_sum[i] += draw.y[i] as f64;
                y_sum_sq[i] += (draw.y[i] as f64).powi(2);
            }
            if !structurally_valid(&draw) {
                violations += 1;
            }
        }
        mismatch.push((n, mismatches as f64 / samples as f64));
        if idx == ns.len() - 1 {
            for i in 0..b {
                y_mean[i] = y_sum[i] / samples as f64;
                y_var[i] = y_sum_sq[i] / samples as f64 - y_mean[i] * y_mean[i];
            }
        }
    }
    Ok(CouplingReport { b, samples, seed, mismatch, y_mean, y_var, violations })
}

/// Per-draw invariants of the coupling (with `m_max = n`).
pub fn structurally_valid(draw: &CoupledCounts) -> bool {
    let weighted: usize = draw.c.iter().enumerate().map(|(i, &c)| (i + 1) * c as usize).sum();
    if draw.m_max >= draw.n && weighted != draw.n {
        return false;
    }
    let mut excess = 0;
    for m in 1..=draw.m_max {
        if draw.c_of(m) > draw.y_of(m) {
            excess += 1;
            if draw.c_of(m) != draw.y_of(m) + 1 || draw.boundary != Some(m) {
                return false;
            }
        }
    }
    excess <= 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{gf_moment_integer, limit_complex};
    use crate::partitions::{exact_moment_partition_sum, partitions_of};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn n_equals_one_always_a_fixed_point() {
        let mut rng = rng_from_seed(7);
        for _ in 0..50 {
            let draw = simulate_coupling(1, 1, 16, &mut rng).unwrap();
            assert_eq!(draw.c, vec![1]);
        }
    }

    #[test]
    fn coupling_rejects_bad_parameters() {
        let mut rng = rng_from_seed(0);
        assert!(matches!(
            simulate_coupling(5, 6, 100, &mut rng),
            Err(Error::TrackedLengthTooLarge { .. })
        ));
        assert!(matches!(
            simulate_coupling(5, 5, 5, &mut rng),
            Err(Error::HorizonTooShort { .. })
        ));
    }

    #[test]
    fn structural_invariants_hold_every_draw() {
        let mut rng = rng_from_seed(42);
        for n in [2usize, 5, 20, 57] {
            for _ in 0..500 {
                let draw = simulate_coupling(n, n, 8 * n, &mut rng).unwrap();
                assert!(structurally_valid(&draw), "n={n}: {draw:?}");
            }
        }
    }

    #[test]
    fn boundary_probability_matches_formula() {
        // P(B_m^{(n)}) = 1/(n+1)
        let (n, m) = (12usize, 4usize);
        let samples = 40_000u64;
        let mut rng = rng_from_seed(3);
        let mut hits = 0u64;
        for _ in 0..samples {
            let draw = simulate_coupling(n, n, 8 * n, &mut rng).unwrap();
            if draw.boundary == Some(m) {
                hits += 1;
            }
        }
        let p_hat = hits as f64 / samples as f64;
        let p = 1.0 / (n as f64 + 1.0);
        let sigma = (p * (1.0 - p) / samples as f64).sqrt();
        assert!((p_hat - p).abs() < 4.0 * sigma, "{p_hat} vs {p}");
    }

    #[test]
    fn cycle_counts_n2_distribution() {
        // C = (2,0) or (0,1), each with probability 1/2
        let mut rng = rng_from_seed(11);
        let samples = 20_000;
        let mut two_fixed = 0u64;
        for _ in 0..samples {
            let counts = sample_cycle_counts(2, &mut rng);
            assert_eq!(counts[0] as usize + 2 * counts[1] as usize, 2);
            if counts == vec![2, 0] {
                two_fixed += 1;
            }
        }
        let p_hat = two_fixed as f64 / samples as f64;
        let sigma = (0.25f64 / samples as f64).sqrt();
        assert!((p_hat - 0.5).abs() < 4.0 * sigma, "{p_hat}");
    }

    #[test]
    fn expected_fixed_points_is_one() {
        // E[C_1] = 1, cross-checked exactly from class sizes
        let exact: f64 = partitions_of(8)
            .map(|la| {
                let c1 = la.parts().iter().filter(|&&p| p == 1).count() as f64;
                la.class_probability() * c1
            })
            .sum();
        assert!((exact - 1.0).abs() < 1e-12);

        let mut rng = rng_from_seed(5);
        let samples = 50_000;
        let mut total = 0u64;
        for _ in 0..samples {
            total += sample_cycle_counts(20, &mut rng)[0] as u64;
        }
        let mean = total as f64 / samples as f64;
        // Var C_1 = 1, so sigma = 1/sqrt(samples)
        assert!((mean - 1.0).abs() < 4.0 / (samples as f64).sqrt(), "{mean}");
    }

    #[test]
    fn cycle_counts_always_sum_to_n() {
        let mut rng = rng_from_seed(9);
        for n in [1usize, 2, 3, 17, 40] {
            for _ in 0..200 {
                let counts = sample_cycle_counts(n, &mut rng);
                let total: usize = counts.iter().enumerate().map(|(i, &c)| (i + 1) * c as usize).sum();
                assert_eq!(total, n);
            }
        }
    }

    #[test]
    fn mc_moment_zero_exponent_exact() {
        let q = MomentQuery::with_integer_exponents(10, vec![c(0.5, 0.2)], &[0]).unwrap();
        let est = mc_moment(&q, 200, 1).unwrap();
        assert_eq!(est.mean, Complex64::one());
        assert_eq!(est.stderr, 0.0);
    }

    #[test]
    fn mc_moment_first_and_second_moments() {
        let q = MomentQuery::with_integer_exponents(30, vec![c(0.5, 0.0)], &[1]).unwrap();
        let est = mc_moment(&q, 20_000, 12).unwrap();
        assert!((est.mean - c(0.5, 0.0)).norm() < 4.0 * est.stderr, "{est:?}");

        let q = MomentQuery::with_integer_exponents(25, vec![c(0.4, 0.0)], &[2]).unwrap();
        let est = mc_moment(&q, 20_000, 13).unwrap();
        let exact = gf_moment_integer(&q).unwrap();
        assert!((est.mean - exact).norm() < 4.0 * est.stderr, "{est:?} vs {exact}");
    }

    #[test]
    fn mc_moment_reproducible() {
        let q = MomentQuery::with_integer_exponents(12, vec![c(0.3, 0.3)], &[2]).unwrap();
        let a = mc_moment(&q, 1000, 77).unwrap();
        let b = mc_moment(&q, 1000, 77).unwrap();
        assert_eq!(a.mean, b.mean);
    }

    #[test]
    fn z_infty_at_zero_is_one() {
        let mut rng = rng_from_seed(2);
        let z = sample_z_infty(Complex64::zero(), Complex64::one(), 1e-10, &mut rng).unwrap();
        assert_eq!(z, Complex64::one());
    }

    #[test]
    fn z_infty_mean_matches_limit() {
        let x = c(0.4, 0.0);
        let s = Complex64::one();
        let mut rng = rng_from_seed(21);
        let samples = 20_000;
        let mut sum = Complex64::zero();
        let mut sum_sq = 0.0;
        for _ in 0..samples {
            let z = sample_z_infty(x, s, 1e-10, &mut rng).unwrap();
            sum += z;
            sum_sq += z.norm_sqr();
        }
        let mean = sum / samples as f64;
        let var = (sum_sq / samples as f64 - mean.norm_sqr()).max(0.0);
        let stderr = (var / samples as f64).sqrt();
        let limit = limit_complex(&[x], &[s], 1e-12).unwrap();
        assert!((mean - limit).norm() < 4.0 * stderr, "{mean} vs {limit}");
    }

    #[test]
    fn poisson_sampler_moments() {
        let mut rng = rng_from_seed(8);
        let mean = 0.5;
        let samples = 100_000;
        let mut total = 0u64;
        let mut total_sq = 0u64;
        for _ in 0..samples {
            let k = poisson(mean, &mut rng) as u64;
            total += k;
            total_sq += k * k;
        }
        let m = total as f64 / samples as f64;
        let v = total_sq as f64 / samples as f64 - m * m;
        let sigma = (mean / samples as f64).sqrt();
        assert!((m - mean).abs() < 4.0 * sigma, "{m}");
        assert!((v - mean).abs() < 0.02, "{v}");
    }

    #[test]
    fn mismatch_probability_decreases_in_n() {
        let report = coupling_distribution_check(&[20, 200], 5, 20_000, 4).unwrap();
        assert_eq!(report.violations, 0);
        let p20 = report.mismatch[0].1;
        let p200 = report.mismatch[1].1;
        let sigma = (p20 * (1.0 - p20) / 20_000f64).sqrt();
        assert!(p200 < p20 + 3.0 * sigma, "{p20} -> {p200}");
        for (i, (&m, &v)) in report.y_mean.iter().zip(&report.y_var).enumerate() {
            let want = 1.0 / (i as f64 + 1.0);
            let s = (want / 20_000f64).sqrt();
            assert!((m - want).abs() < 4.0 * s, "mean Y_{} = {m}", i + 1);
            assert!((v - want).abs() < 0.05, "var Y_{} = {v}", i + 1);
        }
    }

    #[test]
    fn coupling_mean_absolute_difference_bound() {
        // E|C_m - Y_m| <= 2/(n+1)
        let (n, m) = (50usize, 7usize);
        let samples = 20_000u64;
        let mut rng = rng_from_seed(6);
        let mut total = 0.0;
        let mut total_sq = 0.0;
        for _ in 0..samples {
            let draw = simulate_coupling(n, n, 8 * n, &mut rng).unwrap();
            let d = (draw.c_of(m) as f64 - draw.y_of(m) as f64).abs();
            total += d;
            total_sq += d * d;
        }
        let mean = total / samples as f64;
        let var = (total_sq / samples as f64 - mean * mean).max(0.0);
        let stderr = (var / samples as f64).sqrt();
        assert!(mean <= 2.0 / (n as f64 + 1.0) + 3.0 * stderr, "{mean}");
    }

    #[test]
    fn horizon_doubling_is_insensitive() {
        let (n, m) = (30usize, 5usize);
        let samples = 20_000u64;
        let run = |horizon: usize, seed: u64| {
            let mut rng = rng_from_seed(seed);
            let mut total = 0.0;
            for _ in 0..samples {
                let draw = simulate_coupling(n, n, horizon, &mut rng).unwrap();
                total += (draw.c_of(m) as f64 - draw.y_of(m) as f64).abs();
            }
            total / samples as f64
        };
        let a = run(8 * n, 31);
        let b = run(16 * n, 31);
        // 2 sigma of the |C-Y| mean, whose per-draw variance is < 0.2 here
        let slack = 2.0 * (0.2f64 / samples as f64).sqrt();
        assert!((a - b).abs() < slack.max(0.01), "{a} vs {b}");
    }

    #[test]
    fn mc_unbiased_against_partition_sum() {
        let q = MomentQuery::with_integer_exponents(18, vec![c(0.3, 0.4)], &[2]).unwrap();
        let est = mc_moment(&q, 30_000, 14).unwrap();
        let exact = exact_moment_partition_sum(&q).unwrap();
        assert!((est.mean - exact).norm() / est.stderr < 4.0, "{est:?} vs {exact}");
    }
}
