//! Integer partitions, conjugacy-class data of `S_n`, and the two slowest
//! but most direct moment computations: the partition sum and the
//! determinant brute force.

use num_bigint::BigUint;
use num_complex::Complex64;
use num_traits::{One, ToPrimitive, Zero};

use crate::{Error, Result};

/// Cap for [`exact_moment_partition_sum`]; p(60) = 966467 partitions keeps
/// the sum well below a second, and z-weights stay exactly representable.
pub const PARTITION_SUM_MAX_N: usize = 60;

/// Cap for [`brute_force_moment`]; 8! = 40320 permutations.
pub const BRUTE_FORCE_MAX_N: usize = 8;

/// A partition of a nonnegative integer: positive parts, weakly decreasing.
///
/// Partitions of `n` index the conjugacy classes of `S_n` through the cycle
/// type of a permutation.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    parts: Vec<u32>,
}

impl Partition {
    pub fn new(parts: Vec<u32>) -> Result<Self> {
        if parts.iter().any(|&p| p == 0) || parts.windows(2).any(|w| w[0] < w[1]) {
            return Err(Error::InvalidPartition);
        }
        Ok(Self { parts })
    }

    /// The unique partition of 0.
    pub fn empty() -> Self {
        Self { parts: Vec::new() }
    }

    pub fn parts(&self) -> &[u32] {
        &self.parts
    }

    pub fn size(&self) -> u64 {
        self.parts.iter().map(|&p| p as u64).sum()
    }

    pub fn len(&self) -> usize {
        self.parts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parts.is_empty()
    }

    /// Pairs `(r, c_r)` with `c_r` the number of parts equal to `r`,
    /// in strictly decreasing `r`.
    pub fn multiplicities(&self) -> Vec<(u32, u32)> {
        let mut out = Vec::new();
        for &p in &self.parts {
            match out.last_mut() {
                Some((r, c)) if *r == p => *c += 1,
                _ => out.push((p, 1)),
            }
        }
        out
    }

    /// The class weight `z_lambda = prod_r r^{c_r} c_r!`.
    ///
    /// The conjugacy class of this cycle type has `n!/z_lambda` elements, so
    /// `1/z_lambda` is its probability under the uniform measure.
    pub fn z_weight(&self) -> BigUint {
        let mut z = BigUint::one();
        for (r, c) in self.multiplicities() {
            z *= BigUint::from(r).pow(c);
            z *= factorial(c);
        }
        z
    }

    /// `1/z_lambda` as a double.
    pub fn class_probability(&self) -> f64 {
        1.0 / self.z_weight().to_f64().expect("z_weight fits in f64 for n <= 60")
    }
}

fn factorial(k: u32) -> BigUint {
    (2..=k).map(BigUint::from).product::<BigUint>().max(BigUint::one())
}

/// Streams every partition of `n` exactly once, in descending
/// lexicographic order: `(n)` first, `(1,1,...,1)` last.
///
/// ```
/// use permchar::partitions::partitions_of;
///
/// assert_eq!(partitions_of(10).count(), 42);
/// ```
pub fn partitions_of(n: usize) -> Partitions {
    let first = if n == 0 {
        Some(Vec::new())
    } else {
        Some(vec![n as u32])
    };
    Partitions { next: first }
}

pub struct Partitions {
    next: Option<Vec<u32>>,
}

impl Iterator for Partitions {
    type Item = Partition;

    fn next(&mut self) -> Option<Partition> {
        let current = self.next.take()?;
        self.next = successor(&current);
        Some(Partition { parts: current })
    }
}

/// Next partition in descending lex order, or None after `(1,...,1)`.
fn successor(parts: &[u32]) -> Option<Vec<u32>> {
    let i = parts.iter().rposition(|&p| p > 1)?;
    let trailing_ones = (parts.len() - 1 - i) as u32;
    let v = parts[i] - 1;
    let mut remaining = parts[i] + trailing_ones - v;
    let mut next: Vec<u32> = parts[..i].to_vec();
    next.push(v);
    while remaining >= v {
        next.push(v);
        remaining -= v;
    }
    if remaining > 0 {
        next.push(remaining);
    }
    Some(next)
}

/// The argument of every moment computation: `E[prod_k Z_n^{s_k}(x_k)]`.
///
/// Exponents are stored as complex numbers; queries whose exponents are all
/// nonnegative integers unlock the integer-only methods.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentQuery {
    pub n: usize,
    pub xs: Vec<Complex64>,
    pub ss: Vec<Complex64>,
}

impl MomentQuery {
    pub fn new(n: usize, xs: Vec<Complex64>, ss: Vec<Complex64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::EmptyQuery);
        }
        if xs.len() != ss.len() {
            return Err(Error::ArityMismatch { xs: xs.len(), ss: ss.len() });
        }
        Ok(Self { n, xs, ss })
    }

    pub fn with_integer_exponents(n: usize, xs: Vec<Complex64>, ss: &[u32]) -> Result<Self> {
        let ss = ss.iter().map(|&s| Complex64::new(s as f64, 0.0)).collect();
        Self::new(n, xs, ss)
    }

    pub fn arity(&self) -> usize {
        self.xs.len()
    }

    /// `max_k |x_k|`.
    pub fn norm_x(&self) -> f64 {
        self.xs.iter().map(|x| x.norm()).fold(0.0, f64::max)
    }

    /// All exponents as nonnegative integers, if they are such.
    pub fn integer_exponents(&self) -> Option<Vec<u32>> {
        self.ss
            .iter()
            .map(|s| {
                (s.im == 0.0 && s.re >= 0.0 && s.re.fract() == 0.0 && s.re <= u32::MAX as f64)
                    .then(|| s.re as u32)
            })
            .collect()
    }
}

/// `E[prod_k Z_n^{s_k}(x_k)]` as the sum over partitions of `n`:
/// `sum_{la |- n} (1/z_la) prod_k prod_m (1 - x_k^{la_m})^{s_k}`.
///
/// Integer exponents allow `max|x_k| <= 1`; general complex exponents need
/// `max|x_k| < 1` so every base `1 - x^m` stays in the right half plane and
/// the principal power is unambiguous. `n = 0` returns 1.
///
/// ```
/// use num_complex::Complex64;
/// use permchar::partitions::{exact_moment_partition_sum, MomentQuery};
///
/// // the first moment is 1 - x at every dimension
/// let q = MomentQuery::with_integer_exponents(8, vec![Complex64::new(0.4, 0.0)], &[1]).unwrap();
/// let m = exact_moment_partition_sum(&q).unwrap();
/// assert!((m - Complex64::new(0.6, 0.0)).norm() < 1e-12);
/// ```
pub fn exact_moment_partition_sum(q: &MomentQuery) -> Result<Complex64> {
    if q.n > PARTITION_SUM_MAX_N {
        return Err(Error::DimensionTooLarge { n: q.n, cap: PARTITION_SUM_MAX_N });
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
    if q.n == 0 {
        return Ok(Complex64::one());
    }

    // base_pow[k][r] = 1 - x_k^r
    let base_pow: Vec<Vec<Complex64>> = q
        .xs
        .iter()
        .map(|&x| {
            let mut pw = Complex64::one();
            (0..=q.n)
                .map(|_| {
                    let b = Complex64::one() - pw;
                    pw *= x;
                    b
                })
                .collect()
        })
        .collect();

    // Kahan summation keeps the roundoff of ~10^6 terms near machine epsilon.
    let mut sum = Complex64::zero();
    let mut comp = Complex64::zero();
    for la in partitions_of(q.n) {
        let mut term = Complex64::new(la.class_probability(), 0.0);
        for (r, c) in la.multiplicities() {
            for (k, s) in q.ss.iter().enumerate() {
                let base = base_pow[k][r as usize];
                term *= match &ints {
                    Some(si) => base.powu(si[k] * c),
                    None => base.powc(s * c as f64),
                };
            }
        }
        let y = term - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    Ok(sum)
}

/// Averages `prod_k det(I - x_k P_sigma)^{s_k}` over all `n!` permutation
/// matrices, computing each determinant numerically from the matrix itself.
/// This never looks at cycle types, which makes it an independent oracle for
/// the other methods. Only for `n <= 8` and nonnegative integer exponents.
pub fn brute_force_moment(q: &MomentQuery) -> Result<Complex64> {
    let ss = q.integer_exponents().ok_or(Error::NonIntegerExponent)?;
    if q.n > BRUTE_FORCE_MAX_N {
        return Err(Error::DimensionTooLarge { n: q.n, cap: BRUTE_FORCE_MAX_N });
    }
    if q.n == 0 {
        return Ok(Complex64::one());
    }

    let n = q.n;
    let mut sigma: Vec<usize> = (0..n).collect();
    let mut sum = Complex64::zero();
    let mut count = 0u64;
    let mut counters = vec![0usize; n];

    let mut visit = |sigma: &[usize]| {
        let mut prod = Complex64::one();
        for (x, &s) in q.xs.iter().zip(&ss) {
            prod *= det_i_minus_x_perm(*x, sigma).powu(s);
        }
        sum += prod;
        count += 1;
    };

    // Heap's algorithm.
    visit(&sigma);
    let mut i = 0;
    while i < n {
        if counters[i] < i {
            if i % 2 == 0 {
                sigma.swap(0, i);
            } else {
                sigma.swap(counters[i], i);
            }
            visit(&sigma);
            counters[i] += 1;
            i = 0;
        } else {
            counters[i] = 0;
            i += 1;
        }
    }
    Ok(sum / count as f64)
}

/// `det(I - x P_sigma)` by Gaussian elimination with partial pivoting,
/// where `P_sigma[i][j] = 1` iff `i = sigma(j)`.
fn det_i_minus_x_perm(x: Complex64, sigma: &[usize]) -> Complex64 {
    let n = sigma.len();
    let mut m = vec![Complex64::zero(); n * n];
    for i in 0..n {
        m[i * n + i] += Complex64::one();
    }
    for (j, &i) in sigma.iter().enumerate() {
        m[i * n + j] -= x;
    }

    let mut det = Complex64::one();
    for col in 0..n {
        let pivot_row = (col..n)
            .max_by(|&a, &b| {
                m[a * n + col].norm_sqr().total_cmp(&m[b * n + col].norm_sqr())
            })
            .unwrap();
        if m[pivot_row * n + col].norm_sqr() == 0.0 {
            return Complex64::zero();
        }
        if pivot_row != col {
            for j in 0..n {
                m.swap(col * n + j, pivot_row * n + j);
            }
            det = -det;
        }
        let pivot = m[col * n + col];
        det *= pivot;
        for row in col + 1..n {
            let f = m[row * n + col] / pivot;
            if f.norm_sqr() == 0.0 {
                continue;
            }
            for j in col..n {
                let v = m[col * n + j];
                m[row * n + j] -= f * v;
            }
        }
    }
    det
}
