use thiserror::Error;

/// Errors shared by all modules of the crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("parts must be positive and weakly decreasing")]
    InvalidPartition,

    #[error("evaluation points and exponents differ in length ({xs} vs {ss})")]
    ArityMismatch { xs: usize, ss: usize },

    #[error("a moment query needs at least one (x, s) pair")]
    EmptyQuery,

    #[error("max_k |x_k| = {norm} but this computation requires max_k |x_k| {requirement}")]
    NormTooLarge { norm: f64, requirement: &'static str },

    #[error("n = {n} exceeds the supported cap {cap} for this method")]
    DimensionTooLarge { n: usize, cap: usize },

    #[error("this method needs nonnegative integer exponents")]
    NonIntegerExponent,

    #[error("series exp needs a vanishing constant term")]
    NonzeroConstantTerm,

    #[error("series log needs constant term 1")]
    ConstantTermNotOne,

    #[error("leading denominator coefficient is zero")]
    ZeroLeadingDenominator,

    #[error("lattice truncation did not reach the tolerance within radius {cap}")]
    TruncationFailed { cap: usize },

    #[error("|x| = {modulus} is not on the unit circle (tolerance 1e-12)")]
    NotOnUnitCircle { modulus: f64 },

    #[error("x is within {eps} of a root of unity of order <= {max_order}")]
    RootOfUnity { max_order: u32, eps: f64 },

    #[error("index k = {k} outside [{lo}, {hi}]")]
    IndexOutOfRange { k: i64, lo: i64, hi: i64 },

    #[error("({m})! overflows f64; the pole order is too large")]
    FactorialOverflow { m: u64 },

    #[error("horizon {horizon} is too short; need horizon > n = {n}")]
    HorizonTooShort { horizon: usize, n: usize },

    #[error("tracked cycle length cap M = {m} exceeds n = {n}")]
    TrackedLengthTooLarge { m: usize, n: usize },

    #[error("a trigonometric coefficient has imaginary residue {residue:e}")]
    NonRealCoefficient { residue: f64 },

    #[error("at least one Monte Carlo sample is required")]
    NoSamples,
}
