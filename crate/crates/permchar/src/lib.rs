//! Moments of characteristic polynomials of random permutation matrices.
//!
//! For a uniform random `n x n` permutation matrix `g`, the characteristic
//! polynomial `Z_n(x) = det(I - x g)` factors over the cycle lengths of the
//! underlying permutation. This crate computes the mixed moments
//! `E[prod_k Z_n^{s_k}(x_k)]` by four independent routes:
//!
//! * a sum over integer partitions of `n` (conjugacy classes),
//! * coefficient extraction from the cycle-index generating function,
//! * Monte Carlo over sampled cycle types (via the Feller coupling),
//! * and, for `n -> infinity` with `max |x_k| < 1`, closed-form limits.
//!
//! For `|x| = 1` (x not a root of unity) the moments grow polynomially in `n`;
//! the [`asymptotics`] module produces the leading term and a validation
//! harness against exact extraction.
//!
//! ```
//! use num_complex::Complex64;
//! use permchar::partitions::{exact_moment_partition_sum, MomentQuery};
//!
//! // E[Z_n(x)] = 1 - x for every n >= 1.
//! let x = Complex64::new(0.3, 0.0);
//! let q = MomentQuery::new(5, vec![x], vec![Complex64::new(1.0, 0.0)]).unwrap();
//! let m = exact_moment_partition_sum(&q).unwrap();
//! assert!((m - (Complex64::new(1.0, 0.0) - x)).norm() < 1e-12);
//! ```

pub mod asymptotics;
mod dd;
pub mod error;
pub mod feller;
pub mod moments;
pub mod partitions;
pub mod series;

pub use error::Error;
pub use num_complex::Complex64;

pub type Result<T> = std::result::Result<T, Error>;
