//! Exact arithmetic for the largest sum-free subset problem in the integers.
//!
//! For a finite set `A` of positive integers, let `f(x) = 1_{[1/3,2/3)}(x) - 1/3`
//! on the circle and `f_A(x) = Σ_{a∈A} f(ax)`. The dilation maximum
//! `m_A = max_x f_A(x)` lower-bounds the largest sum-free subset:
//! `s(A) ≥ n/3 + m_A`. This crate computes `m_A` and `s(A)` exactly,
//! certifies lower bounds on `m_A` through nonnegative cosine polynomials,
//! and provides the finite-verification machinery built from Selberg
//! minorants, Bohr sets, moment norms and Freiman element-size reduction.
//!
//! Everything value-critical is exact: rationals are arbitrary precision,
//! arcs on the circle have rational endpoints, and certificate values live
//! in the one-dimensional ℚ-module spanned by √3/π. Floating point only
//! appears in the Selberg-polynomial layer, where Lipschitz certificates
//! quantify the error.

pub mod certify;
pub mod circle;
pub mod freiman;
pub mod rational;
pub mod report;
pub mod search;
pub mod selberg;
pub mod step;

pub use rational::ExactRational;
