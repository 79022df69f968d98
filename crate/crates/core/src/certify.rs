//! Certificate machinery for lower bounds on `m_A`.
//!
//! A certificate is a cosine polynomial `φ = Σ b_j c(jx)` (with
//! `c(x) = cos(2πx)`) that is nonnegative on the circle and has mean 1.
//! Then `∫ φ f_A ≤ m_A`, and the pairing evaluates exactly in the
//! ℚ-module spanned by `√3/π`:
//!
//! `∫ φ f_A = (√3/π) · (-1/2) Σ_{a∈A} Σ_{n≥1} b_{na} χ(n)/n`
//!
//! where χ is the nontrivial character mod 3. The sign convention of χ is
//! pinned by the Fourier expansion `f̂(n) = -√3 χ(n)/(2πn)`, which the
//! test suite validates against partial Fourier sums.
//!
//! Nonnegativity is certified structurally where possible (the source
//! functions are all products, powers and shifts of manifestly
//! nonnegative factors); a grid check with a Lipschitz bound is the
//! fallback, and it never returns a false positive.

use crate::rational::ExactRational;
use crate::step::IntegerSet;
use num::bigint::BigInt;
use num::pow::Pow;
use num::ToPrimitive;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use std::cmp::Ordering;
use std::collections::BTreeMap;

#[derive(Debug, thiserror::Error, PartialEq)]
pub enum CertifyError {
    #[error("certificate mean must be 1, got {0}")]
    MeanNotOne(ExactRational),
    #[error("polynomial is not nonnegative: value {value} at x = {x}")]
    NotNonnegative { x: f64, value: f64 },
    #[error("nonnegativity indeterminate: grid minimum {min} within tolerance {tol}")]
    IndeterminateNonnegativity { min: f64, tol: f64 },
    #[error("scalar factor must be nonnegative, got {0}")]
    NegativeScalar(ExactRational),
    #[error("dilation factor must be positive")]
    ZeroDilation,
}

/// The nontrivial Dirichlet character mod 3: `+1` at `1 (mod 3)`,
/// `-1` at `2 (mod 3)`, `0` at multiples of 3.
pub fn chi(n: i64) -> i32 {
    match n.rem_euclid(3) {
        0 => 0,
        1 => 1,
        _ => -1,
    }
}

/// A finite cosine series `φ(x) = Σ_j b_j cos(2πjx)` with rational
/// coefficients; `b_0` is the mean.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct CosinePoly {
    coeffs: BTreeMap<u64, ExactRational>,
}

impl CosinePoly {
    pub fn zero() -> Self {
        CosinePoly::default()
    }

    pub fn constant(c: ExactRational) -> Self {
        Self::from_pairs(vec![(0, c)])
    }

    pub fn one() -> Self {
        Self::constant(ExactRational::one())
    }

    /// The basis function `c(jx) = cos(2πjx)`.
    pub fn cosine(j: u64) -> Self {
        Self::from_pairs(vec![(j, ExactRational::one())])
    }

    pub fn from_pairs(pairs: Vec<(u64, ExactRational)>) -> Self {
        let mut coeffs = BTreeMap::new();
        for (j, b) in pairs {
            if b.is_zero() {
                continue;
            }
            let entry = coeffs.entry(j).or_insert_with(ExactRational::zero);
            *entry += &b;
            if entry.is_zero() {
                coeffs.remove(&j);
            }
        }
        CosinePoly { coeffs }
    }

    pub fn coeff(&self, j: u64) -> ExactRational {
        self.coeffs.get(&j).cloned().unwrap_or_else(ExactRational::zero)
    }

    pub fn coeffs(&self) -> &BTreeMap<u64, ExactRational> {
        &self.coeffs
    }

    pub fn mean(&self) -> ExactRational {
        self.coeff(0)
    }

    pub fn degree(&self) -> u64 {
        self.coeffs.keys().next_back().copied().unwrap_or(0)
    }

    pub fn add(&self, other: &CosinePoly) -> CosinePoly {
        let mut pairs: Vec<_> = self
            .coeffs
            .iter()
            .map(|(&j, b)| (j, b.clone()))
            .collect();
        pairs.extend(other.coeffs.iter().map(|(&j, b)| (j, b.clone())));
        Self::from_pairs(pairs)
    }

    pub fn scale(&self, s: &ExactRational) -> CosinePoly {
        Self::from_pairs(
            self.coeffs
                .iter()
                .map(|(&j, b)| (j, b * s))
                .collect(),
        )
    }

    /// Product, via `c(ux)·c(vx) = ½ c((u+v)x) + ½ c(|u−v|x)`.
    pub fn mul(&self, other: &CosinePoly) -> CosinePoly {
        let half = ExactRational::new(1, 2);
        let mut pairs = Vec::new();
        for (&u, bu) in &self.coeffs {
            for (&v, bv) in &other.coeffs {
                let prod = bu * bv;
                if u == 0 || v == 0 {
                    pairs.push((u + v, prod));
                } else {
                    pairs.push((u + v, &prod * &half));
                    pairs.push((u.abs_diff(v), prod * &half));
                }
            }
        }
        Self::from_pairs(pairs)
    }

    pub fn pow(&self, k: u32) -> CosinePoly {
        let mut acc = CosinePoly::one();
        for _ in 0..k {
            acc = acc.mul(self);
        }
        acc
    }

    /// `φ(x) ↦ φ(ux)`: index scaling.
    pub fn dilate(&self, u: u64) -> Result<CosinePoly, CertifyError> {
        if u == 0 {
            return Err(CertifyError::ZeroDilation);
        }
        Ok(Self::from_pairs(
            self.coeffs.iter().map(|(&j, b)| (j * u, b.clone())).collect(),
        ))
    }

    /// `φ(x) ↦ φ(x + 1/2)`: `b_j ↦ (−1)^j b_j`.
    pub fn half_shift(&self) -> CosinePoly {
        Self::from_pairs(
            self.coeffs
                .iter()
                .map(|(&j, b)| (j, if j % 2 == 0 { b.clone() } else { -b }))
                .collect(),
        )
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs
            .iter()
            .map(|(&j, b)| b.to_f64() * (2.0 * std::f64::consts::PI * j as f64 * x).cos())
            .sum()
    }

    /// Lipschitz constant bound `2π Σ_j j |b_j|`.
    pub fn lipschitz_bound(&self) -> f64 {
        2.0 * std::f64::consts::PI
            * self
                .coeffs
                .iter()
                .map(|(&j, b)| j as f64 * b.to_f64().abs())
                .sum::<f64>()
    }
}

/// The exact real number `q · √3/π`, `q ∈ ℚ` — the value module of every
/// pairing integral.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SqrtPiValue {
    pub q: ExactRational,
}

impl SqrtPiValue {
    pub fn zero() -> Self {
        SqrtPiValue {
            q: ExactRational::zero(),
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.q.to_f64() * 3f64.sqrt() / std::f64::consts::PI
    }

    pub fn add(&self, other: &SqrtPiValue) -> SqrtPiValue {
        SqrtPiValue {
            q: &self.q + &other.q,
        }
    }

    /// Exact comparison against a rational via a widening enclosure of
    /// `√3/π`. Decisive for every input: `q√3/π` is irrational unless
    /// `q = 0`, so the enclosure always separates.
    pub fn cmp_rational(&self, r: &ExactRational) -> Ordering {
        if self.q.is_zero() {
            return ExactRational::zero().cmp(r);
        }
        for level in 1..=14u32 {
            let (lo, hi) = sqrt3_over_pi_bounds(level);
            let (vlo, vhi) = if self.q.is_negative() {
                (&self.q * &hi, &self.q * &lo)
            } else {
                (&self.q * &lo, &self.q * &hi)
            };
            if vlo > *r {
                return Ordering::Greater;
            }
            if vhi < *r {
                return Ordering::Less;
            }
        }
        unreachable!("enclosure of q·√3/π failed to separate from a rational")
    }

    pub fn ge_rational(&self, r: &ExactRational) -> bool {
        self.cmp_rational(r) != Ordering::Less
    }
}

impl std::fmt::Display for SqrtPiValue {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({})*sqrt(3)/pi", self.q)
    }
}

/// Rigorous rational enclosure of `arctan(1/x)` from the alternating
/// Leibniz series.
fn arctan_recip_bounds(x: i64, terms: u32) -> (ExactRational, ExactRational) {
    let xr = ExactRational::from_int(x);
    let x2 = (&xr * &xr).recip();
    let mut term = xr.recip();
    let mut sum = ExactRational::zero();
    let mut sign_positive = true;
    for k in 0..terms {
        let contrib = &term / &ExactRational::from_int(2 * k as i64 + 1);
        if sign_positive {
            sum += &contrib;
        } else {
            sum -= &contrib;
        }
        term = &term * &x2;
        sign_positive = !sign_positive;
    }
    // Next-term bound for an alternating series with decreasing terms.
    let next = &term / &ExactRational::from_int(2 * terms as i64 + 1);
    if sign_positive {
        (sum.clone(), sum + next)
    } else {
        (&sum - &next, sum)
    }
}

/// Enclosure of π by Machin's formula `π = 16 arctan(1/5) − 4 arctan(1/239)`.
pub fn pi_bounds(terms: u32) -> (ExactRational, ExactRational) {
    let sixteen = ExactRational::from_int(16);
    let four = ExactRational::from_int(4);
    let (a5_lo, a5_hi) = arctan_recip_bounds(5, terms);
    let (a239_lo, a239_hi) = arctan_recip_bounds(239, terms.max(4));
    (
        &sixteen * &a5_lo - &four * &a239_hi,
        &sixteen * &a5_hi - &four * &a239_lo,
    )
}

/// Enclosure of `√3` to `digits` decimal digits, by integer square root.
pub fn sqrt3_bounds(digits: u32) -> (ExactRational, ExactRational) {
    let scale = BigInt::from(10u32).pow(digits);
    let scaled = (BigInt::from(3) * &scale * &scale).sqrt();
    (
        ExactRational::from_big(scaled.clone(), scale.clone()),
        ExactRational::from_big(scaled + BigInt::from(1), scale),
    )
}

/// Widening enclosure of `√3/π`; `level` scales both series length and
/// digit count geometrically.
pub fn sqrt3_over_pi_bounds(level: u32) -> (ExactRational, ExactRational) {
    let terms = 8 * level * level;
    let digits = 10 * level * level;
    let (s_lo, s_hi) = sqrt3_bounds(digits);
    let (p_lo, p_hi) = pi_bounds(terms);
    (&s_lo / &p_hi, &s_hi / &p_lo)
}

/// `∫₀¹ φ(x) f_A(x) dx`, exactly, via the Fourier expansion of `f`:
/// the result is `q·√3/π` with `q = (−1/2) Σ_{a∈A} Σ_{na ≤ deg φ} b_{na} χ(n)/n`.
pub fn pairing(phi: &CosinePoly, set: &IntegerSet) -> SqrtPiValue {
    let degree = phi.degree();
    let mut q = ExactRational::zero();
    for &a in set.elements() {
        let mut n = 1u64;
        while n * a <= degree {
            let b = phi.coeff(n * a);
            if !b.is_zero() {
                let ch = chi(n as i64);
                if ch != 0 {
                    q += &(b * ExactRational::new(ch as i64, n as i64));
                }
            }
            n += 1;
        }
    }
    SqrtPiValue {
        q: q * ExactRational::new(-1, 2),
    }
}

/// Outcome of the grid + Lipschitz nonnegativity check. Never a false
/// positive: `Nonnegative` implies `φ ≥ 0` everywhere.
#[derive(Clone, Debug, PartialEq)]
pub enum NonnegOutcome {
    Nonnegative { margin: f64 },
    NotNonnegative { x: f64, value: f64 },
    Indeterminate { min: f64, tol: f64 },
}

pub fn verify_nonneg(phi: &CosinePoly) -> NonnegOutcome {
    verify_nonneg_with(phi, 4096, 4)
}

pub fn verify_nonneg_with(phi: &CosinePoly, initial_grid: u64, rounds: u32) -> NonnegOutcome {
    let lipschitz = phi.lipschitz_bound();
    let mut grid = initial_grid.max(8 * (phi.degree() + 1));
    let mut last = NonnegOutcome::Indeterminate {
        min: f64::NAN,
        tol: f64::NAN,
    };
    for _ in 0..rounds {
        let h = 1.0 / grid as f64;
        let mut min = f64::INFINITY;
        let mut argmin = 0.0;
        for j in 0..grid {
            let x = j as f64 * h;
            let v = phi.eval_f64(x);
            if v < min {
                min = v;
                argmin = x;
            }
        }
        let tol = lipschitz * h / 2.0;
        if min >= tol {
            return NonnegOutcome::Nonnegative { margin: min - tol };
        }
        if min < -1e-12 {
            return NonnegOutcome::NotNonnegative {
                x: argmin,
                value: min,
            };
        }
        last = NonnegOutcome::Indeterminate { min, tol };
        grid *= 4;
    }
    last
}

/// A cosine polynomial carrying a structural proof of nonnegativity:
/// built only from squares, products, nonnegative combinations and
/// argument substitutions of certified factors. This is how the source
/// functions are all assembled, so no grid check is needed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonnegPoly {
    poly: CosinePoly,
}

impl NonnegPoly {
    pub fn constant(c: ExactRational) -> Result<Self, CertifyError> {
        if c.is_negative() {
            return Err(CertifyError::NegativeScalar(c));
        }
        Ok(NonnegPoly {
            poly: CosinePoly::constant(c),
        })
    }

    /// `1 + c(jx) ≥ 0`.
    pub fn one_plus_cosine(j: u64) -> Self {
        NonnegPoly {
            poly: CosinePoly::one().add(&CosinePoly::cosine(j)),
        }
    }

    /// `1 − c(jx) ≥ 0`.
    pub fn one_minus_cosine(j: u64) -> Self {
        NonnegPoly {
            poly: CosinePoly::one().add(&CosinePoly::cosine(j).scale(&ExactRational::from_int(-1))),
        }
    }

    /// `p² ≥ 0` for any cosine polynomial `p`.
    pub fn square(p: &CosinePoly) -> Self {
        NonnegPoly { poly: p.mul(p) }
    }

    pub fn product(&self, other: &NonnegPoly) -> Self {
        NonnegPoly {
            poly: self.poly.mul(&other.poly),
        }
    }

    pub fn power(&self, k: u32) -> Self {
        NonnegPoly {
            poly: self.poly.pow(k),
        }
    }

    pub fn sum(&self, other: &NonnegPoly) -> Self {
        NonnegPoly {
            poly: self.poly.add(&other.poly),
        }
    }

    pub fn scale(&self, s: &ExactRational) -> Result<Self, CertifyError> {
        if s.is_negative() {
            return Err(CertifyError::NegativeScalar(s.clone()));
        }
        Ok(NonnegPoly {
            poly: self.poly.scale(s),
        })
    }

    /// `φ(x) ↦ φ(ux)`: nonnegativity is preserved by substitution.
    pub fn dilate(&self, u: u64) -> Result<Self, CertifyError> {
        Ok(NonnegPoly {
            poly: self.poly.dilate(u)?,
        })
    }

    /// `φ(x) ↦ φ(x + 1/2)`.
    pub fn half_shift(&self) -> Self {
        NonnegPoly {
            poly: self.poly.half_shift(),
        }
    }

    pub fn poly(&self) -> &CosinePoly {
        &self.poly
    }

    pub fn into_poly(self) -> CosinePoly {
        self.poly
    }
}

/// The test functions the certificate lemmas are built from.
pub mod library {
    use super::*;

    /// `φ(x) = (1 − c(ux))(1 − c(vx))`: mean 1 when no relation
    /// `ju = kv` (`j, k ∈ {1, 2}` collapse) exists; handles `1 ∉ A`.
    pub fn two_factor(u: u64, v: u64) -> NonnegPoly {
        NonnegPoly::one_minus_cosine(u).product(&NonnegPoly::one_minus_cosine(v))
    }

    /// `φ(x) = 1 − (4/3)c(x) + (2/3)c(2x) = (1/3)(2c(x) − 1)²`: the size-5
    /// certificate body.
    pub fn size5() -> NonnegPoly {
        let p = CosinePoly::from_pairs(vec![
            (0, ExactRational::from_int(-1)),
            (1, ExactRational::from_int(2)),
        ]);
        NonnegPoly::square(&p)
            .scale(&ExactRational::new(1, 3))
            .expect("positive scalar")
    }

    /// The size-5 certificate dilated to frequency `u`.
    pub fn size5_dilated(u: u64) -> Result<NonnegPoly, CertifyError> {
        size5().dilate(u)
    }
}

/// A certified lower bound `m_A ≥ value`.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub set: IntegerSet,
    pub phi: CosinePoly,
    pub value: SqrtPiValue,
    /// Margin bookkeeping from the nonnegativity certificate; structural
    /// proofs carry margin 0 (exact).
    pub nonneg_margin: f64,
    pub method: &'static str,
}

/// Certify `m_A ≥ ∫ φ f_A` from a structurally nonnegative `φ` with mean 1.
pub fn certify_lower_bound(
    set: &IntegerSet,
    phi: &NonnegPoly,
) -> Result<Certificate, CertifyError> {
    let mean = phi.poly().mean();
    if mean != ExactRational::one() {
        return Err(CertifyError::MeanNotOne(mean));
    }
    Ok(Certificate {
        set: set.clone(),
        phi: phi.poly().clone(),
        value: pairing(phi.poly(), set),
        nonneg_margin: 0.0,
        method: "structural",
    })
}

/// Certify from a raw polynomial: nonnegativity must pass the grid +
/// Lipschitz check, which never accepts a sign-indefinite `φ`.
pub fn certify_lower_bound_numeric(
    set: &IntegerSet,
    phi: &CosinePoly,
) -> Result<Certificate, CertifyError> {
    let mean = phi.mean();
    if mean != ExactRational::one() {
        return Err(CertifyError::MeanNotOne(mean));
    }
    match verify_nonneg(phi) {
        NonnegOutcome::Nonnegative { margin } => Ok(Certificate {
            set: set.clone(),
            phi: phi.clone(),
            value: pairing(phi, set),
            nonneg_margin: margin,
            method: "grid-lipschitz",
        }),
        NonnegOutcome::NotNonnegative { x, value } => {
            Err(CertifyError::NotNonnegative { x, value })
        }
        NonnegOutcome::Indeterminate { min, tol } => {
            Err(CertifyError::IndeterminateNonnegativity { min, tol })
        }
    }
}

impl Serialize for Certificate {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut st = serializer.serialize_struct("Certificate", 6)?;
        st.serialize_field("set", self.set.elements())?;
        let coeffs: Vec<(u64, String)> = self
            .phi
            .coeffs()
            .iter()
            .map(|(&j, b)| (j, b.to_string()))
            .collect();
        st.serialize_field("phi_coeffs", &coeffs)?;
        st.serialize_field(
            "q_num",
            &self.value.q.numer().to_i64().unwrap_or_default(),
        )?;
        st.serialize_field(
            "q_den",
            &self.value.q.denom().to_i64().unwrap_or_default(),
        )?;
        st.serialize_field("bound_decimal", &self.value.to_f64())?;
        st.serialize_field("method", &self.method)?;
        st.end()
    }
}
