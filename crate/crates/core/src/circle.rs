//! Exact arithmetic on the unit circle 𝕋 = ℝ/ℤ.
//!
//! Points are rationals reduced to `[0, 1)`; sets are finite unions of
//! disjoint half-open arcs `[p, q)` with rational endpoints. All arcs are
//! kept canonical (split at 1, sorted, overlap-merged) so set equality is
//! structural and measures are exact.
//!
//! The two set families the rest of the crate consumes are the
//! middle-third preimages `{x : frac(ax) ∈ [1/3, 2/3)}` and the Bohr sets
//! `B(v, ε) = {x : ‖vx‖ ≤ ε}` with ‖·‖ the distance to the nearest
//! integer. Bohr sets are closed in the source material; we store them
//! half-open, which changes no measure and no interior witness.

use crate::certify::chi;
use crate::rational::ExactRational;
use num::bigint::BigInt;
use num::ToPrimitive;
use serde::de::Error as _;
use serde::ser::SerializeSeq;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use std::fmt;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum CircleError {
    #[error("dilation factor must be positive")]
    ZeroDilation,
    #[error("bohr radius must satisfy 0 < eps < 1/2, got {0}")]
    BadBohrRadius(ExactRational),
    #[error("bohr set needs at least one frequency")]
    EmptyFrequencies,
    #[error("two-element formula requires coprime a, b; gcd({0}, {1}) > 1")]
    NotCoprime(u64, u64),
}

/// A point on 𝕋, stored as a rational in `[0, 1)`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct CirclePoint(ExactRational);

impl CirclePoint {
    /// Reduce an arbitrary rational mod 1.
    pub fn frac(x: &ExactRational) -> Self {
        CirclePoint(x.fract())
    }

    pub fn value(&self) -> &ExactRational {
        &self.0
    }

    /// The point `self + t` on the circle.
    pub fn translate(&self, t: &ExactRational) -> Self {
        CirclePoint((&self.0 + t).fract())
    }

    /// The point `a · self` on the circle.
    pub fn dilate(&self, a: u64) -> Self {
        CirclePoint((&self.0 * &ExactRational::from(a)).fract())
    }

    /// Distance to the nearest integer, `‖x‖`.
    pub fn dist_to_integer(&self) -> ExactRational {
        let half = ExactRational::new(1, 2);
        if self.0 <= half {
            self.0.clone()
        } else {
            ExactRational::one() - self.0.clone()
        }
    }
}

impl fmt::Debug for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for CirclePoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Shorthand for arc construction in tests and literals.
pub fn rat(n: i64, d: i64) -> ExactRational {
    ExactRational::new(n, d)
}

/// A finite union of disjoint half-open arcs `[left, right)` on 𝕋.
///
/// Invariants: `0 ≤ left < right ≤ 1` for every arc, arcs sorted by left
/// endpoint, no two arcs touching or overlapping (arcs wrapping past 1 are
/// split at 1 and are *not* re-merged across the seam).
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct IntervalSet {
    arcs: Vec<(ExactRational, ExactRational)>,
}

impl IntervalSet {
    pub fn empty() -> Self {
        IntervalSet { arcs: Vec::new() }
    }

    pub fn full() -> Self {
        IntervalSet {
            arcs: vec![(ExactRational::zero(), ExactRational::one())],
        }
    }

    /// Build from arbitrary `[lo, hi)` pairs interpreted mod 1.
    ///
    /// Pairs with `hi - lo ≥ 1` cover the whole circle; empty pairs
    /// (`hi ≤ lo` after an exact-length check) are dropped. Wrapping arcs
    /// are split at 1.
    pub fn from_raw_arcs(raw: &[(ExactRational, ExactRational)]) -> Self {
        let one = ExactRational::one();
        let mut pieces: Vec<(ExactRational, ExactRational)> = Vec::new();
        for (lo, hi) in raw {
            let len = hi - lo;
            if !len.is_positive() {
                continue;
            }
            if len >= one {
                return IntervalSet::full();
            }
            let l = lo.fract();
            let r = &l + &len;
            if r <= one {
                pieces.push((l, r));
            } else {
                pieces.push((l, one.clone()));
                pieces.push((ExactRational::zero(), r - &one));
            }
        }
        Self::canonicalize(pieces)
    }

    fn canonicalize(mut pieces: Vec<(ExactRational, ExactRational)>) -> Self {
        pieces.retain(|(l, r)| r > l);
        pieces.sort();
        let mut arcs: Vec<(ExactRational, ExactRational)> = Vec::new();
        for (l, r) in pieces {
            match arcs.last_mut() {
                Some((_, pr)) if l <= *pr => {
                    if r > *pr {
                        *pr = r;
                    }
                }
                _ => arcs.push((l, r)),
            }
        }
        IntervalSet { arcs }
    }

    pub fn arcs(&self) -> &[(ExactRational, ExactRational)] {
        &self.arcs
    }

    pub fn is_empty(&self) -> bool {
        self.arcs.is_empty()
    }

    /// Total length, exact.
    pub fn measure(&self) -> ExactRational {
        let mut m = ExactRational::zero();
        for (l, r) in &self.arcs {
            m += &(r - l);
        }
        m
    }

    /// Membership test under the half-open convention.
    pub fn contains(&self, x: &CirclePoint) -> bool {
        self.arcs
            .iter()
            .any(|(l, r)| l <= x.value() && x.value() < r)
    }

    pub fn union(&self, other: &IntervalSet) -> IntervalSet {
        let mut pieces = self.arcs.clone();
        pieces.extend_from_slice(&other.arcs);
        Self::canonicalize(pieces)
    }

    pub fn complement(&self) -> IntervalSet {
        let one = ExactRational::one();
        let mut pieces = Vec::new();
        let mut cursor = ExactRational::zero();
        for (l, r) in &self.arcs {
            if *l > cursor {
                pieces.push((cursor, l.clone()));
            }
            cursor = r.clone();
        }
        if cursor < one {
            pieces.push((cursor, one));
        }
        Self::canonicalize(pieces)
    }

    pub fn intersect(&self, other: &IntervalSet) -> IntervalSet {
        let mut pieces = Vec::new();
        let (mut i, mut j) = (0, 0);
        while i < self.arcs.len() && j < other.arcs.len() {
            let (al, ar) = &self.arcs[i];
            let (bl, br) = &other.arcs[j];
            let lo = if al >= bl { al.clone() } else { bl.clone() };
            let hi = if ar <= br { ar.clone() } else { br.clone() };
            if hi > lo {
                pieces.push((lo, hi));
            }
            if ar <= br {
                i += 1;
            } else {
                j += 1;
            }
        }
        Self::canonicalize(pieces)
    }

    /// Midpoints and left endpoints of every arc; interior sample points
    /// for downstream witnesses.
    pub fn sample_points(&self) -> Vec<CirclePoint> {
        let two = ExactRational::from_int(2);
        let mut pts = Vec::new();
        for (l, r) in &self.arcs {
            pts.push(CirclePoint::frac(l));
            pts.push(CirclePoint::frac(&((l + r) / &two))); // still inside: half-open
        }
        pts
    }
}

/// `{x ∈ 𝕋 : frac(ax) ∈ [1/3, 2/3)} = ∪_{k<a} [(3k+1)/(3a), (3k+2)/(3a))`.
///
/// Total measure is exactly 1/3 for every `a ≥ 1`.
pub fn middle_third_preimage(a: u64) -> Result<IntervalSet, CircleError> {
    if a == 0 {
        return Err(CircleError::ZeroDilation);
    }
    let den = ExactRational::from(3 * a);
    let arcs = (0..a)
        .map(|k| {
            let l = ExactRational::from(3 * k + 1) / &den;
            let r = ExactRational::from(3 * k + 2) / &den;
            (l, r)
        })
        .collect();
    // Already canonical: sorted, disjoint, inside [0, 1).
    Ok(IntervalSet { arcs })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SetOp {
    Intersect,
    Union,
    Complement,
}

/// Exact set algebra entry point; `Complement` ignores `rhs`.
pub fn combine(lhs: &IntervalSet, rhs: &IntervalSet, op: SetOp) -> IntervalSet {
    match op {
        SetOp::Intersect => lhs.intersect(rhs),
        SetOp::Union => lhs.union(rhs),
        SetOp::Complement => lhs.complement(),
    }
}

/// The closed form `(1/9)(1 + 2χ(ab)/(ab))` for the measure of
/// `{x : frac(ax), frac(bx) ∈ [1/3, 2/3)}` when `gcd(a, b) = 1`.
pub fn two_element_measure_formula(a: u64, b: u64) -> Result<ExactRational, CircleError> {
    if a == 0 || b == 0 {
        return Err(CircleError::ZeroDilation);
    }
    if num::integer::gcd(a, b) != 1 {
        return Err(CircleError::NotCoprime(a, b));
    }
    let ab = a as i64 * b as i64;
    let character = ExactRational::from_int(chi(ab) as i64);
    let term = ExactRational::from_int(2) * character / ExactRational::from_int(ab);
    Ok(ExactRational::new(1, 9) * (ExactRational::one() + term))
}

/// The Bohr set `{x : ‖vx‖ ≤ ε for all v ∈ freqs}`, stored half-open.
pub fn bohr_set(freqs: &[u64], eps: &ExactRational) -> Result<IntervalSet, CircleError> {
    if freqs.is_empty() {
        return Err(CircleError::EmptyFrequencies);
    }
    if !eps.is_positive() || *eps >= ExactRational::new(1, 2) {
        return Err(CircleError::BadBohrRadius(eps.clone()));
    }
    let mut result: Option<IntervalSet> = None;
    for &v in freqs {
        if v == 0 {
            return Err(CircleError::ZeroDilation);
        }
        let vr = ExactRational::from(v);
        let raw: Vec<_> = (0..v)
            .map(|k| {
                let center = ExactRational::from(k) / &vr;
                let radius = eps / &vr;
                (&center - &radius, center + radius)
            })
            .collect();
        let band = IntervalSet::from_raw_arcs(&raw);
        result = Some(match result {
            None => band,
            Some(acc) => acc.intersect(&band),
        });
    }
    Ok(result.expect("nonempty freqs"))
}

fn bigint_to_i64<E: serde::ser::Error>(x: &BigInt) -> Result<i64, E> {
    x.to_i64()
        .ok_or_else(|| E::custom("interval endpoint exceeds i64 range"))
}

impl Serialize for IntervalSet {
    /// Arrays of `[num_left, den_left, num_right, den_right]` quadruples.
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let mut seq = serializer.serialize_seq(Some(self.arcs.len()))?;
        for (l, r) in &self.arcs {
            let quad: [i64; 4] = [
                bigint_to_i64::<S::Error>(l.numer())?,
                bigint_to_i64::<S::Error>(l.denom())?,
                bigint_to_i64::<S::Error>(r.numer())?,
                bigint_to_i64::<S::Error>(r.denom())?,
            ];
            seq.serialize_element(&quad)?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for IntervalSet {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let quads: Vec<[i64; 4]> = Vec::deserialize(deserializer)?;
        let mut raw = Vec::with_capacity(quads.len());
        for [nl, dl, nr, dr] in quads {
            if dl == 0 || dr == 0 {
                return Err(D::Error::custom("zero denominator in interval quadruple"));
            }
            raw.push((ExactRational::new(nl, dl), ExactRational::new(nr, dr)));
        }
        Ok(IntervalSet::from_raw_arcs(&raw))
    }
}
