//! Freiman isomorphisms of bounded order and the element-size reduction:
//! any n-set of nonzero integers is Freiman isomorphic (order M, fixing 0)
//! to a set with `max|b| ≤ (8M)^n`. The reduction loop picks the least
//! prime `p ∈ (4Mℓ, 8Mℓ]`, scans multipliers `t` for one whose centered
//! images `center_p(t·aᵢ)` all land within `⌊p^{1−1/n}⌋` (one exists by
//! Minkowski's first theorem applied to the lattice `(a₁,…,aₙ)ℤ + pℤⁿ`),
//! and replaces `A` by those images.
//!
//! Isomorphism testing is exhaustive: with 0 adjoined and fixed, a
//! difference of two M-fold sums is `Σ cᵢaᵢ` with `Σ max(cᵢ,0) ≤ M` and
//! `Σ max(−cᵢ,0) ≤ M`, so we enumerate those coefficient vectors once.

use num::integer::Roots;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

#[derive(Debug, thiserror::Error)]
pub enum FreimanError {
    #[error("sequences must have equal length (got {0} and {1})")]
    LengthMismatch(usize, usize),
    #[error("elements must be nonzero and distinct")]
    BadElements,
    #[error("order M must be positive")]
    ZeroOrder,
    #[error("exhaustive check infeasible: (2M+1)^n = {0} exceeds {1}")]
    FeasibilityExceeded(u128, u128),
    #[error("B and -B intersect at {0}; sign normalization rejected")]
    SignConflict(i64),
    #[error(
        "no admissible multiplier for p = {p} (contradicts Minkowski; implementation bug), \
         trace so far: {trace:?}"
    )]
    NoAdmissibleMultiplier { p: u64, trace: ReductionTrace },
}

pub const RELATION_LIMIT: u128 = 100_000_000;

/// A verified order-M Freiman isomorphism between two aligned sequences,
/// extended by 0 ↦ 0.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FreimanWitness {
    pub source: Vec<i64>,
    pub target: Vec<i64>,
    pub order: u32,
    pub fixes_zero: bool,
}

impl FreimanWitness {
    pub fn verified(source: Vec<i64>, target: Vec<i64>, order: u32) -> Result<Self, FreimanError> {
        if !is_freiman_iso(&source, &target, order)? {
            return Err(FreimanError::BadElements);
        }
        Ok(FreimanWitness {
            source,
            target,
            order,
            fixes_zero: true,
        })
    }
}

/// One descent step of the reduction. `rejected` counts multipliers that
/// produced a zero or colliding image before the admissible one (kept for
/// the record; with p > ℓ this cannot actually occur).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionStep {
    pub ell: u64,
    pub p: u64,
    pub t: u64,
    pub image: Vec<i64>,
    pub rejected: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub steps: Vec<ReductionStep>,
}

fn check_elements(a: &[i64]) -> Result<(), FreimanError> {
    let mut seen = a.to_vec();
    seen.sort_unstable();
    seen.dedup();
    if seen.len() != a.len() || a.iter().any(|&x| x == 0) {
        return Err(FreimanError::BadElements);
    }
    Ok(())
}

/// True iff every `Σ cᵢaᵢ = 0` relation with positive and negative parts
/// each bounded by M holds for B as well, and conversely.
pub fn is_freiman_iso(a: &[i64], b: &[i64], m: u32) -> Result<bool, FreimanError> {
    if a.len() != b.len() {
        return Err(FreimanError::LengthMismatch(a.len(), b.len()));
    }
    if m == 0 {
        return Err(FreimanError::ZeroOrder);
    }
    check_elements(a)?;
    check_elements(b)?;
    let n = a.len();
    let space = (2u128 * m as u128 + 1)
        .checked_pow(n as u32)
        .unwrap_or(u128::MAX);
    if space > RELATION_LIMIT {
        return Err(FreimanError::FeasibilityExceeded(space, RELATION_LIMIT));
    }

    // Depth-first over coefficient vectors with remaining sign budgets.
    fn walk(
        a: &[i64],
        b: &[i64],
        idx: usize,
        pos_left: i64,
        neg_left: i64,
        sum_a: i128,
        sum_b: i128,
    ) -> bool {
        if idx == a.len() {
            return (sum_a == 0) == (sum_b == 0);
        }
        for c in -neg_left..=pos_left {
            let ok = walk(
                a,
                b,
                idx + 1,
                pos_left - c.max(0),
                neg_left + c.min(0),
                sum_a + c as i128 * a[idx] as i128,
                sum_b + c as i128 * b[idx] as i128,
            );
            if !ok {
                return false;
            }
        }
        true
    }
    Ok(walk(a, b, 0, m as i64, m as i64, 0, 0))
}

/// Signed representative of `x mod p` in `(−p/2, p/2)` (p odd).
pub fn center_p(x: i64, p: u64) -> i64 {
    let r = x.rem_euclid(p as i64);
    if r as u64 * 2 > p {
        r - p as i64
    } else {
        r
    }
}

fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n == p {
            return true;
        }
        if n % p == 0 {
            return false;
        }
    }
    // Deterministic Miller–Rabin for u64 with the fixed base set above.
    let d = (n - 1) >> (n - 1).trailing_zeros();
    let s = (n - 1).trailing_zeros();
    'base: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'base;
            }
        }
        return false;
    }
    true
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

fn pow_mod(mut base: u64, mut exp: u64, m: u64) -> u64 {
    let mut acc = 1u64 % m;
    base %= m;
    while exp > 0 {
        if exp & 1 == 1 {
            acc = mul_mod(acc, base, m);
        }
        base = mul_mod(base, base, m);
        exp >>= 1;
    }
    acc
}

fn least_prime_above(lower_exclusive: u64, upper_inclusive: u64) -> Option<u64> {
    (lower_exclusive + 1..=upper_inclusive).find(|&q| is_prime(q))
}

/// `⌊p^{1−1/n}⌋ = ⌊(p^{n−1})^{1/n}⌋` by integer root extraction.
fn size_threshold(p: u64, n: u32) -> u64 {
    if n <= 1 {
        return 1;
    }
    let power = (p as u128).pow(n - 1);
    power.nth_root(n) as u64
}

/// Theorem KL descent: returns `B` with `max|b| ≤ (8M)^n`, Freiman
/// isomorphic to `A` of order `M` fixing 0, plus the full step trace.
pub fn reduce_elements(a: &[i64], m: u32) -> Result<(Vec<i64>, ReductionTrace), FreimanError> {
    if m == 0 {
        return Err(FreimanError::ZeroOrder);
    }
    check_elements(a)?;
    let n = a.len() as u32;
    let target = 8u64.saturating_mul(m as u64).saturating_pow(n);
    let mut current = a.to_vec();
    let mut trace = ReductionTrace::default();
    loop {
        let ell = current.iter().map(|&x| x.unsigned_abs()).max().unwrap();
        if ell <= target {
            return Ok((current, trace));
        }
        let lower = 4 * m as u64 * ell;
        let upper = 8 * m as u64 * ell;
        let p = least_prime_above(lower, upper).expect("Bertrand guarantees a prime in (x, 2x]");
        let bound = size_threshold(p, n) as i64;
        let residues: Vec<u64> = current
            .iter()
            .map(|&x| x.rem_euclid(p as i64) as u64)
            .collect();
        let admissible = |t: u64| -> Option<Vec<i64>> {
            let mut image = Vec::with_capacity(residues.len());
            for &r in &residues {
                let c = center_p(mul_mod(t, r, p) as i64, p);
                if c.abs() > bound {
                    return None;
                }
                image.push(c);
            }
            // Degenerate images cannot occur (p > ℓ keeps residues
            // distinct and nonzero), but reject defensively.
            let mut sorted = image.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != image.len() || image.contains(&0) {
                return None;
            }
            Some(image)
        };
        // Deterministic minimum admissible t: find_first on the ordered
        // range gives the leftmost match regardless of thread schedule.
        let found = (1..p)
            .into_par_iter()
            .find_first(|&t| admissible(t).is_some());
        let Some(t) = found else {
            return Err(FreimanError::NoAdmissibleMultiplier { p, trace });
        };
        let image = admissible(t).unwrap();
        trace.steps.push(ReductionStep {
            ell,
            p,
            t,
            image: image.clone(),
            rejected: t - 1,
        });
        current = image;
    }
}

/// Elementwise absolute value; sound for Σ S_K(bx) since S_K is even.
/// Rejected when B meets −B, which would collapse two elements.
pub fn normalize_positive(b: &[i64]) -> Result<Vec<u64>, FreimanError> {
    check_elements(b)?;
    for &x in b {
        if b.contains(&-x) {
            return Err(FreimanError::SignConflict(x));
        }
    }
    Ok(b.iter().map(|&x| x.unsigned_abs()).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn dilation_is_iso_all_orders() {
        for m in 1..=5 {
            assert!(is_freiman_iso(&[1, 2], &[3, 6], m).unwrap());
        }
    }

    #[test]
    fn broken_sum_relation_detected() {
        // 1 + 2 = 3 on the left has no counterpart in {1, 2, 4}.
        assert!(!is_freiman_iso(&[1, 2, 3], &[1, 2, 4], 2).unwrap());
        assert!(is_freiman_iso(&[1, 10, 100], &[1, 4, 16], 2).unwrap());
    }

    #[test]
    fn iso_agrees_with_sum_multiset_oracle() {
        // Oracle: collect all sums of at most M elements (with repetition)
        // on each side and compare the equality patterns index-wise.
        fn oracle(a: &[i64], b: &[i64], m: u32) -> bool {
            fn sums(v: &[i64], m: u32) -> Vec<(i128, Vec<usize>)> {
                let mut out = vec![(0i128, vec![])];
                for _ in 0..m {
                    let mut next = Vec::new();
                    for (s, picks) in &out {
                        for (i, &x) in v.iter().enumerate() {
                            let mut p = picks.clone();
                            p.push(i);
                            p.sort_unstable();
                            next.push((s + x as i128, p));
                        }
                        next.push((*s, picks.clone()));
                    }
                    next.sort();
                    next.dedup();
                    out = next;
                }
                out
            }
            let sa = sums(a, m);
            let sb = sums(b, m);
            for (i, (x, px)) in sa.iter().enumerate() {
                for (y, py) in sa.iter().skip(i + 1) {
                    let left = x == y;
                    let bx: i128 = px.iter().map(|&j| b[j] as i128).sum();
                    let by: i128 = py.iter().map(|&j| b[j] as i128).sum();
                    if left != (bx == by) {
                        return false;
                    }
                }
            }
            // The pairwise ⟺ above already covers both directions, but
            // sweep the B-side sums too as a belt-and-braces check.
            for (i, (x, px)) in sb.iter().enumerate() {
                for (y, py) in sb.iter().skip(i + 1) {
                    let left = x == y;
                    let ax: i128 = px.iter().map(|&j| a[j] as i128).sum();
                    let ay: i128 = py.iter().map(|&j| a[j] as i128).sum();
                    if left != (ax == ay) {
                        return false;
                    }
                }
            }
            true
        }
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..60 {
            let n = rng.gen_range(2..=3);
            let a: Vec<i64> = sample_distinct(&mut rng, n, 30);
            let b: Vec<i64> = sample_distinct(&mut rng, n, 30);
            let m = rng.gen_range(1..=2);
            assert_eq!(
                is_freiman_iso(&a, &b, m).unwrap(),
                oracle(&a, &b, m),
                "A = {a:?}, B = {b:?}, M = {m}"
            );
        }
    }

    fn sample_distinct(rng: &mut ChaCha8Rng, n: usize, bound: i64) -> Vec<i64> {
        let mut out = Vec::new();
        while out.len() < n {
            let x = rng.gen_range(-bound..=bound);
            if x != 0 && !out.contains(&x) {
                out.push(x);
            }
        }
        out
    }

    #[test]
    fn small_set_reduces_trivially() {
        let a = vec![3i64, -7, 100];
        let (b, trace) = reduce_elements(&a, 2).unwrap();
        assert_eq!(b, a);
        assert!(trace.steps.is_empty());
    }

    #[test]
    fn reduce_two_element_dilate() {
        let (b, trace) = reduce_elements(&[1_000_000, 2_000_000], 2).unwrap();
        assert!(!trace.steps.is_empty());
        assert!(b.iter().all(|&x| x.unsigned_abs() <= 256));
        // The order-2 relation a₁ + a₁ = a₂ is preserved.
        assert_eq!(2 * b[0], b[1]);
        assert!(is_freiman_iso(&[1_000_000, 2_000_000], &b, 2).unwrap());
    }

    #[test]
    fn reduce_random_triples_and_trace_invariants() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..6 {
            let a = sample_distinct(&mut rng, 3, 10_000_000);
            let (b, trace) = reduce_elements(&a, 2).unwrap();
            assert!(b.iter().all(|&x| x.unsigned_abs() <= 4096), "A = {a:?}");
            assert!(is_freiman_iso(&a, &b, 2).unwrap(), "A = {a:?}, B = {b:?}");
            let mut prev_ell = u64::MAX;
            let mut source = a.clone();
            for step in &trace.steps {
                assert!(step.ell < prev_ell, "descent stalled");
                prev_ell = step.ell;
                assert!(4 * 2 * step.ell < step.p && step.p <= 8 * 2 * step.ell);
                assert!(is_prime(step.p));
                let recomputed: Vec<i64> = source
                    .iter()
                    .map(|&x| {
                        center_p(
                            mul_mod(step.t, x.rem_euclid(step.p as i64) as u64, step.p) as i64,
                            step.p,
                        )
                    })
                    .collect();
                assert_eq!(recomputed, step.image);
                source = step.image.clone();
            }
            assert_eq!(source, b);
        }
    }

    #[test]
    fn trace_round_trips_through_json() {
        let (_, trace) = reduce_elements(&[1_000_000, 2_000_000], 2).unwrap();
        let js = serde_json::to_string(&trace).unwrap();
        let back: ReductionTrace = serde_json::from_str(&js).unwrap();
        assert_eq!(trace, back);
    }

    #[test]
    fn normalize_examples() {
        assert_eq!(normalize_positive(&[-3, 5]).unwrap(), vec![3, 5]);
        assert_eq!(normalize_positive(&[2, 7]).unwrap(), vec![2, 7]);
        assert!(matches!(
            normalize_positive(&[3, -3]),
            Err(FreimanError::SignConflict(_))
        ));
    }

    #[test]
    fn normalization_preserves_dilated_sums() {
        // S_K is even, so replacing b by |b| leaves Σ S_K(bx) unchanged.
        let s = crate::selberg::selberg_minorant(6).unwrap();
        for j in 0..20_000u64 {
            let x = j as f64 / 20_000.0;
            let signed: f64 = [-3i64, 5]
                .iter()
                .map(|&b| s.f_form.eval((b as f64 * x).rem_euclid(1.0)))
                .sum();
            let unsigned: f64 = [3i64, 5]
                .iter()
                .map(|&b| s.f_form.eval((b as f64 * x).rem_euclid(1.0)))
                .sum();
            assert!((signed - unsigned).abs() < 1e-10, "x = {x}");
        }
    }

    #[test]
    fn primality_spot_checks() {
        let primes = [2u64, 3, 5, 97, 7919, 2_147_483_647, 999_999_000_001];
        for p in primes {
            assert!(is_prime(p), "{p}");
        }
        for c in [1u64, 4, 100, 7917, 999_999_000_003, 2_147_483_649] {
            assert!(!is_prime(c), "{c}");
        }
        assert_eq!(least_prime_above(24, 48), Some(29));
    }

    #[test]
    fn threshold_is_exact_integer_root() {
        // 10^(2/3) = 4.64…, 1000^(3/4) = 177.8…
        assert_eq!(size_threshold(10, 3), 4);
        assert_eq!(size_threshold(1000, 4), 177);
        assert_eq!(size_threshold(8, 3), 4); // exact cube: 8^(2/3) = 4
    }

    #[test]
    fn infeasible_order_rejected() {
        let a: Vec<i64> = (1..=12).collect();
        let b = a.clone();
        assert!(matches!(
            is_freiman_iso(&a, &b, 3),
            Err(FreimanError::FeasibilityExceeded(_, _))
        ));
    }
}
