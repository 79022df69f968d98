//! The exact `f_A` engine.
//!
//! `f(x) = 1_{[1/3,2/3)}(x) - 1/3` and `f_A(x) = Σ_{a∈A} f(ax)`, so
//! `f_A(x) = #{a : frac(ax) ∈ [1/3, 2/3)} - n/3`. The function is a
//! right-continuous step function whose jumps sit at `(3k±1)/(3a)`,
//! `a ∈ A`, so the exact maximum `m_A` is attained at 0 or at one of
//! those breakpoints. All candidate evaluations are pure integer
//! arithmetic: for `x = num/den`, `frac(ax) ∈ [1/3, 2/3)` iff
//! `den ≤ 3·(a·num mod den) < 2·den`.

use crate::circle::CirclePoint;
use crate::rational::ExactRational;
use num::integer::{gcd, lcm};
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const DEFAULT_SUM_FREE_LIMIT: usize = 20;

#[derive(Debug, thiserror::Error, PartialEq, Eq)]
pub enum StepError {
    #[error("set must be nonempty")]
    EmptySet,
    #[error("elements must be positive")]
    ZeroElement,
    #[error("duplicate element {0}")]
    DuplicateElement(u64),
    #[error("set of size {0} too large for exact search (limit {1})")]
    TooLargeForExactSearch(usize, usize),
    #[error("grid {0} too coarse, need at least {1}")]
    GridTooCoarse(u64, u64),
    #[error("malformed set literal: {0:?}")]
    BadLiteral(String),
}

/// A finite set of distinct positive integers with cached gcd and the
/// mod-3 split `A = A₀ ∪ A₁` (`A₀` coprime to 3, `A₁` divisible by 3).
#[derive(Clone, PartialEq, Eq, Debug, Serialize, Deserialize)]
pub struct IntegerSet {
    elements: Vec<u64>,
    gcd: u64,
    a0: Vec<u64>,
    a1: Vec<u64>,
}

impl IntegerSet {
    pub fn new(mut elements: Vec<u64>) -> Result<Self, StepError> {
        if elements.iter().any(|&e| e == 0) {
            return Err(StepError::ZeroElement);
        }
        elements.sort_unstable();
        for w in elements.windows(2) {
            if w[0] == w[1] {
                return Err(StepError::DuplicateElement(w[0]));
            }
        }
        let g = elements.iter().copied().fold(0u64, gcd);
        let (a1, a0): (Vec<u64>, Vec<u64>) = elements.iter().partition(|&&e| e % 3 == 0);
        Ok(IntegerSet {
            elements,
            gcd: g,
            a0,
            a1,
        })
    }

    pub fn parse(text: &str) -> Result<Self, StepError> {
        let elems: Result<Vec<u64>, _> = text
            .split(',')
            .map(|t| {
                t.trim()
                    .parse::<u64>()
                    .map_err(|_| StepError::BadLiteral(text.to_owned()))
            })
            .collect();
        Self::new(elems?)
    }

    pub fn elements(&self) -> &[u64] {
        &self.elements
    }

    pub fn len(&self) -> usize {
        self.elements.len()
    }

    pub fn is_empty(&self) -> bool {
        self.elements.is_empty()
    }

    pub fn gcd(&self) -> u64 {
        self.gcd
    }

    pub fn contains(&self, e: u64) -> bool {
        self.elements.binary_search(&e).is_ok()
    }

    /// Elements coprime to 3.
    pub fn a0(&self) -> &[u64] {
        &self.a0
    }

    /// Elements divisible by 3.
    pub fn a1(&self) -> &[u64] {
        &self.a1
    }

    pub fn max(&self) -> u64 {
        self.elements.last().copied().unwrap_or(0)
    }

    pub fn dilate(&self, d: u64) -> Result<Self, StepError> {
        if d == 0 {
            return Err(StepError::ZeroElement);
        }
        Self::new(self.elements.iter().map(|&e| e * d).collect())
    }
}

impl std::fmt::Display for IntegerSet {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.elements.iter().map(|e| e.to_string()).collect();
        write!(f, "{{{}}}", parts.join(","))
    }
}

/// `f(x) = 2/3` on `[1/3, 2/3)`, `-1/3` elsewhere.
pub fn eval_f(x: &CirclePoint) -> ExactRational {
    let third = ExactRational::new(1, 3);
    let two_thirds = ExactRational::new(2, 3);
    if *x.value() >= third && *x.value() < two_thirds {
        two_thirds
    } else {
        -third
    }
}

/// `f_A(x) = Σ_{a∈A} f(frac(ax))`.
pub fn eval_fa(set: &IntegerSet, x: &CirclePoint) -> ExactRational {
    let mut total = ExactRational::zero();
    for &a in set.elements() {
        total += &eval_f(&x.dilate(a));
    }
    total
}

/// Count of `a ∈ elements` with `frac(a · num/den) ∈ [1/3, 2/3)`.
/// Pure integer arithmetic; the workhorse of every sweep.
#[inline]
pub fn middle_third_count(elements: &[u64], num: u64, den: u64) -> u32 {
    debug_assert!(den > 0);
    let mut count = 0u32;
    for &a in elements {
        let r = ((a as u128 * num as u128) % den as u128) as u64;
        let r3 = 3 * r;
        if r3 >= den && r3 < 2 * den {
            count += 1;
        }
    }
    count
}

/// Maximum of `#{a : frac(ax) ∈ [1/3, 2/3)}` over the breakpoint grid
/// (and 0), without collecting witnesses. `m_A = max_count - n/3`.
pub fn max_count(elements: &[u64]) -> u32 {
    let mut best = 0u32;
    for &a in elements {
        let den = 3 * a;
        let mut num = 1;
        while num < den {
            if num % 3 != 0 {
                let c = middle_third_count(elements, num, den);
                if c > best {
                    best = c;
                }
            }
            num += 1;
        }
    }
    best
}

/// `m` from a middle-third count: `(3·count - n)/3`.
pub fn m_from_count(count: u32, n: usize) -> ExactRational {
    ExactRational::new(3 * count as i64 - n as i64, 3)
}

/// The exact maximum `m_A` with every argmax breakpoint as a witness.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MaxResult {
    pub m: ExactRational,
    pub witnesses: Vec<CirclePoint>,
}

/// Exact `m_A = max_x f_A(x)` by breakpoint enumeration.
pub fn max_fa(set: &IntegerSet) -> Result<MaxResult, StepError> {
    if set.is_empty() {
        return Err(StepError::EmptySet);
    }
    let elements = set.elements();
    let n = elements.len();
    let mut best = 0u32; // count at x = 0: every frac is 0, outside [1/3, 2/3)
    let mut witnesses: BTreeSet<(u64, u64)> = BTreeSet::new();
    witnesses.insert((0, 1));
    for &a in elements {
        let den = 3 * a;
        for num in 1..den {
            if num % 3 == 0 {
                continue;
            }
            let c = middle_third_count(elements, num, den);
            if c > best {
                best = c;
                witnesses.clear();
            }
            if c == best {
                let g = gcd(num, den);
                witnesses.insert((num / g, den / g));
            }
        }
    }
    let witnesses = witnesses
        .into_iter()
        .map(|(p, q)| CirclePoint::frac(&(ExactRational::from(p) / ExactRational::from(q))))
        .collect();
    Ok(MaxResult {
        m: m_from_count(best, n),
        witnesses,
    })
}

/// Independent oracle: evaluate `f_A` on the full grid `j/(3·lcm(A))`,
/// where the step function is constant between consecutive grid points.
/// Returns `None` when the lcm exceeds `lcm_limit`.
pub fn lcm_grid_max(set: &IntegerSet, lcm_limit: u64) -> Option<ExactRational> {
    let mut l = 1u64;
    for &a in set.elements() {
        l = lcm(l, a);
        if l > lcm_limit {
            return None;
        }
    }
    let den = 3 * l;
    let best = (0..den)
        .map(|num| middle_third_count(set.elements(), num, den))
        .max()
        .unwrap_or(0);
    Some(m_from_count(best, set.len()))
}

/// The largest sum-free subset (`x + y = z` forbidden, `x = y` allowed).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SumFreeResult {
    pub size: usize,
    pub witness: Vec<u64>,
}

pub fn is_sum_free(elements: &[u64]) -> bool {
    for (i, &z) in elements.iter().enumerate() {
        for &x in &elements[..=i] {
            if z > x && elements.binary_search(&(z - x)).is_ok() {
                return false;
            }
        }
    }
    true
}

/// Exact `s(A)` by depth-first subset search with branch-and-bound
/// pruning; ties resolved to the lexicographically smallest witness by
/// the include-first, ascending-element visit order.
pub fn largest_sum_free(set: &IntegerSet) -> Result<SumFreeResult, StepError> {
    largest_sum_free_with_limit(set, DEFAULT_SUM_FREE_LIMIT)
}

pub fn largest_sum_free_with_limit(
    set: &IntegerSet,
    limit: usize,
) -> Result<SumFreeResult, StepError> {
    if set.len() > limit {
        return Err(StepError::TooLargeForExactSearch(set.len(), limit));
    }
    let elements = set.elements();
    let mut best: Vec<u64> = Vec::new();
    let mut chosen: Vec<u64> = Vec::new();
    fn dfs(elements: &[u64], idx: usize, chosen: &mut Vec<u64>, best: &mut Vec<u64>) {
        if chosen.len() + (elements.len() - idx) <= best.len() {
            return;
        }
        if idx == elements.len() {
            if chosen.len() > best.len() {
                *best = chosen.clone();
            }
            return;
        }
        let e = elements[idx];
        // Elements arrive ascending, so the only new relation an inclusion
        // can create is e = s1 + s2 with s1, s2 already chosen.
        let ok = !chosen
            .iter()
            .any(|&s| e > s && chosen.binary_search(&(e - s)).is_ok());
        if ok {
            chosen.push(e);
            dfs(elements, idx + 1, chosen, best);
            chosen.pop();
        }
        dfs(elements, idx + 1, chosen, best);
    }
    dfs(elements, 0, &mut chosen, &mut best);
    debug_assert!(is_sum_free(&best));
    Ok(SumFreeResult {
        size: best.len(),
        witness: best,
    })
}

/// The mod-3 split `(A₀, A₁, B)` with `B = A₁ / 3` elementwise.
pub fn decompose3(set: &IntegerSet) -> (IntegerSet, IntegerSet, IntegerSet) {
    let a0 = IntegerSet::new(set.a0().to_vec()).unwrap();
    let a1 = IntegerSet::new(set.a1().to_vec()).unwrap();
    let b = IntegerSet::new(set.a1().iter().map(|&e| e / 3).collect()).unwrap();
    (a0, a1, b)
}

/// The two reduction bounds: `m_A ≥ |A₀|/6 - |A₁|/3` and `m_A ≥ m_{A₁}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ReductionBounds {
    /// `|A₀|/6 - |A₁|/3`.
    pub lem1: ExactRational,
    /// `m_A ≥ m_{A₁}`, verified exactly; vacuously true when `A₁ = ∅`.
    pub lem2_holds: bool,
}

pub fn reduction_bounds(set: &IntegerSet) -> Result<ReductionBounds, StepError> {
    if set.is_empty() {
        return Err(StepError::EmptySet);
    }
    let lem1 = ExactRational::new(set.a0().len() as i64, 6)
        - ExactRational::new(set.a1().len() as i64, 3);
    let lem2_holds = if set.a1().is_empty() {
        true
    } else {
        let a1 = IntegerSet::new(set.a1().to_vec())?;
        max_fa(set)?.m >= max_fa(&a1)?.m
    };
    Ok(ReductionBounds { lem1, lem2_holds })
}

/// The descent chain `A = C₀, C₁, …`: divide out any common factor,
/// otherwise replace `C` by `C₁/3`; stop when the divisible-by-3 part is
/// empty or the next set falls below `base_size`. Along the chain
/// `m_{C₀} ≥ m_{C₁} ≥ …` (dilation invariance plus `m_A ≥ m_{A₁}`).
pub fn reduce_chain(set: &IntegerSet, base_size: usize) -> Vec<IntegerSet> {
    let mut chain = vec![set.clone()];
    loop {
        let cur = chain.last().unwrap();
        let next = if cur.gcd() > 1 {
            let g = cur.gcd();
            IntegerSet::new(cur.elements().iter().map(|&e| e / g).collect()).unwrap()
        } else {
            let a1 = cur.a1();
            if a1.is_empty() {
                break;
            }
            IntegerSet::new(a1.iter().map(|&e| e / 3).collect()).unwrap()
        };
        if next.len() < base_size || next == *cur {
            break;
        }
        chain.push(next);
    }
    chain
}

/// Trapezoid approximation of `∫₀¹ |Σ_{a∈A} cos(2πax)| dx`. Diagnostic
/// only; the endpoints coincide by periodicity so this is the grid mean.
pub fn l1_cosine_norm(set: &IntegerSet, grid: u64) -> Result<f64, StepError> {
    if set.is_empty() {
        return Ok(0.0);
    }
    let need = 64 * set.max();
    if grid < need {
        return Err(StepError::GridTooCoarse(grid, need));
    }
    let mut total = 0.0f64;
    for j in 0..grid {
        let x = j as f64 / grid as f64;
        let s: f64 = set
            .elements()
            .iter()
            .map(|&a| (2.0 * std::f64::consts::PI * a as f64 * x).cos())
            .sum();
        total += s.abs();
    }
    Ok(total / grid as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circle::rat;

    fn set(elems: &[u64]) -> IntegerSet {
        IntegerSet::new(elems.to_vec()).unwrap()
    }

    fn point(n: i64, d: i64) -> CirclePoint {
        CirclePoint::frac(&rat(n, d))
    }

    #[test]
    fn eval_f_endpoints() {
        assert_eq!(eval_f(&point(0, 1)), rat(-1, 3));
        assert_eq!(eval_f(&point(1, 3)), rat(2, 3));
        assert_eq!(eval_f(&point(2, 3)), rat(-1, 3));
        assert_eq!(eval_f(&point(1, 2)), rat(2, 3));
    }

    #[test]
    fn eval_fa_examples() {
        let a = set(&[1, 2, 3, 4]);
        assert_eq!(eval_fa(&a, &point(0, 1)), rat(-4, 3));
        // frac values at 9/20: 9/20, 9/10, 7/20, 4/5 — exactly two inside.
        assert_eq!(eval_fa(&a, &point(9, 20)), rat(2, 3));
        // {2,5,10,16} at 13/48: 13/24, 17/48, 1/3 in; 34/48 out.
        let b = set(&[2, 5, 10, 16]);
        assert_eq!(eval_fa(&b, &point(13, 48)), rat(5, 3));
    }

    #[test]
    fn eval_fa_matches_count_kernel() {
        let a = set(&[2, 5, 10, 16]);
        for den in 1u64..=40 {
            for num in 0..den {
                let by_eval = eval_fa(&a, &point(num as i64, den as i64));
                let by_count =
                    m_from_count(middle_third_count(a.elements(), num, den), a.len());
                assert_eq!(by_eval, by_count, "x = {num}/{den}");
            }
        }
    }

    #[test]
    fn max_fa_known_values() {
        assert_eq!(max_fa(&set(&[1])).unwrap().m, rat(2, 3));
        assert_eq!(max_fa(&set(&[1, 5, 8])).unwrap().m, rat(1, 1));
        assert_eq!(max_fa(&set(&[2, 3, 10])).unwrap().m, rat(1, 1));
        assert_eq!(max_fa(&set(&[1, 2, 3, 4])).unwrap().m, rat(2, 3));
        assert_eq!(max_fa(&set(&[1, 2, 4, 5])).unwrap().m, rat(2, 3));
        assert_eq!(max_fa(&set(&[1, 2])).unwrap().m, rat(1, 3));
        assert_eq!(
            max_fa(&set(&[1, 2, 3, 4, 5, 6, 8, 9, 10, 18])).unwrap().m,
            rat(2, 3)
        );
        assert_eq!(max_fa(&IntegerSet::new(vec![]).unwrap()), Err(StepError::EmptySet));
    }

    #[test]
    fn max_fa_witnesses_achieve_m() {
        let a = set(&[1, 5, 8]);
        let res = max_fa(&a).unwrap();
        assert!(res.witnesses.iter().any(|_| true));
        for w in &res.witnesses {
            assert_eq!(eval_fa(&a, w), res.m);
        }
        let single = max_fa(&set(&[1])).unwrap();
        assert!(single.witnesses.contains(&point(1, 3)));
    }

    #[test]
    fn max_fa_agrees_with_lcm_grid() {
        for elems in [
            vec![1, 2],
            vec![1, 5, 8],
            vec![2, 5, 10, 16],
            vec![3, 6, 9],
            vec![7, 11, 13],
            vec![1, 2, 3, 4, 5, 6],
        ] {
            let a = set(&elems);
            let grid = lcm_grid_max(&a, 100_000).unwrap();
            assert_eq!(max_fa(&a).unwrap().m, grid, "A = {a}");
        }
    }

    #[test]
    fn sum_free_examples() {
        let r = largest_sum_free(&set(&[1, 2])).unwrap();
        assert_eq!(r.size, 1);
        let r = largest_sum_free(&set(&[1, 2, 3])).unwrap();
        assert_eq!(r.size, 2);
        assert!(is_sum_free(&r.witness));
        let r = largest_sum_free(&set(&[1, 3, 5, 7])).unwrap();
        assert_eq!(r.size, 4);
        assert_eq!(r.witness, vec![1, 3, 5, 7]);
    }

    #[test]
    fn sum_free_counts_x_equals_y() {
        // {a, 2a} is never sum-free: a + a = 2a.
        assert!(!is_sum_free(&[3, 6]));
        assert_eq!(largest_sum_free(&set(&[3, 6])).unwrap().size, 1);
    }

    #[test]
    fn sum_free_brute_force_oracle() {
        // Exhaustive bitmask enumeration over small sets.
        for elems in [
            vec![1, 2, 3],
            vec![1, 2, 3, 4, 5],
            vec![2, 4, 6, 8, 10, 12],
            vec![1, 4, 9, 16, 25],
        ] {
            let a = set(&elems);
            let mut best = 0usize;
            for mask in 0u32..(1 << elems.len()) {
                let subset: Vec<u64> = (0..elems.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| a.elements()[i])
                    .collect();
                if is_sum_free(&subset) {
                    best = best.max(subset.len());
                }
            }
            assert_eq!(largest_sum_free(&a).unwrap().size, best, "A = {a}");
        }
    }

    #[test]
    fn sum_free_limit_enforced() {
        let a = set(&(1..=21).collect::<Vec<u64>>());
        assert!(matches!(
            largest_sum_free(&a),
            Err(StepError::TooLargeForExactSearch(21, 20))
        ));
    }

    #[test]
    fn decompose3_examples() {
        let (a0, a1, b) = decompose3(&set(&[1, 2, 3, 6]));
        assert_eq!(a0.elements(), &[1, 2]);
        assert_eq!(a1.elements(), &[3, 6]);
        assert_eq!(b.elements(), &[1, 2]);

        let (a0, a1, b) = decompose3(&set(&[3, 9]));
        assert!(a0.is_empty());
        assert_eq!(a1.elements(), &[3, 9]);
        assert_eq!(b.elements(), &[1, 3]);

        let (_, a1, _) = decompose3(&set(&[1, 2]));
        assert!(a1.is_empty());
    }

    #[test]
    fn reduction_bounds_examples() {
        let r = reduction_bounds(&set(&[1, 2, 3, 6])).unwrap();
        assert_eq!(r.lem1, rat(-1, 3));
        assert!(r.lem2_holds);
        // m_{{3,6}} = m_{{1,2}} = 1/3 by dilation invariance.
        assert_eq!(max_fa(&set(&[3, 6])).unwrap().m, rat(1, 3));

        let r = reduction_bounds(&set(&[1, 2, 4])).unwrap();
        assert_eq!(r.lem1, rat(3, 6));
        assert!(r.lem2_holds);

        assert_eq!(
            max_fa(&set(&[3, 6, 9])).unwrap().m,
            max_fa(&set(&[1, 2, 3])).unwrap().m
        );
    }

    #[test]
    fn reduce_chain_examples() {
        let chain = reduce_chain(&set(&[1, 2]), 2);
        assert_eq!(chain, vec![set(&[1, 2])]);

        let chain = reduce_chain(&set(&[1, 3, 6]), 2);
        assert_eq!(chain, vec![set(&[1, 3, 6]), set(&[1, 2])]);

        let chain = reduce_chain(&set(&[1, 9, 18, 27]), 2);
        assert_eq!(
            chain,
            vec![set(&[1, 9, 18, 27]), set(&[3, 6, 9]), set(&[1, 2, 3])]
        );
        // m nonincreasing along the chain.
        let ms: Vec<ExactRational> =
            chain.iter().map(|c| max_fa(c).unwrap().m).collect();
        for w in ms.windows(2) {
            assert!(w[0] >= w[1]);
        }
    }

    #[test]
    fn three_point_identity() {
        // f_A(x) + f_A(x+1/3) + f_A(x+2/3) = 3 f_{A₁}(x).
        let a = set(&[1, 2, 3, 5, 6, 9]);
        let (_, a1, _) = decompose3(&a);
        let third = rat(1, 3);
        let two_thirds = rat(2, 3);
        for den in 1i64..=30 {
            for num in 0..den {
                let x = point(num, den);
                let lhs = eval_fa(&a, &x)
                    + eval_fa(&a, &x.translate(&third))
                    + eval_fa(&a, &x.translate(&two_thirds));
                let rhs = ExactRational::from_int(3) * eval_fa(&a1, &x);
                assert_eq!(lhs, rhs, "x = {num}/{den}");
            }
        }
    }

    #[test]
    fn l1_norm_examples() {
        let a = set(&[1]);
        let v = l1_cosine_norm(&a, 1 << 21).unwrap();
        assert!((v - 2.0 / std::f64::consts::PI).abs() < 1e-6, "got {v}");

        let v2 = l1_cosine_norm(&set(&[1, 2]), 1 << 21).unwrap();
        assert!(v2 >= 2.0 / std::f64::consts::PI - 1e-6);

        assert_eq!(
            l1_cosine_norm(&IntegerSet::new(vec![]).unwrap(), 8).unwrap(),
            0.0
        );
        assert!(matches!(
            l1_cosine_norm(&set(&[100]), 100),
            Err(StepError::GridTooCoarse(100, 6400))
        ));
    }
}
