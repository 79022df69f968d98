//! Selberg minorant machinery: Fejér kernel `Δ_K`, Vaaler polynomial
//! `V_K`, the sawtooth majorant `B_K = V_K + Δ_{K+1}/(2(K+1))`, and the
//! minorant
//!
//! `S_K(x) = 1/3 − B_K(2/3 − x) − B_K(x − 1/3)`
//!
//! of the middle-third indicator. Two forms are kept: `indicator_form`
//! (the display above, a minorant of `1_{[1/3,2/3)}`) and
//! `f_form = indicator_form − 1/3`, the minorant of `f` that every
//! downstream bound actually uses — the two differ by the constant the
//! centering of `f` absorbs, and only the latter can satisfy `S ≤ f`.
//!
//! Extrema of trigonometric polynomials are certified by dense scans and
//! grid refinement with the Lipschitz bound `L = 2π Σ k(|a_k| + |b_k|)`;
//! this layer works in doubles, with the certificate radius quantifying
//! the grid resolution (not the floating-point roundoff).

use crate::circle::{bohr_set, CircleError, IntervalSet};
use crate::rational::ExactRational;
use crate::step::IntegerSet;
use std::f64::consts::TAU;

#[derive(Debug, thiserror::Error)]
pub enum SelbergError {
    #[error("K must be at least 1")]
    ZeroK,
    #[error("minorant violated at x = {x}: f_form = {minorant} > f = {f}")]
    MinorantViolated { x: f64, minorant: f64, f: f64 },
    #[error("degree {0} exceeds limit {1}")]
    DegreeLimitExceeded(u64, u64),
    #[error("quadrature needs {0} nodes, above limit {1}")]
    QuadratureLimitExceeded(u64, u64),
    #[error(transparent)]
    Circle(#[from] CircleError),
}

pub const DEGREE_LIMIT: u64 = 1_000_000;
pub const QUADRATURE_NODE_LIMIT: u64 = 50_000_000;

/// A real trigonometric polynomial `Σ_k (a_k cos(2πkx) + b_k sin(2πkx))`
/// with dense double-precision coefficient storage.
#[derive(Clone, Debug, PartialEq)]
pub struct TrigPoly {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        TrigPoly {
            cos: vec![0.0; degree + 1],
            sin: vec![0.0; degree + 1],
        }
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly {
            cos: vec![c],
            sin: vec![0.0],
        }
    }

    pub fn degree(&self) -> usize {
        self.cos.len() - 1
    }

    pub fn cos_coeff(&self, k: usize) -> f64 {
        self.cos.get(k).copied().unwrap_or(0.0)
    }

    pub fn sin_coeff(&self, k: usize) -> f64 {
        self.sin.get(k).copied().unwrap_or(0.0)
    }

    pub fn set_cos(&mut self, k: usize, v: f64) {
        self.grow(k);
        self.cos[k] = v;
    }

    pub fn set_sin(&mut self, k: usize, v: f64) {
        self.grow(k);
        self.sin[k] = v;
    }

    fn grow(&mut self, k: usize) {
        if k >= self.cos.len() {
            self.cos.resize(k + 1, 0.0);
            self.sin.resize(k + 1, 0.0);
        }
    }

    /// Evaluation by the angle-addition recurrence: one `sin_cos` call per
    /// point regardless of degree.
    pub fn eval(&self, x: f64) -> f64 {
        let (s1, c1) = (TAU * x).sin_cos();
        let mut ck = 1.0; // cos(2πkx), k = 0
        let mut sk = 0.0;
        let mut total = self.cos[0];
        for k in 1..self.cos.len() {
            let next_c = c1 * ck - s1 * sk;
            let next_s = s1 * ck + c1 * sk;
            ck = next_c;
            sk = next_s;
            total += self.cos[k] * ck + self.sin[k] * sk;
        }
        total
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let d = self.degree().max(other.degree());
        let mut out = TrigPoly::zero(d);
        for k in 0..=d {
            out.cos[k] = self.cos_coeff(k) + other.cos_coeff(k);
            out.sin[k] = self.sin_coeff(k) + other.sin_coeff(k);
        }
        out
    }

    pub fn scale(&self, s: f64) -> TrigPoly {
        TrigPoly {
            cos: self.cos.iter().map(|c| c * s).collect(),
            sin: self.sin.iter().map(|c| c * s).collect(),
        }
    }

    /// Product via the complex-exponential convolution
    /// `c_k = (a_k − i b_k)/2`, `c_{−k} = conj(c_k)`.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let (da, db) = (self.degree() as i64, other.degree() as i64);
        let d = (da + db) as usize;
        let coeff = |p: &TrigPoly, k: i64| -> (f64, f64) {
            let m = k.unsigned_abs() as usize;
            if m > p.degree() {
                return (0.0, 0.0);
            }
            if k == 0 {
                (p.cos[0], 0.0)
            } else if k > 0 {
                (p.cos[m] / 2.0, -p.sin[m] / 2.0)
            } else {
                (p.cos[m] / 2.0, p.sin[m] / 2.0)
            }
        };
        let mut re = vec![0.0; 2 * d + 1];
        let mut im = vec![0.0; 2 * d + 1];
        for j in -da..=da {
            let (ar, ai) = coeff(self, j);
            if ar == 0.0 && ai == 0.0 {
                continue;
            }
            for k in -db..=db {
                let (br, bi) = coeff(other, k);
                if br == 0.0 && bi == 0.0 {
                    continue;
                }
                let idx = (j + k + d as i64) as usize;
                re[idx] += ar * br - ai * bi;
                im[idx] += ar * bi + ai * br;
            }
        }
        let mut out = TrigPoly::zero(d);
        out.cos[0] = re[d];
        for k in 1..=d {
            // c_k + c_{−k} contributions; the polynomial is real.
            out.cos[k] = re[d + k] + re[d - k];
            out.sin[k] = im[d - k] - im[d + k];
        }
        out
    }

    /// Substitute `x ↦ sign·x + shift` (`sign = ±1`).
    pub fn compose_linear(&self, sign: i8, shift: f64) -> TrigPoly {
        let eps = sign as f64;
        let mut out = TrigPoly::zero(self.degree());
        out.cos[0] = self.cos[0];
        for k in 1..self.cos.len() {
            let (s, c) = (TAU * k as f64 * shift).sin_cos();
            out.cos[k] = self.cos[k] * c + self.sin[k] * s;
            out.sin[k] = eps * (self.sin[k] * c - self.cos[k] * s);
        }
        out
    }

    /// Substitute `x ↦ ux`: frequency scaling.
    pub fn dilate(&self, u: u64) -> TrigPoly {
        let mut out = TrigPoly::zero(self.degree() * u as usize);
        for k in 0..self.cos.len() {
            out.cos[k * u as usize] += self.cos[k];
            out.sin[k * u as usize] += self.sin[k];
        }
        out
    }

    pub fn lipschitz_bound(&self) -> f64 {
        TAU * self
            .cos
            .iter()
            .zip(&self.sin)
            .enumerate()
            .map(|(k, (a, b))| k as f64 * (a.abs() + b.abs()))
            .sum::<f64>()
    }

    /// Largest frequency with a coefficient above `threshold`.
    pub fn support(&self, threshold: f64) -> usize {
        (0..self.cos.len())
            .rev()
            .find(|&k| self.cos[k].abs() > threshold || self.sin[k].abs() > threshold)
            .unwrap_or(0)
    }

    pub fn max_sin_abs(&self) -> f64 {
        self.sin.iter().fold(0.0, |m, s| m.max(s.abs()))
    }

    /// Zero out coefficients with magnitude at most `threshold` above
    /// frequency `cutoff`.
    pub fn truncate_above(&mut self, cutoff: usize, threshold: f64) {
        for k in (cutoff + 1)..self.cos.len() {
            if self.cos[k].abs() <= threshold {
                self.cos[k] = 0.0;
            }
            if self.sin[k].abs() <= threshold {
                self.sin[k] = 0.0;
            }
        }
    }
}

/// The Fejér kernel `Δ_K(x) = Σ_{|k|≤K} (1 − |k|/K) e(kx)`
/// `= 1 + 2 Σ_{k<K} (1 − k/K) cos(2πkx)`: nonnegative, mean 1, peak `K`.
pub fn fejer(big_k: u64) -> Result<TrigPoly, SelbergError> {
    if big_k == 0 {
        return Err(SelbergError::ZeroK);
    }
    let k = big_k as usize;
    let mut p = TrigPoly::zero(k.saturating_sub(1));
    p.cos[0] = 1.0;
    for j in 1..k {
        p.cos[j] = 2.0 * (1.0 - j as f64 / big_k as f64);
    }
    Ok(p)
}

/// The Vaaler polynomial, the degree-limited approximation to the
/// sawtooth `ψ(x) = frac(x) − 1/2`:
///
/// `V_K(x) = (1/(K+1)) Σ_{k=1}^K (k/(K+1) − 1/2) Δ_{K+1}(x − k/(K+1))`
/// `        + sin(2π(K+1)x)/(2π(K+1)) − Δ_{K+1}(x) sin(2πx)/(2π)`.
pub fn vaaler(big_k: u64) -> Result<TrigPoly, SelbergError> {
    if big_k == 0 {
        return Err(SelbergError::ZeroK);
    }
    let kp1 = big_k + 1;
    let delta = fejer(kp1)?;
    let mut v = TrigPoly::zero(kp1 as usize);
    for k in 1..=big_k {
        let weight = (k as f64 / kp1 as f64 - 0.5) / kp1 as f64;
        let shifted = delta.compose_linear(1, -(k as f64) / kp1 as f64);
        v = v.add(&shifted.scale(weight));
    }
    let mut sine_term = TrigPoly::zero(kp1 as usize);
    sine_term.set_sin(kp1 as usize, 1.0 / (TAU * kp1 as f64));
    v = v.add(&sine_term);
    let mut sin_x = TrigPoly::zero(1);
    sin_x.set_sin(1, 1.0);
    v = v.add(&delta.mul(&sin_x).scale(-1.0 / TAU));
    Ok(v)
}

/// A certified extremum: the true value lies within `certified_radius`
/// of `value`, by the Lipschitz bound at the final grid step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtremumResult {
    pub value: f64,
    pub argmax: f64,
    pub certified_radius: f64,
}

/// Certified global maximum of an arbitrary degree-`D` 1-periodic
/// evaluator: dense scan at ≥ 8(D+1) points, then local grid refinement
/// around the leading candidates until `L·h/2` reaches `target_radius`.
pub fn certified_max_fn(
    eval: &dyn Fn(f64) -> f64,
    degree: u64,
    lipschitz: f64,
    target_radius: f64,
) -> ExtremumResult {
    let n = (8 * (degree + 1)).max(4096);
    let h0 = 1.0 / n as f64;
    let mut candidates: Vec<(f64, f64)> = Vec::new(); // (value, x)
    for j in 0..n {
        let x = j as f64 * h0;
        let v = eval(x);
        candidates.push((v, x));
    }
    candidates.sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap());
    candidates.truncate(4);

    let mut best_v = candidates[0].0;
    let mut best_x = candidates[0].1;
    let mut h = h0;
    for round in 0..64 {
        if lipschitz * h / 2.0 <= target_radius {
            break;
        }
        let targets: Vec<(f64, f64)> = if round == 0 {
            candidates.clone()
        } else {
            vec![(best_v, best_x)]
        };
        let mut improved = (best_v, best_x);
        for &(_, cx) in &targets {
            for j in 0..=64 {
                let x = cx - h + j as f64 * (2.0 * h / 64.0);
                let v = eval(x.rem_euclid(1.0));
                if v > improved.0 {
                    improved = (v, x.rem_euclid(1.0));
                }
            }
        }
        best_v = improved.0;
        best_x = improved.1;
        h /= 32.0;
    }
    ExtremumResult {
        value: best_v,
        argmax: best_x,
        certified_radius: lipschitz * h / 2.0,
    }
}

/// Certified (max, min) of a trigonometric polynomial.
pub fn global_extrema(p: &TrigPoly) -> (ExtremumResult, ExtremumResult) {
    let lipschitz = p.lipschitz_bound();
    let target = 1e-10;
    let max = certified_max_fn(&|x| p.eval(x), p.degree() as u64, lipschitz, target);
    let neg_min = certified_max_fn(&|x| -p.eval(x), p.degree() as u64, lipschitz, target);
    (
        max,
        ExtremumResult {
            value: -neg_min.value,
            argmax: neg_min.argmax,
            certified_radius: neg_min.certified_radius,
        },
    )
}

/// The Selberg minorant pair for one value of `K`.
#[derive(Clone, Debug)]
pub struct SelbergPoly {
    pub k: u64,
    /// The displayed minorant of the indicator `1_{[1/3,2/3)}`.
    pub indicator_form: TrigPoly,
    /// `indicator_form − 1/3`, the minorant of `f` used downstream.
    pub f_form: TrigPoly,
    /// `−(certified global minimum of f_form)`, so `f_form + m_K ≥ 0`.
    pub m_k: f64,
    /// Largest frequency carrying a coefficient above 1e−12.
    pub reported_support: usize,
}

impl SelbergPoly {
    /// Σ_a f_form(a·x), evaluated without materializing the dilated sum.
    pub fn dilated_sum_eval(&self, set: &IntegerSet, x: f64) -> f64 {
        set.elements()
            .iter()
            .map(|&a| self.f_form.eval((a as f64 * x).rem_euclid(1.0)))
            .sum()
    }
}

/// Build `S_K`, validate the minorant and support properties, and
/// certify `m_K`. Construction failures carry the violating point.
pub fn selberg_minorant(big_k: u64) -> Result<SelbergPoly, SelbergError> {
    if big_k == 0 {
        return Err(SelbergError::ZeroK);
    }
    let kp1 = big_k + 1;
    let b = vaaler(big_k)?.add(&fejer(kp1)?.scale(1.0 / (2.0 * kp1 as f64)));
    let indicator = TrigPoly::constant(1.0 / 3.0)
        .add(&b.compose_linear(-1, 2.0 / 3.0).scale(-1.0))
        .add(&b.compose_linear(1, -1.0 / 3.0).scale(-1.0));
    let mut f_form = indicator.clone();
    f_form.cos[0] -= 1.0 / 3.0;
    // The K+1 sine pieces of the construction cancel; drop the numeric
    // dust they leave so the reported support is honest.
    f_form.truncate_above(big_k as usize, 1e-12);
    let mut indicator_form = indicator;
    indicator_form.truncate_above(big_k as usize, 1e-12);

    // Minorant check: grid divisible by 3 puts the jumps of f on cell
    // boundaries; 1e-9 slack covers evaluation roundoff.
    let grid = 3 * 1024 * kp1;
    for j in 0..grid {
        let x = j as f64 / grid as f64;
        let fv = f_step(x);
        let mv = f_form.eval(x);
        if mv > fv + 1e-9 {
            return Err(SelbergError::MinorantViolated {
                x,
                minorant: mv,
                f: fv,
            });
        }
    }

    let (_, min) = global_extrema(&f_form);
    // Certified lower bound on the global minimum.
    let m_k = -(min.value - min.certified_radius);
    let reported_support = f_form.support(1e-12);
    Ok(SelbergPoly {
        k: big_k,
        indicator_form,
        f_form,
        m_k,
        reported_support,
    })
}

/// `f` as a double: `2/3` on `[1/3, 2/3)`, `−1/3` elsewhere.
pub fn f_step(x: f64) -> f64 {
    let x = x.rem_euclid(1.0);
    if (1.0 / 3.0..2.0 / 3.0).contains(&x) {
        2.0 / 3.0
    } else {
        -1.0 / 3.0
    }
}

/// Certified global max of `Σ_{a∈A} f_form(ax)` — the quantity the
/// finite verification of the minorant route maximizes.
pub fn dilated_sum_max(
    selberg: &SelbergPoly,
    set: &IntegerSet,
    target_radius: f64,
) -> Result<ExtremumResult, SelbergError> {
    let degree = selberg.k * set.max();
    if degree > DEGREE_LIMIT {
        return Err(SelbergError::DegreeLimitExceeded(degree, DEGREE_LIMIT));
    }
    // L(Σ_a f_form(a·)) ≤ (Σ_a a)·L(f_form).
    let per_dilate: f64 = set.elements().iter().map(|&a| a as f64).sum();
    let lipschitz = selberg.f_form.lipschitz_bound() * per_dilate;
    Ok(certified_max_fn(
        &|x| selberg.dilated_sum_eval(set, x),
        degree,
        lipschitz,
        target_radius,
    ))
}

/// `(∫ (Σ_a f_form(ax) + n·m_K)^{2k} dx)^{1/(2k)}` by uniform trapezoid
/// quadrature with more nodes than the Nyquist bound `2k·deg`, where the
/// rule is exact for trigonometric polynomials up to roundoff.
pub fn moment_norm(
    selberg: &SelbergPoly,
    set: &IntegerSet,
    k: u32,
) -> Result<f64, SelbergError> {
    let degree = selberg.k * set.max();
    let nodes = 2 * k as u64 * degree + 2;
    if nodes > QUADRATURE_NODE_LIMIT {
        return Err(SelbergError::QuadratureLimitExceeded(
            nodes,
            QUADRATURE_NODE_LIMIT,
        ));
    }
    let n = set.len() as f64;
    let mut total = 0.0;
    for j in 0..nodes {
        let x = j as f64 / nodes as f64;
        let g = selberg.dilated_sum_eval(set, x) + n * selberg.m_k;
        total += g.powi(2 * k as i32);
    }
    Ok((total / nodes as f64).powf(1.0 / (2.0 * k as f64)))
}

/// The Bohr-set superlevel witness: translates of the argmax by the Bohr
/// set `B({ak}, ε)` stay within `δ` of the maximum.
#[derive(Clone, Debug)]
pub struct SuperlevelWitness {
    pub theta: f64,
    pub eps: ExactRational,
    pub bohr: IntervalSet,
    pub bohr_measure: ExactRational,
    pub max_value: f64,
    pub all_pass: bool,
}

pub fn superlevel_witness(
    selberg: &SelbergPoly,
    set: &IntegerSet,
    delta: &ExactRational,
    c: &ExactRational,
) -> Result<SuperlevelWitness, SelbergError> {
    let max = dilated_sum_max(selberg, set, 1e-10)?;
    let theta = max.argmax;
    let n = set.len() as i64;
    let eps = delta / &(c * &ExactRational::from_int(n) * ExactRational::from(selberg.k));
    let mut freqs: Vec<u64> = set
        .elements()
        .iter()
        .flat_map(|&a| (1..=selberg.k).map(move |j| a * j))
        .collect();
    freqs.sort_unstable();
    freqs.dedup();
    let bohr = bohr_set(&freqs, &eps)?;
    let bohr_measure = bohr.measure();
    let floor = max.value - delta.to_f64();
    let all_pass = bohr.sample_points().iter().all(|t| {
        let shifted = theta + t.value().to_f64();
        selberg.dilated_sum_eval(set, shifted.rem_euclid(1.0)) >= floor - 1e-9
    });
    Ok(SuperlevelWitness {
        theta,
        eps,
        bohr,
        bohr_measure,
        max_value: max.value,
        all_pass,
    })
}
