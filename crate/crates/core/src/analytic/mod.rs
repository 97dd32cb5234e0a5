//! Birth-time laws, internal-vertex probabilities and segment-length laws.
//!
//! Nothing here takes a directional distribution: the internal-vertex law
//! does not depend on the hyperplane measure, and the length laws only need
//! the scalar `Λ(⟨u⟩)`.

pub mod exact;
pub mod quadrature;

use statrs::function::gamma::gamma;

use crate::error::{Error, Result};
pub use crate::extract::WeightingMode as SegmentMode;
use quadrature::GaussLegendre;

/// Default number of Gauss–Legendre nodes per axis and piece.
pub const DEFAULT_ORDER: usize = 32;

/// Series truncation used for means and masses.
pub const SERIES_TERMS: usize = 500;

/// Joint law of the birth times of the `V_j`-weighted typical maximal
/// `k`-polytope at time `t` in dimension `d`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BirthTimeLaw {
    pub d: usize,
    pub k: usize,
    pub j: usize,
    pub t: f64,
}

impl BirthTimeLaw {
    pub fn new(d: usize, k: usize, j: usize, t: f64) -> Result<Self> {
        if d < 2 || k >= d || j > k || !(t > 0.0) {
            return Err(Error::invalid(format!("invalid birth-time law d={d}, k={k}, j={j}, t={t}")));
        }
        Ok(BirthTimeLaw { d, k, j, t })
    }

    /// Number of birth times, `d - k`.
    pub fn arity(&self) -> usize {
        self.d - self.k
    }
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// `(d-j) (d-k-1)! s_{d-k}^{k-j} / t^{d-j}` on `0 < s_1 < ... < s_{d-k} < t`,
/// zero elsewhere.
pub fn birth_time_density(law: &BirthTimeLaw, s: &[f64]) -> Result<f64> {
    if s.len() != law.arity() {
        return Err(Error::DimensionMismatch { expected: law.arity(), got: s.len() });
    }
    let inside = s[0] > 0.0 && s.windows(2).all(|w| w[0] < w[1]) && s[s.len() - 1] < law.t;
    if !inside {
        return Ok(0.0);
    }
    let (d, k, j) = (law.d as i32, law.k as i32, law.j as i32);
    let last = s[s.len() - 1];
    Ok((d - j) as f64 * factorial(law.arity() - 1) * last.powi(k - j) / law.t.powi(d - j))
}

/// `(d-j) s^{d-j-1} / t^{d-j}` on `(0, t)`.
pub fn last_birth_time_density(d: usize, j: usize, t: f64, s: f64) -> f64 {
    if !(s > 0.0 && s < t) {
        return 0.0;
    }
    let m = (d - j) as i32;
    m as f64 * s.powi(m - 1) / t.powi(m)
}

/// CDF of [`last_birth_time_density`]: `(s/t)^{d-j}`.
pub fn last_birth_time_cdf(d: usize, j: usize, t: f64, s: f64) -> f64 {
    (s / t).clamp(0.0, 1.0).powi((d - j) as i32)
}

/// `P(N = n | birth times s)` for the typical or length-weighted maximal
/// segment: with `A = d t - 2 s_{d-1} - Σ_{i<d-1} s_i` and `σ = s_{d-1}`,
/// `σ Aⁿ/(σ+A)^{n+1}` (typical) or `(n+1) σ² Aⁿ/(σ+A)^{n+2}` (length-weighted).
pub fn p_n_given_birth_times(d: usize, mode: SegmentMode, n: usize, s: &[f64], t: f64) -> Result<f64> {
    if s.len() + 1 != d {
        return Err(Error::DimensionMismatch { expected: d - 1, got: s.len() });
    }
    if !(s[0] > 0.0 && s.windows(2).all(|w| w[0] < w[1]) && s[s.len() - 1] <= t) {
        return Err(Error::NonIncreasingBirthTimes);
    }
    let sigma = s[d - 2];
    let a = d as f64 * t - 2.0 * sigma - s[..d - 2].iter().sum::<f64>();
    let x = a / (sigma + a);
    Ok(conditional_pmf(mode, n, x))
}

// Law of N given x = A/(σ+A): geometric (typical) or negative binomial
// with two successes (length-weighted).
fn conditional_pmf(mode: SegmentMode, n: usize, x: f64) -> f64 {
    let xn = if n == 0 { 1.0 } else { x.powi(n as i32) };
    match mode {
        SegmentMode::Typical => (1.0 - x) * xn,
        SegmentMode::LengthWeighted => (n + 1) as f64 * (1.0 - x) * (1.0 - x) * xn,
    }
}

/// Quadrature nodes `(x, weight)` for the internal-vertex law, where `x` is
/// the conditional success parameter and weights sum to one.
///
/// The ordered inner birth times are symmetrized, so the `(d-2)`-fold inner
/// integral becomes an expectation over the sum of `d-2` uniforms:
/// product Gauss–Legendre for `d <= 4`, the Irwin–Hall density for `d >= 5`.
/// The outer variable `v = s_{d-1}/t` uses dyadically graded pieces so that
/// large `n`, which concentrate near `v = 0`, stay resolved.
fn internal_nodes(d: usize, mode: SegmentMode, t: f64, order: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(order);
    let j = mode.j();
    let mut breaks = vec![0.0];
    breaks.extend((0..=24).rev().map(|k| 0.5f64.powi(k)));
    let inner = inner_sum_nodes(d - 2, &rule);
    let dt = d as f64 * t;
    let mut out = Vec::with_capacity((breaks.len() - 1) * order * inner.len());
    for ab in breaks.windows(2) {
        for (v, wv) in rule.mapped(ab[0], ab[1]) {
            let sigma = t * v;
            let outer = (d - j) as f64 * v.powi((d - 1 - j) as i32) * wv;
            for &(sum, wu) in &inner {
                let a = dt - 2.0 * sigma - sigma * sum;
                out.push((a / (sigma + a), outer * wu));
            }
        }
    }
    out
}

// Nodes for the law of U_1 + ... + U_m with U_i uniform on (0, 1).
fn inner_sum_nodes(m: usize, rule: &GaussLegendre) -> Vec<(f64, f64)> {
    match m {
        0 => vec![(0.0, 1.0)],
        1 | 2 => {
            let base: Vec<(f64, f64)> = rule.mapped(0.0, 1.0).collect();
            if m == 1 {
                base
            } else {
                let mut out = Vec::with_capacity(base.len() * base.len());
                for &(u1, w1) in &base {
                    for &(u2, w2) in &base {
                        out.push((u1 + u2, w1 * w2));
                    }
                }
                out
            }
        }
        _ => {
            let mut out = Vec::with_capacity(m * rule.len());
            for k in 0..m {
                for (x, w) in rule.mapped(k as f64, (k + 1) as f64) {
                    out.push((x, w * irwin_hall_density(m, x)));
                }
            }
            out
        }
    }
}

/// Density of the sum of `m` independent uniforms on `(0, 1)`.
pub fn irwin_hall_density(m: usize, x: f64) -> f64 {
    if !(x > 0.0 && x < m as f64) {
        return 0.0;
    }
    let mut acc = 0.0;
    let mut binom = 1.0;
    for k in 0..=(x.floor() as usize).min(m) {
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binom * (x - k as f64).powi(m as i32 - 1);
        binom = binom * (m - k) as f64 / (k + 1) as f64;
    }
    acc / factorial(m - 1)
}

/// `p(0), ..., p(n_max)` for the internal-vertex count of the typical or
/// length-weighted typical maximal segment, by quadrature at horizon `t`.
pub fn p_internal_table(d: usize, mode: SegmentMode, n_max: usize, t: f64, order: usize) -> Result<Vec<f64>> {
    check_internal_args(d, t)?;
    let mut p = vec![0.0; n_max + 1];
    for (x, w) in internal_nodes(d, mode, t, order) {
        let base = match mode {
            SegmentMode::Typical => w * (1.0 - x),
            SegmentMode::LengthWeighted => w * (1.0 - x) * (1.0 - x),
        };
        let mut xn = 1.0;
        for (n, slot) in p.iter_mut().enumerate() {
            *slot += match mode {
                SegmentMode::Typical => base * xn,
                SegmentMode::LengthWeighted => base * (n + 1) as f64 * xn,
            };
            xn *= x;
            if xn == 0.0 {
                break;
            }
        }
    }
    Ok(p)
}

fn check_internal_args(d: usize, t: f64) -> Result<()> {
    if d < 2 {
        return Err(Error::UnsupportedDimension { dim: d, what: "internal-vertex law" });
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("time horizon must be positive, got {t}")));
    }
    Ok(())
}

/// Probability that the (typical or length-weighted) maximal segment has
/// exactly `n` internal vertices.
pub fn p_internal(d: usize, mode: SegmentMode, n: usize, t: f64) -> Result<f64> {
    Ok(p_internal_table(d, mode, n, t, DEFAULT_ORDER)?[n])
}

/// Closed-form mean number of internal vertices; `+∞` for the
/// length-weighted segment in the plane.
pub fn mean_internal(d: usize, mode: SegmentMode) -> Result<f64> {
    if d < 2 {
        return Err(Error::UnsupportedDimension { dim: d, what: "internal-vertex law" });
    }
    let d = d as f64;
    Ok(match mode {
        SegmentMode::Typical => 0.5 * (d * d - d + 2.0) / (d - 1.0),
        SegmentMode::LengthWeighted if d == 2.0 => f64::INFINITY,
        SegmentMode::LengthWeighted => (d * d - 2.0 * d + 4.0) / (d - 2.0),
    })
}

/// Truncated series for the internal-vertex law with its tails.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SeriesSummary {
    /// `Σ_{n <= N} p(n)`.
    pub mass: f64,
    /// `Σ_{n > N} p(n)`.
    pub tail_mass: f64,
    /// `Σ_{n <= N} n p(n)`.
    pub partial_mean: f64,
    /// `Σ_{n > N} n p(n)`, from the conditional geometric or negative
    /// binomial tails integrated by the same quadrature.
    pub tail_mean: f64,
}

impl SeriesSummary {
    pub fn mean(&self) -> f64 {
        self.partial_mean + self.tail_mean
    }
}

pub fn series_summary(d: usize, mode: SegmentMode, n_max: usize, t: f64, order: usize) -> Result<SeriesSummary> {
    let p = p_internal_table(d, mode, n_max, t, order)?;
    let mass = p.iter().sum();
    let partial_mean = p.iter().enumerate().map(|(n, q)| n as f64 * q).sum();
    let m = (n_max + 1) as f64;
    let (mut tail_mass, mut tail_mean) = (0.0, 0.0);
    for (x, w) in internal_nodes(d, mode, t, order) {
        let xm = x.powf(m);
        let y = 1.0 - x;
        match mode {
            SegmentMode::Typical => {
                tail_mass += w * xm;
                tail_mean += w * xm * (m + x / y);
            }
            SegmentMode::LengthWeighted => {
                // f(x) = x^{M+1}/(1-x); Σ_{n>=M} (n+1) xⁿ = f', Σ n(n+1) xⁿ = x f''
                tail_mass += w * ((m + 1.0) * xm * y + xm * x);
                let f2 = (m + 1.0) * m * x.powf(m - 1.0) / y + 2.0 * (m + 1.0) * xm / (y * y) + 2.0 * xm * x / (y * y * y);
                tail_mean += w * y * y * x * f2;
            }
        }
    }
    Ok(SeriesSummary { mass, tail_mass, partial_mean, tail_mean })
}

/// Length law of a segment whose last birth time is `s` and direction `u`,
/// with `lambda_u = Λ(⟨u⟩)`: exponential with rate `lambda_u s` (typical) or
/// Erlang with shape 2 and the same rate (length-weighted).
pub fn segment_length_density(lambda_u: f64, s: f64, mode: SegmentMode, x: f64) -> Result<f64> {
    let r = check_rate(lambda_u, s)?;
    if x < 0.0 {
        return Ok(0.0);
    }
    Ok(match mode {
        SegmentMode::Typical => r * (-r * x).exp(),
        SegmentMode::LengthWeighted => r * r * x * (-r * x).exp(),
    })
}

pub fn segment_length_cdf(lambda_u: f64, s: f64, mode: SegmentMode, x: f64) -> Result<f64> {
    let r = check_rate(lambda_u, s)?;
    if x <= 0.0 {
        return Ok(0.0);
    }
    let e = (-r * x).exp();
    Ok(match mode {
        SegmentMode::Typical => 1.0 - e,
        SegmentMode::LengthWeighted => 1.0 - e * (1.0 + r * x),
    })
}

fn check_rate(lambda_u: f64, s: f64) -> Result<f64> {
    if !(lambda_u > 0.0) || !(s > 0.0) {
        return Err(Error::invalid("rate parameters must be positive"));
    }
    Ok(lambda_u * s)
}

/// Statistic evaluated by [`mixture_check`].
#[derive(Clone, Debug, PartialEq)]
pub enum MixtureStatistic {
    /// `E ℓ^p`.
    Moment(f64),
    /// `P(ℓ <= x)` on a grid.
    Cdf(Vec<f64>),
}

#[derive(Clone, Debug, PartialEq)]
pub enum MixtureValue {
    Finite(Vec<f64>),
    Divergent,
}

/// Right-hand side of the mixture representation: the segment length law
/// given the last birth time `s` is the Poisson edge law at time `s`, and
/// `s` has density `(d-j) s^{d-j-1} / t^{d-j}`. Lengths are measured along
/// a direction with `Λ(⟨u⟩) = lambda_u`.
pub fn mixture_check(d: usize, j: usize, t: f64, lambda_u: f64, stat: &MixtureStatistic) -> Result<MixtureValue> {
    if d < 2 || j > 1 || !(t > 0.0) || !(lambda_u > 0.0) {
        return Err(Error::invalid("invalid mixture arguments"));
    }
    let mode = if j == 0 { SegmentMode::Typical } else { SegmentMode::LengthWeighted };
    let m = (d - j) as f64;
    match stat {
        MixtureStatistic::Moment(p) => {
            // E[ℓ^p | s] = Γ(p + 1 + j) / (λ s)^p, integrable iff p < d - j
            if *p >= m {
                return Ok(MixtureValue::Divergent);
            }
            let cond = gamma(p + 1.0 + j as f64) / lambda_u.powf(*p);
            Ok(MixtureValue::Finite(vec![cond * m / (m - p) * t.powf(-p)]))
        }
        MixtureStatistic::Cdf(grid) => {
            let rule = GaussLegendre::new(DEFAULT_ORDER);
            let mut breaks = vec![0.0];
            breaks.extend((0..=16).rev().map(|k| t * 0.5f64.powi(k)));
            let vals = grid
                .iter()
                .map(|&x| {
                    rule.integrate_pieces(&breaks, |s| {
                        if s <= 0.0 {
                            return 0.0;
                        }
                        last_birth_time_density(d, j, t, s) * segment_length_cdf(lambda_u, s, mode, x).unwrap_or(0.0)
                    })
                })
                .collect();
            Ok(MixtureValue::Finite(vals))
        }
    }
}

/// Mixture CDF at a single point.
pub fn mixture_cdf(d: usize, j: usize, t: f64, lambda_u: f64, x: f64) -> Result<f64> {
    match mixture_check(d, j, t, lambda_u, &MixtureStatistic::Cdf(vec![x]))? {
        MixtureValue::Finite(v) => Ok(v[0]),
        MixtureValue::Divergent => unreachable!("CDFs are finite"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use SegmentMode::{LengthWeighted as Lw, Typical};

    #[test]
    fn birth_time_examples() {
        let law = BirthTimeLaw::new(3, 1, 1, 1.0).unwrap();
        assert_eq!(birth_time_density(&law, &[0.2, 0.7]).unwrap(), 2.0);
        assert_eq!(birth_time_density(&law, &[0.7, 0.2]).unwrap(), 0.0);
        assert!(birth_time_density(&law, &[0.2]).is_err());
        let law = BirthTimeLaw::new(2, 1, 0, 1.0).unwrap();
        assert_eq!(birth_time_density(&law, &[0.5]).unwrap(), 1.0);
        assert_eq!(last_birth_time_density(2, 1, 1.0, 0.3), 1.0);
        assert_eq!(last_birth_time_density(3, 0, 1.0, 0.5), 0.75);
    }

    #[test]
    fn birth_time_densities_integrate_to_one() {
        let g = GaussLegendre::new(24);
        for &(d, k, j) in &[(2, 1, 0), (2, 1, 1), (3, 1, 0), (3, 1, 1), (3, 2, 0), (3, 2, 2), (3, 0, 0), (4, 1, 1)] {
            let t = 1.7;
            let law = BirthTimeLaw::new(d, k, j, t).unwrap();
            let m = law.arity();
            // nested ordered-simplex quadrature, innermost variable first
            fn nest(g: &GaussLegendre, law: &BirthTimeLaw, s: &mut Vec<f64>, upper: f64, left: usize) -> f64 {
                if left == 0 {
                    let mut asc = s.clone();
                    asc.reverse();
                    return birth_time_density(law, &asc).unwrap();
                }
                g.integrate(0.0, upper, |x| {
                    s.push(x);
                    let v = nest(g, law, s, x, left - 1);
                    s.pop();
                    v
                })
            }
            let total = nest(&g, &law, &mut Vec::new(), t, m);
            assert!((total - 1.0).abs() < 1e-8, "{d} {k} {j}: {total}");
        }
    }

    #[test]
    fn marginal_of_joint_is_last_birth_time_law() {
        let g = GaussLegendre::new(20);
        let law = BirthTimeLaw::new(3, 1, 0, 2.0).unwrap();
        for &s2 in &[0.1, 0.9, 1.5, 1.99] {
            let m = g.integrate(0.0, s2, |s1| birth_time_density(&law, &[s1, s2]).unwrap());
            assert!((m - last_birth_time_density(3, 0, 2.0, s2)).abs() < 1e-8);
        }
    }

    #[test]
    fn conditional_law_normalizes() {
        for mode in [Typical, Lw] {
            for s in [[0.3, 0.8], [0.2, 0.6], [0.5, 0.9]] {
                let total: f64 = (0..=200).map(|n| p_n_given_birth_times(3, mode, n, &s, 1.0).unwrap()).sum();
                assert!((total - 1.0).abs() < 1e-10, "{total}");
            }
        }
        assert_eq!(p_n_given_birth_times(2, Typical, 0, &[1.0], 1.0).unwrap(), 1.0);
        assert!(p_n_given_birth_times(3, Typical, 0, &[0.5, 0.2], 1.0).is_err());
    }

    #[test]
    fn planar_typical_zero_matches_closed_form() {
        let target = 8.0 * 2f64.ln() - 5.0;
        assert!((p_internal(2, Typical, 0, 1.0).unwrap() - target).abs() < 1e-13);
        // independent oracle: 2 ∫ s² / (2 - s) ds by plain high-order quadrature
        let direct = 2.0 * GaussLegendre::new(64).integrate(0.0, 1.0, |s| s * s / (2.0 - s));
        assert!((direct - target).abs() < 1e-14);
    }

    #[test]
    fn spatial_length_weighted_constants() {
        let p0 = 5.0 + 18.0 * 2f64.ln() - 63.0 / 4.0 * 3f64.ln();
        let p1 = 28.0 + 90.0 * 2f64.ln() - 657.0 / 8.0 * 3f64.ln();
        assert!((p_internal(3, Lw, 0, 1.0).unwrap() - p0).abs() < 1e-10);
        assert!((p_internal(3, Lw, 1, 1.0).unwrap() - p1).abs() < 1e-10);
    }

    #[test]
    fn quadrature_orders_agree() {
        for d in 2..=4 {
            for mode in [Typical, Lw] {
                let a = p_internal_table(d, mode, 40, 1.0, 32).unwrap();
                let b = p_internal_table(d, mode, 40, 1.0, 64).unwrap();
                for n in 0..=40 {
                    assert!((a[n] - b[n]).abs() < 1e-8, "d={d} n={n}");
                }
            }
        }
    }

    #[test]
    fn means_from_series() {
        for &(d, mode) in &[(2, Typical), (3, Typical), (3, Lw), (4, Lw), (4, Typical), (5, Typical), (6, Lw)] {
            let s = series_summary(d, mode, SERIES_TERMS, 1.0, DEFAULT_ORDER).unwrap();
            let target = mean_internal(d, mode).unwrap();
            assert!((s.mean() - target).abs() < 1e-3, "d={d} {mode:?}: {} vs {target}", s.mean());
            assert!((s.mass + s.tail_mass - 1.0).abs() < 1e-8);
        }
        assert_eq!(mean_internal(2, Lw).unwrap(), f64::INFINITY);
        assert_eq!(mean_internal(4, Lw).unwrap(), 6.0);
    }

    #[test]
    fn invariance_in_t() {
        for d in [2, 3] {
            for mode in [Typical, Lw] {
                let a = p_internal_table(d, mode, 10, 0.5, 32).unwrap();
                let b = p_internal_table(d, mode, 10, 7.0, 32).unwrap();
                for n in 0..=10 {
                    assert!((a[n] - b[n]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn irwin_hall_is_a_density() {
        let g = GaussLegendre::new(16);
        for m in 1..8 {
            let total: f64 = (0..m).map(|k| g.integrate(k as f64, (k + 1) as f64, |x| irwin_hall_density(m, x))).sum();
            assert!((total - 1.0).abs() < 1e-12);
        }
        assert!((irwin_hall_density(2, 1.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn length_laws() {
        let g = GaussLegendre::new(64);
        for mode in [Typical, Lw] {
            let total = g.integrate_pieces(&[0.0, 5.0, 20.0, 60.0, 200.0], |x| segment_length_density(0.5, 1.0, mode, x).unwrap());
            assert!((total - 1.0).abs() < 1e-10);
        }
        let mean = g.integrate_pieces(&[0.0, 5.0, 20.0, 60.0, 200.0], |x| x * segment_length_density(0.5, 1.0, Lw, x).unwrap());
        assert!((mean - 4.0).abs() < 1e-10);
        // mode of x e^{-x/2} at 2
        let f = |x| segment_length_density(0.5, 1.0, Lw, x).unwrap();
        assert!(f(2.0) > f(1.99) && f(2.0) > f(2.01));
    }

    #[test]
    fn mixture_moments_and_cdf() {
        assert_eq!(mixture_check(2, 1, 1.0, 0.5, &MixtureStatistic::Moment(1.0)).unwrap(), MixtureValue::Divergent);
        let MixtureValue::Finite(m) = mixture_check(3, 1, 1.0, 1.0 / 3.0, &MixtureStatistic::Moment(1.0)).unwrap() else {
            panic!()
        };
        // ∫ 2s · 2/(s/3) ds = 12
        assert!((m[0] - 12.0).abs() < 1e-12);
        let grid: Vec<f64> = (0..50).map(|i| i as f64 * 4.0).collect();
        let MixtureValue::Finite(c) = mixture_check(2, 1, 1.0, 0.5, &MixtureStatistic::Cdf(grid)).unwrap() else { panic!() };
        assert_eq!(c[0], 0.0);
        assert!(c.windows(2).all(|w| w[1] >= w[0]));
        assert!(mixture_cdf(2, 1, 1.0, 0.5, 1e7).unwrap() > 0.999);
    }
}
