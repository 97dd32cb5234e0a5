//! Exact internal-vertex probabilities in the plane and in space.
//!
//! For `d = 2, 3` every probability is `a + b ln 2 + c ln 3` with rational
//! `a, b, c`. The integrals reduce to `∫ P(v) (c - αv)^{-b} dv` and
//! `∫ P(v) ln(c - αv) dv` over `[0, 1]` with polynomial `P`, which are done
//! in rational arithmetic. Numerical values are then taken with logarithms
//! computed to enough bits to survive the cancellation between the three
//! terms.

use std::fmt;

use num_bigint::{BigInt, Sign};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::SegmentMode;
use crate::error::{Error, Result};

type Q = BigRational;
type Poly = Vec<Q>;

fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

fn q2(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

/// `rational + ln2 · ln 2 + ln3 · ln 3`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LogForm {
    pub rational: Q,
    pub ln2: Q,
    pub ln3: Q,
}

impl LogForm {
    pub fn zero() -> Self {
        LogForm { rational: Q::zero(), ln2: Q::zero(), ln3: Q::zero() }
    }

    fn add(&mut self, other: &LogForm) {
        self.rational += &other.rational;
        self.ln2 += &other.ln2;
        self.ln3 += &other.ln3;
    }

    fn scaled(mut self, k: &Q) -> LogForm {
        self.rational *= k;
        self.ln2 *= k;
        self.ln3 *= k;
        self
    }

    // coef · ln r for r = 2^a 3^b
    fn add_log(&mut self, r: &Q, coef: &Q) {
        let (a, b) = smooth_exponents(r).expect("logarithms of 3-smooth rationals only");
        self.ln2 += coef * q(a);
        self.ln3 += coef * q(b);
    }

    /// Numerical value, exact up to the final rounding to `f64`.
    pub fn to_f64(&self) -> f64 {
        let bits = [&self.rational, &self.ln2, &self.ln3]
            .iter()
            .map(|x| x.numer().bits().max(x.denom().bits()))
            .max()
            .unwrap_or(0);
        let prec = bits + 128;
        let one = BigInt::one() << prec;
        let fixed = |x: &Q| -> BigInt { (x.numer() * &one) / x.denom() };
        let (l2, l3) = logs_fixed(prec);
        let total = fixed(&self.rational) + ((&l2 * self.ln2.numer()) / self.ln2.denom()) + ((&l3 * self.ln3.numer()) / self.ln3.denom());
        Q::new(total, one).to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for LogForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        let mut term = |f: &mut fmt::Formatter<'_>, c: &Q, name: &str| -> fmt::Result {
            if c.is_zero() {
                return Ok(());
            }
            let mag = c.abs();
            let sign = if c.is_negative() { "-" } else { "+" };
            let body = if mag.is_one() && !name.is_empty() { String::new() } else { mag.to_string() };
            let sep = if body.is_empty() || name.is_empty() { "" } else { " " };
            if first {
                let lead = if c.is_negative() { "-" } else { "" };
                write!(f, "{lead}{body}{sep}{name}")?;
            } else {
                write!(f, " {sign} {body}{sep}{name}")?;
            }
            first = false;
            Ok(())
        };
        term(f, &self.rational, "")?;
        term(f, &self.ln2, "ln 2")?;
        term(f, &self.ln3, "ln 3")?;
        if first {
            write!(f, "0")?;
        }
        Ok(())
    }
}

fn smooth_exponents(r: &Q) -> Option<(i64, i64)> {
    if !r.is_positive() {
        return None;
    }
    let split = |mut n: BigInt| -> Option<(i64, i64)> {
        let (mut a, mut b) = (0, 0);
        let two = BigInt::from(2);
        let three = BigInt::from(3);
        while (&n % &two).is_zero() {
            n /= &two;
            a += 1;
        }
        while (&n % &three).is_zero() {
            n /= &three;
            b += 1;
        }
        n.is_one().then_some((a, b))
    };
    let (a1, b1) = split(r.numer().clone())?;
    let (a2, b2) = split(r.denom().clone())?;
    Some((a1 - a2, b1 - b2))
}

// ln 2 = 2 atanh(1/3), ln 3 = ln 2 + 2 atanh(1/5), in fixed point with
// `prec` fractional bits.
fn logs_fixed(prec: u64) -> (BigInt, BigInt) {
    let atanh_inv = |k: i64| -> BigInt {
        let one = BigInt::one() << (prec + 8);
        let k2 = BigInt::from(k * k);
        let mut power = &one / BigInt::from(k);
        let mut acc = BigInt::zero();
        let mut i = 1i64;
        while power.sign() != Sign::NoSign {
            acc += &power / BigInt::from(i);
            power /= &k2;
            i += 2;
        }
        acc >> 8
    };
    let l2 = atanh_inv(3) * 2;
    let l3 = &l2 + atanh_inv(5) * 2;
    (l2, l3)
}

fn poly_mul(a: &Poly, b: &Poly) -> Poly {
    let mut out = vec![Q::zero(); a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        if x.is_zero() {
            continue;
        }
        for (j, y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

// (c0 + c1 v)^n
fn linear_pow(c0: &Q, c1: &Q, n: usize) -> Poly {
    let mut out = vec![Q::one()];
    let lin = vec![c0.clone(), c1.clone()];
    for _ in 0..n {
        out = poly_mul(&out, &lin);
    }
    out
}

fn monomial(k: usize, coef: Q) -> Poly {
    let mut p = vec![Q::zero(); k + 1];
    p[k] = coef;
    p
}

fn qpow(x: &Q, e: i64) -> Q {
    if e >= 0 {
        num_traits::pow(x.clone(), e as usize)
    } else {
        num_traits::pow(x.recip(), (-e) as usize)
    }
}

// P(v) with v = (c - w)/α, as a polynomial in w.
fn substitute(p: &Poly, c: &Q, alpha: &Q) -> Poly {
    let c0 = c / alpha;
    let c1 = -alpha.recip();
    let mut out: Poly = vec![Q::zero(); p.len()];
    let mut power = vec![Q::one()];
    for coef in p {
        if !coef.is_zero() {
            for (i, x) in power.iter().enumerate() {
                out[i] += coef * x;
            }
        }
        power = poly_mul(&power, &vec![c0.clone(), c1.clone()]);
    }
    out
}

/// `∫_0^1 P(v) (c - αv)^{-b} dv`.
fn integrate_rational(p: &Poly, c: &Q, alpha: &Q, b: i64) -> LogForm {
    let w = substitute(p, c, alpha);
    let (hi, lo) = (c.clone(), c - alpha);
    let mut out = LogForm::zero();
    for (k, coef) in w.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        let e = k as i64 - b;
        if e == -1 {
            out.add_log(&hi, coef);
            out.add_log(&lo, &-coef);
        } else {
            out.rational += coef * (qpow(&hi, e + 1) - qpow(&lo, e + 1)) / q(e + 1);
        }
    }
    out.scaled(&alpha.recip())
}

/// `∫_0^1 P(v) ln(c - αv) dv`.
fn integrate_log(p: &Poly, c: &Q, alpha: &Q) -> LogForm {
    let w = substitute(p, c, alpha);
    let (hi, lo) = (c.clone(), c - alpha);
    let mut out = LogForm::zero();
    for (k, coef) in w.iter().enumerate() {
        if coef.is_zero() {
            continue;
        }
        // ∫ w^k ln w = w^{k+1} ln w / (k+1) - w^{k+1} / (k+1)²
        let k1 = q(k as i64 + 1);
        let (h, l) = (qpow(&hi, k as i64 + 1), qpow(&lo, k as i64 + 1));
        out.add_log(&hi, &(coef * &h / &k1));
        out.add_log(&lo, &-(coef * &l / &k1));
        out.rational -= coef * (h - l) / (&k1 * &k1);
    }
    out.scaled(&alpha.recip())
}

fn binomial(n: usize, k: usize) -> Q {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    Q::from_integer(acc)
}

/// Exact `P(N = n)` for the typical or length-weighted maximal segment in
/// dimension 2 or 3.
pub fn p_internal_exact(d: usize, mode: SegmentMode, n: usize) -> Result<LogForm> {
    match d {
        2 => Ok(planar(mode, n)),
        3 => Ok(spatial(mode, n)),
        _ => Err(Error::UnsupportedDimension { dim: d, what: "exact internal-vertex law" }),
    }
}

// t = 1, σ = v, A = 2 - 2v:
// typical 2 ∫ v² Aⁿ/(2-v)^{n+1}, length-weighted (n+1) ∫ v² Aⁿ/(2-v)^{n+2}.
fn planar(mode: SegmentMode, n: usize) -> LogForm {
    let p = poly_mul(&monomial(2, Q::one()), &linear_pow(&q(2), &q(-2), n));
    let (pref, b) = match mode {
        SegmentMode::Typical => (q(2), n as i64 + 1),
        SegmentMode::LengthWeighted => (q(n as i64 + 1), n as i64 + 2),
    };
    integrate_rational(&p, &q(2), &q(1), b).scaled(&pref)
}

// t = 1, σ = v, A = 3 - 2v - s₁ with 0 < s₁ < v. With y = σ + A the inner
// integral is ∫_{3-2v}^{3-v} (y - v)ⁿ y^{-m} dy, m = n+1 (typical) or n+2.
fn spatial(mode: SegmentMode, n: usize) -> LogForm {
    let (pref, m) = match mode {
        SegmentMode::Typical => (q(3), n as i64 + 1),
        SegmentMode::LengthWeighted => (q(2 * (n as i64 + 1)), n as i64 + 2),
    };
    let (three, one, two) = (q(3), q(1), q(2));
    let mut out = LogForm::zero();
    for k in 0..=n {
        let sign = if (n - k).is_multiple_of(2) { 1 } else { -1 };
        let coef = binomial(n, k) * q(sign);
        // outer factor v² times (-v)^{n-k}
        let p = monomial(2 + n - k, coef);
        let e = k as i64 - m + 1;
        if e == 0 {
            out.add(&integrate_log(&p, &three, &one));
            out.add(&integrate_log(&p, &three, &two).scaled(&q(-1)));
        } else {
            let inv = q(e).recip();
            out.add(&integrate_rational(&p, &three, &one, -e).scaled(&inv));
            out.add(&integrate_rational(&p, &three, &two, -e).scaled(&-inv));
        }
    }
    out.scaled(&pref)
}

/// Parse-free constructor used in tests and docs: `a + b ln 2 + c ln 3`.
pub fn log_form(a: (i64, i64), b: (i64, i64), c: (i64, i64)) -> LogForm {
    LogForm { rational: q2(a.0, a.1), ln2: q2(b.0, b.1), ln3: q2(c.0, c.1) }
}
