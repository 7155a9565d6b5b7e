//! Exact arithmetic: rationals and the quadratic field Q(√6).

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::Sign;
use num::{BigInt, BigRational, BigUint, Integer, One, Signed, ToPrimitive, Zero};
use serde::de::{self, Deserializer};
use serde::ser::{SerializeMap, Serializer};
use serde::{Deserialize, Serialize};

/// Arbitrary-precision rational, always stored in lowest terms with a positive denominator.
pub type Rational = BigRational;

/// Default binary precision for float exports.
pub const DEFAULT_PRECISION_BITS: u32 = 128;

/// Significant digits used for decimal strings in serialized output.
pub const DECIMAL_DIGITS: usize = 20;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("cannot parse scalar from {0:?}")]
    Parse(String),
}

/// Precision in bits, honouring `FRACQUANT_PRECISION_BITS` when set to a valid value.
pub fn precision_bits() -> u32 {
    std::env::var("FRACQUANT_PRECISION_BITS")
        .ok()
        .and_then(|s| s.trim().parse::<u32>().ok())
        .filter(|&b| b >= 24)
        .unwrap_or(DEFAULT_PRECISION_BITS)
}

pub fn rat(n: i64, d: i64) -> Rational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    BigRational::from_integer(BigInt::from(n))
}

/// `base^k` for a non-negative exponent.
pub fn rat_pow(base: &Rational, k: u32) -> Rational {
    num::pow::pow(base.clone(), k as usize)
}

/// Element a + b√6 of Q(√6).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Quad6 {
    a: Rational,
    b: Rational,
}

impl Quad6 {
    pub fn new(a: Rational, b: Rational) -> Self {
        Quad6 { a, b }
    }

    pub fn a(&self) -> &Rational {
        &self.a
    }

    pub fn b(&self) -> &Rational {
        &self.b
    }

    pub fn conj(&self) -> Quad6 {
        Quad6::new(self.a.clone(), -self.b.clone())
    }

    /// Field norm a² − 6b².
    pub fn norm(&self) -> Rational {
        &self.a * &self.a - int(6) * &self.b * &self.b
    }

    pub fn signum(&self) -> Ordering {
        quad_sign(&self.a, &self.b)
    }
}

fn rat_sign(x: &Rational) -> Ordering {
    x.numer().sign().cmp_zero()
}

trait SignExt {
    fn cmp_zero(self) -> Ordering;
}

impl SignExt for Sign {
    fn cmp_zero(self) -> Ordering {
        match self {
            Sign::Minus => Ordering::Less,
            Sign::NoSign => Ordering::Equal,
            Sign::Plus => Ordering::Greater,
        }
    }
}

/// Exact sign of a + b√6.
fn quad_sign(a: &Rational, b: &Rational) -> Ordering {
    let sa = rat_sign(a);
    let sb = rat_sign(b);
    if sb == Ordering::Equal {
        return sa;
    }
    if sa == Ordering::Equal || sa == sb {
        return sb;
    }
    let a2 = a * a;
    let b2 = int(6) * b * b;
    match a2.cmp(&b2) {
        Ordering::Greater => sa,
        Ordering::Less => sb,
        Ordering::Equal => unreachable!("√6 is irrational"),
    }
}

/// An exact scalar: a rational, or an element of Q(√6) with non-zero surd part.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Scalar {
    Rat(Rational),
    Quad(Quad6),
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<Rational> for Scalar {
    fn from(r: Rational) -> Self {
        Scalar::Rat(r)
    }
}

impl From<&Rational> for Scalar {
    fn from(r: &Rational) -> Self {
        Scalar::Rat(r.clone())
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::Rat(int(n))
    }
}

impl From<Quad6> for Scalar {
    fn from(q: Quad6) -> Self {
        Scalar::quad(q.a, q.b)
    }
}

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Rat(Rational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(Rational::one())
    }

    pub fn ratio(n: i64, d: i64) -> Self {
        Scalar::Rat(rat(n, d))
    }

    /// a + b√6, normalised to `Rat` when b = 0.
    pub fn quad(a: Rational, b: Rational) -> Self {
        if b.is_zero() {
            Scalar::Rat(a)
        } else {
            Scalar::Quad(Quad6 { a, b })
        }
    }

    pub fn sqrt6() -> Self {
        Scalar::quad(Rational::zero(), Rational::one())
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Scalar::Rat(r) if r.is_zero())
    }

    pub fn is_rational(&self) -> bool {
        matches!(self, Scalar::Rat(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::Quad(_) => None,
        }
    }

    /// Rational part a and surd coefficient b of a + b√6.
    pub fn parts(&self) -> (Rational, Rational) {
        match self {
            Scalar::Rat(r) => (r.clone(), Rational::zero()),
            Scalar::Quad(q) => (q.a.clone(), q.b.clone()),
        }
    }

    pub fn signum(&self) -> Ordering {
        match self {
            Scalar::Rat(r) => rat_sign(r),
            Scalar::Quad(q) => q.signum(),
        }
    }

    pub fn abs(&self) -> Scalar {
        if self.signum() == Ordering::Less {
            -self
        } else {
            self.clone()
        }
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    pub fn recip(&self) -> Result<Scalar, ScalarError> {
        match self {
            Scalar::Rat(r) => {
                if r.is_zero() {
                    Err(ScalarError::DivisionByZero)
                } else {
                    Ok(Scalar::Rat(r.recip()))
                }
            }
            Scalar::Quad(q) => {
                let n = q.norm();
                Ok(Scalar::quad(&q.a / &n, -(&q.b / &n)))
            }
        }
    }

    pub fn checked_div(&self, rhs: &Scalar) -> Result<Scalar, ScalarError> {
        match (self, rhs) {
            (_, Scalar::Rat(d)) if d.is_zero() => Err(ScalarError::DivisionByZero),
            (Scalar::Rat(x), Scalar::Rat(y)) => Ok(Scalar::Rat(x / y)),
            (Scalar::Quad(q), Scalar::Rat(y)) => Ok(Scalar::quad(&q.a / y, &q.b / y)),
            _ => Ok(self * &rhs.recip()?),
        }
    }

    /// Integer power; negative exponents fail on zero.
    pub fn pow_int(&self, k: i64) -> Result<Scalar, ScalarError> {
        if k < 0 {
            return self.recip()?.pow_int(-k);
        }
        let mut result = Scalar::one();
        let mut base = self.clone();
        let mut e = k as u64;
        while e > 0 {
            if e & 1 == 1 {
                result = &result * &base;
            }
            e >>= 1;
            if e > 0 {
                base = base.square();
            }
        }
        Ok(result)
    }

    pub fn pow(&self, k: u32) -> Scalar {
        self.pow_int(k as i64).expect("non-negative power")
    }

    pub fn mul_rat(&self, r: &Rational) -> Scalar {
        match self {
            Scalar::Rat(x) => Scalar::Rat(x * r),
            Scalar::Quad(q) => Scalar::quad(&q.a * r, &q.b * r),
        }
    }

    pub fn half(&self) -> Scalar {
        self.mul_rat(&rat(1, 2))
    }

    pub fn max(self, other: Scalar) -> Scalar {
        if other > self {
            other
        } else {
            self
        }
    }

    pub fn min(self, other: Scalar) -> Scalar {
        if other < self {
            other
        } else {
            self
        }
    }

    /// Correctly rounded binary approximation with `bits` significant bits.
    pub fn to_float(&self, bits: u32) -> BigFloat {
        let bits = bits.max(2);
        match self {
            Scalar::Rat(r) => BigFloat::round_rational(r, bits),
            Scalar::Quad(q) => {
                // Bracket √6 between s/2^w and (s+1)/2^w; widen w until both ends round alike.
                let mut w = bits as u64 + 32;
                loop {
                    let shift = BigUint::one() << (2 * w);
                    let s = (BigUint::from(6u32) * shift).sqrt();
                    let den = BigInt::one() << w;
                    let lo_root = BigRational::new(BigInt::from(s.clone()), den.clone());
                    let hi_root = BigRational::new(BigInt::from(s) + 1, den);
                    let x1 = &q.a + &q.b * &lo_root;
                    let x2 = &q.a + &q.b * &hi_root;
                    let r1 = BigFloat::round_rational(&x1, bits);
                    let r2 = BigFloat::round_rational(&x2, bits);
                    if r1 == r2 {
                        return r1;
                    }
                    w *= 2;
                }
            }
        }
    }

    pub fn to_f64(&self) -> f64 {
        self.to_float(53).to_f64()
    }

    /// Natural logarithm of a positive value, via a correctly rounded float export.
    pub fn ln(&self) -> f64 {
        self.to_float(precision_bits()).ln()
    }

    /// Decimal rendering with `digits` significant digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        match self {
            Scalar::Rat(r) => decimal_string(r, digits),
            Scalar::Quad(_) => {
                let bits = (digits as f64 * std::f64::consts::LOG2_10).ceil() as u32 + 16;
                decimal_string(&self.to_float(bits).to_rational(), digits)
            }
        }
    }

    pub fn decimal(&self) -> String {
        self.to_decimal(DECIMAL_DIGITS)
    }
}

fn neg_scalar(x: &Scalar) -> Scalar {
    match x {
        Scalar::Rat(r) => Scalar::Rat(-r),
        Scalar::Quad(q) => Scalar::Quad(Quad6 {
            a: -&q.a,
            b: -&q.b,
        }),
    }
}

fn add_scalar(x: &Scalar, y: &Scalar) -> Scalar {
    match (x, y) {
        (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a + b),
        (Scalar::Rat(r), Scalar::Quad(q)) | (Scalar::Quad(q), Scalar::Rat(r)) => {
            Scalar::Quad(Quad6 {
                a: &q.a + r,
                b: q.b.clone(),
            })
        }
        (Scalar::Quad(p), Scalar::Quad(q)) => Scalar::quad(&p.a + &q.a, &p.b + &q.b),
    }
}

fn sub_scalar(x: &Scalar, y: &Scalar) -> Scalar {
    match (x, y) {
        (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a - b),
        _ => add_scalar(x, &neg_scalar(y)),
    }
}

fn mul_scalar(x: &Scalar, y: &Scalar) -> Scalar {
    match (x, y) {
        (Scalar::Rat(a), Scalar::Rat(b)) => Scalar::Rat(a * b),
        (Scalar::Rat(r), Scalar::Quad(q)) | (Scalar::Quad(q), Scalar::Rat(r)) => {
            Scalar::quad(&q.a * r, &q.b * r)
        }
        (Scalar::Quad(p), Scalar::Quad(q)) => Scalar::quad(
            &p.a * &q.a + int(6) * &p.b * &q.b,
            &p.a * &q.b + &p.b * &q.a,
        ),
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $f:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                $f(self, rhs)
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                $f(&self, &rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                $f(&self, rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                $f(self, &rhs)
            }
        }
    };
}

binop!(Add, add, add_scalar);
binop!(Sub, sub, sub_scalar);
binop!(Mul, mul, mul_scalar);

fn div_scalar(x: &Scalar, y: &Scalar) -> Scalar {
    x.checked_div(y).expect("division by zero")
}

// Panics on a zero divisor, like the underlying big rationals; use `checked_div` to get an error.
binop!(Div, div, div_scalar);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        neg_scalar(&self)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        neg_scalar(self)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Scalar) -> Ordering {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => a.cmp(b),
            _ => (self - other).signum(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Scalar) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

fn fmt_rational(r: &Rational) -> String {
    if r.is_integer() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

impl fmt::Display for Scalar {
    /// Rationals print as `p/q`; surd elements as `(A+B√6)/D` over a common denominator.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{}", fmt_rational(r)),
            Scalar::Quad(q) => {
                let d = q.a.denom().lcm(q.b.denom());
                let an = q.a.numer() * (&d / q.a.denom());
                let bn = q.b.numer() * (&d / q.b.denom());
                let mut num = String::new();
                if !an.is_zero() {
                    num.push_str(&an.to_string());
                }
                let bmag = bn.abs();
                let coef = if bmag.is_one() {
                    String::new()
                } else {
                    bmag.to_string()
                };
                if bn.is_negative() {
                    num.push('-');
                } else if !num.is_empty() {
                    num.push('+');
                }
                num.push_str(&coef);
                num.push('√');
                num.push('6');
                if d.is_one() {
                    write!(f, "{num}")
                } else {
                    write!(f, "({num})/{d}")
                }
            }
        }
    }
}

fn parse_rational(s: &str) -> Option<Rational> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    if let Some((n, d)) = s.split_once('/') {
        let n = BigInt::from_str(n.trim()).ok()?;
        let d = BigInt::from_str(d.trim()).ok()?;
        if d.is_zero() {
            return None;
        }
        return Some(BigRational::new(n, d));
    }
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return None;
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{ip}{fp}");
    let mut value = BigRational::from_integer(BigInt::from_str(&digits).ok()?);
    let scale = exp - fp.len() as i32;
    let ten = int(10);
    if scale >= 0 {
        value *= rat_pow(&ten, scale as u32);
    } else {
        value /= rat_pow(&ten, (-scale) as u32);
    }
    Some(if neg { -value } else { value })
}

/// Parses the numerator of a surd expression: a signed sum of rational and `c√6` terms.
fn parse_surd_sum(s: &str) -> Option<(Rational, Rational)> {
    let mut a = Rational::zero();
    let mut b = Rational::zero();
    let mut terms = Vec::new();
    let mut start = 0;
    let bytes: Vec<char> = s.chars().collect();
    for i in 1..bytes.len() {
        if (bytes[i] == '+' || bytes[i] == '-') && !matches!(bytes[i - 1], 'e' | 'E' | '/') {
            terms.push(bytes[start..i].iter().collect::<String>());
            start = i;
        }
    }
    terms.push(bytes[start..].iter().collect::<String>());
    for t in terms {
        if let Some(coef) = t.strip_suffix("√6") {
            let c = match coef {
                "" | "+" => Rational::one(),
                "-" => -Rational::one(),
                other => parse_rational(other)?,
            };
            b += c;
        } else {
            a += parse_rational(&t)?;
        }
    }
    Some((a, b))
}

impl FromStr for Scalar {
    type Err = ScalarError;

    /// Accepts `p/q`, integers, decimals, and surd forms such as `(77-10√6)/7300` or `2+sqrt(6)/3`.
    fn from_str(s: &str) -> Result<Scalar, ScalarError> {
        let err = || ScalarError::Parse(s.to_string());
        let t: String = s
            .replace("sqrt(6)", "√6")
            .replace("sqrt6", "√6")
            .chars()
            .filter(|c| !c.is_whitespace() && *c != '*')
            .collect();
        if !t.contains('√') {
            return parse_rational(&t).map(Scalar::Rat).ok_or_else(err);
        }
        if let Some(rest) = t.strip_prefix('(') {
            let (inner, tail) = rest.split_once(')').ok_or_else(err)?;
            let (a, b) = parse_surd_sum(inner).ok_or_else(err)?;
            let d = if tail.is_empty() {
                Rational::one()
            } else {
                let d = parse_rational(tail.strip_prefix('/').ok_or_else(err)?).ok_or_else(err)?;
                if d.is_zero() {
                    return Err(err());
                }
                d
            };
            return Ok(Scalar::quad(a / &d, b / &d));
        }
        // `c√6/d` terms are written with the divisor after the surd.
        let normalized = t.replace("√6/", "√6÷");
        let mut a = Rational::zero();
        let mut b = Rational::zero();
        for piece in split_terms(&normalized) {
            if let Some((left, div)) = piece.split_once('÷') {
                let (pa, pb) = parse_surd_sum(left).ok_or_else(err)?;
                let d = parse_rational(div).ok_or_else(err)?;
                if d.is_zero() {
                    return Err(err());
                }
                a += pa / &d;
                b += pb / &d;
            } else {
                let (pa, pb) = parse_surd_sum(&piece).ok_or_else(err)?;
                a += pa;
                b += pb;
            }
        }
        Ok(Scalar::quad(a, b))
    }
}

fn split_terms(s: &str) -> Vec<String> {
    let chars: Vec<char> = s.chars().collect();
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..chars.len() {
        if (chars[i] == '+' || chars[i] == '-') && !matches!(chars[i - 1], 'e' | 'E' | '/' | '÷') {
            out.push(chars[start..i].iter().collect());
            start = i;
        }
    }
    out.push(chars[start..].iter().collect());
    out
}

#[derive(Serialize, Deserialize)]
struct RationalJson {
    num: String,
    den: String,
}

fn rational_json(r: &Rational) -> RationalJson {
    RationalJson {
        num: r.numer().to_string(),
        den: r.denom().to_string(),
    }
}

fn rational_from_json(j: &RationalJson) -> Option<Rational> {
    let n = BigInt::from_str(&j.num).ok()?;
    let d = BigInt::from_str(&j.den).ok()?;
    if d.is_zero() {
        None
    } else {
        Some(BigRational::new(n, d))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Rat(r) => {
                let mut m = serializer.serialize_map(Some(3))?;
                m.serialize_entry("num", &r.numer().to_string())?;
                m.serialize_entry("den", &r.denom().to_string())?;
                m.serialize_entry("decimal", &self.decimal())?;
                m.end()
            }
            Scalar::Quad(q) => {
                let mut m = serializer.serialize_map(Some(4))?;
                m.serialize_entry("a", &rational_json(&q.a))?;
                m.serialize_entry("b", &rational_json(&q.b))?;
                m.serialize_entry("surd", &6)?;
                m.serialize_entry("decimal", &self.decimal())?;
                m.end()
            }
        }
    }
}

#[derive(Deserialize)]
struct ScalarJson {
    num: Option<String>,
    den: Option<String>,
    a: Option<RationalJson>,
    b: Option<RationalJson>,
    surd: Option<u32>,
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Scalar, D::Error> {
        let j = ScalarJson::deserialize(deserializer)?;
        if let (Some(n), Some(d)) = (&j.num, &j.den) {
            let r = rational_from_json(&RationalJson {
                num: n.clone(),
                den: d.clone(),
            })
            .ok_or_else(|| de::Error::custom("invalid rational"))?;
            return Ok(Scalar::Rat(r));
        }
        match (&j.a, &j.b, j.surd) {
            (Some(a), Some(b), Some(6)) => {
                let a = rational_from_json(a).ok_or_else(|| de::Error::custom("invalid a"))?;
                let b = rational_from_json(b).ok_or_else(|| de::Error::custom("invalid b"))?;
                Ok(Scalar::quad(a, b))
            }
            _ => Err(de::Error::custom("expected {num,den} or {a,b,surd:6}")),
        }
    }
}

/// Binary float `mantissa · 2^exponent` with an arbitrary-size mantissa.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigFloat {
    mantissa: BigInt,
    exponent: i64,
}

impl BigFloat {
    pub fn mantissa(&self) -> &BigInt {
        &self.mantissa
    }

    pub fn exponent(&self) -> i64 {
        self.exponent
    }

    /// Round `r` to `bits` significant bits, ties to even.
    pub fn round_rational(r: &Rational, bits: u32) -> BigFloat {
        if r.is_zero() {
            return BigFloat {
                mantissa: BigInt::zero(),
                exponent: 0,
            };
        }
        let neg = r.is_negative();
        let p = r.numer().abs();
        let q = r.denom().clone();
        let mut e = p.bits() as i64 - q.bits() as i64 - bits as i64;
        loop {
            let (num, den) = if e >= 0 {
                (p.clone(), &q << (e as usize))
            } else {
                (&p << ((-e) as usize), q.clone())
            };
            let (mut quot, rem) = num.div_rem(&den);
            if quot.bits() > bits as u64 {
                e += 1;
                continue;
            }
            if quot.bits() < bits as u64 {
                e -= 1;
                continue;
            }
            let twice = &rem << 1usize;
            let round_up = match twice.cmp(&den) {
                Ordering::Greater => true,
                Ordering::Equal => quot.is_odd(),
                Ordering::Less => false,
            };
            if round_up {
                quot += 1;
                if quot.bits() > bits as u64 {
                    quot >>= 1usize;
                    e += 1;
                }
            }
            return BigFloat {
                mantissa: if neg { -quot } else { quot },
                exponent: e,
            };
        }
    }

    pub fn to_rational(&self) -> Rational {
        let m = BigRational::from_integer(self.mantissa.clone());
        if self.exponent >= 0 {
            m * BigRational::from_integer(BigInt::one() << (self.exponent as usize))
        } else {
            m / BigRational::from_integer(BigInt::one() << ((-self.exponent) as usize))
        }
    }

    pub fn to_f64(&self) -> f64 {
        if self.mantissa.is_zero() {
            return 0.0;
        }
        let extra = self.mantissa.bits() as i64 - 53;
        let (m, e) = if extra > 0 {
            let r = BigFloat::round_rational(&self.to_rational(), 53);
            (r.mantissa, r.exponent)
        } else {
            (self.mantissa.clone(), self.exponent)
        };
        let mf = m.to_f64().unwrap_or(0.0);
        scale_pow2(mf, e)
    }

    /// Natural logarithm of a positive value.
    pub fn ln(&self) -> f64 {
        if !self.mantissa.is_positive() {
            return f64::NAN;
        }
        let shift = (self.mantissa.bits() as i64 - 64).max(0);
        let top = (&self.mantissa >> (shift as usize)).to_f64().unwrap_or(f64::NAN);
        top.ln() + (self.exponent + shift) as f64 * std::f64::consts::LN_2
    }
}

fn scale_pow2(x: f64, e: i64) -> f64 {
    let mut x = x;
    let mut e = e;
    while e > 1000 {
        x *= 2f64.powi(1000);
        e -= 1000;
    }
    while e < -1000 {
        x *= 2f64.powi(-1000);
        e += 1000;
    }
    x * 2f64.powi(e as i32)
}

/// Decimal rendering of an exact rational with `digits` significant digits (half-up).
pub fn decimal_string(r: &Rational, digits: usize) -> String {
    if r.is_zero() {
        return "0".to_string();
    }
    let digits = digits.max(1);
    let neg = r.is_negative();
    let p = r.numer().abs();
    let q = r.denom().clone();
    let ten = BigInt::from(10);
    let pow10 = |k: i64| num::pow::pow(ten.clone(), k as usize);
    // k = floor(log10(p/q))
    let mut k = p.to_string().len() as i64 - q.to_string().len() as i64;
    let ge = |k: i64| -> bool {
        if k >= 0 {
            p >= &q * pow10(k)
        } else {
            &p * pow10(-k) >= q
        }
    };
    while !ge(k) {
        k -= 1;
    }
    while ge(k + 1) {
        k += 1;
    }
    let shift = digits as i64 - 1 - k;
    let (num, den) = if shift >= 0 {
        (&p * pow10(shift), q.clone())
    } else {
        (p.clone(), &q * pow10(-shift))
    };
    let (mut quot, rem) = num.div_rem(&den);
    if (&rem << 1usize) >= den {
        quot += 1;
    }
    if quot == pow10(digits as i64) {
        quot /= 10;
        k += 1;
    }
    let s = quot.to_string();
    let body = if (-7..=20).contains(&k) {
        if k >= 0 {
            let k = k as usize;
            if s.len() > k + 1 {
                format!("{}.{}", &s[..k + 1], &s[k + 1..])
            } else {
                format!("{}{}", s, "0".repeat(k + 1 - s.len()))
            }
        } else {
            format!("0.{}{}", "0".repeat((-k - 1) as usize), s)
        }
    } else {
        let mant = if s.len() > 1 {
            format!("{}.{}", &s[..1], &s[1..])
        } else {
            s.clone()
        };
        format!("{}e{}", trim_fraction(&mant), k)
    };
    let body = if body.contains('e') {
        body
    } else {
        trim_fraction(&body)
    };
    if neg {
        format!("-{body}")
    } else {
        body
    }
}

fn trim_fraction(s: &str) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(x: &str) -> Scalar {
        x.parse().unwrap()
    }

    #[test]
    fn parse_and_display_round_trip() {
        for text in ["65/584", "-3", "(77-10√6)/7300", "(10447-750√6)/1598700", "√6", "(-√6)/5"] {
            let v = s(text);
            assert_eq!(s(&v.to_string()), v, "{text}");
        }
        assert_eq!(s("0.25"), Scalar::ratio(1, 4));
        assert_eq!(s("1.5e-3"), Scalar::ratio(3, 2000));
        assert_eq!(s("2+sqrt(6)/3"), Scalar::quad(int(2), rat(1, 3)));
        assert!("1/0".parse::<Scalar>().is_err());
        assert!("abc".parse::<Scalar>().is_err());
    }

    #[test]
    fn sqrt6_squared_is_six() {
        assert_eq!(Scalar::sqrt6().square(), Scalar::from(6));
    }

    #[test]
    fn quad_recip() {
        let x = s("(77-10√6)/7300");
        assert_eq!(&x * &x.recip().unwrap(), Scalar::one());
        assert_eq!(Scalar::zero().recip(), Err(ScalarError::DivisionByZero));
        assert_eq!(
            Scalar::one().checked_div(&Scalar::zero()),
            Err(ScalarError::DivisionByZero)
        );
    }

    #[test]
    fn sign_decisions() {
        assert_eq!(s("5-2√6").signum(), Ordering::Greater);
        assert_eq!(s("4-2√6").signum(), Ordering::Less);
        assert_eq!(s("-5+2√6").signum(), Ordering::Less);
        assert!(s("2449/1000") < s("√6"));
        assert!(s("49/20") > s("√6"));
        assert!(s("√6") < s("2449491/1000000"));
    }

    #[test]
    fn pow_int_negative() {
        assert_eq!(Scalar::ratio(2, 3).pow_int(-2).unwrap(), Scalar::ratio(9, 4));
        assert_eq!(Scalar::zero().pow_int(-1), Err(ScalarError::DivisionByZero));
    }

    #[test]
    fn float_export() {
        assert_eq!(Scalar::ratio(1, 3).to_f64(), 1.0 / 3.0);
        assert_eq!(Scalar::sqrt6().to_f64(), 6f64.sqrt());
        let w = s("(77-10√6)/7300");
        assert_eq!(w.to_f64(), (77.0 - 10.0 * 6f64.sqrt()) / 7300.0);
        let tiny = Scalar::Rat(rat_pow(&rat(2, 75), 200));
        let ln = tiny.ln();
        assert!((ln - 200.0 * (2f64 / 75.0).ln()).abs() < 1e-9);
    }

    #[test]
    fn rounding_is_exact_to_even() {
        let f = BigFloat::round_rational(&rat(3, 1), 1);
        assert_eq!(f.to_rational(), int(4));
        let f = BigFloat::round_rational(&rat(5, 1), 2);
        assert_eq!(f.to_rational(), int(4));
        let f = BigFloat::round_rational(&rat(7, 1), 2);
        assert_eq!(f.to_rational(), int(8));
    }

    #[test]
    fn decimals() {
        assert_eq!(decimal_string(&rat(32929, 1182600), 6), "0.0278446");
        assert_eq!(decimal_string(&rat(203, 43800), 5), "0.0046347");
        assert_eq!(decimal_string(&rat(1, 2), 20), "0.5");
        assert_eq!(decimal_string(&rat(-123456, 1), 3), "-123000");
        assert_eq!(decimal_string(&rat_pow(&rat(1, 10), 30), 3), "1e-30");
        assert_eq!(s("(77-10√6)/7300").to_decimal(6), "0.00719248");
    }

    #[test]
    fn json_forms() {
        let v = serde_json::to_string(&Scalar::ratio(1, 200)).unwrap();
        assert_eq!(v, r#"{"num":"1","den":"200","decimal":"0.005"}"#);
        let q = s("(77-10√6)/7300");
        let text = serde_json::to_string(&q).unwrap();
        assert!(text.starts_with(r#"{"a":{"num":"77","den":"7300"},"b":{"num":"-1","den":"730"},"surd":6"#));
        let back: Scalar = serde_json::from_str(&text).unwrap();
        assert_eq!(back, q);
    }
}
