//! Exact real numbers: rationals and elements of a real quadratic field.
//!
//! A [`Scalar`] is `a + b·√d` with `a`, `b` rational and `d` square-free. When
//! `b = 0` the value is stored as a plain rational (`d = 0`), so rationals mix
//! freely with any quadratic field. Two irrational scalars from different
//! fields cannot be combined.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::sync::atomic::{AtomicBool, AtomicU64, Ordering as AtomicOrdering};

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScalarError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("field mismatch: sqrt({0}) vs sqrt({1})")]
    FieldMismatch(u64, u64),
    #[error("invalid radicand {0}: must be square-free and at least 2")]
    BadRadicand(u64),
    #[error("cannot parse scalar {0:?}")]
    Parse(String),
}

static MAX_DENOM_BITS: AtomicU64 = AtomicU64::new(0);
static CAP_EXCEEDED: AtomicBool = AtomicBool::new(false);

/// Sets a cap on denominator size in bits (0 disables). Exceeding it only
/// raises a flag; see [`denom_cap_exceeded`].
pub fn set_max_denom_bits(bits: u64) {
    MAX_DENOM_BITS.store(bits, AtomicOrdering::Relaxed);
    CAP_EXCEEDED.store(false, AtomicOrdering::Relaxed);
}

pub fn denom_cap_exceeded() -> bool {
    CAP_EXCEEDED.load(AtomicOrdering::Relaxed)
}

fn note_growth(q: &BigRational) {
    let cap = MAX_DENOM_BITS.load(AtomicOrdering::Relaxed);
    if cap > 0 && q.denom().bits() > cap {
        CAP_EXCEEDED.store(true, AtomicOrdering::Relaxed);
    }
}

/// An exact real number `a + b·√d`.
#[derive(Clone, PartialEq, Eq)]
pub struct Scalar {
    a: BigRational,
    b: BigRational,
    // 0 for rationals; otherwise square-free and >= 2
    d: u64,
}

// Ratio's own Hash walks the continued fraction recursively, which overflows
// the stack on long denominators. Ratios are kept reduced, so the parts suffice.
impl Hash for Scalar {
    fn hash<H: Hasher>(&self, h: &mut H) {
        for q in [&self.a, &self.b] {
            q.numer().hash(h);
            q.denom().hash(h);
        }
        self.d.hash(h);
    }
}

pub fn is_square_free(d: u64) -> bool {
    if d < 2 {
        return false;
    }
    let mut n = d;
    let mut p = 2u64;
    while p.saturating_mul(p) <= n {
        if n.is_multiple_of(p * p) {
            return false;
        }
        if n.is_multiple_of(p) {
            n /= p;
        }
        p += 1;
    }
    true
}

impl Scalar {
    pub fn zero() -> Self {
        Self::from_rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Self::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `p/q`; panics if `q == 0`.
    pub fn ratio(p: i64, q: i64) -> Self {
        Self::from_rational(BigRational::new(BigInt::from(p), BigInt::from(q)))
    }

    pub fn from_rational(q: BigRational) -> Self {
        note_growth(&q);
        Scalar { a: q, b: BigRational::zero(), d: 0 }
    }

    /// `a + b·√d`. Collapses to a rational when `b = 0`.
    pub fn quadratic(a: BigRational, b: BigRational, d: u64) -> Result<Self, ScalarError> {
        if !is_square_free(d) {
            return Err(ScalarError::BadRadicand(d));
        }
        Ok(Self::make(a, b, d))
    }

    fn make(a: BigRational, b: BigRational, d: u64) -> Self {
        note_growth(&a);
        if b.is_zero() {
            Scalar { a, b, d: 0 }
        } else {
            note_growth(&b);
            Scalar { a, b, d }
        }
    }

    /// √d as a scalar.
    pub fn sqrt_of(d: u64) -> Result<Self, ScalarError> {
        Self::quadratic(BigRational::zero(), BigRational::one(), d)
    }

    pub fn rational_part(&self) -> &BigRational {
        &self.a
    }

    pub fn irrational_part(&self) -> &BigRational {
        &self.b
    }

    /// The radicand, or `None` for a rational.
    pub fn field(&self) -> Option<u64> {
        if self.d == 0 {
            None
        } else {
            Some(self.d)
        }
    }

    pub fn is_rational(&self) -> bool {
        self.d == 0
    }

    pub fn is_zero(&self) -> bool {
        self.a.is_zero() && self.b.is_zero()
    }

    fn common_field(&self, other: &Scalar) -> Result<u64, ScalarError> {
        match (self.d, other.d) {
            (0, e) | (e, 0) => Ok(e),
            (e, f) if e == f => Ok(e),
            (e, f) => Err(ScalarError::FieldMismatch(e, f)),
        }
    }

    pub fn checked_add(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let d = self.common_field(other)?;
        Ok(Self::make(&self.a + &other.a, &self.b + &other.b, d))
    }

    pub fn checked_sub(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let d = self.common_field(other)?;
        Ok(Self::make(&self.a - &other.a, &self.b - &other.b, d))
    }

    pub fn checked_mul(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let d = self.common_field(other)?;
        if other.d == 0 || self.d == 0 {
            let (q, x) = if other.d == 0 { (&other.a, self) } else { (&self.a, other) };
            if q.is_one() {
                return Ok(x.clone());
            }
            return Ok(Self::make(&x.a * q, &x.b * q, d));
        }
        let dd = BigRational::from_integer(BigInt::from(d));
        let a = &self.a * &other.a + &self.b * &other.b * dd;
        let b = &self.a * &other.b + &self.b * &other.a;
        Ok(Self::make(a, b, d))
    }

    pub fn checked_div(&self, other: &Scalar) -> Result<Scalar, ScalarError> {
        let d = self.common_field(other)?;
        if other.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        // x / y = x * conj(y) / N(y)
        let dd = BigRational::from_integer(BigInt::from(d));
        let norm = &other.a * &other.a - &other.b * &other.b * dd;
        let conj = Self::make(other.a.clone(), -other.b.clone(), other.d);
        let num = self.checked_mul(&conj)?;
        Ok(Self::make(&num.a / &norm, &num.b / &norm, d))
    }

    pub fn recip(&self) -> Result<Scalar, ScalarError> {
        Scalar::one().checked_div(self)
    }

    /// Sign of the real embedding with √d > 0.
    pub fn signum(&self) -> Ordering {
        let sa = self.a.cmp(&BigRational::zero());
        let sb = self.b.cmp(&BigRational::zero());
        match (sa, sb) {
            (s, Ordering::Equal) => s,
            (Ordering::Equal, s) => s,
            (s, t) if s == t => s,
            (sa, _) => {
                if let Some((v, e)) = self.enclosure() {
                    if v.abs() > e {
                        return if v > 0.0 { Ordering::Greater } else { Ordering::Less };
                    }
                }
                // opposite signs: compare a^2 with b^2 d
                let a2 = &self.a * &self.a;
                let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
                match a2.cmp(&b2d) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => sa,
                    Ordering::Less => sa.reverse(),
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn try_cmp(&self, other: &Scalar) -> Result<Ordering, ScalarError> {
        self.common_field(other)?;
        if self.d == 0 && other.d == 0 {
            return Ok(self.a.cmp(&other.a));
        }
        if let (Some((x, ex)), Some((y, ey))) = (self.enclosure(), other.enclosure()) {
            if x - y > ex + ey {
                return Ok(Ordering::Greater);
            }
            if y - x > ex + ey {
                return Ok(Ordering::Less);
            }
        }
        Ok(self.checked_sub(other)?.signum())
    }

    /// A float approximation with an upper bound on its error, when both
    /// parts convert to finite floats.
    fn enclosure(&self) -> Option<(f64, f64)> {
        let a = self.a.to_f64().filter(|v| v.is_finite())?;
        if self.d == 0 {
            return Some((a, a.abs() * 1e-15 + 1e-300));
        }
        let b = self.b.to_f64().filter(|v| v.is_finite())?;
        let s = (self.d as f64).sqrt();
        Some((a + b * s, (a.abs() + (b * s).abs()) * 1e-14 + 1e-300))
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    pub fn min_of(x: &Scalar, y: &Scalar) -> Scalar {
        if x <= y {
            x.clone()
        } else {
            y.clone()
        }
    }

    pub fn max_of(x: &Scalar, y: &Scalar) -> Scalar {
        if x >= y {
            x.clone()
        } else {
            y.clone()
        }
    }

    /// Largest integer `n` with `n <= self`.
    pub fn floor(&self) -> BigInt {
        if self.d == 0 {
            return self.a.floor().to_integer();
        }
        // b√d = ±√(P/Q), bracket it with an integer square root, then correct
        let b2d = &self.b * &self.b * BigRational::from_integer(BigInt::from(self.d));
        let (p, q) = (b2d.numer().clone(), b2d.denom().clone());
        let m = (&p * &q).sqrt();
        let root_lo = BigRational::new(m, q);
        let approx = if self.b.is_positive() { &self.a + root_lo } else { &self.a - root_lo };
        let mut n = approx.floor().to_integer();
        loop {
            let s = Scalar::from_rational(BigRational::from_integer(n.clone()));
            if s > *self {
                n -= 1;
                continue;
            }
            let s1 = Scalar::from_rational(BigRational::from_integer(&n + 1));
            if s1 <= *self {
                n += 1;
                continue;
            }
            return n;
        }
    }

    /// Decimal rendering with `digits` places, rounded toward negative infinity.
    pub fn to_decimal(&self, digits: u32) -> String {
        let scale = BigInt::from(10u32).pow(digits);
        let scaled = self * &Scalar::from_rational(BigRational::from_integer(scale.clone()));
        let n = scaled.floor();
        let neg = n.sign() == Sign::Minus;
        let (q, r) = n.abs().div_rem(&scale);
        let mut out = String::new();
        if neg {
            out.push('-');
        }
        out.push_str(&q.to_string());
        if digits > 0 {
            out.push('.');
            out.push_str(&format!("{:0>width$}", r.to_string(), width = digits as usize));
        }
        out
    }

    /// Approximation for diagnostics and heuristics only.
    pub fn to_f64(&self) -> f64 {
        let a = self.a.to_f64().unwrap_or(f64::NAN);
        if self.d == 0 {
            return a;
        }
        a + self.b.to_f64().unwrap_or(f64::NAN) * (self.d as f64).sqrt()
    }

    /// Bit size of the largest denominator.
    pub fn denom_bits(&self) -> u64 {
        self.a.denom().bits().max(self.b.denom().bits())
    }

    /// Parses `"p/q"` or `"p"`.
    pub fn parse_rational(s: &str) -> Result<Scalar, ScalarError> {
        let err = || ScalarError::Parse(s.to_string());
        let t = s.trim();
        let (p, q) = match t.split_once('/') {
            Some((p, q)) => (p.trim(), q.trim()),
            None => (t, "1"),
        };
        let p: BigInt = p.parse().map_err(|_| err())?;
        let q: BigInt = q.parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(ScalarError::DivisionByZero);
        }
        Ok(Scalar::from_rational(BigRational::new(p, q)))
    }
}

pub fn rational_to_string(q: &BigRational) -> String {
    if q.denom().is_one() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Scalar {
    /// Panics on a field mismatch; use [`Scalar::try_cmp`] for untrusted input.
    fn cmp(&self, other: &Self) -> Ordering {
        self.try_cmp(other).expect("scalar comparison across fields")
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.d == 0 {
            return write!(f, "{}", rational_to_string(&self.a));
        }
        if self.a.is_zero() {
            write!(f, "{}*sqrt({})", rational_to_string(&self.b), self.d)
        } else if self.b.is_negative() {
            write!(f, "{}-{}*sqrt({})", rational_to_string(&self.a), rational_to_string(&-self.b.clone()), self.d)
        } else {
            write!(f, "{}+{}*sqrt({})", rational_to_string(&self.a), rational_to_string(&self.b), self.d)
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar { a: -self.a.clone(), b: -self.b.clone(), d: self.d }
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -&self
    }
}

macro_rules! binop {
    ($tr:ident, $m:ident, $checked:ident) => {
        impl $tr<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                self.$checked(rhs).unwrap_or_else(|e| panic!("scalar {}: {}", stringify!($m), e))
            }
        }
        impl $tr<Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                (&self).$m(&rhs)
            }
        }
        impl $tr<&Scalar> for Scalar {
            type Output = Scalar;
            fn $m(self, rhs: &Scalar) -> Scalar {
                (&self).$m(rhs)
            }
        }
        impl $tr<Scalar> for &Scalar {
            type Output = Scalar;
            fn $m(self, rhs: Scalar) -> Scalar {
                self.$m(&rhs)
            }
        }
    };
}

binop!(Add, add, checked_add);
binop!(Sub, sub, checked_sub);
binop!(Mul, mul, checked_mul);
binop!(Div, div, checked_div);

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct QuadRepr {
    a: String,
    b: String,
    d: u64,
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Text(String),
    Int(i64),
    Quad(QuadRepr),
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        if self.d == 0 {
            s.serialize_str(&rational_to_string(&self.a))
        } else {
            QuadRepr { a: rational_to_string(&self.a), b: rational_to_string(&self.b), d: self.d }.serialize(s)
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let r = ScalarRepr::deserialize(de)?;
        let out = match r {
            ScalarRepr::Text(t) => Scalar::parse_rational(&t),
            ScalarRepr::Int(n) => Ok(Scalar::from_int(n)),
            ScalarRepr::Quad(q) => {
                let a = Scalar::parse_rational(&q.a);
                let b = Scalar::parse_rational(&q.b);
                match (a, b) {
                    (Ok(a), Ok(b)) => Scalar::quadratic(a.a, b.a, q.d),
                    (Err(e), _) | (_, Err(e)) => Err(e),
                }
            }
        };
        out.map_err(D::Error::custom)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_int(n)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::from_rational(q)
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
