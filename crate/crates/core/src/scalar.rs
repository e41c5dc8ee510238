//! Scalars and module-valued elements.
//!
//! Every computation runs over one [`Scalar`] kind. [`Rational`] is the exact
//! kind used for all kernels and weights; `f64` is accepted for value
//! functions when a caller opts in and converts its kernel explicitly.

use std::cmp::Ordering;
use std::fmt;
use std::hash::{Hash, Hasher};
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::Error;

/// Which scalar kind a computation runs over.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScalarKind {
    Exact,
    Float,
}

/// Arithmetic needed by the path algebra and the attribution engines.
///
/// Methods take references so big rationals are not cloned on every step.
pub trait Scalar: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    const KIND: ScalarKind;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
    /// Explicit conversion from an exact rational. Used when a caller turns an
    /// exact kernel into a float one.
    fn from_rational(r: &Rational) -> Self;
    fn is_zero(&self) -> bool;
    fn add_ref(&self, other: &Self) -> Self;
    fn sub_ref(&self, other: &Self) -> Self;
    fn mul_ref(&self, other: &Self) -> Self;
    fn neg_ref(&self) -> Self;
    /// `None` when `other` is zero.
    fn checked_div(&self, other: &Self) -> Option<Self>;
    /// Exact equality for rationals, relative tolerance for floats.
    fn approx_eq(&self, other: &Self) -> bool;

    fn add_assign_ref(&mut self, other: &Self) {
        *self = self.add_ref(other);
    }

    fn is_one(&self) -> bool {
        self.approx_eq(&Self::one())
    }
}

// ---------------------------------------------------------------------------
// Rational
// ---------------------------------------------------------------------------

/// Exact rational number in canonical form: reduced, positive denominator.
///
/// Values whose numerator and denominator fit in `i64` are stored inline; the
/// rest spill to a boxed [`BigRational`]. A value is never stored big when it
/// fits small, so structural equality is value equality.
#[derive(Clone)]
pub struct Rational(Repr);

#[derive(Clone)]
enum Repr {
    Small(i64, i64),
    Big(Box<BigRational>),
}

fn gcd_i128(mut a: i128, mut b: i128) -> i128 {
    a = a.abs();
    b = b.abs();
    while b != 0 {
        let t = a % b;
        a = b;
        b = t;
    }
    a
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Rational {
        assert!(denom != 0, "rational with zero denominator");
        Rational::from_i128(numer as i128, denom as i128)
    }

    pub fn integer(v: i64) -> Rational {
        Rational(Repr::Small(v, 1))
    }

    fn from_i128(mut n: i128, mut d: i128) -> Rational {
        debug_assert!(d != 0);
        if d == 1 {
            if let Ok(n) = i64::try_from(n) {
                return Rational(Repr::Small(n, 1));
            }
        }
        if d < 0 {
            n = -n;
            d = -d;
        }
        let g = gcd_i128(n, d);
        if g > 1 {
            n /= g;
            d /= g;
        }
        if n == 0 {
            return Rational(Repr::Small(0, 1));
        }
        match (i64::try_from(n), i64::try_from(d)) {
            (Ok(n), Ok(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(BigRational::new_raw(BigInt::from(n), BigInt::from(d))))),
        }
    }

    /// Canonicalizes a big rational, demoting it to the inline form when it fits.
    pub fn from_big(r: BigRational) -> Rational {
        // BigRational::new reduces and fixes the sign; new_raw does not.
        let r = if r.denom().is_negative() || !r.numer().gcd(r.denom()).is_one() {
            BigRational::new(r.numer().clone(), r.denom().clone())
        } else {
            r
        };
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational(Repr::Small(n, d)),
            _ => Rational(Repr::Big(Box::new(r))),
        }
    }

    pub fn from_bigint(n: BigInt) -> Rational {
        Rational::from_big(BigRational::from_integer(n))
    }

    pub fn to_big(&self) -> BigRational {
        match &self.0 {
            Repr::Small(n, d) => BigRational::new_raw(BigInt::from(*n), BigInt::from(*d)),
            Repr::Big(b) => (**b).clone(),
        }
    }

    pub fn numer(&self) -> BigInt {
        match &self.0 {
            Repr::Small(n, _) => BigInt::from(*n),
            Repr::Big(b) => b.numer().clone(),
        }
    }

    pub fn denom(&self) -> BigInt {
        match &self.0 {
            Repr::Small(_, d) => BigInt::from(*d),
            Repr::Big(b) => b.denom().clone(),
        }
    }

    pub fn is_integer(&self) -> bool {
        match &self.0 {
            Repr::Small(_, d) => *d == 1,
            Repr::Big(b) => b.is_integer(),
        }
    }

    pub fn is_negative(&self) -> bool {
        match &self.0 {
            Repr::Small(n, _) => *n < 0,
            Repr::Big(b) => b.is_negative(),
        }
    }

    pub fn recip(&self) -> Option<Rational> {
        Rational::one().checked_div(self)
    }

    pub fn to_f64(&self) -> f64 {
        match &self.0 {
            Repr::Small(n, d) => *n as f64 / *d as f64,
            Repr::Big(b) => b.to_f64().unwrap_or(f64::NAN),
        }
    }

    /// Decimal rendering with `digits` significant digits, trailing zeros trimmed.
    pub fn to_decimal_string(&self, digits: usize) -> String {
        format_float(self.to_f64(), digits)
    }

    fn binop(
        &self,
        other: &Rational,
        small: impl Fn(i128, i128, i128, i128) -> Option<(i128, i128)>,
        big: impl Fn(BigRational, BigRational) -> BigRational,
    ) -> Rational {
        if let (Repr::Small(a, b), Repr::Small(c, d)) = (&self.0, &other.0) {
            if let Some((n, d)) = small(*a as i128, *b as i128, *c as i128, *d as i128) {
                return Rational::from_i128(n, d);
            }
        }
        Rational::from_big(big(self.to_big(), other.to_big()))
    }
}

/// Formats a float with `digits` significant digits, avoiding exponent
/// notation in the usual range.
pub fn format_float(x: f64, digits: usize) -> String {
    if x == 0.0 {
        return "0".to_string();
    }
    if !x.is_finite() {
        return format!("{x}");
    }
    let digits = digits.max(1);
    let sci = format!("{:.*e}", digits - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-6..=15).contains(&exp) {
        let m = trim_zeros(mantissa);
        return format!("{m}e{exp}");
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{:.*}", decimals, x)).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

impl Scalar for Rational {
    const KIND: ScalarKind = ScalarKind::Exact;

    fn zero() -> Self {
        Rational::integer(0)
    }
    fn one() -> Self {
        Rational::integer(1)
    }
    fn from_i64(v: i64) -> Self {
        Rational::integer(v)
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn is_zero(&self) -> bool {
        matches!(self.0, Repr::Small(0, _))
    }
    fn add_ref(&self, other: &Self) -> Self {
        self.binop(
            other,
            |a, b, c, d| {
                if b == d {
                    return Some((a.checked_add(c)?, b));
                }
                Some((a.checked_mul(d)?.checked_add(c.checked_mul(b)?)?, b.checked_mul(d)?))
            },
            |x, y| x + y,
        )
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self.add_ref(&other.neg_ref())
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self.binop(other, |a, b, c, d| Some((a.checked_mul(c)?, b.checked_mul(d)?)), |x, y| x * y)
    }
    fn neg_ref(&self) -> Self {
        match &self.0 {
            Repr::Small(n, d) => match n.checked_neg() {
                Some(m) => Rational(Repr::Small(m, *d)),
                None => Rational::from_i128(-(*n as i128), *d as i128),
            },
            Repr::Big(b) => Rational::from_big(-(**b).clone()),
        }
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        if other.is_zero() {
            return None;
        }
        Some(self.binop(other, |a, b, c, d| Some((a.checked_mul(d)?, b.checked_mul(c)?)), |x, y| x / y))
    }
    fn approx_eq(&self, other: &Self) -> bool {
        self == other
    }
    fn is_one(&self) -> bool {
        matches!(self.0, Repr::Small(1, 1))
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => a == c && b == d,
            (Repr::Big(x), Repr::Big(y)) => x == y,
            _ => false,
        }
    }
}

impl Eq for Rational {}

impl Hash for Rational {
    fn hash<H: Hasher>(&self, state: &mut H) {
        match &self.0 {
            Repr::Small(n, d) => {
                0u8.hash(state);
                n.hash(state);
                d.hash(state);
            }
            Repr::Big(b) => {
                1u8.hash(state);
                b.numer().hash(state);
                b.denom().hash(state);
            }
        }
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (&self.0, &other.0) {
            (Repr::Small(a, b), Repr::Small(c, d)) => (*a as i128 * *d as i128).cmp(&(*c as i128 * *b as i128)),
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Default for Rational {
    fn default() -> Self {
        Rational::zero()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.0 {
            Repr::Small(n, 1) => write!(f, "{n}"),
            Repr::Small(n, d) => write!(f, "{n}/{d}"),
            Repr::Big(b) if b.is_integer() => write!(f, "{}", b.numer()),
            Repr::Big(b) => write!(f, "{}/{}", b.numer(), b.denom()),
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl From<i64> for Rational {
    fn from(v: i64) -> Self {
        Rational::integer(v)
    }
}

impl From<i32> for Rational {
    fn from(v: i32) -> Self {
        Rational::integer(v as i64)
    }
}

impl From<u64> for Rational {
    fn from(v: u64) -> Self {
        Rational::from_i128(v as i128, 1)
    }
}

impl From<usize> for Rational {
    fn from(v: usize) -> Self {
        Rational::from_i128(v as i128, 1)
    }
}

impl From<BigInt> for Rational {
    fn from(v: BigInt) -> Self {
        Rational::from_bigint(v)
    }
}

/// Parses `"p/q"` or an integer literal. Surrounding whitespace is ignored;
/// decimals and exponents are rejected so inputs stay exact.
impl FromStr for Rational {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || Error::ParseRational(s.to_string());
        let t = s.trim();
        let (num, den) = match t.split_once('/') {
            Some((n, d)) => (n.trim(), Some(d.trim())),
            None => (t, None),
        };
        let parse_int = |x: &str, allow_sign: bool| -> Result<BigInt, Error> {
            let digits = if allow_sign { x.strip_prefix('-').or_else(|| x.strip_prefix('+')).unwrap_or(x) } else { x };
            if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                return Err(bad());
            }
            x.parse::<BigInt>().map_err(|_| bad())
        };
        let n = parse_int(num, true)?;
        let d = match den {
            Some(d) => parse_int(d, false)?,
            None => BigInt::one(),
        };
        if d.is_zero() {
            return Err(bad());
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

macro_rules! forward_ops {
    ($tr:ident, $method:ident, $impl_fn:ident) => {
        impl $tr<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                self.$impl_fn(&rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                self.$impl_fn(rhs)
            }
        }
        impl<'a> $tr<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                self.$impl_fn(rhs)
            }
        }
    };
}

forward_ops!(Add, add, add_ref);
forward_ops!(Sub, sub, sub_ref);
forward_ops!(Mul, mul, mul_ref);

impl Div for Rational {
    type Output = Rational;
    fn div(self, rhs: Rational) -> Rational {
        self.checked_div(&rhs).expect("division by zero rational")
    }
}

impl<'a> Div<&'a Rational> for &'a Rational {
    type Output = Rational;
    fn div(self, rhs: &'a Rational) -> Rational {
        self.checked_div(rhs).expect("division by zero rational")
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl Neg for &Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        self.neg_ref()
    }
}

impl std::iter::Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Rational {
        iter.fold(Rational::zero(), |acc, x| acc.add_ref(&x))
    }
}

/// Shorthand for `Rational::new`, used heavily in tests.
pub fn rat(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}

// ---------------------------------------------------------------------------
// f64
// ---------------------------------------------------------------------------

const FLOAT_REL_TOL: f64 = 1e-9;
const FLOAT_ABS_TOL: f64 = 1e-12;

impl Scalar for f64 {
    const KIND: ScalarKind = ScalarKind::Float;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &Rational) -> Self {
        r.to_f64()
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn add_ref(&self, other: &Self) -> Self {
        self + other
    }
    fn sub_ref(&self, other: &Self) -> Self {
        self - other
    }
    fn mul_ref(&self, other: &Self) -> Self {
        self * other
    }
    fn neg_ref(&self) -> Self {
        -self
    }
    fn checked_div(&self, other: &Self) -> Option<Self> {
        if *other == 0.0 {
            None
        } else {
            Some(self / other)
        }
    }
    fn approx_eq(&self, other: &Self) -> bool {
        let diff = (self - other).abs();
        diff <= FLOAT_ABS_TOL || diff <= FLOAT_REL_TOL * self.abs().max(other.abs())
    }
}

// ---------------------------------------------------------------------------
// Module values
// ---------------------------------------------------------------------------

/// Shape shared by all values of one value function.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Shape {
    Scalar,
    Vector(usize),
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Shape::Scalar => write!(f, "scalar"),
            Shape::Vector(n) => write!(f, "vector[{n}]"),
        }
    }
}

/// Element of the value module: a scalar or a fixed-length vector of scalars.
#[derive(Debug, Clone, PartialEq)]
pub enum ModuleValue<S> {
    Scalar(S),
    Vector(Vec<S>),
}

impl<S: Scalar> ModuleValue<S> {
    pub fn zero(shape: Shape) -> Self {
        match shape {
            Shape::Scalar => ModuleValue::Scalar(S::zero()),
            Shape::Vector(n) => ModuleValue::Vector(vec![S::zero(); n]),
        }
    }

    pub fn shape(&self) -> Shape {
        match self {
            ModuleValue::Scalar(_) => Shape::Scalar,
            ModuleValue::Vector(v) => Shape::Vector(v.len()),
        }
    }

    pub fn components(&self) -> &[S] {
        match self {
            ModuleValue::Scalar(s) => std::slice::from_ref(s),
            ModuleValue::Vector(v) => v,
        }
    }

    fn components_mut(&mut self) -> &mut [S] {
        match self {
            ModuleValue::Scalar(s) => std::slice::from_mut(s),
            ModuleValue::Vector(v) => v,
        }
    }

    pub fn as_scalar(&self) -> Option<&S> {
        match self {
            ModuleValue::Scalar(s) => Some(s),
            ModuleValue::Vector(_) => None,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.components().iter().all(|c| c.is_zero())
    }

    pub fn approx_eq(&self, other: &Self) -> bool {
        self.shape() == other.shape() && self.components().iter().zip(other.components()).all(|(a, b)| a.approx_eq(b))
    }

    /// # Panics
    ///
    /// Panics if the shapes differ; value functions guarantee a common shape.
    pub fn add_assign(&mut self, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "module value shape mismatch");
        for (a, b) in self.components_mut().iter_mut().zip(other.components()) {
            a.add_assign_ref(b);
        }
    }

    pub fn sub_assign(&mut self, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "module value shape mismatch");
        for (a, b) in self.components_mut().iter_mut().zip(other.components()) {
            *a = a.sub_ref(b);
        }
    }

    /// `self += coef * other`
    pub fn add_scaled(&mut self, coef: &S, other: &Self) {
        assert_eq!(self.shape(), other.shape(), "module value shape mismatch");
        if coef.is_zero() {
            return;
        }
        for (a, b) in self.components_mut().iter_mut().zip(other.components()) {
            if !b.is_zero() {
                a.add_assign_ref(&coef.mul_ref(b));
            }
        }
    }

    pub fn scaled(&self, coef: &S) -> Self {
        self.map(|c| coef.mul_ref(c))
    }

    pub fn negated(&self) -> Self {
        self.map(|c| c.neg_ref())
    }

    pub fn added(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_assign(other);
        out
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(&S) -> T) -> ModuleValue<T> {
        match self {
            ModuleValue::Scalar(s) => ModuleValue::Scalar(f(s)),
            ModuleValue::Vector(v) => ModuleValue::Vector(v.iter().map(f).collect()),
        }
    }
}

impl<S: Scalar> fmt::Display for ModuleValue<S> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ModuleValue::Scalar(s) => write!(f, "{s}"),
            ModuleValue::Vector(v) => {
                write!(f, "[")?;
                for (i, c) in v.iter().enumerate() {
                    if i > 0 {
                        write!(f, ", ")?;
                    }
                    write!(f, "{c}")?;
                }
                write!(f, "]")
            }
        }
    }
}

impl<S: Scalar> From<S> for ModuleValue<S> {
    fn from(s: S) -> Self {
        ModuleValue::Scalar(s)
    }
}
