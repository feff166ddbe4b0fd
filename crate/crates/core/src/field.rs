//! Coefficient fields for chains, boundary matrices and linear programs.
//!
//! [`Rational`] is exact arithmetic over ℚ. It stays on machine integers while
//! numerators and denominators fit in `i64` and promotes to big integers on
//! overflow, so reductions over Rips boundary matrices (whose entries almost
//! never leave {−2, …, 2}) run at near-integer speed.
//!
//! [`Zp`] is the prime field ℤ/p; [`Mod2`] is the cross-check field.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use num_traits::{CheckedAdd, CheckedDiv, CheckedMul, CheckedSub, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

/// Field operations needed by the homology engine.
pub trait Field: Clone + PartialEq + fmt::Debug + fmt::Display + Send + Sync + 'static {
    fn zero() -> Self;
    fn one() -> Self;
    fn is_zero(&self) -> bool;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    /// Multiplicative inverse. Panics on zero.
    fn inv(&self) -> Self;
    fn from_i64(v: i64) -> Self;
    fn to_f64(&self) -> f64;

    fn div(&self, other: &Self) -> Self {
        self.mul(&other.inv())
    }

    fn is_one(&self) -> bool {
        *self == Self::one()
    }
}

/// Runtime field selection (CLI flag / `RIPSCOVER_FIELD`).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum FieldKind {
    #[default]
    Rational,
    Mod2,
}

impl FromStr for FieldKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rational" | "q" | "rationals" => Ok(FieldKind::Rational),
            "mod2" | "z2" | "f2" | "gf2" => Ok(FieldKind::Mod2),
            other => Err(format!("unknown field '{other}' (expected rational|mod2)")),
        }
    }
}

impl fmt::Display for FieldKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FieldKind::Rational => write!(f, "rational"),
            FieldKind::Mod2 => write!(f, "mod2"),
        }
    }
}

/// Exact rational number.
#[derive(Clone)]
pub enum Rational {
    Small(Ratio<i64>),
    Big(BigRational),
}

impl Rational {
    pub fn new(numer: i64, denom: i64) -> Self {
        Rational::Small(Ratio::new(numer, denom))
    }

    pub fn from_big(r: BigRational) -> Self {
        match (r.numer().to_i64(), r.denom().to_i64()) {
            (Some(n), Some(d)) => Rational::Small(Ratio::new_raw(n, d)),
            _ => Rational::Big(r),
        }
    }

    pub fn to_big(&self) -> BigRational {
        match self {
            Rational::Small(r) => BigRational::new_raw(BigInt::from(*r.numer()), BigInt::from(*r.denom())),
            Rational::Big(r) => r.clone(),
        }
    }

    pub fn numer_string(&self) -> String {
        match self {
            Rational::Small(r) => r.numer().to_string(),
            Rational::Big(r) => r.numer().to_string(),
        }
    }

    pub fn denom_string(&self) -> String {
        match self {
            Rational::Small(r) => r.denom().to_string(),
            Rational::Big(r) => r.denom().to_string(),
        }
    }

    pub fn abs(&self) -> Self {
        match self {
            Rational::Small(r) => match r.numer().checked_abs() {
                Some(n) => Rational::Small(Ratio::new_raw(n, *r.denom())),
                None => Rational::from_big(self.to_big().abs()),
            },
            Rational::Big(r) => Rational::from_big(r.abs()),
        }
    }

    pub fn is_negative(&self) -> bool {
        match self {
            Rational::Small(r) => *r.numer() < 0,
            Rational::Big(r) => r.is_negative(),
        }
    }

    pub fn is_positive(&self) -> bool {
        match self {
            Rational::Small(r) => *r.numer() > 0,
            Rational::Big(r) => r.is_positive(),
        }
    }

    /// True when the value is an integer in {−1, 0, 1}.
    pub fn is_unit_or_zero(&self) -> bool {
        match self {
            Rational::Small(r) => *r.denom() == 1 && r.numer().abs() <= 1,
            Rational::Big(_) => false,
        }
    }

    fn binop(
        &self,
        other: &Self,
        small: impl Fn(&Ratio<i64>, &Ratio<i64>) -> Option<Ratio<i64>>,
        big: impl Fn(&BigRational, &BigRational) -> BigRational,
    ) -> Self {
        if let (Rational::Small(a), Rational::Small(b)) = (self, other) {
            if let Some(r) = small(a, b) {
                return Rational::Small(r);
            }
        }
        Rational::from_big(big(&self.to_big(), &other.to_big()))
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

/// Always `num/den`, e.g. `-1/1`, `3/2`.
impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.numer_string(), self.denom_string())
    }
}

impl FromStr for Rational {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let (n, d) = match s.split_once('/') {
            Some((n, d)) => (n.trim(), d.trim()),
            None => (s, "1"),
        };
        let n: BigInt = n.parse().map_err(|_| format!("bad numerator in '{s}'"))?;
        let d: BigInt = d.parse().map_err(|_| format!("bad denominator in '{s}'"))?;
        if d.is_zero() {
            return Err(format!("zero denominator in '{s}'"));
        }
        Ok(Rational::from_big(BigRational::new(n, d)))
    }
}

impl PartialEq for Rational {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Rational::Small(a), Rational::Small(b)) => a == b,
            _ => self.to_big() == other.to_big(),
        }
    }
}

impl Eq for Rational {}

impl PartialOrd for Rational {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Rational {
    fn cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Rational::Small(a), Rational::Small(b)) => {
                // cross-multiply in i128 to avoid overflow
                let l = *a.numer() as i128 * *b.denom() as i128;
                let r = *b.numer() as i128 * *a.denom() as i128;
                l.cmp(&r)
            }
            _ => self.to_big().cmp(&other.to_big()),
        }
    }
}

impl Field for Rational {
    fn zero() -> Self {
        Rational::Small(Ratio::zero())
    }
    fn one() -> Self {
        Rational::Small(Ratio::one())
    }
    fn is_zero(&self) -> bool {
        match self {
            Rational::Small(r) => r.is_zero(),
            Rational::Big(r) => r.is_zero(),
        }
    }
    fn add(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.checked_add(b), |a, b| a + b)
    }
    fn sub(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.checked_sub(b), |a, b| a - b)
    }
    fn mul(&self, other: &Self) -> Self {
        self.binop(other, |a, b| a.checked_mul(b), |a, b| a * b)
    }
    fn div(&self, other: &Self) -> Self {
        assert!(!other.is_zero(), "division by zero");
        self.binop(other, |a, b| a.checked_div(b), |a, b| a / b)
    }
    fn neg(&self) -> Self {
        match self {
            Rational::Small(r) => match r.numer().checked_neg() {
                Some(n) => Rational::Small(Ratio::new_raw(n, *r.denom())),
                None => Rational::from_big(-self.to_big()),
            },
            Rational::Big(r) => Rational::from_big(-r),
        }
    }
    fn inv(&self) -> Self {
        assert!(!self.is_zero(), "inverse of zero");
        match self {
            Rational::Small(r) if *r.numer() != i64::MIN => Rational::Small(r.recip()),
            _ => Rational::from_big(self.to_big().recip()),
        }
    }
    fn from_i64(v: i64) -> Self {
        Rational::Small(Ratio::from_integer(v))
    }
    fn to_f64(&self) -> f64 {
        match self {
            Rational::Small(r) => *r.numer() as f64 / *r.denom() as f64,
            Rational::Big(r) => r.to_f64().unwrap_or(f64::NAN),
        }
    }
    fn is_one(&self) -> bool {
        matches!(self, Rational::Small(r) if r.is_one())
    }
}

/// Prime field ℤ/P. `P` must be prime.
#[derive(Clone, Copy, PartialEq, Eq, Hash)]
pub struct Zp<const P: u32>(u32);

pub type Mod2 = Zp<2>;

impl<const P: u32> Zp<P> {
    pub fn value(self) -> u32 {
        self.0
    }

    fn pow(self, mut e: u32) -> Self {
        let mut base = self.0 as u64;
        let mut acc = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base % P as u64;
            }
            base = base * base % P as u64;
            e >>= 1;
        }
        Zp(acc as u32)
    }
}

impl<const P: u32> fmt::Debug for Zp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {})", self.0, P)
    }
}

impl<const P: u32> fmt::Display for Zp<P> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl<const P: u32> Field for Zp<P> {
    fn zero() -> Self {
        Zp(0)
    }
    fn one() -> Self {
        Zp(1 % P)
    }
    fn is_zero(&self) -> bool {
        self.0 == 0
    }
    fn add(&self, other: &Self) -> Self {
        Zp(((self.0 as u64 + other.0 as u64) % P as u64) as u32)
    }
    fn sub(&self, other: &Self) -> Self {
        Zp(((self.0 as u64 + P as u64 - other.0 as u64) % P as u64) as u32)
    }
    fn mul(&self, other: &Self) -> Self {
        Zp((self.0 as u64 * other.0 as u64 % P as u64) as u32)
    }
    fn neg(&self) -> Self {
        Zp((P - self.0) % P)
    }
    fn inv(&self) -> Self {
        assert!(self.0 != 0, "inverse of zero");
        self.pow(P - 2)
    }
    fn from_i64(v: i64) -> Self {
        Zp(v.rem_euclid(P as i64) as u32)
    }
    fn to_f64(&self) -> f64 {
        self.0 as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_promotes_on_overflow() {
        let big = Rational::from_i64(i64::MAX);
        let sum = big.add(&Rational::one());
        assert!(matches!(sum, Rational::Big(_)));
        let back = sum.sub(&Rational::one());
        assert!(matches!(back, Rational::Small(_)));
        assert_eq!(back, Rational::from_i64(i64::MAX));
    }

    #[test]
    fn rational_display_and_parse() {
        let r = Rational::new(-6, 4);
        assert_eq!(r.to_string(), "-3/2");
        assert_eq!("-3/2".parse::<Rational>().unwrap(), r);
        assert_eq!("5".parse::<Rational>().unwrap(), Rational::from_i64(5));
        assert!("1/0".parse::<Rational>().is_err());
    }

    #[test]
    fn rational_ordering() {
        assert!(Rational::new(1, 3) < Rational::new(1, 2));
        assert!(Rational::new(-1, 2) < Rational::zero());
        assert_eq!(Rational::new(2, 4).cmp(&Rational::new(1, 2)), Ordering::Equal);
    }

    #[test]
    fn zp_arithmetic() {
        type F7 = Zp<7>;
        let a = F7::from_i64(3);
        assert_eq!(a.mul(&a.inv()), F7::one());
        assert_eq!(F7::from_i64(-1), F7::from_i64(6));
        assert_eq!(Mod2::one().add(&Mod2::one()), Mod2::zero());
        assert_eq!(Mod2::one().neg(), Mod2::one());
    }
}
