//! Exact rational values and the bundled number vocabulary.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

/// An exact rational quantity value.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Value(BigRational);

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("invalid number literal `{0}`")]
pub struct ParseValueError(pub String);

impl Value {
    pub fn zero() -> Self {
        Value(BigRational::zero())
    }

    pub fn one() -> Self {
        Value(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Value(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn ratio(numer: i64, denom: i64) -> Self {
        Value(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn inner(&self) -> &BigRational {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_one()
    }

    pub fn to_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn checked_div(&self, other: &Value) -> Option<Value> {
        if other.is_zero() {
            None
        } else {
            Some(Value(&self.0 / &other.0))
        }
    }

    /// Relative-tolerance comparison used when matching gold answers that
    /// may have come from decimal input.
    pub fn approx_eq(&self, other: &Value, rel_tol: f64) -> bool {
        if self == other {
            return true;
        }
        let a = self.to_f64();
        let b = other.to_f64();
        let scale = a.abs().max(b.abs()).max(1e-300);
        (a - b).abs() <= rel_tol * scale
    }
}

impl std::ops::Add for &Value {
    type Output = Value;
    fn add(self, rhs: &Value) -> Value {
        Value(&self.0 + &rhs.0)
    }
}

impl std::ops::Sub for &Value {
    type Output = Value;
    fn sub(self, rhs: &Value) -> Value {
        Value(&self.0 - &rhs.0)
    }
}

impl std::ops::Mul for &Value {
    type Output = Value;
    fn mul(self, rhs: &Value) -> Value {
        Value(&self.0 * &rhs.0)
    }
}

impl std::ops::Neg for &Value {
    type Output = Value;
    fn neg(self) -> Value {
        Value(-&self.0)
    }
}

impl FromStr for Value {
    type Err = ParseValueError;

    /// Accepts integers, finite decimals (`2.5`, `-0.75`) and fractions (`5/2`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || ParseValueError(s.to_string());
        let t = s.trim();
        if t.is_empty() {
            return Err(err());
        }
        if let Some((n, d)) = t.split_once('/') {
            let n: BigInt = parse_int(n.trim()).ok_or_else(err)?;
            let d: BigInt = parse_int(d.trim()).ok_or_else(err)?;
            if d.is_zero() {
                return Err(err());
            }
            return Ok(Value(BigRational::new(n, d)));
        }
        let (neg, body) = match t.strip_prefix('-') {
            Some(rest) => (true, rest),
            None => (false, t.strip_prefix('+').unwrap_or(t)),
        };
        let (int_part, frac_part) = match body.split_once('.') {
            Some((i, f)) => (i, f),
            None => (body, ""),
        };
        if int_part.is_empty() && frac_part.is_empty() {
            return Err(err());
        }
        if !int_part.chars().all(|c| c.is_ascii_digit())
            || !frac_part.chars().all(|c| c.is_ascii_digit())
        {
            return Err(err());
        }
        let digits = format!("{int_part}{frac_part}");
        let numer: BigInt = digits.parse().map_err(|_| err())?;
        let denom = num_traits::pow(BigInt::from(10), frac_part.len());
        let mut r = BigRational::new(numer, denom);
        if neg {
            r = -r;
        }
        Ok(Value(r))
    }
}

fn parse_int(s: &str) -> Option<BigInt> {
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    s.parse().ok()
}

impl fmt::Display for Value {
    /// Finite decimals print as decimals (`1.5`), everything else as `p/q`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let r = &self.0;
        if r.is_integer() {
            return write!(f, "{}", r.numer());
        }
        let mut denom = r.denom().clone();
        let two = BigInt::from(2);
        let five = BigInt::from(5);
        let mut twos = 0usize;
        let mut fives = 0usize;
        while (&denom % &two).is_zero() {
            denom /= &two;
            twos += 1;
        }
        while (&denom % &five).is_zero() {
            denom /= &five;
            fives += 1;
        }
        if !denom.is_one() {
            return write!(f, "{}/{}", r.numer(), r.denom());
        }
        let places = twos.max(fives);
        let scale = num_traits::pow(BigInt::from(10), places);
        let scaled = (r * BigRational::from_integer(scale)).to_integer();
        let sign = if scaled.is_negative() { "-" } else { "" };
        let digits = scaled.abs().to_string();
        let digits = format!("{:0>width$}", digits, width = places + 1);
        let (int_part, frac_part) = digits.split_at(digits.len() - places);
        write!(f, "{sign}{int_part}.{frac_part}")
    }
}

impl fmt::Debug for Value {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Value({self})")
    }
}

impl Serialize for Value {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Value {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let raw = serde_json::Value::deserialize(d)?;
        let text = match raw {
            serde_json::Value::String(s) => s,
            serde_json::Value::Number(n) => n.to_string(),
            other => {
                return Err(serde::de::Error::custom(format!(
                    "expected a number or numeric string, got {other}"
                )))
            }
        };
        text.parse().map_err(serde::de::Error::custom)
    }
}

const UNITS: [&str; 20] = [
    "zero",
    "one",
    "two",
    "three",
    "four",
    "five",
    "six",
    "seven",
    "eight",
    "nine",
    "ten",
    "eleven",
    "twelve",
    "thirteen",
    "fourteen",
    "fifteen",
    "sixteen",
    "seventeen",
    "eighteen",
    "nineteen",
];

const TENS: [&str; 8] = [
    "twenty", "thirty", "forty", "fifty", "sixty", "seventy", "eighty", "ninety",
];

/// Value of a single number word in the supported range (zero through one
/// hundred, `dozen`). Hyphenated compounds like `twenty-one` are accepted.
pub fn number_word_value(word: &str) -> Option<i64> {
    let w = word.to_ascii_lowercase();
    if w == "dozen" {
        return Some(12);
    }
    if w == "hundred" {
        return Some(100);
    }
    if let Some(i) = UNITS.iter().position(|u| *u == w) {
        return Some(i as i64);
    }
    if let Some(i) = TENS.iter().position(|t| *t == w) {
        return Some(20 + 10 * i as i64);
    }
    let (tens, unit) = w.split_once('-')?;
    let t = TENS.iter().position(|x| *x == tens)?;
    let u = UNITS[1..10].iter().position(|x| *x == unit)?;
    Some(20 + 10 * t as i64 + u as i64 + 1)
}

/// Parses a digit literal as it appears in text (`88`, `0.75`, `1/2`).
pub fn digit_literal_value(token: &str) -> Option<Value> {
    let first = token.chars().next()?;
    if !first.is_ascii_digit() {
        return None;
    }
    token.parse().ok()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!("2.5".parse::<Value>().unwrap(), Value::ratio(5, 2));
        assert_eq!("0.75".parse::<Value>().unwrap(), Value::ratio(3, 4));
        assert_eq!("-0.5".parse::<Value>().unwrap(), Value::ratio(-1, 2));
        assert_eq!("22".parse::<Value>().unwrap(), Value::from_int(22));
        assert_eq!("5/2".parse::<Value>().unwrap(), Value::ratio(5, 2));
        assert!("1/0".parse::<Value>().is_err());
        assert!("abc".parse::<Value>().is_err());
        assert!(".".parse::<Value>().is_err());
    }

    #[test]
    fn display_prefers_decimals() {
        assert_eq!(Value::ratio(3, 2).to_string(), "1.5");
        assert_eq!(Value::ratio(1, 20).to_string(), "0.05");
        assert_eq!(Value::ratio(-1, 2).to_string(), "-0.5");
        assert_eq!(Value::ratio(5, 3).to_string(), "5/3");
        assert_eq!(Value::from_int(-7).to_string(), "-7");
    }

    #[test]
    fn number_words() {
        assert_eq!(number_word_value("Twelve"), Some(12));
        assert_eq!(number_word_value("twenty-one"), Some(21));
        assert_eq!(number_word_value("ninety-nine"), Some(99));
        assert_eq!(number_word_value("hundred"), Some(100));
        assert_eq!(number_word_value("dozen"), Some(12));
        assert_eq!(number_word_value("twenty-zero"), None);
        assert_eq!(number_word_value("thousand"), None);
    }

    proptest::proptest! {
        #[test]
        fn display_parse_roundtrip(n in -10_000i64..10_000, d in 1i64..2_000) {
            let v = Value::ratio(n, d);
            let back: Value = v.to_string().parse().unwrap();
            proptest::prop_assert_eq!(back, v);
        }
    }
}
