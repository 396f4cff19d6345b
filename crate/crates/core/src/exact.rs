//! Exact non-negative rationals, dyadic rationals, finite binary words, and
//! the binary coding map from words to `[0, 1]`.
//!
//! Nothing in this crate touches floating point. Every distance is a
//! [`Rational`]; every value produced by the coding map is a [`Dyadic`].

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul};
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ExactError {
    #[error("cannot parse {0:?} as a non-negative rational")]
    Parse(String),
    #[error("zero denominator in {0:?}")]
    ZeroDenominator(String),
    #[error("negative value {0}")]
    Negative(String),
    #[error("{0} is not a dyadic rational")]
    NotDyadic(String),
    #[error("{0} is outside [0, 1)")]
    OutOfUnitInterval(String),
    #[error("{value} needs {needed} bits but the word has length {len}")]
    TooFine { value: String, needed: u32, len: usize },
    #[error("invalid bit {0:?} in binary word")]
    BadBit(char),
}

/// Arbitrary-precision non-negative rational, always in lowest terms.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Rational(BigRational);

impl Rational {
    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
    }

    pub fn from_integer(n: u64) -> Self {
        Rational(BigRational::from_integer(BigInt::from(n)))
    }

    /// `num / den`; fails on a zero denominator.
    pub fn new(num: u64, den: u64) -> Result<Self, ExactError> {
        Self::from_biguints(BigUint::from(num), BigUint::from(den))
    }

    pub fn from_biguints(num: BigUint, den: BigUint) -> Result<Self, ExactError> {
        if den.is_zero() {
            return Err(ExactError::ZeroDenominator(format!("{num}/0")));
        }
        Ok(Rational(BigRational::new(num.into(), den.into())))
    }

    pub fn numer(&self) -> BigUint {
        self.0.numer().to_biguint().expect("non-negative")
    }

    pub fn denom(&self) -> BigUint {
        self.0.denom().to_biguint().expect("positive")
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.0.is_zero()
    }

    /// `self - other`, or `None` when the result would be negative.
    pub fn checked_sub(&self, other: &Rational) -> Option<Rational> {
        if other > self {
            None
        } else {
            Some(Rational(&self.0 - &other.0))
        }
    }

    /// `|self - other|`.
    pub fn abs_diff(&self, other: &Rational) -> Rational {
        Rational((&self.0 - &other.0).abs())
    }

    /// Exact halving.
    pub fn half(&self) -> Rational {
        Rational(&self.0 / BigRational::from_integer(BigInt::from(2)))
    }

    /// Lossy conversion for display or plotting only.
    pub fn approx_f64(&self) -> f64 {
        self.0.to_f64().unwrap_or(f64::NAN)
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

fn parse_biguint(s: &str, whole: &str) -> Result<BigUint, ExactError> {
    if s.is_empty() || !s.bytes().all(|b| b.is_ascii_digit()) {
        return Err(ExactError::Parse(whole.to_string()));
    }
    BigUint::from_str(s).map_err(|_| ExactError::Parse(whole.to_string()))
}

impl FromStr for Rational {
    type Err = ExactError;

    /// Accepts `p`, `p/q`, and `p/2^k`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim();
        if t.starts_with('-') {
            return Err(ExactError::Negative(t.to_string()));
        }
        match t.split_once('/') {
            None => Ok(Rational(BigRational::from_integer(parse_biguint(t, s)?.into()))),
            Some((p, q)) => {
                let num = parse_biguint(p.trim(), s)?;
                let q = q.trim();
                let den = match q.split_once('^') {
                    Some((base, exp)) => {
                        if base.trim() != "2" {
                            return Err(ExactError::Parse(s.to_string()));
                        }
                        let k: u32 = exp.trim().parse().map_err(|_| ExactError::Parse(s.to_string()))?;
                        BigUint::one() << k
                    }
                    None => parse_biguint(q, s)?,
                };
                if den.is_zero() {
                    return Err(ExactError::ZeroDenominator(s.to_string()));
                }
                Rational::from_biguints(num, den)
            }
        }
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

impl Add for &Rational {
    type Output = Rational;
    fn add(self, rhs: &Rational) -> Rational {
        Rational(&self.0 + &rhs.0)
    }
}

impl Add for Rational {
    type Output = Rational;
    fn add(self, rhs: Rational) -> Rational {
        Rational(self.0 + rhs.0)
    }
}

impl Mul for &Rational {
    type Output = Rational;
    fn mul(self, rhs: &Rational) -> Rational {
        Rational(&self.0 * &rhs.0)
    }
}

impl Mul for Rational {
    type Output = Rational;
    fn mul(self, rhs: Rational) -> Rational {
        Rational(self.0 * rhs.0)
    }
}

impl From<&Dyadic> for Rational {
    fn from(d: &Dyadic) -> Self {
        d.to_rational()
    }
}

impl From<Dyadic> for Rational {
    fn from(d: Dyadic) -> Self {
        d.to_rational()
    }
}

/// A non-negative rational `num / 2^exp` in canonical form: `num` is odd,
/// or `num == 0 && exp == 0`.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct Dyadic {
    num: BigUint,
    exp: u32,
}

impl Dyadic {
    pub fn new(num: BigUint, exp: u32) -> Self {
        if num.is_zero() {
            return Dyadic::zero();
        }
        let tz = num.trailing_zeros().unwrap_or(0);
        let shift = tz.min(u64::from(exp)) as u32;
        Dyadic {
            num: num >> shift,
            exp: exp - shift,
        }
    }

    pub fn zero() -> Self {
        Dyadic {
            num: BigUint::zero(),
            exp: 0,
        }
    }

    pub fn num(&self) -> &BigUint {
        &self.num
    }

    pub fn exp(&self) -> u32 {
        self.exp
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn to_rational(&self) -> Rational {
        Rational::from_biguints(self.num.clone(), BigUint::one() << self.exp).expect("power of two is non-zero")
    }
}

impl TryFrom<&Rational> for Dyadic {
    type Error = ExactError;

    fn try_from(r: &Rational) -> Result<Self, Self::Error> {
        let den = r.denom();
        // power of two iff den & (den - 1) == 0
        if !(&den & (&den - BigUint::one())).is_zero() {
            return Err(ExactError::NotDyadic(r.to_string()));
        }
        let exp = den.trailing_zeros().unwrap_or(0) as u32;
        Ok(Dyadic::new(r.numer(), exp))
    }
}

impl Ord for Dyadic {
    fn cmp(&self, other: &Self) -> Ordering {
        let e = self.exp.max(other.exp);
        let a = &self.num << (e - self.exp);
        let b = &other.num << (e - other.exp);
        a.cmp(&b)
    }
}

impl PartialOrd for Dyadic {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(&self.to_rational(), f)
    }
}

impl fmt::Debug for Dyadic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Dyadic {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Dyadic::try_from(&s.parse::<Rational>()?)
    }
}

impl Serialize for Dyadic {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Dyadic {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Finite word over `{0, 1}`. The derived order is lexicographic, which is
/// the usual order on words of equal length.
#[derive(Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BitWord(Vec<bool>);

impl BitWord {
    pub fn new() -> Self {
        BitWord(Vec::new())
    }

    pub fn zeros(len: usize) -> Self {
        BitWord(vec![false; len])
    }

    pub fn from_bits(bits: Vec<bool>) -> Self {
        BitWord(bits)
    }

    pub fn bits(&self) -> &[bool] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn get(&self, i: usize) -> Option<bool> {
        self.0.get(i).copied()
    }

    pub fn push(&mut self, bit: bool) {
        self.0.push(bit);
    }

    /// `self ⌢ bit`
    pub fn child(&self, bit: bool) -> BitWord {
        let mut w = self.clone();
        w.push(bit);
        w
    }

    /// First `n` bits (the whole word if shorter).
    pub fn prefix(&self, n: usize) -> BitWord {
        BitWord(self.0[..n.min(self.len())].to_vec())
    }

    pub fn is_prefix_of(&self, other: &BitWord) -> bool {
        other.0.starts_with(&self.0)
    }

    /// True for `0^k`, including the empty word.
    pub fn is_all_zero(&self) -> bool {
        self.0.iter().all(|b| !b)
    }

    pub fn common_prefix_len(&self, other: &BitWord) -> usize {
        self.0.iter().zip(&other.0).take_while(|(a, b)| a == b).count()
    }

    /// Pads with zeros up to `len`; longer words are returned unchanged.
    pub fn padded(&self, len: usize) -> BitWord {
        let mut bits = self.0.clone();
        if bits.len() < len {
            bits.resize(len, false);
        }
        BitWord(bits)
    }

    /// All words of length `len` in lexicographic order.
    pub fn all_of_length(len: usize) -> impl Iterator<Item = BitWord> {
        assert!(len < usize::BITS as usize);
        (0usize..(1 << len)).map(move |n| BitWord((0..len).map(|i| (n >> (len - 1 - i)) & 1 == 1).collect()))
    }
}

impl fmt::Display for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for &b in &self.0 {
            f.write_str(if b { "1" } else { "0" })?;
        }
        Ok(())
    }
}

impl fmt::Debug for BitWord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BitWord({self})")
    }
}

impl FromStr for BitWord {
    type Err = ExactError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        s.chars()
            .map(|c| match c {
                '0' => Ok(false),
                '1' => Ok(true),
                other => Err(ExactError::BadBit(other)),
            })
            .collect::<Result<Vec<_>, _>>()
            .map(BitWord)
    }
}

impl Serialize for BitWord {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for BitWord {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The coding map: `Σ_{i<|w|} w(i) / 2^{i+1}`, i.e. the word read as a
/// binary fraction, padded with zeros.
pub fn pi_of_word(w: &BitWord) -> Dyadic {
    let mut num = BigUint::zero();
    for &bit in w.bits() {
        num <<= 1u32;
        if bit {
            num += 1u32;
        }
    }
    Dyadic::new(num, w.len() as u32)
}

/// Inverse of [`pi_of_word`] at a fixed length, always choosing the
/// eventually-zero expansion.
pub fn word_of_dyadic(q: &Dyadic, len: usize) -> Result<BitWord, ExactError> {
    if q.num() >= &(BigUint::one() << q.exp()) {
        return Err(ExactError::OutOfUnitInterval(q.to_string()));
    }
    if q.exp() as usize > len {
        return Err(ExactError::TooFine {
            value: q.to_string(),
            needed: q.exp(),
            len,
        });
    }
    let scaled: BigUint = q.num() << (len as u32 - q.exp());
    Ok(BitWord((0..len).map(|i| scaled.bit((len - 1 - i) as u64)).collect()))
}

/// Exactly `1 / 2^k`.
pub fn two_pow_neg(k: u32) -> Dyadic {
    Dyadic::new(BigUint::one(), k)
}

/// Helper for tests and fixtures: panics on malformed input.
pub fn rat(s: &str) -> Rational {
    s.parse().unwrap_or_else(|e| panic!("bad rational literal {s:?}: {e}"))
}
