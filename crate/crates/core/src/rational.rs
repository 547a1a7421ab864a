//! Exact rationals and p-adic valuations.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Q = BigRational;

pub fn q(n: i64) -> Q {
    Q::from_integer(BigInt::from(n))
}

pub fn qf(n: i64, d: i64) -> Q {
    Q::new(BigInt::from(n), BigInt::from(d))
}

pub fn q_big(n: BigInt) -> Q {
    Q::from_integer(n)
}

/// `p^e` as a rational, for any sign of `e`.
pub fn p_pow(p: u64, e: i64) -> Q {
    let base = BigInt::from(p);
    let mag = num_traits::pow(base, e.unsigned_abs() as usize);
    if e >= 0 {
        Q::from_integer(mag)
    } else {
        Q::new(BigInt::one(), mag)
    }
}

/// p-adic valuation of a nonzero integer.
pub fn val_int(x: &BigInt, p: u64) -> i64 {
    debug_assert!(!x.is_zero());
    let p = BigInt::from(p);
    let mut x = x.abs();
    let mut v = 0;
    loop {
        let (quo, rem) = x.div_rem(&p);
        if !rem.is_zero() {
            return v;
        }
        x = quo;
        v += 1;
    }
}

/// p-adic valuation; `None` for zero.
pub fn val(x: &Q, p: u64) -> Option<i64> {
    if x.is_zero() {
        None
    } else {
        Some(val_int(x.numer(), p) - val_int(x.denom(), p))
    }
}

/// Minimum p-adic valuation over a slice, `None` if all entries vanish.
pub fn min_val<'a>(xs: impl IntoIterator<Item = &'a Q>, p: u64) -> Option<i64> {
    xs.into_iter().filter_map(|x| val(x, p)).min()
}

/// True when `x` lies in the localisation Z_(p).
pub fn is_p_integral(x: &Q, p: u64) -> bool {
    val(x, p).is_none_or(|v| v >= 0)
}

pub fn to_i64(x: &Q) -> Option<i64> {
    if x.is_integer() {
        x.numer().to_i64()
    } else {
        None
    }
}

/// Formats as `a` or `a/b`.
pub fn fmt_q(x: &Q) -> String {
    if x.is_integer() {
        x.numer().to_string()
    } else {
        format!("{}/{}", x.numer(), x.denom())
    }
}

pub fn parse_q(s: &str) -> Result<Q> {
    let s = s.trim();
    let bad = || Error::Parse(format!("not a rational number: {s:?}"));
    match s.split_once('/') {
        Some((n, d)) => {
            let n: BigInt = n.trim().parse().map_err(|_| bad())?;
            let d: BigInt = d.trim().parse().map_err(|_| bad())?;
            if d.is_zero() {
                return Err(bad());
            }
            Ok(Q::new(n, d))
        }
        None => Ok(Q::from_integer(s.parse().map_err(|_| bad())?)),
    }
}

/// Space-separated rendering of a rational vector.
pub fn fmt_qvec(v: &[Q]) -> String {
    v.iter().map(fmt_q).collect::<Vec<_>>().join(" ")
}

pub fn parse_qvec(s: &str) -> Result<Vec<Q>> {
    s.split(|c: char| c.is_whitespace() || c == ',' || c == ';')
        .filter(|t| !t.is_empty())
        .map(parse_q)
        .collect()
}

pub fn lcm_u64(a: u64, b: u64) -> u64 {
    a.lcm(&b)
}

pub fn is_nonneg(x: &Q) -> bool {
    !x.is_negative()
}

pub fn one() -> Q {
    Q::one()
}

pub fn zero() -> Q {
    Q::zero()
}
