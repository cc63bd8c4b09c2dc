//! Scalar abstractions.
//!
//! Graph constructions are generic over a [`Length`] type so that the recursive
//! families can be built with exact rational arithmetic, while all numerical
//! analysis (eigenvalues, embeddings, SDP feasibility) is generic over a
//! floating point [`Real`].

use std::fmt::{Debug, Display, LowerExp};
use std::iter::Sum;
use std::str::FromStr;

use num_rational::Ratio;
use num_traits::{Float, FloatConst, FromPrimitive, Num, NumAssign, ToPrimitive};

/// Edge lengths and distances.
///
/// Implemented for `f32`, `f64` and the exact `Ratio<i64>` / `Ratio<i128>`.
pub trait Length:
    Clone + Debug + Display + PartialOrd + Num + NumAssign + ToPrimitive + FromPrimitive + Send + Sync + 'static
{
    /// Whether arithmetic on this type is exact.
    const EXACT: bool;

    /// Parses a decimal (`2.5`) or rational (`5/2`) literal.
    fn parse_length(s: &str) -> Option<Self>;

    /// Equality, exact for exact types and relative `1e-9` otherwise.
    fn same(&self, other: &Self) -> bool;

    fn to_f64_lossy(&self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }

    fn from_count(n: usize) -> Self {
        <Self as FromPrimitive>::from_usize(n).expect("integer fits the length type")
    }
}

fn float_same(a: f64, b: f64) -> bool {
    let scale = a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
    (a - b).abs() <= 1e-9 * scale
}

macro_rules! impl_float_length {
    ($t:ty) => {
        impl Length for $t {
            const EXACT: bool = false;

            fn parse_length(s: &str) -> Option<Self> {
                let s = s.trim();
                match s.split_once('/') {
                    Some((p, q)) => {
                        let p: $t = p.trim().parse().ok()?;
                        let q: $t = q.trim().parse().ok()?;
                        if q == 0.0 {
                            None
                        } else {
                            Some(p / q)
                        }
                    }
                    None => s.parse().ok(),
                }
            }

            fn same(&self, other: &Self) -> bool {
                float_same(*self as f64, *other as f64)
            }
        }
    };
}

impl_float_length!(f32);
impl_float_length!(f64);

macro_rules! impl_ratio_length {
    ($i:ty) => {
        impl Length for Ratio<$i> {
            const EXACT: bool = true;

            fn parse_length(s: &str) -> Option<Self> {
                let s = s.trim();
                if let Some((p, q)) = s.split_once('/') {
                    let p = <$i>::from_str(p.trim()).ok()?;
                    let q = <$i>::from_str(q.trim()).ok()?;
                    return if q == 0 { None } else { Some(Ratio::new(p, q)) };
                }
                let (neg, body) = match s.strip_prefix('-') {
                    Some(rest) => (true, rest),
                    None => (false, s.strip_prefix('+').unwrap_or(s)),
                };
                let (int_part, frac_part) = body.split_once('.').unwrap_or((body, ""));
                if int_part.is_empty() && frac_part.is_empty() {
                    return None;
                }
                if !int_part.chars().all(|c| c.is_ascii_digit())
                    || !frac_part.chars().all(|c| c.is_ascii_digit())
                {
                    return None;
                }
                let digits = format!("{int_part}{frac_part}");
                let numer = <$i>::from_str(&digits).ok()?;
                let denom = <$i>::checked_pow(10, frac_part.len() as u32)?;
                let r = Ratio::new(numer, denom);
                Some(if neg { -r } else { r })
            }

            fn same(&self, other: &Self) -> bool {
                self == other
            }
        }
    };
}

impl_ratio_length!(i64);
impl_ratio_length!(i128);

/// Floating point scalar used by the numerical analyses.
pub trait Real:
    Float + FloatConst + FromPrimitive + NumAssign + Sum + Debug + Display + LowerExp + Default + Send + Sync + 'static
{
    /// Converts an `f64` constant.
    fn lit(x: f64) -> Self {
        <Self as FromPrimitive>::from_f64(x).expect("finite constant")
    }

    fn from_len<T: Length>(x: &T) -> Self {
        Self::lit(x.to_f64_lossy())
    }

    fn as_f64(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

impl Real for f32 {}
impl Real for f64 {}

#[cfg(test)]
mod tests {
    use super::*;

    type Q = Ratio<i128>;

    #[test]
    fn parses_decimals_exactly() {
        assert_eq!(Q::parse_length("2.5"), Some(Q::new(5, 2)));
        assert_eq!(Q::parse_length("3"), Some(Q::from_integer(3)));
        assert_eq!(Q::parse_length("0.125"), Some(Q::new(1, 8)));
        assert_eq!(Q::parse_length("7/21"), Some(Q::new(1, 3)));
        assert_eq!(Q::parse_length("-1.5"), Some(Q::new(-3, 2)));
        assert_eq!(Q::parse_length("1/0"), None);
        assert_eq!(Q::parse_length("x"), None);
        assert_eq!(Q::parse_length("."), None);
    }

    #[test]
    fn parses_floats() {
        assert_eq!(f64::parse_length("5/2"), Some(2.5));
        assert_eq!(f64::parse_length("1e-3"), Some(1e-3));
        assert!(1.0f64.same(&(1.0 + 1e-12)));
        assert!(!1.0f64.same(&1.001));
    }
}
