use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};

use crate::scalar::format_rational;

/// How a coordinate was written, kept so serialization reproduces the input.
#[derive(Clone, Debug, PartialEq)]
pub(crate) enum Literal {
    Number(serde_json::Number),
    Text(String),
}

/// A coordinate with its float value, its exact rational value when it has
/// one, and its original literal.
#[derive(Clone, Debug, PartialEq)]
pub struct Coordinate {
    literal: Literal,
    value: f64,
    exact: Option<BigRational>,
}

impl Coordinate {
    /// Float coordinate whose exact value is the binary value of `x`.
    pub fn from_f64(x: f64) -> Self {
        let literal = serde_json::Number::from_f64(x)
            .map(Literal::Number)
            .unwrap_or_else(|| Literal::Text(x.to_string()));
        Self {
            literal,
            value: x,
            exact: BigRational::from_float(x),
        }
    }

    /// Float coordinate with no exact representation (irrational positions).
    pub fn inexact(x: f64) -> Self {
        Self {
            exact: None,
            ..Self::from_f64(x)
        }
    }

    pub fn rational(r: BigRational) -> Self {
        let literal = if r.is_integer() {
            match r.numer().to_i64() {
                Some(i) => Literal::Number(i.into()),
                None => Literal::Text(r.numer().to_string()),
            }
        } else {
            Literal::Text(format_rational(&r))
        };
        Self {
            literal,
            value: rational_to_f64(&r),
            exact: Some(r),
        }
    }

    pub fn ratio(num: i64, den: i64) -> Self {
        Self::rational(BigRational::new(num.into(), den.into()))
    }

    pub fn value(&self) -> f64 {
        self.value
    }

    pub fn exact(&self) -> Option<&BigRational> {
        self.exact.as_ref()
    }

    pub(crate) fn literal(&self) -> &Literal {
        &self.literal
    }

    pub(crate) fn from_json_number(n: serde_json::Number) -> Option<Self> {
        let text = n.to_string();
        let value = n.as_f64()?;
        Some(Self {
            exact: parse_decimal(&text),
            literal: Literal::Number(n),
            value,
        })
    }

    /// Parses `"a/b"`, `"-a/b"` (ASCII or Unicode minus) or a decimal string.
    pub(crate) fn from_text(s: &str) -> Option<Self> {
        let normalized = s.trim().replace('\u{2212}', "-");
        let exact = if let Some((num, den)) = normalized.split_once('/') {
            let num: BigInt = num.trim().parse().ok()?;
            let den: BigInt = den.trim().parse().ok()?;
            if den.is_zero() {
                return None;
            }
            BigRational::new(num, den)
        } else {
            parse_decimal(&normalized)?
        };
        Some(Self {
            value: rational_to_f64(&exact),
            exact: Some(exact),
            literal: Literal::Text(s.to_string()),
        })
    }
}

impl From<i64> for Coordinate {
    fn from(x: i64) -> Self {
        Self::rational(BigRational::from_integer(x.into()))
    }
}

impl From<f64> for Coordinate {
    fn from(x: f64) -> Self {
        Self::from_f64(x)
    }
}

impl From<BigRational> for Coordinate {
    fn from(r: BigRational) -> Self {
        Self::rational(r)
    }
}

fn rational_to_f64(r: &BigRational) -> f64 {
    ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
}

/// Exact value of a decimal literal such as `-12.5e-3`.
fn parse_decimal(s: &str) -> Option<BigRational> {
    let s = s.trim();
    let (negative, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (mantissa, exponent) = match body.find(['e', 'E']) {
        Some(k) => (&body[..k], body[k + 1..].parse::<i32>().ok()?),
        None => (body, 0),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits: BigInt = format!("{int_part}{frac_part}").parse().ok()?;
    let scale = exponent - frac_part.len() as i32;
    let ten = BigInt::from(10);
    let mut r = BigRational::from_integer(digits);
    if scale >= 0 {
        r *= BigRational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        r /= BigRational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if negative {
        r = -r;
    }
    Some(r)
}
