use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Sequence spaces of `R^d`-valued vertex fields.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "space", content = "q")]
pub enum SequenceSpace {
    #[serde(rename = "ell_q")]
    EllQ(f64),
    #[serde(rename = "c0")]
    C0,
    #[serde(rename = "ell_inf")]
    EllInfinity,
}

impl SequenceSpace {
    pub fn ell_q(q: f64) -> Result<Self> {
        if !(q >= 1.0 && q.is_finite()) {
            return Err(Error::InvalidArgument(format!("ell^q needs finite q >= 1, got {q}")));
        }
        Ok(SequenceSpace::EllQ(q))
    }

    /// `ℓ^q → ℓ^{q/(q−1)}`, `ℓ¹ → ℓ^∞`, `c_0 → ℓ¹`; `ℓ^∞` has no sequence-space dual.
    pub fn dual(&self) -> Option<SequenceSpace> {
        match *self {
            SequenceSpace::EllQ(q) if q == 1.0 => Some(SequenceSpace::EllInfinity),
            SequenceSpace::EllQ(q) => Some(SequenceSpace::EllQ(q / (q - 1.0))),
            SequenceSpace::C0 => Some(SequenceSpace::EllQ(1.0)),
            SequenceSpace::EllInfinity => None,
        }
    }

    pub fn name(&self) -> String {
        match self {
            SequenceSpace::EllQ(q) => format!("l{q}"),
            SequenceSpace::C0 => "c0".into(),
            SequenceSpace::EllInfinity => "linf".into(),
        }
    }
}

impl std::str::FromStr for SequenceSpace {
    type Err = Error;

    /// Accepts `c0`, `linf`, `l<q>` (e.g. `l1`, `l2.5`).
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "c0" => Ok(SequenceSpace::C0),
            "linf" | "l_inf" => Ok(SequenceSpace::EllInfinity),
            _ => {
                let q = s
                    .strip_prefix('l')
                    .and_then(|q| q.parse::<f64>().ok())
                    .ok_or_else(|| Error::InvalidArgument(format!("unknown sequence space '{s}'")))?;
                SequenceSpace::ell_q(q)
            }
        }
    }
}

/// Norm of a flat field with `dimension` entries per vertex: for `ℓ^q` the
/// inner norm is the `q`-norm, for `c_0` and `ℓ^∞` it is the sup norm.
pub fn sequence_norm(field: &[f64], dimension: usize, space: SequenceSpace) -> Result<f64> {
    if dimension == 0 || field.len() % dimension != 0 {
        return Err(Error::Dimension {
            expected: dimension,
            got: field.len(),
        });
    }
    match space {
        SequenceSpace::EllQ(q) => {
            if !(q >= 1.0) {
                return Err(Error::InvalidArgument(format!("ell^q needs q >= 1, got {q}")));
            }
            if q == 1.0 {
                return Ok(field.iter().map(|x| x.abs()).sum());
            }
            let max = field.iter().map(|x| x.abs()).fold(0.0, f64::max);
            if max == 0.0 {
                return Ok(0.0);
            }
            // scaled to avoid overflow for large q
            let s: f64 = field.iter().map(|x| (x.abs() / max).powf(q)).sum();
            Ok(max * s.powf(1.0 / q))
        }
        SequenceSpace::C0 | SequenceSpace::EllInfinity => Ok(field.iter().map(|x| x.abs()).fold(0.0, f64::max)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn norms() {
        assert!((sequence_norm(&[3.0, 4.0], 2, SequenceSpace::EllQ(2.0)).unwrap() - 5.0).abs() < 1e-15);
        let ones: Vec<f64> = (0..10).flat_map(|_| [1.0, 0.0]).collect();
        assert_eq!(sequence_norm(&ones, 2, SequenceSpace::C0).unwrap(), 1.0);
        assert!(sequence_norm(&ones, 2, SequenceSpace::EllQ(0.5)).is_err());
        assert!(SequenceSpace::ell_q(0.5).is_err());
    }

    #[test]
    fn duals() {
        assert_eq!(SequenceSpace::C0.dual(), Some(SequenceSpace::EllQ(1.0)));
        assert_eq!(SequenceSpace::EllQ(1.0).dual(), Some(SequenceSpace::EllInfinity));
        let q = SequenceSpace::EllQ(3.0);
        assert_eq!(q.dual().unwrap().dual(), Some(q));
        assert_eq!("l2".parse::<SequenceSpace>().unwrap(), SequenceSpace::EllQ(2.0));
        assert_eq!("c0".parse::<SequenceSpace>().unwrap(), SequenceSpace::C0);
    }
}
