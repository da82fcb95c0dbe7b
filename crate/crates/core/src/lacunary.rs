//! Lacunary frequency sequences `m_1 < m_2 < ...` with `m_{j+1} >= q m_j`.
//!
//! The ratio `q` is an `f64`, hence an exact dyadic rational; lacunarity is
//! checked and generated with exact integer arithmetic on that rational.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LacunarySequence {
    frequencies: Vec<i64>,
    ratio: f64,
}

/// `q = mantissa * 2^exponent` with an integer mantissa.
fn decompose(q: f64) -> (u128, i32) {
    let bits = q.to_bits();
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let fraction = bits & ((1_u64 << 52) - 1);
    if exponent == 0 {
        (fraction as u128, -1074)
    } else {
        ((fraction | (1_u64 << 52)) as u128, exponent - 1075)
    }
}

/// Exact `ceil(q * m)` for finite `q > 0` and `m >= 0`; `None` past `i64::MAX`.
pub fn ceil_scaled(q: f64, m: i64) -> Option<i64> {
    let (mant, exp) = decompose(q);
    let prod = mant.checked_mul(m as u128)?;
    let value = if exp >= 0 {
        prod.checked_shl(exp as u32).filter(|v| v >> exp == prod)?
    } else {
        let shift = (-exp) as u32;
        if shift >= 128 {
            u128::from(prod != 0)
        } else {
            let floor = prod >> shift;
            floor + u128::from(floor << shift != prod)
        }
    };
    i64::try_from(value).ok()
}

impl LacunarySequence {
    /// Validates `0 < m_1` and `m_{j+1} >= q m_j` exactly.
    pub fn new(frequencies: Vec<i64>, ratio: f64) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::InvalidInput(format!("lacunarity ratio {ratio} must exceed 1")));
        }
        if let Some(&first) = frequencies.first() {
            if first <= 0 {
                return Err(Error::InvalidInput(format!(
                    "frequencies must be positive, got m_1 = {first}"
                )));
            }
        }
        for (i, w) in frequencies.windows(2).enumerate() {
            let ok = ceil_scaled(ratio, w[0]).is_some_and(|bound| w[1] >= bound);
            if !ok {
                return Err(Error::NotLacunary {
                    index: i + 2,
                    prev: w[0],
                    next: w[1],
                    ratio,
                });
            }
        }
        Ok(Self { frequencies, ratio })
    }

    /// `m_1 = 1`, `m_{j+1} = ceil(q m_j)`.
    pub fn geometric_ceil(ratio: f64, count: usize) -> Result<Self> {
        if !(ratio.is_finite() && ratio > 1.0) {
            return Err(Error::InvalidInput(format!("lacunarity ratio {ratio} must exceed 1")));
        }
        if count == 0 {
            return Err(Error::InvalidInput("count must be at least 1".into()));
        }
        let mut frequencies = Vec::with_capacity(count);
        let mut m = 1_i64;
        frequencies.push(m);
        for _ in 1..count {
            m = ceil_scaled(ratio, m).ok_or(Error::Overflow)?;
            frequencies.push(m);
        }
        Self::new(frequencies, ratio)
    }

    /// Largest ratio `min m_{j+1} / m_j` the list actually achieves.
    pub fn achieved_ratio(&self) -> Option<f64> {
        self.frequencies
            .windows(2)
            .map(|w| w[1] as f64 / w[0] as f64)
            .min_by(f64::total_cmp)
    }

    pub fn frequencies(&self) -> &[i64] {
        &self.frequencies
    }

    pub fn ratio(&self) -> f64 {
        self.ratio
    }

    pub fn len(&self) -> usize {
        self.frequencies.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frequencies.is_empty()
    }

    /// `m_j` with the 1-based indexing of the product.
    pub fn get(&self, j: usize) -> Option<i64> {
        j.checked_sub(1).and_then(|i| self.frequencies.get(i)).copied()
    }
}
