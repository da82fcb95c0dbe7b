//! Coefficient families and frequency generation for experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lacunary::LacunarySequence;
use crate::numeric::{cis_turns, compensated_sum};
use crate::product::CoefficientSequence;
use crate::su11::CoefficientPair;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CoefficientKind {
    /// `B_j = 0`
    Zero,
    /// `B_j = c`
    Constant,
    /// `B_j = c * ratio^{j-1}`
    GeometricDecay,
    /// `B_j = c * j^{-beta}`
    PowerDecay,
    /// `|B_j| = c * j^{-beta}` with `beta > 1/2` and uniform random phases
    RandomPhaseL2,
    /// `|B_j| = c * j^{-beta}` with `beta <= 1/2` and uniform random phases
    RandomPhaseDivergent,
}

/// A deterministic coefficient family. Parameters a kind does not use must
/// be left out.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CoefficientSpec {
    pub kind: CoefficientKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub c: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub ratio: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default)]
    pub seed: u64,
}

impl CoefficientSpec {
    pub fn zero() -> Self {
        Self::with(CoefficientKind::Zero, None, None, None)
    }

    pub fn constant(c: f64) -> Self {
        Self::with(CoefficientKind::Constant, Some(c), None, None)
    }

    pub fn geometric_decay(c: f64, ratio: f64) -> Self {
        Self::with(CoefficientKind::GeometricDecay, Some(c), Some(ratio), None)
    }

    pub fn power_decay(c: f64, beta: f64) -> Self {
        Self::with(CoefficientKind::PowerDecay, Some(c), None, Some(beta))
    }

    pub fn random_phase(l2: bool, c: f64, beta: f64, seed: u64) -> Self {
        let kind = if l2 {
            CoefficientKind::RandomPhaseL2
        } else {
            CoefficientKind::RandomPhaseDivergent
        };
        Self {
            seed,
            ..Self::with(kind, Some(c), None, Some(beta))
        }
    }

    fn with(kind: CoefficientKind, c: Option<f64>, ratio: Option<f64>, beta: Option<f64>) -> Self {
        Self {
            kind,
            c,
            ratio,
            beta,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        use CoefficientKind::*;
        let (needs_c, needs_ratio, needs_beta) = match self.kind {
            Zero => (false, false, false),
            Constant => (true, false, false),
            GeometricDecay => (true, true, false),
            PowerDecay | RandomPhaseL2 | RandomPhaseDivergent => (true, false, true),
        };
        let field = |name: &str, value: Option<f64>, needed: bool| -> Result<()> {
            match (value, needed) {
                (None, true) => Err(Error::InvalidInput(format!("{:?} needs `{name}`", self.kind))),
                (Some(_), false) => Err(Error::InvalidInput(format!("{:?} takes no `{name}`", self.kind))),
                (Some(v), true) if !(v.is_finite() && v >= 0.0) => {
                    Err(Error::InvalidInput(format!("`{name}` = {v} must be finite and nonnegative")))
                }
                _ => Ok(()),
            }
        };
        field("c", self.c, needs_c)?;
        field("ratio", self.ratio, needs_ratio)?;
        field("beta", self.beta, needs_beta)?;
        match (self.kind, self.beta) {
            (RandomPhaseL2, Some(b)) if b <= 0.5 => Err(Error::InvalidInput(format!(
                "random-phase-l2 needs beta > 1/2, got {b}"
            ))),
            (RandomPhaseDivergent, Some(b)) if b > 0.5 => Err(Error::InvalidInput(format!(
                "random-phase-divergent needs beta <= 1/2, got {b}"
            ))),
            _ => Ok(()),
        }
    }

    /// Square summability of `|B_j|`, decided from the closed form.
    pub fn is_l2(&self) -> bool {
        use CoefficientKind::*;
        let c = self.c.unwrap_or(0.0);
        match self.kind {
            Zero => true,
            _ if c == 0.0 => true,
            Constant => false,
            GeometricDecay => self.ratio.unwrap_or(0.0) < 1.0,
            PowerDecay | RandomPhaseL2 | RandomPhaseDivergent => self.beta.unwrap_or(0.0) > 0.5,
        }
    }

    /// `B_1, ..., B_count`.
    pub fn b_values(&self, count: usize) -> Result<Vec<Complex64>> {
        use CoefficientKind::*;
        self.validate()?;
        let c = self.c.unwrap_or(0.0);
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        Ok((1..=count)
            .map(|j| {
                let jf = j as f64;
                match self.kind {
                    Zero => Complex64::new(0.0, 0.0),
                    Constant => Complex64::new(c, 0.0),
                    GeometricDecay => Complex64::new(c * self.ratio.unwrap_or(0.0).powi(j as i32 - 1), 0.0),
                    PowerDecay => Complex64::new(c * jf.powf(-self.beta.unwrap_or(0.0)), 0.0),
                    RandomPhaseL2 | RandomPhaseDivergent => {
                        let phase: f64 = rng.gen();
                        cis_turns(phase) * (c * jf.powf(-self.beta.unwrap_or(0.0)))
                    }
                }
            })
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCoefficients {
    pub coefficients: CoefficientSequence,
    pub l2: bool,
}

pub fn generate_coefficients(spec: &CoefficientSpec, count: usize) -> Result<GeneratedCoefficients> {
    Ok(GeneratedCoefficients {
        coefficients: CoefficientSequence::from_b(spec.b_values(count)?)?,
        l2: spec.is_l2(),
    })
}

/// Terms used by [`trend_check`].
pub const TREND_TERMS: usize = 256;
/// Largest share of the partial sum the last quarter may add for a bounded trend.
pub const TREND_SHARE: f64 = 0.02;

/// Numerical look at `sum_j log(A_j^2 + |B_j|^2)`: a bounded series adds
/// little over the last quarter of its first [`TREND_TERMS`] terms.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrendCheck {
    pub total: f64,
    pub last_quarter: f64,
    pub bounded: bool,
}

pub fn trend_check(spec: &CoefficientSpec) -> Result<TrendCheck> {
    let coeffs = generate_coefficients(spec, TREND_TERMS)?.coefficients;
    let logs: Vec<f64> = coeffs.pairs().iter().map(CoefficientPair::log_energy).collect();
    let total = compensated_sum(logs.iter().copied());
    let last_quarter = compensated_sum(logs[3 * TREND_TERMS / 4..].iter().copied());
    Ok(TrendCheck {
        total,
        last_quarter,
        bounded: last_quarter <= TREND_SHARE * total,
    })
}

/// How frequencies are produced.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FrequencyMode {
    GeometricCeil,
    CustomList(Vec<i64>),
}

/// `count` frequencies, validated as `q`-lacunary.
pub fn generate_lacunary(q: f64, count: usize, mode: &FrequencyMode) -> Result<LacunarySequence> {
    match mode {
        FrequencyMode::GeometricCeil => LacunarySequence::geometric_ceil(q, count),
        FrequencyMode::CustomList(list) => {
            if list.len() < count {
                return Err(Error::InvalidInput(format!(
                    "custom list has {} frequencies, {count} requested",
                    list.len()
                )));
            }
            LacunarySequence::new(list[..count].to_vec(), q)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn family_examples() {
        let zero = generate_coefficients(&CoefficientSpec::zero(), 4).unwrap();
        assert!(zero.l2 && zero.coefficients.pairs().iter().all(|p| p.a() == 1.0 && p.b().norm() == 0.0));
        let geo = generate_coefficients(&CoefficientSpec::geometric_decay(0.75, 0.5), 4).unwrap();
        assert!(geo.l2);
        let mags: Vec<f64> = geo.coefficients.pairs().iter().map(|p| p.b().norm()).collect();
        assert_eq!(mags, vec![0.75, 0.375, 0.1875, 0.09375]);
        assert!(!generate_coefficients(&CoefficientSpec::constant(0.5), 3).unwrap().l2);
        assert!(CoefficientSpec::power_decay(1.0, 0.75).is_l2());
        assert!(!CoefficientSpec::power_decay(1.0, 0.5).is_l2());
    }

    #[test]
    fn random_phases_are_seeded() {
        let spec = CoefficientSpec::random_phase(true, 0.5, 1.0, 42);
        let x = spec.b_values(16).unwrap();
        assert_eq!(x, spec.b_values(16).unwrap());
        for (j, b) in x.iter().enumerate() {
            assert!((b.norm() - 0.5 / (j + 1) as f64).abs() < 1e-15);
        }
        let other = CoefficientSpec::random_phase(true, 0.5, 1.0, 43).b_values(16).unwrap();
        assert_ne!(x, other);
    }

    #[test]
    fn invalid_specs() {
        assert!(CoefficientSpec::random_phase(true, 0.5, 0.5, 0).validate().is_err());
        assert!(CoefficientSpec::random_phase(false, 0.5, 0.75, 0).validate().is_err());
        assert!(CoefficientSpec::constant(f64::NAN).validate().is_err());
        let mut extra = CoefficientSpec::constant(0.5);
        extra.ratio = Some(0.5);
        assert!(extra.validate().is_err());
    }

    #[test]
    fn frequency_modes() {
        let f = generate_lacunary(2.5, 4, &FrequencyMode::GeometricCeil).unwrap();
        assert_eq!(f.frequencies(), &[1, 3, 8, 20]);
        let custom = FrequencyMode::CustomList(vec![1, 2, 3]);
        assert!(matches!(generate_lacunary(2.0, 3, &custom), Err(Error::NotLacunary { .. })));
        assert!(generate_lacunary(2.0, 4, &FrequencyMode::CustomList(vec![1, 2])).is_err());
    }
}
