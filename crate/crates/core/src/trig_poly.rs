//! Sparse trigonometric polynomials `p(t) = sum_n c_n exp(2 pi i n t)`.
//!
//! Terms are kept sorted by frequency with no zero coefficients stored, so
//! every reduction runs in the same order and results are reproducible.
//! Lacunary products have maximal frequency around `q^N` but only about
//! `2^N` terms, which is why the representation is sparse.

use num_complex::Complex64;
use rustc_hash::FxHashMap;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;

use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::numeric::{character, compensated_sum};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "TermsRepr", into = "TermsRepr")]
pub struct TrigPoly {
    terms: Vec<(i64, Complex64)>,
}

/// Wire form: `{"terms": [[n, re, im], ...]}` sorted by `n`.
#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct TermsRepr {
    terms: Vec<(i64, f64, f64)>,
}

impl From<TrigPoly> for TermsRepr {
    fn from(p: TrigPoly) -> Self {
        TermsRepr {
            terms: p.terms.iter().map(|&(n, c)| (n, c.re, c.im)).collect(),
        }
    }
}

impl TryFrom<TermsRepr> for TrigPoly {
    type Error = Error;

    fn try_from(r: TermsRepr) -> Result<Self> {
        let mut terms = Vec::with_capacity(r.terms.len());
        for (n, re, im) in r.terms {
            if !(re.is_finite() && im.is_finite()) {
                return Err(Error::InvalidInput(format!("non-finite coefficient at {n}")));
            }
            if let Some(&(prev, _)) = terms.last() {
                if prev >= n {
                    return Err(Error::InvalidInput(
                        "terms must be strictly increasing in frequency".into(),
                    ));
                }
            }
            let c = Complex64::new(re, im);
            if c != ZERO {
                terms.push((n, c));
            }
        }
        Ok(TrigPoly { terms })
    }
}

/// Sorted support and its minimum consecutive gap (`None` stands for an
/// infinite gap, i.e. at most one frequency).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Support {
    pub frequencies: Vec<i64>,
    pub min_gap: Option<u64>,
}

impl Support {
    pub fn from_sorted(frequencies: Vec<i64>) -> Self {
        let min_gap = frequencies
            .windows(2)
            .map(|w| w[1].abs_diff(w[0]))
            .min();
        Support {
            frequencies,
            min_gap,
        }
    }
}

impl TrigPoly {
    pub fn zero() -> Self {
        Self { terms: Vec::new() }
    }

    pub fn constant(c: Complex64) -> Self {
        Self::monomial(0, c)
    }

    pub fn one() -> Self {
        Self::constant(Complex64::new(1.0, 0.0))
    }

    pub fn monomial(n: i64, c: Complex64) -> Self {
        if c == ZERO {
            Self::zero()
        } else {
            Self { terms: vec![(n, c)] }
        }
    }

    /// Collects terms in any order, summing repeated frequencies.
    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        let mut v: Vec<(i64, Complex64)> = terms.into_iter().collect();
        v.sort_by_key(|&(n, _)| n);
        let mut out: Vec<(i64, Complex64)> = Vec::with_capacity(v.len());
        for (n, c) in v {
            match out.last_mut() {
                Some((m, acc)) if *m == n => *acc += c,
                _ => out.push((n, c)),
            }
        }
        out.retain(|&(_, c)| c != ZERO);
        Self { terms: out }
    }

    pub fn terms(&self) -> &[(i64, Complex64)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        match self.terms.binary_search_by_key(&n, |&(m, _)| m) {
            Ok(i) => self.terms[i].1,
            Err(_) => ZERO,
        }
    }

    /// Coefficient at frequency 0, i.e. the mean over the torus.
    pub fn mean(&self) -> Complex64 {
        self.coefficient(0)
    }

    /// Largest `|n|` in the support (0 for the zero polynomial).
    pub fn max_abs_frequency(&self) -> u64 {
        match (self.terms.first(), self.terms.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => lo.unsigned_abs().max(hi.unsigned_abs()),
            _ => 0,
        }
    }

    /// `max - min` of the support (0 when empty).
    pub fn frequency_span(&self) -> u64 {
        match (self.terms.first(), self.terms.last()) {
            (Some(&(lo, _)), Some(&(hi, _))) => hi.abs_diff(lo),
            _ => 0,
        }
    }

    pub fn support(&self) -> Support {
        Support::from_sorted(self.terms.iter().map(|&(n, _)| n).collect())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        if s == ZERO {
            return Self::zero();
        }
        Self {
            terms: self
                .terms
                .iter()
                .map(|&(n, c)| (n, c * s))
                .filter(|&(_, c)| c != ZERO)
                .collect(),
        }
    }

    /// Multiplication by `exp(2 pi i k t)`.
    pub fn shift(&self, k: i64) -> Result<Self> {
        let terms = self
            .terms
            .iter()
            .map(|&(n, c)| n.checked_add(k).map(|m| (m, c)).ok_or(Error::Overflow))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { terms })
    }

    /// Sorted merge of two polynomials.
    pub fn add(&self, other: &TrigPoly) -> Self {
        let (a, b) = (&self.terms, &other.terms);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                Ordering::Equal => {
                    let c = a[i].1 + b[j].1;
                    if c != ZERO {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self { terms: out }
    }

    pub fn sub(&self, other: &TrigPoly) -> Self {
        self.add(&other.scale(Complex64::new(-1.0, 0.0)))
    }

    /// The polynomial of `t -> conj(p(t))`: `n -> -n` with conjugated coefficients.
    pub fn conj_reflect(&self) -> Self {
        Self {
            terms: self.terms.iter().rev().map(|&(n, c)| (-n, c.conj())).collect(),
        }
    }

    /// Removes the frequency-0 term (`p - mean(p)`).
    pub fn without_mean(&self) -> Self {
        Self {
            terms: self.terms.iter().copied().filter(|&(n, _)| n != 0).collect(),
        }
    }

    /// Drops coefficients with `|c| <= threshold`.
    pub fn prune(&self, threshold: f64) -> Self {
        Self {
            terms: self
                .terms
                .iter()
                .copied()
                .filter(|&(_, c)| c.norm() > threshold)
                .collect(),
        }
    }

    /// Exact convolution of coefficient maps.
    pub fn multiply(&self, other: &TrigPoly) -> Result<Self> {
        let mut acc: FxHashMap<i64, Complex64> = FxHashMap::default();
        acc.reserve(self.len().saturating_mul(other.len()).min(1 << 24));
        for &(n1, c1) in &self.terms {
            for &(n2, c2) in &other.terms {
                let n = n1.checked_add(n2).ok_or(Error::Overflow)?;
                *acc.entry(n).or_insert(ZERO) += c1 * c2;
            }
        }
        Ok(Self::from_accumulator(acc))
    }

    /// Autocorrelation `r_n = sum_{n2 - n1 = n} c_{n1} conj(c_{n2})`.
    ///
    /// `r_0 = sum |c_n|^2` and `r_{-n} = conj(r_n)`; only `n > 0` is
    /// accumulated and the negative half is mirrored.
    pub fn autocorrelation(&self) -> Result<Self> {
        let mut acc: FxHashMap<i64, Complex64> = FxHashMap::default();
        for (i, &(n1, c1)) in self.terms.iter().enumerate() {
            for &(n2, c2) in &self.terms[i + 1..] {
                let n = n2.checked_sub(n1).ok_or(Error::Overflow)?;
                *acc.entry(n).or_insert(ZERO) += c1 * c2.conj();
            }
        }
        let positive = Self::from_accumulator(acc);
        let mut terms = Vec::with_capacity(2 * positive.len() + 1);
        terms.extend(positive.terms.iter().rev().map(|&(n, c)| (-n, c.conj())));
        let r0 = self.l2_norm_sq();
        if r0 != 0.0 {
            terms.push((0, Complex64::new(r0, 0.0)));
        }
        terms.extend_from_slice(&positive.terms);
        Ok(Self { terms })
    }

    /// `sum_n |r_n|^2` for the autocorrelation `r`, without building it:
    /// products for `n > 0` are sorted by frequency and merged in place.
    pub fn autocorrelation_energy(&self) -> Result<f64> {
        let len = self.terms.len();
        let mut products: Vec<(i64, Complex64)> = Vec::with_capacity(len * len.saturating_sub(1) / 2);
        for (i, &(n1, c1)) in self.terms.iter().enumerate() {
            for &(n2, c2) in &self.terms[i + 1..] {
                products.push((n2.checked_sub(n1).ok_or(Error::Overflow)?, c1 * c2.conj()));
            }
        }
        products.sort_unstable_by(|x, y| x.0.cmp(&y.0).then(x.1.re.total_cmp(&y.1.re)).then(x.1.im.total_cmp(&y.1.im)));
        let mut positive = Vec::new();
        let mut k = 0;
        while k < products.len() {
            let n = products[k].0;
            let mut sum = ZERO;
            while k < products.len() && products[k].0 == n {
                sum += products[k].1;
                k += 1;
            }
            positive.push(sum.norm_sqr());
        }
        let r0 = self.l2_norm_sq();
        Ok(r0 * r0 + 2.0 * compensated_sum(positive))
    }

    fn from_accumulator(acc: FxHashMap<i64, Complex64>) -> Self {
        let mut terms: Vec<(i64, Complex64)> =
            acc.into_iter().filter(|&(_, c)| c != ZERO).collect();
        terms.sort_unstable_by_key(|&(n, _)| n);
        Self { terms }
    }

    /// `sum_n |c_n|^2`, the squared `L^2(T)` norm.
    pub fn l2_norm_sq(&self) -> f64 {
        compensated_sum(self.terms.iter().map(|&(_, c)| c.norm_sqr()))
    }

    pub fn evaluate(&self, t: f64) -> Complex64 {
        let mut re = Vec::with_capacity(self.terms.len());
        let mut im = Vec::with_capacity(self.terms.len());
        for &(n, c) in &self.terms {
            let v = c * character(n, t);
            re.push(v.re);
            im.push(v.im);
        }
        Complex64::new(compensated_sum(re), compensated_sum(im))
    }

    /// Values at every grid point, via one inverse FFT.
    pub fn evaluate_on_grid(&self, grid: &TorusGrid) -> Vec<Complex64> {
        grid.synthesize(&self.terms)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn poly(terms: &[(i64, f64)]) -> TrigPoly {
        TrigPoly::from_terms(terms.iter().map(|&(n, x)| (n, c(x))))
    }

    #[test]
    fn multiply_examples() {
        let e = TrigPoly::monomial(1, c(1.0));
        let e_bar = TrigPoly::monomial(-1, c(1.0));
        assert_eq!(e.multiply(&e_bar).unwrap(), TrigPoly::one());
        let p = poly(&[(0, 1.0), (1, 1.0)]);
        assert_eq!(p.multiply(&p).unwrap(), poly(&[(0, 1.0), (1, 2.0), (2, 1.0)]));
        assert!(p.multiply(&TrigPoly::zero()).unwrap().is_zero());
    }

    #[test]
    fn multiply_overflow() {
        let p = TrigPoly::monomial(i64::MAX, c(1.0));
        assert_eq!(p.multiply(&TrigPoly::monomial(1, c(1.0))), Err(Error::Overflow));
        assert_eq!(p.shift(1), Err(Error::Overflow));
    }

    #[test]
    fn evaluate_examples() {
        assert_eq!(TrigPoly::constant(c(7.0)).evaluate(0.37), c(7.0));
        let v = TrigPoly::monomial(1, c(1.0)).evaluate(0.5);
        assert!((v - c(-1.0)).norm() < 1e-15);
        let a = poly(&[(0, 25.0 / 16.0), (-1, 9.0 / 16.0)]);
        assert_eq!(a.evaluate(0.0), c(34.0 / 16.0));
    }

    #[test]
    fn norm_and_mean_examples() {
        assert_eq!(TrigPoly::zero().l2_norm_sq(), 0.0);
        assert_eq!(poly(&[(0, 1.0), (1, 2.0), (2, 1.0)]).l2_norm_sq(), 6.0);
        let u = TrigPoly::monomial(5, Complex64::from_polar(1.0, 0.7));
        assert!((u.l2_norm_sq() - 1.0).abs() < 1e-15);
        assert_eq!(TrigPoly::constant(c(7.0)).mean(), c(7.0));
        assert_eq!(TrigPoly::monomial(1, c(5.0)).mean(), c(0.0));
    }

    #[test]
    fn support_examples() {
        let s = TrigPoly::one().support();
        assert_eq!((s.frequencies, s.min_gap), (vec![0], None));
        let s = poly(&[(-1, 1.0), (0, 1.0), (1, 1.0), (2, 1.0)]).support();
        assert_eq!(s.min_gap, Some(1));
        let s = poly(&[(1, 1.0), (4, 1.0), (9, 1.0)]).support();
        assert_eq!(s.min_gap, Some(3));
    }

    #[test]
    fn autocorrelation_examples() {
        let single = TrigPoly::monomial(6, Complex64::new(0.6, 0.8));
        let r = single.autocorrelation().unwrap();
        assert_eq!(r.terms().len(), 1);
        assert!((r.coefficient(0) - c(1.0)).norm() < 1e-15);
        let p = poly(&[(1, 15.0 / 16.0), (2, 15.0 / 16.0)]);
        assert_eq!(
            p.autocorrelation().unwrap(),
            poly(&[(-1, 225.0 / 256.0), (0, 450.0 / 256.0), (1, 225.0 / 256.0)])
        );
        assert!(TrigPoly::zero().autocorrelation().unwrap().is_zero());
        let expected = (450.0f64 / 256.0).powi(2) + 2.0 * (225.0f64 / 256.0).powi(2);
        assert!((p.autocorrelation_energy().unwrap() - expected).abs() < 1e-15);
        let q = TrigPoly::from_terms([(-3, Complex64::new(0.2, 1.0)), (0, c(0.5)), (1, c(-1.0)), (4, Complex64::new(0.0, 0.3))]);
        let direct = q.autocorrelation().unwrap().l2_norm_sq();
        assert!((q.autocorrelation_energy().unwrap() - direct).abs() < 1e-14 * direct);
    }

    #[test]
    fn zero_coefficients_are_not_stored() {
        let p = poly(&[(0, 1.0), (1, 1.0)]);
        let d = p.sub(&poly(&[(1, 1.0)]));
        assert_eq!(d.terms(), &[(0, c(1.0))]);
        assert!(p.sub(&p).is_zero());
        assert!(p.scale(c(0.0)).is_zero());
    }

    #[test]
    fn json_wire_format() {
        let p = TrigPoly::from_terms(vec![(2, Complex64::new(0.5, -1.0)), (-3, c(0.25))]);
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"terms":[[-3,0.25,0.0],[2,0.5,-1.0]]}"#);
        let back: TrigPoly = serde_json::from_str(&s).unwrap();
        assert_eq!(back, p);
        assert!(serde_json::from_str::<TrigPoly>(r#"{"terms":[[2,1.0,0.0],[1,1.0,0.0]]}"#).is_err());
        assert!(serde_json::from_str::<TrigPoly>(r#"{"terms":[],"x":1}"#).is_err());
    }

    #[test]
    fn conj_reflect_matches_pointwise_conjugate() {
        let p = TrigPoly::from_terms(vec![(3, Complex64::new(0.5, -1.0)), (-2, Complex64::new(0.1, 0.2))]);
        let t = 0.3141;
        assert!((p.conj_reflect().evaluate(t) - p.evaluate(t).conj()).norm() < 1e-15);
    }
}
