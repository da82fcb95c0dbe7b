//! Finite windows of the lacunary product and the identities they satisfy.
//!
//! For a window `(M, N]` the product
//! `prod_{j=M+1}^{N} [[A_j, B_j e(m_j t)], [conj(B_j) e(-m_j t), A_j]]`
//! is `[[a, b], [conj(b), conj(a)]]` with trigonometric polynomials `a`, `b`,
//! built left to right by
//!
//! ```text
//! a_N = a_{N-1} A_N + b_{N-1} conj(B_N) e(-m_N t)
//! b_N = a_{N-1} B_N e(m_N t) + b_{N-1} A_N
//! ```

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::TorusGrid;
use crate::lacunary::LacunarySequence;
use crate::numeric::{compensated_sum, relative_residual};
use crate::su11::{CoefficientPair, Su11Matrix};
use crate::trig_poly::{Support, TrigPoly};

/// Coefficient pairs indexed `j = 1..=len`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CoefficientSequence {
    pairs: Vec<CoefficientPair>,
}

impl CoefficientSequence {
    pub fn new(pairs: Vec<CoefficientPair>) -> Self {
        Self { pairs }
    }

    pub fn from_b<I: IntoIterator<Item = Complex64>>(bs: I) -> Result<Self> {
        bs.into_iter()
            .map(CoefficientPair::from_b)
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn from_f<I: IntoIterator<Item = Complex64>>(fs: I) -> Result<Self> {
        fs.into_iter()
            .map(CoefficientPair::from_f)
            .collect::<Result<Vec<_>>>()
            .map(Self::new)
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    pub fn pairs(&self) -> &[CoefficientPair] {
        &self.pairs
    }

    /// Pair `j` (1-based).
    pub fn get(&self, j: usize) -> Option<&CoefficientPair> {
        j.checked_sub(1).and_then(|i| self.pairs.get(i))
    }

    /// Pairs `M+1..=N`.
    pub fn window(&self, m: usize, n: usize) -> Result<&[CoefficientPair]> {
        if m > n || n > self.pairs.len() {
            return Err(Error::IndexOutOfRange {
                start: m,
                end: n,
                len: self.pairs.len(),
            });
        }
        Ok(&self.pairs[m..n])
    }
}

/// The polynomial entries `(a, b)` of the product over `(M, N]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrigPolyPair {
    #[serde(rename = "M")]
    pub start: usize,
    #[serde(rename = "N")]
    pub end: usize,
    pub a: TrigPoly,
    pub b: TrigPoly,
}

impl TrigPolyPair {
    /// The empty product `(1, 0)` over `(m, m]`.
    pub fn identity(m: usize) -> Self {
        Self {
            start: m,
            end: m,
            a: TrigPoly::one(),
            b: TrigPoly::zero(),
        }
    }

    pub fn evaluate(&self, t: f64) -> Su11Matrix {
        Su11Matrix::new(self.a.evaluate(t), self.b.evaluate(t))
    }

    /// `(a(t_k), b(t_k))` at every grid point.
    pub fn evaluate_on_grid(&self, grid: &TorusGrid) -> Vec<Su11Matrix> {
        let a = self.a.evaluate_on_grid(grid);
        let b = self.b.evaluate_on_grid(grid);
        a.into_iter().zip(b).map(|(a, b)| Su11Matrix::new(a, b)).collect()
    }

    /// Largest `|n|` over the supports of `a` and `b`.
    pub fn max_abs_frequency(&self) -> u64 {
        self.a.max_abs_frequency().max(self.b.max_abs_frequency())
    }

    /// Matrix product of two adjacent windows, `self` on the left, computed
    /// on the polynomials: `a = a1 a2 + b1 b2*`, `b = a1 b2 + b1 a2*`, where
    /// `p*` is the polynomial of `t -> conj(p(t))`.
    pub fn compose(&self, right: &TrigPolyPair) -> Result<TrigPolyPair> {
        if self.end != right.start {
            return Err(Error::InvalidInput(format!(
                "windows ({}, {}] and ({}, {}] are not adjacent",
                self.start, self.end, right.start, right.end
            )));
        }
        let a = self
            .a
            .multiply(&right.a)?
            .add(&self.b.multiply(&right.b.conj_reflect())?);
        let b = self
            .a
            .multiply(&right.b)?
            .add(&self.b.multiply(&right.a.conj_reflect())?);
        Ok(TrigPolyPair {
            start: self.start,
            end: right.end,
            a,
            b,
        })
    }
}

fn check_window(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<()> {
    let len = coeffs.len().min(freqs.len());
    if m > n || n > len {
        return Err(Error::IndexOutOfRange { start: m, end: n, len });
    }
    if n - m > tol.max_factors {
        return Err(Error::Budget(format!(
            "window of {} factors exceeds the limit of {}",
            n - m,
            tol.max_factors
        )));
    }
    Ok(())
}

/// The pair `(a_{M,N}, b_{M,N})` by the left-to-right recursion.
pub fn partial_product(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<TrigPolyPair> {
    check_window(coeffs, freqs, m, n, tol)?;
    let mut a = TrigPoly::one();
    let mut b = TrigPoly::zero();
    for j in m + 1..=n {
        let pair = coeffs.get(j).expect("window checked");
        let mj = freqs.get(j).expect("window checked");
        let big_a = Complex64::new(pair.a(), 0.0);
        let next_a = a.scale(big_a).add(&b.shift(-mj)?.scale(pair.b().conj()));
        let next_b = a.shift(mj)?.scale(pair.b()).add(&b.scale(big_a));
        a = next_a;
        b = next_b;
    }
    Ok(TrigPolyPair { start: m, end: n, a, b })
}

/// The same product evaluated at one point by 2x2 matrix multiplication.
pub fn pointwise_product(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    t: f64,
) -> Result<Su11Matrix> {
    let pairs = coeffs.window(m, n)?;
    if n > freqs.len() {
        return Err(Error::IndexOutOfRange {
            start: m,
            end: n,
            len: freqs.len(),
        });
    }
    Ok(pairs
        .iter()
        .zip(&freqs.frequencies()[m..n])
        .fold(Su11Matrix::identity(), |acc, (pair, &mj)| {
            acc.mul(&pair.factor_at(mj, t))
        }))
}

/// `S_{M,N} = sum_{j=M+1}^{N} log(A_j^2 + |B_j|^2)`.
pub fn s_mn(coeffs: &CoefficientSequence, m: usize, n: usize) -> Result<f64> {
    let pairs = coeffs.window(m, n)?;
    Ok(compensated_sum(pairs.iter().map(CoefficientPair::log_energy)))
}

/// `sum_{j=M+1}^{N} log A_j`.
pub fn sum_log_a(coeffs: &CoefficientSequence, m: usize, n: usize) -> Result<f64> {
    let pairs = coeffs.window(m, n)?;
    Ok(0.5 * compensated_sum(pairs.iter().map(CoefficientPair::log_a_sq)))
}

/// Left side, right side and relative residual of one identity.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub residual: f64,
}

impl IdentityCheck {
    pub fn new(lhs: f64, rhs: f64) -> Self {
        Self {
            lhs,
            rhs,
            residual: relative_residual(lhs, rhs),
        }
    }

    pub fn holds(&self, tol: f64) -> bool {
        self.residual <= tol
    }
}

/// `||a||^2 + ||b||^2` against `prod (A_j^2 + |B_j|^2)`.
pub fn energy_identity(pair: &TrigPolyPair, coeffs: &CoefficientSequence) -> Result<IdentityCheck> {
    let lhs = compensated_sum([pair.a.l2_norm_sq(), pair.b.l2_norm_sq()]);
    let rhs = s_mn(coeffs, pair.start, pair.end)?.exp();
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn energy_identity_residual(pair: &TrigPolyPair, coeffs: &CoefficientSequence) -> Result<f64> {
    energy_identity(pair, coeffs).map(|c| c.residual)
}

/// `||a - mean(a)||^2 + ||b||^2` against `prod (A_j^2 + |B_j|^2) - prod A_j^2`.
///
/// The right side is evaluated as `prod A_j^2 * expm1(sum log(1 + |F_j|^2))`,
/// which avoids the cancellation of the plain difference.
pub fn centered_identity(pair: &TrigPolyPair, coeffs: &CoefficientSequence) -> Result<IdentityCheck> {
    let pairs = coeffs.window(pair.start, pair.end)?;
    let lhs = compensated_sum([pair.a.without_mean().l2_norm_sq(), pair.b.l2_norm_sq()]);
    let log_a_sq = compensated_sum(pairs.iter().map(CoefficientPair::log_a_sq));
    let log_one_plus_f_sq = compensated_sum(pairs.iter().map(|p| p.f().norm_sqr().ln_1p()));
    let rhs = log_a_sq.exp() * log_one_plus_f_sq.exp_m1();
    Ok(IdentityCheck::new(lhs, rhs))
}

pub fn centered_identity_residual(
    pair: &TrigPolyPair,
    coeffs: &CoefficientSequence,
) -> Result<f64> {
    centered_identity(pair, coeffs).map(|c| c.residual)
}

/// Frequency separation inside a window's expansion.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapReport {
    /// Minimum gap within `support(a)`; `None` is an infinite gap.
    pub gap_a: Option<u64>,
    pub gap_b: Option<u64>,
    /// Minimum gap of `support(a) ∪ support(b)`, recorded as data.
    pub gap_union: Option<u64>,
    /// `m_{M+1}`, absent for an empty window.
    pub required: Option<i64>,
    /// Per-polynomial gaps are at least `m_{M+1}`.
    pub ok: bool,
    /// Union gap is at least `m_{M+1}`.
    pub union_ok: bool,
}

impl GapReport {
    /// The smaller per-polynomial gap.
    pub fn gap(&self) -> Option<u64> {
        match (self.gap_a, self.gap_b) {
            (Some(x), Some(y)) => Some(x.min(y)),
            (x, y) => x.or(y),
        }
    }
}

pub fn min_gap_check(pair: &TrigPolyPair, freqs: &LacunarySequence) -> GapReport {
    let support_a = pair.a.support();
    let support_b = pair.b.support();
    let mut union: Vec<i64> = support_a
        .frequencies
        .iter()
        .chain(&support_b.frequencies)
        .copied()
        .collect();
    union.sort_unstable();
    union.dedup();
    let gap_union = Support::from_sorted(union).min_gap;
    let required = if pair.end > pair.start {
        freqs.get(pair.start + 1)
    } else {
        None
    };
    let at_least = |gap: Option<u64>| match (gap, required) {
        (Some(g), Some(r)) => g >= r as u64,
        _ => true,
    };
    GapReport {
        gap_a: support_a.min_gap,
        gap_b: support_b.min_gap,
        gap_union,
        required,
        ok: at_least(support_a.min_gap) && at_least(support_b.min_gap),
        union_ok: at_least(gap_union),
    }
}

/// Quadrature of `log|a|` against `sum log A_j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ParsevalCheck {
    pub quadrature: f64,
    pub sum_log_a: f64,
    pub residual: f64,
    pub grid_points: usize,
}

/// Trapezoid rule for `int_T log|a(t)| dt` on `grid_points` points; the grid
/// must have at least `4 * maxfreq(a) + 4` points. `|a| >= 1` on the torus,
/// so the integrand is finite and nonnegative.
pub fn nonlinear_parseval(
    pair: &TrigPolyPair,
    coeffs: &CoefficientSequence,
    grid_points: usize,
) -> Result<ParsevalCheck> {
    let grid = TorusGrid::new(grid_points)?;
    grid.ensure_resolves(pair.a.max_abs_frequency())?;
    let logs: Vec<f64> = pair
        .a
        .evaluate_on_grid(&grid)
        .iter()
        .map(|v| v.norm().ln())
        .collect();
    let quadrature = grid.mean(&logs);
    let sum_log_a = sum_log_a(coeffs, pair.start, pair.end)?;
    Ok(ParsevalCheck {
        quadrature,
        sum_log_a,
        residual: (quadrature - sum_log_a).abs(),
        grid_points,
    })
}

pub fn nonlinear_parseval_residual(
    pair: &TrigPolyPair,
    coeffs: &CoefficientSequence,
    grid_points: usize,
) -> Result<f64> {
    nonlinear_parseval(pair, coeffs, grid_points).map(|c| c.residual)
}

/// Smallest grid accepted by [`nonlinear_parseval`] for this pair.
pub fn minimal_parseval_grid(pair: &TrigPolyPair) -> usize {
    TorusGrid::required_size(pair.a.max_abs_frequency())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn worked_example() -> (CoefficientSequence, LacunarySequence) {
        (
            CoefficientSequence::from_b([c(0.75), c(0.75)]).unwrap(),
            LacunarySequence::new(vec![1, 2], 2.0).unwrap(),
        )
    }

    fn poly(terms: &[(i64, f64)]) -> TrigPoly {
        TrigPoly::from_terms(terms.iter().map(|&(n, x)| (n, c(x))))
    }

    #[test]
    fn empty_single_and_two_factor_products() {
        let (coeffs, freqs) = worked_example();
        let tol = Tolerances::default();
        let empty = partial_product(&coeffs, &freqs, 1, 1, &tol).unwrap();
        assert_eq!(empty, TrigPolyPair::identity(1));
        let one = partial_product(&coeffs, &freqs, 0, 1, &tol).unwrap();
        assert_eq!(one.a, TrigPoly::constant(c(1.25)));
        assert_eq!(one.b, poly(&[(1, 0.75)]));
        let two = partial_product(&coeffs, &freqs, 0, 2, &tol).unwrap();
        assert_eq!(two.a, poly(&[(-1, 9.0 / 16.0), (0, 25.0 / 16.0)]));
        assert_eq!(two.b, poly(&[(1, 15.0 / 16.0), (2, 15.0 / 16.0)]));
        assert_eq!(two.a.mean(), c(25.0 / 16.0));
    }

    #[test]
    fn window_errors() {
        let (coeffs, freqs) = worked_example();
        let tol = Tolerances::default();
        assert!(matches!(
            partial_product(&coeffs, &freqs, 0, 3, &tol),
            Err(Error::IndexOutOfRange { .. })
        ));
        assert!(partial_product(&coeffs, &freqs, 2, 1, &tol).is_err());
        let tight = Tolerances {
            max_factors: 1,
            ..Tolerances::default()
        };
        assert!(matches!(
            partial_product(&coeffs, &freqs, 0, 2, &tight),
            Err(Error::Budget(_))
        ));
        assert!(s_mn(&coeffs, 0, 5).is_err());
    }

    #[test]
    fn s_mn_examples() {
        let zero = CoefficientSequence::from_b([c(0.0); 4]).unwrap();
        assert_eq!(s_mn(&zero, 0, 4).unwrap(), 0.0);
        let (coeffs, _) = worked_example();
        let s = s_mn(&coeffs, 0, 2).unwrap();
        assert!((s - 2.0 * (17.0_f64 / 8.0).ln()).abs() < 1e-15);
        assert!(s_mn(&coeffs, 0, 1).unwrap() <= s);
        assert_eq!(s_mn(&coeffs, 1, 1).unwrap(), 0.0);
    }

    #[test]
    fn identities_on_worked_example() {
        let (coeffs, freqs) = worked_example();
        let tol = Tolerances::default();
        let empty = TrigPolyPair::identity(0);
        assert_eq!(energy_identity_residual(&empty, &coeffs).unwrap(), 0.0);
        let two = partial_product(&coeffs, &freqs, 0, 2, &tol).unwrap();
        let e = energy_identity(&two, &coeffs).unwrap();
        assert_eq!(e.lhs, 1156.0 / 256.0);
        assert!(e.residual <= 1e-15);
        let cen = centered_identity(&two, &coeffs).unwrap();
        assert_eq!(cen.lhs, 531.0 / 256.0);
        assert!((cen.rhs - 531.0 / 256.0).abs() < 1e-14);
        let zero = CoefficientSequence::from_b([c(0.0); 3]).unwrap();
        let zfreqs = LacunarySequence::geometric_ceil(2.0, 3).unwrap();
        let zp = partial_product(&zero, &zfreqs, 0, 3, &tol).unwrap();
        let zc = centered_identity(&zp, &zero).unwrap();
        assert_eq!((zc.lhs, zc.rhs, zc.residual), (0.0, 0.0, 0.0));
    }

    #[test]
    fn gap_examples() {
        let (coeffs, freqs) = worked_example();
        let tol = Tolerances::default();
        let one = partial_product(&coeffs, &freqs, 0, 1, &tol).unwrap();
        let r = min_gap_check(&one, &freqs);
        assert_eq!((r.gap_union, r.required, r.ok, r.union_ok), (Some(1), Some(1), true, true));
        let two = partial_product(&coeffs, &freqs, 0, 2, &tol).unwrap();
        let r = min_gap_check(&two, &freqs);
        assert_eq!((r.gap_a, r.gap_b, r.gap_union), (Some(1), Some(1), Some(1)));
        assert!(r.ok);
        let empty = TrigPolyPair::identity(2);
        assert!(min_gap_check(&empty, &freqs).ok);
    }

    #[test]
    fn gap_for_dyadic_window() {
        let coeffs = CoefficientSequence::from_b((1..=8).map(|j| c(0.1 * j as f64))).unwrap();
        let freqs = LacunarySequence::geometric_ceil(2.0, 8).unwrap();
        let pair = partial_product(&coeffs, &freqs, 2, 8, &Tolerances::default()).unwrap();
        let r = min_gap_check(&pair, &freqs);
        assert_eq!(r.required, Some(4));
        assert!(r.ok);
        assert!(r.gap().unwrap() >= 4);
    }

    #[test]
    fn parseval_examples() {
        let (coeffs, freqs) = worked_example();
        let tol = Tolerances::default();
        let zero = CoefficientSequence::from_b([c(0.0); 2]).unwrap();
        let zp = partial_product(&zero, &freqs, 0, 2, &tol).unwrap();
        assert_eq!(nonlinear_parseval_residual(&zp, &zero, 4).unwrap(), 0.0);
        let one = partial_product(&coeffs, &freqs, 0, 1, &tol).unwrap();
        assert!(nonlinear_parseval_residual(&one, &coeffs, 4).unwrap() < 1e-15);
        // Jensen: int log|25/16 + 9/16 e(-t)| dt = log(25/16). The trapezoid
        // error on G points is log(1 - (9/25)^G) / G for even G.
        let two = partial_product(&coeffs, &freqs, 0, 2, &tol).unwrap();
        let minimal = minimal_parseval_grid(&two);
        assert_eq!(minimal, 8);
        let check = nonlinear_parseval(&two, &coeffs, minimal).unwrap();
        assert!((check.sum_log_a - (25.0_f64 / 16.0).ln()).abs() < 1e-15);
        let predicted = (1.0 - (9.0_f64 / 25.0).powi(8)).ln() / 8.0;
        assert!((check.quadrature - check.sum_log_a - predicted).abs() < 1e-15);
        assert!(nonlinear_parseval_residual(&two, &coeffs, 32).unwrap() < 1e-10);
        assert!(matches!(
            nonlinear_parseval(&two, &coeffs, 7),
            Err(Error::GridTooCoarse { points: 7, required: 8 })
        ));
    }

    #[test]
    fn composition_of_windows() {
        let coeffs =
            CoefficientSequence::from_f((1..=6).map(|j| Complex64::from_polar(0.15 * j as f64, j as f64))).unwrap();
        let freqs = LacunarySequence::geometric_ceil(2.0, 6).unwrap();
        let tol = Tolerances::default();
        let left = partial_product(&coeffs, &freqs, 0, 2, &tol).unwrap();
        let right = partial_product(&coeffs, &freqs, 2, 6, &tol).unwrap();
        let whole = partial_product(&coeffs, &freqs, 0, 6, &tol).unwrap();
        let composed = left.compose(&right).unwrap();
        assert_eq!(composed.a.len(), whole.a.len());
        for (x, y) in composed.a.terms().iter().zip(whole.a.terms()) {
            assert_eq!(x.0, y.0);
            assert!((x.1 - y.1).norm() < 1e-13);
        }
        assert!(right.compose(&left).is_err());
    }
}
