//! The `d_p` distances between SU(1,1)-valued functions on the torus, the
//! constant `C_p`, and the quantitative bounds used for convergence in
//! `d_p`.
//!
//! Distances are trapezoid averages on uniform grids. For a window `(M, N]`
//! of the product, left invariance of `rho` gives
//! `d_p(g_M, g_N) = || log(1 + |a_{M,N} - 1| + |b_{M,N}|) ||_p`,
//! and [`window_distance`] computes it from the window product directly.

use std::collections::HashMap;
use std::io::Write;
use std::sync::{Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::{lp_functional, TorusGrid};
use crate::lacunary::LacunarySequence;
use crate::product::{centered_identity, partial_product, s_mn, CoefficientSequence, IdentityCheck, TrigPolyPair};
use crate::quadrature::integrate;
use crate::su11::{rho, rho_from_identity_explicit, Su11Matrix};

/// Whether a value is the `L^p` norm (`p >= 1`) or its `p`-th power (`0 < p < 1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DpConvention {
    Norm,
    PowerP,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DpValue {
    pub p: f64,
    pub value: f64,
    pub convention: DpConvention,
}

impl DpValue {
    fn from_samples(grid: &TorusGrid, samples: &[f64], p: f64) -> Self {
        Self {
            p,
            value: lp_functional(grid, samples, p),
            convention: if p >= 1.0 {
                DpConvention::Norm
            } else {
                DpConvention::PowerP
            },
        }
    }

    /// `int rho^p dt`, whichever convention the value carries.
    pub fn integral_of_power(&self) -> f64 {
        match self.convention {
            DpConvention::Norm => self.value.powf(self.p),
            DpConvention::PowerP => self.value,
        }
    }
}

fn validate_p(p: f64) -> Result<()> {
    if p.is_finite() && p > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidInput(format!("exponent p = {p} must be positive and finite")))
    }
}

fn ensure_member(g: &Su11Matrix, tol: &Tolerances) -> Result<()> {
    if g.membership_defect() > tol.membership_rel || !g.a.norm_sqr().is_finite() {
        return Err(Error::Domain(format!(
            "|a|^2 - |b|^2 = {} is not 1",
            g.determinant()
        )));
    }
    Ok(())
}

/// `rho(g1, g2)` at a single point, written through the quotient
/// `(a~, b~) = g1^{-1} g2` as `log(1 + |a~ - 1| + |b~|)`.
pub fn pointwise_distance(g1: &Su11Matrix, g2: &Su11Matrix, tol: &Tolerances) -> Result<f64> {
    ensure_member(g1, tol)?;
    ensure_member(g2, tol)?;
    Ok(rho_from_identity_explicit(&g1.inverse().mul(g2)))
}

/// `rho(g_left(t_k), g_right(t_k))` on every grid point.
pub fn rho_profile(
    left: &TrigPolyPair,
    right: &TrigPolyPair,
    grid: &TorusGrid,
    tol: &Tolerances,
) -> Result<Vec<f64>> {
    grid.ensure_resolves(left.max_abs_frequency().max(right.max_abs_frequency()))?;
    left.evaluate_on_grid(grid)
        .iter()
        .zip(right.evaluate_on_grid(grid).iter())
        .map(|(g1, g2)| pointwise_distance(g1, g2, tol))
        .collect()
}

/// `d_p(g_left, g_right)` by quadrature on `grid`.
pub fn d_p_between(
    left: &TrigPolyPair,
    right: &TrigPolyPair,
    p: f64,
    grid: &TorusGrid,
    tol: &Tolerances,
) -> Result<DpValue> {
    validate_p(p)?;
    let profile = rho_profile(left, right, grid, tol)?;
    Ok(DpValue::from_samples(grid, &profile, p))
}

/// `t -> log(1 + |a(t) - 1| + |b(t)|)` on every grid point.
pub fn identity_profile(pair: &TrigPolyPair, grid: &TorusGrid, tol: &Tolerances) -> Result<Vec<f64>> {
    grid.ensure_resolves(pair.max_abs_frequency())?;
    pair.evaluate_on_grid(grid)
        .iter()
        .map(|g| {
            ensure_member(g, tol)?;
            Ok(rho_from_identity_explicit(g))
        })
        .collect()
}

/// `d_p(I, g)` for the function `g` represented by `pair`.
pub fn d_p_to_identity(pair: &TrigPolyPair, p: f64, grid: &TorusGrid, tol: &Tolerances) -> Result<DpValue> {
    validate_p(p)?;
    let profile = identity_profile(pair, grid, tol)?;
    Ok(DpValue::from_samples(grid, &profile, p))
}

/// `d_p(g_M, g_N)` through the window product over `(M, N]`. Without an
/// explicit grid the minimal grid `4 * maxfreq + 4` is used.
pub fn window_distance(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    p: f64,
    grid: Option<TorusGrid>,
    tol: &Tolerances,
) -> Result<DpValue> {
    let pair = partial_product(coeffs, freqs, m, n, tol)?;
    let grid = grid.unwrap_or_else(|| TorusGrid::minimal_for(pair.max_abs_frequency()));
    d_p_to_identity(&pair, p, &grid, tol)
}

/// The operator-norm and explicit forms of `rho(I, g)`, for cross-checks.
pub fn metric_forms(g: &Su11Matrix) -> (f64, f64) {
    (
        rho(&Su11Matrix::identity(), g).value(),
        rho_from_identity_explicit(g),
    )
}

static CP_CACHE: OnceLock<Mutex<HashMap<(u64, u64), f64>>> = OnceLock::new();

/// `C_p = int_0^inf 4 d(alpha) / (exp(alpha^{1/p}) - 1)^2` for `p > 2`.
///
/// With `alpha = u^p` the integrand is `4 p u^{p-1} / (e^u - 1)^2`, which
/// behaves like `4 p u^{p-3}` at 0; the further change `u = w^r`,
/// `r = max(1, 1/(p-2))`, makes it bounded. The range is cut at `U` where
/// the tail bound `4 p U^{p-1} e^{-2U} / (1 - e^{-U})^2` (valid for
/// `U >= max(1, p-1)`) drops below half the tolerance.
pub fn c_p(p: f64, rel_tol: f64) -> Result<f64> {
    if !(p.is_finite() && p > 2.0) {
        return Err(Error::DivergentIntegral(p));
    }
    if !(rel_tol > 0.0 && rel_tol < 1.0) {
        return Err(Error::InvalidInput(format!("relative tolerance {rel_tol} out of range")));
    }
    let key = (p.to_bits(), rel_tol.to_bits());
    let cache = CP_CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(&v) = cache.lock().expect("cache poisoned").get(&key) {
        return Ok(v);
    }
    let value = compute_c_p(p, rel_tol)?;
    cache.lock().expect("cache poisoned").insert(key, value);
    Ok(value)
}

fn compute_c_p(p: f64, rel_tol: f64) -> Result<f64> {
    let r = if p < 3.0 { 1.0 / (p - 2.0) } else { 1.0 };
    let integrand = move |w: f64| {
        if w <= 0.0 {
            // limit of 4 p r w^{r(p-2)-1} as w -> 0
            return if r * (p - 2.0) - 1.0 == 0.0 { 4.0 * p * r } else { 0.0 };
        }
        let u = w.powf(r);
        let ratio = u / u.exp_m1();
        4.0 * p * r * w.powf(r * (p - 2.0) - 1.0) * ratio * ratio
    };
    let tail = |big_u: f64| {
        4.0 * p * big_u.powf(p - 1.0) * (-2.0 * big_u).exp() / (-(-big_u).exp_m1()).powi(2)
    };
    let mut big_u = (p - 1.0).max(8.0);
    loop {
        let upper = big_u.powf(1.0 / r);
        let (value, _) = integrate(integrand, 0.0, upper, 0.0, rel_tol / 4.0, 4096)?;
        if tail(big_u) <= 0.5 * rel_tol * value {
            return Ok(value);
        }
        big_u *= 1.5;
    }
}

/// One instance of `d_p(g_M, g_N)^p <= (e^{S_{M,N}} - 1) C_p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub ok: bool,
}

pub fn cauchy_bound_check(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    p: f64,
    grid: Option<TorusGrid>,
    tol: &Tolerances,
) -> Result<BoundCheck> {
    Ok(cauchy_bound_checks(coeffs, freqs, m, n, &[p], grid, tol)?[0])
}

/// [`cauchy_bound_check`] for several exponents sharing one evaluation.
pub fn cauchy_bound_checks(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    ps: &[f64],
    grid: Option<TorusGrid>,
    tol: &Tolerances,
) -> Result<Vec<BoundCheck>> {
    let pair = partial_product(coeffs, freqs, m, n, tol)?;
    let grid = grid.unwrap_or_else(|| TorusGrid::minimal_for(pair.max_abs_frequency()));
    let profile = identity_profile(&pair, &grid, tol)?;
    let e = s_mn(coeffs, m, n)?.exp_m1();
    ps.iter()
        .map(|&p| {
            let cp = c_p(p, tol.cp_rel)?;
            let lhs = DpValue::from_samples(&grid, &profile, p).integral_of_power();
            let rhs = e * cp;
            Ok(BoundCheck {
                lhs,
                rhs,
                ok: lhs <= rhs * (1.0 + tol.bound_slack),
            })
        })
        .collect()
}

/// `int (|a_{M,N} - A_{M+1}...A_N|^2 + |b_{M,N}|^2) dt` on coefficients
/// against `prod (A_j^2 + |B_j|^2) - prod A_j^2`.
pub fn shifted_energy_check(
    coeffs: &CoefficientSequence,
    freqs: &LacunarySequence,
    m: usize,
    n: usize,
    tol: &Tolerances,
) -> Result<IdentityCheck> {
    let pair = partial_product(coeffs, freqs, m, n, tol)?;
    centered_identity(&pair, coeffs)
}

/// Writes `t,rho` rows.
pub fn write_profile_csv<W: Write>(out: &mut W, grid: &TorusGrid, profile: &[f64]) -> std::io::Result<()> {
    writeln!(out, "t,rho")?;
    for (k, r) in profile.iter().enumerate() {
        writeln!(out, "{:.16e},{:.16e}", grid.point(k), r)?;
    }
    Ok(())
}

/// One `(M, N, p, d_p, bound)` row; `bound` is empty when `p <= 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceRow {
    pub m: usize,
    pub n: usize,
    pub p: f64,
    pub d_p: f64,
    pub bound: Option<f64>,
}

pub fn write_distance_csv<W: Write>(out: &mut W, rows: &[DistanceRow]) -> std::io::Result<()> {
    writeln!(out, "M,N,p,d_p,bound")?;
    for r in rows {
        let bound = r.bound.map(|b| format!("{b:.16e}")).unwrap_or_default();
        writeln!(out, "{},{},{:.16e},{:.16e},{}", r.m, r.n, r.p, r.d_p, bound)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn pointwise_examples() {
        let tol = Tolerances::default();
        let g = Su11Matrix::new(c(1.25), c(0.75));
        assert_eq!(pointwise_distance(&g, &g, &tol).unwrap(), 0.0);
        let id = Su11Matrix::identity();
        assert!((pointwise_distance(&id, &g, &tol).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert_eq!(pointwise_distance(&id, &id, &tol).unwrap(), 0.0);
        let bad = Su11Matrix::new(c(1.25), c(0.5));
        assert!(matches!(pointwise_distance(&id, &bad, &tol), Err(Error::Domain(_))));
    }

    #[test]
    fn constant_quotient_distance() {
        // a = i, b = 0 is a constant rotation at distance log(1 + sqrt 2) from I.
        let tol = Tolerances::default();
        let pair = TrigPolyPair {
            start: 0,
            end: 2,
            a: crate::TrigPoly::constant(Complex64::new(0.0, 1.0)),
            b: crate::TrigPoly::zero(),
        };
        let grid = TorusGrid::new(8).unwrap();
        for p in [0.5, 1.0, 3.0] {
            let d = d_p_to_identity(&pair, p, &grid, &tol).unwrap();
            let r = 2f64.sqrt().ln_1p();
            let expected = if p >= 1.0 { r } else { r.powf(p) };
            assert!((d.value - expected).abs() < 1e-15, "p = {p}");
        }
        assert!(d_p_between(&pair, &pair, 2.0, &grid, &tol).unwrap().value == 0.0);
        assert!(d_p_to_identity(&pair, 0.0, &grid, &tol).is_err());
    }

    #[test]
    fn c_p_golden_values() {
        // Closed form 4 Gamma(p+1) (zeta(p-1) - zeta(p)), evaluated with 30-digit arithmetic.
        let golden = [
            (2.5, 16.894_428_687_998_754),
            (3.0, 10.629_051_928_527_172),
            (4.0, 11.494_432_267_051_785),
            (5.0, 21.789_829_712_528_767),
        ];
        for (p, expected) in golden {
            let v = c_p(p, 1e-8).unwrap();
            assert!((v - expected).abs() / expected < 1e-8, "p = {p}: {v}");
        }
        assert_eq!(c_p(2.0, 1e-8), Err(Error::DivergentIntegral(2.0)));
        assert!(c_p(1.0, 1e-8).is_err());
    }

    #[test]
    fn bound_examples() {
        let tol = Tolerances::default();
        let freqs = LacunarySequence::geometric_ceil(2.0, 8).unwrap();
        let zero = CoefficientSequence::from_b([c(0.0); 8]).unwrap();
        let check = cauchy_bound_check(&zero, &freqs, 0, 8, 4.0, None, &tol).unwrap();
        assert_eq!((check.lhs, check.rhs, check.ok), (0.0, 0.0, true));
        let halving = CoefficientSequence::from_b((1..=8).map(|j| c(0.5f64.powi(j)))).unwrap();
        assert!(cauchy_bound_check(&halving, &freqs, 2, 8, 4.0, None, &tol).unwrap().ok);
        let constant = CoefficientSequence::from_b([c(0.75); 6]).unwrap();
        let check = cauchy_bound_check(&constant, &freqs, 0, 6, 3.0, None, &tol).unwrap();
        assert!(check.ok && check.lhs > 0.0);
    }

    #[test]
    fn shifted_energy_examples() {
        let tol = Tolerances::default();
        let freqs = LacunarySequence::new(vec![1, 2], 2.0).unwrap();
        let coeffs = CoefficientSequence::from_b([c(0.75), c(0.75)]).unwrap();
        let empty = shifted_energy_check(&coeffs, &freqs, 1, 1, &tol).unwrap();
        assert_eq!((empty.lhs, empty.rhs), (0.0, 0.0));
        let two = shifted_energy_check(&coeffs, &freqs, 0, 2, &tol).unwrap();
        assert_eq!(two.lhs, 531.0 / 256.0);
        assert!(two.residual < 1e-14);
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_distance_csv(
            &mut buf,
            &[DistanceRow { m: 0, n: 2, p: 3.0, d_p: 0.5, bound: None }],
        )
        .unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s, "M,N,p,d_p,bound\n0,2,3.0000000000000000e0,5.0000000000000000e-1,\n");
    }
}
