//! The three convergence experiments.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::{ChainRow, ExperimentReport, MetricRow, PVerdict, PointwiseRow, Summary, SCHEMA_VERSION};
use super::spec::{generate_coefficients, generate_lacunary, trend_check, CoefficientSpec, FrequencyMode};
use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::grid::{lp_functional, TorusGrid};
use crate::lacunary::LacunarySequence;
use crate::metric::c_p;
use crate::numeric::{compensated_sum, relative_residual};
use crate::product::{partial_product, s_mn, CoefficientSequence};
use crate::su11::{rho_from_identity_explicit, Su11Matrix};

/// Tail `d_p` below this reads as a Cauchy trend.
pub const YES_THRESHOLD: f64 = 1e-3;
/// `d_p` staying above this on every window reads as no Cauchy trend.
pub const NO_THRESHOLD: f64 = 1e-2;
/// Pointwise tail increments below this count as converged.
pub const CONVERGED_THRESHOLD: f64 = 1e-6;
/// Largest quadrature grid an experiment may allocate.
pub const MAX_GRID_POINTS: usize = 1 << 25;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ExperimentKind {
    /// convergence in the `d_p` metrics
    Theorem1,
    /// pointwise convergence for square-summable coefficients
    Theorem2,
    /// pointwise divergence for non-square-summable coefficients
    Theorem3,
}

impl ExperimentKind {
    pub fn name(self) -> &'static str {
        match self {
            Self::Theorem1 => "theorem1",
            Self::Theorem2 => "theorem2",
            Self::Theorem3 => "theorem3",
        }
    }
}

fn default_p_list() -> Vec<f64> {
    vec![1.0]
}
fn default_samples() -> usize {
    256
}
fn default_one() -> usize {
    1
}
fn default_window() -> usize {
    8
}
fn default_step() -> usize {
    2
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentKind,
    pub coefficients: CoefficientSpec,
    pub q: f64,
    /// explicit frequencies; `m_1 = 1, m_{j+1} = ceil(q m_j)` when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub frequencies: Option<Vec<i64>>,
    pub n_max: usize,
    #[serde(default = "default_p_list")]
    pub p_list: Vec<f64>,
    #[serde(default = "default_samples")]
    pub samples: usize,
    #[serde(default)]
    pub sample_seed: u64,
    /// the quadrature grid has at least `grid_multiplier * (4 maxfreq + 4)` points
    #[serde(default = "default_one")]
    pub grid_multiplier: usize,
    /// factors per ladder window
    #[serde(default = "default_window")]
    pub window: usize,
    /// offset between consecutive ladder windows
    #[serde(default = "default_step")]
    pub step: usize,
    /// run with coefficients on the wrong side of the `l^2` precondition
    #[serde(default)]
    pub allow_control: bool,
}

impl ExperimentConfig {
    pub fn new(experiment: ExperimentKind, coefficients: CoefficientSpec, q: f64, n_max: usize) -> Self {
        Self {
            experiment,
            coefficients,
            q,
            frequencies: None,
            n_max,
            p_list: default_p_list(),
            samples: default_samples(),
            sample_seed: 0,
            grid_multiplier: 1,
            window: default_window(),
            step: default_step(),
            allow_control: false,
        }
    }

    fn validate(&self, l2: bool) -> Result<()> {
        let invalid = |m: String| Err(Error::InvalidInput(m));
        if self.n_max == 0 {
            return invalid("n_max must be at least 1".into());
        }
        if self.window == 0 || self.step == 0 || self.grid_multiplier == 0 {
            return invalid("window, step and grid_multiplier must be positive".into());
        }
        if let Some(p) = self.p_list.iter().find(|p| !(p.is_finite() && **p > 0.0)) {
            return invalid(format!("exponent p = {p} must be positive and finite"));
        }
        let min_q = match self.experiment {
            ExperimentKind::Theorem3 => 3.0,
            _ => 2.0,
        };
        if !(self.q >= min_q) {
            return invalid(format!("{} needs q >= {min_q}, got {}", self.experiment.name(), self.q));
        }
        match self.experiment {
            ExperimentKind::Theorem2 if !l2 && !self.allow_control => {
                invalid("theorem2 needs square-summable coefficients (set allow_control for a control run)".into())
            }
            ExperimentKind::Theorem3 if l2 && !self.allow_control => {
                invalid("theorem3 needs coefficients that are not square-summable (set allow_control for a control run)".into())
            }
            ExperimentKind::Theorem2 | ExperimentKind::Theorem3 if self.samples == 0 => {
                invalid("samples must be positive".into())
            }
            _ => Ok(()),
        }
    }

    fn frequency_mode(&self) -> FrequencyMode {
        match &self.frequencies {
            Some(list) => FrequencyMode::CustomList(list.clone()),
            None => FrequencyMode::GeometricCeil,
        }
    }
}

/// Windows `(M, M + window]` for `M = 0, step, ...` inside `(0, n_max]`, or
/// the single window `(0, n_max]` when it is shorter than one window.
pub fn window_ladder(n_max: usize, window: usize, step: usize) -> Vec<(usize, usize)> {
    if n_max <= window {
        return vec![(0, n_max)];
    }
    (0..)
        .map(|k| k * step)
        .take_while(|m| m + window <= n_max)
        .map(|m| (m, m + window))
        .collect()
}

struct Setup {
    coeffs: CoefficientSequence,
    freqs: LacunarySequence,
    l2: bool,
}

fn setup(config: &ExperimentConfig) -> Result<Setup> {
    config.coefficients.validate()?;
    let generated = generate_coefficients(&config.coefficients, config.n_max)?;
    config.validate(generated.l2)?;
    let freqs = generate_lacunary(config.q, config.n_max, &config.frequency_mode())?;
    Ok(Setup {
        coeffs: generated.coefficients,
        freqs,
        l2: generated.l2,
    })
}

fn quadrature_grid(max_frequency: u64, multiplier: usize) -> Result<TorusGrid> {
    let required = TorusGrid::required_size(max_frequency)
        .checked_mul(multiplier)
        .ok_or(Error::Overflow)?;
    if required > MAX_GRID_POINTS {
        return Err(Error::Budget(format!(
            "quadrature grid of {required} points exceeds {MAX_GRID_POINTS}"
        )));
    }
    TorusGrid::smooth_at_least(required)
}

/// Everything one ladder window contributes.
struct WindowResult {
    rows: Vec<MetricRow>,
    chain: Option<ChainRow>,
}

fn run_window(
    s: &Setup,
    config: &ExperimentConfig,
    (m, n): (usize, usize),
    with_chain: bool,
    tol: &Tolerances,
) -> Result<WindowResult> {
    let pair = partial_product(&s.coeffs, &s.freqs, m, n, tol)?;
    let grid = quadrature_grid(pair.max_abs_frequency(), config.grid_multiplier)?;
    let a_vals = pair.a.evaluate_on_grid(&grid);
    let b_vals = pair.b.evaluate_on_grid(&grid);
    let mut profile = Vec::with_capacity(grid.size());
    for (a, b) in a_vals.iter().zip(&b_vals) {
        let g = Su11Matrix::new(*a, *b);
        if g.membership_defect() > tol.membership_rel {
            return Err(Error::Domain(format!("|a|^2 - |b|^2 = {} is not 1", g.determinant())));
        }
        profile.push(rho_from_identity_explicit(&g));
    }
    drop(a_vals);
    let s_val = s_mn(&s.coeffs, m, n)?;
    let e = s_val.exp_m1();
    let mut rows = Vec::with_capacity(config.p_list.len());
    for &p in &config.p_list {
        let d_p = lp_functional(&grid, &profile, p);
        let (bound_rhs, ok) = if p > 2.0 {
            let rhs = e * c_p(p, tol.cp_rel)?;
            let lhs = if p >= 1.0 { d_p.powf(p) } else { d_p };
            (Some(rhs), Some(lhs <= rhs * (1.0 + tol.bound_slack)))
        } else {
            (None, None)
        };
        rows.push(MetricRow {
            m,
            n,
            p,
            d_p,
            s_mn: s_val,
            exp_s_minus_1: e,
            bound_rhs,
            ok,
        });
    }
    let chain = if with_chain {
        Some(chain_row(s, &pair.b, &b_vals, &grid, (m, n), tol)?)
    } else {
        None
    };
    Ok(WindowResult { rows, chain })
}

fn chain_row(
    s: &Setup,
    b: &crate::TrigPoly,
    b_vals: &[Complex64],
    grid: &TorusGrid,
    (m, n): (usize, usize),
    tol: &Tolerances,
) -> Result<ChainRow> {
    let g = grid.size();
    let abs_sq: Vec<f64> = b_vals.iter().map(|v| v.norm_sqr()).collect();
    let median = {
        let mut sorted = abs_sq.clone();
        let mid = (g - 1) / 2;
        *sorted.select_nth_unstable_by(mid, f64::total_cmp).1
    };
    let indicator: Vec<f64> = abs_sq.iter().map(|&x| if x <= median { 1.0 } else { 0.0 }).collect();
    let measure = compensated_sum(indicator.iter().copied()) / g as f64;
    let integral = compensated_sum(abs_sq.iter().zip(&indicator).map(|(x, e)| x * e)) / g as f64;
    let hat: Vec<Complex64> = grid.analyze(&indicator).into_iter().map(|z| z / g as f64).collect();

    let energy = compensated_sum(s.coeffs.window(m, n)?.iter().map(|c| c.b().norm_sqr()));
    let lhs = measure * energy;
    let diagonal = measure * b.l2_norm_sq();
    let r = b.autocorrelation()?;
    let mut cross = Complex64::new(0.0, 0.0);
    let mut hat_energy = 0.0;
    for &(freq, coef) in r.terms() {
        if freq == 0 {
            continue;
        }
        let h = hat[freq.rem_euclid(g as i64) as usize];
        cross += coef * h;
        hat_energy += h.norm_sqr();
    }
    let split_residual = relative_residual(diagonal + cross.re, integral);
    let cauchy_schwarz = r.l2_norm_sq().sqrt() * hat_energy.sqrt();
    let autocorrelation_bound = (4.0 * energy).exp() * hat_energy.sqrt();
    let slack = 1.0 + tol.autocorrelation_slack;
    let ok = lhs <= diagonal * slack
        && split_residual <= tol.pointwise
        && cross.norm() <= cauchy_schwarz * slack
        && cauchy_schwarz <= autocorrelation_bound * slack;
    Ok(ChainRow {
        m,
        n,
        grid_points: g,
        measure,
        lhs,
        diagonal,
        integral,
        cross: cross.norm(),
        split_residual,
        cauchy_schwarz,
        autocorrelation_bound,
        ok,
    })
}

fn ladder_results(
    s: &Setup,
    config: &ExperimentConfig,
    with_chain: bool,
    tol: &Tolerances,
) -> Result<Vec<WindowResult>> {
    window_ladder(config.n_max, config.window, config.step)
        .into_par_iter()
        .map(|w| run_window(s, config, w, with_chain, tol))
        .collect()
}

fn per_p_verdicts(rows: &[MetricRow], config: &ExperimentConfig) -> Vec<PVerdict> {
    let ladder = window_ladder(config.n_max, config.window, config.step);
    let tail_from = ladder
        .iter()
        .map(|w| w.0)
        .filter(|&m| m >= config.n_max / 2)
        .min()
        .unwrap_or_else(|| ladder.last().map_or(0, |w| w.0));
    config
        .p_list
        .iter()
        .map(|&p| {
            let of_p = rows.iter().filter(|r| r.p == p);
            let tail_max = of_p.clone().filter(|r| r.m >= tail_from).map(|r| r.d_p).fold(0.0, f64::max);
            let floor_min = of_p.map(|r| r.d_p).fold(f64::INFINITY, f64::min);
            let verdict = if tail_max < YES_THRESHOLD {
                "yes"
            } else if floor_min >= NO_THRESHOLD {
                "no"
            } else {
                "inconclusive"
            };
            PVerdict {
                p,
                tail_max,
                floor_min,
                verdict: verdict.into(),
            }
        })
        .collect()
}

/// Sample points and, per point, the products `g_N(t)` and the largest
/// `rho(g_M(t), g_N(t))` with `n_max / 2 <= M < N <= n_max`.
fn pointwise_runs(s: &Setup, config: &ExperimentConfig) -> (Vec<PointwiseRow>, Vec<f64>) {
    let mut rng = ChaCha8Rng::seed_from_u64(config.sample_seed);
    let ts: Vec<f64> = (0..config.samples).map(|_| rng.gen::<f64>()).collect();
    let n_max = config.n_max;
    let tail_start = n_max / 2;
    let per_t: Vec<(Vec<PointwiseRow>, f64)> = ts
        .par_iter()
        .map(|&t| {
            let factors: Vec<Su11Matrix> = s
                .coeffs
                .pairs()
                .iter()
                .zip(s.freqs.frequencies())
                .map(|(c, &mj)| c.factor_at(mj, t))
                .collect();
            let mut rows = Vec::with_capacity(n_max + 1);
            let mut g = Su11Matrix::identity();
            rows.push(PointwiseRow { t, n: 0, abs_a: 1.0, abs_b: 0.0, rho_prev: 0.0 });
            for (j, f) in factors.iter().enumerate() {
                g = g.mul(f);
                rows.push(PointwiseRow {
                    t,
                    n: j + 1,
                    abs_a: g.a.norm(),
                    abs_b: g.b.norm(),
                    rho_prev: rho_from_identity_explicit(f),
                });
            }
            // left invariance: rho(g_M, g_N) = rho(I, F_{M+1} ... F_N)
            let mut tail = 0.0_f64;
            for m in tail_start..n_max {
                let mut w = Su11Matrix::identity();
                for f in &factors[m..n_max] {
                    w = w.mul(f);
                    tail = tail.max(rho_from_identity_explicit(&w));
                }
            }
            (rows, tail)
        })
        .collect();
    let mut rows = Vec::with_capacity(ts.len() * (n_max + 1));
    let mut tails = Vec::with_capacity(ts.len());
    for (r, tail) in per_t {
        rows.extend(r);
        tails.push(tail);
    }
    (rows, tails)
}

fn base_report(config: &ExperimentConfig, s: &Setup) -> Result<ExperimentReport> {
    Ok(ExperimentReport {
        schema: SCHEMA_VERSION.into(),
        config: config.clone(),
        l2: s.l2,
        trend: trend_check(&config.coefficients)?,
        frequencies: s.freqs.frequencies().to_vec(),
        rows: Vec::new(),
        pointwise: Vec::new(),
        chain: Vec::new(),
        summary: Summary {
            verdict: String::new(),
            per_p: Vec::new(),
            samples: 0,
            converged: None,
            converged_fraction: None,
            max_tail_increment: None,
            bound_violations: 0,
            chain_ok: None,
        },
    })
}

fn require_kind(config: &ExperimentConfig, kind: ExperimentKind) -> Result<()> {
    if config.experiment != kind {
        return Err(Error::InvalidInput(format!(
            "config is for {}, not {}",
            config.experiment.name(),
            kind.name()
        )));
    }
    Ok(())
}

/// `d_p` along the window ladder with the `C_p` audit on every `p > 2` row.
pub fn theorem1_experiment(config: &ExperimentConfig, tol: &Tolerances) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::Theorem1)?;
    let s = setup(config)?;
    let mut report = base_report(config, &s)?;
    report.rows = ladder_results(&s, config, false, tol)?
        .into_iter()
        .flat_map(|w| w.rows)
        .collect();
    report.summary.per_p = per_p_verdicts(&report.rows, config);
    report.summary.bound_violations = report.rows.iter().filter(|r| r.ok == Some(false)).count();
    let verdicts: Vec<&str> = report.summary.per_p.iter().map(|v| v.verdict.as_str()).collect();
    let overall = if verdicts.iter().all(|v| *v == "yes") {
        "yes"
    } else if verdicts.iter().all(|v| *v == "no") {
        "no"
    } else {
        "inconclusive"
    };
    report.summary.verdict = format!("cauchy-trend: {overall}");
    Ok(report)
}

fn fill_pointwise(report: &mut ExperimentReport, s: &Setup, config: &ExperimentConfig) {
    let (rows, tails) = pointwise_runs(s, config);
    let converged = tails.iter().filter(|&&x| x < CONVERGED_THRESHOLD).count();
    report.pointwise = rows;
    report.summary.samples = tails.len();
    report.summary.converged = Some(converged);
    report.summary.converged_fraction = Some(converged as f64 / tails.len() as f64);
    report.summary.max_tail_increment = Some(tails.iter().copied().fold(0.0, f64::max));
    report.summary.verdict = format!("converged: {converged}/{}", tails.len());
}

/// Tail increments of `g_N(t)` at seeded random points.
pub fn theorem2_experiment(config: &ExperimentConfig, _tol: &Tolerances) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::Theorem2)?;
    let s = setup(config)?;
    let mut report = base_report(config, &s)?;
    fill_pointwise(&mut report, &s, config);
    Ok(report)
}

/// Tail increments at random points plus the measure inequality chain on
/// every ladder window.
pub fn theorem3_experiment(config: &ExperimentConfig, tol: &Tolerances) -> Result<ExperimentReport> {
    require_kind(config, ExperimentKind::Theorem3)?;
    let s = setup(config)?;
    let mut report = base_report(config, &s)?;
    fill_pointwise(&mut report, &s, config);
    let windows = ladder_results(&s, config, true, tol)?;
    for w in windows {
        report.rows.extend(w.rows);
        report.chain.extend(w.chain);
    }
    report.summary.per_p = per_p_verdicts(&report.rows, config);
    report.summary.bound_violations = report.rows.iter().filter(|r| r.ok == Some(false)).count();
    report.summary.chain_ok = Some(report.chain.iter().all(|c| c.ok));
    Ok(report)
}

pub fn run_experiment(config: &ExperimentConfig, tol: &Tolerances) -> Result<ExperimentReport> {
    match config.experiment {
        ExperimentKind::Theorem1 => theorem1_experiment(config, tol),
        ExperimentKind::Theorem2 => theorem2_experiment(config, tol),
        ExperimentKind::Theorem3 => theorem3_experiment(config, tol),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_shapes() {
        assert_eq!(window_ladder(20, 8, 2).len(), 7);
        assert_eq!(window_ladder(20, 8, 2)[6], (12, 20));
        assert_eq!(window_ladder(5, 8, 2), vec![(0, 5)]);
    }

    #[test]
    fn zero_coefficients_are_trivial() {
        let tol = Tolerances::default();
        let mut config = ExperimentConfig::new(ExperimentKind::Theorem1, CoefficientSpec::zero(), 2.0, 10);
        config.p_list = vec![1.0, 3.0];
        let r = theorem1_experiment(&config, &tol).unwrap();
        assert!(r.rows.iter().all(|row| row.d_p == 0.0));
        assert_eq!(r.summary.verdict, "cauchy-trend: yes");
        assert_eq!(r.summary.bound_violations, 0);

        config.experiment = ExperimentKind::Theorem2;
        config.samples = 8;
        let r = theorem2_experiment(&config, &tol).unwrap();
        assert_eq!(r.summary.converged, Some(8));
        assert!(r.pointwise.iter().all(|row| row.rho_prev == 0.0));

        config.experiment = ExperimentKind::Theorem3;
        config.q = 3.0;
        assert!(matches!(theorem3_experiment(&config, &tol), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn preconditions() {
        let tol = Tolerances::default();
        let c = ExperimentConfig::new(ExperimentKind::Theorem2, CoefficientSpec::constant(0.5), 2.0, 6);
        assert!(theorem2_experiment(&c, &tol).is_err());
        let c = ExperimentConfig::new(ExperimentKind::Theorem1, CoefficientSpec::zero(), 1.5, 6);
        assert!(theorem1_experiment(&c, &tol).is_err());
        let c = ExperimentConfig::new(ExperimentKind::Theorem3, CoefficientSpec::constant(0.5), 2.0, 6);
        assert!(theorem3_experiment(&c, &tol).is_err());
    }

    #[test]
    fn reports_are_deterministic() {
        let tol = Tolerances::default();
        let mut config = ExperimentConfig::new(
            ExperimentKind::Theorem3,
            CoefficientSpec::random_phase(false, 0.5, 0.25, 9),
            3.0,
            8,
        );
        config.samples = 16;
        config.window = 4;
        let a = theorem3_experiment(&config, &tol).unwrap();
        let b = theorem3_experiment(&config, &tol).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.chain.len(), 3);
        assert_eq!(a.summary.chain_ok, Some(true));
    }
}
