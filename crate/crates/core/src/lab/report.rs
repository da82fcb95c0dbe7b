//! Experiment reports and their CSV / JSON forms.
//!
//! Floats in CSV are written with 17 significant digits so files round-trip
//! exactly; JSON uses the shortest round-trip representation.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::experiment::ExperimentConfig;
use super::spec::TrendCheck;

pub const SCHEMA_VERSION: &str = "v1";

/// One `(window, p)` cell of the metric ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub p: f64,
    pub d_p: f64,
    #[serde(rename = "S_MN")]
    pub s_mn: f64,
    pub exp_s_minus_1: f64,
    /// `(e^S - 1) C_p`, only for `p > 2`
    pub bound_rhs: Option<f64>,
    pub ok: Option<bool>,
}

/// `g_N(t)` along the sequence at one sample point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointwiseRow {
    pub t: f64,
    #[serde(rename = "N")]
    pub n: usize,
    pub abs_a: f64,
    pub abs_b: f64,
    /// `rho(g_{N-1}(t), g_N(t))`, 0 for `N = 0`
    pub rho_prev: f64,
}

/// One instance of `|E| sum |B_j|^2 <= int_E |b|^2 + |cross| <= ...` with
/// `E` the grid cells where `|b_{M,N}|` is at most its median.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChainRow {
    #[serde(rename = "M")]
    pub m: usize,
    #[serde(rename = "N")]
    pub n: usize,
    pub grid_points: usize,
    pub measure: f64,
    /// `|E| sum |B_j|^2`
    pub lhs: f64,
    /// `|E| sum |D_n|^2`
    pub diagonal: f64,
    /// `int_E |b|^2`
    pub integral: f64,
    /// `|sum_{n != 0} r_n 1_E^(n)|`
    pub cross: f64,
    /// residual of `integral = diagonal + cross term`
    pub split_residual: f64,
    /// Cauchy-Schwarz bound on `cross`
    pub cauchy_schwarz: f64,
    /// the same with the autocorrelation factor replaced by `e^{4 sum |B_j|^2}`
    pub autocorrelation_bound: f64,
    pub ok: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PVerdict {
    pub p: f64,
    /// largest `d_p` over the tail of the ladder
    pub tail_max: f64,
    /// smallest `d_p` over the whole ladder
    pub floor_min: f64,
    pub verdict: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub verdict: String,
    pub per_p: Vec<PVerdict>,
    pub samples: usize,
    pub converged: Option<usize>,
    pub converged_fraction: Option<f64>,
    /// largest tail increment over the samples
    pub max_tail_increment: Option<f64>,
    pub bound_violations: usize,
    pub chain_ok: Option<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub schema: String,
    pub config: ExperimentConfig,
    pub l2: bool,
    pub trend: TrendCheck,
    pub frequencies: Vec<i64>,
    pub rows: Vec<MetricRow>,
    pub pointwise: Vec<PointwiseRow>,
    pub chain: Vec<ChainRow>,
    pub summary: Summary,
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn opt<T>(x: Option<T>, f: impl Fn(T) -> String) -> String {
    x.map(f).unwrap_or_default()
}

impl ExperimentReport {
    fn header<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        writeln!(
            out,
            "# schema={} experiment={} seed={} sample_seed={}",
            self.schema,
            self.config.experiment.name(),
            self.config.coefficients.seed,
            self.config.sample_seed
        )
    }

    pub fn write_rows_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.header(out)?;
        writeln!(out, "M,N,p,d_p,S_MN,exp_S_minus_1,bound_rhs,ok")?;
        for r in &self.rows {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{}",
                r.m,
                r.n,
                num(r.p),
                num(r.d_p),
                num(r.s_mn),
                num(r.exp_s_minus_1),
                opt(r.bound_rhs, num),
                opt(r.ok, |b| b.to_string())
            )?;
        }
        Ok(())
    }

    pub fn write_pointwise_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.header(out)?;
        writeln!(out, "t,N,abs_a,abs_b,rho_prev")?;
        for r in &self.pointwise {
            writeln!(
                out,
                "{},{},{},{},{}",
                num(r.t),
                r.n,
                num(r.abs_a),
                num(r.abs_b),
                num(r.rho_prev)
            )?;
        }
        Ok(())
    }

    pub fn write_chain_csv<W: Write>(&self, out: &mut W) -> std::io::Result<()> {
        self.header(out)?;
        writeln!(
            out,
            "M,N,grid_points,measure,lhs,diagonal,integral,cross,split_residual,cauchy_schwarz,autocorrelation_bound,ok"
        )?;
        for r in &self.chain {
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{},{},{}",
                r.m,
                r.n,
                r.grid_points,
                num(r.measure),
                num(r.lhs),
                num(r.diagonal),
                num(r.integral),
                num(r.cross),
                num(r.split_residual),
                num(r.cauchy_schwarz),
                num(r.autocorrelation_bound),
                r.ok
            )?;
        }
        Ok(())
    }

    pub fn to_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(text: &str) -> serde_json::Result<Self> {
        serde_json::from_str(text)
    }
}
