//! Finite lacunary SU(1,1) trigonometric products.
//!
//! The crate builds the partial products
//! `prod_{j=M+1}^{N} [[A_j, B_j e(m_j t)], [conj(B_j) e(-m_j t), A_j]]`
//! exactly as pairs of sparse trigonometric polynomials, checks the energy
//! and separation identities they satisfy, measures distances in the
//! `d_p` metrics, verifies the combinatorial facts behind almost-everywhere
//! convergence by exhaustive enumeration, and runs desk-scale convergence
//! experiments.

pub mod config;
pub mod error;
pub mod grid;
pub mod lab;
pub mod lacunary;
pub mod metric;
pub mod numeric;
pub mod product;
pub mod quadrature;
pub mod repr;
pub mod su11;
pub mod trig_poly;

pub use config::Tolerances;
pub use error::{Error, Result};
pub use grid::TorusGrid;
pub use lacunary::LacunarySequence;
pub use product::{CoefficientSequence, TrigPolyPair};
pub use su11::{CoefficientPair, Mat2, MetricValue, Su11Matrix};
pub use trig_poly::TrigPoly;
