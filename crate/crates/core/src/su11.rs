//! SU(1,1) values, coefficient normalizations and the group metric.
//!
//! An element of SU(1,1) is stored by its first row `(a, b)`; the full
//! matrix is `[[a, b], [conj(b), conj(a)]]` with `|a|^2 - |b|^2 = 1`.
//! The metric is `rho(G1, G2) = log(1 + ||G1^{-1} G2 - I||_op)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::Tolerances;
use crate::error::{Error, Result};
use crate::numeric::character;

/// One factor's coefficients `(A, B)` with `A > 0` and `A^2 - |B|^2 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CoefficientPair {
    a: f64,
    b: Complex64,
}

impl CoefficientPair {
    /// Pair with the given off-diagonal coefficient; `A = sqrt(1 + |B|^2)`.
    pub fn from_b(b: Complex64) -> Result<Self> {
        if !(b.re.is_finite() && b.im.is_finite()) {
            return Err(Error::InvalidInput(format!("non-finite coefficient B = {b}")));
        }
        Ok(Self {
            a: 1.0_f64.hypot(b.norm()),
            b,
        })
    }

    /// Pair from the disk normalization `F = B / A`, `|F| < 1`.
    pub fn from_f(f: Complex64) -> Result<Self> {
        let r = f.norm();
        if !r.is_finite() || r >= 1.0 {
            return Err(Error::Domain(format!("|F| = {r} is not below 1")));
        }
        // 1 - r^2 factored to keep precision for |F| close to 1
        let a = 1.0 / ((1.0 - r) * (1.0 + r)).sqrt();
        Ok(Self { a, b: f * a })
    }

    /// Identity factor `(1, 0)`.
    pub fn identity() -> Self {
        Self {
            a: 1.0,
            b: Complex64::new(0.0, 0.0),
        }
    }

    /// Accepts an externally supplied pair after validating the invariant.
    pub fn new(a: f64, b: Complex64, tol: &Tolerances) -> Result<Self> {
        let pair = Self { a, b };
        if !(a > 0.0) || !a.is_finite() {
            return Err(Error::Domain(format!("A = {a} must be positive and finite")));
        }
        if pair.invariant_defect() > tol.invariant_rel {
            return Err(Error::Domain(format!(
                "A^2 - |B|^2 = {} differs from 1",
                a * a - b.norm_sqr()
            )));
        }
        Ok(pair)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    /// `F = B / A`, always inside the unit disk.
    pub fn f(&self) -> Complex64 {
        self.b / self.a
    }

    /// `|A^2 - |B|^2 - 1| / A^2`.
    pub fn invariant_defect(&self) -> f64 {
        (self.a * self.a - self.b.norm_sqr() - 1.0).abs() / (self.a * self.a)
    }

    /// `log(A^2 + |B|^2) = log(1 + 2|B|^2)`.
    pub fn log_energy(&self) -> f64 {
        (2.0 * self.b.norm_sqr()).ln_1p()
    }

    /// `log(A^2) = log(1 + |B|^2)`.
    pub fn log_a_sq(&self) -> f64 {
        self.b.norm_sqr().ln_1p()
    }

    /// The matrix factor `[[A, B e(m t)], [conj(B) e(-m t), A]]` at `t`.
    pub fn factor_at(&self, m: i64, t: f64) -> Su11Matrix {
        Su11Matrix {
            a: Complex64::new(self.a, 0.0),
            b: self.b * character(m, t),
        }
    }
}

/// An element `[[a, b], [conj(b), conj(a)]]` of SU(1,1).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Su11Matrix {
    pub a: Complex64,
    pub b: Complex64,
}

impl Su11Matrix {
    pub fn identity() -> Self {
        Self {
            a: Complex64::new(1.0, 0.0),
            b: Complex64::new(0.0, 0.0),
        }
    }

    pub fn new(a: Complex64, b: Complex64) -> Self {
        Self { a, b }
    }

    /// Group product `self * rhs`.
    pub fn mul(&self, rhs: &Su11Matrix) -> Su11Matrix {
        Su11Matrix {
            a: self.a * rhs.a + self.b * rhs.b.conj(),
            b: self.a * rhs.b + self.b * rhs.a.conj(),
        }
    }

    /// Closed-form inverse `[[conj(a), -b], [-conj(b), a]]` (determinant 1).
    pub fn inverse(&self) -> Su11Matrix {
        Su11Matrix {
            a: self.a.conj(),
            b: -self.b,
        }
    }

    /// `|a|^2 - |b|^2`.
    pub fn determinant(&self) -> f64 {
        self.a.norm_sqr() - self.b.norm_sqr()
    }

    /// `|det - 1| / |a|^2`.
    pub fn membership_defect(&self) -> f64 {
        (self.determinant() - 1.0).abs() / self.a.norm_sqr()
    }

    pub fn to_mat2(&self) -> Mat2 {
        Mat2([[self.a, self.b], [self.b.conj(), self.a.conj()]])
    }
}

/// A general complex 2x2 matrix, row major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Mat2(pub [[Complex64; 2]; 2]);

impl Mat2 {
    pub fn identity() -> Self {
        let one = Complex64::new(1.0, 0.0);
        let zero = Complex64::new(0.0, 0.0);
        Mat2([[one, zero], [zero, one]])
    }

    pub fn from_real(m: [[f64; 2]; 2]) -> Self {
        Mat2([
            [Complex64::new(m[0][0], 0.0), Complex64::new(m[0][1], 0.0)],
            [Complex64::new(m[1][0], 0.0), Complex64::new(m[1][1], 0.0)],
        ])
    }

    pub fn sub(&self, rhs: &Mat2) -> Mat2 {
        let mut out = self.0;
        for (row, rrow) in out.iter_mut().zip(rhs.0.iter()) {
            for (x, y) in row.iter_mut().zip(rrow.iter()) {
                *x -= *y;
            }
        }
        Mat2(out)
    }

    pub fn mul(&self, rhs: &Mat2) -> Mat2 {
        let a = &self.0;
        let b = &rhs.0;
        Mat2([
            [
                a[0][0] * b[0][0] + a[0][1] * b[1][0],
                a[0][0] * b[0][1] + a[0][1] * b[1][1],
            ],
            [
                a[1][0] * b[0][0] + a[1][1] * b[1][0],
                a[1][0] * b[0][1] + a[1][1] * b[1][1],
            ],
        ])
    }

    /// Spectral norm (largest singular value).
    ///
    /// With Gram matrix `G = M* M`, `sigma_max^2 = (g11 + g22)/2 + sqrt(((g11 - g22)/2)^2 + |g12|^2)`;
    /// the discriminant is a sum of squares, so no cancellation occurs.
    pub fn op_norm(&self) -> f64 {
        let [[a, b], [c, d]] = self.0;
        let g11 = a.norm_sqr() + c.norm_sqr();
        let g22 = b.norm_sqr() + d.norm_sqr();
        let g12 = a.conj() * b + c.conj() * d;
        let half_diff = 0.5 * (g11 - g22);
        let disc = half_diff.hypot(g12.norm());
        (0.5 * (g11 + g22) + disc).sqrt()
    }
}

/// A value of the metric `rho`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
pub struct MetricValue(f64);

impl MetricValue {
    pub fn value(self) -> f64 {
        self.0
    }
}

/// `rho(G1, G2) = log(1 + ||G1^{-1} G2 - I||_op)`.
pub fn rho(g1: &Su11Matrix, g2: &Su11Matrix) -> MetricValue {
    let quotient = g1.inverse().mul(g2);
    let dist = quotient.to_mat2().sub(&Mat2::identity()).op_norm();
    MetricValue(dist.ln_1p())
}

/// `log(1 + |a - 1| + |b|)`, the explicit form of `rho(I, G)`.
pub fn rho_from_identity_explicit(g: &Su11Matrix) -> f64 {
    ((g.a - 1.0).norm() + g.b.norm()).ln_1p()
}
