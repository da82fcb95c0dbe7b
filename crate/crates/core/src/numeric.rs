//! Small numerical helpers: compensated summation and accurate phases.

use num_complex::Complex64;
use std::f64::consts::TAU;

/// Neumaier-compensated sum, reduced in iteration order.
pub fn compensated_sum<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut sum = 0.0_f64;
    let mut comp = 0.0_f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Fractional part of `n * t` in `[-1/2, 1/2]`, computed with the
/// product's rounding error recovered by an FMA so that large frequencies
/// keep full phase accuracy.
pub fn phase_turns(n: i64, t: f64) -> f64 {
    let nf = n as f64;
    let hi = nf * t;
    let lo = nf.mul_add(t, -hi);
    // |n| >= 2^53 loses exactness in `nf`; frequencies here stay far below.
    let frac = hi - hi.round();
    let x = frac + lo;
    x - x.round()
}

/// `exp(2 pi i x)` for `x` measured in turns.
pub fn cis_turns(x: f64) -> Complex64 {
    let (s, c) = (TAU * x).sin_cos();
    Complex64::new(c, s)
}

/// `exp(2 pi i n t)`.
pub fn character(n: i64, t: f64) -> Complex64 {
    cis_turns(phase_turns(n, t))
}

/// `|lhs - rhs| / |rhs|`, with `0` when both agree exactly (including 0 = 0).
pub fn relative_residual(lhs: f64, rhs: f64) -> f64 {
    if lhs == rhs {
        0.0
    } else {
        (lhs - rhs).abs() / rhs.abs()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let mut v = vec![1.0e16];
        v.extend(std::iter::repeat(1.0).take(1000));
        v.push(-1.0e16);
        assert_eq!(compensated_sum(v), 1000.0);
    }

    #[test]
    fn phase_of_large_frequency() {
        let n = 3_i64.pow(19);
        let t = 0.123_456_789;
        let exact = {
            // t = k / 2^56 exactly, so n * t is exact in integer arithmetic
            let scale = 2f64.powi(56);
            let k = (t * scale) as i128;
            let prod = (n as i128) * k;
            let frac = prod.rem_euclid(1_i128 << 56) as f64 / scale;
            if frac > 0.5 {
                frac - 1.0
            } else {
                frac
            }
        };
        assert!((phase_turns(n, t) - exact).abs() < 1e-15);
    }

    #[test]
    fn residual_conventions() {
        assert_eq!(relative_residual(0.0, 0.0), 0.0);
        assert_eq!(relative_residual(2.0, 2.0), 0.0);
        assert!((relative_residual(1.5, 1.0) - 0.5).abs() < 1e-15);
    }
}
