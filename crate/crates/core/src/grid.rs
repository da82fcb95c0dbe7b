//! Uniform grids on the torus and trapezoid averages over them.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::compensated_sum;

/// The points `t_k = k / size`, `k = 0..size`, with equal weights `1 / size`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct TorusGrid {
    size: usize,
}

impl TorusGrid {
    pub fn new(size: usize) -> Result<Self> {
        if size == 0 {
            return Err(Error::InvalidInput("grid size must be positive".into()));
        }
        Ok(Self { size })
    }

    /// Smallest grid allowed for functions built from frequencies up to
    /// `max_frequency` in absolute value: `4 * max_frequency + 4`.
    pub fn minimal_for(max_frequency: u64) -> Self {
        Self {
            size: Self::required_size(max_frequency),
        }
    }

    pub fn required_size(max_frequency: u64) -> usize {
        4 * max_frequency as usize + 4
    }

    /// Fails with `GridTooCoarse` unless `size >= 4 * max_frequency + 4`.
    pub fn ensure_resolves(&self, max_frequency: u64) -> Result<()> {
        let required = Self::required_size(max_frequency);
        if self.size < required {
            return Err(Error::GridTooCoarse {
                points: self.size,
                required,
            });
        }
        Ok(())
    }

    /// Smallest grid with at least `points` points whose size factors into
    /// 2, 3 and 5, where the FFT is fastest.
    pub fn smooth_at_least(points: usize) -> Result<Self> {
        let mut n = points.max(1);
        loop {
            let mut r = n;
            for f in [2, 3, 5] {
                while r % f == 0 {
                    r /= f;
                }
            }
            if r == 1 {
                return Self::new(n);
            }
            n = n.checked_add(1).ok_or(Error::Overflow)?;
        }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    pub fn point(&self, k: usize) -> f64 {
        k as f64 / self.size as f64
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.size).map(move |k| self.point(k))
    }

    /// Trapezoid average `(1/size) * sum f(t_k)` in index order.
    pub fn mean(&self, samples: &[f64]) -> f64 {
        debug_assert_eq!(samples.len(), self.size);
        compensated_sum(samples.iter().copied()) / self.size as f64
    }

    /// Values `sum_n c_n exp(2 pi i n k / size)` for all `k`, from a list of
    /// `(frequency, coefficient)` terms, via one inverse FFT. Exact for any
    /// grid size since `exp(2 pi i n k / G)` depends only on `n mod G`.
    pub fn synthesize(&self, terms: &[(i64, Complex64)]) -> Vec<Complex64> {
        let g = self.size;
        let mut buf = vec![Complex64::new(0.0, 0.0); g];
        for &(n, c) in terms {
            buf[n.rem_euclid(g as i64) as usize] += c;
        }
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_inverse(g).process(&mut buf);
        buf
    }

    /// Forward transform of real samples: `sum_k x_k exp(-2 pi i n k / size)` for `n = 0..size`.
    pub fn analyze(&self, samples: &[f64]) -> Vec<Complex64> {
        let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        let mut planner = FftPlanner::<f64>::new();
        planner.plan_fft_forward(self.size).process(&mut buf);
        buf
    }
}

/// `L^p` functional of nonnegative samples on a grid: the norm for
/// `p >= 1`, its `p`-th power for `0 < p < 1`.
pub fn lp_functional(grid: &TorusGrid, samples: &[f64], p: f64) -> f64 {
    let powered: Vec<f64> = samples.iter().map(|&x| x.powf(p)).collect();
    let mean = grid.mean(&powered);
    if p >= 1.0 {
        mean.powf(1.0 / p)
    } else {
        mean
    }
}
