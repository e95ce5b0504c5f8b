//! Fourier differentiation on the uniform periodic grid of `[0, 2π)ⁿ`.

use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform grid with `m` nodes per axis, stored row-major (last axis fastest).
pub struct PeriodicGrid {
    n: usize,
    m: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n)
            .field("m", &self.m)
            .finish()
    }
}

impl PeriodicGrid {
    pub fn new(n: usize, m: usize) -> Result<PeriodicGrid> {
        if !(1..=3).contains(&n) {
            return Err(Error::InvalidParameter(format!(
                "periodic grids support n in 1..=3, got {n}"
            )));
        }
        if m < 4 || !m.is_power_of_two() {
            return Err(Error::InvalidParameter(format!(
                "nodes per axis must be a power of two ≥ 4, got {m}"
            )));
        }
        let mut planner = FftPlanner::new();
        Ok(PeriodicGrid {
            n,
            m,
            forward: planner.plan_fft_forward(m),
            inverse: planner.plan_fft_inverse(m),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nodes_per_axis(&self) -> usize {
        self.m
    }

    pub fn len(&self) -> usize {
        self.m.pow(self.n as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.m as f64
    }

    /// Per-axis indices of a flat index.
    pub fn index(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.n];
        for slot in idx.iter_mut().rev() {
            *slot = flat % self.m;
            flat /= self.m;
        }
        idx
    }

    pub fn coords(&self, flat: usize) -> Vec<f64> {
        let h = self.spacing();
        self.index(flat).into_iter().map(|i| i as f64 * h).collect()
    }

    /// Signed wavenumber of a per-axis index; the Nyquist index maps to `m/2`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        if i <= self.m / 2 {
            i as i64
        } else {
            i as i64 - self.m as i64
        }
    }

    fn is_nyquist(&self, i: usize) -> bool {
        i == self.m / 2
    }

    /// `max_d |k_d|` of a flat index.
    pub fn max_wavenumber(&self, flat: usize) -> i64 {
        self.index(flat)
            .into_iter()
            .map(|i| self.wavenumber(i).abs())
            .max()
            .unwrap_or(0)
    }

    /// `|k|²` of a flat index.
    pub fn wavenumber_sq(&self, flat: usize) -> f64 {
        self.index(flat)
            .into_iter()
            .map(|i| (self.wavenumber(i) as f64).powi(2))
            .sum()
    }

    fn transform(&self, data: &mut [Complex64], fft: &Arc<dyn Fft<f64>>) {
        let m = self.m;
        let mut line = vec![Complex64::new(0.0, 0.0); m];
        for axis in 0..self.n {
            let stride = m.pow((self.n - 1 - axis) as u32);
            let block = stride * m;
            for start in 0..data.len() / m {
                let (outer, inner) = (start / stride, start % stride);
                let base = outer * block + inner;
                for (k, v) in line.iter_mut().enumerate() {
                    *v = data[base + k * stride];
                }
                fft.process(&mut line);
                for (k, v) in line.iter().enumerate() {
                    data[base + k * stride] = *v;
                }
            }
        }
    }

    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        let mut data: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.transform(&mut data, &self.forward);
        data
    }

    /// Inverse transform, normalized, returning real parts.
    pub fn inverse(&self, mut hat: Vec<Complex64>) -> Vec<f64> {
        self.transform(&mut hat, &self.inverse);
        let scale = 1.0 / self.len() as f64;
        hat.into_iter().map(|c| c.re * scale).collect()
    }

    /// Grid values of `∂^α f` from `f̂`; Nyquist modes are dropped.
    pub fn derivative(&self, hat: &[Complex64], alpha: &[usize]) -> Vec<f64> {
        let out: Vec<Complex64> = hat
            .iter()
            .enumerate()
            .map(|(flat, &c)| {
                let idx = self.index(flat);
                let mut factor = Complex64::new(1.0, 0.0);
                for (d, &a) in alpha.iter().enumerate() {
                    if a == 0 {
                        continue;
                    }
                    if self.is_nyquist(idx[d]) {
                        return Complex64::new(0.0, 0.0);
                    }
                    let k = self.wavenumber(idx[d]) as f64;
                    factor *= Complex64::new(0.0, k).powu(a as u32);
                }
                c * factor
            })
            .collect();
        self.inverse(out)
    }

    /// `‖f̂ restricted to max|k_d| > cutoff‖ / ‖f̂‖` (zero for `f ≡ 0`).
    pub fn tail_fraction(&self, hat: &[Complex64], cutoff: f64) -> f64 {
        let mut tail = 0.0;
        let mut total = 0.0;
        for (flat, c) in hat.iter().enumerate() {
            let e = c.norm_sqr();
            total += e;
            if self.max_wavenumber(flat) as f64 > cutoff {
                tail += e;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            (tail / total).sqrt()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_and_derivative() {
        let g = PeriodicGrid::new(2, 16).unwrap();
        let f: Vec<f64> = (0..g.len())
            .map(|i| {
                let x = g.coords(i);
                (2.0 * x[0]).sin() * x[1].cos()
            })
            .collect();
        let hat = g.forward(&f);
        let back = g.inverse(hat.clone());
        for (a, b) in f.iter().zip(&back) {
            assert!((a - b).abs() < 1e-13);
        }
        let d = g.derivative(&hat, &[3, 1]);
        for (i, v) in d.iter().enumerate() {
            let x = g.coords(i);
            let want = 8.0 * (2.0 * x[0]).cos() * x[1].sin();
            assert!((v - want).abs() < 1e-11);
        }
    }

    #[test]
    fn tail_of_low_mode_is_zero() {
        let g = PeriodicGrid::new(1, 32).unwrap();
        let f: Vec<f64> = (0..32).map(|i| g.coords(i)[0].sin()).collect();
        assert!(g.tail_fraction(&g.forward(&f), 32.0 / 3.0) < 1e-14);
        let h: Vec<f64> = (0..32).map(|i| (15.0 * g.coords(i)[0]).sin()).collect();
        assert!(g.tail_fraction(&g.forward(&h), 32.0 / 3.0) > 0.99);
    }

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::new(2, 12).is_err());
        assert!(PeriodicGrid::new(4, 16).is_err());
    }
}
