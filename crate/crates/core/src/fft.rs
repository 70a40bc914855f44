//! Cubic 3D complex transforms built from 1D `rustfft` plans.
//!
//! Data is stored row-major with the last axis contiguous:
//! `index = (i0 * n + i1) * n + i2`.

use std::fmt;
use std::sync::Arc;

use rayon::prelude::*;
use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Lines handed to one rayon task.
const LINES_PER_TASK: usize = 64;

#[derive(Clone)]
pub struct Fft3 {
    n: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl fmt::Debug for Fft3 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Fft3").field("n", &self.n).finish()
    }
}

impl Fft3 {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    pub fn len(&self) -> usize {
        self.n * self.n * self.n
    }

    /// Unnormalized forward transform.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.apply(data, &self.forward);
    }

    /// Inverse transform including the `1/n³` normalization.
    pub fn inverse(&self, data: &mut [Complex64]) {
        self.apply(data, &self.inverse);
        let norm = 1.0 / self.len() as f64;
        data.par_iter_mut().for_each(|c| *c *= norm);
    }

    fn apply(&self, data: &mut [Complex64], plan: &Arc<dyn Fft<f64>>) {
        let n = self.n;
        assert_eq!(data.len(), self.len(), "buffer length must be n^3");
        run_lines(data, n, plan);

        let mut work = vec![Complex64::default(); data.len()];
        // axis 1: lines indexed by (i0, i2)
        gather(data, &mut work, n, |i0, i2, k| (i0 * n + k) * n + i2);
        run_lines(&mut work, n, plan);
        scatter(&work, data, n, |i0, i2, k| (i0 * n + k) * n + i2);
        // axis 0: lines indexed by (i1, i2)
        gather(data, &mut work, n, |i1, i2, k| (k * n + i1) * n + i2);
        run_lines(&mut work, n, plan);
        scatter(&work, data, n, |i1, i2, k| (k * n + i1) * n + i2);
    }
}

fn run_lines(buf: &mut [Complex64], n: usize, plan: &Arc<dyn Fft<f64>>) {
    buf.par_chunks_mut(n * LINES_PER_TASK).for_each(|chunk| {
        plan.process(chunk);
    });
}

fn gather<F>(src: &[Complex64], dst: &mut [Complex64], n: usize, index: F)
where
    F: Fn(usize, usize, usize) -> usize + Sync,
{
    dst.par_chunks_mut(n).enumerate().for_each(|(line, out)| {
        let (a, b) = (line / n, line % n);
        for (k, v) in out.iter_mut().enumerate() {
            *v = src[index(a, b, k)];
        }
    });
}

fn scatter<F>(src: &[Complex64], dst: &mut [Complex64], n: usize, index: F)
where
    F: Fn(usize, usize, usize) -> usize + Sync,
{
    // Each destination element is written by exactly one line; do it serially
    // per outer index to keep the borrow checker happy without unsafe.
    for (line, input) in src.chunks(n).enumerate() {
        let (a, b) = (line / n, line % n);
        for (k, v) in input.iter().enumerate() {
            dst[index(a, b, k)] = *v;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive_dft3(data: &[Complex64], n: usize) -> Vec<Complex64> {
        let mut out = vec![Complex64::default(); data.len()];
        let w = -2.0 * std::f64::consts::PI / n as f64;
        for k0 in 0..n {
            for k1 in 0..n {
                for k2 in 0..n {
                    let mut acc = Complex64::default();
                    for j0 in 0..n {
                        for j1 in 0..n {
                            for j2 in 0..n {
                                let phase = w * ((k0 * j0 + k1 * j1 + k2 * j2) % n) as f64;
                                acc += data[(j0 * n + j1) * n + j2] * Complex64::from_polar(1.0, phase);
                            }
                        }
                    }
                    out[(k0 * n + k1) * n + k2] = acc;
                }
            }
        }
        out
    }

    #[test]
    fn matches_naive_dft() {
        let n = 4;
        let data: Vec<Complex64> = (0..n * n * n)
            .map(|i| Complex64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()))
            .collect();
        let expected = naive_dft3(&data, n);
        let mut got = data.clone();
        Fft3::new(n).forward(&mut got);
        for (a, b) in got.iter().zip(&expected) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn round_trip() {
        let n = 8;
        let fft = Fft3::new(n);
        let data: Vec<Complex64> = (0..fft.len()).map(|i| Complex64::new((i as f64).sqrt(), 0.0)).collect();
        let mut work = data.clone();
        fft.forward(&mut work);
        fft.inverse(&mut work);
        for (a, b) in work.iter().zip(&data) {
            assert!((a - b).norm() < 1e-12);
        }
    }
}
