//! Seeded smooth random fields: band-limited noise under a Gaussian envelope.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::num_complex::Complex64;

use crate::grid::{l2_norm, Grid, ScalarField};

/// Real field whose spectrum is supported on `|k| <= k_max`, scaled to unit
/// max norm.
pub fn band_limited_noise<R: Rng>(grid: &Arc<Grid>, rng: &mut R, k_max: f64) -> ScalarField {
    let k2_max = k_max * k_max;
    let spectrum: Vec<Complex64> = (0..grid.len())
        .map(|i| {
            // draw for every mode so the stream does not depend on the band
            let re: f64 = rng.gen_range(-1.0..1.0);
            let im: f64 = rng.gen_range(-1.0..1.0);
            if grid.k_squared(i) <= k2_max {
                Complex64::new(re, im)
            } else {
                Complex64::default()
            }
        })
        .collect();
    let values = grid.values_from_spectrum(spectrum);
    let field = ScalarField::from_raw(grid, values);
    let peak = field.max_abs();
    if peak > 0.0 {
        field.scaled(1.0 / peak)
    } else {
        field
    }
}

/// Generator of the confined random test fields used by the invariant suite.
#[derive(Debug, Clone)]
pub struct FieldSampler {
    grid: Arc<Grid>,
    rng: ChaCha8Rng,
    k_max: f64,
    envelope_width: f64,
    /// Candidates with `‖u‖₂` below this are rejected and redrawn.
    pub min_l2: f64,
    rejections: usize,
}

impl FieldSampler {
    pub fn new(grid: &Arc<Grid>, seed: u64) -> Self {
        let n = grid.points_per_axis() as f64;
        let l = grid.half_length();
        Self {
            grid: Arc::clone(grid),
            rng: ChaCha8Rng::seed_from_u64(seed),
            k_max: n * std::f64::consts::PI / (2.0 * l),
            envelope_width: l / 4.0,
            min_l2: 1e-8,
            rejections: 0,
        }
    }

    pub fn rejections(&self) -> usize {
        self.rejections
    }

    /// One raw candidate: noise times envelope times a random amplitude in
    /// `[0, 2)`.
    fn candidate(&mut self) -> ScalarField {
        let noise = band_limited_noise(&self.grid, &mut self.rng, self.k_max);
        let amplitude: f64 = self.rng.gen_range(0.0..2.0);
        let w = self.envelope_width;
        let envelope = ScalarField::from_fn(&self.grid, |x, y, z| (-(x * x + y * y + z * z) / (2.0 * w * w)).exp());
        noise.zip_with(&envelope, |a, b| amplitude * a * b).expect("same grid")
    }

    /// Next accepted field; `accept` may veto candidates in addition to the
    /// norm floor.
    pub fn sample_with<A: Fn(&ScalarField) -> bool>(&mut self, accept: A) -> ScalarField {
        loop {
            let u = self.candidate();
            if l2_norm(&u) >= self.min_l2 && accept(&u) {
                return u;
            }
            self.rejections += 1;
        }
    }

    pub fn sample(&mut self) -> ScalarField {
        self.sample_with(|_| true)
    }

    pub fn rng(&mut self) -> &mut ChaCha8Rng {
        &mut self.rng
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::make_grid;

    #[test]
    fn deterministic_under_seed() {
        let g = make_grid(6.0, 16).unwrap();
        let a = FieldSampler::new(&g, 7).sample();
        let b = FieldSampler::new(&g, 7).sample();
        let c = FieldSampler::new(&g, 8).sample();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn noise_is_band_limited() {
        let g = make_grid(6.0, 16).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let k_max = 2.0;
        let u = band_limited_noise(&g, &mut rng, k_max);
        assert!((u.max_abs() - 1.0).abs() < 1e-15);
        let spectrum = g.to_spectrum(u.values());
        let total: f64 = spectrum.iter().map(|c| c.norm_sqr()).sum();
        let outside: f64 = spectrum
            .iter()
            .enumerate()
            .filter(|(i, _)| g.k_squared(*i) > k_max * k_max + 1e-9)
            .map(|(_, c)| c.norm_sqr())
            .sum();
        assert!(outside < 1e-24 * total);
    }

    #[test]
    fn rejected_candidates_are_counted() {
        let g = make_grid(6.0, 8).unwrap();
        let mut sampler = FieldSampler::new(&g, 0);
        let first = std::cell::Cell::new(true);
        let _ = sampler.sample_with(|_| !first.replace(false));
        assert_eq!(sampler.rejections(), 1);
    }
}
