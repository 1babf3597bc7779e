//! Split-step propagation for periodically kicked quantum maps on a
//! periodic momentum grid.
//!
//! States live on `n_grid` momentum levels `n` in `[-n_grid/2, n_grid/2)`,
//! stored in FFT bin order (`bin = n mod n_grid`). One closed kick cycle is
//!
//! ```text
//! exp(-i T n^2/4)  ->  angle rep  ->  exp(-i lambda cos theta)  ->  momentum rep  ->  exp(-i T n^2/4)
//! ```
//!
//! with unitary discrete Fourier transforms between the representations.

use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

pub(crate) struct SplitStep {
    n_grid: usize,
    to_angle_fft: Arc<dyn Fft<f64>>,
    to_momentum_fft: Arc<dyn Fft<f64>>,
    half_kinetic: Vec<Complex64>,
    kick: Vec<Complex64>,
    scratch: Vec<Complex64>,
}

/// Momentum quantum number of an FFT bin: `bin` for `bin < n_grid/2`,
/// `bin - n_grid` otherwise.
pub(crate) fn momentum_of(n_grid: usize, bin: usize) -> i64 {
    if bin < n_grid / 2 {
        bin as i64
    } else {
        bin as i64 - n_grid as i64
    }
}

/// FFT bin holding momentum `n` (must lie in `[-n_grid/2, n_grid/2)`).
pub(crate) fn bin_of(n_grid: usize, n: i64) -> usize {
    debug_assert!(n >= -(n_grid as i64) / 2 && n < n_grid as i64 / 2);
    n.rem_euclid(n_grid as i64) as usize
}

/// Diagonal phase `exp(-i f(n))` over the momentum grid.
pub(crate) fn momentum_phase(n_grid: usize, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    (0..n_grid)
        .map(|bin| {
            let n = momentum_of(n_grid, bin) as f64;
            Complex64::from_polar(1.0, -f(n))
        })
        .collect()
}

/// Diagonal phase `exp(-i f(theta))` over the angle grid
/// `theta_j = 2 pi j / n_grid`.
pub(crate) fn angle_phase(n_grid: usize, f: impl Fn(f64) -> f64) -> Vec<Complex64> {
    (0..n_grid)
        .map(|j| {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / n_grid as f64;
            Complex64::from_polar(1.0, -f(theta))
        })
        .collect()
}

pub(crate) fn apply_phase(amps: &mut [Complex64], phase: &[Complex64]) {
    for (a, p) in amps.iter_mut().zip(phase) {
        *a *= p;
    }
}

impl SplitStep {
    pub fn new(n_grid: usize, lambda: f64, period: f64) -> Self {
        let mut planner = FftPlanner::new();
        let to_angle_fft = planner.plan_fft_inverse(n_grid);
        let to_momentum_fft = planner.plan_fft_forward(n_grid);
        let scratch_len = to_angle_fft
            .get_inplace_scratch_len()
            .max(to_momentum_fft.get_inplace_scratch_len());
        SplitStep {
            n_grid,
            half_kinetic: momentum_phase(n_grid, |n| 0.25 * period * n * n),
            kick: angle_phase(n_grid, |theta| lambda * theta.cos()),
            to_angle_fft,
            to_momentum_fft,
            scratch: vec![Complex64::new(0.0, 0.0); scratch_len],
        }
    }

    pub fn n_grid(&self) -> usize {
        self.n_grid
    }

    /// Momentum -> angle: `psi(theta_j) = sum_n psi_n e^(i n theta_j)`.
    pub fn to_angle(&mut self, amps: &mut [Complex64]) {
        self.to_angle_fft.process_with_scratch(amps, &mut self.scratch);
    }

    /// Angle -> momentum, normalised so the round trip is the identity.
    pub fn to_momentum(&mut self, amps: &mut [Complex64]) {
        self.to_momentum_fft
            .process_with_scratch(amps, &mut self.scratch);
        let scale = 1.0 / self.n_grid as f64;
        for a in amps.iter_mut() {
            *a *= scale;
        }
    }

    /// One closed (unitary) kick cycle on a momentum-representation state.
    pub fn closed_step(&mut self, amps: &mut [Complex64]) {
        apply_phase(amps, &self.half_kinetic);
        self.to_angle(amps);
        apply_phase(amps, &self.kick);
        self.to_momentum(amps);
        apply_phase(amps, &self.half_kinetic);
    }

    /// Apply a diagonal angle-representation phase to a momentum state.
    pub fn apply_angle_diagonal(&mut self, amps: &mut [Complex64], phase: &[Complex64]) {
        self.to_angle(amps);
        apply_phase(amps, phase);
        self.to_momentum(amps);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn norm_sqr(amps: &[Complex64]) -> f64 {
        amps.iter().map(|a| a.norm_sqr()).sum()
    }

    #[test]
    fn momentum_bin_mapping_round_trips() {
        let n_grid = 16;
        for n in -8..8 {
            assert_eq!(momentum_of(n_grid, bin_of(n_grid, n)), n);
        }
    }

    #[test]
    fn transforms_are_unitary() {
        let n_grid = 64;
        let mut engine = SplitStep::new(n_grid, 3.0, 0.7);
        let mut amps: Vec<Complex64> = (0..n_grid)
            .map(|i| Complex64::new((i as f64 * 0.13).sin(), (i as f64 * 0.29).cos()))
            .collect();
        let scale = norm_sqr(&amps).sqrt();
        for a in amps.iter_mut() {
            *a /= scale;
        }
        let before = amps.clone();
        engine.to_angle(&mut amps);
        engine.to_momentum(&mut amps);
        for (a, b) in amps.iter().zip(&before) {
            assert!((a - b).norm() < 1e-12);
        }
        engine.closed_step(&mut amps);
        assert!((norm_sqr(&amps) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kick_spreads_a_momentum_eigenstate_like_bessel() {
        // one kick on the n = 0 state gives |psi_n| = |J_n(lambda)|; check
        // the first few against fixed Bessel values for lambda = 2
        let n_grid = 64;
        let mut engine = SplitStep::new(n_grid, 2.0, 0.5);
        let mut amps = vec![Complex64::new(0.0, 0.0); n_grid];
        amps[bin_of(n_grid, 0)] = Complex64::new(1.0, 0.0);
        engine.closed_step(&mut amps);
        let expected = [
            (0i64, 0.22389077914123567),  // J_0(2)
            (1, 0.5767248077568734),      // J_1(2)
            (2, 0.3528340286156377),      // J_2(2)
            (3, 0.12894324947440206),     // J_3(2)
        ];
        for (n, jn) in expected {
            assert!(
                (amps[bin_of(n_grid, n)].norm() - jn).abs() < 1e-12,
                "|psi_{n}| vs |J_{n}(2)|"
            );
            assert!((amps[bin_of(n_grid, -n)].norm() - jn).abs() < 1e-12);
        }
    }
}
