//! The kicked rotator with absorbing boundary conditions: a non-unitary
//! quantum map, survival-probability decay, relaxation-time extraction,
//! the square-root window scaling scan, and complex-spectrum diagnostics.
//!
//! One map application is the closed split-step kick cycle followed by a
//! projection that zeroes every momentum level outside the absorption
//! window of `N` levels, `n in [-N/2, N/2)`. The simulation grid is
//! enlarged (`grid_factor * N`, rounded up to a power of two) so the kick
//! convolution never aliases back into the window.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::echo::WaveState;
use crate::kicked::{momentum_of, SplitStep};
use crate::linalg::{complex_eigenvalues, EigenError};
use crate::numeric::fit_line;

/// Survival probabilities below this are double-precision noise and are
/// dropped before log-domain analysis.
const SURVIVAL_FLOOR: f64 = 1e-280;

/// Local log-slope must come within this fraction of the tail slope to
/// count as the onset of pure exponential decay.
const ONSET_BAND: f64 = 0.2;

/// Onsets later than this fraction of the series mean the tail was never
/// established.
const LATEST_ONSET_FRACTION: f64 = 0.75;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum RotorError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("state grid {state} does not match the simulation grid {expected}")]
    GridMismatch { state: usize, expected: usize },
    #[error("only {resolved} of {total} window sizes produced a resolved relaxation time; need 3")]
    TooFewResolved { resolved: usize, total: usize },
    #[error("spectrum diagnostics are capped at window size 512, got {0}")]
    SpectrumTooLarge(u32),
    #[error("projected map produced |z| = {modulus} > 1")]
    SpectrumNotContractive { modulus: f64 },
    #[error(transparent)]
    Eigen(#[from] EigenError),
    #[error(transparent)]
    Echo(#[from] crate::echo::EchoError),
}

fn invalid(name: &'static str, reason: String) -> RotorError {
    RotorError::InvalidParameter { name, reason }
}

/// Parameters of the absorbing rotator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RotorParams {
    /// Absorption window size `N`: levels `n in [-N/2, N/2)` survive.
    n_window: u32,
    /// Kick strength.
    lambda: f64,
    /// Kick period.
    period: f64,
    /// Simulation grid is `grid_factor * N` rounded up to a power of two.
    grid_factor: u32,
}

impl RotorParams {
    pub fn new(n_window: u32, lambda: f64, period: f64, grid_factor: u32) -> Result<Self, RotorError> {
        if n_window < 8 || n_window % 2 != 0 {
            return Err(invalid(
                "N",
                format!("window size must be even and at least 8, got {n_window}"),
            ));
        }
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(invalid(
                "lambda",
                format!("kick strength must be nonnegative, got {lambda}"),
            ));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(invalid(
                "period",
                format!("kick period must be positive, got {period}"),
            ));
        }
        if grid_factor < 2 {
            return Err(invalid(
                "grid_factor",
                format!("simulation grid must be at least twice the window, got {grid_factor}"),
            ));
        }
        Ok(RotorParams {
            n_window,
            lambda,
            period,
            grid_factor,
        })
    }

    /// Fix the chaos parameter `lambda T` and the ratio `N / lambda`;
    /// the classical dynamics is then independent of `N`.
    pub fn from_scaling(
        n_window: u32,
        lambda_t: f64,
        ratio: f64,
        grid_factor: u32,
    ) -> Result<Self, RotorError> {
        if !ratio.is_finite() || ratio <= 0.0 {
            return Err(invalid("ratio", format!("must be positive, got {ratio}")));
        }
        if !lambda_t.is_finite() || lambda_t <= 0.0 {
            return Err(invalid(
                "lambdaT",
                format!("chaos parameter must be positive, got {lambda_t}"),
            ));
        }
        let lambda = n_window as f64 / ratio;
        RotorParams::new(n_window, lambda, lambda_t / lambda, grid_factor)
    }

    pub fn n_window(&self) -> u32 {
        self.n_window
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn grid_factor(&self) -> u32 {
        self.grid_factor
    }

    /// `lambda T`, the classical chaos parameter.
    pub fn chaos_parameter(&self) -> f64 {
        self.lambda * self.period
    }

    /// `N / lambda`.
    pub fn ratio(&self) -> f64 {
        self.n_window as f64 / self.lambda
    }

    pub fn n_grid(&self) -> usize {
        ((self.grid_factor as usize) * (self.n_window as usize)).next_power_of_two()
    }
}

/// Reusable propagator for one parameter set; owns the transform workspace.
pub struct RotorEngine {
    split: SplitStep,
    /// `true` for bins inside the absorption window.
    window: Vec<bool>,
    absorbing: bool,
    n_grid: usize,
}

impl RotorEngine {
    /// The absorbing map: kick cycle followed by the window projection.
    pub fn new(params: &RotorParams) -> Self {
        Self::build(params, true)
    }

    /// Diagnostic mode with the projection disabled (the closed map).
    pub fn closed(params: &RotorParams) -> Self {
        Self::build(params, false)
    }

    fn build(params: &RotorParams, absorbing: bool) -> Self {
        let n_grid = params.n_grid();
        let half = params.n_window as i64 / 2;
        let window = (0..n_grid)
            .map(|bin| {
                let n = momentum_of(n_grid, bin);
                n >= -half && n < half
            })
            .collect();
        RotorEngine {
            split: SplitStep::new(n_grid, params.lambda, params.period),
            window,
            absorbing,
            n_grid,
        }
    }

    /// Apply one map step in place.
    pub fn step(&mut self, state: &mut WaveState) -> Result<(), RotorError> {
        if state.n_grid() != self.n_grid {
            return Err(RotorError::GridMismatch {
                state: state.n_grid(),
                expected: self.n_grid,
            });
        }
        self.split.closed_step(state.amps_mut());
        if self.absorbing {
            for (amp, &keep) in state.amps_mut().iter_mut().zip(&self.window) {
                if !keep {
                    *amp = Complex64::new(0.0, 0.0);
                }
            }
        }
        Ok(())
    }
}

/// One application of the absorbing map to a state.
pub fn rotor_step(state: &WaveState, params: &RotorParams) -> Result<WaveState, RotorError> {
    let mut next = state.clone();
    RotorEngine::new(params).step(&mut next)?;
    Ok(next)
}

/// One application of the closed map (projection disabled, diagnostic).
pub fn rotor_step_closed(state: &WaveState, params: &RotorParams) -> Result<WaveState, RotorError> {
    let mut next = state.clone();
    RotorEngine::closed(params).step(&mut next)?;
    Ok(next)
}

/// Survival probability `P(t)` of the absorbing map, `t = 0..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalSeries {
    survival: Vec<f64>,
    pub params: RotorParams,
}

impl SurvivalSeries {
    /// Wrap an externally produced series; `P(0)` must be 1 and the series
    /// must be non-increasing within rounding.
    pub fn from_parts(survival: Vec<f64>, params: RotorParams) -> Result<Self, RotorError> {
        if survival.is_empty() || survival[0] != 1.0 {
            return Err(invalid("survival", "series must start at P(0) = 1".into()));
        }
        for t in 1..survival.len() {
            let p = survival[t];
            if !p.is_finite() || p < 0.0 || p > survival[t - 1] + 1e-12 {
                return Err(invalid(
                    "survival",
                    format!("P({t}) = {p} is not a monotone survival value"),
                ));
            }
        }
        Ok(SurvivalSeries { survival, params })
    }

    pub fn values(&self) -> &[f64] {
        &self.survival
    }

    pub fn t_max(&self) -> usize {
        self.survival.len() - 1
    }
}

/// Iterate the absorbing map from the `n = 0` momentum state and record
/// the squared norm after every step. Fully deterministic.
pub fn survival_series(params: &RotorParams, t_max: usize) -> Result<SurvivalSeries, RotorError> {
    if t_max < 1 {
        return Err(invalid("t_max", "need at least one step".into()));
    }
    let mut engine = RotorEngine::new(params);
    let mut state = WaveState::momentum_delta(params.n_grid(), 0)?;
    let mut survival = Vec::with_capacity(t_max + 1);
    survival.push(1.0);
    for _ in 1..=t_max {
        engine.step(&mut state)?;
        survival.push(state.norm_sqr());
    }
    SurvivalSeries::from_parts(survival, *params)
}

/// Why a relaxation time could not be extracted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Unresolved {
    /// Fewer than three slope windows fit into the series.
    TooShort,
    /// The tail does not decay (e.g. nothing ever reaches the boundary).
    NoDecayingTail,
    /// No window's local slope ever enters the tail-slope band.
    NoOnset,
    /// The onset lies in the last quarter of the series; the exponential
    /// tail is not established.
    TailNotEstablished,
}

impl std::fmt::Display for Unresolved {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let reason = match self {
            Unresolved::TooShort => "series too short for the sliding window",
            Unresolved::NoDecayingTail => "no decaying exponential tail",
            Unresolved::NoOnset => "local slope never reaches the tail slope",
            Unresolved::TailNotEstablished => "onset too late; tail not established",
        };
        write!(f, "{reason}")
    }
}

/// Result of the relaxation-time extraction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum RelaxationTime {
    Resolved(f64),
    Unresolved(Unresolved),
}

impl RelaxationTime {
    pub fn resolved(&self) -> Option<f64> {
        match self {
            RelaxationTime::Resolved(t) => Some(*t),
            RelaxationTime::Unresolved(_) => None,
        }
    }
}

/// Sliding-window width used by the extractor: `max(8, sqrt(N)/2)`.
pub fn slope_window(n_window: u32) -> usize {
    ((n_window as f64).sqrt() / 2.0).round().max(8.0) as usize
}

/// Extract the relaxation time: the earliest time at which the local
/// log-slope of `P(t)` comes within 20% of its asymptotic (tail) value,
/// i.e. the onset of pure exponential decay. Deterministic given the series.
pub fn relaxation_time(series: &SurvivalSeries) -> RelaxationTime {
    let window = slope_window(series.params.n_window());
    let log_p: Vec<f64> = series
        .values()
        .iter()
        .take_while(|&&p| p > SURVIVAL_FLOOR)
        .map(|&p| p.ln())
        .collect();
    let len = log_p.len();
    if len < 3 * window {
        return RelaxationTime::Unresolved(Unresolved::TooShort);
    }

    let slope_over = |start: usize, count: usize| -> f64 {
        let xs: Vec<f64> = (start..start + count).map(|t| t as f64).collect();
        fit_line(&xs, &log_p[start..start + count]).slope
    };

    let tail_len = (len / 4).max(window);
    let tail_slope = slope_over(len - tail_len, tail_len);
    if tail_slope >= -1e-9 {
        return RelaxationTime::Unresolved(Unresolved::NoDecayingTail);
    }

    let band = ONSET_BAND * tail_slope.abs();
    let onset = (0..len - window)
        .find(|&start| (slope_over(start, window) - tail_slope).abs() <= band);
    match onset {
        None => RelaxationTime::Unresolved(Unresolved::NoOnset),
        Some(start) if (start as f64) > LATEST_ONSET_FRACTION * len as f64 => {
            RelaxationTime::Unresolved(Unresolved::TailNotEstablished)
        }
        Some(start) => RelaxationTime::Resolved(start as f64 + window as f64 / 2.0),
    }
}

/// One window size of a scaling scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScanRow {
    pub n_window: u32,
    pub lambda: f64,
    pub period: f64,
    pub relax_time: Option<f64>,
}

/// Result of the relaxation-time scaling scan.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScalingScan {
    /// Fitted exponent of `T ~ N^exponent`.
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub rows: Vec<ScanRow>,
    pub warnings: Vec<String>,
}

/// Default number of map steps per run: `16 sqrt(N)`, capped at `10^5`.
pub fn default_t_max(n_window: u32) -> usize {
    ((16.0 * (n_window as f64).sqrt()).ceil() as usize).min(100_000)
}

/// Run the absorbing rotator at fixed `lambda T` and `N/lambda` over a list
/// of window sizes, extract each relaxation time, and fit the power law
/// `log T vs log N`.
pub fn relaxation_scaling_scan(
    n_list: &[u32],
    lambda_t: f64,
    ratio: f64,
    grid_factor: u32,
    t_max_mult: f64,
) -> Result<ScalingScan, RotorError> {
    let mut distinct = n_list.to_vec();
    distinct.sort_unstable();
    distinct.dedup();
    if distinct.len() < 4 {
        return Err(invalid(
            "N_list",
            format!("need at least 4 distinct window sizes, got {}", distinct.len()),
        ));
    }
    let smallest = *distinct.first().unwrap() as f64;
    let largest = *distinct.last().unwrap() as f64;
    if largest / smallest < 8.0 {
        return Err(invalid(
            "N_list",
            format!("window sizes must span at least a factor 8, got {smallest}..{largest}"),
        ));
    }
    if !t_max_mult.is_finite() || t_max_mult <= 0.0 {
        return Err(invalid("t_max_mult", "must be positive".into()));
    }

    let rows: Vec<(ScanRow, Option<String>)> = distinct
        .par_iter()
        .map(|&n| -> Result<(ScanRow, Option<String>), RotorError> {
            let params = RotorParams::from_scaling(n, lambda_t, ratio, grid_factor)?;
            let t_max = ((t_max_mult * (n as f64).sqrt()).ceil() as usize).min(100_000);
            let series = survival_series(&params, t_max)?;
            let (relax, warning) = match relaxation_time(&series) {
                RelaxationTime::Resolved(t) => (Some(t), None),
                RelaxationTime::Unresolved(reason) => {
                    (None, Some(format!("N = {n}: unresolved relaxation time ({reason})")))
                }
            };
            Ok((
                ScanRow {
                    n_window: n,
                    lambda: params.lambda(),
                    period: params.period(),
                    relax_time: relax,
                },
                warning,
            ))
        })
        .collect::<Result<_, _>>()?;

    let warnings: Vec<String> = rows.iter().filter_map(|(_, w)| w.clone()).collect();
    let rows: Vec<ScanRow> = rows.into_iter().map(|(row, _)| row).collect();
    let resolved: Vec<(f64, f64)> = rows
        .iter()
        .filter_map(|r| r.relax_time.map(|t| (r.n_window as f64, t)))
        .collect();
    if resolved.len() < 3 {
        return Err(RotorError::TooFewResolved {
            resolved: resolved.len(),
            total: rows.len(),
        });
    }
    let (exponent, stderr) = fit_power_law(&resolved);
    Ok(ScalingScan {
        exponent,
        exponent_stderr: stderr,
        rows,
        warnings,
    })
}

/// Least-squares exponent of `y ~ x^a` from positive samples.
pub fn fit_power_law(samples: &[(f64, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = samples.iter().map(|&(x, _)| x.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, y)| y.ln()).collect();
    let fit = fit_line(&xs, &ys);
    (fit.slope, fit.slope_stderr)
}

/// Complex spectrum of the projected one-step map, with ring statistics.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumRing {
    /// All window-subspace eigenvalues, sorted by descending modulus.
    pub eigenvalues: Vec<Complex64>,
    pub mean_modulus: f64,
    /// Ring area estimate `E_c = pi (r_hi^2 - r_lo^2)` from the 5th/95th
    /// modulus percentiles.
    pub ring_area: f64,
    /// Mean nearest-neighbour spacing in the complex plane.
    pub mean_spacing: f64,
}

/// Dense diagnostic eigen-solution of the window-restricted map,
/// `N <= 512`.
pub fn spectrum_ring(params: &RotorParams) -> Result<SpectrumRing, RotorError> {
    let n = params.n_window();
    if n > 512 {
        return Err(RotorError::SpectrumTooLarge(n));
    }
    let dim = n as usize;
    let n_grid = params.n_grid();
    let half = n as i64 / 2;
    let mut engine = RotorEngine::new(params);

    // column j: the map applied to the basis state with momentum -N/2 + j
    let mut matrix = vec![Complex64::new(0.0, 0.0); dim * dim];
    for j in 0..dim {
        let mut state = WaveState::momentum_delta(n_grid, -half + j as i64)?;
        engine.step(&mut state)?;
        for i in 0..dim {
            matrix[i * dim + j] = state.amplitude(-half + i as i64);
        }
    }

    let mut eigenvalues = complex_eigenvalues(dim, &matrix)?;
    for z in &eigenvalues {
        if z.norm() > 1.0 + 1e-9 {
            return Err(RotorError::SpectrumNotContractive { modulus: z.norm() });
        }
    }
    eigenvalues.sort_by(|a, b| b.norm().total_cmp(&a.norm()).then(a.arg().total_cmp(&b.arg())));

    let moduli: Vec<f64> = {
        let mut m: Vec<f64> = eigenvalues.iter().map(|z| z.norm()).collect();
        m.sort_by(f64::total_cmp);
        m
    };
    let quantile = |f: f64| moduli[((f * (dim - 1) as f64).round() as usize).min(dim - 1)];
    let (r_lo, r_hi) = (quantile(0.05), quantile(0.95));
    let mean_modulus = moduli.iter().sum::<f64>() / dim as f64;

    let mut spacing_sum = 0.0;
    for (i, a) in eigenvalues.iter().enumerate() {
        let nearest = eigenvalues
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(_, b)| (a - b).norm())
            .fold(f64::INFINITY, f64::min);
        spacing_sum += nearest;
    }

    Ok(SpectrumRing {
        eigenvalues,
        mean_modulus,
        ring_area: std::f64::consts::PI * (r_hi * r_hi - r_lo * r_lo),
        mean_spacing: spacing_sum / dim as f64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn casati_params(n: u32) -> RotorParams {
        RotorParams::from_scaling(n, 7.0, 4.0, 4).unwrap()
    }

    #[test]
    fn params_validate_and_derive() {
        assert!(RotorParams::new(7, 1.0, 1.0, 4).is_err());
        assert!(RotorParams::new(6, 1.0, 1.0, 4).is_err());
        assert!(RotorParams::new(64, 1.0, 1.0, 1).is_err());
        let p = casati_params(64);
        assert_relative_eq!(p.chaos_parameter(), 7.0, max_relative = 1e-12);
        assert_relative_eq!(p.ratio(), 4.0, max_relative = 1e-12);
        assert_eq!(p.n_grid(), 256);
        assert!(p.n_grid() >= 2 * p.n_window() as usize);
    }

    #[test]
    fn free_rotor_never_decays() {
        // lambda = 0 would be rejected by from_scaling; build directly
        let params = RotorParams::new(32, 0.0, 0.5, 4).unwrap();
        let series = survival_series(&params, 50).unwrap();
        for &p in series.values() {
            assert!((p - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn free_rotor_keeps_populations() {
        let params = RotorParams::new(32, 0.0, 0.5, 4).unwrap();
        let n_grid = params.n_grid();
        let mut amps = vec![Complex64::new(0.0, 0.0); n_grid];
        // a state supported well inside the window
        for (offset, weight) in [(0i64, 0.8f64), (3, 0.15), (-5, 0.05)] {
            amps[crate::kicked::bin_of(n_grid, offset)] = Complex64::new(weight.sqrt(), 0.0);
        }
        let state = WaveState::from_amplitudes(amps).unwrap();
        let next = rotor_step(&state, &params).unwrap();
        assert_relative_eq!(next.norm_sqr(), 1.0, epsilon = 1e-12);
        for n in [-5i64, 0, 3] {
            assert_relative_eq!(
                next.population(n),
                state.population(n),
                epsilon = 1e-12
            );
        }
    }

    #[test]
    fn closed_map_is_unitary() {
        let params = casati_params(64);
        let mut engine = RotorEngine::closed(&params);
        let mut state = WaveState::momentum_delta(params.n_grid(), 0).unwrap();
        for _ in 0..500 {
            engine.step(&mut state).unwrap();
        }
        assert!((state.norm_sqr() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn grid_mismatch_is_rejected() {
        let params = casati_params(64);
        let state = WaveState::momentum_delta(64, 0).unwrap();
        assert!(matches!(
            rotor_step(&state, &params),
            Err(RotorError::GridMismatch { .. })
        ));
    }

    #[test]
    fn one_step_loss_is_negligible_for_wide_windows() {
        // spreading after one kick is Bessel-like, |psi_n| = |J_n(lambda)|,
        // negligible beyond |n| of order lambda
        let params = casati_params(64);
        let state = WaveState::momentum_delta(params.n_grid(), 0).unwrap();
        let next = rotor_step(&state, &params).unwrap();
        let loss = 1.0 - next.norm_sqr();
        assert!(loss >= 0.0);
        assert!(loss < 1e-8, "one-step loss {loss}");
    }

    #[test]
    fn survival_is_monotone_and_eventually_strictly_decreasing() {
        let params = casati_params(256);
        let t_max = 4 * (256f64).sqrt() as usize;
        let series = survival_series(&params, t_max).unwrap();
        let p = series.values();
        for t in 1..p.len() {
            assert!(p[t] <= p[t - 1] + 1e-12);
        }
        for t in 9..p.len() {
            assert!(p[t] < p[t - 1], "tail not strictly decreasing at {t}");
        }
        assert!(p[t_max] < 0.9);
    }

    #[test]
    fn relaxation_time_of_pure_exponential_is_the_first_window() {
        let params = casati_params(64);
        let values: Vec<f64> = (0..=300).map(|t| (-(t as f64) / 50.0).exp()).collect();
        let series = SurvivalSeries::from_parts(values, params).unwrap();
        match relaxation_time(&series) {
            RelaxationTime::Resolved(t) => assert!(t <= slope_window(64) as f64),
            other => panic!("expected resolved, got {other:?}"),
        }
    }

    #[test]
    fn relaxation_time_finds_a_constructed_crossover() {
        let params = casati_params(64);
        let crossover = 100usize;
        let values: Vec<f64> = (0..=400)
            .map(|t| {
                if t < crossover {
                    1.0 / (1.0 + t as f64)
                } else {
                    1.0 / (1.0 + crossover as f64) * (-((t - crossover) as f64) / 30.0).exp()
                }
            })
            .collect();
        let series = SurvivalSeries::from_parts(values, params).unwrap();
        let t = relaxation_time(&series).resolved().expect("resolved");
        let w = slope_window(64) as f64;
        assert!(
            (t - crossover as f64).abs() <= w + 1.0,
            "T = {t} vs crossover {crossover} (window {w})"
        );
    }

    #[test]
    fn flat_series_is_unresolved() {
        let params = casati_params(64);
        let series = SurvivalSeries::from_parts(vec![1.0; 200], params).unwrap();
        assert_eq!(
            relaxation_time(&series),
            RelaxationTime::Unresolved(Unresolved::NoDecayingTail)
        );
        let short = SurvivalSeries::from_parts(vec![1.0; 10], params).unwrap();
        assert_eq!(
            relaxation_time(&short),
            RelaxationTime::Unresolved(Unresolved::TooShort)
        );
    }

    #[test]
    fn survival_series_validates_monotonicity() {
        let params = casati_params(64);
        assert!(SurvivalSeries::from_parts(vec![1.0, 0.5, 0.6], params).is_err());
        assert!(SurvivalSeries::from_parts(vec![0.9, 0.5], params).is_err());
    }

    #[test]
    fn injected_square_root_scaling_fits_exactly() {
        let samples: Vec<(f64, f64)> = [64u32, 128, 256, 512, 1024]
            .iter()
            .map(|&n| (n as f64, 3.0 * (n as f64).sqrt()))
            .collect();
        let (exponent, stderr) = fit_power_law(&samples);
        assert_relative_eq!(exponent, 0.5, max_relative = 1e-12);
        assert!(stderr < 1e-12);
    }

    #[test]
    fn scan_rejects_narrow_spans() {
        assert!(relaxation_scaling_scan(&[64, 128, 256, 448], 7.0, 4.0, 4, 16.0).is_err());
        assert!(relaxation_scaling_scan(&[64, 128, 512], 7.0, 4.0, 4, 16.0).is_err());
    }

    #[test]
    fn free_projected_map_spectrum_is_unimodular() {
        let params = RotorParams::new(16, 0.0, 0.5, 4).unwrap();
        let ring = spectrum_ring(&params).unwrap();
        assert_eq!(ring.eigenvalues.len(), 16);
        // eigenvalues of the free projected map: exp(-i T n^2 / 2)
        let mut expected: Vec<Complex64> = (-8i64..8)
            .map(|n| Complex64::from_polar(1.0, -0.5 * 0.5 * (n * n) as f64))
            .collect();
        for z in &ring.eigenvalues {
            assert!((z.norm() - 1.0).abs() < 1e-10);
            let (idx, dist) = expected
                .iter()
                .enumerate()
                .map(|(i, e)| (i, (e - z).norm()))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            assert!(dist < 1e-9, "eigenvalue {z} off by {dist}");
            expected.swap_remove(idx);
        }
    }

    #[test]
    fn kicked_spectrum_is_contractive() {
        let params = casati_params(64);
        let ring = spectrum_ring(&params).unwrap();
        assert_eq!(ring.eigenvalues.len(), 64);
        for z in &ring.eigenvalues {
            assert!(z.norm() <= 1.0 + 1e-9);
        }
        assert!(ring.mean_modulus < 1.0);
        assert!(ring.ring_area > 0.0);
        assert!(ring.mean_spacing > 0.0);
    }
}
