//! Loschmidt-echo simulation for the closed kicked rotator, the
//! q-generalised m-point correlation model, and q-exponential decay
//! fitting with regime classification.
//!
//! The echo `M(t) = |<psi0| U'^-t U^t |psi0>|^2` is computed by direct
//! state evolution: one state is propagated with the base map `U`, the
//! other with the perturbed map `U' = U exp(-i B delta)` (effective
//! Planck constant 1), and the overlap is taken at every step. The
//! overlap is normalised by the state norms, which are unity for closed
//! evolution up to rounding; a drift beyond 1e-9 aborts the run.

use num_complex::Complex64;
use thiserror::Error;

use crate::kicked::{self, SplitStep};
use crate::numeric::{fit_line, golden_min};
use crate::qmath::{q_exp, q_log, q_prod, EntropicIndex, QmathError};

/// Echo points below this floor are dominated by double-precision overlap
/// noise and are excluded from decay fits.
pub const FIT_FLOOR: f64 = 1e-12;

/// Norm-squared drift that aborts an echo run.
pub const NORM_DRIFT_LIMIT: f64 = 1e-9;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EchoError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("state norm drifted to {norm_sqr} at step {step}; the base map is not unitary on this grid")]
    NormDrift { step: usize, norm_sqr: f64 },
    #[error("q-product cutoff in correlation term {term}")]
    TermCutoff { term: usize },
    #[error(transparent)]
    Qmath(#[from] QmathError),
}

fn invalid(name: &'static str, reason: String) -> EchoError {
    EchoError::InvalidParameter { name, reason }
}

/// A complex amplitude vector over the truncated momentum basis
/// `n in [-n_grid/2, n_grid/2)`, stored in FFT bin order.
///
/// The squared norm never exceeds `1 + 1e-12`; it is exactly 1 for closed
/// evolution and may shrink under absorption.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveState {
    amps: Vec<Complex64>,
}

impl WaveState {
    /// The state with unit amplitude on momentum level `n0`.
    pub fn momentum_delta(n_grid: usize, n0: i64) -> Result<Self, EchoError> {
        check_grid(n_grid)?;
        let half = n_grid as i64 / 2;
        if n0 < -half || n0 >= half {
            return Err(invalid(
                "n0",
                format!("momentum {n0} outside the grid [-{half}, {half})"),
            ));
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); n_grid];
        amps[kicked::bin_of(n_grid, n0)] = Complex64::new(1.0, 0.0);
        Ok(WaveState { amps })
    }

    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self, EchoError> {
        check_grid(amps.len())?;
        let state = WaveState { amps };
        if state.norm_sqr() > 1.0 + 1e-12 {
            return Err(invalid(
                "amplitudes",
                format!("squared norm {} exceeds 1", state.norm_sqr()),
            ));
        }
        Ok(state)
    }

    pub fn n_grid(&self) -> usize {
        self.amps.len()
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum()
    }

    /// Amplitude on momentum level `n`.
    pub fn amplitude(&self, n: i64) -> Complex64 {
        self.amps[kicked::bin_of(self.n_grid(), n)]
    }

    /// Population `|psi_n|^2` of momentum level `n`.
    pub fn population(&self, n: i64) -> f64 {
        self.amplitude(n).norm_sqr()
    }

    pub(crate) fn amps(&self) -> &[Complex64] {
        &self.amps
    }

    pub(crate) fn amps_mut(&mut self) -> &mut [Complex64] {
        &mut self.amps
    }

    pub(crate) fn overlap(&self, other: &Self) -> Complex64 {
        self.amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum()
    }
}

fn check_grid(n_grid: usize) -> Result<(), EchoError> {
    if n_grid < 2 || !n_grid.is_power_of_two() {
        return Err(invalid(
            "n_grid",
            format!("grid size must be a power of two >= 2, got {n_grid}"),
        ));
    }
    Ok(())
}

/// The closed (unitary) kicked rotator: kinetic phases `exp(-i T n^2/4)`
/// around a kick `exp(-i lambda cos theta)` on an `n_grid` momentum grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KickedRotor {
    pub n_grid: usize,
    pub lambda: f64,
    pub period: f64,
}

impl KickedRotor {
    pub fn new(n_grid: usize, lambda: f64, period: f64) -> Result<Self, EchoError> {
        check_grid(n_grid)?;
        if !lambda.is_finite() || lambda < 0.0 {
            return Err(invalid(
                "lambda",
                format!("kick strength must be nonnegative and finite, got {lambda}"),
            ));
        }
        if !period.is_finite() || period <= 0.0 {
            return Err(invalid(
                "period",
                format!("kick period must be positive and finite, got {period}"),
            ));
        }
        Ok(KickedRotor {
            n_grid,
            lambda,
            period,
        })
    }

    pub fn chaos_parameter(&self) -> f64 {
        self.lambda * self.period
    }
}

/// Self-adjoint perturbation operator `B`, diagonal in one representation.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Perturbation {
    /// `B = cos theta`, a global potential shift: the conventional choice
    /// for kicked systems.
    CosTheta,
    /// `B = n^2 / 2`, a kick-period perturbation diagonal in momentum.
    KineticHalfN2,
}

impl Perturbation {
    pub fn name(&self) -> &'static str {
        match self {
            Perturbation::CosTheta => "cos-theta",
            Perturbation::KineticHalfN2 => "half-n2",
        }
    }
}

/// A fidelity time series `M(t)`, `t = 0..=t_max`.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoSeries {
    fidelity: Vec<f64>,
    pub delta: f64,
    pub system: String,
}

impl EchoSeries {
    /// Wrap an externally produced series; `M(0)` must be exactly 1 and all
    /// points must lie in `[0, 1 + 1e-12]`.
    pub fn from_parts(fidelity: Vec<f64>, delta: f64, system: String) -> Result<Self, EchoError> {
        if fidelity.is_empty() || fidelity[0] != 1.0 {
            return Err(invalid(
                "fidelity",
                "series must start with M(0) = 1".to_string(),
            ));
        }
        for (t, &m) in fidelity.iter().enumerate() {
            if !m.is_finite() || !(0.0..=1.0 + 1e-12).contains(&m) {
                return Err(invalid(
                    "fidelity",
                    format!("M({t}) = {m} outside [0, 1]"),
                ));
            }
        }
        Ok(EchoSeries {
            fidelity,
            delta,
            system,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.fidelity
    }

    pub fn t_max(&self) -> usize {
        self.fidelity.len() - 1
    }
}

/// Propagate `psi0` forward with the base map and with the perturbed map
/// `U' = U exp(-i B delta)` and record the squared overlap at every step.
pub fn loschmidt_echo(
    base: &KickedRotor,
    perturbation: Perturbation,
    delta: f64,
    psi0: &WaveState,
    t_max: usize,
) -> Result<EchoSeries, EchoError> {
    if psi0.n_grid() != base.n_grid {
        return Err(invalid(
            "psi0",
            format!(
                "state grid {} does not match the map grid {}",
                psi0.n_grid(),
                base.n_grid
            ),
        ));
    }
    if t_max < 1 {
        return Err(invalid("t_max", "need at least one step".to_string()));
    }
    if !delta.is_finite() {
        return Err(invalid("delta", format!("must be finite, got {delta}")));
    }

    let n_grid = base.n_grid;
    let mut engine = SplitStep::new(n_grid, base.lambda, base.period);
    let pert_phase = match perturbation {
        Perturbation::CosTheta => kicked::angle_phase(n_grid, |theta| delta * theta.cos()),
        Perturbation::KineticHalfN2 => kicked::momentum_phase(n_grid, |n| 0.5 * delta * n * n),
    };

    let mut forward = psi0.clone();
    let mut echoed = psi0.clone();
    let mut fidelity = Vec::with_capacity(t_max + 1);
    fidelity.push(normalised_overlap(&forward, &echoed));

    for step in 1..=t_max {
        engine.closed_step(forward.amps_mut());
        // U' = U exp(-i B delta): the perturbation phase acts first; at
        // delta = 0 that factor is the identity operator, so both states
        // see the same sequence of operations and the echo is exactly 1
        if delta != 0.0 {
            match perturbation {
                Perturbation::CosTheta => {
                    engine.apply_angle_diagonal(echoed.amps_mut(), &pert_phase);
                }
                Perturbation::KineticHalfN2 => {
                    kicked::apply_phase(echoed.amps_mut(), &pert_phase);
                }
            }
        }
        engine.closed_step(echoed.amps_mut());

        for state in [&forward, &echoed] {
            let norm_sqr = state.norm_sqr();
            if (norm_sqr - 1.0).abs() > NORM_DRIFT_LIMIT {
                return Err(EchoError::NormDrift { step, norm_sqr });
            }
        }
        fidelity.push(normalised_overlap(&forward, &echoed));
    }

    EchoSeries::from_parts(
        fidelity,
        delta,
        format!(
            "kicked-rotor n_grid={} lambda={} period={} B={}",
            n_grid,
            base.lambda,
            base.period,
            perturbation.name()
        ),
    )
}

fn normalised_overlap(a: &WaveState, b: &WaveState) -> f64 {
    // closed evolution keeps both norms at unity; dividing them out only
    // suppresses rounding drift and keeps the Cauchy-Schwarz bound exact
    let m = a.overlap(b).norm_sqr() / (a.norm_sqr() * b.norm_sqr());
    m.min(1.0 + 1e-12)
}

/// The q-generalised m-point correlation `K / e_q(lambda_q m)` with
/// `K = eta / N` and `lambda_q = ln_q(eta)`.
pub fn q_correlation_model(
    eta: f64,
    n_states: u64,
    q: EntropicIndex,
    m: u64,
) -> Result<f64, EchoError> {
    if !eta.is_finite() || eta < 1.0 {
        return Err(invalid("eta", format!("must be >= 1, got {eta}")));
    }
    if n_states < 1 {
        return Err(invalid("n_states", "need at least one state".to_string()));
    }
    if m < 1 {
        return Err(invalid("m", "need at least one time point".to_string()));
    }
    let rate = q_log(eta, q)?;
    Ok(eta / n_states as f64 / q_exp(rate * m as f64, q))
}

/// The discrete m-point correlation: perturbation weights `gamma_j` on the
/// cells, atom measures over the m-fold intersections, and a q-product in
/// place of the plain product of inverse weights.
///
/// For uniform weights `gamma_j = 1/M` this reduces exactly to
/// [`q_correlation_model`] with `eta = M`, whatever the measures are.
pub fn q_correlation_discrete(
    eta: f64,
    n_states: u64,
    gammas: &[f64],
    atoms: &[(Vec<usize>, f64)],
    q: EntropicIndex,
) -> Result<f64, EchoError> {
    if gammas.is_empty() {
        return Err(invalid("gammas", "no perturbation weights".to_string()));
    }
    for (j, &g) in gammas.iter().enumerate() {
        if !g.is_finite() || g <= 0.0 {
            return Err(invalid(
                "gammas",
                format!("gamma[{j}] = {g} is not positive"),
            ));
        }
    }
    if atoms.is_empty() {
        return Err(invalid("atoms", "no intersection measures".to_string()));
    }
    let m = atoms[0].0.len();
    if m == 0 {
        return Err(invalid("atoms", "empty itinerary tuple".to_string()));
    }
    let mut total_measure = 0.0;
    let mut sum = 0.0;
    for (term, (indices, measure)) in atoms.iter().enumerate() {
        if indices.len() != m {
            return Err(invalid(
                "atoms",
                format!("tuple {term} has length {}, expected {m}", indices.len()),
            ));
        }
        if !measure.is_finite() || *measure < 0.0 {
            return Err(invalid(
                "atoms",
                format!("measure {measure} of tuple {term} is not a weight"),
            ));
        }
        total_measure += measure;
        // chain of pairwise q-products of the inverse weights
        let mut chain = inverse_weight(gammas, indices[0], term)?;
        for &j in &indices[1..] {
            let factor = inverse_weight(gammas, j, term)?;
            let p = q_prod(chain, factor, q)?;
            if p.cutoff {
                return Err(EchoError::TermCutoff { term });
            }
            chain = p.value;
        }
        sum += measure / chain;
    }
    if (total_measure - 1.0).abs() > 1e-9 {
        return Err(invalid(
            "atoms",
            format!("measures sum to {total_measure}, expected 1"),
        ));
    }
    Ok(eta / n_states as f64 * sum)
}

fn inverse_weight(gammas: &[f64], j: usize, term: usize) -> Result<f64, EchoError> {
    gammas
        .get(j)
        .map(|g| 1.0 / g)
        .ok_or_else(|| invalid("atoms", format!("tuple {term} indexes missing cell {j}")))
}

/// A fitted q-exponential decay `M(t) ~ amplitude / e_q(rate t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub q_fid: f64,
    /// Decay rate per step, positive.
    pub rate: f64,
    pub amplitude: f64,
    /// Root-mean-square residual of `ln M` over the fitted points.
    pub rms_residual: f64,
    pub window: (usize, usize),
}

/// Outcome of a decay fit: either a fit or the designated no-decay result
/// for series that stay at `M ~ 1` throughout the window.
#[derive(Debug, Clone, PartialEq)]
pub enum EchoFit {
    Decay(DecayFit),
    NoDecay,
}

impl EchoFit {
    pub fn decay(&self) -> Option<&DecayFit> {
        match self {
            EchoFit::Decay(fit) => Some(fit),
            EchoFit::NoDecay => None,
        }
    }
}

/// `ln e_q(x)` for `x >= 0`, infinite past the `q > 1` pole.
fn log_q_exp(x: f64, q: f64) -> f64 {
    if (1.0 - q).abs() < crate::qmath::Q_ONE_EPSILON {
        return x;
    }
    let u = 1.0 - q;
    let bracket = u * x;
    if 1.0 + bracket <= 0.0 {
        return f64::INFINITY;
    }
    f64::ln_1p(bracket) / u
}

/// Least-squares fit of `ln M(t)` to `ln A - ln e_q(rate t)` over the
/// window, searching `q` on a 151-point grid over `[0, 1.5]` refined by
/// golden section, with a nested rate search at every `q`.
pub fn fit_q_exponential(series: &EchoSeries, window: (usize, usize)) -> Result<EchoFit, EchoError> {
    let (lo, hi) = window;
    if lo > hi || hi > series.t_max() {
        return Err(invalid(
            "window",
            format!("[{lo}, {hi}] outside the series 0..={}", series.t_max()),
        ));
    }
    let points: Vec<(f64, f64)> = (lo..=hi)
        .filter_map(|t| {
            let m = series.values()[t];
            (m > FIT_FLOOR).then(|| (t as f64, m.ln()))
        })
        .collect();
    if points.len() < 5 {
        return Err(invalid(
            "window",
            format!(
                "only {} points above the fit floor {FIT_FLOOR:e}; need 5",
                points.len()
            ),
        ));
    }
    if points.iter().all(|&(_, ln_m)| ln_m > (1.0f64 - 1e-6).ln()) {
        return Ok(EchoFit::NoDecay);
    }

    let sse_at = |q: f64| rate_profile(&points, q).1;
    // 151-point grid on [0, 1.5], then golden refinement around the best
    let n_grid_pts = 151;
    let mut best_q = 0.0;
    let mut best_sse = f64::INFINITY;
    for i in 0..n_grid_pts {
        let q = 1.5 * i as f64 / (n_grid_pts - 1) as f64;
        let sse = sse_at(q);
        if sse < best_sse {
            best_sse = sse;
            best_q = q;
        }
    }
    let spacing = 1.5 / (n_grid_pts - 1) as f64;
    let (q_fid, _) = golden_min(
        sse_at,
        (best_q - spacing).max(0.0),
        (best_q + spacing).min(1.5),
        60,
    );

    let (rate, sse) = rate_profile(&points, q_fid);
    let amplitude = {
        let mean: f64 = points
            .iter()
            .map(|&(t, ln_m)| ln_m + log_q_exp(rate * t, q_fid))
            .sum::<f64>()
            / points.len() as f64;
        mean.exp()
    };
    Ok(EchoFit::Decay(DecayFit {
        q_fid,
        rate,
        amplitude,
        rms_residual: (sse / points.len() as f64).sqrt(),
        window,
    }))
}

/// Best rate and its sum of squared log-residuals for a fixed `q`.
fn rate_profile(points: &[(f64, f64)], q: f64) -> (f64, f64) {
    let sse = |rate: f64| {
        let shifted: Vec<f64> = points
            .iter()
            .map(|&(t, ln_m)| ln_m + log_q_exp(rate * t, q))
            .collect();
        if shifted.iter().any(|s| !s.is_finite()) {
            return f64::INFINITY;
        }
        let mean = shifted.iter().sum::<f64>() / shifted.len() as f64;
        shifted.iter().map(|s| (s - mean) * (s - mean)).sum()
    };

    // seed the rate from the initial log-slope, then scan around it
    let (t0, y0) = points[0];
    let (t1, y1) = points[1];
    let seed = ((y0 - y1) / (t1 - t0)).max(1e-6);
    let mut best_rate = seed;
    let mut best_sse = f64::INFINITY;
    for i in 0..61 {
        let rate = seed * 10f64.powf(-2.5 + 5.0 * i as f64 / 60.0);
        let s = sse(rate);
        if s < best_sse {
            best_sse = s;
            best_rate = rate;
        }
    }
    let (rate, s) = golden_min(sse, best_rate / 1.3, best_rate * 1.3, 70);
    if s < best_sse {
        (rate, s)
    } else {
        (best_rate, best_sse)
    }
}

/// Entropic index of the regular (quasi-integrable) echo regime for `D`
/// degrees of freedom: `1 - 2/(3D)`. Approaches 1 (exponential decay) as
/// `D` grows.
pub fn regular_index(degrees: u32) -> Result<f64, EchoError> {
    if degrees < 1 {
        return Err(invalid(
            "degrees",
            "need at least one degree of freedom".to_string(),
        ));
    }
    Ok(1.0 - 2.0 / (3.0 * degrees as f64))
}
