//! The generalised time scale `tau_q = ln_q(eta) / h_KS^(q)`, phase-space
//! graininess bookkeeping, the deformed-uncorrelation measure model, and
//! the curve family that separates the power-law, intermediate, and
//! logarithmic regions of the `(eta, tau)` plane.

use serde::Serialize;
use thiserror::Error;

use crate::qmath::{q_log, EntropicIndex, QmathError};

#[derive(Debug, Clone, Error, PartialEq)]
pub enum TimescaleError {
    #[error("invalid parameter {name}: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error(
        "q-product cutoff: (n+1) M^(1-q) - n <= 0 for M = {m_cells}, n = {n}, q = {q}; \
         the deformed measure has no real value there"
    )]
    ProductCutoff { m_cells: u64, n: u64, q: f64 },
    #[error(transparent)]
    Qmath(#[from] QmathError),
}

fn require(name: &'static str, ok: bool, reason: String) -> Result<(), TimescaleError> {
    if ok {
        Ok(())
    } else {
        Err(TimescaleError::InvalidParameter { name, reason })
    }
}

/// Graininess of a bounded phase-space region: the accessible volume
/// measured in Planck cells.
///
/// `eta = mu_omega / h^D` counts the cells; the maximal partition has
/// `M = round(eta)` rigid cells of measure `1/M` each, and `M h^D`
/// reproduces the volume up to the rounding discrepancy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Graininess {
    /// Phase-space volume, units of action^D.
    pub mu_omega: f64,
    /// Planck-constant analogue, action units.
    pub h: f64,
    /// Degrees of freedom.
    pub degrees: u32,
    /// `mu_omega / h^D`, dimensionless.
    pub eta: f64,
    /// Cell count: `eta` rounded to the nearest integer, at least 1.
    pub cells: u64,
    /// `|cells - eta| / eta`, reported because physical parameters rarely
    /// give an integer cell count.
    pub rounding_discrepancy: f64,
}

impl Graininess {
    pub fn new(mu_omega: f64, h: f64, degrees: u32) -> Result<Self, TimescaleError> {
        require(
            "mu_omega",
            mu_omega.is_finite() && mu_omega > 0.0,
            format!("phase-space volume must be positive, got {mu_omega}"),
        )?;
        require(
            "h",
            h.is_finite() && h > 0.0,
            format!("Planck cell size must be positive, got {h}"),
        )?;
        require("degrees", degrees >= 1, "need at least one degree of freedom".into())?;
        let eta = mu_omega / h.powi(degrees as i32);
        require(
            "eta",
            eta.is_finite() && eta >= 1.0,
            format!("eta = mu_omega/h^D = {eta} must be at least 1"),
        )?;
        let cells = (eta.round() as u64).max(1);
        Ok(Graininess {
            mu_omega,
            h,
            degrees,
            eta,
            cells,
            rounding_discrepancy: (cells as f64 - eta).abs() / eta,
        })
    }
}

/// One point of the time-scale curve family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimescaleRow {
    pub eta: f64,
    pub q: f64,
    /// Time steps.
    pub tau: f64,
    /// The entropy rate used, nats per step.
    pub h_ks_q: f64,
}

fn check_eta(eta: f64) -> Result<(), TimescaleError> {
    require(
        "eta",
        eta.is_finite() && eta >= 1.0,
        format!("quasiclassical parameter must be >= 1, got {eta}"),
    )
}

fn check_rate(h_ks_q: f64) -> Result<(), TimescaleError> {
    require(
        "h_ks_q",
        h_ks_q.is_finite() && h_ks_q > 0.0,
        format!("entropy rate must be positive, got {h_ks_q}"),
    )
}

/// The generalised time scale `tau_q = ln_q(eta) / h_ks_q`.
///
/// `q = 1` gives the logarithmic (random) time scale; `q = 1 - alpha`
/// gives the power-law (relaxation) scale.
pub fn tau_q(eta: f64, q: EntropicIndex, h_ks_q: f64) -> Result<f64, TimescaleError> {
    check_eta(eta)?;
    check_rate(h_ks_q)?;
    Ok(q_log(eta, q)? / h_ks_q)
}

/// The exact `tau_(1-alpha)` next to its large-`eta` asymptote
/// `eta^alpha / (alpha h)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxationLimit {
    pub exact: f64,
    pub asymptote: f64,
    pub relative_gap: f64,
}

pub fn tau_relaxation_limit(
    eta: f64,
    alpha: f64,
    h_ks_q: f64,
) -> Result<RelaxationLimit, TimescaleError> {
    require(
        "alpha",
        alpha.is_finite() && alpha > 0.0,
        format!("alpha must be positive, got {alpha}"),
    )?;
    let exact = tau_q(eta, EntropicIndex::new(1.0 - alpha)?, h_ks_q)?;
    let asymptote = eta.powf(alpha) / (alpha * h_ks_q);
    Ok(RelaxationLimit {
        exact,
        asymptote,
        relative_gap: (asymptote - exact).abs() / asymptote,
    })
}

/// The deformed Kolmogorov-Sinai time `1 / h_ks_q`.
pub fn ks_time_q(h_ks_q: f64) -> Result<f64, TimescaleError> {
    check_rate(h_ks_q)?;
    Ok(1.0 / h_ks_q)
}

/// Measure of an `(n+1)`-step refinement atom under the deformed
/// uncorrelation model over `M` equal cells:
///
/// ```text
/// mu = [(n+1) M^(1-q) - n]^(-1/(1-q))
/// ```
///
/// equivalently the reciprocal of the `(n+1)`-fold q-product of `M` with
/// itself. At `q = 1` it reduces to the Bernoulli product `M^-(n+1)`.
/// Where the bracket is nonpositive (possible for `q > 1`) the model has no
/// real value and the offending `(M, n, q)` is reported as a domain error.
pub fn deformed_atom_measure(
    m_cells: u64,
    n: u64,
    q: EntropicIndex,
) -> Result<f64, TimescaleError> {
    require(
        "m_cells",
        m_cells >= 2,
        format!("need at least 2 cells, got {m_cells}"),
    )?;
    let ln_m = (m_cells as f64).ln();
    if q.is_classical() {
        return Ok((-((n + 1) as f64) * ln_m).exp());
    }
    let u = 1.0 - q.value();
    // (n+1) M^u - n = (n+1) expm1(u ln M) + 1
    let bracket = (n + 1) as f64 * f64::exp_m1(u * ln_m) + 1.0;
    if bracket <= 0.0 {
        return Err(TimescaleError::ProductCutoff {
            m_cells,
            n,
            q: q.value(),
        });
    }
    Ok((-bracket.ln() / u).exp())
}

/// One row of the regular-regime power-law comparison.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLawRow {
    pub n: u64,
    /// Exact deformed measure at `q = 1 - alpha`.
    pub exact: f64,
    /// Classical-limit approximation `1 / (M (n+1)^(1/alpha))`.
    pub approx: f64,
    pub rel_error: f64,
}

/// Compare the exact deformed measure at `q = 1 - alpha` with its
/// classical-limit power law `1/(M (n+1)^(1/alpha))`; the relative error
/// shrinks as `M` grows at fixed `n`.
pub fn regular_power_law_check(
    m_cells: u64,
    alpha: f64,
    n_list: &[u64],
) -> Result<Vec<PowerLawRow>, TimescaleError> {
    require(
        "alpha",
        alpha.is_finite() && alpha > 0.0,
        format!("alpha must be positive, got {alpha}"),
    )?;
    let q = EntropicIndex::new(1.0 - alpha)?;
    n_list
        .iter()
        .map(|&n| {
            let exact = deformed_atom_measure(m_cells, n, q)?;
            let approx = 1.0 / (m_cells as f64 * ((n + 1) as f64).powf(1.0 / alpha));
            Ok(PowerLawRow {
                n,
                exact,
                approx,
                rel_error: (exact - approx).abs() / exact,
            })
        })
        .collect()
}

/// Entropy rate implied by graininess at a characteristic time `kappa`:
/// `h_KS^(q)(T_kappa) = ln_q(eta)` and, per step, `ln_q(eta)/kappa`, so
/// that `tau_q(eta, q, per_step) = kappa` exactly.
pub fn graininess_hks(
    eta: f64,
    q: EntropicIndex,
    kappa: f64,
) -> Result<(f64, f64), TimescaleError> {
    check_eta(eta)?;
    require(
        "kappa",
        kappa.is_finite() && kappa > 0.0,
        format!("characteristic time must be positive, got {kappa}"),
    )?;
    let at_kappa = q_log(eta, q)?;
    Ok((at_kappa, at_kappa / kappa))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridSpacing {
    Log,
    Linear,
}

/// The `(eta, tau)` curve family over a log-spaced `eta` grid with
/// normalised entropy rate `h_ks_q = 1`.
///
/// Rows are ordered q-outer (as given), eta-inner ascending. For q' < q <= 1
/// the curves order as `tau_q' >= tau_q` at every `eta > 1`, which is the
/// three-region structure of the time-scale diagram.
pub fn timescale_curves(
    q_list: &[f64],
    eta_min: f64,
    eta_max: f64,
    points: usize,
) -> Result<Vec<TimescaleRow>, TimescaleError> {
    timescale_curves_spaced(q_list, eta_min, eta_max, points, GridSpacing::Log)
}

pub fn timescale_curves_spaced(
    q_list: &[f64],
    eta_min: f64,
    eta_max: f64,
    points: usize,
    spacing: GridSpacing,
) -> Result<Vec<TimescaleRow>, TimescaleError> {
    require(
        "eta_min",
        eta_min.is_finite() && eta_min >= 1.0,
        format!("must be >= 1, got {eta_min}"),
    )?;
    require(
        "eta_max",
        eta_max.is_finite() && eta_max > eta_min,
        format!("must exceed eta_min = {eta_min}, got {eta_max}"),
    )?;
    require(
        "points",
        points >= 2,
        format!("need at least 2 grid points, got {points}"),
    )?;
    require("q_list", !q_list.is_empty(), "need at least one q".into())?;

    let grid: Vec<f64> = (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            match spacing {
                GridSpacing::Log => (eta_min.ln() + s * (eta_max.ln() - eta_min.ln())).exp(),
                GridSpacing::Linear => eta_min + s * (eta_max - eta_min),
            }
        })
        .collect();

    let mut rows = Vec::with_capacity(q_list.len() * points);
    for &qv in q_list {
        let q = EntropicIndex::new(qv)?;
        for &eta in &grid {
            rows.push(TimescaleRow {
                eta,
                q: qv,
                tau: q_log(eta, q)?,
                h_ks_q: 1.0,
            });
        }
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qmath::{q_prod, EntropicIndex};
    use approx::assert_relative_eq;

    fn q(v: f64) -> EntropicIndex {
        EntropicIndex::new(v).unwrap()
    }

    #[test]
    fn tau_q_examples() {
        let e2 = std::f64::consts::E * std::f64::consts::E;
        assert_relative_eq!(tau_q(e2, q(1.0), 1.0).unwrap(), 2.0, max_relative = 1e-12);
        assert_relative_eq!(tau_q(10.0, q(0.0), 1.0).unwrap(), 9.0, max_relative = 1e-12);
        assert_relative_eq!(
            tau_q(100.0, q(0.5), 1.0).unwrap(),
            18.0,
            max_relative = 1e-12
        );
        assert!(tau_q(0.5, q(1.0), 1.0).is_err());
        assert!(tau_q(10.0, q(1.0), 0.0).is_err());
    }

    #[test]
    fn relaxation_limit_examples() {
        let r = tau_relaxation_limit(1e6, 0.5, 1.0).unwrap();
        assert_relative_eq!(r.exact, 1998.0, max_relative = 1e-12);
        assert_relative_eq!(r.asymptote, 2000.0, max_relative = 1e-12);
        assert_relative_eq!(r.relative_gap, 0.001, max_relative = 1e-9);

        let r = tau_relaxation_limit(10.0, 1.0, 1.0).unwrap();
        assert_relative_eq!(r.exact, 9.0, max_relative = 1e-12);
        assert_relative_eq!(r.asymptote, 10.0, max_relative = 1e-12);

        let r = tau_relaxation_limit(1.0, 0.5, 1.0).unwrap();
        assert_eq!(r.exact, 0.0);
    }

    #[test]
    fn relaxation_gap_shrinks_with_eta() {
        let mut previous = f64::INFINITY;
        for exponent in 2..=8 {
            let gap = tau_relaxation_limit(10f64.powi(exponent), 0.5, 1.0)
                .unwrap()
                .relative_gap;
            assert!(gap < previous);
            previous = gap;
        }
    }

    #[test]
    fn ks_time_examples() {
        assert_relative_eq!(
            ks_time_q(std::f64::consts::LN_2).unwrap(),
            1.4426950408889634,
            max_relative = 1e-12
        );
        assert_relative_eq!(ks_time_q(1.0).unwrap(), 1.0, max_relative = 1e-15);
        assert!(ks_time_q(0.0).is_err());
        assert!(ks_time_q(-1.0).is_err());
    }

    #[test]
    fn deformed_measure_examples() {
        assert_relative_eq!(
            deformed_atom_measure(10, 2, q(1.0)).unwrap(),
            1e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            deformed_atom_measure(10, 1, q(0.0)).unwrap(),
            1.0 / 19.0,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            deformed_atom_measure(10_000, 3, q(0.5)).unwrap(),
            397.0f64.powi(-2),
            max_relative = 1e-12
        );
    }

    #[test]
    fn deformed_measure_cutoff_is_a_domain_error() {
        // q = 3: bracket = 2/100 - 1 < 0 at M = 10, n = 1
        let err = deformed_atom_measure(10, 1, q(3.0)).unwrap_err();
        assert!(matches!(
            err,
            TimescaleError::ProductCutoff {
                m_cells: 10,
                n: 1,
                q: _
            }
        ));
        assert!(deformed_atom_measure(1, 1, q(0.5)).is_err());
    }

    #[test]
    fn deformed_measure_matches_iterated_q_product() {
        for &qv in &[0.0, 0.3, 0.5, 0.9, 1.0, 1.0 + 1e-12] {
            for &m in &[2u64, 10, 1000] {
                for n in 0..=6u64 {
                    let mu = deformed_atom_measure(m, n, q(qv)).unwrap();
                    let mut chain = m as f64;
                    for _ in 0..n {
                        let p = q_prod(chain, m as f64, q(qv)).unwrap();
                        assert!(!p.cutoff);
                        chain = p.value;
                    }
                    assert_relative_eq!(1.0 / mu, chain, max_relative = 1e-10);
                }
            }
        }
    }

    #[test]
    fn entropy_closure_reproduces_n_plus_one_log() {
        // sum over atoms of mu ln_q(1/mu) collapses to ln_q(1/mu) because the
        // model atoms are equiprobable with total measure 1
        for &qv in &[0.2, 0.5, 0.8, 1.0] {
            for n in 0..=8u64 {
                let mu = deformed_atom_measure(1000, n, q(qv)).unwrap();
                let closure = crate::qmath::q_log(1.0 / mu, q(qv)).unwrap();
                let expected = (n + 1) as f64 * crate::qmath::q_log(1000.0, q(qv)).unwrap();
                assert_relative_eq!(closure, expected, max_relative = 1e-10);
            }
        }
        // dividing by n approaches ln_q M from above
        let qv = q(0.5);
        let per_step = |n: u64| {
            crate::qmath::q_log(1.0 / deformed_atom_measure(1000, n, qv).unwrap(), qv).unwrap()
                / n as f64
        };
        let target = crate::qmath::q_log(1000.0, qv).unwrap();
        assert!((per_step(1000) - target).abs() / target < 2e-3);
        assert!((per_step(10) - target).abs() < (per_step(2) - target).abs());
    }

    #[test]
    fn power_law_check_examples() {
        let rows = regular_power_law_check(1_000_000, 0.5, &[1]).unwrap();
        assert_relative_eq!(rows[0].approx, 2.5e-7, max_relative = 1e-12);
        assert_relative_eq!(rows[0].exact, 1999.0f64.powi(-2), max_relative = 1e-12);
        assert!(rows[0].rel_error < 0.0011 && rows[0].rel_error > 0.0009);

        // n = 0: a single factor carries no correlation
        for &m in &[10u64, 1000, 1_000_000] {
            let rows = regular_power_law_check(m, 0.7, &[0]).unwrap();
            assert_relative_eq!(rows[0].exact, rows[0].approx, max_relative = 1e-12);
        }
    }

    #[test]
    fn power_law_error_decreases_in_m() {
        let mut previous = f64::INFINITY;
        for &m in &[1000u64, 10_000, 100_000, 1_000_000] {
            let rows = regular_power_law_check(m, 0.5, &[3]).unwrap();
            assert!(rows[0].rel_error < previous);
            previous = rows[0].rel_error;
        }
    }

    #[test]
    fn graininess_round_trips_through_tau() {
        let (at_kappa, per_step) = graininess_hks(std::f64::consts::E, q(1.0), 1.0).unwrap();
        assert_relative_eq!(at_kappa, 1.0, max_relative = 1e-12);
        assert_relative_eq!(per_step, 1.0, max_relative = 1e-12);

        let (at_kappa, per_step) = graininess_hks(100.0, q(0.5), 2.0).unwrap();
        assert_relative_eq!(at_kappa, 18.0, max_relative = 1e-12);
        assert_relative_eq!(per_step, 9.0, max_relative = 1e-12);
        assert_relative_eq!(
            tau_q(100.0, q(0.5), per_step).unwrap(),
            2.0,
            max_relative = 1e-12
        );

        let (a, b) = graininess_hks(1.0, q(0.3), 5.0).unwrap();
        assert_eq!(a, 0.0);
        assert_eq!(b, 0.0);
    }

    #[test]
    fn graininess_type_validates_and_rounds() {
        let g = Graininess::new(100.0, 0.5, 2).unwrap();
        assert_relative_eq!(g.eta, 400.0, max_relative = 1e-12);
        assert_eq!(g.cells, 400);
        assert!(g.rounding_discrepancy < 1e-12);
        let g = Graininess::new(10.3, 1.0, 1).unwrap();
        assert_eq!(g.cells, 10);
        assert!(g.rounding_discrepancy > 0.0);
        assert!(Graininess::new(0.5, 1.0, 1).is_err()); // eta < 1
        assert!(Graininess::new(1.0, 0.0, 1).is_err());
    }

    #[test]
    fn curve_rows_are_ordered_and_correct() {
        let rows = timescale_curves(&[1.0, 0.0], 1.0, 100.0, 3).unwrap();
        assert_eq!(rows.len(), 6);
        // q-outer in the given order, eta ascending inside
        assert_eq!(rows[0].q, 1.0);
        assert_eq!(rows[3].q, 0.0);
        assert!(rows[0].eta < rows[1].eta && rows[1].eta < rows[2].eta);
        // spot values at eta = 10 (the middle point of the log grid)
        assert_relative_eq!(rows[1].eta, 10.0, max_relative = 1e-12);
        assert_relative_eq!(rows[1].tau, 10f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(rows[4].tau, 9.0, max_relative = 1e-12);
        // eta = 1 boundary
        assert_eq!(rows[0].tau, 0.0);
    }

    #[test]
    fn curves_are_monotone_in_q() {
        let qs = [1.0, 0.8, 0.5, 0.0];
        let rows = timescale_curves(&qs, 1.0, 1e8, 60).unwrap();
        for i in 1..qs.len() {
            for p in 0..60 {
                let shallower = &rows[(i - 1) * 60 + p];
                let steeper = &rows[i * 60 + p];
                if shallower.eta > 1.0 {
                    assert!(
                        steeper.tau > shallower.tau,
                        "tau ordering violated at eta {}",
                        shallower.eta
                    );
                }
            }
        }
    }

    #[test]
    fn tau_is_continuous_at_q_one() {
        let eta = 1e5;
        let reference = tau_q(eta, q(1.0), 1.0).unwrap();
        let mut previous = f64::INFINITY;
        for k in 1..=10 {
            let dq = 10f64.powi(-k);
            let gap = (tau_q(eta, q(1.0 + dq), 1.0).unwrap() - reference)
                .abs()
                .max((tau_q(eta, q(1.0 - dq), 1.0).unwrap() - reference).abs());
            assert!(gap <= previous.max(1e-10));
            previous = gap;
        }
        assert!(previous < 1e-8);
    }

    #[test]
    fn linear_spacing_is_available() {
        let rows =
            timescale_curves_spaced(&[1.0], 1.0, 5.0, 5, GridSpacing::Linear).unwrap();
        let etas: Vec<f64> = rows.iter().map(|r| r.eta).collect();
        assert_relative_eq!(etas[1] - etas[0], 1.0, max_relative = 1e-12);
        assert_relative_eq!(etas[4], 5.0, max_relative = 1e-12);
    }
}
