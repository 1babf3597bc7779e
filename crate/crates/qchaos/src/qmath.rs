//! q-deformed elementary functions, the q-algebra, and the Tsallis entropy.
//!
//! Everything downstream (partition entropies, time scales, echo models)
//! is built on the deformed pair
//!
//! ```text
//! ln_q x  = (x^(1-q) - 1) / (1 - q)          (x > 0)
//! e_q(x)  = [1 + (1-q) x]_+^(1/(1-q))        (x real)
//! ```
//!
//! and the deformed arithmetic they generate. The entropic index `q = 1`
//! recovers the ordinary logarithm, exponential, and Shannon entropy.
//!
//! All functions are pure and safe for unrestricted concurrent use.

use thiserror::Error;

/// Half-width of the band around `q = 1` inside which every q-function
/// evaluates through its classical (`q -> 1`) limit form.
///
/// The direct formulas divide a difference of nearly equal quantities by
/// `1 - q` and lose all precision as `q -> 1`; inside the band we use
/// second-order expansions instead.
pub const Q_ONE_EPSILON: f64 = 1e-8;

/// Accepted deviation of a probability vector's sum from 1.
pub const PROBABILITY_SUM_TOLERANCE: f64 = 1e-12;

/// Errors from the deformed-algebra layer.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum QmathError {
    #[error("entropic index must be a finite real, got {0}")]
    NonFiniteIndex(f64),
    #[error("{name} must be {constraint}, got {value}")]
    OutOfDomain {
        name: &'static str,
        constraint: &'static str,
        value: f64,
    },
    #[error("q-difference pole: y = 1/(q-1) = {y} is singular at q = {q}")]
    DifferencePole { y: f64, q: f64 },
    #[error("invalid probability vector: {0}")]
    InvalidDistribution(String),
    #[error("zero probability at index {index} is only admissible for q > 0, got q = {q}")]
    ZeroProbabilityEntry { index: usize, q: f64 },
}

/// The Tsallis deformation parameter.
///
/// `q = 1` is legal and selects the classical limit of every deformed
/// quantity; values within [`Q_ONE_EPSILON`] of 1 are routed through the
/// stable limit forms as well.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropicIndex(f64);

impl EntropicIndex {
    /// The undeformed index `q = 1`.
    pub const CLASSICAL: EntropicIndex = EntropicIndex(1.0);

    pub fn new(q: f64) -> Result<Self, QmathError> {
        if q.is_finite() {
            Ok(Self(q))
        } else {
            Err(QmathError::NonFiniteIndex(q))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }

    /// True when `|1 - q| < Q_ONE_EPSILON` and the limit forms apply.
    pub fn is_classical(self) -> bool {
        (1.0 - self.0).abs() < Q_ONE_EPSILON
    }

    fn one_minus_q(self) -> f64 {
        1.0 - self.0
    }
}

/// A finite discrete probability distribution: nonnegative weights that
/// sum to 1 within [`PROBABILITY_SUM_TOLERANCE`].
#[derive(Debug, Clone, PartialEq)]
pub struct ProbabilityVector(Vec<f64>);

impl ProbabilityVector {
    pub fn new(weights: Vec<f64>) -> Result<Self, QmathError> {
        if weights.is_empty() {
            return Err(QmathError::InvalidDistribution(
                "no weights given".to_string(),
            ));
        }
        for (i, &w) in weights.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(QmathError::InvalidDistribution(format!(
                    "p[{i}] = {w} is not a finite nonnegative weight"
                )));
            }
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > PROBABILITY_SUM_TOLERANCE {
            return Err(QmathError::InvalidDistribution(format!(
                "weights sum to {sum}, expected 1 within {PROBABILITY_SUM_TOLERANCE:e}"
            )));
        }
        Ok(Self(weights))
    }

    /// Equal weights `1/n` on `n` outcomes.
    pub fn uniform(n: usize) -> Result<Self, QmathError> {
        if n == 0 {
            return Err(QmathError::InvalidDistribution(
                "uniform distribution needs at least one outcome".to_string(),
            ));
        }
        Ok(Self(vec![1.0 / n as f64; n]))
    }

    /// Empirical distribution `count_i / total`. The caller guarantees the
    /// counts are exhaustive, so the result is exact by construction and
    /// skips the floating-point sum check.
    pub fn from_counts(counts: &[u64], total: u64) -> Result<Self, QmathError> {
        if counts.is_empty() || total == 0 {
            return Err(QmathError::InvalidDistribution(
                "empty count table".to_string(),
            ));
        }
        if counts.iter().sum::<u64>() != total {
            return Err(QmathError::InvalidDistribution(format!(
                "counts sum to {}, expected {total}",
                counts.iter().sum::<u64>()
            )));
        }
        Ok(Self(
            counts.iter().map(|&c| c as f64 / total as f64).collect(),
        ))
    }

    /// Joint distribution of two independent systems (outer product).
    pub fn product(&self, other: &Self) -> Self {
        let mut joint = Vec::with_capacity(self.0.len() * other.0.len());
        for &a in &self.0 {
            for &b in &other.0 {
                joint.push(a * b);
            }
        }
        Self(joint)
    }

    pub fn weights(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Value of a cutoff-guarded q-operation, together with a flag telling
/// whether the `[.]_+` clamp fired (in which case `value` is exactly 0).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Clipped {
    pub value: f64,
    pub cutoff: bool,
}

impl Clipped {
    fn plain(value: f64) -> Self {
        Clipped {
            value,
            cutoff: false,
        }
    }

    fn clamped() -> Self {
        Clipped {
            value: 0.0,
            cutoff: true,
        }
    }
}

fn require_positive(name: &'static str, x: f64) -> Result<(), QmathError> {
    if x.is_finite() && x > 0.0 {
        Ok(())
    } else {
        Err(QmathError::OutOfDomain {
            name,
            constraint: "positive and finite",
            value: x,
        })
    }
}

/// The q-logarithm `ln_q x = (x^(1-q) - 1)/(1-q)`, natural log at `q = 1`.
///
/// Strictly increasing in `x`; zero at `x = 1` for every `q`.
pub fn q_log(x: f64, q: EntropicIndex) -> Result<f64, QmathError> {
    require_positive("x", x)?;
    let ln_x = x.ln();
    if q.is_classical() {
        // ln x * (1 + (1-q) ln x / 2): second order in (1-q)
        Ok(ln_x * (1.0 + 0.5 * q.one_minus_q() * ln_x))
    } else {
        let u = q.one_minus_q();
        // x^u - 1 = expm1(u ln x) avoids the cancellation for small |u|
        Ok(f64::exp_m1(u * ln_x) / u)
    }
}

/// The q-exponential `e_q(x) = [1 + (1-q) x]_+^(1/(1-q))`, `exp` at `q = 1`.
///
/// Total on the reals: where the bracket is nonpositive the cutoff clause
/// applies and the result is exactly 0.
pub fn q_exp(x: f64, q: EntropicIndex) -> f64 {
    if q.is_classical() {
        // e^x * (1 - (1-q) x^2 / 2): second order in (1-q)
        return x.exp() * (1.0 - 0.5 * q.one_minus_q() * x * x);
    }
    let u = q.one_minus_q();
    let bracket = u * x;
    if 1.0 + bracket <= 0.0 {
        return 0.0;
    }
    (f64::ln_1p(bracket) / u).exp()
}

/// q-sum: `x + y + (1-q) x y`. Ordinary addition at `q = 1`.
pub fn q_sum(x: f64, y: f64, q: EntropicIndex) -> f64 {
    if q.is_classical() {
        x + y
    } else {
        x + y + q.one_minus_q() * x * y
    }
}

/// q-difference: `(x - y) / (1 + (1-q) y)`, with a pole at `y = 1/(q-1)`.
pub fn q_diff(x: f64, y: f64, q: EntropicIndex) -> Result<f64, QmathError> {
    if q.is_classical() {
        return Ok(x - y);
    }
    let denom = 1.0 + q.one_minus_q() * y;
    if denom == 0.0 {
        return Err(QmathError::DifferencePole { y, q: q.value() });
    }
    Ok((x - y) / denom)
}

/// q-product: `[x^(1-q) + y^(1-q) - 1]_+^(1/(1-q))` for positive operands.
///
/// Returns the clamped value 0 with `cutoff = true` where the bracket is
/// nonpositive; downstream consumers decide whether that is an error.
pub fn q_prod(x: f64, y: f64, q: EntropicIndex) -> Result<Clipped, QmathError> {
    require_positive("x", x)?;
    require_positive("y", y)?;
    if q.is_classical() {
        return Ok(Clipped::plain(x * y));
    }
    let u = q.one_minus_q();
    // x^u + y^u - 1, assembled from expm1 terms so that u -> 0 stays exact
    let bracket = f64::exp_m1(u * x.ln()) + f64::exp_m1(u * y.ln()) + 1.0;
    if bracket <= 0.0 {
        return Ok(Clipped::clamped());
    }
    Ok(Clipped::plain((bracket.ln() / u).exp()))
}

/// q-division: `[x^(1-q) - y^(1-q) + 1]_+^(1/(1-q))` for positive operands.
pub fn q_div(x: f64, y: f64, q: EntropicIndex) -> Result<Clipped, QmathError> {
    require_positive("x", x)?;
    require_positive("y", y)?;
    if q.is_classical() {
        return Ok(Clipped::plain(x / y));
    }
    let u = q.one_minus_q();
    let bracket = f64::exp_m1(u * x.ln()) - f64::exp_m1(u * y.ln()) + 1.0;
    if bracket <= 0.0 {
        return Ok(Clipped::clamped());
    }
    Ok(Clipped::plain((bracket.ln() / u).exp()))
}

/// Tsallis entropy `S_q = sum_i p_i ln_q(1/p_i)` with `k = 1`.
///
/// Zero-probability outcomes contribute nothing when `q > 0` (the limit
/// `p ln_q(1/p) -> 0`); for `q <= 0` a zero entry has no finite limit and
/// the input is rejected.
pub fn tsallis_entropy(p: &ProbabilityVector, q: EntropicIndex) -> Result<f64, QmathError> {
    let mut sum = 0.0;
    for (i, &pi) in p.weights().iter().enumerate() {
        if pi == 0.0 {
            if q.value() <= 0.0 {
                return Err(QmathError::ZeroProbabilityEntry {
                    index: i,
                    q: q.value(),
                });
            }
            continue;
        }
        sum += pi * q_log(1.0 / pi, q)?;
    }
    Ok(sum)
}
