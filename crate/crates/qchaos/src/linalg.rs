//! Dense complex non-symmetric eigenvalues: Householder reduction to upper
//! Hessenberg form followed by explicitly shifted QR iteration with Givens
//! rotations and Wilkinson shifts. Eigenvalues only, no vectors.

use num_complex::Complex64;
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum EigenError {
    #[error("QR iteration failed to deflate a block of size {block} after {iterations} sweeps")]
    NoConvergence { block: usize, iterations: usize },
    #[error("matrix must be square, got {rows} rows and {len} entries")]
    NotSquare { rows: usize, len: usize },
}

/// All eigenvalues of a dense row-major complex matrix.
pub(crate) fn complex_eigenvalues(
    n: usize,
    matrix: &[Complex64],
) -> Result<Vec<Complex64>, EigenError> {
    if matrix.len() != n * n {
        return Err(EigenError::NotSquare {
            rows: n,
            len: matrix.len(),
        });
    }
    if n == 0 {
        return Ok(Vec::new());
    }
    let mut h = matrix.to_vec();
    hessenberg(n, &mut h);
    hessenberg_eigenvalues(n, &mut h)
}

fn at(n: usize, i: usize, j: usize) -> usize {
    i * n + j
}

/// In-place Householder reduction to upper Hessenberg form.
fn hessenberg(n: usize, a: &mut [Complex64]) {
    for k in 0..n.saturating_sub(2) {
        // Householder vector for the column below the subdiagonal
        let mut norm_sqr = 0.0;
        for i in k + 1..n {
            norm_sqr += a[at(n, i, k)].norm_sqr();
        }
        let x0 = a[at(n, k + 1, k)];
        let norm = norm_sqr.sqrt();
        if norm <= f64::MIN_POSITIVE {
            continue;
        }
        let phase = if x0.norm() > 0.0 {
            x0 / x0.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        let alpha = -phase * norm;
        // v = x - alpha e1
        let mut v = vec![Complex64::new(0.0, 0.0); n - k - 1];
        v[0] = x0 - alpha;
        for i in k + 2..n {
            v[i - k - 1] = a[at(n, i, k)];
        }
        let v_norm_sqr: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        if v_norm_sqr <= f64::MIN_POSITIVE {
            continue;
        }
        let beta = 2.0 / v_norm_sqr;

        // left: A := (I - beta v v*) A on rows k+1..n
        for col in k..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for i in k + 1..n {
                dot += v[i - k - 1].conj() * a[at(n, i, col)];
            }
            let scale = beta * dot;
            for i in k + 1..n {
                let step = v[i - k - 1] * scale;
                a[at(n, i, col)] -= step;
            }
        }
        // right: A := A (I - beta v v*) on columns k+1..n
        for row in 0..n {
            let mut dot = Complex64::new(0.0, 0.0);
            for j in k + 1..n {
                dot += a[at(n, row, j)] * v[j - k - 1];
            }
            let scale = beta * dot;
            for j in k + 1..n {
                let step = scale * v[j - k - 1].conj();
                a[at(n, row, j)] -= step;
            }
        }
        // enforce the exact zeros below the subdiagonal
        a[at(n, k + 1, k)] = alpha;
        for i in k + 2..n {
            a[at(n, i, k)] = Complex64::new(0.0, 0.0);
        }
    }
}

/// Complex Givens rotation `G = [[c, s], [-conj(s), c]]` (c real) such that
/// `G [x, y]^T = [r, 0]^T`.
fn givens(x: Complex64, y: Complex64) -> (f64, Complex64) {
    let r = (x.norm_sqr() + y.norm_sqr()).sqrt();
    if r <= f64::MIN_POSITIVE {
        return (1.0, Complex64::new(0.0, 0.0));
    }
    if x.norm() <= f64::MIN_POSITIVE {
        return (0.0, y.conj() / y.norm());
    }
    let phase = x / x.norm();
    (x.norm() / r, phase * y.conj() / r)
}

/// Eigenvalues of the two-by-two block `[[a, b], [c, d]]`.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let half_trace = 0.5 * (a + d);
    let disc = (0.25 * (a - d) * (a - d) + b * c).sqrt();
    (half_trace + disc, half_trace - disc)
}

/// Shifted QR iteration on an upper Hessenberg matrix, in place.
fn hessenberg_eigenvalues(n: usize, h: &mut [Complex64]) -> Result<Vec<Complex64>, EigenError> {
    let mut eigenvalues = vec![Complex64::new(0.0, 0.0); n];
    let mut hi = n; // active block is rows/cols 0..hi
    let mut stalled = 0usize;
    let mut total_sweeps = 0usize;
    let max_total = 60 * n.max(8);

    while hi > 0 {
        // split off converged subdiagonals
        let mut lo = hi - 1;
        while lo > 0 {
            let sub = h[at(n, lo, lo - 1)].norm();
            let scale = h[at(n, lo - 1, lo - 1)].norm() + h[at(n, lo, lo)].norm();
            if sub <= f64::EPSILON * scale + f64::MIN_POSITIVE {
                h[at(n, lo, lo - 1)] = Complex64::new(0.0, 0.0);
                break;
            }
            lo -= 1;
        }
        if lo == hi - 1 {
            eigenvalues[hi - 1] = h[at(n, hi - 1, hi - 1)];
            hi -= 1;
            stalled = 0;
            continue;
        }
        if lo == hi - 2 {
            let (e1, e2) = eig2(
                h[at(n, hi - 2, hi - 2)],
                h[at(n, hi - 2, hi - 1)],
                h[at(n, hi - 1, hi - 2)],
                h[at(n, hi - 1, hi - 1)],
            );
            eigenvalues[hi - 2] = e1;
            eigenvalues[hi - 1] = e2;
            hi -= 2;
            stalled = 0;
            continue;
        }

        total_sweeps += 1;
        stalled += 1;
        if total_sweeps > max_total {
            return Err(EigenError::NoConvergence {
                block: hi - lo,
                iterations: total_sweeps,
            });
        }

        // Wilkinson shift: trailing 2x2 eigenvalue closest to the corner
        let corner = h[at(n, hi - 1, hi - 1)];
        let shift = if stalled % 12 == 0 {
            // exceptional shift to break rare cycles
            corner + Complex64::new(h[at(n, hi - 1, hi - 2)].norm(), 0.0)
        } else {
            let (e1, e2) = eig2(
                h[at(n, hi - 2, hi - 2)],
                h[at(n, hi - 2, hi - 1)],
                h[at(n, hi - 1, hi - 2)],
                corner,
            );
            if (e1 - corner).norm() <= (e2 - corner).norm() {
                e1
            } else {
                e2
            }
        };

        for i in lo..hi {
            h[at(n, i, i)] -= shift;
        }
        // QR factorisation of the Hessenberg block by Givens rotations
        let mut rotations = Vec::with_capacity(hi - lo - 1);
        for i in lo..hi - 1 {
            let (c, s) = givens(h[at(n, i, i)], h[at(n, i + 1, i)]);
            for col in i..hi {
                let top = h[at(n, i, col)];
                let bottom = h[at(n, i + 1, col)];
                h[at(n, i, col)] = c * top + s * bottom;
                h[at(n, i + 1, col)] = -s.conj() * top + c * bottom;
            }
            rotations.push((c, s));
        }
        // RQ recombination: multiply by the adjoint rotations on the right
        for (offset, &(c, s)) in rotations.iter().enumerate() {
            let i = lo + offset;
            for row in lo..=(i + 1).min(hi - 1) {
                let left = h[at(n, row, i)];
                let right = h[at(n, row, i + 1)];
                h[at(n, row, i)] = c * left + s.conj() * right;
                h[at(n, row, i + 1)] = -s * left + c * right;
            }
        }
        for i in lo..hi {
            h[at(n, i, i)] += shift;
        }
    }
    Ok(eigenvalues)
}
