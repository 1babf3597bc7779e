//! Small shared numerical helpers: least-squares lines and 1-D minimisation.

/// Ordinary least-squares line through `(x_i, y_i)`.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard error of the slope; 0 when the fit is exact or has no
    /// residual degrees of freedom.
    pub slope_stderr: f64,
    pub rms_residual: f64,
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> LineFit {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    assert!(n >= 2, "line fit needs at least two points");
    let nf = n as f64;
    let mean_x = xs.iter().sum::<f64>() / nf;
    let mean_y = ys.iter().sum::<f64>() / nf;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        sxx += (x - mean_x) * (x - mean_x);
        sxy += (x - mean_x) * (y - mean_y);
    }
    assert!(sxx > 0.0, "line fit needs at least two distinct abscissae");
    let slope = sxy / sxx;
    let intercept = mean_y - slope * mean_x;
    let mut ssr = 0.0;
    for (&x, &y) in xs.iter().zip(ys) {
        let r = y - (intercept + slope * x);
        ssr += r * r;
    }
    let slope_stderr = if n > 2 {
        (ssr / (nf - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    LineFit {
        slope,
        intercept,
        slope_stderr,
        rms_residual: (ssr / nf).sqrt(),
    }
}

/// Golden-section minimisation of a unimodal objective on `[lo, hi]`.
pub(crate) fn golden_min(f: impl Fn(f64) -> f64, lo: f64, hi: f64, iterations: usize) -> (f64, f64) {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let (mut a, mut b) = (lo, hi);
    let mut c = b - (b - a) * INV_PHI;
    let mut d = a + (b - a) * INV_PHI;
    let mut fc = f(c);
    let mut fd = f(d);
    for _ in 0..iterations {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - (b - a) * INV_PHI;
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + (b - a) * INV_PHI;
            fd = f(d);
        }
    }
    let x = 0.5 * (a + b);
    (x, f(x))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_line_has_zero_stderr() {
        let xs: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs.iter().map(|x| 3.0 * x - 1.0).collect();
        let fit = fit_line(&xs, &ys);
        assert_relative_eq!(fit.slope, 3.0, max_relative = 1e-12);
        assert_relative_eq!(fit.intercept, -1.0, max_relative = 1e-12);
        assert!(fit.slope_stderr < 1e-12);
        assert!(fit.rms_residual < 1e-12);
    }

    #[test]
    fn noisy_line_reports_positive_stderr() {
        let xs: Vec<f64> = (0..20).map(|i| i as f64).collect();
        let ys: Vec<f64> = xs
            .iter()
            .enumerate()
            .map(|(i, x)| 2.0 * x + if i % 2 == 0 { 0.1 } else { -0.1 })
            .collect();
        let fit = fit_line(&xs, &ys);
        assert!((fit.slope - 2.0).abs() < 0.02);
        assert!(fit.slope_stderr > 0.0);
    }

    #[test]
    fn golden_finds_parabola_minimum() {
        // localisation by value comparison saturates near sqrt(eps)
        let (x, fx) = golden_min(|x| (x - 1.7) * (x - 1.7) + 0.25, -5.0, 5.0, 80);
        assert_relative_eq!(x, 1.7, epsilon = 1e-6);
        assert_relative_eq!(fx, 0.25, epsilon = 1e-12);
    }
}
