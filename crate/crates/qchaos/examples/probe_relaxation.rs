//! Scratch probe: "reaches and stays" onset with smoothed local slopes.
//!
//! local slopes over windows of w = w_mult*sqrt(N); median-filter the slope
//! sequence over w; asymptote = median smoothed slope of the last third;
//! onset = start of the final contiguous in-band run reaching the end.

use qchaos::openrotor::{survival_series, RotorParams};

fn slope(log_p: &[f64], start: usize, count: usize) -> f64 {
    let xs: Vec<f64> = (start..start + count).map(|t| t as f64).collect();
    let mx = xs.iter().sum::<f64>() / count as f64;
    let my = log_p[start..start + count].iter().sum::<f64>() / count as f64;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&log_p[start..start + count]) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    sxy / sxx
}

fn median(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v[v.len() / 2]
}

fn fit_loglog(samples: &[(f64, f64)]) -> (f64, f64) {
    let xs: Vec<f64> = samples.iter().map(|&(x, _)| x.ln()).collect();
    let ys: Vec<f64> = samples.iter().map(|&(_, y)| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxx, mut sxy) = (0.0, 0.0);
    for (x, y) in xs.iter().zip(&ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    let s = sxy / sxx;
    let b = my - s * mx;
    let mut ssr = 0.0;
    for (x, y) in xs.iter().zip(&ys) {
        let r = y - b - s * x;
        ssr += r * r;
    }
    (s, (ssr / (n - 2.0) / sxx).sqrt())
}

fn onset(log_p: &[f64], w: usize, band: f64) -> Option<f64> {
    let len = log_p.len();
    if len < 3 * w + 2 {
        return None;
    }
    let raw: Vec<f64> = (0..len - w).map(|s| slope(log_p, s, w)).collect();
    let smoothed: Vec<f64> = (0..raw.len())
        .map(|i| {
            let lo = i.saturating_sub(w / 2);
            let hi = (i + w / 2 + 1).min(raw.len());
            median(&raw[lo..hi])
        })
        .collect();
    let tail_third = &smoothed[smoothed.len() * 2 / 3..];
    let asym = median(tail_third);
    if asym >= -1e-9 {
        return None;
    }
    let in_band = |s: f64| (s - asym).abs() <= band * asym.abs();
    if !in_band(*smoothed.last().unwrap()) {
        return None;
    }
    let last_exit = (0..smoothed.len()).rev().find(|&i| !in_band(smoothed[i]));
    let start = match last_exit {
        None => 0,
        Some(i) if i + 1 >= smoothed.len() => return None,
        Some(i) => i + 1,
    };
    Some(start as f64 + w as f64 / 2.0)
}

fn main() {
    let sets: [&[u32]; 2] = [
        &[64, 128, 256, 512, 1024],
        &[80, 112, 160, 224, 320, 448, 640, 896],
    ];
    let mut curves = Vec::new();
    for set in sets {
        for &n in set {
            for t_mult in [12.0, 16.0] {
                let params = RotorParams::from_scaling(n, 7.0, 4.0, 4).unwrap();
                let t_max = ((t_mult * (n as f64).sqrt()).ceil() as usize).min(100_000);
                let series = survival_series(&params, t_max).unwrap();
                let log_p: Vec<f64> = series
                    .values()
                    .iter()
                    .take_while(|&&p| p > 1e-280)
                    .map(|&p| p.ln())
                    .collect();
                curves.push((n, t_mult, log_p, set.len() == 5));
            }
        }
    }

    for w_mult in [1.0, 1.5, 2.0] {
        for band in [0.25, 0.35, 0.5] {
            for t_mult in [12.0, 16.0] {
                let (mut acc, mut val) = (Vec::new(), Vec::new());
                let mut display = String::new();
                for (n, tm, log_p, is_acc) in &curves {
                    if *tm != t_mult {
                        continue;
                    }
                    let w = ((*n as f64).sqrt() * w_mult).round().max(8.0) as usize;
                    if let Some(tau) = onset(log_p, w, band) {
                        display.push_str(&format!("{n}:{tau:.0} "));
                        if *is_acc {
                            acc.push((*n as f64, tau.max(1.0)));
                        } else {
                            val.push((*n as f64, tau.max(1.0)));
                        }
                    }
                }
                let (ea, sa) = fit_loglog(&acc);
                let (ev, sv) = fit_loglog(&val);
                println!(
                    "w_mult {w_mult:3.1} band {band:4.2} t_mult {t_mult:4.1}: acc {ea:6.3}+-{sa:5.3} ({}) val {ev:6.3}+-{sv:5.3} ({})",
                    acc.len(),
                    val.len()
                );
                println!("    {display}");
            }
        }
    }

    let pure: Vec<f64> = (0..=300).map(|t| -(t as f64) / 50.0).collect();
    let cross: Vec<f64> = (0..=400)
        .map(|t| {
            if t < 100 {
                -((1.0 + t as f64).ln())
            } else {
                -(101f64.ln()) - (t as f64 - 100.0) / 30.0
            }
        })
        .collect();
    println!(
        "synthetics (w=8, band 0.35): pure {:?} crossover {:?}",
        onset(&pure, 8, 0.35),
        onset(&cross, 8, 0.35)
    );
}
