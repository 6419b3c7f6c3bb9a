// Copyright 2026 The qntk-lab Developers
// SPDX-License-Identifier: Apache-2.0

//! Small statistics helpers shared by the oracles and experiment runners.

/// Kahan-compensated sum. Results depend only on the order of `values`.
pub fn kahan_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for v in values {
        let y = v - comp;
        let t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    sum
}

/// Mean, sample standard deviation (n−1 denominator) and standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Summary {
    pub count: usize,
    pub mean: f64,
    pub std_dev: f64,
    pub std_err: f64,
}

pub fn summarize(values: &[f64]) -> Summary {
    let count = values.len();
    if count == 0 {
        return Summary { count, mean: f64::NAN, std_dev: f64::NAN, std_err: f64::NAN };
    }
    let mean = kahan_sum(values.iter().copied()) / count as f64;
    let std_dev = if count > 1 {
        let ss = kahan_sum(values.iter().map(|v| (v - mean) * (v - mean)));
        (ss / (count - 1) as f64).sqrt()
    } else {
        0.0
    };
    Summary { count, mean, std_dev, std_err: std_dev / (count as f64).sqrt() }
}

/// Ordinary least-squares line `y = intercept + slope·x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

/// Fits a line through at least two points with distinct abscissae.
pub fn fit_line(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    if n < 2 {
        return None;
    }
    let mx = kahan_sum(xs.iter().copied()) / n as f64;
    let my = kahan_sum(ys.iter().copied()) / n as f64;
    let sxx = kahan_sum(xs.iter().map(|x| (x - mx) * (x - mx)));
    if sxx == 0.0 {
        return None;
    }
    let sxy = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)));
    let syy = kahan_sum(ys.iter().map(|y| (y - my) * (y - my)));
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let sse = kahan_sum(xs.iter().zip(ys).map(|(x, y)| (y - intercept - slope * x).powi(2)));
    let r_squared = if syy == 0.0 { 1.0 } else { 1.0 - sse / syy };
    Some(LineFit { slope, intercept, r_squared })
}
