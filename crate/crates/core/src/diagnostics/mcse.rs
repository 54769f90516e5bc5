use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub const MCSE_MIN_LEN: usize = 100;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McseEstimate {
    pub mcse: f64,
    /// Lags `|h| < window` entered the sum.
    pub window: usize,
}

/// Mean-subtracted autocovariances `A(0), .., A(N-1)` with the biased `1/N`
/// normalisation, computed by zero-padded FFT.
pub fn autocovariance(xs: &[f64]) -> Vec<f64> {
    let n = xs.len();
    if n == 0 {
        return Vec::new();
    }
    let mean = xs.iter().sum::<f64>() / n as f64;
    let len = (2 * n).next_power_of_two();
    let mut buf: Vec<Complex<f64>> = xs
        .iter()
        .map(|x| Complex::new(x - mean, 0.0))
        .chain(std::iter::repeat(Complex::new(0.0, 0.0)))
        .take(len)
        .collect();
    let mut planner = FftPlanner::new();
    planner.plan_fft_forward(len).process(&mut buf);
    for z in buf.iter_mut() {
        *z = Complex::new(z.norm_sqr(), 0.0);
    }
    planner.plan_fft_inverse(len).process(&mut buf);
    let scale = 1.0 / (len as f64 * n as f64);
    buf[..n].iter().map(|z| z.re * scale).collect()
}

/// Monte Carlo standard error of the trace mean:
/// `sqrt((1/N) * sum_{|h| < W} (1 - |h|/N) A(h))`.
///
/// The window `W` is the first even lag `2k` at which `A(2k) + A(2k+1) <= 0`
/// (initial positive sequence), floored at 1 so the lag-0 term is always
/// included. A constant trace gives 0.
pub fn mcse(xs: &[f64]) -> Result<McseEstimate> {
    let n = xs.len();
    if n < MCSE_MIN_LEN {
        return Err(Error::TraceTooShort {
            len: n,
            min: MCSE_MIN_LEN,
        });
    }
    if xs.iter().all(|x| *x == xs[0]) {
        return Ok(McseEstimate { mcse: 0.0, window: 1 });
    }
    let acov = autocovariance(xs);
    let mut window = n;
    let mut k = 0;
    while 2 * k + 1 < n {
        if acov[2 * k] + acov[2 * k + 1] <= 0.0 {
            window = 2 * k;
            break;
        }
        k += 1;
    }
    let window = window.max(1);
    let nf = n as f64;
    let mut sum = acov[0];
    for (h, a) in acov.iter().enumerate().take(window).skip(1) {
        sum += 2.0 * (1.0 - h as f64 / nf) * a;
    }
    Ok(McseEstimate {
        mcse: (sum.max(0.0) / nf).sqrt(),
        window,
    })
}
