//! Weibull leaf evidence under the `1/(alpha beta)` prior.
//!
//! With the scale integrated out, a leaf with `d` uncensored observations,
//! `L = sum of log t over uncensored members` and `S(alpha) = sum of t^alpha over
//! all members` contributes `Gamma(d) alpha^(d-1) exp((alpha-1) L) / S(alpha)^d`.
//! In `eta = log alpha`, including the Jacobian `alpha`, the log integrand is
//! `l(eta) = ln Gamma(d) + eta d + (e^eta - 1) L - d ln S(e^eta)`, and the leaf
//! evidence is approximated by Laplace's method around the mode of `l`.

use super::SurvivalDataset;
use crate::math::{ln_gamma, log_sum_exp, LN_SQRT_2PI};
use crate::{Error, Result};

/// Mode-finder convergence threshold on `|l'(eta)|`.
pub const GRADIENT_TOL: f64 = 1e-8;
pub const MAX_NEWTON_ITER: usize = 100;
/// Search interval for the golden-section fallback.
pub const FALLBACK_INTERVAL: (f64, f64) = (-20.0, 20.0);

/// What the leaf integrand needs from the observations in a leaf.
#[derive(Clone, Debug, PartialEq)]
pub struct LeafStats {
    pub members: Vec<usize>,
    /// `log t` for every member, censored or not.
    pub log_times: Vec<f64>,
    /// Number of uncensored members.
    pub uncensored: usize,
    /// Sum of `log t` over uncensored members.
    pub sum_log_event_times: f64,
    /// At least two distinct uncensored times.
    pub distinct_event_times: bool,
}

impl LeafStats {
    pub fn from_members(data: &SurvivalDataset, members: Vec<usize>) -> Self {
        let log_times: Vec<f64> = members.iter().map(|&j| data.times()[j].ln()).collect();
        let mut uncensored = 0;
        let mut sum = 0.0;
        let mut first = None;
        let mut distinct = false;
        for (&j, &lt) in members.iter().zip(&log_times) {
            if data.events()[j] {
                uncensored += 1;
                sum += lt;
                match first {
                    None => first = Some(data.times()[j]),
                    Some(t) => distinct |= t != data.times()[j],
                }
            }
        }
        Self {
            members,
            log_times,
            uncensored,
            sum_log_event_times: sum,
            distinct_event_times: distinct,
        }
    }

    /// Stats for a leaf given directly as times and event flags.
    pub fn from_observations(times: &[f64], events: &[bool]) -> Self {
        let data = SurvivalDataset::new(times.to_vec(), events.to_vec(), vec![]).expect("invalid leaf observations");
        Self::from_members(&data, (0..times.len()).collect())
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }

    /// At least two uncensored observations, not all at the same time.
    pub fn is_proper(&self) -> bool {
        self.uncensored >= 2 && self.distinct_event_times
    }

    fn check(&self) -> Result<()> {
        if self.is_proper() {
            Ok(())
        } else {
            Err(Error::ImproperLeaf {
                uncensored: self.uncensored,
            })
        }
    }
}

/// `l(eta)`, `l'(eta)` and `l''(eta)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegrandDerivatives {
    pub value: f64,
    pub first: f64,
    pub second: f64,
}

fn moments(s: &LeafStats, alpha: f64) -> (f64, f64, f64) {
    let scaled: Vec<f64> = s.log_times.iter().map(|lt| alpha * lt).collect();
    let ln_s = log_sum_exp(&scaled);
    let (mut m1, mut m2) = (0.0, 0.0);
    for (lt, a) in s.log_times.iter().zip(&scaled) {
        let w = (a - ln_s).exp();
        m1 += w * lt;
        m2 += w * lt * lt;
    }
    (ln_s, m1, m2)
}

/// The log integrand `l(eta)` (no propriety check).
pub fn log_integrand(s: &LeafStats, eta: f64) -> f64 {
    derivatives(s, eta).value
}

pub fn derivatives(s: &LeafStats, eta: f64) -> IntegrandDerivatives {
    let d = s.uncensored as f64;
    let l_sum = s.sum_log_event_times;
    let alpha = eta.exp();
    let (ln_s, m1, m2) = moments(s, alpha);
    let var = (m2 - m1 * m1).max(0.0);
    IntegrandDerivatives {
        value: ln_gamma(d) + eta * d + (alpha - 1.0) * l_sum - d * ln_s,
        first: d + alpha * l_sum - d * alpha * m1,
        second: alpha * l_sum - d * alpha * m1 - d * alpha * alpha * var,
    }
}

/// The log integrand in the form `ln Gamma(d) + (eta-1) d + e^eta L - d ln S`.
/// It differs from [`log_integrand`] by the per-leaf constant `L - d`.
pub fn offset_log_integrand(s: &LeafStats, eta: f64) -> f64 {
    let d = s.uncensored as f64;
    let (ln_s, _, _) = moments(s, eta.exp());
    ln_gamma(d) + (eta - 1.0) * d + eta.exp() * s.sum_log_event_times - d * ln_s
}

/// `e^eta (L - d * sum(t^a (log t)^2) / S)`. This is not the second
/// derivative of either integrand form; kept for comparison only.
pub fn uncorrected_second_derivative(s: &LeafStats, eta: f64) -> f64 {
    let alpha = eta.exp();
    let (_, _, m2) = moments(s, alpha);
    alpha * (s.sum_log_event_times - s.uncensored as f64 * m2)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeafMode {
    pub eta_hat: f64,
    pub value: f64,
    pub gradient: f64,
    pub second: f64,
    pub iterations: usize,
}

fn converged(g: f64, lo: f64, hi: f64) -> bool {
    g.abs() < GRADIENT_TOL || hi - lo <= 4.0 * f64::EPSILON * (1.0 + lo.abs().max(hi.abs()))
}

/// Maximiser of `l`: bracketed Newton on `l'`, falling back to golden-section
/// search on [`FALLBACK_INTERVAL`].
///
/// `l'` is positive for very negative `eta` and tends to `-inf` as `eta`
/// grows whenever the leaf is proper, so a sign change always exists.
pub fn leaf_mode(s: &LeafStats) -> Result<LeafMode> {
    s.check()?;
    if let Some(m) = bracketed_newton(s) {
        return Ok(m);
    }
    golden_fallback(s)
}

fn bracketed_newton(s: &LeafStats) -> Option<LeafMode> {
    let grad = |eta: f64| derivatives(s, eta).first;
    let (mut lo, mut hi) = (0.0f64, 0.0f64);
    let g0 = grad(0.0);
    if g0 > 0.0 {
        let mut step = 1.0;
        while grad(hi) > 0.0 {
            lo = hi;
            hi += step;
            step *= 2.0;
            if hi > 60.0 {
                return None;
            }
        }
    } else {
        let mut step = 1.0;
        while grad(lo) <= 0.0 {
            hi = lo;
            lo -= step;
            step *= 2.0;
            if lo < -60.0 {
                return None;
            }
        }
    }
    let mut eta = 0.5 * (lo + hi);
    for it in 1..=MAX_NEWTON_ITER {
        let dv = derivatives(s, eta);
        if dv.first > 0.0 {
            lo = eta;
        } else {
            hi = eta;
        }
        if converged(dv.first, lo, hi) && dv.second < 0.0 {
            return Some(LeafMode {
                eta_hat: eta,
                value: dv.value,
                gradient: dv.first,
                second: dv.second,
                iterations: it,
            });
        }
        let newton = eta - dv.first / dv.second;
        eta = if dv.second < 0.0 && newton > lo && newton < hi {
            newton
        } else {
            0.5 * (lo + hi)
        };
    }
    None
}

fn golden_fallback(s: &LeafStats) -> Result<LeafMode> {
    let f = |eta: f64| log_integrand(s, eta);
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut a, mut b) = FALLBACK_INTERVAL;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c), f(d));
    let mut it = 0;
    while b - a > 1e-12 && it < 200 {
        if fc > fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c);
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d);
        }
        it += 1;
    }
    let eta = 0.5 * (a + b);
    let dv = derivatives(s, eta);
    let tol = 1e-6 * (1.0 + s.uncensored as f64);
    if dv.first.abs() < tol && dv.second < 0.0 {
        Ok(LeafMode {
            eta_hat: eta,
            value: dv.value,
            gradient: dv.first,
            second: dv.second,
            iterations: MAX_NEWTON_ITER + it,
        })
    } else {
        Err(Error::ModeNotFound(format!(
            "gradient {} at eta = {eta} after fallback",
            dv.first
        )))
    }
}

/// Laplace approximation of `log of the integral of exp(l(eta))`:
/// `ln sqrt(2 pi) + l(eta_hat) - ln(-l''(eta_hat)) / 2`.
pub fn leaf_log_evidence(s: &LeafStats) -> Result<f64> {
    let m = leaf_mode(s)?;
    Ok(LN_SQRT_2PI + m.value - 0.5 * (-m.second).ln())
}
