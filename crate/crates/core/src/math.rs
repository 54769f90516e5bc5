//! Small numeric helpers shared across targets.

/// `log(sum(exp(xs)))` without overflow. Returns `-inf` for an empty slice or
/// when every term is `-inf`.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let sum: f64 = xs.iter().map(|x| (x - max).exp()).sum();
    max + sum.ln()
}

pub fn ln_gamma(x: f64) -> f64 {
    libm::lgamma(x)
}

pub const LN_SQRT_2PI: f64 = 0.918_938_533_204_672_8;
