use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Equal-width bins on `[lo, hi)` plus under/overflow counts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl Histogram {
    pub fn total(&self) -> u64 {
        self.underflow + self.overflow + self.counts.iter().sum::<u64>()
    }

    pub fn bin_width(&self) -> f64 {
        (self.hi - self.lo) / self.counts.len() as f64
    }

    /// `(lower edge, upper edge)` of bin `i`.
    pub fn edges(&self, i: usize) -> (f64, f64) {
        let w = self.bin_width();
        (self.lo + w * i as f64, self.lo + w * (i + 1) as f64)
    }

    pub fn write_csv<W: std::io::Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["bin_lo", "bin_hi", "count"])?;
        w.write_record(["-inf".to_string(), format!("{:?}", self.lo), self.underflow.to_string()])?;
        for (i, c) in self.counts.iter().enumerate() {
            let (a, b) = self.edges(i);
            w.write_record([format!("{a:?}"), format!("{b:?}"), c.to_string()])?;
        }
        w.write_record([format!("{:?}", self.hi), "inf".to_string(), self.overflow.to_string()])?;
        w.flush()?;
        Ok(())
    }
}

pub fn histogram(xs: &[f64], lo: f64, hi: f64, n_bins: usize) -> Result<Histogram> {
    if n_bins == 0 || !(lo < hi) || !lo.is_finite() || !hi.is_finite() {
        return Err(Error::InvalidHistogram);
    }
    let mut h = Histogram {
        lo,
        hi,
        counts: vec![0; n_bins],
        underflow: 0,
        overflow: 0,
    };
    let scale = n_bins as f64 / (hi - lo);
    for &x in xs {
        if x < lo {
            h.underflow += 1;
        } else if x >= hi || x.is_nan() {
            h.overflow += 1;
        } else {
            let i = (((x - lo) * scale) as usize).min(n_bins - 1);
            h.counts[i] += 1;
        }
    }
    Ok(h)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn midpoint_single_bin() {
        let h = histogram(&[0.5], 0.0, 1.0, 4).unwrap();
        assert_eq!(h.counts, vec![0, 0, 1, 0]);
    }

    #[test]
    fn uniform_grid() {
        let xs: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        let h = histogram(&xs, 0.0, 1.0, 10).unwrap();
        assert_eq!(h.counts, vec![10; 10]);
        assert_eq!(h.underflow + h.overflow, 0);
    }

    #[test]
    fn invalid_ranges() {
        assert!(histogram(&[1.0], 1.0, 1.0, 3).is_err());
        assert!(histogram(&[1.0], 0.0, 1.0, 0).is_err());
    }

    proptest! {
        #[test]
        fn total_equals_length(xs in proptest::collection::vec(-20f64..20.0, 0..200), bins in 1usize..30) {
            let h = histogram(&xs, -5.0, 5.0, bins).unwrap();
            prop_assert_eq!(h.total(), xs.len() as u64);
        }
    }
}
