use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{Histogram, McseEstimate};
use crate::Result;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HistogramReport {
    pub lo: f64,
    pub hi: f64,
    pub counts: Vec<u64>,
    pub underflow: u64,
    pub overflow: u64,
}

impl From<&Histogram> for HistogramReport {
    fn from(h: &Histogram) -> Self {
        Self {
            lo: h.lo,
            hi: h.hi,
            counts: h.counts.clone(),
            underflow: h.underflow,
            overflow: h.overflow,
        }
    }
}

/// Summary of one sampler run, exported as JSON.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub sampler: String,
    pub target: String,
    pub n_iter: usize,
    pub seed: u64,
    pub inclusion_probabilities: Vec<f64>,
    pub mcse: Vec<f64>,
    /// Autocovariance truncation window used for each `mcse` entry.
    pub mcse_windows: Vec<usize>,
    pub mcse_window_rule: String,
    pub acceptance_rates: Vec<f64>,
    pub swap_rate: f64,
    pub histogram: Option<HistogramReport>,
}

impl RunReport {
    pub const WINDOW_RULE: &'static str = "initial positive sequence: first even lag 2k with A(2k)+A(2k+1) <= 0, minimum 1";

    pub fn set_mcse(&mut self, estimates: &[McseEstimate]) {
        self.mcse = estimates.iter().map(|e| e.mcse).collect();
        self.mcse_windows = estimates.iter().map(|e| e.window).collect();
        self.mcse_window_rule = Self::WINDOW_RULE.to_string();
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path)?;
        serde_json::to_writer_pretty(std::io::BufWriter::new(file), self)?;
        Ok(())
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Ok(serde_json::from_reader(std::io::BufReader::new(file))?)
    }
}
