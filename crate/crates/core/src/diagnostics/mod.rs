//! Monte Carlo summaries of sampler output.

mod histogram;
mod mcse;
mod report;
mod trace;

pub use histogram::{histogram, Histogram};
pub use mcse::{autocovariance, mcse, McseEstimate, MCSE_MIN_LEN};
pub use report::{HistogramReport, RunReport};
pub use trace::{inclusion_probabilities, read_csv_table, CsvFields, Trace};
