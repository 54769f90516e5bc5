use std::io::{Read, Write};

use crate::mcmc::ChainState;
use crate::samplers::{EnsembleStats, Recorder};
use crate::{Error, Result};

/// The sample path of one chain, with the log density at every entry.
#[derive(Clone, Debug, PartialEq)]
pub struct Trace<S> {
    chain: usize,
    states: Vec<S>,
    log_densities: Vec<f64>,
}

impl<S> Trace<S> {
    /// An empty trace that will follow chain `chain` of an ensemble.
    pub fn new(chain: usize) -> Self {
        Self::with_capacity(chain, 0)
    }

    pub fn with_capacity(chain: usize, capacity: usize) -> Self {
        Self {
            chain,
            states: Vec::with_capacity(capacity),
            log_densities: Vec::with_capacity(capacity),
        }
    }

    pub fn from_states(states: Vec<S>, log_densities: Vec<f64>) -> Self {
        assert_eq!(states.len(), log_densities.len());
        Self {
            chain: 0,
            states,
            log_densities,
        }
    }

    pub fn chain(&self) -> usize {
        self.chain
    }

    pub fn states(&self) -> &[S] {
        &self.states
    }

    pub fn log_densities(&self) -> &[f64] {
        &self.log_densities
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn push(&mut self, state: S, log_density: f64) {
        self.states.push(state);
        self.log_densities.push(log_density);
    }

    /// A scalar summary of every state.
    pub fn map<F: Fn(&S) -> f64>(&self, f: F) -> Vec<f64> {
        self.states.iter().map(f).collect()
    }
}

impl<S: Clone> Recorder<S> for Trace<S> {
    fn record(&mut self, _iteration: usize, chains: &[ChainState<S>], _stats: &EnsembleStats) {
        let c = &chains[self.chain];
        self.push(c.value().clone(), c.log_density());
    }
}

/// Column rendering for trace export.
pub trait CsvFields {
    fn field_names(&self) -> Vec<String>;
    fn fields(&self) -> Vec<String>;
}

impl CsvFields for f64 {
    fn field_names(&self) -> Vec<String> {
        vec!["value".into()]
    }
    fn fields(&self) -> Vec<String> {
        vec![format!("{self:?}")]
    }
}

impl CsvFields for usize {
    fn field_names(&self) -> Vec<String> {
        vec!["state".into()]
    }
    fn fields(&self) -> Vec<String> {
        vec![self.to_string()]
    }
}

impl<S: CsvFields> Trace<S> {
    /// One row per iteration: `iteration, <state fields>, log_density`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let Some(first) = self.states.first() else {
            return Err(Error::EmptyTrace);
        };
        let mut header = vec!["iteration".to_string()];
        header.extend(first.field_names());
        header.push("log_density".into());
        w.write_record(&header)?;
        for (i, (s, ld)) in self.states.iter().zip(&self.log_densities).enumerate() {
            let mut row = vec![(i + 1).to_string()];
            row.extend(s.fields());
            row.push(format!("{ld:?}"));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Reads a numeric CSV with a header row.
pub fn read_csv_table<R: Read>(reader: R) -> Result<(Vec<String>, Vec<Vec<f64>>)> {
    let mut r = csv::Reader::from_reader(reader);
    let header = r.headers()?.iter().map(str::to_string).collect();
    let mut rows = Vec::new();
    for rec in r.records() {
        let rec = rec?;
        let row = rec
            .iter()
            .map(|f| {
                f.trim()
                    .parse::<f64>()
                    .map_err(|_| Error::InvalidData(format!("non-numeric field {f:?}")))
            })
            .collect::<Result<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok((header, rows))
}

/// Coordinate-wise mean of a trace of binary vectors.
pub fn inclusion_probabilities<V: AsRef<[bool]>>(states: &[V]) -> Result<Vec<f64>> {
    let first = states.first().ok_or(Error::EmptyTrace)?;
    let p = first.as_ref().len();
    let mut counts = vec![0u64; p];
    for s in states {
        let s = s.as_ref();
        if s.len() != p {
            return Err(Error::RaggedTrace {
                expected: p,
                got: s.len(),
            });
        }
        for (c, &b) in counts.iter_mut().zip(s) {
            *c += b as u64;
        }
    }
    let n = states.len() as f64;
    Ok(counts.into_iter().map(|c| c as f64 / n).collect())
}
