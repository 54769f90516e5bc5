use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Product-limit estimate of the survival function at each of `eval_times`.
///
/// Observations censored at `t` still count as at risk at `t`.
pub fn kaplan_meier(times: &[f64], events: &[bool], eval_times: &[f64]) -> Result<Vec<f64>> {
    if times.is_empty() {
        return Err(Error::InvalidData("Kaplan-Meier needs at least one observation".into()));
    }
    if times.len() != events.len() {
        return Err(Error::InvalidData("times and events differ in length".into()));
    }
    let mut order: Vec<usize> = (0..times.len()).collect();
    order.sort_by(|&a, &b| times[a].total_cmp(&times[b]));
    // (event time, survival just after it)
    let mut steps: Vec<(f64, f64)> = Vec::new();
    let mut at_risk = times.len();
    let mut surv = 1.0;
    let mut i = 0;
    while i < order.len() {
        let t = times[order[i]];
        let mut deaths = 0;
        let mut ties = 0;
        while i + ties < order.len() && times[order[i + ties]] == t {
            deaths += events[order[i + ties]] as usize;
            ties += 1;
        }
        if deaths > 0 {
            surv *= 1.0 - deaths as f64 / at_risk as f64;
            steps.push((t, surv));
        }
        at_risk -= ties;
        i += ties;
    }
    Ok(eval_times
        .iter()
        .map(|&t| {
            let k = steps.partition_point(|&(s, _)| s <= t);
            if k == 0 {
                1.0
            } else {
                steps[k - 1].1
            }
        })
        .collect())
}

/// Evaluation times of the per-leaf table, in months.
pub const KM_TABLE_TIMES: [f64; 3] = [12.0, 24.0, 36.0];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KmRow {
    pub leaf: usize,
    pub size: usize,
    #[serde(rename = "S12")]
    pub s12: f64,
    #[serde(rename = "S24")]
    pub s24: f64,
    #[serde(rename = "S36")]
    pub s36: f64,
}

impl KmRow {
    pub fn new(leaf: usize, times: &[f64], events: &[bool]) -> Result<Self> {
        let s = kaplan_meier(times, events, &KM_TABLE_TIMES)?;
        Ok(Self {
            leaf,
            size: times.len(),
            s12: s[0],
            s24: s[1],
            s36: s[2],
        })
    }
}

pub fn write_km_table<W: Write>(rows: &[KmRow], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_km_table<R: Read>(reader: R) -> Result<Vec<KmRow>> {
    let mut r = csv::Reader::from_reader(reader);
    Ok(r.deserialize().collect::<std::result::Result<_, _>>()?)
}
