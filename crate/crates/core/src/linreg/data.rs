use std::io::{Read, Write};

use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::mcmc::RngStream;
use crate::{Error, Result};

/// Response vector and row-major `n x p` design matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct RegressionData {
    y: Vec<f64>,
    x: Vec<f64>,
    n: usize,
    p: usize,
}

impl RegressionData {
    pub fn new(y: Vec<f64>, x: Vec<f64>, p: usize) -> Result<Self> {
        let n = y.len();
        if p == 0 {
            return Err(Error::InvalidData("need at least one covariate".into()));
        }
        if x.len() != n * p {
            return Err(Error::InvalidData(format!("design has {} entries, expected {}", x.len(), n * p)));
        }
        if n <= p {
            return Err(Error::InvalidData(format!("need n > p, got n = {n}, p = {p}")));
        }
        if y.iter().chain(&x).any(|v| !v.is_finite()) {
            return Err(Error::InvalidData("non-finite value".into()));
        }
        Ok(Self { y, x, n, p })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn y(&self) -> &[f64] {
        &self.y
    }

    pub fn x(&self, row: usize, col: usize) -> f64 {
        self.x[row * self.p + col]
    }

    pub fn column(&self, col: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.x(i, col)).collect()
    }

    /// Keeps the listed columns, in the given order.
    pub fn select_columns(&self, cols: &[usize]) -> Result<Self> {
        let mut x = Vec::with_capacity(self.n * cols.len());
        for i in 0..self.n {
            for &c in cols {
                x.push(self.x(i, c));
            }
        }
        Self::new(self.y.clone(), x, cols.len())
    }

    /// CSV with a header row; `y` is the first column.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["y".to_string()];
        header.extend((1..=self.p).map(|j| format!("x{j}")));
        w.write_record(&header)?;
        for i in 0..self.n {
            let mut row = vec![format!("{:?}", self.y[i])];
            row.extend((0..self.p).map(|j| format!("{:?}", self.x(i, j))));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(reader);
        let p = r.headers()?.len().saturating_sub(1);
        let mut y = Vec::new();
        let mut x = Vec::new();
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            if rec.len() != p + 1 {
                return Err(Error::InvalidData(format!("row {} has {} fields, expected {}", line + 1, rec.len(), p + 1)));
            }
            for (j, f) in rec.iter().enumerate() {
                let v: f64 = f
                    .trim()
                    .parse()
                    .map_err(|_| Error::InvalidData(format!("row {}: non-numeric field {f:?}", line + 1)))?;
                if j == 0 {
                    y.push(v);
                } else {
                    x.push(v);
                }
            }
        }
        Self::new(y, x, p)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneratorConfig {
    pub n: usize,
    pub p: usize,
    pub collinear: bool,
    pub noise_variance: f64,
}

impl Default for GeneratorConfig {
    fn default() -> Self {
        Self {
            n: 180,
            p: 15,
            collinear: false,
            noise_variance: 6.25,
        }
    }
}

#[derive(Clone, Debug)]
pub struct GeneratedDataset {
    pub data: RegressionData,
    pub true_gamma: Vec<bool>,
    pub true_beta: Vec<f64>,
}

/// Synthetic regression data with `beta_j = 2j/15` and every covariate active.
///
/// Columns are iid standard normal, or `X_j = Z_j + 2 Z_{p+1}` with iid
/// standard normal `Z` when `collinear` is set. `Y ~ N(X beta, noise_variance I)`.
#[allow(clippy::needless_range_loop)]
pub fn generate_dataset(cfg: &GeneratorConfig, seed: u64) -> Result<GeneratedDataset> {
    let GeneratorConfig { n, p, collinear, noise_variance } = *cfg;
    if !(noise_variance > 0.0) {
        return Err(Error::InvalidData("noise variance must be positive".into()));
    }
    let mut rng = RngStream::new(seed, 0);
    let mut normal = || -> f64 { StandardNormal.sample(&mut rng) };
    let n_z = if collinear { p + 1 } else { p };
    // column-major draws, one column at a time
    let z: Vec<Vec<f64>> = (0..n_z).map(|_| (0..n).map(|_| normal()).collect()).collect();
    let beta: Vec<f64> = (1..=p).map(|j| 2.0 * j as f64 / 15.0).collect();
    let sd = noise_variance.sqrt();
    let mut x = Vec::with_capacity(n * p);
    let mut y = Vec::with_capacity(n);
    for i in 0..n {
        let mut mean = 0.0;
        for j in 0..p {
            let v = if collinear { z[j][i] + 2.0 * z[p][i] } else { z[j][i] };
            x.push(v);
            mean += v * beta[j];
        }
        y.push(mean + sd * normal());
    }
    Ok(GeneratedDataset {
        data: RegressionData::new(y, x, p)?,
        true_gamma: vec![true; p],
        true_beta: beta,
    })
}
