use std::collections::HashMap;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovariateKind {
    Continuous,
    Ordinal,
    Categorical,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    pub kind: CovariateKind,
    /// Allowed levels for a categorical covariate. Any level is accepted when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub levels: Option<Vec<String>>,
}

/// Column layout of a survival CSV.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSchema {
    #[serde(default = "default_time")]
    pub time: String,
    #[serde(default = "default_event")]
    pub event: String,
    pub covariates: Vec<CovariateSpec>,
}

fn default_time() -> String {
    "time".into()
}

fn default_event() -> String {
    "event".into()
}

impl SurvivalSchema {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Ok(serde_json::from_str(&text)?)
    }
}

#[derive(Debug, thiserror::Error)]
pub enum IngestError {
    #[error("column {0:?} declared in the schema is missing from the header")]
    MissingColumn(String),
    #[error("row {row}: missing value in column {column:?}")]
    MissingValue { row: usize, column: String },
    #[error("row {row}: column {column:?} has malformed number {value:?}")]
    Malformed { row: usize, column: String, value: String },
    #[error("row {row}: column {column:?} has unknown category {value:?}")]
    UnknownCategory { row: usize, column: String, value: String },
    #[error("row {row}: survival time {value} is not positive")]
    NonPositiveTime { row: usize, value: f64 },
    #[error("row {row}: event flag {value:?} is not 0 or 1")]
    BadEvent { row: usize, value: String },
    #[error("row {row}: {message}")]
    Csv { row: usize, message: String },
    #[error("no data rows")]
    Empty,
}

#[derive(Clone, Debug, PartialEq)]
pub enum CovariateValues {
    Numeric(Vec<f64>),
    /// `codes[j]` indexes into `levels`.
    Categorical { levels: Vec<String>, codes: Vec<usize> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct Covariate {
    pub name: String,
    pub kind: CovariateKind,
    pub values: CovariateValues,
}

impl Covariate {
    pub fn continuous(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Continuous,
            values: CovariateValues::Numeric(values),
        }
    }

    pub fn ordinal(name: &str, values: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Ordinal,
            values: CovariateValues::Numeric(values),
        }
    }

    pub fn categorical(name: &str, levels: Vec<String>, codes: Vec<usize>) -> Self {
        Self {
            name: name.into(),
            kind: CovariateKind::Categorical,
            values: CovariateValues::Categorical { levels, codes },
        }
    }

    pub fn len(&self) -> usize {
        match &self.values {
            CovariateValues::Numeric(v) => v.len(),
            CovariateValues::Categorical { codes, .. } => codes.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    fn render(&self, j: usize) -> String {
        match &self.values {
            CovariateValues::Numeric(v) => format!("{:?}", v[j]),
            CovariateValues::Categorical { levels, codes } => levels[codes[j]].clone(),
        }
    }
}

/// Right-censored survival times with typed covariates.
#[derive(Clone, Debug, PartialEq)]
pub struct SurvivalDataset {
    times: Vec<f64>,
    events: Vec<bool>,
    covariates: Vec<Covariate>,
}

impl SurvivalDataset {
    pub fn new(times: Vec<f64>, events: Vec<bool>, covariates: Vec<Covariate>) -> Result<Self> {
        let n = times.len();
        if n == 0 {
            return Err(Error::InvalidData("empty survival dataset".into()));
        }
        if events.len() != n {
            return Err(Error::InvalidData("times and events differ in length".into()));
        }
        if let Some(t) = times.iter().find(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::InvalidData(format!("survival time {t} is not positive and finite")));
        }
        for c in &covariates {
            if c.len() != n {
                return Err(Error::InvalidData(format!("covariate {:?} has {} values, expected {n}", c.name, c.len())));
            }
            match (&c.kind, &c.values) {
                (CovariateKind::Categorical, CovariateValues::Categorical { levels, codes }) => {
                    if codes.iter().any(|&k| k >= levels.len()) {
                        return Err(Error::InvalidData(format!("covariate {:?} has an out-of-range level code", c.name)));
                    }
                }
                (CovariateKind::Categorical, _) | (_, CovariateValues::Categorical { .. }) => {
                    return Err(Error::InvalidData(format!("covariate {:?}: kind and values disagree", c.name)));
                }
                (_, CovariateValues::Numeric(v)) => {
                    if v.iter().any(|x| !x.is_finite()) {
                        return Err(Error::InvalidData(format!("covariate {:?} has a non-finite value", c.name)));
                    }
                }
            }
        }
        Ok(Self { times, events, covariates })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn events(&self) -> &[bool] {
        &self.events
    }

    pub fn covariates(&self) -> &[Covariate] {
        &self.covariates
    }

    /// Reads a CSV whose columns are named in `schema`. Extra columns are ignored.
    /// Row numbers in errors count data rows from 1.
    pub fn read_csv<R: Read>(reader: R, schema: &SurvivalSchema) -> Result<Self> {
        let mut r = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
        let col = |name: &str| -> std::result::Result<usize, IngestError> {
            header
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
        };
        let time_col = col(&schema.time)?;
        let event_col = col(&schema.event)?;
        let cov_cols = schema
            .covariates
            .iter()
            .map(|c| col(&c.name))
            .collect::<std::result::Result<Vec<_>, _>>()?;

        let mut times = Vec::new();
        let mut events = Vec::new();
        let mut numeric: Vec<Vec<f64>> = vec![Vec::new(); schema.covariates.len()];
        let mut codes: Vec<Vec<usize>> = vec![Vec::new(); schema.covariates.len()];
        let mut levels: Vec<Vec<String>> = schema
            .covariates
            .iter()
            .map(|c| c.levels.clone().unwrap_or_default())
            .collect();
        let mut level_index: Vec<HashMap<String, usize>> = levels
            .iter()
            .map(|ls| ls.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect())
            .collect();

        for (i, rec) in r.records().enumerate() {
            let row = i + 1;
            let rec = rec.map_err(|e| IngestError::Csv { row, message: e.to_string() })?;
            let field = |c: usize, name: &str| -> std::result::Result<String, IngestError> {
                match rec.get(c) {
                    Some(v) if !v.is_empty() && !v.eq_ignore_ascii_case("na") => Ok(v.to_string()),
                    _ => Err(IngestError::MissingValue { row, column: name.to_string() }),
                }
            };
            let number = |c: usize, name: &str| -> std::result::Result<f64, IngestError> {
                let v = field(c, name)?;
                match v.parse::<f64>() {
                    Ok(x) if x.is_finite() => Ok(x),
                    _ => Err(IngestError::Malformed { row, column: name.to_string(), value: v }),
                }
            };
            let t = number(time_col, &schema.time)?;
            if t <= 0.0 {
                return Err(IngestError::NonPositiveTime { row, value: t }.into());
            }
            let e = match field(event_col, &schema.event)?.as_str() {
                "0" => false,
                "1" => true,
                other => return Err(IngestError::BadEvent { row, value: other.to_string() }.into()),
            };
            times.push(t);
            events.push(e);
            for (k, spec) in schema.covariates.iter().enumerate() {
                match spec.kind {
                    CovariateKind::Continuous | CovariateKind::Ordinal => {
                        numeric[k].push(number(cov_cols[k], &spec.name)?);
                    }
                    CovariateKind::Categorical => {
                        let v = field(cov_cols[k], &spec.name)?;
                        let code = match level_index[k].get(&v) {
                            Some(&c) => c,
                            None if spec.levels.is_none() => {
                                levels[k].push(v.clone());
                                level_index[k].insert(v, levels[k].len() - 1);
                                levels[k].len() - 1
                            }
                            None => {
                                return Err(IngestError::UnknownCategory { row, column: spec.name.clone(), value: v }.into())
                            }
                        };
                        codes[k].push(code);
                    }
                }
            }
        }
        if times.is_empty() {
            return Err(IngestError::Empty.into());
        }
        let covariates = schema
            .covariates
            .iter()
            .enumerate()
            .map(|(k, spec)| Covariate {
                name: spec.name.clone(),
                kind: spec.kind,
                values: match spec.kind {
                    CovariateKind::Categorical => CovariateValues::Categorical {
                        levels: std::mem::take(&mut levels[k]),
                        codes: std::mem::take(&mut codes[k]),
                    },
                    _ => CovariateValues::Numeric(std::mem::take(&mut numeric[k])),
                },
            })
            .collect();
        Self::new(times, events, covariates)
    }

    pub fn read_csv_file(path: &Path, schema: &SurvivalSchema) -> Result<Self> {
        Self::read_csv(std::fs::File::open(path)?, schema)
    }

    /// Schema describing this dataset, with categorical levels listed.
    pub fn schema(&self) -> SurvivalSchema {
        SurvivalSchema {
            time: default_time(),
            event: default_event(),
            covariates: self
                .covariates
                .iter()
                .map(|c| CovariateSpec {
                    name: c.name.clone(),
                    kind: c.kind,
                    levels: match &c.values {
                        CovariateValues::Categorical { levels, .. } => Some(levels.clone()),
                        CovariateValues::Numeric(_) => None,
                    },
                })
                .collect(),
        }
    }

    /// Writes `time,event,<covariates>` in the layout [`Self::schema`] describes.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["time".to_string(), "event".to_string()];
        header.extend(self.covariates.iter().map(|c| c.name.clone()));
        w.write_record(&header)?;
        for j in 0..self.len() {
            let mut row = vec![format!("{:?}", self.times[j]), (self.events[j] as u8).to_string()];
            row.extend(self.covariates.iter().map(|c| c.render(j)));
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }
}
