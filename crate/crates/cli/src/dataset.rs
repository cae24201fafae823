//! Dataset CSV: a `status` column (1 = diseased, 0 = healthy), covariates
//! `x1..xd` and markers `y1..yK`, in any column order.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use condroc::{Matrix, Population, PopulationSample, Study};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Role {
    Status,
    Covariate(usize),
    Marker(usize),
}

fn parse_header(name: &str) -> Option<Role> {
    let name = name.trim();
    if name == "status" {
        return Some(Role::Status);
    }
    let (prefix, rest) = name.split_at(1.min(name.len()));
    let idx: usize = rest.parse().ok().filter(|&i| i >= 1)?;
    if rest.starts_with('0') {
        return None;
    }
    match prefix {
        "x" => Some(Role::Covariate(idx - 1)),
        "y" => Some(Role::Marker(idx - 1)),
        _ => None,
    }
}

/// Parsed rows split by population, before a conditioning point is chosen.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub diseased: PopulationSample,
    pub healthy: PopulationSample,
}

impl Dataset {
    pub fn dim(&self) -> usize {
        self.diseased.dim()
    }

    pub fn n_markers(&self) -> usize {
        self.diseased.n_markers()
    }

    pub fn into_study(self, x: Vec<f64>) -> CliResult<Study> {
        Ok(Study::new(self.diseased, self.healthy, x)?)
    }
}

fn contiguous(path: &Path, found: &BTreeSet<usize>, prefix: char) -> CliResult<usize> {
    let n = found.len();
    if n == 0 {
        return Err(CliError::Dataset {
            path: path.to_path_buf(),
            message: format!("no `{prefix}1` column"),
        });
    }
    if let Some(missing) = (0..n).find(|i| !found.contains(i)) {
        return Err(CliError::Dataset {
            path: path.to_path_buf(),
            message: format!("column `{prefix}{}` is missing", missing + 1),
        });
    }
    Ok(n)
}

/// Reads a dataset, applying natural logarithms to the named columns.
pub fn read_dataset(path: &Path, log_cols: &[String]) -> CliResult<Dataset> {
    let file = std::fs::File::open(path).map_err(|e| CliError::io(path, e))?;
    parse_dataset(file, path, log_cols)
}

pub fn parse_dataset<R: std::io::Read>(reader: R, path: &Path, log_cols: &[String]) -> CliResult<Dataset> {
    let owned: PathBuf = path.to_path_buf();
    let dataset_err = |message: String| CliError::Dataset {
        path: owned.clone(),
        message,
    };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| dataset_err(format!("cannot read header: {e}")))?
        .clone();
    let mut roles = Vec::with_capacity(headers.len());
    let mut seen = BTreeSet::new();
    for name in headers.iter() {
        let role = parse_header(name).ok_or_else(|| {
            dataset_err(format!("unexpected column `{name}` (expected status, x1..xd, y1..yK)"))
        })?;
        if !seen.insert(name.to_string()) {
            return Err(dataset_err(format!("duplicate column `{name}`")));
        }
        roles.push(role);
    }
    if !roles.contains(&Role::Status) {
        return Err(dataset_err("no `status` column".into()));
    }
    let xs: BTreeSet<usize> = roles
        .iter()
        .filter_map(|r| if let Role::Covariate(i) = r { Some(*i) } else { None })
        .collect();
    let ys: BTreeSet<usize> = roles
        .iter()
        .filter_map(|r| if let Role::Marker(i) = r { Some(*i) } else { None })
        .collect();
    let d = contiguous(path, &xs, 'x')?;
    let k = contiguous(path, &ys, 'y')?;
    let mut log_mask = vec![false; roles.len()];
    for col in log_cols {
        let pos = headers
            .iter()
            .position(|h| h == col.trim())
            .ok_or_else(|| dataset_err(format!("--log-cols names unknown column `{col}`")))?;
        if roles[pos] == Role::Status {
            return Err(dataset_err("the status column cannot be log-transformed".into()));
        }
        log_mask[pos] = true;
    }

    let mut rows: [(Vec<f64>, Vec<f64>); 2] = [(Vec::new(), Vec::new()), (Vec::new(), Vec::new())];
    for record in rdr.records() {
        let record = record.map_err(|e| {
            let line = e.position().map_or(0, |p| p.line());
            CliError::Ingest {
                path: owned.clone(),
                line,
                message: e.to_string(),
            }
        })?;
        let line = record.position().map_or(0, |p| p.line());
        let ingest = |message: String| CliError::Ingest {
            path: owned.clone(),
            line,
            message,
        };
        let mut x = vec![0.0; d];
        let mut y = vec![0.0; k];
        let mut status = None;
        for (pos, cell) in record.iter().enumerate() {
            let name = &headers[pos];
            if cell.is_empty() {
                return Err(ingest(format!("missing value in column `{name}`")));
            }
            if roles[pos] == Role::Status {
                status = Some(match cell {
                    "0" => 0,
                    "1" => 1,
                    other => return Err(ingest(format!("status must be 0 or 1, found `{other}`"))),
                });
                continue;
            }
            let mut v: f64 = cell
                .parse()
                .map_err(|_| ingest(format!("column `{name}`: `{cell}` is not a number")))?;
            if !v.is_finite() {
                return Err(ingest(format!("column `{name}`: non-finite value `{cell}`")));
            }
            if log_mask[pos] {
                if v <= 0.0 {
                    return Err(ingest(format!("column `{name}`: cannot take the logarithm of {v}")));
                }
                v = v.ln();
            }
            match roles[pos] {
                Role::Covariate(i) => x[i] = v,
                Role::Marker(i) => y[i] = v,
                Role::Status => unreachable!(),
            }
        }
        let s = status.ok_or_else(|| ingest("missing status".into()))?;
        rows[s].0.extend(x);
        rows[s].1.extend(y);
    }
    let build = |label: Population, (x, y): (Vec<f64>, Vec<f64>)| -> CliResult<PopulationSample> {
        if x.is_empty() {
            return Err(dataset_err(format!("no {} rows (status {})", label.name(), match label {
                Population::Diseased => 1,
                Population::Healthy => 0,
            })));
        }
        let n = x.len() / d;
        Ok(PopulationSample::new(label, Matrix::new(n, d, x)?, Matrix::new(n, k, y)?)?)
    };
    let [healthy, diseased] = rows;
    Ok(Dataset {
        diseased: build(Population::Diseased, diseased)?,
        healthy: build(Population::Healthy, healthy)?,
    })
}

/// Dataset CSV text with columns `status, x1..xd, y1..yK`, diseased rows first.
pub fn dataset_csv(study: &Study) -> String {
    let d = study.dim();
    let k = study.n_markers();
    let mut out = String::from("status");
    for j in 1..=d {
        out.push_str(&format!(",x{j}"));
    }
    for j in 1..=k {
        out.push_str(&format!(",y{j}"));
    }
    out.push('\n');
    for (sample, status) in [(&study.diseased, 1), (&study.healthy, 0)] {
        for i in 0..sample.n() {
            out.push_str(&status.to_string());
            for v in sample.covariates.row(i).iter().chain(sample.markers.row(i)) {
                out.push(',');
                out.push_str(&v.to_string());
            }
            out.push('\n');
        }
    }
    out
}
