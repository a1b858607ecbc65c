use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::anneal::Branch;
use crate::curve::{CurvePoint, Theorem3Report};
use crate::error::{Error, Result};
use crate::prob::{JointDistribution, ObjectiveKind};
use crate::spectral::{BifurcationEvent, BifurcationKind};

/// Header of the branch CSV.
pub const BRANCH_COLUMNS: [&str; 7] = [
    "beta",
    "branch_id",
    "I_xyn",
    "G",
    "kkt_residual",
    "solves_lagrangian",
    "solves_constrained",
];

/// Header of the curve CSV.
pub const CURVE_COLUMNS: [&str; 5] = ["I0", "R", "beta", "branch_id", "kkt_residual"];

/// Unit for information-valued outputs. Computation is always in nats.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Unit {
    #[default]
    Nats,
    Bits,
}

impl Unit {
    /// Converts a value in nats.
    pub fn from_nats(self, v: f64) -> f64 {
        match self {
            Unit::Nats => v,
            Unit::Bits => v / std::f64::consts::LN_2,
        }
    }
}

impl fmt::Display for Unit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Unit::Nats => "nats",
            Unit::Bits => "bits",
        })
    }
}

impl FromStr for Unit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "nats" => Ok(Unit::Nats),
            "bits" => Ok(Unit::Bits),
            other => Err(Error::Parse(format!("unknown unit {other:?}"))),
        }
    }
}

/// Scientific notation with 17 significant digits; parses back to the
/// same `f64`.
pub fn format_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Reads a joint distribution stored as a `K_X,K` header line followed by
/// `K_X` rows of `K` comma-separated probabilities.
pub fn load_joint(path: impl AsRef<Path>) -> Result<JointDistribution> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)?;
    let mut records = reader.records();
    let header = records
        .next()
        .ok_or_else(|| Error::Parse("empty file".into()))??;
    if header.len() != 2 {
        return Err(Error::Parse(format!(
            "header must be `K_X,K`, found {} fields",
            header.len()
        )));
    }
    let dim = |i: usize| -> Result<usize> {
        header[i]
            .parse()
            .map_err(|_| Error::Parse(format!("bad dimension {:?} in header", &header[i])))
    };
    let (kx, k) = (dim(0)?, dim(1)?);
    let mut values = Vec::with_capacity(kx * k);
    for (row, rec) in records.enumerate() {
        let rec = rec?;
        if row >= kx {
            return Err(Error::Parse(format!("more than {kx} data rows")));
        }
        if rec.len() != k {
            return Err(Error::Parse(format!(
                "row {row} has {} entries, expected {k}",
                rec.len()
            )));
        }
        for (col, field) in rec.iter().enumerate() {
            let v: f64 = field
                .parse()
                .map_err(|_| Error::Parse(format!("row {row}, column {col}: {field:?}")))?;
            values.push(v);
        }
    }
    if values.len() != kx * k {
        return Err(Error::Parse(format!(
            "expected {kx} data rows, found {}",
            values.len() / k.max(1)
        )));
    }
    JointDistribution::new(DMatrix::from_row_slice(kx, k, &values))
}

pub fn save_joint(p: &JointDistribution, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().flexible(true).from_path(path)?;
    let m = p.matrix();
    w.write_record([m.nrows().to_string(), m.ncols().to_string()])?;
    for row in m.row_iter() {
        w.write_record(row.iter().map(|&v| format_f64(v)))?;
    }
    w.flush()?;
    Ok(())
}

fn flag(v: Option<bool>) -> String {
    match v {
        Some(true) => "true".into(),
        Some(false) => "false".into(),
        None => "NA".into(),
    }
}

/// One row per stationary point, branches in order.
pub fn write_branches<W: Write>(branches: &[Branch], unit: Unit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(BRANCH_COLUMNS)?;
    for b in branches {
        for sp in &b.points {
            let c = sp.classification.as_ref();
            w.write_record([
                format_f64(sp.beta),
                b.id.to_string(),
                format_f64(unit.from_nats(sp.information)),
                format_f64(unit.from_nats(sp.objective)),
                format_f64(sp.kkt_residual),
                flag(c.map(|c| c.solves_lagrangian)),
                flag(c.and_then(|c| c.solves_constrained)),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve<W: Write>(curve: &[CurvePoint], unit: Unit, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(CURVE_COLUMNS)?;
    for cp in curve {
        w.write_record([
            format_f64(unit.from_nats(cp.i0)),
            format_f64(unit.from_nats(cp.r)),
            format_f64(cp.beta),
            cp.branch_id.to_string(),
            format_f64(cp.kkt_residual),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_branches_csv(branches: &[Branch], unit: Unit, path: impl AsRef<Path>) -> Result<()> {
    write_branches(branches, unit, BufWriter::new(File::create(path)?))
}

pub fn write_curve_csv(curve: &[CurvePoint], unit: Unit, path: impl AsRef<Path>) -> Result<()> {
    write_curve(curve, unit, BufWriter::new(File::create(path)?))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventRecord {
    pub beta: f64,
    pub kind: BifurcationKind,
    pub information: f64,
    pub parent: usize,
    pub children: Vec<usize>,
}

impl EventRecord {
    pub fn new(e: &BifurcationEvent, unit: Unit) -> Self {
        Self {
            beta: e.beta,
            kind: e.kind,
            information: unit.from_nats(e.information),
            parent: e.parent,
            children: e.children.clone(),
        }
    }
}

/// Outcome of one named check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CheckRecord {
    pub suite: String,
    pub name: String,
    pub value: f64,
    /// Passing requires `value < threshold`; `None` marks a report-only
    /// quantity.
    pub threshold: Option<f64>,
    pub passed: bool,
}

/// JSON report written next to the CSV outputs.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Summary {
    pub command: String,
    #[serde(default)]
    pub objective: Option<ObjectiveKind>,
    #[serde(default)]
    pub classes: Option<usize>,
    #[serde(default)]
    pub unit: Unit,
    #[serde(default)]
    pub seed: Option<u64>,
    /// `I(X;Y)` of the input.
    #[serde(default)]
    pub mutual_information_xy: Option<f64>,
    #[serde(default)]
    pub bifurcations: Vec<EventRecord>,
    #[serde(default)]
    pub theorem3: Option<Theorem3Report>,
    #[serde(default)]
    pub checks: Vec<CheckRecord>,
}

pub fn write_summary(summary: &Summary, path: impl AsRef<Path>) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, summary)?;
    w.write_all(b"\n")?;
    w.flush()?;
    Ok(())
}

pub fn read_summary(path: impl AsRef<Path>) -> Result<Summary> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}
