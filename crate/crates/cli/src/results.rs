//! CSV output of convergence studies and region measures.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use cutmesh::convergence_harness::{ErrorRecord, Norm};

use crate::CliError;

/// Norm columns for a study in `dimension` space dimensions.
pub fn norm_columns(dimension: usize) -> Vec<Norm> {
    let mut cols = vec![Norm::One, Norm::Phi, Norm::F, Norm::F1h, Norm::F2h];
    if dimension == 3 {
        cols.push(Norm::F3h);
    }
    cols
}

/// Full double precision: 17 significant digits.
fn number(v: f64) -> String {
    format!("{v:.16e}")
}

/// One header line and one row per record, ordered by resolution. Norms a
/// study does not compute are left empty.
pub fn format_convergence_csv(records: &[ErrorRecord], dimension: usize) -> String {
    let cols = norm_columns(dimension);
    let mut out = String::from("h,n_elements");
    for c in &cols {
        out.push(',');
        out.push_str(c.id());
    }
    out.push_str(",refined,flagged\n");
    let mut sorted: Vec<&ErrorRecord> = records.iter().collect();
    sorted.sort_by_key(|r| r.n);
    for r in sorted {
        write!(out, "{},{}", number(r.h), r.n_elements).unwrap();
        for c in &cols {
            out.push(',');
            if let Some(v) = r.error(*c) {
                out.push_str(&number(v));
            }
        }
        writeln!(out, ",{},{}", r.refined_elements, u8::from(r.flagged())).unwrap();
    }
    out
}

pub fn write_convergence_csv(records: &[ErrorRecord], dimension: usize, path: &Path) -> Result<(), CliError> {
    write_file(path, &format_convergence_csv(records, dimension))
}

/// Measure and piece count per sign region, `-` marking the negative side
/// of each level set in order.
pub fn format_region_csv(regions: &BTreeMap<String, (f64, usize)>) -> String {
    let mut out = String::from("signs,measure,pieces\n");
    for (signs, (m, k)) in regions {
        writeln!(out, "{signs},{},{k}", number(*m)).unwrap();
    }
    out
}

pub(crate) fn write_file(path: &Path, text: &str) -> Result<(), CliError> {
    std::fs::write(path, text).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}
