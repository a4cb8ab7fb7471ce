use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use super::{is_negative, ReconstructionConfig};
use crate::error::Result;
use crate::reference_elements::{ElementFamily, ReferenceElement, SampleGrid};

/// Sample grid with the shape function values of an element at its points.
#[derive(Debug)]
pub struct SampleTable {
    pub grid: SampleGrid,
    /// Point-major: `shapes[i * nodes + k]` is `N_k` at point `i`.
    pub shapes: Vec<f64>,
    nodes: usize,
}

impl SampleTable {
    pub fn new(elem: &ReferenceElement, density: usize) -> Result<Self> {
        let grid = elem.sample_grid(density)?;
        let nodes = elem.node_count();
        let mut shapes = vec![0.0; grid.len() * nodes];
        for (i, x) in grid.points.iter().enumerate() {
            elem.eval(&x[..elem.dim()], &mut shapes[i * nodes..(i + 1) * nodes], None);
        }
        Ok(SampleTable { grid, shapes, nodes })
    }

    pub fn sample(&self, values: &[f64]) -> Vec<f64> {
        self.shapes
            .chunks(self.nodes)
            .map(|row| row.iter().zip(values).map(|(n, v)| n * v).sum())
            .collect()
    }
}

type TableKey = (ElementFamily, usize, usize);

/// Shared table for an element order and density.
pub fn sample_table(elem: &ReferenceElement, density: usize) -> Result<Arc<SampleTable>> {
    static CACHE: OnceLock<Mutex<HashMap<TableKey, Arc<SampleTable>>>> = OnceLock::new();
    let key = (elem.family(), elem.order(), density);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("sample cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let table = Arc::new(SampleTable::new(elem, density)?);
    cache.lock().expect("sample cache poisoned").insert(key, table.clone());
    Ok(table)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum InvalidReason {
    /// An edge changes sign more than once.
    EdgeCutTwice { edge: usize },
    /// A triangle (the element in 2D, a face in 3D) has a number of cut edges other than 0 or 2.
    CutEdgeCount { face: Option<usize>, count: usize },
    /// No edge of a triangle is cut but its interior changes sign.
    InteriorCut { face: Option<usize> },
    /// No face is cut but the interior changes sign.
    VolumeCut,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValidityReport {
    pub valid: bool,
    /// Sign changes along each element edge.
    pub edge_cuts: Vec<usize>,
    pub reasons: Vec<InvalidReason>,
}

fn mixed(samples: &[f64], idx: impl IntoIterator<Item = usize>) -> bool {
    let mut it = idx.into_iter().map(|i| is_negative(samples[i]));
    match it.next() {
        Some(first) => it.any(|s| s != first),
        None => false,
    }
}

/// Sign check of `φ^h` on the sample grid: every edge is cut at most once,
/// every triangle has zero or two cut edges and is uncut if none is, and a
/// tetrahedron without cut faces is uncut.
pub fn check_validity(elem: &ReferenceElement, values: &[f64], cfg: &ReconstructionConfig) -> Result<ValidityReport> {
    let table = sample_table(elem, cfg.density(elem.order()))?;
    let samples = table.sample(values);
    let grid = &table.grid;
    let edge_cuts: Vec<usize> = grid
        .edge_points
        .iter()
        .map(|pts| pts.windows(2).filter(|w| is_negative(samples[w[0]]) != is_negative(samples[w[1]])).count())
        .collect();
    let mut reasons = Vec::new();
    for (edge, &c) in edge_cuts.iter().enumerate() {
        if c > 1 {
            reasons.push(InvalidReason::EdgeCutTwice { edge });
        }
    }
    let family = elem.family();
    let all_points = 0..grid.len();
    match family {
        ElementFamily::Triangle => {
            let count = edge_cuts.iter().filter(|&&c| c > 0).count();
            if count != 0 && count != 2 {
                reasons.push(InvalidReason::CutEdgeCount { face: None, count });
            }
            if count == 0 && mixed(&samples, all_points) {
                reasons.push(InvalidReason::InteriorCut { face: None });
            }
        }
        ElementFamily::Tetrahedron => {
            let mut any_face_cut = false;
            for (f, side) in family.sides().iter().enumerate() {
                let count = (0..3)
                    .filter(|&k| {
                        let (e, _) = family.edge_between(side[k], side[(k + 1) % 3]).expect("face edge");
                        edge_cuts[e] > 0
                    })
                    .count();
                if count != 0 && count != 2 {
                    reasons.push(InvalidReason::CutEdgeCount { face: Some(f), count });
                }
                if count == 0 && mixed(&samples, grid.side_points[f].iter().copied()) {
                    reasons.push(InvalidReason::InteriorCut { face: Some(f) });
                }
                any_face_cut |= count > 0;
            }
            if !any_face_cut && reasons.is_empty() && mixed(&samples, all_points) {
                reasons.push(InvalidReason::VolumeCut);
            }
        }
        _ => {
            return Err(crate::error::Error::InvalidArgument(format!(
                "validity is checked on simplices, got {family:?}"
            )))
        }
    }
    Ok(ValidityReport {
        valid: reasons.is_empty(),
        edge_cuts,
        reasons,
    })
}
