use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use nalgebra::SVector;

use super::SubElement;
use crate::error::{Error, Result};
use crate::reconstruction::child_node_coords;
use crate::reference_elements::{map_point, on_side, ElementFamily, ReferenceElement};
use crate::transfinite_maps::{map_tri_from_edges, CurvedEdgeSet, CurvedLine};

/// Shape gradients of an element at the points of a sample grid.
struct GradTable {
    points: usize,
    nodes: usize,
    dim: usize,
    grads: Vec<f64>,
}

fn grad_table(elem: &ReferenceElement, density: usize) -> Result<Arc<GradTable>> {
    static CACHE: OnceLock<Mutex<HashMap<(ElementFamily, usize, usize), Arc<GradTable>>>> = OnceLock::new();
    let key = (elem.family(), elem.order(), density);
    let cache = CACHE.get_or_init(Default::default);
    if let Some(t) = cache.lock().expect("gradient cache poisoned").get(&key) {
        return Ok(t.clone());
    }
    let grid = elem.sample_grid(density)?;
    let (nodes, dim) = (elem.node_count(), elem.dim());
    let mut grads = vec![0.0; grid.len() * nodes * dim];
    let mut vals = vec![0.0; nodes];
    for (i, x) in grid.points.iter().enumerate() {
        elem.eval(&x[..dim], &mut vals, Some(&mut grads[i * nodes * dim..(i + 1) * nodes * dim]));
    }
    let table = Arc::new(GradTable {
        points: grid.len(),
        nodes,
        dim,
        grads,
    });
    cache.lock().expect("gradient cache poisoned").insert(key, table.clone());
    Ok(table)
}

/// Fails with a decomposition error unless `det ∂x/∂r > 0` at every point of
/// the sample grid of density `2p + 1`. `D` must equal the element dimension.
pub fn check_jacobian<const D: usize>(family: ElementFamily, order: usize, nodes: &[SVector<f64, D>]) -> Result<()> {
    let elem = ReferenceElement::cached(family, order)?;
    if elem.dim() != D {
        return Err(Error::InvalidArgument(format!("{family:?} nodes in {D} dimensions")));
    }
    let t = grad_table(elem, 2 * order + 1)?;
    for i in 0..t.points {
        let g = &t.grads[i * t.nodes * t.dim..(i + 1) * t.nodes * t.dim];
        let mut m = [[0.0; 3]; 3];
        for (k, x) in nodes.iter().enumerate() {
            for r in 0..D {
                for c in 0..D {
                    m[r][c] += x[r] * g[k * t.dim + c];
                }
            }
        }
        let det = match D {
            2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
            _ => {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            }
        };
        if !(det > 0.0) {
            return Err(Error::DecompositionFailed(format!(
                "{family:?} sub-element has Jacobian determinant {det:e}"
            )));
        }
    }
    Ok(())
}

/// Reference corner coordinates of `family`.
pub(crate) fn corners(family: ElementFamily) -> Vec<[f64; 3]> {
    (0..family.corner_count())
        .map(|c| family.lattice_coords(1, family.corner_lattice(1, c)))
        .collect()
}

/// Children of `parent` spanned by `child_corners` (parent reference
/// coordinates). Node positions follow the parent map; sides lying on a
/// parent side inherit its tag.
pub(crate) fn sub_pieces<const D: usize>(
    parent: &SubElement<D>,
    child_family: ElementFamily,
    child_corners: &[Vec<[f64; 3]>],
    lineage: Option<u8>,
) -> Result<Vec<SubElement<D>>> {
    let pelem = ReferenceElement::cached(parent.family, parent.order)?;
    let celem = ReferenceElement::cached(child_family, parent.order)?;
    child_corners
        .iter()
        .enumerate()
        .map(|(k, cc)| {
            let nodes = child_node_coords(celem, cc)
                .iter()
                .map(|r| map_point(pelem, &parent.nodes, &r[..pelem.dim()]))
                .collect();
            let side_tags = inherited_tags(parent, child_family, cc);
            let mut lineage_path = parent.lineage.clone();
            if let Some(base) = lineage {
                lineage_path.push(base + k as u8);
            }
            Ok(SubElement {
                family: child_family,
                order: parent.order,
                nodes,
                signs: parent.signs,
                side_tags,
                lineage: lineage_path,
            })
        })
        .collect()
}

/// Tags of a child's sides from the parent sides they lie on.
pub(crate) fn inherited_tags<const D: usize>(
    parent: &SubElement<D>,
    child_family: ElementFamily,
    child_corners: &[[f64; 3]],
) -> Vec<Option<usize>> {
    child_family
        .sides()
        .iter()
        .map(|side| {
            (0..parent.family.sides().len())
                .find(|&m| side.iter().all(|&c| on_side(parent.family, m, &child_corners[c])))
                .and_then(|m| parent.side_tags[m])
        })
        .collect()
}

/// Split a quadrilateral into two triangles along the diagonal from corner
/// 0 to corner 2, or from 1 to 3 if that one gives an invalid triangle, or a
/// prism into three tetrahedra. Simplices are the images of straight
/// reference sub-simplices, so sides on the parent's boundary keep their
/// nodes where the parent side is itself a simplex side.
pub fn simplexify<const D: usize>(sub: &SubElement<D>) -> Result<Vec<SubElement<D>>> {
    let c = corners(sub.family);
    let (family, splits): (ElementFamily, Vec<Vec<Vec<usize>>>) = match sub.family {
        ElementFamily::Triangle | ElementFamily::Tetrahedron => return Ok(vec![sub.clone()]),
        ElementFamily::Quadrilateral => (
            ElementFamily::Triangle,
            vec![vec![vec![0, 1, 2], vec![0, 2, 3]], vec![vec![1, 2, 3], vec![1, 3, 0]]],
        ),
        ElementFamily::Prism => (
            ElementFamily::Tetrahedron,
            vec![vec![vec![0, 1, 2, 5], vec![0, 1, 5, 4], vec![0, 4, 5, 3]]],
        ),
        ElementFamily::Line => return Err(Error::InvalidArgument("cannot simplexify a line".into())),
    };
    let mut failure = None;
    for split in &splits {
        let child_corners: Vec<Vec<[f64; 3]>> = split.iter().map(|s| s.iter().map(|&k| c[k]).collect()).collect();
        let out = sub_pieces(sub, family, &child_corners, None)?;
        match out.iter().try_for_each(|s| check_jacobian(s.family, s.order, &s.nodes)) {
            Ok(()) => return Ok(out),
            Err(e) => failure = failure.or(Some(e)),
        }
    }
    if sub.family == ElementFamily::Quadrilateral {
        if let Some(tri) = collapse_quad(sub)? {
            check_jacobian(tri.family, tri.order, &tri.nodes)?;
            return Ok(vec![tri]);
        }
    }
    Err(failure.expect("at least one split"))
}

/// Shortest-to-longest edge ratio below which a quadrilateral is treated as
/// the triangle it has degenerated to.
const COLLAPSE_RATIO: f64 = 1e-8;

/// A quadrilateral whose edge `k` has shrunk to a point, rebuilt as the
/// triangle bounded by its other three edges. The lost sliver has an area of
/// order `COLLAPSE_RATIO` times the squared diameter.
pub(crate) fn collapse_quad<const D: usize>(sub: &SubElement<D>) -> Result<Option<SubElement<D>>> {
    let elem = ReferenceElement::cached(ElementFamily::Quadrilateral, sub.order)?;
    let paths: Vec<Vec<SVector<f64, D>>> = (0..4)
        .map(|k| elem.path_nodes(k, (k + 1) % 4).iter().map(|&i| sub.nodes[i]).collect())
        .collect();
    let lengths: Vec<f64> = paths.iter().map(|p| (p[p.len() - 1] - p[0]).norm()).collect();
    let longest = lengths.iter().cloned().fold(0.0, f64::max);
    let Some(k) = (0..4).find(|&k| lengths[k] <= COLLAPSE_RATIO * longest) else {
        return Ok(None);
    };
    let line = |path: &[SVector<f64, D>]| {
        let p = path.len() - 1;
        let mut nodes = vec![path[0], path[p]];
        nodes.extend_from_slice(&path[1..p]);
        CurvedLine::from_nodes(&nodes)
    };
    let mut last = paths[(k + 3) % 4].clone();
    let end = last.len() - 1;
    last[end] = paths[(k + 1) % 4][0];
    let edges = CurvedEdgeSet::from_lines(vec![line(&paths[(k + 1) % 4])?, line(&paths[(k + 2) % 4])?, line(&last)?])?;
    let tri = ReferenceElement::cached(ElementFamily::Triangle, sub.order)?;
    let nodes = tri
        .nodes()
        .iter()
        .map(|r| map_tri_from_edges(&edges, &r[..2]))
        .collect::<Result<Vec<_>>>()?;
    Ok(Some(SubElement {
        family: ElementFamily::Triangle,
        order: sub.order,
        nodes,
        signs: sub.signs,
        side_tags: vec![
            sub.side_tags[(k + 1) % 4],
            sub.side_tags[(k + 2) % 4],
            sub.side_tags[(k + 3) % 4],
        ],
        lineage: sub.lineage.clone(),
    }))
}
