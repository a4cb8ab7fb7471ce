use nalgebra::{SVector, Vector2};

use super::newton::{newton_search, SearchDirection};
use super::topology::{classify_topology, find_edge_intersections, TopologyCase};
use super::variant::{Direction2D, GradientMode, Reconstruction2D};
use super::{InterfaceElement, LocalReconstruction, ReconstructionConfig};
use crate::error::{Error, Result};
use crate::levelset::value_and_gradient;
use crate::reference_elements::{ElementFamily, ReferenceElement};

fn rot90(v: Vector2<f64>) -> Vector2<f64> {
    Vector2::new(-v[1], v[0])
}

/// Intermediate reconstruction between two intersections, sampled at the
/// parameters `s ∈ [0, 1]` of the line nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct StartValues2D {
    pub points: Vec<Vector2<f64>>,
    /// Derivative `dr/ds` of the intermediate curve at each point.
    pub tangents: Vec<Vector2<f64>>,
}

/// Linear or cubic Hermite start values between `ia` and `ib`. Hermite
/// tangents are perpendicular to the gradients at the intersections, point
/// along the chord and have the chord's length. A vanishing gradient falls
/// back to the linear reconstruction.
pub fn build_start_values_2d(
    field: impl Fn(&Vector2<f64>) -> (f64, Vector2<f64>),
    ia: Vector2<f64>,
    ib: Vector2<f64>,
    kind: Reconstruction2D,
    params: &[f64],
) -> StartValues2D {
    let chord = ib - ia;
    let hermite = match kind {
        Reconstruction2D::Linear => None,
        Reconstruction2D::Hermite => {
            let tangent = |x: &Vector2<f64>| {
                let g = field(x).1;
                let n = g.norm();
                (n > 0.0 && n.is_finite()).then(|| {
                    let t = rot90(g) / n;
                    let t = if t.dot(&chord) < 0.0 { -t } else { t };
                    t * chord.norm()
                })
            };
            tangent(&ia).zip(tangent(&ib))
        }
    };
    let mut points = Vec::with_capacity(params.len());
    let mut tangents = Vec::with_capacity(params.len());
    for &s in params {
        match hermite {
            None => {
                points.push(ia + chord * s);
                tangents.push(chord);
            }
            Some((ta, tb)) => {
                let (s2, s3) = (s * s, s * s * s);
                points.push(
                    ia * (2.0 * s3 - 3.0 * s2 + 1.0)
                        + ta * (s3 - 2.0 * s2 + s)
                        + ib * (3.0 * s2 - 2.0 * s3)
                        + tb * (s3 - s2),
                );
                tangents.push(
                    ia * (6.0 * s2 - 6.0 * s)
                        + ta * (3.0 * s2 - 4.0 * s + 1.0)
                        + ib * (6.0 * s - 6.0 * s2)
                        + tb * (3.0 * s2 - 2.0 * s),
                );
            }
        }
    }
    StartValues2D { points, tangents }
}

/// Interface line nodes inside a triangle whose lone corner `corners[0]` is
/// cut off by the roots `ia` (edge to `corners[1]`) and `ib` (edge to
/// `corners[2]`). All points are in the triangle's local coordinates; the
/// result is in line-element node order from `ia` to `ib`.
pub(crate) fn line_in_triangle(
    field: &impl Fn(&Vector2<f64>) -> (f64, Vector2<f64>),
    corners: [Vector2<f64>; 3],
    ia: Vector2<f64>,
    ib: Vector2<f64>,
    order: usize,
    cfg: &ReconstructionConfig,
) -> Result<Vec<Vector2<f64>>> {
    let line = ReferenceElement::cached(ElementFamily::Line, order)?;
    let params: Vec<f64> = line.nodes().iter().map(|u| 0.5 * (u[0] + 1.0)).collect();
    let start = build_start_values_2d(field, ia, ib, cfg.variant.reconstruction, &params);
    let [l, a, b] = corners;
    let da = (a - l).normalize();
    let db = (b - l).normalize();
    let mut nodes = vec![ia, ib];
    for k in 2..line.node_count() {
        let r0 = start.points[k];
        let s = params[k];
        let direction = match cfg.variant.direction {
            Direction2D::OppositeNode => SearchDirection::Fixed(l - r0),
            Direction2D::EdgeDirections => SearchDirection::Fixed(da * (1.0 - s) + db * s),
            Direction2D::Normal => SearchDirection::Fixed(rot90(start.tangents[k])),
            Direction2D::Gradient(GradientMode::Fixed) => SearchDirection::Fixed(field(&r0).1),
            Direction2D::Gradient(GradientMode::Live) => SearchDirection::LiveGradient,
        };
        let r = newton_search(field, r0, direction, cfg)?;
        if !ElementFamily::Triangle.contains(r.as_slice(), cfg.domain_tol) {
            return Err(Error::RootSearchFailed(format!(
                "interface node converged outside the element at {:?}",
                r.as_slice()
            )));
        }
        nodes.push(r);
    }
    Ok(nodes)
}

/// Reconstruction of the zero level set of `φ^h` inside a triangle.
pub fn reconstruct_2d(elem: &ReferenceElement, values: &[f64], cfg: &ReconstructionConfig) -> Result<LocalReconstruction<2>> {
    if elem.family() != ElementFamily::Triangle {
        return Err(Error::InvalidArgument(format!("2D reconstruction on {:?}", elem.family())));
    }
    let topology = classify_topology(elem.family(), values)?;
    if topology.case == TopologyCase::Uncut {
        return Ok(LocalReconstruction {
            topology,
            intersections: Vec::new(),
            interface: None,
        });
    }
    let intersections = find_edge_intersections(elem, values, &topology, cfg)?;
    let corner = |c: usize| {
        let x = elem.node(c);
        Vector2::new(x[0], x[1])
    };
    let c = &topology.corners;
    let pt = |k: usize| Vector2::new(intersections[k].point[0], intersections[k].point[1]);
    let field = |r: &Vector2<f64>| value_and_gradient::<2>(elem, values, r.as_slice());
    let nodes = line_in_triangle(&field, [corner(c[0]), corner(c[1]), corner(c[2])], pt(0), pt(1), elem.order(), cfg)?;
    Ok(LocalReconstruction {
        topology,
        intersections,
        interface: Some(InterfaceElement {
            family: ElementFamily::Line,
            order: elem.order(),
            nodes: nodes.into_iter().map(SVector::from).collect(),
        }),
    })
}
