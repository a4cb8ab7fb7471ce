use std::collections::HashMap;

use nalgebra::{Vector2, Vector3};

use super::newton::{newton_search, SearchDirection};
use super::recon2d::line_in_triangle;
use super::topology::{classify_topology, find_edge_intersections, CutTopology, TopologyCase};
use super::variant::Inner3D;
use super::{is_negative, InterfaceElement, LocalReconstruction, ReconstructionConfig};
use crate::error::{Error, Result};
use crate::levelset::value_and_gradient;
use crate::reference_elements::{ElementFamily, ReferenceElement};
use crate::transfinite_maps::{map_quad_from_edges, map_tri_from_edges, CurvedEdgeSet, CurvedLine};

type Point = Vector3<f64>;

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

struct TetData<'a> {
    elem: &'a ReferenceElement,
    values: &'a [f64],
    cuts: HashMap<(usize, usize), Point>,
    cfg: &'a ReconstructionConfig,
}

impl TetData<'_> {
    fn corner(&self, c: usize) -> Point {
        let x = self.elem.node(c);
        Point::new(x[0], x[1], x[2])
    }

    fn field(&self, r: &Point) -> (f64, Point) {
        value_and_gradient::<3>(self.elem, self.values, r.as_slice())
    }

    /// Interface curve on the face with corners `{lone, x, y}`, as line
    /// nodes from the root on edge `lone-x` to the root on edge `lone-y`.
    fn face_line(&self, lone: usize, x: usize, y: usize) -> Result<Vec<Point>> {
        let family = self.elem.family();
        let mut want = [lone, x, y];
        want.sort_unstable();
        let face = family
            .sides()
            .iter()
            .find(|s| {
                let mut s = [s[0], s[1], s[2]];
                s.sort_unstable();
                s == want
            })
            .ok_or_else(|| Error::InternalConsistency(format!("no face with corners {want:?}")))?;
        let c = [self.corner(face[0]), self.corner(face[1]), self.corner(face[2])];
        let (e1, e2) = (c[1] - c[0], c[2] - c[0]);
        let to_tet = |u: &Vector2<f64>| c[0] + e1 * u[0] + e2 * u[1];
        let field = |u: &Vector2<f64>| {
            let (v, g) = self.field(&to_tet(u));
            (v, Vector2::new(g.dot(&e1), g.dot(&e2)))
        };
        let local_corner = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
        let li = face.iter().position(|&k| k == lone).expect("lone corner on face");
        let (ai, bi) = ((li + 1) % 3, (li + 2) % 3);
        // barycentric position of a root on the segment from local corner li to local corner k
        let local_root = |k: usize| -> Vector2<f64> {
            let p = self.cuts[&key(lone, face[k])];
            let (a, b) = (self.corner(lone), self.corner(face[k]));
            let t = (p - a).dot(&(b - a)) / (b - a).norm_squared();
            local_corner[li] * (1.0 - t) + local_corner[k] * t
        };
        let local = line_in_triangle(
            &field,
            [local_corner[li], local_corner[ai], local_corner[bi]],
            local_root(ai),
            local_root(bi),
            self.elem.order(),
            self.cfg,
        )?;
        let mut nodes: Vec<Point> = local.iter().map(to_tet).collect();
        nodes[0] = self.cuts[&key(lone, face[ai])];
        nodes[1] = self.cuts[&key(lone, face[bi])];
        if face[ai] == x {
            Ok(nodes)
        } else {
            Ok(reverse_line(nodes))
        }
    }

    fn newton_inner(&self, r0: Point, normal: impl Fn() -> Point) -> Result<Point> {
        let direction = match self.cfg.variant.inner {
            Inner3D::Normal => SearchDirection::Fixed(normal()),
            Inner3D::GradFixed => SearchDirection::Fixed(self.field(&r0).1),
            Inner3D::GradLive => SearchDirection::LiveGradient,
        };
        let r = newton_search(|r| self.field(r), r0, direction, self.cfg)?;
        if !ElementFamily::Tetrahedron.contains(r.as_slice(), self.cfg.domain_tol) {
            return Err(Error::RootSearchFailed(format!(
                "inner interface node converged outside the element at {:?}",
                r.as_slice()
            )));
        }
        Ok(r)
    }
}

fn reverse_line(nodes: Vec<Point>) -> Vec<Point> {
    let mut out = vec![nodes[1], nodes[0]];
    out.extend(nodes[2..].iter().rev());
    out
}

/// Fill an interface element from its boundary curves (corner `k` to `k + 1`,
/// line-node order) and place the interior nodes by Newton iteration from
/// the transfinite start values.
fn assemble(data: &TetData, family: ElementFamily, lines: Vec<Vec<Point>>) -> Result<Vec<Point>> {
    let p = data.elem.order();
    let elem = ReferenceElement::cached(family, p)?;
    let mut nodes = vec![Point::zeros(); elem.node_count()];
    let mut filled = vec![false; elem.node_count()];
    for (k, line) in lines.iter().enumerate() {
        // line order [start, end, interior ascending] to position along the edge
        let along: Vec<Point> = std::iter::once(line[0])
            .chain(line[2..].iter().copied())
            .chain(std::iter::once(line[1]))
            .collect();
        for (x, &i) in along.iter().zip(&elem.edge_nodes(k)) {
            nodes[i] = *x;
            filled[i] = true;
        }
    }
    if filled.iter().all(|&f| f) {
        return Ok(nodes);
    }
    let curves = lines
        .iter()
        .map(|l| CurvedLine::from_nodes(l))
        .collect::<Result<Vec<_>>>()?;
    let set = CurvedEdgeSet::from_lines(curves)?;
    let map = |a: &[f64]| -> Result<Point> {
        match family {
            ElementFamily::Triangle => map_tri_from_edges(&set, a),
            _ => map_quad_from_edges(&set, a),
        }
    };
    const FD: f64 = 1e-6;
    for i in 0..elem.node_count() {
        if filled[i] {
            continue;
        }
        let a = elem.node(i);
        let r0 = map(a)?;
        let normal = || {
            let d = |k: usize| {
                let (mut lo, mut hi) = ([a[0], a[1]], [a[0], a[1]]);
                lo[k] -= FD;
                hi[k] += FD;
                (map(&hi).expect("checked edge set") - map(&lo).expect("checked edge set")) / (2.0 * FD)
            };
            d(0).cross(&d(1))
        };
        nodes[i] = data.newton_inner(r0, normal)?;
    }
    Ok(nodes)
}

fn interface_3d(data: &TetData, topology: &CutTopology) -> Result<InterfaceElement<3>> {
    let c = &topology.corners;
    let p = data.elem.order();
    match topology.case {
        TopologyCase::TetraTop1 => {
            let (l, a, b, cc) = (c[0], c[1], c[2], c[3]);
            let lines = vec![data.face_line(l, a, b)?, data.face_line(l, b, cc)?, data.face_line(l, cc, a)?];
            Ok(InterfaceElement {
                family: ElementFamily::Triangle,
                order: p,
                nodes: assemble(data, ElementFamily::Triangle, lines)?,
            })
        }
        TopologyCase::TetraTop2 => {
            let (a, b, cc, d) = (c[0], c[1], c[2], c[3]);
            // corners I_AC, I_BC, I_BD, I_AD; each side lies on the face whose lone corner is listed first
            let lines = vec![
                data.face_line(cc, a, b)?,
                data.face_line(b, cc, d)?,
                data.face_line(d, b, a)?,
                data.face_line(a, d, cc)?,
            ];
            Ok(InterfaceElement {
                family: ElementFamily::Quadrilateral,
                order: p,
                nodes: assemble(data, ElementFamily::Quadrilateral, lines)?,
            })
        }
        _ => Err(Error::InternalConsistency("3D interface for an uncut element".into())),
    }
}

/// Reconstruction of the zero level set of `φ^h` inside a tetrahedron. Face
/// curves come from the 2D reconstruction on each cut face with the edge
/// roots shared between faces; inner nodes start from the transfinite map of
/// the face curves.
pub fn reconstruct_3d(elem: &ReferenceElement, values: &[f64], cfg: &ReconstructionConfig) -> Result<LocalReconstruction<3>> {
    if elem.family() != ElementFamily::Tetrahedron {
        return Err(Error::InvalidArgument(format!("3D reconstruction on {:?}", elem.family())));
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
    let cuts = intersections
        .iter()
        .map(|s| (key(s.corners[0], s.corners[1]), Point::new(s.point[0], s.point[1], s.point[2])))
        .collect();
    let data = TetData { elem, values, cuts, cfg };
    let interface = interface_3d(&data, &topology)?;
    debug_assert!(topology.cut_edges.iter().all(|e| is_negative(values[e[0]]) != is_negative(values[e[1]])));
    Ok(LocalReconstruction {
        topology,
        intersections,
        interface: Some(interface),
    })
}
