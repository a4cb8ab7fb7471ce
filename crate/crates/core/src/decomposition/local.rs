//! Sub-elements of one cut simplex, in that simplex's reference coordinates.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::reconstruction::{InterfaceElement, LocalReconstruction, TopologyCase};
use crate::reference_elements::{ElementFamily, ReferenceElement};
use crate::transfinite_maps::{
    map_prism_quad_face, map_prism_tri_face, map_quad_from_edges, map_tetra_one_curved_face, map_tri_from_edges,
    CurvedEdgeSet, CurvedFacePrism, CurvedFaceTetra, CurvedLine,
};

/// Sub-element in the coordinates of the simplex it was cut from. Side
/// `interface_side` carries the interface element node for node.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalSub<const D: usize> {
    pub family: ElementFamily,
    pub nodes: Vec<SVector<f64, D>>,
    pub negative: bool,
    pub interface_side: usize,
}

fn corner<const D: usize>(elem: &ReferenceElement, c: usize) -> SVector<f64, D> {
    SVector::from_fn(|k, _| elem.node(c)[k])
}

/// Line nodes (`[start, end, interior]`) listed from start to end.
fn along<const D: usize>(line: &[SVector<f64, D>]) -> Vec<SVector<f64, D>> {
    let mut v = vec![line[0]];
    v.extend_from_slice(&line[2..]);
    v.push(line[1]);
    v
}

fn reversed<const D: usize>(line: &[SVector<f64, D>]) -> Vec<SVector<f64, D>> {
    let mut v = vec![line[1], line[0]];
    v.extend(line[2..].iter().rev());
    v
}

fn interface<const D: usize>(rec: &LocalReconstruction<D>) -> Result<&InterfaceElement<D>> {
    rec.interface
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("decomposition of an uncut element".into()))
}

/// Sub-triangle at the lone corner and sub-quadrilateral at the other two,
/// each with the interface as its only curved edge.
pub fn decompose_triangle(elem: &ReferenceElement, rec: &LocalReconstruction<2>) -> Result<Vec<LocalSub<2>>> {
    if rec.topology.case != TopologyCase::Triangle {
        return Err(Error::InvalidArgument("triangle decomposition needs a cut triangle".into()));
    }
    let p = elem.order();
    let iface = interface(rec)?;
    let c = &rec.topology.corners;
    let (l, a, b) = (corner::<2>(elem, c[0]), corner::<2>(elem, c[1]), corner::<2>(elem, c[2]));
    let (ia, ib) = (iface.nodes[0], iface.nodes[1]);
    let curve = CurvedLine::from_nodes(&iface.nodes)?;
    let back = CurvedLine::from_nodes(&reversed(&iface.nodes))?;

    let tri = ReferenceElement::cached(ElementFamily::Triangle, p)?;
    let set = CurvedEdgeSet::from_lines(vec![CurvedLine::straight(l, ia, p), curve, CurvedLine::straight(ib, l, p)])?;
    let mut tri_nodes = tri
        .nodes()
        .iter()
        .map(|r| map_tri_from_edges(&set, r))
        .collect::<Result<Vec<_>>>()?;
    for (x, &i) in along(&iface.nodes).iter().zip(&tri.edge_nodes(1)) {
        tri_nodes[i] = *x;
    }

    let quad = ReferenceElement::cached(ElementFamily::Quadrilateral, p)?;
    let set = CurvedEdgeSet::from_lines(vec![
        CurvedLine::straight(a, b, p),
        CurvedLine::straight(b, ib, p),
        back,
        CurvedLine::straight(ia, a, p),
    ])?;
    let mut quad_nodes = quad
        .nodes()
        .iter()
        .map(|r| map_quad_from_edges(&set, r))
        .collect::<Result<Vec<_>>>()?;
    for (x, &i) in along(&reversed(&iface.nodes)).iter().zip(&quad.edge_nodes(2)) {
        quad_nodes[i] = *x;
    }

    let neg = &rec.topology.corner_negative;
    Ok(vec![
        LocalSub {
            family: ElementFamily::Triangle,
            nodes: tri_nodes,
            negative: neg[c[0]],
            interface_side: 1,
        },
        LocalSub {
            family: ElementFamily::Quadrilateral,
            nodes: quad_nodes,
            negative: neg[c[1]],
            interface_side: 2,
        },
    ])
}

/// One sub-tetrahedron and one sub-prism (one corner cut off) or two
/// sub-prisms (two corners on each side).
pub fn decompose_tetra(elem: &ReferenceElement, rec: &LocalReconstruction<3>) -> Result<Vec<LocalSub<3>>> {
    let p = elem.order();
    let iface = interface(rec)?;
    let c = &rec.topology.corners;
    let neg = &rec.topology.corner_negative;
    let x = |k: usize| corner::<3>(elem, c[k]);
    let prism = ReferenceElement::cached(ElementFamily::Prism, p)?;
    match rec.topology.case {
        TopologyCase::TetraTop1 => {
            let tet = ReferenceElement::cached(ElementFamily::Tetrahedron, p)?;
            let geom = CurvedFaceTetra::new(x(0), &iface.nodes)?;
            let mut tet_nodes: Vec<_> = tet.nodes().iter().map(|r| map_tetra_one_curved_face(&geom, r)).collect();
            for (j, &i) in tet.side_nodes(0).iter().enumerate() {
                tet_nodes[i] = iface.nodes[j];
            }

            let tri = ReferenceElement::cached(ElementFamily::Triangle, p)?;
            let geom = CurvedFacePrism::TriFace {
                face: iface.nodes.clone(),
                top: [x(1), x(2), x(3)],
            };
            let mut prism_nodes = prism
                .nodes()
                .iter()
                .map(|r| map_prism_tri_face(&geom, r))
                .collect::<Result<Vec<_>>>()?;
            for (i, l) in prism.lattice().iter().enumerate() {
                if l[2] == 0 {
                    prism_nodes[i] = iface.nodes[tri.node_at_lattice([l[0], l[1], 0]).expect("triangle lattice")];
                }
            }
            Ok(vec![
                LocalSub {
                    family: ElementFamily::Tetrahedron,
                    nodes: tet_nodes,
                    negative: neg[c[0]],
                    interface_side: 0,
                },
                LocalSub {
                    family: ElementFamily::Prism,
                    nodes: prism_nodes,
                    negative: neg[c[1]],
                    interface_side: 0,
                },
            ])
        }
        TopologyCase::TetraTop2 => {
            let quad = ReferenceElement::cached(ElementFamily::Quadrilateral, p)?;
            let q = |i: usize, j: usize| iface.nodes[quad.node_at_lattice([i, j, 0]).expect("quad lattice")];
            let build = |axis: [SVector<f64, 3>; 2], transpose: bool| -> Result<Vec<SVector<f64, 3>>> {
                let grid: Vec<Vec<_>> = (0..=p)
                    .map(|i| (0..=p).map(|j| if transpose { q(j, i) } else { q(i, j) }).collect())
                    .collect();
                let geom = CurvedFacePrism::QuadFace { axis, grid };
                let mut nodes = prism
                    .nodes()
                    .iter()
                    .map(|r| map_prism_quad_face(&geom, r))
                    .collect::<Result<Vec<_>>>()?;
                let CurvedFacePrism::QuadFace { grid, .. } = &geom else { unreachable!() };
                for (i, l) in prism.lattice().iter().enumerate() {
                    if l[0] + l[1] == p {
                        nodes[i] = grid[l[2]][l[1]];
                    }
                }
                Ok(nodes)
            };
            Ok(vec![
                LocalSub {
                    family: ElementFamily::Prism,
                    nodes: build([x(0), x(1)], false)?,
                    negative: neg[c[0]],
                    interface_side: 3,
                },
                LocalSub {
                    family: ElementFamily::Prism,
                    nodes: build([x(2), x(3)], true)?,
                    negative: neg[c[2]],
                    interface_side: 3,
                },
            ])
        }
        _ => Err(Error::InvalidArgument("tetrahedron decomposition needs a cut tetrahedron".into())),
    }
}
