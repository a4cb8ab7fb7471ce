use nalgebra::SVector;
use rayon::prelude::*;

use super::local::{decompose_tetra, decompose_triangle, LocalSub};
use super::simplex::{check_jacobian, collapse_quad, inherited_tags, simplexify, sub_pieces};
use super::{DecompositionResult, ElementDecomposition, SignVector, SubElement, TaggedInterface};
use crate::error::{Error, Result};
use crate::levelset::{perturb_corners, LevelSetField};
use crate::mesh::BackgroundMesh;
use crate::reconstruction::{
    check_validity, child_node_coords, reconstruct_2d, reconstruct_3d, red_children, InterfaceElement,
    LocalReconstruction, ReconstructionConfig,
};
use crate::reference_elements::{map_point, ElementFamily, ReferenceElement};

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionConfig {
    pub reconstruction: ReconstructionConfig,
    /// Order in which the level-set functions are processed; all of them in
    /// index order if empty.
    pub processing_order: Vec<usize>,
}

impl Default for DecompositionConfig {
    fn default() -> Self {
        DecompositionConfig {
            reconstruction: ReconstructionConfig::default(),
            processing_order: Vec::new(),
        }
    }
}

fn lift<const A: usize, const B: usize>(v: &SVector<f64, A>) -> SVector<f64, B> {
    SVector::from_fn(|k, _| if k < A { v[k] } else { 0.0 })
}

/// Local reconstruction in a piece's own reference simplex, lifted to `D`.
fn reconstruct_local<const D: usize>(
    elem: &ReferenceElement,
    values: &[f64],
    cfg: &ReconstructionConfig,
) -> Result<(LocalReconstruction<D>, Option<Vec<LocalSub<D>>>, bool)> {
    let lift_iface = |i: Option<InterfaceElement<2>>| {
        i.map(|i| InterfaceElement {
            family: i.family,
            order: i.order,
            nodes: i.nodes.iter().map(lift::<2, D>).collect(),
        })
    };
    let lift_iface3 = |i: Option<InterfaceElement<3>>| {
        i.map(|i| InterfaceElement {
            family: i.family,
            order: i.order,
            nodes: i.nodes.iter().map(lift::<3, D>).collect(),
        })
    };
    let lift_subs = |s: Vec<LocalSub<2>>| {
        s.into_iter()
            .map(|s| LocalSub {
                family: s.family,
                nodes: s.nodes.iter().map(lift::<2, D>).collect(),
                negative: s.negative,
                interface_side: s.interface_side,
            })
            .collect::<Vec<_>>()
    };
    let lift_subs3 = |s: Vec<LocalSub<3>>| {
        s.into_iter()
            .map(|s| LocalSub {
                family: s.family,
                nodes: s.nodes.iter().map(lift::<3, D>).collect(),
                negative: s.negative,
                interface_side: s.interface_side,
            })
            .collect::<Vec<_>>()
    };
    match elem.family() {
        ElementFamily::Triangle => {
            let rec = reconstruct_2d(elem, values, cfg)?;
            let subs = match rec.interface {
                Some(_) => Some(lift_subs(decompose_triangle(elem, &rec)?)),
                None => None,
            };
            let cut = rec.interface.is_some();
            Ok((
                LocalReconstruction {
                    topology: rec.topology,
                    intersections: rec.intersections,
                    interface: lift_iface(rec.interface),
                },
                subs,
                cut,
            ))
        }
        ElementFamily::Tetrahedron => {
            let rec = reconstruct_3d(elem, values, cfg)?;
            let subs = match rec.interface {
                Some(_) => Some(lift_subs3(decompose_tetra(elem, &rec)?)),
                None => None,
            };
            let cut = rec.interface.is_some();
            Ok((
                LocalReconstruction {
                    topology: rec.topology,
                    intersections: rec.intersections,
                    interface: lift_iface3(rec.interface),
                },
                subs,
                cut,
            ))
        }
        f => Err(Error::InvalidArgument(format!("pieces must be simplices, got {f:?}"))),
    }
}

/// Runs `attempt` on a piece; invalid data (`Ok(None)`) or a failure cured by
/// refinement splits the piece uniformly and retries on the children.
#[allow(clippy::too_many_arguments)]
fn with_refinement<const D: usize, T>(
    piece: SubElement<D>,
    mut values: Vec<f64>,
    depth: usize,
    cfg: &ReconstructionConfig,
    element: usize,
    attempt: &impl Fn(&SubElement<D>, &[f64]) -> Result<Option<Vec<T>>>,
    out: &mut Vec<T>,
    refinements: &mut usize,
) -> Result<()> {
    perturb_corners(&mut values, piece.family.corner_count(), cfg.perturbation);
    let reason = match attempt(&piece, &values) {
        Ok(Some(items)) => {
            out.extend(items);
            return Ok(());
        }
        Ok(None) => "invalid level-set data".to_string(),
        Err(e) if e.triggers_refinement() => e.to_string(),
        Err(e) => return Err(e),
    };
    if depth >= cfg.depth_limit {
        return Err(Error::RefinementExhausted { element, depth, reason });
    }
    *refinements += 1;
    let elem = ReferenceElement::cached(piece.family, piece.order)?;
    let kids = red_children(piece.family)?;
    let children = sub_pieces(&piece, piece.family, &kids, Some(0))?;
    let mut shapes = vec![0.0; elem.node_count()];
    for (child, cc) in children.into_iter().zip(&kids) {
        let child_values = child_node_coords(elem, cc)
            .iter()
            .map(|r| {
                elem.eval(&r[..elem.dim()], &mut shapes, None);
                shapes.iter().zip(&values).map(|(n, v)| n * v).sum()
            })
            .collect();
        with_refinement(child, child_values, depth + 1, cfg, element, attempt, out, refinements)?;
    }
    Ok(())
}

/// Interfaces of one background element in its reference coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct ElementInterfaces<const D: usize> {
    pub interfaces: Vec<InterfaceElement<D>>,
    pub refinements: usize,
}

/// Reconstruction only (no decomposition) for a single level set, refining
/// where the data are invalid or the reconstruction fails.
pub fn reconstruct_element<const D: usize>(
    values: &[f64],
    order: usize,
    cfg: &ReconstructionConfig,
    element: usize,
) -> Result<ElementInterfaces<D>> {
    let attempt = |piece: &SubElement<D>, vals: &[f64]| -> Result<Option<Vec<InterfaceElement<D>>>> {
        let elem = ReferenceElement::cached(piece.family, piece.order)?;
        if !check_validity(elem, vals, cfg)?.valid {
            return Ok(None);
        }
        let (rec, _, _) = match elem.family() {
            ElementFamily::Triangle => {
                let rec = reconstruct_2d(elem, vals, cfg)?;
                (lift_rec::<2, D>(rec), (), ())
            }
            _ => {
                let rec = reconstruct_3d(elem, vals, cfg)?;
                (lift_rec::<3, D>(rec), (), ())
            }
        };
        Ok(Some(
            rec.interface
                .into_iter()
                .map(|i| map_interface(elem, piece, i))
                .collect(),
        ))
    };
    let mut out = Vec::new();
    let mut refinements = 0;
    let root = SubElement::<D>::root(order, 1)?;
    with_refinement(root, values.to_vec(), 0, cfg, element, &attempt, &mut out, &mut refinements)?;
    Ok(ElementInterfaces {
        interfaces: out,
        refinements,
    })
}

fn lift_rec<const A: usize, const B: usize>(rec: LocalReconstruction<A>) -> LocalReconstruction<B> {
    LocalReconstruction {
        topology: rec.topology,
        intersections: rec.intersections,
        interface: rec.interface.map(|i| InterfaceElement {
            family: i.family,
            order: i.order,
            nodes: i.nodes.iter().map(lift::<A, B>).collect(),
        }),
    }
}

fn map_interface<const D: usize>(elem: &ReferenceElement, piece: &SubElement<D>, i: InterfaceElement<D>) -> InterfaceElement<D> {
    InterfaceElement {
        family: i.family,
        order: i.order,
        nodes: i.nodes.iter().map(|x| map_point(elem, &piece.nodes, &x.as_slice()[..D])).collect(),
    }
}

/// Interfaces of all elements of a mesh for level set `f`, element-parallel.
pub fn reconstruct_mesh<const D: usize>(
    mesh: &BackgroundMesh<D>,
    field: &LevelSetField,
    f: usize,
    cfg: &ReconstructionConfig,
) -> Result<Vec<ElementInterfaces<D>>> {
    (0..mesh.element_count())
        .into_par_iter()
        .map(|e| reconstruct_element(&field.element_values(mesh, f, e), mesh.order(), cfg, e))
        .collect()
}

/// Decompose one piece with respect to level set `k`: sub-elements in root
/// coordinates, checked for positive Jacobians, simplexified if requested.
fn split_piece<const D: usize>(
    piece: &SubElement<D>,
    values: &[f64],
    k: usize,
    simplices: bool,
    cfg: &ReconstructionConfig,
) -> Result<Option<Vec<SubElement<D>>>> {
    let elem = ReferenceElement::cached(piece.family, piece.order)?;
    if !check_validity(elem, values, cfg)?.valid {
        return Ok(None);
    }
    let (rec, subs, cut) = reconstruct_local::<D>(elem, values, cfg)?;
    if !cut {
        let mut whole = piece.clone();
        whole.signs = piece.signs.with(k, rec.topology.corner_negative[0]);
        return Ok(Some(vec![whole]));
    }
    let mut out = Vec::new();
    for sub in subs.expect("cut element has sub-elements") {
        let corner_local: Vec<[f64; 3]> = sub.nodes[..sub.family.corner_count()]
            .iter()
            .map(|x| {
                let mut c = [0.0; 3];
                c[..D].copy_from_slice(x.as_slice());
                c
            })
            .collect();
        let mut side_tags = inherited_tags(piece, sub.family, &corner_local);
        side_tags[sub.interface_side] = Some(k);
        let nodes: Vec<SVector<f64, D>> = sub
            .nodes
            .iter()
            .map(|x| map_point(elem, &piece.nodes, x.as_slice()))
            .collect();
        let mapped = SubElement {
            family: sub.family,
            order: piece.order,
            nodes,
            signs: piece.signs.with(k, sub.negative),
            side_tags,
            lineage: piece.lineage.clone(),
        };
        let mapped = match mapped.family {
            ElementFamily::Quadrilateral => collapse_quad(&mapped)?.unwrap_or(mapped),
            _ => mapped,
        };
        check_jacobian(mapped.family, mapped.order, &mapped.nodes)?;
        if simplices {
            out.extend(simplexify(&mapped)?);
        } else {
            out.push(mapped);
        }
    }
    Ok(Some(out))
}

/// Interfaces as the sides of the final pieces tagged with a level set,
/// taken from the piece on the negative side.
fn tagged_sides<const D: usize>(leaves: &[SubElement<D>]) -> Result<Vec<TaggedInterface<D>>> {
    let mut out = Vec::new();
    for leaf in leaves {
        let elem = ReferenceElement::cached(leaf.family, leaf.order)?;
        for (s, tag) in leaf.side_tags.iter().enumerate() {
            let Some(k) = *tag else { continue };
            if !leaf.signs.is_negative(k) {
                continue;
            }
            let family = leaf.family.side_family(s).expect("simplex sides");
            out.push(TaggedInterface {
                element: InterfaceElement {
                    family,
                    order: leaf.order,
                    nodes: elem.side_nodes(s).iter().map(|&i| leaf.nodes[i]).collect(),
                },
                level_set: k,
                signs: leaf.signs,
            });
        }
    }
    Ok(out)
}

/// Successive decomposition of one background element with respect to all
/// level sets. `values[k]` are the element's nodal values of `φ_k`; for
/// later functions the pieces take their values from `φ_k^h` at their nodes.
pub fn decompose_element<const D: usize>(
    values: &[Vec<f64>],
    order: usize,
    cfg: &DecompositionConfig,
    element: usize,
) -> Result<ElementDecomposition<D>> {
    let functions = values.len();
    if functions == 0 || functions > SignVector::MAX_FUNCTIONS {
        return Err(Error::InvalidArgument(format!("{functions} level-set functions")));
    }
    let sequence: Vec<usize> = if cfg.processing_order.is_empty() {
        (0..functions).collect()
    } else {
        cfg.processing_order.clone()
    };
    if sequence.iter().any(|&k| k >= functions) {
        return Err(Error::InvalidArgument("processing order names a missing level set".into()));
    }
    let root_elem = ReferenceElement::cached(BackgroundMesh::<D>::simplex_family(), order)?;
    let rcfg = &cfg.reconstruction;
    let root = SubElement::<D>::root(order, functions)?;
    let mut pieces = vec![root];
    let mut refinements = 0;
    let mut shapes = vec![0.0; root_elem.node_count()];
    for (pass, &k) in sequence.iter().enumerate() {
        let simplices = pass + 1 < sequence.len();
        let attempt = |piece: &SubElement<D>, vals: &[f64]| split_piece(piece, vals, k, simplices, rcfg);
        let mut next = Vec::new();
        for piece in pieces {
            let piece_values: Vec<f64> = if pass == 0 {
                values[k].clone()
            } else {
                piece
                    .nodes
                    .iter()
                    .map(|x| {
                        root_elem.eval(x.as_slice(), &mut shapes, None);
                        shapes.iter().zip(&values[k]).map(|(n, v)| n * v).sum()
                    })
                    .collect()
            };
            with_refinement(piece, piece_values, 0, rcfg, element, &attempt, &mut next, &mut refinements)?;
        }
        pieces = next;
    }
    let untouched = refinements == 0 && pieces.len() == 1 && pieces[0].side_tags.iter().all(|t| t.is_none());
    if untouched {
        return Ok(ElementDecomposition::Uncut { signs: pieces[0].signs });
    }
    let interfaces = tagged_sides(&pieces)?;
    Ok(ElementDecomposition::Cut {
        sub_elements: pieces,
        interfaces,
        refinements,
    })
}

/// Decomposition of every element of a mesh, element-parallel.
pub fn decompose_multi<const D: usize>(
    mesh: &BackgroundMesh<D>,
    field: &LevelSetField,
    cfg: &DecompositionConfig,
) -> Result<DecompositionResult<D>> {
    let functions = field.function_count();
    let elements = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| {
            let values: Vec<Vec<f64>> = (0..functions).map(|f| field.element_values(mesh, f, e)).collect();
            decompose_element(&values, mesh.order(), cfg, e)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(DecompositionResult {
        order: mesh.order(),
        functions,
        elements,
    })
}

/// Sub-element in physical coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalSubElement<const D: usize> {
    pub element: usize,
    pub family: ElementFamily,
    pub order: usize,
    pub nodes: Vec<SVector<f64, D>>,
    pub signs: SignVector,
}

/// Compose sub-element maps with the isoparametric background maps and
/// re-check the Jacobians in physical space. Uncut elements are returned
/// whole.
pub fn map_to_physical<const D: usize>(
    result: &DecompositionResult<D>,
    mesh: &BackgroundMesh<D>,
) -> Result<Vec<PhysicalSubElement<D>>> {
    let elem = mesh.reference();
    let mut out = Vec::new();
    for (e, dec) in result.elements.iter().enumerate() {
        let xe = mesh.element_nodes(e);
        match dec {
            ElementDecomposition::Uncut { signs } => out.push(PhysicalSubElement {
                element: e,
                family: elem.family(),
                order: elem.order(),
                nodes: xe,
                signs: *signs,
            }),
            ElementDecomposition::Cut { sub_elements, .. } => {
                for s in sub_elements {
                    let nodes: Vec<SVector<f64, D>> =
                        s.nodes.iter().map(|r| map_point(elem, &xe, r.as_slice())).collect();
                    check_jacobian(s.family, s.order, &nodes)?;
                    out.push(PhysicalSubElement {
                        element: e,
                        family: s.family,
                        order: s.order,
                        nodes,
                        signs: s.signs,
                    });
                }
            }
        }
    }
    Ok(out)
}
