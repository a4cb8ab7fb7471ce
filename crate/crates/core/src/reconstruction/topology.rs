use super::newton::find_edge_root;
use super::{is_negative, ReconstructionConfig};
use crate::error::{Error, Result};
use crate::reference_elements::{ElementFamily, ReferenceElement};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TopologyCase {
    Uncut,
    /// Triangle with one corner separated from the other two.
    Triangle,
    /// Tetrahedron with one corner separated: triangular interface.
    TetraTop1,
    /// Tetrahedron with two corners on each side: quadrilateral interface.
    TetraTop2,
}

/// Cut pattern of a simplex with its corners in canonical order.
///
/// * `Triangle`: `[L, A, B]`, counter-clockwise, `L` alone.
/// * `TetraTop1`: `[L, A, B, C]`, positively oriented, `L` alone.
/// * `TetraTop2`: `[A, B, C, D]`, positively oriented, `A, B` on one side.
///
/// `cut_edges` lists the cut edges as corner pairs, in the order the
/// interface corners are numbered: `L-A, L-B(, L-C)` or `A-C, B-C, B-D, A-D`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CutTopology {
    pub case: TopologyCase,
    /// `true` where the corner value is negative.
    pub corner_negative: Vec<bool>,
    pub corners: Vec<usize>,
    pub cut_edges: Vec<[usize; 2]>,
}

impl CutTopology {
    /// Whether the separated corner (`L`) or pair (`A, B`) lies in the negative region.
    pub fn first_negative(&self) -> bool {
        self.corner_negative[self.corners[0]]
    }
}

fn orientation(family: ElementFamily, c: &[usize]) -> f64 {
    let x = |k: usize| family.lattice_coords(1, family.corner_lattice(1, c[k]));
    let (o, a, b, d) = (x(0), x(1), x(2), x(3));
    let u = [a[0] - o[0], a[1] - o[1], a[2] - o[2]];
    let v = [b[0] - o[0], b[1] - o[1], b[2] - o[2]];
    let w = [d[0] - o[0], d[1] - o[1], d[2] - o[2]];
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// Cut pattern from the corner values of a triangle or tetrahedron.
pub fn classify_topology(family: ElementFamily, corner_values: &[f64]) -> Result<CutTopology> {
    let n = family.corner_count();
    if corner_values.len() < n {
        return Err(Error::InvalidArgument(format!("{} corner values for {family:?}", corner_values.len())));
    }
    let neg: Vec<bool> = corner_values[..n].iter().map(|&v| is_negative(v)).collect();
    let count = neg.iter().filter(|&&s| s).count();
    let uncut = CutTopology {
        case: TopologyCase::Uncut,
        corner_negative: neg.clone(),
        corners: (0..n).collect(),
        cut_edges: Vec::new(),
    };
    if count == 0 || count == n {
        return Ok(uncut);
    }
    let lone_of = |neg: &[bool]| -> usize {
        let minority = count == 1;
        (0..n).find(|&k| neg[k] == minority).expect("mixed signs")
    };
    match family {
        ElementFamily::Triangle => {
            let l = lone_of(&neg);
            let (a, b) = ((l + 1) % 3, (l + 2) % 3);
            Ok(CutTopology {
                case: TopologyCase::Triangle,
                corner_negative: neg,
                corners: vec![l, a, b],
                cut_edges: vec![[l, a], [l, b]],
            })
        }
        ElementFamily::Tetrahedron if count == 1 || count == 3 => {
            let l = lone_of(&neg);
            let mut c: Vec<usize> = (0..4).filter(|&k| k != l).collect();
            c.insert(0, l);
            if orientation(family, &c) < 0.0 {
                c.swap(2, 3);
            }
            Ok(CutTopology {
                case: TopologyCase::TetraTop1,
                corner_negative: neg,
                cut_edges: vec![[c[0], c[1]], [c[0], c[2]], [c[0], c[3]]],
                corners: c,
            })
        }
        ElementFamily::Tetrahedron => {
            let mut c: Vec<usize> = (0..4).filter(|&k| neg[k] == neg[0]).collect();
            c.extend((0..4).filter(|&k| neg[k] != neg[0]));
            if orientation(family, &c) < 0.0 {
                c.swap(2, 3);
            }
            Ok(CutTopology {
                case: TopologyCase::TetraTop2,
                corner_negative: neg,
                cut_edges: vec![[c[0], c[2]], [c[1], c[2]], [c[1], c[3]], [c[0], c[3]]],
                corners: c,
            })
        }
        _ => Err(Error::InvalidArgument(format!("cannot classify {family:?}"))),
    }
}

/// Root on a cut edge, at parameter `t` from `corners[0]` to `corners[1]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EdgeIntersection {
    pub corners: [usize; 2],
    pub t: f64,
    /// Reference coordinates, padded to 3.
    pub point: [f64; 3],
}

/// Roots of `φ^h` on the cut edges of `topology`, in its `cut_edges` order.
pub fn find_edge_intersections(
    elem: &ReferenceElement,
    values: &[f64],
    topology: &CutTopology,
    cfg: &ReconstructionConfig,
) -> Result<Vec<EdgeIntersection>> {
    let family = elem.family();
    topology
        .cut_edges
        .iter()
        .map(|&[c0, c1]| {
            let ids = elem.path_nodes(c0, c1);
            let vals: Vec<f64> = ids.iter().map(|&i| values[i]).collect();
            let t = find_edge_root(&vals, cfg)?;
            let a = family.lattice_coords(1, family.corner_lattice(1, c0));
            let b = family.lattice_coords(1, family.corner_lattice(1, c1));
            let mut point = [0.0; 3];
            for k in 0..3 {
                point[k] = a[k] + t * (b[k] - a[k]);
            }
            Ok(EdgeIntersection {
                corners: [c0, c1],
                t,
                point,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_elements::ElementFamily::*;

    #[test]
    fn triangle_lone_corner() {
        let t = classify_topology(Triangle, &[1.0, -1.0, 2.0]).unwrap();
        assert_eq!(t.case, TopologyCase::Triangle);
        assert_eq!(t.corners, vec![1, 2, 0]);
        assert_eq!(t.cut_edges, vec![[1, 2], [1, 0]]);
        assert!(t.first_negative());
    }

    #[test]
    fn ties_count_positive() {
        let t = classify_topology(Triangle, &[0.0, 1e-14, 2.0]).unwrap();
        assert_eq!(t.case, TopologyCase::Uncut);
        let t = classify_topology(Tetrahedron, &[1.0, 0.0, -1.0, -1.0]).unwrap();
        assert_eq!(t.case, TopologyCase::TetraTop2);
    }

    #[test]
    fn tetra_cases_are_positively_oriented() {
        let signs = [-1.0, 1.0];
        for mask in 1..15usize {
            let v: Vec<f64> = (0..4).map(|k| signs[(mask >> k) & 1]).collect();
            let t = classify_topology(Tetrahedron, &v).unwrap();
            assert!(orientation(Tetrahedron, &t.corners) > 0.0);
            let negatives = v.iter().filter(|&&x| x < 0.0).count();
            match t.case {
                TopologyCase::TetraTop1 => {
                    assert!(negatives == 1 || negatives == 3);
                    let l = t.corners[0];
                    assert!(t.corners[1..].iter().all(|&k| t.corner_negative[k] != t.corner_negative[l]));
                }
                TopologyCase::TetraTop2 => {
                    assert_eq!(negatives, 2);
                    let c = &t.corners;
                    assert_eq!(t.corner_negative[c[0]], t.corner_negative[c[1]]);
                    assert_eq!(t.corner_negative[c[2]], t.corner_negative[c[3]]);
                    assert_ne!(t.corner_negative[c[0]], t.corner_negative[c[2]]);
                }
                _ => panic!("unexpected case"),
            }
            for e in &t.cut_edges {
                assert_ne!(t.corner_negative[e[0]], t.corner_negative[e[1]]);
            }
        }
    }

    #[test]
    fn intersections_of_plane() {
        let elem = ReferenceElement::cached(Tetrahedron, 3).unwrap();
        let v: Vec<f64> = elem.nodes().iter().map(|x| x[0] + 2.0 * x[1] - 0.4).collect();
        let topo = classify_topology(Tetrahedron, &v[..4]).unwrap();
        let cfg = ReconstructionConfig::default();
        let cuts = find_edge_intersections(elem, &v, &topo, &cfg).unwrap();
        assert_eq!(topo.case, TopologyCase::TetraTop2);
        assert_eq!(cuts.len(), 4);
        for c in cuts {
            let x = c.point;
            assert!((x[0] + 2.0 * x[1] - 0.4).abs() < 1e-14);
        }
    }
}
