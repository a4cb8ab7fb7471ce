use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::levelset::perturb_corners;
use crate::reference_elements::{map_point, ElementFamily, ReferenceElement};

fn corner_coords(family: ElementFamily) -> Vec<[f64; 3]> {
    (0..family.corner_count())
        .map(|c| family.lattice_coords(1, family.corner_lattice(1, c)))
        .collect()
}

fn mid(a: [f64; 3], b: [f64; 3]) -> [f64; 3] {
    [0.5 * (a[0] + b[0]), 0.5 * (a[1] + b[1]), 0.5 * (a[2] + b[2])]
}

fn det3(c: &[[f64; 3]]) -> f64 {
    let d = |k: usize| [c[k][0] - c[0][0], c[k][1] - c[0][1], c[k][2] - c[0][2]];
    let (u, v, w) = (d(1), d(2), d(3));
    u[0] * (v[1] * w[2] - v[2] * w[1]) - u[1] * (v[0] * w[2] - v[2] * w[0]) + u[2] * (v[0] * w[1] - v[1] * w[0])
}

/// Corners of the children of a uniform split, in the parent's reference
/// coordinates: 4 triangles or 8 positively oriented tetrahedra.
pub fn red_children(family: ElementFamily) -> Result<Vec<Vec<[f64; 3]>>> {
    let v = corner_coords(family);
    match family {
        ElementFamily::Triangle => {
            let (m01, m12, m20) = (mid(v[0], v[1]), mid(v[1], v[2]), mid(v[2], v[0]));
            Ok(vec![
                vec![v[0], m01, m20],
                vec![m01, v[1], m12],
                vec![m20, m12, v[2]],
                vec![m01, m12, m20],
            ])
        }
        ElementFamily::Tetrahedron => {
            let m = |a: usize, b: usize| mid(v[a], v[b]);
            let mut out = vec![
                vec![v[0], m(0, 1), m(0, 2), m(0, 3)],
                vec![m(0, 1), v[1], m(1, 2), m(1, 3)],
                vec![m(0, 2), m(1, 2), v[2], m(2, 3)],
                vec![m(0, 3), m(1, 3), m(2, 3), v[3]],
            ];
            // inner octahedron split along the diagonal m02-m13
            let ring = [m(0, 1), m(1, 2), m(2, 3), m(0, 3)];
            for k in 0..4 {
                out.push(vec![m(0, 2), m(1, 3), ring[k], ring[(k + 1) % 4]]);
            }
            for c in out.iter_mut() {
                if det3(c) < 0.0 {
                    c.swap(2, 3);
                }
            }
            Ok(out)
        }
        _ => Err(Error::InvalidArgument(format!("refinement of {family:?}"))),
    }
}

/// Reference coordinates (in the parent) of the nodes of a child simplex.
pub(crate) fn child_node_coords(elem: &ReferenceElement, corners: &[[f64; 3]]) -> Vec<[f64; 3]> {
    elem.nodes()
        .iter()
        .map(|r| {
            let d = elem.dim();
            let s: f64 = r[..d].iter().sum();
            let mut x = corners[0].map(|c| c * (1.0 - s));
            for k in 0..d {
                for j in 0..3 {
                    x[j] += r[k] * corners[k + 1][j];
                }
            }
            x
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct RefinementNode<const D: usize> {
    /// Positions of the order-`p` nodes in the coordinates of the root.
    pub nodes: Vec<SVector<f64, D>>,
    /// Nodal level-set values, corners perturbed away from zero.
    pub values: Vec<f64>,
    pub depth: usize,
    pub children: Vec<usize>,
}

/// Recursive uniform refinement of one simplex. Children inherit the
/// parent's `φ^h` by interpolation at their nodes, so the discrete level set
/// is the same on every level.
#[derive(Clone, Debug)]
pub struct RefinementTree<const D: usize> {
    pub family: ElementFamily,
    pub order: usize,
    pub depth_limit: usize,
    pub perturbation: f64,
    pub nodes: Vec<RefinementNode<D>>,
}

impl<const D: usize> RefinementTree<D> {
    pub fn new(
        family: ElementFamily,
        order: usize,
        root_nodes: Vec<SVector<f64, D>>,
        values: Vec<f64>,
        depth_limit: usize,
        perturbation: f64,
    ) -> Result<Self> {
        let elem = ReferenceElement::cached(family, order)?;
        if root_nodes.len() != elem.node_count() || values.len() != elem.node_count() {
            return Err(Error::InvalidArgument("refinement root needs one position and value per node".into()));
        }
        Ok(RefinementTree {
            family,
            order,
            depth_limit,
            perturbation,
            nodes: vec![RefinementNode {
                nodes: root_nodes,
                values,
                depth: 0,
                children: Vec::new(),
            }],
        })
    }

    pub fn leaves(&self) -> Vec<usize> {
        (0..self.nodes.len()).filter(|&i| self.nodes[i].children.is_empty()).collect()
    }

    /// Split a leaf; fails at the depth limit.
    pub fn refine(&mut self, leaf: usize) -> Result<Vec<usize>> {
        let parent = &self.nodes[leaf];
        if !parent.children.is_empty() {
            return Err(Error::InvalidArgument(format!("node {leaf} is already refined")));
        }
        if parent.depth >= self.depth_limit {
            return Err(Error::RefinementExhausted {
                element: 0,
                depth: parent.depth,
                reason: "depth limit reached".into(),
            });
        }
        let elem = ReferenceElement::cached(self.family, self.order)?;
        let mut shapes = vec![0.0; elem.node_count()];
        let mut children = Vec::new();
        for corners in red_children(self.family)? {
            let local = child_node_coords(elem, &corners);
            let mut nodes = Vec::with_capacity(local.len());
            let mut values = Vec::with_capacity(local.len());
            for r in &local {
                let r = &r[..elem.dim()];
                nodes.push(map_point(elem, &parent.nodes, r));
                elem.eval(r, &mut shapes, None);
                values.push(shapes.iter().zip(&parent.values).map(|(n, v)| n * v).sum());
            }
            perturb_corners(&mut values, elem.corner_count(), self.perturbation);
            children.push(RefinementNode {
                nodes,
                values,
                depth: parent.depth + 1,
                children: Vec::new(),
            });
        }
        let first = self.nodes.len();
        let ids: Vec<usize> = (first..first + children.len()).collect();
        self.nodes.extend(children);
        self.nodes[leaf].children = ids.clone();
        Ok(ids)
    }
}
