//! Higher-order simplicial background meshes.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::reference_elements::{ElementFamily, ReferenceElement};

/// Lagrange triangle (`D = 2`) or tetrahedron (`D = 3`) mesh. Element node
/// lists follow the [`ReferenceElement`] node order.
#[derive(Clone, Debug)]
pub struct BackgroundMesh<const D: usize> {
    order: usize,
    nodes: Vec<SVector<f64, D>>,
    elements: Vec<Vec<usize>>,
    corner_node: Vec<bool>,
    h: f64,
}

impl<const D: usize> BackgroundMesh<D> {
    pub fn simplex_family() -> ElementFamily {
        match D {
            2 => ElementFamily::Triangle,
            3 => ElementFamily::Tetrahedron,
            _ => panic!("background meshes are 2D or 3D"),
        }
    }

    pub fn new(order: usize, nodes: Vec<SVector<f64, D>>, elements: Vec<Vec<usize>>, h: f64) -> Result<Self> {
        let elem = ReferenceElement::cached(Self::simplex_family(), order)?;
        let mut corner_node = vec![false; nodes.len()];
        for (e, conn) in elements.iter().enumerate() {
            if conn.len() != elem.node_count() {
                return Err(Error::InvalidArgument(format!(
                    "element {e} has {} nodes, expected {}",
                    conn.len(),
                    elem.node_count()
                )));
            }
            if let Some(&bad) = conn.iter().find(|&&i| i >= nodes.len()) {
                return Err(Error::InvalidArgument(format!("element {e} references missing node {bad}")));
            }
            for &i in &conn[..elem.corner_count()] {
                corner_node[i] = true;
            }
        }
        Ok(BackgroundMesh {
            order,
            nodes,
            elements,
            corner_node,
            h,
        })
    }

    /// Box `[lo, hi]` split into `n^D` cells, two triangles per square or six
    /// tetrahedra per cube around the main diagonal, with straight edges.
    pub fn structured(n: usize, order: usize, lo: [f64; D], hi: [f64; D]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("need at least one cell per dimension".into()));
        }
        let elem = ReferenceElement::cached(Self::simplex_family(), order)?;
        let p = order;
        let m = n * p + 1;
        let index = |c: [usize; 3]| -> usize { (0..D).rev().fold(0, |acc, k| acc * m + c[k]) };
        let total = m.pow(D as u32);
        let mut nodes = Vec::with_capacity(total);
        for g in 0..total {
            let mut rem = g;
            let x = SVector::<f64, D>::from_fn(|k, _| {
                let i = rem % m;
                rem /= m;
                lo[k] + (hi[k] - lo[k]) * i as f64 / (m - 1) as f64
            });
            nodes.push(x);
        }

        let cell_simplices: Vec<Vec<[usize; 3]>> = match D {
            2 => vec![vec![[0, 0, 0], [1, 0, 0], [1, 1, 0]], vec![[0, 0, 0], [1, 1, 0], [0, 1, 0]]],
            _ => kuhn_tetrahedra(),
        };
        let mut elements = Vec::with_capacity(n.pow(D as u32) * cell_simplices.len());
        let cells = n.pow(D as u32);
        for cell in 0..cells {
            let mut rem = cell;
            let mut origin = [0usize; 3];
            for o in origin.iter_mut().take(D) {
                *o = (rem % n) * p;
                rem /= n;
            }
            for simplex in &cell_simplices {
                let conn = elem
                    .lattice()
                    .iter()
                    .map(|l| {
                        let mut bary = [0usize; 4];
                        bary[1..=D].copy_from_slice(&l[..D]);
                        bary[0] = p - l[..D].iter().sum::<usize>();
                        let mut c = origin;
                        for (k, corner) in simplex.iter().enumerate() {
                            for d in 0..D {
                                c[d] += bary[k] * corner[d];
                            }
                        }
                        index(c)
                    })
                    .collect();
                elements.push(conn);
            }
        }
        let h = (hi[0] - lo[0]) / n as f64;
        Self::new(order, nodes, elements, h)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn reference(&self) -> &'static ReferenceElement {
        ReferenceElement::cached(Self::simplex_family(), self.order).expect("validated at construction")
    }

    pub fn nodes(&self) -> &[SVector<f64, D>] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    pub fn element_count(&self) -> usize {
        self.elements.len()
    }

    /// Element size used for convergence plots.
    pub fn h(&self) -> f64 {
        self.h
    }

    /// Whether node `i` is a corner of at least one element.
    pub fn is_corner_node(&self, i: usize) -> bool {
        self.corner_node[i]
    }

    pub fn element_nodes(&self, e: usize) -> Vec<SVector<f64, D>> {
        self.elements[e].iter().map(|&i| self.nodes[i]).collect()
    }

    pub fn set_node(&mut self, i: usize, x: SVector<f64, D>) {
        self.nodes[i] = x;
    }
}

/// Six tetrahedra of the unit cube sharing the diagonal `(0,0,0)-(1,1,1)`,
/// positively oriented.
fn kuhn_tetrahedra() -> Vec<Vec<[usize; 3]>> {
    let perms = [[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]];
    perms
        .iter()
        .map(|perm| {
            let mut pts = vec![[0usize; 3]];
            let mut cur = [0usize; 3];
            for &axis in perm {
                cur[axis] = 1;
                pts.push(cur);
            }
            let v = |k: usize| [pts[k][0] as f64, pts[k][1] as f64, pts[k][2] as f64];
            let (a, b, c) = (v(1), v(2), v(3));
            let det = a[0] * (b[1] * c[2] - b[2] * c[1]) - a[1] * (b[0] * c[2] - b[2] * c[0])
                + a[2] * (b[0] * c[1] - b[1] * c[0]);
            if det < 0.0 {
                pts.swap(2, 3);
            }
            pts
        })
        .collect()
}
