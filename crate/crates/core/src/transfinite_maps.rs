//! Transfinite maps from prescribed curved boundary entities.
//!
//! * [`map_tri_from_edges`] and [`map_quad_from_edges`]: surfaces (or planar
//!   regions) bounded by three or four higher-order line elements.
//! * [`map_tetra_one_curved_face`]: a tetrahedron whose face opposite corner 0
//!   is a higher-order triangle; the other three edges are straight.
//! * [`map_prism_tri_face`] and [`map_prism_quad_face`]: prisms with exactly one
//!   curved face.
//!
//! The ramp functions of the triangle and tetrahedron maps have removable
//! singularities at corners and edges. They are never evaluated as quotients:
//! each edge deviation `d(u)` vanishes at `u = ±1`, so `d(u) / (N1(u) N2(u))`
//! is a polynomial of degree `p - 2` and is built directly from the interior
//! node deviations (see [`CurvedLine::quotient`]). The face bubble of the
//! tetrahedron map is treated the same way.
//!
//! Line elements are given with nodes in [`ReferenceElement`] order for
//! [`ElementFamily::Line`]: `u = -1`, `u = 1`, then interior nodes ascending.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::reference_elements::{line_basis, map_point, ElementFamily, ReferenceElement};

const CLOSURE_TOL: f64 = 1e-12;

/// A higher-order line element split into its chord and interior deviations.
#[derive(Clone, Debug)]
pub struct CurvedLine<const D: usize> {
    order: usize,
    start: SVector<f64, D>,
    end: SVector<f64, D>,
    /// Interior node parameters, ascending.
    params: Vec<f64>,
    /// `x_i - L(u_i)` for each interior node.
    deltas: Vec<SVector<f64, D>>,
}

impl<const D: usize> CurvedLine<D> {
    pub fn from_nodes(nodes: &[SVector<f64, D>]) -> Result<Self> {
        if nodes.len() < 2 {
            return Err(Error::InvalidArgument(format!("line element with {} nodes", nodes.len())));
        }
        let p = nodes.len() - 1;
        let (start, end) = (nodes[0], nodes[1]);
        let params: Vec<f64> = (1..p).map(|i| -1.0 + 2.0 * i as f64 / p as f64).collect();
        let deltas = params
            .iter()
            .zip(&nodes[2..])
            .map(|(&u, x)| x - (start * (0.5 * (1.0 - u)) + end * (0.5 * (1.0 + u))))
            .collect();
        Ok(CurvedLine {
            order: p,
            start,
            end,
            params,
            deltas,
        })
    }

    /// Straight line element of order `p` between two points.
    pub fn straight(start: SVector<f64, D>, end: SVector<f64, D>, order: usize) -> Self {
        CurvedLine {
            order,
            start,
            end,
            params: (1..order).map(|i| -1.0 + 2.0 * i as f64 / order as f64).collect(),
            deltas: vec![SVector::zeros(); order.saturating_sub(1)],
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn start(&self) -> SVector<f64, D> {
        self.start
    }

    pub fn end(&self) -> SVector<f64, D> {
        self.end
    }

    /// `q(u) = d(u) / (N1(u) N2(u))` with `d` the deviation from the chord.
    pub fn quotient(&self, u: f64) -> SVector<f64, D> {
        let mut out = SVector::zeros();
        for (i, (&ui, di)) in self.params.iter().zip(&self.deltas).enumerate() {
            let mut w = 4.0 / ((1.0 + ui) * (1.0 - ui));
            for (j, &uj) in self.params.iter().enumerate() {
                if j != i {
                    w *= (u - uj) / (ui - uj);
                }
            }
            out += di * w;
        }
        out
    }

    /// Deviation from the chord, `d(u) = x(u) - L(u)`.
    pub fn deviation(&self, u: f64) -> SVector<f64, D> {
        self.quotient(u) * (0.25 * (1.0 - u) * (1.0 + u))
    }

    /// The line element itself at `u`.
    pub fn eval(&self, u: f64) -> SVector<f64, D> {
        self.start * (0.5 * (1.0 - u)) + self.end * (0.5 * (1.0 + u)) + self.deviation(u)
    }

    /// Node coordinates in line-element order.
    pub fn nodes(&self) -> Vec<SVector<f64, D>> {
        let mut out = vec![self.start, self.end];
        out.extend(self.params.iter().map(|&u| self.eval(u)));
        out
    }
}

/// Closed contour of three or four line elements of equal order. Edge `k`
/// runs from contour corner `k` to corner `k + 1`.
#[derive(Clone, Debug)]
pub struct CurvedEdgeSet<const D: usize> {
    edges: Vec<CurvedLine<D>>,
}

impl<const D: usize> CurvedEdgeSet<D> {
    pub fn new(edges: &[Vec<SVector<f64, D>>]) -> Result<Self> {
        let lines = edges.iter().map(|e| CurvedLine::from_nodes(e)).collect::<Result<Vec<_>>>()?;
        Self::from_lines(lines)
    }

    pub fn from_lines(edges: Vec<CurvedLine<D>>) -> Result<Self> {
        if !(3..=4).contains(&edges.len()) {
            return Err(Error::InvalidArgument(format!("{} edges, expected 3 or 4", edges.len())));
        }
        let p = edges[0].order();
        if edges.iter().any(|e| e.order() != p) {
            return Err(Error::InvalidArgument("edges of different order".into()));
        }
        let n = edges.len();
        for k in 0..n {
            let gap = (edges[k].end() - edges[(k + 1) % n].start()).norm();
            if gap > CLOSURE_TOL {
                return Err(Error::InvalidArgument(format!(
                    "edge {k} ends {gap:e} away from the start of edge {}, contour not closed",
                    (k + 1) % n
                )));
            }
        }
        Ok(CurvedEdgeSet { edges })
    }

    pub fn edges(&self) -> &[CurvedLine<D>] {
        &self.edges
    }

    pub fn order(&self) -> usize {
        self.edges[0].order()
    }

    pub fn corner(&self, k: usize) -> SVector<f64, D> {
        self.edges[k].start()
    }
}

/// Triangle bounded by three curved edges, `a` in the reference triangle.
pub fn map_tri_from_edges<const D: usize>(edges: &CurvedEdgeSet<D>, a: &[f64]) -> Result<SVector<f64, D>> {
    if edges.edges.len() != 3 {
        return Err(Error::InvalidArgument("triangle map needs three edges".into()));
    }
    Ok(tri_map(&edges.edges, a[0], a[1]))
}

fn tri_map<const D: usize>(e: &[CurvedLine<D>], a: f64, b: f64) -> SVector<f64, D> {
    let n = [1.0 - a - b, a, b];
    let u = [2.0 * a - 1.0, b - a, 1.0 - 2.0 * b];
    let mut r = e[0].start() * n[0] + e[1].start() * n[1] + e[2].start() * n[2];
    for k in 0..3 {
        let w = n[k] * n[(k + 1) % 3];
        if w != 0.0 {
            r += e[k].quotient(u[k]) * w;
        }
    }
    r
}

/// Quadrilateral bounded by four curved edges, `a` in `[-1, 1]²`.
pub fn map_quad_from_edges<const D: usize>(edges: &CurvedEdgeSet<D>, a: &[f64]) -> Result<SVector<f64, D>> {
    if edges.edges.len() != 4 {
        return Err(Error::InvalidArgument("quadrilateral map needs four edges".into()));
    }
    let (x, y) = (a[0], a[1]);
    let n = [
        0.25 * (1.0 - x) * (1.0 - y),
        0.25 * (1.0 + x) * (1.0 - y),
        0.25 * (1.0 + x) * (1.0 + y),
        0.25 * (1.0 - x) * (1.0 + y),
    ];
    let u = [x, y, -x, -y];
    let e = &edges.edges;
    let mut r = SVector::zeros();
    for k in 0..4 {
        r += e[k].start() * n[k] + e[k].deviation(u[k]) * (n[k] + n[(k + 1) % 4]);
    }
    Ok(r)
}

/// Tetrahedron with one curved face.
///
/// The apex sits at reference corner 0; the face nodes are those of a
/// triangle element whose corners 0, 1, 2 become tetrahedron corners 1, 2, 3.
#[derive(Clone, Debug)]
pub struct CurvedFaceTetra<const D: usize> {
    apex: SVector<f64, D>,
    corners: [SVector<f64, D>; 3],
    order: usize,
    edges: [CurvedLine<D>; 3],
    /// Face-interior bubble coefficients with their barycentric lattice index.
    bubble: Vec<([usize; 3], SVector<f64, D>)>,
}

impl<const D: usize> CurvedFaceTetra<D> {
    pub fn new(apex: SVector<f64, D>, face_nodes: &[SVector<f64, D>]) -> Result<Self> {
        let p = (1..=crate::reference_elements::MAX_ORDER)
            .find(|&p| ElementFamily::Triangle.node_count(p) == face_nodes.len())
            .ok_or_else(|| Error::InvalidArgument(format!("{} face nodes", face_nodes.len())))?;
        let tri = ReferenceElement::cached(ElementFamily::Triangle, p)?;
        let corners = [face_nodes[0], face_nodes[1], face_nodes[2]];
        let (e1, e2) = (corners[1] - corners[0], corners[2] - corners[0]);
        let gram = e1.norm_squared() * e2.norm_squared() - e1.dot(&e2).powi(2);
        if gram <= 1e-28 * e1.norm_squared().max(e2.norm_squared()).powi(2) {
            return Err(Error::InvalidArgument("face corners are collinear".into()));
        }
        let line = |k: usize| -> Result<CurvedLine<D>> {
            let ids = tri.edge_nodes(k);
            let mut nodes = vec![face_nodes[ids[0]], face_nodes[ids[p]]];
            nodes.extend(ids[1..p].iter().map(|&i| face_nodes[i]));
            CurvedLine::from_nodes(&nodes)
        };
        let edges = [line(0)?, line(1)?, line(2)?];
        let mut geom = CurvedFaceTetra {
            apex,
            corners,
            order: p,
            edges,
            bubble: Vec::new(),
        };
        let mut bubble = Vec::new();
        for (i, l) in tri.lattice().iter().enumerate() {
            let alpha = [p - l[0] - l[1], l[0], l[1]];
            if alpha.iter().all(|&k| k >= 1) {
                let lam = [
                    alpha[0] as f64 / p as f64,
                    alpha[1] as f64 / p as f64,
                    alpha[2] as f64 / p as f64,
                ];
                let flat = corners[0] * lam[0] + corners[1] * lam[1] + corners[2] * lam[2];
                let b = face_nodes[i] - flat - geom.edge_term(lam[0], lam[1], lam[2]);
                bubble.push((alpha, b));
            }
        }
        geom.bubble = bubble;
        Ok(geom)
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn edge_term(&self, a: f64, b: f64, c: f64) -> SVector<f64, D> {
        let mut r = SVector::zeros();
        for (k, (w, arg)) in [(a * b, b - a), (b * c, c - b), (c * a, a - c)].into_iter().enumerate() {
            if w != 0.0 {
                r += self.edges[k].quotient(arg) * w;
            }
        }
        r
    }
}

/// Evaluates the tetrahedron map at `a` in the reference tetrahedron.
pub fn map_tetra_one_curved_face<const D: usize>(geom: &CurvedFaceTetra<D>, a: &[f64]) -> SVector<f64, D> {
    let (x, y, z) = (a[0], a[1], a[2]);
    let s = 1.0 - x - y - z;
    let mut r = geom.apex * s + geom.corners[0] * x + geom.corners[1] * y + geom.corners[2] * z;
    r += geom.edge_term(x, y, z);
    let w = x * y * z;
    if w != 0.0 && !geom.bubble.is_empty() {
        let p = geom.order as f64;
        let lam = [x + s / 3.0, y + s / 3.0, z + s / 3.0];
        for (alpha, b) in &geom.bubble {
            let mut m = 1.0;
            for k in 0..3 {
                let ak = alpha[k];
                m *= p / ak as f64;
                for j in 1..ak {
                    m *= (p * lam[k] - j as f64) / (ak - j) as f64;
                }
            }
            r += b * (w * m);
        }
    }
    r
}

/// Prism with one curved face.
#[derive(Clone, Debug)]
pub enum CurvedFacePrism<const D: usize> {
    /// Curved triangle (triangle-element nodes) at `c = -1`, flat triangle
    /// with the listed corners at `c = 1`.
    TriFace {
        face: Vec<SVector<f64, D>>,
        top: [SVector<f64, D>; 3],
    },
    /// Curved lateral face over triangle edge `[1, 2]`. `grid[i][j]` is the
    /// face node at axis level `i` (from `c = -1`) and position `j` from
    /// corner 1 to corner 2. The straight axis edge through corner 0 runs
    /// from `axis[0]` to `axis[1]`.
    QuadFace {
        axis: [SVector<f64, D>; 2],
        grid: Vec<Vec<SVector<f64, D>>>,
    },
}

impl<const D: usize> CurvedFacePrism<D> {
    pub fn order(&self) -> usize {
        match self {
            CurvedFacePrism::TriFace { face, .. } => {
                (1..=crate::reference_elements::MAX_ORDER)
                    .find(|&p| ElementFamily::Triangle.node_count(p) == face.len())
                    .unwrap_or(0)
            }
            CurvedFacePrism::QuadFace { grid, .. } => grid.len().saturating_sub(1),
        }
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            CurvedFacePrism::TriFace { face, .. } => {
                if self.order() == 0 {
                    return Err(Error::InvalidArgument(format!("{} triangle face nodes", face.len())));
                }
            }
            CurvedFacePrism::QuadFace { grid, .. } => {
                let n = grid.len();
                if n < 2 || grid.iter().any(|row| row.len() != n) {
                    return Err(Error::InvalidArgument("quadrilateral face grid must be square".into()));
                }
            }
        }
        Ok(())
    }
}

/// Blend between the curved triangle at `c = -1` and the flat one at `c = 1`.
pub fn map_prism_tri_face<const D: usize>(geom: &CurvedFacePrism<D>, a: &[f64]) -> Result<SVector<f64, D>> {
    let CurvedFacePrism::TriFace { face, top } = geom else {
        return Err(Error::InvalidArgument("expected a triangle-face prism".into()));
    };
    geom.validate()?;
    let tri = ReferenceElement::cached(ElementFamily::Triangle, geom.order())?;
    let (x, y, c) = (a[0], a[1], a[2]);
    let bottom = map_point(tri, face, &[x, y]);
    let flat = top[0] * (1.0 - x - y) + top[1] * x + top[2] * y;
    Ok(bottom * (0.5 * (1.0 - c)) + flat * (0.5 * (1.0 + c)))
}

/// Slice-wise map: each constant-`c` slice is a triangle whose side `[1, 2]`
/// is the face curve at that level, interpolated between the grid rows.
pub fn map_prism_quad_face<const D: usize>(geom: &CurvedFacePrism<D>, a: &[f64]) -> Result<SVector<f64, D>> {
    let CurvedFacePrism::QuadFace { axis, grid } = geom else {
        return Err(Error::InvalidArgument("expected a quadrilateral-face prism".into()));
    };
    geom.validate()?;
    let p = grid.len() - 1;
    let (x, y, c) = (a[0], a[1], a[2]);
    let (lc, _) = line_basis(p, c);
    let level: Vec<SVector<f64, D>> = (0..=p)
        .map(|j| (0..=p).fold(SVector::zeros(), |acc, i| acc + grid[i][j] * lc[i]))
        .collect();
    let mut nodes = vec![level[0], level[p]];
    nodes.extend_from_slice(&level[1..p]);
    let curve = CurvedLine::from_nodes(&nodes)?;
    let apex = axis[0] * (0.5 * (1.0 - c)) + axis[1] * (0.5 * (1.0 + c));
    let mut r = apex * (1.0 - x - y) + level[0] * x + level[p] * y;
    if x * y != 0.0 {
        r += curve.quotient(y - x) * (x * y);
    }
    Ok(r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::reference_elements::ReferenceElement;
    use nalgebra::{Vector2, Vector3};
    use proptest::prelude::*;

    fn line_nodes<const D: usize>(f: impl Fn(f64) -> SVector<f64, D>, p: usize) -> Vec<SVector<f64, D>> {
        let e = ReferenceElement::new(ElementFamily::Line, p).unwrap();
        e.nodes().iter().map(|u| f(u[0])).collect()
    }

    fn straight_tri(p: usize) -> CurvedEdgeSet<2> {
        let c = [Vector2::new(0.3, -0.2), Vector2::new(1.4, 0.1), Vector2::new(0.2, 0.9)];
        let edges: Vec<_> = (0..3)
            .map(|k| {
                let (s, e) = (c[k], c[(k + 1) % 3]);
                line_nodes(|u| s * (0.5 * (1.0 - u)) + e * (0.5 * (1.0 + u)), p)
            })
            .collect();
        CurvedEdgeSet::new(&edges).unwrap()
    }

    #[test]
    fn quotient_matches_direct_division() {
        let nodes = line_nodes(|u| Vector2::new(u, (1.3 * u).sin() + 0.2 * u * u), 5);
        let line = CurvedLine::from_nodes(&nodes).unwrap();
        let e = ReferenceElement::new(ElementFamily::Line, 5).unwrap();
        for &u in &[-0.93, -0.4, 0.05, 0.61, 0.88] {
            let x = map_point(&e, &nodes, &[u]);
            let chord = nodes[0] * (0.5 * (1.0 - u)) + nodes[1] * (0.5 * (1.0 + u));
            let direct = (x - chord) / (0.25 * (1.0 - u) * (1.0 + u));
            assert!((line.quotient(u) - direct).norm() < 1e-12);
            assert!((line.eval(u) - x).norm() < 1e-14);
        }
    }

    #[test]
    fn straight_triangle_is_affine() {
        let set = straight_tri(4);
        for &(a, b) in &[(0.0, 0.0), (0.2, 0.3), (1.0, 0.0), (0.5, 0.5), (0.1, 0.7)] {
            let r = map_tri_from_edges(&set, &[a, b]).unwrap();
            let lin = set.corner(0) * (1.0 - a - b) + set.corner(1) * a + set.corner(2) * b;
            assert!((r - lin).norm() < 1e-15);
        }
        assert_eq!(map_tri_from_edges(&set, &[0.0, 0.0]).unwrap(), set.corner(0));
    }

    #[test]
    fn curved_diagonal_midpoint() {
        let p = 3;
        let c = [Vector2::new(0.0, 0.0), Vector2::new(1.0, 0.0), Vector2::new(0.0, 1.0)];
        let diag = line_nodes(|u| Vector2::new(0.5 * (1.0 - u), 0.5 * (1.0 + u)) + Vector2::new(0.2, 0.2) * (1.0 - u * u), p);
        let edges = vec![
            line_nodes(|u| c[0] * (0.5 * (1.0 - u)) + c[1] * (0.5 * (1.0 + u)), p),
            diag.clone(),
            line_nodes(|u| c[2] * (0.5 * (1.0 - u)) + c[0] * (0.5 * (1.0 + u)), p),
        ];
        let set = CurvedEdgeSet::new(&edges).unwrap();
        let line = ReferenceElement::new(ElementFamily::Line, p).unwrap();
        let expect = map_point(&line, &diag, &[0.0]);
        let got = map_tri_from_edges(&set, &[0.5, 0.5]).unwrap();
        assert!((got - expect).norm() < 1e-15);
        assert!((got - Vector2::new(0.7, 0.7)).norm() < 1e-14);
    }

    #[test]
    fn open_contour_is_rejected() {
        let p = 2;
        let e = vec![
            line_nodes(|u| Vector2::new(u, 0.0), p),
            line_nodes(|u| Vector2::new(1.0, u), p),
            line_nodes(|u| Vector2::new(-u, 1.0), p),
            line_nodes(|u| Vector2::new(-1.0, -u + 1e-9), p),
        ];
        assert!(CurvedEdgeSet::new(&e).is_err());
    }

    #[test]
    fn quad_center_moves_by_half_the_bulge() {
        let p = 2;
        let delta = Vector2::new(0.0, -0.15);
        let e = vec![
            line_nodes(|u| Vector2::new(u, -1.0) + delta * (1.0 - u * u), p),
            line_nodes(|u| Vector2::new(1.0, u), p),
            line_nodes(|u| Vector2::new(-u, 1.0), p),
            line_nodes(|u| Vector2::new(-1.0, -u), p),
        ];
        let set = CurvedEdgeSet::new(&e).unwrap();
        let centre = map_quad_from_edges(&set, &[0.0, 0.0]).unwrap();
        assert!((centre - delta * 0.5).norm() < 1e-15);
        for (k, corner) in [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)].iter().enumerate() {
            assert_eq!(map_quad_from_edges(&set, &[corner.0, corner.1]).unwrap(), set.corner(k));
        }
        // bilinear for straight edges
        let straight: Vec<_> = e[1..].to_vec();
        let mut all = vec![line_nodes(|u| Vector2::new(u, -1.0), p)];
        all.extend(straight);
        let flat = CurvedEdgeSet::new(&all).unwrap();
        let r = map_quad_from_edges(&flat, &[0.3, -0.6]).unwrap();
        assert!((r - Vector2::new(0.3, -0.6)).norm() < 1e-15);
    }

    fn curved_face(p: usize, amp: f64) -> Vec<Vector3<f64>> {
        let tri = ReferenceElement::new(ElementFamily::Triangle, p).unwrap();
        let c = [Vector3::new(1.0, 0.0, 0.0), Vector3::new(0.0, 1.0, 0.0), Vector3::new(0.0, 0.0, 1.0)];
        tri.nodes()
            .iter()
            .map(|u| {
                let l = [1.0 - u[0] - u[1], u[0], u[1]];
                let x = c[0] * l[0] + c[1] * l[1] + c[2] * l[2];
                x + Vector3::new(1.0, 1.0, 1.0) * (amp * (l[0] * l[1] + l[1] * l[2] + 2.0 * l[2] * l[0]))
            })
            .collect()
    }

    #[test]
    fn flat_face_tetra_is_affine() {
        let face = curved_face(4, 0.0);
        let apex = Vector3::new(-0.1, 0.05, 0.0);
        let g = CurvedFaceTetra::new(apex, &face).unwrap();
        for a in [[0.0, 0.0, 0.0], [0.2, 0.3, 0.1], [0.25, 0.25, 0.25], [0.0, 0.5, 0.5]] {
            let s = 1.0 - a[0] - a[1] - a[2];
            let lin = apex * s + Vector3::new(a[0], a[1], a[2]);
            assert!((map_tetra_one_curved_face(&g, &a) - lin).norm() < 1e-15);
        }
        assert_eq!(map_tetra_one_curved_face(&g, &[0.0, 0.0, 0.0]), apex);
    }

    #[test]
    fn tetra_face_barycenter() {
        for p in 1..=6 {
            let face = curved_face(p, 0.3);
            let g = CurvedFaceTetra::new(Vector3::zeros(), &face).unwrap();
            let tri = ReferenceElement::new(ElementFamily::Triangle, p).unwrap();
            let expect = map_point(&tri, &face, &[1.0 / 3.0, 1.0 / 3.0]);
            let got = map_tetra_one_curved_face(&g, &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0]);
            assert!((got - expect).norm() < 1e-14, "p={p}: {}", (got - expect).norm());
        }
    }

    #[test]
    fn collinear_face_is_rejected() {
        let mut face = curved_face(2, 0.0);
        face[2] = Vector3::new(2.0, -1.0, 0.0);
        assert!(CurvedFaceTetra::new(Vector3::zeros(), &face).is_err());
    }

    #[test]
    fn prism_tri_face_blend() {
        let p = 3;
        let face = curved_face(p, 0.2);
        let top = [Vector3::new(1.0, 0.0, 2.0), Vector3::new(0.0, 1.0, 2.0), Vector3::new(0.0, 0.0, 3.0)];
        let g = CurvedFacePrism::TriFace { face: face.clone(), top };
        let tri = ReferenceElement::new(ElementFamily::Triangle, p).unwrap();
        let (x, y) = (0.2, 0.5);
        let bottom = map_point(&tri, &face, &[x, y]);
        let flat = top[0] * (1.0 - x - y) + top[1] * x + top[2] * y;
        assert!((map_prism_tri_face(&g, &[x, y, -1.0]).unwrap() - bottom).norm() < 1e-15);
        assert!((map_prism_tri_face(&g, &[x, y, 1.0]).unwrap() - flat).norm() < 1e-15);
        assert!((map_prism_tri_face(&g, &[x, y, 0.0]).unwrap() - (bottom + flat) * 0.5).norm() < 1e-15);
    }

    fn quad_face_grid(p: usize, amp: f64) -> (CurvedFacePrism<3>, impl Fn(f64, f64) -> Vector3<f64>) {
        // face over triangle edge [1, 2], axis along z in [0, 1]
        let surf = move |s: f64, t: f64| {
            let z = 0.5 * (1.0 + s);
            let tt = 0.5 * (1.0 + t);
            Vector3::new(1.0 - tt, tt, z) + Vector3::new(1.0, 1.0, 0.0) * (amp * tt * (1.0 - tt) * (1.0 + z))
        };
        let grid = (0..=p)
            .map(|i| {
                (0..=p)
                    .map(|j| surf(-1.0 + 2.0 * i as f64 / p as f64, -1.0 + 2.0 * j as f64 / p as f64))
                    .collect()
            })
            .collect();
        let geom = CurvedFacePrism::QuadFace {
            axis: [Vector3::zeros(), Vector3::new(0.0, 0.0, 1.0)],
            grid,
        };
        (geom, surf)
    }

    #[test]
    fn flat_quad_face_prism_is_affine() {
        let (g, _) = quad_face_grid(3, 0.0);
        for a in [[0.1, 0.2, -0.3], [0.5, 0.5, 1.0], [0.0, 0.0, 0.0], [1.0, 0.0, -1.0]] {
            let r = map_prism_quad_face(&g, &a).unwrap();
            assert!((r - Vector3::new(a[0], a[1], 0.5 * (1.0 + a[2]))).norm() < 1e-15);
        }
    }

    #[test]
    fn quad_face_nodes_and_slice_oracle() {
        let p = 3;
        let (g, _) = quad_face_grid(p, 0.4);
        let CurvedFacePrism::QuadFace { grid, axis } = &g else { unreachable!() };
        for i in 0..=p {
            for j in 0..=p {
                let c = -1.0 + 2.0 * i as f64 / p as f64;
                let t = j as f64 / p as f64;
                let r = map_prism_quad_face(&g, &[1.0 - t, t, c]).unwrap();
                assert!((r - grid[i][j]).norm() < 1e-14);
            }
        }
        // a node-level slice rebuilt as a triangle with three edges
        let prism = ReferenceElement::new(ElementFamily::Prism, p).unwrap();
        for (node, l) in prism.nodes().iter().zip(prism.lattice()) {
            let i = l[2];
            let level: Vec<Vector3<f64>> = grid[i].clone();
            let apex = axis[0] + (axis[1] - axis[0]) * (i as f64 / p as f64);
            let straight = |s: Vector3<f64>, e: Vector3<f64>| line_nodes(|u| s * (0.5 * (1.0 - u)) + e * (0.5 * (1.0 + u)), p);
            let mut curved = vec![level[0], level[p]];
            curved.extend_from_slice(&level[1..p]);
            let set = CurvedEdgeSet::new(&[straight(apex, level[0]), curved, straight(level[p], apex)]).unwrap();
            let expect = map_tri_from_edges(&set, &[node[0], node[1]]).unwrap();
            let got = map_prism_quad_face(&g, node).unwrap();
            assert!((got - expect).norm() < 1e-14);
        }
    }

    fn random_line(p: usize, s: Vector3<f64>, e: Vector3<f64>, bumps: &[f64]) -> Vec<Vector3<f64>> {
        let mut nodes = vec![s, e];
        for i in 1..p {
            let u = -1.0 + 2.0 * i as f64 / p as f64;
            let k = 3 * (i - 1);
            nodes.push(
                s * (0.5 * (1.0 - u)) + e * (0.5 * (1.0 + u)) + Vector3::new(bumps[k], bumps[k + 1], bumps[k + 2]) * 0.1,
            );
        }
        nodes
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn triangle_map_reproduces_edges(p in 1usize..=6, bumps in prop::collection::vec(-1.0f64..1.0, 45), t in -1.0f64..1.0) {
            let c = [Vector3::new(0.0, 0.0, 0.0), Vector3::new(1.0, 0.1, 0.0), Vector3::new(0.2, 0.9, 0.3)];
            let lines: Vec<_> = (0..3).map(|k| random_line(p, c[k], c[(k + 1) % 3], &bumps[15 * k..])).collect();
            let set = CurvedEdgeSet::new(&lines).unwrap();
            let line = ReferenceElement::new(ElementFamily::Line, p).unwrap();
            let pts = [[(1.0 + t) / 2.0, 0.0], [(1.0 - t) / 2.0, (1.0 + t) / 2.0], [0.0, (1.0 - t) / 2.0]];
            for k in 0..3 {
                let got = map_tri_from_edges(&set, &pts[k]).unwrap();
                let expect = map_point(&line, &lines[k], &[t]);
                prop_assert!((got - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn quad_map_reproduces_edges(p in 1usize..=6, bumps in prop::collection::vec(-1.0f64..1.0, 60), t in -1.0f64..1.0) {
            let c = [Vector3::new(-1.0, -1.0, 0.0), Vector3::new(1.0, -1.0, 0.2), Vector3::new(1.1, 0.9, 0.0), Vector3::new(-1.0, 1.0, 0.1)];
            let lines: Vec<_> = (0..4).map(|k| random_line(p, c[k], c[(k + 1) % 4], &bumps[15 * k..])).collect();
            let set = CurvedEdgeSet::new(&lines).unwrap();
            let line = ReferenceElement::new(ElementFamily::Line, p).unwrap();
            let pts = [[t, -1.0], [1.0, t], [-t, 1.0], [-1.0, -t]];
            for k in 0..4 {
                let got = map_quad_from_edges(&set, &pts[k]).unwrap();
                let expect = map_point(&line, &lines[k], &[t]);
                prop_assert!((got - expect).norm() < 1e-12);
            }
        }

        #[test]
        fn tetra_map_reproduces_face(p in 1usize..=6, amp in -0.3f64..0.3, u in 0.0f64..1.0, v in 0.0f64..1.0) {
            let (u, v) = if u + v > 1.0 { (1.0 - u, 1.0 - v) } else { (u, v) };
            let face = curved_face(p, amp);
            let g = CurvedFaceTetra::new(Vector3::new(0.1, -0.2, 0.05), &face).unwrap();
            let tri = ReferenceElement::new(ElementFamily::Triangle, p).unwrap();
            let got = map_tetra_one_curved_face(&g, &[1.0 - u - v, u, v]);
            prop_assert!((got - map_point(&tri, &face, &[u, v])).norm() < 1e-12);
        }
    }
}
