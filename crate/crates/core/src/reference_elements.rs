//! Reference domains, equispaced Lagrange node layouts and shape functions.
//!
//! Reference domains:
//!
//! | family        | domain                          | corners (in order)                       |
//! |---------------|---------------------------------|------------------------------------------|
//! | Line          | `u ∈ [-1, 1]`                   | `-1`, `1`                                |
//! | Triangle      | `a, b ≥ 0, a + b ≤ 1`           | `(0,0)`, `(1,0)`, `(0,1)`                |
//! | Quadrilateral | `[-1, 1]²`                      | `(-1,-1)`, `(1,-1)`, `(1,1)`, `(-1,1)`   |
//! | Tetrahedron   | `a, b, c ≥ 0, a + b + c ≤ 1`    | `(0,0,0)`, `(1,0,0)`, `(0,1,0)`, `(0,0,1)` |
//! | Prism         | triangle `× [-1, 1]`            | bottom triangle at `c = -1`, then top    |
//!
//! Nodes are addressed by integer lattice indices. Corners come first, then the
//! interior nodes of each edge in edge-table order (each edge walked from its
//! first to its second corner), then every remaining node in lattice order with
//! the last lattice index running slowest.
//!
//! Edge and side tables are part of the public contract; reconstruction and
//! decomposition rely on them.

use std::collections::HashMap;
use std::sync::OnceLock;

use nalgebra::SVector;

use crate::error::{Error, Result};

/// Highest supported Lagrange order.
pub const MAX_ORDER: usize = 8;

/// Tolerance of the domain-membership predicate.
pub const DOMAIN_TOL: f64 = 1e-12;

pub type Lattice = [usize; 3];

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ElementFamily {
    Line,
    Triangle,
    Quadrilateral,
    Tetrahedron,
    Prism,
}

const LINE_EDGES: [[usize; 2]; 1] = [[0, 1]];
const TRI_EDGES: [[usize; 2]; 3] = [[0, 1], [1, 2], [2, 0]];
const QUAD_EDGES: [[usize; 2]; 4] = [[0, 1], [1, 2], [2, 3], [3, 0]];
const TET_EDGES: [[usize; 2]; 6] = [[0, 1], [1, 2], [2, 0], [0, 3], [1, 3], [2, 3]];
const PRISM_EDGES: [[usize; 2]; 9] = [
    [0, 1],
    [1, 2],
    [2, 0],
    [3, 4],
    [4, 5],
    [5, 3],
    [0, 3],
    [1, 4],
    [2, 5],
];

const LINE_SIDES: [&[usize]; 2] = [&[0], &[1]];
const TRI_SIDES: [&[usize]; 3] = [&[0, 1], &[1, 2], &[2, 0]];
const QUAD_SIDES: [&[usize]; 4] = [&[0, 1], &[1, 2], &[2, 3], &[3, 0]];
/// Tetrahedron faces, face `k` is opposite corner `k`, outward oriented.
const TET_SIDES: [&[usize]; 4] = [&[1, 2, 3], &[0, 3, 2], &[0, 1, 3], &[0, 2, 1]];
/// Prism faces: bottom, top, then the lateral faces over triangle edges 0, 1, 2.
const PRISM_SIDES: [&[usize]; 5] = [&[0, 2, 1], &[3, 4, 5], &[0, 1, 4, 3], &[1, 2, 5, 4], &[2, 0, 3, 5]];

impl ElementFamily {
    pub const ALL: [ElementFamily; 5] = [
        ElementFamily::Line,
        ElementFamily::Triangle,
        ElementFamily::Quadrilateral,
        ElementFamily::Tetrahedron,
        ElementFamily::Prism,
    ];

    pub fn dim(self) -> usize {
        match self {
            ElementFamily::Line => 1,
            ElementFamily::Triangle | ElementFamily::Quadrilateral => 2,
            ElementFamily::Tetrahedron | ElementFamily::Prism => 3,
        }
    }

    pub fn corner_count(self) -> usize {
        match self {
            ElementFamily::Line => 2,
            ElementFamily::Triangle => 3,
            ElementFamily::Quadrilateral | ElementFamily::Tetrahedron => 4,
            ElementFamily::Prism => 6,
        }
    }

    pub fn is_simplex(self) -> bool {
        matches!(self, ElementFamily::Line | ElementFamily::Triangle | ElementFamily::Tetrahedron)
    }

    /// Lebesgue measure of the reference domain.
    pub fn reference_measure(self) -> f64 {
        match self {
            ElementFamily::Line => 2.0,
            ElementFamily::Triangle => 0.5,
            ElementFamily::Quadrilateral => 4.0,
            ElementFamily::Tetrahedron => 1.0 / 6.0,
            ElementFamily::Prism => 1.0,
        }
    }

    pub fn node_count(self, order: usize) -> usize {
        let p = order;
        match self {
            ElementFamily::Line => p + 1,
            ElementFamily::Triangle => (p + 1) * (p + 2) / 2,
            ElementFamily::Quadrilateral => (p + 1) * (p + 1),
            ElementFamily::Tetrahedron => (p + 1) * (p + 2) * (p + 3) / 6,
            ElementFamily::Prism => (p + 1) * (p + 1) * (p + 2) / 2,
        }
    }

    pub fn edges(self) -> &'static [[usize; 2]] {
        match self {
            ElementFamily::Line => &LINE_EDGES,
            ElementFamily::Triangle => &TRI_EDGES,
            ElementFamily::Quadrilateral => &QUAD_EDGES,
            ElementFamily::Tetrahedron => &TET_EDGES,
            ElementFamily::Prism => &PRISM_EDGES,
        }
    }

    /// Codimension-one boundary entities as corner lists.
    pub fn sides(self) -> &'static [&'static [usize]] {
        match self {
            ElementFamily::Line => &LINE_SIDES,
            ElementFamily::Triangle => &TRI_SIDES,
            ElementFamily::Quadrilateral => &QUAD_SIDES,
            ElementFamily::Tetrahedron => &TET_SIDES,
            ElementFamily::Prism => &PRISM_SIDES,
        }
    }

    /// Family of side `side`; `None` for the point sides of a line.
    pub fn side_family(self, side: usize) -> Option<ElementFamily> {
        match self {
            ElementFamily::Line => None,
            ElementFamily::Triangle | ElementFamily::Quadrilateral => Some(ElementFamily::Line),
            ElementFamily::Tetrahedron => Some(ElementFamily::Triangle),
            ElementFamily::Prism => Some(if side < 2 {
                ElementFamily::Triangle
            } else {
                ElementFamily::Quadrilateral
            }),
        }
    }

    /// Index of the edge joining two corners, and whether it runs from `c1` to `c0`.
    pub fn edge_between(self, c0: usize, c1: usize) -> Option<(usize, bool)> {
        self.edges().iter().enumerate().find_map(|(k, e)| {
            if e[0] == c0 && e[1] == c1 {
                Some((k, false))
            } else if e[0] == c1 && e[1] == c0 {
                Some((k, true))
            } else {
                None
            }
        })
    }

    /// Lattice index of a corner at the given order.
    pub fn corner_lattice(self, order: usize, corner: usize) -> Lattice {
        let p = order;
        match self {
            ElementFamily::Line => [[0, 0, 0], [p, 0, 0]][corner],
            ElementFamily::Triangle => [[0, 0, 0], [p, 0, 0], [0, p, 0]][corner],
            ElementFamily::Quadrilateral => [[0, 0, 0], [p, 0, 0], [p, p, 0], [0, p, 0]][corner],
            ElementFamily::Tetrahedron => [[0, 0, 0], [p, 0, 0], [0, p, 0], [0, 0, p]][corner],
            ElementFamily::Prism => [
                [0, 0, 0],
                [p, 0, 0],
                [0, p, 0],
                [0, 0, p],
                [p, 0, p],
                [0, p, p],
            ][corner],
        }
    }

    /// Reference coordinates of a lattice index.
    pub fn lattice_coords(self, order: usize, l: Lattice) -> [f64; 3] {
        let p = order as f64;
        let unit = |i: usize| i as f64 / p;
        let sym = |i: usize| -1.0 + 2.0 * i as f64 / p;
        match self {
            ElementFamily::Line => [sym(l[0]), 0.0, 0.0],
            ElementFamily::Triangle => [unit(l[0]), unit(l[1]), 0.0],
            ElementFamily::Quadrilateral => [sym(l[0]), sym(l[1]), 0.0],
            ElementFamily::Tetrahedron => [unit(l[0]), unit(l[1]), unit(l[2])],
            ElementFamily::Prism => [unit(l[0]), unit(l[1]), sym(l[2])],
        }
    }

    /// All lattice indices of the order-`order` layout, last index slowest.
    pub fn lattice_points(self, order: usize) -> Vec<Lattice> {
        let p = order;
        let mut out = Vec::with_capacity(self.node_count(p));
        match self {
            ElementFamily::Line => (0..=p).for_each(|i| out.push([i, 0, 0])),
            ElementFamily::Triangle => {
                for j in 0..=p {
                    for i in 0..=p - j {
                        out.push([i, j, 0]);
                    }
                }
            }
            ElementFamily::Quadrilateral => {
                for j in 0..=p {
                    for i in 0..=p {
                        out.push([i, j, 0]);
                    }
                }
            }
            ElementFamily::Tetrahedron => {
                for k in 0..=p {
                    for j in 0..=p - k {
                        for i in 0..=p - j - k {
                            out.push([i, j, k]);
                        }
                    }
                }
            }
            ElementFamily::Prism => {
                for l in 0..=p {
                    for j in 0..=p {
                        for i in 0..=p - j {
                            out.push([i, j, l]);
                        }
                    }
                }
            }
        }
        out
    }

    /// Closed-domain membership with tolerance `tol`.
    pub fn contains(self, r: &[f64], tol: f64) -> bool {
        let within = |x: f64| x >= -1.0 - tol && x <= 1.0 + tol;
        match self {
            ElementFamily::Line => within(r[0]),
            ElementFamily::Triangle => r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol,
            ElementFamily::Quadrilateral => within(r[0]) && within(r[1]),
            ElementFamily::Tetrahedron => {
                r[0] >= -tol && r[1] >= -tol && r[2] >= -tol && r[0] + r[1] + r[2] <= 1.0 + tol
            }
            ElementFamily::Prism => r[0] >= -tol && r[1] >= -tol && r[0] + r[1] <= 1.0 + tol && within(r[2]),
        }
    }
}

/// Maps a side lattice index to the lattice index in the parent element.
fn side_to_element_lattice(side_family: ElementFamily, order: usize, corners: &[Lattice], s: Lattice) -> Lattice {
    let p = order;
    let mut out = [0usize; 3];
    for d in 0..3 {
        let v = match side_family {
            ElementFamily::Line => corners[0][d] * (p - s[0]) + corners[1][d] * s[0],
            ElementFamily::Triangle => {
                corners[0][d] * (p - s[0] - s[1]) + corners[1][d] * s[0] + corners[2][d] * s[1]
            }
            ElementFamily::Quadrilateral => {
                let v = corners[0][d] * (p - s[0]) * (p - s[1])
                    + corners[1][d] * s[0] * (p - s[1])
                    + corners[2][d] * s[0] * s[1]
                    + corners[3][d] * (p - s[0]) * s[1];
                debug_assert_eq!(v % p, 0);
                v / p
            }
            _ => unreachable!("sides are lines, triangles or quadrilaterals"),
        };
        debug_assert_eq!(v % p, 0);
        out[d] = v / p;
    }
    out
}

/// A Lagrange element on a reference domain with equispaced nodes.
#[derive(Clone, Debug)]
pub struct ReferenceElement {
    family: ElementFamily,
    order: usize,
    nodes: Vec<[f64; 3]>,
    lattice: Vec<Lattice>,
    lookup: HashMap<Lattice, usize>,
}

impl ReferenceElement {
    pub fn new(family: ElementFamily, order: usize) -> Result<Self> {
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "element order {order} outside supported range 1..={MAX_ORDER}"
            )));
        }
        let p = order;
        let all = family.lattice_points(p);
        let mut ordered: Vec<Lattice> = Vec::with_capacity(all.len());
        for c in 0..family.corner_count() {
            ordered.push(family.corner_lattice(p, c));
        }
        for e in family.edges() {
            let ends = [family.corner_lattice(p, e[0]), family.corner_lattice(p, e[1])];
            for i in 1..p {
                ordered.push(side_to_element_lattice(ElementFamily::Line, p, &ends, [i, 0, 0]));
            }
        }
        let placed: std::collections::HashSet<Lattice> = ordered.iter().copied().collect();
        ordered.extend(all.into_iter().filter(|l| !placed.contains(l)));
        debug_assert_eq!(ordered.len(), family.node_count(p));

        let nodes = ordered.iter().map(|&l| family.lattice_coords(p, l)).collect();
        let lookup = ordered.iter().enumerate().map(|(i, &l)| (l, i)).collect();
        Ok(ReferenceElement {
            family,
            order,
            nodes,
            lattice: ordered,
            lookup,
        })
    }

    /// Shared instance for `(family, order)`, built on first use.
    pub fn cached(family: ElementFamily, order: usize) -> Result<&'static ReferenceElement> {
        static CACHE: [[OnceLock<ReferenceElement>; MAX_ORDER + 1]; 5] =
            [const { [const { OnceLock::new() }; MAX_ORDER + 1] }; 5];
        if order == 0 || order > MAX_ORDER {
            return Err(Error::InvalidArgument(format!(
                "element order {order} outside supported range 1..={MAX_ORDER}"
            )));
        }
        let f = ElementFamily::ALL.iter().position(|&f| f == family).unwrap();
        Ok(CACHE[f][order].get_or_init(|| ReferenceElement::new(family, order).expect("validated order")))
    }

    pub fn family(&self) -> ElementFamily {
        self.family
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn dim(&self) -> usize {
        self.family.dim()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn corner_count(&self) -> usize {
        self.family.corner_count()
    }

    /// Node coordinates, padded with zeros to three components.
    pub fn nodes(&self) -> &[[f64; 3]] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &[f64] {
        &self.nodes[i][..self.dim()]
    }

    pub fn lattice(&self) -> &[Lattice] {
        &self.lattice
    }

    pub fn node_at_lattice(&self, l: Lattice) -> Option<usize> {
        self.lookup.get(&l).copied()
    }

    pub fn contains(&self, r: &[f64], tol: f64) -> bool {
        self.family.contains(r, tol)
    }

    /// Node indices along edge `edge`, from its first to its second corner.
    pub fn edge_nodes(&self, edge: usize) -> Vec<usize> {
        let e = self.family.edges()[edge];
        self.path_nodes(e[0], e[1])
    }

    /// Node indices on the straight path between two corners.
    pub fn path_nodes(&self, c0: usize, c1: usize) -> Vec<usize> {
        let p = self.order;
        let ends = [self.family.corner_lattice(p, c0), self.family.corner_lattice(p, c1)];
        (0..=p)
            .map(|i| self.lookup[&side_to_element_lattice(ElementFamily::Line, p, &ends, [i, 0, 0])])
            .collect()
    }

    /// Node indices of side `side`, ordered as the nodes of the side's own
    /// reference element of the same order.
    pub fn side_nodes(&self, side: usize) -> Vec<usize> {
        let sf = self.family.side_family(side).expect("line sides are points");
        let corners: Vec<Lattice> = self.family.sides()[side]
            .iter()
            .map(|&c| self.family.corner_lattice(self.order, c))
            .collect();
        let side_elem = ReferenceElement::cached(sf, self.order).expect("validated order");
        side_elem
            .lattice()
            .iter()
            .map(|&s| self.lookup[&side_to_element_lattice(sf, self.order, &corners, s)])
            .collect()
    }

    /// Shape function values at `r`.
    pub fn shape_values(&self, r: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.node_count()];
        self.eval(r, &mut out, None);
        out
    }

    /// Shape function gradients at `r`, node-major with `dim()` entries per node.
    pub fn shape_gradients(&self, r: &[f64]) -> Vec<f64> {
        let mut vals = vec![0.0; self.node_count()];
        let mut grads = vec![0.0; self.node_count() * self.dim()];
        self.eval(r, &mut vals, Some(&mut grads));
        grads
    }

    /// Evaluates values and optionally gradients into caller-provided buffers.
    pub fn eval(&self, r: &[f64], values: &mut [f64], grads: Option<&mut [f64]>) {
        let p = self.order;
        let dim = self.dim();
        match self.family {
            ElementFamily::Triangle | ElementFamily::Tetrahedron => {
                let mut lam = [0.0; 4];
                lam[0] = 1.0 - r[..dim].iter().sum::<f64>();
                lam[1..=dim].copy_from_slice(&r[..dim]);
                let mut tab = [[0.0; MAX_ORDER + 1]; 4];
                let mut dtab = [[0.0; MAX_ORDER + 1]; 4];
                for k in 0..=dim {
                    lagrange_factors(p, lam[k], &mut tab[k], &mut dtab[k]);
                }
                let mut grads = grads;
                for (n, l) in self.lattice.iter().enumerate() {
                    let mut alpha = [0usize; 4];
                    alpha[1..=dim].copy_from_slice(&l[..dim]);
                    alpha[0] = p - l[..dim].iter().sum::<usize>();
                    let mut f = [0.0; 4];
                    for k in 0..=dim {
                        f[k] = tab[k][alpha[k]];
                    }
                    values[n] = f[..=dim].iter().product();
                    if let Some(g) = grads.as_deref_mut() {
                        // dN/dλ_k for each barycentric coordinate
                        let mut dl = [0.0; 4];
                        for k in 0..=dim {
                            let mut prod = dtab[k][alpha[k]];
                            for m in 0..=dim {
                                if m != k {
                                    prod *= f[m];
                                }
                            }
                            dl[k] = prod;
                        }
                        for d in 0..dim {
                            g[n * dim + d] = dl[d + 1] - dl[0];
                        }
                    }
                }
            }
            ElementFamily::Line => {
                let (v, d) = line_basis(p, r[0]);
                let mut grads = grads;
                for (n, l) in self.lattice.iter().enumerate() {
                    values[n] = v[l[0]];
                    if let Some(g) = grads.as_deref_mut() {
                        g[n] = d[l[0]];
                    }
                }
            }
            ElementFamily::Quadrilateral => {
                let (va, da) = line_basis(p, r[0]);
                let (vb, db) = line_basis(p, r[1]);
                let mut grads = grads;
                for (n, l) in self.lattice.iter().enumerate() {
                    values[n] = va[l[0]] * vb[l[1]];
                    if let Some(g) = grads.as_deref_mut() {
                        g[n * 2] = da[l[0]] * vb[l[1]];
                        g[n * 2 + 1] = va[l[0]] * db[l[1]];
                    }
                }
            }
            ElementFamily::Prism => {
                let lam = [1.0 - r[0] - r[1], r[0], r[1]];
                let mut tab = [[0.0; MAX_ORDER + 1]; 3];
                let mut dtab = [[0.0; MAX_ORDER + 1]; 3];
                for k in 0..3 {
                    lagrange_factors(p, lam[k], &mut tab[k], &mut dtab[k]);
                }
                let (vc, dc) = line_basis(p, r[2]);
                let mut grads = grads;
                for (n, l) in self.lattice.iter().enumerate() {
                    let alpha = [p - l[0] - l[1], l[0], l[1]];
                    let f = [tab[0][alpha[0]], tab[1][alpha[1]], tab[2][alpha[2]]];
                    let tri = f[0] * f[1] * f[2];
                    values[n] = tri * vc[l[2]];
                    if let Some(g) = grads.as_deref_mut() {
                        let d0 = dtab[0][alpha[0]] * f[1] * f[2];
                        let d1 = f[0] * dtab[1][alpha[1]] * f[2];
                        let d2 = f[0] * f[1] * dtab[2][alpha[2]];
                        g[n * 3] = (d1 - d0) * vc[l[2]];
                        g[n * 3 + 1] = (d2 - d0) * vc[l[2]];
                        g[n * 3 + 2] = tri * dc[l[2]];
                    }
                }
            }
        }
    }

    /// Structured sample grid with `density` subdivisions per edge, merged with
    /// the element nodes.
    pub fn sample_grid(&self, density: usize) -> Result<SampleGrid> {
        SampleGrid::new(self, density)
    }
}

/// `ℓ_m(λ) = Π_{j<m} (pλ - j) / m!` for `m = 0..=p`, and `dℓ_m/dλ`.
fn lagrange_factors(p: usize, lambda: f64, val: &mut [f64; MAX_ORDER + 1], der: &mut [f64; MAX_ORDER + 1]) {
    let x = p as f64 * lambda;
    val[0] = 1.0;
    der[0] = 0.0;
    for m in 1..=p {
        let mf = m as f64;
        let factor = (x - (m - 1) as f64) / mf;
        der[m] = der[m - 1] * factor + val[m - 1] * p as f64 / mf;
        val[m] = val[m - 1] * factor;
    }
}

/// 1D equispaced Lagrange basis on `[-1, 1]` indexed by lattice position, with derivatives.
pub(crate) fn line_basis(p: usize, u: f64) -> ([f64; MAX_ORDER + 1], [f64; MAX_ORDER + 1]) {
    let mut t0 = [0.0; MAX_ORDER + 1];
    let mut d0 = [0.0; MAX_ORDER + 1];
    let mut t1 = [0.0; MAX_ORDER + 1];
    let mut d1 = [0.0; MAX_ORDER + 1];
    lagrange_factors(p, 0.5 * (1.0 - u), &mut t0, &mut d0);
    lagrange_factors(p, 0.5 * (1.0 + u), &mut t1, &mut d1);
    let mut v = [0.0; MAX_ORDER + 1];
    let mut d = [0.0; MAX_ORDER + 1];
    for i in 0..=p {
        v[i] = t0[p - i] * t1[i];
        d[i] = 0.5 * (t0[p - i] * d1[i] - d0[p - i] * t1[i]);
    }
    (v, d)
}

/// Sign-check sample points of a reference element.
#[derive(Clone, Debug)]
pub struct SampleGrid {
    pub family: ElementFamily,
    pub order: usize,
    pub density: usize,
    pub points: Vec<[f64; 3]>,
    /// Point indices on each edge, sorted from the edge's first to second corner.
    pub edge_points: Vec<Vec<usize>>,
    /// Point indices on each side (faces for 3D families, edges for 2D).
    pub side_points: Vec<Vec<usize>>,
}

impl SampleGrid {
    pub fn new(elem: &ReferenceElement, density: usize) -> Result<Self> {
        let family = elem.family();
        let p = elem.order();
        if density < p + 1 {
            return Err(Error::InvalidArgument(format!(
                "sample density {density} below element order + 1 = {}",
                p + 1
            )));
        }
        let mut points: Vec<[f64; 3]> = family
            .lattice_points(density)
            .into_iter()
            .map(|l| family.lattice_coords(density, l))
            .collect();
        for (node, l) in elem.nodes().iter().zip(elem.lattice()) {
            let on_grid = l.iter().all(|&i| (i * density) % p == 0);
            if !on_grid {
                points.push(*node);
            }
        }

        let corner_coords: Vec<[f64; 3]> = (0..family.corner_count())
            .map(|c| family.lattice_coords(1, family.corner_lattice(1, c)))
            .collect();
        let edge_points = family
            .edges()
            .iter()
            .map(|e| {
                let (a, b) = (corner_coords[e[0]], corner_coords[e[1]]);
                let mut on: Vec<(f64, usize)> = points
                    .iter()
                    .enumerate()
                    .filter_map(|(i, x)| segment_parameter(&a, &b, x).map(|t| (t, i)))
                    .collect();
                on.sort_by(|x, y| x.0.total_cmp(&y.0));
                on.into_iter().map(|(_, i)| i).collect()
            })
            .collect();
        let side_points = (0..family.sides().len())
            .map(|s| {
                points
                    .iter()
                    .enumerate()
                    .filter(|(_, x)| on_side(family, s, x))
                    .map(|(i, _)| i)
                    .collect()
            })
            .collect();
        Ok(SampleGrid {
            family,
            order: p,
            density,
            points,
            edge_points,
            side_points,
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn segment_parameter(a: &[f64; 3], b: &[f64; 3], x: &[f64; 3]) -> Option<f64> {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let len2 = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let t = ((x[0] - a[0]) * d[0] + (x[1] - a[1]) * d[1] + (x[2] - a[2]) * d[2]) / len2;
    let dist2: f64 = (0..3).map(|k| (a[k] + t * d[k] - x[k]).powi(2)).sum();
    (dist2 < 1e-24 && (-1e-12..=1.0 + 1e-12).contains(&t)).then_some(t)
}

/// Whether reference point `x` lies on side `side` (within 1e-12).
pub(crate) fn on_side(family: ElementFamily, side: usize, x: &[f64; 3]) -> bool {
    let tol = 1e-12;
    match family {
        ElementFamily::Line => (x[0] - [-1.0, 1.0][side]).abs() < tol,
        ElementFamily::Triangle => match side {
            0 => x[1].abs() < tol,
            1 => (1.0 - x[0] - x[1]).abs() < tol,
            _ => x[0].abs() < tol,
        },
        ElementFamily::Quadrilateral => match side {
            0 => (x[1] + 1.0).abs() < tol,
            1 => (x[0] - 1.0).abs() < tol,
            2 => (x[1] - 1.0).abs() < tol,
            _ => (x[0] + 1.0).abs() < tol,
        },
        ElementFamily::Tetrahedron => match side {
            0 => (1.0 - x[0] - x[1] - x[2]).abs() < tol,
            1 => x[0].abs() < tol,
            2 => x[1].abs() < tol,
            _ => x[2].abs() < tol,
        },
        ElementFamily::Prism => match side {
            0 => (x[2] + 1.0).abs() < tol,
            1 => (x[2] - 1.0).abs() < tol,
            2 => x[1].abs() < tol,
            3 => (1.0 - x[0] - x[1]).abs() < tol,
            _ => x[0].abs() < tol,
        },
    }
}

/// Jacobian `∂x/∂r` of a map into `ℝ^rows` from a `cols`-dimensional reference domain.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jacobian {
    pub m: [[f64; 3]; 3],
    pub rows: usize,
    pub cols: usize,
}

impl Jacobian {
    /// Determinant for square maps, `sqrt(det(JᵀJ))` for embedded curves and surfaces.
    pub fn measure(&self) -> f64 {
        let m = &self.m;
        if self.rows == self.cols {
            match self.rows {
                1 => m[0][0],
                2 => m[0][0] * m[1][1] - m[0][1] * m[1][0],
                _ => {
                    m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                        + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
                }
            }
        } else {
            let mut g = [[0.0; 3]; 3];
            for i in 0..self.cols {
                for j in 0..self.cols {
                    g[i][j] = (0..self.rows).map(|k| m[k][i] * m[k][j]).sum();
                }
            }
            let det = match self.cols {
                1 => g[0][0],
                2 => g[0][0] * g[1][1] - g[0][1] * g[1][0],
                _ => unreachable!("codimension-one maps have at most two reference directions"),
            };
            det.max(0.0).sqrt()
        }
    }

    /// Column `c` as a vector of the target space.
    pub fn column<const D: usize>(&self, c: usize) -> SVector<f64, D> {
        SVector::<f64, D>::from_fn(|i, _| self.m[i][c])
    }
}

/// `x(r) = Σ N_i(r) x_i`.
pub fn isoparametric_map<const D: usize>(
    elem: &ReferenceElement,
    node_coords: &[SVector<f64, D>],
    r: &[f64],
) -> Result<SVector<f64, D>> {
    check_len(elem, node_coords.len())?;
    Ok(map_point(elem, node_coords, r))
}

/// Jacobian determinant (or Gram root for codimension-one placements) at `r`.
pub fn jacobian_determinant<const D: usize>(
    elem: &ReferenceElement,
    node_coords: &[SVector<f64, D>],
    r: &[f64],
) -> Result<f64> {
    check_len(elem, node_coords.len())?;
    Ok(jacobian(elem, node_coords, r).measure())
}

fn check_len(elem: &ReferenceElement, n: usize) -> Result<()> {
    if n != elem.node_count() {
        return Err(Error::InvalidArgument(format!(
            "{n} node coordinates for a {:?} element of order {} with {} nodes",
            elem.family(),
            elem.order(),
            elem.node_count()
        )));
    }
    Ok(())
}

/// Unchecked variant of [`isoparametric_map`].
pub fn map_point<const D: usize>(elem: &ReferenceElement, node_coords: &[SVector<f64, D>], r: &[f64]) -> SVector<f64, D> {
    let n = elem.shape_values(r);
    node_coords.iter().zip(&n).fold(SVector::zeros(), |acc, (x, w)| acc + x * *w)
}

/// Unchecked Jacobian of the isoparametric map.
pub fn jacobian<const D: usize>(elem: &ReferenceElement, node_coords: &[SVector<f64, D>], r: &[f64]) -> Jacobian {
    let dim = elem.dim();
    let g = elem.shape_gradients(r);
    let mut m = [[0.0; 3]; 3];
    for (n, x) in node_coords.iter().enumerate() {
        for c in 0..dim {
            let gc = g[n * dim + c];
            for row in 0..D {
                m[row][c] += x[row] * gc;
            }
        }
    }
    Jacobian { m, rows: D, cols: dim }
}

/// Point and Jacobian in one shape-function evaluation.
pub fn map_with_jacobian<const D: usize>(
    elem: &ReferenceElement,
    node_coords: &[SVector<f64, D>],
    r: &[f64],
) -> (SVector<f64, D>, Jacobian) {
    let dim = elem.dim();
    let nn = elem.node_count();
    let mut vals = vec![0.0; nn];
    let mut g = vec![0.0; nn * dim];
    elem.eval(r, &mut vals, Some(&mut g));
    let mut m = [[0.0; 3]; 3];
    let mut x = SVector::<f64, D>::zeros();
    for (n, xn) in node_coords.iter().enumerate() {
        x += xn * vals[n];
        for c in 0..dim {
            let gc = g[n * dim + c];
            for row in 0..D {
                m[row][c] += xn[row] * gc;
            }
        }
    }
    (x, Jacobian { m, rows: D, cols: dim })
}

/// Reference node coordinates of `elem` as `D`-vectors (identity placement).
pub fn reference_placement<const D: usize>(elem: &ReferenceElement) -> Vec<SVector<f64, D>> {
    elem.nodes().iter().map(|x| SVector::<f64, D>::from_fn(|i, _| x[i])).collect()
}
