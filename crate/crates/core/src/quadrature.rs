//! Reference quadrature rules and their mapping through sub-element and
//! background-element maps.
//!
//! Simplex rules collapse a tensor Gauss–Legendre rule onto the simplex:
//! `a = s (1 - t)`, `b = t` on the triangle and
//! `a = s (1 - t)(1 - w)`, `b = t (1 - w)`, `c = w` on the tetrahedron, with the
//! point counts in the collapsed directions raised to absorb the Jacobian.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::levelset::Integrand;
use crate::reference_elements::{map_with_jacobian, ElementFamily, ReferenceElement};

pub const MAX_RULE_ORDER: usize = 30;

/// `n`-point Gauss–Legendre rule on `[-1, 1]`, points ascending.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    for i in 0..n.div_ceil(2) {
        // Tricomi initial guess, then Newton on P_n
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, z);
            for k in 2..=n {
                let p2 = ((2 * k - 1) as f64 * z * p1 - (k - 1) as f64 * p0) / k as f64;
                p0 = p1;
                p1 = p2;
            }
            let pn = if n == 1 { z } else { p1 };
            let pnm1 = if n == 1 { 1.0 } else { p0 };
            dp = n as f64 * (z * pn - pnm1) / (z * z - 1.0);
            let step = pn / dp;
            z -= step;
            if step.abs() < 1e-16 {
                break;
            }
        }
        if n == 1 {
            z = 0.0;
            dp = 1.0;
        }
        x[i] = -z;
        x[n - 1 - i] = z;
        let wi = 2.0 / ((1.0 - z * z) * dp * dp);
        w[i] = wi;
        w[n - 1 - i] = wi;
    }
    if n % 2 == 1 {
        x[n / 2] = 0.0;
    }
    (x, w)
}

#[derive(Clone, Debug)]
pub struct QuadratureRule {
    pub family: ElementFamily,
    pub order: usize,
    /// Reference coordinates padded to three components.
    pub points: Vec<[f64; 3]>,
    pub weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

fn unit_rule(n: usize) -> (Vec<f64>, Vec<f64>) {
    let (x, w) = gauss_legendre(n);
    (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
}

/// Rule exact for polynomials of total degree `order` (per-variable degree on
/// quadrilaterals and in the prism axis).
pub fn build_rule(family: ElementFamily, order: usize) -> Result<QuadratureRule> {
    if order == 0 || order > MAX_RULE_ORDER {
        return Err(Error::InvalidArgument(format!(
            "quadrature order {order} outside 1..={MAX_RULE_ORDER}"
        )));
    }
    let q = order;
    let n = (q + 2) / 2;
    let mut points = Vec::new();
    let mut weights = Vec::new();
    match family {
        ElementFamily::Line => {
            let (x, w) = gauss_legendre(n);
            for (xi, wi) in x.into_iter().zip(w) {
                points.push([xi, 0.0, 0.0]);
                weights.push(wi);
            }
        }
        ElementFamily::Quadrilateral => {
            let (x, w) = gauss_legendre(n);
            for j in 0..n {
                for i in 0..n {
                    points.push([x[i], x[j], 0.0]);
                    weights.push(w[i] * w[j]);
                }
            }
        }
        ElementFamily::Triangle => {
            let (pts, wts) = triangle_points(q);
            points = pts;
            weights = wts;
        }
        ElementFamily::Tetrahedron => {
            let (s, ws) = unit_rule((q + 2) / 2);
            let (t, wt) = unit_rule((q + 3) / 2);
            let (z, wz) = unit_rule((q + 4) / 2);
            for (zk, wzk) in z.iter().zip(&wz) {
                for (tj, wtj) in t.iter().zip(&wt) {
                    for (si, wsi) in s.iter().zip(&ws) {
                        points.push([si * (1.0 - tj) * (1.0 - zk), tj * (1.0 - zk), *zk]);
                        weights.push(wsi * wtj * wzk * (1.0 - tj) * (1.0 - zk) * (1.0 - zk));
                    }
                }
            }
        }
        ElementFamily::Prism => {
            let (tp, tw) = triangle_points(q);
            let (x, w) = gauss_legendre(n);
            for (xk, wk) in x.iter().zip(&w) {
                for (pt, wt) in tp.iter().zip(&tw) {
                    points.push([pt[0], pt[1], *xk]);
                    weights.push(wt * wk);
                }
            }
        }
    }
    Ok(QuadratureRule {
        family,
        order,
        points,
        weights,
    })
}

fn triangle_points(q: usize) -> (Vec<[f64; 3]>, Vec<f64>) {
    let (s, ws) = unit_rule((q + 2) / 2);
    let (t, wt) = unit_rule((q + 3) / 2);
    let mut points = Vec::with_capacity(s.len() * t.len());
    let mut weights = Vec::with_capacity(s.len() * t.len());
    for (tj, wtj) in t.iter().zip(&wt) {
        for (si, wsi) in s.iter().zip(&ws) {
            points.push([si * (1.0 - tj), *tj, 0.0]);
            weights.push(wsi * wtj * (1.0 - tj));
        }
    }
    (points, weights)
}

/// How the integrand is evaluated at the quadrature points.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum IntegrationMode {
    Exact,
    /// Sampled at the element's nodes and interpolated with its shape functions.
    InterpolatedOnElement,
    /// Sampled at the background element's nodes and interpolated with its shape functions.
    InterpolatedOnBackground,
}

/// Physical quadrature points with weights that include the measure factor.
#[derive(Clone, Debug)]
pub struct MappedQuadrature<const D: usize> {
    pub points: Vec<SVector<f64, D>>,
    pub weights: Vec<f64>,
    /// Physical nodes of the integrated element.
    pub element_nodes: Vec<SVector<f64, D>>,
    /// Element shape-function values per quadrature point.
    pub element_shapes: Vec<Vec<f64>>,
    /// Physical nodes of the background element, empty without one.
    pub background_nodes: Vec<SVector<f64, D>>,
    pub background_shapes: Vec<Vec<f64>>,
}

impl<const D: usize> MappedQuadrature<D> {
    pub fn measure(&self) -> f64 {
        self.weights.iter().sum()
    }
}

/// Background element reference and physical node coordinates.
#[derive(Clone, Copy)]
pub struct Placement<'a, const D: usize> {
    pub element: &'a ReferenceElement,
    pub nodes: &'a [SVector<f64, D>],
}

fn map_rule<const D: usize>(
    rule: &QuadratureRule,
    elem: &ReferenceElement,
    nodes: &[SVector<f64, D>],
    background: Option<Placement<'_, D>>,
    volume: bool,
) -> Result<MappedQuadrature<D>> {
    if rule.family != elem.family() {
        return Err(Error::InvalidArgument(format!(
            "{:?} rule for a {:?} element",
            rule.family,
            elem.family()
        )));
    }
    if nodes.len() != elem.node_count() {
        return Err(Error::InvalidArgument("node count does not match element".into()));
    }
    let dim = elem.dim();
    let bg_nodes: Vec<SVector<f64, D>> = background.map(|b| b.nodes.to_vec()).unwrap_or_default();
    let element_nodes = match background {
        Some(b) => nodes
            .iter()
            .map(|r| crate::reference_elements::map_point(b.element, b.nodes, r.as_slice()))
            .collect(),
        None => nodes.to_vec(),
    };
    let mut out = MappedQuadrature {
        points: Vec::with_capacity(rule.len()),
        weights: Vec::with_capacity(rule.len()),
        element_nodes,
        element_shapes: Vec::with_capacity(rule.len()),
        background_nodes: bg_nodes,
        background_shapes: Vec::new(),
    };
    for (rp, &w) in rule.points.iter().zip(&rule.weights) {
        let rp = &rp[..dim];
        let (r, jac) = map_with_jacobian(elem, nodes, rp);
        let (x, jac) = match background {
            Some(b) => {
                let (x, jb) = map_with_jacobian(b.element, b.nodes, r.as_slice());
                let mut m = [[0.0; 3]; 3];
                for i in 0..D {
                    for j in 0..dim {
                        m[i][j] = (0..D).map(|k| jb.m[i][k] * jac.m[k][j]).sum();
                    }
                }
                out.background_shapes.push(b.element.shape_values(r.as_slice()));
                (
                    x,
                    crate::reference_elements::Jacobian {
                        m,
                        rows: D,
                        cols: dim,
                    },
                )
            }
            None => (r, jac),
        };
        let factor = jac.measure();
        if !(factor > 0.0) || !factor.is_finite() {
            let kind = if volume { "Jacobian determinant" } else { "surface measure" };
            return Err(Error::IntegrationInvalid(format!("{kind} {factor:e} at reference point {rp:?}")));
        }
        out.points.push(x);
        out.weights.push(w * factor);
        out.element_shapes.push(elem.shape_values(rp));
    }
    Ok(out)
}

/// Maps a volume rule through an element placed in the background element's
/// reference coordinates, then through the background element.
pub fn map_rule_volume<const D: usize>(
    rule: &QuadratureRule,
    sub: &ReferenceElement,
    sub_nodes: &[SVector<f64, D>],
    background: Option<Placement<'_, D>>,
) -> Result<MappedQuadrature<D>> {
    if sub.dim() != D {
        return Err(Error::InvalidArgument("volume element dimension differs from space dimension".into()));
    }
    map_rule(rule, sub, sub_nodes, background, true)
}

/// Volume rule mapped through an element given directly in physical coordinates.
pub fn map_rule_volume_nodes<const D: usize>(
    rule: &QuadratureRule,
    elem: &ReferenceElement,
    nodes: &[SVector<f64, D>],
) -> Result<MappedQuadrature<D>> {
    map_rule_volume(rule, elem, nodes, None)
}

/// Maps a rule on a codimension-one interface element; weights carry the
/// Gram-determinant root.
pub fn map_rule_surface<const D: usize>(
    rule: &QuadratureRule,
    interface: &ReferenceElement,
    interface_nodes: &[SVector<f64, D>],
    background: Option<Placement<'_, D>>,
) -> Result<MappedQuadrature<D>> {
    if interface.dim() + 1 != D {
        return Err(Error::InvalidArgument("interface element must have codimension one".into()));
    }
    map_rule(rule, interface, interface_nodes, background, false)
}

/// `Σ w_i f(x_i)`, with `f` optionally replaced by its interpolant.
pub fn integrate<const D: usize>(mq: &MappedQuadrature<D>, f: &Integrand, mode: IntegrationMode) -> Result<f64> {
    match mode {
        IntegrationMode::Exact => Ok(mq.points.iter().zip(&mq.weights).map(|(x, w)| w * f.eval(x.as_slice())).sum()),
        IntegrationMode::InterpolatedOnElement => Ok(interpolated(&mq.element_nodes, &mq.element_shapes, &mq.weights, f)),
        IntegrationMode::InterpolatedOnBackground => {
            if mq.background_nodes.is_empty() {
                return Err(Error::InvalidArgument("no background element attached to the quadrature".into()));
            }
            Ok(interpolated(&mq.background_nodes, &mq.background_shapes, &mq.weights, f))
        }
    }
}

fn interpolated<const D: usize>(nodes: &[SVector<f64, D>], shapes: &[Vec<f64>], weights: &[f64], f: &Integrand) -> f64 {
    let nodal: Vec<f64> = nodes.iter().map(|x| f.eval(x.as_slice())).collect();
    shapes
        .iter()
        .zip(weights)
        .map(|(n, w)| w * n.iter().zip(&nodal).map(|(a, b)| a * b).sum::<f64>())
        .sum()
}
