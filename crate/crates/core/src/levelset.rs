//! Analytic test level sets and integrands, nodal sampling, and interpolation
//! of nodal level-set data.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::mesh::BackgroundMesh;
use crate::reference_elements::ReferenceElement;

/// Radius of the circle and sphere test cases.
pub const TEST_RADIUS: f64 = 0.7123;

/// Default magnitude of the corner-node perturbation.
pub const DEFAULT_PERTURBATION: f64 = 1e-13;

pub type FieldFn = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

#[derive(Clone)]
pub enum AnalyticField {
    /// `|x - c| - r`
    Circle2D { r: f64, center: [f64; 2] },
    /// `|x| - R(θ)` with `R(θ) = 0.5 + 0.1 sin(8θ)`
    Flower2D,
    /// `|x - c| - r`
    Sphere3D { r: f64, center: [f64; 3] },
    /// `|x| - r + 0.1 (cos 2πx + cos 2πy + cos 2πz)`
    Bumpy3D { r: f64 },
    /// `n · x - offset` with unit `n`.
    Plane { normal: Vec<f64>, offset: f64 },
    Custom { name: String, dim: usize, f: FieldFn },
}

impl fmt::Debug for AnalyticField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnalyticField::Circle2D { r, center } => write!(f, "Circle2D(r={r}, center={center:?})"),
            AnalyticField::Flower2D => write!(f, "Flower2D"),
            AnalyticField::Sphere3D { r, center } => write!(f, "Sphere3D(r={r}, center={center:?})"),
            AnalyticField::Bumpy3D { r } => write!(f, "Bumpy3D(r={r})"),
            AnalyticField::Plane { normal, offset } => write!(f, "Plane(n={normal:?}, offset={offset})"),
            AnalyticField::Custom { name, dim, .. } => write!(f, "Custom({name}, dim={dim})"),
        }
    }
}

/// Flower radius `R(θ)`.
pub fn flower_radius(theta: f64) -> f64 {
    0.5 + 0.1 * (8.0 * theta).sin()
}

impl AnalyticField {
    pub fn circle() -> Self {
        AnalyticField::Circle2D {
            r: TEST_RADIUS,
            center: [0.0, 0.0],
        }
    }

    pub fn sphere() -> Self {
        AnalyticField::Sphere3D {
            r: TEST_RADIUS,
            center: [0.0; 3],
        }
    }

    pub fn bumpy() -> Self {
        AnalyticField::Bumpy3D { r: TEST_RADIUS }
    }

    /// Plane through the origin shifted by `offset` along the normalized `normal`.
    pub fn plane(normal: &[f64], offset: f64) -> Result<Self> {
        let len = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
        if len == 0.0 || !len.is_finite() {
            return Err(Error::InvalidArgument("plane normal must be non-zero".into()));
        }
        Ok(AnalyticField::Plane {
            normal: normal.iter().map(|v| v / len).collect(),
            offset,
        })
    }

    pub fn custom(name: &str, dim: usize, f: impl Fn(&[f64]) -> f64 + Send + Sync + 'static) -> Self {
        AnalyticField::Custom {
            name: name.to_string(),
            dim,
            f: Arc::new(f),
        }
    }

    /// Spatial dimension the field is defined in; `None` for planes of any dimension.
    pub fn dim(&self) -> Option<usize> {
        match self {
            AnalyticField::Circle2D { .. } | AnalyticField::Flower2D => Some(2),
            AnalyticField::Sphere3D { .. } | AnalyticField::Bumpy3D { .. } => Some(3),
            AnalyticField::Plane { normal, .. } => Some(normal.len()),
            AnalyticField::Custom { dim, .. } => Some(*dim),
        }
    }

    pub fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match self {
            AnalyticField::Circle2D { r, center } => Ok((x[0] - center[0]).hypot(x[1] - center[1]) - r),
            AnalyticField::Flower2D => {
                let rho = x[0].hypot(x[1]);
                if rho < 1e-14 {
                    return Err(Error::SingularPoint {
                        point: x.to_vec(),
                        detail: "flower angle undefined at the origin".into(),
                    });
                }
                Ok(rho - flower_radius(x[1].atan2(x[0])))
            }
            AnalyticField::Sphere3D { r, center } => {
                let d: f64 = (0..3).map(|k| (x[k] - center[k]).powi(2)).sum();
                Ok(d.sqrt() - r)
            }
            AnalyticField::Bumpy3D { r } => {
                let d = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
                let bumps: f64 = x[..3].iter().map(|v| (2.0 * PI * v).cos()).sum();
                Ok(d - r + 0.1 * bumps)
            }
            AnalyticField::Plane { normal, offset } => {
                Ok(normal.iter().zip(x).map(|(n, v)| n * v).sum::<f64>() - offset)
            }
            AnalyticField::Custom { f, .. } => Ok(f(x)),
        }
    }
}

pub fn evaluate_analytic(field: &AnalyticField, x: &[f64]) -> Result<f64> {
    field.evaluate(x)
}

/// Integrands of the convergence studies.
#[derive(Clone, Debug)]
pub enum Integrand {
    One,
    /// `x/2 + y/4 + x² + 2y³`
    F2D,
    /// `x² + y² + cos(z)/2`
    F3D,
    /// The analytic level set itself.
    LevelSet(AnalyticField),
}

impl Integrand {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Integrand::One => 1.0,
            Integrand::F2D => 0.5 * x[0] + 0.25 * x[1] + x[0] * x[0] + 2.0 * x[1].powi(3),
            Integrand::F3D => x[0] * x[0] + x[1] * x[1] + 0.5 * x[2].cos(),
            Integrand::LevelSet(field) => field.evaluate(x).unwrap_or(f64::NAN),
        }
    }
}

/// Replaces near-zero values at the first `corners` entries by `+eps`.
pub fn perturb_corners(values: &mut [f64], corners: usize, eps: f64) {
    for v in values.iter_mut().take(corners) {
        if v.abs() < eps {
            *v = eps;
        }
    }
}

/// Nodal level-set values of one or more functions on a mesh.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSetField {
    values: Vec<Vec<f64>>,
}

impl LevelSetField {
    pub fn from_values(values: Vec<Vec<f64>>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::InvalidArgument("need at least one level-set function".into()));
        }
        let n = values[0].len();
        if values.iter().any(|row| row.len() != n) {
            return Err(Error::InvalidArgument("level-set rows of different length".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidArgument("non-finite level-set value".into()));
        }
        Ok(LevelSetField { values })
    }

    pub fn function_count(&self) -> usize {
        self.values.len()
    }

    pub fn node_count(&self) -> usize {
        self.values[0].len()
    }

    pub fn values(&self, f: usize) -> &[f64] {
        &self.values[f]
    }

    /// Values of function `f` at the nodes of element `e`, in element node order.
    pub fn element_values<const D: usize>(&self, mesh: &BackgroundMesh<D>, f: usize, e: usize) -> Vec<f64> {
        mesh.elements()[e].iter().map(|&i| self.values[f][i]).collect()
    }
}

/// Samples each field at the mesh nodes and perturbs near-zero corner values.
pub fn sample_to_mesh<const D: usize>(
    fields: &[AnalyticField],
    mesh: &BackgroundMesh<D>,
    perturbation: f64,
) -> Result<LevelSetField> {
    if perturbation < 0.0 {
        return Err(Error::InvalidArgument("perturbation must be non-negative".into()));
    }
    let values = fields
        .iter()
        .map(|field| {
            mesh.nodes()
                .iter()
                .enumerate()
                .map(|(i, x)| {
                    let v = field.evaluate(x.as_slice())?;
                    Ok(if mesh.is_corner_node(i) && v.abs() < perturbation {
                        perturbation
                    } else {
                        v
                    })
                })
                .collect::<Result<Vec<f64>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    LevelSetField::from_values(values)
}

fn check_values(elem: &ReferenceElement, n: usize) -> Result<()> {
    if n != elem.node_count() {
        return Err(Error::InvalidArgument(format!(
            "{n} nodal values for an element with {} nodes",
            elem.node_count()
        )));
    }
    Ok(())
}

/// `φ^h(r) = Σ N_i(r) φ_i`.
pub fn interpolate(elem: &ReferenceElement, nodal_values: &[f64], r: &[f64]) -> Result<f64> {
    check_values(elem, nodal_values.len())?;
    Ok(elem.shape_values(r).iter().zip(nodal_values).map(|(n, v)| n * v).sum())
}

/// Reference-space gradient `∇_r φ^h(r)`.
pub fn interpolate_gradient(elem: &ReferenceElement, nodal_values: &[f64], r: &[f64]) -> Result<Vec<f64>> {
    check_values(elem, nodal_values.len())?;
    let dim = elem.dim();
    let g = elem.shape_gradients(r);
    Ok((0..dim)
        .map(|d| nodal_values.iter().enumerate().map(|(i, v)| v * g[i * dim + d]).sum())
        .collect())
}

/// Value and reference gradient in one evaluation, without size checks.
pub fn value_and_gradient<const R: usize>(elem: &ReferenceElement, nodal_values: &[f64], r: &[f64]) -> (f64, SVector<f64, R>) {
    let n = elem.node_count();
    let mut vals = [0.0; 512];
    let mut grads = [0.0; 512 * 3];
    elem.eval(r, &mut vals[..n], Some(&mut grads[..n * R]));
    let mut v = 0.0;
    let mut g = SVector::<f64, R>::zeros();
    for i in 0..n {
        v += vals[i] * nodal_values[i];
        for d in 0..R {
            g[d] += grads[i * R + d] * nodal_values[i];
        }
    }
    (v, g)
}
