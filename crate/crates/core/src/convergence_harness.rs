//! h-convergence studies: structured background meshes, error norms against
//! reference integrals, variant sweeps and rate fits.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::OnceLock;
use std::time::Instant;

use nalgebra::SVector;
use rayon::prelude::*;

use crate::decomposition::{decompose_element, reconstruct_element, DecompositionConfig, ElementDecomposition};
use crate::error::{Error, Result};
use crate::levelset::{flower_radius, interpolate, AnalyticField, Integrand, LevelSetField};
use crate::mesh::BackgroundMesh;
use crate::quadrature::{
    build_rule, gauss_legendre, integrate, map_rule_surface, map_rule_volume, IntegrationMode, Placement,
    QuadratureRule,
};
use crate::reconstruction::{InterfaceElement, ReconstructionConfig, SearchVariant};
use crate::reference_elements::{ElementFamily, ReferenceElement};

/// Relative errors at or below this value are treated as round-off.
pub const ERROR_FLOOR: f64 = 1e-12;

pub const DEFAULT_RESOLUTIONS_2D: [usize; 10] = [6, 10, 20, 30, 50, 70, 100, 150, 200, 300];
pub const DEFAULT_RESOLUTIONS_3D: [usize; 8] = [6, 10, 14, 20, 30, 50, 70, 100];

/// Error norms. The digit in `F1h`, `F2h`, `F3h` is the dimension of the
/// element whose shape functions interpolate the integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Norm {
    One,
    /// Integral of the exact level set over the reconstruction; signed.
    Phi,
    F,
    F1h,
    F2h,
    F3h,
}

impl Norm {
    pub const ALL: [Norm; 6] = [Norm::One, Norm::Phi, Norm::F, Norm::F1h, Norm::F2h, Norm::F3h];

    pub fn id(self) -> &'static str {
        match self {
            Norm::One => "eps_1",
            Norm::Phi => "eps_phi",
            Norm::F => "eps_f",
            Norm::F1h => "eps_f1h",
            Norm::F2h => "eps_f2h",
            Norm::F3h => "eps_f3h",
        }
    }

    fn interpolated(dim: usize) -> Norm {
        match dim {
            1 => Norm::F1h,
            2 => Norm::F2h,
            _ => Norm::F3h,
        }
    }
}

impl fmt::Display for Norm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

impl FromStr for Norm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Norm::ALL
            .into_iter()
            .find(|n| n.id() == s || n.id().trim_start_matches("eps_") == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown norm {s:?}")))
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum StudyKind {
    /// Quadrature on the reconstructed zero-level set.
    #[default]
    Interface,
    /// Quadrature in the negative region.
    Volume,
}

/// Exact integrals used by the relative error norms.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReferenceValues {
    /// Length or area of the zero-level set.
    pub interface: f64,
    pub interface_f: f64,
    /// Area or volume of the negative region.
    pub volume: f64,
    pub volume_f: f64,
}

#[derive(Clone, Debug)]
pub struct StudyConfig {
    pub dimension: usize,
    pub order: usize,
    /// Elements per box edge, strictly increasing.
    pub resolutions: Vec<usize>,
    pub level_set: AnalyticField,
    pub variant: SearchVariant,
    pub quadrature_order: usize,
    /// Norms to report; all applicable ones if empty.
    pub norms: Vec<Norm>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub kind: StudyKind,
    pub depth_limit: usize,
    /// Overrides the built-in reference integrals.
    pub reference: Option<ReferenceValues>,
}

impl StudyConfig {
    /// Defaults for `level_set` on the box `[-1, 1]^d`.
    pub fn new(level_set: AnalyticField, order: usize) -> Result<Self> {
        let dimension = level_set
            .dim()
            .filter(|d| (2..=3).contains(d))
            .ok_or_else(|| Error::InvalidArgument(format!("{level_set:?} is not a 2D or 3D field")))?;
        let resolutions = if dimension == 2 {
            DEFAULT_RESOLUTIONS_2D.to_vec()
        } else {
            DEFAULT_RESOLUTIONS_3D.to_vec()
        };
        Ok(StudyConfig {
            dimension,
            order,
            resolutions,
            level_set,
            variant: SearchVariant::default(),
            quadrature_order: 11,
            norms: Vec::new(),
            lo: vec![-1.0; dimension],
            hi: vec![1.0; dimension],
            kind: StudyKind::Interface,
            depth_limit: 5,
            reference: None,
        })
    }

    pub fn with_resolutions(mut self, resolutions: &[usize]) -> Self {
        self.resolutions = resolutions.to_vec();
        self
    }

    pub fn with_variant(mut self, variant: SearchVariant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_kind(mut self, kind: StudyKind) -> Self {
        self.kind = kind;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if !(2..=3).contains(&self.dimension) {
            return Err(Error::InvalidArgument(format!("dimension {}", self.dimension)));
        }
        if self.level_set.dim() != Some(self.dimension) {
            return Err(Error::InvalidArgument(format!(
                "{:?} in a {}D study",
                self.level_set, self.dimension
            )));
        }
        if self.resolutions.is_empty() || self.resolutions.contains(&0) {
            return Err(Error::InvalidArgument("resolutions must be positive".into()));
        }
        if self.resolutions.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidArgument("resolutions must be strictly increasing".into()));
        }
        if self.lo.len() != self.dimension || self.hi.len() != self.dimension {
            return Err(Error::InvalidArgument("box corners do not match the dimension".into()));
        }
        if self.lo.iter().zip(&self.hi).any(|(l, h)| !(h > l)) {
            return Err(Error::InvalidArgument("empty box".into()));
        }
        Ok(())
    }

    /// Norms computed by this study, in reporting order.
    pub fn applicable_norms(&self) -> Vec<Norm> {
        let d = self.dimension;
        let all = match self.kind {
            StudyKind::Interface => vec![Norm::One, Norm::Phi, Norm::F, Norm::interpolated(d - 1), Norm::interpolated(d)],
            StudyKind::Volume => vec![Norm::One, Norm::F, Norm::interpolated(d)],
        };
        if self.norms.is_empty() {
            all
        } else {
            all.into_iter().filter(|n| self.norms.contains(n)).collect()
        }
    }

    fn reconstruction(&self) -> ReconstructionConfig {
        ReconstructionConfig {
            variant: self.variant,
            depth_limit: self.depth_limit,
            ..Default::default()
        }
    }

    fn integrand(&self) -> Integrand {
        if self.dimension == 2 {
            Integrand::F2D
        } else {
            Integrand::F3D
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRecord {
    pub n: usize,
    pub h: f64,
    pub n_elements: usize,
    pub errors: BTreeMap<Norm, f64>,
    /// Sum of the quadrature weights.
    pub measure: f64,
    pub refined_elements: usize,
    /// Largest `|φ^h|` at an interface node.
    pub max_node_residual: f64,
    pub wall_time: f64,
}

impl ErrorRecord {
    /// Records that needed recursive refinement have no clear element size.
    pub fn flagged(&self) -> bool {
        self.refined_elements > 0
    }

    pub fn error(&self, norm: Norm) -> Option<f64> {
        self.errors.get(&norm).copied()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RateEstimate {
    pub norm: Norm,
    pub slope: f64,
    /// Resolutions entering the fit.
    pub window: Vec<usize>,
}

pub enum StudyMesh {
    Two(BackgroundMesh<2>),
    Three(BackgroundMesh<3>),
}

impl StudyMesh {
    pub fn element_count(&self) -> usize {
        match self {
            StudyMesh::Two(m) => m.element_count(),
            StudyMesh::Three(m) => m.element_count(),
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            StudyMesh::Two(m) => m.node_count(),
            StudyMesh::Three(m) => m.node_count(),
        }
    }

    pub fn h(&self) -> f64 {
        match self {
            StudyMesh::Two(m) => m.h(),
            StudyMesh::Three(m) => m.h(),
        }
    }
}

fn corners<const D: usize>(lo: &[f64], hi: &[f64]) -> Result<([f64; D], [f64; D])> {
    if lo.len() != D || hi.len() != D {
        return Err(Error::InvalidArgument(format!("box corners for {D}D expected")));
    }
    Ok((std::array::from_fn(|k| lo[k]), std::array::from_fn(|k| hi[k])))
}

/// Structured straight-sided mesh of the box `[lo, hi]`.
pub fn build_structured_mesh(dimension: usize, n: usize, order: usize, lo: &[f64], hi: &[f64]) -> Result<StudyMesh> {
    match dimension {
        2 => {
            let (l, h) = corners::<2>(lo, hi)?;
            Ok(StudyMesh::Two(BackgroundMesh::structured(n, order, l, h)?))
        }
        3 => {
            let (l, h) = corners::<3>(lo, hi)?;
            Ok(StudyMesh::Three(BackgroundMesh::structured(n, order, l, h)?))
        }
        _ => Err(Error::InvalidArgument(format!("dimension {dimension}"))),
    }
}

/// Nodal values with the corner perturbation. The flower is undefined at
/// the origin, where it takes its mean radius.
fn sample<const D: usize>(field: &AnalyticField, mesh: &BackgroundMesh<D>, eps: f64) -> Result<LevelSetField> {
    let values = mesh
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let v = match (field, field.evaluate(x.as_slice())) {
                (AnalyticField::Flower2D, Err(Error::SingularPoint { .. })) => -0.5,
                (_, v) => v?,
            };
            Ok(if mesh.is_corner_node(i) && v.abs() < eps { eps } else { v })
        })
        .collect::<Result<Vec<f64>>>()?;
    LevelSetField::from_values(vec![values])
}

struct Rules {
    rules: Vec<(ElementFamily, QuadratureRule)>,
}

impl Rules {
    fn new(order: usize, families: &[ElementFamily]) -> Result<Self> {
        Ok(Rules {
            rules: families
                .iter()
                .map(|&f| Ok((f, build_rule(f, order)?)))
                .collect::<Result<_>>()?,
        })
    }

    fn get(&self, family: ElementFamily) -> Result<&QuadratureRule> {
        self.rules
            .iter()
            .find(|(f, _)| *f == family)
            .map(|(_, r)| r)
            .ok_or_else(|| Error::InternalConsistency(format!("no rule for {family:?}")))
    }
}

#[derive(Clone, Copy, Default)]
struct Partial {
    one: f64,
    phi: f64,
    f: f64,
    f_sub: f64,
    f_bg: f64,
    refined: bool,
    residual: f64,
}

fn node_residual<const D: usize>(elem: &ReferenceElement, values: &[f64], iface: &InterfaceElement<D>) -> Result<f64> {
    iface
        .nodes
        .iter()
        .map(|x| interpolate(elem, values, x.as_slice()).map(f64::abs))
        .try_fold(0.0_f64, |m, r| r.map(|r| m.max(r)))
}

fn interface_element<const D: usize>(
    mesh: &BackgroundMesh<D>,
    values: &[f64],
    e: usize,
    rcfg: &ReconstructionConfig,
    rules: &Rules,
    f: &Integrand,
    phi: &Integrand,
) -> Result<Partial> {
    let found = reconstruct_element::<D>(values, mesh.order(), rcfg, e)?;
    let mut part = Partial {
        refined: found.refinements > 0,
        ..Default::default()
    };
    if found.interfaces.is_empty() {
        return Ok(part);
    }
    let xe = mesh.element_nodes(e);
    let placement = Placement {
        element: mesh.reference(),
        nodes: &xe,
    };
    for iface in &found.interfaces {
        let elem = ReferenceElement::cached(iface.family, iface.order)?;
        let mq = map_rule_surface(rules.get(iface.family)?, elem, &iface.nodes, Some(placement))?;
        part.one += mq.measure();
        part.phi += integrate(&mq, phi, IntegrationMode::Exact)?;
        part.f += integrate(&mq, f, IntegrationMode::Exact)?;
        part.f_sub += integrate(&mq, f, IntegrationMode::InterpolatedOnElement)?;
        part.f_bg += integrate(&mq, f, IntegrationMode::InterpolatedOnBackground)?;
        part.residual = part.residual.max(node_residual(mesh.reference(), values, iface)?);
    }
    Ok(part)
}

/// Rule on the background reference element with shape values and
/// gradients tabulated once, for elements that are not cut.
struct WholeElement {
    weights: Vec<f64>,
    shapes: Vec<Vec<f64>>,
    grads: Vec<Vec<f64>>,
}

impl WholeElement {
    fn new(elem: &ReferenceElement, order: usize) -> Result<Self> {
        let rule = build_rule(elem.family(), order)?;
        let dim = elem.dim();
        let mut shapes = Vec::with_capacity(rule.len());
        let mut grads = Vec::with_capacity(rule.len());
        for r in &rule.points {
            let mut v = vec![0.0; elem.node_count()];
            let mut g = vec![0.0; elem.node_count() * dim];
            elem.eval(&r[..dim], &mut v, Some(&mut g));
            shapes.push(v);
            grads.push(g);
        }
        Ok(WholeElement {
            weights: rule.weights.clone(),
            shapes,
            grads,
        })
    }

    /// `(∫ 1, ∫ f, ∫ f^h)` over the element with physical nodes `xe`.
    fn integrate<const D: usize>(&self, xe: &[SVector<f64, D>], f: &Integrand) -> Result<(f64, f64, f64)> {
        let nodal: Vec<f64> = xe.iter().map(|x| f.eval(x.as_slice())).collect();
        let mut out = (0.0, 0.0, 0.0);
        for ((w, n), g) in self.weights.iter().zip(&self.shapes).zip(&self.grads) {
            let mut m = [[0.0; 3]; 3];
            let mut x = SVector::<f64, D>::zeros();
            for (k, xk) in xe.iter().enumerate() {
                x += xk * n[k];
                for r in 0..D {
                    for c in 0..D {
                        m[r][c] += xk[r] * g[k * D + c];
                    }
                }
            }
            let det = if D == 2 {
                m[0][0] * m[1][1] - m[0][1] * m[1][0]
            } else {
                m[0][0] * (m[1][1] * m[2][2] - m[1][2] * m[2][1]) - m[0][1] * (m[1][0] * m[2][2] - m[1][2] * m[2][0])
                    + m[0][2] * (m[1][0] * m[2][1] - m[1][1] * m[2][0])
            };
            if !(det > 0.0) {
                return Err(Error::IntegrationInvalid(format!("background Jacobian determinant {det:e}")));
            }
            let wd = w * det;
            out.0 += wd;
            out.1 += wd * f.eval(x.as_slice());
            out.2 += wd * n.iter().zip(&nodal).map(|(a, b)| a * b).sum::<f64>();
        }
        Ok(out)
    }
}

fn volume_element<const D: usize>(
    mesh: &BackgroundMesh<D>,
    values: &[f64],
    e: usize,
    dcfg: &DecompositionConfig,
    rules: &Rules,
    whole: &WholeElement,
    f: &Integrand,
) -> Result<Partial> {
    let dec = decompose_element::<D>(&[values.to_vec()], mesh.order(), dcfg, e)?;
    let xe = mesh.element_nodes(e);
    let bg = mesh.reference();
    let placement = Placement { element: bg, nodes: &xe };
    let mut part = Partial {
        refined: dec.refinements() > 0,
        ..Default::default()
    };
    let mut add = |family: ElementFamily, order: usize, nodes: &[SVector<f64, D>]| -> Result<()> {
        let elem = ReferenceElement::cached(family, order)?;
        let mq = map_rule_volume(rules.get(family)?, elem, nodes, Some(placement))?;
        part.one += mq.measure();
        part.f += integrate(&mq, f, IntegrationMode::Exact)?;
        part.f_sub += integrate(&mq, f, IntegrationMode::InterpolatedOnElement)?;
        Ok(())
    };
    match &dec {
        ElementDecomposition::Uncut { signs } => {
            if signs.is_negative(0) {
                let (one, fx, fh) = whole.integrate(&xe, f)?;
                part.one += one;
                part.f += fx;
                part.f_sub += fh;
            }
        }
        ElementDecomposition::Cut {
            sub_elements,
            interfaces,
            ..
        } => {
            for s in sub_elements.iter().filter(|s| s.signs.is_negative(0)) {
                add(s.family, s.order, &s.nodes)?;
            }
            for i in interfaces {
                part.residual = part.residual.max(node_residual(bg, values, &i.element)?);
            }
        }
    }
    Ok(part)
}

fn relative(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs()
}

fn run_resolution<const D: usize>(cfg: &StudyConfig, n: usize, refs: &ReferenceValues) -> Result<ErrorRecord> {
    let start = Instant::now();
    let (lo, hi) = corners::<D>(&cfg.lo, &cfg.hi)?;
    let mesh = BackgroundMesh::<D>::structured(n, cfg.order, lo, hi)?;
    let rcfg = cfg.reconstruction();
    let field = sample(&cfg.level_set, &mesh, rcfg.perturbation)?;
    let f = cfg.integrand();
    let phi = Integrand::LevelSet(cfg.level_set.clone());
    let families: &[ElementFamily] = match (cfg.kind, D) {
        (StudyKind::Interface, 2) => &[ElementFamily::Line],
        (StudyKind::Interface, _) => &[ElementFamily::Triangle, ElementFamily::Quadrilateral],
        (StudyKind::Volume, 2) => &[ElementFamily::Triangle, ElementFamily::Quadrilateral],
        (StudyKind::Volume, _) => &[ElementFamily::Tetrahedron, ElementFamily::Prism],
    };
    let rules = Rules::new(cfg.quadrature_order, families)?;
    let whole = WholeElement::new(mesh.reference(), cfg.quadrature_order)?;
    let dcfg = DecompositionConfig {
        reconstruction: rcfg.clone(),
        processing_order: Vec::new(),
    };
    let parts = (0..mesh.element_count())
        .into_par_iter()
        .map(|e| {
            let values = field.element_values(&mesh, 0, e);
            match cfg.kind {
                StudyKind::Interface => interface_element(&mesh, &values, e, &rcfg, &rules, &f, &phi),
                StudyKind::Volume => volume_element(&mesh, &values, e, &dcfg, &rules, &whole, &f),
            }
        })
        .collect::<Result<Vec<_>>>()?;
    // summed in element order so results do not depend on the thread count
    let mut total = Partial::default();
    let mut refined = 0;
    for p in &parts {
        total.one += p.one;
        total.phi += p.phi;
        total.f += p.f;
        total.f_sub += p.f_sub;
        total.f_bg += p.f_bg;
        total.residual = total.residual.max(p.residual);
        refined += usize::from(p.refined);
    }
    let mut errors = BTreeMap::new();
    match cfg.kind {
        StudyKind::Interface => {
            errors.insert(Norm::One, relative(total.one, refs.interface));
            errors.insert(Norm::Phi, total.phi);
            errors.insert(Norm::F, relative(total.f, refs.interface_f));
            errors.insert(Norm::interpolated(D - 1), relative(total.f_sub, refs.interface_f));
            errors.insert(Norm::interpolated(D), relative(total.f_bg, refs.interface_f));
        }
        StudyKind::Volume => {
            errors.insert(Norm::One, relative(total.one, refs.volume));
            errors.insert(Norm::F, relative(total.f, refs.volume_f));
            errors.insert(Norm::interpolated(D), relative(total.f_sub, refs.volume_f));
        }
    }
    let keep = cfg.applicable_norms();
    errors.retain(|k, _| keep.contains(k));
    Ok(ErrorRecord {
        n,
        h: mesh.h(),
        n_elements: mesh.element_count(),
        errors,
        measure: total.one,
        refined_elements: refined,
        max_node_residual: total.residual,
        wall_time: start.elapsed().as_secs_f64(),
    })
}

/// One record per resolution for the configured study kind.
pub fn run_study(cfg: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    cfg.validate()?;
    let refs = match cfg.reference {
        Some(r) => r,
        None => reference_values(&cfg.level_set)?,
    };
    cfg.resolutions
        .iter()
        .map(|&n| match cfg.dimension {
            2 => run_resolution::<2>(cfg, n, &refs),
            _ => run_resolution::<3>(cfg, n, &refs),
        })
        .collect()
}

/// Quadrature on the reconstructed interface at every resolution.
pub fn run_interface_study(cfg: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    run_study(&cfg.clone().with_kind(StudyKind::Interface))
}

/// Quadrature over the negative region at every resolution.
pub fn run_volume_study(cfg: &StudyConfig) -> Result<Vec<ErrorRecord>> {
    run_study(&cfg.clone().with_kind(StudyKind::Volume))
}

/// Least-squares slope of `log |ε|` against `log h` over the unflagged
/// records above the error floor.
pub fn estimate_rate(records: &[ErrorRecord], norm: Norm) -> Result<RateEstimate> {
    let pts: Vec<(usize, f64, f64)> = records
        .iter()
        .filter(|r| !r.flagged())
        .filter_map(|r| {
            let e = r.error(norm)?.abs();
            (e.is_finite() && e > ERROR_FLOOR && r.h > 0.0).then(|| (r.n, r.h.ln(), e.ln()))
        })
        .collect();
    if pts.len() < 3 {
        return Err(Error::InsufficientData(format!(
            "{} usable records for {norm}, need 3",
            pts.len()
        )));
    }
    let m = pts.len() as f64;
    let mx = pts.iter().map(|p| p.1).sum::<f64>() / m;
    let my = pts.iter().map(|p| p.2).sum::<f64>() / m;
    let sxy: f64 = pts.iter().map(|p| (p.1 - mx) * (p.2 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.1 - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::InsufficientData("all records share one element size".into()));
    }
    Ok(RateEstimate {
        norm,
        slope: sxy / sxx,
        window: pts.iter().map(|p| p.0).collect(),
    })
}

#[derive(Clone, Debug)]
pub struct VariantSweep {
    pub variant: SearchVariant,
    pub records: Vec<ErrorRecord>,
    /// Fits per norm; norms without enough data are missing.
    pub rates: BTreeMap<Norm, RateEstimate>,
    /// Set if the study failed for this variant.
    pub error: Option<Error>,
}

impl VariantSweep {
    pub fn slope(&self, norm: Norm) -> Option<f64> {
        self.rates.get(&norm).map(|r| r.slope)
    }
}

/// Runs the study once per variant. Failures are recorded per variant.
pub fn sweep_variants(base: &StudyConfig, variants: &[SearchVariant]) -> Vec<VariantSweep> {
    variants
        .iter()
        .map(|&variant| {
            let cfg = base.clone().with_variant(variant);
            match run_study(&cfg) {
                Ok(records) => {
                    let rates = cfg
                        .applicable_norms()
                        .into_iter()
                        .filter_map(|n| estimate_rate(&records, n).ok().map(|r| (n, r)))
                        .collect();
                    VariantSweep {
                        variant,
                        records,
                        rates,
                        error: None,
                    }
                }
                Err(e) => VariantSweep {
                    variant,
                    records: Vec::new(),
                    rates: BTreeMap::new(),
                    error: Some(e),
                },
            }
        })
        .collect()
}

/// Plain-text table of fitted slopes, one row per variant.
pub fn format_sweep(sweeps: &[VariantSweep], norms: &[Norm]) -> String {
    let mut out = String::from("variant");
    for n in norms {
        out.push_str(&format!(" {:>8}", n.id()));
    }
    out.push('\n');
    for s in sweeps {
        out.push_str(&format!("{:<7}", s.variant.to_string()));
        for n in norms {
            match (s.slope(*n), &s.error) {
                (_, Some(_)) => out.push_str(&format!(" {:>8}", "failed")),
                (Some(v), None) => out.push_str(&format!(" {v:>8.3}")),
                (None, None) => out.push_str(&format!(" {:>8}", "-")),
            }
        }
        out.push('\n');
    }
    out
}

// ---- reference integrals ----

/// `F2D` and `F3D` in closed form over circles and spheres at the origin;
/// star-shaped quadrature otherwise.
pub fn reference_values(field: &AnalyticField) -> Result<ReferenceValues> {
    match field {
        AnalyticField::Circle2D { r, center } if *center == [0.0, 0.0] => Ok(ReferenceValues {
            interface: 2.0 * PI * r,
            interface_f: PI * r.powi(3),
            volume: PI * r * r,
            volume_f: PI * r.powi(4) / 4.0,
        }),
        AnalyticField::Circle2D { r, center } => {
            let r = *r;
            Ok(polar_references(*center, |_| (r, 0.0), 1 << 12))
        }
        AnalyticField::Flower2D => Ok(*FLOWER.get_or_init(|| {
            polar_references([0.0, 0.0], |t| (flower_radius(t), 0.8 * (8.0 * t).cos()), 1_000_000)
        })),
        AnalyticField::Sphere3D { r, center } if *center == [0.0; 3] => Ok(ReferenceValues {
            interface: 4.0 * PI * r * r,
            interface_f: 8.0 * PI * r.powi(4) / 3.0 + 2.0 * PI * r * r.sin(),
            volume: 4.0 * PI * r.powi(3) / 3.0,
            volume_f: 8.0 * PI * r.powi(5) / 15.0 + 2.0 * PI * (r.sin() - r * r.cos()),
        }),
        AnalyticField::Sphere3D { .. } | AnalyticField::Bumpy3D { .. } => {
            let center = match field {
                AnalyticField::Sphere3D { center, .. } => *center,
                _ => [0.0; 3],
            };
            if center == [0.0; 3] && matches!(field, AnalyticField::Bumpy3D { r } if *r == crate::levelset::TEST_RADIUS) {
                static BUMPY: OnceLock<Result<ReferenceValues>> = OnceLock::new();
                return BUMPY.get_or_init(|| radial_references(field, center, 256)).clone();
            }
            radial_references(field, center, 256)
        }
        _ => Err(Error::InvalidArgument(format!("no reference integrals for {field:?}"))),
    }
}

static FLOWER: OnceLock<ReferenceValues> = OnceLock::new();

fn f2d(x: f64, y: f64) -> f64 {
    Integrand::F2D.eval(&[x, y])
}

fn f3d(x: &[f64; 3]) -> f64 {
    Integrand::F3D.eval(x)
}

/// Curve `c + R(θ)(cos θ, sin θ)` with `radius(θ) = (R, R')`; trapezoidal
/// rule in `θ` (spectrally accurate for periodic integrands) and
/// Gauss–Legendre along the radius.
pub fn polar_references(center: [f64; 2], radius: impl Fn(f64) -> (f64, f64) + Sync, panels: usize) -> ReferenceValues {
    let (gx, gw) = gauss_legendre(12);
    let dt = 2.0 * PI / panels as f64;
    let sums: Vec<[f64; 4]> = (0..panels)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 * dt;
            let (r, dr) = radius(t);
            let (s, c) = t.sin_cos();
            let ds = r.hypot(dr);
            let mut vf = 0.0;
            for (u, w) in gx.iter().zip(&gw) {
                let rho = 0.5 * r * (u + 1.0);
                vf += 0.5 * r * w * rho * f2d(center[0] + rho * c, center[1] + rho * s);
            }
            [ds, ds * f2d(center[0] + r * c, center[1] + r * s), 0.5 * r * r, vf]
        })
        .collect();
    let mut acc = [0.0; 4];
    for s in &sums {
        for k in 0..4 {
            acc[k] += s[k];
        }
    }
    ReferenceValues {
        interface: acc[0] * dt,
        interface_f: acc[1] * dt,
        volume: acc[2] * dt,
        volume_f: acc[3] * dt,
    }
}

fn field_gradient(field: &AnalyticField, x: &[f64; 3]) -> Option<[f64; 3]> {
    match field {
        AnalyticField::Sphere3D { center, .. } => {
            let d = [x[0] - center[0], x[1] - center[1], x[2] - center[2]];
            let n = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
            Some(d.map(|v| v / n))
        }
        AnalyticField::Bumpy3D { .. } => {
            let n = (x[0] * x[0] + x[1] * x[1] + x[2] * x[2]).sqrt();
            Some(std::array::from_fn(|k| x[k] / n - 0.2 * PI * (2.0 * PI * x[k]).sin()))
        }
        _ => None,
    }
}

/// Root of `φ(c + ρ ω)` in `ρ`, which must be unique on `(0, 2]`.
fn ray_root(field: &AnalyticField, c: [f64; 3], w: [f64; 3]) -> Result<f64> {
    let at = |rho: f64| field.evaluate(&[c[0] + rho * w[0], c[1] + rho * w[1], c[2] + rho * w[2]]);
    let steps = 200;
    let mut bracket = None;
    let mut prev = (1e-3, at(1e-3)?);
    for i in 1..=steps {
        let rho = 1e-3 + (2.0 - 1e-3) * i as f64 / steps as f64;
        let v = at(rho)?;
        if (v < 0.0) != (prev.1 < 0.0) {
            if bracket.is_some() {
                return Err(Error::InvalidArgument(format!("{field:?} is not star-shaped about {c:?}")));
            }
            bracket = Some((prev.0, rho));
        }
        prev = (rho, v);
    }
    let (mut a, mut b) = bracket.ok_or_else(|| Error::InvalidArgument(format!("{field:?} has no root along {w:?}")))?;
    let fa = at(a)?;
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        if b - a < 1e-16 * b {
            break;
        }
        if (at(m)? < 0.0) == (fa < 0.0) {
            a = m;
        } else {
            b = m;
        }
    }
    Ok(0.5 * (a + b))
}

/// Star-shaped surface about `c`: Gauss–Legendre in `cos θ` (`n` points)
/// and trapezoidal in the azimuth (`2n` points).
pub fn radial_references(field: &AnalyticField, c: [f64; 3], n: usize) -> Result<ReferenceValues> {
    let (zx, zw) = gauss_legendre(n);
    let (gx, gw) = gauss_legendre(16);
    let m = 2 * n;
    let dp = 2.0 * PI / m as f64;
    let rows: Vec<Result<[f64; 4]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let (ct, wt) = (zx[i], zw[i]);
            let st = (1.0 - ct * ct).sqrt();
            let mut acc = [0.0; 4];
            for j in 0..m {
                let (sp, cp) = (j as f64 * dp).sin_cos();
                let w = [st * cp, st * sp, ct];
                let rho = ray_root(field, c, w)?;
                let x = [c[0] + rho * w[0], c[1] + rho * w[1], c[2] + rho * w[2]];
                let g = field_gradient(field, &x)
                    .ok_or_else(|| Error::InvalidArgument(format!("no gradient for {field:?}")))?;
                let gn = (g[0] * g[0] + g[1] * g[1] + g[2] * g[2]).sqrt();
                let gw_ = (g[0] * w[0] + g[1] * w[1] + g[2] * w[2]).abs();
                let ds = rho * rho * gn / gw_;
                let mut vf = 0.0;
                for (u, q) in gx.iter().zip(&gw) {
                    let s = 0.5 * rho * (u + 1.0);
                    vf += 0.5 * rho * q * s * s * f3d(&[c[0] + s * w[0], c[1] + s * w[1], c[2] + s * w[2]]);
                }
                acc[0] += ds;
                acc[1] += ds * f3d(&x);
                acc[2] += rho.powi(3) / 3.0;
                acc[3] += vf;
            }
            Ok(acc.map(|v| v * wt * dp))
        })
        .collect();
    let mut total = [0.0; 4];
    for r in rows {
        let r = r?;
        for k in 0..4 {
            total[k] += r[k];
        }
    }
    Ok(ReferenceValues {
        interface: total[0],
        interface_f: total[1],
        volume: total[2],
        volume_f: total[3],
    })
}
