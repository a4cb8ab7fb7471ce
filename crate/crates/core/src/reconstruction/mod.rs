//! Reconstruction of zero-level sets by higher-order interface elements.
//!
//! Everything here works in the reference coordinates of one simplex
//! (a background element, a refinement child, or a piece of an earlier
//! decomposition) given by its order-`p` nodal level-set values.
//!
//! Steps for one simplex:
//!
//! 1. [`check_validity`] samples the signs of `φ^h` on a sample grid.
//! 2. [`classify_topology`] reads the corner signs.
//! 3. [`find_edge_intersections`] locates the roots on the cut edges.
//! 4. [`reconstruct_2d`] / [`reconstruct_3d`] place the remaining interface
//!    nodes by Newton iteration along search directions.
//!
//! Failures that are cured by refinement ([`Error::triggers_refinement`]) are
//! handled by [`RefinementTree`] and the drivers in
//! [`crate::decomposition`].

mod newton;
mod recon2d;
mod recon3d;
mod refinement;
mod topology;
mod validity;
mod variant;

pub use newton::{find_edge_root, newton_search, SearchDirection};
pub use recon2d::{build_start_values_2d, reconstruct_2d, StartValues2D};
pub use recon3d::reconstruct_3d;
pub use refinement::{red_children, RefinementNode, RefinementTree};
pub(crate) use refinement::child_node_coords;
pub use topology::{classify_topology, find_edge_intersections, CutTopology, EdgeIntersection, TopologyCase};
pub use validity::{check_validity, sample_table, InvalidReason, SampleTable, ValidityReport};
pub use variant::{Direction2D, GradientMode, Inner3D, Reconstruction2D, SearchVariant};

use nalgebra::SVector;

use crate::reference_elements::ElementFamily;

/// Sign convention: zero counts as positive.
pub fn is_negative(v: f64) -> bool {
    v < 0.0
}

/// Tolerances and choices of the reconstruction.
#[derive(Clone, Debug, PartialEq)]
pub struct ReconstructionConfig {
    pub variant: SearchVariant,
    /// Convergence threshold on `|φ^h|`.
    pub newton_tol: f64,
    pub max_iterations: usize,
    /// Relative threshold on `|∇φ · N| / (|∇φ| |N|)`.
    pub degenerate_tol: f64,
    /// Distance a converged root may lie outside the reference domain.
    pub domain_tol: f64,
    /// Sample grid subdivisions per edge, `2p` if unset.
    pub sample_density: Option<usize>,
    pub depth_limit: usize,
    pub perturbation: f64,
}

impl Default for ReconstructionConfig {
    fn default() -> Self {
        ReconstructionConfig {
            variant: SearchVariant::default(),
            newton_tol: 1e-12,
            max_iterations: 30,
            degenerate_tol: 1e-10,
            domain_tol: 1e-8,
            sample_density: None,
            depth_limit: 5,
            perturbation: crate::levelset::DEFAULT_PERTURBATION,
        }
    }
}

impl ReconstructionConfig {
    pub fn density(&self, order: usize) -> usize {
        self.sample_density.unwrap_or(2 * order).max(order + 1)
    }
}

/// Result of reconstructing one simplex; `interface` is `None` if it is uncut.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalReconstruction<const D: usize> {
    pub topology: CutTopology,
    pub intersections: Vec<EdgeIntersection>,
    pub interface: Option<InterfaceElement<D>>,
}

/// Higher-order interface element with nodes in the reference coordinates of
/// the simplex it was reconstructed in.
#[derive(Clone, Debug, PartialEq)]
pub struct InterfaceElement<const D: usize> {
    /// Line in 2D, triangle or quadrilateral in 3D.
    pub family: ElementFamily,
    pub order: usize,
    pub nodes: Vec<SVector<f64, D>>,
}
