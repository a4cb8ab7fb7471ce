//! Higher-order reconstruction of level-set geometries in simplicial background
//! meshes, decomposition of cut elements into conforming curved sub-elements,
//! and quadrature on and on either side of the zero-level sets.
//!
//! The pipeline runs per background element in its reference coordinates:
//!
//! 1. [`reconstruction`] checks the nodal level-set data, refines where it is
//!    not resolvable, and places higher-order interface elements by Newton
//!    iteration on the interpolated level set.
//! 2. [`decomposition`] splits cut elements into sub-elements with one curved
//!    side, using the transfinite maps of [`transfinite_maps`].
//! 3. [`quadrature`] maps reference rules through the sub-element and
//!    background-element maps.
//!
//! [`convergence_harness`] wraps all of this into h-convergence studies.

pub mod convergence_harness;
pub mod decomposition;
pub mod error;
pub mod levelset;
pub mod mesh;
pub mod quadrature;
pub mod reconstruction;
pub mod reference_elements;
pub mod transfinite_maps;

pub use error::{Error, Result};
pub use reference_elements::{ElementFamily, ReferenceElement};
