//! Decomposition of cut background elements into higher-order sub-elements.
//!
//! All geometry is built in the reference coordinates of the background
//! element ("root" coordinates) and only mapped to physical space for
//! quadrature or export. With several level sets the element is decomposed
//! with respect to one function after the other; every piece carries the
//! signs collected so far and remembers which of its sides lie on which
//! interface.

mod local;
mod pipeline;
mod simplex;

use std::fmt;

use nalgebra::SVector;

pub use local::{decompose_tetra, decompose_triangle, LocalSub};
pub use pipeline::{
    decompose_element, decompose_multi, map_to_physical, reconstruct_element, reconstruct_mesh, DecompositionConfig,
    ElementInterfaces, PhysicalSubElement,
};
pub use simplex::{check_jacobian, simplexify};

use crate::reconstruction::InterfaceElement;
use crate::reference_elements::ElementFamily;

/// Signs of all level-set functions on a region; bit `k` set means `φ_k < 0`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SignVector {
    bits: u32,
    len: u8,
}

impl SignVector {
    pub const MAX_FUNCTIONS: usize = 32;

    /// All positive.
    pub fn new(len: usize) -> Self {
        assert!(len <= Self::MAX_FUNCTIONS, "at most 32 level-set functions");
        SignVector { bits: 0, len: len as u8 }
    }

    pub fn from_negative(flags: &[bool]) -> Self {
        flags
            .iter()
            .enumerate()
            .fold(Self::new(flags.len()), |s, (k, &neg)| s.with(k, neg))
    }

    pub fn with(mut self, k: usize, negative: bool) -> Self {
        if negative {
            self.bits |= 1 << k;
        } else {
            self.bits &= !(1 << k);
        }
        self
    }

    pub fn is_negative(&self, k: usize) -> bool {
        self.bits >> k & 1 == 1
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    /// Integer code used in exports, bit `k` for a negative `φ_k`.
    pub fn code(&self) -> u32 {
        self.bits
    }
}

impl fmt::Display for SignVector {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for k in 0..self.len() {
            f.write_str(if self.is_negative(k) { "-" } else { "+" })?;
        }
        Ok(())
    }
}

/// Higher-order sub-element with nodes in root coordinates.
#[derive(Clone, Debug, PartialEq)]
pub struct SubElement<const D: usize> {
    pub family: ElementFamily,
    pub order: usize,
    pub nodes: Vec<SVector<f64, D>>,
    pub signs: SignVector,
    /// For each side, the level set whose interface it lies on.
    pub side_tags: Vec<Option<usize>>,
    /// Child indices of the refinements this piece came from.
    pub lineage: Vec<u8>,
}

impl<const D: usize> SubElement<D> {
    /// The whole reference simplex as a single piece.
    pub fn root(order: usize, functions: usize) -> crate::error::Result<Self> {
        let family = match D {
            2 => ElementFamily::Triangle,
            3 => ElementFamily::Tetrahedron,
            _ => return Err(crate::error::Error::InvalidArgument(format!("no {D}D simplex"))),
        };
        let elem = crate::reference_elements::ReferenceElement::cached(family, order)?;
        Ok(SubElement {
            family,
            order,
            nodes: crate::reference_elements::reference_placement(elem),
            signs: SignVector::new(functions),
            side_tags: vec![None; family.sides().len()],
            lineage: Vec::new(),
        })
    }
}

/// Interface element in root coordinates produced by level set `level_set`.
#[derive(Clone, Debug, PartialEq)]
pub struct TaggedInterface<const D: usize> {
    pub element: InterfaceElement<D>,
    pub level_set: usize,
    /// Signs of the flanking sub-element on the negative side of `level_set`.
    pub signs: SignVector,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ElementDecomposition<const D: usize> {
    Uncut {
        signs: SignVector,
    },
    Cut {
        sub_elements: Vec<SubElement<D>>,
        interfaces: Vec<TaggedInterface<D>>,
        /// Number of refinement steps taken.
        refinements: usize,
    },
}

impl<const D: usize> ElementDecomposition<D> {
    pub fn refinements(&self) -> usize {
        match self {
            ElementDecomposition::Uncut { .. } => 0,
            ElementDecomposition::Cut { refinements, .. } => *refinements,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionResult<const D: usize> {
    pub order: usize,
    pub functions: usize,
    pub elements: Vec<ElementDecomposition<D>>,
}

impl<const D: usize> DecompositionResult<D> {
    /// Background elements that needed recursive refinement.
    pub fn refined_elements(&self) -> usize {
        self.elements.iter().filter(|e| e.refinements() > 0).count()
    }

    pub fn cut_elements(&self) -> usize {
        self.elements
            .iter()
            .filter(|e| matches!(e, ElementDecomposition::Cut { .. }))
            .count()
    }
}
