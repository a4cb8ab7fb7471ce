use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Reconstruction2D {
    Linear,
    Hermite,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum GradientMode {
    /// `∇φ^h` at the start value.
    Fixed,
    /// `∇φ^h` at the current iterate.
    Live,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Direction2D {
    /// Towards the corner on the other side of the interface.
    OppositeNode,
    /// Edge directions at the two intersections, blended along the element.
    EdgeDirections,
    /// Normal to the intermediate reconstruction.
    Normal,
    Gradient(GradientMode),
}

/// Search for inner nodes of 3D interface elements.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Inner3D {
    /// `A`: normal of the intermediate surface.
    Normal,
    /// `B`: gradient at the start value.
    GradFixed,
    /// `C`: gradient at the current iterate.
    GradLive,
}

/// Start values and search directions, written as codes like `13`, `24b` or `A13`.
///
/// The optional letter selects the 3D inner-node search, the first digit the
/// intermediate reconstruction (1 linear, 2 Hermite), the second digit the
/// search direction (1 opposite node, 2 edge directions, 3 normal, 4
/// gradient) and a trailing `a`/`b` the fixed or live gradient for direction 4.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct SearchVariant {
    pub reconstruction: Reconstruction2D,
    pub direction: Direction2D,
    pub inner: Inner3D,
}

impl Default for SearchVariant {
    fn default() -> Self {
        SearchVariant {
            reconstruction: Reconstruction2D::Linear,
            direction: Direction2D::Normal,
            inner: Inner3D::Normal,
        }
    }
}

impl FromStr for SearchVariant {
    type Err = Error;

    fn from_str(code: &str) -> Result<Self> {
        let bad = || Error::InvalidArgument(format!("unknown search variant '{code}'"));
        let mut chars = code.trim().chars().peekable();
        let inner = match chars.peek() {
            Some('A') | Some('a') => Some(Inner3D::Normal),
            Some('B') => Some(Inner3D::GradFixed),
            Some('C') | Some('c') => Some(Inner3D::GradLive),
            _ => None,
        };
        if inner.is_some() {
            chars.next();
        }
        let reconstruction = match chars.next() {
            Some('1') => Reconstruction2D::Linear,
            Some('2') => Reconstruction2D::Hermite,
            _ => return Err(bad()),
        };
        let digit = chars.next().ok_or_else(bad)?;
        let suffix = chars.next();
        if chars.next().is_some() {
            return Err(bad());
        }
        let direction = match (digit, suffix) {
            ('1', None) => Direction2D::OppositeNode,
            ('2', None) => Direction2D::EdgeDirections,
            ('3', None) => Direction2D::Normal,
            ('4', None) | ('4', Some('a')) => Direction2D::Gradient(GradientMode::Fixed),
            ('4', Some('b')) => Direction2D::Gradient(GradientMode::Live),
            _ => return Err(bad()),
        };
        Ok(SearchVariant {
            reconstruction,
            direction,
            inner: inner.unwrap_or(Inner3D::Normal),
        })
    }
}

impl fmt::Display for SearchVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let letter = match self.inner {
            Inner3D::Normal => 'A',
            Inner3D::GradFixed => 'B',
            Inner3D::GradLive => 'C',
        };
        let first = match self.reconstruction {
            Reconstruction2D::Linear => '1',
            Reconstruction2D::Hermite => '2',
        };
        let second = match self.direction {
            Direction2D::OppositeNode => "1",
            Direction2D::EdgeDirections => "2",
            Direction2D::Normal => "3",
            Direction2D::Gradient(GradientMode::Fixed) => "4a",
            Direction2D::Gradient(GradientMode::Live) => "4b",
        };
        write!(f, "{letter}{first}{second}")
    }
}
