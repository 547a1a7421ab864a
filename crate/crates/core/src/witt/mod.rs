//! Truncated `p`-typical Witt vectors over `Z/p^k` and truncated polynomial
//! rings, and displays of monomial isocrystals.

pub mod display;
pub mod poly;
pub mod ring;

pub use display::{display_check, display_from_element, DisplayDatum, DisplayReport};
pub use poly::{witt_polys, IntPoly, WittPolys};
pub use ring::{is_prime, CoeffRing, PolyElem, TruncatedPoly, WittOps, WittVector, ZModPk};
