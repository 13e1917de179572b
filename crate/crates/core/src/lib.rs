//! Kauffman bracket skein algebras, quantum tori and their representations at roots of unity.

pub mod error;
pub mod bracket;
pub mod charvar;
pub mod exactalg;
pub mod lattice;
pub mod qrep;
pub mod shadow;
pub mod skein_pt;
pub mod traintrack;

pub use error::{Result, SkeinError};
pub use exactalg::{chebyshev, IntPoly, LaurentHalf, RootOfUnity};
