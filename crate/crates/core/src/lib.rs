//! Pseudo-spectral simulation and modulus-of-continuity certification for
//! fractionally dissipative active scalars: the modified porous-media
//! equation in 3-D and the modified quasi-geostrophic equation in 2-D.

// `!(x > 0.0)` is the NaN-rejecting form used for every parameter check.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// Grid loops index several parallel tables by the same flat index.
#![allow(clippy::needless_range_loop)]

pub mod dynamics;
pub mod error;
pub mod evolution;
pub mod io;
pub mod littlewood_paley;
pub mod moc;
pub mod mollifier;
pub mod quadrature;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
