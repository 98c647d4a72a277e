//! Complex linear-algebra primitives shared by every other module.

pub mod fourier;
pub mod linalg;
pub mod rng;
pub mod textfmt;

pub use fourier::{circ_conv, dft, idft};
pub use linalg::{matvec, CMat, CVec, C64, ONE, ZERO};
pub use rng::{hash64, sample_complex_gaussian, Rng};
