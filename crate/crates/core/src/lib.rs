//! Bilinear-sparse encryption: key generation, encryption, lifted
//! deconvolution, known-plaintext key recovery and non-retrievability
//! certificates, plus the Monte-Carlo harness that ties them together.

pub mod attack;
pub mod certs;
pub mod complexcore;
pub mod deconv;
pub mod error;
pub mod harness;
pub mod scheme;

pub use error::{Error, Result};
