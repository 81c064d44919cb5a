//! Exact finite arithmetic (Kloosterman sums, Dirichlet characters, the
//! delta symbol, character-sum towers, GL(3) Hecke coefficient tables) and
//! desk-scale numerical experiments (bilinear norms, large sieve, shifted
//! convolutions, oscillatory integrals), each paired with brute-force
//! oracles and scan reports.

pub mod arith;
pub mod characters;
pub mod deltasym;
pub mod dft;
pub mod error;
pub mod experiments;
pub mod expsums;
pub mod gcharsums;
pub mod gl3coeffs;
pub mod norms;
pub mod oscillatory;
pub mod report;
pub mod rng;
pub mod suite;

pub use error::{Error, Result};
