//! Scattering through non-Hermitian tight-binding centers attached to uniform
//! leads: closed-form transmission/reflection coefficients, full S-matrices,
//! discrete-symmetry verification and detection (C/K/Q/P classes with their
//! protected-coefficient constraints), and wave-packet time evolution that
//! cross-checks the steady-state results.
//!
//! The crate is organized around [`network::ScatteringNetwork`] (an N-site
//! center matrix plus lead attachments). [`scattering`] computes coefficients
//! two independent ways — a closed form in adjugate elements of
//! `Delta = H_c' - 2J cos k`, and a brute-force steady-state solve —
//! [`symmetry`] classifies center symmetries and validates the coefficient
//! constraints they protect, [`models`] holds the catalog of reference
//! centers (isolator, circulator, dissipative coupling, ...), and
//! [`dynamics`] propagates Gaussian packets on finite leads.
//!
//! Momentum-grid sweeps and batch checks run in parallel via rayon when the
//! default `parallel` feature is on; disabling it swaps in sequential loops
//! with identical output.

pub mod dynamics;
pub mod error;
pub mod models;
pub mod network;
pub mod numerics;
pub mod par;
pub mod scattering;
pub mod symmetry;

pub use error::{Error, Result};
pub use network::{Momentum, ScatteringNetwork};
pub use numerics::{C64, CMatrix};
