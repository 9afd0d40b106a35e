//! Shared fixtures for the integration suites: random networks, random
//! Hermitian/passive centers, and the generalized-permutation operators of
//! the eight symmetry classes.

#![allow(dead_code)]

use nhscatter::network::{LeadAttachment, Momentum, ScatteringNetwork};
use nhscatter::numerics::{C64, CMatrix};
use nhscatter::symmetry::SymmetryKind;
use rand::Rng;
use std::f64::consts::PI;

pub fn c64(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn assert_close(a: C64, b: C64, tol: f64, what: &str) {
    assert!(
        (a - b).norm() <= tol,
        "{what}: got {a}, want {b} (|diff| = {:.3e}, tol {tol:.1e})",
        (a - b).norm()
    );
}

/// Random in-band momentum with a small margin off the band edges.
pub fn random_momentum(rng: &mut impl Rng) -> Momentum {
    Momentum::new(rng.random_range(-PI + 0.05..-0.05)).unwrap()
}

/// Random complex center with entries bounded by `bound` in each component.
pub fn random_center(rng: &mut impl Rng, n: usize, bound: f64) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| {
        c64(
            rng.random_range(-bound..bound),
            rng.random_range(-bound..bound),
        )
    })
}

pub fn random_hermitian(rng: &mut impl Rng, n: usize) -> CMatrix {
    let a = random_center(rng, n, 1.0);
    a.add(&a.dagger()).scale(c64(0.5, 0.0))
}

/// Random passive center: Hermitian part random, anti-Hermitian part
/// -i B B^dag (negative semidefinite damping).
pub fn random_passive(rng: &mut impl Rng, n: usize) -> CMatrix {
    let herm = random_hermitian(rng, n);
    let b = random_center(rng, n, 0.6);
    let damping = b.mul(&b.dagger());
    herm.add(&damping.scale(c64(0.0, -1.0)))
}

/// Random network: N in 2..=n_max sites, 2..=max_leads leads on distinct
/// random sites (ids 1..), all couplings J = 1.
pub fn random_network(
    rng: &mut impl Rng,
    n_max: usize,
    max_leads: usize,
    hc: Option<CMatrix>,
) -> ScatteringNetwork {
    let n = rng.random_range(2..=n_max);
    let hc = hc.unwrap_or_else(|| random_center(rng, n, 3.0));
    let n = hc.rows();
    let lead_count = rng.random_range(2..=max_leads.min(n));
    let mut sites: Vec<usize> = (0..n).collect();
    for i in (1..sites.len()).rev() {
        let j = rng.random_range(0..=i);
        sites.swap(i, j);
    }
    let leads = sites[..lead_count]
        .iter()
        .enumerate()
        .map(|(i, &site)| LeadAttachment {
            id: i as u32 + 1,
            site,
            g: 1.0,
        })
        .collect();
    ScatteringNetwork::new(hc, leads, 1.0, 0.0).unwrap()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mapping {
    Identity,
    Interchange,
}

/// A random generalized-permutation operator of the requested class, acting
/// on ports at sites 0 and n-1. Returns the operator and the mapping phase
/// alpha it carries.
pub fn class_operator<R: Rng>(
    kind: SymmetryKind,
    mapping: Mapping,
    n: usize,
    rng: &mut R,
) -> (CMatrix, f64) {
    let mut u = CMatrix::zeros(n, n);
    let involutive = matches!(kind, SymmetryKind::Q | SymmetryKind::P);
    let mut diag_entry = |rng: &mut R| -> C64 {
        if involutive {
            // u^2 = 1 restricts diagonal-style phases to +-1
            if rng.random_range(0..2) == 0 {
                c64(1.0, 0.0)
            } else {
                c64(-1.0, 0.0)
            }
        } else {
            C64::from_polar(1.0, rng.random_range(-PI..PI))
        }
    };
    match mapping {
        Mapping::Identity => {
            u[(0, 0)] = c64(1.0, 0.0);
            for i in 1..n {
                u[(i, i)] = diag_entry(rng);
            }
            let alpha = u[(n - 1, n - 1)].arg();
            (u, alpha)
        }
        Mapping::Interchange => {
            // swap the port sites; u u* = 1 (C/K) and u^2 = 1 (Q/P) both pin
            // the pair phases to alpha = 0 in this family
            u[(0, n - 1)] = c64(1.0, 0.0);
            u[(n - 1, 0)] = c64(1.0, 0.0);
            for i in 1..n - 1 {
                u[(i, i)] = diag_entry(rng);
            }
            (u, 0.0)
        }
    }
}
