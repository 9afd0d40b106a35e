//! Two-port transmission/reflection coefficients, N-port S-matrix assembly,
//! spectral-singularity scans, and an independent steady-state oracle.
//!
//! The closed form expresses the coefficients through the four elements of
//! Delta^-1 at the port sites, Delta = H_c' - (2J cos k) 1. Evaluated naively
//! it breaks down wherever det Delta = 0, which happens at perfectly regular
//! scattering points (a center resonance crossing the incident frequency), so
//! [`two_port`] clears the determinant and works with adjugate elements
//! instead: with A = adj(Delta), D0 = det Delta, and C the minor of Delta
//! with the port rows/columns removed,
//!
//! ```text
//!   den = D0/J^2 + e^{ik} (A_mm + A_nn)/J + e^{2ik} C
//!   t_L = A_nm (e^{ik} - e^{-ik}) / (J den)
//!   t_R = A_mn (e^{ik} - e^{-ik}) / (J den)
//!   r_L = -[D0/J^2 + (e^{ik} A_nn + e^{-ik} A_mm)/J + C] / den
//!   r_R = -[D0/J^2 + (e^{ik} A_mm + e^{-ik} A_nn)/J + C] / den
//! ```
//!
//! which is the same rational function (numerator and denominator both carry
//! a factor D0 that cancels, via det(adj 2x2 block) = D0 * C) but stays
//! finite at det Delta = 0. The denominator vanishes exactly on spectral
//! singularities, where the coefficients genuinely diverge and the
//! `divergent` flag is raised.
//!
//! [`oracle_two_port`] never touches the closed form: it assembles the raw
//! steady-state equations for the center amplitudes and the outgoing-wave
//! ansatz on every lead, solves them by LU, and reads off r and t. It also
//! supports couplings g other than J directly (the first lead site becomes an
//! explicit unknown, mirroring what `augment_general_coupling` does to the
//! network), so it doubles as the reference for the augmentation rule.

use crate::error::{Error, Result};
use crate::network::{Momentum, ScatteringNetwork};
use crate::numerics::{self, C64, CMatrix};
use crate::par;
use std::collections::BTreeMap;

/// Relative threshold on the closed-form denominator for flagging divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e-10;

/// Transmission/reflection amplitudes for the port pair at one momentum.
/// `t_l`/`r_l` belong to forward incidence (lead m), `t_r`/`r_r` to backward
/// (lead n). When `divergent` is set the raw (large) values are reported and
/// must not be used in equality assertions.
#[derive(Clone, Copy, Debug)]
pub struct ScatteringCoefficients {
    pub k: Momentum,
    pub t_l: C64,
    pub r_l: C64,
    pub t_r: C64,
    pub r_r: C64,
    pub divergent: bool,
}

/// The four elements of Delta^-1 at the port sites.
#[derive(Clone, Copy, Debug)]
pub struct DeltaElements {
    pub mm: C64,
    pub mn: C64,
    pub nm: C64,
    pub nn: C64,
}

/// Full scattering matrix; `s[(out, in)]` is the amplitude from lead
/// `ports[in]` into lead `ports[out]`, diagonal entries are reflections.
#[derive(Clone, Debug)]
pub struct SMatrix {
    pub ports: Vec<u32>,
    pub s: CMatrix,
}

/// A momentum where the closed-form denominator collapsed.
#[derive(Clone, Copy, Debug)]
pub struct SingularPoint {
    pub k: Momentum,
    pub denominator: f64,
}

fn delta_matrix(net: &ScatteringNetwork, m: u32, n: u32, k: Momentum) -> Result<CMatrix> {
    let mut delta = net.effective_two_port(m, n, k)?;
    let shift = 2.0 * net.j_lead() * k.k().cos();
    for i in 0..delta.rows() {
        delta[(i, i)] -= shift;
    }
    Ok(delta)
}

/// Delta^-1 elements at the port sites of the (m, n) reduction. Propagates
/// `SingularMatrix` when det Delta = 0 (band-edge or bound-state coincidence);
/// use [`two_port`] for coefficients, which stays finite there.
pub fn delta_inverse_elements(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    k: Momentum,
) -> Result<DeltaElements> {
    let net = net.augment_general_coupling();
    let delta = delta_matrix(&net, m, n, k)?;
    let inv = numerics::invert(&delta)?;
    let (sm, sn) = (net.lead(m)?.site, net.lead(n)?.site);
    Ok(DeltaElements {
        mm: inv[(sm, sm)],
        mn: inv[(sm, sn)],
        nm: inv[(sn, sm)],
        nn: inv[(sn, sn)],
    })
}

/// Adjugate elements of Delta at the port sites, the determinant, and the
/// complementary minor. `adj(x, y) = (-1)^{x+y} det(Delta without row y, col x)`.
pub(crate) struct AdjugateElements {
    pub mm: C64,
    pub mn: C64,
    pub nm: C64,
    pub nn: C64,
    pub det: C64,
    pub complement: C64,
}

pub(crate) fn adjugate_elements(delta: &CMatrix, sm: usize, sn: usize) -> AdjugateElements {
    let sign = |x: usize, y: usize| {
        if (x + y) % 2 == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(-1.0, 0.0)
        }
    };
    AdjugateElements {
        mm: sign(sm, sm) * numerics::minor_det(delta, &[sm], &[sm]),
        mn: sign(sm, sn) * numerics::minor_det(delta, &[sn], &[sm]),
        nm: sign(sn, sm) * numerics::minor_det(delta, &[sm], &[sn]),
        nn: sign(sn, sn) * numerics::minor_det(delta, &[sn], &[sn]),
        det: numerics::determinant(delta),
        complement: numerics::minor_det(delta, &[sm, sn], &[sm, sn]),
    }
}

fn two_port_with_denominator(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    k: Momentum,
) -> Result<(ScatteringCoefficients, f64)> {
    let net = net.augment_general_coupling();
    let delta = delta_matrix(&net, m, n, k)?;
    let (sm, sn) = (net.lead(m)?.site, net.lead(n)?.site);
    let adj = adjugate_elements(&delta, sm, sn);

    let jinv = 1.0 / net.j_lead();
    let eik = k.phase();
    let emik = eik.conj();
    let e2ik = eik * eik;

    let den = jinv * jinv * adj.det + jinv * eik * (adj.mm + adj.nn) + e2ik * adj.complement;
    let osc = jinv * (eik - emik);
    let num_tl = adj.nm * osc;
    let num_tr = adj.mn * osc;
    let num_rl = -(jinv * jinv * adj.det + jinv * (eik * adj.nn + emik * adj.mm) + adj.complement);
    let num_rr = -(jinv * jinv * adj.det + jinv * (eik * adj.mm + emik * adj.nn) + adj.complement);

    let scale = [num_tl, num_tr, num_rl, num_rr]
        .iter()
        .map(|z| z.norm())
        .fold(1.0, f64::max);
    let divergent = den.norm() < DIVERGENCE_THRESHOLD * scale;

    Ok((
        ScatteringCoefficients {
            k,
            t_l: num_tl / den,
            r_l: num_rl / den,
            t_r: num_tr / den,
            r_r: num_rr / den,
            divergent,
        },
        den.norm(),
    ))
}

/// Closed-form scattering coefficients for the port pair (m, n).
pub fn two_port(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    k: Momentum,
) -> Result<ScatteringCoefficients> {
    two_port_with_denominator(net, m, n, k).map(|(c, _)| c)
}

/// Closed-form coefficients over a momentum grid, parallel when the
/// `parallel` feature is on; results are ordered by grid index.
pub fn two_port_grid(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    grid: &[Momentum],
) -> Result<Vec<ScatteringCoefficients>> {
    par::try_map(grid, |&k| two_port(net, m, n, k))
}

/// Strictly sequential version of [`two_port_grid`].
pub fn two_port_grid_seq(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    grid: &[Momentum],
) -> Result<Vec<ScatteringCoefficients>> {
    grid.iter().map(|&k| two_port(net, m, n, k)).collect()
}

/// Steady-state solve for incidence on one lead: returns the reflection
/// amplitude and the outgoing amplitude on every other lead. Independent of
/// the closed form; handles arbitrary couplings g without augmentation.
/// A spectral singularity surfaces as `SingularMatrix`.
pub fn oracle_scatter(
    net: &ScatteringNetwork,
    incident: u32,
    k: Momentum,
) -> Result<(C64, BTreeMap<u32, C64>)> {
    let j = net.j_lead();
    let inc = *net.lead(incident)?;
    if inc.g == 0.0 {
        return Err(Error::Validation(format!(
            "incident lead {incident} is detached (g = 0)"
        )));
    }
    let n_sites = net.n();
    let eik = k.phase();
    let emik = eik.conj();
    let two_j_cos_k = 2.0 * j * k.k().cos();
    let g_tol = 1e-12 * j;

    let mut attached: Vec<_> = net.leads().iter().filter(|l| l.g != 0.0).copied().collect();
    attached.sort_unstable_by_key(|l| l.id);
    let outgoing: Vec<_> = attached.iter().filter(|l| l.id != incident).copied().collect();
    let general: Vec<_> = attached
        .iter()
        .filter(|l| (l.g - j).abs() > g_tol)
        .copied()
        .collect();

    // unknowns: psi_c[0..N), r, t per outgoing lead, first-site amplitude per
    // general-coupling lead
    let idx_r = n_sites;
    let idx_t: BTreeMap<u32, usize> = outgoing
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id, n_sites + 1 + i))
        .collect();
    let idx_first: BTreeMap<u32, usize> = general
        .iter()
        .enumerate()
        .map(|(i, l)| (l.id, n_sites + 1 + outgoing.len() + i))
        .collect();
    let dim = n_sites + 1 + outgoing.len() + general.len();

    let mut a = CMatrix::zeros(dim, dim);
    let mut b = vec![C64::new(0.0, 0.0); dim];
    let mut row = 0;

    // center equations: sum_b H[i][b] psi_b - 2J cos k psi_i + feed_i = 0
    for i in 0..n_sites {
        for l in 0..n_sites {
            a[(row, l)] = net.hc()[(i, l)];
        }
        a[(row, i)] -= two_j_cos_k;
        if let Some(lead) = attached.iter().find(|l| l.site == i) {
            if let Some(&fi) = idx_first.get(&lead.id) {
                a[(row, fi)] += C64::new(lead.g, 0.0);
            } else if lead.id == incident {
                a[(row, idx_r)] += lead.g * eik;
                b[row] -= lead.g * emik;
            } else {
                a[(row, idx_t[&lead.id])] += lead.g * eik;
            }
        }
        row += 1;
    }

    // lead boundary equations
    for lead in &attached {
        if let Some(&fi) = idx_first.get(&lead.id) {
            // absorbed first site: 2J cos k * psi_1 = g psi_c + J * (wave one further out)
            a[(row, fi)] = C64::new(two_j_cos_k, 0.0);
            a[(row, lead.site)] -= C64::new(lead.g, 0.0);
            if lead.id == incident {
                a[(row, idx_r)] -= j * eik;
                b[row] += j * emik;
            } else {
                a[(row, idx_t[&lead.id])] -= j * eik;
            }
            row += 1;
            // continuity at the absorbed site: psi_1 = 1 + r (incident) or t
            a[(row, fi)] = C64::new(1.0, 0.0);
            if lead.id == incident {
                a[(row, idx_r)] = C64::new(-1.0, 0.0);
                b[row] = C64::new(1.0, 0.0);
            } else {
                a[(row, idx_t[&lead.id])] = C64::new(-1.0, 0.0);
            }
            row += 1;
        } else {
            // standard g = J boundary: psi_c = 1 + r (incident) or t
            a[(row, lead.site)] = C64::new(lead.g, 0.0);
            if lead.id == incident {
                a[(row, idx_r)] = C64::new(-j, 0.0);
                b[row] = C64::new(j, 0.0);
            } else {
                a[(row, idx_t[&lead.id])] = C64::new(-j, 0.0);
            }
            row += 1;
        }
    }
    debug_assert_eq!(row, dim);

    let x = numerics::solve(&a, &b)?;
    let mut t = BTreeMap::new();
    for lead in net.leads() {
        if lead.id == incident {
            continue;
        }
        let amp = idx_t
            .get(&lead.id)
            .map_or(C64::new(0.0, 0.0), |&i| x[i]);
        t.insert(lead.id, amp);
    }
    Ok((x[idx_r], t))
}

/// Independent reference for [`two_port`]: two oracle solves, one per
/// incidence direction.
pub fn oracle_two_port(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    k: Momentum,
) -> Result<ScatteringCoefficients> {
    if m == n {
        return Err(Error::SamePort(m));
    }
    let (r_l, t_fwd) = oracle_scatter(net, m, k)?;
    let (r_r, t_bwd) = oracle_scatter(net, n, k)?;
    let t_l = *t_fwd.get(&n).ok_or(Error::UnknownLead(n))?;
    let t_r = *t_bwd.get(&m).ok_or(Error::UnknownLead(m))?;
    Ok(ScatteringCoefficients {
        k,
        t_l,
        r_l,
        t_r,
        r_r,
        divergent: false,
    })
}

/// Assemble the full S-matrix at one momentum. Ports are the lead ids sorted
/// ascending. Reflections are computed through every partner port and must
/// agree within 1e-9; disagreement means a bug or a divergent point.
pub fn s_matrix(net: &ScatteringNetwork, k: Momentum) -> Result<SMatrix> {
    let net = net.augment_general_coupling();
    let ports = net.lead_ids();
    let p = ports.len();
    if p < 2 {
        return Err(Error::Validation(format!(
            "S-matrix needs at least 2 attached leads, got {p}"
        )));
    }
    let index: BTreeMap<u32, usize> = ports.iter().enumerate().map(|(i, &id)| (id, i)).collect();
    let mut s = CMatrix::zeros(p, p);
    let mut reflections: Vec<Vec<C64>> = vec![Vec::new(); p];
    for (i, &pm) in ports.iter().enumerate() {
        for &pn in &ports[i + 1..] {
            let coeffs = two_port(&net, pm, pn, k)?;
            s[(index[&pn], index[&pm])] = coeffs.t_l;
            s[(index[&pm], index[&pn])] = coeffs.t_r;
            reflections[index[&pm]].push(coeffs.r_l);
            reflections[index[&pn]].push(coeffs.r_r);
        }
    }
    for (i, rs) in reflections.iter().enumerate() {
        let scale = rs.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let spread = rs
            .iter()
            .flat_map(|a| rs.iter().map(move |b| (a - b).norm()))
            .fold(0.0, f64::max);
        if spread > 1e-9 * scale {
            return Err(Error::InconsistentReflection {
                lead: ports[i],
                spread,
            });
        }
        s[(i, i)] = rs[0];
    }
    Ok(SMatrix { ports, s })
}

/// Scan a momentum grid for spectral singularities (divergent closed-form
/// denominator). Evaluated in parallel, reported in grid order.
pub fn singularity_scan(
    net: &ScatteringNetwork,
    m: u32,
    n: u32,
    grid: &[Momentum],
) -> Result<Vec<SingularPoint>> {
    let results = par::try_map(grid, |&k| two_port_with_denominator(net, m, n, k))?;
    Ok(results
        .into_iter()
        .filter(|(c, _)| c.divergent)
        .map(|(c, den)| SingularPoint {
            k: c.k,
            denominator: den,
        })
        .collect())
}
