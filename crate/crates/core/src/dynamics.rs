//! Time-domain coupled-mode simulation: Gaussian wave packets launched down
//! finite leads, integrated with fixed-step RK4, and measured after the
//! packet clears the center. Cross-checks the steady-state coefficients:
//! the lead-summed intensities converge to |t|^2 and |r|^2 as the packet
//! width grows.
//!
//! Leads are truncated to `lead_len` sites with hard walls; measurements
//! happen while every outgoing packet is still far from the walls, so the
//! truncation never contaminates them.

use crate::error::{Error, Result};
use crate::network::{Momentum, ScatteringNetwork};
use crate::numerics::{C64, CMatrix};
use crate::scattering;
use std::collections::BTreeMap;
use std::io::Write;

/// Residual center intensity (relative to unit input) below which the packet
/// counts as having cleared the scattering region.
pub const CLEARED_THRESHOLD: f64 = 1e-4;
/// Amplitude magnitude treated as runaway gain.
pub const INSTABILITY_LIMIT: f64 = 1e12;

/// Site-index map for the full finite lattice: center sites first, then each
/// attached lead (sorted by id) as a block of `lead_len` sites ordered by
/// distance from the center.
#[derive(Clone, Debug)]
pub struct SiteLayout {
    n_center: usize,
    lead_len: usize,
    leads: Vec<LayoutLead>,
}

#[derive(Clone, Debug)]
struct LayoutLead {
    id: u32,
    site: usize,
    g: f64,
    base: usize,
}

impl SiteLayout {
    /// Layout for all attached (g != 0) leads of the network.
    pub fn new(net: &ScatteringNetwork, lead_len: usize) -> Self {
        let n_center = net.n();
        let mut attached: Vec<_> = net.leads().iter().filter(|l| l.g != 0.0).collect();
        attached.sort_unstable_by_key(|l| l.id);
        let leads = attached
            .iter()
            .enumerate()
            .map(|(i, l)| LayoutLead {
                id: l.id,
                site: l.site,
                g: l.g,
                base: n_center + i * lead_len,
            })
            .collect();
        Self {
            n_center,
            lead_len,
            leads,
        }
    }

    pub fn total_sites(&self) -> usize {
        self.n_center + self.leads.len() * self.lead_len
    }

    pub fn n_center(&self) -> usize {
        self.n_center
    }

    pub fn lead_len(&self) -> usize {
        self.lead_len
    }

    pub fn lead_ids(&self) -> Vec<u32> {
        self.leads.iter().map(|l| l.id).collect()
    }

    /// Vector index of a lead site at 1-based distance `offset` from the
    /// center.
    pub fn lead_index(&self, lead_id: u32, offset: usize) -> Result<usize> {
        let lead = self
            .leads
            .iter()
            .find(|l| l.id == lead_id)
            .ok_or(Error::UnknownLead(lead_id))?;
        if offset == 0 || offset > self.lead_len {
            return Err(Error::Validation(format!(
                "lead offset {offset} outside 1..={}",
                self.lead_len
            )));
        }
        Ok(lead.base + offset - 1)
    }

    /// Human-readable site label: `c<i>` for center sites (1-based),
    /// `l<id>:<offset>` for lead sites.
    pub fn label(&self, index: usize) -> String {
        if index < self.n_center {
            return format!("c{}", index + 1);
        }
        for lead in &self.leads {
            if index >= lead.base && index < lead.base + self.lead_len {
                return format!("l{}:{}", lead.id, index - lead.base + 1);
            }
        }
        format!("?{index}")
    }
}

/// Amplitudes over the finite lattice at time `t` (units of 1/J).
#[derive(Clone, Debug)]
pub struct LatticeState {
    pub amplitudes: Vec<C64>,
    pub layout: SiteLayout,
    pub t: f64,
}

/// A Gaussian packet on one lead: carrier momentum `k0`, center `s0` sites
/// from the attachment, width `sigma` sites.
#[derive(Clone, Copy, Debug)]
pub struct PacketSpec {
    pub lead: u32,
    pub k0: Momentum,
    pub s0: f64,
    pub sigma: f64,
}

/// Full single-particle matrix of the truncated system: the center block
/// (omega0 on every diagonal plus H_c), uniform J hopping along each lead,
/// coupling g between each attachment site and its first lead site, hard
/// walls at the far ends.
pub fn build_full_hamiltonian(net: &ScatteringNetwork, lead_len: usize) -> CMatrix {
    let layout = SiteLayout::new(net, lead_len);
    let total = layout.total_sites();
    let n = net.n();
    let j = C64::new(net.j_lead(), 0.0);
    let mut h = CMatrix::zeros(total, total);
    for i in 0..total {
        h[(i, i)] = C64::new(net.omega0(), 0.0);
    }
    for i in 0..n {
        for l in 0..n {
            h[(i, l)] += net.hc()[(i, l)];
        }
    }
    for lead in &layout.leads {
        let g = C64::new(lead.g, 0.0);
        h[(lead.site, lead.base)] += g;
        h[(lead.base, lead.site)] += g;
        for u in 0..lead_len - 1 {
            h[(lead.base + u, lead.base + u + 1)] += j;
            h[(lead.base + u + 1, lead.base + u)] += j;
        }
    }
    h
}

/// Normalized Gaussian packet moving toward the center. Requires a 4 sigma
/// margin on both sides: 1 <= s0 - 4 sigma and s0 + 4 sigma <= lead_len.
pub fn init_packet(layout: &SiteLayout, spec: &PacketSpec) -> Result<LatticeState> {
    if spec.sigma < 5.0 {
        return Err(Error::PacketDoesNotFit(format!(
            "sigma must be at least 5 sites, got {}",
            spec.sigma
        )));
    }
    let lead_len = layout.lead_len() as f64;
    if spec.s0 - 4.0 * spec.sigma < 1.0 || spec.s0 + 4.0 * spec.sigma > lead_len {
        return Err(Error::PacketDoesNotFit(format!(
            "packet needs 1 <= s0 - 4 sigma and s0 + 4 sigma <= L; got s0={}, sigma={}, L={}",
            spec.s0, spec.sigma, lead_len
        )));
    }
    let mut amplitudes = vec![C64::new(0.0, 0.0); layout.total_sites()];
    // on a lead measured by distance u from the center, the incoming branch
    // of the dispersion carries e^{-i k0 u}
    for offset in 1..=layout.lead_len() {
        let u = offset as f64;
        let envelope = (-((u - spec.s0).powi(2)) / (2.0 * spec.sigma * spec.sigma)).exp();
        let idx = layout.lead_index(spec.lead, offset)?;
        amplitudes[idx] = envelope * C64::from_polar(1.0, -spec.k0.k() * u);
    }
    let norm = amplitudes.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::PacketDoesNotFit("packet has zero support".into()));
    }
    for z in &mut amplitudes {
        *z /= norm;
    }
    Ok(LatticeState {
        amplitudes,
        layout: layout.clone(),
        t: 0.0,
    })
}

/// Neighbor-list form of the (sparse) full Hamiltonian for fast repeated
/// application.
struct SparseH {
    rows: Vec<Vec<(usize, C64)>>,
}

impl SparseH {
    fn new(h: &CMatrix) -> Self {
        let n = h.rows();
        let rows = (0..n)
            .map(|i| {
                (0..n)
                    .filter_map(|j| {
                        let z = h[(i, j)];
                        (z != C64::new(0.0, 0.0)).then_some((j, z))
                    })
                    .collect()
            })
            .collect();
        Self { rows }
    }

    /// dst = -i H src
    fn rhs(&self, src: &[C64], dst: &mut [C64]) {
        let minus_i = C64::new(0.0, -1.0);
        for (i, row) in self.rows.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for &(j, z) in row {
                acc += z * src[j];
            }
            dst[i] = minus_i * acc;
        }
    }
}

/// Integrate i dpsi/dt = H psi with classical fixed-step RK4 from the state's
/// time to `t_end`. Stops with `Instability` if any amplitude magnitude
/// exceeds 1e12 (runaway gain).
pub fn evolve(state: &LatticeState, h_full: &CMatrix, dt: f64, t_end: f64) -> Result<LatticeState> {
    if !(dt > 0.0) {
        return Err(Error::Validation(format!("dt must be positive, got {dt}")));
    }
    if h_full.rows() != state.amplitudes.len() {
        return Err(Error::DimensionMismatch(format!(
            "state has {} sites, Hamiltonian is {}x{}",
            state.amplitudes.len(),
            h_full.rows(),
            h_full.cols()
        )));
    }
    let steps = (((t_end - state.t) / dt).round().max(0.0)) as u64;
    let sparse = SparseH::new(h_full);
    let n = state.amplitudes.len();
    let mut psi = state.amplitudes.clone();
    let mut k1 = vec![C64::new(0.0, 0.0); n];
    let mut k2 = k1.clone();
    let mut k3 = k1.clone();
    let mut k4 = k1.clone();
    let mut tmp = k1.clone();
    for _ in 0..steps {
        sparse.rhs(&psi, &mut k1);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dt * k1[i];
        }
        sparse.rhs(&tmp, &mut k2);
        for i in 0..n {
            tmp[i] = psi[i] + 0.5 * dt * k2[i];
        }
        sparse.rhs(&tmp, &mut k3);
        for i in 0..n {
            tmp[i] = psi[i] + dt * k3[i];
        }
        sparse.rhs(&tmp, &mut k4);
        let mut max_abs = 0.0f64;
        for i in 0..n {
            psi[i] += dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            max_abs = max_abs.max(psi[i].norm());
        }
        if max_abs > INSTABILITY_LIMIT {
            return Err(Error::Instability(max_abs));
        }
    }
    Ok(LatticeState {
        amplitudes: psi,
        layout: state.layout.clone(),
        t: state.t + steps as f64 * dt,
    })
}

/// Lead-summed intensities relative to unit input.
#[derive(Clone, Debug)]
pub struct Intensities {
    /// Total intensity on the incident lead.
    pub reflected: f64,
    /// Total intensity per non-incident lead.
    pub transmitted: BTreeMap<u32, f64>,
    pub center: f64,
    pub total: f64,
}

/// Sum intensities per lead. Errors with `PacketNotCleared` while the center
/// still holds more than 1e-4 of the (unit) input intensity.
pub fn measure_intensities(state: &LatticeState, incident: u32) -> Result<Intensities> {
    let layout = &state.layout;
    let center: f64 = state.amplitudes[..layout.n_center()]
        .iter()
        .map(|z| z.norm_sqr())
        .sum();
    if center >= CLEARED_THRESHOLD {
        return Err(Error::PacketNotCleared(center));
    }
    if !layout.lead_ids().contains(&incident) {
        return Err(Error::UnknownLead(incident));
    }
    let mut reflected = 0.0;
    let mut transmitted = BTreeMap::new();
    for lead in &layout.leads {
        let sum: f64 = state.amplitudes[lead.base..lead.base + layout.lead_len()]
            .iter()
            .map(|z| z.norm_sqr())
            .sum();
        if lead.id == incident {
            reflected = sum;
        } else {
            transmitted.insert(lead.id, sum);
        }
    }
    let total: f64 = state.amplitudes.iter().map(|z| z.norm_sqr()).sum();
    Ok(Intensities {
        reflected,
        transmitted,
        center,
        total,
    })
}

/// Simulation controls; packet shape lives in [`PacketSpec`].
#[derive(Clone, Copy, Debug)]
pub struct SimulationParams {
    /// Truncated lead length (sites).
    pub lead_len: usize,
    /// RK4 step, units of 1/J. Stability needs dt <= 0.05/J.
    pub dt: f64,
}

impl Default for SimulationParams {
    fn default() -> Self {
        Self {
            lead_len: 400,
            dt: 0.01,
        }
    }
}

impl Default for PacketSpec {
    fn default() -> Self {
        Self {
            lead: 1,
            k0: Momentum::resonant(),
            s0: 100.0,
            sigma: 20.0,
        }
    }
}

/// Launch a packet, evolve until the center has emptied, and measure.
/// `observer` sees the state after every integration chunk (for snapshot
/// export). Returns the intensities and the measurement time.
pub fn run_packet_simulation(
    net: &ScatteringNetwork,
    packet: &PacketSpec,
    params: &SimulationParams,
    mut observer: impl FnMut(&LatticeState),
) -> Result<(Intensities, f64)> {
    let j = net.j_lead();
    if params.dt > 0.05 / j {
        return Err(Error::Validation(format!(
            "dt = {} exceeds the RK4 stability bound 0.05/J = {}",
            params.dt,
            0.05 / j
        )));
    }
    let layout = SiteLayout::new(net, params.lead_len);
    let h_full = build_full_hamiltonian(net, params.lead_len);
    let mut state = init_packet(&layout, packet)?;
    observer(&state);

    let v_g = 2.0 * j * packet.k0.k().sin().abs();
    let t_reach = (packet.s0 + 3.0 * packet.sigma) / v_g;
    let t_max = (2.0 * params.lead_len as f64 - packet.s0 - 4.0 * packet.sigma) / v_g;
    let chunk = 5.0 / j;

    state = evolve(&state, &h_full, params.dt, t_reach)?;
    observer(&state);
    loop {
        match measure_intensities(&state, packet.lead) {
            Ok(intensities) => return Ok((intensities, state.t)),
            Err(Error::PacketNotCleared(residual)) => {
                if state.t + chunk > t_max {
                    return Err(Error::PacketNotCleared(residual));
                }
                state = evolve(&state, &h_full, params.dt, state.t + chunk)?;
                observer(&state);
            }
            Err(e) => return Err(e),
        }
    }
}

/// One measured quantity versus its steady-state target.
#[derive(Clone, Debug)]
pub struct ComparisonRow {
    pub quantity: String,
    pub measured: f64,
    pub target: f64,
    /// Relative deviation, or absolute when the target is near zero.
    pub deviation: f64,
    pub pass: bool,
}

#[derive(Clone, Debug)]
pub struct SteadyStateComparison {
    pub rows: Vec<ComparisonRow>,
    pub pass: bool,
    /// Set when sigma < 20: the 5% agreement is only guaranteed for wide
    /// packets, so a failure is informational rather than an error.
    pub informational: bool,
    pub t_end: f64,
}

fn comparison_row(quantity: String, measured: f64, target: f64) -> ComparisonRow {
    // a relative 5% bound is meaningless against a ~zero target; use an
    // absolute leakage bound there
    let (deviation, pass) = if target < 0.05 {
        let dev = (measured - target).abs();
        (dev, dev <= 0.01)
    } else {
        let dev = (measured - target).abs() / target;
        (dev, dev <= 0.05)
    };
    ComparisonRow {
        quantity,
        measured,
        target,
        deviation,
        pass,
    }
}

/// Run the packet pipeline and compare lead intensities against the
/// steady-state |t|^2 and |r|^2 at the carrier momentum. Passes at 5%
/// relative deviation (1e-2 absolute for near-zero targets) for sigma >= 20.
pub fn compare_with_steady_state(
    net: &ScatteringNetwork,
    packet: &PacketSpec,
    params: &SimulationParams,
) -> Result<SteadyStateComparison> {
    let (r_target, t_targets) = scattering::oracle_scatter(net, packet.lead, packet.k0)?;
    let (measured, t_end) = run_packet_simulation(net, packet, params, |_| {})?;
    let mut rows = vec![comparison_row(
        format!("reflected(lead {})", packet.lead),
        measured.reflected,
        r_target.norm_sqr(),
    )];
    for (lead, amp) in &t_targets {
        let m = measured.transmitted.get(lead).copied().unwrap_or(0.0);
        rows.push(comparison_row(
            format!("transmitted(lead {lead})"),
            m,
            amp.norm_sqr(),
        ));
    }
    let informational = packet.sigma < 20.0;
    let pass = rows.iter().all(|r| r.pass);
    Ok(SteadyStateComparison {
        rows,
        pass,
        informational,
        t_end,
    })
}

/// Write the state as CSV rows `time,site_label,re,im,intensity`.
pub fn write_snapshot_csv<W: Write>(w: &mut W, state: &LatticeState) -> std::io::Result<()> {
    for (i, z) in state.amplitudes.iter().enumerate() {
        writeln!(
            w,
            "{},{},{},{},{}",
            state.t,
            state.layout.label(i),
            z.re,
            z.im,
            z.norm_sqr()
        )?;
    }
    Ok(())
}
