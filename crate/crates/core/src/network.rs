//! Scattering-network data model: an N-site center matrix coupled to uniform
//! semi-infinite leads, the lead dispersion, the general-coupling
//! normalization, and the multi-port to two-port self-energy reduction.
//!
//! Leads are uniform chains with hopping `J`. A lead attached with coupling
//! `g = J` uses the standard continuity boundary; any other nonzero `g` is
//! normalized away by absorbing the first lead site into the center
//! ([`ScatteringNetwork::augment_general_coupling`]). Momenta live on the
//! branch k in (-pi, 0): with dispersion w = w0 + 2J cos k and time factor
//! e^{-iwt}, e^{iks} is the right-moving wave.

use crate::error::{Error, Result};
use crate::numerics::{C64, CMatrix};
use serde::{Deserialize, Serialize};

/// Lead momentum, restricted to the propagating branch (-pi, 0).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Momentum(f64);

impl Momentum {
    pub fn new(k: f64) -> Result<Self> {
        if !(k > -std::f64::consts::PI && k < 0.0) {
            return Err(Error::OutOfBand(format!(
                "momentum {k} outside the open interval (-pi, 0)"
            )));
        }
        Ok(Self(k))
    }

    /// Resonant incidence, k = -pi/2 (frequency w0).
    pub fn resonant() -> Self {
        Self(-std::f64::consts::FRAC_PI_2)
    }

    pub fn k(self) -> f64 {
        self.0
    }

    pub fn phase(self) -> C64 {
        C64::from_polar(1.0, self.0)
    }
}

/// Uniform grid of momenta on [a, b], both strictly inside (-pi, 0).
pub fn k_grid(a: f64, b: f64, count: usize) -> Result<Vec<Momentum>> {
    if count == 0 {
        return Err(Error::Validation("momentum grid needs at least 1 point".into()));
    }
    if b < a {
        return Err(Error::Validation(format!("empty momentum range {a}..{b}")));
    }
    Momentum::new(a)?;
    Momentum::new(b)?;
    if count == 1 {
        return Ok(vec![Momentum(a)]);
    }
    let step = (b - a) / (count - 1) as f64;
    (0..count).map(|i| Momentum::new(a + step * i as f64)).collect()
}

/// One lead: a stable id, the center site it couples to, and the coupling.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LeadAttachment {
    pub id: u32,
    /// 0-based center-site index (files use 1-based sites).
    pub site: usize,
    pub g: f64,
}

/// An N-site scattering center with its lead attachments.
#[derive(Clone, Debug, PartialEq)]
pub struct ScatteringNetwork {
    hc: CMatrix,
    leads: Vec<LeadAttachment>,
    j_lead: f64,
    omega0: f64,
}

impl ScatteringNetwork {
    pub fn new(
        hc: CMatrix,
        leads: Vec<LeadAttachment>,
        j_lead: f64,
        omega0: f64,
    ) -> Result<Self> {
        if !hc.is_square() {
            return Err(Error::Validation(format!(
                "center matrix must be square, got {}x{}",
                hc.rows(),
                hc.cols()
            )));
        }
        if !(j_lead > 0.0) || !j_lead.is_finite() {
            return Err(Error::Validation(format!("lead hopping J must be positive, got {j_lead}")));
        }
        if !omega0.is_finite() {
            return Err(Error::Validation("omega0 must be finite".into()));
        }
        let n = hc.rows();
        for (idx, lead) in leads.iter().enumerate() {
            if lead.site >= n {
                return Err(Error::Validation(format!(
                    "lead {} attaches to site {} outside the {}-site center",
                    lead.id,
                    lead.site + 1,
                    n
                )));
            }
            if !lead.g.is_finite() {
                return Err(Error::Validation(format!("lead {} coupling must be finite", lead.id)));
            }
            for other in &leads[..idx] {
                if other.id == lead.id {
                    return Err(Error::Validation(format!("duplicate lead id {}", lead.id)));
                }
                if other.site == lead.site {
                    return Err(Error::Validation(format!(
                        "leads {} and {} attach to the same site {}",
                        other.id,
                        lead.id,
                        lead.site + 1
                    )));
                }
            }
        }
        Ok(Self {
            hc,
            leads,
            j_lead,
            omega0,
        })
    }

    pub fn n(&self) -> usize {
        self.hc.rows()
    }

    pub fn hc(&self) -> &CMatrix {
        &self.hc
    }

    pub fn leads(&self) -> &[LeadAttachment] {
        &self.leads
    }

    pub fn j_lead(&self) -> f64 {
        self.j_lead
    }

    pub fn omega0(&self) -> f64 {
        self.omega0
    }

    pub fn lead(&self, id: u32) -> Result<&LeadAttachment> {
        self.leads
            .iter()
            .find(|l| l.id == id)
            .ok_or(Error::UnknownLead(id))
    }

    /// Lead ids sorted ascending.
    pub fn lead_ids(&self) -> Vec<u32> {
        let mut ids: Vec<u32> = self.leads.iter().map(|l| l.id).collect();
        ids.sort_unstable();
        ids
    }

    /// All couplings already in {0, J}?
    pub fn is_normalized(&self) -> bool {
        self.leads
            .iter()
            .all(|l| l.g == 0.0 || (l.g - self.j_lead).abs() <= 1e-12 * self.j_lead)
    }

    /// Lead dispersion w = w0 + 2J cos k.
    pub fn dispersion(&self, k: Momentum) -> f64 {
        self.omega0 + 2.0 * self.j_lead * k.k().cos()
    }

    /// Inverse dispersion on the branch (-pi, 0); errors outside the open band.
    pub fn momentum_for_frequency(&self, omega: f64) -> Result<Momentum> {
        let detuning = (omega - self.omega0) / (2.0 * self.j_lead);
        if detuning.abs() >= 1.0 {
            return Err(Error::OutOfBand(format!(
                "frequency {omega} outside the open band ({}, {})",
                self.omega0 - 2.0 * self.j_lead,
                self.omega0 + 2.0 * self.j_lead
            )));
        }
        Momentum::new(-detuning.acos())
    }

    /// Normalize all couplings to {0, J}: attachments with g = 0 are dropped;
    /// a nonstandard g absorbs the first lead site into the center (new
    /// diagonal entry 0, coupling g to the old site) and re-attaches the lead
    /// there with g = J. Standard attachments pass through unchanged.
    pub fn augment_general_coupling(&self) -> ScatteringNetwork {
        let tol = 1e-12 * self.j_lead;
        let general: Vec<&LeadAttachment> = self
            .leads
            .iter()
            .filter(|l| l.g != 0.0 && (l.g - self.j_lead).abs() > tol)
            .collect();
        if general.is_empty() && self.leads.iter().all(|l| l.g != 0.0) {
            return self.clone();
        }
        let n = self.n();
        let n_new = n + general.len();
        let mut hc = CMatrix::zeros(n_new, n_new);
        for i in 0..n {
            for j in 0..n {
                hc[(i, j)] = self.hc[(i, j)];
            }
        }
        let mut leads = Vec::with_capacity(self.leads.len());
        let mut next_site = n;
        for lead in &self.leads {
            if lead.g == 0.0 {
                continue;
            }
            if (lead.g - self.j_lead).abs() <= tol {
                leads.push(*lead);
            } else {
                hc[(lead.site, next_site)] = C64::new(lead.g, 0.0);
                hc[(next_site, lead.site)] = C64::new(lead.g, 0.0);
                leads.push(LeadAttachment {
                    id: lead.id,
                    site: next_site,
                    g: self.j_lead,
                });
                next_site += 1;
            }
        }
        ScatteringNetwork {
            hc,
            leads,
            j_lead: self.j_lead,
            omega0: self.omega0,
        }
    }

    /// Effective two-port center for the pair (m, n): every other lead j
    /// collapses into the self-energy g_j^2 J^-1 e^{ik} on its own site.
    /// Requires a normalized network with both ports attached at g = J.
    pub fn effective_two_port(&self, m: u32, n: u32, k: Momentum) -> Result<CMatrix> {
        if m == n {
            return Err(Error::SamePort(m));
        }
        let lead_m = self.lead(m)?;
        let lead_n = self.lead(n)?;
        for lead in [lead_m, lead_n] {
            if (lead.g - self.j_lead).abs() > 1e-12 * self.j_lead {
                return Err(Error::Validation(format!(
                    "port lead {} has coupling {} != J; normalize with augment_general_coupling first",
                    lead.id, lead.g
                )));
            }
        }
        let mut hc = self.hc.clone();
        let phase = k.phase() / self.j_lead;
        for lead in &self.leads {
            if lead.id == m || lead.id == n || lead.g == 0.0 {
                continue;
            }
            hc[(lead.site, lead.site)] += lead.g * lead.g * phase;
        }
        Ok(hc)
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct NetworkFile {
    n: usize,
    omega0: f64,
    #[serde(rename = "J")]
    j: f64,
    hc: Vec<Vec<[f64; 2]>>,
    leads: Vec<LeadFile>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LeadFile {
    id: u32,
    /// 1-based in files.
    site: usize,
    g: f64,
}

/// Parse the JSON network document. Unknown keys are rejected; structural
/// problems come back as `Parse`, semantic ones as `Validation`.
pub fn parse_network(text: &str) -> Result<ScatteringNetwork> {
    let file: NetworkFile = serde_json::from_str(text)
        .map_err(|e| Error::Parse(format!("line {}, column {}: {}", e.line(), e.column(), e)))?;
    if file.hc.len() != file.n || file.hc.iter().any(|row| row.len() != file.n) {
        return Err(Error::Validation(format!(
            "hc must be {n}x{n} to match \"n\": {n}",
            n = file.n
        )));
    }
    let data: Vec<C64> = file
        .hc
        .iter()
        .flatten()
        .map(|&[re, im]| C64::new(re, im))
        .collect();
    let hc = CMatrix::new(file.n, file.n, data)?;
    let leads = file
        .leads
        .iter()
        .map(|l| {
            if l.site == 0 {
                return Err(Error::Validation(format!(
                    "lead {}: file sites are 1-based, got 0",
                    l.id
                )));
            }
            Ok(LeadAttachment {
                id: l.id,
                site: l.site - 1,
                g: l.g,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScatteringNetwork::new(hc, leads, file.j, file.omega0)
}

/// Serialize to the JSON network document (1-based sites, [re, im] pairs).
/// `parse_network(serialize_network(net))` reproduces `net` bit-exactly.
pub fn serialize_network(net: &ScatteringNetwork) -> String {
    let file = NetworkFile {
        n: net.n(),
        omega0: net.omega0(),
        j: net.j_lead(),
        hc: (0..net.n())
            .map(|i| {
                (0..net.n())
                    .map(|j| {
                        let z = net.hc()[(i, j)];
                        [z.re, z.im]
                    })
                    .collect()
            })
            .collect(),
        leads: net
            .leads()
            .iter()
            .map(|l| LeadFile {
                id: l.id,
                site: l.site + 1,
                g: l.g,
            })
            .collect(),
    };
    serde_json::to_string_pretty(&file).expect("network serialization cannot fail")
}
