//! Catalog of reference scattering centers, each bundled with the symmetry
//! specs known to hold for it. Parameter defaults sit at the interesting
//! operating points (gamma = J = 1, phi = +-pi/2) so the headline
//! configurations — isolator, circulator, unidirectional transmissionless,
//! dissipative-coupling amplifier — are one call away.

use crate::error::{Error, Result};
use crate::network::{LeadAttachment, ScatteringNetwork};
use crate::numerics::{C64, CMatrix};
use crate::symmetry::{MappingClass, SymmetryKind, SymmetrySpec};
use std::f64::consts::FRAC_PI_2;

/// A named network plus its documented symmetries.
#[derive(Clone, Debug)]
pub struct CatalogEntry {
    pub name: String,
    pub network: ScatteringNetwork,
    pub known_symmetries: Vec<(SymmetrySpec, MappingClass)>,
    pub notes: String,
}

impl CatalogEntry {
    /// The conventional port pair: smallest and largest lead id.
    pub fn default_ports(&self) -> (u32, u32) {
        let ids = self.network.lead_ids();
        (ids[0], *ids.last().unwrap())
    }
}

/// Optional parameter overrides for [`by_name`]. Fields a model does not
/// accept must stay `None`.
#[derive(Clone, Copy, Debug, Default)]
pub struct ModelParams {
    pub phi: Option<f64>,
    pub gamma: Option<f64>,
    pub kappa: Option<f64>,
    pub j: Option<f64>,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

fn phase(x: f64) -> C64 {
    C64::from_polar(1.0, x)
}

fn two_leads(j: f64, n: usize) -> Vec<LeadAttachment> {
    vec![
        LeadAttachment { id: 1, site: 0, g: j },
        LeadAttachment {
            id: if n == 2 { 2 } else { 3 },
            site: n - 1,
            g: j,
        },
    ]
}

/// Exchange matrix with an extra phase on the middle site: the operator of
/// the interchange-type symmetries of the three-resonator centers.
fn flux_exchange_op(phi: f64) -> CMatrix {
    let mut u = CMatrix::zeros(3, 3);
    u[(0, 2)] = c(1., 0.);
    u[(1, 1)] = phase(-phi);
    u[(2, 0)] = c(1., 0.);
    u
}

fn interchange(spec: SymmetrySpec) -> (SymmetrySpec, MappingClass) {
    (spec, MappingClass::Interchange { alpha: 0.0 })
}

fn identity_map(spec: SymmetrySpec, alpha: f64) -> (SymmetrySpec, MappingClass) {
    (spec, MappingClass::Identity { alpha })
}

/// Three coupled resonators with a synthetic flux phi on the 2-3 coupling;
/// leads on sites 1 and 3. On-site terms V set the resonator detuning
/// (real part) and gain/loss (imaginary part).
///
/// Attaches the K-interchange spec when V1 = V3* with real V2, and the
/// C-interchange spec when V1 = V3 with non-real V2.
pub fn three_resonator_flux(v1: C64, v2: C64, v3: C64, phi: f64, j: f64) -> CatalogEntry {
    let hc = CMatrix::from_rows(&[
        vec![v1, c(j, 0.), c(j, 0.)],
        vec![c(j, 0.), v2, j * phase(-phi)],
        vec![c(j, 0.), j * phase(phi), v3],
    ]);
    let network = ScatteringNetwork::new(hc, two_leads(j, 3), j, 0.0)
        .expect("three-resonator construction is well-formed");
    let mut known = Vec::new();
    let tol = 1e-12;
    if (v1 - v3.conj()).norm() <= tol && v2.im.abs() <= tol {
        known.push(interchange(
            SymmetrySpec::new(SymmetryKind::K, 1, flux_exchange_op(phi)).unwrap(),
        ));
    }
    if (v1 - v3).norm() <= tol && v2.im.abs() > tol {
        known.push(interchange(
            SymmetrySpec::new(SymmetryKind::C, 1, flux_exchange_op(phi)).unwrap(),
        ));
    }
    CatalogEntry {
        name: "three_resonator_flux".into(),
        network,
        known_symmetries: known,
        notes: format!("three coupled resonators, flux phi={phi}, V=({v1}, {v2}, {v3})"),
    }
}

/// Three resonators where the 1-2 coupling is a dissipative -i kappa
/// (mediated by a lossy link resonator); leads on sites 1 and 3.
pub fn dissipative_three(kappa: f64, phi: f64, v1: C64, v2: C64, v3: C64, j: f64) -> CatalogEntry {
    let hc = CMatrix::from_rows(&[
        vec![v1, c(0., -kappa), c(j, 0.)],
        vec![c(0., -kappa), v2, j * phase(-phi)],
        vec![c(j, 0.), j * phase(phi), v3],
    ]);
    let network = ScatteringNetwork::new(hc, two_leads(j, 3), j, 0.0)
        .expect("dissipative-coupling construction is well-formed");
    CatalogEntry {
        name: "dissipative_three".into(),
        network,
        known_symmetries: Vec::new(),
        notes: format!(
            "dissipative coupling -i kappa between sites 1 and 2, kappa={kappa}, phi={phi}"
        ),
    }
}

fn entry_2site(
    name: &str,
    hc: CMatrix,
    j: f64,
    known: Vec<(SymmetrySpec, MappingClass)>,
    notes: &str,
) -> CatalogEntry {
    CatalogEntry {
        name: name.into(),
        network: ScatteringNetwork::new(hc, two_leads(j, 2), j, 0.0).unwrap(),
        known_symmetries: known,
        notes: notes.into(),
    }
}

const MODEL_NAMES: &[&str] = &[
    "uniform_two_site",
    "c1_phase",
    "q1_example",
    "qI_gain_loss",
    "asym_two_site",
    "isolator_single_loss",
    "unidirectional",
    "kI_three_resonator",
    "circulator_three_port",
    "dissipative_figS1",
];

pub fn names() -> &'static [&'static str] {
    MODEL_NAMES
}

/// Build a catalog model, applying any parameter overrides. Unknown names
/// and parameters a model does not accept are validation errors.
pub fn by_name(name: &str, params: &ModelParams) -> Result<CatalogEntry> {
    let accept = |phi: bool, gamma: bool, kappa: bool, j: bool| -> Result<()> {
        let checks = [
            (params.phi.is_some() && !phi, "phi"),
            (params.gamma.is_some() && !gamma, "gamma"),
            (params.kappa.is_some() && !kappa, "kappa"),
            (params.j.is_some() && !j, "J"),
        ];
        for (bad, what) in checks {
            if bad {
                return Err(Error::Validation(format!(
                    "model {name} does not take a {what} parameter"
                )));
            }
        }
        Ok(())
    };
    let j = params.j.unwrap_or(1.0);
    if !(j > 0.0) {
        return Err(Error::Validation(format!("J must be positive, got {j}")));
    }
    let gamma = params.gamma.unwrap_or(1.0);
    let kappa = params.kappa.unwrap_or(j);

    let entry = match name {
        "uniform_two_site" => {
            accept(false, false, false, true)?;
            let hc = CMatrix::from_rows(&[vec![c(0., 0.), c(j, 0.)], vec![c(j, 0.), c(0., 0.)]]);
            let q1 = SymmetrySpec::new(SymmetryKind::Q, 1, CMatrix::identity(2)).unwrap();
            let c1 = SymmetrySpec::new(SymmetryKind::C, 1, CMatrix::identity(2)).unwrap();
            entry_2site(
                name,
                hc,
                j,
                vec![identity_map(q1, 0.0), identity_map(c1, 0.0)],
                "two uniformly coupled sites; Hermitian, fully symmetric scattering",
            )
        }
        "c1_phase" => {
            accept(true, false, false, false)?;
            let phi = params.phi.unwrap_or(FRAC_PI_2);
            let hc =
                CMatrix::from_rows(&[vec![c(1., 0.), phase(-phi)], vec![phase(phi), c(0., 1.)]]);
            let op = CMatrix::from_rows(&[
                vec![c(1., 0.), c(0., 0.)],
                vec![c(0., 0.), phase(2.0 * phi)],
            ]);
            let spec = SymmetrySpec::new(SymmetryKind::C, 1, op).unwrap();
            entry_2site(
                name,
                hc,
                1.0,
                vec![identity_map(spec, 2.0 * phi)],
                "phase-coupled two-site center with one lossy site; transmission locked to t_L = e^{2i phi} t_R",
            )
        }
        "q1_example" => {
            accept(false, false, false, false)?;
            let hc = CMatrix::from_rows(&[vec![c(0., 0.), c(-1., 1.)], vec![c(1., 1.), c(1., 0.)]]);
            let sz = CMatrix::from_rows(&[vec![c(1., 0.), c(0., 0.)], vec![c(0., 0.), c(-1., 0.)]]);
            let spec = SymmetrySpec::new(SymmetryKind::Q, 1, sz).unwrap();
            entry_2site(
                name,
                hc,
                1.0,
                vec![identity_map(spec, std::f64::consts::PI)],
                "non-Hermitian center that is pseudo-Hermitian under sigma_z; both moduli symmetric",
            )
        }
        "qI_gain_loss" => {
            accept(true, true, false, true)?;
            let w = params.phi.unwrap_or(0.5);
            let hc = CMatrix::from_rows(&[
                vec![c(0., gamma), c(j * (-w).exp(), 0.)],
                vec![c(j * w.exp(), 0.), c(0., -gamma)],
            ]);
            let sx = CMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
            let spec = SymmetrySpec::new(SymmetryKind::Q, 1, sx).unwrap();
            entry_2site(
                name,
                hc,
                j,
                vec![interchange(spec)],
                "balanced gain/loss with asymmetric coupling magnitudes; Q-interchange protects nothing",
            )
        }
        "asym_two_site" => {
            accept(true, false, false, true)?;
            let w = params.phi.unwrap_or(0.5);
            let hc = CMatrix::from_rows(&[
                vec![c(0., 0.), c(j * (-w).exp(), 0.)],
                vec![c(j * w.exp(), 0.), c(0., 0.)],
            ]);
            let sx = CMatrix::from_rows(&[vec![c(0., 0.), c(1., 0.)], vec![c(1., 0.), c(0., 0.)]]);
            let spec = SymmetrySpec::new(SymmetryKind::C, 1, sx).unwrap();
            entry_2site(
                name,
                hc,
                j,
                vec![interchange(spec)],
                "asymmetric coupling strengths; reflection symmetric, transmission not",
            )
        }
        "isolator_single_loss" => {
            accept(true, true, false, true)?;
            let phi = params.phi.unwrap_or(-FRAC_PI_2);
            let mut e = three_resonator_flux(c(0., 0.), c(0., -gamma), c(0., 0.), phi, j);
            e.name = name.into();
            e.notes = format!(
                "single lossy resonator in the flux loop (gamma={gamma}, phi={phi}); an ideal isolator at gamma=J, phi=-+pi/2, resonant incidence"
            );
            e
        }
        "unidirectional" => {
            accept(true, true, false, true)?;
            let phi = params.phi.unwrap_or(-FRAC_PI_2);
            let mut e = three_resonator_flux(c(0., gamma), c(0., -gamma), c(0., 0.), phi, j);
            e.name = name.into();
            e.notes = format!(
                "balanced gain/loss {{i gamma, -i gamma, 0}} with flux (gamma={gamma}, phi={phi}); no protecting symmetry, transmissionless / absorbing at gamma=J, phi=-+pi/2"
            );
            e
        }
        "kI_three_resonator" => {
            accept(true, true, false, true)?;
            let phi = params.phi.unwrap_or(FRAC_PI_2);
            let mut e = three_resonator_flux(c(0., gamma), c(j, 0.), c(0., -gamma), phi, j);
            e.name = name.into();
            e.notes = format!(
                "V1 = V3* gain/loss with real detuned middle site (gamma={gamma}, phi={phi}); transmission symmetric, reflection not"
            );
            e
        }
        "circulator_three_port" => {
            accept(true, false, false, true)?;
            let phi = params.phi.unwrap_or(FRAC_PI_2);
            let mut e = three_resonator_flux(c(0., 0.), c(0., 0.), c(0., 0.), phi, j);
            e.name = name.into();
            let mut leads = e.network.leads().to_vec();
            leads.push(LeadAttachment { id: 2, site: 1, g: j });
            e.network = ScatteringNetwork::new(e.network.hc().clone(), leads, j, 0.0).unwrap();
            // with the third port attached, the momentum-dependent self-energy
            // breaks every class except the C-interchange one
            e.known_symmetries = vec![interchange(
                SymmetrySpec::new(SymmetryKind::C, 1, flux_exchange_op(phi)).unwrap(),
            )];
            e.notes = format!(
                "lossless flux loop with three ports (phi={phi}); resonant input circulates unidirectionally"
            );
            e
        }
        "dissipative_figS1" => {
            accept(true, false, true, true)?;
            let phi = params.phi.unwrap_or(-FRAC_PI_2);
            let mut e = dissipative_three(kappa, phi, c(0., 0.), c(j, 0.), c(0., 0.), j);
            e.name = name.into();
            e.notes = format!(
                "dissipative coupling kappa={kappa} with detuned middle site V2=J, phi={phi}; one-way amplifying transmission at resonance"
            );
            e
        }
        other => {
            return Err(Error::Validation(format!(
                "unknown model \"{other}\"; known models: {}",
                MODEL_NAMES.join(", ")
            )))
        }
    };
    Ok(entry)
}

/// All catalog entries at their default parameters.
pub fn catalog() -> Vec<CatalogEntry> {
    MODEL_NAMES
        .iter()
        .map(|name| by_name(name, &ModelParams::default()).unwrap())
        .collect()
}
