//! Scattering problem description: cavity geometry, materials, incidence,
//! PML parameters, and the analytic reference field (incident plane wave
//! plus its ground-plane reflection).

use crate::geom::{self, pt, Pt};
use crate::{Cplx, Error, Result};
use serde::{Deserialize, Serialize};

/// Vacuum speed of light in m/s, used to convert `frequency_hz` input.
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Polarization {
    /// Electric field along the invariant axis; Dirichlet walls.
    TM,
    /// Magnetic field along the invariant axis; Neumann walls.
    TE,
}

impl Polarization {
    pub fn as_str(self) -> &'static str {
        match self {
            Polarization::TM => "TM",
            Polarization::TE => "TE",
        }
    }
}

impl std::fmt::Display for Polarization {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A filled region with complex relative permittivity and permeability.
#[derive(Clone, Debug)]
pub struct MaterialRegion {
    pub polygon: Vec<Pt>,
    pub epsilon_rel: Cplx,
    pub mu_rel: Cplx,
}

/// Full problem description. Immutable after construction; cheap to clone.
#[derive(Clone, Debug)]
pub struct Scenario {
    pub polarization: Polarization,
    /// Free-space wavenumber kappa_0 in 1/m.
    pub kappa0: f64,
    /// Incidence angle in (-pi/2, pi/2), measured from the vertical.
    pub theta: f64,
    /// Cavity polygon (ccw, aperture on x2 = 0); empty for flat ground.
    pub cavity: Vec<Pt>,
    /// Perfectly conducting humps excluded from the domain.
    pub protrusions: Vec<Vec<Pt>>,
    pub materials: Vec<MaterialRegion>,
    /// Inner half-disc radius R.
    pub r_inner: f64,
    /// PML outer radius rho > R.
    pub r_outer: f64,
    pub sigma0: f64,
    pub m_pml: u32,
    /// Conforming Lagrange degree (1 or 2).
    pub fem_degree: u32,
    /// Polygon segments per semicircle.
    pub n_arc: usize,
}

/// Benchmark configurations.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Example1Empty,
    Example1Lossy,
    Example2Coated,
    Example3Humps,
    Example4Sweep,
}

impl Preset {
    pub const ALL: [Preset; 5] = [
        Preset::Example1Empty,
        Preset::Example1Lossy,
        Preset::Example2Coated,
        Preset::Example3Humps,
        Preset::Example4Sweep,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Example1Empty => "example1_empty",
            Preset::Example1Lossy => "example1_lossy",
            Preset::Example2Coated => "example2_coated",
            Preset::Example3Humps => "example3_humps",
            Preset::Example4Sweep => "example4_sweep",
        }
    }

    pub fn from_name(name: &str) -> Result<Preset> {
        Preset::ALL
            .into_iter()
            .find(|p| p.name() == name)
            .ok_or_else(|| Error::UnknownPreset(name.to_string()))
    }
}

/// Returns the benchmark configuration for `name`.
pub fn preset(name: Preset) -> Scenario {
    let s = match name {
        Preset::Example1Empty | Preset::Example1Lossy => {
            let lambda = 1.0 / 16.0; // kappa0 = 32 pi
            let half_w = 0.5 * lambda;
            let depth = 0.25 * lambda;
            let cavity = rect(-half_w, half_w, -depth, 0.0);
            let materials = if name == Preset::Example1Lossy {
                vec![MaterialRegion {
                    polygon: cavity.clone(),
                    epsilon_rel: Cplx::new(4.0, 1.0),
                    mu_rel: Cplx::new(1.0, 0.0),
                }]
            } else {
                Vec::new()
            };
            Scenario {
                polarization: Polarization::TM,
                kappa0: 32.0 * std::f64::consts::PI,
                theta: std::f64::consts::FRAC_PI_4,
                cavity,
                protrusions: Vec::new(),
                materials,
                r_inner: 0.5 * lambda,
                r_outer: 1.5 * lambda,
                sigma0: 20.0,
                m_pml: 2,
                fem_degree: 1,
                n_arc: 64,
            }
        }
        Preset::Example2Coated => {
            let lambda = 1.0 / 16.0;
            let half_w = 1.2 * lambda;
            let depth = 1.6 * lambda;
            let t = 0.024 * lambda;
            let cavity = rect(-half_w, half_w, -depth, 0.0);
            let coating = |x0: f64, x1: f64| MaterialRegion {
                polygon: rect(x0, x1, -depth, 0.0),
                epsilon_rel: Cplx::new(12.0, 0.144),
                mu_rel: Cplx::new(1.74, 3.306),
            };
            Scenario {
                polarization: Polarization::TM,
                kappa0: 32.0 * std::f64::consts::PI,
                theta: std::f64::consts::FRAC_PI_4,
                cavity,
                protrusions: Vec::new(),
                materials: vec![coating(-half_w, -half_w + t), coating(half_w - t, half_w)],
                r_inner: 1.5 * lambda,
                r_outer: 4.5 * lambda,
                sigma0: 20.0,
                m_pml: 2,
                fem_degree: 1,
                n_arc: 64,
            }
        }
        Preset::Example3Humps => {
            let lambda = 1.0 / 16.0;
            let half_w = 0.6 * lambda;
            let depth = 0.8 * lambda;
            let hump_w = lambda / 20.0;
            let cavity = rect(-half_w, half_w, -depth, 0.0);
            // two thin PEC humps rising from the cavity floor; the taller
            // one protrudes above the ground plane
            let hump = |xc: f64, height: f64| {
                rect(xc - 0.5 * hump_w, xc + 0.5 * hump_w, -depth, -depth + height)
            };
            Scenario {
                polarization: Polarization::TM,
                kappa0: 32.0 * std::f64::consts::PI,
                theta: std::f64::consts::FRAC_PI_4,
                cavity,
                protrusions: vec![
                    hump(-0.05 * lambda, 16.0 / 15.0 * lambda),
                    hump(0.05 * lambda, 8.0 / 15.0 * lambda),
                ],
                materials: Vec::new(),
                r_inner: 0.75 * lambda,
                r_outer: 2.25 * lambda,
                sigma0: 20.0,
                m_pml: 2,
                fem_degree: 1,
                n_arc: 64,
            }
        }
        Preset::Example4Sweep => {
            let freq = 2.0e9;
            Scenario {
                polarization: Polarization::TE,
                kappa0: 2.0 * std::f64::consts::PI * freq / SPEED_OF_LIGHT,
                theta: 4.0 * std::f64::consts::PI / 9.0,
                cavity: rect(-0.0125, 0.0125, -0.015, 0.0),
                protrusions: Vec::new(),
                materials: Vec::new(),
                r_inner: 0.015,
                r_outer: 0.045,
                sigma0: 20.0,
                m_pml: 2,
                fem_degree: 1,
                n_arc: 64,
            }
        }
    };
    debug_assert!(s.validate().is_ok());
    s
}

/// Flat-ground configuration with no cavity: the exact solution is the
/// reference field and the scattered field vanishes identically.
pub fn manufactured_flat(polarization: Polarization, theta: f64, kappa0: f64) -> Scenario {
    let lambda = 2.0 * std::f64::consts::PI / kappa0;
    Scenario {
        polarization,
        kappa0,
        theta,
        cavity: Vec::new(),
        protrusions: Vec::new(),
        materials: Vec::new(),
        r_inner: 0.5 * lambda,
        r_outer: 1.5 * lambda,
        sigma0: 20.0,
        m_pml: 2,
        fem_degree: 2,
        n_arc: 64,
    }
}

fn rect(x0: f64, x1: f64, y0: f64, y1: f64) -> Vec<Pt> {
    vec![pt(x0, y0), pt(x1, y0), pt(x1, y1), pt(x0, y1)]
}

impl Scenario {
    pub fn wavelength(&self) -> f64 {
        2.0 * std::f64::consts::PI / self.kappa0
    }

    /// Index of the material region containing `p`, if any.
    pub fn material_at(&self, p: Pt) -> Option<usize> {
        self.materials.iter().position(|m| geom::point_in_polygon(&m.polygon, p))
    }

    /// kappa(x) = kappa0 sqrt(eps_rel mu_rel) with the principal root
    /// chosen so that Im kappa >= 0; kappa0 outside all material regions.
    pub fn wavenumber(&self, p: Pt) -> Cplx {
        match self.material_at(p) {
            Some(i) => self.kappa_of_material(i),
            None => Cplx::new(self.kappa0, 0.0),
        }
    }

    pub fn kappa_of_material(&self, i: usize) -> Cplx {
        let m = &self.materials[i];
        let mut root = (m.epsilon_rel * m.mu_rel).sqrt();
        if root.im < 0.0 {
            root = -root;
        }
        self.kappa0 * root
    }

    /// kappa^2 for a material index, or kappa0^2 for `None`.
    pub fn kappa_sq(&self, material: Option<usize>) -> Cplx {
        match material {
            Some(i) => {
                let m = &self.materials[i];
                self.kappa0 * self.kappa0 * m.epsilon_rel * m.mu_rel
            }
            None => Cplx::new(self.kappa0 * self.kappa0, 0.0),
        }
    }

    fn wave_components(&self) -> (f64, f64, f64) {
        let k1 = self.kappa0 * self.theta.sin();
        let k2 = self.kappa0 * self.theta.cos();
        let refl_sign = match self.polarization {
            Polarization::TM => -1.0,
            Polarization::TE => 1.0,
        };
        (k1, k2, refl_sign)
    }

    /// u_ref = e^{i(k1 x - k2 y)} -+ e^{i(k1 x + k2 y)} and its gradient.
    pub fn reference_field(&self, p: Pt) -> (Cplx, [Cplx; 2]) {
        let (k1, k2, s) = self.wave_components();
        let inc = Cplx::new(0.0, k1 * p.x - k2 * p.y).exp();
        let refl = s * Cplx::new(0.0, k1 * p.x + k2 * p.y).exp();
        let value = inc + refl;
        let grad = [
            Cplx::new(0.0, k1) * value,
            Cplx::new(0.0, -k2) * inc + Cplx::new(0.0, k2) * refl,
        ];
        (value, grad)
    }

    /// Second derivatives (u_xx, u_xy, u_yy) of the reference field.
    pub fn reference_hessian(&self, p: Pt) -> [Cplx; 3] {
        let (k1, k2, s) = self.wave_components();
        let inc = Cplx::new(0.0, k1 * p.x - k2 * p.y).exp();
        let refl = s * Cplx::new(0.0, k1 * p.x + k2 * p.y).exp();
        [
            -k1 * k1 * (inc + refl),
            k1 * k2 * (inc - refl),
            -k2 * k2 * (inc + refl),
        ]
    }

    /// Aperture x-interval on the ground line, or `None` for flat ground.
    pub fn aperture_span(&self) -> Option<(f64, f64)> {
        if self.cavity.is_empty() {
            return None;
        }
        let xs: Vec<f64> = self.cavity.iter().filter(|v| v.y == 0.0).map(|v| v.x).collect();
        let lo = xs.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = xs.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        Some((lo, hi))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.r_inner > 0.0) {
            return Err(Error::Invariant("R > 0".into()));
        }
        if !(self.r_outer > self.r_inner) {
            return Err(Error::Invariant("rho > R".into()));
        }
        if !(self.theta > -std::f64::consts::FRAC_PI_2 && self.theta < std::f64::consts::FRAC_PI_2)
        {
            return Err(Error::Invariant("theta in (-pi/2, pi/2)".into()));
        }
        if !(self.sigma0 > 0.0) {
            return Err(Error::Invariant("sigma0 > 0".into()));
        }
        if self.m_pml < 1 {
            return Err(Error::Invariant("m_pml >= 1".into()));
        }
        if !(self.kappa0 > 0.0) {
            return Err(Error::Invariant("kappa0 > 0".into()));
        }
        if !(1..=2).contains(&self.fem_degree) {
            return Err(Error::Invariant("fem_degree in {1, 2}".into()));
        }
        if self.n_arc < 8 {
            return Err(Error::Invariant("n_arc >= 8".into()));
        }
        self.validate_cavity()?;
        for (label, poly) in self
            .protrusions
            .iter()
            .map(|p| ("protrusion", p))
            .chain(self.materials.iter().map(|m| ("material region", &m.polygon)))
        {
            self.validate_enclosed(label, poly)?;
        }
        for (i, m) in self.materials.iter().enumerate() {
            if m.epsilon_rel.im < 0.0 || m.mu_rel.im < 0.0 {
                return Err(Error::Invariant(format!(
                    "material {i}: Im(epsilon_rel) >= 0 and Im(mu_rel) >= 0 (passive media)"
                )));
            }
        }
        // material regions are pairwise disjoint
        for i in 0..self.materials.len() {
            for j in (i + 1)..self.materials.len() {
                if polygons_overlap(&self.materials[i].polygon, &self.materials[j].polygon) {
                    return Err(Error::Invariant(format!(
                        "material regions {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(())
    }

    fn validate_cavity(&self) -> Result<()> {
        if self.cavity.is_empty() {
            return Ok(());
        }
        if self.cavity.len() < 3 {
            return Err(Error::Geometry("cavity polygon needs at least 3 vertices".into()));
        }
        if geom::polygon_self_intersects(&self.cavity) {
            return Err(Error::Geometry("cavity polygon self-intersects".into()));
        }
        let n = self.cavity.len();
        let on_ground: Vec<usize> =
            (0..n).filter(|&i| self.cavity[i].y == 0.0).collect();
        if on_ground.len() < 2 {
            return Err(Error::Geometry(
                "cavity aperture endpoints must lie exactly on x2 = 0".into(),
            ));
        }
        if self.cavity.iter().any(|v| v.y > 0.0) {
            return Err(Error::Geometry("cavity must lie below the ground plane".into()));
        }
        let (lo, hi) = self.aperture_span().unwrap();
        let tol = 1e-12 * self.r_inner;
        if lo < -self.r_inner - tol || hi > self.r_inner + tol {
            return Err(Error::Invariant(
                "aperture must be contained in [-R, R] (choose R large enough)".into(),
            ));
        }
        Ok(())
    }

    /// Checks that a polygon stays inside the half-disc of radius R above
    /// ground and inside the cavity below ground.
    fn validate_enclosed(&self, label: &str, poly: &[Pt]) -> Result<()> {
        if poly.len() < 3 {
            return Err(Error::Geometry(format!("{label} needs at least 3 vertices")));
        }
        if geom::polygon_self_intersects(poly) {
            return Err(Error::Geometry(format!("{label} self-intersects")));
        }
        let tol = 1e-9 * self.r_inner;
        for v in poly {
            if v.y >= 0.0 {
                if v.norm() > self.r_inner + tol {
                    return Err(Error::Invariant(format!(
                        "{label} extends outside the half-disc of radius R (into the PML annulus)"
                    )));
                }
            } else {
                let inside = !self.cavity.is_empty()
                    && (geom::point_in_polygon(&self.cavity, *v)
                        || polygon_boundary_distance(&self.cavity, *v) <= tol);
                if !inside {
                    return Err(Error::Invariant(format!(
                        "{label} vertex ({}, {}) below ground lies outside the cavity",
                        v.x, v.y
                    )));
                }
            }
        }
        Ok(())
    }
}

fn polygon_boundary_distance(poly: &[Pt], p: Pt) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| geom::dist_point_segment(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn polygons_overlap(a: &[Pt], b: &[Pt]) -> bool {
    let na = a.len();
    let nb = b.len();
    for i in 0..na {
        for j in 0..nb {
            if geom::segments_cross_properly(a[i], a[(i + 1) % na], b[j], b[(j + 1) % nb]) {
                return true;
            }
        }
    }
    a.iter().any(|&v| geom::point_in_polygon(b, v)) || b.iter().any(|&v| geom::point_in_polygon(a, v))
}

// ---------------------------------------------------------------------------
// JSON document form
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct MaterialDoc {
    polygon: Vec<[f64; 2]>,
    eps_re: f64,
    eps_im: f64,
    mu_re: f64,
    mu_im: f64,
}

#[derive(Serialize, Deserialize)]
struct ScenarioDoc {
    polarization: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    kappa0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    frequency_hz: Option<f64>,
    theta_rad: f64,
    #[serde(default)]
    cavity_polygon: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    protrusions: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    materials: Vec<MaterialDoc>,
    #[serde(rename = "R")]
    r: f64,
    rho: f64,
    sigma0: f64,
    m_pml: u32,
    fem_degree: u32,
    n_arc: usize,
}

fn to_pts(raw: &[[f64; 2]]) -> Vec<Pt> {
    raw.iter().map(|&[x, y]| pt(x, y)).collect()
}

fn from_pts(poly: &[Pt]) -> Vec<[f64; 2]> {
    poly.iter().map(|v| [v.x, v.y]).collect()
}

/// Parses and validates a scenario JSON document.
pub fn load_scenario(text: &str) -> Result<Scenario> {
    let doc: ScenarioDoc =
        serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let polarization = match doc.polarization.as_str() {
        "TM" => Polarization::TM,
        "TE" => Polarization::TE,
        other => {
            return Err(Error::Parse(format!(
                "polarization must be \"TM\" or \"TE\", got \"{other}\""
            )))
        }
    };
    let kappa0 = match (doc.kappa0, doc.frequency_hz) {
        (Some(k), None) => k,
        (None, Some(f)) => 2.0 * std::f64::consts::PI * f / SPEED_OF_LIGHT,
        (Some(_), Some(_)) => {
            return Err(Error::Parse("give either kappa0 or frequency_hz, not both".into()))
        }
        (None, None) => return Err(Error::Parse("missing field `kappa0` or `frequency_hz`".into())),
    };
    let scenario = Scenario {
        polarization,
        kappa0,
        theta: doc.theta_rad,
        cavity: to_pts(&doc.cavity_polygon),
        protrusions: doc.protrusions.iter().map(|p| to_pts(p)).collect(),
        materials: doc
            .materials
            .iter()
            .map(|m| MaterialRegion {
                polygon: to_pts(&m.polygon),
                epsilon_rel: Cplx::new(m.eps_re, m.eps_im),
                mu_rel: Cplx::new(m.mu_re, m.mu_im),
            })
            .collect(),
        r_inner: doc.r,
        r_outer: doc.rho,
        sigma0: doc.sigma0,
        m_pml: doc.m_pml,
        fem_degree: doc.fem_degree,
        n_arc: doc.n_arc,
    };
    scenario.validate()?;
    Ok(scenario)
}

/// Serializes a scenario back to its JSON document form.
pub fn scenario_to_json(s: &Scenario) -> String {
    let doc = ScenarioDoc {
        polarization: s.polarization.as_str().to_string(),
        kappa0: Some(s.kappa0),
        frequency_hz: None,
        theta_rad: s.theta,
        cavity_polygon: from_pts(&s.cavity),
        protrusions: s.protrusions.iter().map(|p| from_pts(p)).collect(),
        materials: s
            .materials
            .iter()
            .map(|m| MaterialDoc {
                polygon: from_pts(&m.polygon),
                eps_re: m.epsilon_rel.re,
                eps_im: m.epsilon_rel.im,
                mu_re: m.mu_rel.re,
                mu_im: m.mu_rel.im,
            })
            .collect(),
        r: s.r_inner,
        rho: s.r_outer,
        sigma0: s.sigma0,
        m_pml: s.m_pml,
        fem_degree: s.fem_degree,
        n_arc: s.n_arc,
    };
    serde_json::to_string_pretty(&doc).expect("scenario serialization cannot fail")
}
