//! Trace Fourier analysis on the inner semicircle: modal coefficients,
//! H^s trace norms, DtN modal multipliers, and the PML propagation bound.
//!
//! TM traces vanish at the ground and expand in sin(n phi), n >= 1; TE
//! traces expand in cos(n phi), n >= 0 with the n = 0 coefficient
//! normalized by 1/pi.

use crate::geom::{pt, Pt};
use crate::pml::PmlMap;
use crate::scenario::Polarization;
use crate::specfun;
use crate::{Cplx, Result};

/// Modal trace coefficients on Gamma_R^+.
#[derive(Clone, Debug)]
pub struct TraceCoefficients {
    pub polarization: Polarization,
    pub radius: f64,
    /// TM: entry k holds a_{k+1} (n = 1..=N); TE: entry k holds b_k
    /// (n = 0..=N).
    pub coeffs: Vec<Cplx>,
}

impl TraceCoefficients {
    /// Mode order of entry k.
    pub fn order(&self, k: usize) -> usize {
        match self.polarization {
            Polarization::TM => k + 1,
            Polarization::TE => k,
        }
    }

    /// ( sum (1 + n^2)^s |c_n|^2 )^{1/2}.
    pub fn trace_norm(&self, s: f64) -> f64 {
        self.coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| (1.0 + (self.order(k) as f64).powi(2)).powf(s) * c.norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// Evaluates the modal expansion at angle phi.
    pub fn reconstruct(&self, phi: f64) -> Cplx {
        let mut acc = Cplx::new(0.0, 0.0);
        for (k, c) in self.coeffs.iter().enumerate() {
            let n = self.order(k) as f64;
            let basis = match self.polarization {
                Polarization::TM => (n * phi).sin(),
                Polarization::TE => (n * phi).cos(),
            };
            acc += c * basis;
        }
        acc
    }
}

/// Default mode count: all propagating orders plus an evanescent buffer.
pub fn default_n_modes(kappa0: f64, radius: f64) -> usize {
    (2.0 * kappa0 * radius).ceil() as usize + 16
}

/// Default angular sample count for a given mode count. The composite
/// trapezoid rule sees the polyline kinks, so the density is 16 samples
/// per mode to keep the benchmark coefficients accurate to 1e-8.
pub fn default_m_samples(n_modes: usize) -> usize {
    16 * n_modes
}

/// Radius of the `n_arc`-segment polyline at angle phi, slightly snapped
/// inward so sampled points stay inside meshes bounded by the polyline.
pub fn polyline_radius(radius: f64, n_arc: usize, phi: f64) -> f64 {
    let delta = std::f64::consts::PI / n_arc as f64;
    let k = ((phi / delta) as usize).min(n_arc - 1);
    let mid = (k as f64 + 0.5) * delta;
    let chord = radius * (0.5 * delta).cos() / (phi - mid).cos();
    chord * (1.0 - 1e-10)
}

/// Modal coefficients of a trace sampled at `m_samples + 1` uniform
/// angles by composite trapezoid quadrature. The sampler receives the
/// sample point on the inward-snapped polyline and its angle.
pub fn trace_coeffs<F>(
    sample: F,
    polarization: Polarization,
    radius: f64,
    n_arc: usize,
    n_modes: usize,
    m_samples: usize,
) -> Result<TraceCoefficients>
where
    F: Fn(Pt, f64) -> Result<Cplx>,
{
    assert!(m_samples >= 4 * n_modes, "m_samples must be at least 4 n_modes");
    let h = std::f64::consts::PI / m_samples as f64;
    let mut values = Vec::with_capacity(m_samples + 1);
    for j in 0..=m_samples {
        let phi = j as f64 * h;
        let r = polyline_radius(radius, n_arc, phi);
        let p = pt(r * phi.cos(), r * phi.sin());
        let weight = if j == 0 || j == m_samples { 0.5 * h } else { h };
        values.push((phi, weight, sample(p, phi)?));
    }
    let two_over_pi = std::f64::consts::FRAC_2_PI;
    let coeffs = match polarization {
        Polarization::TM => (1..=n_modes)
            .map(|n| {
                let mut acc = Cplx::new(0.0, 0.0);
                for &(phi, w, u) in &values {
                    acc += u * ((n as f64 * phi).sin() * w);
                }
                acc * two_over_pi
            })
            .collect(),
        Polarization::TE => (0..=n_modes)
            .map(|n| {
                let mut acc = Cplx::new(0.0, 0.0);
                for &(phi, w, u) in &values {
                    acc += u * ((n as f64 * phi).cos() * w);
                }
                acc * if n == 0 { 0.5 * two_over_pi } else { two_over_pi }
            })
            .collect(),
    };
    Ok(TraceCoefficients { polarization, radius, coeffs })
}

/// DtN modal multipliers z_n = kappa0 H_n^(1)'(kappa0 R)/H_n^(1)(kappa0 R)
/// for n = 1..=N (TM) or n = 0..=N (TE).
pub fn dtn_multipliers(
    kappa0: f64,
    radius: f64,
    n_modes: usize,
    polarization: Polarization,
) -> Result<Vec<Cplx>> {
    let z = Cplx::new(kappa0 * radius, 0.0);
    let ratios = specfun::hankel1_log_derivative_ratios(z, n_modes as u32)?;
    let start = match polarization {
        Polarization::TM => 1,
        Polarization::TE => 0,
    };
    Ok(ratios[start..=n_modes].iter().map(|r| kappa0 * r).collect())
}

/// L^2(Gamma_R^+) pairing weight of mode n: R pi for the TE constant
/// mode, R pi / 2 otherwise.
pub fn mode_weight(radius: f64, order: usize) -> f64 {
    if order == 0 {
        radius * std::f64::consts::PI
    } else {
        radius * std::f64::consts::FRAC_PI_2
    }
}

/// The exponential factor bounding the propagation operator from
/// Gamma_R^+ to Gamma_rho^+.
pub fn propagation_bound(map: &PmlMap, kappa0: f64) -> f64 {
    map.propagation_factor(kappa0)
}
