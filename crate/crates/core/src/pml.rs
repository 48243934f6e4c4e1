//! Complex radial coordinate stretching for the perfectly matched layer:
//! the profile functions sigma and sigma_hat, the stretching factors
//! alpha = 1 + i sigma and beta = 1 + i sigma_hat, the anisotropic matrix
//! A(r, phi) with its analytic spatial derivatives, the estimator weight
//! w(x), the strong-form source in the layer, and the truncation
//! indicator eps_PML.

use crate::geom::Pt;
use crate::scenario::{Polarization, Scenario};
use crate::Cplx;

/// Complex 2x2 matrix in row-major order.
pub type Mat2c = [[Cplx; 2]; 2];

/// Radial stretching parameters. `sigma(r) = sigma0 ((r-R)/(rho-R))^m`
/// for r >= R and zero below.
#[derive(Clone, Copy, Debug)]
pub struct PmlMap {
    pub r_inner: f64,
    pub r_outer: f64,
    pub sigma0: f64,
    pub m_pml: u32,
}

/// Profile values at one radius.
#[derive(Clone, Copy, Debug)]
pub struct PmlProfile {
    pub sigma: f64,
    pub sigma_hat: f64,
    pub alpha: Cplx,
    pub beta: Cplx,
}

impl PmlMap {
    pub fn from_scenario(s: &Scenario) -> Self {
        PmlMap {
            r_inner: s.r_inner,
            r_outer: s.r_outer,
            sigma0: s.sigma0,
            m_pml: s.m_pml,
        }
    }

    /// sigma, sigma_hat (closed-form integral), alpha, beta at radius r.
    pub fn profile(&self, r: f64) -> PmlProfile {
        let (sigma, sigma_hat) = if r <= self.r_inner {
            (0.0, 0.0)
        } else {
            let d = self.r_outer - self.r_inner;
            let s = (r - self.r_inner) / d;
            let sigma = self.sigma0 * s.powi(self.m_pml as i32);
            // sigma_hat = (1/r) int_R^r sigma = sigma0 (r-R)^{m+1} / ((m+1) r d^m)
            let sigma_hat = sigma * (r - self.r_inner) / ((self.m_pml as f64 + 1.0) * r);
            (sigma, sigma_hat)
        };
        PmlProfile {
            sigma,
            sigma_hat,
            alpha: Cplx::new(1.0, sigma),
            beta: Cplx::new(1.0, sigma_hat),
        }
    }

    /// d sigma / dr.
    fn sigma_deriv(&self, r: f64) -> f64 {
        if r <= self.r_inner {
            return 0.0;
        }
        let d = self.r_outer - self.r_inner;
        let s = (r - self.r_inner) / d;
        self.sigma0 * self.m_pml as f64 * s.powi(self.m_pml as i32 - 1) / d
    }

    /// The stretching matrix A at a point; identity for r <= R.
    pub fn stretch_matrix(&self, p: Pt) -> Mat2c {
        let r = p.norm().max(1e-14 * self.r_inner);
        let prof = self.profile(r);
        if prof.sigma == 0.0 && prof.sigma_hat == 0.0 {
            return identity();
        }
        let (c, s) = (p.x / r, p.y / r);
        let pq = prof.beta / prof.alpha;
        let qp = prof.alpha / prof.beta;
        [
            [pq * (c * c) + qp * (s * s), (pq - qp) * (s * c)],
            [(pq - qp) * (s * c), pq * (s * s) + qp * (c * c)],
        ]
    }

    /// A together with its spatial derivatives dA/dx and dA/dy, via the
    /// chain rule in polar coordinates with the closed-form dsigma/dr and
    /// dsigma_hat/dr = (sigma - sigma_hat)/r.
    pub fn stretch_matrix_grad(&self, p: Pt) -> (Mat2c, Mat2c, Mat2c) {
        let r = p.norm().max(1e-14 * self.r_inner);
        let prof = self.profile(r);
        if prof.sigma == 0.0 && prof.sigma_hat == 0.0 {
            return (identity(), zero(), zero());
        }
        let (c, s) = (p.x / r, p.y / r);
        let alpha_r = Cplx::new(0.0, self.sigma_deriv(r));
        let beta_r = Cplx::new(0.0, (prof.sigma - prof.sigma_hat) / r);
        let pq = prof.beta / prof.alpha;
        let qp = prof.alpha / prof.beta;
        let pq_r = (beta_r * prof.alpha - prof.beta * alpha_r) / (prof.alpha * prof.alpha);
        let qp_r = (alpha_r * prof.beta - prof.alpha * beta_r) / (prof.beta * prof.beta);

        let a_r = [
            [pq_r * (c * c) + qp_r * (s * s), (pq_r - qp_r) * (s * c)],
            [(pq_r - qp_r) * (s * c), pq_r * (s * s) + qp_r * (c * c)],
        ];
        let two_sc = 2.0 * s * c;
        let c2_minus_s2 = c * c - s * s;
        let a_phi = [
            [(qp - pq) * two_sc, (pq - qp) * c2_minus_s2],
            [(pq - qp) * c2_minus_s2, (pq - qp) * two_sc],
        ];
        let a = [
            [pq * (c * c) + qp * (s * s), (pq - qp) * (s * c)],
            [(pq - qp) * (s * c), pq * (s * s) + qp * (c * c)],
        ];
        // dr/dx = (c, s), dphi/dx = (-s/r, c/r)
        let mut ax = zero();
        let mut ay = zero();
        for i in 0..2 {
            for j in 0..2 {
                ax[i][j] = a_r[i][j] * c + a_phi[i][j] * (-s / r);
                ay[i][j] = a_r[i][j] * s + a_phi[i][j] * (c / r);
            }
        }
        (a, ax, ay)
    }

    /// Exponent kappa0 Im(r~) (1 - r^2/|r~|^2)^{1/2} of the weight decay
    /// at radius r; zero for r <= R.
    pub fn weight_exponent(&self, kappa0: f64, r: f64) -> f64 {
        let prof = self.profile(r);
        let sh = prof.sigma_hat;
        if sh == 0.0 {
            return 0.0;
        }
        // Im r~ = r sigma_hat and 1 - r^2/|r~|^2 = sigma_hat^2/(1 + sigma_hat^2)
        kappa0 * r * sh * sh / (1.0 + sh * sh).sqrt()
    }

    /// The estimator rescaling function w(x): 1 in the physical domain,
    /// |alpha/alpha0| e^{-kappa0 Im(r~)(1 - r^2/|r~|^2)^{1/2}} in the layer.
    pub fn weight(&self, kappa0: f64, p: Pt) -> f64 {
        let r = p.norm();
        if r <= self.r_inner {
            return 1.0;
        }
        let prof = self.profile(r);
        let alpha0 = (1.0 + self.sigma0 * self.sigma0).sqrt();
        prof.alpha.norm() / alpha0 * (-self.weight_exponent(kappa0, r)).exp()
    }

    /// The exponential factor e^{-kappa0 Im(rho~)(1 - R^2/|rho~|^2)^{1/2}}
    /// bounding the propagation operator from Gamma_R to Gamma_rho.
    pub fn propagation_factor(&self, kappa0: f64) -> f64 {
        let prof = self.profile(self.r_outer);
        let im_rho_t = self.r_outer * prof.sigma_hat;
        let mod2 = self.r_outer * self.r_outer * (1.0 + prof.sigma_hat * prof.sigma_hat);
        let factor = (1.0 - self.r_inner * self.r_inner / mod2).max(0.0).sqrt();
        (-kappa0 * im_rho_t * factor).exp()
    }

    /// eps_PML = propagation factor times a trace norm of u_h - u_ref.
    pub fn epsilon_pml(&self, kappa0: f64, trace_norm_value: f64) -> f64 {
        self.propagation_factor(kappa0) * trace_norm_value
    }
}

fn identity() -> Mat2c {
    let one = Cplx::new(1.0, 0.0);
    let zero = Cplx::new(0.0, 0.0);
    [[one, zero], [zero, one]]
}

fn zero() -> Mat2c {
    let zero = Cplx::new(0.0, 0.0);
    [[zero, zero], [zero, zero]]
}

/// Strong-form PML source at a point strictly inside the annulus:
/// TM: F = div(A grad u_ref) + kappa0^2 alpha beta u_ref,
/// TE: G = div(kappa0^{-2} A grad u_ref) + alpha beta u_ref.
pub fn pml_source_strong(scenario: &Scenario, p: Pt) -> Cplx {
    let map = PmlMap::from_scenario(scenario);
    let prof = map.profile(p.norm());
    let (a, ax, ay) = map.stretch_matrix_grad(p);
    let (u, grad) = scenario.reference_field(p);
    let hess = scenario.reference_hessian(p);
    // div(A grad u) = A : hess + (div A) . grad
    let a_hess = a[0][0] * hess[0] + (a[0][1] + a[1][0]) * hess[1] + a[1][1] * hess[2];
    let div_a = [ax[0][0] + ay[1][0], ax[0][1] + ay[1][1]];
    let div_term = a_hess + div_a[0] * grad[0] + div_a[1] * grad[1];
    let k0sq = scenario.kappa0 * scenario.kappa0;
    match scenario.polarization {
        Polarization::TM => div_term + k0sq * prof.alpha * prof.beta * u,
        Polarization::TE => div_term / k0sq + prof.alpha * prof.beta * u,
    }
}
