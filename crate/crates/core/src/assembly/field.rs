//! A finite element solution: complex nodal coefficients bound to a mesh
//! and degree, with point evaluation through the mesh locator.

use super::{basis, DofClass, DofMap};
use crate::geom::Pt;
use crate::mesh::Mesh;
use crate::scenario::Scenario;
use crate::{Cplx, Result};
use std::sync::Arc;

#[derive(Clone, Debug)]
pub struct SolutionField {
    pub mesh: Arc<Mesh>,
    pub dofmap: Arc<DofMap>,
    /// One coefficient per global DoF, essential values filled in.
    pub coeffs: Vec<Cplx>,
}

impl SolutionField {
    /// Expands a free-DoF solution vector to all DoFs, filling essential
    /// boundary values (zero on walls, reference field on Gamma_rho).
    pub fn from_free(
        mesh: Arc<Mesh>,
        dofmap: Arc<DofMap>,
        scenario: &Scenario,
        free: &[Cplx],
    ) -> SolutionField {
        assert_eq!(free.len(), dofmap.n_free);
        let mut coeffs = vec![Cplx::new(0.0, 0.0); dofmap.n_dofs];
        for g in 0..dofmap.n_dofs {
            coeffs[g] = match dofmap.class[g] {
                DofClass::Free => free[dofmap.free_index[g].unwrap()],
                DofClass::DirichletZero => Cplx::new(0.0, 0.0),
                DofClass::DirichletUref => scenario.reference_field(dofmap.dof_point[g]).0,
            };
        }
        SolutionField { mesh, dofmap, coeffs }
    }

    pub fn zero(mesh: Arc<Mesh>, dofmap: Arc<DofMap>) -> SolutionField {
        let n = dofmap.n_dofs;
        SolutionField { mesh, dofmap, coeffs: vec![Cplx::new(0.0, 0.0); n] }
    }

    pub fn degree(&self) -> u32 {
        self.dofmap.degree
    }

    /// Value at a reference point of triangle `t`.
    pub fn value_ref(&self, t: usize, xi: f64, eta: f64) -> Cplx {
        let nl = basis::n_local(self.degree());
        let mut vals = [0.0; 6];
        basis::shape_values(self.degree(), xi, eta, &mut vals[..nl]);
        let mut acc = Cplx::new(0.0, 0.0);
        for (k, &g) in self.dofmap.dofs_of(t).iter().enumerate() {
            acc += self.coeffs[g] * vals[k];
        }
        acc
    }

    /// Value and physical gradient at a reference point of triangle `t`.
    pub fn value_grad_ref(&self, t: usize, xi: f64, eta: f64) -> (Cplx, [Cplx; 2]) {
        let nl = basis::n_local(self.degree());
        let mut vals = [0.0; 6];
        let mut grads = [[0.0; 2]; 6];
        basis::shape_values(self.degree(), xi, eta, &mut vals[..nl]);
        basis::shape_gradients(self.degree(), xi, eta, &mut grads[..nl]);
        let inv = self.jacobian_inverse(t);
        let mut value = Cplx::new(0.0, 0.0);
        let mut grad = [Cplx::new(0.0, 0.0); 2];
        for (k, &g) in self.dofmap.dofs_of(t).iter().enumerate() {
            let c = self.coeffs[g];
            value += c * vals[k];
            // phys grad = [gx, gy] with gx = xi_x g_xi + eta_x g_eta
            grad[0] += c * (inv[0][0] * grads[k][0] + inv[1][0] * grads[k][1]);
            grad[1] += c * (inv[0][1] * grads[k][0] + inv[1][1] * grads[k][1]);
        }
        (value, grad)
    }

    /// Constant physical second derivatives (u_xx, u_xy, u_yy) on
    /// triangle `t`; zero for degree 1.
    pub fn second_derivatives(&self, t: usize) -> [Cplx; 3] {
        if self.degree() == 1 {
            return [Cplx::new(0.0, 0.0); 3];
        }
        let nl = basis::n_local(self.degree());
        let mut ref_h = [[0.0; 3]; 6];
        basis::shape_hessians(self.degree(), &mut ref_h[..nl]);
        let inv = self.jacobian_inverse(t); // rows: grad xi, grad eta
        let (xx, xy) = (inv[0][0], inv[0][1]); // xi_x, xi_y
        let (ex, ey) = (inv[1][0], inv[1][1]); // eta_x, eta_y
        let mut out = [Cplx::new(0.0, 0.0); 3];
        for (k, &g) in self.dofmap.dofs_of(t).iter().enumerate() {
            let c = self.coeffs[g];
            let [hxx, hxe, hee] = ref_h[k];
            out[0] += c * (xx * xx * hxx + 2.0 * xx * ex * hxe + ex * ex * hee);
            out[1] += c * (xx * xy * hxx + (xx * ey + xy * ex) * hxe + ex * ey * hee);
            out[2] += c * (xy * xy * hxx + 2.0 * xy * ey * hxe + ey * ey * hee);
        }
        out
    }

    /// Rows (grad xi, grad eta) of the inverse Jacobian of triangle `t`.
    fn jacobian_inverse(&self, t: usize) -> [[f64; 2]; 2] {
        let [a, b, c] = self.mesh.triangle_points(t);
        let j = [[b.x - a.x, c.x - a.x], [b.y - a.y, c.y - a.y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        [
            [j[1][1] / det, -j[0][1] / det],
            [-j[1][0] / det, j[0][0] / det],
        ]
    }

    /// Point evaluation through the mesh locator.
    pub fn eval(&self, p: Pt) -> Result<Cplx> {
        let (t, bary) = self.mesh.locate(p)?;
        Ok(self.value_ref(t, bary[1], bary[2]))
    }

    /// Point evaluation of value and gradient.
    pub fn eval_grad(&self, p: Pt) -> Result<(Cplx, [Cplx; 2])> {
        let (t, bary) = self.mesh.locate(p)?;
        Ok(self.value_grad_ref(t, bary[1], bary[2]))
    }
}

#[cfg(test)]
mod tests {
    use super::super::build_dofmap;
    use super::*;
    use crate::geom::pt;
    use crate::mesh::{initial_mesh, DomainKind};
    use crate::scenario::{preset, Preset};

    /// Interpolating an affine function is exact for both degrees.
    #[test]
    fn interpolation_reproduces_affine_fields() {
        for degree in [1u32, 2] {
            let mut s = preset(Preset::Example1Empty);
            s.fem_degree = degree;
            let mesh =
                Arc::new(initial_mesh(&s, s.wavelength() / 4.0, DomainKind::PmlDomain).unwrap());
            let dm = Arc::new(build_dofmap(&mesh, &s));
            let f = |p: Pt| Cplx::new(0.25 + 3.0 * p.x - 2.0 * p.y, 1.0 * p.y);
            let mut field = SolutionField::zero(mesh.clone(), dm.clone());
            for g in 0..dm.n_dofs {
                field.coeffs[g] = f(dm.dof_point[g]);
            }
            for t in (0..mesh.triangles.len()).step_by(7) {
                let c = mesh.centroid(t);
                let (v, grad) = field.value_grad_ref(t, 1.0 / 3.0, 1.0 / 3.0);
                assert!((v - f(c)).norm() < 1e-12);
                assert!((grad[0] - Cplx::new(3.0, 0.0)).norm() < 1e-9);
                assert!((grad[1] - Cplx::new(-2.0, 1.0)).norm() < 1e-9);
            }
        }
    }

    #[test]
    fn p2_second_derivatives_of_quadratic() {
        let mut s = preset(Preset::Example1Empty);
        s.fem_degree = 2;
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 4.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        // u = x^2 + 3xy - 2y^2: u_xx = 2, u_xy = 3, u_yy = -4
        let f = |p: Pt| Cplx::new(p.x * p.x + 3.0 * p.x * p.y - 2.0 * p.y * p.y, 0.0);
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            field.coeffs[g] = f(dm.dof_point[g]);
        }
        let scale = 1.0 / (s.wavelength() * s.wavelength());
        let _ = scale;
        for t in (0..mesh.triangles.len()).step_by(11) {
            let h = field.second_derivatives(t);
            assert!((h[0] - Cplx::new(2.0, 0.0)).norm() < 1e-6, "u_xx = {}", h[0]);
            assert!((h[1] - Cplx::new(3.0, 0.0)).norm() < 1e-6);
            assert!((h[2] - Cplx::new(-4.0, 0.0)).norm() < 1e-6);
        }
    }

    #[test]
    fn eval_through_locator() {
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let f = |p: Pt| Cplx::new(1.0 + p.x, -p.y);
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            field.coeffs[g] = f(dm.dof_point[g]);
        }
        let p = pt(0.01, 0.02);
        assert!((field.eval(p).unwrap() - f(p)).norm() < 1e-12);
    }
}
