//! Residual a posteriori error indicators: strong element residuals,
//! inter-element flux jumps, the PML-weighted local indicator eta_K, and
//! the global split into eps_h and eps_PML.

use crate::assembly::{quadrature, SolutionField};
use crate::dtn;
use crate::geom::Pt;
use crate::mesh::{EdgeTag, Mesh, Region};
use crate::pml::{pml_source_strong, PmlMap};
use crate::scenario::{Polarization, Scenario};
use crate::{Cplx, Error, Result};

/// Global estimator output for one solve.
#[derive(Clone, Debug)]
pub struct EstimatorReport {
    /// Per-element indicator eta_K.
    pub eta: Vec<f64>,
    /// ( sum eta_K^2 )^{1/2}.
    pub eps_h: f64,
    /// PML truncation indicator; zero for TBC solves.
    pub eps_pml: f64,
    /// Free DoF count of the solve.
    pub dof_count: usize,
    /// Free DoFs whose basis support touches the physical domain.
    pub dof_physical: usize,
}

/// Whether an edge participates in the jump set of the polarization.
/// TM excludes all boundary edges; TE keeps ground/wall edges (with the
/// doubled one-sided flux) and excludes only the outer boundaries.
fn edge_in_jump_set(mesh: &Mesh, e: usize, polarization: Polarization) -> bool {
    let edge = &mesh.edges[e];
    if !edge.is_boundary() {
        return true;
    }
    match polarization {
        Polarization::TM => false,
        Polarization::TE => matches!(edge.tag, EdgeTag::Ground | EdgeTag::Wall),
    }
}

/// Conormal flux coefficient of an element at a point: A for TM,
/// kappa^{-2} A for TE (with A = I outside the layer).
fn flux_matrix(scenario: &Scenario, map: &PmlMap, region: Region, x: Pt) -> [[Cplx; 2]; 2] {
    let mut a = match region {
        Region::Pml => map.stretch_matrix(x),
        _ => [
            [Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)],
            [Cplx::new(0.0, 0.0), Cplx::new(1.0, 0.0)],
        ],
    };
    if scenario.polarization == Polarization::TE {
        let kappa_sq = match region {
            Region::Pml => Cplx::new(scenario.kappa0 * scenario.kappa0, 0.0),
            _ => scenario.kappa_sq(region.material()),
        };
        for row in a.iter_mut() {
            for v in row.iter_mut() {
                *v /= kappa_sq;
            }
        }
    }
    a
}

/// Strong residual of the solved field on element `K`, evaluated at the
/// quadrature points used by `eta_k`: residual of u_h in the physical
/// domain, residual of u_h - u_ref (via the strong PML source) in the
/// layer.
pub fn element_residual(
    field: &SolutionField,
    scenario: &Scenario,
    k: usize,
) -> Result<Vec<(Pt, Cplx)>> {
    let mesh = &field.mesh;
    let degree = field.degree() as usize;
    let region = mesh.triangles[k].region;
    let rule_degree = if region == Region::Pml { 2 * degree + 2 } else { 2 * degree };
    let rule = quadrature::triangle_rule(rule_degree)?;
    let map = PmlMap::from_scenario(scenario);
    let hess = field.second_derivatives(k);
    let [a, b, c] = mesh.triangle_points(k);
    let mut out = Vec::with_capacity(rule.points.len());
    for &(xi, eta) in rule.points {
        let x = Pt {
            x: a.x + (b.x - a.x) * xi + (c.x - a.x) * eta,
            y: a.y + (b.y - a.y) * xi + (c.y - a.y) * eta,
        };
        let (u, grad) = field.value_grad_ref(k, xi, eta);
        let value = residual_at(scenario, &map, region, x, u, grad, hess);
        out.push((x, value));
    }
    Ok(out)
}

fn residual_at(
    scenario: &Scenario,
    map: &PmlMap,
    region: Region,
    x: Pt,
    u: Cplx,
    grad: [Cplx; 2],
    hess: [Cplx; 3],
) -> Cplx {
    let k0sq = scenario.kappa0 * scenario.kappa0;
    match region {
        Region::Pml => {
            let prof = map.profile(x.norm());
            let (a, ax, ay) = map.stretch_matrix_grad(x);
            let a_hess = a[0][0] * hess[0] + (a[0][1] + a[1][0]) * hess[1] + a[1][1] * hess[2];
            let div_a = [ax[0][0] + ay[1][0], ax[0][1] + ay[1][1]];
            let div_term = a_hess + div_a[0] * grad[0] + div_a[1] * grad[1];
            let r_uh = match scenario.polarization {
                Polarization::TM => div_term + k0sq * prof.alpha * prof.beta * u,
                Polarization::TE => div_term / k0sq + prof.alpha * prof.beta * u,
            };
            r_uh - pml_source_strong(scenario, x)
        }
        _ => {
            let laplace = hess[0] + hess[2];
            let kappa_sq = scenario.kappa_sq(region.material());
            match scenario.polarization {
                Polarization::TM => laplace + kappa_sq * u,
                Polarization::TE => laplace / kappa_sq + u,
            }
        }
    }
}

/// Flux jump across edge `e` at its Gauss points: the negative sum of
/// the one-sided conormal fluxes for interior edges; twice the one-sided
/// flux on TE ground/wall edges.
pub fn edge_jump(field: &SolutionField, scenario: &Scenario, e: usize) -> Result<Vec<(Pt, Cplx)>> {
    let mesh = &field.mesh;
    if !edge_in_jump_set(mesh, e, scenario.polarization) {
        return Err(Error::Invariant(format!(
            "edge {e} ({:?}) is excluded from the jump set",
            mesh.edges[e].tag
        )));
    }
    let map = PmlMap::from_scenario(scenario);
    let degree = field.degree() as usize;
    let gauss = quadrature::gauss_rule(2 * degree)?;
    let edge = &mesh.edges[e];
    let (pa, pb) = (mesh.vertices[edge.v[0]], mesh.vertices[edge.v[1]]);
    let d = pb - pa;
    // outward normal of the first adjacent triangle
    let mut normal = Pt { x: d.y, y: -d.x } * (1.0 / d.norm());
    let c0 = mesh.centroid(edge.tri[0]);
    if normal.dot(c0 - pa.mid(pb)) > 0.0 {
        normal = -normal;
    }
    let mut out = Vec::with_capacity(gauss.points.len());
    for &t in gauss.points {
        let x = pa + d * t;
        let flux = |tri: usize| -> Cplx {
            let (_, bary) = invert_in_triangle(mesh, tri, x);
            let (_, grad) = field.value_grad_ref(tri, bary[1], bary[2]);
            let a = flux_matrix(scenario, &map, mesh.triangles[tri].region, x);
            let fx = a[0][0] * grad[0] + a[0][1] * grad[1];
            let fy = a[1][0] * grad[0] + a[1][1] * grad[1];
            fx * normal.x + fy * normal.y
        };
        let value = if edge.is_boundary() {
            // TE ground/wall rule: nu is the outward domain normal here
            2.0 * flux(edge.tri[0])
        } else {
            // J = -(F1 . nu1 + F2 . nu2) = (F2 - F1) . nu1
            flux(edge.tri[1]) - flux(edge.tri[0])
        };
        out.push((x, value));
    }
    Ok(out)
}

/// Barycentric coordinates of `x` in triangle `t` (no point location).
fn invert_in_triangle(mesh: &Mesh, t: usize, x: Pt) -> (usize, [f64; 3]) {
    let [a, b, c] = mesh.triangle_points(t);
    let area2 = (b - a).cross(c - a);
    let l0 = (b - x).cross(c - x) / area2;
    let l1 = (c - x).cross(a - x) / area2;
    (t, [l0, l1, 1.0 - l0 - l1])
}

/// Maximum of the PML weight over the element sample set (vertices plus
/// quadrature nodes).
fn weight_max(scenario: &Scenario, map: &PmlMap, mesh: &Mesh, k: usize) -> Result<f64> {
    if mesh.triangles[k].region != Region::Pml {
        return Ok(1.0);
    }
    let degree = scenario.fem_degree as usize;
    let rule = quadrature::triangle_rule(2 * degree + 2)?;
    let [a, b, c] = mesh.triangle_points(k);
    let mut w = f64::MIN;
    for p in [a, b, c] {
        w = w.max(map.weight(scenario.kappa0, p));
    }
    for &(xi, eta) in rule.points {
        let x = Pt {
            x: a.x + (b.x - a.x) * xi + (c.x - a.x) * eta,
            y: a.y + (b.y - a.y) * xi + (c.y - a.y) * eta,
        };
        w = w.max(map.weight(scenario.kappa0, x));
    }
    Ok(w)
}

/// Squared L^2 norm of the strong residual over element `k`.
fn residual_norm_sq(field: &SolutionField, scenario: &Scenario, k: usize) -> Result<f64> {
    let mesh = &field.mesh;
    let degree = field.degree() as usize;
    let region = mesh.triangles[k].region;
    let rule_degree = if region == Region::Pml { 2 * degree + 2 } else { 2 * degree };
    let rule = quadrature::triangle_rule(rule_degree)?;
    let area = mesh.area(k);
    let values = element_residual(field, scenario, k)?;
    Ok(values
        .iter()
        .zip(rule.weights)
        .map(|(&(_, v), &w)| w * v.norm_sqr())
        .sum::<f64>()
        * area)
}

/// Squared L^2 norm of the jump over edge `e` (zero for excluded edges).
fn jump_norm_sq(field: &SolutionField, scenario: &Scenario, e: usize) -> Result<f64> {
    if !edge_in_jump_set(&field.mesh, e, scenario.polarization) {
        return Ok(0.0);
    }
    let degree = field.degree() as usize;
    let gauss = quadrature::gauss_rule(2 * degree)?;
    let len = field.mesh.h_e(e);
    let values = edge_jump(field, scenario, e)?;
    Ok(values
        .iter()
        .zip(gauss.weights)
        .map(|(&(_, v), &w)| w * v.norm_sqr())
        .sum::<f64>()
        * len)
}

/// The local indicator
/// eta_K = max_K w ( ||h_K R_K||^2 + 1/2 sum_e ||h_e^{1/2} J_e||^2 )^{1/2}.
pub fn eta_k(field: &SolutionField, scenario: &Scenario, k: usize) -> Result<f64> {
    let mesh = &field.mesh;
    let map = PmlMap::from_scenario(scenario);
    let h_k = mesh.h_k(k);
    let mut bracket = h_k * h_k * residual_norm_sq(field, scenario, k)?;
    for &e in &mesh.tri_edges[k] {
        bracket += 0.5 * mesh.h_e(e) * jump_norm_sq(field, scenario, e)?;
    }
    Ok(weight_max(scenario, &map, mesh, k)? * bracket.sqrt())
}

/// Per-element indicators, the global estimate eps_h, and the PML
/// truncation indicator eps_PML (zero on TBC meshes).
pub fn global_estimate(field: &SolutionField, scenario: &Scenario) -> Result<EstimatorReport> {
    let mesh = &field.mesh;
    let map = PmlMap::from_scenario(scenario);
    // per-edge jump contributions computed once
    let mut edge_sq = vec![0.0f64; mesh.edges.len()];
    for e in 0..mesh.edges.len() {
        edge_sq[e] = mesh.h_e(e) * jump_norm_sq(field, scenario, e)?;
    }
    let mut eta = Vec::with_capacity(mesh.triangles.len());
    for k in 0..mesh.triangles.len() {
        let h_k = mesh.h_k(k);
        let mut bracket = h_k * h_k * residual_norm_sq(field, scenario, k)?;
        for &e in &mesh.tri_edges[k] {
            bracket += 0.5 * edge_sq[e];
        }
        eta.push(weight_max(scenario, &map, mesh, k)? * bracket.sqrt());
    }
    let eps_h = eta.iter().map(|v| v * v).sum::<f64>().sqrt();

    let has_pml = mesh.triangles.iter().any(|t| t.region == Region::Pml);
    let eps_pml = if has_pml {
        let n_modes = dtn::default_n_modes(scenario.kappa0, scenario.r_inner);
        let coeffs = dtn::trace_coeffs(
            |p, _| Ok(field.eval(p)? - scenario.reference_field(p).0),
            scenario.polarization,
            scenario.r_inner,
            scenario.n_arc,
            n_modes,
            dtn::default_m_samples(n_modes),
        )?;
        map.epsilon_pml(scenario.kappa0, coeffs.trace_norm(0.5))
    } else {
        0.0
    };

    Ok(EstimatorReport {
        eta,
        eps_h,
        eps_pml,
        dof_count: field.dofmap.n_free,
        dof_physical: field.dofmap.physical_free_count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_dofmap, SolutionField};
    use crate::geom::pt;
    use crate::mesh::{initial_mesh, DomainKind, RefinementMarks};
    use crate::scenario::{preset, Preset};
    use std::sync::Arc;

    fn zero_field(s: &Scenario, domain: DomainKind) -> SolutionField {
        let mesh = Arc::new(initial_mesh(s, s.wavelength() / 6.0, domain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, s));
        SolutionField::zero(mesh, dm)
    }

    #[test]
    fn zero_field_residual_vanishes_in_omega() {
        let s = preset(Preset::Example1Empty);
        let field = zero_field(&s, DomainKind::PmlDomain);
        for k in 0..field.mesh.triangles.len() {
            if field.mesh.triangles[k].region != Region::Pml {
                for (_, v) in element_residual(&field, &s, k).unwrap() {
                    assert_eq!(v, Cplx::new(0.0, 0.0));
                }
                assert_eq!(eta_k(&field, &s, k).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn p1_residual_in_omega_is_kappa_sq_u() {
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            let p = dm.dof_point[g];
            field.coeffs[g] = Cplx::new(0.3 * p.x + 1.0, -2.0 * p.y);
        }
        let k0sq = s.kappa0 * s.kappa0;
        for k in (0..mesh.triangles.len()).step_by(13) {
            if mesh.triangles[k].region != Region::Pml {
                for (x, v) in element_residual(&field, &s, k).unwrap() {
                    let (u, _) = field.eval_grad(x).map(|(u, g)| (u, g)).unwrap();
                    assert!((v - k0sq * u).norm() < 1e-8 * (k0sq * u.norm()).max(1e-12));
                }
            }
        }
    }

    #[test]
    fn globally_linear_field_has_no_interior_jumps() {
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            let p = dm.dof_point[g];
            field.coeffs[g] = Cplx::new(2.0 * p.x - p.y, 0.0);
        }
        for e in 0..mesh.edges.len() {
            let edge = &mesh.edges[e];
            if edge.is_boundary() {
                continue;
            }
            // restrict to edges strictly inside the physical domain where
            // the flux coefficient is the identity
            let both_interior = edge.tri.iter().all(|&t| mesh.triangles[t].region == Region::Interior);
            if both_interior {
                for (_, v) in edge_jump(&field, &s, e).unwrap() {
                    assert!(v.norm() < 1e-10, "jump {v} on interior edge");
                }
            }
        }
    }

    #[test]
    fn hand_built_jump_across_vertical_edge() {
        // u_h with grad (1,0) left of x=0 and (0,0) right of it,
        // nu_1 = (1,0), A = I: J = -1
        use crate::mesh::{EdgeTag, Mesh, Triangle};
        use std::collections::BTreeMap;
        let verts = vec![pt(0.0, 0.0), pt(0.0, 1.0), pt(-1.0, 0.0), pt(1.0, 0.5)];
        let mut tags = BTreeMap::new();
        for (a, b) in [(0usize, 2usize), (2, 1), (0, 3), (3, 1)] {
            tags.insert((a.min(b), a.max(b)), EdgeTag::Wall);
        }
        let tris = vec![
            Triangle { v: [0, 1, 2], peak: 0, region: Region::Interior },
            Triangle { v: [0, 3, 1], peak: 0, region: Region::Interior },
        ];
        let mesh = Arc::new(Mesh::finalize(verts, tris, DomainKind::PmlDomain, tags).unwrap());
        let mut s = preset(Preset::Example1Empty);
        s.fem_degree = 1;
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm);
        // nodal values of x on the left triangle, 0 on the right: shared
        // edge (0,1) has x = 0 so the field is continuous
        field.coeffs[2] = Cplx::new(-1.0, 0.0);
        let shared = mesh
            .edges
            .iter()
            .position(|e| {
                let mut v = e.v;
                v.sort_unstable();
                v == [0, 1]
            })
            .unwrap();
        let jumps = edge_jump(&field, &s, shared).unwrap();
        // left triangle has grad (1, 0); outward normal of tri[0] on the
        // shared edge points right: J = -(1) or with tri order swapped +1
        for (_, v) in jumps {
            assert!((v.norm() - 1.0).abs() < 1e-12, "|J| = {}", v.norm());
        }
    }

    #[test]
    fn te_boundary_edge_doubles_one_sided_flux() {
        let s = crate::scenario::manufactured_flat(
            Polarization::TE,
            0.4,
            8.0 * std::f64::consts::PI,
        );
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            let p = dm.dof_point[g];
            field.coeffs[g] = Cplx::new(p.y, 0.0); // grad (0, 1)
        }
        let k0sq = s.kappa0 * s.kappa0;
        // pick a ground edge adjacent to a physical element (A = I there)
        let ground = mesh
            .edges
            .iter()
            .position(|e| {
                e.tag == EdgeTag::Ground
                    && e.is_boundary()
                    && mesh.triangles[e.tri[0]].region == Region::Interior
            })
            .unwrap();
        // the element above the ground sees flux kappa^{-2} (0,1).(0,-1)
        let jumps = edge_jump(&field, &s, ground).unwrap();
        for (_, v) in jumps {
            let expected = 2.0 / k0sq;
            assert!(
                (v.norm() - expected).abs() < 1e-9 * expected,
                "TE ground jump {} vs {expected}",
                v.norm()
            );
        }
        // TM rejects the same edge
        let mut tm = s.clone();
        tm.polarization = Polarization::TM;
        assert!(edge_jump(&field, &tm, ground).is_err());
    }

    #[test]
    fn pml_residual_matches_finite_differences() {
        // oracle: central differences of the conormal flux of the
        // composite field u_h - u_ref, using the element's polynomial
        // extension for u_h
        let mut s = preset(Preset::Example1Empty);
        s.fem_degree = 2;
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(crate::assembly::build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            let p = dm.dof_point[g];
            field.coeffs[g] = Cplx::new(
                (40.0 * p.x).sin() + 3.0 * p.y * p.y,
                (25.0 * p.y).cos() * p.x,
            );
        }
        let map = PmlMap::from_scenario(&s);
        let k0sq = s.kappa0 * s.kappa0;
        let h = 1e-6 * s.wavelength();
        let mut tested = 0;
        for k in 0..mesh.triangles.len() {
            if mesh.triangles[k].region != Region::Pml || mesh.centroid(k).norm() > 0.6 * s.r_outer
            {
                continue;
            }
            let [a, b, c] = mesh.triangle_points(k);
            let area2 = (b - a).cross(c - a);
            // polynomial extension of u_h evaluated at arbitrary points
            let poly = |x: Pt| -> (Cplx, [Cplx; 2]) {
                let l0 = (b - x).cross(c - x) / area2;
                let l1 = (c - x).cross(a - x) / area2;
                field.value_grad_ref(k, l1, 1.0 - l0 - l1)
            };
            let composite_flux = |x: Pt| -> [Cplx; 2] {
                let am = map.stretch_matrix(x);
                let (_, gh) = poly(x);
                let (_, gr) = s.reference_field(x);
                let g = [gh[0] - gr[0], gh[1] - gr[1]];
                [am[0][0] * g[0] + am[0][1] * g[1], am[1][0] * g[0] + am[1][1] * g[1]]
            };
            for (x, got) in element_residual(&field, &s, k).unwrap() {
                let div_fd = (composite_flux(Pt { x: x.x + h, y: x.y })[0]
                    - composite_flux(Pt { x: x.x - h, y: x.y })[0]
                    + composite_flux(Pt { x: x.x, y: x.y + h })[1]
                    - composite_flux(Pt { x: x.x, y: x.y - h })[1])
                    / (2.0 * h);
                let prof = map.profile(x.norm());
                let (uh, _) = poly(x);
                let (ur, _) = s.reference_field(x);
                let expected = div_fd + k0sq * prof.alpha * prof.beta * (uh - ur);
                let scale = expected.norm().max(k0sq);
                assert!(
                    (got - expected).norm() <= 1e-4 * scale,
                    "element {k}: {got} vs {expected}"
                );
                tested += 1;
            }
        }
        assert!(tested > 20, "too few PML sample points: {tested}");
    }

    #[test]
    fn eta_scaling_is_homogeneous_in_omega() {
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::TbcDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        for g in 0..dm.n_dofs {
            let p = dm.dof_point[g];
            field.coeffs[g] = Cplx::new((37.0 * p.x).sin(), (23.0 * p.y).cos());
        }
        let mut doubled = field.clone();
        for c in doubled.coeffs.iter_mut() {
            *c *= 2.0;
        }
        for k in (0..mesh.triangles.len()).step_by(17) {
            let e1 = eta_k(&field, &s, k).unwrap();
            let e2 = eta_k(&doubled, &s, k).unwrap();
            assert!((e2 - 2.0 * e1).abs() <= 1e-10 * e1.max(1e-300), "{e2} vs 2*{e1}");
        }
    }

    #[test]
    fn deep_pml_elements_are_suppressed() {
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 6.0, DomainKind::PmlDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let map = PmlMap::from_scenario(&s);
        // identical synthetic residual magnitude; compare weights near the
        // outer boundary against the physical domain
        let outer = (0..mesh.triangles.len())
            .filter(|&k| mesh.centroid(k).norm() > 0.95 * s.r_outer)
            .take(5);
        for k in outer {
            let w = weight_max(&s, &map, &mesh, k).unwrap();
            assert!(w < 1e-10, "weight near the outer boundary is {w:e}");
        }
    }

    #[test]
    fn global_estimate_self_consistency_and_zero_field() {
        let s = preset(Preset::Example1Empty);
        let field = zero_field(&s, DomainKind::TbcDomain);
        let report = global_estimate(&field, &s).unwrap();
        // TBC mesh: no PML part, zero field -> all indicators vanish
        assert_eq!(report.eps_pml, 0.0);
        assert_eq!(report.eps_h, 0.0);
        assert!(report.eta.iter().all(|&v| v == 0.0));
        assert_eq!(report.dof_count, field.dofmap.n_free);

        // consistency of eps_h with the per-element array on a nonzero field
        let mesh = field.mesh.clone();
        let dm = field.dofmap.clone();
        let mut f2 = SolutionField::zero(mesh, dm);
        for (g, c) in f2.coeffs.iter_mut().enumerate() {
            let p = f2.dofmap.dof_point[g];
            *c = Cplx::new((91.0 * p.x).cos(), (57.0 * p.y).sin());
        }
        let report2 = global_estimate(&f2, &s).unwrap();
        let root_sum = report2.eta.iter().map(|v| v * v).sum::<f64>().sqrt();
        assert!((report2.eps_h - root_sum).abs() <= 1e-12 * root_sum);
    }

    #[test]
    fn eta_invariant_under_triangle_relabeling() {
        // refining unrelated elements renumbers triangles; eta of an
        // untouched element must not change
        let s = preset(Preset::Example1Empty);
        let mesh = Arc::new(initial_mesh(&s, s.wavelength() / 5.0, DomainKind::TbcDomain).unwrap());
        let dm = Arc::new(build_dofmap(&mesh, &s));
        let assign = |field: &mut SolutionField| {
            for g in 0..field.dofmap.n_dofs {
                let p = field.dofmap.dof_point[g];
                field.coeffs[g] = Cplx::new((37.0 * p.x).sin(), (23.0 * p.y).cos());
            }
        };
        let mut field = SolutionField::zero(mesh.clone(), dm.clone());
        assign(&mut field);
        // pick an interior element far from the refined one
        let probe = mesh.centroid(0);
        let eta0 = eta_k(&field, &s, 0).unwrap();
        let far = (0..mesh.triangles.len())
            .max_by(|&a, &b| {
                mesh.centroid(a)
                    .dist(probe)
                    .partial_cmp(&mesh.centroid(b).dist(probe))
                    .unwrap()
            })
            .unwrap();
        let refined = Arc::new(mesh.bisect(&RefinementMarks::new(vec![far])));
        let dm2 = Arc::new(build_dofmap(&refined, &s));
        let mut field2 = SolutionField::zero(refined.clone(), dm2);
        assign(&mut field2);
        let new_index = (0..refined.triangles.len())
            .find(|&k| refined.centroid(k).dist(probe) < 1e-14)
            .unwrap();
        let eta1 = eta_k(&field2, &s, new_index).unwrap();
        assert!((eta0 - eta1).abs() <= 1e-10 * eta0.max(1e-300), "{eta0} vs {eta1}");
    }
}
