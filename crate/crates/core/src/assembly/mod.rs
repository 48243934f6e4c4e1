//! Complex-valued conforming Lagrange assembly of the PML sesquilinear
//! forms (TM and TE), the weak right-hand side with Dirichlet lifting,
//! and the DtN-coupled system for the transparent-boundary method.

pub mod basis;
mod field;
pub mod quadrature;

pub use field::SolutionField;

use crate::dtn;
use crate::geom::Pt;
use crate::mesh::{EdgeTag, Mesh, Region};
use crate::pml::{Mat2c, PmlMap};
use crate::scenario::{Polarization, Scenario};
use crate::{Cplx, Error, Result};

/// Classification of a global degree of freedom.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DofClass {
    Free,
    /// Essential zero value (TM walls and ground).
    DirichletZero,
    /// Essential reference-field value (outer PML boundary).
    DirichletUref,
}

/// Lagrange node bookkeeping for a mesh and degree: vertex nodes, plus
/// edge midpoints for degree 2.
#[derive(Clone, Debug)]
pub struct DofMap {
    pub degree: u32,
    pub n_dofs: usize,
    pub n_free: usize,
    /// Per-triangle global node ids: [v0, v1, v2, e01, e12, e20].
    pub tri_dofs: Vec<[usize; 6]>,
    pub class: Vec<DofClass>,
    /// Global id -> compressed free index.
    pub free_index: Vec<Option<usize>>,
    pub dof_point: Vec<Pt>,
    /// Free DoFs whose basis support intersects the physical domain.
    pub is_physical: Vec<bool>,
}

impl DofMap {
    pub fn local_count(&self) -> usize {
        basis::n_local(self.degree)
    }

    pub fn dofs_of(&self, t: usize) -> &[usize] {
        &self.tri_dofs[t][..self.local_count()]
    }

    /// Count of free DoFs supported in the physical domain.
    pub fn physical_free_count(&self) -> usize {
        (0..self.n_dofs)
            .filter(|&g| self.class[g] == DofClass::Free && self.is_physical[g])
            .count()
    }

    /// The two endpoint node ids and (for degree 2) the midpoint node of
    /// an edge, ordered to match `basis::edge_shape_values`.
    pub fn edge_dofs(&self, mesh: &Mesh, edge_id: usize) -> Vec<usize> {
        let e = &mesh.edges[edge_id];
        let mut out = vec![e.v[0], e.v[1]];
        if self.degree == 2 {
            out.push(mesh.vertices.len() + edge_id);
        }
        out
    }
}

/// Builds the node numbering and boundary classification. The count of
/// free DoFs is the DoF_h reported by the adaptive driver.
pub fn build_dofmap(mesh: &Mesh, scenario: &Scenario) -> DofMap {
    let degree = scenario.fem_degree;
    let n_vert = mesh.vertices.len();
    let n_dofs = n_vert + if degree == 2 { mesh.edges.len() } else { 0 };

    let mut tri_dofs = vec![[usize::MAX; 6]; mesh.triangles.len()];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        let mut d = [usize::MAX; 6];
        d[..3].copy_from_slice(&tri.v);
        if degree == 2 {
            // local edges (01), (12), (20) are opposite vertices 2, 0, 1
            d[3] = n_vert + mesh.tri_edges[t][2];
            d[4] = n_vert + mesh.tri_edges[t][0];
            d[5] = n_vert + mesh.tri_edges[t][1];
        }
        tri_dofs[t] = d;
    }

    let mut dof_point = Vec::with_capacity(n_dofs);
    dof_point.extend_from_slice(&mesh.vertices);
    if degree == 2 {
        for e in &mesh.edges {
            dof_point.push(mesh.vertices[e.v[0]].mid(mesh.vertices[e.v[1]]));
        }
    }

    let mut class = vec![DofClass::Free; n_dofs];
    let mark = |class: &mut Vec<DofClass>, g: usize, c: DofClass| {
        // zero Dirichlet wins at corners shared with the outer boundary
        if class[g] != DofClass::DirichletZero {
            class[g] = c;
        }
    };
    for (e_id, e) in mesh.edges.iter().enumerate() {
        let essential = match (scenario.polarization, e.tag) {
            (Polarization::TM, EdgeTag::Ground | EdgeTag::Wall) => Some(DofClass::DirichletZero),
            (_, EdgeTag::OuterRho) => Some(DofClass::DirichletUref),
            _ => None,
        };
        if let Some(c) = essential {
            mark(&mut class, e.v[0], c);
            mark(&mut class, e.v[1], c);
            if degree == 2 {
                mark(&mut class, n_vert + e_id, c);
            }
        }
    }
    // ground/wall overrides the outer tag at shared corners
    if scenario.polarization == Polarization::TM {
        for (e_id, e) in mesh.edges.iter().enumerate() {
            if matches!(e.tag, EdgeTag::Ground | EdgeTag::Wall) {
                class[e.v[0]] = DofClass::DirichletZero;
                class[e.v[1]] = DofClass::DirichletZero;
                if degree == 2 {
                    class[n_vert + e_id] = DofClass::DirichletZero;
                }
            }
        }
    }

    let mut free_index = vec![None; n_dofs];
    let mut n_free = 0;
    for g in 0..n_dofs {
        if class[g] == DofClass::Free {
            free_index[g] = Some(n_free);
            n_free += 1;
        }
    }

    let mut is_physical = vec![false; n_dofs];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.region != Region::Pml {
            for &g in &tri_dofs[t][..basis::n_local(degree)] {
                is_physical[g] = true;
            }
        }
    }

    DofMap { degree, n_dofs, n_free, tri_dofs, class, free_index, dof_point, is_physical }
}

/// Complex sparse matrix in compressed row form; complex-symmetric by
/// construction (never Hermitian).
#[derive(Clone, Debug)]
pub struct SystemMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<Cplx>,
}

impl SystemMatrix {
    pub fn from_triplets(n: usize, mut trips: Vec<(usize, usize, Cplx)>) -> SystemMatrix {
        trips.sort_unstable_by_key(|&(r, c, _)| (r, c));
        let mut row_counts = vec![0usize; n + 1];
        let mut col_idx: Vec<usize> = Vec::with_capacity(trips.len());
        let mut values: Vec<Cplx> = Vec::with_capacity(trips.len());
        let mut prev: Option<(usize, usize)> = None;
        for (r, c, v) in trips {
            if prev == Some((r, c)) {
                *values.last_mut().unwrap() += v;
            } else {
                col_idx.push(c);
                values.push(v);
                row_counts[r + 1] += 1;
                prev = Some((r, c));
            }
        }
        for r in 0..n {
            row_counts[r + 1] += row_counts[r];
        }
        SystemMatrix { n, row_ptr: row_counts, col_idx, values }
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn matvec(&self, x: &[Cplx]) -> Vec<Cplx> {
        let mut y = vec![Cplx::new(0.0, 0.0); self.n];
        for r in 0..self.n {
            let mut acc = Cplx::new(0.0, 0.0);
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                acc += self.values[k] * x[self.col_idx[k]];
            }
            y[r] = acc;
        }
        y
    }

    pub fn max_norm(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    /// max_ij |M_ij - M_ji|, for the complex-symmetry contract.
    pub fn asymmetry(&self) -> f64 {
        use std::collections::BTreeMap;
        let mut map: BTreeMap<(usize, usize), Cplx> = BTreeMap::new();
        for r in 0..self.n {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                map.insert((r, self.col_idx[k]), self.values[k]);
            }
        }
        let mut worst = 0.0f64;
        for (&(r, c), &v) in &map {
            let vt = map.get(&(c, r)).copied().unwrap_or(Cplx::new(0.0, 0.0));
            worst = worst.max((v - vt).norm());
        }
        worst
    }
}

/// An assembled linear system over the free DoFs.
pub struct AssembledSystem {
    pub matrix: SystemMatrix,
    /// Full right-hand side including Dirichlet lifting.
    pub rhs: Vec<Cplx>,
    /// Source part of the right-hand side (before lifting).
    pub rhs_source: Vec<Cplx>,
}

struct ElemGeom {
    pts: [Pt; 3],
    det: f64,
    /// Rows of J^{-T}: phys_grad = inv_t * ref_grad.
    inv_t: [[f64; 2]; 2],
}

impl ElemGeom {
    fn new(pts: [Pt; 3]) -> ElemGeom {
        let j = [[pts[1].x - pts[0].x, pts[2].x - pts[0].x], [pts[1].y - pts[0].y, pts[2].y - pts[0].y]];
        let det = j[0][0] * j[1][1] - j[0][1] * j[1][0];
        let inv_t = [[j[1][1] / det, -j[1][0] / det], [-j[0][1] / det, j[0][0] / det]];
        ElemGeom { pts, det, inv_t }
    }

    fn map(&self, xi: f64, eta: f64) -> Pt {
        let a = self.pts[0];
        Pt {
            x: a.x + (self.pts[1].x - a.x) * xi + (self.pts[2].x - a.x) * eta,
            y: a.y + (self.pts[1].y - a.y) * xi + (self.pts[2].y - a.y) * eta,
        }
    }

    fn phys_grad(&self, g: [f64; 2]) -> [f64; 2] {
        [
            self.inv_t[0][0] * g[0] + self.inv_t[0][1] * g[1],
            self.inv_t[1][0] * g[0] + self.inv_t[1][1] * g[1],
        ]
    }
}

fn identity2c() -> Mat2c {
    [
        [Cplx::new(1.0, 0.0), Cplx::new(0.0, 0.0)],
        [Cplx::new(0.0, 0.0), Cplx::new(1.0, 0.0)],
    ]
}

/// Coefficients of the sesquilinear kernel at a point:
/// grad_coef (A grad u . grad v) - mass_coef (u v).
struct Kernel {
    a_mat: Mat2c,
    grad_coef: Cplx,
    mass_coef: Cplx,
}

fn pml_kernel(scenario: &Scenario, map: &PmlMap, region: Region, x: Pt) -> Kernel {
    let k0sq = scenario.kappa0 * scenario.kappa0;
    match region {
        Region::Pml => {
            let prof = map.profile(x.norm());
            let ab = prof.alpha * prof.beta;
            let a_mat = map.stretch_matrix(x);
            match scenario.polarization {
                Polarization::TM => Kernel {
                    a_mat,
                    grad_coef: Cplx::new(1.0, 0.0),
                    mass_coef: k0sq * ab,
                },
                Polarization::TE => Kernel {
                    a_mat,
                    grad_coef: Cplx::new(1.0 / k0sq, 0.0),
                    mass_coef: ab,
                },
            }
        }
        _ => {
            let kappa_sq = scenario.kappa_sq(region.material());
            match scenario.polarization {
                Polarization::TM => Kernel {
                    a_mat: identity2c(),
                    grad_coef: Cplx::new(1.0, 0.0),
                    mass_coef: kappa_sq,
                },
                Polarization::TE => Kernel {
                    a_mat: identity2c(),
                    grad_coef: 1.0 / kappa_sq,
                    mass_coef: Cplx::new(1.0, 0.0),
                },
            }
        }
    }
}

/// Dirichlet value of a constrained node.
fn lifted_value(scenario: &Scenario, class: DofClass, p: Pt) -> Cplx {
    match class {
        DofClass::DirichletZero => Cplx::new(0.0, 0.0),
        DofClass::DirichletUref => scenario.reference_field(p).0,
        DofClass::Free => unreachable!("free DoFs are not lifted"),
    }
}

/// Assembles the truncated PML problem over the free DoFs: the volume
/// form, the weak source supported in the layer, the interface flux on
/// Gamma_R, and the Dirichlet lifting from Gamma_rho.
pub fn assemble_pml(mesh: &Mesh, scenario: &Scenario, dofmap: &DofMap) -> Result<AssembledSystem> {
    let map = PmlMap::from_scenario(scenario);
    let degree = dofmap.degree;
    let nl = basis::n_local(degree);
    let mut trips: Vec<(usize, usize, Cplx)> = Vec::new();
    let mut rhs_source = vec![Cplx::new(0.0, 0.0); dofmap.n_free];
    let mut lift = vec![Cplx::new(0.0, 0.0); dofmap.n_free];

    let mut vals = vec![0.0; nl];
    let mut grads = vec![[0.0; 2]; nl];
    let mut local = vec![Cplx::new(0.0, 0.0); nl * nl];
    let mut local_rhs = vec![Cplx::new(0.0, 0.0); nl];

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let is_pml = tri.region == Region::Pml;
        let rule_degree = if is_pml { 2 * degree + 2 } else { 2 * degree } as usize;
        let rule = quadrature::triangle_rule(rule_degree)?;
        let geom = ElemGeom::new(mesh.triangle_points(t));
        local.iter_mut().for_each(|v| *v = Cplx::new(0.0, 0.0));
        local_rhs.iter_mut().for_each(|v| *v = Cplx::new(0.0, 0.0));

        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * 0.5 * geom.det;
            let x = geom.map(xi, eta);
            basis::shape_values(degree, xi, eta, &mut vals);
            basis::shape_gradients(degree, xi, eta, &mut grads);
            let pg: Vec<[f64; 2]> = grads.iter().map(|&g| geom.phys_grad(g)).collect();
            let kernel = pml_kernel(scenario, &map, tri.region, x);
            // A grad N_j for each j
            let flux: Vec<[Cplx; 2]> = pg
                .iter()
                .map(|g| {
                    [
                        kernel.a_mat[0][0] * g[0] + kernel.a_mat[0][1] * g[1],
                        kernel.a_mat[1][0] * g[0] + kernel.a_mat[1][1] * g[1],
                    ]
                })
                .collect();
            for i in 0..nl {
                for j in 0..nl {
                    let grad_part = flux[j][0] * pg[i][0] + flux[j][1] * pg[i][1];
                    let mass_part = kernel.mass_coef * (vals[i] * vals[j]);
                    local[i * nl + j] += w * (kernel.grad_coef * grad_part - mass_part);
                }
            }
            if is_pml {
                let (uref, gref) = scenario.reference_field(x);
                let flux_ref = [
                    kernel.a_mat[0][0] * gref[0] + kernel.a_mat[0][1] * gref[1],
                    kernel.a_mat[1][0] * gref[0] + kernel.a_mat[1][1] * gref[1],
                ];
                for i in 0..nl {
                    let grad_part = flux_ref[0] * pg[i][0] + flux_ref[1] * pg[i][1];
                    local_rhs[i] += w * (kernel.grad_coef * grad_part - kernel.mass_coef * uref * vals[i]);
                }
            }
        }

        let dofs = dofmap.dofs_of(t);
        for (i, &gi) in dofs.iter().enumerate() {
            let Some(fi) = dofmap.free_index[gi] else { continue };
            rhs_source[fi] += local_rhs[i];
            for (j, &gj) in dofs.iter().enumerate() {
                match dofmap.free_index[gj] {
                    Some(fj) => trips.push((fi, fj, local[i * nl + j])),
                    None => {
                        let g = lifted_value(scenario, dofmap.class[gj], dofmap.dof_point[gj]);
                        lift[fi] += local[i * nl + j] * g;
                    }
                }
            }
        }
    }

    // interface flux on Gamma_R with the outward (radial) normal of Omega
    let flux_scale = match scenario.polarization {
        Polarization::TM => Cplx::new(1.0, 0.0),
        Polarization::TE => Cplx::new(1.0 / (scenario.kappa0 * scenario.kappa0), 0.0),
    };
    let gauss = quadrature::gauss_rule(2 * degree as usize + 2)?;
    let mut edge_vals = vec![0.0; degree as usize + 1];
    for (e_id, edge) in mesh.edges.iter().enumerate() {
        if edge.tag != EdgeTag::InterfaceR {
            continue;
        }
        let a = mesh.vertices[edge.v[0]];
        let b = mesh.vertices[edge.v[1]];
        let len = a.dist(b);
        let edofs = dofmap.edge_dofs(mesh, e_id);
        for (q, &tq) in gauss.points.iter().enumerate() {
            let x = a + (b - a) * tq;
            let r = x.norm();
            let (_, gref) = scenario.reference_field(x);
            let radial = (gref[0] * x.x + gref[1] * x.y) / r;
            let w = gauss.weights[q] * len;
            basis::edge_shape_values(degree, tq, &mut edge_vals);
            for (k, &g) in edofs.iter().enumerate() {
                if let Some(fi) = dofmap.free_index[g] {
                    rhs_source[fi] += flux_scale * radial * (w * edge_vals[k]);
                }
            }
        }
    }

    let rhs: Vec<Cplx> = rhs_source.iter().zip(&lift).map(|(s, l)| s - l).collect();
    Ok(AssembledSystem { matrix: SystemMatrix::from_triplets(dofmap.n_free, trips), rhs, rhs_source })
}

/// Right-hand side by direct quadrature of -int F v over the layer,
/// using the strong source; consistency oracle for `assemble_pml`.
pub fn assemble_pml_rhs_strong(mesh: &Mesh, scenario: &Scenario, dofmap: &DofMap) -> Result<Vec<Cplx>> {
    let degree = dofmap.degree;
    let nl = basis::n_local(degree);
    let rule = quadrature::triangle_rule(2 * degree as usize + 2)?;
    let mut rhs = vec![Cplx::new(0.0, 0.0); dofmap.n_free];
    let mut vals = vec![0.0; nl];
    for (t, tri) in mesh.triangles.iter().enumerate() {
        if tri.region != Region::Pml {
            continue;
        }
        let geom = ElemGeom::new(mesh.triangle_points(t));
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * 0.5 * geom.det;
            let x = geom.map(xi, eta);
            let f = crate::pml::pml_source_strong(scenario, x);
            basis::shape_values(degree, xi, eta, &mut vals);
            for (i, &gi) in dofmap.dofs_of(t).iter().enumerate() {
                if let Some(fi) = dofmap.free_index[gi] {
                    rhs[fi] -= w * f * vals[i];
                }
            }
        }
    }
    Ok(rhs)
}

/// Assembles the transparent-boundary system on the TBC mesh: the volume
/// form with A = I, the rank-N DtN coupling among Gamma_R boundary DoFs,
/// and the modal right-hand side from the reference field.
pub fn assemble_tbc(
    mesh: &Mesh,
    scenario: &Scenario,
    dofmap: &DofMap,
    n_modes: usize,
) -> Result<AssembledSystem> {
    if n_modes < 1 {
        return Err(Error::Invariant("n_modes >= 1".into()));
    }
    if mesh.triangles.iter().any(|t| t.region == Region::Pml) {
        return Err(Error::Geometry(
            "transparent-boundary assembly needs a mesh without a PML annulus".into(),
        ));
    }
    let degree = dofmap.degree;
    let nl = basis::n_local(degree);
    let mut trips: Vec<(usize, usize, Cplx)> = Vec::new();
    let mut rhs_source = vec![Cplx::new(0.0, 0.0); dofmap.n_free];

    let mut vals = vec![0.0; nl];
    let mut grads = vec![[0.0; 2]; nl];
    let mut local = vec![Cplx::new(0.0, 0.0); nl * nl];
    let map = PmlMap::from_scenario(scenario);

    for (t, tri) in mesh.triangles.iter().enumerate() {
        let rule = quadrature::triangle_rule(2 * degree as usize)?;
        let geom = ElemGeom::new(mesh.triangle_points(t));
        local.iter_mut().for_each(|v| *v = Cplx::new(0.0, 0.0));
        for (q, &(xi, eta)) in rule.points.iter().enumerate() {
            let w = rule.weights[q] * 0.5 * geom.det;
            basis::shape_values(degree, xi, eta, &mut vals);
            basis::shape_gradients(degree, xi, eta, &mut grads);
            let pg: Vec<[f64; 2]> = grads.iter().map(|&g| geom.phys_grad(g)).collect();
            let kernel = pml_kernel(scenario, &map, tri.region, geom.map(xi, eta));
            for i in 0..nl {
                for j in 0..nl {
                    let grad_part = pg[i][0] * pg[j][0] + pg[i][1] * pg[j][1];
                    local[i * nl + j] +=
                        w * (kernel.grad_coef * grad_part - kernel.mass_coef * (vals[i] * vals[j]));
                }
            }
        }
        let dofs = dofmap.dofs_of(t);
        for (i, &gi) in dofs.iter().enumerate() {
            let Some(fi) = dofmap.free_index[gi] else { continue };
            for (j, &gj) in dofs.iter().enumerate() {
                if let Some(fj) = dofmap.free_index[gj] {
                    trips.push((fi, fj, local[i * nl + j]));
                }
                // TM walls lift zero; nothing to add
            }
        }
    }

    // modal DtN coupling on the Gamma_R boundary polyline
    let multipliers = dtn::dtn_multipliers(scenario.kappa0, scenario.r_inner, n_modes, scenario.polarization)?;
    let n_entries = multipliers.len();
    let order_of = |k: usize| match scenario.polarization {
        Polarization::TM => k + 1,
        Polarization::TE => k,
    };
    let norm_of = |k: usize| match (scenario.polarization, order_of(k)) {
        (Polarization::TE, 0) => 1.0 / std::f64::consts::PI,
        _ => std::f64::consts::FRAC_2_PI,
    };

    // deterministic boundary DoF indexing
    let mut boundary_dofs: Vec<usize> = Vec::new();
    let mut b_index = std::collections::BTreeMap::new();
    let mut boundary_edges = Vec::new();
    for (e_id, edge) in mesh.edges.iter().enumerate() {
        if edge.tag == EdgeTag::InterfaceR && edge.is_boundary() {
            boundary_edges.push(e_id);
            for g in dofmap.edge_dofs(mesh, e_id) {
                b_index.entry(g).or_insert_with(|| {
                    boundary_dofs.push(g);
                    boundary_dofs.len() - 1
                });
            }
        }
    }
    if boundary_edges.is_empty() {
        return Err(Error::Geometry("TBC mesh has no Gamma_R boundary edges".into()));
    }

    let nb = boundary_dofs.len();
    let mut coeff = vec![0.0f64; nb * n_entries]; // c_n(phi_i), real
    let mut uref_coeff = vec![Cplx::new(0.0, 0.0); n_entries];
    let scale = match scenario.polarization {
        Polarization::TM => Cplx::new(1.0, 0.0),
        Polarization::TE => Cplx::new(1.0 / (scenario.kappa0 * scenario.kappa0), 0.0),
    };

    let gauss = quadrature::gauss_rule(2 * degree as usize + 3)?;
    let mut edge_vals = vec![0.0; degree as usize + 1];
    for &e_id in &boundary_edges {
        let edge = &mesh.edges[e_id];
        let a = mesh.vertices[edge.v[0]];
        let b = mesh.vertices[edge.v[1]];
        let d = b - a;
        let len = d.norm();
        let edofs = dofmap.edge_dofs(mesh, e_id);
        for (q, &tq) in gauss.points.iter().enumerate() {
            let x = a + d * tq;
            let r2 = x.dot(x);
            // |d phi / dt| along the chord: the stored edge orientation is
            // arbitrary but the angle is monotone along each chord, so the
            // positively oriented angular measure is the absolute value
            let dphi = (a.cross(b) / r2).abs();
            let phi = x.angle();
            let wq = gauss.weights[q];
            basis::edge_shape_values(degree, tq, &mut edge_vals);
            let (uref, gref) = scenario.reference_field(x);
            // direct flux part of the right-hand side
            let radial = (gref[0] * x.x + gref[1] * x.y) / r2.sqrt();
            for (k, &g) in edofs.iter().enumerate() {
                if let Some(fi) = dofmap.free_index[g] {
                    rhs_source[fi] += scale * radial * (wq * len * edge_vals[k]);
                }
            }
            for m in 0..n_entries {
                let n = order_of(m) as f64;
                let trig = match scenario.polarization {
                    Polarization::TM => (n * phi).sin(),
                    Polarization::TE => (n * phi).cos(),
                };
                let base = wq * dphi * trig * norm_of(m);
                uref_coeff[m] += uref * base;
                for (k, &g) in edofs.iter().enumerate() {
                    if let Some(&bi) = b_index.get(&g) {
                        coeff[bi * n_entries + m] += base * edge_vals[k];
                    }
                }
            }
        }
    }

    // M -= scale * sum_n z_n w_n c_n(i) c_n(j); rhs -= scale * sum_n ...
    for bi in 0..nb {
        let Some(fi) = dofmap.free_index[boundary_dofs[bi]] else { continue };
        let mut rhs_acc = Cplx::new(0.0, 0.0);
        for m in 0..n_entries {
            rhs_acc += multipliers[m]
                * uref_coeff[m]
                * (dtn::mode_weight(scenario.r_inner, order_of(m)) * coeff[bi * n_entries + m]);
        }
        rhs_source[fi] -= scale * rhs_acc;
        for bj in 0..nb {
            let Some(fj) = dofmap.free_index[boundary_dofs[bj]] else { continue };
            let mut acc = Cplx::new(0.0, 0.0);
            for m in 0..n_entries {
                acc += multipliers[m]
                    * (dtn::mode_weight(scenario.r_inner, order_of(m))
                        * coeff[bi * n_entries + m]
                        * coeff[bj * n_entries + m]);
            }
            trips.push((fi, fj, -scale * acc));
        }
    }

    let rhs = rhs_source.clone();
    Ok(AssembledSystem { matrix: SystemMatrix::from_triplets(dofmap.n_free, trips), rhs, rhs_source })
}
