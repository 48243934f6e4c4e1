//! Conforming triangulations of the computational domain with boundary
//! tags, region labels, and newest-vertex bisection refinement.

mod initial;
mod locate;
mod refine;

pub use initial::initial_mesh;

use crate::geom::Pt;
use crate::{Error, Result};
use std::collections::BTreeMap;
use std::io::Write;

/// Which domain the triangulation covers.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DomainKind {
    /// Omega_rho = B_rho^+ union D, including the PML annulus.
    PmlDomain,
    /// Omega = B_R^+ union D, truncated at the inner semicircle.
    TbcDomain,
}

/// Region label of a triangle, decided by centroid location at mesh
/// construction and inherited under refinement.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Region {
    /// Physical domain Omega (background medium).
    Interior,
    /// PML annulus R < r < rho.
    Pml,
    /// Material region with the given index into `Scenario::materials`.
    Material(u32),
}

impl Region {
    pub fn is_pml(self) -> bool {
        matches!(self, Region::Pml)
    }

    pub fn material(self) -> Option<usize> {
        match self {
            Region::Material(i) => Some(i as usize),
            _ => None,
        }
    }
}

/// Edge classification.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EdgeTag {
    Interior,
    /// Ground plane Gamma_g (x2 = 0 outside the cavity opening).
    Ground,
    /// Cavity wall S (including protruding PEC humps).
    Wall,
    /// The polyline approximating Gamma_R^+: an interior interface in the
    /// PML mesh, the outer boundary of the TBC mesh.
    InterfaceR,
    /// Outer PML boundary Gamma_rho^+.
    OuterRho,
}

#[derive(Clone, Copy, Debug)]
pub struct Triangle {
    /// Vertex indices, counterclockwise.
    pub v: [usize; 3],
    /// Local index of the newest vertex; the refinement edge is opposite.
    pub peak: u8,
    pub region: Region,
}

impl Triangle {
    /// The refinement edge (opposite the peak vertex).
    pub fn refinement_edge(&self) -> (usize, usize) {
        let p = self.peak as usize;
        (self.v[(p + 1) % 3], self.v[(p + 2) % 3])
    }
}

pub const NO_TRI: usize = usize::MAX;

#[derive(Clone, Copy, Debug)]
pub struct Edge {
    pub v: [usize; 2],
    /// Adjacent triangles; `tri[1] == NO_TRI` for boundary edges.
    pub tri: [usize; 2],
    pub tag: EdgeTag,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.tri[1] == NO_TRI
    }
}

/// Set of triangles selected for refinement.
#[derive(Clone, Debug, Default)]
pub struct RefinementMarks {
    marked: Vec<usize>,
}

impl RefinementMarks {
    pub fn new(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        RefinementMarks { marked: indices }
    }

    pub fn indices(&self) -> &[usize] {
        &self.marked
    }

    pub fn len(&self) -> usize {
        self.marked.len()
    }

    pub fn is_empty(&self) -> bool {
        self.marked.is_empty()
    }
}

/// An immutable conforming triangulation. `bisect` returns a new mesh.
#[derive(Clone, Debug)]
pub struct Mesh {
    pub vertices: Vec<Pt>,
    pub triangles: Vec<Triangle>,
    pub edges: Vec<Edge>,
    /// Per-triangle edge ids; entry k is the edge opposite local vertex k.
    pub tri_edges: Vec<[usize; 3]>,
    pub domain: DomainKind,
    /// Tags of non-interior edges keyed by sorted vertex pair; carried
    /// through refinement so children inherit their parent's tag.
    pub(crate) tag_map: BTreeMap<(usize, usize), EdgeTag>,
    pub(crate) locator: locate::Locator,
}

impl Mesh {
    /// Builds a mesh from raw vertex and triangle arrays plus the tags of
    /// non-interior edges, deriving edge incidence and the point locator.
    pub fn finalize(
        vertices: Vec<Pt>,
        triangles: Vec<Triangle>,
        domain: DomainKind,
        tag_map: BTreeMap<(usize, usize), EdgeTag>,
    ) -> Result<Mesh> {
        let mut edge_ids: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut edges: Vec<Edge> = Vec::new();
        let mut tri_edges = vec![[usize::MAX; 3]; triangles.len()];
        for (t, tri) in triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
                let key = (a.min(b), a.max(b));
                let id = *edge_ids.entry(key).or_insert_with(|| {
                    edges.push(Edge {
                        v: [key.0, key.1],
                        tri: [NO_TRI, NO_TRI],
                        tag: *tag_map.get(&key).unwrap_or(&EdgeTag::Interior),
                    });
                    edges.len() - 1
                });
                let e = &mut edges[id];
                if e.tri[0] == NO_TRI {
                    e.tri[0] = t;
                } else if e.tri[1] == NO_TRI {
                    e.tri[1] = t;
                } else {
                    return Err(Error::Geometry(format!(
                        "edge {key:?} shared by more than two triangles"
                    )));
                }
                tri_edges[t][k] = id;
            }
        }
        let locator = locate::Locator::build(&vertices, &triangles);
        Ok(Mesh { vertices, triangles, edges, tri_edges, domain, tag_map, locator })
    }

    pub fn triangle_points(&self, t: usize) -> [Pt; 3] {
        let v = self.triangles[t].v;
        [self.vertices[v[0]], self.vertices[v[1]], self.vertices[v[2]]]
    }

    /// Triangle diameter h_K (longest edge).
    pub fn h_k(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        a.dist(b).max(b.dist(c)).max(c.dist(a))
    }

    /// Edge length h_e.
    pub fn h_e(&self, e: usize) -> f64 {
        let ed = &self.edges[e];
        self.vertices[ed.v[0]].dist(self.vertices[ed.v[1]])
    }

    pub fn area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        0.5 * (b - a).cross(c - a)
    }

    pub fn centroid(&self, t: usize) -> Pt {
        let [a, b, c] = self.triangle_points(t);
        (a + b + c) * (1.0 / 3.0)
    }

    pub fn total_area(&self) -> f64 {
        (0..self.triangles.len()).map(|t| self.area(t)).sum()
    }

    /// Smallest interior angle over all triangles, in radians.
    pub fn min_angle(&self) -> f64 {
        let mut best = f64::INFINITY;
        for t in 0..self.triangles.len() {
            let [a, b, c] = self.triangle_points(t);
            for (p, q, r) in [(a, b, c), (b, c, a), (c, a, b)] {
                let u = q - p;
                let w = r - p;
                let angle = (u.dot(w) / (u.norm() * w.norm())).clamp(-1.0, 1.0).acos();
                best = best.min(angle);
            }
        }
        best
    }

    /// Bisects all marked triangles at least once, with recursive closure
    /// bisections so the result is conforming.
    pub fn bisect(&self, marks: &RefinementMarks) -> Mesh {
        refine::bisect(self, marks)
    }

    /// Containing triangle and barycentric coordinates of a point.
    pub fn locate(&self, p: Pt) -> Result<(usize, [f64; 3])> {
        self.locator.locate(self, p)
    }

    /// Structural checks: edge-triangle incidence, orientation, boundary
    /// tagging completeness, region well-definedness.
    pub fn conformity_audit(&self) -> Result<()> {
        for (t, _) in self.triangles.iter().enumerate() {
            if self.area(t) <= 0.0 {
                return Err(Error::Geometry(format!("triangle {t} not positively oriented")));
            }
        }
        for (i, e) in self.edges.iter().enumerate() {
            if e.tri[0] == NO_TRI {
                return Err(Error::Geometry(format!("edge {i} has no adjacent triangle")));
            }
            if e.is_boundary() && e.tag == EdgeTag::Interior {
                return Err(Error::Geometry(format!(
                    "boundary edge {i} ({:?}) carries no boundary tag",
                    e.v
                )));
            }
        }
        // every triangle's edges point back at it
        for (t, es) in self.tri_edges.iter().enumerate() {
            for &e in es {
                if !self.edges[e].tri.contains(&t) {
                    return Err(Error::Geometry(format!("edge {e} does not reference triangle {t}")));
                }
            }
        }
        Ok(())
    }

    /// Number of mesh vertices (nodal points of the P1 space).
    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    /// Writes the mesh (and optional data arrays) as VTK legacy ASCII.
    pub fn write_vtk<W: Write>(
        &self,
        out: &mut W,
        point_data: &[(&str, &[f64])],
        cell_data: &[(&str, &[f64])],
    ) -> Result<()> {
        writeln!(out, "# vtk DataFile Version 3.0")?;
        writeln!(out, "cavity-scatter mesh")?;
        writeln!(out, "ASCII")?;
        writeln!(out, "DATASET UNSTRUCTURED_GRID")?;
        writeln!(out, "POINTS {} double", self.vertices.len())?;
        for v in &self.vertices {
            writeln!(out, "{:.17e} {:.17e} 0.0", v.x, v.y)?;
        }
        writeln!(out, "CELLS {} {}", self.triangles.len(), 4 * self.triangles.len())?;
        for t in &self.triangles {
            writeln!(out, "3 {} {} {}", t.v[0], t.v[1], t.v[2])?;
        }
        writeln!(out, "CELL_TYPES {}", self.triangles.len())?;
        for _ in &self.triangles {
            writeln!(out, "5")?;
        }
        if !point_data.is_empty() {
            writeln!(out, "POINT_DATA {}", self.vertices.len())?;
            for (name, values) in point_data {
                debug_assert_eq!(values.len(), self.vertices.len());
                writeln!(out, "SCALARS {name} double 1")?;
                writeln!(out, "LOOKUP_TABLE default")?;
                for v in *values {
                    writeln!(out, "{v:.17e}")?;
                }
            }
        }
        let region_data: Vec<f64> = self
            .triangles
            .iter()
            .map(|t| match t.region {
                Region::Interior => 0.0,
                Region::Pml => 1.0,
                Region::Material(i) => 2.0 + i as f64,
            })
            .collect();
        writeln!(out, "CELL_DATA {}", self.triangles.len())?;
        writeln!(out, "SCALARS region double 1")?;
        writeln!(out, "LOOKUP_TABLE default")?;
        for v in &region_data {
            writeln!(out, "{v}")?;
        }
        for (name, values) in cell_data {
            debug_assert_eq!(values.len(), self.triangles.len());
            writeln!(out, "SCALARS {name} double 1")?;
            writeln!(out, "LOOKUP_TABLE default")?;
            for v in *values {
                writeln!(out, "{v:.17e}")?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::pt;
    use crate::scenario::{manufactured_flat, preset, Polarization, Preset};

    fn example1_mesh() -> Mesh {
        let s = preset(Preset::Example1Empty);
        initial_mesh(&s, s.wavelength() / 8.0, DomainKind::PmlDomain).unwrap()
    }

    #[test]
    fn initial_mesh_is_conforming_and_tagged() {
        let mesh = example1_mesh();
        mesh.conformity_audit().unwrap();
        assert!(mesh.triangles.len() > 100);
        // ground edges sit on x2 = 0
        let mut counts = BTreeMap::new();
        for e in &mesh.edges {
            *counts.entry(format!("{:?}", e.tag)).or_insert(0usize) += 1;
            if e.tag == EdgeTag::Ground {
                assert!(mesh.vertices[e.v[0]].y == 0.0 && mesh.vertices[e.v[1]].y == 0.0);
            }
        }
        assert!(counts.contains_key("Ground"), "tags: {counts:?}");
        assert!(counts.contains_key("Wall"));
        assert!(counts.contains_key("InterfaceR"));
        assert!(counts.contains_key("OuterRho"));
        // every boundary edge carries a non-interior tag (audit also checks)
        for e in mesh.edges.iter().filter(|e| e.is_boundary()) {
            assert_ne!(e.tag, EdgeTag::Interior);
        }
    }

    #[test]
    fn tbc_mesh_stays_inside_inner_radius() {
        let s = preset(Preset::Example1Empty);
        let mesh = initial_mesh(&s, s.wavelength() / 8.0, DomainKind::TbcDomain).unwrap();
        mesh.conformity_audit().unwrap();
        for t in 0..mesh.triangles.len() {
            let c = mesh.centroid(t);
            assert!(
                c.norm() <= s.r_inner * (1.0 + 1e-9) || c.y < 0.0,
                "centroid {c:?} outside B_R^+"
            );
            assert!(!mesh.triangles[t].region.is_pml());
        }
        // outer boundary of the TBC mesh is the Gamma_R polyline
        assert!(mesh
            .edges
            .iter()
            .any(|e| e.is_boundary() && e.tag == EdgeTag::InterfaceR));
    }

    #[test]
    fn regions_partition_and_respect_interface() {
        let s = preset(Preset::Example1Lossy);
        let mesh = initial_mesh(&s, s.wavelength() / 8.0, DomainKind::PmlDomain).unwrap();
        let mut interior = 0;
        let mut pml = 0;
        let mut material = 0;
        for t in 0..mesh.triangles.len() {
            match mesh.triangles[t].region {
                Region::Interior => interior += 1,
                Region::Pml => pml += 1,
                Region::Material(0) => material += 1,
                r => panic!("unexpected region {r:?}"),
            }
            // no triangle straddles the Gamma_R polyline: all three
            // vertices of a PML triangle have r >= R(1 - tol), all of an
            // interior one r <= R(1 + tol) when above ground
            let pts = mesh.triangle_points(t);
            match mesh.triangles[t].region {
                Region::Pml => {
                    for p in pts {
                        assert!(p.norm() >= s.r_inner * (1.0 - 1e-6));
                    }
                }
                _ => {
                    for p in pts {
                        assert!(p.norm() <= s.r_inner * (1.0 + 1e-6) || p.y <= 1e-12);
                    }
                }
            }
        }
        assert!(interior > 0 && pml > 0 && material > 0);
    }

    #[test]
    fn bisect_empty_marks_is_identity() {
        let mesh = example1_mesh();
        let out = mesh.bisect(&RefinementMarks::new(vec![]));
        assert_eq!(out.triangles.len(), mesh.triangles.len());
        assert_eq!(out.vertices.len(), mesh.vertices.len());
    }

    #[test]
    fn bisect_single_triangle_in_square() {
        // two triangles sharing the diagonal; marking one must also split
        // the neighbor when the shared edge is the refinement edge
        let verts = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
        let mut tags = BTreeMap::new();
        for (a, b) in [(0usize, 1usize), (1, 2), (2, 3), (3, 0)] {
            tags.insert((a.min(b), a.max(b)), EdgeTag::Wall);
        }
        // diagonal (0, 2) is the longest edge of both, so peaks point at it
        let tris = vec![
            Triangle { v: [0, 1, 2], peak: 1, region: Region::Interior },
            Triangle { v: [0, 2, 3], peak: 2, region: Region::Interior },
        ];
        let mesh = Mesh::finalize(verts, tris, DomainKind::PmlDomain, tags).unwrap();
        let out = mesh.bisect(&RefinementMarks::new(vec![0]));
        out.conformity_audit().unwrap();
        // both triangles split once: 4 children, no hanging node
        assert_eq!(out.triangles.len(), 4);
        assert_eq!(out.vertices.len(), 5);
        assert!((out.total_area() - mesh.total_area()).abs() < 1e-14);
    }

    #[test]
    fn uniform_double_bisection_halves_original_edges() {
        let mesh = example1_mesh();
        let all: Vec<usize> = (0..mesh.triangles.len()).collect();
        let once = mesh.bisect(&RefinementMarks::new(all.clone()));
        let all2: Vec<usize> = (0..once.triangles.len()).collect();
        let twice = once.bisect(&RefinementMarks::new(all2));
        twice.conformity_audit().unwrap();
        // every original edge midpoint is now a vertex
        let have: std::collections::BTreeSet<(u64, u64)> = twice
            .vertices
            .iter()
            .map(|p| (p.x.to_bits(), p.y.to_bits()))
            .collect();
        for e in &mesh.edges {
            let m = mesh.vertices[e.v[0]].mid(mesh.vertices[e.v[1]]);
            assert!(
                have.contains(&(m.x.to_bits(), m.y.to_bits())),
                "edge midpoint {m:?} missing after double uniform bisection"
            );
        }
        // area exactly conserved, minimum angle bounded by half the initial
        assert!((twice.total_area() / mesh.total_area() - 1.0).abs() < 1e-12);
        assert!(twice.min_angle() >= 0.5 * mesh.min_angle() - 1e-12);
    }

    #[test]
    fn repeated_random_marking_preserves_invariants() {
        let mesh = example1_mesh();
        let initial_area = mesh.total_area();
        let initial_angle = mesh.min_angle();
        let mut current = mesh;
        let mut state = 0x853C49E6748FEA9Bu64;
        for round in 0..10 {
            let mut marked = Vec::new();
            for t in 0..current.triangles.len() {
                state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
                if (state >> 33) % 5 == 0 {
                    marked.push(t);
                }
            }
            current = current.bisect(&RefinementMarks::new(marked));
            current.conformity_audit().unwrap();
            assert!(
                (current.total_area() / initial_area - 1.0).abs() < 1e-12,
                "area drift at round {round}"
            );
        }
        assert!(current.min_angle() >= 0.5 * initial_angle - 1e-12);
        assert!(current.triangles.len() > 2 * 100);
    }

    #[test]
    fn locate_centroid_vertex_and_outside() {
        let mesh = example1_mesh();
        let (t, bary) = mesh.locate(mesh.centroid(7)).unwrap();
        assert_eq!(t, 7);
        for b in bary {
            assert!((b - 1.0 / 3.0).abs() < 1e-9);
        }
        // a shared vertex: any incident triangle with one coordinate 1
        let v = mesh.triangles[0].v[0];
        let (t2, bary2) = mesh.locate(mesh.vertices[v]).unwrap();
        assert!(mesh.triangles[t2].v.contains(&v));
        assert!(bary2.iter().any(|&b| (b - 1.0).abs() < 1e-9));
        // far outside
        let s = preset(Preset::Example1Empty);
        assert!(matches!(
            mesh.locate(pt(3.0 * s.r_outer, 0.1)),
            Err(Error::PointNotFound(_, _))
        ));
    }

    #[test]
    fn humps_are_excluded_with_wall_tags() {
        let s = preset(Preset::Example3Humps);
        let mesh = initial_mesh(&s, s.wavelength() / 8.0, DomainKind::PmlDomain).unwrap();
        mesh.conformity_audit().unwrap();
        // no triangle centroid inside either hump
        for t in 0..mesh.triangles.len() {
            let c = mesh.centroid(t);
            for hump in &s.protrusions {
                assert!(!crate::geom::point_in_polygon(hump, c));
            }
        }
        // hump boundary above the cavity floor is tagged Wall
        let lambda = s.wavelength();
        let wall_above_ground = mesh.edges.iter().any(|e| {
            e.tag == EdgeTag::Wall
                && mesh.vertices[e.v[0]].y > 0.05 * lambda
                && mesh.vertices[e.v[1]].y > 0.05 * lambda
        });
        assert!(wall_above_ground, "protruding hump must contribute walls above ground");
    }

    #[test]
    fn flat_ground_mesh_has_no_cavity() {
        let s = manufactured_flat(Polarization::TM, 0.3, 8.0 * std::f64::consts::PI);
        let mesh = initial_mesh(&s, s.wavelength() / 8.0, DomainKind::PmlDomain).unwrap();
        mesh.conformity_audit().unwrap();
        for v in &mesh.vertices {
            assert!(v.y >= -1e-12);
        }
    }

    #[test]
    fn vtk_export_roundtrip_point_count() {
        let mesh = example1_mesh();
        let mut buf = Vec::new();
        let zeros = vec![0.0; mesh.vertices.len()];
        mesh.write_vtk(&mut buf, &[("re_u", &zeros)], &[]).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains(&format!("POINTS {} double", mesh.vertices.len())));
        let pts_lines = text
            .lines()
            .skip_while(|l| !l.starts_with("POINTS"))
            .skip(1)
            .take_while(|l| !l.starts_with("CELLS"))
            .count();
        assert_eq!(pts_lines, mesh.vertices.len());
    }
}
