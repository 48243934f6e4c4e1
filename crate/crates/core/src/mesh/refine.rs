//! Newest-vertex bisection with recursive conformity closure.
//!
//! Each triangle stores the local index of its newest vertex (`peak`);
//! the refinement edge is the edge opposite it. Bisecting assigns the new
//! midpoint as the peak of both children, so their refinement edges are
//! the parent's other two edges. Initial peaks point at the longest edge
//! with an index tie-break, which makes neighbor chains acyclic.

use super::{EdgeTag, Mesh, RefinementMarks, Triangle};
use crate::geom::Pt;
use std::collections::BTreeMap;

struct Work {
    vertices: Vec<Pt>,
    triangles: Vec<Triangle>,
    alive: Vec<bool>,
    /// Adjacency of alive triangles per undirected edge.
    edge_tris: BTreeMap<(usize, usize), Vec<usize>>,
    /// Midpoint vertex of an already split edge.
    midpoints: BTreeMap<(usize, usize), usize>,
    tags: BTreeMap<(usize, usize), EdgeTag>,
}

fn key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

impl Work {
    fn ref_edge(&self, t: usize) -> (usize, usize) {
        self.triangles[t].refinement_edge()
    }

    fn neighbor_across(&self, t: usize, e: (usize, usize)) -> Option<usize> {
        self.edge_tris
            .get(&key(e.0, e.1))
            .and_then(|list| list.iter().copied().find(|&u| u != t && self.alive[u]))
    }

    fn detach(&mut self, t: usize) {
        let v = self.triangles[t].v;
        for k in 0..3 {
            let e = key(v[(k + 1) % 3], v[(k + 2) % 3]);
            if let Some(list) = self.edge_tris.get_mut(&e) {
                list.retain(|&u| u != t);
            }
        }
        self.alive[t] = false;
    }

    fn attach(&mut self, tri: Triangle) -> usize {
        let t = self.triangles.len();
        self.triangles.push(tri);
        self.alive.push(true);
        let v = tri.v;
        for k in 0..3 {
            let e = key(v[(k + 1) % 3], v[(k + 2) % 3]);
            self.edge_tris.entry(e).or_default().push(t);
        }
        t
    }

    fn midpoint(&mut self, e: (usize, usize)) -> usize {
        let k = key(e.0, e.1);
        if let Some(&m) = self.midpoints.get(&k) {
            return m;
        }
        let m = self.vertices.len();
        self.vertices.push(self.vertices[k.0].mid(self.vertices[k.1]));
        self.midpoints.insert(k, m);
        // children of a tagged edge inherit the tag
        if let Some(tag) = self.tags.remove(&k) {
            self.tags.insert(key(k.0, m), tag);
            self.tags.insert(key(k.1, m), tag);
        }
        m
    }

    /// Splits `t` at its refinement edge, assuming the midpoint exists.
    fn split(&mut self, t: usize, m: usize) {
        let tri = self.triangles[t];
        let p = tri.peak as usize;
        let (c, a, b) = (tri.v[p], tri.v[(p + 1) % 3], tri.v[(p + 2) % 3]);
        self.detach(t);
        // children (a, m, c) and (m, b, c), both with peak m, keep ccw
        self.attach(Triangle { v: [a, m, c], peak: 1, region: tri.region });
        self.attach(Triangle { v: [m, b, c], peak: 0, region: tri.region });
    }

    /// Bisects triangle `t`, first making the neighbor across the
    /// refinement edge compatible.
    fn refine(&mut self, t: usize) {
        if !self.alive[t] {
            return;
        }
        let e = self.ref_edge(t);
        while let Some(n) = self.neighbor_across(t, e) {
            let ne = self.ref_edge(n);
            if key(ne.0, ne.1) == key(e.0, e.1) {
                break;
            }
            self.refine(n);
        }
        let m = self.midpoint(e);
        let neighbor = self.neighbor_across(t, e);
        self.split(t, m);
        if let Some(n) = neighbor {
            debug_assert_eq!(key(self.ref_edge(n).0, self.ref_edge(n).1), key(e.0, e.1));
            self.split(n, m);
        }
    }
}

pub(super) fn bisect(mesh: &Mesh, marks: &RefinementMarks) -> Mesh {
    if marks.is_empty() {
        return mesh.clone();
    }
    let mut edge_tris: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
    for (t, tri) in mesh.triangles.iter().enumerate() {
        for k in 0..3 {
            let e = key(tri.v[(k + 1) % 3], tri.v[(k + 2) % 3]);
            edge_tris.entry(e).or_default().push(t);
        }
    }
    let mut work = Work {
        vertices: mesh.vertices.clone(),
        triangles: mesh.triangles.clone(),
        alive: vec![true; mesh.triangles.len()],
        edge_tris,
        midpoints: BTreeMap::new(),
        tags: mesh.tag_map.clone(),
    };
    for &t in marks.indices() {
        work.refine(t);
    }
    let keep: Vec<Triangle> = work
        .triangles
        .iter()
        .zip(&work.alive)
        .filter(|(_, &alive)| alive)
        .map(|(t, _)| *t)
        .collect();
    Mesh::finalize(work.vertices, keep, mesh.domain, work.tags)
        .expect("bisection preserves conformity")
}
