//! Initial triangulation: boundary and interface polylines are collected
//! into a constrained Delaunay triangulation which is refined to the
//! target mesh size, then triangles are extracted, labeled by region, and
//! their edges tagged.

use super::{DomainKind, EdgeTag, Mesh, Region, Triangle};
use crate::geom::{self, pt, Pt};
use crate::scenario::Scenario;
use crate::{Error, Result};
use spade::{
    AngleLimit, ConstrainedDelaunayTriangulation, Point2, RefinementParameters, Triangulation,
};
use std::collections::BTreeMap;

/// A constraint segment with the tag its mesh edges will carry.
#[derive(Clone, Copy, Debug)]
struct Segment {
    a: Pt,
    b: Pt,
    tag: EdgeTag,
}

/// Conforming triangulation of the requested domain at mesh size
/// `target_h`. Semicircles are approximated by `n_arc`-segment polylines
/// whose corner vertices lie exactly on the circles; cavity corners,
/// material corners and aperture endpoints appear as mesh vertices.
pub fn initial_mesh(scenario: &Scenario, target_h: f64, domain: DomainKind) -> Result<Mesh> {
    scenario.validate()?;
    if !(target_h > 0.0) {
        return Err(Error::Invariant("target_h > 0".into()));
    }
    let r_max = match domain {
        DomainKind::PmlDomain => scenario.r_outer,
        DomainKind::TbcDomain => scenario.r_inner,
    };

    let inner_arc = semicircle(scenario.r_inner, scenario.n_arc);
    let outer_arc = semicircle(scenario.r_outer, scenario.n_arc);

    let mut segments: Vec<Segment> = Vec::new();
    polyline_segments(&inner_arc, EdgeTag::InterfaceR, &mut segments);
    if domain == DomainKind::PmlDomain {
        polyline_segments(&outer_arc, EdgeTag::OuterRho, &mut segments);
    }

    // ground: [-r_max, r_max] minus the aperture and protrusion spans
    let hump_spans: Vec<(f64, f64)> = scenario
        .protrusions
        .iter()
        .flat_map(|h| geom::ground_spans(h))
        .collect();
    let tol = 1e-12 * r_max;
    let mut blocked: Vec<(f64, f64)> = hump_spans.clone();
    if let Some(span) = scenario.aperture_span() {
        blocked.push(span);
    }
    for (lo, hi) in subtract_spans(-r_max, r_max, &blocked, tol) {
        segments.push(Segment { a: pt(lo, 0.0), b: pt(hi, 0.0), tag: EdgeTag::Ground });
    }

    // cavity walls and aperture line; the aperture is an interior
    // interface (so labels never straddle the ground line) with the parts
    // covered by a protruding hump removed
    let n = scenario.cavity.len();
    for i in 0..n {
        let (a, b) = (scenario.cavity[i], scenario.cavity[(i + 1) % n]);
        if a.y == 0.0 && b.y == 0.0 {
            let (x0, x1) = (a.x.min(b.x), a.x.max(b.x));
            for (lo, hi) in subtract_spans(x0, x1, &hump_spans, tol) {
                segments.push(Segment { a: pt(lo, 0.0), b: pt(hi, 0.0), tag: EdgeTag::Interior });
            }
        } else {
            segments.push(Segment { a, b, tag: EdgeTag::Wall });
        }
    }
    for hump in &scenario.protrusions {
        let m = hump.len();
        for i in 0..m {
            segments.push(Segment { a: hump[i], b: hump[(i + 1) % m], tag: EdgeTag::Wall });
        }
    }
    for mat in &scenario.materials {
        let m = mat.polygon.len();
        for i in 0..m {
            segments.push(Segment {
                a: mat.polygon[i],
                b: mat.polygon[(i + 1) % m],
                tag: EdgeTag::Interior,
            });
        }
    }

    let segments = split_overlaps(segments, 1e-9 * r_max)?;

    // deduplicated vertex set in deterministic order
    let mut vertex_ids: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut points: Vec<Pt> = Vec::new();
    let mut id_of = |p: Pt, points: &mut Vec<Pt>| -> usize {
        let key = point_key(p);
        *vertex_ids.entry(key).or_insert_with(|| {
            points.push(p);
            points.len() - 1
        })
    };
    let mut constraint_pairs: Vec<(usize, usize, EdgeTag)> = Vec::new();
    for seg in &segments {
        let ia = id_of(seg.a, &mut points);
        let ib = id_of(seg.b, &mut points);
        if ia != ib {
            constraint_pairs.push((ia, ib, seg.tag));
        }
    }

    let mut cdt: ConstrainedDelaunayTriangulation<Point2<f64>> =
        ConstrainedDelaunayTriangulation::new();
    let mut handles = Vec::with_capacity(points.len());
    for p in &points {
        let h = cdt
            .insert(Point2::new(p.x, p.y))
            .map_err(|e| Error::Geometry(format!("vertex insertion failed: {e:?}")))?;
        handles.push(h);
    }
    for &(ia, ib, _) in &constraint_pairs {
        cdt.add_constraint(handles[ia], handles[ib]);
    }

    // The interface polyline and the aperture split the hull interior into
    // several regions that all touch the hull, which defeats spade's
    // parity-based outer-face exclusion; refine everything inside the hull
    // instead and drop out-of-domain triangles during extraction.
    let max_area = 0.4330127018922193 * target_h * target_h; // equilateral of side h
    let hull_area = std::f64::consts::FRAC_PI_2 * r_max * r_max
        + 4.0 * geom::signed_area(&scenario.cavity).abs();
    let vertex_budget = ((hull_area / max_area) as usize + 1000) * 20;
    let refinement = cdt.refine(
        RefinementParameters::<f64>::new()
            .with_max_allowed_area(max_area)
            .with_angle_limit(AngleLimit::from_deg(28.0))
            .with_max_additional_vertices(vertex_budget),
    );
    if !refinement.refinement_complete {
        return Err(Error::Geometry(format!(
            "mesh refinement hit the vertex budget {vertex_budget} before reaching target_h = {target_h}"
        )));
    }

    extract(scenario, domain, &cdt, &segments, &inner_arc, &outer_arc, r_max)
}

/// Polyline along the upper semicircle of the given radius; endpoint
/// coordinates are snapped exactly onto the ground line.
fn semicircle(radius: f64, n_arc: usize) -> Vec<Pt> {
    let mut out = Vec::with_capacity(n_arc + 1);
    for k in 0..=n_arc {
        let phi = k as f64 * std::f64::consts::PI / n_arc as f64;
        let mut p = pt(radius * phi.cos(), radius * phi.sin());
        if k == 0 {
            p = pt(radius, 0.0);
        } else if k == n_arc {
            p = pt(-radius, 0.0);
        }
        out.push(p);
    }
    out
}

fn polyline_segments(poly: &[Pt], tag: EdgeTag, out: &mut Vec<Segment>) {
    for w in poly.windows(2) {
        out.push(Segment { a: w[0], b: w[1], tag });
    }
}

/// The interval [x0, x1] minus a set of spans, as kept sub-intervals.
fn subtract_spans(x0: f64, x1: f64, spans: &[(f64, f64)], tol: f64) -> Vec<(f64, f64)> {
    let mut blocked: Vec<(f64, f64)> = spans.to_vec();
    blocked.sort_by(|p, q| p.partial_cmp(q).unwrap());
    let mut out = Vec::new();
    let mut cursor = x0;
    for &(lo, hi) in &blocked {
        if lo - cursor > tol {
            out.push((cursor, lo.min(x1)));
        }
        cursor = cursor.max(hi);
        if cursor >= x1 {
            break;
        }
    }
    if x1 - cursor > tol {
        out.push((cursor, x1));
    }
    out
}

fn point_key(p: Pt) -> (u64, u64) {
    // +0.0 collapses the two signed zeros
    ((p.x + 0.0).to_bits(), (p.y + 0.0).to_bits())
}

/// Splits segments at endpoints of other segments lying in their interior
/// (T-junctions, collinear overlaps) and removes duplicates. Proper
/// crossings are geometry errors.
fn split_overlaps(segments: Vec<Segment>, tol: f64) -> Result<Vec<Segment>> {
    let endpoints: Vec<Pt> = segments.iter().flat_map(|s| [s.a, s.b]).collect();
    let mut out: Vec<Segment> = Vec::new();
    for (i, seg) in segments.iter().enumerate() {
        for (j, other) in segments.iter().enumerate() {
            if i != j && geom::segments_cross_properly(seg.a, seg.b, other.a, other.b) {
                return Err(Error::Geometry(format!(
                    "constraint segments cross: {:?}-{:?} and {:?}-{:?}",
                    seg.a, seg.b, other.a, other.b
                )));
            }
        }
        let dir = seg.b - seg.a;
        let len2 = dir.dot(dir);
        let mut cuts: Vec<(f64, Pt)> = vec![(0.0, seg.a), (1.0, seg.b)];
        for &p in &endpoints {
            if p == seg.a || p == seg.b {
                continue;
            }
            if geom::point_on_segment(p, seg.a, seg.b, tol) {
                let t = (p - seg.a).dot(dir) / len2;
                if t > 0.0 && t < 1.0 {
                    cuts.push((t, p));
                }
            }
        }
        cuts.sort_by(|x, y| x.0.partial_cmp(&y.0).unwrap());
        for w in cuts.windows(2) {
            if w[1].1 != w[0].1 {
                out.push(Segment { a: w[0].1, b: w[1].1, tag: seg.tag });
            }
        }
    }
    // duplicates: overlapping constraints keep the boundary tag (walls and
    // material interfaces coincide along coated cavity sides)
    let mut seen: BTreeMap<((u64, u64), (u64, u64)), usize> = BTreeMap::new();
    let mut dedup: Vec<Segment> = Vec::new();
    for seg in out {
        let (ka, kb) = (point_key(seg.a), point_key(seg.b));
        let key = if ka < kb { (ka, kb) } else { (kb, ka) };
        match seen.get(&key) {
            Some(&idx) => {
                if dedup[idx].tag == EdgeTag::Interior {
                    dedup[idx].tag = seg.tag;
                }
            }
            None => {
                seen.insert(key, dedup.len());
                dedup.push(seg);
            }
        }
    }
    Ok(dedup)
}

fn extract(
    scenario: &Scenario,
    domain: DomainKind,
    cdt: &ConstrainedDelaunayTriangulation<Point2<f64>>,
    segments: &[Segment],
    inner_arc: &[Pt],
    outer_arc: &[Pt],
    r_max: f64,
) -> Result<Mesh> {
    // closed polygons for containment tests
    let inner_poly: Vec<Pt> = inner_arc.to_vec();
    let in_upper_disc = |p: Pt, poly: &[Pt]| geom::point_in_polygon(poly, p);
    let in_domain = |c: Pt| -> bool {
        for hump in &scenario.protrusions {
            if geom::point_in_polygon(hump, c) {
                return false;
            }
        }
        if c.y < 0.0 {
            !scenario.cavity.is_empty() && geom::point_in_polygon(&scenario.cavity, c)
        } else {
            match domain {
                DomainKind::PmlDomain => in_upper_disc(c, outer_arc),
                DomainKind::TbcDomain => in_upper_disc(c, inner_arc),
            }
        }
    };
    let region_of = |c: Pt| -> Region {
        if let Some(i) = scenario.material_at(c) {
            return Region::Material(i as u32);
        }
        if c.y < 0.0 || in_upper_disc(c, &inner_poly) {
            Region::Interior
        } else {
            Region::Pml
        }
    };

    let mut vertex_ids: BTreeMap<(u64, u64), usize> = BTreeMap::new();
    let mut vertices: Vec<Pt> = Vec::new();
    let mut triangles: Vec<Triangle> = Vec::new();
    for face in cdt.inner_faces() {
        let vs = face.vertices();
        let ps: Vec<Pt> = vs.iter().map(|v| pt(v.position().x, v.position().y)).collect();
        let centroid = (ps[0] + ps[1] + ps[2]) * (1.0 / 3.0);
        if !in_domain(centroid) {
            continue;
        }
        let mut idx = [0usize; 3];
        for k in 0..3 {
            let key = point_key(ps[k]);
            idx[k] = *vertex_ids.entry(key).or_insert_with(|| {
                vertices.push(ps[k]);
                vertices.len() - 1
            });
        }
        // ccw orientation (spade faces are ccw already; enforce anyway)
        if geom::orient2d(ps[0], ps[1], ps[2]) < 0.0 {
            idx.swap(1, 2);
        }
        triangles.push(Triangle { v: idx, peak: 0, region: region_of(centroid) });
    }
    if triangles.is_empty() {
        return Err(Error::Geometry("empty triangulation".into()));
    }

    // refinement edge = longest edge, ties broken by vertex indices so
    // neighbor chains cannot cycle
    for t in triangles.iter_mut() {
        let p = [vertices[t.v[0]], vertices[t.v[1]], vertices[t.v[2]]];
        let mut best = 0usize;
        let mut best_key = (f64::MIN, 0usize, 0usize);
        for k in 0..3 {
            let (a, b) = (t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
            let len = p[(k + 1) % 3].dist(p[(k + 2) % 3]);
            let key = (len, a.min(b), a.max(b));
            if key > best_key {
                best_key = key;
                best = k;
            }
        }
        t.peak = best as u8;
    }

    // edge tags from the constraint segments; split constraint edges have
    // both endpoints on the parent segment
    let tag_tol = 1e-9 * r_max;
    let mut tag_map: BTreeMap<(usize, usize), EdgeTag> = BTreeMap::new();
    let mut edge_count: BTreeMap<(usize, usize), u8> = BTreeMap::new();
    for t in &triangles {
        for k in 0..3 {
            let (a, b) = (t.v[(k + 1) % 3], t.v[(k + 2) % 3]);
            *edge_count.entry((a.min(b), a.max(b))).or_insert(0) += 1;
        }
    }
    for (&(a, b), &count) in &edge_count {
        let (pa, pb) = (vertices[a], vertices[b]);
        let tag = classify_edge(pa, pb, segments, tag_tol);
        match tag {
            Some(EdgeTag::Interior) | None => {
                if count == 1 {
                    return Err(Error::Geometry(format!(
                        "untagged boundary edge between {pa:?} and {pb:?}"
                    )));
                }
            }
            Some(t) => {
                tag_map.insert((a, b), t);
            }
        }
    }

    Mesh::finalize(vertices, triangles, domain, tag_map)
}

fn classify_edge(pa: Pt, pb: Pt, segments: &[Segment], tol: f64) -> Option<EdgeTag> {
    for seg in segments {
        if seg.tag == EdgeTag::Interior {
            continue;
        }
        if geom::point_on_segment(pa, seg.a, seg.b, tol)
            && geom::point_on_segment(pb, seg.a, seg.b, tol)
            && geom::point_on_segment(pa.mid(pb), seg.a, seg.b, tol)
        {
            return Some(seg.tag);
        }
    }
    None
}
