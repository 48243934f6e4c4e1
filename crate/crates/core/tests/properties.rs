//! Property tests for the stretching profile and bisection invariants.

use cavity_scatter::geom::pt;
use cavity_scatter::mesh::{DomainKind, EdgeTag, Mesh, RefinementMarks, Region, Triangle};
use cavity_scatter::pml::PmlMap;
use proptest::prelude::*;
use std::collections::BTreeMap;

fn square_mesh() -> Mesh {
    let verts = vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)];
    let mut tags = BTreeMap::new();
    for (a, b) in [(0usize, 1usize), (1, 2), (2, 3), (3, 0)] {
        tags.insert((a.min(b), a.max(b)), EdgeTag::Wall);
    }
    let tris = vec![
        Triangle { v: [0, 1, 2], peak: 1, region: Region::Interior },
        Triangle { v: [0, 2, 3], peak: 2, region: Region::Interior },
    ];
    Mesh::finalize(verts, tris, DomainKind::PmlDomain, tags).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    /// Any marking sequence keeps the mesh conforming, preserves the
    /// total area, and respects the similarity-class angle bound.
    #[test]
    fn bisection_preserves_invariants(rounds in prop::collection::vec(prop::collection::vec(any::<bool>(), 1..24), 1..5)) {
        let mut mesh = square_mesh();
        let area0 = mesh.total_area();
        let angle0 = mesh.min_angle();
        for round in rounds {
            let marked: Vec<usize> = round
                .iter()
                .enumerate()
                .filter(|&(t, &m)| m && t < mesh.triangles.len())
                .map(|(t, _)| t)
                .collect();
            mesh = mesh.bisect(&RefinementMarks::new(marked));
            mesh.conformity_audit().unwrap();
            prop_assert!((mesh.total_area() / area0 - 1.0).abs() < 1e-12);
        }
        prop_assert!(mesh.min_angle() >= 0.5 * angle0 - 1e-12);
    }

    /// Profile invariants hold for any admissible map: sigma_hat stays
    /// between 0 and sigma, the profile is continuous at R, and the
    /// weight stays in (0, 1].
    #[test]
    fn profile_invariants(
        r_inner in 1e-3f64..10.0,
        thickness in 1e-3f64..10.0,
        sigma0 in 1e-3f64..100.0,
        m_pml in 1u32..5,
        s in 0.0f64..1.0,
        kappa_scale in 0.1f64..50.0,
    ) {
        let map = PmlMap { r_inner, r_outer: r_inner + thickness, sigma0, m_pml };
        let r = r_inner + s * thickness;
        let prof = map.profile(r);
        prop_assert!(prof.sigma_hat >= 0.0);
        prop_assert!(prof.sigma_hat <= prof.sigma + 1e-12);
        let eps = 1e-9 * r_inner;
        let below = map.profile(r_inner - eps);
        let above = map.profile(r_inner + eps);
        prop_assert!((below.sigma - above.sigma).abs() < 1e-6 * sigma0.max(1.0));
        prop_assert!((below.sigma_hat - above.sigma_hat).abs() < 1e-6 * sigma0.max(1.0));
        let kappa0 = kappa_scale / r_inner;
        let w = map.weight(kappa0, pt(r * 0.6, r * 0.8));
        prop_assert!(w <= 1.0, "w = {w}");
        // positivity holds whenever the decay exponent is representable;
        // beyond ~700 the exponential underflows to zero in f64
        if map.weight_exponent(kappa0, r) < 700.0 {
            prop_assert!(w > 0.0, "w = {w}");
        }
    }
}
