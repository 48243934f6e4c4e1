//! Symmetric quadrature rules on the reference triangle and Gauss rules
//! on the unit interval. Triangle weights sum to one; integrals are the
//! weighted sum times the element area.

use crate::{Error, Result};

#[derive(Clone, Copy, Debug)]
pub struct TriRule {
    /// Reference coordinates (xi, eta) on the unit triangle.
    pub points: &'static [(f64, f64)],
    pub weights: &'static [f64],
}

const CENTROID: TriRule = TriRule { points: &[(1.0 / 3.0, 1.0 / 3.0)], weights: &[1.0] };

const DEG2: TriRule = TriRule {
    points: &[
        (1.0 / 6.0, 1.0 / 6.0),
        (2.0 / 3.0, 1.0 / 6.0),
        (1.0 / 6.0, 2.0 / 3.0),
    ],
    weights: &[1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0],
};

// six-point rule, exact to degree 4
const A1: f64 = 0.445_948_490_915_965;
const A2: f64 = 0.091_576_213_509_771;
const W1: f64 = 0.223_381_589_678_011;
const W2: f64 = 0.109_951_743_655_322;
const DEG4: TriRule = TriRule {
    points: &[
        (A1, A1),
        (1.0 - 2.0 * A1, A1),
        (A1, 1.0 - 2.0 * A1),
        (A2, A2),
        (1.0 - 2.0 * A2, A2),
        (A2, 1.0 - 2.0 * A2),
    ],
    weights: &[W1, W1, W1, W2, W2, W2],
};

// twelve-point rule, exact to degree 6
const B1: f64 = 0.249_286_745_170_910;
const B2: f64 = 0.063_089_014_491_502;
const C1: f64 = 0.310_352_451_033_785;
const C2: f64 = 0.053_145_049_844_816;
const WB1: f64 = 0.116_786_275_726_379;
const WB2: f64 = 0.050_844_906_370_207;
const WC: f64 = 0.082_851_075_618_374;
const DEG6: TriRule = TriRule {
    points: &[
        (B1, B1),
        (1.0 - 2.0 * B1, B1),
        (B1, 1.0 - 2.0 * B1),
        (B2, B2),
        (1.0 - 2.0 * B2, B2),
        (B2, 1.0 - 2.0 * B2),
        (C1, C2),
        (C2, C1),
        (1.0 - C1 - C2, C1),
        (1.0 - C1 - C2, C2),
        (C1, 1.0 - C1 - C2),
        (C2, 1.0 - C1 - C2),
    ],
    weights: &[WB1, WB1, WB1, WB2, WB2, WB2, WC, WC, WC, WC, WC, WC],
};

/// Smallest stored rule exact for polynomials of the given total degree.
pub fn triangle_rule(degree: usize) -> Result<&'static TriRule> {
    match degree {
        0 | 1 => Ok(&CENTROID),
        2 => Ok(&DEG2),
        3 | 4 => Ok(&DEG4),
        5 | 6 => Ok(&DEG6),
        d => Err(Error::Quadrature(d)),
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GaussRule {
    /// Nodes on [0, 1].
    pub points: &'static [f64],
    pub weights: &'static [f64],
}

const G2: GaussRule = GaussRule {
    points: &[0.211_324_865_405_187_1, 0.788_675_134_594_812_9],
    weights: &[0.5, 0.5],
};

const G3: GaussRule = GaussRule {
    points: &[0.112_701_665_379_258_3, 0.5, 0.887_298_334_620_741_7],
    weights: &[5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0],
};

const G4: GaussRule = GaussRule {
    points: &[
        0.069_431_844_202_973_7,
        0.330_009_478_207_571_9,
        0.669_990_521_792_428_1,
        0.930_568_155_797_026_3,
    ],
    weights: &[
        0.173_927_422_568_727,
        0.326_072_577_431_273,
        0.326_072_577_431_273,
        0.173_927_422_568_727,
    ],
};

/// Smallest Gauss rule exact for 1-D polynomials of the given degree.
pub fn gauss_rule(degree: usize) -> Result<&'static GaussRule> {
    match degree {
        0..=3 => Ok(&G2),
        4 | 5 => Ok(&G3),
        6 | 7 => Ok(&G4),
        d => Err(Error::Quadrature(d)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn integrate_monomial(rule: &TriRule, p: u32, q: u32) -> f64 {
        // over the unit triangle, area 1/2
        rule.points
            .iter()
            .zip(rule.weights)
            .map(|(&(x, y), &w)| w * x.powi(p as i32) * y.powi(q as i32))
            .sum::<f64>()
            * 0.5
    }

    fn exact_monomial(p: u32, q: u32) -> f64 {
        // int_T xi^p eta^q = p! q! / (p + q + 2)!
        let fact = |n: u32| (1..=n as u64).product::<u64>() as f64;
        fact(p) * fact(q) / fact(p + q + 2)
    }

    #[test]
    fn triangle_rules_are_exact_to_their_degree() {
        for (deg, rule) in [(1, &CENTROID), (2, &DEG2), (4, &DEG4), (6, &DEG6)] {
            for p in 0..=deg {
                for q in 0..=(deg - p) {
                    let got = integrate_monomial(rule, p as u32, q as u32);
                    let want = exact_monomial(p as u32, q as u32);
                    assert!(
                        (got - want).abs() < 1e-14,
                        "rule deg {deg} monomial x^{p} y^{q}: {got} vs {want}"
                    );
                }
            }
        }
    }

    #[test]
    fn gauss_rules_are_exact_to_their_degree() {
        for (deg, rule) in [(3usize, &G2), (5, &G3), (7, &G4)] {
            for p in 0..=deg {
                let got: f64 = rule
                    .points
                    .iter()
                    .zip(rule.weights)
                    .map(|(&x, &w)| w * x.powi(p as i32))
                    .sum();
                let want = 1.0 / (p as f64 + 1.0);
                assert!((got - want).abs() < 1e-14, "deg {deg} x^{p}: {got} vs {want}");
            }
        }
    }

    #[test]
    fn unknown_degree_is_an_error() {
        assert!(matches!(triangle_rule(9), Err(Error::Quadrature(9))));
        assert!(matches!(gauss_rule(11), Err(Error::Quadrature(11))));
    }
}
