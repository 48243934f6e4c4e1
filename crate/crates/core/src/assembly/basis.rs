//! Lagrange shape functions of degree 1 and 2 on the reference triangle
//! with vertices (0,0), (1,0), (0,1). Degree-2 node order: three vertices
//! followed by the edge midpoints (01), (12), (20).

/// Number of local nodes for a degree.
pub fn n_local(degree: u32) -> usize {
    match degree {
        1 => 3,
        2 => 6,
        d => panic!("unsupported FEM degree {d}"),
    }
}

/// Shape function values at a reference point.
pub fn shape_values(degree: u32, xi: f64, eta: f64, out: &mut [f64]) {
    let l0 = 1.0 - xi - eta;
    match degree {
        1 => {
            out[..3].copy_from_slice(&[l0, xi, eta]);
        }
        2 => {
            out[0] = l0 * (2.0 * l0 - 1.0);
            out[1] = xi * (2.0 * xi - 1.0);
            out[2] = eta * (2.0 * eta - 1.0);
            out[3] = 4.0 * l0 * xi;
            out[4] = 4.0 * xi * eta;
            out[5] = 4.0 * eta * l0;
        }
        d => panic!("unsupported FEM degree {d}"),
    }
}

/// Reference gradients (d/dxi, d/deta) at a reference point.
pub fn shape_gradients(degree: u32, xi: f64, eta: f64, out: &mut [[f64; 2]]) {
    let l0 = 1.0 - xi - eta;
    match degree {
        1 => {
            out[0] = [-1.0, -1.0];
            out[1] = [1.0, 0.0];
            out[2] = [0.0, 1.0];
        }
        2 => {
            let g0 = 1.0 - 4.0 * l0;
            out[0] = [g0, g0];
            out[1] = [4.0 * xi - 1.0, 0.0];
            out[2] = [0.0, 4.0 * eta - 1.0];
            out[3] = [4.0 * (l0 - xi), -4.0 * xi];
            out[4] = [4.0 * eta, 4.0 * xi];
            out[5] = [-4.0 * eta, 4.0 * (l0 - eta)];
        }
        d => panic!("unsupported FEM degree {d}"),
    }
}

/// Constant reference second derivatives (d_xixi, d_xieta, d_etaeta);
/// zero for degree 1.
pub fn shape_hessians(degree: u32, out: &mut [[f64; 3]]) {
    match degree {
        1 => {
            for h in out.iter_mut().take(3) {
                *h = [0.0; 3];
            }
        }
        2 => {
            // N0 = l0(2l0-1), grad l0 = (-1,-1): hessian 4 (dl0 x dl0)
            out[0] = [4.0, 4.0, 4.0];
            out[1] = [4.0, 0.0, 0.0];
            out[2] = [0.0, 0.0, 4.0];
            // N3 = 4 l0 xi: 4(dl0 x dxi + dxi x dl0)
            out[3] = [-8.0, -4.0, 0.0];
            out[4] = [0.0, 4.0, 0.0];
            out[5] = [0.0, -4.0, -8.0];
        }
        d => panic!("unsupported FEM degree {d}"),
    }
}

/// 1-D traces of the shape functions along an edge parameterized by
/// t in [0, 1]: degree 1 has the two endpoint hats, degree 2 adds the
/// midpoint bubble (order: endpoint at t=0, endpoint at t=1, midpoint).
pub fn edge_shape_values(degree: u32, t: f64, out: &mut [f64]) {
    match degree {
        1 => {
            out[0] = 1.0 - t;
            out[1] = t;
        }
        2 => {
            out[0] = (1.0 - t) * (1.0 - 2.0 * t);
            out[1] = t * (2.0 * t - 1.0);
            out[2] = 4.0 * t * (1.0 - t);
        }
        d => panic!("unsupported FEM degree {d}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn partition_of_unity_and_node_values() {
        for degree in [1u32, 2] {
            let n = n_local(degree);
            let mut vals = vec![0.0; n];
            for &(xi, eta) in &[(0.2, 0.3), (0.0, 0.0), (0.5, 0.5), (0.1, 0.85)] {
                shape_values(degree, xi, eta, &mut vals);
                let sum: f64 = vals.iter().sum();
                assert!((sum - 1.0).abs() < 1e-14);
            }
            // Kronecker property at the nodes
            let nodes: Vec<(f64, f64)> = match degree {
                1 => vec![(0.0, 0.0), (1.0, 0.0), (0.0, 1.0)],
                _ => vec![
                    (0.0, 0.0),
                    (1.0, 0.0),
                    (0.0, 1.0),
                    (0.5, 0.0),
                    (0.5, 0.5),
                    (0.0, 0.5),
                ],
            };
            for (i, &(xi, eta)) in nodes.iter().enumerate() {
                shape_values(degree, xi, eta, &mut vals);
                for (j, v) in vals.iter().enumerate() {
                    let want = if i == j { 1.0 } else { 0.0 };
                    assert!((v - want).abs() < 1e-14, "degree {degree} N_{j} at node {i}");
                }
            }
        }
    }

    #[test]
    fn gradients_match_finite_differences() {
        let h = 1e-7;
        for degree in [1u32, 2] {
            let n = n_local(degree);
            let mut grad = vec![[0.0; 2]; n];
            let mut vp = vec![0.0; n];
            let mut vm = vec![0.0; n];
            let (xi, eta) = (0.27, 0.41);
            shape_gradients(degree, xi, eta, &mut grad);
            shape_values(degree, xi + h, eta, &mut vp);
            shape_values(degree, xi - h, eta, &mut vm);
            for j in 0..n {
                assert!(((vp[j] - vm[j]) / (2.0 * h) - grad[j][0]).abs() < 1e-6);
            }
            shape_values(degree, xi, eta + h, &mut vp);
            shape_values(degree, xi, eta - h, &mut vm);
            for j in 0..n {
                assert!(((vp[j] - vm[j]) / (2.0 * h) - grad[j][1]).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn hessians_match_finite_differences() {
        let h = 1e-5;
        let mut hess = vec![[0.0; 3]; 6];
        shape_hessians(2, &mut hess);
        let eval = |xi: f64, eta: f64| {
            let mut v = vec![0.0; 6];
            shape_values(2, xi, eta, &mut v);
            v
        };
        let (xi, eta) = (0.3, 0.2);
        let c = eval(xi, eta);
        let xp = eval(xi + h, eta);
        let xm = eval(xi - h, eta);
        let yp = eval(xi, eta + h);
        let ym = eval(xi, eta - h);
        let xpyp = eval(xi + h, eta + h);
        let xpym = eval(xi + h, eta - h);
        let xmyp = eval(xi - h, eta + h);
        let xmym = eval(xi - h, eta - h);
        for j in 0..6 {
            let dxx = (xp[j] - 2.0 * c[j] + xm[j]) / (h * h);
            let dyy = (yp[j] - 2.0 * c[j] + ym[j]) / (h * h);
            let dxy = (xpyp[j] - xpym[j] - xmyp[j] + xmym[j]) / (4.0 * h * h);
            assert!((dxx - hess[j][0]).abs() < 1e-4);
            assert!((dxy - hess[j][1]).abs() < 1e-4);
            assert!((dyy - hess[j][2]).abs() < 1e-4);
        }
    }
}
