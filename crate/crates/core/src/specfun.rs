//! Bessel and Hankel functions of the first kind, integer order, with
//! derivatives, for real and complex arguments in the closed upper half
//! plane.
//!
//! Evaluation strategy:
//! - `Im z <= 3`: H = J + iY. J_0, J_1, Y_0, Y_1 come from the ascending
//!   power series for |z| <= 12 and from the Hankel asymptotic expansion
//!   beyond. Higher orders use Miller backward recurrence (J, normalized
//!   by the even-order sum identity) and forward recurrence (Y).
//! - `Im z > 3`: the J + iY combination loses ~e^{2 Im z} digits, so the
//!   value is routed through the modified Bessel function of the second
//!   kind, K_n(-iz), which is recessive and cancellation free. K_0, K_1
//!   come from the asymptotic expansion for |w| >= 14 and a trapezoid
//!   evaluation of K_n(w) = int_0^inf e^{-w cosh t} cosh(nt) dt below.

use crate::{Cplx, Error, Result};

/// Euler-Mascheroni constant.
const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;
/// Orders above this are rejected.
const MAX_ORDER: u32 = 200;
/// Magnitudes beyond this produce an `Overflow` error instead of inf.
const OVERFLOW_LIMIT: f64 = 1e280;
/// Ascending series vs asymptotic expansion switch radius.
const SERIES_RADIUS: f64 = 12.0;
/// J + iY vs K-route switch on the imaginary part.
const KROUTE_IMAG: f64 = 3.0;

/// Value and derivative of H_n^(1) at one argument.
#[derive(Clone, Copy, Debug)]
pub struct HankelValue {
    pub order: u32,
    pub argument: Cplx,
    pub value: Cplx,
    pub derivative: Cplx,
}

/// H_n^(1)(z) and H_n^(1)'(z) for 0 <= n <= 200, |z| >= 1e-8, Im z >= 0.
pub fn hankel1(n: u32, z: Cplx) -> Result<HankelValue> {
    check_domain(n, z)?;
    let (h_prev, h_n) = hankel_pair(n.max(1), z)?;
    let (value, derivative) = if n == 0 {
        // H_0' = -H_1; here h_prev = H_0, h_n = H_1
        (h_prev, -h_n)
    } else {
        (h_n, h_prev - (n as f64 / z) * h_n)
    };
    if !value.is_finite() || !derivative.is_finite() {
        return Err(Error::Overflow(format!("H_{n}^(1) at {z} is not representable")));
    }
    Ok(HankelValue { order: n, argument: z, value, derivative })
}

/// Log-derivative ratios H_n^(1)'(z)/H_n^(1)(z) for n = 0..=nmax, computed
/// with a forward ratio recurrence that never forms the (overflowing)
/// Hankel values themselves.
pub fn hankel1_log_derivative_ratios(z: Cplx, nmax: u32) -> Result<Vec<Cplx>> {
    check_domain(nmax, z)?;
    let (h0, h1) = hankel_pair(1, z)?;
    let mut out = Vec::with_capacity(nmax as usize + 1);
    // n = 0: H_0'/H_0 = -H_1/H_0
    out.push(-h1 / h0);
    // t_n = H_{n-1}/H_n; H is the dominant solution of the recurrence as n
    // grows, so iterating t forward is stable.
    let mut t = h0 / h1;
    for n in 1..=nmax {
        out.push(t - n as f64 / z);
        t = 1.0 / (2.0 * n as f64 / z - t);
    }
    Ok(out)
}

fn check_domain(n: u32, z: Cplx) -> Result<()> {
    if n > MAX_ORDER {
        return Err(Error::SpecFun(format!("order {n} exceeds supported maximum {MAX_ORDER}")));
    }
    if z.im < 0.0 {
        return Err(Error::SpecFun(format!("argument {z} below the real axis")));
    }
    if z.norm() < 1e-8 {
        return Err(Error::SpecFun(format!("argument {z} too close to the origin")));
    }
    Ok(())
}

/// (H_{n-1}, H_n) for n >= 1.
fn hankel_pair(n: u32, z: Cplx) -> Result<(Cplx, Cplx)> {
    debug_assert!(n >= 1);
    if z.im > KROUTE_IMAG {
        return hankel_pair_via_k(n, z);
    }
    let (j0, j1, y0, y1) = if z.norm() <= SERIES_RADIUS {
        jy01_series(z)
    } else {
        jy01_asymptotic(z)
    };
    if n == 1 {
        return Ok((j0 + Cplx::I * y0, j1 + Cplx::I * y1));
    }
    let js = bessel_j_miller(n, z);
    // forward recurrence for Y; |Y_n| is nondecreasing in n past the
    // turning точки, so this direction is stable
    let (mut ym, mut yn) = (y0, y1);
    for k in 1..n {
        let next = (2.0 * k as f64 / z) * yn - ym;
        ym = yn;
        yn = next;
        if !yn.is_finite() || yn.norm() > OVERFLOW_LIMIT {
            return Err(Error::Overflow(format!("Y_{} at {z} exceeds 1e280", k + 1)));
        }
    }
    Ok((js.0 + Cplx::I * ym, js.1 + Cplx::I * yn))
}

/// Ascending series for J_0, J_1, Y_0, Y_1 (|z| <= 12).
fn jy01_series(z: Cplx) -> (Cplx, Cplx, Cplx, Cplx) {
    let q = -0.25 * z * z; // (-1)^k (z/2)^{2k} building block
    let two_over_pi = std::f64::consts::FRAC_2_PI;

    // J_0 and the harmonic-weighted companion of Y_0
    let mut term = Cplx::new(1.0, 0.0);
    let mut j0 = term;
    let mut s0 = Cplx::new(0.0, 0.0);
    let mut harmonic = 0.0;
    for k in 1..200 {
        term *= q / ((k * k) as f64);
        harmonic += 1.0 / k as f64;
        j0 += term;
        s0 -= term * harmonic; // (-1)^{k+1} H_k (z/2)^{2k}/(k!)^2 with sign folded
        if term.norm() < 1e-18 * j0.norm().max(1e-30) {
            break;
        }
    }
    // J_1 and the companion of Y_1
    let mut term1 = Cplx::new(1.0, 0.0); // (z/2)^{2k}/(k!(k+1)!) * (-1)^k, k = 0
    let mut j1s = term1;
    let mut s1 = term1; // sum of (H_k + H_{k+1}) weighted terms; H_0 + H_1 = 1
    let mut hk = 0.0;
    for k in 1..200 {
        term1 *= q / ((k * (k + 1)) as f64);
        hk += 1.0 / k as f64;
        let hk1 = hk + 1.0 / (k + 1) as f64;
        j1s += term1;
        s1 += term1 * (hk + hk1);
        if term1.norm() < 1e-18 * j1s.norm().max(1e-30) {
            break;
        }
    }
    let half_z = 0.5 * z;
    let j1 = half_z * j1s;
    let log_term = half_z.ln() + EULER_GAMMA;
    let y0 = two_over_pi * (log_term * j0 + s0);
    let y1 = two_over_pi * (log_term * j1 - 1.0 / z - 0.5 * half_z * s1);
    (j0, j1, y0, y1)
}

/// Hankel asymptotic expansions for orders 0 and 1 (|z| > 12), combined
/// into J and Y. Both H^(1) and H^(2) series are summed to their smallest
/// term.
fn jy01_asymptotic(z: Cplx) -> (Cplx, Cplx, Cplx, Cplx) {
    let h1_0 = hankel_asymptotic(0, z, 1.0);
    let h2_0 = hankel_asymptotic(0, z, -1.0);
    let h1_1 = hankel_asymptotic(1, z, 1.0);
    let h2_1 = hankel_asymptotic(1, z, -1.0);
    let half_i = Cplx::new(0.0, 0.5);
    (
        0.5 * (h1_0 + h2_0),
        0.5 * (h1_1 + h2_1),
        -half_i * (h1_0 - h2_0),
        -half_i * (h1_1 - h2_1),
    )
}

/// H^(1) (sign = +1) or H^(2) (sign = -1) by the large-argument expansion.
fn hankel_asymptotic(nu: u32, z: Cplx, sign: f64) -> Cplx {
    let omega = z - (nu as f64 * 0.5 + 0.25) * std::f64::consts::PI;
    let prefactor = (Cplx::new(std::f64::consts::FRAC_2_PI, 0.0) / z).sqrt()
        * (Cplx::new(0.0, sign) * omega).exp();
    let four_nu2 = 4.0 * (nu * nu) as f64;
    let mut term = Cplx::new(1.0, 0.0);
    let mut sum = term;
    let mut last_norm = f64::INFINITY;
    for k in 1u32..60 {
        let odd = (2 * k - 1) as f64;
        term *= Cplx::new(0.0, sign) * (four_nu2 - odd * odd) / (8.0 * k as f64 * z);
        if term.norm() >= last_norm {
            break; // divergent tail reached
        }
        last_norm = term.norm();
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    prefactor * sum
}

/// (J_{n-1}, J_n) by Miller backward recurrence normalized with
/// J_0 + 2 sum_{k>=1} J_{2k} = 1.
fn bessel_j_miller(n: u32, z: Cplx) -> (Cplx, Cplx) {
    let start = n as usize + (1.2 * z.norm()) as usize + 45;
    let inv_z = 1.0 / z;
    let mut jp = Cplx::new(0.0, 0.0); // J_{k+2}
    let mut jc = Cplx::new(1e-280, 0.0); // J_{k+1} (arbitrary seed)
    let mut even_sum = Cplx::new(0.0, 0.0);
    let mut target = (Cplx::new(0.0, 0.0), Cplx::new(0.0, 0.0));
    for k in (0..=start).rev() {
        let jm = (2.0 * (k + 1) as f64 * inv_z) * jc - jp; // J_k
        jp = jc;
        jc = jm;
        // jc now holds J_k, jp holds J_{k+1}
        if k + 1 == n as usize {
            target = (jc, jp); // (J_{n-1}, J_n)
        }
        if k % 2 == 0 && k > 0 {
            even_sum += jc;
        }
        if jc.norm() > 1e250 {
            let scale = 1e-250;
            jc *= scale;
            jp *= scale;
            even_sum *= scale;
            target.0 *= scale;
            target.1 *= scale;
        }
    }
    let norm = jc + 2.0 * even_sum; // jc = J_0 (unnormalized)
    // bring the common scale to O(1) so complex division cannot underflow
    let rescale = 1.0 / norm.norm();
    let denom = norm * rescale;
    (target.0 * rescale / denom, target.1 * rescale / denom)
}

/// (H_{n-1}, H_n) through K_n(-iz); used for Im z > 3 where J + iY cancels.
fn hankel_pair_via_k(n: u32, z: Cplx) -> Result<(Cplx, Cplx)> {
    let w = Cplx::new(z.im, -z.re); // w = -iz, Re w = Im z > 3
    let (k0, k1) = if w.norm() >= 14.0 {
        (k_asymptotic(0, w), k_asymptotic(1, w))
    } else {
        (k_integral(0, w), k_integral(1, w))
    };
    // forward recurrence: K grows with order, stable
    let (mut km, mut kn) = (k0, k1);
    for k in 1..n {
        let next = (2.0 * k as f64 / w) * kn + km;
        km = kn;
        kn = next;
        if !kn.is_finite() || kn.norm() > OVERFLOW_LIMIT {
            return Err(Error::Overflow(format!("H_{} at {z} exceeds 1e280", k + 1)));
        }
    }
    // H_n^(1)(z) = (2/pi) (-i)^{n+1} K_n(-iz)
    let f = 2.0 / std::f64::consts::PI;
    Ok((f * neg_i_pow(n) * km, f * neg_i_pow(n + 1) * kn))
}

fn neg_i_pow(m: u32) -> Cplx {
    match m % 4 {
        0 => Cplx::new(1.0, 0.0),
        1 => Cplx::new(0.0, -1.0),
        2 => Cplx::new(-1.0, 0.0),
        _ => Cplx::new(0.0, 1.0),
    }
}

/// K_nu(w) by the large-argument expansion (|w| >= 14, Re w > 0).
fn k_asymptotic(nu: u32, w: Cplx) -> Cplx {
    let prefactor = (Cplx::new(std::f64::consts::FRAC_PI_2, 0.0) / w).sqrt() * (-w).exp();
    let four_nu2 = 4.0 * (nu * nu) as f64;
    let mut term = Cplx::new(1.0, 0.0);
    let mut sum = term;
    let mut last_norm = f64::INFINITY;
    for k in 1u32..60 {
        let odd = (2 * k - 1) as f64;
        term *= (four_nu2 - odd * odd) / (8.0 * k as f64 * w);
        if term.norm() >= last_norm {
            break;
        }
        last_norm = term.norm();
        sum += term;
        if term.norm() < 1e-18 * sum.norm() {
            break;
        }
    }
    prefactor * sum
}

/// K_nu(w) = int_0^inf e^{-w cosh t} cosh(nu t) dt by trapezoid halving
/// (3 < Re w, |w| < 14, nu in {0, 1}).
fn k_integral(nu: u32, w: Cplx) -> Cplx {
    let t_max = (1.0 + 64.0 / w.re).acosh();
    let f = |t: f64| -> Cplx {
        let c = t.cosh();
        let weight = if nu == 0 { 1.0 } else { c };
        (-w * c).exp() * weight
    };
    let mut n = 256usize;
    let mut prev = trapezoid(&f, t_max, n);
    for _ in 0..7 {
        n *= 2;
        let cur = trapezoid(&f, t_max, n);
        if (cur - prev).norm() <= 1e-15 * cur.norm().max(1e-300) {
            return cur;
        }
        prev = cur;
    }
    prev
}

fn trapezoid(f: &dyn Fn(f64) -> Cplx, t_max: f64, n: usize) -> Cplx {
    let h = t_max / n as f64;
    let mut acc = 0.5 * (f(0.0) + f(t_max));
    for k in 1..n {
        acc += f(k as f64 * h);
    }
    acc * h
}
