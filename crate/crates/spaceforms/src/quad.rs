//! Gauss–Legendre quadrature: nodes by Newton iteration on the Legendre
//! polynomial, tensor-product panel integration over rectangles with
//! refinement, and a Duffy-mapped rule for the unit 3-simplex.

use crate::Real;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum QuadError {
    #[error("quadrature did not converge: last refinement change {last_change:e} above {target:e}")]
    NoConvergence { last_change: f64, target: f64 },
}

/// Nodes and weights of the n-point Gauss–Legendre rule on [-1, 1].
pub fn gauss_legendre<T: Real>(n: usize) -> (Vec<T>, Vec<T>) {
    assert!(n >= 1);
    let mut nodes = vec![T::zero(); n];
    let mut weights = vec![T::zero(); n];
    let nf = T::of(n as f64);
    for i in 0..n.div_ceil(2) {
        // Chebyshev-based initial guess
        let theta = std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5);
        let mut x = T::of(theta.cos());
        let mut dp = T::one();
        for _ in 0..100 {
            // evaluate P_n and P_n' by recurrence
            let mut p0 = T::one();
            let mut p1 = x;
            for k in 2..=n {
                let kf = T::of(k as f64);
                let p2 = ((T::of(2.0) * kf - T::one()) * x * p1 - (kf - T::one()) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            let p = if n == 1 { x } else { p1 };
            let pm1 = if n == 1 { T::one() } else { p0 };
            dp = nf * (x * p - pm1) / (x * x - T::one());
            let dx = p / dp;
            x -= dx;
            if dx.abs() < T::of(1e-16) {
                break;
            }
        }
        let w = T::of(2.0) / ((T::one() - x * x) * dp * dp);
        nodes[i] = -x.abs();
        nodes[n - 1 - i] = x.abs();
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = T::zero();
    }
    (nodes, weights)
}

/// n-point Gauss–Legendre integral of `f` over [a, b].
pub fn integrate_1d<T: Real>(f: impl Fn(T) -> T, a: T, b: T, n: usize) -> T {
    let (xs, ws) = gauss_legendre::<T>(n);
    let half = (b - a) * T::of(0.5);
    let mid = (a + b) * T::of(0.5);
    let mut acc = T::zero();
    for (x, w) in xs.iter().zip(&ws) {
        acc += *w * f(mid + half * *x);
    }
    acc * half
}

/// Composite 1-D rule: `panels` sub-intervals, n-point rule in each.
pub fn integrate_1d_panels<T: Real>(
    f: impl Fn(T) -> T,
    a: T,
    b: T,
    n: usize,
    panels: usize,
) -> T {
    let step = (b - a) / T::of(panels as f64);
    let mut acc = T::zero();
    for p in 0..panels {
        let lo = a + step * T::of(p as f64);
        acc += integrate_1d(&f, lo, lo + step, n);
    }
    acc
}

/// Tensor-product panel integral over [a_u,b_u]×[a_v,b_v] with a fixed panel
/// grid; `n`-point rule per axis per panel.
pub fn integrate_2d_fixed<T: Real>(
    f: &mut impl FnMut(T, T) -> T,
    bounds: (T, T, T, T),
    n: usize,
    panels: (usize, usize),
) -> T {
    let (au, bu, av, bv) = bounds;
    let (xs, ws) = gauss_legendre::<T>(n);
    let du = (bu - au) / T::of(panels.0 as f64);
    let dv = (bv - av) / T::of(panels.1 as f64);
    let mut acc = T::zero();
    for pu in 0..panels.0 {
        let u0 = au + du * T::of(pu as f64);
        for pv in 0..panels.1 {
            let v0 = av + dv * T::of(pv as f64);
            let (hu, mu) = (du * T::of(0.5), u0 + du * T::of(0.5));
            let (hv, mv) = (dv * T::of(0.5), v0 + dv * T::of(0.5));
            let mut cell = T::zero();
            for (xu, wu) in xs.iter().zip(&ws) {
                let uu = mu + hu * *xu;
                let mut row = T::zero();
                for (xv, wv) in xs.iter().zip(&ws) {
                    row += *wv * f(uu, mv + hv * *xv);
                }
                cell += *wu * row;
            }
            acc += cell * hu * hv;
        }
    }
    acc
}

/// Panel-refining 2-D integral: doubles the panel grid until the relative
/// change drops below `rel_tol` (with a small absolute floor), or errors.
pub fn integrate_2d_adaptive<T: Real>(
    f: &mut impl FnMut(T, T) -> T,
    bounds: (T, T, T, T),
    rel_tol: T,
) -> Result<(T, T), QuadError> {
    let n = 12;
    let mut panels = 1usize;
    let mut prev = integrate_2d_fixed(f, bounds, n, (panels, panels));
    let floor = T::of(1e-14);
    for _ in 0..6 {
        panels *= 2;
        let cur = integrate_2d_fixed(f, bounds, n, (panels, panels));
        let change = (cur - prev).abs();
        if change <= rel_tol * cur.abs().max(T::one() * floor / rel_tol) || change <= floor {
            return Ok((cur, change));
        }
        prev = cur;
    }
    let cur = integrate_2d_fixed(f, bounds, n, (panels * 2, panels * 2));
    let change = (cur - prev).abs();
    if change <= rel_tol * cur.abs().max(floor / rel_tol) {
        Ok((cur, change))
    } else {
        Err(QuadError::NoConvergence {
            last_change: change.as_f64(),
            target: (rel_tol * cur.abs()).as_f64(),
        })
    }
}

/// Integral of `f(λ1, λ2, λ3)` over the unit 3-simplex
/// {λ_i ≥ 0, λ1+λ2+λ3 ≤ 1} via the Duffy map from the unit cube,
/// with an n-point rule per axis.
pub fn integrate_simplex3<T: Real>(f: &mut impl FnMut(T, T, T) -> T, n: usize) -> T {
    let (xs, ws) = gauss_legendre::<T>(n);
    let half = T::of(0.5);
    let map = |x: T| half * (x + T::one()); // [-1,1] -> [0,1]
    let mut acc = T::zero();
    for (xa, wa) in xs.iter().zip(&ws) {
        let a = map(*xa);
        for (xb, wb) in xs.iter().zip(&ws) {
            let b = map(*xb);
            for (xc, wc) in xs.iter().zip(&ws) {
                let c = map(*xc);
                // Duffy: λ1 = a, λ2 = b(1-a), λ3 = c(1-a)(1-b)
                let l1 = a;
                let l2 = b * (T::one() - a);
                let l3 = c * (T::one() - a) * (T::one() - b);
                let jac = (T::one() - a) * (T::one() - a) * (T::one() - b);
                acc += *wa * *wb * *wc * jac * f(l1, l2, l3);
            }
        }
    }
    // each axis contributes a factor 1/2 from the [-1,1] -> [0,1] map
    acc * half * half * half
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nodes_match_known_values() {
        let (xs, ws) = gauss_legendre::<f64>(5);
        assert!((xs[0] + 0.9061798459386640).abs() < 1e-14);
        assert!((ws[2] - 0.5688888888888889).abs() < 1e-14);
        let s: f64 = ws.iter().sum();
        assert!((s - 2.0).abs() < 1e-14);
    }

    #[test]
    fn integrates_polynomial_exactly() {
        // degree-9 polynomial is exact with 5 points
        let v = integrate_1d(|x: f64| x.powi(9) + 3.0 * x * x, -1.0, 2.0, 5);
        let exact = (2.0f64.powi(10) - 1.0) / 10.0 + (8.0 + 1.0);
        assert!((v - exact).abs() < 1e-12);
    }

    #[test]
    fn sphere_area_via_2d() {
        // area of the unit sphere in polar coordinates: ∫∫ sin(θ) dθ dφ = 4π
        let mut f = |th: f64, _ph: f64| th.sin();
        let (val, _) = integrate_2d_adaptive(
            &mut f,
            (0.0, std::f64::consts::PI, 0.0, 2.0 * std::f64::consts::PI),
            1e-12,
        )
        .unwrap();
        assert!((val - 4.0 * std::f64::consts::PI).abs() < 1e-9);
    }

    #[test]
    fn simplex_volume_and_moments() {
        let v = integrate_simplex3(&mut |_a: f64, _b, _c| 1.0, 16);
        assert!((v - 1.0 / 6.0).abs() < 1e-13);
        // ∫ λ1 over the simplex = 1/24
        let m = integrate_simplex3(&mut |a: f64, _b, _c| a, 16);
        assert!((m - 1.0 / 24.0).abs() < 1e-13);
    }

    #[test]
    fn f32_nodes_work() {
        let (xs, _) = gauss_legendre::<f32>(8);
        assert_eq!(xs.len(), 8);
        assert!(xs[0] < 0.0 && xs[7] > 0.0);
    }
}
