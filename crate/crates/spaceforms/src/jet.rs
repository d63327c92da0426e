//! Forward-mode jets: value, first derivatives in (u, v, t), and second
//! derivatives in (u, v) only. Truncated Taylor arithmetic; every operation
//! propagates derivatives exactly (up to floating point), so chart embeddings
//! evaluated on jets yield clean second fundamental forms without any
//! differencing.

use crate::Real;

/// Second-order (u,v) / first-order (t) jet.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Jet<T> {
    pub v: T,
    pub du: T,
    pub dv: T,
    pub dt: T,
    pub duu: T,
    pub duv: T,
    pub dvv: T,
}

impl<T: Real> Jet<T> {
    pub fn constant(v: T) -> Self {
        Jet { v, du: T::zero(), dv: T::zero(), dt: T::zero(), duu: T::zero(), duv: T::zero(), dvv: T::zero() }
    }

    /// Seed for the `u` variable.
    pub fn var_u(v: T) -> Self {
        Jet { du: T::one(), ..Self::constant(v) }
    }

    /// Seed for the `v` variable.
    pub fn var_v(v: T) -> Self {
        Jet { dv: T::one(), ..Self::constant(v) }
    }

    /// Seed for the `t` variable.
    pub fn var_t(v: T) -> Self {
        Jet { dt: T::one(), ..Self::constant(v) }
    }

    /// Chain rule through a scalar function with value `f`, derivative `d1`
    /// and second derivative `d2` at `self.v`.
    fn chain(self, f: T, d1: T, d2: T) -> Self {
        Jet {
            v: f,
            du: d1 * self.du,
            dv: d1 * self.dv,
            dt: d1 * self.dt,
            duu: d2 * self.du * self.du + d1 * self.duu,
            duv: d2 * self.du * self.dv + d1 * self.duv,
            dvv: d2 * self.dv * self.dv + d1 * self.dvv,
        }
    }

    pub fn sin(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Self {
        let (s, c) = (self.v.sin(), self.v.cos());
        self.chain(c, -s, -c)
    }

    pub fn sinh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(s, c, s)
    }

    pub fn cosh(self) -> Self {
        let (s, c) = (self.v.sinh(), self.v.cosh());
        self.chain(c, s, c)
    }

    pub fn tanh(self) -> Self {
        let th = self.v.tanh();
        let sech2 = T::one() - th * th;
        self.chain(th, sech2, -(T::one() + T::one()) * th * sech2)
    }

    pub fn exp(self) -> Self {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    /// Natural logarithm; caller checks positivity.
    pub fn ln(self) -> Self {
        let inv = T::one() / self.v;
        self.chain(self.v.ln(), inv, -inv * inv)
    }

    pub fn sqrt(self) -> Self {
        let r = self.v.sqrt();
        let d1 = T::of(0.5) / r;
        let d2 = -T::of(0.25) / (r * self.v);
        self.chain(r, d1, d2)
    }

    pub fn powi(self, k: i32) -> Self {
        let f = self.v.powi(k);
        let d1 = T::of(k as f64) * self.v.powi(k - 1);
        let d2 = T::of(k as f64) * T::of((k - 1) as f64) * self.v.powi(k - 2);
        self.chain(f, d1, d2)
    }

    /// Power with constant real exponent; `self.v` must be positive unless
    /// the exponent is a non-negative integer (use [`Jet::powi`] there).
    pub fn powf(self, k: T) -> Self {
        let f = self.v.powf(k);
        let d1 = k * self.v.powf(k - T::one());
        let d2 = k * (k - T::one()) * self.v.powf(k - T::of(2.0));
        self.chain(f, d1, d2)
    }

    /// Two-argument arctangent `atan2(self, x)`, smooth away from the origin.
    pub fn atan2(self, x: Self) -> Self {
        let y = self;
        let r2 = x.v * x.v + y.v * y.v;
        let val = y.v.atan2(x.v);
        // w_a = (x y_a - y x_a) / r2
        let num = |ya: T, xa: T| x.v * ya - y.v * xa;
        let (nu, nv, nt) = (num(y.du, x.du), num(y.dv, x.dv), num(y.dt, x.dt));
        // d/db of num(·_a): x_b y_a + x y_ab - y_b x_a - y x_ab
        let dnum = |ya: T, xa: T, yb: T, xb: T, yab: T, xab: T| {
            xb * ya + x.v * yab - yb * xa - y.v * xab
        };
        let r2_du = T::of(2.0) * (x.v * x.du + y.v * y.du);
        let r2_dv = T::of(2.0) * (x.v * x.dv + y.v * y.dv);
        let q = |n: T| n / r2;
        let dq = |n: T, dn: T, dr2: T| (dn * r2 - n * dr2) / (r2 * r2);
        Jet {
            v: val,
            du: q(nu),
            dv: q(nv),
            dt: q(nt),
            duu: dq(nu, dnum(y.du, x.du, y.du, x.du, y.duu, x.duu), r2_du),
            duv: dq(nu, dnum(y.du, x.du, y.dv, x.dv, y.duv, x.duv), r2_dv),
            dvv: dq(nv, dnum(y.dv, x.dv, y.dv, x.dv, y.dvv, x.dvv), r2_dv),
        }
    }

    pub fn recip(self) -> Self {
        let inv = T::one() / self.v;
        self.chain(inv, -inv * inv, T::of(2.0) * inv * inv * inv)
    }
}

impl<T: Real> std::ops::Add for Jet<T> {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        Jet {
            v: self.v + o.v,
            du: self.du + o.du,
            dv: self.dv + o.dv,
            dt: self.dt + o.dt,
            duu: self.duu + o.duu,
            duv: self.duv + o.duv,
            dvv: self.dvv + o.dvv,
        }
    }
}

impl<T: Real> std::ops::Sub for Jet<T> {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        Jet {
            v: self.v - o.v,
            du: self.du - o.du,
            dv: self.dv - o.dv,
            dt: self.dt - o.dt,
            duu: self.duu - o.duu,
            duv: self.duv - o.duv,
            dvv: self.dvv - o.dvv,
        }
    }
}

impl<T: Real> std::ops::Mul for Jet<T> {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        Jet {
            v: self.v * o.v,
            du: self.du * o.v + self.v * o.du,
            dv: self.dv * o.v + self.v * o.dv,
            dt: self.dt * o.v + self.v * o.dt,
            duu: self.duu * o.v + T::of(2.0) * self.du * o.du + self.v * o.duu,
            duv: self.duv * o.v + self.du * o.dv + self.dv * o.du + self.v * o.duv,
            dvv: self.dvv * o.v + T::of(2.0) * self.dv * o.dv + self.v * o.dvv,
        }
    }
}

impl<T: Real> std::ops::Div for Jet<T> {
    type Output = Self;
    fn div(self, o: Self) -> Self {
        self * o.recip()
    }
}

impl<T: Real> std::ops::Neg for Jet<T> {
    type Output = Self;
    fn neg(self) -> Self {
        Jet {
            v: -self.v,
            du: -self.du,
            dv: -self.dv,
            dt: -self.dt,
            duu: -self.duu,
            duv: -self.duv,
            dvv: -self.dvv,
        }
    }
}

impl<T: Real> std::ops::Mul<T> for Jet<T> {
    type Output = Self;
    fn mul(self, s: T) -> Self {
        self * Jet::constant(s)
    }
}

impl<T: Real> std::ops::Add<T> for Jet<T> {
    type Output = Self;
    fn add(self, s: T) -> Self {
        self + Jet::constant(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
    }

    /// Central differences of a scalar function of (u,v,t) at step `h`.
    fn fd_check<F: Fn(Jet<f64>, Jet<f64>, Jet<f64>) -> Jet<f64>>(
        f: F,
        u0: f64,
        v0: f64,
        t0: f64,
    ) {
        let eval = |u: f64, v: f64, t: f64| {
            f(Jet::constant(u), Jet::constant(v), Jet::constant(t)).v
        };
        let j = f(Jet::var_u(u0), Jet::var_v(v0), Jet::var_t(t0));
        let h = 1e-5;
        let du = (eval(u0 + h, v0, t0) - eval(u0 - h, v0, t0)) / (2.0 * h);
        let dv = (eval(u0, v0 + h, t0) - eval(u0, v0 - h, t0)) / (2.0 * h);
        let dt = (eval(u0, v0, t0 + h) - eval(u0, v0, t0 - h)) / (2.0 * h);
        let duu = (eval(u0 + h, v0, t0) - 2.0 * eval(u0, v0, t0) + eval(u0 - h, v0, t0)) / (h * h);
        let dvv = (eval(u0, v0 + h, t0) - 2.0 * eval(u0, v0, t0) + eval(u0, v0 - h, t0)) / (h * h);
        let duv = (eval(u0 + h, v0 + h, t0) - eval(u0 + h, v0 - h, t0)
            - eval(u0 - h, v0 + h, t0)
            + eval(u0 - h, v0 - h, t0))
            / (4.0 * h * h);
        assert!(close(j.du, du, 1e-7), "du {} vs {}", j.du, du);
        assert!(close(j.dv, dv, 1e-7), "dv {} vs {}", j.dv, dv);
        assert!(close(j.dt, dt, 1e-7), "dt {} vs {}", j.dt, dt);
        assert!(close(j.duu, duu, 1e-4), "duu {} vs {}", j.duu, duu);
        assert!(close(j.duv, duv, 1e-4), "duv {} vs {}", j.duv, duv);
        assert!(close(j.dvv, dvv, 1e-4), "dvv {} vs {}", j.dvv, dvv);
    }

    #[test]
    fn product_rule() {
        // u*v at (2,3): value 6, du=3, dv=2, duv=1, duu=0
        let j = Jet::var_u(2.0) * Jet::var_v(3.0);
        assert_eq!(j.v, 6.0);
        assert_eq!(j.du, 3.0);
        assert_eq!(j.dv, 2.0);
        assert_eq!(j.duv, 1.0);
        assert_eq!(j.duu, 0.0);
    }

    #[test]
    fn sin_at_zero() {
        let j = Jet::var_u(0.0).sin();
        assert_eq!(j.v, 0.0);
        assert_eq!(j.du, 1.0);
        assert_eq!(j.duu, 0.0);
    }

    #[test]
    fn cosh_t_derivative() {
        let j = Jet::var_t(1.0_f64).cosh();
        assert!(close(j.dt, 1.0f64.sinh(), 1e-14));
    }

    #[test]
    fn composite_functions_match_differences() {
        fd_check(|u, v, t| (u * v).sin() * t.cosh() + (u * u + v * v + Jet::constant(0.7)).sqrt(), 0.4, -0.3, 0.2);
        fd_check(|u, v, t| (u.sinh() + v.cos() * t).exp(), -0.2, 1.1, 0.5);
        fd_check(|u, v, _| u.atan2(v), 0.8, 0.6, 0.0);
        fd_check(|u, v, _| (v + Jet::constant(2.0)).ln() * u.tanh(), 0.3, 0.9, 0.0);
        fd_check(|u, v, _| (u + Jet::constant(1.5)).powf(2.5) / (v + Jet::constant(2.0)), 0.3, 0.1, 0.0);
    }

    #[test]
    fn generic_over_f32() {
        let j = (Jet::<f32>::var_u(0.5) * Jet::var_v(2.0)).sin();
        assert!((j.v - 1.0f32.sin()).abs() < 1e-6);
    }
}
