//! Ambient models of the constant-curvature spaces: Euclidean space E^{m+1},
//! the sphere S^{m+1}, hyperbolic space H^{m+1} (upper hyperboloid sheet) and
//! de Sitter space S^{m+1}_1, all realized as quadrics in a flat ambient
//! space so that isometries act linearly.
//!
//! For curvature `K ≠ 0` the model is the quadric `⟨x,x⟩ = 1/K` in the
//! ambient bilinear form (Euclidean for the sphere, Minkowski with the first
//! coordinate time-like for the hyperboloid and de Sitter). Geodesics take
//! the single closed form `γ(t) = cs_K(t)·p + sn_K(t)·v` in every model.
//!
//! Coordinates are `Vector4`; Euclidean points use the first `m+1` entries
//! (the rest zero), curved models need `m + 1 = 3`.

use crate::quad::integrate_1d;
use crate::Real;
use nalgebra::Vector4;
use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpaceError {
    #[error("model violation: {0}")]
    ModelViolation(String),
    #[error("points not joinable by a space-like geodesic (K⟨p,q⟩ = {0})")]
    NotJoinable(f64),
    #[error("chart unbounded or invalid: {0}")]
    ChartUnbounded(String),
    #[error("argument out of range: {0}")]
    OutOfRange(String),
    #[error("unsupported dimension {0} for this model")]
    UnsupportedDimension(usize),
}

type Result<X> = std::result::Result<X, SpaceError>;

/// Metric signature of the ambient space form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Signature {
    Riemannian,
    Lorentzian,
}

/// A constant-curvature space form: dimension `m+1`, curvature `K`, and
/// signature. Lorentzian requires `K > 0` (de Sitter).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpaceForm<T> {
    m_plus_1: usize,
    curvature: T,
    signature: Signature,
}

impl<T: Real> SpaceForm<T> {
    pub fn new(m_plus_1: usize, curvature: T, signature: Signature) -> Result<Self> {
        if m_plus_1 < 2 {
            return Err(SpaceError::UnsupportedDimension(m_plus_1));
        }
        if signature == Signature::Lorentzian && curvature <= T::zero() {
            return Err(SpaceError::ModelViolation(
                "Lorentzian space forms require K > 0 (de Sitter)".into(),
            ));
        }
        if curvature != T::zero() && m_plus_1 != 3 {
            return Err(SpaceError::UnsupportedDimension(m_plus_1));
        }
        if m_plus_1 > 3 {
            return Err(SpaceError::UnsupportedDimension(m_plus_1));
        }
        Ok(SpaceForm { m_plus_1, curvature, signature })
    }

    pub fn euclidean(m_plus_1: usize) -> Self {
        Self::new(m_plus_1, T::zero(), Signature::Riemannian).unwrap()
    }

    pub fn sphere3() -> Self {
        Self::new(3, T::one(), Signature::Riemannian).unwrap()
    }

    pub fn hyperbolic3() -> Self {
        Self::new(3, -T::one(), Signature::Riemannian).unwrap()
    }

    pub fn de_sitter3() -> Self {
        Self::new(3, T::one(), Signature::Lorentzian).unwrap()
    }

    pub fn dim(&self) -> usize {
        self.m_plus_1
    }

    /// Hypersurface dimension m.
    pub fn m(&self) -> usize {
        self.m_plus_1 - 1
    }

    pub fn curvature(&self) -> T {
        self.curvature
    }

    pub fn signature(&self) -> Signature {
        self.signature
    }

    /// Scalar curvature S = m(m+1)K.
    pub fn scalar_curvature(&self) -> T {
        T::of((self.m() * self.m_plus_1) as f64) * self.curvature
    }

    /// ε = +1 Riemannian, −1 Lorentzian (the sign of ⟨n,n⟩ for normals of
    /// space-like hypersurfaces).
    pub fn epsilon(&self) -> T {
        match self.signature {
            Signature::Riemannian => T::one(),
            Signature::Lorentzian => -T::one(),
        }
    }

    pub fn is_curved(&self) -> bool {
        self.curvature != T::zero()
    }

    /// Number of ambient coordinates in use.
    pub fn ambient_dim(&self) -> usize {
        if self.is_curved() {
            self.m_plus_1 + 1
        } else {
            self.m_plus_1
        }
    }

    /// Whether the ambient bilinear form has a time-like first coordinate.
    fn ambient_lorentzian(&self) -> bool {
        self.signature == Signature::Lorentzian || self.curvature < T::zero()
    }

    /// Ambient bilinear form ⟨x, y⟩ of the model.
    pub fn form(&self, x: &Vector4<T>, y: &Vector4<T>) -> T {
        let spatial = x[1] * y[1] + x[2] * y[2] + x[3] * y[3];
        if self.is_curved() {
            if self.ambient_lorentzian() {
                -x[0] * y[0] + spatial
            } else {
                x[0] * y[0] + spatial
            }
        } else {
            // Euclidean coordinates live in the first m+1 slots
            x.dot(y)
        }
    }

    /// Ambient form as a diagonal sign application: returns J·x.
    pub fn apply_form(&self, x: &Vector4<T>) -> Vector4<T> {
        let mut y = *x;
        if self.is_curved() && self.ambient_lorentzian() {
            y[0] = -y[0];
        }
        y
    }

    /// Target of the quadric constraint ⟨x,x⟩ = 1/K (curved models only).
    pub fn quadric_target(&self) -> T {
        T::one() / self.curvature
    }

    /// cs_K(t): cos(√K t) for K>0, 1 for K=0, cosh(√−K t) for K<0.
    pub fn cs(&self, t: T) -> T {
        cs_k(self.curvature, t)
    }

    /// sn_K(t): sin(√K t)/√K for K>0, t for K=0, sinh(√−K t)/√−K for K<0.
    pub fn sn(&self, t: T) -> T {
        sn_k(self.curvature, t)
    }

    /// ct_K(t) = cs_K(t)/sn_K(t).
    pub fn ct(&self, t: T) -> T {
        self.cs(t) / self.sn(t)
    }

    /// Validate the model constraint of a coordinate vector.
    pub fn check_point(&self, coords: &Vector4<T>) -> Result<()> {
        if self.is_curved() {
            let q = self.form(coords, coords);
            let target = self.quadric_target();
            if (q - target).abs() > T::of(1e-12) * target.abs().max(T::one()) {
                return Err(SpaceError::ModelViolation(format!(
                    "quadric residual {:e}",
                    (q - target).as_f64()
                )));
            }
            if self.curvature < T::zero() && coords[0] <= T::zero() {
                return Err(SpaceError::ModelViolation(
                    "hyperboloid point must lie on the upper sheet (x₀ > 0)".into(),
                ));
            }
        } else {
            for i in self.m_plus_1..4 {
                if coords[i] != T::zero() {
                    return Err(SpaceError::ModelViolation(format!(
                        "Euclidean coordinate {i} must be zero"
                    )));
                }
            }
        }
        Ok(())
    }

    /// Re-project onto the quadric when drift exceeds 1e-12 (no-op for E).
    pub fn project(&self, coords: &Vector4<T>) -> Vector4<T> {
        if !self.is_curved() {
            return *coords;
        }
        let q = self.form(coords, coords);
        let target = self.quadric_target();
        if (q - target).abs() <= T::of(1e-12) * target.abs() {
            return *coords;
        }
        // scale: ⟨λx, λx⟩ = 1/K requires λ² = 1/(K q); K q > 0 on the model side
        let kq = self.curvature * q;
        if kq <= T::zero() {
            return *coords; // not projectable; validation will reject
        }
        *coords * (T::one() / kq.sqrt())
    }

    /// Geodesic distance. De Sitter: space-like geodesic distance, when one
    /// exists.
    pub fn distance(&self, p: &AmbientPoint<T>, q: &AmbientPoint<T>) -> Result<T> {
        if !self.is_curved() {
            return Ok((p.coords - q.coords).norm());
        }
        let c = self.curvature * self.form(&p.coords, &q.coords);
        let k = self.curvature;
        let tol = T::of(1e-9);
        if k > T::zero() {
            if self.signature == Signature::Lorentzian && (c > T::one() + tol || c < -T::one() - tol)
            {
                return Err(SpaceError::NotJoinable(c.as_f64()));
            }
            let cc = c.min(T::one()).max(-T::one());
            Ok(cc.acos() / k.sqrt())
        } else {
            // hyperbolic: c = cosh(d√−K) ≥ 1
            let cc = c.max(T::one());
            Ok(cc.acosh() / (-k).sqrt())
        }
    }

    /// Evaluate the geodesic from `p` with unit initial velocity `v` at
    /// arc-length `t`: `cs_K(t) p + sn_K(t) v`.
    pub fn geodesic_eval(
        &self,
        p: &AmbientPoint<T>,
        v: &TangentVector<T>,
        t: T,
    ) -> Result<AmbientPoint<T>> {
        let vv = self.form(&v.components, &v.components);
        if (vv - T::one()).abs() > T::of(1e-9) {
            return Err(SpaceError::ModelViolation(format!(
                "geodesic velocity must be unit (⟨v,v⟩ = {})",
                vv.as_f64()
            )));
        }
        if self.is_curved() {
            let xv = self.form(&p.coords, &v.components);
            if xv.abs() > T::of(1e-9) {
                return Err(SpaceError::ModelViolation(
                    "geodesic velocity must be tangent at the base point".into(),
                ));
            }
        }
        let coords = p.coords * self.cs(t) + v.components * self.sn(t);
        let coords = self.project(&coords);
        AmbientPoint::new(self, coords)
    }

    /// Unit-sphere area O_m of S^m (m = dim − 1 here).
    pub fn unit_sphere_area(&self) -> T {
        T::of(unit_sphere_area_f64(self.m()))
    }

    /// Geodesic-ball volume by 64-point Gauss–Legendre quadrature of the
    /// sphere-area integrand `O_m sn_K(s)^m`.
    pub fn ball_volume_closed(&self, r: T) -> Result<T> {
        if r < T::zero() {
            return Err(SpaceError::OutOfRange("ball radius must be ≥ 0".into()));
        }
        if self.signature == Signature::Lorentzian {
            return Err(SpaceError::OutOfRange(
                "ball volume is a Riemannian-model quantity".into(),
            ));
        }
        if self.curvature > T::zero() {
            let r_max = T::pi() / self.curvature.sqrt();
            if r > r_max + T::of(1e-12) {
                return Err(SpaceError::OutOfRange(format!(
                    "radius {} exceeds the sphere diameter {}",
                    r.as_f64(),
                    r_max.as_f64()
                )));
            }
        }
        let m = self.m() as i32;
        let k = self.curvature;
        let area = self.unit_sphere_area();
        Ok(area * integrate_1d(|s| sn_k(k, s).powi(m), T::zero(), r, 64))
    }

    /// Area of the geodesic sphere of radius r: `O_m sn_K(r)^m`.
    pub fn sphere_area_closed(&self, r: T) -> T {
        self.unit_sphere_area() * self.sn(r).powi(self.m() as i32)
    }

    /// An orthonormal tangent frame at `p` (m+1 vectors for curved models,
    /// the coordinate frame for E).
    pub fn tangent_frame(&self, p: &AmbientPoint<T>) -> Vec<Vector4<T>> {
        if !self.is_curved() {
            let mut out = Vec::new();
            for i in 0..self.m_plus_1 {
                let mut e = Vector4::zeros();
                e[i] = T::one();
                out.push(e);
            }
            return out;
        }
        // Gram-Schmidt of the coordinate frame against p under the form.
        // ⟨p,p⟩ = 1/K has the sign of K; normalize q = p·√|K|.
        let mut out: Vec<Vector4<T>> = Vec::new();
        let pp = self.form(&p.coords, &p.coords);
        for i in 0..4 {
            let mut e = Vector4::zeros();
            e[i] = T::one();
            // subtract p component
            let c = self.form(&e, &p.coords) / pp;
            let mut w = e - p.coords * c;
            for b in &out {
                let bb = self.form(b, b);
                let c = self.form(&w, b) / bb;
                w -= *b * c;
            }
            let ww = self.form(&w, &w);
            if ww.abs() > T::of(1e-12) {
                // Riemannian tangent vectors have ⟨w,w⟩ > 0 in all our models
                if ww > T::zero() {
                    out.push(w * (T::one() / ww.sqrt()));
                } else {
                    out.push(w * (T::one() / (-ww).sqrt()));
                }
            }
            if out.len() == self.m_plus_1 {
                break;
            }
        }
        out
    }
}

fn unit_sphere_area_f64(m: usize) -> f64 {
    // O_m = 2 π^{(m+1)/2} / Γ((m+1)/2), with Γ by the half-integer recursion
    let twice = m + 1; // Γ argument is twice/2
    let gamma = if twice % 2 == 0 {
        (1..twice / 2).fold(1.0, |acc, j| acc * j as f64)
    } else {
        let mut val = std::f64::consts::PI.sqrt();
        let mut z = 0.5;
        while z + 1.0 <= twice as f64 / 2.0 + 1e-9 {
            val *= z;
            z += 1.0;
        }
        val
    };
    2.0 * std::f64::consts::PI.powf((m as f64 + 1.0) / 2.0) / gamma
}

/// cs_K(t).
pub fn cs_k<T: Real>(k: T, t: T) -> T {
    if k > T::zero() {
        (k.sqrt() * t).cos()
    } else if k < T::zero() {
        ((-k).sqrt() * t).cosh()
    } else {
        T::one()
    }
}

/// sn_K(t).
pub fn sn_k<T: Real>(k: T, t: T) -> T {
    if k > T::zero() {
        let s = k.sqrt();
        (s * t).sin() / s
    } else if k < T::zero() {
        let s = (-k).sqrt();
        (s * t).sinh() / s
    } else {
        t
    }
}

/// A point of the model, validated against the quadric/coordinate
/// constraints at construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AmbientPoint<T> {
    pub coords: Vector4<T>,
}

impl<T: Real> AmbientPoint<T> {
    pub fn new(space: &SpaceForm<T>, coords: Vector4<T>) -> Result<Self> {
        space.check_point(&coords)?;
        Ok(AmbientPoint { coords })
    }

    /// Construct without validation (hot paths that re-project themselves).
    pub fn new_unchecked(coords: Vector4<T>) -> Self {
        AmbientPoint { coords }
    }

    pub fn euclidean(x: T, y: T, z: T) -> Self {
        AmbientPoint { coords: Vector4::new(x, y, z, T::zero()) }
    }

    /// Base point of a model: E³ origin, sphere/de Sitter (R,0,0,0)
    /// with R = 1/√|K|, hyperboloid (ρ,0,0,0).
    pub fn base(space: &SpaceForm<T>) -> Self {
        if !space.is_curved() {
            return AmbientPoint { coords: Vector4::zeros() };
        }
        let r = T::one() / space.curvature().abs().sqrt();
        AmbientPoint { coords: Vector4::new(r, T::zero(), T::zero(), T::zero()) }
    }
}

/// A tangent vector with its base point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TangentVector<T> {
    pub base: AmbientPoint<T>,
    pub components: Vector4<T>,
}

impl<T: Real> TangentVector<T> {
    pub fn new(
        space: &SpaceForm<T>,
        base: AmbientPoint<T>,
        components: Vector4<T>,
    ) -> Result<Self> {
        let norm2 = space.form(&components, &components);
        if space.is_curved() {
            let xv = space.form(&base.coords, &components);
            let scale = norm2.abs().sqrt().max(T::of(1e-30));
            if xv.abs() > T::of(1e-10) * scale {
                return Err(SpaceError::ModelViolation(format!(
                    "vector not tangent to the quadric (⟨x,v⟩ = {:e})",
                    xv.as_f64()
                )));
            }
        }
        if space.signature() == Signature::Lorentzian && norm2 <= T::zero() {
            return Err(SpaceError::ModelViolation(
                "de Sitter tangent directions must be space-like here".into(),
            ));
        }
        Ok(TangentVector { base, components })
    }

    /// Normalize to unit length under the model form.
    pub fn normalized(&self, space: &SpaceForm<T>) -> Result<Self> {
        let n2 = space.form(&self.components, &self.components);
        if n2.abs() <= T::zero() {
            return Err(SpaceError::ModelViolation("cannot normalize a null vector".into()));
        }
        Ok(TangentVector { base: self.base, components: self.components * (T::one() / n2.abs().sqrt()) })
    }
}

/// Named sampling charts for Monte Carlo region volumes.
#[derive(Clone)]
pub enum Chart<T> {
    /// Geodesic polar chart about a center: r ∈ [0, r_max], direction on S².
    Polar { center: AmbientPoint<T>, r_max: T },
    /// Euclidean coordinate box (E³ only).
    AmbientBox { lo: [T; 3], hi: [T; 3] },
    /// De Sitter slice band: time parameter s ∈ [s0, s1], direction on S².
    DsBand { s0: T, s1: T },
}

impl<T> Chart<T> {
    pub fn name(&self) -> &'static str {
        match self {
            Chart::Polar { .. } => "polar",
            Chart::AmbientBox { .. } => "ambient-box",
            Chart::DsBand { .. } => "ds-band",
        }
    }
}

/// A region: a space form, a membership predicate, and a bounding chart.
#[derive(Clone)]
pub struct RegionSpec<T: Real> {
    pub space: SpaceForm<T>,
    pub chart: Chart<T>,
    pub membership: Arc<dyn Fn(&AmbientPoint<T>) -> bool + Send + Sync>,
}

const MC_BLOCK: u64 = 1 << 14;

/// Monte Carlo volume of a region with the curved volume element of its
/// chart. Deterministic for a fixed seed: samples are drawn in fixed-size
/// blocks, block `i` from an independent counter-seeded stream, and partial
/// sums combine in block order, so the result does not depend on how blocks
/// would be distributed over workers.
pub fn region_volume_mc<T: Real>(
    region: &RegionSpec<T>,
    samples: u64,
    seed: u64,
) -> Result<(T, T)> {
    if samples == 0 {
        return Err(SpaceError::OutOfRange("samples must be ≥ 1".into()));
    }
    match &region.chart {
        Chart::Polar { r_max, .. } => {
            if !(*r_max > T::zero()) || !r_max.is_finite() {
                return Err(SpaceError::ChartUnbounded("polar chart needs finite r_max > 0".into()));
            }
        }
        Chart::AmbientBox { lo, hi } => {
            for i in 0..3 {
                if !(hi[i] > lo[i]) || !hi[i].is_finite() || !lo[i].is_finite() {
                    return Err(SpaceError::ChartUnbounded("degenerate ambient box".into()));
                }
            }
        }
        Chart::DsBand { s0, s1 } => {
            if !(*s1 > *s0) || !s0.is_finite() || !s1.is_finite() {
                return Err(SpaceError::ChartUnbounded("degenerate de Sitter band".into()));
            }
        }
    }
    let frame = match &region.chart {
        Chart::Polar { center, .. } => region.space.tangent_frame(center),
        _ => Vec::new(),
    };
    let mut sum = T::zero();
    let mut sum_sq = T::zero();
    let blocks = samples.div_ceil(MC_BLOCK);
    let mut drawn = 0u64;
    for block in 0..blocks {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(block);
        let in_block = MC_BLOCK.min(samples - drawn);
        for _ in 0..in_block {
            let value = sample_one(region, &frame, &mut rng);
            sum += value;
            sum_sq += value * value;
        }
        drawn += in_block;
    }
    let n = T::of(samples as f64);
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(T::zero());
    let std_err = if samples > 1 { (var / n).sqrt() } else { T::zero() };
    Ok((mean, std_err))
}

fn unit_dir<T: Real, R: Rng>(rng: &mut R) -> [T; 3] {
    let z = T::of(rng.gen_range(-1.0..1.0f64));
    let phi = T::of(rng.gen_range(0.0..std::f64::consts::TAU));
    let r = (T::one() - z * z).max(T::zero()).sqrt();
    [r * phi.cos(), r * phi.sin(), z]
}

fn sample_one<T: Real, R: Rng>(
    region: &RegionSpec<T>,
    frame: &[Vector4<T>],
    rng: &mut R,
) -> T {
    match &region.chart {
        Chart::AmbientBox { lo, hi } => {
            let mut c = Vector4::zeros();
            let mut vol = T::one();
            for i in 0..3 {
                c[i] = lo[i] + (hi[i] - lo[i]) * T::of(rng.gen_range(0.0..1.0f64));
                vol *= hi[i] - lo[i];
            }
            let p = AmbientPoint::new_unchecked(c);
            if (region.membership)(&p) {
                vol
            } else {
                T::zero()
            }
        }
        Chart::Polar { center, r_max } => {
            let r = *r_max * T::of(rng.gen_range(0.0..1.0f64));
            let d = unit_dir::<T, _>(rng);
            let mut v = Vector4::zeros();
            for (i, f) in frame.iter().enumerate().take(3) {
                v += *f * d[i];
            }
            let x = center.coords * region.space.cs(r) + v * region.space.sn(r);
            let p = AmbientPoint::new_unchecked(region.space.project(&x));
            if (region.membership)(&p) {
                let sn = region.space.sn(r);
                // dV = sn^m dr dΩ; sampling measure r_max · 4π
                sn * sn * *r_max * T::of(4.0) * T::pi()
            } else {
                T::zero()
            }
        }
        Chart::DsBand { s0, s1 } => {
            let s = *s0 + (*s1 - *s0) * T::of(rng.gen_range(0.0..1.0f64));
            let d = unit_dir::<T, _>(rng);
            let ch = s.cosh();
            let x = Vector4::new(s.sinh(), ch * d[0], ch * d[1], ch * d[2]);
            let p = AmbientPoint::new_unchecked(x);
            if (region.membership)(&p) {
                ch * ch * (*s1 - *s0) * T::of(4.0) * T::pi()
            } else {
                T::zero()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn h3() -> SpaceForm<f64> {
        SpaceForm::hyperbolic3()
    }
    fn s3() -> SpaceForm<f64> {
        SpaceForm::sphere3()
    }
    fn e3() -> SpaceForm<f64> {
        SpaceForm::euclidean(3)
    }

    #[test]
    fn scalar_curvature_and_epsilon() {
        assert_eq!(h3().scalar_curvature(), -6.0);
        assert_eq!(s3().scalar_curvature(), 6.0);
        assert_eq!(SpaceForm::<f64>::de_sitter3().epsilon(), -1.0);
        assert!(SpaceForm::<f64>::new(3, -1.0, Signature::Lorentzian).is_err());
    }

    #[test]
    fn distances_match_model_formulas() {
        let p = AmbientPoint::new(&h3(), Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let q = AmbientPoint::new(&h3(), Vector4::new(1.0f64.cosh(), 1.0f64.sinh(), 0.0, 0.0))
            .unwrap();
        assert!((h3().distance(&p, &q).unwrap() - 1.0).abs() < 1e-12);

        let a = AmbientPoint::new(&s3(), Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let b = AmbientPoint::new(&s3(), Vector4::new(-1.0, 0.0, 0.0, 0.0)).unwrap();
        assert!((s3().distance(&a, &b).unwrap() - std::f64::consts::PI).abs() < 1e-12);

        let u = AmbientPoint::euclidean(0.0, 0.0, 0.0);
        let w = AmbientPoint::euclidean(3.0, 4.0, 0.0);
        assert!((e3().distance(&u, &w).unwrap() - 5.0).abs() < 1e-15);
    }

    #[test]
    fn geodesics_hit_expected_points() {
        let s = s3();
        let p = AmbientPoint::base(&s);
        let v = TangentVector::new(&s, p, Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let q = s.geodesic_eval(&p, &v, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((q.coords - Vector4::new(0.0, 1.0, 0.0, 0.0)).norm() < 1e-12);

        let h = h3();
        let p = AmbientPoint::base(&h);
        let v = TangentVector::new(&h, p, Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let q = h.geodesic_eval(&p, &v, 1.0).unwrap();
        assert!((q.coords[0] - 1.0f64.cosh()).abs() < 1e-12);
        assert!((q.coords[1] - 1.0f64.sinh()).abs() < 1e-12);

        let e = e3();
        let p = AmbientPoint::euclidean(0.0, 0.0, 0.0);
        let v = TangentVector::new(&e, p, Vector4::new(1.0, 0.0, 0.0, 0.0)).unwrap();
        let q = e.geodesic_eval(&p, &v, 2.0).unwrap();
        assert!((q.coords - Vector4::new(2.0, 0.0, 0.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn geodesic_roundtrip_distance_property() {
        // distance(p, geodesic_eval(p, v, t)) = |t| across models
        let spaces = [e3(), s3(), h3()];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for space in spaces {
            for _ in 0..50 {
                let p = AmbientPoint::base(&space);
                let d = unit_dir::<f64, _>(&mut rng);
                let frame = space.tangent_frame(&p);
                let mut v = Vector4::zeros();
                for i in 0..3 {
                    v += frame[i] * d[i];
                }
                let v = TangentVector::new(&space, p, v).unwrap().normalized(&space).unwrap();
                let t = rng.gen_range(0.0..1.5f64);
                let q = space.geodesic_eval(&p, &v, t).unwrap();
                let dist = space.distance(&p, &q).unwrap();
                assert!((dist - t).abs() < 1e-9, "{dist} vs {t}");
                space.check_point(&q.coords).unwrap();
            }
        }
    }

    #[test]
    fn de_sitter_spacelike_distance_and_rejection() {
        let ds = SpaceForm::<f64>::de_sitter3();
        // two points on the equator s=0 at angle π/3
        let a = AmbientPoint::new(&ds, Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let th = std::f64::consts::FRAC_PI_3;
        let b = AmbientPoint::new(&ds, Vector4::new(0.0, th.cos(), th.sin(), 0.0)).unwrap();
        assert!((ds.distance(&a, &b).unwrap() - th).abs() < 1e-12);
        // time-like separated pair: equator vs far future slice point
        let s = 2.0f64;
        let c = AmbientPoint::new(&ds, Vector4::new(s.sinh(), s.cosh(), 0.0, 0.0)).unwrap();
        assert!(matches!(ds.distance(&a, &c), Err(SpaceError::NotJoinable(_))));
    }

    #[test]
    fn ball_volumes() {
        let v = e3().ball_volume_closed(1.0).unwrap();
        assert!((v - 4.0 * std::f64::consts::PI / 3.0).abs() < 1e-10);
        let v = h3().ball_volume_closed(1.0).unwrap();
        let exact = std::f64::consts::PI * (2.0f64.sinh() - 2.0);
        assert!((v - exact).abs() < 1e-10 * exact);
        let v = s3().ball_volume_closed(std::f64::consts::PI).unwrap();
        let exact = 2.0 * std::f64::consts::PI.powi(2);
        assert!((v - exact).abs() < 1e-10 * exact);
        assert!(s3().ball_volume_closed(4.0).is_err());
        assert!(e3().ball_volume_closed(-1.0).is_err());
    }

    #[test]
    fn curvature_scaling_halves_distances() {
        // K = 4 sphere is the radius-1/2 sphere: distances scale by 1/2
        let s4 = SpaceForm::<f64>::new(3, 4.0, Signature::Riemannian).unwrap();
        let p = AmbientPoint::base(&s4);
        let v = TangentVector::new(&s4, p, Vector4::new(0.0, 1.0, 0.0, 0.0)).unwrap();
        let q = s4.geodesic_eval(&p, &v, 0.3).unwrap();
        assert!((s4.distance(&p, &q).unwrap() - 0.3).abs() < 1e-12);
        // total ball volume of K=4 sphere = (1/8) of unit S³ volume
        let v_full = s4.ball_volume_closed(std::f64::consts::PI / 2.0).unwrap();
        assert!((v_full - 2.0 * std::f64::consts::PI.powi(2) / 8.0).abs() < 1e-9);
    }

    #[test]
    fn mc_ball_volume_e3() {
        let space = e3();
        let region = RegionSpec {
            space,
            chart: Chart::AmbientBox { lo: [-1.0; 3], hi: [1.0; 3] },
            membership: Arc::new(|p: &AmbientPoint<f64>| p.coords.fixed_rows::<3>(0).norm() <= 1.0),
        };
        let (est, se) = region_volume_mc(&region, 200_000, 7).unwrap();
        let exact = 4.0 * std::f64::consts::PI / 3.0;
        assert!((est - exact).abs() < 4.0 * se, "est {est} exact {exact} se {se}");
        // determinism
        let (est2, _) = region_volume_mc(&region, 200_000, 7).unwrap();
        assert_eq!(est, est2);
    }

    #[test]
    fn mc_ball_volume_h3_polar() {
        let space = h3();
        let center = AmbientPoint::base(&space);
        let region = RegionSpec {
            space,
            chart: Chart::Polar { center, r_max: 1.3 },
            membership: Arc::new(move |p: &AmbientPoint<f64>| {
                // inside geodesic ball of radius 1: cosh d = -⟨p, center⟩ with K=-1
                p.coords[0] <= 1.0f64.cosh()
            }),
        };
        let (est, se) = region_volume_mc(&region, 300_000, 11).unwrap();
        let exact = space.ball_volume_closed(1.0).unwrap();
        assert!((est - exact).abs() < 4.0 * se.max(1e-6), "est {est} exact {exact} se {se}");
    }

    #[test]
    fn mc_empty_region() {
        let region = RegionSpec {
            space: e3(),
            chart: Chart::AmbientBox { lo: [-1.0; 3], hi: [1.0; 3] },
            membership: Arc::new(|_: &AmbientPoint<f64>| false),
        };
        let (est, se) = region_volume_mc(&region, 10_000, 3).unwrap();
        assert_eq!((est, se), (0.0, 0.0));
    }

    #[test]
    fn mc_block_partition_is_seed_stable() {
        // estimate with N and N+1 samples share the first N draws
        let region = RegionSpec {
            space: e3(),
            chart: Chart::AmbientBox { lo: [-1.0; 3], hi: [1.0; 3] },
            membership: Arc::new(|p: &AmbientPoint<f64>| p.coords[0] > 0.0),
        };
        let (a, _) = region_volume_mc(&region, MC_BLOCK * 2, 5).unwrap();
        let (b, _) = region_volume_mc(&region, MC_BLOCK * 2, 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn point_validation() {
        assert!(AmbientPoint::new(&h3(), Vector4::new(-1.0, 0.0, 0.0, 0.0)).is_err());
        assert!(AmbientPoint::new(&h3(), Vector4::new(1.0, 0.5, 0.0, 0.0)).is_err());
        assert!(AmbientPoint::new(&s3(), Vector4::new(1.0, 0.0, 0.0, 0.0)).is_ok());
        // tangency enforcement
        let p = AmbientPoint::base(&s3());
        assert!(TangentVector::new(&s3(), p, Vector4::new(1.0, 1.0, 0.0, 0.0)).is_err());
    }
}
