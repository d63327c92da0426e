//! Geometry of the constant-curvature space forms E³, S³, H³ and the
//! de Sitter space S³₁: geodesic polytopes with their dihedral angles and
//! volume identities, smooth parametric hypersurfaces with their fundamental
//! forms and deformation identities, tube/Steiner/Crofton integral geometry,
//! and the P₂ functional with its comparison inequality.
//!
//! Everything numeric is generic over the scalar type through [`Real`];
//! concrete `f64` aliases live at the crate root ([`SpaceForm64`],
//! [`Polyhedron64`], ...).
//!
//! # Sign and orientation conventions
//!
//! One global table, used by every module. The expanding round sphere in E³
//! (`r(t) = 1 + t`, outward normal) is the fixture that pins all signs.
//!
//! * `n` is the **outward** unit normal on closed surfaces (future-directed
//!   time-like on space-like de Sitter surfaces), and `ε = ⟨n,n⟩` is `+1`
//!   Riemannian, `-1` Lorentzian.
//! * The shape operator is `B X = -D_X n`, so a convex surface with outward
//!   normal has `H = tr B < 0` and `K_e = det B > 0`. The unit sphere in E³
//!   has `B = -Id`, `H = -2`.
//! * `II(X,Y) = I(X, BY)`, `III(X,Y) = I(BX, BY)`.
//! * For a deformation with outward normal speed `f`: `I' = -2 f II`,
//!   `V' = ∫ f dA`, `A' = -∫ f H dA`, and the normal-variation identity
//!   `II' = H_f + ε K f I - f III` where `H_f` is the intrinsic Hessian.
//! * `⟨A,B⟩ = tr(I⁻¹ A I⁻¹ B)` is the inner product on symmetric 2-tensors
//!   (so `⟨I,I⟩ = m`).
//! * Unsigned convex-body quantities (areas, `∫(k₁+k₂)`, tube formulas) use
//!   the opposite, positive-for-convex convention; the [`intgeo`] module
//!   performs that sign flip exactly once when a `ConvexBody` is built.

pub mod expr;
pub mod functionals;
pub mod intgeo;
pub mod jet;
pub mod polytope;
pub mod quad;
pub mod space;
pub mod surface;

use num_traits::FromPrimitive;

/// Scalar trait for all core math: a real field with the elementary
/// functions, convertible from/to `f64` for literals and reporting.
pub trait Real:
    nalgebra::RealField + Copy + FromPrimitive + num_traits::ToPrimitive + Default
{
    /// Shorthand for converting an `f64` literal.
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal conversion")
    }

    /// Lossy conversion to `f64` (exact for f32/f64) for reports.
    fn as_f64(self) -> f64 {
        self.to_f64().expect("f64 conversion")
    }
}

impl Real for f32 {}
impl Real for f64 {}

pub use expr::{ExprProgram, JetValue};
pub use jet::Jet;
pub use space::{AmbientPoint, RegionSpec, Signature, SpaceForm, TangentVector};

/// `f64` aliases for the main domain types.
pub type SpaceForm64 = space::SpaceForm<f64>;
pub type AmbientPoint64 = space::AmbientPoint<f64>;
pub type Jet64 = jet::Jet<f64>;
