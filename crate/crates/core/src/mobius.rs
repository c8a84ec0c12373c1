//! The one-parameter Möbius family `ζ = a (z + 1) / (z − 1)`.
//!
//! The map sends origin-centred circles `|z| = ρ` onto the eccentric circles
//! of the physical (ζ) plane: `0 ↦ −a`, `∞ ↦ a`, `1 ↦ ∞`. Everything here is
//! exact geometry on the extended complex plane; the point at infinity is an
//! explicit [`ComplexPoint::Infinity`] variant so both directions of the map
//! are total.

use num_complex::Complex64;

use crate::concentric::MultipoleSource;
use crate::error::{invalid, Error, Result};

/// Positive scale `a` of the map.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MobiusParameter(f64);

impl MobiusParameter {
    pub fn new(a: f64) -> Result<Self> {
        if a.is_finite() && a > 0.0 {
            Ok(Self(a))
        } else {
            Err(invalid(format!("Möbius scale must be positive and finite, got {a}")))
        }
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// A point of the extended complex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ComplexPoint {
    Finite(Complex64),
    Infinity,
}

impl ComplexPoint {
    pub fn new(re: f64, im: f64) -> Self {
        Self::Finite(Complex64::new(re, im))
    }

    pub fn finite(self) -> Option<Complex64> {
        match self {
            Self::Finite(z) => Some(z),
            Self::Infinity => None,
        }
    }

    pub fn is_infinite(self) -> bool {
        matches!(self, Self::Infinity)
    }
}

impl From<Complex64> for ComplexPoint {
    fn from(z: Complex64) -> Self {
        Self::Finite(z)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircleSpec {
    pub center: Complex64,
    pub radius: f64,
}

impl CircleSpec {
    pub fn new(center: Complex64, radius: f64) -> Result<Self> {
        if !(radius.is_finite() && radius > 0.0) || !center.is_finite() {
            return Err(invalid(format!("bad circle: center {center}, radius {radius}")));
        }
        Ok(Self { center, radius })
    }

    /// Signed distance from the circle, negative inside.
    pub fn signed_distance(&self, z: Complex64) -> f64 {
        (z - self.center).norm() - self.radius
    }

    /// Same centre, radius scaled by `factor`.
    pub fn dilated(&self, factor: f64) -> Self {
        Self { center: self.center, radius: self.radius * factor }
    }
}

/// A straight line through `point` with unit `direction`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LineSpec {
    pub point: Complex64,
    pub direction: Complex64,
}

impl LineSpec {
    pub fn new(point: Complex64, direction: Complex64) -> Result<Self> {
        let n = direction.norm();
        if !(n.is_finite() && n > 0.0) || !point.is_finite() {
            return Err(invalid("line needs a finite point and a nonzero direction"));
        }
        Ok(Self { point, direction: direction / n })
    }

    /// Positive on the left of the direction of travel.
    pub fn side(&self, z: Complex64) -> f64 {
        (self.direction.conj() * (z - self.point)).im
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum GeneralizedCircle {
    Circle(CircleSpec),
    Line(LineSpec),
}

impl GeneralizedCircle {
    pub fn as_circle(&self) -> Option<&CircleSpec> {
        match self {
            Self::Circle(c) => Some(c),
            Self::Line(_) => None,
        }
    }
}

/// One side of a generalized circle.
///
/// For a circle boundary, `bounded` selects the open interior; otherwise the
/// open exterior together with the point at infinity. A line boundary is
/// always unbounded and selects the open half-plane on the left of the line's
/// direction; the point at infinity lies on its boundary and is not a member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DiskRegion {
    pub boundary: GeneralizedCircle,
    pub bounded: bool,
}

impl DiskRegion {
    pub fn contains(&self, p: ComplexPoint) -> bool {
        match (self.boundary, p) {
            (GeneralizedCircle::Circle(c), ComplexPoint::Finite(z)) => {
                let d = (z - c.center).norm();
                if self.bounded {
                    d < c.radius
                } else {
                    d > c.radius
                }
            }
            (GeneralizedCircle::Circle(_), ComplexPoint::Infinity) => !self.bounded,
            (GeneralizedCircle::Line(l), ComplexPoint::Finite(z)) => l.side(z) > 0.0,
            (GeneralizedCircle::Line(_), ComplexPoint::Infinity) => false,
        }
    }

    pub fn circle(&self) -> Option<&CircleSpec> {
        self.boundary.as_circle()
    }
}

/// `ζ = a (z + 1) / (z − 1)`, with `1 ↦ ∞` and `∞ ↦ a`.
pub fn forward(p: MobiusParameter, z: ComplexPoint) -> ComplexPoint {
    let a = p.value();
    match z {
        ComplexPoint::Infinity => ComplexPoint::new(a, 0.0),
        ComplexPoint::Finite(z) => {
            let den = z - 1.0;
            if den == Complex64::new(0.0, 0.0) {
                ComplexPoint::Infinity
            } else {
                ComplexPoint::Finite(a * (z + 1.0) / den)
            }
        }
    }
}

/// `z = (ζ + a) / (ζ − a)`, with `a ↦ ∞` and `∞ ↦ 1`.
pub fn inverse(p: MobiusParameter, zeta: ComplexPoint) -> ComplexPoint {
    let a = p.value();
    match zeta {
        ComplexPoint::Infinity => ComplexPoint::new(1.0, 0.0),
        ComplexPoint::Finite(w) => {
            let den = w - a;
            if den == Complex64::new(0.0, 0.0) {
                ComplexPoint::Infinity
            } else {
                ComplexPoint::Finite((w + a) / den)
            }
        }
    }
}

/// Finite-only shorthand for [`forward`]; `None` at `z = 1`.
pub fn forward_finite(p: MobiusParameter, z: Complex64) -> Option<Complex64> {
    forward(p, z.into()).finite()
}

/// Finite-only shorthand for [`inverse`]; `None` at `ζ = a`.
pub fn inverse_finite(p: MobiusParameter, zeta: Complex64) -> Option<Complex64> {
    inverse(p, zeta.into()).finite()
}

/// `dz/dζ` of the inverse map, `−2a / (ζ − a)²`.
pub fn inverse_derivative(p: MobiusParameter, zeta: Complex64) -> Complex64 {
    let d = zeta - p.value();
    -2.0 * p.value() / (d * d)
}

/// Image of the circle `|z| = ρ`.
///
/// For `ρ ≠ 1` this is the circle centred on the real axis at
/// `a (ρ² + 1) / (ρ² − 1)` with radius `2a / |ρ − 1/ρ|`. The unit circle
/// passes through `z = 1` and maps onto the imaginary axis.
pub fn circle_image(p: MobiusParameter, rho: f64) -> Result<GeneralizedCircle> {
    if !(rho.is_finite() && rho > 0.0) {
        return Err(invalid(format!("radius must be positive, got {rho}")));
    }
    let a = p.value();
    if rho == 1.0 {
        // Traversed downward so the left side is Re ζ > 0, the image of |z| > 1.
        let line = LineSpec::new(Complex64::new(0.0, 0.0), Complex64::new(0.0, -1.0))?;
        return Ok(GeneralizedCircle::Line(line));
    }
    let r2 = rho * rho;
    let center = Complex64::new(a * (r2 + 1.0) / (r2 - 1.0), 0.0);
    let radius = 2.0 * a / (rho - rho.recip()).abs();
    Ok(GeneralizedCircle::Circle(CircleSpec::new(center, radius)?))
}

/// Image of the disk `{|z| < ρ}` (`take_interior`) or of `{|z| > ρ}`.
///
/// The image is a bounded disk exactly when the pre-image avoids `z = 1`:
/// interior with `ρ < 1`, or exterior with `ρ > 1`.
pub fn disk_image(p: MobiusParameter, rho: f64, take_interior: bool) -> Result<DiskRegion> {
    if rho == 1.0 {
        return Err(Error::Degenerate("ρ = 1 maps onto a half-plane".into()));
    }
    let boundary = circle_image(p, rho)?;
    let bounded = if take_interior { rho < 1.0 } else { rho > 1.0 };
    let region = DiskRegion { boundary, bounded };
    let witness = if take_interior {
        ComplexPoint::new(0.0, 0.0)
    } else {
        ComplexPoint::Infinity
    };
    debug_assert!(region.contains(forward(p, witness)));
    Ok(region)
}

/// Pulls a ζ-plane multipole back to the concentric frame.
///
/// Returns the z-plane source and a real constant `k` such that
/// `F̃(Φ(z)) = F(z) + k`. Rests on
/// `1/(Φ(z) − Φ(z₀)) = K + K w / (z − z₀)` with `w = z₀ − 1` and
/// `K = −w / (2a)`, raised to each power by the binomial theorem.
pub fn pullback_multipole(
    p: MobiusParameter,
    src: &MultipoleSource,
) -> Result<(MultipoleSource, f64)> {
    let zeta0 = src.location();
    let z0 = inverse_finite(p, zeta0).ok_or_else(|| {
        invalid("a source at ζ = a pulls back to infinity and has no multipole image")
    })?;
    let w = z0 - 1.0;
    let k_factor = -w / (2.0 * p.value());
    let order = src.order();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); order];
    let mut constant = Complex64::new(0.0, 0.0);
    let mut k_pow = Complex64::new(1.0, 0.0);
    for (k, d) in src.coefficients().iter().enumerate().map(|(i, d)| (i + 1, *d)) {
        k_pow *= k_factor;
        constant += d * k_pow;
        // (K + K w u)^k = K^k Σ_j C(k, j) (w u)^j
        let mut binom = 1.0;
        let mut w_pow = Complex64::new(1.0, 0.0);
        for j in 1..=k {
            binom = binom * (k + 1 - j) as f64 / j as f64;
            w_pow *= w;
            coeffs[j - 1] += d * k_pow * binom * w_pow;
        }
    }
    Ok((MultipoleSource::new(z0, coeffs)?, constant.re))
}

/// Pulls the uniform field `−Re{E₀ ζ}` back to a dipole at `z = 1`.
///
/// `−Re{E₀ a (z+1)/(z−1)} = −Re{E₀ a} − Re{2a E₀ / (z − 1)}`.
pub fn pullback_uniform_field(
    p: MobiusParameter,
    field: Complex64,
) -> Result<(MultipoleSource, f64)> {
    if !field.is_finite() {
        return Err(invalid("uniform field strength must be finite"));
    }
    let a = p.value();
    let src = MultipoleSource::new(Complex64::new(1.0, 0.0), vec![-2.0 * a * field])?;
    Ok((src, -(field * a).re))
}
