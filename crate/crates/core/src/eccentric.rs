//! The eccentric superlens in the physical ζ-plane.
//!
//! A scene is described entirely in ζ-coordinates. Solving pulls the source
//! back through `Φ⁻¹`, solves the concentric problem and reads potentials
//! through `Ṽ(ζ) = V(Φ⁻¹(ζ)) + k`, where `k` is the constant picked up by
//! the pullback so that `Ṽ` reproduces the requested source potential.

use num_complex::Complex64;

use crate::concentric::{
    self, calm_radius, critical_radius, AnnulusGeometry, ModeSolutionSet, MultipoleSource,
    PermittivityProfile, SolveOptions,
};
use crate::error::{invalid, Error, Result};
use crate::mobius::{
    disk_image, forward, inverse, pullback_multipole, pullback_uniform_field, CircleSpec,
    ComplexPoint, DiskRegion, MobiusParameter,
};

/// A source in the ζ-plane.
#[derive(Debug, Clone, PartialEq)]
pub enum SourceSpec {
    /// `Σₖ Re{dₖ (ζ − ζ₀)^{−k}}`.
    Multipole(MultipoleSource),
    /// The uniform field with potential `−Re{E₀ ζ}`.
    UniformField(Complex64),
}

impl SourceSpec {
    /// Source location; a uniform field sits at infinity.
    pub fn location(&self) -> ComplexPoint {
        match self {
            Self::Multipole(m) => ComplexPoint::Finite(m.location()),
            Self::UniformField(_) => ComplexPoint::Infinity,
        }
    }

    /// The prescribed potential at `ζ`.
    pub fn potential(&self, zeta: Complex64) -> Result<f64> {
        match self {
            Self::Multipole(m) => m.potential(zeta),
            Self::UniformField(e0) => Ok(-(e0 * zeta).re),
        }
    }

    fn pullback(&self, p: MobiusParameter) -> Result<(MultipoleSource, f64)> {
        match self {
            Self::Multipole(m) => pullback_multipole(p, m),
            Self::UniformField(e0) => pullback_uniform_field(p, *e0),
        }
    }
}

/// Scale, annulus, shell permittivity and source of an eccentric superlens.
#[derive(Debug, Clone, PartialEq)]
pub struct EccentricScene {
    mobius: MobiusParameter,
    geometry: AnnulusGeometry,
    permittivity: PermittivityProfile,
    source: SourceSpec,
    pulled: MultipoleSource,
    pullback_constant: f64,
}

impl EccentricScene {
    /// Plasmonic shell `−1 + iδ` in a unit background with a unit core.
    pub fn new(
        mobius: MobiusParameter,
        geometry: AnnulusGeometry,
        delta: f64,
        source: SourceSpec,
    ) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(invalid(format!("loss parameter must be finite and ≥ 0, got {delta}")));
        }
        let permittivity = PermittivityProfile::plasmonic(delta)?;
        Self::with_permittivity(mobius, geometry, permittivity, source)
    }

    pub fn with_permittivity(
        mobius: MobiusParameter,
        geometry: AnnulusGeometry,
        permittivity: PermittivityProfile,
        source: SourceSpec,
    ) -> Result<Self> {
        if let SourceSpec::UniformField(e0) = source {
            if !e0.is_finite() {
                return Err(invalid("uniform field strength must be finite"));
            }
        }
        let (pulled, pullback_constant) = source.pullback(mobius)?;
        let r = pulled.location().norm();
        if r <= geometry.rho_e() {
            return Err(invalid(format!(
                "source must lie outside the closed outer disk (pulled back to |z0| = {r})"
            )));
        }
        Ok(Self { mobius, geometry, permittivity, source, pulled, pullback_constant })
    }

    pub fn mobius(&self) -> MobiusParameter {
        self.mobius
    }

    pub fn geometry(&self) -> &AnnulusGeometry {
        &self.geometry
    }

    pub fn permittivity(&self) -> &PermittivityProfile {
        &self.permittivity
    }

    pub fn delta(&self) -> f64 {
        self.permittivity.delta()
    }

    pub fn source(&self) -> &SourceSpec {
        &self.source
    }

    /// The source in the concentric frame.
    pub fn pulled_source(&self) -> &MultipoleSource {
        &self.pulled
    }

    /// `k` with `F̃(Φ(z)) = F(z) + k`.
    pub fn pullback_constant(&self) -> f64 {
        self.pullback_constant
    }

    /// The same scene with another loss parameter.
    pub fn with_delta(&self, delta: f64) -> Result<Self> {
        Self::new(self.mobius, self.geometry, delta, self.source.clone())
    }
}

/// Transformed regions and the resonance verdicts of a scene.
#[derive(Debug, Clone, PartialEq)]
pub struct SceneReport {
    /// Boundary of `Ω̃ᵢ`, the core.
    pub inner: CircleSpec,
    /// Boundary of `Ω̃ₑ`, the core together with the shell.
    pub outer: CircleSpec,
    /// `Ω̃*`, image of `|z| < ρ*`.
    pub critical: DiskRegion,
    /// `Ω̃_b`, image of `|z| > ρ_b`.
    pub calm: DiskRegion,
    pub rho_star: f64,
    pub rho_b: f64,
    pub resonant: bool,
    pub shielding: bool,
}

fn bounded_circle(p: MobiusParameter, rho: f64) -> Result<CircleSpec> {
    let region = disk_image(p, rho, true)?;
    region.circle().copied().ok_or_else(|| Error::Degenerate(format!("image of |z| = {rho}")))
}

pub fn geometry_report(scene: &EccentricScene) -> Result<SceneReport> {
    let p = scene.mobius;
    let g = &scene.geometry;
    let rho_star = critical_radius(g);
    let rho_b = calm_radius(g);
    let critical = disk_image(p, rho_star, true)?;
    let calm = disk_image(p, rho_b, false)?;
    let zeta0 = scene.source.location();
    let resonant = critical.contains(zeta0);
    Ok(SceneReport {
        inner: bounded_circle(p, g.rho_i())?,
        outer: bounded_circle(p, g.rho_e())?,
        critical,
        calm,
        rho_star,
        rho_b,
        resonant,
        shielding: rho_star > 1.0 && resonant,
    })
}

/// Whether the source excites the anomalous resonance: `ζ₀ ∈ Ω̃*`.
///
/// A uniform field sits at infinity, which belongs to `Ω̃*` exactly when
/// `ρ* > 1`. Decided in the concentric frame, where membership is `|z₀| < ρ*`.
pub fn resonance_predicate(scene: &EccentricScene) -> bool {
    scene.pulled.location().norm() < critical_radius(&scene.geometry)
}

/// Shielding at a distance: `ρ* > 1` and `ζ₀ ∈ Ω̃*`.
pub fn shielding_predicate(scene: &EccentricScene) -> bool {
    critical_radius(&scene.geometry) > 1.0 && resonance_predicate(scene)
}

/// A solved scene. Immutable; all evaluations are pure.
#[derive(Debug, Clone, PartialEq)]
pub struct EccentricSolution {
    scene: EccentricScene,
    modes: ModeSolutionSet,
}

pub fn solve(scene: &EccentricScene) -> Result<EccentricSolution> {
    solve_with(scene, SolveOptions::default())
}

pub fn solve_with(scene: &EccentricScene, opts: SolveOptions) -> Result<EccentricSolution> {
    let modes = concentric::solve(&scene.geometry, &scene.permittivity, &scene.pulled, opts)?;
    Ok(EccentricSolution { scene: scene.clone(), modes })
}

/// Stand-in for `z = ∞` when `ζ = a`: `z² ∂V/∂z` is within rounding of its
/// limit there, and `|z|⁴` (formed by complex division by `z²`) stays finite.
const FAR: f64 = 1e50;

impl EccentricSolution {
    pub fn scene(&self) -> &EccentricScene {
        &self.scene
    }

    /// The concentric solution behind this scene.
    pub fn modes(&self) -> &ModeSolutionSet {
        &self.modes
    }

    fn preimage(&self, zeta: Complex64) -> Result<Option<Complex64>> {
        if !zeta.is_finite() {
            return Err(invalid("evaluation point must be finite"));
        }
        if let ComplexPoint::Finite(z0) = self.scene.source.location() {
            if zeta == z0 {
                return Err(Error::AtSource(format!("{zeta}")));
            }
        }
        Ok(inverse(self.scene.mobius, zeta.into()).finite())
    }

    /// Complex potential `Ṽ(ζ)`; its real part is the physical potential.
    pub fn potential(&self, zeta: Complex64) -> Result<Complex64> {
        let k = self.scene.pullback_constant;
        match self.preimage(zeta)? {
            Some(z) => Ok(self.modes.evaluate_potential(z)? + k),
            // ζ = a is the image of z = ∞, where V vanishes.
            None => Ok(Complex64::new(k, 0.0)),
        }
    }

    /// Complex gradient `(∂Ṽ/∂ξ, ∂Ṽ/∂η)` for `ζ = ξ + iη`.
    pub fn gradient(&self, zeta: Complex64) -> Result<[Complex64; 2]> {
        let z = self.preimage(zeta)?.unwrap_or(Complex64::new(FAR, 0.0));
        let (dz, dzb) = self.modes.wirtinger_in(concentric::Region::of(self.modes.geometry(), z), z)?;
        // dz/dζ = −2a/(ζ − a)² = −(z − 1)²/(2a)
        let jac = -(z - 1.0) * (z - 1.0) / (2.0 * self.scene.mobius.value());
        let d = dz * jac;
        let db = dzb * jac.conj();
        Ok([d + db, Complex64::i() * (d - db)])
    }

    /// `∇ Re Ṽ(ζ)`.
    pub fn field(&self, zeta: Complex64) -> Result<[f64; 2]> {
        let [gx, gy] = self.gradient(zeta)?;
        Ok([gx.re, gy.re])
    }

    pub fn energy(&self) -> f64 {
        self.modes.dissipation_energy()
    }

    /// `∇ Re Ṽ / √W`.
    pub fn normalized_field(&self, zeta: Complex64) -> Result<[f64; 2]> {
        let w = self.energy();
        if !(w > 0.0) {
            return Err(invalid("normalization needs a positive dissipation energy"));
        }
        let [gx, gy] = self.field(zeta)?;
        let s = w.sqrt();
        Ok([gx / s, gy / s])
    }

    /// `Re Ṽ / √W`.
    pub fn normalized_potential(&self, zeta: Complex64) -> Result<f64> {
        let w = self.energy();
        if !(w > 0.0) {
            return Err(invalid("normalization needs a positive dissipation energy"));
        }
        Ok(self.potential(zeta)?.re / w.sqrt())
    }
}

pub fn evaluate_potential_eccentric(sol: &EccentricSolution, zeta: Complex64) -> Result<Complex64> {
    sol.potential(zeta)
}

pub fn energy(sol: &EccentricSolution) -> f64 {
    sol.energy()
}

pub fn normalized_field(sol: &EccentricSolution, zeta: Complex64) -> Result<[f64; 2]> {
    sol.normalized_field(zeta)
}

/// `n` points spread evenly over the closed disk (sunflower spiral).
pub fn disk_samples(center: Complex64, radius: f64, n: usize) -> Vec<Complex64> {
    annulus_samples(center, 0.0, radius, n)
}

/// `n` points spread evenly over `r_in ≤ |ζ − center| ≤ r_out`.
pub fn annulus_samples(center: Complex64, r_in: f64, r_out: f64, n: usize) -> Vec<Complex64> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    let (a2, b2) = (r_in * r_in, r_out * r_out);
    (0..n)
        .map(|k| {
            let frac = if n > 1 { k as f64 / (n - 1) as f64 } else { 0.5 };
            let r = (a2 + frac * (b2 - a2)).sqrt();
            center + Complex64::from_polar(r, golden * k as f64)
        })
        .collect()
}

/// `ζ = Φ(z)`; fails at `z = 1`.
pub fn to_physical(scene: &EccentricScene, z: Complex64) -> Result<Complex64> {
    forward(scene.mobius, z.into())
        .finite()
        .ok_or_else(|| invalid("z = 1 maps to infinity"))
}
