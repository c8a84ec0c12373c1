//! Spectral solution of the concentric core–shell transmission problem.
//!
//! The potential is expanded in angular modes `e^{imθ}` with radial parts
//! `ρ^{±|m|}`; each mode couples four unknowns through continuity of `V`
//! and of `ε ∂V/∂ρ` at the two interfaces. All radial powers are stored
//! relative to the interface radii so coefficients stay bounded for the
//! hundreds of modes a nearly lossless shell excites.

mod solution;
mod source;

pub use solution::{
    resonance_guard, solve, solve_modes, ModeCoefficients, ModeSolutionSet, Region, SolveOptions,
};
pub use source::{expand_source, ExpansionOptions, MultipoleSource, SourceExpansion};

use num_complex::Complex64;

use crate::error::{invalid, Result};
use crate::mobius::ComplexPoint;

/// Core radius `rho_i` and shell radius `rho_e`, `0 < rho_i < rho_e < 1`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnnulusGeometry {
    rho_i: f64,
    rho_e: f64,
}

impl AnnulusGeometry {
    pub fn new(rho_i: f64, rho_e: f64) -> Result<Self> {
        if !(rho_i.is_finite() && rho_e.is_finite()) {
            return Err(invalid("radii must be finite"));
        }
        if !(0.0 < rho_i && rho_i < rho_e && rho_e < 1.0) {
            return Err(invalid(format!(
                "radii must satisfy 0 < rho_i < rho_e < 1, got rho_i = {rho_i}, rho_e = {rho_e}"
            )));
        }
        Ok(Self { rho_i, rho_e })
    }

    pub fn rho_i(&self) -> f64 {
        self.rho_i
    }

    pub fn rho_e(&self) -> f64 {
        self.rho_e
    }

    /// `rho_i / rho_e`, the per-mode coupling ratio of the two interfaces.
    pub fn ratio(&self) -> f64 {
        self.rho_i / self.rho_e
    }
}

/// Relative permittivities of core, shell and background.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PermittivityProfile {
    pub eps_core: Complex64,
    pub eps_shell: Complex64,
    pub eps_background: Complex64,
}

impl PermittivityProfile {
    /// Core and background of permittivity 1, shell `−1 + iδ`.
    pub fn plasmonic(delta: f64) -> Result<Self> {
        Self::new(
            Complex64::new(1.0, 0.0),
            Complex64::new(-1.0, delta),
            Complex64::new(1.0, 0.0),
        )
    }

    pub fn new(
        eps_core: Complex64,
        eps_shell: Complex64,
        eps_background: Complex64,
    ) -> Result<Self> {
        for (name, e) in [("core", eps_core), ("shell", eps_shell), ("background", eps_background)]
        {
            if !e.is_finite() {
                return Err(invalid(format!("{name} permittivity must be finite")));
            }
            if e.im < 0.0 {
                return Err(invalid(format!("{name} permittivity must have Im ≥ 0, got {e}")));
            }
        }
        if eps_background.im != 0.0 {
            return Err(invalid("background permittivity must be real"));
        }
        if eps_background.re == 0.0 {
            return Err(invalid("background permittivity must be nonzero"));
        }
        Ok(Self { eps_core, eps_shell, eps_background })
    }

    /// Loss parameter of the shell.
    pub fn delta(&self) -> f64 {
        self.eps_shell.im
    }
}

/// `ρ* = √(ρₑ³/ρᵢ)`: sources inside `|z| < ρ*` drive the anomalous resonance.
pub fn critical_radius(g: &AnnulusGeometry) -> f64 {
    (g.rho_e.powi(3) / g.rho_i).sqrt()
}

/// `ρ_b = ρₑ²/ρᵢ`: outside it the field stays bounded as the loss vanishes.
pub fn calm_radius(g: &AnnulusGeometry) -> f64 {
    g.rho_e * g.rho_e / g.rho_i
}

/// Whether a source at `z0` lies in the critical disk `|z| < ρ*`.
///
/// The point at infinity is never resonant in the concentric frame. Sources
/// inside the closed shell are rejected.
pub fn is_resonant(g: &AnnulusGeometry, z0: ComplexPoint) -> Result<bool> {
    match z0 {
        ComplexPoint::Infinity => Ok(false),
        ComplexPoint::Finite(z) => {
            let r = z.norm();
            if r <= g.rho_e {
                return Err(invalid(format!(
                    "source at |z| = {r} lies inside the closed shell (rho_e = {})",
                    g.rho_e
                )));
            }
            Ok(r < critical_radius(g))
        }
    }
}
