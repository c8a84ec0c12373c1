//! Independent checks of the spectral solver.
//!
//! Each oracle computes a quantity the solver also produces, through a
//! different route: direct sampling of the transmission conditions, 2-D
//! quadrature of the dissipation integral, a finite-difference solve and a
//! δ-sweep of the energy.

mod fd;
mod quadrature;
mod sweep;

pub use fd::{fd_reference_solve, FdGrid, FdSolution};
pub use quadrature::{quadrature_energy, quadrature_energy_eccentric, QuadratureOptions};
pub use sweep::{blowup_sweep, blowup_sweep_concentric, log_log_slope, SweepResult};

use std::f64::consts::TAU;

use num_complex::Complex64;

use crate::concentric::{ModeSolutionSet, Region};
use crate::error::{invalid, Result};

/// Largest relative jumps across one interface.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct InterfaceResidual {
    /// `max |V⁺ − V⁻|` over the samples, relative to `max |V|` on the circle.
    pub potential: f64,
    /// The same for the normal flux `ε ∂V/∂ρ`.
    pub flux: f64,
}

impl InterfaceResidual {
    pub fn max(&self) -> f64 {
        self.potential.max(self.flux)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualReport {
    /// Core/shell interface `|z| = ρᵢ`.
    pub inner: InterfaceResidual,
    /// Shell/background interface `|z| = ρₑ`.
    pub outer: InterfaceResidual,
    /// Samples per interface.
    pub samples: usize,
}

impl ResidualReport {
    pub fn max_potential(&self) -> f64 {
        self.inner.potential.max(self.outer.potential)
    }

    pub fn max_flux(&self) -> f64 {
        self.inner.flux.max(self.outer.flux)
    }

    pub fn max(&self) -> f64 {
        self.inner.max().max(self.outer.max())
    }
}

/// Samples the transmission conditions on both interfaces.
///
/// The two sides of an interface are evaluated from their own series at the
/// same point on the circle, so the comparison is between exact one-sided
/// limits rather than values at a small offset.
pub fn interface_residual(sol: &ModeSolutionSet, samples: usize) -> Result<ResidualReport> {
    if samples < 64 {
        return Err(invalid(format!("at least 64 samples per interface are needed, got {samples}")));
    }
    let g = sol.geometry();
    let perm = sol.permittivity();
    let inner = interface(
        sol,
        g.rho_i(),
        (Region::Core, perm.eps_core),
        (Region::Shell, perm.eps_shell),
        samples,
    )?;
    let outer = interface(
        sol,
        g.rho_e(),
        (Region::Shell, perm.eps_shell),
        (Region::Exterior, perm.eps_background),
        samples,
    )?;
    Ok(ResidualReport { inner, outer, samples })
}

fn interface(
    sol: &ModeSolutionSet,
    rho: f64,
    (inside, eps_in): (Region, Complex64),
    (outside, eps_out): (Region, Complex64),
    samples: usize,
) -> Result<InterfaceResidual> {
    let mut jump_v: f64 = 0.0;
    let mut jump_f: f64 = 0.0;
    let mut scale_v: f64 = 0.0;
    let mut scale_f: f64 = 0.0;
    for k in 0..samples {
        let dir = Complex64::from_polar(1.0, TAU * k as f64 / samples as f64);
        let z = rho * dir;
        let radial = |region| -> Result<Complex64> {
            let (dz, dzb) = sol.wirtinger_in(region, z)?;
            Ok(dir * dz + dir.conj() * dzb)
        };
        let v_in = sol.potential_in(inside, z)?;
        let v_out = sol.potential_in(outside, z)?;
        let f_in = eps_in * radial(inside)?;
        let f_out = eps_out * radial(outside)?;
        jump_v = jump_v.max((v_in - v_out).norm());
        jump_f = jump_f.max((f_in - f_out).norm());
        scale_v = scale_v.max(v_in.norm()).max(v_out.norm());
        scale_f = scale_f.max(f_in.norm()).max(f_out.norm());
    }
    let rel = |jump: f64, scale: f64| if scale > 0.0 { jump / scale } else { jump };
    Ok(InterfaceResidual { potential: rel(jump_v, scale_v), flux: rel(jump_f, scale_f) })
}
