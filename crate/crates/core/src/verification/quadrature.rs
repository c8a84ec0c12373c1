use std::f64::consts::TAU;
use std::num::NonZeroUsize;

use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;
use rayon::prelude::*;

use crate::concentric::{ModeSolutionSet, Region};
use crate::eccentric::{geometry_report, EccentricSolution};
use crate::error::{Error, Result};

/// Refinement schedule for the tensor-product rules.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureOptions {
    /// Stop once two successive levels agree to this relative change.
    pub tol: f64,
    pub radial_start: usize,
    pub angular_start: usize,
    /// Refinement stops with an error beyond this many angular nodes.
    pub angular_cap: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self { tol: 1e-9, radial_start: 16, angular_start: 64, angular_cap: 1 << 15 }
    }
}

/// Doubles both node counts until `rule(n_radial, n_angular)` settles.
fn refine(opts: QuadratureOptions, rule: impl Fn(usize, usize) -> Result<f64>) -> Result<f64> {
    let (mut nr, mut nt) = (opts.radial_start.max(1), opts.angular_start.max(4));
    let mut prev = rule(nr, nt)?;
    loop {
        nr *= 2;
        nt *= 2;
        if nt > opts.angular_cap {
            return Err(Error::Quadrature(format!(
                "no convergence to {:e} within {} angular nodes",
                opts.tol, opts.angular_cap
            )));
        }
        let next = rule(nr, nt)?;
        let change = (next - prev).abs();
        if change <= opts.tol * next.abs() || (next == 0.0 && prev == 0.0) {
            return Ok(next);
        }
        prev = next;
    }
}

fn gauss(n: usize) -> GaussLegendre {
    GaussLegendre::new(NonZeroUsize::new(n).expect("node count is positive"))
}

/// `Σ wᵢ f(xᵢ)` for the Gauss–Legendre rule mapped to `[a, b]`.
fn mapped(rule: &GaussLegendre, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    rule.as_node_weight_pairs().iter().map(move |&(x, w)| (mid + half * x, half * w))
}

/// `|∇V|² = 2(|∂V/∂z|² + |∂V/∂z̄|²)` for complex-valued `V`.
fn grad_sq(sol: &ModeSolutionSet, region: Region, z: Complex64) -> Result<f64> {
    let (dz, dzb) = sol.wirtinger_in(region, z)?;
    Ok(2.0 * (dz.norm_sqr() + dzb.norm_sqr()))
}

/// `∫ |∇V|²` over `a < |z| < b` with the series of `region`.
fn polar_integral(
    sol: &ModeSolutionSet,
    region: Region,
    a: f64,
    b: f64,
    nr: usize,
    nt: usize,
) -> Result<f64> {
    let rule = gauss(nr);
    let nodes: Vec<(f64, f64)> = mapped(&rule, a, b).collect();
    let dtheta = TAU / nt as f64;
    let rows: Result<Vec<f64>> = nodes
        .par_iter()
        .map(|&(r, w)| {
            let mut acc = 0.0;
            for k in 0..nt {
                acc += grad_sq(sol, region, Complex64::from_polar(r, dtheta * k as f64))?;
            }
            Ok(w * r * acc * dtheta)
        })
        .collect();
    Ok(rows?.iter().sum())
}

/// `Im ε_s ∫_shell |∇V|² + Im ε_c ∫_core |∇V|²` by Gauss–Legendre in the
/// radius and the trapezoidal rule in the angle.
pub fn quadrature_energy(sol: &ModeSolutionSet) -> Result<f64> {
    quadrature_energy_with(sol, QuadratureOptions::default())
}

pub fn quadrature_energy_with(sol: &ModeSolutionSet, opts: QuadratureOptions) -> Result<f64> {
    let g = *sol.geometry();
    let perm = *sol.permittivity();
    refine(opts, |nr, nt| {
        let mut w = 0.0;
        if perm.eps_shell.im != 0.0 {
            w += perm.eps_shell.im * polar_integral(sol, Region::Shell, g.rho_i(), g.rho_e(), nr, nt)?;
        }
        if perm.eps_core.im != 0.0 {
            w += perm.eps_core.im * polar_integral(sol, Region::Core, 0.0, g.rho_i(), nr, nt)?;
        }
        Ok(w)
    })
}

/// The dissipation integral evaluated in the ζ-plane over the eccentric
/// shell `Ω̃ₑ \ Ω̃ᵢ`.
///
/// Uses polar coordinates about the centre of `Ω̃ᵢ`: each ray leaves the core
/// at radius `rᵢ` and the device where it meets `∂Ω̃ₑ`.
pub fn quadrature_energy_eccentric(sol: &EccentricSolution) -> Result<f64> {
    quadrature_energy_eccentric_with(sol, QuadratureOptions::default())
}

pub fn quadrature_energy_eccentric_with(
    sol: &EccentricSolution,
    opts: QuadratureOptions,
) -> Result<f64> {
    let report = geometry_report(sol.scene())?;
    let (ci, ri) = (report.inner.center, report.inner.radius);
    let (ce, re) = (report.outer.center, report.outer.radius);
    let perm = *sol.scene().permittivity();
    let offset = ci - ce;
    let exit = |u: Complex64| {
        let b = (offset * u.conj()).re;
        -b + (b * b - offset.norm_sqr() + re * re).sqrt()
    };
    let integrand = |zeta: Complex64| -> Result<f64> {
        let [gx, gy] = sol.gradient(zeta)?;
        Ok(gx.norm_sqr() + gy.norm_sqr())
    };
    refine(opts, |nr, nt| {
        let rule = gauss(nr);
        let dphi = TAU / nt as f64;
        let rays: Result<Vec<f64>> = (0..nt)
            .into_par_iter()
            .map(|k| {
                let u = Complex64::from_polar(1.0, dphi * k as f64);
                let mut acc = 0.0;
                if perm.eps_shell.im != 0.0 {
                    for (t, w) in mapped(&rule, ri, exit(u)) {
                        acc += perm.eps_shell.im * w * t * integrand(ci + t * u)?;
                    }
                }
                if perm.eps_core.im != 0.0 {
                    for (t, w) in mapped(&rule, 0.0, ri) {
                        acc += perm.eps_core.im * w * t * integrand(ci + t * u)?;
                    }
                }
                Ok(acc * dphi)
            })
            .collect();
        Ok(rays?.iter().sum())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentric::{
        solve, AnnulusGeometry, ModeCoefficients, MultipoleSource, PermittivityProfile,
        SolveOptions,
    };
    use crate::eccentric::{self, EccentricScene, SourceSpec};
    use crate::mobius::MobiusParameter;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn matches_closed_form() {
        let g = AnnulusGeometry::new(0.55, 0.7).unwrap();
        let src = MultipoleSource::dipole(c(0.2, 0.8), c(3.0, -3.0)).unwrap();
        for delta in [0.5, 0.1, 0.01] {
            let perm = PermittivityProfile::plasmonic(delta).unwrap();
            let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
            let w = sol.dissipation_energy();
            let q = quadrature_energy(&sol).unwrap();
            assert!((q - w).abs() <= 1e-8 * w, "δ = {delta}: {q} vs {w}");
        }
    }

    #[test]
    fn lossy_core_is_included() {
        let g = AnnulusGeometry::new(0.4, 0.7).unwrap();
        let perm = PermittivityProfile::new(c(2.0, 0.3), c(-1.0, 0.2), c(1.0, 0.0)).unwrap();
        let src = MultipoleSource::dipole(c(1.5, 0.3), c(1.0, 0.5)).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        let w = sol.dissipation_energy();
        let q = quadrature_energy(&sol).unwrap();
        assert!((q - w).abs() <= 1e-8 * w, "{q} vs {w}");
    }

    #[test]
    fn single_mode_by_hand() {
        // V = Re z in the shell has |∇V|² = 1; V = z has |∇V|² = 2.
        let g = AnnulusGeometry::new(0.3, 0.6).unwrap();
        let delta = 0.25;
        let perm = PermittivityProfile::plasmonic(delta).unwrap();
        let zero = c(0.0, 0.0);
        let mode = |b: f64| ModeCoefficients::from_physical(1, &g, zero, c(b, 0.0), zero, zero);
        let area = std::f64::consts::PI * (0.6f64.powi(2) - 0.3f64.powi(2));
        for (plus, minus, expected) in
            [(mode(0.5), mode(0.5), delta * area), (mode(1.0), mode(0.0), 2.0 * delta * area)]
        {
            let sol = ModeSolutionSet::from_modes(g, perm, vec![plus], vec![minus]).unwrap();
            let q = quadrature_energy(&sol).unwrap();
            assert!((q - expected).abs() < 1e-12, "{q} vs {expected}");
        }
    }

    #[test]
    fn zero_source() {
        let g = AnnulusGeometry::new(0.55, 0.7).unwrap();
        let perm = PermittivityProfile::plasmonic(0.1).unwrap();
        let src = MultipoleSource::dipole(c(0.9, 0.0), c(0.0, 0.0)).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        assert_eq!(quadrature_energy(&sol).unwrap(), 0.0);
    }

    #[test]
    fn eccentric_energy_is_invariant() {
        let src = MultipoleSource::from_dipole_moment(c(-3.4, 3.5), c(3.0, -3.0)).unwrap();
        for delta in [0.5, 0.1] {
            let scene = EccentricScene::new(
                MobiusParameter::new(1.0).unwrap(),
                AnnulusGeometry::new(0.55, 0.7).unwrap(),
                delta,
                SourceSpec::Multipole(src.clone()),
            )
            .unwrap();
            let sol = eccentric::solve(&scene).unwrap();
            let w = sol.energy();
            let q = quadrature_energy_eccentric(&sol).unwrap();
            assert!((q - w).abs() <= 1e-6 * w, "δ = {delta}: {q} vs {w}");
        }
    }
}
