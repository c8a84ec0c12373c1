//! Finite-difference reference solver on a log-polar grid.
//!
//! With `s = ln r` the equation `∇·ε∇V = 0` becomes
//! `∂ₛ(ε ∂ₛV) + ε ∂²_θ V = 0`. The grid is cell-centred in `s` with both
//! interfaces on cell faces, so every cell holds a single material and the
//! face permittivity across an interface is the harmonic mean of its
//! neighbours (the exact flux of a piecewise-linear profile).
//!
//! The unknown is the correction `u = V − F` to the source potential.
//! Because the discrete background operator annihilates `F` up to
//! truncation error, `u` solves `L_ε u = (L_{ε_b} − L_ε) F`, whose right-hand
//! side vanishes outside the shell and never touches the singularity.
//! Angular modes decouple under the FFT; the remaining tridiagonal systems
//! are closed by exact Dirichlet-to-Neumann conditions for the harmonic
//! continuation of each mode (`r^{|m|}` inside, `r^{−|m|}` outside).

use std::f64::consts::{LN_2, TAU};

use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::concentric::{AnnulusGeometry, MultipoleSource, PermittivityProfile};
use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Requested resolution: about `radial` cells in `ln r` and exactly
/// `angular` cells in `θ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdGrid {
    pub radial: usize,
    pub angular: usize,
    /// The grid extends to `outer_factor · |z₀|`.
    pub outer_factor: f64,
}

impl FdGrid {
    pub fn new(radial: usize, angular: usize) -> Self {
        Self { radial, angular, outer_factor: 4.0 }
    }
}

/// Grid potential `V = F + u` on cell centres.
#[derive(Debug, Clone)]
pub struct FdSolution {
    source: MultipoleSource,
    s_min: f64,
    ds: f64,
    n_s: usize,
    n_theta: usize,
    /// `u` row-major, `s` outer.
    correction: Vec<Complex64>,
}

impl FdSolution {
    pub fn radial_cells(&self) -> usize {
        self.n_s
    }

    pub fn angular_cells(&self) -> usize {
        self.n_theta
    }

    /// Cell width in `ln r`.
    pub fn spacing(&self) -> f64 {
        self.ds
    }

    pub fn radius(&self, j: usize) -> f64 {
        (self.s_min + (j as f64 + 0.5) * self.ds).exp()
    }

    pub fn inner_radius(&self) -> f64 {
        self.s_min.exp()
    }

    pub fn outer_radius(&self) -> f64 {
        (self.s_min + self.n_s as f64 * self.ds).exp()
    }

    /// Node `(j, k)`: radius index `j`, angle `2πk/n_θ`.
    pub fn node(&self, j: usize, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius(j), TAU * k as f64 / self.n_theta as f64)
    }

    /// Complex potential at node `(j, k)`.
    pub fn potential(&self, j: usize, k: usize) -> Result<Complex64> {
        let f = self.source.potential(self.node(j, k))?;
        Ok(self.correction[j * self.n_theta + k] + f)
    }

    pub fn correction(&self, j: usize, k: usize) -> Complex64 {
        self.correction[j * self.n_theta + k]
    }
}

/// Solves the transmission problem for `src` on a log-polar grid over
/// `ρᵢ/2 ≤ r ≤ outer_factor·|z₀|`.
///
/// Meant for moderate loss: a shell with negative real permittivity needs
/// `Im ε ≥ 0.05`.
pub fn fd_reference_solve(
    g: &AnnulusGeometry,
    perm: &PermittivityProfile,
    src: &MultipoleSource,
    grid: FdGrid,
) -> Result<FdSolution> {
    if grid.radial < 8 || grid.angular < 8 {
        return Err(invalid("the grid needs at least 8 cells in each direction"));
    }
    if perm.eps_shell.re < 0.0 && perm.eps_shell.im < 0.05 {
        return Err(invalid("the finite-difference oracle needs a shell loss of at least 0.05"));
    }
    let (ec, es, eb) = (perm.eps_core, perm.eps_shell, perm.eps_background);
    let z0 = src.location().norm();
    let r_out = grid.outer_factor * z0;
    if !(r_out > g.rho_e()) {
        return Err(invalid("the grid must extend beyond the shell"));
    }
    if z0 <= g.rho_e() {
        return Err(invalid("the source must lie outside the shell"));
    }

    let shell_width = (g.rho_e() / g.rho_i()).ln();
    let total = r_out.ln() - (0.5 * g.rho_i()).ln();
    let k_shell = ((grid.radial as f64 * shell_width / total).round() as usize).max(2);
    let ds = shell_width / k_shell as f64;
    let j_i = (LN_2 / ds).ceil() as usize;
    let j_o = ((r_out / g.rho_e()).ln() / ds).ceil() as usize;
    let n_s = j_i + k_shell + j_o;
    let j_e = j_i + k_shell;
    let s_min = g.rho_i().ln() - j_i as f64 * ds;
    let n_t = grid.angular;
    let dt = TAU / n_t as f64;

    let eps: Vec<Complex64> = (0..n_s)
        .map(|j| if j < j_i { ec } else if j < j_e { es } else { eb })
        .collect();
    let mut face = Vec::with_capacity(n_s - 1);
    for j in 0..n_s - 1 {
        let (l, r) = (eps[j], eps[j + 1]);
        face.push(if l == r {
            l
        } else if l + r == ZERO {
            return Err(Error::LinearSolve("face permittivities cancel".into()));
        } else {
            2.0 * l * r / (l + r)
        });
    }

    let sol = FdSolution { source: src.clone(), s_min, ds, n_s, n_theta: n_t, correction: Vec::new() };

    // Right-hand side (L_{ε_b} − L_ε) F, nonzero only on rows 0..=j_e.
    let rows_f = (j_e + 2).min(n_s);
    let mut f = vec![0.0; rows_f * n_t];
    for j in 0..rows_f {
        for k in 0..n_t {
            f[j * n_t + k] = src.potential(sol.node(j, k))?;
        }
    }
    let inv_ds2 = 1.0 / (ds * ds);
    let inv_dt2 = 1.0 / (dt * dt);
    let mut rhs = vec![ZERO; n_s * n_t];
    for j in 0..rows_f.min(j_e + 1) {
        for k in 0..n_t {
            let at = |jj: usize, kk: usize| f[jj * n_t + kk];
            let fc = at(j, k);
            let mut v = ZERO;
            if j + 1 < n_s {
                v += (eb - face[j]) * (at(j + 1, k) - fc) * inv_ds2;
            }
            if j > 0 {
                v -= (eb - face[j - 1]) * (fc - at(j - 1, k)) * inv_ds2;
            } else {
                // analytic flux of F through the inner boundary
                let z = Complex64::from_polar(s_min.exp(), dt * k as f64);
                let (_, ds_f) = src.analytic_with_derivative(z)?;
                v -= (eb - ec) * (z * ds_f).re / ds;
            }
            let lap_t = at(j, (k + 1) % n_t) - 2.0 * fc + at(j, (k + n_t - 1) % n_t);
            v += (eb - eps[j]) * lap_t * inv_dt2;
            rhs[j * n_t + k] = v;
        }
    }

    let mut planner = FftPlanner::<f64>::new();
    let forward = planner.plan_fft_forward(n_t);
    let backward = planner.plan_fft_inverse(n_t);
    for row in rhs.chunks_mut(n_t) {
        forward.process(row);
    }

    let mut column = vec![ZERO; n_s];
    let (mut lower, mut diag, mut upper) = (vec![ZERO; n_s - 1], vec![ZERO; n_s], vec![ZERO; n_s - 1]);
    for m in 0..n_t {
        let lambda = (2.0 / dt * (std::f64::consts::PI * m as f64 / n_t as f64).sin()).powi(2);
        let mu = lambda.sqrt();
        for j in 0..n_s {
            let below = if j > 0 { face[j - 1] * inv_ds2 } else { ZERO };
            let above = if j + 1 < n_s { face[j] * inv_ds2 } else { ZERO };
            diag[j] = -below - above - eps[j] * lambda;
            if j > 0 {
                lower[j - 1] = below;
            }
            if j + 1 < n_s {
                upper[j] = above;
            }
            column[j] = rhs[j * n_t + m];
        }
        // inner face: regular harmonic continuation, ∂ₛu = μu
        diag[0] -= ec * mu / (1.0 + 0.5 * mu * ds) / ds;
        // outer face: decaying continuation, ∂ₛu = −μu; u → 0 for m = 0
        if m == 0 {
            diag[n_s - 1] -= 2.0 * eb * inv_ds2;
        } else {
            diag[n_s - 1] -= eb * mu / (1.0 + 0.5 * mu * ds) / ds;
        }
        solve_tridiagonal(&mut lower, &mut diag, &mut upper, &mut column)
            .map_err(|row| Error::LinearSolve(format!("zero pivot at row {row} of mode {m}")))?;
        for j in 0..n_s {
            rhs[j * n_t + m] = column[j];
        }
    }
    let scale = 1.0 / n_t as f64;
    for row in rhs.chunks_mut(n_t) {
        backward.process(row);
        row.iter_mut().for_each(|v| *v *= scale);
    }
    Ok(FdSolution { correction: rhs, ..sol })
}

/// Gaussian elimination with partial pivoting on a tridiagonal system.
///
/// Overwrites `b` with the solution; the bands are destroyed. On failure
/// returns the row with a zero pivot.
fn solve_tridiagonal(
    dl: &mut [Complex64],
    d: &mut [Complex64],
    du: &mut [Complex64],
    b: &mut [Complex64],
) -> std::result::Result<(), usize> {
    let n = d.len();
    if n == 0 {
        return Ok(());
    }
    // dl[i] doubles as the second superdiagonal once row i is eliminated.
    for i in 0..n - 1 {
        if d[i].norm() >= dl[i].norm() {
            if d[i] == ZERO {
                return Err(i);
            }
            let fact = dl[i] / d[i];
            d[i + 1] -= fact * du[i];
            b[i + 1] -= fact * b[i];
            dl[i] = ZERO;
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            let temp = d[i + 1];
            d[i + 1] = du[i] - fact * temp;
            if i + 2 < n {
                dl[i] = du[i + 1];
                du[i + 1] = -fact * dl[i];
            } else {
                dl[i] = ZERO;
            }
            du[i] = temp;
            let bi = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bi - fact * b[i + 1];
        }
    }
    if d[n - 1] == ZERO {
        return Err(n - 1);
    }
    b[n - 1] /= d[n - 1];
    if n > 1 {
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    }
    for i in (0..n.saturating_sub(2)).rev() {
        b[i] = (b[i] - du[i] * b[i + 1] - dl[i] * b[i + 2]) / d[i];
    }
    Ok(())
}
