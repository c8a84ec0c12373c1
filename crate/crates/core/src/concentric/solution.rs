use std::f64::consts::TAU;

use num_complex::Complex64;

use super::source::{expand_source, ExpansionOptions, MultipoleSource, SourceExpansion};
use super::{AnnulusGeometry, PermittivityProfile};
use crate::error::{Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Coefficients of one angular mode `m`, `n = |m|`, normalized at the interfaces.
///
/// With `A, B, C, D` the raw coefficients of
/// `A r^n` (core), `B r^n + C r^{−n}` (shell), `D r^{−n}` (reflected exterior):
///
/// * `core = A ρᵢⁿ`
/// * `shell_growing = B ρₑⁿ`
/// * `shell_decaying = C ρᵢ^{−n}`
/// * `reflected = D ρₑ^{−n}`
///
/// Each is the value of its term at the interface where the term is largest,
/// so none of them overflows however large `n` gets.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ModeCoefficients {
    pub core: Complex64,
    pub shell_growing: Complex64,
    pub shell_decaying: Complex64,
    pub reflected: Complex64,
}

impl ModeCoefficients {
    /// Normalizes raw `A, B, C, D` for a mode of order `n ≥ 1`.
    pub fn from_physical(
        n: u32,
        g: &AnnulusGeometry,
        a: Complex64,
        b: Complex64,
        c: Complex64,
        d: Complex64,
    ) -> Self {
        let n = n as i32;
        Self {
            core: a * g.rho_i().powi(n),
            shell_growing: b * g.rho_e().powi(n),
            shell_decaying: c * g.rho_i().powi(-n),
            reflected: d * g.rho_e().powi(-n),
        }
    }

    /// Raw `[A, B, C, D]`; may overflow for large `n`.
    pub fn to_physical(&self, n: u32, g: &AnnulusGeometry) -> [Complex64; 4] {
        let n = n as i32;
        [
            self.core / g.rho_i().powi(n),
            self.shell_growing / g.rho_e().powi(n),
            self.shell_decaying / g.rho_i().powi(-n),
            self.reflected / g.rho_e().powi(-n),
        ]
    }

    fn max_norm(&self) -> f64 {
        self.core
            .norm()
            .max(self.shell_growing.norm())
            .max(self.shell_decaying.norm())
            .max(self.reflected.norm())
    }
}

/// Region of the concentric plane, by radius.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    /// `|z| < ρᵢ`
    Core,
    /// `ρᵢ ≤ |z| ≤ ρₑ`
    Shell,
    /// `|z| > ρₑ`
    Exterior,
}

impl Region {
    pub fn of(g: &AnnulusGeometry, z: Complex64) -> Self {
        let r = z.norm();
        if r < g.rho_i() {
            Self::Core
        } else if r <= g.rho_e() {
            Self::Shell
        } else {
            Self::Exterior
        }
    }
}

/// Solved potential of the concentric annulus.
///
/// The potential is complex valued (the shell permittivity is complex); its
/// real part is the physical potential. In the exterior it is the exact
/// source potential plus the reflected series. Immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeSolutionSet {
    geometry: AnnulusGeometry,
    permittivity: PermittivityProfile,
    source: Option<MultipoleSource>,
    /// `m = 0` term: the constant `F(0)`, continuous across both interfaces.
    constant: f64,
    /// Incident amplitudes on `|z| = ρₑ` for `m = 1..M` (negative modes are conjugates).
    incident: Vec<Complex64>,
    /// Modes `m = 1..M`.
    plus: Vec<ModeCoefficients>,
    /// Modes `m = −1..−M`.
    minus: Vec<ModeCoefficients>,
}

/// Solves the four interface conditions of every mode in `exp`.
///
/// In normalized unknowns (`a, b, c, d` as in [`ModeCoefficients`], incident
/// amplitude `p`, `s = (ρᵢ/ρₑ)ⁿ`) the conditions read
///
/// ```text
/// a = b s + c                 ε_c a = ε_s (b s − c)
/// b + c s = p + d             ε_s (b − c s) = ε_b (p − d)
/// ```
///
/// Elimination gives a common denominator
/// `(ε_b+ε_s)(ε_s+ε_c) + s²(ε_s−ε_c)(ε_b−ε_s)`, which for `ε_s = −1+iδ`
/// becomes `−δ² − s²(2−iδ)²`; the reflected coefficient is formed directly
/// rather than by the cancelling difference `b + c s − p`.
pub fn solve_modes(
    g: &AnnulusGeometry,
    perm: &PermittivityProfile,
    exp: &SourceExpansion,
) -> Result<ModeSolutionSet> {
    if (exp.reference_radius() - g.rho_e()).abs() > 1e-14 * g.rho_e() {
        return Err(crate::error::invalid("expansion must be normalized at rho_e"));
    }
    let t = g.ratio();
    let incident = exp.positive_scaled().to_vec();
    let mut plus = Vec::with_capacity(incident.len());
    let mut minus = Vec::with_capacity(incident.len());
    let mut s = 1.0;
    for (idx, p) in incident.iter().enumerate() {
        s *= t;
        let n = idx as i64 + 1;
        plus.push(solve_single_mode(perm, s, *p).ok_or(Error::ResonanceSingularity { mode: n })?);
        minus.push(
            solve_single_mode(perm, s, p.conj()).ok_or(Error::ResonanceSingularity { mode: -n })?,
        );
    }
    Ok(ModeSolutionSet {
        geometry: *g,
        permittivity: *perm,
        source: Some(exp.source().clone()),
        constant: exp.constant(),
        incident,
        plus,
        minus,
    })
}

fn solve_single_mode(perm: &PermittivityProfile, s: f64, p: Complex64) -> Option<ModeCoefficients> {
    let (ec, es, eb) = (perm.eps_core, perm.eps_shell, perm.eps_background);
    let s2 = s * s;
    let den = (eb + es) * (es + ec) + s2 * (es - ec) * (eb - es);
    if den == ZERO || !den.is_finite() {
        return None;
    }
    let p_over = p / den;
    Some(ModeCoefficients {
        core: 4.0 * eb * es * s * p_over,
        shell_growing: 2.0 * eb * (es + ec) * p_over,
        shell_decaying: 2.0 * eb * s * (es - ec) * p_over,
        reflected: ((eb - es) * (es + ec) + s2 * (es - ec) * (eb + es)) * p_over,
    })
}

/// Mode count below which resonant amplification may still lift a mode:
/// `2 ln δ / ln(ρᵢ/ρₑ)` for `0 < δ < 1`, zero otherwise.
pub fn resonance_guard(g: &AnnulusGeometry, perm: &PermittivityProfile) -> usize {
    let delta = perm.delta();
    if delta > 0.0 && delta < 1.0 {
        (2.0 * delta.ln() / g.ratio().ln()).ceil() as usize
    } else {
        0
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveOptions {
    /// Relative tolerance on both the source expansion tail and the tail
    /// of the solved coefficients.
    pub tol: f64,
    pub mode_cap: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self { tol: 1e-13, mode_cap: 4096 }
    }
}

/// Expands `src`, solves every mode and extends the truncation until the
/// solved coefficients (not just the incident ones) have a negligible tail.
///
/// Near-resonant modes are amplified by up to `1/δ`, so a source mode that
/// is negligible on its own can dominate the solution.
pub fn solve(
    g: &AnnulusGeometry,
    perm: &PermittivityProfile,
    src: &MultipoleSource,
    opts: SolveOptions,
) -> Result<ModeSolutionSet> {
    const TAIL: usize = 8;
    let mut min_modes = resonance_guard(g, perm).min(opts.mode_cap);
    loop {
        let exp = expand_source(
            src,
            g.rho_e(),
            ExpansionOptions { tol: opts.tol, min_modes, mode_cap: opts.mode_cap },
        )?;
        let sol = solve_modes(g, perm, &exp)?;
        let m = sol.truncation();
        if m == 0 {
            return Ok(sol);
        }
        let peak = sol.all_modes().map(|(_, c)| c.max_norm()).fold(0.0, f64::max);
        let tail = sol.plus[m.saturating_sub(TAIL)..]
            .iter()
            .chain(&sol.minus[m.saturating_sub(TAIL)..])
            .map(ModeCoefficients::max_norm)
            .fold(0.0, f64::max);
        if tail <= opts.tol * peak {
            return Ok(sol);
        }
        if m >= opts.mode_cap {
            return Err(Error::Truncation { tol: opts.tol, cap: opts.mode_cap });
        }
        min_modes = (2 * m).min(opts.mode_cap);
    }
}

/// `Σ_{n=1}^{M} cₙ wⁿ` and `Σ n cₙ w^{n−1}` by Horner's rule.
fn series(
    modes: &[ModeCoefficients],
    pick: impl Fn(&ModeCoefficients) -> Complex64,
    w: Complex64,
) -> (Complex64, Complex64) {
    let mut value = ZERO;
    let mut deriv = ZERO;
    for (idx, mode) in modes.iter().enumerate().rev() {
        let c = pick(mode);
        value = (value + c) * w;
        deriv = deriv * w + c * (idx + 1) as f64;
    }
    (value, deriv)
}

impl ModeSolutionSet {
    /// A solution assembled from explicit coefficients, without a source.
    ///
    /// `plus[k]` and `minus[k]` hold modes `m = k+1` and `m = −(k+1)`.
    pub fn from_modes(
        geometry: AnnulusGeometry,
        permittivity: PermittivityProfile,
        plus: Vec<ModeCoefficients>,
        minus: Vec<ModeCoefficients>,
    ) -> Result<Self> {
        if plus.len() != minus.len() {
            return Err(crate::error::invalid("positive and negative mode counts differ"));
        }
        Ok(Self {
            geometry,
            permittivity,
            source: None,
            constant: 0.0,
            incident: vec![ZERO; plus.len()],
            plus,
            minus,
        })
    }

    /// A copy with mode `m` replaced.
    pub fn with_mode(&self, m: i64, coeffs: ModeCoefficients) -> Result<Self> {
        let mut out = self.clone();
        let n = m.unsigned_abs() as usize;
        let slot = match m {
            0 => None,
            m if m > 0 => out.plus.get_mut(n - 1),
            _ => out.minus.get_mut(n - 1),
        };
        *slot.ok_or_else(|| crate::error::invalid(format!("mode {m} is not stored")))? = coeffs;
        Ok(out)
    }

    pub fn geometry(&self) -> &AnnulusGeometry {
        &self.geometry
    }

    pub fn permittivity(&self) -> &PermittivityProfile {
        &self.permittivity
    }

    pub fn source(&self) -> Option<&MultipoleSource> {
        self.source.as_ref()
    }

    /// The `m = 0` constant shared by all three regions.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn truncation(&self) -> usize {
        self.plus.len()
    }

    pub fn mode(&self, m: i64) -> Option<&ModeCoefficients> {
        let n = m.unsigned_abs() as usize;
        match m {
            0 => None,
            m if m > 0 => self.plus.get(n - 1),
            _ => self.minus.get(n - 1),
        }
    }

    /// Incident amplitude `α_m ρₑ^{|m|}`.
    pub fn incident(&self, m: i64) -> Complex64 {
        let n = m.unsigned_abs() as usize;
        match self.incident.get(n.wrapping_sub(1)) {
            Some(p) if m > 0 => *p,
            Some(p) if m < 0 => p.conj(),
            _ => ZERO,
        }
    }

    /// All stored modes as `(m, coefficients)`.
    pub fn all_modes(&self) -> impl Iterator<Item = (i64, &ModeCoefficients)> {
        let pos = self.plus.iter().enumerate().map(|(k, c)| (k as i64 + 1, c));
        let neg = self.minus.iter().enumerate().map(|(k, c)| (-(k as i64) - 1, c));
        pos.chain(neg)
    }

    /// Largest relative residual of the four interface equations of mode `m`.
    pub fn mode_residual(&self, m: i64) -> f64 {
        let Some(c) = self.mode(m) else { return 0.0 };
        let s = self.geometry.ratio().powi(m.unsigned_abs() as i32);
        let p = self.incident(m);
        let PermittivityProfile { eps_core: ec, eps_shell: es, eps_background: eb } =
            self.permittivity;
        let rel = |lhs: &[Complex64], rhs: &[Complex64]| {
            let l: Complex64 = lhs.iter().sum();
            let r: Complex64 = rhs.iter().sum();
            let scale = lhs.iter().chain(rhs).map(|x| x.norm()).fold(0.0, f64::max);
            if scale == 0.0 {
                0.0
            } else {
                (l - r).norm() / scale
            }
        };
        let (a, b, cc, d) = (c.core, c.shell_growing, c.shell_decaying, c.reflected);
        [
            rel(&[a], &[b * s, cc]),
            rel(&[ec * a], &[es * b * s, -es * cc]),
            rel(&[b, cc * s], &[p, d]),
            rel(&[es * b, -es * cc * s], &[eb * p, -eb * d]),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    /// Largest [`mode_residual`](Self::mode_residual) over all modes.
    pub fn max_mode_residual(&self) -> f64 {
        self.all_modes().map(|(m, _)| self.mode_residual(m)).fold(0.0, f64::max)
    }

    /// Complex potential at `z`, dispatched on `|z|`.
    pub fn evaluate_potential(&self, z: Complex64) -> Result<Complex64> {
        self.potential_in(Region::of(&self.geometry, z), z)
    }

    /// Complex potential from the series of `region`, evaluated at `z`
    /// whether or not `z` lies in that region. At an interface this gives
    /// the one-sided limit from the chosen side.
    pub fn potential_in(&self, region: Region, z: Complex64) -> Result<Complex64> {
        let (ri, re) = (self.geometry.rho_i(), self.geometry.rho_e());
        let k = Complex64::new(self.constant, 0.0);
        match region {
            Region::Core => {
                let (gp, _) = series(&self.plus, |c| c.core, z / ri);
                let (gm, _) = series(&self.minus, |c| c.core, z.conj() / ri);
                Ok(k + gp + gm)
            }
            Region::Shell => {
                require_nonzero(z)?;
                let (bp, _) = series(&self.plus, |c| c.shell_growing, z / re);
                let (bm, _) = series(&self.minus, |c| c.shell_growing, z.conj() / re);
                let (cp, _) = series(&self.plus, |c| c.shell_decaying, ri / z.conj());
                let (cm, _) = series(&self.minus, |c| c.shell_decaying, ri / z);
                Ok(k + bp + bm + cp + cm)
            }
            Region::Exterior => {
                require_nonzero(z)?;
                let (dp, _) = series(&self.plus, |c| c.reflected, re / z.conj());
                let (dm, _) = series(&self.minus, |c| c.reflected, re / z);
                let incident = match &self.source {
                    Some(src) => src.potential(z)?,
                    None => 0.0,
                };
                Ok(incident + dp + dm)
            }
        }
    }

    /// Wirtinger derivatives `(∂V/∂z, ∂V/∂z̄)` from the series of `region`.
    pub fn wirtinger_in(&self, region: Region, z: Complex64) -> Result<(Complex64, Complex64)> {
        let (ri, re) = (self.geometry.rho_i(), self.geometry.rho_e());
        match region {
            Region::Core => {
                let (_, dp) = series(&self.plus, |c| c.core, z / ri);
                let (_, dm) = series(&self.minus, |c| c.core, z.conj() / ri);
                Ok((dp / ri, dm / ri))
            }
            Region::Shell => {
                require_nonzero(z)?;
                let zb = z.conj();
                let (_, bp) = series(&self.plus, |c| c.shell_growing, z / re);
                let (_, bm) = series(&self.minus, |c| c.shell_growing, zb / re);
                let (_, cp) = series(&self.plus, |c| c.shell_decaying, ri / zb);
                let (_, cm) = series(&self.minus, |c| c.shell_decaying, ri / z);
                Ok((bp / re - cm * ri / (z * z), bm / re - cp * ri / (zb * zb)))
            }
            Region::Exterior => {
                require_nonzero(z)?;
                let zb = z.conj();
                let (_, dp) = series(&self.plus, |c| c.reflected, re / zb);
                let (_, dm) = series(&self.minus, |c| c.reflected, re / z);
                let mut dz = -dm * re / (z * z);
                let mut dzb = -dp * re / (zb * zb);
                if let Some(src) = &self.source {
                    // F = (S + conj S)/2
                    let (_, ds) = src.analytic_with_derivative(z)?;
                    dz += 0.5 * ds;
                    dzb += 0.5 * ds.conj();
                }
                Ok((dz, dzb))
            }
        }
    }

    /// Complex gradient `(∂V/∂x, ∂V/∂y)`; the real parts form the gradient
    /// of the physical potential `Re V`.
    pub fn evaluate_field(&self, z: Complex64) -> Result<[Complex64; 2]> {
        self.field_in(Region::of(&self.geometry, z), z)
    }

    pub fn field_in(&self, region: Region, z: Complex64) -> Result<[Complex64; 2]> {
        let (dz, dzb) = self.wirtinger_in(region, z)?;
        Ok([dz + dzb, Complex64::i() * (dz - dzb)])
    }

    /// `W = Im ∫ ε |∇V|²` from the closed-form mode sum.
    ///
    /// Angular orthogonality removes all cross terms between modes, and
    /// within a mode the growing and decaying shell terms do not interact:
    /// `∫_shell |∇(B rⁿ + C r⁻ⁿ) e^{imθ}|² = 2πn (|b|² + |c|²)(1 − s²)`.
    pub fn dissipation_energy(&self) -> f64 {
        let t = self.geometry.ratio();
        let loss_shell = self.permittivity.eps_shell.im;
        let loss_core = self.permittivity.eps_core.im;
        let mut shell = 0.0;
        let mut core = 0.0;
        let mut s = 1.0;
        for (idx, (p, m)) in self.plus.iter().zip(&self.minus).enumerate() {
            s *= t;
            let n = (idx + 1) as f64;
            let w = 1.0 - s * s;
            for c in [p, m] {
                shell += n * (c.shell_growing.norm_sqr() + c.shell_decaying.norm_sqr()) * w;
                core += n * c.core.norm_sqr();
            }
        }
        TAU * (loss_shell * shell + loss_core * core)
    }
}

fn require_nonzero(z: Complex64) -> Result<()> {
    if z == ZERO {
        Err(crate::error::invalid("evaluation at the origin outside the core"))
    } else {
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::concentric::{critical_radius, PermittivityProfile};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn fig4() -> AnnulusGeometry {
        AnnulusGeometry::new(0.55, 0.7).unwrap()
    }

    /// Dense 4×4 solve with partial pivoting on the normalized interface system.
    fn direct_mode_solve(perm: &PermittivityProfile, s: f64, p: Complex64) -> [Complex64; 4] {
        let (ec, es, eb) = (perm.eps_core, perm.eps_shell, perm.eps_background);
        let one = c(1.0, 0.0);
        // unknowns (a, b, c, d)
        let mut m = [
            [one, -s * one, -one, ZERO, ZERO],
            [ec, -es * s, es, ZERO, ZERO],
            [ZERO, one, s * one, -one, p],
            [ZERO, es, -es * s, eb, eb * p],
        ];
        for col in 0..4 {
            let piv = (col..4).max_by(|&i, &j| m[i][col].norm().total_cmp(&m[j][col].norm())).unwrap();
            m.swap(col, piv);
            for row in col + 1..4 {
                let f = m[row][col] / m[col][col];
                for k in col..5 {
                    let v = m[col][k];
                    m[row][k] -= f * v;
                }
            }
        }
        let mut x = [ZERO; 4];
        for row in (0..4).rev() {
            let mut acc = m[row][4];
            for k in row + 1..4 {
                acc -= m[row][k] * x[k];
            }
            x[row] = acc / m[row][row];
        }
        x
    }

    #[test]
    fn closed_form_matches_direct_solve() {
        for delta in [0.5, 0.1, 1e-3] {
            let perm = PermittivityProfile::plasmonic(delta).unwrap();
            for n in [1, 2, 5, 12, 30] {
                let s = fig4().ratio().powi(n);
                let p = c(0.3, -0.7);
                let closed = solve_single_mode(&perm, s, p).unwrap();
                let direct = direct_mode_solve(&perm, s, p);
                let got = [closed.core, closed.shell_growing, closed.shell_decaying, closed.reflected];
                let scale = got.iter().map(|x| x.norm()).fold(0.0, f64::max);
                for (g, d) in got.iter().zip(direct) {
                    assert!((g - d).norm() <= 1e-10 * scale, "δ={delta} n={n}: {g} vs {d}");
                }
            }
        }
    }

    #[test]
    fn resonant_mode_location() {
        let delta = 1e-6;
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(delta).unwrap();
        let (es, t) = (perm.eps_shell, g.ratio());
        let p = c(1.0, 0.0);
        // |den| falls from ~4s² to ~δ²; the crossover s = δ/2 is where the
        // decaying shell term is amplified most.
        let expected = (0.5 * delta).ln() / t.ln();
        let (n_peak, _) = (1..400)
            .map(|n| (n, solve_single_mode(&perm, t.powi(n), p).unwrap().shell_decaying.norm()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((n_peak as f64 - expected).abs() <= 1.0, "{n_peak} vs {expected}");
        // The closed form uses the denominator (ε_s+1)² − (ε_s−1)² s² up to normalization.
        for n in [3, 40, 57, 80] {
            let s = t.powi(n);
            let sol = solve_single_mode(&perm, s, p).unwrap();
            let den = (es + 1.0) * (es + 1.0) - (es - 1.0) * (es - 1.0) * s * s;
            let expected_b = 2.0 * (es + 1.0) * p / den;
            assert!((sol.shell_growing - expected_b).norm() <= 1e-12 * expected_b.norm());
        }
    }

    #[test]
    fn no_contrast_reproduces_source() {
        let g = fig4();
        let perm = PermittivityProfile::new(c(1.0, 0.0), c(1.0, 0.0), c(1.0, 0.0)).unwrap();
        let src = MultipoleSource::dipole(c(0.6, 0.9), c(1.0, -2.0)).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        for (m, coeffs) in sol.all_modes() {
            let p = sol.incident(m);
            let n = m.unsigned_abs() as i32;
            assert!((coeffs.shell_growing - p).norm() <= 1e-15 * (1.0 + p.norm()));
            assert!((coeffs.core - p * g.ratio().powi(n)).norm() <= 1e-15);
            assert!(coeffs.shell_decaying.norm() == 0.0 && coeffs.reflected.norm() == 0.0);
        }
        for k in 0..40 {
            let z = Complex64::from_polar(0.1 + 0.05 * k as f64, 0.7 * k as f64);
            let v = sol.evaluate_potential(z).unwrap();
            let f = src.potential(z).unwrap();
            assert!((v.re - f).abs() < 1e-11 * (1.0 + f.abs()) && v.im.abs() < 1e-11);
        }
    }

    #[test]
    fn residuals_at_tiny_loss() {
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(1e-12).unwrap();
        let src = MultipoleSource::dipole(c(0.75, 0.0), c(1.0, 0.0)).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        assert!(sol.max_mode_residual() < 1e-10, "{}", sol.max_mode_residual());
        assert!(sol.truncation() >= resonance_guard(&g, &perm));
    }

    #[test]
    fn continuity_and_decay() {
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(0.05).unwrap();
        let src = MultipoleSource::new(c(-0.4, 0.8), vec![c(1.0, 1.0), c(0.2, 0.0)]).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        for k in 0..90 {
            let th = k as f64 * TAU / 90.0;
            for (inner, outer, rho) in [
                (Region::Core, Region::Shell, g.rho_i()),
                (Region::Shell, Region::Exterior, g.rho_e()),
            ] {
                let z = Complex64::from_polar(rho, th);
                let a = sol.potential_in(inner, z).unwrap();
                let b = sol.potential_in(outer, z).unwrap();
                assert!((a - b).norm() <= 1e-8 * a.norm().max(1.0));
            }
        }
        // Far field: source potential plus O(1/|z|).
        let excess = |r: f64| {
            let z = Complex64::from_polar(r, 0.3);
            (sol.evaluate_potential(z).unwrap().re - src.potential(z).unwrap()).abs()
        };
        let ratio = excess(1e3) / excess(2e3);
        assert!((ratio - 2.0).abs() < 0.05, "{ratio}");
    }

    #[test]
    fn field_matches_finite_differences() {
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(0.2).unwrap();
        let src = MultipoleSource::dipole(c(1.1, -0.4), c(0.5, 1.5)).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        let h = 1e-6;
        for z in [c(0.1, 0.2), c(0.3, -0.5), c(-0.62, 0.1), c(0.9, 0.5), c(-2.0, -1.0)] {
            let [fx, fy] = sol.evaluate_field(z).unwrap();
            let dx = (sol.evaluate_potential(z + h).unwrap() - sol.evaluate_potential(z - h).unwrap())
                / (2.0 * h);
            let dy = (sol.evaluate_potential(z + c(0.0, h)).unwrap()
                - sol.evaluate_potential(z - c(0.0, h)).unwrap())
                / (2.0 * h);
            let scale = fx.norm().max(fy.norm());
            assert!((fx - dx).norm() <= 1e-5 * scale && (fy - dy).norm() <= 1e-5 * scale);
        }
    }

    #[test]
    fn synthetic_single_mode_energy() {
        let g = fig4();
        let delta = 0.1;
        let perm = PermittivityProfile::plasmonic(delta).unwrap();
        let one = c(1.0, 0.0);
        // V = z in the shell: |∇V|² = 2.
        let b1 = ModeCoefficients::from_physical(1, &g, ZERO, one, ZERO, ZERO);
        let sol = ModeSolutionSet::from_modes(g, perm, vec![b1], vec![ModeCoefficients::default()])
            .unwrap();
        let area = std::f64::consts::PI * (g.rho_e().powi(2) - g.rho_i().powi(2));
        assert!((sol.dissipation_energy() - 2.0 * delta * area).abs() < 1e-15);
        // V = Re z = x: B₁ = B₋₁ = ½, |∇V|² = 1.
        let half = ModeCoefficients::from_physical(1, &g, ZERO, 0.5 * one, ZERO, ZERO);
        let sol = ModeSolutionSet::from_modes(g, perm, vec![half], vec![half]).unwrap();
        assert!((sol.dissipation_energy() - delta * area).abs() < 1e-15);
    }

    #[test]
    fn zero_source_has_zero_energy() {
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(1e-3).unwrap();
        let src = MultipoleSource::dipole(c(2.0, 0.0), ZERO).unwrap();
        let sol = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
        assert_eq!(sol.dissipation_energy(), 0.0);
    }

    #[test]
    fn lossless_far_modes_are_singular() {
        let perm = PermittivityProfile::plasmonic(0.0).unwrap();
        assert!(solve_single_mode(&perm, 0.0, c(1.0, 0.0)).is_none());
        assert!(solve_single_mode(&perm, 0.5, c(1.0, 0.0)).is_some());
    }

    #[test]
    fn rotation_leaves_energy_unchanged() {
        let g = fig4();
        let perm = PermittivityProfile::plasmonic(1e-4).unwrap();
        let rs = 0.9 * critical_radius(&g) + 0.1 * g.rho_e();
        let base = MultipoleSource::dipole(Complex64::from_polar(rs, 0.0), c(1.0, 0.5)).unwrap();
        let w0 = solve(&g, &perm, &base, SolveOptions::default()).unwrap().dissipation_energy();
        for phi in [0.4, 1.9, 3.0, 5.5] {
            let rot = Complex64::from_polar(1.0, phi);
            // Rotating the whole configuration: location and the (z − z₀)^{-1} coefficient.
            let src = MultipoleSource::dipole(base.location() * rot, c(1.0, 0.5) * rot).unwrap();
            let w = solve(&g, &perm, &src, SolveOptions::default()).unwrap().dissipation_energy();
            assert!((w - w0).abs() <= 1e-10 * w0, "{w} vs {w0}");
        }
    }
}
