use num_complex::Complex64;

use crate::error::{invalid, Error, Result};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);

/// Point multipole with potential `F(z) = Σₖ Re{γₖ (z − z₀)^{−k}}`, `k = 1..n`.
///
/// The coefficients multiply the singular terms directly. A dipole described
/// by a moment `b` has `γ₁ = conj(b)`, see [`MultipoleSource::from_dipole_moment`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultipoleSource {
    location: Complex64,
    coefficients: Vec<Complex64>,
}

impl MultipoleSource {
    pub fn new(location: Complex64, coefficients: Vec<Complex64>) -> Result<Self> {
        if !location.is_finite() {
            return Err(invalid("multipole location must be finite"));
        }
        if coefficients.is_empty() {
            return Err(invalid("multipole order must be at least 1"));
        }
        if coefficients.iter().any(|c| !c.is_finite()) {
            return Err(invalid("multipole coefficients must be finite"));
        }
        Ok(Self { location, coefficients })
    }

    pub fn dipole(location: Complex64, coefficient: Complex64) -> Result<Self> {
        Self::new(location, vec![coefficient])
    }

    /// Dipole `Re{conj(b) (z − z₀)^{−1}}` for the moment `b`.
    pub fn from_dipole_moment(location: Complex64, moment: Complex64) -> Result<Self> {
        Self::dipole(location, moment.conj())
    }

    pub fn location(&self) -> Complex64 {
        self.location
    }

    pub fn order(&self) -> usize {
        self.coefficients.len()
    }

    pub fn coefficients(&self) -> &[Complex64] {
        &self.coefficients
    }

    pub fn is_zero(&self) -> bool {
        self.coefficients.iter().all(|c| *c == ZERO)
    }

    /// The analytic function `S(z) = Σₖ γₖ (z − z₀)^{−k}` with `F = Re S`.
    pub fn analytic(&self, z: Complex64) -> Result<Complex64> {
        Ok(self.analytic_with_derivative(z)?.0)
    }

    /// `S(z)` and `S'(z)`.
    pub fn analytic_with_derivative(&self, z: Complex64) -> Result<(Complex64, Complex64)> {
        let dz = z - self.location;
        if dz == ZERO {
            return Err(Error::AtSource(format!("{z}")));
        }
        let u = dz.inv();
        let mut u_pow = Complex64::new(1.0, 0.0);
        let mut value = ZERO;
        let mut deriv = ZERO;
        for (k, c) in self.coefficients.iter().enumerate() {
            let k = (k + 1) as f64;
            u_pow *= u;
            value += c * u_pow;
            deriv -= c * k * u_pow * u;
        }
        Ok((value, deriv))
    }

    /// Real source potential `F(z)`.
    pub fn potential(&self, z: Complex64) -> Result<f64> {
        Ok(self.analytic(z)?.re)
    }

    /// Gradient `(∂ₓF, ∂ᵧF) = (Re S', −Im S')`.
    pub fn gradient(&self, z: Complex64) -> Result<[f64; 2]> {
        let (_, d) = self.analytic_with_derivative(z)?;
        Ok([d.re, -d.im])
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpansionOptions {
    /// Relative tail tolerance.
    pub tol: f64,
    /// Keep at least this many modes regardless of the tail.
    pub min_modes: usize,
    /// Hard cap on the mode count.
    pub mode_cap: usize,
}

impl Default for ExpansionOptions {
    fn default() -> Self {
        Self { tol: 1e-13, min_modes: 0, mode_cap: 4096 }
    }
}

/// Angular expansion of a source potential about the origin.
///
/// Near the annulus `F(z) = F(0) + Σ_{m≠0} α_m r^{|m|} e^{imθ}`. Coefficients
/// are stored normalized to the reference radius `R`: `scaled(m) = α_m R^{|m|}`,
/// the amplitude of mode `m` on the circle `|z| = R`. Since `F` is real,
/// `scaled(−m) = conj(scaled(m))`.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceExpansion {
    source: MultipoleSource,
    radius: f64,
    constant: f64,
    positive: Vec<Complex64>,
    tol: f64,
}

impl SourceExpansion {
    /// The expanded source.
    pub fn source(&self) -> &MultipoleSource {
        &self.source
    }

    pub fn reference_radius(&self) -> f64 {
        self.radius
    }

    /// The dropped `m = 0` term, `F(0)`.
    pub fn constant(&self) -> f64 {
        self.constant
    }

    /// Truncation `M`: modes `m = −M..M` are kept.
    pub fn truncation(&self) -> usize {
        self.positive.len()
    }

    pub fn tolerance(&self) -> f64 {
        self.tol
    }

    /// `α_m R^{|m|}`; zero for `m = 0` and beyond the truncation.
    pub fn scaled(&self, m: i64) -> Complex64 {
        let n = m.unsigned_abs() as usize;
        if n == 0 || n > self.positive.len() {
            return ZERO;
        }
        let c = self.positive[n - 1];
        if m > 0 {
            c
        } else {
            c.conj()
        }
    }

    /// Unnormalized `α_m`. Overflows for large `|m|` when `R` is small.
    pub fn alpha(&self, m: i64) -> Complex64 {
        self.scaled(m) / self.radius.powi(m.unsigned_abs() as i32)
    }

    pub(crate) fn positive_scaled(&self) -> &[Complex64] {
        &self.positive
    }

    /// Partial sum at `z`, including the constant term.
    pub fn evaluate(&self, z: Complex64) -> f64 {
        let w = z / self.radius;
        let mut acc = ZERO;
        for c in self.positive.iter().rev() {
            acc = (acc + c) * w;
        }
        // α_m z^m + conj(α_m z^m) for m > 0
        self.constant + 2.0 * acc.re
    }
}

/// Expands `src` in angular modes on `|z| ≤ radius`.
///
/// Modes are added until an envelope bound on the remaining tail falls below
/// `tol` times the largest mode amplitude (and at least `min_modes` are
/// kept); the result is then checked against the exact potential at 64
/// points on the reference circle.
pub fn expand_source(
    src: &MultipoleSource,
    radius: f64,
    opts: ExpansionOptions,
) -> Result<SourceExpansion> {
    if !(radius.is_finite() && radius > 0.0) {
        return Err(invalid("expansion radius must be positive"));
    }
    let z0 = src.location();
    if z0.norm() <= radius {
        return Err(invalid(format!(
            "source at |z0| = {} is not outside the expansion radius {radius}",
            z0.norm()
        )));
    }
    if !(opts.tol > 0.0) {
        return Err(invalid("expansion tolerance must be positive"));
    }
    let order = src.order();
    // u_k = γ_k (−1/z₀)^k, so (z − z₀)^{−k} = (−1/z₀)^k Σ_j C(j+k−1, k−1) (z/z₀)^j.
    let neg_inv = -z0.inv();
    let mut u = Vec::with_capacity(order);
    let mut u_abs = Vec::with_capacity(order);
    let mut pow = Complex64::new(1.0, 0.0);
    for c in src.coefficients() {
        pow *= neg_inv;
        u.push(c * pow);
        u_abs.push(c.norm() * pow.norm());
    }
    let constant = u.iter().sum::<Complex64>().re;

    let q = radius / z0;
    let q_abs = q.norm();
    let mut binom = vec![1.0_f64; order];
    let mut q_pow = Complex64::new(1.0, 0.0);
    let mut q_abs_pow = 1.0_f64;
    let mut positive = Vec::new();
    let mut peak = 0.0_f64;
    let zero_source = u_abs.iter().all(|&x| x == 0.0);

    if !zero_source {
        let mut m = 0usize;
        loop {
            m += 1;
            if m > opts.mode_cap {
                return Err(Error::Truncation { tol: opts.tol, cap: opts.mode_cap });
            }
            q_pow *= q;
            q_abs_pow *= q_abs;
            let mut term = ZERO;
            let mut envelope = 0.0;
            for k in 0..order {
                // C(m+k−1, k−1) from C(m+k−2, k−1), with k counted from 1
                binom[k] *= (m + k) as f64 / m as f64;
                term += u[k] * binom[k];
                envelope += u_abs[k] * binom[k];
            }
            let scaled = 0.5 * term * q_pow;
            envelope *= 0.5 * q_abs_pow;
            positive.push(scaled);
            peak = peak.max(scaled.norm());

            if m >= opts.min_modes {
                let growth = q_abs * (m + order) as f64 / (m + 1) as f64;
                if growth < 1.0 && envelope * growth / (1.0 - growth) <= opts.tol * peak {
                    break;
                }
            }
        }
    } else {
        positive.resize(opts.min_modes, ZERO);
    }

    let expansion =
        SourceExpansion { source: src.clone(), radius, constant, positive, tol: opts.tol };
    verify_on_circle(src, &expansion)?;
    Ok(expansion)
}

fn verify_on_circle(src: &MultipoleSource, exp: &SourceExpansion) -> Result<()> {
    const SAMPLES: usize = 64;
    let mut scale = 0.0_f64;
    let mut err = 0.0_f64;
    for j in 0..SAMPLES {
        let z = Complex64::from_polar(exp.radius, std::f64::consts::TAU * j as f64 / SAMPLES as f64);
        let exact = src.potential(z)?;
        scale = scale.max((exact - exp.constant).abs());
        err = err.max((exact - exp.evaluate(z)).abs());
    }
    let rounding: f64 = 64.0 * f64::EPSILON * exp.positive.iter().map(|c| c.norm()).sum::<f64>();
    if err <= exp.tol * scale + rounding + f64::MIN_POSITIVE {
        Ok(())
    } else {
        Err(Error::Truncation { tol: exp.tol, cap: exp.positive.len() })
    }
}
