use crate::concentric::{
    critical_radius, solve, AnnulusGeometry, MultipoleSource, PermittivityProfile, SolveOptions,
};
use crate::eccentric::{self, EccentricScene};
use crate::error::{invalid, Result};

/// Dissipation energy along a decreasing sequence of loss parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    /// Strictly decreasing.
    pub deltas: Vec<f64>,
    pub energies: Vec<f64>,
    /// Least-squares slope of `ln W` against `ln δ`.
    pub slope: f64,
    /// `W` strictly increases as `δ` decreases.
    pub monotone: bool,
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn check_deltas(deltas: &[f64]) -> Result<Vec<f64>> {
    if deltas.len() < 4 {
        return Err(invalid("a sweep needs at least 4 loss values"));
    }
    if deltas.iter().any(|d| !(d.is_finite() && *d > 0.0)) {
        return Err(invalid("loss values must be positive and finite"));
    }
    let mut sorted = deltas.to_vec();
    sorted.sort_by(|a, b| b.total_cmp(a));
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return Err(invalid("loss values must be distinct"));
    }
    if (sorted[0] / sorted[sorted.len() - 1]).log10() < 4.0 - 1e-9 {
        return Err(invalid("loss values must span at least 4 decades"));
    }
    Ok(sorted)
}

fn check_not_critical(g: &AnnulusGeometry, z0: f64) -> Result<()> {
    let rho_star = critical_radius(g);
    if (z0 - rho_star).abs() <= 1e-9 * rho_star {
        return Err(invalid("a source on the boundary of the critical disk has no definite trend"));
    }
    Ok(())
}

fn run(deltas: Vec<f64>, energy: impl Fn(f64) -> Result<f64>) -> Result<SweepResult> {
    let energies = deltas.iter().map(|&d| energy(d)).collect::<Result<Vec<f64>>>()?;
    if let Some(i) = energies.iter().position(|w| !(*w > 0.0)) {
        return Err(invalid(format!("zero dissipation at δ = {}", deltas[i])));
    }
    let slope = log_log_slope(&deltas, &energies);
    let monotone = energies.windows(2).all(|w| w[1] > w[0]);
    Ok(SweepResult { deltas, energies, slope, monotone })
}

/// Sweeps a concentric plasmonic shell driven by `src`.
pub fn blowup_sweep_concentric(
    g: &AnnulusGeometry,
    src: &MultipoleSource,
    deltas: &[f64],
) -> Result<SweepResult> {
    let deltas = check_deltas(deltas)?;
    check_not_critical(g, src.location().norm())?;
    run(deltas, |d| {
        let perm = PermittivityProfile::plasmonic(d)?;
        Ok(solve(g, &perm, src, SolveOptions::default())?.dissipation_energy())
    })
}

/// Sweeps an eccentric scene; its own loss parameter is ignored.
pub fn blowup_sweep(scene: &EccentricScene, deltas: &[f64]) -> Result<SweepResult> {
    let deltas = check_deltas(deltas)?;
    check_not_critical(scene.geometry(), scene.pulled_source().location().norm())?;
    run(deltas, |d| Ok(eccentric::solve(&scene.with_delta(d)?)?.energy()))
}
