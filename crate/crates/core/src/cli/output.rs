use std::fmt::Write as _;
use std::io::{self, Write};

use num_complex::Complex64;
use rayon::prelude::*;

use super::scenario::{GridSpec, Scenario};
use crate::eccentric::{
    annulus_samples, disk_samples, geometry_report, EccentricScene, EccentricSolution,
};
use crate::mobius::{CircleSpec, DiskRegion, GeneralizedCircle};
use crate::Result;

/// Twelve significant digits, fixed-point for moderate magnitudes.
pub fn format_number(v: f64) -> String {
    if v == 0.0 {
        return "0".into();
    }
    if !v.is_finite() {
        return v.to_string();
    }
    let mag = v.abs().log10().floor() as i32;
    if (-6..15).contains(&mag) {
        format!("{:.*}", (11 - mag).max(0) as usize, v)
    } else {
        format!("{v:.11e}")
    }
}

/// One grid sample of `Re Ṽ`, already clipped to the plot range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub clipped: bool,
}

/// Samples `Re Ṽ` on the scenario grid, `y` outer and ascending.
///
/// Values outside the clip range are saturated and flagged. Samples within
/// half a cell of the source, and any that cannot be evaluated, report
/// `clip_max` with the flag set.
pub fn render_field(sol: &EccentricSolution, scenario: &Scenario) -> Vec<FieldSample> {
    let g = scenario.grid;
    let guard = 0.5 * g.dx().max(g.dy());
    let source = scenario.source_location();
    (0..g.ny)
        .into_par_iter()
        .flat_map_iter(|j| {
            let y = g.y(j);
            (0..g.nx).map(move |i| {
                let x = g.x(i);
                let zeta = Complex64::new(x, y);
                let near = source.is_some_and(|s| (zeta - s).norm() < guard);
                let value = if near { None } else { sol.potential(zeta).ok().map(|v| v.re) };
                match value {
                    Some(v) if v.is_finite() => {
                        let c = v.clamp(g.clip_min, g.clip_max);
                        FieldSample { x, y, value: c, clipped: c != v }
                    }
                    _ => FieldSample { x, y, value: g.clip_max, clipped: true },
                }
            })
        })
        .collect()
}

pub fn write_csv(samples: &[FieldSample], out: &mut dyn Write) -> io::Result<()> {
    let mut buf = String::with_capacity(64 * (samples.len() + 1));
    buf.push_str("x,y,re_v,clipped\n");
    for s in samples {
        let _ = writeln!(
            buf,
            "{},{},{},{}",
            format_number(s.x),
            format_number(s.y),
            format_number(s.value),
            u8::from(s.clipped)
        );
    }
    out.write_all(buf.as_bytes())
}

/// Binary 8-bit graymap, top row at `ymax`; `clip_min ↦ 0`, `clip_max ↦ 255`.
pub fn write_pgm(samples: &[FieldSample], grid: &GridSpec, out: &mut dyn Write) -> io::Result<()> {
    let mut bytes = format!("P5\n{} {}\n255\n", grid.nx, grid.ny).into_bytes();
    let span = grid.clip_max - grid.clip_min;
    for j in (0..grid.ny).rev() {
        for s in &samples[j * grid.nx..(j + 1) * grid.nx] {
            let level = ((s.value - grid.clip_min) / span * 255.0).round().clamp(0.0, 255.0);
            bytes.push(level as u8);
        }
    }
    out.write_all(&bytes)
}

fn write_region(buf: &mut String, name: &str, region: &DiskRegion) {
    match region.boundary {
        GeneralizedCircle::Circle(c) => write_circle(buf, name, &c, region.bounded),
        GeneralizedCircle::Line(l) => {
            let _ = writeln!(buf, "{name}.line_point = {}", complex(l.point));
            let _ = writeln!(buf, "{name}.line_direction = {}", complex(l.direction));
            let _ = writeln!(buf, "{name}.bounded = false");
        }
    }
}

fn write_circle(buf: &mut String, name: &str, c: &CircleSpec, bounded: bool) {
    let _ = writeln!(buf, "{name}.center = {}", complex(c.center));
    let _ = writeln!(buf, "{name}.radius = {}", format_number(c.radius));
    let _ = writeln!(buf, "{name}.bounded = {bounded}");
}

fn complex(z: Complex64) -> String {
    format!("{},{}", format_number(z.re), format_number(z.im))
}

/// Region geometry, verdicts and dissipation energy as `key = value` lines.
pub fn report(scene: &EccentricScene, sol: &EccentricSolution) -> Result<String> {
    let r = geometry_report(scene)?;
    let g = scene.geometry();
    let mut buf = String::new();
    let _ = writeln!(buf, "rho_i = {}", format_number(g.rho_i()));
    let _ = writeln!(buf, "rho_e = {}", format_number(g.rho_e()));
    let _ = writeln!(buf, "a = {}", format_number(scene.mobius().value()));
    let _ = writeln!(buf, "delta = {}", format_number(scene.delta()));
    let _ = writeln!(buf, "rho_star = {}", format_number(r.rho_star));
    let _ = writeln!(buf, "rho_b = {}", format_number(r.rho_b));
    write_circle(&mut buf, "inner", &r.inner, true);
    write_circle(&mut buf, "outer", &r.outer, true);
    write_region(&mut buf, "critical", &r.critical);
    write_region(&mut buf, "calm", &r.calm);
    let _ = writeln!(buf, "resonance = {}", r.resonant);
    let _ = writeln!(buf, "shielding = {}", r.shielding);
    let _ = writeln!(buf, "energy = {}", format_number(sol.energy()));
    Ok(buf)
}

/// 500 samples of the calm region `Ω̃_b`.
///
/// A bounded calm disk is sampled at 90% of its radius; an unbounded one
/// on the ring between 1.1 and 2 times the radius of its boundary circle.
pub fn calm_samples(scene: &EccentricScene) -> Result<Vec<Complex64>> {
    let r = geometry_report(scene)?;
    let c = r.calm.circle().copied().ok_or_else(|| {
        crate::Error::Degenerate("the calm region is a half-plane".into())
    })?;
    Ok(if r.calm.bounded {
        disk_samples(c.center, 0.9 * c.radius, 500)
    } else {
        annulus_samples(c.center, 1.1 * c.radius, 2.0 * c.radius, 500)
    })
}

/// Largest `|∇Re Ṽ|/√W` over `points`.
pub fn max_normalized_field(sol: &EccentricSolution, points: &[Complex64]) -> Result<f64> {
    let values = points
        .par_iter()
        .map(|z| sol.normalized_field(*z).map(|[x, y]| x.hypot(y)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(values.into_iter().fold(0.0, f64::max))
}

/// `delta,energy,max_normalized_field_in_calm`, one row per loss value in
/// the given order.
pub fn sweep_table(scene: &EccentricScene, deltas: &[f64]) -> Result<String> {
    let points = calm_samples(scene)?;
    let mut buf = String::from("delta,energy,max_normalized_field_in_calm\n");
    for &d in deltas {
        let sol = crate::eccentric::solve(&scene.with_delta(d)?)?;
        let w = sol.energy();
        let field = if w > 0.0 { max_normalized_field(&sol, &points)? } else { 0.0 };
        let _ = writeln!(buf, "{},{},{}", format_number(d), format_number(w), format_number(field));
    }
    Ok(buf)
}
