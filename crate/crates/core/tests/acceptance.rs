//! End-to-end acceptance suite. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::fs;
use std::process::{Command, ExitCode};

use num_complex::Complex64;

use superlens::cli::{calm_samples, max_normalized_field, parse_scenario, preset, PRESET_NAMES};
use superlens::concentric::{
    calm_radius, critical_radius, solve, AnnulusGeometry, MultipoleSource, PermittivityProfile,
    SolveOptions,
};
use superlens::eccentric::{self, annulus_samples, geometry_report, EccentricScene};
use superlens::mobius::{circle_image, MobiusParameter};
use superlens::verification::{
    blowup_sweep, fd_reference_solve, interface_residual, quadrature_energy,
    quadrature_energy_eccentric, FdGrid,
};

const SWEEP: [f64; 5] = [1e-2, 1e-4, 1e-6, 1e-8, 1e-10];
const SHIELD: [f64; 4] = [1e-4, 1e-6, 1e-8, 1e-10];

type Outcome = Result<Vec<String>, String>;

fn scene(name: &str) -> EccentricScene {
    parse_scenario(&preset(name).unwrap()).unwrap().scene().unwrap()
}

fn check(ok: bool, msg: String) -> Result<String, String> {
    if ok {
        Ok(msg)
    } else {
        Err(msg)
    }
}

fn geometry_values() -> Outcome {
    let p = MobiusParameter::new(1.0).unwrap();
    let mut notes = Vec::new();
    for (rho, radius, center) in [(0.7, 2.75, -2.92), (0.55, 1.58, -1.87), (0.2, 0.42, -1.08)] {
        let c = *circle_image(p, rho).unwrap().as_circle().unwrap();
        notes.push(check(
            (c.radius - radius).abs() <= 0.01
                && (c.center.re - center).abs() <= 0.01
                && c.center.im == 0.0,
            format!("ρ={rho}: r={:.4} c={:.4}", c.radius, c.center.re),
        )?);
    }
    for (rho_i, expect) in [(0.55, 0.79), (0.2, 1.31)] {
        let g = AnnulusGeometry::new(rho_i, 0.7).unwrap();
        let r = critical_radius(&g);
        notes.push(check((r - expect).abs() <= 0.005, format!("ρ*({rho_i})={r:.4}"))?);
    }
    let rb = calm_radius(&AnnulusGeometry::new(0.55, 0.7).unwrap());
    notes.push(check((rb - 0.89).abs() <= 0.005, format!("ρ_b={rb:.4}"))?);
    Ok(notes)
}

fn circle_identity() -> Outcome {
    let mut worst = 0.0f64;
    for a in [0.25, 1.0, 3.0, 17.0] {
        let p = MobiusParameter::new(a).unwrap();
        for k in 1..=400 {
            let rho = 0.01 * k as f64 + 0.0037;
            let c = *circle_image(p, rho).unwrap().as_circle().unwrap();
            let lhs = c.center.norm_sqr() - c.radius * c.radius;
            let scale = c.center.norm_sqr().max(a * a);
            worst = worst.max((lhs - a * a).abs() / scale);
        }
    }
    Ok(vec![check(worst <= 1e-12, format!("max relative defect {worst:.2e}"))?])
}

fn solver_validity() -> Outcome {
    let mut notes = Vec::new();
    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        let sol = eccentric::solve(&scene(name)).unwrap();
        worst = worst.max(interface_residual(sol.modes(), 720).unwrap().max());
    }
    notes.push(check(worst < 1e-8, format!("interface residual {worst:.2e}"))?);

    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        let sol = eccentric::solve(&scene(name).with_delta(0.1).unwrap()).unwrap();
        let w = sol.modes().dissipation_energy();
        let q = quadrature_energy(sol.modes()).unwrap();
        worst = worst.max((q - w).abs() / w);
    }
    notes.push(check(worst < 1e-8, format!("quadrature vs closed form {worst:.2e}"))?);

    let g = AnnulusGeometry::new(0.55, 0.7).unwrap();
    let perm = PermittivityProfile::plasmonic(0.5).unwrap();
    let src = MultipoleSource::dipole(Complex64::from_polar(2.0, 0.9), Complex64::new(3.0, -3.0))
        .unwrap();
    let spectral = solve(&g, &perm, &src, SolveOptions::default()).unwrap();
    let fd = fd_reference_solve(&g, &perm, &src, FdGrid::new(512, 512)).unwrap();
    let (mut diff, mut scale) = (0.0f64, 0.0f64);
    let inner: Vec<usize> = (0..fd.radial_cells()).filter(|&j| fd.radius(j) <= 1.5).collect();
    for i in 0..50 {
        let j = inner[i * (inner.len() - 1) / 49];
        let k = (i * 97) % fd.angular_cells();
        let v = spectral.evaluate_potential(fd.node(j, k)).unwrap();
        diff = diff.max((fd.potential(j, k).unwrap() - v).norm());
        scale = scale.max(v.norm());
    }
    notes.push(check(diff / scale < 1e-3, format!("spectral vs FD {:.2e}", diff / scale))?);
    Ok(notes)
}

fn dichotomy() -> Outcome {
    let mut notes = Vec::new();
    let mut failed = false;
    for name in ["fig4_right", "fig5_right"] {
        let r = blowup_sweep(&scene(name), &SWEEP).unwrap();
        let n = r.energies.len();
        let ratio = r.energies[n - 1] / r.energies[n - 2];
        let ok = r.monotone && ratio >= 4.0;
        failed |= !ok;
        notes.push(format!("{name}: monotone={} W(1e-10)/W(1e-8)={ratio:.3}", r.monotone));
    }
    for name in ["fig4_left", "fig5_left"] {
        let r = blowup_sweep(&scene(name), &SWEEP).unwrap();
        failed |= (r.slope - 1.0).abs() > 0.05;
        notes.push(format!("{name}: slope={:.4}", r.slope));
    }
    if failed {
        Err(notes.join("; "))
    } else {
        Ok(notes)
    }
}

fn calm_field(scene: &EccentricScene, points: &[Complex64], delta: f64) -> f64 {
    let sol = eccentric::solve(&scene.with_delta(delta).unwrap()).unwrap();
    max_normalized_field(&sol, points).unwrap()
}

fn shielding() -> Outcome {
    let mut notes = Vec::new();
    let mut failed = false;
    for (shielded, reference) in [("fig5_right", "fig5_left"), ("fig6_right", "fig6_left")] {
        let s = scene(shielded);
        let points = calm_samples(&s).unwrap();
        let f: Vec<f64> = SHIELD.iter().map(|&d| calm_field(&s, &points, d)).collect();
        let monotone = f.windows(2).all(|w| w[1] < w[0]);
        let drop = f[0] / f[f.len() - 1];
        failed |= !(monotone && drop >= 10.0);
        notes.push(format!("{shielded}: monotone={monotone} drop={drop:.2}"));

        // same disk, bounded in both geometries
        let s = scene(reference);
        let g: Vec<f64> =
            SHIELD.iter().map(|&d| calm_field(&s, &points, d) * d.sqrt()).collect();
        let spread = g.iter().cloned().fold(0.0, f64::max) / g.iter().cloned().fold(f64::MAX, f64::min);
        failed |= spread > 2.0;
        notes.push(format!("{reference}: rescaled spread={spread:.3}"));
    }
    if failed {
        Err(notes.join("; "))
    } else {
        Ok(notes)
    }
}

fn cloaking() -> Outcome {
    let mut notes = Vec::new();
    let s = scene("fig4_right");
    let critical = *geometry_report(&s).unwrap().critical.circle().unwrap();
    let points = annulus_samples(critical.center, 1.1 * critical.radius, 2.0 * critical.radius, 500);
    let spread: Vec<f64> = SHIELD
        .iter()
        .map(|&d| {
            let sol = eccentric::solve(&s.with_delta(d).unwrap()).unwrap();
            let v: Vec<f64> =
                points.iter().map(|z| sol.normalized_potential(*z).unwrap()).collect();
            let mean = v.iter().sum::<f64>() / v.len() as f64;
            (v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / v.len() as f64).sqrt()
        })
        .collect();
    let drop = spread[0] / spread[spread.len() - 1];
    notes.push(format!("fig4_right std drop {drop:.1}"));

    // the source stays visible: total field on a circle 2 away from ∂Ω̃*
    let s = scene("fig4_left");
    let critical = *geometry_report(&s).unwrap().critical.circle().unwrap();
    let sol = eccentric::solve(&s).unwrap();
    let induced = |z: Complex64| sol.potential(z).unwrap().re - s.source().potential(z).unwrap();
    let h = 1e-5;
    let radius = critical.radius + 2.0;
    let (mut peak, mut peak_induced) = (0.0f64, 0.0f64);
    for k in 0..720 {
        let z = critical.center + Complex64::from_polar(radius, k as f64 * std::f64::consts::TAU / 720.0);
        let [ex, ey] = sol.field(z).unwrap();
        peak = peak.max(ex.hypot(ey));
        let gx = (induced(z + h) - induced(z - h)) / (2.0 * h);
        let gy = (induced(z + Complex64::new(0.0, h)) - induced(z - Complex64::new(0.0, h))) / (2.0 * h);
        peak_induced = peak_induced.max(gx.hypot(gy));
    }
    notes.push(format!("fig4_left max field {peak:.3e} (shell response alone {peak_induced:.1e})"));
    if drop >= 10.0 && peak >= 1e-2 {
        Ok(notes)
    } else {
        Err(notes.join("; "))
    }
}

fn conformal_invariance() -> Outcome {
    let mut worst = 0.0f64;
    for name in PRESET_NAMES {
        for delta in [0.5, 0.1] {
            let sol = eccentric::solve(&scene(name).with_delta(delta).unwrap()).unwrap();
            let q = quadrature_energy_eccentric(&sol).unwrap();
            worst = worst.max((q - sol.energy()).abs() / sol.energy());
        }
    }
    Ok(vec![check(worst <= 1e-6, format!("max relative gap {worst:.2e}"))?])
}

fn run_cli(args: &[&str]) -> Vec<u8> {
    let out = Command::new(env!("CARGO_BIN_EXE_superlens")).args(args).output().unwrap();
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    out.stdout
}

fn csv_conforms(text: &str, nx: usize, ny: usize, xs: (f64, f64), ys: (f64, f64), clip: f64) -> bool {
    let mut lines = text.split_terminator('\n');
    if lines.next() != Some("x,y,re_v,clipped") || !text.ends_with('\n') {
        return false;
    }
    let rows: Vec<&str> = lines.collect();
    if rows.len() != nx * ny {
        return false;
    }
    rows.iter().enumerate().all(|(i, row)| {
        let f: Vec<&str> = row.split(',').collect();
        let (Ok(x), Ok(y), Ok(v)) = (f[0].parse::<f64>(), f[1].parse::<f64>(), f[2].parse::<f64>())
        else {
            return false;
        };
        let (ix, iy) = (i % nx, i / nx);
        let ex = xs.0 + (xs.1 - xs.0) * ix as f64 / (nx - 1) as f64;
        let ey = ys.0 + (ys.1 - ys.0) * iy as f64 / (ny - 1) as f64;
        f.len() == 4
            && (x - ex).abs() < 1e-9
            && (y - ey).abs() < 1e-9
            && v.abs() <= clip
            && (f[3] == "0" || f[3] == "1")
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut notes = Vec::new();
    for name in PRESET_NAMES {
        let text = preset(name).unwrap();
        let scn = dir.path().join(format!("{name}.scn"));
        fs::write(&scn, &text).unwrap();
        let scn = scn.to_str().unwrap();
        let mut runs = Vec::new();
        for i in 0..2 {
            let csv = dir.path().join(format!("{name}.{i}.csv"));
            let pgm = dir.path().join(format!("{name}.{i}.pgm"));
            run_cli(&["solve", scn, "--csv", csv.to_str().unwrap(), "--pgm", pgm.to_str().unwrap()]);
            let report = run_cli(&["report", scn]);
            runs.push((fs::read(&csv).unwrap(), fs::read(&pgm).unwrap(), report));
        }
        if runs[0] != runs[1] {
            return Err(format!("{name}: outputs differ between runs"));
        }
        let s = parse_scenario(&text).unwrap();
        let g = &s.grid;
        let (csv, pgm, _) = &runs[0];
        let csv = String::from_utf8(csv.clone()).unwrap();
        if !csv_conforms(&csv, g.nx, g.ny, (g.xmin, g.xmax), (g.ymin, g.ymax), g.clip_max) {
            return Err(format!("{name}: CSV layout"));
        }
        let header = format!("P5\n{} {}\n255\n", g.nx, g.ny);
        if !pgm.starts_with(header.as_bytes()) || pgm.len() != header.len() + g.nx * g.ny {
            return Err(format!("{name}: graymap layout"));
        }
        // graymap rows run top to bottom; CSV rows run with y ascending
        let values: Vec<f64> =
            csv.lines().skip(1).map(|l| l.split(',').nth(2).unwrap().parse().unwrap()).collect();
        let body = &pgm[header.len()..];
        let mapped = (0..g.ny).all(|row| {
            (0..g.nx).all(|ix| {
                let v = values[(g.ny - 1 - row) * g.nx + ix];
                let t = (v - g.clip_min) / (g.clip_max - g.clip_min) * 255.0;
                (body[row * g.nx + ix] as f64 - t).abs() <= 0.5 + 1e-9
            })
        });
        if !mapped {
            return Err(format!("{name}: graymap values"));
        }
        notes.push(format!("{name} ok"));
    }
    Ok(notes)
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 8] = [
        ("1 geometry reproduction", geometry_values),
        ("2 circle image identity", circle_identity),
        ("3 solver validity", solver_validity),
        ("4 resonance dichotomy", dichotomy),
        ("5 shielding at a distance", shielding),
        ("6 cloaking", cloaking),
        ("7 conformal invariance", conformal_invariance),
        ("8 determinism and format", determinism),
    ];
    let mut failures = 0;
    for (label, f) in criteria {
        match f() {
            Ok(notes) => println!("PASS criterion {label}: {}", notes.join("; ")),
            Err(why) => {
                failures += 1;
                println!("FAIL criterion {label}: {why}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failures, criteria.len());
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
