//! The six published configurations: `ρₑ = 0.7`, `a = 1`, `δ = 10⁻¹²`.

pub const PRESET_NAMES: [&str; 6] =
    ["fig4_left", "fig4_right", "fig5_left", "fig5_right", "fig6_left", "fig6_right"];

struct Preset {
    name: &'static str,
    title: &'static str,
    rho_i: &'static str,
    source: &'static str,
    clip: &'static str,
}

const DIPOLE_FAR: &str = "kind = dipole\nlocation = -3.4, 8.5\nmoment = 3, -3\n";
const DIPOLE_NEAR: &str = "kind = dipole\nlocation = -3.4, 3.5\nmoment = 3, -3\n";
const DIPOLE_SIDE: &str = "kind = dipole\nlocation = 5, 5\nmoment = 3, 3\n";
const UNIFORM: &str = "kind = uniform\nfield = 1, 0\n";

const PRESETS: [Preset; 6] = [
    Preset {
        name: "fig4_left",
        title: "dipole outside the critical region: detectable",
        rho_i: "0.55",
        source: DIPOLE_FAR,
        clip: "10",
    },
    Preset {
        name: "fig4_right",
        title: "dipole inside the critical region: cloaked",
        rho_i: "0.55",
        source: DIPOLE_NEAR,
        clip: "10",
    },
    Preset {
        name: "fig5_left",
        title: "dipole, bounded critical region: no resonance",
        rho_i: "0.55",
        source: DIPOLE_SIDE,
        clip: "10",
    },
    Preset {
        name: "fig5_right",
        title: "dipole, smaller core: shielding at a distance",
        rho_i: "0.2",
        source: DIPOLE_SIDE,
        clip: "10",
    },
    Preset {
        name: "fig6_left",
        title: "uniform field, bounded critical region: no resonance",
        rho_i: "0.55",
        source: UNIFORM,
        clip: "15",
    },
    Preset {
        name: "fig6_right",
        title: "uniform field, smaller core: shielding at a distance",
        rho_i: "0.2",
        source: UNIFORM,
        clip: "15",
    },
];

/// Scenario text of a preset.
pub fn preset(name: &str) -> Option<String> {
    let p = PRESETS.iter().find(|p| p.name == name)?;
    Some(format!(
        "# {name}: {title}\n\
         [geometry]\n\
         rho_i = {rho_i}\n\
         rho_e = 0.7\n\
         delta = 1e-12\n\
         \n\
         [mobius]\n\
         a = 1\n\
         \n\
         [source]\n\
         {source}\
         \n\
         [grid]\n\
         xmin = -10\n\
         xmax = 10\n\
         ymin = -10\n\
         ymax = 10\n\
         nx = 201\n\
         ny = 201\n\
         clip_min = -{clip}\n\
         clip_max = {clip}\n",
        name = p.name,
        title = p.title,
        rho_i = p.rho_i,
        source = p.source,
        clip = p.clip,
    ))
}
