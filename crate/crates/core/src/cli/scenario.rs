use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use num_complex::Complex64;

use crate::concentric::{AnnulusGeometry, MultipoleSource};
use crate::eccentric::{EccentricScene, SourceSpec};
use crate::mobius::MobiusParameter;

/// A scenario file problem, located by line when possible.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioError {
    pub line: Option<usize>,
    pub message: String,
}

impl ScenarioError {
    fn at(line: usize, message: impl Into<String>) -> Self {
        Self { line: Some(line), message: message.into() }
    }

    fn global(message: impl Into<String>) -> Self {
        Self { line: None, message: message.into() }
    }
}

impl fmt::Display for ScenarioError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.line {
            Some(n) => write!(f, "line {n}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

impl std::error::Error for ScenarioError {}

#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    /// Dipole `Re{conj(b) (ζ − ζ₀)^{−1}}` with moment `b`.
    Dipole { location: Complex64, moment: Complex64 },
    /// `Σₖ Re{dₖ (ζ − ζ₀)^{−k}}`.
    Multipole { location: Complex64, coefficients: Vec<Complex64> },
    /// `−Re{E₀ ζ}`.
    Uniform { field: Complex64 },
}

/// Sampling window and plot range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub xmin: f64,
    pub xmax: f64,
    pub ymin: f64,
    pub ymax: f64,
    pub nx: usize,
    pub ny: usize,
    pub clip_min: f64,
    pub clip_max: f64,
}

impl GridSpec {
    pub fn x(&self, i: usize) -> f64 {
        self.xmin + (self.xmax - self.xmin) * i as f64 / (self.nx - 1) as f64
    }

    pub fn y(&self, j: usize) -> f64 {
        self.ymin + (self.ymax - self.ymin) * j as f64 / (self.ny - 1) as f64
    }

    pub fn dx(&self) -> f64 {
        (self.xmax - self.xmin) / (self.nx - 1) as f64
    }

    pub fn dy(&self) -> f64 {
        (self.ymax - self.ymin) / (self.ny - 1) as f64
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct OutputPaths {
    pub csv: Option<PathBuf>,
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub rho_i: f64,
    pub rho_e: f64,
    pub delta: f64,
    pub a: f64,
    pub source: ScenarioSource,
    pub grid: GridSpec,
    pub output: OutputPaths,
}

impl Scenario {
    pub fn scene(&self) -> crate::Result<EccentricScene> {
        let spec = match &self.source {
            ScenarioSource::Dipole { location, moment } => {
                SourceSpec::Multipole(MultipoleSource::from_dipole_moment(*location, *moment)?)
            }
            ScenarioSource::Multipole { location, coefficients } => {
                SourceSpec::Multipole(MultipoleSource::new(*location, coefficients.clone())?)
            }
            ScenarioSource::Uniform { field } => SourceSpec::UniformField(*field),
        };
        EccentricScene::new(
            MobiusParameter::new(self.a)?,
            AnnulusGeometry::new(self.rho_i, self.rho_e)?,
            self.delta,
            spec,
        )
    }

    /// Source location in the ζ-plane, if finite.
    pub fn source_location(&self) -> Option<Complex64> {
        match &self.source {
            ScenarioSource::Dipole { location, .. } | ScenarioSource::Multipole { location, .. } => {
                Some(*location)
            }
            ScenarioSource::Uniform { .. } => None,
        }
    }
}

const SECTIONS: [(&str, &[&str]); 5] = [
    ("geometry", &["rho_i", "rho_e", "delta"]),
    ("mobius", &["a"]),
    ("source", &["kind", "location", "moment", "coefficients", "field"]),
    ("grid", &["xmin", "xmax", "ymin", "ymax", "nx", "ny", "clip_min", "clip_max"]),
    ("output", &["csv", "pgm"]),
];

struct Entry {
    line: usize,
    value: String,
}

struct Section {
    line: usize,
    entries: BTreeMap<String, Entry>,
}

impl Section {
    fn raw(&self, name: &str, key: &str) -> Result<&Entry, ScenarioError> {
        self.entries.get(key).ok_or_else(|| {
            ScenarioError::at(self.line, format!("missing key `{key}` in section [{name}]"))
        })
    }

    fn real(&self, name: &str, key: &str) -> Result<(f64, usize), ScenarioError> {
        let e = self.raw(name, key)?;
        Ok((parse_real(&e.value, e.line)?, e.line))
    }

    fn count(&self, name: &str, key: &str) -> Result<(usize, usize), ScenarioError> {
        let e = self.raw(name, key)?;
        let n = e
            .value
            .parse::<usize>()
            .map_err(|_| ScenarioError::at(e.line, format!("`{}` is not a count", e.value)))?;
        Ok((n, e.line))
    }

    fn complex(&self, name: &str, key: &str) -> Result<(Complex64, usize), ScenarioError> {
        let e = self.raw(name, key)?;
        Ok((parse_complex(&e.value, e.line)?, e.line))
    }
}

fn parse_real(text: &str, line: usize) -> Result<f64, ScenarioError> {
    let v: f64 = text
        .trim()
        .parse()
        .map_err(|_| ScenarioError::at(line, format!("`{}` is not a number", text.trim())))?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ScenarioError::at(line, format!("`{}` is not finite", text.trim())))
    }
}

fn parse_complex(text: &str, line: usize) -> Result<Complex64, ScenarioError> {
    let parts: Vec<&str> = text.split(',').collect();
    if parts.len() != 2 {
        return Err(ScenarioError::at(
            line,
            format!("`{}` is not a complex number `re,im`", text.trim()),
        ));
    }
    Ok(Complex64::new(parse_real(parts[0], line)?, parse_real(parts[1], line)?))
}

/// Parses the `key = value` scenario format with `[section]` headers.
///
/// `#` starts a comment. Sections `geometry`, `mobius`, `source` and `grid`
/// are required, `output` is optional; unknown sections and keys are
/// rejected.
pub fn parse_scenario(text: &str) -> Result<Scenario, ScenarioError> {
    let mut sections: BTreeMap<String, Section> = BTreeMap::new();
    let mut current: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        if let Some(rest) = content.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ScenarioError::at(line, "unterminated section header"))?
                .trim();
            if !SECTIONS.iter().any(|(s, _)| *s == name) {
                return Err(ScenarioError::at(line, format!("unknown section [{name}]")));
            }
            if sections.contains_key(name) {
                return Err(ScenarioError::at(line, format!("duplicate section [{name}]")));
            }
            sections.insert(name.to_string(), Section { line, entries: BTreeMap::new() });
            current = Some(name.to_string());
            continue;
        }
        let (key, value) = content
            .split_once('=')
            .ok_or_else(|| ScenarioError::at(line, "expected `key = value`"))?;
        let (key, value) = (key.trim(), value.trim());
        let name = current
            .as_ref()
            .ok_or_else(|| ScenarioError::at(line, "key outside of any section"))?;
        let allowed = SECTIONS.iter().find(|(s, _)| s == name).map(|(_, k)| *k).unwrap_or(&[]);
        if !allowed.contains(&key) {
            return Err(ScenarioError::at(line, format!("unknown key `{key}` in section [{name}]")));
        }
        let section = sections.get_mut(name).expect("current section exists");
        if section.entries.contains_key(key) {
            return Err(ScenarioError::at(line, format!("duplicate key `{key}`")));
        }
        section.entries.insert(key.to_string(), Entry { line, value: value.to_string() });
    }

    let get = |name: &str| {
        sections
            .get(name)
            .ok_or_else(|| ScenarioError::global(format!("missing section [{name}]")))
    };
    let geometry = get("geometry")?;
    let mobius = get("mobius")?;
    let source = get("source")?;
    let grid = get("grid")?;

    let (rho_i, rho_i_line) = geometry.real("geometry", "rho_i")?;
    let (rho_e, _) = geometry.real("geometry", "rho_e")?;
    let (delta, delta_line) = geometry.real("geometry", "delta")?;
    AnnulusGeometry::new(rho_i, rho_e).map_err(|e| ScenarioError::at(rho_i_line, e.to_string()))?;
    if delta < 0.0 {
        return Err(ScenarioError::at(delta_line, "delta must be nonnegative"));
    }
    let (a, a_line) = mobius.real("mobius", "a")?;
    MobiusParameter::new(a).map_err(|e| ScenarioError::at(a_line, e.to_string()))?;

    let kind = source.raw("source", "kind")?;
    let expect_keys = |keys: &[&str]| -> Result<(), ScenarioError> {
        for (k, e) in &source.entries {
            if k != "kind" && !keys.contains(&k.as_str()) {
                return Err(ScenarioError::at(
                    e.line,
                    format!("key `{k}` does not apply to a {} source", kind.value),
                ));
            }
        }
        Ok(())
    };
    let (src, src_line) = match kind.value.as_str() {
        "dipole" => {
            expect_keys(&["location", "moment"])?;
            let (location, line) = source.complex("source", "location")?;
            let (moment, _) = source.complex("source", "moment")?;
            (ScenarioSource::Dipole { location, moment }, line)
        }
        "multipole" => {
            expect_keys(&["location", "coefficients"])?;
            let (location, line) = source.complex("source", "location")?;
            let e = source.raw("source", "coefficients")?;
            let coefficients = e
                .value
                .split(';')
                .map(|t| parse_complex(t, e.line))
                .collect::<Result<Vec<_>, _>>()?;
            (ScenarioSource::Multipole { location, coefficients }, line)
        }
        "uniform" => {
            expect_keys(&["field"])?;
            let (field, line) = source.complex("source", "field")?;
            (ScenarioSource::Uniform { field }, line)
        }
        other => {
            return Err(ScenarioError::at(
                kind.line,
                format!("unknown source kind `{other}` (dipole, multipole or uniform)"),
            ))
        }
    };

    let (xmin, _) = grid.real("grid", "xmin")?;
    let (xmax, x_line) = grid.real("grid", "xmax")?;
    let (ymin, _) = grid.real("grid", "ymin")?;
    let (ymax, y_line) = grid.real("grid", "ymax")?;
    let (nx, nx_line) = grid.count("grid", "nx")?;
    let (ny, ny_line) = grid.count("grid", "ny")?;
    let (clip_min, _) = grid.real("grid", "clip_min")?;
    let (clip_max, clip_line) = grid.real("grid", "clip_max")?;
    if !(xmin < xmax) {
        return Err(ScenarioError::at(x_line, "xmin must be less than xmax"));
    }
    if !(ymin < ymax) {
        return Err(ScenarioError::at(y_line, "ymin must be less than ymax"));
    }
    if nx < 2 {
        return Err(ScenarioError::at(nx_line, "nx must be at least 2"));
    }
    if ny < 2 {
        return Err(ScenarioError::at(ny_line, "ny must be at least 2"));
    }
    if !(clip_min < clip_max) {
        return Err(ScenarioError::at(clip_line, "clip_min must be less than clip_max"));
    }

    let mut output = OutputPaths::default();
    if let Some(out) = sections.get("output") {
        output.csv = out.entries.get("csv").map(|e| PathBuf::from(&e.value));
        output.pgm = out.entries.get("pgm").map(|e| PathBuf::from(&e.value));
    }

    let scenario = Scenario {
        rho_i,
        rho_e,
        delta,
        a,
        source: src,
        grid: GridSpec { xmin, xmax, ymin, ymax, nx, ny, clip_min, clip_max },
        output,
    };
    scenario.scene().map_err(|e| ScenarioError::at(src_line, e.to_string()))?;
    Ok(scenario)
}
