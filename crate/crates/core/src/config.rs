//! Declarative run configuration (TOML).
//!
//! Unknown keys are rejected. Semantic checks collect every violation
//! before reporting.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::dynamics::Scheme;
use crate::fields::PotentialSpec;
use crate::grid::Boundary;
use crate::units::UnitSystem;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub physics: PhysicsConfig,
    pub initial: InitialConfig,
    #[serde(default)]
    pub scheme: SchemeConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub experiment: Option<ExperimentConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<SpectrumConfig>,
    #[serde(default)]
    pub output: OutputConfig,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    pub extents: Vec<[f64; 2]>,
    pub points: Vec<usize>,
    #[serde(default = "default_bc")]
    pub bc: BoundaryName,
}

fn default_bc() -> BoundaryName {
    BoundaryName::Dirichlet
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryName {
    Periodic,
    Dirichlet,
}

impl From<BoundaryName> for Boundary {
    fn from(b: BoundaryName) -> Self {
        match b {
            BoundaryName::Periodic => Boundary::Periodic,
            BoundaryName::Dirichlet => Boundary::Dirichlet,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicsConfig {
    /// Natural-unit mass. Omitted when `units` gives an MKS system.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub m: Option<f64>,
    #[serde(default)]
    pub potential: PotentialConfig,
    #[serde(default)]
    pub units: UnitsConfig,
}

/// Potential parameters. With MKS units, energies are joules, lengths meters
/// and `omega` is in rad/s.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum PotentialConfig {
    #[default]
    Free,
    Harmonic {
        omega: f64,
    },
    /// `½ k |x − x_c|²`, independent of the mass (J/m² with MKS units).
    Quadratic {
        stiffness: f64,
    },
    Box,
    GaussianBarrier {
        height: f64,
        center: Vec<f64>,
        width: f64,
    },
    Tabulated {
        values: Vec<f64>,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum UnitsConfig {
    Named(String),
    Mks(MksUnits),
}

impl Default for UnitsConfig {
    fn default() -> Self {
        UnitsConfig::Named("natural".into())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MksUnits {
    pub h: f64,
    pub c: f64,
    pub mass: f64,
    pub length_unit: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialConfig {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub packet: Option<PacketConfig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eigenmode: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub snapshot: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub uniform: Option<UniformConfig>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PacketConfig {
    pub center: Vec<f64>,
    pub width: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wavenumber: Option<Vec<f64>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformConfig {
    pub p: f64,
    pub q: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SchemeName {
    Full,
    Reduced,
}

impl From<SchemeName> for Scheme {
    fn from(s: SchemeName) -> Self {
        match s {
            SchemeName::Full => Scheme::FullImplicitMidpoint,
            SchemeName::Reduced => Scheme::ReducedCrankNicolson,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtConfig {
    Value(f64),
    Named(String),
}

impl DtConfig {
    /// `None` for "auto".
    pub fn value(&self) -> Option<f64> {
        match self {
            DtConfig::Value(x) => Some(*x),
            DtConfig::Named(_) => None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    #[serde(default = "default_scheme")]
    pub kind: SchemeName,
    #[serde(default = "default_dt")]
    pub dt: DtConfig,
    #[serde(default)]
    pub t_final: f64,
    #[serde(default)]
    pub snapshot_stride: usize,
    #[serde(default = "default_stride")]
    pub observe_stride: usize,
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default = "default_max_iterations")]
    pub max_iterations: usize,
}

fn default_scheme() -> SchemeName {
    SchemeName::Reduced
}
fn default_dt() -> DtConfig {
    DtConfig::Named("auto".into())
}
fn default_stride() -> usize {
    1
}
fn default_tolerance() -> f64 {
    1e-12
}
fn default_max_iterations() -> usize {
    10_000
}

impl Default for SchemeConfig {
    fn default() -> Self {
        SchemeConfig {
            kind: default_scheme(),
            dt: default_dt(),
            t_final: 0.0,
            snapshot_stride: 0,
            observe_stride: default_stride(),
            tolerance: default_tolerance(),
            max_iterations: default_max_iterations(),
        }
    }
}

/// Convergence sweep and cold-start settings. Masses are natural-unit values.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub m_list: Vec<f64>,
    #[serde(default)]
    pub cold_start: bool,
    /// Reduced-run step for the sweep; defaults to `0.025 / max(m_list)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced_dt: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpectrumConfig {
    pub k: usize,
    #[serde(default = "default_eigen_tol")]
    pub tolerance: f64,
}

fn default_eigen_tol() -> f64 {
    1e-10
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default = "default_directory")]
    pub directory: String,
    #[serde(default = "default_formats")]
    pub formats: Vec<String>,
}

fn default_directory() -> String {
    "output".into()
}
fn default_formats() -> Vec<String> {
    vec!["csv".into(), "snapshot".into()]
}

impl Default for OutputConfig {
    fn default() -> Self {
        OutputConfig {
            directory: default_directory(),
            formats: default_formats(),
        }
    }
}

/// One semantic violation, named by its dotted key path.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Issue {
    pub field: String,
    pub message: String,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConfigError {
    Syntax {
        line: Option<usize>,
        column: Option<usize>,
        message: String,
    },
    Invalid(Vec<Issue>),
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ConfigError::Syntax { line, column, message } => match (line, column) {
                (Some(l), Some(c)) => write!(f, "line {l}, column {c}: {message}"),
                (Some(l), None) => write!(f, "line {l}: {message}"),
                _ => write!(f, "{message}"),
            },
            ConfigError::Invalid(issues) => {
                for (i, issue) in issues.iter().enumerate() {
                    if i > 0 {
                        writeln!(f)?;
                    }
                    write!(f, "  {}: {}", issue.field, issue.message)?;
                }
                Ok(())
            }
        }
    }
}

impl std::error::Error for ConfigError {}

impl ConfigError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            ConfigError::Invalid(v) => v,
            ConfigError::Syntax { .. } => &[],
        }
    }
}

/// Parses and validates a configuration.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let cfg: RunConfig = toml::from_str(text).map_err(|e| {
        let (line, column) = match e.span() {
            Some(span) => {
                let before = &text[..span.start.min(text.len())];
                let line = before.matches('\n').count() + 1;
                let column = before.len() - before.rfind('\n').map_or(0, |i| i + 1) + 1;
                (Some(line), Some(column))
            }
            None => (None, None),
        };
        ConfigError::Syntax {
            line,
            column,
            message: e.message().to_string(),
        }
    })?;
    let issues = cfg.violations();
    if issues.is_empty() {
        Ok(cfg)
    } else {
        Err(ConfigError::Invalid(issues))
    }
}

struct Checker(Vec<Issue>);

impl Checker {
    fn push(&mut self, field: &str, message: impl Into<String>) {
        self.0.push(Issue {
            field: field.into(),
            message: message.into(),
        });
    }

    fn positive(&mut self, field: &str, x: f64) {
        if !(x.is_finite() && x > 0.0) {
            self.push(field, format!("must be positive and finite, got {x}"));
        }
    }

    fn finite(&mut self, field: &str, xs: &[f64]) {
        if xs.iter().any(|x| !x.is_finite()) {
            self.push(field, "must contain only finite numbers");
        }
    }
}

impl RunConfig {
    pub fn dim(&self) -> usize {
        self.grid.extents.len()
    }

    pub fn node_count(&self) -> usize {
        self.grid.points.iter().product()
    }

    pub fn boundary(&self) -> Boundary {
        self.grid.bc.into()
    }

    pub fn scheme(&self) -> Scheme {
        self.scheme.kind.into()
    }

    /// The MKS unit system, or `None` for natural units.
    pub fn mks_units(&self) -> Option<UnitSystem<f64>> {
        match &self.physics.units {
            UnitsConfig::Mks(u) => UnitSystem::new(u.h, u.c, u.mass, u.length_unit).ok(),
            UnitsConfig::Named(_) => None,
        }
    }

    /// Unit system used to nondimensionalize; natural units are `h = c = λ = 1`.
    pub fn unit_system(&self) -> UnitSystem<f64> {
        self.mks_units()
            .unwrap_or_else(|| UnitSystem::natural(self.physics.m.unwrap_or(1.0)))
    }

    pub fn wants(&self, format: &str) -> bool {
        self.output.formats.iter().any(|f| f == format)
    }

    /// Every semantic violation, in a stable order.
    pub fn violations(&self) -> Vec<Issue> {
        let mut c = Checker(Vec::new());
        let dim = self.dim();

        // grid
        if dim == 0 || dim > crate::grid::MAX_DIM {
            c.push("grid.extents", format!("need between 1 and {} axes, got {dim}", crate::grid::MAX_DIM));
        }
        if let Some(d) = self.grid.dim {
            if d != dim {
                c.push("grid.dim", format!("is {d} but {dim} extents are given"));
            }
        }
        if self.grid.points.len() != dim {
            c.push("grid.points", format!("has {} entries, expected {dim}", self.grid.points.len()));
        }
        if self.grid.points.contains(&0) {
            c.push("grid.points", "every axis needs at least one point");
        }
        for (j, [a, b]) in self.grid.extents.iter().enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                c.push(&format!("grid.extents[{j}]"), format!("needs finite lower < upper, got [{a}, {b}]"));
            }
        }

        // physics
        let mks = match &self.physics.units {
            UnitsConfig::Named(name) => {
                if name != "natural" {
                    c.push("physics.units", format!("expected \"natural\" or a unit table, got \"{name}\""));
                }
                match self.physics.m {
                    Some(m) => c.positive("physics.m", m),
                    None => c.push("physics.m", "is required with natural units"),
                }
                false
            }
            UnitsConfig::Mks(u) => {
                c.positive("physics.units.h", u.h);
                c.positive("physics.units.c", u.c);
                c.positive("physics.units.mass", u.mass);
                c.positive("physics.units.length_unit", u.length_unit);
                if self.physics.m.is_some() {
                    c.push("physics.m", "must be omitted with MKS units (the mass comes from physics.units.mass)");
                }
                true
            }
        };
        match &self.physics.potential {
            PotentialConfig::Free => {}
            PotentialConfig::Box => {
                if self.grid.bc != BoundaryName::Dirichlet {
                    c.push("physics.potential", "box requires grid.bc = \"dirichlet\"");
                }
            }
            PotentialConfig::Harmonic { omega } => c.positive("physics.potential.omega", *omega),
            PotentialConfig::Quadratic { stiffness } => c.positive("physics.potential.stiffness", *stiffness),
            PotentialConfig::GaussianBarrier { height, center, width } => {
                c.finite("physics.potential.height", &[*height]);
                c.positive("physics.potential.width", *width);
                if center.len() != dim {
                    c.push("physics.potential.center", format!("has {} entries, expected {dim}", center.len()));
                }
                c.finite("physics.potential.center", center);
            }
            PotentialConfig::Tabulated { values } => {
                if values.len() != self.node_count() {
                    c.push(
                        "physics.potential.values",
                        format!("has {} entries, expected {} grid nodes", values.len(), self.node_count()),
                    );
                }
                c.finite("physics.potential.values", values);
            }
        }

        // initial state
        let init = &self.initial;
        let given: Vec<&str> = [
            ("packet", init.packet.is_some()),
            ("eigenmode", init.eigenmode.is_some()),
            ("snapshot", init.snapshot.is_some()),
            ("uniform", init.uniform.is_some()),
        ]
        .iter()
        .filter(|(_, set)| *set)
        .map(|(name, _)| *name)
        .collect();
        if given.len() != 1 {
            let found = if given.is_empty() { "none".to_string() } else { given.join(", ") };
            c.push("initial", format!("exactly one initial state must be given (found: {found})"));
        }
        if let Some(p) = &init.packet {
            c.positive("initial.packet.width", p.width);
            if p.center.len() != dim {
                c.push("initial.packet.center", format!("has {} entries, expected {dim}", p.center.len()));
            }
            c.finite("initial.packet.center", &p.center);
            if let Some(k) = &p.wavenumber {
                if k.len() != dim {
                    c.push("initial.packet.wavenumber", format!("has {} entries, expected {dim}", k.len()));
                }
                c.finite("initial.packet.wavenumber", k);
            }
        }
        if let Some(k) = init.eigenmode {
            if k >= self.node_count() {
                c.push("initial.eigenmode", format!("index {k} exceeds the {} grid nodes", self.node_count()));
            }
        }
        if let Some(u) = &init.uniform {
            c.finite("initial.uniform", &[u.p, u.q]);
        }

        // scheme
        let s = &self.scheme;
        if !(s.t_final.is_finite() && s.t_final >= 0.0) {
            c.push("scheme.t_final", format!("must be non-negative and finite, got {}", s.t_final));
        }
        match &s.dt {
            DtConfig::Value(dt) => c.positive("scheme.dt", *dt),
            DtConfig::Named(name) if name == "auto" => {}
            DtConfig::Named(name) => c.push("scheme.dt", format!("expected a number or \"auto\", got \"{name}\"")),
        }
        if s.observe_stride == 0 {
            c.push("scheme.observe_stride", "must be at least 1");
        }
        if !(s.tolerance > 0.0 && s.tolerance <= 1e-6) {
            c.push("scheme.tolerance", format!("must lie in (0, 1e-6], got {}", s.tolerance));
        }
        if s.max_iterations == 0 {
            c.push("scheme.max_iterations", "must be at least 1");
        }

        if let Some(e) = &self.experiment {
            if !e.m_list.is_empty() {
                if e.m_list.len() < 3 {
                    c.push("experiment.m_list", "needs at least 3 masses");
                }
                if e.m_list.iter().any(|m| !(m.is_finite() && *m > 0.0)) {
                    c.push("experiment.m_list", "masses must be positive and finite");
                }
                if e.m_list.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
                    c.push("experiment.m_list", "must be strictly ascending");
                }
            }
            if let Some(dt) = e.reduced_dt {
                c.positive("experiment.reduced_dt", dt);
            }
            if mks && !e.m_list.is_empty() {
                c.push("experiment.m_list", "sweeps run in natural units; drop physics.units");
            }
        }
        if let Some(sp) = &self.spectrum {
            if sp.k == 0 || sp.k > self.node_count() {
                c.push("spectrum.k", format!("must lie in 1..={}, got {}", self.node_count(), sp.k));
            }
            c.positive("spectrum.tolerance", sp.tolerance);
        }

        if self.output.directory.is_empty() {
            c.push("output.directory", "must not be empty");
        }
        for f in &self.output.formats {
            if f != "csv" && f != "snapshot" {
                c.push("output.formats", format!("unknown format \"{f}\" (expected \"csv\" or \"snapshot\")"));
            }
        }
        c.0
    }

    /// Potential in natural units, for a given natural mass.
    pub fn potential_spec(&self) -> PotentialSpec<f64> {
        let u = self.unit_system();
        let (e0, l, t) = (u.energy_unit(), u.length_unit, u.time_unit());
        match &self.physics.potential {
            PotentialConfig::Free => PotentialSpec::Free,
            PotentialConfig::Box => PotentialSpec::Box,
            PotentialConfig::Harmonic { omega } => PotentialSpec::HarmonicOscillator { omega: omega * t },
            PotentialConfig::Quadratic { stiffness } => PotentialSpec::Quadratic {
                stiffness: stiffness * l * l / e0,
            },
            PotentialConfig::GaussianBarrier { height, center, width } => PotentialSpec::GaussianBarrier {
                height: height / e0,
                center: center.iter().map(|x| x / l).collect(),
                width: width / l,
            },
            PotentialConfig::Tabulated { values } => PotentialSpec::Tabulated(values.iter().map(|v| v / e0).collect()),
        }
    }

    /// The mass parameter of the natural-unit run.
    pub fn natural_mass(&self) -> f64 {
        match self.mks_units() {
            Some(u) => u.natural_mass(),
            None => self.physics.m.unwrap_or(1.0),
        }
    }

    /// Grid extents in natural length units.
    pub fn natural_extents(&self) -> Vec<(f64, f64)> {
        let l = self.unit_system().length_unit;
        self.grid.extents.iter().map(|[a, b]| (a / l, b / l)).collect()
    }

    /// `t_final` and numeric `dt` in natural time units.
    pub fn natural_times(&self) -> (f64, Option<f64>) {
        let t = self.unit_system().time_unit();
        (self.scheme.t_final / t, self.scheme.dt.value().map(|dt| dt / t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
[grid]
extents = [[0.0, 1.0]]
points = [63]

[physics]
m = 1.0
potential = { kind = "box" }

[initial]
eigenmode = 0
"#;

    #[test]
    fn minimal_config_gets_defaults() {
        let cfg = parse_config(MINIMAL).unwrap();
        assert_eq!(cfg.grid.bc, BoundaryName::Dirichlet);
        assert_eq!(cfg.scheme.kind, SchemeName::Reduced);
        assert_eq!(cfg.scheme.dt, DtConfig::Named("auto".into()));
        assert_eq!(cfg.scheme.observe_stride, 1);
        assert_eq!(cfg.scheme.tolerance, 1e-12);
        assert_eq!(cfg.output.directory, "output");
        assert!(cfg.mks_units().is_none());
    }

    #[test]
    fn negative_t_final_names_the_field() {
        let text = format!("{MINIMAL}\n[scheme]\nt_final = -1.0\n");
        let err = parse_config(&text).unwrap_err();
        assert_eq!(err.issues().len(), 1);
        assert_eq!(err.issues()[0].field, "scheme.t_final");
    }

    #[test]
    fn two_initial_states_rejected() {
        let text = MINIMAL.replace("eigenmode = 0", "eigenmode = 0\npacket = { center = [0.5], width = 0.05 }");
        let err = parse_config(&text).unwrap_err();
        assert!(err.to_string().contains("exactly one initial state"), "{err}");
    }

    #[test]
    fn every_violation_is_listed() {
        let text = r#"
[grid]
extents = [[1.0, 0.0]]
points = [0]
bc = "periodic"

[physics]
m = -2.0
potential = { kind = "box" }

[initial]

[scheme]
dt = "fast"
t_final = -3.0
"#;
        let err = parse_config(text).unwrap_err();
        let fields: Vec<&str> = err.issues().iter().map(|i| i.field.as_str()).collect();
        for f in ["grid.points", "grid.extents[0]", "physics.m", "physics.potential", "initial", "scheme.t_final", "scheme.dt"] {
            assert!(fields.contains(&f), "missing {f} in {fields:?}");
        }
    }

    #[test]
    fn unknown_keys_report_a_line() {
        let text = MINIMAL.replace("m = 1.0", "m = 1.0\nmas = 2.0");
        match parse_config(&text).unwrap_err() {
            ConfigError::Syntax { line, message, .. } => {
                assert!(line.is_some());
                assert!(message.contains("mas"), "{message}");
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn syntax_error_has_line() {
        let err = parse_config("[grid]\nextents = [[0.0, 1.0]\n").unwrap_err();
        assert!(matches!(err, ConfigError::Syntax { line: Some(_), .. }));
    }

    #[test]
    fn mks_units_parse() {
        let text = MINIMAL.replace(
            "m = 1.0",
            "units = { h = 6.62607015e-34, c = 299792458.0, mass = 9.1093837015e-31, length_unit = 1e-10 }",
        );
        let cfg = parse_config(&text).unwrap();
        let u = cfg.mks_units().unwrap();
        assert!((cfg.natural_mass() - u.natural_mass()).abs() < 1e-12);
    }

    #[test]
    fn echo_round_trips() {
        let cfg = parse_config(MINIMAL).unwrap();
        let text = toml::to_string(&cfg).unwrap();
        assert_eq!(parse_config(&text).unwrap(), cfg);
    }
}
