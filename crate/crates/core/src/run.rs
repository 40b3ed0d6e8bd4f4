//! Config-driven runs: simulate, spectrum, sweep and unit conversion.
//!
//! Data files are pure functions of the configuration. Wall time and other
//! run metadata go only into `manifest.json`.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde_json::{json, Value};
use sha2::{Digest, Sha256};

use crate::config::{parse_config, ConfigError, Issue, PotentialConfig, RunConfig};
use crate::dynamics::{evolve, stability_limit, EvolveOptions, IntegratorConfig, Observable, Reference, Scheme, State, Trajectory};
use crate::error::{Error, Result};
use crate::experiments::{adiabatic_convergence_study, cold_start_transient, Scenario, StudyOptions};
use crate::fields::{adiabatic_lift, build_potential, free_packet, gaussian_packet, project, FullState, Mass, PotentialSpec, ReducedState};
use crate::grid::{Grid, ScalarField};
use crate::snapshot::Snapshot;
use crate::spectral::{build_operator, lowest_eigenpairs, normal_mode_state, rotate, EigenPair};
use crate::units::{from_natural, planck_frequency, to_natural, Quantities, UnitSystem};

/// Eigenpairs computed when the config has no `[spectrum]` block.
pub const DEFAULT_EIGENPAIRS: usize = 5;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Command {
    Simulate,
    Spectrum,
    Sweep,
    ConvertUnits,
    ValidateConfig,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Simulate => "simulate",
            Command::Spectrum => "spectrum",
            Command::Sweep => "sweep",
            Command::ConvertUnits => "convert-units",
            Command::ValidateConfig => "validate-config",
        }
    }
}

/// Reads and validates a config file.
pub fn load_config(path: impl AsRef<Path>) -> Result<RunConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_config(&text)?)
}

/// The natural-unit problem described by a config.
#[derive(Clone, Debug)]
pub struct Problem {
    pub grid: Grid<f64>,
    pub m: Mass<f64>,
    pub potential: ScalarField<f64>,
    pub spec: PotentialSpec<f64>,
    pub units: UnitSystem<f64>,
    pub mks: bool,
}

pub fn build_problem(cfg: &RunConfig) -> Result<Problem> {
    let grid = Grid::new(&cfg.natural_extents(), &cfg.grid.points, cfg.boundary())?;
    let m = Mass::new(cfg.natural_mass())?;
    let spec = cfg.potential_spec();
    let potential = build_potential(&spec, &grid, m)?;
    Ok(Problem {
        grid,
        m,
        potential,
        spec,
        units: cfg.unit_system(),
        mks: cfg.mks_units().is_some(),
    })
}

fn config_issue(field: &str, message: impl Into<String>) -> Error {
    Error::Config(ConfigError::Invalid(vec![Issue {
        field: field.into(),
        message: message.into(),
    }]))
}

/// Packet parameters in natural units: centre, width, wavenumber.
fn natural_packet(cfg: &RunConfig) -> Option<(Vec<f64>, f64, Vec<f64>)> {
    let p = cfg.initial.packet.as_ref()?;
    let l = cfg.unit_system().length_unit;
    let k = p.wavenumber.clone().unwrap_or_else(|| vec![0.0; p.center.len()]);
    Some((
        p.center.iter().map(|c| c / l).collect(),
        p.width / l,
        k.iter().map(|k| k * l).collect(),
    ))
}

/// Slow (or full, from a snapshot) initial state.
pub fn initial_state(cfg: &RunConfig, problem: &Problem) -> Result<State<f64>> {
    let g = &problem.grid;
    let init = &cfg.initial;
    if let Some((c, w, k)) = natural_packet(cfg) {
        return Ok(State::Reduced(gaussian_packet(g, &c, w, &k)?));
    }
    if let Some(index) = init.eigenmode {
        let pair = eigenmode(problem, index, 1e-10)?;
        return Ok(State::Reduced(normal_mode_state(&pair, 0.0)));
    }
    if let Some(path) = &init.snapshot {
        let snap = Snapshot::<f64>::load(path)?;
        if &snap.grid != g {
            return Err(config_issue("initial.snapshot", format!("grid in {path} does not match the configured grid")));
        }
        return snap.to_state();
    }
    if let Some(u) = &init.uniform {
        return Ok(State::Reduced(ReducedState::uniform(g, u.p, u.q)));
    }
    Err(config_issue("initial", "exactly one initial state must be given (found: none)"))
}

fn eigenmode(problem: &Problem, index: usize, tol: f64) -> Result<EigenPair<f64>> {
    let op = build_operator(&problem.grid, problem.m, &problem.potential)?;
    let mut pairs = lowest_eigenpairs(&op, index + 1, tol)?;
    Ok(pairs.swap_remove(index))
}

/// The state handed to the integrator for the configured scheme.
pub fn prepared_state(cfg: &RunConfig, problem: &Problem, initial: State<f64>) -> State<f64> {
    let cold = cfg.experiment.as_ref().is_some_and(|e| e.cold_start);
    match (cfg.scheme(), initial) {
        (Scheme::FullImplicitMidpoint, State::Reduced(r)) if cold => State::Full(FullState::cold(&r)),
        (Scheme::FullImplicitMidpoint, State::Reduced(r)) => State::Full(adiabatic_lift(&r, problem.m)),
        (Scheme::ReducedCrankNicolson, State::Full(f)) => State::Reduced(project(&f)),
        (_, s) => s,
    }
}

/// Natural-unit step: the configured value or the `auto` rule.
pub fn resolve_dt(cfg: &RunConfig, problem: &Problem) -> f64 {
    match cfg.natural_times().1 {
        Some(dt) => dt,
        None => stability_limit(problem.m, &problem.grid, &problem.potential).recommended(cfg.scheme()),
    }
}

fn reference(cfg: &RunConfig, problem: &Problem, state: &State<f64>) -> Result<Reference<f64>> {
    if matches!(state, State::Full(_)) {
        return Ok(Reference::Reduced);
    }
    if let Some(index) = cfg.initial.eigenmode {
        let pair = eigenmode(problem, index, 1e-10)?;
        let r0 = normal_mode_state(&pair, 0.0);
        let e = pair.energy;
        return Ok(Reference::Analytic(Box::new(move |t| rotate(&r0, e * t))));
    }
    if let (Some((c, w, k)), PotentialConfig::Free) = (natural_packet(cfg), &cfg.physics.potential) {
        let (g, m) = (problem.grid.clone(), problem.m);
        return Ok(Reference::Analytic(Box::new(move |t| {
            free_packet(&g, &c, w, &k, m, t).expect("packet dimensions validated")
        })));
    }
    Ok(Reference::Initial)
}

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn observables_csv(traj: &Trajectory<f64>) -> String {
    let mut out = String::from("t");
    for (o, _) in &traj.series {
        out.push(',');
        out.push_str(o.name());
    }
    out.push('\n');
    for (i, t) in traj.times.iter().enumerate() {
        out.push_str(&fmt_f64(*t));
        for (_, col) in &traj.series {
            out.push(',');
            out.push_str(&fmt_f64(col[i]));
        }
        out.push('\n');
    }
    out
}

/// Lowercase hex SHA-256.
pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut s = String::with_capacity(64);
    for b in digest {
        write!(s, "{b:02x}").expect("writing to a String cannot fail");
    }
    s
}

struct Outputs<'a> {
    dir: &'a Path,
    files: Vec<(String, String)>,
}

impl<'a> Outputs<'a> {
    fn new(dir: &'a Path) -> Result<Self> {
        std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        Ok(Outputs { dir, files: Vec::new() })
    }

    fn write(&mut self, rel: &str, bytes: &[u8]) -> Result<()> {
        let path = self.dir.join(rel);
        if let Some(parent) = path.parent() {
            std::fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        std::fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        self.files.push((rel.to_string(), sha256_hex(bytes)));
        Ok(())
    }

    fn finish(mut self, cfg: &RunConfig, command: Command, started: Instant, extra: Value) -> Result<Vec<PathBuf>> {
        let checksums: serde_json::Map<String, Value> =
            self.files.iter().map(|(f, h)| (f.clone(), Value::String(h.clone()))).collect();
        let manifest = json!({
            "command": command.name(),
            "version": env!("CARGO_PKG_VERSION"),
            "config": cfg,
            "units": units_json(cfg),
            "outputs": checksums,
            "wall_time_s": started.elapsed().as_secs_f64(),
            "details": extra,
        });
        let text = serde_json::to_string_pretty(&manifest).expect("manifest is valid JSON");
        let path = self.dir.join("manifest.json");
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
        self.files.push(("manifest.json".into(), String::new()));
        Ok(self.files.iter().map(|(f, _)| self.dir.join(f)).collect())
    }
}

fn units_json(cfg: &RunConfig) -> Value {
    let u = cfg.unit_system();
    json!({
        "system": if cfg.mks_units().is_some() { "mks" } else { "natural" },
        "h": u.h,
        "c": u.c,
        "mass": u.mass,
        "length_unit": u.length_unit,
        "energy_unit": u.energy_unit(),
        "time_unit": u.time_unit(),
        "natural_mass": u.natural_mass(),
        "planck_frequency": planck_frequency(&u),
    })
}

/// Evolves the configured initial state and writes `observables.csv`,
/// snapshots and the manifest.
pub fn simulate(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let problem = build_problem(cfg)?;
    let state = prepared_state(cfg, &problem, initial_state(cfg, &problem)?);
    let dt = resolve_dt(cfg, &problem);
    let (t_final, _) = cfg.natural_times();
    let integ = IntegratorConfig {
        dt,
        scheme: cfg.scheme(),
        tolerance: cfg.scheme.tolerance,
        max_iterations: cfg.scheme.max_iterations,
    };
    let opts = EvolveOptions {
        observables: Observable::ALL.to_vec(),
        observe_stride: cfg.scheme.observe_stride,
        snapshot_stride: if cfg.wants("snapshot") { cfg.scheme.snapshot_stride } else { 0 },
        reference: reference(cfg, &problem, &state)?,
    };
    log::info!("simulate: {} steps of dt = {dt:e}", crate::dynamics::step_plan(t_final, dt).0);
    let traj = evolve(&state, problem.m, &problem.potential, &integ, t_final, &opts)?;

    let mut outs = Outputs::new(out)?;
    if cfg.wants("csv") {
        outs.write("observables.csv", observables_csv(&traj).as_bytes())?;
    }
    for (i, (t, s)) in traj.snapshots.iter().enumerate() {
        let snap = Snapshot::from_state(s, *t, Some(&problem.potential));
        outs.write(&format!("snapshots/snap_{i:06}.bin"), &snap.to_bytes())?;
    }
    let extra = json!({
        "steps": traj.steps,
        "dt": traj.dt,
        "t_final": t_final,
        "scheme": format!("{:?}", cfg.scheme()),
        "reference": format!("{:?}", opts.reference),
        "max_solver_iterations": traj.max_solver_iterations,
    });
    outs.finish(cfg, Command::Simulate, started, extra)
}

/// Lowest eigenpairs: `eigenpairs.csv` plus one snapshot per mode holding the
/// normal-mode state at phase zero.
pub fn spectrum(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let problem = build_problem(cfg)?;
    let (k, tol) = match &cfg.spectrum {
        Some(s) => (s.k, s.tolerance),
        None => (DEFAULT_EIGENPAIRS.min(problem.grid.node_count()), 1e-10),
    };
    let op = build_operator(&problem.grid, problem.m, &problem.potential)?;
    let pairs = lowest_eigenpairs(&op, k, tol)?;
    let e0 = problem.units.energy_unit();

    let mut csv = String::from("index,E,residual");
    if problem.mks {
        csv.push_str(",E_joules");
    }
    csv.push('\n');
    for (i, p) in pairs.iter().enumerate() {
        write!(csv, "{i},{},{}", fmt_f64(p.energy), fmt_f64(p.residual)).expect("string write");
        if problem.mks {
            write!(csv, ",{}", fmt_f64(p.energy * e0)).expect("string write");
        }
        csv.push('\n');
    }
    let mut outs = Outputs::new(out)?;
    outs.write("eigenpairs.csv", csv.as_bytes())?;
    if cfg.wants("snapshot") {
        for (i, p) in pairs.iter().enumerate() {
            let s = State::Reduced(normal_mode_state(p, 0.0));
            let snap = Snapshot::from_state(&s, 0.0, Some(&problem.potential));
            outs.write(&format!("modes/mode_{i:03}.bin"), &snap.to_bytes())?;
        }
    }
    outs.finish(cfg, Command::Spectrum, started, json!({ "k": k, "tolerance": tol }))
}

/// Adiabatic convergence study over `experiment.m_list`; `study.csv`, and
/// `transient.csv` when `cold_start` is set.
pub fn sweep(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let exp = cfg
        .experiment
        .as_ref()
        .filter(|e| !e.m_list.is_empty())
        .ok_or_else(|| config_issue("experiment.m_list", "sweep needs at least 3 masses"))?;
    let (t_final, _) = cfg.natural_times();
    if t_final <= 0.0 {
        return Err(config_issue("scheme.t_final", "sweep needs a positive final time"));
    }
    let problem = build_problem(cfg)?;
    let initial = match initial_state(cfg, &problem)? {
        State::Reduced(r) => r,
        State::Full(f) => project(&f),
    };
    let scenario = Scenario {
        grid: problem.grid.clone(),
        potential: problem.spec.clone(),
        initial,
    };
    let opts = StudyOptions {
        reduced_dt: exp.reduced_dt,
        tolerance: cfg.scheme.tolerance,
        max_iterations: cfg.scheme.max_iterations,
        ..StudyOptions::default()
    };
    let table = adiabatic_convergence_study(&scenario, &exp.m_list, t_final, &opts)?;
    let mut outs = Outputs::new(out)?;
    outs.write("study.csv", table.to_csv(false).as_bytes())?;

    let fit = |f: &Option<crate::experiments::PowerFit<f64>>| match f {
        Some(f) => json!({ "order": f.order, "r_squared": f.r_squared }),
        None => Value::Null,
    };
    let mut extra = json!({
        "t_final": t_final,
        "err_fit": fit(&table.err_fit),
        "norm_fit": fit(&table.norm_fit),
        "cells": table.rows.iter().map(|r| json!({
            "m": r.m,
            "wall_time_s": r.wall_time_s,
            "reduced_self_check": r.reduced_self_check,
            "initial_hidden_amp": r.initial_hidden_amp,
        })).collect::<Vec<_>>(),
    });
    if exp.cold_start {
        let m = *exp.m_list.last().expect("non-empty");
        let rep = cold_start_transient(&scenario, m, t_final, None, cfg.scheme.tolerance)?;
        let mut csv = String::from("t,hidden_energy\n");
        for (t, e) in rep.times.iter().zip(&rep.hidden_energy) {
            writeln!(csv, "{},{}", fmt_f64(*t), fmt_f64(*e)).expect("string write");
        }
        outs.write("transient.csv", csv.as_bytes())?;
        extra["cold_start"] = json!({
            "m": rep.m,
            "frequency": rep.frequency,
            "crossings": rep.crossings,
            "cold_amplitude": rep.cold_amplitude,
            "adiabatic_amplitude": rep.adiabatic_amplitude,
            "amplitude_ratio": rep.amplitude_ratio,
            "averaged_distance": rep.averaged_distance,
        });
    }
    outs.finish(cfg, Command::Sweep, started, extra)
}

/// Dimensional quantities of a config, in MKS and natural units.
pub fn config_quantities(cfg: &RunConfig) -> Vec<(String, &'static str, f64)> {
    let mut q = Vec::new();
    for (j, [a, b]) in cfg.grid.extents.iter().enumerate() {
        q.push((format!("grid.extents[{j}].lower"), "length", *a));
        q.push((format!("grid.extents[{j}].upper"), "length", *b));
    }
    q.push(("scheme.t_final".into(), "time", cfg.scheme.t_final));
    if let Some(dt) = cfg.scheme.dt.value() {
        q.push(("scheme.dt".into(), "time", dt));
    }
    match &cfg.physics.potential {
        PotentialConfig::GaussianBarrier { height, center, width } => {
            q.push(("physics.potential.height".into(), "energy", *height));
            for (j, c) in center.iter().enumerate() {
                q.push((format!("physics.potential.center[{j}]"), "length", *c));
            }
            q.push(("physics.potential.width".into(), "length", *width));
        }
        PotentialConfig::Harmonic { omega } => q.push(("physics.potential.omega".into(), "frequency", *omega)),
        PotentialConfig::Quadratic { stiffness } => q.push(("physics.potential.stiffness".into(), "stiffness", *stiffness)),
        PotentialConfig::Tabulated { values } => {
            for (i, v) in values.iter().enumerate() {
                q.push((format!("physics.potential.values[{i}]"), "energy", *v));
            }
        }
        _ => {}
    }
    q
}

/// Writes `units.csv`: each dimensional config value, its natural-unit image
/// and the round trip back.
pub fn convert_units(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    let started = Instant::now();
    let u = cfg.unit_system();
    let quantities = config_quantities(cfg);
    let mut mks = Quantities::default();
    for (_, kind, x) in &quantities {
        match *kind {
            "length" => mks.lengths.push(*x),
            "time" => mks.times.push(*x),
            "energy" => mks.energies.push(*x),
            // energy per length squared: carried as the energy k λ²
            "stiffness" => mks.energies.push(*x * u.length_unit * u.length_unit),
            // 1/time: converted as a time and inverted
            _ => mks.times.push(1.0 / *x),
        }
    }
    let (nat, scales) = to_natural(&u, &mks);
    let back = from_natural(&u, &nat);
    let (mut il, mut it, mut ie) = (0, 0, 0);
    let mut csv = String::from("quantity,kind,mks,natural,round_trip\n");
    for (name, kind, x) in &quantities {
        let (n, r) = match *kind {
            "length" => {
                il += 1;
                (nat.lengths[il - 1], back.lengths[il - 1])
            }
            "time" => {
                it += 1;
                (nat.times[it - 1], back.times[it - 1])
            }
            "energy" => {
                ie += 1;
                (nat.energies[ie - 1], back.energies[ie - 1])
            }
            "stiffness" => {
                ie += 1;
                let l2 = u.length_unit * u.length_unit;
                (nat.energies[ie - 1], back.energies[ie - 1] / l2)
            }
            _ => {
                it += 1;
                (1.0 / nat.times[it - 1], 1.0 / back.times[it - 1])
            }
        };
        writeln!(csv, "{name},{kind},{},{},{}", fmt_f64(*x), fmt_f64(n), fmt_f64(r)).expect("string write");
    }
    writeln!(
        csv,
        "mass,mass,{},{},{}",
        fmt_f64(u.mass),
        fmt_f64(u.natural_mass()),
        fmt_f64(u.natural_mass() * u.h / (u.c * u.length_unit))
    )
    .expect("string write");
    let pf = planck_frequency(&u);
    writeln!(csv, "planck_frequency,frequency,{},{},{}", fmt_f64(pf), fmt_f64(pf * scales.time), fmt_f64(pf * scales.time / scales.time))
        .expect("string write");
    let mut outs = Outputs::new(out)?;
    outs.write("units.csv", csv.as_bytes())?;
    outs.finish(
        cfg,
        Command::ConvertUnits,
        started,
        json!({ "energy_unit": scales.energy, "length_unit": scales.length, "time_unit": scales.time }),
    )
}

/// Dispatches a subcommand. `validate-config` writes nothing.
pub fn run(command: Command, cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>> {
    match command {
        Command::Simulate => simulate(cfg, out),
        Command::Spectrum => spectrum(cfg, out),
        Command::Sweep => sweep(cfg, out),
        Command::ConvertUnits => convert_units(cfg, out),
        Command::ValidateConfig => Ok(Vec::new()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_round_trips() {
        for x in [0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, f64::MIN_POSITIVE] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn sha_of_empty_input() {
        assert_eq!(sha256_hex(b""), "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
    }

    #[test]
    fn prepared_state_follows_scheme() {
        let cfg = parse_config(
            "[grid]\nextents=[[0.0,1.0]]\npoints=[15]\n[physics]\nm=2.0\n[initial]\nuniform={p=0.0,q=1.0}\n[scheme]\nkind=\"full\"\n",
        )
        .unwrap();
        let problem = build_problem(&cfg).unwrap();
        let s = prepared_state(&cfg, &problem, initial_state(&cfg, &problem).unwrap());
        assert!(matches!(s, State::Full(_)));
    }
}
