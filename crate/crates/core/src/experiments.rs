//! Convergence of the full system to Schrödinger dynamics as `m` grows, and
//! the fast transient excited by a cold start.

use std::time::Instant;

use rayon::prelude::*;

use crate::dynamics::{IntegratorConfig, FullStepper, ReducedStepper, Scheme};
use crate::error::{Error, Result};
use crate::fields::{adiabatic_lift, build_potential, FullLayout, FullState, Mass, PotentialSpec, ReducedState};
use crate::grid::{Grid, Location, ScalarField};
use crate::observables::{hamiltonian_full, hidden_energy, l2_distance, norm};
use crate::scalar::Real;
use crate::spectral::frequency_content;

/// Grid, potential and slow initial state shared by every cell of a study.
#[derive(Clone, Debug)]
pub struct Scenario<T> {
    pub grid: Grid<T>,
    pub potential: PotentialSpec<T>,
    pub initial: ReducedState<T>,
}

/// Step-size and solver settings for a study.
#[derive(Clone, Copy, Debug)]
pub struct StudyOptions<T> {
    /// Full-system step is `full_dt_scale / m`.
    pub full_dt_scale: T,
    /// Reduced-system step; `None` means `full_dt_scale / (4 max m)`.
    pub reduced_dt: Option<T>,
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> Default for StudyOptions<T> {
    fn default() -> Self {
        StudyOptions {
            full_dt_scale: T::lit(0.1),
            reduced_dt: None,
            tolerance: T::lit(1e-12),
            max_iterations: 10_000,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyRow<T> {
    pub m: T,
    /// `‖project(full(T)) − reduced(T)‖`
    pub err_t: T,
    /// Largest hidden-field sample over the run.
    pub max_hidden_amp: T,
    /// Largest hidden-field sample at `t = 0`.
    pub initial_hidden_amp: T,
    /// `max |N(t) − N(0)|` of the slow norm under the full system.
    pub norm_fluct: T,
    /// Largest relative change of the full Hamiltonian.
    pub h_drift: T,
    /// `m / E_max`, with `E_max = |⟨H⟩| + 3ΔH` of the initial state.
    pub separation_ratio: T,
    /// Distance between reduced runs at `dt` and `dt/2`.
    pub reduced_self_check: T,
    pub wall_time_s: f64,
}

/// Least-squares fit `log err = c − order · log(1/x)` in disguise: `err ∝ x^(−order)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PowerFit<T> {
    pub order: T,
    pub r_squared: T,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StudyTable<T> {
    pub rows: Vec<StudyRow<T>>,
    /// Order of `err_t` in `1/m`; `None` when some error is zero.
    pub err_fit: Option<PowerFit<T>>,
    /// Order of `norm_fluct` in `1/m`.
    pub norm_fit: Option<PowerFit<T>>,
}

impl<T: Real> StudyTable<T> {
    pub const COLUMNS: [&'static str; 8] = [
        "m",
        "err_T",
        "fitted_order",
        "max_hidden_amp",
        "norm_fluct",
        "H_drift",
        "separation_ratio",
        "wall_time_s",
    ];

    /// CSV text; the fitted order appears on the last row only. Wall time is
    /// omitted (written as empty) when `with_wall_time` is false so output
    /// stays byte-stable.
    pub fn to_csv(&self, with_wall_time: bool) -> String {
        let mut out = Self::COLUMNS.join(",");
        out.push('\n');
        let last = self.rows.len().saturating_sub(1);
        for (i, r) in self.rows.iter().enumerate() {
            let order = match (&self.err_fit, i == last) {
                (Some(f), true) => format!("{:.16e}", f.order.as_f64()),
                _ => String::new(),
            };
            let wall = if with_wall_time {
                format!("{:.6}", r.wall_time_s)
            } else {
                String::new()
            };
            out.push_str(&format!(
                "{:.16e},{:.16e},{},{:.16e},{:.16e},{:.16e},{:.16e},{}\n",
                r.m.as_f64(),
                r.err_t.as_f64(),
                order,
                r.max_hidden_amp.as_f64(),
                r.norm_fluct.as_f64(),
                r.h_drift.as_f64(),
                r.separation_ratio.as_f64(),
                wall
            ));
        }
        out
    }
}

/// Fits `err ∝ (1/x)^order` by least squares on `log err` against `log(1/x)`.
pub fn measured_order<T: Real>(xs: &[T], errs: &[T]) -> Result<PowerFit<T>> {
    if xs.len() != errs.len() {
        return Err(Error::LengthMismatch {
            expected: xs.len(),
            actual: errs.len(),
        });
    }
    if xs.len() < 3 {
        return Err(Error::InvalidParameter("order fit needs at least 3 points".into()));
    }
    if xs.iter().chain(errs).any(|&v| !(v.is_finite() && v > T::zero())) {
        return Err(Error::InvalidParameter("order fit needs positive finite values".into()));
    }
    let n = T::from_usize_lossy(xs.len());
    let u: Vec<T> = xs.iter().map(|&x| -x.ln()).collect();
    let w: Vec<T> = errs.iter().map(|&e| e.ln()).collect();
    let mu = u.iter().copied().sum::<T>() / n;
    let mw = w.iter().copied().sum::<T>() / n;
    let suu: T = u.iter().map(|&a| (a - mu) * (a - mu)).sum();
    let suw: T = u.iter().zip(&w).map(|(&a, &b)| (a - mu) * (b - mw)).sum();
    let sww: T = w.iter().map(|&b| (b - mw) * (b - mw)).sum();
    if suu == T::zero() {
        return Err(Error::InvalidParameter("order fit needs distinct abscissae".into()));
    }
    let order = suw / suu;
    let r_squared = if sww == T::zero() {
        T::one()
    } else {
        (suw * suw / (suu * sww)).min(T::one())
    };
    Ok(PowerFit { order, r_squared })
}

struct FullRun<T> {
    state: FullState<T>,
    max_hidden: T,
    norm_fluct: T,
    h_drift: T,
}

fn run_full<T: Real>(
    start: FullState<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    cfg: IntegratorConfig<T>,
    steps: usize,
    mut each: impl FnMut(usize, &FullState<T>),
) -> Result<FullRun<T>> {
    let grid = start.grid().clone();
    let mut stepper = FullStepper::new(&grid, m, v, cfg)?;
    let n0 = norm(&crate::fields::project(&start));
    let h0 = hamiltonian_full(&start, m, v);
    let mut flat = start.to_flat();
    let mut run = FullRun {
        max_hidden: start.hidden_max_abs(),
        state: start,
        norm_fluct: T::zero(),
        h_drift: T::zero(),
    };
    each(0, &run.state);
    let layout = FullLayout::new(&grid);
    let w = grid.cell_volume();
    for k in 1..=steps {
        stepper.step(&mut flat)?;
        if flat.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!("full state after step {k}")));
        }
        let slow_sq: T = flat[layout.p().start..layout.q().end].iter().map(|&x| x * x).sum();
        let nk = T::lit(0.5) * slow_sq * w;
        run.norm_fluct = run.norm_fluct.max((nk - n0).abs());
        let hidden = flat[layout.q().end..].iter().fold(T::zero(), |a, &x| a.max(x.abs()));
        run.max_hidden = run.max_hidden.max(hidden);
        run.state = FullState::from_flat(&grid, &flat)?;
        let h = hamiltonian_full(&run.state, m, v);
        let scale = if h0 == T::zero() { T::one() } else { h0.abs() };
        run.h_drift = run.h_drift.max((h - h0).abs() / scale);
        each(k, &run.state);
    }
    Ok(run)
}

fn run_reduced<T: Real>(
    r0: &ReducedState<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    cfg: IntegratorConfig<T>,
    steps: usize,
) -> Result<ReducedState<T>> {
    let grid = r0.grid();
    let mut stepper = ReducedStepper::new(grid, m, v, cfg)?;
    let mut p = r0.p.values().to_vec();
    let mut q = r0.q.values().to_vec();
    for _ in 0..steps {
        stepper.step(&mut p, &mut q)?;
    }
    Ok(ReducedState {
        p: ScalarField::from_raw(grid, Location::Node, p),
        q: ScalarField::from_raw(grid, Location::Node, q),
    })
}

fn study_cell<T: Real>(scenario: &Scenario<T>, m: T, t_final: T, reduced_dt: T, opts: &StudyOptions<T>) -> Result<StudyRow<T>> {
    let start = Instant::now();
    let mass = Mass::new(m)?;
    let v = build_potential(&scenario.potential, &scenario.grid, mass)?;
    let r0 = &scenario.initial;
    let separation_ratio = {
        let e_max = frequency_content(r0, mass, &v)?;
        if e_max == T::zero() {
            T::infinity()
        } else {
            m / e_max
        }
    };
    if separation_ratio < T::lit(10.0) {
        log::warn!("m = {m}: frequency separation ratio {separation_ratio:.3} is below 10");
    }

    let (steps, dt) = crate::dynamics::step_plan(t_final, opts.full_dt_scale / m);
    let cfg = IntegratorConfig::new(dt, Scheme::FullImplicitMidpoint).with_tolerance(opts.tolerance);
    let cfg = IntegratorConfig {
        max_iterations: opts.max_iterations,
        ..cfg
    };
    let lifted = adiabatic_lift(r0, mass);
    let initial_hidden_amp = lifted.hidden_max_abs();
    let full = run_full(lifted, mass, &v, cfg, steps, |_, _| {})?;

    let (rsteps, rdt) = crate::dynamics::step_plan(t_final, reduced_dt);
    let rcfg = IntegratorConfig {
        dt: rdt,
        scheme: Scheme::ReducedCrankNicolson,
        ..cfg
    };
    let reduced = run_reduced(r0, mass, &v, rcfg, rsteps)?;
    let fine = run_reduced(r0, mass, &v, rcfg.with_dt(rdt / T::lit(2.0)), 2 * rsteps)?;

    let slow = crate::fields::project(&full.state);
    Ok(StudyRow {
        m,
        err_t: l2_distance(&slow, &reduced)?,
        max_hidden_amp: full.max_hidden,
        initial_hidden_amp,
        norm_fluct: full.norm_fluct,
        h_drift: full.h_drift,
        separation_ratio,
        reduced_self_check: l2_distance(&reduced, &fine)?,
        wall_time_s: start.elapsed().as_secs_f64(),
    })
}

/// Runs the full system from the adiabatic lift and the reduced system from
/// the slow state, for every mass, up to the same time `t_final`.
///
/// Cells run in parallel; rows come back in `m_list` order.
pub fn adiabatic_convergence_study<T: Real>(
    scenario: &Scenario<T>,
    m_list: &[T],
    t_final: T,
    opts: &StudyOptions<T>,
) -> Result<StudyTable<T>> {
    if m_list.len() < 3 {
        return Err(Error::InvalidParameter("a convergence study needs at least 3 masses".into()));
    }
    if m_list.windows(2).any(|w| w[0].partial_cmp(&w[1]) != Some(std::cmp::Ordering::Less)) {
        return Err(Error::InvalidParameter("masses must be strictly ascending".into()));
    }
    if !(t_final.is_finite() && t_final > T::zero()) {
        return Err(Error::InvalidParameter(format!("study time must be positive, got {t_final}")));
    }
    let m_max = m_list[m_list.len() - 1];
    let reduced_dt = opts
        .reduced_dt
        .unwrap_or(opts.full_dt_scale / (T::lit(4.0) * m_max));
    let rows = m_list
        .par_iter()
        .map(|&m| study_cell(scenario, m, t_final, reduced_dt, opts))
        .collect::<Result<Vec<_>>>()?;

    let min_err = rows.iter().map(|r| r.err_t).fold(T::infinity(), T::min);
    let worst_check = rows.iter().map(|r| r.reduced_self_check).fold(T::zero(), T::max);
    if worst_check > T::lit(0.01) * min_err {
        log::warn!("reduced reference self-check {worst_check:e} exceeds 1% of the smallest error {min_err:e}");
    }
    let ms: Vec<T> = rows.iter().map(|r| r.m).collect();
    let errs: Vec<T> = rows.iter().map(|r| r.err_t).collect();
    let fl: Vec<T> = rows.iter().map(|r| r.norm_fluct).collect();
    Ok(StudyTable {
        err_fit: measured_order(&ms, &errs).ok(),
        norm_fit: measured_order(&ms, &fl).ok(),
        rows,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct TransientReport<T> {
    pub m: T,
    /// Angular frequency of the hidden-energy oscillation from zero crossings.
    pub frequency: T,
    pub crossings: usize,
    pub initial_hidden_energy: T,
    /// Peak-to-peak hidden energy after a cold start.
    pub cold_amplitude: T,
    /// Peak-to-peak hidden energy from the adiabatic lift.
    pub adiabatic_amplitude: T,
    /// `adiabatic_amplitude / cold_amplitude`
    pub amplitude_ratio: T,
    /// Distance between the fast-period averages of the cold-start slow state
    /// and the reduced solution over the last period `2π/m`.
    pub averaged_distance: T,
    pub h_drift: T,
    pub times: Vec<T>,
    pub hidden_energy: Vec<T>,
}

/// Angular frequency of a sampled oscillation from mean-subtracted zero crossings.
pub fn zero_crossing_frequency<T: Real>(times: &[T], signal: &[T]) -> Option<(T, usize)> {
    if times.len() != signal.len() || signal.len() < 3 {
        return None;
    }
    let mean = signal.iter().copied().sum::<T>() / T::from_usize_lossy(signal.len());
    let mut crossings = Vec::new();
    for i in 1..signal.len() {
        let (a, b) = (signal[i - 1] - mean, signal[i] - mean);
        if (a < T::zero()) != (b < T::zero()) {
            crossings.push(times[i - 1] + (times[i] - times[i - 1]) * a / (a - b));
        }
    }
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    let f = T::PI() * T::from_usize_lossy(crossings.len() - 1) / span;
    Some((f, crossings.len()))
}

/// Full system started with all hidden fields zero, compared with the
/// adiabatic start and the reduced solution. `dt` defaults to `0.01 / m`.
pub fn cold_start_transient<T: Real>(
    scenario: &Scenario<T>,
    m: T,
    t_final: T,
    dt: Option<T>,
    tolerance: T,
) -> Result<TransientReport<T>> {
    let mass = Mass::new(m)?;
    let v = build_potential(&scenario.potential, &scenario.grid, mass)?;
    let r0 = &scenario.initial;
    let (steps, dt) = crate::dynamics::step_plan(t_final, dt.unwrap_or(T::lit(0.01) / m));
    let cfg = IntegratorConfig::new(dt, Scheme::FullImplicitMidpoint).with_tolerance(tolerance);

    let window = ((T::TAU() / m) / dt).ceil().to_usize().unwrap_or(1).clamp(1, steps.max(1));
    let grid = &scenario.grid;
    let mut times = Vec::with_capacity(steps + 1);
    let mut energy = Vec::with_capacity(steps + 1);
    let mut avg = ReducedState::zeros(grid);
    let cold = run_full(FullState::cold(r0), mass, &v, cfg, steps, |k, s| {
        times.push(T::from_usize_lossy(k) * dt);
        energy.push(hidden_energy(s, mass));
        if k + window > steps {
            avg.p.axpy(T::one(), &s.p);
            avg.q.axpy(T::one(), &s.q);
        }
    })?;
    let mut adiabatic_energy = Vec::with_capacity(steps + 1);
    run_full(adiabatic_lift(r0, mass), mass, &v, cfg, steps, |_, s| {
        adiabatic_energy.push(hidden_energy(s, mass));
    })?;

    let mut reduced_avg = ReducedState::zeros(grid);
    {
        let mut stepper = ReducedStepper::new(grid, mass, &v, IntegratorConfig { scheme: Scheme::ReducedCrankNicolson, ..cfg })?;
        let mut p = r0.p.values().to_vec();
        let mut q = r0.q.values().to_vec();
        for k in 0..=steps {
            if k > 0 {
                stepper.step(&mut p, &mut q)?;
            }
            if k + window > steps {
                crate::scalar::axpy(T::one(), &p, reduced_avg.p.values_mut());
                crate::scalar::axpy(T::one(), &q, reduced_avg.q.values_mut());
            }
        }
    }
    let inv = T::one() / T::from_usize_lossy(window.min(steps + 1));
    let averaged_distance = l2_distance(&avg.scaled(inv), &reduced_avg.scaled(inv))?;

    let p2p = |xs: &[T]| {
        let hi = xs.iter().copied().fold(T::neg_infinity(), T::max);
        let lo = xs.iter().copied().fold(T::infinity(), T::min);
        hi - lo
    };
    let cold_amplitude = p2p(&energy);
    let adiabatic_amplitude = p2p(&adiabatic_energy);
    let (frequency, crossings) = zero_crossing_frequency(&times, &energy).unwrap_or((T::nan(), 0));
    Ok(TransientReport {
        m,
        frequency,
        crossings,
        initial_hidden_energy: energy[0],
        cold_amplitude,
        adiabatic_amplitude,
        amplitude_ratio: adiabatic_amplitude / cold_amplitude,
        averaged_distance,
        h_drift: cold.h_drift,
        times,
        hidden_energy: energy,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Boundary;

    #[test]
    fn exact_power_laws() {
        let ms = [10.0_f64, 20.0, 40.0, 80.0];
        let e1: Vec<f64> = ms.iter().map(|m| 3.0 / m).collect();
        let e2: Vec<f64> = ms.iter().map(|m| 0.5 / (m * m)).collect();
        let f1 = measured_order(&ms, &e1).unwrap();
        let f2 = measured_order(&ms, &e2).unwrap();
        assert!((f1.order - 1.0).abs() < 1e-10 && (f1.r_squared - 1.0).abs() < 1e-10);
        assert!((f2.order - 2.0).abs() < 1e-10);
    }

    #[test]
    fn degenerate_fits_rejected() {
        assert!(measured_order(&[1.0, 2.0], &[1.0, 0.5]).is_err());
        assert!(measured_order(&[1.0, 2.0, 3.0], &[1.0, 0.0, 0.5]).is_err());
        assert!(measured_order(&[2.0, 2.0, 2.0], &[1.0, 0.5, 0.2]).is_err());
    }

    #[test]
    fn frequency_of_a_cosine() {
        let times: Vec<f64> = (0..4000).map(|k| k as f64 * 1e-3).collect();
        let sig: Vec<f64> = times.iter().map(|t| 1.0 - (37.0 * t).cos()).collect();
        let (f, n) = zero_crossing_frequency(&times, &sig).unwrap();
        assert!(n > 10);
        assert!((f / 37.0 - 1.0).abs() < 5e-3, "{f}");
    }

    #[test]
    fn uniform_state_has_zero_error() {
        let g = Grid::line(0.0_f64, 1.0, 16, Boundary::Periodic).unwrap();
        let scenario = Scenario {
            grid: g.clone(),
            potential: PotentialSpec::Free,
            initial: ReducedState::uniform(&g, 0.3, 0.8),
        };
        let opts = StudyOptions {
            full_dt_scale: 1.0,
            ..StudyOptions::default()
        };
        let table = adiabatic_convergence_study(&scenario, &[5.0, 10.0, 20.0], 0.5, &opts).unwrap();
        for r in &table.rows {
            assert!(r.err_t < 1e-13, "{}", r.err_t);
            assert_eq!(r.initial_hidden_amp, 0.0);
        }
        assert!(table.err_fit.is_none());
        let csv = table.to_csv(false);
        assert_eq!(csv.lines().count(), 4);
        assert!(csv.starts_with("m,err_T,fitted_order,max_hidden_amp,norm_fluct,H_drift,separation_ratio,wall_time_s\n"));
    }

    #[test]
    fn cold_start_begins_at_zero_hidden_energy() {
        let g = Grid::line(-4.0_f64, 4.0, 32, Boundary::Dirichlet).unwrap();
        let initial = crate::fields::gaussian_packet(&g, &[0.0], 0.5, &[0.0]).unwrap();
        let scenario = Scenario {
            grid: g,
            potential: PotentialSpec::Free,
            initial,
        };
        let rep = cold_start_transient(&scenario, 20.0, 1.0, Some(2e-3), 1e-12).unwrap();
        assert_eq!(rep.initial_hidden_energy, 0.0);
        assert!((rep.frequency / 20.0 - 1.0).abs() < 0.05, "{}", rep.frequency);
        assert!(rep.amplitude_ratio < 1.0);
    }
}
