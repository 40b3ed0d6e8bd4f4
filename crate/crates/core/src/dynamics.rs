//! Time integration of the full field system and of its reduced slow sector.
//!
//! The full system is advanced with the implicit midpoint rule, which for a
//! linear Hamiltonian vector field is the Cayley transform of the generator
//! and conserves every quadratic invariant. The reduced system uses
//! Crank–Nicolson in Cayley form, written entirely in the real `(p, q)`
//! representation. Both linear solves are matrix-free.

use crate::error::{Error, Result};
use crate::fields::{adiabatic_lift, project, FullLayout, FullState, Mass, ReducedState};
use crate::grid::{Grid, Location, ScalarField};
use crate::linalg::{conjugate_gradient, gmres, SolveStats};
use crate::observables;
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Scheme {
    FullImplicitMidpoint,
    ReducedCrankNicolson,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IntegratorConfig<T> {
    pub dt: T,
    pub scheme: Scheme,
    /// Relative residual at which the linear solve stops.
    pub tolerance: T,
    pub max_iterations: usize,
}

impl<T: Real> IntegratorConfig<T> {
    pub fn new(dt: T, scheme: Scheme) -> Self {
        IntegratorConfig {
            dt,
            scheme,
            tolerance: T::lit(1e-12),
            max_iterations: 10_000,
        }
    }

    pub fn with_tolerance(mut self, tolerance: T) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn with_dt(mut self, dt: T) -> Self {
        self.dt = dt;
        self
    }

    /// Checks the step-level contract; negative `dt` is allowed for time reversal.
    pub fn validate(&self) -> Result<()> {
        if !self.dt.is_finite() || self.dt == T::zero() {
            return Err(Error::InvalidParameter(format!("time step must be finite and non-zero, got {}", self.dt)));
        }
        if !(self.tolerance > T::zero() && self.tolerance <= T::lit(1e-6)) {
            return Err(Error::InvalidParameter(format!(
                "solver tolerance must lie in (0, 1e-6], got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter("max_iterations must be positive".into()));
        }
        Ok(())
    }
}

fn check_potential<T: Real>(grid: &Grid<T>, v: &ScalarField<T>) -> Result<()> {
    if v.grid() != grid || v.loc() != Location::Node {
        return Err(Error::GridMismatch);
    }
    Ok(())
}

/// Applies the generator of the full linear system on the flat layout.
#[derive(Clone, Debug)]
pub struct FullGenerator<T> {
    grid: Grid<T>,
    layout: FullLayout,
    mass: T,
    potential: Vec<T>,
}

impl<T: Real> FullGenerator<T> {
    pub fn new(grid: &Grid<T>, m: Mass<T>, v: &ScalarField<T>) -> Result<Self> {
        check_potential(grid, v)?;
        Ok(FullGenerator {
            grid: grid.clone(),
            layout: FullLayout::new(grid),
            mass: m.value(),
            potential: v.values().to_vec(),
        })
    }

    pub fn layout(&self) -> &FullLayout {
        &self.layout
    }

    /// `y = L x`
    pub fn apply(&self, x: &[T], y: &mut [T]) {
        let g = &self.grid;
        let l = &self.layout;
        let half = T::lit(0.5);
        let m = self.mass;
        let (xp, xq) = (&x[l.p()], &x[l.q()]);
        {
            let yp = &mut y[l.p()];
            for ((yi, &vi), &qi) in yp.iter_mut().zip(&self.potential).zip(xq) {
                *yi = -vi * qi;
            }
            for j in 0..g.dim() {
                g.div_acc(j, -half, &x[l.hidden(0, j)], yp);
                g.div_acc(j, -half, &x[l.hidden(2, j)], yp);
            }
        }
        {
            let yq = &mut y[l.q()];
            for ((yi, &vi), &pi) in yq.iter_mut().zip(&self.potential).zip(xp) {
                *yi = vi * pi;
            }
            for j in 0..g.dim() {
                g.div_acc(j, -half, &x[l.hidden(1, j)], yq);
                g.div_acc(j, -half, &x[l.hidden(3, j)], yq);
            }
        }
        for j in 0..g.dim() {
            // (momentum family, its conjugate coordinate family)
            for (mom, coord) in [(0, 1), (2, 3)] {
                let ym = &mut y[l.hidden(mom, j)];
                for (yi, &ci) in ym.iter_mut().zip(&x[l.hidden(coord, j)]) {
                    *yi = m * ci;
                }
                g.grad_acc(j, -half, xp, ym);
                let yc = &mut y[l.hidden(coord, j)];
                for (yi, &pi) in yc.iter_mut().zip(&x[l.hidden(mom, j)]) {
                    *yi = -m * pi;
                }
                g.grad_acc(j, -half, xq, yc);
            }
        }
    }
}

/// Right-hand sides of all `2 + 4n` Hamilton equations.
pub fn full_rhs<T: Real>(f: &FullState<T>, m: Mass<T>, v: &ScalarField<T>) -> Result<FullState<T>> {
    let gen = FullGenerator::new(f.grid(), m, v)?;
    let x = f.to_flat();
    let mut y = vec![T::zero(); x.len()];
    gen.apply(&x, &mut y);
    FullState::from_flat(f.grid(), &y)
}

/// Implicit-midpoint stepper holding the generator and solver settings.
#[derive(Clone, Debug)]
pub struct FullStepper<T> {
    gen: FullGenerator<T>,
    cfg: IntegratorConfig<T>,
    rhs: Vec<T>,
    work: Vec<T>,
}

const GMRES_RESTART: usize = 40;

impl<T: Real> FullStepper<T> {
    pub fn new(grid: &Grid<T>, m: Mass<T>, v: &ScalarField<T>, cfg: IntegratorConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let gen = FullGenerator::new(grid, m, v)?;
        let n = gen.layout.len();
        Ok(FullStepper {
            gen,
            cfg,
            rhs: vec![T::zero(); n],
            work: vec![T::zero(); n],
        })
    }

    /// Solves `(I − dt/2 L) x⁺ = (I + dt/2 L) x` in place.
    pub fn step(&mut self, x: &mut [T]) -> Result<SolveStats> {
        let h = self.cfg.dt / T::lit(2.0);
        self.gen.apply(x, &mut self.work);
        for ((b, &xi), &lx) in self.rhs.iter_mut().zip(x.iter()).zip(&self.work) {
            *b = xi + h * lx;
        }
        // explicit Euler guess
        for (xi, &lx) in x.iter_mut().zip(&self.work) {
            *xi += self.cfg.dt * lx;
        }
        let gen = &self.gen;
        gmres(
            |u, y| {
                gen.apply(u, y);
                for (yi, &ui) in y.iter_mut().zip(u) {
                    *yi = ui - h * *yi;
                }
            },
            &self.rhs,
            x,
            self.cfg.tolerance,
            self.cfg.max_iterations,
            GMRES_RESTART,
        )
    }
}

/// One implicit-midpoint step of the full system.
pub fn full_step<T: Real>(
    f: &FullState<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<FullState<T>> {
    let mut stepper = FullStepper::new(f.grid(), m, v, *cfg)?;
    let mut x = f.to_flat();
    stepper.step(&mut x)?;
    FullState::from_flat(f.grid(), &x)
}

/// `H = −Δ/(2m) + V` acting on node samples.
#[derive(Clone, Debug)]
pub(crate) struct SlowOperator<T> {
    pub(crate) grid: Grid<T>,
    pub(crate) kinetic: T,
    pub(crate) potential: Vec<T>,
}

impl<T: Real> SlowOperator<T> {
    pub(crate) fn new(grid: &Grid<T>, kinetic: T, v: &ScalarField<T>) -> Result<Self> {
        check_potential(grid, v)?;
        Ok(SlowOperator {
            grid: grid.clone(),
            kinetic,
            potential: v.values().to_vec(),
        })
    }

    pub(crate) fn apply(&self, x: &[T], y: &mut [T]) {
        for ((yi, &xi), &vi) in y.iter_mut().zip(x).zip(&self.potential) {
            *yi = vi * xi;
        }
        self.grid.laplacian_acc(-self.kinetic, x, y);
    }
}

/// `∂_t p = −Vq + Δq/(2m)`, `∂_t q = Vp − Δp/(2m)`.
pub fn reduced_rhs<T: Real>(r: &ReducedState<T>, m: Mass<T>, v: &ScalarField<T>) -> Result<ReducedState<T>> {
    let op = SlowOperator::new(r.grid(), T::one() / (T::lit(2.0) * m.value()), v)?;
    let n = r.grid().node_count();
    let mut hp = vec![T::zero(); n];
    let mut hq = vec![T::zero(); n];
    op.apply(r.p.values(), &mut hp);
    op.apply(r.q.values(), &mut hq);
    hq.iter_mut().for_each(|x| *x = -*x);
    Ok(ReducedState {
        p: ScalarField::from_raw(r.grid(), Location::Node, hq),
        q: ScalarField::from_raw(r.grid(), Location::Node, hp),
    })
}

/// Crank–Nicolson stepper for the slow sector.
#[derive(Clone, Debug)]
pub struct ReducedStepper<T> {
    op: SlowOperator<T>,
    cfg: IntegratorConfig<T>,
    ap: Vec<T>,
    aq: Vec<T>,
    r1: Vec<T>,
    r2: Vec<T>,
    bq: Vec<T>,
    bp: Vec<T>,
    tmp: Vec<T>,
}

impl<T: Real> ReducedStepper<T> {
    pub fn new(grid: &Grid<T>, m: Mass<T>, v: &ScalarField<T>, cfg: IntegratorConfig<T>) -> Result<Self> {
        Self::with_kinetic(grid, T::one() / (T::lit(2.0) * m.value()), v, cfg)
    }

    pub(crate) fn with_kinetic(grid: &Grid<T>, kinetic: T, v: &ScalarField<T>, cfg: IntegratorConfig<T>) -> Result<Self> {
        cfg.validate()?;
        let op = SlowOperator::new(grid, kinetic, v)?;
        let n = grid.node_count();
        let z = vec![T::zero(); n];
        Ok(ReducedStepper {
            op,
            cfg,
            ap: z.clone(),
            aq: z.clone(),
            r1: z.clone(),
            r2: z.clone(),
            bq: z.clone(),
            bp: z.clone(),
            tmp: z,
        })
    }

    /// Advances `(p, q)` in place; returns the worst of the two solves.
    ///
    /// With `A = (dt/2) H`, `(I + iA) ψ⁺ = (I − iA) ψ` splits into
    /// `(I + A²) q⁺ = r₁ + A r₂` and `(I + A²) p⁺ = r₂ − A r₁`
    /// where `r₁ = q + A p`, `r₂ = p − A q`.
    pub fn step(&mut self, p: &mut [T], q: &mut [T]) -> Result<SolveStats> {
        let h = self.cfg.dt / T::lit(2.0);
        let op = &self.op;
        op.apply(p, &mut self.ap);
        op.apply(q, &mut self.aq);
        for i in 0..p.len() {
            self.ap[i] *= h;
            self.aq[i] *= h;
            self.r1[i] = q[i] + self.ap[i];
            self.r2[i] = p[i] - self.aq[i];
        }
        op.apply(&self.r2, &mut self.tmp);
        for i in 0..p.len() {
            self.bq[i] = self.r1[i] + h * self.tmp[i];
        }
        op.apply(&self.r1, &mut self.tmp);
        for i in 0..p.len() {
            self.bp[i] = self.r2[i] - h * self.tmp[i];
        }
        let mut work = vec![T::zero(); p.len()];
        let mut normal = |x: &[T], y: &mut [T]| {
            op.apply(x, &mut work);
            op.apply(&work, y);
            for (yi, &xi) in y.iter_mut().zip(x) {
                *yi = xi + h * h * *yi;
            }
        };
        let sq = conjugate_gradient(&mut normal, &self.bq, q, self.cfg.tolerance, self.cfg.max_iterations)?;
        let sp = conjugate_gradient(&mut normal, &self.bp, p, self.cfg.tolerance, self.cfg.max_iterations)?;
        Ok(if sq.residual >= sp.residual { sq } else { sp })
    }
}

/// One Crank–Nicolson step of the slow sector.
pub fn reduced_step<T: Real>(
    r: &ReducedState<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    cfg: &IntegratorConfig<T>,
) -> Result<ReducedState<T>> {
    let mut stepper = ReducedStepper::new(r.grid(), m, v, *cfg)?;
    let mut p = r.p.values().to_vec();
    let mut q = r.q.values().to_vec();
    stepper.step(&mut p, &mut q)?;
    Ok(ReducedState {
        p: ScalarField::from_raw(r.grid(), Location::Node, p),
        q: ScalarField::from_raw(r.grid(), Location::Node, q),
    })
}

/// Recommended step sizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StabilityLimit<T> {
    /// Resolves the hidden-pair oscillation at frequency `m`: `0.1 / m`.
    pub dt_fast: T,
    /// Resolves the largest slow frequency: `0.1 / max(|V|max, 2/(m dx_min²))`.
    pub dt_accuracy: T,
}

impl<T: Real> StabilityLimit<T> {
    pub fn recommended(&self, scheme: Scheme) -> T {
        match scheme {
            Scheme::FullImplicitMidpoint => self.dt_fast.min(self.dt_accuracy),
            Scheme::ReducedCrankNicolson => self.dt_accuracy,
        }
    }
}

pub fn stability_limit<T: Real>(m: Mass<T>, grid: &Grid<T>, v: &ScalarField<T>) -> StabilityLimit<T> {
    let tenth = T::lit(0.1);
    let dx = grid.min_spacing();
    let kinetic = T::lit(2.0) / (m.value() * dx * dx);
    StabilityLimit {
        dt_fast: tenth / m.value(),
        dt_accuracy: tenth / v.max_abs().max(kinetic),
    }
}

/// A state of either system.
#[derive(Clone, Debug, PartialEq)]
pub enum State<T> {
    Full(FullState<T>),
    Reduced(ReducedState<T>),
}

impl<T: Real> State<T> {
    pub fn grid(&self) -> &Grid<T> {
        match self {
            State::Full(f) => f.grid(),
            State::Reduced(r) => r.grid(),
        }
    }

    /// The slow sector `(p, q)`.
    pub fn slow(&self) -> ReducedState<T> {
        match self {
            State::Full(f) => project(f),
            State::Reduced(r) => r.clone(),
        }
    }

    pub fn to_flat(&self) -> Vec<T> {
        match self {
            State::Full(f) => f.to_flat(),
            State::Reduced(r) => r.to_flat(),
        }
    }
}

/// Observable columns, in CSV order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Observable {
    Norm,
    HFull,
    HReduced,
    HFlux,
    EExpect,
    HiddenEnergy,
    L2VsReference,
}

impl Observable {
    pub const ALL: [Observable; 7] = [
        Observable::Norm,
        Observable::HFull,
        Observable::HReduced,
        Observable::HFlux,
        Observable::EExpect,
        Observable::HiddenEnergy,
        Observable::L2VsReference,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Observable::Norm => "norm",
            Observable::HFull => "H_full",
            Observable::HReduced => "H_reduced",
            Observable::HFlux => "H_flux",
            Observable::EExpect => "E_expect",
            Observable::HiddenEnergy => "hidden_energy",
            Observable::L2VsReference => "l2_vs_reference",
        }
    }
}

/// Reference solution for the `l2_vs_reference` column.
pub enum Reference<T> {
    /// Distance to the initial slow state.
    Initial,
    /// Closed-form solution evaluated at each sample time.
    Analytic(Box<dyn Fn(T) -> ReducedState<T> + Send + Sync>),
    /// Slow-sector solution advanced alongside with Crank–Nicolson at the same step.
    Reduced,
}

impl<T> std::fmt::Debug for Reference<T> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Reference::Initial => write!(f, "Initial"),
            Reference::Analytic(_) => write!(f, "Analytic(..)"),
            Reference::Reduced => write!(f, "Reduced"),
        }
    }
}

#[derive(Debug)]
pub struct EvolveOptions<T> {
    pub observables: Vec<Observable>,
    /// Sample observables every this many steps (the final step is always sampled).
    pub observe_stride: usize,
    /// Store a state snapshot every this many steps; zero disables snapshots.
    pub snapshot_stride: usize,
    pub reference: Reference<T>,
}

impl<T> Default for EvolveOptions<T> {
    fn default() -> Self {
        EvolveOptions {
            observables: Observable::ALL.to_vec(),
            observe_stride: 1,
            snapshot_stride: 0,
            reference: Reference::Initial,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Trajectory<T> {
    pub times: Vec<T>,
    pub snapshots: Vec<(T, State<T>)>,
    pub series: Vec<(Observable, Vec<T>)>,
    pub final_state: State<T>,
    pub steps: usize,
    /// Effective step after snapping `t_final` onto a whole number of steps.
    pub dt: T,
    /// Largest iteration count any linear solve needed.
    pub max_solver_iterations: usize,
}

impl<T: Real> Trajectory<T> {
    pub fn series(&self, obs: Observable) -> Option<&[T]> {
        self.series
            .iter()
            .find(|(o, _)| *o == obs)
            .map(|(_, v)| v.as_slice())
    }
}

/// Number of steps and effective step size covering `[0, t_final]`.
pub fn step_plan<T: Real>(t_final: T, dt: T) -> (usize, T) {
    if t_final == T::zero() {
        return (0, dt);
    }
    let ratio = t_final / dt;
    let rounded = ratio.round();
    let n = if (ratio - rounded).abs() <= T::lit(1e-9) * rounded.max(T::one()) {
        rounded
    } else {
        ratio.ceil()
    };
    let n = n.to_usize().unwrap_or(usize::MAX).max(1);
    (n, t_final / T::from_usize_lossy(n))
}

fn sample<T: Real>(
    obs: &[Observable],
    state: &State<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    reference: Option<&ReducedState<T>>,
) -> Result<Vec<T>> {
    let slow = state.slow();
    let lifted;
    let full = match state {
        State::Full(f) => f,
        State::Reduced(r) => {
            lifted = adiabatic_lift(r, m);
            &lifted
        }
    };
    obs.iter()
        .map(|o| {
            Ok(match o {
                Observable::Norm => observables::norm(&slow),
                Observable::HFull => observables::hamiltonian_full(full, m, v),
                Observable::HReduced => observables::hamiltonian_reduced(&slow, m, v),
                Observable::HFlux => {
                    let rdot = reduced_rhs(&slow, m, v)?;
                    observables::hamiltonian_flux_form(&slow, &rdot)
                }
                Observable::EExpect => {
                    observables::energy_expectation(&crate::fields::to_wavefunction(&slow), m, v)
                }
                Observable::HiddenEnergy => observables::hidden_energy(full, m),
                Observable::L2VsReference => match reference {
                    Some(r) => observables::l2_distance(&slow, r)?,
                    None => T::nan(),
                },
            })
        })
        .collect()
}

enum Stepper<T> {
    Full(FullStepper<T>),
    Reduced(ReducedStepper<T>),
}

/// Advances `initial` to `t_final`, sampling observables and snapshots.
///
/// Observables of a reduced state that need hidden fields (`H_full`,
/// `hidden_energy`) are evaluated on its adiabatic lift.
pub fn evolve<T: Real>(
    initial: &State<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    cfg: &IntegratorConfig<T>,
    t_final: T,
    opts: &EvolveOptions<T>,
) -> Result<Trajectory<T>> {
    if !t_final.is_finite() || t_final < T::zero() {
        return Err(Error::InvalidParameter(format!("t_final must be non-negative, got {t_final}")));
    }
    if cfg.dt <= T::zero() {
        return Err(Error::InvalidParameter("evolve needs a positive time step".into()));
    }
    let grid = initial.grid().clone();
    let (steps, dt) = step_plan(t_final, cfg.dt);
    let cfg = cfg.with_dt(dt);

    let mut stepper = match (initial, cfg.scheme) {
        (State::Full(_), Scheme::FullImplicitMidpoint) => {
            let slow = initial.slow();
            let content = crate::spectral::frequency_content(&slow, m, v)?;
            if content > T::lit(0.1) * m.value() {
                log::warn!(
                    "slow sector frequency content {content:.4} exceeds 0.1·m = {:.4}; adiabatic reduction is not trustworthy",
                    T::lit(0.1) * m.value()
                );
            }
            Stepper::Full(FullStepper::new(&grid, m, v, cfg)?)
        }
        (State::Reduced(_), Scheme::ReducedCrankNicolson) => Stepper::Reduced(ReducedStepper::new(&grid, m, v, cfg)?),
        (State::Full(_), _) => return Err(Error::SchemeMismatch("full state with reduced scheme".into())),
        (State::Reduced(_), _) => return Err(Error::SchemeMismatch("reduced state with full scheme".into())),
    };

    let initial_slow = initial.slow();
    let mut coevolved = match opts.reference {
        Reference::Reduced => Some((
            ReducedStepper::new(&grid, m, v, cfg.with_dt(dt).with_tolerance(cfg.tolerance))?,
            initial_slow.p.values().to_vec(),
            initial_slow.q.values().to_vec(),
        )),
        _ => None,
    };
    let reference_at = |t: T, co: &Option<(ReducedStepper<T>, Vec<T>, Vec<T>)>| -> Option<ReducedState<T>> {
        match &opts.reference {
            Reference::Initial => Some(initial_slow.clone()),
            Reference::Analytic(f) => Some(f(t)),
            Reference::Reduced => co.as_ref().map(|(_, p, q)| ReducedState {
                p: ScalarField::from_raw(&grid, Location::Node, p.clone()),
                q: ScalarField::from_raw(&grid, Location::Node, q.clone()),
            }),
        }
    };

    let mut times = Vec::new();
    let mut columns: Vec<Vec<T>> = vec![Vec::new(); opts.observables.len()];
    let mut snapshots = Vec::new();
    let stride = opts.observe_stride.max(1);
    let needs_reference = opts.observables.contains(&Observable::L2VsReference);

    let mut record = |k: usize, state: &State<T>, co: &Option<(ReducedStepper<T>, Vec<T>, Vec<T>)>| -> Result<()> {
        let t = T::from_usize_lossy(k) * dt;
        let reference = if needs_reference { reference_at(t, co) } else { None };
        let row = sample(&opts.observables, state, m, v, reference.as_ref())?;
        times.push(t);
        for (c, x) in columns.iter_mut().zip(row) {
            c.push(x);
        }
        Ok(())
    };

    let mut flat = initial.to_flat();
    let mut state = initial.clone();
    record(0, &state, &coevolved)?;
    if opts.snapshot_stride > 0 {
        snapshots.push((T::zero(), state.clone()));
    }
    let mut max_iters = 0;
    let n = grid.node_count();
    for k in 1..=steps {
        let stats = match &mut stepper {
            Stepper::Full(s) => s.step(&mut flat)?,
            Stepper::Reduced(s) => {
                let (p, q) = flat.split_at_mut(n);
                s.step(p, q)?
            }
        };
        max_iters = max_iters.max(stats.iterations);
        if let Some((s, p, q)) = coevolved.as_mut() {
            s.step(p, q)?;
        }
        if let Some(i) = flat.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite(format!(
                "state component {i} after step {k} (t = {})",
                T::from_usize_lossy(k) * dt
            )));
        }
        let sample_now = k % stride == 0 || k == steps;
        let snap_now = opts.snapshot_stride > 0 && (k % opts.snapshot_stride == 0 || k == steps);
        if sample_now || snap_now || k == steps {
            state = match initial {
                State::Full(_) => State::Full(FullState::from_flat(&grid, &flat)?),
                State::Reduced(_) => State::Reduced(ReducedState::from_flat(&grid, &flat)?),
            };
        }
        if sample_now {
            record(k, &state, &coevolved)?;
        }
        if snap_now {
            snapshots.push((T::from_usize_lossy(k) * dt, state.clone()));
        }
    }
    Ok(Trajectory {
        times,
        snapshots,
        series: opts.observables.iter().copied().zip(columns).collect(),
        final_state: state,
        steps,
        dt,
        max_solver_iterations: max_iters,
    })
}
