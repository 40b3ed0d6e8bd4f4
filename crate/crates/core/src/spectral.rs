//! Normal modes of the slow sector: the eigenproblem `E ψ = (V − ∂²/(2m)) ψ`
//! and checks that eigenmodes rotate rigidly in the `(q, p)` plane.

use crate::dynamics::{IntegratorConfig, ReducedStepper, Scheme, SlowOperator};
use crate::error::{Error, Result};
use crate::fields::{Mass, ReducedState};
use crate::grid::{Grid, Location, ScalarField};
use crate::linalg::{conjugate_gradient, lanczos_lowest, symmetric_eigen, LanczosOptions};
use crate::observables::{hamiltonian_reduced, l2_distance, norm};
use crate::scalar::{axpy, dot, scale, Real};

/// Node count up to which [`lowest_eigenpairs`] uses the dense solver.
pub const DENSE_LIMIT: usize = 1024;

/// Matrix-free `H f = −κ Δf + V f` with `κ = 1/(2m)` in natural units.
#[derive(Clone, Debug)]
pub struct HamiltonianOperator<T> {
    inner: SlowOperator<T>,
    potential: ScalarField<T>,
}

impl<T: Real> HamiltonianOperator<T> {
    /// Operator with an explicit kinetic prefactor `κ` (e.g. `h²/(2M)` in MKS units).
    pub fn with_kinetic(grid: &Grid<T>, kinetic: T, v: &ScalarField<T>) -> Result<Self> {
        if !(kinetic.is_finite() && kinetic > T::zero()) {
            return Err(Error::InvalidParameter(format!("kinetic prefactor must be positive, got {kinetic}")));
        }
        Ok(HamiltonianOperator {
            inner: SlowOperator::new(grid, kinetic, v)?,
            potential: v.clone(),
        })
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.inner.grid
    }

    pub fn kinetic(&self) -> T {
        self.inner.kinetic
    }

    pub fn potential(&self) -> &ScalarField<T> {
        &self.potential
    }

    pub fn size(&self) -> usize {
        self.grid().node_count()
    }

    pub fn apply_slice(&self, x: &[T], y: &mut [T]) {
        self.inner.apply(x, y)
    }

    pub fn apply(&self, f: &ScalarField<T>) -> ScalarField<T> {
        assert_eq!(f.loc(), Location::Node);
        let mut out = ScalarField::zeros(self.grid(), Location::Node);
        self.inner.apply(f.values(), out.values_mut());
        out
    }

    /// Dense row-major matrix assembled column by column from the stencil.
    pub fn dense_matrix(&self) -> Vec<T> {
        let n = self.size();
        let mut a = vec![T::zero(); n * n];
        let mut e = vec![T::zero(); n];
        let mut col = vec![T::zero(); n];
        for j in 0..n {
            e[j] = T::one();
            self.inner.apply(&e, &mut col);
            for i in 0..n {
                a[i * n + j] = col[i];
            }
            e[j] = T::zero();
        }
        a
    }
}

pub fn build_operator<T: Real>(grid: &Grid<T>, m: Mass<T>, v: &ScalarField<T>) -> Result<HamiltonianOperator<T>> {
    HamiltonianOperator::with_kinetic(grid, T::one() / (T::lit(2.0) * m.value()), v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair<T> {
    pub energy: T,
    /// Normalised so that `inner(mode, mode) = 1`; largest-magnitude sample positive.
    pub mode: ScalarField<T>,
    /// `‖(H − E) mode‖` in the grid norm.
    pub residual: T,
}

#[derive(Clone, Debug)]
pub enum EigenMethod {
    /// Dense up to [`DENSE_LIMIT`] nodes, shift-invert Lanczos above.
    Auto,
    Dense,
    Lanczos(LanczosOptions),
}

/// The `k` lowest eigenpairs, ascending.
pub fn lowest_eigenpairs<T: Real>(op: &HamiltonianOperator<T>, k: usize, tol: T) -> Result<Vec<EigenPair<T>>> {
    lowest_eigenpairs_with(op, k, tol, &EigenMethod::Auto)
}

pub fn lowest_eigenpairs_with<T: Real>(
    op: &HamiltonianOperator<T>,
    k: usize,
    tol: T,
    method: &EigenMethod,
) -> Result<Vec<EigenPair<T>>> {
    let n = op.size();
    if k == 0 || k > n {
        return Err(Error::InvalidParameter(format!("eigenpair count must be in 1..={n}, got {k}")));
    }
    let (values, vectors) = match method {
        EigenMethod::Dense => dense(op, k)?,
        EigenMethod::Auto if n <= DENSE_LIMIT => dense(op, k)?,
        EigenMethod::Auto => shift_invert(op, k, tol, &LanczosOptions::default())?,
        EigenMethod::Lanczos(opts) => shift_invert(op, k, tol, opts)?,
    };
    let mut vectors = vectors;
    orthonormalize_blocks(&values, &mut vectors, T::lit(1e-9));

    let w = op.grid().cell_volume();
    let inv_sqrt_w = T::one() / w.sqrt();
    let mut out = Vec::with_capacity(k);
    let mut hv = vec![T::zero(); n];
    // Rayleigh quotients are accurate to O(ε E) rather than the solver's O(ε ‖H‖).
    for mut v in vectors {
        fix_sign(&mut v);
        scale(inv_sqrt_w, &mut v);
        op.apply_slice(&v, &mut hv);
        let energy = dot(&v, &hv) / dot(&v, &v);
        axpy(-energy, &v, &mut hv);
        let residual = (dot(&hv, &hv) * w).sqrt();
        out.push(EigenPair {
            energy,
            mode: ScalarField::from_raw(op.grid(), Location::Node, v),
            residual,
        });
    }
    out.sort_by(|a, b| a.energy.partial_cmp(&b.energy).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Lanczos on `−(H − σ)⁻¹` with `σ = min V − 1`, so `H − σ ≥ 1` and CG applies.
/// The lowest levels of `H` become the best separated extremes of the
/// inverse. Energies are Rayleigh quotients of `H` itself.
fn shift_invert<T: Real>(
    op: &HamiltonianOperator<T>,
    k: usize,
    tol: T,
    opts: &LanczosOptions,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = op.size();
    let vmin = op.potential().values().iter().copied().fold(T::infinity(), T::min);
    let sigma = vmin - T::one();
    let inner_tol = (tol * T::lit(1e-2)).max(T::lit(1e-14));
    let mut failure = None;
    let vectors = {
        let mut shifted = |x: &[T], y: &mut [T]| {
            op.apply_slice(x, y);
            axpy(-sigma, x, y);
        };
        let (_, vectors) = lanczos_lowest(
            n,
            k,
            |x, y| {
                y.iter_mut().for_each(|v| *v = T::zero());
                if failure.is_none() {
                    if let Err(e) = conjugate_gradient(&mut shifted, x, y, inner_tol, 20 * n + 100) {
                        failure = Some(e);
                    }
                }
                y.iter_mut().for_each(|v| *v = -*v);
            },
            tol,
            opts,
        )?;
        vectors
    };
    if let Some(e) = failure {
        return Err(e);
    }
    let mut hv = vec![T::zero(); n];
    let mut pairs: Vec<(T, Vec<T>)> = vectors
        .into_iter()
        .map(|v| {
            op.apply_slice(&v, &mut hv);
            (dot(&v, &hv) / dot(&v, &v), v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(pairs.into_iter().unzip())
}

fn dense<T: Real>(op: &HamiltonianOperator<T>, k: usize) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = op.size();
    let (mut values, mut vectors) = symmetric_eigen(n, &op.dense_matrix())?;
    values.truncate(k);
    vectors.truncate(k);
    Ok((values, vectors))
}

// Modified Gram–Schmidt inside each run of eigenvalues closer than `gap`.
fn orthonormalize_blocks<T: Real>(values: &[T], vectors: &mut [Vec<T>], gap: T) {
    let mut start = 0;
    while start < values.len() {
        let mut end = start + 1;
        while end < values.len() && (values[end] - values[end - 1]).abs() <= gap * (T::one() + values[end].abs()) {
            end += 1;
        }
        for i in start..end {
            let (done, rest) = vectors.split_at_mut(i);
            let v = &mut rest[0];
            for u in &done[start..i] {
                let c = dot(v, u);
                axpy(-c, u, v);
            }
            let nv = dot(v, v).sqrt();
            scale(T::one() / nv, v);
        }
        start = end;
    }
}

fn fix_sign<T: Real>(v: &mut [T]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < T::zero() {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Frobenius distance between the orthogonal projectors spanned by two mode sets.
///
/// Used to compare degenerate blocks where individual vectors are arbitrary.
pub fn projector_distance<T: Real>(a: &[EigenPair<T>], b: &[EigenPair<T>]) -> T {
    // ‖P_a − P_b‖_F² = k_a + k_b − 2 Σ (a_i·b_j)²
    let gram: T = a
        .iter()
        .flat_map(|x| {
            b.iter().map(move |y| {
                let w = x.mode.grid().cell_volume();
                let d = dot(x.mode.values(), y.mode.values()) * w;
                d * d
            })
        })
        .sum();
    let total = T::from_usize_lossy(a.len() + b.len()) - T::lit(2.0) * gram;
    total.max(T::zero()).sqrt()
}

/// `q = √2 cos θ · mode`, `p = √2 sin θ · mode`, so the state has unit norm.
pub fn normal_mode_state<T: Real>(pair: &EigenPair<T>, theta: T) -> ReducedState<T> {
    let s = T::SQRT_2();
    ReducedState {
        q: pair.mode.scaled(s * theta.cos()),
        p: pair.mode.scaled(s * theta.sin()),
    }
}

/// Rigid rotation of a state by angle `E t`: `q(t) = q₀ cos Et + p₀ sin Et`, `p(t) = p₀ cos Et − q₀ sin Et`.
pub fn rotate<T: Real>(r: &ReducedState<T>, angle: T) -> ReducedState<T> {
    let (s, c) = angle.sin_cos();
    ReducedState {
        q: r.q.scaled(c).combined(s, &r.p),
        p: r.p.scaled(c).combined(-s, &r.q),
    }
}

trait Combine<T> {
    fn combined(self, alpha: T, other: &Self) -> Self;
}

impl<T: Real> Combine<T> for ScalarField<T> {
    fn combined(mut self, alpha: T, other: &Self) -> Self {
        self.axpy(alpha, other);
        self
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EffectiveHamiltonianReport<T> {
    /// `|H_reduced(mode state) − E · norm(mode state)|`
    pub energy_residual: T,
    /// Largest `|θ_numerical(t) − E t|` over one period, radians.
    pub max_phase_error: T,
    /// Largest distance to the analytic rotation over one period.
    pub max_rotation_distance: T,
    /// Distance between the state after one period and the initial state.
    pub return_distance: T,
    /// Largest relative change of `H_reduced` along the trajectory.
    pub max_energy_drift: T,
    pub period: T,
}

fn wrap_angle<T: Real>(a: T) -> T {
    let two_pi = T::TAU();
    let mut x = a % two_pi;
    if x > T::PI() {
        x -= two_pi;
    } else if x <= -T::PI() {
        x += two_pi;
    }
    x
}

/// Evolves the θ = 0 mode state for one period `2π/E` with Crank–Nicolson and
/// compares against the rigid rotation.
pub fn verify_effective_hamiltonian<T: Real>(
    pair: &EigenPair<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    steps_per_period: usize,
    tolerance: T,
) -> Result<EffectiveHamiltonianReport<T>> {
    let e = pair.energy;
    if e == T::zero() || !e.is_finite() {
        return Err(Error::InvalidParameter("rotation check needs a non-zero eigenvalue".into()));
    }
    let steps = steps_per_period.max(1);
    let period = T::TAU() / e.abs();
    let dt = period / T::from_usize_lossy(steps);
    let grid = pair.mode.grid();
    let r0 = normal_mode_state(pair, T::zero());
    let h0 = hamiltonian_reduced(&r0, m, v);
    let energy_residual = (h0 - e * norm(&r0)).abs();

    let cfg = IntegratorConfig::new(dt, Scheme::ReducedCrankNicolson).with_tolerance(tolerance);
    let mut stepper = ReducedStepper::new(grid, m, v, cfg)?;
    let mut p = r0.p.values().to_vec();
    let mut q = r0.q.values().to_vec();
    let w = grid.cell_volume();
    let mode = pair.mode.values();
    let mut max_phase = T::zero();
    let mut max_dist = T::zero();
    let mut max_drift = T::zero();
    let mut state = r0.clone();
    for k in 1..=steps {
        stepper.step(&mut p, &mut q)?;
        let t = T::from_usize_lossy(k) * dt;
        let cq = dot(&q, mode) * w;
        let cp = dot(&p, mode) * w;
        let theta = (-cp).atan2(cq);
        max_phase = max_phase.max(wrap_angle(theta - e * t).abs());
        state = ReducedState {
            p: ScalarField::from_raw(grid, Location::Node, p.clone()),
            q: ScalarField::from_raw(grid, Location::Node, q.clone()),
        };
        let exact = rotate(&r0, e * t);
        max_dist = max_dist.max(l2_distance(&state, &exact)?);
        let h = hamiltonian_reduced(&state, m, v);
        max_drift = max_drift.max(((h - h0) / h0).abs());
    }
    Ok(EffectiveHamiltonianReport {
        energy_residual,
        max_phase_error: max_phase,
        max_rotation_distance: max_dist,
        return_distance: l2_distance(&state, &r0)?,
        max_energy_drift: max_drift,
        period,
    })
}

/// Rotation period measured from zero crossings of `inner(q(t), mode)`.
pub fn rotation_period<T: Real>(
    pair: &EigenPair<T>,
    m: Mass<T>,
    v: &ScalarField<T>,
    dt: T,
    t_span: T,
) -> Result<T> {
    let grid = pair.mode.grid();
    let r0 = normal_mode_state(pair, T::zero());
    let cfg = IntegratorConfig::new(dt, Scheme::ReducedCrankNicolson);
    let mut stepper = ReducedStepper::new(grid, m, v, cfg)?;
    let mut p = r0.p.values().to_vec();
    let mut q = r0.q.values().to_vec();
    let mode = pair.mode.values();
    let (steps, dt) = crate::dynamics::step_plan(t_span, dt);
    let mut prev = dot(&q, mode);
    let mut crossings = Vec::new();
    for k in 1..=steps {
        stepper.step(&mut p, &mut q)?;
        let c = dot(&q, mode);
        if (prev < T::zero()) != (c < T::zero()) {
            let t1 = T::from_usize_lossy(k) * dt;
            crossings.push(t1 - dt * c / (c - prev));
        }
        prev = c;
    }
    zero_crossing_period(&crossings)
        .ok_or_else(|| Error::InvalidParameter("fewer than two zero crossings in the sampled span".into()))
}

/// Twice the mean spacing between successive zero crossings.
pub fn zero_crossing_period<T: Real>(crossings: &[T]) -> Option<T> {
    if crossings.len() < 2 {
        return None;
    }
    let span = crossings[crossings.len() - 1] - crossings[0];
    Some(T::lit(2.0) * span / T::from_usize_lossy(crossings.len() - 1))
}

/// Characteristic slow frequency `|⟨H⟩| + 3 ΔH` of a state (natural units).
pub fn frequency_content<T: Real>(r: &ReducedState<T>, m: Mass<T>, v: &ScalarField<T>) -> Result<T> {
    let op = build_operator(r.grid(), m, v)?;
    let n = r.grid().node_count();
    let mut hq = vec![T::zero(); n];
    let mut hp = vec![T::zero(); n];
    op.apply_slice(r.q.values(), &mut hq);
    op.apply_slice(r.p.values(), &mut hp);
    let (p, q) = (r.p.values(), r.q.values());
    let n0 = dot(p, p) + dot(q, q);
    if n0 == T::zero() {
        return Ok(T::zero());
    }
    let e1 = (dot(q, &hq) + dot(p, &hp)) / n0;
    let e2 = (dot(&hq, &hq) + dot(&hp, &hp)) / n0;
    let sigma = (e2 - e1 * e1).max(T::zero()).sqrt();
    Ok(e1.abs() + T::lit(3.0) * sigma)
}
