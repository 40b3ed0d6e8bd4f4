//! Canonical state containers, the ψ ↔ (p, q) map, potentials and initial data.

use crate::error::{Error, Result};
use crate::grid::{Boundary, Grid, Location, ScalarField, VectorField};
use crate::scalar::Real;
use num_complex::Complex;

/// The large-variable pair `(p, q)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedState<T> {
    pub p: ScalarField<T>,
    pub q: ScalarField<T>,
}

/// One hidden canonical pair: `(P_j, Q_j)` or `(π_j, η_j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenPair<T> {
    /// `P_j` (or `π_j`).
    pub momentum: VectorField<T>,
    /// `Q_j` (or `η_j`).
    pub coordinate: VectorField<T>,
}

/// All `1 + 2n` canonical pairs.
#[derive(Clone, Debug, PartialEq)]
pub struct FullState<T> {
    pub p: ScalarField<T>,
    pub q: ScalarField<T>,
    /// `(P_j, Q_j)`
    pub first: HiddenPair<T>,
    /// `(π_j, η_j)`
    pub second: HiddenPair<T>,
}

/// Complex wave function stored as real and imaginary node fields.
#[derive(Clone, Debug, PartialEq)]
pub struct WaveFunction<T> {
    pub re: ScalarField<T>,
    pub im: ScalarField<T>,
}

/// Mass parameter `m > 0`; also the fast oscillation frequency of the hidden pairs.
#[derive(Clone, Copy, Debug, PartialEq, PartialOrd)]
pub struct Mass<T>(T);

impl<T: Real> Mass<T> {
    pub fn new(m: T) -> Result<Self> {
        if m.is_finite() && m > T::zero() {
            Ok(Mass(m))
        } else {
            Err(Error::InvalidParameter(format!("mass must be positive and finite, got {m}")))
        }
    }

    pub fn value(self) -> T {
        self.0
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec<T> {
    Free,
    /// `½ m ω² |x − x_c|²` centred on the domain midpoint.
    HarmonicOscillator { omega: T },
    /// `½ k |x − x_c|²` centred on the domain midpoint, independent of `m`.
    Quadratic { stiffness: T },
    /// Particle in a box: zero potential on a Dirichlet grid.
    Box,
    /// `h · exp(−|x − c|² / (2 w²))`
    GaussianBarrier { height: T, center: Vec<T>, width: T },
    Tabulated(Vec<T>),
}

impl<T: Real> ReducedState<T> {
    pub fn new(p: ScalarField<T>, q: ScalarField<T>) -> Result<Self> {
        if !p.compatible(&q) || p.loc() != Location::Node {
            return Err(Error::GridMismatch);
        }
        Ok(ReducedState { p, q })
    }

    pub fn zeros(grid: &Grid<T>) -> Self {
        ReducedState {
            p: ScalarField::zeros(grid, Location::Node),
            q: ScalarField::zeros(grid, Location::Node),
        }
    }

    pub fn uniform(grid: &Grid<T>, p: T, q: T) -> Self {
        ReducedState {
            p: ScalarField::constant(grid, p),
            q: ScalarField::constant(grid, q),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.p.grid()
    }

    pub fn scaled(&self, alpha: T) -> Self {
        ReducedState {
            p: self.p.scaled(alpha),
            q: self.q.scaled(alpha),
        }
    }

    /// `alpha * self + beta * other`
    pub fn combine(&self, alpha: T, other: &Self, beta: T) -> Self {
        let mut out = self.scaled(alpha);
        out.p.axpy(beta, &other.p);
        out.q.axpy(beta, &other.q);
        out
    }

    pub fn is_finite(&self) -> bool {
        self.p.is_finite() && self.q.is_finite()
    }

    /// Flat layout `[p, q]`.
    pub fn to_flat(&self) -> Vec<T> {
        let mut v = Vec::with_capacity(2 * self.p.len());
        v.extend_from_slice(self.p.values());
        v.extend_from_slice(self.q.values());
        v
    }

    pub fn from_flat(grid: &Grid<T>, flat: &[T]) -> Result<Self> {
        let n = grid.node_count();
        if flat.len() != 2 * n {
            return Err(Error::LengthMismatch {
                expected: 2 * n,
                actual: flat.len(),
            });
        }
        Ok(ReducedState {
            p: ScalarField::from_raw(grid, Location::Node, flat[..n].to_vec()),
            q: ScalarField::from_raw(grid, Location::Node, flat[n..].to_vec()),
        })
    }
}

impl<T: Real> HiddenPair<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        HiddenPair {
            momentum: VectorField::zeros(grid),
            coordinate: VectorField::zeros(grid),
        }
    }

    pub fn max_abs(&self) -> T {
        self.momentum.max_abs().max(self.coordinate.max_abs())
    }

    /// `Σ_j inner(P_j,P_j) + inner(Q_j,Q_j)`
    pub fn square_sum(&self) -> T {
        self.momentum.inner(&self.momentum) + self.coordinate.inner(&self.coordinate)
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.momentum
            .max_abs_diff(&other.momentum)
            .max(self.coordinate.max_abs_diff(&other.coordinate))
    }
}

/// Offsets of each block inside the flat full-state vector.
///
/// Order: `p, q, P_1..P_n, Q_1..Q_n, π_1..π_n, η_1..η_n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FullLayout {
    pub nodes: usize,
    /// Edge count of each axis.
    pub edges: Vec<usize>,
}

impl FullLayout {
    pub fn new<T: Real>(grid: &Grid<T>) -> Self {
        FullLayout {
            nodes: grid.node_count(),
            edges: (0..grid.dim()).map(|j| grid.len(Location::Edge(j))).collect(),
        }
    }

    fn family_len(&self) -> usize {
        self.edges.iter().sum()
    }

    pub fn len(&self) -> usize {
        2 * self.nodes + 4 * self.family_len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn p(&self) -> std::ops::Range<usize> {
        0..self.nodes
    }

    pub fn q(&self) -> std::ops::Range<usize> {
        self.nodes..2 * self.nodes
    }

    /// Range of component `axis` of hidden family `family` (0 = P, 1 = Q, 2 = π, 3 = η).
    pub fn hidden(&self, family: usize, axis: usize) -> std::ops::Range<usize> {
        let start = 2 * self.nodes
            + family * self.family_len()
            + self.edges[..axis].iter().sum::<usize>();
        start..start + self.edges[axis]
    }
}

impl<T: Real> FullState<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        FullState {
            p: ScalarField::zeros(grid, Location::Node),
            q: ScalarField::zeros(grid, Location::Node),
            first: HiddenPair::zeros(grid),
            second: HiddenPair::zeros(grid),
        }
    }

    /// Slow fields `(p, q)` with every hidden variable set to zero.
    pub fn cold(r: &ReducedState<T>) -> Self {
        let grid = r.grid();
        FullState {
            p: r.p.clone(),
            q: r.q.clone(),
            first: HiddenPair::zeros(grid),
            second: HiddenPair::zeros(grid),
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        self.p.grid()
    }

    pub fn layout(&self) -> FullLayout {
        FullLayout::new(self.grid())
    }

    pub fn hidden_max_abs(&self) -> T {
        self.first.max_abs().max(self.second.max_abs())
    }

    pub fn to_flat(&self) -> Vec<T> {
        let layout = self.layout();
        let mut v = Vec::with_capacity(layout.len());
        v.extend_from_slice(self.p.values());
        v.extend_from_slice(self.q.values());
        for family in [
            &self.first.momentum,
            &self.first.coordinate,
            &self.second.momentum,
            &self.second.coordinate,
        ] {
            for c in family.components() {
                v.extend_from_slice(c.values());
            }
        }
        v
    }

    pub fn from_flat(grid: &Grid<T>, flat: &[T]) -> Result<Self> {
        let layout = FullLayout::new(grid);
        if flat.len() != layout.len() {
            return Err(Error::LengthMismatch {
                expected: layout.len(),
                actual: flat.len(),
            });
        }
        let family = |f: usize| -> VectorField<T> {
            let comps = (0..grid.dim())
                .map(|j| {
                    ScalarField::from_raw(grid, Location::Edge(j), flat[layout.hidden(f, j)].to_vec())
                })
                .collect();
            VectorField::from_components(grid, comps).expect("layout matches grid")
        };
        Ok(FullState {
            p: ScalarField::from_raw(grid, Location::Node, flat[layout.p()].to_vec()),
            q: ScalarField::from_raw(grid, Location::Node, flat[layout.q()].to_vec()),
            first: HiddenPair {
                momentum: family(0),
                coordinate: family(1),
            },
            second: HiddenPair {
                momentum: family(2),
                coordinate: family(3),
            },
        })
    }

    pub fn is_finite(&self) -> bool {
        self.to_flat().iter().all(|v| v.is_finite())
    }
}

impl<T: Real> WaveFunction<T> {
    pub fn grid(&self) -> &Grid<T> {
        self.re.grid()
    }
}

/// `ψ = (q + i p) / √2`
pub fn to_wavefunction<T: Real>(r: &ReducedState<T>) -> WaveFunction<T> {
    let s = T::FRAC_1_SQRT_2();
    WaveFunction {
        re: r.q.scaled(s),
        im: r.p.scaled(s),
    }
}

/// `q = √2 Re ψ`, `p = √2 Im ψ`
pub fn from_wavefunction<T: Real>(w: &WaveFunction<T>) -> ReducedState<T> {
    let s = T::SQRT_2();
    ReducedState {
        p: w.im.scaled(s),
        q: w.re.scaled(s),
    }
}

/// Places the hidden variables on the adiabatic manifold:
/// `Q_j = η_j = ∂_j p / (2m)`, `P_j = π_j = −∂_j q / (2m)`.
pub fn adiabatic_lift<T: Real>(r: &ReducedState<T>, m: Mass<T>) -> FullState<T> {
    let grid = r.grid();
    let c = T::one() / (T::lit(2.0) * m.value());
    let mut momentum = VectorField::zeros(grid);
    let mut coordinate = VectorField::zeros(grid);
    for j in 0..grid.dim() {
        grid.grad_acc(j, -c, r.q.values(), momentum.components_mut()[j].values_mut());
        grid.grad_acc(j, c, r.p.values(), coordinate.components_mut()[j].values_mut());
    }
    let pair = HiddenPair {
        momentum,
        coordinate,
    };
    FullState {
        p: r.p.clone(),
        q: r.q.clone(),
        first: pair.clone(),
        second: pair,
    }
}

/// Drops the hidden variables.
pub fn project<T: Real>(f: &FullState<T>) -> ReducedState<T> {
    ReducedState {
        p: f.p.clone(),
        q: f.q.clone(),
    }
}

/// Samples `V(x)` on the grid nodes.
pub fn build_potential<T: Real>(
    spec: &PotentialSpec<T>,
    grid: &Grid<T>,
    m: Mass<T>,
) -> Result<ScalarField<T>> {
    match spec {
        PotentialSpec::Free => Ok(ScalarField::zeros(grid, Location::Node)),
        PotentialSpec::Box => {
            if grid.bc() != Boundary::Dirichlet {
                return Err(Error::InvalidParameter(
                    "box potential requires a Dirichlet grid".into(),
                ));
            }
            Ok(ScalarField::zeros(grid, Location::Node))
        }
        PotentialSpec::HarmonicOscillator { omega } => {
            if !omega.is_finite() {
                return Err(Error::InvalidParameter("oscillator frequency must be finite".into()));
            }
            let center = grid.midpoint();
            let k = T::lit(0.5) * m.value() * *omega * *omega;
            Ok(ScalarField::from_fn(grid, |x| k * dist2(x, &center)))
        }
        PotentialSpec::Quadratic { stiffness } => {
            if !stiffness.is_finite() {
                return Err(Error::InvalidParameter("trap stiffness must be finite".into()));
            }
            let center = grid.midpoint();
            let k = T::lit(0.5) * *stiffness;
            Ok(ScalarField::from_fn(grid, |x| k * dist2(x, &center)))
        }
        PotentialSpec::GaussianBarrier {
            height,
            center,
            width,
        } => {
            if center.len() != grid.dim() {
                return Err(Error::LengthMismatch {
                    expected: grid.dim(),
                    actual: center.len(),
                });
            }
            if !(width.is_finite() && *width > T::zero()) || !height.is_finite() {
                return Err(Error::InvalidParameter(
                    "barrier needs finite height and positive width".into(),
                ));
            }
            let denom = T::lit(2.0) * *width * *width;
            Ok(ScalarField::from_fn(grid, |x| {
                *height * (-dist2(x, center) / denom).exp()
            }))
        }
        PotentialSpec::Tabulated(values) => {
            ScalarField::from_values(grid, Location::Node, values.clone())
        }
    }
}

fn dist2<T: Real>(x: &[T], c: &[T]) -> T {
    x.iter().zip(c).map(|(&a, &b)| (a - b) * (a - b)).sum()
}

/// Fraction of each side of each axis treated as the boundary band.
const BOUNDARY_BAND: f64 = 0.05;
/// Largest probability allowed inside the boundary band.
const BOUNDARY_MASS_TOL: f64 = 1e-8;

/// Normalised Gaussian packet `ψ ∝ exp(−|x−c|²/(4σ²)) exp(i k·x)`.
pub fn gaussian_packet<T: Real>(
    grid: &Grid<T>,
    center: &[T],
    width: T,
    wavenumber: &[T],
) -> Result<ReducedState<T>> {
    let dim = grid.dim();
    if center.len() != dim || wavenumber.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: center.len().min(wavenumber.len()),
        });
    }
    if !(width.is_finite() && width > T::zero()) {
        return Err(Error::InvalidParameter(format!("packet width must be positive, got {width}")));
    }
    let denom = T::lit(4.0) * width * width;
    let n = grid.node_count();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node_position(i);
        let x = &x[..dim];
        let amp = (-dist2(x, center) / denom).exp();
        let phase: T = x.iter().zip(wavenumber).map(|(&a, &k)| a * k).sum();
        re.push(amp * phase.cos());
        im.push(amp * phase.sin());
    }
    let total = grid.quadrature(&re, &re) + grid.quadrature(&im, &im);
    if total <= T::zero() || !total.is_finite() {
        return Err(Error::InvalidParameter("packet has no mass on the grid".into()));
    }
    let s = T::one() / total.sqrt();
    crate::scalar::scale(s, &mut re);
    crate::scalar::scale(s, &mut im);

    let band = boundary_band_mass(grid, &re, &im);
    if band > T::lit(BOUNDARY_MASS_TOL) {
        return Err(Error::InvalidParameter(format!(
            "packet mass {band:e} inside the boundary band exceeds {BOUNDARY_MASS_TOL:e}"
        )));
    }
    let w = WaveFunction {
        re: ScalarField::from_raw(grid, Location::Node, re),
        im: ScalarField::from_raw(grid, Location::Node, im),
    };
    Ok(from_wavefunction(&w))
}

fn boundary_band_mass<T: Real>(grid: &Grid<T>, re: &[T], im: &[T]) -> T {
    let band = T::lit(BOUNDARY_BAND);
    let mut mass = T::zero();
    for i in 0..grid.node_count() {
        let x = grid.node_position(i);
        let near = (0..grid.dim()).any(|j| {
            let (a, b) = grid.extent(j);
            let w = (band * (b - a)).max(grid.spacing(j));
            x[j] - a < w || b - x[j] < w
        });
        if near {
            mass += re[i] * re[i] + im[i] * im[i];
        }
    }
    mass * grid.cell_volume()
}

/// Closed-form free evolution of [`gaussian_packet`] in the continuum:
/// `ψ = Π_j (2πσ²)^(−1/4) μ^(−1/2) exp(−(x_j − c_j − v_j t)²/(4σ²μ) + i k_j (x_j − v_j t/2))`
/// with `μ = 1 + i t/(2mσ²)` and `v = k/m`.
pub fn free_packet<T: Real>(
    grid: &Grid<T>,
    center: &[T],
    width: T,
    wavenumber: &[T],
    m: Mass<T>,
    t: T,
) -> Result<ReducedState<T>> {
    let dim = grid.dim();
    if center.len() != dim || wavenumber.len() != dim {
        return Err(Error::LengthMismatch {
            expected: dim,
            actual: center.len().min(wavenumber.len()),
        });
    }
    let two = T::lit(2.0);
    let s2 = width * width;
    let mu = Complex::new(T::one(), t / (two * m.value() * s2));
    let pre = Complex::new((two * T::PI() * s2).powf(T::lit(-0.25)), T::zero()) / mu.sqrt();
    let n = grid.node_count();
    let mut re = Vec::with_capacity(n);
    let mut im = Vec::with_capacity(n);
    for i in 0..n {
        let x = grid.node_position(i);
        let mut psi = Complex::new(T::one(), T::zero());
        for j in 0..dim {
            let v = wavenumber[j] / m.value();
            let d = x[j] - center[j] - v * t;
            let arg = Complex::new(-d * d / (T::lit(4.0) * s2), T::zero()) / mu
                + Complex::new(T::zero(), wavenumber[j] * (x[j] - v * t / two));
            psi = psi * pre * arg.exp();
        }
        re.push(psi.re);
        im.push(psi.im);
    }
    let w = WaveFunction {
        re: ScalarField::from_raw(grid, Location::Node, re),
        im: ScalarField::from_raw(grid, Location::Node, im),
    };
    Ok(from_wavefunction(&w))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{grad, inner};
    use std::f64::consts::PI;

    fn periodic(n: usize) -> Grid<f64> {
        Grid::line(0.0, 1.0, n, Boundary::Periodic).unwrap()
    }

    #[test]
    fn wavefunction_map_round_trip() {
        let g = periodic(16);
        let zero = ReducedState::zeros(&g);
        let w = to_wavefunction(&zero);
        assert_eq!(w.re.max_abs(), 0.0);
        assert_eq!(w.im.max_abs(), 0.0);

        let gx = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        let r = ReducedState::new(ScalarField::zeros(&g, Location::Node), gx.scaled(2f64.sqrt())).unwrap();
        let w = to_wavefunction(&r);
        assert!((&w.re - &gx).max_abs() < 1e-15);
        assert_eq!(w.im.max_abs(), 0.0);

        let r = ReducedState::new(gx.clone(), gx.map(|v| v * v - 0.3)).unwrap();
        let back = from_wavefunction(&to_wavefunction(&r));
        assert!((&back.p - &r.p).max_abs() < 1e-15);
        assert!((&back.q - &r.q).max_abs() < 1e-15);
    }

    #[test]
    fn lift_of_uniform_state_has_no_hidden_fields() {
        let g = periodic(12);
        let f = adiabatic_lift(&ReducedState::uniform(&g, 0.4, -1.2), Mass::new(3.0).unwrap());
        assert_eq!(f.hidden_max_abs(), 0.0);
    }

    #[test]
    fn lift_of_sine_matches_scaled_gradient() {
        let g = periodic(32);
        let p = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let r = ReducedState::new(p.clone(), ScalarField::zeros(&g, Location::Node)).unwrap();
        let f = adiabatic_lift(&r, Mass::new(10.0).unwrap());
        // oracle: forward difference applied by hand
        let dx = g.spacing(0);
        let n = g.node_count();
        for e in 0..n {
            let left = p.values()[(e + n - 1) % n];
            let expected = (p.values()[e] - left) / dx / 20.0;
            assert!((f.first.coordinate.component(0).values()[e] - expected).abs() < 1e-14);
            assert!((f.second.coordinate.component(0).values()[e] - expected).abs() < 1e-14);
        }
        assert_eq!(f.first.momentum.max_abs(), 0.0);
        assert_eq!(f.second.momentum.max_abs(), 0.0);
    }

    #[test]
    fn lift_scales_inversely_with_mass() {
        let g = Grid::new(&[(0.0_f64, 1.0), (0.0, 1.0)], &[8, 6], Boundary::Dirichlet).unwrap();
        let p = ScalarField::from_fn(&g, |x| x[0] * (1.0 - x[1]));
        let q = ScalarField::from_fn(&g, |x| (x[0] + x[1]).cos());
        let r = ReducedState::new(p, q).unwrap();
        let a = adiabatic_lift(&r, Mass::new(2.0).unwrap());
        let b = adiabatic_lift(&r, Mass::new(4.0).unwrap());
        assert_eq!(a.first.momentum.scaled(0.5), b.first.momentum);
        assert_eq!(a.first.coordinate.scaled(0.5), b.first.coordinate);
        assert_eq!(a.first, a.second);
    }

    #[test]
    fn lift_satisfies_stationarity() {
        let g = periodic(24);
        let m = 7.0;
        let r = ReducedState::new(
            ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin() + 0.2),
            ScalarField::from_fn(&g, |x| (4.0 * PI * x[0]).cos()),
        )
        .unwrap();
        let f = adiabatic_lift(&r, Mass::new(m).unwrap());
        let gp = grad(&r.p, 0).unwrap();
        let gq = grad(&r.q, 0).unwrap();
        let eta = f.second.coordinate.component(0);
        let big_p = f.first.momentum.component(0);
        for e in 0..g.node_count() {
            assert!((m * eta.values()[e] - 0.5 * gp.values()[e]).abs() < 1e-13);
            assert!((m * big_p.values()[e] + 0.5 * gq.values()[e]).abs() < 1e-13);
        }
    }

    #[test]
    fn project_inverts_lift() {
        let g = periodic(10);
        let r = ReducedState::new(
            ScalarField::from_fn(&g, |x| x[0].sin()),
            ScalarField::from_fn(&g, |x| x[0].cos()),
        )
        .unwrap();
        let back = project(&adiabatic_lift(&r, Mass::new(0.3).unwrap()));
        assert_eq!(back, r);
        assert_eq!(project(&FullState::zeros(&g)), ReducedState::zeros(&g));
    }

    #[test]
    fn flat_layout_round_trip() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[4, 5], Boundary::Dirichlet).unwrap();
        let r = ReducedState::new(
            ScalarField::from_fn(&g, |x| x[0] + 3.0 * x[1]),
            ScalarField::from_fn(&g, |x| x[0] * x[1]),
        )
        .unwrap();
        let f = adiabatic_lift(&r, Mass::new(1.5).unwrap());
        let flat = f.to_flat();
        assert_eq!(flat.len(), f.layout().len());
        assert_eq!(FullState::from_flat(&g, &flat).unwrap(), f);
        assert!(FullState::from_flat(&g, &flat[1..]).is_err());
    }

    #[test]
    fn potentials() {
        let g = Grid::line(-8.0_f64, 8.0, 32, Boundary::Periodic).unwrap();
        let m = Mass::new(1.0).unwrap();
        assert_eq!(build_potential(&PotentialSpec::Free, &g, m).unwrap().max_abs(), 0.0);
        let v = build_potential(&PotentialSpec::HarmonicOscillator { omega: 1.0 }, &g, m).unwrap();
        // x = -8 + 20 * 0.5 = 2
        assert_eq!(g.coordinate(0, 20), 2.0);
        assert!((v.values()[20] - 2.0).abs() < 1e-14);
        let heavy = Mass::new(9.0).unwrap();
        let trap = build_potential(&PotentialSpec::Quadratic { stiffness: 1.0 }, &g, heavy).unwrap();
        assert!((trap.values()[20] - 2.0).abs() < 1e-14);

        let g = Grid::line(-1.0_f64, 1.0, 20, Boundary::Periodic).unwrap();
        let spec = PotentialSpec::GaussianBarrier {
            height: 1.0,
            center: vec![0.0],
            width: 1.0,
        };
        let v = build_potential(&spec, &g, m).unwrap();
        let at_zero = (0..20).find(|&i| g.coordinate(0, i).abs() < 1e-12).unwrap();
        assert!((v.values()[at_zero] - 1.0).abs() < 1e-15);

        assert!(build_potential(&PotentialSpec::Tabulated(vec![0.0; 21]), &g, m).is_err());
        assert!(build_potential(&PotentialSpec::Tabulated(vec![0.5; 20]), &g, m).is_ok());
        assert!(build_potential(&PotentialSpec::Box, &g, m).is_err());
        let bad = PotentialSpec::GaussianBarrier {
            height: 1.0,
            center: vec![0.0],
            width: 0.0,
        };
        assert!(build_potential(&bad, &g, m).is_err());
        assert!(Mass::new(0.0).is_err());
        assert!(Mass::new(f64::NAN).is_err());
    }

    #[test]
    fn gaussian_packet_contract() {
        let g = Grid::line(-10.0, 10.0, 400, Boundary::Periodic).unwrap();
        let r = gaussian_packet(&g, &[0.5], 1.0, &[0.0]).unwrap();
        assert_eq!(r.p.max_abs(), 0.0);
        let r = gaussian_packet(&g, &[-1.0], 0.8, &[2.5]).unwrap();
        let norm: f64 = (inner(&r.p, &r.p).unwrap() + inner(&r.q, &r.q).unwrap()) / 2.0;
        assert!((norm - 1.0).abs() < 1e-12);
        assert!(gaussian_packet(&g, &[9.5], 0.8, &[0.0]).is_err());
        assert!(gaussian_packet(&g, &[0.0], -0.8, &[0.0]).is_err());
    }

    #[test]
    fn free_packet_at_zero_matches_sampled_packet() {
        let g = Grid::line(-12.0_f64, 12.0, 300, Boundary::Periodic).unwrap();
        let m = Mass::new(1.5).unwrap();
        let a = gaussian_packet(&g, &[0.7], 0.9, &[1.3]).unwrap();
        let b = free_packet(&g, &[0.7], 0.9, &[1.3], m, 0.0).unwrap();
        assert!((&a.p - &b.p).max_abs() < 1e-12);
        assert!((&a.q - &b.q).max_abs() < 1e-12);
    }

    #[test]
    fn free_packet_spreads_by_dispersion_law() {
        let g = Grid::line(-30.0_f64, 30.0, 1200, Boundary::Periodic).unwrap();
        let m = Mass::new(2.0).unwrap();
        let (sigma, t) = (0.8, 3.0);
        let r = free_packet(&g, &[0.0], sigma, &[0.5], m, t).unwrap();
        let w2 = crate::observables::packet_width_sq(&r)[0];
        let expected = sigma * sigma * (1.0 + (t / (2.0 * 2.0 * sigma * sigma)).powi(2));
        assert!((w2 / expected - 1.0).abs() < 1e-10, "{w2} vs {expected}");
        assert!((crate::observables::norm(&r) - 1.0).abs() < 1e-10);
    }
}
