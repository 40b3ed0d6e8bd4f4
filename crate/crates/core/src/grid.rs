//! Uniform tensor grids, sampled fields and the discrete difference operators.
//!
//! Node fields hold one value per grid node in row-major order (axis 0
//! slowest). Edge fields along axis `j` hold one value per link between
//! neighbouring nodes along that axis: `N_j` links on a periodic grid and
//! `N_j + 1` links on a Dirichlet grid (the two outermost links touch the
//! implicit zero boundary nodes). The forward gradient `grad` maps nodes to
//! edges and the divergence `div` maps edges back to nodes; they satisfy
//! `inner(grad a, g) = -inner(a, div g)` exactly and `div ∘ grad` is the
//! compact Laplacian.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Largest supported number of spatial axes.
pub const MAX_DIM: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Boundary {
    Periodic,
    /// Homogeneous Dirichlet; only interior nodes are stored.
    Dirichlet,
}

/// Where the samples of a field live.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Location {
    Node,
    /// Links along the given axis.
    Edge(usize),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Grid<T> {
    dim: usize,
    lower: [T; MAX_DIM],
    upper: [T; MAX_DIM],
    points: [usize; MAX_DIM],
    spacing: [T; MAX_DIM],
    bc: Boundary,
}

impl<T: Real> Grid<T> {
    /// Builds a grid with `points[j]` stored nodes on `extents[j] = (a_j, b_j)`.
    pub fn new(extents: &[(T, T)], points: &[usize], bc: Boundary) -> Result<Self> {
        let dim = extents.len();
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::InvalidGrid(format!(
                "dimension must be between 1 and {MAX_DIM}, got {dim}"
            )));
        }
        if points.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "{dim} extents but {} point counts",
                points.len()
            )));
        }
        let mut grid = Grid {
            dim,
            lower: [T::zero(); MAX_DIM],
            upper: [T::one(); MAX_DIM],
            points: [1; MAX_DIM],
            spacing: [T::one(); MAX_DIM],
            bc,
        };
        for (j, (&(a, b), &n)) in extents.iter().zip(points).enumerate() {
            if !a.is_finite() || !b.is_finite() || b <= a {
                return Err(Error::InvalidGrid(format!(
                    "axis {j}: degenerate interval [{a}, {b}]"
                )));
            }
            if n < 3 {
                return Err(Error::InvalidGrid(format!(
                    "axis {j}: need at least 3 points, got {n}"
                )));
            }
            let cells = match bc {
                Boundary::Periodic => n,
                Boundary::Dirichlet => n + 1,
            };
            grid.lower[j] = a;
            grid.upper[j] = b;
            grid.points[j] = n;
            grid.spacing[j] = (b - a) / T::from_usize_lossy(cells);
        }
        Ok(grid)
    }

    /// Convenience constructor for one-dimensional grids.
    pub fn line(a: T, b: T, n: usize, bc: Boundary) -> Result<Self> {
        Self::new(&[(a, b)], &[n], bc)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn bc(&self) -> Boundary {
        self.bc
    }

    pub fn points(&self) -> &[usize] {
        &self.points[..self.dim]
    }

    pub fn extent(&self, axis: usize) -> (T, T) {
        (self.lower[axis], self.upper[axis])
    }

    pub fn extents(&self) -> Vec<(T, T)> {
        (0..self.dim).map(|j| self.extent(j)).collect()
    }

    pub fn spacing(&self, axis: usize) -> T {
        self.spacing[axis]
    }

    pub fn spacings(&self) -> &[T] {
        &self.spacing[..self.dim]
    }

    pub fn min_spacing(&self) -> T {
        self.spacings()
            .iter()
            .copied()
            .fold(T::infinity(), T::min)
    }

    pub fn node_count(&self) -> usize {
        self.points().iter().product()
    }

    /// Quadrature weight `∏ dx_j` attached to every sample.
    pub fn cell_volume(&self) -> T {
        self.spacings().iter().fold(T::one(), |acc, &d| acc * d)
    }

    /// Number of links along `axis`.
    pub fn edge_count(&self, axis: usize) -> usize {
        match self.bc {
            Boundary::Periodic => self.points[axis],
            Boundary::Dirichlet => self.points[axis] + 1,
        }
    }

    /// Sample shape (padded to three axes with ones) for a location.
    pub fn shape(&self, loc: Location) -> [usize; MAX_DIM] {
        let mut s = self.points;
        if let Location::Edge(j) = loc {
            s[j] = self.edge_count(j);
        }
        s
    }

    pub fn len(&self, loc: Location) -> usize {
        self.shape(loc).iter().product()
    }

    pub fn check_axis(&self, axis: usize) -> Result<()> {
        if axis < self.dim {
            Ok(())
        } else {
            Err(Error::AxisOutOfRange {
                axis,
                dim: self.dim,
            })
        }
    }

    /// Coordinate of node `i` along `axis`.
    pub fn coordinate(&self, axis: usize, i: usize) -> T {
        let offset = match self.bc {
            Boundary::Periodic => i,
            Boundary::Dirichlet => i + 1,
        };
        self.lower[axis] + T::from_usize_lossy(offset) * self.spacing[axis]
    }

    pub fn midpoint(&self) -> Vec<T> {
        (0..self.dim)
            .map(|j| (self.lower[j] + self.upper[j]) / T::lit(2.0))
            .collect()
    }

    /// Multi-index of a flat node index.
    pub fn unravel(&self, mut flat: usize) -> [usize; MAX_DIM] {
        let mut idx = [0; MAX_DIM];
        for j in (0..MAX_DIM).rev() {
            idx[j] = flat % self.points[j];
            flat /= self.points[j];
        }
        idx
    }

    /// Coordinates of a flat node index (first `dim` entries meaningful).
    pub fn node_position(&self, flat: usize) -> [T; MAX_DIM] {
        let idx = self.unravel(flat);
        let mut x = [T::zero(); MAX_DIM];
        for j in 0..self.dim {
            x[j] = self.coordinate(j, idx[j]);
        }
        x
    }

    // Splits a shape around `axis` into (outer count, axis length, inner stride).
    fn split(shape: [usize; MAX_DIM], axis: usize) -> (usize, usize, usize) {
        let outer = shape[..axis].iter().product();
        let inner = shape[axis + 1..].iter().product();
        (outer, shape[axis], inner)
    }

    /// `dst += alpha * ∂_axis src` with the second-order central stencil on node fields.
    pub fn central_acc(&self, axis: usize, alpha: T, src: &[T], dst: &mut [T]) {
        let (outer, n, inner) = Self::split(self.points, axis);
        let periodic = self.bc == Boundary::Periodic;
        let c = alpha / (T::lit(2.0) * self.spacing[axis]);
        for o in 0..outer {
            let base = o * n * inner;
            for i in 0..n {
                let row = base + i * inner;
                for k in 0..inner {
                    let right = if i + 1 < n {
                        src[row + inner + k]
                    } else if periodic {
                        src[base + k]
                    } else {
                        T::zero()
                    };
                    let left = if i > 0 {
                        src[row - inner + k]
                    } else if periodic {
                        src[base + (n - 1) * inner + k]
                    } else {
                        T::zero()
                    };
                    dst[row + k] += c * (right - left);
                }
            }
        }
    }

    /// `dst += alpha * Δ src` with the compact (2n+1)-point stencil on node fields.
    pub fn laplacian_acc(&self, alpha: T, src: &[T], dst: &mut [T]) {
        let periodic = self.bc == Boundary::Periodic;
        for axis in 0..self.dim {
            let (outer, n, inner) = Self::split(self.points, axis);
            let c = alpha / (self.spacing[axis] * self.spacing[axis]);
            let two = T::lit(2.0);
            for o in 0..outer {
                let base = o * n * inner;
                for i in 0..n {
                    let row = base + i * inner;
                    for k in 0..inner {
                        let right = if i + 1 < n {
                            src[row + inner + k]
                        } else if periodic {
                            src[base + k]
                        } else {
                            T::zero()
                        };
                        let left = if i > 0 {
                            src[row - inner + k]
                        } else if periodic {
                            src[base + (n - 1) * inner + k]
                        } else {
                            T::zero()
                        };
                        dst[row + k] += c * (right - two * src[row + k] + left);
                    }
                }
            }
        }
    }

    /// `dst += alpha * grad_axis src`: node field in, edge field along `axis` out.
    pub fn grad_acc(&self, axis: usize, alpha: T, src: &[T], dst: &mut [T]) {
        let (outer, n, inner) = Self::split(self.points, axis);
        let edges = self.edge_count(axis);
        let periodic = self.bc == Boundary::Periodic;
        let c = alpha / self.spacing[axis];
        for o in 0..outer {
            let nbase = o * n * inner;
            let ebase = o * edges * inner;
            for e in 0..edges {
                for k in 0..inner {
                    let right = if e < n {
                        src[nbase + e * inner + k]
                    } else {
                        T::zero()
                    };
                    let left = if e > 0 {
                        src[nbase + (e - 1) * inner + k]
                    } else if periodic {
                        src[nbase + (n - 1) * inner + k]
                    } else {
                        T::zero()
                    };
                    dst[ebase + e * inner + k] += c * (right - left);
                }
            }
        }
    }

    /// `dst += alpha * div_axis src`: edge field along `axis` in, node field out.
    pub fn div_acc(&self, axis: usize, alpha: T, src: &[T], dst: &mut [T]) {
        let (outer, n, inner) = Self::split(self.points, axis);
        let edges = self.edge_count(axis);
        let c = alpha / self.spacing[axis];
        for o in 0..outer {
            let nbase = o * n * inner;
            let ebase = o * edges * inner;
            for i in 0..n {
                for k in 0..inner {
                    // edge i is left of node i; edge i + 1 (mod N when periodic) is right.
                    let right = src[ebase + ((i + 1) % edges) * inner + k];
                    let left = src[ebase + i * inner + k];
                    dst[nbase + i * inner + k] += c * (right - left);
                }
            }
        }
    }

    /// Weighted sum `Σ a_i b_i ∏dx` on raw slices.
    pub fn quadrature(&self, a: &[T], b: &[T]) -> T {
        crate::scalar::dot(a, b) * self.cell_volume()
    }
}

/// Real samples on a grid location.
#[derive(Clone, Debug, PartialEq)]
pub struct ScalarField<T> {
    grid: Grid<T>,
    loc: Location,
    values: Vec<T>,
}

impl<T: Real> ScalarField<T> {
    pub fn zeros(grid: &Grid<T>, loc: Location) -> Self {
        ScalarField {
            grid: grid.clone(),
            loc,
            values: vec![T::zero(); grid.len(loc)],
        }
    }

    pub fn constant(grid: &Grid<T>, value: T) -> Self {
        ScalarField {
            grid: grid.clone(),
            loc: Location::Node,
            values: vec![value; grid.node_count()],
        }
    }

    /// Wraps raw samples, checking the count and finiteness.
    pub fn from_values(grid: &Grid<T>, loc: Location, values: Vec<T>) -> Result<Self> {
        if let Location::Edge(j) = loc {
            grid.check_axis(j)?;
        }
        let expected = grid.len(loc);
        if values.len() != expected {
            return Err(Error::LengthMismatch {
                expected,
                actual: values.len(),
            });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(format!("field sample {i}")));
        }
        Ok(ScalarField {
            grid: grid.clone(),
            loc,
            values,
        })
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn(grid: &Grid<T>, mut f: impl FnMut(&[T]) -> T) -> Self {
        let values = (0..grid.node_count())
            .map(|i| f(&grid.node_position(i)[..grid.dim()]))
            .collect();
        ScalarField {
            grid: grid.clone(),
            loc: Location::Node,
            values,
        }
    }

    pub(crate) fn from_raw(grid: &Grid<T>, loc: Location, values: Vec<T>) -> Self {
        debug_assert_eq!(values.len(), grid.len(loc));
        ScalarField {
            grid: grid.clone(),
            loc,
            values,
        }
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn loc(&self) -> Location {
        self.loc
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [T] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn compatible(&self, other: &Self) -> bool {
        self.loc == other.loc && self.grid == other.grid
    }

    pub fn max_abs(&self) -> T {
        self.values
            .iter()
            .fold(T::zero(), |acc, v| acc.max(v.abs()))
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        ScalarField {
            grid: self.grid.clone(),
            loc: self.loc,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, alpha: T) -> Self {
        self.map(|v| alpha * v)
    }

    /// `self += alpha * x`
    pub fn axpy(&mut self, alpha: T, x: &Self) {
        assert!(self.compatible(x), "axpy on incompatible fields");
        crate::scalar::axpy(alpha, &x.values, &mut self.values);
    }

    /// Pointwise product (same location).
    pub fn hadamard(&self, other: &Self) -> Self {
        assert!(self.compatible(other), "product of incompatible fields");
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(&a, &b)| a * b)
            .collect();
        ScalarField::from_raw(&self.grid, self.loc, values)
    }
}

impl<T: Real> Add for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn add(self, rhs: Self) -> ScalarField<T> {
        let mut out = self.clone();
        out.axpy(T::one(), rhs);
        out
    }
}

impl<T: Real> Sub for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn sub(self, rhs: Self) -> ScalarField<T> {
        let mut out = self.clone();
        out.axpy(-T::one(), rhs);
        out
    }
}

impl<T: Real> Mul<T> for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn mul(self, rhs: T) -> ScalarField<T> {
        self.scaled(rhs)
    }
}

impl<T: Real> Neg for &ScalarField<T> {
    type Output = ScalarField<T>;
    fn neg(self) -> ScalarField<T> {
        self.scaled(-T::one())
    }
}

/// One edge field per axis; component `j` lives on `Location::Edge(j)`.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField<T> {
    components: Vec<ScalarField<T>>,
}

impl<T: Real> VectorField<T> {
    pub fn zeros(grid: &Grid<T>) -> Self {
        VectorField {
            components: (0..grid.dim())
                .map(|j| ScalarField::zeros(grid, Location::Edge(j)))
                .collect(),
        }
    }

    pub fn from_components(grid: &Grid<T>, components: Vec<ScalarField<T>>) -> Result<Self> {
        if components.len() != grid.dim() {
            return Err(Error::LengthMismatch {
                expected: grid.dim(),
                actual: components.len(),
            });
        }
        for (j, c) in components.iter().enumerate() {
            if c.grid() != grid || c.loc() != Location::Edge(j) {
                return Err(Error::GridMismatch);
            }
        }
        Ok(VectorField { components })
    }

    pub fn components(&self) -> &[ScalarField<T>] {
        &self.components
    }

    pub fn components_mut(&mut self) -> &mut [ScalarField<T>] {
        &mut self.components
    }

    pub fn component(&self, j: usize) -> &ScalarField<T> {
        &self.components[j]
    }

    pub fn max_abs(&self) -> T {
        self.components
            .iter()
            .fold(T::zero(), |acc, c| acc.max(c.max_abs()))
    }

    pub fn scaled(&self, alpha: T) -> Self {
        VectorField {
            components: self.components.iter().map(|c| c.scaled(alpha)).collect(),
        }
    }

    /// `Σ_j inner(a_j, b_j)`
    pub fn inner(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .map(|(a, b)| a.grid().quadrature(a.values(), b.values()))
            .sum()
    }

    pub fn max_abs_diff(&self, other: &Self) -> T {
        self.components
            .iter()
            .zip(&other.components)
            .flat_map(|(a, b)| a.values().iter().zip(b.values()).map(|(&x, &y)| (x - y).abs()))
            .fold(T::zero(), T::max)
    }
}

/// Central difference `(f[i+1] - f[i-1]) / (2 dx_j)` of a node field.
pub fn partial<T: Real>(f: &ScalarField<T>, axis: usize) -> Result<ScalarField<T>> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    if f.loc() != Location::Node {
        return Err(Error::GridMismatch);
    }
    let mut out = ScalarField::zeros(grid, Location::Node);
    grid.central_acc(axis, T::one(), f.values(), out.values_mut());
    Ok(out)
}

/// Compact second-difference Laplacian of a node field.
pub fn laplacian<T: Real>(f: &ScalarField<T>) -> ScalarField<T> {
    assert_eq!(f.loc(), Location::Node, "laplacian acts on node fields");
    let grid = f.grid();
    let mut out = ScalarField::zeros(grid, Location::Node);
    grid.laplacian_acc(T::one(), f.values(), out.values_mut());
    out
}

/// Forward difference of a node field onto the links along `axis`.
pub fn grad<T: Real>(f: &ScalarField<T>, axis: usize) -> Result<ScalarField<T>> {
    let grid = f.grid();
    grid.check_axis(axis)?;
    if f.loc() != Location::Node {
        return Err(Error::GridMismatch);
    }
    let mut out = ScalarField::zeros(grid, Location::Edge(axis));
    grid.grad_acc(axis, T::one(), f.values(), out.values_mut());
    Ok(out)
}

/// Backward difference of an edge field back onto the nodes; the negative adjoint of [`grad`].
pub fn div<T: Real>(g: &ScalarField<T>) -> ScalarField<T> {
    let Location::Edge(axis) = g.loc() else {
        panic!("div acts on edge fields");
    };
    let grid = g.grid();
    let mut out = ScalarField::zeros(grid, Location::Node);
    grid.div_acc(axis, T::one(), g.values(), out.values_mut());
    out
}

/// `Σ_j div(v_j)`
pub fn divergence<T: Real>(v: &VectorField<T>) -> ScalarField<T> {
    let grid = v.component(0).grid();
    let mut out = ScalarField::zeros(grid, Location::Node);
    for (j, c) in v.components().iter().enumerate() {
        grid.div_acc(j, T::one(), c.values(), out.values_mut());
    }
    out
}

/// Riemann quadrature `Σ a_i b_i ∏dx_j`.
pub fn inner<T: Real>(a: &ScalarField<T>, b: &ScalarField<T>) -> Result<T> {
    if !a.compatible(b) {
        return Err(Error::GridMismatch);
    }
    Ok(a.grid().quadrature(a.values(), b.values()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * (1.0 + b.abs())
    }

    #[test]
    fn spacing_follows_boundary_policy() {
        let g = Grid::line(0.0, 1.0, 8, Boundary::Periodic).unwrap();
        assert_eq!(g.spacing(0), 0.125);
        let g = Grid::line(0.0, 1.0, 7, Boundary::Dirichlet).unwrap();
        assert_eq!(g.spacing(0), 0.125);
        assert_eq!(g.node_count(), 7);
        assert_eq!(g.coordinate(0, 0), 0.125);
        let g = Grid::new(&[(0.0, 1.0), (0.0, 2.0)], &[4, 8], Boundary::Periodic).unwrap();
        assert_eq!(g.node_count(), 32);
        assert_eq!(g.spacings(), &[0.25, 0.25]);
    }

    #[test]
    fn rejects_bad_grids() {
        assert!(Grid::<f64>::new(&[], &[], Boundary::Periodic).is_err());
        assert!(Grid::line(1.0, 1.0, 8, Boundary::Periodic).is_err());
        assert!(Grid::line(0.0, 1.0, 2, Boundary::Periodic).is_err());
        assert!(Grid::new(&[(0.0, 1.0); 4], &[4; 4], Boundary::Periodic).is_err());
        assert!(Grid::new(&[(0.0, 1.0); 2], &[4], Boundary::Periodic).is_err());
        assert!(Grid::line(0.0, f64::NAN, 8, Boundary::Periodic).is_err());
    }

    #[test]
    fn central_difference_of_constant_and_linear() {
        let g = Grid::line(0.0_f64, 1.0, 16, Boundary::Periodic).unwrap();
        let c = ScalarField::constant(&g, 3.0);
        assert!(partial(&c, 0).unwrap().max_abs() < 1e-14);

        let g = Grid::line(0.0_f64, 1.0, 15, Boundary::Dirichlet).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0]);
        let d = partial(&f, 0).unwrap();
        for &v in &d.values()[1..14] {
            assert!((v - 1.0).abs() < 1e-12);
        }
        assert!(matches!(partial(&f, 1), Err(Error::AxisOutOfRange { .. })));
    }

    #[test]
    fn central_difference_symbol_on_sinusoid() {
        let (l, n, k) = (2.0, 32, 3.0);
        let g = Grid::line(0.0, l, n, Boundary::Periodic).unwrap();
        let dx = g.spacing(0);
        let kappa = 2.0 * PI * k / l;
        let f = ScalarField::from_fn(&g, |x| (kappa * x[0]).sin());
        let d = partial(&f, 0).unwrap();
        let symbol = (kappa * dx).sin() / dx;
        for i in 0..n {
            let x = g.coordinate(0, i);
            assert!(close(d.values()[i], symbol * (kappa * x).cos(), 1e-12));
        }
    }

    #[test]
    fn laplacian_discrete_dispersion() {
        let (l, n, k) = (1.0, 40, 2.0);
        let g = Grid::line(0.0, l, n, Boundary::Periodic).unwrap();
        let dx = g.spacing(0);
        let kappa = 2.0 * PI * k / l;
        let f = ScalarField::from_fn(&g, |x| (kappa * x[0]).sin());
        let lf = laplacian(&f);
        let eig = -(2.0 - 2.0 * (kappa * dx).cos()) / (dx * dx);
        for (a, b) in lf.values().iter().zip(f.values()) {
            assert!((a - eig * b).abs() < 1e-9);
        }

        // box mode with Dirichlet closure
        let g = Grid::line(0.0, l, 31, Boundary::Dirichlet).unwrap();
        let dx = g.spacing(0);
        let mode = 3.0;
        let f = ScalarField::from_fn(&g, |x| (mode * PI * x[0] / l).sin());
        let lf = laplacian(&f);
        let eig = -(2.0 - 2.0 * (mode * PI * dx / l).cos()) / (dx * dx);
        for (a, b) in lf.values().iter().zip(f.values()) {
            assert!((a - eig * b).abs() < 1e-9);
        }

        assert!(laplacian(&ScalarField::constant(&Grid::line(0.0, 1.0, 8, Boundary::Periodic).unwrap(), 2.0)).max_abs() < 1e-12);
    }

    #[test]
    fn quadrature_examples() {
        let g = Grid::line(0.0, 1.0, 37, Boundary::Periodic).unwrap();
        let one = ScalarField::constant(&g, 1.0);
        assert!(close(inner(&one, &one).unwrap(), 1.0, 1e-14));
        let s = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).sin());
        let c = ScalarField::from_fn(&g, |x| (2.0 * PI * x[0]).cos());
        assert!(inner(&s, &c).unwrap().abs() < 1e-15);
        assert!(close(inner(&s, &s).unwrap(), 0.5, 1e-14));

        let other = Grid::line(0.0, 1.0, 36, Boundary::Periodic).unwrap();
        let bad = ScalarField::constant(&other, 1.0);
        assert!(matches!(inner(&one, &bad), Err(Error::GridMismatch)));
    }

    #[test]
    fn div_of_grad_is_compact_laplacian() {
        for bc in [Boundary::Periodic, Boundary::Dirichlet] {
            let g = Grid::new(&[(0.0_f64, 1.0), (-1.0, 2.0)], &[9, 7], bc).unwrap();
            let f = ScalarField::from_fn(&g, |x| (3.0 * x[0]).sin() * (x[1] * x[1] + 0.3 * x[0]));
            let mut via_edges = ScalarField::zeros(&g, Location::Node);
            for j in 0..2 {
                let e = grad(&f, j).unwrap();
                assert_eq!(e.len(), g.len(Location::Edge(j)));
                via_edges = &via_edges + &div(&e);
            }
            let direct = laplacian(&f);
            let diff = (&via_edges - &direct).max_abs();
            assert!(diff < 1e-10 * direct.max_abs(), "{bc:?}: {diff}");
        }
    }

    #[test]
    fn edge_counts() {
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[5, 6], Boundary::Dirichlet).unwrap();
        assert_eq!(g.len(Location::Edge(0)), 6 * 6);
        assert_eq!(g.len(Location::Edge(1)), 5 * 7);
        let g = Grid::new(&[(0.0, 1.0), (0.0, 1.0)], &[5, 6], Boundary::Periodic).unwrap();
        assert_eq!(g.len(Location::Edge(1)), 30);
    }

    #[test]
    fn three_dimensional_smoke() {
        let g = Grid::new(&[(0.0, 1.0); 3], &[4, 5, 6], Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(&g, |x| x[0] + 2.0 * x[1] - x[2]);
        let lf = laplacian(&ScalarField::constant(&g, 1.0));
        assert!(lf.max_abs() < 1e-12);
        assert_eq!(partial(&f, 2).unwrap().len(), 120);
    }

    #[test]
    fn single_precision_smoke() {
        let g = Grid::<f32>::line(0.0, 1.0, 16, Boundary::Periodic).unwrap();
        let f = ScalarField::from_fn(&g, |x| (2.0 * std::f32::consts::PI * x[0]).sin());
        let v = inner(&f, &f).unwrap();
        assert!((v - 0.5).abs() < 1e-5);
    }
}
