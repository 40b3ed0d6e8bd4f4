//! MKS formulation and the map to natural units (h = c = 1).
//!
//! A system with Planck constant `h`, speed `c`, particle mass `M` and grid
//! length unit `λ` is simulated in natural units with
//! `E₀ = h c / λ`, `τ = h / E₀ = λ / c` and dimensionless mass `m = M c λ / h`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::Mass;
use crate::grid::{Grid, ScalarField};
use crate::scalar::Real;
use crate::spectral::HamiltonianOperator;

/// Planck constant, J·s (exact SI value).
pub const PLANCK: f64 = 6.626_070_15e-34;
/// Speed of light, m/s (exact SI value).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;
/// Electron rest mass, kg.
pub const ELECTRON_MASS: f64 = 9.109_383_701_5e-31;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnitSystem<T> {
    /// J·s
    pub h: T,
    /// m/s
    pub c: T,
    /// kg
    pub mass: T,
    /// meters per grid length unit
    pub length_unit: T,
}

impl<T: Real> UnitSystem<T> {
    pub fn new(h: T, c: T, mass: T, length_unit: T) -> Result<Self> {
        for (name, x) in [("h", h), ("c", c), ("mass", mass), ("length_unit", length_unit)] {
            if !(x.is_finite() && x > T::zero()) {
                return Err(Error::InvalidParameter(format!("unit system {name} must be positive, got {x}")));
            }
        }
        Ok(UnitSystem { h, c, mass, length_unit })
    }

    /// `h = c = 1`, unit length, mass `m`.
    pub fn natural(m: T) -> Self {
        UnitSystem {
            h: T::one(),
            c: T::one(),
            mass: m,
            length_unit: T::one(),
        }
    }

    /// SI constants for a particle of mass `mass` kg on a grid measured in units of `length_unit` m.
    pub fn si(mass: T, length_unit: T) -> Result<Self> {
        Self::new(T::lit(PLANCK), T::lit(SPEED_OF_LIGHT), mass, length_unit)
    }

    pub fn is_natural(&self) -> bool {
        self.h == T::one() && self.c == T::one() && self.length_unit == T::one()
    }

    /// `E₀ = h c / λ`, joules.
    pub fn energy_unit(&self) -> T {
        self.h * self.c / self.length_unit
    }

    /// `τ = h / E₀ = λ / c`, seconds.
    pub fn time_unit(&self) -> T {
        self.length_unit / self.c
    }

    /// `m = M c λ / h`, the mass parameter of the natural-unit run.
    pub fn natural_mass(&self) -> T {
        self.mass * self.c * self.length_unit / self.h
    }

    pub fn scales(&self) -> Scales<T> {
        Scales {
            energy: self.energy_unit(),
            length: self.length_unit,
            time: self.time_unit(),
        }
    }
}

/// `M c² / h` in 1/s.
pub fn planck_frequency<T: Real>(u: &UnitSystem<T>) -> T {
    u.mass * u.c * u.c / u.h
}

/// Conversion factors: one natural unit equals this many joules, meters, seconds.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scales<T> {
    pub energy: T,
    pub length: T,
    pub time: T,
}

/// Dimensional parameters and results of a run.
///
/// Energies cover the potential samples, eigenvalues and Hamiltonian values;
/// the norm is dimensionless and passes through untouched.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Quantities<T> {
    pub energies: Vec<T>,
    pub lengths: Vec<T>,
    pub times: Vec<T>,
    pub dimensionless: Vec<T>,
}

/// MKS quantities to natural units, together with the scales used.
pub fn to_natural<T: Real>(u: &UnitSystem<T>, q: &Quantities<T>) -> (Quantities<T>, Scales<T>) {
    let s = u.scales();
    let out = Quantities {
        energies: q.energies.iter().map(|&e| e / s.energy).collect(),
        lengths: q.lengths.iter().map(|&x| x / s.length).collect(),
        times: q.times.iter().map(|&t| t / s.time).collect(),
        dimensionless: q.dimensionless.clone(),
    };
    (out, s)
}

/// Inverse of [`to_natural`].
pub fn from_natural<T: Real>(u: &UnitSystem<T>, q: &Quantities<T>) -> Quantities<T> {
    let s = u.scales();
    Quantities {
        energies: q.energies.iter().map(|&e| e * s.energy).collect(),
        lengths: q.lengths.iter().map(|&x| x * s.length).collect(),
        times: q.times.iter().map(|&t| t * s.time).collect(),
        dimensionless: q.dimensionless.clone(),
    }
}

/// Natural-unit grid with the same node layout as an MKS grid.
pub fn grid_to_natural<T: Real>(u: &UnitSystem<T>, grid: &Grid<T>) -> Result<Grid<T>> {
    let l = u.length_unit;
    let extents: Vec<(T, T)> = grid.extents().into_iter().map(|(a, b)| (a / l, b / l)).collect();
    Grid::new(&extents, grid.points(), grid.bc())
}

/// Coefficients of the MKS Hamiltonian density: potential `1/(2h)`,
/// hidden mass term `M c²/(2h)`, gradient couplings `c/2`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Couplings<T> {
    pub potential: T,
    pub hidden: T,
    pub gradient: T,
}

pub fn mks_couplings<T: Real>(u: &UnitSystem<T>) -> Couplings<T> {
    let two = T::lit(2.0);
    Couplings {
        potential: T::one() / (two * u.h),
        hidden: u.mass * u.c * u.c / (two * u.h),
        gradient: u.c / two,
    }
}

impl<T: Real> Couplings<T> {
    /// Coefficients after measuring energy in `E₀`, length in `λ` and time in `τ`.
    ///
    /// The potential coefficient multiplies `V = E₀ Ṽ`; time rescaling multiplies
    /// the generator by `τ`; each gradient picks up `1/λ`.
    pub fn natural_image(&self, u: &UnitSystem<T>) -> Couplings<T> {
        let s = u.scales();
        Couplings {
            potential: self.potential * s.energy * s.time,
            hidden: self.hidden * s.time,
            gradient: self.gradient * s.time / s.length,
        }
    }
}

/// `−h²/(2M) ∂² + V` on an MKS grid (meters) with `V` in joules.
pub fn mks_operator<T: Real>(u: &UnitSystem<T>, grid: &Grid<T>, v: &ScalarField<T>) -> Result<HamiltonianOperator<T>> {
    HamiltonianOperator::with_kinetic(grid, u.h * u.h / (T::lit(2.0) * u.mass), v)
}

/// The natural-unit image of an MKS problem: grid, potential and mass.
pub fn problem_to_natural<T: Real>(
    u: &UnitSystem<T>,
    grid: &Grid<T>,
    v: &ScalarField<T>,
) -> Result<(Grid<T>, ScalarField<T>, Mass<T>)> {
    let g = grid_to_natural(u, grid)?;
    let e0 = u.energy_unit();
    let vn: Vec<T> = v.values().iter().map(|&x| x / e0).collect();
    let vn = ScalarField::from_values(&g, v.loc(), vn)?;
    Ok((g, vn, Mass::new(u.natural_mass())?))
}
