#![allow(dead_code)]

use hamsys::fields::ReducedState;
use hamsys::{Boundary, Grid, Location, ScalarField};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Independent uniform samples in [-1, 1].
pub fn random_field(g: &Grid<f64>, loc: Location, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
    let v = (0..g.len(loc)).map(|_| rng.gen_range(-1.0..1.0)).collect();
    ScalarField::from_values(g, loc, v).unwrap()
}

/// A few low modes compatible with the boundary condition.
pub fn smooth_field(g: &Grid<f64>, rng: &mut ChaCha8Rng) -> ScalarField<f64> {
    let dim = g.dim();
    let modes: Vec<(Vec<f64>, f64, f64)> = (0..4)
        .map(|_| {
            let k: Vec<f64> = (0..dim).map(|_| rng.gen_range(1..4) as f64).collect();
            (k, rng.gen_range(-1.0..1.0), rng.gen_range(0.0..std::f64::consts::TAU))
        })
        .collect();
    let ext = g.extents();
    let bc = g.bc();
    ScalarField::from_fn(g, |x| {
        modes
            .iter()
            .map(|(k, a, phase)| {
                let mut v = *a;
                for j in 0..dim {
                    let (lo, hi) = ext[j];
                    let s = (x[j] - lo) / (hi - lo);
                    v *= match bc {
                        Boundary::Dirichlet => (k[j] * std::f64::consts::PI * s).sin(),
                        Boundary::Periodic => (k[j] * std::f64::consts::TAU * s + phase).cos(),
                    };
                }
                v
            })
            .sum()
    })
}

pub fn smooth_state(g: &Grid<f64>, rng: &mut ChaCha8Rng) -> ReducedState<f64> {
    ReducedState::new(smooth_field(g, rng), smooth_field(g, rng)).unwrap()
}

pub fn random_state(g: &Grid<f64>, rng: &mut ChaCha8Rng) -> ReducedState<f64> {
    ReducedState::new(random_field(g, Location::Node, rng), random_field(g, Location::Node, rng)).unwrap()
}

pub fn rel(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

pub fn bc_of(periodic: bool) -> Boundary {
    if periodic {
        Boundary::Periodic
    } else {
        Boundary::Dirichlet
    }
}
