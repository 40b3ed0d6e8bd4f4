mod common;

use common::{bc_of, random_state, rel, rng, smooth_state};
use hamsys::dynamics::{full_rhs, reduced_rhs};
use hamsys::fields::{
    adiabatic_lift, build_potential, FullLayout, from_wavefunction, gaussian_packet, project, to_wavefunction,
};
use hamsys::grid::grad;
use hamsys::observables::{
    energy_expectation, hamiltonian_flux_form, hamiltonian_full, hamiltonian_reduced, hidden_energy, norm,
};
use hamsys::{Boundary, FullState, Grid, Mass, PotentialSpec, ReducedState};
use proptest::prelude::*;
use rand::Rng;

fn grid_strategy() -> impl Strategy<Value = Grid<f64>> {
    let one = (8usize..=128, any::<bool>()).prop_map(|(n, p)| Grid::line(-4.0, 4.0, n, bc_of(p)).unwrap());
    let two = (6usize..=24, 6usize..=24, any::<bool>())
        .prop_map(|(a, b, p)| Grid::new(&[(-2.0, 2.0), (-1.0, 2.0)], &[a, b], bc_of(p)).unwrap());
    prop_oneof![one, two]
}

fn potential(g: &Grid<f64>, m: Mass<f64>) -> hamsys::ScalarField<f64> {
    let center = vec![0.3; g.dim()];
    build_potential(&PotentialSpec::GaussianBarrier { height: 2.0, center, width: 0.7 }, g, m).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn lift_zeroes_the_fast_right_hand_side(g in grid_strategy(), seed in any::<u64>(), m in 1.0..500.0f64) {
        let m = Mass::new(m).unwrap();
        let r = smooth_state(&g, &mut rng(seed));
        let v = potential(&g, m);
        let f = adiabatic_lift(&r, m);
        let rhs = full_rhs(&f, m, &v).unwrap();
        let scale = f.hidden_max_abs().max(1e-300) * m.value();
        prop_assert!(rhs.first.momentum.max_abs() <= 1e-13 * scale);
        prop_assert!(rhs.first.coordinate.max_abs() <= 1e-13 * scale);
        prop_assert!(rhs.second.momentum.max_abs() <= 1e-13 * scale);
        prop_assert!(rhs.second.coordinate.max_abs() <= 1e-13 * scale);
    }

    #[test]
    fn hidden_fields_scale_as_inverse_two_m(g in grid_strategy(), seed in any::<u64>(), m in 1.0..1e4f64) {
        let r = smooth_state(&g, &mut rng(seed));
        let f = adiabatic_lift(&r, Mass::new(m).unwrap());
        let gmax = (0..g.dim())
            .map(|j| grad(&r.p, j).unwrap().max_abs().max(grad(&r.q, j).unwrap().max_abs()))
            .fold(0.0, f64::max);
        prop_assert!(rel(f.hidden_max_abs(), gmax / (2.0 * m)) <= 1e-14);
    }

    #[test]
    fn lift_duplicates_the_hidden_pair(g in grid_strategy(), seed in any::<u64>(), m in 0.1..100.0f64) {
        let r = random_state(&g, &mut rng(seed));
        let f = adiabatic_lift(&r, Mass::new(m).unwrap());
        prop_assert_eq!(&f.first, &f.second);
        prop_assert_eq!(project(&f), r);
    }

    #[test]
    fn energy_forms_agree(g in grid_strategy(), seed in any::<u64>(), m in 0.5..50.0f64) {
        let m = Mass::new(m).unwrap();
        let r = smooth_state(&g, &mut rng(seed));
        let v = potential(&g, m);
        let hr = hamiltonian_reduced(&r, m, &v);
        let hf = hamiltonian_full(&adiabatic_lift(&r, m), m, &v);
        let hx = hamiltonian_flux_form(&r, &reduced_rhs(&r, m, &v).unwrap());
        let he = energy_expectation(&to_wavefunction(&r), m, &v);
        for (name, x) in [("full", hf), ("flux", hx), ("expect", he)] {
            prop_assert!(rel(x, hr) <= 1e-10, "{name}: {x} vs {hr}");
        }
    }

    #[test]
    fn functionals_are_quadratic(g in grid_strategy(), seed in any::<u64>(), alpha in -5.0..5.0f64) {
        let m = Mass::new(3.0).unwrap();
        let r = random_state(&g, &mut rng(seed));
        let v = potential(&g, m);
        let s = r.scaled(alpha);
        let a2 = alpha * alpha;
        let f = adiabatic_lift(&r, m);
        let fs = adiabatic_lift(&s, m);
        let pairs = [
            (norm(&s), norm(&r)),
            (hamiltonian_reduced(&s, m, &v), hamiltonian_reduced(&r, m, &v)),
            (hamiltonian_full(&fs, m, &v), hamiltonian_full(&f, m, &v)),
            (hidden_energy(&fs, m), hidden_energy(&f, m)),
            (energy_expectation(&to_wavefunction(&s), m, &v), energy_expectation(&to_wavefunction(&r), m, &v)),
        ];
        for (i, (scaled, base)) in pairs.into_iter().enumerate() {
            prop_assert!((scaled - a2 * base).abs() <= 1e-12 * (a2 * base.abs()).max(1e-12), "functional {i}");
        }
    }

    #[test]
    fn rhs_is_linear(g in grid_strategy(), seed in any::<u64>(), alpha in -2.0..2.0f64, beta in -2.0..2.0f64) {
        let m = Mass::new(7.0).unwrap();
        let v = potential(&g, m);
        let mut rg = rng(seed);
        let a = random_state(&g, &mut rg);
        let b = random_state(&g, &mut rg);
        let c = a.combine(alpha, &b, beta);
        let lhs = reduced_rhs(&c, m, &v).unwrap();
        let rhs = reduced_rhs(&a, m, &v).unwrap().combine(alpha, &reduced_rhs(&b, m, &v).unwrap(), beta);
        let d = lhs.combine(1.0, &rhs, -1.0);
        let scale = rhs.p.max_abs().max(rhs.q.max_abs()).max(1.0);
        prop_assert!(d.p.max_abs().max(d.q.max_abs()) <= 1e-12 * scale);

        let flat: Vec<f64> = (0..FullLayout::new(&g).len()).map(|_| rg.gen_range(-1.0..1.0)).collect();
        let fa = FullState::from_flat(&g, &flat).unwrap();
        let fb = adiabatic_lift(&b, m);
        let combo: Vec<f64> = fa.to_flat().iter().zip(fb.to_flat()).map(|(x, y)| alpha * x + beta * y).collect();
        let fc = FullState::from_flat(&g, &combo).unwrap();
        let lhs = full_rhs(&fc, m, &v).unwrap().to_flat();
        let ra = full_rhs(&fa, m, &v).unwrap().to_flat();
        let rb = full_rhs(&fb, m, &v).unwrap().to_flat();
        let scale = ra.iter().chain(&rb).fold(1.0f64, |s, x| s.max(x.abs()));
        for i in 0..lhs.len() {
            prop_assert!((lhs[i] - (alpha * ra[i] + beta * rb[i])).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn wavefunction_map_round_trips(g in grid_strategy(), seed in any::<u64>()) {
        let r = random_state(&g, &mut rng(seed));
        let back = from_wavefunction(&to_wavefunction(&r));
        let d = back.combine(1.0, &r, -1.0);
        prop_assert!(d.p.max_abs().max(d.q.max_abs()) <= 1e-15);
    }

    #[test]
    fn flat_layout_round_trips(g in grid_strategy(), seed in any::<u64>()) {
        let r = random_state(&g, &mut rng(seed));
        let f = adiabatic_lift(&r, Mass::new(2.0).unwrap());
        prop_assert_eq!(FullState::from_flat(&g, &f.to_flat()).unwrap(), f);
        prop_assert_eq!(ReducedState::from_flat(&g, &r.to_flat()).unwrap(), r);
    }
}

#[test]
fn packets_are_normalised() {
    let g = Grid::line(-16.0, 16.0, 256, Boundary::Periodic).unwrap();
    let r = gaussian_packet(&g, &[0.5], 0.7, &[1.5]).unwrap();
    assert!((norm(&r) - 1.0_f64).abs() < 1e-12);
    let g2 = Grid::new(&[(-8.0, 8.0), (-8.0, 8.0)], &[64, 64], Boundary::Dirichlet).unwrap();
    let r2 = gaussian_packet(&g2, &[0.0, 1.0], 1.0, &[0.0, -1.0]).unwrap();
    assert!((norm(&r2) - 1.0_f64).abs() < 1e-12);
}

#[test]
fn packet_touching_the_boundary_is_rejected() {
    let g = Grid::line(-2.0, 2.0, 64, Boundary::Dirichlet).unwrap();
    assert!(gaussian_packet(&g, &[1.8], 0.5, &[0.0]).is_err());
}

#[test]
fn non_positive_mass_is_rejected() {
    assert!(Mass::new(0.0).is_err());
    assert!(Mass::new(-1.0).is_err());
    assert!(Mass::new(f64::NAN).is_err());
}
