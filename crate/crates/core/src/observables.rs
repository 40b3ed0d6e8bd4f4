//! Scalar functionals of states: norm, the three energy forms and distances.
//!
//! Every integral is the grid quadrature, so the identities between the
//! energy forms hold exactly at the discrete level.

use crate::error::{Error, Result};
use crate::fields::{FullState, Mass, ReducedState, WaveFunction};
use crate::grid::{Grid, Location, ScalarField};
use crate::scalar::Real;

/// `∫ ½ (p² + q²)`
pub fn norm<T: Real>(r: &ReducedState<T>) -> T {
    let g = r.grid();
    T::lit(0.5) * (g.quadrature(r.p.values(), r.p.values()) + g.quadrature(r.q.values(), r.q.values()))
}

fn potential_term<T: Real>(g: &Grid<T>, v: &ScalarField<T>, p: &[T], q: &[T]) -> T {
    assert_eq!(v.loc(), Location::Node);
    assert_eq!(v.len(), p.len(), "potential sampled on a different grid");
    let s = v
        .values()
        .iter()
        .zip(p.iter().zip(q))
        .fold(T::zero(), |acc, (&vi, (&pi, &qi))| acc + vi * (pi * pi + qi * qi));
    s * g.cell_volume()
}

/// `−(m/2) Σ_j ∫ (P_j² + Q_j² + π_j² + η_j²)`, the negative hidden-variable part of the energy.
pub fn hidden_energy<T: Real>(f: &FullState<T>, m: Mass<T>) -> T {
    -T::lit(0.5) * m.value() * (f.first.square_sum() + f.second.square_sum())
}

/// Quadrature of the full Hamiltonian density
/// `½(V(p²+q²) − m(P²+Q²+π²+η²) − p ∂_j(Q_j+η_j) − (P_j+π_j) ∂_j q)`.
pub fn hamiltonian_full<T: Real>(f: &FullState<T>, m: Mass<T>, v: &ScalarField<T>) -> T {
    let g = f.grid();
    let half = T::lit(0.5);
    let mut div_sum = vec![T::zero(); g.node_count()];
    let mut coupling = T::zero();
    let mut grad_q = Vec::new();
    for j in 0..g.dim() {
        let qj = f.first.coordinate.component(j).values();
        let ej = f.second.coordinate.component(j).values();
        let mut s: Vec<T> = qj.iter().zip(ej).map(|(&a, &b)| a + b).collect();
        g.div_acc(j, T::one(), &s, &mut div_sum);

        grad_q.clear();
        grad_q.resize(g.len(Location::Edge(j)), T::zero());
        g.grad_acc(j, T::one(), f.q.values(), &mut grad_q);
        let pj = f.first.momentum.component(j).values();
        let pij = f.second.momentum.component(j).values();
        s.clear();
        s.extend(pj.iter().zip(pij).map(|(&a, &b)| a + b));
        coupling += g.quadrature(&s, &grad_q);
    }
    let pot = potential_term(g, v, f.p.values(), f.q.values());
    half * (pot - m.value() * (f.first.square_sum() + f.second.square_sum())
        - g.quadrature(f.p.values(), &div_sum)
        - coupling)
}

/// Quadrature of `½(V(p²+q²) − p ∂²p/(2m) − q ∂²q/(2m))`.
pub fn hamiltonian_reduced<T: Real>(r: &ReducedState<T>, m: Mass<T>, v: &ScalarField<T>) -> T {
    let g = r.grid();
    let n = g.node_count();
    let mut lp = vec![T::zero(); n];
    let mut lq = vec![T::zero(); n];
    g.laplacian_acc(T::one(), r.p.values(), &mut lp);
    g.laplacian_acc(T::one(), r.q.values(), &mut lq);
    let k = T::one() / (T::lit(2.0) * m.value());
    let pot = potential_term(g, v, r.p.values(), r.q.values());
    T::lit(0.5) * (pot - k * (g.quadrature(r.p.values(), &lp) + g.quadrature(r.q.values(), &lq)))
}

/// `∫ ½(p ∂_t q − q ∂_t p)` with `rdot` holding `(∂_t p, ∂_t q)`.
pub fn hamiltonian_flux_form<T: Real>(r: &ReducedState<T>, rdot: &ReducedState<T>) -> T {
    let g = r.grid();
    T::lit(0.5) * (g.quadrature(r.p.values(), rdot.q.values()) - g.quadrature(r.q.values(), rdot.p.values()))
}

/// `Re ∫ ψ* (−∂²/(2m) + V) ψ`
pub fn energy_expectation<T: Real>(w: &WaveFunction<T>, m: Mass<T>, v: &ScalarField<T>) -> T {
    let g = w.grid();
    let k = -T::one() / (T::lit(2.0) * m.value());
    let apply = |f: &[T]| -> Vec<T> {
        let mut out: Vec<T> = f.iter().zip(v.values()).map(|(&a, &b)| a * b).collect();
        g.laplacian_acc(k, f, &mut out);
        out
    };
    let h_re = apply(w.re.values());
    let h_im = apply(w.im.values());
    // the imaginary cross terms cancel because the operator is real symmetric
    g.quadrature(w.re.values(), &h_re) + g.quadrature(w.im.values(), &h_im)
}

/// `sqrt(∫ (Δp² + Δq²))`
pub fn l2_distance<T: Real>(a: &ReducedState<T>, b: &ReducedState<T>) -> Result<T> {
    if !a.p.compatible(&b.p) {
        return Err(Error::GridMismatch);
    }
    let dp = &a.p - &b.p;
    let dq = &a.q - &b.q;
    let g = a.grid();
    Ok((g.quadrature(dp.values(), dp.values()) + g.quadrature(dq.values(), dq.values())).sqrt())
}

/// Second central moment of `|ψ|²` along each axis (the packet width squared).
pub fn packet_width_sq<T: Real>(r: &ReducedState<T>) -> Vec<T> {
    let g = r.grid();
    let dim = g.dim();
    let density: Vec<T> = r
        .p
        .values()
        .iter()
        .zip(r.q.values())
        .map(|(&p, &q)| T::lit(0.5) * (p * p + q * q))
        .collect();
    let total: T = density.iter().copied().sum();
    let mut mean = vec![T::zero(); dim];
    for (i, &d) in density.iter().enumerate() {
        let x = g.node_position(i);
        for j in 0..dim {
            mean[j] += d * x[j];
        }
    }
    mean.iter_mut().for_each(|m| *m /= total);
    let mut var = vec![T::zero(); dim];
    for (i, &d) in density.iter().enumerate() {
        let x = g.node_position(i);
        for j in 0..dim {
            var[j] += d * (x[j] - mean[j]) * (x[j] - mean[j]);
        }
    }
    var.iter_mut().for_each(|v| *v /= total);
    var
}
