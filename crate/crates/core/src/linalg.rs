//! Matrix-free Krylov solvers and symmetric eigensolvers.
//!
//! Operators are passed as closures `apply(x, y)` writing `y = A x`. All
//! vectors are plain slices; callers own any quadrature weighting.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::scalar::{axpy, dot, norm2, scale, Real};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolveStats {
    pub iterations: usize,
    /// Final relative residual `‖b − A x‖ / ‖b‖`.
    pub residual: f64,
}

/// Conjugate gradients for symmetric positive definite `A`; `x` holds the initial guess.
pub fn conjugate_gradient<T: Real>(
    mut apply: impl FnMut(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let mut r = vec![T::zero(); n];
    apply(x, &mut r);
    for (ri, &bi) in r.iter_mut().zip(b) {
        *ri = bi - *ri;
    }
    let mut rr = dot(&r, &r);
    let target = tol * bnorm;
    if rr.sqrt() <= target {
        return Ok(SolveStats {
            iterations: 0,
            residual: (rr.sqrt() / bnorm).as_f64(),
        });
    }
    let mut d = r.clone();
    let mut ad = vec![T::zero(); n];
    for it in 1..=max_iter {
        apply(&d, &mut ad);
        let dad = dot(&d, &ad);
        if dad <= T::zero() {
            return Err(Error::SolverNotConverged {
                iterations: it,
                residual: (rr.sqrt() / bnorm).as_f64(),
            });
        }
        let alpha = rr / dad;
        axpy(alpha, &d, x);
        axpy(-alpha, &ad, &mut r);
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= target {
            return Ok(SolveStats {
                iterations: it,
                residual: (rr_new.sqrt() / bnorm).as_f64(),
            });
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for (di, &ri) in d.iter_mut().zip(&r) {
            *di = ri + beta * *di;
        }
    }
    Err(Error::SolverNotConverged {
        iterations: max_iter,
        residual: (rr.sqrt() / bnorm).as_f64(),
    })
}

/// Restarted GMRES with modified Gram–Schmidt Arnoldi and Givens rotations.
pub fn gmres<T: Real>(
    mut apply: impl FnMut(&[T], &mut [T]),
    b: &[T],
    x: &mut [T],
    tol: T,
    max_iter: usize,
    restart: usize,
) -> Result<SolveStats> {
    let n = b.len();
    let restart = restart.max(1).min(n.max(1));
    let bnorm = norm2(b);
    if bnorm == T::zero() {
        x.iter_mut().for_each(|v| *v = T::zero());
        return Ok(SolveStats {
            iterations: 0,
            residual: 0.0,
        });
    }
    let target = tol * bnorm;
    let mut r = vec![T::zero(); n];
    let mut w = vec![T::zero(); n];
    let mut basis: Vec<Vec<T>> = Vec::with_capacity(restart + 1);
    let mut h = vec![T::zero(); (restart + 1) * restart];
    let mut cs = vec![T::zero(); restart];
    let mut sn = vec![T::zero(); restart];
    let mut g = vec![T::zero(); restart + 1];
    let mut total = 0;
    let mut rel;

    loop {
        apply(x, &mut r);
        for (ri, &bi) in r.iter_mut().zip(b) {
            *ri = bi - *ri;
        }
        let beta = norm2(&r);
        rel = beta / bnorm;
        if beta <= target {
            return Ok(SolveStats {
                iterations: total,
                residual: rel.as_f64(),
            });
        }
        if total >= max_iter {
            return Err(Error::SolverNotConverged {
                iterations: total,
                residual: rel.as_f64(),
            });
        }
        basis.clear();
        let mut v0 = r.clone();
        scale(T::one() / beta, &mut v0);
        basis.push(v0);
        g.iter_mut().for_each(|v| *v = T::zero());
        g[0] = beta;
        let mut k = 0;
        while k < restart && total < max_iter {
            apply(&basis[k], &mut w);
            for i in 0..=k {
                let hik = dot(&w, &basis[i]);
                h[i * restart + k] = hik;
                axpy(-hik, &basis[i], &mut w);
            }
            let hnext = norm2(&w);
            h[(k + 1) * restart + k] = hnext;
            for i in 0..k {
                let a = h[i * restart + k];
                let c = h[(i + 1) * restart + k];
                h[i * restart + k] = cs[i] * a + sn[i] * c;
                h[(i + 1) * restart + k] = -sn[i] * a + cs[i] * c;
            }
            let a = h[k * restart + k];
            let c = h[(k + 1) * restart + k];
            let denom = a.hypot(c);
            if denom == T::zero() {
                cs[k] = T::one();
                sn[k] = T::zero();
            } else {
                cs[k] = a / denom;
                sn[k] = c / denom;
            }
            h[k * restart + k] = denom;
            h[(k + 1) * restart + k] = T::zero();
            g[k + 1] = -sn[k] * g[k];
            g[k] = cs[k] * g[k];
            total += 1;
            k += 1;
            let est = g[k].abs();
            if est <= target || hnext == T::zero() {
                break;
            }
            let mut next = w.clone();
            scale(T::one() / hnext, &mut next);
            basis.push(next);
        }
        // back substitution on the k × k upper triangle
        let mut y = vec![T::zero(); k];
        for i in (0..k).rev() {
            let mut s = g[i];
            for j in i + 1..k {
                s -= h[i * restart + j] * y[j];
            }
            y[i] = s / h[i * restart + i];
        }
        for (i, &yi) in y.iter().enumerate() {
            axpy(yi, &basis[i], x);
        }
    }
}

/// Dense symmetric eigendecomposition of a row-major `n × n` matrix.
///
/// Returns eigenvalues ascending and the matching orthonormal eigenvectors
/// (one `Vec` per eigenvalue). Householder tridiagonalisation followed by
/// implicit QL.
pub fn symmetric_eigen<T: Real>(n: usize, a: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    assert_eq!(a.len(), n * n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v = a.to_vec();
    let mut d = vec![T::zero(); n];
    let mut e = vec![T::zero(); n];
    tred2(n, &mut v, &mut d, &mut e);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(collect_sorted(n, &v, &d))
}

/// Eigen-decomposition of the symmetric tridiagonal matrix with diagonal
/// `diag` and off-diagonal `off` (`off[i]` couples `i` and `i + 1`).
pub fn tridiagonal_eigen<T: Real>(diag: &[T], off: &[T]) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    let n = diag.len();
    assert!(n == 0 || off.len() + 1 >= n);
    if n == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    let mut v = vec![T::zero(); n * n];
    for i in 0..n {
        v[i * n + i] = T::one();
    }
    let mut d = diag.to_vec();
    let mut e = vec![T::zero(); n];
    e[1..n].copy_from_slice(&off[..n - 1]);
    tql2(n, &mut v, &mut d, &mut e)?;
    Ok(collect_sorted(n, &v, &d))
}

fn collect_sorted<T: Real>(n: usize, v: &[T], d: &[T]) -> (Vec<T>, Vec<Vec<T>>) {
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| d[i].partial_cmp(&d[j]).unwrap_or(std::cmp::Ordering::Equal));
    let values = order.iter().map(|&i| d[i]).collect();
    let vectors = order.iter().map(|&i| v[i * n..(i + 1) * n].to_vec()).collect();
    (values, vectors)
}

// Householder reduction to tridiagonal form (EISPACK tred2 as laid out in JAMA).
// `v` is held transposed so the inner loops run along contiguous rows; on
// return row `i` of `v` is the `i`-th column of the orthogonal factor.
fn tred2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) {
    let idx = |r: usize, c: usize| c * n + r;
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
    }
    for i in (1..n).rev() {
        let mut scale_sum = T::zero();
        let mut h = T::zero();
        for &dk in d.iter().take(i) {
            scale_sum += dk.abs();
        }
        if scale_sum == T::zero() {
            e[i] = d[i - 1];
            for j in 0..i {
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
                v[idx(j, i)] = T::zero();
            }
        } else {
            for dk in d.iter_mut().take(i) {
                *dk /= scale_sum;
                h += *dk * *dk;
            }
            let mut f = d[i - 1];
            let mut g = h.sqrt();
            if f > T::zero() {
                g = -g;
            }
            e[i] = scale_sum * g;
            h -= f * g;
            d[i - 1] = f - g;
            for ej in e.iter_mut().take(i) {
                *ej = T::zero();
            }
            for j in 0..i {
                f = d[j];
                v[idx(j, i)] = f;
                g = e[j] + v[idx(j, j)] * f;
                for k in j + 1..i {
                    g += v[idx(k, j)] * d[k];
                    e[k] += v[idx(k, j)] * f;
                }
                e[j] = g;
            }
            f = T::zero();
            for j in 0..i {
                e[j] /= h;
                f += e[j] * d[j];
            }
            let hh = f / (h + h);
            for j in 0..i {
                e[j] -= hh * d[j];
            }
            for j in 0..i {
                f = d[j];
                g = e[j];
                for k in j..i {
                    let upd = f * e[k] + g * d[k];
                    v[idx(k, j)] -= upd;
                }
                d[j] = v[idx(i - 1, j)];
                v[idx(i, j)] = T::zero();
            }
        }
        d[i] = h;
    }
    for i in 0..n - 1 {
        v[idx(n - 1, i)] = v[idx(i, i)];
        v[idx(i, i)] = T::one();
        let h = d[i + 1];
        if h != T::zero() {
            for k in 0..=i {
                d[k] = v[idx(k, i + 1)] / h;
            }
            for j in 0..=i {
                let mut g = T::zero();
                for k in 0..=i {
                    g += v[idx(k, i + 1)] * v[idx(k, j)];
                }
                for k in 0..=i {
                    let upd = g * d[k];
                    v[idx(k, j)] -= upd;
                }
            }
        }
        for k in 0..=i {
            v[idx(k, i + 1)] = T::zero();
        }
    }
    for j in 0..n {
        d[j] = v[idx(n - 1, j)];
        v[idx(n - 1, j)] = T::zero();
    }
    v[idx(n - 1, n - 1)] = T::one();
    e[0] = T::zero();
}

// Implicit QL on the tridiagonal (d, e) accumulating rotations into the rows of v.
fn tql2<T: Real>(n: usize, v: &mut [T], d: &mut [T], e: &mut [T]) -> Result<()> {
    for i in 1..n {
        e[i - 1] = e[i];
    }
    e[n - 1] = T::zero();
    let mut f = T::zero();
    let mut tst1 = T::zero();
    let eps = T::epsilon();
    let max_sweeps = 30 * n.max(1);
    for l in 0..n {
        tst1 = tst1.max(d[l].abs() + e[l].abs());
        let mut m = l;
        while m < n {
            if e[m].abs() <= eps * tst1 {
                break;
            }
            m += 1;
        }
        if m > l {
            let mut iter = 0;
            loop {
                iter += 1;
                if iter > max_sweeps {
                    return Err(Error::EigenNotConverged(format!(
                        "QL iteration stalled at eigenvalue {l}"
                    )));
                }
                let mut g = d[l];
                let mut p = (d[l + 1] - g) / (T::lit(2.0) * e[l]);
                let mut r = p.hypot(T::one());
                if p < T::zero() {
                    r = -r;
                }
                d[l] = e[l] / (p + r);
                d[l + 1] = e[l] * (p + r);
                let dl1 = d[l + 1];
                let mut h = g - d[l];
                for di in d.iter_mut().skip(l + 2) {
                    *di -= h;
                }
                f += h;
                p = d[m];
                let mut c = T::one();
                let mut c2 = c;
                let mut c3 = c;
                let el1 = e[l + 1];
                let mut s = T::zero();
                let mut s2 = T::zero();
                for i in (l..m).rev() {
                    c3 = c2;
                    c2 = c;
                    s2 = s;
                    g = c * e[i];
                    h = c * p;
                    r = p.hypot(e[i]);
                    e[i + 1] = s * r;
                    s = e[i] / r;
                    c = p / r;
                    p = c * d[i] - s * g;
                    d[i + 1] = h + s * (c * g + s * d[i]);
                    let (lo, hi) = v.split_at_mut((i + 1) * n);
                    for (vk, hk) in lo[i * n..].iter_mut().zip(&mut hi[..n]) {
                        let (a, b) = (*vk, *hk);
                        *hk = s * a + c * b;
                        *vk = c * a - s * b;
                    }
                }
                p = -s * s2 * c3 * el1 * e[l] / dl1;
                e[l] = s * p;
                d[l] = c * p;
                if e[l].abs() <= eps * tst1 {
                    break;
                }
            }
        }
        d[l] += f;
        e[l] = T::zero();
    }
    Ok(())
}

#[derive(Clone, Debug)]
pub struct LanczosOptions {
    /// Largest Krylov subspace built in one run.
    pub max_subspace: usize,
    /// Number of locking runs before giving up.
    pub max_runs: usize,
    /// Seed for the start vectors.
    pub seed: u64,
    /// Ritz values closer than this are treated as one degenerate block.
    pub degeneracy_tol: f64,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        LanczosOptions {
            max_subspace: 600,
            max_runs: 64,
            seed: 0x5eed,
            degeneracy_tol: 1e-9,
        }
    }
}

/// The `k` algebraically smallest eigenpairs of a symmetric operator of size `n`.
///
/// Lanczos with full reorthogonalisation. Converged Ritz pairs are locked
/// and further runs search the orthogonal complement, which recovers every
/// copy of a degenerate eigenvalue. Stops once the complement's lowest
/// eigenvalue is not below the current `k`-th value.
pub fn lanczos_lowest<T: Real>(
    n: usize,
    k: usize,
    mut apply: impl FnMut(&[T], &mut [T]),
    tol: T,
    opts: &LanczosOptions,
) -> Result<(Vec<T>, Vec<Vec<T>>)> {
    if k == 0 {
        return Ok((Vec::new(), Vec::new()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("requested {k} eigenpairs of an operator of size {n}")));
    }
    let mut locked: Vec<(T, Vec<T>)> = Vec::new();
    let degeneracy = T::lit(opts.degeneracy_tol);
    for run in 0..opts.max_runs {
        let want = if locked.len() >= k { 1 } else { k - locked.len() };
        let space = n - locked.len();
        if space == 0 {
            break;
        }
        let basis_vecs: Vec<&Vec<T>> = locked.iter().map(|(_, v)| v).collect();
        let found = lanczos_run(n, want, space, &mut apply, tol, opts, run as u64, &basis_vecs)?;
        if found.is_empty() {
            return Err(Error::EigenNotConverged(format!(
                "no Ritz pair converged within a {}-dimensional Krylov space",
                opts.max_subspace.min(space)
            )));
        }
        if locked.len() >= k {
            let kth = locked[k - 1].0;
            if found[0].0 >= kth - degeneracy * (T::one() + kth.abs()) {
                break;
            }
        }
        locked.extend(found);
        locked.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        if run + 1 == opts.max_runs {
            return Err(Error::EigenNotConverged("locking runs exhausted".into()));
        }
    }
    locked.truncate(k);
    Ok(locked.into_iter().unzip())
}

#[allow(clippy::too_many_arguments)]
fn lanczos_run<T: Real>(
    n: usize,
    want: usize,
    space: usize,
    apply: &mut impl FnMut(&[T], &mut [T]),
    tol: T,
    opts: &LanczosOptions,
    run: u64,
    locked: &[&Vec<T>],
) -> Result<Vec<(T, Vec<T>)>> {
    let max_dim = opts.max_subspace.min(space).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed.wrapping_add(run));
    let mut v: Vec<T> = (0..n).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
    for _ in 0..2 {
        for u in locked {
            let c = dot(&v, u);
            axpy(-c, u, &mut v);
        }
    }
    let nv = norm2(&v);
    if nv == T::zero() {
        return Ok(Vec::new());
    }
    scale(T::one() / nv, &mut v);

    let mut basis: Vec<Vec<T>> = vec![v];
    let mut alphas: Vec<T> = Vec::new();
    let mut betas: Vec<T> = Vec::new();
    let mut w = vec![T::zero(); n];
    let mut next_check = (2 * want + 10).min(max_dim);

    loop {
        let j = basis.len() - 1;
        apply(&basis[j], &mut w);
        let alpha = dot(&w, &basis[j]);
        axpy(-alpha, &basis[j], &mut w);
        if j > 0 {
            axpy(-betas[j - 1], &basis[j - 1], &mut w);
        }
        for _ in 0..2 {
            for u in basis.iter().chain(locked.iter().copied()) {
                let c = dot(&w, u);
                axpy(-c, u, &mut w);
            }
        }
        alphas.push(alpha);
        let beta = norm2(&w);
        let dim = alphas.len();
        let invariant = beta <= T::epsilon() * T::lit(100.0) * (alpha.abs() + T::one());
        if dim >= next_check || dim == max_dim || invariant {
            let (theta, s) = tridiagonal_eigen(&alphas, &betas)?;
            let mut converged = 0;
            for i in 0..dim.min(want) {
                let est = (beta * s[i][dim - 1]).abs();
                if invariant || est <= T::lit(0.5) * tol * (theta[i].abs() + T::one()) {
                    converged += 1;
                } else {
                    break;
                }
            }
            if converged >= want.min(dim) || dim == max_dim || invariant {
                let mut out = Vec::with_capacity(converged);
                for i in 0..converged {
                    let mut x = vec![T::zero(); n];
                    for (b, &c) in basis.iter().zip(&s[i]) {
                        axpy(c, b, &mut x);
                    }
                    let nx = norm2(&x);
                    scale(T::one() / nx, &mut x);
                    out.push((theta[i], x));
                }
                return Ok(out);
            }
            next_check = (dim + dim / 4 + 5).min(max_dim);
        }
        betas.push(beta);
        let mut nb = w.clone();
        scale(T::one() / beta, &mut nb);
        basis.push(nb);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> Vec<f64> {
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 2.0;
            if i + 1 < n {
                a[i * n + i + 1] = -1.0;
                a[(i + 1) * n + i] = -1.0;
            }
        }
        a
    }

    fn matvec(n: usize, a: &[f64]) -> impl FnMut(&[f64], &mut [f64]) + '_ {
        move |x, y| {
            for i in 0..n {
                y[i] = (0..n).map(|j| a[i * n + j] * x[j]).sum();
            }
        }
    }

    #[test]
    fn dense_eigen_matches_closed_form() {
        let n = 20;
        let a = laplace_1d(n);
        let (vals, vecs) = symmetric_eigen(n, &a).unwrap();
        for (k, &v) in vals.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((k + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((v - exact).abs() < 1e-13);
        }
        for i in 0..n {
            for j in 0..n {
                let d = dot(&vecs[i], &vecs[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn dense_eigen_against_nalgebra() {
        let n = 17;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..=i {
                let v = ((i * 7 + j * 3) % 11) as f64 - 5.0 + if i == j { 0.5 * i as f64 } else { 0.0 };
                a[i * n + j] = v;
                a[j * n + i] = v;
            }
        }
        let (vals, _) = symmetric_eigen(n, &a).unwrap();
        let m = nalgebra::DMatrix::from_row_slice(n, n, &a);
        let mut reference: Vec<f64> = m.symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (x, y) in vals.iter().zip(&reference) {
            assert!((x - y).abs() < 1e-11, "{x} vs {y}");
        }
    }

    #[test]
    fn tridiagonal_eigen_small() {
        let (vals, _) = tridiagonal_eigen(&[2.0_f64, 2.0], &[1.0]).unwrap();
        assert!((vals[0] - 1.0).abs() < 1e-15 && (vals[1] - 3.0).abs() < 1e-15);
        let (vals, vecs) = tridiagonal_eigen(&[4.0], &[]).unwrap();
        assert_eq!(vals, vec![4.0]);
        assert_eq!(vecs, vec![vec![1.0]]);
    }

    #[test]
    fn cg_solves_spd_system() {
        let n = 30;
        let a = laplace_1d(n);
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        let stats = conjugate_gradient(matvec(n, &a), &b, &mut x, 1e-13, 200).unwrap();
        assert!(stats.residual <= 1e-13);
        let mut ax = vec![0.0; n];
        matvec(n, &a)(&x, &mut ax);
        for (u, v) in ax.iter().zip(&b) {
            assert!((u - v).abs() < 1e-11);
        }
        let mut x = vec![0.0; n];
        assert!(matches!(
            conjugate_gradient(matvec(n, &a), &b, &mut x, 1e-13, 2),
            Err(Error::SolverNotConverged { .. })
        ));
    }

    #[test]
    fn gmres_solves_nonsymmetric_system() {
        let n = 25;
        let mut a = vec![0.0; n * n];
        for i in 0..n {
            a[i * n + i] = 3.0;
            if i + 1 < n {
                a[i * n + i + 1] = 1.2;
                a[(i + 1) * n + i] = -0.7;
            }
        }
        a[n - 1] = 0.4;
        let b: Vec<f64> = (0..n).map(|i| 1.0 + (i as f64 * 0.3).cos()).collect();
        for restart in [3, 10, 40] {
            let mut x = vec![0.0; n];
            let stats = gmres(matvec(n, &a), &b, &mut x, 1e-13, 500, restart).unwrap();
            assert!(stats.residual <= 1e-13, "restart {restart}: {stats:?}");
            let mut ax = vec![0.0; n];
            matvec(n, &a)(&x, &mut ax);
            for (u, v) in ax.iter().zip(&b) {
                assert!((u - v).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn lanczos_recovers_degenerate_pairs() {
        // periodic ring: eigenvalues 2 - 2cos(2πk/n) with ±k degeneracy
        let n = 60;
        let apply = |x: &[f64], y: &mut [f64]| {
            for i in 0..n {
                y[i] = 2.0 * x[i] - x[(i + 1) % n] - x[(i + n - 1) % n];
            }
        };
        let (vals, vecs) = lanczos_lowest(n, 5, apply, 1e-10, &LanczosOptions::default()).unwrap();
        let mut exact: Vec<f64> = (0..n)
            .map(|k| 2.0 - 2.0 * (2.0 * std::f64::consts::PI * k as f64 / n as f64).cos())
            .collect();
        exact.sort_by(|a, b| a.partial_cmp(b).unwrap());
        for (v, e) in vals.iter().zip(&exact) {
            assert!((v - e).abs() < 1e-9, "{v} vs {e}");
        }
        for i in 0..5 {
            for j in 0..5 {
                let d = dot(&vecs[i], &vecs[j]);
                assert!((d - if i == j { 1.0 } else { 0.0 }).abs() < 1e-8);
            }
        }
    }
}
