//! Jacobi-preconditioned conjugate gradients on the interior dofs.

use super::mesh::{det_sum, Mesh};
use crate::error::{Error, Result};
use crate::scalar::Real;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOptions<T> {
    /// Relative residual target, measured against the residual of the
    /// boundary lift alone.
    pub tol: T,
    pub max_iter: usize,
}

impl<T: Real> Default for CgOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-10), max_iter: 50_000 }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CgStats<T> {
    pub iterations: usize,
    pub residual: T,
    /// Discrete elastic energy after each iteration, when requested.
    pub energies: Vec<T>,
}

fn dot<T: Real>(a: &[[T; 2]], b: &[[T; 2]]) -> T {
    det_sum(a.len(), |i| a[i][0] * b[i][0] + a[i][1] * b[i][1])
}

/// Elastic energy `½ Σ_c u_eᵀ K_c u_e`.
pub fn elastic_energy<T: Real>(mesh: &Mesh<T>, lam: &[T], mu: &[T], u: &[[T; 2]]) -> T {
    det_sum(mesh.n_cells(), |c| mesh.cell_energy(c, u, lam[c], mu[c]))
}

/// Minimizes the elastic energy over interior nodes with boundary values of
/// `u` held fixed; `u` is the warm start and is overwritten.
pub fn solve<T: Real>(
    mesh: &Mesh<T>,
    lam: &[T],
    mu: &[T],
    u: &mut [[T; 2]],
    opts: CgOptions<T>,
    record: bool,
) -> Result<CgStats<T>> {
    let nn = mesh.n_nodes();
    let free: Vec<bool> = (0..nn).map(|n| !mesh.is_boundary(n)).collect();
    let mask = |v: &mut [[T; 2]]| {
        for (x, &f) in v.iter_mut().zip(&free) {
            if !f {
                *x = [T::zero(); 2];
            }
        }
    };

    // Residual scale: the load produced by the boundary values alone.
    let mut lift: Vec<[T; 2]> = u.to_vec();
    mask_interior(&mut lift, &free);
    let mut b = vec![[T::zero(); 2]; nn];
    mesh.apply(lam, mu, &lift, &mut b);
    mask(&mut b);
    let bnorm = dot(&b, &b).sqrt();

    let mut energies = Vec::new();
    let mut ku = vec![[T::zero(); 2]; nn];
    mesh.apply(lam, mu, u, &mut ku);
    let mut r: Vec<[T; 2]> = ku.iter().map(|g| [-g[0], -g[1]]).collect();
    mask(&mut r);
    let target = opts.tol * bnorm;
    let mut rnorm = dot(&r, &r).sqrt();
    if record {
        energies.push(elastic_energy(mesh, lam, mu, u));
    }
    if rnorm <= target || rnorm == T::zero() {
        return Ok(CgStats { iterations: 0, residual: rel(rnorm, bnorm), energies });
    }

    let diag = mesh.diagonal(lam, mu);
    let precond = |r: &[[T; 2]], z: &mut [[T; 2]]| {
        for ((zi, ri), di) in z.iter_mut().zip(r).zip(&diag) {
            *zi = [ri[0] / di[0], ri[1] / di[1]];
        }
    };
    let mut z = vec![[T::zero(); 2]; nn];
    precond(&r, &mut z);
    mask(&mut z);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let mut q = vec![[T::zero(); 2]; nn];

    for it in 1..=opts.max_iter {
        mesh.apply(lam, mu, &p, &mut q);
        mask(&mut q);
        let pq = dot(&p, &q);
        if !(pq > T::zero()) {
            return Err(Error::NotConverged { iterations: it, residual: rel(rnorm, bnorm).as_f64() });
        }
        let alpha = rz / pq;
        for i in 0..nn {
            for k in 0..2 {
                u[i][k] = u[i][k] + alpha * p[i][k];
                r[i][k] = r[i][k] - alpha * q[i][k];
            }
        }
        rnorm = dot(&r, &r).sqrt();
        if record {
            energies.push(elastic_energy(mesh, lam, mu, u));
        }
        if !rnorm.is_finite() {
            return Err(Error::NonFinite("conjugate gradient residual"));
        }
        if rnorm <= target {
            return Ok(CgStats { iterations: it, residual: rel(rnorm, bnorm), energies });
        }
        precond(&r, &mut z);
        mask(&mut z);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..nn {
            for k in 0..2 {
                p[i][k] = z[i][k] + beta * p[i][k];
            }
        }
    }
    Err(Error::NotConverged { iterations: opts.max_iter, residual: rel(rnorm, bnorm).as_f64() })
}

fn mask_interior<T: Real>(v: &mut [[T; 2]], free: &[bool]) {
    for (x, &f) in v.iter_mut().zip(free) {
        if f {
            *x = [T::zero(); 2];
        }
    }
}

fn rel<T: Real>(r: T, b: T) -> T {
    if b > T::zero() {
        r / b
    } else {
        r
    }
}
