//! Discrete alternating minimization of the two-phase damage energy on a
//! rectangular grid of bilinear elements.
//!
//! The energy of a state `(u, χ)` is
//! `½ Σ_c ∫_c [χ_c A_weak + (1−χ_c) A_s] e(u):e(u) + dissipation · |D|`,
//! where `A_weak = η_ε A_w` in the Hencky family and `A_w^ε` in the Tresca
//! family. Displacements are minimized by CG with boundary values fixed;
//! damage is minimized cell by cell in closed form.

pub mod cg;
pub mod mesh;
pub mod sweep;

pub use cg::{CgOptions, CgStats};
pub use mesh::Mesh;
pub use sweep::{regime_sweep, tresca_sweep, Init, Regime, RegimeReport, RegimeRow, SweepConfig};

use crate::densities::{check_eps, tresca_weak_tensor, ModelParams};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symcalc::{IsoTensor, SymMat};
use mesh::det_sum;

/// Dirichlet data on the whole boundary.
#[derive(Clone, Debug, PartialEq)]
pub enum BoundaryData<T> {
    /// `u(x) = grad · x + offset`.
    Affine { grad: [[T; 2]; 2], offset: [T; 2] },
    /// `u(x) = (φ_1(x_1) , φ_2(x_2))` sampled at the grid lines:
    /// `first[i] = φ_1(i hx)`, `second[j] = φ_2(j hy)`.
    Profiles { first: Vec<T>, second: Vec<T> },
}

impl<T: Real> BoundaryData<T> {
    /// `u = ξx` for a symmetric 2×2 `ξ`.
    pub fn affine(xi: &SymMat<T>) -> Result<Self> {
        if xi.dim() != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: xi.dim() });
        }
        Ok(Self::Affine {
            grad: [[xi.get(0, 0), xi.get(0, 1)], [xi.get(1, 0), xi.get(1, 1)]],
            offset: [T::zero(); 2],
        })
    }

    fn value(&self, mesh: &Mesh<T>, n: usize) -> [T; 2] {
        match self {
            Self::Affine { grad, offset } => {
                let [x, y] = mesh.node_coords(n);
                [grad[0][0] * x + grad[0][1] * y + offset[0], grad[1][0] * x + grad[1][1] * y + offset[1]]
            }
            Self::Profiles { first, second } => {
                let i = n % (mesh.nx + 1);
                let j = n / (mesh.nx + 1);
                [first[i], second[j]]
            }
        }
    }
}

/// Displacement, damage and boundary data on a grid.
#[derive(Clone, Debug, PartialEq)]
pub struct GridState<T> {
    pub mesh: Mesh<T>,
    /// Node-valued displacement.
    pub u: Vec<[T; 2]>,
    /// Per-cell damage indicator, 0 or 1.
    pub damage: Vec<u8>,
    pub bc: BoundaryData<T>,
}

impl<T: Real> GridState<T> {
    /// Undamaged state on `[0, lx] × [0, ly]` with `u` initialized to the
    /// boundary data extended into the interior.
    pub fn new(nx: usize, ny: usize, lx: T, ly: T, bc: BoundaryData<T>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter { name: "grid", reason: "need at least one cell per axis".into() });
        }
        if !(lx > T::zero() && ly > T::zero() && lx.is_finite() && ly.is_finite()) {
            return Err(Error::InvalidParameter { name: "grid", reason: "side lengths must be positive".into() });
        }
        if let BoundaryData::Profiles { first, second } = &bc {
            if first.len() != nx + 1 {
                return Err(Error::DimensionMismatch { expected: nx + 1, got: first.len() });
            }
            if second.len() != ny + 1 {
                return Err(Error::DimensionMismatch { expected: ny + 1, got: second.len() });
            }
        }
        let mesh = Mesh::new(nx, ny, lx, ly);
        let u = (0..mesh.n_nodes()).map(|n| bc.value(&mesh, n)).collect();
        let damage = vec![0; mesh.n_cells()];
        Ok(Self { mesh, u, damage, bc })
    }

    /// Unit square with affine data `u = ξx`.
    pub fn unit_square(nx: usize, ny: usize, xi: &SymMat<T>) -> Result<Self> {
        Self::new(nx, ny, T::one(), T::one(), BoundaryData::affine(xi)?)
    }

    pub fn area(&self) -> T {
        T::from_count(self.mesh.nx) * self.mesh.hx * T::from_count(self.mesh.ny) * self.mesh.hy
    }

    pub fn damaged_volume(&self) -> T {
        T::from_count(self.damage.iter().filter(|&&d| d == 1).count()) * self.mesh.cell_area()
    }

    /// Writes the boundary data into `u`.
    pub fn apply_bc(&mut self) {
        for n in 0..self.mesh.n_nodes() {
            if self.mesh.is_boundary(n) {
                self.u[n] = self.bc.value(&self.mesh, n);
            }
        }
    }

    pub fn set_damage(&mut self, damage: Vec<u8>) -> Result<()> {
        if damage.len() != self.mesh.n_cells() {
            return Err(Error::DimensionMismatch { expected: self.mesh.n_cells(), got: damage.len() });
        }
        if damage.iter().any(|&d| d > 1) {
            return Err(Error::InvalidParameter { name: "damage", reason: "entries must be 0 or 1".into() });
        }
        self.damage = damage;
        Ok(())
    }
}

/// Phase moduli and dissipation of one functional at one `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CellModel<T> {
    pub weak: IsoTensor<T>,
    pub strong: IsoTensor<T>,
    /// `κ/ε`, paid per unit damaged area.
    pub dissipation: T,
}

impl<T: Real> CellModel<T> {
    /// `A_weak = η_ε A_w`.
    pub fn hencky(p: &ModelParams<T>, eps: T) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { weak: p.a_w.scaled(p.eta(eps)), strong: p.a_s, dissipation: p.kappa / eps })
    }

    /// `A_weak = A_w^ε = (λ_w, εμ_w)`.
    pub fn tresca(p: &ModelParams<T>, eps: T) -> Result<Self> {
        check_eps(eps)?;
        Ok(Self { weak: tresca_weak_tensor(p, eps), strong: p.a_s, dissipation: p.kappa / eps })
    }

    fn coefficients(&self, damage: &[u8]) -> (Vec<T>, Vec<T>) {
        damage
            .iter()
            .map(|&d| if d == 1 { (self.weak.lambda, self.weak.mu) } else { (self.strong.lambda, self.strong.mu) })
            .unzip()
    }
}

/// Minimizes the elastic energy in `u` at fixed damage.
pub fn elastic_solve<T: Real>(state: &mut GridState<T>, model: &CellModel<T>, opts: CgOptions<T>) -> Result<CgStats<T>> {
    state.apply_bc();
    let (lam, mu) = model.coefficients(&state.damage);
    cg::solve(&state.mesh, &lam, &mu, &mut state.u, opts, false)
}

/// Same as [`elastic_solve`], also recording the energy after every CG step.
pub fn elastic_solve_traced<T: Real>(
    state: &mut GridState<T>,
    model: &CellModel<T>,
    opts: CgOptions<T>,
) -> Result<CgStats<T>> {
    state.apply_bc();
    let (lam, mu) = model.coefficients(&state.damage);
    cg::solve(&state.mesh, &lam, &mu, &mut state.u, opts, true)
}

/// `∫_c (A_s − A_weak) e:e / |c|`, i.e. the Gauss average of the pointwise
/// energy released by damaging the cell, times two.
fn release_density<T: Real>(state: &GridState<T>, model: &CellModel<T>, c: usize) -> T {
    let diff = IsoTensor::effective(model.strong.lambda - model.weak.lambda, model.strong.mu - model.weak.mu);
    let mut s = T::zero();
    for e in state.mesh.gauss_strains(c, &state.u) {
        let tr = e[0] + e[1];
        let ee = e[0] * e[0] + e[1] * e[1] + T::lit(2.0) * e[2] * e[2];
        s = s + diff.lambda * tr * tr + T::lit(2.0) * diff.mu * ee;
    }
    s / T::lit(4.0)
}

/// Optimal damage at fixed `u`: a cell is damaged iff the averaged release
/// density reaches `2κ/ε`.
pub fn damage_update<T: Real>(state: &GridState<T>, model: &CellModel<T>) -> Vec<u8> {
    use rayon::prelude::*;
    let threshold = T::lit(2.0) * model.dissipation;
    (0..state.mesh.n_cells())
        .into_par_iter()
        .map(|c| u8::from(release_density(state, model, c) >= threshold))
        .collect()
}

/// Total energy of the state, dissipation included.
pub fn total_energy<T: Real>(state: &GridState<T>, model: &CellModel<T>) -> T {
    let area = state.mesh.cell_area();
    det_sum(state.mesh.n_cells(), |c| {
        let (l, m, d) = if state.damage[c] == 1 {
            (model.weak.lambda, model.weak.mu, model.dissipation * area)
        } else {
            (model.strong.lambda, model.strong.mu, T::zero())
        };
        state.mesh.cell_energy(c, &state.u, l, m) + d
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AmOptions<T> {
    /// Stop once the relative energy decrease of an iteration falls below this.
    pub tol: T,
    pub max_iter: usize,
    pub cg: CgOptions<T>,
    /// Keep the initial damage and perform a single elastic solve.
    pub freeze_damage: bool,
}

impl<T: Real> Default for AmOptions<T> {
    fn default() -> Self {
        Self { tol: T::lit(1e-8), max_iter: 200, cg: CgOptions::default(), freeze_damage: false }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct AmOutcome<T> {
    /// Energy after each elastic solve.
    pub trace: Vec<T>,
    pub iterations: usize,
    pub converged: bool,
    pub cg_iterations: usize,
}

/// Alternates elastic solves and damage updates from the current state.
///
/// The state is left at the lowest-energy iterate. Hitting `max_iter`
/// returns normally with `converged = false`.
pub fn alternate_minimize<T: Real>(
    state: &mut GridState<T>,
    model: &CellModel<T>,
    opts: AmOptions<T>,
) -> Result<AmOutcome<T>> {
    let mut cg_iterations = elastic_solve(state, model, opts.cg)?.iterations;
    let mut energy = total_energy(state, model);
    let mut trace = vec![energy];
    if opts.freeze_damage {
        return Ok(AmOutcome { trace, iterations: 0, converged: true, cg_iterations });
    }
    let mut best = (energy, state.u.clone(), state.damage.clone());
    for it in 1..=opts.max_iter {
        let next = damage_update(state, model);
        if next == state.damage {
            return Ok(AmOutcome { trace, iterations: it - 1, converged: true, cg_iterations });
        }
        state.damage = next;
        cg_iterations += elastic_solve(state, model, opts.cg)?.iterations;
        let e = total_energy(state, model);
        trace.push(e);
        let decrease = energy - e;
        if e < best.0 {
            best = (e, state.u.clone(), state.damage.clone());
        }
        energy = e;
        if decrease <= opts.tol * e.abs() {
            restore(state, best);
            return Ok(AmOutcome { trace, iterations: it, converged: true, cg_iterations });
        }
    }
    restore(state, best);
    Ok(AmOutcome { trace, iterations: opts.max_iter, converged: false, cg_iterations })
}

fn restore<T: Real>(state: &mut GridState<T>, best: (T, Vec<[T; 2]>, Vec<u8>)) {
    state.u = best.1;
    state.damage = best.2;
}
