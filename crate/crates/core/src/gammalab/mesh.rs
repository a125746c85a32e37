//! Bilinear quadrilateral discretization of a rectangle with per-cell
//! isotropic moduli, evaluated matrix-free.
//!
//! Local node order within a cell is `(0,0), (1,0), (1,1), (0,1)` and local
//! dofs interleave components: `[u0x, u0y, u1x, u1y, …]`. A cell stiffness is
//! `λ_c K_λ + μ_c K_μ` with the two reference matrices computed once by 2×2
//! Gauss quadrature, which is exact for bilinear fields.

use rayon::prelude::*;

use crate::scalar::Real;

/// Chunk length for deterministic parallel reductions.
pub(crate) const CHUNK: usize = 1024;

/// Sum of `f(i)` over `0..n`, grouped in fixed chunks so the result does not
/// depend on the thread count.
pub(crate) fn det_sum<T: Real>(n: usize, f: impl Fn(usize) -> T + Sync) -> T {
    let chunks = n.div_ceil(CHUNK);
    let partial: Vec<T> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let lo = c * CHUNK;
            let hi = (lo + CHUNK).min(n);
            let mut s = T::zero();
            for i in lo..hi {
                s = s + f(i);
            }
            s
        })
        .collect();
    partial.into_iter().fold(T::zero(), |a, b| a + b)
}

/// Strain operator at one Gauss point: rows `e11`, `e22`, `e12`.
pub(crate) type StrainRows<T> = [[T; 8]; 3];

#[derive(Clone, Debug, PartialEq)]
pub struct Mesh<T> {
    pub nx: usize,
    pub ny: usize,
    pub hx: T,
    pub hy: T,
    pub(crate) k_lambda: [[T; 8]; 8],
    pub(crate) k_mu: [[T; 8]; 8],
    pub(crate) gauss: [StrainRows<T>; 4],
}

impl<T: Real> Mesh<T> {
    /// `nx × ny` cells on `[0, lx] × [0, ly]`.
    pub fn new(nx: usize, ny: usize, lx: T, ly: T) -> Self {
        let hx = lx / T::from_count(nx);
        let hy = ly / T::from_count(ny);
        let g = T::one() / T::lit(3.0).sqrt();
        let pts = [(-g, -g), (g, -g), (g, g), (-g, g)];
        let corners = [(-1.0, -1.0), (1.0, -1.0), (1.0, 1.0), (-1.0, 1.0)];
        let detj = hx * hy / T::lit(4.0);
        let half = T::lit(0.5);
        let mut k_lambda = [[T::zero(); 8]; 8];
        let mut k_mu = [[T::zero(); 8]; 8];
        let mut gauss = [[[T::zero(); 8]; 3]; 4];
        for (q, &(xi, et)) in pts.iter().enumerate() {
            let mut b = [[T::zero(); 8]; 3];
            let mut div = [T::zero(); 8];
            for (a, &(ca, cb)) in corners.iter().enumerate() {
                let (ca, cb) = (T::lit(ca), T::lit(cb));
                let dx = ca * (T::one() + cb * et) / T::lit(4.0) * T::lit(2.0) / hx;
                let dy = cb * (T::one() + ca * xi) / T::lit(4.0) * T::lit(2.0) / hy;
                b[0][2 * a] = dx;
                b[1][2 * a + 1] = dy;
                b[2][2 * a] = half * dy;
                b[2][2 * a + 1] = half * dx;
                div[2 * a] = dx;
                div[2 * a + 1] = dy;
            }
            for i in 0..8 {
                for j in 0..8 {
                    k_lambda[i][j] = k_lambda[i][j] + detj * div[i] * div[j];
                    let ee = b[0][i] * b[0][j] + b[1][i] * b[1][j] + T::lit(2.0) * b[2][i] * b[2][j];
                    k_mu[i][j] = k_mu[i][j] + detj * T::lit(2.0) * ee;
                }
            }
            gauss[q] = b;
        }
        Self { nx, ny, hx, hy, k_lambda, k_mu, gauss }
    }

    pub fn n_nodes(&self) -> usize {
        (self.nx + 1) * (self.ny + 1)
    }

    pub fn n_cells(&self) -> usize {
        self.nx * self.ny
    }

    pub fn cell_area(&self) -> T {
        self.hx * self.hy
    }

    #[inline]
    pub fn node(&self, i: usize, j: usize) -> usize {
        j * (self.nx + 1) + i
    }

    pub fn node_coords(&self, n: usize) -> [T; 2] {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        [T::from_count(i) * self.hx, T::from_count(j) * self.hy]
    }

    pub fn cell_center(&self, c: usize) -> [T; 2] {
        let i = c % self.nx;
        let j = c / self.nx;
        let half = T::lit(0.5);
        [(T::from_count(i) + half) * self.hx, (T::from_count(j) + half) * self.hy]
    }

    pub fn is_boundary(&self, n: usize) -> bool {
        let i = n % (self.nx + 1);
        let j = n / (self.nx + 1);
        i == 0 || j == 0 || i == self.nx || j == self.ny
    }

    /// Global node indices of a cell in local order.
    #[inline]
    pub fn cell_nodes(&self, c: usize) -> [usize; 4] {
        let i = c % self.nx;
        let j = c / self.nx;
        [self.node(i, j), self.node(i + 1, j), self.node(i + 1, j + 1), self.node(i, j + 1)]
    }

    #[inline]
    pub(crate) fn gather(&self, c: usize, u: &[[T; 2]]) -> [T; 8] {
        let nodes = self.cell_nodes(c);
        let mut ue = [T::zero(); 8];
        for (a, &n) in nodes.iter().enumerate() {
            ue[2 * a] = u[n][0];
            ue[2 * a + 1] = u[n][1];
        }
        ue
    }

    /// Strains `(e11, e22, e12)` at the four Gauss points of a cell.
    pub fn gauss_strains(&self, c: usize, u: &[[T; 2]]) -> [[T; 3]; 4] {
        let ue = self.gather(c, u);
        let mut out = [[T::zero(); 3]; 4];
        for (q, b) in self.gauss.iter().enumerate() {
            for r in 0..3 {
                out[q][r] = (0..8).map(|k| b[r][k] * ue[k]).sum();
            }
        }
        out
    }

    /// `½ u_eᵀ(λ K_λ + μ K_μ)u_e` for one cell.
    pub fn cell_energy(&self, c: usize, u: &[[T; 2]], lambda: T, mu: T) -> T {
        let ue = self.gather(c, u);
        let mut s = T::zero();
        for i in 0..8 {
            let mut row = T::zero();
            for j in 0..8 {
                row = row + (lambda * self.k_lambda[i][j] + mu * self.k_mu[i][j]) * ue[j];
            }
            s = s + ue[i] * row;
        }
        T::lit(0.5) * s
    }

    /// `y = K u` for per-cell moduli, assembled node by node (deterministic).
    pub fn apply(&self, lam: &[T], mu: &[T], u: &[[T; 2]], y: &mut [[T; 2]]) {
        let nx = self.nx;
        let ny = self.ny;
        y.par_iter_mut().enumerate().for_each(|(n, out)| {
            let i = n % (nx + 1);
            let j = n / (nx + 1);
            let mut acc = [T::zero(); 2];
            // Adjacent cells and this node's local index in each.
            let adj = [
                (i > 0 && j > 0, i.wrapping_sub(1), j.wrapping_sub(1), 2usize),
                (i < nx && j > 0, i, j.wrapping_sub(1), 3),
                (i < nx && j < ny, i, j, 0),
                (i > 0 && j < ny, i.wrapping_sub(1), j, 1),
            ];
            for &(ok, ci, cj, a) in &adj {
                if !ok {
                    continue;
                }
                let c = cj * nx + ci;
                let ue = self.gather(c, u);
                let (l, m) = (lam[c], mu[c]);
                for comp in 0..2 {
                    let row = 2 * a + comp;
                    let mut s = T::zero();
                    for k in 0..8 {
                        s = s + (l * self.k_lambda[row][k] + m * self.k_mu[row][k]) * ue[k];
                    }
                    acc[comp] = acc[comp] + s;
                }
            }
            *out = acc;
        });
    }

    /// Diagonal of `K`.
    pub fn diagonal(&self, lam: &[T], mu: &[T]) -> Vec<[T; 2]> {
        let mut d = vec![[T::zero(); 2]; self.n_nodes()];
        for c in 0..self.n_cells() {
            for (a, &n) in self.cell_nodes(c).iter().enumerate() {
                for comp in 0..2 {
                    let r = 2 * a + comp;
                    d[n][comp] = d[n][comp] + lam[c] * self.k_lambda[r][r] + mu[c] * self.k_mu[r][r];
                }
            }
        }
        d
    }
}
