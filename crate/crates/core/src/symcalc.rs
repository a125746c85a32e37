//! Spectral and tensor algebra on symmetric 2×2 and 3×3 matrices and on
//! isotropic fourth-order (Hooke) tensors.
//!
//! Storage is packed upper-triangular: `(ξ11, ξ22, ξ12)` in two dimensions and
//! `(ξ11, ξ22, ξ33, ξ12, ξ13, ξ23)` in three. Off-diagonal entries appear twice
//! in the full matrix, so the Frobenius product is
//!
//! ```text
//! ξ:η = Σ_i ξ_ii η_ii + 2 Σ_{i<j} ξ_ij η_ij
//! ```
//!
//! and every module goes through [`SymMat::ddot`] for it.

use std::ops::{Add, Mul, Neg, Sub};

use crate::error::{Error, Result};
use crate::linalg::jacobi_eigen;
use crate::scalar::Real;

/// A vector in R² or R³ (unused trailing components are zero).
pub type Vec3<T> = [T; 3];

/// Packed symmetric matrix of dimension 2 or 3.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SymMat<T> {
    dim: usize,
    v: [T; 6],
}

/// Index of `(i, j)` in the packed layout.
#[inline]
fn packed_index(dim: usize, i: usize, j: usize) -> usize {
    let (i, j) = if i <= j { (i, j) } else { (j, i) };
    if i == j {
        return i;
    }
    match (dim, i, j) {
        (2, 0, 1) => 2,
        (3, 0, 1) => 3,
        (3, 0, 2) => 4,
        (3, 1, 2) => 5,
        _ => unreachable!("index ({i}, {j}) out of range for dimension {dim}"),
    }
}

#[inline]
fn packed_len(dim: usize) -> usize {
    if dim == 2 {
        3
    } else {
        6
    }
}

fn check_dim(dim: usize) -> Result<()> {
    if dim == 2 || dim == 3 {
        Ok(())
    } else {
        Err(Error::BadDimension(dim))
    }
}

impl<T: Real> SymMat<T> {
    pub fn zeros(dim: usize) -> Result<Self> {
        check_dim(dim)?;
        Ok(Self { dim, v: [T::zero(); 6] })
    }

    pub fn identity(dim: usize) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        for i in 0..dim {
            m.v[i] = T::one();
        }
        Ok(m)
    }

    /// Builds a matrix from its packed entries (3 values in 2-D, 6 in 3-D).
    pub fn from_packed(packed: &[T]) -> Result<Self> {
        let dim = match packed.len() {
            3 => 2,
            6 => 3,
            n => return Err(Error::BadDimension(n)),
        };
        if packed.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("symmetric matrix entries"));
        }
        let mut v = [T::zero(); 6];
        v[..packed.len()].copy_from_slice(packed);
        Ok(Self { dim, v })
    }

    pub fn from_diag(diag: &[T]) -> Result<Self> {
        let mut m = Self::zeros(diag.len())?;
        m.v[..diag.len()].copy_from_slice(diag);
        Ok(m)
    }

    /// Symmetric part of a full `dim × dim` matrix given row-major.
    pub fn from_full(dim: usize, full: &[[T; 3]; 3]) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        let half = T::lit(0.5);
        for i in 0..dim {
            for j in i..dim {
                m.v[packed_index(dim, i, j)] = half * (full[i][j] + full[j][i]);
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn packed(&self) -> &[T] {
        &self.v[..packed_len(self.dim)]
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.v[packed_index(self.dim, i, j)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, value: T) {
        self.v[packed_index(self.dim, i, j)] = value;
    }

    pub fn to_full(&self) -> [[T; 3]; 3] {
        let mut a = [[T::zero(); 3]; 3];
        for (i, row) in a.iter_mut().enumerate().take(self.dim) {
            for (j, x) in row.iter_mut().enumerate().take(self.dim) {
                *x = self.get(i, j);
            }
        }
        a
    }

    pub fn is_finite(&self) -> bool {
        self.packed().iter().all(|x| x.is_finite())
    }

    pub fn trace(&self) -> T {
        (0..self.dim).map(|i| self.v[i]).sum()
    }

    /// Frobenius product `ξ:η = tr(ξη)`.
    pub fn ddot(&self, other: &Self) -> T {
        debug_assert_eq!(self.dim, other.dim);
        let n = self.dim;
        let two = T::lit(2.0);
        let diag: T = (0..n).map(|i| self.v[i] * other.v[i]).sum();
        let off: T = (n..packed_len(n)).map(|k| self.v[k] * other.v[k]).sum();
        diag + two * off
    }

    pub fn norm(&self) -> T {
        self.ddot(self).sqrt()
    }

    pub fn det(&self) -> T {
        let a = self.to_full();
        if self.dim == 2 {
            a[0][0] * a[1][1] - a[0][1] * a[0][1]
        } else {
            a[0][0] * (a[1][1] * a[2][2] - a[1][2] * a[1][2]) - a[0][1] * (a[0][1] * a[2][2] - a[1][2] * a[0][2])
                + a[0][2] * (a[0][1] * a[1][2] - a[1][1] * a[0][2])
        }
    }

    pub fn scale(&self, s: T) -> Self {
        let mut m = *self;
        for x in m.v.iter_mut() {
            *x = *x * s;
        }
        m
    }

    /// `self + s * other`.
    pub fn axpy(&self, s: T, other: &Self) -> Self {
        debug_assert_eq!(self.dim, other.dim);
        let mut m = *self;
        for (x, y) in m.v.iter_mut().zip(other.v.iter()) {
            *x = *x + s * *y;
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply_vec(&self, x: &Vec3<T>) -> Vec3<T> {
        let a = self.to_full();
        let mut y = [T::zero(); 3];
        for i in 0..self.dim {
            y[i] = (0..self.dim).map(|j| a[i][j] * x[j]).sum();
        }
        y
    }

    /// `R ξ Rᵀ` for a `dim × dim` matrix `R` given row-major.
    pub fn rotate(&self, r: &[[T; 3]; 3]) -> Self {
        let n = self.dim;
        let a = self.to_full();
        let mut out = [[T::zero(); 3]; 3];
        for i in 0..n {
            for j in 0..n {
                let mut s = T::zero();
                for k in 0..n {
                    for l in 0..n {
                        s = s + r[i][k] * a[k][l] * r[j][l];
                    }
                }
                out[i][j] = s;
            }
        }
        Self::from_full(n, &out).expect("dimension already validated")
    }

    /// Ascending eigenvalues and an orthonormal eigenframe.
    pub fn eigs(&self) -> Spectrum<T> {
        eigs(self)
    }

    /// Ascending eigenvalues only.
    pub fn eigenvalues(&self) -> Vec<T> {
        self.eigs().values().to_vec()
    }

    /// `Σ values[i] frame[i] ⊗ frame[i]`.
    pub fn from_spectral(dim: usize, values: &[T], frame: &[Vec3<T>; 3]) -> Result<Self> {
        let mut m = Self::zeros(dim)?;
        if values.len() != dim {
            return Err(Error::DimensionMismatch { expected: dim, got: values.len() });
        }
        for (k, &lam) in values.iter().enumerate() {
            let v = &frame[k];
            for i in 0..dim {
                for j in i..dim {
                    let idx = packed_index(dim, i, j);
                    m.v[idx] = m.v[idx] + lam * v[i] * v[j];
                }
            }
        }
        Ok(m)
    }
}

impl<T: Real> Add for SymMat<T> {
    type Output = Self;
    fn add(self, rhs: Self) -> Self {
        self.axpy(T::one(), &rhs)
    }
}

impl<T: Real> Sub for SymMat<T> {
    type Output = Self;
    fn sub(self, rhs: Self) -> Self {
        self.axpy(-T::one(), &rhs)
    }
}

impl<T: Real> Neg for SymMat<T> {
    type Output = Self;
    fn neg(self) -> Self {
        self.scale(-T::one())
    }
}

impl<T: Real> Mul<T> for SymMat<T> {
    type Output = Self;
    fn mul(self, rhs: T) -> Self {
        self.scale(rhs)
    }
}

/// Ordered eigenvalues with a matching orthonormal frame.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Spectrum<T> {
    dim: usize,
    values: [T; 3],
    frame: [Vec3<T>; 3],
}

impl<T: Real> Spectrum<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Eigenvalues sorted ascending.
    pub fn values(&self) -> &[T] {
        &self.values[..self.dim]
    }

    /// `frame()[k]` is the unit eigenvector for `values()[k]`.
    pub fn frame(&self) -> &[Vec3<T>; 3] {
        &self.frame
    }

    /// Rebuilds `Σ t_k v_k ⊗ v_k` in this frame.
    pub fn compose(&self, diag: &[T]) -> SymMat<T> {
        SymMat::from_spectral(self.dim, diag, &self.frame).expect("spectrum dimension is valid")
    }

    fn sorted(dim: usize, mut pairs: Vec<(T, Vec3<T>)>) -> Self {
        pairs.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut values = [T::zero(); 3];
        let mut frame = [[T::zero(); 3]; 3];
        for (k, (lam, v)) in pairs.into_iter().enumerate() {
            values[k] = lam;
            frame[k] = v;
        }
        Self { dim, values, frame }
    }
}

fn dot3<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

fn cross<T: Real>(a: &Vec3<T>, b: &Vec3<T>) -> Vec3<T> {
    [a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0]]
}

fn normalized<T: Real>(a: &Vec3<T>) -> Vec3<T> {
    let n = dot3(a, a).sqrt();
    [a[0] / n, a[1] / n, a[2] / n]
}

/// Ascending eigen-decomposition of a symmetric matrix.
///
/// 2×2 matrices use the closed-form quadratic. 3×3 matrices use the
/// trigonometric formula for the eigenvalues and row cross products for the
/// eigenvectors; near-degenerate spectra (and any decomposition that fails the
/// reconstruction check) fall back to Jacobi rotations.
pub fn eigs<T: Real>(xi: &SymMat<T>) -> Spectrum<T> {
    if xi.dim == 2 {
        eigs2(xi)
    } else {
        eigs3(xi)
    }
}

fn eigs2<T: Real>(xi: &SymMat<T>) -> Spectrum<T> {
    let (a, b, c) = (xi.v[0], xi.v[1], xi.v[2]);
    let half = T::lit(0.5);
    let mean = half * (a + b);
    let r = (half * (a - b)).hypot(c);
    let phi = if r == T::zero() { T::zero() } else { half * (T::lit(2.0) * c).atan2(a - b) };
    let (s, co) = phi.sin_cos();
    let upper = [co, s, T::zero()];
    let lower = [-s, co, T::zero()];
    let mut frame = [[T::zero(); 3]; 3];
    frame[0] = lower;
    frame[1] = upper;
    frame[2][2] = T::one();
    Spectrum { dim: 2, values: [mean - r, mean + r, T::zero()], frame }
}

fn reconstruction_ok<T: Real>(xi: &SymMat<T>, sp: &Spectrum<T>) -> bool {
    let rebuilt = sp.compose(sp.values());
    let err = (rebuilt - *xi).norm();
    let mut ortho = T::zero();
    for i in 0..3 {
        for j in 0..3 {
            let d = dot3(&sp.frame[i], &sp.frame[j]) - if i == j { T::one() } else { T::zero() };
            ortho = ortho.max(d.abs());
        }
    }
    let tol = T::lit(1e-13);
    err <= tol * (T::one() + xi.norm()) && ortho <= tol
}

fn eigs3<T: Real>(xi: &SymMat<T>) -> Spectrum<T> {
    let a = xi.to_full();
    let two = T::lit(2.0);
    let three = T::lit(3.0);
    let q = xi.trace() / three;
    let p1 = a[0][1] * a[0][1] + a[0][2] * a[0][2] + a[1][2] * a[1][2];
    let p2 = (a[0][0] - q).powi(2) + (a[1][1] - q).powi(2) + (a[2][2] - q).powi(2) + two * p1;
    let p = (p2 / T::lit(6.0)).sqrt();
    let scale = xi.norm();
    if p <= T::eps() * scale || scale == T::zero() {
        // Multiple of the identity.
        let mut frame = [[T::zero(); 3]; 3];
        for (i, row) in frame.iter_mut().enumerate() {
            row[i] = T::one();
        }
        return Spectrum { dim: 3, values: [q, q, q], frame };
    }
    let shifted = xi.axpy(-q, &SymMat::identity(3).expect("3 is valid")).scale(T::one() / p);
    let r = (shifted.det() / two).max(-T::one()).min(T::one());
    // r = ±1 exactly at a repeated eigenvalue.
    let discriminant = T::one() - r * r;
    if discriminant > T::lit(1e-13) {
        let phi = r.acos() / three;
        let big = q + two * p * phi.cos();
        let small = q + two * p * (phi + two * T::PI() / three).cos();
        let mid = three * q - big - small;
        let vals = [small, mid, big];
        let mut vecs = [[T::zero(); 3]; 3];
        let mut ok = true;
        for (k, &lam) in vals.iter().enumerate().take(2) {
            let rows = [
                [a[0][0] - lam, a[0][1], a[0][2]],
                [a[1][0], a[1][1] - lam, a[1][2]],
                [a[2][0], a[2][1], a[2][2] - lam],
            ];
            let cands = [cross(&rows[0], &rows[1]), cross(&rows[1], &rows[2]), cross(&rows[2], &rows[0])];
            let best = cands
                .iter()
                .max_by(|x, y| dot3(x, x).partial_cmp(&dot3(y, y)).unwrap_or(std::cmp::Ordering::Equal))
                .copied()
                .unwrap_or([T::zero(); 3]);
            if dot3(&best, &best) <= T::eps() * T::eps() * scale.powi(4) {
                ok = false;
                break;
            }
            vecs[k] = normalized(&best);
        }
        if ok {
            // Re-orthogonalize the second vector against the first and close
            // the frame with the cross product.
            let d = dot3(&vecs[1], &vecs[0]);
            let v1 = [vecs[1][0] - d * vecs[0][0], vecs[1][1] - d * vecs[0][1], vecs[1][2] - d * vecs[0][2]];
            vecs[1] = normalized(&v1);
            vecs[2] = cross(&vecs[0], &vecs[1]);
            let sp = Spectrum { dim: 3, values: vals, frame: vecs };
            if reconstruction_ok(xi, &sp) {
                return sp;
            }
        }
    }
    let (vals, vecs) = jacobi_eigen(a);
    let sp = Spectrum::sorted(3, (0..3).map(|k| (vals[k], vecs[k])).collect());
    complete_frame(sp)
}

/// Makes a Jacobi frame right-handed and exactly orthonormal by Gram–Schmidt
/// against the already accepted vectors.
fn complete_frame<T: Real>(mut sp: Spectrum<T>) -> Spectrum<T> {
    let v0 = normalized(&sp.frame[0]);
    let d = dot3(&sp.frame[1], &v0);
    let v1 = normalized(&[sp.frame[1][0] - d * v0[0], sp.frame[1][1] - d * v0[1], sp.frame[1][2] - d * v0[2]]);
    sp.frame = [v0, v1, cross(&v0, &v1)];
    sp
}

/// Symmetric tensor product `a ⊙ b = (a⊗b + b⊗a)/2`.
pub fn sym_outer<T: Real>(a: &[T], b: &[T]) -> Result<SymMat<T>> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    let n = a.len();
    let mut m = SymMat::zeros(n)?;
    let half = T::lit(0.5);
    for i in 0..n {
        for j in i..n {
            m.set(i, j, half * (a[i] * b[j] + a[j] * b[i]));
        }
    }
    Ok(m)
}

/// Cofactor matrix of a symmetric 3×3 matrix. Shares the eigenframe of `xi`
/// with eigenvalues `(ξ2ξ3, ξ1ξ3, ξ1ξ2)`.
pub fn cofactor<T: Real>(xi: &SymMat<T>) -> Result<SymMat<T>> {
    if xi.dim != 3 {
        return Err(Error::DimensionMismatch { expected: 3, got: xi.dim });
    }
    let a = xi.to_full();
    let mut c = SymMat::zeros(3)?;
    c.set(0, 0, a[1][1] * a[2][2] - a[1][2] * a[1][2]);
    c.set(1, 1, a[0][0] * a[2][2] - a[0][2] * a[0][2]);
    c.set(2, 2, a[0][0] * a[1][1] - a[0][1] * a[0][1]);
    c.set(0, 1, a[0][2] * a[1][2] - a[0][1] * a[2][2]);
    c.set(0, 2, a[0][1] * a[1][2] - a[0][2] * a[1][1]);
    c.set(1, 2, a[0][1] * a[0][2] - a[0][0] * a[1][2]);
    Ok(c)
}

/// Splits `ξ = ξ_D + (tr ξ / n) Id`, returning `(tr ξ, ξ_D)`.
pub fn dev_split<T: Real>(xi: &SymMat<T>) -> (T, SymMat<T>) {
    let tr = xi.trace();
    let n = T::from_count(xi.dim);
    let mut dev = *xi;
    for i in 0..xi.dim {
        dev.v[i] = dev.v[i] - tr / n;
    }
    (tr, dev)
}

/// Isotropic Hooke tensor `Cξ = λ (tr ξ) Id + 2μ ξ`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct IsoTensor<T> {
    pub lambda: T,
    pub mu: T,
}

impl<T: Real> IsoTensor<T> {
    /// A physical Hooke tensor; both Lamé coefficients must be positive.
    pub fn new(lambda: T, mu: T) -> Result<Self> {
        if !(lambda.is_finite() && lambda > T::zero()) {
            return Err(Error::InvalidParameter { name: "lambda", reason: format!("must be > 0, got {lambda}") });
        }
        if !(mu.is_finite() && mu > T::zero()) {
            return Err(Error::InvalidParameter { name: "mu", reason: format!("must be > 0, got {mu}") });
        }
        Ok(Self { lambda, mu })
    }

    /// An effective tensor (difference or rescaling of Hooke tensors) whose
    /// coefficients are not sign-checked.
    pub const fn effective(lambda: T, mu: T) -> Self {
        Self { lambda, mu }
    }

    pub fn scaled(&self, s: T) -> Self {
        Self::effective(self.lambda * s, self.mu * s)
    }

    /// `self - other`.
    pub fn minus(&self, other: &Self) -> Self {
        Self::effective(self.lambda - other.lambda, self.mu - other.mu)
    }

    /// `n λ + 2μ`, the modulus on spherical matrices.
    pub fn bulk(&self, dim: usize) -> T {
        T::from_count(dim) * self.lambda + T::lit(2.0) * self.mu
    }

    pub fn apply(&self, xi: &SymMat<T>) -> SymMat<T> {
        let id = SymMat::identity(xi.dim()).expect("valid dimension");
        xi.scale(T::lit(2.0) * self.mu).axpy(self.lambda * xi.trace(), &id)
    }

    /// `Cξ:ξ = λ (tr ξ)² + 2μ ξ:ξ`.
    pub fn quad(&self, xi: &SymMat<T>) -> T {
        let tr = xi.trace();
        self.lambda * tr * tr + T::lit(2.0) * self.mu * xi.ddot(xi)
    }

    /// `C⁻¹τ = tr τ / (n(nλ+2μ)) Id + τ_D / (2μ)`.
    pub fn inverse_apply(&self, tau: &SymMat<T>) -> Result<SymMat<T>> {
        let n = tau.dim();
        let bulk = self.bulk(n);
        if !(bulk > T::zero() && self.mu > T::zero()) {
            return Err(Error::NotInvertible { bulk: bulk.as_f64(), mu: self.mu.as_f64() });
        }
        let (tr, dev) = dev_split(tau);
        let id = SymMat::identity(n)?;
        Ok(dev.scale(T::one() / (T::lit(2.0) * self.mu)).axpy(tr / (T::from_count(n) * bulk), &id))
    }

    /// `C⁻¹τ:τ`.
    pub fn inverse_quad(&self, tau: &SymMat<T>) -> Result<T> {
        Ok(self.inverse_apply(tau)?.ddot(tau))
    }
}

/// Free-function form of [`IsoTensor::apply`].
pub fn apply_iso<T: Real>(c: &IsoTensor<T>, xi: &SymMat<T>) -> SymMat<T> {
    c.apply(xi)
}

/// Free-function form of [`IsoTensor::quad`].
pub fn iso_quad<T: Real>(c: &IsoTensor<T>, xi: &SymMat<T>) -> T {
    c.quad(xi)
}

/// Free-function form of [`IsoTensor::inverse_apply`].
pub fn iso_inverse_apply<T: Real>(c: &IsoTensor<T>, tau: &SymMat<T>) -> Result<SymMat<T>> {
    c.inverse_apply(tau)
}
