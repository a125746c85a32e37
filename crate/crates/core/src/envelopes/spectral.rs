//! Exact maximization of piecewise concave quadratics over ordered spectra.
//!
//! Every stress-side problem in this crate has the shape
//!
//! ```text
//! maximize  x·t − ½ tᵀHt − w G(t)         (penalty form)
//! maximize  x·t − ½ tᵀHt  s.t. G(t) ≤ B   (constraint form)
//! ```
//!
//! over ascending `t ∈ Rⁿ`, where `x` holds the ascending eigenvalues of the
//! strain, `H` is the eigen-coordinate matrix of an isotropic compliance and
//! `G` is one of the penalty forms. All ingredients are spectral functions, so
//! by von Neumann's trace inequality the optimal stress is coaxial with the
//! strain and its eigenvalues come in the same order.
//!
//! `G` is a different quadratic `tᵀP_b t` on each of three polyhedral cones.
//! The maximizer is a KKT point of one piece restricted to some set of active
//! faces (branch boundaries and eigenvalue ties), so enumerating pieces and
//! face subsets, solving each equality-constrained system, discarding
//! candidates outside their cone and keeping the best true objective is exact.

use crate::densities::{GBranch, GForm};
use crate::error::{Error, Result};
use crate::linalg::solve_dense;
use crate::scalar::Real;
use crate::symcalc::IsoTensor;

/// How the penalty enters the objective.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Mode<T> {
    /// Subtract `w G(t)`.
    Penalty(T),
    /// Require `G(t) ≤ B`.
    Constraint(T),
}

#[derive(Clone, Copy, Debug)]
pub struct SpectralProblem<T> {
    pub n: usize,
    /// Ascending eigenvalues of the strain.
    pub x: [T; 3],
    /// Compliance in eigen-coordinates (leading `n × n` block used).
    pub h: [[T; 3]; 3],
    pub form: GForm<T>,
    pub mode: Mode<T>,
    /// Restrict to `Σ t_i = 0`.
    pub trace_free: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SpectralSolution<T> {
    /// Ascending eigenvalues of the optimal stress.
    pub t: [T; 3],
    pub value: T,
    pub branch: GBranch,
}

/// Eigen-coordinate matrix of `C⁻¹` for isotropic `C = (λ, μ)`:
/// `I/(2μ) + β 11ᵀ` with `β = 1/(n(nλ+2μ)) − 1/(2μn)`.
pub fn compliance_matrix<T: Real>(c: &IsoTensor<T>, n: usize) -> Result<[[T; 3]; 3]> {
    let bulk = c.bulk(n);
    if !(bulk > T::zero() && c.mu > T::zero()) {
        return Err(Error::NotInvertible { bulk: bulk.as_f64(), mu: c.mu.as_f64() });
    }
    let nn = T::from_count(n);
    let two_mu = T::lit(2.0) * c.mu;
    let beta = T::one() / (nn * bulk) - T::one() / (two_mu * nn);
    let mut h = [[T::zero(); 3]; 3];
    for (i, row) in h.iter_mut().enumerate().take(n) {
        for (j, v) in row.iter_mut().enumerate().take(n) {
            *v = beta + if i == j { T::one() / two_mu } else { T::zero() };
        }
    }
    Ok(h)
}

/// Matrix `P_b` with `G_b(t) = tᵀ P_b t`.
fn piece_matrix<T: Real>(form: &GForm<T>, b: GBranch, n: usize) -> [[T; 3]; 3] {
    let mut p = [[T::zero(); 3]; 3];
    let last = n - 1;
    let four = T::lit(4.0);
    match *form {
        GForm::Shear { mu } => {
            let d = T::one() / (four * mu);
            p[0][0] = d;
            p[last][last] = d;
            p[0][last] = -d;
            p[last][0] = -d;
        }
        GForm::Lame { lambda, mu } => match b {
            GBranch::Lower => p[0][0] = T::one() / (lambda + T::lit(2.0) * mu),
            GBranch::Upper => p[last][last] = T::one() / (lambda + T::lit(2.0) * mu),
            GBranch::Middle => {
                let a = T::one() / (four * mu);
                let s = T::one() / (four * (lambda + mu));
                p[0][0] = a + s;
                p[last][last] = a + s;
                p[0][last] = s - a;
                p[last][0] = s - a;
            }
        },
    }
    p
}

/// Normals of the branch-boundary faces of the given piece. The piece's cone
/// is `{a·t ≥ 0}` for `Lower`/`Upper` and `{a_L·t ≤ 0, a_U·t ≤ 0}` for
/// `Middle`.
fn branch_faces<T: Real>(form: &GForm<T>, b: GBranch, n: usize) -> Vec<[T; 3]> {
    if let GForm::Shear { .. } = form {
        return Vec::new();
    }
    let c = form.threshold();
    let last = n - 1;
    let mut lower = [T::zero(); 3];
    lower[0] = T::one() - c;
    lower[last] = -c;
    let mut upper = [T::zero(); 3];
    upper[0] = c;
    upper[last] = c - T::one();
    match b {
        GBranch::Lower => vec![lower],
        GBranch::Upper => vec![upper],
        GBranch::Middle => vec![lower, upper],
    }
}

fn pieces<T: Real>(form: &GForm<T>) -> &'static [GBranch] {
    match form {
        GForm::Shear { .. } => &[GBranch::Middle],
        GForm::Lame { .. } => &[GBranch::Lower, GBranch::Middle, GBranch::Upper],
    }
}

fn quad<T: Real>(m: &[[T; 3]; 3], t: &[T; 3], n: usize) -> T {
    let mut s = T::zero();
    for i in 0..n {
        for j in 0..n {
            s = s + t[i] * m[i][j] * t[j];
        }
    }
    s
}

impl<T: Real> SpectralProblem<T> {
    /// Smooth part `x·t − ½ tᵀHt`.
    fn smooth(&self, t: &[T; 3]) -> T {
        let lin: T = (0..self.n).map(|i| self.x[i] * t[i]).sum();
        lin - T::lit(0.5) * quad(&self.h, t, self.n)
    }

    fn g_true(&self, t: &[T; 3]) -> T {
        let mut s = *t;
        s[..self.n].sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        self.form.eval_sorted(&s[..self.n])
    }

    /// True objective (`-∞` if the constraint is violated).
    pub fn objective(&self, t: &[T; 3]) -> T {
        match self.mode {
            Mode::Penalty(w) => self.smooth(t) - w * self.g_true(t),
            Mode::Constraint(b) => {
                if self.g_true(t) <= b * (T::one() + T::lit(1e-9)) + T::min_positive_value() {
                    self.smooth(t)
                } else {
                    T::neg_infinity()
                }
            }
        }
    }

    /// Solves `max x·t − ½tᵀ(H + 2νP)t` subject to `A t = 0`.
    fn kkt(&self, p: &[[T; 3]; 3], nu: T, rows: &[[T; 3]]) -> Option<[T; 3]> {
        let n = self.n;
        let m = rows.len();
        let dim = n + m;
        if m > n {
            return None;
        }
        let mut a = vec![T::zero(); dim * dim];
        let mut rhs = vec![T::zero(); dim];
        let two = T::lit(2.0);
        for i in 0..n {
            for j in 0..n {
                a[i * dim + j] = self.h[i][j] + two * nu * p[i][j];
            }
            rhs[i] = self.x[i];
        }
        for (k, r) in rows.iter().enumerate() {
            for i in 0..n {
                a[(n + k) * dim + i] = r[i];
                a[i * dim + n + k] = r[i];
            }
        }
        solve_dense(&mut a, &mut rhs, dim)?;
        let mut t = [T::zero(); 3];
        t[..n].copy_from_slice(&rhs[..n]);
        if t.iter().all(|v| v.is_finite()) {
            Some(t)
        } else {
            None
        }
    }

    fn in_region(&self, b: GBranch, t: &[T; 3]) -> bool {
        let n = self.n;
        let scale = t[..n].iter().fold(T::zero(), |m, v| m.max(v.abs()));
        let tol = T::lit(1e-9).max(T::eps() * T::lit(64.0)) * scale;
        for i in 0..n - 1 {
            if t[i] - t[i + 1] > tol {
                return false;
            }
        }
        let faces = branch_faces(&self.form, b, n);
        let dot = |a: &[T; 3]| (0..n).map(|i| a[i] * t[i]).sum::<T>();
        match b {
            _ if faces.is_empty() => true,
            GBranch::Lower | GBranch::Upper => dot(&faces[0]) >= -tol,
            GBranch::Middle => dot(&faces[0]) <= tol && dot(&faces[1]) <= tol,
        }
    }

    /// Root of `ν ↦ t(ν)ᵀPt(ν) = bound` on `ν > 0`, given that the value at
    /// `ν = 0` exceeds the bound. The map is nonincreasing.
    fn secular(&self, p: &[[T; 3]; 3], rows: &[[T; 3]], bound: T) -> Option<[T; 3]> {
        let n = self.n;
        let hs = (0..n).fold(T::zero(), |m, i| m.max(self.h[i][i].abs()));
        let ps = (0..n).fold(T::zero(), |m, i| m.max(p[i][i].abs()));
        if ps == T::zero() {
            return None;
        }
        let phi = |nu: T| self.kkt(p, nu, rows).map(|t| (quad(p, &t, n), t));
        let mut hi = hs / ps;
        let mut lo = T::zero();
        let mut found = false;
        for _ in 0..400 {
            let (v, _) = phi(hi)?;
            if v <= bound {
                found = true;
                break;
            }
            lo = hi;
            hi = hi * T::lit(2.0);
        }
        if !found {
            return None;
        }
        if lo == T::zero() {
            // Shrink the lower end so the bracket spans a factor of two.
            let mut probe = hi;
            for _ in 0..2000 {
                let half = probe * T::lit(0.5);
                if half <= T::min_positive_value() {
                    break;
                }
                let (v, _) = phi(half)?;
                if v > bound {
                    lo = half;
                    break;
                }
                probe = half;
                hi = half;
            }
        }
        for _ in 0..200 {
            let mid = T::lit(0.5) * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let (v, _) = phi(mid)?;
            if v > bound {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        phi(hi).map(|(_, t)| t)
    }

    /// Exact maximizer.
    pub fn solve(&self) -> Result<SpectralSolution<T>> {
        let n = self.n;
        if !(n == 2 || n == 3) {
            return Err(Error::BadDimension(n));
        }
        let mut ordering = Vec::new();
        for i in 0..n - 1 {
            let mut r = [T::zero(); 3];
            r[i] = T::one();
            r[i + 1] = -T::one();
            ordering.push(r);
        }
        let mut fixed = Vec::new();
        if self.trace_free {
            let mut r = [T::zero(); 3];
            for v in r.iter_mut().take(n) {
                *v = T::one();
            }
            fixed.push(r);
        }

        let zero = [T::zero(); 3];
        let mut best = SpectralSolution { t: zero, value: self.objective(&zero), branch: GBranch::Middle };
        if !best.value.is_finite() {
            return Err(Error::NoFeasibleCandidate);
        }
        let consider = |t: [T; 3], b: GBranch, best: &mut SpectralSolution<T>| {
            if !self.in_region(b, &t) {
                return;
            }
            let v = self.objective(&t);
            if v > best.value {
                *best = SpectralSolution { t, value: v, branch: b };
            }
        };

        // The unconstrained maximizer settles the constraint form when it is
        // feasible.
        if let Mode::Constraint(_) = self.mode {
            let none = [[T::zero(); 3]; 3];
            if let Some(t) = self.kkt(&none, T::zero(), &fixed) {
                if self.objective(&t).is_finite() {
                    let b = self.form.branch(&sorted(&t, n)[..n]);
                    let v = self.objective(&t);
                    return Ok(SpectralSolution { t: sorted(&t, n), value: v, branch: b });
                }
            }
        }

        for &b in pieces(&self.form) {
            let p = piece_matrix(&self.form, b, n);
            let faces = branch_faces(&self.form, b, n);
            let mut optional = faces.clone();
            optional.extend(ordering.iter().copied());
            let k = optional.len();
            for mask in 0u32..(1 << k) {
                let mut rows = fixed.clone();
                for (bit, r) in optional.iter().enumerate() {
                    if mask & (1 << bit) != 0 {
                        rows.push(*r);
                    }
                }
                if rows.len() > n {
                    continue;
                }
                match self.mode {
                    Mode::Penalty(w) => {
                        if let Some(t) = self.kkt(&p, w, &rows) {
                            consider(t, b, &mut best);
                        }
                    }
                    Mode::Constraint(bound) => {
                        if let Some(t) = self.kkt(&p, T::zero(), &rows) {
                            if quad(&p, &t, n) > bound {
                                if let Some(t) = self.secular(&p, &rows, bound) {
                                    consider(t, b, &mut best);
                                }
                            } else {
                                consider(t, b, &mut best);
                            }
                        }
                    }
                }
            }
        }
        best.t = sorted(&best.t, n);
        Ok(best)
    }
}

fn sorted<T: Real>(t: &[T; 3], n: usize) -> [T; 3] {
    let mut s = *t;
    s[..n].sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
    s
}
