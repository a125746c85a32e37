//! Closed-form energy densities, the penalty `G`, its conjugate quadratic
//! `h`, the Hencky elasticity set `K` and the Tresca family.

use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symcalc::{cofactor, dev_split, IsoTensor, SymMat, Vec3};

/// How the weak-phase scaling `η_ε` follows `ε`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EtaSchedule<T> {
    /// `η_ε = α ε` (Hencky regime).
    Proportional,
    /// `η_ε = ε^p`; `p > 1` is the trivial regime, `0 < p < 1` the elastic one.
    Power(T),
}

/// Material and scaling constants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub a_w: IsoTensor<T>,
    pub a_s: IsoTensor<T>,
    pub kappa: T,
    pub alpha: T,
    pub eta: EtaSchedule<T>,
}

impl<T: Real> ModelParams<T> {
    pub fn new(a_w: IsoTensor<T>, a_s: IsoTensor<T>, kappa: T, alpha: T, eta: EtaSchedule<T>) -> Result<Self> {
        // Re-validate in case the tensors were built with `effective`.
        IsoTensor::new(a_w.lambda, a_w.mu)?;
        IsoTensor::new(a_s.lambda, a_s.mu)?;
        if !(kappa.is_finite() && kappa > T::zero()) {
            return Err(Error::InvalidParameter { name: "kappa", reason: format!("must be > 0, got {kappa}") });
        }
        if !(alpha.is_finite() && alpha > T::zero()) {
            return Err(Error::InvalidParameter { name: "alpha", reason: format!("must be > 0, got {alpha}") });
        }
        if let EtaSchedule::Power(p) = eta {
            if !(p.is_finite() && p > T::zero()) {
                return Err(Error::InvalidParameter { name: "eta_exponent", reason: format!("must be > 0, got {p}") });
            }
        }
        Ok(Self { a_w, a_s, kappa, alpha, eta })
    }

    /// Hencky-regime parameters (`η_ε = αε`).
    pub fn hencky(lambda_w: T, mu_w: T, lambda_s: T, mu_s: T, kappa: T, alpha: T) -> Result<Self> {
        Self::new(
            IsoTensor::new(lambda_w, mu_w)?,
            IsoTensor::new(lambda_s, mu_s)?,
            kappa,
            alpha,
            EtaSchedule::Proportional,
        )
    }

    /// Same materials with a different `η_ε` schedule.
    pub fn with_eta(mut self, eta: EtaSchedule<T>) -> Result<Self> {
        self.eta = eta;
        Self::new(self.a_w, self.a_s, self.kappa, self.alpha, eta)
    }

    pub fn eta(&self, eps: T) -> T {
        match self.eta {
            EtaSchedule::Proportional => self.alpha * eps,
            EtaSchedule::Power(p) => eps.powf(p),
        }
    }

    /// Tresca mode needs `λ_w ≤ λ_s` so that `A_s − A_w^ε` stays invertible.
    pub fn check_tresca(&self) -> Result<()> {
        if self.a_w.lambda > self.a_s.lambda {
            return Err(Error::InvalidParameter {
                name: "lambda_w",
                reason: format!("Tresca mode needs lambda_w <= lambda_s ({} > {})", self.a_w.lambda, self.a_s.lambda),
            });
        }
        Ok(())
    }
}

pub(crate) fn check_eps<T: Real>(eps: T) -> Result<()> {
    if eps.is_finite() && eps > T::zero() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "eps", reason: format!("must be > 0, got {eps}") })
    }
}

/// `f(ξ) = ½ A_s ξ:ξ`.
pub fn f_strong<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> T {
    T::lit(0.5) * p.a_s.quad(xi)
}

/// `g_ε(ξ) = (η_ε/2) A_w ξ:ξ + κ/ε`.
pub fn g_weak<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<T> {
    check_eps(eps)?;
    Ok(T::lit(0.5) * p.eta(eps) * p.a_w.quad(xi) + p.kappa / eps)
}

/// `W_ε = min(f, g_ε)`.
pub fn w_eps<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<T> {
    Ok(f_strong(p, xi).min(g_weak(p, eps, xi)?))
}

/// The quadratic penalty `G` built from a pair of Lamé-type coefficients.
///
/// `Lame` is the three-branch function; its Tresca counterpart `G̃_ε` is the
/// same function with coefficients `(λ_w/ε, μ_w)`. `Shear` is the `ε → 0`
/// limit `(τ_1 − τ_n)² / (4μ)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GForm<T> {
    Lame { lambda: T, mu: T },
    Shear { mu: T },
}

/// Which of the three `G` branches an ordered spectrum falls in.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GBranch {
    Lower,
    Middle,
    Upper,
}

impl<T: Real> GForm<T> {
    /// Threshold `c = (λ+2μ) / (2(λ+μ))` separating the branches.
    pub fn threshold(&self) -> T {
        match *self {
            GForm::Lame { lambda, mu } => (lambda + T::lit(2.0) * mu) / (T::lit(2.0) * (lambda + mu)),
            GForm::Shear { .. } => T::lit(0.5),
        }
    }

    /// Branch for ascending eigenvalues `t`. Ties go to the middle branch.
    pub fn branch(&self, t: &[T]) -> GBranch {
        if let GForm::Shear { .. } = self {
            return GBranch::Middle;
        }
        let (lo, hi) = (t[0], t[t.len() - 1]);
        let s = self.threshold() * (lo + hi);
        if s < lo {
            GBranch::Lower
        } else if hi < s {
            GBranch::Upper
        } else {
            GBranch::Middle
        }
    }

    /// Value of a given branch's quadratic at `t` (regardless of region).
    pub fn piece(&self, b: GBranch, t: &[T]) -> T {
        let (lo, hi) = (t[0], t[t.len() - 1]);
        let four = T::lit(4.0);
        match *self {
            GForm::Shear { mu } => (lo - hi).powi(2) / (four * mu),
            GForm::Lame { lambda, mu } => match b {
                GBranch::Lower => lo * lo / (lambda + T::lit(2.0) * mu),
                GBranch::Upper => hi * hi / (lambda + T::lit(2.0) * mu),
                GBranch::Middle => (lo - hi).powi(2) / (four * mu) + (lo + hi).powi(2) / (four * (lambda + mu)),
            },
        }
    }

    /// `G` on ascending eigenvalues.
    pub fn eval_sorted(&self, t: &[T]) -> T {
        self.piece(self.branch(t), t)
    }

    pub fn eval(&self, tau: &SymMat<T>) -> T {
        self.eval_sorted(tau.eigs().values())
    }
}

/// The Hencky penalty `G` with the weak-phase Lamé coefficients.
pub fn g_form<T: Real>(p: &ModelParams<T>) -> GForm<T> {
    GForm::Lame { lambda: p.a_w.lambda, mu: p.a_w.mu }
}

/// `G(τ)`.
pub fn g_quad<T: Real>(p: &ModelParams<T>, tau: &SymMat<T>) -> T {
    g_form(p).eval(tau)
}

/// `h` on eigenvalues: `μ_w (Σ|ξ_i|)² + (λ_w+μ_w)(Σ ξ_i)²`.
pub fn h_from_eigs<T: Real>(a_w: &IsoTensor<T>, x: &[T]) -> T {
    let abs: T = x.iter().map(|v| v.abs()).sum();
    let tr: T = x.iter().copied().sum();
    a_w.mu * abs * abs + (a_w.lambda + a_w.mu) * tr * tr
}

/// `h(ξ)`.
pub fn h_density<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> T {
    h_from_eigs(&p.a_w, xi.eigs().values())
}

/// `h_r(ξ) = A_w ξ:ξ + 4μ_w r det ξ` for 2×2 `ξ`.
pub fn h_r<T: Real>(p: &ModelParams<T>, r: T, xi: &SymMat<T>) -> Result<T> {
    if xi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: xi.dim() });
    }
    if !(r >= T::zero() && r <= T::one()) {
        return Err(Error::InvalidParameter { name: "r", reason: format!("must lie in [0, 1], got {r}") });
    }
    Ok(p.a_w.quad(xi) + T::lit(4.0) * p.a_w.mu * r * xi.det())
}

/// Extreme point of the set `M = {Id} ∪ {y⊗y : |y| = 1}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum MElement<T> {
    Identity,
    RankOne(Vec3<T>),
}

impl<T: Real> MElement<T> {
    pub fn matrix(&self) -> SymMat<T> {
        match self {
            MElement::Identity => SymMat::identity(3).expect("3 is valid"),
            MElement::RankOne(y) => crate::symcalc::sym_outer(y, y).expect("equal lengths"),
        }
    }
}

/// A finite convex combination of elements of `M`.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvMElement<T> {
    terms: Vec<(T, MElement<T>)>,
}

impl<T: Real> ConvMElement<T> {
    pub fn new(terms: Vec<(T, MElement<T>)>) -> Result<Self> {
        if terms.is_empty() {
            return Err(Error::InvalidParameter { name: "conv_m", reason: "empty combination".into() });
        }
        let tol = T::lit(1e-12);
        let mut total = T::zero();
        for (w, e) in &terms {
            if !(*w >= T::zero()) {
                return Err(Error::InvalidParameter { name: "conv_m", reason: format!("negative weight {w}") });
            }
            if let MElement::RankOne(y) = e {
                let n2 = y[0] * y[0] + y[1] * y[1] + y[2] * y[2];
                if (n2 - T::one()).abs() > tol.sqrt() {
                    return Err(Error::InvalidParameter { name: "conv_m", reason: format!("|y|^2 = {n2}, expected 1") });
                }
            }
            total = total + *w;
        }
        if (total - T::one()).abs() > tol.sqrt() {
            return Err(Error::InvalidParameter { name: "conv_m", reason: format!("weights sum to {total}") });
        }
        Ok(Self { terms })
    }

    pub fn single(e: MElement<T>) -> Self {
        Self { terms: vec![(T::one(), e)] }
    }

    pub fn terms(&self) -> &[(T, MElement<T>)] {
        &self.terms
    }

    pub fn matrix(&self) -> SymMat<T> {
        self.terms
            .iter()
            .fold(SymMat::zeros(3).expect("3 is valid"), |acc, (w, e)| acc.axpy(*w, &e.matrix()))
    }
}

/// `h_A(ξ) = A_w ξ:ξ + 4μ_w A:cof ξ` for 3×3 `ξ`.
pub fn h_a<T: Real>(p: &ModelParams<T>, a: &ConvMElement<T>, xi: &SymMat<T>) -> Result<T> {
    let cof = cofactor(xi)?;
    Ok(p.a_w.quad(xi) + T::lit(4.0) * p.a_w.mu * a.matrix().ddot(&cof))
}

/// Largest `h_A(ξ)` over `M`. Linear in `A`, so the max over `conv(M)` is
/// attained at the identity or at `y⊗y` with `y` an eigenvector of `cof ξ`
/// (which shares the eigenframe of `ξ`).
pub fn h_a_max<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<(T, MElement<T>)> {
    let sp = xi.eigs();
    let mut best = (h_a(p, &ConvMElement::single(MElement::Identity), xi)?, MElement::Identity);
    for y in sp.frame().iter().take(3) {
        let e = MElement::RankOne(*y);
        let v = h_a(p, &ConvMElement::single(e), xi)?;
        if v > best.0 {
            best = (v, e);
        }
    }
    Ok(best)
}

/// `K`-point Fibonacci lattice on the unit sphere.
pub fn fibonacci_sphere<T: Real>(k: usize) -> Vec<Vec3<T>> {
    let golden = (1.0 + 5f64.sqrt()) / 2.0;
    (0..k)
        .map(|i| {
            let z = 1.0 - (2.0 * i as f64 + 1.0) / k as f64;
            let r = (1.0 - z * z).max(0.0).sqrt();
            let phi = 2.0 * std::f64::consts::PI * i as f64 / golden;
            [T::lit(r * phi.cos()), T::lit(r * phi.sin()), T::lit(z)]
        })
        .collect()
}

/// `G(τ) ≤ 2ακ`, with a relative band of `1e-12` for boundary queries.
pub fn in_k<T: Real>(p: &ModelParams<T>, tau: &SymMat<T>) -> bool {
    let bound = T::lit(2.0) * p.alpha * p.kappa;
    g_quad(p, tau) <= bound * (T::one() + T::lit(1e-12))
}

/// Support function of `K`: `√(2ακ h(ξ))`.
pub fn support_k<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> T {
    (T::lit(2.0) * p.alpha * p.kappa * h_density(p, xi)).sqrt()
}

/// Lower growth constant: `min(f, g_ε) ≥ c|ξ| − 1/c` along `η_ε = αε`.
///
/// `g_ε ≥ 2√(ακμ_w)|ξ|` by AM-GM, and `f ≥ μ_s|ξ|² ≥ m|ξ| − m²/(4μ_s)`.
pub fn growth_lower_constant<T: Real>(p: &ModelParams<T>) -> T {
    let m = T::lit(2.0) * (p.alpha * p.kappa * p.a_w.mu).sqrt();
    m.min(T::lit(4.0) * p.a_s.mu / (m * m))
}

/// Upper growth and Lipschitz constant `max_{|ξ|=1} √(2ακh(ξ)) = √(2ακ n(λ_w+2μ_w))`.
pub fn growth_upper_constant<T: Real>(p: &ModelParams<T>, dim: usize) -> T {
    (T::lit(2.0) * p.alpha * p.kappa * T::from_count(dim) * (p.a_w.lambda + T::lit(2.0) * p.a_w.mu)).sqrt()
}

// ---------------------------------------------------------------------------
// Tresca family. The weak tensor is `A_w^ε = (λ_w, ε μ_w)` with `η_ε = ε`.

/// `A_w^ε`.
pub fn tresca_weak_tensor<T: Real>(p: &ModelParams<T>, eps: T) -> IsoTensor<T> {
    IsoTensor::effective(p.a_w.lambda, eps * p.a_w.mu)
}

/// Penalty `G̃_ε`: the three-branch `G` with coefficients `(λ_w/ε, μ_w)`.
pub fn g_tilde_eps_form<T: Real>(p: &ModelParams<T>, eps: T) -> GForm<T> {
    GForm::Lame { lambda: p.a_w.lambda / eps, mu: p.a_w.mu }
}

/// `G̃_ε(τ)`.
pub fn g_tilde_eps<T: Real>(p: &ModelParams<T>, eps: T, tau: &SymMat<T>) -> Result<T> {
    check_eps(eps)?;
    Ok(g_tilde_eps_form(p, eps).eval(tau))
}

/// `G̃(τ) = (τ_1 − τ_n)² / (4μ_w)`.
pub fn g_tilde<T: Real>(p: &ModelParams<T>, tau: &SymMat<T>) -> T {
    GForm::Shear { mu: p.a_w.mu }.eval(tau)
}

pub(crate) fn check_deviatoric<T: Real>(xi: &SymMat<T>) -> Result<()> {
    let tr = xi.trace();
    if tr.abs() > T::lit(1e-12) * (T::one() + xi.norm()) {
        return Err(Error::NotDeviatoric(tr.as_f64()));
    }
    Ok(())
}

/// `h̃(ξ) = μ_w (Σ|ξ_i|)²` on deviatoric `ξ`.
pub fn h_tilde<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<T> {
    check_deviatoric(xi)?;
    let abs: T = xi.eigs().values().iter().map(|v| v.abs()).sum();
    Ok(p.a_w.mu * abs * abs)
}

/// Tresca set `K̃`: deviatoric `τ` with `τ_n − τ_1 ≤ 2√(2κμ_w)`.
pub fn in_k_tilde<T: Real>(p: &ModelParams<T>, tau: &SymMat<T>) -> Result<bool> {
    check_deviatoric(tau)?;
    let t = tau.eigs();
    let v = t.values();
    Ok(v[v.len() - 1] - v[0] <= tresca_radius(p))
}

/// `2√(2κμ_w)`, the admissible spread of eigenvalues in `K̃`.
pub fn tresca_radius<T: Real>(p: &ModelParams<T>) -> T {
    T::lit(2.0) * (T::lit(2.0) * p.kappa * p.a_w.mu).sqrt()
}

/// `√(2κ h̃(ξ))` on deviatoric `ξ`.
pub fn support_k_tilde<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<T> {
    Ok((T::lit(2.0) * p.kappa * h_tilde(p, xi)?).sqrt())
}

/// `f̃(ξ) = μ_s |ξ|²`, the strong energy restricted to deviatoric strains.
pub fn f_tilde<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<T> {
    check_deviatoric(xi)?;
    Ok(p.a_s.mu * xi.ddot(xi))
}

/// Spherical part of the Tresca limit: `(tr ξ)² (λ_s/2 + μ_s/n)`.
pub fn tresca_spherical<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> T {
    let (tr, _) = dev_split(xi);
    tr * tr * (T::lit(0.5) * p.a_s.lambda + p.a_s.mu / T::from_count(xi.dim()))
}
