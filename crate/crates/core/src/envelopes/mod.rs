//! Relaxed envelope `SQW_ε`, the Hencky limit density `W̄`, its Tresca
//! counterpart and the Kohn–Strang envelope.
//!
//! Stress-side (dual) quantities go through the exact spectral solver in
//! [`spectral`]; strain-side (primal) inf-convolutions go through the convex
//! minimizer in [`primal`]. The two routes share no code beyond the density
//! formulas, which is what makes their agreement a meaningful check.

pub mod primal;
pub mod spectral;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::densities::{
    check_deviatoric, check_eps, f_strong, g_form, g_tilde_eps_form, h_density, h_from_eigs, support_k,
    tresca_spherical, tresca_weak_tensor, GForm, ModelParams,
};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symcalc::{dev_split, sym_outer, IsoTensor, Spectrum, SymMat};
use primal::{minimize_convex, PrimalOptions};
use spectral::{compliance_matrix, Mode, SpectralProblem};

/// How an [`EnvelopeEval`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Route {
    Dual,
    Primal,
    ClosedForm,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopeEval<T> {
    pub value: T,
    /// Optimal damage fraction (relaxed envelopes only).
    pub theta_opt: Option<T>,
    /// Maximizing stress (dual routes).
    pub tau_opt: Option<SymMat<T>>,
    pub route: Route,
    /// Duality gap for primal routes, zero otherwise.
    pub residual: T,
}

/// Default relative duality-gap tolerance for the scalar type.
pub fn default_gap_tol<T: Real>() -> T {
    T::lit(1e-6).max(T::eps().sqrt() * T::lit(10.0))
}

fn eig_array<T: Real>(sp: &Spectrum<T>) -> [T; 3] {
    let mut x = [T::zero(); 3];
    x[..sp.dim()].copy_from_slice(sp.values());
    x
}

// ---------------------------------------------------------------------------
// Relaxed envelope.

/// Pieces of `F_ε(θ, ξ)` that do not depend on `θ`.
struct RelaxedForm<T> {
    spectrum: Spectrum<T>,
    /// `½ A ξ:ξ` of the weak phase at this `ε`.
    weak_quad: T,
    dissipation: T,
    /// `w = θ · penalty_rate`.
    penalty_rate: T,
    problem: SpectralProblem<T>,
}

impl<T: Real> RelaxedForm<T> {
    fn new(xi: &SymMat<T>, weak: IsoTensor<T>, strong: IsoTensor<T>, form: GForm<T>, eta: T, eps: T, kappa: T) -> Result<Self> {
        let n = xi.dim();
        let h = compliance_matrix(&strong.minus(&weak), n)?;
        let spectrum = xi.eigs();
        let problem =
            SpectralProblem { n, x: eig_array(&spectrum), h, form, mode: Mode::Penalty(T::zero()), trace_free: false };
        Ok(Self {
            spectrum,
            weak_quad: T::lit(0.5) * weak.quad(xi),
            dissipation: kappa / eps,
            penalty_rate: T::one() / (T::lit(2.0) * eta),
            problem,
        })
    }

    fn inner(&self, theta: T) -> Result<spectral::SpectralSolution<T>> {
        let mut pb = self.problem;
        pb.mode = Mode::Penalty(theta * self.penalty_rate);
        pb.solve()
    }

    fn eval(&self, theta: T) -> Result<T> {
        let inner = self.inner(theta)?;
        Ok(self.weak_quad + self.dissipation * theta + (T::one() - theta) * inner.value)
    }

    /// Grid over `θ ∈ [0, 1]`, then golden-section in the best bracket.
    fn minimize(&self, grid: usize) -> Result<EnvelopeEval<T>> {
        let grid = grid.max(2);
        let step = T::one() / T::from_count(grid);
        let mut vals = Vec::with_capacity(grid + 1);
        for i in 0..=grid {
            vals.push(self.eval(T::from_count(i) * step)?);
        }
        let (imin, &vmin) = vals
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.partial_cmp(b.1).unwrap_or(std::cmp::Ordering::Equal))
            .expect("grid is nonempty");
        let mut best = (T::from_count(imin) * step, vmin);
        let lo = T::from_count(imin.saturating_sub(1)) * step;
        let hi = T::from_count((imin + 1).min(grid)) * step;
        let g = T::lit(0.618_033_988_749_894_8);
        let (mut a, mut b) = (lo, hi);
        let mut c = b - g * (b - a);
        let mut d = a + g * (b - a);
        let mut fc = self.eval(c)?;
        let mut fd = self.eval(d)?;
        for _ in 0..80 {
            if b - a <= T::eps() * T::lit(4.0) {
                break;
            }
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - g * (b - a);
                fc = self.eval(c)?;
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + g * (b - a);
                fd = self.eval(d)?;
            }
        }
        for (t, v) in [(c, fc), (d, fd)] {
            if v < best.1 {
                best = (t, v);
            }
        }
        let inner = self.inner(best.0)?;
        let tau = self.spectrum.compose(&inner.t[..self.spectrum.dim()]);
        Ok(EnvelopeEval {
            value: best.1,
            theta_opt: Some(best.0),
            tau_opt: Some(tau),
            route: Route::Dual,
            residual: T::zero(),
        })
    }
}

fn hencky_form<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<RelaxedForm<T>> {
    check_eps(eps)?;
    let eta = p.eta(eps);
    RelaxedForm::new(xi, p.a_w.scaled(eta), p.a_s, g_form(p), eta, eps, p.kappa)
}

fn tresca_form<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<RelaxedForm<T>> {
    check_eps(eps)?;
    p.check_tresca()?;
    RelaxedForm::new(xi, tresca_weak_tensor(p, eps), p.a_s, g_tilde_eps_form(p, eps), eps, eps, p.kappa)
}

/// Number of θ intervals used by the envelope minimization.
pub const THETA_GRID: usize = 512;

/// `F_ε(θ, ξ) = (η/2)A_wξ:ξ + κθ/ε + (1−θ) max_τ {τ:ξ − ½(A_s−ηA_w)⁻¹τ:τ − θ/(2η) G(τ)}`.
pub fn f_eps<T: Real>(p: &ModelParams<T>, eps: T, theta: T, xi: &SymMat<T>) -> Result<T> {
    check_theta(theta)?;
    hencky_form(p, eps, xi)?.eval(theta)
}

fn check_theta<T: Real>(theta: T) -> Result<()> {
    if theta >= T::zero() && theta <= T::one() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name: "theta", reason: format!("must lie in [0, 1], got {theta}") })
    }
}

/// `SQW_ε(ξ) = min_θ F_ε(θ, ξ)`.
pub fn sq_envelope<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    sq_envelope_with(p, eps, xi, THETA_GRID)
}

/// [`sq_envelope`] with a custom θ grid.
pub fn sq_envelope_with<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>, grid: usize) -> Result<EnvelopeEval<T>> {
    hencky_form(p, eps, xi)?.minimize(grid)
}

/// Tresca counterpart `F̃_ε(θ, ξ)`, with `A_w^ε = (λ_w, εμ_w)` and penalty `G̃_ε`.
pub fn f_eps_tresca<T: Real>(p: &ModelParams<T>, eps: T, theta: T, xi: &SymMat<T>) -> Result<T> {
    check_theta(theta)?;
    tresca_form(p, eps, xi)?.eval(theta)
}

/// `SQW̃_ε(ξ) = min_θ F̃_ε(θ, ξ)`.
pub fn sq_envelope_tresca<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    tresca_form(p, eps, xi)?.minimize(THETA_GRID)
}

// ---------------------------------------------------------------------------
// Hencky limit density.

/// `W̄(ξ) = sup_{τ∈K} τ:ξ − ½A_s⁻¹τ:τ`.
pub fn w_bar_dual<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    let n = xi.dim();
    let sp = xi.eigs();
    let pb = SpectralProblem {
        n,
        x: eig_array(&sp),
        h: compliance_matrix(&p.a_s, n)?,
        form: g_form(p),
        mode: Mode::Constraint(T::lit(2.0) * p.alpha * p.kappa),
        trace_free: false,
    };
    let sol = pb.solve()?;
    Ok(EnvelopeEval {
        value: sol.value,
        theta_opt: None,
        tau_opt: Some(sp.compose(&sol.t[..n])),
        route: Route::Dual,
        residual: T::zero(),
    })
}

/// Objective of the primal inf-convolution in eigen-coordinates.
fn hencky_primal_objective<'a, T: Real>(p: &'a ModelParams<T>, x: &'a [T]) -> impl Fn(&[T]) -> T + 'a {
    let c = T::lit(2.0) * p.alpha * p.kappa;
    move |t: &[T]| {
        let mut tr = T::zero();
        let mut sq = T::zero();
        for (xi, ti) in x.iter().zip(t) {
            let d = *xi - *ti;
            tr = tr + d;
            sq = sq + d * d;
        }
        let f = T::lit(0.5) * (p.a_s.lambda * tr * tr + T::lit(2.0) * p.a_s.mu * sq);
        f + (c * h_from_eigs(&p.a_w, t)).sqrt()
    }
}

/// `W̄(ξ) = inf_{ξ'} f(ξ−ξ') + √(2ακh(ξ'))`, checked against [`w_bar_dual`].
pub fn w_bar_primal<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    w_bar_primal_with(p, xi, PrimalOptions::default(), default_gap_tol())
}

pub fn w_bar_primal_with<T: Real>(
    p: &ModelParams<T>,
    xi: &SymMat<T>,
    opts: PrimalOptions,
    tol: T,
) -> Result<EnvelopeEval<T>> {
    let n = xi.dim();
    let x = xi.eigs().values().to_vec();
    let obj = hencky_primal_objective(p, &x);
    let r = T::lit(4.0) * xi.norm();
    let (_, value) = minimize_convex(obj, n, r, std::slice::from_ref(&x), opts);
    let dual = w_bar_dual(p, xi)?.value;
    finish_primal(value, dual, tol)
}

fn finish_primal<T: Real>(value: T, dual: T, tol: T) -> Result<EnvelopeEval<T>> {
    let gap = (value - dual).abs();
    let allowed = tol * (T::one() + dual.abs());
    if !(gap <= allowed) {
        return Err(Error::DualityGap { gap: gap.as_f64(), tol: allowed.as_f64() });
    }
    Ok(EnvelopeEval { value, theta_opt: None, tau_opt: None, route: Route::Primal, residual: gap })
}

/// Recession function `W̄∞(ξ) = √(2ακh(ξ))`.
pub fn w_bar_recession<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> T {
    support_k(p, xi)
}

/// Difference quotient `W̄(tξ)/t`, which increases to `W̄∞(ξ)`.
pub fn w_bar_recession_probe<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>, t: T) -> Result<T> {
    if !(t > T::zero()) {
        return Err(Error::InvalidParameter { name: "t", reason: format!("must be > 0, got {t}") });
    }
    Ok(w_bar_dual(p, &xi.scale(t))?.value / t)
}

/// Symmetric quasiconvex envelope of `(η/2)A_wξ:ξ + κ/ε` off the origin.
pub fn kohn_strang_envelope<T: Real>(p: &ModelParams<T>, eps: T, xi: &SymMat<T>) -> Result<T> {
    check_eps(eps)?;
    let eta = p.eta(eps);
    let h = h_density(p, xi);
    let aw = p.a_w.quad(xi);
    Ok(kohn_strang_branches(eta, eps, p.kappa, h, aw).0)
}

/// Value and `(upper, lower)` branch values for given `h(ξ)` and `A_wξ:ξ`;
/// exposed so the branch boundary can be probed directly.
pub fn kohn_strang_branches<T: Real>(eta: T, eps: T, kappa: T, h: T, aw: T) -> (T, T, T) {
    let half = T::lit(0.5);
    let upper = half * eta * aw + kappa / eps;
    let lower = (T::lit(2.0) * eta * kappa * h / eps).sqrt() + half * eta * (aw - h);
    let v = if h >= T::lit(2.0) * kappa / (eta * eps) { upper } else { lower };
    (v, upper, lower)
}

// ---------------------------------------------------------------------------
// Tresca limit.

/// `W̃(ξ_D) = sup_{τ_D ∈ K̃} τ_D:ξ_D − |τ_D|²/(4μ_s)` on deviatoric `ξ_D`.
pub fn w_tilde_dual<T: Real>(p: &ModelParams<T>, xi_d: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    check_deviatoric(xi_d)?;
    let n = xi_d.dim();
    let sp = xi_d.eigs();
    let mut h = [[T::zero(); 3]; 3];
    for (i, row) in h.iter_mut().enumerate().take(n) {
        row[i] = T::one() / (T::lit(2.0) * p.a_s.mu);
    }
    let pb = SpectralProblem {
        n,
        x: eig_array(&sp),
        h,
        form: GForm::Shear { mu: p.a_w.mu },
        mode: Mode::Constraint(T::lit(2.0) * p.kappa),
        trace_free: true,
    };
    let sol = pb.solve()?;
    Ok(EnvelopeEval {
        value: sol.value,
        theta_opt: None,
        tau_opt: Some(sp.compose(&sol.t[..n])),
        route: Route::Dual,
        residual: T::zero(),
    })
}

/// Orthonormal basis of trace-free diagonals.
fn deviatoric_basis<T: Real>(n: usize) -> Vec<Vec<T>> {
    let s2 = T::lit(2.0).sqrt();
    if n == 2 {
        vec![vec![T::one() / s2, -T::one() / s2]]
    } else {
        let s6 = T::lit(6.0).sqrt();
        vec![
            vec![T::one() / s2, -T::one() / s2, T::zero()],
            vec![T::one() / s6, T::one() / s6, -T::lit(2.0) / s6],
        ]
    }
}

/// `W̃ = f̃ □ √(2κh̃)` over trace-free strains, checked against [`w_tilde_dual`].
pub fn w_tilde_primal<T: Real>(p: &ModelParams<T>, xi_d: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    check_deviatoric(xi_d)?;
    let n = xi_d.dim();
    let x = xi_d.eigs().values().to_vec();
    let basis = deviatoric_basis::<T>(n);
    let c = T::lit(2.0) * p.kappa * p.a_w.mu;
    let lift = |z: &[T]| -> Vec<T> {
        (0..n).map(|i| basis.iter().zip(z).map(|(b, zk)| b[i] * *zk).sum()).collect()
    };
    let obj = |z: &[T]| {
        let t = lift(z);
        let mut sq = T::zero();
        let mut abs = T::zero();
        for (xi, ti) in x.iter().zip(&t) {
            sq = sq + (*xi - *ti).powi(2);
            abs = abs + ti.abs();
        }
        p.a_s.mu * sq + (c * abs * abs).sqrt()
    };
    let start: Vec<T> = basis.iter().map(|b| b.iter().zip(&x).map(|(u, v)| *u * *v).sum()).collect();
    let (_, value) = minimize_convex(obj, n - 1, T::lit(4.0) * xi_d.norm(), &[start], PrimalOptions::default());
    let dual = w_tilde_dual(p, xi_d)?.value;
    finish_primal(value, dual, default_gap_tol())
}

/// Alias of [`w_tilde_dual`].
pub fn w_tilde<T: Real>(p: &ModelParams<T>, xi_d: &SymMat<T>) -> Result<EnvelopeEval<T>> {
    w_tilde_dual(p, xi_d)
}

/// Pointwise Tresca limit `(tr ξ)²(λ_s/2 + μ_s/n) + W̃(ξ_D)`.
pub fn tresca_limit_bulk<T: Real>(p: &ModelParams<T>, xi: &SymMat<T>) -> Result<T> {
    let (_, dev) = dev_split(xi);
    Ok(tresca_spherical(p, xi) + w_tilde_dual(p, &dev)?.value)
}

// ---------------------------------------------------------------------------
// One-sided characterization.

/// Outcome of [`characterization_check`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CharacterizationReport {
    pub samples: usize,
    /// Samples with `W̄(ξ) > f(ξ)`.
    pub f_violations: usize,
    /// Rank-ones with `W̄(a⊙b) > √(2ακA_w(a⊙b):(a⊙b))`.
    pub rank_one_violations: usize,
    pub max_f_excess: f64,
    pub max_rank_one_excess: f64,
}

/// Checks that `W̄` lies below both `f` and the rank-one bound at random
/// samples. Maximality among such functions is not checked.
pub fn characterization_check<T: Real>(
    p: &ModelParams<T>,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<CharacterizationReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = CharacterizationReport {
        samples,
        f_violations: 0,
        rank_one_violations: 0,
        max_f_excess: f64::NEG_INFINITY,
        max_rank_one_excess: f64::NEG_INFINITY,
    };
    let tol = T::lit(1e-12).max(T::eps() * T::lit(64.0));
    let packed = if dim == 2 { 3 } else { 6 };
    for _ in 0..samples {
        let scale = T::lit(10f64.powf(rng.gen_range(-1.5..1.5)));
        let v: Vec<T> = (0..packed).map(|_| T::lit(rng.gen_range(-1.0..1.0)) * scale).collect();
        let xi = SymMat::from_packed(&v)?;
        let w = w_bar_dual(p, &xi)?.value;
        let f = f_strong(p, &xi);
        let ex = w - f;
        rep.max_f_excess = rep.max_f_excess.max(ex.as_f64());
        if ex > tol * (T::one() + f) {
            rep.f_violations += 1;
        }
        let a: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0)) * scale).collect();
        let b: Vec<T> = (0..dim).map(|_| T::lit(rng.gen_range(-1.0..1.0))).collect();
        let ab = sym_outer(&a, &b)?;
        let bound = (T::lit(2.0) * p.alpha * p.kappa * p.a_w.quad(&ab)).sqrt();
        let w = w_bar_dual(p, &ab)?.value;
        let ex = w - bound;
        rep.max_rank_one_excess = rep.max_rank_one_excess.max(ex.as_f64());
        if ex > tol * (T::one() + bound) {
            rep.rank_one_violations += 1;
        }
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::densities::{g_quad, g_weak, in_k};

    fn params() -> ModelParams<f64> {
        ModelParams::hencky(1.0, 1.0, 2.0, 1.5, 0.7, 1.0).unwrap()
    }

    fn sample(n: usize, k: u64) -> SymMat<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(k);
        let v: Vec<f64> = (0..if n == 2 { 3 } else { 6 }).map(|_| rng.gen_range(-2.0..2.0)).collect();
        SymMat::from_packed(&v).unwrap()
    }

    #[test]
    fn f_eps_endpoints() {
        let p = params();
        for (n, k) in [(2, 1), (3, 2), (2, 3)] {
            let xi = sample(n, k);
            let eps = 0.05;
            let f0 = f_eps(&p, eps, 0.0, &xi).unwrap();
            assert!((f0 - f_strong(&p, &xi)).abs() < 1e-12 * (1.0 + f0));
            let f1 = f_eps(&p, eps, 1.0, &xi).unwrap();
            let g = g_weak(&p, eps, &xi).unwrap();
            assert!((f1 - g).abs() < 1e-12 * (1.0 + g));
        }
        let z = SymMat::zeros(2).unwrap();
        assert!((f_eps(&p, 0.1, 0.3, &z).unwrap() - 0.7 * 0.3 / 0.1).abs() < 1e-14);
        assert!(f_eps(&p, 0.1, 1.3, &z).is_err());
    }

    #[test]
    fn envelope_at_zero_and_below_w_eps() {
        let p = params();
        let e = sq_envelope(&p, 0.1, &SymMat::zeros(3).unwrap()).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.theta_opt, Some(0.0));
        for k in 0..6 {
            let xi = sample(2 + (k as usize % 2), 10 + k);
            let e = sq_envelope(&p, 0.1, &xi).unwrap();
            let w = crate::densities::w_eps(&p, 0.1, &xi).unwrap();
            assert!(e.value <= w + 1e-12 * (1.0 + w));
            let th = e.theta_opt.unwrap();
            assert!((0.0..=1.0).contains(&th));
        }
    }

    #[test]
    fn w_bar_interior_equals_f() {
        let p = params();
        let xi = sample(3, 4).scale(0.05);
        assert!(in_k(&p, &p.a_s.apply(&xi)));
        let w = w_bar_dual(&p, &xi).unwrap();
        assert!((w.value - f_strong(&p, &xi)).abs() < 1e-14);
    }

    #[test]
    fn w_bar_dual_stress_is_admissible() {
        let p = params();
        for k in 0..20 {
            let xi = sample(2 + (k as usize % 2), 100 + k).scale(5.0);
            let w = w_bar_dual(&p, &xi).unwrap();
            let tau = w.tau_opt.unwrap();
            assert!(g_quad(&p, &tau) <= 2.0 * p.alpha * p.kappa * (1.0 + 1e-8));
            let direct = tau.ddot(&xi) - 0.5 * p.a_s.inverse_quad(&tau).unwrap();
            assert!((direct - w.value).abs() < 1e-10 * (1.0 + w.value));
        }
    }

    #[test]
    fn primal_agrees_with_dual() {
        let p = params();
        for k in 0..12 {
            let xi = sample(2 + (k as usize % 2), 200 + k);
            let w = w_bar_primal(&p, &xi).unwrap();
            assert!(w.residual <= 1e-6 * (1.0 + w.value));
        }
    }

    #[test]
    fn kohn_strang_zero_and_continuity() {
        let p = params();
        assert_eq!(kohn_strang_envelope(&p, 0.1, &SymMat::zeros(2).unwrap()).unwrap(), 0.0);
        let (eta, eps, kappa): (f64, f64, f64) = (0.01, 0.01, 0.7);
        let h = 2.0 * kappa / (eta * eps);
        let (_, up, lo) = kohn_strang_branches(eta, eps, kappa, h, 0.3 * h);
        assert!((up - lo).abs() <= 1e-12 * up);
    }

    #[test]
    fn tresca_limit_examples() {
        let p = ModelParams::hencky(1.0, 1.0, 2.0, 2.0, 1.0, 1.0).unwrap();
        assert!((tresca_limit_bulk(&p, &SymMat::identity(2).unwrap()).unwrap() - 8.0f64).abs() < 1e-14);
        assert_eq!(w_tilde(&p, &SymMat::zeros(3).unwrap()).unwrap().value, 0.0);
        let xi = SymMat::from_diag(&[-3.0, 1.0, 2.0]).unwrap();
        let w = w_tilde_primal(&p, &xi).unwrap();
        assert!(w.residual < 1e-6 * (1.0 + w.value));
    }

    #[test]
    fn tresca_envelope_bounds() {
        let p = params();
        let z = SymMat::zeros(2).unwrap();
        assert_eq!(sq_envelope_tresca(&p, 0.1, &z).unwrap().value, 0.0);
        let xi = sample(2, 7);
        let eps = 0.05;
        let e = sq_envelope_tresca(&p, eps, &xi).unwrap().value;
        let weak = 0.5 * tresca_weak_tensor(&p, eps).quad(&xi) + p.kappa / eps;
        assert!(e <= f_strong(&p, &xi).min(weak) + 1e-12);
    }

    #[test]
    fn characterization_holds() {
        let rep = characterization_check(&params(), 3, 200, 5).unwrap();
        assert_eq!(rep.f_violations, 0);
        assert_eq!(rep.rank_one_violations, 0);
    }
}
