//! Brute-force counterparts of the semi-analytic routines, used to back the
//! derived values in tests and in the `verify` command.
//!
//! Everything here is deliberately naive: grids and random sampling, no KKT
//! logic, no shared code with the spectral solver beyond the density formulas.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::densities::{
    f_strong, g_form, h_density, h_from_eigs, h_r, h_tilde, w_eps, GForm, ModelParams,
};
use crate::envelopes::{f_eps, w_bar_dual, w_bar_primal};
use crate::error::{Error, Result};
use crate::symcalc::SymMat;

/// Worst-case summary of one oracle run.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleReport {
    pub name: String,
    pub seed: u64,
    pub samples: usize,
    pub max_abs_gap: f64,
    pub max_rel_gap: f64,
    /// Packed entries of the input with the largest relative gap.
    pub worst_case_input: Vec<f64>,
}

impl OracleReport {
    fn new(name: impl Into<String>, seed: u64) -> Self {
        Self {
            name: name.into(),
            seed,
            samples: 0,
            max_abs_gap: f64::NEG_INFINITY,
            max_rel_gap: f64::NEG_INFINITY,
            worst_case_input: Vec::new(),
        }
    }

    fn record(&mut self, abs_gap: f64, scale: f64, input: &SymMat<f64>) {
        self.samples += 1;
        let rel = abs_gap / (1.0 + scale.abs());
        self.max_abs_gap = self.max_abs_gap.max(abs_gap);
        if rel > self.max_rel_gap || self.worst_case_input.is_empty() {
            self.max_rel_gap = rel;
            self.worst_case_input = input.packed().to_vec();
        }
    }
}

/// Sampling resolution for [`brute_inf_convolution`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GridSpec {
    /// Points per eigen-coordinate for the coaxial search.
    pub per_axis: usize,
    /// Points per packed coordinate for the general search.
    pub general_per_axis: usize,
    /// Box half-width in units of `|ξ|`.
    pub radius_factor: f64,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { per_axis: 201, general_per_axis: 41, radius_factor: 4.0 }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BruteInfConv {
    /// Minimum over `ξ'` diagonal in the eigenframe of `ξ`.
    pub diagonal: f64,
    /// Minimum over general symmetric `ξ'` on a coarser grid.
    pub general: f64,
    /// A priori bound on `diagonal − W̄(ξ)` from the grid step.
    pub grid_bound: f64,
}

fn lattice(per_axis: usize, dims: usize, r: f64, mut visit: impl FnMut(&[f64])) {
    let m = per_axis.max(2);
    let step = 2.0 * r / (m - 1) as f64;
    let mut z = vec![0.0; dims];
    for code in 0..m.pow(dims as u32) {
        let mut c = code;
        for zi in z.iter_mut() {
            *zi = -r + step * (c % m) as f64;
            c /= m;
        }
        visit(&z);
    }
}

/// Grid minimum of `f(ξ−ξ') + √(2ακh(ξ'))`.
pub fn brute_inf_convolution(p: &ModelParams<f64>, xi: &SymMat<f64>, grid: GridSpec) -> Result<BruteInfConv> {
    let n = xi.dim();
    let r = grid.radius_factor * xi.norm();
    if r == 0.0 {
        return Ok(BruteInfConv { diagonal: 0.0, general: 0.0, grid_bound: 0.0 });
    }
    let sp = xi.eigs();
    let x = sp.values().to_vec();
    let ak = 2.0 * p.alpha * p.kappa;
    let (ls, ms) = (p.a_s.lambda, p.a_s.mu);

    let mut diagonal = f64::INFINITY;
    lattice(grid.per_axis, n, r, |t| {
        let d: Vec<f64> = x.iter().zip(t).map(|(a, b)| a - b).collect();
        let tr: f64 = d.iter().sum();
        let f = 0.5 * (ls * tr * tr + 2.0 * ms * d.iter().map(|v| v * v).sum::<f64>());
        let v = f + (ak * h_from_eigs(&p.a_w, t)).sqrt();
        diagonal = diagonal.min(v);
    });

    let mut general = f64::INFINITY;
    let packed = if n == 2 { 3 } else { 6 };
    let mut err = None;
    lattice(grid.general_per_axis, packed, r, |z| {
        if err.is_some() {
            return;
        }
        match SymMat::from_packed(z) {
            Ok(xp) => {
                let v = f_strong(p, &(*xi - xp)) + (ak * h_density(p, &xp)).sqrt();
                general = general.min(v);
            }
            Err(e) => err = Some(e),
        }
    });
    if let Some(e) = err {
        return Err(e);
    }

    // Lipschitz bound of the objective on the box times the distance from the
    // minimizer to the nearest grid point.
    let step = 2.0 * r / (grid.per_axis.max(2) - 1) as f64;
    let lip_f = (n as f64 * ls + 2.0 * ms) * (xi.norm() + r) * (n as f64).sqrt();
    let lip_g = crate::densities::growth_upper_constant(p, n);
    let grid_bound = (lip_f + lip_g) * 0.5 * step * (n as f64).sqrt();
    Ok(BruteInfConv { diagonal, general, grid_bound })
}

/// Random symmetric matrix with log-uniform scale; every fourth draw has a
/// nearly repeated eigenvalue.
pub fn sample_sym(rng: &mut ChaCha8Rng, dim: usize, k: usize) -> Result<SymMat<f64>> {
    let scale = 10f64.powf(rng.gen_range(-1.0..1.0));
    if k % 4 == 3 {
        let a = rng.gen_range(-1.0..1.0);
        let mut d = vec![a, a + 1e-9 * rng.gen_range(-1.0..1.0)];
        if dim == 3 {
            d.push(rng.gen_range(-1.0..1.0));
        }
        let d: Vec<f64> = d.into_iter().map(|v| v * scale).collect();
        return Ok(SymMat::from_diag(&d)?.rotate(&random_rotation(rng, dim)));
    }
    let packed = if dim == 2 { 3 } else { 6 };
    let v: Vec<f64> = (0..packed).map(|_| rng.gen_range(-1.0..1.0) * scale).collect();
    SymMat::from_packed(&v)
}

/// Uniformly random rotation (embedded in 3×3).
pub fn random_rotation(rng: &mut ChaCha8Rng, dim: usize) -> [[f64; 3]; 3] {
    if dim == 2 {
        let a: f64 = rng.gen_range(0.0..std::f64::consts::TAU);
        let (s, c) = a.sin_cos();
        return [[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]];
    }
    // Uniform unit quaternion by rejection from the 4-ball.
    let mut q = [0.0f64; 4];
    loop {
        for v in q.iter_mut() {
            *v = rng.gen_range(-1.0..1.0);
        }
        let n2: f64 = q.iter().map(|v| v * v).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            for v in q.iter_mut() {
                *v /= n;
            }
            break;
        }
    }
    let [w, x, y, z] = q;
    [
        [1.0 - 2.0 * (y * y + z * z), 2.0 * (x * y - z * w), 2.0 * (x * z + y * w)],
        [2.0 * (x * y + z * w), 1.0 - 2.0 * (x * x + z * z), 2.0 * (y * z - x * w)],
        [2.0 * (x * z - y * w), 2.0 * (y * z + x * w), 1.0 - 2.0 * (x * x + y * y)],
    ]
}

/// Routine checked by [`rotation_robustness`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RotationOp {
    /// `F_ε(θ, ·)`, whose inner maximization runs in the eigenframe.
    FEpsInner { eps: f64, theta: f64 },
    WBarDual,
    WBarPrimal,
}

impl RotationOp {
    fn name(&self) -> &'static str {
        match self {
            RotationOp::FEpsInner { .. } => "rotation_f_eps_inner",
            RotationOp::WBarDual => "rotation_w_bar_dual",
            RotationOp::WBarPrimal => "rotation_w_bar_primal",
        }
    }

    fn eval(&self, p: &ModelParams<f64>, xi: &SymMat<f64>) -> Result<f64> {
        match *self {
            RotationOp::FEpsInner { eps, theta } => f_eps(p, eps, theta, xi),
            RotationOp::WBarDual => Ok(w_bar_dual(p, xi)?.value),
            RotationOp::WBarPrimal => Ok(w_bar_primal(p, xi)?.value),
        }
    }
}

/// Compares eigenframe-reduced optima against rotated inputs and, for the
/// dual, against off-frame stresses sampled around the optimizer.
pub fn rotation_robustness(
    p: &ModelParams<f64>,
    op: RotationOp,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = OracleReport::new(op.name(), seed);
    let bound = 2.0 * p.alpha * p.kappa;
    let gf = g_form(p);
    for k in 0..samples {
        let xi = sample_sym(&mut rng, dim, k)?;
        let v0 = op.eval(p, &xi)?;
        let rot = random_rotation(&mut rng, dim);
        let vr = op.eval(p, &xi.rotate(&rot))?;
        let mut gap = (vr - v0).abs();
        if let RotationOp::WBarDual = op {
            let tau = w_bar_dual(p, &xi)?.tau_opt.ok_or(Error::NoFeasibleCandidate)?;
            let tn = tau.norm().max(1e-300);
            for j in 0..32 {
                let s = tn * 10f64.powf(-1.0 - 5.0 * j as f64 / 31.0);
                let packed = if dim == 2 { 3 } else { 6 };
                let d: Vec<f64> = (0..packed).map(|_| rng.gen_range(-1.0..1.0) * s).collect();
                let mut t = tau + SymMat::from_packed(&d)?;
                let g = gf.eval(&t);
                if g > bound {
                    t = t.scale((bound / g).sqrt());
                }
                let val = t.ddot(&xi) - 0.5 * p.a_s.inverse_quad(&t)?;
                gap = gap.max(val - v0);
            }
        }
        rep.record(gap, v0, &xi);
    }
    Ok(rep)
}

/// Penalty whose conjugate [`conjugate_bruteforce`] samples.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Conjugate {
    /// `sup_τ 2τ:ξ − G(τ)`, reference `h(ξ)`.
    G,
    /// `sup_{tr τ = 0} τ:ξ − G̃(τ)`, reference `h̃(ξ)/4` (deviatoric `ξ`).
    GTilde,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TauGrid {
    pub per_axis: usize,
    /// Box half-width; `None` picks one from the growth of the linear term.
    pub radius: Option<f64>,
}

impl Default for TauGrid {
    fn default() -> Self {
        Self { per_axis: 401, radius: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConjugateValue {
    pub brute: f64,
    pub reference: f64,
    /// A priori bound on `reference − brute` from the grid step.
    pub grid_bound: f64,
}

/// Grid supremum over stresses coaxial with `ξ`. Coaxial stresses suffice
/// because `G` is spectral: by von Neumann's trace inequality `τ:ξ` is
/// maximized over an orbit of `τ` when the frames coincide.
pub fn conjugate_bruteforce(
    p: &ModelParams<f64>,
    which: Conjugate,
    xi: &SymMat<f64>,
    grid: TauGrid,
) -> Result<ConjugateValue> {
    let n = xi.dim();
    let x = xi.eigs().values().to_vec();
    let (lw, mw) = (p.a_w.lambda, p.a_w.mu);
    let (lin, reference, form, dims) = match which {
        Conjugate::G => (2.0, h_density(p, xi), GForm::Lame { lambda: lw, mu: mw }, n),
        Conjugate::GTilde => (1.0, h_tilde(p, xi)? / 4.0, GForm::Shear { mu: mw }, n - 1),
    };
    let curvature = match which {
        Conjugate::G => 1.0 / mw + 1.0 / (lw + mw),
        Conjugate::GTilde => 1.0 / mw,
    };
    let r = grid.radius.unwrap_or_else(|| 2.0 * lin * xi.norm() / curvature.min(2.0 / (lw + 2.0 * mw)) + 1e-12);
    // Deviatoric stresses: orthonormal basis of the trace-free diagonal plane.
    let dev_basis: Vec<Vec<f64>> = if n == 2 {
        vec![vec![1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt()]]
    } else {
        vec![vec![1.0 / 2f64.sqrt(), -1.0 / 2f64.sqrt(), 0.0], vec![1.0 / 6f64.sqrt(), 1.0 / 6f64.sqrt(), -2.0 / 6f64.sqrt()]]
    };
    let mut best = f64::NEG_INFINITY;
    let mut best_norm = 0.0f64;
    let mut t = vec![0.0; n];
    lattice(grid.per_axis, dims, r, |z| {
        match which {
            Conjugate::G => t.copy_from_slice(z),
            Conjugate::GTilde => {
                for (i, ti) in t.iter_mut().enumerate() {
                    *ti = dev_basis.iter().zip(z).map(|(b, c)| b[i] * c).sum();
                }
            }
        }
        let mut sorted = t.clone();
        sorted.sort_by(|a, b| a.total_cmp(b));
        let v = lin * t.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>() - form.eval_sorted(&sorted);
        if v > best {
            best = v;
            best_norm = t.iter().map(|a| a * a).sum::<f64>().sqrt();
        }
    });
    let step = 2.0 * r / (grid.per_axis.max(2) - 1) as f64;
    let delta = 0.5 * step * (dims as f64).sqrt();
    // The maximizer can sit on a ridge of the penalty (equal eigenvalues,
    // where h is flat along a segment), so the loss is first order in the
    // step: |∇G(τ)| ≤ curvature·|τ| and |τ*| ≤ |τ_grid| + δ. Only the 2-D
    // Tresca case is a one-dimensional smooth problem.
    let smooth = which == Conjugate::GTilde && n == 2;
    let grid_bound = if smooth {
        0.5 * curvature * dims as f64 * (0.5 * step).powi(2)
    } else {
        (lin * xi.norm() + curvature * (best_norm + 2.0 * delta)) * delta
    };
    Ok(ConjugateValue { brute: best, reference, grid_bound })
}

/// Function probed by [`convexity_probe`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ConvexFn {
    WBar,
    /// `√(2ακ h_r)` in 2-D.
    SqrtHr { r: f64 },
    /// `W_ε = min(f, g_ε)`; not convex, probed across the `f = g_ε` crossover.
    WEps { eps: f64 },
}

impl ConvexFn {
    fn name(&self) -> &'static str {
        match self {
            ConvexFn::WBar => "convexity_w_bar",
            ConvexFn::SqrtHr { .. } => "convexity_sqrt_h_r",
            ConvexFn::WEps { .. } => "convexity_w_eps",
        }
    }

    fn eval(&self, p: &ModelParams<f64>, xi: &SymMat<f64>) -> Result<f64> {
        match *self {
            ConvexFn::WBar => Ok(w_bar_dual(p, xi)?.value),
            ConvexFn::SqrtHr { r } => Ok((2.0 * p.alpha * p.kappa * h_r(p, r, xi)?.max(0.0)).sqrt()),
            ConvexFn::WEps { eps } => w_eps(p, eps, xi),
        }
    }
}

/// Midpoint convexity gaps `φ(m) − (φ(a)+φ(b))/2` on random segments; a
/// positive `max_abs_gap` is a violation.
pub fn convexity_probe(
    p: &ModelParams<f64>,
    fun: ConvexFn,
    dim: usize,
    samples: usize,
    seed: u64,
) -> Result<OracleReport> {
    if let ConvexFn::SqrtHr { .. } = fun {
        if dim != 2 {
            return Err(Error::DimensionMismatch { expected: 2, got: dim });
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = OracleReport::new(fun.name(), seed);
    for k in 0..samples {
        let (a, b) = match fun {
            ConvexFn::WEps { eps } => {
                // Segment along a ray straddling the crossover radius.
                let dir = sample_sym(&mut rng, dim, 0)?;
                let dir = dir.scale(1.0 / dir.norm());
                let gap = f_strong(p, &dir) - 0.5 * p.eta(eps) * p.a_w.quad(&dir);
                if gap <= 0.0 {
                    continue;
                }
                let sc = (p.kappa / eps / gap).sqrt();
                let d = sc * rng.gen_range(0.05..0.5);
                (dir.scale(sc - d), dir.scale(sc + d))
            }
            _ => (sample_sym(&mut rng, dim, k)?, sample_sym(&mut rng, dim, k + 1)?),
        };
        let m = a.axpy(1.0, &b).scale(0.5);
        let (fa, fb, fm) = (fun.eval(p, &a)?, fun.eval(p, &b)?, fun.eval(p, &m)?);
        let chord = 0.5 * (fa + fb);
        rep.record(fm - chord, chord, &m);
    }
    Ok(rep)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params() -> ModelParams<f64> {
        ModelParams::hencky(1.0, 1.0, 2.0, 1.5, 0.7, 1.0).unwrap()
    }

    #[test]
    fn zero_input_is_zero() {
        let p = params();
        let z = SymMat::zeros(2).unwrap();
        let b = brute_inf_convolution(&p, &z, GridSpec::default()).unwrap();
        assert_eq!((b.diagonal, b.general), (0.0, 0.0));
        let c = conjugate_bruteforce(&p, Conjugate::G, &z, TauGrid::default()).unwrap();
        assert_eq!(c.reference, 0.0);
        assert!(c.brute.abs() <= c.grid_bound);
    }

    #[test]
    fn h_of_identity_is_twelve() {
        let p = ModelParams::hencky(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap();
        let c = conjugate_bruteforce(&p, Conjugate::G, &SymMat::identity(2).unwrap(), TauGrid::default()).unwrap();
        assert_eq!(c.reference, 12.0);
        assert!(c.brute <= 12.0 + 1e-12 && 12.0 - c.brute <= c.grid_bound, "{c:?}");
    }

    #[test]
    fn tresca_conjugate_matches_quarter_h_tilde() {
        let p = params();
        let xi = SymMat::from_packed(&[0.4, -0.1, 0.25, 0.3, -0.2, -0.3]).unwrap();
        let (_, dev) = crate::symcalc::dev_split(&xi);
        let c = conjugate_bruteforce(&p, Conjugate::GTilde, &dev, TauGrid::default()).unwrap();
        assert!(c.brute <= c.reference + 1e-12 && c.reference - c.brute <= c.grid_bound, "{c:?}");
    }

    #[test]
    fn inf_convolution_brackets_the_dual() {
        let p = params();
        let xi = SymMat::from_packed(&[1.2, -0.7, 0.9]).unwrap();
        let w = w_bar_dual(&p, &xi).unwrap().value;
        let b = brute_inf_convolution(&p, &xi, GridSpec::default()).unwrap();
        assert!(b.diagonal >= w - 1e-12 && b.diagonal - w <= b.grid_bound);
        assert!(b.general >= w - 1e-12);
        // Refinement tightens the coaxial search.
        let fine = brute_inf_convolution(&p, &xi, GridSpec { per_axis: 801, general_per_axis: 3, radius_factor: 4.0 }).unwrap();
        assert!(fine.diagonal - w <= b.diagonal - w);
    }

    #[test]
    fn scalar_huber_grid() {
        // inf_s' ½(3 − s')² + |s'| on a fine grid.
        let mut best = f64::INFINITY;
        lattice(1201, 1, 12.0, |z| best = best.min(0.5 * (3.0 - z[0]).powi(2) + z[0].abs()));
        assert!((best - 2.5).abs() < 1e-3);
    }

    #[test]
    fn rotations_do_not_change_w_bar() {
        let p = params();
        for dim in [2, 3] {
            let rep = rotation_robustness(&p, RotationOp::WBarDual, dim, 40, 9).unwrap();
            assert!(rep.max_rel_gap <= 1e-8, "{rep:?}");
        }
    }

    #[test]
    fn w_eps_is_not_convex() {
        let p = params();
        let rep = convexity_probe(&p, ConvexFn::WEps { eps: 0.1 }, 2, 50, 3).unwrap();
        assert!(rep.max_abs_gap > 0.0);
        let rep = convexity_probe(&p, ConvexFn::WBar, 2, 200, 3).unwrap();
        assert!(rep.max_abs_gap <= 1e-8, "{rep:?}");
    }

    #[test]
    fn reports_are_reproducible() {
        let p = params();
        let a = convexity_probe(&p, ConvexFn::SqrtHr { r: 0.5 }, 2, 100, 17).unwrap();
        let b = convexity_probe(&p, ConvexFn::SqrtHr { r: 0.5 }, 2, 100, 17).unwrap();
        assert_eq!(a, b);
        assert!(convexity_probe(&p, ConvexFn::SqrtHr { r: 0.5 }, 3, 1, 1).is_err());
    }
}
