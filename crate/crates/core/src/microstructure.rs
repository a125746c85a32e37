//! Explicit laminate recovery sequences on the unit square and their exact
//! energies, plus evaluation of the limit functional on piecewise fields.
//!
//! Both constructions cut `(0, 1)` into `N + 1` cells at `s_i = i/(N+1)` and
//! replace the affine profile by a staircase: flat plateaus joined by steep
//! ramps of half-width `δ` around each interior node. Only the ramps strain,
//! and they are exactly the damaged set, so the energy is a sum of
//! (area × constant density) terms and is computed without quadrature.

use crate::densities::{h_density, support_k_tilde, ModelParams};
use crate::envelopes::{tresca_limit_bulk, w_bar_dual};
use crate::error::{Error, Result};
use crate::scalar::Real;
use crate::symcalc::{sym_outer, SymMat};

/// Which construction to build.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LaminateCase<T> {
    /// Diagonal target `diag(ξ1, ξ2)` with `ξ1 ξ2 > 0`: crossed strips.
    One { xi1: T, xi2: T },
    /// Rank-one target `a ⊙ b`: strips orthogonal to `b`.
    Two { a: [T; 2], b: [T; 2] },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LaminateSpec<T> {
    pub case: LaminateCase<T>,
    pub eps: T,
    pub n_layers: usize,
    pub params: ModelParams<T>,
}

/// Default layer count `N_ε = ⌈ε^{-1/2}⌉`.
pub fn default_layers<T: Real>(eps: T) -> usize {
    let n = eps.powf(T::lit(-0.5)).ceil();
    n.to_usize().unwrap_or(usize::MAX).max(1)
}

impl<T: Real> LaminateSpec<T> {
    pub fn new(case: LaminateCase<T>, eps: T, params: ModelParams<T>) -> Self {
        Self { case, eps, n_layers: default_layers(eps), params }
    }

    pub fn target(&self) -> SymMat<T> {
        match self.case {
            LaminateCase::One { xi1, xi2 } => SymMat::from_diag(&[xi1, xi2]).expect("2 is valid"),
            LaminateCase::Two { a, b } => sym_outer(&a, &b).expect("equal lengths"),
        }
    }
}

/// Staircase profile `w(s)` with ramps of half-width `delta` centered at
/// `s_i = i/(N+1)`, `i = 1..N`, and total rise `amplitude · N/(N+1)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Profile<T> {
    pub n_layers: usize,
    pub delta: T,
    pub amplitude: T,
}

impl<T: Real> Profile<T> {
    fn cell(&self) -> T {
        T::one() / T::from_count(self.n_layers + 1)
    }

    /// Ramp slope `amplitude / (2δ(N+1))`.
    pub fn ramp_slope(&self) -> T {
        if self.delta == T::zero() {
            return T::zero();
        }
        self.amplitude * self.cell() / (T::lit(2.0) * self.delta)
    }

    /// Index `i ∈ 1..=N` of the ramp containing `s`, if any.
    pub fn ramp_index(&self, s: T) -> Option<usize> {
        if self.delta == T::zero() {
            return None;
        }
        let h = self.cell();
        let k = (s / h).round();
        let i = k.to_usize()?;
        if i == 0 || i > self.n_layers {
            return None;
        }
        if (s - k * h).abs() < self.delta {
            Some(i)
        } else {
            None
        }
    }

    pub fn value(&self, s: T) -> T {
        let h = self.cell();
        if let Some(i) = self.ramp_index(s) {
            let si = T::from_count(i) * h;
            return self.amplitude * (si - h) + self.ramp_slope() * (s - si + self.delta);
        }
        // Plateau: the value of the last node at or below `s`, clamped to
        // `[0, N]` so the profile is constant up to the boundary.
        let k = (s / h).floor().max(T::zero()).min(T::from_count(self.n_layers));
        self.amplitude * k * h
    }

    pub fn slope(&self, s: T) -> T {
        if self.ramp_index(s).is_some() {
            self.ramp_slope()
        } else {
            T::zero()
        }
    }
}

/// One damaged strip `{x : |x·normal − center| < half_width}`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Strip<T> {
    pub normal: [T; 2],
    pub center: T,
    pub half_width: T,
}

/// A built laminate: profiles plus their damaged strips.
#[derive(Clone, Debug, PartialEq)]
pub struct Laminate<T> {
    pub spec: LaminateSpec<T>,
    /// Case 1: one profile per axis. Case 2: a single profile in `x·b`.
    pub profiles: Vec<Profile<T>>,
    pub strips: Vec<Strip<T>>,
}

impl<T: Real> Laminate<T> {
    /// Displacement `u_ε(x)`.
    pub fn displacement(&self, x: [T; 2]) -> [T; 2] {
        match self.spec.case {
            LaminateCase::One { .. } => [self.profiles[0].value(x[0]), self.profiles[1].value(x[1])],
            LaminateCase::Two { a, b } => {
                let w = self.profiles[0].value(x[0] * b[0] + x[1] * b[1]);
                [a[0] * w, a[1] * w]
            }
        }
    }

    /// Symmetric gradient `e(u_ε)(x)` (defined off the ramp edges).
    pub fn strain(&self, x: [T; 2]) -> SymMat<T> {
        match self.spec.case {
            LaminateCase::One { .. } => {
                SymMat::from_diag(&[self.profiles[0].slope(x[0]), self.profiles[1].slope(x[1])]).expect("2 is valid")
            }
            LaminateCase::Two { a, b } => {
                let s = self.profiles[0].slope(x[0] * b[0] + x[1] * b[1]);
                sym_outer(&a, &b).expect("equal lengths").scale(s)
            }
        }
    }

    pub fn is_damaged(&self, x: [T; 2]) -> bool {
        self.strips.iter().any(|st| (x[0] * st.normal[0] + x[1] * st.normal[1] - st.center).abs() < st.half_width)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LaminateResult<T> {
    /// `E_ε(u_ε, χ_{D_ε})`.
    pub energy: T,
    /// `|D_ε|`.
    pub damaged_volume: T,
    /// `√(2ακ h(ξ))`.
    pub limit_bound: T,
    /// `energy / limit_bound − 1`.
    pub relative_gap: T,
    pub band_geometry: Vec<Strip<T>>,
}

/// Ramp half-width minimizing the strip energy: `|amp|√A/(2√(2κ/α)) · ε/(N+1)`.
fn optimal_delta<T: Real>(p: &ModelParams<T>, amp_sqrt_a: T, eps: T, n: usize) -> T {
    amp_sqrt_a.abs() / (T::lit(2.0) * (T::lit(2.0) * p.kappa / p.alpha).sqrt()) * eps / T::from_count(n + 1)
}

/// Builds the staircase displacement and the damaged strips.
pub fn build_laminate<T: Real>(spec: &LaminateSpec<T>) -> Result<Laminate<T>> {
    crate::densities::check_eps(spec.eps)?;
    if spec.n_layers == 0 {
        return Err(Error::InvalidLaminate("at least one layer is required".into()));
    }
    let p = &spec.params;
    let n = spec.n_layers;
    let h = T::one() / T::from_count(n + 1);
    let (profiles, normals) = match spec.case {
        LaminateCase::One { xi1, xi2 } => {
            if !(xi1 * xi2 > T::zero()) && !(xi1 == T::zero() && xi2 == T::zero()) {
                return Err(Error::InvalidLaminate(format!(
                    "crossed strips need eigenvalues of equal sign, got {xi1} and {xi2}"
                )));
            }
            let a11 = p.a_w.lambda + T::lit(2.0) * p.a_w.mu;
            let prof = |xi: T| Profile { n_layers: n, delta: optimal_delta(p, xi * a11.sqrt(), spec.eps, n), amplitude: xi };
            (vec![prof(xi1), prof(xi2)], vec![[T::one(), T::zero()], [T::zero(), T::one()]])
        }
        LaminateCase::Two { a, b } => {
            let ab = sym_outer(&a, &b)?;
            let delta = optimal_delta(p, h_density(p, &ab).sqrt(), spec.eps, n);
            (vec![Profile { n_layers: n, delta, amplitude: T::one() }], vec![b])
        }
    };
    let mut strips = Vec::new();
    for (prof, nv) in profiles.iter().zip(&normals) {
        if prof.delta >= T::lit(0.5) * h {
            return Err(Error::InvalidLaminate(format!(
                "ramps overlap: half-width {} >= half cell {}",
                prof.delta,
                T::lit(0.5) * h
            )));
        }
        if prof.delta > T::zero() {
            for i in 1..=n {
                strips.push(Strip { normal: *nv, center: T::from_count(i) * h, half_width: prof.delta });
            }
        }
    }
    Ok(Laminate { spec: *spec, profiles, strips })
}

/// Area of `{x ∈ (0,1)² : x·b < c}` by clipping the square.
fn halfplane_area<T: Real>(b: [T; 2], c: T) -> T {
    let square = [[T::zero(), T::zero()], [T::one(), T::zero()], [T::one(), T::one()], [T::zero(), T::one()]];
    let g = |p: &[T; 2]| p[0] * b[0] + p[1] * b[1] - c;
    let mut poly: Vec<[T; 2]> = Vec::with_capacity(6);
    for k in 0..4 {
        let p = square[k];
        let q = square[(k + 1) % 4];
        let (gp, gq) = (g(&p), g(&q));
        if gp <= T::zero() {
            poly.push(p);
        }
        if (gp < T::zero() && gq > T::zero()) || (gp > T::zero() && gq < T::zero()) {
            let t = gp / (gp - gq);
            poly.push([p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])]);
        }
    }
    let m = poly.len();
    let mut twice = T::zero();
    for k in 0..m {
        let (p, q) = (poly[k], poly[(k + 1) % m]);
        twice = twice + p[0] * q[1] - q[0] * p[1];
    }
    (twice / T::lit(2.0)).abs()
}

/// Exact energy `E_ε(u_ε, χ_{D_ε})` of the construction, with `η_ε = αε`.
pub fn laminate_energy<T: Real>(spec: &LaminateSpec<T>) -> Result<LaminateResult<T>> {
    let lam = build_laminate(spec)?;
    let p = &spec.params;
    let eps = spec.eps;
    let eta = p.alpha * eps;
    let n = T::from_count(spec.n_layers);
    let diss = p.kappa / eps;
    let half = T::lit(0.5);
    let xi = spec.target();
    let limit_bound = (T::lit(2.0) * p.alpha * p.kappa * h_density(p, &xi)).sqrt();
    let (energy, damaged) = match spec.case {
        LaminateCase::One { .. } => {
            let (p1, p2) = (lam.profiles[0], lam.profiles[1]);
            let (w1, w2) = (T::lit(2.0) * n * p1.delta, T::lit(2.0) * n * p2.delta);
            let (s1, s2) = (p1.ramp_slope(), p2.ramp_slope());
            let a11 = p.a_w.lambda + T::lit(2.0) * p.a_w.mu;
            let only1 = w1 * (T::one() - w2) * (half * eta * a11 * s1 * s1 + diss);
            let only2 = w2 * (T::one() - w1) * (half * eta * a11 * s2 * s2 + diss);
            let both_strain = SymMat::from_diag(&[s1, s2])?;
            let both = w1 * w2 * (half * eta * p.a_w.quad(&both_strain) + diss);
            let zero_area = |w: T| if w > T::zero() { T::one() } else { T::zero() };
            // A zero-width family contributes no strips (and no damage).
            let energy = zero_area(w1) * only1 + zero_area(w2) * only2 + zero_area(w1 * w2) * both;
            (energy, w1 + w2 - w1 * w2)
        }
        LaminateCase::Two { a, b } => {
            let prof = lam.profiles[0];
            let mut area = T::zero();
            for st in &lam.strips {
                area = area + halfplane_area(b, st.center + st.half_width) - halfplane_area(b, st.center - st.half_width);
            }
            let s = prof.ramp_slope();
            let hab = h_density(p, &sym_outer(&a, &b)?);
            let density = half * eta * hab * s * s + diss;
            (if area > T::zero() { area * density } else { T::zero() }, area)
        }
    };
    let relative_gap = if limit_bound > T::zero() { energy / limit_bound - T::one() } else { T::zero() };
    Ok(LaminateResult { energy, damaged_volume: damaged, limit_bound, relative_gap, band_geometry: lam.strips })
}

/// A straight jump segment of a piecewise-smooth displacement.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JumpSegment<T> {
    pub length: T,
    /// Jump `[u] = u⁺ − u⁻`.
    pub jump: [T; 2],
    /// Unit normal `ν`.
    pub normal: [T; 2],
}

fn check_unit_normal<T: Real>(nu: &[T; 2]) -> Result<()> {
    let n = (nu[0] * nu[0] + nu[1] * nu[1]).sqrt();
    if (n - T::one()).abs() > T::lit(1e-12).max(T::eps() * T::lit(16.0)) {
        return Err(Error::NonUnitNormal(n.as_f64()));
    }
    Ok(())
}

/// `∫ W̄(e(u)) dx + Σ_segments length · √(2ακ A_w([u]⊙ν):([u]⊙ν))`.
///
/// `bulk` is a list of `(area, strain)` pairs, e.g. one per grid cell.
pub fn limit_energy_piecewise<T: Real>(
    p: &ModelParams<T>,
    bulk: &[(T, SymMat<T>)],
    jumps: &[JumpSegment<T>],
) -> Result<T> {
    let mut total = T::zero();
    for (area, e) in bulk {
        total = total + *area * w_bar_dual(p, e)?.value;
    }
    for j in jumps {
        check_unit_normal(&j.normal)?;
        let s = sym_outer(&j.jump, &j.normal)?;
        total = total + j.length * (T::lit(2.0) * p.alpha * p.kappa * p.a_w.quad(&s)).sqrt();
    }
    Ok(total)
}

/// Tresca counterpart: bulk density `(tr ξ)²(λ_s/2+μ_s/n) + W̃(ξ_D)` and
/// jumps weighted by `√(2κh̃([u]⊙ν))`. Jumps must be tangential (`[u]·ν = 0`).
pub fn limit_energy_piecewise_tresca<T: Real>(
    p: &ModelParams<T>,
    bulk: &[(T, SymMat<T>)],
    jumps: &[JumpSegment<T>],
) -> Result<T> {
    let mut total = T::zero();
    for (area, e) in bulk {
        total = total + *area * tresca_limit_bulk(p, e)?;
    }
    for j in jumps {
        check_unit_normal(&j.normal)?;
        let normal_part = j.jump[0] * j.normal[0] + j.jump[1] * j.normal[1];
        let scale = (j.jump[0] * j.jump[0] + j.jump[1] * j.jump[1]).sqrt();
        if normal_part.abs() > T::lit(1e-12) * (T::one() + scale) {
            return Err(Error::NormalJump(normal_part.as_f64()));
        }
        let mut s = sym_outer(&j.jump, &j.normal)?;
        // Remove the rounding-level trace left by the tolerance above.
        let tr = s.trace() / T::lit(2.0);
        s.set(0, 0, s.get(0, 0) - tr);
        s.set(1, 1, s.get(1, 1) - tr);
        total = total + j.length * support_k_tilde(p, &s)?;
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit() -> ModelParams<f64> {
        ModelParams::hencky(1.0, 1.0, 1.0, 1.0, 1.0, 1.0).unwrap()
    }

    #[test]
    fn layer_schedule() {
        assert_eq!(default_layers(1e-4), 100);
        assert_eq!(default_layers(0.1), 4);
        assert_eq!(default_layers(1.0), 1);
    }

    #[test]
    fn single_layer_has_one_centered_strip() {
        let mut spec = LaminateSpec::new(LaminateCase::Two { a: [1.0, 0.0], b: [0.0, 1.0] }, 0.1, unit());
        spec.n_layers = 1;
        let lam = build_laminate(&spec).unwrap();
        assert_eq!(lam.strips.len(), 1);
        assert_eq!(lam.strips[0].center, 0.5);
        let d = lam.strips[0].half_width;
        let r = laminate_energy(&spec).unwrap();
        assert!((r.damaged_volume - 2.0 * d).abs() < 1e-15);
    }

    #[test]
    fn rejects_mixed_signs_in_case_one() {
        let spec = LaminateSpec::new(LaminateCase::One { xi1: 1.0, xi2: -1.0 }, 0.01, unit());
        assert!(matches!(build_laminate(&spec), Err(Error::InvalidLaminate(_))));
    }

    #[test]
    fn zero_target_has_zero_energy() {
        let spec = LaminateSpec::new(LaminateCase::One { xi1: 0.0, xi2: 0.0 }, 0.01, unit());
        let r = laminate_energy(&spec).unwrap();
        assert_eq!(r.energy, 0.0);
        assert_eq!(r.damaged_volume, 0.0);
        assert!(r.band_geometry.is_empty());
    }

    #[test]
    fn profile_is_a_staircase() {
        let pr = Profile::<f64> { n_layers: 3, delta: 0.05, amplitude: 2.0 };
        assert_eq!(pr.value(0.1), 0.0);
        assert!((pr.value(0.25) - 0.25).abs() < 1e-15);
        assert!((pr.value(0.4) - 0.5).abs() < 1e-15);
        assert!((pr.value(0.99) - 1.5).abs() < 1e-15);
        assert!((pr.slope(0.26) - 2.0 * 0.25 / 0.1).abs() < 1e-12);
        assert_eq!(pr.slope(0.4), 0.0);
        // Continuous across the ramp ends.
        assert!((pr.value(0.2 + 1e-12) - 0.0).abs() < 1e-9);
        assert!((pr.value(0.3 - 1e-12) - 0.5).abs() < 1e-9);
    }

    #[test]
    fn halfplane_area_examples() {
        assert!((halfplane_area::<f64>([0.0, 1.0], 0.3) - 0.3).abs() < 1e-15);
        assert!((halfplane_area::<f64>([1.0, 1.0], 1.0) - 0.5).abs() < 1e-15);
        assert_eq!(halfplane_area::<f64>([1.0, 0.0], -1.0), 0.0);
        assert!((halfplane_area::<f64>([1.0, 0.0], 2.0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn piecewise_limit_examples() {
        let p = unit();
        let xi = SymMat::from_packed(&[0.4, -0.2, 0.3]).unwrap();
        let e = limit_energy_piecewise(&p, &[(1.0, xi)], &[]).unwrap();
        assert_eq!(e, w_bar_dual(&p, &xi).unwrap().value);
        let j = JumpSegment { length: 1.0, jump: [1.0, 0.0], normal: [0.0, 1.0] };
        let z = SymMat::zeros(2).unwrap();
        let e = limit_energy_piecewise(&p, &[(1.0, z)], &[j]).unwrap();
        assert!((e - 2f64.sqrt()).abs() < 1e-15);
        let bad = JumpSegment { normal: [0.0, 2.0], ..j };
        assert!(matches!(limit_energy_piecewise(&p, &[], &[bad]), Err(Error::NonUnitNormal(_))));
        let t = limit_energy_piecewise_tresca(&p, &[], &[j]).unwrap();
        assert!((t - 2.0f64 * 0.5f64.sqrt()).abs() < 1e-14);
        let normal = JumpSegment { jump: [0.0, 1.0], ..j };
        assert!(matches!(limit_energy_piecewise_tresca(&p, &[], &[normal]), Err(Error::NormalJump(_))));
    }
}
