//! Energy sweeps over `ε` for the three scaling regimes and the Tresca model.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{alternate_minimize, AmOptions, CellModel, GridState};
use crate::densities::{f_strong, EtaSchedule, ModelParams};
use crate::envelopes::{sq_envelope, sq_envelope_tresca, tresca_limit_bulk, w_bar_dual};
use crate::error::{Error, Result};
use crate::microstructure::Strip;
use crate::scalar::Real;
use crate::symcalc::SymMat;

/// Scaling of `η_ε` relative to `ε`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Regime {
    /// `η_ε ≪ ε`; default `η_ε = ε²`.
    Trivial,
    /// `η_ε = αε`.
    Hencky,
    /// `η_ε ≫ ε`; default `η_ε = √ε`.
    Elastic,
}

impl Regime {
    /// Schedule used for this regime. A power schedule already in `current`
    /// is kept when its exponent lies on the right side of 1.
    pub fn schedule<T: Real>(self, current: EtaSchedule<T>) -> EtaSchedule<T> {
        match (self, current) {
            (Regime::Hencky, _) => EtaSchedule::Proportional,
            (Regime::Trivial, EtaSchedule::Power(q)) if q > T::one() => current,
            (Regime::Trivial, _) => EtaSchedule::Power(T::lit(2.0)),
            (Regime::Elastic, EtaSchedule::Power(q)) if q < T::one() => current,
            (Regime::Elastic, _) => EtaSchedule::Power(T::lit(0.5)),
        }
    }
}

/// Initial damage field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Init<T> {
    Undamaged,
    /// Each cell damaged independently with this probability.
    Random { fraction: T },
    /// Strips of the relaxed optimal volume fraction, in several layer
    /// counts and orientations; the lowest final energy is kept.
    Laminate,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepConfig<T> {
    pub nx: usize,
    pub ny: usize,
    /// Affine boundary datum on the unit square.
    pub xi: SymMat<T>,
    pub eps_list: Vec<T>,
    pub init: Init<T>,
    pub seed: u64,
    pub am: AmOptions<T>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeRow<T> {
    pub eps: T,
    pub eta: T,
    /// Alternating-minimization iterations of the retained run.
    pub iters: usize,
    pub energy: T,
    pub damaged_volume: T,
    pub limit_reference: T,
    /// `|Ω| · SQW_ε(ξ)`, the relaxed lower bound for affine data.
    pub envelope: T,
    pub converged: bool,
    pub damage: Vec<u8>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RegimeReport<T> {
    pub rows: Vec<RegimeRow<T>>,
    /// Least-squares slope of `log E_ε` against `log √(η_ε/ε)` (trivial regime).
    pub scaling_fit: Option<T>,
}

impl<T: Real> RegimeReport<T> {
    pub fn eps_list(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.eps).collect()
    }

    pub fn energies(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.energy).collect()
    }

    pub fn damaged_volumes(&self) -> Vec<T> {
        self.rows.iter().map(|r| r.damaged_volume).collect()
    }
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope<T: Real>(x: &[T], y: &[T]) -> Option<T> {
    if x.len() != y.len() || x.len() < 2 {
        return None;
    }
    let n = T::from_count(x.len());
    let mx = x.iter().copied().sum::<T>() / n;
    let my = y.iter().copied().sum::<T>() / n;
    let sxx: T = x.iter().map(|a| (*a - mx) * (*a - mx)).sum();
    let sxy: T = x.iter().zip(y).map(|(a, b)| (*a - mx) * (*b - my)).sum();
    if sxx > T::zero() {
        Some(sxy / sxx)
    } else {
        None
    }
}

fn check_config<T: Real>(cfg: &SweepConfig<T>) -> Result<()> {
    if cfg.xi.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: cfg.xi.dim() });
    }
    if cfg.eps_list.is_empty() {
        return Err(Error::InvalidParameter { name: "eps_list", reason: "empty".into() });
    }
    if let Init::Random { fraction } = cfg.init {
        if !(fraction >= T::zero() && fraction <= T::one()) {
            return Err(Error::InvalidParameter { name: "fraction", reason: format!("must lie in [0, 1], got {fraction}") });
        }
    }
    Ok(())
}

/// Strip normals matched to `ξ`: the two rank-one directions when `det ξ ≤ 0`,
/// the eigenvectors otherwise.
fn seed_normals<T: Real>(xi: &SymMat<T>) -> Vec<Vec<[T; 2]>> {
    let sp = xi.eigs();
    let (x1, x2) = (sp.values()[0], sp.values()[1]);
    let f = sp.frame();
    let v1 = [f[0][0], f[0][1]];
    let v2 = [f[1][0], f[1][1]];
    let unit = |v: [T; 2]| {
        let n = (v[0] * v[0] + v[1] * v[1]).sqrt();
        [v[0] / n, v[1] / n]
    };
    if x1 <= T::zero() && x2 >= T::zero() {
        let (p, q) = (x2.sqrt(), (-x1).sqrt());
        let a = [p * v2[0] + q * v1[0], p * v2[1] + q * v1[1]];
        let b = [p * v2[0] - q * v1[0], p * v2[1] - q * v1[1]];
        let mut out = vec![vec![unit(b)]];
        let (ua, ub) = (unit(a), unit(b));
        if (ua[0] * ub[1] - ua[1] * ub[0]).abs() > T::lit(1e-9) {
            out.push(vec![ua]);
        }
        out
    } else {
        vec![vec![v1], vec![v2], vec![v1, v2]]
    }
}

/// Evenly spaced strips of total volume fraction `theta` across the square.
fn strips<T: Real>(normal: [T; 2], layers: usize, theta: T, min_half: T) -> Vec<Strip<T>> {
    let corners = [[T::zero(), T::zero()], [T::one(), T::zero()], [T::zero(), T::one()], [T::one(), T::one()]];
    let proj: Vec<T> = corners.iter().map(|c| c[0] * normal[0] + c[1] * normal[1]).collect();
    let lo = proj.iter().copied().fold(T::infinity(), T::min);
    let hi = proj.iter().copied().fold(T::neg_infinity(), T::max);
    let period = (hi - lo) / T::from_count(layers);
    let half = (T::lit(0.5) * theta * period).max(min_half);
    (0..layers)
        .map(|k| Strip { normal, center: lo + (T::from_count(k) + T::lit(0.5)) * period, half_width: half })
        .collect()
}

fn rasterize<T: Real>(state: &GridState<T>, strips: &[Strip<T>]) -> Vec<u8> {
    (0..state.mesh.n_cells())
        .map(|c| {
            let x = state.mesh.cell_center(c);
            u8::from(strips.iter().any(|s| (x[0] * s.normal[0] + x[1] * s.normal[1] - s.center).abs() < s.half_width))
        })
        .collect()
}

/// Initial damage fields to try for one run.
fn initial_fields<T: Real>(state: &GridState<T>, init: Init<T>, xi: &SymMat<T>, theta: T, seed: u64) -> Vec<Vec<u8>> {
    let n = state.mesh.n_cells();
    match init {
        Init::Undamaged => vec![vec![0; n]],
        Init::Random { fraction } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            vec![(0..n).map(|_| u8::from(rng.gen::<f64>() < fraction.as_f64())).collect()]
        }
        Init::Laminate => {
            let mut out = vec![vec![0; n]];
            if theta <= T::zero() {
                return out;
            }
            let min_cells = state.mesh.nx.min(state.mesh.ny);
            let min_half = T::lit(0.5) * state.mesh.hx.max(state.mesh.hy);
            for family in seed_normals(xi) {
                let share = theta / T::from_count(family.len());
                let mut layers = 1;
                while layers <= min_cells / 4 {
                    let all: Vec<Strip<T>> = family.iter().flat_map(|nv| strips(*nv, layers, share, min_half)).collect();
                    let field = rasterize(state, &all);
                    if !out.contains(&field) {
                        out.push(field);
                    }
                    layers *= 2;
                }
            }
            out
        }
    }
}

struct RunSetup<T> {
    model: CellModel<T>,
    eta: T,
    envelope: T,
    theta: T,
    limit_reference: T,
}

fn run_one<T: Real>(cfg: &SweepConfig<T>, setup: RunSetup<T>, index: usize) -> Result<RegimeRow<T>> {
    let base = GridState::unit_square(cfg.nx, cfg.ny, &cfg.xi)?;
    let seed = cfg.seed.wrapping_add(index as u64);
    let fields = initial_fields(&base, cfg.init, &cfg.xi, setup.theta, seed);
    let runs: Vec<Result<(T, GridState<T>, super::AmOutcome<T>)>> = fields
        .into_par_iter()
        .map(|d| {
            let mut s = base.clone();
            s.set_damage(d)?;
            let out = alternate_minimize(&mut s, &setup.model, cfg.am)?;
            let e = super::total_energy(&s, &setup.model);
            Ok((e, s, out))
        })
        .collect();
    let mut best: Option<(T, GridState<T>, super::AmOutcome<T>)> = None;
    for r in runs {
        let r = r?;
        if best.as_ref().is_none_or(|b| r.0 < b.0) {
            best = Some(r);
        }
    }
    let (energy, state, out) = best.expect("at least one initial field");
    Ok(RegimeRow {
        eps: cfg.eps_list[index],
        eta: setup.eta,
        iters: out.iterations,
        energy,
        damaged_volume: state.damaged_volume(),
        limit_reference: setup.limit_reference,
        envelope: setup.envelope,
        converged: out.converged,
        damage: state.damage,
    })
}

/// Runs the Hencky-family solver at each `ε` of the configuration.
pub fn regime_sweep<T: Real>(p: &ModelParams<T>, regime: Regime, cfg: &SweepConfig<T>) -> Result<RegimeReport<T>> {
    check_config(cfg)?;
    let p = p.with_eta(regime.schedule(p.eta))?;
    let xi = &cfg.xi;
    let limit_reference = match regime {
        Regime::Trivial => T::zero(),
        Regime::Hencky => w_bar_dual(&p, xi)?.value,
        Regime::Elastic => f_strong(&p, xi),
    };
    let rows: Vec<Result<RegimeRow<T>>> = (0..cfg.eps_list.len())
        .into_par_iter()
        .map(|k| {
            let eps = cfg.eps_list[k];
            let env = sq_envelope(&p, eps, xi)?;
            let setup = RunSetup {
                model: CellModel::hencky(&p, eps)?,
                eta: p.eta(eps),
                envelope: env.value,
                theta: env.theta_opt.unwrap_or(T::zero()),
                limit_reference,
            };
            run_one(cfg, setup, k)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    let scaling_fit = if regime == Regime::Trivial { scaling_exponent(&rows) } else { None };
    Ok(RegimeReport { rows, scaling_fit })
}

fn scaling_exponent<T: Real>(rows: &[RegimeRow<T>]) -> Option<T> {
    let pts: Vec<(T, T)> = rows
        .iter()
        .filter(|r| r.energy > T::zero())
        .map(|r| ((r.eta / r.eps).sqrt().ln(), r.energy.ln()))
        .collect();
    let (x, y): (Vec<T>, Vec<T>) = pts.into_iter().unzip();
    fit_slope(&x, &y)
}

/// Runs the Tresca-family solver (`A_w^ε = (λ_w, εμ_w)`) at each `ε`.
pub fn tresca_sweep<T: Real>(p: &ModelParams<T>, cfg: &SweepConfig<T>) -> Result<RegimeReport<T>> {
    check_config(cfg)?;
    p.check_tresca()?;
    let xi = &cfg.xi;
    let limit_reference = tresca_limit_bulk(p, xi)?;
    let rows: Vec<Result<RegimeRow<T>>> = (0..cfg.eps_list.len())
        .into_par_iter()
        .map(|k| {
            let eps = cfg.eps_list[k];
            let env = sq_envelope_tresca(p, eps, xi)?;
            let setup = RunSetup {
                model: CellModel::tresca(p, eps)?,
                eta: eps,
                envelope: env.value,
                theta: env.theta_opt.unwrap_or(T::zero()),
                limit_reference,
            };
            run_one(cfg, setup, k)
        })
        .collect();
    let rows = rows.into_iter().collect::<Result<Vec<_>>>()?;
    Ok(RegimeReport { rows, scaling_fit: None })
}
