use std::path::Path;

use brittle_core::densities::{
    f_strong, f_tilde, g_quad, g_weak, h_density, in_k, support_k, w_eps, ModelParams,
};
use brittle_core::envelopes::{sq_envelope, tresca_limit_bulk, w_bar_dual, w_tilde_dual};
use brittle_core::gammalab::{regime_sweep, tresca_sweep, Regime, RegimeReport, SweepConfig};
use brittle_core::microstructure::{laminate_energy, LaminateSpec};
use brittle_core::oracles::{
    brute_inf_convolution, conjugate_bruteforce, convexity_probe, rotation_robustness, sample_sym, Conjugate,
    ConvexFn, GridSpec, OracleReport, RotationOp, TauGrid,
};
use brittle_core::symcalc::dev_split;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ConvergeConfig, DensityConfig, LaminateConfig, RegimeConfig, SolveConfig, VerifyConfig};
use crate::error::CliError;
use crate::output::{num, opt, write_json, xi_cells, Table, XI_COLUMNS};

fn header(lead: &[&'static str], tail: &[&'static str]) -> Vec<&'static str> {
    lead.iter().chain(XI_COLUMNS.iter()).chain(tail).copied().collect()
}

// density ---------------------------------------------------------------------

#[derive(Serialize)]
struct DensitySummary {
    /// `t` at which `A_s(t d)` leaves `K`, i.e. where `W̄` stops being `f`.
    kink_t: Option<f64>,
}

pub fn density(cfg: &DensityConfig, out: &Path) -> Result<(), CliError> {
    let run = cfg.validate()?;
    let p = &run.params;
    let mut cols = header(&["row", "t"], &["f", "g_eps", "w_eps", "g", "h", "support_k", "w_bar", "stress_in_k"]);
    if run.tresca {
        cols.extend(["f_tilde_dev", "w_tilde_dev", "tresca_limit"]);
    }
    let mut table = Table::create(out, "density.csv", &cols)?;
    for (k, (t, xi)) in run.rows.iter().enumerate() {
        let mut cells = vec![k.to_string(), num(*t)];
        cells.extend(xi_cells(xi.packed()));
        let stress = p.a_s.apply(xi);
        cells.extend([
            num(f_strong(p, xi)),
            num(g_weak(p, run.eps, xi)?),
            num(w_eps(p, run.eps, xi)?),
            num(g_quad(p, xi)),
            num(h_density(p, xi)),
            num(support_k(p, xi)),
            num(w_bar_dual(p, xi)?.value),
            u8::from(in_k(p, &stress)).to_string(),
        ]);
        if run.tresca {
            let (_, dev) = dev_split(xi);
            cells.extend([num(f_tilde(p, &dev)?), num(w_tilde_dual(p, &dev)?.value), num(tresca_limit_bulk(p, xi)?)]);
        }
        table.row(cells)?;
    }
    table.finish()?;
    if let Some(d) = run.direction {
        let g = g_quad(p, &p.a_s.apply(&d));
        let kink_t = (g > 0.0).then(|| (2.0 * p.alpha * p.kappa / g).sqrt());
        write_json(out, "density_summary.json", &DensitySummary { kink_t })?;
    }
    Ok(())
}

// converge --------------------------------------------------------------------

pub fn converge(cfg: &ConvergeConfig, out: &Path) -> Result<(), CliError> {
    let (p, points) = cfg.validate()?;
    let cols = header(&["point"], &["eps", "eta", "sq_envelope", "theta_opt", "w_bar", "gap"]);
    let mut table = Table::create(out, "converge.csv", &cols)?;
    for (k, xi) in points.iter().enumerate() {
        let wb = w_bar_dual(&p, xi)?.value;
        for &eps in &cfg.eps_list {
            let sq = sq_envelope(&p, eps, xi)?;
            let mut cells = vec![k.to_string()];
            cells.extend(xi_cells(xi.packed()));
            cells.extend([
                num(eps),
                num(p.eta(eps)),
                num(sq.value),
                opt(sq.theta_opt),
                num(wb),
                num((sq.value - wb).abs()),
            ]);
            table.row(cells)?;
        }
    }
    table.finish()
}

// laminate --------------------------------------------------------------------

pub fn laminate(cfg: &LaminateConfig, out: &Path) -> Result<(), CliError> {
    let (p, case) = cfg.validate()?;
    let mut table = Table::create(
        out,
        "laminate.csv",
        &["eps", "n_layers", "energy", "damaged_volume", "limit_bound", "relative_gap"],
    )?;
    let mut bands = Table::create(out, "bands.csv", &["eps", "strip", "normal_1", "normal_2", "center", "width"])?;
    for &eps in &cfg.eps_list {
        let mut spec = LaminateSpec::new(case, eps, p);
        if let Some(n) = cfg.n_layers {
            spec.n_layers = n;
        }
        let r = laminate_energy(&spec)?;
        table.row(vec![
            num(eps),
            spec.n_layers.to_string(),
            num(r.energy),
            num(r.damaged_volume),
            num(r.limit_bound),
            num(r.relative_gap),
        ])?;
        for (k, s) in r.band_geometry.iter().enumerate() {
            bands.row(vec![
                num(eps),
                k.to_string(),
                num(s.normal[0]),
                num(s.normal[1]),
                num(s.center),
                num(2.0 * s.half_width),
            ])?;
        }
    }
    table.finish()?;
    bands.finish()
}

// solve -----------------------------------------------------------------------

#[derive(Serialize)]
struct SolveSummaryRow {
    eps: f64,
    envelope: f64,
    converged: bool,
}

#[derive(Serialize)]
struct SolveSummary {
    regime: &'static str,
    seed: u64,
    /// Slope of `log E` against `log √(η/ε)`; trivial regime only.
    scaling_fit: Option<f64>,
    rows: Vec<SolveSummaryRow>,
}

pub fn solve(cfg: &SolveConfig, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let run = cfg.validate()?;
    let seed = seed.unwrap_or(cfg.seed);
    let sweep = SweepConfig {
        nx: cfg.grid.nx,
        ny: cfg.grid.ny,
        xi: run.xi,
        eps_list: cfg.eps_list.clone(),
        init: run.init,
        seed,
        am: run.am,
    };
    let (name, report): (&str, RegimeReport<f64>) = match run.regime {
        RegimeConfig::Trivial => ("trivial", regime_sweep(&run.params, Regime::Trivial, &sweep)?),
        RegimeConfig::Hencky => ("hencky", regime_sweep(&run.params, Regime::Hencky, &sweep)?),
        RegimeConfig::Elastic => ("elastic", regime_sweep(&run.params, Regime::Elastic, &sweep)?),
        RegimeConfig::Tresca => ("tresca", tresca_sweep(&run.params, &sweep)?),
    };

    let mut energy = Table::create(
        out,
        "energy.csv",
        &["eps", "eta", "iters", "energy", "damaged_volume", "limit_reference"],
    )?;
    let mut damage = Table::create(out, "damage.csv", &["eps", "cell", "chi"])?;
    for row in &report.rows {
        energy.row(vec![
            num(row.eps),
            num(row.eta),
            row.iters.to_string(),
            num(row.energy),
            num(row.damaged_volume),
            num(row.limit_reference),
        ])?;
        for (c, chi) in row.damage.iter().enumerate() {
            damage.row(vec![num(row.eps), c.to_string(), chi.to_string()])?;
        }
    }
    energy.finish()?;
    damage.finish()?;
    let summary = SolveSummary {
        regime: name,
        seed,
        scaling_fit: report.scaling_fit,
        rows: report
            .rows
            .iter()
            .map(|r| SolveSummaryRow { eps: r.eps, envelope: r.envelope, converged: r.converged })
            .collect(),
    };
    write_json(out, "solve_summary.json", &summary)
}

// verify ----------------------------------------------------------------------

/// Exit code of the first oracle in the suite; later ones count up from it.
pub const FIRST_ORACLE_CODE: u8 = 10;

pub const ORACLES: [&str; 9] = [
    "rotation_w_bar_dual",
    "rotation_w_bar_primal",
    "rotation_f_eps_inner",
    "inf_convolution_brute",
    "conjugate_g",
    "conjugate_g_tilde",
    "convexity_w_bar",
    "convexity_sqrt_h_r",
    "w_eps_not_convex",
];

#[derive(Serialize)]
struct VerifyRow {
    code: u8,
    name: &'static str,
    seed: u64,
    samples: usize,
    max_abs_gap: f64,
    max_rel_gap: f64,
    tolerance: f64,
    pass: bool,
    error: Option<String>,
    worst_case_input: Vec<f64>,
}

fn merge(a: Option<OracleReport>, b: OracleReport) -> OracleReport {
    let Some(mut a) = a else { return b };
    a.samples += b.samples;
    a.max_abs_gap = a.max_abs_gap.max(b.max_abs_gap);
    if b.max_rel_gap > a.max_rel_gap {
        a.max_rel_gap = b.max_rel_gap;
        a.worst_case_input = b.worst_case_input;
    }
    a
}

fn blank(name: &str, seed: u64) -> OracleReport {
    OracleReport {
        name: name.into(),
        seed,
        samples: 0,
        max_abs_gap: f64::NEG_INFINITY,
        max_rel_gap: f64::NEG_INFINITY,
        worst_case_input: Vec::new(),
    }
}

/// Grid oracles: `max_abs_gap` is the largest excess over the exact value and
/// `max_rel_gap` the largest excess in units of the a priori grid bound, or
/// infinity when the grid value lands on the wrong side of the exact one.
fn inf_convolution(p: &ModelParams<f64>, samples: usize, seed: u64) -> brittle_core::Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rep = blank(ORACLES[3], seed);
    for k in 0..samples {
        let dim = 2 + k % 2;
        let xi = sample_sym(&mut rng, dim, k)?;
        let dual = w_bar_dual(p, &xi)?.value;
        let grid = if dim == 2 {
            GridSpec { per_axis: 201, general_per_axis: 21, radius_factor: 4.0 }
        } else {
            GridSpec { per_axis: 41, general_per_axis: 4, radius_factor: 4.0 }
        };
        let b = brute_inf_convolution(p, &xi, grid)?;
        let slack = 1e-9 * (1.0 + dual.abs());
        let excess = b.diagonal - dual;
        let ratio = if excess < -slack || b.general - dual < -slack {
            f64::INFINITY
        } else if b.grid_bound > 0.0 {
            excess.max(0.0) / b.grid_bound
        } else {
            0.0
        };
        record(&mut rep, excess, ratio, xi.packed());
    }
    Ok(rep)
}

fn conjugates(p: &ModelParams<f64>, which: Conjugate, samples: usize, seed: u64) -> brittle_core::Result<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let name = if which == Conjugate::G { ORACLES[4] } else { ORACLES[5] };
    let mut rep = blank(name, seed);
    for k in 0..samples {
        let dim = 2 + k % 2;
        let mut xi = sample_sym(&mut rng, dim, k)?;
        if which == Conjugate::GTilde {
            xi = dev_split(&xi).1;
        }
        let per_axis = if which == Conjugate::G && dim == 3 { 81 } else { 401 };
        let c = conjugate_bruteforce(p, which, &xi, TauGrid { per_axis, radius: None })?;
        let gap = c.reference - c.brute;
        let ratio = if c.brute > c.reference + 1e-12 * (1.0 + c.reference.abs()) {
            f64::INFINITY
        } else if c.grid_bound > 0.0 {
            gap.max(0.0) / c.grid_bound
        } else {
            0.0
        };
        record(&mut rep, gap, ratio, xi.packed());
    }
    Ok(rep)
}

fn record(rep: &mut OracleReport, abs: f64, ratio: f64, input: &[f64]) {
    rep.samples += 1;
    rep.max_abs_gap = rep.max_abs_gap.max(abs);
    if ratio > rep.max_rel_gap || rep.worst_case_input.is_empty() {
        rep.max_rel_gap = ratio;
        rep.worst_case_input = input.to_vec();
    }
}

fn run_oracle(p: &ModelParams<f64>, idx: usize, n: usize, seed: u64) -> brittle_core::Result<OracleReport> {
    let both = |op: RotationOp| -> brittle_core::Result<OracleReport> {
        let a = rotation_robustness(p, op, 2, n, seed)?;
        Ok(merge(Some(a), rotation_robustness(p, op, 3, n, seed.wrapping_add(1))?))
    };
    let grid_n = n.min(50);
    let rep = match idx {
        0 => both(RotationOp::WBarDual)?,
        1 => both(RotationOp::WBarPrimal)?,
        2 => both(RotationOp::FEpsInner { eps: 0.1, theta: 0.5 })?,
        3 => inf_convolution(p, grid_n, seed)?,
        4 => conjugates(p, Conjugate::G, grid_n, seed)?,
        5 => conjugates(p, Conjugate::GTilde, grid_n, seed)?,
        6 => merge(
            Some(convexity_probe(p, ConvexFn::WBar, 2, n, seed)?),
            convexity_probe(p, ConvexFn::WBar, 3, n, seed.wrapping_add(1))?,
        ),
        7 => {
            let mut acc = None;
            for (j, r) in [0.0, 0.5, 1.0].into_iter().enumerate() {
                acc = Some(merge(acc, convexity_probe(p, ConvexFn::SqrtHr { r }, 2, n, seed.wrapping_add(j as u64))?));
            }
            acc.expect("three runs")
        }
        _ => convexity_probe(p, ConvexFn::WEps { eps: 0.1 }, 2, n, seed)?,
    };
    Ok(OracleReport { name: ORACLES[idx].into(), ..rep })
}

/// Tolerance and pass rule per oracle.
fn judge(idx: usize, rep: &OracleReport) -> (f64, bool) {
    match idx {
        0 | 2 => (1e-8, rep.max_rel_gap <= 1e-8),
        1 => (1e-6, rep.max_rel_gap <= 1e-6),
        3..=5 => (1.0, rep.max_rel_gap <= 1.0),
        6 | 7 => (1e-8, rep.max_abs_gap <= 1e-8),
        // The probe must find a midpoint violation.
        _ => (1e-8, rep.max_abs_gap > 1e-8),
    }
}

pub fn verify(cfg: &VerifyConfig, seed: Option<u64>, out: &Path) -> Result<(), CliError> {
    let p = cfg.validate()?;
    let seed = seed.unwrap_or(cfg.seed);
    let mut rows = Vec::new();
    for idx in 0..ORACLES.len() {
        let code = FIRST_ORACLE_CODE + idx as u8;
        let s = seed.wrapping_add(1000 * idx as u64);
        let row = match run_oracle(&p, idx, cfg.samples, s) {
            Ok(rep) => {
                let (tolerance, pass) = judge(idx, &rep);
                VerifyRow {
                    code,
                    name: ORACLES[idx],
                    seed: s,
                    samples: rep.samples,
                    max_abs_gap: rep.max_abs_gap,
                    max_rel_gap: rep.max_rel_gap,
                    tolerance,
                    pass,
                    error: None,
                    worst_case_input: rep.worst_case_input,
                }
            }
            Err(e) => VerifyRow {
                code,
                name: ORACLES[idx],
                seed: s,
                samples: 0,
                max_abs_gap: f64::NAN,
                max_rel_gap: f64::NAN,
                tolerance: f64::NAN,
                pass: false,
                error: Some(e.to_string()),
                worst_case_input: Vec::new(),
            },
        };
        eprintln!("{:>2} {:<24} {}", row.code, row.name, if row.pass { "pass" } else { "FAIL" });
        rows.push(row);
    }

    let mut table = Table::create(
        out,
        "verify.csv",
        &["code", "oracle", "seed", "samples", "max_abs_gap", "max_rel_gap", "tolerance", "pass"],
    )?;
    for r in &rows {
        table.row(vec![
            r.code.to_string(),
            r.name.to_string(),
            r.seed.to_string(),
            r.samples.to_string(),
            num(r.max_abs_gap),
            num(r.max_rel_gap),
            num(r.tolerance),
            u8::from(r.pass).to_string(),
        ])?;
    }
    table.finish()?;
    // JSON has no NaN or infinity; those become null.
    write_json(out, "verify.json", &rows)?;
    match rows.iter().find(|r| !r.pass) {
        Some(r) => Err(CliError::Oracle { name: r.name.to_string(), code: r.code }),
        None => Ok(()),
    }
}
