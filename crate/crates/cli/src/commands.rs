use std::fmt::Write as _;

use potts_glass::acceptance::{self, CriterionOutcome};
use potts_glass::bounds::{
    beta_grid, beta_interval, default_constant, region_scan, rs_gaussian_value, rs_upper_bound, sk_constant,
    symmetry_breaking_criterion, thresholds_summary, RegionQuery, REGION_CSV_HEADER, THRESHOLD_TABLE_HEADER,
};
use potts_glass::exact::{ExactLab, QuenchedEstimate, DEFAULT_BUDGET, QUENCHED_CSV_HEADER};
use potts_glass::mc::{
    anneal_ground_state, estimate_sector_max, quenched_thermo_integrate, thermo_integrate, LadderConfig, System,
    DEFAULT_RUNGS, TRACE_CSV_HEADER,
};
use potts_glass::rng::derive_seed;
use potts_glass::{ColorProfile, DisorderSample, ModelParams};
use serde::Serialize;
use serde_json::{json, Value};

use crate::options::{Command, Method, Options};

const DEFAULT_SEED: u64 = 1;
const DEFAULT_RESTARTS: usize = 10;
/// `mc` also enumerates when the state space is at most this large.
const MC_EXACT_LIMIT: u64 = 1 << 20;

/// What a command produced: the table in both formats, a human summary,
/// and whether the command's own checks succeeded.
pub struct Report {
    pub csv: String,
    pub json: Value,
    pub summary: String,
    pub ok: bool,
}

type CliResult<T> = Result<T, String>;

fn lib<T>(r: potts_glass::Result<T>) -> CliResult<T> {
    r.map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Value {
    serde_json::to_value(value).expect("plain data serializes")
}

fn required<T: Clone>(value: &Option<T>, field: &str) -> CliResult<T> {
    value.clone().ok_or_else(|| format!("missing `{field}`: pass --{field} or set it in the config file"))
}

fn parse_num<T: std::str::FromStr>(text: &str, field: &str) -> CliResult<T> {
    text.trim()
        .parse()
        .map_err(|_| format!("invalid `{field}`: cannot parse {text:?}"))
}

fn kappa(opts: &Options) -> CliResult<usize> {
    parse_num(&required(&opts.kappa, "kappa")?, "kappa")
}

fn beta(opts: &Options) -> CliResult<f64> {
    parse_num(&required(&opts.beta, "beta")?, "beta")
}

fn seed(opts: &Options) -> u64 {
    opts.seed.unwrap_or(DEFAULT_SEED)
}

fn model(opts: &Options) -> CliResult<ModelParams> {
    let n = required(&opts.n, "N")?;
    lib(ModelParams::with_gamma(n, kappa(opts)?, beta(opts)?, opts.gamma.unwrap_or(0.0)))
}

/// A sector is selected by `--d` and/or `--epsilon`; `d` defaults to uniform.
fn sector(opts: &Options, kappa: usize) -> CliResult<Option<ColorProfile>> {
    match (&opts.d, opts.epsilon) {
        (None, None) => Ok(None),
        (Some(_), None) => Err("missing `epsilon`: required together with --d".into()),
        (None, Some(eps)) => lib(ColorProfile::uniform(kappa, eps)).map(Some),
        (Some(d), Some(eps)) => {
            if d.len() != kappa {
                return Err(format!("invalid `d`: {} entries for kappa = {kappa}", d.len()));
            }
            lib(ColorProfile::new(d.clone(), eps)).map(Some)
        }
    }
}

fn no_sector(opts: &Options, command: &str) -> CliResult<()> {
    if opts.d.is_some() || opts.epsilon.is_some() {
        return Err(format!("invalid `d`: {command} does not support color sectors"));
    }
    Ok(())
}

fn ladder(opts: &Options, beta: f64) -> CliResult<LadderConfig> {
    let mut ladder = lib(LadderConfig::hybrid(beta, opts.rungs.unwrap_or(DEFAULT_RUNGS)))?;
    if opts.sweeps.is_some() || opts.burn_in.is_some() {
        let total = opts.sweeps.unwrap_or(ladder.total_sweeps());
        let burn = opts.burn_in.unwrap_or((total / 10).min(ladder.burn_in()));
        ladder = lib(ladder.with_sweeps(total, burn))?;
    }
    if let Some(spe) = opts.sweeps_per_exchange {
        ladder = lib(ladder.with_sweeps_per_exchange(spe))?;
    }
    Ok(ladder)
}

fn lab(opts: &Options) -> ExactLab {
    ExactLab::with_budget(opts.budget.unwrap_or(DEFAULT_BUDGET))
}

fn quenched_report(q: &QuenchedEstimate, how: &str) -> Report {
    let p = &q.params;
    let sector = q.sector.as_ref().map(|s| format!(", sector {}", s.label())).unwrap_or_default();
    Report {
        csv: format!("{QUENCHED_CSV_HEADER}\n{}\n", q.csv_row()),
        json: to_json(q),
        summary: format!(
            "F_N = {} +- {} over {} disorders ({how}; N = {}, kappa = {}, beta = {}, gamma = {}{sector})",
            q.mean,
            q.std_error,
            q.num_disorder_samples,
            p.n(),
            p.kappa(),
            p.beta(),
            p.gamma()
        ),
        ok: true,
    }
}

fn exact(opts: &Options) -> CliResult<Report> {
    let params = model(opts)?;
    let profile = sector(opts, params.kappa())?;
    let samples = opts.samples.unwrap_or(100);
    let q = lib(lab(opts).quenched_free_energy(&params, samples, seed(opts), profile.as_ref()))?;
    Ok(quenched_report(&q, "exact enumeration"))
}

fn quenched(opts: &Options) -> CliResult<Report> {
    no_sector(opts, "quenched")?;
    let params = model(opts)?;
    let ladder = ladder(opts, params.beta())?;
    let samples = opts.samples.unwrap_or(20);
    let q = lib(quenched_thermo_integrate(&params, &ladder, samples, seed(opts)))?;
    Ok(quenched_report(&q, "thermodynamic integration"))
}

fn mc(opts: &Options) -> CliResult<Report> {
    no_sector(opts, "mc")?;
    let params = model(opts)?;
    let ladder = ladder(opts, params.beta())?;
    let seed = seed(opts);
    let disorder = DisorderSample::generate(params.n(), seed);
    let system = lib(System::new(params, &disorder))?;
    let estimate = lib(thermo_integrate(&system, &ladder, derive_seed(seed, 1)))?;
    let exact = ExactLab::with_budget(MC_EXACT_LIMIT)
        .log_partition(&params, &disorder, None)
        .ok();
    let mut csv = format!("{TRACE_CSV_HEADER}\n");
    for r in &estimate.rungs {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let mut summary = format!(
        "(1/N) log Z = {} on disorder seed {seed} ({} rungs, {} sweeps)",
        estimate.value,
        ladder.betas().len(),
        ladder.total_sweeps()
    );
    if let Some(e) = exact {
        let _ = write!(summary, "; enumeration gives {e} (difference {})", estimate.value - e);
    }
    Ok(Report {
        csv,
        json: json!({
            "params": to_json(&params),
            "seed": seed,
            "log_partition": estimate.value,
            "exact_log_partition": exact,
            "rungs": to_json(&estimate.rungs),
        }),
        summary,
        ok: true,
    })
}

#[derive(Serialize)]
struct GroundState {
    #[serde(rename = "N")]
    n: usize,
    kappa: usize,
    seed: u64,
    sector: Option<ColorProfile>,
    method: &'static str,
    energy: f64,
    energy_per_site: f64,
    colors: Vec<usize>,
}

fn ground_state(opts: &Options) -> CliResult<Report> {
    let n = required(&opts.n, "N")?;
    let kappa = kappa(opts)?;
    let params = lib(ModelParams::new(n, kappa, 0.0))?;
    let profile = sector(opts, kappa)?;
    let seed = seed(opts);
    let disorder = DisorderSample::generate(n, seed);
    let lab = lab(opts);
    let states = (kappa as f64).powi(n as i32);
    let method = match opts.method.unwrap_or(Method::Auto) {
        Method::Auto if states <= lab.budget() as f64 => Method::Exact,
        Method::Auto => Method::Anneal,
        m => m,
    };
    let (sigma, energy, name) = match method {
        Method::Exact => {
            let (s, e) = lib(lab.exact_ground_state(&params, &disorder, profile.as_ref()))?;
            (s, e, "exact")
        }
        _ => {
            let system = lib(System::new(params, &disorder))?;
            let schedule = LadderConfig::default_anneal();
            let restarts = opts.restarts.unwrap_or(DEFAULT_RESTARTS);
            let (s, e) = match &profile {
                None => lib(anneal_ground_state(&system, &schedule, restarts, derive_seed(seed, 1)))?,
                Some(p) => lib(estimate_sector_max(&system, p, &schedule, restarts, derive_seed(seed, 1)))?,
            };
            (s, e, "anneal")
        }
    };
    let gs = GroundState {
        n,
        kappa,
        seed,
        sector: profile,
        method: name,
        energy,
        energy_per_site: energy / n as f64,
        colors: sigma.to_one_based(),
    };
    let colors: Vec<String> = gs.colors.iter().map(ToString::to_string).collect();
    let sector_label = gs.sector.as_ref().map(ColorProfile::label).unwrap_or_default();
    Ok(Report {
        csv: format!(
            "N,kappa,seed,sector,method,energy,energy_per_site,colors\n{n},{kappa},{seed},{sector_label},{name},{energy},{},{}\n",
            gs.energy_per_site,
            colors.join(" ")
        ),
        json: to_json(&gs),
        summary: format!("max H = {energy} (H/N = {}) by {name} on disorder seed {seed}", gs.energy_per_site),
        ok: true,
    })
}

fn constant(opts: &Options) -> f64 {
    opts.constant_c.unwrap_or_else(default_constant)
}

#[derive(Serialize)]
struct BoundsRow {
    kappa: usize,
    beta: f64,
    constant_c: f64,
    #[serde(rename = "N")]
    n: Option<usize>,
    lower_bound: f64,
    rs_upper_bound: f64,
    breaking: bool,
    beta_lo: Option<f64>,
    beta_hi: Option<f64>,
    rs_gaussian: Option<f64>,
    rs_gaussian_std_error: Option<f64>,
}

fn opt_cell(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn bounds(opts: &Options) -> CliResult<Report> {
    let q = lib(RegionQuery::new(kappa(opts)?, beta(opts)?, constant(opts)))?;
    let prefactor = match opts.n {
        Some(0) => return Err("invalid `N`: must be at least 1".into()),
        Some(n) => ((n as f64 - 1.0) / n as f64).powf(1.5),
        None => 1.0,
    };
    let interval = beta_interval(q.kappa, q.constant_c);
    let gaussian = match opts.samples {
        Some(s) => Some(lib(rs_gaussian_value(q.kappa, q.beta, s, seed(opts)))?),
        None => None,
    };
    let row = BoundsRow {
        kappa: q.kappa,
        beta: q.beta,
        constant_c: q.constant_c,
        n: opts.n,
        lower_bound: prefactor * q.constant_c * q.beta,
        rs_upper_bound: rs_upper_bound(q.kappa, q.beta),
        breaking: symmetry_breaking_criterion(&q),
        beta_lo: interval.map(|i| i.0),
        beta_hi: interval.map(|i| i.1),
        rs_gaussian: gaussian.map(|g| g.value),
        rs_gaussian_std_error: gaussian.map(|g| g.std_error),
    };
    let csv = format!(
        "kappa,beta,constant_c,N,lower_bound,rs_upper_bound,breaking,beta_lo,beta_hi,rs_gaussian,rs_gaussian_std_error\n{},{},{},{},{},{},{},{},{},{},{}\n",
        row.kappa,
        row.beta,
        row.constant_c,
        row.n.map(|n| n.to_string()).unwrap_or_default(),
        row.lower_bound,
        row.rs_upper_bound,
        u8::from(row.breaking),
        opt_cell(row.beta_lo),
        opt_cell(row.beta_hi),
        opt_cell(row.rs_gaussian),
        opt_cell(row.rs_gaussian_std_error)
    );
    let mut summary = format!(
        "kappa = {}, beta = {}: lower bound {} vs replica-symmetric bound {} -> {}",
        row.kappa,
        row.beta,
        row.lower_bound,
        row.rs_upper_bound,
        if row.breaking { "symmetry breaking" } else { "no conclusion" }
    );
    if let Some(g) = gaussian {
        let _ = write!(summary, "; Gaussian estimate {} +- {}", g.value, g.std_error);
    }
    Ok(Report {
        csv,
        json: to_json(&row),
        summary,
        ok: true,
    })
}

fn thresholds(opts: &Options) -> CliResult<Report> {
    let constants = match opts.constant_c {
        Some(c) => vec![c],
        None => vec![default_constant(), sk_constant()],
    };
    let rows = lib(thresholds_summary(&constants))?;
    let mut csv = format!("{THRESHOLD_TABLE_HEADER}\n");
    let mut summary = String::new();
    for r in &rows {
        csv.push_str(&r.csv_row());
        csv.push('\n');
        let _ = writeln!(
            summary,
            "c = {}: symmetry breaking from kappa = {} (beta in ({}, {}) there)",
            r.constant_c, r.min_kappa, r.beta_lo, r.beta_hi
        );
    }
    summary.pop();
    Ok(Report {
        csv,
        json: to_json(&rows),
        summary,
        ok: true,
    })
}

fn kappa_range(text: &str) -> CliResult<(usize, usize)> {
    match text.split_once(':') {
        Some((lo, hi)) => Ok((parse_num(lo, "kappa")?, parse_num(hi, "kappa")?)),
        None => {
            let k = parse_num(text, "kappa")?;
            Ok((k, k))
        }
    }
}

fn beta_range(text: &str) -> CliResult<Vec<f64>> {
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [b] => Ok(vec![parse_num(b, "beta")?]),
        [lo, hi, step] => lib(beta_grid(parse_num(lo, "beta")?, parse_num(hi, "beta")?, parse_num(step, "beta")?)),
        _ => Err(format!("invalid `beta`: expected a value or lo:hi:step, got {text:?}")),
    }
}

fn scan(opts: &Options) -> CliResult<Report> {
    let (lo, hi) = kappa_range(&required(&opts.kappa, "kappa")?)?;
    if hi < lo {
        return Err(format!("invalid `kappa`: empty range {lo}:{hi}"));
    }
    let betas = beta_range(&required(&opts.beta, "beta")?)?;
    let grid = lib(region_scan(lo..=hi, &betas, constant(opts)))?;
    let mut csv = format!("{REGION_CSV_HEADER}\n");
    for line in grid.csv_lines() {
        csv.push_str(&line);
        csv.push('\n');
    }
    let mut summary = format!(
        "{} x {} grid, c = {}",
        grid.kappas.len(),
        grid.betas.len(),
        grid.constant_c
    );
    let mut breaking_rows = 0;
    for (k, row) in grid.kappas.iter().zip(&grid.cells) {
        let hits: Vec<f64> = grid.betas.iter().zip(row).filter(|(_, &x)| x).map(|(&b, _)| b).collect();
        if let (Some(first), Some(last)) = (hits.first(), hits.last()) {
            breaking_rows += 1;
            let _ = write!(summary, "\nkappa {k}: breaking on grid beta {first} .. {last}");
        }
    }
    if breaking_rows == 0 {
        summary.push_str("\nno symmetry breaking on this grid");
    }
    Ok(Report {
        csv,
        json: json!({
            "constant_c": grid.constant_c,
            "kappas": grid.kappas,
            "betas": grid.betas,
            "cells": grid.cells,
            "intervals": to_json(&grid.intervals()),
        }),
        summary,
        ok: true,
    })
}

fn csv_quote(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn verify(opts: &Options) -> CliResult<Report> {
    let outcomes: Vec<CriterionOutcome> = match &opts.criteria {
        None => acceptance::run_all(),
        Some(ids) => ids
            .iter()
            .map(|&id| acceptance::run(id).ok_or_else(|| format!("invalid `criteria`: no criterion {id}")))
            .collect::<CliResult<_>>()?,
    };
    let mut csv = String::from("id,name,passed,elapsed_seconds,limit_seconds,detail\n");
    let mut summary = String::new();
    for o in &outcomes {
        let _ = writeln!(
            csv,
            "{},{},{},{},{},{}",
            o.id,
            csv_quote(o.name),
            u8::from(o.passed),
            o.elapsed.as_secs_f64(),
            o.limit.as_secs_f64(),
            csv_quote(&o.detail)
        );
        let _ = writeln!(summary, "{o}");
    }
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    let _ = write!(summary, "{} passed, {failed} failed", outcomes.len() - failed);
    Ok(Report {
        csv,
        json: to_json(&outcomes),
        summary,
        ok: failed == 0,
    })
}

pub fn run(command: Command, opts: &Options) -> CliResult<Report> {
    match command {
        Command::Exact => exact(opts),
        Command::Quenched => quenched(opts),
        Command::Mc => mc(opts),
        Command::GroundState => ground_state(opts),
        Command::Bounds => bounds(opts),
        Command::Thresholds => thresholds(opts),
        Command::Scan => scan(opts),
        Command::Verify => verify(opts),
    }
}

pub fn file_stem(command: Command) -> &'static str {
    match command {
        Command::Exact => "exact",
        Command::Quenched => "quenched",
        Command::Mc => "mc",
        Command::GroundState => "ground-state",
        Command::Bounds => "bounds",
        Command::Thresholds => "thresholds",
        Command::Scan => "scan",
        Command::Verify => "verify",
    }
}
