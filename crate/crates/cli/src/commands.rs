use std::path::Path;

use chi2fc::oracle::coefficient_deviation;
use chi2fc::{
    check_validity, g1_trace, g2_trace, sweep_length_rows, ConversionModel, Propagator,
    ValidityReport, Verdict,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, CliResult};
use crate::output::{ensure_dir, join, write_csv, write_json};
use crate::scenario::{Resolved, Scenario};

/// Closed-form and RK4 coefficients must agree this closely under `--oracle`.
pub const ORACLE_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct RunOptions {
    pub threads: Option<usize>,
    pub oracle: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    RateSweep,
    Correlations,
    Validity,
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: Command,
    pub options: RunOptions,
    pub scenario: Scenario,
    pub derived: Derived,
    pub oracle_max_deviation: Option<f64>,
    pub outputs: Vec<String>,
}

/// Quantities computed from the scenario, recorded for reference.
#[derive(Debug, Clone, Default, Serialize)]
pub struct Derived {
    pub l0_m: f64,
    pub sigma_t_s: f64,
    pub transit_time_s: f64,
    pub conversion_probability: f64,
    pub background_per_s: f64,
    pub snr: Option<f64>,
    pub reference_peak_per_s: Option<f64>,
    pub correlation_time_s: Option<f64>,
}

fn pool(threads: Option<usize>) -> CliResult<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Scenario(format!("cannot build thread pool: {e}")))
}

fn oracle_check(resolved: &Resolved, lengths: &[f64]) -> CliResult<f64> {
    let noises = [resolved.noise.clone(), resolved.noise.loss_only()];
    let worst = lengths
        .par_iter()
        .map(|&l| {
            let cfg = resolved.config.with_length(l);
            noises.iter().try_fold(0.0f64, |acc, n| {
                let prop = Propagator::from_config(&cfg, n);
                Ok(acc.max(coefficient_deviation(&prop, cfg.transit_time())?))
            })
        })
        .collect::<chi2fc::Result<Vec<f64>>>()?
        .into_iter()
        .fold(0.0, f64::max);
    log::info!("oracle: max coefficient deviation {worst:e}");
    if worst > ORACLE_TOLERANCE {
        return Err(CliError::Validation(format!(
            "closed-form and RK4 coefficients differ by {worst:e} > {ORACLE_TOLERANCE:e}"
        )));
    }
    Ok(worst)
}

fn derived(resolved: &Resolved, model: &ConversionModel) -> Derived {
    let snr = model.snr().snr;
    Derived {
        l0_m: resolved.l0,
        sigma_t_s: resolved.pulses.sigma_t,
        transit_time_s: model.transit_time(),
        conversion_probability: model.conversion_probability(),
        background_per_s: model.background().b0,
        snr: snr.is_finite().then_some(snr),
        ..Derived::default()
    }
}

struct Context {
    resolved: Resolved,
    echo: Scenario,
    model: ConversionModel,
    oracle: Option<f64>,
}

fn prepare(
    scenario: &Scenario,
    out: &Path,
    opts: RunOptions,
    oracle_lengths: impl Fn(&Resolved) -> Vec<f64>,
) -> CliResult<Context> {
    let resolved = scenario.resolve()?;
    let echo = scenario.resolved_echo(&resolved);
    ensure_dir(out)?;
    let model = ConversionModel::new(
        resolved.config.clone(),
        resolved.noise.clone(),
        resolved.pulses,
    )?;
    let oracle = if opts.oracle {
        Some(oracle_check(&resolved, &oracle_lengths(&resolved))?)
    } else {
        None
    };
    Ok(Context {
        resolved,
        echo,
        model,
        oracle,
    })
}

fn manifest(
    ctx: &Context,
    command: Command,
    opts: RunOptions,
    derived: Derived,
    outputs: Vec<String>,
) -> Manifest {
    Manifest {
        tool: "chi2fc",
        version: env!("CARGO_PKG_VERSION"),
        command,
        options: opts,
        scenario: ctx.echo.clone(),
        derived,
        oracle_max_deviation: ctx.oracle,
        outputs,
    }
}

/// Peak rate versus crystal length, rescaled by the ideal peak at `L0`.
pub fn run_rate_sweep(scenario: &Scenario, out: &Path, opts: RunOptions) -> CliResult<Manifest> {
    pool(opts.threads)?.install(|| {
        let ctx = prepare(scenario, out, opts, |r| r.lengths.clone())?;
        let r = &ctx.resolved;
        let search = ctx.echo.grids.peak_search;
        let sweep = sweep_length_rows(&r.config, &r.pulses, &r.noise, &r.lengths, &search)?;
        let col = |f: fn(&chi2fc::SweepRow) -> f64| sweep.rows.iter().map(f).collect::<Vec<_>>();
        let (x, ideal, lossy, total, bg) = (
            col(|s| s.length_over_l0),
            col(|s| s.ideal),
            col(|s| s.lossy),
            col(|s| s.total),
            col(|s| s.background),
        );
        let name = ctx.echo.outputs.rate_sweep.clone();
        write_csv(
            &join(out, &name),
            &[
                "L_over_L0",
                "peak_rate_ideal",
                "peak_rate_lossy",
                "peak_rate_total",
                "background",
            ],
            &[&x, &ideal, &lossy, &total, &bg],
        )?;
        let mut d = derived(r, &ctx.model);
        d.reference_peak_per_s = Some(sweep.reference_peak);
        let m = manifest(&ctx, Command::RateSweep, opts, d, vec![name]);
        write_json(&join(out, &ctx.echo.outputs.manifest), &m)?;
        Ok(m)
    })
}

/// `g1` and `g2` versus delay at the arrival of the selected pulse.
pub fn run_correlations(scenario: &Scenario, out: &Path, opts: RunOptions) -> CliResult<Manifest> {
    pool(opts.threads)?.install(|| {
        let ctx = prepare(scenario, out, opts, |r| vec![r.config.crystal_length])?;
        let r = &ctx.resolved;
        let t = ctx.model.arrival(r.pulse_index);
        let norm = ctx.echo.normalization;
        let (g1, g2) = rayon::join(
            || g1_trace(&ctx.model, t, &r.delays, norm),
            || g2_trace(&ctx.model, t, &r.delays, norm),
        );
        let (g1, g2) = (g1?, g2?);

        let g1_name = ctx.echo.outputs.g1.clone();
        let g1_raw = g1.raw_values();
        write_csv(
            &join(out, &g1_name),
            &["dt_s", "raw_per_s", "rescaled"],
            &[&g1.axis, &g1_raw, &g1.values],
        )?;

        let g2_name = ctx.echo.outputs.g2.clone();
        let g2_raw = g2.raw_values();
        let mut header = vec!["dt_s", "raw_per_s2", "rescaled"];
        let term_headers = [
            "signal_per_s2",
            "interference_per_s2",
            "signal_background_per_s2",
            "noise_noise_per_s2",
            "background_sq_per_s2",
        ];
        header.extend(term_headers);
        let mut columns: Vec<&[f64]> = vec![&g2.axis, &g2_raw, &g2.values];
        for name in chi2fc::G2Terms::NAMES {
            columns.push(g2.component(name).expect("g2 trace carries all terms"));
        }
        write_csv(&join(out, &g2_name), &header, &columns)?;

        let mut d = derived(r, &ctx.model);
        d.correlation_time_s = Some(t);
        let m = manifest(&ctx, Command::Correlations, opts, d, vec![g1_name, g2_name]);
        write_json(&join(out, &ctx.echo.outputs.manifest), &m)?;
        Ok(m)
    })
}

/// Writes the validity report and fails with a validation error if any
/// evaluated check fails. `n` overrides the scenario's order.
pub fn run_validity(
    scenario: &Scenario,
    out: &Path,
    n: Option<u32>,
    opts: RunOptions,
) -> CliResult<ValidityReport> {
    pool(opts.threads)?.install(|| {
        let mut scenario = scenario.clone();
        if let Some(n) = n {
            scenario.validity.order_n = n;
        }
        let ctx = prepare(&scenario, out, opts, |r| vec![r.config.crystal_length])?;
        let v = ctx.echo.validity;
        let report = check_validity(&ctx.resolved.config, v.order_n, v.threshold)?;
        println!("{}", validity_table(&report));

        let name = ctx.echo.outputs.validity.clone();
        write_json(&join(out, &name), &report)?;
        let m = manifest(
            &ctx,
            Command::Validity,
            opts,
            derived(&ctx.resolved, &ctx.model),
            vec![name],
        );
        write_json(&join(out, &ctx.echo.outputs.manifest), &m)?;

        if report.all_evaluated_pass() {
            Ok(report)
        } else {
            let failed: Vec<&str> = report
                .checks()
                .iter()
                .filter(|c| c.verdict == Verdict::Fail)
                .map(|c| c.name.as_str())
                .collect();
            Err(CliError::Validation(format!(
                "failed checks: {}",
                failed.join(", ")
            )))
        }
    })
}

pub fn validity_table(report: &ValidityReport) -> String {
    let mut s = format!(
        "validity (n = {}, threshold = {})\n{:<14} {:>24} {:>6} {:>24}  verdict\n",
        report.order_n, report.threshold, "check", "value", "bound", "limit"
    );
    for c in report.checks() {
        let value = c
            .value
            .map_or_else(|| "-".to_string(), |v| format!("{v:.6e}"));
        let bound = match c.bound {
            chi2fc::config::Bound::Below => "<",
            chi2fc::config::Bound::Above => ">",
        };
        let verdict = match c.verdict {
            Verdict::Pass => "pass",
            Verdict::Fail => "FAIL",
            Verdict::NotEvaluated => "not evaluated",
        };
        s.push_str(&format!(
            "{:<14} {value:>24} {bound:>6} {:>24.6e}  {verdict}\n",
            c.name, c.limit
        ));
    }
    s.pop();
    s
}
