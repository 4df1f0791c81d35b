use std::fmt::Write as _;
use std::io::Write as _;

use kinktrap::linearized::{linear_compare as run_linear_compare, CompareOptions};
use kinktrap::scattering::run_scattering_observed;
use kinktrap::sensitivity::{sensitivity as run_sensitivity, SensitivityOptions, DISTANCE_METRIC};
use kinktrap::sweep::{sweep as run_sweep, zoom as run_zoom, SweepRecord};
use kinktrap::State;

use crate::config::RunConfig;
use crate::CliError;

const SIMULATE_SAMPLE_INTERVAL: f64 = 0.1;

pub fn write_output(out: &str, text: &str) -> std::io::Result<()> {
    if out == "-" {
        let mut stdout = std::io::stdout().lock();
        stdout.write_all(text.as_bytes())?;
        stdout.flush()
    } else {
        std::fs::write(out, text)
    }
}

fn stride(interval: f64, dt: f64) -> u64 {
    ((interval / dt).round() as u64).max(1)
}

pub fn simulate(cfg: &RunConfig) -> Result<String, CliError> {
    let interval = cfg.sample_interval.unwrap_or(SIMULATE_SAMPLE_INTERVAL);
    let every = stride(interval, cfg.integrator.dt);
    let params = cfg.params;
    let mut rows = String::new();
    let mut last_written = None;
    let mut last: Option<State> = None;
    let push_row = |s: &State, rows: &mut String| {
        let c = s.to_cm();
        let e = params.total_energy(s).unwrap_or(f64::NAN);
        writeln!(
            rows,
            "{},{},{},{},{},{},{},{}",
            s.t, s.x1, s.x2, s.v1, s.v2, c.r_cm, c.r, e
        )
        .unwrap();
    };
    let rec = run_scattering_observed(&cfg.scenario(cfg.v0), &cfg.integrator, |s, i| {
        if i % every == 0 {
            push_row(s, &mut rows);
            last_written = Some(i);
        }
        last = Some(*s);
    })?;
    if let Some(s) = last {
        if last_written != Some(rec.steps) {
            push_row(&s, &mut rows);
        }
    }

    let mut out = cfg.header("simulate", interval);
    writeln!(out, "# outcome = {}", rec.outcome).unwrap();
    writeln!(out, "# v_final = {}", rec.v_final).unwrap();
    writeln!(out, "# t_end = {}", rec.t_end).unwrap();
    writeln!(out, "# energy_drift = {}", rec.energy_drift).unwrap();
    writeln!(out, "# mean_cm_speed_tail = {}", rec.mean_cm_speed_tail).unwrap();
    writeln!(out, "# steps = {}", rec.steps).unwrap();
    out.push_str("t,x1,x2,v1,v2,R,r,E\n");
    out.push_str(&rows);
    Ok(out)
}

fn push_record(out: &mut String, r: &SweepRecord, depth: Option<u32>) {
    write!(
        out,
        "{},{},{},{},{},{}",
        r.v0, r.outcome, r.v_final, r.t_end, r.energy_drift, r.steps
    )
    .unwrap();
    if let Some(d) = depth {
        write!(out, ",{d}").unwrap();
    }
    out.push('\n');
}

fn push_errors<'a>(out: &mut String, records: impl Iterator<Item = &'a SweepRecord>) {
    for r in records {
        if let Some(e) = &r.error {
            writeln!(out, "# error v0 = {}: {}", r.v0, e).unwrap();
        }
    }
}

pub fn sweep(cfg: &RunConfig) -> Result<String, CliError> {
    let records = run_sweep(&cfg.sweep_spec(), cfg.workers)?;
    let mut out = cfg.header(
        "sweep",
        cfg.sample_interval.unwrap_or(SIMULATE_SAMPLE_INTERVAL),
    );
    writeln!(out, "# rows = {}", records.len()).unwrap();
    push_errors(&mut out, records.iter());
    out.push_str("v0,outcome,v_final,t_end,energy_drift,steps\n");
    for r in &records {
        push_record(&mut out, r, None);
    }
    Ok(out)
}

pub fn zoom(cfg: &RunConfig) -> Result<String, CliError> {
    let levels = run_zoom(&cfg.sweep_spec(), cfg.factor, cfg.depth, cfg.workers)?;
    let mut out = cfg.header(
        "zoom",
        cfg.sample_interval.unwrap_or(SIMULATE_SAMPLE_INTERVAL),
    );
    for level in &levels {
        writeln!(
            out,
            "# level {}: dv = {}, refined intervals = {}, rows = {}",
            level.depth,
            level.dv,
            level.intervals,
            level.records.len()
        )
        .unwrap();
    }
    push_errors(&mut out, levels.iter().flat_map(|l| l.records.iter()));
    out.push_str("v0,outcome,v_final,t_end,energy_drift,steps,depth\n");
    for level in &levels {
        for r in &level.records {
            push_record(&mut out, r, Some(level.depth));
        }
    }
    Ok(out)
}

pub fn linear_compare(cfg: &RunConfig) -> Result<String, CliError> {
    let opts = CompareOptions::default();
    let cmp = run_linear_compare(&cfg.params, &cfg.integrator, &opts).map_err(|e| match e {
        kinktrap::Error::InsufficientOscillations { found } => CliError::Runtime(format!(
            "no in-well oscillation to measure ({found} mean crossings); nothing binds the pair"
        )),
        other => other.into(),
    })?;
    let [full, half] = cmp.predictions;
    let rel = |measured: f64, predicted: f64| (measured - predicted) / predicted;

    let mut out = cfg.header(
        "linear-compare",
        cfg.sample_interval.unwrap_or(SIMULATE_SAMPLE_INTERVAL),
    );
    writeln!(out, "# cm_amplitude = {}", opts.cm_amplitude).unwrap();
    writeln!(out, "# separation_kick = {}", opts.separation_kick).unwrap();
    writeln!(out, "# duration = {}", opts.duration).unwrap();
    writeln!(out, "# in_well_separation = {}", cmp.in_well_separation).unwrap();
    writeln!(out, "# energy_drift = {}", cmp.energy_drift).unwrap();
    writeln!(
        out,
        "# mean_half_separation_shift = {}",
        cmp.mean_half_separation_shift
    )
    .unwrap();
    for (label, lp) in [("r0", full), ("r0/2", half)] {
        writeln!(out, "# r_eq {label} = {}", lp.r_eq).unwrap();
        writeln!(out, "# delta_offset (r_eq = {label}) = {}", lp.delta_offset).unwrap();
        writeln!(
            out,
            "# omega_eps^2 - omega_R^2 (r_eq = {label}) = {}",
            lp.omega_eps * lp.omega_eps - lp.omega_r * lp.omega_r
        )
        .unwrap();
    }
    out.push_str("mode,measured,closed_form_r0,closed_form_half_r0,rel_err_r0,rel_err_half_r0\n");
    for (mode, m, a, b) in [
        ("cm", cmp.measured_omega_r, full.omega_r, half.omega_r),
        (
            "relative",
            cmp.measured_omega_rel,
            full.omega_eps,
            half.omega_eps,
        ),
    ] {
        writeln!(out, "{mode},{m},{a},{b},{},{}", rel(m, a), rel(m, b)).unwrap();
    }
    Ok(out)
}

pub fn sensitivity(cfg: &RunConfig) -> Result<String, CliError> {
    let defaults = SensitivityOptions::default();
    let opts = SensitivityOptions {
        seed_delta: cfg.seed_delta,
        sample_interval: cfg.sample_interval.unwrap_or(defaults.sample_interval),
    };
    let rep = run_sensitivity(&cfg.scenario(cfg.v0), &cfg.integrator, &opts)?;
    let mut out = cfg.header("sensitivity", opts.sample_interval);
    writeln!(out, "# metric = {DISTANCE_METRIC}").unwrap();
    writeln!(
        out,
        "# window = [first d > {}, first d > {}]",
        rep.window_lower, rep.window_upper
    )
    .unwrap();
    writeln!(out, "# t_end = {}", rep.t_end).unwrap();
    writeln!(out, "# growth_factor = {}", rep.growth_factor).unwrap();
    match rep.time_to_unity {
        Some(t) => writeln!(out, "# time_to_unity = {t}").unwrap(),
        None => out.push_str("# time_to_unity = none\n"),
    }
    match rep.fit {
        Some(f) => {
            writeln!(out, "# lambda = {}", f.lambda).unwrap();
            writeln!(
                out,
                "# fit_window = [{}, {}], points = {}",
                f.t_start, f.t_end, f.points
            )
            .unwrap();
        }
        None => out.push_str("# lambda = none\n"),
    }
    match &rep.degenerate {
        Some(reason) => writeln!(out, "# DegenerateFit: {reason}").unwrap(),
        None => out.push_str("# fit = exponential\n"),
    }
    out.push_str("t,d\n");
    for (t, d) in &rep.samples {
        writeln!(out, "{t},{d}").unwrap();
    }
    Ok(out)
}
