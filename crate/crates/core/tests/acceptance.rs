//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.
//!
//! Sweeps run at the library's default dt of 1e-4; at 1e-3 the reference
//! runs drift by ~2e-5 in energy, above the conservation bound.

use std::process::ExitCode;
use std::time::Instant;

use kinktrap::linearized::{linear_compare, CompareOptions};
use kinktrap::sensitivity::{sensitivity, SensitivityOptions};
use kinktrap::sweep::{count_alternations, sweep, SweepOutcome, SweepRecord, SweepSpec};
use kinktrap::{
    integrate, integrate_observed, run_scattering, IntegratorConfig, ModelParams, Outcome,
    Scenario, Scheme, State, StopCondition,
};

const DRIFT_BOUND: f64 = 1e-6;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn paper() -> ModelParams {
    ModelParams::default()
}

fn spec(v_min: f64, v_max: f64, dv: f64) -> SweepSpec {
    SweepSpec {
        template: Scenario::new(paper(), v_min),
        v_min,
        v_max,
        dv,
        cfg: IntegratorConfig::default(),
    }
}

fn max_drift(rows: &[SweepRecord]) -> f64 {
    rows.iter().map(|r| r.energy_drift).fold(0.0, f64::max)
}

/// Maximal runs of consecutive `Trapped` rows.
fn trapped_runs(rows: &[SweepRecord]) -> Vec<usize> {
    let mut runs = Vec::new();
    let mut len = 0;
    for r in rows {
        if r.outcome == SweepOutcome::Trapped {
            len += 1;
        } else if len > 0 {
            runs.push(len);
            len = 0;
        }
    }
    if len > 0 {
        runs.push(len);
    }
    runs
}

fn figure_one(rows: &[SweepRecord]) -> Verdict {
    let count = |o| rows.iter().filter(|r| r.outcome == o).count();
    let (t, r, tr, err) = (
        count(SweepOutcome::Transmitted),
        count(SweepOutcome::Reflected),
        count(SweepOutcome::Trapped),
        count(SweepOutcome::Error),
    );
    let runs = trapped_runs(rows);
    let longest = runs.iter().copied().max().unwrap_or(0);
    let adjacent = rows.windows(2).any(|w| {
        matches!(
            (w[0].outcome, w[1].outcome),
            (SweepOutcome::Reflected, SweepOutcome::Transmitted)
                | (SweepOutcome::Transmitted, SweepOutcome::Reflected)
        )
    });
    verdict(
        rows.len() == 251 && t > 0 && r > 0 && tr > 0 && err == 0 && longest >= 2 && adjacent,
        format!(
            "{} rows: {t} transmitted, {r} reflected, {tr} trapped, {err} errors; \
             {} trapped runs (longest {longest}); reflected next to transmitted: {adjacent}",
            rows.len(),
            runs.len()
        ),
    )
}

/// Alternations on the fine grid inside coarse cells whose two endpoints
/// share a class, i.e. islands the coarse grid cannot see.
fn hidden_alternations(coarse: &[SweepRecord], fine: &[SweepRecord], ratio: usize) -> usize {
    coarse
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0].outcome == w[1].outcome)
        .map(|(i, _)| count_alternations(&fine[i * ratio..=(i + 1) * ratio]))
        .sum()
}

fn figure_two(coarse: &[SweepRecord], fine: &[SweepRecord]) -> Verdict {
    let ratio = 5;
    let aligned = coarse.len() == 11
        && fine.len() == 51
        && coarse
            .iter()
            .enumerate()
            .all(|(i, c)| c.bitwise_eq(&fine[i * ratio]));
    let (ca, fa) = (count_alternations(coarse), count_alternations(fine));
    let hidden = hidden_alternations(coarse, fine, ratio);
    verdict(
        aligned && fa >= ca + 2 && hidden >= 2,
        format!(
            "[0.115, 0.125]: {ca} alternations at dv=0.001, {fa} at dv=0.0002, \
             {hidden} inside cells the coarse grid sees as uniform; grids aligned: {aligned}"
        ),
    )
}

fn reference_drift(v0: f64, dt: f64) -> f64 {
    let cfg = IntegratorConfig {
        dt,
        ..IntegratorConfig::default()
    };
    run_scattering(&Scenario::new(paper(), v0), &cfg)
        .unwrap()
        .energy_drift
}

fn energy(fig1: &[SweepRecord], coarse: &[SweepRecord], fine: &[SweepRecord]) -> Verdict {
    let worst = max_drift(fig1).max(max_drift(coarse)).max(max_drift(fine));
    let (d1, d2) = (reference_drift(0.30, 1e-4), reference_drift(0.30, 5e-5));
    let ratio = d1 / d2;
    verdict(
        worst < DRIFT_BOUND && (3.5..=4.5).contains(&ratio),
        format!(
            "max drift {worst:.3e} over {} runs (< {DRIFT_BOUND:e}); \
             v0=0.30 drift {d1:.3e} -> {d2:.3e} on halving dt, ratio {ratio:.3}",
            fig1.len() + coarse.len() + fine.len()
        ),
    )
}

fn oracle() -> Verdict {
    let verlet = IntegratorConfig {
        dt: 1e-3,
        ..IntegratorConfig::default()
    };
    let rk4 = IntegratorConfig {
        scheme: Scheme::Rk4,
        dt: 1e-4,
        ..IntegratorConfig::default()
    };
    let mut pass = true;
    let mut parts = Vec::new();
    for (v0, expected) in [(0.30, Outcome::Transmitted), (0.258, Outcome::Reflected)] {
        let sc = Scenario::new(paper(), v0);
        let a = run_scattering(&sc, &verlet).unwrap();
        let b = run_scattering(&sc, &rk4).unwrap();
        let dv = (a.v_final - b.v_final).abs();
        pass &= a.outcome == expected && b.outcome == expected && dv < 1e-4;
        parts.push(format!(
            "v0={v0}: verlet {} {:.6}, rk4 {} {:.6}, |dv|={dv:.2e}",
            a.outcome, a.v_final, b.outcome, b.v_final
        ));
    }
    verdict(pass, parts.join("; "))
}

fn trapped_signature(fig1: &[SweepRecord]) -> Verdict {
    let trapped: Vec<&SweepRecord> = fig1
        .iter()
        .filter(|r| r.outcome == SweepOutcome::Trapped)
        .collect();
    let worst = trapped
        .iter()
        .map(|r| r.mean_cm_speed_tail.abs() / r.v0)
        .fold(0.0, f64::max);
    verdict(
        !trapped.is_empty() && worst < 1e-3,
        format!(
            "{} trapped rows, max |tail mean V| / v0 = {worst:.3e} (< 1e-3)",
            trapped.len()
        ),
    )
}

fn linearized() -> Verdict {
    let p = paper();
    let cmp = linear_compare(&p, &IntegratorConfig::default(), &CompareOptions::default()).unwrap();
    let errs: Vec<f64> = cmp
        .predictions
        .iter()
        .map(|lp| (cmp.measured_omega_r - lp.omega_r) / lp.omega_r)
        .collect();
    let best = errs
        .iter()
        .copied()
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min);
    let identity = cmp
        .predictions
        .iter()
        .map(|lp| (lp.omega_eps.powi(2) - lp.omega_r.powi(2) - 2.0 * p.k).abs())
        .fold(0.0, f64::max);
    let [full, half] = cmp.predictions;
    verdict(
        best < 0.10 && identity < 1e-14,
        format!(
            "measured omega_R {:.6}; closed form {:.6} (r_eq=r0, {:+.1}%), {:.6} (r_eq=r0/2, {:+.1}%); \
             |omega_eps^2 - omega_R^2 - 2k| = {identity:.1e}",
            cmp.measured_omega_r,
            full.omega_r,
            100.0 * errs[0],
            half.omega_r,
            100.0 * errs[1]
        ),
    )
}

/// Second derivative of the well along the pair's center of mass, with each
/// particle held at the in-well half separation.
fn corrected_cm_frequency() -> String {
    let p = paper();
    let half = 0.5 * kinktrap::linearized::in_well_separation(&p);
    let b2 = p.beta * half * half;
    let w = (2.0 * p.a * p.beta * (1.0 - 2.0 * b2) * (-b2).exp()).sqrt();
    format!("2A beta (1 - 2 beta r^2) exp(-beta r^2) at in-well r = {half:.6} gives omega_R {w:.6}")
}

/// Closed form checked where its curvature approximation is valid.
fn linearized_wide_well() -> String {
    let p = ModelParams {
        beta: 0.01,
        ..paper()
    };
    let cmp = linear_compare(&p, &IntegratorConfig::default(), &CompareOptions::default()).unwrap();
    let half = cmp.predictions[1];
    format!(
        "beta=0.01: measured omega_R {:.6} vs closed form {:.6} at r_eq=r0/2 ({:+.2}%)",
        cmp.measured_omega_r,
        half.omega_r,
        100.0 * (cmp.measured_omega_r - half.omega_r) / half.omega_r
    )
}

fn render(rows: &[SweepRecord]) -> String {
    rows.iter()
        .map(|r| {
            format!(
                "{},{},{},{},{},{}\n",
                r.v0, r.outcome, r.v_final, r.t_end, r.energy_drift, r.steps
            )
        })
        .collect()
}

fn symmetry() -> Verdict {
    let p = paper();
    let cfg = IntegratorConfig::default();
    let mut failures = Vec::new();

    // exchange: relabeled launch follows the relabeled trajectory bit for bit
    let sc = Scenario::new(p, 0.121);
    let stop = StopCondition::Composite(vec![
        StopCondition::ExitRadius(10.0),
        StopCondition::TimeLimit(300.0),
    ]);
    let trace = |start: State| {
        let mut out = Vec::new();
        integrate_observed(&start, &p, &cfg, &stop, |s, i| {
            if i % 1000 == 0 {
                out.push(*s);
            }
        })
        .unwrap();
        out
    };
    let a = trace(sc.initial_state());
    let b = trace(sc.initial_state().exchanged());
    let exchange = a.len() == b.len()
        && a.iter().zip(&b).all(|(s, e)| {
            let e = e.exchanged();
            [s.x1, s.x2, s.v1, s.v2].map(f64::to_bits) == [e.x1, e.x2, e.v1, e.v2].map(f64::to_bits)
        });
    if !exchange {
        failures.push("exchange");
    }

    // mirror launch
    let mut mirror = true;
    for v0 in [0.30, 0.258, 0.121] {
        let sc = Scenario::new(p, v0);
        let x = run_scattering(&sc, &cfg).unwrap();
        let y = run_scattering(&sc.mirrored(), &cfg).unwrap();
        mirror &= x.outcome == y.outcome && (x.v_final + y.v_final).abs() < 1e-10;
    }
    if !mirror {
        failures.push("mirror");
    }

    // time reversal of a transmitted passage
    let start = Scenario::new(p, 0.30).initial_state();
    let (end, _, diag) = integrate(&start, &p, &cfg, &StopCondition::ExitRadius(10.0)).unwrap();
    let back_start = State {
        t: 0.0,
        v1: -end.v1,
        v2: -end.v2,
        ..end
    };
    let limit = (diag.steps as f64 - 0.5) * cfg.dt;
    let (back, _, _) = integrate(&back_start, &p, &cfg, &StopCondition::TimeLimit(limit)).unwrap();
    let return_err = (back.x1 - start.x1).abs().max((back.x2 - start.x2).abs());
    if return_err >= 1e-6 {
        failures.push("time reversal");
    }

    // worker invariance
    let grid = SweepSpec {
        template: Scenario {
            t_max: 500.0,
            ..Scenario::new(p, 0.1)
        },
        ..spec(0.10, 0.14, 0.002)
    };
    let one = render(&sweep(&grid, 1).unwrap());
    let workers_same =
        one == render(&sweep(&grid, 4).unwrap()) && one == render(&sweep(&grid, 0).unwrap());
    if !workers_same {
        failures.push("worker invariance");
    }

    verdict(
        failures.is_empty(),
        format!(
            "exchange {exchange}, mirror {mirror}, time-reversal return error {return_err:.2e} (< 1e-6), \
             sweep bytes equal for 1/4/all workers {workers_same}{}",
            if failures.is_empty() { String::new() } else { format!("; failed: {}", failures.join(", ")) }
        ),
    )
}

fn divergence() -> Verdict {
    let cfg = IntegratorConfig::default();
    let opts = SensitivityOptions::default();
    let chaotic = sensitivity(&Scenario::new(paper(), 0.061), &cfg, &opts).unwrap();
    let free = sensitivity(
        &Scenario::new(ModelParams { a: 0.0, ..paper() }, 0.061),
        &cfg,
        &opts,
    )
    .unwrap();
    let lambda = chaotic.fit.map(|f| f.lambda).unwrap_or(f64::NAN);
    verdict(
        chaotic.decades() >= 4.0 && !chaotic.is_degenerate() && free.is_degenerate(),
        format!(
            "v0=0.061: d grows {:.1} decades from {:e} (>= 4), lambda {lambda:.4}; \
             A=0: DegenerateFit = {} ({})",
            chaotic.decades(),
            chaotic.seed_delta,
            free.is_degenerate(),
            free.degenerate.as_deref().unwrap_or("not flagged")
        ),
    )
}

fn main() -> ExitCode {
    let started = Instant::now();
    let fig1 = sweep(&spec(0.05, 0.30, 0.001), 0).unwrap();
    let coarse = sweep(&spec(0.115, 0.125, 0.001), 0).unwrap();
    let fine = sweep(&spec(0.115, 0.125, 0.0002), 0).unwrap();

    let results = [
        ("1 figure-1 outcome classes", figure_one(&fig1)),
        ("2 figure-2 finer islands", figure_two(&coarse, &fine)),
        ("3 energy conservation", energy(&fig1, &coarse, &fine)),
        ("4 verlet/rk4 oracle", oracle()),
        ("5 trapped-state signature", trapped_signature(&fig1)),
        ("6 linearized cross-check", linearized()),
        ("7 symmetry and determinism", symmetry()),
        ("8 sensitivity", divergence()),
    ];
    let mut failed = 0;
    for (name, v) in &results {
        println!(
            "[{}] criterion {name}: {}",
            if v.pass { "PASS" } else { "FAIL" },
            v.detail
        );
        failed += usize::from(!v.pass);
    }
    println!("[INFO] {}", corrected_cm_frequency());
    println!("[INFO] {}", linearized_wide_well());
    println!(
        "acceptance: {} passed, {failed} failed ({:.0} s)",
        results.len() - failed,
        started.elapsed().as_secs_f64()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
