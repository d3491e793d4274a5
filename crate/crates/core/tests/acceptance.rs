//! Acceptance runs. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use deltaqed::config::{Config, Grid};
use deltaqed::flux::{
    check_convergence, decay_rates, eigensolver, incident_voltage_for_rabi, voltage_for_rabi, ChargeTruncation,
    CircuitParams, LossModel, DEFAULT_CHARGE_CUTOFF, DEFAULT_EIGENSOLVER,
};
use deltaqed::lindblad::{probe_response, saturation_sweep, LindbladRates, ProbeDrive, Sanity};
use deltaqed::scattering::{
    channel, optimal_drive_down, scatter_down, scatter_up, solve_oracle_down, solve_oracle_up,
    DriveField, EmitterRates, Transitions,
};
use deltaqed::sweep::{find_optimal_bias, run_sweep, SweepSpec};
use deltaqed::units::{ghz, to_ghz};
use deltaqed::Result;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Sanity results of every steady state solved by criteria 7 and 8.
static STEADY_STATES: Mutex<Vec<(String, Sanity)>> = Mutex::new(Vec::new());

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Result<Outcome> {
    Ok(Outcome { pass, detail })
}

fn reproduce(name: &str) -> Config {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../reproduce").join(name);
    Config::load(&path).unwrap_or_else(|e| panic!("{}: {e}", path.display()))
}

fn rel(a: Complex64, b: Complex64) -> f64 {
    let scale = a.norm().max(b.norm());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).norm() / scale
    }
}

fn within(value: f64, target: f64, tol: f64) -> bool {
    (value - target).abs() <= tol
}

fn lossless_conversion() -> Result<Outcome> {
    let rates = EmitterRates::lossless(ghz(0.118), ghz(0.041))?;
    let tr = Transitions::from_ghz(20.318, 17.033)?;
    let drive = optimal_drive_down(&rates)?.field(&tr)?;
    let on = scatter_down(tr.omega_31(), &rates, &tr, &drive);
    let span = 20.0 * (rates.gamma_31() + rates.gamma_21());
    let grid = Grid::new(tr.omega_31() - span, tr.omega_31() + span, 10_000)?;
    let mut worst = 0.0f64;
    for nu in grid.values() {
        worst = worst.max((scatter_down(nu, &rates, &tr, &drive).total() - 1.0).abs());
    }
    let pass = on.abs2_ta() <= 1e-20 && (on.abs2_tb() - 1.0).abs() <= 1e-12 && worst <= 1e-12;
    outcome(
        pass,
        format!(
            "|T_a(w31)|^2 = {:.3e}, |T_b(w31)|^2 - 1 = {:.3e}, max |sum - 1| = {worst:.3e} over 1e4 points",
            on.abs2_ta(),
            on.abs2_tb() - 1.0
        ),
    )
}

fn oracle_equivalence() -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..1000 {
        let tr = Transitions::from_ghz(rng.gen_range(15.0..25.0), rng.gen_range(5.0..14.0))?;
        let rates = EmitterRates::from_ghz(
            rng.gen_range(0.001..0.5),
            rng.gen_range(0.001..0.5),
            rng.gen_range(0.0..0.05),
            rng.gen_range(0.0..0.05),
        )?;
        let drive = DriveField::detuned(&tr, ghz(rng.gen_range(-0.3..0.3)), ghz(rng.gen_range(0.001..0.5)))?;
        let off = ghz(rng.gen_range(-1.0..1.0));
        let pairs = [
            (
                scatter_down(tr.omega_31() + off, &rates, &tr, &drive),
                solve_oracle_down(tr.omega_31() + off, &rates, &tr, &drive)?,
            ),
            (
                scatter_up(tr.omega_21() + off, &rates, &tr, &drive),
                solve_oracle_up(tr.omega_21() + off, &rates, &tr, &drive)?,
            ),
        ];
        for (c, s) in pairs {
            for (a, b) in [(c.t_a, s.t_a), (c.t_b, s.t_b), (c.lambda_2, s.lambda_2), (c.lambda_3, s.lambda_3)] {
                worst = worst.max(rel(a, b));
            }
        }
    }
    outcome(
        worst <= 1e-10,
        format!("max relative deviation {worst:.3e} over 1000 draws, both directions"),
    )
}

fn eta_symmetry() -> Result<Outcome> {
    let total = ghz(0.16);
    let tr = Transitions::from_ghz(20.318, 17.033)?;
    let grid = Grid::new(-10.0 * total, 10.0 * total, 2001)?.values();
    let mut worst = 0.0f64;
    for eta in [0.1, 0.2, 5.0, 10.0] {
        let spectra = |eta: f64| -> Result<Vec<(f64, f64)>> {
            let rates = EmitterRates::from_total(total, eta)?;
            let drive = optimal_drive_down(&rates)?.field(&tr)?;
            Ok(grid
                .iter()
                .map(|x| {
                    let r = scatter_down(tr.omega_31() + x, &rates, &tr, &drive);
                    (r.abs2_ta(), r.abs2_tb())
                })
                .collect())
        };
        for (p, q) in spectra(eta)?.into_iter().zip(spectra(1.0 / eta)?) {
            worst = worst.max((p.0 - q.0).abs()).max((p.1 - q.1).abs());
        }
    }
    outcome(
        worst <= 1e-12,
        format!("max pointwise difference {worst:.3e} for eta in {{0.1, 0.2, 5, 10}}"),
    )
}

fn circuit_anchor() -> Result<Outcome> {
    let params = CircuitParams::new(0.7, 0.5, 150.0, 80.0, 50.0, 0.4845)?;
    let trunc = ChargeTruncation::new(DEFAULT_CHARGE_CUTOFF, DEFAULT_CHARGE_CUTOFF)?;
    let (spectrum, conv) = check_convergence(&params, &trunc, eigensolver(DEFAULT_EIGENSOLVER)?)?;
    let rates = decay_rates(&params, &spectrum);
    let r = |v: f64, target: f64| (v - target).abs() / target;
    let levels = [
        r(to_ghz(spectrum.omega_31()), 20.318),
        r(to_ghz(spectrum.omega_21()), 17.033),
        r(to_ghz(spectrum.omega_32()), 3.285),
    ];
    let widths = [
        r(to_ghz(rates.gamma_31), 0.118),
        r(to_ghz(rates.gamma_21), 0.041),
        r(to_ghz(rates.gamma_32), 0.005),
    ];
    let lmax = levels.iter().copied().fold(0.0, f64::max);
    let wmax = widths.iter().copied().fold(0.0, f64::max);
    outcome(
        lmax <= 5e-3 && wmax <= 0.05 && conv.converged,
        format!(
            "w31 {:.5} w21 {:.5} w32 {:.5} GHz (max rel {lmax:.2e}); G31 {:.5} G21 {:.5} G32 {:.5} GHz (max rel {wmax:.2e}); doubled cutoff converged: {}",
            to_ghz(spectrum.omega_31()),
            to_ghz(spectrum.omega_21()),
            to_ghz(spectrum.omega_32()),
            to_ghz(rates.gamma_31),
            to_ghz(rates.gamma_21),
            to_ghz(rates.gamma_32),
            conv.converged
        ),
    )
}

fn optimal_bias() -> Result<Outcome> {
    let base = CircuitParams::new(0.7, 0.5, 150.0, 80.0, 50.0, 0.5)?;
    let trunc = ChargeTruncation::new(DEFAULT_CHARGE_CUTOFF, DEFAULT_CHARGE_CUTOFF)?;
    let solver = eigensolver(DEFAULT_EIGENSOLVER)?;
    let step = 5e-4;
    let mut pass = true;
    let mut detail = Vec::new();
    let mut found = Vec::new();
    for (name, window, f_star, eff, band) in [
        ("down", (0.47, 0.50), 0.4845, 0.959, (0.4812, 0.4898)),
        ("up", (0.50, 0.53), 0.5155, 0.961, (0.5102, 0.5188)),
    ] {
        let ob = find_optimal_bias(&base, window, step, channel(name)?, &LossModel::perfect(), &trunc, solver)?;
        let (lo, hi) = ob.band.unwrap_or((f64::NAN, f64::NAN));
        pass &= within(ob.flux, f_star, 1e-3)
            && within(ob.efficiency, eff, 5e-3)
            && within(lo, band.0, step)
            && within(hi, band.1, step);
        detail.push(format!(
            "{name}: f* = {:.5}, {:.2}%, band {lo:.5}..{hi:.5}",
            ob.flux,
            100.0 * ob.efficiency
        ));
        found.push(ob);
    }
    let mirror = (found[0].flux + found[1].flux - 1.0).abs();
    pass &= mirror <= 1e-3;
    detail.push(format!("|f*_down + f*_up - 1| = {mirror:.1e}"));
    outcome(pass, detail.join("; "))
}

fn pulse_efficiency(width: f64, points: usize) -> Result<f64> {
    let mut config = reproduce("pulse.toml");
    config.pulse.width_ghz = width;
    config.pulse.points = points;
    let record = run_sweep(&SweepSpec::new("pulse", config)?)?;
    Ok(record.summary_value("efficiency").expect("pulse summary carries the efficiency"))
}

fn pulse_conversion() -> Result<Outcome> {
    let points = reproduce("pulse.toml").pulse.points;
    let narrow = pulse_efficiency(0.005, points)?;
    let broad = pulse_efficiency(0.05, points)?;
    let drift = [
        (narrow - pulse_efficiency(0.005, 2 * points - 1)?).abs(),
        (broad - pulse_efficiency(0.05, 2 * points - 1)?).abs(),
    ]
    .into_iter()
    .fold(0.0, f64::max);
    outcome(
        within(narrow, 0.955, 0.010) && within(broad, 0.786, 0.015) && drift < 1e-6,
        format!(
            "d = 0.005 GHz: {:.2}%, d = 0.05 GHz: {:.2}%, change on doubling the quadrature {drift:.1e}",
            100.0 * narrow,
            100.0 * broad
        ),
    )
}

/// Emitter, control Rabi frequency and master-equation rates of the
/// saturation runs.
fn saturation_setup() -> Result<(Config, deltaqed::config::Emitter, f64, LindbladRates)> {
    let config = reproduce("saturation.toml");
    let emitter = config.emitter()?;
    let drive = config.drive(&emitter)?;
    let rates = config.lindblad_rates(&emitter)?;
    Ok((config, emitter, drive.rabi(), rates))
}

fn record_sanity(label: String, s: Sanity) {
    STEADY_STATES.lock().unwrap().push((label, s));
}

fn weak_field() -> Result<Outcome> {
    let (config, emitter, rabi, rates) = saturation_setup()?;
    let drive = config.drive(&emitter)?;
    let g31 = rates.gamma_31();
    let probe = 0.01 * g31;
    let (mut peak_a, mut peak_b, mut dev_a, mut dev_b, mut rel_b) = (0.0f64, 0.0f64, 0.0f64, 0.0f64, 0.0f64);
    for x in Grid::new(-3.0, 3.0, 121)?.values() {
        let row = probe_response(&rates, &ProbeDrive::new(probe, x * g31, 0.0, rabi)?)?;
        record_sanity(format!("weak field, delta_p/G31 = {x}"), row.sanity);
        let exact = scatter_down(emitter.transitions.omega_31() + x * g31, &emitter.rates, &emitter.transitions, &drive);
        peak_a = peak_a.max(exact.abs2_ta());
        peak_b = peak_b.max(exact.abs2_tb());
        dev_a = dev_a.max((row.abs2_ta - exact.abs2_ta()).abs());
        dev_b = dev_b.max((row.abs2_tb - exact.abs2_tb()).abs());
        rel_b = rel_b.max((row.abs2_tb - exact.abs2_tb()).abs() / exact.abs2_tb());
    }
    let (ra, rb) = (dev_a / peak_a, dev_b / peak_b);
    outcome(
        ra <= 0.01 && rb <= 0.01,
        format!(
            "deviation relative to the analytic peak: |T_a|^2 {ra:.2e}, |T_b|^2 {rb:.2e} (pointwise |T_b|^2 {rel_b:.2e}) on 121 points"
        ),
    )
}

fn saturation() -> Result<Outcome> {
    let (_, _, rabi, rates) = saturation_setup()?;
    let half = probe_response(&rates, &ProbeDrive::new(0.5 * rates.gamma_31(), 0.0, 0.0, rabi)?)?;
    record_sanity("saturation, omega_p/G31 = 0.5".into(), half.sanity);
    let grid = Grid::new(0.01, 2.0, 50)?.values();
    let rows = saturation_sweep(&rates, rabi, &grid).into_iter().collect::<Result<Vec<_>>>()?;
    for r in &rows {
        record_sanity(format!("saturation, omega_p/G31 = {}", r.omega_p_over_g31), r.sanity);
    }
    let tb_break = rows.windows(2).position(|w| !(w[1].abs2_tb < w[0].abs2_tb));
    let ta_break = rows.windows(2).position(|w| !(w[1].abs2_ta > w[0].abs2_ta));
    let describe = |b: Option<usize>, what: &str| match b {
        None => format!("{what} monotone"),
        Some(i) => format!(
            "{what} not monotone between omega_p/G31 = {:.4} and {:.4}",
            rows[i].omega_p_over_g31,
            rows[i + 1].omega_p_over_g31
        ),
    };
    outcome(
        within(half.abs2_tb, 0.372, 0.010) && tb_break.is_none() && ta_break.is_none(),
        format!(
            "|T_b|^2 at 0.5 G31 = {:.2}%; {}; {}; min |T_b|^2 = {:.2e}",
            100.0 * half.abs2_tb,
            describe(tb_break, "|T_b|^2"),
            describe(ta_break, "|T_a|^2"),
            rows.iter().map(|r| r.abs2_tb).fold(f64::INFINITY, f64::min)
        ),
    )
}

fn drive_voltage() -> Result<Outcome> {
    let config = reproduce("pulse.toml");
    let emitter = config.emitter()?;
    let (params, spectrum, _) = emitter.circuit.as_ref().expect("circuit emitter");
    let rabi = optimal_drive_down(&emitter.rates)?.rabi;
    let volts = voltage_for_rabi(params, spectrum, rabi)?;
    let incident = incident_voltage_for_rabi(params, spectrum, rabi)?;
    outcome(
        (1e-7..=1e-6).contains(&volts),
        format!(
            "control Rabi {:.4} GHz needs {volts:.3e} V at the loop ({incident:.3e} V incident on the open end)",
            to_ghz(rabi)
        ),
    )
}

fn density_sanity() -> Result<Outcome> {
    let states = STEADY_STATES.lock().unwrap();
    if states.is_empty() {
        return outcome(false, "no steady states were recorded".into());
    }
    let bad: Vec<&String> = states.iter().filter(|(_, s)| !s.is_physical()).map(|(l, _)| l).collect();
    let herm = states.iter().map(|(_, s)| s.hermiticity).fold(0.0, f64::max);
    let trace = states.iter().map(|(_, s)| s.trace_error).fold(0.0, f64::max);
    let eig = states.iter().map(|(_, s)| s.min_eigenvalue).fold(f64::INFINITY, f64::min);
    outcome(
        bad.is_empty(),
        format!(
            "{} states, {} failing; max hermiticity defect {herm:.1e}, max trace error {trace:.1e}, min eigenvalue {eig:.2e}",
            states.len(),
            bad.len()
        ),
    )
}

type Check = fn() -> Result<Outcome>;

fn main() -> ExitCode {
    let criteria: [(&str, Check, Option<Duration>); 10] = [
        ("lossless conversion", lossless_conversion, Some(Duration::from_secs(1))),
        ("oracle equivalence", oracle_equivalence, Some(Duration::from_secs(5))),
        ("coupling-ratio symmetry", eta_symmetry, None),
        ("circuit anchor", circuit_anchor, Some(Duration::from_secs(10))),
        ("optimal bias", optimal_bias, Some(Duration::from_secs(120))),
        ("pulse conversion", pulse_conversion, Some(Duration::from_secs(5))),
        ("weak-field steady state", weak_field, Some(Duration::from_secs(10))),
        ("saturation", saturation, Some(Duration::from_secs(30))),
        ("drive voltage", drive_voltage, None),
        ("density-matrix sanity", density_sanity, None),
    ];
    let mut failed = 0;
    for (i, (name, check, limit)) in criteria.into_iter().enumerate() {
        let start = Instant::now();
        let result = catch_unwind(AssertUnwindSafe(check));
        let elapsed = start.elapsed();
        let (pass, mut detail) = match result {
            Ok(Ok(o)) => (o.pass, o.detail),
            Ok(Err(e)) => (false, format!("error: {e}")),
            Err(_) => (false, "panicked".to_string()),
        };
        let in_time = limit.map_or(true, |l| elapsed <= l);
        if !in_time {
            detail.push_str(&format!("; over the {:?} limit", limit.unwrap()));
        }
        let pass = pass && in_time;
        if !pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {}: {name} ({:.2} s): {detail}",
            i + 1,
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64()
        );
    }
    println!("acceptance: {} of 10 criteria passed", 10 - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
