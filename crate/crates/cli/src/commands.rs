use std::path::Path;

use bildsim_core::acceptance::{self, CriterionOutcome};
use bildsim_core::bell::{self, ChshAngles, HvStrategy, Pair};
use bildsim_core::brownian::fokker_planck::{fokker_planck_residual, FpGrid, MIN_FP_SAMPLES};
use bildsim_core::brownian::velocity::{osmotic_from_density, velocity_rows};
use bildsim_core::brownian::{
    coarse_velocity_backward, coarse_velocity_forward, integrate_overdamped, integrate_underdamped, io,
    momentum_resolution_check, nonsmoothness_witness, osmotic_velocity, timescale_report, BinSpec, Dynamics,
    LangevinConfig, TrajectoryEnsemble, VelocityOptions,
};
use bildsim_core::linalg::HermitianOperator;
use bildsim_core::pcsft::{self, FieldMeasure, MonteCarloEstimate, QuadraticVariable};
use bildsim_core::stats;
use serde::Serialize;
use serde_json::json;

use crate::config::{self, DynamicsChoice};
use crate::output::{self, OutputFile, RunResult};
use crate::{determinism, plot, CliError, Command, RunOptions};

/// Trajectory CSVs are written alongside the binary file below this many rows.
pub const CSV_TRAJECTORY_ROWS: usize = 100_000;

pub fn execute(command: &Command, text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    match command {
        Command::PcsftAverage => pcsft_average(text, opts),
        Command::PcsftCorrelation => pcsft_correlation(text, opts),
        Command::ChshQuantum => chsh_quantum(text, opts),
        Command::ChshHv => chsh_hv(text, opts),
        Command::BrownianCtm => brownian(text, opts, Dynamics::Underdamped),
        Command::BrownianOm => brownian(text, opts, Dynamics::Overdamped),
        Command::VelocityField => velocity_field(text, opts),
        Command::Acceptance { .. } => Err(CliError::config("acceptance takes no configuration")),
    }
}

fn to_value<T: Serialize>(v: &T) -> serde_json::Value {
    serde_json::to_value(v).expect("config serializes")
}

#[derive(Debug, Clone, Serialize)]
struct ResultRow {
    quantity: &'static str,
    exact: f64,
    mc_mean: f64,
    mc_stderr: f64,
    n: usize,
    seed: u64,
}

impl ResultRow {
    fn new(quantity: &'static str, exact: f64, est: &MonteCarloEstimate) -> Self {
        Self { quantity, exact, mc_mean: est.mean, mc_stderr: est.std_error, n: est.n_samples, seed: est.seed }
    }
}

fn pcsft_average(text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    let mut c: config::PcsftAverageConfig = config::parse(text)?;
    c.apply(opts)?;
    let measure = FieldMeasure::new(config::covariance("covariance", &c.covariance, c.dim)?)?;
    let v = QuadraticVariable::new(config::hermitian("kernel", &c.kernel, c.dim)?);
    let exact = pcsft::exact_average(&v, &measure)?;
    let est = pcsft::mc_average(&v, &measure, c.n_samples, c.seed)?;
    let energy = pcsft::average_energy(&measure);
    let energy_est = pcsft::mc_average(&QuadraticVariable::new(HermitianOperator::identity(c.dim)), &measure, c.n_samples, c.seed)?;
    let mut rows = vec![ResultRow::new("average", exact, &est), ResultRow::new("field_energy", energy, &energy_est)];
    let coupling = pcsft::normalized_coupling_check(&v, &measure).ok();
    let density = pcsft::correspondence_state(&measure).ok();
    if let Some(check) = &coupling {
        let scaled = MonteCarloEstimate { mean: est.mean / energy, std_error: est.std_error / energy, ..est };
        rows.push(ResultRow::new("normalized_average", check.rhs, &scaled));
    }
    let summary = json!({
        "exact_average": exact,
        "mc_average": est,
        "sigma_distance": est.sigma_distance(exact),
        "field_energy": energy,
        "coupling_check": coupling,
        "density_operator": density.as_ref().map(|d| d.operator().matrix().clone()),
    });
    let report = vec![format!("<f> exact {exact:.6}, Monte Carlo {:.6} +- {:.6}", est.mean, est.std_error)];
    Ok(RunResult {
        config: to_value(&c),
        seed: c.seed,
        files: vec![
            OutputFile::csv("results.csv", &rows),
            OutputFile::json("summary.json", &summary),
            OutputFile::text("plot.py", plot::scatter_script("results.csv")),
        ],
        report,
    })
}

fn pcsft_correlation(text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    let mut c: config::PcsftCorrelationConfig = config::parse(text)?;
    c.apply(opts)?;
    let measure = FieldMeasure::new(config::covariance("covariance", &c.covariance, c.dim)?)?;
    let f = QuadraticVariable::new(config::hermitian("kernel", &c.kernel, c.dim)?);
    let g = QuadraticVariable::new(config::hermitian("second_kernel", &c.second_kernel, c.dim)?);
    let exact = pcsft::exact_pair_correlation(&f, &g, &measure)?;
    let est = pcsft::mc_pair_correlation(&f, &g, &measure, c.n_samples, c.seed)?;
    let (ef, eg) = (pcsft::exact_average(&f, &measure)?, pcsft::exact_average(&g, &measure)?);
    let rows = vec![
        ResultRow::new("average_f", ef, &pcsft::mc_average(&f, &measure, c.n_samples, c.seed)?),
        ResultRow::new("average_g", eg, &pcsft::mc_average(&g, &measure, c.n_samples, c.seed)?),
        ResultRow::new("pair_correlation", exact, &est),
    ];
    let summary = json!({
        "exact_pair_correlation": exact,
        "mc_pair_correlation": est,
        "sigma_distance": est.sigma_distance(exact),
        "exact_covariance": exact - ef * eg,
    });
    let report = vec![format!("<fg> exact {exact:.6}, Monte Carlo {:.6} +- {:.6}", est.mean, est.std_error)];
    Ok(RunResult {
        config: to_value(&c),
        seed: c.seed,
        files: vec![
            OutputFile::csv("results.csv", &rows),
            OutputFile::json("summary.json", &summary),
            OutputFile::text("plot.py", plot::scatter_script("results.csv")),
        ],
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
struct CorrelationRow {
    pair: &'static str,
    empirical: Option<f64>,
    exact_or_quantum: Option<f64>,
    n: usize,
    seed: u64,
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    theta: f64,
    s_quantum: f64,
    s_hidden_variable: f64,
}

fn chsh_quantum(text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    let mut c: config::ChshQuantumConfig = config::parse(text)?;
    c.apply(opts)?;
    let rho = c.state.density()?;
    let s = bell::chsh_value(&rho, &c.angles)?;
    let grid = bell::chsh_grid_max(&rho, c.grid_points)?;
    let audit = bell::compatibility_audit(&c.angles)?;
    let bound = bell::deterministic_bound_enumeration();
    let mut correlations = Vec::new();
    for pair in Pair::CROSS {
        correlations.push(CorrelationRow {
            pair: pair.label(),
            empirical: None,
            exact_or_quantum: pair.quantum_correlation(&rho, &c.angles)?,
            n: 0,
            seed: c.seed,
        });
    }
    let sweep = (0..c.sweep_points)
        .map(|k| {
            let t = std::f64::consts::FRAC_PI_2 * k as f64 / (c.sweep_points - 1) as f64;
            let angles = ChshAngles { a1: 0.0, a2: 2.0 * t, b1: t, b2: -t };
            let hv = HvStrategy::sphere_sign(angles);
            let e = |p: Pair| hv.exact_correlation(p).expect("zero thresholds have a closed form");
            // Bob reports the opposite sign, which keeps the model local and
            // matches the anticorrelation of the singlet
            let s_hv = -bell::chsh_combination(e(Pair::A1B1), e(Pair::A1B2), e(Pair::A2B1), e(Pair::A2B2));
            Ok(SweepRow { theta: t, s_quantum: bell::chsh_value(&rho, &angles)?, s_hidden_variable: s_hv })
        })
        .collect::<Result<Vec<_>, bildsim_core::Error>>()?;
    let summary = json!({
        "S_quantum": s,
        "abs_S_quantum": s.abs(),
        "S_classical_max": bound.max_abs,
        "S_stream": null,
        "tsirelson": 2.0 * std::f64::consts::SQRT_2,
        "grid_maximum": grid,
        "compatibility": audit,
        "cross_compatible": audit.cross_compatible(),
        "angles": c.angles,
    });
    let report = vec![format!("S = {s:.7}, grid maximum |S| = {:.7}", grid.max_abs_s)];
    Ok(RunResult {
        config: to_value(&c),
        seed: c.seed,
        files: vec![
            OutputFile::csv("correlations.csv", &correlations),
            OutputFile::csv("sweep.csv", &sweep),
            OutputFile::json("summary.json", &summary),
            OutputFile::text("plot.py", plot::chsh_sweep_script("sweep.csv")),
        ],
        report,
    })
}

fn chsh_hv(text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    let mut c: config::ChshHvConfig = config::parse(text)?;
    c.apply(opts)?;
    let stream = bell::hv_sample(&c.strategy, c.n_samples, c.seed)?;
    let joint = bell::chsh_from_stream(&stream)?;
    let split = bell::chsh_from_split_streams(&stream)?;
    let rho = bell::singlet_state();
    let mut rows = Vec::new();
    let mut references = serde_json::Map::new();
    for pair in Pair::ALL {
        let (reference, kind) = match c.strategy.exact_correlation(pair) {
            Some(e) => (Some(e), "exact"),
            None => match pair.quantum_correlation(&rho, &c.angles)? {
                Some(q) => (Some(q), "quantum"),
                None => (None, "none"),
            },
        };
        references.insert(pair.label().into(), json!(kind));
        rows.push(CorrelationRow {
            pair: pair.label(),
            empirical: Some(bell::empirical_correlation(&stream, pair)?),
            exact_or_quantum: reference,
            n: stream.len(),
            seed: c.seed,
        });
    }
    let summary = json!({
        "S_quantum": bell::chsh_value(&rho, &c.angles)?,
        "S_classical_max": bell::deterministic_bound_enumeration().max_abs,
        "S_stream": joint.s,
        "S_stream_stderr": joint.std_error,
        "S_split_streams": split.s,
        "S_split_streams_stderr": split.std_error,
        "n": stream.len(),
        "reference_kind": references,
    });
    let report = vec![format!(
        "S from one stream {:.5} +- {:.5}; from four quarter-streams {:.5} +- {:.5}",
        joint.s, joint.std_error, split.s, split.std_error
    )];
    Ok(RunResult {
        config: to_value(&c),
        seed: c.seed,
        files: vec![
            OutputFile::csv("correlations.csv", &rows),
            OutputFile::json("summary.json", &summary),
            OutputFile::text("plot.py", plot::correlation_script("correlations.csv")),
        ],
        report,
    })
}

#[derive(Debug, Clone, Serialize)]
struct MomentRow {
    time: f64,
    particle: usize,
    x_mean: f64,
    x_var: f64,
    p_mean: Option<f64>,
    p_var: Option<f64>,
}

fn moment_rows(e: &TrajectoryEnsemble) -> Vec<MomentRow> {
    let mut rows = Vec::with_capacity(e.n_records() * e.n_particles());
    for (r, &time) in e.times.iter().enumerate() {
        for j in 0..e.n_particles() {
            let x = stats::moments(&e.snapshot(r, j));
            let p = e.momentum_snapshot(r, j).map(|p| stats::moments(&p));
            rows.push(MomentRow {
                time,
                particle: j,
                x_mean: x.mean,
                x_var: x.variance,
                p_mean: p.map(|m| m.mean),
                p_var: p.map(|m| m.variance),
            });
        }
    }
    rows
}

fn integrate(config: &LangevinConfig, dynamics: Dynamics) -> Result<TrajectoryEnsemble, CliError> {
    Ok(match dynamics {
        Dynamics::Underdamped => integrate_underdamped(config)?,
        Dynamics::Overdamped => integrate_overdamped(config)?,
    })
}

fn brownian(text: &str, opts: &RunOptions, dynamics: Dynamics) -> Result<RunResult, CliError> {
    let mut c: LangevinConfig = config::parse(text)?;
    config::apply_langevin(&mut c, opts)?;
    let timescales = timescale_report(&c)?;
    let e = integrate(&c, dynamics)?;
    let last = e.n_records() - 1;
    let finals: Vec<_> = (0..e.n_particles())
        .map(|j| {
            let x = e.snapshot(last, j);
            let m = stats::moments(&x);
            json!({
                "particle": j,
                "x_mean": m.mean,
                "x_var": m.variance,
                "x_var_stderr": if x.len() > 3 { Some(stats::variance_std_error(&x)) } else { None },
                "gibbs_x_var": c.potential.gibbs_variance(j, c.temperature(j)),
                "p_var": e.momentum_snapshot(last, j).map(|p| stats::moments(&p).variance),
                "maxwell_p_var": (dynamics == Dynamics::Underdamped).then(|| c.mass * c.temperature(j)),
            })
        })
        .collect();
    let fp = if dynamics == Dynamics::Overdamped {
        if c.n_trajectories < MIN_FP_SAMPLES || c.n_particles > 2 || e.n_records() < 3 {
            json!({ "status": "skipped", "reason": format!(
                "needs >= {MIN_FP_SAMPLES} trajectories, at most 2 particles and 3 records") })
        } else {
            let record = last / 2;
            let r = fokker_planck_residual(&e, record, record.div_ceil(2).max(1).min(last - record), &FpGrid::default())?;
            json!({ "status": "computed", "residual": r })
        }
    } else {
        serde_json::Value::Null
    };
    let summary = json!({
        "dynamics": dynamics,
        "config_hash": c.hash(),
        "timescales": timescales,
        "final": finals,
        "fokker_planck": fp,
    });
    let mut traj = Vec::new();
    io::write_binary(&e, &mut traj)?;
    let mut files = vec![OutputFile::binary("trajectories.bin", traj)];
    let n_rows = e.n_trajectories() * e.n_records() * e.n_particles();
    if n_rows <= CSV_TRAJECTORY_ROWS {
        let mut csv = Vec::new();
        io::write_csv(&e, &mut csv)?;
        files.push(OutputFile { name: "trajectories.csv".into(), bytes: csv, rows: Some(n_rows) });
    }
    files.push(OutputFile::csv("moments.csv", &moment_rows(&e)));
    files.push(OutputFile::json("summary.json", &summary));
    files.push(OutputFile::text("plot.py", plot::moments_script("moments.csv")));
    let report = vec![format!(
        "{} trajectories x {} records; tau_p = {}, tau_x = {}, regime {:?}",
        e.n_trajectories(),
        e.n_records(),
        timescales.tau_p,
        timescales.tau_x,
        timescales.regime
    )];
    Ok(RunResult { config: to_value(&c), seed: c.seed, files, report })
}

#[derive(Debug, Clone, Serialize)]
struct OverlayRow {
    bin_center: f64,
    position: f64,
    u: f64,
    u_err: f64,
    density_u: f64,
    density_u_err: f64,
}

fn velocity_field(text: &str, opts: &RunOptions) -> Result<RunResult, CliError> {
    let mut c: config::VelocityFieldConfig = config::parse(text)?;
    c.apply(opts)?;
    let dynamics = match c.dynamics {
        DynamicsChoice::Overdamped => Dynamics::Overdamped,
        DynamicsChoice::Underdamped => Dynamics::Underdamped,
    };
    let timescales = timescale_report(&c.langevin)?;
    let e = integrate(&c.langevin, dynamics)?;
    let bins = BinSpec::new(c.bins.lo, c.bins.hi, c.bins.n_bins).map_err(|err| CliError::config(format!("bins: {err}")))?;
    let vopts = VelocityOptions { particle: c.particle, min_occupancy: c.min_occupancy };
    let plus = coarse_velocity_forward(&e, c.epsilon, &bins, &vopts)?;
    let minus = coarse_velocity_backward(&e, c.epsilon, &bins, &vopts)?;
    let u = osmotic_velocity(&plus, &minus)?;
    let rows = velocity_rows(&plus, &minus)?;
    let oracle = osmotic_from_density(&e, &u)?;
    let overlay: Vec<OverlayRow> = u
        .values
        .iter()
        .zip(&oracle)
        .filter_map(|(b, o)| {
            let (b, o) = (b.as_ref()?, o.as_ref()?);
            Some(OverlayRow {
                bin_center: b.center,
                position: b.mean_position,
                u: b.value,
                u_err: b.std_error,
                density_u: o.value,
                density_u_err: o.std_error,
            })
        })
        .collect();
    let missing: Vec<f64> = u.values.iter().enumerate().filter(|(_, b)| b.is_none()).map(|(k, _)| bins.center(k)).collect();
    let mut files = vec![OutputFile::csv("velocity.csv", &rows), OutputFile::csv("overlay.csv", &overlay)];
    if let Some([lo, hi]) = c.sweep_window {
        let table = nonsmoothness_witness(&e, &c.epsilon_sweep, lo, hi, &vopts)?;
        files.push(OutputFile::csv("sweep.csv", &table));
    }
    let momentum = match c.momentum_window {
        Some([lo, hi]) => Some(momentum_resolution_check(&e, c.epsilon, (lo, hi), None, &vopts)?),
        None => None,
    };
    let in_window = c.epsilon < timescales.tau_x && (dynamics == Dynamics::Overdamped || c.epsilon > timescales.tau_p);
    let summary = json!({
        "dynamics": dynamics,
        "epsilon": u.epsilon,
        "bin_width": u.bin_width(),
        "min_occupancy": c.min_occupancy,
        "missing_bins": missing,
        "timescales": timescales,
        "epsilon_between_timescales": in_window,
        "diffusion": c.langevin.diffusion(c.particle),
        "momentum_resolution": momentum,
        "kde_bandwidth": oracle.iter().flatten().next().map(|o| o.bandwidth),
    });
    files.push(OutputFile::json("summary.json", &summary));
    files.push(OutputFile::text("plot.py", plot::velocity_script("velocity.csv", "overlay.csv")));
    let report = vec![format!(
        "{} populated bins of {}, epsilon = {}",
        rows.len(),
        bins.n_bins,
        u.epsilon
    )];
    Ok(RunResult { config: to_value(&c), seed: c.langevin.seed, files, report })
}

/// Runs the acceptance criteria, printing one line per criterion as it
/// finishes, and writes `acceptance.json` into `out`.
pub fn acceptance(only: &[u8], out: &Path) -> Result<Vec<String>, CliError> {
    let ids: Vec<u8> = if only.is_empty() { (1..=12).collect() } else { only.to_vec() };
    if let Some(bad) = ids.iter().find(|id| !(1..=12).contains(*id)) {
        return Err(CliError::config(format!("--only: no criterion {bad}")));
    }
    let mut outcomes: Vec<CriterionOutcome> = Vec::new();
    for id in ids {
        let outcome = if id == 12 { determinism::check(&[1, 8]) } else { acceptance::run_criterion(id) };
        println!("{outcome}");
        outcomes.push(outcome);
    }
    std::fs::create_dir_all(out).map_err(|e| CliError::config(format!("output {}: {e}", out.display())))?;
    output::write_atomic(out, "acceptance.json", &OutputFile::json("acceptance.json", &outcomes).bytes)?;
    let failed = outcomes.iter().filter(|o| !o.passed).count();
    if failed > 0 {
        return Err(CliError::numerical(format!("{failed} of {} acceptance criteria failed", outcomes.len())));
    }
    Ok(vec![format!("all {} criteria passed", outcomes.len())])
}
