//! The seven subcommands, as functions returning what gets printed.

use std::fs;
use std::path::{Path, PathBuf};

use nonlocal_spread::dispersion::{
    classify_propagation, kappa_index, lambda_set, locate_speeds, sigma_star as solve_sigma_star,
    DispersionError, MobilityFamily,
};
use nonlocal_spread::dynamics::{
    check_comparison, check_monotone, degenerate_ode_deviation, ConvolutionMethod, Convolver, DiscreteKernel,
    MonotoneCheck, SimConfig, Trajectory, UpperEnvelope, BOX_TOLERANCE,
};
use nonlocal_spread::{FieldState, Simulator};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use sha2::{Digest, Sha256};

use crate::config::SweepCommand;
use crate::error::CliError;
use crate::output::{num, writer, Table};
use crate::scenario::Scenario;

pub const SPEEDS_HEADER: [&str; 5] = ["lambda_l", "lambda_r", "c_l", "c_r", "class"];
pub const KAPPA_HEADER: [&str; 1] = ["kappa"];
pub const SIGMA_STAR_HEADER: [&str; 2] = ["kappa", "sigma_star"];
pub const SUMMARY_HEADER: [&str; 8] = [
    "c_left_fit",
    "c_right_fit",
    "r2_left",
    "r2_right",
    "c_l_star",
    "c_r_star",
    "rel_err_left",
    "rel_err_right",
];

/// Tag attached to runs whose kernels fall outside the decay-rate theory.
pub const OUTSIDE_HYPOTHESES: &str = "outside-theorem-hypotheses";

/// Oracle tolerances.
const DIRECT_SPECTRAL_TOL: f64 = 1e-10;
const ORDER_TOL: f64 = 1e-8;
const ODE_TOL: f64 = 1e-6;
const ODE_HORIZON: f64 = 15.0;
const ODE_SUBSTEPS: usize = 8;

pub fn speeds(s: &Scenario) -> Result<Table, CliError> {
    let p = locate_speeds(&s.system()?)?;
    Ok(Table::single(
        &SPEEDS_HEADER,
        vec![
            num(p.lambda_l_star),
            num(p.lambda_r_star),
            num(p.c_l_star),
            num(p.c_r_star),
            p.classification.as_str().into(),
        ],
    ))
}

/// Same row as [`speeds`], with the class read off the set `Lambda`
/// instead of the signs of the speeds.
pub fn classify(s: &Scenario) -> Result<Table, CliError> {
    let sys = s.system()?;
    let p = locate_speeds(&sys)?;
    let class = classify_propagation(lambda_set(&sys)?.as_ref());
    Ok(Table::single(
        &SPEEDS_HEADER,
        vec![
            num(p.lambda_l_star),
            num(p.lambda_r_star),
            num(p.c_l_star),
            num(p.c_r_star),
            class.as_str().into(),
        ],
    ))
}

pub fn kappa(s: &Scenario) -> Result<Table, CliError> {
    let sys = s.system()?;
    let k = kappa_index(sys.rates(), sys.k1())?;
    Ok(Table::single(&KAPPA_HEADER, vec![num(k)]))
}

/// `kappa,sigma_star`. With `kappa <= 1` the second field is empty and a
/// note is returned for stderr.
pub fn sigma_star(s: &Scenario, unproven: bool) -> Result<(Table, Option<String>), CliError> {
    let sys = s.system()?;
    let (family, _) = MobilityFamily::of(sys.k2()).ok_or_else(|| {
        CliError::Config(format!(
            "sigma-star needs kernel.v = normal(mean=0, ..) or a symmetric uniform(..), got {}",
            s.config.kernel_v
        ))
    })?;
    match solve_sigma_star(&sys, family, unproven) {
        Ok(cm) => Ok((
            Table::single(&SIGMA_STAR_HEADER, vec![num(cm.kappa), num(cm.sigma_star)]),
            None,
        )),
        Err(DispersionError::NoCriticalValue { kappa }) => Ok((
            Table::single(&SIGMA_STAR_HEADER, vec![num(kappa), String::new()]),
            Some(format!("kappa = {kappa} <= 1: no critical mobility")),
        )),
        Err(DispersionError::Unproven) => Err(CliError::Config(
            "kernel.u is not normal or uniform; sigma-star for general kernels needs --unproven".into(),
        )),
        Err(e) => Err(e.into()),
    }
}

/// Result of one simulation.
#[derive(Debug, Clone)]
pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub summary: Table,
    pub tags: Vec<&'static str>,
}

/// First 16 hex digits of the SHA-256 of the canonical config.
pub fn config_hash(s: &Scenario) -> String {
    let digest = Sha256::digest(s.config.run_key().as_bytes());
    digest[..8].iter().map(|b| format!("{b:02x}")).collect()
}

fn build_simulator(s: &Scenario, cfg: &SimConfig, method: ConvolutionMethod) -> Result<Simulator, CliError> {
    let (k1, k2) = s.kernels()?;
    Ok(Simulator::new(&s.params()?, &k1, &k2, cfg.grid, method)?)
}

/// Runs the configured simulation and writes `snapshots.csv`, `fronts.csv`,
/// `summary.csv` and the canonical `config.txt` into `out/<hash>`.
pub fn simulate(s: &Scenario, out: &Path) -> Result<SimulateOutcome, CliError> {
    let (cfg, sys, profile) = s.sim_config()?;
    let traj = build_simulator(s, &cfg, cfg.method)?.run(&cfg)?;
    let fit = traj.fit(cfg.fit_window)?;
    let (ref_l, ref_r) = s.reference_speeds(&sys, &profile)?;
    let rel = |fit: f64, r: f64| ((fit - r) / r).abs();
    let summary = Table::single(
        &SUMMARY_HEADER,
        vec![
            num(fit.c_left),
            num(fit.c_right),
            num(fit.r2_left),
            num(fit.r2_right),
            num(ref_l),
            num(ref_r),
            num(rel(fit.c_left, ref_l)),
            num(rel(fit.c_right, ref_r)),
        ],
    );
    let tags = if traj.outside_theorem_hypotheses {
        vec![OUTSIDE_HYPOTHESES]
    } else {
        Vec::new()
    };

    let hash = config_hash(s);
    let key = s.config.run_key();
    fs::create_dir_all(out)?;
    let dir = out.join(&hash);
    let staging = out.join(format!(".staging-{hash}-{}", std::process::id()));
    if staging.exists() {
        fs::remove_dir_all(&staging)?;
    }
    fs::create_dir_all(&staging)?;
    write_snapshots(&traj, &staging.join("snapshots.csv"))?;
    write_fronts(&traj, &staging.join("fronts.csv"))?;
    summary.save(&staging.join("summary.csv"))?;
    fs::write(staging.join("config.txt"), &key)?;
    if !tags.is_empty() {
        fs::write(staging.join("tags.txt"), format!("{}\n", tags.join("\n")))?;
    }
    if dir.exists() {
        let old = fs::read_to_string(dir.join("config.txt")).unwrap_or_default();
        if old != key {
            fs::remove_dir_all(&staging)?;
            return Err(CliError::Io(format!(
                "{} holds a different config with the same hash",
                dir.display()
            )));
        }
        fs::remove_dir_all(&dir)?;
    }
    fs::rename(&staging, &dir)?;
    Ok(SimulateOutcome { dir, summary, tags })
}

fn write_snapshots(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let f = fs::File::create(path)?;
    let mut w = writer(std::io::BufWriter::new(f));
    w.write_record(["t", "x", "u", "v"])?;
    for snap in &traj.snapshots {
        let t = num(snap.t);
        for i in 0..traj.grid.n {
            w.write_record([&t, &num(traj.grid.x(i)), &num(snap.u[i]), &num(snap.v[i])])?;
        }
    }
    w.flush()?;
    Ok(())
}

fn write_fronts(traj: &Trajectory, path: &Path) -> Result<(), CliError> {
    let mut t = Table::new(&["t", "x_left", "x_right"]);
    for s in &traj.trace.samples {
        t.rows.push(vec![num(s.t), num(s.x_left), num(s.x_right)]);
    }
    t.save(path)
}

fn command_header(cmd: SweepCommand) -> &'static [&'static str] {
    match cmd {
        SweepCommand::Speeds | SweepCommand::Classify => &SPEEDS_HEADER,
        SweepCommand::Kappa => &KAPPA_HEADER,
        SweepCommand::SigmaStar => &SIGMA_STAR_HEADER,
        SweepCommand::Simulate => &SUMMARY_HEADER,
    }
}

fn run_one(cmd: SweepCommand, s: &Scenario, out: &Path, unproven: bool) -> Result<Vec<String>, CliError> {
    let table = match cmd {
        SweepCommand::Speeds => speeds(s)?,
        SweepCommand::Classify => classify(s)?,
        SweepCommand::Kappa => kappa(s)?,
        SweepCommand::SigmaStar => sigma_star(s, unproven)?.0,
        SweepCommand::Simulate => simulate(s, out)?.summary,
    };
    Ok(table.rows.into_iter().next().expect("single row"))
}

/// Runs `sweep.command` once per value of `sweep.axis` on a pool of `jobs`
/// threads. Rows are sorted by value; a failed value leaves its columns
/// empty and fills `error`. Fails only if every value failed.
pub fn sweep(s: &Scenario, out: &Path, jobs: usize, unproven: bool) -> Result<Table, CliError> {
    let spec = &s.config.sweep;
    let axis = spec
        .axis
        .as_deref()
        .ok_or_else(|| CliError::Config("sweep needs sweep.axis".into()))?;
    let mut values = spec.values.clone();
    if values.is_empty() {
        return Err(CliError::Config("sweep needs sweep.values".into()));
    }
    values.sort_by(f64::total_cmp);
    values.dedup();
    let cols = command_header(spec.command);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs.max(1))
        .build()
        .map_err(|e| CliError::Io(e.to_string()))?;
    let results: Vec<Result<Vec<String>, CliError>> = pool.install(|| {
        values
            .par_iter()
            .map(|&v| {
                let sc = s.with_config(s.config.with_value(axis, v)?);
                run_one(spec.command, &sc, out, unproven)
            })
            .collect()
    });

    let mut header = vec!["value"];
    header.extend_from_slice(cols);
    header.push("error");
    let mut table = Table::new(&header);
    let mut first_err = None;
    let mut any_ok = false;
    for (v, r) in values.iter().zip(results) {
        let mut row = vec![num(*v)];
        match r {
            Ok(cells) => {
                any_ok = true;
                row.extend(cells);
                row.push(String::new());
            }
            Err(e) => {
                row.extend(cols.iter().map(|_| String::new()));
                row.push(e.to_string());
                first_err.get_or_insert(e);
            }
        }
        table.rows.push(row);
    }
    match (any_ok, first_err) {
        (false, Some(e)) => Err(e),
        _ => Ok(table),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Pass,
    Fail,
    Skip,
}

#[derive(Debug, Clone)]
pub struct Check {
    pub name: &'static str,
    pub status: Status,
    pub detail: String,
}

#[derive(Debug, Clone, Default)]
pub struct Report {
    pub checks: Vec<Check>,
    pub tags: Vec<&'static str>,
}

impl Report {
    fn push(&mut self, name: &'static str, ok: bool, detail: String) {
        let status = if ok { Status::Pass } else { Status::Fail };
        self.checks.push(Check { name, status, detail });
    }

    fn skip(&mut self, name: &'static str, detail: impl Into<String>) {
        self.checks.push(Check {
            name,
            status: Status::Skip,
            detail: detail.into(),
        });
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != Status::Fail)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            let status = match c.status {
                Status::Pass => "PASS",
                Status::Fail => "FAIL",
                Status::Skip => "SKIP",
            };
            out.push_str(&format!("{status} {:<20} {}\n", c.name, c.detail));
        }
        for t in &self.tags {
            out.push_str(&format!("TAG  {t}\n"));
        }
        out.push_str(if self.passed() { "validate: all checks passed\n" } else { "validate: FAILED\n" });
        out
    }
}

/// Runs the oracle suite on the configured scenario: convolution paths,
/// box invariance, upper-envelope domination, two comparison pairs, the
/// monotone property and (for a point-mass second kernel) the pointwise
/// ODE. Under `convolution = auto` the runs use direct summation, whose
/// round-off is mirror-symmetric.
pub fn validate(s: &Scenario) -> Result<Report, CliError> {
    let mut report = Report::default();
    let (mut cfg, _, _) = s.sim_config()?;
    if cfg.method == ConvolutionMethod::Auto {
        cfg.method = ConvolutionMethod::Direct;
    }
    let grid = cfg.grid;
    let (k1, k2) = s.kernels()?;
    let mut rng = StdRng::seed_from_u64(s.config.seed);

    let (d1, d2) = (DiscreteKernel::new(&k1, grid.dx)?, DiscreteKernel::new(&k2, grid.dx)?);
    let u: Vec<f64> = (0..grid.n).map(|_| rng.gen()).collect();
    let v: Vec<f64> = (0..grid.n).map(|_| rng.gen()).collect();
    let conv = |m| {
        let mut c = Convolver::new(grid.n, d1.clone(), d2.clone(), m);
        let (mut cu, mut cv) = (vec![0.0; grid.n], vec![0.0; grid.n]);
        c.apply(&u, &v, &mut cu, &mut cv);
        (cu, cv)
    };
    let (du, dv) = conv(ConvolutionMethod::Direct);
    let (su, sv) = conv(ConvolutionMethod::Spectral);
    let diff = du
        .iter()
        .zip(&su)
        .chain(dv.iter().zip(&sv))
        .fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    report.push(
        "direct-vs-spectral",
        diff < DIRECT_SPECTRAL_TOL,
        format!("max |diff| = {diff:.3e} (< {DIRECT_SPECTRAL_TOL:e})"),
    );

    let mut sim = build_simulator(s, &cfg, cfg.method)?;
    let main = sim.run(&cfg)?;
    if main.outside_theorem_hypotheses {
        report.tags.push(OUTSIDE_HYPOTHESES);
    }
    let worst = main
        .snapshots
        .iter()
        .flat_map(|st| st.u.iter().chain(&st.v))
        .fold(0.0f64, |m, &x| m.max(-x).max(x - 1.0))
        + 0.0;
    report.push(
        "box",
        worst <= BOX_TOLERANCE,
        format!("largest excursion outside [0, 1] = {worst:.3e}"),
    );

    let analysis = sim.analysis_system();
    let profile = locate_speeds(&analysis)?;
    let env = UpperEnvelope::minimal(&analysis, &profile, &grid, &main.snapshots[0])?;
    let excess = main
        .snapshots
        .iter()
        .fold(f64::NEG_INFINITY, |m, st| m.max(env.max_excess(&grid, st)));
    report.push(
        "upper-solution",
        excess <= ORDER_TOL,
        format!("Gamma = {:.4}, max excess = {excess:.3e} (<= {ORDER_TOL:e})", env.gamma),
    );

    let scaled = scale(&main.snapshots[0], |_| 0.5);
    let low = sim.run_with(&cfg, scaled)?;
    report.push(
        "comparison-scaled",
        check_comparison(&main, &low)?,
        "initial data vs half of it".into(),
    );

    let center = grid.center();
    let upper = FieldState {
        t: 0.0,
        u: (0..grid.n)
            .map(|i| if (grid.x(i) - center).abs() <= 5.0 { rng.gen() } else { 0.0 })
            .collect(),
        v: (0..grid.n)
            .map(|i| if (grid.x(i) - center).abs() <= 5.0 { rng.gen() } else { 0.0 })
            .collect(),
    };
    let lower = scale(&upper, |_| rng.gen());
    let a = sim.run_with(&cfg, upper)?;
    let b = sim.run_with(&cfg, lower)?;
    report.push(
        "comparison-random",
        check_comparison(&a, &b)?,
        format!("random ordered pair, seed {}", s.config.seed),
    );

    let centred = matches!(cfg.initial.center(), Some(c) if c == center);
    if !centred {
        report.skip("monotone", "initial data not centred on the domain");
    } else {
        let checks: Vec<MonotoneCheck> = main
            .snapshots
            .iter()
            .map(|st| check_monotone(&main.kernels.0, &main.kernels.1, st))
            .collect();
        if checks.contains(&MonotoneCheck::NotApplicable) {
            report.skip("monotone", "kernels not symmetric and nonincreasing away from 0");
        } else {
            let bad = checks.iter().filter(|c| **c == MonotoneCheck::Fails).count();
            report.push(
                "monotone",
                bad == 0,
                format!("{bad} of {} snapshots not symmetric-decreasing", checks.len()),
            );
        }
    }

    if main.kernels.1.is_identity() {
        let mut short = cfg.clone();
        short.horizon = (ODE_HORIZON.min(cfg.horizon) / cfg.dt).round() * cfg.dt;
        short.snapshot_stride = 1;
        let run = sim.run(&short)?;
        let params = s.params()?;
        let dev = degenerate_ode_deviation(&run, params.beta, &params.g, ODE_SUBSTEPS)?;
        report.push(
            "degenerate-ode",
            dev < ODE_TOL,
            format!("max |v - v_ode| = {dev:.3e} over t <= {} (< {ODE_TOL:e})", short.horizon),
        );
    } else {
        report.skip("degenerate-ode", "kernel.v is not dirac");
    }
    Ok(report)
}

fn scale(state: &FieldState, mut factor: impl FnMut(usize) -> f64) -> FieldState {
    let mut out = state.clone();
    for i in 0..out.u.len() {
        let f = factor(i);
        out.u[i] *= f;
        out.v[i] *= f;
    }
    out
}
