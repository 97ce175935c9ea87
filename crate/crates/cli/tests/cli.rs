use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use nlspread::config::{InitialSpec, KernelSpec, NonlinearityForm, NonlinearitySpec, SweepCommand, SweepSpec, TailRate};
use nlspread::ScenarioConfig;
use nonlocal_spread::dynamics::ConvolutionMethod;
use proptest::prelude::*;
use tempfile::TempDir;

const UNIFORM_52: &str = "\
# uniform first kernel, g'(0)h'(0) = 0.06
alpha = 0.2
beta = 0.2
g.slope0 = 0.2449489742783178
h.slope0 = 0.2449489742783178
kernel.u = uniform(lower=-1, upper=2)
kernel.v = uniform(lower=-0.4, upper=0.4)
";

const SYMMETRIC: &str = "\
alpha = 0.2
beta = 0.2
g.slope0 = 0.6
h.slope0 = 0.6
kernel.u = normal(mean=0, var=1)
kernel.v = normal(mean=0, var=1)
";

/// Tiny grid and short horizon for fast simulation runs.
const SMOKE: &str = "\
grid.halfwidth = 25
grid.dx = 0.2
time.horizon = 5
time.snapshot_stride = 10
front.fit_window = 0.5
";

fn nlspread(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_nlspread"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn scenario(text: &str) -> TempDir {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("s.cfg"), text).unwrap();
    dir
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

/// Header and single data row of a one-row CSV.
fn row(o: &Output) -> (Vec<String>, Vec<String>) {
    let text = stdout(o);
    let mut lines = text.lines();
    let split = |l: &str| l.split(',').map(String::from).collect::<Vec<_>>();
    (split(lines.next().unwrap()), split(lines.next().unwrap()))
}

fn field(o: &Output, name: &str) -> String {
    let (h, r) = row(o);
    r[h.iter().position(|x| x == name).unwrap()].clone()
}

#[test]
fn speeds_follow_mobility_regimes() {
    let d = scenario(UNIFORM_52);
    let o = nlspread(d.path(), &["speeds", "--config", "s.cfg"]);
    assert!(o.status.success());
    assert_eq!(row(&o).0, ["lambda_l", "lambda_r", "c_l", "c_r", "class"]);
    assert_eq!(field(&o, "class"), "RightOnly");
    let o = nlspread(
        d.path(),
        &["speeds", "--config", "s.cfg", "--set", "kernel.v=uniform(lower=-2, upper=2)"],
    );
    assert_eq!(field(&o, "class"), "Bidirectional");
}

#[test]
fn symmetric_speeds_are_opposite() {
    let d = scenario(SYMMETRIC);
    for cmd in ["speeds", "classify"] {
        let o = nlspread(d.path(), &[cmd, "--config", "s.cfg"]);
        assert!(o.status.success());
        let c_l: f64 = field(&o, "c_l").parse().unwrap();
        let c_r: f64 = field(&o, "c_r").parse().unwrap();
        assert!((c_l + c_r).abs() < 1e-9);
        assert_eq!(field(&o, "class"), "Bidirectional");
    }
}

#[test]
fn csv_uses_line_feeds_only() {
    let d = scenario(UNIFORM_52);
    let o = nlspread(d.path(), &["kappa", "--config", "s.cfg"]);
    let text = stdout(&o);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    assert_eq!(text.lines().count(), 2);
}

#[test]
fn sigma_star_sentinel_for_small_kappa() {
    let d = scenario(SYMMETRIC);
    let o = nlspread(d.path(), &["sigma-star", "--config", "s.cfg"]);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("kappa,sigma_star"));
    let data = lines.next().unwrap();
    assert!(data.ends_with(','), "{data}");
    assert!(data.trim_end_matches(',').parse::<f64>().unwrap() <= 1.0);
    assert!(String::from_utf8_lossy(&o.stderr).contains("<= 1"));
}

#[test]
fn exit_codes() {
    let d = scenario(UNIFORM_52);
    let code = |args: &[&str]| nlspread(d.path(), args).status.code();

    assert_eq!(code(&["speeds", "--config", "s.cfg", "--set", "alpha=abc"]), Some(2));
    assert_eq!(code(&["speeds", "--config", "missing.cfg"]), Some(2));
    assert_eq!(code(&["speeds", "--config", "s.cfg", "--set", "nonsense.key=1"]), Some(2));
    // g'(0)h'(0) below alpha beta violates the standing hypotheses
    assert_eq!(code(&["speeds", "--config", "s.cfg", "--set", "g.slope0=0.1"]), Some(2));
    // negative-mean first kernel has no asymmetry index in this orientation
    assert_eq!(
        code(&["kappa", "--config", "s.cfg", "--set", "kernel.u=normal(mean=-0.5, var=1)"]),
        Some(3)
    );
    let sim = ["simulate", "--config", "s.cfg", "--out", "o", "--set", "grid.halfwidth=15", "--set", "time.horizon=30"];
    assert_eq!(code(&sim), Some(4));
}

#[test]
fn config_errors_point_at_lines() {
    let d = scenario(&format!("{SYMMETRIC}\ngrid.dx = -1\n"));
    let o = nlspread(d.path(), &["speeds", "--config", "s.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert!(err.contains("s.cfg:8"), "{err}");
}

#[test]
fn general_kernel_sigma_star_needs_opt_in() {
    let d = scenario(&UNIFORM_52.replace("uniform(lower=-1, upper=2)", "table(k1.csv)"));
    let mut csv = String::from("x,density\n");
    for i in 0..=60 {
        let x = -1.0 + 0.05 * i as f64;
        let dens = (-(x - 0.5f64).powi(2) / 0.5).exp();
        csv.push_str(&format!("{x},{dens}\n"));
    }
    fs::write(d.path().join("k1.csv"), csv).unwrap();
    let o = nlspread(d.path(), &["sigma-star", "--config", "s.cfg"]);
    assert_eq!(o.status.code(), Some(2));
    let o = nlspread(d.path(), &["kappa", "--config", "s.cfg"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let o = nlspread(d.path(), &["sigma-star", "--config", "s.cfg", "--unproven"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(field(&o, "sigma_star").parse::<f64>().unwrap() > 0.0);
}

#[test]
fn table_kernel_matches_its_source() {
    let d = scenario(&SYMMETRIC.replace("kernel.u = normal(mean=0, var=1)", "kernel.u = table(k.csv)"));
    let mut csv = String::from("x,density\n");
    for i in -400..=400 {
        let x = i as f64 * 0.025;
        csv.push_str(&format!("{x},{}\n", (-x * x / 2.0).exp()));
    }
    fs::write(d.path().join("k.csv"), csv).unwrap();
    let a = nlspread(d.path(), &["speeds", "--config", "s.cfg"]);
    assert!(a.status.success(), "{}", String::from_utf8_lossy(&a.stderr));
    let b = nlspread(d.path(), &["speeds", "--config", "s.cfg", "--set", "kernel.u=normal(mean=0, var=1)"]);
    let c = |o: &Output| field(o, "c_r").parse::<f64>().unwrap();
    assert!((c(&a) - c(&b)).abs() < 1e-6, "{} vs {}", c(&a), c(&b));
}

#[test]
fn simulate_writes_three_files_deterministically() {
    let d = scenario(&format!("{SYMMETRIC}{SMOKE}"));
    let run = || {
        let o = nlspread(d.path(), &["simulate", "--config", "s.cfg", "--out", "out"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        o
    };
    let first = run();
    let dirs: Vec<_> = fs::read_dir(d.path().join("out")).unwrap().map(|e| e.unwrap().path()).collect();
    assert_eq!(dirs.len(), 1);
    let dir = &dirs[0];
    let name = dir.file_name().unwrap().to_str().unwrap();
    assert_eq!(name.len(), 16);
    assert!(name.chars().all(|c| c.is_ascii_hexdigit()));
    let headers = [
        ("snapshots.csv", "t,x,u,v"),
        ("fronts.csv", "t,x_left,x_right"),
        (
            "summary.csv",
            "c_left_fit,c_right_fit,r2_left,r2_right,c_l_star,c_r_star,rel_err_left,rel_err_right",
        ),
    ];
    let read = || headers.map(|(f, _)| fs::read(dir.join(f)).unwrap());
    let before = read();
    for ((_, h), bytes) in headers.iter().zip(&before) {
        assert!(String::from_utf8_lossy(bytes).starts_with(&format!("{h}\n")));
    }
    let second = run();
    assert_eq!(before, read());
    assert_eq!(first.stdout, second.stdout);

    // a different config lands in a different directory
    let o = nlspread(d.path(), &["simulate", "--config", "s.cfg", "--out", "out", "--set", "seed=7"]);
    assert!(o.status.success());
    assert_eq!(fs::read_dir(d.path().join("out")).unwrap().count(), 2);
}

#[test]
fn single_value_sweep_matches_command() {
    let d = scenario(UNIFORM_52);
    let single = nlspread(d.path(), &["speeds", "--config", "s.cfg", "--set", "alpha=0.18"]);
    let sweep = nlspread(
        d.path(),
        &["sweep", "--config", "s.cfg", "--set", "sweep.axis=alpha", "--set", "sweep.values=0.18"],
    );
    assert!(sweep.status.success());
    let (h, r) = row(&sweep);
    let (sh, sr) = row(&single);
    assert_eq!(h[1..h.len() - 1], sh[..]);
    assert_eq!(r[1..r.len() - 1], sr[..]);
    assert_eq!(r[0], "0.18");
    assert_eq!(r.last().unwrap(), "");
}

#[test]
fn sigma_sweep_crosses_critical_value() {
    let d = scenario(UNIFORM_52);
    let o = nlspread(d.path(), &["sigma-star", "--config", "s.cfg"]);
    let s: f64 = field(&o, "sigma_star").parse().unwrap();
    let values = format!("sweep.values={}, {}, {}", 2.0 * s, s, 0.5 * s);
    let o = nlspread(
        d.path(),
        &["sweep", "--config", "s.cfg", "--set", "sweep.axis=kernel.v.sigma", "--set", &values, "--jobs", "3"],
    );
    assert!(o.status.success());
    let text = stdout(&o);
    let classes: Vec<&str> = text.lines().skip(1).map(|l| l.split(',').nth(5).unwrap()).collect();
    assert_eq!(classes, ["RightOnly", "CriticalLeft", "Bidirectional"]);
}

#[test]
fn sweep_records_failures_per_value() {
    let d = scenario(UNIFORM_52);
    let args = ["sweep", "--config", "s.cfg", "--set", "sweep.axis=alpha", "--set", "sweep.values=0.2, -1", "--jobs", "2"];
    let o = nlspread(d.path(), &args);
    assert_eq!(o.status.code(), Some(0));
    let text = stdout(&o);
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].ends_with(",error"));
    assert!(lines[1].starts_with("-1,,,,,,"));
    assert!(lines[2].ends_with(','));
    let o = nlspread(d.path(), &["sweep", "--config", "s.cfg", "--set", "sweep.axis=alpha", "--set", "sweep.values=-1"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn tail_rate_sweep_gives_decreasing_speeds() {
    let text = format!(
        "{SYMMETRIC}initial.kind = tail\ngrid.dx = 0.2\ntime.horizon = 60\nsweep.command = simulate\n\
         sweep.axis = initial.rate_fraction\nsweep.values = 0.3, 0.5, 0.8\n"
    );
    let d = scenario(&text);
    let o = nlspread(d.path(), &["sweep", "--config", "s.cfg", "--out", "out", "--jobs", "3"]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let out = stdout(&o);
    let speeds: Vec<f64> = out
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(2).unwrap().parse().unwrap())
        .collect();
    assert_eq!(speeds.len(), 3);
    assert!(speeds[0] > speeds[1] && speeds[1] > speeds[2], "{speeds:?}");
    assert_eq!(fs::read_dir(d.path().join("out")).unwrap().count(), 3);
}

#[test]
fn validate_reports_each_oracle() {
    let d = scenario(&format!("{SYMMETRIC}grid.dx = 0.2\ntime.horizon = 20\n"));
    let o = nlspread(d.path(), &["validate", "--config", "s.cfg"]);
    let report = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{report}");
    for name in ["direct-vs-spectral", "box", "upper-solution", "comparison-scaled", "comparison-random", "monotone"] {
        assert!(report.lines().any(|l| l.starts_with("PASS") && l.contains(name)), "{report}");
    }
    assert!(report.contains("SKIP degenerate-ode"));

    let d = scenario(&format!(
        "{SYMMETRIC}grid.dx = 0.2\ntime.horizon = 10\nkernel.v = dirac\n"
    ).replacen("kernel.v = normal(mean=0, var=1)\n", "", 1));
    let o = nlspread(d.path(), &["validate", "--config", "s.cfg"]);
    let report = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{report}");
    assert!(report.contains("PASS degenerate-ode"), "{report}");
}

#[test]
fn validate_tags_runs_outside_hypotheses() {
    let d = scenario(&format!(
        "{UNIFORM_52}initial.kind = tail\ninitial.rate = 0.4\ngrid.dx = 0.2\ngrid.halfwidth = 60\ntime.horizon = 10\n"
    ));
    let o = nlspread(d.path(), &["validate", "--config", "s.cfg"]);
    let report = stdout(&o);
    assert!(report.contains("TAG  outside-theorem-hypotheses"), "{report}");
    assert!(report.contains("SKIP monotone"), "{report}");
}

fn kernel_spec() -> impl Strategy<Value = KernelSpec> {
    prop_oneof![
        (-2.0..2.0f64, 0.1..4.0f64).prop_map(|(mean, var)| KernelSpec::Normal { mean, var }),
        (-3.0..-0.1f64, 0.1..3.0f64).prop_map(|(lower, upper)| KernelSpec::Uniform { lower, upper }),
        Just(KernelSpec::Dirac),
        "[a-z]{1,8}\\.csv".prop_map(KernelSpec::Table),
    ]
}

fn initial_spec() -> impl Strategy<Value = InitialSpec> {
    prop_oneof![
        (-5.0..5.0f64, 0.1..5.0f64, 0.01..1.0f64).prop_map(|(center, halfwidth, height)| InitialSpec::Bump {
            center,
            halfwidth,
            height
        }),
        (-5.0..5.0f64, any::<bool>(), 0.01..2.0f64, 0.01..1.0f64, 0.0..3.0f64).prop_map(
            |(center, absolute, r, amplitude, plateau)| InitialSpec::Tail {
                center,
                rate: if absolute { TailRate::Absolute(r) } else { TailRate::Fraction(r) },
                amplitude,
                plateau,
            }
        ),
    ]
}

fn form() -> impl Strategy<Value = NonlinearityForm> {
    prop_oneof![Just(NonlinearityForm::Saturating), Just(NonlinearityForm::Linear)]
}

fn scenario_config() -> impl Strategy<Value = ScenarioConfig> {
    (
        (0.01..1.0f64, 0.01..1.0f64, form(), 0.01..2.0f64, form(), 0.01..2.0f64),
        (kernel_spec(), kernel_spec(), 0.01..1.0f64, proptest::option::of(1.0..500.0f64)),
        (0.001..0.1f64, 1.0..300.0f64, 1..100usize, initial_spec()),
        (0.01..0.99f64, 0.05..1.0f64, 0..3usize, any::<u64>()),
        (
            0..5usize,
            proptest::option::of(Just("kernel.v.sigma".to_string())),
            proptest::collection::vec(-10.0..10.0f64, 0..4),
        ),
    )
        .prop_map(|(m, k, t, f, s)| ScenarioConfig {
            alpha: m.0,
            beta: m.1,
            g: NonlinearitySpec { form: m.2, slope0: m.3 },
            h: NonlinearitySpec { form: m.4, slope0: m.5 },
            kernel_u: k.0,
            kernel_v: k.1,
            dx: k.2,
            halfwidth: k.3,
            dt: t.0,
            horizon: t.1,
            snapshot_stride: t.2,
            initial: t.3,
            nu: f.0,
            fit_window: f.1,
            convolution: [ConvolutionMethod::Auto, ConvolutionMethod::Direct, ConvolutionMethod::Spectral][f.2],
            seed: f.3,
            sweep: SweepSpec {
                command: [
                    SweepCommand::Speeds,
                    SweepCommand::Classify,
                    SweepCommand::Kappa,
                    SweepCommand::SigmaStar,
                    SweepCommand::Simulate,
                ][s.0],
                axis: s.1,
                values: s.2,
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn serialized_config_parses_back_identically(c in scenario_config()) {
        let text = c.serialize();
        let back = ScenarioConfig::parse(&text, "serialized").unwrap();
        prop_assert_eq!(&back, &c);
        prop_assert_eq!(back.serialize(), text);
    }
}
