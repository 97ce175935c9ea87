//! Turns a parsed config into library objects.

use std::path::{Path, PathBuf};

use nonlocal_spread::dispersion::{locate_speeds, SpeedProfile};
use nonlocal_spread::dynamics::SimConfig;
use nonlocal_spread::{DispersionSystem, Grid, InitialData, Kernel, ModelParams, Nonlinearity, Tabulated};

use crate::config::{InitialSpec, KernelSpec, NonlinearityForm, NonlinearitySpec, ScenarioConfig, TailRate};
use crate::error::CliError;

/// Extra room beyond the fastest front, in length units.
const DOMAIN_MARGIN: f64 = 50.0;
const DOMAIN_FACTOR: f64 = 1.5;

#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Directory that relative table paths are resolved against.
    pub base_dir: PathBuf,
}

impl Scenario {
    pub fn new(config: ScenarioConfig, base_dir: impl Into<PathBuf>) -> Self {
        Self {
            config,
            base_dir: base_dir.into(),
        }
    }

    /// Reads `path`, applies `--set` overrides in order.
    pub fn load(path: &Path, overrides: &[String]) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        let mut raw = crate::config::RawConfig::parse(&text, &path.display().to_string())?;
        for (i, s) in overrides.iter().enumerate() {
            raw.set(s, i)?;
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self::new(raw.build()?, base))
    }

    pub fn with_config(&self, config: ScenarioConfig) -> Self {
        Self {
            config,
            base_dir: self.base_dir.clone(),
        }
    }

    pub fn kernel(&self, spec: &KernelSpec) -> Result<Kernel, CliError> {
        Ok(match spec {
            KernelSpec::Normal { mean, var } => Kernel::normal(*mean, *var)?,
            KernelSpec::Uniform { lower, upper } => Kernel::uniform(*lower, *upper)?,
            KernelSpec::Dirac => Kernel::Dirac,
            KernelSpec::Table(path) => Kernel::tabulated(read_table(&self.base_dir.join(path))?)?,
        })
    }

    pub fn kernels(&self) -> Result<(Kernel, Kernel), CliError> {
        Ok((self.kernel(&self.config.kernel_u)?, self.kernel(&self.config.kernel_v)?))
    }

    pub fn params(&self) -> Result<ModelParams, CliError> {
        let c = &self.config;
        let g = nonlinearity("g", c.g, c.beta)?;
        let h = nonlinearity("h", c.h, c.alpha)?;
        Ok(ModelParams::new(c.alpha, c.beta, g, h)?)
    }

    pub fn system(&self) -> Result<DispersionSystem, CliError> {
        let (k1, k2) = self.kernels()?;
        Ok(DispersionSystem::from_params(&self.params()?, k1, k2))
    }

    /// Decay rate of exponential-tail data, if any.
    pub fn tail_rate(&self, profile: &SpeedProfile) -> Option<f64> {
        match self.config.initial {
            InitialSpec::Tail { rate, .. } => Some(match rate {
                TailRate::Absolute(r) => r,
                TailRate::Fraction(f) => f * profile.lambda_r_star,
            }),
            InitialSpec::Bump { .. } => None,
        }
    }

    /// Speeds the two fronts are expected to approach: `(c_l*, c_r*)` for
    /// compact data; for exponential tails of rate `lambda`, `c(-lambda)` and
    /// `c(lambda)` on the sides where `lambda` is below the minimiser.
    pub fn reference_speeds(&self, sys: &DispersionSystem, profile: &SpeedProfile) -> Result<(f64, f64), CliError> {
        let (mut left, mut right) = (profile.c_l_star, profile.c_r_star);
        if let Some(rate) = self.tail_rate(profile) {
            if rate < -profile.lambda_l_star {
                left = sys.eval_c(-rate)?;
            }
            if rate < profile.lambda_r_star {
                right = sys.eval_c(rate)?;
            }
        }
        Ok((left, right))
    }

    pub fn grid(&self, sys: &DispersionSystem, profile: &SpeedProfile) -> Result<Grid, CliError> {
        let c = &self.config;
        let halfwidth = match c.halfwidth {
            Some(h) => h,
            None => {
                let (l, r) = self.reference_speeds(sys, profile)?;
                let fastest = [l, r, profile.c_l_star, profile.c_r_star]
                    .iter()
                    .fold(0.0f64, |m, v| m.max(v.abs()));
                DOMAIN_FACTOR * fastest * c.horizon + DOMAIN_MARGIN
            }
        };
        Ok(Grid::centered(halfwidth, c.dx)?)
    }

    pub fn initial(&self, profile: &SpeedProfile) -> InitialData {
        match self.config.initial {
            InitialSpec::Bump {
                center,
                halfwidth,
                height,
            } => InitialData::CompactBump {
                center,
                halfwidth,
                height,
            },
            InitialSpec::Tail {
                center,
                amplitude,
                plateau,
                ..
            } => InitialData::ExponentialTail {
                center,
                rate: self.tail_rate(profile).expect("tail data"),
                amplitude,
                plateau,
            },
        }
    }

    /// Run setup; the analytic speeds size the domain and set tail rates.
    pub fn sim_config(&self) -> Result<(SimConfig, DispersionSystem, SpeedProfile), CliError> {
        let sys = self.system()?;
        let profile = locate_speeds(&sys)?;
        let c = &self.config;
        let mut sim = SimConfig::new(self.grid(&sys, &profile)?, c.horizon, self.initial(&profile));
        sim.dt = c.dt;
        sim.snapshot_stride = c.snapshot_stride;
        sim.nu = c.nu;
        sim.fit_window = c.fit_window;
        sim.method = c.convolution;
        Ok((sim, sys, profile))
    }
}

fn nonlinearity(name: &str, spec: NonlinearitySpec, cap: f64) -> Result<Nonlinearity, CliError> {
    match spec.form {
        NonlinearityForm::Saturating => Ok(Nonlinearity::saturating(spec.slope0, cap)),
        NonlinearityForm::Linear => {
            if (spec.slope0 - cap).abs() > 1e-12 * cap {
                return Err(CliError::Config(format!(
                    "{name}.form = linear needs {name}.slope0 equal to its endpoint value {cap}, got {}",
                    spec.slope0
                )));
            }
            Ok(Nonlinearity::Linear { cap })
        }
    }
}

/// Reads a kernel table with header `x,density`.
pub fn read_table(path: &Path) -> Result<Tabulated, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| bad(e.to_string()))?;
    let header = rdr.headers().map_err(|e| bad(e.to_string()))?.clone();
    if header.iter().collect::<Vec<_>>() != ["x", "density"] {
        return Err(bad(format!("expected header 'x,density', got '{}'", header.iter().collect::<Vec<_>>().join(","))));
    }
    let (mut xs, mut ds) = (Vec::new(), Vec::new());
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let num = |j: usize| -> Result<f64, CliError> {
            rec.get(j)
                .and_then(|s| s.parse().ok())
                .ok_or_else(|| bad(format!("line {}: expected two numbers", i + 2)))
        };
        xs.push(num(0)?);
        ds.push(num(1)?);
    }
    Ok(Tabulated::from_samples(&xs, &ds)?)
}
