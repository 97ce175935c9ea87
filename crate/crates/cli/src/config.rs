//! Scenario files: flat `key = value` lines with dotted keys.
//!
//! ```text
//! # asymmetric first kernel, g'(0)h'(0) = 0.06
//! alpha = 0.2
//! beta = 0.2
//! g.slope0 = 0.2449489742783178
//! h.slope0 = 0.2449489742783178
//! kernel.u = uniform(lower=-1, upper=2)
//! kernel.v = uniform(lower=-0.4, upper=0.4)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Every key except
//! `alpha`, `beta`, `g.slope0`, `h.slope0`, `kernel.u` and `kernel.v` has a
//! default; [`ScenarioConfig::serialize`] writes all of them out.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use nonlocal_spread::dynamics::ConvolutionMethod;

use crate::error::CliError;

/// Where a value came from, for diagnostics.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Loc {
    pub source: String,
    pub line: usize,
}

impl fmt::Display for Loc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.source, self.line)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec {
    Normal { mean: f64, var: f64 },
    Uniform { lower: f64, upper: f64 },
    Dirac,
    /// CSV file with columns `x,density`; relative paths are resolved
    /// against the directory of the config file.
    Table(String),
}

impl fmt::Display for KernelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::Normal { mean, var } => write!(f, "normal(mean={mean}, var={var})"),
            KernelSpec::Uniform { lower, upper } => write!(f, "uniform(lower={lower}, upper={upper})"),
            KernelSpec::Dirac => write!(f, "dirac"),
            KernelSpec::Table(path) => write!(f, "table({path})"),
        }
    }
}

impl FromStr for KernelSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "dirac" {
            return Ok(KernelSpec::Dirac);
        }
        let (name, body) = s
            .strip_suffix(')')
            .and_then(|s| s.split_once('('))
            .ok_or_else(|| format!("expected normal(..), uniform(..), dirac or table(..), got '{s}'"))?;
        let name = name.trim();
        if name == "table" {
            let path = body.trim();
            if path.is_empty() {
                return Err("table() needs a CSV path".into());
            }
            return Ok(KernelSpec::Table(path.to_string()));
        }
        let mut args = BTreeMap::new();
        for part in body.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (k, v) = part
                .split_once('=')
                .ok_or_else(|| format!("kernel argument '{part}' is not name=value"))?;
            let v: f64 = parse_num(v.trim())?;
            if args.insert(k.trim().to_string(), v).is_some() {
                return Err(format!("kernel argument '{}' given twice", k.trim()));
            }
        }
        let mut take = |key: &str| {
            args.remove(key)
                .ok_or_else(|| format!("{name}(..) needs '{key}'"))
        };
        let spec = match name {
            "normal" => KernelSpec::Normal {
                mean: take("mean")?,
                var: take("var")?,
            },
            "uniform" => KernelSpec::Uniform {
                lower: take("lower")?,
                upper: take("upper")?,
            },
            _ => return Err(format!("unknown kernel '{name}'")),
        };
        if let Some(extra) = args.keys().next() {
            return Err(format!("{name}(..) does not take '{extra}'"));
        }
        Ok(spec)
    }
}

impl KernelSpec {
    /// Replaces one named parameter. `sigma` addresses the family parameter
    /// of a centred kernel: the variance of `normal(mean=0, ..)`, the
    /// half-width of a symmetric `uniform`.
    pub fn with_param(&self, name: &str, value: f64) -> Result<Self, String> {
        let mut k = self.clone();
        match (&mut k, name) {
            (KernelSpec::Normal { mean, .. }, "mean") => *mean = value,
            (KernelSpec::Normal { var, .. }, "var") => *var = value,
            (KernelSpec::Normal { mean, var }, "sigma") if *mean == 0.0 => *var = value,
            (KernelSpec::Uniform { lower, .. }, "lower") => *lower = value,
            (KernelSpec::Uniform { upper, .. }, "upper") => *upper = value,
            (KernelSpec::Uniform { lower, upper }, "sigma") if *lower == -*upper => {
                *lower = -value;
                *upper = value;
            }
            _ => return Err(format!("kernel {self} has no parameter '{name}'")),
        }
        Ok(k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NonlinearityForm {
    Saturating,
    Linear,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NonlinearitySpec {
    pub form: NonlinearityForm,
    pub slope0: f64,
}

/// Decay rate of exponential-tail data: absolute, or as a fraction of the
/// minimising `lambda_r*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TailRate {
    Absolute(f64),
    Fraction(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum InitialSpec {
    Bump {
        center: f64,
        halfwidth: f64,
        height: f64,
    },
    Tail {
        center: f64,
        rate: TailRate,
        amplitude: f64,
        plateau: f64,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepCommand {
    Speeds,
    Classify,
    Kappa,
    SigmaStar,
    Simulate,
}

impl SweepCommand {
    pub fn as_str(self) -> &'static str {
        match self {
            SweepCommand::Speeds => "speeds",
            SweepCommand::Classify => "classify",
            SweepCommand::Kappa => "kappa",
            SweepCommand::SigmaStar => "sigma-star",
            SweepCommand::Simulate => "simulate",
        }
    }
}

impl FromStr for SweepCommand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "speeds" => SweepCommand::Speeds,
            "classify" => SweepCommand::Classify,
            "kappa" => SweepCommand::Kappa,
            "sigma-star" => SweepCommand::SigmaStar,
            "simulate" => SweepCommand::Simulate,
            _ => return Err(format!("unknown sweep command '{s}'")),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub command: SweepCommand,
    pub axis: Option<String>,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub alpha: f64,
    pub beta: f64,
    pub g: NonlinearitySpec,
    pub h: NonlinearitySpec,
    pub kernel_u: KernelSpec,
    pub kernel_v: KernelSpec,
    pub dx: f64,
    /// `None`: `1.5 max(|c_l*|, |c_r*|) horizon + 50`.
    pub halfwidth: Option<f64>,
    pub dt: f64,
    pub horizon: f64,
    pub snapshot_stride: usize,
    pub initial: InitialSpec,
    pub nu: f64,
    pub fit_window: f64,
    pub convolution: ConvolutionMethod,
    pub seed: u64,
    pub sweep: SweepSpec,
}

const REQUIRED: [&str; 6] = ["alpha", "beta", "g.slope0", "h.slope0", "kernel.u", "kernel.v"];

/// Keys whose values are plain numbers and may be swept.
pub const NUMERIC_KEYS: [&str; 21] = [
    "alpha",
    "beta",
    "g.slope0",
    "h.slope0",
    "grid.dx",
    "grid.halfwidth",
    "time.dt",
    "time.horizon",
    "time.snapshot_stride",
    "initial.center",
    "initial.halfwidth",
    "initial.height",
    "initial.rate",
    "initial.rate_fraction",
    "initial.amplitude",
    "initial.plateau",
    "front.nu",
    "front.fit_window",
    "seed",
    "kernel.u.sigma",
    "kernel.v.sigma",
];

const KNOWN: [&str; 28] = [
    "alpha",
    "beta",
    "g.form",
    "g.slope0",
    "h.form",
    "h.slope0",
    "kernel.u",
    "kernel.v",
    "grid.dx",
    "grid.halfwidth",
    "time.dt",
    "time.horizon",
    "time.snapshot_stride",
    "initial.kind",
    "initial.center",
    "initial.halfwidth",
    "initial.height",
    "initial.rate",
    "initial.rate_fraction",
    "initial.amplitude",
    "initial.plateau",
    "front.nu",
    "front.fit_window",
    "convolution",
    "seed",
    "sweep.command",
    "sweep.axis",
    "sweep.values",
];

fn parse_num(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("'{s}' is not a number"))?;
    if !v.is_finite() {
        return Err(format!("'{s}' is not finite"));
    }
    Ok(v)
}

/// Raw `key -> (value, location)` map, before interpretation.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, Loc)>,
}

impl RawConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        let mut raw = RawConfig::default();
        for (i, line) in text.lines().enumerate() {
            let loc = Loc {
                source: source.to_string(),
                line: i + 1,
            };
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| CliError::config(&loc, format!("expected 'key = value', got '{line}'")))?;
            let key = key.trim();
            if key.is_empty() {
                return Err(CliError::config(&loc, "empty key"));
            }
            if let Some((_, first)) = raw.entries.get(key) {
                return Err(CliError::config(&loc, format!("'{key}' already set at {first}")));
            }
            raw.entries.insert(key.to_string(), (value.trim().to_string(), loc));
        }
        Ok(raw)
    }

    /// Applies a `key=value` override; later overrides win.
    pub fn set(&mut self, assignment: &str, index: usize) -> Result<(), CliError> {
        let loc = Loc {
            source: "--set".into(),
            line: index + 1,
        };
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| CliError::config(&loc, format!("expected key=value, got '{assignment}'")))?;
        self.insert(key.trim(), value.trim(), loc);
        Ok(())
    }

    pub fn insert(&mut self, key: &str, value: &str, loc: Loc) {
        self.entries.insert(key.to_string(), (value.to_string(), loc));
    }

    fn remove(&mut self, key: &str) {
        self.entries.remove(key);
    }

    pub fn build(&self) -> Result<ScenarioConfig, CliError> {
        Builder { raw: self }.build()
    }
}

struct Builder<'a> {
    raw: &'a RawConfig,
}

impl Builder<'_> {
    fn get(&self, key: &str) -> Option<&(String, Loc)> {
        self.raw.entries.get(key)
    }

    fn missing(&self, key: &str) -> CliError {
        CliError::Config(format!("missing required key '{key}'"))
    }

    fn parsed<V: FromStr>(&self, key: &str, default: Option<V>) -> Result<V, CliError>
    where
        V::Err: fmt::Display,
    {
        match self.get(key) {
            Some((s, loc)) => s
                .parse()
                .map_err(|e| CliError::config(loc, format!("{key}: {e}"))),
            None => default.ok_or_else(|| self.missing(key)),
        }
    }

    fn num(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        match self.get(key) {
            Some((s, loc)) => parse_num(s).map_err(|e| CliError::config(loc, format!("{key}: {e}"))),
            None => default.ok_or_else(|| self.missing(key)),
        }
    }

    fn positive(&self, key: &str, default: Option<f64>) -> Result<f64, CliError> {
        let v = self.num(key, default)?;
        if !(v > 0.0) {
            return Err(self.at(key, format!("{key} must be positive, got {v}")));
        }
        Ok(v)
    }

    fn at(&self, key: &str, msg: String) -> CliError {
        match self.get(key) {
            Some((_, loc)) => CliError::config(loc, msg),
            None => CliError::Config(msg),
        }
    }

    fn reject(&self, keys: &[&str], why: &str) -> Result<(), CliError> {
        for k in keys {
            if self.get(k).is_some() {
                return Err(self.at(k, format!("'{k}' {why}")));
            }
        }
        Ok(())
    }

    fn nonlinearity(&self, name: &str) -> Result<NonlinearitySpec, CliError> {
        let form_key = format!("{name}.form");
        let form = match self.get(&form_key) {
            None => NonlinearityForm::Saturating,
            Some((s, loc)) => match s.as_str() {
                "saturating" => NonlinearityForm::Saturating,
                "linear" => NonlinearityForm::Linear,
                _ => {
                    return Err(CliError::config(
                        loc,
                        format!("{form_key}: expected saturating or linear, got '{s}'"),
                    ))
                }
            },
        };
        Ok(NonlinearitySpec {
            form,
            slope0: self.positive(&format!("{name}.slope0"), None)?,
        })
    }

    fn initial(&self) -> Result<InitialSpec, CliError> {
        let kind = self.get("initial.kind").map(|(s, l)| (s.as_str(), l));
        let center = self.num("initial.center", Some(0.0))?;
        match kind {
            None | Some(("bump", _)) => {
                self.reject(
                    &["initial.rate", "initial.rate_fraction", "initial.amplitude", "initial.plateau"],
                    "only applies to initial.kind = tail",
                )?;
                Ok(InitialSpec::Bump {
                    center,
                    halfwidth: self.positive("initial.halfwidth", Some(2.0))?,
                    height: self.positive("initial.height", Some(0.5))?,
                })
            }
            Some(("tail", _)) => {
                self.reject(&["initial.halfwidth", "initial.height"], "only applies to initial.kind = bump")?;
                let rate = match (self.get("initial.rate"), self.get("initial.rate_fraction")) {
                    (Some(_), Some((_, loc))) => {
                        return Err(CliError::config(
                            loc,
                            "give either initial.rate or initial.rate_fraction, not both",
                        ))
                    }
                    (Some(_), None) => TailRate::Absolute(self.positive("initial.rate", None)?),
                    _ => TailRate::Fraction(self.positive("initial.rate_fraction", Some(0.5))?),
                };
                Ok(InitialSpec::Tail {
                    center,
                    rate,
                    amplitude: self.positive("initial.amplitude", Some(0.5))?,
                    plateau: self.num("initial.plateau", Some(2.0))?,
                })
            }
            Some((other, loc)) => Err(CliError::config(
                loc,
                format!("initial.kind: expected bump or tail, got '{other}'"),
            )),
        }
    }

    fn sweep(&self) -> Result<SweepSpec, CliError> {
        let command = self.parsed("sweep.command", Some(SweepCommand::Speeds))?;
        let axis = match self.get("sweep.axis") {
            None => None,
            Some((s, loc)) => {
                if !NUMERIC_KEYS.contains(&s.as_str()) && !is_kernel_param(s) {
                    return Err(CliError::config(loc, format!("sweep.axis: '{s}' cannot be swept")));
                }
                Some(s.clone())
            }
        };
        let values = match self.get("sweep.values") {
            None => Vec::new(),
            Some((s, loc)) => s
                .split(',')
                .map(|v| parse_num(v.trim()))
                .collect::<Result<_, _>>()
                .map_err(|e| CliError::config(loc, format!("sweep.values: {e}")))?,
        };
        Ok(SweepSpec { command, axis, values })
    }

    fn build(&self) -> Result<ScenarioConfig, CliError> {
        for (key, (_, loc)) in &self.raw.entries {
            if !KNOWN.contains(&key.as_str()) {
                return Err(CliError::config(loc, format!("unknown key '{key}'")));
            }
        }
        for key in REQUIRED {
            if self.get(key).is_none() {
                return Err(self.missing(key));
            }
        }
        let halfwidth = match self.get("grid.halfwidth") {
            Some((s, _)) if s == "auto" => None,
            Some(_) => Some(self.positive("grid.halfwidth", None)?),
            None => None,
        };
        let convolution = match self.get("convolution") {
            None => ConvolutionMethod::Auto,
            Some((s, loc)) => match s.as_str() {
                "auto" => ConvolutionMethod::Auto,
                "direct" => ConvolutionMethod::Direct,
                "spectral" => ConvolutionMethod::Spectral,
                _ => {
                    return Err(CliError::config(
                        loc,
                        format!("convolution: expected auto, direct or spectral, got '{s}'"),
                    ))
                }
            },
        };
        let snapshot_stride: usize = self.parsed("time.snapshot_stride", Some(20))?;
        if snapshot_stride == 0 {
            return Err(self.at("time.snapshot_stride", "time.snapshot_stride must be at least 1".into()));
        }
        let nu = self.num("front.nu", Some(0.1))?;
        if !(nu > 0.0 && nu < 1.0) {
            return Err(self.at("front.nu", format!("front.nu must lie in (0, 1), got {nu}")));
        }
        let fit_window = self.num("front.fit_window", Some(0.5))?;
        if !(fit_window > 0.0 && fit_window <= 1.0) {
            return Err(self.at(
                "front.fit_window",
                format!("front.fit_window must lie in (0, 1], got {fit_window}"),
            ));
        }
        Ok(ScenarioConfig {
            alpha: self.positive("alpha", None)?,
            beta: self.positive("beta", None)?,
            g: self.nonlinearity("g")?,
            h: self.nonlinearity("h")?,
            kernel_u: self.parsed("kernel.u", None)?,
            kernel_v: self.parsed("kernel.v", None)?,
            dx: self.positive("grid.dx", Some(0.1))?,
            halfwidth,
            dt: self.positive("time.dt", Some(0.05))?,
            horizon: self.positive("time.horizon", Some(200.0))?,
            snapshot_stride,
            initial: self.initial()?,
            nu,
            fit_window,
            convolution,
            seed: self.parsed("seed", Some(0))?,
            sweep: self.sweep()?,
        })
    }
}

fn is_kernel_param(key: &str) -> bool {
    let mut parts = key.split('.');
    matches!(
        (parts.next(), parts.next(), parts.next(), parts.next()),
        (Some("kernel"), Some("u" | "v"), Some("mean" | "var" | "lower" | "upper" | "sigma"), None)
    )
}

fn form_name(f: NonlinearityForm) -> &'static str {
    match f {
        NonlinearityForm::Saturating => "saturating",
        NonlinearityForm::Linear => "linear",
    }
}

impl ScenarioConfig {
    pub fn parse(text: &str, source: &str) -> Result<Self, CliError> {
        RawConfig::parse(text, source)?.build()
    }

    /// Canonical text form with every key written out.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        let mut put = |k: &str, v: String| {
            out.push_str(k);
            out.push_str(" = ");
            out.push_str(&v);
            out.push('\n');
        };
        put("alpha", self.alpha.to_string());
        put("beta", self.beta.to_string());
        put("g.form", form_name(self.g.form).into());
        put("g.slope0", self.g.slope0.to_string());
        put("h.form", form_name(self.h.form).into());
        put("h.slope0", self.h.slope0.to_string());
        put("kernel.u", self.kernel_u.to_string());
        put("kernel.v", self.kernel_v.to_string());
        put("grid.dx", self.dx.to_string());
        put(
            "grid.halfwidth",
            self.halfwidth.map_or_else(|| "auto".into(), |h| h.to_string()),
        );
        put("time.dt", self.dt.to_string());
        put("time.horizon", self.horizon.to_string());
        put("time.snapshot_stride", self.snapshot_stride.to_string());
        match self.initial {
            InitialSpec::Bump {
                center,
                halfwidth,
                height,
            } => {
                put("initial.kind", "bump".into());
                put("initial.center", center.to_string());
                put("initial.halfwidth", halfwidth.to_string());
                put("initial.height", height.to_string());
            }
            InitialSpec::Tail {
                center,
                rate,
                amplitude,
                plateau,
            } => {
                put("initial.kind", "tail".into());
                put("initial.center", center.to_string());
                match rate {
                    TailRate::Absolute(r) => put("initial.rate", r.to_string()),
                    TailRate::Fraction(f) => put("initial.rate_fraction", f.to_string()),
                }
                put("initial.amplitude", amplitude.to_string());
                put("initial.plateau", plateau.to_string());
            }
        }
        put("front.nu", self.nu.to_string());
        put("front.fit_window", self.fit_window.to_string());
        put(
            "convolution",
            match self.convolution {
                ConvolutionMethod::Auto => "auto",
                ConvolutionMethod::Direct => "direct",
                ConvolutionMethod::Spectral => "spectral",
            }
            .into(),
        );
        put("seed", self.seed.to_string());
        put("sweep.command", self.sweep.command.as_str().into());
        if let Some(axis) = &self.sweep.axis {
            put("sweep.axis", axis.clone());
        }
        if !self.sweep.values.is_empty() {
            let vals: Vec<String> = self.sweep.values.iter().map(f64::to_string).collect();
            put("sweep.values", vals.join(", "));
        }
        out
    }

    /// Serialized form without the sweep keys: everything that determines
    /// the result of a single command.
    pub fn run_key(&self) -> String {
        self.serialize()
            .lines()
            .filter(|l| !l.starts_with("sweep."))
            .map(|l| format!("{l}\n"))
            .collect()
    }

    /// Copy with one numeric key replaced, revalidated as a whole.
    pub fn with_value(&self, key: &str, value: f64) -> Result<Self, CliError> {
        let mut raw = RawConfig::parse(&self.serialize(), "serialized")?;
        let loc = Loc {
            source: format!("sweep {key}={value}"),
            line: 1,
        };
        let kernel_param = |which: &str, name: &str, raw: &mut RawConfig| -> Result<(), CliError> {
            let spec = if which == "u" { &self.kernel_u } else { &self.kernel_v };
            let spec = spec.with_param(name, value).map_err(|e| CliError::config(&loc, e))?;
            raw.insert(&format!("kernel.{which}"), &spec.to_string(), loc.clone());
            Ok(())
        };
        if let Some(rest) = key.strip_prefix("kernel.") {
            let (which, name) = rest
                .split_once('.')
                .ok_or_else(|| CliError::config(&loc, format!("'{key}' is not a kernel parameter")))?;
            kernel_param(which, name, &mut raw)?;
        } else {
            // the two tail-rate keys are exclusive; setting one drops the other
            match key {
                "initial.rate" => raw.remove("initial.rate_fraction"),
                "initial.rate_fraction" => raw.remove("initial.rate"),
                _ => {}
            }
            let text = if key == "time.snapshot_stride" || key == "seed" {
                if value.fract() != 0.0 || value < 0.0 {
                    return Err(CliError::config(&loc, format!("{key} must be a nonnegative integer")));
                }
                format!("{}", value as u64)
            } else {
                value.to_string()
            };
            raw.insert(key, &text, loc);
        }
        raw.build()
    }
}
