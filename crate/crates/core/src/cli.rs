//! Declarative experiment runner: scenario configs in, CSV artifacts and a
//! JSON report of predicted vs measured claims out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::acceptance::{correlated_ricci_closed_form, Claim};
use crate::dynamics::{
    closed_form_family_variation, closed_form_geodesic, closed_form_initial_state, integrate_geodesic,
    integrate_jlc, lyapunov_estimate, uniform_grid, ClosedFormGeodesicParams, FlowOptions, GeodesicState,
};
use crate::error::{Error, Result};
use crate::geometry::{self, Backend, FiniteDiff};
use crate::iho;
use crate::ige::{self, LINEAR_SPECTRUM_CUTOFF};
use crate::models::StatisticalModel;

/// Version of the report layout.
pub const SCHEMA_VERSION: u32 = 1;

/// Environment variable capping sweep parallelism.
pub const THREADS_ENV: &str = "IGDYN_THREADS";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize, Serialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Kind {
    Curvature,
    Geodesic,
    Jlc,
    Ige,
    IhoEntropy,
    AppendixSweep,
}

/// One scenario file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub name: Option<String>,
    pub kind: Kind,
    pub model: Option<String>,
    pub n_particles: Option<usize>,
    pub r: Option<f64>,
    pub frequencies: Option<Vec<f64>>,
    pub lambda: Option<f64>,
    #[serde(rename = "Lambda")]
    pub big_lambda: Option<f64>,
    pub offset: Option<f64>,
    pub tau_max: Option<f64>,
    pub window: Option<[f64; 2]>,
    /// Samples per unit `τ`.
    pub grid_density: Option<f64>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
    pub points: Option<Vec<Vec<f64>>>,
    pub amplitudes: Option<Vec<f64>>,
    pub n: Option<usize>,
    pub spectrum: Option<String>,
    pub tolerance: Option<f64>,
    pub backend: Option<String>,
    pub theta0: Option<Vec<f64>>,
    pub velocity0: Option<Vec<f64>>,
}

fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let before = &text[..offset.min(text.len())];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(before.len(), |i| before.len() - i - 1) + 1;
    (line, column)
}

/// Position of `key = …` in the source, or the start of the file.
fn key_position(text: &str, key: &str) -> (usize, usize) {
    let mut offset = 0;
    for line in text.split_inclusive('\n') {
        let trimmed = line.trim_start();
        if let Some(rest) = trimmed.strip_prefix(key) {
            if rest.trim_start().starts_with('=') {
                return line_col(text, offset + line.len() - trimmed.len());
            }
        }
        offset += line.len();
    }
    (1, 1)
}

fn config_error(text: &str, key: &str, message: impl Into<String>) -> Error {
    let (line, column) = key_position(text, key);
    Error::ConfigParse {
        line,
        column,
        message: message.into(),
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario.
    pub fn parse(text: &str) -> Result<Self> {
        if text.trim().is_empty() {
            return Err(Error::ConfigParse {
                line: 1,
                column: 1,
                message: "empty config".into(),
            });
        }
        let cfg: ScenarioConfig = toml::from_str(text).map_err(|e| {
            let (line, column) = e.span().map_or((1, 1), |s| line_col(text, s.start));
            Error::ConfigParse {
                line,
                column,
                message: e.message().to_string(),
            }
        })?;
        cfg.validate(text)?;
        Ok(cfg)
    }

    pub fn name(&self) -> String {
        self.name.clone().unwrap_or_else(|| "scenario".into())
    }

    fn require<T: Copy>(&self, text: &str, key: &str, v: Option<T>) -> Result<T> {
        v.ok_or_else(|| config_error(text, "kind", format!("`{key}` is required for this kind")))
    }

    fn validate(&self, text: &str) -> Result<()> {
        if let Some(name) = &self.name {
            if name.is_empty() || !name.chars().all(|c| c.is_ascii_alphanumeric() || "_-.".contains(c)) {
                return Err(config_error(text, "name", "name may only hold letters, digits, `_`, `-` and `.`"));
            }
        }
        if let Some(model) = &self.model {
            if !["gaussian_product", "correlated_gaussian", "iho"].contains(&model.as_str()) {
                return Err(config_error(text, "model", format!("unknown model `{model}`")));
            }
        }
        let model = self.model.as_deref();
        match model {
            Some("gaussian_product") => {
                if self.require(text, "n_particles", self.n_particles)? == 0 {
                    return Err(config_error(text, "n_particles", "`n_particles` must be at least 1"));
                }
            }
            Some("correlated_gaussian") => {
                self.require(text, "r", self.r)?;
            }
            Some("iho") if self.frequencies.is_none() => {
                return Err(config_error(text, "model", "`frequencies` is required for this model"));
            }
            _ => {}
        }
        match self.kind {
            Kind::Curvature => {
                if model.is_none() {
                    return Err(config_error(text, "kind", "`model` is required for this kind"));
                }
            }
            Kind::Geodesic => {
                if self.theta0.is_none() != self.velocity0.is_none() {
                    return Err(config_error(text, "theta0", "`theta0` and `velocity0` go together"));
                }
                if self.theta0.is_none() {
                    self.expect_model(text, "gaussian_product")?;
                    self.require(text, "lambda", self.lambda)?;
                } else if model.is_none() {
                    return Err(config_error(text, "kind", "`model` is required for this kind"));
                }
                self.require(text, "tau_max", self.tau_max)?;
            }
            Kind::Jlc | Kind::Ige => {
                self.expect_model(text, "gaussian_product")?;
                self.require(text, "lambda", self.lambda)?;
                self.require(text, "tau_max", self.tau_max)?;
            }
            Kind::IhoEntropy => {
                self.expect_model(text, "iho")?;
                self.require(text, "tau_max", self.tau_max)?;
                match &self.frequencies {
                    Some(f) if f.len() == 2 => {}
                    _ => return Err(config_error(text, "frequencies", "two frequencies are required")),
                }
            }
            Kind::AppendixSweep => {
                self.require(text, "n", self.n)?;
                self.require(text, "tau_max", self.tau_max)?;
                if let Some(s) = &self.spectrum {
                    if s != "linear" && s != "ohmic" {
                        return Err(config_error(text, "spectrum", format!("unknown spectrum `{s}`")));
                    }
                }
            }
        }
        for (key, v) in [
            ("lambda", self.lambda),
            ("Lambda", self.big_lambda),
            ("tau_max", self.tau_max),
            ("grid_density", self.grid_density),
            ("tolerance", self.tolerance),
        ] {
            if let Some(v) = v {
                if !(v > 0.0 && v.is_finite()) {
                    return Err(config_error(text, key, format!("`{key}` must be positive")));
                }
            }
        }
        if let (Some(w), Some(t)) = (self.window, self.tau_max) {
            if !(0.0 <= w[0] && w[0] < w[1] && w[1] <= t) {
                return Err(config_error(text, "window", "window must satisfy 0 <= lo < hi <= tau_max"));
            }
        }
        if let Some(b) = &self.backend {
            if b != "analytic" && b != "finite_diff" {
                return Err(config_error(text, "backend", format!("unknown backend `{b}`")));
            }
        }
        Ok(())
    }

    fn expect_model(&self, text: &str, wanted: &str) -> Result<()> {
        match self.model.as_deref() {
            Some(m) if m == wanted => Ok(()),
            Some(m) => Err(config_error(text, "model", format!("this kind needs model `{wanted}`, got `{m}`"))),
            None => Err(config_error(text, "kind", format!("this kind needs model `{wanted}`"))),
        }
    }

    fn statistical_model(&self) -> Result<StatisticalModel> {
        match self.model.as_deref() {
            Some("gaussian_product") => StatisticalModel::gaussian_product(
                self.n_particles
                    .ok_or_else(|| Error::InvalidArgument("`n_particles` is required".into()))?,
            ),
            Some("correlated_gaussian") => StatisticalModel::correlated_gaussian(
                self.r.ok_or_else(|| Error::InvalidArgument("`r` is required".into()))?,
            ),
            Some("iho") => StatisticalModel::iho(
                self.frequencies
                    .clone()
                    .ok_or_else(|| Error::InvalidArgument("`frequencies` is required".into()))?,
            ),
            _ => Err(Error::InvalidArgument("no model given".into())),
        }
    }

    fn step(&self) -> f64 {
        1.0 / self.grid_density.unwrap_or(100.0)
    }

    fn window_or_last_half(&self, tau_max: f64) -> [f64; 2] {
        self.window.unwrap_or([0.5 * tau_max, tau_max])
    }

    fn backend(&self, default: Backend) -> Backend {
        match self.backend.as_deref() {
            Some("analytic") => Backend::Analytic,
            Some("finite_diff") => Backend::FiniteDiff(FiniteDiff::default()),
            _ => default,
        }
    }

    fn closed_form_params(&self) -> Result<ClosedFormGeodesicParams> {
        ClosedFormGeodesicParams::new(
            self.big_lambda.unwrap_or(1.0),
            self.lambda.unwrap_or(1.0),
            self.offset.unwrap_or(0.0),
        )
    }
}

/// A file produced by a scenario.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub file_name: String,
    pub contents: String,
}

/// Outcome of one scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioReport {
    pub name: String,
    pub kind: Kind,
    pub model: Option<String>,
    pub seed: u64,
    pub pass: bool,
    pub claims: Vec<Claim>,
    pub details: BTreeMap<String, f64>,
    pub artifacts: Vec<String>,
    pub error: Option<String>,
    #[serde(skip)]
    pub files: Vec<Artifact>,
}

/// Full run report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub pass: bool,
    pub scenarios: Vec<ScenarioReport>,
}

impl Report {
    /// Builds a report with scenarios ordered by name.
    pub fn new(mut scenarios: Vec<ScenarioReport>) -> Self {
        scenarios.sort_by(|a, b| a.name.cmp(&b.name));
        let pass = !scenarios.is_empty() && scenarios.iter().all(|s| s.pass);
        Self {
            schema_version: SCHEMA_VERSION,
            pass,
            scenarios,
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }
}

struct Outcome {
    claims: Vec<Claim>,
    details: BTreeMap<String, f64>,
    files: Vec<(&'static str, String)>,
}

fn random_point(model: &StatisticalModel, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let d = model.dimension();
    match model {
        StatisticalModel::Iho { .. } => (0..d).map(|_| rng.random_range(-2.0..2.0)).collect(),
        _ => (0..d)
            .map(|i| {
                if i % 2 == 0 {
                    rng.random_range(-3.0..3.0)
                } else {
                    rng.random_range(0.3..3.0)
                }
            })
            .collect(),
    }
}

fn run_curvature(cfg: &ScenarioConfig) -> Result<Outcome> {
    let model = cfg.statistical_model()?;
    let backend = cfg.backend(Backend::FiniteDiff(FiniteDiff::with_step(1e-5)));
    let tol = cfg.tolerance.unwrap_or(1e-6);
    let points = match &cfg.points {
        Some(p) => p.clone(),
        None => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));
            (0..cfg.samples.unwrap_or(10)).map(|_| random_point(&model, &mut rng)).collect()
        }
    };
    if points.is_empty() {
        return Err(Error::InvalidArgument("no evaluation points".into()));
    }
    let predict = |x: &[f64]| -> Result<f64> {
        match &model {
            StatisticalModel::GaussianProduct { n_particles, .. } => Ok(-3.0 * *n_particles as f64),
            StatisticalModel::CorrelatedGaussian { r, .. } => Ok(correlated_ricci_closed_form(*r)),
            StatisticalModel::Iho { frequencies } if frequencies.len() == 2 => {
                Ok(iho::ricci_scalar_iho_2set(frequencies[0], frequencies[1], x[0], x[1]))
            }
            StatisticalModel::Iho { .. } => Err(Error::InvalidArgument(
                "closed-form curvature is known for two oscillators only".into(),
            )),
        }
    };
    let d = model.dimension();
    let mut csv = String::from("index");
    for i in 0..d {
        csv.push_str(&format!(",theta_{i}"));
    }
    csv.push_str(",R,predicted\n");
    let mut worst: Option<(f64, f64)> = None;
    for (k, x) in points.iter().enumerate() {
        let r = geometry::ricci_scalar(&model, x, backend)?;
        let p = predict(x)?;
        csv.push_str(&k.to_string());
        for v in x.iter().chain([&r, &p]) {
            csv.push(',');
            csv.push_str(&crate::dynamics::fmt_num(*v));
        }
        csv.push('\n');
        if worst.is_none_or(|(wp, wr)| (r - p).abs() > (wr - wp).abs()) {
            worst = Some((p, r));
        }
    }
    let (p, r) = worst.expect("at least one point");
    let claims = if matches!(model, StatisticalModel::Iho { .. }) {
        vec![Claim::absolute("ricci_scalar - closed_form, worst point", 0.0, r - p, tol)]
    } else {
        vec![Claim::absolute("ricci_scalar, worst point", p, r, tol)]
    };
    let mut details = BTreeMap::new();
    details.insert("points".into(), points.len() as f64);
    Ok(Outcome {
        claims,
        details,
        files: vec![("curvature.csv", csv)],
    })
}

fn run_geodesic(cfg: &ScenarioConfig) -> Result<Outcome> {
    let model = cfg.statistical_model()?;
    let tau_max = cfg.tau_max.unwrap_or(1.0);
    let opts = FlowOptions::default()
        .with_output_step(cfg.step())
        .with_backend(cfg.backend(Backend::Analytic));
    let mut details = BTreeMap::new();
    if let (Some(theta), Some(vel)) = (&cfg.theta0, &cfg.velocity0) {
        let init = GeodesicState {
            tau: 0.0,
            theta: theta.clone(),
            velocity: vel.clone(),
        };
        let traj = integrate_geodesic(&model, &init, tau_max, &opts)?;
        details.insert("accepted_steps".into(), traj.integrator.accepted_steps as f64);
        return Ok(Outcome {
            claims: vec![Claim::absolute(
                "kinetic form drift",
                0.0,
                traj.kinetic_drift,
                cfg.tolerance.unwrap_or(1e-8),
            )],
            details,
            files: vec![("trajectory.csv", traj.to_csv())],
        });
    }
    let p = cfg.closed_form_params()?;
    let pairs = model.dimension() / 2;
    let init = closed_form_initial_state(&p, pairs, 0.0);
    let traj = integrate_geodesic(&model, &init, tau_max, &opts)?;
    let mut worst: f64 = 0.0;
    for s in &traj.states {
        let (mu, sigma) = closed_form_geodesic(&p, s.tau);
        for k in 0..pairs {
            worst = worst.max((s.theta[2 * k] - mu).abs()).max((s.theta[2 * k + 1] - sigma).abs());
        }
    }
    details.insert("kinetic_drift".into(), traj.kinetic_drift);
    details.insert("accepted_steps".into(), traj.integrator.accepted_steps as f64);
    Ok(Outcome {
        claims: vec![Claim::absolute(
            "integrated vs closed-form geodesic, worst pointwise",
            0.0,
            worst,
            cfg.tolerance.unwrap_or(1e-6),
        )],
        details,
        files: vec![("trajectory.csv", traj.to_csv())],
    })
}

fn run_jlc(cfg: &ScenarioConfig) -> Result<Outcome> {
    let model = cfg.statistical_model()?;
    let tau_max = cfg.tau_max.unwrap_or(1.0);
    let p = cfg.closed_form_params()?;
    let pairs = model.dimension() / 2;
    let opts = FlowOptions::default()
        .with_output_step(cfg.step())
        .with_backend(cfg.backend(Backend::Analytic));
    let init = closed_form_initial_state(&p, pairs, 0.0);
    let traj = integrate_geodesic(&model, &init, tau_max, &opts)?;
    let (j0, dj0) = closed_form_family_variation(&p, pairs, 0.0);
    let jf = integrate_jlc(&model, &traj, &j0, &dj0, &opts)?;
    let est = lyapunov_estimate(&jf.taus, &jf.intensity, cfg.window_or_last_half(tau_max))?;
    let mut details = BTreeMap::new();
    details.insert("prefactor".into(), est.prefactor);
    details.insert("r_squared".into(), est.r_squared);
    if let Some(r) = est.ratio_form {
        details.insert("ratio_form".into(), r);
    }
    Ok(Outcome {
        claims: vec![Claim::relative(
            "lambda_J",
            p.lambda,
            est.lambda_j,
            cfg.tolerance.unwrap_or(0.05),
        )],
        details,
        files: vec![("jacobi.csv", jf.to_csv())],
    })
}

fn ige_outcome(cfg: &ScenarioConfig, report: ige::IGEReport, claim_name: &str, predicted: f64, measured: f64) -> Outcome {
    let mut details = BTreeMap::new();
    details.insert("fitted_slope".into(), report.fitted_slope);
    details.insert("r_squared".into(), report.r_squared);
    if let Some(r) = report.omega_ratio {
        details.insert("slope_over_omega".into(), r);
    }
    let mut json = report.to_json();
    json.push('\n');
    Outcome {
        claims: vec![Claim::relative(claim_name, predicted, measured, cfg.tolerance.unwrap_or(0.05))],
        details,
        files: vec![("ige.csv", report.to_csv()), ("ige.json", json)],
    }
}

fn run_ige(cfg: &ScenarioConfig) -> Result<Outcome> {
    let n = cfg
        .n_particles
        .ok_or_else(|| Error::InvalidArgument("`n_particles` is required".into()))?;
    let tau_max = cfg.tau_max.unwrap_or(1.0);
    let p = cfg.closed_form_params()?;
    let taus = uniform_grid(0.0, tau_max, cfg.step());
    let report = ige::ige_gaussian(&p, n, &taus, cfg.window_or_last_half(tau_max))?;
    let (pred, slope) = (report.predicted_slope, report.fitted_slope);
    Ok(ige_outcome(cfg, report, "entropy slope", pred, slope))
}

fn run_iho_entropy(cfg: &ScenarioConfig) -> Result<Outcome> {
    let f = cfg.frequencies.as_deref().unwrap_or_default();
    let freqs = [f[0], f[1]];
    let amp = cfg.amplitudes.clone().unwrap_or_else(|| vec![1.0, 1.0]);
    if amp.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, got: amp.len() });
    }
    let tau_max = cfg.tau_max.unwrap_or(1.0);
    let taus = uniform_grid(0.0, tau_max, cfg.step());
    let report = ige::ige_iho_2set(freqs, [amp[0], amp[1]], &taus, cfg.window_or_last_half(tau_max))?;
    let (pred, slope) = (report.predicted_slope, report.fitted_slope);
    Ok(ige_outcome(cfg, report, "log average volume slope", pred, slope))
}

fn run_appendix(cfg: &ScenarioConfig) -> Result<Outcome> {
    let n = cfg.n.unwrap_or(1);
    let freqs = match &cfg.frequencies {
        Some(f) => f.clone(),
        None => ige::sample_frequency_spectrum(n, LINEAR_SPECTRUM_CUTOFF, cfg.seed.unwrap_or(0))?,
    };
    let amp = cfg.amplitudes.clone().unwrap_or_else(|| vec![1.0; 3 * n]);
    let tau_max = cfg.tau_max.unwrap_or(1.0);
    let taus = uniform_grid(0.0, tau_max, cfg.step());
    let report = ige::ige_iho_appendix(n, &freqs, &amp, &taus, cfg.window_or_last_half(tau_max))?;
    let omega: f64 = freqs.iter().sum();
    let ratio = report.fitted_slope / (n as f64 * LINEAR_SPECTRUM_CUTOFF);
    let mut out = ige_outcome(cfg, report, "slope / (n xi Omega)", 1.5, ratio);
    out.details.insert("omega_sum".into(), omega);
    out.details.insert("xi".into(), ige::cutoff_multiplier(&freqs));
    for (i, w) in freqs.iter().enumerate() {
        out.details.insert(format!("omega_{i:03}"), *w);
    }
    Ok(out)
}

/// Runs one parsed scenario; library failures become a failed report entry.
pub fn run_scenario(cfg: &ScenarioConfig) -> ScenarioReport {
    let name = cfg.name();
    let outcome = match cfg.kind {
        Kind::Curvature => run_curvature(cfg),
        Kind::Geodesic => run_geodesic(cfg),
        Kind::Jlc => run_jlc(cfg),
        Kind::Ige => run_ige(cfg),
        Kind::IhoEntropy => run_iho_entropy(cfg),
        Kind::AppendixSweep => run_appendix(cfg),
    };
    let base = ScenarioReport {
        name: name.clone(),
        kind: cfg.kind,
        model: cfg.model.clone(),
        seed: cfg.seed.unwrap_or(0),
        pass: false,
        claims: Vec::new(),
        details: BTreeMap::new(),
        artifacts: Vec::new(),
        error: None,
        files: Vec::new(),
    };
    match outcome {
        Ok(o) => {
            let files: Vec<Artifact> = o
                .files
                .into_iter()
                .map(|(suffix, contents)| Artifact {
                    file_name: format!("{name}.{suffix}"),
                    contents,
                })
                .collect();
            ScenarioReport {
                pass: !o.claims.is_empty() && o.claims.iter().all(|c| c.pass),
                claims: o.claims,
                details: o.details,
                artifacts: files.iter().map(|f| f.file_name.clone()).collect(),
                files,
                ..base
            }
        }
        Err(e) => ScenarioReport {
            error: Some(
                Error::ScenarioFailed {
                    scenario: name,
                    source: Box::new(e),
                }
                .to_string(),
            ),
            ..base
        },
    }
}

/// Reads and parses a scenario file; the name defaults to the file stem.
pub fn load_scenario(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let mut cfg = ScenarioConfig::parse(&text)?;
    if cfg.name.is_none() {
        cfg.name = path.file_stem().map(|s| s.to_string_lossy().into_owned());
    }
    Ok(cfg)
}

/// Scenario paths listed one per line, relative to the list file; `#` starts a comment.
pub fn load_sweep_list(path: &Path) -> Result<Vec<PathBuf>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))?;
    let base = path.parent().unwrap_or(Path::new("."));
    let entries: Vec<PathBuf> = text
        .lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(|l| base.join(l))
        .collect();
    if entries.is_empty() {
        return Err(Error::ConfigParse {
            line: 1,
            column: 1,
            message: "sweep list names no scenarios".into(),
        });
    }
    Ok(entries)
}

/// Thread count from `IGDYN_THREADS`, if set to a positive integer.
pub fn thread_cap() -> Option<usize> {
    std::env::var(THREADS_ENV)
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|n| *n > 0)
}

/// Runs scenarios in parallel, at most `threads` at a time.
pub fn run_many(configs: &[ScenarioConfig], threads: Option<usize>) -> Result<Report> {
    let mut names: Vec<String> = configs.iter().map(ScenarioConfig::name).collect();
    names.sort();
    if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
        return Err(Error::InvalidArgument(format!("duplicate scenario name `{}`", w[0])));
    }
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = threads {
        builder = builder.num_threads(n);
    }
    let pool = builder
        .build()
        .map_err(|e| Error::InvalidArgument(format!("thread pool: {e}")))?;
    let results = pool.install(|| configs.par_iter().map(run_scenario).collect());
    Ok(Report::new(results))
}

/// Writes every artifact and `report.json` into `dir`.
pub fn write_outputs(dir: &Path, report: &Report) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    for s in &report.scenarios {
        for f in &s.files {
            std::fs::write(dir.join(&f.file_name), &f.contents)?;
        }
    }
    std::fs::write(dir.join("report.json"), report.to_json())?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_errors_carry_positions() {
        match ScenarioConfig::parse("") {
            Err(Error::ConfigParse { line: 1, column: 1, .. }) => {}
            other => panic!("{other:?}"),
        }
        match ScenarioConfig::parse("kind = \"IGE\"\nlambda = = 1\n") {
            Err(Error::ConfigParse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        match ScenarioConfig::parse("kind = \"IGE\"\nmodel = \"iho\"\n") {
            Err(Error::ConfigParse { line, column, .. }) => assert_eq!((line, column), (2, 1)),
            other => panic!("{other:?}"),
        }
        assert!(ScenarioConfig::parse("kind = \"CURVATURE\"\nmodel = \"iho\"\ncolour = 1\n").is_err());
    }

    #[test]
    fn window_must_fit_span() {
        let text = "kind = \"IGE\"\nmodel = \"gaussian_product\"\nn_particles = 1\nlambda = 1.0\ntau_max = 4.0\n  window = [2.0, 5.0]\n";
        match ScenarioConfig::parse(text) {
            Err(Error::ConfigParse { line, column, .. }) => assert_eq!((line, column), (6, 3)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn curvature_scenario() {
        let cfg = ScenarioConfig::parse(
            "name = \"c\"\nkind = \"CURVATURE\"\nmodel = \"gaussian_product\"\nn_particles = 3\nsamples = 2\n",
        )
        .unwrap();
        let r = run_scenario(&cfg);
        assert!(r.pass, "{r:?}");
        assert_eq!(r.claims[0].predicted, -9.0);
        assert!((r.claims[0].measured + 9.0).abs() < 1e-6);
        assert_eq!(r.artifacts, vec!["c.curvature.csv".to_string()]);
    }

    #[test]
    fn failing_library_call_is_reported() {
        let cfg = ScenarioConfig::parse(
            "kind = \"CURVATURE\"\nmodel = \"gaussian_product\"\nn_particles = 1\npoints = [[0.0, -1.0, 0.0, 1.0, 0.0, 1.0]]\n",
        )
        .unwrap();
        let r = run_scenario(&cfg);
        assert!(!r.pass);
        assert!(r.error.unwrap().contains("scenario `scenario` failed"));
    }

    #[test]
    fn report_orders_scenarios_and_flags_failures() {
        let mk = |name: &str, pass: bool| ScenarioReport {
            name: name.into(),
            kind: Kind::Ige,
            model: None,
            seed: 0,
            pass,
            claims: vec![Claim::relative("s", 1.0, if pass { 1.0 } else { 1.07 }, 0.05)],
            details: BTreeMap::new(),
            artifacts: vec![],
            error: None,
            files: vec![],
        };
        let r = Report::new(vec![mk("b", true), mk("a", false)]);
        assert_eq!(r.scenarios[0].name, "a");
        assert!(!r.pass);
        let json = r.to_json();
        assert!(json.find("\"schema_version\"").unwrap() < json.find("\"scenarios\"").unwrap());
        assert!(json.contains("\"pass\": false"));
    }
}
