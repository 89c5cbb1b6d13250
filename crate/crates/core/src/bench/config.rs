use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use super::fixtures::Fixture;
use crate::degrade::{BlurType, Kernel};
use crate::framelet::{Boundary, MAX_LEVELS};
use crate::imaging::{load_image, Image};
use crate::nonlocal::NonlocalConfig;
use crate::solvers::{default_tikhonov_eta, SolverKind, SolverParams};
use crate::{Error, Result};

/// Where a benchmark image comes from.
#[derive(Clone, Debug, PartialEq)]
pub enum ImageSource {
    Fixture(Fixture),
    File(PathBuf),
}

impl ImageSource {
    /// Fixture name or file stem; used in CSV rows and output file names.
    pub fn name(&self) -> String {
        match self {
            ImageSource::Fixture(f) => f.name().to_string(),
            ImageSource::File(p) => p
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.display().to_string()),
        }
    }

    pub fn load(&self, size: usize) -> Result<Image> {
        match self {
            ImageSource::Fixture(f) => f.render(size),
            ImageSource::File(p) => load_image(p),
        }
    }
}

/// A preset blur or a kernel read from a dump file.
#[derive(Clone, Debug, PartialEq)]
pub enum BlurSpec {
    Preset(BlurType),
    File { label: String, kernel: Kernel },
}

impl BlurSpec {
    pub fn label(&self) -> &str {
        match self {
            BlurSpec::Preset(t) => t.label(),
            BlurSpec::File { label, .. } => label,
        }
    }

    pub fn kernel(&self) -> Kernel {
        match self {
            BlurSpec::Preset(t) => t.kernel(),
            BlurSpec::File { kernel, .. } => kernel.clone(),
        }
    }
}

/// A method entry of the benchmark. `Degraded` only records the observation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Method {
    Degraded,
    Solver(SolverKind),
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Degraded => "none",
            Method::Solver(k) => k.name(),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.trim().eq_ignore_ascii_case("none") {
            Ok(Method::Degraded)
        } else {
            s.parse().map(Method::Solver)
        }
    }
}

/// One degradation: a blur and a noise level.
#[derive(Clone, Debug, PartialEq)]
pub struct Case {
    pub blur: BlurSpec,
    pub sigma: f64,
}

/// The `(lambda, nu)` grid searched for one solver.
#[derive(Clone, Debug, PartialEq)]
pub struct SolverGrid {
    pub solver: SolverKind,
    pub lambdas: Vec<f64>,
    /// Always `[0]` for solvers without the nonlocal term.
    pub nus: Vec<f64>,
}

/// A full benchmark description.
///
/// Parsed from `key = value` lines; `#` starts a comment. Lists are comma
/// separated. Recognized keys:
///
/// | key | meaning | default |
/// |-----|---------|---------|
/// | `images` | fixture names or image paths | `cameraman` |
/// | `size` | side of procedural fixtures | `128` |
/// | `blur` | `I`..`IV` or kernel dump paths | `III` |
/// | `sigma` | noise standard deviations | `3.0` |
/// | `cases` | explicit `blur:sigma` pairs, replacing `blur` x `sigma` | |
/// | `seed` | noise seed | `0` |
/// | `solvers` | solver names, or `none` for degrade only | all four |
/// | `lambda`, `nu` | grids shared by all solvers | `0.05` / `0.003` |
/// | `lambda.<solver>`, `nu.<solver>` | per-solver grid override | |
/// | `stages`, `rho` | support detection | `3` / `3` |
/// | `levels`, `boundary` | framelet | `1` / `symmetric` |
/// | `max_inner`, `tol`, `beta_refresh` | iteration control | `500` / `5e-4` / `2` |
/// | `patch_size`, `window_size`, `neighbors` | nonlocal search | `5` / `11` / `15` |
/// | `filtering`, `tikhonov_eta` | nonlocal weights and guide | noise scaled |
/// | `oracle` | also run support detection on the clean image | `false` |
/// | `timing` | record wall-clock seconds (breaks byte determinism) | `false` |
/// | `save_images` | write degraded and restored images | `true` |
/// | `output` | output directory | none |
///
/// Relative paths resolve against the config file's directory.
#[derive(Clone, Debug, PartialEq)]
pub struct ExperimentConfig {
    pub images: Vec<ImageSource>,
    pub size: usize,
    /// Degradations in run order.
    pub cases: Vec<Case>,
    pub seed: u64,
    pub degraded_row: bool,
    pub grids: Vec<SolverGrid>,
    pub stages: usize,
    pub rho: f64,
    pub levels: usize,
    pub boundary: Boundary,
    pub max_inner: usize,
    pub tol: f64,
    pub beta_refresh: usize,
    pub patch_size: usize,
    pub window_size: usize,
    pub neighbors: usize,
    pub filtering: Option<f64>,
    pub tikhonov_eta: Option<f64>,
    pub oracle: bool,
    pub timing: bool,
    pub save_images: bool,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let defaults = SolverParams::default();
        let nl = NonlocalConfig::for_noise(0.0);
        Self {
            images: vec![ImageSource::Fixture(Fixture::Cameraman)],
            size: 128,
            cases: vec![Case {
                blur: BlurSpec::Preset(BlurType::III),
                sigma: 3.0,
            }],
            seed: 0,
            degraded_row: false,
            grids: SolverKind::ALL
                .into_iter()
                .map(|solver| SolverGrid {
                    solver,
                    lambdas: vec![0.05],
                    nus: if uses_nu(solver) { vec![0.003] } else { vec![0.0] },
                })
                .collect(),
            stages: 3,
            rho: defaults.rho,
            levels: defaults.levels,
            boundary: defaults.boundary,
            max_inner: defaults.max_inner,
            tol: defaults.tol,
            beta_refresh: defaults.beta_refresh,
            patch_size: nl.patch_size,
            window_size: nl.window_size,
            neighbors: nl.neighbors,
            filtering: None,
            tikhonov_eta: None,
            oracle: false,
            timing: false,
            save_images: true,
            output: None,
        }
    }
}

fn uses_nu(solver: SolverKind) -> bool {
    matches!(solver, SolverKind::NonlocalMdal | SolverKind::TruncatedIsd)
}

fn bad(key: &str, value: &str, expected: &str) -> Error {
    Error::Config(format!("`{key} = {value}`: expected {expected}"))
}

fn parse_scalar<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<T> {
    value.trim().parse().map_err(|_| bad(key, value, expected))
}

fn parse_list<T: FromStr>(key: &str, value: &str, expected: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse().map_err(|_| bad(key, value, expected)))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(bad(key, value, "a non-empty list"));
    }
    Ok(items)
}

fn parse_bool(key: &str, value: &str) -> Result<bool> {
    match value.trim().to_ascii_lowercase().as_str() {
        "true" | "yes" | "on" | "1" => Ok(true),
        "false" | "no" | "off" | "0" => Ok(false),
        _ => Err(bad(key, value, "true or false")),
    }
}

fn parse_blur(base: Option<&Path>, s: &str) -> Result<BlurSpec> {
    match s.parse::<BlurType>() {
        Ok(t) => Ok(BlurSpec::Preset(t)),
        Err(_) => {
            let path = resolve(base, s);
            let kernel = Kernel::load(&path)?;
            let label = path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| s.to_string());
            Ok(BlurSpec::File { label, kernel })
        }
    }
}

fn resolve(base: Option<&Path>, raw: &str) -> PathBuf {
    let p = PathBuf::from(raw);
    match base {
        Some(dir) if p.is_relative() => dir.join(p),
        _ => p,
    }
}

impl ExperimentConfig {
    /// Reads and validates a config file. Referenced images and kernels must
    /// exist.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text, path.parent()).map_err(|e| match e {
            Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }

    /// Parses config text; relative paths resolve against `base`.
    pub fn parse(text: &str, base: Option<&Path>) -> Result<Self> {
        let mut cfg = Self::default();
        let mut lambdas: Option<Vec<f64>> = None;
        let mut nus: Option<Vec<f64>> = None;
        let mut solver_lambdas: Vec<(SolverKind, Vec<f64>)> = Vec::new();
        let mut solver_nus: Vec<(SolverKind, Vec<f64>)> = Vec::new();
        let mut methods: Option<Vec<Method>> = None;
        let mut blurs = vec![BlurSpec::Preset(BlurType::III)];
        let mut sigmas = vec![3.0];
        let mut cases: Option<Vec<Case>> = None;

        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected `key = value`", lineno + 1)))?;
            let key = key.trim();
            let value = value.trim();
            if let Some((head, solver)) = key.split_once('.') {
                let kind: SolverKind = solver.parse()?;
                let grid = parse_list(key, value, "a list of numbers")?;
                match head {
                    "lambda" => solver_lambdas.push((kind, grid)),
                    "nu" => solver_nus.push((kind, grid)),
                    _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
                }
                continue;
            }
            match key {
                "images" | "image" => {
                    cfg.images = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| match s.parse::<Fixture>() {
                            Ok(f) => ImageSource::Fixture(f),
                            Err(_) => ImageSource::File(resolve(base, s)),
                        })
                        .collect();
                }
                "size" => cfg.size = parse_scalar(key, value, "a positive integer")?,
                "blur" | "blurs" => {
                    blurs = value
                        .split(',')
                        .map(str::trim)
                        .filter(|s| !s.is_empty())
                        .map(|s| parse_blur(base, s))
                        .collect::<Result<_>>()?;
                }
                "sigma" | "sigmas" => sigmas = parse_list(key, value, "a list of numbers")?,
                "cases" => {
                    cases = Some(
                        value
                            .split(',')
                            .map(str::trim)
                            .filter(|s| !s.is_empty())
                            .map(|item| {
                                let (b, sg) = item
                                    .rsplit_once(':')
                                    .ok_or_else(|| bad(key, value, "`blur:sigma` pairs"))?;
                                Ok(Case {
                                    blur: parse_blur(base, b.trim())?,
                                    sigma: parse_scalar(key, sg, "`blur:sigma` pairs")?,
                                })
                            })
                            .collect::<Result<_>>()?,
                    )
                }
                "seed" => cfg.seed = parse_scalar(key, value, "an unsigned integer")?,
                "solvers" | "solver" => methods = Some(parse_list(key, value, "solver names")?),
                "lambda" => lambdas = Some(parse_list(key, value, "a list of numbers")?),
                "nu" => nus = Some(parse_list(key, value, "a list of numbers")?),
                "stages" => cfg.stages = parse_scalar(key, value, "a positive integer")?,
                "rho" => cfg.rho = parse_scalar(key, value, "a number")?,
                "levels" => cfg.levels = parse_scalar(key, value, "a positive integer")?,
                "boundary" => cfg.boundary = value.parse()?,
                "max_inner" => cfg.max_inner = parse_scalar(key, value, "a positive integer")?,
                "tol" => cfg.tol = parse_scalar(key, value, "a number")?,
                "beta_refresh" => cfg.beta_refresh = parse_scalar(key, value, "a positive integer")?,
                "patch_size" => cfg.patch_size = parse_scalar(key, value, "an odd integer")?,
                "window_size" => cfg.window_size = parse_scalar(key, value, "an odd integer")?,
                "neighbors" => cfg.neighbors = parse_scalar(key, value, "a positive integer")?,
                "filtering" => cfg.filtering = Some(parse_scalar(key, value, "a number")?),
                "tikhonov_eta" => cfg.tikhonov_eta = Some(parse_scalar(key, value, "a number")?),
                "oracle" => cfg.oracle = parse_bool(key, value)?,
                "timing" => cfg.timing = parse_bool(key, value)?,
                "save_images" => cfg.save_images = parse_bool(key, value)?,
                "output" => cfg.output = Some(resolve(base, value)),
                _ => return Err(Error::Config(format!("line {}: unknown key `{key}`", lineno + 1))),
            }
        }

        cfg.cases = match cases {
            Some(c) => c,
            None => blurs
                .iter()
                .flat_map(|b| sigmas.iter().map(|&sigma| Case { blur: b.clone(), sigma }))
                .collect(),
        };
        let methods = methods.unwrap_or_else(|| SolverKind::ALL.into_iter().map(Method::Solver).collect());
        cfg.degraded_row = methods.contains(&Method::Degraded);
        let mut kinds: Vec<SolverKind> = Vec::new();
        for m in methods {
            if let Method::Solver(k) = m {
                if !kinds.contains(&k) {
                    kinds.push(k);
                }
            }
        }
        let lambdas = lambdas.unwrap_or_else(|| vec![0.05]);
        let nus = nus.unwrap_or_else(|| vec![0.003]);
        cfg.grids = kinds
            .into_iter()
            .map(|solver| {
                let lambdas = solver_lambdas
                    .iter()
                    .rev()
                    .find(|(k, _)| *k == solver)
                    .map_or_else(|| lambdas.clone(), |(_, g)| g.clone());
                let nus = if uses_nu(solver) {
                    solver_nus
                        .iter()
                        .rev()
                        .find(|(k, _)| *k == solver)
                        .map_or_else(|| nus.clone(), |(_, g)| g.clone())
                } else {
                    vec![0.0]
                };
                SolverGrid { solver, lambdas, nus }
            })
            .collect();
        cfg.validate()?;
        Ok(cfg)
    }

    /// Checks grids, ranges and that referenced image files exist.
    pub fn validate(&self) -> Result<()> {
        if self.images.is_empty() {
            return Err(Error::Config("`images` is empty".into()));
        }
        for src in &self.images {
            if let ImageSource::File(p) = src {
                if !p.is_file() {
                    return Err(Error::Config(format!("image `{}` does not exist", p.display())));
                }
            }
        }
        if self.cases.is_empty() {
            return Err(Error::Config(
                "no degradations: `blur`, `sigma` or `cases` is empty".into(),
            ));
        }
        if let Some(c) = self.cases.iter().find(|c| !c.sigma.is_finite() || c.sigma < 0.0) {
            return Err(Error::Config(format!("sigma must be finite and >= 0, got {}", c.sigma)));
        }
        if self.grids.is_empty() && !self.degraded_row {
            return Err(Error::Config(
                "no solvers configured; use `solvers = none` for degrade only".into(),
            ));
        }
        for g in &self.grids {
            if g.lambdas.is_empty() || g.nus.is_empty() {
                return Err(Error::Config(format!("empty parameter grid for {}", g.solver)));
            }
        }
        if self.levels == 0 || self.levels > MAX_LEVELS {
            return Err(Error::Config(format!(
                "levels must be in 1..={MAX_LEVELS}, got {}",
                self.levels
            )));
        }
        if self.stages == 0 {
            return Err(Error::Config("stages must be >= 1".into()));
        }
        if self.oracle && !self.grids.iter().any(|g| g.solver == SolverKind::TruncatedIsd) {
            return Err(Error::Config("`oracle = true` needs truncated_isd in `solvers`".into()));
        }
        for g in &self.grids {
            for &l in &g.lambdas {
                for &n in &g.nus {
                    self.params(g.solver, l, n, self.cases[0].sigma)
                        .validate()
                        .map_err(|e| Error::Config(format!("{}: {e}", g.solver)))?;
                }
            }
        }
        Ok(())
    }

    /// Solver settings for one grid point at noise level `sigma`.
    pub fn params(&self, solver: SolverKind, lambda: f64, nu: f64, sigma: f64) -> SolverParams {
        let mut p = match solver {
            SolverKind::SplitBregman => SolverParams::split_bregman(lambda),
            SolverKind::Mdal => SolverParams::mdal(lambda),
            SolverKind::NonlocalMdal => SolverParams::nonlocal_mdal(lambda, nu, sigma),
            SolverKind::TruncatedIsd => SolverParams::truncated_isd(lambda, nu, sigma, self.stages),
        };
        p.rho = self.rho;
        p.levels = self.levels;
        p.boundary = self.boundary;
        p.max_inner = self.max_inner;
        p.tol = self.tol;
        p.beta_refresh = self.beta_refresh;
        p.nonlocal.patch_size = self.patch_size;
        p.nonlocal.window_size = self.window_size;
        p.nonlocal.neighbors = self.neighbors;
        if let Some(h) = self.filtering {
            p.nonlocal.filtering = h;
        } else {
            p.nonlocal.filtering = crate::nonlocal::default_filtering(sigma, self.patch_size);
        }
        p.tikhonov_eta = self.tikhonov_eta.unwrap_or_else(|| default_tikhonov_eta(sigma));
        p
    }
}

impl FromStr for ExperimentConfig {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, None)
    }
}
