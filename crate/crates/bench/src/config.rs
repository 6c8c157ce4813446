//! Run configuration.
//!
//! Line-based `key = value` pairs grouped under `[problem]`, `[scheme]` and
//! `[output]` headers, with `#` comments. Keys before the first header may
//! come from any section. Every key has a default; unknown keys are errors.
//!
//! ```text
//! [problem]
//! problem = leblanc_tangliu   # sod | leblanc_tangliu | smooth
//! gamma = 1.4
//! cells = 300                 # comma-separated list for sweeps
//!
//! [scheme]
//! scheme = grp-nonlinear      # comma-separated list for sweeps
//! cfl = 0.32
//!
//! [output]
//! output_dir = out
//! ```

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use grp_core::scheme::{BoundaryPolicy, FluxSolver, Limiter, Reconstruction, SchemeSpec, TimeIntegrator};
use grp_core::PrimitiveState;

use crate::error::BenchError;
use crate::output::DISPLAY_POINTS;
use crate::problem::{InitialData, ProblemSpec};
use crate::run::Overrides;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Section {
    Problem,
    Scheme,
    Output,
}

impl Section {
    fn name(&self) -> &'static str {
        match self {
            Section::Problem => "problem",
            Section::Scheme => "scheme",
            Section::Output => "output",
        }
    }
}

/// Recognised keys, their section and a short description.
pub const KEYS: &[(&str, &str, &str)] = &[
    ("problem", "problem", "sod | leblanc_tangliu | smooth (default sod)"),
    ("gamma", "problem", "ratio of specific heats (default 1.4)"),
    ("cells", "problem", "cell count, or a list for sweeps (default 100 sod, 300 leblanc_tangliu, 200 smooth)"),
    ("t_end", "problem", "final time (default per problem)"),
    ("x_min", "problem", "left end of the domain"),
    ("x_max", "problem", "right end of the domain"),
    ("x0", "problem", "initial discontinuity position (Riemann problems)"),
    ("left", "problem", "left state `rho, u, p` (Riemann problems)"),
    ("right", "problem", "right state `rho, u, p` (Riemann problems)"),
    ("amplitude", "problem", "density amplitude (smooth problem, default 0.2)"),
    ("boundary", "problem", "transmissive | reflective | periodic"),
    ("scheme", "scheme", "scheme name, or a list for sweeps (default exact-godunov)"),
    ("flux_solver", "scheme", "exact-godunov | hllc | roe-efix | grp-acoustic | grp-nonlinear"),
    ("reconstruction", "scheme", "none | muscl"),
    ("time_integrator", "scheme", "euler | rk2 | grp-onestep"),
    ("limiter", "scheme", "minmod | vanleer (default minmod)"),
    ("cfl", "scheme", "CFL number in (0, 1) (default 0.5 first order, 0.32 otherwise)"),
    ("efix_delta", "scheme", "Roe entropy-fix width factor, or `off` (default 0.1)"),
    ("projection_alpha", "scheme", "GRP slope projection factor in [1, 2] (default 1.9)"),
    ("acoustic_threshold", "scheme", "jump size below which GRP uses the acoustic solver (default 0.01)"),
    ("output_dir", "output", "directory for CSV and plot files (default out)"),
    ("display_points", "output", "markers per curve in plots (default 66)"),
    ("plot", "output", "write gnuplot scripts: true | false (default true)"),
];

fn section_of(key: &str) -> Option<Section> {
    KEYS.iter().find(|(k, _, _)| *k == key).map(|(_, s, _)| match *s {
        "problem" => Section::Problem,
        "scheme" => Section::Scheme,
        _ => Section::Output,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputOptions {
    pub dir: PathBuf,
    pub display_points: usize,
    pub plot: bool,
}

impl Default for OutputOptions {
    fn default() -> Self {
        Self { dir: PathBuf::from("out"), display_points: DISPLAY_POINTS, plot: true }
    }
}

/// Fully resolved configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub problem: ProblemSpec,
    pub schemes: Vec<SchemeSpec>,
    pub cells: Vec<usize>,
    pub overrides: Overrides,
    pub output: OutputOptions,
}

/// Raw `key = value` entries, remembering where each came from.
#[derive(Debug, Clone, Default)]
pub struct RawConfig {
    entries: BTreeMap<String, (String, usize)>,
    path: PathBuf,
}

impl RawConfig {
    pub fn parse(text: &str, path: &Path) -> Result<Self, BenchError> {
        let mut raw = RawConfig { entries: BTreeMap::new(), path: path.to_path_buf() };
        let mut section = None;
        for (i, line) in text.lines().enumerate() {
            let lineno = i + 1;
            let err = |message: String| BenchError::Parse { path: path.to_path_buf(), line: lineno, message };
            let line = match line.find('#') {
                Some(k) => &line[..k],
                None => line,
            }
            .trim();
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| err(format!("unterminated section header `{line}`")))?.trim();
                section = Some(match name {
                    "problem" => Section::Problem,
                    "scheme" => Section::Scheme,
                    "output" => Section::Output,
                    other => return Err(err(format!("unknown section `[{other}]`"))),
                });
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, found `{line}`")))?;
            let (key, value) = (key.trim(), value.trim());
            if key.is_empty() {
                return Err(err("empty key".into()));
            }
            let home = section_of(key).ok_or_else(|| err(format!("unknown key `{key}`")))?;
            if let Some(s) = section {
                if s != home {
                    return Err(err(format!("key `{key}` belongs in [{}], not [{}]", home.name(), s.name())));
                }
            }
            if let Some((_, first)) = raw.entries.get(key) {
                return Err(err(format!("duplicate key `{key}` (first set on line {first})")));
            }
            raw.entries.insert(key.to_string(), (value.to_string(), lineno));
        }
        Ok(raw)
    }

    pub fn load(path: &Path) -> Result<Self, BenchError> {
        let text = fs::read_to_string(path).map_err(|e| BenchError::io(path, e))?;
        Self::parse(&text, path)
    }

    /// Sets or replaces a value (command-line flags win over the file).
    pub fn set(&mut self, key: &str, value: impl Into<String>) -> Result<(), BenchError> {
        if section_of(key).is_none() {
            return Err(BenchError::Validation { key: key.into(), message: "unknown key".into() });
        }
        self.entries.insert(key.to_string(), (value.into(), 0));
        Ok(())
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(|(v, _)| v.as_str())
    }

    fn value<T: FromStr>(&self, key: &str) -> Result<Option<T>, BenchError>
    where
        T::Err: std::fmt::Display,
    {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|e| BenchError::Validation { key: key.into(), message: format!("`{v}`: {e}") }))
            .transpose()
    }

    fn list<T: FromStr>(&self, key: &str) -> Result<Option<Vec<T>>, BenchError>
    where
        T::Err: std::fmt::Display,
    {
        let Some(v) = self.get(key) else { return Ok(None) };
        let items = v
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(|s| s.parse::<T>().map_err(|e| BenchError::Validation { key: key.into(), message: format!("`{s}`: {e}") }))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Some(items))
    }

    fn state(&self, key: &str) -> Result<Option<PrimitiveState>, BenchError> {
        let Some(v) = self.list::<f64>(key)? else { return Ok(None) };
        match v.as_slice() {
            [rho, u, p] => Ok(Some(PrimitiveState::new(*rho, *u, *p))),
            _ => Err(BenchError::Validation { key: key.into(), message: "expected three numbers `rho, u, p`".into() }),
        }
    }

    pub fn path(&self) -> &Path {
        &self.path
    }

    /// Applies defaults and validates every value.
    pub fn resolve(&self) -> Result<Config, BenchError> {
        let invalid = |key: &str, message: String| BenchError::Validation { key: key.into(), message };
        let gamma = self.value::<f64>("gamma")?.unwrap_or(1.4);
        if !(gamma > 1.0) {
            return Err(invalid("gamma", format!("{gamma} must exceed 1")));
        }
        let name = self.get("problem").unwrap_or("sod");
        let mut problem = ProblemSpec::by_name(name, gamma).map_err(|e| match e {
            BenchError::UnknownProblem(p) => invalid("problem", format!("unknown problem `{p}`")),
            other => other,
        })?;
        if let Some(t) = self.value::<f64>("t_end")? {
            problem.t_end = t;
        }
        if let Some(x) = self.value::<f64>("x_min")? {
            problem.x_min = x;
        }
        if let Some(x) = self.value::<f64>("x_max")? {
            problem.x_max = x;
        }
        if let Some(b) = self.value::<BoundaryPolicy>("boundary")? {
            problem.boundary = b;
        }
        let (x0_new, left_new, right_new, amp) =
            (self.value::<f64>("x0")?, self.state("left")?, self.state("right")?, self.value::<f64>("amplitude")?);
        match &mut problem.initial {
            InitialData::Riemann { left, right, x0 } => {
                if let Some(v) = x0_new {
                    *x0 = v;
                }
                if let Some(v) = left_new {
                    *left = v;
                }
                if let Some(v) = right_new {
                    *right = v;
                }
                if amp.is_some() {
                    return Err(invalid("amplitude", format!("not used by the {} problem", problem.name)));
                }
            }
            InitialData::SimpleWave(w) => {
                if let Some(a) = amp {
                    w.amplitude = a;
                }
                for (key, set) in [("x0", x0_new.is_some()), ("left", left_new.is_some()), ("right", right_new.is_some())] {
                    if set {
                        return Err(invalid(key, "only used by Riemann problems".into()));
                    }
                }
            }
        }
        problem.validate()?;

        let default_cells = match problem.name.as_str() {
            "leblanc_tangliu" => 300,
            "smooth" => 200,
            _ => 100,
        };
        let cells = self.list::<usize>("cells")?.unwrap_or_else(|| vec![default_cells]);
        if cells.is_empty() || cells.contains(&0) || cells.iter().any(|&n| n < 2) {
            return Err(invalid("cells", "cell counts must be at least 2".into()));
        }

        let names = self.list::<String>("scheme")?.unwrap_or_else(|| vec!["exact-godunov".into()]);
        let mut schemes = Vec::with_capacity(names.len());
        for name in &names {
            schemes.push(self.scheme(name)?);
        }

        let overrides = Overrides::default();

        let mut output = OutputOptions::default();
        if let Some(d) = self.get("output_dir") {
            output.dir = PathBuf::from(d);
        }
        if let Some(n) = self.value::<usize>("display_points")? {
            if n == 0 {
                return Err(invalid("display_points", "must be positive".into()));
            }
            output.display_points = n;
        }
        if let Some(p) = self.value::<bool>("plot")? {
            output.plot = p;
        }
        Ok(Config { problem, schemes, cells, overrides, output })
    }

    fn scheme(&self, name: &str) -> Result<SchemeSpec, BenchError> {
        let invalid = |key: &str, message: String| BenchError::Validation { key: key.into(), message };
        let mut spec = parse_scheme_name(name).map_err(|m| invalid("scheme", m))?;
        let mut layout_changed = false;
        if let Some(f) = self.value::<FluxSolver>("flux_solver")? {
            spec.flux_solver = f;
        }
        if let Some(r) = self.value::<Reconstruction>("reconstruction")? {
            spec.reconstruction = r;
            layout_changed = true;
        }
        if let Some(t) = self.value::<TimeIntegrator>("time_integrator")? {
            spec.time_integrator = t;
            layout_changed = true;
        }
        if layout_changed {
            spec.cfl = SchemeSpec::default_cfl(spec.reconstruction, spec.time_integrator);
        }
        if let Some(l) = self.value::<Limiter>("limiter")? {
            spec.limiter = l;
        }
        if let Some(c) = self.value::<f64>("cfl")? {
            spec.cfl = c;
        }
        if let Some(v) = self.get("efix_delta") {
            spec.efix_delta = match v {
                "off" | "none" => None,
                _ => Some(v.parse::<f64>().map_err(|e| invalid("efix_delta", format!("`{v}`: {e}")))?),
            };
        }
        if let Some(a) = self.value::<f64>("projection_alpha")? {
            spec.projection_alpha = a;
        }
        if let Some(a) = self.value::<f64>("acoustic_threshold")? {
            if !(a >= 0.0) {
                return Err(invalid("acoustic_threshold", format!("{a} must be non-negative")));
            }
            spec.acoustic_threshold = a;
        }
        spec.validate().map_err(|e| {
            let key = match spec.cfl {
                c if !(c > 0.0 && c < 1.0) => "cfl",
                _ if spec.efix_delta.is_some_and(|d| !(d >= 0.0)) => "efix_delta",
                _ if !(1.0..=2.0).contains(&spec.projection_alpha) => "projection_alpha",
                _ => "scheme",
            };
            invalid(key, e.to_string())
        })?;
        Ok(spec)
    }
}

/// Scheme shorthands.
///
/// `exact-godunov` (or `godunov`), `hllc` and `roe-efix` (or `roe`) are first
/// order; `muscl-<flux>` adds MUSCL reconstruction and Heun time stepping;
/// `grp-acoustic` and `grp-nonlinear` (or `grp`) are the one-step GRP schemes.
pub fn parse_scheme_name(name: &str) -> Result<SchemeSpec, String> {
    let flux = |s: &str| -> Result<FluxSolver, String> {
        match s {
            "godunov" => Ok(FluxSolver::ExactGodunov),
            "roe" => Ok(FluxSolver::RoeEfix),
            "grp" => Ok(FluxSolver::GrpNonlinear),
            other => other.parse::<FluxSolver>().map_err(|_| format!("unknown scheme `{name}`")),
        }
    };
    if let Some(rest) = name.strip_prefix("muscl-") {
        let f = flux(rest)?;
        if f.is_grp() {
            return Err(format!("`{name}`: GRP schemes already use MUSCL data; use `{}`", f));
        }
        return Ok(SchemeSpec::muscl_rk2(f));
    }
    let f = flux(name)?;
    Ok(if f.is_grp() { SchemeSpec::grp(f) } else { SchemeSpec::first_order(f) })
}

/// Reads and resolves a configuration file.
pub fn parse_config(path: &Path) -> Result<Config, BenchError> {
    RawConfig::load(path)?.resolve()
}
