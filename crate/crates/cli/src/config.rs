//! Line-based `key = value` run configuration with optional `[section]`
//! headers. Keys outside any section are accepted if they are known in some
//! section; inside a section they must belong to it. Unknown keys fail.

use std::collections::BTreeMap;
use std::path::PathBuf;

use lowmach::cases::CaseParams;
use lowmach::flux::{EntropyFixParams, FluxConfig, FluxScheme};
use lowmach::reconstruction::ReconMode;
use lowmach::time::{DtKind, ExplicitScheme, ImplicitScheme, JacobianMode, LinearPreconditioner, NewtonConfig, TimeStepPolicy};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid `{key}`: {reason}")]
    Validation { key: String, reason: String },
}

fn bad(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Validation { key: key.to_string(), reason: reason.into() }
}

const SECTIONS: &[(&str, &[&str])] = &[
    ("case", &["case", "mach", "mach_scale", "gamma", "gravity", "temperature", "rho0", "p0", "seed"]),
    ("grid", &["nx", "ny", "nz", "n_ghost"]),
    ("flux", &["scheme", "m_cut", "entropy_fix", "recon"]),
    ("time", &["stepper", "t_end", "dt_policy", "cfl", "dt", "mach_scaled", "max_steps"]),
    (
        "newton",
        &["tol_rel", "tol_abs", "max_iters", "linear_tol", "jacobian", "preconditioner", "restart", "max_linear_iters"],
    ),
    ("output", &["dir", "cadence"]),
];

fn section_of(key: &str) -> Option<&'static str> {
    SECTIONS.iter().find(|(_, keys)| keys.contains(&key)).map(|(s, _)| *s)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum StepperKind {
    Explicit(ExplicitScheme),
    Implicit(ImplicitScheme),
}

impl StepperKind {
    pub fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "forward_euler" => Self::Explicit(ExplicitScheme::ForwardEuler),
            "ssprk2" => Self::Explicit(ExplicitScheme::Ssprk2),
            "backward_euler" => Self::Implicit(ImplicitScheme::BackwardEuler),
            "esdirk23" => Self::Implicit(ImplicitScheme::Esdirk23),
            _ => return None,
        })
    }

    pub fn is_implicit(&self) -> bool {
        matches!(self, Self::Implicit(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub case: String,
    pub case_params: CaseParams,
    pub flux: FluxConfig,
    pub recon: ReconMode,
    pub stepper: StepperKind,
    pub policy: TimeStepPolicy,
    pub newton: NewtonConfig,
    /// `None` picks spectral on fully periodic grids and block Jacobi
    /// otherwise.
    pub preconditioner: Option<LinearPreconditioner>,
    pub t_end: f64,
    /// Steps between field dumps; the final state is always dumped.
    pub cadence: usize,
    pub max_steps: Option<usize>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

/// Raw `key → (value, line)` pairs after syntax checks.
fn tokenize(text: &str) -> Result<BTreeMap<String, (String, usize)>, ConfigError> {
    let mut out = BTreeMap::new();
    let mut section: Option<String> = None;
    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let s = raw.split('#').next().unwrap_or("").trim();
        if s.is_empty() {
            continue;
        }
        if let Some(rest) = s.strip_prefix('[') {
            let name = rest
                .strip_suffix(']')
                .ok_or_else(|| ConfigError::Parse { line, msg: "unterminated section header".into() })?
                .trim();
            if !SECTIONS.iter().any(|(n, _)| *n == name) {
                return Err(ConfigError::Parse { line, msg: format!("unknown section [{name}]") });
            }
            section = Some(name.to_string());
            continue;
        }
        let (k, v) = s.split_once('=').ok_or_else(|| ConfigError::Parse { line, msg: "expected `key = value`".into() })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Parse { line, msg: "empty key or value".into() });
        }
        match (section_of(k), &section) {
            (None, _) => return Err(bad(k, format!("unknown key (line {line})"))),
            (Some(home), Some(cur)) if home != cur => {
                return Err(bad(k, format!("belongs in [{home}], not [{cur}] (line {line})")))
            }
            _ => {}
        }
        if out.insert(k.to_string(), (v.to_string(), line)).is_some() {
            return Err(ConfigError::Parse { line, msg: format!("duplicate key `{k}`") });
        }
    }
    Ok(out)
}

struct Fields(BTreeMap<String, (String, usize)>);

impl Fields {
    fn str(&self, k: &str) -> Option<&str> {
        self.0.get(k).map(|(v, _)| v.as_str())
    }

    fn num<T: std::str::FromStr>(&self, k: &str) -> Result<Option<T>, ConfigError> {
        self.str(k).map(|v| v.parse::<T>().map_err(|_| bad(k, format!("cannot parse `{v}`")))).transpose()
    }

    fn f64_or(&self, k: &str, d: f64) -> Result<f64, ConfigError> {
        Ok(self.num(k)?.unwrap_or(d))
    }

    fn pick<T>(&self, k: &str, parse: impl Fn(&str) -> Option<T>, d: T) -> Result<T, ConfigError> {
        match self.str(k) {
            None => Ok(d),
            Some(v) => parse(v).ok_or_else(|| bad(k, format!("unrecognized value `{v}`"))),
        }
    }
}

fn positive(k: &str, v: f64) -> Result<f64, ConfigError> {
    if v > 0.0 && v.is_finite() {
        Ok(v)
    } else {
        Err(bad(k, "must be a positive number"))
    }
}

pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let f = Fields(tokenize(text)?);

    let case = f.str("case").ok_or_else(|| bad("case", "required"))?.to_string();
    let t_end = positive("t_end", f.num("t_end")?.ok_or_else(|| bad("t_end", "required"))?)?;

    let defaults = CaseParams::default();
    let mut n_cells = Vec::new();
    for (axis, k) in ["nx", "ny", "nz"].iter().enumerate() {
        if let Some(n) = f.num::<usize>(k)? {
            if n_cells.len() != axis {
                return Err(bad(k, "cell counts must be given in x, y, z order"));
            }
            if n == 0 {
                return Err(bad(k, "must be at least 1"));
            }
            n_cells.push(n);
        }
    }
    let case_params = CaseParams {
        mach: positive("mach", f.f64_or("mach", defaults.mach)?)?,
        mach_scale: positive("mach_scale", f.f64_or("mach_scale", defaults.mach_scale)?)?,
        n_cells,
        gamma: f.num("gamma")?,
        gravity: f.f64_or("gravity", defaults.gravity)?,
        temperature: positive("temperature", f.f64_or("temperature", defaults.temperature)?)?,
        rho0: positive("rho0", f.f64_or("rho0", defaults.rho0)?)?,
        p0: positive("p0", f.f64_or("p0", defaults.p0)?)?,
        n_ghost: f.num("n_ghost")?.unwrap_or(defaults.n_ghost),
    };
    if let Some(g) = case_params.gamma {
        if !(g > 1.0) {
            return Err(bad("gamma", "must exceed 1"));
        }
    }

    let scheme = f.pick("scheme", FluxScheme::parse, FluxScheme::RoeMiczek)?;
    let mut flux = FluxConfig::new(scheme);
    if let Some(m) = f.num("m_cut")? {
        flux = flux.with_m_cut(positive("m_cut", m)?);
    }
    if let Some(e) = f.num::<f64>("entropy_fix")? {
        if !(e >= 0.0) {
            return Err(bad("entropy_fix", "must be non-negative"));
        }
        flux = flux.with_entropy_fix(EntropyFixParams { eps_rel: e });
    }
    let recon = f.pick("recon", ReconMode::parse, ReconMode::LinearMinmod)?;

    let stepper = f.pick("stepper", StepperKind::parse, StepperKind::Explicit(ExplicitScheme::Ssprk2))?;
    let kind = f.pick(
        "dt_policy",
        |s| match s {
            "acoustic" => Some(DtKind::AcousticCfl),
            "advective" => Some(DtKind::AdvectiveCfl),
            "fixed" => Some(DtKind::Fixed),
            _ => None,
        },
        if stepper.is_implicit() { DtKind::AdvectiveCfl } else { DtKind::AcousticCfl },
    )?;
    let cfl = positive("cfl", f.f64_or("cfl", if stepper.is_implicit() { 0.8 } else { 0.5 })?)?;
    let mut policy = match kind {
        DtKind::AcousticCfl => TimeStepPolicy::acoustic(cfl),
        DtKind::AdvectiveCfl => TimeStepPolicy::advective(cfl),
        DtKind::Fixed => TimeStepPolicy::fixed(positive("dt", f.num("dt")?.ok_or_else(|| bad("dt", "required by dt_policy = fixed"))?)?),
    };
    if kind != DtKind::Fixed && f.str("dt").is_some() {
        return Err(bad("dt", "only used with dt_policy = fixed"));
    }
    if f.pick("mach_scaled", |s| s.parse::<bool>().ok(), false)? {
        policy = policy.mach_scaled();
    }

    let d = NewtonConfig::default();
    let newton = NewtonConfig {
        tol_rel: f.f64_or("tol_rel", d.tol_rel)?,
        tol_abs: f.f64_or("tol_abs", d.tol_abs)?,
        max_iters: f.num("max_iters")?.unwrap_or(d.max_iters),
        linear_tol: f.f64_or("linear_tol", d.linear_tol)?,
        jacobian_mode: f.pick(
            "jacobian",
            |s| match s {
                "colored" => Some(JacobianMode::FiniteDifferenceColored),
                "dense" => Some(JacobianMode::DenseFD),
                "matrix_free" => Some(JacobianMode::MatrixFree),
                _ => None,
            },
            d.jacobian_mode,
        )?,
        restart: f.num("restart")?.unwrap_or(d.restart),
        max_linear_iters: f.num("max_linear_iters")?.unwrap_or(d.max_linear_iters),
        ..d
    };
    let preconditioner = f.pick(
        "preconditioner",
        |s| match s {
            "auto" => Some(None),
            "none" => Some(Some(LinearPreconditioner::None)),
            "block_jacobi" => Some(Some(LinearPreconditioner::BlockJacobi)),
            "spectral" => Some(Some(LinearPreconditioner::Spectral)),
            _ => None,
        },
        None,
    )?;
    NewtonConfig { preconditioner: preconditioner.unwrap_or(LinearPreconditioner::Spectral), ..newton }
        .validate()
        .map_err(|e| bad("newton", e.to_string()))?;

    let cadence = f.num::<usize>("cadence")?.unwrap_or(100);
    if cadence == 0 {
        return Err(bad("cadence", "must be at least 1"));
    }
    let max_steps = f.num::<usize>("max_steps")?;
    if max_steps == Some(0) {
        return Err(bad("max_steps", "must be at least 1"));
    }

    Ok(RunConfig {
        case,
        case_params,
        flux,
        recon,
        stepper,
        policy,
        newton,
        preconditioner,
        t_end,
        cadence,
        max_steps,
        output_dir: PathBuf::from(f.str("dir").unwrap_or("output")),
        seed: f.num("seed")?.unwrap_or(0),
    })
}
