//! Flat `section.key = value` scenario files.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;

use super::ScenarioError;

/// Initial state of a run.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ScenarioKind {
    VacuumOnly,
    SingletOnVacuum { i: i64, j: i64 },
    PsiBell { i: i64, j: i64, phi: f64 },
    PhiBell { i: i64, j: i64, phi: f64 },
    GroundStateEquilibrium,
    SingletKnittedGs { i: i64, j: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Engine {
    Analytic,
    Oracle { sites: usize },
}

/// Quantity sampled on every grid cell; pair measures use the pair `(x, x + d)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Measure {
    Concurrence(i64),
    OneTangle,
    Entropy2,
    BellFidelities,
    TangleDeviation,
    TotalConcurrence,
    CkwResidual,
}

impl Measure {
    /// Column names this measure contributes to the output.
    pub fn names(&self) -> Vec<String> {
        match self {
            Measure::Concurrence(d) => vec![format!("concurrence({d})")],
            Measure::OneTangle => vec!["one_tangle".into()],
            Measure::Entropy2 => vec!["entropy2".into()],
            Measure::BellFidelities => ["fidelity_psi_minus", "fidelity_psi_plus", "fidelity_phi_minus", "fidelity_phi_plus"]
                .map(String::from)
                .to_vec(),
            Measure::TangleDeviation => vec!["tangle_deviation".into(), "tangle_deviation_rel".into()],
            Measure::TotalConcurrence => vec!["total_concurrence".into()],
            Measure::CkwResidual => vec!["ckw_residual".into()],
        }
    }

    fn parse(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if let Some(arg) = s.strip_prefix("concurrence(").and_then(|r| r.strip_suffix(')')) {
            let d: i64 = arg.trim().parse().map_err(|_| format!("bad distance in `{s}`"))?;
            if d < 1 {
                return Err(format!("distance must be >= 1 in `{s}`"));
            }
            return Ok(Measure::Concurrence(d));
        }
        Ok(match s {
            "one_tangle" => Measure::OneTangle,
            "entropy2" => Measure::Entropy2,
            "bell_fidelities" => Measure::BellFidelities,
            "tangle_deviation" => Measure::TangleDeviation,
            "total_concurrence" => Measure::TotalConcurrence,
            "ckw_residual" => Measure::CkwResidual,
            _ => return Err(format!("unknown measure `{s}`")),
        })
    }

    /// Largest pair distance this measure reads from a single anchor.
    pub(crate) fn span(&self) -> i64 {
        match self {
            Measure::Concurrence(d) => *d,
            Measure::Entropy2 | Measure::BellFidelities => 1,
            _ => 0,
        }
    }
}

impl fmt::Display for Measure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Measure::Concurrence(d) => write!(f, "concurrence({d})"),
            Measure::OneTangle => f.write_str("one_tangle"),
            Measure::Entropy2 => f.write_str("entropy2"),
            Measure::BellFidelities => f.write_str("bell_fidelities"),
            Measure::TangleDeviation => f.write_str("tangle_deviation"),
            Measure::TotalConcurrence => f.write_str("total_concurrence"),
            Measure::CkwResidual => f.write_str("ckw_residual"),
        }
    }
}

/// Integer sites `x_min..=x_max` times `t_min, t_min + dt, ..` up to `t_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    pub x_min: i64,
    pub x_max: i64,
    pub t_min: f64,
    pub t_max: f64,
    pub dt: f64,
}

impl Grid {
    pub fn sites(&self) -> std::ops::RangeInclusive<i64> {
        self.x_min..=self.x_max
    }

    pub fn times(&self) -> Vec<f64> {
        let steps = ((self.t_max - self.t_min) / self.dt + 1e-9).floor() as usize;
        (0..=steps).map(|k| self.t_min + k as f64 * self.dt).collect()
    }

    pub fn cells(&self) -> usize {
        (self.x_max - self.x_min + 1) as usize * self.times().len()
    }
}

pub const MAX_CELLS: usize = 10_000_000;

#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioConfig {
    pub lambda: f64,
    pub gamma: f64,
    pub scenario: ScenarioKind,
    pub grid: Grid,
    pub measures: Vec<Measure>,
    pub engine: Engine,
    /// Partners on either side summed by `total_concurrence` and `ckw_residual` on the
    /// Pfaffian and ground-state paths; the other paths sum over the whole light cone or ring.
    pub partner_range: i64,
}

fn cfg_err(field: &str, msg: impl Into<String>) -> ScenarioError {
    ScenarioError::Config { field: field.into(), msg: msg.into() }
}

struct Fields(BTreeMap<String, (usize, String)>);

impl Fields {
    fn take(&mut self, key: &str) -> Option<String> {
        self.0.remove(key).map(|(_, v)| v)
    }

    fn required(&mut self, key: &str) -> Result<String, ScenarioError> {
        self.take(key).ok_or_else(|| cfg_err(key, "missing"))
    }

    fn number<N: std::str::FromStr>(&mut self, key: &str, default: Option<N>) -> Result<N, ScenarioError> {
        match self.take(key) {
            Some(v) => v.parse().map_err(|_| cfg_err(key, format!("cannot parse `{v}`"))),
            None => default.ok_or_else(|| cfg_err(key, "missing")),
        }
    }
}

impl ScenarioConfig {
    /// Parses and validates a scenario file.
    pub fn parse(text: &str) -> Result<Self, ScenarioError> {
        let cfg = Self::read(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Parses a scenario file without checking cross-field invariants, so callers can
    /// adjust it (e.g. switch engines) before [`ScenarioConfig::validate`].
    ///
    /// `#` starts a comment; every other non-blank line is `section.key = value`.
    pub fn read(text: &str) -> Result<Self, ScenarioError> {
        let mut map = BTreeMap::new();
        for (no, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| cfg_err(&format!("line {}", no + 1), "expected `section.key = value`"))?;
            let key = key.trim();
            let parts: Vec<&str> = key.split('.').collect();
            if parts.len() != 2 || parts.iter().any(|p| p.is_empty()) {
                return Err(cfg_err(key, "keys must have the form `section.key`"));
            }
            if let Some((prev, _)) = map.insert(key.to_string(), (no + 1, value.trim().to_string())) {
                return Err(cfg_err(key, format!("duplicate key (first on line {prev})")));
            }
        }
        let mut f = Fields(map);
        let cfg = Self::from_fields(&mut f)?;
        if let Some((key, (line, _))) = f.0.into_iter().next() {
            return Err(cfg_err(&key, format!("unknown key on line {line}")));
        }
        Ok(cfg)
    }

    fn from_fields(f: &mut Fields) -> Result<Self, ScenarioError> {
        let lambda = f.number("model.lambda", None)?;
        let gamma = f.number("model.gamma", None)?;
        let kind = f.required("scenario.kind")?;
        let scenario = match kind.as_str() {
            "vacuum_only" => ScenarioKind::VacuumOnly,
            "singlet_on_vacuum" => ScenarioKind::SingletOnVacuum { i: f.number("scenario.i", None)?, j: f.number("scenario.j", None)? },
            "psi_bell" => ScenarioKind::PsiBell {
                i: f.number("scenario.i", None)?,
                j: f.number("scenario.j", None)?,
                phi: f.number("scenario.phi", Some(PI))?,
            },
            "phi_bell" => ScenarioKind::PhiBell {
                i: f.number("scenario.i", None)?,
                j: f.number("scenario.j", None)?,
                phi: f.number("scenario.phi", Some(0.0))?,
            },
            "ground_state_equilibrium" => ScenarioKind::GroundStateEquilibrium,
            "singlet_knitted_gs" => ScenarioKind::SingletKnittedGs { i: f.number("scenario.i", None)?, j: f.number("scenario.j", None)? },
            other => return Err(cfg_err("scenario.kind", format!("unknown scenario `{other}`"))),
        };
        let grid = Grid {
            x_min: f.number("grid.x_min", None)?,
            x_max: f.number("grid.x_max", None)?,
            t_min: f.number("grid.t_min", Some(0.0))?,
            t_max: f.number("grid.t_max", None)?,
            dt: f.number("grid.dt", None)?,
        };
        let measures = f
            .required("measures.list")?
            .split(',')
            .filter(|s| !s.trim().is_empty())
            .map(Measure::parse)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|m| cfg_err("measures.list", m))?;
        let partner_range = f.number("measures.partner_range", Some(6))?;
        let engine = match f.take("engine.kind").as_deref() {
            None | Some("analytic") => Engine::Analytic,
            Some("oracle") => Engine::Oracle { sites: f.number("engine.sites", Some(12))? },
            Some(other) => return Err(cfg_err("engine.kind", format!("expected `analytic` or `oracle`, got `{other}`"))),
        };
        if engine == Engine::Analytic && f.take("engine.sites").is_some() {
            return Err(cfg_err("engine.sites", "only meaningful with the oracle engine"));
        }
        Ok(Self { lambda, gamma, scenario, grid, measures, engine, partner_range })
    }

    /// Checks every invariant that does not need a numerical run.
    pub fn validate(&self) -> Result<(), ScenarioError> {
        if !self.lambda.is_finite() || self.lambda < 0.0 {
            return Err(cfg_err("model.lambda", "must be finite and >= 0"));
        }
        if !self.gamma.is_finite() || !(0.0..=1.0).contains(&self.gamma) {
            return Err(cfg_err("model.gamma", "must lie in [0, 1]"));
        }
        let g = &self.grid;
        if !(g.dt > 0.0) || !g.dt.is_finite() {
            return Err(cfg_err("grid.dt", "must be > 0"));
        }
        if g.x_min > g.x_max {
            return Err(cfg_err("grid.x_max", "must be >= grid.x_min"));
        }
        if !(g.t_min >= 0.0) || !(g.t_max >= g.t_min) || !g.t_max.is_finite() {
            return Err(cfg_err("grid.t_max", "need 0 <= t_min <= t_max"));
        }
        if g.cells() > MAX_CELLS {
            return Err(cfg_err("grid", format!("{} cells exceed the cap of {MAX_CELLS}", g.cells())));
        }
        if self.measures.is_empty() {
            return Err(cfg_err("measures.list", "at least one measure is required"));
        }
        if self.partner_range < 1 {
            return Err(cfg_err("measures.partner_range", "must be >= 1"));
        }
        match self.scenario {
            ScenarioKind::SingletOnVacuum { i, j }
            | ScenarioKind::PsiBell { i, j, .. }
            | ScenarioKind::PhiBell { i, j, .. }
            | ScenarioKind::SingletKnittedGs { i, j } => {
                if i == j {
                    return Err(cfg_err("scenario.j", "Bell sites must differ"));
                }
            }
            _ => {}
        }
        match self.engine {
            Engine::Oracle { sites } => {
                if !(2..=12).contains(&sites) {
                    return Err(cfg_err("engine.sites", format!("oracle rings need 2..=12 sites, got {sites}")));
                }
                if let ScenarioKind::SingletKnittedGs { i, j } | ScenarioKind::SingletOnVacuum { i, j } | ScenarioKind::PsiBell { i, j, .. } | ScenarioKind::PhiBell { i, j, .. } = self.scenario {
                    if (i - j).rem_euclid(sites as i64) == 0 {
                        return Err(cfg_err("scenario.j", "Bell sites coincide on the ring"));
                    }
                }
            }
            Engine::Analytic => {
                if let ScenarioKind::SingletKnittedGs { .. } = self.scenario {
                    return Err(ScenarioError::Capability("singlet_knitted_gs needs the oracle engine".into()));
                }
                if let ScenarioKind::PhiBell { .. } = self.scenario {
                    if self.gamma != 0.0 {
                        return Err(ScenarioError::Capability("phi_bell with the analytic engine is only available at gamma = 0".into()));
                    }
                }
            }
        }
        Ok(())
    }

    /// Same run with a different engine; the oracle keeps the configured ring size or uses 12.
    pub fn with_engine(&self, engine: Engine) -> Self {
        Self { engine, ..self.clone() }
    }
}
