//! Configuration-driven sweeps over (site, time) grids.

mod config;
mod csv;
mod selftest;

pub use config::{Engine, Grid, Measure, ScenarioConfig, ScenarioKind, MAX_CELLS};
pub use csv::{format_value, write_csv};
pub use selftest::{compare, selftest, SelftestCheck};

use rayon::prelude::*;
use std::f64::consts::PI;

use crate::error::Error;
use crate::groundstate::GroundStateContraction;
use crate::isotropic::{self, phi_state_density, wavepacket, SingleParticleState};
use crate::measures::{
    bell_fidelities, ckw_residual, concurrence_wootters, entropy_vn, one_tangle, rho2_from_correlators, tangle_deviation,
    CorrelatorBundle, TwoSiteDensity,
};
use crate::model::{light_cone_radius, ModelParams};
use crate::oracle::{Oracle, Preparation, Register};
use crate::pfaffian::{correlator_bundle, gzz_and_magnetization};
use crate::vacuum::{bell_contractions_with_phase, vacuum_contractions, ContractionSet};

#[derive(Debug, thiserror::Error)]
pub enum ScenarioError {
    #[error("config error in `{field}`: {msg}")]
    Config { field: String, msg: String },
    #[error("engine cannot run this scenario: {0}")]
    Capability(String),
    #[error("numerical failure: {0}")]
    Numerical(#[from] Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl ScenarioError {
    /// Process exit status: 2 for configuration problems, 3 for numerical failures.
    pub fn exit_code(&self) -> i32 {
        match self {
            ScenarioError::Config { .. } | ScenarioError::Capability(_) => 2,
            ScenarioError::Numerical(_) => 3,
            ScenarioError::Io(_) => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Row {
    pub measure: String,
    pub x: i64,
    pub t: f64,
    pub value: f64,
}

/// Rows ordered by `(measure, x, t)`.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct GridResult {
    pub rows: Vec<Row>,
}

impl GridResult {
    pub fn get(&self, measure: &str, x: i64, t: f64) -> Option<f64> {
        self.rows.iter().find(|r| r.measure == measure && r.x == x && r.t == t).map(|r| r.value)
    }

    pub fn series(&self, measure: &str, x: i64) -> Vec<(f64, f64)> {
        self.rows.iter().filter(|r| r.measure == measure && r.x == x).map(|r| (r.t, r.value)).collect()
    }
}

type NumResult<T> = std::result::Result<T, Error>;

/// State of the chain at one instant, as seen by the measures.
trait Snapshot: Sync {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>>;
    fn mz(&self, n: i64) -> NumResult<f64>;
    /// Sites entering sums over partners of `n`.
    fn partners(&self, n: i64) -> Vec<i64>;

    fn concurrence(&self, n: i64, m: i64) -> NumResult<f64> {
        concurrence_wootters(&self.rho2(n, m)?)
    }

    fn total_concurrence(&self, n: i64) -> NumResult<f64> {
        self.partners(n).into_iter().map(|m| self.concurrence(n, m)).sum()
    }

    fn ckw_residual(&self, n: i64) -> NumResult<f64> {
        let cs = self.partners(n).into_iter().map(|m| self.concurrence(n, m)).collect::<NumResult<Vec<_>>>()?;
        Ok(ckw_residual(one_tangle(self.mz(n)?), &cs))
    }
}

fn around(n: i64, range: i64) -> Vec<i64> {
    (n - range..=n + range).filter(|&m| m != n).collect()
}

struct Fermionic {
    cs: ContractionSet<f64>,
    range: i64,
}

impl Snapshot for Fermionic {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>> {
        let b = if n < m {
            correlator_bundle(n, m, &self.cs)?
        } else {
            let b = correlator_bundle(m, n, &self.cs)?;
            CorrelatorBundle { g_xy: b.g_yx, g_yx: b.g_xy, mz_l: b.mz_m, mz_m: b.mz_l, ..b }
        };
        rho2_from_correlators(&b)
    }

    fn mz(&self, n: i64) -> NumResult<f64> {
        Ok(gzz_and_magnetization(n, n + 1, &self.cs)?.1)
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        around(n, self.range)
    }
}

/// Vacuum at `gamma = 0`, which never changes.
struct StaticVacuum {
    range: i64,
}

impl Snapshot for StaticVacuum {
    fn rho2(&self, _: i64, _: i64) -> NumResult<TwoSiteDensity<f64>> {
        rho2_from_correlators(&CorrelatorBundle { g_zz: 0.25, mz_l: -0.5, mz_m: -0.5, ..Default::default() })
    }

    fn mz(&self, _: i64) -> NumResult<f64> {
        Ok(-0.5)
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        around(n, self.range)
    }
}

struct Wavepacket(SingleParticleState<f64>);

impl Snapshot for Wavepacket {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>> {
        Ok(self.0.rho2(n, m))
    }

    fn mz(&self, n: i64) -> NumResult<f64> {
        Ok(self.0.occupation(n) - 0.5)
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        self.0.window().filter(|&m| m != n).collect()
    }

    fn concurrence(&self, n: i64, m: i64) -> NumResult<f64> {
        isotropic::concurrence_psi(&self.0, n, m)
    }

    fn total_concurrence(&self, n: i64) -> NumResult<f64> {
        Ok(isotropic::total_concurrence(&self.0, n))
    }

    fn ckw_residual(&self, n: i64) -> NumResult<f64> {
        let (tau, sum) = isotropic::ckw_pair(&self.0, n);
        Ok(tau - sum)
    }
}

struct PhiPair {
    i: i64,
    j: i64,
    phi: f64,
    t: f64,
    lambda: f64,
}

impl Snapshot for PhiPair {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>> {
        phi_state_density(self.i, self.j, self.phi, n, m, self.t, self.lambda)
    }

    fn mz(&self, n: i64) -> NumResult<f64> {
        Ok(self.rho2(n, n + 1)?.magnetizations().0)
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        let r = light_cone_radius(self.lambda, self.t);
        (self.i.min(self.j).min(n) - r..=self.i.max(self.j).max(n) + r).filter(|&m| m != n).collect()
    }
}

struct GroundState<'a> {
    table: &'a GroundStateContraction<f64>,
    range: i64,
}

impl Snapshot for GroundState<'_> {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>> {
        rho2_from_correlators(&self.table.bundle((m - n).abs())?)
    }

    fn mz(&self, _: i64) -> NumResult<f64> {
        Ok(self.table.get(0)? / 2.0)
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        around(n, self.range)
    }
}

struct Exact {
    reg: Register,
    sites: i64,
}

impl Snapshot for Exact {
    fn rho2(&self, n: i64, m: i64) -> NumResult<TwoSiteDensity<f64>> {
        self.reg.rho2(n, m)
    }

    fn mz(&self, n: i64) -> NumResult<f64> {
        Ok(self.reg.mz(n))
    }

    fn partners(&self, n: i64) -> Vec<i64> {
        (n + 1..n + self.sites).collect()
    }
}

/// Per-run state shared by all time slices.
enum Context {
    Analytic { params: ModelParams<f64>, gs: Option<GroundStateContraction<f64>> },
    Oracle { oracle: Oracle, start: Register, reference: Register, stationary: bool },
}

fn bell_phase(kind: ScenarioKind) -> Option<(i64, i64, f64)> {
    match kind {
        ScenarioKind::SingletOnVacuum { i, j } => Some((i, j, PI)),
        ScenarioKind::PsiBell { i, j, phi } => Some((i, j, phi)),
        _ => None,
    }
}

impl Context {
    fn new(cfg: &ScenarioConfig, reach: i64) -> Result<Self, ScenarioError> {
        match cfg.engine {
            Engine::Analytic => {
                let params = ModelParams::infinite(cfg.lambda, cfg.gamma)?;
                let gs = match cfg.scenario {
                    ScenarioKind::GroundStateEquilibrium => Some(GroundStateContraction::new(reach + 1, &params)?),
                    _ => None,
                };
                Ok(Context::Analytic { params, gs })
            }
            Engine::Oracle { sites } => {
                let oracle = Oracle::new(&ModelParams::ring(cfg.lambda, cfg.gamma, sites)?)?;
                let prep = match cfg.scenario {
                    ScenarioKind::VacuumOnly => Preparation::Vacuum,
                    ScenarioKind::SingletOnVacuum { i, j } => Preparation::PsiBell { i, j, phi: PI },
                    ScenarioKind::PsiBell { i, j, phi } => Preparation::PsiBell { i, j, phi },
                    ScenarioKind::PhiBell { i, j, phi } => Preparation::PhiBell { i, j, phi },
                    ScenarioKind::GroundStateEquilibrium => Preparation::GroundState,
                    ScenarioKind::SingletKnittedGs { i, j } => Preparation::SingletKnittedGs { i, j },
                };
                let gs_reference = matches!(cfg.scenario, ScenarioKind::GroundStateEquilibrium | ScenarioKind::SingletKnittedGs { .. });
                let reference = oracle.prepare(if gs_reference { &Preparation::GroundState } else { &Preparation::Vacuum })?;
                let start = oracle.prepare(&prep)?;
                let stationary = matches!(cfg.scenario, ScenarioKind::GroundStateEquilibrium);
                Ok(Context::Oracle { oracle, start, reference, stationary })
            }
        }
    }

    /// State at time `t` and the reference magnetization used by `tangle_deviation`.
    fn snapshot(&self, cfg: &ScenarioConfig, t: f64, window: (i64, i64)) -> NumResult<(Box<dyn Snapshot + '_>, f64)> {
        let range = cfg.partner_range;
        match self {
            Context::Analytic { params, gs } => {
                let p = params;
                let gamma_zero = cfg.gamma == 0.0;
                let vacuum_mz = || -> NumResult<f64> {
                    if gamma_zero {
                        Ok(-0.5)
                    } else {
                        Ok(gzz_and_magnetization(0, 1, &vacuum_contractions(t, 0..=1, p)?)?.1)
                    }
                };
                let win = window.0..=window.1;
                match cfg.scenario {
                    ScenarioKind::GroundStateEquilibrium => {
                        let table = gs.as_ref().expect("ground-state table built with the context");
                        let snap = GroundState { table, range };
                        let mz = snap.mz(0)?;
                        Ok((Box::new(snap), mz))
                    }
                    ScenarioKind::VacuumOnly if gamma_zero => Ok((Box::new(StaticVacuum { range }), -0.5)),
                    ScenarioKind::VacuumOnly => {
                        let snap = Fermionic { cs: vacuum_contractions(t, win, p)?, range };
                        let mz = snap.mz(0)?;
                        Ok((Box::new(snap), mz))
                    }
                    ScenarioKind::PhiBell { i, j, phi } => Ok((Box::new(PhiPair { i, j, phi, t, lambda: cfg.lambda }), -0.5)),
                    kind => {
                        let (i, j, phi) = bell_phase(kind).ok_or_else(|| Error::Unsupported(format!("{kind:?} on the analytic engine")))?;
                        if gamma_zero {
                            Ok((Box::new(Wavepacket(wavepacket(i, j, phi, t, cfg.lambda)?)), -0.5))
                        } else {
                            let cs = bell_contractions_with_phase(t, win, p, i, j, phi)?;
                            Ok((Box::new(Fermionic { cs, range }), vacuum_mz()?))
                        }
                    }
                }
            }
            Context::Oracle { oracle, start, reference, stationary } => {
                let sites = oracle.n_sites() as i64;
                let reg = if *stationary { start.clone() } else { oracle.evolve(start, t) };
                let mz = if *stationary { reference.mz(0) } else { oracle.evolve(reference, t).mz(0) };
                Ok((Box::new(Exact { reg, sites }), mz))
            }
        }
    }
}

fn evaluate(snap: &dyn Snapshot, measure: Measure, x: i64, ref_mz: f64) -> NumResult<Vec<f64>> {
    Ok(match measure {
        Measure::Concurrence(d) => vec![snap.concurrence(x, x + d)?],
        Measure::OneTangle => vec![one_tangle(snap.mz(x)?)],
        Measure::Entropy2 => vec![entropy_vn(&snap.rho2(x, x + 1)?)?],
        Measure::BellFidelities => bell_fidelities(&snap.rho2(x, x + 1)?).as_array().to_vec(),
        Measure::TangleDeviation => {
            let det = |mz: f64| 0.25 - mz * mz;
            let (delta, rel) = tangle_deviation(det(snap.mz(x)?), det(ref_mz));
            vec![delta, rel]
        }
        Measure::TotalConcurrence => vec![snap.total_concurrence(x)?],
        Measure::CkwResidual => vec![snap.ckw_residual(x)?],
    })
}

/// Evaluates every requested measure on every grid cell.
///
/// Cells are computed in parallel; the output order is `(measure, x, t)` whatever the schedule.
pub fn run(cfg: &ScenarioConfig) -> Result<GridResult, ScenarioError> {
    cfg.validate()?;
    let span = cfg.measures.iter().map(Measure::span).max().unwrap_or(0);
    let pairs = cfg.measures.iter().any(|m| matches!(m, Measure::TotalConcurrence | Measure::CkwResidual));
    let reach = span.max(if pairs { cfg.partner_range } else { 0 });
    let window = (cfg.grid.x_min - reach, cfg.grid.x_max + reach.max(1));
    let ctx = Context::new(cfg, reach)?;
    let times = cfg.grid.times();
    let sites: Vec<i64> = cfg.grid.sites().collect();

    let slices: Vec<Vec<Row>> = times
        .par_iter()
        .map(|&t| -> NumResult<Vec<Row>> {
            let (snap, ref_mz) = ctx.snapshot(cfg, t, window)?;
            let snap = &*snap;
            let per_site: Vec<Vec<Row>> = sites
                .par_iter()
                .map(|&x| -> NumResult<Vec<Row>> {
                    let mut rows = Vec::new();
                    for &m in &cfg.measures {
                        for (name, value) in m.names().into_iter().zip(evaluate(snap, m, x, ref_mz)?) {
                            if !value.is_finite() {
                                return Err(Error::Nonphysical(value));
                            }
                            rows.push(Row { measure: name, x, t, value });
                        }
                    }
                    Ok(rows)
                })
                .collect::<NumResult<_>>()?;
            Ok(per_site.into_iter().flatten().collect())
        })
        .collect::<NumResult<_>>()?;

    let mut rows: Vec<Row> = slices.into_iter().flatten().collect();
    rows.sort_by(|a, b| a.measure.cmp(&b.measure).then(a.x.cmp(&b.x)).then(a.t.total_cmp(&b.t)));
    rows.dedup_by(|a, b| a.measure == b.measure && a.x == b.x && a.t == b.t);
    Ok(GridResult { rows })
}
