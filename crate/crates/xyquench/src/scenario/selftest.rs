//! Analytic engine against the 12-site oracle on short times.

use super::{run, Engine, GridResult, ScenarioConfig, ScenarioError};

#[derive(Debug, Clone, PartialEq)]
pub struct SelftestCheck {
    pub name: String,
    pub cells: usize,
    pub max_diff: f64,
    pub tolerance: f64,
}

impl SelftestCheck {
    pub fn passed(&self) -> bool {
        self.max_diff <= self.tolerance
    }
}

/// Largest absolute difference between two runs over the same grid.
pub fn compare(a: &GridResult, b: &GridResult) -> Result<f64, ScenarioError> {
    if a.rows.len() != b.rows.len() {
        return Err(ScenarioError::Capability(format!("grids differ: {} vs {} rows", a.rows.len(), b.rows.len())));
    }
    let mut worst: f64 = 0.0;
    for (p, q) in a.rows.iter().zip(&b.rows) {
        if (&p.measure, p.x, p.t) != (&q.measure, q.x, q.t) {
            return Err(ScenarioError::Capability(format!("row mismatch at {} x={} t={}", p.measure, p.x, p.t)));
        }
        worst = worst.max((p.value - q.value).abs());
    }
    Ok(worst)
}

fn config(lambda: f64, gamma: f64, scenario: &str) -> Result<ScenarioConfig, ScenarioError> {
    ScenarioConfig::parse(&format!(
        "model.lambda = {lambda}\nmodel.gamma = {gamma}\n{scenario}\n\
         grid.x_min = -2\ngrid.x_max = 2\ngrid.t_min = 0\ngrid.t_max = {}\ngrid.dt = {}\n\
         measures.list = concurrence(1), concurrence(2), concurrence(3), one_tangle, bell_fidelities\n",
        2.5 / lambda,
        0.5 / lambda
    ))
}

/// Runs vacuum and singlet scenarios on both engines for `gamma in {0, 0.5, 1}` and
/// `lambda in {0.5, 1}` with `lambda t <= 2.5`, pairs within three sites of the singlet.
pub fn selftest() -> Result<Vec<SelftestCheck>, ScenarioError> {
    let mut checks = Vec::new();
    for gamma in [0.0, 0.5, 1.0] {
        for lambda in [0.5, 1.0] {
            for (label, scenario) in [
                ("vacuum_only", "scenario.kind = vacuum_only"),
                ("singlet_on_vacuum(1,2)", "scenario.kind = singlet_on_vacuum\nscenario.i = 1\nscenario.j = 2"),
            ] {
                let cfg = config(lambda, gamma, scenario)?;
                let analytic = run(&cfg)?;
                let oracle = run(&cfg.with_engine(Engine::Oracle { sites: 12 }))?;
                checks.push(SelftestCheck {
                    name: format!("{label} gamma={gamma} lambda={lambda}"),
                    cells: analytic.rows.len(),
                    max_diff: compare(&analytic, &oracle)?,
                    tolerance: if gamma == 0.0 { 1e-4 } else { 2e-3 },
                });
            }
        }
    }
    Ok(checks)
}
