//! End-to-end calibration of the agent model and its serialised outputs.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::coverage::{coverage_analysis, CoverageSettings, CoverageTable};
use super::nsga2::{run_nsga2, Nsga2Config, Nsga2Result};
use super::problem::{CalibrationSetup, LobProblem};
use super::pareto::dominates_unchecked;
use crate::auxiliary::AuxCoefficients;
use crate::error::{Error, Result};
use crate::sim::AgentParams;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CalibrationReport {
    pub setup: CalibrationSetup,
    pub search: Nsga2Config,
    pub target: AuxCoefficients,
    pub gene_names: Vec<String>,
    pub result: Nsga2Result,
    /// Decoded parameters of the rank-1 set, in `result.front` order.
    pub front_params: Vec<AgentParams>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coverage: Option<CoverageTable>,
}

impl CalibrationReport {
    /// Kernel history-average traces, one per generation.
    pub fn psi_traces(&self) -> Vec<Option<f64>> {
        self.result.traces.iter().map(|t| t.psi_trace).collect()
    }
}

/// Runs the multi-objective search against `target` and, when `coverage`
/// is given, checks every front member by re-simulation.
pub fn calibrate(
    setup: CalibrationSetup,
    target: AuxCoefficients,
    search: &Nsga2Config,
    coverage: Option<&CoverageSettings>,
) -> Result<CalibrationReport> {
    let mut search = search.clone();
    search.kernel = setup.kernel.clone();
    let problem = LobProblem::new(setup, target.clone())?;
    let result = run_nsga2(&problem, &search)?;
    if result.front.is_empty() {
        return Err(Error::InvalidConfig("search produced an empty front".into()));
    }
    debug_assert!(result
        .front
        .iter()
        .all(|a| result.front.iter().all(|b| !dominates_unchecked(&a.objectives, &b.objectives))));
    let front_params = result
        .front
        .iter()
        .map(|ind| problem.decode(&ind.genes, ind.sigma_matrix().as_ref()))
        .collect::<Result<Vec<_>>>()?;
    let coverage = coverage.map(|c| coverage_analysis(&front_params, &target, c)).transpose()?;
    Ok(CalibrationReport {
        gene_names: problem.layout.names().to_vec(),
        setup: problem.setup,
        search,
        target,
        result,
        front_params,
        coverage,
    })
}

/// Column names of the front table for a setup.
pub fn front_header(setup: &CalibrationSetup) -> Result<Vec<String>> {
    let layout = setup.layout()?;
    let mut cols = vec!["solution".to_string()];
    cols.extend(layout.names().iter().cloned());
    cols.extend(["trace_sigma", "rank", "objective_volatility", "objective_volume"].map(String::from));
    Ok(cols)
}

/// Flat CSV of the rank-1 set: one row per solution with every calibrated
/// parameter, the covariance trace, rank and both objectives.
pub fn write_front_csv<W: Write>(report: &CalibrationReport, mut out: W) -> Result<()> {
    let header = front_header(&report.setup)?;
    writeln!(out, "{}", header.join(","))?;
    for (i, (ind, params)) in report.result.front.iter().zip(&report.front_params).enumerate() {
        let mut fields = vec![(i + 1).to_string()];
        fields.extend(ind.genes.iter().map(|g| format!("{g}")));
        fields.push(format!("{}", params.sigma_trace()));
        fields.push(ind.rank.to_string());
        fields.extend(ind.objectives.iter().map(|o| format!("{o}")));
        writeln!(out, "{}", fields.join(","))?;
    }
    Ok(())
}
