//! Running every point of a scenario grid with common random numbers.

use super::scenario::{Scenario, ScenarioSpec};
use super::table::{Cell, Failure, ResultTable, Row};
use super::HarnessError;
use crate::exec::{map_indexed, Execution};
use crate::model::{simulate, Metric, ModelError, OutcomeReport, RunLength};

pub fn outcome_columns() -> Vec<String> {
    Metric::ALL.iter().map(|m| m.name().to_owned()).collect()
}

pub fn row_from_report(label: &str, report: &OutcomeReport) -> Row {
    Row {
        label: label.to_owned(),
        seed: Some(report.base_seed),
        replications: report.replications.len() as u32,
        cells: Metric::ALL
            .iter()
            .map(|m| {
                let s = report.summary_of(*m);
                s.mean.zip(s.sd).map(|(mean, sd)| Cell { mean, sd })
            })
            .collect(),
    }
}

/// Simulate every scenario with the same base seed, so each scenario sees
/// the same draws on every random stream its parameters do not touch.
/// Failed grid points become [`Failure`] entries; the rest of the table is
/// still filled in.
pub fn run_scenarios(
    title: &str,
    scenarios: &[Scenario],
    length: RunLength,
    seed: u64,
    execution: Execution,
) -> (ResultTable, Vec<Option<OutcomeReport>>) {
    let results = map_indexed(execution, scenarios.len(), |i| -> Result<OutcomeReport, ModelError> {
        let cfg = scenarios[i].config.as_ref().map_err(Clone::clone)?;
        simulate(cfg, length, seed, execution)
    });
    let mut table = ResultTable::new(title, outcome_columns());
    let mut reports = Vec::with_capacity(results.len());
    for (scenario, result) in scenarios.iter().zip(results) {
        match result {
            Ok(report) => {
                table.rows.push(row_from_report(&scenario.label, &report));
                reports.push(Some(report));
            }
            Err(e) => {
                table.failures.push(Failure {
                    label: scenario.label.clone(),
                    error: e.to_string(),
                });
                reports.push(None);
            }
        }
    }
    (table, reports)
}

pub fn run_sweep(spec: &ScenarioSpec, execution: Execution) -> Result<ResultTable, HarnessError> {
    let scenarios = spec.scenarios()?;
    let title = spec.name.clone().unwrap_or_else(|| "sweep".to_owned());
    Ok(run_scenarios(&title, &scenarios, spec.run_length(), spec.seed, execution).0)
}
