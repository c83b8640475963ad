//! Scenario execution, sweep checks and persistence.

use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::config::{CdMode, OutputKind, ScenarioConfig};
use super::output::{line_plot, Cell, Series, Table};
use crate::energetics::{
    h1_expectation, mean_energy, time_averaged_costs, work_series, TimeAveragedCosts, WorkSeries,
    EIGENSTATE_OVERLAP_TOL,
};
use crate::error::{Error, Result};
use crate::model::{LzParams, Protocol, ProtocolKind};
use crate::operator::{DEFAULT_DEGENERACY_TOL, HERMITICITY_TOL};
use crate::propagation::{
    ground_state, propagate, transition_probabilities, Basis, EvolutionRecord, PropagationOptions,
};
use crate::qsl::{chain_diagnostics, qsl_report, ChainDiagnostics, QslReport, ORDERING_SLACK};

/// Per-scenario facts recorded in the provenance block.
#[derive(Clone, Debug, Serialize)]
pub struct ScenarioSummary {
    pub protocol: ProtocolKind,
    pub tau: f64,
    pub tau_d: Option<f64>,
    pub step_halving_difference: Option<f64>,
    /// `|<psi(0)|psi(1)>|^2`.
    pub final_fidelity: f64,
    /// CD is on but `H1` does not vanish at `s = 0` or `s = 1`.
    pub boundary_condition_violated: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct CheckOutcome {
    pub name: String,
    pub passed: bool,
    /// A failed fatal check fails the run.
    pub fatal: bool,
    pub message: String,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: ScenarioConfig,
    pub scenarios: Vec<ScenarioSummary>,
    pub tables: Vec<Table>,
    /// `(file name, svg text)`.
    pub plots: Vec<(String, String)>,
    pub checks: Vec<CheckOutcome>,
}

struct ScenarioData {
    summary: ScenarioSummary,
    label: String,
    s_grid: Vec<f64>,
    timeseries: Option<[Vec<f64>; 5]>,
    spectra: Option<SpectraData>,
    work: Option<WorkData>,
    qsl: Option<(QslReport, ChainDiagnostics)>,
}

struct SpectraData {
    b: Vec<f64>,
    c: Vec<f64>,
    h0: Vec<Vec<f64>>,
    total: Vec<Vec<f64>>,
}

struct WorkData {
    series: WorkSeries,
    costs: TimeAveragedCosts,
    max_abs_h1: f64,
}

fn fmt_tau(tau: f64) -> String {
    format!("{tau}")
}

fn run_one(config: &ScenarioConfig, kind: ProtocolKind, tau: f64, label: String) -> Result<ScenarioData> {
    let params = LzParams::new(config.j, Protocol::new(kind, config.b_i, config.b_f)?)?;
    let cd = config.convention(tau);
    let initial = ground_state(&params)?;
    let options = PropagationOptions {
        steps: config.steps,
        convergence_tol: Some(config.convergence_tol),
        stepper: config.stepper,
    };
    let record = propagate(&params, cd, tau, &initial, options)?;
    let intensity = cd.map(|c| c.intensity_time(tau));
    let boundary_condition_violated = match intensity {
        Some(t) => params.cd_amplitude(0.0, t)? != 0.0 || params.cd_amplitude(1.0, t)? != 0.0,
        None => false,
    };
    let summary = ScenarioSummary {
        protocol: kind,
        tau,
        tau_d: (config.cd == CdMode::TauDFixed).then(|| config.tau_d_for(tau)),
        step_halving_difference: record.step_halving_difference(),
        final_fidelity: record.initial_state().overlap(record.final_state())?.norm_sqr(),
        boundary_condition_violated,
    };
    let convention = config.work_convention(tau);

    let timeseries = if config.wants(OutputKind::Timeseries) {
        Some(timeseries_columns(&record)?)
    } else {
        None
    };
    let spectra = if config.wants(OutputKind::Spectra) {
        let mut b = Vec::with_capacity(record.s_grid().len());
        let mut c = Vec::with_capacity(record.s_grid().len());
        for &s in record.s_grid() {
            b.push(params.b(s)?);
            c.push(match intensity {
                Some(t) => params.cd_amplitude(s, t)?,
                None => 0.0,
            });
        }
        let levels = |sp: &[crate::operator::SpectralDecomposition]| {
            sp.iter().map(|d| d.eigenvalues().to_vec()).collect()
        };
        Some(SpectraData {
            b,
            c,
            h0: levels(record.h0_spectra()),
            total: levels(record.total_spectra()),
        })
    } else {
        None
    };
    let work = if config.wants(OutputKind::Work) {
        Some(WorkData {
            series: work_series(&record, Basis::Total, convention)?,
            costs: time_averaged_costs(&record, convention)?,
            max_abs_h1: h1_expectation(&record).iter().fold(0.0, |m, v| m.max(v.abs())),
        })
    } else {
        None
    };
    let qsl = if config.wants(OutputKind::Qsl) {
        Some((qsl_report(&record, convention)?, chain_diagnostics(&record, convention)?))
    } else {
        None
    };
    Ok(ScenarioData {
        summary,
        label,
        s_grid: record.s_grid().to_vec(),
        timeseries,
        spectra,
        work,
        qsl,
    })
}

fn timeseries_columns(record: &EvolutionRecord) -> Result<[Vec<f64>; 5]> {
    let p_h0 = transition_probabilities(record, Basis::H0);
    let p_total = transition_probabilities(record, Basis::Total);
    let energy = mean_energy(record);
    let work = energy.iter().map(|e| e - energy[0]).collect();
    Ok([
        p_h0.iter().map(|p| p[0]).collect(),
        p_total.iter().map(|p| p[0]).collect(),
        energy,
        work,
        h1_expectation(record),
    ])
}

/// Runs every `(protocol, tau)` scenario of the config, in parallel.
///
/// Outputs are ordered by ascending `tau`, then by protocol order in the config.
pub fn run_scenario(config: &ScenarioConfig) -> Result<RunResult> {
    config.validate()?;
    let kinds = config.protocol.kinds();
    let mut taus = config.taus();
    taus.sort_by(f64::total_cmp);
    let mut jobs: Vec<(ProtocolKind, f64, String)> = Vec::new();
    for &tau in &taus {
        for &k in &kinds {
            let label = if kinds.len() > 1 {
                format!("{}:tau={}", k.name(), fmt_tau(tau))
            } else {
                format!("tau={}", fmt_tau(tau))
            };
            jobs.push((k, tau, label));
        }
    }

    let data: Vec<ScenarioData> = if config.outputs.is_empty() {
        Vec::new()
    } else {
        jobs.into_par_iter()
            .map(|(k, tau, label)| {
                run_one(config, k, tau, label).map_err(|e| Error::Scenario {
                    tau,
                    source: Box::new(e),
                })
            })
            .collect::<Result<_>>()?
    };

    let checks = sweep_checks(config, &kinds, &data);
    if let Some(failed) = checks.iter().find(|c| c.fatal && !c.passed) {
        return Err(Error::CheckFailed {
            check: failed.name.clone(),
            message: failed.message.clone(),
        });
    }

    let mut tables = Vec::new();
    let mut plots = Vec::new();
    let mut outputs = config.outputs.clone();
    outputs.sort();
    outputs.dedup();
    for output in outputs {
        match output {
            OutputKind::Timeseries => timeseries_output(&data, &mut tables, &mut plots),
            OutputKind::Spectra => spectra_output(&data, &mut tables, &mut plots),
            OutputKind::Work => work_output(&data, &kinds, &mut tables, &mut plots),
            OutputKind::Qsl => qsl_output(&data, &kinds, &mut tables, &mut plots),
        }
    }
    Ok(RunResult {
        config: config.clone(),
        scenarios: data.into_iter().map(|d| d.summary).collect(),
        tables,
        plots,
        checks,
    })
}

fn column(base: &str, label: &str, single: bool) -> String {
    if single {
        base.to_string()
    } else {
        format!("{base}[{label}]")
    }
}

/// Wide table over `s`: one block of columns per scenario.
fn wide_table(
    name: &str,
    data: &[ScenarioData],
    bases: &[&str],
    values: impl Fn(&ScenarioData) -> Vec<Vec<f64>>,
) -> Table {
    let single = data.len() == 1;
    let mut columns = vec!["s".to_string()];
    for d in data {
        columns.extend(bases.iter().map(|b| column(b, &d.label, single)));
    }
    let blocks: Vec<Vec<Vec<f64>>> = data.iter().map(&values).collect();
    let mut table = Table::new(name, columns);
    for (k, &s) in data[0].s_grid.iter().enumerate() {
        let mut row = vec![Cell::Num(s)];
        for block in &blocks {
            row.extend(block.iter().map(|col| Cell::Num(col[k])));
        }
        table.push(row);
    }
    table
}

fn timeseries_output(data: &[ScenarioData], tables: &mut Vec<Table>, plots: &mut Vec<(String, String)>) {
    if data.is_empty() {
        return;
    }
    let bases = ["p_ground_h0", "p_ground_total", "mean_energy", "work", "h1_expectation"];
    tables.push(wide_table("timeseries", data, &bases, |d| {
        d.timeseries.clone().expect("requested").to_vec()
    }));
    let series: Vec<Series> = data
        .iter()
        .map(|d| Series {
            name: d.label.clone(),
            points: d
                .s_grid
                .iter()
                .copied()
                .zip(d.timeseries.as_ref().expect("requested")[1].iter().copied())
                .collect(),
        })
        .collect();
    plots.push((
        "timeseries.svg".into(),
        line_plot(
            "Ground-state population of H0 + H1",
            "s = t / tau",
            "p_ground_total",
            &series,
        ),
    ));
}

fn spectra_output(data: &[ScenarioData], tables: &mut Vec<Table>, plots: &mut Vec<(String, String)>) {
    if data.is_empty() {
        return;
    }
    let bases = ["B", "C", "E_minus_h0", "E_plus_h0", "E_minus_total", "E_plus_total"];
    tables.push(wide_table("spectra", data, &bases, |d| {
        let sp = d.spectra.as_ref().expect("requested");
        let level = |levels: &Vec<Vec<f64>>, i: usize| levels.iter().map(|l| l[i]).collect();
        vec![
            sp.b.clone(),
            sp.c.clone(),
            level(&sp.h0, 0),
            level(&sp.h0, 1),
            level(&sp.total, 0),
            level(&sp.total, 1),
        ]
    }));
    let along = |d: &ScenarioData, v: &[f64]| d.s_grid.iter().copied().zip(v.iter().copied()).collect();
    let svg = if data.len() == 1 {
        let d = &data[0];
        let sp = d.spectra.as_ref().expect("requested");
        let branches: Vec<Series> = [("E_minus_h0", &sp.h0, 0), ("E_plus_h0", &sp.h0, 1)]
            .into_iter()
            .chain([("E_minus_total", &sp.total, 0), ("E_plus_total", &sp.total, 1)])
            .map(|(name, levels, i)| {
                let v: Vec<f64> = levels.iter().map(|l| l[i]).collect();
                Series {
                    name: name.into(),
                    points: along(d, &v),
                }
            })
            .collect();
        line_plot("Instantaneous eigenenergies", "s = t / tau", "energy", &branches)
    } else {
        let curves: Vec<Series> = data
            .iter()
            .map(|d| Series {
                name: d.label.clone(),
                points: along(d, &d.spectra.as_ref().expect("requested").c),
            })
            .collect();
        line_plot("Counterdiabatic amplitude", "s = t / tau", "C(s)", &curves)
    };
    plots.push(("spectra.svg".into(), svg));
}

fn summary_cells(d: &ScenarioData) -> Vec<Cell> {
    vec![
        d.summary.protocol.name().into(),
        d.summary.tau.into(),
        d.summary.tau_d.into(),
    ]
}

fn by_protocol<'a>(
    data: &'a [ScenarioData],
    kinds: &[ProtocolKind],
) -> Vec<(ProtocolKind, Vec<&'a ScenarioData>)> {
    kinds
        .iter()
        .map(|&k| (k, data.iter().filter(|d| d.summary.protocol == k).collect()))
        .collect()
}

fn work_output(
    data: &[ScenarioData],
    kinds: &[ProtocolKind],
    tables: &mut Vec<Table>,
    plots: &mut Vec<(String, String)>,
) {
    if data.is_empty() {
        return;
    }
    let columns = [
        "protocol",
        "tau",
        "tau_d",
        "avg_excess_work",
        "avg_max_gap",
        "final_work",
        "max_abs_h1_expectation",
        "final_fidelity",
    ];
    let mut summary = Table::new("work", columns.iter().map(|c| c.to_string()).collect());
    for d in data {
        let w = d.work.as_ref().expect("requested");
        let mut row = summary_cells(d);
        row.extend([
            w.costs.avg_excess_work.into(),
            w.costs.avg_max_gap.into(),
            (*w.series.work.last().expect("nonempty")).into(),
            w.max_abs_h1.into(),
            d.summary.final_fidelity.into(),
        ]);
        summary.push(row);
    }
    tables.push(summary);
    tables.push(wide_table(
        "work_series",
        data,
        &["work", "adiabatic_work", "excess_work"],
        |d| {
            let s = &d.work.as_ref().expect("requested").series;
            vec![s.work.clone(), s.adiabatic_work.clone(), s.excess_work.clone()]
        },
    ));
    let groups = by_protocol(data, kinds);
    let svg = if groups.iter().all(|(_, g)| g.len() > 1) {
        let curves: Vec<Series> = groups
            .iter()
            .map(|(k, g)| Series {
                name: k.name().into(),
                points: g
                    .iter()
                    .map(|d| (d.summary.tau, d.work.as_ref().expect("requested").costs.avg_excess_work))
                    .collect(),
            })
            .collect();
        line_plot("Time-averaged excess work", "tau", "avg_excess_work", &curves)
    } else {
        let curves: Vec<Series> = data
            .iter()
            .map(|d| Series {
                name: d.label.clone(),
                points: d
                    .s_grid
                    .iter()
                    .copied()
                    .zip(d.work.as_ref().expect("requested").series.excess_work.iter().copied())
                    .collect(),
            })
            .collect();
        line_plot("Excess work", "s = t / tau", "excess_work", &curves)
    };
    plots.push(("work.svg".into(), svg));
}

fn qsl_output(
    data: &[ScenarioData],
    kinds: &[ProtocolKind],
    tables: &mut Vec<Table>,
    plots: &mut Vec<(String, String)>,
) {
    if data.is_empty() {
        return;
    }
    let columns = [
        "protocol",
        "tau",
        "tau_d",
        "bures_angle",
        "tau_mt",
        "tau_wex",
        "tau_ml",
        "ordering_ok",
        "bhatia_davis_excess",
        "cauchy_schwarz_excess",
    ];
    let mut table = Table::new("qsl", columns.iter().map(|c| c.to_string()).collect());
    for d in data {
        let (r, chain) = d.qsl.as_ref().expect("requested");
        let mut row = summary_cells(d);
        row.extend([
            r.bures_angle.into(),
            r.tau_mt.into(),
            r.tau_wex.into(),
            r.tau_ml.into(),
            r.ordering_ok.into(),
            chain.bhatia_davis_excess().into(),
            chain.cauchy_schwarz_excess().into(),
        ]);
        table.push(row);
    }
    tables.push(table);
    let mut curves = Vec::new();
    for (k, group) in by_protocol(data, kinds) {
        let suffix = if kinds.len() > 1 { format!(" ({})", k.name()) } else { String::new() };
        let pick: [(&str, fn(&QslReport) -> Option<f64>); 4] = [
            ("tau", |r| Some(r.tau)),
            ("tau_mt", |r| r.tau_mt),
            ("tau_wex", |r| r.tau_wex),
            ("tau_ml", |r| r.tau_ml),
        ];
        for (name, f) in pick {
            curves.push(Series {
                name: format!("{name}{suffix}"),
                points: group
                    .iter()
                    .filter_map(|d| {
                        let r = &d.qsl.as_ref().expect("requested").0;
                        f(r).map(|v| (r.tau, v))
                    })
                    .collect(),
            });
        }
    }
    plots.push((
        "qsl.svg".into(),
        line_plot("Quantum speed limits", "tau", "time", &curves),
    ));
}

fn strictly_decreasing(values: &[(f64, f64)]) -> Option<(f64, f64)> {
    values
        .windows(2)
        .find(|w| !(w[1].1 < w[0].1))
        .map(|w| (w[0].0, w[1].0))
}

fn monotone_check(
    name: &str,
    what: &str,
    kinds: &[ProtocolKind],
    data: &[ScenarioData],
    value: impl Fn(&ScenarioData) -> f64,
) -> CheckOutcome {
    let mut failures = Vec::new();
    for (k, group) in by_protocol(data, kinds) {
        let points: Vec<(f64, f64)> = group.iter().map(|d| (d.summary.tau, value(d))).collect();
        if let Some((a, b)) = strictly_decreasing(&points) {
            failures.push(format!("{}: {what} does not decrease from tau={a} to tau={b}", k.name()));
        }
    }
    CheckOutcome {
        name: name.into(),
        passed: failures.is_empty(),
        fatal: true,
        message: if failures.is_empty() {
            format!("{what} strictly decreasing in tau")
        } else {
            failures.join("; ")
        },
    }
}

fn sweep_checks(config: &ScenarioConfig, kinds: &[ProtocolKind], data: &[ScenarioData]) -> Vec<CheckOutcome> {
    let mut checks = Vec::new();
    let swept = config.taus().len() > 1 && !data.is_empty();
    if swept && config.intensity_follows_tau() {
        if config.wants(OutputKind::Timeseries) {
            checks.push(monotone_check("dip_depth", "ground-state dip depth", kinds, data, |d| {
                let p = &d.timeseries.as_ref().expect("requested")[1];
                1.0 - p.iter().copied().fold(f64::INFINITY, f64::min)
            }));
        }
        if config.wants(OutputKind::Spectra) {
            checks.push(monotone_check("cd_amplitude", "max |C(s)|", kinds, data, |d| {
                d.spectra
                    .as_ref()
                    .expect("requested")
                    .c
                    .iter()
                    .fold(0.0, |m, v| m.max(v.abs()))
            }));
        }
    }
    if swept && config.cd == CdMode::TauDFixed && config.intensity_follows_tau() && config.wants(OutputKind::Work) {
        checks.push(monotone_check("excess_work_decay", "time-averaged excess work", kinds, data, |d| {
            d.work.as_ref().expect("requested").costs.avg_excess_work
        }));
    }
    if config.wants(OutputKind::Qsl) && !data.is_empty() {
        let bad: Vec<String> = data
            .iter()
            .filter(|d| !d.qsl.as_ref().expect("requested").0.ordering_ok)
            .map(|d| d.label.clone())
            .collect();
        checks.push(CheckOutcome {
            name: "qsl_bounds_below_tau".into(),
            passed: bad.is_empty(),
            fatal: false,
            message: if bad.is_empty() {
                "every applicable bound is at most tau".into()
            } else {
                format!("bound exceeds tau for {}", bad.join(", "))
            },
        });
    }
    checks
}

impl RunResult {
    pub fn table(&self, name: &str) -> Option<&Table> {
        self.tables.iter().find(|t| t.name == name)
    }

    /// Provenance and result summary written as `run.json`.
    pub fn manifest(&self, files: &[String]) -> serde_json::Value {
        json!({
            "software": {"name": "cdwork", "version": env!("CARGO_PKG_VERSION")},
            "config": self.config.to_value(),
            "grid": {"steps": self.config.steps, "points": self.config.steps + 1},
            "tolerances": {
                "step_halving": self.config.convergence_tol,
                "hermiticity": HERMITICITY_TOL,
                "degeneracy_relative": DEFAULT_DEGENERACY_TOL,
                "eigenstate_overlap": EIGENSTATE_OVERLAP_TOL,
                "qsl_ordering_relative": ORDERING_SLACK,
            },
            "scenarios": self.scenarios,
            "checks": self.checks,
            "files": files,
        })
    }

    /// Writes CSV and SVG files plus `run.json`; writes nothing when no outputs were requested.
    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        if self.config.outputs.is_empty() {
            return Ok(Vec::new());
        }
        fs::create_dir_all(dir)?;
        let mut names = Vec::new();
        for table in &self.tables {
            let name = format!("{}.csv", table.name);
            fs::write(dir.join(&name), table.to_csv())?;
            names.push(name);
        }
        for (name, svg) in &self.plots {
            fs::write(dir.join(name), svg)?;
            names.push(name.clone());
        }
        let mut manifest =
            serde_json::to_string_pretty(&self.manifest(&names)).expect("manifest serializes");
        manifest.push('\n');
        fs::write(dir.join("run.json"), manifest)?;
        names.push("run.json".into());
        Ok(names.into_iter().map(|n| dir.join(n)).collect())
    }
}
