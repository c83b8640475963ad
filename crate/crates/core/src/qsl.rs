//! Quantum speed limits evaluated on an [`EvolutionRecord`].
//!
//! All three bounds share the Bures angle `L` between the initial and final
//! states and divide it by a time-averaged rate:
//!
//! - Mandelstam-Tamm: `L / avg(std H)`
//! - excess work: `L / sqrt(avg(E_N - E_1) * avg(W_ex))`
//! - Margolus-Levitin (trace norm): `sin^2 L / avg(||H psi||)`
//!
//! A bound whose rate vanishes is reported as not applicable rather than
//! infinite. If the state never leaves its initial ray the bound is zero.

use serde::Serialize;

use crate::counterdiabatic::CdConvention;
use crate::energetics::{adiabatic_limit_eigenvalues, initial_eigenindex, mean_energy, time_average};
use crate::error::{Error, Result};
use crate::operator::{energy_std, inner, trace_norm_product, PureState};
use crate::propagation::EvolutionRecord;

/// Relative slack allowed when comparing a bound with `tau`.
pub const ORDERING_SLACK: f64 = 1e-9;
/// Time-averaged rates below this are treated as zero.
pub const ZERO_RATE_TOL: f64 = 1e-14;
/// Bures angles below this count as no evolution at all.
pub const ZERO_ANGLE_TOL: f64 = 1e-12;
/// `avg(W_ex)` below this fraction of `avg(E_N - E_1)` counts as zero excess work.
pub const ZERO_EXCESS_WORK_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct QslReport {
    pub tau: f64,
    pub bures_angle: f64,
    /// `None` where the bound is not applicable.
    pub tau_mt: Option<f64>,
    pub tau_wex: Option<f64>,
    pub tau_ml: Option<f64>,
    pub ordering_ok: bool,
}

/// Pointwise and integrated sides of the Bhatia-Davis and Cauchy-Schwarz steps.
#[derive(Clone, Debug)]
pub struct ChainDiagnostics {
    /// `std(H)^2` per grid point.
    pub variance: Vec<f64>,
    /// `(E_N - E_1) * W_ex` per grid point.
    pub gap_times_excess: Vec<f64>,
    /// `avg(sqrt((E_N - E_1) * W_ex))`.
    pub mean_root_product: f64,
    /// `sqrt(avg(E_N - E_1) * avg(W_ex))`.
    pub root_mean_product: f64,
}

impl ChainDiagnostics {
    /// Largest `std^2 - (E_N - E_1) W_ex` over the grid; nonpositive when the chain holds.
    pub fn bhatia_davis_excess(&self) -> f64 {
        self.variance
            .iter()
            .zip(&self.gap_times_excess)
            .map(|(v, g)| v - g)
            .fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn cauchy_schwarz_excess(&self) -> f64 {
        self.mean_root_product - self.root_mean_product
    }

    pub fn holds(&self, slack: f64) -> bool {
        self.bhatia_davis_excess() <= slack && self.cauchy_schwarz_excess() <= slack
    }
}

/// `arccos |<a|b>|`, computed as `atan2(||b - <a|b> a||, |<a|b>|)` to stay
/// accurate near zero.
pub fn bures_angle(a: &PureState, b: &PureState) -> Result<f64> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let overlap = inner(a.amplitudes(), b.amplitudes());
    let perp = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (y - overlap * x).norm_sqr())
        .sum::<f64>()
        .sqrt();
    Ok(perp.atan2(overlap.norm()).clamp(0.0, std::f64::consts::FRAC_PI_2))
}

fn record_angle(record: &EvolutionRecord) -> f64 {
    bures_angle(record.initial_state(), record.final_state()).expect("record states share a dimension")
}

fn ratio(numerator: f64, angle: f64, rate: f64, what: &'static str) -> Result<f64> {
    if angle < ZERO_ANGLE_TOL {
        return Ok(0.0);
    }
    if !(rate >= ZERO_RATE_TOL) {
        return Err(Error::ZeroDenominator { what });
    }
    Ok(numerator / rate)
}

/// `avg(std H)` over the record, in energy units.
pub fn mean_energy_std(record: &EvolutionRecord) -> f64 {
    let std: Vec<f64> = record
        .hamiltonians()
        .iter()
        .zip(record.states())
        .map(|(h, psi)| energy_std(h, psi).expect("record operators match states"))
        .collect();
    time_average(&std)
}

pub fn mt_bound(record: &EvolutionRecord) -> Result<f64> {
    let angle = record_angle(record);
    ratio(angle, angle, mean_energy_std(record), "time-averaged energy spread")
}

/// Instantaneous `E_N - E_1` and `<H> - E_1` from the eigenvalue family of the convention.
fn gap_and_excess(
    record: &EvolutionRecord,
    convention: CdConvention,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if initial_eigenindex(record)? != 0 {
        return Err(Error::InvalidParameter(
            "the excess-work bound needs a ground-state initial condition".into(),
        ));
    }
    let levels = adiabatic_limit_eigenvalues(record, convention)?;
    let energy = mean_energy(record);
    let gap = levels.iter().map(|ev| ev[ev.len() - 1] - ev[0]).collect();
    let excess = levels.iter().zip(&energy).map(|(ev, e)| e - ev[0]).collect();
    Ok((gap, excess))
}

pub fn excess_work_bound(record: &EvolutionRecord, convention: CdConvention) -> Result<f64> {
    let (gap, excess) = gap_and_excess(record, convention)?;
    let avg_gap = time_average(&gap);
    let avg_excess = time_average(&excess);
    let angle = record_angle(record);
    if angle >= ZERO_ANGLE_TOL && !(avg_excess > ZERO_EXCESS_WORK_TOL * avg_gap) {
        return Err(Error::ZeroDenominator {
            what: "time-averaged excess work",
        });
    }
    ratio(angle, angle, (avg_gap * avg_excess).sqrt(), "gap times excess work")
}

pub fn ml_trace_bound(record: &EvolutionRecord) -> Result<f64> {
    let norms: Vec<f64> = record
        .hamiltonians()
        .iter()
        .zip(record.states())
        .map(|(h, psi)| trace_norm_product(h, psi).expect("record operators match states"))
        .collect();
    let angle = record_angle(record);
    ratio(angle.sin().powi(2), angle, time_average(&norms), "time-averaged trace norm")
}

pub fn chain_diagnostics(
    record: &EvolutionRecord,
    convention: CdConvention,
) -> Result<ChainDiagnostics> {
    let (gap, excess) = gap_and_excess(record, convention)?;
    let variance = record
        .hamiltonians()
        .iter()
        .zip(record.states())
        .map(|(h, psi)| energy_std(h, psi).expect("record operators match states").powi(2))
        .collect();
    let gap_times_excess: Vec<f64> = gap.iter().zip(&excess).map(|(g, w)| g * w).collect();
    let roots: Vec<f64> = gap_times_excess.iter().map(|p| p.max(0.0).sqrt()).collect();
    Ok(ChainDiagnostics {
        variance,
        gap_times_excess,
        mean_root_product: time_average(&roots),
        root_mean_product: (time_average(&gap) * time_average(&excess).max(0.0)).sqrt(),
    })
}

fn applicable(bound: Result<f64>) -> Result<Option<f64>> {
    match bound {
        Ok(v) => Ok(Some(v)),
        Err(Error::ZeroDenominator { .. }) => Ok(None),
        Err(e) => Err(e),
    }
}

pub fn qsl_report(record: &EvolutionRecord, convention: CdConvention) -> Result<QslReport> {
    let tau = record.tau();
    let tau_mt = applicable(mt_bound(record))?;
    let tau_wex = applicable(excess_work_bound(record, convention))?;
    let tau_ml = applicable(ml_trace_bound(record))?;
    let limit = tau * (1.0 + ORDERING_SLACK);
    let ordering_ok = [tau_mt, tau_wex, tau_ml]
        .iter()
        .flatten()
        .all(|&b| b <= limit);
    Ok(QslReport {
        tau,
        bures_angle: record_angle(record),
        tau_mt,
        tau_wex,
        tau_ml,
        ordering_ok,
    })
}
