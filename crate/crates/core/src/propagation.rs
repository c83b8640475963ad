//! Time propagation on a uniform grid in `s`.
//!
//! Every step is a product of matrix exponentials, each evaluated through a
//! spectral decomposition, so the propagator is unitary up to round-off.
//! [`Stepper::ExponentialMidpoint`] uses `exp(-i (tau/M) H(s_k + 1/(2M)))` and
//! is second order in `1/M`. The default [`Stepper::Magnus4`] is the
//! fourth-order commutator-free scheme on the two Gauss points of each step.
//! A second run at `2M` certifies convergence of the final state.

use serde::{Deserialize, Serialize};

use crate::counterdiabatic::{cd_generator, CdConvention};
use crate::error::{Error, Result};
use crate::model::DrivenModel;
use crate::operator::{
    eigendecompose, gauge_pivot, inner, jacobi_eigen, HermitianOperator, PureState,
    SpectralDecomposition, C64, NORM_TOL,
};

pub const DEFAULT_STEPS: usize = 4000;
pub const MIN_STEPS: usize = 100;
/// Default bound on the final-state norm distance between the `M` and `2M` runs.
pub const DEFAULT_CONVERGENCE_TOL: f64 = 1e-8;
/// Per-step norm drift that counts as a broken propagator.
const UNITARITY_TOL: f64 = 1e-10;

/// One-step propagator on the uniform grid.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stepper {
    /// `exp(-i dt H(mid))`, second order.
    ExponentialMidpoint,
    /// Two exponentials of Gauss-point combinations of `H`, fourth order.
    #[default]
    Magnus4,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PropagationOptions {
    pub steps: usize,
    /// Tolerance of the step-halving check; `None` skips the second run.
    pub convergence_tol: Option<f64>,
    pub stepper: Stepper,
}

impl Default for PropagationOptions {
    fn default() -> Self {
        Self {
            steps: DEFAULT_STEPS,
            convergence_tol: Some(DEFAULT_CONVERGENCE_TOL),
            stepper: Stepper::default(),
        }
    }
}

impl PropagationOptions {
    pub fn with_steps(steps: usize) -> Self {
        Self {
            steps,
            ..Self::default()
        }
    }

    pub fn unchecked(steps: usize) -> Self {
        Self {
            steps,
            convergence_tol: None,
            ..Self::default()
        }
    }

    pub fn stepper(self, stepper: Stepper) -> Self {
        Self { stepper, ..self }
    }
}

/// Which eigenbasis to project onto.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Basis {
    /// Reference Hamiltonian `H0(s)`.
    H0,
    /// The Hamiltonian actually driving the run.
    Total,
}

/// Trajectory and instantaneous spectra on the grid `s_k = k / M`.
#[derive(Clone, Debug)]
pub struct EvolutionRecord {
    tau: f64,
    cd: Option<CdConvention>,
    s_grid: Vec<f64>,
    states: Vec<PureState>,
    h0: Vec<HermitianOperator>,
    cd_generators: Vec<HermitianOperator>,
    hamiltonians: Vec<HermitianOperator>,
    h0_spectra: Vec<SpectralDecomposition>,
    total_spectra: Vec<SpectralDecomposition>,
    step_halving_difference: Option<f64>,
}

impl EvolutionRecord {
    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn cd(&self) -> Option<CdConvention> {
        self.cd
    }

    pub fn steps(&self) -> usize {
        self.s_grid.len() - 1
    }

    pub fn dim(&self) -> usize {
        self.states[0].dim()
    }

    pub fn s_grid(&self) -> &[f64] {
        &self.s_grid
    }

    pub fn states(&self) -> &[PureState] {
        &self.states
    }

    pub fn initial_state(&self) -> &PureState {
        &self.states[0]
    }

    pub fn final_state(&self) -> &PureState {
        &self.states[self.states.len() - 1]
    }

    /// `H0(s_k)`.
    pub fn h0(&self) -> &[HermitianOperator] {
        &self.h0
    }

    /// Counterdiabatic term at unit intensity time; `H1 = G / T`.
    pub fn cd_generators(&self) -> &[HermitianOperator] {
        &self.cd_generators
    }

    /// The Hamiltonian driving the run at each grid point.
    pub fn hamiltonians(&self) -> &[HermitianOperator] {
        &self.hamiltonians
    }

    pub fn h0_spectra(&self) -> &[SpectralDecomposition] {
        &self.h0_spectra
    }

    pub fn total_spectra(&self) -> &[SpectralDecomposition] {
        &self.total_spectra
    }

    pub fn spectra(&self, basis: Basis) -> &[SpectralDecomposition] {
        match basis {
            Basis::H0 => &self.h0_spectra,
            Basis::Total => &self.total_spectra,
        }
    }

    /// `H1(s_k)` of the run, zero when counterdiabatic driving is off.
    pub fn h1(&self, k: usize) -> HermitianOperator {
        match self.cd {
            Some(c) => self.cd_generators[k].scale(1.0 / c.intensity_time(self.tau)),
            None => self.cd_generators[k].scale(0.0),
        }
    }

    /// Phase-insensitive final-state distance between the `M` and `2M` runs, when checked.
    pub fn step_halving_difference(&self) -> Option<f64> {
        self.step_halving_difference
    }
}

fn run_hamiltonian<M: DrivenModel + ?Sized>(
    model: &M,
    cd: Option<CdConvention>,
    tau: f64,
    s: f64,
) -> Result<HermitianOperator> {
    let h0 = model.h0(s)?;
    match cd {
        None => Ok(h0),
        Some(c) => h0.add(&cd_generator(model, s)?.scale(1.0 / c.intensity_time(tau))),
    }
}

/// `exp(-i dt H) psi` through the spectral decomposition of `H`.
pub fn exp_step(h: &HermitianOperator, dt: f64, psi: &[C64]) -> Vec<C64> {
    let spec = jacobi_eigen(h);
    let n = psi.len();
    let mut out = vec![C64::new(0.0, 0.0); n];
    for k in 0..n {
        let v = spec.eigenvector(k);
        let coeff = inner(v, psi) * C64::from_polar(1.0, -dt * spec.eigenvalues()[k]);
        for (o, x) in out.iter_mut().zip(v) {
            *o += coeff * x;
        }
    }
    out
}

// Gauss-Legendre nodes and the commutator-free weights of the fourth-order scheme.
const GAUSS_OFFSET: f64 = 0.288_675_134_594_812_9; // sqrt(3) / 6
const CF4_A: f64 = 0.25 + GAUSS_OFFSET;
const CF4_B: f64 = 0.25 - GAUSS_OFFSET;

fn step<M: DrivenModel + ?Sized>(
    model: &M,
    cd: Option<CdConvention>,
    tau: f64,
    stepper: Stepper,
    k: usize,
    steps: usize,
    psi: &[C64],
) -> Result<Vec<C64>> {
    let dt = tau / steps as f64;
    let h = 1.0 / steps as f64;
    let s0 = k as f64 * h;
    match stepper {
        Stepper::ExponentialMidpoint => {
            let mid = run_hamiltonian(model, cd, tau, s0 + 0.5 * h)?;
            Ok(exp_step(&mid, dt, psi))
        }
        Stepper::Magnus4 => {
            let h1 = run_hamiltonian(model, cd, tau, s0 + (0.5 - GAUSS_OFFSET) * h)?;
            let h2 = run_hamiltonian(model, cd, tau, s0 + (0.5 + GAUSS_OFFSET) * h)?;
            let first = h1.scale(CF4_A).add(&h2.scale(CF4_B))?;
            let second = h1.scale(CF4_B).add(&h2.scale(CF4_A))?;
            Ok(exp_step(&second, dt, &exp_step(&first, dt, psi)))
        }
    }
}

fn integrate<M: DrivenModel + ?Sized>(
    model: &M,
    cd: Option<CdConvention>,
    tau: f64,
    initial: &PureState,
    steps: usize,
    stepper: Stepper,
) -> Result<Vec<PureState>> {
    let mut states = Vec::with_capacity(steps + 1);
    states.push(initial.clone());
    let mut psi = initial.amplitudes().to_vec();
    for k in 0..steps {
        let before = norm(&psi);
        psi = step(model, cd, tau, stepper, k, steps, &psi)?;
        let drift = (norm(&psi) - before).abs();
        if !(drift <= UNITARITY_TOL) {
            return Err(Error::NonUnitaryStep { step: k, drift });
        }
        states.push(PureState::from_unchecked(psi.clone()));
    }
    Ok(states)
}

/// `min_phi || a - exp(i phi) b ||`, the distance between rays.
pub fn projective_distance(a: &PureState, b: &PureState) -> f64 {
    let overlap = inner(b.amplitudes(), a.amplitudes());
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| (x - phase * y).norm_sqr())
        .sum::<f64>()
        .sqrt()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Integrates the driven Schrodinger equation `i (1/tau) d psi/ds = H(s) psi`.
///
/// With `cd = None` the system is driven by `H0` alone; otherwise by
/// `H0 + H1` with the intensity selected by the convention.
pub fn propagate<M: DrivenModel + ?Sized>(
    model: &M,
    cd: Option<CdConvention>,
    tau: f64,
    initial: &PureState,
    options: PropagationOptions,
) -> Result<EvolutionRecord> {
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::OutOfRange { what: "tau", value: tau });
    }
    if options.steps < MIN_STEPS {
        return Err(Error::InvalidParameter(format!(
            "at least {MIN_STEPS} steps are required, got {}",
            options.steps
        )));
    }
    if initial.dim() != model.dim() {
        return Err(Error::DimensionMismatch {
            expected: model.dim(),
            found: initial.dim(),
        });
    }
    if (initial.norm() - 1.0).abs() > NORM_TOL {
        return Err(Error::InvalidParameter("initial state is not normalized".into()));
    }

    let m = options.steps;
    let states = integrate(model, cd, tau, initial, m, options.stepper)?;

    let step_halving_difference = match options.convergence_tol {
        None => None,
        Some(tolerance) => {
            let fine = integrate(model, cd, tau, initial, 2 * m, options.stepper)?;
            let difference = states[m].distance(&fine[2 * m]);
            if !(difference < tolerance) {
                return Err(Error::NotConverged {
                    difference,
                    tolerance,
                });
            }
            Some(difference)
        }
    };

    let s_grid: Vec<f64> = (0..=m).map(|k| k as f64 / m as f64).collect();
    let mut h0 = Vec::with_capacity(m + 1);
    let mut cd_generators = Vec::with_capacity(m + 1);
    let mut hamiltonians = Vec::with_capacity(m + 1);
    let mut h0_spectra = Vec::with_capacity(m + 1);
    let mut total_spectra = Vec::with_capacity(m + 1);
    for &s in &s_grid {
        let h0_s = model.h0(s)?;
        let gen = cd_generator(model, s)?;
        let total = match cd {
            None => h0_s.clone(),
            Some(c) => h0_s.add(&gen.scale(1.0 / c.intensity_time(tau)))?,
        };
        h0_spectra.push(eigendecompose(&h0_s)?);
        total_spectra.push(eigendecompose(&total)?);
        h0.push(h0_s);
        cd_generators.push(gen);
        hamiltonians.push(total);
    }

    Ok(EvolutionRecord {
        tau,
        cd,
        s_grid,
        states,
        h0,
        cd_generators,
        hamiltonians,
        h0_spectra,
        total_spectra,
        step_halving_difference,
    })
}

/// Ground state of `H0(0)`, the default initial condition.
pub fn ground_state<M: DrivenModel + ?Sized>(model: &M) -> Result<PureState> {
    Ok(eigendecompose(&model.h0(0.0)?)?.eigenstate(0))
}

/// `p_m(s_k) = |<m(s_k)|psi(s_k)>|^2` in the chosen eigenbasis.
pub fn transition_probabilities(record: &EvolutionRecord, basis: Basis) -> Vec<Vec<f64>> {
    record
        .spectra(basis)
        .iter()
        .zip(record.states())
        .map(|(spec, psi)| {
            spec.populations(psi)
                .expect("record spectra and states share a dimension")
        })
        .collect()
}

/// Adiabatically transported eigenstate `exp(i gamma) exp(-i omega) |n(s)>`.
#[derive(Clone, Debug)]
pub struct AdiabaticReference {
    pub eigenindex: usize,
    pub s_grid: Vec<f64>,
    /// Geometric phase.
    pub geometric_phase: Vec<f64>,
    /// Dynamical phase `tau * int_0^s E_n`.
    pub dynamical_phase: Vec<f64>,
    /// Phase absorbed where the eigenvector gauge switches its pivot component.
    pub gauge_phase: Vec<f64>,
    pub states: Vec<PureState>,
}

/// Minimum overlap magnitude between eigenvectors at adjacent grid points.
const MIN_ADJACENT_OVERLAP: f64 = 0.9;

/// Builds the adiabatic reference for eigenindex `n` of a Hamiltonian path.
///
/// The dynamical phase is trapezoid quadrature of `tau E_n(s)`. The geometric
/// phase accumulates `-arg <n_k|n_{k+1}>` with `n_{k+1}` re-gauged onto the
/// pivot component of `n_k`, which is the discrete parallel-transport form of
/// `i int <n|dn/ds> ds`. Pivot switches of the deterministic gauge are tracked
/// separately in `gauge_phase`.
pub fn adiabatic_reference<F>(
    path: F,
    tau: f64,
    eigenindex: usize,
    steps: usize,
) -> Result<AdiabaticReference>
where
    F: Fn(f64) -> Result<HermitianOperator>,
{
    if steps < 1 {
        return Err(Error::InvalidParameter("steps must be positive".into()));
    }
    let h = 1.0 / steps as f64;
    let s_grid: Vec<f64> = (0..=steps).map(|k| k as f64 / steps as f64).collect();
    let spectra: Vec<SpectralDecomposition> = s_grid
        .iter()
        .map(|&s| eigendecompose(&path(s)?))
        .collect::<Result<_>>()?;
    if eigenindex >= spectra[0].dim() {
        return Err(Error::DimensionMismatch {
            expected: spectra[0].dim(),
            found: eigenindex + 1,
        });
    }

    let mut geometric_phase = vec![0.0; steps + 1];
    let mut dynamical_phase = vec![0.0; steps + 1];
    let mut gauge_phase = vec![0.0; steps + 1];
    for k in 0..steps {
        let e0 = spectra[k].eigenvalues()[eigenindex];
        let e1 = spectra[k + 1].eigenvalues()[eigenindex];
        dynamical_phase[k + 1] = dynamical_phase[k] + tau * h * 0.5 * (e0 + e1);

        let v = spectra[k].eigenvector(eigenindex);
        let next = spectra[k + 1].eigenvector(eigenindex);
        let pivot = gauge_pivot(v);
        let jump = next[pivot].arg();
        let aligned: Vec<C64> = next
            .iter()
            .map(|z| z * C64::from_polar(1.0, -jump))
            .collect();
        let overlap = inner(v, &aligned);
        if overlap.norm() < MIN_ADJACENT_OVERLAP {
            return Err(Error::InvalidParameter(format!(
                "eigenvector {eigenindex} rotates too far between s = {} and s = {}; refine the grid",
                s_grid[k],
                s_grid[k + 1]
            )));
        }
        geometric_phase[k + 1] = geometric_phase[k] - overlap.arg();
        gauge_phase[k + 1] = gauge_phase[k] - jump;
    }

    let states = (0..=steps)
        .map(|k| {
            let phase = geometric_phase[k] - dynamical_phase[k] + gauge_phase[k];
            spectra[k].eigenstate(eigenindex).with_global_phase(phase)
        })
        .collect();

    Ok(AdiabaticReference {
        eigenindex,
        s_grid,
        geometric_phase,
        dynamical_phase,
        gauge_phase,
        states,
    })
}
