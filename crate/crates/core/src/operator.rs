//! Dense complex Hermitian linear algebra for small dimensions.
//!
//! Operators are stored row-major. The eigensolver is a cyclic complex Jacobi
//! sweep followed by ascending sort and a deterministic phase gauge on each
//! eigenvector (largest-magnitude component real and positive, lowest index
//! on ties).

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Absolute tolerance on `A_ij - conj(A_ji)` accepted by the constructors.
pub const HERMITICITY_TOL: f64 = 1e-12;
/// Accepted deviation of a state norm from one.
pub const NORM_TOL: f64 = 1e-10;
/// Default relative degeneracy tolerance, as a fraction of the spectral width.
pub const DEFAULT_DEGENERACY_TOL: f64 = 1e-10;

const MAX_SWEEPS: usize = 100;
const GAUGE_TIE_TOL: f64 = 1e-12;

/// N x N complex Hermitian matrix, N >= 2.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianOperator {
    dim: usize,
    entries: Vec<C64>,
}

impl HermitianOperator {
    /// Builds an operator from row-major entries. The input must be Hermitian
    /// within [`HERMITICITY_TOL`]; the stored matrix is the exact Hermitian part.
    pub fn from_entries(dim: usize, entries: Vec<C64>) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidParameter(format!(
                "operator dimension must be at least 2, got {dim}"
            )));
        }
        if entries.len() != dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim,
                found: entries.len(),
            });
        }
        let mut max_asymmetry: f64 = 0.0;
        for i in 0..dim {
            for j in i..dim {
                let d = (entries[i * dim + j] - entries[j * dim + i].conj()).norm();
                max_asymmetry = max_asymmetry.max(d);
            }
        }
        if !(max_asymmetry <= HERMITICITY_TOL) {
            return Err(Error::NotHermitian { max_asymmetry });
        }
        Ok(Self::hermitian_part(dim, entries))
    }

    pub fn from_rows(rows: &[Vec<C64>]) -> Result<Self> {
        let dim = rows.len();
        let mut entries = Vec::with_capacity(dim * dim);
        for row in rows {
            if row.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: row.len(),
                });
            }
            entries.extend_from_slice(row);
        }
        Self::from_entries(dim, entries)
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let rows: Vec<Vec<C64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| C64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn diagonal(values: &[f64]) -> Result<Self> {
        let dim = values.len();
        let mut entries = vec![C64::new(0.0, 0.0); dim * dim];
        for (k, &v) in values.iter().enumerate() {
            entries[k * dim + k] = C64::new(v, 0.0);
        }
        Self::from_entries(dim, entries)
    }

    pub fn zeros(dim: usize) -> Result<Self> {
        Self::from_entries(dim, vec![C64::new(0.0, 0.0); dim * dim])
    }

    fn hermitian_part(dim: usize, mut entries: Vec<C64>) -> Self {
        for i in 0..dim {
            entries[i * dim + i].im = 0.0;
            for j in (i + 1)..dim {
                let avg = (entries[i * dim + j] + entries[j * dim + i].conj()) * 0.5;
                entries[i * dim + j] = avg;
                entries[j * dim + i] = avg.conj();
            }
        }
        Self { dim, entries }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn get(&self, row: usize, col: usize) -> C64 {
        self.entries[row * self.dim + col]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[C64] {
        &self.entries
    }

    pub fn scale(&self, factor: f64) -> Self {
        Self {
            dim: self.dim,
            entries: self.entries.iter().map(|z| z * factor).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_dim(other.dim)?;
        Ok(Self {
            dim: self.dim,
            entries: self
                .entries
                .iter()
                .zip(&other.entries)
                .map(|(a, b)| a + b)
                .collect(),
        })
    }

    /// Applies the operator to a vector of amplitudes.
    pub fn apply(&self, v: &[C64]) -> Result<Vec<C64>> {
        self.check_dim(v.len())?;
        Ok(self.apply_unchecked(v))
    }

    pub(crate) fn apply_unchecked(&self, v: &[C64]) -> Vec<C64> {
        self.entries
            .chunks_exact(self.dim)
            .map(|row| row.iter().zip(v).map(|(a, x)| a * x).sum())
            .collect()
    }

    /// `<a|A|b>`.
    pub fn matrix_element(&self, a: &[C64], b: &[C64]) -> Result<C64> {
        let ab = self.apply(b)?;
        self.check_dim(a.len())?;
        Ok(inner(a, &ab))
    }

    /// Largest absolute entrywise difference.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        if self.dim != other.dim {
            return f64::INFINITY;
        }
        self.entries
            .iter()
            .zip(&other.entries)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.entries.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    fn check_dim(&self, found: usize) -> Result<()> {
        if found != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }
}

/// `<a|b>` for raw amplitude vectors.
pub fn inner(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Unit-norm state vector.
#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    amplitudes: Vec<C64>,
}

impl PureState {
    /// Wraps amplitudes that are already normalized within [`NORM_TOL`].
    pub fn new(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if (n - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidParameter(format!(
                "state norm {n} differs from 1"
            )));
        }
        Ok(Self { amplitudes })
    }

    pub fn normalized(amplitudes: Vec<C64>) -> Result<Self> {
        let n = norm(&amplitudes);
        if !(n > 0.0) || !n.is_finite() {
            return Err(Error::InvalidParameter(
                "cannot normalize a zero or non-finite vector".into(),
            ));
        }
        Ok(Self {
            amplitudes: amplitudes.into_iter().map(|z| z / n).collect(),
        })
    }

    pub fn basis(dim: usize, k: usize) -> Result<Self> {
        if k >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: k + 1,
            });
        }
        let mut amplitudes = vec![C64::new(0.0, 0.0); dim];
        amplitudes[k] = C64::new(1.0, 0.0);
        Ok(Self { amplitudes })
    }

    pub(crate) fn from_unchecked(amplitudes: Vec<C64>) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn overlap(&self, other: &PureState) -> Result<C64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(inner(&self.amplitudes, &other.amplitudes))
    }

    /// Multiplies every amplitude by `exp(i phase)`.
    pub fn with_global_phase(&self, phase: f64) -> Self {
        let f = C64::from_polar(1.0, phase);
        Self {
            amplitudes: self.amplitudes.iter().map(|z| z * f).collect(),
        }
    }

    /// Euclidean distance to another state, including phase.
    pub fn distance(&self, other: &PureState) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// Ascending eigenvalues with gauge-fixed orthonormal eigenvectors.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: Vec<Vec<C64>>,
}

impl SpectralDecomposition {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn eigenvector(&self, k: usize) -> &[C64] {
        &self.eigenvectors[k]
    }

    pub fn eigenstate(&self, k: usize) -> PureState {
        PureState::from_unchecked(self.eigenvectors[k].clone())
    }

    pub fn ground_energy(&self) -> f64 {
        self.eigenvalues[0]
    }

    /// Largest minus smallest eigenvalue.
    pub fn width(&self) -> f64 {
        self.eigenvalues[self.dim() - 1] - self.eigenvalues[0]
    }

    /// `|<k|psi>|^2` for every eigenvector.
    pub fn populations(&self, state: &PureState) -> Result<Vec<f64>> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(self
            .eigenvectors
            .iter()
            .map(|v| inner(v, state.amplitudes()).norm_sqr())
            .collect())
    }

    /// Index of the eigenvector with the largest overlap `|<k|psi>|`, and that overlap.
    pub fn nearest_eigenstate(&self, state: &PureState) -> Result<(usize, f64)> {
        let pops = self.populations(state)?;
        let (k, p) = pops
            .iter()
            .enumerate()
            .fold((0, f64::NEG_INFINITY), |best, (k, &p)| {
                if p > best.1 {
                    (k, p)
                } else {
                    best
                }
            });
        Ok((k, p.sqrt()))
    }

    /// `sum_k E_k |v_k><v_k|`.
    pub fn reconstruct(&self) -> HermitianOperator {
        let n = self.dim();
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for (e, v) in self.eigenvalues.iter().zip(&self.eigenvectors) {
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += v[i] * v[j].conj() * *e;
                }
            }
        }
        HermitianOperator::hermitian_part(n, entries)
    }
}

/// Spectral decomposition with the default degeneracy tolerance.
pub fn eigendecompose(op: &HermitianOperator) -> Result<SpectralDecomposition> {
    eigendecompose_with_tolerance(op, DEFAULT_DEGENERACY_TOL)
}

/// Spectral decomposition; fails with `DegenerateSpectrum` when some adjacent
/// gap is not larger than `relative_tol` times the spectral width.
pub fn eigendecompose_with_tolerance(
    op: &HermitianOperator,
    relative_tol: f64,
) -> Result<SpectralDecomposition> {
    let decomposition = jacobi_eigen(op);
    let tolerance = relative_tol * decomposition.width();
    for (level, pair) in decomposition.eigenvalues.windows(2).enumerate() {
        let gap = pair[1] - pair[0];
        if !(gap > tolerance) {
            return Err(Error::DegenerateSpectrum {
                level,
                gap,
                tolerance,
            });
        }
    }
    Ok(decomposition)
}

/// Cyclic Jacobi without the degeneracy check. Used where only the spectral
/// projector sum matters (e.g. matrix exponentials).
pub(crate) fn jacobi_eigen(op: &HermitianOperator) -> SpectralDecomposition {
    let n = op.dim;
    let mut a = op.entries.clone();
    let mut v = vec![C64::new(0.0, 0.0); n * n];
    for k in 0..n {
        v[k * n + k] = C64::new(1.0, 0.0);
    }
    let scale = op.frobenius_norm();

    for _ in 0..MAX_SWEEPS {
        let off: f64 = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j].norm_sqr())
            .sum();
        if off.sqrt() <= 1e-17 * scale || off == 0.0 {
            break;
        }
        for p in 0..n - 1 {
            for q in (p + 1)..n {
                rotate(&mut a, &mut v, n, p, q);
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i * n + i].re.total_cmp(&a[j * n + j].re));
    let eigenvalues = order.iter().map(|&k| a[k * n + k].re).collect();
    let eigenvectors = order
        .iter()
        .map(|&k| {
            let mut col: Vec<C64> = (0..n).map(|i| v[i * n + k]).collect();
            fix_gauge(&mut col);
            col
        })
        .collect();
    SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    }
}

/// One complex Jacobi rotation annihilating `a[p][q]`: a <- J^H a J, v <- v J
/// with J = diag(1, e^{-i phi}) * R(theta) restricted to the (p, q) plane.
fn rotate(a: &mut [C64], v: &mut [C64], n: usize, p: usize, q: usize) {
    let g = a[p * n + q];
    let g_abs = g.norm();
    if g_abs < 1e-300 {
        return;
    }
    let phase_conj = (g / g_abs).conj();
    let app = a[p * n + p].re;
    let aqq = a[q * n + q].re;
    let theta = (aqq - app) / (2.0 * g_abs);
    let t = if theta.abs() > 1e150 {
        0.5 / theta
    } else {
        theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt())
    };
    let c = 1.0 / (t * t + 1.0).sqrt();
    let s = t * c;

    let j_pp = C64::new(c, 0.0);
    let j_pq = C64::new(s, 0.0);
    let j_qp = phase_conj * (-s);
    let j_qq = phase_conj * c;

    for k in 0..n {
        let akp = a[k * n + p];
        let akq = a[k * n + q];
        a[k * n + p] = akp * j_pp + akq * j_qp;
        a[k * n + q] = akp * j_pq + akq * j_qq;
    }
    for k in 0..n {
        let apk = a[p * n + k];
        let aqk = a[q * n + k];
        a[p * n + k] = j_pp.conj() * apk + j_qp.conj() * aqk;
        a[q * n + k] = j_pq.conj() * apk + j_qq.conj() * aqk;
    }
    a[p * n + q] = C64::new(0.0, 0.0);
    a[q * n + p] = C64::new(0.0, 0.0);
    a[p * n + p].im = 0.0;
    a[q * n + q].im = 0.0;

    for k in 0..n {
        let vkp = v[k * n + p];
        let vkq = v[k * n + q];
        v[k * n + p] = vkp * j_pp + vkq * j_qp;
        v[k * n + q] = vkp * j_pq + vkq * j_qq;
    }
}

/// Index of the component the gauge makes real and positive.
pub(crate) fn gauge_pivot(v: &[C64]) -> usize {
    let mut best = 0;
    let mut best_abs = v[0].norm();
    for (k, z) in v.iter().enumerate().skip(1) {
        let m = z.norm();
        if m > best_abs * (1.0 + GAUGE_TIE_TOL) {
            best = k;
            best_abs = m;
        }
    }
    best
}

fn fix_gauge(v: &mut [C64]) {
    let pivot = v[gauge_pivot(v)];
    let unit = pivot.conj() / pivot.norm();
    for z in v.iter_mut() {
        *z *= unit;
    }
    let k = gauge_pivot(v);
    v[k] = C64::new(v[k].norm(), 0.0);
}

fn check_state(op: &HermitianOperator, state: &PureState) -> Result<()> {
    if op.dim() != state.dim() {
        return Err(Error::DimensionMismatch {
            expected: op.dim(),
            found: state.dim(),
        });
    }
    Ok(())
}

/// `<psi|A|psi>`.
pub fn expectation(op: &HermitianOperator, state: &PureState) -> Result<f64> {
    check_state(op, state)?;
    let z = inner(state.amplitudes(), &op.apply_unchecked(state.amplitudes()));
    debug_assert!(z.im.abs() <= 1e-10 * z.re.abs().max(1.0) * op.frobenius_norm().max(1.0));
    Ok(z.re)
}

/// Standard deviation `sqrt(<A^2> - <A>^2)`.
///
/// Evaluated as the residual norm `||(A - <A>) psi||`, which is the same
/// quantity without the cancellation of the two moments.
pub fn energy_std(op: &HermitianOperator, state: &PureState) -> Result<f64> {
    check_state(op, state)?;
    let psi = state.amplitudes();
    let h_psi = op.apply_unchecked(psi);
    let mean = inner(psi, &h_psi).re;
    let residual: Vec<C64> = h_psi.iter().zip(psi).map(|(h, p)| h - p * mean).collect();
    Ok(norm(&residual))
}

/// Trace norm of `|psi><psi| A`, which for a pure state equals `||A psi||`.
pub fn trace_norm_product(op: &HermitianOperator, state: &PureState) -> Result<f64> {
    check_state(op, state)?;
    Ok(norm(&op.apply_unchecked(state.amplitudes())))
}
