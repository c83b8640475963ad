//! Counterdiabatic Hamiltonian synthesis.
//!
//! The transitionless term for a nondegenerate path `H0(s)` is written as
//! `H1(s) = G(s) / T`, where `T` is the intensity time and
//!
//! ```text
//! G(s) = i sum_{m != n} |m><m| dH0/ds |n><n| / (E_n - E_m)
//! ```
//!
//! is built from off-diagonal matrix elements of `dH0/ds` in the instantaneous
//! eigenbasis, so eigenvector phases cancel. In the standard convention
//! `T = tau`; in the fixed-intensity convention `T = tau_d` independently of
//! the protocol duration.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{check_intensity, check_s, pauli_y, DrivenModel, LzParams};
use crate::operator::{eigendecompose, HermitianOperator, C64};

/// How the intensity of the counterdiabatic term is tied to durations.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum CdConvention {
    /// Intensity `1/tau`: the term vanishes in the adiabatic limit.
    Standard,
    /// Intensity `1/tau_d`, held at the original driving duration.
    TauDFixed { tau_d: f64 },
}

impl CdConvention {
    pub fn tau_d_fixed(tau_d: f64) -> Result<Self> {
        if !(tau_d > 0.0) || !tau_d.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "tau_d must be positive, got {tau_d}"
            )));
        }
        Ok(CdConvention::TauDFixed { tau_d })
    }

    /// Time whose inverse sets the strength of `H1` for a protocol of duration `tau`.
    pub fn intensity_time(&self, tau: f64) -> f64 {
        match *self {
            CdConvention::Standard => tau,
            CdConvention::TauDFixed { tau_d } => tau_d,
        }
    }
}

/// `G(s)`, the counterdiabatic term at unit intensity time.
pub fn cd_generator<M: DrivenModel + ?Sized>(model: &M, s: f64) -> Result<HermitianOperator> {
    check_s(s)?;
    let spectrum = eigendecompose(&model.h0(s)?)?;
    let vectors: Vec<Vec<C64>> = (0..spectrum.dim())
        .map(|k| spectrum.eigenvector(k).to_vec())
        .collect();
    generator_from_eigenbasis(spectrum.eigenvalues(), &vectors, &model.dh0_ds(s)?)
}

pub(crate) fn generator_from_eigenbasis(
    eigenvalues: &[f64],
    eigenvectors: &[Vec<C64>],
    dh0: &HermitianOperator,
) -> Result<HermitianOperator> {
    let n = eigenvalues.len();
    let dh_vectors: Vec<Vec<C64>> = eigenvectors
        .iter()
        .map(|v| dh0.apply(v))
        .collect::<Result<_>>()?;
    let mut entries = vec![C64::new(0.0, 0.0); n * n];
    for m in 0..n {
        for k in 0..n {
            if m == k {
                continue;
            }
            let element: C64 = crate::operator::inner(&eigenvectors[m], &dh_vectors[k]);
            let coeff = C64::i() * element / (eigenvalues[k] - eigenvalues[m]);
            for i in 0..n {
                for j in 0..n {
                    entries[i * n + j] += coeff * eigenvectors[m][i] * eigenvectors[k][j].conj();
                }
            }
        }
    }
    HermitianOperator::from_entries(n, entries)
}

/// `H1(s)` for a given intensity time.
pub fn synthesize_h1<M: DrivenModel + ?Sized>(
    model: &M,
    s: f64,
    intensity_time: f64,
) -> Result<HermitianOperator> {
    check_intensity(intensity_time)?;
    Ok(cd_generator(model, s)?.scale(1.0 / intensity_time))
}

/// Closed-form Landau-Zener term `C(s) * Y` with `Y = [[0, i], [-i, 0]]`.
///
/// `Y` is minus the standard `sigma_y`; with this orientation the analytic
/// eigenstates carrying `exp(i mu)`, `mu = atan2(C, J)`, are exact and the
/// term cancels the diabatic coupling.
pub fn lz_h1_analytic(params: &LzParams, s: f64, intensity_time: f64) -> Result<HermitianOperator> {
    let c = params.cd_amplitude(s, intensity_time)?;
    Ok(pauli_y().scale(-c))
}

/// `H0(s) + H1(s)` with the intensity time chosen by the convention.
pub fn total_hamiltonian<M: DrivenModel + ?Sized>(
    model: &M,
    s: f64,
    convention: CdConvention,
    tau: f64,
) -> Result<HermitianOperator> {
    let h1 = synthesize_h1(model, s, convention.intensity_time(tau))?;
    model.h0(s)?.add(&h1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Protocol, ProtocolKind};
    use crate::operator::{expectation, inner};

    fn fig1(kind: ProtocolKind) -> LzParams {
        LzParams::new(5.0, Protocol::new(kind, -50.0, 50.0).unwrap()).unwrap()
    }

    #[test]
    fn vanishes_where_rate_vanishes() {
        let p = fig1(ProtocolKind::Smoothstep);
        for s in [0.0, 1.0] {
            let h1 = synthesize_h1(&p, s, 0.1).unwrap();
            assert_eq!(h1.frobenius_norm(), 0.0);
            assert_eq!(lz_h1_analytic(&p, s, 0.1).unwrap().frobenius_norm(), 0.0);
        }
    }

    #[test]
    fn midpoint_amplitude_matches_closed_form() {
        let p = fig1(ProtocolKind::Smoothstep);
        let h1 = synthesize_h1(&p, 0.5, 0.1).unwrap();
        assert!((h1.get(0, 1) - C64::new(0.0, 150.0)).norm() < 1e-10);
        assert!((h1.get(1, 0) - C64::new(0.0, -150.0)).norm() < 1e-10);
        let analytic = lz_h1_analytic(&p, 0.5, 0.1).unwrap();
        assert!(h1.max_abs_diff(&analytic) < 1e-10);
    }

    #[test]
    fn general_and_analytic_agree_on_grid() {
        for kind in [ProtocolKind::Smoothstep, ProtocolKind::Linear] {
            let p = fig1(kind);
            for k in 0..=100 {
                let s = k as f64 / 100.0;
                let a = synthesize_h1(&p, s, 0.1).unwrap();
                let b = lz_h1_analytic(&p, s, 0.1).unwrap();
                assert!(a.max_abs_diff(&b) < 1e-10, "s = {s}");
            }
        }
    }

    #[test]
    fn analytic_total_eigenstates_diagonalize_total_hamiltonian() {
        let p = fig1(ProtocolKind::Linear);
        for k in 0..=20 {
            let s = k as f64 / 20.0;
            let h = total_hamiltonian(&p, s, CdConvention::Standard, 0.1).unwrap();
            let spec = p.spectrum_total(s, 0.1).unwrap();
            let [g, e] = p.eigenstates_total(s, 0.1).unwrap();
            let hg = h.apply(g.amplitudes()).unwrap();
            let he = h.apply(e.amplitudes()).unwrap();
            for i in 0..2 {
                assert!((hg[i] - g.amplitudes()[i] * spec.e_minus).norm() < 1e-10);
                assert!((he[i] - e.amplitudes()[i] * spec.e_plus).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn halving_intensity_time_doubles_amplitude() {
        let p = fig1(ProtocolKind::Smoothstep);
        let a = p.cd_amplitude(0.3, 0.2).unwrap();
        let b = p.cd_amplitude(0.3, 0.1).unwrap();
        assert_eq!(b, 2.0 * a);
    }

    #[test]
    fn conventions_select_intensity() {
        let p = fig1(ProtocolKind::Smoothstep);
        let fixed = CdConvention::tau_d_fixed(0.1).unwrap();
        let a = total_hamiltonian(&p, 0.4, CdConvention::Standard, 0.1).unwrap();
        let b = total_hamiltonian(&p, 0.4, fixed, 0.1).unwrap();
        assert_eq!(a, b);
        let c = total_hamiltonian(&p, 0.4, fixed, 10.0).unwrap();
        assert_eq!(b, c);
        assert_eq!(
            total_hamiltonian(&p, 0.0, fixed, 0.1).unwrap(),
            p.h0(0.0).unwrap()
        );
        assert!(CdConvention::tau_d_fixed(0.0).is_err());
    }

    #[test]
    fn standard_mode_scales_inversely_with_tau() {
        let p = fig1(ProtocolKind::Linear);
        let a = synthesize_h1(&p, 0.3, 0.5).unwrap();
        let b = synthesize_h1(&p, 0.3, 1.0).unwrap();
        for (x, y) in a.entries().iter().zip(b.entries()) {
            if y.norm() > 0.0 {
                assert!((x / y - C64::new(2.0, 0.0)).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn zero_mean_in_reference_eigenstates() {
        let p = fig1(ProtocolKind::Smoothstep);
        let h1 = synthesize_h1(&p, 0.45, 0.05).unwrap();
        let spec = eigendecompose(&p.h0(0.45).unwrap()).unwrap();
        for k in 0..2 {
            assert!(expectation(&h1, &spec.eigenstate(k)).unwrap().abs() < 1e-10);
            let d = inner(spec.eigenvector(k), &h1.apply(spec.eigenvector(k)).unwrap());
            assert!(d.norm() < 1e-12);
        }
    }

    #[test]
    fn generator_ignores_eigenvector_phases() {
        let p = fig1(ProtocolKind::Smoothstep);
        let s = 0.37;
        let spec = eigendecompose(&p.h0(s).unwrap()).unwrap();
        let dh = p.dh0_ds(s).unwrap();
        let plain: Vec<Vec<C64>> = (0..2).map(|k| spec.eigenvector(k).to_vec()).collect();
        let twirled: Vec<Vec<C64>> = plain
            .iter()
            .zip([0.7, -2.1])
            .map(|(v, phase)| v.iter().map(|z| z * C64::from_polar(1.0, phase)).collect())
            .collect();
        let a = generator_from_eigenbasis(spec.eigenvalues(), &plain, &dh).unwrap();
        let b = generator_from_eigenbasis(spec.eigenvalues(), &twirled, &dh).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-12);
        assert!(a.max_abs_diff(&cd_generator(&p, s).unwrap()) == 0.0);
    }

    #[test]
    fn rejects_bad_intensity_and_range() {
        let p = fig1(ProtocolKind::Smoothstep);
        assert!(synthesize_h1(&p, 0.5, -1.0).is_err());
        assert!(matches!(
            synthesize_h1(&p, 1.2, 1.0),
            Err(Error::OutOfRange { .. })
        ));
    }
}
