//! Driving protocols and the Landau-Zener model.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operator::{HermitianOperator, PureState, C64};

/// Shape of the schedule `lambda(s)` on `s in [0, 1]`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ProtocolKind {
    /// `lambda_i + (lambda_f - lambda_i) s`
    Linear,
    /// `lambda_i + (lambda_f - lambda_i)(3 s^2 - 2 s^3)`, zero rate at both ends.
    Smoothstep,
}

impl ProtocolKind {
    pub fn name(self) -> &'static str {
        match self {
            ProtocolKind::Linear => "linear",
            ProtocolKind::Smoothstep => "smoothstep",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Protocol {
    pub kind: ProtocolKind,
    pub lambda_i: f64,
    pub lambda_f: f64,
}

pub(crate) fn check_s(s: f64) -> Result<()> {
    if (0.0..=1.0).contains(&s) {
        Ok(())
    } else {
        Err(Error::OutOfRange { what: "s", value: s })
    }
}

impl Protocol {
    pub fn new(kind: ProtocolKind, lambda_i: f64, lambda_f: f64) -> Result<Self> {
        if !lambda_i.is_finite() || !lambda_f.is_finite() {
            return Err(Error::InvalidParameter(
                "protocol endpoints must be finite".into(),
            ));
        }
        Ok(Self {
            kind,
            lambda_i,
            lambda_f,
        })
    }

    pub fn linear(lambda_i: f64, lambda_f: f64) -> Result<Self> {
        Self::new(ProtocolKind::Linear, lambda_i, lambda_f)
    }

    pub fn smoothstep(lambda_i: f64, lambda_f: f64) -> Result<Self> {
        Self::new(ProtocolKind::Smoothstep, lambda_i, lambda_f)
    }

    /// Fraction of the way from `lambda_i` to `lambda_f`, and its s-derivative.
    fn weight(&self, s: f64) -> (f64, f64) {
        match self.kind {
            ProtocolKind::Linear => (s, 1.0),
            ProtocolKind::Smoothstep => (s * s * (3.0 - 2.0 * s), 6.0 * s * (1.0 - s)),
        }
    }

    pub fn value(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let (w, _) = self.weight(s);
        // exact at both endpoints
        Ok(self.lambda_i * (1.0 - w) + self.lambda_f * w)
    }

    /// `d lambda / ds`.
    pub fn derivative(&self, s: f64) -> Result<f64> {
        check_s(s)?;
        let (_, dw) = self.weight(s);
        Ok((self.lambda_f - self.lambda_i) * dw)
    }
}

/// A Hamiltonian path `H0(s)` with its s-derivative.
pub trait DrivenModel: Sync {
    fn dim(&self) -> usize;
    fn h0(&self, s: f64) -> Result<HermitianOperator>;
    fn dh0_ds(&self, s: f64) -> Result<HermitianOperator>;
}

pub fn pauli_x() -> HermitianOperator {
    pauli([[0.0, 0.0], [1.0, 0.0], [1.0, 0.0], [0.0, 0.0]])
}

pub fn pauli_y() -> HermitianOperator {
    pauli([[0.0, 0.0], [0.0, -1.0], [0.0, 1.0], [0.0, 0.0]])
}

pub fn pauli_z() -> HermitianOperator {
    pauli([[1.0, 0.0], [0.0, 0.0], [0.0, 0.0], [-1.0, 0.0]])
}

fn pauli(e: [[f64; 2]; 4]) -> HermitianOperator {
    HermitianOperator::from_entries(2, e.iter().map(|z| C64::new(z[0], z[1])).collect())
        .expect("Pauli matrices are Hermitian")
}

/// Landau-Zener model `H0 = B(s) sigma_z + J sigma_x`, with `B` following a protocol.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzParams {
    pub j: f64,
    pub protocol: Protocol,
}

/// Analytic spectrum of `H0(s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzSpectrum {
    pub e_minus: f64,
    pub e_plus: f64,
    /// Mixing angle `atan2(J, B) / 2`, in `(0, pi/2)`.
    pub theta: f64,
}

/// Analytic spectrum of `H0(s) + H1(s)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LzTotalSpectrum {
    pub e_minus: f64,
    pub e_plus: f64,
    pub theta_c: f64,
    pub mu: f64,
    /// Counterdiabatic amplitude `C(s)`.
    pub c: f64,
}

impl LzParams {
    pub fn new(j: f64, protocol: Protocol) -> Result<Self> {
        if !(j > 0.0) || !j.is_finite() {
            return Err(Error::InvalidParameter(format!("J must be positive, got {j}")));
        }
        Ok(Self { j, protocol })
    }

    pub fn b(&self, s: f64) -> Result<f64> {
        self.protocol.value(s)
    }

    /// Counterdiabatic amplitude `C = J B'(s) / (2 T (B^2 + J^2))` for intensity time `T`.
    pub fn cd_amplitude(&self, s: f64, intensity_time: f64) -> Result<f64> {
        check_intensity(intensity_time)?;
        let b = self.protocol.value(s)?;
        let db = self.protocol.derivative(s)?;
        Ok(self.j * db / (2.0 * intensity_time * (b * b + self.j * self.j)))
    }

    pub fn spectrum_h0(&self, s: f64) -> Result<LzSpectrum> {
        let b = self.b(s)?;
        let e = b.hypot(self.j);
        Ok(LzSpectrum {
            e_minus: -e,
            e_plus: e,
            theta: 0.5 * self.j.atan2(b),
        })
    }

    pub fn spectrum_total(&self, s: f64, tau_d: f64) -> Result<LzTotalSpectrum> {
        let b = self.b(s)?;
        let c = self.cd_amplitude(s, tau_d)?;
        let transverse = c.hypot(self.j);
        let e = b.hypot(transverse);
        Ok(LzTotalSpectrum {
            e_minus: -e,
            e_plus: e,
            theta_c: 0.5 * transverse.atan2(b),
            mu: c.atan2(self.j),
            c,
        })
    }

    /// Analytic `H0` eigenstates `[ground, excited]` in the `(up, down)` basis.
    pub fn eigenstates_h0(&self, s: f64) -> Result<[PureState; 2]> {
        let theta = self.spectrum_h0(s)?.theta;
        let (sin, cos) = theta.sin_cos();
        Ok([
            PureState::from_unchecked(vec![C64::new(-sin, 0.0), C64::new(cos, 0.0)]),
            PureState::from_unchecked(vec![C64::new(cos, 0.0), C64::new(sin, 0.0)]),
        ])
    }

    /// Analytic eigenstates `[ground, excited]` of the counterdiabatic total Hamiltonian.
    pub fn eigenstates_total(&self, s: f64, tau_d: f64) -> Result<[PureState; 2]> {
        let spec = self.spectrum_total(s, tau_d)?;
        let (sin, cos) = spec.theta_c.sin_cos();
        let phase = C64::from_polar(1.0, spec.mu);
        Ok([
            PureState::from_unchecked(vec![phase * (-sin), C64::new(cos, 0.0)]),
            PureState::from_unchecked(vec![phase * cos, C64::new(sin, 0.0)]),
        ])
    }
}

pub(crate) fn check_intensity(intensity_time: f64) -> Result<()> {
    if intensity_time > 0.0 && intensity_time.is_finite() {
        Ok(())
    } else {
        Err(Error::OutOfRange {
            what: "intensity time",
            value: intensity_time,
        })
    }
}

impl DrivenModel for LzParams {
    fn dim(&self) -> usize {
        2
    }

    fn h0(&self, s: f64) -> Result<HermitianOperator> {
        let b = self.b(s)?;
        pauli_z().scale(b).add(&pauli_x().scale(self.j))
    }

    fn dh0_ds(&self, s: f64) -> Result<HermitianOperator> {
        Ok(pauli_z().scale(self.protocol.derivative(s)?))
    }
}
