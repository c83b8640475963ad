use cdwork_core::counterdiabatic::{cd_generator, CdConvention};
use cdwork_core::energetics::{time_average, work_decomposition, work_series};
use cdwork_core::model::{DrivenModel, LzParams, Protocol, ProtocolKind};
use cdwork_core::operator::{
    eigendecompose, energy_std, expectation, inner, trace_norm_product, HermitianOperator,
    PureState, C64,
};
use cdwork_core::propagation::{
    ground_state, propagate, transition_probabilities, Basis, PropagationOptions,
};
use cdwork_core::{Error, Result};
use proptest::prelude::*;

fn hermitian(n: usize) -> impl Strategy<Value = HermitianOperator> {
    prop::collection::vec(-10.0f64..10.0, 2 * n * n).prop_map(move |raw| {
        let mut entries = vec![C64::new(0.0, 0.0); n * n];
        for i in 0..n {
            entries[i * n + i] = C64::new(raw[2 * (i * n + i)], 0.0);
            for j in i + 1..n {
                let z = C64::new(raw[2 * (i * n + j)], raw[2 * (i * n + j) + 1]);
                entries[i * n + j] = z;
                entries[j * n + i] = z.conj();
            }
        }
        HermitianOperator::from_entries(n, entries).unwrap()
    })
}

fn state(n: usize) -> impl Strategy<Value = PureState> {
    prop::collection::vec(-1.0f64..1.0, 2 * n)
        .prop_filter("nonzero", |v| v.iter().any(|x| x.abs() > 1e-3))
        .prop_map(move |v| {
            PureState::normalized((0..n).map(|k| C64::new(v[2 * k], v[2 * k + 1])).collect())
                .unwrap()
        })
}

fn op_and_state() -> impl Strategy<Value = (HermitianOperator, PureState)> {
    (2usize..=6).prop_flat_map(|n| (hermitian(n), state(n)))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn decomposition_invariants(op in (2usize..=6).prop_flat_map(hermitian)) {
        let spec = match eigendecompose(&op) {
            Ok(s) => s,
            Err(Error::DegenerateSpectrum { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let n = op.dim();
        prop_assert!(spec.reconstruct().max_abs_diff(&op) < 1e-10);
        for a in 0..n {
            for b in 0..n {
                let ip = inner(spec.eigenvector(a), spec.eigenvector(b));
                let expected = if a == b { 1.0 } else { 0.0 };
                prop_assert!((ip - C64::new(expected, 0.0)).norm() < 1e-12);
            }
            let v = spec.eigenvector(a);
            let pivot = v.iter().map(|z| z.norm()).fold(0.0, f64::max);
            let largest = v.iter().find(|z| z.norm() >= pivot * (1.0 - 1e-12)).unwrap();
            prop_assert!(largest.im == 0.0 && largest.re > 0.0);
            if a + 1 < n {
                prop_assert!(spec.eigenvalues()[a] < spec.eigenvalues()[a + 1]);
            }
        }
        let again = eigendecompose(&op).unwrap();
        prop_assert_eq!(again.eigenvalues(), spec.eigenvalues());
    }

    #[test]
    fn eigenstates_have_no_spread((op, _) in op_and_state()) {
        if let Ok(spec) = eigendecompose(&op) {
            for k in 0..op.dim() {
                let std = energy_std(&op, &spec.eigenstate(k)).unwrap();
                prop_assert!(std <= 1e-8 * spec.width());
            }
        }
    }

    #[test]
    fn expectation_is_linear_and_phase_blind(
        (a, psi) in op_and_state(),
        x in -3.0f64..3.0,
        y in -3.0f64..3.0,
        phase in 0.0f64..6.3,
    ) {
        let b = HermitianOperator::diagonal(&(0..a.dim()).map(|k| k as f64 - 1.5).collect::<Vec<_>>()).unwrap();
        let combo = a.scale(x).add(&b.scale(y)).unwrap();
        let lhs = expectation(&combo, &psi).unwrap();
        let rhs = x * expectation(&a, &psi).unwrap() + y * expectation(&b, &psi).unwrap();
        prop_assert!((lhs - rhs).abs() < 1e-10 * (1.0 + lhs.abs()));
        let rotated = psi.with_global_phase(phase);
        prop_assert!((expectation(&a, &rotated).unwrap() - expectation(&a, &psi).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn bhatia_davis_and_trace_norm((op, psi) in op_and_state()) {
        if let Ok(spec) = eigendecompose(&op) {
            let mean = expectation(&op, &psi).unwrap();
            let var = energy_std(&op, &psi).unwrap().powi(2);
            let lo = spec.eigenvalues()[0];
            let hi = spec.eigenvalues()[op.dim() - 1];
            prop_assert!(var <= (hi - mean) * (mean - lo) + 1e-9);
            let tn = trace_norm_product(&op, &psi).unwrap();
            let hpsi = op.apply(psi.amplitudes()).unwrap();
            let second_moment = inner(&hpsi, &hpsi).re;
            prop_assert!((tn * tn - second_moment).abs() < 1e-9 * (1.0 + second_moment));
            prop_assert!(tn + 1e-12 >= mean.abs());
        }
    }
}

/// `H0(s) = A + s B + s^2 C` on a random 3- or 4-level space.
#[derive(Debug)]
struct Polynomial {
    terms: [HermitianOperator; 3],
}

impl DrivenModel for Polynomial {
    fn dim(&self) -> usize {
        self.terms[0].dim()
    }
    fn h0(&self, s: f64) -> Result<HermitianOperator> {
        self.terms[0]
            .add(&self.terms[1].scale(s))?
            .add(&self.terms[2].scale(s * s))
    }
    fn dh0_ds(&self, s: f64) -> Result<HermitianOperator> {
        self.terms[1].add(&self.terms[2].scale(2.0 * s))
    }
}

fn polynomial() -> impl Strategy<Value = Polynomial> {
    (3usize..=4).prop_flat_map(|n| {
        (hermitian(n), hermitian(n), hermitian(n)).prop_map(move |(a, b, c)| {
            // a dominant spread diagonal keeps the path nondegenerate
            let spread = HermitianOperator::diagonal(
                &(0..n).map(|k| 25.0 * k as f64).collect::<Vec<_>>(),
            )
            .unwrap();
            Polynomial {
                terms: [a.scale(0.3).add(&spread).unwrap(), b.scale(0.5), c.scale(0.5)],
            }
        })
    })
}

fn commutator(a: &HermitianOperator, b: &HermitianOperator) -> Vec<C64> {
    let n = a.dim();
    let mut out = vec![C64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                out[i * n + j] += a.get(i, k) * b.get(k, j) - b.get(i, k) * a.get(k, j);
            }
        }
    }
    out
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// `[G, H0]` reproduces `i dH0/ds` off the diagonal of the eigenbasis.
    #[test]
    fn generator_solves_commutator_equation(model in polynomial(), s in 0.0f64..1.0) {
        let h0 = model.h0(s).unwrap();
        let spec = eigendecompose(&h0).unwrap();
        let g = cd_generator(&model, s).unwrap();
        let dh = model.dh0_ds(s).unwrap();
        let c = commutator(&g, &h0);
        let n = model.dim();
        let element = |m: &[C64], v: &[C64], k: usize| -> C64 {
            (0..n).map(|i| m[i].conj() * (0..n).map(|j| v[i * n + j] * spec.eigenvector(k)[j]).sum::<C64>()).sum()
        };
        let dh_entries = dh.entries().to_vec();
        for a in 0..n {
            prop_assert!(g.matrix_element(spec.eigenvector(a), spec.eigenvector(a)).unwrap().norm() < 1e-10);
            for b in 0..n {
                if a == b {
                    continue;
                }
                let lhs = element(spec.eigenvector(a), &c, b);
                let rhs = C64::i() * element(spec.eigenvector(a), &dh_entries, b);
                prop_assert!((lhs - rhs).norm() < 1e-9 * (1.0 + rhs.norm()), "{lhs} vs {rhs}");
            }
        }
    }

    /// Driving with `H0 + G/tau` keeps an instantaneous eigenstate of `H0` populated.
    #[test]
    fn random_multilevel_cd_is_transitionless(model in polynomial(), tau in 0.05f64..1.0) {
        let psi0 = ground_state(&model).unwrap();
        let rec = propagate(&model, Some(CdConvention::Standard), tau, &psi0, PropagationOptions::unchecked(1000)).unwrap();
        let p = transition_probabilities(&rec, Basis::H0);
        let worst = p.iter().map(|row| row[0]).fold(1.0, f64::min);
        prop_assert!(worst > 1.0 - 1e-6, "{worst}");
        for row in &p {
            prop_assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
    }

    #[test]
    fn work_identities_hold_for_lz(
        j in 2.0f64..10.0,
        b_i in -50.0f64..50.0,
        b_f in -50.0f64..50.0,
        tau in 0.05f64..2.0,
        linear in any::<bool>(),
        cd_on in any::<bool>(),
    ) {
        let kind = if linear { ProtocolKind::Linear } else { ProtocolKind::Smoothstep };
        let p = LzParams::new(j, Protocol::new(kind, b_i, b_f).unwrap()).unwrap();
        let psi0 = ground_state(&p).unwrap();
        let cd = cd_on.then_some(CdConvention::Standard);
        let rec = propagate(&p, cd, tau, &psi0, PropagationOptions::unchecked(400)).unwrap();
        let w = work_series(&rec, Basis::Total, CdConvention::Standard).unwrap();
        prop_assert_eq!(w.work[0], 0.0);
        for k in 0..w.work.len() {
            prop_assert!((w.work[k] - (w.mean_energy[k] - w.mean_energy[0])).abs() == 0.0);
            prop_assert!((w.excess_work[k] - (w.work[k] - w.adiabatic_work[k])).abs() == 0.0);
        }
        let scale = w.mean_energy.iter().fold(1.0f64, |m, e| m.max(e.abs()));
        // the decomposition needs an eigenstate of H(0); linear CD runs start off one
        let starts_in_eigenstate = !(cd_on && linear);
        for k in [0, 100, 200, 400].into_iter().filter(|_| starts_in_eigenstate) {
            let d = work_decomposition(&rec, k).unwrap();
            prop_assert!((d.work - w.work[k]).abs() < 1e-9 * scale);
            prop_assert!((d.probabilities.iter().sum::<f64>() - 1.0).abs() < 1e-9);
        }
        prop_assert!(time_average(&w.work).is_finite());
    }
}
