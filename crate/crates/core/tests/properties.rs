use std::sync::Arc;

use ceeat_core::cascade::{default_max_level, evolve_cascade, ladder_rates, peak_time};
use ceeat_core::dicke::{ho_collective_state, participation_ratio, spin_dicke_state, spin_multiplet};
use ceeat_core::fockspace::{
    build_hamiltonian, collective_op, enumerate_sector, evolve_step, CollectiveOp,
};
use ceeat_core::rates::{
    absorption_oracle, anharmonic_sr_rate, closed_form_enhancement, emission_oracle,
    transfer_oracle, Aggregate, Process,
};
use ceeat_core::stochastic::disorder_pr_scan;
use ceeat_core::{
    BasisSector, Complex64, HamiltonianSpec, HoDickeLabel, SectorKind, SpinDickeLabel,
    SparseOperator, StateVector,
};
use nalgebra::DMatrix;
use proptest::prelude::*;

fn spin_label() -> impl Strategy<Value = (SpinDickeLabel, usize)> {
    (1usize..=6)
        .prop_flat_map(|n| (Just(n), 0..SpinDickeLabel::all(n).len()))
        .prop_flat_map(|(n, i)| {
            let label = SpinDickeLabel::all(n)[i];
            (Just(label), 0..label.multiplicity())
        })
}

fn ho_label() -> impl Strategy<Value = HoDickeLabel> {
    (1usize..=4, 0usize..=4, 0usize..=2).prop_flat_map(|(n, r, dmax)| {
        let all: Vec<HoDickeLabel> = HoDickeLabel::all(n, 4, dmax)
            .into_iter()
            .filter(|l| l.r == r)
            .collect();
        proptest::sample::select(all)
    })
}

fn dense_close(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>, tol: f64) -> bool {
    a.shape() == b.shape() && a.iter().zip(b.iter()).all(|(x, y)| (x - y).norm() < tol)
}

#[test]
fn raising_is_adjoint_of_lowering() {
    for n in 1..=6 {
        for m in 1..=n {
            let s = enumerate_sector(SectorKind::Spin, n, m, None).unwrap();
            let down = collective_op(&s, CollectiveOp::JMinus).unwrap();
            let up = collective_op(down.codomain(), CollectiveOp::JPlus).unwrap();
            assert!(up.approx_eq(&down.adjoint(), 0.0));
        }
    }
    for n in 1..=4 {
        for exc in 1..=4 {
            let s = enumerate_sector(SectorKind::Ho, n, exc, None).unwrap();
            let down = collective_op(&s, CollectiveOp::ALower).unwrap();
            let up = collective_op(down.codomain(), CollectiveOp::ARaise).unwrap();
            assert!(up.approx_eq(&down.adjoint(), 1e-15));
            for k in 1..=n {
                let c = collective_op(&s, CollectiveOp::C(k)).unwrap();
                let cd = collective_op(c.codomain(), CollectiveOp::CDagger(k)).unwrap();
                assert!(cd.approx_eq(&c.adjoint(), 1e-15));
            }
        }
    }
}

#[test]
fn spin_commutator_is_twice_jz() {
    for n in 1..=5 {
        for m in 0..=n {
            let s = enumerate_sector(SectorKind::Spin, n, m, None).unwrap();
            let dim = s.dim();
            let pm = if m > 0 {
                let down = collective_op(&s, CollectiveOp::JMinus).unwrap();
                collective_op(down.codomain(), CollectiveOp::JPlus).unwrap().compose(&down).unwrap()
            } else {
                SparseOperator::zero(s.clone(), s.clone())
            };
            let mp = if m < n {
                let up = collective_op(&s, CollectiveOp::JPlus).unwrap();
                collective_op(up.codomain(), CollectiveOp::JMinus).unwrap().compose(&up).unwrap()
            } else {
                SparseOperator::zero(s.clone(), s.clone())
            };
            let jz = m as f64 - n as f64 / 2.0;
            let want = DMatrix::from_fn(dim, dim, |r, c| {
                Complex64::new(if r == c { 2.0 * jz } else { 0.0 }, 0.0)
            });
            assert!(dense_close(&(pm.to_dense() - mp.to_dense()), &want, 1e-12), "N={n} m={m}");
        }
    }
}

#[test]
fn mode_operators_are_canonical() {
    for n in 1..=4 {
        for exc in 0..=2 {
            // cutoff exc + 1 leaves room for one more quantum on any site
            let s = Arc::new(BasisSector::new(SectorKind::Ho, n, exc, Some(exc + 1)).unwrap());
            for k in 1..=n {
                for kp in 1..=n {
                    let cdag = collective_op(&s, CollectiveOp::CDagger(kp)).unwrap();
                    let c = collective_op(cdag.codomain(), CollectiveOp::C(k)).unwrap();
                    let lhs = c.compose(&cdag).unwrap();
                    let rhs = if exc > 0 {
                        let ck = collective_op(&s, CollectiveOp::C(k)).unwrap();
                        collective_op(ck.codomain(), CollectiveOp::CDagger(kp))
                            .unwrap()
                            .compose(&ck)
                            .unwrap()
                    } else {
                        SparseOperator::zero(s.clone(), s.clone())
                    };
                    let delta = if k == kp { 1.0 } else { 0.0 };
                    let want = DMatrix::from_fn(s.dim(), s.dim(), |r, c| {
                        Complex64::new(if r == c { delta } else { 0.0 }, 0.0)
                    });
                    assert!(
                        dense_close(&(lhs.to_dense() - rhs.to_dense()), &want, 1e-12),
                        "N={n} n={exc} k={k} k'={kp}"
                    );
                }
            }
        }
    }
}

#[test]
fn sector_sizes_are_binomial() {
    fn binom(n: usize, k: usize) -> usize {
        (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
    }
    for n in 1..=8 {
        for m in 0..=n {
            assert_eq!(enumerate_sector(SectorKind::Spin, n, m, None).unwrap().dim(), binom(n, m));
            assert_eq!(
                enumerate_sector(SectorKind::Ho, n, m, None).unwrap().dim(),
                binom(n + m - 1, m)
            );
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn evolution_is_unitary_and_composes(
        n in 2usize..=5,
        m_frac in 0.0f64..1.0,
        energies in proptest::collection::vec(-3.0f64..3.0, 5),
        v in -2.0f64..2.0,
        dt1 in 0.01f64..1.0,
        dt2 in 0.01f64..1.0,
        seed_amps in proptest::collection::vec(-1.0f64..1.0, 32),
    ) {
        let m = ((n as f64) * m_frac) as usize;
        let s = enumerate_sector(SectorKind::Spin, n, m, None).unwrap();
        let spec = HamiltonianSpec::all_to_all(energies[..n].to_vec(), v).unwrap();
        let h = build_hamiltonian(&s, &spec).unwrap();
        let amps: Vec<f64> = (0..s.dim()).map(|i| seed_amps[i % 32] + 1e-3).collect();
        let psi = StateVector::from_real(s, &amps).unwrap();
        let a = evolve_step(&evolve_step(&psi, &h, dt1).unwrap(), &h, dt2).unwrap();
        let b = evolve_step(&psi, &h, dt1 + dt2).unwrap();
        prop_assert!((a.norm() - 1.0).abs() < 1e-10);
        for (x, y) in a.amplitudes().iter().zip(b.amplitudes()) {
            prop_assert!((x - y).norm() < 1e-10);
        }
    }

    #[test]
    fn spin_formula_matches_oracle((label, idx) in spin_label()) {
        let state = spin_dicke_state(label, idx).unwrap();
        let agg = Aggregate::Spin(label);
        if label.m > 0 {
            let c = closed_form_enhancement(Process::SR, &agg, &Aggregate::Field { photons: 0 }).unwrap();
            prop_assert!((c.value() - emission_oracle(&state).unwrap().value()).abs() < 1e-9);
        }
        if label.m < label.n_sites {
            let c = closed_form_enhancement(Process::SA, &Aggregate::Field { photons: 1 }, &agg).unwrap();
            prop_assert!((c.value() - absorption_oracle(&state).unwrap().value()).abs() < 1e-9);
        }
    }

    #[test]
    fn ho_formula_matches_oracle(label in ho_label()) {
        let state = ho_collective_state(&label, None).unwrap();
        let agg = Aggregate::Ho(label.clone());
        if label.n_excitations() > 0 {
            let c = closed_form_enhancement(Process::SR, &agg, &Aggregate::Field { photons: 0 }).unwrap();
            prop_assert!((c.value() - emission_oracle(&state).unwrap().value()).abs() < 1e-9);
        }
        let c = closed_form_enhancement(Process::SA, &Aggregate::Field { photons: 1 }, &agg).unwrap();
        prop_assert!((c.value() - absorption_oracle(&state).unwrap().value()).abs() < 1e-9);
    }

    #[test]
    fn transfer_factorises((d, di) in spin_label(), (a, ai) in spin_label(), h in ho_label()) {
        prop_assume!(d.m > 0 && a.m < a.n_sites);
        let ds = spin_dicke_state(d, di).unwrap();
        let as_ = spin_dicke_state(a, ai).unwrap();
        let st = transfer_oracle(&ds, &as_).unwrap().value();
        let product = emission_oracle(&ds).unwrap().value() * absorption_oracle(&as_).unwrap().value();
        prop_assert!((st - product).abs() < 1e-9);
        let closed = closed_form_enhancement(Process::ST, &Aggregate::Spin(d), &Aggregate::Spin(a)).unwrap();
        prop_assert!((st - closed.value()).abs() < 1e-9);
        // mixed rows
        let hs = ho_collective_state(&h, None).unwrap();
        let mixed = transfer_oracle(&ds, &hs).unwrap().value();
        let closed = closed_form_enhancement(Process::ST, &Aggregate::Spin(d), &Aggregate::Ho(h.clone())).unwrap();
        prop_assert!((mixed - closed.value()).abs() < 1e-9);
        if h.n_excitations() > 0 {
            let mixed = transfer_oracle(&hs, &as_).unwrap().value();
            let closed = closed_form_enhancement(Process::ST, &Aggregate::Ho(h), &Aggregate::Spin(a)).unwrap();
            prop_assert!((mixed - closed.value()).abs() < 1e-9);
        }
    }

    #[test]
    fn participation_ratio_ignores_phase_and_permutation(
        n in 1usize..=6,
        m_frac in 0.0f64..=1.0,
        phase in 0.0f64..6.3,
        rot in 0usize..6,
    ) {
        let m = ((n as f64) * m_frac).round() as usize;
        let s = spin_dicke_state(SpinDickeLabel::new(n, n, m).unwrap(), 0).unwrap();
        let pr = participation_ratio(&s);
        let rotated = StateVector::new(
            s.sector().clone(),
            s.amplitudes().iter().map(|a| a * Complex64::from_polar(1.0, phase)).collect(),
        ).unwrap();
        prop_assert!((participation_ratio(&rotated) - pr).abs() < 1e-10);
        // cyclic relabelling of sites maps the symmetric state onto itself
        let sector = s.sector();
        let mut permuted = vec![Complex64::new(0.0, 0.0); sector.dim()];
        for (i, c) in sector.configs().iter().enumerate() {
            let mut c2 = c.clone();
            c2.rotate_left(rot % n);
            permuted[sector.index_of(&c2).unwrap()] = s.amplitudes()[i];
        }
        let permuted = StateVector::new(sector.clone(), permuted).unwrap();
        prop_assert!((participation_ratio(&permuted) - pr).abs() < 1e-10);
    }

    #[test]
    fn anharmonic_rate_decreases_with_repulsion(
        n in 1usize..=5,
        exc in 1usize..=3,
        u1 in 0.0f64..50.0,
        du in 0.0f64..50.0,
    ) {
        prop_assume!(2 * exc <= n + 1);
        let a = anharmonic_sr_rate(n, u1, exc).unwrap().rate.value();
        let b = anharmonic_sr_rate(n, u1 + du, exc).unwrap().rate.value();
        prop_assert!(b <= a + 1e-9, "U={u1}: {a}, U={}: {b}", u1 + du);
        let spin = (exc * (n - exc + 1)) as f64;
        prop_assert!(b >= spin - 1e-9 && a <= (n * exc) as f64 + 1e-9);
    }
}

#[test]
fn multiplets_cover_their_sector() {
    // the multiplet members of all l together form a unitary basis
    for n in 1..=6 {
        for m in 0..=n {
            let states: Vec<StateVector> = SpinDickeLabel::all(n)
                .into_iter()
                .filter(|l| l.m == m)
                .flat_map(|l| spin_multiplet(l).unwrap().into_iter().map(|x| x.state))
                .collect();
            assert_eq!(states.len(), states[0].dim());
            for (i, a) in states.iter().enumerate() {
                for (j, b) in states.iter().enumerate() {
                    let o = a.inner(b).unwrap().norm();
                    assert!((o - if i == j { 1.0 } else { 0.0 }).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn cascade_conserves_probability_and_emits_everything() {
    for n in 1..=10 {
        let spec = ladder_rates(SectorKind::Spin, n, n).unwrap();
        for m0 in 1..=n {
            let traj = evolve_cascade(&spec, m0, 40.0 / n as f64, 4000).unwrap();
            assert!(traj.conservation_error() < 1e-8);
            assert!(traj.populations.iter().flatten().all(|p| *p > -1e-12));
            // the trapezoid rule's own error is O(h^2 gamma'') on this grid
            assert!((traj.integrated_emission() - m0 as f64).abs() < 1e-4 * m0 as f64 + 1e-3);
        }
    }
}

#[test]
fn spin_cascade_peaks_exactly_when_upper_rungs_are_faster() {
    for n in 1..=10 {
        let spec = ladder_rates(SectorKind::Spin, n, n).unwrap();
        for m0 in 1..=n {
            let traj = evolve_cascade(&spec, m0, 2.0, 2000).unwrap();
            assert_eq!(
                peak_time(&traj).is_some(),
                2 * m0 > n + 2,
                "N={n} m0={m0}"
            );
        }
    }
    for r0 in 1..=6 {
        let spec = ladder_rates(SectorKind::Ho, 3, default_max_level(SectorKind::Ho, 3, r0)).unwrap();
        assert_eq!(peak_time(&evolve_cascade(&spec, r0, 2.0, 500).unwrap()), None);
    }
}

#[test]
fn participation_ratio_is_bounded_for_every_sector() {
    for (n, m, cap) in [(3, 1, 3.0), (4, 2, 6.0), (5, 2, 10.0)] {
        let r = disorder_pr_scan(n, m, &[0.0, 0.5, 2.0, 20.0], &[0.0, 0.3, 3.0], 8, 21).unwrap();
        for pr in r.mean.iter().flatten() {
            assert!(*pr >= 1.0 - 1e-9 && *pr <= cap + 1e-9);
        }
    }
}
