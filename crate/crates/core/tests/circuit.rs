mod common;

use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, PI};

use rand::rngs::StdRng;
use rand::{Rng, RngCore, SeedableRng};

use common::{c64, kron, max_diff, random_angle, random_circuit};
use topogate::circuit::{
    capability, circuit_unitary, compile, simulate, verify_compilation, Backend, BackendKind, Circuit, CircuitError,
    Gate, GateInstr, Tag,
};
use topogate::gates::{hadamard, Unitary};
use topogate::lattice::{LatticeRegister, PhaseRule};
use topogate::spinline::{Architecture, SpinScales};
use topogate::state::StateVector;

fn any_gate(rng: &mut dyn RngCore) -> Gate {
    let a = random_angle(rng);
    match rng.random_range(0..6) {
        0 => Gate::H,
        1 => Gate::P { phi: a },
        2 => Gate::C { phi: a },
        3 => Gate::Rx { theta: a },
        4 => Gate::Ry { theta: a },
        _ => Gate::Rz { theta: a },
    }
}

fn lattice(n: usize, rule: PhaseRule) -> Backend {
    Backend::Lattice { register: LatticeRegister::default_layout(n, rule).unwrap(), n_max: 12 }
}

fn spin(arch: Architecture) -> Backend {
    Backend::Spin { kappa: 0.9, arch, scales: SpinScales::default() }
}

#[test]
fn simulation_preserves_norm() {
    let mut rng = StdRng::seed_from_u64(1);
    for _ in 0..20 {
        let n = rng.random_range(1..=5);
        let c = random_circuit(&mut rng, n, 100, any_gate);
        let idx = rng.random_range(0..1usize << n);
        let s = simulate(&c, &StateVector::basis(n, idx)).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-12);
    }
}

#[test]
fn circuit_unitaries_are_unitary() {
    let mut rng = StdRng::seed_from_u64(2);
    for n in 1..=6 {
        let c = random_circuit(&mut rng, n, 30, any_gate);
        assert!(circuit_unitary(&c).unwrap().unitarity_deviation() < 1e-10);
    }
}

#[test]
fn columns_are_simulations_of_basis_states() {
    let mut rng = StdRng::seed_from_u64(3);
    let c = random_circuit(&mut rng, 3, 25, any_gate);
    let u = circuit_unitary(&c).unwrap();
    for j in 0..8 {
        let s = simulate(&c, &StateVector::basis(3, j)).unwrap();
        assert!(max_diff(&u.column(j), s.amplitudes()) < 1e-15);
    }
}

#[test]
fn single_qubit_gates_embed_little_endian() {
    // H on q1 of three qubits is I ⊗ H ⊗ I with q2 leftmost
    let c = Circuit::new(3, vec![GateInstr::single(Gate::H, 1)]).unwrap();
    let id2 = [c64(1.0, 0.0), c64(0.0, 0.0), c64(0.0, 0.0), c64(1.0, 0.0)];
    let expect = kron(&kron(&id2, 2, hadamard().entries(), 2), 4, &id2, 2);
    assert!(max_diff(circuit_unitary(&c).unwrap().entries(), &expect) < 1e-15);
}

#[test]
fn capability_matrix() {
    let gates = [
        Gate::H,
        Gate::P { phi: FRAC_PI_2 },
        Gate::C { phi: PI },
        Gate::Rx { theta: 0.3 },
        Gate::Ry { theta: 0.3 },
        Gate::Rz { theta: 0.3 },
    ];
    let expected = |backend: BackendKind, g: &Gate| match (backend, g) {
        (BackendKind::Lattice, Gate::P { .. } | Gate::C { .. }) => Tag::TopologicalAb,
        (BackendKind::Lattice, Gate::H | Gate::Rx { .. }) => Tag::Dynamical,
        (BackendKind::Lattice, _) => Tag::Unsupported,
        (BackendKind::Spin, Gate::C { .. }) => Tag::Unsupported,
        (BackendKind::Spin, _) => Tag::TopologicalAc,
    };
    let backends =
        [lattice(2, PhaseRule::charge_dipole(FRAC_PI_2)), spin(Architecture::Flying), spin(Architecture::Static)];
    for backend in &backends {
        for g in &gates {
            let targets = if g.arity() == 2 { vec![0, 1] } else { vec![0] };
            let c = Circuit::new(2, vec![GateInstr::new(*g, targets)]).unwrap();
            let want = expected(backend.kind(), g);
            assert_eq!(capability(backend.kind(), g), want);
            match compile(&c, backend) {
                Ok((prog, report)) => {
                    assert_ne!(want, Tag::Unsupported, "{:?} on {}", g, backend.kind());
                    assert_eq!(report.tags(), vec![want]);
                    assert!(verify_compilation(&c, &prog, 1e-10).unwrap());
                }
                Err(CircuitError::UnsupportedGate { .. }) => assert_eq!(want, Tag::Unsupported),
                Err(e) => panic!("{:?} on {}: {e}", g, backend.kind()),
            }
        }
    }
}

fn lattice_gate(phi0: f64, with_h: bool) -> impl FnMut(&mut dyn RngCore) -> Gate {
    move |rng| {
        let n = rng.random_range(1..=4) as f64 * if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        match rng.random_range(0..if with_h { 4 } else { 3 }) {
            0 => Gate::P { phi: n * phi0 },
            1 => Gate::C { phi: n * phi0 },
            2 => Gate::Rx { theta: random_angle(rng) },
            _ => Gate::H,
        }
    }
}

#[test]
fn lattice_round_trip() {
    let mut rng = StdRng::seed_from_u64(5);
    for (phi0, with_h) in [(FRAC_PI_2, true), (FRAC_PI_3, false), (1.0, false)] {
        for _ in 0..15 {
            let n = rng.random_range(1..=4);
            let len = rng.random_range(1..=10);
            let c = random_circuit(&mut rng, n, len, lattice_gate(phi0, with_h));
            let (prog, report) = compile(&c, &lattice(n, PhaseRule::anyon(phi0))).unwrap();
            assert_eq!(report.entries.len(), len);
            assert!(verify_compilation(&c, &prog, 1e-10).unwrap());
        }
    }
}

#[test]
fn spin_round_trip() {
    let mut rng = StdRng::seed_from_u64(6);
    let single = |rng: &mut dyn RngCore| loop {
        let g = any_gate(rng);
        if g.arity() == 1 {
            return g;
        }
    };
    for arch in [Architecture::Flying, Architecture::Static] {
        for _ in 0..20 {
            let n = rng.random_range(1..=4);
            let c = random_circuit(&mut rng, n, 12, single);
            let (prog, report) = compile(&c, &spin(arch)).unwrap();
            assert!(report.tags().iter().all(|&t| t == Tag::TopologicalAc));
            assert!(verify_compilation(&c, &prog, 1e-10).unwrap());
        }
    }
}

#[test]
fn verification_rejects_other_circuits() {
    let c = Circuit::new(2, vec![GateInstr::single(Gate::Rz { theta: 0.4 }, 1)]).unwrap();
    let (prog, _) = compile(&c, &spin(Architecture::Static)).unwrap();
    let other = Circuit::new(2, vec![GateInstr::single(Gate::Rz { theta: 0.4 }, 0)]).unwrap();
    assert!(!verify_compilation(&other, &prog, 1e-10).unwrap());
    let wider = Circuit::new(3, vec![]).unwrap();
    assert!(matches!(verify_compilation(&wider, &prog, 1e-10), Err(CircuitError::DimensionMismatch { .. })));
    let big = Circuit::new(9, vec![]).unwrap();
    let (prog, _) = compile(&big, &spin(Architecture::Static)).unwrap();
    assert!(matches!(verify_compilation(&big, &prog, 1e-10), Err(CircuitError::TooLarge(9))));
}

#[test]
fn global_phase_is_ignored_but_relative_phase_is_not() {
    let c = Circuit::new(1, vec![GateInstr::single(Gate::P { phi: 0.5 }, 0)]).unwrap();
    let u = circuit_unitary(&c).unwrap();
    let shifted = u.scaled(c64(0.0, 1.0));
    assert!(topogate::gates::equal_up_to_phase(&u, &shifted, 1e-12).unwrap());
    let other = Unitary::diagonal(&[c64(1.0, 0.0), c64(0.6f64.cos(), 0.6f64.sin())]).unwrap();
    assert!(!topogate::gates::equal_up_to_phase(&u, &other, 1e-3).unwrap());
}
