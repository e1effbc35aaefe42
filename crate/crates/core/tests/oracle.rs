mod common;

use common::{bits_of, random_circuit, random_pauli, StateVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::StabilizerTableau;

#[test]
fn tableau_support_matches_state_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for case in 0..150 {
        let n = 2 + case % 5;
        let c = random_circuit(n, 3 * n, &mut rng);
        let mut sv = StateVector::zero(n);
        sv.run(&c);
        let mut t = StabilizerTableau::new(n).unwrap();
        t.apply_resolved(&c).unwrap();
        let support = sv.support();
        for idx in 0..1usize << n {
            let z = bits_of(idx, n);
            assert_eq!(t.support_membership(&z).unwrap(), support.contains(&z), "case {case}");
        }
    }
}

#[test]
fn tableau_expectations_match_state_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    for _ in 0..100 {
        let n = 4;
        let c = random_circuit(n, 12, &mut rng);
        let mut sv = StateVector::zero(n);
        sv.run(&c);
        let mut t = StabilizerTableau::new(n).unwrap();
        t.apply_resolved(&c).unwrap();
        for _ in 0..20 {
            let mut p = random_pauli(n, &mut rng);
            if !p.is_hermitian() {
                p.set_phase((p.phase() + 1) % 4);
            }
            let want = sv.expectation(&p);
            match t.expectation(&p).unwrap() {
                Some(v) => assert!((want - v as f64).abs() < 1e-9),
                None => assert!(want.abs() < 1e-9),
            }
        }
    }
}

#[test]
fn conjugation_matches_state_vector() {
    let mut rng = ChaCha8Rng::seed_from_u64(43);
    for _ in 0..200 {
        let n = 4;
        let prep = random_circuit(n, 10, &mut rng);
        let c = random_circuit(n, 8, &mut rng);
        let p = random_pauli(n, &mut rng);
        let mut lhs = StateVector::zero(n);
        lhs.run(&prep);
        lhs.apply_pauli(&p);
        lhs.run(&c);
        let mut q = p.clone();
        c.conjugate(&mut q);
        let mut rhs = StateVector::zero(n);
        rhs.run(&prep);
        rhs.run(&c);
        rhs.apply_pauli(&q);
        assert!(lhs.close_to(&rhs), "{p} -> {q}");
    }
}
