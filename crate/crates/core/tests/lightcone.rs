use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::lightcone::{event_ec_bound, event_ec_rate, random_dag, random_local_solver, solver_wire};

fn solver_names(n: usize) -> (Vec<String>, Vec<String>) {
    let (mut ins, mut outs) = (Vec::new(), Vec::new());
    for i in 1..=n {
        for bit in 1..=2 {
            ins.push(solver_wire('a', i, bit));
            ins.push(solver_wire('b', i, bit));
            outs.push(solver_wire('x', i, bit));
            outs.push(solver_wire('y', i, bit));
        }
    }
    (ins, outs)
}

fn check_rate(rate: f64, bound: f64, samples: usize) {
    let se = (rate.max(1e-3) * (1.0 - rate).max(1e-3) / samples as f64).sqrt();
    assert!(rate + 3.0 * se >= bound, "rate {rate} below bound {bound}");
}

#[test]
fn local_solvers_meet_the_event_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let n = 2000;
    for (depth, k) in [(1, 2), (2, 2), (1, 3)] {
        let dag = random_local_solver(n, depth, k, 1, &mut rng).unwrap();
        let rate = event_ec_rate(&dag, 400, &mut rng).unwrap();
        check_rate(rate, event_ec_bound(n, k, depth), 400);
    }
}

#[test]
fn unstructured_solvers_meet_the_event_bound() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let n = 2000;
    let (ins, outs) = solver_names(n);
    let dag = random_dag(&ins, &outs, 2, 2, &mut rng).unwrap();
    let rate = event_ec_rate(&dag, 400, &mut rng).unwrap();
    check_rate(rate, event_ec_bound(n, 2, 2), 400);
}
