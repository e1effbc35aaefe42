use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use shallowsep::magic_square::{resolved_msp_circuit, z_in_bits, MspInstance};
use shallowsep::pipeline::{
    compute_fh, pass_rate, run_ft_trial, simulate_tableau, uniform_y_pass_rate, Engine, FtConfig, FtErrors, FtSystem,
    InstanceChoice, LOGICAL_DEPTH,
};
use shallowsep::{NoiseModel, NoiseSpec, PauliOp, ResolvedCircuit, StabilizerTableau};

fn cfg(n: usize, d: usize, p: f64, trials: usize, engine: Engine) -> FtConfig {
    FtConfig {
        n,
        d,
        noise: NoiseSpec::uniform(p, NoiseModel::IidDepolarizing),
        instance: InstanceChoice::default(),
        trials,
        seed: 17,
        engine,
    }
}

/// Logical image of a bare Pauli: `X_l -> Xbar` and `Z_l -> Zbar` on block `l`.
fn to_logical(sys: &FtSystem, bare: &PauliOp) -> PauliOp {
    let m = sys.m();
    let diag = sys.layout().diag();
    let nq = bare.n() * m;
    let (mut x, mut z) = (vec![false; nq], vec![false; nq]);
    for l in 0..bare.n() {
        for &q in diag {
            x[l * m + q] = bare.x(l);
            z[l * m + q] = bare.z(l);
        }
    }
    PauliOp::from_bits(&x, &z, bare.phase()).unwrap()
}

#[test]
fn logical_circuit_follows_the_bare_circuit() {
    let sys = FtSystem::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..64 {
        let z_in: Vec<bool> = (0..8).map(|_| rng.gen()).collect();
        let bare_full = resolved_msp_circuit(2, &z_in).unwrap();
        let bare = ResolvedCircuit { n: bare_full.n, layers: bare_full.layers[2..].to_vec() };
        let logical = sys.logical_circuit().resolve(&z_in_bits(2, &z_in).unwrap()).unwrap();
        for l in 0..8 {
            for op in [PauliOp::x_on(8, [l]), PauliOp::z_on(8, [l])] {
                let mut b = op.clone();
                bare.conjugate(&mut b);
                let mut lg = to_logical(&sys, &op);
                logical.conjugate(&mut lg);
                assert_eq!(lg, to_logical(&sys, &b), "z_in={z_in:?} op={op}");
            }
        }
    }
}

#[test]
fn all_zero_input_touches_only_swapped_blocks() {
    let n = 3;
    let sys = FtSystem::new(n, 2).unwrap();
    let z_in = vec![false; 4 * n];
    let bare = resolved_msp_circuit(n, &z_in).unwrap();
    let mut bare_active: Vec<usize> = bare.layers[2..].iter().flatten().flat_map(|&(_, a, b)| [a, b]).collect();
    bare_active.sort();
    bare_active.dedup();
    let logical = sys.logical_circuit().resolve(&z_in_bits(n, &z_in).unwrap()).unwrap();
    let mut blocks: Vec<usize> = logical.layers.iter().flatten().flat_map(|&(_, a, b)| [a / sys.m(), b / sys.m()]).collect();
    blocks.sort();
    blocks.dedup();
    assert_eq!(blocks, bare_active);
    assert_eq!(logical.depth(), LOGICAL_DEPTH);
}

/// Image of `p` under the circuit, read off a tableau evolved from `|0^n>`:
/// destabilizer `i` is the image of `X_i`, stabilizer `i` that of `Z_i`.
fn tableau_conjugate(c: &ResolvedCircuit, p: &PauliOp) -> PauliOp {
    let mut t = StabilizerTableau::new(c.n).unwrap();
    t.apply_resolved(c).unwrap();
    let mut out = PauliOp::identity(c.n);
    out.set_phase(p.phase());
    for q in p.x_support() {
        out = out.mul(&t.destabilizer(q)).unwrap();
    }
    for q in p.z_support() {
        out = out.mul(&t.stabilizer(q)).unwrap();
    }
    out
}

#[test]
fn f_and_h_match_tableau_conjugation() {
    let sys = FtSystem::new(2, 2).unwrap();
    let lat = sys.lattice();
    let m = sys.m();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for _ in 0..40 {
        let inst = MspInstance::random(2, &mut rng).unwrap();
        let s: Vec<Vec<bool>> = (0..sys.cubes()).map(|_| (0..lat.region_a().len()).map(|_| rng.gen()).collect()).collect();
        let (f, h) = compute_fh(&sys, &s, &inst.z_in()).unwrap();
        let recs: Vec<PauliOp> = s.iter().map(|si| lat.rec(si).unwrap()).collect();
        let rec = sys.to_logical_register(&recs);
        let logical = sys.logical_circuit().resolve(&z_in_bits(2, &inst.z_in()).unwrap()).unwrap();
        let img = tableau_conjugate(&logical, &rec);
        for l in 0..8 {
            for q in 0..m {
                assert_eq!(f[l][q], img.x(l * m + q));
                assert_eq!(h[l][q], img.z(l * m + q));
            }
        }
    }
}

#[test]
fn zero_syndromes_give_zero_f() {
    let sys = FtSystem::new(2, 3).unwrap();
    let zeros = vec![vec![false; sys.lattice().region_a().len()]; sys.cubes()];
    assert!(sys.lattice().rec(&zeros[0]).unwrap().is_identity());
    let (f, h) = compute_fh(&sys, &zeros, &[true; 8]).unwrap();
    assert!(f.iter().chain(&h).flatten().all(|&b| !b));
}

#[test]
fn noiseless_pipeline_passes_on_every_instance() {
    for (n, d) in [(2, 2), (3, 3), (4, 3)] {
        let sys = FtSystem::new(n, d).unwrap();
        let count = MspInstance::count(n);
        for seed in 0..1000u64 {
            let inst = MspInstance::from_index(n, seed as usize % count).unwrap();
            let mut c = cfg(n, d, 0.0, 1, Engine::Frame);
            c.instance = InstanceChoice::Fixed(inst);
            let r = run_ft_trial(&sys, &c, &mut shallowsep::trial_rng(seed, 0)).unwrap();
            assert!(r.pass, "n={n} d={d} instance {inst:?}");
            assert_eq!(r.y.len(), 4 * n * sys.m());
            assert_eq!(r.z.len(), 4 * n);
        }
        for seed in 0..50u64 {
            let mut c = cfg(n, d, 0.0, 1, Engine::Tableau);
            c.instance = InstanceChoice::Fixed(MspInstance::from_index(n, seed as usize % count).unwrap());
            assert!(run_ft_trial(&sys, &c, &mut shallowsep::trial_rng(seed, 0)).unwrap().pass);
        }
    }
}

#[test]
fn engines_agree_statistically() {
    let sys = FtSystem::new(2, 3).unwrap();
    let trials = 1500;
    let a = pass_rate(&sys, &cfg(2, 3, 0.003, trials, Engine::Frame)).unwrap();
    let b = pass_rate(&sys, &cfg(2, 3, 0.003, trials, Engine::Tableau)).unwrap();
    let se = (a * (1.0 - a) / trials as f64 + b * (1.0 - b) / trials as f64).sqrt();
    assert!((a - b).abs() <= 3.0 * se, "frame {a}, tableau {b}");
}

#[test]
fn heavy_noise_matches_uniform_guessing() {
    let sys = FtSystem::new(2, 3).unwrap();
    let trials = 3000;
    let noisy = pass_rate(&sys, &cfg(2, 3, 0.5, trials, Engine::Frame)).unwrap();
    let guess = uniform_y_pass_rate(&sys, &cfg(2, 3, 0.0, trials, Engine::Frame)).unwrap();
    let se = (noisy * (1.0 - noisy) / trials as f64 + guess * (1.0 - guess) / trials as f64).sqrt();
    assert!((noisy - guess).abs() <= 3.0 * se, "p=0.5 {noisy}, uniform y {guess}");
}

#[test]
fn failures_drop_with_distance() {
    let trials = 10000;
    let fail = |d: usize| 1.0 - pass_rate(&FtSystem::new(2, d).unwrap(), &cfg(2, d, 0.0005, trials, Engine::Frame)).unwrap();
    let (f3, f5) = (fail(3), fail(5));
    let se = (f3 * (1.0 - f3) / trials as f64 + f5 * (1.0 - f5) / trials as f64).sqrt();
    assert!(f3 - f5 > 3.0 * se, "d=3 {f3}, d=5 {f5}");
}

#[test]
fn tableau_record_lengths() {
    let sys = FtSystem::new(2, 2).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let inst = MspInstance::random(2, &mut rng).unwrap();
    let (s, y) = simulate_tableau(&sys, &inst, &FtErrors::none(&sys), &mut rng).unwrap();
    assert_eq!(s.len(), 4);
    assert_eq!(y.len(), 8 * sys.m());
}
