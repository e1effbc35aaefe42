use std::collections::BTreeSet;

use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use shallowsep::lightcone::{backward_lightcone, correlation_pairs, forward_lightcone, random_dag};
use shallowsep::netlist::Netlist;
use shallowsep::{min_weight_pauli_for_syndrome, DefectGraph, PauliOp, PauliType, SurfaceCodeLayout};

fn pauli(n: usize) -> impl Strategy<Value = PauliOp> {
    (prop::collection::vec(any::<bool>(), n), prop::collection::vec(any::<bool>(), n), 0u8..4)
        .prop_map(|(x, z, ph)| PauliOp::from_bits(&x, &z, ph).unwrap())
}

/// A connected graph: a random spanning tree plus extra edges, some dangling.
fn graph() -> impl Strategy<Value = DefectGraph> {
    (2usize..10).prop_flat_map(|nv| {
        (
            Just(nv),
            prop::collection::vec(any::<prop::sample::Index>(), nv - 1),
            prop::collection::vec((0..nv, prop::option::of(0..nv)), 0..6),
        )
            .prop_map(|(nv, tree, extra)| {
                let mut g = DefectGraph::new(nv);
                for (v, parent) in tree.iter().enumerate() {
                    g.add_edge(v + 1, Some(parent.index(v + 1))).unwrap();
                }
                for (a, b) in extra {
                    if b != Some(a) {
                        g.add_edge(a, b).unwrap();
                    }
                }
                g
            })
    })
}

fn feasible(g: &DefectGraph, s: &[usize]) -> bool {
    let dangling = (0..g.n_edges()).any(|e| g.edge(e).unwrap().1.is_none());
    dangling || s.len() % 2 == 0
}

fn brute_force_min(g: &DefectGraph, s: &[usize]) -> Option<usize> {
    let ne = g.n_edges();
    let want: BTreeSet<usize> = s.iter().copied().collect();
    (0..1usize << ne)
        .filter(|mask| {
            let f: Vec<usize> = (0..ne).filter(|e| mask >> e & 1 == 1).collect();
            g.boundary(&f).unwrap().into_iter().collect::<BTreeSet<_>>() == want
        })
        .map(|mask| mask.count_ones() as usize)
        .min()
}

fn has_cycle(g: &DefectGraph, f: &[usize]) -> bool {
    // union-find over real vertices plus one boundary node
    let n = g.n_vertices() + 1;
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    for &e in f {
        let (a, b) = g.edge(e).unwrap();
        let (ra, rb) = (find(&mut parent, a), find(&mut parent, b.unwrap_or(n - 1)));
        if ra == rb {
            return true;
        }
        parent[ra] = rb;
    }
    false
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn pauli_product_is_associative(a in pauli(5), b in pauli(5), c in pauli(5)) {
        let left = a.mul(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&b.mul(&c).unwrap()).unwrap();
        prop_assert_eq!(left, right);
    }

    #[test]
    fn commutation_is_symmetric_and_matches_products(a in pauli(4), b in pauli(4)) {
        prop_assert_eq!(a.anticommutes(&b), b.anticommutes(&a));
        let ab = a.mul(&b).unwrap();
        let mut ba = b.mul(&a).unwrap();
        if a.anticommutes(&b) {
            ba.set_phase((ba.phase() + 2) % 4);
        }
        prop_assert_eq!(ab, ba);
    }

    #[test]
    fn matching_realizes_the_defects(g in graph(), picks in prop::collection::vec(any::<prop::sample::Index>(), 0..5)) {
        let mut s: Vec<usize> = picks.iter().map(|i| i.index(g.n_vertices())).collect();
        s.sort();
        s.dedup();
        prop_assume!(feasible(&g, &s));
        let f = g.min_weight_matching(&s).unwrap();
        prop_assert_eq!(g.boundary(&f).unwrap(), s.clone());
        prop_assert!(!has_cycle(&g, &f));
        if g.n_edges() <= 14 {
            prop_assert_eq!(Some(f.len()), brute_force_min(&g, &s));
        }
    }

    #[test]
    fn sub_matchings_are_minimal(g in graph(), picks in prop::collection::vec(any::<prop::sample::Index>(), 1..5), keep in any::<u64>()) {
        let mut s: Vec<usize> = picks.iter().map(|i| i.index(g.n_vertices())).collect();
        s.sort();
        s.dedup();
        prop_assume!(feasible(&g, &s));
        let f = g.min_weight_matching(&s).unwrap();
        let k: Vec<usize> = f.iter().enumerate().filter(|(i, _)| keep >> (i % 64) & 1 == 1).map(|(_, &e)| e).collect();
        let again = g.min_weight_matching(&g.boundary(&k).unwrap()).unwrap();
        prop_assert_eq!(again.len(), k.len());
    }

    #[test]
    fn surface_code_syndrome_decoding_is_minimal(x in prop::collection::vec(any::<bool>(), 13)) {
        let layout = SurfaceCodeLayout::new(3).unwrap();
        let faces: Vec<PauliOp> = (0..layout.faces().len()).map(|f| layout.face_stabilizer(f)).collect();
        let syndrome = |bits: &[bool]| -> Vec<bool> {
            let e = PauliOp::from_bits(bits, &[false; 13], 0).unwrap();
            faces.iter().map(|g| g.anticommutes(&e)).collect()
        };
        let target = syndrome(&x);
        let brute = (0..1usize << 13)
            .map(|mask| (0..13).map(|q| mask >> q & 1 == 1).collect::<Vec<bool>>())
            .filter(|bits| syndrome(bits) == target)
            .map(|bits| bits.iter().filter(|&&b| b).count())
            .min()
            .unwrap();
        let m = min_weight_pauli_for_syndrome(&faces, &target, PauliType::XOnly).unwrap();
        prop_assert_eq!(m.weight(), brute);
        prop_assert_eq!(syndrome(&m.x_bits()), target);
        let cor = layout.cor(&x).unwrap();
        prop_assert_eq!(cor.iter().filter(|&&b| b).count(), brute);
    }

    #[test]
    fn lightcones_are_dual_and_cover_correlations(seed in any::<u64>(), depth in 1usize..4, k in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ins: Vec<String> = (0..8).map(|i| format!("i{i}")).collect();
        let outs: Vec<String> = (0..5).map(|i| format!("o{i}")).collect();
        let dag = random_dag(&ins, &outs, depth, k, &mut rng).unwrap();
        let back: Vec<BTreeSet<String>> = outs.iter().map(|o| backward_lightcone(&dag, o).unwrap()).collect();
        for i in &ins {
            let fwd = forward_lightcone(&dag, i).unwrap();
            for (o, b) in outs.iter().zip(&back) {
                prop_assert_eq!(b.contains(i), fwd.contains(o));
            }
        }
        for b in &back {
            prop_assert!(b.len() <= k.pow(depth as u32));
        }
        for (i, o) in correlation_pairs(&dag).unwrap() {
            let idx = outs.iter().position(|x| *x == o).unwrap();
            prop_assert!(back[idx].contains(&i));
        }
        let text = dag.to_json();
        prop_assert_eq!(Netlist::from_json(&text).unwrap(), dag);
    }
}
