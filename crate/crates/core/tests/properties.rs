use proptest::collection::vec;
use proptest::prelude::*;

use sigkit::compare::{iota_a, k_sig};
use sigkit::diagrams::{check_coherence, hom_poly_over, tensor_total};
use sigkit::evaluation::{eval_amalg, eval_analytic, eval_poly, AnalyticFunctor, PolyFunctor, TabulatedFunctor};
use sigkit::finset::{FinMap, SliceObj};
use sigkit::json::{parse, AmalgSigDoc, AmalgSigMorDoc, FinMapDoc, PolyDiagDoc, SymSigDoc, SymSigMorDoc};
use sigkit::opetopes::terminal_cells;
use sigkit::perm::{operad_compose, operad_compose_formula, Perm};
use sigkit::random;
use sigkit::signatures::{OrbitSpec, SymSig};

fn perm(max: usize) -> impl Strategy<Value = Perm> {
    (0..=max).prop_flat_map(|n| Just((0..n).collect::<Vec<usize>>()).prop_shuffle()).prop_map(|img| Perm::new(img).unwrap())
}

fn perm_of(n: usize) -> impl Strategy<Value = Perm> {
    Just((0..n).collect::<Vec<usize>>()).prop_shuffle().prop_map(|img| Perm::new(img).unwrap())
}

fn perms_of_equal_size(max: usize) -> impl Strategy<Value = (Perm, Perm, Perm)> {
    (0..=max).prop_flat_map(|n| (perm_of(n), perm_of(n), perm_of(n)))
}

fn block_sum(ps: &[Perm]) -> Perm {
    ps.iter().fold(Perm::identity(0), |acc, p| acc.block_sum(p))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn composition_is_associative((a, b, c) in perms_of_equal_size(6)) {
        prop_assert_eq!(a.compose(&b).compose(&c), a.compose(&b.compose(&c)));
        prop_assert!(a.compose(&a.inverse()).is_identity());
        prop_assert!(a.inverse().compose(&a).is_identity());
    }

    #[test]
    fn pulling_back_reverses_composition((a, b, _) in perms_of_equal_size(6)) {
        let v: Vec<usize> = (0..a.n()).map(|i| 10 * i).collect();
        prop_assert_eq!(a.compose(&b).pull(&v), b.pull(&a.pull(&v)));
    }

    #[test]
    fn rank_and_serialization_round_trip(p in perm(6)) {
        prop_assert_eq!(Perm::unrank(p.n(), p.rank()), p.clone());
        prop_assert_eq!(Perm::from_one_based(&p.one_based()).unwrap(), p.clone());
        let text = serde_json::to_string(&p).unwrap();
        prop_assert_eq!(serde_json::from_str::<Perm>(&text).unwrap(), p);
    }

    #[test]
    fn operad_composite_factors_through_block_sum((tau, sigmas) in (0usize..=4).prop_flat_map(|k| (perm_of(k), vec(perm(3), k)))) {
        let whole = operad_compose(&tau, &sigmas).unwrap();
        let ids: Vec<Perm> = sigmas.iter().map(|s| Perm::identity(s.n())).collect();
        let blocks = operad_compose(&tau, &ids).unwrap();
        prop_assert_eq!(whole, blocks.compose(&block_sum(&sigmas)));
    }

    #[test]
    fn index_formula_on_equal_arities((tau, sigmas) in (0usize..=4, 0usize..=3).prop_flat_map(|(k, n)| (perm_of(k), vec(perm_of(n), k)))) {
        prop_assert_eq!(operad_compose(&tau, &sigmas).unwrap(), operad_compose_formula(&tau, &sigmas).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn documents_round_trip(seed in any::<u64>()) {
        let mut rng = random::seeded(seed);
        let m = random::amalg_sig_mor(&mut rng, 3, 3, 2);
        let text = serde_json::to_string(&AmalgSigMorDoc::from(&m)).unwrap();
        prop_assert_eq!(parse::<AmalgSigMorDoc>(&text, "morphism").unwrap().build().unwrap(), m.clone());
        let text = serde_json::to_string(&AmalgSigDoc::from(&m.dom)).unwrap();
        prop_assert_eq!(parse::<AmalgSigDoc>(&text, "signature").unwrap().build().unwrap(), m.dom.clone());
        let fm = FinMapDoc::from(&m.u);
        prop_assert_eq!(fm.build(m.u.dom(), m.u.cod()).unwrap(), m.u.clone());
        let d = iota_a(&m.cod).unwrap();
        prop_assert_eq!(PolyDiagDoc::from(&d).build().unwrap(), d);

        let s = random::sym_sig_mor(&mut rng, 2, 3, 2);
        let text = serde_json::to_string(&SymSigMorDoc::from(&s)).unwrap();
        prop_assert_eq!(parse::<SymSigMorDoc>(&text, "morphism").unwrap().build().unwrap(), s.clone());
        prop_assert_eq!(SymSigDoc::from(&s.cod).build().unwrap(), s.cod);
    }

    #[test]
    fn tensor_coherence(seed in any::<u64>()) {
        let mut rng = random::seeded(seed);
        let [a, b, c] = random::amalg_triple(&mut rng, 2, 2, 2);
        let r = check_coherence(&a, &b, &c, &a).unwrap();
        prop_assert!(r.holds(), "{:?}", r);
    }

    #[test]
    fn tensor_counts_products(seed in any::<u64>()) {
        let mut rng = random::seeded(seed);
        let [a, b, _] = random::amalg_triple(&mut rng, 3, 3, 2);
        let per_sort: Vec<usize> = (0..a.base.len()).map(|o| b.ops().iter().filter(|op| op.out == o).count()).collect();
        let expected: usize = a.ops().iter().map(|op| op.ins.iter().map(|&o| per_sort[o]).product::<usize>()).sum();
        prop_assert_eq!(tensor_total(&a, &b).unwrap().sig.len(), expected);
    }

    #[test]
    fn amalgamated_evaluation_counts(seed in any::<u64>(), counts in vec(0usize..4, 2)) {
        let mut rng = random::seeded(seed);
        let o = random::base(&mut rng, "O", 2);
        let a = random::amalg_sig(&mut rng, &o, 3, 3);
        let x = SliceObj::with_fiber_sizes(&o, &counts[..o.len()]);
        let expected: usize = a.ops().iter().map(|op| op.ins.iter().map(|&i| counts[i]).product::<usize>()).sum();
        prop_assert_eq!(eval_amalg(&a, &x).unwrap().len(), expected);
        prop_assert_eq!(eval_poly(&iota_a(&a).unwrap(), &x).unwrap().len(), expected);
    }

    #[test]
    fn free_orbits_count_as_tuples(seed in any::<u64>(), counts in vec(0usize..4, 2)) {
        let mut rng = random::seeded(seed);
        let o = random::base(&mut rng, "O", 2);
        let a = random::amalg_sig(&mut rng, &o, 3, 3);
        let specs: Vec<OrbitSpec> = a.ops().iter().map(|op| OrbitSpec { name: op.name.clone(), out: op.out, ins: op.ins.clone(), stabilizer: vec![] }).collect();
        let s = SymSig::from_orbits(&o, &specs).unwrap();
        let x = SliceObj::with_fiber_sizes(&o, &counts[..o.len()]);
        let expected: usize = a.ops().iter().map(|op| op.ins.iter().map(|&i| counts[i]).product::<usize>()).sum();
        prop_assert_eq!(eval_analytic(&s, &x).unwrap().len(), expected);
        prop_assert_eq!(eval_analytic(&k_sig(&a).unwrap(), &x).unwrap().len(), expected);
    }

    #[test]
    fn evaluation_is_functorial(seed in any::<u64>()) {
        let mut rng = random::seeded(seed);
        let o = random::base(&mut rng, "O", 2);
        let s = random::sym_sig(&mut rng, &o, 2, 3);
        let t = TabulatedFunctor::at_bound(&AnalyticFunctor(s), 2).unwrap();
        prop_assert!(t.functoriality_failures().is_empty());
        let d = iota_a(&random::amalg_sig(&mut rng, &o, 3, 2)).unwrap();
        let t = TabulatedFunctor::at_bound(&PolyFunctor(d), 2).unwrap();
        prop_assert!(t.functoriality_failures().is_empty());
        prop_assert!(t.pullback_failures(true, 1).is_empty());
    }

    #[test]
    fn diagram_morphisms_have_pullback_middles(seed in any::<u64>()) {
        let mut rng = random::seeded(seed);
        let o = random::base(&mut rng, "O", 2);
        let d = iota_a(&random::amalg_sig(&mut rng, &o, 2, 2)).unwrap();
        let e = iota_a(&random::amalg_sig(&mut rng, &o, 2, 2)).unwrap();
        for m in hom_poly_over(&d, &e, &FinMap::identity(&o)) {
            for b in 0..d.b().len() {
                prop_assert_eq!(d.fiber(b).len(), e.fiber(m.f.apply(b)).len());
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn opetopes_are_closed_and_monotone(dim in 2usize..5, size in 0usize..4) {
        let cells = terminal_cells(dim, size);
        let lower = terminal_cells(dim - 1, size);
        for c in &cells {
            let t = c.target().unwrap();
            prop_assert!(lower.contains(&t), "target {} missing", t.notation());
            for i in c.inputs() {
                prop_assert!(lower.contains(&i), "input {} missing", i.notation());
            }
        }
        let bigger = terminal_cells(dim, size + 1);
        prop_assert!(cells.iter().all(|c| bigger.contains(c)));
        let mut seen = std::collections::BTreeSet::new();
        prop_assert!(cells.iter().all(|c| seen.insert(serde_json::to_string(&c.descriptor()).unwrap())));
        prop_assert_eq!(cells, terminal_cells(dim, size));
    }
}
