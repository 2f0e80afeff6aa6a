//! Acceptance suite: one line per criterion, each exact and under its own
//! wall-clock limit.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use sigkit::compare::{confirm_emb_full, fibre_morphisms, iota_a, phi_component, phi_natural, psi, psi_natural_in_diagram, six_paths, small_signatures};
use sigkit::diagrams::{check_coherence, single_right_unitor, tensor_single};
use sigkit::evaluation::{family, AnalyticFunctor, TabulatedFunctor};
use sigkit::finset::{FinMap, FinSet, SliceObj};
use sigkit::monad::List;
use sigkit::monoids::{chain_category, check_amalg_monoid, check_tgraph_monoid, free_amalg_monoid, free_multicategory};
use sigkit::opetopes::{iterate_tower, terminal_cells, Opetope};
use sigkit::perm::{operad_compose, operad_compose_formula, Perm};
use sigkit::random;
use sigkit::recover::{morphisms_representing, recover_signature, rep_sym_fibre, transformation_to_morphism};
use sigkit::signatures::{find_sym_iso, reindex_amalg, AmalgSig};
use sigkit::tgraph::{self, TGraph};

type Check = Result<String, String>;

fn ensure(ok: bool, why: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(why())
    }
}

fn lib<T>(r: sigkit::Result<T>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

// 1 -----------------------------------------------------------------------

fn pullback_counterexample() -> Check {
    let o0 = FinSet::range("[0]", 1);
    let o1 = FinSet::range("[1]", 2);
    let u = lib(FinMap::new(o1.clone(), o0.clone(), vec![0, 0]))?;
    let a = lib(TGraph::new(List, o0.clone(), lib(FinSet::from_strs("A", &["a"]))?, vec![0], vec![vec![0, 0]]))?;
    let one = SliceObj::terminal(&o0);
    let (a_one, _) = lib(tgraph::act(&a, &one))?;
    let pulled = lib(a_one.pull(&u))?;
    let (ua, _) = lib(tgraph::reindex(&u, &a))?;
    let (ua_u1, _) = lib(tgraph::act(&ua, &lib(one.pull(&u))?))?;
    let counts = [a_one.len(), pulled.len(), ua_u1.len()];
    ensure(counts == [1, 2, 8], || format!("got {counts:?}"))?;
    // the same reindexing through amalgamated signatures
    let sig = lib(AmalgSig::from_labels(&o0, &[("a", "0", &["0", "0"])]))?;
    let (usig, _) = lib(reindex_amalg(&u, &sig))?;
    ensure(usig.len() == ua.len(), || format!("{} reindexed operations against {}", usig.len(), ua.len()))?;
    Ok(format!("|A⋆1| = {}, |u*(A⋆1)| = {}, |u*A ⋆ u*1| = {}", counts[0], counts[1], counts[2]))
}

// 2 -----------------------------------------------------------------------

/// Inner families: one permutation of arity at most 2 per slot.
fn families(k: usize) -> Vec<Vec<Perm>> {
    let small: Vec<Perm> = (0..=2).flat_map(Perm::all).collect();
    let mut out = vec![vec![]];
    for _ in 0..k {
        out = out.into_iter().flat_map(|f| small.iter().map(move |p| [f.clone(), vec![p.clone()]].concat())).collect();
    }
    out
}

fn block_sum(ps: &[Perm]) -> Perm {
    ps.iter().fold(Perm::identity(0), |acc, p| acc.block_sum(p))
}

fn operad_laws() -> Check {
    let gamma = |t: &Perm, s: &[Perm]| operad_compose(t, s).map_err(|e| e.to_string());
    let mut checked = 0usize;
    for n in 0..=2 {
        for s in Perm::all(n) {
            ensure(gamma(&Perm::identity(1), std::slice::from_ref(&s))? == s, || format!("left unit fails at {s}"))?;
        }
    }
    for k in 0..=3 {
        for tau in Perm::all(k) {
            ensure(gamma(&tau, &vec![Perm::identity(1); k])? == tau, || format!("right unit fails at {tau}"))?;
            for sigmas in families(k) {
                let composite = gamma(&tau, &sigmas)?;
                // σ_i∘π_i inside, or ⊕π_i first
                for pis in sigmas.iter().map(|s| Perm::all(s.n())).fold(vec![vec![]], |acc: Vec<Vec<Perm>>, ps| {
                    acc.into_iter().flat_map(|f| ps.iter().map(move |p| [f.clone(), vec![p.clone()]].concat())).collect()
                }) {
                    let inner: Vec<Perm> = sigmas.iter().zip(&pis).map(|(s, p)| s.compose(p)).collect();
                    ensure(gamma(&tau, &inner)? == composite.compose(&block_sum(&pis)), || format!("inner equivariance fails at {tau}; {sigmas:?}; {pis:?}"))?;
                    checked += 1;
                }
                // π∘τ outside, or permute the target blocks afterwards
                let inv = tau.inverse();
                let target_ids: Vec<Perm> = (0..k).map(|l| Perm::identity(sigmas[inv.apply(l)].n())).collect();
                for pi in Perm::all(k) {
                    ensure(gamma(&pi.compose(&tau), &sigmas)? == gamma(&pi, &target_ids)?.compose(&composite), || format!("outer equivariance fails at {pi}, {tau}; {sigmas:?}"))?;
                    checked += 1;
                }
                // associativity, with ρ indexed by the composite's inputs
                for rhos in families(composite.n()) {
                    let left = gamma(&composite, &rhos)?;
                    let mut at = 0;
                    let mut parts = Vec::with_capacity(k);
                    for s in &sigmas {
                        parts.push(gamma(s, &rhos[at..at + s.n()])?);
                        at += s.n();
                    }
                    let right = gamma(&tau, &parts)?;
                    ensure(left == right, || format!("associativity fails at {tau}; {sigmas:?}; {rhos:?}"))?;
                    checked += 1;
                }
                let equal = sigmas.windows(2).all(|w| w[0].n() == w[1].n());
                if equal {
                    let formula = operad_compose_formula(&tau, &sigmas).map_err(|e| e.to_string())?;
                    ensure(formula == composite, || format!("index formula disagrees at {tau}; {sigmas:?}"))?;
                    checked += 1;
                }
            }
        }
    }
    Ok(format!("{checked} instances"))
}

// 3 -----------------------------------------------------------------------

fn coherence() -> Check {
    let mut rng = random::seeded(3);
    let mut largest = 0;
    for trial in 0..200 {
        let [a, b, c] = random::amalg_triple(&mut rng, 3, 2, 2);
        let d = random::amalg_sig(&mut rng, &a.base, 3, 2);
        let r = lib(check_coherence(&a, &b, &c, &d))?;
        ensure(r.holds(), || format!("trial {trial}: {r:?}"))?;
        largest = largest.max(a.len() * b.len() * c.len());
    }
    Ok(format!("200 triples (with a fourth signature for the pentagon), up to {largest} operation triples"))
}

// 4 -----------------------------------------------------------------------

fn single_tensor_laxness() -> Check {
    let o = FinSet::range("O", 1);
    let a = lib(AmalgSig::from_labels(&o, &[("m", "0", &["0", "0"])]))?;
    let ai = lib(tensor_single(&a, &AmalgSig::unit(&o)))?;
    let rho = lib(single_right_unitor(&ai, &a))?;
    let total_arity: usize = a.ops().iter().map(|op| op.arity()).sum();
    ensure(ai.sig.len() == total_arity && a.len() == 1, || format!("|A ⊗ˢ I| = {}, |A| = {}", ai.sig.len(), a.len()))?;
    ensure(!rho.is_bijective(), || "ρ is bijective".into())?;
    Ok(format!("|A ⊗ˢ I| = {} against |A| = {}", ai.sig.len(), a.len()))
}

// 5 -----------------------------------------------------------------------

/// Binary trees with `n` leaves, written as the grafting labels.
fn binary_trees(n: usize) -> BTreeSet<String> {
    if n == 1 {
        return BTreeSet::from(["id_x".to_string()]);
    }
    let mut out = BTreeSet::new();
    for l in 1..n {
        for left in binary_trees(l) {
            for right in binary_trees(n - l) {
                out.insert(format!("m({left},{right})"));
            }
        }
    }
    out
}

fn free_planar_counts() -> Check {
    let o = lib(FinSet::from_strs("O", &["x"]))?;
    let a = lib(AmalgSig::from_labels(&o, &[("m", "x", &["x", "x"])]))?;
    let fc = free_multicategory(&lib(TGraph::of_signature(List, &a))?, 6, 5);
    ensure(fc.stabilized_at.is_some(), || "truncation did not stabilize".into())?;
    let g = fc.graph();
    let mut by_arity: BTreeMap<usize, BTreeSet<String>> = BTreeMap::new();
    for i in 0..g.len() {
        by_arity.entry(g.delta[i].len()).or_default().insert(g.carrier.label(i).to_string());
    }
    let mut counts = Vec::new();
    for n in 1..=5 {
        let got = by_arity.remove(&n).unwrap_or_default();
        ensure(got == binary_trees(n), || format!("arity {n}: {got:?}"))?;
        counts.push(got.len());
    }
    ensure(by_arity.is_empty(), || format!("unexpected arities {:?}", by_arity.keys()))?;
    ensure(counts == [1, 1, 2, 5, 14], || format!("{counts:?}"))?;
    let monoid = free_amalg_monoid(&fc).ok_or("no grafting monoid")?;
    let failures = lib(check_amalg_monoid(&monoid))?;
    ensure(failures.is_empty(), || format!("{failures:?}"))?;
    Ok(format!("counts {counts:?}, grafting monoid lawful"))
}

// 6 -----------------------------------------------------------------------

/// Ordered rooted trees with `j` nodes and `l` free inputs, listed as
/// bracket words: a node is `(`…`)` around a word of `|` (free input) and
/// nodes. With no nodes there is only the bare input.
fn plane_trees(j: usize, l: usize) -> BTreeSet<String> {
    fn words(j: usize, l: usize) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        if j == 0 && l == 0 {
            out.insert(String::new());
        }
        if l > 0 {
            for rest in words(j, l - 1) {
                out.insert(format!("|{rest}"));
            }
        }
        for j1 in 1..=j {
            for l1 in 0..=l {
                for first in words(j1 - 1, l1) {
                    for rest in words(j - j1, l - l1) {
                        out.insert(format!("({first}){rest}"));
                    }
                }
            }
        }
        out
    }
    if j == 0 {
        return if l == 1 { BTreeSet::from(["|".to_string()]) } else { BTreeSet::new() };
    }
    words(j - 1, l).into_iter().map(|w| format!("({w})")).collect()
}

fn opetope_counts() -> Check {
    ensure(terminal_cells(0, 6).len() == 1 && terminal_cells(1, 6).len() == 1, || "dimension 0 or 1 is not a single cell".into())?;
    for m in 0..=6 {
        let n = terminal_cells(2, m).len();
        ensure(n == m + 1, || format!("{n} two-cells of arity at most {m}"))?;
    }
    let arity = |c: &Opetope| c.inputs().len();
    let cells = terminal_cells(3, 6);
    let mut closed = Vec::new();
    for j in 1..=5 {
        let n = cells.iter().filter(|c| arity(c) == j && c.target().map(|t| arity(&t)) == Some(0)).count();
        ensure(n == plane_trees(j, 0).len(), || format!("{n} closed three-cells with {j} source cells"))?;
        closed.push(n);
    }
    for j in 0..=6 {
        for l in 0..=6 - j {
            let n = cells.iter().filter(|c| arity(c) == j && c.target().map(|t| arity(&t)) == Some(l)).count();
            ensure(n == plane_trees(j, l).len(), || format!("{n} three-cells with {j} source cells and {l} inputs"))?;
        }
    }
    let mut compared = 0;
    for lv in iterate_tower(4, 5) {
        ensure(lv.cells == terminal_cells(lv.dim, 5), || format!("tower disagrees in dimension {}", lv.dim))?;
        compared += lv.cells.len();
    }
    for lv in iterate_tower(3, 6) {
        ensure(lv.cells == terminal_cells(lv.dim, 6), || format!("tower disagrees in dimension {} at size 6", lv.dim))?;
        compared += lv.cells.len();
    }
    Ok(format!("closed three-cells {closed:?}, {compared} tower cells compared"))
}

// 7 -----------------------------------------------------------------------

fn recovery() -> Check {
    let mut rng = random::seeded(7);
    let mut orbits = 0;
    for trial in 0..50 {
        let o = random::base(&mut rng, "O", 2);
        let s = random::sym_sig(&mut rng, &o, 2, 3);
        let table = lib(TabulatedFunctor::at_bound(&AnalyticFunctor(s.clone()), 3))?;
        let r = recover_signature(&table).map_err(|e| format!("trial {trial}: {e}"))?;
        let iso = find_sym_iso(&s, &r.sig).ok_or_else(|| format!("trial {trial}: no isomorphism"))?;
        ensure(iso.is_iso(), || format!("trial {trial}: exhibited map is not invertible"))?;
        ensure(r.comparison.iter().all(FinMap::is_bijective), || format!("trial {trial}: comparison not bijective"))?;
        orbits += s.carrier.orbit_reps().len();
    }
    Ok(format!("50 signatures, {orbits} orbits recovered up to isomorphism"))
}

// 8 -----------------------------------------------------------------------

fn fibre_round_trip() -> Check {
    let mut rng = random::seeded(8);
    let mut alternatives = 0;
    for trial in 0..50 {
        let m = random::sym_sig_mor(&mut rng, 2, 3, 2);
        let t = lib(rep_sym_fibre(&m, 3))?;
        let back = transformation_to_morphism(&t, &m.dom, &m.cod).map_err(|e| format!("trial {trial}: {e}"))?;
        ensure(back == m, || format!("trial {trial}: round trip changed the morphism"))?;
        let all = lib(morphisms_representing(&t, &m.dom, &m.cod))?;
        ensure(all == vec![m.clone()], || format!("trial {trial}: {} morphisms represent the transformation", all.len()))?;
        alternatives += sigkit::signatures::hom_sym_over(&m.dom, &m.cod, &m.u).len();
    }
    Ok(format!("50 morphisms, each unique among {alternatives} candidates in total"))
}

// 9 -----------------------------------------------------------------------

fn emb_full() -> Check {
    let r = lib(confirm_emb_full(2, 2, 3))?;
    ensure(r.violations.is_empty(), || format!("{:?}", r.violations))?;
    ensure(r.diagonal_flagged, || "diagonal not flagged".into())?;
    ensure(r.non_analytic_flagged, || "non-analytic control not flagged".into())?;
    Ok(format!("{} fixtures, {} transformations, {} weakly cartesian, no violations, controls flagged", r.fixtures, r.transformations, r.weakly_cartesian))
}

// 10 ----------------------------------------------------------------------

fn comparison_coherence() -> Check {
    let mut rng = random::seeded(10);
    let mut squares = 0;
    for trial in 0..10 {
        let m = random::amalg_sig_mor(&mut rng, 3, 3, 2);
        for s in [&m.dom, &m.cod] {
            let c = lib(phi_component(s))?;
            ensure(c.f.is_bijective(), || format!("trial {trial}: Φ component not bijective"))?;
        }
        ensure(lib(phi_natural(&m))?, || format!("trial {trial}: Φ square fails"))?;
        let (dd, dc) = (lib(iota_a(&m.dom))?, lib(iota_a(&m.cod))?);
        for d in [&dd, &dc] {
            let p = lib(psi(d, 3))?;
            ensure(p.components.iter().all(FinMap::is_bijective), || format!("trial {trial}: Ψ component not bijective"))?;
            ensure(p.is_natural(), || format!("trial {trial}: Ψ not natural in X"))?;
            squares += p.components.len();
            let fam = family(&d.base, 2);
            for f in fibre_morphisms(d, d).iter().take(10) {
                for x in &fam {
                    ensure(lib(psi_natural_in_diagram(f, x))?, || format!("trial {trial}: Ψ square along a diagram morphism fails"))?;
                    squares += 1;
                }
            }
        }
        squares += 1;
    }
    let mut evaluated = 0;
    for m in 1..=2 {
        let base = FinSet::range("O", m);
        let fam = family(&base, 2);
        for a in small_signatures(&base, 2, 2) {
            for x in &fam {
                let paths = lib(six_paths(&a, x))?;
                ensure(paths.iter().all(|p| p.agrees), || format!("paths disagree on {:?} at {x:?}", a.ops()))?;
                evaluated += 1;
            }
        }
    }
    Ok(format!("{squares} squares, six paths agree on {evaluated} (fixture, slice) pairs"))
}

// 11 ----------------------------------------------------------------------

fn monoid_chase() -> Check {
    let c = chain_category();
    let failures = lib(check_tgraph_monoid(&c))?;
    ensure(failures.is_empty(), || format!("{failures:?}"))?;
    let mut mutations = 0;
    for k in 0..c.mult.len() {
        let current = c.mult[k].expect("total");
        for v in (0..c.graph.len()).filter(|&v| v != current) {
            let failures = lib(check_tgraph_monoid(&c.with_entry(k, v)))?;
            let pair = c.pair_label(k);
            ensure(!failures.is_empty(), || format!("{pair} ↦ {} passes", c.label(v)))?;
            ensure(failures.iter().any(|f| f.witness.contains(pair)), || format!("{pair} ↦ {}: {failures:?}", c.label(v)))?;
            mutations += 1;
        }
    }
    Ok(format!("{mutations} single-entry mutations, each caught at the mutated pair"))
}

#[test]
fn acceptance() {
    let criteria: [(&str, Duration, fn() -> Check); 11] = [
        ("pullback counterexample 1/2/8", Duration::from_secs(1), pullback_counterexample),
        ("operad of symmetries", Duration::from_secs(10), operad_laws),
        ("coherence in fibres", Duration::from_secs(30), coherence),
        ("single-tensor laxness", Duration::from_secs(5), single_tensor_laxness),
        ("free planar counts", Duration::from_secs(10), free_planar_counts),
        ("opetope counts", Duration::from_secs(60), opetope_counts),
        ("signature recovery", Duration::from_secs(120), recovery),
        ("fibrewise round trip", Duration::from_secs(60), fibre_round_trip),
        ("weakly cartesian is cartesian", Duration::from_secs(120), emb_full),
        ("comparison coherence", Duration::from_secs(60), comparison_coherence),
        ("monoid axiom chase", Duration::from_secs(5), monoid_chase),
    ];
    let mut failed = Vec::new();
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = run();
        let took = start.elapsed();
        let line = match (&outcome, took <= *limit) {
            (Ok(detail), true) => format!("PASS  {:>2} {name}: {detail} ({took:.2?} / {limit:?})", i + 1),
            (Ok(detail), false) => format!("FAIL  {:>2} {name}: too slow, {took:.2?} over {limit:?}; {detail}", i + 1),
            (Err(why), _) => format!("FAIL  {:>2} {name}: {why} ({took:.2?})", i + 1),
        };
        println!("{line}");
        if !line.starts_with("PASS") {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
