//! Reading a symmetric signature off a tabulated functor, and a signature
//! morphism off a tabulated transformation.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::error::{structural, Error, Result};
use crate::evaluation::{AnalyticFunctor, Evaluated, NatTransData, SliceFunctor, TabulatedFunctor, WideCounterexample};
use crate::finset::{FinMap, SliceObj};
use crate::perm::Perm;
use crate::signatures::{hom_sym_over, OrbitSpec, SymSig, SymSigMor};
use crate::symset::EquivMap;

/// A recovered signature with the comparison `A(Y) → F(Y)` on every table
/// object.
#[derive(Clone, Debug)]
pub struct Recovery {
    pub sig: SymSig,
    /// generic element per orbit: (table object, element of `F` there)
    pub generic: Vec<(usize, usize)>,
    pub comparison: Vec<FinMap>,
}

#[derive(Clone, Debug, Serialize)]
pub struct RecoveredOrbit {
    pub name: String,
    pub out: String,
    pub ins: Vec<String>,
    pub stabilizer: Vec<Vec<usize>>,
}

impl Recovery {
    /// Orbit representatives with their stabilizers, 1-based.
    pub fn orbits(&self) -> Vec<RecoveredOrbit> {
        let s = &self.sig;
        s.carrier
            .orbit_reps()
            .into_iter()
            .map(|(n, e)| RecoveredOrbit {
                name: s.label(n, e).to_string(),
                out: s.base.label(s.out(n, e)).to_string(),
                ins: s.ins(n, e).iter().map(|&o| s.base.label(o).to_string()).collect(),
                stabilizer: s.carrier.stabilizer(n, e).iter().map(Perm::one_based).collect(),
            })
            .collect()
    }
}

fn counts(x: &SliceObj) -> Vec<usize> {
    x.d.fibers().iter().map(Vec::len).collect()
}

fn terminal_index(t: &TabulatedFunctor) -> Option<usize> {
    t.objects.iter().position(|x| counts(x).iter().all(|&c| c == 1))
}

fn bang(x: &SliceObj) -> Vec<usize> {
    x.d.table().to_vec()
}

fn not_analytic(t: &TabulatedFunctor, why: String) -> Error {
    match t.pullback_failures(false, 1).into_iter().next() {
        Some(cx) => Error::NotAnalytic(format!("{why}; weak pullback not preserved: {}", describe(&cx))),
        None => Error::Inconclusive(format!("{why}; no weak-pullback failure within the table, try a larger bound")),
    }
}

fn describe(cx: &WideCounterexample) -> String {
    serde_json::to_string(cx).unwrap_or_default()
}

/// Recover `A` with `A(−) ≅ F` from a table of `F` on all slices with at
/// most `bound` elements.
pub fn recover_signature(t: &TabulatedFunctor) -> Result<Recovery> {
    let one = terminal_index(t).ok_or_else(|| Error::Inconclusive("the table does not reach the terminal slice".into()))?;
    // component of every element: its image in F(1)
    let comp: Vec<Vec<usize>> = t
        .objects
        .iter()
        .enumerate()
        .map(|(i, x)| {
            let f = t.apply(i, one, &bang(x)).expect("maps to the terminal are tabulated");
            f.table().to_vec()
        })
        .collect();
    let mut specs = Vec::new();
    let mut generic = Vec::new();
    for c in 0..t.values[one].len() {
        // non-degenerate elements (outside every proper subobject) of the
        // largest support
        let mut best: Option<(usize, usize)> = None;
        for (i, x) in t.objects.iter().enumerate() {
            if best.is_some_and(|(j, _)| t.objects[j].len() >= x.len()) {
                continue;
            }
            let mut covered = vec![false; t.values[i].len()];
            for m in t.maps.iter().filter(|m| m.tgt == i && m.f.map.is_injective() && !m.f.map.is_surjective()) {
                for &g in m.image.table() {
                    covered[g] = true;
                }
            }
            if let Some(g) = (0..t.values[i].len()).find(|&g| comp[i][g] == c && !covered[g]) {
                best = Some((i, g));
            }
        }
        let (xi, g) = best.ok_or_else(|| Error::Inconclusive(format!("no generic element for component {c}")))?;
        let x = &t.objects[xi];
        let n = x.len();
        let mut stab = Vec::new();
        for m in t.maps.iter().filter(|m| m.src == xi && m.tgt == xi && m.f.map.is_bijective()) {
            if m.image.apply(g) == g {
                stab.push(Perm::new(m.f.map.table().to_vec())?);
            }
        }
        specs.push(OrbitSpec { name: format!("r{c}"), out: t.values[one].obj.typ(c), ins: (0..n).map(|k| x.typ(k)).collect(), stabilizer: stab });
        generic.push((xi, g));
    }
    let sig = SymSig::from_orbits(&t.base, &specs)?;
    let reps: Vec<(usize, usize)> = specs.iter().map(|s| (s.ins.len(), sig.carrier.find(s.ins.len(), &s.name).expect("orbit rep"))).collect();
    let a = AnalyticFunctor(sig.clone());
    let mut comparison = Vec::new();
    for (yi, y) in t.objects.iter().enumerate() {
        let ev = a.eval(y)?;
        let mut table = Vec::with_capacity(ev.len());
        for k in &ev.keys {
            let (n, e, xs) = (k[0], k[1], &k[2..]);
            let (oi, rho) = reps
                .iter()
                .enumerate()
                .filter(|(_, r)| r.0 == n)
                .find_map(|(oi, r)| Perm::all(n).into_iter().find(|p| sig.carrier.act(n, r.1, p) == e).map(|p| (oi, p)))
                .ok_or_else(|| Error::Inconsistent("element outside every recovered orbit".into()))?;
            // [r·ρ, x⃗] = [r, x⃗∘ρ⁻¹]
            let h = rho.inverse().pull(xs);
            let (xi, g) = generic[oi];
            let fh = t.apply(xi, yi, &h).ok_or_else(|| Error::Inconsistent(format!("map {h:?} missing from the table")))?;
            table.push(fh.apply(g));
        }
        let psi = FinMap::new(ev.obj.total().clone(), t.values[yi].obj.total().clone(), table)?;
        if !psi.is_bijective() {
            let top = t.objects.iter().map(SliceObj::len).max().unwrap_or(0);
            if generic.iter().any(|&(xi, _)| t.objects[xi].len() == top) && t.pullback_failures(false, 1).is_empty() {
                return Err(Error::Inconclusive(format!("a generic element sits at the bound {top}; arities may exceed the table")));
            }
            return Err(not_analytic(
                t,
                format!("the recovered signature has {} elements at object {yi} where the functor has {}", ev.len(), t.values[yi].len()),
            ));
        }
        comparison.push(psi);
    }
    Ok(Recovery { sig, generic, comparison })
}

/// `[a, x⃗] ↦ [f(a), x⃗]` between fibrewise analytic evaluations.
pub fn rep_sym_fibre_component(m: &SymSigMor, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
    let b = AnalyticFunctor(m.cod.clone());
    let table = src
        .keys
        .iter()
        .map(|k| tgt.require(&b.canonical(k[0], m.f.apply(k[0], k[1]), &k[2..])))
        .collect::<Result<Vec<_>>>()?;
    FinMap::new(src.obj.total().clone(), tgt.obj.total().clone(), table)
}

/// `rep_s(f, 1_O)` on a table of slices over `O`.
pub fn rep_sym_fibre(m: &SymSigMor, bound: usize) -> Result<NatTransData> {
    if !m.u.is_bijective() || m.u.table().iter().enumerate().any(|(i, &j)| i != j) {
        return structural("fibrewise representation needs the identity base map");
    }
    let src = TabulatedFunctor::at_bound(&AnalyticFunctor(m.dom.clone()), bound)?;
    let tgt = TabulatedFunctor::at_bound(&AnalyticFunctor(m.cod.clone()), bound)?;
    NatTransData::from_fn(src, tgt, |_, s, t| rep_sym_fibre_component(m, s, t))
}

/// The unique morphism `(f, 1)` with `rep(f) = t`, for `t` a transformation
/// between the analytic evaluations of `a` and `b`.
pub fn transformation_to_morphism(t: &NatTransData, a: &SymSig, b: &SymSig) -> Result<SymSigMor> {
    if a.base != b.base || t.src.base != a.base {
        return structural("transformation and signatures live over different bases");
    }
    let fa = AnalyticFunctor(a.clone());
    let mut table: BTreeMap<usize, Vec<Option<usize>>> = a.carrier.grades().map(|(n, s)| (n, vec![None; s.len()])).collect();
    for (n, e) in a.carrier.orbit_reps() {
        let ins = a.ins(n, e);
        let mut cnt = vec![0; a.base.len()];
        for &o in ins {
            cnt[o] += 1;
        }
        let probe = SliceObj::with_fiber_sizes(&a.base, &cnt);
        let (xi, _) = t
            .src
            .canonical(&probe)
            .ok_or_else(|| Error::Inconclusive(format!("arity {n} exceeds the table of the transformation")))?;
        let x = &t.src.objects[xi];
        let fib = x.d.fibers();
        let mut used = vec![0; a.base.len()];
        let beta: Vec<usize> = ins
            .iter()
            .map(|&o| {
                used[o] += 1;
                fib[o][used[o] - 1]
            })
            .collect();
        let src_el = t.src.values[xi].require(&fa.canonical(n, e, &beta))?;
        let key = &t.tgt.values[xi].keys[t.components[xi].apply(src_el)];
        let (m, b0, ys) = (key[0], key[1], &key[2..]);
        if m != n {
            return Err(Error::Inconsistent(format!("component sends an {n}-ary operation to an {m}-ary one")));
        }
        // f(e) = b0·(y⁻¹∘β)
        let pi: Vec<usize> = beta
            .iter()
            .map(|bx| ys.iter().position(|y| y == bx))
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| Error::Inconsistent("transformation is not cartesian at a generic element".into()))?;
        let fe = b.carrier.act(n, b0, &Perm::new(pi)?);
        for rho in Perm::all(n) {
            let src = a.carrier.act(n, e, &rho);
            let img = b.carrier.act(n, fe, &rho);
            let slot = &mut table.get_mut(&n).expect("grade present")[src];
            match slot {
                Some(prev) if *prev != img => return Err(Error::Inconsistent("transformation is not equivariant on an orbit".into())),
                _ => *slot = Some(img),
            }
        }
    }
    let table: BTreeMap<usize, Vec<usize>> = table.into_iter().map(|(n, v)| (n, v.into_iter().map(|x| x.expect("every orbit visited")).collect())).collect();
    let f = EquivMap::new(a.carrier.clone(), b.carrier.clone(), table)?;
    let m = SymSigMor::new(a.clone(), b.clone(), f, FinMap::identity(&a.base))?;
    for (i, c) in t.components.iter().enumerate() {
        if rep_sym_fibre_component(&m, &t.src.values[i], &t.tgt.values[i])? != *c {
            return Err(Error::Inconsistent(format!("rep of the recovered morphism differs from the transformation at object {i}")));
        }
    }
    Ok(m)
}

/// Every `(f, 1)` from `a` to `b` whose representation is `t`.
pub fn morphisms_representing(t: &NatTransData, a: &SymSig, b: &SymSig) -> Result<Vec<SymSigMor>> {
    let mut out = Vec::new();
    for m in hom_sym_over(a, b, &FinMap::identity(&a.base)) {
        let mut same = true;
        for (i, c) in t.components.iter().enumerate() {
            if rep_sym_fibre_component(&m, &t.src.values[i], &t.tgt.values[i])? != *c {
                same = false;
                break;
            }
        }
        if same {
            out.push(m);
        }
    }
    Ok(out)
}

/// Slice objects of a table, keyed by fiber sizes.
pub fn table_shape(t: &TabulatedFunctor) -> Vec<(Vec<usize>, usize)> {
    t.objects.iter().zip(&t.values).map(|(x, v)| (counts(x), v.len())).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evaluation::Gumm;
    use crate::finset::FinSet;
    use crate::signatures::find_sym_iso;

    fn two() -> FinSet {
        FinSet::from_strs("O", &["x", "y"]).unwrap()
    }

    fn sample() -> SymSig {
        let swap = Perm::from_one_based(&[2, 1]).unwrap();
        SymSig::from_orbits(
            &two(),
            &[
                OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![swap] },
                OrbitSpec { name: "p".into(), out: 1, ins: vec![0, 1], stabilizer: vec![] },
                OrbitSpec { name: "k".into(), out: 1, ins: vec![], stabilizer: vec![] },
                OrbitSpec { name: "q".into(), out: 0, ins: vec![1, 1], stabilizer: vec![] },
            ],
        )
        .unwrap()
    }

    #[test]
    fn recovers_up_to_iso() {
        let a = sample();
        let t = TabulatedFunctor::at_bound(&AnalyticFunctor(a.clone()), 3).unwrap();
        let r = recover_signature(&t).unwrap();
        assert!(find_sym_iso(&a, &r.sig).is_some());
        assert_eq!(r.sig.len(), a.len());
    }

    #[test]
    fn gumm_is_not_analytic() {
        // the smallest failing square has a four-element pullback
        let t = TabulatedFunctor::at_bound(&Gumm::new(), 3).unwrap();
        assert!(matches!(recover_signature(&t), Err(Error::Inconclusive(_))));
        let t = TabulatedFunctor::at_bound(&Gumm::new(), 4).unwrap();
        match recover_signature(&t) {
            Err(Error::NotAnalytic(_)) => {}
            other => panic!("expected a not-analytic verdict, got {other:?}"),
        }
    }

    #[test]
    fn small_bound_is_inconclusive() {
        let a = sample();
        let t = TabulatedFunctor::at_bound(&AnalyticFunctor(a), 1).unwrap();
        assert!(matches!(recover_signature(&t), Err(Error::Inconclusive(_))));
    }

    #[test]
    fn morphism_round_trip() {
        let a = sample();
        for m in hom_sym_over(&a, &a, &FinMap::identity(&a.base)) {
            let t = rep_sym_fibre(&m, 3).unwrap();
            assert!(t.is_cartesian());
            let back = transformation_to_morphism(&t, &a, &a).unwrap();
            assert_eq!(back.f, m.f);
            assert_eq!(morphisms_representing(&t, &a, &a).unwrap().len(), 1);
        }
    }
}
