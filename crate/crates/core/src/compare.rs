//! The comparison square between amalgamated signatures, polynomial
//! diagrams, symmetric signatures and analytic diagrams: `K_sig`, `K_diag`,
//! `ι_a`, `ι_s`, the isomorphisms `Φ` and `Ψ`, and the desk-scale check that
//! weakly cartesian transformations of polynomial functors are cartesian.

use std::collections::{BTreeMap, BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::Value;

use crate::diagrams::{andiag_of_sym, hom_poly_over, sym_of_andiag, AnDiag, AnDiagMor, PolyDiag, PolyDiagMor};
use crate::error::{structural, Error, Result};
use crate::evaluation::{
    check_weak_wide_pullback_preservation, eval_amalg, eval_analytic, eval_poly, family, AmalgFunctor, AnalyticFunctor, Evaluated, Gumm,
    NatTransData, PolyFunctor, SliceFunctor, TabulatedFunctor,
};
use crate::finset::{FinMap, FinSet, SliceMap, SliceObj};
use crate::monoids::{check_slice_monad, AmalgMonad, AmalgMonoid, MonoidFailure, SliceMonad};
use crate::perm::{factorial, Perm};
use crate::signatures::{hom_amalg_over, hom_sym_over, AmalgSig, AmalgSigMor, Op, SymSig, SymSigMor};
use crate::symset::{delta_slice, orb_slice, pi_star_sections, pullback_sym_pairs, EquivMap, SlicedSymSet, SymSet};

/// A comparison functor applied to an input, for reporting.
#[derive(Clone, Debug, Serialize)]
pub struct ComparisonWitness {
    pub functor: String,
    pub input: Value,
    pub output: Value,
    pub iso: Option<Value>,
}

/// Operations of arity `n`, in order.
fn ops_of_arity(a: &AmalgSig, n: usize) -> Vec<usize> {
    (0..a.len()).filter(|&i| a.arity(i) == n).collect()
}

fn arities(a: &AmalgSig) -> BTreeSet<usize> {
    (0..a.len()).map(|i| a.arity(i)).collect()
}

/// Position of `⟨k-th op of its arity, τ⟩` in grade `n`.
fn pair_index(n: usize, k: usize, tau: &Perm) -> usize {
    k * factorial(n) + tau.rank()
}

fn split_index(n: usize, x: usize) -> (usize, Perm) {
    let f = factorial(n);
    (x / f, Perm::unrank(n, x % f))
}

/// Free symmetric set on blocks of `counts[n]` generators in grade `n`:
/// elements `⟨k, τ⟩`, acted on by `⟨k, τ⟩·σ = ⟨k, τ∘σ⟩`.
fn free_symset(labels: &BTreeMap<usize, Vec<String>>) -> Result<SymSet> {
    let grades = labels
        .iter()
        .map(|(&n, names)| {
            let mut ls = Vec::new();
            for name in names {
                for t in Perm::all(n) {
                    ls.push(format!("<{name},{t}>"));
                }
            }
            FinSet::new(format!("K_{n}"), ls).map(|s| (n, s))
        })
        .collect::<Result<BTreeMap<_, _>>>()?;
    SymSet::new(grades, |n, x, s| {
        let (k, t) = split_index(n, x);
        pair_index(n, k, &t.compose(s))
    })
}

/// `K_sig(A)`: pairs `⟨a, τ⟩`, typed `∂_a∘τ`, with the free action.
pub fn k_sig(a: &AmalgSig) -> Result<SymSig> {
    let mut labels = BTreeMap::new();
    let mut profiles: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for n in arities(a) {
        let ops = ops_of_arity(a, n);
        labels.insert(n, ops.iter().map(|&i| a.op(i).name.clone()).collect::<Vec<_>>());
        let ps = profiles.entry(n).or_default();
        for &i in &ops {
            let op = a.op(i);
            for t in Perm::all(n) {
                let mut p = vec![op.out];
                p.extend(t.pull(&op.ins));
                ps.push(p);
            }
        }
    }
    SymSig::new(a.base.clone(), free_symset(&labels)?, profiles)
}

/// `K_sig(f, σ, u)`: `⟨a, τ⟩ ↦ ⟨f(a), σ_a⁻¹∘τ⟩`.
pub fn k_sig_mor(m: &AmalgSigMor) -> Result<SymSigMor> {
    let (dom, cod) = (k_sig(&m.dom)?, k_sig(&m.cod)?);
    let mut table = BTreeMap::new();
    for n in arities(&m.dom) {
        let src = ops_of_arity(&m.dom, n);
        let tgt = ops_of_arity(&m.cod, n);
        let mut row = Vec::new();
        for &a in &src {
            let k = tgt.iter().position(|&b| b == m.f[a]).expect("arity is preserved");
            for t in Perm::all(n) {
                row.push(pair_index(n, k, &m.sigma[a].inverse().compose(&t)));
            }
        }
        table.insert(n, row);
    }
    let f = EquivMap::new(dom.carrier.clone(), cod.carrier.clone(), table)?;
    SymSigMor::new(dom, cod, f, m.u.clone())
}

/// A preimage of a symmetric signature with free action: one operation per
/// orbit, with the isomorphism `K_sig(A) → S`.
pub fn amalg_of_free(s: &SymSig) -> Option<(AmalgSig, SymSigMor)> {
    if !s.carrier.is_free() {
        return None;
    }
    let reps = s.carrier.orbit_reps();
    let ops: Vec<Op> = reps.iter().map(|&(n, e)| Op { name: s.label(n, e).to_string(), out: s.out(n, e), ins: s.ins(n, e).to_vec() }).collect();
    let a = AmalgSig::new(s.base.clone(), ops).ok()?;
    let ka = k_sig(&a).ok()?;
    let mut table: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for n in arities(&a) {
        let row = ops_of_arity(&a, n)
            .iter()
            .flat_map(|&i| {
                let (_, e) = reps[i];
                Perm::all(n).into_iter().map(move |t| s.carrier.act(n, e, &t))
            })
            .collect();
        table.insert(n, row);
    }
    let f = EquivMap::new(ka.carrier.clone(), s.carrier.clone(), table).ok()?;
    let iso = SymSigMor::new(ka, s.clone(), f, FinMap::identity(&s.base)).ok()?;
    iso.is_iso().then_some((a, iso))
}

/// Faithfulness and fullness of `K_sig` on one hom-set over `u`.
#[derive(Clone, Debug, Serialize)]
pub struct HomComparison {
    pub amalgamated: usize,
    pub symmetric: usize,
    pub faithful: bool,
    pub full: bool,
}

pub fn k_sig_on_homs(a: &AmalgSig, b: &AmalgSig, u: &FinMap) -> Result<HomComparison> {
    let (ka, kb) = (k_sig(a)?, k_sig(b)?);
    let homs = hom_amalg_over(a, b, u, false);
    let images = homs.iter().map(k_sig_mor).collect::<Result<Vec<_>>>()?;
    let sym = hom_sym_over(&ka, &kb, u);
    let tables = |m: &SymSigMor| m.dom.carrier.grade_numbers().into_iter().map(|n| m.f.table(n).to_vec()).collect::<Vec<_>>();
    let image_tables: BTreeSet<Vec<Vec<usize>>> = images.iter().map(tables).collect();
    Ok(HomComparison {
        amalgamated: homs.len(),
        symmetric: sym.len(),
        faithful: image_tables.len() == homs.len(),
        full: sym.iter().all(|m| image_tables.contains(&tables(m))),
    })
}

/// Offsets of each operation's positions in `ι_a(A)`.
fn offsets(a: &AmalgSig) -> Vec<usize> {
    let mut off = Vec::with_capacity(a.len());
    let mut acc = 0;
    for i in 0..a.len() {
        off.push(acc);
        acc += a.arity(i);
    }
    off
}

/// `ι_a(A)`: `E = ⊔_a (|a|]`, `B = A`.
pub fn iota_a(a: &AmalgSig) -> Result<PolyDiag> {
    let mut labels = Vec::new();
    let (mut s, mut p) = (Vec::new(), Vec::new());
    for (i, op) in a.ops().iter().enumerate() {
        for (j, &o) in op.ins.iter().enumerate() {
            labels.push(format!("<{},{}>", op.name, j + 1));
            s.push(o);
            p.push(i);
        }
    }
    let e = FinSet::new("E", labels)?;
    let b = a.op_set();
    let t = a.ops().iter().map(|op| op.out).collect();
    PolyDiag::new(a.base.clone(), FinMap::new(e.clone(), a.base.clone(), s)?, FinMap::new(e, b.clone(), p)?, FinMap::new(b, a.base.clone(), t)?)
}

/// `ι_a(f, σ, u)`: `g⟨a, i⟩ = ⟨f(a), σ_a⁻¹(i)⟩`.
pub fn iota_a_mor(m: &AmalgSigMor) -> Result<PolyDiagMor> {
    let (dom, cod) = (iota_a(&m.dom)?, iota_a(&m.cod)?);
    let oc = offsets(&m.cod);
    let mut g = Vec::new();
    for a in 0..m.dom.len() {
        let inv = m.sigma[a].inverse();
        g.extend((0..m.dom.arity(a)).map(|i| oc[m.f[a]] + inv.apply(i)));
    }
    let f = FinMap::new(dom.b().clone(), cod.b().clone(), m.f.clone())?;
    let g = FinMap::new(dom.e().clone(), cod.e().clone(), g)?;
    PolyDiagMor::new(dom, cod, m.u.clone(), f, g)
}

/// Quasi-inverse of `ι_a`, enumerating each fibre in element order.
pub fn amalg_of_poly(d: &PolyDiag) -> Result<AmalgSig> {
    let ops = (0..d.b().len())
        .map(|b| Op { name: d.b().label(b).to_string(), out: d.t.apply(b), ins: d.fiber(b).iter().map(|&e| d.s.apply(e)).collect() })
        .collect();
    AmalgSig::new(d.base.clone(), ops)
}

/// The isomorphism `d → ι_a(amalg_of_poly(d))`.
pub fn poly_round_trip(d: &PolyDiag) -> Result<PolyDiagMor> {
    let back = iota_a(&amalg_of_poly(d)?)?;
    let a = amalg_of_poly(d)?;
    let off = offsets(&a);
    let g = (0..d.e().len())
        .map(|e| {
            let b = d.p.apply(e);
            off[b] + d.fiber(b).iter().position(|&x| x == e).unwrap()
        })
        .collect();
    let f = FinMap::new(d.b().clone(), back.b().clone(), (0..d.b().len()).collect())?;
    let g = FinMap::new(d.e().clone(), back.e().clone(), g)?;
    PolyDiagMor::new(d.clone(), back, FinMap::identity(&d.base), f, g)
}

/// Quasi-inverse of `ι_a` on morphisms.
pub fn amalg_mor_of_poly(m: &PolyDiagMor) -> Result<AmalgSigMor> {
    let (dom, cod) = (amalg_of_poly(&m.dom)?, amalg_of_poly(&m.cod)?);
    let mut sigma = Vec::new();
    for b in 0..m.dom.b().len() {
        let tf = m.cod.fiber(m.f.apply(b));
        let inv: Vec<usize> = m.dom.fiber(b).iter().map(|&e| tf.iter().position(|&x| x == m.g.apply(e)).unwrap()).collect();
        sigma.push(Perm::new(inv)?.inverse());
    }
    AmalgSigMor::new(dom, cod, m.u.clone(), m.f.table().to_vec(), sigma)
}

/// `ι_s(A)`: positions `⟨a, i⟩` with the conjugation action.
pub fn iota_s(a: &SymSig) -> Result<AnDiag> {
    andiag_of_sym(a)
}

pub fn iota_s_mor(m: &SymSigMor) -> Result<AnDiagMor> {
    AnDiagMor::new(iota_s(&m.dom)?, iota_s(&m.cod)?, m.f.clone(), m.u.clone())
}

fn canonical_key(carrier: &SymSet, n: usize, a: usize, xs: &[usize]) -> Vec<usize> {
    let mut best: Option<Vec<usize>> = None;
    for s in Perm::all(n) {
        let mut k = vec![n, carrier.act(n, a, &s)];
        k.extend(s.pull(xs));
        if best.as_ref().is_none_or(|b| k < *b) {
            best = Some(k);
        }
    }
    best.unwrap_or_else(|| vec![n, a])
}

/// Analytic evaluation of a diagram computed literally as
/// `orb ∘ t_! ∘ p_* ∘ s^* ∘ δ`. Keys match [`eval_analytic`] of the
/// signature read off the diagram.
pub fn eval_andiag(d: &AnDiag, x: &SliceObj) -> Result<Evaluated> {
    if x.base() != &d.base {
        return structural(format!("slice over {} evaluated by a diagram over {}", x.base().id(), d.base.id()));
    }
    let bound = d.carrier.max_grade().unwrap_or(0);
    let dx = delta_slice(x, bound).over_delta(bound)?;
    let s = EquivMap::new(d.positions.clone(), dx.base().clone(), d.s_table().clone())?;
    let (over_e, pairs) = pullback_sym_pairs(&s, &dx)?;
    let (over_a, sections) = pi_star_sections(&d.p(), &over_e)?;
    let typing = sections.iter().map(|(&n, ss)| (n, ss.iter().map(|(a, _)| d.t(n, *a)).collect())).collect();
    let pushed = SlicedSymSet::new(over_a.total().clone(), d.base.clone(), typing)?;
    let orb = orb_slice(&pushed);
    let items = pushed
        .total
        .orbit_reps()
        .into_iter()
        .enumerate()
        .map(|(k, (n, e))| {
            let (a, vals) = &sections[&n][e];
            let xs: Vec<usize> = vals.iter().map(|&v| pairs[&n][v].1).collect();
            (canonical_key(&d.carrier, n, *a, &xs), orb.typ(k), orb.total().label(k).to_string())
        })
        .collect();
    Evaluated::new(&d.base, "An(X)", items)
}

/// Grades of the fibres of `p`, with the elements of each size in order.
fn by_fibre_size(d: &PolyDiag) -> BTreeMap<usize, Vec<usize>> {
    let mut out: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for b in 0..d.b().len() {
        out.entry(d.fiber(b).len()).or_default().push(b);
    }
    out
}

/// `K_diag(D)`: `⟨b, h⟩` with `h: (n] ≅ p⁻¹(b)`, `h(i)` the `π(i)`-th
/// element of the fibre; action `⟨b, h⟩·τ = ⟨b, h∘τ⟩`.
pub fn k_diag(d: &PolyDiag) -> Result<AnDiag> {
    let groups = by_fibre_size(d);
    let labels = groups.iter().map(|(&n, bs)| (n, bs.iter().map(|&b| d.b().label(b).to_string()).collect())).collect();
    let carrier = free_symset(&labels)?;
    let mut s = BTreeMap::new();
    let mut t = BTreeMap::new();
    for (&n, bs) in &groups {
        let (mut sv, mut tv) = (Vec::new(), Vec::new());
        for &b in bs {
            let fib = d.fiber(b);
            for pi in Perm::all(n) {
                tv.push(d.t.apply(b));
                sv.extend((0..n).map(|i| d.s.apply(fib[pi.apply(i)])));
            }
        }
        s.insert(n, sv);
        t.insert(n, tv);
    }
    AnDiag::from_typing(d.base.clone(), carrier, s, t)
}

/// `K_diag(u, f, g)`: `⟨b, h⟩ ↦ ⟨f(b), g|∘h⟩`.
pub fn k_diag_mor(m: &PolyDiagMor) -> Result<AnDiagMor> {
    let (dom, cod) = (k_diag(&m.dom)?, k_diag(&m.cod)?);
    let (gd, gc) = (by_fibre_size(&m.dom), by_fibre_size(&m.cod));
    let mut table = BTreeMap::new();
    for (&n, bs) in &gd {
        let mut row = Vec::new();
        for &b in bs {
            let fb = m.f.apply(b);
            let k = gc[&n].iter().position(|&c| c == fb).expect("fibres correspond");
            let (fib, tfib) = (m.dom.fiber(b), m.cod.fiber(fb));
            for pi in Perm::all(n) {
                let img: Vec<usize> = (0..n).map(|i| tfib.iter().position(|&x| x == m.g.apply(fib[pi.apply(i)])).unwrap()).collect();
                row.push(pair_index(n, k, &Perm::new(img)?));
            }
        }
        table.insert(n, row);
    }
    let f = EquivMap::new(dom.carrier.clone(), cod.carrier.clone(), table)?;
    AnDiagMor::new(dom, cod, f, m.u.clone())
}

/// `Φ_A: K_diag(ι_a A) → ι_s(K_sig A)`, `⟨a, h⟩ ↦ ⟨a, π₂∘h⟩`.
pub fn phi_component(a: &AmalgSig) -> Result<AnDiagMor> {
    let src = k_diag(&iota_a(a)?)?;
    let tgt = iota_s(&k_sig(a)?)?;
    let off = offsets(a);
    let d = iota_a(a)?;
    let groups = by_fibre_size(&d);
    let mut table = BTreeMap::new();
    for (&n, bs) in &groups {
        let ops = ops_of_arity(a, n);
        let mut row = Vec::new();
        for &b in bs {
            let k = ops.iter().position(|&x| x == b).expect("fibre size is arity");
            let fib = d.fiber(b);
            for pi in Perm::all(n) {
                // π₂ of h(i) = ⟨b, j⟩
                let tau: Vec<usize> = (0..n).map(|i| fib[pi.apply(i)] - off[b]).collect();
                row.push(pair_index(n, k, &Perm::new(tau)?));
            }
        }
        table.insert(n, row);
    }
    let f = EquivMap::new(src.carrier.clone(), tgt.carrier.clone(), table)?;
    let m = AnDiagMor::new(src, tgt, f, FinMap::identity(&a.base))?;
    if !m.f.is_bijective() {
        return Err(Error::Inconsistent("Φ component is not bijective".into()));
    }
    Ok(m)
}

/// `Φ_B ∘ K_diag(ι_a m) = ι_s(K_sig m) ∘ Φ_A`, compared on operations.
pub fn phi_natural(m: &AmalgSigMor) -> Result<bool> {
    let left = phi_component(&m.cod)?.f.after(&k_diag_mor(&iota_a_mor(m)?)?.f)?;
    let right = iota_s_mor(&k_sig_mor(m)?)?.f.after(&phi_component(&m.dom)?.f)?;
    Ok(left == right)
}

/// Key of `⟨b, id⟩` in `K_diag(d)`.
fn identity_pair(d: &PolyDiag, b: usize) -> (usize, usize) {
    let n = d.fiber(b).len();
    let k = by_fibre_size(d)[&n].iter().position(|&c| c == b).unwrap();
    (n, pair_index(n, k, &Perm::identity(n)))
}

/// `Ψ_X: P_D(X) → K_diag(D)(X)`, `⟨b, y⃗⟩ ↦ [⟨b, id⟩, y⃗]`.
pub fn psi_component(d: &PolyDiag, an: &SymSig, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
    let table = src
        .keys
        .iter()
        .map(|k| {
            let (n, e) = identity_pair(d, k[0]);
            tgt.require(&canonical_key(&an.carrier, n, e, &k[1..]))
        })
        .collect::<Result<Vec<_>>>()?;
    FinMap::new(src.obj.total().clone(), tgt.obj.total().clone(), table)
}

/// `Ψ` tabulated on the family of `bound`.
pub fn psi(d: &PolyDiag, bound: usize) -> Result<NatTransData> {
    let an = sym_of_andiag(&k_diag(d)?)?;
    let fam = family(&d.base, bound);
    let src = TabulatedFunctor::tabulate(&PolyFunctor(d.clone()), fam.clone())?;
    let tgt = TabulatedFunctor::tabulate(&AnalyticFunctor(an.clone()), fam)?;
    NatTransData::from_fn(src, tgt, |_, s, t| psi_component(d, &an, s, t))
}

/// `Ψ` along a diagram morphism over the identity: `Ψ_e ∘ P_m = K_diag(m) ∘ Ψ_d` at `x`.
pub fn psi_natural_in_diagram(m: &PolyDiagMor, x: &SliceObj) -> Result<bool> {
    if !m.u.table().iter().enumerate().all(|(i, &j)| i == j) {
        return structural("Ψ naturality is checked in a fibre");
    }
    let (ad, ae) = (sym_of_andiag(&k_diag(&m.dom)?)?, sym_of_andiag(&k_diag(&m.cod)?)?);
    let km = k_diag_mor(m)?;
    let (pd, pe) = (eval_poly(&m.dom, x)?, eval_poly(&m.cod, x)?);
    let (qd, qe) = (eval_analytic(&ad, x)?, eval_analytic(&ae, x)?);
    let psi_d = psi_component(&m.dom, &ad, &pd, &qd)?;
    let psi_e = psi_component(&m.cod, &ae, &pe, &qe)?;
    for (i, k) in pd.keys.iter().enumerate() {
        let b = k[0];
        let fb = m.f.apply(b);
        let fib = m.dom.fiber(b);
        let ys: Vec<usize> = m.cod.fiber(fb).iter().map(|&e2| k[1 + fib.iter().position(|&e| m.g.apply(e) == e2).unwrap()]).collect();
        let mut pk = vec![fb];
        pk.extend(ys);
        let left = psi_e.apply(pe.require(&pk)?);
        let qk = &qd.keys[psi_d.apply(i)];
        let right = qe.require(&canonical_key(&ae.carrier, qk[0], km.f.apply(qk[0], qk[1]), &qk[2..]))?;
        if left != right {
            return Ok(false);
        }
    }
    Ok(true)
}

/// One way around the comparison square, evaluated at `X`.
#[derive(Clone, Debug, Serialize)]
pub struct PathReport {
    pub path: &'static str,
    pub elements: usize,
    pub agrees: bool,
}

pub const PATHS: [&str; 6] = [
    "A ⋆ X",
    "P_{ι_a A}(X)",
    "K_sig(A)(X)",
    "ι_s K_sig(A) evaluated through orb∘t_!∘p_*∘s^*∘δ",
    "K_diag ι_a(A) evaluated through orb∘t_!∘p_*∘s^*∘δ",
    "analytic functor of K_diag ι_a(A)",
];

/// Evaluate `A` along all six paths and translate each result back to
/// `⟨a, x⃗⟩` keys; every path must give the same typed set.
pub fn six_paths(a: &AmalgSig, x: &SliceObj) -> Result<Vec<PathReport>> {
    let ks = k_sig(a)?;
    let kd = k_diag(&iota_a(a)?)?;
    let phi = phi_component(a)?;
    let from_ksig = |k: &[usize]| -> Vec<usize> {
        let (n, e) = (k[0], k[1]);
        let (i, tau) = split_index(n, e);
        let mut out = vec![ops_of_arity(a, n)[i]];
        out.extend(tau.inverse().pull(&k[2..]));
        out
    };
    let from_kdiag = |k: &[usize]| -> Vec<usize> {
        let mut kk = vec![k[0], phi.f.apply(k[0], k[1])];
        kk.extend_from_slice(&k[2..]);
        from_ksig(&canonical_key(&ks.carrier, kk[0], kk[1], &kk[2..]))
    };
    let reference = eval_amalg(a, x)?;
    let want: BTreeMap<Vec<usize>, usize> = reference.keys.iter().cloned().zip(reference.obj.d.table().iter().copied()).collect();
    let paths: Vec<(Evaluated, &dyn Fn(&[usize]) -> Vec<usize>)> = vec![
        (reference.clone(), &|k: &[usize]| k.to_vec()),
        (eval_poly(&iota_a(a)?, x)?, &|k: &[usize]| k.to_vec()),
        (eval_analytic(&ks, x)?, &from_ksig),
        (eval_andiag(&iota_s(&ks)?, x)?, &from_ksig),
        (eval_andiag(&kd, x)?, &from_kdiag),
        (eval_analytic(&sym_of_andiag(&kd)?, x)?, &from_kdiag),
    ];
    Ok(paths
        .into_iter()
        .zip(PATHS)
        .map(|((ev, tr), path)| {
            let got: BTreeMap<Vec<usize>, usize> = ev.keys.iter().map(|k| tr(k)).zip(ev.obj.d.table().iter().copied()).collect();
            PathReport { path, elements: ev.len(), agrees: got.len() == ev.len() && got == want }
        })
        .collect())
}

/// All amalgamated signatures over `base` with at most `max_ops`
/// operations of arity at most `max_arity`, one per multiset of profiles.
pub fn small_signatures(base: &FinSet, max_ops: usize, max_arity: usize) -> Vec<AmalgSig> {
    let m = base.len();
    let mut profiles: Vec<(usize, Vec<usize>)> = Vec::new();
    for n in 0..=max_arity {
        for out in 0..m {
            for ins in crate::finset::product_indices(&vec![m; n]) {
                profiles.push((out, ins));
            }
        }
    }
    let mut out = Vec::new();
    let mut pick: Vec<usize> = Vec::new();
    fn go(profiles: &[(usize, Vec<usize>)], from: usize, left: usize, pick: &mut Vec<usize>, base: &FinSet, out: &mut Vec<AmalgSig>) {
        let ops = pick
            .iter()
            .enumerate()
            .map(|(i, &p)| Op { name: format!("f{i}"), out: profiles[p].0, ins: profiles[p].1.clone() })
            .collect();
        out.push(AmalgSig::new(base.clone(), ops).expect("profiles are typed in the base"));
        if left == 0 {
            return;
        }
        for p in from..profiles.len() {
            pick.push(p);
            go(profiles, p, left - 1, pick, base, out);
            pick.pop();
        }
    }
    go(&profiles, 0, max_ops, &mut pick, base, &mut out);
    out
}

/// The representable `y^{E_b}`: the fibre of `b` typed by `s`.
fn representable(d: &PolyDiag, b: usize) -> Result<SliceObj> {
    let fib = d.fiber(b);
    let set = FinSet::new("E_b", fib.iter().map(|&e| d.e().label(e).to_string()).collect())?;
    Ok(SliceObj::new(FinMap::new(set, d.base.clone(), fib.iter().map(|&e| d.s.apply(e)).collect())?))
}

/// Transformations `P_d ⇒ P_e` out of a one-operation diagram, by Yoneda:
/// one per element `⟨c, y⃗⟩` of `P_e(E_b)` of type `t(b)`.
fn yoneda_candidates(d: &PolyDiag, b: usize, e: &PolyDiag) -> Result<Vec<Vec<usize>>> {
    let rep = representable(d, b)?;
    let ev = eval_poly(e, &rep)?;
    Ok((0..ev.len()).filter(|&i| ev.obj.typ(i) == d.t.apply(b)).map(|i| ev.keys[i].clone()).collect())
}

/// Components at every tabulated object of the transformation sending
/// `⟨b, x⃗⟩` to `⟨c, x⃗∘y⃗⟩` for each chosen `(b, [c, y⃗])`.
pub fn yoneda_transformation(src: &TabulatedFunctor, tgt: &TabulatedFunctor, choice: &[Vec<usize>]) -> Result<NatTransData> {
    NatTransData::from_fn(src.clone(), tgt.clone(), |_, s, t| {
        let table = s
            .keys
            .iter()
            .map(|k| {
                let pick = &choice[k[0]];
                let mut key = vec![pick[0]];
                key.extend(pick[1..].iter().map(|&y| k[1 + y]));
                t.require(&key)
            })
            .collect::<Result<Vec<_>>>()?;
        FinMap::new(s.obj.total().clone(), t.obj.total().clone(), table)
    })
}

/// Outcome of the exhaustive search for weakly cartesian but not cartesian
/// transformations between small polynomial functors.
#[derive(Clone, Debug, Serialize)]
pub struct EmbFullReport {
    pub probe_bound: usize,
    pub fixtures: usize,
    pub ordered_pairs: usize,
    pub transformations: u128,
    pub weakly_cartesian: u128,
    pub violations: Vec<String>,
    /// the diagonal `X → X × X` is natural but not weakly cartesian
    pub diagonal_flagged: bool,
    /// the non-analytic functor fails weak pullback preservation
    pub non_analytic_flagged: bool,
}

impl EmbFullReport {
    pub fn holds(&self) -> bool {
        self.violations.is_empty() && self.diagonal_flagged && self.non_analytic_flagged
    }
}

/// Every natural transformation between polynomial functors of fixtures
/// with at most `max_ops` operations of arity at most `max_arity` over bases
/// of size 1 and 2, classified on the family of `probe_bound`.
///
/// A transformation out of a sum of representables is weakly cartesian
/// (cartesian) exactly when each summand is, so each summand is classified
/// once and the transformations are counted as products.
pub fn confirm_emb_full(max_ops: usize, max_arity: usize, probe_bound: usize) -> Result<EmbFullReport> {
    let mut fixtures = 0;
    let mut pairs = 0;
    let mut total: u128 = 0;
    let mut weak: u128 = 0;
    let mut violations = Vec::new();
    for m in 1..=2 {
        let base = FinSet::range("O", m);
        let sigs = small_signatures(&base, max_ops, max_arity);
        let ops = small_signatures(&base, 1, max_arity).into_iter().filter(|s| s.len() == 1).collect::<Vec<_>>();
        fixtures += sigs.len();
        let fam = family(&base, probe_bound);
        let tab = |d: &PolyDiag| TabulatedFunctor::tabulate(&PolyFunctor(d.clone()), fam.clone());
        let op_tabs = ops.iter().map(|o| iota_a(o).and_then(|d| Ok((d.clone(), tab(&d)?)))).collect::<Result<Vec<_>>>()?;
        // (profile of the source operation, target fixture) ↦ (candidates, weakly cartesian, cartesian)
        let classified: Vec<Vec<(usize, usize, usize)>> = sigs
            .par_iter()
            .map(|target| -> Result<Vec<(usize, usize, usize)>> {
                let td = iota_a(target)?;
                let tt = tab(&td)?;
                op_tabs
                    .iter()
                    .map(|(od, ot)| {
                        let cands = yoneda_candidates(od, 0, &td)?;
                        let (mut w, mut c) = (0, 0);
                        for pick in &cands {
                            let nt = yoneda_transformation(ot, &tt, std::slice::from_ref(pick))?;
                            if !nt.is_natural() {
                                return Err(Error::Inconsistent("a Yoneda transformation is not natural".into()));
                            }
                            let wc = nt.is_weakly_cartesian();
                            let ca = nt.is_cartesian();
                            w += usize::from(wc);
                            c += usize::from(wc && ca);
                        }
                        Ok((cands.len(), w, c))
                    })
                    .collect()
            })
            .collect::<Result<Vec<_>>>()?;
        let profile_of = |a: &AmalgSig, i: usize| ops.iter().position(|o| o.op(0).out == a.op(i).out && o.op(0).ins == a.op(i).ins).unwrap();
        for ti in 0..sigs.len() {
            for (pi, op) in ops.iter().enumerate() {
                let (_, w, c) = classified[ti][pi];
                if w != c {
                    violations.push(format!("{:?} ⇒ fixture {ti} over {m} sorts: {} weakly cartesian, {} cartesian", op.op(0), w, c));
                }
            }
            for source in &sigs {
                pairs += 1;
                let mut t: u128 = 1;
                let mut wc: u128 = 1;
                for i in 0..source.len() {
                    let (n, w, _) = classified[ti][profile_of(source, i)];
                    t *= n as u128;
                    wc *= w as u128;
                }
                total += t;
                weak += wc;
            }
        }
    }
    Ok(EmbFullReport {
        probe_bound,
        fixtures,
        ordered_pairs: pairs,
        transformations: total,
        weakly_cartesian: weak,
        violations,
        diagonal_flagged: !diagonal(probe_bound)?.is_weakly_cartesian(),
        non_analytic_flagged: !check_weak_wide_pullback_preservation(&Gumm::new(), 2, probe_bound.max(3), false)?.holds(),
    })
}

/// The diagonal `X → X × X` over one sort, as a Yoneda transformation.
pub fn diagonal(probe_bound: usize) -> Result<NatTransData> {
    let base = FinSet::range("O", 1);
    let id = iota_a(&AmalgSig::from_labels(&base, &[("x", "0", &["0"])])?)?;
    let sq = iota_a(&AmalgSig::from_labels(&base, &[("m", "0", &["0", "0"])])?)?;
    let fam = family(&base, probe_bound);
    let src = TabulatedFunctor::tabulate(&PolyFunctor(id), fam.clone())?;
    let tgt = TabulatedFunctor::tabulate(&PolyFunctor(sq), fam)?;
    yoneda_transformation(&src, &tgt, &[vec![0, 0, 0]])
}

/// Which comparison to transport a monoid along.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Comparison {
    IotaA,
    KSig,
}

/// The monad `X ↦ P_{ι_a M}(X)` with the multiplication of `M`.
pub struct PolyMonad {
    pub diag: PolyDiag,
    monoid: AmalgMonad,
}

impl SliceFunctor for PolyMonad {
    fn domain(&self) -> &FinSet {
        &self.diag.base
    }
    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        PolyFunctor(self.diag.clone()).eval(x)
    }
    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        PolyFunctor(self.diag.clone()).map(f, src, tgt)
    }
}

impl SliceMonad for PolyMonad {
    // keys of P_{ι_a M}(X) are ⟨a, x⃗⟩ along the fibre order, as for M ⋆ X
    fn eta(&self, x: &SliceObj, fx: &Evaluated) -> Result<FinMap> {
        self.monoid.eta(x, fx)
    }
    fn mu(&self, fx: &Evaluated, ffx: &Evaluated) -> Result<FinMap> {
        self.monoid.mu(fx, ffx)
    }
}

/// The symmetric multicategory `K_sig(M)` as a monad on slices.
pub struct SymMonad {
    pub sig: SymSig,
    amalg: AmalgSig,
    monoid: AmalgMonoid,
}

impl SymMonad {
    fn to_amalg(&self, k: &[usize]) -> Vec<usize> {
        let (i, tau) = split_index(k[0], k[1]);
        let mut out = vec![ops_of_arity(&self.amalg, k[0])[i]];
        out.extend(tau.inverse().pull(&k[2..]));
        out
    }

    fn from_amalg(&self, a: usize, xs: &[usize]) -> Vec<usize> {
        let n = self.amalg.arity(a);
        let k = ops_of_arity(&self.amalg, n).iter().position(|&b| b == a).unwrap();
        canonical_key(&self.sig.carrier, n, pair_index(n, k, &Perm::identity(n)), xs)
    }
}

impl SliceFunctor for SymMonad {
    fn domain(&self) -> &FinSet {
        &self.sig.base
    }
    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        AnalyticFunctor(self.sig.clone()).eval(x)
    }
    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        AnalyticFunctor(self.sig.clone()).map(f, src, tgt)
    }
}

impl SliceMonad for SymMonad {
    fn eta(&self, x: &SliceObj, fx: &Evaluated) -> Result<FinMap> {
        let table = (0..x.len()).map(|y| fx.require(&self.from_amalg(self.monoid.unit[x.typ(y)], &[y]))).collect::<Result<Vec<_>>>()?;
        FinMap::new(x.total().clone(), fx.obj.total().clone(), table)
    }
    fn mu(&self, fx: &Evaluated, ffx: &Evaluated) -> Result<FinMap> {
        let table = ffx
            .keys
            .iter()
            .map(|k| {
                let outer = self.to_amalg(k);
                let inner: Vec<Vec<usize>> = outer[1..].iter().map(|&y| self.to_amalg(&fx.keys[y])).collect();
                let bs: Vec<usize> = inner.iter().map(|v| v[0]).collect();
                let cat: Vec<usize> = inner.iter().flat_map(|v| v[1..].to_vec()).collect();
                let (c, s) = self.monoid.compose(outer[0], &bs).ok_or_else(|| Error::Inconsistent("composite outside the monoid".into()))?;
                fx.require(&self.from_amalg(*c, &s.pull(&cat)))
            })
            .collect::<Result<Vec<_>>>()?;
        FinMap::new(ffx.obj.total().clone(), fx.obj.total().clone(), table)
    }
}

/// A monoid transported along a comparison functor.
pub enum Transported {
    Poly(PolyMonad),
    Sym(SymMonad),
}

impl Transported {
    pub fn monad(&self) -> &dyn SliceMonad {
        match self {
            Transported::Poly(p) => p,
            Transported::Sym(s) => s,
        }
    }

    /// Monad laws on the family of `bound`.
    pub fn check(&self, bound: usize) -> Result<Vec<MonoidFailure>> {
        check_slice_monad(self.monad(), &family(self.monad().domain(), bound))
    }
}

/// Transport an amalgamated monoid along `ι_a` or `K_sig`.
pub fn monoid_along_comparison(m: &AmalgMonoid, c: Comparison) -> Result<Transported> {
    Ok(match c {
        Comparison::IotaA => Transported::Poly(PolyMonad { diag: iota_a(&m.carrier)?, monoid: AmalgMonad(m.clone()) }),
        Comparison::KSig => Transported::Sym(SymMonad { sig: k_sig(&m.carrier)?, amalg: m.carrier.clone(), monoid: m.clone() }),
    })
}

/// Elementwise comparison of `A ⋆ X` and `P_{ι_a A}(X)`: same keys, same types.
pub fn iota_a_agrees(a: &AmalgSig, x: &SliceObj) -> Result<bool> {
    let (l, r) = (AmalgFunctor(a.clone()).eval(x)?, eval_poly(&iota_a(a)?, x)?);
    let kl: HashMap<&Vec<usize>, usize> = l.keys.iter().zip(l.obj.d.table().iter().copied()).collect();
    Ok(l.len() == r.len() && r.keys.iter().zip(r.obj.d.table()).all(|(k, t)| kl.get(k) == Some(t)))
}

/// All fibre morphisms `d → e`.
pub fn fibre_morphisms(d: &PolyDiag, e: &PolyDiag) -> Vec<PolyDiagMor> {
    hom_poly_over(d, e, &FinMap::identity(&d.base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::{hom_amalg, OrbitSpec};

    fn one() -> FinSet {
        FinSet::range("O", 1)
    }

    fn binary() -> AmalgSig {
        AmalgSig::from_labels(&one(), &[("m", "0", &["0", "0"])]).unwrap()
    }

    fn mixed() -> AmalgSig {
        let o = FinSet::range("O", 2);
        AmalgSig::from_labels(&o, &[("m", "0", &["0", "1"]), ("c", "1", &[]), ("u", "1", &["0"])]).unwrap()
    }

    #[test]
    fn k_sig_shapes() {
        let unary = AmalgSig::from_labels(&one(), &[("f", "0", &["0"]), ("g", "0", &["0"])]).unwrap();
        assert_eq!(k_sig(&unary).unwrap().len(), 2);
        let ks = k_sig(&binary()).unwrap();
        assert_eq!(ks.len(), 2);
        assert_eq!(ks.carrier.orbit_reps().len(), 1);
        assert!(k_sig(&mixed()).unwrap().carrier.is_free());
    }

    #[test]
    fn k_sig_is_fully_faithful_onto_free() {
        let a = mixed();
        for u in [FinMap::identity(&a.base)] {
            let r = k_sig_on_homs(&a, &a, &u).unwrap();
            assert!(r.faithful && r.full, "{r:?}");
            assert_eq!(r.amalgamated, r.symmetric);
        }
        let (back, iso) = amalg_of_free(&k_sig(&a).unwrap()).unwrap();
        assert!(iso.is_iso());
        assert_eq!(back.len(), a.len());
        let fixed = SymSig::from_orbits(&one(), &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![Perm::adjacent(2, 0)] }]).unwrap();
        assert!(amalg_of_free(&fixed).is_none());
    }

    #[test]
    fn iota_a_shapes_and_round_trip() {
        let d = iota_a(&binary()).unwrap();
        assert_eq!((d.e().len(), d.b().len()), (2, 1));
        let u = iota_a(&AmalgSig::unit(&one())).unwrap();
        assert!(u.is_linear());
        let a = mixed();
        assert_eq!(amalg_of_poly(&iota_a(&a).unwrap()).unwrap().ops(), a.ops());
        let rt = poly_round_trip(&iota_a(&a).unwrap()).unwrap();
        assert!(rt.f.is_bijective() && rt.g.is_bijective());
        for m in hom_amalg(&a, &a, false) {
            let back = amalg_mor_of_poly(&iota_a_mor(&m).unwrap()).unwrap();
            assert_eq!((back.f, back.sigma), (m.f.clone(), m.sigma.clone()));
        }
    }

    #[test]
    fn iota_s_evaluations() {
        let x = SliceObj::with_fiber_sizes(&one(), &[3]);
        let fixed = SymSig::from_orbits(&one(), &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![Perm::adjacent(2, 0)] }]).unwrap();
        let free = SymSig::from_orbits(&one(), &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] }]).unwrap();
        for (s, n) in [(fixed, 6), (free, 9)] {
            assert_eq!(eval_andiag(&iota_s(&s).unwrap(), &x).unwrap().len(), n);
            assert_eq!(eval_analytic(&s, &x).unwrap().len(), n);
        }
        let nullary = SymSig::from_orbits(&one(), &[OrbitSpec { name: "c".into(), out: 0, ins: vec![], stabilizer: vec![] }]).unwrap();
        let empty = SliceObj::with_fiber_sizes(&one(), &[0]);
        assert_eq!(eval_andiag(&iota_s(&nullary).unwrap(), &empty).unwrap().len(), 1);
    }

    #[test]
    fn andiag_pipeline_matches_keys() {
        let s = k_sig(&mixed()).unwrap();
        let d = iota_s(&s).unwrap();
        for x in family(&s.base, 3) {
            let (l, r) = (eval_andiag(&d, &x).unwrap(), eval_analytic(&s, &x).unwrap());
            let mut lk: Vec<_> = l.keys.iter().cloned().zip(l.obj.d.table().iter().copied()).collect();
            let mut rk: Vec<_> = r.keys.iter().cloned().zip(r.obj.d.table().iter().copied()).collect();
            lk.sort();
            rk.sort();
            assert_eq!(lk, rk);
        }
    }

    #[test]
    fn k_diag_shapes() {
        let lin = iota_a(&AmalgSig::from_labels(&one(), &[("f", "0", &["0"])]).unwrap()).unwrap();
        let kd = k_diag(&lin).unwrap();
        assert_eq!(kd.carrier.len(), 1);
        let kb = k_diag(&iota_a(&binary()).unwrap()).unwrap();
        assert_eq!(kb.carrier.grade_len(2), 2);
        assert!(kb.carrier.is_free());
    }

    #[test]
    fn phi_and_psi() {
        let a = mixed();
        assert!(phi_component(&a).unwrap().f.is_bijective());
        for m in hom_amalg(&a, &a, false).iter().take(10) {
            assert!(phi_natural(m).unwrap());
        }
        let d = iota_a(&a).unwrap();
        let p = psi(&d, 2).unwrap();
        assert!(p.is_natural());
        assert!(p.components.iter().all(FinMap::is_bijective));
        let x = SliceObj::with_fiber_sizes(&a.base, &[1, 2]);
        for m in fibre_morphisms(&d, &d) {
            assert!(psi_natural_in_diagram(&m, &x).unwrap());
        }
    }

    #[test]
    fn six_paths_agree() {
        let a = mixed();
        for x in family(&a.base, 3) {
            let r = six_paths(&a, &x).unwrap();
            assert!(r.iter().all(|p| p.agrees), "{r:?}");
        }
    }

    #[test]
    fn emb_full_small() {
        let r = confirm_emb_full(1, 2, 2).unwrap();
        assert!(r.holds(), "{r:?}");
        assert!(r.weakly_cartesian < r.transformations);
        // a whole transformation agrees with its summands
        let base = one();
        let a = AmalgSig::from_labels(&base, &[("m", "0", &["0", "0"]), ("f", "0", &["0"])]).unwrap();
        let d = iota_a(&a).unwrap();
        let fam = family(&base, 2);
        let t = TabulatedFunctor::tabulate(&PolyFunctor(d.clone()), fam).unwrap();
        let swap = yoneda_transformation(&t, &t, &[vec![0, 1, 0], vec![1, 0]]).unwrap();
        assert!(swap.is_cartesian());
        let dup = yoneda_transformation(&t, &t, &[vec![0, 1, 0], vec![0, 0, 0]]).unwrap();
        assert!(dup.is_natural() && !dup.is_weakly_cartesian());
    }

    #[test]
    fn transported_monoids() {
        use crate::monoids::chain_category;
        let base = one();
        let unit = AmalgMonoid::from_fn(AmalgSig::unit(&base), None, true, |a, _| Some((a, Perm::identity(1))), vec![0]).unwrap();
        for c in [Comparison::IotaA, Comparison::KSig] {
            assert!(monoid_along_comparison(&unit, c).unwrap().check(2).unwrap().is_empty());
        }
        let cat = chain_category();
        let g = &cat.graph;
        let ops = (0..g.len()).map(|a| Op { name: g.carrier.label(a).to_string(), out: g.gamma[a], ins: vec![g.delta[a]] }).collect();
        let sig = AmalgSig::new(g.base.clone(), ops).unwrap();
        let m = AmalgMonoid::from_fn(sig, None, true, |a, bs| cat.compose(a, &bs[0]).map(|c| (c, Perm::identity(1))), cat.unit.clone()).unwrap();
        for c in [Comparison::IotaA, Comparison::KSig] {
            assert!(monoid_along_comparison(&m, c).unwrap().check(2).unwrap().is_empty());
        }
        // a corrupted entry is caught after transport
        let mut bad = m.clone();
        let k = bad.mult.iter().position(|e| e.as_ref().is_some_and(|(c, _)| g.carrier.label(*c) == "h")).unwrap();
        bad.mult[k] = Some((g.carrier.index_of("id_z").unwrap(), Perm::identity(1)));
        for c in [Comparison::IotaA, Comparison::KSig] {
            assert!(!monoid_along_comparison(&bad, c).unwrap().check(2).unwrap().is_empty());
        }
    }
}
