//! Represented endofunctors on finite slices: polynomial, analytic,
//! amalgamated and T-graph evaluation, tabulation, natural transformations
//! and the weak-pullback checkers.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;

use crate::diagrams::PolyDiag;
use crate::error::{structural, Error, Result};
use crate::finset::{product_indices, pullback, tuple_label, FinMap, FinSet, SliceMap, SliceObj, Square};
use crate::monad::Monad;
use crate::perm::Perm;
use crate::signatures::{AmalgSig, AmalgSigMor, SymSig, SymSigMor};
use crate::tgraph::TGraph;

/// `F(X)` with a structural key per element.
#[derive(Clone, Debug)]
pub struct Evaluated {
    pub obj: SliceObj,
    pub keys: Vec<Vec<usize>>,
    index: HashMap<Vec<usize>, usize>,
    /// the evaluation this one was pulled back from, if any
    pub inner: Option<Box<Evaluated>>,
}

impl Evaluated {
    pub fn new(base: &FinSet, id: &str, items: Vec<(Vec<usize>, usize, String)>) -> Result<Evaluated> {
        let mut keys = Vec::with_capacity(items.len());
        let mut labels = Vec::with_capacity(items.len());
        let mut table = Vec::with_capacity(items.len());
        for (k, t, l) in items {
            keys.push(k);
            table.push(t);
            labels.push(l);
        }
        let set = FinSet::new(id, labels)?;
        let index = keys.iter().enumerate().map(|(i, k)| (k.clone(), i)).collect();
        Ok(Evaluated { obj: SliceObj::new(FinMap::new(set, base.clone(), table)?), keys, index, inner: None })
    }

    pub fn find(&self, key: &[usize]) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn require(&self, key: &[usize]) -> Result<usize> {
        self.find(key).ok_or_else(|| Error::Inconsistent(format!("no element with key {key:?}")))
    }

    pub fn len(&self) -> usize {
        self.keys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.keys.is_empty()
    }
}

/// A functor between slices of finite sets, evaluated on demand.
pub trait SliceFunctor: Send + Sync {
    /// Base of the input slices.
    fn domain(&self) -> &FinSet;
    fn eval(&self, x: &SliceObj) -> Result<Evaluated>;
    /// `F(f)` between evaluations of the endpoints of `f`.
    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap>;
}

fn map_keys(src: &Evaluated, tgt: &Evaluated, g: impl Fn(&[usize]) -> Vec<usize>) -> Result<FinMap> {
    let table = src.keys.iter().map(|k| tgt.require(&g(k))).collect::<Result<Vec<_>>>()?;
    FinMap::new(src.obj.total().clone(), tgt.obj.total().clone(), table)
}

fn check_base(x: &SliceObj, base: &FinSet) -> Result<()> {
    if x.base() != base {
        return structural(format!("slice over {} evaluated by a functor over {}", x.base().id(), base.id()));
    }
    Ok(())
}

/// Tuples `x⃗` over a profile: `d(x_i) = profile[i]`.
fn tuples_over(x: &SliceObj, profile: &[usize]) -> Vec<Vec<usize>> {
    let over = x.d.fibers();
    let choices: Vec<&Vec<usize>> = profile.iter().map(|&o| &over[o]).collect();
    product_indices(&choices.iter().map(|c| c.len()).collect::<Vec<_>>())
        .map(|pick| pick.iter().enumerate().map(|(i, &k)| choices[i][k]).collect())
        .collect()
}

fn show_tuple(x: &SliceObj, xs: &[usize]) -> String {
    xs.iter().map(|&i| x.total().label(i)).collect::<Vec<_>>().join(",")
}

/// `t_! p_* s^*`: elements `⟨b, y⃗⟩` with `y⃗: p⁻¹(b) → X` over `s`.
#[derive(Clone, Debug)]
pub struct PolyFunctor(pub PolyDiag);

impl SliceFunctor for PolyFunctor {
    fn domain(&self) -> &FinSet {
        &self.0.base
    }

    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        check_base(x, &self.0.base)?;
        let d = &self.0;
        let mut items = Vec::new();
        for b in 0..d.b().len() {
            let prof: Vec<usize> = d.fiber(b).iter().map(|&e| d.s.apply(e)).collect();
            for ys in tuples_over(x, &prof) {
                let label = format!("<{}|{}>", d.b().label(b), show_tuple(x, &ys));
                let mut key = vec![b];
                key.extend(ys);
                items.push((key, d.t.apply(b), label));
            }
        }
        Evaluated::new(&d.base, "P(X)", items)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        map_keys(src, tgt, |k| {
            let mut out = vec![k[0]];
            out.extend(k[1..].iter().map(|&y| f.map.apply(y)));
            out
        })
    }
}

pub fn eval_poly(d: &PolyDiag, x: &SliceObj) -> Result<Evaluated> {
    PolyFunctor(d.clone()).eval(x)
}

/// `A ⋆ X` for amalgamated signatures: `⟨a, x⃗⟩` with `d∘x⃗ = ∂_a⁺`.
#[derive(Clone, Debug)]
pub struct AmalgFunctor(pub AmalgSig);

impl SliceFunctor for AmalgFunctor {
    fn domain(&self) -> &FinSet {
        &self.0.base
    }

    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        check_base(x, &self.0.base)?;
        let mut items = Vec::new();
        for (a, op) in self.0.ops().iter().enumerate() {
            for xs in tuples_over(x, &op.ins) {
                let label = format!("<{}|{}>", op.name, show_tuple(x, &xs));
                let mut key = vec![a];
                key.extend(xs);
                items.push((key, op.out, label));
            }
        }
        Evaluated::new(&self.0.base, "A*X", items)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        map_keys(src, tgt, |k| {
            let mut out = vec![k[0]];
            out.extend(k[1..].iter().map(|&y| f.map.apply(y)));
            out
        })
    }
}

pub fn eval_amalg(a: &AmalgSig, x: &SliceObj) -> Result<Evaluated> {
    AmalgFunctor(a.clone()).eval(x)
}

/// Analytic evaluation: classes of `(a, x⃗)` under `(a, x⃗) ∼ (a·σ, x⃗∘σ)`.
/// Keys are `[n, a, x⃗]`, the least member of the class.
#[derive(Clone, Debug)]
pub struct AnalyticFunctor(pub SymSig);

impl AnalyticFunctor {
    pub fn canonical(&self, n: usize, a: usize, xs: &[usize]) -> Vec<usize> {
        let mut best: Option<Vec<usize>> = None;
        for s in Perm::all(n) {
            let mut k = vec![n, self.0.carrier.act(n, a, &s)];
            k.extend(s.pull(xs));
            if best.as_ref().is_none_or(|b| k < *b) {
                best = Some(k);
            }
        }
        best.unwrap_or_else(|| vec![n, a])
    }
}

impl SliceFunctor for AnalyticFunctor {
    fn domain(&self) -> &FinSet {
        &self.0.base
    }

    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        check_base(x, &self.0.base)?;
        let a = &self.0;
        let mut keys = BTreeSet::new();
        for (n, e) in a.carrier.elements() {
            for xs in tuples_over(x, a.ins(n, e)) {
                keys.insert(self.canonical(n, e, &xs));
            }
        }
        let items = keys
            .into_iter()
            .map(|k| {
                let (n, e) = (k[0], k[1]);
                let label = format!("[{}|{}]", a.label(n, e), show_tuple(x, &k[2..]));
                (k, a.out(n, e), label)
            })
            .collect();
        Evaluated::new(&a.base, "A(X)", items)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        map_keys(src, tgt, |k| {
            let xs: Vec<usize> = k[2..].iter().map(|&y| f.map.apply(y)).collect();
            self.canonical(k[0], k[1], &xs)
        })
    }
}

pub fn eval_analytic(a: &SymSig, x: &SliceObj) -> Result<Evaluated> {
    AnalyticFunctor(a.clone()).eval(x)
}

/// `A ⋆ X` for a T-graph: pullback of `δ` against `T(d)`.
#[derive(Clone, Debug)]
pub struct TGraphFunctor<M: Monad>(pub TGraph<M>);

impl<M: Monad> SliceFunctor for TGraphFunctor<M> {
    fn domain(&self) -> &FinSet {
        &self.0.base
    }

    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        let (obj, pairs) = crate::tgraph::act(&self.0, x)?;
        let m = &self.0.monad;
        let items = pairs
            .iter()
            .enumerate()
            .map(|(i, (a, w))| {
                let mut key = vec![*a];
                key.extend(m.leaves(w));
                (key, obj.typ(i), obj.total().label(i).to_string())
            })
            .collect();
        Evaluated::new(&self.0.base, "A*X", items)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        map_keys(src, tgt, |k| {
            let mut out = vec![k[0]];
            out.extend(k[1..].iter().map(|&y| f.map.apply(y)));
            out
        })
    }
}

pub fn eval_tgraph<M: Monad>(g: &TGraph<M>, x: &SliceObj) -> Result<Evaluated> {
    TGraphFunctor(g.clone()).eval(x)
}

/// `Y ↦ F(u^*Y)`.
pub struct PullThen<F> {
    pub u: FinMap,
    pub inner: F,
}

/// `u^*f: u^*X → u^*Y`, `(o, x) ↦ (o, f(x))`.
pub fn pull_map(u: &FinMap, f: &SliceMap) -> Result<SliceMap> {
    let px = f.src.pull(u)?;
    let py = f.tgt.pull(u)?;
    let (_, _, rx) = pullback(u, &f.src.d)?;
    let (_, _, ry) = pullback(u, &f.tgt.d)?;
    let index: HashMap<(usize, usize), usize> = (0..py.len()).map(|i| ((py.typ(i), ry.apply(i)), i)).collect();
    let table = (0..px.len()).map(|i| index[&(px.typ(i), f.map.apply(rx.apply(i)))]).collect();
    SliceMap::new(px.clone(), py.clone(), FinMap::new(px.total().clone(), py.total().clone(), table)?)
}

impl<F: SliceFunctor> SliceFunctor for PullThen<F> {
    fn domain(&self) -> &FinSet {
        self.u.cod()
    }

    fn eval(&self, y: &SliceObj) -> Result<Evaluated> {
        self.inner.eval(&y.pull(&self.u)?)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        self.inner.map(&pull_map(&self.u, f)?, src, tgt)
    }
}

/// `Y ↦ u^*(G(Y))`; keys are `[o, g]` with `g` an element of `G(Y)`.
pub struct ThenPull<G> {
    pub u: FinMap,
    pub inner: G,
}

impl<G: SliceFunctor> SliceFunctor for ThenPull<G> {
    fn domain(&self) -> &FinSet {
        self.inner.domain()
    }

    fn eval(&self, y: &SliceObj) -> Result<Evaluated> {
        let gy = self.inner.eval(y)?;
        let fib = gy.obj.d.fibers();
        let mut items = Vec::new();
        for o in 0..self.u.dom().len() {
            for &g in &fib[self.u.apply(o)] {
                items.push((vec![o, g], o, tuple_label(&[self.u.dom().label(o), gy.obj.total().label(g)])));
            }
        }
        let mut ev = Evaluated::new(self.u.dom(), "u*G(Y)", items)?;
        ev.inner = Some(Box::new(gy));
        Ok(ev)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        let (Some(si), Some(ti)) = (&src.inner, &tgt.inner) else {
            return Err(Error::Inconsistent("pulled-back evaluation without its source".into()));
        };
        let gm = self.inner.map(f, si, ti)?;
        map_keys(src, tgt, |k| vec![k[0], gm.apply(k[1])])
    }
}

/// Every slice object with at most `bound` elements, one per iso class.
pub fn family(base: &FinSet, bound: usize) -> Vec<SliceObj> {
    let m = base.len();
    let mut out = Vec::new();
    for total in 0..=bound {
        for counts in product_indices(&vec![total + 1; m]) {
            if counts.iter().sum::<usize>() == total {
                out.push(SliceObj::with_fiber_sizes(base, &counts));
            }
        }
    }
    if m == 0 {
        out.push(SliceObj::with_fiber_sizes(base, &[]));
    }
    out
}

/// One tabulated map `F(f)` for `f: objects[src] → objects[tgt]`.
#[derive(Clone, Debug)]
pub struct TabMap {
    pub src: usize,
    pub tgt: usize,
    pub f: SliceMap,
    pub image: FinMap,
}

/// A functor tabulated on a family of slice objects closed under all maps
/// between them.
#[derive(Clone, Debug)]
pub struct TabulatedFunctor {
    pub base: FinSet,
    pub objects: Vec<SliceObj>,
    pub values: Vec<Evaluated>,
    pub maps: Vec<TabMap>,
    map_index: HashMap<(usize, usize, Vec<usize>), usize>,
}

impl TabulatedFunctor {
    pub fn tabulate(f: &dyn SliceFunctor, objects: Vec<SliceObj>) -> Result<TabulatedFunctor> {
        let values = objects.par_iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
        let pairs: Vec<(usize, usize)> = (0..objects.len()).flat_map(|i| (0..objects.len()).map(move |j| (i, j))).collect();
        let maps: Vec<TabMap> = pairs
            .par_iter()
            .map(|&(i, j)| {
                SliceMap::all(&objects[i], &objects[j])
                    .into_iter()
                    .map(|sm| Ok(TabMap { src: i, tgt: j, image: f.map(&sm, &values[i], &values[j])?, f: sm }))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .flatten()
            .collect();
        let map_index = maps.iter().enumerate().map(|(k, m)| ((m.src, m.tgt, m.f.map.table().to_vec()), k)).collect();
        Ok(TabulatedFunctor { base: f.domain().clone(), objects, values, maps, map_index })
    }

    pub fn at_bound(f: &dyn SliceFunctor, bound: usize) -> Result<TabulatedFunctor> {
        TabulatedFunctor::tabulate(f, family(f.domain(), bound))
    }

    /// `F(h)` for `h: objects[i] → objects[j]` given by its table.
    pub fn apply(&self, i: usize, j: usize, table: &[usize]) -> Option<&FinMap> {
        self.map_index.get(&(i, j, table.to_vec())).map(|&k| &self.maps[k].image)
    }

    /// Family member isomorphic to `x`, with an iso `x → member`.
    pub fn canonical(&self, x: &SliceObj) -> Option<(usize, FinMap)> {
        let counts: Vec<usize> = x.d.fibers().iter().map(Vec::len).collect();
        let i = self.objects.iter().position(|o| o.d.fibers().iter().map(Vec::len).collect::<Vec<_>>() == counts)?;
        let target = &self.objects[i];
        let tf = target.d.fibers();
        let mut seen = vec![0; counts.len()];
        let table = (0..x.len())
            .map(|e| {
                let o = x.typ(e);
                seen[o] += 1;
                tf[o][seen[o] - 1]
            })
            .collect();
        Some((i, FinMap::new(x.total().clone(), target.total().clone(), table).ok()?))
    }

    /// Functoriality on the table.
    pub fn functoriality_failures(&self) -> Vec<String> {
        let mut bad = Vec::new();
        for m in &self.maps {
            if m.src == m.tgt && m.f.map.table().iter().enumerate().all(|(i, &j)| i == j) && !m.image.table().iter().enumerate().all(|(i, &j)| i == j) {
                bad.push(format!("F(1) ≠ 1 at object {}", m.src));
            }
        }
        for g in &self.maps {
            for h in self.maps.iter().filter(|h| h.src == g.tgt) {
                let comp: Vec<usize> = g.f.map.table().iter().map(|&x| h.f.map.apply(x)).collect();
                let Some(fc) = self.apply(g.src, h.tgt, &comp) else { continue };
                if fc.table().iter().enumerate().any(|(x, &y)| h.image.apply(g.image.apply(x)) != y) {
                    bad.push(format!("F(hg) ≠ F(h)F(g) for maps {}→{}→{}", g.src, g.tgt, h.tgt));
                }
            }
        }
        bad
    }

    /// Cospans `X → Z ← Y` in the table whose pullback is (up to iso) in
    /// the table, and whose image square fails to be a weak pullback (or a
    /// pullback, when `strict`).
    pub fn pullback_failures(&self, strict: bool, limit: usize) -> Vec<WideCounterexample> {
        let mut found = Vec::new();
        for (zi, _) in self.objects.iter().enumerate() {
            let into_z: Vec<&TabMap> = self.maps.iter().filter(|m| m.tgt == zi).collect();
            for (k1, f) in into_z.iter().enumerate() {
                for g in &into_z[k1..] {
                    if let Some(cx) = self.square_failure(f, g, strict) {
                        found.push(cx);
                        if found.len() >= limit {
                            return found;
                        }
                    }
                }
            }
        }
        found
    }

    fn square_failure(&self, f: &TabMap, g: &TabMap, strict: bool) -> Option<WideCounterexample> {
        let (p, l, r) = pullback(&f.f.map, &g.f.map).ok()?;
        let _ = p;
        let pobj = SliceObj::new(self.objects[f.src].d.after(&l).ok()?);
        let (pi, iso) = self.canonical(&pobj)?;
        let inv = iso.inverse().ok()?;
        let lt: Vec<usize> = inv.table().iter().map(|&x| l.apply(x)).collect();
        let rt: Vec<usize> = inv.table().iter().map(|&x| r.apply(x)).collect();
        let fl = self.apply(pi, f.src, &lt)?;
        let fr = self.apply(pi, g.src, &rt)?;
        let sq = Square::new(fl.clone(), fr.clone(), f.image.clone(), g.image.clone()).ok()?;
        let ok = if strict { sq.is_pullback() } else { sq.is_weak_pullback() };
        if ok {
            return None;
        }
        Some(WideCounterexample {
            legs: vec![f.f.map.table().to_vec(), g.f.map.table().to_vec()],
            sources: vec![self.objects[f.src].total().elems().to_vec(), self.objects[g.src].total().elems().to_vec()],
            apex: self.objects[f.tgt].total().elems().to_vec(),
            missing: sq.weak_pullback_failures().first().map(|&(x, y)| {
                vec![self.values[f.src].obj.total().label(x).to_string(), self.values[g.src].obj.total().label(y).to_string()]
            }),
        })
    }
}

/// A cospan whose image under the functor is not a weak (wide) limit.
#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct WideCounterexample {
    pub legs: Vec<Vec<usize>>,
    pub sources: Vec<Vec<String>>,
    pub apex: Vec<String>,
    /// a compatible family of images with no common preimage
    pub missing: Option<Vec<String>>,
}

#[derive(Clone, Debug, Serialize, PartialEq, Eq)]
pub struct WideReport {
    pub legs: usize,
    pub bound: usize,
    pub strict: bool,
    pub cospans_checked: usize,
    pub counterexample: Option<WideCounterexample>,
}

impl WideReport {
    pub fn holds(&self) -> bool {
        self.counterexample.is_none()
    }
}

/// Wide pullback `{(x_1..x_k) : f_i(x_i) agree}` over `z`.
fn wide_pullback(z: &SliceObj, legs: &[&SliceMap]) -> (SliceObj, Vec<SliceMap>) {
    let mut tuples = Vec::new();
    for zi in 0..z.len() {
        let fibs: Vec<Vec<usize>> = legs.iter().map(|f| f.map.fiber(zi)).collect();
        for pick in product_indices(&fibs.iter().map(Vec::len).collect::<Vec<_>>()) {
            tuples.push((zi, pick.iter().enumerate().map(|(i, &k)| fibs[i][k]).collect::<Vec<_>>()));
        }
    }
    let labels = tuples
        .iter()
        .map(|(_, xs)| tuple_label(&xs.iter().enumerate().map(|(i, &x)| legs[i].src.total().label(x)).collect::<Vec<_>>()))
        .collect();
    let set = FinSet::fresh("P", labels);
    let d = FinMap::new(set.clone(), z.base().clone(), tuples.iter().map(|(zi, _)| z.typ(*zi)).collect()).unwrap();
    let p = SliceObj::new(d);
    let projs = legs
        .iter()
        .enumerate()
        .map(|(i, f)| {
            let m = FinMap::new(set.clone(), f.src.total().clone(), tuples.iter().map(|(_, xs)| xs[i]).collect()).unwrap();
            SliceMap::new(p.clone(), f.src.clone(), m).unwrap()
        })
        .collect();
    (p, projs)
}

/// For every cospan of `legs` maps into a common object, all objects with
/// at most `bound` elements, check that `F` sends the wide pullback to a
/// weak wide pullback (a wide pullback, when `strict`).
pub fn check_weak_wide_pullback_preservation(f: &dyn SliceFunctor, legs: usize, bound: usize, strict: bool) -> Result<WideReport> {
    if legs < 2 {
        return structural("a wide pullback needs at least two legs");
    }
    let objs = family(f.domain(), bound);
    let values = objs.par_iter().map(|x| f.eval(x)).collect::<Result<Vec<_>>>()?;
    let mut all_maps: Vec<(usize, usize, SliceMap)> = Vec::new();
    for (i, x) in objs.iter().enumerate() {
        for (j, z) in objs.iter().enumerate() {
            for m in SliceMap::all(x, z) {
                all_maps.push((i, j, m));
            }
        }
    }
    let mut cospans: Vec<Vec<usize>> = Vec::new();
    for zi in 0..objs.len() {
        let into: Vec<usize> = (0..all_maps.len()).filter(|&k| all_maps[k].1 == zi).collect();
        // non-decreasing leg choices: the wide pullback is symmetric in its legs
        let mut stack: Vec<Vec<usize>> = into.iter().map(|&k| vec![k]).collect();
        while let Some(c) = stack.pop() {
            if c.len() == legs {
                cospans.push(c);
                continue;
            }
            let last = *c.last().unwrap();
            for &k in into.iter().filter(|&&k| k >= last) {
                let mut n = c.clone();
                n.push(k);
                stack.push(n);
            }
        }
    }
    cospans.sort();
    let checked = cospans.len();
    let failure = cospans
        .par_iter()
        .map(|c| -> Result<Option<WideCounterexample>> {
            let zi = all_maps[c[0]].1;
            let legs_m: Vec<&SliceMap> = c.iter().map(|&k| &all_maps[k].2).collect();
            let (p, projs) = wide_pullback(&objs[zi], &legs_m);
            let fp = f.eval(&p)?;
            let fz = &values[zi];
            let fx: Vec<&Evaluated> = c.iter().map(|&k| &values[all_maps[k].0]).collect();
            let fl: Vec<FinMap> = c.iter().map(|&k| f.map(&all_maps[k].2, &values[all_maps[k].0], fz)).collect::<Result<_>>()?;
            let fproj: Vec<FinMap> = projs.iter().enumerate().map(|(i, pr)| f.map(pr, &fp, fx[i])).collect::<Result<_>>()?;
            // compatible families in the image and how often each is hit
            let mut hit: HashMap<Vec<usize>, usize> = HashMap::new();
            for e in 0..fp.len() {
                *hit.entry(fproj.iter().map(|m| m.apply(e)).collect()).or_insert(0) += 1;
            }
            let mut missing = None;
            for zv in 0..fz.len() {
                let fibs: Vec<Vec<usize>> = fl.iter().map(|m| m.fiber(zv)).collect();
                for pick in product_indices(&fibs.iter().map(Vec::len).collect::<Vec<_>>()) {
                    let fam: Vec<usize> = pick.iter().enumerate().map(|(i, &k)| fibs[i][k]).collect();
                    let n = hit.get(&fam).copied().unwrap_or(0);
                    if n == 0 || (strict && n > 1) {
                        missing = Some(fam.iter().enumerate().map(|(i, &x)| fx[i].obj.total().label(x).to_string()).collect());
                        break;
                    }
                }
                if missing.is_some() {
                    break;
                }
            }
            Ok(missing.map(|m| WideCounterexample {
                legs: c.iter().map(|&k| all_maps[k].2.map.table().to_vec()).collect(),
                sources: c.iter().map(|&k| objs[all_maps[k].0].total().elems().to_vec()).collect(),
                apex: objs[zi].total().elems().to_vec(),
                missing: Some(m),
            }))
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .next();
    Ok(WideReport { legs, bound, strict, cospans_checked: checked, counterexample: failure })
}

/// `X ↦ {(x, y, z) : |{x, y, z}| ≤ 2}` on a single sort: a functor that
/// does not weakly preserve pullbacks.
#[derive(Clone, Debug)]
pub struct Gumm {
    pub base: FinSet,
}

impl Gumm {
    pub fn new() -> Gumm {
        Gumm { base: FinSet::from_strs("O", &["*"]).unwrap() }
    }
}

impl Default for Gumm {
    fn default() -> Self {
        Gumm::new()
    }
}

impl SliceFunctor for Gumm {
    fn domain(&self) -> &FinSet {
        &self.base
    }

    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        check_base(x, &self.base)?;
        let n = x.len();
        let mut items = Vec::new();
        for t in crate::finset::all_functions(3, n) {
            let distinct: BTreeSet<usize> = t.iter().copied().collect();
            if distinct.len() <= 2 {
                let label = format!("({})", show_tuple(x, &t));
                items.push((t, 0, label));
            }
        }
        Evaluated::new(&self.base, "G(X)", items)
    }

    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        map_keys(src, tgt, |k| k.iter().map(|&x| f.map.apply(x)).collect())
    }
}

/// Components of a transformation between two functors tabulated on the
/// same family.
#[derive(Clone, Debug)]
pub struct NatTransData {
    pub src: TabulatedFunctor,
    pub tgt: TabulatedFunctor,
    pub components: Vec<FinMap>,
}

impl NatTransData {
    pub fn new(src: TabulatedFunctor, tgt: TabulatedFunctor, components: Vec<FinMap>) -> Result<NatTransData> {
        if src.objects != tgt.objects || components.len() != src.objects.len() {
            return structural("transformation between functors tabulated on different families");
        }
        for (i, c) in components.iter().enumerate() {
            if c.dom() != src.values[i].obj.total() || c.cod() != tgt.values[i].obj.total() {
                return structural(format!("component {i} has the wrong endpoints"));
            }
        }
        Ok(NatTransData { src, tgt, components })
    }

    /// From a componentwise formula.
    pub fn from_fn(src: TabulatedFunctor, tgt: TabulatedFunctor, comp: impl Fn(usize, &Evaluated, &Evaluated) -> Result<FinMap> + Sync) -> Result<NatTransData> {
        let components = (0..src.objects.len()).into_par_iter().map(|i| comp(i, &src.values[i], &tgt.values[i])).collect::<Result<Vec<_>>>()?;
        NatTransData::new(src, tgt, components)
    }

    fn squares(&self) -> impl Iterator<Item = (usize, Square)> + '_ {
        self.src.maps.iter().enumerate().map(move |(k, m)| {
            let g = &self.tgt.maps[k];
            let sq = Square::new(self.components[m.src].clone(), m.image.clone(), g.image.clone(), self.components[m.tgt].clone());
            (k, sq.expect("naturality square commutes"))
        })
    }

    /// Maps of the family along which the naturality square does not commute.
    pub fn naturality_failures(&self) -> Vec<usize> {
        self.src
            .maps
            .iter()
            .enumerate()
            .filter(|(k, m)| {
                let g = &self.tgt.maps[*k];
                (0..m.image.dom().len()).any(|x| self.components[m.tgt].apply(m.image.apply(x)) != g.image.apply(self.components[m.src].apply(x)))
            })
            .map(|(k, _)| k)
            .collect()
    }

    pub fn is_natural(&self) -> bool {
        self.naturality_failures().is_empty()
    }

    /// Every naturality square is a weak pullback.
    pub fn is_weakly_cartesian(&self) -> bool {
        self.is_natural() && self.squares().all(|(_, s)| s.is_weak_pullback())
    }

    pub fn is_cartesian(&self) -> bool {
        self.is_natural() && self.squares().all(|(_, s)| s.is_pullback())
    }

    /// First map whose square is not a weak pullback (resp. pullback).
    pub fn first_non_cartesian(&self, strict: bool) -> Option<usize> {
        self.squares().find(|(_, s)| if strict { !s.is_pullback() } else { !s.is_weak_pullback() }).map(|(k, _)| k)
    }

    pub fn same_components(&self, other: &NatTransData) -> bool {
        self.components == other.components
    }
}

/// `rep_s(f, u)` at `Y`: `[a, x⃗] ↦ ⟨∂_a(0), [f(a), π₂∘x⃗]⟩` from
/// `A(u^*Y)` to `u^*(B(Y))`.
pub fn rep_sym_component(m: &SymSigMor, src: &Evaluated, tgt: &Evaluated, y: &SliceObj) -> Result<FinMap> {
    let (_, _, r) = pullback(&m.u, &y.d)?;
    let inner = tgt.inner.as_ref().ok_or_else(|| Error::Inconsistent("target is not a pulled-back evaluation".into()))?;
    let b = AnalyticFunctor(m.cod.clone());
    map_keys(src, tgt, |k| {
        let (n, a) = (k[0], k[1]);
        let xs: Vec<usize> = k[2..].iter().map(|&x| r.apply(x)).collect();
        let g = inner.find(&b.canonical(n, m.f.apply(n, a), &xs)).unwrap_or(usize::MAX);
        vec![m.dom.out(n, a), g]
    })
}

/// `rep_a(f, σ, u)`: `⟨a, x⃗⟩ ↦ ⟨∂_a(0), ⟨f(a), π₂∘x⃗∘σ_a⟩⟩`.
pub fn rep_amalg_component(m: &AmalgSigMor, src: &Evaluated, tgt: &Evaluated, y: &SliceObj) -> Result<FinMap> {
    let (_, _, r) = pullback(&m.u, &y.d)?;
    let inner = tgt.inner.as_ref().ok_or_else(|| Error::Inconsistent("target is not a pulled-back evaluation".into()))?;
    map_keys(src, tgt, |k| {
        let a = k[0];
        let xs: Vec<usize> = m.sigma[a].pull(&k[1..]).into_iter().map(|x| r.apply(x)).collect();
        let mut key = vec![m.f[a]];
        key.extend(xs);
        vec![m.dom.op(a).out, inner.find(&key).unwrap_or(usize::MAX)]
    })
}

/// `Π_{(f,g)}`: `⟨b, y⃗⟩ ↦ ⟨t(b), ⟨f(b), π₂∘y⃗∘(g|)⁻¹⟩⟩`.
pub fn rep_poly_component(m: &crate::diagrams::PolyDiagMor, src: &Evaluated, tgt: &Evaluated, y: &SliceObj) -> Result<FinMap> {
    let (_, _, r) = pullback(&m.u, &y.d)?;
    let inner = tgt.inner.as_ref().ok_or_else(|| Error::Inconsistent("target is not a pulled-back evaluation".into()))?;
    map_keys(src, tgt, |k| {
        let b = k[0];
        let fib = m.dom.fiber(b);
        let fb = m.f.apply(b);
        let tfib = m.cod.fiber(fb);
        let mut key = vec![fb];
        for e2 in tfib {
            let pos = fib.iter().position(|&e| m.g.apply(e) == e2).unwrap_or(0);
            key.push(r.apply(k[1 + pos]));
        }
        vec![m.dom.t.apply(b), inner.find(&key).unwrap_or(usize::MAX)]
    })
}

/// `rep` of a morphism as tabulated data on the family of `bound` over the
/// codomain base.
pub fn rep_sym(m: &SymSigMor, bound: usize) -> Result<NatTransData> {
    let src = PullThen { u: m.u.clone(), inner: AnalyticFunctor(m.dom.clone()) };
    let tgt = ThenPull { u: m.u.clone(), inner: AnalyticFunctor(m.cod.clone()) };
    let fam = family(&m.cod.base, bound);
    let ts = TabulatedFunctor::tabulate(&src, fam.clone())?;
    let tt = TabulatedFunctor::tabulate(&tgt, fam.clone())?;
    let nt = NatTransData::from_fn(ts, tt, |i, s, t| rep_sym_component(m, s, t, &fam[i]))?;
    if !nt.is_natural() {
        return Err(Error::Inconsistent("rep of a symmetric signature morphism is not natural".into()));
    }
    Ok(nt)
}

pub fn rep_amalg(m: &AmalgSigMor, bound: usize) -> Result<NatTransData> {
    let src = PullThen { u: m.u.clone(), inner: AmalgFunctor(m.dom.clone()) };
    let tgt = ThenPull { u: m.u.clone(), inner: AmalgFunctor(m.cod.clone()) };
    let fam = family(&m.cod.base, bound);
    let ts = TabulatedFunctor::tabulate(&src, fam.clone())?;
    let tt = TabulatedFunctor::tabulate(&tgt, fam.clone())?;
    let nt = NatTransData::from_fn(ts, tt, |i, s, t| rep_amalg_component(m, s, t, &fam[i]))?;
    if !nt.is_natural() {
        return Err(Error::Inconsistent("rep of an amalgamated signature morphism is not natural".into()));
    }
    Ok(nt)
}

pub fn rep_poly(m: &crate::diagrams::PolyDiagMor, bound: usize) -> Result<NatTransData> {
    let src = PullThen { u: m.u.clone(), inner: PolyFunctor(m.dom.clone()) };
    let tgt = ThenPull { u: m.u.clone(), inner: PolyFunctor(m.cod.clone()) };
    let fam = family(&m.cod.base, bound);
    let ts = TabulatedFunctor::tabulate(&src, fam.clone())?;
    let tt = TabulatedFunctor::tabulate(&tgt, fam.clone())?;
    let nt = NatTransData::from_fn(ts, tt, |i, s, t| rep_poly_component(m, s, t, &fam[i]))?;
    if !nt.is_natural() {
        return Err(Error::Inconsistent("rep of a diagram morphism is not natural".into()));
    }
    Ok(nt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::OrbitSpec;

    fn one() -> FinSet {
        FinSet::from_strs("O", &["*"]).unwrap()
    }

    fn binary(fixed: bool) -> SymSig {
        let stab = if fixed { vec![Perm::from_one_based(&[2, 1]).unwrap()] } else { vec![] };
        SymSig::from_orbits(&one(), &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: stab }]).unwrap()
    }

    #[test]
    fn analytic_counts() {
        let x = SliceObj::with_fiber_sizes(&one(), &[3]);
        assert_eq!(eval_analytic(&binary(true), &x).unwrap().len(), 6);
        assert_eq!(eval_analytic(&binary(false), &x).unwrap().len(), 9);
        let unit = SymSig::unit(&one());
        assert_eq!(eval_analytic(&unit, &x).unwrap().len(), 3);
    }

    #[test]
    fn poly_binary_counts() {
        let o = one();
        let e = FinSet::from_strs("E", &["m.1", "m.2"]).unwrap();
        let b = FinSet::from_strs("B", &["m"]).unwrap();
        let d = PolyDiag::new(o.clone(), FinMap::new(e.clone(), o.clone(), vec![0, 0]).unwrap(), FinMap::new(e, b.clone(), vec![0, 0]).unwrap(), FinMap::new(b, o.clone(), vec![0]).unwrap()).unwrap();
        let x = SliceObj::with_fiber_sizes(&o, &[3]);
        assert_eq!(eval_poly(&d, &x).unwrap().len(), 9);
    }

    #[test]
    fn tabulation_is_functorial() {
        let t = TabulatedFunctor::at_bound(&AnalyticFunctor(binary(true)), 3).unwrap();
        assert!(t.functoriality_failures().is_empty());
    }

    #[test]
    fn analytic_preserves_weak_pullbacks() {
        let r = check_weak_wide_pullback_preservation(&AnalyticFunctor(binary(true)), 2, 3, false).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn gumm_fails() {
        let r = check_weak_wide_pullback_preservation(&Gumm::new(), 2, 3, false).unwrap();
        assert!(!r.holds());
    }

    #[test]
    fn rep_of_identity_is_identity() {
        let a = binary(false);
        let nt = rep_sym(&SymSigMor::identity(&a), 2).unwrap();
        assert!(nt.is_cartesian());
        for (i, c) in nt.components.iter().enumerate() {
            assert_eq!(c.dom().len(), nt.tgt.values[i].len());
        }
    }
}
