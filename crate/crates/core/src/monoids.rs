//! Monoids in the fibres: multicategories (strict, amalgamated) and
//! T-categories, their algebras, the truncated free construction and the
//! monads they induce on slices.

use std::collections::HashMap;
use std::hash::Hash;

use serde::Serialize;

use crate::diagrams::{associator, left_unitor, right_unitor, tensor_mor, tensor_total_bounded, AmalgTensor};
use crate::error::{structural, Result};
use crate::evaluation::{AmalgFunctor, Evaluated, SliceFunctor, TGraphFunctor};
use crate::finset::{FinMap, FinSet, SliceMap, SliceObj};
use crate::monad::{Identity, Monad};
use crate::perm::Perm;
use crate::signatures::{AmalgSig, AmalgSigMor, Op};
use crate::tgraph::{self, TGraph, Tensor};

/// One failed instance of a law, with the element it fails at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MonoidFailure {
    pub law: String,
    pub witness: String,
}

fn fail(law: &str, witness: impl Into<String>) -> MonoidFailure {
    MonoidFailure { law: law.to_string(), witness: witness.into() }
}

/// A monoid among amalgamated signatures: `m: M ⊗ M → M`, `e: I → M`.
/// With `strict`, every amalgamation must be the identity.
#[derive(Clone, Debug)]
pub struct AmalgMonoid {
    pub carrier: AmalgSig,
    pub tensor: AmalgTensor,
    pub mult: Vec<Option<(usize, Perm)>>,
    pub unit: Vec<usize>,
    pub strict: bool,
    pub max_arity: Option<usize>,
}

impl AmalgMonoid {
    pub fn from_fn(
        carrier: AmalgSig,
        max_arity: Option<usize>,
        strict: bool,
        mult: impl Fn(usize, &[usize]) -> Option<(usize, Perm)>,
        unit: Vec<usize>,
    ) -> Result<AmalgMonoid> {
        if unit.len() != carrier.base.len() {
            return structural("one unit per sort");
        }
        let tensor = tensor_total_bounded(&carrier, &carrier, max_arity)?;
        let mult = tensor.pairs.iter().map(|(a, bs)| mult(*a, bs)).collect();
        Ok(AmalgMonoid { carrier, tensor, mult, unit, strict, max_arity })
    }

    /// `m` as a morphism, if every entry is defined and well typed.
    pub fn mult_mor(&self) -> Option<AmalgSigMor> {
        let (f, s): (Vec<usize>, Vec<Perm>) = self.mult.iter().cloned().collect::<Option<Vec<_>>>()?.into_iter().unzip();
        AmalgSigMor::new(self.tensor.sig.clone(), self.carrier.clone(), FinMap::identity(&self.carrier.base), f, s).ok()
    }

    pub fn unit_mor(&self) -> Option<AmalgSigMor> {
        AmalgSigMor::strict(AmalgSig::unit(&self.carrier.base), self.carrier.clone(), FinMap::identity(&self.carrier.base), self.unit.clone()).ok()
    }

    /// Element-level composite `m(a; b⃗)`.
    pub fn compose(&self, a: usize, bs: &[usize]) -> Option<&(usize, Perm)> {
        self.tensor.lookup(a, bs).and_then(|k| self.mult[k].as_ref())
    }
}

/// Typing, strictness, associativity and both unit laws, elementwise.
pub fn check_amalg_monoid(m: &AmalgMonoid) -> Result<Vec<MonoidFailure>> {
    let c = &m.carrier;
    let mm = &m.tensor;
    let mut bad = Vec::new();
    for (k, entry) in m.mult.iter().enumerate() {
        let name = &mm.sig.op(k).name;
        let Some((r, s)) = entry else {
            bad.push(fail("multiplication defined", name.clone()));
            continue;
        };
        let src = mm.sig.op(k);
        let tgt = c.op(*r);
        if s.n() != src.arity() || tgt.out != src.out || tgt.arity() != src.arity() || (0..s.n()).any(|i| tgt.ins[i] != src.ins[s.apply(i)]) {
            bad.push(fail("multiplication typed", format!("{name} -> {}", tgt.name)));
        } else if m.strict && !s.is_identity() {
            bad.push(fail("multiplication strict", format!("{name} -> {} by {s}", tgt.name)));
        }
    }
    for (o, &e) in m.unit.iter().enumerate() {
        let op = c.op(e);
        if op.out != o || op.ins != [o] {
            bad.push(fail("unit typed", op.name.clone()));
        }
    }
    if !bad.is_empty() {
        return Ok(bad);
    }
    let mult = m.mult_mor().expect("checked above");
    let unit = m.unit_mor().expect("checked above");
    let id = AmalgSigMor::identity(c);
    let b = m.max_arity;

    let mm_m = tensor_total_bounded(&mm.sig, c, b)?;
    let m_mm = tensor_total_bounded(c, &mm.sig, b)?;
    let alpha = associator(&mm_m, mm, &m_mm, mm, c)?;
    let left = mult.after(&tensor_mor(&mult, &id, &mm_m, mm)?)?;
    let right = mult.after(&tensor_mor(&id, &mult, &m_mm, mm)?)?.after(&alpha)?;
    for x in 0..mm_m.sig.len() {
        if left.f[x] != right.f[x] || left.sigma[x] != right.sigma[x] {
            bad.push(fail(
                "associativity",
                format!("{}: {} by {} vs {} by {}", mm_m.sig.op(x).name, c.op(left.f[x]).name, left.sigma[x], c.op(right.f[x]).name, right.sigma[x]),
            ));
        }
    }
    let i = AmalgSig::unit(&c.base);
    let im = tensor_total_bounded(&i, c, b)?;
    let mi = tensor_total_bounded(c, &i, b)?;
    let lam = left_unitor(&im, c)?;
    let rho = right_unitor(&mi, c)?;
    let el = mult.after(&tensor_mor(&unit, &id, &im, mm)?)?;
    let er = mult.after(&tensor_mor(&id, &unit, &mi, mm)?)?;
    for x in 0..im.sig.len() {
        if el.f[x] != lam.f[x] || el.sigma[x] != lam.sigma[x] {
            bad.push(fail("left unit", im.sig.op(x).name.clone()));
        }
    }
    for x in 0..mi.sig.len() {
        if er.f[x] != rho.f[x] || er.sigma[x] != rho.sigma[x] {
            bad.push(fail("right unit", mi.sig.op(x).name.clone()));
        }
    }
    Ok(bad)
}

/// Three sorts `x0, x1, x2`, three identities and
/// `f0: x1 x1 → x0`, `f1: x2 → x1`, `f2: {x1, x2} → x0`, `f3: x2 x2 → x0`;
/// `f2` lists its inputs in the given order.
pub fn seven_operation_signature(x1_first: bool) -> AmalgSig {
    let o = FinSet::from_strs("O", &["x0", "x1", "x2"]).unwrap();
    let f2: &[&str] = if x1_first { &["x1", "x2"] } else { &["x2", "x1"] };
    AmalgSig::from_labels(
        &o,
        &[
            ("1_x0", "x0", &["x0"]),
            ("1_x1", "x1", &["x1"]),
            ("1_x2", "x2", &["x2"]),
            ("f0", "x0", &["x1", "x1"]),
            ("f1", "x1", &["x2"]),
            ("f2", "x0", f2),
            ("f3", "x0", &["x2", "x2"]),
        ],
    )
    .unwrap()
}

/// The composition table: `f0(f1, 1) = f0(1, f1) = f2`, `f0(f1, f1) = f3`,
/// `f2` with `f1` on its `x1` input `= f3`, identities neutral. Composites
/// landing on `f2` carry the amalgamation forced by their profile; the two
/// landing on `f3` (from `f0` and from `f2`) take the swap when the flags
/// say so. Under `strict` every amalgamation is the identity.
pub fn seven_operation_table(x1_first: bool, strict: bool, swap_f3: [bool; 2]) -> Result<AmalgMonoid> {
    let sig = seven_operation_signature(x1_first);
    let id = |n: &str| sig.find(n).unwrap();
    let ids = [id("1_x0"), id("1_x1"), id("1_x2")];
    let (f0, f1, f2, f3) = (id("f0"), id("f1"), id("f2"), id("f3"));
    let table = move |a: usize, bs: &[usize]| -> Option<(usize, Option<usize>)> {
        if ids.contains(&a) {
            return Some((bs[0], None));
        }
        if bs.iter().all(|b| ids.contains(b)) {
            return Some((a, None));
        }
        let k1 = bs.iter().filter(|&&b| b == f1).count();
        match (a, k1) {
            (x, 1) if x == f0 => Some((f2, None)),
            (x, 2) if x == f0 => Some((f3, Some(0))),
            (x, 1) if x == f2 => Some((f3, Some(1))),
            _ => None,
        }
    };
    let s2 = sig.clone();
    AmalgMonoid::from_fn(
        sig,
        None,
        strict,
        move |a, bs| {
            let (r, flag) = table(a, bs)?;
            let n = bs.iter().map(|&b| s2.op(b).arity()).sum();
            if strict {
                return Some((r, Perm::identity(n)));
            }
            if let Some(k) = flag {
                let s = if swap_f3[k] { Perm::from_one_based(&[2, 1]).unwrap() } else { Perm::identity(2) };
                return Some((r, s));
            }
            let ins: Vec<usize> = bs.iter().flat_map(|&b| s2.op(b).ins.iter().copied()).collect();
            let want = &s2.op(r).ins;
            // least σ with want[i] = ins[σ(i)]
            Perm::all(n).into_iter().find(|s| (0..n).all(|i| want[i] == ins[s.apply(i)])).map(|s| (r, s))
        },
        ids.to_vec(),
    )
}

/// Every admissible amalgamated table on the seven operations, with its
/// failures.
pub fn seven_operation_search(x1_first: bool) -> Result<Vec<([bool; 2], Vec<MonoidFailure>)>> {
    let mut out = Vec::new();
    for swap_f3 in [[false, false], [false, true], [true, false], [true, true]] {
        out.push((swap_f3, check_amalg_monoid(&seven_operation_table(x1_first, false, swap_f3)?)?));
    }
    Ok(out)
}

/// A monoid among T-graphs over a fixed base: a T-category.
#[derive(Clone, Debug)]
pub struct TGraphMonoid<M: Monad> {
    pub graph: TGraph<M>,
    pub tensor: Tensor<M>,
    pub mult: Vec<Option<usize>>,
    pub unit: Vec<usize>,
    pub max_leaves: Option<usize>,
}

impl<M: Monad> TGraphMonoid<M> {
    pub fn from_fn(graph: TGraph<M>, max_leaves: Option<usize>, mult: impl Fn(usize, &M::T<usize>) -> Option<usize>, unit: Vec<usize>) -> Result<TGraphMonoid<M>> {
        if unit.len() != graph.base.len() {
            return structural("one unit per sort");
        }
        let tensor = tgraph::tensor_bounded(&graph, &graph, max_leaves)?;
        let mult = tensor.pairs.iter().map(|(a, w)| mult(*a, w)).collect();
        Ok(TGraphMonoid { graph, tensor, mult, unit, max_leaves })
    }

    pub fn compose(&self, a: usize, w: &M::T<usize>) -> Option<usize> {
        self.tensor.lookup(a, w).and_then(|k| self.mult[k])
    }

    /// Copy with one multiplication entry replaced.
    pub fn with_entry(&self, k: usize, value: usize) -> TGraphMonoid<M> {
        let mut out = self.clone();
        out.mult[k] = Some(value);
        out
    }

    pub fn label(&self, a: usize) -> &str {
        self.graph.carrier.label(a)
    }

    pub fn pair_label(&self, k: usize) -> &str {
        self.tensor.graph.carrier.label(k)
    }
}

pub fn check_tgraph_monoid<M: Monad>(mon: &TGraphMonoid<M>) -> Result<Vec<MonoidFailure>> {
    let g = &mon.graph;
    let m = &g.monad;
    let mm = &mon.tensor;
    let mut bad = Vec::new();
    for (k, r) in mon.mult.iter().enumerate() {
        match r {
            None => bad.push(fail("multiplication defined", mon.pair_label(k))),
            Some(r) if *r >= g.len() || g.gamma[*r] != mm.graph.gamma[k] || g.delta[*r] != mm.graph.delta[k] => {
                bad.push(fail("multiplication typed", format!("{} -> {}", mon.pair_label(k), g.carrier.label(*r))))
            }
            _ => {}
        }
    }
    for (o, &e) in mon.unit.iter().enumerate() {
        if e >= g.len() || g.gamma[e] != o || g.delta[e] != m.eta(o) {
            bad.push(fail("unit typed", g.base.label(o)));
        }
    }
    if !bad.is_empty() {
        return Ok(bad);
    }
    let mult = |k: usize| mon.mult[k].expect("checked above");
    let b = mon.max_leaves;

    let mm_m = tgraph::tensor_bounded(&mm.graph, g, b)?;
    let m_mm = tgraph::tensor_bounded(g, &mm.graph, b)?;
    let alpha = tgraph::associator(&mm_m, mm, &m_mm, mm, g)?;
    for (x, (p, v)) in mm_m.pairs.iter().enumerate() {
        let left = mm.lookup(mult(*p), v).map(mult);
        let (a, ws) = &m_mm.pairs[alpha[x]];
        let inner = m.map(ws, |&q| mult(q));
        let right = mm.lookup(*a, &inner).map(mult);
        if left != right || left.is_none() {
            let show = |r: Option<usize>| r.map_or("undefined".to_string(), |r| g.carrier.label(r).to_string());
            bad.push(fail("associativity", format!("{}: {} vs {}", mm_m.graph.carrier.label(x), show(left), show(right))));
        }
    }
    let i = TGraph::unit(m.clone(), &g.base);
    let im = tgraph::tensor_bounded(&i, g, b)?;
    let lam = tgraph::left_unitor(&im);
    for (x, (o, w)) in im.pairs.iter().enumerate() {
        if mm.lookup(mon.unit[*o], w).map(mult) != Some(lam[x]) {
            bad.push(fail("left unit", im.graph.carrier.label(x)));
        }
    }
    let mi = tgraph::tensor_bounded(g, &i, b)?;
    for (x, (a, w)) in mi.pairs.iter().enumerate() {
        let w2 = m.map(w, |&o| mon.unit[o]);
        if mm.lookup(*a, &w2).map(mult) != Some(*a) {
            bad.push(fail("right unit", mi.graph.carrier.label(x)));
        }
    }
    Ok(bad)
}

/// A small category as a monoid of identity-monad graphs: `γ` is the
/// codomain, `δ` the domain, and `(g, f) ↦ g∘f`.
pub fn category(objects: &[&str], arrows: &[(&str, &str, &str)], identities: &[&str], compose: &[(&str, &str, &str)]) -> Result<TGraphMonoid<Identity>> {
    let o = FinSet::from_strs("O", objects)?;
    let carrier = FinSet::new("C", arrows.iter().map(|a| a.0.to_string()).collect())?;
    let gamma = arrows.iter().map(|a| o.require(a.2)).collect::<Result<Vec<_>>>()?;
    let delta = arrows.iter().map(|a| o.require(a.1)).collect::<Result<Vec<_>>>()?;
    let graph = TGraph::new(Identity, o.clone(), carrier.clone(), gamma, delta)?;
    let unit = identities.iter().map(|n| carrier.require(n)).collect::<Result<Vec<_>>>()?;
    let mut table = HashMap::new();
    for (g, f, gf) in compose {
        table.insert((carrier.require(g)?, carrier.require(f)?), carrier.require(gf)?);
    }
    TGraphMonoid::from_fn(graph, None, |g, f| table.get(&(g, *f)).copied(), unit)
}

/// `x → y → z` with `h = g∘f`: six arrows.
pub fn chain_category() -> TGraphMonoid<Identity> {
    category(
        &["x", "y", "z"],
        &[("id_x", "x", "x"), ("id_y", "y", "y"), ("id_z", "z", "z"), ("f", "x", "y"), ("g", "y", "z"), ("h", "x", "z")],
        &["id_x", "id_y", "id_z"],
        &[
            ("id_x", "id_x", "id_x"),
            ("id_y", "id_y", "id_y"),
            ("id_z", "id_z", "id_z"),
            ("f", "id_x", "f"),
            ("id_y", "f", "f"),
            ("g", "id_y", "g"),
            ("id_z", "g", "g"),
            ("h", "id_x", "h"),
            ("id_z", "h", "h"),
            ("g", "f", "h"),
        ],
    )
    .expect("chain category is well formed")
}

/// `ν: M ⋆ X → X` for a T-category `M`.
#[derive(Clone, Debug)]
pub struct AlgebraData<M: Monad> {
    pub monoid: TGraphMonoid<M>,
    pub x: SliceObj,
    pub pairs: Vec<(usize, M::T<usize>)>,
    pub nu: Vec<usize>,
}

impl<M: Monad> AlgebraData<M> {
    pub fn from_fn(monoid: TGraphMonoid<M>, x: SliceObj, nu: impl Fn(usize, &M::T<usize>) -> usize) -> Result<AlgebraData<M>> {
        let (_, pairs) = tgraph::act(&monoid.graph, &x)?;
        let nu = pairs.iter().map(|(a, w)| nu(*a, w)).collect();
        Ok(AlgebraData { monoid, x, pairs, nu })
    }

    /// `M` acting on its own carrier (typed by `γ`) by multiplication.
    pub fn regular(monoid: TGraphMonoid<M>) -> Result<AlgebraData<M>> {
        let g = &monoid.graph;
        let x = SliceObj::new(FinMap::new(g.carrier.clone(), g.base.clone(), g.gamma.clone())?);
        let mon = monoid.clone();
        AlgebraData::from_fn(monoid, x, move |a, w| mon.compose(a, w).unwrap_or(usize::MAX))
    }

    pub fn with_entry(&self, k: usize, value: usize) -> AlgebraData<M> {
        let mut out = self.clone();
        out.nu[k] = value;
        out
    }
}

pub fn check_algebra<M: Monad>(al: &AlgebraData<M>) -> Result<Vec<MonoidFailure>> {
    let mon = &al.monoid;
    let m = &mon.graph.monad;
    let x = &al.x;
    let index: HashMap<(usize, M::T<usize>), usize> = al.pairs.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    let show = |k: usize| {
        let (a, w) = &al.pairs[k];
        format!("<{}|{}>", mon.label(*a), m.show(w, |&y| x.total().label(y).to_string()))
    };
    let mut bad = Vec::new();
    for (k, &r) in al.nu.iter().enumerate() {
        if r >= x.len() || x.typ(r) != mon.graph.gamma[al.pairs[k].0] {
            bad.push(fail("action typed", show(k)));
        }
    }
    if !bad.is_empty() {
        return Ok(bad);
    }
    let nu = |a: usize, w: &M::T<usize>| index.get(&(a, w.clone())).map(|&k| al.nu[k]);
    let (_, mmx) = tgraph::act(&mon.tensor.graph, x)?;
    for ((p, v), label) in mmx.iter().zip(0..) {
        let (a, w) = &mon.tensor.pairs[*p];
        let left = mon.mult[*p].and_then(|c| nu(c, v));
        let shape = m.map(w, |&b| mon.graph.delta[b].clone());
        let right = m.unflatten(&shape, v).and_then(|nested| {
            let inner: Option<Vec<usize>> = m.leaves(w).iter().zip(m.leaves(&nested)).map(|(&b, blk)| nu(b, &blk)).collect();
            nu(*a, &m.refill(w, inner?))
        });
        if left != right || left.is_none() {
            let _ = label;
            bad.push(fail(
                "action associativity",
                format!("<{}|{}>", mon.pair_label(*p), m.show(v, |&y| x.total().label(y).to_string())),
            ));
        }
    }
    for y in 0..x.len() {
        if nu(mon.unit[x.typ(y)], &m.eta(y)) != Some(y) {
            bad.push(fail("action unit", x.total().label(y)));
        }
    }
    Ok(bad)
}

/// Morphism of T-categories over the identity of the base.
pub fn monoid_mor_failures<M: Monad>(src: &TGraphMonoid<M>, tgt: &TGraphMonoid<M>, f: &[usize]) -> Vec<MonoidFailure> {
    let m = &src.graph.monad;
    let mut bad = Vec::new();
    if !tgraph::is_graph_map(&src.graph, &tgt.graph, f) {
        bad.push(fail("graph map", src.graph.carrier.id()));
        return bad;
    }
    for (k, (a, w)) in src.tensor.pairs.iter().enumerate() {
        let Some(r) = src.mult[k] else { continue };
        let img = tgt.compose(f[*a], &m.map(w, |&b| f[b]));
        if img != Some(f[r]) {
            bad.push(fail("preserves multiplication", src.pair_label(k)));
        }
    }
    for (o, &e) in src.unit.iter().enumerate() {
        if f[e] != tgt.unit[o] {
            bad.push(fail("preserves unit", src.graph.base.label(o)));
        }
    }
    bad
}

/// A node of a free tree: a unit at a sort, or a generator applied to
/// subtrees (by id).
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum TreeKey<W> {
    Unit(usize),
    Node(usize, W),
}

/// Stages `A^0 ⊆ … ⊆ A^k` of the free T-category on `A`, truncated to
/// elements with at most `max_leaves` leaves.
#[derive(Clone, Debug)]
pub struct FreeChainTruncation<M: Monad> {
    pub generators: TGraph<M>,
    pub depth: usize,
    pub max_leaves: usize,
    pub trees: Vec<TreeKey<M::T<usize>>>,
    index: HashMap<TreeKey<M::T<usize>>, usize>,
    pub gamma: Vec<usize>,
    pub delta: Vec<M::T<usize>>,
    pub labels: Vec<String>,
    /// tree ids in each stage
    pub stages: Vec<Vec<usize>>,
    /// position in stage `i` ↦ position in stage `i + 1`
    pub stage_maps: Vec<Vec<usize>>,
    /// `counts[i][n]`: elements of stage `i` with `n` leaves
    pub counts: Vec<Vec<usize>>,
    pub stabilized_at: Option<usize>,
    /// cap on generator occurrences plus leaves
    pub max_weight: Option<usize>,
    nodes: Vec<usize>,
}

impl<M: Monad> FreeChainTruncation<M> {
    fn intern(&mut self, key: TreeKey<M::T<usize>>) -> usize {
        if let Some(&i) = self.index.get(&key) {
            return i;
        }
        let g = &self.generators;
        let m = &g.monad;
        let (gamma, delta, label, nodes) = match &key {
            TreeKey::Unit(o) => (*o, m.eta(*o), format!("id_{}", g.base.label(*o)), 0),
            TreeKey::Node(a, w) => {
                let kids: Vec<&str> = m.leaves(w).iter().map(|&c| self.labels[c].as_str()).collect();
                let nodes = 1 + m.leaves(w).iter().map(|&c| self.nodes[c]).sum::<usize>();
                let delta = m.mu(m.map(w, |&c| self.delta[c].clone()));
                (g.gamma[*a], delta, format!("{}({})", g.carrier.label(*a), kids.join(",")), nodes)
            }
        };
        let i = self.trees.len();
        self.trees.push(key.clone());
        self.index.insert(key, i);
        self.gamma.push(gamma);
        self.delta.push(delta);
        self.labels.push(label);
        self.nodes.push(nodes);
        i
    }

    /// Generator occurrences in a tree.
    pub fn node_count(&self, t: usize) -> usize {
        self.nodes[t]
    }

    pub fn leaves(&self, t: usize) -> usize {
        self.generators.monad.leaves(&self.delta[t]).len()
    }

    pub fn find(&self, key: &TreeKey<M::T<usize>>) -> Option<usize> {
        self.index.get(key).copied()
    }

    /// Grafting `t ∘ w` with `w` a `T`-family of trees over `δ(t)`.
    pub fn graft(&self, t: usize, w: &M::T<usize>) -> Option<usize> {
        let m = &self.generators.monad;
        match &self.trees[t] {
            TreeKey::Unit(_) => m.leaves(w).first().copied(),
            TreeKey::Node(a, cs) => {
                let shape = m.map(cs, |&c| self.delta[c].clone());
                let nested = m.unflatten(&shape, w)?;
                let kids: Option<Vec<usize>> = m.leaves(cs).iter().zip(m.leaves(&nested)).map(|(&c, blk)| self.graft(c, &blk)).collect();
                self.find(&TreeKey::Node(*a, m.refill(cs, kids?)))
            }
        }
    }

    /// The carrier of the last stage as a T-graph.
    pub fn graph(&self) -> TGraph<M> {
        let last = self.stages.last().expect("stage 0 always exists");
        let carrier = FinSet::fresh("F", last.iter().map(|&t| self.labels[t].clone()).collect());
        TGraph {
            monad: self.generators.monad.clone(),
            base: self.generators.base.clone(),
            carrier,
            gamma: last.iter().map(|&t| self.gamma[t]).collect(),
            delta: last.iter().map(|&t| self.delta[t].clone()).collect(),
        }
    }

    /// Grafting monoid on the last stage, when the truncation has stabilized.
    pub fn monoid(&self) -> Option<TGraphMonoid<M>> {
        self.stabilized_at?;
        let last = self.stages.last()?;
        let pos: HashMap<usize, usize> = last.iter().enumerate().map(|(i, &t)| (t, i)).collect();
        let m = &self.generators.monad;
        let unit = (0..self.generators.base.len()).map(|o| pos[&self.index[&TreeKey::Unit(o)]]).collect();
        TGraphMonoid::from_fn(
            self.graph(),
            Some(self.max_leaves),
            |a, w| {
                let ids = m.map(w, |&p| last[p]);
                self.graft(last[a], &ids).and_then(|t| pos.get(&t).copied())
            },
            unit,
        )
        .ok()
    }

    /// Unique extension of a generator assignment to the free T-category.
    pub fn extend(&self, target: &TGraphMonoid<M>, gens: &[usize]) -> Option<Vec<usize>> {
        let m = &self.generators.monad;
        let mut img = vec![usize::MAX; self.trees.len()];
        for (t, key) in self.trees.iter().enumerate() {
            img[t] = match key {
                TreeKey::Unit(o) => target.unit[*o],
                TreeKey::Node(a, cs) => target.compose(gens[*a], &m.map(cs, |&c| img[c]))?,
            };
        }
        Some(self.stages.last()?.iter().map(|&t| img[t]).collect())
    }

    /// Positions of the generators' single-node trees in the last stage.
    pub fn generator_positions(&self) -> Vec<Option<usize>> {
        let m = &self.generators.monad;
        let last = self.stages.last().expect("stage 0");
        (0..self.generators.len())
            .map(|a| {
                let w = m.map(&self.generators.delta[a], |&o| self.index[&TreeKey::Unit(o)]);
                self.find(&TreeKey::Node(a, w)).and_then(|t| last.iter().position(|&x| x == t))
            })
            .collect()
    }
}

/// `A^0 = I`, `A^{i+1} = I + A ⊗ A^i`, for `depth` steps.
pub fn free_multicategory<M: Monad>(a: &TGraph<M>, depth: usize, max_leaves: usize) -> FreeChainTruncation<M> {
    free_multicategory_bounded(a, depth, max_leaves, None)
}

/// As [`free_multicategory`], also dropping trees with more than
/// `max_weight` generator occurrences and leaves together.
pub fn free_multicategory_bounded<M: Monad>(
    a: &TGraph<M>,
    depth: usize,
    max_leaves: usize,
    max_weight: Option<usize>,
) -> FreeChainTruncation<M> {
    let m = a.monad.clone();
    let cap = max_weight.unwrap_or(usize::MAX);
    let mut fc = FreeChainTruncation {
        generators: a.clone(),
        depth,
        max_leaves,
        trees: Vec::new(),
        index: HashMap::new(),
        gamma: Vec::new(),
        delta: Vec::new(),
        labels: Vec::new(),
        stages: Vec::new(),
        stage_maps: Vec::new(),
        counts: Vec::new(),
        stabilized_at: None,
        max_weight,
        nodes: Vec::new(),
    };
    let units: Vec<usize> = (0..a.base.len()).map(|o| fc.intern(TreeKey::Unit(o))).collect();
    fc.stages.push(units.clone());
    for i in 0..depth {
        let prev = fc.stages[i].clone();
        let mut over = vec![Vec::new(); a.base.len()];
        for &t in &prev {
            over[fc.gamma[t]].push(t);
        }
        let lv: Vec<usize> = (0..fc.trees.len()).map(|t| fc.leaves(t)).collect();
        let lv = &lv;
        let nv = &fc.nodes.clone();
        let mut next = units.clone();
        for x in 0..a.len() {
            let slots = m.leaves(&a.delta[x]);
            let mut picks = vec![Vec::new()];
            for &o in &slots {
                picks = picks
                    .into_iter()
                    .flat_map(|p: Vec<usize>| {
                        let used: usize = p.iter().map(|&t| lv[t]).sum();
                        let placed: usize = 1 + p.iter().map(|&t| nv[t]).sum::<usize>();
                        over[o]
                            .iter()
                            .filter(move |&&t| used + lv[t] <= max_leaves && used + lv[t] + placed + nv[t] <= cap)
                            .map(move |&t| {
                                let mut q = p.clone();
                                q.push(t);
                                q
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
            }
            for p in picks {
                let leaves = p.iter().map(|&t| lv[t]).sum::<usize>();
                if leaves <= max_leaves && leaves + 1 + p.iter().map(|&t| nv[t]).sum::<usize>() <= cap {
                    let key = TreeKey::Node(x, m.refill(&a.delta[x], p));
                    next.push(fc.intern(key));
                }
            }
        }
        let pos: HashMap<usize, usize> = next.iter().enumerate().map(|(k, &t)| (t, k)).collect();
        // e_{i+1} = 1 + (1 ⊗ e_i): every tree keeps its node and children
        fc.stage_maps.push(prev.iter().map(|t| pos[t]).collect());
        fc.stages.push(next);
    }
    for st in &fc.stages {
        let mut c = vec![0; max_leaves + 1];
        for &t in st {
            let n = fc.leaves(t);
            if n <= max_leaves {
                c[n] += 1;
            }
        }
        fc.counts.push(c);
    }
    fc.stabilized_at = (1..fc.stages.len()).find(|&i| fc.stages[i].len() == fc.stages[i - 1].len());
    fc
}

/// The monad on slices induced by a monoid, for the functor-level check.
pub trait SliceMonad: SliceFunctor {
    /// `η_X: X → F(X)`
    fn eta(&self, x: &SliceObj, fx: &Evaluated) -> Result<FinMap>;
    /// `μ_X: F(F(X)) → F(X)`
    fn mu(&self, fx: &Evaluated, ffx: &Evaluated) -> Result<FinMap>;
}

fn keyed(src: &FinSet, tgt: &Evaluated, keys: impl Iterator<Item = Vec<usize>>) -> Result<FinMap> {
    let table = keys.map(|k| tgt.require(&k)).collect::<Result<Vec<_>>>()?;
    FinMap::new(src.clone(), tgt.obj.total().clone(), table)
}

/// `X ↦ M ⋆ X` for an amalgamated monoid.
pub struct AmalgMonad(pub AmalgMonoid);

impl SliceFunctor for AmalgMonad {
    fn domain(&self) -> &FinSet {
        &self.0.carrier.base
    }
    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        AmalgFunctor(self.0.carrier.clone()).eval(x)
    }
    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        AmalgFunctor(self.0.carrier.clone()).map(f, src, tgt)
    }
}

impl SliceMonad for AmalgMonad {
    fn eta(&self, x: &SliceObj, fx: &Evaluated) -> Result<FinMap> {
        keyed(x.total(), fx, (0..x.len()).map(|y| vec![self.0.unit[x.typ(y)], y]))
    }
    fn mu(&self, fx: &Evaluated, ffx: &Evaluated) -> Result<FinMap> {
        let keys = ffx.keys.iter().map(|k| {
            let bs: Vec<usize> = k[1..].iter().map(|&y| fx.keys[y][0]).collect();
            let cat: Vec<usize> = k[1..].iter().flat_map(|&y| fx.keys[y][1..].to_vec()).collect();
            match self.0.compose(k[0], &bs) {
                Some((c, s)) => {
                    let mut out = vec![*c];
                    out.extend(s.pull(&cat));
                    out
                }
                None => vec![usize::MAX],
            }
        });
        keyed(ffx.obj.total(), fx, keys)
    }
}

/// `X ↦ M ⋆ X` for a T-category.
pub struct TGraphMonad<M: Monad>(pub TGraphMonoid<M>);

impl<M: Monad> SliceFunctor for TGraphMonad<M> {
    fn domain(&self) -> &FinSet {
        &self.0.graph.base
    }
    fn eval(&self, x: &SliceObj) -> Result<Evaluated> {
        TGraphFunctor(self.0.graph.clone()).eval(x)
    }
    fn map(&self, f: &SliceMap, src: &Evaluated, tgt: &Evaluated) -> Result<FinMap> {
        TGraphFunctor(self.0.graph.clone()).map(f, src, tgt)
    }
}

impl<M: Monad> SliceMonad for TGraphMonad<M> {
    fn eta(&self, x: &SliceObj, fx: &Evaluated) -> Result<FinMap> {
        keyed(x.total(), fx, (0..x.len()).map(|y| vec![self.0.unit[x.typ(y)], y]))
    }
    fn mu(&self, fx: &Evaluated, ffx: &Evaluated) -> Result<FinMap> {
        let g = &self.0.graph;
        let m = &g.monad;
        let keys = ffx.keys.iter().map(|k| {
            let a = k[0];
            let ys = m.refill(&g.delta[a], k[1..].to_vec());
            let w = m.map(&ys, |&y| fx.keys[y][0]);
            let cat: Vec<usize> = k[1..].iter().flat_map(|&y| fx.keys[y][1..].to_vec()).collect();
            match self.0.compose(a, &w) {
                Some(c) => {
                    let mut out = vec![c];
                    out.extend(cat);
                    out
                }
                None => vec![usize::MAX],
            }
        });
        keyed(ffx.obj.total(), fx, keys)
    }
}

/// Unit and associativity laws of the induced monad on each given slice.
pub fn check_slice_monad(t: &dyn SliceMonad, objects: &[SliceObj]) -> Result<Vec<MonoidFailure>> {
    let mut bad = Vec::new();
    for x in objects {
        let fx = t.eval(x)?;
        let ffx = t.eval(&fx.obj)?;
        let fffx = t.eval(&ffx.obj)?;
        let mu = match t.mu(&fx, &ffx) {
            Ok(m) => m,
            Err(e) => {
                bad.push(fail("multiplication total", e.to_string()));
                continue;
            }
        };
        let eta = t.eta(x, &fx)?;
        let eta_f = t.eta(&fx.obj, &ffx)?;
        let f_eta = t.map(&SliceMap::new(x.clone(), fx.obj.clone(), eta)?, &fx, &ffx)?;
        for y in 0..fx.len() {
            if mu.apply(eta_f.apply(y)) != y {
                bad.push(fail("μ∘ηF = 1", fx.obj.total().label(y)));
            }
            if mu.apply(f_eta.apply(y)) != y {
                bad.push(fail("μ∘Fη = 1", fx.obj.total().label(y)));
            }
        }
        let mu_f = t.mu(&ffx, &fffx)?;
        let f_mu = t.map(&SliceMap::new(ffx.obj.clone(), fx.obj.clone(), mu.clone())?, &fffx, &ffx)?;
        for z in 0..fffx.len() {
            if mu.apply(mu_f.apply(z)) != mu.apply(f_mu.apply(z)) {
                bad.push(fail("μ∘μF = μ∘Fμ", fffx.obj.total().label(z)));
            }
        }
    }
    Ok(bad)
}

/// Amalgamated monoid of a free planar multicategory: trees with their
/// leaves in order, trivial amalgamations.
pub fn free_amalg_monoid(fc: &FreeChainTruncation<crate::monad::List>) -> Option<AmalgMonoid> {
    let tm = fc.monoid()?;
    let g = &tm.graph;
    let ops = (0..g.len()).map(|a| Op { name: g.carrier.label(a).to_string(), out: g.gamma[a], ins: g.delta[a].clone() }).collect();
    let sig = AmalgSig::new(g.base.clone(), ops).ok()?;
    AmalgMonoid::from_fn(sig, tm.max_leaves, true, |a, bs| tm.compose(a, &bs.to_vec()).map(|c| (c, Perm::identity(g.delta[c].len()))), tm.unit.clone()).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::List;

    fn one() -> FinSet {
        FinSet::from_strs("O", &["*"]).unwrap()
    }

    #[test]
    fn chain_category_passes() {
        assert_eq!(check_tgraph_monoid(&chain_category()).unwrap(), vec![]);
    }

    #[test]
    fn seven_operations() {
        for order in [true, false] {
            // no choice of amalgamations is associative
            for (_, bad) in seven_operation_search(order).unwrap() {
                assert!(!bad.is_empty());
                assert!(bad.iter().all(|f| f.law == "associativity"));
            }
            let strict = check_amalg_monoid(&seven_operation_table(order, true, [false, false]).unwrap()).unwrap();
            assert!(strict.iter().any(|f| f.law == "multiplication typed" && f.witness.contains("f0|")));
        }
    }

    #[test]
    fn binary_trees() {
        let g = TGraph::new(List, one(), FinSet::from_strs("A", &["m"]).unwrap(), vec![0], vec![vec![0, 0]]).unwrap();
        let fc = free_multicategory(&g, 6, 5);
        assert_eq!(fc.counts.last().unwrap()[1..].to_vec(), vec![1, 1, 2, 5, 14]);
        assert_eq!(fc.stabilized_at, Some(5));
        let mon = fc.monoid().unwrap();
        assert_eq!(check_tgraph_monoid(&mon).unwrap(), vec![]);
    }

    #[test]
    fn unary_never_stabilizes() {
        let g = TGraph::new(List, one(), FinSet::from_strs("A", &["f"]).unwrap(), vec![0], vec![vec![0]]).unwrap();
        let fc = free_multicategory(&g, 4, 1);
        assert_eq!(fc.counts[4][1], 5);
        assert_eq!(fc.stabilized_at, None);
        assert!(fc.monoid().is_none());
    }

    #[test]
    fn regular_action() {
        let al = AlgebraData::regular(chain_category()).unwrap();
        assert_eq!(check_algebra(&al).unwrap(), vec![]);
    }

    #[test]
    fn category_monad_laws() {
        let mon = chain_category();
        let objs = crate::evaluation::family(&mon.graph.base, 3);
        assert_eq!(check_slice_monad(&TGraphMonad(mon), &objs).unwrap(), vec![]);
    }
}
