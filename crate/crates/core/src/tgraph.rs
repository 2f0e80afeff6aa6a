//! Burroni T-graphs `O ← A → T(O)`: tensor, unit, the action on slices,
//! reindexing and the pullback along a monad morphism.

use std::collections::HashMap;

use crate::error::{invalid, structural, Result};
use crate::finset::{product_indices, FinMap, FinSet, SliceObj};
use crate::monad::Monad;
use crate::signatures::AmalgSig;

/// A T-graph over `base`: `gamma: A → O`, `delta: A → T(O)`.
#[derive(Clone, Debug, PartialEq)]
pub struct TGraph<M: Monad> {
    pub monad: M,
    pub base: FinSet,
    pub carrier: FinSet,
    pub gamma: Vec<usize>,
    pub delta: Vec<M::T<usize>>,
}

impl<M: Monad> TGraph<M> {
    pub fn new(monad: M, base: FinSet, carrier: FinSet, gamma: Vec<usize>, delta: Vec<M::T<usize>>) -> Result<TGraph<M>> {
        if gamma.len() != carrier.len() || delta.len() != carrier.len() {
            return structural("T-graph structure maps are not total");
        }
        if gamma.iter().any(|&o| o >= base.len()) || delta.iter().any(|t| monad.leaves(t).iter().any(|&o| o >= base.len())) {
            return structural("T-graph is typed outside its base");
        }
        Ok(TGraph { monad, base, carrier, gamma, delta })
    }

    /// `(O, 1_O, η_O)`.
    pub fn unit(monad: M, base: &FinSet) -> TGraph<M> {
        let carrier = FinSet::fresh("I", (0..base.len()).map(|o| format!("id_{}", base.label(o))).collect());
        let delta = (0..base.len()).map(|o| monad.eta(o)).collect();
        TGraph { monad, base: base.clone(), carrier, gamma: (0..base.len()).collect(), delta }
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn show_delta(&self, a: usize) -> String {
        self.monad.show(&self.delta[a], |&o| self.base.label(o).to_string())
    }

    /// The signature read as a T-graph: `γ` the output, `δ` the inputs,
    /// which must form a shape of `T`.
    pub fn of_signature(monad: M, a: &AmalgSig) -> Result<TGraph<M>> {
        let mut delta = Vec::with_capacity(a.len());
        for op in a.ops() {
            match monad.from_leaves(op.ins.clone()) {
                Some(t) => delta.push(t),
                None => return structural(format!("inputs of {:?} are not a shape of the monad", op.name)),
            }
        }
        TGraph::new(monad, a.base.clone(), a.op_set(), a.ops().iter().map(|o| o.out).collect(), delta)
    }
}

/// Elements `w` of `T(X)` with `T(d)(w) = shape`, where `over[o]` lists
/// the elements of `X` of type `o`.
pub fn refills<M: Monad>(m: &M, shape: &M::T<usize>, over: &[Vec<usize>]) -> Vec<M::T<usize>> {
    let slots = m.leaves(shape);
    let choices: Vec<&Vec<usize>> = slots.iter().map(|&o| &over[o]).collect();
    product_indices(&choices.iter().map(|c| c.len()).collect::<Vec<_>>())
        .map(|pick| m.refill(shape, pick.iter().enumerate().map(|(i, &k)| choices[i][k]).collect()))
        .collect()
}

fn fibres(n: usize, gamma: &[usize]) -> Vec<Vec<usize>> {
    let mut over = vec![Vec::new(); n];
    for (x, &o) in gamma.iter().enumerate() {
        over[o].push(x);
    }
    over
}

/// The tensor `A ⊗ B` with its elements `(a, w)` and a reverse index.
#[derive(Clone, Debug)]
pub struct Tensor<M: Monad> {
    pub graph: TGraph<M>,
    pub pairs: Vec<(usize, M::T<usize>)>,
    index: HashMap<(usize, M::T<usize>), usize>,
}

impl<M: Monad> Tensor<M> {
    pub fn lookup(&self, a: usize, w: &M::T<usize>) -> Option<usize> {
        self.index.get(&(a, w.clone())).copied()
    }
}

/// `A ⊗ B`: pairs `(a, w)` with `w ∈ T(B)` over `δ_A(a)`;
/// `γ = γ_A(a)` and `δ = μ(T(δ_B)(w))`.
pub fn tensor<M: Monad>(a: &TGraph<M>, b: &TGraph<M>) -> Result<Tensor<M>> {
    tensor_bounded(a, b, None)
}

/// Choices of `B`-elements per slot whose `δ`s have at most `max` leaves
/// in total, in lexicographic order.
fn bounded_picks<M: Monad>(b: &TGraph<M>, slots: &[usize], over: &[Vec<usize>], max: usize) -> Vec<Vec<usize>> {
    let m = &b.monad;
    let sizes: Vec<usize> = (0..b.len()).map(|y| m.leaves(&b.delta[y]).len()).collect();
    // least leaf count still needed by the remaining slots
    let mut rest = vec![0; slots.len() + 1];
    for i in (0..slots.len()).rev() {
        rest[i] = rest[i + 1] + over[slots[i]].iter().map(|&y| sizes[y]).min().unwrap_or(0);
    }
    let mut out = Vec::new();
    let mut cur = Vec::with_capacity(slots.len());
    #[allow(clippy::too_many_arguments)]
    fn go(i: usize, used: usize, slots: &[usize], over: &[Vec<usize>], sizes: &[usize], rest: &[usize], max: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if i == slots.len() {
            out.push(cur.clone());
            return;
        }
        for &y in &over[slots[i]] {
            if used + sizes[y] + rest[i + 1] <= max {
                cur.push(y);
                go(i + 1, used + sizes[y], slots, over, sizes, rest, max, cur, out);
                cur.pop();
            }
        }
    }
    go(0, 0, slots, over, &sizes, &rest, max, &mut cur, &mut out);
    out
}

/// `A ⊗ B`, keeping only elements with at most `max_leaves` leaves when given.
pub fn tensor_bounded<M: Monad>(a: &TGraph<M>, b: &TGraph<M>, max_leaves: Option<usize>) -> Result<Tensor<M>> {
    if a.base != b.base || a.monad != b.monad {
        return structural("tensor of T-graphs over different bases");
    }
    let m = &a.monad;
    let over = fibres(b.base.len(), &b.gamma);
    let mut pairs = Vec::new();
    for x in 0..a.len() {
        match max_leaves {
            None => pairs.extend(refills(m, &a.delta[x], &over).into_iter().map(|w| (x, w))),
            Some(k) => {
                let slots = m.leaves(&a.delta[x]);
                for pick in bounded_picks(b, &slots, &over, k) {
                    pairs.push((x, m.refill(&a.delta[x], pick)));
                }
            }
        }
    }
    let labels = pairs
        .iter()
        .map(|(x, w)| format!("<{}|{}>", a.carrier.label(*x), m.show(w, |&y| b.carrier.label(y).to_string())))
        .collect();
    let gamma = pairs.iter().map(|(x, _)| a.gamma[*x]).collect();
    let delta = pairs.iter().map(|(_, w)| m.mu(m.map(w, |&y| b.delta[y].clone()))).collect();
    let graph = TGraph { monad: m.clone(), base: a.base.clone(), carrier: FinSet::fresh("AxB", labels), gamma, delta };
    let index = pairs.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    Ok(Tensor { graph, pairs, index })
}

/// A carrier map of T-graphs over the identity of the base.
pub fn is_graph_map<M: Monad>(src: &TGraph<M>, tgt: &TGraph<M>, f: &[usize]) -> bool {
    f.len() == src.len()
        && (0..src.len()).all(|x| {
            f[x] < tgt.len() && tgt.gamma[f[x]] == src.gamma[x] && tgt.delta[f[x]] == src.delta[x]
        })
}

/// `α: (A⊗B)⊗C → A⊗(B⊗C)`, `((a,w),v) ↦ (a, w')` where `w'` pairs each
/// `b` in `w` with its block of `v`.
pub fn associator<M: Monad>(ab_c: &Tensor<M>, ab: &Tensor<M>, a_bc: &Tensor<M>, bc: &Tensor<M>, b: &TGraph<M>) -> Result<Vec<usize>> {
    let m = &b.monad;
    let mut out = Vec::with_capacity(ab_c.pairs.len());
    for (x, v) in &ab_c.pairs {
        let (a, w) = &ab.pairs[*x];
        let shape = m.map(w, |&y| b.delta[y].clone());
        let nested = m.unflatten(&shape, v).ok_or_else(|| crate::Error::Inconsistent("block split failed".into()))?;
        let blocks = m.leaves(&nested);
        let inner: Vec<usize> = m
            .leaves(w)
            .iter()
            .zip(blocks)
            .map(|(&y, blk)| bc.lookup(y, &blk).ok_or_else(|| crate::Error::Inconsistent("missing inner pair".into())))
            .collect::<Result<_>>()?;
        let w2 = m.refill(w, inner);
        out.push(a_bc.lookup(*a, &w2).ok_or_else(|| crate::Error::Inconsistent("missing associated pair".into()))?);
    }
    Ok(out)
}

/// `λ: I ⊗ A → A`.
pub fn left_unitor<M: Monad>(ia: &Tensor<M>) -> Vec<usize> {
    ia.pairs.iter().map(|(_, w)| ia.graph.monad.leaves(w)[0]).collect()
}

/// `ρ: A ⊗ I → A`.
pub fn right_unitor<M: Monad>(ai: &Tensor<M>) -> Vec<usize> {
    ai.pairs.iter().map(|(a, _)| *a).collect()
}

/// Action `A ⋆ X`: pairs `(a, w)` with `w ∈ T(X)` over `δ(a)`, typed by `γ(a)`.
pub fn act<M: Monad>(a: &TGraph<M>, x: &SliceObj) -> Result<(SliceObj, Vec<(usize, M::T<usize>)>)> {
    if x.base() != &a.base {
        return structural("action on a slice over a different base");
    }
    let m = &a.monad;
    let over = x.d.fibers();
    let mut pairs = Vec::new();
    for e in 0..a.len() {
        for w in refills(m, &a.delta[e], &over) {
            pairs.push((e, w));
        }
    }
    let labels = pairs
        .iter()
        .map(|(e, w)| format!("<{}|{}>", a.carrier.label(*e), m.show(w, |&y| x.total().label(y).to_string())))
        .collect();
    let table = pairs.iter().map(|(e, _)| a.gamma[*e]).collect();
    let d = FinMap::new(FinSet::fresh("A*X", labels), a.base.clone(), table)?;
    Ok((SliceObj::new(d), pairs))
}

/// `u^*(B)` for `u: O → Q`: triples `(b, o, w)` with `u(o) = γ(b)` and
/// `T(u)(w) = δ(b)`, with the prone map to `B`.
pub fn reindex<M: Monad>(u: &FinMap, b: &TGraph<M>) -> Result<(TGraph<M>, Vec<usize>)> {
    if u.cod() != &b.base {
        return structural("reindexing along a map into a different base");
    }
    let m = &b.monad;
    let over = u.fibers();
    let mut labels = Vec::new();
    let (mut gamma, mut delta, mut proj) = (Vec::new(), Vec::new(), Vec::new());
    for y in 0..b.len() {
        for &o in &over[b.gamma[y]] {
            for w in refills(m, &b.delta[y], &over) {
                labels.push(format!("({}|{};{})", b.carrier.label(y), u.dom().label(o), m.show(&w, |&i| u.dom().label(i).to_string())));
                gamma.push(o);
                delta.push(w);
                proj.push(y);
            }
        }
    }
    let g = TGraph { monad: m.clone(), base: u.dom().clone(), carrier: FinSet::fresh("u*B", labels), gamma, delta };
    Ok((g, proj))
}

/// Pull an `S`-graph back along a monad morphism `ξ: T → S` (identity on
/// the base functor): edges `(a, w)` with `w ∈ T(O)` and `ξ(w) = δ(a)`.
/// The unit law `ξ∘η_T = η_S` and the multiplication law are checked on
/// all elements with at most `max_leaves` leaves.
pub fn gph_of_monad_morphism<S: Monad, T: Monad>(
    t: &T,
    xi: impl Fn(&T::T<usize>) -> S::T<usize>,
    g: &TGraph<S>,
    max_leaves: usize,
) -> Result<TGraph<T>> {
    let s = &g.monad;
    let n = g.base.len();
    for o in 0..n {
        if xi(&t.eta(o)) != s.eta(o) {
            return invalid(format!("ξ∘η ≠ η at sort {:?}", g.base.label(o)));
        }
    }
    let elems = t.enumerate(n, max_leaves);
    for outer in t.enumerate(elems.len(), 2) {
        let tt = t.map(&outer, |&i| elems[i].clone());
        let left = xi(&t.mu(tt.clone()));
        // μ_S ∘ ξ ∘ T(ξ), with ξ at S(O) read through the leaves
        let inner = t.map(&tt, &xi);
        let idx: Vec<S::T<usize>> = t.leaves(&inner);
        let positions = t.refill(&inner, (0..idx.len()).collect::<Vec<usize>>());
        let outer_s = xi(&positions);
        let right = s.mu(s.map(&outer_s, |&k| idx[k].clone()));
        if left != right {
            return invalid(format!("ξ does not preserve multiplication at {tt:?}"));
        }
    }
    let mut labels = Vec::new();
    let (mut gamma, mut delta) = (Vec::new(), Vec::new());
    for a in 0..g.len() {
        for w in &elems {
            if xi(w) == g.delta[a] {
                labels.push(format!("({}|{})", g.carrier.label(a), t.show(w, |&o| g.base.label(o).to_string())));
                gamma.push(g.gamma[a]);
                delta.push(w.clone());
            }
        }
    }
    TGraph::new(t.clone(), g.base.clone(), FinSet::fresh("Gph", labels), gamma, delta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::monad::{Identity, List};

    fn one_binary() -> TGraph<List> {
        let o = FinSet::range("O", 1);
        TGraph::new(List, o, FinSet::from_strs("A", &["a"]).unwrap(), vec![0], vec![vec![0, 0]]).unwrap()
    }

    #[test]
    fn right_unit_is_iso() {
        let a = one_binary();
        let ai = tensor(&a, &TGraph::unit(List, &a.base)).unwrap();
        assert_eq!(ai.graph.len(), 1);
        assert!(is_graph_map(&ai.graph, &a, &right_unitor(&ai)));
    }

    #[test]
    fn self_tensor_of_binary() {
        let a = one_binary();
        let aa = tensor(&a, &a).unwrap();
        assert_eq!(aa.graph.len(), 1);
        assert_eq!(aa.graph.delta[0], vec![0, 0, 0, 0]);
    }

    #[test]
    fn identity_monad_composes_spans() {
        let o = FinSet::from_strs("O", &["x", "y", "z"]).unwrap();
        let g = TGraph::new(Identity, o.clone(), FinSet::from_strs("E", &["f", "g", "h"]).unwrap(), vec![1, 2, 2], vec![0, 1, 0]).unwrap();
        // only g follows another edge
        let gg = tensor(&g, &g).unwrap();
        assert_eq!(gg.graph.len(), 1);
        assert_eq!(gg.graph.carrier.label(0), "<g|f>");
    }

    #[test]
    fn unit_law_for_monad_morphisms() {
        let o = FinSet::range("O", 2);
        let g = TGraph::new(List, o, FinSet::from_strs("A", &["u", "b"]).unwrap(), vec![0, 0], vec![vec![1], vec![0, 0]]).unwrap();
        let plain = gph_of_monad_morphism(&Identity, |&x| vec![x], &g, 1).unwrap();
        assert_eq!(plain.len(), 1);
        assert!(gph_of_monad_morphism(&Identity, |&x| vec![x, x], &g, 1).is_err());
    }
}
