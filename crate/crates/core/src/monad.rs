//! Monads on finite sets, described by their shapes: an element of `T(X)` is
//! a shape with an ordered list of leaves in `X`.

use std::fmt::Debug;
use std::hash::Hash;

/// Anything that can sit at a leaf.
pub trait Leaf: Clone + Eq + Hash + Ord + Debug + Send + Sync {}
impl<T: Clone + Eq + Hash + Ord + Debug + Send + Sync> Leaf for T {}

/// A monad whose elements are shapes filled with leaves.
///
/// Contract: `leaves(mu(tt))` is the concatenation of the leaves of the inner
/// elements in the order of `leaves(tt)`, and `refill` keeps the shape.
pub trait Monad: Clone + Debug + PartialEq + Send + Sync {
    type T<X: Leaf>: Leaf;

    fn name(&self) -> &'static str;
    fn eta<X: Leaf>(&self, x: X) -> Self::T<X>;
    fn mu<X: Leaf>(&self, tt: Self::T<Self::T<X>>) -> Self::T<X>;
    fn leaves<X: Leaf>(&self, t: &Self::T<X>) -> Vec<X>;
    /// Same shape, leaves replaced in order. `ys` must have one entry per leaf.
    fn refill<X: Leaf, Y: Leaf>(&self, t: &Self::T<X>, ys: Vec<Y>) -> Self::T<Y>;
    /// The element with exactly these leaves, if the monad has one.
    fn from_leaves<X: Leaf>(&self, leaves: Vec<X>) -> Option<Self::T<X>>;
    /// Leaf counts admitted up to `max`.
    fn leaf_counts(&self, max: usize) -> Vec<usize>;

    fn map<X: Leaf, Y: Leaf>(&self, t: &Self::T<X>, f: impl Fn(&X) -> Y) -> Self::T<Y> {
        let ys = self.leaves(t).iter().map(f).collect();
        self.refill(t, ys)
    }

    fn show<X: Leaf>(&self, t: &Self::T<X>, f: impl Fn(&X) -> String) -> String {
        let parts: Vec<String> = self.leaves(t).iter().map(f).collect();
        format!("[{}]", parts.join(","))
    }

    /// Split `flat` along a nested `shape` with `mu(shape) ≈ flat` in shape.
    fn unflatten<X: Leaf, Y: Leaf>(&self, shape: &Self::T<Self::T<Y>>, flat: &Self::T<X>) -> Option<Self::T<Self::T<X>>> {
        let mut xs = self.leaves(flat).into_iter();
        let mut inner = Vec::new();
        for t in self.leaves(shape) {
            let k = self.leaves(&t).len();
            let chunk: Vec<X> = xs.by_ref().take(k).collect();
            if chunk.len() != k {
                return None;
            }
            inner.push(self.refill(&t, chunk));
        }
        if xs.next().is_some() {
            return None;
        }
        Some(self.refill(shape, inner))
    }

    /// Every element over `{0..n}` with at most `max_leaves` leaves.
    fn enumerate(&self, n: usize, max_leaves: usize) -> Vec<Self::T<usize>> {
        let mut out = Vec::new();
        for k in self.leaf_counts(max_leaves) {
            for word in crate::finset::all_functions(k, n) {
                if let Some(t) = self.from_leaves(word) {
                    out.push(t);
                }
            }
        }
        out
    }
}

/// The identity monad: `T(X) = X`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct Identity;

impl Monad for Identity {
    type T<X: Leaf> = X;

    fn name(&self) -> &'static str {
        "identity"
    }
    fn eta<X: Leaf>(&self, x: X) -> X {
        x
    }
    fn mu<X: Leaf>(&self, tt: X) -> X {
        tt
    }
    fn leaves<X: Leaf>(&self, t: &X) -> Vec<X> {
        vec![t.clone()]
    }
    fn refill<X: Leaf, Y: Leaf>(&self, _: &X, mut ys: Vec<Y>) -> Y {
        assert_eq!(ys.len(), 1, "identity monad has exactly one leaf");
        ys.pop().unwrap()
    }
    fn from_leaves<X: Leaf>(&self, mut leaves: Vec<X>) -> Option<X> {
        (leaves.len() == 1).then(|| leaves.pop().unwrap())
    }
    fn leaf_counts(&self, max: usize) -> Vec<usize> {
        if max >= 1 {
            vec![1]
        } else {
            vec![]
        }
    }
    fn show<X: Leaf>(&self, t: &X, f: impl Fn(&X) -> String) -> String {
        f(t)
    }
}

/// The free monoid monad: `T(X) = X*`.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct List;

impl Monad for List {
    type T<X: Leaf> = Vec<X>;

    fn name(&self) -> &'static str {
        "list"
    }
    fn eta<X: Leaf>(&self, x: X) -> Vec<X> {
        vec![x]
    }
    fn mu<X: Leaf>(&self, tt: Vec<Vec<X>>) -> Vec<X> {
        tt.into_iter().flatten().collect()
    }
    fn leaves<X: Leaf>(&self, t: &Vec<X>) -> Vec<X> {
        t.clone()
    }
    fn refill<X: Leaf, Y: Leaf>(&self, t: &Vec<X>, ys: Vec<Y>) -> Vec<Y> {
        assert_eq!(ys.len(), t.len(), "refill with the wrong number of leaves");
        ys
    }
    fn from_leaves<X: Leaf>(&self, leaves: Vec<X>) -> Option<Vec<X>> {
        Some(leaves)
    }
    fn leaf_counts(&self, max: usize) -> Vec<usize> {
        (0..=max).collect()
    }
}

/// Unit and associativity laws on all elements over `{0..n}` with at most
/// `max_leaves` leaves (two levels deep); returns the failing cases.
pub fn check_monad_laws<M: Monad>(m: &M, n: usize, max_leaves: usize) -> Vec<String> {
    let mut bad = Vec::new();
    let elems = m.enumerate(n, max_leaves);
    for t in &elems {
        if m.mu(m.eta(t.clone())) != *t {
            bad.push(format!("μ∘η_T ≠ 1 at {t:?}"));
        }
        if m.mu(m.map(t, |x| m.eta(*x))) != *t {
            bad.push(format!("μ∘T(η) ≠ 1 at {t:?}"));
        }
    }
    let tts: Vec<M::T<M::T<usize>>> =
        m.enumerate(elems.len(), 2).into_iter().take(24).map(|o| m.map(&o, |&i| elems[i].clone())).collect();
    for outer in m.enumerate(tts.len(), 2) {
        let ttt = m.map(&outer, |&i| tts[i].clone());
        let left = m.mu(m.mu(ttt.clone()));
        let right = m.mu(m.map(&ttt, |x| m.mu(x.clone())));
        if left != right {
            bad.push(format!("μ∘μ ≠ μ∘T(μ) at {ttt:?}"));
        }
    }
    bad
}
