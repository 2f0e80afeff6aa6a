//! Finite sets with labeled elements, total functions, and the few limits and
//! colimits the rest of the crate needs.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use crate::error::{structural, Result};

struct Inner {
    id: String,
    elems: Vec<String>,
    index: HashMap<String, usize>,
}

/// A finite set of distinct labels in a fixed (construction) order.
#[derive(Clone)]
pub struct FinSet(Arc<Inner>);

impl PartialEq for FinSet {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.0, &other.0) || (self.0.id == other.0.id && self.0.elems == other.0.elems)
    }
}
impl Eq for FinSet {}

impl fmt::Debug for FinSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.0.id, self.0.elems)
    }
}

/// Canonical label of a tuple of labels.
pub fn tuple_label<S: AsRef<str>>(parts: &[S]) -> String {
    let mut s = String::from("(");
    for (i, p) in parts.iter().enumerate() {
        if i > 0 {
            s.push(',');
        }
        s.push_str(p.as_ref());
    }
    s.push(')');
    s
}

impl FinSet {
    pub fn new(id: impl Into<String>, elems: Vec<String>) -> Result<FinSet> {
        let id = id.into();
        let mut index = HashMap::with_capacity(elems.len());
        for (i, e) in elems.iter().enumerate() {
            if index.insert(e.clone(), i).is_some() {
                return structural(format!("duplicate element {e:?} in set {id:?}"));
            }
        }
        Ok(FinSet(Arc::new(Inner { id, elems, index })))
    }

    /// Like [`FinSet::new`] for labels that are distinct by construction.
    pub(crate) fn fresh(id: impl Into<String>, elems: Vec<String>) -> FinSet {
        FinSet::new(id, elems).expect("generated labels are distinct")
    }

    pub fn from_strs(id: &str, elems: &[&str]) -> Result<FinSet> {
        FinSet::new(id, elems.iter().map(|s| s.to_string()).collect())
    }

    /// `{0,…,n-1}` labeled by numerals.
    pub fn range(id: &str, n: usize) -> FinSet {
        FinSet::fresh(id, (0..n).map(|i| i.to_string()).collect())
    }

    pub fn empty(id: &str) -> FinSet {
        FinSet::fresh(id, vec![])
    }

    pub fn terminal() -> FinSet {
        FinSet::fresh("1", vec!["*".into()])
    }

    pub fn id(&self) -> &str {
        &self.0.id
    }

    pub fn with_id(&self, id: &str) -> FinSet {
        FinSet(Arc::new(Inner { id: id.into(), elems: self.0.elems.clone(), index: self.0.index.clone() }))
    }

    pub fn len(&self) -> usize {
        self.0.elems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.elems.is_empty()
    }

    pub fn elems(&self) -> &[String] {
        &self.0.elems
    }

    pub fn label(&self, i: usize) -> &str {
        &self.0.elems[i]
    }

    pub fn index_of(&self, label: &str) -> Option<usize> {
        self.0.index.get(label).copied()
    }

    pub fn require(&self, label: &str) -> Result<usize> {
        match self.index_of(label) {
            Some(i) => Ok(i),
            None => structural(format!("{label:?} is not an element of {}", self.id())),
        }
    }

    pub fn contains(&self, label: &str) -> bool {
        self.0.index.contains_key(label)
    }
}

/// A total function between finite sets, stored positionally.
#[derive(Clone, PartialEq, Eq)]
pub struct FinMap {
    dom: FinSet,
    cod: FinSet,
    table: Vec<usize>,
}

impl fmt::Debug for FinMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let pairs: Vec<String> =
            self.table.iter().enumerate().map(|(i, &j)| format!("{}↦{}", self.dom.label(i), self.cod.label(j))).collect();
        write!(f, "{}→{} {{{}}}", self.dom.id(), self.cod.id(), pairs.join(", "))
    }
}

impl FinMap {
    pub fn new(dom: FinSet, cod: FinSet, table: Vec<usize>) -> Result<FinMap> {
        if table.len() != dom.len() {
            return structural(format!("map {}→{} is not total", dom.id(), cod.id()));
        }
        if let Some(&j) = table.iter().find(|&&j| j >= cod.len()) {
            return structural(format!("image index {j} outside {}", cod.id()));
        }
        Ok(FinMap { dom, cod, table })
    }

    pub fn from_labels(dom: &FinSet, cod: &FinSet, pairs: &[(&str, &str)]) -> Result<FinMap> {
        let mut table = vec![usize::MAX; dom.len()];
        for (a, b) in pairs {
            table[dom.require(a)?] = cod.require(b)?;
        }
        if let Some(i) = table.iter().position(|&j| j == usize::MAX) {
            return structural(format!("map is missing an image for {:?}", dom.label(i)));
        }
        FinMap::new(dom.clone(), cod.clone(), table)
    }

    pub fn from_fn(dom: &FinSet, cod: &FinSet, f: impl Fn(usize) -> usize) -> Result<FinMap> {
        FinMap::new(dom.clone(), cod.clone(), (0..dom.len()).map(f).collect())
    }

    pub fn identity(s: &FinSet) -> FinMap {
        FinMap { dom: s.clone(), cod: s.clone(), table: (0..s.len()).collect() }
    }

    /// The unique map into a one-element set.
    pub fn to_terminal(s: &FinSet, one: &FinSet) -> FinMap {
        assert_eq!(one.len(), 1);
        FinMap { dom: s.clone(), cod: one.clone(), table: vec![0; s.len()] }
    }

    pub fn dom(&self) -> &FinSet {
        &self.dom
    }

    pub fn cod(&self) -> &FinSet {
        &self.cod
    }

    pub fn table(&self) -> &[usize] {
        &self.table
    }

    pub fn apply(&self, i: usize) -> usize {
        self.table[i]
    }

    pub fn apply_label(&self, label: &str) -> Option<&str> {
        self.dom.index_of(label).map(|i| self.cod.label(self.table[i]))
    }

    /// `self ∘ first`.
    pub fn after(&self, first: &FinMap) -> Result<FinMap> {
        if first.cod != self.dom {
            return structural(format!("cannot compose {}→{} after {}→{}", self.dom.id(), self.cod.id(), first.dom.id(), first.cod.id()));
        }
        Ok(FinMap { dom: first.dom.clone(), cod: self.cod.clone(), table: first.table.iter().map(|&j| self.table[j]).collect() })
    }

    pub fn fiber(&self, j: usize) -> Vec<usize> {
        (0..self.table.len()).filter(|&i| self.table[i] == j).collect()
    }

    pub fn fibers(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.cod.len()];
        for (i, &j) in self.table.iter().enumerate() {
            out[j].push(i);
        }
        out
    }

    pub fn is_injective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        self.table.iter().all(|&j| !std::mem::replace(&mut seen[j], true))
    }

    pub fn is_surjective(&self) -> bool {
        let mut seen = vec![false; self.cod.len()];
        for &j in &self.table {
            seen[j] = true;
        }
        seen.into_iter().all(|b| b)
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.len() == self.cod.len() && self.is_injective()
    }

    pub fn inverse(&self) -> Result<FinMap> {
        if !self.is_bijective() {
            return structural(format!("map {}→{} is not a bijection", self.dom.id(), self.cod.id()));
        }
        let mut inv = vec![0; self.table.len()];
        for (i, &j) in self.table.iter().enumerate() {
            inv[j] = i;
        }
        Ok(FinMap { dom: self.cod.clone(), cod: self.dom.clone(), table: inv })
    }
}

/// An object `d: X → O` of the slice over `O`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SliceObj {
    pub d: FinMap,
}

impl SliceObj {
    pub fn new(d: FinMap) -> SliceObj {
        SliceObj { d }
    }

    pub fn total(&self) -> &FinSet {
        self.d.dom()
    }

    pub fn base(&self) -> &FinSet {
        self.d.cod()
    }

    pub fn len(&self) -> usize {
        self.d.dom().len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn typ(&self, x: usize) -> usize {
        self.d.apply(x)
    }

    /// The terminal object `1_O`.
    pub fn terminal(o: &FinSet) -> SliceObj {
        SliceObj { d: FinMap::identity(o) }
    }

    /// Object with `counts[o]` elements over each `o`, labeled `o.k`.
    pub fn with_fiber_sizes(o: &FinSet, counts: &[usize]) -> SliceObj {
        let mut labels = Vec::new();
        let mut table = Vec::new();
        for (j, &c) in counts.iter().enumerate() {
            for k in 0..c {
                labels.push(format!("{}.{}", o.label(j), k));
                table.push(j);
            }
        }
        let x = FinSet::fresh("X", labels);
        SliceObj { d: FinMap::new(x, o.clone(), table).expect("typed into base") }
    }

    /// `u_!`: post-compose the typing with `u`.
    pub fn push(&self, u: &FinMap) -> Result<SliceObj> {
        Ok(SliceObj { d: u.after(&self.d)? })
    }

    /// `u^*`: elements `(o, y)` with `u(o) = d(y)`, typed by `o`.
    pub fn pull(&self, u: &FinMap) -> Result<SliceObj> {
        let (_, l, _) = pullback(u, &self.d)?;
        Ok(SliceObj { d: l })
    }

    /// `u_*`: over each `q`, the families `(y_o)_{u(o)=q}` with `y_o` over `o`.
    pub fn dependent_product(&self, u: &FinMap) -> Result<SliceObj> {
        if u.dom() != self.base() {
            return structural("dependent product along a map out of a different base");
        }
        let over = self.d.fibers();
        let mut labels = Vec::new();
        let mut table = Vec::new();
        for (q, fib) in u.fibers().iter().enumerate() {
            let choices: Vec<&Vec<usize>> = fib.iter().map(|&o| &over[o]).collect();
            for pick in product_indices(&choices.iter().map(|c| c.len()).collect::<Vec<_>>()) {
                let parts: Vec<&str> = pick.iter().enumerate().map(|(i, &k)| self.total().label(choices[i][k])).collect();
                let mut all = vec![u.cod().label(q)];
                all.extend(parts);
                labels.push(tuple_label(&all));
                table.push(q);
            }
        }
        let x = FinSet::fresh(format!("Pi({})", self.total().id()), labels);
        Ok(SliceObj { d: FinMap::new(x, u.cod().clone(), table)? })
    }
}

/// A map of slices `src → tgt` over a common base.
#[derive(Clone, Debug)]
pub struct SliceMap {
    pub src: SliceObj,
    pub tgt: SliceObj,
    pub map: FinMap,
}

impl SliceMap {
    pub fn new(src: SliceObj, tgt: SliceObj, map: FinMap) -> Result<SliceMap> {
        if map.dom() != src.total() || map.cod() != tgt.total() || src.base() != tgt.base() {
            return structural("slice map does not match its endpoints");
        }
        for x in 0..src.len() {
            if tgt.typ(map.apply(x)) != src.typ(x) {
                return structural(format!("slice map does not preserve the type of {:?}", src.total().label(x)));
            }
        }
        Ok(SliceMap { src, tgt, map })
    }

    /// All slice maps `src → tgt`.
    pub fn all(src: &SliceObj, tgt: &SliceObj) -> Vec<SliceMap> {
        let over = tgt.d.fibers();
        let choices: Vec<usize> = (0..src.len()).map(|x| over[src.typ(x)].len()).collect();
        product_indices(&choices)
            .map(|pick| {
                let table = pick.iter().enumerate().map(|(x, &k)| over[src.typ(x)][k]).collect();
                SliceMap { src: src.clone(), tgt: tgt.clone(), map: FinMap::new(src.total().clone(), tgt.total().clone(), table).unwrap() }
            })
            .collect()
    }
}

/// Mixed-radix enumeration of `Π_i {0..sizes[i]}` in lexicographic order.
pub fn product_indices(sizes: &[usize]) -> impl Iterator<Item = Vec<usize>> {
    let sizes = sizes.to_vec();
    let mut cur = if sizes.iter().all(|&s| s > 0) { Some(vec![0usize; sizes.len()]) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = sizes.len();
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < sizes[i] {
                break;
            }
            c[i] = 0;
        }
        Some(out)
    })
}

/// Every function `{0..m} → {0..n}` as an image table, in odometer order.
pub fn all_functions(m: usize, n: usize) -> impl Iterator<Item = Vec<usize>> {
    let mut cur = if m == 0 || n > 0 { Some(vec![0usize; m]) } else { None };
    std::iter::from_fn(move || {
        let out = cur.clone()?;
        let c = cur.as_mut().unwrap();
        let mut i = m;
        loop {
            if i == 0 {
                cur = None;
                break;
            }
            i -= 1;
            c[i] += 1;
            if c[i] < n {
                break;
            }
            c[i] = 0;
        }
        Some(out)
    })
}

/// Canonical pullback `{(a,b) : f(a) = g(b)}`, ordered lexicographically.
pub fn pullback(f: &FinMap, g: &FinMap) -> Result<(FinSet, FinMap, FinMap)> {
    if f.cod != g.cod {
        return structural(format!("pullback of maps into different sets {} and {}", f.cod.id(), g.cod.id()));
    }
    let gf = g.fibers();
    let mut labels = Vec::new();
    let mut l = Vec::new();
    let mut r = Vec::new();
    for a in 0..f.dom.len() {
        for &b in &gf[f.apply(a)] {
            labels.push(tuple_label(&[f.dom.label(a), g.dom.label(b)]));
            l.push(a);
            r.push(b);
        }
    }
    let p = FinSet::fresh(format!("{}x{}", f.dom.id(), g.dom.id()), labels);
    let pl = FinMap::new(p.clone(), f.dom.clone(), l)?;
    let pr = FinMap::new(p.clone(), g.dom.clone(), r)?;
    Ok((p, pl, pr))
}

pub fn product(a: &FinSet, b: &FinSet) -> (FinSet, FinMap, FinMap) {
    let one = FinSet::terminal();
    pullback(&FinMap::to_terminal(a, &one), &FinMap::to_terminal(b, &one)).expect("same terminal codomain")
}

/// A commuting square `left ← corner → right` over `left → bottom ← right`.
#[derive(Clone, Debug)]
pub struct Square {
    pub p1: FinMap,
    pub p2: FinMap,
    pub f: FinMap,
    pub g: FinMap,
}

impl Square {
    pub fn new(p1: FinMap, p2: FinMap, f: FinMap, g: FinMap) -> Result<Square> {
        if p1.dom != p2.dom || p1.cod != f.dom || p2.cod != g.dom || f.cod != g.cod {
            return structural("square legs do not match up");
        }
        for c in 0..p1.dom.len() {
            if f.apply(p1.apply(c)) != g.apply(p2.apply(c)) {
                return structural(format!("square does not commute at {:?}", p1.dom.label(c)));
            }
        }
        Ok(Square { p1, p2, f, g })
    }

    /// Number of corner elements over each agreeing pair `(x, y)`.
    fn cover_counts(&self) -> HashMap<(usize, usize), usize> {
        let mut m = HashMap::new();
        for c in 0..self.p1.dom.len() {
            *m.entry((self.p1.apply(c), self.p2.apply(c))).or_insert(0) += 1;
        }
        m
    }

    fn agreeing_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let gf = self.g.fibers();
        (0..self.f.dom.len()).flat_map(move |x| gf[self.f.apply(x)].clone().into_iter().map(move |y| (x, y)))
    }

    /// Agreeing pairs with no corner element over them.
    pub fn weak_pullback_failures(&self) -> Vec<(usize, usize)> {
        let cov = self.cover_counts();
        self.agreeing_pairs().filter(|p| !cov.contains_key(p)).collect()
    }

    pub fn is_weak_pullback(&self) -> bool {
        self.weak_pullback_failures().is_empty()
    }

    /// Weak pullback with unique fillers.
    pub fn is_pullback(&self) -> bool {
        let cov = self.cover_counts();
        let mut n = 0;
        for p in self.agreeing_pairs() {
            match cov.get(&p) {
                Some(1) => n += 1,
                _ => return false,
            }
        }
        n == self.p1.dom.len()
    }
}

pub fn is_weak_pullback(sq: &Square) -> bool {
    sq.is_weak_pullback()
}

/// Tagged disjoint union; blocks appear in argument order.
pub fn coproduct(xs: &[FinSet]) -> (FinSet, Vec<FinMap>) {
    let mut labels = Vec::new();
    let mut starts = Vec::new();
    for (i, x) in xs.iter().enumerate() {
        starts.push(labels.len());
        for e in x.elems() {
            labels.push(tuple_label(&[i.to_string().as_str(), e]));
        }
    }
    let id = xs.iter().map(|x| x.id().to_string()).collect::<Vec<_>>().join("+");
    let sum = FinSet::fresh(if id.is_empty() { "0".to_string() } else { id }, labels);
    let inj = xs
        .iter()
        .zip(starts)
        .map(|(x, s)| FinMap::new(x.clone(), sum.clone(), (s..s + x.len()).collect()).expect("block in range"))
        .collect();
    (sum, inj)
}

/// Union-find over `0..n`, always keeping the smallest index as root.
#[derive(Clone, Debug)]
pub struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    pub fn new(n: usize) -> UnionFind {
        UnionFind { parent: (0..n).collect() }
    }

    pub fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }

    pub fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            self.parent[hi] = lo;
        }
    }

    /// Class index of each element, classes numbered by their minimal member.
    pub fn classes(&mut self) -> (Vec<usize>, Vec<usize>) {
        let n = self.parent.len();
        let mut reps = Vec::new();
        let mut class_of_root = HashMap::new();
        let mut cls = vec![0; n];
        for x in 0..n {
            let r = self.find(x);
            let c = *class_of_root.entry(r).or_insert_with(|| {
                reps.push(r);
                reps.len() - 1
            });
            cls[x] = c;
        }
        (cls, reps)
    }
}

/// Quotient by the equivalence generated by `rel`; each class is labeled by
/// its order-minimal member.
pub fn quotient(s: &FinSet, rel: &[(String, String)]) -> Result<(FinSet, FinMap)> {
    let mut uf = UnionFind::new(s.len());
    for (a, b) in rel {
        uf.union(s.require(a)?, s.require(b)?);
    }
    let (cls, reps) = uf.classes();
    let q = FinSet::fresh(format!("{}/~", s.id()), reps.iter().map(|&r| s.label(r).to_string()).collect());
    let proj = FinMap::new(s.clone(), q.clone(), cls)?;
    Ok((q, proj))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: &str, e: &[&str]) -> FinSet {
        FinSet::from_strs(id, e).unwrap()
    }

    #[test]
    fn duplicates_rejected() {
        assert!(FinSet::from_strs("X", &["a", "a"]).is_err());
    }

    #[test]
    fn product_over_terminal() {
        let one = set("1", &["*"]);
        let x = set("X", &["x", "y"]);
        let y = set("Y", &["1", "2", "3"]);
        let (p, _, _) = pullback(&FinMap::to_terminal(&x, &one), &FinMap::to_terminal(&y, &one)).unwrap();
        assert_eq!(p.len(), 6);
        assert_eq!(p.label(0), "(x,1)");
        assert_eq!(p.label(1), "(x,2)");
    }

    #[test]
    fn pullback_along_identity() {
        let o = set("O", &["a", "b"]);
        let b = set("B", &["1", "2", "3"]);
        let g = FinMap::new(b.clone(), o.clone(), vec![0, 1, 1]).unwrap();
        let (p, l, r) = pullback(&FinMap::identity(&o), &g).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(r.table(), &[0, 1, 2]);
        assert_eq!(l.table(), g.table());
    }

    #[test]
    fn pullback_codomain_mismatch() {
        let a = set("A", &["a"]);
        let b = set("B", &["b"]);
        assert!(pullback(&FinMap::identity(&a), &FinMap::identity(&b)).is_err());
    }

    #[test]
    fn weak_pullback_with_redundant_element() {
        let one = set("1", &["*"]);
        let x = set("X", &["x"]);
        let c = set("C", &["p", "q"]);
        let sq = Square::new(
            FinMap::to_terminal(&c, &x),
            FinMap::to_terminal(&c, &x),
            FinMap::to_terminal(&x, &one),
            FinMap::to_terminal(&x, &one),
        )
        .unwrap();
        assert!(sq.is_weak_pullback());
        assert!(!sq.is_pullback());
    }

    #[test]
    fn missing_pair_detected() {
        let o = set("O", &["a", "b"]);
        let x = set("X", &["1", "2", "3"]);
        let y = set("Y", &["u", "v"]);
        let f = FinMap::new(x.clone(), o.clone(), vec![0, 1, 0]).unwrap();
        let g = FinMap::new(y.clone(), o.clone(), vec![0, 0]).unwrap();
        let (p, l, r) = pullback(&f, &g).unwrap();
        assert_eq!(p.len(), 4);
        let keep: Vec<usize> = (1..p.len()).collect();
        let c = FinSet::fresh("C", keep.iter().map(|&i| p.label(i).to_string()).collect());
        let l2 = FinMap::new(c.clone(), x, keep.iter().map(|&i| l.apply(i)).collect()).unwrap();
        let r2 = FinMap::new(c, y, keep.iter().map(|&i| r.apply(i)).collect()).unwrap();
        let sq = Square::new(l2, r2, f, g).unwrap();
        assert!(!sq.is_weak_pullback());
        assert_eq!(sq.weak_pullback_failures().len(), 1);
    }

    #[test]
    fn non_commuting_square_rejected() {
        let o = set("O", &["a", "b"]);
        let x = set("X", &["1"]);
        let f = FinMap::new(x.clone(), o.clone(), vec![0]).unwrap();
        let g = FinMap::new(x.clone(), o, vec![1]).unwrap();
        assert!(Square::new(FinMap::identity(&x), FinMap::identity(&x), f, g).is_err());
    }

    #[test]
    fn coproduct_blocks() {
        let xs: Vec<FinSet> = [2, 1, 3].iter().enumerate().map(|(i, &n)| FinSet::range(&format!("X{i}"), n)).collect();
        let (s, inj) = coproduct(&xs);
        assert_eq!(s.len(), 6);
        assert_eq!(inj[0].table(), &[0, 1]);
        assert_eq!(inj[1].table(), &[2]);
        assert_eq!(inj[2].table(), &[3, 4, 5]);
        let (e, inj) = coproduct(&[]);
        assert!(e.is_empty() && inj.is_empty());
    }

    #[test]
    fn quotient_classes() {
        let s = set("S", &["1", "2", "3", "4"]);
        let rel = vec![("1".to_string(), "2".to_string()), ("4".to_string(), "3".to_string())];
        let (q, p) = quotient(&s, &rel).unwrap();
        assert_eq!(q.elems(), &["1".to_string(), "3".to_string()]);
        assert_eq!(p.table(), &[0, 0, 1, 1]);
        assert!(quotient(&s, &[("1".into(), "9".into())]).is_err());
        let (q, _) = quotient(&s, &[]).unwrap();
        assert_eq!(q.len(), 4);
    }

    #[test]
    fn all_functions_counts() {
        assert_eq!(all_functions(3, 2).count(), 8);
        assert_eq!(all_functions(0, 0).count(), 1);
        assert_eq!(all_functions(2, 0).count(), 0);
    }
}
