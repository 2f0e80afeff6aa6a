//! Symmetric sets: graded finite sets with right actions of the symmetric
//! groups, equivariant maps, orbits, fixed points, and the slice functors
//! `δ`, `orb`, `fix`, pullback and dependent product.

use std::collections::{BTreeMap, HashMap};

use crate::error::{structural, Result};
use crate::finset::{product_indices, tuple_label, FinMap, FinSet, SliceObj};
use crate::perm::{factorial, Perm};

/// An element of a symmetric set: `(grade, index)`.
pub type Elem = (usize, usize);

#[derive(Clone, Debug, PartialEq, Eq)]
struct Grade {
    set: FinSet,
    /// `act[e * n! + rank(σ)] = e·σ`
    act: Vec<usize>,
}

/// A finitely supported symmetric set. Right action:
/// `(a·σ)·τ = a·(σ∘τ)` with `σ∘τ` meaning "σ after τ".
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymSet {
    grades: BTreeMap<usize, Grade>,
}

impl SymSet {
    /// Build from an action function; the action laws are verified on
    /// the identity and on adjacent transpositions, which generate.
    pub fn new(grades: BTreeMap<usize, FinSet>, act: impl Fn(usize, usize, &Perm) -> usize) -> Result<SymSet> {
        let mut out = BTreeMap::new();
        for (n, set) in grades {
            let perms = Perm::all(n);
            let mut table = Vec::with_capacity(set.len() * perms.len());
            for e in 0..set.len() {
                for s in &perms {
                    let v = act(n, e, s);
                    if v >= set.len() {
                        return structural(format!("action leaves grade {n} of {}", set.id()));
                    }
                    table.push(v);
                }
            }
            out.insert(n, Grade { set, act: table });
        }
        let s = SymSet { grades: out };
        s.validate()?;
        Ok(s)
    }

    /// Every grade acted on trivially.
    pub fn trivial(grades: BTreeMap<usize, FinSet>) -> SymSet {
        SymSet::new(grades, |_, e, _| e).expect("trivial action")
    }

    pub fn empty() -> SymSet {
        SymSet { grades: BTreeMap::new() }
    }

    fn validate(&self) -> Result<()> {
        for (&n, g) in &self.grades {
            let nf = factorial(n);
            let id = Perm::identity(n).rank();
            let gens: Vec<Perm> = (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)).collect();
            let perms = Perm::all(n);
            for e in 0..g.set.len() {
                if g.act[e * nf + id] != e {
                    return structural(format!("identity does not fix {:?}", g.set.label(e)));
                }
                for s in &perms {
                    let es = g.act[e * nf + s.rank()];
                    for t in &gens {
                        let lhs = g.act[es * nf + t.rank()];
                        let rhs = g.act[e * nf + s.compose(t).rank()];
                        if lhs != rhs {
                            return structural(format!(
                                "action law fails at {:?}: (a·{s})·{t} ≠ a·({s}∘{t})",
                                g.set.label(e)
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn grades(&self) -> impl Iterator<Item = (usize, &FinSet)> {
        self.grades.iter().map(|(&n, g)| (n, &g.set))
    }

    pub fn grade_numbers(&self) -> Vec<usize> {
        self.grades.keys().copied().collect()
    }

    pub fn grade(&self, n: usize) -> Option<&FinSet> {
        self.grades.get(&n).map(|g| &g.set)
    }

    pub fn grade_len(&self, n: usize) -> usize {
        self.grade(n).map_or(0, FinSet::len)
    }

    pub fn max_grade(&self) -> Option<usize> {
        self.grades.keys().next_back().copied()
    }

    pub fn len(&self) -> usize {
        self.grades.values().map(|g| g.set.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn elements(&self) -> Vec<Elem> {
        self.grades.iter().flat_map(|(&n, g)| (0..g.set.len()).map(move |e| (n, e))).collect()
    }

    pub fn label(&self, (n, e): Elem) -> &str {
        self.grades[&n].set.label(e)
    }

    pub fn find(&self, n: usize, label: &str) -> Option<usize> {
        self.grade(n).and_then(|s| s.index_of(label))
    }

    pub fn act(&self, n: usize, e: usize, s: &Perm) -> usize {
        debug_assert_eq!(s.n(), n);
        self.grades[&n].act[e * factorial(n) + s.rank()]
    }

    pub fn act_rank(&self, n: usize, e: usize, r: usize) -> usize {
        self.grades[&n].act[e * factorial(n) + r]
    }

    /// Sorted orbit of `e`.
    pub fn orbit(&self, n: usize, e: usize) -> Vec<usize> {
        let mut o: Vec<usize> = (0..factorial(n)).map(|r| self.act_rank(n, e, r)).collect();
        o.sort_unstable();
        o.dedup();
        o
    }

    pub fn stabilizer(&self, n: usize, e: usize) -> Vec<Perm> {
        Perm::all(n).into_iter().filter(|s| self.act(n, e, s) == e).collect()
    }

    /// Orbit representatives (order-minimal members) per grade.
    pub fn orbit_reps(&self) -> Vec<Elem> {
        let mut out = Vec::new();
        for (&n, g) in &self.grades {
            let mut seen = vec![false; g.set.len()];
            for e in 0..g.set.len() {
                if !seen[e] {
                    for x in self.orbit(n, e) {
                        seen[x] = true;
                    }
                    out.push((n, e));
                }
            }
        }
        out
    }

    pub fn is_free(&self) -> bool {
        self.orbit_reps().into_iter().all(|(n, e)| self.stabilizer(n, e).len() == 1)
    }
}

/// Grade-preserving equivariant map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EquivMap {
    pub dom: SymSet,
    pub cod: SymSet,
    table: BTreeMap<usize, Vec<usize>>,
}

impl EquivMap {
    pub fn new(dom: SymSet, cod: SymSet, table: BTreeMap<usize, Vec<usize>>) -> Result<EquivMap> {
        for (n, s) in dom.grades() {
            let Some(t) = table.get(&n) else {
                return structural(format!("equivariant map has no table for grade {n}"));
            };
            if t.len() != s.len() || t.iter().any(|&x| x >= cod.grade_len(n)) {
                return structural(format!("equivariant map is not total into grade {n}"));
            }
            let gens: Vec<Perm> = (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)).collect();
            for e in 0..s.len() {
                for g in &gens {
                    if t[dom.act(n, e, g)] != cod.act(n, t[e], g) {
                        return structural(format!("map is not equivariant at {:?}", s.label(e)));
                    }
                }
            }
        }
        let table = table.into_iter().filter(|(n, _)| dom.grade(*n).is_some()).collect();
        Ok(EquivMap { dom, cod, table })
    }

    pub fn identity(s: &SymSet) -> EquivMap {
        let table = s.grades().map(|(n, g)| (n, (0..g.len()).collect())).collect();
        EquivMap { dom: s.clone(), cod: s.clone(), table }
    }

    pub fn apply(&self, n: usize, e: usize) -> usize {
        self.table[&n][e]
    }

    pub fn table(&self, n: usize) -> &[usize] {
        &self.table[&n]
    }

    pub fn after(&self, first: &EquivMap) -> Result<EquivMap> {
        if first.cod != self.dom {
            return structural("equivariant maps are not composable");
        }
        let table = first.table.iter().map(|(&n, t)| (n, t.iter().map(|&x| self.table[&n][x]).collect())).collect();
        Ok(EquivMap { dom: first.dom.clone(), cod: self.cod.clone(), table })
    }

    pub fn is_bijective(&self) -> bool {
        self.dom.grade_numbers().iter().chain(self.cod.grade_numbers().iter()).all(|&n| {
            let t = self.table.get(&n).cloned().unwrap_or_default();
            let mut s = t.clone();
            s.sort_unstable();
            s.dedup();
            s.len() == t.len() && t.len() == self.cod.grade_len(n)
        })
    }
}

/// `δ(O)` truncated at `bound`: grade `n` is a copy of `O`, acted on trivially.
pub fn delta(o: &FinSet, bound: usize) -> SymSet {
    SymSet::trivial((0..=bound).map(|n| (n, o.with_id(&format!("{}_{n}", o.id())))).collect())
}

/// Set of orbits with per-grade projections.
pub fn orbits(a: &SymSet) -> (FinSet, BTreeMap<usize, Vec<usize>>) {
    let reps = a.orbit_reps();
    let labels = reps.iter().map(|&(n, e)| format!("{n}:{}", a.label((n, e)))).collect();
    let mut proj: BTreeMap<usize, Vec<usize>> = a.grades().map(|(n, s)| (n, vec![0; s.len()])).collect();
    for (k, &(n, e)) in reps.iter().enumerate() {
        for x in a.orbit(n, e) {
            proj.get_mut(&n).unwrap()[x] = k;
        }
    }
    (FinSet::fresh("orb", labels), proj)
}

pub fn fixed_points(a: &SymSet) -> Vec<Elem> {
    a.elements().into_iter().filter(|&(n, e)| a.orbit(n, e).len() == 1).collect()
}

/// Disjoint union over grades of the elements fixed by every permutation.
pub fn fixpoints(a: &SymSet) -> FinSet {
    FinSet::fresh("fix", fixed_points(a).into_iter().map(|(n, e)| format!("{n}:{}", a.label((n, e)))).collect())
}

/// A symmetric set over another one: `typing: total → base`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymOver {
    pub typing: EquivMap,
}

impl SymOver {
    pub fn total(&self) -> &SymSet {
        &self.typing.dom
    }

    pub fn base(&self) -> &SymSet {
        &self.typing.cod
    }
}

/// Pullback of `z → A` along `p: E → A`: pairs `(e, z)` in the same grade
/// with `p(e) = typ(z)`, acted on diagonally.
pub fn pullback_sym(p: &EquivMap, z: &SymOver) -> Result<SymOver> {
    pullback_sym_pairs(p, z).map(|(o, _)| o)
}

/// [`pullback_sym`] together with the pair `(e, z)` behind each element.
pub fn pullback_sym_pairs(p: &EquivMap, z: &SymOver) -> Result<(SymOver, BTreeMap<usize, Vec<(usize, usize)>>)> {
    if z.base() != &p.cod {
        return structural("pullback along a map into a different symmetric set");
    }
    let e = &p.dom;
    let mut grades = BTreeMap::new();
    let mut pairs: BTreeMap<usize, Vec<(usize, usize)>> = BTreeMap::new();
    for (n, es) in e.grades() {
        let zs = z.total().grade(n);
        let mut labels = Vec::new();
        let mut ps = Vec::new();
        for x in 0..es.len() {
            if let Some(zs) = zs {
                for y in 0..zs.len() {
                    if p.apply(n, x) == z.typing.apply(n, y) {
                        labels.push(tuple_label(&[es.label(x), zs.label(y)]));
                        ps.push((x, y));
                    }
                }
            }
        }
        grades.insert(n, FinSet::fresh(format!("Ex{}_{n}", "Z"), labels));
        pairs.insert(n, ps);
    }
    let index: BTreeMap<usize, HashMap<(usize, usize), usize>> =
        pairs.iter().map(|(&n, ps)| (n, ps.iter().enumerate().map(|(i, &q)| (q, i)).collect())).collect();
    let total = SymSet::new(grades, |n, i, s| {
        let (x, y) = pairs[&n][i];
        index[&n][&(e.act(n, x, s), z.total().act(n, y, s))]
    })?;
    let table = pairs.iter().map(|(&n, ps)| (n, ps.iter().map(|&(x, _)| x).collect())).collect();
    Ok((SymOver { typing: EquivMap::new(total, e.clone(), table)? }, pairs))
}

/// Dependent product `p_*` along `p: E → A` of `x → E`.
///
/// Elements over `a ∈ A_n` are sections `⟨a, x⃗⟩` choosing, for each `e` in the
/// grade-`n` fibre `p⁻¹(a)`, an element over `e`; the action is by conjugation
/// `⟨a,x⃗⟩·σ = ⟨a·σ, e′ ↦ x⃗(e′·σ⁻¹)·σ⟩`.
pub fn pi_star(p: &EquivMap, x: &SymOver) -> Result<SymOver> {
    pi_star_sections(p, x).map(|(o, _)| o)
}

/// [`pi_star`] together with the section `(a, x⃗)` behind each element,
/// `x⃗` listed along the fibre of `a` in index order.
#[allow(clippy::type_complexity)]
pub fn pi_star_sections(p: &EquivMap, x: &SymOver) -> Result<(SymOver, BTreeMap<usize, Vec<(usize, Vec<usize>)>>)> {
    if x.base() != &p.dom {
        return structural("dependent product of an object over a different symmetric set");
    }
    let (e, a) = (&p.dom, &p.cod);
    let mut grades = BTreeMap::new();
    let mut sections: BTreeMap<usize, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
    let mut fibres: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for (n, aset) in a.grades() {
        let mut fib = vec![Vec::new(); aset.len()];
        for i in 0..e.grade_len(n) {
            fib[p.apply(n, i)].push(i);
        }
        let mut over_e = vec![Vec::new(); e.grade_len(n)];
        for j in 0..x.total().grade_len(n) {
            over_e[x.typing.apply(n, j)].push(j);
        }
        let mut labels = Vec::new();
        let mut secs = Vec::new();
        for ai in 0..aset.len() {
            let sizes: Vec<usize> = fib[ai].iter().map(|&i| over_e[i].len()).collect();
            for pick in product_indices(&sizes) {
                let vals: Vec<usize> = pick.iter().enumerate().map(|(k, &c)| over_e[fib[ai][k]][c]).collect();
                let mut parts = vec![aset.label(ai).to_string()];
                parts.extend(vals.iter().map(|&v| x.total().label((n, v)).to_string()));
                labels.push(format!("<{}>", parts.join(";")));
                secs.push((ai, vals));
            }
        }
        grades.insert(n, FinSet::fresh(format!("Pi_{n}"), labels));
        sections.insert(n, secs);
        fibres.insert(n, fib);
    }
    let index: BTreeMap<usize, HashMap<&(usize, Vec<usize>), usize>> =
        sections.iter().map(|(&n, ss)| (n, ss.iter().enumerate().map(|(i, s)| (s, i)).collect())).collect();
    let total = SymSet::new(grades.clone(), |n, i, s| {
        let (ai, vals) = &sections[&n][i];
        let target = a.act(n, *ai, s);
        let sinv = s.inverse();
        let fib = &fibres[&n];
        let new_vals: Vec<usize> = fib[target]
            .iter()
            .map(|&e2| {
                let e1 = e.act(n, e2, &sinv);
                let k = fib[*ai].iter().position(|&q| q == e1).expect("e·σ⁻¹ lies over a");
                x.total().act(n, vals[k], s)
            })
            .collect();
        index[&n][&(target, new_vals)]
    })?;
    let table = sections.iter().map(|(&n, ss)| (n, ss.iter().map(|(ai, _)| *ai).collect())).collect();
    Ok((SymOver { typing: EquivMap::new(total, a.clone(), table)? }, sections))
}

/// Number of maps `z → x` over a common base.
pub fn count_maps_over(z: &SymOver, x: &SymOver) -> Result<usize> {
    if z.base() != x.base() {
        return structural("maps over different bases");
    }
    let mut count = 1usize;
    for (n, r) in z.total().orbit_reps() {
        let stab = z.total().stabilizer(n, r);
        let ty = z.typing.apply(n, r);
        let c = (0..x.total().grade_len(n))
            .filter(|&y| x.typing.apply(n, y) == ty && stab.iter().all(|s| x.total().act(n, y, s) == y))
            .count();
        count *= c;
    }
    Ok(count)
}

/// A symmetric set over `δ(O)`: typing into `O`, constant on orbits.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SlicedSymSet {
    pub total: SymSet,
    pub base: FinSet,
    typing: BTreeMap<usize, Vec<usize>>,
}

impl SlicedSymSet {
    pub fn new(total: SymSet, base: FinSet, typing: BTreeMap<usize, Vec<usize>>) -> Result<SlicedSymSet> {
        for (n, s) in total.grades() {
            let Some(t) = typing.get(&n) else { return structural(format!("no typing for grade {n}")) };
            if t.len() != s.len() || t.iter().any(|&o| o >= base.len()) {
                return structural(format!("typing of grade {n} is not total into the base"));
            }
            for e in 0..s.len() {
                for g in (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)) {
                    if t[total.act(n, e, &g)] != t[e] {
                        return structural(format!("typing is not invariant at {:?}", s.label(e)));
                    }
                }
            }
        }
        Ok(SlicedSymSet { total, base, typing })
    }

    pub fn typ(&self, n: usize, e: usize) -> usize {
        self.typing[&n][e]
    }

    /// View as an object over `δ(O)` truncated at `bound`.
    pub fn over_delta(&self, bound: usize) -> Result<SymOver> {
        let d = delta(&self.base, bound);
        let mut t = self.typing.clone();
        for n in 0..=bound {
            t.entry(n).or_default();
        }
        if self.total.max_grade().is_some_and(|m| m > bound) {
            return structural("grade bound below the support of the symmetric set");
        }
        Ok(SymOver { typing: EquivMap::new(self.total.clone(), d, t)? })
    }
}

/// `δ_{/O}`: `X → O` becomes `δ(X) → δ(O)` up to `bound`.
pub fn delta_slice(x: &SliceObj, bound: usize) -> SlicedSymSet {
    let total = delta(x.total(), bound);
    let typing = (0..=bound).map(|n| (n, x.d.table().to_vec())).collect();
    SlicedSymSet::new(total, x.base().clone(), typing).expect("trivial action")
}

/// `orb_{/O}`: the orbit set typed by the common type of each orbit.
pub fn orb_slice(y: &SlicedSymSet) -> SliceObj {
    let (set, _) = orbits(&y.total);
    let table = y.total.orbit_reps().into_iter().map(|(n, e)| y.typ(n, e)).collect();
    SliceObj::new(FinMap::new(set, y.base.clone(), table).expect("typed orbits"))
}

/// `fix_{/O}`: over each `o`, tuples choosing one fixed point over `o` in
/// every grade `0..=bound`.
pub fn fix_slice(y: &SlicedSymSet, bound: usize) -> SliceObj {
    let fixed = fixed_points(&y.total);
    let mut labels = Vec::new();
    let mut table = Vec::new();
    for o in 0..y.base.len() {
        let per_grade: Vec<Vec<usize>> = (0..=bound)
            .map(|n| fixed.iter().filter(|&&(m, e)| m == n && y.typ(m, e) == o).map(|&(_, e)| e).collect())
            .collect();
        for pick in product_indices(&per_grade.iter().map(Vec::len).collect::<Vec<_>>()) {
            let mut parts = vec![y.base.label(o).to_string()];
            parts.extend(pick.iter().enumerate().map(|(n, &k)| y.total.label((n, per_grade[n][k])).to_string()));
            labels.push(tuple_label(&parts));
            table.push(o);
        }
    }
    SliceObj::new(FinMap::new(FinSet::fresh("fix", labels), y.base.clone(), table).expect("typed fixpoints"))
}

/// The slice functors induced by `u: O → Q`.
#[derive(Clone, Debug)]
pub struct SlicedAdjoints {
    pub u: FinMap,
}

impl SlicedAdjoints {
    pub fn new(u: FinMap) -> SlicedAdjoints {
        SlicedAdjoints { u }
    }

    /// `δ(u)_!`: post-compose the typing with `u`.
    pub fn delta_shriek(&self, y: &SlicedSymSet) -> Result<SlicedSymSet> {
        if y.base != *self.u.dom() {
            return structural("δ(u)_! applied over the wrong base");
        }
        let typing = y.typing.iter().map(|(&n, t)| (n, t.iter().map(|&o| self.u.apply(o)).collect())).collect();
        SlicedSymSet::new(y.total.clone(), self.u.cod().clone(), typing)
    }

    /// `δ(u)^*`: pairs `(o, z)` with `u(o) = typ(z)`.
    pub fn delta_star(&self, z: &SlicedSymSet) -> Result<SlicedSymSet> {
        if z.base != *self.u.cod() {
            return structural("δ(u)^* applied over the wrong base");
        }
        let o = self.u.dom();
        let mut grades = BTreeMap::new();
        let mut pairs = BTreeMap::new();
        for (n, zs) in z.total.grades() {
            let mut labels = Vec::new();
            let mut ps = Vec::new();
            for oi in 0..o.len() {
                for zi in 0..zs.len() {
                    if self.u.apply(oi) == z.typ(n, zi) {
                        labels.push(tuple_label(&[o.label(oi), zs.label(zi)]));
                        ps.push((oi, zi));
                    }
                }
            }
            grades.insert(n, FinSet::fresh(format!("u*_{n}"), labels));
            pairs.insert(n, ps);
        }
        let index: BTreeMap<usize, HashMap<(usize, usize), usize>> =
            pairs.iter().map(|(&n, ps): (&usize, &Vec<(usize, usize)>)| (n, ps.iter().enumerate().map(|(i, &q)| (q, i)).collect())).collect();
        let total = SymSet::new(grades, |n, i, s| {
            let (oi, zi) = pairs[&n][i];
            index[&n][&(oi, z.total.act(n, zi, s))]
        })?;
        let typing = pairs.iter().map(|(&n, ps)| (n, ps.iter().map(|&(oi, _)| oi).collect())).collect();
        SlicedSymSet::new(total, o.clone(), typing)
    }

    /// `δ(u)_*`: over `q` in grade `n`, families `(y_o)_{u(o)=q}` with `y_o`
    /// over `o`, acted on diagonally.
    pub fn delta_lower_star(&self, y: &SlicedSymSet, bound: usize) -> Result<SlicedSymSet> {
        if y.base != *self.u.dom() {
            return structural("δ(u)_* applied over the wrong base");
        }
        let q = self.u.cod();
        let fib = self.u.fibers();
        let mut grades = BTreeMap::new();
        let mut fams: BTreeMap<usize, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
        for n in 0..=bound {
            let over: Vec<Vec<usize>> = (0..y.base.len())
                .map(|o| (0..y.total.grade_len(n)).filter(|&e| y.typ(n, e) == o).collect())
                .collect();
            let mut labels = Vec::new();
            let mut fs = Vec::new();
            for qi in 0..q.len() {
                let sizes: Vec<usize> = fib[qi].iter().map(|&o| over[o].len()).collect();
                for pick in product_indices(&sizes) {
                    let vals: Vec<usize> = pick.iter().enumerate().map(|(k, &c)| over[fib[qi][k]][c]).collect();
                    let mut parts = vec![q.label(qi).to_string()];
                    parts.extend(vals.iter().map(|&v| y.total.label((n, v)).to_string()));
                    labels.push(tuple_label(&parts));
                    fs.push((qi, vals));
                }
            }
            grades.insert(n, FinSet::fresh(format!("u_*_{n}"), labels));
            fams.insert(n, fs);
        }
        let index: BTreeMap<usize, HashMap<&(usize, Vec<usize>), usize>> =
            fams.iter().map(|(&n, fs)| (n, fs.iter().enumerate().map(|(i, f)| (f, i)).collect())).collect();
        let total = SymSet::new(grades, |n, i, s| {
            let (qi, vals) = &fams[&n][i];
            let moved = (*qi, vals.iter().map(|&v| y.total.act(n, v, s)).collect::<Vec<_>>());
            index[&n][&moved]
        })?;
        let typing = fams.iter().map(|(&n, fs)| (n, fs.iter().map(|(qi, _)| *qi).collect())).collect();
        SlicedSymSet::new(total, q.clone(), typing)
    }

    pub fn orb(&self, y: &SlicedSymSet) -> SliceObj {
        orb_slice(y)
    }

    pub fn delta_o(&self, x: &SliceObj, bound: usize) -> SlicedSymSet {
        delta_slice(x, bound)
    }

    pub fn fix(&self, y: &SlicedSymSet, bound: usize) -> SliceObj {
        fix_slice(y, bound)
    }

    /// `u_!` on plain slices.
    pub fn shriek(&self, x: &SliceObj) -> Result<SliceObj> {
        x.push(&self.u)
    }

    /// `u_*` on plain slices.
    pub fn lower_star(&self, x: &SliceObj) -> Result<SliceObj> {
        x.dependent_product(&self.u)
    }
}

/// Count of elements over each base point.
pub fn fiber_counts(x: &SliceObj) -> Vec<usize> {
    x.d.fibers().iter().map(Vec::len).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grade(n: usize, labels: &[&str]) -> BTreeMap<usize, FinSet> {
        [(n, FinSet::from_strs("A", labels).unwrap())].into_iter().collect()
    }

    /// `{a, b}` in grade 2 with the swap exchanging them.
    fn swap_pair() -> SymSet {
        SymSet::new(grade(2, &["a", "b"]), |_, e, s| if s.is_identity() { e } else { 1 - e }).unwrap()
    }

    #[test]
    fn bad_action_rejected() {
        // swap fixes a but sends b to a: not a permutation action
        let r = SymSet::new(grade(2, &["a", "b"]), |_, e, s| if s.is_identity() { e } else { 0 });
        assert!(r.is_err());
    }

    #[test]
    fn delta_grades() {
        let o = FinSet::from_strs("O", &["x", "y", "z"]).unwrap();
        let d = delta(&o, 4);
        for n in 0..=4 {
            assert_eq!(d.grade_len(n), 3);
            for e in 0..3 {
                assert_eq!(d.orbit(n, e), vec![e]);
            }
        }
        assert!(delta(&FinSet::empty("E"), 2).is_empty());
    }

    #[test]
    fn orbit_counts() {
        let (o, proj) = orbits(&swap_pair());
        assert_eq!(o.len(), 1);
        assert_eq!(proj[&2], vec![0, 0]);
        // S_3 acting on itself by right multiplication
        let perms = Perm::all(3);
        let set = FinSet::new("S3", perms.iter().map(|p| p.to_string()).collect()).unwrap();
        let s3 = SymSet::new([(3, set)].into_iter().collect(), |_, e, s| perms[e].compose(s).rank()).unwrap();
        let (o, _) = orbits(&s3);
        assert_eq!(o.len(), 1);
        assert_eq!(s3.orbit(3, 0).len(), 6);
        assert!(s3.is_free());
    }

    #[test]
    fn fixpoint_scan() {
        assert_eq!(fixpoints(&SymSet::trivial(grade(2, &["a", "b"]))).len(), 2);
        assert_eq!(fixpoints(&swap_pair()).len(), 0);
        let mixed = SymSet::new(grade(2, &["a", "b", "c"]), |_, e, s| if s.is_identity() || e == 2 { e } else { 1 - e }).unwrap();
        assert_eq!(fixpoints(&mixed).len(), 1);
    }

    #[test]
    fn equivariance_checked() {
        let a = swap_pair();
        let t = SymSet::trivial(grade(2, &["u", "v"]));
        let ok = EquivMap::new(a.clone(), t.clone(), [(2, vec![0, 0])].into_iter().collect());
        assert!(ok.is_ok());
        let bad = EquivMap::new(a, t, [(2, vec![0, 1])].into_iter().collect());
        assert!(bad.is_err());
    }

    fn over(total: SymSet, base: SymSet, table: BTreeMap<usize, Vec<usize>>) -> SymOver {
        SymOver { typing: EquivMap::new(total, base, table).unwrap() }
    }

    #[test]
    fn pi_star_identity_and_counts() {
        // E = A = one element in grade 2 with trivial action
        let a = SymSet::trivial(grade(2, &["a"]));
        let x = over(SymSet::trivial(grade(2, &["x1", "x2"])), a.clone(), [(2, vec![0, 0])].into_iter().collect());
        let px = pi_star(&EquivMap::identity(&a), &x).unwrap();
        assert_eq!(px.total().len(), 2);

        // empty fibre: exactly one section
        let e = SymSet::trivial(grade(2, &[]));
        let p = EquivMap::new(e.clone(), a.clone(), [(2, vec![])].into_iter().collect()).unwrap();
        let xe = over(SymSet::trivial(grade(2, &[])), e, [(2, vec![])].into_iter().collect());
        assert_eq!(pi_star(&p, &xe).unwrap().total().len(), 1);

        // fibre of size 2, three choices over each point: 9 sections
        let e = SymSet::trivial(grade(2, &["e1", "e2"]));
        let p = EquivMap::new(e.clone(), a, [(2, vec![0, 0])].into_iter().collect()).unwrap();
        let xs = SymSet::trivial(grade(2, &["p", "q", "r", "s", "t", "w"]));
        let x = over(xs, e, [(2, vec![0, 0, 0, 1, 1, 1])].into_iter().collect());
        assert_eq!(pi_star(&p, &x).unwrap().total().len(), 9);
    }

    #[test]
    fn fix_and_orb_of_delta() {
        let o = FinSet::from_strs("O", &["x", "y"]).unwrap();
        let x = SliceObj::with_fiber_sizes(&o, &[2, 1]);
        let dx = delta_slice(&x, 3);
        let back = orb_slice(&dx);
        assert_eq!(back.len(), x.len() * 4);
        assert_eq!(fixpoints(&delta(&o, 3)).len(), 2 * 4);
    }

    #[test]
    fn fix_commutes_with_lower_star_not_shriek() {
        let o = FinSet::from_strs("O", &["x", "y", "z"]).unwrap();
        let q = FinSet::from_strs("Q", &["p", "q"]).unwrap();
        let adj = SlicedAdjoints::new(FinMap::new(o.clone(), q, vec![0, 0, 1]).unwrap());
        let y = delta_slice(&SliceObj::with_fiber_sizes(&o, &[1, 2, 1]), 2);
        let fy = adj.fix(&y, 2);
        let star = adj.fix(&adj.delta_lower_star(&y, 2).unwrap(), 2);
        assert_eq!(fiber_counts(&star), fiber_counts(&adj.lower_star(&fy).unwrap()));
        // over p: (1+2)^3 tuples against 1 + 2^3
        let shriek = adj.fix(&adj.delta_shriek(&y).unwrap(), 2);
        assert_eq!(fiber_counts(&shriek), vec![27, 1]);
        assert_eq!(fiber_counts(&adj.shriek(&fy).unwrap()), vec![9, 1]);
    }
}
