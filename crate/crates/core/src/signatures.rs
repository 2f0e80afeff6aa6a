//! Multisorted, amalgamated and symmetric signatures, their morphisms,
//! reindexing (prone) and coreindexing (supine).

use std::collections::{BTreeMap, HashMap};
use std::sync::Arc;

use crate::error::{structural, Result};
use crate::finset::{all_functions, product_indices, FinMap, FinSet};
use crate::perm::Perm;
use crate::symset::{EquivMap, SymSet};

/// One typed operation `ins → out`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Op {
    pub name: String,
    pub out: usize,
    pub ins: Vec<usize>,
}

impl Op {
    pub fn arity(&self) -> usize {
        self.ins.len()
    }

    /// `∂_a` as a list `[out, in_1, …, in_n]`.
    pub fn profile(&self) -> Vec<usize> {
        let mut p = vec![self.out];
        p.extend(&self.ins);
        p
    }
}

pub(crate) fn profile_label(base: &FinSet, out: usize, ins: &[usize]) -> String {
    let ins: Vec<&str> = ins.iter().map(|&i| base.label(i)).collect();
    format!("{};{}", base.label(out), ins.join(","))
}

/// An amalgamated signature `(A, ∂, O)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgSig {
    pub base: FinSet,
    ops: Arc<[Op]>,
    index: Arc<HashMap<String, usize>>,
}

impl AmalgSig {
    pub fn new(base: FinSet, ops: Vec<Op>) -> Result<AmalgSig> {
        let mut index = HashMap::new();
        for (i, op) in ops.iter().enumerate() {
            if op.out >= base.len() || op.ins.iter().any(|&o| o >= base.len()) {
                return structural(format!("operation {:?} is typed outside the base {}", op.name, base.id()));
            }
            if index.insert(op.name.clone(), i).is_some() {
                return structural(format!("duplicate operation name {:?}", op.name));
            }
        }
        Ok(AmalgSig { base, ops: ops.into(), index: Arc::new(index) })
    }

    /// From `(name, out, ins)` given as sort labels.
    pub fn from_labels(base: &FinSet, ops: &[(&str, &str, &[&str])]) -> Result<AmalgSig> {
        let mut v = Vec::new();
        for (name, out, ins) in ops {
            let ins = ins.iter().map(|l| base.require(l)).collect::<Result<Vec<_>>>()?;
            v.push(Op { name: name.to_string(), out: base.require(out)?, ins });
        }
        AmalgSig::new(base.clone(), v)
    }

    /// `I_O`: one unary identity operation per sort.
    pub fn unit(base: &FinSet) -> AmalgSig {
        let ops = (0..base.len()).map(|o| Op { name: format!("id_{}", base.label(o)), out: o, ins: vec![o] }).collect();
        AmalgSig::new(base.clone(), ops).expect("unit is well typed")
    }

    pub fn empty(base: &FinSet) -> AmalgSig {
        AmalgSig::new(base.clone(), Vec::new()).unwrap()
    }

    pub fn ops(&self) -> &[Op] {
        &self.ops
    }

    pub fn op(&self, i: usize) -> &Op {
        &self.ops[i]
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    pub fn find(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn require(&self, name: &str) -> Result<usize> {
        self.find(name).map_or_else(|| structural(format!("unknown operation {name:?}")), Ok)
    }

    pub fn arity(&self, i: usize) -> usize {
        self.ops[i].arity()
    }

    pub fn max_arity(&self) -> usize {
        self.ops.iter().map(Op::arity).max().unwrap_or(0)
    }

    /// The set of operation names.
    pub fn op_set(&self) -> FinSet {
        FinSet::fresh(format!("ops({})", self.base.id()), self.ops.iter().map(|o| o.name.clone()).collect())
    }
}

/// A morphism `(f, σ, u)`: `ins_{f(a)}[i] = u(ins_a[σ_a(i)])`, `out_{f(a)} = u(out_a)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AmalgSigMor {
    pub dom: AmalgSig,
    pub cod: AmalgSig,
    pub u: FinMap,
    pub f: Vec<usize>,
    pub sigma: Vec<Perm>,
}

fn amalg_square_holds(dom: &AmalgSig, cod: &AmalgSig, u: &FinMap, a: usize, b: usize, s: &Perm) -> bool {
    let (x, y) = (dom.op(a), cod.op(b));
    x.arity() == y.arity()
        && s.n() == x.arity()
        && y.out == u.apply(x.out)
        && (0..x.arity()).all(|i| y.ins[i] == u.apply(x.ins[s.apply(i)]))
}

impl AmalgSigMor {
    pub fn new(dom: AmalgSig, cod: AmalgSig, u: FinMap, f: Vec<usize>, sigma: Vec<Perm>) -> Result<AmalgSigMor> {
        if u.dom() != &dom.base || u.cod() != &cod.base {
            return structural("base map does not match the signatures");
        }
        if f.len() != dom.len() || sigma.len() != dom.len() || f.iter().any(|&b| b >= cod.len()) {
            return structural("operation map is not total");
        }
        for a in 0..dom.len() {
            if !amalg_square_holds(&dom, &cod, &u, a, f[a], &sigma[a]) {
                return structural(format!(
                    "square fails at {:?} ↦ {:?} with amalgamation {}",
                    dom.op(a).name,
                    cod.op(f[a]).name,
                    sigma[a]
                ));
            }
        }
        Ok(AmalgSigMor { dom, cod, u, f, sigma })
    }

    /// Strict morphism: all amalgamations are identities.
    pub fn strict(dom: AmalgSig, cod: AmalgSig, u: FinMap, f: Vec<usize>) -> Result<AmalgSigMor> {
        let sigma = (0..dom.len()).map(|a| Perm::identity(dom.arity(a))).collect();
        AmalgSigMor::new(dom, cod, u, f, sigma)
    }

    pub fn identity(a: &AmalgSig) -> AmalgSigMor {
        AmalgSigMor::strict(a.clone(), a.clone(), FinMap::identity(&a.base), (0..a.len()).collect()).unwrap()
    }

    pub fn is_strict(&self) -> bool {
        self.sigma.iter().all(Perm::is_identity)
    }

    /// `self ∘ first`; the amalgamation at `a` is `σ_a ∘ τ_{f(a)}`.
    pub fn after(&self, first: &AmalgSigMor) -> Result<AmalgSigMor> {
        if first.cod != self.dom {
            return structural("signature morphisms are not composable");
        }
        let f = first.f.iter().map(|&b| self.f[b]).collect();
        let sigma = (0..first.dom.len()).map(|a| first.sigma[a].compose(&self.sigma[first.f[a]])).collect();
        AmalgSigMor::new(first.dom.clone(), self.cod.clone(), self.u.after(&first.u)?, f, sigma)
    }

    pub fn is_bijective(&self) -> bool {
        self.u.is_bijective() && FinMap::new(self.dom.op_set(), self.cod.op_set(), self.f.clone()).is_ok_and(|m| m.is_bijective())
    }
}

/// All morphisms `a → b` over `u`, optionally only strict ones.
pub fn hom_amalg_over(a: &AmalgSig, b: &AmalgSig, u: &FinMap, strict_only: bool) -> Vec<AmalgSigMor> {
    let candidates: Vec<Vec<(usize, Perm)>> = (0..a.len())
        .map(|x| {
            let perms = if strict_only { vec![Perm::identity(a.arity(x))] } else { Perm::all(a.arity(x)) };
            let mut c = Vec::new();
            for y in 0..b.len() {
                for s in &perms {
                    if amalg_square_holds(a, b, u, x, y, s) {
                        c.push((y, s.clone()));
                    }
                }
            }
            c
        })
        .collect();
    product_indices(&candidates.iter().map(Vec::len).collect::<Vec<_>>())
        .map(|pick| {
            let (f, sigma) = pick.iter().enumerate().map(|(x, &k)| candidates[x][k].clone()).unzip();
            AmalgSigMor { dom: a.clone(), cod: b.clone(), u: u.clone(), f, sigma }
        })
        .collect()
}

/// All morphisms `a → b` over every base map.
pub fn hom_amalg(a: &AmalgSig, b: &AmalgSig, strict_only: bool) -> Vec<AmalgSigMor> {
    all_functions(a.base.len(), b.base.len())
        .flat_map(|t| {
            let u = FinMap::new(a.base.clone(), b.base.clone(), t).unwrap();
            hom_amalg_over(a, b, &u, strict_only)
        })
        .collect()
}

/// Multisorted signatures: amalgamated signatures whose morphisms are strict.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Multisorted(pub AmalgSig);

impl Multisorted {
    pub fn homs(&self, other: &Multisorted) -> Vec<AmalgSigMor> {
        hom_amalg(&self.0, &other.0, true)
    }
}

pub fn from_multisorted(m: &Multisorted) -> AmalgSig {
    m.0.clone()
}

/// Lifts of a profile along `u`: all `d` with `u∘d = profile`.
pub(crate) fn profile_lifts(u: &FinMap, profile: &[usize]) -> Vec<Vec<usize>> {
    let fib = u.fibers();
    let choices: Vec<&Vec<usize>> = profile.iter().map(|&q| &fib[q]).collect();
    product_indices(&choices.iter().map(|c| c.len()).collect::<Vec<_>>())
        .map(|pick| pick.iter().enumerate().map(|(i, &k)| choices[i][k]).collect())
        .collect()
}

/// `u^*(B)` with its strict prone morphism into `B`.
pub fn reindex_amalg(u: &FinMap, b: &AmalgSig) -> Result<(AmalgSig, AmalgSigMor)> {
    if u.cod() != &b.base {
        return structural("reindexing along a map into a different base");
    }
    let o = u.dom();
    let mut ops = Vec::new();
    let mut f = Vec::new();
    for (bi, op) in b.ops().iter().enumerate() {
        for d in profile_lifts(u, &op.profile()) {
            ops.push(Op { name: format!("({}|{})", op.name, profile_label(o, d[0], &d[1..])), out: d[0], ins: d[1..].to_vec() });
            f.push(bi);
        }
    }
    let a = AmalgSig::new(o.clone(), ops)?;
    let m = AmalgSigMor::strict(a.clone(), b.clone(), u.clone(), f)?;
    Ok((a, m))
}

/// The unique `k` over `v` with `prone ∘ k = h`, where `h` lies over `u∘v`.
pub fn factor_through_prone(prone: &AmalgSigMor, h: &AmalgSigMor, v: &FinMap) -> Result<AmalgSigMor> {
    let pb = &prone.dom;
    let mut f = Vec::new();
    for c in 0..h.dom.len() {
        let op = h.dom.op(c);
        let s = &h.sigma[c];
        let mut d = vec![v.apply(op.out)];
        d.extend((0..op.arity()).map(|i| v.apply(op.ins[s.apply(i)])));
        let hit = (0..pb.len()).find(|&x| prone.f[x] == h.f[c] && pb.op(x).profile() == d);
        match hit {
            Some(x) => f.push(x),
            None => return structural(format!("{:?} does not factor through the prone morphism", op.name)),
        }
    }
    AmalgSigMor::new(h.dom.clone(), pb.clone(), v.clone(), f, h.sigma.clone())
}

/// `u_!(A)`: same operations with profiles post-composed with `u`.
pub fn supine_amalg(u: &FinMap, a: &AmalgSig) -> Result<(AmalgSig, AmalgSigMor)> {
    if u.dom() != &a.base {
        return structural("coreindexing along a map out of a different base");
    }
    let ops = a
        .ops()
        .iter()
        .map(|op| Op { name: op.name.clone(), out: u.apply(op.out), ins: op.ins.iter().map(|&o| u.apply(o)).collect() })
        .collect();
    let b = AmalgSig::new(u.cod().clone(), ops)?;
    let m = AmalgSigMor::strict(a.clone(), b.clone(), u.clone(), (0..a.len()).collect())?;
    Ok((b, m))
}

/// Unit `A → u^*u_!(A)` in the fibre over the domain of `u`.
pub fn supine_unit(u: &FinMap, a: &AmalgSig) -> Result<(AmalgSig, AmalgSigMor)> {
    let (pushed, _) = supine_amalg(u, a)?;
    let (back, prone) = reindex_amalg(u, &pushed)?;
    let f = (0..a.len())
        .map(|x| (0..back.len()).find(|&y| prone.f[y] == x && back.op(y).profile() == a.op(x).profile()).unwrap())
        .collect();
    let m = AmalgSigMor::strict(a.clone(), back.clone(), FinMap::identity(&a.base), f)?;
    Ok((back, m))
}

/// A symmetric signature: a symmetric set of operations with an equivariant
/// typing `∂_{a·σ}(i) = ∂_a(σ(i))`, the output fixed.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymSig {
    pub base: FinSet,
    pub carrier: SymSet,
    /// `profiles[n][e] = [out, in_1, …, in_n]`
    profiles: BTreeMap<usize, Vec<Vec<usize>>>,
}

/// An orbit given by a representative and generators of its stabilizer.
#[derive(Clone, Debug)]
pub struct OrbitSpec {
    pub name: String,
    pub out: usize,
    pub ins: Vec<usize>,
    pub stabilizer: Vec<Perm>,
}

/// Subgroup generated by `gens`, sorted.
pub fn generated_subgroup(n: usize, gens: &[Perm]) -> Vec<Perm> {
    let mut group = vec![Perm::identity(n)];
    let mut i = 0;
    while i < group.len() {
        for g in gens {
            let h = group[i].compose(g);
            if !group.contains(&h) {
                group.push(h);
            }
        }
        i += 1;
    }
    group.sort();
    group
}

impl SymSig {
    pub fn new(base: FinSet, carrier: SymSet, profiles: BTreeMap<usize, Vec<Vec<usize>>>) -> Result<SymSig> {
        for (n, set) in carrier.grades() {
            let Some(ps) = profiles.get(&n) else { return structural(format!("no typing for grade {n}")) };
            if ps.len() != set.len() {
                return structural(format!("typing of grade {n} is not total"));
            }
            for (e, p) in ps.iter().enumerate() {
                if p.len() != n + 1 || p.iter().any(|&o| o >= base.len()) {
                    return structural(format!("profile of {:?} is malformed", set.label(e)));
                }
                for g in (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)) {
                    let moved = &ps[carrier.act(n, e, &g)];
                    if moved[0] != p[0] || (0..n).any(|i| moved[i + 1] != p[g.apply(i) + 1]) {
                        return structural(format!("typing is not equivariant at {:?}", set.label(e)));
                    }
                }
            }
        }
        Ok(SymSig { base, carrier, profiles })
    }

    /// One orbit per spec; elements are the cosets `Gτ` of the stabilizer
    /// with `Gτ·σ = G(τ∘σ)` and typing `∂∘τ`.
    pub fn from_orbits(base: &FinSet, specs: &[OrbitSpec]) -> Result<SymSig> {
        let mut grades: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        let mut profiles: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        // (grade, index) → (spec, group, coset rep)
        let mut cosets: BTreeMap<usize, Vec<(usize, Vec<Perm>, Perm)>> = BTreeMap::new();
        for (si, spec) in specs.iter().enumerate() {
            let n = spec.ins.len();
            if spec.out >= base.len() || spec.ins.iter().any(|&o| o >= base.len()) {
                return structural(format!("orbit {:?} is typed outside the base", spec.name));
            }
            if spec.stabilizer.iter().any(|g| g.n() != n) {
                return structural(format!("stabilizer of {:?} has the wrong arity", spec.name));
            }
            let group = generated_subgroup(n, &spec.stabilizer);
            if group.iter().any(|g| (0..n).any(|i| spec.ins[g.apply(i)] != spec.ins[i])) {
                return structural(format!("stabilizer of {:?} does not preserve its typing", spec.name));
            }
            let mut reps: Vec<Perm> = Vec::new();
            for t in Perm::all(n) {
                let rep = group.iter().map(|g| g.compose(&t)).min().unwrap();
                if !reps.contains(&rep) {
                    reps.push(rep);
                }
            }
            for r in reps {
                let label = if r.is_identity() { spec.name.clone() } else { format!("{}.{}", spec.name, r) };
                grades.entry(n).or_default().push(label);
                let mut p = vec![spec.out];
                p.extend((0..n).map(|i| spec.ins[r.apply(i)]));
                profiles.entry(n).or_default().push(p);
                cosets.entry(n).or_default().push((si, group.clone(), r));
            }
        }
        let sets = grades.into_iter().map(|(n, l)| FinSet::new(format!("A_{n}"), l).map(|s| (n, s))).collect::<Result<BTreeMap<_, _>>>()?;
        let carrier = SymSet::new(sets, |n, e, s| {
            let (si, group, r) = &cosets[&n][e];
            let rep = group.iter().map(|g| g.compose(&r.compose(s))).min().unwrap();
            cosets[&n].iter().position(|(sj, _, q)| sj == si && *q == rep).expect("coset exists")
        })?;
        SymSig::new(base.clone(), carrier, profiles)
    }

    /// `I_O`: one grade-1 identity per sort.
    pub fn unit(base: &FinSet) -> SymSig {
        let specs: Vec<OrbitSpec> =
            (0..base.len()).map(|o| OrbitSpec { name: format!("id_{}", base.label(o)), out: o, ins: vec![o], stabilizer: vec![] }).collect();
        SymSig::from_orbits(base, &specs).expect("unit is well typed")
    }

    pub fn profile(&self, n: usize, e: usize) -> &[usize] {
        &self.profiles[&n][e]
    }

    pub fn out(&self, n: usize, e: usize) -> usize {
        self.profiles[&n][e][0]
    }

    pub fn ins(&self, n: usize, e: usize) -> &[usize] {
        &self.profiles[&n][e][1..]
    }

    pub fn profiles(&self) -> &BTreeMap<usize, Vec<Vec<usize>>> {
        &self.profiles
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn label(&self, n: usize, e: usize) -> &str {
        self.carrier.label((n, e))
    }
}

/// A morphism `(f, u)` of symmetric signatures: `∂_{f(a)} = u∘∂_a`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymSigMor {
    pub dom: SymSig,
    pub cod: SymSig,
    pub f: EquivMap,
    pub u: FinMap,
}

impl SymSigMor {
    pub fn new(dom: SymSig, cod: SymSig, f: EquivMap, u: FinMap) -> Result<SymSigMor> {
        if f.dom != dom.carrier || f.cod != cod.carrier || u.dom() != &dom.base || u.cod() != &cod.base {
            return structural("symmetric signature morphism does not match its endpoints");
        }
        for (n, e) in dom.carrier.elements() {
            let img = cod.profile(n, f.apply(n, e));
            if dom.profile(n, e).iter().zip(img).any(|(&o, &q)| u.apply(o) != q) {
                return structural(format!("typing square fails at {:?}", dom.label(n, e)));
            }
        }
        Ok(SymSigMor { dom, cod, f, u })
    }

    pub fn identity(a: &SymSig) -> SymSigMor {
        SymSigMor { dom: a.clone(), cod: a.clone(), f: EquivMap::identity(&a.carrier), u: FinMap::identity(&a.base) }
    }

    pub fn after(&self, first: &SymSigMor) -> Result<SymSigMor> {
        SymSigMor::new(first.dom.clone(), self.cod.clone(), self.f.after(&first.f)?, self.u.after(&first.u)?)
    }

    pub fn is_iso(&self) -> bool {
        self.u.is_bijective() && self.f.is_bijective()
    }
}

/// All morphisms `a → b` over `u`: each orbit representative goes to an
/// element with the pushed-forward typing whose stabilizer contains its own.
pub fn hom_sym_over(a: &SymSig, b: &SymSig, u: &FinMap) -> Vec<SymSigMor> {
    let reps = a.carrier.orbit_reps();
    let candidates: Vec<Vec<usize>> = reps
        .iter()
        .map(|&(n, r)| {
            let stab = a.carrier.stabilizer(n, r);
            let want: Vec<usize> = a.profile(n, r).iter().map(|&o| u.apply(o)).collect();
            (0..b.carrier.grade_len(n))
                .filter(|&y| b.profile(n, y) == want.as_slice() && stab.iter().all(|s| b.carrier.act(n, y, s) == y))
                .collect()
        })
        .collect();
    product_indices(&candidates.iter().map(Vec::len).collect::<Vec<_>>())
        .map(|pick| {
            let mut table: BTreeMap<usize, Vec<usize>> = a.carrier.grades().map(|(n, s)| (n, vec![usize::MAX; s.len()])).collect();
            for (k, &(n, r)) in reps.iter().enumerate() {
                let y = candidates[k][pick[k]];
                for s in Perm::all(n) {
                    table.get_mut(&n).unwrap()[a.carrier.act(n, r, &s)] = b.carrier.act(n, y, &s);
                }
            }
            let f = EquivMap::new(a.carrier.clone(), b.carrier.clone(), table).expect("orbit extension is equivariant");
            SymSigMor { dom: a.clone(), cod: b.clone(), f, u: u.clone() }
        })
        .collect()
}

/// Some isomorphism `a ≅ b` over the identity of the common base, if any.
pub fn find_sym_iso(a: &SymSig, b: &SymSig) -> Option<SymSigMor> {
    if a.base.len() != b.base.len() || a.len() != b.len() {
        return None;
    }
    let u = FinMap::new(a.base.clone(), b.base.clone(), (0..a.base.len()).collect()).ok()?;
    hom_sym_over(a, b, &u).into_iter().find(SymSigMor::is_iso)
}

/// `u^*(B)`: pairs `⟨b, d⟩` with `u∘d = ∂_b`, acted on by `⟨b·σ, d∘σ⟩`.
pub fn reindex_sym(u: &FinMap, b: &SymSig) -> Result<(SymSig, SymSigMor)> {
    if u.cod() != &b.base {
        return structural("reindexing along a map into a different base");
    }
    let o = u.dom();
    let mut grades = BTreeMap::new();
    let mut pairs: BTreeMap<usize, Vec<(usize, Vec<usize>)>> = BTreeMap::new();
    for (n, set) in b.carrier.grades() {
        let mut labels = Vec::new();
        let mut ps = Vec::new();
        for e in 0..set.len() {
            for d in profile_lifts(u, b.profile(n, e)) {
                labels.push(format!("({}|{})", set.label(e), profile_label(o, d[0], &d[1..])));
                ps.push((e, d));
            }
        }
        grades.insert(n, FinSet::fresh(format!("u*A_{n}"), labels));
        pairs.insert(n, ps);
    }
    let index: BTreeMap<usize, HashMap<&(usize, Vec<usize>), usize>> =
        pairs.iter().map(|(&n, ps)| (n, ps.iter().enumerate().map(|(i, p)| (p, i)).collect())).collect();
    let carrier = SymSet::new(grades, |n, i, s| {
        let (e, d) = &pairs[&n][i];
        let mut moved = vec![d[0]];
        moved.extend((0..n).map(|j| d[s.apply(j) + 1]));
        index[&n][&(b.carrier.act(n, *e, s), moved)]
    })?;
    let profiles = pairs.iter().map(|(&n, ps)| (n, ps.iter().map(|(_, d)| d.clone()).collect())).collect();
    let a = SymSig::new(o.clone(), carrier, profiles)?;
    let table = pairs.iter().map(|(&n, ps)| (n, ps.iter().map(|(e, _)| *e).collect())).collect();
    let f = EquivMap::new(a.carrier.clone(), b.carrier.clone(), table)?;
    let m = SymSigMor::new(a.clone(), b.clone(), f, u.clone())?;
    Ok((a, m))
}

/// `u_!(A) = (A, u∘∂)` with the supine morphism `(1_A, u)`.
pub fn supine_sym(u: &FinMap, a: &SymSig) -> Result<(SymSig, SymSigMor)> {
    if u.dom() != &a.base {
        return structural("coreindexing along a map out of a different base");
    }
    let profiles = a.profiles.iter().map(|(&n, ps)| (n, ps.iter().map(|p| p.iter().map(|&o| u.apply(o)).collect()).collect())).collect();
    let b = SymSig::new(u.cod().clone(), a.carrier.clone(), profiles)?;
    let m = SymSigMor::new(a.clone(), b.clone(), EquivMap::identity(&a.carrier), u.clone())?;
    Ok((b, m))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn set(id: &str, e: &[&str]) -> FinSet {
        FinSet::from_strs(id, e).unwrap()
    }

    #[test]
    fn reindex_binary_along_collapse() {
        let q = set("Q", &["0"]);
        let o = set("O", &["0", "1"]);
        let b = AmalgSig::from_labels(&q, &[("a", "0", &["0", "0"])]).unwrap();
        let u = FinMap::new(o, q, vec![0, 0]).unwrap();
        let (ub, m) = reindex_amalg(&u, &b).unwrap();
        assert_eq!(ub.len(), 8);
        assert!(m.is_strict());
    }

    #[test]
    fn reindex_drops_unlifted_ops() {
        let q = set("Q", &["x", "y"]);
        let o = set("O", &["x"]);
        let b = AmalgSig::from_labels(&q, &[("f", "x", &["x"]), ("g", "y", &["x"])]).unwrap();
        let u = FinMap::new(o, q, vec![0]).unwrap();
        let (ub, _) = reindex_amalg(&u, &b).unwrap();
        assert_eq!(ub.len(), 1);
    }

    #[test]
    fn composite_carries_swap() {
        let o = set("O", &["x", "y"]);
        let a = AmalgSig::from_labels(&o, &[("m", "x", &["x", "y"])]).unwrap();
        let b = AmalgSig::from_labels(&o, &[("n", "x", &["y", "x"])]).unwrap();
        let swap = Perm::from_one_based(&[2, 1]).unwrap();
        let f = AmalgSigMor::new(a.clone(), b.clone(), FinMap::identity(&o), vec![0], vec![swap.clone()]).unwrap();
        let g = AmalgSigMor::identity(&b);
        let gf = g.after(&f).unwrap();
        assert_eq!(gf.sigma[0], swap);
        // the strict candidate is rejected
        assert!(AmalgSigMor::strict(a, b, FinMap::identity(&o), vec![0]).is_err());
    }

    #[test]
    fn supine_unit_injective_not_surjective() {
        let o = set("O", &["x", "y"]);
        let q = set("Q", &["z"]);
        let a = AmalgSig::from_labels(&o, &[("m", "x", &["x", "y"])]).unwrap();
        let u = FinMap::new(o, q, vec![0, 0]).unwrap();
        let (back, eta) = supine_unit(&u, &a).unwrap();
        assert_eq!(back.len(), 8);
        assert_eq!(eta.f, vec![back.find("(m|x;x,y)").unwrap()]);
    }

    #[test]
    fn orbit_constructor() {
        let o = set("O", &["x"]);
        let swap = Perm::from_one_based(&[2, 1]).unwrap();
        let fixed = SymSig::from_orbits(&o, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![swap] }]).unwrap();
        assert_eq!(fixed.len(), 1);
        let free = SymSig::from_orbits(&o, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] }]).unwrap();
        assert_eq!(free.len(), 2);
        assert!(free.carrier.is_free());
        // collapse free onto fixed: exactly one morphism, none back
        let u = FinMap::identity(&o);
        assert_eq!(hom_sym_over(&free, &fixed, &u).len(), 1);
        assert_eq!(hom_sym_over(&fixed, &free, &u).len(), 0);
    }

    #[test]
    fn stabilizer_must_respect_typing() {
        let o = set("O", &["x", "y"]);
        let swap = Perm::from_one_based(&[2, 1]).unwrap();
        let r = SymSig::from_orbits(&o, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 1], stabilizer: vec![swap] }]);
        assert!(r.is_err());
    }

    #[test]
    fn reindex_sym_free_orbit() {
        let q = set("Q", &["0"]);
        let o = set("O", &["0", "1"]);
        let b = SymSig::from_orbits(&q, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] }]).unwrap();
        // 2-to-1 on the inputs only: pin the output to one sort by restricting
        let u = FinMap::new(o, q, vec![0, 0]).unwrap();
        let (ub, _) = reindex_sym(&u, &b).unwrap();
        assert!(ub.carrier.is_free());
        // 2 elements × 8 lifts, free S_2 action
        assert_eq!(ub.len(), 16);
        assert_eq!(ub.carrier.orbit_reps().len(), 8);

        // 2-to-1 only on the input sort: 2 lifts per slot
        let q = set("Q", &["p", "q"]);
        let o = set("O", &["p", "q1", "q2"]);
        let b = SymSig::from_orbits(&q, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![1, 1], stabilizer: vec![] }]).unwrap();
        let u = FinMap::new(o, q, vec![0, 1, 1]).unwrap();
        let (ub, _) = reindex_sym(&u, &b).unwrap();
        assert!(ub.carrier.is_free());
        assert_eq!(ub.carrier.orbit_reps().len(), 4);
    }
}
