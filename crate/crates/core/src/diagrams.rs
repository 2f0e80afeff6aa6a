//! Tensors of signatures (total, single, symmetric), coherence maps,
//! polynomial and analytic diagrams.

use std::collections::{BTreeMap, HashMap};

use crate::error::{structural, Error, Result};
use crate::finset::{product_indices, FinMap, FinSet, UnionFind};
use crate::perm::{operad_compose, Perm};
use crate::signatures::{profile_lifts, AmalgSig, AmalgSigMor, Op, SymSig};
use crate::symset::{EquivMap, SymSet};

/// `A ⊗ B` with its elements `⟨a, b_1, …, b_|a|⟩`.
#[derive(Clone, Debug)]
pub struct AmalgTensor {
    pub sig: AmalgSig,
    pub pairs: Vec<(usize, Vec<usize>)>,
    index: HashMap<(usize, Vec<usize>), usize>,
}

impl AmalgTensor {
    pub fn lookup(&self, a: usize, bs: &[usize]) -> Option<usize> {
        self.index.get(&(a, bs.to_vec())).copied()
    }

    fn require(&self, a: usize, bs: &[usize]) -> Result<usize> {
        self.lookup(a, bs).ok_or_else(|| Error::Inconsistent(format!("no tensor element <{a}|{bs:?}>")))
    }
}

/// Choices of one operation per slot whose arities sum to at most `budget`.
fn picks_within(b: &AmalgSig, choices: &[&Vec<usize>], budget: usize) -> Vec<Vec<usize>> {
    fn go(b: &AmalgSig, choices: &[&Vec<usize>], budget: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        let Some((first, rest)) = choices.split_first() else {
            out.push(cur.clone());
            return;
        };
        for &y in first.iter() {
            let n = b.arity(y);
            if n <= budget {
                cur.push(y);
                go(b, rest, budget - n, cur, out);
                cur.pop();
            }
        }
    }
    let mut out = Vec::new();
    go(b, choices, budget, &mut Vec::new(), &mut out);
    out
}

/// Total tensor; only results of arity at most `max_arity` are kept when given.
pub fn tensor_total_bounded(a: &AmalgSig, b: &AmalgSig, max_arity: Option<usize>) -> Result<AmalgTensor> {
    if a.base != b.base {
        return structural("tensor of signatures over different bases");
    }
    let mut by_out = vec![Vec::new(); b.base.len()];
    for (i, op) in b.ops().iter().enumerate() {
        by_out[op.out].push(i);
    }
    let mut ops = Vec::new();
    let mut pairs = Vec::new();
    for (x, op) in a.ops().iter().enumerate() {
        let choices: Vec<&Vec<usize>> = op.ins.iter().map(|&o| &by_out[o]).collect();
        for bs in picks_within(b, &choices, max_arity.unwrap_or(usize::MAX)) {
            let ins: Vec<usize> = bs.iter().flat_map(|&y| b.op(y).ins.iter().copied()).collect();
            let names: Vec<&str> = bs.iter().map(|&y| b.op(y).name.as_str()).collect();
            ops.push(Op { name: format!("<{}|{}>", op.name, names.join(",")), out: op.out, ins });
            pairs.push((x, bs));
        }
    }
    let sig = AmalgSig::new(a.base.clone(), ops)?;
    let index = pairs.iter().enumerate().map(|(i, p)| (p.clone(), i)).collect();
    Ok(AmalgTensor { sig, pairs, index })
}

pub fn tensor_total(a: &AmalgSig, b: &AmalgSig) -> Result<AmalgTensor> {
    tensor_total_bounded(a, b, None)
}

/// `f ⊗ g`: `⟨a, b⃗⟩ ↦ ⟨f(a), (g(b_{σ_a(j)}))_j⟩` with amalgamation
/// `σ_a ∗ (τ_{b_{σ_a(j)}})_j`.
pub fn tensor_mor(f: &AmalgSigMor, g: &AmalgSigMor, src: &AmalgTensor, tgt: &AmalgTensor) -> Result<AmalgSigMor> {
    if f.u != g.u {
        return structural("tensor of morphisms over different base maps");
    }
    let mut fm = Vec::new();
    let mut sigma = Vec::new();
    for (a, bs) in &src.pairs {
        let s = &f.sigma[*a];
        let moved: Vec<usize> = (0..s.n()).map(|j| bs[s.apply(j)]).collect();
        let imgs: Vec<usize> = moved.iter().map(|&y| g.f[y]).collect();
        fm.push(tgt.require(f.f[*a], &imgs)?);
        let inner: Vec<Perm> = moved.iter().map(|&y| g.sigma[y].clone()).collect();
        sigma.push(operad_compose(s, &inner)?);
    }
    AmalgSigMor::new(src.sig.clone(), tgt.sig.clone(), f.u.clone(), fm, sigma)
}

/// `α: (A⊗B)⊗C → A⊗(B⊗C)`, `⟨⟨a,b⃗⟩,c⃗⟩ ↦ ⟨a, (⟨b_i, c-block_i⟩)_i⟩`.
pub fn associator(ab_c: &AmalgTensor, ab: &AmalgTensor, a_bc: &AmalgTensor, bc: &AmalgTensor, b: &AmalgSig) -> Result<AmalgSigMor> {
    let mut f = Vec::new();
    for (x, cs) in &ab_c.pairs {
        let (a, bs) = &ab.pairs[*x];
        let mut off = 0;
        let mut inner = Vec::new();
        for &y in bs {
            let k = b.arity(y);
            inner.push(bc.require(y, &cs[off..off + k])?);
            off += k;
        }
        f.push(a_bc.require(*a, &inner)?);
    }
    AmalgSigMor::strict(ab_c.sig.clone(), a_bc.sig.clone(), FinMap::identity(&b.base), f)
}

/// `λ: I ⊗ A → A`.
pub fn left_unitor(ia: &AmalgTensor, a: &AmalgSig) -> Result<AmalgSigMor> {
    let f = ia.pairs.iter().map(|(_, bs)| bs[0]).collect();
    AmalgSigMor::strict(ia.sig.clone(), a.clone(), FinMap::identity(&a.base), f)
}

/// `ρ: A ⊗ I → A`.
pub fn right_unitor(ai: &AmalgTensor, a: &AmalgSig) -> Result<AmalgSigMor> {
    let f = ai.pairs.iter().map(|(x, _)| *x).collect();
    AmalgSigMor::strict(ai.sig.clone(), a.clone(), FinMap::identity(&a.base), f)
}

/// Outcome of the coherence checks on one triple (or quadruple).
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct CoherenceReport {
    pub alpha_bijective: bool,
    pub lambda_bijective: bool,
    pub rho_bijective: bool,
    pub pentagon: bool,
    pub triangle: bool,
}

impl CoherenceReport {
    pub fn holds(&self) -> bool {
        self.alpha_bijective && self.lambda_bijective && self.rho_bijective && self.pentagon && self.triangle
    }
}

/// Bijectivity of `α_{A,B,C}`, `λ_A`, `ρ_A`; pentagon on `(A,B,C,D)`;
/// triangle on `(A,B)`.
pub fn check_coherence(a: &AmalgSig, b: &AmalgSig, c: &AmalgSig, d: &AmalgSig) -> Result<CoherenceReport> {
    let i = AmalgSig::unit(&a.base);
    let t = tensor_total;
    let ab = t(a, b)?;
    let bc = t(b, c)?;
    let ab_c = t(&ab.sig, c)?;
    let a_bc = t(a, &bc.sig)?;
    let alpha = associator(&ab_c, &ab, &a_bc, &bc, b)?;
    let ia = t(&i, a)?;
    let ai = t(a, &i)?;
    let lambda = left_unitor(&ia, a)?;
    let rho = right_unitor(&ai, a)?;

    // pentagon: ((AB)C)D → A(B(CD))
    let cd = t(c, d)?;
    let abc_d = t(&ab_c.sig, d)?;
    let ab_cd = t(&ab.sig, &cd.sig)?;
    let b_cd = t(b, &cd.sig)?;
    let a_bcd = t(a, &b_cd.sig)?;
    let bc_d = t(&bc.sig, d)?;
    let a_bc_d = t(&a_bc.sig, d)?;
    let a_b_cd = t(a, &bc_d.sig)?;
    // top: α_{A,B,CD} ∘ α_{AB,C,D}
    let top1 = associator(&abc_d, &ab_c, &ab_cd, &cd, c)?;
    let top2 = associator(&ab_cd, &ab, &a_bcd, &b_cd, b)?;
    let top = top2.after(&top1)?;
    // bottom: (1_A ⊗ α_{B,C,D}) ∘ α_{A,BC,D} ∘ (α_{A,B,C} ⊗ 1_D)
    let alpha_d = tensor_mor(&alpha, &AmalgSigMor::identity(d), &abc_d, &a_bc_d)?;
    let mid = associator(&a_bc_d, &a_bc, &a_b_cd, &bc_d, &bc.sig)?;
    let alpha_bcd = associator(&bc_d, &bc, &b_cd, &cd, c)?;
    let one_alpha = tensor_mor(&AmalgSigMor::identity(a), &alpha_bcd, &a_b_cd, &a_bcd)?;
    let bottom = one_alpha.after(&mid.after(&alpha_d)?)?;
    let pentagon = top == bottom;

    // triangle: (1_A ⊗ λ_B) ∘ α_{A,I,B} = ρ_A ⊗ 1_B
    let a_i = t(a, &i)?;
    let ai_b = t(&a_i.sig, b)?;
    let i_b = t(&i, b)?;
    let a_ib = t(a, &i_b.sig)?;
    let alpha_aib = associator(&ai_b, &a_i, &a_ib, &i_b, &i)?;
    let lam_b = left_unitor(&i_b, b)?;
    let left = tensor_mor(&AmalgSigMor::identity(a), &lam_b, &a_ib, &ab)?.after(&alpha_aib)?;
    let right = tensor_mor(&right_unitor(&a_i, a)?, &AmalgSigMor::identity(b), &ai_b, &ab)?;
    let triangle = left == right;

    Ok(CoherenceReport {
        alpha_bijective: alpha.is_bijective(),
        lambda_bijective: lambda.is_bijective(),
        rho_bijective: rho.is_bijective(),
        pentagon,
        triangle,
    })
}

/// Single tensor `A ⊗ˢ B` with elements `⟨a, i, b⟩`, `i` 0-based.
#[derive(Clone, Debug)]
pub struct SingleTensor {
    pub sig: AmalgSig,
    pub triples: Vec<(usize, usize, usize)>,
}

impl SingleTensor {
    pub fn lookup(&self, a: usize, i: usize, b: usize) -> Option<usize> {
        self.triples.iter().position(|&t| t == (a, i, b))
    }
}

/// `⟨a, i, b⟩` with `∂_a(i) = ∂_b(0)`; slot `i` replaced by the inputs of `b`.
pub fn tensor_single(a: &AmalgSig, b: &AmalgSig) -> Result<SingleTensor> {
    if a.base != b.base {
        return structural("tensor of signatures over different bases");
    }
    let mut ops = Vec::new();
    let mut triples = Vec::new();
    for (x, op) in a.ops().iter().enumerate() {
        for i in 0..op.arity() {
            for (y, inner) in b.ops().iter().enumerate() {
                if inner.out != op.ins[i] {
                    continue;
                }
                let mut ins = op.ins[..i].to_vec();
                ins.extend(&inner.ins);
                ins.extend(&op.ins[i + 1..]);
                ops.push(Op { name: format!("<{}|{}|{}>", op.name, i + 1, inner.name), out: op.out, ins });
                triples.push((x, i, y));
            }
        }
    }
    Ok(SingleTensor { sig: AmalgSig::new(a.base.clone(), ops)?, triples })
}

/// `ρˢ: A ⊗ˢ I → A`, `⟨a, i, 1⟩ ↦ a`.
pub fn single_right_unitor(ai: &SingleTensor, a: &AmalgSig) -> Result<AmalgSigMor> {
    let f = ai.triples.iter().map(|t| t.0).collect();
    AmalgSigMor::strict(ai.sig.clone(), a.clone(), FinMap::identity(&a.base), f)
}

/// `αˢ: A ⊗ˢ (B ⊗ˢ C) → (A ⊗ˢ B) ⊗ˢ C`, `⟨a,i,⟨b,j,c⟩⟩ ↦ ⟨⟨a,i,b⟩, i+j, c⟩`.
pub fn single_associator(a_bc: &SingleTensor, bc: &SingleTensor, ab_c: &SingleTensor, ab: &SingleTensor) -> Result<AmalgSigMor> {
    let mut f = Vec::new();
    for &(a, i, x) in &a_bc.triples {
        let (b, j, c) = bc.triples[x];
        let y = ab.lookup(a, i, b).ok_or_else(|| Error::Inconsistent("missing single pair".into()))?;
        f.push(ab_c.lookup(y, i + j, c).ok_or_else(|| Error::Inconsistent("missing single triple".into()))?);
    }
    AmalgSigMor::strict(a_bc.sig.clone(), ab_c.sig.clone(), FinMap::identity(&a_bc.sig.base), f)
}

/// A representative `⟨a, (b_i), σ⟩` of the symmetric tensor.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Triple {
    pub a: (usize, usize),
    pub bs: Vec<(usize, usize)>,
    pub sigma: Perm,
}

/// `A ⊗ B` in symmetric signatures: classes of triples under
/// `⟨a·τ; (b_{τ(i)}·σ_{τ(i)}); σ⟩ ∼ ⟨a; b⃗; τ∗(σ_{τ(1)},…)∘σ⟩`.
#[derive(Clone, Debug)]
pub struct SymTensor {
    pub sig: SymSig,
    pub triples: Vec<Triple>,
    /// element `(grade, index)` of each triple's class
    pub class: Vec<(usize, usize)>,
    index: HashMap<Triple, usize>,
}

impl SymTensor {
    pub fn lookup(&self, t: &Triple) -> Option<(usize, usize)> {
        self.index.get(t).map(|&i| self.class[i])
    }

    /// Canonical (lexicographically least) representative of an element.
    pub fn representative(&self, n: usize, e: usize) -> &Triple {
        let i = self.class.iter().position(|&c| c == (n, e)).expect("every class has a member");
        &self.triples[i]
    }
}

/// Image of a triple under the generator `(τ, σ⃗)`, where `σ_j` acts on block `j`:
/// `⟨a; b⃗; ρ⟩ ↦ ⟨a·τ; (b_{τ(i)}·σ_{τ(i)}); (τ∗(σ_{τ(i)}))⁻¹∘ρ⟩`.
fn move_triple(a: &SymSig, b: &SymSig, t: &Triple, tau: &Perm, sigmas: &[Perm]) -> Result<Triple> {
    let (k, ai) = t.a;
    let na = (k, a.carrier.act(k, ai, tau));
    let mut bs = Vec::with_capacity(k);
    let mut inner = Vec::with_capacity(k);
    for i in 0..k {
        let j = tau.apply(i);
        let (n, e) = t.bs[j];
        bs.push((n, b.carrier.act(n, e, &sigmas[j])));
        inner.push(sigmas[j].clone());
    }
    let g = operad_compose(tau, &inner)?;
    Ok(Triple { a: na, bs, sigma: g.inverse().compose(&t.sigma) })
}

/// The symmetric tensor, keeping grades up to `max_grade` when given.
/// With `full_group` the relation is generated by every `(τ, σ⃗)` rather
/// than by adjacent transpositions only.
pub fn tensor_sym_with(a: &SymSig, b: &SymSig, max_grade: Option<usize>, full_group: bool) -> Result<SymTensor> {
    if a.base != b.base {
        return structural("tensor of signatures over different bases");
    }
    let mut by_out: Vec<Vec<(usize, usize)>> = vec![Vec::new(); a.base.len()];
    for (n, e) in b.carrier.elements() {
        by_out[b.out(n, e)].push((n, e));
    }
    let mut triples = Vec::new();
    for (k, ai) in a.carrier.elements() {
        let choices: Vec<&Vec<(usize, usize)>> = a.ins(k, ai).iter().map(|&o| &by_out[o]).collect();
        for pick in product_indices(&choices.iter().map(|c| c.len()).collect::<Vec<_>>()) {
            let bs: Vec<(usize, usize)> = pick.iter().enumerate().map(|(i, &c)| choices[i][c]).collect();
            let n: usize = bs.iter().map(|x| x.0).sum();
            if max_grade.is_some_and(|m| n > m) {
                continue;
            }
            for s in Perm::all(n) {
                triples.push(Triple { a: (k, ai), bs: bs.clone(), sigma: s });
            }
        }
    }
    triples.sort();
    let index: HashMap<Triple, usize> = triples.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let mut uf = UnionFind::new(triples.len());
    for (i, t) in triples.iter().enumerate() {
        let k = t.a.0;
        let sizes: Vec<usize> = t.bs.iter().map(|x| x.0).collect();
        let mut gens: Vec<(Perm, Vec<Perm>)> = Vec::new();
        let ids: Vec<Perm> = sizes.iter().map(|&n| Perm::identity(n)).collect();
        if full_group {
            let per_block: Vec<Vec<Perm>> = sizes.iter().map(|&n| Perm::all(n)).collect();
            for tau in Perm::all(k) {
                for pick in product_indices(&per_block.iter().map(Vec::len).collect::<Vec<_>>()) {
                    gens.push((tau.clone(), pick.iter().enumerate().map(|(j, &c)| per_block[j][c].clone()).collect()));
                }
            }
        } else {
            for g in 0..k.saturating_sub(1) {
                gens.push((Perm::adjacent(k, g), ids.clone()));
            }
            for (j, &n) in sizes.iter().enumerate() {
                for g in 0..n.saturating_sub(1) {
                    let mut s = ids.clone();
                    s[j] = Perm::adjacent(n, g);
                    gens.push((Perm::identity(k), s));
                }
            }
        }
        for (tau, sigmas) in gens {
            let moved = move_triple(a, b, t, &tau, &sigmas)?;
            let j = *index.get(&moved).ok_or_else(|| Error::Inconsistent("tensor relation leaves the triples".into()))?;
            uf.union(i, j);
        }
    }
    let (cls, reps) = uf.classes();
    // classes grouped by grade, in order of their least member
    let mut grade_of_class = Vec::with_capacity(reps.len());
    let mut grade_members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (c, &r) in reps.iter().enumerate() {
        let n = triples[r].sigma.n();
        let list = grade_members.entry(n).or_default();
        grade_of_class.push((n, list.len()));
        list.push(c);
    }
    let class: Vec<(usize, usize)> = cls.iter().map(|&c| grade_of_class[c]).collect();
    let label = |t: &Triple| {
        let names: Vec<&str> = t.bs.iter().map(|&x| b.carrier.label(x)).collect();
        format!("<{}|{}|{}>", a.carrier.label(t.a), names.join(","), t.sigma)
    };
    let mut grades = BTreeMap::new();
    let mut profiles = BTreeMap::new();
    for (&n, cs) in &grade_members {
        grades.insert(n, FinSet::fresh(format!("AxB_{n}"), cs.iter().map(|&c| label(&triples[reps[c]])).collect()));
        let ps: Vec<Vec<usize>> = cs
            .iter()
            .map(|&c| {
                let t = &triples[reps[c]];
                let concat: Vec<usize> = t.bs.iter().flat_map(|&(m, e)| b.ins(m, e).to_vec()).collect();
                let mut p = vec![a.out(t.a.0, t.a.1)];
                p.extend((0..n).map(|j| concat[t.sigma.apply(j)]));
                p
            })
            .collect();
        profiles.insert(n, ps);
    }
    let carrier = SymSet::new(grades, |n, e, s| {
        let c = grade_members[&n][e];
        let t = &triples[reps[c]];
        let moved = Triple { a: t.a, bs: t.bs.clone(), sigma: t.sigma.compose(s) };
        class[index[&moved]].1
    })?;
    let sig = SymSig::new(a.base.clone(), carrier, profiles)?;
    Ok(SymTensor { sig, triples, class, index })
}

pub fn tensor_sym(a: &SymSig, b: &SymSig) -> Result<SymTensor> {
    tensor_sym_with(a, b, None, false)
}

/// `φ₀: I_O → u^*(I_Q)` for amalgamated signatures.
pub fn phi0_amalg(u: &FinMap) -> Result<AmalgSigMor> {
    let io = AmalgSig::unit(u.dom());
    let (ui, _) = crate::signatures::reindex_amalg(u, &AmalgSig::unit(u.cod()))?;
    let f = (0..io.len())
        .map(|o| (0..ui.len()).find(|&y| ui.op(y).profile() == vec![o, o]).expect("identity lifts to itself"))
        .collect();
    AmalgSigMor::strict(io, ui, FinMap::identity(u.dom()), f)
}

/// `φ₂: u^*B ⊗ u^*C → u^*(B ⊗ C)`.
pub fn phi2_amalg(u: &FinMap, b: &AmalgSig, c: &AmalgSig) -> Result<AmalgSigMor> {
    let (ub, pb) = crate::signatures::reindex_amalg(u, b)?;
    let (uc, pc) = crate::signatures::reindex_amalg(u, c)?;
    let bc = tensor_total(b, c)?;
    let (ubc, pbc) = crate::signatures::reindex_amalg(u, &bc.sig)?;
    let src = tensor_total(&ub, &uc)?;
    let mut lifted: HashMap<(usize, Vec<usize>), usize> = HashMap::new();
    for y in 0..ubc.len() {
        lifted.insert((pbc.f[y], ubc.op(y).profile()), y);
    }
    let mut f = Vec::new();
    for (i, (x, ys)) in src.pairs.iter().enumerate() {
        let target = bc.require(pb.f[*x], &ys.iter().map(|&y| pc.f[y]).collect::<Vec<_>>())?;
        let key = (target, src.sig.op(i).profile());
        f.push(*lifted.get(&key).ok_or_else(|| Error::Inconsistent("φ₂ image missing".into()))?);
    }
    AmalgSigMor::strict(src.sig.clone(), ubc, FinMap::identity(u.dom()), f)
}

/// `φ₀` and `φ₂` for symmetric signatures, as maps of carriers.
pub fn phi0_sym(u: &FinMap) -> Result<(SymSig, SymSig, EquivMap)> {
    let io = SymSig::unit(u.dom());
    let (ui, _) = crate::signatures::reindex_sym(u, &SymSig::unit(u.cod()))?;
    let table = [(1, (0..u.dom().len()).map(|o| (0..ui.carrier.grade_len(1)).find(|&y| ui.profile(1, y) == [o, o]).unwrap()).collect())]
        .into_iter()
        .collect();
    let f = EquivMap::new(io.carrier.clone(), ui.carrier.clone(), table)?;
    Ok((io, ui, f))
}

pub fn phi2_sym(u: &FinMap, b: &SymSig, c: &SymSig) -> Result<(SymTensor, SymSig, EquivMap)> {
    let (ub, pb) = crate::signatures::reindex_sym(u, b)?;
    let (uc, pc) = crate::signatures::reindex_sym(u, c)?;
    let bc = tensor_sym(b, c)?;
    let (ubc, pbc) = crate::signatures::reindex_sym(u, &bc.sig)?;
    let src = tensor_sym(&ub, &uc)?;
    let mut lifted: HashMap<(usize, usize, Vec<usize>), usize> = HashMap::new();
    for (n, y) in ubc.carrier.elements() {
        lifted.insert((n, pbc.f.apply(n, y), ubc.profile(n, y).to_vec()), y);
    }
    let mut table: BTreeMap<usize, Vec<usize>> = src.sig.carrier.grades().map(|(n, s)| (n, vec![0; s.len()])).collect();
    for (n, e) in src.sig.carrier.elements() {
        let t = src.representative(n, e);
        let image = Triple {
            a: (t.a.0, pb.f.apply(t.a.0, t.a.1)),
            bs: t.bs.iter().map(|&(m, y)| (m, pc.f.apply(m, y))).collect(),
            sigma: t.sigma.clone(),
        };
        let (_, cls) = bc.lookup(&image).ok_or_else(|| Error::Inconsistent("φ₂ image class missing".into()))?;
        let key = (n, cls, src.sig.profile(n, e).to_vec());
        table.get_mut(&n).unwrap()[e] = *lifted.get(&key).ok_or_else(|| Error::Inconsistent("φ₂ lift missing".into()))?;
    }
    let f = EquivMap::new(src.sig.carrier.clone(), ubc.carrier.clone(), table)?;
    Ok((src, ubc, f))
}

/// A polynomial diagram `O ←s− E −p→ B −t→ O`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDiag {
    pub base: FinSet,
    pub s: FinMap,
    pub p: FinMap,
    pub t: FinMap,
}

impl PolyDiag {
    pub fn new(base: FinSet, s: FinMap, p: FinMap, t: FinMap) -> Result<PolyDiag> {
        if s.cod() != &base || t.cod() != &base || s.dom() != p.dom() || p.cod() != t.dom() {
            return structural("polynomial diagram legs do not match");
        }
        Ok(PolyDiag { base, s, p, t })
    }

    pub fn e(&self) -> &FinSet {
        self.s.dom()
    }

    pub fn b(&self) -> &FinSet {
        self.t.dom()
    }

    /// `p⁻¹(b)` in canonical order.
    pub fn fiber(&self, b: usize) -> Vec<usize> {
        self.p.fiber(b)
    }

    pub fn identity(base: &FinSet) -> PolyDiag {
        PolyDiag::new(base.clone(), FinMap::identity(base), FinMap::identity(base), FinMap::identity(base)).unwrap()
    }

    pub fn is_linear(&self) -> bool {
        self.p.is_bijective()
    }

    pub fn is_monomial(&self) -> bool {
        self.t.is_bijective()
    }
}

pub fn is_linear(d: &PolyDiag) -> bool {
    d.is_linear()
}

pub fn is_monomial(d: &PolyDiag) -> bool {
    d.is_monomial()
}

/// `(u, f, g)`: the outer squares commute and `g` is a bijection on each
/// fibre of `p`, i.e. the middle square is a pullback.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PolyDiagMor {
    pub dom: PolyDiag,
    pub cod: PolyDiag,
    pub u: FinMap,
    pub f: FinMap,
    pub g: FinMap,
}

impl PolyDiagMor {
    pub fn new(dom: PolyDiag, cod: PolyDiag, u: FinMap, f: FinMap, g: FinMap) -> Result<PolyDiagMor> {
        if u.dom() != &dom.base || u.cod() != &cod.base || f.dom() != dom.b() || f.cod() != cod.b() || g.dom() != dom.e() || g.cod() != cod.e() {
            return structural("diagram morphism components do not match");
        }
        for b in 0..dom.b().len() {
            if cod.t.apply(f.apply(b)) != u.apply(dom.t.apply(b)) {
                return structural(format!("t-square fails at {:?}", dom.b().label(b)));
            }
        }
        for e in 0..dom.e().len() {
            if cod.s.apply(g.apply(e)) != u.apply(dom.s.apply(e)) {
                return structural(format!("s-square fails at {:?}", dom.e().label(e)));
            }
            if cod.p.apply(g.apply(e)) != f.apply(dom.p.apply(e)) {
                return structural(format!("p-square fails at {:?}", dom.e().label(e)));
            }
        }
        for b in 0..dom.b().len() {
            let mut imgs: Vec<usize> = dom.fiber(b).iter().map(|&e| g.apply(e)).collect();
            imgs.sort_unstable();
            imgs.dedup();
            if imgs.len() != dom.fiber(b).len() || imgs.len() != cod.fiber(f.apply(b)).len() {
                return structural(format!("middle square is not a pullback at {:?}", dom.b().label(b)));
            }
        }
        Ok(PolyDiagMor { dom, cod, u, f, g })
    }

    pub fn identity(d: &PolyDiag) -> PolyDiagMor {
        PolyDiagMor { dom: d.clone(), cod: d.clone(), u: FinMap::identity(&d.base), f: FinMap::identity(d.b()), g: FinMap::identity(d.e()) }
    }

    pub fn after(&self, first: &PolyDiagMor) -> Result<PolyDiagMor> {
        PolyDiagMor::new(first.dom.clone(), self.cod.clone(), self.u.after(&first.u)?, self.f.after(&first.f)?, self.g.after(&first.g)?)
    }
}

/// All diagram morphisms `d → e` over `u`.
pub fn hom_poly_over(d: &PolyDiag, e: &PolyDiag, u: &FinMap) -> Vec<PolyDiagMor> {
    let cand: Vec<Vec<(usize, Vec<usize>)>> = (0..d.b().len())
            .map(|b| {
                let fib = d.fiber(b);
                let mut out = Vec::new();
                for c in 0..e.b().len() {
                    if e.t.apply(c) != u.apply(d.t.apply(b)) {
                        continue;
                    }
                    let tgt = e.fiber(c);
                    if tgt.len() != fib.len() {
                        continue;
                    }
                    for s in Perm::all(fib.len()) {
                        let img: Vec<usize> = (0..fib.len()).map(|i| tgt[s.apply(i)]).collect();
                        if fib.iter().zip(&img).all(|(&x, &y)| e.s.apply(y) == u.apply(d.s.apply(x))) {
                            out.push((c, img));
                        }
                    }
                }
                out
            })
            .collect();
    product_indices(&cand.iter().map(Vec::len).collect::<Vec<_>>())
        .map(|pick| {
            let mut f = vec![0; d.b().len()];
            let mut g = vec![0; d.e().len()];
            for (b, &k) in pick.iter().enumerate() {
                let (c, img) = &cand[b][k];
                f[b] = *c;
                for (x, y) in d.fiber(b).into_iter().zip(img) {
                    g[x] = *y;
                }
            }
            PolyDiagMor {
                dom: d.clone(),
                cod: e.clone(),
                u: u.clone(),
                f: FinMap::new(d.b().clone(), e.b().clone(), f).unwrap(),
                g: FinMap::new(d.e().clone(), e.e().clone(), g).unwrap(),
            }
        })
        .collect()
}

/// Prone morphism into `d` over `u`: operations `(b, o, y⃗)` with `u(o) = t(b)`
/// and `y⃗` lifting `s` on the fibre of `b`.
pub fn prone_poly(u: &FinMap, d: &PolyDiag) -> Result<(PolyDiag, PolyDiagMor)> {
    if u.cod() != &d.base {
        return structural("reindexing along a map into a different base");
    }
    let o = u.dom();
    let ofib = u.fibers();
    let (mut bl, mut tl, mut fl) = (Vec::new(), Vec::new(), Vec::new());
    let (mut el, mut sl, mut pl, mut gl) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for b in 0..d.b().len() {
        let fib = d.fiber(b);
        let prof: Vec<usize> = fib.iter().map(|&e| d.s.apply(e)).collect();
        for &out in &ofib[d.t.apply(b)] {
            for lift in profile_lifts(u, &prof) {
                let names: Vec<&str> = lift.iter().map(|&x| o.label(x)).collect();
                let bi = bl.len();
                bl.push(format!("({}|{};{})", d.b().label(b), o.label(out), names.join(",")));
                tl.push(out);
                fl.push(b);
                for (k, &e) in fib.iter().enumerate() {
                    el.push(format!("({},{})", bl[bi], d.e().label(e)));
                    sl.push(lift[k]);
                    pl.push(bi);
                    gl.push(e);
                }
            }
        }
    }
    let bset = FinSet::fresh("u*B", bl);
    let eset = FinSet::fresh("u*E", el);
    let pd = PolyDiag::new(o.clone(), FinMap::new(eset.clone(), o.clone(), sl)?, FinMap::new(eset.clone(), bset.clone(), pl)?, FinMap::new(bset.clone(), o.clone(), tl)?)?;
    let m = PolyDiagMor::new(pd.clone(), d.clone(), u.clone(), FinMap::new(bset, d.b().clone(), fl)?, FinMap::new(eset, d.e().clone(), gl)?)?;
    Ok((pd, m))
}

/// Supine morphism `(1_B, 1_E, u)`.
pub fn supine_poly(u: &FinMap, d: &PolyDiag) -> Result<(PolyDiag, PolyDiagMor)> {
    let pd = PolyDiag::new(u.cod().clone(), u.after(&d.s)?, d.p.clone(), u.after(&d.t)?)?;
    let m = PolyDiagMor::new(d.clone(), pd.clone(), u.clone(), FinMap::identity(d.b()), FinMap::identity(d.e()))?;
    Ok((pd, m))
}

/// The unique `k` over `v` with `prone ∘ k = h`.
pub fn factor_through_prone_poly(prone: &PolyDiagMor, h: &PolyDiagMor, v: &FinMap) -> Result<PolyDiagMor> {
    let pd = &prone.dom;
    let src = &h.dom;
    let mut f = Vec::new();
    let mut g = vec![0; src.e().len()];
    for b in 0..src.b().len() {
        let fib = src.fiber(b);
        let want_t = v.apply(src.t.apply(b));
        let hit = (0..pd.b().len()).find(|&c| {
            prone.f.apply(c) == h.f.apply(b) && pd.t.apply(c) == want_t && {
                let tf = pd.fiber(c);
                fib.iter().all(|&e| {
                    let over = tf.iter().find(|&&x| prone.g.apply(x) == h.g.apply(e));
                    over.is_some_and(|&x| pd.s.apply(x) == v.apply(src.s.apply(e)))
                })
            }
        });
        let Some(c) = hit else { return structural(format!("{:?} does not factor through the prone morphism", src.b().label(b))) };
        f.push(c);
        let tf = pd.fiber(c);
        for &e in &fib {
            g[e] = *tf.iter().find(|&&x| prone.g.apply(x) == h.g.apply(e)).unwrap();
        }
    }
    PolyDiagMor::new(src.clone(), pd.clone(), v.clone(), FinMap::new(src.b().clone(), pd.b().clone(), f)?, FinMap::new(src.e().clone(), pd.e().clone(), g)?)
}

/// An analytic diagram over `O`: operations `A`, positions `⟨a, i⟩` with
/// the conjugation action `⟨a,i⟩·τ = ⟨a·τ, τ⁻¹(i)⟩`, and typings `s`, `t`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnDiag {
    pub base: FinSet,
    pub carrier: SymSet,
    pub positions: SymSet,
    /// `pos[n][x] = (a, i)`
    pos: BTreeMap<usize, Vec<(usize, usize)>>,
    /// typing of positions
    s: BTreeMap<usize, Vec<usize>>,
    /// typing of operations
    t: BTreeMap<usize, Vec<usize>>,
}

fn conjugation_positions(carrier: &SymSet) -> Result<(SymSet, BTreeMap<usize, Vec<(usize, usize)>>)> {
    let mut grades = BTreeMap::new();
    let mut pos = BTreeMap::new();
    for (n, set) in carrier.grades() {
        let mut labels = Vec::new();
        let mut ps = Vec::new();
        for a in 0..set.len() {
            for i in 0..n {
                labels.push(format!("<{},{}>", set.label(a), i + 1));
                ps.push((a, i));
            }
        }
        grades.insert(n, FinSet::fresh(format!("E_{n}"), labels));
        pos.insert(n, ps);
    }
    let positions = SymSet::new(grades, |n, x, tau| {
        let (a, i) = pos_at(n, x);
        carrier.act(n, a, tau) * n + tau.inverse().apply(i)
    })?;
    Ok((positions, pos))
}

fn pos_at(n: usize, x: usize) -> (usize, usize) {
    (x / n, x % n)
}

impl AnDiag {
    /// From operations, the typing of each position `⟨a, i⟩` and of each operation.
    pub fn from_typing(base: FinSet, carrier: SymSet, s: BTreeMap<usize, Vec<usize>>, t: BTreeMap<usize, Vec<usize>>) -> Result<AnDiag> {
        let (positions, pos) = conjugation_positions(&carrier)?;
        AnDiag::checked(base, carrier, positions, pos, s, t)
    }

    /// From independently supplied positions; the action on them must be
    /// the conjugation action under `pos`.
    pub fn from_parts(
        base: FinSet,
        carrier: SymSet,
        positions: SymSet,
        pos: BTreeMap<usize, Vec<(usize, usize)>>,
        s: BTreeMap<usize, Vec<usize>>,
        t: BTreeMap<usize, Vec<usize>>,
    ) -> Result<AnDiag> {
        // reorder to the canonical layout x = a·n + i
        let mut canon_s = BTreeMap::new();
        for (n, set) in carrier.grades() {
            let ps = pos.get(&n).cloned().unwrap_or_default();
            if ps.len() != set.len() * n || positions.grade_len(n) != ps.len() {
                return structural(format!("positions of grade {n} are not ⟨a, i⟩ pairs"));
            }
            let mut seen = vec![false; ps.len()];
            for &(a, i) in &ps {
                if a >= set.len() || i >= n || std::mem::replace(&mut seen[a * n + i], true) {
                    return structural(format!("positions of grade {n} are not ⟨a, i⟩ pairs"));
                }
            }
            for (x, &(a, i)) in ps.iter().enumerate() {
                for tau in Perm::all(n) {
                    let y = positions.act(n, x, &tau);
                    if ps[y] != (carrier.act(n, a, &tau), tau.inverse().apply(i)) {
                        return structural(format!("positions of grade {n} do not carry the conjugation action"));
                    }
                }
            }
            let sv = s.get(&n).ok_or_else(|| Error::Structural(format!("no position typing in grade {n}")))?;
            if sv.len() != ps.len() {
                return structural(format!("position typing of grade {n} is not total"));
            }
            let mut c = vec![0; ps.len()];
            for (x, &(a, i)) in ps.iter().enumerate() {
                c[a * n + i] = sv[x];
            }
            canon_s.insert(n, c);
        }
        let (canon, canon_pos) = conjugation_positions(&carrier)?;
        AnDiag::checked(base, carrier, canon, canon_pos, canon_s, t)
    }

    fn checked(
        base: FinSet,
        carrier: SymSet,
        positions: SymSet,
        pos: BTreeMap<usize, Vec<(usize, usize)>>,
        s: BTreeMap<usize, Vec<usize>>,
        t: BTreeMap<usize, Vec<usize>>,
    ) -> Result<AnDiag> {
        for (n, set) in carrier.grades() {
            let (Some(sv), Some(tv)) = (s.get(&n), t.get(&n)) else { return structural(format!("missing typing in grade {n}")) };
            if sv.len() != set.len() * n || tv.len() != set.len() || sv.iter().chain(tv).any(|&o| o >= base.len()) {
                return structural(format!("typing of grade {n} is malformed"));
            }
            for g in (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)) {
                for a in 0..set.len() {
                    if tv[carrier.act(n, a, &g)] != tv[a] {
                        return structural("t is not equivariant");
                    }
                }
                for x in 0..sv.len() {
                    if sv[positions.act(n, x, &g)] != sv[x] {
                        return structural("s is not equivariant");
                    }
                }
            }
        }
        Ok(AnDiag { base, carrier, positions, pos, s, t })
    }

    pub fn s(&self, n: usize, x: usize) -> usize {
        self.s[&n][x]
    }

    pub fn t(&self, n: usize, a: usize) -> usize {
        self.t[&n][a]
    }

    pub fn position(&self, n: usize, x: usize) -> (usize, usize) {
        self.pos[&n][x]
    }

    /// Index of the position `⟨a, i⟩`.
    pub fn position_index(&self, n: usize, a: usize, i: usize) -> usize {
        a * n + i
    }

    pub fn s_table(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.s
    }

    pub fn t_table(&self) -> &BTreeMap<usize, Vec<usize>> {
        &self.t
    }

    /// `p: E → A` as an equivariant map.
    pub fn p(&self) -> EquivMap {
        let table = self.pos.iter().map(|(&n, ps)| (n, ps.iter().map(|&(a, _)| a).collect())).collect();
        EquivMap::new(self.positions.clone(), self.carrier.clone(), table).expect("projection is equivariant")
    }
}

/// The analytic diagram with trivial typing data for a symmetric signature.
pub fn andiag_of_sym(a: &SymSig) -> Result<AnDiag> {
    let mut s = BTreeMap::new();
    let mut t = BTreeMap::new();
    for (n, set) in a.carrier.grades() {
        let mut sv = Vec::with_capacity(set.len() * n);
        let mut tv = Vec::with_capacity(set.len());
        for e in 0..set.len() {
            sv.extend_from_slice(a.ins(n, e));
            tv.push(a.out(n, e));
        }
        s.insert(n, sv);
        t.insert(n, tv);
    }
    AnDiag::from_typing(a.base.clone(), a.carrier.clone(), s, t)
}

/// The symmetric signature read off an analytic diagram.
pub fn sym_of_andiag(d: &AnDiag) -> Result<SymSig> {
    let profiles = d
        .carrier
        .grades()
        .map(|(n, set)| {
            let ps = (0..set.len())
                .map(|a| {
                    let mut p = vec![d.t(n, a)];
                    p.extend((0..n).map(|i| d.s(n, d.position_index(n, a, i))));
                    p
                })
                .collect();
            (n, ps)
        })
        .collect();
    SymSig::new(d.base.clone(), d.carrier.clone(), profiles)
}

/// Morphism of analytic diagrams over the positions classifier: `f` on
/// operations, `⟨a,i⟩ ↦ ⟨f(a),i⟩` on positions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnDiagMor {
    pub dom: AnDiag,
    pub cod: AnDiag,
    pub f: EquivMap,
    pub u: FinMap,
}

impl AnDiagMor {
    pub fn new(dom: AnDiag, cod: AnDiag, f: EquivMap, u: FinMap) -> Result<AnDiagMor> {
        if f.dom != dom.carrier || f.cod != cod.carrier || u.dom() != &dom.base || u.cod() != &cod.base {
            return structural("analytic diagram morphism does not match its endpoints");
        }
        for (n, a) in dom.carrier.elements() {
            let b = f.apply(n, a);
            if cod.t(n, b) != u.apply(dom.t(n, a)) {
                return structural("t-square fails");
            }
            for i in 0..n {
                if cod.s(n, cod.position_index(n, b, i)) != u.apply(dom.s(n, dom.position_index(n, a, i))) {
                    return structural("s-square fails");
                }
            }
        }
        Ok(AnDiagMor { dom, cod, f, u })
    }

    /// The position component `⟨a, i⟩ ↦ ⟨f(a), i⟩`.
    pub fn g(&self, n: usize, x: usize) -> usize {
        let (a, i) = self.dom.position(n, x);
        self.cod.position_index(n, self.f.apply(n, a), i)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::OrbitSpec;

    fn set(id: &str, e: &[&str]) -> FinSet {
        FinSet::from_strs(id, e).unwrap()
    }

    #[test]
    fn binary_self_tensor() {
        let o = set("O", &["x"]);
        let a = AmalgSig::from_labels(&o, &[("m", "x", &["x", "x"])]).unwrap();
        let aa = tensor_total(&a, &a).unwrap();
        assert_eq!(aa.sig.len(), 1);
        assert_eq!(aa.sig.arity(0), 4);
    }

    #[test]
    fn unit_tensor_iso() {
        let o = set("O", &["x", "y"]);
        let a = AmalgSig::from_labels(&o, &[("m", "x", &["x", "y"]), ("c", "y", &[])]).unwrap();
        let ia = tensor_total(&AmalgSig::unit(&o), &a).unwrap();
        assert!(left_unitor(&ia, &a).unwrap().is_bijective());
        let r = check_coherence(&a, &a, &a, &a).unwrap();
        assert!(r.holds(), "{r:?}");
    }

    #[test]
    fn single_tensor_counts() {
        let o = set("O", &["x"]);
        let a = AmalgSig::from_labels(&o, &[("m", "x", &["x", "x"])]).unwrap();
        let b = AmalgSig::from_labels(&o, &[("f", "x", &["x"])]).unwrap();
        assert_eq!(tensor_single(&a, &b).unwrap().sig.len(), 2);
        assert!(tensor_single(&a, &AmalgSig::empty(&o)).unwrap().sig.is_empty());
        let ai = tensor_single(&a, &AmalgSig::unit(&o)).unwrap();
        let rho = single_right_unitor(&ai, &a).unwrap();
        assert_eq!(ai.sig.len(), 2);
        assert!(!rho.is_bijective());
    }

    #[test]
    fn sym_unit_tensor_iso() {
        let o = set("O", &["x"]);
        let a = SymSig::from_orbits(&o, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] }]).unwrap();
        let ia = tensor_sym(&SymSig::unit(&o), &a).unwrap();
        assert_eq!(ia.sig.len(), a.len());
        let ai = tensor_sym(&a, &SymSig::unit(&o)).unwrap();
        assert_eq!(ai.sig.len(), a.len());
    }

    #[test]
    fn generators_match_full_group() {
        let o = set("O", &["x"]);
        let swap = Perm::from_one_based(&[2, 1]).unwrap();
        let a = SymSig::from_orbits(
            &o,
            &[
                OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] },
                OrbitSpec { name: "c".into(), out: 0, ins: vec![0, 0], stabilizer: vec![swap] },
                OrbitSpec { name: "e".into(), out: 0, ins: vec![], stabilizer: vec![] },
            ],
        )
        .unwrap();
        let g = tensor_sym_with(&a, &a, None, false).unwrap();
        let f = tensor_sym_with(&a, &a, None, true).unwrap();
        assert_eq!(g.class, f.class);
    }

    #[test]
    fn andiag_rejects_other_actions() {
        let o = set("O", &["x"]);
        let a = SymSig::from_orbits(&o, &[OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![] }]).unwrap();
        let d = andiag_of_sym(&a).unwrap();
        // positions acted on without the inverse twist on i
        let mut grades = BTreeMap::new();
        grades.insert(2, d.positions.grade(2).unwrap().clone());
        let bad = SymSet::new(grades, |n, x, tau| a.carrier.act(n, x / n, tau) * n + x % n).unwrap();
        let pos = [(2, (0..4).map(|x| (x / 2, x % 2)).collect())].into_iter().collect();
        let r = AnDiag::from_parts(o.clone(), a.carrier.clone(), bad, pos, d.s_table().clone(), d.t_table().clone());
        assert!(r.is_err());
        let back = sym_of_andiag(&d).unwrap();
        assert_eq!(back, a);
    }

    #[test]
    fn poly_morphism_rejects_non_pullback() {
        let o = set("O", &["x"]);
        let e2 = set("E", &["e1", "e2"]);
        let b1 = set("B", &["b"]);
        let bin = PolyDiag::new(o.clone(), FinMap::to_terminal(&e2, &o), FinMap::to_terminal(&e2, &b1), FinMap::to_terminal(&b1, &o)).unwrap();
        assert!(!bin.is_linear());
        assert!(bin.is_monomial());
        let collapse = FinMap::new(e2.clone(), e2.clone(), vec![0, 0]).unwrap();
        let r = PolyDiagMor::new(bin.clone(), bin.clone(), FinMap::identity(&o), FinMap::identity(&b1), collapse);
        assert!(r.is_err());
        assert_eq!(hom_poly_over(&bin, &bin, &FinMap::identity(&o)).len(), 2);
    }
}
