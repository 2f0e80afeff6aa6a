//! Seeded random fixtures: signatures, and morphisms between them that
//! exist by construction.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::finset::{FinMap, FinSet};
use crate::perm::Perm;
use crate::signatures::{hom_sym_over, AmalgSig, AmalgSigMor, Op, OrbitSpec, SymSig, SymSigMor};

pub type Fixtures = ChaCha8Rng;

pub fn seeded(seed: u64) -> Fixtures {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A base with between 1 and `max_sorts` sorts.
pub fn base(rng: &mut Fixtures, id: &str, max_sorts: usize) -> FinSet {
    let n = rng.gen_range(1..=max_sorts.max(1));
    FinSet::fresh(id, (0..n).map(|i| format!("{}{i}", id.to_lowercase())).collect())
}

fn profile(rng: &mut Fixtures, base: &FinSet, max_arity: usize) -> (usize, Vec<usize>) {
    let n = rng.gen_range(0..=max_arity);
    (rng.gen_range(0..base.len()), (0..n).map(|_| rng.gen_range(0..base.len())).collect())
}

pub fn amalg_sig(rng: &mut Fixtures, base: &FinSet, max_ops: usize, max_arity: usize) -> AmalgSig {
    let k = rng.gen_range(0..=max_ops);
    let ops = (0..k)
        .map(|i| {
            let (out, ins) = profile(rng, base, max_arity);
            Op { name: format!("f{i}"), out, ins }
        })
        .collect();
    AmalgSig::new(base.clone(), ops).expect("typed in the base")
}

/// Three signatures over one common base.
pub fn amalg_triple(rng: &mut Fixtures, max_ops: usize, max_arity: usize, max_sorts: usize) -> [AmalgSig; 3] {
    let o = base(rng, "O", max_sorts);
    [(); 3].map(|_| amalg_sig(rng, &o, max_ops, max_arity))
}

fn random_subset<T: Clone>(rng: &mut Fixtures, xs: &[T], max: usize) -> Vec<T> {
    let k = rng.gen_range(0..=max.min(xs.len()));
    xs.choose_multiple(rng, k).cloned().collect()
}

/// Between 1 and `max_orbits` orbits, each with a random subgroup of the
/// permutations preserving its input sorts as stabilizer.
pub fn sym_sig(rng: &mut Fixtures, base: &FinSet, max_orbits: usize, max_arity: usize) -> SymSig {
    let k = rng.gen_range(1..=max_orbits.max(1));
    let specs: Vec<OrbitSpec> = (0..k)
        .map(|i| {
            let (out, ins) = profile(rng, base, max_arity);
            let preserving: Vec<Perm> = Perm::all(ins.len()).into_iter().filter(|g| (0..ins.len()).all(|j| ins[g.apply(j)] == ins[j])).collect();
            let stabilizer = random_subset(rng, &preserving, 2);
            OrbitSpec { name: format!("g{i}"), out, ins, stabilizer }
        })
        .collect();
    SymSig::from_orbits(base, &specs).expect("stabilizers preserve the typing")
}

/// A morphism in the fibre: the domain's orbits are quotients-in-reverse
/// of orbits of the codomain, so a map exists.
pub fn sym_sig_mor(rng: &mut Fixtures, max_orbits: usize, max_arity: usize, max_sorts: usize) -> SymSigMor {
    let o = base(rng, "O", max_sorts);
    let b = sym_sig(rng, &o, max_orbits, max_arity);
    let elems = b.carrier.elements();
    let k = rng.gen_range(1..=max_orbits.max(1));
    let specs: Vec<OrbitSpec> = (0..k)
        .map(|i| {
            let &(n, e) = elems.choose(rng).expect("at least one orbit");
            let stab = b.carrier.stabilizer(n, e);
            OrbitSpec { name: format!("h{i}"), out: b.out(n, e), ins: b.ins(n, e).to_vec(), stabilizer: random_subset(rng, &stab, 2) }
        })
        .collect();
    let a = SymSig::from_orbits(&o, &specs).expect("subgroups of stabilizers preserve the typing");
    let homs = hom_sym_over(&a, &b, &FinMap::identity(&o));
    homs.choose(rng).cloned().expect("each orbit maps onto its source orbit")
}

/// A morphism over a random surjection of bases, with random
/// amalgamations `σ_a`.
pub fn amalg_sig_mor(rng: &mut Fixtures, max_ops: usize, max_arity: usize, max_sorts: usize) -> AmalgSigMor {
    let q = base(rng, "Q", max_sorts);
    let b = loop {
        let b = amalg_sig(rng, &q, max_ops, max_arity);
        if !b.is_empty() {
            break b;
        }
    };
    let extra = rng.gen_range(0..=1);
    let p = FinSet::fresh("P", (0..q.len() + extra).map(|i| format!("p{i}")).collect());
    let mut table: Vec<usize> = (0..q.len()).chain((0..extra).map(|_| rng.gen_range(0..q.len()))).collect();
    table.shuffle(rng);
    let u = FinMap::new(p.clone(), q.clone(), table).expect("lands in Q");
    let fibers = u.fibers();
    let k = rng.gen_range(1..=max_ops.max(1));
    let mut ops = Vec::new();
    let mut f = Vec::new();
    let mut sigma = Vec::new();
    for i in 0..k {
        let bi = rng.gen_range(0..b.len());
        let target = b.op(bi);
        let n = target.arity();
        let s = Perm::unrank(n, rng.gen_range(0..crate::perm::factorial(n)));
        let mut ins = vec![0; n];
        for (j, &o) in target.ins.iter().enumerate() {
            ins[s.apply(j)] = *fibers[o].choose(rng).expect("u is onto");
        }
        let out = *fibers[target.out].choose(rng).expect("u is onto");
        ops.push(Op { name: format!("f{i}"), out, ins });
        f.push(bi);
        sigma.push(s);
    }
    let a = AmalgSig::new(p, ops).expect("typed in P");
    AmalgSigMor::new(a, b, u, f, sigma).expect("squares commute by construction")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn same_seed_same_fixture() {
        let a = sym_sig_mor(&mut seeded(7), 2, 3, 2);
        let b = sym_sig_mor(&mut seeded(7), 2, 3, 2);
        assert_eq!(a, b);
    }

    #[test]
    fn generated_morphisms_are_valid() {
        let mut rng = seeded(1);
        for _ in 0..50 {
            let m = amalg_sig_mor(&mut rng, 3, 3, 2);
            assert_eq!(m.f.len(), m.dom.len());
            let s = sym_sig_mor(&mut rng, 2, 3, 2);
            assert!(s.dom.len() > 0);
        }
    }
}
