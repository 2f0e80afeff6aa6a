//! Permutations of the positions `1..=n` and the operad of symmetries.
//!
//! Positions are stored 0-based. `p.compose(q)` is "p after q", and symmetric
//! sets act on the right: `(a·p)·q = a·(p.compose(q))`.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{structural, Result};

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Perm {
    img: Vec<usize>,
}

impl fmt::Debug for Perm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self)
    }
}

impl fmt::Display for Perm {
    /// One-based image list, e.g. `[2,1,3]`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, x) in self.img.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{}", x + 1)?;
        }
        write!(f, "]")
    }
}

impl Serialize for Perm {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.one_based().serialize(s)
    }
}

impl<'de> Deserialize<'de> for Perm {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let v = Vec::<usize>::deserialize(d)?;
        Perm::from_one_based(&v).map_err(serde::de::Error::custom)
    }
}

pub fn factorial(n: usize) -> usize {
    (1..=n).product()
}

impl Perm {
    /// From 0-based images.
    pub fn new(img: Vec<usize>) -> Result<Perm> {
        let n = img.len();
        let mut seen = vec![false; n];
        for &x in &img {
            if x >= n || seen[x] {
                return structural(format!("not a permutation of {n} positions: {img:?}"));
            }
            seen[x] = true;
        }
        Ok(Perm { img })
    }

    pub fn from_one_based(img: &[usize]) -> Result<Perm> {
        if img.iter().any(|&x| x == 0) {
            return structural(format!("one-based image list contains 0: {img:?}"));
        }
        Perm::new(img.iter().map(|x| x - 1).collect())
    }

    pub fn one_based(&self) -> Vec<usize> {
        self.img.iter().map(|x| x + 1).collect()
    }

    pub fn identity(n: usize) -> Perm {
        Perm { img: (0..n).collect() }
    }

    /// The adjacent transposition swapping positions `i` and `i+1` (0-based).
    pub fn adjacent(n: usize, i: usize) -> Perm {
        let mut img: Vec<usize> = (0..n).collect();
        img.swap(i, i + 1);
        Perm { img }
    }

    pub fn n(&self) -> usize {
        self.img.len()
    }

    pub fn images(&self) -> &[usize] {
        &self.img
    }

    pub fn apply(&self, i: usize) -> usize {
        self.img[i]
    }

    pub fn is_identity(&self) -> bool {
        self.img.iter().enumerate().all(|(i, &x)| i == x)
    }

    /// `self ∘ other`: apply `other` first.
    pub fn compose(&self, other: &Perm) -> Perm {
        assert_eq!(self.n(), other.n(), "composing permutations of different arity");
        Perm { img: other.img.iter().map(|&x| self.img[x]).collect() }
    }

    pub fn inverse(&self) -> Perm {
        let mut inv = vec![0; self.n()];
        for (i, &x) in self.img.iter().enumerate() {
            inv[x] = i;
        }
        Perm { img: inv }
    }

    /// Reindex a tuple along the permutation: `(v ∘ self)[i] = v[self(i)]`.
    pub fn pull<T: Clone>(&self, v: &[T]) -> Vec<T> {
        self.img.iter().map(|&x| v[x].clone()).collect()
    }

    /// All permutations of `n` positions in lexicographic order.
    pub fn all(n: usize) -> Vec<Perm> {
        let mut out = Vec::with_capacity(factorial(n));
        let mut cur: Vec<usize> = (0..n).collect();
        loop {
            out.push(Perm { img: cur.clone() });
            // next lexicographic permutation
            let Some(i) = (1..n).rev().find(|&i| cur[i - 1] < cur[i]) else { break };
            let j = (i..n).rev().find(|&j| cur[j] > cur[i - 1]).unwrap();
            cur.swap(i - 1, j);
            cur[i..].reverse();
        }
        out
    }

    /// Lexicographic rank among `Perm::all(n)`.
    pub fn rank(&self) -> usize {
        let n = self.n();
        let mut r = 0;
        for i in 0..n {
            let smaller = self.img[i + 1..].iter().filter(|&&x| x < self.img[i]).count();
            r += smaller * factorial(n - 1 - i);
        }
        r
    }

    pub fn unrank(n: usize, mut r: usize) -> Perm {
        let mut pool: Vec<usize> = (0..n).collect();
        let mut img = Vec::with_capacity(n);
        for i in 0..n {
            let f = factorial(n - 1 - i);
            img.push(pool.remove(r / f));
            r %= f;
        }
        Perm { img }
    }

    /// Block sum `self ⊕ other`: acts on the first `self.n()` positions by
    /// `self` and on the rest by `other`.
    pub fn block_sum(&self, other: &Perm) -> Perm {
        let k = self.n();
        let mut img = self.img.clone();
        img.extend(other.img.iter().map(|x| x + k));
        Perm { img }
    }
}

/// Operad composite `τ∗(σ_1,…,σ_k)` in the operad of symmetries.
///
/// Position `j` of block `i` (blocks laid out in order with sizes
/// `|σ_1|,…,|σ_k|`) goes to position `σ_i(j)` of block `τ(i)` of the target,
/// whose blocks are laid out in order `1..k` with block `ℓ` of size
/// `|σ_{τ⁻¹(ℓ)}|`.
pub fn operad_compose(tau: &Perm, sigmas: &[Perm]) -> Result<Perm> {
    let k = tau.n();
    if sigmas.len() != k {
        return structural(format!("operad composite: {} inner permutations for arity {k}", sigmas.len()));
    }
    let sizes: Vec<usize> = sigmas.iter().map(Perm::n).collect();
    let inv = tau.inverse();
    // offsets of target blocks
    let mut tgt_off = vec![0; k];
    let mut acc = 0;
    for l in 0..k {
        tgt_off[l] = acc;
        acc += sizes[inv.apply(l)];
    }
    let mut img = Vec::with_capacity(acc);
    for (i, s) in sigmas.iter().enumerate() {
        for j in 0..s.n() {
            img.push(tgt_off[tau.apply(i)] + s.apply(j));
        }
    }
    Ok(Perm { img })
}

/// The index formula for the operad composite, read with block sizes
/// `k_i = n_i`:
/// `(k_1+…+k_{m₀−1}+m₁) ↦ k_{τ⁻¹(1)}+…+k_{τ⁻¹(τ(m₀)−1)}+σ_{m₀}(m₁)`.
/// Kept separate from [`operad_compose`] so the two can be compared.
pub fn operad_compose_formula(tau: &Perm, sigmas: &[Perm]) -> Result<Perm> {
    let k = tau.n();
    if sigmas.len() != k {
        return structural("operad composite: arity mismatch");
    }
    let n: Vec<usize> = sigmas.iter().map(Perm::n).collect();
    let total: usize = n.iter().sum();
    let mut img = vec![0; total];
    // one-based throughout, as in the formula
    for m0 in 1..=k {
        let before: usize = n[..m0 - 1].iter().sum();
        for m1 in 1..=n[m0 - 1] {
            let tm0 = tau.apply(m0 - 1) + 1;
            let shift: usize = (1..tm0).map(|l| n[tau.inverse().apply(l - 1)]).sum();
            let value = shift + sigmas[m0 - 1].apply(m1 - 1) + 1;
            img[before + m1 - 1] = value - 1;
        }
    }
    Perm::new(img)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(v: &[usize]) -> Perm {
        Perm::from_one_based(v).unwrap()
    }

    #[test]
    fn rank_roundtrip() {
        for n in 0..=5 {
            for (r, q) in Perm::all(n).iter().enumerate() {
                assert_eq!(q.rank(), r);
                assert_eq!(&Perm::unrank(n, r), q);
            }
        }
    }

    #[test]
    fn compose_is_after() {
        let a = p(&[2, 3, 1]);
        let b = p(&[2, 1, 3]);
        // (a∘b)(1) = a(b(1)) = a(2) = 3
        assert_eq!(a.compose(&b).one_based()[0], 3);
        assert!(a.compose(&a.inverse()).is_identity());
    }

    #[test]
    fn block_swap_example() {
        // swap blocks of sizes 2 and 1: positions 1,2 go to 2,3 and 3 goes to 1
        let c = operad_compose(&p(&[2, 1]), &[Perm::identity(2), Perm::identity(1)]).unwrap();
        assert_eq!(c.one_based(), vec![2, 3, 1]);
    }

    #[test]
    fn arity_mismatch_is_structural() {
        assert!(operad_compose(&Perm::identity(2), &[Perm::identity(1)]).is_err());
    }

    #[test]
    fn bad_images_rejected() {
        assert!(Perm::from_one_based(&[1, 1]).is_err());
        assert!(Perm::from_one_based(&[0, 1]).is_err());
    }
}
