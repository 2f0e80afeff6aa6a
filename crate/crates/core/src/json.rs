//! JSON documents for the finite structures, and conversions both ways.
//!
//! Documents refer to elements by label. A map names its domain and
//! codomain by set id; building it checks the ids against the sets it is
//! given.

use std::collections::{BTreeMap, HashMap};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::diagrams::{PolyDiag, PolyDiagMor};
use crate::error::{structural, Error, Result};
use crate::evaluation::Evaluated;
use crate::finset::{FinMap, FinSet, SliceObj};
use crate::monad::Monad;
use crate::monoids::{AmalgMonoid, TGraphMonoid};
use crate::perm::{factorial, Perm};
use crate::signatures::{AmalgSig, AmalgSigMor, Op, SymSig, SymSigMor};
use crate::symset::{EquivMap, SymSet};
use crate::tgraph::TGraph;

/// Parse a document; syntax and shape errors carry their line and column.
pub fn parse<T: DeserializeOwned>(text: &str, what: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::Structural(format!("{what}: {e}")))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinSetDoc {
    pub id: String,
    pub elems: Vec<String>,
}

impl FinSetDoc {
    pub fn build(&self) -> Result<FinSet> {
        FinSet::new(self.id.clone(), self.elems.clone())
    }
}

impl From<&FinSet> for FinSetDoc {
    fn from(s: &FinSet) -> FinSetDoc {
        FinSetDoc { id: s.id().to_string(), elems: s.elems().to_vec() }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct FinMapDoc {
    pub dom: String,
    pub cod: String,
    pub table: BTreeMap<String, String>,
}

impl FinMapDoc {
    pub fn build(&self, dom: &FinSet, cod: &FinSet) -> Result<FinMap> {
        if self.dom != dom.id() || self.cod != cod.id() {
            return structural(format!(
                "map {} → {} where {} → {} was expected",
                self.dom,
                self.cod,
                dom.id(),
                cod.id()
            ));
        }
        if let Some(extra) = self.table.keys().find(|k| !dom.contains(k)) {
            return structural(format!("map from {} has an entry for unknown element {extra:?}", dom.id()));
        }
        let mut table = Vec::with_capacity(dom.len());
        for x in dom.elems() {
            let Some(y) = self.table.get(x) else {
                return structural(format!("map from {} has no entry for {x:?}", dom.id()));
            };
            table.push(cod.require(y)?);
        }
        FinMap::new(dom.clone(), cod.clone(), table)
    }
}

impl From<&FinMap> for FinMapDoc {
    fn from(f: &FinMap) -> FinMapDoc {
        let table = (0..f.dom().len()).map(|i| (f.dom().label(i).to_string(), f.cod().label(f.apply(i)).to_string())).collect();
        FinMapDoc { dom: f.dom().id().to_string(), cod: f.cod().id().to_string(), table }
    }
}

/// `action[n]["elem,[images]"] = elem`, images 1-based.
pub type ActionDoc = BTreeMap<String, BTreeMap<String, String>>;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymSetDoc {
    pub grades: BTreeMap<String, FinSetDoc>,
    #[serde(default)]
    pub action: ActionDoc,
}

fn action_key(label: &str, s: &Perm) -> String {
    format!("{label},{}", serde_json::to_string(s).expect("perm serializes"))
}

fn grade_number(key: &str) -> Result<usize> {
    key.parse().map_err(|_| Error::Structural(format!("grade {key:?} is not a number")))
}

fn action_doc(s: &SymSet) -> ActionDoc {
    let mut out = BTreeMap::new();
    for (n, set) in s.grades() {
        let mut entries = BTreeMap::new();
        for e in 0..set.len() {
            for p in Perm::all(n).into_iter().filter(|p| !p.is_identity()) {
                entries.insert(action_key(set.label(e), &p), set.label(s.act(n, e, &p)).to_string());
            }
        }
        if !entries.is_empty() {
            out.insert(n.to_string(), entries);
        }
    }
    out
}

/// Extend the listed action to all of `S_n` from the adjacent
/// transpositions; every listed entry must agree with the extension.
fn build_action(grades: BTreeMap<usize, FinSet>, action: &ActionDoc) -> Result<SymSet> {
    let mut given: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (key, entries) in action {
        let n = grade_number(key)?;
        let Some(set) = grades.get(&n) else { return structural(format!("action given for missing grade {n}")) };
        for (k, v) in entries {
            let Some((label, perm)) = k.rsplit_once(",[") else {
                return structural(format!("action key {k:?} is not \"elem,[images]\""));
            };
            let p: Perm = parse(&format!("[{perm}"), &format!("permutation in {k:?}"))?;
            if p.n() != n {
                return structural(format!("permutation in {k:?} does not have degree {n}"));
            }
            given.insert((n, set.require(label)?, p.rank()), set.require(v)?);
        }
    }
    let mut tables: BTreeMap<usize, Vec<Vec<Option<usize>>>> = BTreeMap::new();
    for (&n, set) in &grades {
        let nf = factorial(n);
        let id = Perm::identity(n).rank();
        let mut t = vec![vec![None; nf]; set.len()];
        for (e, row) in t.iter_mut().enumerate() {
            row[id] = Some(e);
        }
        let gens: Vec<Perm> = (0..n.saturating_sub(1)).map(|i| Perm::adjacent(n, i)).collect();
        for e in 0..set.len() {
            for g in &gens {
                if !given.contains_key(&(n, e, g.rank())) {
                    return structural(format!("action of {g} on {:?} is missing", set.label(e)));
                }
            }
        }
        // a·(σ∘g) = (a·σ)·g, in order of word length
        let mut frontier = vec![Perm::identity(n)];
        let mut seen = vec![false; nf];
        seen[id] = true;
        while !frontier.is_empty() {
            let mut next = Vec::new();
            for s in &frontier {
                for g in &gens {
                    let sg = s.compose(g);
                    if seen[sg.rank()] {
                        continue;
                    }
                    seen[sg.rank()] = true;
                    for e in 0..set.len() {
                        let es = t[e][s.rank()].expect("shorter words first");
                        t[e][sg.rank()] = Some(given[&(n, es, g.rank())]);
                    }
                    next.push(sg);
                }
            }
            frontier = next;
        }
        tables.insert(n, t);
    }
    for (&(n, e, r), &v) in &given {
        if tables[&n][e][r] != Some(v) {
            let set = &grades[&n];
            return structural(format!(
                "action of {} on {:?} is inconsistent with the generators",
                Perm::unrank(n, r),
                set.label(e)
            ));
        }
    }
    SymSet::new(grades, |n, e, s| tables[&n][e][s.rank()].expect("every permutation reached"))
}

impl SymSetDoc {
    pub fn build(&self) -> Result<SymSet> {
        let grades = self.grades.iter().map(|(k, d)| Ok((grade_number(k)?, d.build()?))).collect::<Result<BTreeMap<_, _>>>()?;
        build_action(grades, &self.action)
    }
}

impl From<&SymSet> for SymSetDoc {
    fn from(s: &SymSet) -> SymSetDoc {
        SymSetDoc { grades: s.grades().map(|(n, g)| (n.to_string(), FinSetDoc::from(g))).collect(), action: action_doc(s) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpDoc {
    pub name: String,
    pub out: String,
    pub ins: Vec<String>,
}

fn op_doc(base: &FinSet, name: &str, out: usize, ins: &[usize]) -> OpDoc {
    OpDoc { name: name.to_string(), out: base.label(out).to_string(), ins: ins.iter().map(|&o| base.label(o).to_string()).collect() }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgSigDoc {
    pub base: FinSetDoc,
    pub ops: Vec<OpDoc>,
}

impl AmalgSigDoc {
    pub fn build(&self) -> Result<AmalgSig> {
        let base = self.base.build()?;
        let ops = self
            .ops
            .iter()
            .map(|o| Ok(Op { name: o.name.clone(), out: base.require(&o.out)?, ins: o.ins.iter().map(|i| base.require(i)).collect::<Result<_>>()? }))
            .collect::<Result<Vec<_>>>()?;
        AmalgSig::new(base, ops)
    }
}

impl From<&AmalgSig> for AmalgSigDoc {
    fn from(a: &AmalgSig) -> AmalgSigDoc {
        AmalgSigDoc { base: (&a.base).into(), ops: a.ops().iter().map(|o| op_doc(&a.base, &o.name, o.out, &o.ins)).collect() }
    }
}

impl<M: Monad> From<&TGraph<M>> for AmalgSigDoc {
    fn from(g: &TGraph<M>) -> AmalgSigDoc {
        let ops = (0..g.len()).map(|a| op_doc(&g.base, g.carrier.label(a), g.gamma[a], &g.monad.leaves(&g.delta[a]))).collect();
        AmalgSigDoc { base: (&g.base).into(), ops }
    }
}

/// A symmetric signature: its operations, grouped by arity in listed
/// order, and the action on them.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymSigDoc {
    pub base: FinSetDoc,
    pub ops: Vec<OpDoc>,
    #[serde(default)]
    pub action: ActionDoc,
}

impl SymSigDoc {
    pub fn build(&self) -> Result<SymSig> {
        let base = self.base.build()?;
        let mut names: BTreeMap<usize, Vec<String>> = BTreeMap::new();
        let mut profiles: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
        for o in &self.ops {
            let n = o.ins.len();
            let mut p = vec![base.require(&o.out)?];
            for i in &o.ins {
                p.push(base.require(i)?);
            }
            names.entry(n).or_default().push(o.name.clone());
            profiles.entry(n).or_default().push(p);
        }
        let mut all: Vec<&String> = names.values().flatten().collect();
        all.sort();
        if let Some(w) = all.windows(2).find(|w| w[0] == w[1]) {
            return structural(format!("duplicate operation name {:?}", w[0]));
        }
        let grades = names.into_iter().map(|(n, ls)| FinSet::new(format!("A_{n}"), ls).map(|s| (n, s))).collect::<Result<BTreeMap<_, _>>>()?;
        SymSig::new(base, build_action(grades, &self.action)?, profiles)
    }
}

impl From<&SymSig> for SymSigDoc {
    fn from(s: &SymSig) -> SymSigDoc {
        let ops = s.carrier.elements().into_iter().map(|(n, e)| op_doc(&s.base, s.label(n, e), s.out(n, e), s.ins(n, e))).collect();
        SymSigDoc { base: (&s.base).into(), ops, action: action_doc(&s.carrier) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDiagDoc {
    pub base: FinSetDoc,
    #[serde(rename = "E")]
    pub e: FinSetDoc,
    #[serde(rename = "B")]
    pub b: FinSetDoc,
    pub s: FinMapDoc,
    pub p: FinMapDoc,
    pub t: FinMapDoc,
}

impl PolyDiagDoc {
    pub fn build(&self) -> Result<PolyDiag> {
        let (o, e, b) = (self.base.build()?, self.e.build()?, self.b.build()?);
        PolyDiag::new(o.clone(), self.s.build(&e, &o)?, self.p.build(&e, &b)?, self.t.build(&b, &o)?)
    }
}

impl From<&PolyDiag> for PolyDiagDoc {
    fn from(d: &PolyDiag) -> PolyDiagDoc {
        PolyDiagDoc { base: (&d.base).into(), e: d.e().into(), b: d.b().into(), s: (&d.s).into(), p: (&d.p).into(), t: (&d.t).into() }
    }
}

/// An object `X → O` of the slice.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceDoc {
    pub total: FinSetDoc,
    pub base: FinSetDoc,
    pub typing: FinMapDoc,
}

impl SliceDoc {
    pub fn build(&self) -> Result<SliceObj> {
        let (x, o) = (self.total.build()?, self.base.build()?);
        Ok(SliceObj::new(self.typing.build(&x, &o)?))
    }
}

impl From<&SliceObj> for SliceDoc {
    fn from(x: &SliceObj) -> SliceDoc {
        SliceDoc { total: x.total().into(), base: x.base().into(), typing: (&x.d).into() }
    }
}

impl From<&Evaluated> for SliceDoc {
    fn from(v: &Evaluated) -> SliceDoc {
        (&v.obj).into()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpImageDoc {
    pub op: String,
    /// the amalgamation `σ_a`, identity when absent
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Perm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AmalgSigMorDoc {
    pub dom: AmalgSigDoc,
    pub cod: AmalgSigDoc,
    pub sorts: FinMapDoc,
    pub ops: BTreeMap<String, OpImageDoc>,
}

impl AmalgSigMorDoc {
    pub fn build(&self) -> Result<AmalgSigMor> {
        let (a, b) = (self.dom.build()?, self.cod.build()?);
        let u = self.sorts.build(&a.base, &b.base)?;
        let mut f = Vec::with_capacity(a.len());
        let mut sigma = Vec::with_capacity(a.len());
        for op in a.ops() {
            let Some(img) = self.ops.get(&op.name) else { return structural(format!("no image for operation {:?}", op.name)) };
            f.push(b.require(&img.op)?);
            sigma.push(img.perm.clone().unwrap_or_else(|| Perm::identity(op.arity())));
        }
        if let Some(extra) = self.ops.keys().find(|k| a.find(k).is_none()) {
            return structural(format!("image given for unknown operation {extra:?}"));
        }
        AmalgSigMor::new(a, b, u, f, sigma)
    }
}

impl From<&AmalgSigMor> for AmalgSigMorDoc {
    fn from(m: &AmalgSigMor) -> AmalgSigMorDoc {
        let ops = m
            .dom
            .ops()
            .iter()
            .enumerate()
            .map(|(i, op)| {
                let s = &m.sigma[i];
                (op.name.clone(), OpImageDoc { op: m.cod.op(m.f[i]).name.clone(), perm: (!s.is_identity()).then(|| s.clone()) })
            })
            .collect();
        AmalgSigMorDoc { dom: (&m.dom).into(), cod: (&m.cod).into(), sorts: (&m.u).into(), ops }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SymSigMorDoc {
    pub dom: SymSigDoc,
    pub cod: SymSigDoc,
    pub sorts: FinMapDoc,
    pub ops: BTreeMap<String, String>,
}

impl SymSigMorDoc {
    pub fn build(&self) -> Result<SymSigMor> {
        let (a, b) = (self.dom.build()?, self.cod.build()?);
        let u = self.sorts.build(&a.base, &b.base)?;
        let mut table = BTreeMap::new();
        for (n, set) in a.carrier.grades() {
            let mut row = Vec::with_capacity(set.len());
            for x in set.elems() {
                let Some(y) = self.ops.get(x) else { return structural(format!("no image for operation {x:?}")) };
                let Some(j) = b.carrier.find(n, y) else {
                    return structural(format!("image {y:?} of {x:?} is not an operation of arity {n}"));
                };
                row.push(j);
            }
            table.insert(n, row);
        }
        let f = EquivMap::new(a.carrier.clone(), b.carrier.clone(), table)?;
        SymSigMor::new(a, b, f, u)
    }
}

impl From<&SymSigMor> for SymSigMorDoc {
    fn from(m: &SymSigMor) -> SymSigMorDoc {
        let ops = m.dom.carrier.elements().into_iter().map(|(n, e)| (m.dom.label(n, e).to_string(), m.cod.label(n, m.f.apply(n, e)).to_string())).collect();
        SymSigMorDoc { dom: (&m.dom).into(), cod: (&m.cod).into(), sorts: (&m.u).into(), ops }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolyDiagMorDoc {
    pub dom: PolyDiagDoc,
    pub cod: PolyDiagDoc,
    pub sorts: FinMapDoc,
    #[serde(rename = "B")]
    pub b: FinMapDoc,
    #[serde(rename = "E")]
    pub e: FinMapDoc,
}

impl PolyDiagMorDoc {
    pub fn build(&self) -> Result<PolyDiagMor> {
        let (d, c) = (self.dom.build()?, self.cod.build()?);
        let u = self.sorts.build(&d.base, &c.base)?;
        let f = self.b.build(d.b(), c.b())?;
        let g = self.e.build(d.e(), c.e())?;
        PolyDiagMor::new(d, c, u, f, g)
    }
}

impl From<&PolyDiagMor> for PolyDiagMorDoc {
    fn from(m: &PolyDiagMor) -> PolyDiagMorDoc {
        PolyDiagMorDoc { dom: (&m.dom).into(), cod: (&m.cod).into(), sorts: (&m.u).into(), b: (&m.f).into(), e: (&m.g).into() }
    }
}

/// One entry `m(a; args) = result` of a composition table.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CompositionDoc {
    pub op: String,
    pub args: Vec<String>,
    pub result: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub perm: Option<Perm>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MonoidDoc {
    pub monad: String,
    pub signature: AmalgSigDoc,
    pub units: BTreeMap<String, String>,
    pub strict: bool,
    pub composition: Vec<CompositionDoc>,
}

impl From<&AmalgMonoid> for MonoidDoc {
    fn from(m: &AmalgMonoid) -> MonoidDoc {
        let c = &m.carrier;
        let composition = m
            .tensor
            .pairs
            .iter()
            .zip(&m.mult)
            .map(|((a, bs), v)| CompositionDoc {
                op: c.op(*a).name.clone(),
                args: bs.iter().map(|&b| c.op(b).name.clone()).collect(),
                result: v.as_ref().map(|(r, _)| c.op(*r).name.clone()),
                perm: v.as_ref().map(|(_, s)| s.clone()),
            })
            .collect();
        MonoidDoc { monad: "list".into(), signature: c.into(), units: units(&c.base, &m.unit, |a| c.op(a).name.clone()), strict: m.strict, composition }
    }
}

fn units(base: &FinSet, unit: &[usize], name: impl Fn(usize) -> String) -> BTreeMap<String, String> {
    unit.iter().enumerate().map(|(o, &a)| (base.label(o).to_string(), name(a))).collect()
}

impl<M: Monad> TGraphMonoid<M> {
    pub fn to_doc(&self, monad: &str) -> MonoidDoc {
        let g = &self.graph;
        let composition = self
            .tensor
            .pairs
            .iter()
            .zip(&self.mult)
            .map(|((a, w), v)| CompositionDoc {
                op: self.label(*a).to_string(),
                args: g.monad.leaves(w).iter().map(|&b| self.label(b).to_string()).collect(),
                result: v.map(|r| self.label(r).to_string()),
                perm: None,
            })
            .collect();
        MonoidDoc {
            monad: monad.to_string(),
            signature: g.into(),
            units: units(&g.base, &self.unit, |a| self.label(a).to_string()),
            strict: true,
            composition,
        }
    }
}

/// Outcome of a check: `verdict` plus a witness when something failed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub verdict: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<Value>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub details: Option<Value>,
}

impl Report {
    pub fn holds(details: Option<Value>) -> Report {
        Report { verdict: "holds".into(), counterexample: None, details }
    }

    pub fn violated(counterexample: Value, details: Option<Value>) -> Report {
        Report { verdict: "violated".into(), counterexample: Some(counterexample), details }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::signatures::OrbitSpec;

    fn base() -> FinSet {
        FinSet::from_strs("O", &["x", "y"]).unwrap()
    }

    #[test]
    fn finmap_round_trip_and_errors() {
        let o = base();
        let x = FinSet::from_strs("X", &["p", "q", "r"]).unwrap();
        let f = FinMap::from_labels(&x, &o, &[("p", "x"), ("q", "y"), ("r", "y")]).unwrap();
        let doc = FinMapDoc::from(&f);
        assert_eq!(doc.build(&x, &o).unwrap(), f);
        assert!(doc.build(&o, &x).is_err());
        let mut short = doc.clone();
        short.table.remove("q");
        assert!(short.build(&x, &o).unwrap_err().to_string().contains("\"q\""));
    }

    #[test]
    fn symmetric_signature_round_trip() {
        let o = base();
        let specs = [
            OrbitSpec { name: "m".into(), out: 0, ins: vec![0, 0], stabilizer: vec![Perm::adjacent(2, 0)] },
            OrbitSpec { name: "k".into(), out: 1, ins: vec![0, 1, 0], stabilizer: vec![] },
        ];
        let s = SymSig::from_orbits(&o, &specs).unwrap();
        let doc = SymSigDoc::from(&s);
        let text = serde_json::to_string(&doc).unwrap();
        let back = parse::<SymSigDoc>(&text, "signature").unwrap().build().unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn action_from_generators_only() {
        let doc: SymSigDoc = parse(
            r#"{"base": {"id": "O", "elems": ["x"]},
                "ops": [{"name": "a", "out": "x", "ins": ["x", "x", "x"]},
                        {"name": "b", "out": "x", "ins": ["x", "x", "x"]},
                        {"name": "c", "out": "x", "ins": ["x", "x", "x"]}],
                "action": {"3": {"a,[2,1,3]": "a", "b,[2,1,3]": "b", "c,[2,1,3]": "c",
                                 "a,[1,3,2]": "b", "b,[1,3,2]": "a", "c,[1,3,2]": "c"}}}"#,
            "signature",
        )
        .unwrap();
        assert!(doc.build().is_err(), "(12) fixes a, b but (23) swaps them: not an action");
    }

    #[test]
    fn malformed_input_has_a_location() {
        let e = parse::<AmalgSigDoc>("{\"base\": {\"id\": \"O\",\n \"elems\": [1]}}", "input").unwrap_err();
        assert!(e.to_string().contains("line 2"), "{e}");
    }

    #[test]
    fn poly_and_morphisms_round_trip() {
        let a = AmalgSig::from_labels(&base(), &[("f", "x", &["x", "y"]), ("g", "y", &["y", "x"])]).unwrap();
        let d = crate::compare::iota_a(&a).unwrap();
        assert_eq!(PolyDiagDoc::from(&d).build().unwrap(), d);
        let swap = AmalgSigMor::new(a.clone(), a.clone(), FinMap::identity(&a.base), vec![0, 1], vec![Perm::identity(2); 2]).unwrap();
        let doc = AmalgSigMorDoc::from(&swap);
        assert_eq!(doc.build().unwrap().f, swap.f);
        let pm = crate::compare::iota_a_mor(&swap).unwrap();
        assert_eq!(PolyDiagMorDoc::from(&pm).build().unwrap(), pm);
    }
}
