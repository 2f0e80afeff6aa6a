use std::fs;
use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::Serialize;
use serde_json::{json, Value};
use sigkit::compare::{
    confirm_emb_full, diagonal, fibre_morphisms, iota_a, iota_s, k_diag, k_sig, amalg_of_free, phi_component, phi_natural,
    poly_round_trip, psi, psi_natural_in_diagram, ComparisonWitness,
};
use sigkit::diagrams::{sym_of_andiag, tensor_single, tensor_sym_with, tensor_total_bounded};
use sigkit::error::{Error, Result};
use sigkit::evaluation::{
    check_weak_wide_pullback_preservation, family, rep_amalg, rep_poly, rep_sym, AnalyticFunctor, Gumm, NatTransData, PolyFunctor,
    SliceFunctor, TGraphFunctor, TabulatedFunctor,
};
use sigkit::finset::SliceObj;
use sigkit::json::{
    parse, AmalgSigDoc, AmalgSigMorDoc, FinMapDoc, MonoidDoc, PolyDiagDoc, PolyDiagMorDoc, Report, SliceDoc,
    SymSetDoc, SymSigDoc, SymSigMorDoc,
};
use sigkit::monad::{Identity, List, Monad};
use sigkit::monoids::{free_amalg_monoid, free_multicategory, FreeChainTruncation};
use sigkit::opetopes::{terminal_cells, to_dot};
use sigkit::random;
use sigkit::recover::recover_signature;
use sigkit::signatures::{find_sym_iso, AmalgSig, SymSig};
use sigkit::tgraph::{self, TGraph};

use crate::{Builtin, Command, ComparisonKind, FreeKind, FunctorKind, Outcome, Property, TensorKind, Verify};

fn load<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|e| Error::Structural(format!("{}: {e}", path.display())))?;
    parse(&text, &path.display().to_string())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("documents serialize")
}

fn amalg(path: &Path) -> Result<AmalgSig> {
    load::<AmalgSigDoc>(path)?.build()
}

fn symmetric(path: &Path) -> Result<SymSig> {
    load::<SymSigDoc>(path)?.build()
}

fn functor(kind: FunctorKind, input: &Path) -> Result<Box<dyn SliceFunctor>> {
    Ok(match kind {
        FunctorKind::Poly => Box::new(PolyFunctor(load::<PolyDiagDoc>(input)?.build()?)),
        FunctorKind::Analytic => Box::new(AnalyticFunctor(symmetric(input)?)),
        FunctorKind::Tgraph => Box::new(TGraphFunctor(TGraph::of_signature(List, &amalg(input)?)?)),
    })
}

fn missing(what: &str) -> Error {
    Error::Structural(format!("{what} needs --kind with --input, or --builtin"))
}

pub fn run(cmd: Command, seed: u64) -> Result<Outcome> {
    match cmd {
        Command::Eval { kind, input, slice, counts } => eval(kind, &input, slice, counts),
        Command::Tensor { kind, left, right, max_arity } => tensor(kind, &left, &right, max_arity),
        Command::Free { kind, depth, arity_bound, input } => free(kind, depth, arity_bound, &input),
        Command::Opetopes { dim, size, dot } => opetopes(dim, size, dot),
        Command::Check { property, kind, input, builtin, legs, bound } => match property {
            Property::WeakWidePb => weak_wide_pb(kind, input, builtin, legs, bound, seed),
            Property::Cartesian => cartesian(kind, input, builtin, bound, seed, true),
            Property::WeaklyCartesian => cartesian(kind, input, builtin, bound, seed, false),
        },
        Command::Compare { functor, verify, input, samples, bound } => compare(functor, verify, input, samples, bound, seed),
        Command::Recover { kind, input, builtin, bound } => recover(kind, input, builtin, bound, seed),
    }
}

fn eval(kind: FunctorKind, input: &Path, slice: Option<PathBuf>, counts: Option<Vec<usize>>) -> Result<Outcome> {
    let f = functor(kind, input)?;
    let base = f.domain();
    let x = match (slice, counts) {
        (Some(p), _) => load::<SliceDoc>(&p)?.build()?,
        (None, Some(c)) if c.len() == base.len() => SliceObj::with_fiber_sizes(base, &c),
        (None, Some(c)) => return Err(Error::Structural(format!("{} fibre sizes for a base of {} sorts", c.len(), base.len()))),
        (None, None) => SliceObj::terminal(base),
    };
    let v = f.eval(&x)?;
    Ok(Outcome::Verified(json!({ "slice": SliceDoc::from(&x), "value": SliceDoc::from(&v) })))
}

fn tensor(kind: TensorKind, left: &Path, right: &Path, max_arity: Option<usize>) -> Result<Outcome> {
    let out = match kind {
        TensorKind::Sym => to_value(&SymSigDoc::from(&tensor_sym_with(&symmetric(left)?, &symmetric(right)?, max_arity, false)?.sig)),
        TensorKind::Total => to_value(&AmalgSigDoc::from(&tensor_total_bounded(&amalg(left)?, &amalg(right)?, max_arity)?.sig)),
        TensorKind::Single => to_value(&AmalgSigDoc::from(&tensor_single(&amalg(left)?, &amalg(right)?)?.sig)),
        TensorKind::Tgraph => {
            let (a, b) = (TGraph::of_signature(List, &amalg(left)?)?, TGraph::of_signature(List, &amalg(right)?)?);
            to_value(&AmalgSigDoc::from(&tgraph::tensor_bounded(&a, &b, max_arity)?.graph))
        }
    };
    Ok(Outcome::Verified(out))
}

fn truncation<M: Monad>(kind: &str, fc: &FreeChainTruncation<M>, monoid: Option<Value>) -> Value {
    json!({
        "kind": kind,
        "depth": fc.depth,
        "arity_bound": fc.max_leaves,
        "stabilized_at": fc.stabilized_at,
        "counts_by_arity": fc.counts.last(),
        "operations": AmalgSigDoc::from(&fc.graph()),
        "monoid": monoid,
    })
}

fn free(kind: FreeKind, depth: usize, arity_bound: usize, input: &Path) -> Result<Outcome> {
    let a = amalg(input)?;
    let out = match kind {
        FreeKind::TgraphId => {
            let fc = free_multicategory(&TGraph::of_signature(Identity, &a)?, depth, arity_bound);
            truncation("tgraph:id", &fc, fc.monoid().map(|m| to_value(&m.to_doc("identity"))))
        }
        FreeKind::TgraphList => {
            let fc = free_multicategory(&TGraph::of_signature(List, &a)?, depth, arity_bound);
            truncation("tgraph:list", &fc, fc.monoid().map(|m| to_value(&m.to_doc("list"))))
        }
        FreeKind::Strict | FreeKind::Amalg => {
            let fc = free_multicategory(&TGraph::of_signature(List, &a)?, depth, arity_bound);
            let monoid = free_amalg_monoid(&fc).map(|mut m| {
                m.strict = kind == FreeKind::Strict;
                to_value(&MonoidDoc::from(&m))
            });
            truncation(if kind == FreeKind::Strict { "strict" } else { "amalg" }, &fc, monoid)
        }
        FreeKind::Sym => {
            // the free symmetric multicategory on K_sig(A) is K_sig of the free planar one
            let fc = free_multicategory(&TGraph::of_signature(List, &a)?, depth, arity_bound);
            let monoid = free_amalg_monoid(&fc)
                .map(|m| Ok::<_, Error>(json!({ "signature": SymSigDoc::from(&k_sig(&m.carrier)?), "planar": MonoidDoc::from(&m) })))
                .transpose()?;
            truncation("sym", &fc, monoid)
        }
    };
    Ok(Outcome::Verified(out))
}

fn opetopes(dim: usize, size: usize, dot: Option<PathBuf>) -> Result<Outcome> {
    let cells = terminal_cells(dim, size);
    if let Some(p) = dot {
        fs::write(&p, to_dot(&cells)).map_err(|e| Error::Structural(format!("{}: {e}", p.display())))?;
    }
    Ok(Outcome::Verified(Value::Array(cells.iter().map(|c| to_value(&c.descriptor())).collect())))
}

fn report(r: Report) -> Outcome {
    if r.counterexample.is_some() {
        Outcome::Violated(to_value(&r))
    } else {
        Outcome::Verified(to_value(&r))
    }
}

fn weak_wide_pb(kind: Option<FunctorKind>, input: Option<PathBuf>, builtin: Option<Builtin>, legs: usize, bound: usize, seed: u64) -> Result<Outcome> {
    let f: Box<dyn SliceFunctor> = match (kind, input, builtin) {
        (Some(k), Some(p), _) => functor(k, &p)?,
        (_, _, Some(Builtin::Gumm)) => Box::new(Gumm::new()),
        (_, _, Some(Builtin::Diagonal)) => return Err(Error::Structural("the diagonal is a transformation, not a functor".into())),
        _ => {
            let mut rng = random::seeded(seed);
            let o = random::base(&mut rng, "O", 2);
            Box::new(AnalyticFunctor(random::sym_sig(&mut rng, &o, 2, 3)))
        }
    };
    let r = check_weak_wide_pullback_preservation(f.as_ref(), legs, bound, false)?;
    Ok(report(match &r.counterexample {
        Some(cx) => Report::violated(to_value(cx), Some(to_value(&r))),
        None => Report::holds(Some(to_value(&r))),
    }))
}

fn transformation(kind: Option<FunctorKind>, input: Option<PathBuf>, builtin: Option<Builtin>, bound: usize, seed: u64) -> Result<NatTransData> {
    match (kind, input, builtin) {
        (Some(FunctorKind::Analytic), Some(p), _) => rep_sym(&load::<SymSigMorDoc>(&p)?.build()?, bound),
        (Some(FunctorKind::Poly), Some(p), _) => rep_poly(&load::<PolyDiagMorDoc>(&p)?.build()?, bound),
        (Some(FunctorKind::Tgraph), Some(p), _) => rep_amalg(&load::<AmalgSigMorDoc>(&p)?.build()?, bound),
        (_, _, Some(Builtin::Diagonal)) => diagonal(bound),
        (_, _, Some(Builtin::Gumm)) => Err(missing("a transformation")),
        _ => rep_sym(&random::sym_sig_mor(&mut random::seeded(seed), 2, 3, 2), bound),
    }
}

fn square(t: &NatTransData, k: usize) -> Value {
    let m = &t.src.maps[k];
    json!({
        "source": SliceDoc::from(&t.src.objects[m.src]),
        "target": SliceDoc::from(&t.src.objects[m.tgt]),
        "map": FinMapDoc::from(&m.f.map),
    })
}

fn cartesian(kind: Option<FunctorKind>, input: Option<PathBuf>, builtin: Option<Builtin>, bound: usize, seed: u64, strict: bool) -> Result<Outcome> {
    let t = transformation(kind, input, builtin, bound, seed)?;
    let details = json!({ "bound": bound, "objects": t.src.objects.len(), "squares": t.src.maps.len() });
    if let Some(&k) = t.naturality_failures().first() {
        return Ok(Outcome::Violated(json!({ "verdict": "not natural", "counterexample": square(&t, k), "details": details })));
    }
    Ok(report(match t.first_non_cartesian(strict) {
        Some(k) => Report::violated(square(&t, k), Some(details)),
        None => Report::holds(Some(details)),
    }))
}

fn witness(functor: ComparisonKind, input: &Path) -> Result<ComparisonWitness> {
    Ok(match functor {
        ComparisonKind::Ksig => {
            let a = amalg(input)?;
            let s = k_sig(&a)?;
            let iso = amalg_of_free(&s).map(|(b, m)| json!({ "amalgamated": AmalgSigDoc::from(&b), "morphism": SymSigMorDoc::from(&m) }));
            ComparisonWitness { functor: "ksig".into(), input: to_value(&AmalgSigDoc::from(&a)), output: to_value(&SymSigDoc::from(&s)), iso }
        }
        ComparisonKind::Kdiag => {
            let d = load::<PolyDiagDoc>(input)?.build()?;
            let an = k_diag(&d)?;
            let output = json!({ "signature": SymSigDoc::from(&sym_of_andiag(&an)?), "positions": SymSetDoc::from(&an.positions) });
            ComparisonWitness { functor: "kdiag".into(), input: to_value(&PolyDiagDoc::from(&d)), output, iso: None }
        }
        ComparisonKind::IotaA => {
            let a = amalg(input)?;
            let d = iota_a(&a)?;
            let iso = to_value(&PolyDiagMorDoc::from(&poly_round_trip(&d)?));
            ComparisonWitness { functor: "iota-a".into(), input: to_value(&AmalgSigDoc::from(&a)), output: to_value(&PolyDiagDoc::from(&d)), iso: Some(iso) }
        }
        ComparisonKind::IotaS => {
            let s = symmetric(input)?;
            let an = iota_s(&s)?;
            let back = sym_of_andiag(&an)?;
            let output = json!({ "signature": SymSigDoc::from(&back), "positions": SymSetDoc::from(&an.positions) });
            let iso = find_sym_iso(&s, &back).map(|m| to_value(&SymSigMorDoc::from(&m)));
            ComparisonWitness { functor: "iota-s".into(), input: to_value(&SymSigDoc::from(&s)), output, iso }
        }
    })
}

fn verify_phi(input: Option<PathBuf>, samples: usize, seed: u64) -> Result<Report> {
    let mut rng = random::seeded(seed);
    let a = match input {
        Some(p) => amalg(&p)?,
        None => {
            let o = random::base(&mut rng, "O", 2);
            random::amalg_sig(&mut rng, &o, 3, 3)
        }
    };
    if !phi_component(&a)?.f.is_bijective() {
        return Ok(Report::violated(json!({ "component": AmalgSigDoc::from(&a) }), None));
    }
    for _ in 0..samples {
        let m = random::amalg_sig_mor(&mut rng, 3, 3, 2);
        if !phi_natural(&m)? {
            return Ok(Report::violated(json!({ "morphism": AmalgSigMorDoc::from(&m) }), None));
        }
    }
    Ok(Report::holds(Some(json!({ "components": 1, "morphisms": samples }))))
}

fn verify_psi(input: Option<PathBuf>, samples: usize, bound: usize, seed: u64) -> Result<Report> {
    let d = match input {
        Some(p) => load::<PolyDiagDoc>(&p)?.build()?,
        None => {
            let mut rng = random::seeded(seed);
            let o = random::base(&mut rng, "O", 2);
            iota_a(&random::amalg_sig(&mut rng, &o, 3, 3))?
        }
    };
    let p = psi(&d, bound)?;
    if let Some(i) = p.components.iter().position(|c| !c.is_bijective()) {
        return Ok(Report::violated(json!({ "component": SliceDoc::from(&p.src.objects[i]) }), None));
    }
    if let Some(&k) = p.naturality_failures().first() {
        return Ok(Report::violated(square(&p, k), None));
    }
    let objects = family(&d.base, bound);
    let morphisms = fibre_morphisms(&d, &d);
    for m in morphisms.iter().take(samples) {
        for x in &objects {
            if !psi_natural_in_diagram(m, x)? {
                return Ok(Report::violated(json!({ "morphism": PolyDiagMorDoc::from(m), "slice": SliceDoc::from(x) }), None));
            }
        }
    }
    Ok(Report::holds(Some(json!({ "components": p.components.len(), "diagram_morphisms": morphisms.len().min(samples) }))))
}

fn compare(functor: Option<ComparisonKind>, verify: Option<Verify>, input: Option<PathBuf>, samples: usize, bound: usize, seed: u64) -> Result<Outcome> {
    let mut out = serde_json::Map::new();
    if let Some(f) = functor {
        let p = input.as_deref().ok_or_else(|| Error::Structural("--functor needs --input".into()))?;
        out.insert("witness".into(), to_value(&witness(f, p)?));
    }
    let mut violated = false;
    if let Some(v) = verify {
        let r = match v {
            Verify::Phi => verify_phi(input.filter(|_| functor.is_none()), samples, seed)?,
            Verify::Psi => verify_psi(input.filter(|_| functor.is_none()), samples, bound, seed)?,
            Verify::EmbFull => {
                let r = confirm_emb_full(2, 2, bound)?;
                if r.holds() {
                    Report::holds(Some(to_value(&r)))
                } else {
                    Report::violated(to_value(&r.violations), Some(to_value(&r)))
                }
            }
        };
        violated = r.counterexample.is_some();
        out.insert("verification".into(), to_value(&r));
    }
    let out = Value::Object(out);
    Ok(if violated { Outcome::Violated(out) } else { Outcome::Verified(out) })
}

fn recover(kind: Option<FunctorKind>, input: Option<PathBuf>, builtin: Option<Builtin>, bound: usize, seed: u64) -> Result<Outcome> {
    let (f, original): (Box<dyn SliceFunctor>, Option<SymSig>) = match (kind, input, builtin) {
        (Some(FunctorKind::Analytic), Some(p), _) => {
            let s = symmetric(&p)?;
            (Box::new(AnalyticFunctor(s.clone())), Some(s))
        }
        (Some(k), Some(p), _) => (functor(k, &p)?, None),
        (_, _, Some(Builtin::Gumm)) => (Box::new(Gumm::new()), None),
        (_, _, Some(Builtin::Diagonal)) => return Err(missing("recovery")),
        _ => {
            let mut rng = random::seeded(seed);
            let o = random::base(&mut rng, "O", 2);
            let s = random::sym_sig(&mut rng, &o, 2, 3);
            (Box::new(AnalyticFunctor(s.clone())), Some(s))
        }
    };
    let table = TabulatedFunctor::at_bound(f.as_ref(), bound)?;
    match recover_signature(&table) {
        Ok(r) => {
            let iso = original.as_ref().and_then(|s| find_sym_iso(s, &r.sig)).map(|m| to_value(&SymSigMorDoc::from(&m)));
            if original.is_some() && iso.is_none() {
                return Err(Error::Inconsistent("recovered signature is not isomorphic to the original".into()));
            }
            let comparison: Vec<FinMapDoc> = r.comparison.iter().map(FinMapDoc::from).collect();
            Ok(Outcome::Verified(json!({
                "verdict": "recovered",
                "signature": SymSigDoc::from(&r.sig),
                "orbits": r.orbits(),
                "comparison": comparison,
                "iso": iso,
            })))
        }
        Err(Error::NotAnalytic(why)) => Ok(Outcome::Violated(json!({ "verdict": "not analytic", "counterexample": why }))),
        Err(Error::Inconclusive(why)) => Ok(Outcome::Undecided(json!({ "verdict": "inconclusive", "reason": why }))),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_recovery_is_isomorphic() {
        assert!(matches!(recover(None, None, None, 3, 5).unwrap(), Outcome::Verified(_)));
    }

    #[test]
    fn gumm_is_flagged() {
        assert!(matches!(weak_wide_pb(None, None, Some(Builtin::Gumm), 2, 3, 0).unwrap(), Outcome::Violated(_)));
    }
}
