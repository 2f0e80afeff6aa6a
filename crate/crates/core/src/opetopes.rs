//! Opetopes: cells of the terminal opetopic set, enumerated directly by
//! pasting recursion and again through the tower of free T-categories.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::finset::FinSet;
use crate::monad::{Identity, List};
use crate::monoids::{free_multicategory, free_multicategory_bounded, TreeKey};
use crate::tgraph::TGraph;

/// An opetope: the point, the arrow, or a pasting of lower cells.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Opetope {
    Point,
    Arrow,
    Cell(Box<PTree>),
}

/// A pasting diagram: a bare edge of a given type, or a cell with one
/// subtree per input.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum PTree {
    Leaf(Opetope),
    Node(Opetope, Vec<PTree>),
}

impl PTree {
    /// Type of the root edge.
    pub fn root(&self) -> Opetope {
        match self {
            PTree::Leaf(t) => t.clone(),
            PTree::Node(c, _) => c.target().expect("nodes have targets"),
        }
    }

    pub fn leaves(&self) -> Vec<Opetope> {
        match self {
            PTree::Leaf(t) => vec![t.clone()],
            PTree::Node(_, kids) => kids.iter().flat_map(PTree::leaves).collect(),
        }
    }

    /// Node decorations in preorder.
    pub fn nodes(&self) -> Vec<Opetope> {
        let mut out = Vec::new();
        self.collect_nodes(&mut out);
        out
    }

    fn collect_nodes(&self, out: &mut Vec<Opetope>) {
        if let PTree::Node(c, kids) = self {
            out.push(c.clone());
            for k in kids {
                k.collect_nodes(out);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        match self {
            PTree::Leaf(_) => 0,
            PTree::Node(_, kids) => 1 + kids.iter().map(PTree::node_count).sum::<usize>(),
        }
    }

    /// Every graft site matches the input it fills.
    pub fn well_typed(&self) -> bool {
        match self {
            PTree::Leaf(_) => true,
            PTree::Node(c, kids) => {
                let ins = c.inputs();
                ins.len() == kids.len() && kids.iter().zip(&ins).all(|(k, i)| k.root() == *i && k.well_typed())
            }
        }
    }

    fn replace_leaves(&self, subs: &mut impl Iterator<Item = PTree>) -> PTree {
        match self {
            PTree::Leaf(_) => subs.next().expect("one subtree per leaf"),
            PTree::Node(c, kids) => PTree::Node(c.clone(), kids.iter().map(|k| k.replace_leaves(subs)).collect()),
        }
    }

    /// Substitute, in preorder, each node by the pasting of the next cell.
    fn graft_nodes(&self, cells: &mut impl Iterator<Item = Opetope>) -> PTree {
        match self {
            PTree::Leaf(t) => PTree::Leaf(t.clone()),
            PTree::Node(_, kids) => {
                let k = cells.next().expect("one cell per node");
                let grafted: Vec<PTree> = kids.iter().map(|c| c.graft_nodes(cells)).collect();
                match k {
                    Opetope::Cell(t) => t.replace_leaves(&mut grafted.into_iter()),
                    other => panic!("cannot graft {other:?} into a node"),
                }
            }
        }
    }

    /// The composite cell of a pasting (its target).
    pub fn compose(&self) -> Opetope {
        match self {
            PTree::Leaf(Opetope::Point) => Opetope::Arrow,
            PTree::Node(Opetope::Arrow, _) => Opetope::Arrow,
            PTree::Leaf(t) => Opetope::unit(t),
            PTree::Node(c, kids) => {
                let parts: Vec<Opetope> = kids.iter().map(PTree::compose).collect();
                c.substitute(parts)
            }
        }
    }
}

impl Opetope {
    pub fn dim(&self) -> usize {
        match self {
            Opetope::Point => 0,
            Opetope::Arrow => 1,
            Opetope::Cell(t) => 1 + match t.as_ref() {
                PTree::Leaf(e) => e.dim() + 1,
                PTree::Node(c, _) => c.dim(),
            },
        }
    }

    pub fn inputs(&self) -> Vec<Opetope> {
        match self {
            Opetope::Point => vec![],
            Opetope::Arrow => vec![Opetope::Point],
            Opetope::Cell(t) => t.nodes(),
        }
    }

    pub fn target(&self) -> Option<Opetope> {
        match self {
            Opetope::Point => None,
            Opetope::Arrow => Some(Opetope::Point),
            Opetope::Cell(t) => Some(t.compose()),
        }
    }

    pub fn source(&self) -> Option<&PTree> {
        match self {
            Opetope::Cell(t) => Some(t),
            _ => None,
        }
    }

    /// The identity one dimension up on `t`.
    pub fn unit(t: &Opetope) -> Opetope {
        match t {
            Opetope::Point => Opetope::Arrow,
            _ => Opetope::Cell(Box::new(PTree::Node(t.clone(), t.inputs().into_iter().map(PTree::Leaf).collect()))),
        }
    }

    /// `self` with each input replaced by a cell whose target it is.
    pub fn substitute(&self, parts: Vec<Opetope>) -> Opetope {
        match self {
            Opetope::Cell(t) => Opetope::Cell(Box::new(t.graft_nodes(&mut parts.into_iter()))),
            _ => self.clone(),
        }
    }

    /// Cells in the recursive descriptor: source nodes plus the size of the
    /// target; zero below dimension two.
    pub fn size(&self) -> usize {
        match self {
            Opetope::Cell(t) => t.node_count() + self.target().map_or(0, |t| t.size()),
            _ => 0,
        }
    }

    /// Compact text form.
    pub fn notation(&self) -> String {
        match self {
            Opetope::Point => "•".into(),
            Opetope::Arrow => "→".into(),
            Opetope::Cell(t) => tree_notation(t),
        }
    }

    pub fn descriptor(&self) -> Descriptor {
        Descriptor {
            dim: self.dim(),
            size: self.size(),
            notation: self.notation(),
            target: self.target().map(|t| t.notation()),
            source: self.source().map(tree_json),
        }
    }
}

fn tree_notation(t: &PTree) -> String {
    match t {
        PTree::Leaf(e) => format!("{{{}}}", e.notation()),
        PTree::Node(c, kids) => format!("{}({})", c.notation(), kids.iter().map(tree_notation).collect::<Vec<_>>().join(",")),
    }
}

fn tree_json(t: &PTree) -> Value {
    match t {
        PTree::Leaf(e) => json!({ "edge": e.notation() }),
        PTree::Node(c, kids) => json!({ "cell": c.notation(), "inputs": kids.iter().map(tree_json).collect::<Vec<_>>() }),
    }
}

/// Stable JSON form: target and source pasting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Descriptor {
    pub dim: usize,
    pub size: usize,
    pub notation: String,
    pub target: Option<String>,
    pub source: Option<Value>,
}

/// Well-typed pastings with root type `root` decorated by `cells`, costing
/// at most `budget`: one per node plus `leaf_cost` per free input.
fn pastings(
    cells: &[Opetope],
    root: &Opetope,
    budget: usize,
    leaf_cost: usize,
    memo: &mut HashMap<(Opetope, usize), Vec<(PTree, usize)>>,
) -> Vec<(PTree, usize)> {
    if let Some(v) = memo.get(&(root.clone(), budget)) {
        return v.clone();
    }
    let mut out = Vec::new();
    if leaf_cost <= budget {
        out.push((PTree::Leaf(root.clone()), leaf_cost));
    }
    if budget > 0 {
        for c in cells.iter().filter(|c| c.target().as_ref() == Some(root)) {
            let mut forests: Vec<(Vec<PTree>, usize)> = vec![(Vec::new(), 1)];
            for i in &c.inputs() {
                let mut next = Vec::new();
                for (f, used) in &forests {
                    for (t, cost) in pastings(cells, i, budget - used, leaf_cost, memo) {
                        let mut g = f.clone();
                        g.push(t);
                        next.push((g, used + cost));
                    }
                }
                forests = next;
            }
            out.extend(forests.into_iter().map(|(f, cost)| (PTree::Node(c.clone(), f), cost)));
        }
    }
    memo.insert((root.clone(), budget), out.clone());
    out
}

/// All opetopes of dimension `dim` with size at most `size_bound`, sorted.
pub fn terminal_cells(dim: usize, size_bound: usize) -> Vec<Opetope> {
    match dim {
        0 => vec![Opetope::Point],
        1 => vec![Opetope::Arrow],
        _ => {
            let cells = terminal_cells(dim - 1, size_bound);
            let roots = terminal_cells(dim - 2, size_bound);
            let found: BTreeSet<Opetope> = roots
                .par_iter()
                .map(|r| {
                    let mut memo = HashMap::new();
                    // from dimension three the target has one input per free leaf
                    let leaf_cost = usize::from(dim >= 3);
                    pastings(&cells, r, size_bound, leaf_cost, &mut memo)
                        .into_iter()
                        .map(|(t, _)| Opetope::Cell(Box::new(t)))
                        .filter(|o| o.size() <= size_bound)
                        .collect::<Vec<_>>()
                })
                .flatten()
                .collect();
            found.into_iter().collect()
        }
    }
}

/// A named pasting: an edge (a cell two levels down) or a node (a cell one
/// level down) with one subpasting per input.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize)]
pub enum Paste {
    Unit(usize),
    Node(usize, Vec<Paste>),
}

impl Paste {
    fn nodes(&self, out: &mut Vec<usize>) {
        if let Paste::Node(c, kids) = self {
            out.push(*c);
            for k in kids {
                k.nodes(out);
            }
        }
    }

    fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Paste::Unit(e) => out.push(*e),
            Paste::Node(_, kids) => kids.iter().for_each(|k| k.leaves(out)),
        }
    }

    fn replace_leaves(&self, subs: &mut impl Iterator<Item = Paste>) -> Option<Paste> {
        Some(match self {
            Paste::Unit(_) => subs.next()?,
            Paste::Node(c, kids) => Paste::Node(*c, kids.iter().map(|k| k.replace_leaves(subs)).collect::<Option<_>>()?),
        })
    }
}

/// Source of a cell: nothing (points), a point (arrows), or a pasting.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum Source {
    None,
    Cell(usize),
    Paste(Paste),
}

#[derive(Clone, Debug, Default, Serialize)]
pub struct Level {
    pub names: Vec<String>,
    pub target: Vec<Option<usize>>,
    pub source: Vec<Source>,
}

/// A truncated opetopic set: cells per dimension with targets (`γ`) and
/// source pastings (`δ`).
#[derive(Clone, Debug, Default, Serialize)]
pub struct OpetopicSet {
    pub levels: Vec<Level>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct EquationFailure {
    pub dim: usize,
    pub cell: String,
    pub equation: &'static str,
}

/// Names of the four compatibility equations.
pub const TARGET_OF_TARGET: &str = "γγ = γ̄δ";
pub const PASTING_TYPED: &str = "δ well typed";
pub const LEAVES: &str = "leaves(δ) = inputs(γ)";
pub const SOURCE_OF_TARGET: &str = "δγ = μ T(δ) δ";

impl OpetopicSet {
    fn inputs(&self, n: usize, c: usize) -> Option<Vec<usize>> {
        let lv = self.levels.get(n)?;
        match lv.source.get(c)? {
            Source::None => Some(vec![]),
            Source::Cell(x) => Some(vec![*x]),
            Source::Paste(p) => {
                let mut v = Vec::new();
                p.nodes(&mut v);
                Some(v)
            }
        }
    }

    /// Root edge of a pasting of level-`n` cells.
    fn root(&self, n: usize, p: &Paste) -> Option<usize> {
        match p {
            Paste::Unit(e) => Some(*e),
            Paste::Node(c, _) => *self.levels.get(n)?.target.get(*c)?,
        }
    }

    fn typed(&self, n: usize, p: &Paste) -> bool {
        match p {
            Paste::Unit(_) => true,
            Paste::Node(c, kids) => {
                let Some(ins) = self.inputs(n, *c) else { return false };
                ins.len() == kids.len() && kids.iter().zip(&ins).all(|(k, &i)| self.root(n, k) == Some(i) && self.typed(n, k))
            }
        }
    }

    /// `μ T(δ)`: flatten a pasting of level-`n` cells (`n ≥ 2`) to one of
    /// level `n − 1`.
    fn flatten(&self, n: usize, p: &Paste) -> Option<Paste> {
        match p {
            Paste::Unit(e) => Some(Paste::Node(*e, self.inputs(n - 1, *e)?.into_iter().map(Paste::Unit).collect())),
            Paste::Node(c, kids) => {
                let Source::Paste(sp) = self.levels.get(n)?.source.get(*c)? else { return None };
                let flat: Vec<Paste> = kids.iter().map(|k| self.flatten(n, k)).collect::<Option<_>>()?;
                graft_named(sp, &mut flat.into_iter())
            }
        }
    }
}

fn graft_named(p: &Paste, parts: &mut impl Iterator<Item = Paste>) -> Option<Paste> {
    match p {
        Paste::Unit(e) => Some(Paste::Unit(*e)),
        Paste::Node(_, kids) => {
            let k = parts.next()?;
            let grafted: Vec<Paste> = kids.iter().map(|c| graft_named(c, parts)).collect::<Option<_>>()?;
            let mut it = grafted.into_iter();
            let out = k.replace_leaves(&mut it)?;
            it.next().is_none().then_some(out)
        }
    }
}

/// The four compatibility equations at every cell of dimension ≥ 2.
pub fn opetopic_set_check(s: &OpetopicSet) -> Vec<EquationFailure> {
    let mut bad = Vec::new();
    for n in 2..s.levels.len() {
        let lv = &s.levels[n];
        for c in 0..lv.names.len() {
            let mut push = |eq| bad.push(EquationFailure { dim: n, cell: lv.names[c].clone(), equation: eq });
            let (Some(t), Source::Paste(p)) = (lv.target[c], &lv.source[c]) else {
                push(PASTING_TYPED);
                continue;
            };
            if s.levels[n - 1].target.get(t).copied().flatten() != s.root(n - 1, p) {
                push(TARGET_OF_TARGET);
            }
            let typed = s.typed(n - 1, p);
            if !typed {
                push(PASTING_TYPED);
            }
            let mut leaves = Vec::new();
            p.leaves(&mut leaves);
            if s.inputs(n - 1, t) != Some(leaves.clone()) {
                push(LEAVES);
            }
            let ok = if n - 1 == 1 {
                leaves.len() == 1 && s.levels[1].source.get(t) == Some(&Source::Cell(leaves[0]))
            } else {
                typed && s.flatten(n - 1, p).is_some_and(|f| s.levels[n - 1].source.get(t) == Some(&Source::Paste(f)))
            };
            if !ok {
                push(SOURCE_OF_TARGET);
            }
        }
    }
    bad
}

fn named_paste(t: &PTree, nodes: &HashMap<Opetope, usize>, edges: &HashMap<Opetope, usize>) -> Option<Paste> {
    Some(match t {
        PTree::Leaf(e) => Paste::Unit(*edges.get(e)?),
        PTree::Node(c, kids) => Paste::Node(*nodes.get(c)?, kids.iter().map(|k| named_paste(k, nodes, edges)).collect::<Option<_>>()?),
    })
}

/// Cells by dimension as a named opetopic set. Targets and sources must be
/// among the given cells.
pub fn as_opetopic_set(by_dim: &[Vec<Opetope>]) -> Option<OpetopicSet> {
    let index: Vec<HashMap<Opetope, usize>> = by_dim.iter().map(|cs| cs.iter().cloned().enumerate().map(|(i, c)| (c, i)).collect()).collect();
    let mut levels = Vec::new();
    for (n, cs) in by_dim.iter().enumerate() {
        let mut lv = Level::default();
        for c in cs {
            lv.names.push(c.notation());
            lv.target.push(match c.target() {
                Some(t) => Some(*index[n - 1].get(&t)?),
                None => None,
            });
            lv.source.push(match (n, c.source()) {
                (0, _) => Source::None,
                (1, _) => Source::Cell(0),
                (_, Some(t)) => Source::Paste(named_paste(t, &index[n - 1], &index[n - 2])?),
                _ => return None,
            });
        }
        levels.push(lv);
    }
    Some(OpetopicSet { levels })
}

/// One level of the tower: its cells with targets (indices one level down)
/// and whether the truncation ran out before stabilizing.
#[derive(Clone, Debug)]
pub struct TowerLevel {
    pub dim: usize,
    pub cells: Vec<Opetope>,
    pub gamma: Vec<Option<usize>>,
    pub partial: bool,
}

/// Cells up to dimension `levels`, obtained by iterating the free
/// T-category construction: the free category on the terminal graph at
/// dimension two, free planar multicategories on the previous level's
/// cells above that. Cells are kept up to size `size_bound`.
pub fn iterate_tower(levels: usize, size_bound: usize) -> Vec<TowerLevel> {
    let mut out: Vec<TowerLevel> = vec![
        TowerLevel { dim: 0, cells: vec![Opetope::Point], gamma: vec![None], partial: false },
        TowerLevel { dim: 1, cells: vec![Opetope::Arrow], gamma: vec![Some(0)], partial: false },
    ];
    for dim in 2..=levels {
        let (cells, partial) = if dim == 2 {
            // Set-monad level: the free category on one loop
            let o = FinSet::from_strs("O", &["•"]).unwrap();
            let g = TGraph::new(Identity, o, FinSet::from_strs("A", &["→"]).unwrap(), vec![0], vec![0]).unwrap();
            let fc = free_multicategory(&g, size_bound, 1);
            let mut cells = Vec::new();
            for &t in fc.stages.last().unwrap() {
                // a path of k arrows
                let mut k = 0;
                let mut cur = t;
                while let TreeKey::Node(_, next) = &fc.trees[cur] {
                    k += 1;
                    cur = *next;
                }
                let mut tree = PTree::Leaf(Opetope::Point);
                for _ in 0..k {
                    tree = PTree::Node(Opetope::Arrow, vec![tree]);
                }
                cells.push(Opetope::Cell(Box::new(tree)));
            }
            (cells, fc.stabilized_at.is_none())
        } else {
            let types = &out[dim - 2].cells;
            let ops = &out[dim - 1].cells;
            let tindex: HashMap<&Opetope, usize> = types.iter().enumerate().map(|(i, c)| (c, i)).collect();
            let base = FinSet::new("O", types.iter().map(Opetope::notation).collect()).unwrap();
            let carrier = FinSet::new("A", ops.iter().map(Opetope::notation).collect()).unwrap();
            let gamma = ops.iter().map(|c| tindex[&c.target().unwrap()]).collect();
            let delta = ops.iter().map(|c| c.inputs().iter().map(|i| tindex[i]).collect()).collect();
            let g = TGraph::new(List, base, carrier, gamma, delta).unwrap();
            // above dimension two a cell's size is at least its nodes plus its leaves
            let fc = free_multicategory_bounded(&g, size_bound, size_bound, Some(size_bound));
            let mut trees: Vec<Option<PTree>> = Vec::with_capacity(fc.trees.len());
            for key in &fc.trees {
                trees.push(match key {
                    TreeKey::Unit(o) => Some(PTree::Leaf(types[*o].clone())),
                    TreeKey::Node(a, kids) => {
                        Some(PTree::Node(ops[*a].clone(), kids.iter().map(|&k| trees[k].clone().expect("children first")).collect()))
                    }
                });
            }
            let cells: BTreeSet<Opetope> = fc
                .stages
                .last()
                .unwrap()
                .iter()
                .map(|&t| Opetope::Cell(Box::new(trees[t].clone().unwrap())))
                .filter(|c| c.size() <= size_bound)
                .collect();
            (cells.into_iter().collect(), fc.stabilized_at.is_none())
        };
        let mut cells = cells;
        cells.retain(|c| c.size() <= size_bound);
        cells.sort();
        let prev: HashMap<&Opetope, usize> = out[dim - 1].cells.iter().enumerate().map(|(i, c)| (c, i)).collect();
        let gamma = cells.iter().map(|c| c.target().and_then(|t| prev.get(&t).copied())).collect();
        out.push(TowerLevel { dim, cells, gamma, partial });
    }
    out
}

/// DOT drawing of the source pastings (nodes) and targets (dashed edges).
pub fn to_dot(cells: &[Opetope]) -> String {
    fn walk(t: &PTree, parent: Option<&str>, prefix: &str, counter: &mut usize, out: &mut String) {
        let id = format!("{prefix}_{counter}");
        *counter += 1;
        let label = match t {
            PTree::Leaf(e) => format!("{{{}}}", e.notation()),
            PTree::Node(c, _) => c.notation(),
        };
        let shape = if matches!(t, PTree::Leaf(_)) { "plaintext" } else { "box" };
        out.push_str(&format!("  {id} [label={label:?}, shape={shape}];\n"));
        if let Some(p) = parent {
            out.push_str(&format!("  {id} -> {p};\n"));
        }
        if let PTree::Node(_, kids) = t {
            for k in kids {
                walk(k, Some(&id), prefix, counter, out);
            }
        }
    }
    let mut out = String::from("digraph opetopes {\n  rankdir=BT;\n");
    for (i, c) in cells.iter().enumerate() {
        let root = format!("c{i}");
        out.push_str(&format!("  subgraph cluster_{i} {{\n  label={:?};\n", c.notation()));
        out.push_str(&format!("  {root} [label={:?}, shape=ellipse];\n", c.target().map(|t| t.notation()).unwrap_or_default()));
        if let Some(t) = c.source() {
            let mut counter = 0;
            walk(t, None, &root, &mut counter, &mut out);
            out.push_str(&format!("  {root}_0 -> {root} [style=dashed];\n"));
        }
        out.push_str("  }\n");
    }
    out.push_str("}\n");
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn arity(c: &Opetope) -> usize {
        c.inputs().len()
    }

    #[test]
    fn low_dimensions() {
        assert_eq!(terminal_cells(0, 5).len(), 1);
        assert_eq!(terminal_cells(1, 5).len(), 1);
        for m in 0..6 {
            let cs = terminal_cells(2, m);
            assert_eq!(cs.len(), m + 1);
            let ar: BTreeSet<usize> = cs.iter().map(arity).collect();
            assert_eq!(ar, (0..=m).collect());
        }
    }

    #[test]
    fn composite_of_pasting() {
        // a binary 2-cell with a nullary one grafted on its first input
        let two = |k: usize| {
            let mut t = PTree::Leaf(Opetope::Point);
            for _ in 0..k {
                t = PTree::Node(Opetope::Arrow, vec![t]);
            }
            Opetope::Cell(Box::new(t))
        };
        let p = PTree::Node(two(2), vec![PTree::Node(two(0), vec![]), PTree::Leaf(Opetope::Arrow)]);
        assert!(p.well_typed());
        assert_eq!(p.compose(), two(1));
        assert_eq!(Opetope::Cell(Box::new(p)).dim(), 3);
    }

    #[test]
    fn terminal_set_passes() {
        let by_dim: Vec<Vec<Opetope>> = (0..=4).map(|d| terminal_cells(d, 3)).collect();
        let s = as_opetopic_set(&by_dim).expect("closed under faces");
        assert_eq!(opetopic_set_check(&s), vec![]);
    }

    #[test]
    fn tower_agrees() {
        let tower = iterate_tower(4, 3);
        for lv in &tower {
            assert_eq!(lv.cells, terminal_cells(lv.dim, 3), "dimension {}", lv.dim);
        }
    }

    /// Plane trees with `j` nodes and `l` free inputs, by sequence counting.
    fn plane_trees(j: usize, l: usize) -> usize {
        fn seq(j: usize, l: usize, memo: &mut HashMap<(usize, usize), usize>) -> usize {
            if let Some(&v) = memo.get(&(j, l)) {
                return v;
            }
            let mut v = usize::from(j == 0 && l == 0);
            if l > 0 {
                v += seq(j, l - 1, memo);
            }
            for j1 in 1..=j {
                for l1 in 0..=l {
                    let t = if j1 == 0 { 0 } else { seq(j1 - 1, l1, memo) };
                    if t > 0 {
                        v += t * seq(j - j1, l - l1, memo);
                    }
                }
            }
            memo.insert((j, l), v);
            v
        }
        if j == 0 {
            return usize::from(l == 1);
        }
        seq(j - 1, l, &mut HashMap::new())
    }

    #[test]
    fn dimension_three_counts() {
        let cs = terminal_cells(3, 6);
        for j in 0..=5 {
            let closed = cs.iter().filter(|c| arity(c) == j && c.target().map(|t| arity(&t)) == Some(0)).count();
            assert_eq!(closed, [0, 1, 1, 2, 5, 14][j], "j = {j}");
        }
        for j in 0..=6 {
            for l in 0..=6 - j {
                let n = cs.iter().filter(|c| arity(c) == j && c.target().map(|t| arity(&t)) == Some(l)).count();
                assert_eq!(n, plane_trees(j, l), "j = {j}, l = {l}");
            }
        }
    }

    #[test]
    fn faces_are_no_larger() {
        for d in 2..=4 {
            for c in terminal_cells(d, 3) {
                let t = c.target().unwrap();
                assert!(t.size() <= c.size());
                assert!(c.inputs().iter().all(|i| i.size() <= c.size()));
                assert!(c.source().unwrap().well_typed());
            }
        }
    }

    fn triangle() -> OpetopicSet {
        let lv = |names: &[&str], target: Vec<Option<usize>>, source: Vec<Source>| Level {
            names: names.iter().map(|s| s.to_string()).collect(),
            target,
            source,
        };
        OpetopicSet {
            levels: vec![
                lv(&["x", "y", "z"], vec![None; 3], vec![Source::None; 3]),
                lv(&["f", "g", "h"], vec![Some(1), Some(2), Some(2)], vec![Source::Cell(0), Source::Cell(1), Source::Cell(0)]),
                lv(
                    &["α"],
                    vec![Some(2)],
                    vec![Source::Paste(Paste::Node(1, vec![Paste::Node(0, vec![Paste::Unit(0)])]))],
                ),
            ],
        }
    }

    fn equations(s: &OpetopicSet) -> Vec<&'static str> {
        opetopic_set_check(s).into_iter().map(|f| f.equation).collect()
    }

    #[test]
    fn loop_fixture() {
        let s = OpetopicSet {
            levels: vec![
                Level { names: vec!["x".into()], target: vec![None], source: vec![Source::None] },
                Level { names: vec!["f".into()], target: vec![Some(0)], source: vec![Source::Cell(0)] },
                Level {
                    names: vec!["α".into()],
                    target: vec![Some(0)],
                    source: vec![Source::Paste(Paste::Node(0, vec![Paste::Node(0, vec![Paste::Unit(0)])]))],
                },
            ],
        };
        assert!(opetopic_set_check(&s).is_empty());
    }

    #[test]
    fn mutations_report_their_equation() {
        assert!(equations(&triangle()).is_empty());
        let mut s = triangle();
        s.levels[2].source[0] = Source::Paste(Paste::Node(0, vec![Paste::Unit(0)]));
        assert_eq!(equations(&s), vec![TARGET_OF_TARGET]);
        let mut s = triangle();
        s.levels[2].source[0] = Source::Paste(Paste::Node(1, vec![Paste::Node(2, vec![Paste::Unit(0)])]));
        assert_eq!(equations(&s), vec![PASTING_TYPED]);
        let mut s = triangle();
        s.levels[2].source[0] = Source::Paste(Paste::Node(1, vec![Paste::Node(1, vec![Paste::Unit(1)])]));
        assert_eq!(equations(&s), vec![PASTING_TYPED, LEAVES, SOURCE_OF_TARGET]);
    }

    #[test]
    fn mutated_terminal_cell_is_caught() {
        let by_dim: Vec<Vec<Opetope>> = (0..=3).map(|d| terminal_cells(d, 3)).collect();
        let mut s = as_opetopic_set(&by_dim).unwrap();
        // retarget a binary 3-cell at a different 2-cell
        let c = by_dim[3].iter().position(|c| arity(c) == 2).unwrap();
        let t = s.levels[3].target[c].unwrap();
        s.levels[3].target[c] = Some((t + 1) % by_dim[2].len());
        let bad = opetopic_set_check(&s);
        assert!(!bad.is_empty());
        assert!(bad.iter().all(|f| f.dim == 3 && f.cell == by_dim[3][c].notation()));
    }

    #[test]
    fn tower_at_larger_sizes() {
        for lv in iterate_tower(3, 5) {
            assert_eq!(lv.cells, terminal_cells(lv.dim, 5));
            assert!(lv.gamma.iter().all(Option::is_some) || lv.dim == 0);
        }
    }
}
