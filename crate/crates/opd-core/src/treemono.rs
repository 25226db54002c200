//! Shuffle tree monomials and their combinatorics.
//!
//! A tree monomial is a planar rooted tree whose vertices carry generator
//! symbols and whose leaves carry the input labels `1..=arity`, with the
//! children of every vertex ordered by strictly increasing minimal leaf label
//! (the shuffle condition). Structural equality on this canonical form is
//! monomial equality. The module also provides shuffle surjections and
//! shuffle permutations, elementary and simultaneous compositions, one-hole
//! contexts and submonomial pattern matching.

use std::cell::RefCell;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::rc::Rc;

use crate::error::{Error, Result};

pub type Arity = usize;
pub type Weight = usize;

/// Index into a [`GenTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenId(pub u32);

/// A generator symbol with its arity and weight grading.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Generator {
    pub name: String,
    pub arity: Arity,
    pub weight: Weight,
}

/// Table of generators; ids are assigned in insertion order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenTable {
    gens: Vec<Generator>,
    by_name: BTreeMap<String, GenId>,
}

impl GenTable {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, name: &str, arity: Arity, weight: Weight) -> Result<GenId> {
        if arity == 0 {
            return Err(Error::InvalidInput(format!("generator {name} has arity 0")));
        }
        if weight == 0 {
            return Err(Error::InvalidInput(format!(
                "generator {name} has weight 0; weight gradings start at 1"
            )));
        }
        if self.by_name.contains_key(name) {
            return Err(Error::InvalidInput(format!("duplicate generator {name}")));
        }
        let id = GenId(self.gens.len() as u32);
        self.gens.push(Generator { name: name.to_string(), arity, weight });
        self.by_name.insert(name.to_string(), id);
        Ok(id)
    }

    pub fn get(&self, id: GenId) -> &Generator {
        &self.gens[id.0 as usize]
    }

    pub fn lookup(&self, name: &str) -> Option<GenId> {
        self.by_name.get(name).copied()
    }

    pub fn len(&self) -> usize {
        self.gens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gens.is_empty()
    }

    pub fn ids(&self) -> impl Iterator<Item = GenId> + '_ {
        (0..self.gens.len()).map(|i| GenId(i as u32))
    }

    pub fn max_arity(&self) -> Arity {
        self.gens.iter().map(|g| g.arity).max().unwrap_or(1)
    }
}

/// Vertex position in a tree: the sequence of child indices from the root.
pub type Path = Vec<usize>;

/// A planar labeled tree. Pure monomials contain no `Hole`; one-hole
/// contexts contain exactly one. Hole children are the crown subtrees
/// hanging below the hole, already carrying global leaf labels.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Tree {
    Leaf(usize),
    Node { gen: GenId, kids: Vec<Tree> },
    Hole { id: u32, kids: Vec<Tree> },
}

/// Hole id used for the distinguished slot of a bimodule context.
pub const SLOT_HOLE: u32 = 0;
/// Hole id used for carved pattern occurrences.
pub const CARVE_HOLE: u32 = 1;
/// Transient hole id used when carving a second occurrence out of a tree
/// that already contains a `CARVE_HOLE` slot.
pub const EXCH_HOLE: u32 = 2;

impl Tree {
    /// The trivial tree monomial ε (arity 1, weight 0).
    pub fn trivial() -> Tree {
        Tree::Leaf(1)
    }

    /// The corolla of a generator: one vertex with leaves `1..=arity`.
    pub fn corolla(table: &GenTable, gen: GenId) -> Tree {
        let k = table.get(gen).arity;
        Tree::Node { gen, kids: (1..=k).map(Tree::Leaf).collect() }
    }

    pub fn is_trivial(&self) -> bool {
        matches!(self, Tree::Leaf(_))
    }

    pub fn min_leaf(&self) -> usize {
        match self {
            Tree::Leaf(l) => *l,
            Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
                kids.iter().map(|k| k.min_leaf()).min().expect("vertex with no children")
            }
        }
    }

    /// Number of generator vertices.
    pub fn weight(&self) -> Weight {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { kids, .. } => 1 + kids.iter().map(|k| k.weight()).sum::<Weight>(),
            Tree::Hole { kids, .. } => kids.iter().map(|k| k.weight()).sum::<Weight>(),
        }
    }

    /// Weight grading: sum of generator weights over the vertices.
    pub fn graded_weight(&self, table: &GenTable) -> Weight {
        match self {
            Tree::Leaf(_) => 0,
            Tree::Node { gen, kids } => {
                table.get(*gen).weight
                    + kids.iter().map(|k| k.graded_weight(table)).sum::<Weight>()
            }
            Tree::Hole { kids, .. } => kids.iter().map(|k| k.graded_weight(table)).sum(),
        }
    }

    /// Number of leaves.
    pub fn arity(&self) -> Arity {
        match self {
            Tree::Leaf(_) => 1,
            Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
                kids.iter().map(|k| k.arity()).sum()
            }
        }
    }

    pub fn leaves(&self, out: &mut Vec<usize>) {
        match self {
            Tree::Leaf(l) => out.push(*l),
            Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
                for k in kids {
                    k.leaves(out);
                }
            }
        }
    }

    pub fn contains_hole(&self) -> bool {
        match self {
            Tree::Leaf(_) => false,
            Tree::Hole { .. } => true,
            Tree::Node { kids, .. } => kids.iter().any(|k| k.contains_hole()),
        }
    }

    /// Sort the children of every vertex by minimal leaf label.
    pub fn canonicalize(&mut self) {
        match self {
            Tree::Leaf(_) => {}
            Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
                for k in kids.iter_mut() {
                    k.canonicalize();
                }
                kids.sort_by_key(|k| k.min_leaf());
            }
        }
    }

    pub fn is_canonical(&self) -> bool {
        match self {
            Tree::Leaf(_) => true,
            Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
                kids.windows(2).all(|w| w[0].min_leaf() < w[1].min_leaf())
                    && kids.iter().all(|k| k.is_canonical())
            }
        }
    }

    /// Check that this is a well-formed full monomial over `table`:
    /// leaves are exactly `1..=arity` and vertex degrees match arities.
    pub fn validate(&self, table: &GenTable) -> Result<()> {
        self.validate_nodes(table)?;
        let mut ls = Vec::new();
        self.leaves(&mut ls);
        ls.sort_unstable();
        for (i, l) in ls.iter().enumerate() {
            if *l != i + 1 {
                return Err(Error::InvalidInput(format!(
                    "leaf labels must be exactly 1..{}, found {:?}",
                    ls.len(),
                    ls
                )));
            }
        }
        if !self.is_canonical() {
            return Err(Error::InvalidInput("tree is not in canonical form".into()));
        }
        Ok(())
    }

    fn validate_nodes(&self, table: &GenTable) -> Result<()> {
        match self {
            Tree::Leaf(l) => {
                if *l == 0 {
                    return Err(Error::InvalidInput("leaf labels are 1-based".into()));
                }
                Ok(())
            }
            Tree::Node { gen, kids } => {
                if kids.len() != table.get(*gen).arity {
                    return Err(Error::InvalidInput(format!(
                        "generator {} has arity {} but {} children",
                        table.get(*gen).name,
                        table.get(*gen).arity,
                        kids.len()
                    )));
                }
                kids.iter().try_for_each(|k| k.validate_nodes(table))
            }
            Tree::Hole { kids, .. } => kids.iter().try_for_each(|k| k.validate_nodes(table)),
        }
    }

    /// Relabel leaves through `f`.
    pub fn map_leaves(&self, f: &impl Fn(usize) -> usize) -> Tree {
        match self {
            Tree::Leaf(l) => Tree::Leaf(f(*l)),
            Tree::Node { gen, kids } => Tree::Node {
                gen: *gen,
                kids: kids.iter().map(|k| k.map_leaves(f)).collect(),
            },
            Tree::Hole { id, kids } => Tree::Hole {
                id: *id,
                kids: kids.iter().map(|k| k.map_leaves(f)).collect(),
            },
        }
    }

    /// Substitute leaf `j` by `subs[j-1]`.
    pub fn substitute_leaves(&self, subs: &[Tree]) -> Tree {
        match self {
            Tree::Leaf(l) => subs[*l - 1].clone(),
            Tree::Node { gen, kids } => Tree::Node {
                gen: *gen,
                kids: kids.iter().map(|k| k.substitute_leaves(subs)).collect(),
            },
            Tree::Hole { id, kids } => Tree::Hole {
                id: *id,
                kids: kids.iter().map(|k| k.substitute_leaves(subs)).collect(),
            },
        }
    }

    /// Replace the unique hole with the given id by `filler`, grafting the
    /// hole's crown subtrees onto the filler's leaves. The filler carries
    /// local labels `1..=k` where `k` is the number of crown subtrees.
    pub fn plug(&self, hole: u32, filler: &Tree) -> Tree {
        match self {
            Tree::Leaf(_) => self.clone(),
            Tree::Hole { id, kids } if *id == hole => filler.substitute_leaves(kids),
            Tree::Hole { id, kids } => Tree::Hole {
                id: *id,
                kids: kids.iter().map(|k| k.plug(hole, filler)).collect(),
            },
            Tree::Node { gen, kids } => Tree::Node {
                gen: *gen,
                kids: kids.iter().map(|k| k.plug(hole, filler)).collect(),
            },
        }
    }

    pub fn subtree(&self, path: &[usize]) -> &Tree {
        let mut t = self;
        for &i in path {
            t = match t {
                Tree::Node { kids, .. } | Tree::Hole { kids, .. } => &kids[i],
                Tree::Leaf(_) => panic!("path descends through a leaf"),
            };
        }
        t
    }

    /// Paths of all generator vertices, in pre-order.
    pub fn vertex_paths(&self) -> Vec<Path> {
        let mut out = Vec::new();
        self.collect_vertices(&mut Vec::new(), &mut out);
        out
    }

    fn collect_vertices(&self, cur: &mut Path, out: &mut Vec<Path>) {
        match self {
            Tree::Leaf(_) => {}
            Tree::Hole { kids, .. } => {
                for (i, k) in kids.iter().enumerate() {
                    cur.push(i);
                    k.collect_vertices(cur, out);
                    cur.pop();
                }
            }
            Tree::Node { kids, .. } => {
                out.push(cur.clone());
                for (i, k) in kids.iter().enumerate() {
                    cur.push(i);
                    k.collect_vertices(cur, out);
                    cur.pop();
                }
            }
        }
    }

    /// Relabel leaves so that they become `1..=arity` preserving relative
    /// order, returning the relabeled tree.
    pub fn rerank_leaves(&self) -> Tree {
        let mut ls = Vec::new();
        self.leaves(&mut ls);
        ls.sort_unstable();
        let rank: BTreeMap<usize, usize> = ls.iter().enumerate().map(|(i, l)| (*l, i + 1)).collect();
        self.map_leaves(&|l| rank[&l])
    }
}

/// Display a tree monomial in the text grammar `gen(c1,...,ck)`, with `e`
/// for the trivial monomial; holes print as `[]`.
pub struct TreeDisplay<'a> {
    pub tree: &'a Tree,
    pub table: &'a GenTable,
}

impl fmt::Display for TreeDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn go(t: &Tree, table: &GenTable, top: bool, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match t {
                Tree::Leaf(l) => {
                    if top {
                        write!(f, "e")
                    } else {
                        write!(f, "{l}")
                    }
                }
                Tree::Node { gen, kids } => {
                    write!(f, "{}(", table.get(*gen).name)?;
                    for (i, k) in kids.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        go(k, table, false, f)?;
                    }
                    write!(f, ")")
                }
                Tree::Hole { kids, .. } => {
                    write!(f, "[](")?;
                    for (i, k) in kids.iter().enumerate() {
                        if i > 0 {
                            write!(f, ",")?;
                        }
                        go(k, table, false, f)?;
                    }
                    write!(f, ")")
                }
            }
        }
        go(self.tree, self.table, true, f)
    }
}

pub fn tree_to_string(t: &Tree, table: &GenTable) -> String {
    TreeDisplay { tree: t, table }.to_string()
}

/// Shuffle surjection of type `(n_1,...,n_k)`: a surjection
/// `[n_1+...+n_k] -> [k]` with block sizes `n_i` and
/// `min f^-1{1} < ... < min f^-1{k}`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShuffleSurjection {
    pub block_sizes: Vec<usize>,
    /// One-line notation, 1-based values.
    pub map: Vec<usize>,
}

impl ShuffleSurjection {
    pub fn new(block_sizes: Vec<usize>, map: Vec<usize>) -> Result<Self> {
        let s = ShuffleSurjection { block_sizes, map };
        s.check()?;
        Ok(s)
    }

    fn check(&self) -> Result<()> {
        let k = self.block_sizes.len();
        if k == 0 || self.block_sizes.iter().any(|&n| n == 0) {
            return Err(Error::InvalidInput("block sizes must be positive".into()));
        }
        let n: usize = self.block_sizes.iter().sum();
        if self.map.len() != n {
            return Err(Error::InvalidInput("surjection domain size mismatch".into()));
        }
        let mut counts = vec![0usize; k];
        let mut first = vec![usize::MAX; k];
        for (pos, &b) in self.map.iter().enumerate() {
            if b == 0 || b > k {
                return Err(Error::InvalidInput("surjection value out of range".into()));
            }
            counts[b - 1] += 1;
            if first[b - 1] == usize::MAX {
                first[b - 1] = pos;
            }
        }
        if counts != self.block_sizes {
            return Err(Error::InvalidInput("block sizes do not match".into()));
        }
        if first.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidInput(
                "minima of preimages must strictly increase".into(),
            ));
        }
        Ok(())
    }

    /// Preimage of block `i` (1-based), in increasing order.
    pub fn block(&self, i: usize) -> Vec<usize> {
        self.map
            .iter()
            .enumerate()
            .filter(|(_, &b)| b == i)
            .map(|(p, _)| p + 1)
            .collect()
    }

    /// The identity surjection with consecutive blocks.
    pub fn consecutive(block_sizes: Vec<usize>) -> Self {
        let mut map = Vec::new();
        for (i, &n) in block_sizes.iter().enumerate() {
            map.extend(std::iter::repeat(i + 1).take(n));
        }
        ShuffleSurjection { block_sizes, map }
    }
}

/// All shuffle surjections of the given type, ordered by the lexicographic
/// order of their one-line maps.
pub fn enumerate_shuffle_surjections(block_sizes: &[usize]) -> Result<Vec<ShuffleSurjection>> {
    if block_sizes.is_empty() || block_sizes.iter().any(|&n| n == 0) {
        return Err(Error::InvalidInput(
            "shuffle surjections need a nonempty list of positive block sizes".into(),
        ));
    }
    let k = block_sizes.len();
    let n: usize = block_sizes.iter().sum();
    let mut out = Vec::new();
    let mut map = Vec::with_capacity(n);
    let mut remaining = block_sizes.to_vec();
    let mut seen = vec![false; k];
    fn rec(
        pos: usize,
        n: usize,
        k: usize,
        map: &mut Vec<usize>,
        remaining: &mut [usize],
        seen: &mut [bool],
        out: &mut Vec<ShuffleSurjection>,
        sizes: &[usize],
    ) {
        if pos == n {
            out.push(ShuffleSurjection { block_sizes: sizes.to_vec(), map: map.clone() });
            return;
        }
        for b in 1..=k {
            if remaining[b - 1] == 0 {
                continue;
            }
            // the shuffle condition: block b may open only after block b-1 has
            if !seen[b - 1] && b > 1 && !seen[b - 2] {
                continue;
            }
            let opened = !seen[b - 1];
            seen[b - 1] = true;
            remaining[b - 1] -= 1;
            map.push(b);
            rec(pos + 1, n, k, map, remaining, seen, out, sizes);
            map.pop();
            remaining[b - 1] += 1;
            if opened {
                seen[b - 1] = false;
            }
        }
    }
    rec(0, n, k, &mut map, &mut remaining, &mut seen, &mut out, block_sizes);
    Ok(out)
}

/// Shuffle permutation of type `(k, l)`: a permutation of `[k+l]` that is
/// increasing on the first `k` and on the last `l` positions.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ShufflePermutation {
    pub k: usize,
    pub l: usize,
    /// One-line notation, 1-based; length `k + l`.
    pub perm: Vec<usize>,
}

impl ShufflePermutation {
    pub fn identity(k: usize, l: usize) -> Self {
        ShufflePermutation { k, l, perm: (1..=k + l).collect() }
    }

    pub fn new(k: usize, l: usize, perm: Vec<usize>) -> Result<Self> {
        if perm.len() != k + l {
            return Err(Error::InvalidInput("permutation length mismatch".into()));
        }
        let mut sorted = perm.clone();
        sorted.sort_unstable();
        if sorted != (1..=k + l).collect::<Vec<_>>() {
            return Err(Error::InvalidInput("not a permutation".into()));
        }
        if perm[..k].windows(2).any(|w| w[0] >= w[1])
            || perm[k..].windows(2).any(|w| w[0] >= w[1])
        {
            return Err(Error::InvalidInput("halves must be increasing".into()));
        }
        Ok(ShufflePermutation { k, l, perm })
    }

    pub fn apply(&self, i: usize) -> usize {
        self.perm[i - 1]
    }
}

/// All shuffle permutations of type `(k, l)`, sorted by one-line notation.
/// There are `C(k+l, k)` of them.
pub fn enumerate_shuffle_permutations(k: usize, l: usize) -> Vec<ShufflePermutation> {
    use itertools::Itertools;
    let n = k + l;
    let mut out: Vec<ShufflePermutation> = (1..=n)
        .combinations(k)
        .map(|first| {
            let fset: BTreeSet<usize> = first.iter().copied().collect();
            let mut perm = first.clone();
            perm.extend((1..=n).filter(|v| !fset.contains(v)));
            ShufflePermutation { k, l, perm }
        })
        .collect();
    out.sort_by(|a, b| a.perm.cmp(&b.perm));
    out
}

/// Elementary composition `u ∘_{i,τ} v`: graft `v` at input `i` of `u`,
/// with `τ` of type `(arity(v)-1, arity(u)-i)` prescribing how the leaves of
/// `v` shuffle into the leaves of `u` after `i`. The result is canonical.
pub fn compose_elementary(
    u: &Tree,
    i: usize,
    tau: &ShufflePermutation,
    v: &Tree,
) -> Result<Tree> {
    let k = u.arity();
    let l = v.arity();
    if i == 0 || i > k {
        return Err(Error::InvalidComposition(format!(
            "input position {i} out of range for arity {k}"
        )));
    }
    if tau.k != l - 1 || tau.l != k - i {
        return Err(Error::InvalidComposition(format!(
            "shuffle permutation of type ({}, {}) expected, got ({}, {})",
            l - 1,
            k - i,
            tau.k,
            tau.l
        )));
    }
    let v_rel = v.map_leaves(&|m| if m == 1 { i } else { i + tau.apply(m - 1) });
    let result = map_replace_leaf(u, i, &v_rel, &|j| {
        if j < i {
            j
        } else {
            i + tau.apply(l - 1 + (j - i))
        }
    });
    debug_assert!(result.is_canonical());
    Ok(result)
}

fn map_replace_leaf(u: &Tree, target: usize, repl: &Tree, f: &impl Fn(usize) -> usize) -> Tree {
    match u {
        Tree::Leaf(l) => {
            if *l == target {
                repl.clone()
            } else {
                Tree::Leaf(f(*l))
            }
        }
        Tree::Node { gen, kids } => Tree::Node {
            gen: *gen,
            kids: kids.iter().map(|k| map_replace_leaf(k, target, repl, f)).collect(),
        },
        Tree::Hole { id, kids } => Tree::Hole {
            id: *id,
            kids: kids.iter().map(|k| map_replace_leaf(k, target, repl, f)).collect(),
        },
    }
}

/// Simultaneous grafting `(u |_f v_1 ... v_k)`: input `i` of `u` receives
/// `v_i`, whose leaf `m` becomes the `m`-th smallest element of `f^-1{i}`.
pub fn graft_full(u: &Tree, f: &ShuffleSurjection, vs: &[Tree]) -> Result<Tree> {
    let k = u.arity();
    if vs.len() != k || f.block_sizes.len() != k {
        return Err(Error::InvalidComposition(format!(
            "grafting expects {k} arguments, got {} (surjection has {} blocks)",
            vs.len(),
            f.block_sizes.len()
        )));
    }
    for (i, v) in vs.iter().enumerate() {
        if v.arity() != f.block_sizes[i] {
            return Err(Error::InvalidComposition(format!(
                "argument {} has arity {} but the surjection block has size {}",
                i + 1,
                v.arity(),
                f.block_sizes[i]
            )));
        }
    }
    f.check()?;
    let blocks: Vec<Vec<usize>> = (1..=k).map(|i| f.block(i)).collect();
    let subs: Vec<Tree> = vs
        .iter()
        .enumerate()
        .map(|(i, v)| v.map_leaves(&|m| blocks[i][m - 1]))
        .collect();
    let result = u.substitute_leaves(&subs);
    debug_assert!(result.is_canonical() || !u.is_canonical());
    Ok(result)
}

/// Decompose a simultaneous grafting into the sequence of elementary
/// compositions `u ∘_{p,τ_p} v_p ∘ ... ∘_{1,τ_1} v_1` (folded left to
/// right), returning the steps in application order.
pub fn decompose_to_elementary(
    u: &Tree,
    f: &ShuffleSurjection,
    vs: &[Tree],
) -> Result<Vec<(usize, ShufflePermutation, Tree)>> {
    let k = u.arity();
    if vs.len() != k {
        return Err(Error::InvalidComposition("argument count mismatch".into()));
    }
    f.check()?;
    let blocks: Vec<Vec<usize>> = (1..=k).map(|i| f.block(i)).collect();
    let mut steps = Vec::new();
    for j in (1..=k).rev() {
        let nj = blocks[j - 1].len();
        // items with canonical label > j in the intermediate tree after
        // grafting v_j: the later leaves of block j and all leaves of
        // blocks beyond j, ordered by their final labels
        let mut reps: Vec<usize> = blocks[j - 1][1..].to_vec();
        for b in blocks.iter().skip(j) {
            reps.extend_from_slice(b);
        }
        reps.sort_unstable();
        let rank = |x: usize| reps.iter().position(|&r| r == x).unwrap() + 1;
        let trailing: usize = blocks.iter().skip(j).map(|b| b.len()).sum();
        let mut perm = vec![0usize; nj - 1 + trailing];
        for (m, &lab) in blocks[j - 1][1..].iter().enumerate() {
            perm[m] = rank(lab);
        }
        let mut later: Vec<usize> = blocks.iter().skip(j).flatten().copied().collect();
        later.sort_unstable();
        for (s, &lab) in later.iter().enumerate() {
            perm[nj - 1 + s] = rank(lab);
        }
        let tau = ShufflePermutation::new(nj - 1, trailing, perm)?;
        steps.push((j, tau, vs[j - 1].clone()));
    }
    Ok(steps)
}

/// Refold a decomposition, for round-trip checks.
pub fn refold_elementary(u: &Tree, steps: &[(usize, ShufflePermutation, Tree)]) -> Result<Tree> {
    let mut acc = u.clone();
    for (i, tau, v) in steps {
        acc = compose_elementary(&acc, *i, tau, v)?;
    }
    Ok(acc)
}

/// One-hole context `Γ = w ∘_{i,τ} (□_k | w⃗)`: a tree with a single hole
/// whose children are the crown subtrees, all leaves carrying the global
/// labels of `Γ[a]`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Context {
    pub tree: Tree,
    pub inner_arity: Arity,
}

impl Context {
    /// The trivial context of inner arity `k`: plugging is the identity.
    pub fn trivial(k: Arity) -> Context {
        Context {
            tree: Tree::Hole { id: CARVE_HOLE, kids: (1..=k).map(Tree::Leaf).collect() },
            inner_arity: k,
        }
    }

    /// A crown context `(□ | v_1 ... v_k)` from globally labeled subtrees.
    pub fn crown(kids: Vec<Tree>) -> Context {
        let k = kids.len();
        debug_assert!(kids.windows(2).all(|w| w[0].min_leaf() < w[1].min_leaf()));
        Context { tree: Tree::Hole { id: CARVE_HOLE, kids }, inner_arity: k }
    }

    pub fn is_trivial(&self) -> bool {
        match &self.tree {
            Tree::Hole { kids, .. } => kids.iter().all(|k| matches!(k, Tree::Leaf(_))),
            _ => false,
        }
    }

    /// Plug a monomial of matching arity into the hole.
    pub fn plug(&self, a: &Tree) -> Result<Tree> {
        if a.arity() != self.inner_arity {
            return Err(Error::ArityMismatch(format!(
                "context expects inner arity {}, got {}",
                self.inner_arity,
                a.arity()
            )));
        }
        Ok(self.tree.plug(CARVE_HOLE, a))
    }

    /// Compose contexts: `(self ∘ inner)[a] = self[inner[a]]`.
    pub fn compose(&self, inner: &Context) -> Result<Context> {
        if inner.tree.arity() != self.inner_arity {
            return Err(Error::ArityMismatch(format!(
                "outer context expects inner arity {}, inner context produces {}",
                self.inner_arity,
                inner.tree.arity()
            )));
        }
        Ok(Context { tree: self.tree.plug(CARVE_HOLE, &inner.tree), inner_arity: inner.inner_arity })
    }

    /// Total number of generator vertices contributed by the context.
    pub fn weight(&self) -> Weight {
        self.tree.weight()
    }

    /// Arity of the monomial `Γ[a]`.
    pub fn outer_arity(&self) -> Arity {
        self.tree.arity()
    }
}

/// An occurrence of a pattern inside a subject: the carved context plus the
/// set of occupied vertex paths.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Occurrence {
    pub context: Context,
    pub vertices: BTreeSet<Path>,
}

/// All occurrences of `pattern` (a pure monomial, nontrivial) inside
/// `subject` as distinct submonomial occurrences, in pre-order of the
/// occurrence root. The subject may contain holes; holes never match
/// pattern vertices but may appear inside hanging subtrees.
pub fn find_occurrences(pattern: &Tree, subject: &Tree) -> Result<Vec<Occurrence>> {
    find_occurrences_with(pattern, subject, CARVE_HOLE)
}

/// As [`find_occurrences`], carving with an explicit hole id so that
/// subjects already containing a carved hole stay unambiguous.
pub fn find_occurrences_with(
    pattern: &Tree,
    subject: &Tree,
    carve_id: u32,
) -> Result<Vec<Occurrence>> {
    if pattern.is_trivial() {
        return Err(Error::InvalidInput(
            "occurrences of the trivial monomial are not defined".into(),
        ));
    }
    let mut out = Vec::new();
    let mut path = Vec::new();
    occurrences_rec(pattern, subject, subject, &mut path, carve_id, &mut out);
    Ok(out)
}

/// Rename a hole id throughout a tree.
pub fn relabel_hole(t: &Tree, from: u32, to: u32) -> Tree {
    match t {
        Tree::Leaf(_) => t.clone(),
        Tree::Node { gen, kids } => Tree::Node {
            gen: *gen,
            kids: kids.iter().map(|k| relabel_hole(k, from, to)).collect(),
        },
        Tree::Hole { id, kids } => Tree::Hole {
            id: if *id == from { to } else { *id },
            kids: kids.iter().map(|k| relabel_hole(k, from, to)).collect(),
        },
    }
}

fn occurrences_rec(
    pattern: &Tree,
    whole: &Tree,
    here: &Tree,
    path: &mut Path,
    carve_id: u32,
    out: &mut Vec<Occurrence>,
) {
    if let Tree::Node { .. } = here {
        if let Some(occ) = match_at(pattern, whole, path, carve_id) {
            out.push(occ);
        }
    }
    match here {
        Tree::Leaf(_) => {}
        Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
            for (i, k) in kids.iter().enumerate() {
                path.push(i);
                occurrences_rec(pattern, whole, k, path, carve_id, out);
                path.pop();
            }
        }
    }
}

/// Try to match `pattern` with its root at `root_path` in `whole`.
/// Children correspond positionally since both sides order siblings by
/// minimal leaf; the induced labeling must then agree with the pattern's
/// leaf labels, i.e. the hanging subtrees sorted by minimal global leaf
/// receive the pattern labels `1..m` in order.
fn match_at(pattern: &Tree, whole: &Tree, root_path: &Path, carve_id: u32) -> Option<Occurrence> {
    let sub = whole.subtree(root_path);
    let mut hangs: Vec<(usize, &Tree)> = Vec::new();
    let mut vertices = BTreeSet::new();
    if !match_rec(pattern, sub, root_path, &mut hangs, &mut vertices) {
        return None;
    }
    hangs.sort_by_key(|(_, t)| t.min_leaf());
    if hangs.iter().enumerate().any(|(idx, (lbl, _))| *lbl != idx + 1) {
        return None;
    }
    let crown: Vec<Tree> = hangs.iter().map(|(_, t)| (*t).clone()).collect();
    let hole = Tree::Hole { id: carve_id, kids: crown };
    let carved = replace_at(whole, root_path, &hole);
    Some(Occurrence {
        context: Context { tree: carved, inner_arity: pattern.arity() },
        vertices,
    })
}

fn match_rec<'s>(
    pattern: &Tree,
    sub: &'s Tree,
    path: &Path,
    hangs: &mut Vec<(usize, &'s Tree)>,
    vertices: &mut BTreeSet<Path>,
) -> bool {
    match (pattern, sub) {
        (Tree::Node { gen: pg, kids: pk }, Tree::Node { gen: sg, kids: sk }) => {
            if pg != sg || pk.len() != sk.len() {
                return false;
            }
            vertices.insert(path.clone());
            for (i, (p, s)) in pk.iter().zip(sk.iter()).enumerate() {
                match p {
                    Tree::Leaf(l) => hangs.push((*l, s)),
                    Tree::Node { .. } => {
                        let mut next = path.clone();
                        next.push(i);
                        if !match_rec(p, s, &next, hangs, vertices) {
                            return false;
                        }
                    }
                    Tree::Hole { .. } => return false,
                }
            }
            true
        }
        _ => false,
    }
}

fn replace_at(t: &Tree, path: &[usize], repl: &Tree) -> Tree {
    if path.is_empty() {
        return repl.clone();
    }
    match t {
        Tree::Node { gen, kids } => {
            let mut kids = kids.clone();
            kids[path[0]] = replace_at(&kids[path[0]], &path[1..], repl);
            Tree::Node { gen: *gen, kids }
        }
        Tree::Hole { id, kids } => {
            let mut kids = kids.clone();
            kids[path[0]] = replace_at(&kids[path[0]], &path[1..], repl);
            Tree::Hole { id: *id, kids }
        }
        Tree::Leaf(_) => panic!("path descends through a leaf"),
    }
}

/// The rooted submonomial of `t` induced by an upward-closed set of vertex
/// paths, with hanging subtrees collapsed to leaves and leaf labels
/// re-ranked to `1..=arity`. Returns the induced monomial together with the
/// hanging subtrees in canonical (min-leaf) order.
pub fn induced_submonomial(t: &Tree, vertices: &BTreeSet<Path>) -> (Tree, Vec<Tree>) {
    fn build(t: &Tree, path: &mut Path, vertices: &BTreeSet<Path>, hangs: &mut Vec<Tree>) -> Tree {
        match t {
            Tree::Leaf(_) => {
                hangs.push(t.clone());
                Tree::Leaf(t.min_leaf())
            }
            Tree::Node { gen, kids } => {
                if vertices.contains(path) {
                    let kids = kids
                        .iter()
                        .enumerate()
                        .map(|(i, k)| {
                            path.push(i);
                            let r = build(k, path, vertices, hangs);
                            path.pop();
                            r
                        })
                        .collect();
                    Tree::Node { gen: *gen, kids }
                } else {
                    hangs.push(t.clone());
                    Tree::Leaf(t.min_leaf())
                }
            }
            Tree::Hole { .. } => {
                hangs.push(t.clone());
                Tree::Leaf(t.min_leaf())
            }
        }
    }
    let mut hangs = Vec::new();
    let skeleton = build(t, &mut Vec::new(), vertices, &mut hangs);
    let induced = skeleton.rerank_leaves();
    hangs.sort_by_key(|h| h.min_leaf());
    (induced, hangs)
}

/// Enumerator of canonical tree monomials by arity and weight, memoized.
pub struct MonoEnumerator<'a> {
    table: &'a GenTable,
    memo: RefCell<BTreeMap<(Arity, Weight), Rc<Vec<Tree>>>>,
    budget: usize,
    produced: RefCell<usize>,
}

impl<'a> MonoEnumerator<'a> {
    pub fn new(table: &'a GenTable) -> Self {
        MonoEnumerator {
            table,
            memo: RefCell::new(BTreeMap::new()),
            budget: 4_000_000,
            produced: RefCell::new(0),
        }
    }

    pub fn with_budget(table: &'a GenTable, budget: usize) -> Self {
        MonoEnumerator { budget, ..Self::new(table) }
    }

    /// All canonical monomials of the exact arity and weight.
    pub fn enumerate(&self, arity: Arity, weight: Weight) -> Result<Rc<Vec<Tree>>> {
        if let Some(v) = self.memo.borrow().get(&(arity, weight)) {
            return Ok(v.clone());
        }
        let mut out: Vec<Tree> = Vec::new();
        if weight == 0 {
            if arity == 1 {
                out.push(Tree::trivial());
            }
        } else {
            for gen in self.table.ids() {
                let k = self.table.get(gen).arity;
                if k > arity {
                    continue;
                }
                for comp in compositions(arity, k) {
                    for ws in compositions_with_zero(weight - 1, k) {
                        let kid_sets: Vec<Rc<Vec<Tree>>> = comp
                            .iter()
                            .zip(ws.iter())
                            .map(|(&a, &w)| self.enumerate(a, w))
                            .collect::<Result<_>>()?;
                        if kid_sets.iter().any(|s| s.is_empty()) {
                            continue;
                        }
                        let corolla = Tree::Node {
                            gen,
                            kids: (1..=k).map(Tree::Leaf).collect(),
                        };
                        for f in enumerate_shuffle_surjections(&comp)? {
                            let mut idx = vec![0usize; k];
                            loop {
                                let vs: Vec<Tree> = idx
                                    .iter()
                                    .enumerate()
                                    .map(|(i, &j)| kid_sets[i][j].clone())
                                    .collect();
                                out.push(graft_full(&corolla, &f, &vs)?);
                                let mut c = *self.produced.borrow() + 1;
                                *self.produced.borrow_mut() = c;
                                if c > self.budget {
                                    return Err(Error::Budget(format!(
                                        "monomial enumeration exceeded {} trees",
                                        self.budget
                                    )));
                                }
                                // advance the mixed-radix counter
                                let mut i = k;
                                loop {
                                    if i == 0 {
                                        c = 0;
                                        break;
                                    }
                                    i -= 1;
                                    idx[i] += 1;
                                    if idx[i] < kid_sets[i].len() {
                                        c = 1;
                                        break;
                                    }
                                    idx[i] = 0;
                                }
                                if c == 0 {
                                    break;
                                }
                            }
                        }
                    }
                }
            }
            out.sort();
        }
        let rc = Rc::new(out);
        self.memo.borrow_mut().insert((arity, weight), rc.clone());
        Ok(rc)
    }
}

/// Exact counts of canonical monomials by weight for a fixed arity.
pub fn count_monomials(
    table: &GenTable,
    arity: Arity,
    max_weight: Weight,
) -> Result<Vec<(Weight, usize)>> {
    let e = MonoEnumerator::new(table);
    (0..=max_weight)
        .map(|w| Ok((w, e.enumerate(arity, w)?.len())))
        .collect()
}

/// Compositions of `n` into exactly `k` positive parts.
pub fn compositions(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if k == 1 {
        return if n >= 1 { vec![vec![n]] } else { vec![] };
    }
    let mut out = Vec::new();
    for first in 1..=n.saturating_sub(k - 1) {
        for rest in compositions(n - first, k - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// Compositions of `n` into exactly `k` nonnegative parts.
pub fn compositions_with_zero(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return if n == 0 { vec![vec![]] } else { vec![] };
    }
    if k == 1 {
        return vec![vec![n]];
    }
    let mut out = Vec::new();
    for first in 0..=n {
        for rest in compositions_with_zero(n - first, k - 1) {
            let mut c = vec![first];
            c.extend(rest);
            out.push(c);
        }
    }
    out
}

/// All rooted submonomials of a globally labeled subtree, as upward-closed
/// vertex path sets (relative to the subtree root). Includes the empty set
/// (pruning everything) and the full set.
pub fn rooted_prunings(t: &Tree) -> Vec<BTreeSet<Path>> {
    match t {
        Tree::Leaf(_) | Tree::Hole { .. } => vec![BTreeSet::new()],
        Tree::Node { kids, .. } => {
            let mut out = vec![BTreeSet::new()];
            let kid_choices: Vec<Vec<BTreeSet<Path>>> =
                kids.iter().map(rooted_prunings).collect();
            let mut combos: Vec<BTreeSet<Path>> = vec![{
                let mut s = BTreeSet::new();
                s.insert(Path::new());
                s
            }];
            for (i, choices) in kid_choices.iter().enumerate() {
                let mut next = Vec::new();
                for base in &combos {
                    for ch in choices {
                        let mut s = base.clone();
                        for p in ch {
                            let mut q = vec![i];
                            q.extend(p.iter().copied());
                            s.insert(q);
                        }
                        next.push(s);
                    }
                }
                combos = next;
            }
            out.extend(combos);
            out
        }
    }
}
