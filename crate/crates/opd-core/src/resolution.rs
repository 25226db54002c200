//! Higher overlappings, the crown graph, the right contraction, the free
//! bimodule chain complex, and minimality/Koszulness certificates.
//!
//! An `n`-overlapping is represented relative to its full source monomial
//! by the nested chain of vertex sets of its stages; a crown is the extra
//! layer of reduced material added by one stage. The right contraction σ
//! is computed in the abelianized cell representation: the top component
//! of `σ(a)` collects the genuinely higher-dimensional material prescribed
//! by the three-case recursion, while the lower components are forced by
//! `s(σ_a) = a - t(a) + σ_{t(a)}`.

use std::cell::{Cell as StdCell, RefCell};
use std::collections::{BTreeMap, BTreeSet};

use num_traits::One;

use crate::branching::{check_confluence, critical_branchings, ConfluenceScope};
use crate::error::{Error, Result};
use crate::linalg::{LinComb, Rational, Term};
use crate::polygraph::{Cell, CellMono, CellSpace, GenKey, Polygraph};
use crate::rewrite::{
    is_reduced_mono, is_reduced_term, normal_form, step_positions, Evidence, PathLexOrder,
    ReductionStrategy, StepRef,
};
use crate::treemono::{
    induced_submonomial, rooted_prunings, tree_to_string, Context, GenId, Path, Tree,
};

/// An `n`-overlapping: the source monomial with the nested vertex sets of
/// its stages and the ordered list of branch redexes.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Overlapping {
    pub dim: usize,
    pub base: GenId,
    /// Intern index of the `(dim-1)`-overlapping this extends; `None` at
    /// dimension 1 (the parent is the bare generator).
    pub parent: Option<usize>,
    /// Crown subtrees hanging under the parent source's inputs, labeled in
    /// `source`.
    pub crown: Vec<Tree>,
    pub source: Tree,
    /// `levels[k]` = vertex paths of the `k`-stage source inside `source`;
    /// `levels[dim]` covers every vertex.
    pub levels: Vec<BTreeSet<Path>>,
    /// Branch redexes `(vertex set, rule)`, strictly increasing in the
    /// path-lexicographic order on 1-monomials.
    pub branches: Vec<(BTreeSet<Path>, usize)>,
}

impl Overlapping {
    pub fn weight(&self) -> usize {
        self.source.weight()
    }

    pub fn graded_weight(&self, p: &Polygraph) -> usize {
        self.source.graded_weight(&p.gens)
    }

    pub fn arity(&self) -> usize {
        self.source.arity()
    }

    fn key(&self) -> (usize, Tree, Vec<BTreeSet<Path>>) {
        (self.dim, self.source.clone(), self.levels.clone())
    }
}

/// Session owning the overlapping registry, the σ memo tables and the
/// generator boundaries for one reduced convergent polygraph.
pub struct Resolver<'a> {
    pub p: &'a Polygraph,
    pub order: PathLexOrder,
    evidence: &'a Evidence,
    pub max_weight: usize,
    pub crown_budget: usize,
    ovs: RefCell<Vec<Overlapping>>,
    ov_index: RefCell<BTreeMap<(usize, Tree, Vec<BTreeSet<Path>>), usize>>,
    boundaries: RefCell<BTreeMap<usize, (Cell, Cell)>>,
    sigma0_memo: RefCell<BTreeMap<Tree, Cell>>,
    sigma_ess_memo: RefCell<BTreeMap<(Stage, Vec<Tree>), Cell>>,
    sigma_budget: StdCell<u64>,
}

/// Parent stage of a crowned monomial: a bare generator or an interned
/// overlapping.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Stage {
    Zero(GenId),
    Ov(usize),
}

impl<'a> CellSpace for Resolver<'a> {
    fn boundary(&self, g: GenKey) -> Result<(Cell, Cell)> {
        if g.dim == 0 {
            return Err(Error::Precondition("0-generators have no boundary".into()));
        }
        self.boundary_of(g.idx)
    }
}

impl<'a> Resolver<'a> {
    /// Requires a reduced, convergent, left-monomial polygraph; convergence
    /// is established from the supplied evidence plus joinability of all
    /// critical branchings.
    pub fn new(
        p: &'a Polygraph,
        evidence: &'a Evidence,
        max_weight: usize,
    ) -> Result<Resolver<'a>> {
        if !is_reduced_polygraph(p) {
            return Err(Error::Precondition(
                "the overlapping resolution needs a reduced polygraph".into(),
            ));
        }
        let report = check_confluence(p, evidence, ConfluenceScope::Critical, 0)?;
        if !report.confluent {
            return Err(Error::Precondition(
                "the overlapping resolution needs a convergent polygraph".into(),
            ));
        }
        let crown_budget = p.max_rule_weight().max(1);
        let r = Resolver {
            p,
            order: PathLexOrder::declaration(&p.gens),
            evidence,
            max_weight,
            crown_budget,
            ovs: RefCell::new(Vec::new()),
            ov_index: RefCell::new(BTreeMap::new()),
            boundaries: RefCell::new(BTreeMap::new()),
            sigma0_memo: RefCell::new(BTreeMap::new()),
            sigma_ess_memo: RefCell::new(BTreeMap::new()),
            sigma_budget: StdCell::new(2_000_000),
        };
        // intern the rules as 1-overlappings, aligned with rule indices
        for (i, rule) in p.rules.iter().enumerate() {
            let verts: BTreeSet<Path> = rule.source.vertex_paths().into_iter().collect();
            let crown = root_crown(&rule.source);
            let ov = Overlapping {
                dim: 1,
                base: root_gen(&rule.source),
                parent: None,
                crown,
                source: rule.source.clone(),
                levels: vec![[Path::new()].into_iter().collect(), verts.clone()],
                branches: vec![(verts, i)],
            };
            let idx = r.intern(ov);
            debug_assert_eq!(idx, i);
        }
        Ok(r)
    }

    fn intern(&self, ov: Overlapping) -> usize {
        let key = ov.key();
        if let Some(&i) = self.ov_index.borrow().get(&key) {
            return i;
        }
        let mut ovs = self.ovs.borrow_mut();
        let idx = ovs.len();
        ovs.push(ov);
        self.ov_index.borrow_mut().insert(key, idx);
        idx
    }

    pub fn overlapping(&self, idx: usize) -> Overlapping {
        self.ovs.borrow()[idx].clone()
    }

    /// Enumerate the overlappings per dimension up to `max_dim`, bounded by
    /// the weight budget. Dimension 0 is the generator table; dimension 1
    /// the rules; dimension 2 corresponds to the critical branchings.
    pub fn overlappings_up_to(&self, max_dim: usize) -> Result<Vec<Vec<usize>>> {
        let mut dims: Vec<Vec<usize>> = Vec::new();
        dims.push(Vec::new()); // dimension 0: generators, listed separately
        if max_dim == 0 {
            return Ok(dims);
        }
        dims.push((0..self.p.rules.len()).collect());
        for d in 2..=max_dim {
            let mut next: Vec<usize> = Vec::new();
            for &u in &dims[d - 1] {
                next.extend(self.extensions(u)?);
            }
            let ovs = self.ovs.borrow();
            next.sort_by(|a, b| ovs[*a].key().cmp(&ovs[*b].key()));
            drop(ovs);
            next.dedup();
            dims.push(next);
        }
        Ok(dims)
    }

    /// All `(dim+1)`-overlappings extending the interned overlapping by a
    /// crown within the weight budgets.
    fn extensions(&self, u_idx: usize) -> Result<Vec<usize>> {
        let u = self.overlapping(u_idx);
        let parent_source = u.source.clone();
        let k = parent_source.arity();
        let budget = self
            .crown_budget
            .min(self.max_weight.saturating_sub(parent_source.weight()));
        let mut out = Vec::new();
        let e = crate::treemono::MonoEnumerator::new(&self.p.gens);
        let max_node_arity = self.p.gens.max_arity().saturating_sub(1);
        for total in 1..=budget {
            for ws in crate::treemono::compositions_with_zero(total, k) {
                // per-input reduced monomials of the prescribed weights
                let mut choices: Vec<Vec<Tree>> = Vec::with_capacity(k);
                for &w in &ws {
                    let mut c = Vec::new();
                    let max_a = if w == 0 { 1 } else { 1 + w * max_node_arity };
                    for a in 1..=max_a {
                        for m in e.enumerate(a, w)?.iter() {
                            if is_reduced_mono(self.p, m) {
                                c.push(m.clone());
                            }
                        }
                    }
                    choices.push(c);
                }
                if choices.iter().any(|c| c.is_empty()) {
                    continue;
                }
                let mut idx = vec![0usize; k];
                'combo: loop {
                    let locals: Vec<&Tree> =
                        idx.iter().enumerate().map(|(i, &j)| &choices[i][j]).collect();
                    // all shuffle surjections distributing the global labels
                    let sizes: Vec<usize> = locals.iter().map(|t| t.arity()).collect();
                    for f in crate::treemono::enumerate_shuffle_surjections(&sizes)? {
                        let kids: Vec<Tree> = locals
                            .iter()
                            .enumerate()
                            .map(|(i, t)| {
                                let block = f.block(i + 1);
                                t.map_leaves(&|m| block[m - 1])
                            })
                            .collect();
                        let m_full = parent_source.substitute_leaves(&kids);
                        if let Some(ov) =
                            self.try_crown(Stage::Ov(u_idx), &m_full)?
                        {
                            out.push(self.intern(ov));
                        }
                    }
                    // advance
                    let mut i = k;
                    loop {
                        if i == 0 {
                            break 'combo;
                        }
                        i -= 1;
                        idx[i] += 1;
                        if idx[i] < choices[i].len() {
                            break;
                        }
                        idx[i] = 0;
                    }
                }
            }
        }
        Ok(out)
    }

    fn stage_data(&self, stage: Stage) -> (Tree, BTreeSet<Path>, Vec<BTreeSet<Path>>, Vec<(BTreeSet<Path>, usize)>, GenId) {
        match stage {
            Stage::Zero(g) => {
                let source = Tree::corolla(&self.p.gens, g);
                let verts: BTreeSet<Path> = [Path::new()].into_iter().collect();
                (source, verts.clone(), vec![verts], Vec::new(), g)
            }
            Stage::Ov(i) => {
                let ov = self.overlapping(i);
                (
                    ov.source.clone(),
                    ov.levels.last().unwrap().clone(),
                    ov.levels.clone(),
                    ov.branches.clone(),
                    ov.base,
                )
            }
        }
    }

    /// Test whether the full crowned monomial `m_full` over the stage forms
    /// an overlapping of the next dimension, and construct it if so.
    fn try_crown(&self, stage: Stage, m_full: &Tree) -> Result<Option<Overlapping>> {
        let (parent_source, parent_verts, parent_levels, parent_branches, base) =
            self.stage_data(stage);
        let all: BTreeSet<Path> = m_full.vertex_paths().into_iter().collect();
        debug_assert!(parent_verts.is_subset(&all));
        let e_here = self.e_set(m_full, &parent_branches)?;
        if e_here.is_empty() {
            return Ok(None);
        }
        let new_branch = e_here
            .into_iter()
            .max_by(|a, b| self.order.cmp_step(a, b))
            .unwrap();
        // crown minimality: the crown is exactly the material the maximal
        // new branch consumes, so every crown vertex lies in its redex
        if all
            .iter()
            .any(|p| !parent_verts.contains(p) && !new_branch.occ.vertices.contains(p))
        {
            return Ok(None);
        }
        let mut branches = parent_branches;
        branches.push((new_branch.occ.vertices.clone(), new_branch.rule));
        let mut levels = parent_levels;
        levels.push(all);
        let dim = levels.len() - 1;
        let (_, crown) = induced_submonomial(m_full, &parent_verts);
        Ok(Some(Overlapping {
            dim,
            base,
            parent: match stage {
                Stage::Zero(_) => None,
                Stage::Ov(i) => Some(i),
            },
            crown,
            source: m_full.clone(),
            levels,
            branches,
        }))
    }

    /// The set `E`: rule applications on the crowned source strictly above
    /// the lifted maximal branch (all of them for a bare generator).
    fn e_set(&self, m: &Tree, parent_branches: &[(BTreeSet<Path>, usize)]) -> Result<Vec<StepRef>> {
        let steps = step_positions(self.p, m);
        match parent_branches.last() {
            None => Ok(steps),
            Some((verts, rule)) => {
                let lifted = steps
                    .iter()
                    .find(|s| s.rule == *rule && &s.occ.vertices == verts)
                    .cloned()
                    .ok_or_else(|| {
                        Error::Precondition(format!(
                            "maximal branch does not survive in {}",
                            tree_to_string(m, &self.p.gens)
                        ))
                    })?;
                Ok(steps
                    .into_iter()
                    .filter(|s| {
                        self.order.cmp_step(s, &lifted) == std::cmp::Ordering::Greater
                    })
                    .collect())
            }
        }
    }

    /// Upward-closed vertex sets of the crown region (paths in the crowned
    /// monomial, parent vertices excluded), the full crown included.
    fn crown_subsets(&self, parent_source: &Tree, m_full: &Tree) -> Result<Vec<BTreeSet<Path>>> {
        let mut leaf_paths: BTreeMap<usize, Path> = BTreeMap::new();
        collect_leaf_paths(parent_source, &mut Vec::new(), &mut leaf_paths);
        let (_, kids) = induced_submonomial(
            m_full,
            &parent_source.vertex_paths().into_iter().collect(),
        );
        // kids are sorted by min leaf = leaf order of the parent source
        let mut per_kid: Vec<Vec<BTreeSet<Path>>> = Vec::new();
        let mut kid_roots: Vec<Path> = Vec::new();
        for (label, kid) in (1..=kids.len()).zip(kids.iter()) {
            kid_roots.push(leaf_paths[&label].clone());
            per_kid.push(rooted_prunings(kid));
        }
        let mut out: Vec<BTreeSet<Path>> = vec![BTreeSet::new()];
        for (j, prunings) in per_kid.iter().enumerate() {
            let mut next = Vec::new();
            for base in &out {
                for pr in prunings {
                    let mut s = base.clone();
                    for rel in pr {
                        let mut abs = kid_roots[j].clone();
                        abs.extend(rel.iter().copied());
                        s.insert(abs);
                    }
                    next.push(s);
                }
            }
            out = next;
        }
        Ok(out)
    }

    // -----------------------------------------------------------------
    // Generator boundaries
    // -----------------------------------------------------------------

    /// Source and target cells of an interned overlapping generator.
    pub fn boundary_of(&self, idx: usize) -> Result<(Cell, Cell)> {
        if let Some(b) = self.boundaries.borrow().get(&idx) {
            return Ok(b.clone());
        }
        let ov = self.overlapping(idx);
        let bnd = if ov.dim == 1 {
            let rule_idx = ov.branches[0].1;
            let r = &self.p.rules[rule_idx];
            (
                Cell::from_term(Term::monomial(r.source.clone())),
                Cell::from_term(r.target.clone()),
            )
        } else {
            let parent = ov.parent.expect("positive-dimensional overlapping has a parent");
            let cc = Context::crown(ov.crown.clone());
            let (ps, pt) = self.boundary_of(parent)?;
            let a = self.mono_cell(parent, &cc)?;
            let t_crowned = pt.apply_context(&cc)?;
            let s_crowned = ps.apply_context(&cc)?;
            let s_g = a.sub(&t_crowned.lift_to(a.dim()))?.add(&self.sigma(&t_crowned)?)?;
            let t_g = self.sigma(&s_crowned)?;
            (self.canon(&s_g)?, self.canon(&t_g)?)
        };
        self.boundaries.borrow_mut().insert(idx, bnd.clone());
        Ok(bnd)
    }

    /// The cell `Γ[u]` for an interned overlapping in a context.
    fn mono_cell(&self, idx: usize, ctx: &Context) -> Result<Cell> {
        let ov = self.overlapping(idx);
        let (s, _) = self.boundary_of(idx)?;
        let lower = s.apply_context(ctx)?;
        let mut top = LinComb::zero();
        top.add_term(
            CellMono { ctx: ctx.clone(), gen: GenKey { dim: ov.dim, idx } },
            Rational::one(),
        );
        Ok(Cell::from_parts(lower, top))
    }

    // -----------------------------------------------------------------
    // The right contraction σ
    // -----------------------------------------------------------------

    fn spend(&self, what: &str) -> Result<()> {
        let left = self.sigma_budget.get();
        if left == 0 {
            return Err(Error::Budget(format!("contraction budget exhausted at {what}")));
        }
        self.sigma_budget.set(left - 1);
        Ok(())
    }

    /// σ on an arbitrary cell: an `(n+1)`-cell whose source is
    /// `a - t(a) + σ_{t(a)}` and whose target is `σ_{s(a)}`.
    pub fn sigma(&self, c: &Cell) -> Result<Cell> {
        if c.dim() == 0 {
            return self.canon(&self.sigma0_term(c.base())?);
        }
        let c = self.canon(c)?;
        let n = c.dim();
        let mut new_top: LinComb<CellMono> = LinComb::zero();
        for (cm, coef) in c.top(n).unwrap().iter() {
            let contrib = self.sigma_mono_top(cm)?;
            for (k, v) in contrib.iter() {
                new_top.add_term(k.clone(), v.clone() * coef);
            }
        }
        let tc = c.target_once(self)?;
        let stc = self.sigma(&tc)?;
        let lower = c.sub(&tc.lift_to(n))?.add(&stc)?;
        self.canon(&Cell::from_parts(lower, new_top))
    }

    /// Exchange-canonical representative of a cell.
    pub fn canon(&self, c: &Cell) -> Result<Cell> {
        crate::rewrite::canonicalize_cell(self.p, &self.order, self, c)
    }

    /// Top component of `σ(Γ[A])`: by the right-contraction law, only
    /// `u ∘ σ((A | reduced crowns))` contributes above the identities.
    fn sigma_mono_top(&self, cm: &CellMono) -> Result<LinComb<CellMono>> {
        let (outer, crown_kids) = split_context(&cm.ctx);
        // normal forms of the crown components, expanded multilinearly
        let mut choices: Vec<Vec<(Tree, Rational)>> = Vec::new();
        for kid in &crown_kids {
            let mut labels = Vec::new();
            kid.leaves(&mut labels);
            labels.sort_unstable();
            let local = kid.rerank_leaves();
            let nf = normal_form(
                self.p,
                &Term::monomial(local),
                self.evidence,
                ReductionStrategy::LeastFirst,
            )?;
            let mut c = Vec::new();
            for (m, coef) in nf.normal_form.iter() {
                c.push((m.map_leaves(&|l| labels[l - 1]), coef.clone()));
            }
            choices.push(c);
        }
        let mut out = LinComb::zero();
        let mut idx = vec![0usize; choices.len()];
        if choices.iter().any(|c| c.is_empty()) {
            // a crown component normalizes to zero: no contribution
            return Ok(out);
        }
        'combo: loop {
            let mut coef = Rational::one();
            let kids: Vec<Tree> = idx
                .iter()
                .enumerate()
                .map(|(i, &j)| {
                    coef *= choices[i][j].1.clone();
                    choices[i][j].0.clone()
                })
                .collect();
            let ess = self.sigma_essential(cm.gen, &kids)?;
            let d = ess.dim();
            for (k, v) in ess.top(d).unwrap().iter() {
                out.add_term(
                    CellMono { ctx: outer.compose(&k.ctx)?, gen: k.gen },
                    v.clone() * coef.clone(),
                );
            }
            let mut i = idx.len();
            loop {
                if i == 0 {
                    break 'combo;
                }
                i -= 1;
                idx[i] += 1;
                if idx[i] < choices[i].len() {
                    break;
                }
                idx[i] = 0;
            }
        }
        Ok(out)
    }

    /// σ on a σ-essential monomial `(u_n | v⃗)` with reduced crown
    /// components: the three-case recursion of the contraction theorem.
    fn sigma_essential(&self, gen: GenKey, kids: &[Tree]) -> Result<Cell> {
        let stage = if gen.dim == 0 {
            Stage::Zero(GenId(gen.idx as u32))
        } else {
            Stage::Ov(gen.idx)
        };
        let memo_key = (stage, kids.to_vec());
        if let Some(c) = self.sigma_ess_memo.borrow().get(&memo_key) {
            return Ok(c.clone());
        }
        self.spend("sigma_essential")?;
        let (parent_source, parent_verts, _, _, _) = self.stage_data(stage);
        let m_full = parent_source.substitute_leaves(kids);
        let all: BTreeSet<Path> = m_full.vertex_paths().into_iter().collect();
        // candidate crowns: upward-closed subsets of the crown region
        let mut candidates: Vec<(BTreeSet<Path>, Overlapping)> = Vec::new();
        for v_sub in self.crown_subsets(&parent_source, &m_full)? {
            let vset: BTreeSet<Path> = v_sub.union(&parent_verts).cloned().collect();
            let (m_sub, _) = induced_submonomial(&m_full, &vset);
            if let Some(ov) = self.try_crown(stage, &m_sub)? {
                candidates.push((vset, ov));
            }
        }
        let result = if let Some((_, ov)) = candidates.iter().find(|(v, _)| v == &all) {
            // first case: the crowned monomial is itself an overlapping
            let idx = self.intern(ov.clone());
            let (s, _) = self.boundary_of(idx)?;
            let mut top = LinComb::zero();
            top.add_term(
                CellMono {
                    ctx: Context::trivial(ov.source.arity()),
                    gen: GenKey { dim: ov.dim, idx },
                },
                Rational::one(),
            );
            Cell::from_parts(s, top)
        } else if candidates.is_empty() {
            // second case: σ is an identity
            let a = self.crowned_cell(stage, kids)?;
            let ta = a.target_once(self)?;
            let sta = self.sigma(&ta)?;
            let lower = a.sub(&ta.lift_to(a.dim()))?.add(&sta)?;
            Cell::from_parts(lower, LinComb::zero())
        } else {
            // third case: factor through the maximal subcrown
            let (vmax, ov) = candidates
                .into_iter()
                .max_by(|(_, a), (_, b)| {
                    let sa = self.branch_step(a);
                    let sb = self.branch_step(b);
                    self.order.cmp_step(&sa, &sb)
                })
                .unwrap();
            let g_idx = self.intern(ov);
            let (_, w2) = induced_submonomial(&m_full, &vmax);
            let cc = Context::crown(w2);
            let x = self.mono_cell(g_idx, &cc)?;
            let n1 = x.dim();
            let tx = x.target_once(self)?;
            let stx = self.sigma(&tx)?;
            let a = self.crowned_cell(stage, kids)?;
            let sx = x.source_at(n1 - 1);
            let r = sx.sub(&a)?;
            let sr = self.sigma(&r)?;
            x.sub(&tx.lift_to(n1))?.add(&stx)?.sub(&sr)?
        };
        self.sigma_ess_memo.borrow_mut().insert(memo_key, result.clone());
        Ok(result)
    }

    /// The step of the last branch of an overlapping, inside its source.
    fn branch_step(&self, ov: &Overlapping) -> StepRef {
        let (verts, rule) = ov.branches.last().unwrap();
        step_positions(self.p, &ov.source)
            .into_iter()
            .find(|s| s.rule == *rule && &s.occ.vertices == verts)
            .expect("branch step exists in the source")
    }

    /// The cell `(stage | kids)`: for a bare generator this is the crowned
    /// monomial as a 0-cell; for an overlapping it is the crowned
    /// generator cell.
    fn crowned_cell(&self, stage: Stage, kids: &[Tree]) -> Result<Cell> {
        match stage {
            Stage::Zero(g) => {
                let m = Tree::corolla(&self.p.gens, g).substitute_leaves(kids);
                Ok(Cell::from_term(Term::monomial(m)))
            }
            Stage::Ov(i) => {
                let cc = Context::crown(kids.to_vec());
                self.mono_cell(i, &cc)
            }
        }
    }

    /// σ on a 0-monomial: the positive 1-cell to its normal form along the
    /// contraction strategy (rightmost unreduced input first, then the
    /// maximal root crown).
    fn sigma0_mono(&self, u: &Tree) -> Result<Cell> {
        if let Some(c) = self.sigma0_memo.borrow().get(u) {
            return Ok(c.clone());
        }
        self.spend("sigma0")?;
        let result = self.sigma0_mono_inner(u)?;
        self.sigma0_memo.borrow_mut().insert(u.clone(), result.clone());
        Ok(result)
    }

    fn sigma0_mono_inner(&self, u: &Tree) -> Result<Cell> {
        if is_reduced_mono(self.p, u) {
            return Ok(Cell::identity_of(&Cell::from_term(Term::monomial(u.clone()))));
        }
        let Tree::Node { kids, .. } = u else {
            unreachable!("the trivial monomial is reduced");
        };
        if let Some(i) = kids.iter().rposition(|k| !is_reduced_mono(self.p, k)) {
            // reduce the rightmost unreduced input first
            let kid = &kids[i];
            let mut labels = Vec::new();
            kid.leaves(&mut labels);
            labels.sort_unstable();
            let hole = Tree::Hole {
                id: crate::treemono::CARVE_HOLE,
                kids: labels.iter().map(|&l| Tree::Leaf(l)).collect(),
            };
            let mut carved_kids = kids.clone();
            carved_kids[i] = hole;
            let ctx = Context {
                tree: Tree::Node { gen: root_gen(u), kids: carved_kids },
                inner_arity: kid.arity(),
            };
            let local = kid.rerank_leaves();
            let sub = self.sigma0_mono(&local)?;
            let whisker = sub.apply_context(&ctx)?;
            let mid = whisker.target_once(self)?;
            let rest = self.sigma0_term(mid.base())?;
            return whisker.star(&rest, 0, self);
        }
        // all inputs reduced: choose the maximal root crown
        let (parent_source, parent_verts, _, _, _) = self.stage_data(Stage::Zero(root_gen(u)));
        let mut candidates: Vec<(BTreeSet<Path>, Overlapping)> = Vec::new();
        for v_sub in self.crown_subsets(&parent_source, u)? {
            let vset: BTreeSet<Path> = v_sub.union(&parent_verts).cloned().collect();
            let (m_sub, _) = induced_submonomial(u, &vset);
            if let Some(ov) = self.try_crown(Stage::Zero(root_gen(u)), &m_sub)? {
                candidates.push((vset, ov));
            }
        }
        let (vmax, ov) = candidates
            .into_iter()
            .max_by(|(_, a), (_, b)| {
                let sa = self.branch_step(a);
                let sb = self.branch_step(b);
                self.order.cmp_step(&sa, &sb)
            })
            .expect("a reducible monomial with reduced inputs has a root redex");
        let rule = ov.branches[0].1;
        let step = step_positions(self.p, u)
            .into_iter()
            .find(|s| s.rule == rule && s.occ.vertices == vmax)
            .expect("chosen crown step exists");
        let target = crate::rewrite::apply_step(self.p, &Term::monomial(u.clone()), u, &step)?;
        let mut top = LinComb::zero();
        top.add_term(
            CellMono { ctx: step.occ.context.clone(), gen: GenKey { dim: 1, idx: step.rule } },
            Rational::one(),
        );
        let cell = Cell::one_cell(top, Term::monomial(u.clone()));
        let rest = self.sigma0_term(&target)?;
        cell.star(&rest, 0, self)
    }

    fn sigma0_term(&self, t: &Term) -> Result<Cell> {
        let mut acc = Cell::identity_of(&Cell::from_term(Term::zero(t.arity())));
        for (m, c) in t.iter() {
            let cell = self.sigma0_mono(m)?;
            acc = acc.add(&cell.scale(c))?;
        }
        Ok(acc)
    }

    /// Public contraction: σ applied to a cell (or a term as 0-cell).
    pub fn contraction(&self, c: &Cell) -> Result<Cell> {
        self.sigma(c)
    }

    /// The crown graph 𝒢(X): sources of overlappings with one edge per
    /// crown extension.
    pub fn crown_graph(&self, max_dim: usize) -> Result<CrownGraph> {
        let dims = self.overlappings_up_to(max_dim)?;
        let mut vertices: Vec<(String, usize)> = Vec::new();
        let mut index: BTreeMap<String, usize> = BTreeMap::new();
        let mut edges: Vec<(usize, usize, String)> = Vec::new();
        let vertex = |name: String, weight: usize, vertices: &mut Vec<(String, usize)>, index: &mut BTreeMap<String, usize>| -> usize {
            if let Some(&i) = index.get(&name) {
                return i;
            }
            let i = vertices.len();
            vertices.push((name.clone(), weight));
            index.insert(name, i);
            i
        };
        for g in self.p.gens.ids() {
            let c = Tree::corolla(&self.p.gens, g);
            vertex(tree_to_string(&c, &self.p.gens), 1, &mut vertices, &mut index);
        }
        for d in 1..dims.len() {
            for &i in &dims[d] {
                let ov = self.overlapping(i);
                let src_name = match ov.parent {
                    None => tree_to_string(
                        &Tree::corolla(&self.p.gens, ov.base),
                        &self.p.gens,
                    ),
                    Some(parent) => {
                        tree_to_string(&self.overlapping(parent).source, &self.p.gens)
                    }
                };
                let dst_name = tree_to_string(&ov.source, &self.p.gens);
                let crown_label = ov
                    .crown
                    .iter()
                    .map(|k| tree_to_string(&k.rerank_leaves(), &self.p.gens))
                    .collect::<Vec<_>>()
                    .join(" ");
                let src_w = ov.source.weight() - ov.crown.iter().map(|k| k.weight()).sum::<usize>();
                let s = vertex(src_name, src_w, &mut vertices, &mut index);
                let t = vertex(dst_name, ov.weight(), &mut vertices, &mut index);
                edges.push((s, t, crown_label));
            }
        }
        edges.sort();
        edges.dedup();
        Ok(CrownGraph { vertices, edges })
    }
}

fn root_gen(t: &Tree) -> GenId {
    match t {
        Tree::Node { gen, .. } => *gen,
        _ => panic!("trivial monomial has no root generator"),
    }
}

fn root_crown(t: &Tree) -> Vec<Tree> {
    match t {
        Tree::Node { kids, .. } => kids.clone(),
        _ => panic!("trivial monomial has no crown"),
    }
}

fn collect_leaf_paths(t: &Tree, cur: &mut Path, out: &mut BTreeMap<usize, Path>) {
    match t {
        Tree::Leaf(l) => {
            out.insert(*l, cur.clone());
        }
        Tree::Node { kids, .. } | Tree::Hole { kids, .. } => {
            for (i, k) in kids.iter().enumerate() {
                cur.push(i);
                collect_leaf_paths(k, cur, out);
                cur.pop();
            }
        }
    }
}

/// Split a context `Γ = U ∘ (□ | crown)` into the outer context (crown
/// subtrees flattened to their leaves) and the crown subtrees.
fn split_context(ctx: &Context) -> (Context, Vec<Tree>) {
    fn go(t: &Tree, crown: &mut Vec<Tree>) -> Tree {
        match t {
            Tree::Leaf(_) => t.clone(),
            Tree::Node { gen, kids } => Tree::Node {
                gen: *gen,
                kids: kids.iter().map(|k| go(k, crown)).collect(),
            },
            Tree::Hole { id, kids } => {
                *crown = kids.clone();
                let mut labels = Vec::new();
                for k in kids {
                    k.leaves(&mut labels);
                }
                labels.sort_unstable();
                Tree::Hole { id: *id, kids: labels.into_iter().map(Tree::Leaf).collect() }
            }
        }
    }
    let mut crown = Vec::new();
    let tree = go(&ctx.tree, &mut crown);
    let inner: usize = crown.iter().map(|k| k.arity()).sum();
    (Context { tree, inner_arity: inner }, crown)
}

fn is_reduced_polygraph(p: &Polygraph) -> bool {
    p.rules.iter().enumerate().all(|(i, r)| {
        let right = is_reduced_term(p, &r.target);
        let left = p.rules.iter().enumerate().all(|(j, o)| {
            j == i
                || crate::treemono::find_occurrences(&o.source, &r.source)
                    .map(|v| v.is_empty())
                    .unwrap_or(true)
        });
        right && left
    })
}

/// The directed graph of crowns, with stable monomial-string vertex ids.
#[derive(Debug, Clone)]
pub struct CrownGraph {
    pub vertices: Vec<(String, usize)>,
    pub edges: Vec<(usize, usize, String)>,
}

impl CrownGraph {
    pub fn out_degree(&self, vertex_name: &str) -> usize {
        let Some(i) = self.vertices.iter().position(|(n, _)| n == vertex_name) else {
            return 0;
        };
        self.edges.iter().filter(|(s, _, _)| *s == i).count()
    }

    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph crowns {\n  rankdir=BT;\n");
        for (name, _) in &self.vertices {
            out.push_str(&format!("  \"{name}\";\n"));
        }
        for (s, t, label) in &self.edges {
            out.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.vertices[*s].0, self.vertices[*t].0, label
            ));
        }
        out.push_str("}\n");
        out
    }
}

// ---------------------------------------------------------------------------
// Free bimodule chain complex
// ---------------------------------------------------------------------------

/// Generator marker of the free bimodule complex: the unit slot, a
/// 0-generator, or a higher cell.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum BimodGen {
    Eps,
    Gen(GenId),
    Cell(GenKey),
}

/// Basis element of a free bimodule: a one-hole context with all operad
/// coordinates reduced, around a generator slot.
pub type BimodElem = LinComb<(Context, BimodGen)>;

pub struct ChainComplex<'r, 'a> {
    pub resolver: &'r Resolver<'a>,
    /// Generators per dimension `0..=max_dim` (dimension -1 is the unit).
    pub dims: Vec<Vec<ComplexGen>>,
}

#[derive(Debug, Clone)]
pub struct ComplexGen {
    pub gen: BimodGen,
    pub name: String,
    pub arity: usize,
    pub weight: usize,
    pub differential: BimodElem,
}

impl<'r, 'a> ChainComplex<'r, 'a> {
    /// δ(δ(A)) must vanish for every generator of dimension ≥ 1.
    pub fn check_d_squared(&self) -> Result<Vec<(String, bool)>> {
        let mut out = Vec::new();
        for d in 1..self.dims.len() {
            for g in &self.dims[d] {
                let once = &g.differential;
                let mut twice: BimodElem = LinComb::zero();
                for ((ctx, lower), coef) in once.iter() {
                    let lower_diff = self.differential_of(*lower)?;
                    for ((ctx2, gen2), c2) in lower_diff.iter() {
                        let composed = ctx.compose(ctx2)?;
                        for (rctx, rc) in self.resolver.reduce_context(&composed)?.iter() {
                            twice.add_term(
                                (rctx.clone(), *gen2),
                                coef.clone() * c2.clone() * rc.clone(),
                            );
                        }
                    }
                }
                out.push((g.name.clone(), twice.is_zero()));
            }
        }
        Ok(out)
    }

    fn differential_of(&self, g: BimodGen) -> Result<BimodElem> {
        for dim in &self.dims {
            for cg in dim {
                if cg.gen == g {
                    return Ok(cg.differential.clone());
                }
            }
        }
        match g {
            BimodGen::Eps => Ok(LinComb::zero()),
            _ => Err(Error::Precondition("generator outside the computed complex".into())),
        }
    }
}

impl<'a> Resolver<'a> {
    /// Normal form of a context: reduce every operad coordinate around the
    /// slot, expanding multilinearly.
    pub fn reduce_context(&self, ctx: &Context) -> Result<LinComb<Context>> {
        let mut comb: LinComb<Tree> = LinComb::singleton(ctx.tree.clone());
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > 1_000_000 {
                return Err(Error::Budget("context reduction exceeded 10^6 steps".into()));
            }
            // carve with the transient hole id: the subject already
            // contains the generator slot
            let next = comb.iter().find_map(|(t, _)| {
                crate::rewrite::step_positions_with(self.p, t, crate::treemono::EXCH_HOLE)
                    .into_iter()
                    .next()
                    .map(|s| (t.clone(), s))
            });
            let Some((t, s)) = next else { break };
            let coef = comb.coeff(&t);
            comb.add_term(t.clone(), -coef.clone());
            for (v, c) in self.p.rules[s.rule].target.iter() {
                comb.add_term(
                    s.occ.context.tree.plug(crate::treemono::EXCH_HOLE, v),
                    c * coef.clone(),
                );
            }
        }
        Ok(comb.map_keys(|t| Context { tree: t.clone(), inner_arity: ctx.inner_arity }))
    }

    /// The derivation `[u]` of a monomial into the free bimodule on the
    /// 0-generators: one slot per vertex, coordinates reduced.
    pub fn derivation(&self, u: &Tree) -> Result<BimodElem> {
        let mut out: BimodElem = LinComb::zero();
        for path in u.vertex_paths() {
            let sub = u.subtree(&path);
            let Tree::Node { gen, kids } = sub else { unreachable!() };
            let holed = replace_subtree(
                u,
                &path,
                &Tree::Hole { id: crate::treemono::CARVE_HOLE, kids: kids.clone() },
            );
            let ctx = Context { tree: holed, inner_arity: self.p.gens.get(*gen).arity };
            for (rctx, c) in self.reduce_context(&ctx)?.iter() {
                out.add_term((rctx.clone(), BimodGen::Gen(*gen)), c.clone());
            }
        }
        Ok(out)
    }

    fn derivation_term(&self, t: &Term) -> Result<BimodElem> {
        let mut out: BimodElem = LinComb::zero();
        for (m, c) in t.iter() {
            for (k, v) in self.derivation(m)?.iter() {
                out.add_term(k.clone(), v.clone() * c);
            }
        }
        Ok(out)
    }

    /// The bracket `[f]` of a cell: its top component with contexts
    /// reduced, mapped into the free bimodule on the top generators.
    fn bracket(&self, c: &Cell) -> Result<BimodElem> {
        let d = c.dim();
        let mut out: BimodElem = LinComb::zero();
        if d == 0 {
            return self.derivation_term(c.base());
        }
        for (cm, coef) in c.top(d).unwrap().iter() {
            for (rctx, rc) in self.reduce_context(&cm.ctx)?.iter() {
                out.add_term(
                    (rctx.clone(), BimodGen::Cell(cm.gen)),
                    coef.clone() * rc.clone(),
                );
            }
        }
        Ok(out)
    }

    /// δ_{-1} on a 0-generator: `(ε|x̄) - Σ_i (x̄|1̄···ε···1̄)`.
    pub fn delta_gen(&self, g: GenId) -> Result<BimodElem> {
        let k = self.p.gens.get(g).arity;
        let corolla = Tree::corolla(&self.p.gens, g);
        let mut out: BimodElem = LinComb::zero();
        let above = Context {
            tree: Tree::Hole { id: crate::treemono::CARVE_HOLE, kids: vec![corolla.clone()] },
            inner_arity: 1,
        };
        for (rctx, c) in self.reduce_context(&above)?.iter() {
            out.add_term((rctx.clone(), BimodGen::Eps), c.clone());
        }
        for i in 1..=k {
            let kids: Vec<Tree> = (1..=k)
                .map(|j| {
                    if j == i {
                        Tree::Hole { id: crate::treemono::CARVE_HOLE, kids: vec![Tree::Leaf(i)] }
                    } else {
                        Tree::Leaf(j)
                    }
                })
                .collect();
            let below = Context { tree: Tree::Node { gen: g, kids }, inner_arity: 1 };
            for (rctx, c) in self.reduce_context(&below)?.iter() {
                out.add_term((rctx.clone(), BimodGen::Eps), -c.clone());
            }
        }
        Ok(out)
    }

    /// Build the chain complex slices up to the dimension bound.
    pub fn chain_complex(&self, max_dim: usize) -> Result<ChainComplex<'_, 'a>> {
        let dims_list = self.overlappings_up_to(max_dim)?;
        let mut dims: Vec<Vec<ComplexGen>> = Vec::new();
        // dimension 0: the generators with the Fox-style augmentation
        let mut d0 = Vec::new();
        for g in self.p.gens.ids() {
            d0.push(ComplexGen {
                gen: BimodGen::Gen(g),
                name: format!("[{}]", self.p.gens.get(g).name),
                arity: self.p.gens.get(g).arity,
                weight: self.p.gens.get(g).weight,
                differential: self.delta_gen(g)?,
            });
        }
        dims.push(d0);
        for d in 1..dims_list.len() {
            let mut layer = Vec::new();
            for &idx in &dims_list[d] {
                let ov = self.overlapping(idx);
                let (s, t) = self.boundary_of(idx)?;
                let differential = if d == 1 {
                    // Fox differential: [s(α)] - [t(α)]
                    let bs = self.derivation_term(s.base())?;
                    let bt = self.derivation_term(t.base())?;
                    bs.sub(&bt)
                } else {
                    self.bracket(&s)?.sub(&self.bracket(&t)?)
                };
                let name = if d == 1 {
                    format!("[{}]", self.p.rules[ov.branches[0].1].name)
                } else {
                    format!("[{}:{}]", d, tree_to_string(&ov.source, &self.p.gens))
                };
                layer.push(ComplexGen {
                    gen: BimodGen::Cell(GenKey { dim: d, idx }),
                    name,
                    arity: ov.arity(),
                    weight: ov.graded_weight(self.p),
                    differential,
                });
            }
            dims.push(layer);
        }
        Ok(ChainComplex { resolver: self, dims })
    }
}

fn replace_subtree(t: &Tree, path: &[usize], repl: &Tree) -> Tree {
    if path.is_empty() {
        return repl.clone();
    }
    match t {
        Tree::Node { gen, kids } => {
            let mut kids = kids.clone();
            kids[path[0]] = replace_subtree(&kids[path[0]], &path[1..], repl);
            Tree::Node { gen: *gen, kids }
        }
        Tree::Hole { id, kids } => {
            let mut kids = kids.clone();
            kids[path[0]] = replace_subtree(&kids[path[0]], &path[1..], repl);
            Tree::Hole { id: *id, kids }
        }
        Tree::Leaf(_) => panic!("path descends through a leaf"),
    }
}

// ---------------------------------------------------------------------------
// Koszulness certificate
// ---------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct KoszulCertificate {
    pub quadratic: bool,
    pub reduced: bool,
    pub convergent: bool,
    pub termination: String,
    pub termination_is_proof: bool,
    /// Per computed dimension, the set of graded weights of the
    /// resolution generators.
    pub concentration: Vec<(usize, Vec<usize>)>,
    pub superdiagonal: bool,
    /// All differential coefficients lie in the augmentation ideal
    /// (nontrivial contexts), so the induced differential on `A ⊗ 𝕂`
    /// vanishes.
    pub minimal: Option<bool>,
    pub koszul: bool,
    pub max_dim: usize,
    pub max_weight: usize,
}

/// Check quadraticity, convergence and superdiagonal concentration of the
/// overlapping resolution, and emit Koszulness and minimality verdicts.
pub fn koszul_certificate(
    p: &Polygraph,
    evidence: &Evidence,
    max_dim: usize,
    max_weight: usize,
) -> Result<KoszulCertificate> {
    let quadratic = p.is_quadratic();
    let reduced = is_reduced_polygraph(p);
    let confluent = if reduced {
        check_confluence(p, evidence, ConfluenceScope::Critical, 0)?.confluent
    } else {
        let criticals = critical_branchings(p)?;
        criticals.iter().try_fold(true, |acc, b| -> Result<bool> {
            let lt = b.leg_target(p, &b.left)?;
            let rt = b.leg_target(p, &b.right)?;
            let l = normal_form(p, &lt, evidence, ReductionStrategy::LeastFirst)?;
            let r = normal_form(p, &rt, evidence, ReductionStrategy::LeastFirst)?;
            Ok(acc && l.normal_form == r.normal_form)
        })?
    };
    let convergent = confluent;
    let mut concentration = Vec::new();
    let mut superdiagonal = true;
    let mut minimal = None;
    if reduced && convergent {
        let resolver = Resolver::new(p, evidence, max_weight)?;
        let dims = resolver.overlappings_up_to(max_dim)?;
        // dimension 0: the generators
        let w0: BTreeSet<usize> = p.gens.ids().map(|g| p.gens.get(g).weight).collect();
        concentration.push((0, w0.iter().copied().collect::<Vec<_>>()));
        superdiagonal &= w0.iter().all(|&w| w == 1);
        for d in 1..dims.len() {
            let ws: BTreeSet<usize> = dims[d]
                .iter()
                .map(|&i| resolver.overlapping(i).graded_weight(p))
                .collect();
            superdiagonal &= ws.iter().all(|&w| w == d + 1);
            concentration.push((d, ws.iter().copied().collect::<Vec<_>>()));
        }
        // minimality: an increasing weight function over the computed dims
        // with every differential coefficient in the augmentation ideal
        let weights_increase = concentration
            .windows(2)
            .all(|w| match (w[0].1.len(), w[1].1.len()) {
                (_, 0) => true,
                (0, _) => true,
                _ => w[0].1.iter().max() < w[1].1.iter().min(),
            })
            && concentration.iter().all(|(_, ws)| ws.len() <= 1);
        if weights_increase {
            let complex = resolver.chain_complex(max_dim)?;
            let mut all_nontrivial = true;
            for layer in &complex.dims {
                for g in layer {
                    for ((ctx, _), _) in g.differential.iter() {
                        if ctx.weight() == 0 {
                            all_nontrivial = false;
                        }
                    }
                }
            }
            minimal = Some(all_nontrivial);
        }
    }
    let koszul = quadratic && reduced && convergent && superdiagonal;
    Ok(KoszulCertificate {
        quadratic,
        reduced,
        convergent,
        termination: evidence.describe().to_string(),
        termination_is_proof: evidence.is_proof(),
        concentration,
        superdiagonal,
        minimal,
        koszul,
        max_dim,
        max_weight,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;

    #[test]
    fn xyz_resolution_dims_empty() {
        let p = fixtures::xyz();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let dims = r.overlappings_up_to(4).unwrap();
        assert_eq!(dims[1].len(), 1);
        for d in 2..dims.len() {
            assert!(dims[d].is_empty(), "dimension {d} should be empty");
        }
    }

    #[test]
    fn aa_dim2_matches_critical_branchings() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let dims = r.overlappings_up_to(2).unwrap();
        assert_eq!(dims[1].len(), 3);
        assert_eq!(dims[2].len(), 15);
        // one-to-one with the critical branchings: compare source/branch sets
        let crits = critical_branchings(&p).unwrap();
        let mut from_ovs: BTreeSet<(Tree, BTreeSet<Path>, usize, BTreeSet<Path>, usize)> =
            BTreeSet::new();
        for &i in &dims[2] {
            let ov = r.overlapping(i);
            let b = &ov.branches;
            from_ovs.insert((
                ov.source.clone(),
                b[0].0.clone(),
                b[0].1,
                b[1].0.clone(),
                b[1].1,
            ));
        }
        let mut from_crits = BTreeSet::new();
        for b in &crits {
            from_crits.insert((
                b.source.clone(),
                b.left.occ.vertices.clone(),
                b.left.rule,
                b.right.occ.vertices.clone(),
                b.right.rule,
            ));
        }
        assert_eq!(from_ovs, from_crits);
    }

    #[test]
    fn aa_crown_graph_fanout() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let g = r.crown_graph(2).unwrap();
        // 3 weight-2 vertices fan out to 15 weight-3 vertices with
        // out-degrees 6, 6, 3
        assert_eq!(g.out_degree("x(x(1,2),3)"), 6);
        assert_eq!(g.out_degree("x(x(1,3),2)"), 6);
        assert_eq!(g.out_degree("x(1,x(2,3))"), 3);
        let dot = g.to_dot();
        assert!(dot.contains("digraph"));
    }

    #[test]
    fn sigma_laws_on_aa() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        // σ on a reduced term is an identity
        let red = Term::monomial(crate::polygraph::parse_monomial(&p.gens, "x(1,2)").unwrap());
        let s = r.contraction(&Cell::from_term(red.clone())).unwrap();
        assert!(s.is_identity());
        assert_eq!(s.source_at(0).base(), &red);
        // σ on a rule source is the 1-overlapping generator (single step)
        let src = Term::monomial(p.rules[0].source.clone());
        let s = r.contraction(&Cell::from_term(src.clone())).unwrap();
        assert_eq!(s.top(1).unwrap().len(), 1);
        let (cm, _) = s.top(1).unwrap().iter().next().unwrap();
        assert!(cm.ctx.is_trivial());
        assert_eq!(cm.gen, GenKey { dim: 1, idx: 0 });
        // contraction laws on all monomials of weight <= 4:
        // s(σ_a) = a and t(σ_a) = nf(a) at dimension 0
        let e = crate::treemono::MonoEnumerator::new(&p.gens);
        for w in 2..=4usize {
            for m in e.enumerate(w + 1, w).unwrap().iter() {
                let t = Term::monomial(m.clone());
                let s = r.contraction(&Cell::from_term(t.clone())).unwrap();
                assert_eq!(s.source_at(0).base(), &t);
                let target = s.target_once(&r).unwrap();
                let nf = normal_form(&p, &t, &ev, ReductionStrategy::LeastFirst).unwrap();
                assert_eq!(target.base(), &nf.normal_form);
            }
        }
    }

    #[test]
    fn sigma_higher_laws_on_aa() {
        // s(σ_a) = a - t(a) + σ_{t(a)} and t(σ_a) = σ_{s(a)} for 1-cells
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let m = crate::polygraph::parse_monomial(&p.gens, "x(x(x(1,2),3),4)").unwrap();
        for step in step_positions(&p, &m) {
            let mut top = LinComb::zero();
            top.add_term(
                CellMono { ctx: step.occ.context.clone(), gen: GenKey { dim: 1, idx: step.rule } },
                Rational::one(),
            );
            let a = Cell::one_cell(top, Term::monomial(m.clone()));
            let sa = r.sigma(&a).unwrap();
            let ta = a.target_once(&r).unwrap();
            let sta = r.sigma(&ta).unwrap();
            let expect_source =
                r.canon(&a.sub(&ta.lift_to(1)).unwrap().add(&sta).unwrap()).unwrap();
            assert_eq!(sa.source_at(1), expect_source);
            let sa_t = r.canon(&sa.target_once(&r).unwrap()).unwrap();
            let s_sa = r.sigma(&a.source_at(0)).unwrap();
            assert_eq!(sa_t, s_sa);
        }
    }

    #[test]
    fn generator_boundaries_globular() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let dims = r.overlappings_up_to(3).unwrap();
        assert!(!dims[3].is_empty());
        for d in 2..=3 {
            for &i in &dims[d] {
                let (s, t) = r.boundary_of(i).unwrap();
                assert_eq!(s.dim(), d - 1);
                assert_eq!(t.dim(), d - 1);
                // globularity, modulo the exchange relation
                assert_eq!(
                    r.canon(&s.source_at(d - 2)).unwrap(),
                    r.canon(&t.source_at(d - 2)).unwrap()
                );
                assert_eq!(
                    r.canon(&s.target_once(&r).unwrap()).unwrap(),
                    r.canon(&t.target_once(&r).unwrap()).unwrap()
                );
            }
        }
    }

    #[test]
    fn aa_generating_confluences_join() {
        // dim-2 boundaries: both legs reduce the shared source to 0
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let dims = r.overlappings_up_to(2).unwrap();
        for &i in &dims[2] {
            let ov = r.overlapping(i);
            let (s, t) = r.boundary_of(i).unwrap();
            assert_eq!(s.source_at(0).base(), &Term::monomial(ov.source.clone()));
            let s_end = r.canon(&s.target_once(&r).unwrap()).unwrap();
            let t_end = r.canon(&t.target_once(&r).unwrap()).unwrap();
            assert_eq!(s_end, t_end);
            assert!(s_end.base().is_zero());
        }
    }

    #[test]
    fn mono_fixture_superdiagonal_and_minimal() {
        let p = fixtures::mono();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 8).unwrap();
        let dims = r.overlappings_up_to(3).unwrap();
        for d in 1..=3 {
            assert!(!dims[d].is_empty(), "dimension {d} empty");
            for &i in &dims[d] {
                assert_eq!(r.overlapping(i).graded_weight(&p), 2 * d + 1);
            }
        }
        let cert = koszul_certificate(&p, &ev, 3, 8).unwrap();
        assert_eq!(cert.minimal, Some(true));
        assert!(!cert.quadratic);
    }

    #[test]
    fn chain_complex_d2_zero_on_fixtures() {
        for (p, w) in [
            (fixtures::aa(), 6),
            (fixtures::xyz(), 6),
            (fixtures::ka(), 6),
            (fixtures::mono(), 8),
        ] {
            let ev = Evidence::for_polygraph(&p).unwrap();
            let r = Resolver::new(&p, &ev, w).unwrap();
            let complex = r.chain_complex(3).unwrap();
            for (name, ok) in complex.check_d_squared().unwrap() {
                assert!(ok, "d² nonzero at {name}");
            }
        }
        // KO is not convergent (root-sharing overlaps), so the resolution
        // precondition rejects it
        let p = fixtures::ko();
        let ev = Evidence::for_polygraph(&p).unwrap();
        assert!(Resolver::new(&p, &ev, 6).is_err());
    }

    #[test]
    fn delta_minus_one_display() {
        // δ₋₁[x] для binary x: (ε|x̄) − (x̄|ε,1̄) − (x̄|1̄,ε)
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let r = Resolver::new(&p, &ev, 6).unwrap();
        let d = r.delta_gen(GenId(0)).unwrap();
        assert_eq!(d.len(), 3);
        let plus: Vec<_> = d.iter().filter(|(_, c)| **c == Rational::one()).collect();
        assert_eq!(plus.len(), 1);
    }

    #[test]
    fn koszul_verdicts() {
        // KO as transcribed is quadratic but not confluent: the
        // root-sharing critical pairs break joinability
        let p = fixtures::ko();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let cert = koszul_certificate(&p, &ev, 3, 6).unwrap();
        assert!(cert.quadratic);
        assert!(!cert.convergent);
        assert!(!cert.koszul);
        let p = fixtures::ka();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let cert = koszul_certificate(&p, &ev, 3, 6).unwrap();
        assert!(cert.koszul);
        // the ordered orientations are not even confluent
        let p = fixtures::ka_ordered();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let cert = koszul_certificate(&p, &ev, 3, 6).unwrap();
        assert!(!cert.convergent);
        assert!(!cert.koszul);
    }
}
