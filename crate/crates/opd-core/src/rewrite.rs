//! Monomial orders, rewriting steps, normal forms, and termination
//! evidence.
//!
//! The built-in order is the path-lexicographic order induced by a total
//! order on the generators: a monomial is compared through the sequence of
//! its root-to-input path words (degree first, then letterwise), tie-broken
//! by the planar permutation of its inputs. Extended to 1-monomials with
//! every rule symbol below every generator, the same order classifies
//! branches of branchings.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::sync::Mutex;

use crate::error::{Error, Result};
use num_traits::One;

use crate::linalg::{LinComb, Rational, Term};
use crate::polygraph::{Cell, CellMono, GenKey, Polygraph};
use crate::treemono::{
    find_occurrences, tree_to_string, GenId, GenTable, Occurrence, Tree,
};

/// Total order on generators inducing the path-lexicographic monomial
/// order. Stable by product; the property suite checks this on random
/// context plugs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathLexOrder {
    ranks: Vec<usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Lbl {
    Rule(usize),
    Gen(usize),
}

impl PathLexOrder {
    /// Generators ordered by declaration.
    pub fn declaration(table: &GenTable) -> Self {
        PathLexOrder { ranks: (0..table.len()).collect() }
    }

    /// Listed generators come first, in the given order `a ≺ b ≺ ...`;
    /// unlisted generators follow in declaration order.
    pub fn from_names(table: &GenTable, names: &[String]) -> Result<Self> {
        let mut ranks = vec![usize::MAX; table.len()];
        let mut next = 0usize;
        for n in names {
            let id = table
                .lookup(n)
                .ok_or_else(|| Error::InvalidInput(format!("unknown generator {n} in order")))?;
            if ranks[id.0 as usize] != usize::MAX {
                return Err(Error::InvalidInput(format!("generator {n} listed twice")));
            }
            ranks[id.0 as usize] = next;
            next += 1;
        }
        for r in ranks.iter_mut() {
            if *r == usize::MAX {
                *r = next;
                next += 1;
            }
        }
        Ok(PathLexOrder { ranks })
    }

    fn rank(&self, g: GenId) -> usize {
        self.ranks[g.0 as usize]
    }

    /// Path words indexed by input label, plus the planar permutation of
    /// the inputs. Holes are labeled by the given rule index.
    fn path_data(&self, t: &Tree, hole_rule: Option<usize>) -> (Vec<Vec<Lbl>>, Vec<usize>) {
        let mut words = vec![Vec::new(); t.arity()];
        let mut planar = Vec::new();
        let mut stack = Vec::new();
        self.walk(t, hole_rule, &mut stack, &mut words, &mut planar);
        (words, planar)
    }

    fn walk(
        &self,
        t: &Tree,
        hole_rule: Option<usize>,
        stack: &mut Vec<Lbl>,
        words: &mut [Vec<Lbl>],
        planar: &mut Vec<usize>,
    ) {
        match t {
            Tree::Leaf(l) => {
                words[*l - 1] = stack.clone();
                planar.push(*l);
            }
            Tree::Node { gen, kids } => {
                stack.push(Lbl::Gen(self.rank(*gen)));
                for k in kids {
                    self.walk(k, hole_rule, stack, words, planar);
                }
                stack.pop();
            }
            Tree::Hole { kids, .. } => {
                stack.push(Lbl::Rule(hole_rule.expect("hole in a plain monomial")));
                for k in kids {
                    self.walk(k, hole_rule, stack, words, planar);
                }
                stack.pop();
            }
        }
    }

    fn cmp_data(a: &(Vec<Vec<Lbl>>, Vec<usize>), b: &(Vec<Vec<Lbl>>, Vec<usize>)) -> Ordering {
        for (wa, wb) in a.0.iter().zip(b.0.iter()) {
            let c = wa.len().cmp(&wb.len()).then_with(|| wa.cmp(wb));
            if c != Ordering::Equal {
                return c;
            }
        }
        a.0.len().cmp(&b.0.len()).then_with(|| a.1.cmp(&b.1))
    }

    /// Compare two monomials of the same arity.
    pub fn cmp_mono(&self, a: &Tree, b: &Tree) -> Ordering {
        Self::cmp_data(&self.path_data(a, None), &self.path_data(b, None))
    }

    pub fn cmp_mono_checked(&self, a: &Tree, b: &Tree) -> Result<Ordering> {
        if a.arity() != b.arity() {
            return Err(Error::ArityMismatch(
                "path-lexicographic comparison needs equal arities".into(),
            ));
        }
        Ok(self.cmp_mono(a, b))
    }

    /// Compare two 1-monomials (rule applications in context), with every
    /// rule symbol ordered below every generator and rules ordered by
    /// index.
    pub fn cmp_step(&self, a: &StepRef, b: &StepRef) -> Ordering {
        let da = self.path_data(&a.occ.context.tree, Some(a.rule));
        let db = self.path_data(&b.occ.context.tree, Some(b.rule));
        Self::cmp_data(&da, &db)
            .then_with(|| a.rule.cmp(&b.rule))
            .then_with(|| a.occ.context.cmp(&b.occ.context))
    }
}

/// A rewriting-step position: a rule applied in a one-hole context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct StepRef {
    pub rule: usize,
    pub occ: Occurrence,
}

/// All step positions on a monomial: one per (rule, occurrence), rules in
/// declaration order, occurrences in pre-order.
pub fn step_positions(p: &Polygraph, mono: &Tree) -> Vec<StepRef> {
    step_positions_with(p, mono, crate::treemono::CARVE_HOLE)
}

/// As [`step_positions`], carving occurrences with an explicit hole id.
pub fn step_positions_with(p: &Polygraph, mono: &Tree, carve_id: u32) -> Vec<StepRef> {
    let mut out = Vec::new();
    if mono.is_trivial() {
        return out;
    }
    for (rule, r) in p.rules.iter().enumerate() {
        if let Ok(occs) = crate::treemono::find_occurrences_with(&r.source, mono, carve_id) {
            out.extend(occs.into_iter().map(|occ| StepRef { rule, occ }));
        }
    }
    out
}

pub fn is_reduced_mono(p: &Polygraph, mono: &Tree) -> bool {
    step_positions(p, mono).is_empty()
}

pub fn is_reduced_term(p: &Polygraph, t: &Term) -> bool {
    t.support().all(|m| is_reduced_mono(p, m))
}

/// All size-1 positive 1-cells with the given source: one per (support
/// monomial, rule, context), monomials ascending in the default path-lex
/// order.
pub fn rewriting_steps(p: &Polygraph, a: &Term, order: Option<&PathLexOrder>) -> Vec<Cell> {
    let default = PathLexOrder::declaration(&p.gens);
    let ord = order.unwrap_or(&default);
    let mut monos: Vec<&Tree> = a.support().collect();
    monos.sort_by(|x, y| ord.cmp_mono(x, y));
    let mut out = Vec::new();
    for m in monos {
        let coeff = a.coeff(m);
        for s in step_positions(p, m) {
            out.push(step_cell(a, &s, &coeff));
        }
    }
    out
}

fn step_cell(a: &Term, s: &StepRef, coeff: &Rational) -> Cell {
    let mut top = crate::linalg::LinComb::zero();
    top.add_term(
        CellMono { ctx: s.occ.context.clone(), gen: GenKey { dim: 1, idx: s.rule } },
        coeff.clone(),
    );
    Cell::one_cell(top, a.clone())
}

/// Apply one step to a term: `a - λu + λΓ[t(α)]`.
pub fn apply_step(p: &Polygraph, a: &Term, mono: &Tree, s: &StepRef) -> Result<Term> {
    let coeff = a.coeff(mono);
    if coeff == Rational::from_integer(0.into()) {
        return Err(Error::Precondition("step monomial not in the support".into()));
    }
    let mut out = a.clone();
    out.add_monomial(mono.clone(), -coeff.clone());
    for (v, c) in p.rules[s.rule].target.iter() {
        out.add_monomial(s.occ.context.plug(v)?, c * coeff.clone());
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Termination evidence
// ---------------------------------------------------------------------------

/// Feature of a linear weight certificate.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub enum PhiFeature {
    /// Number of vertices carrying the generator.
    Count(GenId),
    /// Number of vertices whose two children are, from left to right,
    /// vertices labeled by the two generators.
    ChildPair(GenId, GenId),
}

/// Parsed termination-evidence declaration.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum EvidenceSpec {
    /// Path-lexicographic order from the listed generators; must orient
    /// every rule.
    Order(Vec<String>),
    /// Runtime-monitored linear weight certificate.
    PhiLinear(Vec<(i64, PhiFeature)>),
    /// Derivation-height certificate: verified per reduced term by
    /// exhaustive acyclicity of its reachable one-step monomial graph.
    PhiHeight,
    /// Declared step bound.
    Fuel(u64),
}

impl EvidenceSpec {
    pub fn to_text(&self) -> String {
        match self {
            EvidenceSpec::Order(names) => format!("order {}", names.join(",")),
            EvidenceSpec::PhiHeight => "phi height".to_string(),
            EvidenceSpec::Fuel(n) => format!("fuel {n}"),
            EvidenceSpec::PhiLinear(_) => "phi <linear>".to_string(),
        }
    }

    /// Render with generator names resolved.
    pub fn to_text_with(&self, table: &GenTable) -> String {
        match self {
            EvidenceSpec::PhiLinear(terms) => {
                let body = terms
                    .iter()
                    .map(|(c, f)| {
                        let feat = match f {
                            PhiFeature::Count(g) => format!("count({})", table.get(*g).name),
                            PhiFeature::ChildPair(a, b) => format!(
                                "pair({},{})",
                                table.get(*a).name,
                                table.get(*b).name
                            ),
                        };
                        if *c == 1 {
                            feat
                        } else {
                            format!("{c}*{feat}")
                        }
                    })
                    .collect::<Vec<_>>()
                    .join(" + ");
                format!("phi {body}")
            }
            other => other.to_text(),
        }
    }
}

/// Validated termination evidence, ready to monitor reductions.
pub struct Evidence {
    pub spec: EvidenceSpec,
    pub order: Option<PathLexOrder>,
    height: Option<HeightState>,
}

struct HeightState {
    /// Monomials whose reachable one-step rewrite graph is known finite
    /// and acyclic.
    verified: Mutex<BTreeSet<Tree>>,
    node_budget: usize,
}

impl Evidence {
    pub fn from_spec(p: &Polygraph, spec: &EvidenceSpec) -> Result<Evidence> {
        let mut order = None;
        let mut height = None;
        match spec {
            EvidenceSpec::Order(names) => {
                let o = PathLexOrder::from_names(&p.gens, names)?;
                let report = check_order_compatibility(p, &o);
                if !report.compatible {
                    let bad = report
                        .per_rule
                        .iter()
                        .find(|r| !r.compatible)
                        .map(|r| r.rule.clone())
                        .unwrap_or_default();
                    return Err(Error::Precondition(format!(
                        "order is not compatible with rule {bad}; not valid termination evidence"
                    )));
                }
                order = Some(o);
            }
            EvidenceSpec::PhiLinear(_) => {}
            EvidenceSpec::PhiHeight => {
                height = Some(HeightState {
                    verified: Mutex::new(BTreeSet::new()),
                    node_budget: 2_000_000,
                });
            }
            EvidenceSpec::Fuel(_) => {}
        }
        Ok(Evidence { spec: spec.clone(), order, height })
    }

    /// The evidence declared by the polygraph, or a default fuel bound.
    pub fn for_polygraph(p: &Polygraph) -> Result<Evidence> {
        match &p.evidence {
            Some(spec) => Evidence::from_spec(p, spec),
            None => Evidence::from_spec(p, &EvidenceSpec::Fuel(100_000)),
        }
    }

    /// Order-compatible termination evidence from an explicit order.
    pub fn from_order(p: &Polygraph, order: &PathLexOrder) -> Result<Evidence> {
        let compat = check_order_compatibility(p, order);
        if !compat.compatible {
            return Err(Error::Precondition(
                "order is not compatible with the rules".into(),
            ));
        }
        Ok(Evidence { spec: EvidenceSpec::Order(Vec::new()), order: Some(order.clone()), height: None })
    }

    pub fn describe(&self) -> &'static str {
        match self.spec {
            EvidenceSpec::Order(_) => "proved by compatible monomial order",
            EvidenceSpec::PhiLinear(_) => "weight certificate monitored, not refuted",
            EvidenceSpec::PhiHeight => "verified by finite acyclic reachability",
            EvidenceSpec::Fuel(_) => "declared step bound only",
        }
    }

    /// True when the evidence proves termination of every reduction the
    /// engine performs (rather than merely bounding or monitoring them).
    pub fn is_proof(&self) -> bool {
        matches!(self.spec, EvidenceSpec::Order(_) | EvidenceSpec::PhiHeight)
    }
}

fn phi_value(terms: &[(i64, PhiFeature)], t: &Tree) -> i64 {
    fn count(t: &Tree, f: &PhiFeature) -> i64 {
        match t {
            Tree::Leaf(_) => 0,
            Tree::Hole { kids, .. } => kids.iter().map(|k| count(k, f)).sum(),
            Tree::Node { gen, kids } => {
                let here = match f {
                    PhiFeature::Count(g) => i64::from(gen == g),
                    PhiFeature::ChildPair(a, b) => {
                        let is_pair = kids.len() == 2
                            && matches!(&kids[0], Tree::Node { gen, .. } if gen == a)
                            && matches!(&kids[1], Tree::Node { gen, .. } if gen == b);
                        i64::from(is_pair)
                    }
                };
                here + kids.iter().map(|k| count(k, f)).sum::<i64>()
            }
        }
    }
    terms.iter().map(|(c, f)| c * count(t, f)).sum()
}

impl HeightState {
    /// Verify that the one-step monomial rewrite graph reachable from `t`
    /// is finite and acyclic; refute with a cycle witness otherwise.
    fn ensure(&self, p: &Polygraph, t: &Tree, table: &GenTable) -> Result<()> {
        if self.verified.lock().unwrap().contains(t) {
            return Ok(());
        }
        #[derive(PartialEq)]
        enum Color {
            Grey,
            Black,
        }
        let mut colors: std::collections::BTreeMap<Tree, Color> = Default::default();
        let mut explored = 0usize;
        // iterative DFS with explicit stack of (node, successors, cursor)
        let mut stack: Vec<(Tree, Vec<Tree>, usize)> = Vec::new();
        let succ = |m: &Tree| -> Result<Vec<Tree>> {
            let mut out = Vec::new();
            for s in step_positions(p, m) {
                for (v, _) in p.rules[s.rule].target.iter() {
                    out.push(s.occ.context.plug(v)?);
                }
            }
            out.sort();
            out.dedup();
            Ok(out)
        };
        colors.insert(t.clone(), Color::Grey);
        stack.push((t.clone(), succ(t)?, 0));
        while let Some((node, succs, cursor)) = stack.last_mut() {
            if *cursor >= succs.len() {
                colors.insert(node.clone(), Color::Black);
                self.verified.lock().unwrap().insert(node.clone());
                stack.pop();
                continue;
            }
            let next = succs[*cursor].clone();
            *cursor += 1;
            if self.verified.lock().unwrap().contains(&next) {
                continue;
            }
            match colors.get(&next) {
                Some(Color::Grey) => {
                    return Err(Error::CertificateRefuted {
                        witness: format!(
                            "rewriting cycle through {}",
                            tree_to_string(&next, table)
                        ),
                    });
                }
                Some(Color::Black) => continue,
                None => {
                    explored += 1;
                    if explored > self.node_budget {
                        return Err(Error::Budget(format!(
                            "reachability check exceeded {} monomials",
                            self.node_budget
                        )));
                    }
                    let s = succ(&next)?;
                    colors.insert(next.clone(), Color::Grey);
                    stack.push((next, s, 0));
                }
            }
        }
        Ok(())
    }
}

/// Deterministic reduction strategies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReductionStrategy {
    /// Rewrite the path-lex-least reducible monomial at its first context.
    LeastFirst,
    /// Rewrite the path-lex-greatest reducible monomial at its last context.
    GreatestLast,
}

#[derive(Debug, Clone)]
pub struct NormalFormResult {
    pub normal_form: Term,
    pub trace: Cell,
    pub steps: u64,
}

/// Reduce a term to its normal form under the given termination evidence,
/// returning the reduced term and the positive 1-cell traced out.
pub fn normal_form(
    p: &Polygraph,
    a: &Term,
    evidence: &Evidence,
    strategy: ReductionStrategy,
) -> Result<NormalFormResult> {
    let order = PathLexOrder::declaration(&p.gens);
    if let Some(h) = &evidence.height {
        for m in a.support() {
            h.ensure(p, m, &p.gens)?;
        }
    }
    let fuel = match evidence.spec {
        EvidenceSpec::Fuel(n) => Some(n),
        _ => None,
    };
    let mut term = a.clone();
    let mut trace_top = crate::linalg::LinComb::zero();
    let mut steps: u64 = 0;
    loop {
        let mut reducible: Vec<&Tree> =
            term.support().filter(|m| !is_reduced_mono(p, m)).collect();
        if reducible.is_empty() {
            break;
        }
        reducible.sort_by(|x, y| order.cmp_mono(x, y));
        let mono = match strategy {
            ReductionStrategy::LeastFirst => reducible[0].clone(),
            ReductionStrategy::GreatestLast => reducible[reducible.len() - 1].clone(),
        };
        let positions = step_positions(p, &mono);
        let s = match strategy {
            ReductionStrategy::LeastFirst => positions.first().unwrap().clone(),
            ReductionStrategy::GreatestLast => positions.last().unwrap().clone(),
        };
        if let EvidenceSpec::PhiLinear(phi) = &evidence.spec {
            let before = phi_value(phi, &mono);
            if before < 0 {
                return Err(Error::CertificateRefuted {
                    witness: format!(
                        "phi({}) = {before} is negative",
                        tree_to_string(&mono, &p.gens)
                    ),
                });
            }
            for (v, _) in p.rules[s.rule].target.iter() {
                let plugged = s.occ.context.plug(v)?;
                let after = phi_value(phi, &plugged);
                if after >= before || after < 0 {
                    return Err(Error::CertificateRefuted {
                        witness: format!(
                            "step {} -> {} does not decrease phi ({before} -> {after})",
                            tree_to_string(&mono, &p.gens),
                            tree_to_string(&plugged, &p.gens),
                        ),
                    });
                }
            }
        }
        let coeff = term.coeff(&mono);
        term = apply_step(p, &term, &mono, &s)?;
        trace_top.add_term(
            CellMono { ctx: s.occ.context.clone(), gen: GenKey { dim: 1, idx: s.rule } },
            coeff,
        );
        steps += 1;
        if let Some(f) = fuel {
            if steps > f {
                return Err(Error::FuelExhausted { steps });
            }
        }
    }
    let trace = Cell::one_cell(trace_top, a.clone());
    Ok(NormalFormResult { normal_form: term, trace, steps })
}

// ---------------------------------------------------------------------------
// Exchange-canonical form of cells
// ---------------------------------------------------------------------------

/// Canonical representative of a cell modulo the linear exchange relation.
///
/// A `d`-monomial whose context carries a redex disjoint from the generator
/// slot participates in an exchange square; adding the corresponding
/// coboundary `μ↓ - μ↑` eliminates it. Dimension-1 monomials are rewritten
/// only towards the smaller branch of the square (the generator slot must
/// be the least redex), which terminates by the multiset extension of the
/// rewrite order; higher tops are rewritten until their context
/// coordinates are reduced.
pub fn canonicalize_cell(
    p: &Polygraph,
    order: &PathLexOrder,
    space: &impl crate::polygraph::CellSpace,
    c: &Cell,
) -> Result<Cell> {
    let mut c = c.clone();
    for d in (1..=c.dim()).rev() {
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > 200_000 {
                return Err(Error::Budget("exchange canonicalization exceeded 2*10^5 rewrites".into()));
            }
            let Some(top) = c.top(d) else { break };
            let mut pick: Option<(CellMono, Rational, StepRef)> = None;
            'outer: for (cm, coef) in top.iter() {
                let redexes =
                    step_positions_with(p, &cm.ctx.tree, crate::treemono::EXCH_HOLE);
                if d >= 2 {
                    if let Some(s) = redexes.into_iter().next() {
                        pick = Some((cm.clone(), coef.clone(), s));
                        break 'outer;
                    }
                } else {
                    let mut best: Option<(StepRef, StepRef)> = None;
                    for s in redexes {
                        let partner = exchange_partner(p, cm, &s)?;
                        if order.cmp_step(&partner, &slot_step(cm)) == std::cmp::Ordering::Less
                        {
                            match &best {
                                Some((b, _)) if order.cmp_step(&partner, b)
                                    != std::cmp::Ordering::Less => {}
                                _ => best = Some((partner, s)),
                            }
                        }
                    }
                    if let Some((_, s)) = best {
                        pick = Some((cm.clone(), coef.clone(), s));
                        break 'outer;
                    }
                }
            }
            let Some((cm, coef, s)) = pick else { break };
            let cob = exchange_coboundary(p, space, &cm, &s)?;
            c = c.add(&cob.scale(&coef))?;
        }
    }
    Ok(c)
}

/// The generator slot of a 1-monomial viewed as a rewriting step on its
/// source, for path-lexicographic comparison against coordinate redexes.
fn slot_step(cm: &CellMono) -> StepRef {
    StepRef {
        rule: cm.gen.idx,
        occ: crate::treemono::Occurrence {
            context: cm.ctx.clone(),
            vertices: std::collections::BTreeSet::new(),
        },
    }
}

/// The other branch of the exchange square of a dimension-1 monomial and a
/// coordinate redex: the coordinate rule applied with the slot holding the
/// generator's source.
fn exchange_partner(p: &Polygraph, cm: &CellMono, s: &StepRef) -> Result<StepRef> {
    let source = &p.rules[cm.gen.idx].source;
    let d_tree = &s.occ.context.tree; // slot hole + EXCH hole
    let plugged = d_tree.plug(crate::treemono::CARVE_HOLE, source);
    let tree = crate::treemono::relabel_hole(&plugged, crate::treemono::EXCH_HOLE, crate::treemono::CARVE_HOLE);
    Ok(StepRef {
        rule: s.rule,
        occ: crate::treemono::Occurrence {
            context: crate::treemono::Context {
                tree,
                inner_arity: p.rules[s.rule].source.arity(),
            },
            vertices: std::collections::BTreeSet::new(),
        },
    })
}

/// The exchange coboundary `μ↓ - μ↑` of a top monomial and a coordinate
/// redex; adding it to a cell eliminates the monomial without changing the
/// cell's class.
fn exchange_coboundary(
    p: &Polygraph,
    space: &impl crate::polygraph::CellSpace,
    cm: &CellMono,
    s: &StepRef,
) -> Result<Cell> {
    use crate::treemono::{relabel_hole, Context, CARVE_HOLE, EXCH_HOLE};
    let d = cm.gen.dim;
    let beta = s.rule;
    let s_beta = &p.rules[beta].source;
    let t_beta = &p.rules[beta].target;
    let d_tree = &s.occ.context.tree;
    // local 0-source and 0-target of the generator in the slot
    let (bnd_s, _) = space.boundary(cm.gen)?;
    let s_gen_term = bnd_s.source_at(0).base().clone();
    let bare = Cell::from_parts(
        bnd_s.clone(),
        LinComb::singleton(CellMono {
            ctx: Context::trivial(s_gen_term.support().next().expect("monomial source").arity()),
            gen: cm.gen,
        }),
    );
    let t_gen_term = bare.target_at(0, space)?.base().clone();
    let s_gen = s_gen_term.support().next().expect("monomial source").clone();

    // β-step whisker with the slot holding a 0-term
    let beta_whisker = |slot: &Term| -> Result<Cell> {
        let mut acc = Cell::identity_of(&Cell::from_term(Term::zero(d_tree.arity())));
        for (u, cu) in slot.iter() {
            let tree = relabel_hole(&d_tree.plug(CARVE_HOLE, u), EXCH_HOLE, CARVE_HOLE);
            let ctx = Context { tree, inner_arity: s_beta.arity() };
            let base = Term::monomial(ctx.plug(s_beta)?);
            let mut top = LinComb::zero();
            top.add_term(CellMono { ctx, gen: GenKey { dim: 1, idx: beta } }, Rational::one());
            acc = acc.add(&Cell::one_cell(top, base).scale(cu))?;
        }
        Ok(acc)
    };
    // generator monomial with the β-region holding a 0-monomial
    let gen_mono = |v: &Tree| -> Result<Cell> {
        let ctx = Context { tree: d_tree.plug(EXCH_HOLE, v), inner_arity: cm.ctx.inner_arity };
        let lower = bnd_s.apply_context(&ctx)?;
        let mut top = LinComb::zero();
        top.add_term(CellMono { ctx, gen: cm.gen }, Rational::one());
        Ok(Cell::from_parts(lower, top))
    };
    // identity on a fully plugged 0-term
    let corner = |slot: &Term, b: &Term| -> Result<Cell> {
        let mut out = Term::zero(d_tree.arity());
        for (u, cu) in slot.iter() {
            let once = d_tree.plug(CARVE_HOLE, u);
            for (v, cv) in b.iter() {
                out.add_monomial(once.plug(EXCH_HOLE, v), cu * cv);
            }
        }
        Ok(Cell::from_term(out))
    };

    let m_cell = gen_mono(s_beta)?;
    let s_beta_term = Term::monomial(s_beta.clone());
    // μ↑ = M + (t₀(A) ⊙ β) - 1_{[t₀(A), s(β)]}
    let mu_up = m_cell
        .add(&beta_whisker(&t_gen_term)?)?
        .sub(&corner(&t_gen_term, &s_beta_term)?.lift_to(d))?;
    // μ↓ = (s₀(A) ⊙ β) + Σ d_v M_v - 1_{[s₀(A), t(β)]}
    let mut mv_sum = Cell::identity_of(&Cell::from_term(Term::zero(d_tree.arity()))).lift_to(d);
    for (v, dv) in t_beta.iter() {
        mv_sum = mv_sum.add(&gen_mono(v)?.scale(dv))?;
    }
    let mu_down = beta_whisker(&Term::monomial(s_gen))?
        .add(&mv_sum)?
        .sub(&corner(&s_gen_term, t_beta)?.lift_to(d))?;
    mu_down.sub(&mu_up)
}

/// Decide equality of two cells modulo the linear exchange relation, by
/// testing whether their difference lies in the span of the exchange
/// coboundaries over the downward-closed universe of source monomials.
pub fn cells_exchange_equal(
    p: &Polygraph,
    space: &impl crate::polygraph::CellSpace,
    a: &Cell,
    b: &Cell,
    ignore_base: bool,
) -> Result<bool> {
    let mut diff = a.sub(b)?;
    if ignore_base {
        diff = zero_base(&diff);
    }
    if diff.is_trivial() && diff.base().is_zero() {
        return Ok(true);
    }
    let max_dim = diff.dim();
    // universe of source monomials and the generators in play
    let mut sources: BTreeSet<Tree> = BTreeSet::new();
    let mut gens: BTreeSet<GenKey> = BTreeSet::new();
    for d in 1..=max_dim {
        for (cm, _) in diff.top(d).into_iter().flat_map(|t| t.iter()) {
            gens.insert(cm.gen);
            let src = gen_source_monomial(space, cm.gen)?;
            sources.insert(cm.ctx.plug(&src)?);
        }
    }
    for i in 0..p.rules.len() {
        gens.insert(GenKey { dim: 1, idx: i });
    }
    // close downward under one-step rewriting
    let mut work: Vec<Tree> = sources.iter().cloned().collect();
    while let Some(m) = work.pop() {
        if sources.len() > 4000 {
            return Err(Error::Budget("exchange-equality universe exceeded 4000 monomials".into()));
        }
        for s in step_positions(p, &m) {
            for (v, _) in p.rules[s.rule].target.iter() {
                let next = s.occ.context.plug(v)?;
                if sources.insert(next.clone()) {
                    work.push(next);
                }
            }
        }
    }
    // all exchange coboundaries over the universe
    let mut vectors: Vec<LinComb<FlatKey>> = Vec::new();
    for m in &sources {
        for g in &gens {
            let src = gen_source_monomial(space, *g)?;
            if src.weight() > m.weight() {
                continue;
            }
            for occ in crate::treemono::find_occurrences(&src, m)? {
                let cm = CellMono { ctx: occ.context, gen: *g };
                for redex in
                    step_positions_with(p, &cm.ctx.tree, crate::treemono::EXCH_HOLE)
                {
                    let mut cob = exchange_coboundary(p, space, &cm, &redex)?;
                    if ignore_base {
                        cob = zero_base(&cob);
                    }
                    vectors.push(flatten_cell(&cob));
                }
            }
        }
    }
    let target = flatten_cell(&diff);
    Ok(in_span(&vectors, &target))
}

fn zero_base(c: &Cell) -> Cell {
    let mut out = Cell::from_term(Term::zero(c.arity()));
    for d in 1..=c.dim() {
        let top = c.top(d).cloned().unwrap_or_else(LinComb::zero);
        out = Cell::from_parts(out, top);
    }
    out
}

fn gen_source_monomial(
    space: &impl crate::polygraph::CellSpace,
    g: GenKey,
) -> Result<Tree> {
    let (s, _) = space.boundary(g)?;
    s.source_at(0)
        .base()
        .support()
        .next()
        .cloned()
        .ok_or_else(|| Error::Precondition("generator with empty source".into()))
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
enum FlatKey {
    Top(usize, CellMono),
    Base(Tree),
}

fn flatten_cell(c: &Cell) -> LinComb<FlatKey> {
    let mut out = LinComb::zero();
    for d in 1..=c.dim() {
        if let Some(top) = c.top(d) {
            for (cm, coef) in top.iter() {
                out.add_term(FlatKey::Top(d, cm.clone()), coef.clone());
            }
        }
    }
    for (m, coef) in c.base().iter() {
        out.add_term(FlatKey::Base(m.clone()), coef.clone());
    }
    out
}

fn in_span(vectors: &[LinComb<FlatKey>], target: &LinComb<FlatKey>) -> bool {
    let mut keys: BTreeSet<&FlatKey> = BTreeSet::new();
    for v in vectors {
        keys.extend(v.keys());
    }
    keys.extend(target.keys());
    let index: std::collections::BTreeMap<&FlatKey, usize> =
        keys.iter().enumerate().map(|(i, k)| (*k, i)).collect();
    let to_row = |v: &LinComb<FlatKey>| {
        let mut row = vec![Rational::from_integer(0.into()); index.len()];
        for (k, c) in v.iter() {
            row[index[k]] = c.clone();
        }
        row
    };
    let mut rows: Vec<Vec<Rational>> = vectors.iter().map(to_row).collect();
    let base_rank = crate::linalg::row_echelon_rank(&mut rows.clone());
    rows.push(to_row(target));
    let with_target = crate::linalg::row_echelon_rank(&mut rows);
    base_rank == with_target
}

/// Per-rule order-compatibility report.
#[derive(Debug, Clone)]
pub struct OrderCompatReport {
    pub per_rule: Vec<RuleVerdict>,
    pub compatible: bool,
    pub terminating: bool,
}

#[derive(Debug, Clone)]
pub struct RuleVerdict {
    pub rule: String,
    pub compatible: bool,
    pub offending_monomial: Option<String>,
}

/// Check that every rule strictly decreases under the order; compatibility
/// of a well-founded monomial order proves termination.
pub fn check_order_compatibility(p: &Polygraph, order: &PathLexOrder) -> OrderCompatReport {
    let per_rule: Vec<RuleVerdict> = p
        .rules
        .iter()
        .map(|r| {
            let offending = r
                .target
                .support()
                .find(|m| order.cmp_mono(m, &r.source) != Ordering::Less);
            RuleVerdict {
                rule: r.name.clone(),
                compatible: offending.is_none(),
                offending_monomial: offending.map(|m| tree_to_string(m, &p.gens)),
            }
        })
        .collect();
    let compatible = per_rule.iter().all(|r| r.compatible);
    OrderCompatReport { per_rule, compatible, terminating: compatible }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::polygraph::parse_polygraph;
    use crate::treemono::MonoEnumerator;

    #[test]
    fn path_lex_examples() {
        let p = fixtures::aa();
        let ord = PathLexOrder::declaration(&p.gens);
        let e = MonoEnumerator::new(&p.gens);
        let m3 = e.enumerate(3, 2).unwrap();
        // x(x(1,2),3) vs x(1,x(2,3)): (xx,xx,x) vs (x,xx,xx)
        let comb = parse_mono(&p, "x(x(1,2),3)");
        let right = parse_mono(&p, "x(1,x(2,3))");
        assert_eq!(ord.cmp_mono(&comb, &comb), Ordering::Equal);
        assert_eq!(ord.cmp_mono(&right, &comb), Ordering::Less);
        assert_eq!(m3.len(), 3);
        // the 15 arity-4 monomials sort totally with no ties
        let m4 = e.enumerate(4, 3).unwrap();
        for a in m4.iter() {
            for b in m4.iter() {
                let c = ord.cmp_mono(a, b);
                assert_eq!(c == Ordering::Equal, a == b);
                assert_eq!(c, ord.cmp_mono(b, a).reverse());
            }
        }
    }

    fn parse_mono(p: &Polygraph, s: &str) -> Tree {
        crate::polygraph::parse_monomial(&p.gens, s).unwrap()
    }

    #[test]
    fn steps_on_aa() {
        let p = fixtures::aa();
        // x(x(x(1,2),3),4) has exactly two redexes, both of rule r1
        let m = parse_mono(&p, "x(x(x(1,2),3),4)");
        let steps = step_positions(&p, &m);
        assert_eq!(steps.len(), 2);
        assert!(steps.iter().all(|s| s.rule == 0));
        let cells = rewriting_steps(&p, &Term::monomial(m), None);
        assert_eq!(cells.len(), 2);
        // reduced monomial: no steps
        let x = parse_mono(&p, "x(1,2)");
        assert!(rewriting_steps(&p, &Term::monomial(x), None).is_empty());
    }

    #[test]
    fn xyz_single_step_and_reduced_target() {
        let p = fixtures::xyz();
        let src = Term::monomial(p.rules[0].source.clone());
        let cells = rewriting_steps(&p, &src, None);
        assert_eq!(cells.len(), 1);
        assert!(is_reduced_term(&p, &p.rules[0].target));
    }

    #[test]
    fn aa_all_arity4_reduce_to_zero() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let e = MonoEnumerator::new(&p.gens);
        for m in e.enumerate(4, 3).unwrap().iter() {
            let nf = normal_form(&p, &Term::monomial(m.clone()), &ev, ReductionStrategy::LeastFirst)
                .unwrap();
            assert!(nf.normal_form.is_zero());
        }
    }

    #[test]
    fn xyz_phi_monitor_accepts() {
        let p = fixtures::xyz();
        let ev = Evidence::for_polygraph(&p).unwrap();
        assert!(matches!(ev.spec, EvidenceSpec::PhiLinear(_)));
        let src = Term::monomial(p.rules[0].source.clone());
        let nf = normal_form(&p, &src, &ev, ReductionStrategy::LeastFirst).unwrap();
        assert_eq!(nf.normal_form, p.rules[0].target);
        assert_eq!(nf.steps, 1);
    }

    #[test]
    fn order_compatibility_fixtures() {
        // AA with any path-lex: compatible (targets are zero)
        let p = fixtures::aa();
        let ord = PathLexOrder::declaration(&p.gens);
        assert!(check_order_compatibility(&p, &ord).compatible);
        // XYZ with x<y<z: incompatible
        let p = fixtures::xyz();
        let ord = PathLexOrder::declaration(&p.gens);
        let rep = check_order_compatibility(&p, &ord);
        assert!(!rep.compatible);
        // KA-ordered is compatible with w<x<y<z
        let p = fixtures::ka_ordered();
        let ord = PathLexOrder::from_names(
            &p.gens,
            &["w".into(), "x".into(), "y".into(), "z".into()],
        )
        .unwrap();
        assert!(check_order_compatibility(&p, &ord).compatible);
        // plain KA admits no compatible order for any listing of w,x,y,z
        let p = fixtures::ka();
        use itertools::Itertools;
        for perm in ["w", "x", "y", "z"].iter().permutations(4) {
            let names: Vec<String> = perm.iter().map(|s| s.to_string()).collect();
            let ord = PathLexOrder::from_names(&p.gens, &names).unwrap();
            assert!(!check_order_compatibility(&p, &ord).compatible);
        }
    }

    #[test]
    fn height_evidence_on_ka() {
        let p = fixtures::ka();
        let ev = Evidence::for_polygraph(&p).unwrap();
        // w x x x -> w w w w
        let m = parse_mono(&p, "w(x(x(x(1))))");
        let nf = normal_form(&p, &Term::monomial(m), &ev, ReductionStrategy::LeastFirst).unwrap();
        assert_eq!(nf.normal_form.to_text(&p.gens), "w(w(w(w(1))))");
    }

    #[test]
    fn height_evidence_refutes_a_loop() {
        let text = "gens: a:1 b:1\nrule r1: a(b(1)) -> b(a(1))\nrule r2: b(a(1)) -> a(b(1))\nevidence: phi height\n";
        let p = parse_polygraph(text).unwrap();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let m = crate::polygraph::parse_monomial(&p.gens, "a(b(1))").unwrap();
        let err = normal_form(&p, &Term::monomial(m), &ev, ReductionStrategy::LeastFirst)
            .unwrap_err();
        assert!(matches!(err, Error::CertificateRefuted { .. }), "{err}");
    }

    #[test]
    fn fuel_exhaustion() {
        let p = fixtures::aa();
        let ev = Evidence::from_spec(&p, &EvidenceSpec::Fuel(0)).unwrap();
        let m = parse_mono(&p, "x(x(1,2),3)");
        let err = normal_form(&p, &Term::monomial(m), &ev, ReductionStrategy::LeastFirst)
            .unwrap_err();
        assert!(matches!(err, Error::FuelExhausted { .. }));
    }

    #[test]
    fn normal_form_idempotent_and_strategy_independent() {
        let p = fixtures::aa();
        let ev = Evidence::for_polygraph(&p).unwrap();
        let e = MonoEnumerator::new(&p.gens);
        for w in 2..=4usize {
            for m in e.enumerate(w + 1, w).unwrap().iter() {
                let t = Term::monomial(m.clone());
                let a = normal_form(&p, &t, &ev, ReductionStrategy::LeastFirst).unwrap();
                let b = normal_form(&p, &t, &ev, ReductionStrategy::GreatestLast).unwrap();
                assert_eq!(a.normal_form, b.normal_form);
                let again =
                    normal_form(&p, &a.normal_form, &ev, ReductionStrategy::LeastFirst).unwrap();
                assert_eq!(again.normal_form, a.normal_form);
                assert_eq!(again.steps, 0);
            }
        }
    }
}
