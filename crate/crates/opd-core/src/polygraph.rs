//! Shuffle 1-polygraphs (presentations) and the canonical recursive cell
//! representation.
//!
//! An `n`-cell is stored as its abelianized data: one linear combination of
//! `d`-monomials per dimension `d = 1..=n` plus a base term. This quotient
//! by the linear exchange relation is faithful, makes `⋆_k`-composition a
//! plain sum, and leaves targets derived rather than stored.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::One;

use crate::error::{Error, Result};
use crate::linalg::{LinComb, Rational, Term};
use crate::rewrite::{normal_form, EvidenceSpec, PhiFeature, ReductionStrategy};
use crate::treemono::{tree_to_string, Arity, Context, GenTable, Tree};

/// A left-monomial rewriting rule: a nontrivial monomial source and a term
/// target of the same arity not containing the source in its support.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Rule {
    pub name: String,
    pub source: Tree,
    pub target: Term,
}

/// A presentation: generator table plus named left-monomial rules, with an
/// optional declared termination evidence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Polygraph {
    pub gens: GenTable,
    pub rules: Vec<Rule>,
    pub evidence: Option<EvidenceSpec>,
}

impl Polygraph {
    pub fn new(gens: GenTable, rules: Vec<Rule>) -> Result<Self> {
        let p = Polygraph { gens, rules, evidence: None };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        let mut names = BTreeMap::new();
        for (i, r) in self.rules.iter().enumerate() {
            if let Some(_prev) = names.insert(r.name.clone(), i) {
                return Err(Error::InvalidInput(format!("duplicate rule name {}", r.name)));
            }
            r.source.validate(&self.gens)?;
            if r.source.is_trivial() {
                return Err(Error::InvalidInput(format!(
                    "rule {} has the trivial monomial as source",
                    r.name
                )));
            }
            for m in r.target.support() {
                m.validate(&self.gens)?;
            }
            if r.target.arity() != r.source.arity() {
                return Err(Error::ArityMismatch(format!(
                    "rule {}: source arity {} vs target arity {}",
                    r.name,
                    r.source.arity(),
                    r.target.arity()
                )));
            }
            if r.target.support().any(|m| m == &r.source) {
                return Err(Error::InvalidInput(format!(
                    "rule {} is not left-monomial: source appears in the target support",
                    r.name
                )));
            }
        }
        Ok(())
    }

    /// True if every rule is weight-homogeneous (each target monomial has
    /// the graded weight of the source).
    pub fn is_weight_homogeneous(&self) -> bool {
        self.rules.iter().all(|r| {
            let w = r.source.graded_weight(&self.gens);
            r.target.support().all(|m| m.graded_weight(&self.gens) == w)
        })
    }

    /// Quadratic: generators concentrated in weight 1, rules in weight 2.
    pub fn is_quadratic(&self) -> bool {
        self.gens.ids().all(|g| self.gens.get(g).weight == 1)
            && self.rules.iter().all(|r| {
                r.source.graded_weight(&self.gens) == 2
                    && r.target.support().all(|m| m.graded_weight(&self.gens) == 2)
            })
    }

    pub fn rule_by_name(&self, name: &str) -> Option<(usize, &Rule)> {
        self.rules.iter().enumerate().find(|(_, r)| r.name == name)
    }

    pub fn max_rule_weight(&self) -> usize {
        self.rules.iter().map(|r| r.source.weight()).max().unwrap_or(0)
    }

    /// Boundary `s(α) − t(α)` of a rule.
    pub fn boundary_of(&self, rule: usize) -> Term {
        let r = &self.rules[rule];
        Term::monomial(r.source.clone()).sub(&r.target).expect("same arity")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("gens:");
        for g in self.gens.ids() {
            let gen = self.gens.get(g);
            if gen.weight == 1 {
                write!(out, " {}:{}", gen.name, gen.arity).unwrap();
            } else {
                write!(out, " {}:{}@{}", gen.name, gen.arity, gen.weight).unwrap();
            }
        }
        out.push('\n');
        for r in &self.rules {
            writeln!(
                out,
                "rule {}: {} -> {}",
                r.name,
                tree_to_string(&r.source, &self.gens),
                r.target.to_text(&self.gens)
            )
            .unwrap();
        }
        if let Some(ev) = &self.evidence {
            writeln!(out, "evidence: {}", ev.to_text()).unwrap();
        }
        out
    }
}

/// Identifies a generating cell: dimension 1 indexes a rule, dimensions
/// `>= 2` index an overlapping in a resolution session.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct GenKey {
    pub dim: usize,
    pub idx: usize,
}

/// A `d`-monomial: a generating cell in a one-hole context.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CellMono {
    pub ctx: Context,
    pub gen: GenKey,
}

/// Supplies boundaries of generating cells so that targets of cells can be
/// derived. Rules live at dimension 1; a resolution extends this to higher
/// dimensions.
pub trait CellSpace {
    /// Source and target `(d-1)`-cells of a dimension-`d` generator.
    fn boundary(&self, g: GenKey) -> Result<(Cell, Cell)>;
}

impl CellSpace for Polygraph {
    fn boundary(&self, g: GenKey) -> Result<(Cell, Cell)> {
        if g.dim != 1 || g.idx >= self.rules.len() {
            return Err(Error::InvalidInput(format!(
                "polygraph has no generating {}-cell #{}",
                g.dim, g.idx
            )));
        }
        let r = &self.rules[g.idx];
        Ok((Cell::from_term(Term::monomial(r.source.clone())), Cell::from_term(r.target.clone())))
    }
}

/// Canonical recursive cell: top components per dimension plus the base
/// term. A cell with empty top component at its dimension is the identity
/// of its source.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Cell {
    tops: Vec<LinComb<CellMono>>,
    base: Term,
}

impl Cell {
    pub fn from_term(t: Term) -> Cell {
        Cell { tops: Vec::new(), base: t }
    }

    pub fn dim(&self) -> usize {
        self.tops.len()
    }

    pub fn arity(&self) -> Arity {
        self.base.arity()
    }

    pub fn base(&self) -> &Term {
        &self.base
    }

    pub fn top(&self, d: usize) -> Option<&LinComb<CellMono>> {
        if d == 0 || d > self.dim() {
            None
        } else {
            Some(&self.tops[d - 1])
        }
    }

    /// The cell is an identity (possibly iterated) of a lower cell.
    pub fn is_identity(&self) -> bool {
        self.dim() > 0 && self.tops[self.dim() - 1].is_zero()
    }

    /// All top components vanish: the cell is an iterated identity of its
    /// base term.
    pub fn is_trivial(&self) -> bool {
        self.tops.iter().all(|t| t.is_zero())
    }

    pub fn identity_of(c: &Cell) -> Cell {
        let mut out = c.clone();
        out.tops.push(LinComb::zero());
        out
    }

    /// A `(dim+1)`-cell from its source cell and top component.
    pub fn from_parts(lower: Cell, top: LinComb<CellMono>) -> Cell {
        let mut out = lower;
        out.tops.push(top);
        out
    }

    /// A 1-cell from its top component and source term.
    pub fn one_cell(top: LinComb<CellMono>, source: Term) -> Cell {
        Cell { tops: vec![top], base: source }
    }


    pub fn lift_to(&self, dim: usize) -> Cell {
        let mut out = self.clone();
        while out.dim() < dim {
            out.tops.push(LinComb::zero());
        }
        out
    }

    /// `k`-source: forget all data above dimension `k`.
    pub fn source_at(&self, k: usize) -> Cell {
        debug_assert!(k <= self.dim());
        Cell { tops: self.tops[..k].to_vec(), base: self.base.clone() }
    }

    /// One-step target: the `(dim-1)`-cell obtained by pushing the top
    /// component through the generator boundaries.
    pub fn target_once(&self, space: &impl CellSpace) -> Result<Cell> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Precondition("a 0-cell has no target".into()));
        }
        let mut out = self.source_at(d - 1);
        for (cm, coef) in self.tops[d - 1].iter() {
            let (s, t) = space.boundary(cm.gen)?;
            let s_ctx = s.apply_context(&cm.ctx)?;
            let t_ctx = t.apply_context(&cm.ctx)?;
            out = out.add(&t_ctx.scale(coef))?.sub(&s_ctx.scale(coef))?;
        }
        Ok(out)
    }

    pub fn target_at(&self, k: usize, space: &impl CellSpace) -> Result<Cell> {
        if k > self.dim() {
            return Err(Error::Precondition(format!(
                "target dimension {k} above cell dimension {}",
                self.dim()
            )));
        }
        let mut c = self.clone();
        while c.dim() > k {
            c = c.target_once(space)?;
        }
        Ok(c)
    }

    pub fn add(&self, other: &Cell) -> Result<Cell> {
        if self.base.arity() != other.base.arity() {
            return Err(Error::ArityMismatch("cell addition across arities".into()));
        }
        let d = self.dim().max(other.dim());
        let a = self.lift_to(d);
        let b = other.lift_to(d);
        Ok(Cell {
            tops: a.tops.iter().zip(b.tops.iter()).map(|(x, y)| x.add(y)).collect(),
            base: a.base.add(&b.base)?,
        })
    }

    pub fn sub(&self, other: &Cell) -> Result<Cell> {
        self.add(&other.scale(&-Rational::one()))
    }

    pub fn scale(&self, c: &Rational) -> Cell {
        Cell {
            tops: self.tops.iter().map(|t| t.scale(c)).collect(),
            base: self.base.scale(c),
        }
    }

    /// Whisker by a one-hole context; commutes with source and target.
    pub fn apply_context(&self, ctx: &Context) -> Result<Cell> {
        let mut base = Term::zero(ctx.outer_arity());
        for (m, c) in self.base.iter() {
            base.add_monomial(ctx.plug(m)?, c.clone());
        }
        let tops = self
            .tops
            .iter()
            .map(|t| {
                let mut out = LinComb::zero();
                for (cm, c) in t.iter() {
                    out.add_term(
                        CellMono { ctx: ctx.compose(&cm.ctx)?, gen: cm.gen },
                        c.clone(),
                    );
                }
                Ok(out)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Cell { tops, base })
    }

    /// `⋆_k`-composition: requires `t_k(self) = s_k(other)` and equals
    /// `self - t_k(self) + other`.
    pub fn star(&self, other: &Cell, k: usize, space: &impl CellSpace) -> Result<Cell> {
        let tk = self.target_at(k, space)?;
        let sk = other.lift_to(k).source_at(k);
        if tk != sk {
            return Err(Error::NonComposable(format!(
                "t_{k}(left) differs from s_{k}(right)"
            )));
        }
        self.sub(&tk)?.add(other)
    }

    /// Inverse for `⋆_{dim-1}`: `s(a) - a + t(a)`.
    pub fn inverse(&self, space: &impl CellSpace) -> Result<Cell> {
        let d = self.dim();
        if d == 0 {
            return Err(Error::Precondition("0-cells are not invertible cells".into()));
        }
        let s = self.source_at(d - 1);
        let t = self.target_once(space)?;
        s.sub(self)?.add(&t)
    }
}

/// Interreduce a convergent polygraph: duplicate and derivable rules are
/// removed, every target is rewritten to normal form, and rule sources are
/// reduced with respect to the other rules. The presented operad is
/// preserved.
pub fn interreduce(p: &Polygraph, evidence: &crate::rewrite::Evidence) -> Result<Polygraph> {
    let mut rules = p.rules.clone();
    loop {
        let mut changed = false;
        // drop one rule at a time whose source is reducible by another rule
        // (a rule whose source another rule rewrites is a consequence of
        // the rest under convergence)
        loop {
            let removable = rules.iter().enumerate().position(|(i, r)| {
                rules.iter().enumerate().any(|(j, o)| {
                    j != i
                        && crate::treemono::find_occurrences(&o.source, &r.source)
                            .map(|v| !v.is_empty())
                            .unwrap_or(false)
                })
            });
            match removable {
                Some(i) => {
                    rules.remove(i);
                    changed = true;
                }
                None => break,
            }
        }
        // rewrite all targets to normal form
        let current = Polygraph { gens: p.gens.clone(), rules: rules.clone(), evidence: None };
        for r in rules.iter_mut() {
            let nf = normal_form(&current, &r.target, evidence, ReductionStrategy::LeastFirst)?;
            if nf.normal_form != r.target {
                changed = true;
                r.target = nf.normal_form;
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Polygraph { gens: p.gens.clone(), rules, evidence: p.evidence.clone() })
}

// ---------------------------------------------------------------------------
// Text format
// ---------------------------------------------------------------------------

struct Cursor<'a> {
    line: usize,
    text: &'a str,
    pos: usize,
}

impl<'a> Cursor<'a> {
    fn new(line: usize, text: &'a str) -> Self {
        Cursor { line, text, pos: 0 }
    }

    fn err(&self, msg: impl Into<String>) -> Error {
        Error::Parse { line: self.line, col: self.pos + 1, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.peek().map(|c| c == ' ' || c == '\t').unwrap_or(false) {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<char> {
        self.text[self.pos..].chars().next()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.peek()?;
        self.pos += c.len_utf8();
        Some(c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek() == Some(c) {
            self.pos += c.len_utf8();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{c}'")))
        }
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while self
            .peek()
            .map(|c| c.is_alphanumeric() || c == '_' || c == '\'')
            .unwrap_or(false)
        {
            self.bump();
        }
        if self.pos == start {
            return Err(self.err("expected an identifier"));
        }
        Ok(self.text[start..self.pos].to_string())
    }

    fn number(&mut self) -> Result<u64> {
        self.skip_ws();
        let start = self.pos;
        while self.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
            self.bump();
        }
        if self.pos == start {
            return Err(self.err("expected a number"));
        }
        self.text[start..self.pos]
            .parse()
            .map_err(|_| self.err("number out of range"))
    }

    fn at_end(&mut self) -> bool {
        self.skip_ws();
        self.pos >= self.text.len()
    }
}

/// Parse a tree monomial in the grammar `gen(c1,...,ck)` with leaf integers
/// and `e` for the trivial monomial. The result is canonicalized; duplicate
/// or missing leaves are rejected.
pub fn parse_monomial(table: &GenTable, text: &str) -> Result<Tree> {
    let mut cur = Cursor::new(1, text);
    let t = parse_mono_at(table, &mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input after monomial"));
    }
    finish_monomial(table, t, &cur)
}

fn finish_monomial(table: &GenTable, mut t: Tree, cur: &Cursor) -> Result<Tree> {
    t.canonicalize();
    t.validate(table).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Parse { line: cur.line, col: 1, msg },
        other => other,
    })?;
    Ok(t)
}

fn parse_mono_at(table: &GenTable, cur: &mut Cursor) -> Result<Tree> {
    cur.skip_ws();
    match cur.peek() {
        Some(c) if c.is_ascii_digit() => {
            let n = cur.number()?;
            if n == 0 {
                return Err(cur.err("leaf labels are 1-based"));
            }
            Ok(Tree::Leaf(n as usize))
        }
        Some(_) => {
            let name = cur.ident()?;
            if name == "e" {
                return Ok(Tree::Leaf(1));
            }
            let gen = table
                .lookup(&name)
                .ok_or_else(|| cur.err(format!("unknown generator {name}")))?;
            cur.skip_ws();
            cur.expect('(')?;
            let mut kids = Vec::new();
            loop {
                kids.push(parse_mono_at(table, cur)?);
                cur.skip_ws();
                if cur.eat(',') {
                    continue;
                }
                cur.expect(')')?;
                break;
            }
            if kids.len() != table.get(gen).arity {
                return Err(cur.err(format!(
                    "generator {name} has arity {}, got {} arguments",
                    table.get(gen).arity,
                    kids.len()
                )));
            }
            Ok(Tree::Node { gen, kids })
        }
        None => Err(cur.err("expected a monomial")),
    }
}

/// Parse a term: `c1*m1 + c2*m2 - m3` with integer or `p/q` coefficients,
/// or `0` for the zero term of unknown arity (resolved by the caller).
pub fn parse_term(table: &GenTable, text: &str) -> Result<Option<Term>> {
    let mut cur = Cursor::new(1, text);
    let t = parse_term_at(table, &mut cur)?;
    if !cur.at_end() {
        return Err(cur.err("trailing input after term"));
    }
    Ok(t)
}

fn parse_term_at(table: &GenTable, cur: &mut Cursor) -> Result<Option<Term>> {
    cur.skip_ws();
    if cur.peek() == Some('0') {
        cur.bump();
        cur.skip_ws();
        if cur.at_end() {
            return Ok(None);
        }
        return Err(cur.err("the zero term has no further summands"));
    }
    let mut term: Option<Term> = None;
    let mut sign = Rational::one();
    if cur.eat('-') {
        sign = -sign;
    }
    loop {
        cur.skip_ws();
        let coef = parse_coefficient(cur)?.unwrap_or_else(Rational::one) * sign.clone();
        let mono = parse_mono_at(table, cur)?;
        let mono = finish_monomial(table, mono, cur)?;
        match &mut term {
            None => {
                let mut t = Term::zero(mono.arity());
                t.add_monomial(mono, coef);
                term = Some(t);
            }
            Some(t) => {
                if mono.arity() != t.arity() {
                    return Err(cur.err("summands of different arities"));
                }
                t.add_monomial(mono, coef);
            }
        }
        cur.skip_ws();
        if cur.eat('+') {
            sign = Rational::one();
        } else if cur.eat('-') {
            sign = -Rational::one();
        } else {
            break;
        }
    }
    Ok(term)
}

fn parse_coefficient(cur: &mut Cursor) -> Result<Option<Rational>> {
    cur.skip_ws();
    let save = cur.pos;
    if !cur.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
        return Ok(None);
    }
    let numer = cur.number()?;
    let mut denom = 1u64;
    if cur.eat('/') {
        denom = cur.number()?;
        if denom == 0 {
            return Err(cur.err("zero denominator"));
        }
    }
    cur.skip_ws();
    if cur.eat('*') {
        Ok(Some(Rational::new((numer as i64).into(), (denom as i64).into())))
    } else {
        // a bare integer here is a leaf, not a coefficient
        cur.pos = save;
        Ok(None)
    }
}

/// Parse the line-oriented polygraph file format.
pub fn parse_polygraph(text: &str) -> Result<Polygraph> {
    let mut gens = GenTable::new();
    let mut rules: Vec<Rule> = Vec::new();
    let mut evidence = None;
    let mut saw_gens = false;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim_end();
        if line.trim().is_empty() {
            continue;
        }
        let lineno = lineno + 1;
        let mut cur = Cursor::new(lineno, line);
        let head = cur.ident()?;
        match head.as_str() {
            "gens" => {
                cur.skip_ws();
                cur.expect(':')?;
                if saw_gens {
                    return Err(cur.err("duplicate gens line"));
                }
                saw_gens = true;
                while !cur.at_end() {
                    let name = cur.ident()?;
                    if name == "e" {
                        return Err(cur.err("the name e is reserved for the trivial monomial"));
                    }
                    cur.expect(':')?;
                    let arity = cur.number()? as usize;
                    let weight = if cur.eat('@') { cur.number()? as usize } else { 1 };
                    gens.add(&name, arity, weight).map_err(|e| match e {
                        Error::InvalidInput(msg) => cur.err(msg),
                        other => other,
                    })?;
                }
            }
            "rule" => {
                if !saw_gens {
                    return Err(cur.err("rule before gens line"));
                }
                let name = cur.ident()?;
                cur.skip_ws();
                cur.expect(':')?;
                let source = parse_mono_at(&gens, &mut cur)?;
                let source = finish_monomial(&gens, source, &cur)?;
                cur.skip_ws();
                if !(cur.eat('-') && cur.eat('>')) {
                    return Err(cur.err("expected '->'"));
                }
                let rest = &line[cur.pos..];
                let mut tcur = Cursor::new(lineno, rest);
                let target = parse_term_at(&gens, &mut tcur)?;
                if !tcur.at_end() {
                    return Err(tcur.err("trailing input after rule target"));
                }
                let target = match target {
                    Some(t) => t,
                    None => Term::zero(source.arity()),
                };
                rules.push(Rule { name, source, target });
            }
            "evidence" => {
                cur.skip_ws();
                cur.expect(':')?;
                evidence = Some(parse_evidence(&gens, &mut cur)?);
            }
            other => {
                return Err(cur.err(format!("unknown directive {other}")));
            }
        }
    }
    let mut p = Polygraph { gens, rules, evidence };
    p.validate()?;
    // stabilize: validation does not alter rules, but keep clippy quiet
    p.rules.shrink_to_fit();
    Ok(p)
}

fn parse_evidence(gens: &GenTable, cur: &mut Cursor) -> Result<EvidenceSpec> {
    let kind = cur.ident()?;
    match kind.as_str() {
        "order" => {
            let mut names = Vec::new();
            loop {
                names.push(cur.ident()?);
                cur.skip_ws();
                if !cur.eat(',') {
                    break;
                }
            }
            for n in &names {
                if gens.lookup(n).is_none() {
                    return Err(cur.err(format!("unknown generator {n} in order")));
                }
            }
            Ok(EvidenceSpec::Order(names))
        }
        "phi" => {
            cur.skip_ws();
            // either the built-in `height` or a linear combination of features
            let save = cur.pos;
            if let Ok(id) = cur.ident() {
                if id == "height" && cur.at_end() {
                    return Ok(EvidenceSpec::PhiHeight);
                }
            }
            cur.pos = save;
            let mut terms = Vec::new();
            let mut sign = 1i64;
            if cur.eat('-') {
                sign = -1;
            }
            loop {
                cur.skip_ws();
                let coef = if cur.peek().map(|c| c.is_ascii_digit()).unwrap_or(false) {
                    let n = cur.number()? as i64;
                    cur.skip_ws();
                    cur.expect('*')?;
                    n
                } else {
                    1
                };
                let feat = cur.ident()?;
                cur.skip_ws();
                cur.expect('(')?;
                let feature = match feat.as_str() {
                    "count" => {
                        let g = cur.ident()?;
                        let gid = gens
                            .lookup(&g)
                            .ok_or_else(|| cur.err(format!("unknown generator {g}")))?;
                        PhiFeature::Count(gid)
                    }
                    "pair" => {
                        let a = cur.ident()?;
                        cur.skip_ws();
                        cur.expect(',')?;
                        let b = cur.ident()?;
                        let ga = gens
                            .lookup(&a)
                            .ok_or_else(|| cur.err(format!("unknown generator {a}")))?;
                        let gb = gens
                            .lookup(&b)
                            .ok_or_else(|| cur.err(format!("unknown generator {b}")))?;
                        PhiFeature::ChildPair(ga, gb)
                    }
                    other => return Err(cur.err(format!("unknown feature {other}"))),
                };
                cur.skip_ws();
                cur.expect(')')?;
                terms.push((sign * coef, feature));
                cur.skip_ws();
                if cur.eat('+') {
                    sign = 1;
                } else if cur.eat('-') {
                    sign = -1;
                } else {
                    break;
                }
            }
            if !cur.at_end() {
                return Err(cur.err("trailing input in phi expression"));
            }
            Ok(EvidenceSpec::PhiLinear(terms))
        }
        "fuel" => {
            let n = cur.number()?;
            Ok(EvidenceSpec::Fuel(n))
        }
        other => Err(cur.err(format!("unknown evidence kind {other}"))),
    }
}
