//! Exact rational linear algebra over monomial bases.
//!
//! Terms are finite formal linear combinations of canonical tree monomials
//! of one arity, with arbitrary-precision rational coefficients. Everything
//! here is exact; no identity holds up to tolerance.

use std::collections::BTreeMap;
use std::fmt;

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{Error, Result};
use crate::treemono::{tree_to_string, Arity, GenTable, Tree};

pub type Rational = BigRational;

pub fn rat(n: i64) -> Rational {
    Rational::from_integer(n.into())
}

/// Sparse linear combination with no stored zero coefficients and
/// deterministic iteration order.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct LinComb<K: Ord + Clone> {
    coeffs: BTreeMap<K, Rational>,
}

impl<K: Ord + Clone> LinComb<K> {
    pub fn zero() -> Self {
        LinComb { coeffs: BTreeMap::new() }
    }

    pub fn singleton(k: K) -> Self {
        let mut c = BTreeMap::new();
        c.insert(k, Rational::one());
        LinComb { coeffs: c }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, k: &K) -> Rational {
        self.coeffs.get(k).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, k: K, c: Rational) {
        if c.is_zero() {
            return;
        }
        let entry = self.coeffs.entry(k);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().clone() + c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(k.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Self) -> Self {
        let mut out = self.clone();
        for (k, c) in &other.coeffs {
            out.add_term(k.clone(), -c.clone());
        }
        out
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        LinComb {
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), v.clone() * c)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        LinComb {
            coeffs: self.coeffs.iter().map(|(k, v)| (k.clone(), -v.clone())).collect(),
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (&K, &Rational)> {
        self.coeffs.iter()
    }

    pub fn keys(&self) -> impl Iterator<Item = &K> {
        self.coeffs.keys()
    }

    /// Map keys linearly; images may collide.
    pub fn map_keys<L: Ord + Clone>(&self, f: impl Fn(&K) -> L) -> LinComb<L> {
        let mut out = LinComb::zero();
        for (k, c) in &self.coeffs {
            out.add_term(f(k), c.clone());
        }
        out
    }
}

impl<K: Ord + Clone> FromIterator<(K, Rational)> for LinComb<K> {
    fn from_iter<T: IntoIterator<Item = (K, Rational)>>(iter: T) -> Self {
        let mut out = LinComb::zero();
        for (k, c) in iter {
            out.add_term(k, c);
        }
        out
    }
}

/// A 0-cell of the free operad: a rational linear combination of canonical
/// tree monomials sharing one arity.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Term {
    arity: Arity,
    comb: LinComb<Tree>,
}

impl Term {
    pub fn zero(arity: Arity) -> Self {
        Term { arity, comb: LinComb::zero() }
    }

    pub fn monomial(m: Tree) -> Self {
        Term { arity: m.arity(), comb: LinComb::singleton(m) }
    }

    pub fn from_comb(arity: Arity, comb: LinComb<Tree>) -> Result<Self> {
        for m in comb.keys() {
            if m.arity() != arity {
                return Err(Error::ArityMismatch(format!(
                    "term of arity {arity} contains a monomial of arity {}",
                    m.arity()
                )));
            }
        }
        Ok(Term { arity, comb })
    }

    pub fn arity(&self) -> Arity {
        self.arity
    }

    pub fn comb(&self) -> &LinComb<Tree> {
        &self.comb
    }

    pub fn is_zero(&self) -> bool {
        self.comb.is_zero()
    }

    pub fn support(&self) -> impl Iterator<Item = &Tree> {
        self.comb.keys()
    }

    pub fn support_size(&self) -> usize {
        self.comb.len()
    }

    pub fn coeff(&self, m: &Tree) -> Rational {
        self.comb.coeff(m)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Tree, &Rational)> {
        self.comb.iter()
    }

    pub fn add(&self, other: &Term) -> Result<Term> {
        if self.arity != other.arity {
            return Err(Error::ArityMismatch(format!(
                "cannot add terms of arities {} and {}",
                self.arity, other.arity
            )));
        }
        Ok(Term { arity: self.arity, comb: self.comb.add(&other.comb) })
    }

    pub fn sub(&self, other: &Term) -> Result<Term> {
        self.add(&other.neg())
    }

    pub fn scale(&self, c: &Rational) -> Term {
        Term { arity: self.arity, comb: self.comb.scale(c) }
    }

    pub fn neg(&self) -> Term {
        Term { arity: self.arity, comb: self.comb.neg() }
    }

    pub fn add_monomial(&mut self, m: Tree, c: Rational) {
        debug_assert_eq!(m.arity(), self.arity);
        self.comb.add_term(m, c);
    }

    /// Leading monomial with respect to a total comparison on monomials of
    /// this arity; `None` is the distinguished zero marker.
    pub fn leading_monomial(
        &self,
        cmp: impl Fn(&Tree, &Tree) -> std::cmp::Ordering,
    ) -> Option<&Tree> {
        self.support().max_by(|a, b| cmp(a, b))
    }

    pub fn to_text(&self, table: &GenTable) -> String {
        TermDisplay { term: self, table }.to_string()
    }
}

pub struct TermDisplay<'a> {
    pub term: &'a Term,
    pub table: &'a GenTable,
}

impl fmt::Display for TermDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.term.is_zero() {
            return write!(f, "0");
        }
        for (i, (m, c)) in self.term.iter().enumerate() {
            let neg = c.is_negative();
            let abs = c.abs();
            if i == 0 {
                if neg {
                    write!(f, "-")?;
                }
            } else if neg {
                write!(f, " - ")?;
            } else {
                write!(f, " + ")?;
            }
            if !abs.is_one() {
                if abs.is_integer() {
                    write!(f, "{}*", abs.numer())?;
                } else {
                    write!(f, "{}/{}*", abs.numer(), abs.denom())?;
                }
            }
            write!(f, "{}", tree_to_string(m, self.table))?;
        }
        Ok(())
    }
}

/// Rank over the rationals of the span of the given terms in the monomial
/// basis. Plain rational Gaussian elimination; the test suite checks it
/// against an independent fraction-free elimination.
pub fn rank_of_span(terms: &[Term]) -> Result<usize> {
    if terms.is_empty() {
        return Ok(0);
    }
    let arity = terms[0].arity();
    if terms.iter().any(|t| t.arity() != arity) {
        return Err(Error::ArityMismatch("rank_of_span needs a single arity".into()));
    }
    let mut basis: Vec<&Tree> = Vec::new();
    let mut index: BTreeMap<&Tree, usize> = BTreeMap::new();
    for t in terms {
        for m in t.support() {
            if !index.contains_key(m) {
                index.insert(m, basis.len());
                basis.push(m);
            }
        }
    }
    let mut rows: Vec<Vec<Rational>> = terms
        .iter()
        .filter(|t| !t.is_zero())
        .map(|t| {
            let mut row = vec![Rational::zero(); basis.len()];
            for (m, c) in t.iter() {
                row[index[m]] = c.clone();
            }
            row
        })
        .collect();
    Ok(row_echelon_rank(&mut rows))
}

pub(crate) fn row_echelon_rank(rows: &mut [Vec<Rational>]) -> usize {
    let nrows = rows.len();
    if nrows == 0 {
        return 0;
    }
    let ncols = rows[0].len();
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..nrows).find(|&r| !rows[r][col].is_zero()) else {
            continue;
        };
        rows.swap(rank, p);
        let pivot = rows[rank][col].clone();
        for r in 0..nrows {
            if r != rank && !rows[r][col].is_zero() {
                let factor = rows[r][col].clone() / pivot.clone();
                for c in col..ncols {
                    let delta = rows[rank][c].clone() * factor.clone();
                    rows[r][c] -= delta;
                }
            }
        }
        rank += 1;
        if rank == nrows {
            break;
        }
    }
    rank
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::treemono::{GenTable, MonoEnumerator};
    use num_bigint::BigInt;
    use rand::{Rng, SeedableRng};

    fn table() -> GenTable {
        let mut t = GenTable::new();
        t.add("x", 2, 1).unwrap();
        t
    }

    #[test]
    fn term_cancellation() {
        let t = table();
        let e = MonoEnumerator::new(&t);
        let m = e.enumerate(3, 2).unwrap()[0].clone();
        let a = Term::monomial(m);
        let zero = a.add(&a.scale(&rat(-1))).unwrap();
        assert!(zero.is_zero());
        assert!(zero.leading_monomial(|a, b| a.cmp(b)).is_none());
    }

    #[test]
    fn rank_examples() {
        let t = table();
        let e = MonoEnumerator::new(&t);
        let ms = e.enumerate(3, 2).unwrap();
        assert_eq!(rank_of_span(&[]).unwrap(), 0);
        let a = Term::monomial(ms[0].clone())
            .add(&Term::monomial(ms[1].clone()))
            .unwrap();
        assert_eq!(rank_of_span(&[a.clone(), a.scale(&rat(2))]).unwrap(), 1);
        let b = Term::monomial(ms[1].clone());
        assert_eq!(rank_of_span(&[a.clone(), b]).unwrap(), 2);
    }

    #[test]
    fn rank_matches_fraction_free_oracle() {
        // random terms over 5 fixed monomials vs Bareiss elimination on
        // integer matrices
        let t = table();
        let e = MonoEnumerator::new(&t);
        let ms: Vec<Tree> = e.enumerate(4, 3).unwrap().iter().take(5).cloned().collect();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(7);
        for _ in 0..200 {
            let nrows = rng.gen_range(1..=4);
            let mut terms = Vec::new();
            let mut int_rows = Vec::new();
            for _ in 0..nrows {
                let mut term = Term::zero(4);
                let mut row = Vec::new();
                for m in &ms {
                    let c: i64 = rng.gen_range(-3..=3);
                    row.push(BigInt::from(c));
                    if c != 0 {
                        term.add_monomial(m.clone(), rat(c));
                    }
                }
                terms.push(term);
                int_rows.push(row);
            }
            assert_eq!(rank_of_span(&terms).unwrap(), bareiss_rank(int_rows));
        }
    }

    fn bareiss_rank(mut m: Vec<Vec<BigInt>>) -> usize {
        use num_traits::Zero;
        let rows = m.len();
        if rows == 0 {
            return 0;
        }
        let cols = m[0].len();
        let mut prev = BigInt::from(1);
        let mut rank = 0;
        for col in 0..cols {
            let Some(p) = (rank..rows).find(|&r| !m[r][col].is_zero()) else {
                continue;
            };
            m.swap(rank, p);
            for r in 0..rows {
                if r == rank {
                    continue;
                }
                for c in (0..cols).rev() {
                    let v = (&m[rank][col] * &m[r][c] - &m[r][col] * &m[rank][c]) / &prev;
                    m[r][c] = v;
                }
            }
            prev = m[rank][col].clone();
            rank += 1;
            if rank == rows {
                break;
            }
        }
        rank
    }
}
