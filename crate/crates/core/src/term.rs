//! Signatures, terms, and the free quantitative algebra on a finite space,
//! explored through depth-bounded windows.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::Algebra;
use crate::dist::{le, ExtDist};
use crate::error::{check_cap, Error, Limits, Result};
use crate::space::{expanding_pair, MetricSpace};

/// An operation symbol with its arity.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub arity: usize,
}

/// A finitary signature. Symbols are kept sorted by name.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct Signature {
    symbols: Vec<Symbol>,
}

impl Signature {
    pub fn new<S: Into<String>>(symbols: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let mut symbols: Vec<Symbol> = symbols
            .into_iter()
            .map(|(name, arity)| Symbol {
                name: name.into(),
                arity,
            })
            .collect();
        symbols.sort();
        for w in symbols.windows(2) {
            if w[0].name == w[1].name {
                return Err(Error::structural(format!(
                    "duplicate symbol {:?}",
                    w[0].name
                )));
            }
        }
        for s in &symbols {
            if !is_identifier(&s.name) {
                return Err(Error::structural(format!("bad symbol name {:?}", s.name)));
            }
        }
        Ok(Signature { symbols })
    }

    pub fn empty() -> Self {
        Signature::default()
    }

    pub fn symbols(&self) -> &[Symbol] {
        &self.symbols
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.symbols
            .binary_search_by(|s| s.name.as_str().cmp(name))
            .ok()
    }

    pub fn arity(&self, name: &str) -> Option<usize> {
        self.index_of(name).map(|i| self.symbols[i].arity)
    }
}

fn is_identifier(s: &str) -> bool {
    !s.is_empty()
        && !s
            .chars()
            .any(|c| c.is_whitespace() || matches!(c, '(' | ')' | ','))
}

/// A Σ-term: a generator or an operation symbol applied to subterms.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Term {
    Gen(String),
    App(String, Vec<Term>),
}

impl Term {
    pub fn gen(name: impl Into<String>) -> Term {
        Term::Gen(name.into())
    }

    pub fn app(op: impl Into<String>, args: Vec<Term>) -> Term {
        Term::App(op.into(), args)
    }

    /// 0 for generators, `1 + max child depth` otherwise (so constants have depth 1).
    pub fn depth(&self) -> usize {
        match self {
            Term::Gen(_) => 0,
            Term::App(_, args) => 1 + args.iter().map(Term::depth).max().unwrap_or(0),
        }
    }

    pub fn generators(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_generators(&mut out);
        out
    }

    fn collect_generators<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Term::Gen(g) => {
                out.insert(g);
            }
            Term::App(_, args) => args.iter().for_each(|a| a.collect_generators(out)),
        }
    }

    /// Checks every symbol is declared with the right number of arguments.
    pub fn check(&self, sig: &Signature) -> Result<()> {
        match self {
            Term::Gen(_) => Ok(()),
            Term::App(op, args) => {
                let arity = sig
                    .arity(op)
                    .ok_or_else(|| Error::structural(format!("unknown symbol {op:?}")))?;
                if arity != args.len() {
                    return Err(Error::structural(format!(
                        "symbol {op:?} has arity {arity} but is applied to {} arguments",
                        args.len()
                    )));
                }
                args.iter().try_for_each(|a| a.check(sig))
            }
        }
    }

    /// Replaces generators according to `subst`; unmapped generators stay.
    pub fn substitute(&self, subst: &BTreeMap<&str, &Term>) -> Term {
        match self {
            Term::Gen(g) => subst
                .get(g.as_str())
                .map(|t| (*t).clone())
                .unwrap_or_else(|| self.clone()),
            Term::App(op, args) => Term::App(
                op.clone(),
                args.iter().map(|a| a.substitute(subst)).collect(),
            ),
        }
    }
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Gen(g) => f.write_str(g),
            Term::App(op, args) => {
                write!(f, "{op}(")?;
                for (i, a) in args.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{a}")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl FromStr for Term {
    type Err = Error;

    /// Prefix syntax: `mul(x, e())`. Bare identifiers are generators.
    fn from_str(s: &str) -> Result<Term> {
        let mut p = Parser { src: s, pos: 0 };
        let t = p.term()?;
        p.skip_ws();
        if p.pos != s.len() {
            return Err(p.error("trailing input"));
        }
        Ok(t)
    }
}

struct Parser<'a> {
    src: &'a str,
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::structural(format!(
            "term syntax: {msg} at offset {} in {:?}",
            self.pos, self.src
        ))
    }

    fn skip_ws(&mut self) {
        while let Some(c) = self.src[self.pos..].chars().next() {
            if !c.is_whitespace() {
                break;
            }
            self.pos += c.len_utf8();
        }
    }

    fn peek(&self) -> Option<char> {
        self.src[self.pos..].chars().next()
    }

    fn ident(&mut self) -> Result<String> {
        self.skip_ws();
        let start = self.pos;
        while let Some(c) = self.peek() {
            if c.is_whitespace() || matches!(c, '(' | ')' | ',') {
                break;
            }
            self.pos += c.len_utf8();
        }
        if start == self.pos {
            return Err(self.error("expected identifier"));
        }
        Ok(self.src[start..self.pos].to_string())
    }

    fn term(&mut self) -> Result<Term> {
        let name = self.ident()?;
        self.skip_ws();
        if self.peek() != Some('(') {
            return Ok(Term::Gen(name));
        }
        self.pos += 1;
        let mut args = Vec::new();
        self.skip_ws();
        if self.peek() == Some(')') {
            self.pos += 1;
            return Ok(Term::App(name, args));
        }
        loop {
            args.push(self.term()?);
            self.skip_ws();
            match self.peek() {
                Some(',') => self.pos += 1,
                Some(')') => {
                    self.pos += 1;
                    return Ok(Term::App(name, args));
                }
                _ => return Err(self.error("expected ',' or ')'")),
            }
        }
    }
}

/// Whether `t` and `s` differ only in their generators.
pub fn similar(sig: &Signature, t: &Term, s: &Term) -> Result<bool> {
    t.check(sig)?;
    s.check(sig)?;
    Ok(similar_unchecked(t, s))
}

fn similar_unchecked(t: &Term, s: &Term) -> bool {
    match (t, s) {
        (Term::Gen(_), Term::Gen(_)) => true,
        (Term::App(f, xs), Term::App(g, ys)) => {
            f == g
                && xs.len() == ys.len()
                && xs.iter().zip(ys).all(|(x, y)| similar_unchecked(x, y))
        }
        _ => false,
    }
}

/// Distance in the free algebra on `space`: the space distance on generators,
/// ∞ for dissimilar terms, and the maximum over children for similar composites.
pub fn term_distance(t: &Term, s: &Term, space: &MetricSpace) -> Result<ExtDist> {
    match (t, s) {
        (Term::Gen(a), Term::Gen(b)) => Ok(space
            .dist(space.require_index(a)?, space.require_index(b)?)
            .clone()),
        (Term::App(f, xs), Term::App(g, ys)) if f == g && xs.len() == ys.len() => {
            let mut acc = ExtDist::zero();
            for (x, y) in xs.iter().zip(ys) {
                acc = acc.max(term_distance(x, y, space)?);
            }
            Ok(acc)
        }
        _ => {
            for g in t.generators().into_iter().chain(s.generators()) {
                space.require_index(g)?;
            }
            Ok(ExtDist::infinity())
        }
    }
}

/// Number of terms of depth at most `depth`, saturating at `u128::MAX`.
pub fn count_terms(sig: &Signature, generators: usize, depth: usize) -> u128 {
    let mut total = generators as u128;
    for _ in 0..depth {
        let mut next = generators as u128;
        for s in sig.symbols() {
            let mut p: u128 = 1;
            for _ in 0..s.arity {
                p = p.saturating_mul(total);
            }
            next = next.saturating_add(p);
        }
        total = next;
    }
    total
}

/// All terms of depth at most `depth`, ordered by depth, then head symbol,
/// then children (by their own position in the list).
pub fn enumerate_terms(sig: &Signature, generators: &[String], depth: usize) -> Vec<Term> {
    let mut gens: Vec<String> = generators.to_vec();
    gens.sort();
    gens.dedup();
    let mut out: Vec<Term> = gens.into_iter().map(Term::Gen).collect();
    // start index of each depth layer
    let mut layer_start = vec![0usize, out.len()];
    for d in 1..=depth {
        let prev_end = out.len();
        let prev_start = layer_start[d - 1];
        for s in sig.symbols() {
            if s.arity == 0 {
                if d == 1 {
                    out.push(Term::App(s.name.clone(), Vec::new()));
                }
                continue;
            }
            for tuple in crate::space::tuples(&vec![prev_end; s.arity]) {
                // exactly depth d: some child from the previous layer
                if tuple.iter().any(|&i| i >= prev_start) {
                    let args = tuple.iter().map(|&i| out[i].clone()).collect();
                    out.push(Term::App(s.name.clone(), args));
                }
            }
        }
        layer_start.push(out.len());
    }
    out
}

/// [`enumerate_terms`] guarded by `limits.max_terms`.
pub fn enumerate_terms_capped(
    sig: &Signature,
    generators: &[String],
    depth: usize,
    limits: &Limits,
) -> Result<Vec<Term>> {
    let distinct: BTreeSet<&String> = generators.iter().collect();
    check_cap(
        "term count",
        count_terms(sig, distinct.len(), depth),
        limits.max_terms,
    )?;
    Ok(enumerate_terms(sig, generators, depth))
}

/// A term with symbols and generators resolved to indices.
#[derive(Clone, Debug)]
pub(crate) enum Compiled {
    Var(usize),
    App(usize, Vec<Compiled>),
}

impl Compiled {
    pub(crate) fn new(
        t: &Term,
        alg: &Algebra,
        var: &dyn Fn(&str) -> Option<usize>,
    ) -> Result<Compiled> {
        match t {
            Term::Gen(g) => var(g)
                .map(Compiled::Var)
                .ok_or_else(|| Error::structural(format!("no value assigned to generator {g:?}"))),
            Term::App(op, args) => {
                let sym = alg.signature().index_of(op).ok_or_else(|| {
                    Error::structural(format!("algebra does not interpret symbol {op:?}"))
                })?;
                let arity = alg.signature().symbols()[sym].arity;
                if arity != args.len() {
                    return Err(Error::structural(format!(
                        "symbol {op:?} expects {arity} arguments"
                    )));
                }
                let args = args
                    .iter()
                    .map(|a| Compiled::new(a, alg, var))
                    .collect::<Result<_>>()?;
                Ok(Compiled::App(sym, args))
            }
        }
    }

    pub(crate) fn eval(&self, alg: &Algebra, env: &[usize]) -> usize {
        match self {
            Compiled::Var(v) => env[*v],
            Compiled::App(sym, args) => {
                let vals: Vec<usize> = args.iter().map(|a| a.eval(alg, env)).collect();
                alg.apply(*sym, &vals)
            }
        }
    }
}

/// Evaluates `t` in `alg`, sending each generator to a carrier point index.
pub fn evaluate(t: &Term, alg: &Algebra, assignment: &BTreeMap<String, usize>) -> Result<usize> {
    let names: Vec<&String> = assignment.keys().collect();
    let env: Vec<usize> = assignment.values().copied().collect();
    if let Some(&bad) = env.iter().find(|&&v| v >= alg.carrier().len()) {
        return Err(Error::structural(format!(
            "assigned point index {bad} outside the carrier"
        )));
    }
    let c = Compiled::new(t, alg, &|g| names.iter().position(|n| n.as_str() == g))?;
    Ok(c.eval(alg, &env))
}

/// `sup` over all terms `t` of depth ≤ `depth` of `d(f̄1 t, f̄2 t)`, where `f̄k`
/// extends `fk: space → carrier` to a homomorphism on the free algebra.
pub fn hom_distance_bounded(
    alg: &Algebra,
    space: &MetricSpace,
    f1: &[usize],
    f2: &[usize],
    depth: usize,
    limits: &Limits,
) -> Result<ExtDist> {
    let carrier = alg.carrier();
    for f in [f1, f2] {
        if f.len() != space.len() || f.iter().any(|&a| a >= carrier.len()) {
            return Err(Error::structural(
                "assignment is not a total map into the carrier",
            ));
        }
        if expanding_pair(space, carrier, f).is_some() {
            return Err(Error::invalid(
                "assignment",
                ["map into the carrier is not nonexpanding"],
            ));
        }
    }
    let terms = enumerate_terms_capped(alg.signature(), space.points(), depth, limits)?;
    let mut sup = ExtDist::zero();
    for t in &terms {
        let c = Compiled::new(t, alg, &|g| space.index_of(g))?;
        let d = carrier.dist(c.eval(alg, f1), c.eval(alg, f2));
        if !le(d, &sup) {
            sup = d.clone();
        }
    }
    Ok(sup)
}
