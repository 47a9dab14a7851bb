//! Finite quantitative Σ-algebras and their nonexpanding homomorphisms.
//!
//! An operation table for a symbol of arity `n` is a flat vector indexed by
//! the mixed-radix encoding of the argument tuple (first argument most
//! significant), holding carrier point indices.

use std::collections::{BTreeSet, HashMap};
use std::ops::Deref;

use serde::Serialize;

use crate::dist::{le, ExtDist};
use crate::error::{check_cap, Error, Limits, Result};
use crate::space::{
    expanding_pair, is_isometric, is_surjective, product_many, tuples, MetricSpace, NonexpandingMap,
};
use crate::term::Signature;

/// A metric space with total operation tables, not yet checked for nonexpansiveness.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Algebra {
    carrier: MetricSpace,
    signature: Signature,
    tables: Vec<Vec<usize>>,
}

impl Algebra {
    /// `tables[k]` belongs to `signature.symbols()[k]`.
    pub fn new(
        carrier: MetricSpace,
        signature: Signature,
        tables: Vec<Vec<usize>>,
    ) -> Result<Self> {
        if tables.len() != signature.len() {
            return Err(Error::structural("one table per symbol required"));
        }
        let n = carrier.len();
        for (sym, table) in signature.symbols().iter().zip(&tables) {
            let want = n
                .checked_pow(sym.arity as u32)
                .ok_or_else(|| Error::structural("table too large"))?;
            if table.len() != want {
                return Err(Error::structural(format!(
                    "table for {:?} has {} entries, expected {want}",
                    sym.name,
                    table.len()
                )));
            }
            if table.iter().any(|&v| v >= n) {
                return Err(Error::structural(format!(
                    "table for {:?} leaves the carrier",
                    sym.name
                )));
            }
        }
        Ok(Algebra {
            carrier,
            signature,
            tables,
        })
    }

    /// Tables filled from `op(symbol index, argument tuple)`.
    pub fn from_fn(
        carrier: MetricSpace,
        signature: Signature,
        op: impl Fn(usize, &[usize]) -> usize,
    ) -> Result<Self> {
        let n = carrier.len();
        let tables = signature
            .symbols()
            .iter()
            .enumerate()
            .map(|(k, s)| tuples(&vec![n; s.arity]).iter().map(|t| op(k, t)).collect())
            .collect();
        Algebra::new(carrier, signature, tables)
    }

    pub fn carrier(&self) -> &MetricSpace {
        &self.carrier
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn table(&self, sym: usize) -> &[usize] {
        &self.tables[sym]
    }

    pub fn len(&self) -> usize {
        self.carrier.len()
    }

    pub fn is_empty(&self) -> bool {
        self.carrier.is_empty()
    }

    pub fn tuple_index(&self, args: &[usize]) -> usize {
        let n = self.carrier.len();
        args.iter().fold(0, |acc, &a| acc * n + a)
    }

    pub fn apply(&self, sym: usize, args: &[usize]) -> usize {
        self.tables[sym][self.tuple_index(args)]
    }

    /// Looks a symbol up by name.
    pub fn symbol(&self, name: &str) -> Result<usize> {
        self.signature
            .index_of(name)
            .ok_or_else(|| Error::structural(format!("unknown symbol {name:?}")))
    }

    /// Total number of table entries over all symbols.
    pub fn table_entries(&self) -> usize {
        self.tables.iter().map(Vec::len).sum()
    }

    /// Whether `points` is closed under every operation.
    pub fn is_closed(&self, points: &BTreeSet<usize>) -> bool {
        let members: Vec<usize> = points.iter().copied().collect();
        self.signature.symbols().iter().enumerate().all(|(k, s)| {
            tuples(&vec![members.len(); s.arity]).iter().all(|t| {
                let args: Vec<usize> = t.iter().map(|&i| members[i]).collect();
                points.contains(&self.apply(k, &args))
            })
        })
    }
}

/// How argument distances combine into the bound an operation must respect.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Combiner {
    /// The maximum metric on `Aⁿ` (quantitative algebras).
    Max,
    /// The addition metric on `Aⁿ` (monoids in the monoidal category of metric spaces).
    Sum,
}

/// An argument-tuple pair whose outputs are further apart than the bound allows.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OpViolation {
    pub symbol: String,
    pub x: Vec<String>,
    pub y: Vec<String>,
    pub output_distance: ExtDist,
    pub bound: ExtDist,
}

impl std::fmt::Display for OpViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "{s}({}) vs {s}({}): output distance {} > bound {}",
            self.x.join(","),
            self.y.join(","),
            self.output_distance,
            self.bound,
            s = self.symbol
        )
    }
}

/// Checks `d(σx⃗, σy⃗) ≤ combine_i d(x_i, y_i)` over all tuple pairs with `x⃗ < y⃗`.
pub fn check_op_against_combiner(
    alg: &Algebra,
    symbol: &str,
    combiner: Combiner,
    limits: &Limits,
) -> Result<Vec<OpViolation>> {
    let k = alg.symbol(symbol)?;
    let arity = alg.signature().symbols()[k].arity;
    let n = alg.len() as u128;
    check_cap(
        "tuple pairs",
        n.saturating_pow(2 * arity as u32),
        limits.max_tuple_pairs,
    )?;
    Ok(op_violations(alg, k, combiner))
}

fn op_violations(alg: &Algebra, k: usize, combiner: Combiner) -> Vec<OpViolation> {
    let sym = &alg.signature().symbols()[k];
    let d = alg.carrier();
    let all = tuples(&vec![alg.len(); sym.arity]);
    let names = |t: &[usize]| {
        t.iter()
            .map(|&i| d.point(i).to_string())
            .collect::<Vec<_>>()
    };
    let mut out = Vec::new();
    for (i, x) in all.iter().enumerate() {
        for y in &all[i + 1..] {
            let parts = x.iter().zip(y).map(|(&a, &b)| d.dist(a, b));
            let bound = match combiner {
                Combiner::Max => parts.cloned().max().unwrap_or_else(ExtDist::zero),
                Combiner::Sum => parts.fold(ExtDist::zero(), |acc, v| &acc + v),
            };
            let out_d = d.dist(alg.apply(k, x), alg.apply(k, y));
            if !le(out_d, &bound) {
                out.push(OpViolation {
                    symbol: sym.name.clone(),
                    x: names(x),
                    y: names(y),
                    output_distance: out_d.clone(),
                    bound,
                });
            }
        }
    }
    out
}

/// Every max-metric nonexpansiveness violation, for all symbols.
pub fn validate_algebra(alg: &Algebra, limits: &Limits) -> Result<Vec<OpViolation>> {
    let n = alg.len() as u128;
    let needed = alg.signature().symbols().iter().fold(0u128, |acc, s| {
        acc.saturating_add(n.saturating_pow(2 * s.arity as u32))
    });
    check_cap("tuple pairs", needed, limits.max_tuple_pairs)?;
    Ok((0..alg.signature().len())
        .flat_map(|k| op_violations(alg, k, Combiner::Max))
        .collect())
}

/// A validated quantitative algebra.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct QuantAlgebra(Algebra);

impl QuantAlgebra {
    pub fn new(alg: Algebra, limits: &Limits) -> Result<Self> {
        let v = validate_algebra(&alg, limits)?;
        if v.is_empty() {
            Ok(QuantAlgebra(alg))
        } else {
            Err(Error::invalid("quantitative algebra", v))
        }
    }

    pub(crate) fn new_unchecked(alg: Algebra) -> Self {
        QuantAlgebra(alg)
    }

    pub fn algebra(&self) -> &Algebra {
        &self.0
    }

    pub fn into_algebra(self) -> Algebra {
        self.0
    }
}

impl Deref for QuantAlgebra {
    type Target = Algebra;
    fn deref(&self) -> &Algebra {
        &self.0
    }
}

/// Reasons a carrier map fails to be a homomorphism of quantitative algebras.
pub fn homomorphism_violations(source: &Algebra, target: &Algebra, map: &[usize]) -> Vec<String> {
    let mut out = Vec::new();
    if map.len() != source.len() || map.iter().any(|&y| y >= target.len()) {
        out.push("map is not total between the carriers".to_string());
        return out;
    }
    if source.signature() != target.signature() {
        out.push("signatures differ".to_string());
        return out;
    }
    if let Some((x, y)) = expanding_pair(source.carrier(), target.carrier(), map) {
        out.push(format!(
            "expanding at ({}, {})",
            source.carrier().point(x),
            source.carrier().point(y)
        ));
    }
    for (k, s) in source.signature().symbols().iter().enumerate() {
        for t in tuples(&vec![source.len(); s.arity]) {
            let image: Vec<usize> = t.iter().map(|&a| map[a]).collect();
            if map[source.apply(k, &t)] != target.apply(k, &image) {
                let args: Vec<&str> = t.iter().map(|&a| source.carrier().point(a)).collect();
                out.push(format!("does not preserve {}({})", s.name, args.join(",")));
            }
        }
    }
    out
}

/// A nonexpanding, operation-preserving carrier map.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homomorphism {
    source: QuantAlgebra,
    target: QuantAlgebra,
    map: Vec<usize>,
}

impl Homomorphism {
    pub fn new(source: QuantAlgebra, target: QuantAlgebra, map: Vec<usize>) -> Result<Self> {
        let v = homomorphism_violations(&source, &target, &map);
        if v.is_empty() {
            Ok(Homomorphism {
                source,
                target,
                map,
            })
        } else {
            Err(Error::invalid("homomorphism", v))
        }
    }

    pub(crate) fn new_unchecked(
        source: QuantAlgebra,
        target: QuantAlgebra,
        map: Vec<usize>,
    ) -> Self {
        Homomorphism {
            source,
            target,
            map,
        }
    }

    pub fn identity(a: &QuantAlgebra) -> Self {
        Homomorphism {
            source: a.clone(),
            target: a.clone(),
            map: (0..a.len()).collect(),
        }
    }

    pub fn source(&self) -> &QuantAlgebra {
        &self.source
    }

    pub fn target(&self) -> &QuantAlgebra {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &Homomorphism) -> Result<Homomorphism> {
        if self.target != other.source {
            return Err(Error::structural("homomorphisms are not composable"));
        }
        Ok(Homomorphism {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&y| other.map[y]).collect(),
        })
    }

    pub fn is_surjective(&self) -> bool {
        is_surjective(&self.map, self.target.len())
    }

    pub fn is_isometric(&self) -> bool {
        is_isometric(self.source.carrier(), self.target.carrier(), &self.map)
    }

    /// The underlying nonexpanding map of carriers.
    pub fn underlying(&self) -> NonexpandingMap {
        NonexpandingMap::new_unchecked(
            self.source.carrier().clone(),
            self.target.carrier().clone(),
            self.map.clone(),
        )
    }
}

/// Supremum distance `sup_a d(f a, g a)` between parallel homomorphisms.
pub fn hom_distance(f: &Homomorphism, g: &Homomorphism) -> Result<ExtDist> {
    if f.source != g.source || f.target != g.target {
        return Err(Error::structural("homomorphisms are not parallel"));
    }
    Ok(sup_distance(f.target.carrier(), &f.map, &g.map))
}

pub(crate) fn sup_distance(target: &MetricSpace, f: &[usize], g: &[usize]) -> ExtDist {
    f.iter()
        .zip(g)
        .map(|(&a, &b)| target.dist(a, b).clone())
        .max()
        .unwrap_or_else(ExtDist::zero)
}

/// Product algebra with the maximum metric and componentwise operations,
/// together with the projections.
pub fn product_algebra(algebras: &[&QuantAlgebra]) -> Result<(QuantAlgebra, Vec<Homomorphism>)> {
    let sig = algebras
        .first()
        .map(|a| a.signature().clone())
        .ok_or_else(|| Error::structural("product of an empty list has no signature"))?;
    if algebras.iter().any(|a| a.signature() != &sig) {
        return Err(Error::structural("signature mismatch"));
    }
    let carriers: Vec<&MetricSpace> = algebras.iter().map(|a| a.carrier()).collect();
    let (space, coords) = product_many(&carriers);
    let index: HashMap<&[usize], usize> = coords
        .iter()
        .enumerate()
        .map(|(i, c)| (c.as_slice(), i))
        .collect();
    let alg = Algebra::from_fn(space, sig, |k, args| {
        let c: Vec<usize> = algebras
            .iter()
            .enumerate()
            .map(|(f, a)| {
                let parts: Vec<usize> = args.iter().map(|&p| coords[p][f]).collect();
                a.apply(k, &parts)
            })
            .collect();
        index[c.as_slice()]
    })?;
    let product = QuantAlgebra(alg);
    let projections = algebras
        .iter()
        .enumerate()
        .map(|(f, a)| Homomorphism {
            source: product.clone(),
            target: (*a).clone(),
            map: coords.iter().map(|c| c[f]).collect(),
        })
        .collect();
    Ok((product, projections))
}

/// The least operation-closed subset containing `seed`, with the subspace metric,
/// and its inclusion.
pub fn subalgebra_generated(
    a: &QuantAlgebra,
    seed: &[usize],
) -> Result<(QuantAlgebra, Homomorphism)> {
    if let Some(&bad) = seed.iter().find(|&&s| s >= a.len()) {
        return Err(Error::structural(format!(
            "seed index {bad} outside the carrier"
        )));
    }
    let mut members: BTreeSet<usize> = seed.iter().copied().collect();
    loop {
        let current: Vec<usize> = members.iter().copied().collect();
        let mut added = false;
        for (k, s) in a.signature().symbols().iter().enumerate() {
            for t in tuples(&vec![current.len(); s.arity]) {
                let args: Vec<usize> = t.iter().map(|&i| current[i]).collect();
                added |= members.insert(a.apply(k, &args));
            }
        }
        if !added {
            break;
        }
    }
    restrict(a, &members.into_iter().collect::<Vec<_>>())
}

/// Subalgebra on a closed, sorted set of carrier indices.
fn restrict(a: &QuantAlgebra, members: &[usize]) -> Result<(QuantAlgebra, Homomorphism)> {
    let space = a.carrier().subspace(members)?;
    // members is sorted and the carrier is sorted, so positions line up with the subspace
    let pos: HashMap<usize, usize> = members.iter().enumerate().map(|(i, &m)| (m, i)).collect();
    let alg = Algebra::from_fn(space, a.signature().clone(), |k, args| {
        let outer: Vec<usize> = args.iter().map(|&i| members[i]).collect();
        pos[&a.apply(k, &outer)]
    })?;
    let sub = QuantAlgebra(alg);
    let inclusion = Homomorphism {
        source: sub.clone(),
        target: a.clone(),
        map: members.to_vec(),
    };
    Ok((sub, inclusion))
}

/// Factors `f` as a surjective homomorphism onto its image followed by an
/// isometric embedding. Image points are named after their least preimage.
pub fn image_factorize(f: &Homomorphism) -> Result<(Homomorphism, Homomorphism)> {
    let src = f.source();
    let tgt = f.target();
    // least preimage per image point; source indices ascend in name order
    let mut least: Vec<Option<usize>> = vec![None; tgt.len()];
    for (x, &y) in f.map.iter().enumerate() {
        least[y].get_or_insert(x);
    }
    let image: Vec<usize> = (0..tgt.len()).filter(|&y| least[y].is_some()).collect();
    let names: Vec<String> = image
        .iter()
        .map(|&y| src.carrier().point(least[y].unwrap()).to_string())
        .collect();
    let m = crate::space::DistMatrix::from_fn(names, |i, j| {
        tgt.carrier().dist(image[i], image[j]).clone()
    })?;
    let space = MetricSpace::new_unchecked(m);
    // slot of each image point in the renamed carrier
    let slot: HashMap<usize, usize> = image
        .iter()
        .map(|&y| {
            (
                y,
                space
                    .index_of(src.carrier().point(least[y].unwrap()))
                    .unwrap(),
            )
        })
        .collect();
    let back: Vec<usize> = {
        let mut v = vec![0; image.len()];
        for &y in &image {
            v[slot[&y]] = y;
        }
        v
    };
    let alg = Algebra::from_fn(space, tgt.signature().clone(), |k, args| {
        let outer: Vec<usize> = args.iter().map(|&i| back[i]).collect();
        slot[&tgt.apply(k, &outer)]
    })?;
    let img = QuantAlgebra(alg);
    let e = Homomorphism {
        source: src.clone(),
        target: img.clone(),
        map: f.map.iter().map(|y| slot[y]).collect(),
    };
    let m = Homomorphism {
        source: img,
        target: tgt.clone(),
        map: back,
    };
    Ok((e, m))
}

/// All homomorphisms `source → target`, as carrier maps in lexicographic order.
pub fn enumerate_homomorphisms(
    source: &QuantAlgebra,
    target: &QuantAlgebra,
    limits: &Limits,
) -> Result<Vec<Vec<usize>>> {
    let needed = (target.len() as u128).saturating_pow(source.len() as u32);
    check_cap("candidate maps", needed, limits.max_assignments)?;
    Ok(tuples(&vec![target.len(); source.len()])
        .into_iter()
        .filter(|m| homomorphism_violations(source, target, m).is_empty())
        .collect())
}

/// Outcome of factoring a candidate `f'` through `f` as `f' = h ∘ f`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum HomFactorization {
    /// `f'` breaks the compatibility condition at this source pair:
    /// `d(f' x, f' y) > d(f x, f y)`.
    ComViolation { x: usize, y: usize },
    /// Exactly one homomorphism `h` works.
    Unique(Vec<usize>),
    /// No homomorphism `h` works.
    Missing,
    /// At least two different homomorphisms work.
    Ambiguous(Vec<usize>, Vec<usize>),
}

/// Exhaustively searches for homomorphisms `h` with `candidate = h ∘ f`.
///
/// `h` is forced on the image of `f`; the remaining target points range over
/// the whole codomain of `candidate`.
pub fn factor_through(
    f: &Homomorphism,
    candidate: &Homomorphism,
    limits: &Limits,
) -> Result<HomFactorization> {
    if f.source != candidate.source {
        return Err(Error::structural(
            "candidate does not share the source of f",
        ));
    }
    let n = f.source.len();
    let (fy, z) = (f.target.carrier(), candidate.target.carrier());
    for x in 0..n {
        for y in (x + 1)..n {
            if !le(
                z.dist(candidate.map[x], candidate.map[y]),
                fy.dist(f.map[x], f.map[y]),
            ) {
                return Ok(HomFactorization::ComViolation { x, y });
            }
        }
    }
    let mut forced: Vec<Option<usize>> = vec![None; f.target.len()];
    for x in 0..n {
        match forced[f.map[x]] {
            Some(v) if v != candidate.map[x] => return Ok(HomFactorization::Missing),
            _ => forced[f.map[x]] = Some(candidate.map[x]),
        }
    }
    let free: Vec<usize> = (0..forced.len()).filter(|&y| forced[y].is_none()).collect();
    let needed = (z.len() as u128).saturating_pow(free.len() as u32);
    check_cap("candidate factorizations", needed, limits.max_assignments)?;
    let mut found: Vec<Vec<usize>> = Vec::new();
    for choice in tuples(&vec![z.len(); free.len()]) {
        let mut h: Vec<usize> = forced.iter().map(|v| v.unwrap_or(0)).collect();
        for (&y, &v) in free.iter().zip(&choice) {
            h[y] = v;
        }
        if homomorphism_violations(&f.target, &candidate.target, &h).is_empty() {
            found.push(h);
            if found.len() == 2 {
                let b = found.pop().unwrap();
                let a = found.pop().unwrap();
                return Ok(HomFactorization::Ambiguous(a, b));
            }
        }
    }
    Ok(match found.pop() {
        Some(h) => HomFactorization::Unique(h),
        None => HomFactorization::Missing,
    })
}
