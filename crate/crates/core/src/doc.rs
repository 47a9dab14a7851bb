//! JSON documents for spaces, algebras, maps, subcongruences and equations.
//!
//! Emission is canonical: points sorted, pairs listed once with `x < y`,
//! defaults omitted. Parsing a canonical document and emitting it again gives
//! the same bytes.

use std::collections::BTreeMap;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::algebra::{Algebra, Homomorphism, QuantAlgebra};
use crate::dist::ExtDist;
use crate::error::{Error, Limits, Result};
use crate::space::{tuples, DistMatrix, MetricSpace, NonexpandingMap, PseudoSpace, QuotientMap};
use crate::subcongruence::Subcongruence;
use crate::term::Signature;
use crate::variety::{QuantEquation, VarietyPresentation};

pub fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(|e| Error::structural(format!("malformed JSON: {e}")))
}

pub fn to_json<T: Serialize>(doc: &T) -> String {
    serde_json::to_string_pretty(doc).expect("documents serialize")
}

type Entry = (String, String, ExtDist);

/// Entries of `m` that differ from `default`, written so that
/// `DistMatrix::from_entries` rebuilds `m` exactly.
fn sparse_entries(m: &DistMatrix, default: impl Fn(usize, usize) -> ExtDist) -> Vec<Entry> {
    let mut out = Vec::new();
    let entry = |i: usize, j: usize| {
        (
            m.point(i).to_string(),
            m.point(j).to_string(),
            m.dist(i, j).clone(),
        )
    };
    for i in 0..m.len() {
        if *m.dist(i, i) != default(i, i) {
            out.push(entry(i, i));
        }
        for j in i + 1..m.len() {
            let symmetric = m.dist(i, j) == m.dist(j, i);
            if *m.dist(i, j) != default(i, j) || !symmetric {
                out.push(entry(i, j));
            }
            if !symmetric {
                out.push(entry(j, i));
            }
        }
    }
    out
}

fn space_default(i: usize, j: usize) -> ExtDist {
    if i == j {
        ExtDist::zero()
    } else {
        ExtDist::infinity()
    }
}

/// `{ "points": [...], "dist": [["a", "b", "1/2"], ...] }`. Missing pairs
/// are 0 on the diagonal and `inf` elsewhere.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceDoc {
    pub points: Vec<String>,
    #[serde(default)]
    pub dist: Vec<Entry>,
}

impl SpaceDoc {
    pub fn from_matrix(m: &DistMatrix) -> Self {
        SpaceDoc {
            points: m.points().to_vec(),
            dist: sparse_entries(m, space_default),
        }
    }

    pub fn to_matrix(&self) -> Result<DistMatrix> {
        DistMatrix::from_entries(self.points.clone(), &self.dist, space_default)
    }

    pub fn to_metric(&self) -> Result<MetricSpace> {
        MetricSpace::new(self.to_matrix()?)
    }

    pub fn to_pseudo(&self) -> Result<PseudoSpace> {
        PseudoSpace::new(self.to_matrix()?)
    }
}

/// `{ "base": <space>, "dhat": [...] }`. Missing pairs take the base distance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubcongruenceDoc {
    pub base: SpaceDoc,
    #[serde(default)]
    pub dhat: Vec<Entry>,
}

impl SubcongruenceDoc {
    pub fn from_subcongruence(s: &Subcongruence) -> Self {
        SubcongruenceDoc {
            base: SpaceDoc::from_matrix(s.base()),
            dhat: sparse_entries(s.matrix(), |i, j| s.base().dist(i, j).clone()),
        }
    }

    /// The base space and the raw `dhat` matrix, before validation.
    pub fn to_parts(&self) -> Result<(MetricSpace, DistMatrix)> {
        let base = self.base.to_metric()?;
        let dhat = DistMatrix::from_entries(base.points().to_vec(), &self.dhat, |i, j| {
            base.dist(i, j).clone()
        })?;
        Ok((base, dhat))
    }

    pub fn to_subcongruence(&self) -> Result<Subcongruence> {
        let (base, dhat) = self.to_parts()?;
        Subcongruence::new(base, dhat)
    }
}

/// `{ "space": <space>, "signature": [["mul", 2]], "tables": { "mul": [["a", "b", "c"], ...] } }`.
///
/// A table row lists the arguments followed by the result.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraDoc {
    pub space: SpaceDoc,
    pub signature: Vec<(String, usize)>,
    pub tables: BTreeMap<String, Vec<Vec<String>>>,
}

impl AlgebraDoc {
    pub fn from_algebra(a: &Algebra) -> Self {
        let carrier = a.carrier();
        let name = |i: usize| carrier.point(i).to_string();
        let mut tables = BTreeMap::new();
        for (k, s) in a.signature().symbols().iter().enumerate() {
            let rows = tuples(&vec![a.len(); s.arity])
                .into_iter()
                .map(|args| {
                    let r = a.apply(k, &args);
                    args.into_iter().chain([r]).map(name).collect()
                })
                .collect();
            tables.insert(s.name.clone(), rows);
        }
        AlgebraDoc {
            space: SpaceDoc::from_matrix(carrier),
            signature: a
                .signature()
                .symbols()
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect(),
            tables,
        }
    }

    pub fn to_algebra(&self) -> Result<Algebra> {
        let carrier = self.space.to_metric()?;
        let signature = Signature::new(self.signature.iter().cloned())?;
        if let Some(extra) = self.tables.keys().find(|k| signature.index_of(k).is_none()) {
            return Err(Error::structural(format!(
                "table for undeclared symbol {extra:?}"
            )));
        }
        let n = carrier.len();
        let mut tables = Vec::new();
        for s in signature.symbols() {
            let rows = self
                .tables
                .get(&s.name)
                .ok_or_else(|| Error::structural(format!("missing table for {:?}", s.name)))?;
            let size = n.pow(s.arity as u32);
            let mut table: Vec<Option<usize>> = vec![None; size];
            for row in rows {
                if row.len() != s.arity + 1 {
                    return Err(Error::structural(format!(
                        "row {row:?} of {:?} needs {} entries",
                        s.name,
                        s.arity + 1
                    )));
                }
                let idx = row
                    .iter()
                    .map(|p| carrier.require_index(p))
                    .collect::<Result<Vec<_>>>()?;
                let pos = idx[..s.arity].iter().fold(0, |acc, &i| acc * n + i);
                if table[pos].replace(idx[s.arity]).is_some() {
                    return Err(Error::structural(format!(
                        "duplicate row {row:?} in {:?}",
                        s.name
                    )));
                }
            }
            let table = table
                .into_iter()
                .collect::<Option<Vec<_>>>()
                .ok_or_else(|| {
                    Error::structural(format!("table for {:?} is incomplete", s.name))
                })?;
            tables.push(table);
        }
        Algebra::new(carrier, signature, tables)
    }

    pub fn to_quant(&self, limits: &Limits) -> Result<QuantAlgebra> {
        QuantAlgebra::new(self.to_algebra()?, limits)
    }
}

/// `{ "source": ..., "target": ..., "map": [["a", "x"], ...] }` with space or
/// algebra documents at both ends.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MapDoc<T> {
    pub source: T,
    pub target: T,
    pub map: Vec<(String, String)>,
}

fn resolve_map(
    source: &DistMatrix,
    target: &DistMatrix,
    pairs: &[(String, String)],
) -> Result<Vec<usize>> {
    let mut map = vec![None; source.len()];
    for (x, y) in pairs {
        let (i, j) = (source.require_index(x)?, target.require_index(y)?);
        if map[i].replace(j).is_some_and(|prev| prev != j) {
            return Err(Error::structural(format!("point {x:?} is mapped twice")));
        }
    }
    map.into_iter()
        .enumerate()
        .map(|(i, m)| {
            m.ok_or_else(|| Error::structural(format!("point {:?} is not mapped", source.point(i))))
        })
        .collect()
}

fn map_pairs(source: &DistMatrix, target: &DistMatrix, map: &[usize]) -> Vec<(String, String)> {
    map.iter()
        .enumerate()
        .map(|(i, &j)| (source.point(i).to_string(), target.point(j).to_string()))
        .collect()
}

pub type SpaceMapDoc = MapDoc<SpaceDoc>;
pub type HomDoc = MapDoc<AlgebraDoc>;

impl SpaceMapDoc {
    pub fn from_map(f: &NonexpandingMap) -> Self {
        MapDoc {
            source: SpaceDoc::from_matrix(f.source()),
            target: SpaceDoc::from_matrix(f.target()),
            map: map_pairs(f.source(), f.target(), f.map()),
        }
    }

    pub fn to_map(&self) -> Result<NonexpandingMap> {
        let (s, t) = (self.source.to_metric()?, self.target.to_metric()?);
        let map = resolve_map(&s, &t, &self.map)?;
        NonexpandingMap::new(s, t, map)
    }
}

impl HomDoc {
    pub fn from_hom(f: &Homomorphism) -> Self {
        MapDoc {
            source: AlgebraDoc::from_algebra(f.source()),
            target: AlgebraDoc::from_algebra(f.target()),
            map: map_pairs(f.source().carrier(), f.target().carrier(), f.map()),
        }
    }

    pub fn to_hom(&self, limits: &Limits) -> Result<Homomorphism> {
        let (s, t) = (self.source.to_quant(limits)?, self.target.to_quant(limits)?);
        let map = resolve_map(s.carrier(), t.carrier(), &self.map)?;
        Homomorphism::new(s, t, map)
    }
}

/// A quotient map as its target space and a class listing.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct QuotientDoc {
    pub quotient: SpaceDoc,
    /// `(representative, members)`, sorted by representative.
    pub classes: Vec<(String, Vec<String>)>,
}

impl QuotientDoc {
    pub fn from_quotient(q: &QuotientMap) -> Self {
        let src = q.source();
        let mut classes: Vec<(String, Vec<String>)> = q
            .classes()
            .into_iter()
            .enumerate()
            .map(|(c, members)| {
                (
                    q.target().point(c).to_string(),
                    members
                        .into_iter()
                        .map(|i| src.point(i).to_string())
                        .collect(),
                )
            })
            .collect();
        classes.sort();
        QuotientDoc {
            quotient: SpaceDoc::from_matrix(q.target()),
            classes,
        }
    }
}

/// `{ "vars": [...], "lhs": "...", "rhs": "...", "eps": "1/4" }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EquationDoc {
    pub vars: Vec<String>,
    pub lhs: String,
    pub rhs: String,
    pub eps: ExtDist,
}

impl EquationDoc {
    pub fn from_equation(eq: &QuantEquation) -> Self {
        EquationDoc {
            vars: eq.vars().to_vec(),
            lhs: eq.lhs().to_string(),
            rhs: eq.rhs().to_string(),
            eps: eq.eps().clone(),
        }
    }

    pub fn to_equation(&self) -> Result<QuantEquation> {
        QuantEquation::new(
            self.vars.clone(),
            self.lhs.parse()?,
            self.rhs.parse()?,
            self.eps.clone(),
        )
    }
}

/// `{ "signature": [["mul", 2]], "equations": [<equation>, ...] }`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VarietyDoc {
    pub signature: Vec<(String, usize)>,
    pub equations: Vec<EquationDoc>,
}

impl VarietyDoc {
    pub fn from_variety(v: &VarietyPresentation) -> Self {
        VarietyDoc {
            signature: v
                .signature()
                .symbols()
                .iter()
                .map(|s| (s.name.clone(), s.arity))
                .collect(),
            equations: v
                .equations()
                .iter()
                .map(EquationDoc::from_equation)
                .collect(),
        }
    }

    pub fn to_variety(&self) -> Result<VarietyPresentation> {
        let sig = Signature::new(self.signature.iter().cloned())?;
        let eqs = self
            .equations
            .iter()
            .map(EquationDoc::to_equation)
            .collect::<Result<Vec<_>>>()?;
        VarietyPresentation::new(sig, eqs)
    }
}
