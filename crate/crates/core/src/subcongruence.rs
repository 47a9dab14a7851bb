//! Subcongruences on finite metric spaces, stored as pseudometric matrices.
//!
//! A subcongruence on `X` is a pseudometric `d̂ ≤ d_X`. Its ε-level object is
//! the sublevel set `{(x, y) : d̂(x, y) ≤ ε}` with the two coordinate
//! projections, and its colimit is the metric reflection of `(X, d̂)`.

use serde::Serialize;

use crate::dist::{le, ExtDist};
use crate::error::{Error, Result};
use crate::space::{
    find_isometry, metric_reflection, product, product_many, tuple_name, validate_space,
    DistMatrix, MetricSpace, NonexpandingMap, PseudoSpace, QuotientMap, SpaceMode, SpaceViolation,
};

/// A violated subcongruence condition.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "condition", rename_all = "snake_case")]
pub enum SubcongruenceViolation {
    /// Reflexivity/symmetry/triangle failure of `d̂` itself.
    Pseudometric(SpaceViolation),
    /// `d̂(x, y) > d(x, y)`.
    ExceedsBase {
        x: String,
        y: String,
        dhat: ExtDist,
        base: ExtDist,
    },
}

impl std::fmt::Display for SubcongruenceViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubcongruenceViolation::Pseudometric(v) => write!(f, "{v}"),
            SubcongruenceViolation::ExceedsBase { x, y, dhat, base } => {
                write!(f, "dhat({x},{y}) = {dhat} > {base} = d({x},{y})")
            }
        }
    }
}

/// Checks `dhat` against all subcongruence conditions over `base`.
pub fn validate_subcongruence(
    base: &MetricSpace,
    dhat: &DistMatrix,
) -> Result<Vec<SubcongruenceViolation>> {
    if base.points() != dhat.points() {
        return Err(Error::structural("dhat and base have different point sets"));
    }
    let mut out: Vec<SubcongruenceViolation> = validate_space(dhat, SpaceMode::Pseudo)
        .into_iter()
        .map(SubcongruenceViolation::Pseudometric)
        .collect();
    let n = base.len();
    for x in 0..n {
        for y in 0..n {
            if !le(dhat.dist(x, y), base.dist(x, y)) {
                out.push(SubcongruenceViolation::ExceedsBase {
                    x: base.point(x).to_string(),
                    y: base.point(y).to_string(),
                    dhat: dhat.dist(x, y).clone(),
                    base: base.dist(x, y).clone(),
                });
            }
        }
    }
    Ok(out)
}

/// A validated subcongruence.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Subcongruence {
    base: MetricSpace,
    dhat: DistMatrix,
}

impl Subcongruence {
    pub fn new(base: MetricSpace, dhat: DistMatrix) -> Result<Self> {
        let v = validate_subcongruence(&base, &dhat)?;
        if v.is_empty() {
            Ok(Subcongruence { base, dhat })
        } else {
            Err(Error::invalid("subcongruence", v))
        }
    }

    pub(crate) fn new_unchecked(base: MetricSpace, dhat: DistMatrix) -> Self {
        Subcongruence { base, dhat }
    }

    /// Builds `d̂` from a function on base indices.
    pub fn from_fn(base: MetricSpace, f: impl Fn(usize, usize) -> ExtDist) -> Result<Self> {
        let dhat = base.with_entries(f);
        Subcongruence::new(base, dhat)
    }

    /// `d̂ = d`.
    pub fn discrete(base: &MetricSpace) -> Self {
        Subcongruence {
            base: base.clone(),
            dhat: base.matrix().clone(),
        }
    }

    pub fn base(&self) -> &MetricSpace {
        &self.base
    }

    pub fn matrix(&self) -> &DistMatrix {
        &self.dhat
    }

    pub fn dhat(&self, x: usize, y: usize) -> &ExtDist {
        self.dhat.dist(x, y)
    }

    /// `(X, d̂)` as a pseudometric space.
    pub fn pseudo_space(&self) -> PseudoSpace {
        PseudoSpace::new_unchecked(self.dhat.clone())
    }

    /// The ε-level relation `{(x, y) : d̂(x, y) ≤ ε}` in lexicographic order.
    pub fn sublevel(&self, eps: &ExtDist) -> Vec<(usize, usize)> {
        let n = self.base.len();
        (0..n)
            .flat_map(|x| (0..n).map(move |y| (x, y)))
            .filter(|&(x, y)| le(self.dhat(x, y), eps))
            .collect()
    }

    /// Whether the ε-level equals the intersection of all levels above ε.
    ///
    /// On a finite matrix the levels above ε stabilise below the smallest
    /// entry exceeding ε, so one probe halfway to that entry decides it.
    pub fn is_continuous_at(&self, eps: &ExtDist) -> bool {
        if eps.is_infinite() {
            return true;
        }
        let next = self.dhat.entries().iter().filter(|v| !le(v, eps)).min();
        let probe = match next {
            Some(v) if v.is_finite() => eps + &(v.abs_diff(eps)).halve(),
            _ => eps + &ExtDist::from_integer(1),
        };
        self.sublevel(eps) == self.sublevel(&probe)
    }
}

/// The ε-kernel pair of a map: the subspace of `X × X` (maximum metric) on
/// pairs whose images are at most ε apart, with its two projections.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct KernelPair {
    pub space: MetricSpace,
    /// `(left, right)` source indices for each point of `space`.
    pub pairs: Vec<(usize, usize)>,
}

impl KernelPair {
    pub fn left(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.0).collect()
    }

    pub fn right(&self) -> Vec<usize> {
        self.pairs.iter().map(|p| p.1).collect()
    }
}

pub fn epsilon_kernel_pair(f: &NonexpandingMap, eps: &ExtDist) -> KernelPair {
    let x = f.source();
    let y = f.target();
    let (square, coords) = product_many(&[x, x]);
    let members: Vec<usize> = (0..square.len())
        .filter(|&p| le(y.dist(f.apply(coords[p][0]), f.apply(coords[p][1])), eps))
        .collect();
    let space = square
        .subspace(&members)
        .expect("subset of distinct points");
    let pairs = members
        .iter()
        .map(|&p| (coords[p][0], coords[p][1]))
        .collect();
    KernelPair { space, pairs }
}

/// `d̂(x, y) = d(f x, f y)`: the kernel diagram of `f` as a matrix.
pub fn kernel_subcongruence(f: &NonexpandingMap) -> Subcongruence {
    let y = f.target();
    let base = f.source().clone();
    let dhat = base.with_entries(|a, b| y.dist(f.apply(a), f.apply(b)).clone());
    Subcongruence::new_unchecked(base, dhat)
}

/// The colimit map: metric reflection of `(X, d̂)`.
pub fn colimit(s: &Subcongruence) -> QuotientMap {
    metric_reflection(&s.pseudo_space())
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Discrepancy {
    pub x: String,
    pub y: String,
    pub expected: ExtDist,
    pub actual: ExtDist,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EffectivityReport {
    pub effective: bool,
    pub discrepancies: Vec<Discrepancy>,
}

/// Compares `s` with the kernel of its own colimit map.
pub fn check_effectivity(s: &Subcongruence) -> EffectivityReport {
    let q = colimit(s);
    let map = NonexpandingMap::new_unchecked(s.base.clone(), q.target().clone(), q.map().to_vec());
    let k = kernel_subcongruence(&map);
    let n = s.base.len();
    let mut discrepancies = Vec::new();
    for x in 0..n {
        for y in 0..n {
            if s.dhat(x, y) != k.dhat(x, y) {
                discrepancies.push(Discrepancy {
                    x: s.base.point(x).to_string(),
                    y: s.base.point(y).to_string(),
                    expected: s.dhat(x, y).clone(),
                    actual: k.dhat(x, y).clone(),
                });
            }
        }
    }
    EffectivityReport {
        effective: discrepancies.is_empty(),
        discrepancies,
    }
}

/// `d̂((x1,x2),(y1,y2)) = max(d̂1(x1,y1), d̂2(x2,y2))` on the product of the bases.
pub fn product_subcongruence(s1: &Subcongruence, s2: &Subcongruence) -> Subcongruence {
    let (base, coords) = product_many(&[&s1.base, &s2.base]);
    let dhat = base.with_entries(|a, b| {
        let (ca, cb) = (&coords[a], &coords[b]);
        s1.dhat(ca[0], cb[0])
            .clone()
            .max(s2.dhat(ca[1], cb[1]).clone())
    });
    Subcongruence::new_unchecked(base, dhat)
}

/// Searches for an isometry between the colimit of the product subcongruence
/// and the product of the colimits. Returns the point correspondence by name.
pub fn colimits_commute(s1: &Subcongruence, s2: &Subcongruence) -> Option<Vec<(String, String)>> {
    let left = colimit(&product_subcongruence(s1, s2));
    let right = product(colimit(s1).target(), colimit(s2).target());
    let iso = find_isometry(left.target(), &right)?;
    Some(
        iso.iter()
            .enumerate()
            .map(|(a, &b)| {
                (
                    left.target().point(a).to_string(),
                    right.point(b).to_string(),
                )
            })
            .collect(),
    )
}

/// Result of testing a candidate against the colimit's universal property.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum UniversalOutcome {
    /// `candidate = h ∘ q` with `h` nonexpanding and unique.
    Factors(NonexpandingMap),
    /// The compatibility condition `d(f' x, f' y) ≤ d̂(x, y)` fails here.
    Refused {
        x: usize,
        y: usize,
        distance: ExtDist,
        bound: ExtDist,
    },
}

/// Factors a nonexpanding `candidate` out of `base` through the colimit map `q`.
pub fn universal_property_check(
    s: &Subcongruence,
    q: &QuotientMap,
    candidate: &NonexpandingMap,
) -> Result<UniversalOutcome> {
    if candidate.source() != s.base() || q.source().matrix() != s.matrix() {
        return Err(Error::structural(
            "candidate or quotient does not match the subcongruence",
        ));
    }
    let n = s.base.len();
    let z = candidate.target();
    for x in 0..n {
        for y in (x + 1)..n {
            let distance = z.dist(candidate.apply(x), candidate.apply(y));
            if !le(distance, s.dhat(x, y)) {
                return Ok(UniversalOutcome::Refused {
                    x,
                    y,
                    distance: distance.clone(),
                    bound: s.dhat(x, y).clone(),
                });
            }
        }
    }
    // q is surjective, so h is determined by any representative of each class
    let h: Vec<usize> = q
        .classes()
        .iter()
        .map(|class| candidate.apply(class[0]))
        .collect();
    let h = NonexpandingMap::new(q.target().clone(), z.clone(), h)?;
    debug_assert!((0..n).all(|x| h.apply(q.class_of(x)) == candidate.apply(x)));
    Ok(UniversalOutcome::Factors(h))
}

/// Names an ordered pair of base points.
pub fn pair_name(base: &MetricSpace, x: usize, y: usize) -> String {
    tuple_name(&[base.point(x), base.point(y)])
}
