//! Finite extended (pseudo)metric spaces and the basic constructions on them.
//!
//! Points are named by strings and always stored in lexicographic order, so a
//! space has exactly one matrix layout. Indices into [`DistMatrix::points`] are
//! the currency of every other module.

use std::collections::BTreeMap;
use std::ops::Deref;

use serde::Serialize;

use crate::dist::{le, ExtDist};
use crate::error::{Error, Result};

/// A square matrix of distances over a sorted list of distinct point names.
///
/// No axioms are assumed; see [`validate_space`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DistMatrix {
    points: Vec<String>,
    d: Vec<ExtDist>,
}

impl DistMatrix {
    /// Builds a matrix from rows laid out in the order of `points`.
    pub fn new(points: Vec<String>, rows: Vec<Vec<ExtDist>>) -> Result<Self> {
        let n = points.len();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::structural(format!(
                "distance matrix is not {n}x{n} over the declared points"
            )));
        }
        Self::from_fn(points, |i, j| rows[i][j].clone())
    }

    /// Builds a matrix from a distance function on positions of `points`
    /// (before sorting). Fails on duplicate names.
    pub fn from_fn(
        points: Vec<String>,
        mut f: impl FnMut(usize, usize) -> ExtDist,
    ) -> Result<Self> {
        let n = points.len();
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| points[a].cmp(&points[b]));
        for w in order.windows(2) {
            if points[w[0]] == points[w[1]] {
                return Err(Error::structural(format!(
                    "duplicate point {:?}",
                    points[w[0]]
                )));
            }
        }
        let mut d = Vec::with_capacity(n * n);
        for &i in &order {
            for &j in &order {
                d.push(f(i, j));
            }
        }
        let points = order.iter().map(|&i| points[i].clone()).collect();
        Ok(DistMatrix { points, d })
    }

    /// Builds a matrix from explicit `(x, y, d)` entries.
    ///
    /// An entry for `(x, y)` also sets `(y, x)` unless that pair is listed
    /// explicitly. Unlisted pairs take `default(i, j)` (positions in `points`).
    pub fn from_entries(
        points: Vec<String>,
        entries: &[(String, String, ExtDist)],
        default: impl Fn(usize, usize) -> ExtDist,
    ) -> Result<Self> {
        let pos: BTreeMap<&str, usize> = points
            .iter()
            .enumerate()
            .map(|(i, p)| (p.as_str(), i))
            .collect();
        if pos.len() != points.len() {
            return Err(Error::structural("duplicate point in point list"));
        }
        let lookup = |name: &str| {
            pos.get(name)
                .copied()
                .ok_or_else(|| Error::structural(format!("unknown point {name:?}")))
        };
        let mut explicit: BTreeMap<(usize, usize), ExtDist> = BTreeMap::new();
        for (x, y, v) in entries {
            let key = (lookup(x)?, lookup(y)?);
            if let Some(prev) = explicit.insert(key, v.clone()) {
                if &prev != v {
                    return Err(Error::structural(format!(
                        "conflicting entries for ({x}, {y})"
                    )));
                }
            }
        }
        Self::from_fn(points, |i, j| {
            explicit
                .get(&(i, j))
                .or_else(|| explicit.get(&(j, i)))
                .cloned()
                .unwrap_or_else(|| default(i, j))
        })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[String] {
        &self.points
    }

    pub fn point(&self, i: usize) -> &str {
        &self.points[i]
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.points.binary_search_by(|p| p.as_str().cmp(name)).ok()
    }

    pub(crate) fn require_index(&self, name: &str) -> Result<usize> {
        self.index_of(name)
            .ok_or_else(|| Error::structural(format!("unknown point {name:?}")))
    }

    pub fn dist(&self, i: usize, j: usize) -> &ExtDist {
        &self.d[i * self.points.len() + j]
    }

    /// Row-major entries.
    pub fn entries(&self) -> &[ExtDist] {
        &self.d
    }

    /// Restriction to the given point indices (any order, duplicates rejected).
    pub fn subspace(&self, indices: &[usize]) -> Result<DistMatrix> {
        let names = indices.iter().map(|&i| self.points[i].clone()).collect();
        DistMatrix::from_fn(names, |a, b| self.dist(indices[a], indices[b]).clone())
    }

    /// Same points, entries replaced by `f(i, j)` (indices in this layout).
    pub(crate) fn with_entries(&self, f: impl Fn(usize, usize) -> ExtDist) -> DistMatrix {
        let n = self.len();
        let mut d = Vec::with_capacity(n * n);
        for i in 0..n {
            for j in 0..n {
                d.push(f(i, j));
            }
        }
        DistMatrix {
            points: self.points.clone(),
            d,
        }
    }
}

/// Which axiom set [`validate_space`] checks.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SpaceMode {
    Metric,
    Pseudo,
}

/// One failed axiom with its witnessing points.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "axiom", rename_all = "snake_case")]
pub enum SpaceViolation {
    Diagonal {
        x: String,
        value: ExtDist,
    },
    Symmetry {
        x: String,
        y: String,
        forward: ExtDist,
        backward: ExtDist,
    },
    Triangle {
        x: String,
        y: String,
        z: String,
        direct: ExtDist,
        via: ExtDist,
    },
    Separation {
        x: String,
        y: String,
    },
}

impl std::fmt::Display for SpaceViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SpaceViolation::Diagonal { x, value } => write!(f, "d({x},{x}) = {value} != 0"),
            SpaceViolation::Symmetry {
                x,
                y,
                forward,
                backward,
            } => {
                write!(f, "d({x},{y}) = {forward} != {backward} = d({y},{x})")
            }
            SpaceViolation::Triangle {
                x,
                y,
                z,
                direct,
                via,
            } => {
                write!(f, "d({x},{z}) = {direct} > {via} = d({x},{y}) + d({y},{z})")
            }
            SpaceViolation::Separation { x, y } => write!(f, "d({x},{y}) = 0 for distinct points"),
        }
    }
}

/// Every violated axiom of `m` under `mode`; empty iff the axioms hold.
///
/// Triangle violations are reported once per unordered outer pair (`x < z`).
pub fn validate_space(m: &DistMatrix, mode: SpaceMode) -> Vec<SpaceViolation> {
    let n = m.len();
    let name = |i: usize| m.point(i).to_string();
    let mut out = Vec::new();
    for i in 0..n {
        if !m.dist(i, i).is_zero() {
            out.push(SpaceViolation::Diagonal {
                x: name(i),
                value: m.dist(i, i).clone(),
            });
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if m.dist(i, j) != m.dist(j, i) {
                out.push(SpaceViolation::Symmetry {
                    x: name(i),
                    y: name(j),
                    forward: m.dist(i, j).clone(),
                    backward: m.dist(j, i).clone(),
                });
            }
            if mode == SpaceMode::Metric && (m.dist(i, j).is_zero() || m.dist(j, i).is_zero()) {
                out.push(SpaceViolation::Separation {
                    x: name(i),
                    y: name(j),
                });
            }
        }
    }
    for x in 0..n {
        for z in (x + 1)..n {
            let direct = m.dist(x, z);
            if direct.is_zero() {
                continue;
            }
            for y in 0..n {
                if y == x || y == z {
                    continue;
                }
                let via = m.dist(x, y) + m.dist(y, z);
                if !le(direct, &via) {
                    out.push(SpaceViolation::Triangle {
                        x: name(x),
                        y: name(y),
                        z: name(z),
                        direct: direct.clone(),
                        via,
                    });
                }
            }
        }
    }
    out
}

/// A validated pseudometric space: distinct points may be at distance 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PseudoSpace(DistMatrix);

/// A validated extended metric space.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct MetricSpace(DistMatrix);

impl PseudoSpace {
    pub fn new(m: DistMatrix) -> Result<Self> {
        let v = validate_space(&m, SpaceMode::Pseudo);
        if v.is_empty() {
            Ok(PseudoSpace(m))
        } else {
            Err(Error::invalid("pseudometric space", v))
        }
    }

    pub(crate) fn new_unchecked(m: DistMatrix) -> Self {
        PseudoSpace(m)
    }

    pub fn matrix(&self) -> &DistMatrix {
        &self.0
    }
}

impl MetricSpace {
    pub fn new(m: DistMatrix) -> Result<Self> {
        let v = validate_space(&m, SpaceMode::Metric);
        if v.is_empty() {
            Ok(MetricSpace(m))
        } else {
            Err(Error::invalid("metric space", v))
        }
    }

    pub(crate) fn new_unchecked(m: DistMatrix) -> Self {
        MetricSpace(m)
    }

    /// Discrete space: all distinct points at distance ∞.
    pub fn discrete<S: Into<String>>(points: impl IntoIterator<Item = S>) -> Result<Self> {
        let points: Vec<String> = points.into_iter().map(Into::into).collect();
        let m = DistMatrix::from_fn(points, |i, j| {
            if i == j {
                ExtDist::zero()
            } else {
                ExtDist::infinity()
            }
        })?;
        Ok(MetricSpace(m))
    }

    /// The one-point space with the given name.
    pub fn singleton(name: &str) -> Self {
        MetricSpace(DistMatrix {
            points: vec![name.to_string()],
            d: vec![ExtDist::zero()],
        })
    }

    pub fn matrix(&self) -> &DistMatrix {
        &self.0
    }

    pub fn as_pseudo(&self) -> PseudoSpace {
        PseudoSpace(self.0.clone())
    }

    /// The subspace on the given points.
    pub fn subspace(&self, indices: &[usize]) -> Result<MetricSpace> {
        Ok(MetricSpace(self.0.subspace(indices)?))
    }
}

impl Deref for PseudoSpace {
    type Target = DistMatrix;
    fn deref(&self) -> &DistMatrix {
        &self.0
    }
}

impl Deref for MetricSpace {
    type Target = DistMatrix;
    fn deref(&self) -> &DistMatrix {
        &self.0
    }
}

/// A total map between metric spaces that does not increase distances.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NonexpandingMap {
    source: MetricSpace,
    target: MetricSpace,
    map: Vec<usize>,
}

impl NonexpandingMap {
    pub fn new(source: MetricSpace, target: MetricSpace, map: Vec<usize>) -> Result<Self> {
        if map.len() != source.len() || map.iter().any(|&y| y >= target.len()) {
            return Err(Error::structural(
                "map is not a total function between the carriers",
            ));
        }
        if let Some((x, y)) = expanding_pair(&source, &target, &map) {
            return Err(Error::invalid(
                "nonexpanding map",
                [format!(
                    "d(f({a}), f({b})) = {} > {} = d({a}, {b})",
                    target.dist(map[x], map[y]),
                    source.dist(x, y),
                    a = source.point(x),
                    b = source.point(y)
                )],
            ));
        }
        Ok(NonexpandingMap {
            source,
            target,
            map,
        })
    }

    pub(crate) fn new_unchecked(source: MetricSpace, target: MetricSpace, map: Vec<usize>) -> Self {
        NonexpandingMap {
            source,
            target,
            map,
        }
    }

    pub fn identity(space: &MetricSpace) -> Self {
        NonexpandingMap {
            source: space.clone(),
            target: space.clone(),
            map: (0..space.len()).collect(),
        }
    }

    pub fn source(&self) -> &MetricSpace {
        &self.source
    }

    pub fn target(&self) -> &MetricSpace {
        &self.target
    }

    pub fn map(&self) -> &[usize] {
        &self.map
    }

    pub fn apply(&self, x: usize) -> usize {
        self.map[x]
    }

    /// `other ∘ self`.
    pub fn then(&self, other: &NonexpandingMap) -> Result<NonexpandingMap> {
        if self.target != other.source {
            return Err(Error::structural("maps are not composable"));
        }
        Ok(NonexpandingMap {
            source: self.source.clone(),
            target: other.target.clone(),
            map: self.map.iter().map(|&y| other.map[y]).collect(),
        })
    }

    pub fn is_surjective(&self) -> bool {
        is_surjective(&self.map, self.target.len())
    }

    /// Distance-preserving on every pair (hence injective on a metric space).
    pub fn is_isometric(&self) -> bool {
        is_isometric(&self.source, &self.target, &self.map)
    }
}

pub(crate) fn expanding_pair(
    source: &DistMatrix,
    target: &DistMatrix,
    map: &[usize],
) -> Option<(usize, usize)> {
    let n = source.len();
    for x in 0..n {
        for y in (x + 1)..n {
            if !le(target.dist(map[x], map[y]), source.dist(x, y)) {
                return Some((x, y));
            }
        }
    }
    None
}

pub(crate) fn is_surjective(map: &[usize], target_len: usize) -> bool {
    let mut hit = vec![false; target_len];
    for &y in map {
        hit[y] = true;
    }
    hit.into_iter().all(|h| h)
}

pub(crate) fn is_isometric(source: &DistMatrix, target: &DistMatrix, map: &[usize]) -> bool {
    let n = source.len();
    (0..n).all(|x| (0..n).all(|y| target.dist(map[x], map[y]) == source.dist(x, y)))
}

/// The canonical surjection of a pseudometric space onto its metric reflection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuotientMap {
    source: PseudoSpace,
    target: MetricSpace,
    class_of: Vec<usize>,
}

impl QuotientMap {
    pub fn source(&self) -> &PseudoSpace {
        &self.source
    }

    pub fn target(&self) -> &MetricSpace {
        &self.target
    }

    pub fn class_of(&self, x: usize) -> usize {
        self.class_of[x]
    }

    pub fn map(&self) -> &[usize] {
        &self.class_of
    }

    /// Source indices per target point, in target order.
    pub fn classes(&self) -> Vec<Vec<usize>> {
        let mut out = vec![Vec::new(); self.target.len()];
        for (x, &c) in self.class_of.iter().enumerate() {
            out[c].push(x);
        }
        out
    }

    /// Whether `d_target(q x, q y) = d_source(x, y)` for every pair.
    pub fn preserves_distances(&self) -> bool {
        is_isometric(&self.source, &self.target, &self.class_of)
    }
}

/// Identifies points at distance 0. Each class is named after its least member.
pub fn metric_reflection(p: &PseudoSpace) -> QuotientMap {
    let n = p.len();
    let mut rep = vec![usize::MAX; n];
    let mut reps = Vec::new();
    for x in 0..n {
        if rep[x] != usize::MAX {
            continue;
        }
        // zero distance is an equivalence on a pseudometric, so one scan suffices
        let class = reps.len();
        for (y, slot) in rep.iter_mut().enumerate().skip(x) {
            if *slot == usize::MAX && p.dist(x, y).is_zero() {
                *slot = class;
            }
        }
        reps.push(x);
    }
    // reps are increasing in source order, so names stay sorted
    let target = MetricSpace(DistMatrix {
        points: reps.iter().map(|&r| p.point(r).to_string()).collect(),
        d: reps
            .iter()
            .flat_map(|&a| reps.iter().map(move |&b| (a, b)))
            .map(|(a, b)| p.dist(a, b).clone())
            .collect(),
    });
    QuotientMap {
        source: p.clone(),
        target,
        class_of: rep,
    }
}

pub(crate) fn tuple_name<S: AsRef<str>>(parts: &[S]) -> String {
    let inner: Vec<&str> = parts.iter().map(|s| s.as_ref()).collect();
    format!("({})", inner.join(","))
}

/// All coordinate tuples of the cartesian product of sets of the given sizes,
/// in lexicographic order.
pub(crate) fn tuples(sizes: &[usize]) -> Vec<Vec<usize>> {
    let total: usize = sizes.iter().product();
    let mut out = Vec::with_capacity(total);
    let mut cur = vec![0; sizes.len()];
    if sizes.contains(&0) {
        return out;
    }
    loop {
        out.push(cur.clone());
        let mut k = sizes.len();
        loop {
            if k == 0 {
                return out;
            }
            k -= 1;
            cur[k] += 1;
            if cur[k] < sizes[k] {
                break;
            }
            cur[k] = 0;
        }
    }
}

fn combine_spaces(
    spaces: &[&MetricSpace],
    combine: impl Fn(&[&ExtDist]) -> ExtDist,
) -> (MetricSpace, Vec<Vec<usize>>) {
    let sizes: Vec<usize> = spaces.iter().map(|s| s.len()).collect();
    let coords = tuples(&sizes);
    let names: Vec<String> = coords
        .iter()
        .map(|c| {
            tuple_name(
                &c.iter()
                    .zip(spaces)
                    .map(|(&i, s)| s.point(i))
                    .collect::<Vec<_>>(),
            )
        })
        .collect();
    let m = DistMatrix::from_fn(names.clone(), |a, b| {
        let parts: Vec<&ExtDist> = spaces
            .iter()
            .enumerate()
            .map(|(k, s)| s.dist(coords[a][k], coords[b][k]))
            .collect();
        combine(&parts)
    })
    .expect("tuple names are distinct");
    let by_name: BTreeMap<&str, usize> = names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.as_str(), i))
        .collect();
    let sorted_coords = m
        .points()
        .iter()
        .map(|name| coords[by_name[name.as_str()]].clone())
        .collect();
    (MetricSpace(m), sorted_coords)
}

/// Cartesian product with the maximum metric; also returns the coordinates of
/// each product point.
pub fn product_many(spaces: &[&MetricSpace]) -> (MetricSpace, Vec<Vec<usize>>) {
    combine_spaces(spaces, |ds| {
        ds.iter()
            .map(|d| (*d).clone())
            .max()
            .unwrap_or_else(ExtDist::zero)
    })
}

/// Cartesian product with the maximum metric.
pub fn product(s1: &MetricSpace, s2: &MetricSpace) -> MetricSpace {
    product_many(&[s1, s2]).0
}

/// Cartesian product with the addition metric; also returns coordinates.
pub fn tensor_many(spaces: &[&MetricSpace]) -> (MetricSpace, Vec<Vec<usize>>) {
    combine_spaces(spaces, |ds| {
        ds.iter().fold(ExtDist::zero(), |acc, d| &acc + *d)
    })
}

/// Cartesian product with the addition metric.
pub fn tensor(s1: &MetricSpace, s2: &MetricSpace) -> MetricSpace {
    tensor_many(&[s1, s2]).0
}

/// Disjoint union, points tagged `"{k}:{name}"`; summands sit at distance ∞.
///
/// Returns the space and, per summand, the image of each point under the injection.
pub fn coproduct(spaces: &[MetricSpace]) -> (MetricSpace, Vec<Vec<usize>>) {
    let mut names = Vec::new();
    let mut origin = Vec::new();
    for (k, s) in spaces.iter().enumerate() {
        for i in 0..s.len() {
            names.push(format!("{k}:{}", s.point(i)));
            origin.push((k, i));
        }
    }
    let m = DistMatrix::from_fn(names.clone(), |a, b| {
        let ((ka, ia), (kb, ib)) = (origin[a], origin[b]);
        if ka == kb {
            spaces[ka].dist(ia, ib).clone()
        } else {
            ExtDist::infinity()
        }
    })
    .expect("tagged names are distinct");
    let injections = spaces
        .iter()
        .enumerate()
        .map(|(k, s)| {
            (0..s.len())
                .map(|i| {
                    m.index_of(&format!("{k}:{}", s.point(i)))
                        .expect("tagged point present")
                })
                .collect()
        })
        .collect();
    (MetricSpace(m), injections)
}

/// Classes of the relation `d(x, y) < ∞`, each sorted, ordered by least member.
pub fn connected_components(s: &MetricSpace) -> Vec<Vec<usize>> {
    let n = s.len();
    let mut seen = vec![false; n];
    let mut out = Vec::new();
    for x in 0..n {
        if seen[x] {
            continue;
        }
        let class: Vec<usize> = (x..n)
            .filter(|&y| !seen[y] && s.dist(x, y).is_finite())
            .collect();
        for &y in &class {
            seen[y] = true;
        }
        out.push(class);
    }
    out
}

/// Searches for a distance-preserving bijection `a → b` by backtracking.
pub fn find_isometry(a: &DistMatrix, b: &DistMatrix) -> Option<Vec<usize>> {
    let n = a.len();
    if n != b.len() {
        return None;
    }
    let profile = |m: &DistMatrix, i: usize| {
        let mut row: Vec<&ExtDist> = (0..m.len()).map(|j| m.dist(i, j)).collect();
        row.sort();
        row.into_iter().cloned().collect::<Vec<_>>()
    };
    let pa: Vec<_> = (0..n).map(|i| profile(a, i)).collect();
    let pb: Vec<_> = (0..n).map(|i| profile(b, i)).collect();
    let mut assign = vec![usize::MAX; n];
    let mut used = vec![false; n];

    fn go(
        k: usize,
        a: &DistMatrix,
        b: &DistMatrix,
        pa: &[Vec<ExtDist>],
        pb: &[Vec<ExtDist>],
        assign: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        let n = a.len();
        if k == n {
            return true;
        }
        for cand in 0..n {
            if used[cand] || pa[k] != pb[cand] {
                continue;
            }
            if (0..k).all(|j| a.dist(k, j) == b.dist(cand, assign[j])) {
                assign[k] = cand;
                used[cand] = true;
                if go(k + 1, a, b, pa, pb, assign, used) {
                    return true;
                }
                used[cand] = false;
            }
        }
        false
    }

    if go(0, a, b, &pa, &pb, &mut assign, &mut used) {
        Some(assign)
    } else {
        None
    }
}
