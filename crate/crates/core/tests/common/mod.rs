//! Oracles and instance builders shared by the integration tests.
//!
//! The oracles reimplement the reference computations from scratch and share
//! no code with the library beyond the data types.

#![allow(dead_code)]

use std::collections::BTreeSet;

use quantalg::algebra::validate_algebra;
use quantalg::random::{distance_pool, lower_toward, random_metric};
use quantalg::{Algebra, Constraint, ExtDist, Limits, MetricSpace, QuantAlgebra, Signature};
use rand::seq::SliceRandom;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn d(s: &str) -> ExtDist {
    s.parse().unwrap()
}

fn min(a: &ExtDist, b: &ExtDist) -> ExtDist {
    a.min(b).clone()
}

/// Row-major copy of a square matrix.
pub fn rows(n: usize, f: impl Fn(usize, usize) -> ExtDist) -> Vec<Vec<ExtDist>> {
    (0..n).map(|i| (0..n).map(|j| f(i, j)).collect()).collect()
}

/// Textbook Floyd–Warshall.
pub fn floyd_warshall(mut m: Vec<Vec<ExtDist>>) -> Vec<Vec<ExtDist>> {
    let n = m.len();
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                let via = &m[i][k] + &m[k][j];
                if via < m[i][j] {
                    m[i][j] = via;
                }
            }
        }
    }
    m
}

/// `min(base, constraints)` with a zero diagonal.
pub fn constrained_base(base: &MetricSpace, constraints: &[Constraint]) -> Vec<Vec<ExtDist>> {
    let mut m = rows(base.len(), |i, j| base.dist(i, j).clone());
    for c in constraints {
        m[c.x][c.y] = min(&m[c.x][c.y], &c.eps);
        m[c.y][c.x] = min(&m[c.y][c.x], &c.eps);
    }
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = ExtDist::zero();
    }
    m
}

/// Every sum of input values up to `cap`, including 0.
fn sums_up_to(inputs: &[ExtDist], cap: &ExtDist) -> Vec<ExtDist> {
    let mut values: BTreeSet<ExtDist> = BTreeSet::from([ExtDist::zero()]);
    loop {
        let mut added = false;
        let current: Vec<ExtDist> = values.iter().cloned().collect();
        for a in &current {
            for b in inputs {
                let s = a + b;
                if s <= *cap && values.insert(s) {
                    added = true;
                }
            }
        }
        if !added {
            return values.into_iter().collect();
        }
    }
}

/// A matrix satisfies every congruence condition on `alg` below `upper`.
fn is_valid_congruence(alg: &Algebra, upper: &[Vec<ExtDist>], m: &[Vec<ExtDist>]) -> bool {
    let n = m.len();
    for i in 0..n {
        for j in 0..n {
            if m[i][j] > upper[i][j] || m[i][j] != m[j][i] {
                return false;
            }
            for k in 0..n {
                if m[i][j] > &m[i][k] + &m[k][j] {
                    return false;
                }
            }
        }
    }
    for (s, sym) in alg.signature().symbols().iter().enumerate() {
        let args = all_tuples(n, sym.arity);
        for a in &args {
            for b in &args {
                let bound = a
                    .iter()
                    .zip(b)
                    .map(|(&x, &y)| m[x][y].clone())
                    .max()
                    .unwrap_or_else(ExtDist::zero);
                if m[alg.apply(s, a)][alg.apply(s, b)] > bound {
                    return false;
                }
            }
        }
    }
    true
}

pub fn all_tuples(n: usize, arity: usize) -> Vec<Vec<usize>> {
    let mut out = vec![vec![]];
    for _ in 0..arity {
        out = out
            .into_iter()
            .flat_map(|t| {
                (0..n).map(move |x| {
                    let mut t = t.clone();
                    t.push(x);
                    t
                })
            })
            .collect();
    }
    out
}

/// Greatest congruence matrix below `base` and the constraints, by enumerating
/// every symmetric zero-diagonal matrix over the finite sums of the inputs
/// and taking the pointwise maximum of the valid ones.
///
/// Requires finite base distances: every entry of the answer is then a finite
/// sum of input values bounded by the largest base distance.
pub fn brute_force_congruence(alg: &Algebra, constraints: &[Constraint]) -> Vec<Vec<ExtDist>> {
    let base = alg.carrier();
    let n = base.len();
    let upper = constrained_base(base, constraints);
    let mut inputs: Vec<ExtDist> = upper
        .iter()
        .flatten()
        .filter(|v| !v.is_zero())
        .cloned()
        .collect();
    inputs.sort();
    inputs.dedup();
    assert!(
        inputs.iter().all(ExtDist::is_finite),
        "oracle needs finite inputs"
    );
    let cap = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| base.dist(i, j).clone())
        .max()
        .unwrap();
    let values = sums_up_to(&inputs, &cap);
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .collect();
    let mut best = rows(n, |_, _| ExtDist::zero());
    let mut choice = vec![0usize; pairs.len()];
    loop {
        let mut m = rows(n, |_, _| ExtDist::zero());
        for (&(i, j), &c) in pairs.iter().zip(&choice) {
            m[i][j] = values[c].clone();
            m[j][i] = values[c].clone();
        }
        if is_valid_congruence(alg, &upper, &m) {
            for i in 0..n {
                for j in 0..n {
                    if m[i][j] > best[i][j] {
                        best[i][j] = m[i][j].clone();
                    }
                }
            }
        }
        // odometer step
        let mut k = 0;
        loop {
            if k == choice.len() {
                return best;
            }
            choice[k] += 1;
            if choice[k] < values.len() {
                break;
            }
            choice[k] = 0;
            k += 1;
        }
    }
}

/// Partition generated by `pairs` and closed under the operations of `alg`.
pub fn union_find_congruence(alg: &Algebra, pairs: &[(usize, usize)]) -> Vec<usize> {
    let n = alg.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(p: &mut Vec<usize>, x: usize) -> usize {
        if p[x] != x {
            let r = find(p, p[x]);
            p[x] = r;
        }
        p[x]
    }
    fn union(p: &mut Vec<usize>, a: usize, b: usize) -> bool {
        let (ra, rb) = (find(p, a), find(p, b));
        if ra == rb {
            return false;
        }
        p[ra.max(rb)] = ra.min(rb);
        true
    }
    for &(a, b) in pairs {
        union(&mut parent, a, b);
    }
    loop {
        let mut changed = false;
        for (s, sym) in alg.signature().symbols().iter().enumerate() {
            let args = all_tuples(n, sym.arity);
            for a in &args {
                for b in &args {
                    if a.iter()
                        .zip(b)
                        .all(|(&x, &y)| find(&mut parent, x) == find(&mut parent, y))
                    {
                        changed |= union(&mut parent, alg.apply(s, a), alg.apply(s, b));
                    }
                }
            }
        }
        if !changed {
            return (0..n).map(|x| find(&mut parent, x)).collect();
        }
    }
}

/// A valid algebra on `n ≤ 3` points with finite distances and at most one
/// binary symbol. Half the time the metric is uniform, which makes every table
/// valid; otherwise random pool metrics are sampled until the table fits.
pub fn tiny_algebra<R: Rng>(rng: &mut R, with_symbol: bool) -> QuantAlgebra {
    let limits = Limits::default();
    let sig = if with_symbol {
        Signature::new([("mul", 2)]).unwrap()
    } else {
        Signature::empty()
    };
    let n = rng.gen_range(1..=3);
    let tables: Vec<Vec<usize>> = sig
        .symbols()
        .iter()
        .map(|_| (0..n * n).map(|_| rng.gen_range(0..n)).collect())
        .collect();
    let uniform = rng.gen_bool(0.5);
    for attempt in 0.. {
        let space = if uniform || attempt >= 200 {
            let c = pool().choose(rng).unwrap().clone();
            let m = quantalg::DistMatrix::from_fn(quantalg::random::point_names("p", n), |i, j| {
                if i == j {
                    ExtDist::zero()
                } else {
                    c.clone()
                }
            })
            .unwrap();
            MetricSpace::new(m).unwrap()
        } else {
            random_metric(rng, "p", n, 0.0)
        };
        let alg = Algebra::new(space, sig.clone(), tables.clone()).unwrap();
        if validate_algebra(&alg, &limits).unwrap().is_empty() {
            return QuantAlgebra::new(alg, &limits).unwrap();
        }
    }
    unreachable!()
}

pub fn random_constraints<R: Rng>(rng: &mut R, n: usize, values: &[ExtDist]) -> Vec<Constraint> {
    (0..rng.gen_range(1..=3))
        .map(|_| {
            Constraint::new(
                rng.gen_range(0..n),
                rng.gen_range(0..n),
                values.choose(rng).unwrap().clone(),
            )
        })
        .collect()
}

pub fn epsilon_values() -> Vec<ExtDist> {
    ["0", "1/2", "1", "3/2", "2"].iter().map(|s| d(s)).collect()
}

pub fn monoid_signature() -> Signature {
    Signature::new([("mul", 2), ("e", 0)]).unwrap()
}

/// A member of the 1-commutative monoid variety, built from one of a few
/// monoid tables on `n` points and a random metric, then made valid by
/// taking the greatest compatible metric below it.
pub fn random_monoid_member<R: Rng>(rng: &mut R, n: usize) -> QuantAlgebra {
    let sig = monoid_signature();
    let e_idx = sig.index_of("e").unwrap();
    // p0..p{n-1} sort lexicographically, which matches numeric order for n ≤ 10
    let kind = rng.gen_range(0..3);
    let mul = |x: usize, y: usize| match kind {
        0 => (x + y) % n,
        1 => x.max(y),
        _ => {
            if x == 0 {
                y
            } else {
                x
            }
        }
    };
    let mut tables = vec![Vec::new(); 2];
    tables[e_idx] = vec![0];
    tables[1 - e_idx] = all_tuples(n, 2).iter().map(|t| mul(t[0], t[1])).collect();
    let target = random_metric(rng, "p", n, 0.2);
    let mut extra = Vec::new();
    if kind == 2 {
        for x in 1..n {
            for y in x + 1..n {
                extra.push(Constraint::new(x, y, ExtDist::from_integer(1)));
            }
        }
    }
    lower_toward(&sig, tables, &target, &extra, &Limits::default()).unwrap()
}

pub fn pool() -> Vec<ExtDist> {
    distance_pool()
}
