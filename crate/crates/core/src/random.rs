//! Random generators for valid finite instances.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::algebra::{
    enumerate_homomorphisms, subalgebra_generated, Algebra, Homomorphism, QuantAlgebra,
};
use crate::closure::{close, default_pass_cap, generated_congruence, quotient_algebra, Constraint};
use crate::dist::{le, ExtDist};
use crate::error::{Limits, Result};
use crate::space::{expanding_pair, DistMatrix, MetricSpace};
use crate::subcongruence::Subcongruence;
use crate::term::Signature;

/// Positive distances drawn by the generators.
pub fn distance_pool() -> Vec<ExtDist> {
    [(1, 3), (1, 2), (2, 3), (1, 1), (3, 2), (2, 1)]
        .into_iter()
        .map(|(p, q)| ExtDist::ratio(p, q))
        .collect()
}

pub fn point_names(prefix: &str, n: usize) -> Vec<String> {
    (0..n).map(|i| format!("{prefix}{i}")).collect()
}

fn min<'a>(a: &'a ExtDist, b: &'a ExtDist) -> &'a ExtDist {
    if le(a, b) {
        a
    } else {
        b
    }
}

/// Shortest-path closure of a symmetric matrix with zero diagonal.
fn shortest_paths(n: usize, d: Vec<ExtDist>) -> Vec<ExtDist> {
    close(n, d, &Vec::new(), default_pass_cap(n, 0)).expect("shortest paths converge")
}

fn symmetric(n: usize, mut f: impl FnMut(usize, usize) -> ExtDist) -> Vec<ExtDist> {
    let mut d = vec![ExtDist::zero(); n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = f(i, j);
            d[i * n + j] = v.clone();
            d[j * n + i] = v;
        }
    }
    d
}

/// A metric on `n` points: random pool distances, each pair infinite with
/// probability `inf_prob`, closed under shortest paths.
pub fn random_metric<R: Rng>(rng: &mut R, prefix: &str, n: usize, inf_prob: f64) -> MetricSpace {
    let pool = distance_pool();
    let d = shortest_paths(
        n,
        symmetric(n, |_, _| {
            if rng.gen_bool(inf_prob) {
                ExtDist::infinity()
            } else {
                pool.choose(rng).expect("pool is nonempty").clone()
            }
        }),
    );
    let m = DistMatrix::from_fn(point_names(prefix, n), |i, j| d[i * n + j].clone())
        .expect("distinct names");
    MetricSpace::new(m).expect("shortest-path closure of positive weights is a metric")
}

/// All off-diagonal distances infinite; every operation table is nonexpanding.
pub fn disconnected(prefix: &str, n: usize) -> MetricSpace {
    let m = DistMatrix::from_fn(point_names(prefix, n), |i, j| {
        if i == j {
            ExtDist::zero()
        } else {
            ExtDist::infinity()
        }
    })
    .expect("distinct names");
    MetricSpace::new(m).expect("disconnected spaces are metric")
}

/// A subcongruence on `base`: each pair lowered to a random value (often 0),
/// then closed under shortest paths.
pub fn random_subcongruence<R: Rng>(rng: &mut R, base: &MetricSpace) -> Subcongruence {
    let n = base.len();
    let mut pool = distance_pool();
    pool.push(ExtDist::zero());
    pool.push(ExtDist::zero());
    pool.push(ExtDist::infinity());
    let d = shortest_paths(
        n,
        symmetric(n, |i, j| {
            min(base.dist(i, j), pool.choose(rng).expect("pool is nonempty")).clone()
        }),
    );
    Subcongruence::from_fn(base.clone(), |i, j| d[i * n + j].clone())
        .expect("closure stays below the base")
}

/// Up to `max_symbols` symbols named `f`, `g`, `h`, ... with arities `0..=max_arity`.
pub fn random_signature<R: Rng>(rng: &mut R, max_symbols: usize, max_arity: usize) -> Signature {
    let count = rng.gen_range(1..=max_symbols);
    Signature::new(
        ["f", "g", "h", "k"]
            .iter()
            .take(count)
            .map(|&name| (name, rng.gen_range(0..=max_arity))),
    )
    .expect("distinct symbol names")
}

pub fn random_tables<R: Rng>(rng: &mut R, n: usize, sig: &Signature) -> Vec<Vec<usize>> {
    sig.symbols()
        .iter()
        .map(|s| {
            (0..n.pow(s.arity as u32))
                .map(|_| rng.gen_range(0..n))
                .collect()
        })
        .collect()
}

/// Lowers the disconnected metric on `tables` toward `target` and takes the
/// quotient, which is a valid algebra with at most `n` points.
pub fn lower_toward(
    sig: &Signature,
    tables: Vec<Vec<usize>>,
    target: &MetricSpace,
    extra: &[Constraint],
    limits: &Limits,
) -> Result<QuantAlgebra> {
    let n = target.len();
    let alg = Algebra::new(disconnected("p", n), sig.clone(), tables)?;
    let alg = QuantAlgebra::new(alg, limits)?;
    let mut constraints: Vec<Constraint> = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let (a, b) = (target.point(i), target.point(j));
            let (x, y) = (alg.carrier().index_of(a), alg.carrier().index_of(b));
            if let (Some(x), Some(y)) = (x, y) {
                constraints.push(Constraint::new(x, y, target.dist(i, j).clone()));
            }
        }
    }
    constraints.extend_from_slice(extra);
    let c = generated_congruence(&alg, &constraints, limits)?;
    Ok(quotient_algebra(&c)?.0)
}

/// A random valid algebra with at most `n` points.
pub fn random_algebra<R: Rng>(
    rng: &mut R,
    n: usize,
    sig: &Signature,
    limits: &Limits,
) -> Result<QuantAlgebra> {
    let tables = random_tables(rng, n, sig);
    let target = random_metric(rng, "p", n, 0.2);
    lower_toward(sig, tables, &target, &[], limits)
}

/// A surjection out of `a` onto the quotient by a random generated congruence.
pub fn random_quotient<R: Rng>(
    rng: &mut R,
    a: &QuantAlgebra,
    limits: &Limits,
) -> Result<Homomorphism> {
    let n = a.len();
    let mut constraints = Vec::new();
    let pool = distance_pool();
    for _ in 0..rng.gen_range(0..=n) {
        let (x, y) = (rng.gen_range(0..n), rng.gen_range(0..n));
        let eps = if rng.gen_bool(0.4) {
            ExtDist::zero()
        } else {
            pool.choose(rng).expect("nonempty").clone()
        };
        constraints.push(Constraint::new(x, y, eps));
    }
    let c = generated_congruence(a, &constraints, limits)?;
    Ok(quotient_algebra(&c)?.1)
}

/// Inclusion of the subalgebra generated by a random nonempty seed.
pub fn random_inclusion<R: Rng>(rng: &mut R, a: &QuantAlgebra) -> Result<Homomorphism> {
    let k = rng.gen_range(1..=a.len().min(2));
    let mut seed: Vec<usize> = (0..a.len()).collect();
    seed.shuffle(rng);
    seed.truncate(k);
    Ok(subalgebra_generated(a, &seed)?.1)
}

/// A homomorphism between random valid algebras: a quotient map, a subalgebra
/// inclusion, their composite, or an enumerated map between independent algebras.
pub fn random_homomorphism<R: Rng>(
    rng: &mut R,
    max_points: usize,
    sig: &Signature,
    limits: &Limits,
) -> Result<Homomorphism> {
    let n = rng.gen_range(1..=max_points);
    let a = random_algebra(rng, n, sig, limits)?;
    match rng.gen_range(0..4) {
        0 => random_quotient(rng, &a, limits),
        1 => random_inclusion(rng, &a),
        2 => {
            let i = random_inclusion(rng, &a)?;
            let q = random_quotient(rng, &a, limits)?;
            i.then(&q)
        }
        _ => {
            let m = rng.gen_range(1..=max_points);
            let b = random_algebra(rng, m, sig, limits)?;
            let homs = enumerate_homomorphisms(&a, &b, limits)?;
            match homs.choose(rng) {
                Some(map) => Homomorphism::new(a, b, map.clone()),
                None => random_quotient(rng, &a, limits),
            }
        }
    }
}

/// A nonexpanding map `space → carrier of alg`; falls back to a constant map.
pub fn random_nonexpanding_assignment<R: Rng>(
    rng: &mut R,
    space: &MetricSpace,
    alg: &Algebra,
) -> Vec<usize> {
    for _ in 0..64 {
        let f: Vec<usize> = (0..space.len())
            .map(|_| rng.gen_range(0..alg.len()))
            .collect();
        if expanding_pair(space, alg.carrier(), &f).is_none() {
            return f;
        }
    }
    vec![rng.gen_range(0..alg.len()); space.len()]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_algebra;
    use crate::space::{validate_space, SpaceMode};
    use crate::subcongruence::validate_subcongruence;
    use rand::rngs::StdRng;
    use rand::SeedableRng;

    #[test]
    fn generated_instances_are_valid() {
        let mut rng = StdRng::seed_from_u64(7);
        let limits = Limits::default();
        for _ in 0..50 {
            let n = rng.gen_range(1..=5);
            let m = random_metric(&mut rng, "p", n, 0.3);
            assert!(validate_space(&m, SpaceMode::Metric).is_empty());
            let s = random_subcongruence(&mut rng, &m);
            assert!(validate_subcongruence(&m, s.matrix()).unwrap().is_empty());
            let sig = random_signature(&mut rng, 2, 2);
            let a = random_algebra(&mut rng, n, &sig, &limits).unwrap();
            assert!(validate_algebra(&a, &limits).unwrap().is_empty());
            let f = random_homomorphism(&mut rng, 4, &sig, &limits).unwrap();
            assert!(
                Homomorphism::new(f.source().clone(), f.target().clone(), f.map().to_vec()).is_ok()
            );
        }
    }
}
