//! Generated quantitative congruences, quotient algebras and coequalizers.
//!
//! The greatest pseudometric below the base metric and a set of distance
//! bounds that is also compatible with the operations is computed by
//! alternating a Floyd–Warshall sweep (triangle closure in the min-plus
//! semiring) with an operation-propagation sweep until nothing changes.

use serde::Serialize;

use crate::algebra::{Algebra, Homomorphism, QuantAlgebra};
use crate::dist::{le, ExtDist};
use crate::error::{Error, Limits, Result};
use crate::space::tuples;
use crate::subcongruence::{colimit, Subcongruence};

/// Requires `d̂(x, y) ≤ eps`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Constraint {
    pub x: usize,
    pub y: usize,
    pub eps: ExtDist,
}

impl Constraint {
    pub fn new(x: usize, y: usize, eps: ExtDist) -> Self {
        Constraint { x, y, eps }
    }
}

/// Known operation applications: for each symbol, `(arguments, result)` pairs.
/// Total algebras list every tuple; depth-bounded term windows list only the
/// applications that stay inside the window.
pub(crate) type Applications = Vec<Vec<(Vec<usize>, usize)>>;

pub(crate) fn applications_of(alg: &Algebra) -> Applications {
    alg.signature()
        .symbols()
        .iter()
        .enumerate()
        .map(|(k, s)| {
            tuples(&vec![alg.len(); s.arity])
                .into_iter()
                .map(|t| {
                    let r = alg.apply(k, &t);
                    (t, r)
                })
                .collect()
        })
        .collect()
}

/// Default pass cap `16 n² (1 + applications)`.
pub fn default_pass_cap(n: usize, applications: usize) -> usize {
    16usize
        .saturating_mul(n * n)
        .saturating_mul(1 + applications)
}

/// Square matrix in row-major order, updated in place.
struct Work {
    n: usize,
    d: Vec<ExtDist>,
}

impl Work {
    fn get(&self, i: usize, j: usize) -> &ExtDist {
        &self.d[i * self.n + j]
    }

    /// Lowers `(i, j)` and `(j, i)` to `v` if smaller.
    fn lower(&mut self, i: usize, j: usize, v: &ExtDist) -> bool {
        if le(self.get(i, j), v) {
            return false;
        }
        self.d[i * self.n + j] = v.clone();
        self.d[j * self.n + i] = v.clone();
        true
    }

    fn triangle_sweep(&mut self) -> bool {
        let n = self.n;
        let mut changed = false;
        for k in 0..n {
            for i in 0..n {
                if self.get(i, k).is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let via = self.get(i, k) + self.get(k, j);
                    if !le(self.get(i, j), &via) {
                        self.d[i * n + j] = via;
                        changed = true;
                    }
                }
            }
        }
        changed
    }

    fn op_sweep(&mut self, apps: &Applications) -> bool {
        let mut changed = false;
        for sym in apps {
            for (a, (xs, rx)) in sym.iter().enumerate() {
                for (ys, ry) in &sym[a + 1..] {
                    if rx == ry {
                        continue;
                    }
                    let bound = xs
                        .iter()
                        .zip(ys)
                        .map(|(&x, &y)| self.get(x, y))
                        .max()
                        .cloned()
                        .unwrap_or_else(ExtDist::zero);
                    changed |= self.lower(*rx, *ry, &bound);
                }
            }
        }
        changed
    }
}

/// Greatest pseudometric `≤ init` that satisfies the triangle inequality and is
/// compatible with `apps`. `init` must be symmetric with zero diagonal.
pub(crate) fn close(
    n: usize,
    init: Vec<ExtDist>,
    apps: &Applications,
    max_passes: usize,
) -> Result<Vec<ExtDist>> {
    let mut w = Work { n, d: init };
    let mut previous = w.d.clone();
    for _ in 0..max_passes {
        previous.clone_from(&w.d);
        let a = w.triangle_sweep();
        let b = w.op_sweep(apps);
        if !a && !b {
            return Ok(w.d);
        }
    }
    Err(Error::NonConvergence {
        passes: max_passes,
        previous,
        last: w.d,
    })
}

/// Starting matrix: `min(d, constraints)`, symmetric, zero diagonal.
pub(crate) fn initial_matrix(
    n: usize,
    mut d: Vec<ExtDist>,
    constraints: &[Constraint],
) -> Result<Vec<ExtDist>> {
    for c in constraints {
        if c.x >= n || c.y >= n {
            return Err(Error::structural(
                "constraint refers to a point outside the carrier",
            ));
        }
        for (i, j) in [(c.x, c.y), (c.y, c.x)] {
            if !le(&d[i * n + j], &c.eps) {
                d[i * n + j] = c.eps.clone();
            }
        }
    }
    for i in 0..n {
        d[i * n + i] = ExtDist::zero();
    }
    Ok(d)
}

/// A subcongruence compatible with the operations of its algebra.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CongruenceOnAlgebra {
    algebra: QuantAlgebra,
    sub: Subcongruence,
}

/// Tuple pairs where `d̂(σx⃗, σy⃗) > max_i d̂(x_i, y_i)`.
pub fn compatibility_violations(alg: &Algebra, sub: &Subcongruence) -> Vec<String> {
    let mut out = Vec::new();
    for (k, s) in alg.signature().symbols().iter().enumerate() {
        let all = tuples(&vec![alg.len(); s.arity]);
        for (i, x) in all.iter().enumerate() {
            for y in &all[i + 1..] {
                let bound = x
                    .iter()
                    .zip(y)
                    .map(|(&a, &b)| sub.dhat(a, b))
                    .max()
                    .cloned()
                    .unwrap_or_else(ExtDist::zero);
                let got = sub.dhat(alg.apply(k, x), alg.apply(k, y));
                if !le(got, &bound) {
                    let names = |t: &[usize]| {
                        t.iter()
                            .map(|&p| alg.carrier().point(p))
                            .collect::<Vec<_>>()
                            .join(",")
                    };
                    out.push(format!(
                        "dhat({n}({}), {n}({})) = {got} > {bound}",
                        names(x),
                        names(y),
                        n = s.name
                    ));
                }
            }
        }
    }
    out
}

impl CongruenceOnAlgebra {
    pub fn new(algebra: QuantAlgebra, sub: Subcongruence) -> Result<Self> {
        if sub.base() != algebra.carrier() {
            return Err(Error::structural(
                "subcongruence lives on a different space",
            ));
        }
        let v = compatibility_violations(&algebra, &sub);
        if v.is_empty() {
            Ok(CongruenceOnAlgebra { algebra, sub })
        } else {
            Err(Error::invalid("quantitative congruence", v))
        }
    }

    pub fn algebra(&self) -> &QuantAlgebra {
        &self.algebra
    }

    pub fn subcongruence(&self) -> &Subcongruence {
        &self.sub
    }
}

/// The largest quantitative congruence on `alg` below every constraint.
pub fn generated_congruence(
    alg: &QuantAlgebra,
    constraints: &[Constraint],
    limits: &Limits,
) -> Result<CongruenceOnAlgebra> {
    let base = alg.carrier();
    let apps = applications_of(alg);
    let passes = limits
        .max_passes
        .unwrap_or_else(|| default_pass_cap(base.len(), alg.table_entries()));
    let d = close(
        base.len(),
        initial_matrix(base.len(), base.entries().to_vec(), constraints)?,
        &apps,
        passes,
    )?;
    let dhat = base.with_entries(|i, j| d[i * base.len() + j].clone());
    Ok(CongruenceOnAlgebra {
        algebra: alg.clone(),
        sub: Subcongruence::new_unchecked(base.clone(), dhat),
    })
}

/// The quotient algebra on the colimit of the congruence, with the quotient map.
pub fn quotient_algebra(c: &CongruenceOnAlgebra) -> Result<(QuantAlgebra, Homomorphism)> {
    let q = colimit(&c.sub);
    let a = &c.algebra;
    let classes = q.classes();
    let alg = Algebra::from_fn(q.target().clone(), a.signature().clone(), |k, args| {
        let reps: Vec<usize> = args.iter().map(|&cl| classes[cl][0]).collect();
        q.class_of(a.apply(k, &reps))
    })?;
    let quotient = QuantAlgebra::new_unchecked(alg);
    let map = Homomorphism::new_unchecked(a.clone(), quotient.clone(), q.map().to_vec());
    Ok((quotient, map))
}

/// Coequalizer of a parallel pair: the quotient of the codomain by the
/// congruence generated by `f x = g x`.
pub fn coequalizer(
    f: &Homomorphism,
    g: &Homomorphism,
    limits: &Limits,
) -> Result<(QuantAlgebra, Homomorphism)> {
    if f.source() != g.source() || f.target() != g.target() {
        return Err(Error::structural("homomorphisms are not parallel"));
    }
    let constraints: Vec<Constraint> = (0..f.source().len())
        .map(|x| Constraint::new(f.apply(x), g.apply(x), ExtDist::zero()))
        .collect();
    quotient_algebra(&generated_congruence(f.target(), &constraints, limits)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::validate_algebra;
    use crate::space::{DistMatrix, MetricSpace};
    use crate::term::Signature;

    fn d(s: &str) -> ExtDist {
        s.parse().unwrap()
    }

    fn uniform(names: &[&str], v: &str) -> MetricSpace {
        let names: Vec<String> = names.iter().map(|s| s.to_string()).collect();
        MetricSpace::new(
            DistMatrix::from_fn(names, |i, j| if i == j { d("0") } else { d(v) }).unwrap(),
        )
        .unwrap()
    }

    #[test]
    fn no_constraints_keeps_the_metric() {
        let space = uniform(&["a", "b", "c"], "1");
        let alg = Algebra::from_fn(space, Signature::new([("m", 2)]).unwrap(), |_, t| {
            (t[0] + t[1]) % 3
        })
        .unwrap();
        let alg = QuantAlgebra::new(alg, &Limits::default()).unwrap();
        let c = generated_congruence(&alg, &[], &Limits::default()).unwrap();
        assert_eq!(c.subcongruence().matrix(), alg.carrier().matrix());
    }

    #[test]
    fn empty_signature_is_shortest_paths() {
        let space = uniform(&["a", "b", "c", "d"], "3");
        let alg = QuantAlgebra::new(
            Algebra::from_fn(space, Signature::empty(), |_, _| 0).unwrap(),
            &Limits::default(),
        )
        .unwrap();
        let c = generated_congruence(&alg, &[Constraint::new(0, 1, d("1"))], &Limits::default())
            .unwrap();
        let s = c.subcongruence();
        assert_eq!(s.dhat(0, 1), &d("1"));
        assert_eq!(s.dhat(0, 2), &d("3"));
        let c = generated_congruence(
            &alg,
            &[
                Constraint::new(0, 1, d("1")),
                Constraint::new(1, 2, d("1/2")),
            ],
            &Limits::default(),
        )
        .unwrap();
        assert_eq!(c.subcongruence().dhat(0, 2), &d("3/2"));
        assert_eq!(c.subcongruence().dhat(0, 3), &d("3"));
    }

    #[test]
    fn zero_constraint_propagates_through_operations() {
        // Z/4 under addition, discrete metric; identifying 0 and 2 gives Z/2
        let space = MetricSpace::discrete(["0", "1", "2", "3"]).unwrap();
        let alg = Algebra::from_fn(space, Signature::new([("add", 2)]).unwrap(), |_, t| {
            (t[0] + t[1]) % 4
        })
        .unwrap();
        let alg = QuantAlgebra::new(alg, &Limits::default()).unwrap();
        let c = generated_congruence(&alg, &[Constraint::new(0, 2, d("0"))], &Limits::default())
            .unwrap();
        let (q, map) = quotient_algebra(&c).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(map.map(), &[0, 1, 0, 1]);
        assert!(c.subcongruence().dhat(1, 2).is_infinite());
    }

    #[test]
    fn epsilon_collapse_of_a_discrete_monoid() {
        // {e, a} with a·a = a, discrete metric
        let space = MetricSpace::discrete(["a", "e"]).unwrap();
        let alg = Algebra::from_fn(space, Signature::new([("mul", 2)]).unwrap(), |_, t| {
            if t[0] == 1 {
                t[1]
            } else {
                0
            }
        })
        .unwrap();
        let alg = QuantAlgebra::new(alg, &Limits::default()).unwrap();
        let c = generated_congruence(&alg, &[Constraint::new(0, 1, d("1"))], &Limits::default())
            .unwrap();
        let (q, map) = quotient_algebra(&c).unwrap();
        assert_eq!(q.len(), 2);
        assert_eq!(q.carrier().dist(0, 1), &d("1"));
        assert_eq!(q.table(0), alg.table(0));
        assert!(map.is_surjective());
        assert!(validate_algebra(&q, &Limits::default()).unwrap().is_empty());
    }

    #[test]
    fn full_collapse_gives_a_point() {
        let space = uniform(&["a", "b"], "1");
        let alg = QuantAlgebra::new(
            Algebra::from_fn(space, Signature::new([("s", 1)]).unwrap(), |_, t| 1 - t[0]).unwrap(),
            &Limits::default(),
        )
        .unwrap();
        let c = generated_congruence(&alg, &[Constraint::new(0, 1, d("0"))], &Limits::default())
            .unwrap();
        assert_eq!(quotient_algebra(&c).unwrap().0.len(), 1);
    }

    #[test]
    fn coequalizer_of_equal_maps_is_identity_like() {
        let space = uniform(&["a", "b"], "1");
        let alg = QuantAlgebra::new(
            Algebra::from_fn(space, Signature::new([("s", 1)]).unwrap(), |_, t| 1 - t[0]).unwrap(),
            &Limits::default(),
        )
        .unwrap();
        let id = Homomorphism::identity(&alg);
        let (q, map) = coequalizer(&id, &id, &Limits::default()).unwrap();
        assert_eq!(q, alg);
        assert_eq!(map.map(), &[0, 1]);
    }

    #[test]
    fn pass_cap_is_enforced() {
        let space = uniform(&["a", "b", "c"], "3");
        let alg = QuantAlgebra::new(
            Algebra::from_fn(space, Signature::empty(), |_, _| 0).unwrap(),
            &Limits::default(),
        )
        .unwrap();
        let limits = Limits {
            max_passes: Some(1),
            ..Limits::default()
        };
        let err = generated_congruence(
            &alg,
            &[Constraint::new(0, 1, d("1")), Constraint::new(1, 2, d("1"))],
            &limits,
        );
        assert!(matches!(err, Err(Error::NonConvergence { passes: 1, .. })));
    }
}
