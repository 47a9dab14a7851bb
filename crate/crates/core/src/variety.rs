//! Quantitative equations, varieties, closure checks and the
//! truncated-addition counterexample.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;

use crate::algebra::{
    check_op_against_combiner, image_factorize, product_algebra, subalgebra_generated, Algebra,
    Combiner, Homomorphism, OpViolation, QuantAlgebra,
};
use crate::closure::{close, default_pass_cap, initial_matrix, Applications, Constraint};
use crate::dist::{le, ExtDist};
use crate::error::{check_cap, Error, Limits, Result};
use crate::space::{tuples, DistMatrix, MetricSpace, PseudoSpace};
use crate::term::{enumerate_terms_capped, term_distance, Compiled, Signature, Term};

/// `lhs =_eps rhs` over the variables `vars`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct QuantEquation {
    vars: Vec<String>,
    lhs: Term,
    rhs: Term,
    eps: ExtDist,
}

impl QuantEquation {
    pub fn new(vars: Vec<String>, lhs: Term, rhs: Term, eps: ExtDist) -> Result<Self> {
        if eps.is_infinite() {
            return Err(Error::structural(
                "equation bound must be a finite rational",
            ));
        }
        let declared: BTreeSet<&str> = vars.iter().map(String::as_str).collect();
        if declared.len() != vars.len() {
            return Err(Error::structural("duplicate variable"));
        }
        for g in lhs.generators().into_iter().chain(rhs.generators()) {
            if !declared.contains(g) {
                return Err(Error::structural(format!("undeclared variable {g:?}")));
            }
        }
        Ok(QuantEquation {
            vars,
            lhs,
            rhs,
            eps,
        })
    }

    /// Variables are collected from both sides in sorted order.
    pub fn parse(lhs: &str, rhs: &str, eps: ExtDist) -> Result<Self> {
        let (lhs, rhs): (Term, Term) = (lhs.parse()?, rhs.parse()?);
        let vars: BTreeSet<String> = lhs
            .generators()
            .into_iter()
            .chain(rhs.generators())
            .map(str::to_string)
            .collect();
        QuantEquation::new(vars.into_iter().collect(), lhs, rhs, eps)
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn lhs(&self) -> &Term {
        &self.lhs
    }

    pub fn rhs(&self) -> &Term {
        &self.rhs
    }

    pub fn eps(&self) -> &ExtDist {
        &self.eps
    }

    /// Same sides, different bound.
    pub fn with_eps(&self, eps: ExtDist) -> Result<Self> {
        QuantEquation::new(self.vars.clone(), self.lhs.clone(), self.rhs.clone(), eps)
    }
}

impl fmt::Display for QuantEquation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} =_{} {}", self.lhs, self.eps, self.rhs)
    }
}

/// A signature with a finite list of quantitative equations.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VarietyPresentation {
    signature: Signature,
    equations: Vec<QuantEquation>,
}

impl VarietyPresentation {
    pub fn new(signature: Signature, equations: Vec<QuantEquation>) -> Result<Self> {
        for eq in &equations {
            eq.lhs.check(&signature)?;
            eq.rhs.check(&signature)?;
        }
        Ok(VarietyPresentation {
            signature,
            equations,
        })
    }

    pub fn signature(&self) -> &Signature {
        &self.signature
    }

    pub fn equations(&self) -> &[QuantEquation] {
        &self.equations
    }

    /// Monoids (`mul`, `e`) whose multiplication is commutative up to `eps`.
    pub fn eps_commutative_monoids(eps: ExtDist) -> Self {
        let sig = Signature::new([("mul", 2), ("e", 0)]).expect("fixed signature");
        let zero = ExtDist::zero;
        let eqs = [
            ("mul(mul(x,y),z)", "mul(x,mul(y,z))", zero()),
            ("mul(x,e())", "x", zero()),
            ("mul(e(),x)", "x", zero()),
            ("mul(x,y)", "mul(y,x)", eps),
        ]
        .into_iter()
        .map(|(l, r, e)| QuantEquation::parse(l, r, e).expect("fixed equation"))
        .collect();
        VarietyPresentation::new(sig, eqs).expect("fixed presentation")
    }
}

/// An assignment of carrier points to variables.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Witness {
    pub assignment: Vec<(String, String)>,
    pub distance: ExtDist,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Satisfaction {
    pub equation: String,
    pub holds: bool,
    /// Lexicographically least violating assignment.
    pub witness: Option<Witness>,
}

fn compile_sides(
    alg: &Algebra,
    eq: &QuantEquation,
    limits: &Limits,
) -> Result<(Compiled, Compiled)> {
    let needed = (alg.len() as u128).saturating_pow(eq.vars.len() as u32);
    check_cap("assignments", needed, limits.max_assignments)?;
    let var = |g: &str| eq.vars.iter().position(|v| v == g);
    Ok((
        Compiled::new(&eq.lhs, alg, &var)?,
        Compiled::new(&eq.rhs, alg, &var)?,
    ))
}

/// Checks `d(lhs, rhs) ≤ eps` under every assignment, in lexicographic order.
pub fn satisfies(alg: &Algebra, eq: &QuantEquation, limits: &Limits) -> Result<Satisfaction> {
    let (l, r) = compile_sides(alg, eq, limits)?;
    let space = alg.carrier();
    for env in tuples(&vec![alg.len(); eq.vars.len()]) {
        let d = space.dist(l.eval(alg, &env), r.eval(alg, &env));
        if !le(d, &eq.eps) {
            let assignment = eq
                .vars
                .iter()
                .zip(&env)
                .map(|(v, &p)| (v.clone(), space.point(p).to_string()))
                .collect();
            return Ok(Satisfaction {
                equation: eq.to_string(),
                holds: false,
                witness: Some(Witness {
                    assignment,
                    distance: d.clone(),
                }),
            });
        }
    }
    Ok(Satisfaction {
        equation: eq.to_string(),
        holds: true,
        witness: None,
    })
}

/// `sup` over assignments of `d(lhs, rhs)`; the least bound the algebra satisfies.
pub fn equation_distance(alg: &Algebra, eq: &QuantEquation, limits: &Limits) -> Result<ExtDist> {
    let (l, r) = compile_sides(alg, eq, limits)?;
    Ok(tuples(&vec![alg.len(); eq.vars.len()])
        .into_iter()
        .map(|env| {
            alg.carrier()
                .dist(l.eval(alg, &env), r.eval(alg, &env))
                .clone()
        })
        .max()
        .unwrap_or_else(ExtDist::zero))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct MembershipReport {
    pub holds: bool,
    pub equations: Vec<Satisfaction>,
}

pub fn in_variety(
    alg: &Algebra,
    v: &VarietyPresentation,
    limits: &Limits,
) -> Result<MembershipReport> {
    if alg.signature() != v.signature() {
        return Err(Error::structural(
            "algebra and variety have different signatures",
        ));
    }
    let equations = v
        .equations
        .iter()
        .map(|eq| satisfies(alg, eq, limits))
        .collect::<Result<Vec<_>>>()?;
    Ok(MembershipReport {
        holds: equations.iter().all(|s| s.holds),
        equations,
    })
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ClosureCheck {
    pub construction: String,
    pub holds: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BirkhoffReport {
    pub a_member: bool,
    pub b_member: bool,
    pub checks: Vec<ClosureCheck>,
    pub holds: bool,
}

/// Checks that the product `A × B`, the subalgebras generated by single
/// points of `A` and `B`, and the images of the given homomorphisms out of
/// `A` all stay in the variety. Skipped (and failing) unless `A`, `B` are members.
pub fn birkhoff_soundness(
    v: &VarietyPresentation,
    a: &QuantAlgebra,
    b: &QuantAlgebra,
    homs_from_a: &[Homomorphism],
    limits: &Limits,
) -> Result<BirkhoffReport> {
    let a_member = in_variety(a, v, limits)?.holds;
    let b_member = in_variety(b, v, limits)?.holds;
    let mut checks = Vec::new();
    if a_member && b_member {
        let (p, _) = product_algebra(&[a, b])?;
        checks.push(ClosureCheck {
            construction: "product A x B".into(),
            holds: in_variety(&p, v, limits)?.holds,
        });
        for (label, alg) in [("A", a), ("B", b)] {
            for x in 0..alg.len() {
                let (sub, _) = subalgebra_generated(alg, &[x])?;
                checks.push(ClosureCheck {
                    construction: format!(
                        "subalgebra of {label} generated by {}",
                        alg.carrier().point(x)
                    ),
                    holds: in_variety(&sub, v, limits)?.holds,
                });
            }
        }
        for (i, f) in homs_from_a.iter().enumerate() {
            if f.source() != a {
                return Err(Error::structural(format!(
                    "homomorphism {i} does not start at A"
                )));
            }
            let (e, _) = image_factorize(f)?;
            checks.push(ClosureCheck {
                construction: format!("image of homomorphism {i}"),
                holds: in_variety(e.target(), v, limits)?.holds,
            });
        }
    }
    let holds = a_member && b_member && checks.iter().all(|c| c.holds);
    Ok(BirkhoffReport {
        a_member,
        b_member,
        checks,
        holds,
    })
}

/// Depth-bounded approximation of the free algebra of a variety.
///
/// Distances are upper bounds on the true free-algebra distances: proofs that
/// pass through deeper terms are not seen.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FreeApproximation {
    /// Terms in enumeration order.
    pub terms: Vec<Term>,
    /// Pseudometric on the terms, points named by the printed term.
    pub distances: PseudoSpace,
    pub depth: usize,
    pub over_approximation: bool,
}

impl FreeApproximation {
    pub fn distance(&self, t: &Term, s: &Term) -> Option<&ExtDist> {
        let i = self.distances.index_of(&t.to_string())?;
        let j = self.distances.index_of(&s.to_string())?;
        Some(self.distances.dist(i, j))
    }
}

/// Closes the free-algebra metric on terms of depth ≤ `depth` under every
/// equation instance that fits in the window.
pub fn free_in_variety_bounded(
    v: &VarietyPresentation,
    m: &MetricSpace,
    depth: usize,
    limits: &Limits,
) -> Result<FreeApproximation> {
    let terms = enumerate_terms_capped(v.signature(), m.points(), depth, limits)?;
    let n = terms.len();
    let index: HashMap<&Term, usize> = terms.iter().enumerate().map(|(i, t)| (t, i)).collect();
    let mut base = Vec::with_capacity(n * n);
    for t in &terms {
        for s in &terms {
            base.push(term_distance(t, s, m)?);
        }
    }

    let mut constraints = Vec::new();
    for eq in v.equations() {
        let needed = (n as u128).saturating_pow(eq.vars.len() as u32);
        check_cap("equation instances", needed, limits.max_assignments)?;
        for choice in tuples(&vec![n; eq.vars.len()]) {
            let subst: BTreeMap<&str, &Term> = eq
                .vars
                .iter()
                .map(String::as_str)
                .zip(choice.iter().map(|&i| &terms[i]))
                .collect();
            let (l, r) = (eq.lhs.substitute(&subst), eq.rhs.substitute(&subst));
            if let (Some(&i), Some(&j)) = (index.get(&l), index.get(&r)) {
                constraints.push(Constraint::new(i, j, eq.eps.clone()));
            }
        }
    }

    let mut apps: Applications = Vec::new();
    for s in v.signature().symbols() {
        check_cap(
            "term applications",
            (n as u128).saturating_pow(s.arity as u32),
            limits.max_assignments,
        )?;
        let mut list = Vec::new();
        for args in tuples(&vec![n; s.arity]) {
            let t = Term::App(
                s.name.clone(),
                args.iter().map(|&i| terms[i].clone()).collect(),
            );
            if let Some(&r) = index.get(&t) {
                list.push((args, r));
            }
        }
        apps.push(list);
    }
    let app_count = apps.iter().map(Vec::len).sum();
    let passes = limits
        .max_passes
        .unwrap_or_else(|| default_pass_cap(n, app_count));
    let init = initial_matrix(n, base, &constraints)?;
    let closed = close(n, init, &apps, passes)?;
    let names: Vec<String> = terms.iter().map(Term::to_string).collect();
    let matrix = DistMatrix::from_fn(names, |i, j| closed[i * n + j].clone())?;
    Ok(FreeApproximation {
        terms,
        distances: PseudoSpace::new_unchecked(matrix),
        depth,
        over_approximation: true,
    })
}

/// Outcome of the truncated-addition monoid demonstration.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DemoReport {
    pub n: u64,
    /// The max-metric violation at inputs `(0,1)`, `(1,2)`.
    pub max_metric_witness: Option<OpViolation>,
    pub max_metric_violations: usize,
    pub sum_metric_violations: Vec<OpViolation>,
    pub monoid_laws: Vec<Satisfaction>,
    /// Associative, unital, and nonexpanding for the addition metric.
    pub is_metric_monoid: bool,
    /// Nonexpanding for the maximum metric.
    pub is_quantitative_algebra: bool,
}

/// The monoid `({0..n}, min(x + y, n), 0)` with the Euclidean metric.
pub fn truncated_addition_monoid(n: u64) -> Result<Algebra> {
    let names: Vec<String> = (0..=n).map(|i| i.to_string()).collect();
    let space = MetricSpace::new(DistMatrix::from_fn(names, |i, j| {
        ExtDist::from_integer((i as i64 - j as i64).unsigned_abs())
    })?)?;
    let value: Vec<u64> = space
        .points()
        .iter()
        .map(|p| p.parse().expect("numeric names"))
        .collect();
    let index = |v: u64| space.index_of(&v.to_string()).expect("value in carrier");
    let sig = Signature::new([("add", 2), ("zero", 0)])?;
    let add = sig.index_of("add").expect("declared");
    let tables_space = space.clone();
    Algebra::from_fn(tables_space, sig, |k, args| {
        if k == add {
            index((value[args[0]] + value[args[1]]).min(n))
        } else {
            index(0)
        }
    })
}

/// Shows the truncated-addition monoid is a monoid in metric spaces with the
/// addition metric but not a quantitative algebra.
pub fn counterexample_demo(n: u64, limits: &Limits) -> Result<DemoReport> {
    if n < 3 {
        return Err(Error::structural(
            "the demo needs n >= 3 so that the witness pair exists",
        ));
    }
    let alg = truncated_addition_monoid(n)?;
    let max = check_op_against_combiner(&alg, "add", Combiner::Max, limits)?;
    let sum = check_op_against_combiner(&alg, "add", Combiner::Sum, limits)?;
    let witness = max
        .iter()
        .find(|v| v.x == ["0", "1"] && v.y == ["1", "2"])
        .cloned();
    let laws = [
        ("add(add(x,y),z)", "add(x,add(y,z))"),
        ("add(zero(),x)", "x"),
        ("add(x,zero())", "x"),
    ]
    .into_iter()
    .map(|(l, r)| satisfies(&alg, &QuantEquation::parse(l, r, ExtDist::zero())?, limits))
    .collect::<Result<Vec<_>>>()?;
    let is_metric_monoid = sum.is_empty() && laws.iter().all(|s| s.holds);
    Ok(DemoReport {
        n,
        max_metric_witness: witness,
        max_metric_violations: max.len(),
        is_quantitative_algebra: max.is_empty(),
        sum_metric_violations: sum,
        monoid_laws: laws,
        is_metric_monoid,
    })
}
