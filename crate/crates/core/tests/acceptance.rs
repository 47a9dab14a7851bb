//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

mod common;

use std::process::ExitCode;
use std::time::{Duration, Instant};

use common::*;
use quantalg::algebra::{
    enumerate_homomorphisms, factor_through, image_factorize, product_algebra,
    subalgebra_generated, validate_algebra, HomFactorization,
};
use quantalg::closure::{generated_congruence, quotient_algebra};
use quantalg::random::{
    random_algebra, random_homomorphism, random_metric, random_nonexpanding_assignment,
    random_quotient, random_signature, random_subcongruence,
};
use quantalg::space::{coproduct, product_many, tensor_many, validate_space, SpaceMode};
use quantalg::subcongruence::{
    check_effectivity, colimit, colimits_commute, product_subcongruence,
};
use quantalg::term::{count_terms, enumerate_terms, hom_distance_bounded, term_distance};
use quantalg::variety::{birkhoff_soundness, counterexample_demo, in_variety, VarietyPresentation};
use quantalg::{
    Constraint, DistMatrix, ExtDist, Homomorphism, Limits, MetricSpace, PseudoSpace, QuantAlgebra,
};
use rand::Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(start: Instant, limit: Duration, what: &str) -> Result<(), String> {
    let t = start.elapsed();
    ensure(t < limit, || format!("{what} took {t:?}, limit {limit:?}"))
}

fn counterexample() -> Outcome {
    let start = Instant::now();
    let r = counterexample_demo(3, &Limits::default()).map_err(|e| e.to_string())?;
    let w = r
        .max_metric_witness
        .clone()
        .ok_or("no witness at (0,1),(1,2)")?;
    ensure(w.output_distance == d("2") && w.bound == d("1"), || {
        format!("witness {w:?}")
    })?;
    // |(0+1) - (1+2)| against max(|0-1|, |1-2|)
    ensure(
        d("2") == ExtDist::from_integer(3).abs_diff(&ExtDist::from_integer(1)),
        || "oracle".into(),
    )?;
    ensure(r.sum_metric_violations.is_empty(), || {
        format!("{} sum-metric violations", r.sum_metric_violations.len())
    })?;
    ensure(r.monoid_laws.iter().all(|s| s.holds), || {
        "monoid law failed".into()
    })?;
    within(start, Duration::from_secs(1), "demo")?;
    Ok(format!(
        "witness distance 2 > bound 1, {} max-metric violations, 0 sum-metric violations",
        r.max_metric_violations
    ))
}

fn effectivity() -> Outcome {
    let start = Instant::now();
    let mut rng = rng(2);
    for case in 0..1000 {
        let n = rng.gen_range(2..=6);
        let base = random_metric(&mut rng, "p", n, 0.15);
        let s = random_subcongruence(&mut rng, &base);
        let report = check_effectivity(&s);
        ensure(report.effective && report.discrepancies.is_empty(), || {
            format!("case {case}: {report:?}")
        })?;
        // independent kernel check
        let q = colimit(&s);
        for x in 0..n {
            for y in 0..n {
                let k = q.target().dist(q.class_of(x), q.class_of(y));
                ensure(k == s.dhat(x, y), || {
                    format!("case {case}: kernel differs at ({x},{y})")
                })?;
            }
        }
    }
    within(start, Duration::from_secs(30), "effectivity suite")?;
    Ok("1000 subcongruences on 2-6 points are effective".into())
}

fn is_isometry(a: &DistMatrix, b: &DistMatrix, f: &[usize]) -> bool {
    let mut seen = vec![false; b.len()];
    a.len() == b.len()
        && f.iter().all(|&y| !std::mem::replace(&mut seen[y], true))
        && (0..a.len()).all(|i| (0..a.len()).all(|j| a.dist(i, j) == b.dist(f[i], f[j])))
}

fn product_commutation() -> Outcome {
    let mut rng = rng(3);
    for case in 0..200 {
        let b1_len = rng.gen_range(1..=4);
        let b1 = random_metric(&mut rng, "a", b1_len, 0.2);
        let b2_len = rng.gen_range(1..=4);
        let b2 = random_metric(&mut rng, "b", b2_len, 0.2);
        let (s1, s2) = (
            random_subcongruence(&mut rng, &b1),
            random_subcongruence(&mut rng, &b2),
        );
        let (q1, q2) = (colimit(&s1), colimit(&s2));
        let of_product = colimit(&product_subcongruence(&s1, &s2));
        let (product_of, _) = product_many(&[q1.target(), q2.target()]);
        let iso = colimits_commute(&s1, &s2).ok_or_else(|| format!("case {case}: no isometry"))?;
        // the returned bijection, read in point names, must be an isometry
        let f: Vec<usize> = iso
            .iter()
            .map(|(_, y)| product_of.index_of(y))
            .collect::<Option<_>>()
            .ok_or_else(|| format!("case {case}: unknown point"))?;
        let order: Vec<usize> = iso
            .iter()
            .map(|(x, _)| of_product.target().index_of(x))
            .collect::<Option<_>>()
            .ok_or_else(|| format!("case {case}: unknown point"))?;
        let mut g = vec![0; f.len()];
        for (k, &x) in order.iter().enumerate() {
            g[x] = f[k];
        }
        ensure(is_isometry(of_product.target(), &product_of, &g), || {
            format!("case {case}: not an isometry")
        })?;
    }
    Ok("200 pairs on bases of at most 4 points".into())
}

/// COM-satisfying candidates out of the source of `f`: every homomorphism
/// into the target of `f` or into the image of `f`.
fn candidate_pool(f: &Homomorphism, limits: &Limits) -> Result<Vec<Homomorphism>, String> {
    let err = |e: quantalg::Error| e.to_string();
    let (e, _) = image_factorize(f).map_err(err)?;
    let mut pool = Vec::new();
    for target in [f.target(), e.target()] {
        for map in enumerate_homomorphisms(f.source(), target, limits).map_err(err)? {
            pool.push(Homomorphism::new(f.source().clone(), target.clone(), map).map_err(err)?);
        }
    }
    Ok(pool)
}

fn satisfies_com(f: &Homomorphism, g: &Homomorphism) -> bool {
    let (fs, gs) = (f.target().carrier(), g.target().carrier());
    let n = f.source().len();
    (0..n)
        .all(|x| (0..n).all(|y| gs.dist(g.apply(x), g.apply(y)) <= fs.dist(f.apply(x), f.apply(y))))
}

fn surjective_subregular() -> Outcome {
    let mut rng = rng(4);
    let limits = Limits::default();
    let (mut surjective, mut other) = (0, 0);
    for case in 0..200 {
        let sig = random_signature(&mut rng, 2, 2);
        let f = random_homomorphism(&mut rng, 5, &sig, &limits).map_err(|e| e.to_string())?;
        let mut all_factor = true;
        for g in candidate_pool(&f, &limits)?
            .iter()
            .filter(|g| satisfies_com(&f, g))
        {
            let outcome = factor_through(&f, g, &limits).map_err(|e| e.to_string())?;
            all_factor &= matches!(outcome, HomFactorization::Unique(_));
        }
        let onto = (0..f.target().len()).all(|y| f.map().contains(&y));
        ensure(onto == all_factor, || {
            format!("case {case}: surjective {onto}, universal {all_factor}")
        })?;
        if onto {
            surjective += 1;
        } else {
            other += 1;
        }
    }
    ensure(surjective > 0 && other > 0, || {
        format!("degenerate sample: {surjective} surjective, {other} not")
    })?;
    Ok(format!(
        "200 homomorphisms ({surjective} surjective, {other} not)"
    ))
}

fn hom_distance_agreement() -> Outcome {
    let mut rng = rng(5);
    let limits = Limits::default();
    let mut accepted = 0;
    while accepted < 100 {
        let sig = random_signature(&mut rng, 2, 2);
        let m_len = rng.gen_range(1..=3);
        let m = random_metric(&mut rng, "x", m_len, 0.2);
        if count_terms(&sig, m.len(), 3) > 100_000 {
            continue;
        }
        let a_len = rng.gen_range(1..=4);
        let a = random_algebra(&mut rng, a_len, &sig, &limits).map_err(|e| e.to_string())?;
        let f1 = random_nonexpanding_assignment(&mut rng, &m, &a);
        let f2 = random_nonexpanding_assignment(&mut rng, &m, &a);
        let direct = (0..m.len())
            .map(|x| a.carrier().dist(f1[x], f2[x]).clone())
            .max()
            .unwrap();
        for depth in 0..=3 {
            let v = hom_distance_bounded(&a, &m, &f1, &f2, depth, &limits)
                .map_err(|e| e.to_string())?;
            ensure(v == direct, || {
                format!("instance {accepted}: depth {depth} gives {v}, generators give {direct}")
            })?;
        }
        accepted += 1;
    }
    Ok("100 instances agree at depths 0-3".into())
}

fn closure_oracles() -> Outcome {
    let mut rng = rng(6);
    let limits = Limits::default();
    let eps = epsilon_values();
    let (mut three_points, mut lowered) = (0, 0);
    for case in 0..60 {
        let alg = tiny_algebra(&mut rng, case % 4 != 0);
        let n = alg.len();
        three_points += usize::from(n == 3);
        let cs = random_constraints(&mut rng, n, &eps);
        let got = generated_congruence(&alg, &cs, &limits).map_err(|e| e.to_string())?;
        let want = brute_force_congruence(&alg, &cs);
        let sub = got.subcongruence();
        ensure(
            (0..n).all(|i| (0..n).all(|j| sub.dhat(i, j) == &want[i][j])),
            || format!("case {case}: closure differs from brute force"),
        )?;
        lowered +=
            usize::from((0..n).any(|i| (0..n).any(|j| sub.dhat(i, j) != alg.carrier().dist(i, j))));

        let bare = tiny_algebra(&mut rng, false);
        let cs = random_constraints(&mut rng, bare.len(), &eps);
        let got = generated_congruence(&bare, &cs, &limits).map_err(|e| e.to_string())?;
        let fw = floyd_warshall(constrained_base(bare.carrier(), &cs));
        let sub = got.subcongruence();
        ensure(
            (0..bare.len()).all(|i| (0..bare.len()).all(|j| sub.dhat(i, j) == &fw[i][j])),
            || format!("case {case}: empty signature differs from Floyd-Warshall"),
        )?;

        let zero_inf: Vec<Constraint> = random_constraints(&mut rng, n, &eps)
            .into_iter()
            .map(|c| {
                Constraint::new(
                    c.x,
                    c.y,
                    if rng.gen_bool(0.6) {
                        ExtDist::zero()
                    } else {
                        ExtDist::infinity()
                    },
                )
            })
            .collect();
        let got = generated_congruence(&alg, &zero_inf, &limits).map_err(|e| e.to_string())?;
        let pairs: Vec<(usize, usize)> = zero_inf
            .iter()
            .filter(|c| c.eps.is_zero())
            .map(|c| (c.x, c.y))
            .collect();
        let classes = union_find_congruence(&alg, &pairs);
        let sub = got.subcongruence();
        ensure(
            (0..n).all(|i| (0..n).all(|j| sub.dhat(i, j).is_zero() == (classes[i] == classes[j]))),
            || format!("case {case}: zero sublevel differs from union-find closure"),
        )?;
    }
    ensure(three_points > 0 && lowered > 0, || {
        format!("degenerate sample: {three_points} on 3 points, {lowered} lowered")
    })?;
    Ok(format!(
        "60 tiny instances ({three_points} on 3 points, {lowered} lowered below the base) match brute force, Floyd-Warshall and union-find"
    ))
}

fn birkhoff() -> Outcome {
    let mut rng = rng(7);
    let limits = Limits::default();
    let v = VarietyPresentation::eps_commutative_monoids(ExtDist::from_integer(1));
    let mut checks = 0;
    for case in 0..20 {
        let a_len = rng.gen_range(1..=4);
        let a = random_monoid_member(&mut rng, a_len);
        let b_len = rng.gen_range(1..=3);
        let b = random_monoid_member(&mut rng, b_len);
        for alg in [&a, &b] {
            let m = in_variety(alg, &v, &limits).map_err(|e| e.to_string())?;
            ensure(m.holds, || {
                format!("case {case}: generated algebra is not a member: {m:?}")
            })?;
        }
        let quotients: Vec<Homomorphism> = (0..3)
            .map(|_| random_quotient(&mut rng, &a, &limits))
            .collect::<Result<_, _>>()
            .map_err(|e| e.to_string())?;
        let report =
            birkhoff_soundness(&v, &a, &b, &quotients, &limits).map_err(|e| e.to_string())?;
        ensure(report.holds, || format!("case {case}: {report:?}"))?;
        checks += report.checks.len();
    }
    Ok(format!("20 member pairs, {checks} closure checks"))
}

fn metric_laws() -> Outcome {
    let mut rng = rng(8);
    let limits = Limits::default();
    let space_ok = |m: &DistMatrix, what: &str| {
        let v = validate_space(m, SpaceMode::Metric);
        ensure(v.is_empty(), || format!("{what}: {v:?}"))
    };
    for case in 0..100 {
        let a_len = rng.gen_range(1..=3);
        let a = random_metric(&mut rng, "a", a_len, 0.2);
        let b_len = rng.gen_range(1..=3);
        let b = random_metric(&mut rng, "b", b_len, 0.2);
        space_ok(&product_many(&[&a, &b]).0, "product")?;
        space_ok(&tensor_many(&[&a, &b]).0, "tensor")?;
        space_ok(&coproduct(&[a.clone(), b.clone()]).0, "coproduct")?;
        let s = random_subcongruence(&mut rng, &a);
        space_ok(colimit(&s).target(), "quotient")?;
        let pseudo = PseudoSpace::new(s.matrix().clone()).map_err(|e| e.to_string())?;
        space_ok(
            quantalg::space::metric_reflection(&pseudo).target(),
            "reflection",
        )?;

        let sig = random_signature(&mut rng, 2, 2);
        let alg_len = rng.gen_range(1..=4);
        let alg = random_algebra(&mut rng, alg_len, &sig, &limits).map_err(|e| e.to_string())?;
        let alg_ok = |x: &QuantAlgebra, what: &str| -> Result<(), String> {
            space_ok(x.carrier(), what)?;
            let v = validate_algebra(x, &limits).map_err(|e| e.to_string())?;
            ensure(v.is_empty(), || format!("{what}: {v:?}"))
        };
        let other_len = rng.gen_range(1..=3);
        let other =
            random_algebra(&mut rng, other_len, &sig, &limits).map_err(|e| e.to_string())?;
        alg_ok(
            &product_algebra(&[&alg, &other])
                .map_err(|e| e.to_string())?
                .0,
            "product algebra",
        )?;
        alg_ok(
            &subalgebra_generated(&alg, &[0])
                .map_err(|e| e.to_string())?
                .0,
            "subalgebra",
        )?;
        let cs = random_constraints(&mut rng, alg.len(), &epsilon_values());
        let c = generated_congruence(&alg, &cs, &limits).map_err(|e| e.to_string())?;
        alg_ok(
            &quotient_algebra(&c).map_err(|e| e.to_string())?.0,
            "quotient algebra",
        )?;

        let f = random_homomorphism(&mut rng, 4, &sig, &limits).map_err(|e| e.to_string())?;
        let (e, m) = image_factorize(&f).map_err(|e| e.to_string())?;
        alg_ok(e.target(), "image")?;
        let n = f.source().len();
        ensure((0..n).all(|x| m.apply(e.apply(x)) == f.apply(x)), || {
            format!("case {case}: f != m.e")
        })?;
        ensure((0..e.target().len()).all(|y| e.map().contains(&y)), || {
            format!("case {case}: e not surjective")
        })?;
        let (im, tg) = (m.source().carrier(), m.target().carrier());
        ensure(
            (0..im.len())
                .all(|x| (0..im.len()).all(|y| im.dist(x, y) == tg.dist(m.apply(x), m.apply(y)))),
            || format!("case {case}: m not distance-preserving"),
        )?;
    }

    // term spaces at depths 0-3
    let gens = MetricSpace::new(
        DistMatrix::from_entries(
            vec!["x".into(), "y".into()],
            &[("x".into(), "y".into(), d("1/2"))],
            |_, _| ExtDist::zero(),
        )
        .map_err(|e| e.to_string())?,
    )
    .map_err(|e| e.to_string())?;
    for (sig, top) in [
        (quantalg::Signature::new([("s", 1), ("c", 0)]).unwrap(), 3),
        (quantalg::Signature::new([("m", 2), ("c", 0)]).unwrap(), 2),
    ] {
        for depth in 0..=top {
            let terms = enumerate_terms(&sig, gens.points(), depth);
            let names: Vec<String> = terms.iter().map(|t| t.to_string()).collect();
            let mut rows = vec![vec![ExtDist::zero(); terms.len()]; terms.len()];
            for (i, t) in terms.iter().enumerate() {
                for (j, s) in terms.iter().enumerate() {
                    rows[i][j] = term_distance(t, s, &gens).map_err(|e| e.to_string())?;
                }
            }
            let m =
                DistMatrix::from_fn(names, |i, j| rows[i][j].clone()).map_err(|e| e.to_string())?;
            space_ok(&m, &format!("term space depth {depth}"))?;
        }
    }
    Ok("constructions on 100 random instances and term spaces up to depth 3 are valid".into())
}

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("counterexample reproduction", counterexample),
        ("effectivity", effectivity),
        ("product commutation", product_commutation),
        ("surjective iff subregular", surjective_subregular),
        ("hom-distance agreement", hom_distance_agreement),
        ("closure oracles", closure_oracles),
        ("variety closure", birkhoff),
        ("metric laws", metric_laws),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        match run() {
            Ok(msg) => println!(
                "criterion {}: PASS  {name}: {msg} ({:.2?})",
                i + 1,
                start.elapsed()
            ),
            Err(msg) => {
                failed += 1;
                println!("criterion {}: FAIL  {name}: {msg}", i + 1);
            }
        }
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
