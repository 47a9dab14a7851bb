use std::fmt::Write as _;

use quantalg::algebra::{
    image_factorize, product_algebra, validate_algebra, Homomorphism, OpViolation,
};
use quantalg::closure::{coequalizer, generated_congruence, quotient_algebra, Constraint};
use quantalg::doc::{
    from_json, AlgebraDoc, EquationDoc, HomDoc, QuotientDoc, SpaceDoc, SpaceMapDoc,
    SubcongruenceDoc, VarietyDoc,
};
use quantalg::space::{coproduct, product_many, tensor_many, validate_space, SpaceMode};
use quantalg::subcongruence::{
    check_effectivity, colimit, epsilon_kernel_pair, kernel_subcongruence, validate_subcongruence,
};
use quantalg::term::term_distance;
use quantalg::variety::{
    birkhoff_soundness, counterexample_demo, free_in_variety_bounded, in_variety, satisfies,
    Satisfaction,
};
use quantalg::{DistMatrix, Error, ExtDist, Limits, MetricSpace, QuantAlgebra, Term};
use serde::de::DeserializeOwned;
use serde_json::{json, Value};

use crate::{Command, DocKind, Failure};

/// A command's report in both formats. `holds` is false when the report
/// records a semantic violation.
pub struct Output {
    pub json: Value,
    pub text: String,
    pub holds: bool,
}

impl Output {
    fn ok(json: Value, text: String) -> Self {
        Output {
            json,
            text,
            holds: true,
        }
    }
}

fn read_text(path: &str) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::Io(format!("{path}: {e}")))
}

fn read<T: DeserializeOwned>(path: &str) -> Result<T, Failure> {
    let text = read_text(path)?;
    from_json(&text).map_err(|e| match e {
        Error::Structural(msg) => Failure::Library(Error::Structural(format!("{path}: {msg}"))),
        other => Failure::Library(other),
    })
}

fn to_value<T: serde::Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("reports serialize")
}

fn matrix_text(m: &DistMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "points: {}", m.points().join(", "));
    for i in 0..m.len() {
        for j in i + 1..m.len() {
            let _ = writeln!(
                out,
                "  d({}, {}) = {}",
                m.point(i),
                m.point(j),
                m.dist(i, j)
            );
        }
    }
    out
}

fn algebra_text(a: &quantalg::Algebra) -> String {
    let mut out = matrix_text(a.carrier());
    let sig: Vec<String> = a
        .signature()
        .symbols()
        .iter()
        .map(|s| format!("{}/{}", s.name, s.arity))
        .collect();
    let _ = writeln!(out, "signature: {}", sig.join(", "));
    out
}

fn map_pairs(source: &DistMatrix, target: &DistMatrix, map: &[usize]) -> Vec<(String, String)> {
    map.iter()
        .enumerate()
        .map(|(x, &y)| (source.point(x).to_string(), target.point(y).to_string()))
        .collect()
}

fn pairs_text(title: &str, pairs: &[(String, String)]) -> String {
    let mut out = format!("{title}:\n");
    for (x, y) in pairs {
        let _ = writeln!(out, "  {x} -> {y}");
    }
    out
}

fn violations_text<T: std::fmt::Display>(what: &str, vs: &[T]) -> String {
    if vs.is_empty() {
        return format!("valid {what}\n");
    }
    let mut out = format!("invalid {what}: {} violation(s)\n", vs.len());
    for v in vs {
        let _ = writeln!(out, "  {v}");
    }
    out
}

fn satisfaction_text(s: &Satisfaction) -> String {
    match &s.witness {
        None => format!("holds: {}\n", s.equation),
        Some(w) => {
            let assignment: Vec<String> = w
                .assignment
                .iter()
                .map(|(v, p)| format!("{v} = {p}"))
                .collect();
            format!(
                "fails: {} at {} (distance {})\n",
                s.equation,
                assignment.join(", "),
                w.distance
            )
        }
    }
}

fn quotient_output(hom: &Homomorphism) -> Output {
    let (src, tgt) = (hom.source().carrier(), hom.target().carrier());
    let map = map_pairs(src, tgt, hom.map());
    let json = json!({ "quotient": AlgebraDoc::from_algebra(hom.target()), "map": map });
    let text = format!(
        "{}{}",
        algebra_text(hom.target()),
        pairs_text("quotient map", &map)
    );
    Output::ok(json, text)
}

fn validate(kind: DocKind, file: &str, pseudo: bool, limits: &Limits) -> Result<Output, Failure> {
    match kind {
        DocKind::Space => {
            let m = read::<SpaceDoc>(file)?.to_matrix()?;
            let mode = if pseudo {
                SpaceMode::Pseudo
            } else {
                SpaceMode::Metric
            };
            let vs = validate_space(&m, mode);
            let what = if pseudo {
                "pseudometric space"
            } else {
                "metric space"
            };
            Ok(Output {
                json: json!({ "kind": what, "valid": vs.is_empty(), "violations": vs }),
                text: violations_text(what, &vs),
                holds: vs.is_empty(),
            })
        }
        DocKind::Algebra => {
            let doc: AlgebraDoc = read(file)?;
            let space_vs = validate_space(&doc.space.to_matrix()?, SpaceMode::Metric);
            let op_vs: Vec<OpViolation> = if space_vs.is_empty() {
                validate_algebra(&doc.to_algebra()?, limits)?
            } else {
                Vec::new()
            };
            let valid = space_vs.is_empty() && op_vs.is_empty();
            let text = if space_vs.is_empty() {
                violations_text("quantitative algebra", &op_vs)
            } else {
                violations_text("carrier", &space_vs)
            };
            Ok(Output {
                json: json!({
                    "kind": "quantitative algebra", "valid": valid,
                    "space_violations": space_vs, "operation_violations": op_vs
                }),
                text,
                holds: valid,
            })
        }
        DocKind::Subcongruence => {
            let (base, dhat) = read::<SubcongruenceDoc>(file)?.to_parts()?;
            let vs = validate_subcongruence(&base, &dhat)?;
            Ok(Output {
                json: json!({ "kind": "subcongruence", "valid": vs.is_empty(), "violations": vs }),
                text: violations_text("subcongruence", &vs),
                holds: vs.is_empty(),
            })
        }
    }
}

enum Combine {
    Product,
    Tensor,
    Coproduct,
}

fn combine(how: Combine, files: &[String], limits: &Limits) -> Result<Output, Failure> {
    let values: Vec<Value> = files
        .iter()
        .map(|f| read::<Value>(f))
        .collect::<Result<_, _>>()?;
    let algebras = values
        .iter()
        .filter(|v| v.get("signature").is_some())
        .count();
    if algebras == values.len() {
        if !matches!(how, Combine::Product) {
            return Err(Error::Structural("only products of algebras are supported".into()).into());
        }
        let algs: Vec<QuantAlgebra> = values
            .into_iter()
            .map(|v| {
                let doc: AlgebraDoc = serde_json::from_value(v)
                    .map_err(|e| Error::Structural(format!("malformed JSON: {e}")))?;
                doc.to_quant(limits)
            })
            .collect::<Result<_, _>>()?;
        let refs: Vec<&QuantAlgebra> = algs.iter().collect();
        let (p, _) = product_algebra(&refs)?;
        return Ok(Output::ok(
            to_value(&AlgebraDoc::from_algebra(&p)),
            algebra_text(&p),
        ));
    }
    if algebras != 0 {
        return Err(Error::Structural("cannot mix spaces and algebras".into()).into());
    }
    let spaces: Vec<MetricSpace> = values
        .into_iter()
        .map(|v| {
            let doc: SpaceDoc = serde_json::from_value(v)
                .map_err(|e| Error::Structural(format!("malformed JSON: {e}")))?;
            doc.to_metric()
        })
        .collect::<Result<_, _>>()?;
    let refs: Vec<&MetricSpace> = spaces.iter().collect();
    let out = match how {
        Combine::Product => product_many(&refs).0,
        Combine::Tensor => tensor_many(&refs).0,
        Combine::Coproduct => coproduct(&spaces).0,
    };
    Ok(Output::ok(
        to_value(&SpaceDoc::from_matrix(&out)),
        matrix_text(&out),
    ))
}

fn resolve_constraints(
    alg: &QuantAlgebra,
    raw: &[(String, String, ExtDist)],
) -> Result<Vec<Constraint>, Failure> {
    let carrier = alg.carrier();
    raw.iter()
        .map(|(x, y, eps)| {
            let find = |p: &str| {
                carrier
                    .index_of(p)
                    .ok_or_else(|| Error::Structural(format!("unknown point {p:?}")))
            };
            Ok(Constraint::new(find(x)?, find(y)?, eps.clone()))
        })
        .collect()
}

pub fn run(command: &Command, limits: &Limits) -> Result<Output, Failure> {
    match command {
        Command::Validate { kind, file, pseudo } => validate(*kind, file, *pseudo, limits),
        Command::CheckEq { algebra, equation } => {
            let alg = read::<AlgebraDoc>(algebra)?.to_algebra()?;
            let eq = read::<EquationDoc>(equation)?.to_equation()?;
            let s = satisfies(&alg, &eq, limits)?;
            Ok(Output {
                text: satisfaction_text(&s),
                holds: s.holds,
                json: to_value(&s),
            })
        }
        Command::InVariety { algebra, variety } => {
            let alg = read::<AlgebraDoc>(algebra)?.to_algebra()?;
            let v = read::<VarietyDoc>(variety)?.to_variety()?;
            let r = in_variety(&alg, &v, limits)?;
            let mut text = format!("{}\n", if r.holds { "member" } else { "not a member" });
            r.equations
                .iter()
                .for_each(|s| text.push_str(&satisfaction_text(s)));
            Ok(Output {
                text,
                holds: r.holds,
                json: to_value(&r),
            })
        }
        Command::Kernel { map, epsilon } => {
            let f = read::<SpaceMapDoc>(map)?.to_map()?;
            match epsilon {
                None => {
                    let k = kernel_subcongruence(&f);
                    let text = format!("kernel subcongruence\n{}", matrix_text(k.matrix()));
                    Ok(Output::ok(
                        to_value(&SubcongruenceDoc::from_subcongruence(&k)),
                        text,
                    ))
                }
                Some(e) => {
                    let eps: ExtDist = e.parse()?;
                    let k = epsilon_kernel_pair(&f, &eps);
                    let src = f.source();
                    let pairs: Vec<(String, String)> = k
                        .pairs
                        .iter()
                        .map(|&(x, y)| (src.point(x).to_string(), src.point(y).to_string()))
                        .collect();
                    let mut text = format!("{}-kernel pair: {} pair(s)\n", eps, pairs.len());
                    for (x, y) in &pairs {
                        let _ = writeln!(text, "  ({x}, {y})");
                    }
                    let json = json!({ "epsilon": eps, "space": SpaceDoc::from_matrix(&k.space), "pairs": pairs });
                    Ok(Output::ok(json, text))
                }
            }
        }
        Command::Quotient {
            algebra,
            constraints,
        } => {
            let alg = read::<AlgebraDoc>(algebra)?.to_quant(limits)?;
            let raw: Vec<(String, String, ExtDist)> = read(constraints)?;
            let cs = resolve_constraints(&alg, &raw)?;
            let c = generated_congruence(&alg, &cs, limits)?;
            Ok(quotient_output(&quotient_algebra(&c)?.1))
        }
        Command::Coequalize { f, g } => {
            let (f, g) = (
                read::<HomDoc>(f)?.to_hom(limits)?,
                read::<HomDoc>(g)?.to_hom(limits)?,
            );
            Ok(quotient_output(&coequalizer(&f, &g, limits)?.1))
        }
        Command::Colimit { subcongruence } => {
            let s = read::<SubcongruenceDoc>(subcongruence)?.to_subcongruence()?;
            let q = colimit(&s);
            let eff = check_effectivity(&s);
            let doc = QuotientDoc::from_quotient(&q);
            let mut text = matrix_text(q.target());
            for (rep, members) in &doc.classes {
                let _ = writeln!(text, "  class {rep}: {}", members.join(", "));
            }
            let _ = writeln!(text, "effective: {}", eff.effective);
            let json = json!({
                "quotient": doc.quotient, "classes": doc.classes,
                "effective": eff.effective, "discrepancies": eff.discrepancies
            });
            Ok(Output {
                json,
                text,
                holds: eff.effective,
            })
        }
        Command::Product { files } => combine(Combine::Product, files, limits),
        Command::Tensor { files } => combine(Combine::Tensor, files, limits),
        Command::Coproduct { files } => combine(Combine::Coproduct, files, limits),
        Command::Factorize { hom } => {
            let f = read::<HomDoc>(hom)?.to_hom(limits)?;
            let (e, m) = image_factorize(&f)?;
            let surjection = map_pairs(e.source().carrier(), e.target().carrier(), e.map());
            let embedding = map_pairs(m.source().carrier(), m.target().carrier(), m.map());
            let text = format!(
                "image\n{}{}{}",
                algebra_text(e.target()),
                pairs_text("surjection", &surjection),
                pairs_text("embedding", &embedding)
            );
            let json = json!({
                "image": AlgebraDoc::from_algebra(e.target()),
                "surjection": surjection, "embedding": embedding
            });
            Ok(Output::ok(json, text))
        }
        Command::TermDist { space, lhs, rhs } => {
            let m = read::<SpaceDoc>(space)?.to_metric()?;
            let (t, s): (Term, Term) = (lhs.parse()?, rhs.parse()?);
            let d = term_distance(&t, &s, &m)?;
            let json = json!({ "lhs": t.to_string(), "rhs": s.to_string(), "distance": d });
            Ok(Output::ok(json, format!("d({t}, {s}) = {d}\n")))
        }
        Command::FreeBounded {
            variety,
            space,
            depth,
        } => {
            let v = read::<VarietyDoc>(variety)?.to_variety()?;
            let m = read::<SpaceDoc>(space)?.to_metric()?;
            let f = free_in_variety_bounded(&v, &m, *depth, limits)?;
            let terms: Vec<String> = f.terms.iter().map(Term::to_string).collect();
            let text = format!(
                "{} terms up to depth {} (distances are upper bounds)\n{}",
                terms.len(),
                f.depth,
                matrix_text(&f.distances)
            );
            let json = json!({
                "depth": f.depth, "over_approximation": f.over_approximation,
                "terms": terms, "distances": SpaceDoc::from_matrix(&f.distances)
            });
            Ok(Output::ok(json, text))
        }
        Command::Birkhoff {
            variety,
            a,
            b,
            homs,
        } => {
            let v = read::<VarietyDoc>(variety)?.to_variety()?;
            let (a, b) = (
                read::<AlgebraDoc>(a)?.to_quant(limits)?,
                read::<AlgebraDoc>(b)?.to_quant(limits)?,
            );
            let homs: Vec<Homomorphism> = homs
                .iter()
                .map(|h| Ok(read::<HomDoc>(h)?.to_hom(limits)?))
                .collect::<Result<_, Failure>>()?;
            let r = birkhoff_soundness(&v, &a, &b, &homs, limits)?;
            let mut text = format!("A member: {}\nB member: {}\n", r.a_member, r.b_member);
            for c in &r.checks {
                let _ = writeln!(
                    text,
                    "  {}: {}",
                    c.construction,
                    if c.holds { "member" } else { "NOT a member" }
                );
            }
            let _ = writeln!(
                text,
                "{}",
                if r.holds {
                    "closure holds"
                } else {
                    "closure fails"
                }
            );
            Ok(Output {
                text,
                holds: r.holds,
                json: to_value(&r),
            })
        }
        Command::DemoCounterexample { demo_n } => {
            let r = counterexample_demo(*demo_n, limits)?;
            let mut text = format!("truncated addition on {{0..{}}}\n", r.n);
            match &r.max_metric_witness {
                Some(w) => {
                    let _ = writeln!(
                        text,
                        "maximum metric: {} violation(s), e.g. {w}",
                        r.max_metric_violations
                    );
                }
                None => {
                    let _ = writeln!(
                        text,
                        "maximum metric: {} violation(s)",
                        r.max_metric_violations
                    );
                }
            }
            let _ = writeln!(
                text,
                "addition metric: {} violation(s)",
                r.sum_metric_violations.len()
            );
            r.monoid_laws
                .iter()
                .for_each(|s| text.push_str(&satisfaction_text(s)));
            let _ = writeln!(
                text,
                "metric monoid: {}; quantitative algebra: {}",
                r.is_metric_monoid, r.is_quantitative_algebra
            );
            let holds = r.max_metric_witness.is_some() && r.is_metric_monoid;
            Ok(Output {
                text,
                holds,
                json: to_value(&r),
            })
        }
    }
}
