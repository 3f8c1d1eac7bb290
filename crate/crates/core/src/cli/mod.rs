//! Batch front end: read a run spec, run the requested suites and write a
//! JSON report.
//!
//! Exit codes: `0` when every suite passes, `1` when a suite fails or
//! errors, `2` when the spec cannot be read or built.

mod report;
mod spec;

use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::json;

pub use report::{print_report, write_report, Report, Status, SuiteResult, Witness, REPORT_VERSION};
pub use spec::{build_b_field, build_model, build_sample, default_tolerance, parse_spec, RunSpec, SUITES};

use crate::brackets::{courant_axiom_suite, jacobi_defect, AssociatedBracket, BracketReport, PointBracket};
use crate::connections::{check_adapted, Connection, Side};
use crate::deformations::{compatibility, extract_fluxes, twisted_d_bracket, BTransformation};
use crate::error::{Error, Result};
use crate::geometry::{Point, TensorField};
use crate::models::Model;
use crate::parastructure::{classify, validate_structure, ParaHermitianStructure, Sign};
use crate::sampling::{random_polynomial_field, stream};

const NEEDS_B: [&str; 3] = ["maurer_cartan", "fluxes", "twisted"];

/// Everything a suite can see.
struct Context<'a> {
    spec: &'a RunSpec,
    structure: &'a ParaHermitianStructure,
    sample: &'a [Point],
    triples: Vec<[TensorField; 3]>,
    b: Option<Result<BTransformation>>,
}

impl Context<'_> {
    fn order(&self) -> usize {
        self.spec.jet_order
    }

    fn names(&self) -> &[String] {
        self.structure.chart().coord_names()
    }

    fn describe(&self, f: &TensorField) -> String {
        match f.exprs() {
            Some(e) => {
                let parts: Vec<String> = e.iter().map(|c| c.display_with(self.names()).to_string()).collect();
                format!("[{}]", parts.join(", "))
            }
            None => "<procedure>".into(),
        }
    }

    fn triple_inputs(&self, i: usize) -> Vec<String> {
        self.triples[i].iter().map(|f| self.describe(f)).collect()
    }

    fn witness(&self, label: impl Into<String>, point_index: usize, inputs: Vec<String>, residual: f64) -> Witness {
        Witness {
            label: label.into(),
            point_index,
            point: self.sample[point_index].coords().to_vec(),
            inputs,
            residual,
        }
    }

    fn b(&self) -> Result<&BTransformation> {
        match &self.b {
            Some(Ok(t)) => Ok(t),
            Some(Err(e)) => Err(e.clone()),
            None => Err(Error::InvalidStructure("suite requires a [b_field] section".into())),
        }
    }
}

struct Outcome {
    status: Status,
    max_residual: Option<f64>,
    witnesses: Vec<Witness>,
    details: serde_json::Value,
}

fn verdict(ok: bool) -> Status {
    if ok {
        Status::Pass
    } else {
        Status::Fail
    }
}

/// Index and value of the largest entry; the first wins ties.
fn worst(values: &[f64]) -> (usize, f64) {
    values
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, &v)| if v > acc.1 { (i, v) } else { acc })
}

fn per_point<F>(sample: &[Point], f: F) -> Result<Vec<f64>>
where
    F: Fn(&Point) -> Result<f64> + Sync + Send,
{
    sample.par_iter().map(f).collect()
}

fn suite_validate(cx: &Context, tol: f64) -> Result<Outcome> {
    let r = validate_structure(cx.structure, cx.sample, tol)?;
    let mut witnesses = Vec::new();
    if !r.passed {
        let each = per_point(cx.sample, |p| Ok(validate_structure(cx.structure, std::slice::from_ref(p), tol)?.max_residual()))?;
        let (i, v) = worst(&each);
        witnesses.push(cx.witness("structure residual", i, vec![], v));
    }
    Ok(Outcome {
        status: verdict(r.passed),
        max_residual: Some(r.max_residual()),
        witnesses,
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

fn suite_classify(cx: &Context, tol: f64) -> Result<Outcome> {
    let r = classify(cx.structure, cx.sample, tol)?;
    let residual = r.residuals.cyclic_plus.max(r.residuals.cyclic_minus);
    let mut witnesses = Vec::new();
    if !r.consistent {
        let each = per_point(cx.sample, |p| {
            let c = classify(cx.structure, std::slice::from_ref(p), tol)?;
            Ok(c.residuals.cyclic_plus.max(c.residuals.cyclic_minus))
        })?;
        let (i, v) = worst(&each);
        witnesses.push(cx.witness("cyclic Nijenhuis identity", i, vec![], v));
    }
    Ok(Outcome {
        status: verdict(r.consistent),
        max_residual: Some(residual),
        witnesses,
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

fn suite_adapted(cx: &Context, tol: f64) -> Result<Outcome> {
    let c = classify(cx.structure, cx.sample, 1e-9)?;
    let side = match (c.p_integrable, c.n_integrable) {
        (true, true) => Side::Both,
        (true, false) => Side::P,
        (false, true) => Side::N,
        (false, false) => {
            return Ok(Outcome {
                status: Status::Fail,
                max_residual: None,
                witnesses: vec![],
                details: json!({ "reason": "neither eigenbundle is integrable" }),
            })
        }
    };
    let r = check_adapted(&Connection::canonical(cx.structure), cx.structure, side, cx.sample, 10, cx.spec.seed, tol)?;
    let mut residual: f64 = 0.0;
    let mut witnesses = Vec::new();
    for s in &r.sides {
        for (k, c) in s.conditions.iter().enumerate() {
            residual = residual.max(c.max);
            if let (true, Some(i)) = (c.max > tol, c.point_index) {
                witnesses.push(cx.witness(format!("condition {} on T{}", k + 1, s.sign.symbol()), i, vec![], c.max));
            }
        }
    }
    Ok(Outcome {
        status: verdict(r.adapted()),
        max_residual: Some(residual),
        witnesses,
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

fn axiom_suite(cx: &Context, projection: Option<Sign>) -> Result<BracketReport> {
    let s = cx.structure;
    courant_axiom_suite(cx.sample, cx.order(), &cx.triples, cx.spec.seed, |p, order| {
        let local = s.local(p, order)?;
        let br = match projection {
            Some(sign) => AssociatedBracket::projected_canonical(local, sign)?,
            None => AssociatedBracket::d_bracket(local)?,
        };
        Ok(Box::new(br) as Box<dyn PointBracket>)
    })
}

fn axiom_witnesses(cx: &Context, r: &BracketReport, axioms: &[usize], tol: f64) -> Vec<Witness> {
    r.witnesses
        .iter()
        .filter(|w| axioms.contains(&w.axiom) && w.residual > tol)
        .map(|w| cx.witness(format!("axiom {}", w.axiom), w.point_index, cx.triple_inputs(w.field_index), w.residual))
        .collect()
}

fn suite_courant(cx: &Context, sign: Sign, tol: f64) -> Result<Outcome> {
    let r = axiom_suite(cx, Some(sign))?;
    let residual = r.axiom1.unwrap_or(0.0).max(r.axiom2.unwrap_or(0.0)).max(r.axiom3);
    Ok(Outcome {
        status: verdict(residual <= tol),
        max_residual: Some(residual),
        witnesses: axiom_witnesses(cx, &r, &[1, 2, 3], tol),
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

fn suite_d_axioms(cx: &Context, tol: f64) -> Result<Outcome> {
    let r = axiom_suite(cx, None)?;
    let residual = r.axiom1.unwrap_or(0.0).max(r.axiom2.unwrap_or(0.0));
    Ok(Outcome {
        status: verdict(residual <= tol),
        max_residual: Some(residual),
        witnesses: axiom_witnesses(cx, &r, &[1, 2], tol),
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

/// The D-bracket is not a Courant bracket; this suite succeeds when it
/// finds a Jacobi defect and records where.
fn suite_jacobi_witness(cx: &Context, tol: f64) -> Result<Outcome> {
    let r = axiom_suite(cx, None)?;
    let found = r.axiom3 > tol;
    Ok(Outcome {
        status: if found { Status::ExpectedFail } else { Status::Fail },
        max_residual: Some(r.axiom3),
        witnesses: axiom_witnesses(cx, &r, &[3], tol),
        details: json!({
            "expected": "Jacobi defect of the D-bracket",
            "defect_found": found,
            "axioms": r,
        }),
    })
}

fn suite_section(cx: &Context, tol: f64) -> Result<Outcome> {
    let n = cx.structure.chart().require_split()?;
    let dim = cx.structure.dim();
    let vars: Vec<usize> = (0..n).collect();
    let mut rng = stream(cx.spec.seed, 2);
    let fields: Vec<TensorField> =
        (0..3 * cx.spec.sample.fields).map(|_| random_polynomial_field(&mut rng, dim, 2, Some(&vars))).collect();
    let order = cx.order();
    let rows = cx
        .sample
        .par_iter()
        .map(|p| {
            let local = cx.structure.local(p, order)?;
            let minus = AssociatedBracket::projected_canonical(local.clone(), Sign::Minus)?;
            let d = AssociatedBracket::d_bracket(local)?;
            let ev = fields.iter().map(|f| f.eval(p, order)).collect::<Result<Vec<_>>>()?;
            let (mut m, mut j): (f64, f64) = (0.0, 0.0);
            for c in ev.chunks(3) {
                m = m.max(minus.bracket(&c[0], &c[1])?.max_abs_value());
                j = j.max(jacobi_defect(&d, &c[0], &c[1], &c[2])?.max_abs_value());
            }
            Ok((m, j))
        })
        .collect::<Result<Vec<_>>>()?;
    let minus: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let jac: Vec<f64> = rows.iter().map(|r| r.1).collect();
    let (mi, mv) = worst(&minus);
    let (ji, jv) = worst(&jac);
    let mut witnesses = Vec::new();
    if mv > tol {
        witnesses.push(cx.witness("minus bracket", mi, vec![], mv));
    }
    if jv > tol {
        witnesses.push(cx.witness("Jacobi defect", ji, vec![], jv));
    }
    Ok(Outcome {
        status: verdict(mv <= tol && jv <= tol),
        max_residual: Some(mv.max(jv)),
        witnesses,
        details: json!({ "minus_bracket": mv, "jacobi_defect": jv, "fields": fields.len() }),
    })
}

fn suite_maurer_cartan(cx: &Context, tol: f64) -> Result<Outcome> {
    let t = cx.b()?;
    let r = compatibility(t, cx.sample, cx.order(), tol)?;
    let mut witnesses = Vec::new();
    if r.max_disagreement > tol {
        let each = per_point(cx.sample, |p| Ok(compatibility(t, std::slice::from_ref(p), cx.order(), tol)?.max_disagreement))?;
        let (i, v) = worst(&each);
        witnesses.push(cx.witness("bracket side vs db + [b,b]", i, vec![], v));
    }
    Ok(Outcome {
        status: verdict(r.max_disagreement <= tol),
        max_residual: Some(r.max_disagreement),
        witnesses,
        details: serde_json::to_value(&r).expect("serializes"),
    })
}

fn suite_fluxes(cx: &Context, tol: f64) -> Result<Outcome> {
    let t = cx.b()?;
    if t.side() != Sign::Plus {
        return Err(Error::Unsupported("flux extraction is implemented for plus-side B-fields".into()));
    }
    let reports = cx.sample.par_iter().map(|p| extract_fluxes(t, p)).collect::<Result<Vec<_>>>()?;
    let each: Vec<f64> = reports
        .iter()
        .map(|f| f.reassembly_residual.max(f.mixed_residual).max(f.h_cov_residual))
        .collect();
    let (i, v) = worst(&each);
    let witnesses = if v > tol { vec![cx.witness("flux reassembly", i, vec![], v)] } else { vec![] };
    let fluxes: Vec<serde_json::Value> = reports
        .iter()
        .map(|f| {
            json!({
                "point": f.point,
                "h": f.h,
                "r_tilde": f.r_tilde,
                "h_cov": f.h_cov,
                "q_tilde": f.q_tilde,
                "reassembly_residual": f.reassembly_residual,
                "mixed_residual": f.mixed_residual,
            })
        })
        .collect();
    Ok(Outcome {
        status: verdict(v <= tol),
        max_residual: Some(v),
        witnesses,
        details: json!({ "n": reports.first().map_or(0, |f| f.n), "points": fluxes }),
    })
}

fn suite_twisted(cx: &Context, tol: f64) -> Result<Outcome> {
    let t = cx.b()?;
    let order = cx.order().max(2);
    let rows = cx
        .sample
        .par_iter()
        .map(|p| {
            let mut best = (0.0f64, 0usize);
            for (k, [x, y, _]) in cx.triples.iter().enumerate() {
                let m = twisted_d_bracket(t, x, y, p, order)?.mismatch();
                if m > best.0 {
                    best = (m, k);
                }
            }
            Ok(best)
        })
        .collect::<Result<Vec<_>>>()?;
    let each: Vec<f64> = rows.iter().map(|r| r.0).collect();
    let (i, v) = worst(&each);
    let witnesses = if v > tol {
        vec![cx.witness("transformed vs twisted", i, cx.triple_inputs(rows[i].1)[..2].to_vec(), v)]
    } else {
        vec![]
    };
    Ok(Outcome {
        status: verdict(v <= tol),
        max_residual: Some(v),
        witnesses,
        details: json!({ "pairs": cx.triples.len() }),
    })
}

fn run_suite(cx: &Context, name: &str) -> SuiteResult {
    let tol = cx.spec.tolerance(name);
    let outcome = match name {
        "validate" => suite_validate(cx, tol),
        "classify" => suite_classify(cx, tol),
        "adapted" => suite_adapted(cx, tol),
        "courant_plus" => suite_courant(cx, Sign::Plus, tol),
        "courant_minus" => suite_courant(cx, Sign::Minus, tol),
        "d_bracket_axioms" => suite_d_axioms(cx, tol),
        "jacobi_defect_witness" => suite_jacobi_witness(cx, tol),
        "section_condition" => suite_section(cx, tol),
        "maurer_cartan" => suite_maurer_cartan(cx, tol),
        "fluxes" => suite_fluxes(cx, tol),
        "twisted" => suite_twisted(cx, tol),
        other => Err(Error::InvalidStructure(format!("unknown suite `{other}`"))),
    };
    match outcome {
        Ok(o) => SuiteResult {
            name: name.into(),
            status: o.status,
            tolerance: tol,
            max_residual: o.max_residual,
            witnesses: o.witnesses,
            error: None,
            details: o.details,
        },
        Err(e) => SuiteResult {
            name: name.into(),
            status: Status::Error,
            tolerance: tol,
            max_residual: None,
            witnesses: vec![],
            error: Some(format!("{name}: {e}")),
            details: serde_json::Value::Null,
        },
    }
}

/// Builds everything the spec describes and runs its suites. Errors are
/// spec errors; suite failures are recorded in the report.
pub fn run_spec(spec: &RunSpec) -> Result<Report> {
    let start = Instant::now();
    for (i, s) in spec.suites.iter().enumerate() {
        if NEEDS_B.contains(&s.as_str()) && spec.b_field.is_none() {
            return Err(Error::SpecParse {
                location: format!("suites[{i}]"),
                message: format!("suite `{s}` requires a [b_field] section"),
            });
        }
    }
    let model: Model = build_model(&spec.model)?;
    let structure = model.structure();
    let sample = build_sample(spec, &model)?;
    let dim = structure.dim();
    let mut rng = stream(spec.seed, 1);
    let triples = (0..spec.sample.fields)
        .map(|_| std::array::from_fn(|_| random_polynomial_field(&mut rng, dim, 2, None)))
        .collect();
    let b = spec.b_field.as_ref().map(|b| build_b_field(b, structure, &sample));
    if let Some(Err(e @ Error::SpecParse { .. })) = &b {
        return Err(e.clone());
    }
    let cx = Context {
        spec,
        structure,
        sample: &sample,
        triples,
        b,
    };
    let suites: Vec<SuiteResult> = spec.suites.iter().map(|s| run_suite(&cx, s)).collect();
    let mut report = Report {
        report_version: REPORT_VERSION,
        model: model.name().into(),
        dim,
        seed: spec.seed,
        sample_seed: spec.sample_seed(),
        jet_order: spec.jet_order,
        points: sample.len(),
        passed: suites.iter().all(|s| s.status.ok()),
        suites,
        determinism_hash: String::new(),
        wall_time_seconds: 0.0,
    };
    report.determinism_hash = report.compute_hash();
    report.wall_time_seconds = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Reads `spec_path`, writes the JSON report to `output_path`, prints the
/// summary table and returns the process exit code.
pub fn run(spec_path: &Path, output_path: &Path, verbose: bool) -> i32 {
    let text = match std::fs::read_to_string(spec_path) {
        Ok(t) => t,
        Err(e) => {
            eprintln!("error: cannot read {}: {e}", spec_path.display());
            return 2;
        }
    };
    let report = match parse_spec(&text).and_then(|s| run_spec(&s)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return 2;
        }
    };
    if let Err(e) = std::fs::write(output_path, report.to_json() + "\n") {
        eprintln!("error: cannot write {}: {e}", output_path.display());
        return 2;
    }
    print_report(&report, verbose);
    if report.passed {
        0
    } else {
        1
    }
}
