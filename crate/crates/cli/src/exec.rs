//! Job execution: every subcommand and every scenario-file job funnels
//! through [`run_job`], so the terminal and batch paths cannot drift
//! apart. Sweeps expand to combinations in declaration order; a failing
//! combination marks the job failed but does not abort the batch.

use std::collections::BTreeMap;
use std::path::Path;
use std::time::Instant;

use rayon::prelude::*;
use serde_json::{Map, Value};

use fbf_core::applications::{
    k3_twistor_count, nodal_cp2, severi_one_point, todd_genus, universal_poly,
};
use fbf_core::blowup::{
    expand_formula, family_dimension_drop, grr_crosscheck, obstruction_bundle, sw_dimension,
    DimensionData, DimensionKind, FamilyBlowupScenario, Variant,
};
use fbf_core::error::Error;
use fbf_core::expr::parse_expression;
use fbf_core::kuranishi::{asw_evaluate, KuranishiData};
use fbf_core::schema::{
    cartesian, class_string, Catalog, JobDto, ScenarioDto, ScenarioFile, UniversalPolyDto,
};
use fbf_core::surfaces::Surface;
use fbf_core::{GradedClass, Rat};

use crate::render::{Report, Row};

/// An argument or file-parse problem. Failures of the work itself are
/// recorded on the report instead and drive the exit code from there.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
}

fn job_echo(job: &JobDto) -> Value {
    let mut m = Map::new();
    m.insert("cmd".into(), Value::String(job.cmd.clone()));
    for (k, v) in &job.params {
        m.insert(k.clone(), v.clone());
    }
    Value::Object(m)
}

fn rat_value(r: &Rat) -> Value {
    Value::String(r.to_string())
}

fn combo_rats(combo: &[(String, i64)]) -> BTreeMap<String, Rat> {
    combo
        .iter()
        .map(|(k, v)| (k.clone(), Rat::from_int(*v)))
        .collect()
}

fn combo_int(combo: &[(String, i64)], key: &str) -> Option<i64> {
    combo.iter().find(|(k, _)| k == key).map(|(_, v)| *v)
}

fn resolve_int(job: &JobDto, combo: &[(String, i64)], key: &str) -> Result<Option<i64>, Error> {
    match combo_int(combo, key) {
        Some(v) => Ok(Some(v)),
        None => job.int_arg(key),
    }
}

fn require<T>(v: Option<T>, what: &str) -> Result<T, Error> {
    v.ok_or_else(|| Error::invalid(format!("missing parameter {what:?}")))
}

fn truncate_class(c: &GradedClass, max_degree: Option<u32>) -> GradedClass {
    match max_degree {
        None => c.clone(),
        Some(k) => {
            let mut out = GradedClass::zero(c.space());
            for d in 0..=k {
                out = out
                    .add(&c.degree_part(d))
                    .expect("same space by construction");
            }
            out
        }
    }
}

fn class_field(c: &GradedClass, max_degree: Option<u32>) -> Value {
    Value::String(class_string(&truncate_class(c, max_degree)))
}

fn base_row(combo: &[(String, i64)]) -> Row {
    let mut row = Row::new();
    for (k, v) in combo {
        row.params.insert(k.clone(), Value::from(*v));
    }
    row
}

fn describe_combo(combo: &[(String, i64)]) -> String {
    if combo.is_empty() {
        return "the single instance".into();
    }
    combo
        .iter()
        .map(|(k, v)| format!("{k}={v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

/// Runs one job against a catalog. Sweep combinations evaluate through
/// `pool` when one is given (results stay in declaration order); errors
/// in a combination are recorded as warnings and mark the job failed.
pub fn run_job(
    catalog: &Catalog,
    job: &JobDto,
    max_degree: Option<u32>,
    pool: Option<&rayon::ThreadPool>,
) -> Result<Report, Error> {
    let sweep = job.sweep()?;
    let combos = cartesian(&sweep);
    let mut report = Report::new(job_echo(job));

    let eval = |combo: &Vec<(String, i64)>| -> Result<Vec<Row>, String> {
        dispatch(catalog, job, combo, max_degree)
            .map_err(|e| format!("{} failed: {e}", describe_combo(combo)))
    };
    let outcomes: Vec<Result<Vec<Row>, String>> = match pool {
        Some(p) if combos.len() > 1 => p.install(|| combos.par_iter().map(eval).collect()),
        _ => combos.iter().map(eval).collect(),
    };
    for outcome in outcomes {
        match outcome {
            Ok(mut rows) => report.results.append(&mut rows),
            Err(msg) => {
                report.warnings.push(msg);
                report.failed = true;
            }
        }
    }

    match job.cmd.as_str() {
        "severi" | "nodal-cp2" | "k3-twistor" => {
            report.notes.push(
                "the value is the one-point integral factor; multiply by the \
                 invariant of the underlying structure"
                    .into(),
            );
            report
                .notes
                .push("sign fixed by the +1 normalization of the trivial evaluation".into());
        }
        "asw" => {
            report
                .notes
                .push("sign fixed by the +1 normalization of the trivial evaluation".into());
        }
        "grr-check" => {
            if let Ok(Some(ms)) = job.range_arg("m") {
                let skipped: Vec<i64> = ms
                    .into_iter()
                    .filter(|m| m.abs() < 3 || m.rem_euclid(2) == 0)
                    .collect();
                if !skipped.is_empty() {
                    report.warnings.push(format!(
                        "skipped m values {skipped:?}: the comparison needs odd m with |m| >= 3"
                    ));
                }
            }
        }
        "selftest" => {
            let failed = report
                .results
                .iter()
                .filter(|r| r.value.get("passed") == Some(&Value::Bool(false)))
                .count();
            if failed > 0 {
                report.failed = true;
            }
            report.notes.push(format!(
                "{}/{} checks passed",
                report.results.len() - failed,
                report.results.len()
            ));
        }
        _ => {}
    }
    Ok(report)
}

fn dispatch(
    catalog: &Catalog,
    job: &JobDto,
    combo: &[(String, i64)],
    max_degree: Option<u32>,
) -> Result<Vec<Row>, Error> {
    let params = combo_rats(combo);
    match job.cmd.as_str() {
        "nodal-cp2" => {
            let d = require(resolve_int(job, combo, "d")?, "d")?;
            Ok(vec![base_row(combo)
                .param("d", d)
                .field("value", rat_value(&nodal_cp2(d)))])
        }
        "k3-twistor" => {
            let square = resolve_int(job, combo, "square")?.unwrap_or(0);
            Ok(vec![base_row(combo)
                .param("square", square)
                .field("value", rat_value(&k3_twistor_count(square)))])
        }
        "severi" => {
            let base = require(job.str_arg("base")?, "base")?;
            let entry = catalog.model(base)?;
            let data = entry
                .data
                .clone()
                .ok_or_else(|| Error::invalid(format!("model {base:?} is not a surface")))?;
            let surface = Surface {
                space: entry.space.clone(),
                tangent: entry.tangent.clone(),
                data,
            };
            let c_src = require(job.str_arg("c")?, "c")?;
            let c = parse_expression(c_src, &entry.space, &params)?;
            let p = require(resolve_int(job, combo, "p")?, "p")?;
            let value = severi_one_point(&surface, &c, p)?;
            Ok(vec![base_row(combo).field("value", rat_value(&value))])
        }
        "todd-genus" => {
            let k_sq = require(job.rat_arg("K2")?, "K2")?;
            let c2 = require(job.rat_arg("c2")?, "c2")?;
            Ok(vec![
                base_row(combo).field("value", rat_value(&todd_genus(&k_sq, &c2)))
            ])
        }
        "universal-poly" => {
            let p = require(resolve_int(job, combo, "p")?, "p")?;
            let dto = UniversalPolyDto::from_poly(&universal_poly(p)?);
            Ok(vec![base_row(combo)
                .field("p", dto.p)
                .field(
                    "polynomial",
                    serde_json::to_value(&dto.polynomial).expect("string map"),
                )
                .field("expanded", poly_text(&dto))
                .field("verified", dto.verified)])
        }
        "grr-check" => {
            let base = require(job.str_arg("base")?, "base")?;
            let entry = catalog.model(base)?;
            let ns_ref = require(job.bundle_arg("Ns")?, "Ns")?;
            let ns = catalog.bundle(&ns_ref, entry, &params)?;
            let l0 = match job.str_arg("l0")? {
                Some(src) => parse_expression(src, &entry.space, &params)?,
                None => GradedClass::zero(&entry.space),
            };
            let m_list = match combo_int(combo, "m") {
                Some(m) => vec![m],
                None => require(job.range_arg("m")?, "m")?,
            };
            let mut rows = Vec::new();
            for m in m_list {
                if m.abs() < 3 || m.rem_euclid(2) == 0 {
                    continue;
                }
                let sc = FamilyBlowupScenario::new(
                    Variant::Smooth,
                    &entry.space,
                    l0.clone(),
                    ns.clone(),
                    m,
                    GradedClass::one(&entry.space),
                    None,
                )?;
                let rep = grr_crosscheck(&sc)?;
                rows.push(
                    base_row(combo)
                        .param("m", m)
                        .field("equal", rep.equal)
                        .field("rank", rat_value(&rep.rank))
                        .field("lhs", class_field(&rep.lhs, max_degree))
                        .field("rhs", class_field(&rep.rhs, max_degree)),
                );
            }
            Ok(rows)
        }
        "blowup-expand" => {
            let m_list = match combo_int(combo, "m") {
                Some(m) => vec![m],
                None => require(job.range_arg("m")?, "m")?,
            };
            let mut obj = job.object_without_sweep();
            let mut rows = Vec::new();
            let many_m = m_list.len() > 1;
            for m in m_list {
                obj.insert("m".into(), Value::from(m));
                let dto: ScenarioDto = serde_json::from_value(Value::Object(obj.clone()))
                    .map_err(|e| Error::invalid(format!("scenario: {e}")))?;
                let sc = catalog.scenario(&dto, &params)?;
                let w = obstruction_bundle(&sc)?;
                for term in expand_formula(&sc)? {
                    let mut row = base_row(combo);
                    if many_m {
                        row = row.param("m", m);
                    }
                    rows.push(
                        row.field("i", term.index)
                            .field("degree", term.degree)
                            .field("class", class_field(&term.class, max_degree))
                            .field("obstructionRank", w.rank()),
                    );
                }
            }
            Ok(rows)
        }
        "asw" => {
            let base = require(job.str_arg("base")?, "base")?;
            let entry = catalog.model(base)?;
            let v = catalog.bundle(&require(job.bundle_arg("v")?, "v")?, entry, &params)?;
            let w = catalog.bundle(&require(job.bundle_arg("w")?, "w")?, entry, &params)?;
            let eta = match job.str_arg("insertion")? {
                Some(src) => parse_expression(src, &entry.space, &params)?,
                None => GradedClass::one(&entry.space),
            };
            let k = match resolve_int(job, combo, "d")? {
                Some(d) => {
                    let d = u32::try_from(d).map_err(|_| Error::RangeError {
                        context: format!("exponent {d} is negative"),
                    })?;
                    KuranishiData::new(v, w, d, eta)?
                }
                None => KuranishiData::balanced(v, w, eta)?,
            };
            let rep = asw_evaluate(&k)?;
            Ok(vec![base_row(combo)
                .param("d", k.d)
                .field("value", rat_value(&rep.value))
                .field("topDegreeChecked", rep.top_degree_checked)])
        }
        "dims" => {
            let c_sq = require(job.rat_arg("C2")?, "C2")?;
            let ck = require(job.rat_arg("CK")?, "CK")?;
            let (k_sq, c2) = match (job.rat_arg("chi")?, job.rat_arg("sigma")?) {
                (Some(chi), Some(sigma)) => {
                    let k_sq = Rat::from_int(3) * sigma + Rat::from_int(2) * chi.clone();
                    (k_sq, chi)
                }
                _ => (
                    job.rat_arg("K2")?.unwrap_or_else(Rat::zero),
                    job.rat_arg("c2")?.unwrap_or_else(Rat::zero),
                ),
            };
            let dims = DimensionData {
                c_sq,
                ck,
                k_sq,
                c2,
                pg: resolve_int(job, combo, "pg")?.unwrap_or(0) as u32,
                q: resolve_int(job, combo, "q")?.unwrap_or(0) as u32,
                dim_b: resolve_int(job, combo, "dimB")?.unwrap_or(0),
                fbd: resolve_int(job, combo, "fbd")?.unwrap_or(0),
            };
            let mut row = base_row(combo)
                .field(
                    "spinC",
                    rat_value(&sw_dimension(DimensionKind::SpinC, &dims)?),
                )
                .field(
                    "gromovTaubes",
                    rat_value(&sw_dimension(DimensionKind::GromovTaubes, &dims)?),
                )
                .field(
                    "family",
                    rat_value(&sw_dimension(DimensionKind::Family, &dims)?),
                )
                .field(
                    "algebraicFamily",
                    rat_value(&sw_dimension(DimensionKind::AlgebraicFamily, &dims)?),
                );
            if let Some(m) = resolve_int(job, combo, "m")? {
                row = row.field("drop", family_dimension_drop(m)?);
            }
            Ok(vec![row])
        }
        "exist" => {
            let c_sq = require(job.rat_arg("C2")?, "C2")?;
            let ck = require(job.rat_arg("CK")?, "CK")?;
            let mult = match job.params.get("mult") {
                Some(Value::String(s)) => parse_mult(s)?,
                _ => require(job.int_list_arg("mult")?, "mult")?,
            };
            let dims = DimensionData {
                c_sq,
                ck,
                k_sq: Rat::zero(),
                c2: Rat::zero(),
                pg: 0,
                q: 0,
                dim_b: 0,
                fbd: 0,
            };
            let rep = fbf_core::blowup::existence_check(&dims, &mult)?;
            Ok(vec![base_row(combo)
                .field("satisfied", rep.satisfied)
                .field("slack", rat_value(&rep.slack))])
        }
        "selftest" => {
            let mut rows = Vec::new();
            for outcome in fbf_core::selftest::run_all() {
                rows.push(
                    base_row(combo)
                        .field("criterion", outcome.index)
                        .field("name", outcome.name)
                        .field("passed", outcome.passed)
                        .field("detail", outcome.detail),
                );
            }
            Ok(rows)
        }
        "space-show" => {
            let name = require(job.str_arg("name")?, "name")?;
            let entry = catalog.model(name)?;
            let dto = fbf_core::schema::space_dto(&entry.space);
            let mut rows = Vec::new();
            for g in &dto.generators {
                rows.push(
                    Row::new()
                        .field("kind", "generator")
                        .field("name", g.name.clone())
                        .field("degree", g.degree)
                        .field("parity", format!("{:?}", g.parity).to_lowercase()),
                );
            }
            for r in &dto.rules {
                rows.push(
                    Row::new()
                        .field("kind", "rule")
                        .field("lhs", r.lhs.clone())
                        .field("rhs", r.rhs.clone()),
                );
            }
            for (mono, val) in &dto.integrals {
                rows.push(
                    Row::new()
                        .field("kind", "integral")
                        .field("lhs", mono.clone())
                        .field("value", rat_value(val)),
                );
            }
            Ok(rows)
        }
        "bundle-chern" => {
            let base = require(job.str_arg("base")?, "base")?;
            let entry = catalog.model(base)?;
            let spec = require(job.bundle_arg("bundle")?, "bundle")?;
            let b = catalog.bundle(&spec, entry, &params)?;
            let mut row = base_row(combo).field("rank", b.rank());
            for i in 1..=entry.space.complex_dim() {
                let c = b.chern(i);
                if !c.is_zero() {
                    row = row.field(&format!("c{i}"), class_field(&c, max_degree));
                }
            }
            row = row
                .field("ch", class_field(&b.chern_character(), max_degree))
                .field("td", class_field(&b.todd(), max_degree));
            for i in 1..=entry.space.complex_dim() {
                let s = b.segre(i);
                if !s.is_zero() {
                    row = row.field(&format!("s{i}"), class_field(&s, max_degree));
                }
            }
            Ok(vec![row])
        }
        other => Err(Error::UnknownName {
            name: other.to_string(),
        }),
    }
}

fn parse_mult(s: &str) -> Result<Vec<i64>, Error> {
    s.split(',')
        .map(|p| {
            p.trim()
                .parse::<i64>()
                .map_err(|_| Error::invalid(format!("multiplicity {p:?} is not an integer")))
        })
        .collect()
}

fn poly_text(dto: &UniversalPolyDto) -> String {
    if dto.polynomial.is_empty() {
        return "0".into();
    }
    let mut parts = Vec::new();
    for (name, coeff) in &dto.polynomial {
        if *coeff == Rat::one() {
            parts.push(name.clone());
        } else {
            parts.push(format!("{coeff}*{name}"));
        }
    }
    parts.join(" + ")
}

/// Parses and executes a scenario file: jobs run in declaration order,
/// each one's sweep fanned out over `jobs` threads. Unless `strict`, a
/// failed job is reported and the batch continues.
pub fn run_file(
    path: &Path,
    jobs: usize,
    strict: bool,
    max_degree: Option<u32>,
    timing: bool,
) -> Result<(Vec<Report>, bool), Failure> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
    let mut de = serde_json::Deserializer::from_str(&text);
    let file: ScenarioFile = serde_path_to_error::deserialize(&mut de)
        .map_err(|e| Failure::Usage(format!("{}: {}: {}", path.display(), e.path(), e.inner())))?;
    let catalog = Catalog::with_file(Some(&file)).map_err(|e| Failure::Usage(e.to_string()))?;
    let pool = if jobs > 1 {
        Some(
            rayon::ThreadPoolBuilder::new()
                .num_threads(jobs)
                .build()
                .map_err(|e| Failure::Usage(e.to_string()))?,
        )
    } else {
        None
    };

    let mut reports = Vec::new();
    let mut any_failed = false;
    for job in &file.jobs {
        let started = Instant::now();
        let mut report = match run_job(&catalog, job, max_degree, pool.as_ref()) {
            Ok(r) => r,
            Err(e) => {
                let mut r = Report::new(job_echo(job));
                r.warnings.push(e.to_string());
                r.failed = true;
                r
            }
        };
        if timing {
            report.timing_ms = Some(started.elapsed().as_millis());
        }
        any_failed |= report.failed;
        let stop = strict && report.failed;
        reports.push(report);
        if stop {
            break;
        }
    }
    Ok((reports, any_failed))
}
