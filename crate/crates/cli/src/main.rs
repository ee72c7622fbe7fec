//! Terminal front end. Every subcommand assembles the same job object
//! that a scenario file would contain and hands it to the shared
//! executor, so flag-driven and file-driven runs agree by construction.

mod exec;
mod render;

use std::path::PathBuf;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value};

use fbf_core::schema::{Catalog, JobDto};

use exec::{run_file, run_job, Failure};
use render::{render, Format, RenderOpts};

#[derive(Parser)]
#[command(
    name = "fbf",
    version,
    about = "Exact intersection arithmetic for family blowup formulas"
)]
struct Cli {
    /// Output format.
    #[arg(long, global = true, value_enum, default_value_t = Format::Table)]
    format: Format,
    /// Drop class terms above this cohomological degree when rendering.
    #[arg(long, global = true, value_name = "K")]
    max_degree: Option<u32>,
    /// Annotate non-integer rationals with a decimal approximation
    /// (display only; stored values stay exact).
    #[arg(long, global = true)]
    decimal: bool,
    /// Record per-job wall-clock time in the report.
    #[arg(long, global = true)]
    timing: bool,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Inspect a built-in model space.
    #[command(subcommand)]
    Space(SpaceCmd),
    /// Characteristic classes of bundles over a model space.
    #[command(subcommand)]
    Bundle(BundleCmd),
    /// The wall-crossing correction: expansion and its sheaf crosscheck.
    #[command(subcommand)]
    Blowup(BlowupCmd),
    /// Expected dimensions and the family dimension drop.
    Dims(DimsArgs),
    /// Existence inequality for a prescribed multiplicity tuple.
    Exist(ExistArgs),
    /// Evaluate a localized obstruction integral over a projective bundle.
    Asw(AswArgs),
    /// One-point enumerative factor for a polarized surface model.
    Severi(SeveriArgs),
    /// Universal node polynomial in C2, CK, K2, c2.
    UniversalPoly(UniversalPolyArgs),
    /// Run the built-in acceptance checks.
    Selftest,
    /// Execute the jobs in a scenario file.
    Run(RunArgs),
}

#[derive(Subcommand)]
enum SpaceCmd {
    /// List a model's generators, rewrite rules, and integrals.
    Show { name: String },
}

#[derive(Subcommand)]
enum BundleCmd {
    /// Chern classes, Chern character, Todd class, and Segre classes.
    Chern {
        /// Base model name.
        #[arg(long)]
        space: String,
        /// Bundle shorthand ("tangent", "trivial2", "O(3)+O(-1)") or
        /// inline JSON description.
        #[arg(long, allow_hyphen_values = true)]
        bundle: String,
    },
}

#[derive(Subcommand)]
enum BlowupCmd {
    /// Expand the correction term into its graded summands.
    Expand(ExpandArgs),
    /// Compare expansion ranks against the direct sheaf computation.
    Crosscheck(CrosscheckArgs),
}

#[derive(Args)]
struct ExpandArgs {
    /// "smooth" or "algebraic".
    #[arg(long, default_value = "smooth")]
    variant: String,
    #[arg(long, default_value = "point")]
    base: String,
    /// Restriction class expression over the base, e.g. "2*h".
    #[arg(long, default_value = "0", allow_hyphen_values = true)]
    l0: String,
    /// Twisted normal bundle: shorthand or inline JSON.
    #[arg(long, allow_hyphen_values = true)]
    ns: String,
    /// Multiplicity: a single integer or a range "lo..hi[..odd|even|STEP]".
    #[arg(long, allow_hyphen_values = true)]
    m: String,
    /// Insertion class expression (defaults to 1).
    #[arg(long, allow_hyphen_values = true)]
    insertion: Option<String>,
    /// Exceptional restriction bundle for the algebraic variant.
    #[arg(long = "e-restr", allow_hyphen_values = true)]
    e_restr: Option<String>,
    /// Named sweep values, repeatable: NAME=INT or NAME=lo..hi[..odd|even|STEP].
    #[arg(long, value_name = "NAME=RANGE")]
    param: Vec<String>,
}

#[derive(Args)]
struct CrosscheckArgs {
    #[arg(long)]
    base: String,
    /// Twisted normal bundle: shorthand or inline JSON.
    #[arg(long, allow_hyphen_values = true)]
    ns: String,
    /// Multiplicity: a single integer or a range "lo..hi[..odd|even|STEP]".
    #[arg(long, allow_hyphen_values = true)]
    m: String,
    /// Restriction class expression (defaults to 0).
    #[arg(long, allow_hyphen_values = true)]
    l0: Option<String>,
}

#[derive(Args)]
struct DimsArgs {
    /// Self-intersection of the class.
    #[arg(long = "C2", allow_hyphen_values = true)]
    c_sq: String,
    /// Pairing of the class with the canonical class.
    #[arg(long = "CK", allow_hyphen_values = true)]
    ck: String,
    /// Canonical self-intersection (alternative to --chi/--sigma).
    #[arg(long = "K2", allow_hyphen_values = true)]
    k_sq: Option<String>,
    /// Euler number (alternative to --chi/--sigma).
    #[arg(long = "c2", allow_hyphen_values = true)]
    c2: Option<String>,
    /// Euler number; combined with --sigma fills K2 = 3*sigma + 2*chi.
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<String>,
    /// Signature; combined with --chi fills K2 and c2.
    #[arg(long, allow_hyphen_values = true)]
    sigma: Option<String>,
    #[arg(long)]
    pg: Option<i64>,
    #[arg(long)]
    q: Option<i64>,
    /// Dimension of the family base.
    #[arg(long = "dim-b", allow_negative_numbers = true)]
    dim_b: Option<i64>,
    /// Fiberwise base dimension for the algebraic family count.
    #[arg(long)]
    fbd: Option<i64>,
    /// Also report the family dimension drop for this multiplicity.
    #[arg(long, allow_negative_numbers = true)]
    m: Option<i64>,
}

#[derive(Args)]
struct ExistArgs {
    #[arg(long = "C2", allow_hyphen_values = true)]
    c_sq: String,
    #[arg(long = "CK", allow_hyphen_values = true)]
    ck: String,
    /// Comma-separated multiplicities, e.g. "2,2,2".
    #[arg(long)]
    mult: String,
}

#[derive(Args)]
struct AswArgs {
    #[arg(long, default_value = "point")]
    base: String,
    /// Positive-part bundle: shorthand or inline JSON.
    #[arg(long, allow_hyphen_values = true)]
    v: String,
    /// Obstruction bundle: shorthand or inline JSON.
    #[arg(long, allow_hyphen_values = true)]
    w: String,
    /// Normalizing exponent; defaults to rank(v) - rank(w) - 1.
    #[arg(long)]
    d: Option<i64>,
    /// Insertion class expression over the base (defaults to 1).
    #[arg(long, allow_hyphen_values = true)]
    insertion: Option<String>,
}

#[derive(Args)]
struct SeveriArgs {
    #[arg(long)]
    base: String,
    /// Curve class expression, e.g. "4*h".
    #[arg(long, allow_hyphen_values = true)]
    c: String,
    /// Codimension (number of prescribed nodes plus one).
    #[arg(long)]
    p: i64,
}

#[derive(Args)]
struct UniversalPolyArgs {
    #[arg(long)]
    p: i64,
}

#[derive(Args)]
struct RunArgs {
    /// Scenario file (JSON).
    file: PathBuf,
    /// Worker threads for sweep evaluation.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Abort the batch at the first failed job.
    #[arg(long)]
    strict: bool,
}

fn bundle_value(s: &str) -> Result<Value, Failure> {
    let t = s.trim();
    if t.starts_with('{') {
        let v: Value = serde_json::from_str(t)
            .map_err(|e| Failure::Usage(format!("bundle description: {e}")))?;
        if !v.is_object() {
            return Err(Failure::Usage(
                "bundle description must be a JSON object".into(),
            ));
        }
        Ok(v)
    } else {
        Ok(Value::String(t.to_string()))
    }
}

/// "5" -> 5, "1..10" -> [1,10], "-7..7..odd" -> [-7,7,"odd"],
/// "0..20..4" -> [0,20,4].
fn range_value(s: &str) -> Result<Value, Failure> {
    let bad = || {
        Failure::Usage(format!(
            "range {s:?}: expected INT or lo..hi[..odd|even|STEP]"
        ))
    };
    let parts: Vec<&str> = s.split("..").collect();
    let int = |p: &str| p.trim().parse::<i64>().map_err(|_| bad());
    match parts.as_slice() {
        [one] => Ok(Value::from(int(one)?)),
        [lo, hi] => Ok(Value::from(vec![int(lo)?, int(hi)?])),
        [lo, hi, tag] => {
            let ends = [Value::from(int(lo)?), Value::from(int(hi)?)];
            let last = match tag.trim() {
                "odd" => Value::from("odd"),
                "even" => Value::from("even"),
                step => Value::from(int(step)?),
            };
            Ok(Value::Array(vec![ends[0].clone(), ends[1].clone(), last]))
        }
        _ => Err(bad()),
    }
}

fn sweep_value(specs: &[String]) -> Result<Option<Value>, Failure> {
    if specs.is_empty() {
        return Ok(None);
    }
    let mut dims = Map::new();
    for spec in specs {
        let (name, range) = spec.split_once('=').ok_or_else(|| {
            Failure::Usage(format!("sweep parameter {spec:?}: expected NAME=RANGE"))
        })?;
        let range = range_value(range)?;
        let range = if range.is_array() {
            range
        } else {
            Value::Array(vec![range.clone(), range])
        };
        dims.insert(name.trim().to_string(), range);
    }
    Ok(Some(Value::Object(dims)))
}

fn job(cmd: &str, params: Vec<(&str, Value)>) -> JobDto {
    let mut map = Map::new();
    for (k, v) in params {
        map.insert(k.to_string(), v);
    }
    JobDto {
        cmd: cmd.to_string(),
        params: map,
    }
}

fn build_job(cmd: Cmd) -> Result<JobDto, Failure> {
    Ok(match cmd {
        Cmd::Space(SpaceCmd::Show { name }) => job("space-show", vec![("name", name.into())]),
        Cmd::Bundle(BundleCmd::Chern { space, bundle }) => job(
            "bundle-chern",
            vec![("base", space.into()), ("bundle", bundle_value(&bundle)?)],
        ),
        Cmd::Blowup(BlowupCmd::Expand(a)) => {
            let mut params = vec![
                ("variant", Value::from(a.variant)),
                ("base", Value::from(a.base)),
                ("l0", Value::from(a.l0)),
                ("Ns", bundle_value(&a.ns)?),
                ("m", range_value(&a.m)?),
            ];
            if let Some(eta) = a.insertion {
                params.push(("insertion", Value::from(eta)));
            }
            if let Some(e) = a.e_restr {
                params.push(("eRestr", bundle_value(&e)?));
            }
            if let Some(sweep) = sweep_value(&a.param)? {
                params.push(("sweep", sweep));
            }
            job("blowup-expand", params)
        }
        Cmd::Blowup(BlowupCmd::Crosscheck(a)) => {
            let mut params = vec![
                ("base", Value::from(a.base)),
                ("Ns", bundle_value(&a.ns)?),
                ("m", range_value(&a.m)?),
            ];
            if let Some(l0) = a.l0 {
                params.push(("l0", Value::from(l0)));
            }
            job("grr-check", params)
        }
        Cmd::Dims(a) => {
            let mut params = vec![("C2", Value::from(a.c_sq)), ("CK", Value::from(a.ck))];
            if let Some(v) = a.k_sq {
                params.push(("K2", Value::from(v)));
            }
            if let Some(v) = a.c2 {
                params.push(("c2", Value::from(v)));
            }
            if let Some(v) = a.chi {
                params.push(("chi", Value::from(v)));
            }
            if let Some(v) = a.sigma {
                params.push(("sigma", Value::from(v)));
            }
            if let Some(v) = a.pg {
                params.push(("pg", Value::from(v)));
            }
            if let Some(v) = a.q {
                params.push(("q", Value::from(v)));
            }
            if let Some(v) = a.dim_b {
                params.push(("dimB", Value::from(v)));
            }
            if let Some(v) = a.fbd {
                params.push(("fbd", Value::from(v)));
            }
            if let Some(v) = a.m {
                params.push(("m", Value::from(v)));
            }
            job("dims", params)
        }
        Cmd::Exist(a) => job(
            "exist",
            vec![
                ("C2", Value::from(a.c_sq)),
                ("CK", Value::from(a.ck)),
                ("mult", Value::from(a.mult)),
            ],
        ),
        Cmd::Asw(a) => {
            let mut params = vec![
                ("base", Value::from(a.base)),
                ("v", bundle_value(&a.v)?),
                ("w", bundle_value(&a.w)?),
            ];
            if let Some(d) = a.d {
                params.push(("d", Value::from(d)));
            }
            if let Some(eta) = a.insertion {
                params.push(("insertion", Value::from(eta)));
            }
            job("asw", params)
        }
        Cmd::Severi(a) => job(
            "severi",
            vec![
                ("base", Value::from(a.base)),
                ("c", Value::from(a.c)),
                ("p", Value::from(a.p)),
            ],
        ),
        Cmd::UniversalPoly(a) => job("universal-poly", vec![("p", Value::from(a.p))]),
        Cmd::Selftest => job("selftest", vec![]),
        Cmd::Run(_) => unreachable!("run is handled before job building"),
    })
}

fn execute(cli: Cli) -> Result<(Vec<render::Report>, bool), Failure> {
    if let Cmd::Run(args) = cli.cmd {
        return run_file(
            &args.file,
            args.jobs,
            args.strict,
            cli.max_degree,
            cli.timing,
        );
    }
    let is_selftest = matches!(cli.cmd, Cmd::Selftest);
    let dto = build_job(cli.cmd)?;
    let catalog = Catalog::new();
    let started = Instant::now();
    let mut report =
        run_job(&catalog, &dto, cli.max_degree, None).map_err(|e| Failure::Usage(e.to_string()))?;
    if cli.timing {
        report.timing_ms = Some(started.elapsed().as_millis());
    }
    // A direct invocation that produced nothing but a complaint is an
    // argument problem, not a failed computation.
    if report.failed && report.results.is_empty() && !is_selftest {
        return Err(Failure::Usage(report.warnings.join("; ")));
    }
    let failed = report.failed;
    Ok((vec![report], failed))
}

fn main() {
    let cli = Cli::parse();
    let opts = RenderOpts {
        format: cli.format,
        decimal: cli.decimal,
    };
    match execute(cli) {
        Ok((reports, failed)) => {
            println!("{}", render(&reports, opts));
            std::process::exit(if failed { 1 } else { 0 });
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            std::process::exit(2);
        }
    }
}
