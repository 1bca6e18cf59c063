//! JSON documents, report emission and the `toricmmp` command line.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use num::{BigInt, BigRational, Num, Zero};
use serde_json::{json, Map, Value};

use crate::cohomology::{
    cech_cohomology, ideal_vanishing_check, mv_resolution_check, polyhedron_cohomology, CohomologyTable, Sheaf,
};
use crate::divisor::{classify_pair, is_cartier, is_q_factorial, InvariantDivisor, PairClassification};
use crate::error::{Error, Result};
use crate::examples;
use crate::fan::Fan;
use crate::lattice::LatticeVector;
use crate::mmp::{classify_and_contract, flip, run_mmp, MmpOptions, MmpTrace};
use crate::mori::{is_ample_over, is_nef_over, is_projective_over, mori_cone, negative_extremal_rays, wall_pairings};
use crate::verify::{verify_example, Assertion};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A fan read from a document, with the map from document ray order to fan ray order.
#[derive(Debug, Clone)]
pub struct FanInput {
    pub fan: Fan,
    /// to_fan[i] is the fan index of the i-th document ray.
    pub to_fan: Vec<usize>,
    /// Labels in fan order, when given.
    pub labels: Option<Vec<String>>,
}

fn json_error(source: &str, e: &serde_json::Error) -> Error {
    Error::parse(format!("{source}:{}:{}", e.line(), e.column()), e.to_string())
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, source: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| Error::parse(source, format!("missing field `{key}`")))
}

fn as_int(v: &Value, loc: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(BigInt::from_str_radix(&n.to_string(), 10).expect("integer")),
        Value::String(s) => BigInt::from_str_radix(s.trim(), 10).map_err(|_| Error::parse(loc, format!("malformed integer `{s}`"))),
        other => Err(Error::parse(loc, format!("expected an integer, found {other}"))),
    }
}

fn as_index(v: &Value, loc: &str) -> Result<usize> {
    v.as_u64().map(|x| x as usize).ok_or_else(|| Error::parse(loc, format!("expected a ray index, found {v}")))
}

/// A rational from "p/q", "p", or an integer literal; floating literals are rejected.
pub fn parse_rational(v: &Value, loc: &str) -> Result<BigRational> {
    match v {
        Value::String(s) => {
            let t = s.trim();
            let (p, q) = match t.split_once('/') {
                Some((p, q)) => (p.trim(), q.trim()),
                None => (t, "1"),
            };
            let bad = || Error::parse(loc, format!("malformed rational `{s}`"));
            let p = BigInt::from_str_radix(p, 10).map_err(|_| bad())?;
            let q = BigInt::from_str_radix(q, 10).map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::parse(loc, format!("zero denominator in `{s}`")));
            }
            Ok(BigRational::new(p, q))
        }
        Value::Number(n) if n.is_i64() || n.is_u64() => Ok(BigRational::from_integer(as_int(v, loc)?)),
        other => Err(Error::parse(loc, format!("expected a rational string \"p/q\", found {other}"))),
    }
}

pub fn parse_fan(text: &str, source: &str) -> Result<FanInput> {
    let v: Value = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let obj = v.as_object().ok_or_else(|| Error::parse(source, "expected a JSON object"))?;
    let dim = as_index(field(obj, "dim", source)?, &format!("{source}: dim"))?;
    let rays_v = field(obj, "rays", source)?.as_array().ok_or_else(|| Error::parse(format!("{source}: rays"), "expected an array"))?;
    let mut rays = Vec::with_capacity(rays_v.len());
    for (i, r) in rays_v.iter().enumerate() {
        let loc = format!("{source}: rays[{i}]");
        let coords = r.as_array().ok_or_else(|| Error::parse(&loc, "expected an array of integers"))?;
        if coords.len() != dim {
            return Err(Error::parse(&loc, format!("expected {dim} coordinates, found {}", coords.len())));
        }
        let c: Vec<BigInt> =
            coords.iter().enumerate().map(|(j, x)| as_int(x, &format!("{loc}[{j}]"))).collect::<Result<_>>()?;
        let lv = LatticeVector(c);
        if lv.is_zero() {
            return Err(Error::parse(&loc, "zero ray"));
        }
        rays.push(lv);
    }
    let cones_v = field(obj, "cones", source)?.as_array().ok_or_else(|| Error::parse(format!("{source}: cones"), "expected an array"))?;
    let mut cones = Vec::with_capacity(cones_v.len());
    for (i, c) in cones_v.iter().enumerate() {
        let loc = format!("{source}: cones[{i}]");
        let idx = c.as_array().ok_or_else(|| Error::parse(&loc, "expected an array of ray indices"))?;
        let mut cone = Vec::with_capacity(idx.len());
        for (j, x) in idx.iter().enumerate() {
            let k = as_index(x, &format!("{loc}[{j}]"))?;
            if k >= rays.len() {
                return Err(Error::parse(
                    format!("{loc}[{j}]"),
                    format!("ray index {k} out of range ({} rays)", rays.len()),
                ));
            }
            cone.push(k);
        }
        cones.push(cone);
    }
    let labels = match obj.get("labels") {
        None | Some(Value::Null) => None,
        Some(Value::Array(ls)) => {
            if ls.len() != rays.len() {
                return Err(Error::parse(format!("{source}: labels"), format!("expected {} labels, found {}", rays.len(), ls.len())));
            }
            Some(
                ls.iter()
                    .enumerate()
                    .map(|(i, l)| {
                        l.as_str().map(str::to_string).ok_or_else(|| Error::parse(format!("{source}: labels[{i}]"), "expected a string"))
                    })
                    .collect::<Result<Vec<_>>>()?,
            )
        }
        Some(_) => return Err(Error::parse(format!("{source}: labels"), "expected an array of strings")),
    };
    let fan = Fan::new(dim, rays.clone(), cones).map_err(|e| Error::parse(source, e.to_string()))?;
    let to_fan: Vec<usize> = rays
        .iter()
        .map(|r| fan.ray_index(&r.primitive().expect("nonzero")).expect("ray kept"))
        .collect();
    let labels = labels.map(|ls| {
        let mut out = vec![String::new(); fan.rays().len()];
        for (i, l) in ls.into_iter().enumerate() {
            out[to_fan[i]] = l;
        }
        out
    });
    Ok(FanInput { fan, to_fan, labels })
}

/// Coefficients as an array aligned with the fan document's rays, or an object keyed by label.
pub fn parse_divisor(text: &str, source: &str, input: &FanInput) -> Result<InvariantDivisor> {
    let v: Value = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let obj = v.as_object().ok_or_else(|| Error::parse(source, "expected a JSON object"))?;
    let n = input.fan.rays().len();
    let mut coeffs = vec![BigRational::zero(); n];
    match field(obj, "coeffs", source)? {
        Value::Array(cs) => {
            if cs.len() != input.to_fan.len() {
                return Err(Error::parse(
                    format!("{source}: coeffs"),
                    format!("expected {} coefficients, found {}", input.to_fan.len(), cs.len()),
                ));
            }
            for (i, c) in cs.iter().enumerate() {
                coeffs[input.to_fan[i]] = parse_rational(c, &format!("{source}: coeffs[{i}]"))?;
            }
        }
        Value::Object(m) => {
            let labels = input
                .labels
                .as_ref()
                .ok_or_else(|| Error::parse(format!("{source}: coeffs"), "coefficients by label need fan labels"))?;
            for (k, c) in m {
                let loc = format!("{source}: coeffs.{k}");
                let i = labels.iter().position(|l| l == k).ok_or_else(|| Error::parse(&loc, format!("unknown label `{k}`")))?;
                coeffs[i] = parse_rational(c, &loc)?;
            }
        }
        other => return Err(Error::parse(format!("{source}: coeffs"), format!("expected an array or object, found {other}"))),
    }
    Ok(InvariantDivisor::new(coeffs))
}

/// A star-closed set: explicit `cones` (document ray indices), or the stars of `rays`.
pub fn parse_phi(text: &str, source: &str, input: &FanInput) -> Result<Vec<Vec<usize>>> {
    let v: Value = serde_json::from_str(text).map_err(|e| json_error(source, &e))?;
    let obj = v.as_object().ok_or_else(|| Error::parse(source, "expected a JSON object"))?;
    let read = |key: &str| -> Result<Option<Vec<Vec<usize>>>> {
        let Some(arr) = obj.get(key) else { return Ok(None) };
        let arr = arr.as_array().ok_or_else(|| Error::parse(format!("{source}: {key}"), "expected an array"))?;
        let mut out = Vec::new();
        for (i, c) in arr.iter().enumerate() {
            let loc = format!("{source}: {key}[{i}]");
            let items: Vec<Value> = match c {
                Value::Array(a) => a.clone(),
                x => vec![x.clone()],
            };
            let mut cone = Vec::new();
            for (j, x) in items.iter().enumerate() {
                let k = as_index(x, &format!("{loc}[{j}]"))?;
                let f = *input.to_fan.get(k).ok_or_else(|| {
                    Error::parse(format!("{loc}[{j}]"), format!("ray index {k} out of range ({} rays)", input.to_fan.len()))
                })?;
                cone.push(f);
            }
            cone.sort_unstable();
            out.push(cone);
        }
        Ok(Some(out))
    };
    let phi = if let Some(cones) = read("cones")? {
        for (i, c) in cones.iter().enumerate() {
            if !input.fan.is_cone(c) {
                return Err(Error::parse(format!("{source}: cones[{i}]"), "not a cone of the fan"));
            }
        }
        cones
    } else if let Some(rays) = read("rays")? {
        let idx: Vec<usize> = rays.into_iter().flatten().collect();
        input.fan.cones().iter().filter(|c| idx.iter().any(|i| c.contains(i))).cloned().collect()
    } else {
        return Err(Error::parse(source, "expected `cones` or `rays`"));
    };
    if !input.fan.is_star_closed(&phi) {
        return Err(Error::parse(source, "set of cones is not star closed"));
    }
    Ok(phi)
}

fn int_json(v: &[BigInt]) -> Value {
    Value::Array(v.iter().map(|x| Value::String(x.to_string())).collect())
}

fn vector_json(v: &LatticeVector) -> Value {
    Value::Array(
        v.0.iter()
            .map(|x| x.to_string().parse::<i64>().map(Value::from).unwrap_or_else(|_| Value::String(x.to_string())))
            .collect(),
    )
}

fn rat_json(q: &BigRational) -> Value {
    Value::String(q.to_string())
}

pub fn fan_document(fan: &Fan, labels: Option<&[String]>) -> Value {
    let mut m = Map::new();
    m.insert("dim".into(), json!(fan.dim()));
    m.insert("rays".into(), Value::Array(fan.rays().iter().map(vector_json).collect()));
    m.insert("cones".into(), json!(fan.maximal_cones()));
    if let Some(l) = labels {
        m.insert("labels".into(), json!(l));
    }
    Value::Object(m)
}

pub fn divisor_document(d: &InvariantDivisor) -> Value {
    json!({ "coeffs": d.coeffs().iter().map(rat_json).collect::<Vec<_>>() })
}

fn cone_vectors_json(fan: &Fan, cone: &[usize]) -> Value {
    Value::Array(cone.iter().map(|&i| vector_json(fan.ray(i))).collect())
}

fn classification_json(c: &PairClassification) -> Value {
    json!({
        "verdict": c.verdict.to_string(),
        "terminal": c.terminal,
        "canonical": c.canonical,
        "klt": c.klt,
        "lc": c.lc,
        "dlt": c.dlt,
        "cartier_index": c.index.as_ref().map(|x| x.to_string()),
        "min_discrepancy": c.min_discrepancy.as_ref().map(rat_json),
        "witnesses": c.witnesses.iter().take(8).map(|(v, a)| json!({"point": vector_json(v), "discrepancy": rat_json(a)})).collect::<Vec<_>>(),
    })
}

fn table_json(t: &CohomologyTable) -> Value {
    json!({
        "h": t.dims,
        "euler_characteristic": t.euler_characteristic(),
        "window": { "lo": int_json(&t.window.lo), "hi": int_json(&t.window.hi) },
        "weights": t.weights.iter().map(|ws| ws.iter().map(|(u, k)| json!({"u": vector_json(u), "mult": k})).collect::<Vec<_>>()).collect::<Vec<_>>(),
    })
}

fn trace_json(t: &MmpTrace) -> Value {
    json!({
        "outcome": t.outcome,
        "steps": t.steps.iter().map(|s| json!({
            "kind": s.kind,
            "ray": int_json(&s.ray.generator),
            "removed_walls": s.removed_walls.iter().map(|w| w.iter().map(vector_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "added_walls": s.added_walls.iter().map(|w| w.iter().map(vector_json).collect::<Vec<_>>()).collect::<Vec<_>>(),
            "rho_before": s.rho_before,
            "rho_after": s.rho_after,
            "q_factorial_before": s.q_factorial_before,
            "q_factorial_after": s.q_factorial_after,
            "signature": s.signature,
            "measure_before": s.measure_before,
            "measure_after": s.measure_after,
            "certificates_hold": s.certificates_hold(),
            "fan_after": fan_document(&s.fan_after, None),
        })).collect::<Vec<_>>(),
        "fan": fan_document(&t.fan, None),
        "boundary": divisor_document(&t.boundary),
    })
}

fn assertions_json(a: &[Assertion]) -> Value {
    serde_json::to_value(a).expect("assertions serialize")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SheafKind {
    Line,
    Ideal,
    Restriction,
}

#[derive(Debug, Parser)]
#[command(name = "toricmmp", version, about = "Exact toric MMP engine")]
pub struct Cli {
    /// Report format.
    #[arg(long, value_enum, default_value_t = Format::Text, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, clap::Args)]
pub struct FanArg {
    /// Fan document (JSON).
    #[arg(long)]
    pub fan: PathBuf,
}

#[derive(Debug, clap::Args)]
pub struct PairArgs {
    #[arg(long)]
    pub fan: PathBuf,
    /// Boundary divisor document; zero when absent.
    #[arg(long)]
    pub boundary: Option<PathBuf>,
    /// Base fan document for relative computations.
    #[arg(long)]
    pub base: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Validate a fan and report its basic invariants.
    Validate(FanArg),
    /// Classify the singularities of a pair (X, boundary).
    Classify(PairArgs),
    /// Numerical spaces, the Mori cone and projectivity.
    Mori {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Nefness of a divisor, wall by wall.
    Nef {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Ampleness of a divisor, wall by wall.
    Ample {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long)]
        base: Option<PathBuf>,
    },
    /// Contract a (K + boundary)-negative extremal ray.
    Contract {
        #[command(flatten)]
        pair: PairArgs,
        /// Index into the sorted list of negative extremal rays.
        #[arg(long, default_value_t = 0)]
        ray: usize,
        /// Write the target fan here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Flip a flipping contraction.
    Flip {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 0)]
        ray: usize,
        /// Write the flipped fan here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Run the (K + boundary)-MMP.
    Mmp {
        #[command(flatten)]
        pair: PairArgs,
        #[arg(long, default_value_t = 10_000)]
        step_cap: usize,
        /// Write the final fan here.
        #[arg(long)]
        output: Option<PathBuf>,
    },
    /// Cohomology of O(D), I_Y (x) O(D) or O_Y(D).
    Cohom {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        divisor: PathBuf,
        #[arg(long, value_enum, default_value_t = SheafKind::Line)]
        sheaf: SheafKind,
        /// Star-closed set document, for ideal and restriction sheaves.
        #[arg(long)]
        phi: Option<PathBuf>,
    },
    /// Toric polyhedron: qlc centres, cohomology, ideal vanishing, Mayer-Vietoris check.
    Polyhedron {
        #[arg(long)]
        fan: PathBuf,
        #[arg(long)]
        phi: PathBuf,
        /// Cartier divisor; zero when absent.
        #[arg(long)]
        divisor: Option<PathBuf>,
    },
    /// Run the assertions of a built-in example.
    Verify {
        id: String,
        /// Parameter n of the non-Q-factorial example.
        #[arg(long)]
        n: Option<usize>,
    },
    /// List the built-in examples, optionally exporting their documents.
    ListExamples {
        #[arg(long)]
        export: Option<PathBuf>,
    },
}

/// Exit code and output of one invocation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::parse(path.display().to_string(), e.to_string()))
}

fn load_fan(path: &Path) -> Result<FanInput> {
    parse_fan(&read(path)?, &path.display().to_string())
}

fn load_divisor(path: &Path, input: &FanInput) -> Result<InvariantDivisor> {
    parse_divisor(&read(path)?, &path.display().to_string(), input)
}

fn load_pair(p: &PairArgs) -> Result<(FanInput, InvariantDivisor, Option<Fan>)> {
    let x = load_fan(&p.fan)?;
    let d = match &p.boundary {
        Some(b) => load_divisor(b, &x)?,
        None => InvariantDivisor::zero(x.fan.rays().len()),
    };
    let base = p.base.as_ref().map(|b| load_fan(b).map(|f| f.fan)).transpose()?;
    Ok((x, d, base))
}

fn write_json(path: &Path, v: &Value) -> Result<()> {
    let text = serde_json::to_string_pretty(v).expect("json") + "\n";
    fs::write(path, text).map_err(|e| Error::Invalid(format!("{}: {e}", path.display())))
}

struct Report {
    results: Value,
    assertions: Vec<Assertion>,
}

fn run(cmd: &Command) -> Result<Report> {
    let plain = |results: Value| Ok(Report { results, assertions: Vec::new() });
    match cmd {
        Command::Validate(a) => {
            let x = load_fan(&a.fan)?;
            let f = &x.fan;
            plain(json!({
                "fan": fan_document(f, x.labels.as_deref()),
                "maximal_cones": f.maximal_cones().len(),
                "complete": f.is_complete(),
                "pure": f.is_pure(),
                "simplicial": f.is_simplicial(),
                "smooth": f.is_smooth(),
                "q_factorial": is_q_factorial(f),
                "walls": f.walls().len(),
                "interior_walls": f.interior_walls().len(),
                "singular_cones": f.singular_cones().iter().map(|(c, t)| json!({"rays": cone_vectors_json(f, c), "type": t.to_string()})).collect::<Vec<_>>(),
            }))
        }
        Command::Classify(p) => {
            let (x, d, _) = load_pair(p)?;
            plain(classification_json(&classify_pair(&x.fan, &d)))
        }
        Command::Mori { fan, base } => {
            let x = load_fan(fan)?;
            let base = base.as_ref().map(|b| load_fan(b).map(|f| f.fan)).transpose()?;
            let ne = mori_cone(&x.fan, base.as_ref())?;
            let proj = is_projective_over(&x.fan, base.as_ref())?;
            plain(json!({
                "rho": ne.lattice.rho,
                "relative": ne.lattice.relative,
                "dim": ne.dim,
                "pointed": ne.is_pointed,
                "whole_space": ne.is_whole_space(),
                "extremal_rays": ne.extremal_rays.iter().map(|r| json!({
                    "class": int_json(&r.generator),
                    "walls": r.walls.iter().map(|&w| cone_vectors_json(&x.fan, &ne.lattice.curves[w].wall.rays)).collect::<Vec<_>>(),
                })).collect::<Vec<_>>(),
                "numerically_trivial_walls": ne.zero_walls().iter().map(|&w| cone_vectors_json(&x.fan, &ne.lattice.curves[w].wall.rays)).collect::<Vec<_>>(),
                "nef_rays": ne.nef_rays.iter().map(|r| int_json(r)).collect::<Vec<_>>(),
                "projective": proj.projective,
                "ample_certificate": proj.certificate.as_ref().map(divisor_document),
            }))
        }
        Command::Nef { fan, divisor, base } | Command::Ample { fan, divisor, base } => {
            let x = load_fan(fan)?;
            let d = load_divisor(divisor, &x)?;
            let base = base.as_ref().map(|b| load_fan(b).map(|f| f.fan)).transpose()?;
            let pairings = wall_pairings(&x.fan, base.as_ref(), &d)?;
            let nef = is_nef_over(&x.fan, base.as_ref(), &d)?;
            let ample = is_ample_over(&x.fan, base.as_ref(), &d)?;
            plain(json!({
                "nef": nef,
                "ample": ample,
                "cartier": is_cartier(&x.fan, &d),
                "pairings": pairings.iter().map(|(w, p)| json!({"wall": cone_vectors_json(&x.fan, &w.rays), "pairing": rat_json(p)})).collect::<Vec<_>>(),
            }))
        }
        Command::Contract { pair, ray, output } | Command::Flip { pair, ray, output } => {
            let (x, d, base) = load_pair(pair)?;
            let (_, rays) = negative_extremal_rays(&x.fan, base.as_ref(), &d)?;
            let r = rays.get(*ray).ok_or_else(|| {
                Error::Invalid(format!("ray index {ray} out of range ({} negative extremal rays)", rays.len()))
            })?;
            let c = classify_and_contract(&x.fan, base.as_ref(), &d, r)?;
            let mut results = json!({
                "negative_extremal_rays": rays.iter().map(|r| int_json(&r.generator)).collect::<Vec<_>>(),
                "ray": int_json(&r.generator),
                "kind": c.kind,
                "signature": c.signature,
                "lost_rays": c.lost_rays.iter().map(|&i| vector_json(x.fan.ray(i))).collect::<Vec<_>>(),
                "target": fan_document(&c.target, None),
            });
            let mut out_fan = c.target.clone();
            if matches!(cmd, Command::Flip { .. }) {
                let fl = flip(&x.fan, &d, &c)?;
                let walls = |ws: &[(Vec<LatticeVector>, BigRational)]| {
                    ws.iter().map(|(w, p)| json!({"wall": w.iter().map(vector_json).collect::<Vec<_>>(), "pairing": rat_json(p)})).collect::<Vec<_>>()
                };
                results["flip"] = json!({
                    "fan": fan_document(&fl.fan, None),
                    "boundary": divisor_document(&fl.boundary),
                    "removed_walls": walls(&fl.removed_walls),
                    "added_walls": walls(&fl.added_walls),
                });
                out_fan = fl.fan;
            }
            if let Some(p) = output {
                write_json(p, &fan_document(&out_fan, None))?;
            }
            plain(results)
        }
        Command::Mmp { pair, step_cap, output } => {
            let (x, d, base) = load_pair(pair)?;
            let t = run_mmp(&x.fan, &d, base.as_ref(), MmpOptions { step_cap: *step_cap })?;
            if let Some(p) = output {
                write_json(p, &fan_document(&t.fan, None))?;
            }
            plain(trace_json(&t))
        }
        Command::Cohom { fan, divisor, sheaf, phi } => {
            let x = load_fan(fan)?;
            let d = load_divisor(divisor, &x)?;
            let phi = match phi {
                Some(p) => parse_phi(&read(p)?, &p.display().to_string(), &x)?,
                None if *sheaf == SheafKind::Line => Vec::new(),
                None => return Err(Error::Invalid("--phi is required for ideal and restriction sheaves".into())),
            };
            let target = match sheaf {
                SheafKind::Line => Sheaf::Line(d),
                SheafKind::Ideal => Sheaf::Ideal { divisor: d, phi },
                SheafKind::Restriction => Sheaf::Restriction { divisor: d, phi },
            };
            plain(table_json(&cech_cohomology(&x.fan, &target)?))
        }
        Command::Polyhedron { fan, phi, divisor } => {
            let x = load_fan(fan)?;
            let phi = parse_phi(&read(phi)?, &phi.display().to_string(), &x)?;
            let d = match divisor {
                Some(p) => load_divisor(p, &x)?,
                None => InvariantDivisor::zero(x.fan.rays().len()),
            };
            let centers = x.fan.qlc_centers(&phi)?;
            let table = polyhedron_cohomology(&x.fan, &phi, &d)?;
            let mv = mv_resolution_check(&x.fan, &phi, &d)?;
            let mut results = json!({
                "qlc_centers": centers.iter().map(|c| cone_vectors_json(&x.fan, c)).collect::<Vec<_>>(),
                "cohomology": table_json(&table),
                "mayer_vietoris": { "resolution": mv.resolution, "direct": mv.direct, "agrees": mv.agrees() },
            });
            let mut assertions = vec![Assertion {
                name: "Mayer-Vietoris agreement".into(),
                anchor: "the Mayer-Vietoris simplicial resolution".into(),
                provenance: crate::verify::Provenance::Derived,
                expected: "true".into(),
                actual: mv.agrees().to_string(),
                pass: mv.agrees(),
            }];
            if crate::mori::is_ample(&x.fan, &d).unwrap_or(false) {
                let iv = ideal_vanishing_check(&x.fan, &phi, &d)?;
                results["ideal_vanishing"] = json!({
                    "ideal": iv.ideal.dims, "ambient": iv.ambient.dims, "restriction": iv.restriction.dims,
                    "restriction_rank": iv.restriction_rank, "holds": iv.holds(),
                });
                assertions.push(Assertion {
                    name: "ideal-sheaf vanishing".into(),
                    anchor: "H^i(X, I_Y (x) O_X(L)) = 0".into(),
                    provenance: crate::verify::Provenance::Pinned,
                    expected: "true".into(),
                    actual: iv.holds().to_string(),
                    pass: iv.holds(),
                });
            }
            Ok(Report { results, assertions })
        }
        Command::Verify { id, n } => {
            let r = verify_example(id, *n)?;
            Ok(Report { results: json!({ "id": r.id }), assertions: r.assertions })
        }
        Command::ListExamples { export } => {
            if let Some(dir) = export {
                export_examples(dir)?;
            }
            plain(Value::Array(
                examples::REGISTRY.iter().map(|(id, about)| json!({"id": id, "summary": about})).collect(),
            ))
        }
    }
}

/// Writes fan, divisor and star-closed-set documents of the built-in examples into `dir`.
pub fn export_examples(dir: &Path) -> Result<Vec<PathBuf>> {
    use crate::examples::*;
    fs::create_dir_all(dir).map_err(|e| Error::Invalid(format!("{}: {e}", dir.display())))?;
    let mut written = Vec::new();
    let mut put = |name: &str, v: Value| -> Result<()> {
        let p = dir.join(name);
        write_json(&p, &v)?;
        written.push(p);
        Ok(())
    };
    let phi_doc = |phi: &[Vec<usize>]| json!({ "cones": phi });
    put("kleiman.fan.json", fan_document(&kleiman(), None))?;
    put("flop-y.fan.json", fan_document(&fp_y(), None))?;
    put("flop-x.fan.json", fan_document(&fp_x()?, None))?;
    put("francia-x1.fan.json", fan_document(&francia_x1(), None))?;
    put("francia-x2.fan.json", fan_document(&francia_x2(), None))?;
    put("francia-x3.fan.json", fan_document(&francia_x3(), None))?;
    put("francia-x4.fan.json", fan_document(&francia_x4(), None))?;
    let labels: Vec<String> = (1..=4).map(|i| format!("D{i}")).collect();
    for (name, f) in [("logflip-x", logflip_x()), ("logflip-x-plus", logflip_x_plus()), ("logflip-y", logflip_y())] {
        let lab: Vec<String> = f
            .rays()
            .iter()
            .map(|r| labels[LOGFLIP_RAYS.iter().position(|x| LatticeVector::from_i64(x) == *r).expect("logflip ray")].clone())
            .collect();
        put(&format!("{name}.fan.json"), fan_document(&f, Some(&lab)))?;
        put(&format!("{name}.boundary.json"), divisor_document(&logflip_boundary(&f)))?;
    }
    for n in [2, 3] {
        put(&format!("nonqfact-{n}-x.fan.json"), fan_document(&nonqfact_x(n)?, None))?;
        put(&format!("nonqfact-{n}-w.fan.json"), fan_document(&nonqfact_w(n)?, None))?;
        put(&format!("nonqfact-{n}-x-plus.fan.json"), fan_document(&nonqfact_x_plus(n)?, None))?;
    }
    let s = sommese();
    put("sommese.fan.json", fan_document(&s.fan, None))?;
    put("sommese.sheaf.json", divisor_document(&s.pinned_sheaf()))?;
    let inj = injectivity_f1();
    put("injectivity-f1.fan.json", fan_document(&inj.fan, None))?;
    put("injectivity-f1.a.json", divisor_document(&inj.a()))?;
    put("injectivity-f1.a-plus-f.json", divisor_document(&inj.a().add(&inj.f)))?;
    let ce = cone_example();
    put("cone-ex.fan.json", fan_document(&ce.m, None))?;
    put("cone-ex.e.json", divisor_document(&ce.e))?;
    put("cone-ex.phi.json", phi_doc(&ce.phi))?;
    let p2 = projective_plane();
    put("p2.fan.json", fan_document(&p2, None))?;
    put("p2-boundary.phi.json", phi_doc(&projective_plane_boundary(&p2)))?;
    Ok(written)
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = "  ".repeat(indent);
    match v {
        Value::Object(m) => {
            for (k, x) in m {
                if is_scalar_like(x) {
                    out.push_str(&format!("{pad}{k}: {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}{k}:\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_scalar_like(x) {
                    out.push_str(&format!("{pad}- {}\n", inline(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 1, out);
                }
            }
        }
        x => out.push_str(&format!("{pad}{}\n", inline(x))),
    }
}

fn is_scalar_like(v: &Value) -> bool {
    match v {
        Value::Object(_) => false,
        Value::Array(a) => a.iter().all(|x| !x.is_object() && (!x.is_array() || x.as_array().unwrap().iter().all(|y| !y.is_array() && !y.is_object()))),
        _ => true,
    }
}

fn inline(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        Value::Array(a) => format!("[{}]", a.iter().map(inline).collect::<Vec<_>>().join(", ")),
        other => other.to_string(),
    }
}

fn init_logging() {
    let level = match std::env::var("TORICMMP_LOG").as_deref() {
        Ok("quiet") => log::LevelFilter::Off,
        Ok("info") => log::LevelFilter::Info,
        Ok("debug") => log::LevelFilter::Debug,
        _ => log::LevelFilter::Warn,
    };
    let _ = env_logger::Builder::new().filter_level(level).format_timestamp(None).try_init();
}

/// Parses arguments (including the program name) and runs one command.
pub fn run_command<I, T>(args: I) -> Outcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    init_logging();
    let args: Vec<std::ffi::OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            return if code == 0 {
                Outcome { code, stdout: text, stderr: String::new() }
            } else {
                Outcome { code, stdout: String::new(), stderr: text }
            };
        }
    };
    let echo: Vec<String> = args.iter().skip(1).map(|a| a.to_string_lossy().into_owned()).collect();
    match run(&cli.command) {
        Ok(rep) => emit(&echo, cli.format, rep),
        Err(e) => Outcome { code: 2, stdout: String::new(), stderr: format!("error: {e}\n") },
    }
}

/// Renders a report and picks the exit code: 1 when any assertion fails.
fn emit(echo: &[String], format: Format, rep: Report) -> Outcome {
    let passed = rep.assertions.iter().all(|a| a.pass);
    let doc = json!({
        "command": echo,
        "version": VERSION,
        "results": rep.results,
        "assertions": assertions_json(&rep.assertions),
        "passed": passed,
    });
    let stdout = match format {
        Format::Json => serde_json::to_string_pretty(&doc).expect("json") + "\n",
        Format::Text => {
            let mut s = format!("toricmmp {VERSION}: {}\n", echo.join(" "));
            render_text(&doc["results"], 0, &mut s);
            for a in &rep.assertions {
                s.push_str(&format!(
                    "[{}] {} ({}): expected {}, got {} -- \"{}\"\n",
                    if a.pass { "pass" } else { "FAIL" },
                    a.name,
                    a.provenance,
                    a.expected,
                    a.actual,
                    a.anchor
                ));
            }
            if !rep.assertions.is_empty() {
                let bad = rep.assertions.iter().filter(|a| !a.pass).count();
                s.push_str(&format!("{} assertions, {} failed\n", rep.assertions.len(), bad));
            }
            s
        }
    };
    Outcome { code: if passed { 0 } else { 1 }, stdout, stderr: String::new() }
}
