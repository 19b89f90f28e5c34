//! Subcommand implementations. Each returns the process exit status.

use std::io::Write;
use std::path::{Path, PathBuf};

use otuniq::decompose::{ComponentDecomposition, DecompositionMethod};
use otuniq::duality::{c_transform, verify_duality, Direction, DualityReport, PotentialPair};
use otuniq::regularity::{asymptotic_region, dominated_region, escape_diagnostic, gradient_identity_check, write_csv};
use otuniq::solver::{dual_face_oracle, solve, solve_exact, tight_graph_connectivity_oracle, DualFaceReport, TightGraphReport};
use otuniq::uniqueness::{ambiguity_witness, certify_solution, AmbiguityOptions, UniquenessCertificate, Verdict};
use otuniq::{ClosedFormCost, CostSpec, DiscreteMeasure, SolveResult, TransportPlan};
use serde::Serialize;
use serde_json::Value;

use crate::document::{
    build_problem, load_problem, parse_json, plain_measure, read_input, AssertConnected, Input, LoadedProblem,
    RegularityDocument, ValuesDocument, SCHEMA_VERSION,
};
use crate::error::{
    CliError, EXIT_FAILURE, EXIT_INCONCLUSIVE, EXIT_NON_UNIQUE, EXIT_OK, EXIT_ORACLE_DISAGREEMENT,
};

const DIAGNOSTIC_NOTE: &str = "finite-scale numerical diagnostic, not a proof";

#[derive(Clone, Debug, Serialize)]
pub struct Tool {
    pub name: &'static str,
    pub version: &'static str,
}

pub const TOOL: Tool = Tool { name: "otuniq", version: env!("CARGO_PKG_VERSION") };

#[derive(Clone, Debug, Serialize)]
pub struct DecompositionSetting {
    pub method: DecompositionMethod,
    pub assert_connected: AssertConnected,
}

/// Everything that, besides the input bytes, determines a report.
#[derive(Clone, Debug, Default, Serialize)]
pub struct Settings {
    pub exact: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub oracle: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub decomposition: Option<DecompositionSetting>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub direction: Option<Direction>,
}

/// Common header of every report document.
#[derive(Debug, Serialize)]
pub struct Envelope<B> {
    pub schema_version: &'static str,
    pub tool: Tool,
    pub command: &'static str,
    pub input_digest: String,
    pub settings: Settings,
    #[serde(flatten)]
    pub body: B,
}

impl<B: Serialize> Envelope<B> {
    fn new(command: &'static str, input: &Input, settings: Settings, body: B) -> Self {
        Self { schema_version: SCHEMA_VERSION, tool: TOOL, command, input_digest: input.digest.clone(), settings, body }
    }

    fn render(&self) -> Result<String, CliError> {
        let mut s = serde_json::to_string_pretty(self).map_err(|e| CliError::Failed(format!("cannot serialize report: {e}")))?;
        s.push('\n');
        Ok(s)
    }
}

fn write_output(out: Option<&Path>, content: &[u8]) -> Result<(), CliError> {
    match out {
        Some(path) => std::fs::write(path, content).map_err(|source| CliError::Write { path: path.to_path_buf(), source }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(content)
                .and_then(|_| stdout.flush())
                .map_err(|source| CliError::Write { path: PathBuf::from("<stdout>"), source })
        }
    }
}

fn solve_loaded(l: &LoadedProblem) -> Result<SolveResult, CliError> {
    match &l.exact {
        Some(e) => {
            log::info!("solving {}x{} problem in exact arithmetic", l.problem.n(), l.problem.m());
            let sol = solve_exact(&e.supply, &e.demand, &e.cost, 1_000_000)?;
            Ok(sol.to_solve_result(&l.problem))
        }
        None => {
            log::info!("solving {}x{} problem", l.problem.n(), l.problem.m());
            Ok(solve(&l.problem)?)
        }
    }
}

fn decomposition(
    l: &LoadedProblem,
    epsilon: Option<f64>,
    labels: bool,
) -> Result<(ComponentDecomposition, DecompositionSetting), CliError> {
    let assertion = l.options.assert_connected;
    let method = if labels {
        for (side, m) in [("source", l.problem.source()), ("target", l.problem.target())] {
            if m.labels().is_none() {
                return Err(CliError::Invalid(format!("--labels given but {side} has no labels")));
            }
        }
        DecompositionMethod::ExplicitLabels
    } else if let Some(epsilon) = epsilon.or(l.options.epsilon) {
        if !(epsilon.is_finite() && epsilon > 0.0) {
            return Err(CliError::Invalid(format!("epsilon must be positive, got {epsilon}")));
        }
        DecompositionMethod::EpsilonGraph { epsilon }
    } else if assertion == AssertConnected::None {
        DecompositionMethod::Singletons
    } else {
        return Err(CliError::MissingEpsilon);
    };
    let mut d = ComponentDecomposition::from_measures(l.problem.source(), l.problem.target(), method)
        .map_err(|e| CliError::Invalid(format!("decomposition: {e}")))?;
    if matches!(assertion, AssertConnected::Source | AssertConnected::Both) {
        d = d.assert_sources_connected();
    }
    if matches!(assertion, AssertConnected::Target | AssertConnected::Both) {
        d = d.assert_targets_connected();
    }
    Ok((d, DecompositionSetting { method, assert_connected: assertion }))
}

#[derive(Debug, Serialize)]
struct SolveSummary<'a> {
    cost: f64,
    iterations: usize,
    anchor: usize,
    plan: &'a TransportPlan,
    pair: &'a PotentialPair,
    duality: DualityReport,
}

#[derive(Debug, Serialize)]
struct PairCheck {
    location: String,
    optimal: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    report: Option<DualityReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    error: Option<String>,
}

#[derive(Debug, Serialize)]
struct SolveBody<'a> {
    solve: SolveSummary<'a>,
    #[serde(skip_serializing_if = "Option::is_none")]
    verification: Option<Vec<PairCheck>>,
}

/// Every object with `f` and `g` arrays, keyed by JSON pointer.
fn collect_pairs(value: &Value, pointer: &str, out: &mut Vec<(String, Value)>) {
    match value {
        Value::Object(map) => {
            if map.get("f").is_some_and(Value::is_array) && map.get("g").is_some_and(Value::is_array) {
                let pair = serde_json::json!({ "f": map["f"], "g": map["g"] });
                out.push((if pointer.is_empty() { "/".into() } else { pointer.into() }, pair));
            }
            for (k, v) in map {
                collect_pairs(v, &format!("{pointer}/{}", k.replace('~', "~0").replace('/', "~1")), out);
            }
        }
        Value::Array(items) => {
            for (k, v) in items.iter().enumerate() {
                collect_pairs(v, &format!("{pointer}/{k}"), out);
            }
        }
        _ => {}
    }
}

pub struct SolveArgs<'a> {
    pub problem: &'a Path,
    pub out: Option<&'a Path>,
    pub exact: bool,
    pub verify: Option<&'a Path>,
}

pub fn cmd_solve(args: &SolveArgs) -> Result<i32, CliError> {
    let input = read_input(args.problem)?;
    let loaded = load_problem(args.problem, &input, args.exact)?;
    let sol = solve_loaded(&loaded)?;
    let problem = &loaded.problem;
    let duality = verify_duality(&sol.plan, &sol.pair, problem).map_err(|e| CliError::Failed(e.to_string()))?;
    let verification = match args.verify {
        Some(path) => {
            let v = read_input(path)?;
            let value: Value = parse_json(path, &v.bytes)?;
            let mut found = Vec::new();
            collect_pairs(&value, "", &mut found);
            if found.is_empty() {
                return Err(CliError::Invalid(format!("{} contains no potential pairs", path.display())));
            }
            let checks: Vec<PairCheck> = found
                .into_iter()
                .map(|(location, raw)| {
                    let result = serde_json::from_value::<PotentialPair>(raw)
                        .map_err(|e| format!("not a potential pair: {e}"))
                        .and_then(|pair| verify_duality(&sol.plan, &pair, problem).map_err(|e| e.to_string()));
                    match result {
                        Ok(report) => PairCheck { location, optimal: report.optimal, report: Some(report), error: None },
                        Err(error) => PairCheck { location, optimal: false, report: None, error: Some(error) },
                    }
                })
                .collect();
            Some(checks)
        }
        None => None,
    };
    let failed: Vec<&str> = verification.iter().flatten().filter(|c| !c.optimal).map(|c| c.location.as_str()).collect();
    let failed_msg = (!failed.is_empty()).then(|| format!("pairs not optimal: {}", failed.join(", ")));
    let body = SolveBody {
        solve: SolveSummary { cost: sol.cost, iterations: sol.iterations, anchor: sol.anchor, plan: &sol.plan, pair: &sol.pair, duality },
        verification,
    };
    let settings = Settings { exact: loaded.exact.is_some(), ..Default::default() };
    write_output(args.out, Envelope::new("solve", &input, settings, body).render()?.as_bytes())?;
    if let Some(msg) = failed_msg {
        log::error!("{msg}");
        eprintln!("otuniq: {msg}");
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
enum OracleRole {
    /// Point-level verdicts must match the certificate.
    CrossCheck,
    /// Components were asserted connected, so the point-level oracles only
    /// describe the finite sample.
    Reference,
}

#[derive(Debug, Serialize)]
struct OracleCheck {
    role: OracleRole,
    agree: bool,
    dual_face: DualFaceReport,
    tight_graph: TightGraphReport,
}

#[derive(Debug, Serialize)]
struct SolveStats {
    cost: f64,
    iterations: usize,
    anchor: usize,
}

#[derive(Debug, Serialize)]
struct CertifyBody {
    solve: SolveStats,
    certificate: UniquenessCertificate,
    #[serde(skip_serializing_if = "Option::is_none")]
    oracles: Option<OracleCheck>,
}

/// Whether both oracles agree with each other and with a decided verdict.
pub fn oracles_agree(verdict: Verdict, face_unique: bool, tight_unique: bool) -> bool {
    face_unique == tight_unique
        && match verdict {
            Verdict::Unique => face_unique,
            Verdict::NonUnique => !face_unique,
            Verdict::Inconclusive => true,
        }
}

pub struct CertifyArgs<'a> {
    pub problem: &'a Path,
    pub out: Option<&'a Path>,
    pub epsilon: Option<f64>,
    pub labels: bool,
    pub oracle: bool,
    pub exact: bool,
}

pub fn cmd_certify(args: &CertifyArgs) -> Result<i32, CliError> {
    let input = read_input(args.problem)?;
    let loaded = load_problem(args.problem, &input, args.exact)?;
    let (decomp, setting) = decomposition(&loaded, args.epsilon, args.labels)?;
    let sol = solve_loaded(&loaded)?;
    let certificate = certify_solution(&loaded.problem, &decomp, &sol)?;
    log::info!("verdict {:?} at level {:?}", certificate.verdict, certificate.level);
    let oracles = if args.oracle {
        let dual_face = dual_face_oracle(&loaded.problem, &certificate.pair)?;
        let tight_graph = tight_graph_connectivity_oracle(&loaded.problem, &certificate.pair);
        let role = if decomp.has_assertions() { OracleRole::Reference } else { OracleRole::CrossCheck };
        let agree = oracles_agree(certificate.verdict, dual_face.unique, tight_graph.unique);
        Some(OracleCheck { role, agree, dual_face, tight_graph })
    } else {
        None
    };
    let disagreement = oracles.as_ref().is_some_and(|o| o.role == OracleRole::CrossCheck && !o.agree);
    let verdict = certificate.verdict;
    let settings = Settings {
        exact: loaded.exact.is_some(),
        oracle: Some(args.oracle),
        decomposition: Some(setting),
        ..Default::default()
    };
    let body = CertifyBody { solve: SolveStats { cost: sol.cost, iterations: sol.iterations, anchor: sol.anchor }, certificate, oracles };
    let report = Envelope::new("certify", &input, settings, body).render()?;
    write_output(args.out, report.as_bytes())?;
    if disagreement {
        let dir = args.out.and_then(Path::parent).filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        let path = write_bug_report(dir, &input, &report)?;
        let msg = format!("oracle disagreement; bug report written to {}", path.display());
        log::error!("{msg}");
        eprintln!("otuniq: {msg}");
        return Ok(EXIT_ORACLE_DISAGREEMENT);
    }
    Ok(match verdict {
        Verdict::Unique => EXIT_OK,
        Verdict::NonUnique => EXIT_NON_UNIQUE,
        Verdict::Inconclusive => EXIT_INCONCLUSIVE,
    })
}

/// Writes the input and the report side by side for a reproducible bug report.
pub fn write_bug_report(dir: &Path, input: &Input, report: &str) -> Result<PathBuf, CliError> {
    let hex = input.digest.trim_start_matches("sha256:");
    let path = dir.join(format!("otuniq-bugreport-{}.json", &hex[..12.min(hex.len())]));
    let problem: Value = serde_json::from_slice(&input.bytes).unwrap_or(Value::Null);
    let report: Value = serde_json::from_str(report).unwrap_or(Value::Null);
    let dump = serde_json::json!({
        "schema_version": SCHEMA_VERSION,
        "tool": TOOL,
        "input_digest": input.digest,
        "reason": "oracle_disagreement",
        "problem": problem,
        "report": report,
    });
    let mut s = serde_json::to_string_pretty(&dump).map_err(|e| CliError::Failed(e.to_string()))?;
    s.push('\n');
    std::fs::write(&path, s).map_err(|source| CliError::Write { path: path.clone(), source })?;
    Ok(path)
}

pub struct WitnessArgs<'a> {
    pub problem: &'a Path,
    pub out: Option<&'a Path>,
    pub epsilon: Option<f64>,
    pub labels: bool,
    pub oracle: bool,
    pub samples: usize,
    pub seed: u64,
}

pub fn cmd_witness(args: &WitnessArgs) -> Result<i32, CliError> {
    let input = read_input(args.problem)?;
    let loaded = load_problem(args.problem, &input, false)?;
    let (decomp, setting) = decomposition(&loaded, args.epsilon, args.labels)?;
    let options = AmbiguityOptions { samples: args.samples, seed: Some(args.seed), oracle: args.oracle };
    let witness = ambiguity_witness(&loaded.problem, &decomp, &options)?;
    let verified = witness.all_verified;
    let settings = Settings {
        oracle: Some(args.oracle),
        seed: Some(args.seed),
        samples: Some(witness.samples.len()),
        decomposition: Some(setting),
        ..Default::default()
    };
    #[derive(Serialize)]
    struct Body {
        witness: otuniq::uniqueness::AmbiguityWitness,
    }
    write_output(args.out, Envelope::new("witness", &input, settings, Body { witness }).render()?.as_bytes())?;
    if !verified {
        eprintln!("otuniq: some witness samples failed verification");
        return Ok(EXIT_FAILURE);
    }
    Ok(EXIT_OK)
}

fn closed_form(cost: &CostSpec) -> Result<ClosedFormCost, CliError> {
    cost.validate().map_err(|e| CliError::Invalid(format!("cost: {e}")))?;
    cost.closed_form().ok_or_else(|| CliError::Invalid("cost must be lp_norm_power or profile_of_distance".into()))
}

fn csv_bytes(points: &[Vec<f64>], values: &[f64]) -> Result<Vec<u8>, CliError> {
    let mut buf = Vec::new();
    write_csv(&mut buf, points, values).map_err(|e| CliError::Failed(e.to_string()))?;
    Ok(buf)
}

pub struct RegularityArgs<'a> {
    pub spec: &'a Path,
    pub out: Option<&'a Path>,
}

pub fn cmd_regularity(args: &RegularityArgs) -> Result<i32, CliError> {
    let input = read_input(args.spec)?;
    let doc: RegularityDocument = parse_json(args.spec, &input.bytes)?;
    doc.check_schema()?;
    let content = match doc {
        RegularityDocument::DominatedRegion { x, y, cost, grid, .. } => {
            let cost = closed_form(&cost)?;
            if x.len() != y.len() {
                return Err(CliError::Invalid(format!("x has dimension {}, y {}", x.len(), y.len())));
            }
            let points = grid.points(x.len())?;
            let region = dominated_region(&x, &y, &cost, &points);
            log::info!("dominated region: {} of {} grid points ({DIAGNOSTIC_NOTE})", region.count(), points.len());
            let values: Vec<f64> = region.members.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
            csv_bytes(&points, &values)?
        }
        RegularityDocument::AsymptoticRegion { x, direction, cost, radii, grid, .. } => {
            let cost = closed_form(&cost)?;
            let points = grid.points(x.len())?;
            let region = asymptotic_region(&x, &direction, &cost, &radii, &points)?;
            log::info!("asymptotic region over {} radii, tail {} ({DIAGNOSTIC_NOTE})", region.radii.len(), region.tail_len);
            csv_bytes(&points, &region.tail_frequency)?
        }
        RegularityDocument::GradientCheck { problem, mask, .. } => {
            let loaded = build_problem(*problem, false)?;
            let sol = solve_loaded(&loaded)?;
            let gradient = gradient_identity_check(&loaded.problem, &sol, mask.as_deref())?;
            #[derive(Serialize)]
            struct Body {
                kind: &'static str,
                diagnostic: &'static str,
                gradient: otuniq::regularity::GradientCheckReport,
            }
            let body = Body { kind: "gradient_check", diagnostic: DIAGNOSTIC_NOTE, gradient };
            Envelope::new("regularity", &input, Settings::default(), body).render()?.into_bytes()
        }
        RegularityDocument::Escape { source, schedule, cost, .. } => {
            let mu = plain_measure(&source, "source")?;
            let schedule: Vec<(f64, DiscreteMeasure)> = schedule
                .iter()
                .enumerate()
                .map(|(k, e)| Ok((e.radius, plain_measure(&e.target, &format!("schedule[{k}].target"))?)))
                .collect::<Result<_, CliError>>()?;
            cost.validate().map_err(|e| CliError::Invalid(format!("cost: {e}")))?;
            let escape = escape_diagnostic(&mu, &schedule, &cost)?;
            #[derive(Serialize)]
            struct Body {
                kind: &'static str,
                diagnostic: &'static str,
                escape: otuniq::regularity::EscapeDiagnostic,
            }
            let body = Body { kind: "escape", diagnostic: DIAGNOSTIC_NOTE, escape };
            Envelope::new("regularity", &input, Settings::default(), body).render()?.into_bytes()
        }
    };
    write_output(args.out, &content)?;
    Ok(EXIT_OK)
}

pub struct CtransformArgs<'a> {
    pub problem: &'a Path,
    pub out: Option<&'a Path>,
    pub values: Option<&'a Path>,
    pub direction: Direction,
}

/// Writes the transform at the points of the output side as CSV.
pub fn cmd_ctransform(args: &CtransformArgs) -> Result<i32, CliError> {
    let input = read_input(args.problem)?;
    let loaded = load_problem(args.problem, &input, false)?;
    let p = &loaded.problem;
    let (len_in, out_points) = match args.direction {
        Direction::ToTarget => (p.n(), p.target().points()),
        Direction::ToSource => (p.m(), p.source().points()),
    };
    let values = match args.values {
        Some(path) => {
            let v = read_input(path)?;
            parse_json::<ValuesDocument>(path, &v.bytes)?.into_values()
        }
        None => vec![0.0; len_in],
    };
    if values.len() != len_in {
        return Err(CliError::Invalid(format!("{} values given, the input side has {len_in} points", values.len())));
    }
    let transformed = c_transform(&values, p, args.direction).map_err(|e| CliError::Invalid(e.to_string()))?;
    write_output(args.out, &csv_bytes(out_points, &transformed)?)?;
    Ok(EXIT_OK)
}
