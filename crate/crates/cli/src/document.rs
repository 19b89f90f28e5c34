//! Input documents: problems, regularity tasks and potential values.

use std::path::Path;

use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use otuniq::solver::exact::{exact_cost_matrix, parse_rational};
use otuniq::{CostSpec, DiscreteMeasure, Problem, Tolerances};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::CliError;

pub const SCHEMA_VERSION: &str = "1";

/// A decimal number or an exact rational written as `"p/q"`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum Number {
    Float(f64),
    Text(String),
}

impl Number {
    /// Exact value. A JSON number is read through its shortest decimal form,
    /// so `0.1` in the file becomes exactly `1/10`.
    pub fn rational(&self) -> Option<BigRational> {
        match self {
            Number::Float(v) if v.is_finite() => parse_rational(&format!("{v}")),
            Number::Float(_) => None,
            Number::Text(s) => parse_rational(s),
        }
    }

    pub fn float(&self) -> Option<f64> {
        match self {
            Number::Float(v) => Some(*v),
            Number::Text(s) => parse_rational(s).and_then(|q| q.to_f64()),
        }
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MeasureBlock {
    pub points: Vec<Vec<Number>>,
    pub weights: Vec<Number>,
    #[serde(default)]
    pub labels: Option<Vec<usize>>,
}

/// Which sides' components stand in for connected supports.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssertConnected {
    #[default]
    None,
    Source,
    Target,
    Both,
}

#[derive(Clone, Copy, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToleranceOverrides {
    pub mass: Option<f64>,
    pub tight: Option<f64>,
    pub gap: Option<f64>,
    pub face: Option<f64>,
    pub geom: Option<f64>,
}

impl ToleranceOverrides {
    fn apply(&self, base: Tolerances) -> Result<Tolerances, CliError> {
        let pick = |name: &str, v: Option<f64>, d: f64| match v {
            Some(v) if !(v.is_finite() && v > 0.0) => {
                Err(CliError::Invalid(format!("options.tolerances.{name} must be positive, got {v}")))
            }
            Some(v) => Ok(v),
            None => Ok(d),
        };
        Ok(Tolerances {
            mass: pick("mass", self.mass, base.mass)?,
            tight: pick("tight", self.tight, base.tight)?,
            gap: pick("gap", self.gap, base.gap)?,
            face: pick("face", self.face, base.face)?,
            geom: pick("geom", self.geom, base.geom)?,
        })
    }
}

#[derive(Clone, Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemOptions {
    #[serde(default)]
    pub epsilon: Option<f64>,
    #[serde(default)]
    pub assert_connected: AssertConnected,
    #[serde(default)]
    pub tolerances: Option<ToleranceOverrides>,
    #[serde(default)]
    pub exact: bool,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemDocument {
    pub schema_version: String,
    pub source: MeasureBlock,
    pub target: MeasureBlock,
    pub cost: CostSpec,
    #[serde(default)]
    pub options: ProblemOptions,
}

/// Rational data for the exact solver.
#[derive(Clone, Debug)]
pub struct ExactInput {
    pub supply: Vec<BigRational>,
    pub demand: Vec<BigRational>,
    pub cost: Vec<Vec<BigRational>>,
}

#[derive(Debug)]
pub struct LoadedProblem {
    pub problem: Problem,
    pub exact: Option<ExactInput>,
    pub options: ProblemOptions,
}

/// Raw input bytes with their digest.
pub struct Input {
    pub bytes: Vec<u8>,
    pub digest: String,
}

pub fn read_input(path: &Path) -> Result<Input, CliError> {
    let bytes = std::fs::read(path).map_err(|source| CliError::Read { path: path.to_path_buf(), source })?;
    let digest = digest(&bytes);
    Ok(Input { bytes, digest })
}

pub fn digest(bytes: &[u8]) -> String {
    let hash = Sha256::digest(bytes);
    let hex: String = hash.iter().map(|b| format!("{b:02x}")).collect();
    format!("sha256:{hex}")
}

/// Deserializes JSON, reporting the field path and line of the first error.
pub fn parse_json<T: DeserializeOwned>(path: &Path, bytes: &[u8]) -> Result<T, CliError> {
    let fail = |message: String| CliError::Parse { path: path.to_path_buf(), message };
    let mut de = serde_json::Deserializer::from_slice(bytes);
    let value: T = serde_path_to_error::deserialize(&mut de).map_err(|e| {
        let at = e.path().to_string();
        fail(format!("at `{at}`: {}", e.into_inner()))
    })?;
    de.end().map_err(|e| fail(e.to_string()))?;
    Ok(value)
}

fn check_schema(version: &str) -> Result<(), CliError> {
    if version != SCHEMA_VERSION {
        return Err(CliError::Invalid(format!("schema_version `{version}` is not supported, expected `{SCHEMA_VERSION}`")));
    }
    Ok(())
}

struct Converted {
    points: Vec<Vec<f64>>,
    weights: Vec<f64>,
    exact_points: Vec<Vec<BigRational>>,
    exact_weights: Vec<BigRational>,
}

fn convert(block: &MeasureBlock, side: &str) -> Result<Converted, CliError> {
    if block.points.is_empty() {
        return Err(CliError::Invalid(format!("{side}.points is empty")));
    }
    let bad = |what: String| CliError::Invalid(format!("{what} is not a finite number or p/q rational"));
    let mut out = Converted { points: Vec::new(), weights: Vec::new(), exact_points: Vec::new(), exact_weights: Vec::new() };
    for (k, p) in block.points.iter().enumerate() {
        let mut fp = Vec::with_capacity(p.len());
        let mut qp = Vec::with_capacity(p.len());
        for (d, x) in p.iter().enumerate() {
            let q = x.rational().ok_or_else(|| bad(format!("{side}.points[{k}][{d}]")))?;
            fp.push(x.float().ok_or_else(|| bad(format!("{side}.points[{k}][{d}]")))?);
            qp.push(q);
        }
        out.points.push(fp);
        out.exact_points.push(qp);
    }
    for (k, w) in block.weights.iter().enumerate() {
        out.exact_weights.push(w.rational().ok_or_else(|| bad(format!("{side}.weights[{k}]")))?);
        out.weights.push(w.float().ok_or_else(|| bad(format!("{side}.weights[{k}]")))?);
    }
    Ok(out)
}

fn measure(c: &Converted, labels: Option<&Vec<usize>>, side: &str, tol: &Tolerances) -> Result<DiscreteMeasure, CliError> {
    let invalid = |e: otuniq::error::MeasureError| CliError::Invalid(format!("{side}: {e}"));
    let m = DiscreteMeasure::with_tolerances(c.points.clone(), c.weights.clone(), tol).map_err(invalid)?;
    match labels {
        Some(l) => m.with_labels(l.clone()).map_err(invalid),
        None => Ok(m),
    }
}

/// Reads and validates a problem document.
pub fn load_problem(path: &Path, input: &Input, exact: bool) -> Result<LoadedProblem, CliError> {
    let doc: ProblemDocument = parse_json(path, &input.bytes)?;
    build_problem(doc, exact)
}

/// Builds core types. Raw totals are compared before measures are built,
/// so that unequal masses are reported as a solver error, not a parse error.
pub fn build_problem(doc: ProblemDocument, exact: bool) -> Result<LoadedProblem, CliError> {
    check_schema(&doc.schema_version)?;
    let exact = exact || doc.options.exact;
    let tol = match &doc.options.tolerances {
        Some(o) => o.apply(Tolerances::default())?,
        None => Tolerances::default(),
    };
    if let Some(eps) = doc.options.epsilon {
        if !(eps.is_finite() && eps > 0.0) {
            return Err(CliError::Invalid(format!("options.epsilon must be positive, got {eps}")));
        }
    }
    let source = convert(&doc.source, "source")?;
    let target = convert(&doc.target, "target")?;
    let (st, tt): (f64, f64) = (source.weights.iter().sum(), target.weights.iter().sum());
    if exact {
        let qs: BigRational = source.exact_weights.iter().fold(BigRational::zero(), |a, b| a + b);
        let qt: BigRational = target.exact_weights.iter().fold(BigRational::zero(), |a, b| a + b);
        if qs != qt {
            return Err(CliError::Unbalanced { source_total: st, target_total: tt });
        }
        if qs != BigRational::from_integer(1.into()) {
            return Err(CliError::Invalid(format!("weights sum to {qs}, expected 1")));
        }
    } else {
        if (st - tt).abs() > tol.mass {
            return Err(CliError::Unbalanced { source_total: st, target_total: tt });
        }
        if (st - 1.0).abs() > tol.mass {
            return Err(CliError::Invalid(format!("weights sum to {st}, expected 1")));
        }
    }
    let mu = measure(&source, doc.source.labels.as_ref(), "source", &tol)?;
    let nu = measure(&target, doc.target.labels.as_ref(), "target", &tol)?;
    let cost_spec = doc.cost.clone();
    let problem = Problem::with_tolerances(mu, nu, doc.cost, tol).map_err(|e| CliError::Invalid(format!("cost: {e}")))?;
    let exact = if exact {
        let cost = exact_cost_matrix(&source.exact_points, &target.exact_points, &cost_spec)?;
        Some(ExactInput { supply: source.exact_weights, demand: target.exact_weights, cost })
    } else {
        None
    };
    Ok(LoadedProblem { problem, exact, options: doc.options })
}

/// Builds a normalized measure from a block, for auxiliary inputs.
pub fn plain_measure(block: &MeasureBlock, side: &str) -> Result<DiscreteMeasure, CliError> {
    let c = convert(block, side)?;
    measure(&c, block.labels.as_ref(), side, &Tolerances::default())
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>, CliError> {
        if self.lower.len() != dim || self.upper.len() != dim || self.counts.len() != dim {
            return Err(CliError::Invalid(format!("grid bounds and counts must have dimension {dim}")));
        }
        for k in 0..dim {
            let (lo, hi, n) = (self.lower[k], self.upper[k], self.counts[k]);
            if n == 0 || !lo.is_finite() || !hi.is_finite() || (n > 1 && lo >= hi) {
                return Err(CliError::Invalid(format!("grid axis {k} is empty or has lower >= upper")));
            }
        }
        let total = self.counts.iter().try_fold(1usize, |a, &n| a.checked_mul(n));
        if total.map_or(true, |t| t > 10_000_000) {
            return Err(CliError::Invalid("grid has more than 10^7 points".into()));
        }
        Ok(otuniq::regularity::regular_grid(&self.lower, &self.upper, &self.counts))
    }
}

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleEntry {
    pub radius: f64,
    pub target: MeasureBlock,
}

/// Input of the `regularity` command.
#[derive(Clone, Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum RegularityDocument {
    DominatedRegion {
        schema_version: String,
        x: Vec<f64>,
        y: Vec<f64>,
        cost: CostSpec,
        grid: GridSpec,
    },
    AsymptoticRegion {
        schema_version: String,
        x: Vec<f64>,
        direction: Vec<f64>,
        cost: CostSpec,
        radii: Vec<f64>,
        grid: GridSpec,
    },
    GradientCheck {
        schema_version: String,
        problem: Box<ProblemDocument>,
        #[serde(default)]
        mask: Option<Vec<bool>>,
    },
    Escape {
        schema_version: String,
        source: MeasureBlock,
        schedule: Vec<ScheduleEntry>,
        cost: CostSpec,
    },
}

impl RegularityDocument {
    pub fn check_schema(&self) -> Result<(), CliError> {
        let v = match self {
            RegularityDocument::DominatedRegion { schema_version, .. }
            | RegularityDocument::AsymptoticRegion { schema_version, .. }
            | RegularityDocument::GradientCheck { schema_version, .. }
            | RegularityDocument::Escape { schema_version, .. } => schema_version,
        };
        check_schema(v)
    }
}

/// Values for the `ctransform` command: a bare array or `{"values": [...]}`.
#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum ValuesDocument {
    Bare(Vec<f64>),
    Wrapped { values: Vec<f64> },
}

impl ValuesDocument {
    pub fn into_values(self) -> Vec<f64> {
        match self {
            ValuesDocument::Bare(v) | ValuesDocument::Wrapped { values: v } => v,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::path::PathBuf;

    fn doc(source_w: &str, target_w: &str) -> Vec<u8> {
        format!(
            r#"{{"schema_version":"1",
               "source":{{"points":[[0],[1]],"weights":{source_w}}},
               "target":{{"points":[[0],[2]],"weights":{target_w}}},
               "cost":{{"kind":"lp_norm_power","q":2,"p":2}}}}"#
        )
        .into_bytes()
    }

    fn load(bytes: Vec<u8>, exact: bool) -> Result<LoadedProblem, CliError> {
        let input = Input { digest: digest(&bytes), bytes };
        load_problem(&PathBuf::from("p.json"), &input, exact)
    }

    #[test]
    fn rationals_and_decimals() {
        let l = load(doc(r#"["1/3","2/3"]"#, "[0.5,0.5]"), true).unwrap();
        assert_eq!(l.problem.source().weight(0), 1.0 / 3.0);
        let ex = l.exact.unwrap();
        assert_eq!(ex.supply[0], BigRational::new(1.into(), 3.into()));
        assert_eq!(ex.demand[0], BigRational::new(1.into(), 2.into()));
        assert_eq!(ex.cost[1][1], BigRational::from_integer(1.into()));
    }

    #[test]
    fn decimal_literals_are_exact() {
        let n = Number::Float(0.1);
        assert_eq!(n.rational().unwrap(), BigRational::new(1.into(), 10.into()));
        let l = load(doc("[0.1,0.9]", "[0.3,0.7]"), true).unwrap();
        assert!(l.exact.is_some());
    }

    #[test]
    fn unbalanced_before_normalization() {
        let e = load(doc("[0.5,0.5]", "[0.5,0.25]"), false).unwrap_err();
        assert!(matches!(e, CliError::Unbalanced { .. }));
        let e = load(doc("[1,1]", "[1,1]"), false).unwrap_err();
        assert!(matches!(e, CliError::Invalid(_)));
        let e = load(doc(r#"["1/2","1/2"]"#, r#"["1/3","1/2"]"#), true).unwrap_err();
        assert!(matches!(e, CliError::Unbalanced { .. }));
    }

    #[test]
    fn positioned_parse_errors() {
        let e = load(doc(r#"[0.5,true]"#, "[0.5,0.5]"), false).unwrap_err();
        let CliError::Parse { message, .. } = e else { panic!("{e}") };
        assert!(message.contains("source.weights[1]"), "{message}");
        let e = load(doc(r#"["1/0","1"]"#, "[0.5,0.5]"), false).unwrap_err();
        assert!(e.to_string().contains("source.weights[0]"), "{e}");
    }

    #[test]
    fn schema_version_is_checked() {
        let bytes = String::from_utf8(doc("[0.5,0.5]", "[0.5,0.5]")).unwrap().replace("\"1\"", "\"2\"");
        assert!(matches!(load(bytes.into_bytes(), false), Err(CliError::Invalid(_))));
    }

    #[test]
    fn digest_is_sha256() {
        assert_eq!(
            digest(b"abc"),
            "sha256:ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn grid_spec_validation() {
        let g = GridSpec { lower: vec![0.0], upper: vec![1.0], counts: vec![3] };
        assert_eq!(g.points(1).unwrap(), vec![vec![0.0], vec![0.5], vec![1.0]]);
        assert!(g.points(2).is_err());
        let g = GridSpec { lower: vec![1.0], upper: vec![0.0], counts: vec![3] };
        assert!(g.points(1).is_err());
    }
}
