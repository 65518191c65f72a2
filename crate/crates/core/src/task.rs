//! Task files and reports for the `orient` front end.
//!
//! A task file is TOML; see `docs/task-schema.md` for the fields. Running a
//! task yields a [`Report`], rendered either as a text table or as one JSON
//! document. Rationals in the JSON output are always `"p/q"` strings.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::algebra::{same_table, to_pair_string, TruncatedSeries};
use crate::axioms::{check_axioms, AxiomCheck, Fault};
use crate::equivariant::{TorusContext, DEFAULT_MAX_CAP};
use crate::error::{Error, Result};
use crate::expr::{ClassEnv, ClassExpr};
use crate::fgl::{make_fgl, FormalGroupLaw, TheoryKind};
use crate::localization::{
    compare_with_direct, direct_integral, standard_product_fixed_data, DirectReference,
    FixedComponentSpec, Integrand, VirtualLocalizationProblem,
};
use crate::space::{build_space, BundleSpec, LineSummand, SpaceModel};

pub const DEFAULT_ORDER: u32 = 8;
pub const DEFAULT_CAP: u32 = 2;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    Integrate,
    Localize,
    FglInverse,
    NSeries,
    CheckAxioms,
}

impl TaskKind {
    pub fn label(self) -> &'static str {
        match self {
            TaskKind::Integrate => "integrate",
            TaskKind::Localize => "localize",
            TaskKind::FglInverse => "fgl-inverse",
            TaskKind::NSeries => "n-series",
            TaskKind::CheckAxioms => "check-axioms",
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Truncation {
    /// FGL truncation order N.
    pub order: Option<u32>,
    /// Starting equivariant cap i.
    pub cap: Option<u32>,
    /// Largest cap automatic raising may reach.
    pub max_cap: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ExpectValue {
    Int(i64),
    Text(String),
}

impl ExpectValue {
    fn text(&self) -> String {
        match self {
            ExpectValue::Int(n) => n.to_string(),
            ExpectValue::Text(s) => s.clone(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Expected {
    Scalar(ExpectValue),
    /// Coefficients of u⁰, u¹, … for series-valued tasks.
    Series(Vec<ExpectValue>),
}

/// One explicitly listed fixed component.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComponentFile {
    #[serde(default = "point")]
    pub base: SpaceModel,
    #[serde(default)]
    pub n0: BundleSpec,
    #[serde(default)]
    pub n1: BundleSpec,
    #[serde(default)]
    pub obstruction: BundleSpec,
    /// Restrictions of the named lines to this component.
    #[serde(default)]
    pub lines: BTreeMap<String, LineSummand>,
    #[serde(default)]
    pub bundles: BTreeMap<String, BundleSpec>,
    /// Overrides the task's integrand on this component.
    pub integrand: Option<String>,
}

fn point() -> SpaceModel {
    SpaceModel::Point
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaskFile {
    pub theory: TheoryKind,
    pub task: TaskKind,
    #[serde(default)]
    pub truncation: Truncation,
    pub space: Option<SpaceModel>,
    #[serde(default)]
    pub lines: BTreeMap<String, LineSummand>,
    #[serde(default)]
    pub bundles: BTreeMap<String, BundleSpec>,
    pub integrand: Option<String>,
    #[serde(default)]
    pub obstruction: BundleSpec,
    pub torus_rank: Option<usize>,
    #[serde(default)]
    pub components: Vec<ComponentFile>,
    /// The n of an n-series task.
    pub n: Option<i64>,
    pub fault: Option<Fault>,
    pub expect: Option<Expected>,
}

impl TaskFile {
    pub fn parse(src: &str) -> Result<Self> {
        toml::from_str(src).map_err(|e| Error::Parse(e.message().to_string()))
    }
}

/// Command-line overrides of the file's truncation settings.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct RunOptions {
    pub order: Option<u32>,
    pub cap: Option<u32>,
    pub max_cap: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TermOut {
    pub exponents: BTreeMap<String, u32>,
    pub coefficient: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SeriesOut {
    pub display: String,
    pub terms: Vec<TermOut>,
}

impl From<&TruncatedSeries> for SeriesOut {
    fn from(s: &TruncatedSeries) -> Self {
        let t = s.table();
        let terms = s
            .terms()
            .map(|(m, c)| TermOut {
                exponents: m
                    .iter()
                    .enumerate()
                    .filter(|(_, &e)| e > 0)
                    .map(|(i, &e)| (t.name(i).to_string(), e))
                    .collect(),
                coefficient: to_pair_string(c),
            })
            .collect();
        Self {
            display: s.to_string(),
            terms,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ComparisonOut {
    pub theory: String,
    pub value: Option<SeriesOut>,
    pub direct: Option<SeriesOut>,
    pub passed: Option<bool>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum TaskResult {
    Scalar {
        value: SeriesOut,
    },
    Series {
        display: String,
        coefficients: Vec<SeriesOut>,
    },
    Localized {
        element: String,
        components: usize,
        /// The polynomial in the torus parameters the sum equals.
        value: Option<SeriesOut>,
        /// Its part without torus parameters.
        non_equivariant: Option<SeriesOut>,
        comparisons: Vec<ComparisonOut>,
    },
    Axioms {
        checks: Vec<AxiomCheck>,
    },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub name: String,
    pub expected: String,
    pub actual: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TruncationUsed {
    pub order: u32,
    pub cap: Option<u32>,
    pub max_cap: Option<u32>,
    /// Coefficient weight tracked exactly by a localization.
    pub weight: Option<u32>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Report {
    pub task: String,
    pub theory: String,
    pub truncation: TruncationUsed,
    pub result: TaskResult,
    pub verdicts: Vec<Verdict>,
    pub warnings: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.verdicts.iter().all(|v| v.passed)
    }
}

/// Process exit status for a finished run.
pub fn exit_code(outcome: &Result<Report>) -> i32 {
    match outcome {
        Ok(r) if r.passed() => 0,
        Ok(_) => 1,
        Err(e) if e.is_truncation() => 3,
        Err(_) => 2,
    }
}

fn env_of(lines: &BTreeMap<String, LineSummand>, bundles: &BTreeMap<String, BundleSpec>) -> ClassEnv {
    ClassEnv {
        lines: lines.clone(),
        bundles: bundles.clone(),
    }
}

fn parse_integrand(src: Option<&str>, warnings: &mut Vec<String>) -> Result<ClassExpr> {
    let src = src.unwrap_or("");
    if src.trim().is_empty() {
        warnings.push("empty integrand; the result is 0".into());
    }
    ClassExpr::parse(src)
}

/// Evaluates an expected value in the coefficient ring of `fgl`.
fn expected_scalar(fgl: &Arc<FormalGroupLaw>, v: &ExpectValue) -> Result<TruncatedSeries> {
    let e = ClassExpr::parse(&v.text())?;
    if !e.names().is_empty() {
        return Err(Error::InvalidTask(format!("expected value `{}` names a class", v.text())));
    }
    let pt = build_space(fgl, &SpaceModel::Point)?;
    pt.integrate(&e.eval(&pt, &ClassEnv::default())?)
}

fn verdict(name: &str, expected: &TruncatedSeries, actual: &TruncatedSeries) -> Verdict {
    Verdict {
        name: name.into(),
        expected: expected.to_string(),
        actual: actual.to_string(),
        passed: actual.equals(expected),
    }
}

fn scalar_expectation(task: &TaskFile, fgl: &Arc<FormalGroupLaw>) -> Result<Option<TruncatedSeries>> {
    match &task.expect {
        None => Ok(None),
        Some(Expected::Scalar(v)) => expected_scalar(fgl, v).map(Some),
        Some(Expected::Series(_)) => Err(Error::InvalidTask(format!(
            "a {} task expects a single value",
            task.task.label()
        ))),
    }
}

fn require_space(task: &TaskFile) -> Result<&SpaceModel> {
    task.space
        .as_ref()
        .ok_or_else(|| Error::InvalidTask(format!("a {} task needs a space", task.task.label())))
}

fn run_integrate(task: &TaskFile, fgl: &Arc<FormalGroupLaw>, warnings: &mut Vec<String>) -> Result<(TaskResult, Vec<Verdict>)> {
    let expr = parse_integrand(task.integrand.as_deref(), warnings)?;
    let direct = DirectReference {
        model: require_space(task)?.clone(),
        obstruction: task.obstruction.clone(),
        integrand: Integrand::new(expr, env_of(&task.lines, &task.bundles)),
    };
    let value = direct_integral(fgl, &direct)?;
    let mut verdicts = Vec::new();
    if let Some(e) = scalar_expectation(task, fgl)? {
        verdicts.push(verdict("expect", &e, &value));
    }
    Ok((TaskResult::Scalar { value: (&value).into() }, verdicts))
}

fn build_problem(
    task: &TaskFile,
    fgl: &Arc<FormalGroupLaw>,
    torus_for: impl Fn(usize) -> Result<TorusContext>,
    warnings: &mut Vec<String>,
) -> Result<VirtualLocalizationProblem> {
    let expr = parse_integrand(task.integrand.as_deref(), warnings)?;
    let integrand = Integrand::new(expr.clone(), env_of(&task.lines, &task.bundles));
    if task.components.is_empty() {
        let space = require_space(task)?;
        let dims = space.proj_factors().ok_or_else(|| {
            Error::InvalidTask(
                "without explicit components the space must be a product of projective spaces".into(),
            )
        })?;
        let rank: usize = dims.iter().map(|&n| n as usize + 1).sum();
        if let Some(r) = task.torus_rank {
            if r != rank {
                return Err(Error::RankMismatch(format!(
                    "the standard action on this space needs torus rank {rank}, file says {r}"
                )));
            }
        }
        return standard_product_fixed_data(fgl, &dims, &integrand, &task.obstruction, &torus_for(rank)?);
    }
    let rank = task
        .torus_rank
        .ok_or_else(|| Error::InvalidTask("explicit components need torus_rank".into()))?;
    let mut components = Vec::with_capacity(task.components.len());
    for c in &task.components {
        let e = match &c.integrand {
            Some(src) => ClassExpr::parse(src)?,
            None => expr.clone(),
        };
        components.push(FixedComponentSpec {
            base: c.base.clone(),
            n0: c.n0.clone(),
            n1: c.n1.clone(),
            obstruction: c.obstruction.clone(),
            integrand: Integrand::new(e, env_of(&c.lines, &c.bundles)),
        });
    }
    let direct = task.space.as_ref().map(|model| DirectReference {
        model: model.clone(),
        obstruction: task.obstruction.clone(),
        integrand: integrand.clone(),
    });
    Ok(VirtualLocalizationProblem {
        fgl: fgl.clone(),
        torus: torus_for(rank)?,
        components,
        direct,
    })
}

fn run_localize(
    task: &TaskFile,
    fgl: &Arc<FormalGroupLaw>,
    cap: u32,
    max_cap: u32,
    used: &mut TruncationUsed,
    warnings: &mut Vec<String>,
) -> Result<(TaskResult, Vec<Verdict>)> {
    let problem = build_problem(task, fgl, |rank| TorusContext::with_ceiling(rank, cap, max_cap), warnings)?;
    let report = compare_with_direct(&problem)?;
    used.cap = Some(report.plan.cap);
    used.weight = Some(report.plan.weight);
    let el = &report.localized;
    let value = el.polynomial_value()?;
    let non_eq = value.as_ref().map(|q| el.non_equivariant_part(q));
    let mut verdicts = Vec::new();
    if value.is_none() {
        verdicts.push(Verdict {
            name: "denominator-free".into(),
            expected: "a polynomial".into(),
            actual: el.to_string(),
            passed: false,
        });
    }
    for v in &report.verdicts {
        if let (Some(ok), Some(d)) = (v.verdict, &v.direct) {
            let actual = match &v.polynomial {
                Some(q) => v.localized.non_equivariant_part(q).to_string(),
                None => v.localized.to_string(),
            };
            verdicts.push(Verdict {
                name: format!("direct ({})", v.kind.label()),
                expected: d.to_string(),
                actual,
                passed: ok,
            });
        }
    }
    if let Some(e) = scalar_expectation(task, fgl)? {
        let ring = el.ring();
        let e = if same_table(e.table(), ring.scalar_table()) {
            e
        } else {
            e.rename_into(ring.scalar_table(), ring.scalar_profile())?
        };
        match &non_eq {
            Some(q) => verdicts.push(verdict("expect", &e, q)),
            None => verdicts.push(Verdict {
                name: "expect".into(),
                expected: e.to_string(),
                actual: el.to_string(),
                passed: false,
            }),
        }
    }
    let comparisons = report
        .verdicts
        .iter()
        .map(|v| ComparisonOut {
            theory: v.kind.label().into(),
            value: v.polynomial.as_ref().map(Into::into),
            direct: v.direct.as_ref().map(Into::into),
            passed: v.verdict,
        })
        .collect();
    Ok((
        TaskResult::Localized {
            element: el.to_string(),
            components: problem.components.len(),
            value: value.as_ref().map(Into::into),
            non_equivariant: non_eq.as_ref().map(Into::into),
            comparisons,
        },
        verdicts,
    ))
}

/// Splits a series in `u` over the coefficients into its u-coefficients.
fn u_coefficients(s: &TruncatedSeries, fgl: &FormalGroupLaw) -> Result<Vec<TruncatedSeries>> {
    let ui = s
        .table()
        .index_of("u")
        .ok_or_else(|| Error::UnknownVariable("u".into()))?;
    let coeffs = fgl.coefficient_table();
    let len = s.terms().map(|(m, _)| m[ui] as usize + 1).max().unwrap_or(0);
    let mut out = vec![TruncatedSeries::zero(coeffs, &crate::algebra::Profile::exact(coeffs.len())); len];
    for (m, c) in s.terms() {
        let mut e = m.clone();
        let k = e.remove(ui) as usize;
        out[k].add_term(e, c.clone());
    }
    Ok(out)
}

fn series_result(
    task: &TaskFile,
    fgl: &Arc<FormalGroupLaw>,
    s: &TruncatedSeries,
) -> Result<(TaskResult, Vec<Verdict>)> {
    let coeffs = u_coefficients(s, fgl)?;
    let mut verdicts = Vec::new();
    match &task.expect {
        None => {}
        Some(Expected::Scalar(_)) => {
            return Err(Error::InvalidTask(format!(
                "a {} task expects a list of coefficients",
                task.task.label()
            )))
        }
        Some(Expected::Series(list)) => {
            let n = list.len().max(coeffs.len());
            for k in 0..n {
                let want = match list.get(k) {
                    Some(v) => expected_scalar(fgl, v)?,
                    None => expected_scalar(fgl, &ExpectValue::Int(0))?,
                };
                let got = coeffs.get(k).cloned().unwrap_or_else(|| want.scale(&crate::algebra::int(0)));
                verdicts.push(verdict(&format!("u^{k}"), &want, &got));
            }
        }
    }
    Ok((
        TaskResult::Series {
            display: s.to_string(),
            coefficients: coeffs.iter().map(Into::into).collect(),
        },
        verdicts,
    ))
}

/// Runs a parsed task.
pub fn run_task(task: &TaskFile, opts: &RunOptions) -> Result<Report> {
    let order = opts.order.or(task.truncation.order).unwrap_or(DEFAULT_ORDER);
    let cap = opts.cap.or(task.truncation.cap).unwrap_or(DEFAULT_CAP);
    let max_cap = opts
        .max_cap
        .or(task.truncation.max_cap)
        .unwrap_or(DEFAULT_MAX_CAP.max(cap));
    let fgl = make_fgl(task.theory, order)?;
    let mut warnings = Vec::new();
    let mut used = TruncationUsed {
        order,
        cap: None,
        max_cap: None,
        weight: None,
    };
    let (result, verdicts) = match task.task {
        TaskKind::Integrate => run_integrate(task, &fgl, &mut warnings)?,
        TaskKind::Localize => {
            used.max_cap = Some(max_cap);
            run_localize(task, &fgl, cap, max_cap, &mut used, &mut warnings)?
        }
        TaskKind::FglInverse => series_result(task, &fgl, &fgl.inverse().g)?,
        TaskKind::NSeries => {
            let n = task
                .n
                .ok_or_else(|| Error::InvalidTask("an n-series task needs n".into()))?;
            series_result(task, &fgl, &fgl.n_series(n)?)?
        }
        TaskKind::CheckAxioms => {
            let checks = check_axioms(task.theory, order, task.fault)?;
            let verdicts = checks
                .iter()
                .map(|c| Verdict {
                    name: c.name.clone(),
                    expected: "holds".into(),
                    actual: if c.passed { "holds" } else { "fails" }.into(),
                    passed: c.passed,
                })
                .collect();
            (TaskResult::Axioms { checks }, verdicts)
        }
    };
    Ok(Report {
        task: task.task.label().into(),
        theory: task.theory.label().into(),
        truncation: used,
        result,
        verdicts,
        warnings,
    })
}

/// Parses and runs task-file text.
pub fn run_task_str(src: &str, opts: &RunOptions) -> Result<Report> {
    run_task(&TaskFile::parse(src)?, opts)
}

/// The report as a JSON document.
pub fn render_machine(report: &Report) -> String {
    serde_json::to_string_pretty(report).expect("report serializes") + "\n"
}

/// The report as a text table.
pub fn render_text(report: &Report) -> String {
    let mut rows: Vec<(String, String)> = Vec::new();
    let mut row = |k: &str, v: &str| rows.push((k.to_string(), v.to_string()));
    row("task", &report.task);
    row("theory", &report.theory);
    let t = &report.truncation;
    let mut trunc = format!("order {}", t.order);
    if let Some(c) = t.cap {
        let _ = write!(trunc, ", cap {c}");
    }
    if let Some(m) = t.max_cap {
        let _ = write!(trunc, " (max {m})");
    }
    if let Some(w) = t.weight {
        let _ = write!(trunc, ", weight {w}");
    }
    row("truncation", &trunc);
    match &report.result {
        TaskResult::Scalar { value } => row("result", &value.display),
        TaskResult::Series { display, coefficients } => {
            row("result", display);
            for (k, c) in coefficients.iter().enumerate() {
                row(&format!("  u^{k}"), &c.display);
            }
        }
        TaskResult::Localized {
            element,
            components,
            value,
            non_equivariant,
            comparisons,
        } => {
            row("components", &components.to_string());
            row("localized", element);
            if let Some(v) = value {
                row("value", &v.display);
            }
            if let Some(v) = non_equivariant {
                row("result", &v.display);
            }
            for c in comparisons {
                let v = c.value.as_ref().map_or("-", |s| s.display.as_str());
                row(&format!("  as {}", c.theory), v);
            }
        }
        TaskResult::Axioms { checks } => {
            for c in checks {
                let mark = if c.passed { "pass" } else { "FAIL" };
                row(&c.name, &format!("{mark}  {}", c.detail));
            }
        }
    }
    for v in &report.verdicts {
        if matches!(report.result, TaskResult::Axioms { .. }) {
            break;
        }
        let mark = if v.passed { "pass" } else { "FAIL" };
        row(&format!("check {}", v.name), &format!("{mark}  expected {}, got {}", v.expected, v.actual));
    }
    for w in &report.warnings {
        row("warning", w);
    }
    row("status", if report.passed() { "pass" } else { "FAIL" });
    let width = rows.iter().map(|(k, _)| k.chars().count()).max().unwrap_or(0);
    let mut out = String::new();
    for (k, v) in rows {
        let _ = writeln!(out, "{k:<width$}  {v}");
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bezout_file() {
        let src = r#"
theory = "chow"
task = "integrate"
space = { kind = "proj", n = 2 }
lines = { h = { degrees = [1] } }
integrand = "(2h)(3h)"
expect = 6
"#;
        let r = run_task_str(src, &RunOptions::default()).unwrap();
        assert!(r.passed());
        assert_eq!(exit_code(&Ok(r.clone())), 0);
        assert!(render_text(&r).lines().any(|l| l.starts_with("result ") && l.ends_with(" 6")));
    }

    #[test]
    fn inverse_file() {
        let src = r#"
theory = "ktheory"
task = "fgl-inverse"
truncation = { order = 5 }
expect = ["-1", "-beta", "-beta^2", "-beta^3"]
"#;
        let r = run_task_str(src, &RunOptions::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }

    #[test]
    fn empty_integrand_warns() {
        let src = r#"
theory = "chow"
task = "integrate"
space = { kind = "proj", n = 1 }
"#;
        let r = run_task_str(src, &RunOptions::default()).unwrap();
        assert_eq!(r.warnings.len(), 1);
        let TaskResult::Scalar { value } = &r.result else { panic!() };
        assert_eq!(value.display, "0");
    }

    #[test]
    fn exit_codes() {
        assert_eq!(exit_code(&run_task_str("theory = 3", &RunOptions::default())), 2);
        let src = r#"
theory = "chow"
task = "integrate"
space = { kind = "proj", n = 2 }
lines = { h = { degrees = [1] } }
integrand = "h^2"
expect = 2
"#;
        assert_eq!(exit_code(&run_task_str(src, &RunOptions::default())), 1);
        let src = r#"
theory = "chow"
task = "localize"
space = { kind = "proj", n = 2 }
lines = { h = { degrees = [1] } }
integrand = "h^2"
truncation = { max_cap = 3 }
"#;
        assert_eq!(exit_code(&run_task_str(src, &RunOptions::default())), 3);
    }
}
