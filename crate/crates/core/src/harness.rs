//! Reproducible suite runs: configuration, item scheduling, reports.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::classify::{
    check_hypotheses, classify_all, Hypothesis, Predicate, Proposition, Verdict, VerdictStatus, PROPOSITIONS,
};
use crate::conformal::{lift, verify_theorems, ConformalChange, TheoremId};
use crate::error::{FinslerError, Result};
use crate::jets::Point;
use crate::metric::{parse_metric_json, FinslerStructure};
use crate::report::Status;

/// Environment variable holding the worker count.
pub const WORKERS_ENV: &str = "FINSLER_WORKERS";

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    #[default]
    Json,
    Markdown,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub metrics: Vec<PathBuf>,
    pub sigmas: Vec<String>,
    pub theorems: Vec<String>,
    pub predicates: Vec<String>,
    pub propositions: Vec<String>,
    pub samples: usize,
    pub seed: u64,
    /// Overrides every item's default tolerance.
    pub tol: Option<f64>,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            metrics: Vec::new(),
            sigmas: Vec::new(),
            theorems: Vec::new(),
            predicates: Vec::new(),
            propositions: Vec::new(),
            samples: 20,
            seed: 7,
            tol: None,
            out: None,
            format: Format::Json,
            workers: None,
        }
    }
}

impl RunConfig {
    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        serde_json::from_str(&text).map_err(|e| FinslerError::Schema(format!("{}: {e}", path.display())))
    }
}

fn expand<T: Copy>(names: &[String], all: &[T], parse: impl Fn(&str) -> Result<T>) -> Result<Vec<T>> {
    let mut out = Vec::new();
    for name in names.iter().flat_map(|s| s.split(',')).map(str::trim).filter(|s| !s.is_empty()) {
        if name == "all" {
            out.extend_from_slice(all);
        } else {
            out.push(parse(name)?);
        }
    }
    Ok(out)
}

/// The parsed selection of a config.
struct Plan {
    theorems: Vec<TheoremId>,
    predicates: Vec<Predicate>,
    propositions: Vec<&'static Proposition>,
}

fn plan(config: &RunConfig) -> Result<Plan> {
    let schema = |e: FinslerError| FinslerError::Schema(e.to_string());
    let theorems = expand(&config.theorems, &TheoremId::ALL, str::parse).map_err(schema)?;
    let predicates = expand(&config.predicates, Predicate::ALL, str::parse).map_err(schema)?;
    let all_props: Vec<&'static Proposition> = PROPOSITIONS.iter().collect();
    let propositions = expand(&config.propositions, &all_props, Proposition::find).map_err(schema)?;
    if theorems.is_empty() && predicates.is_empty() && propositions.is_empty() {
        return Err(FinslerError::Schema("nothing to run: no theorems, predicates or propositions".into()));
    }
    if (!theorems.is_empty() || !propositions.is_empty()) && config.sigmas.is_empty() {
        return Err(FinslerError::Schema("theorems and propositions need at least one sigma".into()));
    }
    if config.samples == 0 {
        return Err(FinslerError::Schema("samples must be at least 1".into()));
    }
    Ok(Plan { theorems, predicates, propositions })
}

#[derive(Debug, Clone, Serialize)]
pub struct ItemRecord {
    pub id: String,
    pub status: Status,
    /// Classification outcome; only set for predicate items.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub verdict: Option<VerdictStatus>,
    pub tolerance: f64,
    pub max_residual: Option<f64>,
    pub worst_sample: Option<usize>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub parts: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "BTreeMap::is_empty")]
    pub fitted: BTreeMap<String, Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub note: Option<String>,
}

impl ItemRecord {
    fn error(id: String, e: &FinslerError) -> Self {
        Self {
            id,
            status: Status::Error,
            verdict: None,
            tolerance: 0.0,
            max_residual: None,
            worst_sample: None,
            parts: BTreeMap::new(),
            fitted: BTreeMap::new(),
            note: Some(e.to_string()),
        }
    }
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Summary {
    pub pass: usize,
    pub fail: usize,
    pub inapplicable: usize,
    pub error: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerificationReport {
    pub tool: String,
    pub version: String,
    pub config: RunConfig,
    pub items: Vec<ItemRecord>,
    pub summary: Summary,
}

impl VerificationReport {
    fn new(config: RunConfig, mut items: Vec<ItemRecord>) -> Self {
        items.sort_by(|a, b| a.id.cmp(&b.id));
        let mut summary = Summary::default();
        for it in &items {
            match it.status {
                Status::Pass => summary.pass += 1,
                Status::Fail => summary.fail += 1,
                Status::Inapplicable => summary.inapplicable += 1,
                Status::Error => summary.error += 1,
            }
        }
        Self { tool: "finsler".into(), version: env!("CARGO_PKG_VERSION").into(), config, items, summary }
    }

    /// 0 when nothing failed or errored, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.summary.fail + self.summary.error == 0 {
            0
        } else {
            1
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report is serializable")
    }

    /// Markdown projection of the JSON report.
    pub fn to_markdown(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "# {} {}\n", self.tool, self.version);
        let _ = writeln!(
            s,
            "pass {} · fail {} · inapplicable {} · error {}\n",
            self.summary.pass, self.summary.fail, self.summary.inapplicable, self.summary.error
        );
        let _ = writeln!(s, "| id | status | verdict | max residual | tol | worst sample | note |");
        let _ = writeln!(s, "|---|---|---|---|---|---|---|");
        for it in &self.items {
            let _ = writeln!(
                s,
                "| {} | {} | {} | {} | {:e} | {} | {} |",
                it.id,
                it.status,
                it.verdict.map(|v| v.to_string()).unwrap_or_default(),
                it.max_residual.map(|r| format!("{r:e}")).unwrap_or_else(|| "-".into()),
                it.tolerance,
                it.worst_sample.map(|w| w.to_string()).unwrap_or_else(|| "-".into()),
                it.note.as_deref().unwrap_or(""),
            );
        }
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Json => self.to_json(),
            Format::Markdown => self.to_markdown(),
        }
    }
}

/// A named base structure of a suite.
#[derive(Debug, Clone)]
pub struct NamedMetric {
    pub name: String,
    pub structure: FinslerStructure,
}

fn load_metrics(paths: &[PathBuf]) -> Result<Vec<NamedMetric>> {
    if paths.is_empty() {
        return Err(FinslerError::Schema("at least one metric is required".into()));
    }
    paths
        .iter()
        .map(|p| {
            let text = std::fs::read_to_string(p)?;
            let structure = parse_metric_json(&text)?;
            let name = p.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            Ok(NamedMetric { name, structure })
        })
        .collect()
}

enum Task<'a> {
    Theorems(&'a NamedMetric, &'a str),
    Classify(&'a NamedMetric),
    Invariance(&'a NamedMetric, &'a str),
}

fn verdict_record(id: String, v: &Verdict) -> ItemRecord {
    let fitted = v.worst_sample.map(|w| v.samples[w].fitted.clone()).unwrap_or_default();
    ItemRecord {
        id,
        status: Status::Pass,
        verdict: Some(v.status),
        tolerance: v.tolerance,
        max_residual: v.max_residual,
        worst_sample: v.worst_sample,
        parts: BTreeMap::new(),
        fitted,
        note: v.note.clone(),
    }
}

/// Whether base and lifted verdicts agree, allowing a factor `slack` on the
/// tolerance in either direction.
pub fn verdicts_agree(base: &Verdict, lifted: &Verdict, slack: f64) -> bool {
    let ina = |v: &Verdict| v.status == VerdictStatus::Inapplicable;
    if ina(base) || ina(lifted) {
        return ina(base) == ina(lifted);
    }
    let holds = |v: &Verdict| v.status == VerdictStatus::Holds;
    (!holds(base) || lifted.holds_at(slack * lifted.tolerance)) && (!holds(lifted) || base.holds_at(slack * base.tolerance))
}

fn sigma_vanishes(cc: &ConformalChange) -> bool {
    !cc.sigma.references_position() && cc.sigma.eval::<f64>(&vec![0.0; 2 * cc.base.n]) == 0.0
}

fn blank(id: &str, tol: f64) -> ItemRecord {
    ItemRecord {
        id: id.to_string(),
        status: Status::Pass,
        verdict: None,
        tolerance: tol,
        max_residual: None,
        worst_sample: None,
        parts: BTreeMap::new(),
        fitted: BTreeMap::new(),
        note: None,
    }
}

/// Checks propositions on one pair. Hypotheses are evaluated once, and base
/// and lifted are each classified once over the union of predicates whose
/// proposition applies. A proposition is `inapplicable` when its hypothesis
/// fails.
pub fn check_propositions(
    props: &[&Proposition],
    cc: &ConformalChange,
    samples: &[Point],
    tol: Option<f64>,
) -> Result<Vec<ItemRecord>> {
    let htol = tol.unwrap_or(crate::classify::STRUCTURAL_TOL);
    let mut hyps: Vec<Hypothesis> = props.iter().filter_map(|p| p.hypothesis).collect();
    hyps.sort_by_key(|h| h.as_str());
    hyps.dedup();
    let hv: BTreeMap<&str, Verdict> = hyps
        .iter()
        .map(|h| h.as_str())
        .zip(check_hypotheses(cc, &hyps, samples, htol)?)
        .collect();
    let mut records: Vec<ItemRecord> = props.iter().map(|p| blank(p.id, htol)).collect();
    let mut preds: Vec<Predicate> = Vec::new();
    for (prop, rec) in props.iter().zip(records.iter_mut()) {
        if prop.needs_nonzero_sigma && sigma_vanishes(cc) {
            rec.status = Status::Inapplicable;
            rec.note = Some("sigma vanishes identically".into());
            continue;
        }
        if let Some(h) = prop.hypothesis {
            let v = &hv[h.as_str()];
            rec.parts.insert(format!("hypothesis/{h}"), v.max_residual.unwrap_or(0.0));
            if v.status != VerdictStatus::Holds {
                rec.status = Status::Inapplicable;
                rec.note = Some(format!("hypothesis {h} does not hold"));
                continue;
            }
        }
        preds.extend(prop.predicates.iter().copied());
    }
    preds.sort();
    preds.dedup();
    if preds.is_empty() {
        return Ok(records);
    }
    let base = classify_all(&cc.base, &preds, samples, tol)?;
    let lifted = classify_all(&cc.lifted, &preds, samples, tol)?;
    for (prop, rec) in props.iter().zip(records.iter_mut()) {
        if rec.status == Status::Inapplicable {
            continue;
        }
        let mut failed = Vec::new();
        for p in prop.predicates {
            let k = preds.iter().position(|q| q == p).expect("predicate was classified");
            let (b, l) = (&base[k], &lifted[k]);
            rec.parts.insert(format!("{p}/base"), b.max_residual.unwrap_or(0.0));
            rec.parts.insert(format!("{p}/lifted"), l.max_residual.unwrap_or(0.0));
            if !verdicts_agree(b, l, 10.0) {
                failed.push(format!("{p}: base {} lifted {}", b.status, l.status));
            }
        }
        if !failed.is_empty() {
            rec.status = Status::Fail;
            rec.note = Some(failed.join("; "));
        }
    }
    Ok(records)
}

pub fn check_proposition(prop: &Proposition, cc: &ConformalChange, samples: &[Point], tol: Option<f64>) -> Result<ItemRecord> {
    Ok(check_propositions(&[prop], cc, samples, tol)?.remove(0))
}

fn run_task(task: &Task<'_>, config: &RunConfig, plan: &Plan) -> Vec<ItemRecord> {
    let samples = |m: &NamedMetric| m.structure.sample_points(config.samples, config.seed);
    match *task {
        Task::Theorems(m, sigma) => {
            let key = |id: TheoremId| format!("verify/{}/{}/{}", m.name, sigma, id);
            let run = || -> Result<Vec<ItemRecord>> {
                let cc = lift(&m.structure, sigma)?;
                let tol = |id: TheoremId| config.tol.unwrap_or(id.default_tol());
                let reports = verify_theorems(&plan.theorems, &cc, &samples(m)?, tol);
                Ok(plan
                    .theorems
                    .iter()
                    .zip(reports)
                    .map(|(&id, r)| ItemRecord {
                        id: key(id),
                        status: r.status,
                        verdict: None,
                        tolerance: r.tolerance,
                        max_residual: Some(r.max_residual),
                        worst_sample: r.worst_sample,
                        parts: r.parts,
                        fitted: BTreeMap::new(),
                        note: (!r.errors.is_empty())
                            .then(|| format!("{} sample errors, first: {}", r.errors.len(), r.errors[0].1)),
                    })
                    .collect())
            };
            run().unwrap_or_else(|e| plan.theorems.iter().map(|&id| ItemRecord::error(key(id), &e)).collect())
        }
        Task::Classify(m) => {
            let key = |p: Predicate| format!("classify/{}/{}", m.name, p);
            match samples(m).and_then(|s| classify_all(&m.structure, &plan.predicates, &s, config.tol)) {
                Ok(vs) => plan.predicates.iter().zip(&vs).map(|(&p, v)| verdict_record(key(p), v)).collect(),
                Err(e) => plan.predicates.iter().map(|&p| ItemRecord::error(key(p), &e)).collect(),
            }
        }
        Task::Invariance(m, sigma) => {
            let key = |id: &str| format!("invariance/{}/{}/{}", m.name, sigma, id);
            let run = || -> Result<Vec<ItemRecord>> {
                let cc = lift(&m.structure, sigma)?;
                let mut recs = check_propositions(&plan.propositions, &cc, &samples(m)?, config.tol)?;
                for r in &mut recs {
                    r.id = key(&r.id);
                }
                Ok(recs)
            };
            run().unwrap_or_else(|e| plan.propositions.iter().map(|p| ItemRecord::error(key(p.id), &e)).collect())
        }
    }
}

/// Runs a suite over already-built structures; metric paths in `config` are
/// ignored.
pub fn run_with(metrics: &[NamedMetric], config: &RunConfig) -> Result<VerificationReport> {
    let plan = plan(config)?;
    let mut tasks = Vec::new();
    for m in metrics {
        for sigma in &config.sigmas {
            if !plan.theorems.is_empty() {
                tasks.push(Task::Theorems(m, sigma));
            }
            if !plan.propositions.is_empty() {
                tasks.push(Task::Invariance(m, sigma));
            }
        }
        if !plan.predicates.is_empty() {
            tasks.push(Task::Classify(m));
        }
    }
    let workers = config.workers.or_else(|| std::env::var(WORKERS_ENV).ok().and_then(|v| v.parse().ok()));
    let exec = || tasks.par_iter().flat_map_iter(|t| run_task(t, config, &plan)).collect::<Vec<_>>();
    let items = match workers {
        Some(w) => rayon::ThreadPoolBuilder::new()
            .num_threads(w)
            .build()
            .map_err(|e| FinslerError::Schema(format!("worker pool: {e}")))?
            .install(exec),
        None => exec(),
    };
    Ok(VerificationReport::new(config.clone(), items))
}

/// Loads the metrics named in `config`, runs every item and writes the
/// report when an output path is set.
pub fn run_suite(config: &RunConfig) -> Result<VerificationReport> {
    plan(config)?;
    let metrics = load_metrics(&config.metrics)?;
    let report = run_with(&metrics, config)?;
    if let Some(out) = &config.out {
        std::fs::write(out, report.render(config.format))?;
    }
    Ok(report)
}

/// Process exit status for a finished or failed run.
pub fn exit_code(result: &Result<VerificationReport>) -> i32 {
    match result {
        Ok(r) => r.exit_code(),
        Err(_) => 2,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn named(name: &str, structure: FinslerStructure) -> Vec<NamedMetric> {
        vec![NamedMetric { name: name.into(), structure }]
    }

    #[test]
    fn empty_selection_is_a_schema_error() {
        let cfg = RunConfig::default();
        let r = run_with(&named("e", FinslerStructure::euclidean(2)), &cfg);
        assert!(matches!(r, Err(FinslerError::Schema(_))));
        assert_eq!(exit_code(&r), 2);
    }

    #[test]
    fn quartic_riemannian_fails_landsberg_holds() {
        let cfg = RunConfig { predicates: vec!["riemannian,landsberg".into()], samples: 5, ..Default::default() };
        let r = run_with(&named("quartic", FinslerStructure::quartic(2)), &cfg).unwrap();
        let v: Vec<_> = r.items.iter().map(|i| (i.id.as_str(), i.verdict.unwrap())).collect();
        assert_eq!(v, [("classify/quartic/landsberg", VerdictStatus::Holds), ("classify/quartic/riemannian", VerdictStatus::Fails)]);
    }

    #[test]
    fn euclidean_all_theorems_pass_and_repeat_bitwise() {
        let cfg = RunConfig { theorems: vec!["all".into()], sigmas: vec!["0.1*x1".into()], samples: 3, ..Default::default() };
        let m = named("euclidean2", FinslerStructure::euclidean(2));
        let a = run_with(&m, &cfg).unwrap();
        assert_eq!(a.items.len(), TheoremId::ALL.len());
        assert_eq!(a.exit_code(), 0, "{}", a.to_markdown());
        let b = run_with(&m, &RunConfig { workers: Some(1), ..cfg }).unwrap();
        let strip = |s: String| s.replace("\"workers\": 1", "\"workers\": null");
        assert_eq!(strip(b.to_json()), a.to_json());
    }
}
