//! Finsler structures and the zeroth layer of tensors built from them.
//!
//! Local realizations used throughout the crate:
//! `gᵢⱼ = ½ ∂²L²/∂yⁱ∂yʲ`, `Cᵢⱼₖ = ¼ ∂³L²/∂yⁱ∂yʲ∂yᵏ`, `Tⁱⱼₖ = gⁱˡ Cₗⱼₖ`.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, SymmetricEigen};
use ndarray::{Array1, Array2, Array3};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{FinslerError, Result};
use crate::expr::{Expr, ExprField, Func};
use crate::jets::{coordinate_jets, Jet, Point, Real, ScalarField};
use crate::tensor::{jet_sum, JetTensor};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Euclidean,
    Riemannian,
    Randers,
    Kropina,
    Quartic,
    Expression,
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Family::Euclidean => "euclidean",
            Family::Riemannian => "riemannian",
            Family::Randers => "randers",
            Family::Kropina => "kropina",
            Family::Quartic => "quartic",
            Family::Expression => "expression",
        };
        f.write_str(s)
    }
}

/// Open cone of admissible fiber directions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum Domain {
    /// Every `y ≠ 0`.
    All,
    /// `normal·y > margin·|normal|·|y|`.
    Halfspace {
        normal: Vec<f64>,
        #[serde(default)]
        margin: f64,
    },
    /// `|yⁱ| ≥ margin·|y|` for every `i`; keeps away from the coordinate
    /// axes where norms such as `(Σ yⁱ⁴)^{1/4}` lose strong convexity.
    OffAxes { margin: f64 },
}

impl Domain {
    pub fn contains(&self, y: &[f64]) -> bool {
        let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
        if norm == 0.0 {
            return false;
        }
        match self {
            Domain::All => true,
            Domain::Halfspace { normal, margin } => {
                let nn = normal.iter().map(|v| v * v).sum::<f64>().sqrt();
                let dot: f64 = normal.iter().zip(y).map(|(a, b)| a * b).sum();
                dot > margin * nn * norm
            }
            Domain::OffAxes { margin } => y.iter().all(|v| v.abs() >= margin * norm),
        }
    }
}

/// Metric specification document.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MetricSpec {
    pub family: Family,
    pub n: usize,
    #[serde(default)]
    pub params: serde_json::Map<String, Value>,
    #[serde(default)]
    pub domain: Option<Domain>,
    #[serde(default, rename = "L")]
    pub lagrangian: Option<String>,
}

/// A Finsler structure `(M, L)` on a chart of dimension `n`.
///
/// Immutable after construction; `L` is compiled to an expression that
/// evaluates on floats and jets alike.
#[derive(Debug, Clone)]
pub struct FinslerStructure {
    pub n: usize,
    pub family: Family,
    pub params: serde_json::Map<String, Value>,
    pub domain: Domain,
    field: Arc<ExprField>,
}

impl FinslerStructure {
    /// Builds a structure from an already-parsed fundamental function.
    pub fn from_expr(n: usize, family: Family, expr: Expr, domain: Domain) -> Self {
        Self {
            n,
            family,
            params: serde_json::Map::new(),
            domain,
            field: Arc::new(ExprField { expr, n }),
        }
    }

    pub fn euclidean(n: usize) -> Self {
        parse_metric(&MetricSpec {
            family: Family::Euclidean,
            n,
            params: Default::default(),
            domain: None,
            lagrangian: None,
        })
        .expect("euclidean structure is valid")
    }

    /// `L² = Σ aᵢⱼ(x) yⁱ yʲ` with diagonal coefficients given as expressions.
    pub fn riemannian_diag(diag: &[&str]) -> Result<Self> {
        let mut params = serde_json::Map::new();
        params.insert("diag".into(), Value::from(diag.iter().map(|s| Value::from(*s)).collect::<Vec<_>>()));
        parse_metric(&MetricSpec {
            family: Family::Riemannian,
            n: diag.len(),
            params,
            domain: None,
            lagrangian: None,
        })
    }

    /// `L = |y| + b·y`.
    pub fn randers(b: &[f64]) -> Result<Self> {
        let mut params = serde_json::Map::new();
        params.insert("b".into(), Value::from(b.to_vec()));
        parse_metric(&MetricSpec {
            family: Family::Randers,
            n: b.len(),
            params,
            domain: None,
            lagrangian: None,
        })
    }

    /// `L = (Σ (yⁱ)⁴)^{1/4}`.
    pub fn quartic(n: usize) -> Self {
        parse_metric(&MetricSpec {
            family: Family::Quartic,
            n,
            params: Default::default(),
            domain: None,
            lagrangian: None,
        })
        .expect("quartic structure is valid")
    }

    pub fn expr(&self) -> &Expr {
        &self.field.expr
    }

    pub fn describe(&self) -> String {
        format!("{} n={} L={}", self.family, self.n, self.field.expr)
    }

    /// `e^{σ(x)} L`, sharing this structure's domain.
    pub fn conformal(&self, sigma: &Expr) -> Self {
        let expr = Expr::Mul(Box::new(Expr::Call(Func::Exp, Box::new(sigma.clone()))), Box::new(self.field.expr.clone()));
        Self::from_expr(self.n, Family::Expression, expr, self.domain.clone())
    }

    /// Deterministic admissible points: `x ∈ [-1,1]ⁿ`, `0.5 ≤ |y| ≤ 2`,
    /// rejection-sampled against the cone.
    pub fn sample_points(&self, count: usize, seed: u64) -> Result<Vec<Point>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut out = Vec::with_capacity(count);
        let mut tried = 0usize;
        while out.len() < count {
            tried += 1;
            if tried >= 100 && out.len() * 100 < tried {
                return Err(FinslerError::ConeTooThin { accepted: out.len(), tried });
            }
            let x: Vec<f64> = (0..self.n).map(|_| rng.gen_range(-1.0..=1.0)).collect();
            let dir: Vec<f64> = (0..self.n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            let norm = dir.iter().map(|v| v * v).sum::<f64>().sqrt();
            let radius = rng.gen_range(0.5..=2.0);
            if norm < 1e-12 {
                continue;
            }
            let y: Vec<f64> = dir.iter().map(|v| v / norm * radius).collect();
            if !self.domain.contains(&y) {
                continue;
            }
            out.push(Point { x, y });
        }
        Ok(out)
    }
}

impl ScalarField for FinslerStructure {
    fn dim(&self) -> usize {
        self.n
    }

    fn eval_f64(&self, vars: &[f64]) -> Result<f64> {
        self.field.eval_f64(vars)
    }

    fn eval_jet(&self, vars: &[Jet]) -> Result<Jet> {
        self.field.eval_jet(vars)
    }

    fn check_domain(&self, p: &Point) -> Result<()> {
        if p.dim() != self.n {
            return Err(FinslerError::Domain(format!("point has dimension {}, structure has {}", p.dim(), self.n)));
        }
        if !self.domain.contains(&p.y) {
            return Err(FinslerError::Domain(format!("y = {:?} outside the admissible cone", p.y)));
        }
        Ok(())
    }
}

fn literal(v: &Value, what: &str) -> Result<String> {
    match v {
        Value::Number(num) => {
            let f = num.as_f64().ok_or_else(|| FinslerError::Schema(format!("{what}: not a finite number")))?;
            Ok(format!("({f:?})"))
        }
        Value::String(s) => Ok(format!("({s})")),
        _ => Err(FinslerError::Schema(format!("{what}: expected a number or expression string"))),
    }
}

fn vector_param(params: &serde_json::Map<String, Value>, key: &str, n: usize) -> Result<Option<Vec<String>>> {
    let Some(v) = params.get(key) else { return Ok(None) };
    let arr = v.as_array().ok_or_else(|| FinslerError::Schema(format!("params.{key} must be an array")))?;
    if arr.len() != n {
        return Err(FinslerError::Schema(format!("params.{key} must have {n} entries, found {}", arr.len())));
    }
    arr.iter()
        .enumerate()
        .map(|(i, e)| literal(e, &format!("params.{key}[{i}]")))
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn matrix_param(params: &serde_json::Map<String, Value>, key: &str, n: usize) -> Result<Option<Vec<Vec<String>>>> {
    let Some(v) = params.get(key) else { return Ok(None) };
    let rows = v.as_array().ok_or_else(|| FinslerError::Schema(format!("params.{key} must be an array of rows")))?;
    if rows.len() != n {
        return Err(FinslerError::Schema(format!("params.{key} must have {n} rows")));
    }
    rows.iter()
        .enumerate()
        .map(|(i, row)| {
            let row = row
                .as_array()
                .filter(|r| r.len() == n)
                .ok_or_else(|| FinslerError::Schema(format!("params.{key}[{i}] must have {n} entries")))?;
            row.iter()
                .enumerate()
                .map(|(j, e)| literal(e, &format!("params.{key}[{i}][{j}]")))
                .collect()
        })
        .collect::<Result<Vec<_>>>()
        .map(Some)
}

fn check_keys(params: &serde_json::Map<String, Value>, allowed: &[&str], family: Family) -> Result<()> {
    for k in params.keys() {
        if !allowed.contains(&k.as_str()) {
            return Err(FinslerError::Schema(format!("unknown parameter `{k}` for family {family}")));
        }
    }
    Ok(())
}

/// `Σ aᵢⱼ yⁱ yʲ`, Euclidean when `a` is absent.
fn quadratic_form(a: Option<&Vec<Vec<String>>>, n: usize) -> String {
    let mut terms = Vec::new();
    match a {
        None => {
            for i in 1..=n {
                terms.push(format!("y{i}^2"));
            }
        }
        Some(a) => {
            for i in 0..n {
                for j in 0..n {
                    if a[i][j] != "(0.0)" {
                        terms.push(format!("{}*y{}*y{}", a[i][j], i + 1, j + 1));
                    }
                }
            }
        }
    }
    terms.join(" + ")
}

fn linear_form(b: &[String]) -> String {
    b.iter()
        .enumerate()
        .map(|(i, c)| format!("{c}*y{}", i + 1))
        .collect::<Vec<_>>()
        .join(" + ")
}

/// Compiles a specification document into an executable structure.
pub fn parse_metric(spec: &MetricSpec) -> Result<FinslerStructure> {
    let n = spec.n;
    if n < 2 {
        return Err(FinslerError::Schema("n must be at least 2".into()));
    }
    if spec.lagrangian.is_some() && spec.family != Family::Expression {
        return Err(FinslerError::Schema("field `L` is only allowed for family `expression`".into()));
    }
    let p = &spec.params;
    let (source, default_domain) = match spec.family {
        Family::Euclidean => {
            check_keys(p, &[], spec.family)?;
            (format!("sqrt({})", quadratic_form(None, n)), Domain::All)
        }
        Family::Riemannian => {
            check_keys(p, &["a", "diag"], spec.family)?;
            let a = match (matrix_param(p, "a", n)?, vector_param(p, "diag", n)?) {
                (Some(a), None) => a,
                (None, Some(d)) => (0..n)
                    .map(|i| (0..n).map(|j| if i == j { d[i].clone() } else { "(0.0)".into() }).collect())
                    .collect(),
                _ => return Err(FinslerError::Schema("riemannian needs exactly one of params.a, params.diag".into())),
            };
            (format!("sqrt({})", quadratic_form(Some(&a), n)), Domain::All)
        }
        Family::Randers => {
            check_keys(p, &["a", "b"], spec.family)?;
            let b = vector_param(p, "b", n)?.ok_or_else(|| FinslerError::Schema("randers needs params.b".into()))?;
            let a = matrix_param(p, "a", n)?;
            (format!("sqrt({}) + {}", quadratic_form(a.as_ref(), n), linear_form(&b)), Domain::All)
        }
        Family::Kropina => {
            check_keys(p, &["a", "b"], spec.family)?;
            let braw = p.get("b").and_then(Value::as_array).cloned().unwrap_or_default();
            let b = vector_param(p, "b", n)?.ok_or_else(|| FinslerError::Schema("kropina needs params.b".into()))?;
            let a = matrix_param(p, "a", n)?;
            let normal: Vec<f64> = braw.iter().map(|v| v.as_f64().unwrap_or(0.0)).collect();
            (
                format!("({}) / ({})", quadratic_form(a.as_ref(), n), linear_form(&b)),
                Domain::Halfspace { normal, margin: 0.1 },
            )
        }
        Family::Quartic => {
            check_keys(p, &[], spec.family)?;
            let s = (1..=n).map(|i| format!("y{i}^4")).collect::<Vec<_>>().join(" + ");
            (format!("({s})^(1/4)"), Domain::OffAxes { margin: 0.25 })
        }
        Family::Expression => {
            check_keys(p, &[], spec.family)?;
            let l = spec
                .lagrangian
                .clone()
                .ok_or_else(|| FinslerError::Schema("expression family needs field `L`".into()))?;
            (l, Domain::All)
        }
    };
    let expr = Expr::parse(&source, n)?;
    let mut structure = FinslerStructure::from_expr(n, spec.family, expr, spec.domain.clone().unwrap_or(default_domain));
    structure.params = spec.params.clone();
    if let Domain::Halfspace { normal, .. } = &structure.domain {
        if normal.len() != n {
            return Err(FinslerError::Schema(format!("domain normal must have {n} entries")));
        }
    }
    validate_euler(&structure)?;
    Ok(structure)
}

/// Parses a JSON metric document.
pub fn parse_metric_json(text: &str) -> Result<FinslerStructure> {
    let spec: MetricSpec = serde_json::from_str(text).map_err(|e| FinslerError::Schema(e.to_string()))?;
    parse_metric(&spec)
}

/// Euler relation `yⁱ ∂L/∂yⁱ = L` and positivity at deterministic probes.
fn validate_euler(f: &FinslerStructure) -> Result<()> {
    let probes = f.sample_points(8, 0x5eed)?;
    for p in &probes {
        let vars = coordinate_jets(p, 1)?;
        let l = f.eval_jet(&vars)?;
        let lv = l.value();
        if !lv.is_finite() || lv <= 0.0 {
            return Err(FinslerError::Validation(format!("L = {lv} at {p:?} is not positive")));
        }
        let euler: f64 = (0..f.n).map(|i| p.y[i] * l.diff(f.n + i).value()).sum();
        let r = (euler - lv).abs() / (1.0 + lv.abs());
        if !(r <= 1e-9) {
            return Err(FinslerError::Validation(format!(
                "Euler relation violated at {p:?}: y·∂L/∂y = {euler}, L = {lv}"
            )));
        }
    }
    Ok(())
}

/// Jet-level metric quantities at a point.
#[derive(Debug, Clone)]
pub struct MetricJets {
    pub n: usize,
    pub vars: Vec<Jet>,
    pub l: Jet,
    /// `L²`
    pub l2: Jet,
    pub g: JetTensor,
    pub g_inv: JetTensor,
    /// Lowered Cartan tensor `Cᵢⱼₖ`.
    pub c_low: JetTensor,
    /// Mixed Cartan tensor `Tⁱⱼₖ`.
    pub t: JetTensor,
    /// Fiber coordinates `yⁱ` as jets.
    pub y: Vec<Jet>,
}

impl MetricJets {
    pub fn compute(f: &FinslerStructure, p: &Point, order: usize) -> Result<Self> {
        f.check_domain(p)?;
        assert!(order >= 3, "metric jets need order >= 3");
        let n = f.n;
        let vars = coordinate_jets(p, order)?;
        let l = f.eval_jet(&vars)?;
        if !(l.value() > 0.0) {
            return Err(FinslerError::Domain(format!("L = {} is not positive", l.value())));
        }
        let l2 = &l * &l;
        let dy: Vec<Jet> = (0..n).map(|i| l2.diff(n + i)).collect();
        let g = JetTensor::from_fn(n, 2, |ix| dy[ix[0]].diff(n + ix[1]).scale(0.5));
        let g_inv = invert(&g)?;
        let c_low = JetTensor::from_fn(n, 3, |ix| g.at(&[ix[0], ix[1]]).diff(n + ix[2]).scale(0.5));
        let t = JetTensor::from_fn(n, 3, |ix| {
            jet_sum((0..n).map(|m| g_inv.at(&[ix[0], m]) * c_low.at(&[m, ix[1], ix[2]]))).unwrap()
        });
        let y = vars[n..].to_vec();
        Ok(Self { n, vars, l, l2, g, g_inv, c_low, t, y })
    }

    pub fn zero(&self) -> Jet {
        self.vars[0].constant_like(0.0)
    }

    /// `yᵢ = gᵢⱼ yʲ`
    pub fn y_low(&self) -> Vec<Jet> {
        (0..self.n)
            .map(|i| jet_sum((0..self.n).map(|j| self.g.at(&[i, j]) * &self.y[j])).unwrap())
            .collect()
    }
}

/// Gauss-Jordan inversion of a jet matrix with pivoting on values.
pub fn invert(m: &JetTensor) -> Result<JetTensor> {
    let n = m.n();
    let mut a: Vec<Vec<Jet>> = (0..n).map(|i| (0..n).map(|j| m.at(&[i, j]).clone()).collect()).collect();
    let zero = m.at(&[0, 0]).constant_like(0.0);
    let mut inv: Vec<Vec<Jet>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { zero.add_scalar(1.0) } else { zero.clone() }).collect())
        .collect();
    let scale = a.iter().flatten().map(|j| j.value().abs()).fold(0.0, f64::max);
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r][col].value().abs().total_cmp(&a[s][col].value().abs()))
            .unwrap();
        if !(a[piv][col].value().abs() > 1e-13 * scale.max(1e-300)) {
            return Err(FinslerError::SingularMetric);
        }
        a.swap(col, piv);
        inv.swap(col, piv);
        let r = a[col][col].recip();
        for j in 0..n {
            a[col][j] = &a[col][j] * &r;
            inv[col][j] = &inv[col][j] * &r;
        }
        for row in 0..n {
            if row == col {
                continue;
            }
            let factor = a[row][col].clone();
            for j in 0..n {
                a[row][j] = &a[row][j] - &(&factor * &a[col][j]);
                inv[row][j] = &inv[row][j] - &(&factor * &inv[col][j]);
            }
        }
    }
    Ok(JetTensor::from_fn(n, 2, |ix| inv[ix[0]][ix[1]].clone()))
}

/// Pointwise metric quantities.
#[derive(Debug, Clone)]
pub struct MetricAtPoint {
    pub l: f64,
    pub g: Array2<f64>,
    pub g_inv: Array2<f64>,
    /// `ℓᵢ = L⁻¹ gᵢⱼ yʲ`
    pub ell: Array1<f64>,
    /// Angular metric `ħᵢⱼ = gᵢⱼ − ℓᵢℓⱼ`.
    pub hbar: Array2<f64>,
    /// Lowered Cartan tensor `Cᵢⱼₖ`.
    pub c3: Array3<f64>,
    /// `Tⁱⱼₖ = gⁱˡ Cₗⱼₖ`
    pub t_mixed: Array3<f64>,
    /// Contracted torsion `Cᵢ = gʲᵏ Cᵢⱼₖ`.
    pub c1: Array1<f64>,
    /// `C̄ⁱ = gⁱʲ Cⱼ`
    pub cvec: Array1<f64>,
    /// `C² = Cᵢ C̄ⁱ`
    pub c2norm: f64,
}

impl MetricAtPoint {
    pub fn from_jets(m: &MetricJets) -> Self {
        let n = m.n;
        let g = Array2::from_shape_fn((n, n), |(i, j)| m.g.at(&[i, j]).value());
        let g_inv = Array2::from_shape_fn((n, n), |(i, j)| m.g_inv.at(&[i, j]).value());
        let l = m.l.value();
        let y: Vec<f64> = m.y.iter().map(Jet::value).collect();
        let ell = Array1::from_shape_fn(n, |i| (0..n).map(|j| g[[i, j]] * y[j]).sum::<f64>() / l);
        let hbar = Array2::from_shape_fn((n, n), |(i, j)| g[[i, j]] - ell[i] * ell[j]);
        let c3 = Array3::from_shape_fn((n, n, n), |(i, j, k)| m.c_low.at(&[i, j, k]).value());
        let t_mixed = Array3::from_shape_fn((n, n, n), |(i, j, k)| m.t.at(&[i, j, k]).value());
        let c1 = Array1::from_shape_fn(n, |i| {
            (0..n).flat_map(|j| (0..n).map(move |k| (j, k))).map(|(j, k)| g_inv[[j, k]] * c3[[i, j, k]]).sum()
        });
        let cvec = Array1::from_shape_fn(n, |i| (0..n).map(|j| g_inv[[i, j]] * c1[j]).sum());
        let c2norm = c1.dot(&cvec);
        Self { l, g, g_inv, ell, hbar, c3, t_mixed, c1, cvec, c2norm }
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let n = self.g.nrows();
        let m = DMatrix::from_fn(n, n, |i, j| self.g[[i, j]]);
        SymmetricEigen::new(m).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// All metric quantities at `p`.
pub fn metric_at(f: &FinslerStructure, p: &Point) -> Result<MetricAtPoint> {
    let jets = MetricJets::compute(f, p, 3)?;
    let m = MetricAtPoint::from_jets(&jets);
    let min_eig = m.min_eigenvalue();
    if !(min_eig > 0.0) {
        return Err(FinslerError::Convexity { min_eigenvalue: min_eig });
    }
    Ok(m)
}

#[derive(Debug, Clone, Serialize)]
pub struct ConvexityReport {
    pub samples: usize,
    pub min_eigenvalue: f64,
    pub worst_point: Option<(Vec<f64>, Vec<f64>)>,
    pub pass: bool,
}

/// Minimum eigenvalue of `g` over the samples; a non-positive `L` counts as
/// a failure with eigenvalue `-inf`.
pub fn strong_convexity_check(f: &FinslerStructure, samples: &[Point]) -> ConvexityReport {
    let mut min_eig = f64::INFINITY;
    let mut worst = None;
    for p in samples {
        let eig = match MetricJets::compute(f, p, 3) {
            Ok(j) => MetricAtPoint::from_jets(&j).min_eigenvalue(),
            Err(FinslerError::SingularMetric) => 0.0,
            Err(_) => f64::NEG_INFINITY,
        };
        if eig < min_eig || worst.is_none() {
            min_eig = min_eig.min(eig);
            worst = Some((p.x.clone(), p.y.clone()));
        }
    }
    ConvexityReport { samples: samples.len(), min_eigenvalue: min_eig, worst_point: worst, pass: min_eig > 0.0 }
}
