//! Residual-based membership tests for special Finsler spaces.
//!
//! Every predicate evaluates `lhs − rhs` of its defining relation at each
//! sample after fitting whatever scalar or form the definition quantifies
//! over. Fits are per sample and linear.

mod context;
mod fit;
mod hypothesis;
mod predicates;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use context::ClassifyPoint;
pub use fit::{fit_recurrence, fit_scalar, least_squares};
pub use hypothesis::{check_hypotheses, check_hypothesis, Hypothesis, Proposition, PROPOSITIONS};

use crate::error::{FinslerError, Result};
use crate::jets::Point;
use crate::metric::FinslerStructure;

/// Tolerance for relations whose right side is identically zero.
pub const STRUCTURAL_TOL: f64 = 1e-10;
/// Tolerance for relations with fitted auxiliaries.
pub const FITTED_TOL: f64 = 1e-7;

macro_rules! predicates {
    ($($variant:ident => $name:literal, floor $floor:literal, $kind:ident;)*) => {
        #[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
        pub enum Predicate { $($variant,)* }

        impl Predicate {
            pub const ALL: &'static [Predicate] = &[$(Predicate::$variant,)*];

            pub fn as_str(self) -> &'static str {
                match self { $(Predicate::$variant => $name,)* }
            }

            /// Smallest dimension for which the definition is stated.
            pub fn floor(self) -> usize {
                match self { $(Predicate::$variant => $floor,)* }
            }

            pub fn default_tol(self) -> f64 {
                match self { $(Predicate::$variant => tol_of!($kind),)* }
            }
        }
    };
}

macro_rules! tol_of {
    (structural) => {
        STRUCTURAL_TOL
    };
    (fitted) => {
        FITTED_TOL
    };
}

predicates! {
    Riemannian => "riemannian", floor 2, structural;
    LocallyMinkowskian => "locally-minkowskian", floor 2, structural;
    Berwald => "berwald", floor 2, structural;
    ChRecurrent => "ch-recurrent", floor 2, fitted;
    PStar => "p-star", floor 2, fitted;
    CvRecurrent => "cv-recurrent", floor 2, fitted;
    C0Recurrent => "c0-recurrent", floor 2, fitted;
    SemiCReducible => "semi-c-reducible", floor 3, fitted;
    CReducible => "c-reducible", floor 3, fitted;
    C2Like => "c2-like", floor 2, fitted;
    QuasiCReducible => "quasi-c-reducible", floor 3, fitted;
    S3Like => "s3-like", floor 4, fitted;
    S4Like => "s4-like", floor 5, fitted;
    SvRecurrent => "sv-recurrent", floor 2, fitted;
    Landsberg => "landsberg", floor 2, structural;
    GeneralLandsberg => "general-landsberg", floor 2, structural;
    PSymmetric => "p-symmetric", floor 2, structural;
    P2Like => "p2-like", floor 3, fitted;
    PReducible => "p-reducible", floor 3, fitted;
    HIsotropic => "h-isotropic", floor 3, fitted;
    ScalarCurvature => "scalar-curvature", floor 3, fitted;
    ConstantCurvature => "constant-curvature", floor 3, fitted;
    R3Like => "r3-like", floor 4, fitted;
    PScalarCurvature => "p-scalar-curvature", floor 3, fitted;
    SPsCurvature => "s-ps-curvature", floor 3, fitted;
    Symmetric => "symmetric", floor 2, structural;
}

impl Predicate {
    /// Predicates whose verdict is unchanged by any conformal change.
    pub const UNCONDITIONAL: [Predicate; 10] = [
        Predicate::Riemannian,
        Predicate::SemiCReducible,
        Predicate::CReducible,
        Predicate::C2Like,
        Predicate::QuasiCReducible,
        Predicate::CvRecurrent,
        Predicate::C0Recurrent,
        Predicate::SvRecurrent,
        Predicate::S3Like,
        Predicate::S4Like,
    ];

    /// Whether the evaluation needs sixth derivatives of `L²`.
    pub fn needs_order_six(self) -> bool {
        self == Predicate::Symmetric
    }
}

impl fmt::Display for Predicate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Predicate {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        Predicate::ALL
            .iter()
            .copied()
            .find(|p| p.as_str() == s)
            .ok_or_else(|| FinslerError::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Holds,
    Fails,
    Inapplicable,
}

impl fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VerdictStatus::Holds => "holds",
            VerdictStatus::Fails => "fails",
            VerdictStatus::Inapplicable => "inapplicable",
        })
    }
}

/// Outcome at one sample: `None` marks a definitional gap (e.g. `C² = 0`).
#[derive(Debug, Clone, Serialize)]
pub struct SampleResult {
    pub residual: Option<f64>,
    pub fitted: BTreeMap<String, Vec<f64>>,
}

impl SampleResult {
    pub fn inapplicable() -> Self {
        Self { residual: None, fitted: BTreeMap::new() }
    }

    pub fn plain(residual: f64) -> Self {
        Self { residual: Some(residual), fitted: BTreeMap::new() }
    }

    pub fn with(mut self, name: &str, values: Vec<f64>) -> Self {
        self.fitted.insert(name.to_string(), values);
        self
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub predicate: String,
    pub status: VerdictStatus,
    pub tolerance: f64,
    pub max_residual: Option<f64>,
    pub worst_sample: Option<usize>,
    pub samples: Vec<SampleResult>,
    pub note: Option<String>,
}

impl Verdict {
    fn from_samples(name: &str, samples: Vec<SampleResult>, tol: f64) -> Self {
        let mut worst: Option<(f64, usize)> = None;
        for (i, s) in samples.iter().enumerate() {
            if let Some(r) = s.residual {
                let r = if r.is_nan() { f64::INFINITY } else { r };
                if worst.is_none_or(|(w, _)| r > w) {
                    worst = Some((r, i));
                }
            }
        }
        let status = match worst {
            None => VerdictStatus::Inapplicable,
            Some((r, _)) if r <= tol => VerdictStatus::Holds,
            Some(_) => VerdictStatus::Fails,
        };
        let note = (status == VerdictStatus::Inapplicable).then(|| "inapplicable at every sample".to_string());
        Self {
            predicate: name.to_string(),
            status,
            tolerance: tol,
            max_residual: worst.map(|w| w.0),
            worst_sample: worst.map(|w| w.1),
            samples,
            note,
        }
    }

    fn below_floor(name: &str, n: usize, floor: usize, tol: f64) -> Self {
        Self {
            predicate: name.to_string(),
            status: VerdictStatus::Inapplicable,
            tolerance: tol,
            max_residual: None,
            worst_sample: None,
            samples: Vec::new(),
            note: Some(format!("defined for n >= {floor}, structure has n = {n}")),
        }
    }

    /// Same verdict re-judged at another tolerance.
    pub fn holds_at(&self, tol: f64) -> bool {
        self.max_residual.is_some_and(|r| r <= tol)
    }
}

/// Evaluates several predicates sharing one set of per-sample contexts.
/// `tol` overrides every predicate's default when given.
pub fn classify_all(
    f: &FinslerStructure,
    predicates: &[Predicate],
    samples: &[Point],
    tol: Option<f64>,
) -> Result<Vec<Verdict>> {
    let active: Vec<Predicate> = predicates.iter().copied().filter(|p| f.n >= p.floor()).collect();
    let need6 = active.iter().any(|p| p.needs_order_six());
    let per_sample: Vec<Vec<SampleResult>> = samples
        .par_iter()
        .map(|p| {
            let ctx = ClassifyPoint::compute(f, p, need6)?;
            active.iter().map(|&pred| predicates::evaluate(pred, &ctx)).collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    let mut out = Vec::with_capacity(predicates.len());
    for &pred in predicates {
        let t = tol.unwrap_or(pred.default_tol());
        match active.iter().position(|&a| a == pred) {
            None => out.push(Verdict::below_floor(pred.as_str(), f.n, pred.floor(), t)),
            Some(k) => {
                let mut results: Vec<SampleResult> = per_sample.iter().map(|s| s[k].clone()).collect();
                if pred == Predicate::ConstantCurvature {
                    predicates::constant_curvature_spread(&mut results);
                }
                out.push(Verdict::from_samples(pred.as_str(), results, t));
            }
        }
    }
    Ok(out)
}

pub fn classify(f: &FinslerStructure, predicate: Predicate, samples: &[Point], tol: Option<f64>) -> Result<Verdict> {
    Ok(classify_all(f, &[predicate], samples, tol)?.remove(0))
}

#[cfg(test)]
mod tests;
