use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;

use super::{Predicate, SampleResult, Verdict};
use crate::conformal::{ConformalChange, SampleContext};
use crate::connection::{ConnectionKind, Direction};
use crate::error::{FinslerError, Result};
use crate::jets::Point;
use crate::tensor::{array_from_fn, max_abs, Slot};

/// Side conditions under which a property transfers across a conformal change.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hypothesis {
    AVanishes,
    IotaAVanishes,
    A0Vanishes,
    HEtaVanishes,
    MinkowskiHyp,
    Homothety,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 6] = [
        Hypothesis::AVanishes,
        Hypothesis::IotaAVanishes,
        Hypothesis::A0Vanishes,
        Hypothesis::HEtaVanishes,
        Hypothesis::MinkowskiHyp,
        Hypothesis::Homothety,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Hypothesis::AVanishes => "A-vanishes",
            Hypothesis::IotaAVanishes => "iota-A-vanishes",
            Hypothesis::A0Vanishes => "A0-vanishes",
            Hypothesis::HEtaVanishes => "H-eta-vanishes",
            Hypothesis::MinkowskiHyp => "minkowski-hyp",
            Hypothesis::Homothety => "homothety",
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Hypothesis {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        Hypothesis::ALL.into_iter().find(|h| h.as_str() == s).ok_or_else(|| FinslerError::UnknownId(s.to_string()))
    }
}

/// A transfer statement: under `hypothesis`, each predicate holds for the
/// base iff it holds for the lifted structure.
#[derive(Debug, Clone, Copy)]
pub struct Proposition {
    pub id: &'static str,
    pub predicates: &'static [Predicate],
    pub hypothesis: Option<Hypothesis>,
    /// Skip pairs where `σ` vanishes identically.
    pub needs_nonzero_sigma: bool,
}

const fn prop(id: &'static str, predicates: &'static [Predicate], hypothesis: Option<Hypothesis>) -> Proposition {
    Proposition { id, predicates, hypothesis, needs_nonzero_sigma: false }
}

use Hypothesis as H;
use Predicate as P;

pub const PROPOSITIONS: &[Proposition] = &[
    prop("p.3a", &[P::Riemannian], None),
    prop("p.3b", &[P::LocallyMinkowskian], Some(H::MinkowskiHyp)),
    prop("p.4", &[P::Berwald, P::ChRecurrent], Some(H::AVanishes)),
    prop("p.4-vertical", &[P::CvRecurrent, P::C0Recurrent], None),
    prop("p.5", &[P::PStar], Some(H::IotaAVanishes)),
    prop("p.6", &[P::SemiCReducible, P::CReducible, P::C2Like], None),
    prop("p.7", &[P::QuasiCReducible], None),
    prop("p.8a", &[P::Landsberg], Some(H::IotaAVanishes)),
    prop("p.8b", &[P::GeneralLandsberg], Some(H::A0Vanishes)),
    Proposition {
        id: "p.10",
        predicates: &[P::PReducible],
        hypothesis: Some(H::IotaAVanishes),
        needs_nonzero_sigma: true,
    },
    prop("p.11", &[P::S3Like, P::S4Like], None),
    prop("p.12", &[P::SvRecurrent], None),
    prop("p.14", &[P::ScalarCurvature], Some(H::HEtaVanishes)),
    prop(
        "p.15",
        &[
            P::P2Like,
            P::HIsotropic,
            P::ConstantCurvature,
            P::PScalarCurvature,
            P::SPsCurvature,
            P::R3Like,
            P::Symmetric,
            P::PSymmetric,
        ],
        Some(H::Homothety),
    ),
];

impl Proposition {
    pub fn find(id: &str) -> Result<&'static Proposition> {
        PROPOSITIONS.iter().find(|p| p.id == id).ok_or_else(|| FinslerError::UnknownId(id.to_string()))
    }
}

const UDD: [Slot; 3] = [Slot::Up, Slot::Down, Slot::Down];

fn residuals_at(cc: &ConformalChange, hs: &[Hypothesis], p: &Point) -> Result<Vec<f64>> {
    let needs_fields = hs.iter().any(|&h| h != Hypothesis::Homothety);
    let cp = crate::conformal::ConformalPoint::compute(cc, p, 4)?;
    let homothety = cp.dsigma.iter().map(|d| d.value().abs()).fold(0.0, f64::max);
    let ctx = if needs_fields { Some(SampleContext::compute(cc, p)?) } else { None };
    let f = ctx.as_ref().map(SampleContext::fields);
    let n = p.dim();
    let y = &p.y;
    Ok(hs
        .iter()
        .map(|&h| {
            let (Some(ctx), Some(f)) = (&ctx, &f) else {
                return homothety;
            };
            match h {
                Hypothesis::AVanishes => max_abs(&f.a_tensor),
                Hypothesis::IotaAVanishes => max_abs(&f.iota_a),
                Hypothesis::A0Vanishes => max_abs(&f.a0.clone().into_dyn()),
                Hypothesis::HEtaVanishes => max_abs(&array_from_fn(n, 2, |ix| {
                    let mut s = 0.0;
                    for a in 0..n {
                        for z in 0..n {
                            s += y[a] * y[z] * f.h[[ix[0], z, a, ix[1]]];
                        }
                    }
                    s
                })),
                Hypothesis::MinkowskiHyp => {
                    let geom = &ctx.cp.base;
                    let berwald = geom.connection(ConnectionKind::Berwald);
                    let dvb = berwald.cov_deriv(geom, &ctx.dj.b_berwald, &UDD, Direction::Vertical).values();
                    let h_eta = array_from_fn(n, 3, |ix| (0..n).map(|z| f.h[[ix[0], z, ix[1], ix[2]]] * y[z]).sum());
                    max_abs(&dvb).max(max_abs(&h_eta))
                }
                Hypothesis::Homothety => homothety,
            }
        })
        .collect())
}

/// Evaluates a hypothesis on the deformation fields of `cc`; residuals are
/// absolute since every hypothesis asserts a vanishing field.
pub fn check_hypothesis(cc: &ConformalChange, h: Hypothesis, samples: &[Point], tol: f64) -> Result<Verdict> {
    Ok(check_hypotheses(cc, &[h], samples, tol)?.remove(0))
}

/// Several hypotheses sharing one context per sample.
pub fn check_hypotheses(cc: &ConformalChange, hs: &[Hypothesis], samples: &[Point], tol: f64) -> Result<Vec<Verdict>> {
    let per_sample = samples.par_iter().map(|p| residuals_at(cc, hs, p)).collect::<Result<Vec<_>>>()?;
    Ok(hs
        .iter()
        .enumerate()
        .map(|(k, h)| {
            let results = per_sample.iter().map(|r| SampleResult::plain(r[k])).collect();
            Verdict::from_samples(h.as_str(), results, tol)
        })
        .collect())
}
