//! Two-sided checks of the transformation theorems.
//!
//! The left side of every relation is computed on the lifted structure
//! alone; the right side uses base quantities plus deformation fields.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use ndarray::{ArrayD, IxDyn};
use rayon::prelude::*;
use serde::Serialize;

use super::fields::{curvature_deformation, CurvatureDeformation, DeformationFields, DeformationJets};
use super::{ConformalChange, ConformalPoint};
use crate::connection::{ConnectionKind, Direction, LocalGeometry};
use crate::curvature::{curvature_jets, CurvatureMethod, CurvaturePack};
use crate::error::{FinslerError, Result};
use crate::jets::{Jet, Point};
use crate::report::{Status, Worst};
use crate::tensor::{array_from_fn, max_abs, rel_residual, Slot};

/// Jet order used for every two-sided check; the Berwald curvature
/// deformation needs five derivatives of `L²`.
pub const VERIFY_ORDER: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum TheoremId {
    CartanChange,
    CartanCurvatures,
    BarthelChange,
    BerwaldChange,
    BerwaldCurvatures,
    ChernChange,
    ChernCurvatures,
    HashiguchiChange,
    HashiguchiCurvatures,
    NablaTChange,
    LandsbergCriterion,
}

impl TheoremId {
    pub const ALL: [TheoremId; 11] = [
        TheoremId::CartanChange,
        TheoremId::CartanCurvatures,
        TheoremId::BarthelChange,
        TheoremId::BerwaldChange,
        TheoremId::BerwaldCurvatures,
        TheoremId::ChernChange,
        TheoremId::ChernCurvatures,
        TheoremId::HashiguchiChange,
        TheoremId::HashiguchiCurvatures,
        TheoremId::NablaTChange,
        TheoremId::LandsbergCriterion,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            TheoremId::CartanChange => "cartan-change",
            TheoremId::CartanCurvatures => "cartan-curvatures",
            TheoremId::BarthelChange => "barthel-change",
            TheoremId::BerwaldChange => "berwald-change",
            TheoremId::BerwaldCurvatures => "berwald-curvatures",
            TheoremId::ChernChange => "chern-change",
            TheoremId::ChernCurvatures => "chern-curvatures",
            TheoremId::HashiguchiChange => "hashiguchi-change",
            TheoremId::HashiguchiCurvatures => "hashiguchi-curvatures",
            TheoremId::NablaTChange => "nablaT-change",
            TheoremId::LandsbergCriterion => "landsberg-criterion",
        }
    }

    /// Acceptance tolerance: first-order relations are held to `1e-8`,
    /// curvature relations to `1e-7`.
    pub fn default_tol(self) -> f64 {
        match self {
            TheoremId::CartanChange | TheoremId::BarthelChange | TheoremId::NablaTChange | TheoremId::LandsbergCriterion => 1e-8,
            _ => 1e-7,
        }
    }

    fn kind(self) -> Option<ConnectionKind> {
        match self {
            TheoremId::CartanChange | TheoremId::CartanCurvatures => Some(ConnectionKind::Cartan),
            TheoremId::BerwaldChange | TheoremId::BerwaldCurvatures => Some(ConnectionKind::Berwald),
            TheoremId::ChernChange | TheoremId::ChernCurvatures => Some(ConnectionKind::Chern),
            TheoremId::HashiguchiChange | TheoremId::HashiguchiCurvatures => Some(ConnectionKind::Hashiguchi),
            _ => None,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| FinslerError::UnknownId(s.to_string()))
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct TheoremReport {
    pub id: String,
    pub status: Status,
    pub tolerance: f64,
    pub max_residual: f64,
    pub worst_sample: Option<usize>,
    /// Max residual of each checked relation.
    pub parts: BTreeMap<String, f64>,
    pub samples: usize,
    pub errors: Vec<(usize, String)>,
}

/// Everything a theorem check may need at one sample.
pub struct SampleContext {
    pub cp: ConformalPoint,
    pub dj: DeformationJets,
    pub lifted: LocalGeometry,
}

impl SampleContext {
    pub fn compute(cc: &ConformalChange, p: &Point) -> Result<Self> {
        crate::jets::ScalarField::check_domain(&cc.lifted, p)?;
        let cp = ConformalPoint::compute(cc, p, VERIFY_ORDER)?;
        let dj = DeformationJets::compute(&cp);
        let lifted = LocalGeometry::compute(&cc.lifted, p, VERIFY_ORDER)?;
        Ok(Self { cp, dj, lifted })
    }

    fn pack(&self, geom: &LocalGeometry, kind: ConnectionKind) -> CurvaturePack {
        let c = geom.connection(kind);
        CurvaturePack::from_jets(kind, &curvature_jets(geom, &c, CurvatureMethod::Index))
    }

    fn deformation(&self, kind: ConnectionKind, pack: &CurvaturePack) -> CurvatureDeformation {
        curvature_deformation(&self.cp, &self.dj, &self.cp.base.connection(kind), pack)
    }

    pub fn fields(&self) -> DeformationFields {
        let pack = self.pack(&self.cp.base, ConnectionKind::Cartan);
        DeformationFields::from_parts(&self.cp, &self.dj, &self.deformation(ConnectionKind::Cartan, &pack))
    }
}

/// All deformation fields at `p`.
pub fn deformation_fields(cc: &ConformalChange, p: &Point) -> Result<DeformationFields> {
    Ok(SampleContext::compute(cc, p)?.fields())
}

fn values2(t: &crate::tensor::JetTensor) -> ArrayD<f64> {
    t.values()
}

fn check(id: TheoremId, ctx: &SampleContext) -> Vec<(&'static str, f64)> {
    let base = &ctx.cp.base;
    let lifted = &ctx.lifted;
    let n = base.n();
    let l = ctx.cp.ltensor.values();
    let y: Vec<f64> = base.metric.y.iter().map(Jet::value).collect();
    let at = |a: &ArrayD<f64>, ix: &[usize]| a[IxDyn(ix)];
    match id {
        TheoremId::BarthelChange => {
            let lhs = values2(&lifted.nl);
            let nb = values2(&base.nl);
            let rhs = array_from_fn(n, 2, |ix| at(&nb, ix) + at(&l, ix));
            // 𝓛ⁱⱼyʲ = 2(G̃ⁱ − Gⁱ)
            let ly = array_from_fn(n, 1, |ix| (0..n).map(|j| at(&l, &[ix[0], j]) * y[j]).sum());
            let dg = array_from_fn(n, 1, |ix| 2.0 * (lifted.spray[ix[0]].value() - base.spray[ix[0]].value()));
            let f = ctx.fields();
            vec![
                ("n-tilde", rel_residual(&lhs, &rhs)),
                ("l-eta", rel_residual(&ly, &dg)),
                ("n-map", rel_residual(&f.n_map.into_dyn(), &l)),
            ]
        }
        TheoremId::CartanChange | TheoremId::BerwaldChange | TheoremId::ChernChange | TheoremId::HashiguchiChange => {
            let kind = id.kind().unwrap();
            let (cb, cl) = (base.connection(kind), lifted.connection(kind));
            let (hb, vb, hl, vl) = (cb.h.values(), cb.v.values(), cl.h.values(), cl.v.values());
            let nb = values2(&base.nl);
            let nl = values2(&lifted.nl);
            let b = ctx.dj.b_for(kind).values();
            // D̃_{∂/∂xᵏ} eⱼ against D_{∂/∂xᵏ} eⱼ + B(eₖ, eⱼ)
            let lhs_x = array_from_fn(n, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                at(&hl, ix) + (0..n).map(|m| at(&nl, &[m, k]) * at(&vl, &[i, j, m])).sum::<f64>()
            });
            let rhs_x = array_from_fn(n, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                at(&hb, ix) + (0..n).map(|m| at(&nb, &[m, k]) * at(&vb, &[i, j, m])).sum::<f64>() + at(&b, &[i, k, j])
            });
            // relation on β̃-arguments
            let rhs_beta = array_from_fn(n, 3, |ix| {
                let (i, j, k) = (ix[0], ix[1], ix[2]);
                at(&hb, ix) - (0..n).map(|m| at(&l, &[m, k]) * at(&vb, &[i, j, m])).sum::<f64>() + at(&b, &[i, k, j])
            });
            vec![
                ("horizontal", rel_residual(&lhs_x, &rhs_x)),
                ("vertical", rel_residual(&vl, &vb)),
                ("beta-tilde", rel_residual(&hl, &rhs_beta)),
            ]
        }
        TheoremId::CartanCurvatures
        | TheoremId::BerwaldCurvatures
        | TheoremId::ChernCurvatures
        | TheoremId::HashiguchiCurvatures => {
            let kind = id.kind().unwrap();
            let pb = ctx.pack(base, kind);
            let pl = ctx.pack(lifted, kind);
            let d = ctx.deformation(kind, &pb);
            let p_rhs = &pb.p + &d.p_extra;
            let r_rhs = &pb.r + &d.r_extra;
            let mut out = vec![
                ("s", rel_residual(&pl.s, &pb.s)),
                ("p", rel_residual(&pl.p, &p_rhs)),
                ("r", rel_residual(&pl.r, &r_rhs)),
            ];
            if !kind.has_vertical() {
                out.push(("s-zero", max_abs(&pl.s).max(max_abs(&pb.s))));
            }
            out
        }
        TheoremId::NablaTChange => {
            let slots = [Slot::Up, Slot::Down, Slot::Down];
            let cl = lifted.connection(ConnectionKind::Cartan);
            let cb = base.connection(ConnectionKind::Cartan);
            let lhs = cl.cov_deriv(lifted, &lifted.metric.t, &slots, Direction::Horizontal).values();
            let dt = cb.cov_deriv(base, &base.metric.t, &slots, Direction::Horizontal).values();
            let a = ctx.dj.a_tensor.values();
            let rhs = array_from_fn(n, 4, |ix| at(&dt, ix) - at(&a, &[ix[0], ix[3], ix[1], ix[2]]));
            let a_eta = array_from_fn(n, 3, |ix| (0..n).map(|z| at(&a, &[ix[0], ix[1], ix[2], z]) * y[z]).sum());
            vec![("nabla-t", rel_residual(&lhs, &rhs)), ("a-eta", max_abs(&a_eta))]
        }
        TheoremId::LandsbergCriterion => {
            let pb = ctx.pack(base, ConnectionKind::Cartan);
            let pl = ctx.pack(lifted, ConnectionKind::Cartan);
            let hat = |p: &ArrayD<f64>| array_from_fn(n, 3, |ix| (0..n).map(|z| at(p, &[ix[0], z, ix[1], ix[2]]) * y[z]).sum());
            let f = ctx.fields();
            let lhs = hat(&pl.p);
            let rhs = &hat(&pb.p) - &f.iota_a;
            vec![("p-hat", rel_residual(&lhs, &rhs))]
        }
    }
}

/// Runs one theorem over the samples. Per-sample failures are recorded and
/// do not abort the run.
pub fn verify_theorem(id: TheoremId, cc: &ConformalChange, samples: &[Point], tol: f64) -> TheoremReport {
    verify_theorems(&[id], cc, samples, |_| tol).remove(0)
}

/// Several theorems sharing one context per sample.
pub fn verify_theorems(
    ids: &[TheoremId],
    cc: &ConformalChange,
    samples: &[Point],
    tol: impl Fn(TheoremId) -> f64,
) -> Vec<TheoremReport> {
    type Parts = Vec<(&'static str, f64)>;
    let per_sample: Vec<std::result::Result<Vec<Parts>, String>> = samples
        .par_iter()
        .map(|p| {
            SampleContext::compute(cc, p)
                .map(|ctx| ids.iter().map(|&id| check(id, &ctx)).collect())
                .map_err(|e| e.to_string())
        })
        .collect();
    ids.iter()
        .enumerate()
        .map(|(k, &id)| {
            let results = per_sample.iter().map(|r| r.as_ref().map(|v| v[k].clone()).map_err(Clone::clone));
            summarize(id, tol(id), results, samples.len())
        })
        .collect()
}

fn summarize(
    id: TheoremId,
    tol: f64,
    results: impl Iterator<Item = std::result::Result<Vec<(&'static str, f64)>, String>>,
    samples: usize,
) -> TheoremReport {
    let mut worst = Worst::default();
    let mut parts: BTreeMap<String, f64> = BTreeMap::new();
    let mut errors = Vec::new();
    for (s, r) in results.enumerate() {
        match r {
            Ok(list) => {
                for (name, v) in list {
                    let v = if v.is_nan() { f64::INFINITY } else { v };
                    let e = parts.entry(name.to_string()).or_insert(0.0);
                    *e = e.max(v);
                    worst.update(v, s);
                }
            }
            Err(e) => errors.push((s, e)),
        }
    }
    let status = if worst.sample.is_none() {
        Status::Error
    } else if worst.residual <= tol && errors.is_empty() {
        Status::Pass
    } else if worst.residual <= tol {
        Status::Error
    } else {
        Status::Fail
    };
    TheoremReport {
        id: id.as_str().to_string(),
        status,
        tolerance: tol,
        max_residual: worst.residual,
        worst_sample: worst.sample,
        parts,
        samples,
        errors,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::lift;
    use crate::metric::FinslerStructure;

    fn run(base: &FinslerStructure, sigma: &str, count: usize) -> Vec<TheoremReport> {
        let cc = lift(base, sigma).unwrap();
        let pts = base.sample_points(count, 11).unwrap();
        TheoremId::ALL.iter().map(|&id| verify_theorem(id, &cc, &pts, 1e-7)).collect()
    }

    #[test]
    fn every_theorem_on_randers() {
        let base = FinslerStructure::randers(&[0.5, 0.0]).unwrap();
        for r in run(&base, "0.1*x1 + 0.05*x2", 3) {
            assert_eq!(r.status, Status::Pass, "{} {:?}", r.id, r.parts);
        }
    }

    #[test]
    fn every_theorem_on_randers_3d() {
        let base = FinslerStructure::randers(&[0.2, -0.1, 0.3]).unwrap();
        for r in run(&base, "0.1*x1 + 0.05*x2", 2) {
            assert_eq!(r.status, Status::Pass, "{} {:?}", r.id, r.parts);
        }
    }

    #[test]
    fn unknown_theorem_id() {
        assert!(matches!("pythagoras".parse::<TheoremId>(), Err(FinslerError::UnknownId(_))));
    }
}
