//! Conformal changes `L̃ = e^{σ(x)} L` and their deformation fields.
//!
//! The deviation `𝓛 = γ∘N∘ρ` between the two Barthel connections is stored
//! as a matrix `𝓛[i][j]` with `𝓛(∂/∂xʲ) = 𝓛ⁱⱼ ∂/∂yⁱ`; it kills vertical
//! vectors, so `Ñⁱⱼ = Nⁱⱼ + 𝓛ⁱⱼ`.

mod fields;
mod verify;

use ndarray::Array2;
use serde::{Deserialize, Serialize};

pub use fields::{DeformationFields, DeformationJets};
pub use verify::{deformation_fields, verify_theorem, verify_theorems, SampleContext, TheoremId, TheoremReport, VERIFY_ORDER};
pub use fields::{curvature_deformation, CurvatureDeformation};

use crate::connection::LocalGeometry;
use crate::error::{FinslerError, Result};
use crate::expr::Expr;
use crate::jets::{bracket_jets, coordinate_jets, Jet, Point};
use crate::metric::FinslerStructure;
use crate::tensor::{jet_sum, JetTensor};

/// Sign of the Frölicher–Nijenhuis bracket `F = [J, grad_v σ]`.
///
/// `Standard` is `[J,V](X) = [JX, V] − J[X, V]`; `Opposite` negates it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnConvention {
    #[default]
    Standard,
    Opposite,
}

/// A base structure, a position-only factor `σ` and the lifted structure.
#[derive(Debug, Clone)]
pub struct ConformalChange {
    pub base: FinslerStructure,
    pub sigma: Expr,
    pub lifted: FinslerStructure,
    pub convention: FnConvention,
}

/// Builds `L̃ = e^σ L`; `σ` may only reference `x1..xn`.
pub fn lift(base: &FinslerStructure, sigma: &str) -> Result<ConformalChange> {
    let expr = Expr::parse(sigma, base.n)?;
    if expr.references_fiber() {
        return Err(FinslerError::FiberDependence(sigma.to_string()));
    }
    Ok(ConformalChange { base: base.clone(), lifted: base.conformal(&expr), sigma: expr, convention: FnConvention::Standard })
}

impl ConformalChange {
    pub fn with_convention(mut self, convention: FnConvention) -> Self {
        self.convention = convention;
        self
    }

    /// Whether `σ` is constant as an expression (no position dependence).
    pub fn is_homothety(&self) -> bool {
        !self.sigma.references_position()
    }
}

/// Base geometry at a point together with the jets of `σ` and `𝓛`.
#[derive(Debug, Clone)]
pub struct ConformalPoint {
    pub base: LocalGeometry,
    /// `σᵢ = ∂σ/∂xⁱ`
    pub dsigma: Vec<Jet>,
    /// `σⁱ = gⁱʲσⱼ`, the components of `grad_v σ`.
    pub sigma_up: Vec<Jet>,
    /// `σ₁ = d_G σ = yⁱσᵢ`
    pub sigma1: Jet,
    pub ltensor: JetTensor,
}

impl ConformalPoint {
    pub fn compute(cc: &ConformalChange, p: &Point, order: usize) -> Result<Self> {
        let base = LocalGeometry::compute(&cc.base, p, order)?;
        let vars = coordinate_jets(p, order)?;
        let n = base.n();
        let sigma = cc.sigma.eval(&vars);
        let dsigma: Vec<Jet> = (0..n).map(|i| sigma.diff(i)).collect();
        let g_inv = &base.metric.g_inv;
        let sigma_up: Vec<Jet> =
            (0..n).map(|i| jet_sum((0..n).map(|j| g_inv.at(&[i, j]) * &dsigma[j])).unwrap()).collect();
        let sigma1 = jet_sum((0..n).map(|i| &base.metric.y[i] * &dsigma[i])).unwrap();
        let ltensor = intrinsic_l(&base, &dsigma, &sigma_up, &sigma1, cc.convention);
        Ok(Self { base, dsigma, sigma_up, sigma1, ltensor })
    }

    pub fn n(&self) -> usize {
        self.base.n()
    }
}

fn j_map(w: &[Jet], zero: &Jet) -> Vec<Jet> {
    let n = w.len() / 2;
    let mut out = vec![zero.clone(); 2 * n];
    out[n..].clone_from_slice(&w[..n]);
    out
}

/// `𝓛 = dσ⊗𝒞 + σ₁J − d_J E⊗grad_v σ − E F` applied to `∂/∂xʲ`, with
/// `F` from jet Lie brackets.
fn intrinsic_l(geom: &LocalGeometry, dsigma: &[Jet], sigma_up: &[Jet], sigma1: &Jet, conv: FnConvention) -> JetTensor {
    let n = geom.n();
    let zero = geom.zero();
    let e = geom.metric.l2.scale(0.5);
    let mut grad = vec![zero.clone(); n];
    grad.extend(sigma_up.iter().cloned());
    let sign = match conv {
        FnConvention::Standard => 1.0,
        FnConvention::Opposite => -1.0,
    };
    let columns: Vec<Vec<Jet>> = (0..n)
        .map(|j| {
            let one = zero.add_scalar(1.0);
            let mut x = vec![zero.clone(); 2 * n];
            x[j] = one.clone();
            let jx = j_map(&x, &zero);
            let a = bracket_jets(&jx, &grad);
            let b = j_map(&bracket_jets(&x, &grad), &zero);
            // d_J E (∂/∂xʲ) = ∂E/∂yʲ
            let dje = e.diff(n + j);
            (0..n)
                .map(|i| {
                    let f = (&a[n + i] - &b[n + i]).scale(sign);
                    let mut v = &dsigma[j] * &geom.metric.y[i] - &dje * &sigma_up[i] - &e * &f;
                    if i == j {
                        v += sigma1.clone();
                    }
                    v
                })
                .collect()
        })
        .collect();
    JetTensor::from_fn(n, 2, |ix| columns[ix[1]][ix[0]].clone())
}

/// The matrix `𝓛ⁱⱼ` at `p`.
pub fn l_tensor(cc: &ConformalChange, p: &Point) -> Result<Array2<f64>> {
    let cp = ConformalPoint::compute(cc, p, 4)?;
    let n = cp.n();
    Ok(Array2::from_shape_fn((n, n), |(i, j)| cp.ltensor.at(&[i, j]).value()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::spray_at;

    fn barthel_residual(cc: &ConformalChange, p: &Point) -> f64 {
        let l = l_tensor(cc, p).unwrap();
        let a = spray_at(&cc.base, p).unwrap();
        let b = spray_at(&cc.lifted, p).unwrap();
        let n = p.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                worst = worst.max(crate::tensor::rel_diff(b.nl[[i, j]], a.nl[[i, j]] + l[[i, j]]));
            }
        }
        worst
    }

    #[test]
    fn euclidean_linear_sigma_gives_scaled_identity() {
        let cc = lift(&FinslerStructure::euclidean(2), "0.1*x1").unwrap();
        let p = Point::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        let l = l_tensor(&cc, &p).unwrap();
        assert!((l[[0, 0]] - 0.1).abs() < 1e-14 && (l[[1, 1]] - 0.1).abs() < 1e-14);
        assert!(l[[0, 1]].abs() < 1e-14 && l[[1, 0]].abs() < 1e-14);
        assert!(barthel_residual(&cc, &p) < 1e-12);
    }

    #[test]
    fn randers_fixes_the_bracket_sign() {
        let base = FinslerStructure::randers(&[0.5, 0.0]).unwrap();
        let p = Point::new(vec![0.3, -0.2], vec![0.8, 1.1]).unwrap();
        let std = lift(&base, "0.1*x1 + 0.05*x2").unwrap();
        let opp = std.clone().with_convention(FnConvention::Opposite);
        assert!(barthel_residual(&std, &p) < 1e-10);
        assert!(barthel_residual(&opp, &p) > 1e-4);
    }

    #[test]
    fn fiber_dependent_sigma_is_rejected() {
        let base = FinslerStructure::euclidean(2);
        assert!(matches!(lift(&base, "x1*y2"), Err(FinslerError::FiberDependence(_))));
    }

    #[test]
    fn constant_sigma_has_no_deviation() {
        let base = FinslerStructure::randers(&[0.2, 0.1]).unwrap();
        let cc = lift(&base, "0.3").unwrap();
        assert!(cc.is_homothety());
        let p = Point::new(vec![0.1, 0.2], vec![1.0, 0.5]).unwrap();
        assert!(l_tensor(&cc, &p).unwrap().iter().all(|v| v.abs() < 1e-15));
    }
}
