use super::*;
use crate::conformal::lift;

fn pts(f: &FinslerStructure, k: usize) -> Vec<Point> {
    f.sample_points(k, 11).unwrap()
}

fn status(f: &FinslerStructure, p: Predicate) -> Verdict {
    classify(f, p, &pts(f, 4), None).unwrap()
}

#[test]
fn names_round_trip() {
    for p in Predicate::ALL {
        assert_eq!(p.as_str().parse::<Predicate>().unwrap(), *p);
    }
    assert!("finsler-ish".parse::<Predicate>().is_err());
}

#[test]
fn euclidean_is_riemannian_and_flat() {
    let f = FinslerStructure::euclidean(3);
    for p in [Predicate::Riemannian, Predicate::LocallyMinkowskian, Predicate::Berwald, Predicate::Landsberg] {
        assert_eq!(status(&f, p).status, VerdictStatus::Holds, "{p}");
    }
    assert_eq!(status(&f, Predicate::C2Like).status, VerdictStatus::Inapplicable);
}

#[test]
fn quartic_is_minkowskian_not_riemannian() {
    let f = FinslerStructure::quartic(2);
    assert_eq!(status(&f, Predicate::Riemannian).status, VerdictStatus::Fails);
    assert_eq!(status(&f, Predicate::Landsberg).status, VerdictStatus::Holds);
    assert_eq!(status(&f, Predicate::LocallyMinkowskian).status, VerdictStatus::Holds);
}

#[test]
fn randers_three_is_c_reducible() {
    let f = FinslerStructure::randers(&[0.3, 0.1, 0.0]).unwrap();
    let v = status(&f, Predicate::CReducible);
    assert_eq!(v.status, VerdictStatus::Holds, "{:?}", v.max_residual);
    assert_eq!(status(&f, Predicate::Riemannian).status, VerdictStatus::Fails);
    assert_eq!(status(&f, Predicate::SemiCReducible).status, VerdictStatus::Holds);
    assert_eq!(status(&f, Predicate::QuasiCReducible).status, VerdictStatus::Holds);
}

#[test]
fn hyperbolic_three_has_constant_curvature() {
    let f = FinslerStructure::riemannian_diag(&["1", "exp(2*x1)", "exp(2*x1)"]).unwrap();
    let v = status(&f, Predicate::ConstantCurvature);
    assert_eq!(v.status, VerdictStatus::Holds, "{:?}", v.max_residual);
    for s in &v.samples {
        assert!((s.fitted["k"][0] + 1.0).abs() < 1e-8);
    }
    assert_eq!(status(&f, Predicate::HIsotropic).status, VerdictStatus::Holds);
    assert_eq!(status(&f, Predicate::PScalarCurvature).status, VerdictStatus::Holds);
}

#[test]
fn floors_give_inapplicable() {
    let f = FinslerStructure::euclidean(2);
    let v = status(&f, Predicate::S3Like);
    assert_eq!(v.status, VerdictStatus::Inapplicable);
    assert!(v.note.unwrap().contains("n >= 4"));
}

#[test]
fn hyperbolic_plane_is_symmetric() {
    let f = FinslerStructure::riemannian_diag(&["1", "exp(2*x1)"]).unwrap();
    let v = classify(&f, Predicate::Symmetric, &pts(&f, 2), None).unwrap();
    assert_eq!(v.status, VerdictStatus::Holds, "{:?}", v.max_residual);
}

#[test]
fn hypotheses_on_euclidean_linear_sigma() {
    let cc = lift(&FinslerStructure::euclidean(2), "0.1*x1").unwrap();
    let s = pts(&cc.base, 3);
    assert_eq!(check_hypothesis(&cc, Hypothesis::AVanishes, &s, 1e-10).unwrap().status, VerdictStatus::Holds);
    assert_eq!(check_hypothesis(&cc, Hypothesis::Homothety, &s, 1e-10).unwrap().status, VerdictStatus::Fails);
}
