//! Randomized structural identities.

use finsler::classify::fit_recurrence;
use finsler::conformal::{l_tensor, lift};
use finsler::connection::spray_at;
use finsler::jets::Point;
use finsler::metric::{metric_at, FinslerStructure};
use ndarray::{ArrayD, IxDyn};
use proptest::prelude::*;

fn randers() -> FinslerStructure {
    FinslerStructure::randers(&[0.3, -0.4]).unwrap()
}

fn point() -> impl Strategy<Value = Point> {
    (prop::array::uniform2(-1.0..1.0f64), prop::array::uniform2(-2.0..2.0f64))
        .prop_filter("y away from 0", |(_, y)| y[0].hypot(y[1]) > 0.3)
        .prop_map(|(x, y)| Point::new(x.to_vec(), y.to_vec()).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn metric_is_zero_homogeneous(p in point(), lambda in 0.2..5.0f64) {
        let f = randers();
        let a = metric_at(&f, &p).unwrap();
        let b = metric_at(&f, &p.with_y_scaled(lambda)).unwrap();
        prop_assert!((b.l - lambda * a.l).abs() < 1e-12 * (1.0 + b.l));
        for (u, v) in a.g.iter().zip(b.g.iter()) {
            prop_assert!((u - v).abs() < 1e-12);
        }
    }

    #[test]
    fn cartan_tensor_annihilates_y(p in point()) {
        let m = metric_at(&randers(), &p).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                let s: f64 = (0..2).map(|k| m.c3[[i, j, k]] * p.y[k]).sum();
                prop_assert!(s.abs() < 1e-12);
                prop_assert!((m.c3[[i, j, 0]] - m.c3[[0, i, j]]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn spray_is_two_homogeneous(p in point(), lambda in 0.2..5.0f64) {
        let f = FinslerStructure::riemannian_diag(&["1 + x2^2", "exp(x1)"]).unwrap();
        let a = spray_at(&f, &p).unwrap();
        let b = spray_at(&f, &p.with_y_scaled(lambda)).unwrap();
        for i in 0..2 {
            prop_assert!((b.g[i] - lambda * lambda * a.g[i]).abs() < 1e-10 * (1.0 + b.g[i].abs()));
            let ny: f64 = (0..2).map(|j| a.nl[[i, j]] * p.y[j]).sum();
            prop_assert!((ny - 2.0 * a.g[i]).abs() < 1e-11);
        }
    }

    #[test]
    fn deviation_contracts_to_spray_difference(p in point(), c in -0.5..0.5f64) {
        let cc = lift(&randers(), &format!("{c}*x1 + 0.2*x2^2")).unwrap();
        let l = l_tensor(&cc, &p).unwrap();
        let g0 = spray_at(&cc.base, &p).unwrap().g;
        let g1 = spray_at(&cc.lifted, &p).unwrap().g;
        for i in 0..2 {
            let ly: f64 = (0..2).map(|j| l[[i, j]] * p.y[j]).sum();
            prop_assert!((ly - 2.0 * (g1[i] - g0[i])).abs() < 1e-10);
        }
    }

    #[test]
    fn recurrence_fit_recovers_planted_form(t in prop::array::uniform4(-1.0..1.0f64), lam in prop::array::uniform2(-3.0..3.0f64)) {
        let t = ArrayD::from_shape_vec(IxDyn(&[2, 2]), t.to_vec()).unwrap();
        prop_assume!(t.iter().map(|v| v * v).sum::<f64>() > 1e-3);
        let dt = ArrayD::from_shape_fn(IxDyn(&[2, 2, 2]), |ix| lam[ix[2]] * t[[ix[0], ix[1]]]);
        let (fit, r) = fit_recurrence(&t, &dt, 1e-12).unwrap();
        prop_assert!(r < 1e-14);
        prop_assert!((fit[0] - lam[0]).abs() < 1e-12 && (fit[1] - lam[1]).abs() < 1e-12);
    }
}
