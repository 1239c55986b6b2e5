use nalgebra::{DMatrix, DVector, SymmetricEigen};
use ndarray::ArrayD;

use crate::error::{FinslerError, Result};

fn frob(a: impl IntoIterator<Item = f64>) -> f64 {
    a.into_iter().map(|v| v * v).sum::<f64>().sqrt()
}

/// Fits `DT = λ ⊗ T`, where the derivative index is the last slot of `DT`.
///
/// Returns the form `λ` and `‖DT − λ⊗T‖ / (‖DT‖ + ‖T‖)`.
pub fn fit_recurrence(t: &ArrayD<f64>, dt: &ArrayD<f64>, tol: f64) -> Result<(Vec<f64>, f64)> {
    assert_eq!(dt.ndim(), t.ndim() + 1);
    let n = *dt.shape().last().unwrap();
    let tt: f64 = t.iter().map(|v| v * v).sum();
    let tnorm = tt.sqrt();
    if tnorm <= tol {
        return Err(FinslerError::DegenerateTensor { norm: tnorm });
    }
    let tflat: Vec<f64> = t.iter().copied().collect();
    let dflat: Vec<f64> = dt.iter().copied().collect();
    let lambda: Vec<f64> =
        (0..n).map(|k| tflat.iter().enumerate().map(|(a, v)| v * dflat[a * n + k]).sum::<f64>() / tt).collect();
    let resid = frob(
        tflat.iter().enumerate().flat_map(|(a, v)| (0..n).map(move |k| (a, k, *v))).map(|(a, k, v)| dflat[a * n + k] - lambda[k] * v),
    );
    let scale = frob(dflat.iter().copied()) + tnorm;
    Ok((lambda, resid / scale))
}

/// Best `k` in `a ≈ k b`; zero when `b` vanishes.
pub fn fit_scalar(a: &ArrayD<f64>, b: &ArrayD<f64>) -> f64 {
    let bb: f64 = b.iter().map(|v| v * v).sum();
    if bb == 0.0 {
        return 0.0;
    }
    a.iter().zip(b.iter()).map(|(x, y)| x * y).sum::<f64>() / bb
}

/// Minimum-norm solution of `A x ≈ b` with `A` given row-major.
///
/// Uses the eigendecomposition of `AᵀA`; eigenvalues below `1e-14` of the
/// largest count as zero. The systems here are small and often exactly
/// rank deficient, where the SVD route proved unreliable.
pub fn least_squares(rows: usize, cols: usize, a: &[f64], b: &[f64]) -> Vec<f64> {
    let m = DMatrix::from_row_slice(rows, cols, a);
    let rhs = DVector::from_column_slice(b);
    let ata = m.transpose() * &m;
    let atb = m.transpose() * rhs;
    let eig = SymmetricEigen::new(ata);
    let top = eig.eigenvalues.iter().copied().fold(0.0, f64::max);
    let mut x = DVector::zeros(cols);
    for (k, &lam) in eig.eigenvalues.iter().enumerate() {
        if lam > 1e-14 * top {
            let v = eig.eigenvectors.column(k);
            x += v * (v.dot(&atb) / lam);
        }
    }
    x.iter().copied().collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::IxDyn;

    #[test]
    fn recurrence_recovers_the_form() {
        let t = ArrayD::from_shape_vec(IxDyn(&[2, 2]), vec![1.0, 2.0, 2.0, -1.0]).unwrap();
        let dt = ArrayD::from_shape_fn(IxDyn(&[2, 2, 2]), |ix| 2.0 * (ix[2] as f64 + 1.0) * t[[ix[0], ix[1]]]);
        let (lambda, r) = fit_recurrence(&t, &dt, 1e-12).unwrap();
        assert!((lambda[0] - 2.0).abs() < 1e-14 && (lambda[1] - 4.0).abs() < 1e-14);
        assert!(r < 1e-15);
    }

    #[test]
    fn vanishing_tensor_is_degenerate() {
        let t = ArrayD::zeros(IxDyn(&[2, 2]));
        let dt = ArrayD::zeros(IxDyn(&[2, 2, 2]));
        assert!(matches!(fit_recurrence(&t, &dt, 1e-12), Err(FinslerError::DegenerateTensor { .. })));
    }

    #[test]
    fn least_squares_handles_rank_deficiency() {
        // columns 2 and 3 repeat column 1
        let a = [1.0, 1.0, 1.0, 2.0, 2.0, 2.0, 0.0, 0.0, 0.0];
        let x = least_squares(3, 3, &a, &[3.0, 6.0, 0.0]);
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12));
    }

    #[test]
    fn least_squares_solves_square_systems() {
        let x = least_squares(2, 2, &[2.0, 1.0, 1.0, 3.0], &[3.0, 5.0]);
        assert!((x[0] - 0.8).abs() < 1e-13 && (x[1] - 1.4).abs() < 1e-13);
    }
}
