//! Fundamental and Cartan tensors of a Randers metric, plus a convexity scan.

use finsler::jets::Point;
use finsler::metric::{metric_at, parse_metric_json, strong_convexity_check};

fn main() -> finsler::Result<()> {
    let f = parse_metric_json(include_str!("metrics/randers3.json"))?;
    println!("{}", f.describe());

    let p = Point::new(vec![0.1, -0.3, 0.2], vec![1.0, 0.4, -0.2])?;
    let m = metric_at(&f, &p)?;
    println!("L = {:.6}", m.l);
    println!("g =\n{:.6}", m.g);
    println!("C_i = {:.6}", m.c1);
    println!("C^2 = {:.3e}", m.c2norm);

    // C(η, ·, ·) vanishes by homogeneity
    let eta: f64 = (0..3).flat_map(|j| (0..3).map(move |k| (j, k))).map(|(j, k)| {
        (0..3).map(|i| m.c3[[i, j, k]] * p.y[i]).sum::<f64>().abs()
    }).fold(0.0, f64::max);
    println!("max |C(η,·,·)| = {eta:.1e}");

    let report = strong_convexity_check(&f, &f.sample_points(200, 1)?);
    println!("min eigenvalue of g over 200 samples: {:.4}", report.min_eigenvalue);
    Ok(())
}
