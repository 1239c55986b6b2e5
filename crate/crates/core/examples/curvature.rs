//! Cartan curvature of the hyperbolic plane; flag curvature is −1.

use finsler::connection::ConnectionKind;
use finsler::curvature::{curvature_at, lower, ricci_scalars, CurvatureMethod};
use finsler::jets::Point;
use finsler::metric::{metric_at, FinslerStructure};

fn main() -> finsler::Result<()> {
    let f = FinslerStructure::riemannian_diag(&["1", "exp(2*x1)"])?;
    let p = Point::new(vec![-0.4, 0.7], vec![0.3, 1.2])?;
    let m = metric_at(&f, &p)?;

    let by_index = curvature_at(&f, &p, ConnectionKind::Cartan, CurvatureMethod::Index)?;
    let by_fields = curvature_at(&f, &p, ConnectionKind::Cartan, CurvatureMethod::Defining)?;
    let gap = (&by_index.r - &by_fields.r).iter().fold(0.0f64, |a, v| a.max(v.abs()));
    println!("index vs defining R: {gap:.1e}");

    let r = lower(&by_index.r, &m.g);
    let x = [0.0, 1.0];
    let y = &p.y;
    let mut num = 0.0;
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                for d in 0..2 {
                    num += y[a] * x[b] * y[c] * x[d] * r[[a, b, c, d]];
                }
            }
        }
    }
    let hxx: f64 = (0..2).flat_map(|i| (0..2).map(move |j| (i, j))).map(|(i, j)| m.hbar[[i, j]] * x[i] * x[j]).sum();
    println!("flag curvature k = {:.10}", num / (m.l * m.l * hxx));
    println!("Sc_h = {:.10}", ricci_scalars(&by_index, &m.g_inv).sc_h);
    Ok(())
}
