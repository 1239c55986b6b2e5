//! Barthel connection and the four canonical connections on the hyperbolic plane.

use finsler::connection::{connection_at, spray_at, ConnectionKind};
use finsler::jets::Point;
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    let f = FinslerStructure::riemannian_diag(&["1", "exp(2*x1)"])?;
    let p = Point::new(vec![0.2, 0.0], vec![1.0, 0.5])?;

    let s = spray_at(&f, &p)?;
    println!("G = {:?}", s.g);
    println!("N =\n{:.6}", s.nl);

    for kind in ConnectionKind::ALL {
        let c = connection_at(&f, &p, kind)?;
        let vmax = c.v.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        println!("{kind:>10}: Γ^1_22 = {:+.6}, max |vertical| = {vmax:.2e}", c.h[[0, 1, 1]]);
    }
    // Riemannian: all four agree and Γ^1_22 = −e^{2x1}
    println!("expected Γ^1_22 = {:+.6}", -(0.4f64).exp());
    Ok(())
}
