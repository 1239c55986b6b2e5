//! The deviation between the Barthel connections of L and e^σ L.

use finsler::conformal::{deformation_fields, l_tensor, lift};
use finsler::connection::spray_at;
use finsler::jets::Point;
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    // On flat space with σ = 0.1 x1 the deviation at y = e1 is 0.1·I.
    let flat = lift(&FinslerStructure::euclidean(2), "0.1*x1")?;
    let p = Point::new(vec![0.0, 0.0], vec![1.0, 0.0])?;
    println!("Euclidean:\n{:.12}", l_tensor(&flat, &p)?);

    let cc = lift(&FinslerStructure::randers(&[0.5, 0.0])?, "0.1*x1 + 0.05*x2")?;
    let q = Point::new(vec![0.3, -0.2], vec![0.8, 1.1])?;
    let l = l_tensor(&cc, &q)?;
    let (a, b) = (spray_at(&cc.base, &q)?, spray_at(&cc.lifted, &q)?);
    let worst = (0..2)
        .flat_map(|i| (0..2).map(move |j| (i, j)))
        .map(|(i, j)| (b.nl[[i, j]] - a.nl[[i, j]] - l[[i, j]]).abs())
        .fold(0.0f64, f64::max);
    println!("Randers: |Ñ − N − 𝓛| = {worst:.1e}");

    let d = deformation_fields(&cc, &q)?;
    println!("σ₁ = {:.6}, max |𝒜| = {:.3e}", d.sigma1, d.a_tensor.iter().fold(0.0f64, |m, v| m.max(v.abs())));
    Ok(())
}
