//! Which special classes a few model structures belong to.

use finsler::classify::{classify_all, Predicate, VerdictStatus};
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    let models = [
        ("euclidean", FinslerStructure::euclidean(3)),
        ("hyperbolic", FinslerStructure::riemannian_diag(&["1", "exp(2*x1)", "exp(2*x1)"])?),
        ("randers", FinslerStructure::randers(&[0.3, 0.1, 0.0])?),
        ("quartic", FinslerStructure::quartic(3)),
    ];
    for (name, f) in &models {
        let samples = f.sample_points(6, 3)?;
        let verdicts = classify_all(f, Predicate::ALL, &samples, None)?;
        let holds: Vec<&str> =
            verdicts.iter().filter(|v| v.status == VerdictStatus::Holds).map(|v| v.predicate.as_str()).collect();
        println!("{name}: {}", holds.join(", "));
    }
    Ok(())
}
