//! Transfer of special classes across conformal changes.

use finsler::conformal::lift;
use finsler::harness::check_proposition;
use finsler::classify::PROPOSITIONS;
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    let base = FinslerStructure::randers(&[0.5, 0.0, 0.0])?;
    for sigma in ["0.3", "0.1*x1"] {
        let cc = lift(&base, sigma)?;
        let samples = base.sample_points(5, 7)?;
        println!("σ = {sigma}");
        for prop in PROPOSITIONS {
            let r = check_proposition(prop, &cc, &samples, None)?;
            println!("  {:<14} {:<13} {}", prop.id, r.status.to_string(), r.note.unwrap_or_default());
        }
    }
    Ok(())
}
