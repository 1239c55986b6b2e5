//! Two-sided checks of every transformation formula on a Randers pair.

use finsler::conformal::{lift, verify_theorem, TheoremId};
use finsler::metric::FinslerStructure;

fn main() -> finsler::Result<()> {
    let cc = lift(&FinslerStructure::randers(&[0.2, 0.1, 0.0])?, "0.1*x1 + 0.05*x2")?;
    let samples = cc.base.sample_points(8, 7)?;
    for id in TheoremId::ALL {
        let r = verify_theorem(id, &cc, &samples, id.default_tol());
        println!("{:<22} {:<5} max residual {:.2e}", r.id, r.status, r.max_residual);
    }
    Ok(())
}
