//! Jet derivatives of L² against a Richardson finite-difference oracle.

use finsler::expr::{Expr, ExprField};
use finsler::jets::{eval_jet, fd_oracle, FdConfig, Point};

fn main() -> finsler::Result<()> {
    let l2 = ExprField { expr: Expr::parse("(y1^4 + y2^4)^(1/2) + 0.3*x1*y1*y2", 2)?, n: 2 };
    let p = Point::new(vec![0.2, -0.1], vec![0.9, 1.3])?;
    let jet = eval_jet(&l2, &p, 3)?;
    let cfg = FdConfig { step: 1e-2, richardson: true };
    for e in [[0, 0, 1, 0], [0, 0, 1, 1], [1, 0, 0, 1], [0, 0, 2, 1]] {
        let fd = fd_oracle(&l2, &p, &e, cfg)?;
        let ad = jet.derivative(&e);
        println!("∂^{e:?}: jet {ad:+.10} fd {fd:+.10} rel {:.1e}", (ad - fd).abs() / (1.0 + ad.abs()));
    }
    Ok(())
}
