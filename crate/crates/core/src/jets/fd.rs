use super::{Point, ScalarField};
use crate::error::Result;

/// Step control for the central-difference oracle.
#[derive(Debug, Clone, Copy)]
pub struct FdConfig {
    pub step: f64,
    /// Combine steps `h`, `h/2` and `h/4` to cancel the `O(h²)` and `O(h⁴)` terms.
    pub richardson: bool,
}

impl Default for FdConfig {
    fn default() -> Self {
        Self { step: 1e-3, richardson: false }
    }
}

/// Central finite-difference estimate of `∂^α f(p)` for a multi-index `α`
/// over `(x¹..xⁿ, y¹..yⁿ)` of total order at most 3.
///
/// Independent of the jet machinery: only `f.eval_f64` is used.
pub fn fd_oracle(f: &dyn ScalarField, p: &Point, exponent: &[u8], cfg: FdConfig) -> Result<f64> {
    f.check_domain(p)?;
    let dirs: Vec<usize> = exponent
        .iter()
        .enumerate()
        .flat_map(|(v, &k)| std::iter::repeat_n(v, k as usize))
        .collect();
    assert!(dirs.len() <= 3, "finite-difference oracle supports order <= 3");
    let base = p.coords();
    let at = |h: f64| nested_central(f, &base, &dirs, h);
    if cfg.richardson {
        let (a, b, c) = (at(cfg.step)?, at(cfg.step / 2.0)?, at(cfg.step / 4.0)?);
        Ok((64.0 * c - 20.0 * b + a) / 45.0)
    } else {
        at(cfg.step)
    }
}

fn nested_central(f: &dyn ScalarField, base: &[f64], dirs: &[usize], h: f64) -> Result<f64> {
    match dirs.split_first() {
        None => f.eval_f64(base),
        Some((&v, rest)) => {
            let mut plus = base.to_vec();
            let mut minus = base.to_vec();
            plus[v] += h;
            minus[v] -= h;
            let fp = nested_central(f, &plus, rest, h)?;
            let fm = nested_central(f, &minus, rest, h)?;
            Ok((fp - fm) / (2.0 * h))
        }
    }
}
