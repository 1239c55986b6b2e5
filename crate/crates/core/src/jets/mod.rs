//! Higher-order forward-mode differentiation on the slit tangent bundle.
//!
//! Every scalar quantity in the crate is carried as a [`Jet`]: a truncated
//! Taylor polynomial in the `2n` coordinates `(x¹..xⁿ, y¹..yⁿ)` around a base
//! [`Point`]. Tensors are arrays of jets, derivatives are coefficient shifts,
//! and vector fields on `TM` are arrays of `2n` jet components.

mod fd;
mod jet;
mod space;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

pub use fd::{fd_oracle, FdConfig};
pub use jet::{Jet, Real};
pub use space::JetSpace;

use crate::error::{FinslerError, Result};

/// Highest jet order any evaluation may request.
pub const MAX_ORDER: usize = 8;

/// A point of the slit tangent bundle: chart coordinates `x` and fiber
/// coordinates `y ≠ 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct Point {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Point {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.len() != y.len() {
            return Err(FinslerError::Domain(format!(
                "x has {} coordinates but y has {}",
                x.len(),
                y.len()
            )));
        }
        if x.len() < 2 {
            return Err(FinslerError::Domain("dimension must be at least 2".into()));
        }
        if y.iter().all(|&v| v == 0.0) {
            return Err(FinslerError::Domain("y = 0 is not in the slit tangent bundle".into()));
        }
        Ok(Self { x, y })
    }

    pub fn dim(&self) -> usize {
        self.x.len()
    }

    /// Coordinates in the order `(x¹..xⁿ, y¹..yⁿ)`.
    pub fn coords(&self) -> Vec<f64> {
        self.x.iter().chain(&self.y).copied().collect()
    }

    pub fn from_coords(coords: &[f64]) -> Self {
        let n = coords.len() / 2;
        Self { x: coords[..n].to_vec(), y: coords[n..].to_vec() }
    }

    pub fn with_y_scaled(&self, lambda: f64) -> Self {
        Self { x: self.x.clone(), y: self.y.iter().map(|v| v * lambda).collect() }
    }
}

/// A smooth scalar function on (an open cone of) the slit tangent bundle.
///
/// Implementors evaluate both on plain floats (for finite-difference
/// oracles) and on jets.
pub trait ScalarField: Send + Sync {
    fn dim(&self) -> usize;

    /// Evaluates with `vars = (x¹..xⁿ, y¹..yⁿ)`.
    fn eval_f64(&self, vars: &[f64]) -> Result<f64>;

    fn eval_jet(&self, vars: &[Jet]) -> Result<Jet>;

    fn check_domain(&self, p: &Point) -> Result<()> {
        if p.y.iter().all(|&v| v == 0.0) {
            return Err(FinslerError::Domain("y = 0".into()));
        }
        Ok(())
    }
}

type SpaceCache = Mutex<HashMap<(usize, usize), Arc<JetSpace>>>;

/// Shared jet space for `nvars` variables at `order`.
pub fn jet_space(nvars: usize, order: usize) -> Arc<JetSpace> {
    static CACHE: OnceLock<SpaceCache> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().expect("jet space cache poisoned");
    guard
        .entry((nvars, order))
        .or_insert_with(|| Arc::new(JetSpace::new(nvars, order)))
        .clone()
}

/// Coordinate jets `(x¹..xⁿ, y¹..yⁿ)` at `p`, truncated at `order`.
pub fn coordinate_jets(p: &Point, order: usize) -> Result<Vec<Jet>> {
    if order > MAX_ORDER {
        return Err(FinslerError::Order { requested: order, max: MAX_ORDER });
    }
    let space = jet_space(2 * p.dim(), order);
    Ok(p.coords()
        .into_iter()
        .enumerate()
        .map(|(i, v)| Jet::variable(&space, i, v))
        .collect())
}

/// Truncated Taylor expansion of `f` at `p`.
pub fn eval_jet(f: &dyn ScalarField, p: &Point, order: usize) -> Result<Jet> {
    f.check_domain(p)?;
    let vars = coordinate_jets(p, order)?;
    f.eval_jet(&vars)
}

/// A vector field on `TM` in the coordinate frame `(∂/∂xⁱ, ∂/∂yⁱ)`.
pub trait VectorFieldTM: Send + Sync {
    /// The `2n` components as jets over the coordinate variables `vars`.
    fn components(&self, vars: &[Jet]) -> Result<Vec<Jet>>;
}

impl<F> VectorFieldTM for F
where
    F: Fn(&[Jet]) -> Result<Vec<Jet>> + Send + Sync,
{
    fn components(&self, vars: &[Jet]) -> Result<Vec<Jet>> {
        self(vars)
    }
}

/// `X·f = Σ Xᵃ ∂ₐf` for jet components.
pub fn apply_field(field: &[Jet], f: &Jet) -> Jet {
    let mut acc: Option<Jet> = None;
    for (a, xa) in field.iter().enumerate() {
        let term = xa * &f.diff(a);
        acc = Some(match acc {
            Some(s) => s + term,
            None => term,
        });
    }
    acc.expect("non-empty vector field")
}

/// Lie bracket of two jet-valued vector fields; the result is one order lower.
pub fn bracket_jets(x: &[Jet], y: &[Jet]) -> Vec<Jet> {
    (0..x.len())
        .map(|a| apply_field(x, &y[a]) - apply_field(y, &x[a]))
        .collect()
}

/// `[X, Y]` at `p` in the coordinate frame.
pub fn lie_bracket(x: &dyn VectorFieldTM, y: &dyn VectorFieldTM, p: &Point) -> Result<Vec<f64>> {
    let vars = coordinate_jets(p, 1)?;
    let xc = x.components(&vars)?;
    let yc = y.components(&vars)?;
    Ok(bracket_jets(&xc, &yc).iter().map(Jet::value).collect())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn zero_like(v: &[Jet]) -> Jet {
        v[0].constant_like(0.0)
    }

    #[test]
    fn bracket_of_coordinate_fields() {
        // X = ∂/∂x¹, Y = x¹ ∂/∂x²  =>  [X, Y] = ∂/∂x²
        let x = |v: &[Jet]| -> Result<Vec<Jet>> {
            let z = zero_like(v);
            Ok(vec![z.add_scalar(1.0), z.clone(), z.clone(), z])
        };
        let y = |v: &[Jet]| -> Result<Vec<Jet>> {
            let z = zero_like(v);
            Ok(vec![z.clone(), v[0].clone(), z.clone(), z])
        };
        for p in [
            Point::new(vec![0.3, -0.2], vec![1.0, 0.5]).unwrap(),
            Point::new(vec![-1.0, 2.0], vec![0.0, 1.0]).unwrap(),
        ] {
            let b = lie_bracket(&x, &y, &p).unwrap();
            assert_eq!(b, vec![0.0, 1.0, 0.0, 0.0]);
        }
    }

    #[test]
    fn bracket_is_antisymmetric_at_self() {
        let x = |v: &[Jet]| -> Result<Vec<Jet>> {
            Ok(vec![v[2].clone(), &v[0] * &v[3], v[1].sin(), v[0].exp()])
        };
        let p = Point::new(vec![0.1, 0.2], vec![0.3, 0.4]).unwrap();
        let b = lie_bracket(&x, &x, &p).unwrap();
        assert!(b.iter().all(|v| v.abs() < 1e-15));
    }

    #[test]
    fn vertical_bracket_example() {
        // X = y¹∂/∂y², Y = y²∂/∂y¹: [X, Y] = y¹∂/∂y¹ - y²∂/∂y², i.e. (0, 0, 1, -2) at y = (1, 2)
        let x = |v: &[Jet]| -> Result<Vec<Jet>> {
            let z = zero_like(v);
            Ok(vec![z.clone(), z.clone(), z, v[2].clone()])
        };
        let y = |v: &[Jet]| -> Result<Vec<Jet>> {
            let z = zero_like(v);
            Ok(vec![z.clone(), z.clone(), v[3].clone(), z])
        };
        let p = Point::new(vec![0.0, 0.0], vec![1.0, 2.0]).unwrap();
        let b = lie_bracket(&x, &y, &p).unwrap();
        assert_eq!(b, vec![0.0, 0.0, 1.0, -2.0]);
    }

    #[test]
    fn point_rejects_zero_fiber() {
        assert!(Point::new(vec![0.0, 0.0], vec![0.0, 0.0]).is_err());
        assert!(Point::new(vec![0.0], vec![1.0]).is_err());
    }

    #[test]
    fn order_limit_is_enforced() {
        let p = Point::new(vec![0.0, 0.0], vec![1.0, 0.0]).unwrap();
        assert!(matches!(
            coordinate_jets(&p, MAX_ORDER + 1),
            Err(FinslerError::Order { .. })
        ));
    }
}
