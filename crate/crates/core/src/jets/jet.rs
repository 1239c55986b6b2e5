use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::sync::Arc;

use super::space::JetSpace;

/// Truncated multivariate Taylor expansion at a fixed base point.
///
/// The coefficient of monomial `t^α` is `∂^α f / α!`. A jet carries its own
/// truncation order; combining jets of different orders truncates to the
/// smaller one, and differentiating lowers the order by one.
#[derive(Clone)]
pub struct Jet {
    space: Arc<JetSpace>,
    order: usize,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Jet")
            .field("order", &self.order)
            .field("value", &self.value())
            .field("len", &self.coeffs.len())
            .finish()
    }
}

impl Jet {
    pub fn constant(space: &Arc<JetSpace>, value: f64) -> Self {
        let order = space.max_order();
        let mut coeffs = vec![0.0; space.len(order)];
        coeffs[0] = value;
        Self { space: space.clone(), order, coeffs }
    }

    /// The coordinate function `t_var` shifted to `value` at the base point.
    pub fn variable(space: &Arc<JetSpace>, var: usize, value: f64) -> Self {
        let mut jet = Self::constant(space, value);
        if jet.order >= 1 {
            let mut e = vec![0u8; space.nvars()];
            e[var] = 1;
            let idx = space.index_of(&e).expect("degree-one monomial");
            jet.coeffs[idx] = 1.0;
        }
        jet
    }

    pub fn from_coeffs(space: &Arc<JetSpace>, order: usize, coeffs: Vec<f64>) -> Self {
        assert!(order <= space.max_order());
        assert_eq!(coeffs.len(), space.len(order));
        Self { space: space.clone(), order, coeffs }
    }

    pub fn space(&self) -> &Arc<JetSpace> {
        &self.space
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Taylor coefficient of the monomial with the given exponents, or 0 if
    /// the monomial lies beyond the truncation order.
    pub fn coeff(&self, exponent: &[u8]) -> f64 {
        match self.space.index_of(exponent) {
            Some(i) if i < self.coeffs.len() => self.coeffs[i],
            _ => 0.0,
        }
    }

    /// Partial derivative `∂^α f` at the base point (coefficient times `α!`).
    pub fn derivative(&self, exponent: &[u8]) -> f64 {
        let fact: f64 = exponent
            .iter()
            .map(|&k| (1..=k as u32).map(f64::from).product::<f64>())
            .product();
        self.coeff(exponent) * fact
    }

    pub fn truncate(&self, order: usize) -> Self {
        if order >= self.order {
            return self.clone();
        }
        Self {
            space: self.space.clone(),
            order,
            coeffs: self.coeffs[..self.space.len(order)].to_vec(),
        }
    }

    /// `∂/∂t_var`, one order lower.
    ///
    /// # Panics
    ///
    /// Panics on a zeroth-order jet, which carries no derivative information.
    pub fn diff(&self, var: usize) -> Self {
        assert!(self.order >= 1, "cannot differentiate an order-0 jet");
        let order = self.order - 1;
        let mut coeffs = vec![0.0; self.space.len(order)];
        for &(src, dst, factor) in self.space.derivative_table(var, order) {
            coeffs[dst as usize] = factor * self.coeffs[src as usize];
        }
        Self { space: self.space.clone(), order, coeffs }
    }

    pub fn scale(&self, k: f64) -> Self {
        Self {
            space: self.space.clone(),
            order: self.order,
            coeffs: self.coeffs.iter().map(|c| c * k).collect(),
        }
    }

    pub fn add_scalar(&self, k: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += k;
        out
    }

    fn zip_with(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Self {
        let order = self.order.min(other.order);
        let n = self.space.len(order);
        let coeffs = self.coeffs[..n]
            .iter()
            .zip(&other.coeffs[..n])
            .map(|(&a, &b)| f(a, b))
            .collect();
        Self { space: self.space.clone(), order, coeffs }
    }

    fn mul_jet(&self, other: &Self) -> Self {
        let order = self.order.min(other.order);
        let mut coeffs = vec![0.0; self.space.len(order)];
        let a = &self.coeffs;
        let b = &other.coeffs;
        for &(i, j, k) in self.space.products(order) {
            coeffs[k as usize] += a[i as usize] * b[j as usize];
        }
        Self { space: self.space.clone(), order, coeffs }
    }

    /// Applies a univariate function given its Taylor coefficients
    /// `d[k] = f^(k)(v) / k!` at `v = self.value()`.
    pub fn compose(&self, d: &[f64]) -> Self {
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut out = Self::constant(&self.space, d[0]).truncate(self.order);
        let mut power = h.clone();
        for (k, &dk) in d.iter().enumerate().skip(1) {
            if k > self.order {
                break;
            }
            if dk != 0.0 {
                out += &power.scale(dk);
            }
            if k < self.order {
                power = power.mul_jet(&h);
            }
        }
        out
    }

    pub fn recip(&self) -> Self {
        let v = self.value();
        let d: Vec<f64> = (0..=self.order)
            .map(|k| {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                sign / v.powi(k as i32 + 1)
            })
            .collect();
        self.compose(&d)
    }

    pub fn exp(&self) -> Self {
        let e = self.value().exp();
        let mut d = vec![e; self.order + 1];
        let mut fact = 1.0;
        for (k, dk) in d.iter_mut().enumerate().skip(1) {
            fact *= k as f64;
            *dk = e / fact;
        }
        self.compose(&d)
    }

    pub fn ln(&self) -> Self {
        let v = self.value();
        let mut d = vec![v.ln()];
        for k in 1..=self.order {
            let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
            d.push(sign / (k as f64 * v.powi(k as i32)));
        }
        self.compose(&d)
    }

    /// `self^p` for real `p`; requires a positive value unless `p` is an
    /// integer.
    pub fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() <= 16.0 {
            return self.powi(p as i32);
        }
        let v = self.value();
        let mut d = Vec::with_capacity(self.order + 1);
        let mut binom = 1.0;
        for k in 0..=self.order {
            d.push(binom * v.powf(p - k as f64));
            binom *= (p - k as f64) / (k as f64 + 1.0);
        }
        self.compose(&d)
    }

    pub fn powi(&self, p: i32) -> Self {
        if p < 0 {
            return self.powi(-p).recip();
        }
        let mut out = Self::constant(&self.space, 1.0).truncate(self.order);
        let mut base = self.clone();
        let mut e = p as u32;
        while e > 0 {
            if e & 1 == 1 {
                out = out.mul_jet(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul_jet(&base);
            }
        }
        out
    }

    pub fn sqrt(&self) -> Self {
        self.powf(0.5)
    }

    pub fn sin(&self) -> Self {
        let v = self.value();
        let (s, c) = v.sin_cos();
        let cycle = [s, c, -s, -c];
        let mut fact = 1.0;
        let d: Vec<f64> = (0..=self.order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                cycle[k % 4] / fact
            })
            .collect();
        self.compose(&d)
    }

    pub fn cos(&self) -> Self {
        let v = self.value();
        let (s, c) = v.sin_cos();
        let cycle = [c, -s, -c, s];
        let mut fact = 1.0;
        let d: Vec<f64> = (0..=self.order)
            .map(|k| {
                if k > 0 {
                    fact *= k as f64;
                }
                cycle[k % 4] / fact
            })
            .collect();
        self.compose(&d)
    }

    /// Smooth away from zero; the sign is frozen at the base point.
    pub fn abs(&self) -> Self {
        if self.value() < 0.0 {
            -self
        } else {
            self.clone()
        }
    }
}

macro_rules! jet_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(self, rhs)
            }
        }
        impl $trait<Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(&self, &rhs)
            }
        }
        impl $trait<&Jet> for Jet {
            type Output = Jet;
            fn $method(self, rhs: &Jet) -> Jet {
                $body(&self, rhs)
            }
        }
        impl $trait<Jet> for &Jet {
            type Output = Jet;
            fn $method(self, rhs: Jet) -> Jet {
                $body(self, &rhs)
            }
        }
    };
}

jet_binop!(Add, add, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x + y));
jet_binop!(Sub, sub, |a: &Jet, b: &Jet| a.zip_with(b, |x, y| x - y));
jet_binop!(Mul, mul, |a: &Jet, b: &Jet| a.mul_jet(b));
jet_binop!(Div, div, |a: &Jet, b: &Jet| a.mul_jet(&b.recip()));

impl Mul<f64> for &Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Mul<f64> for Jet {
    type Output = Jet;
    fn mul(self, rhs: f64) -> Jet {
        self.scale(rhs)
    }
}

impl Neg for &Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl Neg for Jet {
    type Output = Jet;
    fn neg(self) -> Jet {
        self.scale(-1.0)
    }
}

impl AddAssign<&Jet> for Jet {
    fn add_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            self.order = rhs.order;
            self.coeffs.truncate(self.space.len(rhs.order));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a += b;
        }
    }
}

impl AddAssign<Jet> for Jet {
    fn add_assign(&mut self, rhs: Jet) {
        *self += &rhs;
    }
}

impl SubAssign<&Jet> for Jet {
    fn sub_assign(&mut self, rhs: &Jet) {
        if rhs.order < self.order {
            self.order = rhs.order;
            self.coeffs.truncate(self.space.len(rhs.order));
        }
        for (a, b) in self.coeffs.iter_mut().zip(&rhs.coeffs) {
            *a -= b;
        }
    }
}

impl SubAssign<Jet> for Jet {
    fn sub_assign(&mut self, rhs: Jet) {
        *self -= &rhs;
    }
}

/// Scalar type the expression evaluator and metric families are generic
/// over: plain `f64` for finite-difference oracles, [`Jet`] for exact
/// derivatives.
pub trait Real: Clone + Send + Sync {
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn radd(&self, o: &Self) -> Self;
    fn rsub(&self, o: &Self) -> Self;
    fn rmul(&self, o: &Self) -> Self;
    fn rdiv(&self, o: &Self) -> Self;
    fn rneg(&self) -> Self;
    fn powf(&self, p: f64) -> Self;
    fn exp(&self) -> Self;
    fn ln(&self) -> Self;
    fn sqrt(&self) -> Self;
    fn sin(&self) -> Self;
    fn cos(&self) -> Self;
    fn abs(&self) -> Self;
}

impl Real for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }
    fn value(&self) -> f64 {
        *self
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn powf(&self, p: f64) -> Self {
        if p.fract() == 0.0 && p.abs() <= 16.0 {
            f64::powi(*self, p as i32)
        } else {
            f64::powf(*self, p)
        }
    }
    fn exp(&self) -> Self {
        f64::exp(*self)
    }
    fn ln(&self) -> Self {
        f64::ln(*self)
    }
    fn sqrt(&self) -> Self {
        f64::sqrt(*self)
    }
    fn sin(&self) -> Self {
        f64::sin(*self)
    }
    fn cos(&self) -> Self {
        f64::cos(*self)
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
}

impl Real for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant(&self.space, c)
    }
    fn value(&self) -> f64 {
        Jet::value(self)
    }
    fn radd(&self, o: &Self) -> Self {
        self + o
    }
    fn rsub(&self, o: &Self) -> Self {
        self - o
    }
    fn rmul(&self, o: &Self) -> Self {
        self * o
    }
    fn rdiv(&self, o: &Self) -> Self {
        self / o
    }
    fn rneg(&self) -> Self {
        -self
    }
    fn powf(&self, p: f64) -> Self {
        Jet::powf(self, p)
    }
    fn exp(&self) -> Self {
        Jet::exp(self)
    }
    fn ln(&self) -> Self {
        Jet::ln(self)
    }
    fn sqrt(&self) -> Self {
        Jet::sqrt(self)
    }
    fn sin(&self) -> Self {
        Jet::sin(self)
    }
    fn cos(&self) -> Self {
        Jet::cos(self)
    }
    fn abs(&self) -> Self {
        Jet::abs(self)
    }
}
