//! Canonical spray, Barthel connection and the four regular connections.
//!
//! A regular connection is stored by its two coefficient arrays in the
//! adapted frame `δⱼ = ∂/∂xʲ − Nᵐⱼ ∂/∂yᵐ`, `∂/∂yʲ`:
//! `D_{δₖ} eⱼ = Hⁱⱼₖ eᵢ` and `D_{∂/∂yᵏ} eⱼ = Vⁱⱼₖ eᵢ`.
//!
//! Jet order budget for an evaluation at order `K`: `g` keeps `K-2`,
//! `C`, `N` and the Cartan `F` keep `K-3`, `Gⁱⱼₖ` keeps `K-4`.

use std::fmt;
use std::str::FromStr;

use ndarray::ArrayD;
use serde::{Deserialize, Serialize};

use crate::error::{FinslerError, Result};
use crate::jets::{Jet, Point};
use crate::metric::{FinslerStructure, MetricJets};
use crate::tensor::{jet_sum, JetTensor, Slot};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConnectionKind {
    Cartan,
    Chern,
    Hashiguchi,
    Berwald,
}

impl ConnectionKind {
    pub const ALL: [ConnectionKind; 4] =
        [ConnectionKind::Cartan, ConnectionKind::Chern, ConnectionKind::Hashiguchi, ConnectionKind::Berwald];

    /// Whether `Vⁱⱼₖ = Tⁱⱼₖ` (otherwise zero).
    pub fn has_vertical(self) -> bool {
        matches!(self, ConnectionKind::Cartan | ConnectionKind::Hashiguchi)
    }

    /// Whether `Hⁱⱼₖ = Gⁱⱼₖ` (otherwise the Cartan coefficients).
    pub fn has_berwald_horizontal(self) -> bool {
        matches!(self, ConnectionKind::Hashiguchi | ConnectionKind::Berwald)
    }
}

impl fmt::Display for ConnectionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ConnectionKind::Cartan => "cartan",
            ConnectionKind::Chern => "chern",
            ConnectionKind::Hashiguchi => "hashiguchi",
            ConnectionKind::Berwald => "berwald",
        })
    }
}

impl FromStr for ConnectionKind {
    type Err = FinslerError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cartan" => Ok(ConnectionKind::Cartan),
            "chern" => Ok(ConnectionKind::Chern),
            "hashiguchi" => Ok(ConnectionKind::Hashiguchi),
            "berwald" => Ok(ConnectionKind::Berwald),
            other => Err(FinslerError::UnknownId(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    Horizontal,
    Vertical,
}

/// Everything up to the Cartan connection, as jets at one point.
#[derive(Debug, Clone)]
pub struct LocalGeometry {
    pub metric: MetricJets,
    /// `Gⁱ = ¼ gⁱˡ (yᵏ ∂²L²/∂xᵏ∂yˡ − ∂L²/∂xˡ)`
    pub spray: Vec<Jet>,
    /// Barthel coefficients `Nⁱⱼ = ∂Gⁱ/∂yʲ`, stored `[i][j]`.
    pub nl: JetTensor,
    /// `Gⁱⱼₖ = ∂Nⁱⱼ/∂yᵏ`
    pub gder: JetTensor,
    /// Cartan horizontal coefficients `Fⁱⱼₖ`.
    pub cartan_f: JetTensor,
}

impl LocalGeometry {
    pub fn compute(f: &FinslerStructure, p: &Point, order: usize) -> Result<Self> {
        if order < 4 {
            return Err(FinslerError::Order { requested: order, max: crate::jets::MAX_ORDER });
        }
        let metric = MetricJets::compute(f, p, order)?;
        let n = metric.n;
        let l2 = &metric.l2;
        let inner: Vec<Jet> = (0..n)
            .map(|l| {
                let dyl = l2.diff(n + l);
                let mixed = jet_sum((0..n).map(|k| &metric.y[k] * &dyl.diff(k))).unwrap();
                mixed - l2.diff(l)
            })
            .collect();
        let spray: Vec<Jet> = (0..n)
            .map(|i| jet_sum((0..n).map(|l| metric.g_inv.at(&[i, l]) * &inner[l])).unwrap().scale(0.25))
            .collect();
        let nl = JetTensor::from_fn(n, 2, |ix| spray[ix[0]].diff(n + ix[1]));
        let gder = JetTensor::from_fn(n, 3, |ix| nl.at(&[ix[0], ix[1]]).diff(n + ix[2]));
        let placeholder = gder.clone();
        let mut geom = Self { metric, spray, nl, gder, cartan_f: placeholder };
        let dg: Vec<JetTensor> = (0..n)
            .map(|m| JetTensor::from_fn(n, 2, |ix| geom.delta(geom.metric.g.at(ix), m)))
            .collect();
        let lowered = JetTensor::from_fn(n, 3, |ix| {
            let (l, j, k) = (ix[0], ix[1], ix[2]);
            (dg[j].at(&[l, k]) + dg[k].at(&[j, l]) - dg[l].at(&[j, k])).scale(0.5)
        });
        geom.cartan_f = JetTensor::from_fn(n, 3, |ix| {
            jet_sum((0..n).map(|l| geom.metric.g_inv.at(&[ix[0], l]) * lowered.at(&[l, ix[1], ix[2]]))).unwrap()
        });
        Ok(geom)
    }

    pub fn n(&self) -> usize {
        self.metric.n
    }

    pub fn zero(&self) -> Jet {
        self.metric.zero()
    }

    /// `δⱼ f = ∂f/∂xʲ − Nᵐⱼ ∂f/∂yᵐ`
    pub fn delta(&self, f: &Jet, j: usize) -> Jet {
        let n = self.n();
        let corr = jet_sum((0..n).map(|m| self.nl.at(&[m, j]) * &f.diff(n + m))).unwrap();
        f.diff(j) - corr
    }

    pub fn vertical(&self, f: &Jet, j: usize) -> Jet {
        f.diff(self.n() + j)
    }

    /// `δⱼ` as a vector field on `TM` in the coordinate frame.
    pub fn delta_field(&self, j: usize) -> Vec<Jet> {
        let n = self.n();
        let z = self.zero();
        let mut out: Vec<Jet> = (0..n).map(|i| if i == j { z.add_scalar(1.0) } else { z.clone() }).collect();
        out.extend((0..n).map(|m| -self.nl.at(&[m, j])));
        out
    }

    /// `∂/∂yʲ` as a vector field on `TM`.
    pub fn vertical_field(&self, j: usize) -> Vec<Jet> {
        let n = self.n();
        let z = self.zero();
        (0..2 * n).map(|a| if a == n + j { z.add_scalar(1.0) } else { z.clone() }).collect()
    }

    pub fn connection(&self, kind: ConnectionKind) -> Connection {
        let n = self.n();
        let h = if kind.has_berwald_horizontal() { self.gder.clone() } else { self.cartan_f.clone() };
        let v = if kind.has_vertical() {
            self.metric.t.clone()
        } else {
            JetTensor::from_fn(n, 3, |_| self.zero())
        };
        Connection { kind, h, v }
    }

    pub fn derivative(&self, f: &Jet, k: usize, dir: Direction) -> Jet {
        match dir {
            Direction::Horizontal => self.delta(f, k),
            Direction::Vertical => self.vertical(f, k),
        }
    }
}

/// A regular connection in the adapted frame.
#[derive(Debug, Clone)]
pub struct Connection {
    pub kind: ConnectionKind,
    pub h: JetTensor,
    pub v: JetTensor,
}

impl Connection {
    fn gamma(&self, dir: Direction) -> &JetTensor {
        match dir {
            Direction::Horizontal => &self.h,
            Direction::Vertical => &self.v,
        }
    }

    /// Horizontal (`∇_{βeₖ}`) or vertical (`∇_{γeₖ}`) covariant derivative of
    /// a π-tensor; the differentiation index is appended as the last slot.
    pub fn cov_deriv(&self, geom: &LocalGeometry, a: &JetTensor, slots: &[Slot], dir: Direction) -> JetTensor {
        assert_eq!(a.rank(), slots.len());
        let n = geom.n();
        let gamma = self.gamma(dir);
        JetTensor::from_fn(n, a.rank() + 1, |ix| {
            let k = ix[a.rank()];
            let base = &ix[..a.rank()];
            let mut acc = geom.derivative(a.at(base), k, dir);
            let mut idx = base.to_vec();
            for (s, slot) in slots.iter().enumerate() {
                let orig = base[s];
                for m in 0..n {
                    idx[s] = m;
                    let term = match slot {
                        Slot::Up => gamma.at(&[orig, m, k]) * a.at(&idx),
                        Slot::Down => gamma.at(&[m, orig, k]) * a.at(&idx),
                    };
                    acc = match slot {
                        Slot::Up => acc + term,
                        Slot::Down => acc - term,
                    };
                }
                idx[s] = orig;
            }
            acc
        })
    }

    /// `D_X W` for a vector field `X` on `TM` (coordinate components) and a
    /// π-vector field `W`, both as jets.
    pub fn along(&self, geom: &LocalGeometry, x: &[Jet], w: &[Jet]) -> Vec<Jet> {
        let n = geom.n();
        let xdot: Vec<Jet> = (0..n)
            .map(|k| &x[n + k] + &jet_sum((0..n).map(|m| geom.nl.at(&[k, m]) * &x[m])).unwrap())
            .collect();
        (0..n)
            .map(|i| {
                let mut acc = crate::jets::apply_field(x, &w[i]);
                for j in 0..n {
                    for k in 0..n {
                        acc += &(self.h.at(&[i, j, k]) * &w[j]) * &x[k];
                        acc += &(self.v.at(&[i, j, k]) * &w[j]) * &xdot[k];
                    }
                }
                acc
            })
            .collect()
    }
}

/// Spray data at a point.
#[derive(Debug, Clone)]
pub struct SprayAtPoint {
    pub g: Vec<f64>,
    pub nl: ArrayD<f64>,
    pub gder: ArrayD<f64>,
}

pub fn spray_at(f: &FinslerStructure, p: &Point) -> Result<SprayAtPoint> {
    let geom = LocalGeometry::compute(f, p, 4)?;
    Ok(SprayAtPoint {
        g: geom.spray.iter().map(Jet::value).collect(),
        nl: geom.nl.values(),
        gder: geom.gder.values(),
    })
}

/// Coefficient arrays of a regular connection at a point.
#[derive(Debug, Clone)]
pub struct ConnectionAtPoint {
    pub kind: ConnectionKind,
    pub h: ArrayD<f64>,
    pub v: ArrayD<f64>,
}

pub fn connection_at(f: &FinslerStructure, p: &Point, kind: ConnectionKind) -> Result<ConnectionAtPoint> {
    let geom = LocalGeometry::compute(f, p, 4)?;
    let c = geom.connection(kind);
    Ok(ConnectionAtPoint { kind, h: c.h.values(), v: c.v.values() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::rel_residual;

    fn hyperbolic() -> FinslerStructure {
        FinslerStructure::riemannian_diag(&["1", "exp(2*x1)"]).unwrap()
    }

    #[test]
    fn euclidean_spray_vanishes() {
        let f = FinslerStructure::euclidean(3);
        let p = Point::new(vec![0.1, 0.2, 0.3], vec![1.0, -0.5, 0.7]).unwrap();
        let s = spray_at(&f, &p).unwrap();
        assert!(s.g.iter().chain(s.nl.iter()).chain(s.gder.iter()).all(|v| v.abs() < 1e-13));
    }

    #[test]
    fn riemannian_spray_is_christoffel() {
        // Γ¹₂₂ = -e^{2x¹}, Γ²₁₂ = 1
        let f = hyperbolic();
        let (x1, y1, y2) = (0.4f64, 0.8, -1.3);
        let p = Point::new(vec![x1, 0.2], vec![y1, y2]).unwrap();
        let s = spray_at(&f, &p).unwrap();
        let e = (2.0 * x1).exp();
        assert!((s.g[0] - 0.5 * (-e * y2 * y2)).abs() < 1e-12);
        assert!((s.g[1] - y1 * y2).abs() < 1e-12);
        let c = connection_at(&f, &p, ConnectionKind::Cartan).unwrap();
        let b = connection_at(&f, &p, ConnectionKind::Berwald).unwrap();
        assert!(rel_residual(&c.h, &b.h) < 1e-12);
        assert!((c.h[[0, 1, 1]] + e).abs() < 1e-12);
        assert!((c.h[[1, 0, 1]] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn cartan_metric_compatibility() {
        // ∇g = 0 horizontally and vertically for the Cartan connection
        let f = FinslerStructure::randers(&[0.3, -0.2]).unwrap();
        let p = Point::new(vec![0.2, 0.1], vec![1.0, 0.4]).unwrap();
        let geom = LocalGeometry::compute(&f, &p, 5).unwrap();
        let c = geom.connection(ConnectionKind::Cartan);
        for dir in [Direction::Horizontal, Direction::Vertical] {
            let dg = c.cov_deriv(&geom, &geom.metric.g, &[Slot::Down, Slot::Down], dir);
            assert!(dg.data().iter().all(|j| j.value().abs() < 1e-12), "{dir:?}");
        }
    }

    #[test]
    fn kind_parsing() {
        for k in ConnectionKind::ALL {
            assert_eq!(k.to_string().parse::<ConnectionKind>().unwrap(), k);
        }
        assert!("levi".parse::<ConnectionKind>().is_err());
    }
}
