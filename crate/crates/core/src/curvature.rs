//! Curvature of a regular connection.
//!
//! Sign convention: `K(X,Y)Z = −D_X D_Y Z + D_Y D_X Z + D_{[X,Y]} Z`.
//! Stored as `R[i][l][j][k] = (K(δⱼ,δₖ) eₗ)ⁱ`, `P` with `(δⱼ, ∂/∂yᵏ)` and
//! `S` with `(∂/∂yʲ, ∂/∂yᵏ)`. With this sign a metric of constant sectional
//! curvature `k` has `g(R(η,X)η, Y) = k L² ħ(X,Y)`.

use ndarray::{Array2, ArrayD};

use crate::connection::{Connection, ConnectionKind, LocalGeometry};
use crate::error::Result;
use crate::jets::{bracket_jets, Jet, Point};
use crate::metric::FinslerStructure;
use crate::tensor::{array_from_fn, jet_sum, JetTensor};

/// Which way the curvature tensors are assembled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CurvatureMethod {
    /// Connection coefficients and their frame derivatives.
    Index,
    /// Literal second covariant derivatives and Lie brackets of frame fields.
    Defining,
}

#[derive(Debug, Clone)]
pub struct CurvatureJets {
    pub r: JetTensor,
    pub p: JetTensor,
    pub s: JetTensor,
}

fn sum(it: impl IntoIterator<Item = Jet>) -> Jet {
    jet_sum(it).unwrap()
}

pub fn curvature_jets(geom: &LocalGeometry, conn: &Connection, method: CurvatureMethod) -> CurvatureJets {
    match method {
        CurvatureMethod::Index => index_path(geom, conn),
        CurvatureMethod::Defining => defining_path(geom, conn),
    }
}

fn index_path(geom: &LocalGeometry, c: &Connection) -> CurvatureJets {
    let n = geom.n();
    let (h, v, nl) = (&c.h, &c.v, &geom.nl);
    // δₖ Nᵐⱼ − δⱼ Nᵐₖ
    let omega = JetTensor::from_fn(n, 3, |ix| {
        let (m, j, k) = (ix[0], ix[1], ix[2]);
        geom.delta(nl.at(&[m, j]), k) - geom.delta(nl.at(&[m, k]), j)
    });
    let r = JetTensor::from_fn(n, 4, |ix| {
        let (i, l, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let a = geom.delta(h.at(&[i, l, k]), j) + sum((0..n).map(|m| h.at(&[i, m, j]) * h.at(&[m, l, k])));
        let b = geom.delta(h.at(&[i, l, j]), k) + sum((0..n).map(|m| h.at(&[i, m, k]) * h.at(&[m, l, j])));
        let t = sum((0..n).map(|m| v.at(&[i, l, m]) * omega.at(&[m, j, k])));
        b - a + t
    });
    let p = JetTensor::from_fn(n, 4, |ix| {
        let (i, l, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = geom.vertical(h.at(&[i, l, j]), k) - geom.delta(v.at(&[i, l, k]), j);
        for m in 0..n {
            acc -= h.at(&[i, m, j]) * v.at(&[m, l, k]);
            acc += v.at(&[i, m, k]) * h.at(&[m, l, j]);
            acc += v.at(&[i, l, m]) * geom.gder.at(&[m, j, k]);
        }
        acc
    });
    let s = JetTensor::from_fn(n, 4, |ix| {
        let (i, l, j, k) = (ix[0], ix[1], ix[2], ix[3]);
        let mut acc = geom.vertical(v.at(&[i, l, j]), k) - geom.vertical(v.at(&[i, l, k]), j);
        for m in 0..n {
            acc -= v.at(&[i, m, j]) * v.at(&[m, l, k]);
            acc += v.at(&[i, m, k]) * v.at(&[m, l, j]);
        }
        acc
    });
    CurvatureJets { r, p, s }
}

/// `K(X,Y)e_l` straight from the definition.
pub fn defining_value(geom: &LocalGeometry, c: &Connection, x: &[Jet], y: &[Jet], l: usize) -> Vec<Jet> {
    let n = geom.n();
    let z = geom.zero();
    let el: Vec<Jet> = (0..n).map(|i| if i == l { z.add_scalar(1.0) } else { z.clone() }).collect();
    let dy = c.along(geom, y, &el);
    let dx = c.along(geom, x, &el);
    let xy = c.along(geom, x, &dy);
    let yx = c.along(geom, y, &dx);
    let br = bracket_jets(x, y);
    let t = c.along(geom, &br, &el);
    (0..n).map(|i| &(&yx[i] - &xy[i]) + &t[i]).collect()
}

fn defining_path(geom: &LocalGeometry, c: &Connection) -> CurvatureJets {
    let n = geom.n();
    let hf: Vec<Vec<Jet>> = (0..n).map(|j| geom.delta_field(j)).collect();
    let vf: Vec<Vec<Jet>> = (0..n).map(|j| geom.vertical_field(j)).collect();
    let build = |a: &[Vec<Jet>], b: &[Vec<Jet>]| {
        // cache per (l, j, k)
        let mut vals = vec![Vec::new(); n * n * n];
        for l in 0..n {
            for j in 0..n {
                for k in 0..n {
                    vals[(l * n + j) * n + k] = defining_value(geom, c, &a[j], &b[k], l);
                }
            }
        }
        JetTensor::from_fn(n, 4, |ix| vals[(ix[1] * n + ix[2]) * n + ix[3]][ix[0]].clone())
    };
    CurvatureJets { r: build(&hf, &hf), p: build(&hf, &vf), s: build(&vf, &vf) }
}

/// Float curvature tensors of one connection at a point.
#[derive(Debug, Clone)]
pub struct CurvaturePack {
    pub kind: ConnectionKind,
    pub r: ArrayD<f64>,
    pub p: ArrayD<f64>,
    pub s: ArrayD<f64>,
}

impl CurvaturePack {
    pub fn from_jets(kind: ConnectionKind, c: &CurvatureJets) -> Self {
        Self { kind, r: c.r.values(), p: c.p.values(), s: c.s.values() }
    }
}

pub fn curvature_at(
    f: &FinslerStructure,
    p: &Point,
    kind: ConnectionKind,
    method: CurvatureMethod,
) -> Result<CurvaturePack> {
    let geom = LocalGeometry::compute(f, p, 5)?;
    let conn = geom.connection(kind);
    Ok(CurvaturePack::from_jets(kind, &curvature_jets(&geom, &conn, method)))
}

/// `Ric(X,Y) = Tr(Z ↦ K(X,Z)Y)`, i.e. `Ric[x][y] = Σₖ K[k][y][x][k]`.
pub fn ricci(k: &ArrayD<f64>) -> Array2<f64> {
    let n = k.shape()[0];
    Array2::from_shape_fn((n, n), |(x, y)| (0..n).map(|m| k[[m, y, x, m]]).sum())
}

/// `gˣʸ Ric[x][y]`
pub fn scalar(ric: &Array2<f64>, g_inv: &Array2<f64>) -> f64 {
    (g_inv * ric).sum()
}

/// Horizontal and vertical Ricci tensors and scalar curvatures.
#[derive(Debug, Clone)]
pub struct RicciScalars {
    pub ric_h: Array2<f64>,
    pub ric_v: Array2<f64>,
    pub sc_h: f64,
    pub sc_v: f64,
}

pub fn ricci_scalars(pack: &CurvaturePack, g_inv: &Array2<f64>) -> RicciScalars {
    let ric_h = ricci(&pack.r);
    let ric_v = ricci(&pack.s);
    let sc_h = scalar(&ric_h, g_inv);
    let sc_v = scalar(&ric_v, g_inv);
    RicciScalars { ric_h, ric_v, sc_h, sc_v }
}

/// `R♭(X,Y,Z,W) = g(K(X,Y)Z, W)`, stored `[x][y][z][w]`.
pub fn lower(k: &ArrayD<f64>, g: &Array2<f64>) -> ArrayD<f64> {
    let n = g.nrows();
    array_from_fn(n, 4, |ix| (0..n).map(|i| g[[i, ix[3]]] * k[[i, ix[2], ix[0], ix[1]]]).sum())
}
