//! Deformation fields of a conformal change, built from base quantities only.
//!
//! Index layout: `B[i][x][y] = B(eₓ, e_y)ⁱ`, `𝒜[i][x][y][z] = 𝒜(eₓ,e_y,e_z)ⁱ`,
//! curvature deformations follow the curvature layout `[i][z][x][y]`.

use ndarray::{Array1, Array2, ArrayD, IxDyn};

use super::ConformalPoint;
use crate::connection::{Connection, ConnectionKind, Direction};
use crate::curvature::CurvaturePack;
use crate::jets::{bracket_jets, Jet};
use crate::tensor::{array_from_fn, jet_sum, JetTensor, Slot};

fn sum(it: impl IntoIterator<Item = Jet>) -> Jet {
    jet_sum(it).unwrap()
}

/// Jet-valued deformation tensors at one point.
#[derive(Debug, Clone)]
pub struct DeformationJets {
    /// `T′(𝓛δₐ, δ_b)ⁱ` stored `[i][a][b]`, fixed by
    /// `g(T′(𝓛X, hY), ρZ) = g(T(NρZ, ρY), ρX)`.
    pub tprime: JetTensor,
    /// Cartan deformation on horizontal arguments.
    pub b: JetTensor,
    pub b_berwald: JetTensor,
    pub b_chern: JetTensor,
    pub b_hashiguchi: JetTensor,
    /// `U(βX̄,Ȳ) = B(X̄,Ȳ) − ∇_{𝓛βX̄}Ȳ` on frame fields `Ȳ = e_y`.
    pub u: JetTensor,
    pub a_tensor: JetTensor,
}

impl DeformationJets {
    pub fn compute(cp: &ConformalPoint) -> Self {
        let geom = &cp.base;
        let n = cp.n();
        let m = &geom.metric;
        let (t, c, g, l) = (&m.t, &m.c_low, &m.g, &cp.ltensor);
        let zero = geom.zero();
        let delta = |a: usize, b: usize| if a == b { 1.0 } else { 0.0 };

        let tprime = JetTensor::from_fn(n, 3, |ix| {
            let (i, a, b) = (ix[0], ix[1], ix[2]);
            sum((0..n).map(|cc| {
                let inner = sum((0..n).map(|mm| c.at(&[a, b, mm]) * l.at(&[mm, cc])));
                m.g_inv.at(&[i, cc]) * &inner
            }))
        });
        let b = JetTensor::from_fn(n, 3, |ix| {
            let (i, a, bb) = (ix[0], ix[1], ix[2]);
            let mut acc = cp.dsigma[a].scale(delta(i, bb)) + cp.dsigma[bb].scale(delta(i, a));
            acc -= g.at(&[a, bb]) * &cp.sigma_up[i];
            acc -= sum((0..n).map(|mm| t.at(&[i, mm, a]) * l.at(&[mm, bb])));
            acc + tprime.at(&[i, a, bb]).clone()
        });
        let b_chern = JetTensor::from_fn(n, 3, |ix| {
            let (i, x, y) = (ix[0], ix[1], ix[2]);
            b.at(ix) - &sum((0..n).map(|mm| t.at(&[i, mm, y]) * l.at(&[mm, x])))
        });

        // ω°(δₖ, eⱼ) = K([∂/∂yʲ, 𝓛]δₖ) + D°_{𝓛δₖ} eⱼ
        let berwald = geom.connection(ConnectionKind::Berwald);
        let l_apply = |w: &[Jet]| -> Vec<Jet> {
            let mut out = vec![zero.clone(); 2 * n];
            for i in 0..n {
                out[n + i] = sum((0..n).map(|j| l.at(&[i, j]) * &w[j]));
            }
            out
        };
        let conn_map = |w: &[Jet]| -> Vec<Jet> {
            (0..n).map(|i| &w[n + i] + &sum((0..n).map(|mm| geom.nl.at(&[i, mm]) * &w[mm]))).collect()
        };
        let mut bo = vec![zero.clone(); n * n * n];
        for k in 0..n {
            let x = geom.delta_field(k);
            let lx = l_apply(&x);
            for j in 0..n {
                let v = geom.vertical_field(j);
                let lhs = bracket_jets(&v, &lx);
                let inner = l_apply(&bracket_jets(&v, &x));
                let fn_br: Vec<Jet> = lhs.iter().zip(&inner).map(|(a, b)| a - b).collect();
                let k1 = conn_map(&fn_br);
                let ej: Vec<Jet> = (0..n).map(|i| if i == j { zero.add_scalar(1.0) } else { zero.clone() }).collect();
                let d = berwald.along(geom, &lx, &ej);
                for i in 0..n {
                    bo[(i * n + k) * n + j] = &k1[i] + &d[i];
                }
            }
        }
        let b_berwald = JetTensor::from_fn(n, 3, |ix| bo[(ix[0] * n + ix[1]) * n + ix[2]].clone());

        // ω*(X,Ȳ) = (D*_{γȲ}N)(ρX) + N T(Ȳ, ρX)
        let hashi = geom.connection(ConnectionKind::Hashiguchi);
        let dvn = hashi.cov_deriv(geom, l, &[Slot::Up, Slot::Down], Direction::Vertical);
        let b_hashiguchi = JetTensor::from_fn(n, 3, |ix| {
            let (i, x, y) = (ix[0], ix[1], ix[2]);
            dvn.at(&[i, x, y]) + &sum((0..n).map(|mm| l.at(&[i, mm]) * t.at(&[mm, y, x])))
        });

        let u = JetTensor::from_fn(n, 3, |ix| {
            let (i, x, y) = (ix[0], ix[1], ix[2]);
            b.at(ix) - &sum((0..n).map(|mm| l.at(&[mm, x]) * t.at(&[i, y, mm])))
        });
        // U acts as an operator on π-vector fields, so 𝒜 splits into the
        // B-part and a vertical derivative of T along 𝓛βX̄.
        let cartan = geom.connection(ConnectionKind::Cartan);
        let dvt = cartan.cov_deriv(geom, t, &[Slot::Up, Slot::Down, Slot::Down], Direction::Vertical);
        let a_tensor = JetTensor::from_fn(n, 4, |ix| {
            let (i, x, y, z) = (ix[0], ix[1], ix[2], ix[3]);
            let mut acc = zero.clone();
            for mm in 0..n {
                acc += t.at(&[i, mm, z]) * b.at(&[mm, x, y]);
                acc += t.at(&[i, mm, y]) * b.at(&[mm, x, z]);
                acc -= b.at(&[i, x, mm]) * t.at(&[mm, y, z]);
                acc += l.at(&[mm, x]) * dvt.at(&[i, y, z, mm]);
            }
            acc
        });
        Self { tprime, b, b_berwald, b_chern, b_hashiguchi, u, a_tensor }
    }

    /// The horizontal-argument deformation of the given connection.
    pub fn b_for(&self, kind: ConnectionKind) -> &JetTensor {
        match kind {
            ConnectionKind::Cartan => &self.b,
            ConnectionKind::Berwald => &self.b_berwald,
            ConnectionKind::Chern => &self.b_chern,
            ConnectionKind::Hashiguchi => &self.b_hashiguchi,
        }
    }
}

/// Extra terms of the curvature change: `P̃ = P + p_extra`, `R̃ = R + r_extra`.
#[derive(Debug, Clone)]
pub struct CurvatureDeformation {
    pub p_extra: ArrayD<f64>,
    pub r_extra: ArrayD<f64>,
}

/// Curvature deformation of one connection from base curvature values.
pub fn curvature_deformation(
    cp: &ConformalPoint,
    dj: &DeformationJets,
    conn: &Connection,
    pack: &CurvaturePack,
) -> CurvatureDeformation {
    let geom = &cp.base;
    let n = cp.n();
    let b = dj.b_for(conn.kind);
    let slots = [Slot::Up, Slot::Down, Slot::Down];
    let dv = conn.cov_deriv(geom, b, &slots, Direction::Vertical).values();
    let dh = conn.cov_deriv(geom, b, &slots, Direction::Horizontal).values();
    let bv = b.values();
    let l = cp.ltensor.values();
    let t = geom.metric.t.values();
    let (p, s) = (&pack.p, &pack.s);
    let at = |a: &ArrayD<f64>, ix: &[usize]| a[IxDyn(ix)];

    if conn.kind.has_vertical() {
        // Cartan and Hashiguchi share the same shape of deformation
        let p_extra = array_from_fn(n, 4, |ix| {
            let (i, z, x, y) = (ix[0], ix[1], ix[2], ix[3]);
            let mut v = at(&dv, &[i, x, z, y]);
            for m in 0..n {
                v += at(&bv, &[i, m, z]) * at(&t, &[m, y, x]);
                v -= at(s, &[i, z, m, y]) * at(&l, &[m, x]);
            }
            v
        });
        let f = |x: usize, y: usize, i: usize, z: usize| -> f64 {
            let mut v = at(&dh, &[i, y, z, x]);
            for m in 0..n {
                let lmx = at(&l, &[m, x]);
                v -= lmx * at(&dv, &[i, y, z, m]);
                v += at(p, &[i, z, x, m]) * at(&l, &[m, y]);
                v += at(&bv, &[i, x, m]) * at(&bv, &[m, y, z]);
                for a in 0..n {
                    v -= at(&bv, &[i, m, z]) * at(&t, &[m, a, y]) * at(&l, &[a, x]);
                }
            }
            v
        };
        let r_extra = array_from_fn(n, 4, |ix| {
            let (i, z, x, y) = (ix[0], ix[1], ix[2], ix[3]);
            let mut snn = 0.0;
            for a in 0..n {
                for bb in 0..n {
                    snn += at(s, &[i, z, a, bb]) * at(&l, &[a, x]) * at(&l, &[bb, y]);
                }
            }
            snn - (f(x, y, i, z) - f(y, x, i, z))
        });
        CurvatureDeformation { p_extra, r_extra }
    } else {
        let p_extra = array_from_fn(n, 4, |ix| at(&dv, &[ix[0], ix[2], ix[1], ix[3]]));
        let f = |x: usize, y: usize, i: usize, z: usize| -> f64 {
            let mut v = -at(&dh, &[i, y, z, x]);
            for m in 0..n {
                let lmx = at(&l, &[m, x]);
                v += lmx * at(&dv, &[i, y, z, m]);
                v += at(p, &[i, z, y, m]) * lmx;
                v -= at(&bv, &[i, x, m]) * at(&bv, &[m, y, z]);
            }
            v
        };
        let r_extra = array_from_fn(n, 4, |ix| {
            let (i, z, x, y) = (ix[0], ix[1], ix[2], ix[3]);
            f(x, y, i, z) - f(y, x, i, z)
        });
        CurvatureDeformation { p_extra, r_extra }
    }
}

/// Float deformation fields at a point.
#[derive(Debug, Clone)]
pub struct DeformationFields {
    pub ltensor: Array2<f64>,
    /// `P̄ⁱ`, raised `hZ·σ`.
    pub pbar: Array1<f64>,
    pub sigma1: f64,
    pub tprime: ArrayD<f64>,
    /// `A(X̄,Ȳ) = ω(γX̄,Ȳ)`; identically zero for a conformal change.
    pub a: ArrayD<f64>,
    pub b: ArrayD<f64>,
    /// `N(X̄) = B(X̄, η̄)` stored `[i][x]`.
    pub n_map: Array2<f64>,
    /// `N₀ = N(η̄)`
    pub n0: Array1<f64>,
    pub b_berwald: ArrayD<f64>,
    pub b_chern: ArrayD<f64>,
    pub b_hashiguchi: ArrayD<f64>,
    pub u: ArrayD<f64>,
    pub a_tensor: ArrayD<f64>,
    /// `(i_η̄𝒜)(X̄,Ȳ) = 𝒜(η̄,X̄,Ȳ)`
    pub iota_a: ArrayD<f64>,
    pub a0: Array1<f64>,
    /// Cartan curvature deformations `V` (hv) and `H` (h).
    pub v: ArrayD<f64>,
    pub h: ArrayD<f64>,
}

impl DeformationFields {
    pub fn from_parts(cp: &ConformalPoint, dj: &DeformationJets, cartan_def: &CurvatureDeformation) -> Self {
        let n = cp.n();
        let y: Vec<f64> = cp.base.metric.y.iter().map(Jet::value).collect();
        let b = dj.b.values();
        let a_tensor = dj.a_tensor.values();
        let n_map = Array2::from_shape_fn((n, n), |(i, x)| (0..n).map(|k| b[[i, x, k]] * y[k]).sum());
        let n0 = Array1::from_shape_fn(n, |i| (0..n).map(|x| n_map[[i, x]] * y[x]).sum());
        let iota_a = array_from_fn(n, 3, |ix| (0..n).map(|a| y[a] * a_tensor[[ix[0], a, ix[1], ix[2]]]).sum());
        let a0 = Array1::from_shape_fn(n, |x| (0..n).map(|i| iota_a[[i, x, i]]).sum());
        Self {
            ltensor: Array2::from_shape_fn((n, n), |(i, j)| cp.ltensor.at(&[i, j]).value()),
            pbar: Array1::from_shape_fn(n, |i| cp.sigma_up[i].value()),
            sigma1: cp.sigma1.value(),
            tprime: dj.tprime.values(),
            a: ArrayD::zeros(IxDyn(&[n, n, n])),
            b,
            n_map,
            n0,
            b_berwald: dj.b_berwald.values(),
            b_chern: dj.b_chern.values(),
            b_hashiguchi: dj.b_hashiguchi.values(),
            u: dj.u.values(),
            a_tensor,
            iota_a,
            a0,
            v: cartan_def.p_extra.clone(),
            h: cartan_def.r_extra.clone(),
        }
    }

    /// Largest absolute entry over every σ-derived field.
    pub fn max_abs(&self) -> f64 {
        use crate::tensor::max_abs;
        [
            max_abs(&self.ltensor.clone().into_dyn()),
            max_abs(&self.pbar.clone().into_dyn()),
            self.sigma1.abs(),
            max_abs(&self.b),
            max_abs(&self.n_map.clone().into_dyn()),
            max_abs(&self.b_berwald),
            max_abs(&self.b_chern),
            max_abs(&self.b_hashiguchi),
            max_abs(&self.a_tensor),
            max_abs(&self.v),
            max_abs(&self.h),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }
}
