use ndarray::{Array2, ArrayD};

use super::context::ClassifyPoint;
use super::fit::{fit_recurrence, fit_scalar, least_squares};
use super::{Predicate, SampleResult};
use crate::error::{FinslerError, Result};
use crate::tensor::{array_from_fn, rel_diff, rel_residual};

/// Below this `C²` the torsion direction is undefined.
const C2_FLOOR: f64 = 1e-20;
/// Below this norm a tensor is treated as vanishing for recurrence fits.
const DEGENERATE: f64 = 1e-10;

fn zero_res(a: &ArrayD<f64>) -> f64 {
    rel_residual(a, &ArrayD::zeros(a.raw_dim()))
}

fn vec_res(a: &[f64]) -> f64 {
    a.iter().map(|v| rel_diff(*v, 0.0)).fold(0.0, f64::max)
}

fn delta(a: usize, b: usize) -> f64 {
    if a == b {
        1.0
    } else {
        0.0
    }
}

fn recurrence(t: &ArrayD<f64>, dt: &ArrayD<f64>) -> Result<SampleResult> {
    match fit_recurrence(t, dt, DEGENERATE) {
        Ok((lambda, r)) => Ok(SampleResult::plain(r).with("lambda", lambda)),
        Err(FinslerError::DegenerateTensor { .. }) => Ok(SampleResult::inapplicable()),
        Err(e) => Err(e),
    }
}

/// `a ≈ k b` after fitting `k`.
fn scalar_form(a: &ArrayD<f64>, b: &ArrayD<f64>, name: &str) -> SampleResult {
    let k = fit_scalar(a, b);
    SampleResult::plain(rel_residual(a, &b.mapv(|v| k * v))).with(name, vec![k])
}

/// `ħ(X,Z)ħ(Y,W) − ħ(X,W)ħ(Y,Z)`
fn hh(h: &Array2<f64>, n: usize) -> ArrayD<f64> {
    array_from_fn(n, 4, |ix| h[[ix[0], ix[2]]] * h[[ix[1], ix[3]]] - h[[ix[0], ix[3]]] * h[[ix[1], ix[2]]])
}

/// `A(X,Z)F(Y,W) − A(Y,Z)F(X,W) + A(Y,W)F(X,Z) − A(X,W)F(Y,Z)`
fn kulkarni(a: &Array2<f64>, f: &Array2<f64>, n: usize) -> ArrayD<f64> {
    array_from_fn(n, 4, |ix| {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        a[[x, z]] * f[[y, w]] - a[[y, z]] * f[[x, w]] + a[[y, w]] * f[[x, z]] - a[[x, w]] * f[[y, z]]
    })
}

fn cyclic(a: &Array2<f64>, c: &[f64], n: usize) -> ArrayD<f64> {
    array_from_fn(n, 3, |ix| {
        let (x, y, z) = (ix[0], ix[1], ix[2]);
        a[[x, y]] * c[z] + a[[y, z]] * c[x] + a[[z, x]] * c[y]
    })
}

fn ccc(c: &[f64], c2: f64, n: usize) -> ArrayD<f64> {
    array_from_fn(n, 3, |ix| c[ix[0]] * c[ix[1]] * c[ix[2]] / c2)
}

fn scalar_curvature(ctx: &ClassifyPoint) -> SampleResult {
    let n = ctx.n;
    let y = &ctx.y;
    let a = array_from_fn(n, 2, |ix| {
        let mut s = 0.0;
        for p in 0..n {
            for q in 0..n {
                s += y[p] * y[q] * ctx.r_low[[p, ix[0], q, ix[1]]];
            }
        }
        s
    });
    let l2 = ctx.m.l * ctx.m.l;
    let b = ctx.m.hbar.mapv(|v| l2 * v).into_dyn();
    scalar_form(&a, &b, "k")
}

fn p_scalar_curvature(ctx: &ClassifyPoint) -> SampleResult {
    let n = ctx.n;
    let phi = ctx.phi();
    // project one slot at a time
    let mut cur = ctx.r_low.clone();
    for slot in 0..4 {
        cur = array_from_fn(n, 4, |ix| {
            let mut idx = ix.to_vec();
            (0..n)
                .map(|a| {
                    idx[slot] = a;
                    phi[[a, ix[slot]]] * cur[idx.as_slice()]
                })
                .sum()
        });
    }
    scalar_form(&cur, &hh(&ctx.m.hbar, n), "r_o")
}

pub(super) fn evaluate(pred: Predicate, ctx: &ClassifyPoint) -> Result<SampleResult> {
    let n = ctx.n;
    let m = &ctx.m;
    let c1: Vec<f64> = m.c1.to_vec();
    let c2 = m.c2norm;
    Ok(match pred {
        Predicate::Riemannian => SampleResult::plain(zero_res(&ctx.t_low())),
        Predicate::LocallyMinkowskian => {
            let a = zero_res(&ctx.dh_t).max(zero_res(&ctx.cartan.r));
            let b = zero_res(&ctx.r_hat()).max(zero_res(&ctx.berwald.p));
            SampleResult::plain(a.max(b)).with("route_a", vec![a]).with("route_b", vec![b])
        }
        Predicate::Berwald => SampleResult::plain(zero_res(&ctx.dh_t)),
        Predicate::ChRecurrent => recurrence(&ctx.t_mixed(), &ctx.dh_t)?,
        Predicate::PStar => {
            if c2 <= C2_FLOOR {
                return Ok(SampleResult::inapplicable());
            }
            let dc = ctx.dh_c_eta();
            let lambda: f64 = (0..n).map(|i| dc[i] * m.cvec[i]).sum::<f64>() / c2;
            let t = ctx.t_mixed();
            SampleResult::plain(rel_residual(&ctx.dh_t_eta(), &t.mapv(|v| lambda * v))).with("lambda", vec![lambda])
        }
        Predicate::CvRecurrent => recurrence(&ctx.t_mixed(), &ctx.dv_t)?,
        Predicate::C0Recurrent => recurrence(&ctx.t_mixed(), &ctx.dv0_t)?,
        Predicate::SemiCReducible => {
            if c2 <= C2_FLOOR {
                return Ok(SampleResult::inapplicable());
            }
            let t = ctx.t_low();
            let k3 = ccc(&c1, c2, n);
            let q = cyclic(&m.hbar, &c1, n).mapv(|v| v / (n as f64 + 1.0));
            let d = &q - &k3;
            let mu = fit_scalar(&(&t - &k3), &d);
            let rhs = &k3 + &d.mapv(|v| mu * v);
            SampleResult::plain(rel_residual(&t, &rhs)).with("mu", vec![mu]).with("tau", vec![1.0 - mu])
        }
        Predicate::CReducible => {
            let rhs = cyclic(&m.hbar, &c1, n).mapv(|v| v / (n as f64 + 1.0));
            SampleResult::plain(rel_residual(&ctx.t_low(), &rhs))
        }
        Predicate::C2Like => {
            if c2 <= C2_FLOOR {
                return Ok(SampleResult::inapplicable());
            }
            SampleResult::plain(rel_residual(&ctx.t_low(), &ccc(&c1, c2, n)))
        }
        Predicate::QuasiCReducible => quasi_c(ctx),
        Predicate::S3Like => {
            let c = ctx.scalars.sc_v / ((n as f64 - 1.0) * (n as f64 - 2.0));
            SampleResult::plain(rel_residual(&ctx.s_low, &hh(&m.hbar, n).mapv(|v| c * v)))
        }
        Predicate::S4Like => {
            let sc = ctx.scalars.sc_v;
            let f = (&ctx.scalars.ric_v - &m.hbar.mapv(|v| sc * v / (2.0 * (n as f64 - 2.0)))) / (n as f64 - 3.0);
            SampleResult::plain(rel_residual(&ctx.s_low, &kulkarni(&m.hbar, &f, n)))
        }
        Predicate::SvRecurrent => recurrence(&ctx.cartan.s, &ctx.dv_s)?,
        Predicate::Landsberg => {
            let a = zero_res(&ctx.p_hat());
            let b = zero_res(&ctx.dh_t_eta());
            SampleResult::plain(a.max(b)).with("p_hat", vec![a]).with("nabla_eta_t", vec![b])
        }
        Predicate::GeneralLandsberg => {
            let ph = ctx.p_hat();
            let tr: Vec<f64> = (0..n).map(|x| (0..n).map(|k| ph[[k, x, k]]).sum()).collect();
            SampleResult::plain(vec_res(&ctx.dh_c_eta()).max(vec_res(&tr)))
        }
        Predicate::PSymmetric => {
            let p = &ctx.cartan.p;
            let swapped = array_from_fn(n, 4, |ix| p[[ix[0], ix[1], ix[3], ix[2]]]);
            SampleResult::plain(rel_residual(p, &swapped))
        }
        Predicate::P2Like => p2_like(ctx),
        Predicate::PReducible => {
            let ph = ctx.p_hat();
            let lhs = array_from_fn(n, 3, |ix| (0..n).map(|i| m.g[[i, ix[2]]] * ph[[i, ix[0], ix[1]]]).sum());
            let d: Vec<f64> = ctx.dh_c_eta().iter().map(|v| v / (n as f64 + 1.0)).collect();
            let rhs = array_from_fn(n, 3, |ix| {
                let (x, y, z) = (ix[0], ix[1], ix[2]);
                d[x] * m.hbar[[y, z]] + d[y] * m.hbar[[z, x]] + d[z] * m.hbar[[x, y]]
            });
            SampleResult::plain(rel_residual(&lhs, &rhs))
        }
        Predicate::HIsotropic => {
            let e = array_from_fn(n, 4, |ix| {
                let (i, z, x, y) = (ix[0], ix[1], ix[2], ix[3]);
                m.g[[x, z]] * delta(i, y) - m.g[[y, z]] * delta(i, x)
            });
            scalar_form(&ctx.cartan.r, &e, "k_o")
        }
        Predicate::ScalarCurvature | Predicate::ConstantCurvature => scalar_curvature(ctx),
        Predicate::R3Like => {
            let sc = ctx.scalars.sc_h;
            let f = (&ctx.scalars.ric_h - &m.g.mapv(|v| sc * v / (2.0 * (n as f64 - 1.0)))) / (n as f64 - 2.0);
            SampleResult::plain(rel_residual(&ctx.r_low, &kulkarni(&m.g, &f, n)))
        }
        Predicate::PScalarCurvature => p_scalar_curvature(ctx),
        Predicate::SPsCurvature => {
            let a = scalar_curvature(ctx);
            let b = p_scalar_curvature(ctx);
            let r = a.residual.unwrap().max(b.residual.unwrap());
            let mut out = SampleResult::plain(r);
            out.fitted.extend(a.fitted);
            out.fitted.extend(b.fitted);
            out
        }
        Predicate::Symmetric => match &ctx.dh0_r0 {
            Some(d) => SampleResult::plain(zero_res(d)),
            None => return Err(FinslerError::Order { requested: 6, max: 5 }),
        },
    })
}

/// `T♭ = A(X,Y)C(Z) + A(Y,Z)C(X) + A(Z,X)C(Y)` with `A = Ã∘(φ,φ)`, `Ã`
/// symmetric, which makes `A` indicatory by construction.
fn quasi_c(ctx: &ClassifyPoint) -> SampleResult {
    let n = ctx.n;
    let c = ctx.m.c1.to_vec();
    let phi = ctx.phi();
    let params: Vec<(usize, usize)> = (0..n).flat_map(|a| (a..n).map(move |b| (a, b))).collect();
    let basis = |(p, q): (usize, usize), a: usize, b: usize| {
        let mut v = phi[[p, a]] * phi[[q, b]];
        if p != q {
            v += phi[[q, a]] * phi[[p, b]];
        }
        v
    };
    let t = ctx.t_low();
    let mut design = Vec::new();
    let mut rhs = Vec::new();
    for x in 0..n {
        for y in 0..n {
            for z in 0..n {
                for &pq in &params {
                    design.push(basis(pq, x, y) * c[z] + basis(pq, y, z) * c[x] + basis(pq, z, x) * c[y]);
                }
                rhs.push(t[[x, y, z]]);
            }
        }
    }
    let s = least_squares(n * n * n, params.len(), &design, &rhs);
    let a = Array2::from_shape_fn((n, n), |(i, j)| params.iter().zip(&s).map(|(&pq, v)| v * basis(pq, i, j)).sum());
    let fit = cyclic(&a, &c, n);
    SampleResult::plain(rel_residual(&t, &fit)).with("a", a.iter().copied().collect())
}

/// `P♭(X,Y,Z,W) = α(Z)T♭(X,Y,W) − α(W)T♭(X,Y,Z)`
fn p2_like(ctx: &ClassifyPoint) -> SampleResult {
    let n = ctx.n;
    let t = &ctx.m.c3;
    let mut design = Vec::new();
    let mut rhs = Vec::new();
    for ix in crate::tensor::multi_indices(n, 4) {
        let (x, y, z, w) = (ix[0], ix[1], ix[2], ix[3]);
        for c in 0..n {
            design.push(delta(c, z) * t[[x, y, w]] - delta(c, w) * t[[x, y, z]]);
        }
        rhs.push(ctx.p_low[ix.as_slice()]);
    }
    let alpha = least_squares(n.pow(4), n, &design, &rhs);
    let fit = array_from_fn(n, 4, |ix| alpha[ix[2]] * t[[ix[0], ix[1], ix[3]]] - alpha[ix[3]] * t[[ix[0], ix[1], ix[2]]]);
    SampleResult::plain(rel_residual(&ctx.p_low, &fit)).with("alpha", alpha)
}

/// Adds the spread of the fitted `k` across samples to each residual.
pub(super) fn constant_curvature_spread(results: &mut [SampleResult]) {
    let ks: Vec<f64> = results.iter().filter(|r| r.residual.is_some()).filter_map(|r| r.fitted.get("k").map(|k| k[0])).collect();
    if ks.is_empty() {
        return;
    }
    let mean = ks.iter().sum::<f64>() / ks.len() as f64;
    for r in results.iter_mut() {
        if let (Some(res), Some(k)) = (r.residual, r.fitted.get("k").map(|k| k[0])) {
            r.residual = Some(res.max(rel_diff(k, mean)));
        }
    }
}
