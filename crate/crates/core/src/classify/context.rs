use ndarray::{Array2, ArrayD};

use crate::connection::{ConnectionKind, Direction, LocalGeometry};
use crate::curvature::{curvature_jets, lower, ricci_scalars, CurvatureMethod, CurvaturePack, RicciScalars};
use crate::error::{FinslerError, Result};
use crate::jets::{Point, ScalarField};
use crate::metric::{FinslerStructure, MetricAtPoint};
use crate::tensor::{JetTensor, Slot};

const UDD: [Slot; 3] = [Slot::Up, Slot::Down, Slot::Down];
const UDDD: [Slot; 4] = [Slot::Up, Slot::Down, Slot::Down, Slot::Down];

/// Everything the predicates read at one sample, as floats.
#[derive(Debug, Clone)]
pub struct ClassifyPoint {
    pub n: usize,
    pub y: Vec<f64>,
    pub m: MetricAtPoint,
    pub cartan: CurvaturePack,
    pub berwald: CurvaturePack,
    pub scalars: RicciScalars,
    /// `g(R(X,Y)Z,W)` for Cartan `R`, `[x][y][z][w]`.
    pub r_low: ArrayD<f64>,
    pub s_low: ArrayD<f64>,
    pub p_low: ArrayD<f64>,
    /// Cartan `∇_β T`, `[i][y][z][x]`.
    pub dh_t: ArrayD<f64>,
    /// Cartan `∇_γ T`.
    pub dv_t: ArrayD<f64>,
    /// Berwald `D°_γ T`.
    pub dv0_t: ArrayD<f64>,
    /// Cartan `∇_γ S`, `[i][z][x][y][w]`.
    pub dv_s: ArrayD<f64>,
    /// Berwald `D°_β R°`, present when sixth derivatives were requested.
    pub dh0_r0: Option<ArrayD<f64>>,
}

impl ClassifyPoint {
    pub fn compute(f: &FinslerStructure, p: &Point, order_six: bool) -> Result<Self> {
        f.check_domain(p)?;
        let geom = LocalGeometry::compute(f, p, if order_six { 6 } else { 5 })?;
        let m = MetricAtPoint::from_jets(&geom.metric);
        let min_eig = m.min_eigenvalue();
        if !(min_eig > 0.0) {
            return Err(FinslerError::Convexity { min_eigenvalue: min_eig });
        }
        let n = geom.n();
        let cconn = geom.connection(ConnectionKind::Cartan);
        let bconn = geom.connection(ConnectionKind::Berwald);
        let cj = curvature_jets(&geom, &cconn, CurvatureMethod::Index);
        let bj = curvature_jets(&geom, &bconn, CurvatureMethod::Index);
        let cartan = CurvaturePack::from_jets(ConnectionKind::Cartan, &cj);
        let berwald = CurvaturePack::from_jets(ConnectionKind::Berwald, &bj);
        let t: &JetTensor = &geom.metric.t;
        let dh_t = cconn.cov_deriv(&geom, t, &UDD, Direction::Horizontal).values();
        let dv_t = cconn.cov_deriv(&geom, t, &UDD, Direction::Vertical).values();
        let dv0_t = bconn.cov_deriv(&geom, t, &UDD, Direction::Vertical).values();
        let dv_s = cconn.cov_deriv(&geom, &cj.s, &UDDD, Direction::Vertical).values();
        let dh0_r0 = order_six.then(|| bconn.cov_deriv(&geom, &bj.r, &UDDD, Direction::Horizontal).values());
        let scalars = ricci_scalars(&cartan, &m.g_inv);
        let r_low = lower(&cartan.r, &m.g);
        let s_low = lower(&cartan.s, &m.g);
        let p_low = lower(&cartan.p, &m.g);
        Ok(Self {
            n,
            y: p.y.clone(),
            m,
            cartan,
            berwald,
            scalars,
            r_low,
            s_low,
            p_low,
            dh_t,
            dv_t,
            dv0_t,
            dv_s,
            dh0_r0,
        })
    }

    /// `T♭` as a dynamic array.
    pub fn t_low(&self) -> ArrayD<f64> {
        self.m.c3.clone().into_dyn()
    }

    pub fn t_mixed(&self) -> ArrayD<f64> {
        self.m.t_mixed.clone().into_dyn()
    }

    /// `∇_{βη} T`, `[i][y][z]`.
    pub fn dh_t_eta(&self) -> ArrayD<f64> {
        let n = self.n;
        crate::tensor::array_from_fn(n, 3, |ix| (0..n).map(|k| self.dh_t[[ix[0], ix[1], ix[2], k]] * self.y[k]).sum())
    }

    /// `∇_{βη} C` as a covector, using that `∇` commutes with the trace.
    pub fn dh_c_eta(&self) -> Vec<f64> {
        let n = self.n;
        let d = self.dh_t_eta();
        // C(X) = Tr(Y ↦ T(X,Y)) and T is symmetric in its lower slots
        (0..n).map(|x| (0..n).map(|m| d[[m, x, m]]).sum()).collect()
    }

    /// `P̂(X,Y) = P(X,Y)η`, `[i][x][y]`.
    pub fn p_hat(&self) -> ArrayD<f64> {
        let n = self.n;
        crate::tensor::array_from_fn(n, 3, |ix| {
            (0..n).map(|z| self.cartan.p[[ix[0], z, ix[1], ix[2]]] * self.y[z]).sum()
        })
    }

    /// `R̂(X,Y) = R(X,Y)η` for Cartan `R`.
    pub fn r_hat(&self) -> ArrayD<f64> {
        let n = self.n;
        crate::tensor::array_from_fn(n, 3, |ix| {
            (0..n).map(|z| self.cartan.r[[ix[0], z, ix[1], ix[2]]] * self.y[z]).sum()
        })
    }

    /// `φᵃₓ = δᵃₓ − L⁻¹ℓₓyᵃ`
    pub fn phi(&self) -> Array2<f64> {
        let n = self.n;
        Array2::from_shape_fn((n, n), |(a, x)| {
            let d = if a == x { 1.0 } else { 0.0 };
            d - self.m.ell[x] * self.y[a] / self.m.l
        })
    }
}
