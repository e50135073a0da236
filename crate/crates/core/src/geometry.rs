//! Tensor-product spline spaces and (rational) patch geometry maps.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::bspline::{BasisEval, KnotVector};
use crate::error::{Error, Result};
#[allow(unused_imports)]
use num_traits::Float;

pub type Point = [f64; 2];

/// Parametric derivatives of a scalar field: value, `∂u`, `∂v`, `∂uu`,
/// `∂uv`, `∂vv`.
pub type ParamDerivs = [f64; 6];

/// Physical value, gradient and Hessian `(xx, xy, yy)` of a scalar field.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PhysicalDerivs {
    pub value: f64,
    pub grad: [f64; 2],
    pub hess: [f64; 3],
}

/// Tensor product of two univariate spaces. Flat index `j * n_u + i`.
#[derive(Debug, Clone, PartialEq)]
pub struct TensorSpace2D {
    pub u: KnotVector,
    pub v: KnotVector,
}

impl TensorSpace2D {
    pub fn new(u: KnotVector, v: KnotVector) -> Self {
        TensorSpace2D { u, v }
    }

    pub fn n_u(&self) -> usize {
        self.u.dimension()
    }

    pub fn n_v(&self) -> usize {
        self.v.dimension()
    }

    pub fn dimension(&self) -> usize {
        self.n_u() * self.n_v()
    }

    pub fn flatten(&self, i: usize, j: usize) -> usize {
        j * self.n_u() + i
    }

    pub fn unflatten(&self, k: usize) -> (usize, usize) {
        (k % self.n_u(), k / self.n_u())
    }

    pub fn num_elements(&self) -> usize {
        self.u.num_elements() * self.v.num_elements()
    }

    /// Largest parametric element edge.
    pub fn mesh_size(&self) -> f64 {
        self.u.mesh_size().max(self.v.mesh_size())
    }

    pub fn refine_uniform(&self, levels: usize) -> Self {
        TensorSpace2D {
            u: self.u.refine_uniform(levels),
            v: self.v.refine_uniform(levels),
        }
    }

    /// Same mesh, degree `p` in both directions, maximal smoothness.
    pub fn with_degree(&self, p: usize) -> Result<Self> {
        Ok(TensorSpace2D {
            u: self.u.with_degree(p)?,
            v: self.v.with_degree(p)?,
        })
    }

    pub fn eval(&self, u: f64, v: f64, max_deriv: usize) -> Result<TensorBasisEval> {
        Ok(TensorBasisEval {
            bu: self.u.eval(u, max_deriv)?,
            bv: self.v.eval(v, max_deriv)?,
        })
    }
}

/// Active tensor-product basis functions at one parametric point.
#[derive(Debug, Clone)]
pub struct TensorBasisEval {
    pub bu: BasisEval,
    pub bv: BasisEval,
}

impl TensorBasisEval {
    /// Parametric derivatives of the product function with local indices
    /// `(a, b)`; needs second derivatives in both directions.
    pub fn param_derivs(&self, a: usize, b: usize) -> ParamDerivs {
        let u = |k: usize| self.bu.ders.get(k).map_or(0.0, |r| r[a]);
        let v = |k: usize| self.bv.ders.get(k).map_or(0.0, |r| r[b]);
        [
            u(0) * v(0),
            u(1) * v(0),
            u(0) * v(1),
            u(2) * v(0),
            u(1) * v(1),
            u(0) * v(2),
        ]
    }

    /// `(local a, local b, global i, global j)` for every active function.
    pub fn active(&self) -> impl Iterator<Item = (usize, usize, usize, usize)> + '_ {
        let (fu, fv) = (self.bu.first, self.bv.first);
        (0..self.bv.len()).flat_map(move |b| (0..self.bu.len()).map(move |a| (a, b, fu + a, fv + b)))
    }
}

/// Value and first/second derivatives of a patch map at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeometryJet {
    pub point: Point,
    /// `jac[a][b] = ∂x_a / ∂x̂_b`.
    pub jac: [[f64; 2]; 2],
    /// `hess[a][b][c] = ∂²x_a / ∂x̂_b ∂x̂_c`.
    pub hess: [[[f64; 2]; 2]; 2],
    pub det: f64,
    pub inv: [[f64; 2]; 2],
}

impl GeometryJet {
    fn from_parts(point: Point, jac: [[f64; 2]; 2], hess: [[[f64; 2]; 2]; 2]) -> Result<Self> {
        let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
        let scale = jac.iter().flatten().map(|v| v * v).sum::<f64>();
        if !(det > 1e-12 * scale) || !det.is_finite() {
            return Err(Error::DegenerateJacobian { det });
        }
        let inv = [[jac[1][1] / det, -jac[0][1] / det], [-jac[1][0] / det, jac[0][0] / det]];
        Ok(GeometryJet {
            point,
            jac,
            hess,
            det,
            inv,
        })
    }

    /// Chain rule for value, gradient and Hessian of `φ̂ ∘ F⁻¹`.
    pub fn physical(&self, d: &ParamDerivs) -> PhysicalDerivs {
        let inv = &self.inv;
        let g_hat = [d[1], d[2]];
        let grad = [
            inv[0][0] * g_hat[0] + inv[1][0] * g_hat[1],
            inv[0][1] * g_hat[0] + inv[1][1] * g_hat[1],
        ];
        // parametric Hessian minus the geometry curvature part
        let mut m = [[d[3], d[4]], [d[4], d[5]]];
        for (a, ga) in grad.iter().enumerate() {
            for b in 0..2 {
                for c in 0..2 {
                    m[b][c] -= ga * self.hess[a][b][c];
                }
            }
        }
        let h = |a: usize, e: usize| {
            let mut s = 0.0;
            for b in 0..2 {
                for c in 0..2 {
                    s += inv[b][a] * m[b][c] * inv[c][e];
                }
            }
            s
        };
        PhysicalDerivs {
            value: d[0],
            grad,
            hess: [h(0, 0), h(0, 1), h(1, 1)],
        }
    }
}

/// A patch map `F: [0,1]² → ℝ²` given by control points and optional
/// weights.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchGeometry {
    pub space: TensorSpace2D,
    pub control_points: Vec<Point>,
    pub weights: Option<Vec<f64>>,
}

impl PatchGeometry {
    pub fn new(space: TensorSpace2D, control_points: Vec<Point>, weights: Option<Vec<f64>>) -> Result<Self> {
        let n = space.dimension();
        if control_points.len() != n {
            return Err(Error::InvalidGeometry(format!(
                "expected {n} control points, got {}",
                control_points.len()
            )));
        }
        if let Some(w) = &weights {
            if w.len() != n {
                return Err(Error::InvalidGeometry(format!("expected {n} weights, got {}", w.len())));
            }
            if w.iter().any(|&wi| !(wi > 0.0)) {
                return Err(Error::InvalidGeometry("weights must be positive".into()));
            }
        }
        Ok(PatchGeometry {
            space,
            control_points,
            weights,
        })
    }

    pub fn is_rational(&self) -> bool {
        self.weights.is_some()
    }

    fn weight(&self, k: usize) -> f64 {
        self.weights.as_ref().map_or(1.0, |w| w[k])
    }

    /// Point, Jacobian and second derivatives at `(u, v)`.
    pub fn eval(&self, u: f64, v: f64) -> Result<GeometryJet> {
        let (point, jac, hess) = self.eval_raw(u, v)?;
        GeometryJet::from_parts(point, jac, hess)
    }

    /// Mapped point only; no Jacobian check.
    pub fn point(&self, u: f64, v: f64) -> Result<Point> {
        Ok(self.eval_raw(u, v)?.0)
    }

    #[allow(clippy::type_complexity)]
    fn eval_raw(&self, u: f64, v: f64) -> Result<(Point, [[f64; 2]; 2], [[[f64; 2]; 2]; 2])> {
        let tb = self.space.eval(u, v, 2)?;
        // homogeneous sums: [x, y, w] for each derivative slot
        let mut s = [[0.0f64; 3]; 6];
        for (a, b, i, j) in tb.active() {
            let k = self.space.flatten(i, j);
            let w = self.weight(k);
            let cp = self.control_points[k];
            let d = tb.param_derivs(a, b);
            for (slot, dv) in s.iter_mut().zip(d) {
                slot[0] += dv * w * cp[0];
                slot[1] += dv * w * cp[1];
                slot[2] += dv * w;
            }
        }
        let w = s[0][2];
        let (wu, wv, wuu, wuv, wvv) = (s[1][2], s[2][2], s[3][2], s[4][2], s[5][2]);
        let mut point = [0.0; 2];
        let mut jac = [[0.0; 2]; 2];
        let mut hess = [[[0.0; 2]; 2]; 2];
        for a in 0..2 {
            let f = s[0][a] / w;
            let fu = (s[1][a] - wu * f) / w;
            let fv = (s[2][a] - wv * f) / w;
            let fuu = (s[3][a] - 2.0 * wu * fu - wuu * f) / w;
            let fuv = (s[4][a] - wu * fv - wv * fu - wuv * f) / w;
            let fvv = (s[5][a] - 2.0 * wv * fv - wvv * f) / w;
            point[a] = f;
            jac[a] = [fu, fv];
            hess[a] = [[fuu, fuv], [fuv, fvv]];
        }
        Ok((point, jac, hess))
    }

    /// Exact refinement: every span bisected `levels` times by knot
    /// insertion on the homogeneous control net.
    pub fn refine_uniform(&self, levels: usize) -> Result<Self> {
        let mut geo = self.clone();
        for _ in 0..levels {
            let mids_u = midpoints(&geo.space.u);
            let mids_v = midpoints(&geo.space.v);
            for t in mids_u {
                geo = geo.insert_knot_u(t)?;
            }
            for t in mids_v {
                geo = geo.transposed().insert_knot_u(t)?.transposed();
            }
        }
        Ok(geo)
    }

    fn homogeneous(&self) -> Vec<[f64; 3]> {
        self.control_points
            .iter()
            .enumerate()
            .map(|(k, p)| {
                let w = self.weight(k);
                [p[0] * w, p[1] * w, w]
            })
            .collect()
    }

    fn from_homogeneous(space: TensorSpace2D, h: Vec<[f64; 3]>, rational: bool) -> Result<Self> {
        let cps = h.iter().map(|c| [c[0] / c[2], c[1] / c[2]]).collect();
        let weights = rational.then(|| h.iter().map(|c| c[2]).collect());
        PatchGeometry::new(space, cps, weights)
    }

    fn transposed(&self) -> Self {
        let (nu, nv) = (self.space.n_u(), self.space.n_v());
        let mut cps = Vec::with_capacity(nu * nv);
        let mut ws = Vec::with_capacity(nu * nv);
        for i in 0..nu {
            for j in 0..nv {
                let k = self.space.flatten(i, j);
                cps.push(self.control_points[k]);
                ws.push(self.weight(k));
            }
        }
        PatchGeometry {
            space: TensorSpace2D::new(self.space.v.clone(), self.space.u.clone()),
            control_points: cps,
            weights: self.weights.as_ref().map(|_| ws),
        }
    }

    fn insert_knot_u(&self, t: f64) -> Result<Self> {
        let h = self.homogeneous();
        let (nu, nv) = (self.space.n_u(), self.space.n_v());
        let mut out = Vec::with_capacity((nu + 1) * nv);
        let mut new_kv = None;
        for j in 0..nv {
            let row: Vec<[f64; 3]> = (0..nu).map(|i| h[j * nu + i]).collect();
            let (kv, q) = insert_knot(&self.space.u, &row, t)?;
            out.extend(q);
            new_kv = Some(kv);
        }
        let space = TensorSpace2D::new(new_kv.unwrap(), self.space.v.clone());
        Self::from_homogeneous(space, out, self.is_rational())
    }

    /// Boundary control polygon along `side`, ordered by the tangential
    /// parameter, as homogeneous triples.
    pub fn side_coefficients(&self, side: crate::topology::Side) -> Vec<(Point, f64)> {
        let (nu, nv) = (self.space.n_u(), self.space.n_v());
        let len = side.tangential_len(nu, nv);
        (0..len)
            .map(|k| {
                let (i, j) = side.dof(nu, nv, 0, k);
                let idx = self.space.flatten(i, j);
                (self.control_points[idx], self.weight(idx))
            })
            .collect()
    }
}

fn midpoints(kv: &KnotVector) -> Vec<f64> {
    kv.breakpoints().windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Single knot insertion (Boehm) on a coefficient sequence.
pub fn insert_knot(kv: &KnotVector, coeffs: &[[f64; 3]], t: f64) -> Result<(KnotVector, Vec<[f64; 3]>)> {
    let p = kv.degree();
    let knots = kv.knots();
    let k = kv.find_span(t)?;
    let n = coeffs.len();
    let mut q = Vec::with_capacity(n + 1);
    for i in 0..=n {
        let alpha = if i + p <= k {
            1.0
        } else if i > k {
            0.0
        } else {
            (t - knots[i]) / (knots[i + p] - knots[i])
        };
        let cur = if i < n { coeffs[i] } else { [0.0; 3] };
        let prev = if i > 0 { coeffs[i - 1] } else { [0.0; 3] };
        q.push([
            alpha * cur[0] + (1.0 - alpha) * prev[0],
            alpha * cur[1] + (1.0 - alpha) * prev[1],
            alpha * cur[2] + (1.0 - alpha) * prev[2],
        ]);
    }
    let mut new_knots = knots.to_vec();
    new_knots.insert(k + 1, t);
    Ok((KnotVector::new(p, new_knots)?, q))
}

/// Greville abscissae of a knot vector.
pub fn greville(kv: &KnotVector) -> Vec<f64> {
    let p = kv.degree();
    let k = kv.knots();
    (0..kv.dimension())
        .map(|i| {
            if p == 0 {
                0.5 * (k[i] + k[i + 1])
            } else {
                k[i + 1..=i + p].iter().sum::<f64>() / p as f64
            }
        })
        .collect()
}

/// Bilinear patch through four corners `(sw, se, nw, ne)`.
pub fn bilinear_patch(sw: Point, se: Point, nw: Point, ne: Point) -> PatchGeometry {
    let kv = KnotVector::uniform(1, 1).expect("valid degree-1 vector");
    PatchGeometry::new(TensorSpace2D::new(kv.clone(), kv), vec![sw, se, nw, ne], None).expect("four control points")
}
