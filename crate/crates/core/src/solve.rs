//! Saddle-point solve, error norms, multiplier diagnostic and field sampling.

use alloc::vec;
use alloc::vec::Vec;

use nalgebra::{DMatrix, DVector};

use crate::assembly::{element_rule, eval_point, interface_rule, patch_elements, ManufacturedSolution, SaddleSystem};
use crate::error::{Error, Result};
use crate::geometry::{ParamDerivs, PhysicalDerivs};
use crate::linalg::{norm_inf, CsrMatrix, SkylineCholesky};
use crate::quadrature::gauss_legendre;
use crate::spaces::{ConstraintMap, Discretization, MultiplierSpaceHandle};
use crate::topology::InterfaceFrame;
#[allow(unused_imports)]
use num_traits::Float;

/// Normwise backward error accepted for the block system.
pub const RESIDUAL_TOL: f64 = 1e-10;
/// Relative eigenvalue threshold of the multiplier Schur complement.
pub const RANK_TOL: f64 = 1e-11;

#[derive(Debug, Clone, PartialEq)]
pub struct SolutionField {
    pub reduced: Vec<f64>,
    /// `R u + g`, concatenated patch coefficients.
    pub full: Vec<f64>,
    pub tau: Vec<f64>,
    pub multiplier_offsets: Vec<usize>,
    /// Normwise backward error of the block system.
    pub residual: f64,
    /// `‖B_full u_full‖∞ / max(1, ‖u_full‖∞)`.
    pub constraint_residual: f64,
    pub multiplier_rank: usize,
    /// The stiffness block was singular and the augmented form was used.
    pub augmented: bool,
}

struct BlockSolver<'a> {
    a: CsrMatrix,
    b: &'a CsrMatrix,
    chol: SkylineCholesky,
    /// Eigenpairs of the Schur complement, restricted to its range.
    s_vecs: DMatrix<f64>,
    s_vals: Vec<f64>,
    rank: usize,
}

impl BlockSolver<'_> {
    fn solve(&self, r1: &[f64], r2: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let y = self.chol.solve(r1);
        let m = self.b.nrows;
        let mut tau = vec![0.0; m];
        if m > 0 {
            let by = self.b.mul_vec(&y);
            let rhs = DVector::from_iterator(m, by.iter().zip(r2).map(|(a, b)| a - b));
            let c = self.s_vecs.tr_mul(&rhs);
            let mut z = DVector::zeros(m);
            for k in 0..m {
                if k < self.rank {
                    z[k] = c[k] / self.s_vals[k];
                }
            }
            let t = &self.s_vecs * z;
            tau = t.iter().copied().collect();
        }
        let bt = self.b.tr_mul_vec(&tau);
        let r: Vec<f64> = r1.iter().zip(&bt).map(|(a, b)| a - b).collect();
        (self.chol.solve(&r), tau)
    }
}

fn augmented(a: &CsrMatrix, b: &CsrMatrix) -> (CsrMatrix, f64) {
    let mut trip = Vec::new();
    for r in 0..a.nrows {
        for (c, v) in a.row(r) {
            trip.push((r, c, v));
        }
    }
    let mut btb = Vec::new();
    for k in 0..b.nrows {
        let row: Vec<(usize, f64)> = b.row(k).collect();
        for &(i, x) in &row {
            for &(j, y) in &row {
                btb.push((i, j, x * y));
            }
        }
    }
    let btb = CsrMatrix::from_triplets(a.nrows, a.ncols, btb);
    let da = (0..a.nrows).map(|i| a.get(i, i).abs()).fold(0.0, f64::max);
    let db = (0..a.nrows).map(|i| btb.get(i, i).abs()).fold(0.0, f64::max);
    let gamma = if db > 0.0 { da / db } else { 1.0 };
    for r in 0..btb.nrows {
        for (c, v) in btb.row(r) {
            trip.push((r, c, gamma * v));
        }
    }
    (CsrMatrix::from_triplets(a.nrows, a.ncols, trip), gamma)
}

/// Solves `[[A, Bᵀ], [B, 0]] [u; τ] = [f; g]` by a Cholesky factorization
/// of `A` and a dense eigendecomposition of the Schur complement
/// `B A⁻¹ Bᵀ`, followed by iterative refinement.
pub fn solve_saddle(sys: &SaddleSystem, cmap: &ConstraintMap) -> Result<SolutionField> {
    let n = sys.a.nrows;
    let m = sys.b.nrows;
    let singular = |_| Error::SingularSystem { rank: 0, size: n + m };
    let (a, f, aug, chol) = match SkylineCholesky::new(&sys.a) {
        Ok(c) => (sys.a.clone(), sys.rhs_f.clone(), false, c),
        Err(Error::NotPositiveDefinite { .. }) if m > 0 => {
            let (a2, gamma) = augmented(&sys.a, &sys.b);
            let btg = sys.b.tr_mul_vec(&sys.rhs_g);
            let f2 = sys.rhs_f.iter().zip(&btg).map(|(x, y)| x + gamma * y).collect();
            let c = SkylineCholesky::new(&a2).map_err(singular)?;
            (a2, f2, true, c)
        }
        Err(e) => return Err(e),
    };

    let mut s = DMatrix::<f64>::zeros(m, m);
    for k in 0..m {
        let mut e = vec![0.0; m];
        e[k] = 1.0;
        let col = chol.solve(&sys.b.tr_mul_vec(&e));
        let sc = sys.b.mul_vec(&col);
        for (i, v) in sc.into_iter().enumerate() {
            s[(i, k)] = v;
        }
    }
    let s = (&s + s.transpose()) * 0.5;
    // nalgebra rejects empty matrices; without multipliers there is nothing to decompose
    let (s_vals, s_vecs) = if m == 0 {
        (Vec::new(), DMatrix::zeros(0, 0))
    } else {
        let eig = s.symmetric_eigen();
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
        let vals = order.iter().map(|&i| eig.eigenvalues[i]).collect();
        (vals, DMatrix::from_fn(m, m, |i, k| eig.eigenvectors[(i, order[k])]))
    };
    let lmax = s_vals.first().copied().unwrap_or(0.0);
    let rank = s_vals.iter().filter(|&&v| v > RANK_TOL * lmax).count();
    if rank < m && !sys.allow_rank_deficient {
        return Err(Error::SingularSystem {
            rank: n + rank,
            size: n + m,
        });
    }
    let solver = BlockSolver {
        a,
        b: &sys.b,
        chol,
        s_vecs,
        s_vals,
        rank,
    };

    let (mut u, mut tau) = solver.solve(&f, &sys.rhs_g);
    let residual = |u: &[f64], tau: &[f64]| -> (Vec<f64>, Vec<f64>) {
        let au = solver.a.mul_vec(u);
        let bt = solver.b.tr_mul_vec(tau);
        let r1 = f.iter().zip(&au).zip(&bt).map(|((f, a), b)| f - a - b).collect();
        let bu = solver.b.mul_vec(u);
        let r2 = sys.rhs_g.iter().zip(&bu).map(|(g, b)| g - b).collect();
        (r1, r2)
    };
    for _ in 0..2 {
        let (r1, r2) = residual(&u, &tau);
        let (du, dt) = solver.solve(&r1, &r2);
        u.iter_mut().zip(&du).for_each(|(x, d)| *x += d);
        tau.iter_mut().zip(&dt).for_each(|(x, d)| *x += d);
    }
    let (r1, r2) = residual(&u, &tau);
    let norm_k = {
        let bt = sys.b.transpose();
        let top = (0..n)
            .map(|r| solver.a.row(r).map(|(_, v)| v.abs()).sum::<f64>() + bt.row(r).map(|(_, v)| v.abs()).sum::<f64>())
            .fold(0.0, f64::max);
        top.max(sys.b.norm_inf())
    };
    let x_norm = norm_inf(&u).max(norm_inf(&tau));
    let rhs_norm = norm_inf(&f).max(norm_inf(&sys.rhs_g));
    let r_norm = norm_inf(&r1).max(norm_inf(&r2));
    let denom = norm_k * x_norm + rhs_norm;
    let backward = if denom > 0.0 { r_norm / denom } else { r_norm };
    if !(backward <= RESIDUAL_TOL) {
        return Err(Error::ResidualTooLarge {
            residual: backward,
            tolerance: RESIDUAL_TOL,
        });
    }
    let full = cmap.expand(&u, Some(&sys.lifting));
    let jump = sys.b_full.mul_vec(&full);
    let constraint_residual = norm_inf(&jump) / norm_inf(&full).max(1.0);
    Ok(SolutionField {
        reduced: u,
        full,
        tau,
        multiplier_offsets: sys.multiplier_offsets.clone(),
        residual: backward,
        constraint_residual,
        multiplier_rank: rank,
        augmented: aug,
    })
}

/// Relative errors in the patchwise norms.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport {
    pub h: f64,
    pub dofs: usize,
    pub broken_h2: f64,
    pub h1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// Value and physical derivatives of the field with coefficients `full`.
pub fn eval_field(
    disc: &Discretization,
    full: &[f64],
    patch: usize,
    u: f64,
    v: f64,
) -> Result<(PhysicalDerivs, [f64; 2])> {
    let jet = disc.topology.patches[patch].eval(u, v)?;
    let tb = disc.spaces[patch].eval(u, v, 2)?;
    let mut d: ParamDerivs = [0.0; 6];
    for (a, b, i, j) in tb.active() {
        let c = full[disc.global(patch, i, j)];
        for (acc, x) in d.iter_mut().zip(tb.param_derivs(a, b)) {
            *acc += c * x;
        }
    }
    Ok((jet.physical(&d), jet.point))
}

/// Relative `𝓗²`, `H¹`, `L²` errors by Gauss quadrature with `p+2` points
/// and relative `L∞` on a 5×5 grid per element.
pub fn compute_errors(
    disc: &Discretization,
    full: &[f64],
    exact: &ManufacturedSolution,
    dofs: usize,
) -> Result<ErrorReport> {
    let rule = gauss_legendre(disc.degree + 2)?;
    let mut e = [0.0f64; 3];
    let mut r = [0.0f64; 3];
    let mut linf = (0.0f64, 0.0f64);
    for patch in 0..disc.spaces.len() {
        for (eu, ev) in patch_elements(disc, patch) {
            for (u, v, w) in element_rule(&rule, eu, ev) {
                let pe = eval_point(disc, patch, u, v)?;
                let uh = pe
                    .dofs
                    .iter()
                    .zip(&pe.derivs)
                    .fold(PhysicalDerivs::default(), |mut acc, (&d, pd)| {
                        let c = full[d];
                        acc.value += c * pd.value;
                        for k in 0..2 {
                            acc.grad[k] += c * pd.grad[k];
                        }
                        for k in 0..3 {
                            acc.hess[k] += c * pd.hess[k];
                        }
                        acc
                    });
                let ex = exact.eval(pe.x);
                let wd = w * pe.jet.det;
                let dv = ex.value - uh.value;
                let dg = [ex.grad[0] - uh.grad[0], ex.grad[1] - uh.grad[1]];
                let dh = [
                    ex.hess[0] - uh.hess[0],
                    ex.hess[1] - uh.hess[1],
                    ex.hess[2] - uh.hess[2],
                ];
                e[0] += wd * dv * dv;
                e[1] += wd * (dg[0] * dg[0] + dg[1] * dg[1]);
                e[2] += wd * (dh[0] * dh[0] + 2.0 * dh[1] * dh[1] + dh[2] * dh[2]);
                r[0] += wd * ex.value * ex.value;
                r[1] += wd * (ex.grad[0] * ex.grad[0] + ex.grad[1] * ex.grad[1]);
                r[2] += wd * (ex.hess[0] * ex.hess[0] + 2.0 * ex.hess[1] * ex.hess[1] + ex.hess[2] * ex.hess[2]);
            }
            for a in 0..5 {
                for b in 0..5 {
                    let u = eu.0 + (eu.1 - eu.0) * a as f64 / 4.0;
                    let v = ev.0 + (ev.1 - ev.0) * b as f64 / 4.0;
                    let (uh, x) = eval_field(disc, full, patch, u, v)?;
                    let ex = exact.eval(x).value;
                    linf.0 = linf.0.max((ex - uh.value).abs());
                    linf.1 = linf.1.max(ex.abs());
                }
            }
        }
    }
    let rel = |num: f64, den: f64| if den > 0.0 { (num / den).sqrt() } else { num.sqrt() };
    Ok(ErrorReport {
        h: disc.physical_mesh_size()?,
        dofs,
        l2: rel(e[0], r[0]),
        h1: rel(e[0] + e[1], r[0] + r[1]),
        broken_h2: rel(e[0] + e[1] + e[2], r[0] + r[1] + r[2]),
        linf: if linf.1 > 0.0 { linf.0 / linf.1 } else { linf.0 },
    })
}

/// `∂ₜₜu − Δu` on the interface at `frame`, with `t` the unit tangent.
pub fn multiplier_target(exact: &ManufacturedSolution, frame: &InterfaceFrame) -> f64 {
    let ex = exact.eval(frame.point);
    let t = [frame.tangent[0] / frame.rho, frame.tangent[1] / frame.rho];
    let dtt = ex.hess[0] * t[0] * t[0] + 2.0 * ex.hess[1] * t[0] * t[1] + ex.hess[2] * t[1] * t[1];
    dtt - ex.laplacian
}

/// Relative `L²(Γ_ℓ)` distance between `τ_h` and the multiplier of the
/// continuous problem. With the jump taken secondary minus primary and
/// the normal outward from the primary patch, that multiplier is
/// `Δu − ∂ₜₜu`.
pub fn multiplier_diagnostic(
    disc: &Discretization,
    sol: &SolutionField,
    mults: &[MultiplierSpaceHandle],
    exact: &ManufacturedSolution,
    l: usize,
) -> Result<f64> {
    let Some(kv) = &mults[l].knots else {
        return Ok(f64::NAN);
    };
    let off = sol.multiplier_offsets[l];
    let mut num = 0.0;
    let mut den = 0.0;
    for (y, w) in interface_rule(disc, l, disc.degree + 2)? {
        let frame = disc.topology.interface_frame(l, y)?;
        let be = kv.eval(y, 0)?;
        let tau: f64 = be.indices().zip(be.values()).map(|(r, v)| sol.tau[off + r] * v).sum();
        let target = -multiplier_target(exact, &frame);
        num += w * (tau - target).powi(2);
        den += w * target * target;
    }
    Ok(if den > 0.0 { (num / den).sqrt() } else { num.sqrt() })
}

/// Structured sample grid of one patch, `u` fastest.
#[derive(Debug, Clone, PartialEq)]
pub struct PatchSamples {
    pub patch: usize,
    pub nu: usize,
    pub nv: usize,
    /// `(x, y, u_h, u_ex)`.
    pub points: Vec<[f64; 4]>,
}

/// Samples `u_h` and `u_ex` on `per_element` points per element edge;
/// shared element edges are not duplicated.
pub fn sample_field(
    disc: &Discretization,
    full: &[f64],
    exact: &ManufacturedSolution,
    per_element: usize,
) -> Result<Vec<PatchSamples>> {
    let per = per_element.max(2);
    let axis = |bp: &[f64]| -> Vec<f64> {
        let mut out = vec![bp[0]];
        for w in bp.windows(2) {
            for k in 1..per {
                out.push(w[0] + (w[1] - w[0]) * k as f64 / (per - 1) as f64);
            }
        }
        out
    };
    let mut out = Vec::new();
    for patch in 0..disc.spaces.len() {
        let us = axis(&disc.spaces[patch].u.breakpoints());
        let vs = axis(&disc.spaces[patch].v.breakpoints());
        let mut points = Vec::with_capacity(us.len() * vs.len());
        for &v in &vs {
            for &u in &us {
                let (uh, x) = eval_field(disc, full, patch, u, v)?;
                points.push([x[0], x[1], uh.value, exact.eval(x).value]);
            }
        }
        out.push(PatchSamples {
            patch,
            nu: us.len(),
            nv: vs.len(),
            points,
        });
    }
    Ok(out)
}
