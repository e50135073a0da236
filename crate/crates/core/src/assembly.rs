//! Stiffness, load, mortar coupling and boundary lifting.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{GeometryJet, PhysicalDerivs, Point};
use crate::linalg::{eliminate, CsrMatrix, SkylineCholesky};
use crate::quadrature::{gauss_legendre, QuadratureRule1D};
use crate::spaces::{merge_row, ConstraintMap, Discretization, MultiplierSpaceHandle, ELIMINATION_TOL};
use crate::topology::{jacobian_column, InterfaceFrame, SideRef};
#[allow(unused_imports)]
use num_traits::Float;

/// Exact solution data at one point.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct ExactJet {
    pub value: f64,
    pub grad: [f64; 2],
    /// `(xx, xy, yy)`.
    pub hess: [f64; 3],
    pub laplacian: f64,
    pub bilaplacian: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ManufacturedSolution {
    /// `cos(x) cos(y)`.
    CosCos,
    /// `xᵃ yᵇ`.
    Monomial {
        a: u32,
        b: u32,
    },
    /// `x² y² (1 - x² - y²)²`, clamped on the unit quarter disk.
    Bubble,
    Zero,
}

const BUBBLE: [(f64, u32, u32); 6] = [
    (1.0, 2, 2),
    (-2.0, 4, 2),
    (-2.0, 2, 4),
    (1.0, 6, 2),
    (2.0, 4, 4),
    (1.0, 2, 6),
];

fn monomial_jet(c: f64, a: u32, b: u32, x: f64, y: f64) -> ExactJet {
    let dx = |k| mono_d(a, k, x);
    let dy = |k| mono_d(b, k, y);
    let hess = [c * dx(2) * dy(0), c * dx(1) * dy(1), c * dx(0) * dy(2)];
    ExactJet {
        value: c * dx(0) * dy(0),
        grad: [c * dx(1) * dy(0), c * dx(0) * dy(1)],
        hess,
        laplacian: hess[0] + hess[2],
        bilaplacian: c * (dx(4) * dy(0) + 2.0 * dx(2) * dy(2) + dx(0) * dy(4)),
    }
}

fn falling(a: u32, k: u32) -> f64 {
    (0..k).map(|i| (a as f64) - i as f64).product()
}

fn mono_d(a: u32, k: u32, x: f64) -> f64 {
    if k > a {
        0.0
    } else {
        falling(a, k) * x.powi((a - k) as i32)
    }
}

impl ManufacturedSolution {
    pub fn name(&self) -> alloc::string::String {
        match self {
            ManufacturedSolution::CosCos => "coscos".into(),
            ManufacturedSolution::Zero => "zero".into(),
            ManufacturedSolution::Bubble => "bubble".into(),
            ManufacturedSolution::Monomial { a, b } => alloc::format!("x{a}y{b}"),
        }
    }

    /// Accepts `coscos`, `bubble`, `zero` and `x<a>y<b>`.
    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "coscos" => Some(ManufacturedSolution::CosCos),
            "zero" => Some(ManufacturedSolution::Zero),
            "bubble" => Some(ManufacturedSolution::Bubble),
            _ => {
                let rest = s.strip_prefix('x')?;
                let (a, b) = rest.split_once('y')?;
                Some(ManufacturedSolution::Monomial {
                    a: a.parse().ok()?,
                    b: b.parse().ok()?,
                })
            }
        }
    }

    pub fn eval(&self, p: Point) -> ExactJet {
        let [x, y] = p;
        match *self {
            ManufacturedSolution::Zero => ExactJet::default(),
            ManufacturedSolution::CosCos => {
                let (cx, sx, cy, sy) = (x.cos(), x.sin(), y.cos(), y.sin());
                let u = cx * cy;
                ExactJet {
                    value: u,
                    grad: [-sx * cy, -cx * sy],
                    hess: [-u, sx * sy, -u],
                    laplacian: -2.0 * u,
                    bilaplacian: 4.0 * u,
                }
            }
            ManufacturedSolution::Monomial { a, b } => monomial_jet(1.0, a, b, x, y),
            ManufacturedSolution::Bubble => BUBBLE.iter().fold(ExactJet::default(), |acc, &(c, a, b)| {
                let t = monomial_jet(c, a, b, x, y);
                ExactJet {
                    value: acc.value + t.value,
                    grad: [acc.grad[0] + t.grad[0], acc.grad[1] + t.grad[1]],
                    hess: [
                        acc.hess[0] + t.hess[0],
                        acc.hess[1] + t.hess[1],
                        acc.hess[2] + t.hess[2],
                    ],
                    laplacian: acc.laplacian + t.laplacian,
                    bilaplacian: acc.bilaplacian + t.bilaplacian,
                }
            }),
        }
    }

    /// Load `f = Δ²u`.
    pub fn rhs(&self, p: Point) -> f64 {
        self.eval(p).bilaplacian
    }
}

/// Assembled saddle-point blocks in reduced coordinates.
#[derive(Debug, Clone)]
pub struct SaddleSystem {
    pub a: CsrMatrix,
    pub b: CsrMatrix,
    /// Coupling against full coefficient vectors.
    pub b_full: CsrMatrix,
    pub rhs_f: Vec<f64>,
    pub rhs_g: Vec<f64>,
    pub lifting: Vec<f64>,
    /// Row offsets of each interface's multipliers in `b`.
    pub multiplier_offsets: Vec<usize>,
    /// Rank-deficient coupling is solved with least-norm multipliers
    /// instead of being rejected.
    pub allow_rank_deficient: bool,
}

impl SaddleSystem {
    pub fn num_multipliers(&self) -> usize {
        self.b.nrows
    }
}

/// Physical basis derivatives of every active function at one point.
pub struct PointEval {
    pub x: Point,
    pub jet: GeometryJet,
    pub dofs: Vec<usize>,
    pub derivs: Vec<PhysicalDerivs>,
}

/// Evaluates all active basis functions of `patch` at `(u, v)`.
pub fn eval_point(disc: &Discretization, patch: usize, u: f64, v: f64) -> Result<PointEval> {
    let jet = disc.topology.patches[patch].eval(u, v)?;
    let tb = disc.spaces[patch].eval(u, v, 2)?;
    let mut dofs = Vec::with_capacity(tb.bu.len() * tb.bv.len());
    let mut derivs = Vec::with_capacity(dofs.capacity());
    for (a, b, i, j) in tb.active() {
        dofs.push(disc.global(patch, i, j));
        derivs.push(jet.physical(&tb.param_derivs(a, b)));
    }
    Ok(PointEval {
        x: jet.point,
        jet,
        dofs,
        derivs,
    })
}

/// Tensor Gauss points of one element: `(u, v, weight)` in parameter space.
pub fn element_rule(rule: &QuadratureRule1D, u: (f64, f64), v: (f64, f64)) -> Vec<(f64, f64, f64)> {
    let (nu, wu) = rule.mapped(u.0, u.1);
    let (nv, wv) = rule.mapped(v.0, v.1);
    let mut out = Vec::with_capacity(nu.len() * nv.len());
    for (y, wy) in nv.iter().zip(&wv) {
        for (x, wx) in nu.iter().zip(&wu) {
            out.push((*x, *y, wx * wy));
        }
    }
    out
}

/// Elements of a patch as parametric boxes, `u` fastest.
pub fn patch_elements(disc: &Discretization, patch: usize) -> Vec<((f64, f64), (f64, f64))> {
    let s = &disc.spaces[patch];
    let bu = s.u.breakpoints();
    let bv = s.v.breakpoints();
    let mut out = Vec::new();
    for wv in bv.windows(2) {
        for wu in bu.windows(2) {
            out.push(((wu[0], wu[1]), (wv[0], wv[1])));
        }
    }
    out
}

fn hess_inner(a: &PhysicalDerivs, b: &PhysicalDerivs) -> f64 {
    a.hess[0] * b.hess[0] + 2.0 * a.hess[1] * b.hess[1] + a.hess[2] * b.hess[2]
}

/// Reduced stiffness `RᵀAR` and load `Rᵀ(f − A g)`, assembled element by
/// element in patch order.
pub fn assemble_stiffness(
    disc: &Discretization,
    cmap: &ConstraintMap,
    exact: &ManufacturedSolution,
    lifting: &[f64],
    q: usize,
) -> Result<(CsrMatrix, Vec<f64>)> {
    let rule = gauss_legendre(q)?;
    let n = cmap.reduced_dim;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; n];
    for patch in 0..disc.spaces.len() {
        for (eu, ev) in patch_elements(disc, patch) {
            let mut dofs: Vec<usize> = Vec::new();
            let mut k_loc: Vec<f64> = Vec::new();
            let mut f_loc: Vec<f64> = Vec::new();
            for (u, v, w) in element_rule(&rule, eu, ev) {
                let pe = eval_point(disc, patch, u, v)?;
                if dofs.is_empty() {
                    dofs = pe.dofs.clone();
                    k_loc = vec![0.0; dofs.len() * dofs.len()];
                    f_loc = vec![0.0; dofs.len()];
                }
                let wd = w * pe.jet.det;
                let f = exact.rhs(pe.x);
                let m = dofs.len();
                for a in 0..m {
                    let da = &pe.derivs[a];
                    f_loc[a] += wd * f * da.value;
                    for b in a..m {
                        k_loc[a * m + b] += wd * hess_inner(da, &pe.derivs[b]);
                    }
                }
            }
            let m = dofs.len();
            for a in 0..m {
                for b in 0..a {
                    k_loc[a * m + b] = k_loc[b * m + a];
                }
            }
            for a in 0..m {
                let kg: f64 = (0..m).map(|b| k_loc[a * m + b] * lifting[dofs[b]]).sum();
                let ra = &cmap.rows[dofs[a]];
                for &(i, ci) in ra {
                    rhs[i] += ci * (f_loc[a] - kg);
                }
                for b in 0..m {
                    let kab = k_loc[a * m + b];
                    for &(i, ci) in ra {
                        for &(j, cj) in &cmap.rows[dofs[b]] {
                            trip.push((i, j, ci * cj * kab));
                        }
                    }
                }
            }
        }
    }
    Ok((CsrMatrix::from_triplets(n, n, trip), rhs))
}

/// Jump `⟦∂ₙφ⟧ = ∂ₙφ|secondary − ∂ₙφ|primary` of every basis function
/// active at primary parameter `y` of interface `l`.
pub fn normal_jump(disc: &Discretization, l: usize, y: f64) -> Result<(InterfaceFrame, Vec<(usize, f64)>)> {
    let frame = disc.topology.interface_frame(l, y)?;
    let itf = disc.topology.interfaces[l];
    let mut out = Vec::new();
    let sides = [
        (
            itf.primary,
            frame.primary_param,
            frame.alpha_primary,
            frame.beta_primary,
            1.0,
            -1.0,
        ),
        (
            itf.secondary,
            frame.secondary_param,
            frame.alpha_secondary,
            frame.beta_secondary,
            if itf.reversed { -1.0 } else { 1.0 },
            1.0,
        ),
    ];
    for (sref, (u, v), alpha, beta, tsign, jump_sign) in sides {
        let tb = disc.spaces[sref.patch].eval(u, v, 1)?;
        let tr = 1 + sref.side.transversal_axis();
        let tg = 1 + sref.side.tangential_axis();
        for (a, b, i, j) in tb.active() {
            let d = tb.param_derivs(a, b);
            let dn = alpha * sref.side.inward_sign() * d[tr] + beta * tsign * d[tg];
            if dn != 0.0 {
                out.push((disc.global(sref.patch, i, j), jump_sign * dn));
            }
        }
    }
    Ok((frame, out))
}

/// Gauss points on the primal elements of interface `l`: `(y, w·ρ̂)`.
pub fn interface_rule(disc: &Discretization, l: usize, q: usize) -> Result<Vec<(f64, f64)>> {
    let rule = gauss_legendre(q)?;
    let mut out = Vec::new();
    for w in disc.topology.interface_breakpoints(l).windows(2) {
        let (ys, ws) = rule.mapped(w[0], w[1]);
        for (y, wy) in ys.into_iter().zip(ws) {
            let t = disc.topology.interface_frame(l, y)?;
            out.push((y, wy * t.rho));
        }
    }
    Ok(out)
}

/// Coupling `b(v, μ) = Σ_ℓ ∫ μ ⟦∂ₙv⟧ dσ` against full coefficients.
pub fn assemble_coupling(
    disc: &Discretization,
    mults: &[MultiplierSpaceHandle],
    q: usize,
) -> Result<(CsrMatrix, Vec<usize>)> {
    let mut offsets = vec![0];
    for m in mults {
        offsets.push(offsets.last().unwrap() + m.dimension());
    }
    let rule = gauss_legendre(q)?;
    let mut trip = Vec::new();
    for (l, m) in mults.iter().enumerate() {
        let Some(kv) = &m.knots else { continue };
        for w in disc.topology.interface_breakpoints(l).windows(2) {
            let (ys, ws) = rule.mapped(w[0], w[1]);
            for (y, wy) in ys.into_iter().zip(ws) {
                let (frame, jump) = normal_jump(disc, l, y)?;
                let mu = kv.eval(y, 0)?;
                let wt = wy * frame.rho;
                for (r, mv) in mu.indices().zip(mu.values()) {
                    if *mv == 0.0 {
                        continue;
                    }
                    for &(d, jv) in &jump {
                        trip.push((offsets[l] + r, d, wt * mv * jv));
                    }
                }
            }
        }
    }
    let rows = *offsets.last().unwrap();
    Ok((CsrMatrix::from_triplets(rows, disc.full_dim(), trip), offsets))
}

/// `B R` as a sparse matrix.
pub fn reduce_columns(b_full: &CsrMatrix, cmap: &ConstraintMap) -> CsrMatrix {
    let mut trip = Vec::new();
    for r in 0..b_full.nrows {
        for (d, v) in b_full.row(r) {
            for &(k, c) in &cmap.rows[d] {
                trip.push((r, k, v * c));
            }
        }
    }
    CsrMatrix::from_triplets(b_full.nrows, cmap.reduced_dim, trip)
}

/// Geometry jet, outward unit normal, arc metric and patch parameter.
type BoundaryFrame = (GeometryJet, [f64; 2], f64, (f64, f64));

/// Outward unit normal and arc metric on boundary side `s` at parameter `t`.
fn boundary_frame(disc: &Discretization, s: SideRef, t: f64) -> Result<BoundaryFrame> {
    let (u, v) = s.side.param(t);
    let jet = disc.topology.patches[s.patch].eval(u, v)?;
    let tan = jacobian_column(&jet, s.side.tangential_axis(), 1.0);
    let g = jacobian_column(&jet, s.side.transversal_axis(), s.side.inward_sign());
    let rho = (tan[0] * tan[0] + tan[1] * tan[1]).sqrt();
    let mut n = [tan[1] / rho, -tan[0] / rho];
    if n[0] * g[0] + n[1] * g[1] > 0.0 {
        n = [-n[0], -n[1]];
    }
    Ok((jet, n, rho, (u, v)))
}

/// Boundary lifting `g` on the clamped coefficients: joint weighted least
/// squares of the trace against `u` and of the normal derivative against
/// `∂ₙu` on every Dirichlet side, with `p+3` Gauss points per element.
/// Vertex jet rows touching clamped coefficients and the rows in `extra`
/// (over full DOFs) are imposed exactly.
pub fn lift_boundary_data(
    disc: &Discretization,
    cmap: &ConstraintMap,
    exact: &ManufacturedSolution,
    extra: &[Vec<(usize, f64)>],
) -> Result<Vec<f64>> {
    let n = cmap.full_dim;
    if *exact == ManufacturedSolution::Zero || disc.dirichlet.is_empty() {
        return Ok(vec![0.0; n]);
    }
    // unknowns: clamped classes
    let mut unknown = vec![usize::MAX; cmap.num_classes];
    let mut nu = 0;
    for c in 0..cmap.num_classes {
        if cmap.class_clamped[c] {
            unknown[c] = nu;
            nu += 1;
        }
    }
    let mut cons: Vec<Vec<(usize, f64)>> = cmap
        .clamped_vertex_rows
        .iter()
        .map(|r| r.iter().map(|&(c, x)| (unknown[c], x)).collect())
        .collect();
    for row in extra {
        let by_class = merge_row(row.iter().map(|&(d, x)| (cmap.class_of[d], x)).collect(), 1e-12);
        let r: Vec<(usize, f64)> = by_class
            .into_iter()
            .filter(|&(c, _)| cmap.class_clamped[c])
            .map(|(c, x)| (unknown[c], x))
            .collect();
        if !r.is_empty() {
            cons.push(r);
        }
    }
    let elim = eliminate(&cons, nu, ELIMINATION_TOL);

    let rule = gauss_legendre(disc.degree + 3)?;
    let mut trip = Vec::new();
    let mut rhs = vec![0.0; elim.dim];
    let mut add_row = |row: Vec<(usize, f64)>, val: f64, weight: f64| -> Result<()> {
        let mut reduced = Vec::new();
        for (d, x) in row {
            let c = cmap.class_of[d];
            if !cmap.class_clamped[c] {
                return Err(Error::SingularFit);
            }
            for &(k, t) in &elim.map[unknown[c]] {
                reduced.push((k, weight * x * t));
            }
        }
        let reduced = merge_row(reduced, 0.0);
        for &(i, xi) in &reduced {
            rhs[i] += xi * weight * val;
            for &(j, xj) in &reduced {
                trip.push((i, j, xi * xj));
            }
        }
        Ok(())
    };
    for &s in &disc.dirichlet {
        let kv = if s.side.tangential_axis() == 0 {
            &disc.spaces[s.patch].u
        } else {
            &disc.spaces[s.patch].v
        };
        for w in kv.breakpoints().windows(2) {
            let (ts, ws) = rule.mapped(w[0], w[1]);
            for (t, wt) in ts.into_iter().zip(ws) {
                let (jet, nrm, rho, (u, v)) = boundary_frame(disc, s, t)?;
                let ex = exact.eval(jet.point);
                let tb = disc.spaces[s.patch].eval(u, v, 2)?;
                let weight = (wt * rho).sqrt();
                let h_e = (w[1] - w[0]) * rho;
                let mut trace = Vec::new();
                let mut slope = Vec::new();
                for (a, b, i, j) in tb.active() {
                    let d = jet.physical(&tb.param_derivs(a, b));
                    let g = disc.global(s.patch, i, j);
                    if d.value != 0.0 {
                        trace.push((g, d.value));
                    }
                    let dn = d.grad[0] * nrm[0] + d.grad[1] * nrm[1];
                    if dn != 0.0 {
                        slope.push((g, dn));
                    }
                }
                let dn_ex = ex.grad[0] * nrm[0] + ex.grad[1] * nrm[1];
                add_row(trace, ex.value, weight)?;
                add_row(slope, dn_ex, weight * h_e)?;
            }
        }
    }
    let normal = CsrMatrix::from_triplets(elim.dim, elim.dim, trip);
    let chol = SkylineCholesky::new(&normal).map_err(|_| Error::SingularFit)?;
    let y = chol.solve(&rhs);
    let mut g = vec![0.0; n];
    for d in 0..n {
        let c = cmap.class_of[d];
        if cmap.class_clamped[c] {
            g[d] = elim.map[unknown[c]].iter().map(|&(k, t)| t * y[k]).sum();
        }
    }
    Ok(g)
}

/// Normal-derivative jump at every interface end whose active functions
/// are all clamped. Any C¹ function satisfies these, so the lifting must
/// too; otherwise the free coefficients next to the boundary have to absorb
/// the mismatch.
pub fn endpoint_rows(disc: &Discretization, cmap: &ConstraintMap) -> Result<Vec<Vec<(usize, f64)>>> {
    let mut rows = Vec::new();
    for l in 0..disc.topology.interfaces.len() {
        for y in [0.0, 1.0] {
            let (_, row) = normal_jump(disc, l, y)?;
            if !row.is_empty() && row.iter().all(|&(d, _)| cmap.class_clamped[cmap.class_of[d]]) {
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// For every multiplier combination `c` with `cᵀ B R = 0`, the row
/// `cᵀ B` over full DOFs. A lifting annihilated by these rows keeps the
/// constraint `B (R u + g) = 0` solvable when `B R` lacks full row rank.
pub fn consistency_rows(b: &CsrMatrix, b_full: &CsrMatrix) -> Vec<Vec<(usize, f64)>> {
    let m = b.nrows;
    if m == 0 {
        return Vec::new();
    }
    let dense = b.to_dense();
    let g = &dense * dense.transpose();
    let eig = g.symmetric_eigen();
    let lmax = eig.eigenvalues.iter().fold(0.0f64, |a, &v| a.max(v));
    let mut rows = Vec::new();
    for k in 0..m {
        if eig.eigenvalues[k] > 1e-12 * lmax {
            continue;
        }
        let c = eig.eigenvectors.column(k);
        let mut row = Vec::new();
        for r in 0..m {
            for (d, v) in b_full.row(r) {
                row.push((d, c[r] * v));
            }
        }
        rows.push(merge_row(row, 1e-14));
    }
    rows
}

/// Assembles the full saddle-point system for `exact` as manufactured
/// solution.
pub fn assemble_system(
    disc: &Discretization,
    cmap: &ConstraintMap,
    mults: &[MultiplierSpaceHandle],
    exact: &ManufacturedSolution,
) -> Result<SaddleSystem> {
    let q = disc.degree + 1;
    let (b_full, multiplier_offsets) = assemble_coupling(disc, mults, q)?;
    let b = reduce_columns(&b_full, cmap);
    let allow_rank_deficient = mults.iter().any(|m| m.mode == crate::spaces::MultiplierMode::Unmerged);
    let mut extra = endpoint_rows(disc, cmap)?;
    if allow_rank_deficient {
        extra.extend(consistency_rows(&b, &b_full));
    }
    let lifting = lift_boundary_data(disc, cmap, exact, &extra)?;
    let (a, rhs_f) = assemble_stiffness(disc, cmap, exact, &lifting, q)?;
    let rhs_g = b_full.mul_vec(&lifting).iter().map(|v| -v).collect();
    Ok(SaddleSystem {
        a,
        b,
        b_full,
        rhs_f,
        rhs_g,
        lifting,
        multiplier_offsets,
        allow_rank_deficient,
    })
}
