//! Discrete primal spaces, the constrained space and the interface spaces.

use alloc::vec;
use alloc::vec::Vec;

use crate::bspline::KnotVector;
use crate::error::{Error, Result};
use crate::geometry::TensorSpace2D;
use crate::linalg::{eliminate, UnionFind};
use crate::topology::{Corner, MultiPatchTopology, Side, SideRef};
#[allow(unused_imports)]
use num_traits::Float;

/// Pivot threshold for redundant constraint rows.
pub const ELIMINATION_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum VertexMode {
    /// Value, gradient and Hessian agree at shared vertices.
    C2,
    /// Only the continuity from gluing.
    C0,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MultiplierMode {
    /// Degree `p−2` with the end elements merged.
    Merged,
    /// Degree `p−2` on the full interface mesh.
    Unmerged,
    /// No coupling.
    None,
}

impl VertexMode {
    pub fn name(self) -> &'static str {
        match self {
            VertexMode::C2 => "c2",
            VertexMode::C0 => "c0",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "c2" => Some(VertexMode::C2),
            "c0" => Some(VertexMode::C0),
            _ => None,
        }
    }
}

impl MultiplierMode {
    pub fn name(self) -> &'static str {
        match self {
            MultiplierMode::Merged => "merged",
            MultiplierMode::Unmerged => "unmerged",
            MultiplierMode::None => "none",
        }
    }

    pub fn from_name(s: &str) -> Option<Self> {
        match s {
            "merged" => Some(MultiplierMode::Merged),
            "unmerged" => Some(MultiplierMode::Unmerged),
            "none" => Some(MultiplierMode::None),
            _ => None,
        }
    }
}

/// Per-patch spaces of degree `p` and maximal smoothness on the
/// geometry breakpoints, with a global numbering of all coefficients.
#[derive(Debug, Clone)]
pub struct Discretization {
    pub topology: MultiPatchTopology,
    pub degree: usize,
    pub spaces: Vec<TensorSpace2D>,
    pub offsets: Vec<usize>,
    pub dirichlet: Vec<SideRef>,
}

impl Discretization {
    /// `topology` is refined `levels` times; `dirichlet` defaults to every
    /// boundary side.
    pub fn new(
        topology: &MultiPatchTopology,
        degree: usize,
        levels: usize,
        dirichlet: Option<Vec<SideRef>>,
    ) -> Result<Self> {
        if degree < 2 {
            return Err(Error::DegreeTooLow { degree, min: 2 });
        }
        let topology = topology.refine_uniform(levels)?;
        let spaces = topology
            .patches
            .iter()
            .map(|g| g.space.with_degree(degree))
            .collect::<Result<Vec<_>>>()?;
        let mut offsets = vec![0];
        for s in &spaces {
            offsets.push(offsets.last().unwrap() + s.dimension());
        }
        let dirichlet = dirichlet.unwrap_or_else(|| topology.boundary.clone());
        for d in &dirichlet {
            if !topology.boundary.contains(d) {
                return Err(Error::InvalidGeometry(alloc::format!(
                    "side {} of patch {} is not on the boundary",
                    d.side.name(),
                    d.patch
                )));
            }
        }
        Ok(Discretization {
            topology,
            degree,
            spaces,
            offsets,
            dirichlet,
        })
    }

    pub fn full_dim(&self) -> usize {
        *self.offsets.last().unwrap()
    }

    pub fn global(&self, patch: usize, i: usize, j: usize) -> usize {
        self.offsets[patch] + self.spaces[patch].flatten(i, j)
    }

    /// Global index of the DOF in `layer` off `side` at tangential `k`.
    pub fn side_dof(&self, s: SideRef, layer: usize, k: usize) -> usize {
        let sp = &self.spaces[s.patch];
        let (i, j) = s.side.dof(sp.n_u(), sp.n_v(), layer, k);
        self.global(s.patch, i, j)
    }

    pub fn side_len(&self, s: SideRef) -> usize {
        let sp = &self.spaces[s.patch];
        s.side.tangential_len(sp.n_u(), sp.n_v())
    }

    /// Largest parametric element size over all patches.
    pub fn mesh_size(&self) -> f64 {
        self.spaces.iter().map(|s| s.mesh_size()).fold(0.0, f64::max)
    }

    /// Largest physical element diameter (corner-to-corner estimate).
    pub fn physical_mesh_size(&self) -> Result<f64> {
        let mut h: f64 = 0.0;
        for (g, s) in self.topology.patches.iter().zip(&self.spaces) {
            let bu = s.u.breakpoints();
            let bv = s.v.breakpoints();
            for wu in bu.windows(2) {
                for wv in bv.windows(2) {
                    let a = g.point(wu[0], wv[0])?;
                    let b = g.point(wu[1], wv[1])?;
                    let c = g.point(wu[1], wv[0])?;
                    let d = g.point(wu[0], wv[1])?;
                    let d1 = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    let d2 = ((c[0] - d[0]).powi(2) + (c[1] - d[1]).powi(2)).sqrt();
                    h = h.max(d1).max(d2);
                }
            }
        }
        Ok(h)
    }
}

/// Free-DOF mask of one patch space after clamping two layers off each
/// listed side.
pub fn clamp_boundary(space: &TensorSpace2D, sides: &[Side]) -> Vec<bool> {
    let (nu, nv) = (space.n_u(), space.n_v());
    let mut free = vec![true; nu * nv];
    for &side in sides {
        for layer in 0..2 {
            for k in 0..side.tangential_len(nu, nv) {
                let (i, j) = side.dof(nu, nv, layer, k);
                free[space.flatten(i, j)] = false;
            }
        }
    }
    free
}

/// Identifies coincident trace coefficients across every interface.
pub fn glue_c0(disc: &Discretization) -> Result<UnionFind> {
    let mut uf = UnionFind::new(disc.full_dim());
    for itf in &disc.topology.interfaces {
        let n = disc.side_len(itf.primary);
        if disc.side_len(itf.secondary) != n {
            return Err(Error::NonConformingInterface {
                patch_a: itf.primary.patch,
                side_a: itf.primary.side,
                patch_b: itf.secondary.patch,
                side_b: itf.secondary.side,
            });
        }
        for k in 0..n {
            let ks = if itf.reversed { n - 1 - k } else { k };
            uf.union(disc.side_dof(itf.primary, 0, k), disc.side_dof(itf.secondary, 0, ks));
        }
    }
    Ok(uf)
}

/// Physical value, gradient and Hessian at a patch corner as linear
/// functionals: `6` rows of `(global DOF, coefficient)`.
pub fn corner_jet(disc: &Discretization, patch: usize, corner: Corner) -> Result<[Vec<(usize, f64)>; 6]> {
    let (u, v) = corner.param();
    let geo = &disc.topology.patches[patch];
    let jet = geo.eval(u, v)?;
    let tb = disc.spaces[patch].eval(u, v, 2)?;
    let mut rows: [Vec<(usize, f64)>; 6] = Default::default();
    for (a, b, i, j) in tb.active() {
        let d = jet.physical(&tb.param_derivs(a, b));
        let vals = [d.value, d.grad[0], d.grad[1], d.hess[0], d.hess[1], d.hess[2]];
        let g = disc.global(patch, i, j);
        for (row, x) in rows.iter_mut().zip(vals) {
            if x != 0.0 {
                row.push((g, x));
            }
        }
    }
    Ok(rows)
}

/// Jet equality rows between the first incident patch of every shared
/// vertex and each other incident patch.
pub fn vertex_c2_rows(disc: &Discretization) -> Result<Vec<Vec<(usize, f64)>>> {
    let mut rows = Vec::new();
    for vx in disc.topology.shared_vertices() {
        let (p0, c0) = vx.incident[0];
        let base = corner_jet(disc, p0, c0)?;
        for &(pk, ck) in &vx.incident[1..] {
            let other = corner_jet(disc, pk, ck)?;
            for (r0, rk) in base.iter().zip(&other) {
                let mut row = r0.clone();
                row.extend(rk.iter().map(|&(g, x)| (g, -x)));
                rows.push(row);
            }
        }
    }
    Ok(rows)
}

/// Sums duplicate columns and drops entries that cancelled down to
/// round-off relative to the largest input entry.
pub fn merge_row(mut row: Vec<(usize, f64)>, rel_tol: f64) -> Vec<(usize, f64)> {
    let scale = row.iter().fold(0.0f64, |m, &(_, x)| m.max(x.abs()));
    row.sort_by_key(|&(c, _)| c);
    let mut out: Vec<(usize, f64)> = Vec::with_capacity(row.len());
    for (c, x) in row {
        match out.last_mut() {
            Some(last) if last.0 == c => last.1 += x,
            _ => out.push((c, x)),
        }
    }
    out.retain(|&(_, x)| x.abs() > rel_tol * scale);
    out
}

/// Linear map `R` from reduced coordinates onto the coefficients of the
/// constrained space, stored by rows of full DOFs.
#[derive(Debug, Clone)]
pub struct ConstraintMap {
    pub full_dim: usize,
    pub reduced_dim: usize,
    /// Row `d` of `R`: `(reduced index, coefficient)`.
    pub rows: Vec<Vec<(usize, f64)>>,
    pub clamped: Vec<bool>,
    /// Glued class of each full DOF.
    pub class_of: Vec<usize>,
    pub num_classes: usize,
    pub class_clamped: Vec<bool>,
    /// Vertex rows restricted to clamped classes, for the lifting.
    pub clamped_vertex_rows: Vec<Vec<(usize, f64)>>,
    pub vertex_rows_raw: usize,
    pub vertex_rank: usize,
    pub vertex_mode: VertexMode,
}

impl ConstraintMap {
    pub fn build(disc: &Discretization, mode: VertexMode) -> Result<Self> {
        let n = disc.full_dim();
        let mut uf = glue_c0(disc)?;
        let mut class_of = vec![usize::MAX; n];
        let mut root_class = vec![usize::MAX; n];
        let mut num_classes = 0;
        for d in 0..n {
            let r = uf.find(d);
            if root_class[r] == usize::MAX {
                root_class[r] = num_classes;
                num_classes += 1;
            }
            class_of[d] = root_class[r];
        }
        let mut clamped = vec![false; n];
        for (k, space) in disc.spaces.iter().enumerate() {
            let sides: Vec<Side> = disc.dirichlet.iter().filter(|s| s.patch == k).map(|s| s.side).collect();
            let free = clamp_boundary(space, &sides);
            for (flat, f) in free.iter().enumerate() {
                if !f {
                    clamped[disc.offsets[k] + flat] = true;
                }
            }
        }
        let mut class_clamped = vec![false; num_classes];
        for d in 0..n {
            class_clamped[class_of[d]] |= clamped[d];
        }
        // free classes get consecutive indices
        let mut free_index = vec![usize::MAX; num_classes];
        let mut nfree = 0;
        for c in 0..num_classes {
            if !class_clamped[c] {
                free_index[c] = nfree;
                nfree += 1;
            }
        }

        let mut free_rows = Vec::new();
        let mut clamped_rows = Vec::new();
        let mut raw = 0;
        if mode == VertexMode::C2 {
            let rows = vertex_c2_rows(disc)?;
            raw = rows.len();
            for row in rows {
                let by_class = merge_row(row.iter().map(|&(d, x)| (class_of[d], x)).collect(), 1e-12);
                let mut f = Vec::new();
                let mut c = Vec::new();
                for (cls, x) in by_class {
                    if class_clamped[cls] {
                        c.push((cls, x));
                    } else {
                        f.push((free_index[cls], x));
                    }
                }
                if !f.is_empty() {
                    free_rows.push(f);
                }
                if !c.is_empty() {
                    clamped_rows.push(c);
                }
            }
        }
        let elim = eliminate(&free_rows, nfree, ELIMINATION_TOL);
        let mut rows = vec![Vec::new(); n];
        for d in 0..n {
            let c = class_of[d];
            if !class_clamped[c] {
                rows[d] = elim.map[free_index[c]].clone();
            }
        }
        Ok(ConstraintMap {
            full_dim: n,
            reduced_dim: elim.dim,
            rows,
            clamped,
            class_of,
            num_classes,
            class_clamped,
            clamped_vertex_rows: clamped_rows,
            vertex_rows_raw: raw,
            vertex_rank: elim.rank,
            vertex_mode: mode,
        })
    }

    /// `R z + g`.
    pub fn expand(&self, z: &[f64], lifting: Option<&[f64]>) -> Vec<f64> {
        let mut x: Vec<f64> = self
            .rows
            .iter()
            .map(|r| r.iter().map(|&(k, c)| c * z[k]).sum())
            .collect();
        if let Some(g) = lifting {
            for (xi, gi) in x.iter_mut().zip(g) {
                *xi += gi;
            }
        }
        x
    }

    /// `Rᵀ y`.
    pub fn restrict(&self, y: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; self.reduced_dim];
        for (r, yd) in self.rows.iter().zip(y) {
            for &(k, c) in r {
                z[k] += c * yd;
            }
        }
        z
    }

    /// Eigenvalue condition number of `RᵀR` (dense; small problems only).
    pub fn gram_condition(&self) -> f64 {
        if self.reduced_dim == 0 {
            return 1.0;
        }
        let mut g = nalgebra::DMatrix::<f64>::zeros(self.reduced_dim, self.reduced_dim);
        for r in &self.rows {
            for &(a, x) in r {
                for &(b, y) in r {
                    g[(a, b)] += x * y;
                }
            }
        }
        let e = g.symmetric_eigen().eigenvalues;
        let (lo, hi) = e
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(l, h), &v| (l.min(v), h.max(v)));
        hi / lo
    }
}

/// Secondary-side coefficients generating the normal-derivative traces
/// `W_ℓ`: the second layer off `Γ_ℓ` minus the two nearest each end.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceSpaceHandle {
    pub interface: usize,
    /// Global DOF indices, ordered by secondary tangential position.
    pub generators: Vec<usize>,
    pub n_l: usize,
}

impl TraceSpaceHandle {
    pub fn dimension(&self) -> usize {
        self.generators.len()
    }
}

pub fn build_trace_space(disc: &Discretization, l: usize) -> TraceSpaceHandle {
    let s = disc.topology.interfaces[l].secondary;
    let n = disc.side_len(s);
    let generators = (2..n.saturating_sub(2)).map(|k| disc.side_dof(s, 1, k)).collect();
    TraceSpaceHandle {
        interface: l,
        generators,
        n_l: n,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MultiplierSpaceHandle {
    pub interface: usize,
    pub mode: MultiplierMode,
    /// Basis on the primary parameter of `Γ_ℓ`; `None` without coupling.
    pub knots: Option<KnotVector>,
}

impl MultiplierSpaceHandle {
    pub fn dimension(&self) -> usize {
        self.knots.as_ref().map_or(0, |k| k.dimension())
    }
}

/// Degree `p−2` multipliers on the interface breakpoints.
pub fn build_multiplier_space(
    breakpoints: &[f64],
    l: usize,
    p: usize,
    mode: MultiplierMode,
) -> Result<MultiplierSpaceHandle> {
    if p < 2 {
        return Err(Error::DegreeTooLow { degree: p, min: 2 });
    }
    let knots = match mode {
        MultiplierMode::None => None,
        MultiplierMode::Unmerged => Some(KnotVector::open_on_breakpoints(p - 2, breakpoints)?),
        MultiplierMode::Merged => Some(KnotVector::open_on_breakpoints(p - 2, breakpoints)?.merge_end_elements()?),
    };
    Ok(MultiplierSpaceHandle {
        interface: l,
        mode,
        knots,
    })
}

pub fn multiplier_spaces(disc: &Discretization, mode: MultiplierMode) -> Result<Vec<MultiplierSpaceHandle>> {
    (0..disc.topology.interfaces.len())
        .map(|l| build_multiplier_space(&disc.topology.interface_breakpoints(l), l, disc.degree, mode))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::builtin;

    fn disc(name: &str, p: usize, levels: usize) -> Discretization {
        let t = MultiPatchTopology::new(builtin::builtin(name).unwrap()).unwrap();
        Discretization::new(&t, p, levels, None).unwrap()
    }

    #[test]
    fn clamp_counts() {
        let s = TensorSpace2D::new(KnotVector::uniform(3, 8).unwrap(), KnotVector::uniform(3, 8).unwrap());
        let count = |sides: &[Side]| clamp_boundary(&s, sides).iter().filter(|&&f| f).count();
        assert_eq!(count(&Side::ALL), 49);
        assert_eq!(count(&[]), 121);
        assert_eq!(count(&[Side::North]), 99);
    }

    #[test]
    fn gluing_reduces_by_trace_count() {
        let d = disc("square2", 2, 2);
        let mut uf = glue_c0(&d).unwrap();
        let roots: alloc::collections::BTreeSet<usize> = (0..d.full_dim()).map(|x| uf.find(x)).collect();
        assert_eq!(d.full_dim(), 72);
        assert_eq!(roots.len(), 66);
    }

    #[test]
    fn trace_and_multiplier_dimensions() {
        let d = disc("square2", 3, 3);
        let w = build_trace_space(&d, 0);
        assert_eq!(w.n_l, 11);
        assert_eq!(w.dimension(), 7);
        let m = multiplier_spaces(&d, MultiplierMode::Merged).unwrap();
        assert_eq!(m[0].dimension(), 7);
        let u = multiplier_spaces(&d, MultiplierMode::Unmerged).unwrap();
        assert_eq!(u[0].dimension(), 9);
        let d2 = disc("square2", 2, 3);
        let m2 = multiplier_spaces(&d2, MultiplierMode::Merged).unwrap();
        assert_eq!(m2[0].knots.as_ref().unwrap().degree(), 0);
        assert_eq!(m2[0].dimension(), 6);
        assert_eq!(build_trace_space(&d2, 0).dimension(), 6);
    }

    #[test]
    fn multiplier_needs_degree_two() {
        assert!(matches!(
            build_multiplier_space(&[0.0, 0.5, 1.0], 0, 1, MultiplierMode::Merged),
            Err(Error::DegreeTooLow { .. })
        ));
    }

    #[test]
    fn single_patch_is_dirichlet_only() {
        let t = MultiPatchTopology::new(vec![builtin::square2().remove(0)]).unwrap();
        let d = Discretization::new(&t, 3, 2, None).unwrap();
        let r = ConstraintMap::build(&d, VertexMode::C2).unwrap();
        assert_eq!(r.reduced_dim, 9);
        assert_eq!(r.vertex_rows_raw, 0);
    }
}
