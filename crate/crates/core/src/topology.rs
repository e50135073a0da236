//! Multipatch connectivity: sides, interfaces, vertices and interface frames.

use alloc::vec;
use alloc::vec::Vec;

use crate::error::{Error, Result};
use crate::geometry::{GeometryJet, PatchGeometry, Point};
#[allow(unused_imports)]
use num_traits::Float;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    West,
    East,
    South,
    North,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::West, Side::East, Side::South, Side::North];

    /// Parametric point at tangential parameter `t`.
    pub fn param(self, t: f64) -> (f64, f64) {
        match self {
            Side::West => (0.0, t),
            Side::East => (1.0, t),
            Side::South => (t, 0.0),
            Side::North => (t, 1.0),
        }
    }

    /// Parametric axis running along the side (0 = u, 1 = v).
    pub fn tangential_axis(self) -> usize {
        match self {
            Side::West | Side::East => 1,
            Side::South | Side::North => 0,
        }
    }

    pub fn transversal_axis(self) -> usize {
        1 - self.tangential_axis()
    }

    /// +1 if the transversal parameter increases into the patch.
    pub fn inward_sign(self) -> f64 {
        match self {
            Side::West | Side::South => 1.0,
            Side::East | Side::North => -1.0,
        }
    }

    pub fn tangential_len(self, n_u: usize, n_v: usize) -> usize {
        if self.tangential_axis() == 0 {
            n_u
        } else {
            n_v
        }
    }

    /// Multi-index of the DOF in control layer `layer` (0 = on the side)
    /// at tangential position `k`.
    pub fn dof(self, n_u: usize, n_v: usize, layer: usize, k: usize) -> (usize, usize) {
        match self {
            Side::West => (layer, k),
            Side::East => (n_u - 1 - layer, k),
            Side::South => (k, layer),
            Side::North => (k, n_v - 1 - layer),
        }
    }

    /// Corners at `t = 0` and `t = 1`.
    pub fn corners(self) -> (Corner, Corner) {
        match self {
            Side::West => (Corner::SouthWest, Corner::NorthWest),
            Side::East => (Corner::SouthEast, Corner::NorthEast),
            Side::South => (Corner::SouthWest, Corner::SouthEast),
            Side::North => (Corner::NorthWest, Corner::NorthEast),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Side::West => "west",
            Side::East => "east",
            Side::South => "south",
            Side::North => "north",
        }
    }

    pub fn from_name(s: &str) -> Option<Side> {
        Side::ALL.into_iter().find(|side| side.name() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Corner {
    SouthWest,
    SouthEast,
    NorthWest,
    NorthEast,
}

impl Corner {
    pub const ALL: [Corner; 4] = [
        Corner::SouthWest,
        Corner::SouthEast,
        Corner::NorthWest,
        Corner::NorthEast,
    ];

    pub fn param(self) -> (f64, f64) {
        match self {
            Corner::SouthWest => (0.0, 0.0),
            Corner::SouthEast => (1.0, 0.0),
            Corner::NorthWest => (0.0, 1.0),
            Corner::NorthEast => (1.0, 1.0),
        }
    }

    /// The two sides meeting at this corner.
    pub fn sides(self) -> [Side; 2] {
        match self {
            Corner::SouthWest => [Side::South, Side::West],
            Corner::SouthEast => [Side::South, Side::East],
            Corner::NorthWest => [Side::North, Side::West],
            Corner::NorthEast => [Side::North, Side::East],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SideRef {
    pub patch: usize,
    pub side: Side,
}

impl SideRef {
    pub fn new(patch: usize, side: Side) -> Self {
        SideRef { patch, side }
    }
}

/// Shared side of two patches. The primary parameter `ŷ` is the
/// tangential parameter of the primary side; the secondary runs the same
/// way unless `reversed`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Interface {
    pub primary: SideRef,
    pub secondary: SideRef,
    pub reversed: bool,
}

impl Interface {
    /// Secondary tangential parameter for primary parameter `y`.
    pub fn secondary_param(&self, y: f64) -> f64 {
        if self.reversed {
            1.0 - y
        } else {
            y
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Vertex {
    pub position: Point,
    pub incident: Vec<(usize, Corner)>,
    pub on_boundary: bool,
}

#[derive(Debug, Clone)]
pub struct MultiPatchTopology {
    pub patches: Vec<PatchGeometry>,
    pub interfaces: Vec<Interface>,
    pub vertices: Vec<Vertex>,
    pub boundary: Vec<SideRef>,
    pub tolerance: f64,
}

/// Interface geometry at one point of `Γ_ℓ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InterfaceFrame {
    pub y: f64,
    pub point: Point,
    /// `∂_ŷ F₀`, derivative of the primary trace.
    pub tangent: [f64; 2],
    pub rho: f64,
    /// Unit normal, outward from the primary patch.
    pub normal: [f64; 2],
    pub alpha_primary: f64,
    pub beta_primary: f64,
    pub alpha_secondary: f64,
    pub beta_secondary: f64,
    pub primary_param: (f64, f64),
    pub secondary_param: (f64, f64),
    pub primary_jet: GeometryJet,
    pub secondary_jet: GeometryJet,
}

/// Coefficients `(α, β)` with `∇φ·n = α ∂_g φ̂ + β ∂_t φ̂`, where `g` and
/// `t` are the physical images of two parametric directions.
pub fn pullback_coefficients(g: [f64; 2], t: [f64; 2], n: [f64; 2]) -> Result<(f64, f64)> {
    let det = g[0] * t[1] - g[1] * t[0];
    let scale = (g[0] * g[0] + g[1] * g[1]) * (t[0] * t[0] + t[1] * t[1]);
    if !(det.abs() > 1e-12 * scale.sqrt()) {
        return Err(Error::DegenerateJacobian { det });
    }
    Ok(((t[1] * n[0] - t[0] * n[1]) / det, (g[0] * n[1] - g[1] * n[0]) / det))
}

/// Physical image of the parametric direction `axis`, scaled by `sign`.
pub fn jacobian_column(jet: &GeometryJet, axis: usize, sign: f64) -> [f64; 2] {
    [sign * jet.jac[0][axis], sign * jet.jac[1][axis]]
}

/// Default conformity tolerance: `1e-9` times the domain diameter.
pub fn default_tolerance(patches: &[PatchGeometry]) -> f64 {
    let mut lo = [f64::INFINITY; 2];
    let mut hi = [f64::NEG_INFINITY; 2];
    for p in patches {
        for c in &p.control_points {
            for a in 0..2 {
                lo[a] = lo[a].min(c[a]);
                hi[a] = hi[a].max(c[a]);
            }
        }
    }
    let d = ((hi[0] - lo[0]).powi(2) + (hi[1] - lo[1]).powi(2)).sqrt();
    1e-9 * d.max(1e-300)
}

// symmetric about 1/2 so reversed traces compare sample-by-sample
const SAMPLES: [f64; 5] = [0.0, 0.173, 0.5, 0.827, 1.0];

fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

fn side_samples(patch: &PatchGeometry, side: Side) -> Result<Vec<Point>> {
    SAMPLES
        .iter()
        .map(|&t| {
            let (u, v) = side.param(t);
            patch.point(u, v)
        })
        .collect()
}

fn side_breakpoints(patch: &PatchGeometry, side: Side) -> Vec<f64> {
    if side.tangential_axis() == 0 {
        patch.space.u.breakpoints()
    } else {
        patch.space.v.breakpoints()
    }
}

/// Detects interfaces, boundary sides and vertices. `primary_overrides`
/// lists `(primary, secondary)` patch pairs whose designation differs from
/// the lower-index default.
pub fn build_topology(
    patches: Vec<PatchGeometry>,
    tol: f64,
    primary_overrides: &[(usize, usize)],
) -> Result<MultiPatchTopology> {
    if patches.is_empty() {
        return Err(Error::InvalidGeometry("no patches".into()));
    }
    let mut refs = Vec::new();
    let mut samples = Vec::new();
    for (k, p) in patches.iter().enumerate() {
        for side in Side::ALL {
            refs.push(SideRef::new(k, side));
            samples.push(side_samples(p, side)?);
        }
    }
    let last = SAMPLES.len() - 1;
    let mut partner: Vec<Option<(usize, bool)>> = vec![None; refs.len()];
    let mut interfaces = Vec::new();
    for a in 0..refs.len() {
        for b in a + 1..refs.len() {
            if refs[a].patch == refs[b].patch {
                continue;
            }
            let (sa, sb) = (&samples[a], &samples[b]);
            let forward = dist(sa[0], sb[0]) <= tol && dist(sa[last], sb[last]) <= tol;
            let backward = dist(sa[0], sb[last]) <= tol && dist(sa[last], sb[0]) <= tol;
            if !forward && !backward {
                continue;
            }
            let reversed = !forward;
            let traces_agree = (0..SAMPLES.len()).all(|i| {
                let j = if reversed { last - i } else { i };
                dist(sa[i], sb[j]) <= tol
            });
            if !traces_agree {
                if forward && backward {
                    // closed curve endpoints; not a shared side
                    continue;
                }
                return Err(Error::OrientationMismatch(refs[a].patch, refs[b].patch));
            }
            for &x in &[a, b] {
                if partner[x].is_some() {
                    return Err(Error::DanglingSide {
                        patch: refs[x].patch,
                        side: refs[x].side,
                    });
                }
            }
            let ba = side_breakpoints(&patches[refs[a].patch], refs[a].side);
            let mut bb = side_breakpoints(&patches[refs[b].patch], refs[b].side);
            if reversed {
                bb = bb.iter().rev().map(|x| 1.0 - x).collect();
            }
            let conforming = ba.len() == bb.len() && ba.iter().zip(&bb).all(|(x, y)| (x - y).abs() <= 1e-12);
            if !conforming {
                return Err(Error::NonConformingInterface {
                    patch_a: refs[a].patch,
                    side_a: refs[a].side,
                    patch_b: refs[b].patch,
                    side_b: refs[b].side,
                });
            }
            partner[a] = Some((b, reversed));
            partner[b] = Some((a, reversed));
            let swap = primary_overrides
                .iter()
                .any(|&(p, s)| p == refs[b].patch && s == refs[a].patch);
            let (primary, secondary) = if swap { (refs[b], refs[a]) } else { (refs[a], refs[b]) };
            interfaces.push(Interface {
                primary,
                secondary,
                reversed,
            });
        }
    }
    let boundary: Vec<SideRef> = refs
        .iter()
        .zip(&partner)
        .filter(|(_, p)| p.is_none())
        .map(|(r, _)| *r)
        .collect();

    let mut vertices: Vec<Vertex> = Vec::new();
    for (k, p) in patches.iter().enumerate() {
        for corner in Corner::ALL {
            let (u, v) = corner.param();
            let x = p.point(u, v)?;
            let on_boundary = corner.sides().iter().any(|&s| boundary.contains(&SideRef::new(k, s)));
            match vertices.iter_mut().find(|vx| dist(vx.position, x) <= tol) {
                Some(vx) => {
                    vx.incident.push((k, corner));
                    vx.on_boundary |= on_boundary;
                }
                None => vertices.push(Vertex {
                    position: x,
                    incident: vec![(k, corner)],
                    on_boundary,
                }),
            }
        }
    }
    Ok(MultiPatchTopology {
        patches,
        interfaces,
        vertices,
        boundary,
        tolerance: tol,
    })
}

impl MultiPatchTopology {
    pub fn new(patches: Vec<PatchGeometry>) -> Result<Self> {
        let tol = default_tolerance(&patches);
        build_topology(patches, tol, &[])
    }

    pub fn num_patches(&self) -> usize {
        self.patches.len()
    }

    /// Vertices shared by at least two patches.
    pub fn shared_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.vertices.iter().filter(|v| v.incident.len() >= 2)
    }

    pub fn interior_vertices(&self) -> impl Iterator<Item = &Vertex> {
        self.shared_vertices().filter(|v| !v.on_boundary)
    }

    /// Same topology on uniformly refined geometry.
    pub fn refine_uniform(&self, levels: usize) -> Result<Self> {
        let patches = self
            .patches
            .iter()
            .map(|p| p.refine_uniform(levels))
            .collect::<Result<Vec<_>>>()?;
        Ok(MultiPatchTopology {
            patches,
            interfaces: self.interfaces.clone(),
            vertices: self.vertices.clone(),
            boundary: self.boundary.clone(),
            tolerance: self.tolerance,
        })
    }

    /// Breakpoints of interface `l` in the primary parameter.
    pub fn interface_breakpoints(&self, l: usize) -> Vec<f64> {
        let i = &self.interfaces[l];
        side_breakpoints(&self.patches[i.primary.patch], i.primary.side)
    }

    /// Frame at primary parameter `y` on interface `l`.
    pub fn interface_frame(&self, l: usize, y: f64) -> Result<InterfaceFrame> {
        let itf = &self.interfaces[l];
        let (pm, sm) = (itf.primary, itf.secondary);
        let primary_param = pm.side.param(y);
        let secondary_param = sm.side.param(itf.secondary_param(y));
        let jm = self.patches[pm.patch].eval(primary_param.0, primary_param.1)?;
        let js = self.patches[sm.patch].eval(secondary_param.0, secondary_param.1)?;
        let t = jacobian_column(&jm, pm.side.tangential_axis(), 1.0);
        let rho = (t[0] * t[0] + t[1] * t[1]).sqrt();
        let gm = jacobian_column(&jm, pm.side.transversal_axis(), pm.side.inward_sign());
        let gs = jacobian_column(&js, sm.side.transversal_axis(), sm.side.inward_sign());
        let mut normal = [t[1] / rho, -t[0] / rho];
        if normal[0] * gm[0] + normal[1] * gm[1] > 0.0 {
            normal = [-normal[0], -normal[1]];
        }
        let (alpha_primary, beta_primary) = pullback_coefficients(gm, t, normal)?;
        let (alpha_secondary, beta_secondary) = pullback_coefficients(gs, t, normal)?;
        Ok(InterfaceFrame {
            y,
            point: jm.point,
            tangent: t,
            rho,
            normal,
            alpha_primary,
            beta_primary,
            alpha_secondary,
            beta_secondary,
            primary_param,
            secondary_param,
            primary_jet: jm,
            secondary_jet: js,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::bilinear_patch;
    use approx::assert_relative_eq;

    fn unit(x0: f64, y0: f64) -> PatchGeometry {
        bilinear_patch([x0, y0], [x0 + 1.0, y0], [x0, y0 + 1.0], [x0 + 1.0, y0 + 1.0])
    }

    #[test]
    fn two_squares() {
        let t = MultiPatchTopology::new(vec![unit(0.0, 0.0), unit(1.0, 0.0)]).unwrap();
        assert_eq!(t.interfaces.len(), 1);
        assert_eq!(t.boundary.len(), 6);
        assert_eq!(t.interior_vertices().count(), 0);
        assert_eq!(t.shared_vertices().count(), 2);
        let i = t.interfaces[0];
        assert_eq!(i.primary, SideRef::new(0, Side::East));
        assert_eq!(i.secondary, SideRef::new(1, Side::West));
        assert!(!i.reversed);
    }

    #[test]
    fn four_squares() {
        let t = MultiPatchTopology::new(vec![unit(0.0, 0.0), unit(1.0, 0.0), unit(0.0, 1.0), unit(1.0, 1.0)]).unwrap();
        assert_eq!(t.interfaces.len(), 4);
        let inner: Vec<_> = t.interior_vertices().collect();
        assert_eq!(inner.len(), 1);
        assert_eq!(inner[0].incident.len(), 4);
    }

    #[test]
    fn reversed_side_detected() {
        // second patch parametrized with u running right-to-left
        let b = bilinear_patch([2.0, 1.0], [1.0, 1.0], [2.0, 0.0], [1.0, 0.0]);
        let t = MultiPatchTopology::new(vec![unit(0.0, 0.0), b]).unwrap();
        assert_eq!(t.interfaces.len(), 1);
        assert!(t.interfaces[0].reversed);
        let f = t.interface_frame(0, 0.3).unwrap();
        assert_relative_eq!(f.normal[0], 1.0, epsilon = 1e-14);
        assert_relative_eq!(f.alpha_primary, -1.0, epsilon = 1e-14);
        assert_relative_eq!(f.alpha_secondary, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn frame_on_axis_aligned_squares() {
        let t = MultiPatchTopology::new(vec![unit(0.0, 0.0), unit(1.0, 0.0)]).unwrap();
        let f = t.interface_frame(0, 0.4).unwrap();
        assert_relative_eq!(f.rho, 1.0);
        assert_eq!(f.normal, [1.0, 0.0]);
        assert_relative_eq!(f.alpha_primary, -1.0);
        assert_relative_eq!(f.alpha_secondary, 1.0);
        assert_eq!(f.beta_primary, 0.0);
        assert_eq!(f.beta_secondary, 0.0);
    }

    #[test]
    fn override_swaps_roles() {
        let t = build_topology(vec![unit(0.0, 0.0), unit(1.0, 0.0)], 1e-9, &[(1, 0)]).unwrap();
        assert_eq!(t.interfaces[0].primary.patch, 1);
        let f = t.interface_frame(0, 0.5).unwrap();
        assert_eq!(f.normal, [-1.0, 0.0]);
    }

    #[test]
    fn nonconforming_knots_rejected() {
        let a = unit(0.0, 0.0).refine_uniform(1).unwrap();
        let b = unit(1.0, 0.0).refine_uniform(2).unwrap();
        assert!(matches!(
            MultiPatchTopology::new(vec![a, b]),
            Err(Error::NonConformingInterface { .. })
        ));
    }

    #[test]
    fn triple_match_is_dangling() {
        let r = MultiPatchTopology::new(vec![unit(0.0, 0.0), unit(1.0, 0.0), unit(1.0, 0.0)]);
        assert!(matches!(r, Err(Error::DanglingSide { .. })));
    }

    #[test]
    fn side_dof_layers() {
        assert_eq!(Side::East.dof(5, 4, 1, 2), (3, 2));
        assert_eq!(Side::North.dof(5, 4, 0, 3), (3, 3));
        assert_eq!(Side::from_name("south"), Some(Side::South));
    }
}
